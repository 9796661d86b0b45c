class A { int x ; }
