class Example<A, B> extends A implements Some<? super B> { }
