//! `weft`: weave grammar aspects and run the generators they drive.
//!
//! Exit codes: 0 success, 1 weave or annotation errors, 2 syntax errors in
//! inputs and usage errors, 3 lexing or parsing errors in the program input.

use std::fmt::Display;
use std::io::{IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use weft_core::annotations::{AnnotationStore, AttachError, Provenance, WovenDocument};
use weft_core::aspect::{parse_aspect, weave, Aspect, WeaveDiagnostic};
use weft_core::grammar::GrammarError;
use weft_core::highlight::{assign_groups, html_document, render_ansi, render_html, Palette};
use weft_core::pretty::{format, FormatError};
use weft_core::runtime::{parse_input, tokenize, LexerSpec, ParseError, ParseTree};
use weft_core::syntax::line_col;
use weft_core::{parse_grammar, GrammarTree};

#[derive(Parser)]
#[command(name = "weft", version, about = "Weave annotation aspects into grammars and generate tools from them")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Weave the aspects and report pattern and annotation errors.
    Check(WeaveArgs),
    /// Weave the aspects and write the annotated grammar tree as JSON.
    Weave {
        #[command(flatten)]
        weave: WeaveArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Color a program by the `group` attributes of the woven grammar.
    Highlight {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_enum, default_value_t = RenderFormat::Ansi)]
        format: RenderFormat,
        /// Lines of `group = color [bold] [underline]`.
        #[arg(long)]
        palette: Option<PathBuf>,
        /// Whether ANSI output carries escape codes. `auto` colors only a
        /// terminal and honors NO_COLOR; WEFT_COLOR sets the default.
        #[arg(long, value_enum, env = "WEFT_COLOR", default_value_t = ColorChoice::Auto)]
        color: ColorChoice,
    },
    /// Pretty-print a program by the `before`/`after` attributes of the woven grammar.
    Format(RunArgs),
}

#[derive(Args)]
struct WeaveArgs {
    #[arg(short, long)]
    grammar: PathBuf,
    /// Aspect files, woven in the order given.
    #[arg(short, long = "aspect", required = true)]
    aspects: Vec<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    weave: WeaveArgs,
    /// Terminal definitions: `NAME = /regex/` and `skip = /regex/` lines.
    #[arg(short, long)]
    lexer: PathBuf,
    /// Nonterminal the input is an instance of; defaults to the first rule.
    #[arg(long)]
    start: Option<String>,
    #[arg(short, long)]
    output: Option<PathBuf>,
    input: PathBuf,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum RenderFormat {
    Ansi,
    Html,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ColorChoice {
    Auto,
    Always,
    Never,
}

/// Why a command stopped: an exit code and the diagnostics to print.
struct Failure {
    code: u8,
    messages: Vec<String>,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            messages: vec![message.into()],
        }
    }
}

const WEAVE: u8 = 1;
const INPUT_SYNTAX: u8 = 2;
const RUNTIME: u8 = 3;

/// A file read into memory, remembered for positions in diagnostics.
struct Source {
    path: PathBuf,
    text: String,
}

impl Source {
    fn read(path: &Path) -> Result<Self, Failure> {
        std::fs::read_to_string(path)
            .map(|text| Source {
                path: path.to_path_buf(),
                text,
            })
            .map_err(|e| Failure::new(INPUT_SYNTAX, format!("{}: {e}", path.display())))
    }

    fn at(&self, offset: usize, message: impl Display) -> String {
        let (line, col) = line_col(&self.text, offset.min(self.text.len()));
        format!("{}:{line}:{col}: {message}", self.path.display())
    }
}

struct Woven {
    grammar_src: Source,
    grammar: GrammarTree,
    aspect_srcs: Vec<Source>,
    aspects: Vec<Aspect>,
    store: AnnotationStore,
}

impl Woven {
    /// Where the advice that attached something with `prov` was written.
    fn advice_location(&self, prov: Provenance) -> String {
        let src = &self.aspect_srcs[prov.aspect];
        let offset = prov.rule.map_or(0, |r| self.aspects[prov.aspect].rules[r].span.start);
        let (line, col) = line_col(&src.text, offset);
        format!("{}:{line}:{col}", src.path.display())
    }
}

fn grammar_error(src: &Source, e: &GrammarError) -> String {
    match e {
        GrammarError::Syntax(s) => src.at(s.offset, &s.message),
        other => src.at(other.offset(), other),
    }
}

fn load(args: &WeaveArgs) -> Result<Woven, Failure> {
    let grammar_src = Source::read(&args.grammar)?;
    let grammar = parse_grammar(&grammar_src.text).map_err(|e| Failure::new(INPUT_SYNTAX, grammar_error(&grammar_src, &e)))?;
    let mut aspect_srcs = Vec::new();
    let mut aspects = Vec::new();
    let mut syntax = Vec::new();
    for path in &args.aspects {
        let src = Source::read(path)?;
        match parse_aspect(&src.text) {
            Ok(a) => aspects.push(a),
            Err(e) => syntax.push(src.at(e.offset, &e.message)),
        }
        aspect_srcs.push(src);
    }
    if !syntax.is_empty() {
        return Err(Failure {
            code: INPUT_SYNTAX,
            messages: syntax,
        });
    }
    let empty = AnnotationStore::new(&grammar);
    let mut woven = Woven {
        grammar_src,
        grammar,
        aspect_srcs,
        aspects,
        store: empty,
    };
    match weave(&woven.grammar, &woven.aspects) {
        Ok(store) => {
            woven.store = store;
            Ok(woven)
        }
        Err(diags) => Err(Failure {
            code: WEAVE,
            messages: diags.iter().map(|d| weave_message(&woven, d)).collect(),
        }),
    }
}

fn weave_message(w: &Woven, d: &WeaveDiagnostic) -> String {
    let src = &w.aspect_srcs[d.aspect()];
    match d {
        WeaveDiagnostic::Multiplicity(e) => src.at(d.offset(), e),
        WeaveDiagnostic::Attach {
            error: AttachError::Conflict(c),
            ..
        } => {
            let (line, col) = line_col(&w.grammar_src.text, c.span.start);
            src.at(
                d.offset(),
                format!(
                    "conflicting values for `{}` on {} at {}:{line}:{col}: {} (from {}) vs {} (from {})",
                    c.key,
                    w.grammar.kind(c.node),
                    w.grammar_src.path.display(),
                    c.existing,
                    w.advice_location(c.existing_from),
                    c.incoming,
                    w.advice_location(c.incoming_from),
                ),
            )
        }
        WeaveDiagnostic::Attach { error, .. } => src.at(d.offset(), error),
    }
}

/// Lex and parse the program input against the woven grammar.
fn parse_program(w: &Woven, run: &RunArgs) -> Result<(Source, ParseTree), Failure> {
    let lexer_src = Source::read(&run.lexer)?;
    let spec = LexerSpec::parse(&lexer_src.text).map_err(|e| {
        Failure::new(
            INPUT_SYNTAX,
            format!("{}:{}: {}", lexer_src.path.display(), e.line, e.message),
        )
    })?;
    let missing = spec.missing_terminals(&w.grammar);
    if !missing.is_empty() {
        return Err(Failure::new(
            INPUT_SYNTAX,
            format!(
                "{}: no regular expression for terminal(s) {}",
                lexer_src.path.display(),
                missing.join(", ")
            ),
        ));
    }
    let start = match &run.start {
        Some(s) => s.clone(),
        None => w
            .grammar
            .rules()
            .first()
            .and_then(|&r| w.grammar.symbol_name(r))
            .ok_or_else(|| Failure::new(INPUT_SYNTAX, "the grammar defines no rules"))?
            .to_string(),
    };
    let input = Source::read(&run.input)?;
    let tokens = tokenize(&spec, &w.grammar, &input.text)
        .map_err(|e| Failure::new(RUNTIME, input.at(e.offset, format!("no token matches at {:?}", e.found))))?;
    let tree = parse_input(&w.grammar, &start, &tokens).map_err(|e| match &e {
        ParseError::UnknownStart(_) => Failure::new(INPUT_SYNTAX, format!("--start: {e}")),
        ParseError::Unexpected { offset, .. } => Failure::new(RUNTIME, input.at(*offset, &e)),
    })?;
    Ok((input, tree))
}

/// Write `text` to `path`, or stdout. A file is replaced only once the
/// whole text is on disk next to it.
fn emit(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure::new(INPUT_SYNTAX, format!("cannot write output: {e}"));
    match path {
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(io)
        }
        Some(p) => {
            let name = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            let tmp = p.with_file_name(format!(".{name}.weft-tmp"));
            std::fs::write(&tmp, text)
                .and_then(|_| std::fs::rename(&tmp, p))
                .map_err(|e| {
                    let _ = std::fs::remove_file(&tmp);
                    io(e)
                })
        }
    }
}

fn use_color(choice: ColorChoice, to_file: bool) -> bool {
    match choice {
        ColorChoice::Always => true,
        ColorChoice::Never => false,
        ColorChoice::Auto => {
            std::env::var_os("NO_COLOR").map_or(true, |v| v.is_empty()) && !to_file && std::io::stdout().is_terminal()
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Check(args) => load(&args).map(|_| ()),
        Command::Weave { weave, output } => {
            let w = load(&weave)?;
            emit(output.as_deref(), &WovenDocument::new(&w.grammar, &w.store).to_json())
        }
        Command::Highlight {
            run,
            format,
            palette,
            color,
        } => {
            let palette = match &palette {
                None => Palette::default(),
                Some(p) => {
                    let src = Source::read(p)?;
                    Palette::parse(&src.text).map_err(|e| {
                        Failure::new(INPUT_SYNTAX, format!("{}:{}: {}", src.path.display(), e.line, e.message))
                    })?
                }
            };
            let w = load(&run.weave)?;
            let (input, tree) = parse_program(&w, &run)?;
            let spans = assign_groups(&tree, &w.store);
            let rendered = match format {
                RenderFormat::Ansi => {
                    let palette = if use_color(color, run.output.is_some()) {
                        palette
                    } else {
                        Palette::default()
                    };
                    render_ansi(&input.text, &spans, &palette)
                }
                RenderFormat::Html => render_html(&input.text, &spans).map(|f| html_document(&f, &palette)),
            }
            .map_err(|e| Failure::new(RUNTIME, input.at(0, e)))?;
            emit(run.output.as_deref(), &rendered)
        }
        Command::Format(run) => {
            let w = load(&run.weave)?;
            let (input, tree) = parse_program(&w, &run)?;
            let formatted = format(&tree, &w.store).map_err(|e| match &e {
                FormatError::Decode(d) => {
                    let at = d.provenance.map_or_else(|| w.grammar_src.path.display().to_string(), |p| w.advice_location(p));
                    Failure::new(WEAVE, format!("{at}: {e}"))
                }
                FormatError::IndentUnit => Failure::new(WEAVE, e.to_string()),
            })?;
            for warning in &formatted.warnings {
                eprintln!("{}: warning: {warning}", input.path.display());
            }
            emit(run.output.as_deref(), &formatted.text)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            for m in &f.messages {
                eprintln!("{m}");
            }
            ExitCode::from(f.code)
        }
    }
}
