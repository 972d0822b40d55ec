//! The `petitc` driver.

use std::fs;
use std::io::{self, BufRead, Write};
use std::path::PathBuf;

use clap::{ArgGroup, Parser};

use crate::ast::print_ast;
use crate::calc::eval_calc;
use crate::diagnostics::{Diagnostic, Phase};
use crate::irvm::{self, LineOutput, TextInput};
use crate::lexer::{dump_tokens, tokenize};
use crate::pipeline::{analyze_source, compile_source, exit_code, parse_source, Failure};

/// Exit status for unreadable input or unwritable output.
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    Tokens,
    Ast,
    Check,
    Ir,
    #[default]
    Run,
    Calc,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DriverConfig {
    pub mode: Mode,
    /// Read from standard input when absent.
    pub input: Option<PathBuf>,
    /// Write to standard output when absent.
    pub output: Option<PathBuf>,
}

#[derive(Debug, Parser)]
#[command(name = "petitc", version, about = "Compiler for the Petit language")]
#[command(group(ArgGroup::new("mode").args(["tokens", "ast", "check", "ir", "run", "calc"])))]
struct Args {
    /// Print the token stream
    #[arg(long)]
    tokens: bool,
    /// Print the abstract syntax tree
    #[arg(long)]
    ast: bool,
    /// Run semantic analysis and print the typed tree
    #[arg(long)]
    check: bool,
    /// Emit LLVM IR
    #[arg(long)]
    ir: bool,
    /// Compile and interpret the program (default)
    #[arg(long)]
    run: bool,
    /// Evaluate comma-separated integer expressions
    #[arg(long)]
    calc: bool,
    /// Output file
    #[arg(short = 'o', value_name = "FILE")]
    output: Option<PathBuf>,
    /// Source file (.pt); standard input when omitted
    input: Option<PathBuf>,
}

impl DriverConfig {
    pub fn from_args<I, T>(args: I) -> Result<Self, clap::Error>
    where
        I: IntoIterator<Item = T>,
        T: Into<std::ffi::OsString> + Clone,
    {
        let args = Args::try_parse_from(args)?;
        let mode = if args.tokens {
            Mode::Tokens
        } else if args.ast {
            Mode::Ast
        } else if args.check {
            Mode::Check
        } else if args.ir {
            Mode::Ir
        } else if args.calc {
            Mode::Calc
        } else {
            Mode::Run
        };
        Ok(DriverConfig { mode, input: args.input, output: args.output })
    }
}

fn report(stderr: &mut dyn Write, diagnostics: &[Diagnostic]) {
    for d in diagnostics {
        let _ = writeln!(stderr, "{d}");
    }
}

fn fail(stderr: &mut dyn Write, failure: Failure) -> i32 {
    report(stderr, &failure.diagnostics);
    failure.exit_code()
}

/// Runs one invocation. `stdin` supplies the source when no input file is
/// configured, and otherwise feeds `read` in run mode.
pub fn main_pipeline(
    config: &DriverConfig,
    stdin: &mut dyn BufRead,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32 {
    let source = match &config.input {
        Some(path) => match fs::read_to_string(path) {
            Ok(s) => s,
            Err(e) => {
                let _ = writeln!(stderr, "petitc: cannot read {}: {e}", path.display());
                return EXIT_IO;
            }
        },
        None => {
            let mut s = String::new();
            if let Err(e) = stdin.read_to_string(&mut s) {
                let _ = writeln!(stderr, "petitc: cannot read standard input: {e}");
                return EXIT_IO;
            }
            s
        }
    };

    let mut file_out;
    let out: &mut dyn Write = match &config.output {
        Some(path) => match fs::File::create(path) {
            Ok(f) => {
                file_out = io::BufWriter::new(f);
                &mut file_out
            }
            Err(e) => {
                let _ = writeln!(stderr, "petitc: cannot create {}: {e}", path.display());
                return EXIT_IO;
            }
        },
        None => stdout,
    };

    let code = run_mode(config.mode, &source, stdin, out, stderr);
    if let Err(e) = out.flush() {
        let _ = writeln!(stderr, "petitc: cannot write output: {e}");
        return EXIT_IO;
    }
    code
}

fn run_mode(mode: Mode, source: &str, stdin: &mut dyn BufRead, out: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let written = |r: io::Result<()>, stderr: &mut dyn Write| match r {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "petitc: cannot write output: {e}");
            EXIT_IO
        }
    };
    match mode {
        Mode::Tokens => {
            let (tokens, diagnostics) = tokenize(source);
            let code = written(out.write_all(dump_tokens(&tokens).as_bytes()), stderr);
            report(stderr, &diagnostics);
            if code != 0 {
                code
            } else if diagnostics.is_empty() {
                0
            } else {
                exit_code(Phase::Lexical)
            }
        }
        Mode::Ast => match parse_source(source) {
            Ok(program) => written(out.write_all(print_ast(&program, false).as_bytes()), stderr),
            Err(failure) => fail(stderr, failure),
        },
        Mode::Check => match analyze_source(source) {
            Ok((program, analysis)) => {
                let code = written(out.write_all(print_ast(&program, true).as_bytes()), stderr);
                report(stderr, &analysis.diagnostics);
                if code != 0 {
                    code
                } else if analysis.is_clean() {
                    0
                } else {
                    exit_code(Phase::Semantic)
                }
            }
            Err(failure) => fail(stderr, failure),
        },
        Mode::Ir => match compile_source(source) {
            Ok(ir) => written(out.write_all(ir.as_bytes()), stderr),
            Err(failure) => fail(stderr, failure),
        },
        Mode::Run => {
            let ir = match compile_source(source) {
                Ok(ir) => ir,
                Err(failure) => return fail(stderr, failure),
            };
            let module = match irvm::parse_ir(&ir) {
                Ok(m) => m,
                Err(e) => {
                    let _ = writeln!(stderr, "{e}");
                    return exit_code(Phase::Runtime);
                }
            };
            let mut input = TextInput::new(stdin);
            let mut sink = LineOutput(out);
            match irvm::run(&module, "main", &[], &mut input, &mut sink) {
                Ok(_) => 0,
                Err(e) => {
                    let _ = writeln!(stderr, "{e}");
                    exit_code(Phase::Runtime)
                }
            }
        }
        Mode::Calc => match eval_calc(source) {
            Ok(values) => {
                let text: String = values.iter().map(|v| format!("{v}\n")).collect();
                written(out.write_all(text.as_bytes()), stderr)
            }
            Err(diagnostics) => {
                report(stderr, &diagnostics);
                diagnostics.first().map_or(1, |d| exit_code(d.phase))
            }
        },
    }
}
