//! Phase sequencing shared by the command-line driver and the bindings.

use crate::ast::Node;
use crate::codegen::codegen_program;
use crate::diagnostics::{Diagnostic, Phase};
use crate::lexer::tokenize;
use crate::parser::parse_program;
use crate::semantics::{check_program, Analysis};

/// Diagnostics from the first phase that failed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub phase: Phase,
    pub diagnostics: Vec<Diagnostic>,
}

impl Failure {
    /// Process exit status for this failure.
    pub fn exit_code(&self) -> i32 {
        exit_code(self.phase)
    }
}

pub fn exit_code(phase: Phase) -> i32 {
    match phase {
        Phase::Lexical | Phase::Syntax => 1,
        Phase::Semantic => 2,
        Phase::Runtime => 3,
    }
}

/// Lexes and parses `source`.
pub fn parse_source(source: &str) -> Result<Node, Failure> {
    let (tokens, lexical) = tokenize(source);
    if !lexical.is_empty() {
        return Err(Failure { phase: Phase::Lexical, diagnostics: lexical });
    }
    match parse_program(&tokens) {
        (Some(program), _) => Ok(program),
        (None, diagnostics) => Err(Failure { phase: Phase::Syntax, diagnostics }),
    }
}

/// Parses and checks `source`. The annotated tree is returned even when
/// semantic errors were found.
pub fn analyze_source(source: &str) -> Result<(Node, Analysis), Failure> {
    let mut program = parse_source(source)?;
    let analysis = check_program(&mut program);
    Ok((program, analysis))
}

/// Runs every phase up to LLVM IR emission.
pub fn compile_source(source: &str) -> Result<String, Failure> {
    let (program, analysis) = analyze_source(source)?;
    if !analysis.is_clean() {
        return Err(Failure { phase: Phase::Semantic, diagnostics: analysis.diagnostics });
    }
    codegen_program(&program).map_err(|e| Failure { phase: Phase::Semantic, diagnostics: vec![e.to_diagnostic()] })
}
