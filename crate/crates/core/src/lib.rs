//! A compiler for Petit, a small functional teaching language.
//!
//! ```text
//! factorial(integer n) = if n then n * factorial(n-1) else 1
//! main(integer i) = write(factorial(read(0)))
//! ```
//!
//! Source text goes through [`lexer`], [`parser`] and [`semantics`], then
//! [`codegen`] emits textual LLVM IR which [`irvm`] can execute directly.

pub mod ast;
pub mod calc;
pub mod cli;
pub mod codegen;
pub mod diagnostics;
pub mod irvm;
pub mod lexer;
pub mod parser;
pub mod pipeline;
pub mod semantics;

pub use ast::{print_ast, Category, DataType, Node};
pub use diagnostics::{Diagnostic, Phase, SourcePos};
pub use lexer::{dump_tokens, tokenize, Token, TokenKind};
pub use pipeline::{analyze_source, compile_source, parse_source, Failure};
