//! Property bodies shared by the proptest suite and the acceptance runner.

use petit::calc::eval_calc;
use petit::irvm::{self, parse_ir};
use petit::lexer::{scan, SpanKind};
use petit::{compile_source, parse_source, print_ast, tokenize};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use regex::Regex;
use std::sync::OnceLock;

use super::{check_ir_shape, EvalError, Expr, Op, World};

/// Inputs built from lexeme fragments, including invalid ones.
pub fn lexer_input() -> impl Strategy<Value = String> {
    proptest::string::string_regex(
        "(if|then|else|integer|double|[a-zA-Z]{1,3}|[0-9]{1,3}|\\.[0-9]?|/\\*|\\*/|[ \n\t\r]|[()=,*/+-]|\"[a-z ]{0,3}|\\\\[nz\"]|#|é){0,30}",
    )
    .unwrap()
}

/// Line and column of byte `offset`, by counting newlines in the prefix.
fn position_by_counting(source: &str, offset: usize) -> (u32, u32) {
    let prefix = &source[..offset];
    let line = prefix.matches('\n').count() + 1;
    let column = match prefix.rfind('\n') {
        Some(nl) => prefix[nl + 1..].chars().count() + 1,
        None => prefix.chars().count() + 1,
    };
    (line as u32, column as u32)
}

/// Concatenated spans reproduce the input; tokens match the token spans and
/// sit at the positions obtained by counting.
pub fn lexer_round_trip(source: &str) -> Result<(), TestCaseError> {
    let (spans, _) = scan(source);
    let rebuilt: String = spans.iter().map(|s| s.text).collect();
    prop_assert_eq!(&rebuilt, source);

    let (tokens, _) = tokenize(source);
    let mut offset = 0;
    let mut token_spans = Vec::new();
    for span in &spans {
        let (line, column) = position_by_counting(source, offset);
        prop_assert_eq!((span.pos.line, span.pos.column), (line, column), "span {:?}", span);
        if let SpanKind::Token(kind) = span.kind {
            token_spans.push((kind, span.text.to_string(), span.pos));
        }
        offset += span.text.len();
    }
    let (end_line, end_column) = position_by_counting(source, source.len());
    let last = tokens.last().unwrap();
    prop_assert_eq!(last.kind, petit::TokenKind::EndOfInput);
    prop_assert_eq!((last.pos.line, last.pos.column), (end_line, end_column));
    let lexed: Vec<_> = tokens[..tokens.len() - 1].iter().map(|t| (t.kind, t.lexeme.clone(), t.pos)).collect();
    prop_assert_eq!(lexed, token_spans);
    Ok(())
}

fn token_patterns() -> &'static [Regex] {
    static PATTERNS: OnceLock<Vec<Regex>> = OnceLock::new();
    PATTERNS.get_or_init(|| {
        [
            r"^[A-Za-z][A-Za-z0-9]*",
            r"^[0-9]+",
            r"^[0-9]*\.[0-9]+",
            r#"^"(?:[^"\\\r\n]|\\[fnrt\\"])*""#,
            r"^[()=,*/+-]",
            r"^(?s)/\*.*?\*/",
        ]
        .iter()
        .map(|p| Regex::new(p).unwrap())
        .collect()
    })
}

/// No token rule matches a longer prefix at any token's start.
pub fn longest_match(source: &str) -> Result<(), TestCaseError> {
    let (spans, _) = scan(source);
    let mut offset = 0;
    for span in &spans {
        let rest = &source[offset..];
        let longest = token_patterns().iter().filter_map(|r| r.find(rest)).map(|m| m.end()).max().unwrap_or(0);
        match span.kind {
            SpanKind::Token(_) => prop_assert_eq!(span.text.len(), longest, "token {:?} at {}", span.text, offset),
            SpanKind::Comment if span.text.ends_with("*/") && span.text.len() >= 4 => {
                prop_assert_eq!(span.text.len(), longest, "comment at {}", offset)
            }
            _ => prop_assert!(longest <= span.text.len(), "{:?} at {}", span, offset),
        }
        offset += span.text.len();
    }
    Ok(())
}

/// Listing of the body of `f` in `source`.
pub fn body_listing(source: &str) -> Result<String, TestCaseError> {
    let program = parse_source(source).map_err(|f| TestCaseError::fail(format!("{source}: {:?}", f.diagnostics)))?;
    let f = program.children.last().unwrap();
    Ok(print_ast(&f.children[2], false))
}

/// `x op1 y op2 z` groups to the left when the levels match and to the
/// tighter operator otherwise.
pub fn operator_pair(op1: Op, op2: Op, atoms: [u8; 3]) -> Result<(), TestCaseError> {
    let [x, y, z] = atoms.map(|v| Box::new(Expr::Num(u64::from(v))));
    let text = format!("{} {} {} {} {}", x.print_full(), op1.symbol(), y.print_full(), op2.symbol(), z.print_full());
    let expected = if op1.level() >= op2.level() {
        Expr::Bin(op2, Box::new(Expr::Bin(op1, x, y)), z)
    } else {
        Expr::Bin(op1, x, Box::new(Expr::Bin(op2, y, z)))
    };
    prop_assert_eq!(body_listing(&super::program_for(&text))?, expected.listing(), "{}", text);
    Ok(())
}

/// Both printings parse back to the generated tree.
pub fn reparse(expr: &Expr) -> Result<(), TestCaseError> {
    let expected = expr.listing();
    prop_assert_eq!(&body_listing(&super::program_for(&expr.print_full()))?, &expected);
    prop_assert_eq!(&body_listing(&super::program_for(&expr.print_minimal()))?, &expected, "{}", expr.print_minimal());
    Ok(())
}

/// Compiled and interpreted `f(a, b)` agrees with direct evaluation,
/// including runtime errors and the values written.
pub fn codegen_matches_oracle(expr: &Expr, a: i32, b: i32, input: &[i32]) -> Result<(), TestCaseError> {
    let source = super::program_for(&expr.print_minimal());
    let ir = compile_source(&source).map_err(|f| TestCaseError::fail(format!("{source}: {:?}", f.diagnostics)))?;
    prop_assert_eq!(&ir, &compile_source(&source).unwrap(), "emission is not deterministic");
    check_ir_shape(&ir).map_err(|e| TestCaseError::fail(format!("{e}\n{ir}")))?;
    let module = parse_ir(&ir).map_err(|e| TestCaseError::fail(format!("{e}\n{ir}")))?;

    let mut output = Vec::new();
    let compiled = irvm::run(&module, "_f", &[a, b], &mut input.iter().copied(), &mut output)
        .map_err(|e| EvalError::from_runtime(&e).ok_or(e.to_string()));
    let mut world = World::new(input.iter().copied());
    let expected = expr.eval(a, b, &mut world).map_err(Ok);
    prop_assert_eq!(compiled, expected, "{}", source);
    prop_assert_eq!(output, world.output);
    Ok(())
}

/// Calculator results equal direct evaluation; the first failing
/// expression's message is reported.
pub fn calc_matches_oracle(exprs: &[Expr]) -> Result<(), TestCaseError> {
    let text: Vec<String> = exprs.iter().map(Expr::print_minimal).collect();
    let text = text.join(", ");
    let mut world = World::default();
    let expected: Result<Vec<i32>, EvalError> = exprs.iter().map(|e| e.eval(0, 0, &mut world)).collect();
    let actual = eval_calc(&text).map_err(|d| d.iter().map(ToString::to_string).collect::<Vec<_>>());
    prop_assert_eq!(actual, expected.map_err(|e| vec![e.message().to_string()]), "{}", text);
    Ok(())
}
