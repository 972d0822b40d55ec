//! Calculator mode: comma-separated integer expressions evaluated in order.

use crate::ast::{Category, Node};
use crate::codegen::natural_value;
use crate::diagnostics::{Diagnostic, Phase};
use crate::lexer::tokenize;
use crate::parser::parse_expression_list;

/// Evaluates every expression in `input`. Only natural literals, the four
/// operators, parentheses and if-then-else are accepted; identifiers, calls
/// and decimals are syntax errors here.
pub fn eval_calc(input: &str) -> Result<Vec<i32>, Vec<Diagnostic>> {
    let (tokens, lexical) = tokenize(input);
    if !lexical.is_empty() {
        return Err(lexical);
    }
    let expressions = parse_expression_list(&tokens).map_err(|d| vec![d])?;

    let mut rejected = Vec::new();
    for expression in &expressions {
        expression.walk(&mut |node, _| {
            if matches!(node.category, Category::Identifier | Category::Call | Category::Decimal)
                && rejected.last().map_or(true, |d: &Diagnostic| d.pos != Some(node.pos))
            {
                rejected.push(Diagnostic::syntax(node.pos));
            }
        });
    }
    if !rejected.is_empty() {
        return Err(rejected);
    }

    expressions
        .iter()
        .map(evaluate)
        .collect::<Result<Vec<_>, _>>()
        .map_err(|message| vec![Diagnostic::unpositioned(Phase::Runtime, message)])
}

fn evaluate(node: &Node) -> Result<i32, &'static str> {
    let operand = |i: usize| evaluate(&node.children[i]);
    Ok(match node.category {
        Category::Natural => natural_value(node.lexeme()),
        Category::Add => operand(0)?.wrapping_add(operand(1)?),
        Category::Sub => operand(0)?.wrapping_sub(operand(1)?),
        Category::Mul => operand(0)?.wrapping_mul(operand(1)?),
        Category::Div => {
            let (a, b) = (operand(0)?, operand(1)?);
            if b == 0 {
                return Err("runtime error: division by zero");
            }
            a.checked_div(b).ok_or("runtime error: division overflow")?
        }
        Category::If => {
            if operand(0)? != 0 {
                operand(1)?
            } else {
                operand(2)?
            }
        }
        other => unreachable!("{other} rejected before evaluation"),
    })
}
