//! Textual LLVM IR emission for checked, all-integer programs.
//!
//! Every Petit function `f` becomes `define i32 @_f(...)`. Values live in
//! numbered SSA temporaries; if-then-else merges its branches through an
//! `alloca` slot instead of a phi. When the program has a `main` function an
//! unprefixed `@main` is emitted that calls it with zero arguments.

use std::fmt::Write as _;

use thiserror::Error;

use crate::ast::{Category, Node};
use crate::diagnostics::{Diagnostic, SourcePos};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodegenError {
    #[error("{pos}: double values are not supported by code generation")]
    DoubleUnsupported { pos: SourcePos },
}

impl CodegenError {
    pub fn to_diagnostic(&self) -> Diagnostic {
        match *self {
            CodegenError::DoubleUnsupported { pos } => {
                Diagnostic::semantic(pos, "double values are not supported by code generation")
            }
        }
    }
}

/// Numbered-register state of the function being emitted.
#[derive(Debug, Default)]
pub struct EmitterState {
    pub temporary: u32,
    pub if_counter: u32,
    pub output: String,
}

impl EmitterState {
    pub fn new() -> Self {
        EmitterState { temporary: 1, if_counter: 1, output: String::new() }
    }

    fn fresh(&mut self) -> u32 {
        let t = self.temporary;
        self.temporary += 1;
        t
    }

    fn line(&mut self, text: std::fmt::Arguments<'_>) {
        self.output.push_str("  ");
        self.output.write_fmt(text).expect("writing to a String cannot fail");
        self.output.push('\n');
    }

    fn label(&mut self, name: &str) {
        self.output.push_str(name);
        self.output.push_str(":\n");
    }
}

/// Wraps the decimal literal to its i32 value.
pub fn natural_value(digits: &str) -> i32 {
    digits
        .bytes()
        .fold(0u32, |acc, d| acc.wrapping_mul(10).wrapping_add(u32::from(d - b'0'))) as i32
}

fn reject_doubles(node: &Node) -> Result<(), CodegenError> {
    let mut found = None;
    node.walk(&mut |n, _| {
        if found.is_none() && matches!(n.category, Category::Decimal | Category::Double) {
            found = Some(n.pos);
        }
    });
    match found {
        Some(pos) => Err(CodegenError::DoubleUnsupported { pos }),
        None => Ok(()),
    }
}

fn function_name(function: &Node) -> &str {
    function.child(0).expect("function identifier").lexeme()
}

pub fn codegen_program(program: &Node) -> Result<String, CodegenError> {
    reject_doubles(program)?;
    let mut out = String::new();
    out.push_str("declare i32 @_read(i32)\n");
    out.push_str("declare i32 @_write(i32)\n\n");
    for function in &program.children {
        out.push_str(&codegen_function(function));
    }
    if let Some(main) = program.children.iter().find(|f| function_name(f) == "main") {
        let arity = main.child(1).map_or(0, |p| p.children.len());
        let args = vec!["i32 0"; arity].join(", ");
        let _ = write!(
            out,
            "define i32 @main() {{\n  %1 = call i32 @_main({args})\n  ret i32 %1\n}}\n"
        );
    }
    Ok(out)
}

pub fn codegen_function(function: &Node) -> String {
    let mut state = EmitterState::new();
    let _ = write!(state.output, "define i32 @_{}(", function_name(function));
    let parameters = codegen_parameters(function.child(1).expect("function parameters"));
    state.output.push_str(&parameters);
    state.output.push_str(") {\n");
    let result = codegen_expression(function.child(2).expect("function body"), &mut state);
    state.line(format_args!("ret i32 %{result}"));
    state.output.push_str("}\n\n");
    state.output
}

pub fn codegen_parameters(parameters: &Node) -> String {
    parameters
        .children
        .iter()
        .map(|p| format!("i32 %{}", p.child(1).expect("parameter identifier").lexeme()))
        .collect::<Vec<_>>()
        .join(", ")
}

fn binary_opcode(category: Category) -> &'static str {
    match category {
        Category::Add => "add",
        Category::Sub => "sub",
        Category::Mul => "mul",
        Category::Div => "sdiv",
        _ => unreachable!("not a binary operator"),
    }
}

/// Emits code computing `expression` and returns the temporary holding it.
pub fn codegen_expression(expression: &Node, state: &mut EmitterState) -> u32 {
    match expression.category {
        Category::Natural => {
            let t = state.fresh();
            state.line(format_args!("%{t} = add i32 {}, 0", natural_value(expression.lexeme())));
            t
        }
        Category::Identifier => {
            let t = state.fresh();
            state.line(format_args!("%{t} = add i32 %{}, 0", expression.lexeme()));
            t
        }
        Category::Add | Category::Sub | Category::Mul | Category::Div => {
            let lhs = codegen_expression(&expression.children[0], state);
            let rhs = codegen_expression(&expression.children[1], state);
            let t = state.fresh();
            state.line(format_args!("%{t} = {} i32 %{lhs}, %{rhs}", binary_opcode(expression.category)));
            t
        }
        Category::Call => {
            let callee = expression.children[0].lexeme();
            let args: Vec<String> = expression.children[1]
                .children
                .iter()
                .map(|arg| format!("i32 %{}", codegen_expression(arg, state)))
                .collect();
            let t = state.fresh();
            state.line(format_args!("%{t} = call i32 @_{callee}({})", args.join(", ")));
            t
        }
        Category::If => {
            let k = state.if_counter;
            state.if_counter += 1;
            let slot = state.fresh();
            state.line(format_args!("%{slot} = alloca i32"));
            let value = codegen_expression(&expression.children[0], state);
            let cond = state.fresh();
            state.line(format_args!("%{cond} = icmp ne i32 %{value}, 0"));
            state.line(format_args!("br i1 %{cond}, label %L{k}then, label %L{k}else"));
            for (branch, suffix) in [(&expression.children[1], "then"), (&expression.children[2], "else")] {
                state.label(&format!("L{k}{suffix}"));
                let v = codegen_expression(branch, state);
                state.line(format_args!("store i32 %{v}, i32* %{slot}"));
                state.line(format_args!("br label %L{k}end"));
            }
            state.label(&format!("L{k}end"));
            let t = state.fresh();
            state.line(format_args!("%{t} = load i32, i32* %{slot}"));
            t
        }
        other => panic!("{other} is not an expression"),
    }
}
