//! Scope analysis and type annotation.
//!
//! Function names (and the `read`/`write` builtins) live in one global
//! table; each function gets a fresh local table holding its parameters.
//! Plain identifiers resolve locally only, call targets globally only.

use crate::ast::{Category, Node};
use crate::diagnostics::{Diagnostic, SourcePos};

pub use crate::ast::DataType;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolKind {
    Builtin { arity: usize, result: DataType },
    Function { arity: usize, result: DataType },
    Parameter,
}

/// Where and as what a symbol was declared.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Declaration {
    pub category: Category,
    /// Absent for builtins.
    pub pos: Option<SourcePos>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolEntry {
    pub identifier: String,
    pub dtype: DataType,
    pub kind: SymbolKind,
    pub declared_by: Declaration,
}

impl SymbolEntry {
    pub fn arity(&self) -> Option<usize> {
        match self.kind {
            SymbolKind::Builtin { arity, .. } | SymbolKind::Function { arity, .. } => Some(arity),
            SymbolKind::Parameter => None,
        }
    }
}

/// An insertion-ordered symbol table with unique names.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SymbolTable {
    entries: Vec<SymbolEntry>,
}

impl SymbolTable {
    pub fn new() -> Self {
        SymbolTable::default()
    }

    /// Table pre-seeded with `read` and `write`, both `integer -> integer`.
    pub fn with_builtins() -> Self {
        let mut table = SymbolTable::new();
        for name in ["read", "write"] {
            table.insert(SymbolEntry {
                identifier: name.to_string(),
                dtype: DataType::NoType,
                kind: SymbolKind::Builtin { arity: 1, result: DataType::Integer },
                declared_by: Declaration { category: Category::Function, pos: None },
            });
        }
        table
    }

    /// Appends `entry` unless its identifier is already present, in which
    /// case the table is left unchanged and `None` is returned.
    pub fn insert(&mut self, entry: SymbolEntry) -> Option<&SymbolEntry> {
        if self.search(&entry.identifier).is_some() {
            return None;
        }
        self.entries.push(entry);
        self.entries.last()
    }

    pub fn search(&self, identifier: &str) -> Option<&SymbolEntry> {
        self.entries.iter().find(|e| e.identifier == identifier)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &SymbolEntry> {
        self.entries.iter()
    }
}

/// Inserts a plain symbol declared by `node`.
pub fn insert_symbol<'t>(
    table: &'t mut SymbolTable,
    identifier: &str,
    dtype: DataType,
    node: &Node,
) -> Option<&'t SymbolEntry> {
    table.insert(SymbolEntry {
        identifier: identifier.to_string(),
        dtype,
        kind: SymbolKind::Parameter,
        declared_by: Declaration { category: node.category, pos: Some(node.pos) },
    })
}

pub fn search_symbol<'t>(table: &'t SymbolTable, identifier: &str) -> Option<&'t SymbolEntry> {
    table.search(identifier)
}

pub struct Scope<'g> {
    pub global: &'g SymbolTable,
    pub local: SymbolTable,
}

/// Outcome of checking a program.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub global: SymbolTable,
    pub diagnostics: Vec<Diagnostic>,
}

impl Analysis {
    pub fn error_count(&self) -> usize {
        self.diagnostics.len()
    }

    pub fn is_clean(&self) -> bool {
        self.diagnostics.is_empty()
    }
}

fn already_declared(pos: SourcePos, name: &str) -> Diagnostic {
    Diagnostic::semantic(pos, format!("identifier {name} already declared"))
}

fn operator_name(category: Category) -> &'static str {
    match category {
        Category::Add => "add",
        Category::Sub => "sub",
        Category::Mul => "mul",
        Category::Div => "div",
        _ => unreachable!("not a binary operator"),
    }
}

/// Checks and annotates `program` in place.
///
/// All function names are entered into the global table before any body is
/// checked, so a function may call one defined later in the file.
pub fn check_program(program: &mut Node) -> Analysis {
    let mut global = SymbolTable::with_builtins();
    let mut diagnostics = Vec::new();

    for function in &program.children {
        declare_function(function, &mut global, &mut diagnostics);
    }
    for function in &mut program.children {
        check_function(function, &global, &mut diagnostics);
    }
    Analysis { global, diagnostics }
}

fn declare_function(function: &Node, global: &mut SymbolTable, diagnostics: &mut Vec<Diagnostic>) {
    let id = function.child(0).expect("function identifier");
    let arity = function.child(1).map_or(0, |p| p.children.len());
    let entry = SymbolEntry {
        identifier: id.lexeme().to_string(),
        dtype: DataType::NoType,
        kind: SymbolKind::Function { arity, result: DataType::Integer },
        declared_by: Declaration { category: Category::Function, pos: Some(function.pos) },
    };
    if global.insert(entry).is_none() {
        diagnostics.push(already_declared(id.pos, id.lexeme()));
    }
}

/// Checks one function's parameters and body against a fresh local scope.
pub fn check_function(function: &mut Node, global: &SymbolTable, diagnostics: &mut Vec<Diagnostic>) {
    let mut scope = Scope { global, local: SymbolTable::new() };
    let [_, parameters, body] = function.children.as_mut_slice() else {
        panic!("function node must have identifier, parameters and body");
    };
    check_parameters(parameters, &mut scope, diagnostics);
    check_expression(body, &scope, diagnostics);
}

pub fn check_parameters(parameters: &Node, scope: &mut Scope<'_>, diagnostics: &mut Vec<Diagnostic>) {
    for parameter in &parameters.children {
        let (Some(keyword), Some(id)) = (parameter.child(0), parameter.child(1)) else {
            panic!("parameter node must have type and identifier");
        };
        let dtype = match keyword.category {
            Category::Integer => DataType::Integer,
            Category::Double => DataType::Double,
            other => panic!("unexpected parameter type node {other}"),
        };
        if insert_symbol(&mut scope.local, id.lexeme(), dtype, id).is_none() {
            diagnostics.push(already_declared(id.pos, id.lexeme()));
        }
    }
}

/// Annotates `expression` bottom-up and returns its type. Subtrees that
/// failed get `NoType`, which suppresses further diagnostics above them.
pub fn check_expression(expression: &mut Node, scope: &Scope<'_>, diagnostics: &mut Vec<Diagnostic>) -> DataType {
    let dtype = match expression.category {
        Category::Natural => DataType::Integer,
        Category::Decimal => DataType::Double,
        Category::Identifier => match scope.local.search(expression.lexeme()) {
            Some(entry) => entry.dtype,
            None => {
                diagnostics.push(Diagnostic::semantic(
                    expression.pos,
                    format!("unknown identifier {}", expression.lexeme()),
                ));
                DataType::NoType
            }
        },
        Category::Add | Category::Sub | Category::Mul | Category::Div => {
            let category = expression.category;
            let pos = expression.pos;
            let [lhs, rhs] = expression.children.as_mut_slice() else {
                panic!("binary node must have two operands");
            };
            let left = check_expression(lhs, scope, diagnostics);
            let right = check_expression(rhs, scope, diagnostics);
            if !left.is_value() || !right.is_value() {
                DataType::NoType
            } else if left == right {
                left
            } else {
                diagnostics.push(Diagnostic::semantic(
                    pos,
                    format!("incompatible types in {} operation", operator_name(category)),
                ));
                DataType::NoType
            }
        }
        Category::Call => check_call(expression, scope, diagnostics),
        Category::If => {
            let pos = expression.pos;
            let [condition, then_branch, else_branch] = expression.children.as_mut_slice() else {
                panic!("if node must have three children");
            };
            let cond = check_expression(condition, scope, diagnostics);
            let on_true = check_expression(then_branch, scope, diagnostics);
            let on_false = check_expression(else_branch, scope, diagnostics);
            let mut ok = true;
            if cond == DataType::Double {
                diagnostics.push(Diagnostic::semantic(pos, "incompatible condition type in if expression"));
                ok = false;
            }
            if on_true.is_value() && on_false.is_value() && on_true != on_false {
                diagnostics.push(Diagnostic::semantic(pos, "incompatible types in if expression"));
                ok = false;
            }
            if ok && cond.is_value() && on_true.is_value() && on_false.is_value() {
                on_true
            } else {
                DataType::NoType
            }
        }
        other => panic!("{other} is not an expression"),
    };
    expression.dtype = dtype;
    dtype
}

fn check_call(call: &mut Node, scope: &Scope<'_>, diagnostics: &mut Vec<Diagnostic>) -> DataType {
    let [callee, arguments] = call.children.as_mut_slice() else {
        panic!("call node must have callee and arguments");
    };
    let mut args_ok = true;
    for argument in &mut arguments.children {
        args_ok &= check_expression(argument, scope, diagnostics).is_value();
    }
    let got = arguments.children.len();
    let result = match scope.global.search(callee.lexeme()).map(|e| e.kind) {
        Some(SymbolKind::Function { arity, result }) | Some(SymbolKind::Builtin { arity, result }) => {
            if arity == got {
                result
            } else {
                diagnostics.push(Diagnostic::semantic(
                    callee.pos,
                    format!(
                        "wrong number of arguments in call to {} (got {got}, expected {arity})",
                        callee.lexeme()
                    ),
                ));
                DataType::NoType
            }
        }
        _ => {
            diagnostics.push(Diagnostic::semantic(
                callee.pos,
                format!("unknown identifier {}", callee.lexeme()),
            ));
            DataType::NoType
        }
    };
    if args_ok {
        result
    } else {
        DataType::NoType
    }
}
