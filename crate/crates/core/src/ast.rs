//! Abstract syntax tree: nodes with a category, an optional lexeme, a type
//! annotation and an ordered list of children.

use std::fmt;

use crate::diagnostics::SourcePos;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Category {
    Program,
    Function,
    Parameters,
    Parameter,
    Arguments,
    Call,
    If,
    Add,
    Sub,
    Mul,
    Div,
    Identifier,
    Natural,
    Decimal,
    Integer,
    Double,
}

impl Category {
    pub fn name(self) -> &'static str {
        match self {
            Category::Program => "Program",
            Category::Function => "Function",
            Category::Parameters => "Parameters",
            Category::Parameter => "Parameter",
            Category::Arguments => "Arguments",
            Category::Call => "Call",
            Category::If => "If",
            Category::Add => "Add",
            Category::Sub => "Sub",
            Category::Mul => "Mul",
            Category::Div => "Div",
            Category::Identifier => "Identifier",
            Category::Natural => "Natural",
            Category::Decimal => "Decimal",
            Category::Integer => "Integer",
            Category::Double => "Double",
        }
    }

    /// Categories whose nodes keep the original token text.
    pub fn has_lexeme(self) -> bool {
        matches!(self, Category::Identifier | Category::Natural | Category::Decimal)
    }

    pub fn is_binary(self) -> bool {
        matches!(self, Category::Add | Category::Sub | Category::Mul | Category::Div)
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Type annotation carried by every node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum DataType {
    Integer,
    Double,
    /// Assigned to non-expressions and to expressions that failed to check.
    NoType,
    /// Not yet visited by semantic analysis.
    #[default]
    Untyped,
}

impl DataType {
    pub fn name(self) -> &'static str {
        match self {
            DataType::Integer => "integer",
            DataType::Double => "double",
            DataType::NoType => "none",
            DataType::Untyped => "untyped",
        }
    }

    pub fn is_value(self) -> bool {
        matches!(self, DataType::Integer | DataType::Double)
    }
}

impl fmt::Display for DataType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub category: Category,
    pub lexeme: Option<String>,
    pub dtype: DataType,
    pub children: Vec<Node>,
    pub pos: SourcePos,
}

impl Node {
    /// Creates a leaf. Identifier, Natural and Decimal nodes must be given a
    /// lexeme and no other category may have one.
    pub fn new(category: Category, lexeme: Option<String>, pos: SourcePos) -> Node {
        assert_eq!(
            category.has_lexeme(),
            lexeme.is_some(),
            "{category} node lexeme presence mismatch"
        );
        Node { category, lexeme, dtype: DataType::Untyped, children: Vec::new(), pos }
    }

    pub fn leaf(category: Category, pos: SourcePos) -> Node {
        Node::new(category, None, pos)
    }

    pub fn with_lexeme(category: Category, lexeme: impl Into<String>, pos: SourcePos) -> Node {
        Node::new(category, Some(lexeme.into()), pos)
    }

    pub fn add_child(&mut self, child: Node) -> &mut Node {
        self.children.push(child);
        self
    }

    /// Builder form of [`Node::add_child`].
    pub fn with_child(mut self, child: Node) -> Node {
        self.children.push(child);
        self
    }

    pub fn child(&self, index: usize) -> Option<&Node> {
        self.children.get(index)
    }

    pub fn child_mut(&mut self, index: usize) -> Option<&mut Node> {
        self.children.get_mut(index)
    }

    pub fn lexeme(&self) -> &str {
        self.lexeme.as_deref().unwrap_or("")
    }

    /// Number of nodes in this subtree.
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(Node::size).sum::<usize>()
    }

    /// Preorder walk.
    pub fn walk<'a>(&'a self, visit: &mut impl FnMut(&'a Node, usize)) {
        fn go<'a>(node: &'a Node, depth: usize, visit: &mut impl FnMut(&'a Node, usize)) {
            visit(node, depth);
            for child in &node.children {
                go(child, depth + 1, visit);
            }
        }
        go(self, 0, visit)
    }
}

pub fn new_node(category: Category, lexeme: Option<String>, pos: SourcePos) -> Node {
    Node::new(category, lexeme, pos)
}

pub fn add_child(parent: &mut Node, child: Node) {
    parent.add_child(child);
}

pub fn get_child(parent: &Node, index: usize) -> Option<&Node> {
    parent.child(index)
}

/// Renders the tree one node per line, each prefixed by two underscores per
/// level of depth. With `with_types`, nodes annotated with a value type get
/// a ` - integer` or ` - double` suffix.
pub fn print_ast(root: &Node, with_types: bool) -> String {
    let mut out = String::new();
    root.walk(&mut |node, depth| {
        for _ in 0..depth {
            out.push_str("__");
        }
        out.push_str(node.category.name());
        if let Some(lexeme) = &node.lexeme {
            out.push('(');
            out.push_str(lexeme);
            out.push(')');
        }
        if with_types && node.dtype.is_value() {
            out.push_str(" - ");
            out.push_str(node.dtype.name());
        }
        out.push('\n');
    });
    out
}
