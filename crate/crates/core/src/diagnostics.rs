//! Source positions and the diagnostics every phase reports.

use std::fmt;

/// A 1-based line/column location in the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SourcePos {
    pub line: u32,
    pub column: u32,
}

impl SourcePos {
    pub const START: SourcePos = SourcePos { line: 1, column: 1 };

    pub fn new(line: u32, column: u32) -> Self {
        assert!(line >= 1 && column >= 1, "positions are 1-based");
        SourcePos { line, column }
    }

    /// Moves over a single character. Tabs count as one column.
    pub fn step(self, c: char) -> Self {
        if c == '\n' {
            SourcePos { line: self.line + 1, column: 1 }
        } else {
            SourcePos { line: self.line, column: self.column + 1 }
        }
    }

    pub fn advance(self, text: &str) -> Self {
        text.chars().fold(self, SourcePos::step)
    }
}

impl Default for SourcePos {
    fn default() -> Self {
        SourcePos::START
    }
}

impl fmt::Display for SourcePos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Line {}, column {}", self.line, self.column)
    }
}

/// Free-function form of [`SourcePos::advance`].
pub fn advance_position(pos: SourcePos, text: &str) -> SourcePos {
    pos.advance(text)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Lexical,
    Syntax,
    Semantic,
    Runtime,
}

/// A reported problem. Rendered as `Line L, column C: message` when it has a
/// position, otherwise as the bare message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub phase: Phase,
    pub pos: Option<SourcePos>,
    pub message: String,
}

impl Diagnostic {
    pub fn new(phase: Phase, pos: SourcePos, message: impl Into<String>) -> Self {
        Diagnostic { phase, pos: Some(pos), message: message.into() }
    }

    pub fn unpositioned(phase: Phase, message: impl Into<String>) -> Self {
        Diagnostic { phase, pos: None, message: message.into() }
    }

    pub fn lexical(pos: SourcePos, message: impl Into<String>) -> Self {
        Diagnostic::new(Phase::Lexical, pos, message)
    }

    pub fn syntax(pos: SourcePos) -> Self {
        Diagnostic::new(Phase::Syntax, pos, "syntax error")
    }

    pub fn semantic(pos: SourcePos, message: impl Into<String>) -> Self {
        Diagnostic::new(Phase::Semantic, pos, message)
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.pos {
            Some(pos) => write!(f, "{}: {}", pos, self.message),
            None => f.write_str(&self.message),
        }
    }
}
