//! Recursive-descent parser with binding powers for the binary operators.
//!
//! Grammar:
//!
//! ```text
//! program    := function+
//! function   := IDENTIFIER '(' parameters ')' '=' expression
//! parameters := parameter (',' parameter)*
//! parameter  := (INTEGER | DOUBLE) IDENTIFIER
//! arguments  := expression (',' expression)*
//! expression := primary (('+' | '-' | '*' | '/') expression)*
//! primary    := IDENTIFIER | IDENTIFIER '(' arguments ')' | NATURAL | DECIMAL
//!             | '(' expression ')' | IF expression THEN expression ELSE expression
//! ```
//!
//! `+ -` bind looser than `* /`, all four associate to the left, and the
//! else-branch of an if extends as far right as possible.

use crate::ast::{Category, Node};
use crate::diagnostics::{Diagnostic, SourcePos};
use crate::lexer::{Token, TokenKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Assoc {
    Left,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BindingPower {
    pub level: u8,
    pub assoc: Assoc,
}

impl BindingPower {
    /// The level of an if-then-else; a subexpression parsed at this level
    /// absorbs every binary operator.
    pub const LOWEST: BindingPower = BindingPower { level: 0, assoc: Assoc::Left };
    pub const ADDITIVE: BindingPower = BindingPower { level: 1, assoc: Assoc::Left };
    pub const MULTIPLICATIVE: BindingPower = BindingPower { level: 2, assoc: Assoc::Left };

    pub fn of_infix(kind: TokenKind) -> Option<(BindingPower, Category)> {
        match kind {
            TokenKind::Plus => Some((Self::ADDITIVE, Category::Add)),
            TokenKind::Minus => Some((Self::ADDITIVE, Category::Sub)),
            TokenKind::Star => Some((Self::MULTIPLICATIVE, Category::Mul)),
            TokenKind::Slash => Some((Self::MULTIPLICATIVE, Category::Div)),
            _ => None,
        }
    }
}

type PResult<T> = Result<T, Diagnostic>;

pub struct Parser<'t> {
    tokens: &'t [Token],
    cursor: usize,
    eof: Token,
}

impl<'t> Parser<'t> {
    pub fn new(tokens: &'t [Token]) -> Self {
        let eof_pos = tokens.last().map_or(SourcePos::START, |t| t.pos);
        Parser {
            tokens,
            cursor: 0,
            eof: Token { kind: TokenKind::EndOfInput, lexeme: String::new(), pos: eof_pos },
        }
    }

    fn peek_at(&self, offset: usize) -> &Token {
        self.tokens.get(self.cursor + offset).unwrap_or(&self.eof)
    }

    pub fn peek(&self) -> &Token {
        self.peek_at(0)
    }

    pub fn at_end(&self) -> bool {
        self.peek().kind == TokenKind::EndOfInput
    }

    fn bump(&mut self) -> Token {
        let token = self.peek().clone();
        if self.cursor < self.tokens.len() {
            self.cursor += 1;
        }
        token
    }

    fn error_here(&self) -> Diagnostic {
        Diagnostic::syntax(self.peek().pos)
    }

    fn expect(&mut self, kind: TokenKind) -> PResult<Token> {
        if self.peek().kind == kind {
            Ok(self.bump())
        } else {
            Err(self.error_here())
        }
    }

    fn eat(&mut self, kind: TokenKind) -> bool {
        if self.peek().kind == kind {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn parse_function(&mut self) -> PResult<Node> {
        let name = self.expect(TokenKind::Identifier)?;
        self.expect(TokenKind::LParen)?;
        let parameters = self.parse_parameters()?;
        self.expect(TokenKind::RParen)?;
        self.expect(TokenKind::Equals)?;
        let body = self.parse_expression(BindingPower::LOWEST)?;
        Ok(Node::leaf(Category::Function, name.pos)
            .with_child(Node::with_lexeme(Category::Identifier, name.lexeme, name.pos))
            .with_child(parameters)
            .with_child(body))
    }

    pub fn parse_parameters(&mut self) -> PResult<Node> {
        let mut parameters = Node::leaf(Category::Parameters, self.peek().pos);
        loop {
            let keyword = self.bump();
            let type_category = match keyword.kind {
                TokenKind::Integer => Category::Integer,
                TokenKind::Double => Category::Double,
                _ => return Err(Diagnostic::syntax(keyword.pos)),
            };
            let name = self.expect(TokenKind::Identifier)?;
            parameters.add_child(
                Node::leaf(Category::Parameter, keyword.pos)
                    .with_child(Node::leaf(type_category, keyword.pos))
                    .with_child(Node::with_lexeme(Category::Identifier, name.lexeme, name.pos)),
            );
            if !self.eat(TokenKind::Comma) {
                return Ok(parameters);
            }
        }
    }

    pub fn parse_arguments(&mut self) -> PResult<Node> {
        let mut arguments = Node::leaf(Category::Arguments, self.peek().pos);
        loop {
            arguments.add_child(self.parse_expression(BindingPower::LOWEST)?);
            if !self.eat(TokenKind::Comma) {
                return Ok(arguments);
            }
        }
    }

    /// Parses an expression whose binary operators all bind tighter than `min_power`.
    pub fn parse_expression(&mut self, min_power: BindingPower) -> PResult<Node> {
        let mut lhs = self.parse_primary()?;
        while let Some((power, category)) = BindingPower::of_infix(self.peek().kind) {
            if power.level <= min_power.level {
                break;
            }
            let op = self.bump();
            let rhs = self.parse_expression(power)?;
            lhs = Node::leaf(category, op.pos).with_child(lhs).with_child(rhs);
        }
        Ok(lhs)
    }

    fn parse_primary(&mut self) -> PResult<Node> {
        let token = self.bump();
        match token.kind {
            TokenKind::Identifier => {
                let id = Node::with_lexeme(Category::Identifier, token.lexeme, token.pos);
                if self.eat(TokenKind::LParen) {
                    let arguments = self.parse_arguments()?;
                    self.expect(TokenKind::RParen)?;
                    Ok(Node::leaf(Category::Call, token.pos).with_child(id).with_child(arguments))
                } else {
                    Ok(id)
                }
            }
            TokenKind::Natural => Ok(Node::with_lexeme(Category::Natural, token.lexeme, token.pos)),
            TokenKind::Decimal => Ok(Node::with_lexeme(Category::Decimal, token.lexeme, token.pos)),
            TokenKind::LParen => {
                let inner = self.parse_expression(BindingPower::LOWEST)?;
                self.expect(TokenKind::RParen)?;
                Ok(inner)
            }
            TokenKind::If => {
                let condition = self.parse_expression(BindingPower::LOWEST)?;
                self.expect(TokenKind::Then)?;
                let then_branch = self.parse_expression(BindingPower::LOWEST)?;
                self.expect(TokenKind::Else)?;
                let else_branch = self.parse_expression(BindingPower::LOWEST)?;
                Ok(Node::leaf(Category::If, token.pos)
                    .with_child(condition)
                    .with_child(then_branch)
                    .with_child(else_branch))
            }
            _ => Err(Diagnostic::syntax(token.pos)),
        }
    }

    /// Skips past the current token and onward to the next `IDENTIFIER (`
    /// outside any parentheses opened during the skip.
    fn recover(&mut self) {
        self.bump();
        let mut depth = 0usize;
        while !self.at_end() {
            match self.peek().kind {
                TokenKind::LParen => depth += 1,
                TokenKind::RParen => depth = depth.saturating_sub(1),
                TokenKind::Identifier if depth == 0 && self.peek_at(1).kind == TokenKind::LParen => {
                    return;
                }
                _ => {}
            }
            self.bump();
        }
    }
}

/// Parses a whole program. Returns no tree when any syntax error was found.
pub fn parse_program(tokens: &[Token]) -> (Option<Node>, Vec<Diagnostic>) {
    let mut parser = Parser::new(tokens);
    let mut program = Node::leaf(Category::Program, tokens.first().map_or(SourcePos::START, |t| t.pos));
    let mut diagnostics = Vec::new();
    loop {
        match parser.parse_function() {
            Ok(function) => {
                program.add_child(function);
            }
            Err(diagnostic) => {
                diagnostics.push(diagnostic);
                parser.recover();
            }
        }
        if parser.at_end() {
            break;
        }
    }
    if diagnostics.is_empty() {
        (Some(program), diagnostics)
    } else {
        (None, diagnostics)
    }
}

/// Parses comma-separated expressions filling the whole token stream.
pub fn parse_expression_list(tokens: &[Token]) -> Result<Vec<Node>, Diagnostic> {
    let mut parser = Parser::new(tokens);
    let mut expressions = vec![parser.parse_expression(BindingPower::LOWEST)?];
    while parser.eat(TokenKind::Comma) {
        expressions.push(parser.parse_expression(BindingPower::LOWEST)?);
    }
    parser.expect(TokenKind::EndOfInput)?;
    Ok(expressions)
}
