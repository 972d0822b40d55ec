//! Hand-written maximal-munch lexer.
//!
//! At every position each rule reports how many bytes it can match; the
//! longest match wins and ties go to the rule listed first. Whitespace and
//! block comments are consumed like any other rule but produce no token.

use std::fmt;

use crate::diagnostics::{Diagnostic, SourcePos};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Identifier,
    Natural,
    Decimal,
    StrLit,
    Integer,
    Double,
    If,
    Then,
    Else,
    LParen,
    RParen,
    Equals,
    Comma,
    Star,
    Slash,
    Plus,
    Minus,
    EndOfInput,
}

impl TokenKind {
    pub fn keyword(word: &str) -> Option<TokenKind> {
        Some(match word {
            "integer" => TokenKind::Integer,
            "double" => TokenKind::Double,
            "if" => TokenKind::If,
            "then" => TokenKind::Then,
            "else" => TokenKind::Else,
            _ => return None,
        })
    }

    fn punctuation(c: u8) -> Option<TokenKind> {
        Some(match c {
            b'(' => TokenKind::LParen,
            b')' => TokenKind::RParen,
            b'=' => TokenKind::Equals,
            b',' => TokenKind::Comma,
            b'*' => TokenKind::Star,
            b'/' => TokenKind::Slash,
            b'+' => TokenKind::Plus,
            b'-' => TokenKind::Minus,
            _ => return None,
        })
    }

    /// Upper-case class name as used in token dumps.
    pub fn name(self) -> &'static str {
        match self {
            TokenKind::Identifier => "IDENTIFIER",
            TokenKind::Natural => "NATURAL",
            TokenKind::Decimal => "DECIMAL",
            TokenKind::StrLit => "STRLIT",
            TokenKind::Integer => "INTEGER",
            TokenKind::Double => "DOUBLE",
            TokenKind::If => "IF",
            TokenKind::Then => "THEN",
            TokenKind::Else => "ELSE",
            TokenKind::LParen => "(",
            TokenKind::RParen => ")",
            TokenKind::Equals => "=",
            TokenKind::Comma => ",",
            TokenKind::Star => "*",
            TokenKind::Slash => "/",
            TokenKind::Plus => "+",
            TokenKind::Minus => "-",
            TokenKind::EndOfInput => "END_OF_INPUT",
        }
    }

    pub fn carries_value(self) -> bool {
        matches!(
            self,
            TokenKind::Identifier | TokenKind::Natural | TokenKind::Decimal | TokenKind::StrLit
        )
    }
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub pos: SourcePos,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.kind.carries_value() {
            write!(f, "{}({})", self.kind, self.lexeme)
        } else {
            write!(f, "{}", self.kind)
        }
    }
}

/// What a consumed stretch of input turned out to be.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpanKind {
    Token(TokenKind),
    Whitespace,
    Comment,
    /// A character no rule matches.
    Unrecognized,
    /// A string literal that was reported and dropped (bad escape or no closing quote).
    RejectedString,
}

/// A consumed stretch of the input. Concatenating the `text` of every span
/// returned by [`scan`] reproduces the input exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span<'a> {
    pub kind: SpanKind,
    pub text: &'a str,
    pub pos: SourcePos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Rule {
    // Keywords and identifiers share one matcher: the keyword rules only ever
    // tie with the identifier rule when the whole word is the keyword.
    Word,
    Natural,
    Decimal,
    String,
    Punctuation,
    Whitespace,
    Comment,
}

const RULES: [Rule; 7] = [
    Rule::Word,
    Rule::Natural,
    Rule::Decimal,
    Rule::String,
    Rule::Punctuation,
    Rule::Whitespace,
    Rule::Comment,
];

fn digits(bytes: &[u8]) -> usize {
    bytes.iter().take_while(|b| b.is_ascii_digit()).count()
}

fn match_word(bytes: &[u8]) -> usize {
    match bytes.first() {
        Some(b) if b.is_ascii_alphabetic() => {
            1 + bytes[1..].iter().take_while(|b| b.is_ascii_alphanumeric()).count()
        }
        _ => 0,
    }
}

fn match_decimal(bytes: &[u8]) -> usize {
    let int = digits(bytes);
    if bytes.get(int) != Some(&b'.') {
        return 0;
    }
    let frac = digits(&bytes[int + 1..]);
    if frac == 0 {
        0
    } else {
        int + 1 + frac
    }
}

fn match_comment(rest: &str) -> usize {
    if !rest.starts_with("/*") {
        return 0;
    }
    // Unterminated comments run to the end of input.
    match rest[2..].find("*/") {
        Some(end) => end + 4,
        None => rest.len(),
    }
}

struct StringScan {
    len: usize,
    terminated: bool,
    /// Byte offsets (from the opening quote) of backslashes starting invalid escapes.
    bad_escapes: Vec<(usize, char)>,
}

fn scan_string(rest: &str) -> Option<StringScan> {
    if !rest.starts_with('"') {
        return None;
    }
    let mut bad_escapes = Vec::new();
    let mut chars = rest.char_indices().skip(1).peekable();
    while let Some((i, c)) = chars.next() {
        match c {
            '"' => return Some(StringScan { len: i + 1, terminated: true, bad_escapes }),
            '\n' | '\r' => return Some(StringScan { len: i, terminated: false, bad_escapes }),
            '\\' => match chars.peek().copied() {
                None | Some((_, '\n')) | Some((_, '\r')) => {
                    return Some(StringScan { len: i + 1, terminated: false, bad_escapes });
                }
                Some((_, escaped)) => {
                    if !matches!(escaped, 'f' | 'n' | 'r' | 't' | '\\' | '"') {
                        bad_escapes.push((i, escaped));
                    }
                    chars.next();
                }
            },
            _ => {}
        }
    }
    Some(StringScan { len: rest.len(), terminated: false, bad_escapes })
}

fn match_len(rule: Rule, rest: &str) -> usize {
    let bytes = rest.as_bytes();
    match rule {
        Rule::Word => match_word(bytes),
        Rule::Natural => digits(bytes),
        Rule::Decimal => match_decimal(bytes),
        Rule::String => scan_string(rest).map_or(0, |s| s.len),
        Rule::Punctuation => bytes.first().and_then(|&b| TokenKind::punctuation(b)).map_or(0, |_| 1),
        Rule::Whitespace => bytes.first().map_or(0, |b| matches!(b, b' ' | b'\t' | b'\n' | b'\r') as usize),
        Rule::Comment => match_comment(rest),
    }
}

fn longest_match(rest: &str) -> Option<(Rule, usize)> {
    let mut best: Option<(Rule, usize)> = None;
    for rule in RULES {
        let len = match_len(rule, rest);
        if len > 0 && best.map_or(true, |(_, l)| len > l) {
            best = Some((rule, len));
        }
    }
    best
}

/// Splits the whole input into consumed spans, reporting lexical errors
/// along the way.
pub fn scan(source: &str) -> (Vec<Span<'_>>, Vec<Diagnostic>) {
    let mut spans = Vec::new();
    let mut diagnostics = Vec::new();
    let mut offset = 0;
    let mut pos = SourcePos::START;

    while offset < source.len() {
        let rest = &source[offset..];
        let (kind, len) = match longest_match(rest) {
            None => {
                let c = rest.chars().next().expect("non-empty rest");
                diagnostics.push(Diagnostic::lexical(pos, format!("unrecognized character ({c})")));
                (SpanKind::Unrecognized, c.len_utf8())
            }
            Some((Rule::Word, len)) => {
                let kind = TokenKind::keyword(&rest[..len]).unwrap_or(TokenKind::Identifier);
                (SpanKind::Token(kind), len)
            }
            Some((Rule::Natural, len)) => (SpanKind::Token(TokenKind::Natural), len),
            Some((Rule::Decimal, len)) => (SpanKind::Token(TokenKind::Decimal), len),
            Some((Rule::Punctuation, len)) => {
                let kind = TokenKind::punctuation(rest.as_bytes()[0]).expect("matched punctuation");
                (SpanKind::Token(kind), len)
            }
            Some((Rule::Whitespace, len)) => (SpanKind::Whitespace, len),
            Some((Rule::Comment, len)) => (SpanKind::Comment, len),
            Some((Rule::String, _)) => {
                let s = scan_string(rest).expect("matched string");
                for &(at, escaped) in &s.bad_escapes {
                    let esc_pos = pos.advance(&rest[..at]);
                    diagnostics.push(Diagnostic::lexical(
                        esc_pos,
                        format!("invalid escape sequence (\\{escaped})"),
                    ));
                }
                if !s.terminated {
                    diagnostics.push(Diagnostic::lexical(pos, "unterminated string literal"));
                }
                if s.terminated && s.bad_escapes.is_empty() {
                    (SpanKind::Token(TokenKind::StrLit), s.len)
                } else {
                    (SpanKind::RejectedString, s.len)
                }
            }
        };
        let text = &rest[..len];
        spans.push(Span { kind, text, pos });
        pos = pos.advance(text);
        offset += len;
    }
    (spans, diagnostics)
}

/// The position just past the end of `source`, where the END_OF_INPUT token sits.
pub fn end_position(source: &str) -> SourcePos {
    SourcePos::START.advance(source)
}

/// Tokenizes `source`. The token list always ends with END_OF_INPUT, even
/// when diagnostics were reported.
pub fn tokenize(source: &str) -> (Vec<Token>, Vec<Diagnostic>) {
    let (spans, diagnostics) = scan(source);
    let mut tokens: Vec<Token> = spans
        .iter()
        .filter_map(|span| match span.kind {
            SpanKind::Token(kind) => Some(Token { kind, lexeme: span.text.to_string(), pos: span.pos }),
            _ => None,
        })
        .collect();
    tokens.push(Token {
        kind: TokenKind::EndOfInput,
        lexeme: String::new(),
        pos: end_position(source),
    });
    (tokens, diagnostics)
}

/// One line per token, END_OF_INPUT omitted.
pub fn dump_tokens(tokens: &[Token]) -> String {
    let mut out = String::new();
    for token in tokens.iter().filter(|t| t.kind != TokenKind::EndOfInput) {
        out.push_str(&token.to_string());
        out.push('\n');
    }
    out
}
