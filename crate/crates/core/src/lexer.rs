//! Tokenizer shared by the model and property parsers.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// A source position. Lines and columns are 1-based.
///
/// Spans never take part in structural comparison: two spans always compare
/// equal, so ASTs derived from differently formatted text can be compared
/// with `==`.
#[derive(Debug, Clone, Copy, Default, Eq, serde::Serialize)]
pub struct Span {
    pub line: usize,
    pub column: usize,
}

impl PartialEq for Span {
    fn eq(&self, _other: &Self) -> bool {
        true
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    /// Decimal literal, kept exact.
    Decimal(BigRational),
    Str(String),
    LBracket,
    RBracket,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Semi,
    Colon,
    Arrow,
    Plus,
    Minus,
    Star,
    Slash,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
    Not,
    Prime,
    DotDot,
    Comma,
    Question,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(name) => return write!(f, "identifier `{name}`"),
            Tok::Int(v) => return write!(f, "number `{v}`"),
            Tok::Decimal(v) => return write!(f, "number `{}`", crate::expr::format_rational(v)),
            Tok::Str(s) => return write!(f, "string \"{s}\""),
            Tok::LBracket => "`[`",
            Tok::RBracket => "`]`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::LBrace => "`{`",
            Tok::RBrace => "`}`",
            Tok::Semi => "`;`",
            Tok::Colon => "`:`",
            Tok::Arrow => "`->`",
            Tok::Plus => "`+`",
            Tok::Minus => "`-`",
            Tok::Star => "`*`",
            Tok::Slash => "`/`",
            Tok::Eq => "`=`",
            Tok::Ne => "`!=`",
            Tok::Lt => "`<`",
            Tok::Le => "`<=`",
            Tok::Gt => "`>`",
            Tok::Ge => "`>=`",
            Tok::And => "`&`",
            Tok::Or => "`|`",
            Tok::Not => "`!`",
            Tok::Prime => "`'`",
            Tok::DotDot => "`..`",
            Tok::Comma => "`,`",
            Tok::Question => "`?`",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

/// Error raised by the lexer or either parser.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{span}: {message}")]
pub struct ParseError {
    pub span: Span,
    pub message: String,
}

impl ParseError {
    pub fn new(span: Span, message: impl Into<String>) -> Self {
        ParseError {
            span,
            message: message.into(),
        }
    }
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = 1;
    let mut col = 1;

    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        let span = Span { line, column: col };
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                bump!();
            }
            let word: String = chars[start..i].iter().collect();
            out.push(Token {
                tok: Tok::Ident(word),
                span,
            });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                bump!();
            }
            let int_part: String = chars[start..i].iter().collect();
            // `0..13` is a range, not the decimal `0.`
            let has_frac = i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit();
            let mut frac = String::new();
            if has_frac {
                bump!();
                while i < chars.len() && chars[i].is_ascii_digit() {
                    frac.push(chars[i]);
                    bump!();
                }
            }
            let mut exp: i64 = 0;
            let mut has_exp = false;
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    has_exp = true;
                    bump!();
                    let neg = chars[i] == '-';
                    if chars[i] == '+' || chars[i] == '-' {
                        bump!();
                    }
                    let es = i;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        bump!();
                    }
                    let digits: String = chars[es..i].iter().collect();
                    exp = digits
                        .parse()
                        .map_err(|_| ParseError::new(span, "exponent out of range"))?;
                    if neg {
                        exp = -exp;
                    }
                }
            }
            let tok = if !has_frac && !has_exp {
                let v = int_part
                    .parse::<i64>()
                    .map_err(|_| ParseError::new(span, "integer literal out of range"))?;
                Tok::Int(v)
            } else {
                Tok::Decimal(decimal_to_rational(&int_part, &frac, exp))
            };
            out.push(Token { tok, span });
            continue;
        }
        if c == '"' {
            bump!();
            let start = i;
            while i < chars.len() && chars[i] != '"' && chars[i] != '\n' {
                bump!();
            }
            if i >= chars.len() || chars[i] != '"' {
                return Err(ParseError::new(span, "unterminated string"));
            }
            let s: String = chars[start..i].iter().collect();
            bump!();
            out.push(Token {
                tok: Tok::Str(s),
                span,
            });
            continue;
        }
        let next = chars.get(i + 1).copied();
        let (tok, len) = match (c, next) {
            ('-', Some('>')) => (Tok::Arrow, 2),
            ('!', Some('=')) => (Tok::Ne, 2),
            ('<', Some('=')) => (Tok::Le, 2),
            ('>', Some('=')) => (Tok::Ge, 2),
            ('.', Some('.')) => (Tok::DotDot, 2),
            ('[', _) => (Tok::LBracket, 1),
            (']', _) => (Tok::RBracket, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('{', _) => (Tok::LBrace, 1),
            ('}', _) => (Tok::RBrace, 1),
            (';', _) => (Tok::Semi, 1),
            (':', _) => (Tok::Colon, 1),
            ('+', _) => (Tok::Plus, 1),
            ('-', _) => (Tok::Minus, 1),
            ('*', _) => (Tok::Star, 1),
            ('/', _) => (Tok::Slash, 1),
            ('=', _) => (Tok::Eq, 1),
            ('<', _) => (Tok::Lt, 1),
            ('>', _) => (Tok::Gt, 1),
            ('≤', _) => (Tok::Le, 1),
            ('≥', _) => (Tok::Ge, 1),
            ('&', _) => (Tok::And, 1),
            ('|', _) => (Tok::Or, 1),
            ('!', _) => (Tok::Not, 1),
            ('\'', _) => (Tok::Prime, 1),
            (',', _) => (Tok::Comma, 1),
            ('?', _) => (Tok::Question, 1),
            _ => {
                return Err(ParseError::new(
                    span,
                    format!("unexpected character `{c}`"),
                ))
            }
        };
        for _ in 0..len {
            bump!();
        }
        out.push(Token { tok, span });
    }
    out.push(Token {
        tok: Tok::Eof,
        span: Span { line, column: col },
    });
    Ok(out)
}

fn decimal_to_rational(int_part: &str, frac: &str, exp: i64) -> BigRational {
    let digits = format!("{int_part}{frac}");
    let numer: BigInt = digits.parse().unwrap_or_else(|_| BigInt::zero());
    let scale = exp - frac.len() as i64;
    let ten = BigInt::from(10);
    let pow = num_traits::pow(ten, scale.unsigned_abs() as usize);
    if scale >= 0 {
        BigRational::new(numer * pow, BigInt::one())
    } else {
        BigRational::new(numer, pow)
    }
}

/// Cursor over a token stream with the usual peek/expect helpers.
pub(crate) struct Cursor {
    tokens: Vec<Token>,
    pos: usize,
}

impl Cursor {
    pub(crate) fn new(tokens: Vec<Token>) -> Self {
        Cursor { tokens, pos: 0 }
    }

    pub(crate) fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    pub(crate) fn peek_at(&self, ahead: usize) -> &Tok {
        let idx = (self.pos + ahead).min(self.tokens.len() - 1);
        &self.tokens[idx].tok
    }

    pub(crate) fn span(&self) -> Span {
        self.tokens[self.pos].span
    }

    pub(crate) fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    pub(crate) fn at(&self, tok: &Tok) -> bool {
        self.peek() == tok
    }

    pub(crate) fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(w) if w == kw)
    }

    pub(crate) fn eat(&mut self, tok: &Tok) -> bool {
        if self.at(tok) {
            self.next();
            true
        } else {
            false
        }
    }

    pub(crate) fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.at_keyword(kw) {
            self.next();
            true
        } else {
            false
        }
    }

    pub(crate) fn expect(&mut self, tok: &Tok, context: &str) -> Result<Span, ParseError> {
        if self.at(tok) {
            Ok(self.next().span)
        } else {
            Err(self.unexpected(&format!("expected {tok} {context}")))
        }
    }

    pub(crate) fn expect_keyword(&mut self, kw: &str) -> Result<Span, ParseError> {
        if self.at_keyword(kw) {
            Ok(self.next().span)
        } else {
            Err(self.unexpected(&format!("expected `{kw}`")))
        }
    }

    pub(crate) fn expect_ident(&mut self, what: &str) -> Result<(String, Span), ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let span = self.next().span;
                Ok((name, span))
            }
            _ => Err(self.unexpected(&format!("expected {what}"))),
        }
    }

    pub(crate) fn unexpected(&self, msg: &str) -> ParseError {
        ParseError::new(self.span(), format!("{msg}, found {}", self.peek()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str) -> Vec<Tok> {
        tokenize(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn range_is_not_a_decimal() {
        assert_eq!(
            toks("[0..13]"),
            vec![Tok::LBracket, Tok::Int(0), Tok::DotDot, Tok::Int(13), Tok::RBracket, Tok::Eof]
        );
    }

    #[test]
    fn decimals_are_exact() {
        let t = toks("0.65 1e-3 2.5E2");
        assert_eq!(t[0], Tok::Decimal(BigRational::new(13.into(), 20.into())));
        assert_eq!(t[1], Tok::Decimal(BigRational::new(1.into(), 1000.into())));
        assert_eq!(t[2], Tok::Decimal(BigRational::from_integer(250.into())));
    }

    #[test]
    fn primes_arrows_and_comments() {
        let t = toks("[] s=0 -> 1.0:(s'=2); // trailing\n");
        assert!(t.contains(&Tok::Arrow));
        assert!(t.contains(&Tok::Prime));
        assert_eq!(t.last(), Some(&Tok::Eof));
    }

    #[test]
    fn positions_are_one_based() {
        let t = tokenize("dtmc\n  module").unwrap();
        assert_eq!((t[1].span.line, t[1].span.column), (2, 3));
    }

    #[test]
    fn stray_character_is_rejected() {
        let err = tokenize("s = 1 # 2").unwrap_err();
        assert_eq!(err.span.column, 7);
    }
}
