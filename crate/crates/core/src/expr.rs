//! Expression sublanguage shared by guards, updates, labels and state formulas.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::lexer::{Cursor, ParseError, Span, Tok};

/// Runtime value of an expression.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Rational(BigRational),
    Bool(bool),
}

impl Value {
    fn type_name(&self) -> &'static str {
        match self {
            Value::Int(_) => "integer",
            Value::Rational(_) => "decimal",
            Value::Bool(_) => "boolean",
        }
    }

    pub fn as_bool(&self) -> Result<bool, EvalError> {
        match self {
            Value::Bool(b) => Ok(*b),
            other => Err(EvalError::TypeMismatch {
                expected: "boolean",
                found: other.type_name(),
            }),
        }
    }

    pub fn as_rational(&self) -> Result<BigRational, EvalError> {
        match self {
            Value::Int(v) => Ok(BigRational::from_integer(BigInt::from(*v))),
            Value::Rational(r) => Ok(r.clone()),
            Value::Bool(_) => Err(EvalError::TypeMismatch {
                expected: "number",
                found: "boolean",
            }),
        }
    }

    /// Integer view. A rational with a fractional part is rejected; this is
    /// where a non-exact division surfaces in an integer context.
    pub fn as_int(&self) -> Result<i64, EvalError> {
        match self {
            Value::Int(v) => Ok(*v),
            Value::Rational(r) if r.is_integer() => {
                r.to_integer().to_i64().ok_or(EvalError::Overflow)
            }
            Value::Rational(r) => Err(EvalError::NotInteger(format_rational(r))),
            Value::Bool(_) => Err(EvalError::TypeMismatch {
                expected: "integer",
                found: "boolean",
            }),
        }
    }

    fn from_rational(r: BigRational) -> Value {
        if r.is_integer() {
            if let Some(v) = r.to_integer().to_i64() {
                return Value::Int(v);
            }
        }
        Value::Rational(r)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Rational(r) if r.is_integer() => write!(f, "{}.0", r.numer()),
            Value::Rational(r) => f.write_str(&format_rational(r)),
            Value::Bool(b) => write!(f, "{b}"),
        }
    }
}

/// Renders a rational as a terminating decimal when possible, `n/d` otherwise.
pub fn format_rational(r: &BigRational) -> String {
    let mut den = r.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let (mut twos, mut fives) = (0u32, 0u32);
    while (&den % &two).is_zero() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if den != BigInt::from(1) {
        return format!("{}/{}", r.numer(), r.denom());
    }
    let places = twos.max(fives) as usize;
    if places == 0 {
        return r.numer().to_string();
    }
    let scaled = (r * BigRational::from_integer(num_traits::pow(BigInt::from(10), places))).to_integer();
    let neg = scaled.is_negative();
    let digits = scaled.abs().to_string();
    let digits = format!("{digits:0>width$}", width = places + 1);
    let (int_part, frac) = digits.split_at(digits.len() - places);
    format!("{}{int_part}.{frac}", if neg { "-" } else { "" })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Not,
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Or,
    And,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Mul,
    Div,
}

impl BinaryOp {
    fn precedence(self) -> u8 {
        match self {
            BinaryOp::Or => 1,
            BinaryOp::And => 2,
            BinaryOp::Eq
            | BinaryOp::Ne
            | BinaryOp::Lt
            | BinaryOp::Le
            | BinaryOp::Gt
            | BinaryOp::Ge => 4,
            BinaryOp::Add | BinaryOp::Sub => 5,
            BinaryOp::Mul | BinaryOp::Div => 6,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Or => "|",
            BinaryOp::And => "&",
            BinaryOp::Eq => "=",
            BinaryOp::Ne => "!=",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
        }
    }

    fn from_tok(tok: &Tok) -> Option<BinaryOp> {
        Some(match tok {
            Tok::Or => BinaryOp::Or,
            Tok::And => BinaryOp::And,
            Tok::Eq => BinaryOp::Eq,
            Tok::Ne => BinaryOp::Ne,
            Tok::Lt => BinaryOp::Lt,
            Tok::Le => BinaryOp::Le,
            Tok::Gt => BinaryOp::Gt,
            Tok::Ge => BinaryOp::Ge,
            Tok::Plus => BinaryOp::Add,
            Tok::Minus => BinaryOp::Sub,
            Tok::Star => BinaryOp::Mul,
            Tok::Slash => BinaryOp::Div,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Lit(Value),
    /// Unresolved name.
    Ident(String, Span),
    /// Quoted label reference, `"name"`.
    Label(String, Span),
    /// Variable resolved to its position in the state space.
    Var(usize, String),
    /// Constant resolved to its value.
    Const(String, Value),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn binary(op: BinaryOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn negation(e: Expr) -> Expr {
        Expr::Unary(UnaryOp::Not, Box::new(e))
    }

    /// Replaces every name with what `resolve` maps it to.
    pub fn resolve<E>(
        &self,
        resolve: &mut impl FnMut(&Expr) -> Result<Option<Expr>, E>,
    ) -> Result<Expr, E> {
        if let Some(replaced) = resolve(self)? {
            return Ok(replaced);
        }
        Ok(match self {
            Expr::Unary(op, e) => Expr::Unary(*op, Box::new(e.resolve(resolve)?)),
            Expr::Binary(op, l, r) => Expr::binary(*op, l.resolve(resolve)?, r.resolve(resolve)?),
            other => other.clone(),
        })
    }

    /// Every unresolved identifier, in source order.
    pub fn idents(&self) -> Vec<(&str, Span)> {
        let mut out = Vec::new();
        self.collect_idents(&mut out);
        out
    }

    fn collect_idents<'a>(&'a self, out: &mut Vec<(&'a str, Span)>) {
        match self {
            Expr::Ident(name, span) => out.push((name, *span)),
            Expr::Unary(_, e) => e.collect_idents(out),
            Expr::Binary(_, l, r) => {
                l.collect_idents(out);
                r.collect_idents(out);
            }
            _ => {}
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(op, ..) => op.precedence(),
            Expr::Unary(UnaryOp::Not, _) => 3,
            Expr::Unary(UnaryOp::Neg, _) => 7,
            _ => 8,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Lit(v) => write!(f, "{v}"),
            Expr::Ident(name, _) | Expr::Var(_, name) | Expr::Const(name, _) => f.write_str(name),
            Expr::Label(name, _) => write!(f, "\"{name}\""),
            Expr::Unary(op, e) => {
                f.write_str(match op {
                    UnaryOp::Not => "!",
                    UnaryOp::Neg => "-",
                })?;
                if e.precedence() < self.precedence() || matches!(**e, Expr::Unary(..)) {
                    write!(f, "({e})")
                } else {
                    write!(f, "{e}")
                }
            }
            Expr::Binary(op, l, r) => {
                let p = op.precedence();
                // Left-associative: a right child of equal precedence needs parentheses.
                // Comparisons do not chain, so they need them on both sides.
                if l.precedence() < p || (p == 4 && l.precedence() == 4) {
                    write!(f, "({l})")?;
                } else {
                    write!(f, "{l}")?;
                }
                write!(f, " {} ", op.symbol())?;
                if r.precedence() <= p {
                    write!(f, "({r})")
                } else {
                    write!(f, "{r}")
                }
            }
        }
    }
}

/// Errors raised while evaluating an expression.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("unbound identifier `{0}`")]
    Unbound(String),
    #[error("unknown label \"{0}\"")]
    UnknownLabel(String),
    #[error("type mismatch: expected {expected}, found {found}")]
    TypeMismatch {
        expected: &'static str,
        found: &'static str,
    },
    #[error("non-exact integer division: {0} is not an integer")]
    NotInteger(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("integer overflow")]
    Overflow,
}

/// Name resolution for evaluation.
pub trait Env {
    fn ident(&self, name: &str) -> Option<Value>;

    fn variable(&self, _index: usize) -> Option<Value> {
        None
    }

    fn label(&self, _name: &str) -> Option<bool> {
        None
    }
}

/// An environment with no bindings.
pub struct EmptyEnv;

impl Env for EmptyEnv {
    fn ident(&self, _name: &str) -> Option<Value> {
        None
    }
}

struct MapEnv<'a> {
    valuation: &'a HashMap<String, i64>,
    constants: &'a HashMap<String, Value>,
}

impl Env for MapEnv<'_> {
    fn ident(&self, name: &str) -> Option<Value> {
        self.valuation
            .get(name)
            .map(|v| Value::Int(*v))
            .or_else(|| self.constants.get(name).cloned())
    }
}

/// Evaluates `expr` with variables taken from `valuation` and named constants
/// from `constants`.
pub fn eval_expr(
    expr: &Expr,
    valuation: &HashMap<String, i64>,
    constants: &HashMap<String, Value>,
) -> Result<Value, EvalError> {
    eval(expr, &MapEnv { valuation, constants })
}

pub fn eval(expr: &Expr, env: &dyn Env) -> Result<Value, EvalError> {
    match expr {
        Expr::Lit(v) | Expr::Const(_, v) => Ok(v.clone()),
        Expr::Ident(name, _) => env.ident(name).ok_or_else(|| EvalError::Unbound(name.clone())),
        Expr::Var(index, name) => env
            .variable(*index)
            .or_else(|| env.ident(name))
            .ok_or_else(|| EvalError::Unbound(name.clone())),
        Expr::Label(name, _) => env
            .label(name)
            .map(Value::Bool)
            .ok_or_else(|| EvalError::UnknownLabel(name.clone())),
        Expr::Unary(UnaryOp::Not, e) => Ok(Value::Bool(!eval(e, env)?.as_bool()?)),
        Expr::Unary(UnaryOp::Neg, e) => match eval(e, env)? {
            Value::Int(v) => v.checked_neg().map(Value::Int).ok_or(EvalError::Overflow),
            Value::Rational(r) => Ok(Value::Rational(-r)),
            Value::Bool(_) => Err(EvalError::TypeMismatch {
                expected: "number",
                found: "boolean",
            }),
        },
        Expr::Binary(op, l, r) => eval_binary(*op, l, r, env),
    }
}

fn eval_binary(op: BinaryOp, l: &Expr, r: &Expr, env: &dyn Env) -> Result<Value, EvalError> {
    match op {
        BinaryOp::Or => {
            if eval(l, env)?.as_bool()? {
                return Ok(Value::Bool(true));
            }
            Ok(Value::Bool(eval(r, env)?.as_bool()?))
        }
        BinaryOp::And => {
            if !eval(l, env)?.as_bool()? {
                return Ok(Value::Bool(false));
            }
            Ok(Value::Bool(eval(r, env)?.as_bool()?))
        }
        BinaryOp::Eq | BinaryOp::Ne => {
            let (a, b) = (eval(l, env)?, eval(r, env)?);
            let equal = match (&a, &b) {
                (Value::Bool(x), Value::Bool(y)) => x == y,
                (Value::Bool(_), _) | (_, Value::Bool(_)) => {
                    return Err(EvalError::TypeMismatch {
                        expected: if matches!(a, Value::Bool(_)) { "boolean" } else { "number" },
                        found: if matches!(b, Value::Bool(_)) { "boolean" } else { "number" },
                    })
                }
                (Value::Int(x), Value::Int(y)) => x == y,
                _ => a.as_rational()? == b.as_rational()?,
            };
            Ok(Value::Bool(if op == BinaryOp::Eq { equal } else { !equal }))
        }
        BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge => {
            let (a, b) = (eval(l, env)?, eval(r, env)?);
            let ord = match (&a, &b) {
                (Value::Int(x), Value::Int(y)) => x.cmp(y),
                _ => a.as_rational()?.cmp(&b.as_rational()?),
            };
            Ok(Value::Bool(match op {
                BinaryOp::Lt => ord.is_lt(),
                BinaryOp::Le => ord.is_le(),
                BinaryOp::Gt => ord.is_gt(),
                _ => ord.is_ge(),
            }))
        }
        BinaryOp::Add | BinaryOp::Sub | BinaryOp::Mul => {
            let (a, b) = (eval(l, env)?, eval(r, env)?);
            if let (Value::Int(x), Value::Int(y)) = (&a, &b) {
                let v = match op {
                    BinaryOp::Add => x.checked_add(*y),
                    BinaryOp::Sub => x.checked_sub(*y),
                    _ => x.checked_mul(*y),
                };
                if let Some(v) = v {
                    return Ok(Value::Int(v));
                }
            }
            let (x, y) = (a.as_rational()?, b.as_rational()?);
            Ok(Value::from_rational(match op {
                BinaryOp::Add => x + y,
                BinaryOp::Sub => x - y,
                _ => x * y,
            }))
        }
        BinaryOp::Div => {
            let (x, y) = (eval(l, env)?.as_rational()?, eval(r, env)?.as_rational()?);
            if y.is_zero() {
                return Err(EvalError::DivisionByZero);
            }
            Ok(Value::from_rational(x / y))
        }
    }
}

/// Precedence-climbing parser over the shared token stream.
///
/// Grammar, loosest first: `|`, `&`, `!`, comparisons, `+ -`, `* /`,
/// unary minus, atoms.
pub(crate) fn parse_expr(cur: &mut Cursor) -> Result<Expr, ParseError> {
    parse_binary(cur, 1)
}

fn parse_binary(cur: &mut Cursor, min_prec: u8) -> Result<Expr, ParseError> {
    let mut lhs = parse_prefix(cur, min_prec)?;
    loop {
        let op = match BinaryOp::from_tok(cur.peek()) {
            Some(op) if op.precedence() >= min_prec => op,
            _ => break,
        };
        cur.next();
        let rhs = parse_binary(cur, op.precedence() + 1)?;
        lhs = Expr::binary(op, lhs, rhs);
        if op.precedence() == 4 && BinaryOp::from_tok(cur.peek()).map(|o| o.precedence()) == Some(4) {
            return Err(cur.unexpected("comparison operators do not chain"));
        }
    }
    Ok(lhs)
}

fn parse_prefix(cur: &mut Cursor, min_prec: u8) -> Result<Expr, ParseError> {
    if cur.at(&Tok::Not) && min_prec <= 3 {
        cur.next();
        let e = parse_binary(cur, 3)?;
        return Ok(Expr::negation(e));
    }
    if cur.at(&Tok::Not) {
        cur.next();
        let e = parse_atom(cur)?;
        return Ok(Expr::negation(e));
    }
    if cur.eat(&Tok::Minus) {
        let e = parse_prefix(cur, 7)?;
        return Ok(match e {
            Expr::Lit(Value::Int(v)) => Expr::Lit(Value::Int(-v)),
            Expr::Lit(Value::Rational(r)) => Expr::Lit(Value::Rational(-r)),
            other => Expr::Unary(UnaryOp::Neg, Box::new(other)),
        });
    }
    parse_atom(cur)
}

fn parse_atom(cur: &mut Cursor) -> Result<Expr, ParseError> {
    let span = cur.span();
    match cur.peek().clone() {
        Tok::Int(v) => {
            cur.next();
            Ok(Expr::Lit(Value::Int(v)))
        }
        Tok::Decimal(r) => {
            cur.next();
            Ok(Expr::Lit(Value::Rational(r)))
        }
        Tok::Str(name) => {
            cur.next();
            Ok(Expr::Label(name, span))
        }
        Tok::Ident(word) => {
            cur.next();
            Ok(match word.as_str() {
                "true" => Expr::Lit(Value::Bool(true)),
                "false" => Expr::Lit(Value::Bool(false)),
                _ => Expr::Ident(word, span),
            })
        }
        Tok::LParen => {
            cur.next();
            let e = parse_expr(cur)?;
            cur.expect(&Tok::RParen, "to close parenthesis")?;
            Ok(e)
        }
        _ => Err(cur.unexpected("expected an expression")),
    }
}

/// Parses a standalone expression (used for state formulas given on the
/// command line).
pub fn parse_standalone(src: &str) -> Result<Expr, ParseError> {
    let mut cur = Cursor::new(crate::lexer::tokenize(src)?);
    let e = parse_expr(&mut cur)?;
    if !cur.at(&Tok::Eof) {
        return Err(cur.unexpected("expected end of expression"));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn val(src: &str, s: i64) -> Result<Value, EvalError> {
        let e = parse_standalone(src).unwrap();
        let vars = HashMap::from([("s".to_string(), s)]);
        eval_expr(&e, &vars, &HashMap::new())
    }

    #[test]
    fn guard_equality() {
        assert_eq!(val("s=10", 10), Ok(Value::Bool(true)));
        assert_eq!(val("s=10", 9), Ok(Value::Bool(false)));
    }

    #[test]
    fn arithmetic() {
        assert_eq!(val("s+1", 3), Ok(Value::Int(4)));
        assert_eq!(val("2*s-1", 3), Ok(Value::Int(5)));
        assert_eq!(val("s/2", 4), Ok(Value::Int(2)));
        assert_eq!(
            val("1/4", 0),
            Ok(Value::Rational(BigRational::new(1.into(), 4.into())))
        );
    }

    #[test]
    fn disjunction_of_comparisons() {
        assert_eq!(val("(s=8)|(s=9)", 9), Ok(Value::Bool(true)));
        assert_eq!(val("(s=8)|(s=9)", 7), Ok(Value::Bool(false)));
        assert_eq!(val("!(s=8) & s>=8", 9), Ok(Value::Bool(true)));
    }

    #[test]
    fn evaluation_errors() {
        assert_eq!(val("t=1", 0), Err(EvalError::Unbound("t".into())));
        assert!(matches!(val("s & true", 0), Err(EvalError::TypeMismatch { .. })));
        assert!(matches!(val("(s=1) + 1", 0), Err(EvalError::TypeMismatch { .. })));
        assert_eq!(val("1/0", 0), Err(EvalError::DivisionByZero));
        assert!(matches!(val("s/2", 3).unwrap().as_int(), Err(EvalError::NotInteger(_))));
    }

    #[test]
    fn precedence() {
        let e = parse_standalone("1 + 2 * 3 = 7 & !false | false").unwrap();
        assert_eq!(eval(&e, &EmptyEnv), Ok(Value::Bool(true)));
        assert_eq!(e.to_string(), "1 + 2 * 3 = 7 & !false | false");
        let e = parse_standalone("(1 - 2) - 3").unwrap();
        assert_eq!(e.to_string(), "1 - 2 - 3");
        let e = parse_standalone("1 - (2 - 3)").unwrap();
        assert_eq!(e.to_string(), "1 - (2 - 3)");
    }

    #[test]
    fn decimal_rendering() {
        let r = |n: i64, d: i64| format_rational(&BigRational::new(n.into(), d.into()));
        assert_eq!(r(13, 20), "0.65");
        assert_eq!(r(1, 1), "1");
        assert_eq!(r(-1, 8), "-0.125");
        assert_eq!(r(1, 3), "1/3");
    }

    fn arb_expr() -> impl Strategy<Value = String> {
        let leaf = prop_oneof![
            (0i64..20).prop_map(|v| v.to_string()),
            Just("s".to_string()),
            Just("true".to_string()),
        ];
        leaf.prop_recursive(4, 24, 2, |inner| {
            (inner.clone(), prop::sample::select(vec!["+", "-", "*", "=", "<", "&", "|"]), inner)
                .prop_map(|(a, op, b)| format!("({a} {op} {b})"))
        })
    }

    proptest! {
        #[test]
        fn print_then_parse_is_identity(src in arb_expr()) {
            let e = parse_standalone(&src).unwrap();
            let again = parse_standalone(&e.to_string()).unwrap();
            prop_assert_eq!(e, again);
        }
    }
}
