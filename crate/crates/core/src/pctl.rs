//! Probabilistic reachability properties: `P ~ p [F φ]`, `P=? [F φ]`,
//! step-bounded `F<=k`, and an optional `{ψ}` filter naming the states at
//! which the property is evaluated.

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::expr::{format_rational, parse_expr, Expr};
use crate::lexer::{tokenize, Cursor, ParseError, Span, Tok};
use crate::model::Dtmc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Comparison {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
}

impl Comparison {
    pub fn holds<T: PartialOrd>(self, value: &T, threshold: &T) -> bool {
        match self {
            Comparison::Lt => value < threshold,
            Comparison::Le => value <= threshold,
            Comparison::Gt => value > threshold,
            Comparison::Ge => value >= threshold,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Comparison::Lt => "<",
            Comparison::Le => "<=",
            Comparison::Gt => ">",
            Comparison::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Quantifier {
    Bound {
        op: Comparison,
        threshold: BigRational,
    },
    /// `P=?`
    Query,
}

impl Quantifier {
    pub fn threshold_f64(&self) -> Option<f64> {
        match self {
            Quantifier::Bound { threshold, .. } => threshold.to_f64(),
            Quantifier::Query => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PathFormula {
    Eventually(Expr),
    BoundedEventually { bound: u64, target: Expr },
}

impl PathFormula {
    pub fn target(&self) -> &Expr {
        match self {
            PathFormula::Eventually(t) | PathFormula::BoundedEventually { target: t, .. } => t,
        }
    }

    pub fn step_bound(&self) -> Option<u64> {
        match self {
            PathFormula::Eventually(_) => None,
            PathFormula::BoundedEventually { bound, .. } => Some(*bound),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Property {
    pub quantifier: Quantifier,
    pub path: PathFormula,
    pub filter: Option<Expr>,
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.quantifier {
            Quantifier::Bound { op, threshold } => {
                write!(f, "P {} {} [", op.symbol(), format_rational(threshold))?
            }
            Quantifier::Query => f.write_str("P = ? [")?,
        }
        match &self.path {
            PathFormula::Eventually(t) => write!(f, "F ({t})")?,
            PathFormula::BoundedEventually { bound, target } => write!(f, "F<={bound} ({target})")?,
        }
        if let Some(filter) = &self.filter {
            write!(f, " {{({filter})}}")?;
        }
        f.write_str("]")
    }
}

pub fn parse_property(text: &str) -> Result<Property, ParseError> {
    let mut cur = Cursor::new(tokenize(text)?);
    let p = parse_property_tokens(&mut cur)?;
    if !cur.at(&Tok::Eof) {
        return Err(cur.unexpected("expected end of property"));
    }
    Ok(p)
}

fn parse_property_tokens(cur: &mut Cursor) -> Result<Property, ParseError> {
    cur.expect_keyword("P")?;
    let quantifier = match cur.peek().clone() {
        Tok::Eq => {
            cur.next();
            cur.expect(&Tok::Question, "in `P=?`")?;
            Quantifier::Query
        }
        // `P ? [...]`, a common misspelling of `P=?`.
        Tok::Question => {
            cur.next();
            Quantifier::Query
        }
        Tok::Lt | Tok::Le | Tok::Gt | Tok::Ge => {
            let op = match cur.next().tok {
                Tok::Lt => Comparison::Lt,
                Tok::Le => Comparison::Le,
                Tok::Gt => Comparison::Gt,
                _ => Comparison::Ge,
            };
            let span = cur.span();
            let threshold = match cur.peek().clone() {
                Tok::Int(v) => BigRational::from_integer(v.into()),
                Tok::Decimal(r) => r,
                _ => return Err(cur.unexpected("malformed bound: expected a probability threshold")),
            };
            cur.next();
            if threshold < BigRational::zero() || threshold > BigRational::one() {
                return Err(ParseError::new(
                    span,
                    format!("threshold {} outside [0, 1]", format_rational(&threshold)),
                ));
            }
            Quantifier::Bound { op, threshold }
        }
        _ => return Err(cur.unexpected("malformed bound: expected `<`, `<=`, `>`, `>=` or `=?`")),
    };
    cur.expect(&Tok::LBracket, "to open path formula")?;
    if !cur.at_keyword("F") {
        let msg = match cur.peek() {
            Tok::Ident(w) if ["G", "X", "U", "W", "R"].contains(&w.as_str()) => {
                format!("path operator `{w}` is not supported; only F and F<=k")
            }
            _ => "expected path operator `F`".to_string(),
        };
        return Err(cur.unexpected(&msg));
    }
    cur.next();
    let path = if cur.eat(&Tok::Le) {
        let span = cur.span();
        let bound = match cur.peek() {
            Tok::Int(v) if *v >= 1 => *v as u64,
            Tok::Int(_) => return Err(ParseError::new(span, "step bound must be at least 1")),
            _ => return Err(cur.unexpected("expected an integer step bound")),
        };
        cur.next();
        PathFormula::BoundedEventually {
            bound,
            target: parse_expr(cur)?,
        }
    } else {
        PathFormula::Eventually(parse_expr(cur)?)
    };
    let filter = if cur.at(&Tok::LBrace) {
        cur.next();
        if cur.at(&Tok::RBrace) {
            return Err(ParseError::new(cur.span(), "empty filter braces"));
        }
        let f = parse_expr(cur)?;
        cur.expect(&Tok::RBrace, "to close filter")?;
        Some(f)
    } else {
        None
    };
    cur.expect(&Tok::RBracket, "to close path formula")?;
    Ok(Property {
        quantifier,
        path,
        filter,
    })
}

/// A property parsed from one line of a properties file.
#[derive(Debug, Clone, PartialEq)]
pub struct SourcedProperty {
    pub line: usize,
    pub text: String,
    pub property: Property,
}

/// All parse errors of a properties file, each with its file line.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{}", .errors.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("\n"))]
pub struct PropertiesError {
    pub errors: Vec<ParseError>,
}

/// One property per non-empty line; `//` comments and blank lines skipped.
pub fn parse_properties_file(text: &str) -> Result<Vec<SourcedProperty>, PropertiesError> {
    let mut props = Vec::new();
    let mut errors = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = match raw.find("//") {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if content.is_empty() {
            continue;
        }
        match parse_property(content) {
            Ok(property) => props.push(SourcedProperty {
                line,
                text: content.to_string(),
                property,
            }),
            Err(mut e) => {
                let offset = raw.find(content).unwrap_or(0);
                e.span = Span {
                    line,
                    column: e.span.column + offset,
                };
                errors.push(e);
            }
        }
    }
    if errors.is_empty() {
        Ok(props)
    } else {
        Err(PropertiesError { errors })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BindError {
    #[error("{span}: unknown identifier `{name}`")]
    UnknownIdentifier { name: String, span: Span },
    #[error("{span}: unknown label \"{name}\"")]
    UnknownLabel { name: String, span: Span },
}

/// A property whose names all resolve against a particular chain.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundProperty {
    pub property: Property,
    pub target: Expr,
    pub filter: Option<Expr>,
    /// Text used in reports.
    pub text: String,
}

impl BoundProperty {
    pub fn with_text(mut self, text: impl Into<String>) -> Self {
        self.text = text.into();
        self
    }
}

pub fn bind_formula(expr: &Expr, dtmc: &Dtmc) -> Result<Expr, BindError> {
    expr.resolve(&mut |e| match e {
        Expr::Ident(name, span) => {
            if let Some(i) = dtmc.space().variable_index(name) {
                Ok(Some(Expr::Var(i, name.clone())))
            } else if let Some(v) = dtmc.constants().get(name) {
                Ok(Some(Expr::Const(name.clone(), v.clone())))
            } else {
                Err(BindError::UnknownIdentifier {
                    name: name.clone(),
                    span: *span,
                })
            }
        }
        Expr::Label(name, span) if !dtmc.labels().contains_key(name) => Err(BindError::UnknownLabel {
            name: name.clone(),
            span: *span,
        }),
        _ => Ok(None),
    })
}

/// Resolves every identifier in `property` against `dtmc`.
pub fn bind(property: &Property, dtmc: &Dtmc) -> Result<BoundProperty, BindError> {
    let target = bind_formula(property.path.target(), dtmc)?;
    let filter = property
        .filter
        .as_ref()
        .map(|f| bind_formula(f, dtmc))
        .transpose()?;
    Ok(BoundProperty {
        property: property.clone(),
        target,
        filter,
        text: property.to_string(),
    })
}
