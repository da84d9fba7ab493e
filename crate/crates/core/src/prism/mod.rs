//! PRISM-language subset: a single `dtmc` module of bounded integer
//! variables and guarded commands, plus constants and labels.

mod build;
mod parser;

use std::fmt;

use crate::expr::Expr;
use crate::lexer::Span;

pub use build::{build_dtmc, BuildError, BuildOptions};
pub use parser::parse_model;

#[derive(Debug, Clone, PartialEq)]
pub struct ModelAst {
    pub constants: Vec<ConstDecl>,
    pub module: Module,
    pub labels: Vec<LabelDef>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstDecl {
    pub name: String,
    pub value: Expr,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Module {
    pub name: String,
    pub variables: Vec<VarDecl>,
    pub commands: Vec<GuardedCommand>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarDecl {
    pub name: String,
    pub low: Expr,
    pub high: Expr,
    /// Defaults to the lower bound.
    pub init: Option<Expr>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GuardedCommand {
    pub guard: Expr,
    pub branches: Vec<Branch>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    /// `None` when written without a `p:` prefix, i.e. probability one.
    pub prob: Option<Expr>,
    /// Empty for the identity update `true`.
    pub assignments: Vec<Assignment>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub variable: String,
    pub value: Expr,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabelDef {
    pub name: String,
    pub expr: Expr,
    pub span: Span,
}

impl fmt::Display for ModelAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "dtmc")?;
        writeln!(f)?;
        for c in &self.constants {
            writeln!(f, "const {} = {};", c.name, c.value)?;
        }
        if !self.constants.is_empty() {
            writeln!(f)?;
        }
        writeln!(f, "module {}", self.module.name)?;
        writeln!(f)?;
        for v in &self.module.variables {
            write!(f, "    {} : [{}..{}]", v.name, v.low, v.high)?;
            if let Some(init) = &v.init {
                write!(f, " init {init}")?;
            }
            writeln!(f, ";")?;
        }
        writeln!(f)?;
        for c in &self.module.commands {
            writeln!(f, "    {c}")?;
        }
        writeln!(f)?;
        writeln!(f, "endmodule")?;
        for l in &self.labels {
            writeln!(f, "label \"{}\" = {};", l.name, l.expr)?;
        }
        Ok(())
    }
}

impl fmt::Display for GuardedCommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[] {} -> ", self.guard)?;
        for (i, b) in self.branches.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            if let Some(p) = &b.prob {
                write!(f, "{p}:")?;
            }
            if b.assignments.is_empty() {
                f.write_str("true")?;
            }
            for (j, a) in b.assignments.iter().enumerate() {
                if j > 0 {
                    f.write_str(" & ")?;
                }
                write!(f, "({}'={})", a.variable, a.value)?;
            }
        }
        f.write_str(";")
    }
}
