//! Explicit-state elaboration of a parsed model into a [`Dtmc`].

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::expr::{eval, Env, EvalError, Value};
use crate::lexer::Span;
use crate::model::{Dtmc, ModelError, StateSpace, Transition, VariableDecl, ROW_SUM_TOLERANCE};

use super::ModelAst;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BuildOptions {
    /// Give deadlocked states a self-loop instead of failing.
    pub fix_deadlocks: bool,
    /// Non-standard: resolve overlapping guards by a uniform choice among
    /// the enabled commands instead of failing.
    pub merge_uniform: bool,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BuildError {
    #[error("{span}: {message}")]
    Eval { span: Span, message: String },
    #[error("{span}: variable `{name}`: {source}")]
    Variable {
        span: Span,
        name: String,
        source: ModelError,
    },
    #[error("{0}")]
    Space(ModelError),
    #[error("{span}: probability of the command is state-dependent (`{name}`); probabilities must be constant")]
    StateDependentProbability { span: Span, name: String },
    #[error("{span}: branch probability {value} outside [0, 1]")]
    ProbabilityOutOfRange { span: Span, value: String },
    #[error("{span}: branch probabilities sum to {sum}, not 1")]
    BranchSum { span: Span, sum: f64 },
    #[error("overlapping guards in state {state}: commands at {first} and {second} are both enabled")]
    OverlappingGuards {
        state: String,
        first: Span,
        second: Span,
    },
    #[error("deadlock in state {state}: no command is enabled (use --fix-deadlocks to add a self-loop)")]
    Deadlock { state: String },
    #[error("{span}: update sets `{variable}` to {value}, outside its range [{low}..{high}]")]
    RangeViolation {
        span: Span,
        variable: String,
        value: i64,
        low: i64,
        high: i64,
    },
    #[error("{span}: update assigns unknown variable `{variable}`")]
    UnknownVariable { span: Span, variable: String },
}

/// Constants only; variables are deliberately unbound.
struct ConstEnv<'a>(&'a BTreeMap<String, Value>);

impl Env for ConstEnv<'_> {
    fn ident(&self, name: &str) -> Option<Value> {
        self.0.get(name).cloned()
    }
}

struct ValuationEnv<'a> {
    names: &'a HashMap<&'a str, usize>,
    values: &'a [i64],
    constants: &'a BTreeMap<String, Value>,
}

impl Env for ValuationEnv<'_> {
    fn ident(&self, name: &str) -> Option<Value> {
        match self.names.get(name) {
            Some(&i) => Some(Value::Int(self.values[i])),
            None => self.constants.get(name).cloned(),
        }
    }
}

fn eval_err(span: Span, e: EvalError) -> BuildError {
    BuildError::Eval {
        span,
        message: e.to_string(),
    }
}

struct Row {
    entries: Vec<(usize, BigRational)>,
}

impl Row {
    fn add(&mut self, target: usize, p: BigRational) {
        match self.entries.iter_mut().find(|(t, _)| *t == target) {
            Some((_, q)) => *q += p,
            None => self.entries.push((target, p)),
        }
    }
}

/// Enumerates every valuation of the declared variables and turns the
/// enabled command in each state into that state's row.
pub fn build_dtmc(ast: &ModelAst, options: BuildOptions) -> Result<Dtmc, BuildError> {
    let mut constants = BTreeMap::new();
    for c in &ast.constants {
        let v = eval(&c.value, &ConstEnv(&constants)).map_err(|e| eval_err(c.span, e))?;
        constants.insert(c.name.clone(), v);
    }
    let cenv = ConstEnv(&constants);

    let mut decls = Vec::new();
    for v in &ast.module.variables {
        let int = |e: &crate::expr::Expr| -> Result<i64, BuildError> {
            eval(e, &cenv)
                .and_then(|x| x.as_int())
                .map_err(|err| eval_err(v.span, err))
        };
        let low = int(&v.low)?;
        let high = int(&v.high)?;
        let init = match &v.init {
            Some(e) => int(e)?,
            None => low,
        };
        decls.push(VariableDecl::new(&v.name, low, high, init).map_err(|source| {
            BuildError::Variable {
                span: v.span,
                name: v.name.clone(),
                source,
            }
        })?);
    }
    let space = StateSpace::new(decls).map_err(BuildError::Space)?;
    let names: HashMap<&str, usize> = space
        .variables()
        .iter()
        .enumerate()
        .map(|(i, v)| (v.name.as_str(), i))
        .collect();

    // Branch probabilities are constant, so they are evaluated once per command.
    let mut command_probs: Vec<Vec<BigRational>> = Vec::new();
    for cmd in &ast.module.commands {
        let mut probs = Vec::new();
        for b in &cmd.branches {
            let p = match &b.prob {
                None => BigRational::one(),
                Some(e) => match eval(e, &cenv) {
                    Ok(v) => v.as_rational().map_err(|err| eval_err(cmd.span, err))?,
                    Err(EvalError::Unbound(name)) if names.contains_key(name.as_str()) => {
                        return Err(BuildError::StateDependentProbability {
                            span: cmd.span,
                            name,
                        })
                    }
                    Err(err) => return Err(eval_err(cmd.span, err)),
                },
            };
            if p.is_negative() || p > BigRational::one() {
                return Err(BuildError::ProbabilityOutOfRange {
                    span: cmd.span,
                    value: crate::expr::format_rational(&p),
                });
            }
            probs.push(p);
        }
        let sum: f64 = probs.iter().map(|p| p.to_f64().unwrap_or(f64::NAN)).sum();
        if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
            return Err(BuildError::BranchSum {
                span: cmd.span,
                sum,
            });
        }
        command_probs.push(probs);
    }

    let n = space.size();
    let mut rows = Vec::with_capacity(n);
    for state in 0..n {
        let values = space.index_to_valuation(state);
        let env = ValuationEnv {
            names: &names,
            values: &values,
            constants: &constants,
        };
        let mut enabled = Vec::new();
        for (ci, cmd) in ast.module.commands.iter().enumerate() {
            let on = eval(&cmd.guard, &env)
                .and_then(|v| v.as_bool())
                .map_err(|e| eval_err(cmd.span, e))?;
            if on {
                enabled.push(ci);
            }
        }
        if enabled.len() > 1 && !options.merge_uniform {
            return Err(BuildError::OverlappingGuards {
                state: space.describe(state),
                first: ast.module.commands[enabled[0]].span,
                second: ast.module.commands[enabled[1]].span,
            });
        }
        let mut row = Row { entries: Vec::new() };
        if enabled.is_empty() {
            if !options.fix_deadlocks {
                return Err(BuildError::Deadlock {
                    state: space.describe(state),
                });
            }
            row.add(state, BigRational::one());
        }
        let share = BigRational::new(BigInt::one(), BigInt::from(enabled.len().max(1)));
        for &ci in &enabled {
            let cmd = &ast.module.commands[ci];
            for (branch, p) in cmd.branches.iter().zip(&command_probs[ci]) {
                if p.is_zero() {
                    continue;
                }
                let mut next = values.clone();
                for a in &branch.assignments {
                    let idx = *names.get(a.variable.as_str()).ok_or_else(|| BuildError::UnknownVariable {
                        span: a.span,
                        variable: a.variable.clone(),
                    })?;
                    let v = eval(&a.value, &env)
                        .and_then(|v| v.as_int())
                        .map_err(|e| eval_err(a.span, e))?;
                    let decl = &space.variables()[idx];
                    if v < decl.low || v > decl.high {
                        return Err(BuildError::RangeViolation {
                            span: cmd.span,
                            variable: a.variable.clone(),
                            value: v,
                            low: decl.low,
                            high: decl.high,
                        });
                    }
                    next[idx] = v;
                }
                let target = space.index_of(&next).map_err(BuildError::Space)?;
                row.add(target, p * &share);
            }
        }
        rows.push(
            row.entries
                .into_iter()
                .map(|(t, p)| Transition::exact(t, p))
                .collect::<Vec<_>>(),
        );
    }

    let init = space.initial_index();
    let mut dtmc = Dtmc::new(space, init, rows).with_constants(constants.clone());

    let mut labels = BTreeMap::new();
    for l in &ast.labels {
        let set = dtmc
            .satisfaction_set(&l.expr)
            .map_err(|e| eval_err(l.span, e))?;
        labels.insert(l.name.clone(), set);
    }
    if !labels.is_empty() {
        dtmc = dtmc.with_labels(labels);
    }
    Ok(dtmc)
}
