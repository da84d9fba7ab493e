//! Numerical and graph-based analysis of a [`Dtmc`].
//!
//! Unbounded reachability first splits the states into those that reach the
//! goal with probability 0, with probability 1, and the rest. Only the rest
//! enter a linear system `x = A·x + b`, solved either exactly over the
//! rationals or iteratively in floating point.

mod check;
mod exact;
mod iterative;
mod qualitative;
mod transient;

use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;

use crate::model::{Dtmc, ProbVector, StateSet};

pub use check::{check_property, Evaluation, QueryValue, VerificationResult};
pub use qualitative::{prob0, prob1, qualitative_sets, QualitativeSets};
pub use transient::{
    bounded_reach_probabilities, curve, push_distribution, transient_distribution,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    Power,
    Jacobi,
    GaussSeidel,
}

impl Method {
    pub const ITERATIVE: [Method; 3] = [Method::Power, Method::Jacobi, Method::GaussSeidel];
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Exact => "exact",
            Method::Power => "power",
            Method::Jacobi => "jacobi",
            Method::GaussSeidel => "gauss-seidel",
        })
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "exact" => Ok(Method::Exact),
            "power" => Ok(Method::Power),
            "jacobi" => Ok(Method::Jacobi),
            "gauss-seidel" | "gaussseidel" | "gs" => Ok(Method::GaussSeidel),
            other => Err(format!(
                "unknown engine `{other}` (expected exact, power, jacobi or gauss-seidel)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convergence {
    Absolute,
    Relative,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SolveOptions {
    pub method: Method,
    pub epsilon: f64,
    pub max_iterations: u64,
    pub convergence: Convergence,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            method: Method::Power,
            epsilon: 1e-6,
            max_iterations: 1_000_000,
            convergence: Convergence::Absolute,
        }
    }
}

impl SolveOptions {
    pub fn with_method(method: Method) -> Self {
        SolveOptions {
            method,
            ..SolveOptions::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EngineError {
    #[error("{method} did not converge within {iterations} iterations (residual {residual:e})")]
    NotConverged {
        method: Method,
        iterations: u64,
        residual: f64,
    },
    #[error("epsilon must be positive, got {0}")]
    BadEpsilon(f64),
    #[error("cannot evaluate state formula: {0}")]
    Eval(#[from] crate::expr::EvalError),
    #[error("filter {0} matches no state")]
    EmptyFilter(String),
}

/// Per-state reachability values and solver bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct ReachSolution {
    pub values: ProbVector,
    /// Present when the exact engine ran.
    pub exact: Option<Vec<BigRational>>,
    pub method: Method,
    pub iterations: u64,
    pub residual: f64,
}

/// Probability of eventually reaching `goal`, from every state.
///
/// The chain must satisfy [`Dtmc::validate`].
pub fn reach_probabilities(
    dtmc: &Dtmc,
    goal: &StateSet,
    options: &SolveOptions,
) -> Result<ReachSolution, EngineError> {
    if options.epsilon.is_nan() || options.epsilon <= 0.0 {
        return Err(EngineError::BadEpsilon(options.epsilon));
    }
    let sets = qualitative_sets(dtmc, goal);
    let system = LinearSystem::new(dtmc, &sets);
    match options.method {
        Method::Exact => {
            let exact = exact::solve(dtmc, &sets, &system);
            let values = ProbVector::new(
                exact
                    .iter()
                    .map(|r| num_traits::ToPrimitive::to_f64(r).unwrap_or(f64::NAN))
                    .collect(),
            );
            Ok(ReachSolution {
                values,
                exact: Some(exact),
                method: Method::Exact,
                iterations: 0,
                residual: 0.0,
            })
        }
        method => {
            let (x, iterations, residual) = iterative::solve(&system, method, options)?;
            let mut values = vec![0.0; dtmc.num_states()];
            for s in sets.prob1.iter() {
                values[s] = 1.0;
            }
            for (local, &s) in system.states.iter().enumerate() {
                values[s] = x[local];
            }
            Ok(ReachSolution {
                values: ProbVector::new(values),
                exact: None,
                method,
                iterations,
                residual,
            })
        }
    }
}

/// `x = A·x + b` restricted to the undecided states.
pub(crate) struct LinearSystem {
    /// Global index of each unknown.
    pub states: Vec<usize>,
    /// Per unknown: (local column, probability) for transitions among unknowns.
    pub rows: Vec<Vec<(usize, f64)>>,
    /// Per unknown: one-step mass into the probability-one region.
    pub rhs: Vec<f64>,
}

impl LinearSystem {
    fn new(dtmc: &Dtmc, sets: &QualitativeSets) -> Self {
        let states = sets.unknown.to_vec();
        let mut local = vec![usize::MAX; dtmc.num_states()];
        for (i, &s) in states.iter().enumerate() {
            local[s] = i;
        }
        let mut rows = Vec::with_capacity(states.len());
        let mut rhs = Vec::with_capacity(states.len());
        for &s in &states {
            let mut row = Vec::new();
            let mut b = 0.0;
            for t in dtmc.row(s) {
                if sets.prob1.contains(t.target) {
                    b += t.prob;
                } else if sets.unknown.contains(t.target) {
                    row.push((local[t.target], t.prob));
                }
            }
            rows.push(row);
            rhs.push(b);
        }
        LinearSystem { states, rows, rhs }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_names_round_trip() {
        for m in [Method::Exact, Method::Power, Method::Jacobi, Method::GaussSeidel] {
            assert_eq!(m.to_string().parse::<Method>(), Ok(m));
        }
        assert!("newton".parse::<Method>().is_err());
    }

    #[test]
    fn rejects_non_positive_epsilon() {
        let d = Dtmc::from_float_rows(0, &[&[(0, 1.0)]]);
        let goal = StateSet::from_indices(1, [0]);
        let opts = SolveOptions {
            epsilon: 0.0,
            ..SolveOptions::default()
        };
        assert_eq!(reach_probabilities(&d, &goal, &opts), Err(EngineError::BadEpsilon(0.0)));
    }
}
