use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::model::{Dtmc, ProbVector, StateSet};
use crate::pctl::{BoundProperty, PathFormula, Quantifier};

use super::{bounded_reach_probabilities, reach_probabilities, EngineError, SolveOptions};

/// Where a property's verdict or value is read off.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Evaluation {
    InitialState(usize),
    FilterStates(Vec<usize>),
}

impl Evaluation {
    pub fn states(&self) -> Vec<usize> {
        match self {
            Evaluation::InitialState(s) => vec![*s],
            Evaluation::FilterStates(v) => v.clone(),
        }
    }
}

/// Answer to a `P=?` query at the evaluation state(s).
#[derive(Debug, Clone, PartialEq)]
pub enum QueryValue {
    Scalar {
        state: usize,
        value: f64,
        exact: Option<BigRational>,
    },
    /// Several filter states: the range plus every value.
    Range {
        min: f64,
        max: f64,
        per_state: Vec<(usize, f64)>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationResult {
    pub property: String,
    pub evaluation: Evaluation,
    /// Bound properties only: does the bound hold at every evaluation state.
    pub verdict: Option<bool>,
    /// Queries only.
    pub query: Option<QueryValue>,
    /// Bound properties: states meeting the bound. Queries: states with a
    /// positive probability.
    pub satisfying: StateSet,
    pub values: ProbVector,
    pub exact: Option<Vec<BigRational>>,
    /// `exact`, `power`, `jacobi`, `gauss-seidel`, or `bounded` for `F<=k`.
    pub method: String,
    pub iterations: u64,
    pub residual: f64,
}

impl VerificationResult {
    pub fn count(&self) -> usize {
        self.satisfying.len()
    }
}

/// Computes the per-state probabilities of the path formula and reads off
/// the verdict (bounds) or value (queries) at the initial state, or at the
/// filter states when a filter is present.
pub fn check_property(
    dtmc: &Dtmc,
    property: &BoundProperty,
    options: &SolveOptions,
) -> Result<VerificationResult, EngineError> {
    let goal = dtmc.satisfaction_set(&property.target)?;
    let evaluation = match &property.filter {
        None => Evaluation::InitialState(dtmc.init_state()),
        Some(f) => {
            let set = dtmc.satisfaction_set(f)?;
            if set.is_empty() {
                return Err(EngineError::EmptyFilter(f.to_string()));
            }
            Evaluation::FilterStates(set.to_vec())
        }
    };

    let (values, exact, method, iterations, residual) = match &property.property.path {
        PathFormula::Eventually(_) => {
            let sol = reach_probabilities(dtmc, &goal, options)?;
            (sol.values, sol.exact, sol.method.to_string(), sol.iterations, sol.residual)
        }
        PathFormula::BoundedEventually { bound, .. } => (
            bounded_reach_probabilities(dtmc, &goal, *bound),
            None,
            "bounded".to_string(),
            *bound,
            0.0,
        ),
    };

    let n = dtmc.num_states();
    let eval_states = evaluation.states();
    let (verdict, query, satisfying) = match &property.property.quantifier {
        Quantifier::Bound { op, threshold } => {
            let threshold_f = threshold.to_f64().unwrap_or(f64::NAN);
            let meets = |s: usize| match &exact {
                Some(ex) => op.holds(&ex[s], threshold),
                None => op.holds(&values[s], &threshold_f),
            };
            let satisfying = StateSet::from_indices(n, (0..n).filter(|&s| meets(s)));
            let verdict = eval_states.iter().all(|&s| satisfying.contains(s));
            (Some(verdict), None, satisfying)
        }
        Quantifier::Query => {
            let positive = StateSet::from_indices(n, (0..n).filter(|&s| values[s] > 0.0));
            let q = if let [state] = eval_states[..] {
                QueryValue::Scalar {
                    state,
                    value: values[state],
                    exact: exact.as_ref().map(|e| e[state].clone()),
                }
            } else {
                let per_state: Vec<(usize, f64)> = eval_states.iter().map(|&s| (s, values[s])).collect();
                let min = per_state.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
                let max = per_state.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
                QueryValue::Range { min, max, per_state }
            };
            (None, Some(q), positive)
        }
    };

    Ok(VerificationResult {
        property: property.text.clone(),
        evaluation,
        verdict,
        query,
        satisfying,
        values,
        exact,
        method,
        iterations,
        residual,
    })
}
