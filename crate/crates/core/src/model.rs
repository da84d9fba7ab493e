//! Discrete-time Markov chain representation.
//!
//! A [`Dtmc`] is a finite state space, an initial state, one sparse row of
//! outgoing transitions per state and a set of named state labels. States are
//! numbered by a mixed-radix encoding of their variable valuation in which
//! the first declared variable varies slowest.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::expr::{self, Env, EvalError, Expr, Value};

/// Absolute tolerance on row sums.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("variable `{name}`: init {init} outside range [{low}..{high}]")]
    InitOutOfRange {
        name: String,
        low: i64,
        high: i64,
        init: i64,
    },
    #[error("variable `{name}`: empty range [{low}..{high}]")]
    EmptyRange { name: String, low: i64, high: i64 },
    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),
    #[error("state space too large")]
    TooLarge,
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("missing value for variable `{0}`")]
    MissingVariable(String),
    #[error("value {value} of `{name}` outside range [{low}..{high}]")]
    OutOfRange {
        name: String,
        value: i64,
        low: i64,
        high: i64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct VariableDecl {
    pub name: String,
    pub low: i64,
    pub high: i64,
    pub init: i64,
}

impl VariableDecl {
    pub fn new(name: impl Into<String>, low: i64, high: i64, init: i64) -> Result<Self, ModelError> {
        let name = name.into();
        if high < low {
            return Err(ModelError::EmptyRange { name, low, high });
        }
        if init < low || init > high {
            return Err(ModelError::InitOutOfRange {
                name,
                low,
                high,
                init,
            });
        }
        Ok(VariableDecl {
            name,
            low,
            high,
            init,
        })
    }

    pub fn range_size(&self) -> usize {
        (self.high - self.low + 1) as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSpace {
    variables: Vec<VariableDecl>,
    size: usize,
}

impl StateSpace {
    pub fn new(variables: Vec<VariableDecl>) -> Result<Self, ModelError> {
        let mut size: usize = 1;
        for (i, v) in variables.iter().enumerate() {
            if variables[..i].iter().any(|w| w.name == v.name) {
                return Err(ModelError::DuplicateVariable(v.name.clone()));
            }
            size = size
                .checked_mul(v.range_size())
                .filter(|s| *s <= 1 << 28)
                .ok_or(ModelError::TooLarge)?;
        }
        Ok(StateSpace { variables, size })
    }

    pub fn variables(&self) -> &[VariableDecl] {
        &self.variables
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    /// Variable values of state `index`, in declaration order.
    pub fn index_to_valuation(&self, index: usize) -> Vec<i64> {
        assert!(index < self.size, "state index {index} out of range");
        let mut values = vec![0; self.variables.len()];
        let mut rest = index;
        for (slot, v) in values.iter_mut().zip(&self.variables).rev() {
            let r = v.range_size();
            *slot = v.low + (rest % r) as i64;
            rest /= r;
        }
        values
    }

    /// Index of a valuation given in declaration order.
    pub fn index_of(&self, values: &[i64]) -> Result<usize, ModelError> {
        let mut index = 0;
        for (value, v) in values.iter().zip(&self.variables) {
            if *value < v.low || *value > v.high {
                return Err(ModelError::OutOfRange {
                    name: v.name.clone(),
                    value: *value,
                    low: v.low,
                    high: v.high,
                });
            }
            index = index * v.range_size() + (*value - v.low) as usize;
        }
        Ok(index)
    }

    pub fn valuation_to_index(&self, valuation: &HashMap<String, i64>) -> Result<usize, ModelError> {
        if let Some(unknown) = valuation.keys().find(|k| self.variable_index(k).is_none()) {
            return Err(ModelError::UnknownVariable(unknown.clone()));
        }
        let values = self
            .variables
            .iter()
            .map(|v| {
                valuation
                    .get(&v.name)
                    .copied()
                    .ok_or_else(|| ModelError::MissingVariable(v.name.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        self.index_of(&values)
    }

    pub fn initial_index(&self) -> usize {
        let init: Vec<i64> = self.variables.iter().map(|v| v.init).collect();
        self.index_of(&init).expect("init values are within range")
    }

    /// Human-readable valuation, e.g. `s=3` or `a=1,b=2`.
    pub fn describe(&self, index: usize) -> String {
        self.index_to_valuation(index)
            .iter()
            .zip(&self.variables)
            .map(|(value, v)| format!("{}={value}", v.name))
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// A set of states, stored densely.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StateSet {
    bits: Vec<bool>,
}

impl StateSet {
    pub fn empty(size: usize) -> Self {
        StateSet {
            bits: vec![false; size],
        }
    }

    pub fn full(size: usize) -> Self {
        StateSet {
            bits: vec![true; size],
        }
    }

    pub fn from_indices(size: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut set = StateSet::empty(size);
        for i in indices {
            set.insert(i);
        }
        set
    }

    pub fn universe_size(&self) -> usize {
        self.bits.len()
    }

    pub fn contains(&self, state: usize) -> bool {
        self.bits.get(state).copied().unwrap_or(false)
    }

    pub fn insert(&mut self, state: usize) -> bool {
        let was = self.bits[state];
        self.bits[state] = true;
        !was
    }

    pub fn len(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|b| *b)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| i)
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn complement(&self) -> StateSet {
        StateSet {
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    pub fn union(&self, other: &StateSet) -> StateSet {
        StateSet {
            bits: self.bits.iter().zip(&other.bits).map(|(a, b)| *a || *b).collect(),
        }
    }

    pub fn intersection(&self, other: &StateSet) -> StateSet {
        StateSet {
            bits: self.bits.iter().zip(&other.bits).map(|(a, b)| *a && *b).collect(),
        }
    }
}

/// One probability per state. Entries are clamped to `[0, 1]` on
/// construction, which absorbs round-off from the iterative engines.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
#[serde(transparent)]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    pub fn new(mut values: Vec<f64>) -> Self {
        for v in &mut values {
            *v = v.clamp(0.0, 1.0);
        }
        ProbVector(values)
    }

    pub fn get(&self, state: usize) -> f64 {
        self.0[state]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Index<usize> for ProbVector {
    type Output = f64;

    fn index(&self, state: usize) -> &f64 {
        &self.0[state]
    }
}

/// One stored transition. The exact probability is kept next to its float
/// image so the exact engine never has to reconstruct it.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub target: usize,
    pub prob: f64,
    pub exact: BigRational,
}

impl Transition {
    pub fn exact(target: usize, exact: BigRational) -> Self {
        let prob = exact.to_f64().unwrap_or(f64::NAN);
        Transition { target, prob, exact }
    }

    /// Float-specified transition; the exact value is the float's binary value.
    pub fn new(target: usize, prob: f64) -> Self {
        let exact = BigRational::from_float(prob).unwrap_or_default();
        Transition { target, prob, exact }
    }
}

/// A finite discrete-time Markov chain.
#[derive(Debug, Clone)]
pub struct Dtmc {
    space: StateSpace,
    init_state: usize,
    rows: Vec<Vec<Transition>>,
    labels: BTreeMap<String, StateSet>,
    constants: BTreeMap<String, Value>,
}

impl Dtmc {
    /// Assembles a chain without checking it; see [`Dtmc::validate`].
    pub fn new(space: StateSpace, init_state: usize, rows: Vec<Vec<Transition>>) -> Self {
        Dtmc {
            space,
            init_state,
            rows,
            labels: BTreeMap::new(),
            constants: BTreeMap::new(),
        }
    }

    /// Single-variable chain `s : [0..n-1]` from float rows, mostly for tests.
    pub fn from_float_rows(init_state: usize, rows: &[&[(usize, f64)]]) -> Self {
        let n = rows.len().max(1) as i64;
        let space = StateSpace::new(vec![VariableDecl::new("s", 0, n - 1, init_state as i64)
            .expect("init within range")])
        .expect("single variable space");
        let rows = rows
            .iter()
            .map(|row| row.iter().map(|&(t, p)| Transition::new(t, p)).collect())
            .collect();
        Dtmc::new(space, init_state, rows)
    }

    pub fn with_labels(mut self, labels: BTreeMap<String, StateSet>) -> Self {
        self.labels = labels;
        self
    }

    pub fn with_constants(mut self, constants: BTreeMap<String, Value>) -> Self {
        self.constants = constants;
        self
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn num_states(&self) -> usize {
        self.rows.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn init_state(&self) -> usize {
        self.init_state
    }

    pub fn row(&self, state: usize) -> &[Transition] {
        &self.rows[state]
    }

    pub fn rows(&self) -> &[Vec<Transition>] {
        &self.rows
    }

    pub fn labels(&self) -> &BTreeMap<String, StateSet> {
        &self.labels
    }

    pub fn constants(&self) -> &BTreeMap<String, Value> {
        &self.constants
    }

    /// Predecessor lists, one per state.
    pub fn predecessors(&self) -> Vec<Vec<usize>> {
        let mut preds = vec![Vec::new(); self.num_states()];
        for (s, row) in self.rows.iter().enumerate() {
            for t in row {
                if !preds[t.target].contains(&s) {
                    preds[t.target].push(s);
                }
            }
        }
        preds
    }

    /// Checks every structural invariant and reports each violation.
    pub fn validate(&self) -> Result<(), Vec<Diagnostic>> {
        let mut diags = Vec::new();
        let n = self.num_states();
        if n != self.space.size() {
            diags.push(Diagnostic::SizeMismatch {
                rows: n,
                states: self.space.size(),
            });
        }
        if self.init_state >= n {
            diags.push(Diagnostic::BadInitialState(self.init_state));
        }
        for (s, row) in self.rows.iter().enumerate() {
            if row.is_empty() {
                diags.push(Diagnostic::Deadlock(s));
                continue;
            }
            let mut sum = 0.0;
            for t in row {
                if t.target >= n {
                    diags.push(Diagnostic::BadTarget {
                        state: s,
                        target: t.target,
                    });
                }
                if !(t.prob > 0.0 && t.prob <= 1.0) {
                    diags.push(Diagnostic::ProbabilityOutOfRange {
                        state: s,
                        target: t.target,
                        prob: t.prob,
                    });
                }
                sum += t.prob;
            }
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                diags.push(Diagnostic::RowSum { state: s, sum });
            }
        }
        if diags.is_empty() {
            Ok(())
        } else {
            Err(diags)
        }
    }

    /// Evaluation environment for one state.
    pub fn state_env(&self, state: usize) -> StateEnv<'_> {
        StateEnv {
            dtmc: self,
            state,
            values: self.space.index_to_valuation(state),
        }
    }

    /// States whose valuation satisfies `predicate`.
    pub fn satisfaction_set(&self, predicate: &Expr) -> Result<StateSet, EvalError> {
        let mut set = StateSet::empty(self.num_states());
        for s in 0..self.num_states() {
            if expr::eval(predicate, &self.state_env(s))?.as_bool()? {
                set.insert(s);
            }
        }
        Ok(set)
    }

    /// Graphviz rendering: one node per state, one edge per stored transition.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph dtmc {\n    node [shape=circle];\n");
        for s in 0..self.num_states() {
            let mut label = self.space.describe(s);
            for (name, set) in &self.labels {
                if set.contains(s) {
                    label.push_str("\\n");
                    label.push_str(&name.replace('"', "\\\""));
                }
            }
            let extra = if s == self.init_state { ", peripheries=2" } else { "" };
            out.push_str(&format!("    s{s} [label=\"{label}\"{extra}];\n"));
        }
        for (s, row) in self.rows.iter().enumerate() {
            for t in row {
                out.push_str(&format!(
                    "    s{s} -> s{} [label=\"{}\"];\n",
                    t.target,
                    format_significant(t.prob, 6)
                ));
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Rounds to `digits` significant digits and drops trailing zeros.
pub fn format_significant(v: f64, digits: usize) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (digits as i32 - 1 - magnitude).max(0) as usize;
    let s = format!("{v:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub struct StateEnv<'a> {
    dtmc: &'a Dtmc,
    state: usize,
    values: Vec<i64>,
}

impl Env for StateEnv<'_> {
    fn ident(&self, name: &str) -> Option<Value> {
        match self.dtmc.space.variable_index(name) {
            Some(i) => Some(Value::Int(self.values[i])),
            None => self.dtmc.constants.get(name).cloned(),
        }
    }

    fn variable(&self, index: usize) -> Option<Value> {
        self.values.get(index).map(|v| Value::Int(*v))
    }

    fn label(&self, name: &str) -> Option<bool> {
        self.dtmc.labels.get(name).map(|set| set.contains(self.state))
    }
}

/// A violated chain invariant.
#[derive(Debug, Clone, PartialEq)]
pub enum Diagnostic {
    RowSum { state: usize, sum: f64 },
    ProbabilityOutOfRange { state: usize, target: usize, prob: f64 },
    Deadlock(usize),
    BadTarget { state: usize, target: usize },
    BadInitialState(usize),
    SizeMismatch { rows: usize, states: usize },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::RowSum { state, sum } => write!(f, "row sum {sum} at state {state}"),
            Diagnostic::ProbabilityOutOfRange {
                state,
                target,
                prob,
            } => write!(
                f,
                "probability out of range: {prob} on transition {state} -> {target}"
            ),
            Diagnostic::Deadlock(s) => write!(f, "deadlock: no outgoing transition at state {s}"),
            Diagnostic::BadTarget { state, target } => {
                write!(f, "transition {state} -> {target} leaves the state space")
            }
            Diagnostic::BadInitialState(s) => write!(f, "initial state {s} is not a state"),
            Diagnostic::SizeMismatch { rows, states } => {
                write!(f, "{rows} rows for a space of {states} states")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn two_vars() -> StateSpace {
        StateSpace::new(vec![
            VariableDecl::new("a", 0, 1, 0).unwrap(),
            VariableDecl::new("b", 0, 2, 0).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn single_variable_index_is_offset() {
        let space = StateSpace::new(vec![VariableDecl::new("s", 0, 13, 0).unwrap()]).unwrap();
        let v = |s| HashMap::from([("s".to_string(), s)]);
        assert_eq!(space.valuation_to_index(&v(0)), Ok(0));
        assert_eq!(space.valuation_to_index(&v(13)), Ok(13));
        assert!(matches!(
            space.valuation_to_index(&v(14)),
            Err(ModelError::OutOfRange { .. })
        ));
        let bad = HashMap::from([("t".to_string(), 0)]);
        assert_eq!(
            space.valuation_to_index(&bad),
            Err(ModelError::UnknownVariable("t".into()))
        );
    }

    #[test]
    fn first_variable_varies_slowest() {
        let space = two_vars();
        // Enumerate valuations in documented order: a slow, b fast.
        let mut expected = Vec::new();
        for a in 0..=1 {
            for b in 0..=2 {
                expected.push(vec![a, b]);
            }
        }
        for (i, vals) in expected.iter().enumerate() {
            assert_eq!(space.index_to_valuation(i), *vals);
        }
        let m = HashMap::from([("a".to_string(), 1), ("b".to_string(), 2)]);
        assert_eq!(space.valuation_to_index(&m), Ok(5));
    }

    #[test]
    fn variable_decl_invariants() {
        assert!(matches!(VariableDecl::new("x", 0, 3, 4), Err(ModelError::InitOutOfRange { .. })));
        assert!(matches!(VariableDecl::new("x", 2, 1, 2), Err(ModelError::EmptyRange { .. })));
        assert!(VariableDecl::new("x", 0, 0, 0).is_ok());
    }

    #[test]
    fn validate_reports_bad_rows() {
        let d = Dtmc::from_float_rows(0, &[&[(0, 0.5), (1, 0.4)], &[(1, 1.0)]]);
        let diags = d.validate().unwrap_err();
        assert_eq!(diags.len(), 1);
        assert!(diags[0].to_string().starts_with("row sum 0.9 at state 0"));

        let d = Dtmc::from_float_rows(0, &[&[(0, 1.2)], &[(1, 1.0)]]);
        let diags = d.validate().unwrap_err();
        assert!(diags.iter().any(|d| d.to_string().starts_with("probability out of range")));

        let d = Dtmc::from_float_rows(0, &[&[(1, 1.0)], &[]]);
        assert_eq!(d.validate().unwrap_err(), vec![Diagnostic::Deadlock(1)]);
    }

    #[test]
    fn dot_for_single_self_loop() {
        let d = Dtmc::from_float_rows(0, &[&[(0, 1.0)]]);
        let dot = d.to_dot();
        assert!(dot.starts_with("digraph"));
        assert_eq!(dot.matches("->").count(), 1);
        assert!(dot.contains("s0 -> s0 [label=\"1\"]"));
    }

    #[test]
    fn significant_digits() {
        assert_eq!(format_significant(0.65, 6), "0.65");
        assert_eq!(format_significant(1.0, 6), "1");
        assert_eq!(format_significant(1.0 / 3.0, 6), "0.333333");
        assert_eq!(format_significant(0.1 + 0.2, 6), "0.3");
    }

    proptest! {
        #[test]
        fn index_round_trip(lows in prop::collection::vec(-3i64..3, 1..4),
                            widths in prop::collection::vec(1i64..5, 1..4)) {
            let vars: Vec<_> = lows.iter().zip(&widths).enumerate()
                .map(|(i, (l, w))| VariableDecl::new(format!("v{i}"), *l, l + w - 1, *l).unwrap())
                .collect();
            let space = StateSpace::new(vars).unwrap();
            for i in 0..space.size() {
                prop_assert_eq!(space.index_of(&space.index_to_valuation(i)).unwrap(), i);
            }
        }

        #[test]
        fn validate_matches_row_sums(p in 0.01f64..0.99, q in 0.01f64..0.99) {
            let d = Dtmc::from_float_rows(0, &[&[(0, p), (1, q)], &[(1, 1.0)]]);
            prop_assert_eq!(d.validate().is_ok(), ((p + q) - 1.0).abs() <= ROW_SUM_TOLERANCE);
        }
    }
}
