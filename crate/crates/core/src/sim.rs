//! Monte Carlo path sampling and statistical reachability estimates.
//!
//! Replication `i` of a run seeded with `seed` draws from ChaCha8 stream `i`
//! of key `seed`, so results do not depend on how replications are scheduled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::model::{Dtmc, StateSet};

pub const DEFAULT_MAX_STEPS: u64 = 10_000;

/// Two-sided 95% standard normal quantile.
const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    GoalHit,
    StepLimit,
}

enum Outcome {
    Hit,
    /// Stuck in a non-goal state whose only transition is a self-loop.
    Absorbed,
    Limit,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    pub states: Vec<usize>,
    pub terminated_by: Termination,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ReachEstimate {
    pub hits: u64,
    pub samples: u64,
    /// Paths cut off by the step limit; they count as misses.
    pub censored: u64,
    pub estimate: f64,
    pub low: f64,
    pub high: f64,
    pub seed: u64,
}

/// Generator for replication `replication` of a run seeded with `seed`.
pub fn replication_rng(seed: u64, replication: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replication);
    rng
}

fn step(dtmc: &Dtmc, state: usize, rng: &mut impl Rng) -> usize {
    let row = dtmc.row(state);
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for t in row {
        acc += t.prob;
        if u < acc {
            return t.target;
        }
    }
    row.last().map_or(state, |t| t.target)
}

fn is_absorbing(dtmc: &Dtmc, state: usize) -> bool {
    matches!(dtmc.row(state), [t] if t.target == state)
}

fn walk(
    dtmc: &Dtmc,
    start: usize,
    max_steps: u64,
    stop: &StateSet,
    stop_when_absorbed: bool,
    rng: &mut impl Rng,
    mut visit: impl FnMut(usize),
) -> Outcome {
    let mut state = start;
    visit(state);
    if stop.contains(state) {
        return Outcome::Hit;
    }
    for _ in 0..max_steps {
        if stop_when_absorbed && is_absorbing(dtmc, state) {
            return Outcome::Absorbed;
        }
        state = step(dtmc, state, rng);
        visit(state);
        if stop.contains(state) {
            return Outcome::Hit;
        }
    }
    Outcome::Limit
}

/// Samples one path from `start`, stopping on entering `stop` or after
/// `max_steps` transitions.
pub fn sample_path(dtmc: &Dtmc, start: usize, seed: u64, max_steps: u64, stop: &StateSet) -> Path {
    let mut rng = replication_rng(seed, 0);
    let mut states = Vec::new();
    let terminated_by = match walk(dtmc, start, max_steps, stop, false, &mut rng, |s| states.push(s)) {
        Outcome::Hit => Termination::GoalHit,
        Outcome::Absorbed | Outcome::Limit => Termination::StepLimit,
    };
    Path {
        states,
        terminated_by,
    }
}

/// Wilson score interval at 95% for `hits` successes out of `samples`.
pub fn wilson_interval(hits: u64, samples: u64) -> (f64, f64) {
    if samples == 0 {
        return (0.0, 1.0);
    }
    let n = samples as f64;
    let p = hits as f64 / n;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z_95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let low = if hits == 0 { 0.0 } else { (center - half).clamp(0.0, p) };
    let high = if hits == samples { 1.0 } else { (center + half).clamp(p, 1.0) };
    (low, high)
}

/// Estimates the probability of reaching `goal` from `start` by `samples`
/// independent replications.
pub fn estimate_reach(
    dtmc: &Dtmc,
    goal: &StateSet,
    start: usize,
    samples: u64,
    max_steps: u64,
    seed: u64,
) -> ReachEstimate {
    let (hits, censored) = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = replication_rng(seed, i);
            match walk(dtmc, start, max_steps, goal, true, &mut rng, |_| {}) {
                Outcome::Hit => (1u64, 0u64),
                Outcome::Absorbed => (0, 0),
                Outcome::Limit => (0, 1),
            }
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let (low, high) = wilson_interval(hits, samples);
    ReachEstimate {
        hits,
        samples,
        censored,
        estimate: if samples == 0 { 0.0 } else { hits as f64 / samples as f64 },
        low,
        high,
        seed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coin() -> Dtmc {
        Dtmc::from_float_rows(0, &[&[(1, 0.5), (2, 0.5)], &[(1, 1.0)], &[(2, 1.0)]])
    }

    #[test]
    fn wilson_bounds() {
        let (lo, hi) = wilson_interval(50, 100);
        assert!(lo < 0.5 && 0.5 < hi);
        assert!((lo - 0.4038).abs() < 1e-3 && (hi - 0.5962).abs() < 1e-3);
        assert_eq!(wilson_interval(10, 10).1, 1.0);
        assert_eq!(wilson_interval(0, 10).0, 0.0);
        assert!(wilson_interval(10, 10).0 < 1.0);
    }

    #[test]
    fn paths_follow_transitions() {
        let d = coin();
        let stop = StateSet::empty(3);
        let p = sample_path(&d, 0, 7, 5, &stop);
        assert_eq!(p.states.len(), 6);
        assert_eq!(p.terminated_by, Termination::StepLimit);
        for w in p.states.windows(2) {
            assert!(d.row(w[0]).iter().any(|t| t.target == w[1]));
        }
    }

    #[test]
    fn start_in_goal_is_an_immediate_hit() {
        let d = coin();
        let goal = StateSet::from_indices(3, [0]);
        let p = sample_path(&d, 0, 1, 100, &goal);
        assert_eq!(p.states, vec![0]);
        assert_eq!(p.terminated_by, Termination::GoalHit);
        let e = estimate_reach(&d, &goal, 0, 100, 10, 3);
        assert_eq!(e.estimate, 1.0);
    }

    #[test]
    fn censoring_is_counted() {
        let d = Dtmc::from_float_rows(0, &[&[(0, 0.9), (1, 0.1)], &[(1, 1.0)]]);
        let goal = StateSet::from_indices(2, [1]);
        let e = estimate_reach(&d, &goal, 0, 1000, 5, 11);
        assert_eq!(e.hits + e.censored, 1000);
        assert!(e.censored > 400);
        assert!(e.low <= e.estimate && e.estimate <= e.high);
    }

    #[test]
    fn absorbed_misses_are_not_censored() {
        let d = coin();
        let goal = StateSet::from_indices(3, [1]);
        let p = sample_path(&d, 2, 0, 3, &goal);
        assert_eq!(p.states, vec![2, 2, 2, 2]);
        let e = estimate_reach(&d, &goal, 0, 2000, 100, 5);
        assert_eq!(e.censored, 0);
    }

    #[test]
    fn deterministic_given_seed() {
        let d = coin();
        let goal = StateSet::from_indices(3, [1]);
        let a = estimate_reach(&d, &goal, 0, 5000, 10, 42);
        let b = estimate_reach(&d, &goal, 0, 5000, 10, 42);
        assert_eq!(a, b);
    }
}
