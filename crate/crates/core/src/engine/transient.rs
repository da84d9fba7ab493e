//! Step-bounded reachability and n-step state distributions.

use crate::model::{Dtmc, ProbVector, StateSet};

/// One backward step over the goal-absorbing chain.
fn backward_step(dtmc: &Dtmc, goal: &StateSet, x: &[f64], out: &mut [f64]) {
    for (s, slot) in out.iter_mut().enumerate() {
        *slot = if goal.contains(s) {
            1.0
        } else {
            dtmc.row(s).iter().map(|t| t.prob * x[t.target]).sum()
        };
    }
}

fn indicator(goal: &StateSet, n: usize) -> Vec<f64> {
    (0..n).map(|s| if goal.contains(s) { 1.0 } else { 0.0 }).collect()
}

/// Probability of reaching `goal` within `k` steps, from every state.
pub fn bounded_reach_probabilities(dtmc: &Dtmc, goal: &StateSet, k: u64) -> ProbVector {
    let n = dtmc.num_states();
    let mut x = indicator(goal, n);
    let mut next = vec![0.0; n];
    for _ in 0..k {
        backward_step(dtmc, goal, &x, &mut next);
        std::mem::swap(&mut x, &mut next);
    }
    ProbVector::new(x)
}

/// `(k, P(reach goal within k steps from from_state))` for `k = 0..=k_max`.
pub fn curve(dtmc: &Dtmc, goal: &StateSet, from_state: usize, k_max: u64) -> Vec<(u64, f64)> {
    let n = dtmc.num_states();
    let mut x = indicator(goal, n);
    let mut next = vec![0.0; n];
    let mut out = Vec::with_capacity(k_max as usize + 1);
    out.push((0, x[from_state]));
    for k in 1..=k_max {
        backward_step(dtmc, goal, &x, &mut next);
        std::mem::swap(&mut x, &mut next);
        out.push((k, x[from_state].clamp(0.0, 1.0)));
    }
    out
}

/// Pushes a distribution `steps` transitions forward (`π ← π·P`).
pub fn push_distribution(dtmc: &Dtmc, dist: &[f64], steps: u64) -> ProbVector {
    let n = dtmc.num_states();
    let mut pi = dist.to_vec();
    let mut next = vec![0.0; n];
    for _ in 0..steps {
        next.iter_mut().for_each(|v| *v = 0.0);
        for (s, &mass) in pi.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            for t in dtmc.row(s) {
                next[t.target] += mass * t.prob;
            }
        }
        std::mem::swap(&mut pi, &mut next);
    }
    ProbVector::new(pi)
}

/// Distribution over states after exactly `n` steps from the initial state.
pub fn transient_distribution(dtmc: &Dtmc, n: u64) -> ProbVector {
    let mut point = vec![0.0; dtmc.num_states()];
    point[dtmc.init_state()] = 1.0;
    push_distribution(dtmc, &point, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_steps() {
        let d = Dtmc::from_float_rows(1, &[&[(0, 1.0)], &[(0, 0.5), (1, 0.5)]]);
        assert_eq!(transient_distribution(&d, 0).as_slice(), &[0.0, 1.0]);
        let goal = StateSet::from_indices(2, [0]);
        assert_eq!(bounded_reach_probabilities(&d, &goal, 0).as_slice(), &[1.0, 0.0]);
        assert_eq!(curve(&d, &goal, 1, 0), vec![(0, 0.0)]);
    }

    #[test]
    fn geometric_first_hit() {
        // From 1, each step hits 0 with probability 1/2.
        let d = Dtmc::from_float_rows(1, &[&[(0, 1.0)], &[(0, 0.5), (1, 0.5)]]);
        let goal = StateSet::from_indices(2, [0]);
        let c = curve(&d, &goal, 1, 3);
        assert_eq!(c, vec![(0, 0.0), (1, 0.5), (2, 0.75), (3, 0.875)]);
    }

    #[test]
    fn goal_absorption_prevents_double_counting() {
        // 0 <-> 1 alternation; reaching 1 within k steps from 0 is 1 for k >= 1.
        let d = Dtmc::from_float_rows(0, &[&[(1, 1.0)], &[(0, 1.0)]]);
        let goal = StateSet::from_indices(2, [1]);
        for k in 1..6 {
            assert_eq!(bounded_reach_probabilities(&d, &goal, k)[0], 1.0);
        }
    }
}
