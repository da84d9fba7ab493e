use std::collections::VecDeque;

use crate::model::{Dtmc, StateSet};

/// Partition of the state space by qualitative reachability of a goal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QualitativeSets {
    pub prob0: StateSet,
    pub prob1: StateSet,
    pub unknown: StateSet,
}

/// Backward closure of `seeds`, expanding only through states `may_expand`
/// accepts.
fn backward_closure(
    preds: &[Vec<usize>],
    seeds: &StateSet,
    may_expand: impl Fn(usize) -> bool,
) -> StateSet {
    let mut seen = seeds.clone();
    let mut queue: VecDeque<usize> = seeds.iter().collect();
    while let Some(s) = queue.pop_front() {
        for &p in &preds[s] {
            if may_expand(p) && seen.insert(p) {
                queue.push_back(p);
            }
        }
    }
    seen
}

/// States from which `goal` is unreachable.
pub fn prob0(dtmc: &Dtmc, goal: &StateSet) -> StateSet {
    let preds = dtmc.predecessors();
    backward_closure(&preds, goal, |_| true).complement()
}

/// States from which `goal` is reached with probability one: those that
/// cannot reach a probability-zero state without first passing the goal.
pub fn prob1(dtmc: &Dtmc, goal: &StateSet) -> StateSet {
    let preds = dtmc.predecessors();
    prob1_with(&preds, goal, &backward_closure(&preds, goal, |_| true).complement())
}

fn prob1_with(preds: &[Vec<usize>], goal: &StateSet, prob0: &StateSet) -> StateSet {
    backward_closure(preds, prob0, |s| !goal.contains(s)).complement()
}

pub fn qualitative_sets(dtmc: &Dtmc, goal: &StateSet) -> QualitativeSets {
    let preds = dtmc.predecessors();
    let prob0 = backward_closure(&preds, goal, |_| true).complement();
    let prob1 = prob1_with(&preds, goal, &prob0);
    let unknown = prob0.union(&prob1).complement();
    QualitativeSets {
        prob0,
        prob1,
        unknown,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// 0 -> {1, 2}, 1 -> 1, 2 -> 2
    fn fork() -> Dtmc {
        Dtmc::from_float_rows(0, &[&[(1, 0.5), (2, 0.5)], &[(1, 1.0)], &[(2, 1.0)]])
    }

    #[test]
    fn fork_partition() {
        let d = fork();
        let goal = StateSet::from_indices(3, [1]);
        let q = qualitative_sets(&d, &goal);
        assert_eq!(q.prob0.to_vec(), vec![2]);
        assert_eq!(q.prob1.to_vec(), vec![1]);
        assert_eq!(q.unknown.to_vec(), vec![0]);
        assert_eq!(prob0(&d, &goal), q.prob0);
        assert_eq!(prob1(&d, &goal), q.prob1);
    }

    #[test]
    fn empty_and_full_goals() {
        let d = fork();
        let none = StateSet::empty(3);
        assert_eq!(prob1(&d, &none), StateSet::empty(3));
        assert_eq!(prob0(&d, &none), StateSet::full(3));
        let all = StateSet::full(3);
        assert!(prob0(&d, &all).is_empty());
        assert_eq!(prob1(&d, &all), all);
    }
}
