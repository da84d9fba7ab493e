//! Rational Gaussian elimination on the stored exact probabilities.

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::model::Dtmc;

use super::{LinearSystem, QualitativeSets};

/// Solves `(I - A)·x = b` over the unknown states exactly and returns the
/// full per-state vector.
pub(super) fn solve(dtmc: &Dtmc, sets: &QualitativeSets, system: &LinearSystem) -> Vec<BigRational> {
    let n = system.states.len();
    let mut local = vec![usize::MAX; dtmc.num_states()];
    for (i, &s) in system.states.iter().enumerate() {
        local[s] = i;
    }

    // Augmented matrix [I - A | b].
    let mut m = vec![vec![BigRational::zero(); n + 1]; n];
    for (i, &s) in system.states.iter().enumerate() {
        m[i][i] = BigRational::one();
        for t in dtmc.row(s) {
            if sets.prob1.contains(t.target) {
                m[i][n] += &t.exact;
            } else if sets.unknown.contains(t.target) {
                m[i][local[t.target]] -= &t.exact;
            }
        }
    }

    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !m[r][col].is_zero())
            .expect("reachability system is non-singular after prob0/prob1 restriction");
        m.swap(col, pivot);
        let inv = m[col][col].recip();
        for v in m[col][col..].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = m[col].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r == col || row[col].is_zero() {
                continue;
            }
            let factor = row[col].clone();
            for (v, p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                *v -= &factor * p;
            }
        }
    }

    let mut out = vec![BigRational::zero(); dtmc.num_states()];
    for s in sets.prob1.iter() {
        out[s] = BigRational::one();
    }
    for (i, &s) in system.states.iter().enumerate() {
        out[s] = m[i][n].clone();
    }
    out
}
