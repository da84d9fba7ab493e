//! Power (value) iteration, Jacobi and Gauss-Seidel for `x = A·x + b`.

use super::{Convergence, EngineError, LinearSystem, Method, SolveOptions};

fn change(old: f64, new: f64, mode: Convergence) -> f64 {
    let d = (new - old).abs();
    match mode {
        Convergence::Absolute => d,
        Convergence::Relative if new != 0.0 => d / new.abs(),
        Convergence::Relative => d,
    }
}

/// Returns the solution over the unknowns, the iteration count and the last
/// max-norm step difference.
pub(super) fn solve(
    system: &LinearSystem,
    method: Method,
    options: &SolveOptions,
) -> Result<(Vec<f64>, u64, f64), EngineError> {
    let n = system.states.len();
    let mut x = vec![0.0; n];
    if n == 0 {
        return Ok((x, 0, 0.0));
    }
    let diag: Vec<f64> = system
        .rows
        .iter()
        .enumerate()
        .map(|(i, row)| row.iter().filter(|(j, _)| *j == i).map(|(_, p)| p).sum())
        .collect();
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for iteration in 1..=options.max_iterations {
        residual = 0.0;
        match method {
            Method::Power => {
                for i in 0..n {
                    let v = system.rhs[i] + system.rows[i].iter().map(|&(j, p)| p * x[j]).sum::<f64>();
                    residual = residual.max(change(x[i], v, options.convergence));
                    next[i] = v;
                }
                std::mem::swap(&mut x, &mut next);
            }
            Method::Jacobi => {
                for i in 0..n {
                    let off: f64 = system.rows[i]
                        .iter()
                        .filter(|(j, _)| *j != i)
                        .map(|&(j, p)| p * x[j])
                        .sum();
                    let v = (system.rhs[i] + off) / (1.0 - diag[i]);
                    residual = residual.max(change(x[i], v, options.convergence));
                    next[i] = v;
                }
                std::mem::swap(&mut x, &mut next);
            }
            Method::GaussSeidel => {
                for i in 0..n {
                    let off: f64 = system.rows[i]
                        .iter()
                        .filter(|(j, _)| *j != i)
                        .map(|&(j, p)| p * x[j])
                        .sum();
                    let v = (system.rhs[i] + off) / (1.0 - diag[i]);
                    residual = residual.max(change(x[i], v, options.convergence));
                    x[i] = v;
                }
            }
            Method::Exact => unreachable!("exact method is not iterative"),
        }
        if residual < options.epsilon {
            return Ok((x, iteration, residual));
        }
    }
    Err(EngineError::NotConverged {
        method,
        iterations: options.max_iterations,
        residual,
    })
}
