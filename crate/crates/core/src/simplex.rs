//! Dense phase-1 simplex for tiny equality systems.
//!
//! The feasibility probes solve `A w = b`, `w >= 0` with at most ~15 rows
//! and a few dozen columns, so a dense tableau with Bland's anti-cycling
//! rule is the whole story: deterministic, dependency-free, and exact
//! enough that the phase-1 objective of a feasible system lands at
//! rounding level.

/// Outcome of a phase-1 run.
#[derive(Debug, Clone)]
pub struct Phase1 {
    /// Primal values for the structural variables (length = columns of `a`).
    pub x: Vec<f64>,
    /// Residual infeasibility `min sum(artificials)`; ~0 iff feasible.
    pub objective: f64,
    pub iterations: usize,
}

const PIVOT_TOL: f64 = 1e-11;

/// Minimizes the sum of artificial variables for `A x = b`, `x >= 0`.
///
/// Rows with negative right-hand side are negated first, so `b` may have
/// any signs. Entering and leaving variables follow Bland's rule.
#[allow(clippy::needless_range_loop)]
pub fn phase1(a: &[Vec<f64>], b: &[f64]) -> Phase1 {
    let m = a.len();
    let n = if m == 0 { 0 } else { a[0].len() };
    // Tableau rows: [A | I | b], basis starts at the artificials.
    let mut t: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
            let mut row: Vec<f64> = a[i].iter().map(|&v| sign * v).collect();
            row.extend((0..m).map(|j| if j == i { 1.0 } else { 0.0 }));
            row.push(sign * b[i]);
            row
        })
        .collect();
    let mut basis: Vec<usize> = (n..n + m).collect();
    let cost = |j: usize| if j >= n { 1.0 } else { 0.0 };

    let mut iterations = 0usize;
    let max_iterations = 50_000;
    while iterations < max_iterations {
        iterations += 1;
        // Reduced costs r_j = c_j - c_B . T[:, j]; Bland: smallest index
        // with r_j < -tol enters.
        let mut entering = None;
        for j in 0..n + m {
            if basis.contains(&j) {
                continue;
            }
            let mut r = cost(j);
            for i in 0..m {
                r -= cost(basis[i]) * t[i][j];
            }
            if r < -PIVOT_TOL {
                entering = Some(j);
                break;
            }
        }
        let Some(j) = entering else { break };
        // Ratio test; ties resolved by the smallest basic variable index.
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            if t[i][j] > PIVOT_TOL {
                let ratio = t[i][n + m] / t[i][j];
                match leave {
                    None => leave = Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < lr - 1e-15
                            || ((ratio - lr).abs() <= 1e-15 && basis[i] < basis[li])
                        {
                            leave = Some((i, ratio));
                        }
                    }
                }
            }
        }
        let Some((piv, _)) = leave else {
            break; // unbounded direction cannot happen in phase 1
        };
        // Pivot.
        let p = t[piv][j];
        for v in t[piv].iter_mut() {
            *v /= p;
        }
        for i in 0..m {
            if i != piv {
                let f = t[i][j];
                if f != 0.0 {
                    for c in 0..n + m + 1 {
                        t[i][c] -= f * t[piv][c];
                    }
                }
            }
        }
        basis[piv] = j;
    }

    let mut x = vec![0.0; n];
    let mut objective = 0.0;
    for i in 0..m {
        let v = t[i][n + m];
        if basis[i] < n {
            x[basis[i]] = v.max(0.0);
        } else {
            objective += v;
        }
    }
    Phase1 {
        x,
        objective,
        iterations,
    }
}
