//! Root finding: monotone bisection and a damped 2-D Newton.

use crate::error::Error;

/// Result of a bisection run.
#[derive(Debug, Clone, Copy)]
pub struct Bisection {
    pub root: f64,
    pub bracket: (f64, f64),
    pub iterations: u32,
}

/// Bisection for a strictly decreasing `f` with a root in `(0, hi)`.
///
/// The initial bracket is `[lo0, hi]`; if `f(lo0) < 0` the lower edge is
/// pushed toward zero geometrically. Bracket establishment and the
/// subsequent bisection share a budget of `max_iter` steps.
pub fn bisect_decreasing<F: Fn(f64) -> f64>(
    f: F,
    lo0: f64,
    hi: f64,
    max_iter: u32,
) -> Result<Bisection, Error> {
    let mut iterations = 0u32;
    let f_hi = f(hi);
    if f_hi > 0.0 {
        return Err(Error::NonConvergence(format!(
            "no sign change: f({hi:.6e}) = {f_hi:.3e} > 0"
        )));
    }
    let mut lo = lo0;
    let mut f_lo = f(lo);
    while f_lo <= 0.0 {
        iterations += 1;
        if iterations >= max_iter || lo < f64::MIN_POSITIVE * 1e6 {
            return Err(Error::NonConvergence(format!(
                "bracket not established after {iterations} expansions (lo = {lo:.3e})"
            )));
        }
        lo *= 0.1;
        f_lo = f(lo);
    }
    let mut hi = hi;
    while iterations < max_iter {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // bracket at floating-point resolution
        }
        let fm = f(mid);
        if fm > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Ok(Bisection {
        root: 0.5 * (lo + hi),
        bracket: (lo, hi),
        iterations,
    })
}

/// Damped Newton for a 2-D system with a finite-difference Jacobian.
///
/// `scale` sets the finite-difference steps per coordinate. Steps are
/// halved until the residual norm decreases; failure to improve within
/// the damping budget aborts the iteration.
pub fn newton2<F: Fn([f64; 2]) -> [f64; 2]>(
    f: F,
    x0: [f64; 2],
    scale: [f64; 2],
    tol: f64,
    max_iter: u32,
) -> Result<[f64; 2], Error> {
    let norm = |r: [f64; 2]| r[0].abs().max(r[1].abs());
    let mut x = x0;
    let mut r = f(x);
    for _ in 0..max_iter {
        if norm(r) <= tol {
            return Ok(x);
        }
        let h0 = 1e-7 * scale[0].abs().max(1e-12);
        let h1 = 1e-7 * scale[1].abs().max(1e-12);
        let r0p = f([x[0] + h0, x[1]]);
        let r0m = f([x[0] - h0, x[1]]);
        let r1p = f([x[0], x[1] + h1]);
        let r1m = f([x[0], x[1] - h1]);
        let j = [
            [
                (r0p[0] - r0m[0]) / (2.0 * h0),
                (r1p[0] - r1m[0]) / (2.0 * h1),
            ],
            [
                (r0p[1] - r0m[1]) / (2.0 * h0),
                (r1p[1] - r1m[1]) / (2.0 * h1),
            ],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.abs() < 1e-300 || !det.is_finite() {
            return Err(Error::NewtonDivergence("singular Jacobian".into()));
        }
        let dx = [
            -(j[1][1] * r[0] - j[0][1] * r[1]) / det,
            -(-j[1][0] * r[0] + j[0][0] * r[1]) / det,
        ];
        let mut lambda = 1.0;
        let mut improved = false;
        for _ in 0..40 {
            let cand = [x[0] + lambda * dx[0], x[1] + lambda * dx[1]];
            let rc = f(cand);
            if rc[0].is_finite() && rc[1].is_finite() && norm(rc) < norm(r) {
                x = cand;
                r = rc;
                improved = true;
                break;
            }
            lambda *= 0.5;
        }
        if !improved {
            return Err(Error::NewtonDivergence(format!(
                "no descent from residual {:.3e}",
                norm(r)
            )));
        }
    }
    if norm(r) <= tol {
        Ok(x)
    } else {
        Err(Error::NewtonDivergence(format!(
            "residual {:.3e} above target {tol:.1e}",
            norm(r)
        )))
    }
}

/// Golden-section minimization of a unimodal `f` on `[a, b]`.
///
/// Falls back gracefully on monotone functions (converges to an
/// endpoint). Returns `(argmin, min)`.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut a = a;
    let mut b = b;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a) > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisection_finds_decreasing_root() {
        let r = bisect_decreasing(|x| 2.0 - x * x, 1e-8, 10.0, 200).unwrap();
        assert!((r.root - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn bisection_expands_bracket_toward_zero() {
        // Root at 1e-6; initial lower edge far above it.
        let r = bisect_decreasing(|x| 1e-6 - x, 1e-2, 10.0, 200).unwrap();
        assert!((r.root - 1e-6).abs() < 1e-18);
    }

    #[test]
    fn bisection_reports_missing_bracket() {
        assert!(matches!(
            bisect_decreasing(|_| 1.0, 1e-8, 1.0, 200),
            Err(Error::NonConvergence(_))
        ));
    }

    #[test]
    fn newton_solves_coupled_system() {
        // x^2 + y = 3, x + y^2 = 5 near (1, 2).
        let f = |v: [f64; 2]| [v[0] * v[0] + v[1] - 3.0, v[0] + v[1] * v[1] - 5.0];
        let sol = newton2(f, [1.2, 1.7], [1.0, 1.0], 1e-12, 60).unwrap();
        let r = f(sol);
        assert!(r[0].abs() < 1e-12 && r[1].abs() < 1e-12);
    }

    #[test]
    fn golden_section_minimizes_parabola() {
        let (x, _) = golden_section(|x| (x - 0.3) * (x - 0.3), 0.0, 1.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-9);
    }
}
