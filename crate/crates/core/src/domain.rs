//! Capped-domain variant: mean constraints plus a hard upper bound
//! `vbar_K` on each bundle value instead of a dispersion moment.
//!
//! The worst case keeps the same curve-with-atom shape with `beta_K`
//! replaced by the cap, and the single remaining unknown per bundle
//! solves `alpha (1 + ln(vbar/alpha)) = m`. The optimal price density
//! is log-uniform, `g(p) = 1/(ln(vbar/alpha) p)` on `[alpha, vbar]`,
//! which makes the payment exactly linear in the bundle total on the
//! support (the moment variant is strictly concave there).

use serde::{Deserialize, Serialize};

use crate::curve::CurveDistribution;
use crate::error::Error;
use crate::roots::bisect_decreasing;
use crate::Result;

/// One bundle of the capped-domain problem.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DomainBundleSpec {
    pub items: Vec<usize>,
    pub cap: f64,
}

/// Mean vector plus per-bundle value caps.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DomainProblem {
    pub means: Vec<f64>,
    pub bundles: Vec<DomainBundleSpec>,
}

impl DomainProblem {
    pub fn n(&self) -> usize {
        self.means.len()
    }

    pub fn partition(&self) -> Vec<Vec<usize>> {
        self.bundles.iter().map(|b| b.items.clone()).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if n == 0 {
            return Err(Error::InvalidProblem("no items".into()));
        }
        for (i, &m) in self.means.iter().enumerate() {
            if !(m.is_finite() && m > 0.0) {
                return Err(Error::InvalidProblem(format!(
                    "means[{i}] must be > 0, got {m}"
                )));
            }
        }
        let mut seen = vec![false; n];
        for (k, b) in self.bundles.iter().enumerate() {
            if b.items.is_empty() {
                return Err(Error::InvalidProblem(format!("bundle {k} is empty")));
            }
            for &i in &b.items {
                if i >= n || seen[i] {
                    return Err(Error::InvalidProblem(format!(
                        "bundle {k}: item {i} out of range or duplicated"
                    )));
                }
                seen[i] = true;
            }
            let m_k: f64 = b.items.iter().map(|&i| self.means[i]).sum();
            if !(b.cap.is_finite() && b.cap > m_k) {
                return Err(Error::InvalidProblem(format!(
                    "bundles[{k}].cap must exceed the bundle mean {m_k}, got {}",
                    b.cap
                )));
            }
        }
        if let Some(i) = seen.iter().position(|&s| !s) {
            return Err(Error::InvalidProblem(format!(
                "item {i} is not covered by the partition"
            )));
        }
        Ok(())
    }
}

/// Solved capped-domain instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DomainSolution {
    pub partition: Vec<Vec<usize>>,
    pub alphas: Vec<f64>,
    pub caps: Vec<f64>,
    pub means: Vec<f64>,
    pub bundle_means: Vec<f64>,
    pub item_shares: Vec<f64>,
    pub guarantee: f64,
}

impl DomainSolution {
    pub fn n(&self) -> usize {
        self.means.len()
    }

    pub fn bundle_of_item(&self) -> Vec<usize> {
        let mut owner = vec![0usize; self.n()];
        for (k, items) in self.partition.iter().enumerate() {
            for &i in items {
                owner[i] = k;
            }
        }
        owner
    }
}

const DOMAIN_ROOT_TOL: f64 = 1e-12;

/// Root of `alpha (1 + ln(vbar/alpha)) = m` in `(0, m)`; the map is
/// strictly increasing there, so bisection on its negation converges
/// globally. Residual target 1e-12.
pub fn solve_cap_alpha(m: f64, vbar: f64) -> Result<f64> {
    let res = bisect_decreasing(
        |a| m - a * (1.0 + (vbar / a).ln()),
        m * 1e-8,
        m * (1.0 - 1e-12),
        200,
    )?;
    let alpha = res.root;
    let residual = alpha * (1.0 + (vbar / alpha).ln()) - m;
    if residual.abs() > DOMAIN_ROOT_TOL * m.max(1.0) {
        return Err(Error::NonConvergence(format!(
            "cap-equation residual {residual:.3e}"
        )));
    }
    Ok(alpha)
}

/// Solves every bundle of a capped-domain problem.
pub fn solve_domain(problem: &DomainProblem) -> Result<DomainSolution> {
    problem.validate()?;
    let n = problem.n();
    let mut alphas = Vec::new();
    let mut caps = Vec::new();
    let mut bundle_means = Vec::new();
    let mut item_shares = vec![0.0; n];
    for b in &problem.bundles {
        let m_k: f64 = b.items.iter().map(|&i| problem.means[i]).sum();
        alphas.push(solve_cap_alpha(m_k, b.cap)?);
        caps.push(b.cap);
        bundle_means.push(m_k);
        for &i in &b.items {
            item_shares[i] = problem.means[i] / m_k;
        }
    }
    let guarantee = alphas.iter().sum();
    Ok(DomainSolution {
        partition: problem.partition(),
        alphas,
        caps,
        means: problem.means.clone(),
        bundle_means,
        item_shares,
        guarantee,
    })
}

impl CurveDistribution {
    /// Worst case of the capped-domain variant: same curve shape with the
    /// cap as upper bound.
    pub fn from_domain(sol: &DomainSolution) -> Self {
        let bounds: Vec<(f64, f64)> = sol
            .alphas
            .iter()
            .zip(&sol.caps)
            .map(|(&a, &c)| (a, c))
            .collect();
        CurveDistribution::from_parts(sol.partition.clone(), &bounds, sol.item_shares.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cap_equation_back_substitutes() {
        let alpha = solve_cap_alpha(0.6, 1.0).unwrap();
        assert!((alpha * (1.0 + (1.0 / alpha).ln()) - 0.6).abs() <= 1e-12);
        assert!(alpha > 0.0 && alpha < 0.6);
    }

    #[test]
    fn tight_cap_forces_alpha_to_the_mean() {
        // The gap closes like sqrt(cap/m - 1).
        let alpha = solve_cap_alpha(0.6, 0.6 + 1e-9).unwrap();
        assert!((alpha - 0.6).abs() < 1e-4);
        let tighter = solve_cap_alpha(0.6, 0.6 + 1e-13).unwrap();
        assert!((0.6 - tighter).abs() < (0.6 - alpha).abs());
    }

    #[test]
    fn cap_equation_scale_covariance() {
        let base = solve_cap_alpha(0.6, 1.0).unwrap();
        let scaled = solve_cap_alpha(1.8, 3.0).unwrap();
        assert!((scaled - 3.0 * base).abs() <= 1e-10 * 3.0 * base.abs());
    }

    #[test]
    fn curve_means_satisfy_mean_conditions() {
        let p = DomainProblem {
            means: vec![0.6, 0.5],
            bundles: vec![
                DomainBundleSpec {
                    items: vec![0],
                    cap: 1.0,
                },
                DomainBundleSpec {
                    items: vec![1],
                    cap: 1.0,
                },
            ],
        };
        let sol = solve_domain(&p).unwrap();
        let curve = CurveDistribution::from_domain(&sol);
        for (i, &m) in p.means.iter().enumerate() {
            assert!((curve.expect(|v| v[i]) - m).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_cap_below_mean() {
        let p = DomainProblem {
            means: vec![0.6, 0.5],
            bundles: vec![DomainBundleSpec {
                items: vec![0, 1],
                cap: 1.0,
            }],
        };
        assert!(p.validate().is_err());
    }
}
