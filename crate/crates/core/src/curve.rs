//! The worst-case valuation distribution and discrete carriers.
//!
//! The adversarial distribution is one-dimensional: a scalar parameter
//! `x >= 1` with Pareto cdf `H(y) = 1 - 1/y` drives every item value
//! through `V_i(x) = min(alpha_K x, beta_K) * share_i` where `K` is the
//! bundle containing item `i` and `share_i = m_i / m_K`. Past
//! `L = max_K beta_K/alpha_K` every coordinate is capped, so the whole
//! Pareto tail collapses into an atom of mass `1/L` at the top profile.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dispersion::Dispersion;
use crate::error::Error;
use crate::quad::adaptive_simpson_split;
use crate::saddle::SaddleSolution;
use crate::Result;

/// Per-bundle support data of the curve.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CurveBundle {
    pub alpha: f64,
    pub beta: f64,
    /// `beta / alpha`, the parameter value at which the bundle caps.
    pub ell: f64,
}

/// Worst-case distribution: a parametric curve with a top atom.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveDistribution {
    pub partition: Vec<Vec<usize>>,
    pub bundles: Vec<CurveBundle>,
    /// `m_i / m_K`, summing to one within each bundle.
    pub item_shares: Vec<f64>,
    /// Bundle index of each item.
    pub item_bundle: Vec<usize>,
}

/// Absolute quadrature tolerance for curve expectations.
const EXPECT_TOL: f64 = 1e-10;

impl CurveDistribution {
    pub fn from_solution(sol: &SaddleSolution) -> Self {
        CurveDistribution {
            partition: sol.partition.clone(),
            bundles: sol
                .bundles
                .iter()
                .map(|b| CurveBundle {
                    alpha: b.alpha,
                    beta: b.beta,
                    ell: b.ell,
                })
                .collect(),
            item_shares: sol.item_shares.clone(),
            item_bundle: sol.bundle_of_item(),
        }
    }

    /// Builds a curve directly from per-bundle bounds and item shares.
    pub fn from_parts(
        partition: Vec<Vec<usize>>,
        bounds: &[(f64, f64)],
        item_shares: Vec<f64>,
    ) -> Self {
        let n = item_shares.len();
        let mut item_bundle = vec![0; n];
        for (k, items) in partition.iter().enumerate() {
            for &i in items {
                item_bundle[i] = k;
            }
        }
        CurveDistribution {
            partition,
            bundles: bounds
                .iter()
                .map(|&(alpha, beta)| CurveBundle {
                    alpha,
                    beta,
                    ell: beta / alpha,
                })
                .collect(),
            item_shares,
            item_bundle,
        }
    }

    pub fn n(&self) -> usize {
        self.item_shares.len()
    }

    /// Parameter beyond which every coordinate is capped.
    pub fn top_parameter(&self) -> f64 {
        self.bundles.iter().map(|b| b.ell).fold(1.0, f64::max)
    }

    /// Total value of bundle `k` at parameter `x`.
    pub fn bundle_total_at(&self, k: usize, x: f64) -> f64 {
        let b = &self.bundles[k];
        (b.alpha * x).min(b.beta)
    }

    /// Sum of all item values at parameter `x`.
    pub fn grand_total_at(&self, x: f64) -> f64 {
        (0..self.bundles.len())
            .map(|k| self.bundle_total_at(k, x))
            .sum()
    }

    /// The value profile `V(x)`.
    pub fn value_at(&self, x: f64) -> Vec<f64> {
        (0..self.n())
            .map(|i| self.item_shares[i] * self.bundle_total_at(self.item_bundle[i], x))
            .collect()
    }

    /// Expectation of `f` over the curve.
    ///
    /// Substituting `u = 1/x` turns `int_1^L f(V(x)) x^-2 dx` into
    /// `int_{1/L}^1 f(V(1/u)) du`, removing the Pareto weight; panels are
    /// split at every bundle kink `u = alpha_K/beta_K` before adaptive
    /// Simpson runs at absolute tolerance 1e-10. The tail mass `1/L`
    /// multiplies `f` at the constant top profile.
    pub fn expect<F: Fn(&[f64]) -> f64>(&self, f: F) -> f64 {
        let top = self.top_parameter();
        let u_lo = 1.0 / top;
        let breaks: Vec<f64> = self.bundles.iter().map(|b| 1.0 / b.ell).collect();
        let g = |u: f64| f(&self.value_at(1.0 / u));
        let interior = adaptive_simpson_split(&g, u_lo, 1.0, &breaks, EXPECT_TOL);
        interior + f(&self.value_at(top)) / top
    }

    /// Draws `count` values by inverse-cdf sampling of the parameter,
    /// `x = 1/(1-u)`; deterministic given the seed.
    pub fn sample(&self, count: usize, seed: u64) -> DiscreteDistribution {
        assert!(count >= 1, "sample count must be >= 1");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = 1.0 / count as f64;
        let points = (0..count)
            .map(|_| {
                let u: f64 = rng.gen();
                self.value_at(1.0 / (1.0 - u))
            })
            .collect();
        DiscreteDistribution {
            points,
            weights: vec![w; count],
        }
    }

    /// Probability that the total value of bundle `k` is at least `p`.
    pub fn bundle_survival(&self, k: usize, p: f64) -> f64 {
        let b = &self.bundles[k];
        if p > b.beta {
            0.0
        } else {
            (b.alpha / p).min(1.0)
        }
    }

    /// Revenue from posting price `p` on bundle `k`:
    /// `p min(1, alpha/p)` for `p <= beta`, zero above.
    pub fn posted_price_revenue(&self, k: usize, p: f64) -> f64 {
        assert!(p > 0.0, "price must be positive");
        p * self.bundle_survival(k, p)
    }

    /// Probability that item `i`'s value is at least `p`.
    pub fn item_survival(&self, i: usize, p: f64) -> f64 {
        let share = self.item_shares[i];
        let b = &self.bundles[self.item_bundle[i]];
        if p > share * b.beta {
            0.0
        } else {
            (share * b.alpha / p).min(1.0)
        }
    }

    /// Probability that the grand total is at least `p`.
    pub fn total_survival(&self, p: f64) -> f64 {
        if p <= self.grand_total_at(1.0) {
            return 1.0;
        }
        let top = self.top_parameter();
        if p > self.grand_total_at(top) {
            return 0.0;
        }
        // Invert the piecewise-linear grand total on [1, L].
        let mut ells: Vec<f64> = self.bundles.iter().map(|b| b.ell).collect();
        ells.push(top);
        ells.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ells.dedup();
        let mut lo = 1.0;
        for &edge in &ells {
            if p <= self.grand_total_at(edge) {
                let slope: f64 = self
                    .bundles
                    .iter()
                    .filter(|b| b.ell > lo)
                    .map(|b| b.alpha)
                    .sum();
                let x = lo + (p - self.grand_total_at(lo)) / slope;
                return 1.0 / x;
            }
            lo = edge;
        }
        1.0 / top
    }

    /// Parameter breakpoints of the support: 1, every bundle kink, and
    /// the top.
    pub fn parameter_breakpoints(&self) -> Vec<f64> {
        let mut xs = vec![1.0];
        xs.extend(self.bundles.iter().map(|b| b.ell));
        xs.push(self.top_parameter());
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        xs.dedup();
        xs
    }

    /// Equal-mass discretization: `bins` midpoint quantile points below
    /// the top, plus the exact top atom `(V(L), 1/L)`.
    pub fn quantile_points(&self, bins: usize) -> Vec<(f64, f64)> {
        let top = self.top_parameter();
        let q_top = 1.0 - 1.0 / top;
        let dq = q_top / bins as f64;
        let mut pts: Vec<(f64, f64)> = (0..bins)
            .map(|j| {
                let q = (j as f64 + 0.5) * dq;
                (1.0 / (1.0 - q), dq)
            })
            .collect();
        pts.push((top, 1.0 / top));
        pts
    }
}

/// Finite-support distribution on value vectors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiscreteDistribution {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl DiscreteDistribution {
    pub fn n(&self) -> usize {
        self.points.first().map_or(0, |p| p.len())
    }

    pub fn validate(&self) -> Result<()> {
        if self.points.len() != self.weights.len() {
            return Err(Error::InvalidProblem(
                "points/weights length mismatch".into(),
            ));
        }
        let total: f64 = self.weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidProblem(format!(
                "weights sum to {total}, expected 1 within 1e-12"
            )));
        }
        if self.weights.iter().any(|&w| w < 0.0) {
            return Err(Error::InvalidProblem("negative weight".into()));
        }
        if self
            .points
            .iter()
            .flatten()
            .any(|&v| v < 0.0 || !v.is_finite())
        {
            return Err(Error::InvalidProblem(
                "point outside the nonnegative orthant".into(),
            ));
        }
        Ok(())
    }

    pub fn expect<F: Fn(&[f64]) -> f64>(&self, f: F) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(v, &w)| w * f(v))
            .sum()
    }

    pub fn item_mean(&self, i: usize) -> f64 {
        self.expect(|v| v[i])
    }

    /// Dispersion moment of the bundle `items` around mean `m`.
    pub fn bundle_dispersion(&self, items: &[usize], kernel: Dispersion, m: f64) -> f64 {
        self.expect(|v| kernel.eval(items.iter().map(|&i| v[i]).sum::<f64>() - m))
    }

    /// Mean and standard error of `f` under the empirical weights
    /// (meaningful for equal-weight Monte Carlo samples).
    pub fn mean_and_se<F: Fn(&[f64]) -> f64>(&self, f: F) -> (f64, f64) {
        let n = self.points.len() as f64;
        let mean = self.expect(&f);
        let var = self.expect(|v| {
            let d = f(v) - mean;
            d * d
        });
        (mean, (var / n).sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::saddle::{minimize_guarantee, AmbiguityProblem};

    fn figure_instance() -> CurveDistribution {
        let p = AmbiguityProblem::with_point_moments(
            &[0.6, 0.5],
            &[vec![0], vec![1]],
            &[Dispersion::Quadratic, Dispersion::Quadratic],
            &[0.1, 0.1],
        );
        CurveDistribution::from_solution(&minimize_guarantee(&p).unwrap())
    }

    #[test]
    fn total_mass_is_one() {
        let c = figure_instance();
        assert!((c.expect(|_| 1.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn means_and_dispersions_certify() {
        let c = figure_instance();
        for (i, &m) in [0.6, 0.5].iter().enumerate() {
            assert!((c.expect(|v| v[i]) - m).abs() < 1e-8, "mean of item {i}");
            let s = c.expect(|v| {
                let d = v[i] - m;
                d * d
            });
            assert!((s - 0.1).abs() < 1e-8, "dispersion of item {i}");
        }
    }

    #[test]
    fn posted_prices_are_flat_on_the_support() {
        let c = figure_instance();
        for (k, b) in c.bundles.iter().enumerate() {
            for p in [b.alpha, 0.5 * (b.alpha + b.beta), b.beta * (1.0 - 1e-9)] {
                assert!((c.posted_price_revenue(k, p) - b.alpha).abs() < 1e-10);
            }
            assert!((c.posted_price_revenue(k, b.alpha / 2.0) - b.alpha / 2.0).abs() < 1e-12);
            assert_eq!(c.posted_price_revenue(k, b.beta * 1.01), 0.0);
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let c = figure_instance();
        let a = c.sample(1, 99);
        let b = c.sample(1, 99);
        assert_eq!(a.points, b.points);
    }

    #[test]
    fn monte_carlo_matches_quadrature_means() {
        let c = figure_instance();
        let sample = c.sample(1_000_000, 7);
        for (i, &m) in [0.6, 0.5].iter().enumerate() {
            let (mean, se) = sample.mean_and_se(|v| v[i]);
            assert!(
                (mean - m).abs() < 3.0 * se,
                "item {i}: {mean} vs {m} (se {se})"
            );
        }
    }

    #[test]
    fn top_atom_frequency_matches_closed_form() {
        let c = figure_instance();
        let sample = c.sample(1_000_000, 11);
        for (k, b) in c.bundles.iter().enumerate() {
            let hit = |v: &[f64]| {
                if c.partition[k].iter().map(|&i| v[i]).sum::<f64>() >= b.beta * (1.0 - 1e-12) {
                    1.0
                } else {
                    0.0
                }
            };
            let (freq, se) = sample.mean_and_se(hit);
            let atom = b.alpha / b.beta;
            assert!((freq - atom).abs() < 3.0 * se, "bundle {k}");
        }
    }

    #[test]
    fn sampled_points_lie_on_the_curve() {
        let c = figure_instance();
        let sample = c.sample(2000, 5);
        for v in &sample.points {
            // Recover the driving parameter from any uncapped bundle.
            let mut x_est: Option<f64> = None;
            for (k, b) in c.bundles.iter().enumerate() {
                let w: f64 = c.partition[k].iter().map(|&i| v[i]).sum();
                if w < b.beta * (1.0 - 1e-9) {
                    let x = w / b.alpha;
                    if let Some(prev) = x_est {
                        assert!((prev - x).abs() < 1e-9);
                    }
                    x_est = Some(x);
                }
            }
            let x = x_est.unwrap_or_else(|| c.top_parameter());
            let expect = c.value_at(x);
            for (a, b) in v.iter().zip(&expect) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn quantile_discretization_preserves_moments() {
        let c = figure_instance();
        let pts = c.quantile_points(20_000);
        let total: f64 = pts.iter().map(|&(_, w)| w).sum();
        assert!((total - 1.0).abs() < 1e-12);
        for (i, &m) in [0.6, 0.5].iter().enumerate() {
            let mean: f64 = pts.iter().map(|&(x, w)| w * c.value_at(x)[i]).sum();
            assert!((mean - m).abs() < 1e-8, "item {i} mean {mean}");
        }
    }

    #[test]
    fn total_survival_inverts_the_grand_total() {
        let c = figure_instance();
        for x in [1.0, 1.5, 2.0, 3.3, 4.4, 5.5] {
            let p = c.grand_total_at(x);
            let s = c.total_survival(p);
            assert!((s - (1.0 / x).min(1.0)).abs() < 1e-12, "x = {x}");
        }
        assert_eq!(
            c.total_survival(c.grand_total_at(c.top_parameter()) + 1e-9),
            0.0
        );
    }
}
