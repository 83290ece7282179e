//! The optimal menu: independent random prices per bundle.
//!
//! Each bundle `K` is sold separately at a random price with density
//! `g_K(p) = lambda_K (phi'(beta-m) - phi'(p-m)) / p` on `[alpha, beta]`
//! (moment ambiguity) or `g_K(p) = 1 / (ln(vbar/alpha) p)` on
//! `[alpha, vbar]` (capped-domain ambiguity). The induced direct
//! mechanism allocates item `i` with probability `G_K(w_K)` where
//! `w_K` is the reported bundle total, and charges
//! `t(v) = sum_K int_{p <= w_K} p g_K(p) dp`, which has an exact closed
//! form for both density families, so no revenue identity rests on
//! interpolation.

use serde::{Deserialize, Serialize};

use crate::curve::{CurveDistribution, DiscreteDistribution};
use crate::dispersion::{int_dphi_over_x, Dispersion};
use crate::domain::DomainSolution;
use crate::quad::adaptive_simpson;
use crate::saddle::SaddleSolution;

/// Price density of one bundle's random price.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum PriceDensity {
    /// `g(p) = lambda (phi'(beta - m) - phi'(p - m)) / p` on `[alpha, beta]`.
    Moment {
        alpha: f64,
        beta: f64,
        lambda: f64,
        m: f64,
        kernel: Dispersion,
    },
    /// `g(p) = 1 / (ln(vbar/alpha) p)` on `[alpha, vbar]`.
    Cap { alpha: f64, vbar: f64 },
}

impl PriceDensity {
    pub fn support(&self) -> (f64, f64) {
        match *self {
            PriceDensity::Moment { alpha, beta, .. } => (alpha, beta),
            PriceDensity::Cap { alpha, vbar } => (alpha, vbar),
        }
    }

    /// Density `g(p)`; zero off the support.
    pub fn density(&self, p: f64) -> f64 {
        let (lo, hi) = self.support();
        if p < lo || p > hi {
            return 0.0;
        }
        match *self {
            PriceDensity::Moment {
                beta,
                lambda,
                m,
                kernel,
                ..
            } => lambda * (kernel.d1(beta - m) - kernel.d1(p - m)) / p,
            PriceDensity::Cap { alpha, vbar } => 1.0 / ((vbar / alpha).ln() * p),
        }
    }

    /// Cdf `G(w)`, exact.
    pub fn cdf(&self, w: f64) -> f64 {
        let (lo, hi) = self.support();
        if w < lo {
            return 0.0;
        }
        if w >= hi {
            return 1.0;
        }
        match *self {
            PriceDensity::Moment {
                alpha,
                beta,
                lambda,
                m,
                kernel,
            } => {
                lambda
                    * (kernel.d1(beta - m) * (w / alpha).ln()
                        - int_dphi_over_x(kernel, m, alpha, w))
            }
            PriceDensity::Cap { alpha, vbar } => (w / alpha).ln() / (vbar / alpha).ln(),
        }
    }

    /// Expected payment `int_{lo}^{min(w, hi)} p g(p) dp`; zero below the
    /// support.
    pub fn expected_payment(&self, w: f64) -> f64 {
        let (lo, hi) = self.support();
        if w < lo {
            return 0.0;
        }
        let w = w.min(hi);
        match *self {
            PriceDensity::Moment {
                alpha,
                beta,
                lambda,
                m,
                kernel,
            } => {
                lambda
                    * (kernel.d1(beta - m) * (w - alpha) - kernel.eval(w - m)
                        + kernel.eval(alpha - m))
            }
            PriceDensity::Cap { alpha, vbar } => (w - alpha) / (vbar / alpha).ln(),
        }
    }

    /// Payment when the price always clears: `int p g(p) dp`.
    pub fn max_payment(&self) -> f64 {
        self.expected_payment(self.support().1)
    }

    /// Lagrange multiplier of the dispersion constraint (zero for the
    /// capped-domain family, which has none).
    pub fn multiplier(&self) -> f64 {
        match *self {
            PriceDensity::Moment { lambda, .. } => lambda,
            PriceDensity::Cap { .. } => 0.0,
        }
    }
}

/// One sold bundle: its items and its price law.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MenuBundle {
    pub items: Vec<usize>,
    pub price: PriceDensity,
}

/// The full menu of independent per-bundle random prices.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RandomPriceMenu {
    pub bundles: Vec<MenuBundle>,
}

/// Builds the optimal menu from a saddle solution. The normalizer is
/// recomputed by quadrature and must agree with the solved one to 1e-8.
pub fn build_menu(sol: &SaddleSolution) -> RandomPriceMenu {
    let bundles = sol
        .partition
        .iter()
        .zip(&sol.bundles)
        .zip(&sol.kernels)
        .map(|((items, b), &kernel)| {
            let quad = 1.0
                / adaptive_simpson(
                    &|x: f64| (kernel.d1(b.beta - b.m) - kernel.d1(x - b.m)) / x,
                    b.alpha,
                    b.beta,
                    1e-12,
                );
            assert!(
                (quad - b.lambda).abs() <= 1e-8 * b.lambda.abs().max(1.0),
                "normalizer mismatch: quadrature {quad} vs solved {}",
                b.lambda
            );
            MenuBundle {
                items: items.clone(),
                price: PriceDensity::Moment {
                    alpha: b.alpha,
                    beta: b.beta,
                    lambda: b.lambda,
                    m: b.m,
                    kernel,
                },
            }
        })
        .collect();
    RandomPriceMenu { bundles }
}

/// Menu for the capped-domain variant: log-uniform prices per bundle.
pub fn build_domain_menu(sol: &DomainSolution) -> RandomPriceMenu {
    let bundles = sol
        .partition
        .iter()
        .zip(&sol.alphas)
        .zip(&sol.caps)
        .map(|((items, &alpha), &vbar)| MenuBundle {
            items: items.clone(),
            price: PriceDensity::Cap { alpha, vbar },
        })
        .collect();
    RandomPriceMenu { bundles }
}

/// Direct form `(q*, t*)` of a random-price menu.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DirectMechanism {
    pub menu: RandomPriceMenu,
}

impl DirectMechanism {
    pub fn from_menu(menu: RandomPriceMenu) -> Self {
        DirectMechanism { menu }
    }

    fn bundle_total(items: &[usize], v: &[f64]) -> f64 {
        items.iter().map(|&i| v[i]).sum()
    }

    /// Allocation probabilities `q*_i(v) = G_{K(i)}(sum_{j in K} v_j)`.
    pub fn quantities(&self, v: &[f64]) -> Vec<f64> {
        let mut q = vec![0.0; v.len()];
        for mb in &self.menu.bundles {
            let g = mb.price.cdf(Self::bundle_total(&mb.items, v));
            for &i in &mb.items {
                q[i] = g;
            }
        }
        q
    }

    /// Expected payment `t*(v)`.
    pub fn payment(&self, v: &[f64]) -> f64 {
        self.menu
            .bundles
            .iter()
            .map(|mb| mb.price.expected_payment(Self::bundle_total(&mb.items, v)))
            .sum()
    }

    /// Buyer utility `v . q*(v') - t*(v')` of reporting `v'` with values `v`.
    pub fn report_utility(&self, v: &[f64], reported: &[f64]) -> f64 {
        let q = self.quantities(reported);
        let gross: f64 = v.iter().zip(&q).map(|(&vi, &qi)| vi * qi).sum();
        gross - self.payment(reported)
    }

    /// Expected revenue against a curve distribution, by quadrature.
    pub fn revenue_curve(&self, dist: &CurveDistribution) -> f64 {
        dist.expect(|v| self.payment(v))
    }

    /// Expected revenue against a finite-support distribution.
    pub fn revenue_discrete(&self, dist: &DiscreteDistribution) -> f64 {
        dist.expect(|v| self.payment(v))
    }

    /// The certificate function `t*(v) + sum_K lambda_K phi_K(w_K - m_K)`:
    /// linear in `v` on the support of the worst case, convex everywhere.
    pub fn lagrangian(&self, sol: &SaddleSolution, v: &[f64]) -> f64 {
        let penalty: f64 = self
            .menu
            .bundles
            .iter()
            .zip(&sol.bundles)
            .zip(&sol.kernels)
            .map(|((mb, b), kernel)| {
                mb.price.multiplier() * kernel.eval(Self::bundle_total(&mb.items, v) - b.m)
            })
            .sum();
        self.payment(v) + penalty
    }
}
