//! Worst-case optimal pricing for a multi-good monopolist.
//!
//! A seller faces a buyer whose joint value distribution is known only
//! through moment conditions: the mean of each item value and, for each
//! bundle `K` of a fixed partition of the goods, a convex dispersion
//! moment `E[phi_K(sum_{i in K} v_i - sum_{i in K} m_i)]`. The seller
//! maximizes revenue against the worst distribution consistent with that
//! knowledge.
//!
//! This crate computes the saddle point of the induced zero-sum game:
//!
//! * [`saddle`] solves, per bundle, for the support bounds
//!   `0 < alpha < m < beta` of the worst-case value of the bundle, and
//!   minimizes the revenue guarantee `sum_K alpha_K` over box ambiguity
//!   in the moments.
//! * [`curve`] materializes the worst-case distribution: a parametric
//!   curve `V_i(x) = min(alpha_K x, beta_K) * m_i / m_K` driven by a
//!   Pareto variable with cdf `H(y) = 1 - 1/y`, plus a top atom.
//! * [`mechanism`] builds the optimal menu: each bundle sold separately
//!   at an independent random price with density
//!   `g_K(p) = lambda_K (phi'(beta-m) - phi'(p-m)) / p` on `[alpha, beta]`.
//! * [`adversary`] generates nature-side deviations inside the ambiguity
//!   set, including the two structured constructions that defeat pure
//!   bundling and separate sales respectively, and an LP feasibility
//!   probe backed by a dense phase-1 simplex.
//! * [`verifier`] certifies both saddle inequalities numerically and
//!   produces a machine-readable report.
//! * [`domain`] covers the variant where dispersion knowledge is replaced
//!   by a hard cap on each bundle value.
//!
//! # Example
//!
//! Two goods with known means and variances, sold separately; the revenue
//! of the optimal menu under the worst case equals the guarantee:
//!
//! ```
//! use robust_bundling::{minimize_guarantee, AmbiguityProblem, Dispersion};
//! use robust_bundling::curve::CurveDistribution;
//! use robust_bundling::mechanism::{build_menu, DirectMechanism};
//!
//! let problem = AmbiguityProblem::with_point_moments(
//!     &[0.6, 0.5],
//!     &[vec![0], vec![1]],
//!     &[Dispersion::Quadratic, Dispersion::Quadratic],
//!     &[0.1, 0.1],
//! );
//! let sol = minimize_guarantee(&problem).unwrap();
//! let curve = CurveDistribution::from_solution(&sol);
//! let mech = DirectMechanism::from_menu(build_menu(&sol));
//! assert!((mech.revenue_curve(&curve) - sol.guarantee).abs() < 1e-8);
//! ```

pub mod adversary;
pub mod curve;
pub mod dispersion;
pub mod domain;
pub mod emit;
pub mod error;
pub mod mechanism;
pub mod quad;
pub mod report;
pub mod roots;
pub mod saddle;
pub mod simplex;
pub mod verifier;

pub use curve::{CurveDistribution, DiscreteDistribution};
pub use dispersion::Dispersion;
pub use error::Error;
pub use mechanism::{build_menu, DirectMechanism, RandomPriceMenu};
pub use saddle::{
    minimize_guarantee, sensitivity_check, solve_bundle, AmbiguityProblem, BundleSolution,
    BundleSpec, Interval, SaddleSolution, SensitivityReport,
};

/// A `Result` with this crate's [`Error`] type.
pub type Result<T> = std::result::Result<T, Error>;
