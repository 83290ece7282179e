use thiserror::Error;

/// Errors produced by the solvers and generators.
#[derive(Debug, Error)]
pub enum Error {
    /// Problem data violates a structural invariant (bad partition,
    /// non-positive moment, inverted interval, ...).
    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    /// A bisection bracket could not be established within the iteration
    /// budget. Signals pathological inputs rather than a genuine absence
    /// of a root.
    #[error("root finder failed to converge: {0}")]
    NonConvergence(String),

    /// Dispersion below the numerical floor `1e-9 * m^2`; the solution
    /// would be indistinguishable from a point mass at the mean.
    #[error("dispersion {s:.3e} is degenerate (floor {floor:.3e})")]
    DegenerateDispersion { s: f64, floor: f64 },

    /// Requested transfer mass exceeds the top-atom mass `alpha/beta`.
    #[error("epsilon {epsilon:.3e} exceeds the top atom mass {atom:.3e}")]
    EpsilonTooLarge { epsilon: f64, atom: f64 },

    /// The damped Newton iteration for the perturbed moment system did
    /// not reach the residual target. Retry with a smaller epsilon.
    #[error("Newton iteration diverged: {0}")]
    NewtonDivergence(String),

    /// A construction's hypothesis fails on this instance, e.g. all
    /// support ratios `beta_i/alpha_i` coincide.
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
}
