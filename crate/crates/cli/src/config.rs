//! Run configuration: a single TOML file describing the instance, the
//! seed, trial counts, and optional tolerance overrides. Unknown keys are
//! rejected, and every semantic violation names the offending field.

use serde::Deserialize;

use robust_bundling::dispersion::Dispersion;
use robust_bundling::domain::{DomainBundleSpec, DomainProblem};
use robust_bundling::saddle::{AmbiguityProblem, BundleSpec, Interval};
use robust_bundling::verifier::CertifyOptions;

use crate::Failure;

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Moment,
    Domain,
}

/// A number or an interval `{ lo = .., hi = .. }`.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum NumOrRange {
    Point(f64),
    Range { lo: f64, hi: f64 },
}

impl NumOrRange {
    fn interval(&self) -> Interval {
        match *self {
            NumOrRange::Point(x) => Interval::point(x),
            NumOrRange::Range { lo, hi } => Interval::new(lo, hi),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ItemCfg {
    pub mean: NumOrRange,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleCfg {
    pub items: Vec<usize>,
    #[serde(default)]
    pub kernel: Option<Dispersion>,
    #[serde(default)]
    pub dispersion: Option<NumOrRange>,
    #[serde(default)]
    pub cap: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceCfg {
    #[serde(default)]
    pub seller: Option<f64>,
    #[serde(default)]
    pub nature: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub kind: ProblemKind,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    pub items: Vec<ItemCfg>,
    pub bundles: Vec<BundleCfg>,
    #[serde(default)]
    pub tolerances: Option<ToleranceCfg>,
    /// Output directory; overridable with --out.
    #[serde(default)]
    pub out: Option<String>,
}

fn default_seed() -> u64 {
    2024
}

fn default_trials() -> usize {
    100
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, Failure> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| Failure::Usage(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), Failure> {
        if self.items.is_empty() {
            return Err(Failure::Usage("config: items must not be empty".into()));
        }
        for (i, item) in self.items.iter().enumerate() {
            let iv = item.mean.interval();
            if !(iv.lo.is_finite() && iv.lo > 0.0 && iv.lo <= iv.hi) {
                return Err(Failure::Usage(format!(
                    "config: items[{i}].mean must satisfy 0 < lo <= hi, got [{}, {}]",
                    iv.lo, iv.hi
                )));
            }
        }
        for (k, b) in self.bundles.iter().enumerate() {
            match self.kind {
                ProblemKind::Moment => {
                    if b.cap.is_some() {
                        return Err(Failure::Usage(format!(
                            "config: bundles[{k}].cap is only valid for kind = \"domain\""
                        )));
                    }
                    let Some(kernel) = b.kernel else {
                        return Err(Failure::Usage(format!(
                            "config: bundles[{k}].kernel is required for kind = \"moment\""
                        )));
                    };
                    kernel
                        .validate()
                        .map_err(|e| Failure::Usage(format!("config: bundles[{k}].kernel: {e}")))?;
                    let Some(d) = b.dispersion else {
                        return Err(Failure::Usage(format!(
                            "config: bundles[{k}].dispersion is required for kind = \"moment\""
                        )));
                    };
                    let iv = d.interval();
                    if !(iv.lo.is_finite() && iv.lo > 0.0 && iv.lo <= iv.hi) {
                        return Err(Failure::Usage(format!(
                            "config: bundles[{k}].dispersion must satisfy 0 < lo <= hi"
                        )));
                    }
                }
                ProblemKind::Domain => {
                    if b.kernel.is_some() || b.dispersion.is_some() {
                        return Err(Failure::Usage(format!(
                            "config: bundles[{k}] must use cap, not kernel/dispersion, for kind = \"domain\""
                        )));
                    }
                    let Some(cap) = b.cap else {
                        return Err(Failure::Usage(format!(
                            "config: bundles[{k}].cap is required for kind = \"domain\""
                        )));
                    };
                    if !(cap.is_finite() && cap > 0.0) {
                        return Err(Failure::Usage(format!(
                            "config: bundles[{k}].cap must be positive"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn moment_problem(&self) -> Result<AmbiguityProblem, Failure> {
        let problem = AmbiguityProblem {
            means: self.items.iter().map(|i| i.mean.interval()).collect(),
            bundles: self
                .bundles
                .iter()
                .map(|b| BundleSpec {
                    items: b.items.clone(),
                    kernel: b.kernel.unwrap(),
                    dispersion: b.dispersion.unwrap().interval(),
                })
                .collect(),
        };
        problem
            .validate()
            .map_err(|e| Failure::Usage(format!("config: {e}")))?;
        Ok(problem)
    }

    pub fn domain_problem(&self) -> Result<DomainProblem, Failure> {
        let mut means = Vec::with_capacity(self.items.len());
        for (i, item) in self.items.iter().enumerate() {
            match item.mean {
                NumOrRange::Point(m) => means.push(m),
                NumOrRange::Range { .. } => {
                    return Err(Failure::Usage(format!(
                        "config: items[{i}].mean must be a point for kind = \"domain\""
                    )))
                }
            }
        }
        let problem = DomainProblem {
            means,
            bundles: self
                .bundles
                .iter()
                .map(|b| DomainBundleSpec {
                    items: b.items.clone(),
                    cap: b.cap.unwrap(),
                })
                .collect(),
        };
        problem
            .validate()
            .map_err(|e| Failure::Usage(format!("config: {e}")))?;
        Ok(problem)
    }

    pub fn certify_options(&self, seed: Option<u64>, trials: Option<usize>) -> CertifyOptions {
        let mut opts = CertifyOptions {
            seed: seed.unwrap_or(self.seed),
            trials: trials.unwrap_or(self.trials),
            ..CertifyOptions::default()
        };
        if let Some(t) = self.tolerances {
            if let Some(s) = t.seller {
                opts.seller_tol = s;
            }
            if let Some(n) = t.nature {
                opts.nature_tol = n;
            }
        }
        opts
    }
}
