//! Rejection-rate study across norm pairs.
//!
//! Every replication draws one dataset and runs the permutation test once per
//! norm pair on that same dataset, so rates are paired across pairs. The
//! harness reports rates and confidence intervals; it does not rank the
//! pairs.

use serde::Serialize;
use statrs::distribution::{Beta, ContinuousCDF};

use crate::dcov::PairedSample;
use crate::embed::{embed, finite_dependence_latents, BasisModel, FiniteDependenceConfig, ZDist};
use crate::error::{Error, Result};
use crate::norms::{NormRecord, NormSpec};
use crate::par;
use crate::rng::derive_seed;

use super::{permutation_test, StatisticKind};

/// Data-generating process for a power study.
#[derive(Clone, Debug, PartialEq)]
pub enum Scenario {
    /// Coefficient vectors from [`crate::embed::finite_dependence_sample`].
    Coefficients(FiniteDependenceConfig),
    /// Functions `Σ λ_i Z_i φ_i` on a basis model with latents shared as in
    /// [`FiniteDependenceConfig`], embedded at `truncation` coefficients.
    Functional {
        model: BasisModel,
        shared: usize,
        noise_sd: f64,
        z_dist: ZDist,
        truncation: usize,
    },
}

impl Scenario {
    /// Independent `dim_x`- and `dim_y`-dimensional Gaussian vectors.
    pub fn independent(dim_x: usize, dim_y: usize) -> Self {
        Scenario::Coefficients(FiniteDependenceConfig {
            shared: 0,
            lambdas_x: vec![1.0; dim_x],
            lambdas_y: vec![1.0; dim_y],
            noise_sd: 0.0,
            z_dist: ZDist::StandardGaussian,
        })
    }

    /// `Y = X` with `X` standard Gaussian in `dim` dimensions.
    pub fn identity(dim: usize) -> Self {
        Scenario::Coefficients(FiniteDependenceConfig {
            shared: dim,
            lambdas_x: vec![1.0; dim],
            lambdas_y: vec![1.0; dim],
            noise_sd: 0.0,
            z_dist: ZDist::StandardGaussian,
        })
    }

    /// Gaussian vectors in `dim` dimensions dependent only through the first
    /// coordinate: `Y_1 = X_1 + noise_sd·ε`.
    pub fn first_coordinate(dim: usize, noise_sd: f64) -> Self {
        Scenario::Coefficients(FiniteDependenceConfig {
            shared: 1,
            lambdas_x: vec![1.0; dim],
            lambdas_y: vec![1.0; dim],
            noise_sd,
            z_dist: ZDist::StandardGaussian,
        })
    }

    /// Dimensions of the vectors handed to the test.
    pub fn dims(&self) -> (usize, usize) {
        match self {
            Scenario::Coefficients(cfg) => (cfg.lambdas_x.len(), cfg.lambdas_y.len()),
            Scenario::Functional { truncation, .. } => (*truncation, *truncation),
        }
    }

    pub fn summary(&self) -> ScenarioSummary {
        match self {
            Scenario::Coefficients(cfg) => ScenarioSummary {
                kind: "coefficients",
                shared: cfg.shared,
                dim_x: cfg.lambdas_x.len(),
                dim_y: cfg.lambdas_y.len(),
                noise_sd: cfg.noise_sd,
                z_dist: cfg.z_dist,
                lambdas_x: cfg.lambdas_x.clone(),
                lambdas_y: cfg.lambdas_y.clone(),
                basis: None,
                truncation: None,
            },
            Scenario::Functional {
                model,
                shared,
                noise_sd,
                z_dist,
                truncation,
            } => ScenarioSummary {
                kind: "functional",
                shared: *shared,
                dim_x: *truncation,
                dim_y: *truncation,
                noise_sd: *noise_sd,
                z_dist: *z_dist,
                lambdas_x: model.lambdas().to_vec(),
                lambdas_y: model.lambdas().to_vec(),
                basis: Some(model.id().to_string()),
                truncation: Some(*truncation),
            },
        }
    }

    /// Draws one dataset of `n` pairs.
    pub fn draw(&self, n: usize, seed: u64) -> Result<PairedSample> {
        match self {
            Scenario::Coefficients(cfg) => crate::embed::finite_dependence_sample(cfg, n, seed),
            Scenario::Functional {
                model,
                shared,
                noise_sd,
                z_dist,
                truncation,
            } => {
                let cfg = FiniteDependenceConfig {
                    shared: *shared,
                    lambdas_x: model.lambdas().to_vec(),
                    lambdas_y: model.lambdas().to_vec(),
                    noise_sd: *noise_sd,
                    z_dist: *z_dist,
                };
                let (zx, zy) = finite_dependence_latents(&cfg, n, seed)?;
                let tabulate = |z: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
                    z.iter()
                        .map(|z| {
                            let c: Vec<f64> = z.iter().zip(model.lambdas()).map(|(z, l)| z * l).collect();
                            model.reconstruct(&c)
                        })
                        .collect()
                };
                let ex = embed(&tabulate(&zx), model, *truncation)?;
                let ey = embed(&tabulate(&zy), model, *truncation)?;
                PairedSample::new(ex.coeffs, ey.coeffs)
            }
        }
    }
}

/// Dependence structure of a scenario, recorded in reports.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioSummary {
    pub kind: &'static str,
    /// Number of leading latent coordinates carrying the dependence.
    pub shared: usize,
    /// Dimensions of the vectors the statistic sees.
    pub dim_x: usize,
    pub dim_y: usize,
    pub noise_sd: f64,
    pub z_dist: ZDist,
    pub lambdas_x: Vec<f64>,
    pub lambdas_y: Vec<f64>,
    pub basis: Option<String>,
    pub truncation: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormPair {
    pub label: String,
    pub x: NormSpec,
    pub y: NormSpec,
}

impl NormPair {
    pub fn new(label: impl Into<String>, x: NormSpec, y: NormSpec) -> Self {
        NormPair {
            label: label.into(),
            x,
            y,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PowerStudyConfig {
    pub scenario: Scenario,
    pub norm_pairs: Vec<NormPair>,
    pub n: usize,
    /// Permutation replicates per test.
    pub replicates: usize,
    pub replications: usize,
    pub alpha: f64,
    pub seed: u64,
    pub statistic: StatisticKind,
    /// Coverage of the reported Clopper–Pearson intervals.
    pub confidence: f64,
}

impl PowerStudyConfig {
    fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::BadConfig(format!("alpha {} outside (0, 1)", self.alpha)));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::BadConfig(format!(
                "confidence {} outside (0, 1)",
                self.confidence
            )));
        }
        if self.replications == 0 {
            return Err(Error::BadConfig("replications must be at least 1".into()));
        }
        if self.n < 2 {
            return Err(Error::BadConfig("sample size must be at least 2".into()));
        }
        if self.replicates == 0 {
            return Err(Error::BadReplicateCount);
        }
        if self.norm_pairs.is_empty() {
            return Err(Error::BadConfig("no norm pairs given".into()));
        }
        let (dx, dy) = self.scenario.dims();
        for pair in &self.norm_pairs {
            pair.x.check_dim(dx)?;
            pair.y.check_dim(dy)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormPairResult {
    pub label: String,
    pub norm_x: NormRecord,
    pub norm_y: NormRecord,
    pub rejections: usize,
    pub rate: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PowerStudyReport {
    pub scenario: ScenarioSummary,
    pub n: usize,
    #[serde(rename = "B")]
    pub replicates: usize,
    pub replications: usize,
    pub alpha: f64,
    pub confidence: f64,
    pub seed: u64,
    pub statistic: StatisticKind,
    pub results: Vec<NormPairResult>,
}

/// Exact (Clopper–Pearson) interval for a binomial proportion.
pub fn clopper_pearson(successes: usize, trials: usize, confidence: f64) -> (f64, f64) {
    let tail = (1.0 - confidence) / 2.0;
    let (x, n) = (successes as f64, trials as f64);
    let lower = if successes == 0 {
        0.0
    } else {
        Beta::new(x, n - x + 1.0).expect("positive shapes").inverse_cdf(tail)
    };
    let upper = if successes == trials {
        1.0
    } else {
        Beta::new(x + 1.0, n - x)
            .expect("positive shapes")
            .inverse_cdf(1.0 - tail)
    };
    (lower, upper)
}

/// Runs `replications` datasets through the permutation test under every
/// norm pair. Replication `r` uses data seed `derive_seed(seed, 2r)` and test
/// seed `derive_seed(seed, 2r + 1)`.
pub fn power_study(config: &PowerStudyConfig) -> Result<PowerStudyReport> {
    config.validate()?;
    let outcomes: Vec<Result<Vec<bool>>> = par::map_indexed(config.replications, |r| {
        let data = config.scenario.draw(config.n, derive_seed(config.seed, 2 * r as u64))?;
        let test_seed = derive_seed(config.seed, 2 * r as u64 + 1);
        config
            .norm_pairs
            .iter()
            .map(|pair| {
                permutation_test(&data, &pair.x, &pair.y, config.replicates, config.statistic, test_seed)
                    .map(|t| t.rejects(config.alpha))
            })
            .collect()
    });
    let outcomes: Vec<Vec<bool>> = outcomes.into_iter().collect::<Result<_>>()?;
    let results = config
        .norm_pairs
        .iter()
        .enumerate()
        .map(|(i, pair)| {
            let rejections = outcomes.iter().filter(|o| o[i]).count();
            let (ci_lower, ci_upper) = clopper_pearson(rejections, config.replications, config.confidence);
            NormPairResult {
                label: pair.label.clone(),
                norm_x: pair.x.record(),
                norm_y: pair.y.record(),
                rejections,
                rate: rejections as f64 / config.replications as f64,
                ci_lower,
                ci_upper,
            }
        })
        .collect();
    Ok(PowerStudyReport {
        scenario: config.scenario.summary(),
        n: config.n,
        replicates: config.replicates,
        replications: config.replications,
        alpha: config.alpha,
        confidence: config.confidence,
        seed: config.seed,
        statistic: config.statistic,
        results,
    })
}
