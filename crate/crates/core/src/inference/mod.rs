//! Permutation independence tests on `V_n` or `R_n`, and a harness that
//! measures rejection rates across norm choices.

mod power;

pub use power::{
    clopper_pearson, power_study, NormPair, NormPairResult, PowerStudyConfig, PowerStudyReport, Scenario,
    ScenarioSummary,
};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, DiscreteCDF};

use crate::dcov::{correlation, estimate_from_marginals, terms_from_marginals, MarginalDistances, PairedSample};
use crate::error::{Error, Result};
use crate::norms::NormSpec;
use crate::par;
use crate::rng::stream;

pub const DEFAULT_REPLICATES: usize = 999;
pub const DEFAULT_ALPHA: f64 = 0.05;

/// Which statistic a permutation test ranks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StatisticKind {
    #[serde(rename = "v_n")]
    Covariance,
    #[serde(rename = "r_n")]
    Correlation,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PermutationTestResult {
    pub observed: f64,
    pub replicates: Vec<f64>,
    /// `(1 + #{replicate ≥ observed}) / (B + 1)`.
    pub p_value: f64,
    #[serde(rename = "B")]
    pub b: usize,
    pub seed: u64,
    pub statistic_kind: StatisticKind,
}

impl PermutationTestResult {
    pub fn rejects(&self, alpha: f64) -> bool {
        self.p_value <= alpha
    }
}

/// The permutation applied in replicate `index`: a uniform shuffle drawn
/// from random stream `index + 1` under `seed`.
pub fn replicate_permutation(n: usize, seed: u64, index: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut stream(seed, index as u64 + 1));
    perm
}

/// Permutation test of independence. Replicate `b` re-pairs the sample
/// through [`replicate_permutation`]`(n, seed, b)` and recomputes the
/// statistic; the marginal distance matrices are built once and reused, as
/// re-pairing leaves `V_n(X)` and `V_n(Y)` unchanged.
pub fn permutation_test(
    sample: &PairedSample,
    spec_x: &NormSpec,
    spec_y: &NormSpec,
    b: usize,
    kind: StatisticKind,
    seed: u64,
) -> Result<PermutationTestResult> {
    if b == 0 {
        return Err(Error::BadReplicateCount);
    }
    let mx = MarginalDistances::new(sample.x(), spec_x)?;
    let my = MarginalDistances::new(sample.y(), spec_y)?;
    let est = estimate_from_marginals(&mx, &my, spec_x, spec_y);
    let statistic = |v: f64, scale: f64| match kind {
        StatisticKind::Covariance => v,
        StatisticKind::Correlation => correlation(v, est.v_xx, est.v_yy, scale),
    };
    let observed = statistic(est.v_xy, est.terms_xy.scale());
    let n = sample.len();
    let replicates: Vec<f64> = par::map_indexed(b, |i| {
        let perm = replicate_permutation(n, seed, i);
        let t = terms_from_marginals(&mx, &my, Some(&perm));
        statistic(t.clamped(), t.scale())
    });
    let exceed = replicates.iter().filter(|&&r| r >= observed).count();
    Ok(PermutationTestResult {
        observed,
        p_value: (1 + exceed) as f64 / (b + 1) as f64,
        replicates,
        b,
        seed,
        statistic_kind: kind,
    })
}

/// Two-sided exact binomial acceptance region for the count of successes in
/// `trials` draws with success probability `p`: the smallest `[lo, hi]` with
/// `P(X < lo) ≤ (1 − level)/2` and `P(X > hi) ≤ (1 − level)/2`.
pub fn binomial_interval(trials: u64, p: f64, level: f64) -> Result<(u64, u64)> {
    let dist = Binomial::new(p, trials).map_err(|e| Error::BadConfig(e.to_string()))?;
    let tail = (1.0 - level) / 2.0;
    let lo = (0..=trials).find(|&k| dist.cdf(k) > tail).unwrap_or(trials);
    let hi = (0..=trials).find(|&k| dist.sf(k) <= tail).unwrap_or(trials);
    Ok((lo, hi))
}
