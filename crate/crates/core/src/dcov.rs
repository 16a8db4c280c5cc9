//! Sample distance covariance `V_n = T1 + T2 − 2·T3` and distance
//! correlation `R_n` under arbitrary norm pairs.
//!
//! `T3`'s triple sum is evaluated through row sums,
//! `Σ_k Σ_{l,m} dx[k,l]·dy[k,m] = Σ_k rowx_k · rowy_k`, for O(n²) cost. All
//! sums go through [`ExactSum`], which makes every output invariant (bit for
//! bit) under relabelling of the observations and under the thread count.

use crate::error::{Error, Result};
use crate::exact::{exact_sum, ExactSum};
use crate::norms::{pairwise_distance_matrix, DistanceMatrix, NormSpec, PointSet};
use crate::par;

/// Relative tolerance below zero within which `V_n` is clamped to zero.
pub const CLAMP_TOL: f64 = 1e-10;
/// Relative floor under which the `R_n` denominator counts as zero.
pub const DENOM_FLOOR: f64 = 1e-24;

/// `n` aligned observations `(x_i, y_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairedSample {
    x: PointSet,
    y: PointSet,
}

impl PairedSample {
    pub fn new(x: PointSet, y: PointSet) -> Result<Self> {
        if x.is_empty() || y.is_empty() {
            return Err(Error::EmptyInput);
        }
        if x.len() != y.len() {
            return Err(Error::SizeMismatch {
                left: x.len(),
                right: y.len(),
            });
        }
        Ok(PairedSample { x, y })
    }

    pub fn from_rows<R: AsRef<[f64]>, S: AsRef<[f64]>>(xs: &[R], ys: &[S]) -> Result<Self> {
        Self::new(PointSet::from_rows(xs)?, PointSet::from_rows(ys)?)
    }

    pub fn x(&self) -> &PointSet {
        &self.x
    }

    pub fn y(&self) -> &PointSet {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// The sample with the roles of `x` and `y` exchanged.
    pub fn swapped(&self) -> PairedSample {
        PairedSample {
            x: self.y.clone(),
            y: self.x.clone(),
        }
    }

    /// Re-pairs the sample: observation `i` becomes `(x_i, y_{order[i]})`.
    pub fn realign_y(&self, order: &[usize]) -> Result<PairedSample> {
        PairedSample::new(self.x.clone(), self.y.select(order))
    }
}

/// The three sums `T1`, `T2`, `T3`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct DcovTerms {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
}

impl DcovTerms {
    /// `T1 + T2 − 2·T3` before clamping.
    pub fn raw(&self) -> f64 {
        self.t1 + self.t2 - 2.0 * self.t3
    }

    /// Rounding scale used by the clamp and zero-denominator thresholds.
    pub fn scale(&self) -> f64 {
        self.t2 + f64::EPSILON
    }

    /// `raw()` with rounding-level negatives set to zero.
    pub fn clamped(&self) -> f64 {
        self.raw().max(0.0)
    }
}

/// Sample distance covariances and correlation for one norm pair.
#[derive(Clone, Debug, PartialEq)]
pub struct DcovEstimate {
    pub v_xy: f64,
    pub v_xx: f64,
    pub v_yy: f64,
    pub r: f64,
    pub terms_xy: DcovTerms,
    pub terms_xx: DcovTerms,
    pub terms_yy: DcovTerms,
    pub n: usize,
    pub spec_x: NormSpec,
    pub spec_y: NormSpec,
}

/// Distance matrix of one margin with its row sums and grand total.
#[derive(Clone, Debug)]
pub struct MarginalDistances {
    dist: DistanceMatrix,
    row_sums: Vec<f64>,
    total: f64,
}

impl MarginalDistances {
    pub fn new(points: &PointSet, spec: &NormSpec) -> Result<Self> {
        Ok(Self::from_matrix(pairwise_distance_matrix(points, spec)?))
    }

    pub fn from_matrix(dist: DistanceMatrix) -> Self {
        let row_sums = par::map_indexed(dist.len(), |k| exact_sum(dist.row(k).iter().copied()));
        let total = exact_sum(row_sums.iter().copied());
        MarginalDistances { dist, row_sums, total }
    }

    pub fn len(&self) -> usize {
        self.dist.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dist.is_empty()
    }

    pub fn matrix(&self) -> &DistanceMatrix {
        &self.dist
    }

    pub fn row_sums(&self) -> &[f64] {
        &self.row_sums
    }

    pub fn total(&self) -> f64 {
        self.total
    }
}

/// `T1, T2, T3` for two margins, with `y` re-paired through `perm` when given
/// (observation `k` is matched with `y_{perm[k]}`).
pub fn terms_from_marginals(mx: &MarginalDistances, my: &MarginalDistances, perm: Option<&[usize]>) -> DcovTerms {
    let n = mx.len();
    debug_assert_eq!(n, my.len());
    let idx = |k: usize| perm.map_or(k, |p| p[k]);
    // Σ_{k,l} dx·dy over ordered pairs is twice the sum over k < l.
    let rows: Vec<ExactSum> = par::map_indexed(n, |k| {
        let dx = mx.dist.row(k);
        let dy = my.dist.row(idx(k));
        let mut acc = ExactSum::new();
        match perm {
            None => {
                for l in k + 1..n {
                    acc.add(dx[l] * dy[l]);
                }
            }
            Some(p) => {
                for l in k + 1..n {
                    acc.add(dx[l] * dy[p[l]]);
                }
            }
        }
        acc
    });
    let mut cross = ExactSum::new();
    for acc in &rows {
        cross.merge(acc);
    }
    let triple = exact_sum((0..n).map(|k| mx.row_sums[k] * my.row_sums[idx(k)]));
    let nf = n as f64;
    let n2 = nf * nf;
    DcovTerms {
        t1: 2.0 * cross.value() / n2,
        t2: (mx.total / n2) * (my.total / n2),
        t3: triple / (n2 * nf),
    }
}

/// `T1, T2, T3` from two distance matrices of the same size.
pub fn terms(dx: &DistanceMatrix, dy: &DistanceMatrix) -> Result<DcovTerms> {
    if dx.len() != dy.len() {
        return Err(Error::SizeMismatch {
            left: dx.len(),
            right: dy.len(),
        });
    }
    if dx.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mx = MarginalDistances::from_matrix(dx.clone());
    let my = MarginalDistances::from_matrix(dy.clone());
    Ok(terms_from_marginals(&mx, &my, None))
}

/// `R_n` from its three ingredients, applying the zero-denominator rule.
pub fn correlation(v_xy: f64, v_xx: f64, v_yy: f64, scale: f64) -> f64 {
    let denom = v_xx * v_yy;
    if denom > DENOM_FLOOR * scale * scale {
        (v_xy / denom.sqrt()).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

pub(crate) fn estimate_from_marginals(
    mx: &MarginalDistances,
    my: &MarginalDistances,
    spec_x: &NormSpec,
    spec_y: &NormSpec,
) -> DcovEstimate {
    let terms_xy = terms_from_marginals(mx, my, None);
    let terms_xx = terms_from_marginals(mx, mx, None);
    let terms_yy = terms_from_marginals(my, my, None);
    let v_xy = terms_xy.clamped();
    let v_xx = terms_xx.clamped();
    let v_yy = terms_yy.clamped();
    DcovEstimate {
        v_xy,
        v_xx,
        v_yy,
        r: correlation(v_xy, v_xx, v_yy, terms_xy.scale()),
        terms_xy,
        terms_xx,
        terms_yy,
        n: mx.len(),
        spec_x: spec_x.clone(),
        spec_y: spec_y.clone(),
    }
}

/// Distance covariance `V_n(X,Y)`, the marginal `V_n(X)`, `V_n(Y)` and the
/// correlation `R_n` for a paired sample.
pub fn v_n(sample: &PairedSample, spec_x: &NormSpec, spec_y: &NormSpec) -> Result<DcovEstimate> {
    let mx = MarginalDistances::new(sample.x(), spec_x)?;
    let my = MarginalDistances::new(sample.y(), spec_y)?;
    Ok(estimate_from_marginals(&mx, &my, spec_x, spec_y))
}

/// Distance correlation `R_n(X,Y)`; zero when `V_n(X)·V_n(Y)` vanishes.
pub fn r_n(sample: &PairedSample, spec_x: &NormSpec, spec_y: &NormSpec) -> Result<f64> {
    Ok(v_n(sample, spec_x, spec_y)?.r)
}
