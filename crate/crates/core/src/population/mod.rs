//! Exact population distance covariance on finite-support joint laws.
//!
//! [`v0_exact`] evaluates the defining expectations `T10`, `T20`, `T30` as
//! finite sums. Two algebraically independent routes serve as cross-checks:
//! the doubly centred Brownian covariance kernel ([`brownian_kernel_v0`]) and
//! the weighted characteristic-function integral ([`cf_integral_v0_1d`]).

mod cf;
mod lemma3;

pub use cf::{cf_integral_report, cf_integral_v0_1d, CfIntegralConfig, CfIntegralReport};
pub use lemma3::{lemma3_joint, DiscreteDist, FiniteDependenceSpec};

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::dcov::correlation;
use crate::error::{Error, Result};
use crate::exact::{exact_sum, ExactSum};
use crate::norms::{pairwise_distance_matrix, NormSpec, PointSet};
use crate::par;

/// Largest support handled by the exact cubic-cost sums.
pub const MAX_SUPPORT: usize = 200;
/// Tolerance on `|Σp − 1|`.
pub const PROB_TOL: f64 = 1e-12;

/// A joint law of `(X, Y)` with finitely many atoms.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteJoint {
    x: PointSet,
    y: PointSet,
    probs: Vec<f64>,
}

impl DiscreteJoint {
    pub fn new(x: PointSet, y: PointSet, probs: Vec<f64>) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::InvalidDistribution("no atoms".into()));
        }
        if x.len() != y.len() || x.len() != probs.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} x atoms, {} y atoms, {} probabilities",
                x.len(),
                y.len(),
                probs.len()
            )));
        }
        check_probs(&probs)?;
        if x.as_slice().iter().chain(y.as_slice()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidDistribution("non-finite atom coordinate".into()));
        }
        Ok(DiscreteJoint { x, y, probs })
    }

    /// Builds a joint from `(x, y, p)` triples.
    pub fn from_atoms<A: AsRef<[f64]>, B: AsRef<[f64]>>(atoms: &[(A, B, f64)]) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidDistribution("no atoms".into()));
        }
        let xs: Vec<&[f64]> = atoms.iter().map(|a| a.0.as_ref()).collect();
        let ys: Vec<&[f64]> = atoms.iter().map(|a| a.1.as_ref()).collect();
        let x = PointSet::from_rows(&xs)?;
        let y = PointSet::from_rows(&ys)?;
        Self::new(x, y, atoms.iter().map(|a| a.2).collect())
    }

    /// The product law of two independent marginals.
    pub fn independent(px: &DiscreteDist, py: &DiscreteDist) -> Result<Self> {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let mut probs = Vec::new();
        for i in 0..px.len() {
            for j in 0..py.len() {
                xs.push(px.points().row(i).to_vec());
                ys.push(py.points().row(j).to_vec());
                probs.push(px.probs()[i] * py.probs()[j]);
            }
        }
        let x = PointSet::new(xs.len(), px.points().dim(), xs.concat())?;
        let y = PointSet::new(ys.len(), py.points().dim(), ys.concat())?;
        Self::new(x, y, probs)
    }

    /// `X = Y` distributed as `d`.
    pub fn diagonal(d: &DiscreteDist) -> Result<Self> {
        Self::new(d.points().clone(), d.points().clone(), d.probs().to_vec())
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn x(&self) -> &PointSet {
        &self.x
    }

    pub fn y(&self) -> &PointSet {
        &self.y
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.x.dim(), self.y.dim())
    }

    /// Same law with every atom mapped through `fx`, `fy`.
    pub fn map_atoms(&self, fx: impl Fn(&[f64]) -> Vec<f64>, fy: impl Fn(&[f64]) -> Vec<f64>) -> Result<Self> {
        let xs: Vec<Vec<f64>> = self.x.rows().map(&fx).collect();
        let ys: Vec<Vec<f64>> = self.y.rows().map(&fy).collect();
        Self::new(PointSet::from_rows(&xs)?, PointSet::from_rows(&ys)?, self.probs.clone())
    }

    /// Collapses repeated atoms: distinct x values, distinct y values (both
    /// in first-occurrence order) and the joint mass table `P[a][b]`.
    pub fn contingency(&self) -> Contingency {
        let (x_index, x_values) = distinct(&self.x);
        let (y_index, y_values) = distinct(&self.y);
        let mut mass = vec![vec![ExactSum::new(); y_values.len()]; x_values.len()];
        for (k, &p) in self.probs.iter().enumerate() {
            mass[x_index[k]][y_index[k]].add(p);
        }
        let mass: Vec<Vec<f64>> = mass
            .iter()
            .map(|row| row.iter().map(ExactSum::value).collect())
            .collect();
        let px: Vec<f64> = mass.iter().map(|row| exact_sum(row.iter().copied())).collect();
        let py: Vec<f64> = (0..y_values.len())
            .map(|b| exact_sum(mass.iter().map(|row| row[b])))
            .collect();
        Contingency {
            x_values,
            y_values,
            mass,
            px,
            py,
        }
    }
}

/// Joint mass table over distinct x and y values.
#[derive(Clone, Debug)]
pub struct Contingency {
    pub x_values: Vec<Vec<f64>>,
    pub y_values: Vec<Vec<f64>>,
    pub mass: Vec<Vec<f64>>,
    pub px: Vec<f64>,
    pub py: Vec<f64>,
}

impl Contingency {
    /// `max |P(a,b) − P(a)P(b)|`; zero exactly when the law factorises.
    pub fn dependence_gap(&self) -> f64 {
        let mut gap = 0.0f64;
        for (a, row) in self.mass.iter().enumerate() {
            for (b, &p) in row.iter().enumerate() {
                gap = gap.max((p - self.px[a] * self.py[b]).abs());
            }
        }
        gap
    }
}

fn distinct(points: &PointSet) -> (Vec<usize>, Vec<Vec<f64>>) {
    let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut values = Vec::new();
    let index = points
        .rows()
        .map(|row| {
            // +0.0 and -0.0 are the same atom.
            let key: Vec<u64> = row.iter().map(|v| (v + 0.0).to_bits()).collect();
            *seen.entry(key).or_insert_with(|| {
                values.push(row.to_vec());
                values.len() - 1
            })
        })
        .collect();
    (index, values)
}

pub(crate) fn check_probs(probs: &[f64]) -> Result<()> {
    if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
        return Err(Error::InvalidDistribution(format!(
            "probability {p} is negative or not finite"
        )));
    }
    let total = exact_sum(probs.iter().copied());
    if (total - 1.0).abs() > PROB_TOL {
        return Err(Error::InvalidDistribution(format!(
            "probabilities sum to {total}, not 1"
        )));
    }
    Ok(())
}

/// Population quantities `T10, T20, T30, V_0(X,Y), V_0(X), V_0(Y), R_0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PopulationDcov {
    pub t10: f64,
    pub t20: f64,
    pub t30: f64,
    pub v0: f64,
    pub v0_x: f64,
    pub v0_y: f64,
    pub r0: f64,
}

#[derive(Clone, Copy, Debug)]
struct PopulationTerms {
    t10: f64,
    t20: f64,
    t30: f64,
}

impl PopulationTerms {
    fn value(&self) -> f64 {
        (self.t10 + self.t20 - 2.0 * self.t30).max(0.0)
    }
}

fn population_terms(dx: &[f64], dy: &[f64], probs: &[f64]) -> PopulationTerms {
    let s = probs.len();
    let at = |d: &[f64], i: usize, j: usize| d[i * s + j];
    let t10 = exact_sum((0..s).flat_map(|i| (0..s).map(move |j| probs[i] * probs[j] * at(dx, i, j) * at(dy, i, j))));
    let ex = exact_sum((0..s).flat_map(|i| (0..s).map(move |j| probs[i] * probs[j] * at(dx, i, j))));
    let ey = exact_sum((0..s).flat_map(|i| (0..s).map(move |j| probs[i] * probs[j] * at(dy, i, j))));
    // E‖X1 − X2‖‖Y1 − Y3‖ summed over all triples of atoms.
    let per_i: Vec<ExactSum> = par::map_indexed(s, |i| {
        let mut acc = ExactSum::new();
        for j in 0..s {
            let a = probs[i] * probs[j] * at(dx, i, j);
            if a == 0.0 {
                continue;
            }
            for (k, pk) in probs.iter().enumerate() {
                acc.add(a * pk * at(dy, i, k));
            }
        }
        acc
    });
    let mut t30 = ExactSum::new();
    for acc in &per_i {
        t30.merge(acc);
    }
    PopulationTerms {
        t10,
        t20: ex * ey,
        t30: t30.value(),
    }
}

/// Exact `V_0` and `R_0` for a finite-support joint law.
pub fn v0_exact(joint: &DiscreteJoint, spec_x: &NormSpec, spec_y: &NormSpec) -> Result<PopulationDcov> {
    if joint.len() > MAX_SUPPORT {
        return Err(Error::SupportTooLarge {
            size: joint.len(),
            limit: MAX_SUPPORT,
        });
    }
    let dx = pairwise_distance_matrix(joint.x(), spec_x)?;
    let dy = pairwise_distance_matrix(joint.y(), spec_y)?;
    let p = joint.probs();
    let xy = population_terms(dx.as_slice(), dy.as_slice(), p);
    let xx = population_terms(dx.as_slice(), dx.as_slice(), p);
    let yy = population_terms(dy.as_slice(), dy.as_slice(), p);
    let (v0, v0_x, v0_y) = (xy.value(), xx.value(), yy.value());
    Ok(PopulationDcov {
        t10: xy.t10,
        t20: xy.t20,
        t30: xy.t30,
        v0,
        v0_x,
        v0_y,
        r0: correlation(v0, v0_x, v0_y, xy.t20 + f64::EPSILON),
    })
}

/// `V_0` as the covariance of Brownian-type fields evaluated at the data:
/// `E[W(X)W(X′)W′(Y)W′(Y′)]` with the covariance kernel
/// `k(s,t) = ‖s‖ + ‖t‖ − ‖s − t‖`, where each kernel is doubly centred with
/// respect to its marginal before taking the expectation.
pub fn brownian_kernel_v0(joint: &DiscreteJoint, spec_x: &NormSpec, spec_y: &NormSpec) -> Result<f64> {
    let kx = centered_kernel(joint.x(), spec_x, joint.probs())?;
    let ky = centered_kernel(joint.y(), spec_y, joint.probs())?;
    let p = joint.probs();
    let s = p.len();
    Ok(exact_sum((0..s).flat_map(|i| {
        let (kx, ky) = (&kx, &ky);
        (0..s).map(move |j| p[i] * p[j] * kx[i * s + j] * ky[i * s + j])
    })))
}

fn centered_kernel(points: &PointSet, spec: &NormSpec, probs: &[f64]) -> Result<Vec<f64>> {
    let s = points.len();
    let norms: Vec<f64> = points.rows().map(|r| spec.norm(r)).collect::<Result<_>>()?;
    let d = pairwise_distance_matrix(points, spec)?;
    let k: Vec<f64> = (0..s * s)
        .map(|ij| {
            let (i, j) = (ij / s, ij % s);
            norms[i] + norms[j] - d.get(i, j)
        })
        .collect();
    let row_mean: Vec<f64> = (0..s)
        .map(|i| exact_sum((0..s).map(|j| probs[j] * k[i * s + j])))
        .collect();
    let grand = exact_sum((0..s).map(|i| probs[i] * row_mean[i]));
    Ok((0..s * s)
        .map(|ij| {
            let (i, j) = (ij / s, ij % s);
            k[ij] - row_mean[i] - row_mean[j] + grand
        })
        .collect())
}

/// JSON layout for joints: `{"atoms": [{"x": [...], "y": [...], "p": r}]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointDocument {
    pub atoms: Vec<AtomRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomRecord {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub p: f64,
}

impl TryFrom<JointDocument> for DiscreteJoint {
    type Error = Error;

    fn try_from(doc: JointDocument) -> Result<Self> {
        let atoms: Vec<(Vec<f64>, Vec<f64>, f64)> = doc.atoms.into_iter().map(|a| (a.x, a.y, a.p)).collect();
        DiscreteJoint::from_atoms(&atoms).map_err(|e| match e {
            Error::DimensionMismatch { expected, found } => {
                Error::InvalidDistribution(format!("atoms have inconsistent dimensions ({expected} vs {found})"))
            }
            other => other,
        })
    }
}

impl From<&DiscreteJoint> for JointDocument {
    fn from(joint: &DiscreteJoint) -> Self {
        JointDocument {
            atoms: (0..joint.len())
                .map(|k| AtomRecord {
                    x: joint.x().row(k).to_vec(),
                    y: joint.y().row(k).to_vec(),
                    p: joint.probs()[k],
                })
                .collect(),
        }
    }
}
