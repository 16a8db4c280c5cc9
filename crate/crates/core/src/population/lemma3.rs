use crate::error::{Error, Result};
use crate::norms::PointSet;

use super::{check_probs, DiscreteJoint, MAX_SUPPORT};

/// A finite-support law on `R^dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteDist {
    points: PointSet,
    probs: Vec<f64>,
}

impl DiscreteDist {
    pub fn new(points: PointSet, probs: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points.len() != probs.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} atoms, {} probabilities",
                points.len(),
                probs.len()
            )));
        }
        check_probs(&probs)?;
        Ok(DiscreteDist { points, probs })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R], probs: Vec<f64>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidDistribution("no atoms".into()));
        }
        Self::new(PointSet::from_rows(rows)?, probs)
    }

    /// Point mass at the origin of `R^dim` (`dim` may be zero).
    pub fn degenerate(dim: usize) -> Self {
        DiscreteDist {
            points: PointSet::new(1, dim, vec![0.0; dim]).expect("consistent layout"),
            probs: vec![1.0],
        }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.dim()
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

/// A pair `X = (X1 + X2, X3)`, `Y = (Y1 + Y2, Y3)` where `(X1, Y1)` has an
/// arbitrary joint law and `X2, X3, Y2, Y3` are mutually independent and
/// independent of `(X1, Y1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteDependenceSpec {
    core: DiscreteJoint,
    x2: DiscreteDist,
    x3: DiscreteDist,
    y2: DiscreteDist,
    y3: DiscreteDist,
}

impl FiniteDependenceSpec {
    pub fn new(
        core: DiscreteJoint,
        x2: DiscreteDist,
        x3: DiscreteDist,
        y2: DiscreteDist,
        y3: DiscreteDist,
    ) -> Result<Self> {
        let (p1, q1) = core.dims();
        for (expected, found) in [(p1, x2.dim()), (q1, y2.dim())] {
            if expected != found {
                return Err(Error::DimensionMismatch { expected, found });
            }
        }
        Ok(FiniteDependenceSpec { core, x2, x3, y2, y3 })
    }

    /// All noise components fixed at zero, with `p2` and `q2` trailing
    /// coordinates.
    pub fn degenerate_noise(core: DiscreteJoint, p2: usize, q2: usize) -> Self {
        let (p1, q1) = core.dims();
        FiniteDependenceSpec {
            core,
            x2: DiscreteDist::degenerate(p1),
            x3: DiscreteDist::degenerate(p2),
            y2: DiscreteDist::degenerate(q1),
            y3: DiscreteDist::degenerate(q2),
        }
    }

    pub fn core(&self) -> &DiscreteJoint {
        &self.core
    }

    /// `(p1, p2, q1, q2)`.
    pub fn dims(&self) -> (usize, usize, usize, usize) {
        let (p1, q1) = self.core.dims();
        (p1, self.x3.dim(), q1, self.y3.dim())
    }

    pub fn support_size(&self) -> usize {
        [
            self.core.len(),
            self.x2.len(),
            self.x3.len(),
            self.y2.len(),
            self.y3.len(),
        ]
        .iter()
        .fold(1usize, |acc, &k| acc.saturating_mul(k))
    }
}

/// Enumerates the full joint of `(X, Y)` as a product measure over the
/// independent blocks.
pub fn lemma3_joint(spec: &FiniteDependenceSpec) -> Result<DiscreteJoint> {
    let size = spec.support_size();
    if size > MAX_SUPPORT {
        return Err(Error::SupportTooLarge {
            size,
            limit: MAX_SUPPORT,
        });
    }
    let (p1, p2, q1, q2) = spec.dims();
    let mut xs = Vec::with_capacity(size * (p1 + p2));
    let mut ys = Vec::with_capacity(size * (q1 + q2));
    let mut probs = Vec::with_capacity(size);
    let core = &spec.core;
    for c in 0..core.len() {
        let (x1, y1) = (core.x().row(c), core.y().row(c));
        for a in 0..spec.x2.len() {
            let x2 = spec.x2.points().row(a);
            for b in 0..spec.x3.len() {
                let x3 = spec.x3.points().row(b);
                for d in 0..spec.y2.len() {
                    let y2 = spec.y2.points().row(d);
                    for e in 0..spec.y3.len() {
                        let y3 = spec.y3.points().row(e);
                        xs.extend(x1.iter().zip(x2).map(|(u, v)| u + v));
                        xs.extend_from_slice(x3);
                        ys.extend(y1.iter().zip(y2).map(|(u, v)| u + v));
                        ys.extend_from_slice(y3);
                        probs.push(
                            core.probs()[c]
                                * spec.x2.probs()[a]
                                * spec.x3.probs()[b]
                                * spec.y2.probs()[d]
                                * spec.y3.probs()[e],
                        );
                    }
                }
            }
        }
    }
    DiscreteJoint::new(
        PointSet::new(size, p1 + p2, xs)?,
        PointSet::new(size, q1 + q2, ys)?,
        probs,
    )
}
