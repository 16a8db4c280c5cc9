//! Finite-dimensional representations of functional and `ℓ2` data.
//!
//! Functions on `[0, 1]` are tabulated on a shared grid and integrated with
//! the trapezoid rule. A [`BasisModel`] holds unit-norm basis functions
//! `φ_i` and scale constants `λ_i` for expansions
//! `X(t) = Σ λ_i Z_i φ_i(t)`. [`embed`] maps tabulated samples to
//! coefficient vectors whose induced norm reproduces the function-space
//! `L2` norm, so distance statistics can be computed on coefficients.

mod ell2;
mod simulate;

pub use ell2::{ell2_truncate, Ell2Truncation};
pub use simulate::{
    finite_dependence_latents, finite_dependence_sample, simulate_kl, FiniteDependenceConfig, KlSample, ZDist,
};

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::exact::exact_sum;
use crate::norms::{validate_spd, NormSpec, PointSet, SpdMatrix, DEFAULT_EIG_FLOOR, DEFAULT_TOL_SYM};
use crate::par;

/// Default number of grid points on `[0, 1]`.
pub const DEFAULT_GRID: usize = 512;
/// Tolerance for unit-norm and orthonormality checks under quadrature.
pub const QUAD_TOL: f64 = 1e-6;

/// `points` equally spaced values from 0 to 1 inclusive.
pub fn uniform_grid(points: usize) -> Vec<f64> {
    let last = (points.max(2) - 1) as f64;
    (0..points).map(|j| j as f64 / last).collect()
}

fn trapezoid_weights(grid: &[f64]) -> Vec<f64> {
    let g = grid.len();
    (0..g)
        .map(|j| {
            let left = if j == 0 { grid[0] } else { grid[j - 1] };
            let right = if j + 1 == g { grid[g - 1] } else { grid[j + 1] };
            (right - left) / 2.0
        })
        .collect()
}

/// Tabulated basis functions with their expansion constants.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisModel {
    id: String,
    grid: Vec<f64>,
    weights: Vec<f64>,
    basis: Vec<Vec<f64>>,
    lambdas: Vec<f64>,
    orthonormal: bool,
}

impl BasisModel {
    /// Validates and builds a model. Every basis function must have unit
    /// `L2` norm within [`QUAD_TOL`]; an `orthonormal` claim is checked
    /// against the Gram matrix.
    pub fn new(
        id: impl Into<String>,
        grid: Vec<f64>,
        basis: Vec<Vec<f64>>,
        lambdas: Vec<f64>,
        orthonormal: bool,
    ) -> Result<Self> {
        if basis.is_empty() {
            return Err(Error::EmptyBasis);
        }
        if grid.len() < 2 {
            return Err(Error::BadConfig("grid needs at least two points".into()));
        }
        if grid
            .windows(2)
            .any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater))
            || grid[0] < 0.0
            || grid[grid.len() - 1] > 1.0
        {
            return Err(Error::BadConfig(
                "grid must be strictly increasing within [0, 1]".into(),
            ));
        }
        if let Some(row) = basis.iter().find(|row| row.len() != grid.len()) {
            return Err(Error::GridMismatch {
                expected: grid.len(),
                found: row.len(),
            });
        }
        if lambdas.len() != basis.len() {
            return Err(Error::LengthMismatch {
                expected: basis.len(),
                found: lambdas.len(),
            });
        }
        if lambdas.iter().any(|l| !l.is_finite()) {
            return Err(Error::BadConfig("lambdas must be finite".into()));
        }
        if lambdas.windows(2).any(|w| w[1].abs() > w[0].abs()) {
            return Err(Error::BadConfig("lambdas must be nonincreasing in magnitude".into()));
        }
        let model = BasisModel {
            id: id.into(),
            weights: trapezoid_weights(&grid),
            grid,
            basis,
            lambdas,
            orthonormal,
        };
        for (i, phi) in model.basis.iter().enumerate() {
            let sq = model.inner(phi, phi);
            if (sq - 1.0).abs() > QUAD_TOL {
                return Err(Error::BadConfig(format!(
                    "basis function {} has squared norm {sq}, expected 1",
                    i + 1
                )));
            }
        }
        if orthonormal {
            let m = model.m_full();
            for i in 0..m {
                for j in 0..i {
                    let a = model.inner(&model.basis[i], &model.basis[j]);
                    if a.abs() > QUAD_TOL {
                        return Err(Error::BadConfig(format!(
                            "basis claimed orthonormal but <φ{}, φ{}> = {a}",
                            i + 1,
                            j + 1
                        )));
                    }
                }
            }
        }
        Ok(model)
    }

    /// Orthonormal trigonometric basis `1, √2 sin 2πkt, √2 cos 2πkt, …`
    /// with one function per lambda.
    pub fn fourier(grid_points: usize, lambdas: Vec<f64>) -> Result<Self> {
        let grid = uniform_grid(grid_points);
        let basis = (0..lambdas.len())
            .map(|i| {
                grid.iter()
                    .map(|&t| {
                        if i == 0 {
                            1.0
                        } else {
                            let k = i.div_ceil(2) as f64;
                            if i % 2 == 1 {
                                2f64.sqrt() * (2.0 * PI * k * t).sin()
                            } else {
                                2f64.sqrt() * (2.0 * PI * k * t).cos()
                            }
                        }
                    })
                    .collect()
            })
            .collect();
        Self::new("fourier", grid, basis, lambdas, true)
    }

    /// Non-orthogonal basis `t^{i−1}`, each rescaled to unit norm under the
    /// grid quadrature. Its Gram matrix is badly conditioned beyond a handful
    /// of functions.
    pub fn monomial(grid_points: usize, lambdas: Vec<f64>) -> Result<Self> {
        let grid = uniform_grid(grid_points);
        let weights = trapezoid_weights(&grid);
        let basis = (0..lambdas.len())
            .map(|i| {
                let raw: Vec<f64> = grid.iter().map(|&t| t.powi(i as i32)).collect();
                let norm = exact_sum(raw.iter().zip(&weights).map(|(v, w)| v * v * w)).sqrt();
                raw.into_iter().map(|v| v / norm).collect()
            })
            .collect();
        Self::new("monomial", grid, basis, lambdas, false)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn m_full(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self, i: usize) -> &[f64] {
        &self.basis[i]
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn is_orthonormal(&self) -> bool {
        self.orthonormal
    }

    /// Trapezoid-rule `∫ f g` on the model grid.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        exact_sum(f.iter().zip(g).zip(&self.weights).map(|((a, b), w)| a * b * w))
    }

    /// Quadrature `L2` norm of a tabulated function.
    pub fn l2_norm(&self, f: &[f64]) -> f64 {
        self.inner(f, f).max(0.0).sqrt()
    }

    /// `Σ_i c_i φ_i` on the grid.
    pub fn reconstruct(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.len()];
        for (c, phi) in coeffs.iter().zip(&self.basis) {
            for (o, p) in out.iter_mut().zip(phi) {
                *o += c * p;
            }
        }
        out
    }

    /// `Σ_{i>m} λ_i²`, the expected squared error of truncating the expansion
    /// after `m` terms.
    pub fn tail_energy(&self, m: usize) -> f64 {
        exact_sum(self.lambdas.iter().skip(m).map(|l| l * l))
    }

    /// `Σ_{i,j>m} λ_i λ_j a_ij` over the tabulated tail; must shrink to zero
    /// as `m` grows for the truncated expansions to converge.
    pub fn tail_condition(&self, m: usize) -> f64 {
        let tail = m.min(self.m_full())..self.m_full();
        exact_sum(
            tail.clone()
                .flat_map(|i| tail.clone().map(move |j| (i, j)))
                .map(|(i, j)| self.lambdas[i] * self.lambdas[j] * self.inner(&self.basis[i], &self.basis[j])),
        )
    }

    fn check_truncation(&self, m: usize) -> Result<()> {
        if m == 0 || m > self.m_full() {
            return Err(Error::BadConfig(format!(
                "truncation {m} outside 1..={}",
                self.m_full()
            )));
        }
        Ok(())
    }
}

/// Inner products `a_ij = ∫ φ_i φ_j` of the first `m` basis functions.
#[derive(Clone, Debug, PartialEq)]
pub struct GramMatrix {
    matrix: SpdMatrix,
    rule: &'static str,
}

impl GramMatrix {
    pub fn matrix(&self) -> &SpdMatrix {
        &self.matrix
    }

    pub fn rule(&self) -> &'static str {
        self.rule
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// `max_ij |a_ij − δ_ij|`.
    pub fn deviation_from_identity(&self) -> f64 {
        let m = self.matrix.matrix();
        let mut dev = 0.0f64;
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let target = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((m[(i, j)] - target).abs());
            }
        }
        dev
    }
}

/// Gram matrix of the first `m` basis functions, checked to be positive
/// definite.
pub fn gram(model: &BasisModel, m: usize) -> Result<GramMatrix> {
    model.check_truncation(m)?;
    let mut a = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..=i {
            let v = model.inner(&model.basis[i], &model.basis[j]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    Ok(GramMatrix {
        matrix: validate_spd(&a, DEFAULT_TOL_SYM, DEFAULT_EIG_FLOOR)?,
        rule: "trapezoid",
    })
}

/// Coefficient representation of a set of tabulated functions.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingResult {
    pub coeffs: PointSet,
    pub truncation: usize,
    /// Euclidean for orthonormal models, weighted by the Gram matrix
    /// otherwise; either way `‖c‖ = ‖Σ c_i φ_i‖_{L2}`.
    pub norm: NormSpec,
    pub gram: GramMatrix,
    /// `Σ_{i>m} λ_i²` from the model constants.
    pub predicted_tail_error: f64,
    /// `Σ_{i,j>m} λ_i λ_j a_ij` over the tabulated tail.
    pub tail_condition: f64,
}

/// Projects tabulated samples onto the span of the first `m` basis
/// functions. Inner products `b = (∫ φ_i X)_i` are solved through the Gram
/// matrix when the basis is not orthonormal (least-squares projection).
pub fn embed<R: AsRef<[f64]> + Sync>(samples: &[R], model: &BasisModel, m: usize) -> Result<EmbeddingResult> {
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some(s) = samples.iter().find(|s| s.as_ref().len() != model.grid.len()) {
        return Err(Error::GridMismatch {
            expected: model.grid.len(),
            found: s.as_ref().len(),
        });
    }
    let gram = gram(model, m)?;
    let solver = if model.orthonormal {
        None
    } else {
        Some(
            gram.matrix()
                .matrix()
                .clone()
                .cholesky()
                .ok_or(Error::NotPositiveDefinite {
                    min_eigenvalue: f64::NAN,
                    floor: DEFAULT_EIG_FLOOR,
                })?,
        )
    };
    let rows: Vec<Vec<f64>> = par::map_indexed(samples.len(), |k| {
        let x = samples[k].as_ref();
        let b: Vec<f64> = (0..m).map(|i| model.inner(&model.basis[i], x)).collect();
        match &solver {
            None => b,
            Some(chol) => chol.solve(&DVector::from_vec(b)).iter().copied().collect(),
        }
    });
    let norm = if model.orthonormal {
        NormSpec::euclidean(m)
    } else {
        NormSpec::weighted(gram.matrix().clone())
    };
    Ok(EmbeddingResult {
        coeffs: PointSet::from_rows(&rows)?,
        truncation: m,
        norm,
        predicted_tail_error: model.tail_energy(m),
        tail_condition: model.tail_condition(m),
        gram,
    })
}

impl EmbeddingResult {
    /// The projected function for sample `k`.
    pub fn reconstruct(&self, model: &BasisModel, k: usize) -> Vec<f64> {
        model.reconstruct(self.coeffs.row(k))
    }

    /// Mean squared quadrature distance between each sample and its
    /// projection.
    pub fn mean_squared_error<R: AsRef<[f64]>>(&self, samples: &[R], model: &BasisModel) -> f64 {
        let errs = samples.iter().enumerate().map(|(k, s)| {
            let diff: Vec<f64> = s
                .as_ref()
                .iter()
                .zip(self.reconstruct(model, k))
                .map(|(a, b)| a - b)
                .collect();
            model.inner(&diff, &diff)
        });
        exact_sum(errs) / samples.len() as f64
    }
}
