//! Norms on finite-dimensional coordinate spaces and the pairwise distance
//! matrices built from them.
//!
//! A [`NormSpec`] is either the Euclidean norm or a quadratic-form norm
//! `‖x‖_A = √(xᵀAx)` for a symmetric positive definite weight `A`.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::par;

/// Default tolerance on `max |M_ij − M_ji|` accepted by [`validate_spd`].
pub const DEFAULT_TOL_SYM: f64 = 1e-9;
/// Default lower bound on eigenvalues accepted by [`validate_spd`].
pub const DEFAULT_EIG_FLOOR: f64 = 1e-12;

/// `n` points of dimension `dim`, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    n: usize,
    dim: usize,
    data: Vec<f64>,
}

impl PointSet {
    pub fn new(n: usize, dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * dim {
            return Err(Error::LengthMismatch {
                expected: n * dim,
                found: data.len(),
            });
        }
        Ok(PointSet { n, dim, data })
    }

    /// Builds a point set from rows; every row must have the same length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let first = rows.first().ok_or(Error::EmptyInput)?;
        let dim = first.as_ref().len();
        let mut data = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(PointSet {
            n: rows.len(),
            dim,
            data,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.n).map(move |i| self.row(i))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    /// Reorders points so that row `i` of the result is row `order[i]` here.
    pub fn select(&self, order: &[usize]) -> PointSet {
        let mut data = Vec::with_capacity(order.len() * self.dim);
        for &i in order {
            data.extend_from_slice(self.row(i));
        }
        PointSet {
            n: order.len(),
            dim: self.dim,
            data,
        }
    }

    /// Applies `x ↦ M x` to every point.
    pub fn linear_map(&self, m: &DMatrix<f64>) -> Result<PointSet> {
        if m.ncols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: m.ncols(),
                found: self.dim,
            });
        }
        let out_dim = m.nrows();
        let mut data = Vec::with_capacity(self.n * out_dim);
        for row in self.rows() {
            for r in 0..out_dim {
                data.push((0..self.dim).map(|c| m[(r, c)] * row[c]).sum());
            }
        }
        Ok(PointSet {
            n: self.n,
            dim: out_dim,
            data,
        })
    }

    /// Returns a copy with `f` applied to every coordinate.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> PointSet {
        PointSet {
            n: self.n,
            dim: self.dim,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }
}

/// A symmetric positive definite matrix that passed [`validate_spd`].
#[derive(Clone, Debug, PartialEq)]
pub struct SpdMatrix(DMatrix<f64>);

impl SpdMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        validate_spd(&m, DEFAULT_TOL_SYM, DEFAULT_EIG_FLOOR)
    }

    pub fn identity(dim: usize) -> Self {
        SpdMatrix(DMatrix::identity(dim, dim))
    }

    pub fn diagonal(weights: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(weights)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    /// The symmetric positive definite square root.
    pub fn sqrt(&self) -> DMatrix<f64> {
        spd_sqrt(self)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|r| (0..self.dim()).map(|c| self.0[(r, c)]).collect())
            .collect()
    }
}

/// Checks that `m` is square, symmetric within `tol_sym` (max absolute
/// asymmetry) and has every eigenvalue above `eig_floor`. Returns the
/// symmetrised matrix `(M + Mᵀ)/2`.
pub fn validate_spd(m: &DMatrix<f64>, tol_sym: f64, eig_floor: f64) -> Result<SpdMatrix> {
    let (rows, cols) = m.shape();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    if rows == 0 {
        return Err(Error::EmptyInput);
    }
    let mut asymmetry = 0.0f64;
    for r in 0..rows {
        for c in 0..r {
            let d = (m[(r, c)] - m[(c, r)]).abs();
            if d.is_nan() {
                asymmetry = f64::NAN;
            } else {
                asymmetry = asymmetry.max(d);
            }
        }
    }
    if asymmetry.is_nan() || asymmetry > tol_sym {
        return Err(Error::NotSymmetric {
            asymmetry,
            tolerance: tol_sym,
        });
    }
    let sym = (m + m.transpose()) * 0.5;
    if sym.iter().any(|v| !v.is_finite()) {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: f64::NAN,
            floor: eig_floor,
        });
    }
    let min_eigenvalue = sym
        .clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if min_eigenvalue <= eig_floor {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue,
            floor: eig_floor,
        });
    }
    Ok(SpdMatrix(sym))
}

/// Symmetric square root `S` with `S·S = M`, from the eigendecomposition
/// `M = V Λ Vᵀ` as `S = V Λ^{1/2} Vᵀ`.
pub fn spd_sqrt(m: &SpdMatrix) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(m.0.clone());
    let root = eig.eigenvalues.map(f64::sqrt);
    let v = &eig.eigenvectors;
    let s = v * DMatrix::from_diagonal(&root) * v.transpose();
    (&s + s.transpose()) * 0.5
}

/// A norm on `R^dim`.
#[derive(Clone, Debug, PartialEq)]
pub enum NormSpec {
    Euclidean { dim: usize },
    Weighted { weight: SpdMatrix },
}

impl NormSpec {
    pub fn euclidean(dim: usize) -> Self {
        NormSpec::Euclidean { dim }
    }

    pub fn weighted(weight: SpdMatrix) -> Self {
        NormSpec::Weighted { weight }
    }

    pub fn dim(&self) -> usize {
        match self {
            NormSpec::Euclidean { dim } => *dim,
            NormSpec::Weighted { weight } => weight.dim(),
        }
    }

    pub fn is_euclidean(&self) -> bool {
        matches!(self, NormSpec::Euclidean { .. })
    }

    pub fn weight(&self) -> Option<&SpdMatrix> {
        match self {
            NormSpec::Euclidean { .. } => None,
            NormSpec::Weighted { weight } => Some(weight),
        }
    }

    /// Same norm on a space of a different dimension is not meaningful for
    /// weighted norms; this only rebinds the Euclidean dimension.
    pub fn with_dim(&self, dim: usize) -> Result<Self> {
        match self {
            NormSpec::Euclidean { .. } => Ok(NormSpec::Euclidean { dim }),
            NormSpec::Weighted { weight } if weight.dim() == dim => Ok(self.clone()),
            NormSpec::Weighted { weight } => Err(Error::DimensionMismatch {
                expected: weight.dim(),
                found: dim,
            }),
        }
    }

    pub fn norm(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x.len())?;
        Ok(self.norm_unchecked(x))
    }

    pub(crate) fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found,
            });
        }
        Ok(())
    }

    #[inline]
    pub(crate) fn norm_unchecked(&self, x: &[f64]) -> f64 {
        match self {
            NormSpec::Euclidean { .. } => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
            NormSpec::Weighted { weight } => quadratic_form(weight.matrix(), x).max(0.0).sqrt(),
        }
    }

    /// Distance `‖a − b‖`. Bitwise symmetric in its arguments.
    #[inline]
    pub(crate) fn distance_unchecked(&self, a: &[f64], b: &[f64], buf: &mut Vec<f64>) -> f64 {
        match self {
            NormSpec::Euclidean { .. } => a
                .iter()
                .zip(b)
                .map(|(u, v)| {
                    let d = u - v;
                    d * d
                })
                .sum::<f64>()
                .sqrt(),
            NormSpec::Weighted { weight } => {
                buf.clear();
                buf.extend(a.iter().zip(b).map(|(u, v)| u - v));
                quadratic_form(weight.matrix(), buf).max(0.0).sqrt()
            }
        }
    }

    pub fn record(&self) -> NormRecord {
        match self {
            NormSpec::Euclidean { dim } => NormRecord {
                kind: "euclidean",
                dim: *dim,
                weight: None,
            },
            NormSpec::Weighted { weight } => NormRecord {
                kind: "weighted",
                dim: weight.dim(),
                weight: Some(weight.to_rows()),
            },
        }
    }
}

/// Serializable description of a [`NormSpec`] for reports.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormRecord {
    pub kind: &'static str,
    pub dim: usize,
    pub weight: Option<Vec<Vec<f64>>>,
}

#[inline]
fn quadratic_form(a: &DMatrix<f64>, x: &[f64]) -> f64 {
    let p = x.len();
    let mut total = 0.0;
    for r in 0..p {
        let mut row = 0.0;
        for c in 0..p {
            row += a[(r, c)] * x[c];
        }
        total += x[r] * row;
    }
    total
}

/// Dense symmetric matrix of pairwise distances.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, k: usize, l: usize) -> f64 {
        self.data[k * self.n + l]
    }

    #[inline]
    pub fn row(&self, k: usize) -> &[f64] {
        &self.data[k * self.n..(k + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Builds a matrix from explicit entries, checking the distance-matrix
    /// invariants (square, symmetric, zero diagonal, nonnegative).
    pub fn from_entries(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::LengthMismatch {
                expected: n * n,
                found: data.len(),
            });
        }
        for k in 0..n {
            if data[k * n + k] != 0.0 {
                return Err(Error::BadConfig(format!("nonzero diagonal at {k}")));
            }
            for l in 0..k {
                let v = data[k * n + l];
                if v != data[l * n + k] || v.is_nan() || v < 0.0 {
                    return Err(Error::BadConfig(format!("entry ({k},{l}) is asymmetric or negative")));
                }
            }
        }
        Ok(DistanceMatrix { n, data })
    }
}

/// All pairwise distances `‖points[k] − points[l]‖` under `spec`.
///
/// Entries are computed once per unordered pair and mirrored, so the result
/// is exactly symmetric. Rows are filled in parallel when the `parallel`
/// feature is on; the output is identical either way.
pub fn pairwise_distance_matrix(points: &PointSet, spec: &NormSpec) -> Result<DistanceMatrix> {
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    spec.check_dim(points.dim())?;
    let n = points.len();
    let upper: Vec<Vec<f64>> = par::map_indexed(n, |k| {
        let mut buf = Vec::with_capacity(points.dim());
        let xk = points.row(k);
        (k + 1..n)
            .map(|l| spec.distance_unchecked(xk, points.row(l), &mut buf))
            .collect()
    });
    let mut data = vec![0.0; n * n];
    for (k, row) in upper.iter().enumerate() {
        for (offset, &d) in row.iter().enumerate() {
            let l = k + 1 + offset;
            data[k * n + l] = d;
            data[l * n + k] = d;
        }
    }
    Ok(DistanceMatrix { n, data })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spd(rng: &mut impl Rng, p: usize) -> DMatrix<f64> {
        let g = DMatrix::from_fn(p, p, |_, _| rng.random_range(-1.0..1.0));
        &g * g.transpose() + DMatrix::identity(p, p) * 0.1
    }

    fn max_abs(m: &DMatrix<f64>) -> f64 {
        m.iter().fold(0.0f64, |a, v| a.max(v.abs()))
    }

    #[test]
    fn identity_is_accepted_unchanged() {
        let m = DMatrix::<f64>::identity(3, 3);
        let spd = validate_spd(&m, 1e-10, 1e-12).unwrap();
        assert_eq!(spd.matrix(), &m);
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        // Eigenvalues of [[1,2],[2,1]] are 3 and -1.
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        match validate_spd(&m, 1e-10, 1e-12) {
            Err(Error::NotPositiveDefinite { min_eigenvalue, .. }) => {
                assert!((min_eigenvalue + 1.0).abs() < 1e-12)
            }
            other => panic!("expected NotPositiveDefinite, got {other:?}"),
        }
    }

    #[test]
    fn asymmetric_matrix_is_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1e-6, 1.0]);
        assert!(matches!(
            validate_spd(&m, 1e-10, 1e-12),
            Err(Error::NotSymmetric { .. })
        ));
    }

    #[test]
    fn near_symmetric_input_is_symmetrised() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5 + 1e-12, 2.0]);
        let spd = validate_spd(&m, DEFAULT_TOL_SYM, DEFAULT_EIG_FLOOR).unwrap();
        assert_eq!(spd.matrix()[(0, 1)], spd.matrix()[(1, 0)]);
    }

    #[test]
    fn non_square_is_rejected() {
        let m = DMatrix::<f64>::zeros(2, 3);
        assert!(matches!(
            validate_spd(&m, 1e-9, 1e-12),
            Err(Error::NotSquare { rows: 2, cols: 3 })
        ));
    }

    #[test]
    fn sqrt_of_identity_and_diagonal() {
        let id = SpdMatrix::identity(4);
        let s = spd_sqrt(&id);
        assert!(max_abs(&(s - DMatrix::identity(4, 4))) < 1e-15);

        let d = SpdMatrix::diagonal(&[4.0, 9.0]).unwrap();
        let s = spd_sqrt(&d);
        let expected = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 3.0]);
        assert!(max_abs(&(s - expected)) < 1e-14);
    }

    #[test]
    fn sqrt_multiplies_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for p in 1..=8 {
            let m = random_spd(&mut rng, p);
            let spd = validate_spd(&m, 1e-9, 1e-12).unwrap();
            let s = spd_sqrt(&spd);
            let err = max_abs(&(&s * &s - spd.matrix()));
            assert!(err <= 1e-10 * (1.0 + max_abs(spd.matrix())), "p={p} err={err}");
            assert!(max_abs(&(&s - s.transpose())) == 0.0);
            assert!(s.clone().symmetric_eigenvalues().iter().all(|&v| v > 0.0));
        }
    }

    #[test]
    fn norm_examples() {
        assert_eq!(NormSpec::euclidean(2).norm(&[3.0, 4.0]).unwrap(), 5.0);
        let w = NormSpec::weighted(SpdMatrix::diagonal(&[4.0, 1.0]).unwrap());
        assert!((w.norm(&[1.0, 1.0]).unwrap() - 5f64.sqrt()).abs() < 1e-15);
        let id = NormSpec::weighted(SpdMatrix::identity(3));
        let x = [0.3, -1.2, 2.5];
        let e = NormSpec::euclidean(3).norm(&x).unwrap();
        assert!((id.norm(&x).unwrap() - e).abs() <= 1e-15 * e);
        assert!(matches!(
            NormSpec::euclidean(2).norm(&[1.0]),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn distance_matrix_examples() {
        let one = PointSet::from_rows(&[vec![1.0, 2.0]]).unwrap();
        let d = pairwise_distance_matrix(&one, &NormSpec::euclidean(2)).unwrap();
        assert_eq!(d.as_slice(), &[0.0]);

        let two = PointSet::from_rows(&[vec![0.0], vec![3.0]]).unwrap();
        let d = pairwise_distance_matrix(&two, &NormSpec::euclidean(1)).unwrap();
        assert_eq!(d.as_slice(), &[0.0, 3.0, 3.0, 0.0]);

        let empty = PointSet::new(0, 2, vec![]).unwrap();
        assert_eq!(
            pairwise_distance_matrix(&empty, &NormSpec::euclidean(2)),
            Err(Error::EmptyInput)
        );
        assert!(matches!(
            pairwise_distance_matrix(&two, &NormSpec::euclidean(2)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn weighted_distances_match_transformed_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rows: Vec<Vec<f64>> = (0..20)
            .map(|_| vec![rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)])
            .collect();
        let pts = PointSet::from_rows(&rows).unwrap();
        let w = NormSpec::weighted(SpdMatrix::diagonal(&[4.0, 1.0]).unwrap());
        let d = pairwise_distance_matrix(&pts, &w).unwrap();
        let scaled = PointSet::from_rows(&rows.iter().map(|r| vec![2.0 * r[0], r[1]]).collect::<Vec<_>>()).unwrap();
        let e = pairwise_distance_matrix(&scaled, &NormSpec::euclidean(2)).unwrap();
        for (a, b) in d.as_slice().iter().zip(e.as_slice()) {
            assert!((a - b).abs() <= 1e-12 * b.max(1.0));
        }
    }

    proptest! {
        #[test]
        fn weighted_norm_equals_euclidean_of_sqrt_image(seed in any::<u64>(), p in 1usize..6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = SpdMatrix::new(random_spd(&mut rng, p)).unwrap();
            let s = a.sqrt();
            let x: Vec<f64> = (0..p).map(|_| rng.random_range(-5.0..5.0)).collect();
            let sx: Vec<f64> = (0..p).map(|r| (0..p).map(|c| s[(r, c)] * x[c]).sum()).collect();
            let lhs = NormSpec::weighted(a).norm(&x).unwrap();
            let rhs = NormSpec::euclidean(p).norm(&sx).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-300) + 1e-300);
        }

        #[test]
        fn norm_is_absolutely_homogeneous(seed in any::<u64>(), c in -10.0f64..10.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = SpdMatrix::new(random_spd(&mut rng, 3)).unwrap();
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-5.0..5.0)).collect();
            let cx: Vec<f64> = x.iter().map(|v| c * v).collect();
            for spec in [NormSpec::euclidean(3), NormSpec::weighted(a)] {
                let lhs = spec.norm(&cx).unwrap();
                let rhs = c.abs() * spec.norm(&x).unwrap();
                prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
            }
        }

        #[test]
        fn distance_matrix_invariants(seed in any::<u64>(), n in 1usize..25) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..3).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
            let pts = PointSet::from_rows(&rows).unwrap();
            let a = SpdMatrix::new(random_spd(&mut rng, 3)).unwrap();
            for spec in [NormSpec::euclidean(3), NormSpec::weighted(a.clone())] {
                let d = pairwise_distance_matrix(&pts, &spec).unwrap();
                for k in 0..n {
                    prop_assert_eq!(d.get(k, k), 0.0);
                    for l in 0..n {
                        prop_assert_eq!(d.get(k, l).to_bits(), d.get(l, k).to_bits());
                        prop_assert!(d.get(k, l) >= 0.0);
                        for m in 0..n {
                            prop_assert!(d.get(k, l) <= d.get(k, m) + d.get(m, l) + 1e-12);
                        }
                    }
                }
            }
        }
    }
}
