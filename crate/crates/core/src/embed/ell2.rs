use crate::error::{Error, Result};
use crate::exact::exact_sum;

/// Leading coordinates of long vectors plus the average energy discarded.
#[derive(Clone, Debug, PartialEq)]
pub struct Ell2Truncation {
    pub vectors: Vec<Vec<f64>>,
    /// Sample mean of `Σ_{i>m} v_i²`.
    pub discarded_energy: f64,
}

/// Keeps the first `m` coordinates of every vector.
pub fn ell2_truncate<R: AsRef<[f64]>>(vectors: &[R], m: usize) -> Result<Ell2Truncation> {
    let first = vectors.first().ok_or(Error::EmptyInput)?;
    let len = first.as_ref().len();
    if let Some(v) = vectors.iter().find(|v| v.as_ref().len() != len) {
        return Err(Error::LengthMismatch {
            expected: len,
            found: v.as_ref().len(),
        });
    }
    if m > len {
        return Err(Error::LengthMismatch {
            expected: len,
            found: m,
        });
    }
    let discarded = exact_sum(vectors.iter().flat_map(|v| v.as_ref()[m..].iter().map(|x| x * x)));
    Ok(Ell2Truncation {
        vectors: vectors.iter().map(|v| v.as_ref()[..m].to_vec()).collect(),
        discarded_energy: discarded / vectors.len() as f64,
    })
}
