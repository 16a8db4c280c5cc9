//! Generalized distance covariance and distance correlation.
//!
//! The crate computes the sample statistics `V_n` and `R_n` under Euclidean
//! or SPD-weighted norms ([`dcov`], [`norms`]), exact population values on
//! finite-support joint distributions with two independent cross-checks
//! ([`population`]), finite-dimensional embeddings of functional and `ℓ2`
//! data ([`embed`]), and permutation tests with a power-study harness
//! ([`inference`]).
//!
//! Inner loops run on rayon when the default `parallel` feature is enabled
//! and serially otherwise; results are bit-identical in both modes and for
//! any thread count.
//!
//! ```
//! use depcov::inference::{permutation_test, StatisticKind};
//! use depcov::{v_n, NormSpec, PairedSample, SpdMatrix};
//!
//! let s = PairedSample::from_rows(&[[0.0, 1.0], [1.0, 0.5], [2.0, 2.0]], &[[0.1], [0.9], [2.2]])?;
//! let a = NormSpec::weighted(SpdMatrix::diagonal(&[4.0, 1.0])?);
//! let e = v_n(&s, &a, &NormSpec::euclidean(1))?;
//! assert!(e.v_xy > 0.0 && e.r <= 1.0);
//!
//! let t = permutation_test(&s, &a, &NormSpec::euclidean(1), 999, StatisticKind::Covariance, 42)?;
//! assert!(t.p_value > 0.0);
//! # Ok::<(), depcov::Error>(())
//! ```

pub mod dcov;
pub mod embed;

pub mod error;
pub mod exact;
pub mod inference;

pub mod norms;
pub mod par;
pub mod population;

pub mod rng;

pub use dcov::{r_n, terms, v_n, DcovEstimate, DcovTerms, PairedSample};
pub use error::{Error, Result};
pub use norms::{pairwise_distance_matrix, spd_sqrt, validate_spd, DistanceMatrix, NormSpec, PointSet, SpdMatrix};
