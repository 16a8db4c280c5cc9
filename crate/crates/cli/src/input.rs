//! Turns command-line input options into a paired sample with its norms.

use std::path::{Path, PathBuf};

use depcov::embed::{ell2_truncate, embed, BasisModel};
use depcov::norms::NormRecord;
use depcov::{NormSpec, PairedSample, PointSet, SpdMatrix};
use serde::Serialize;

use crate::args::{Layout, SampleArgs};
use crate::error::{CliError, CliResult};
use crate::io;

/// Parses a norm argument for a space of dimension `dim`.
pub fn parse_norm(arg: Option<&str>, dim: usize) -> CliResult<NormSpec> {
    let spec = match arg {
        None | Some("euclidean") => NormSpec::euclidean(dim),
        Some(s) => match s.strip_prefix("diag:") {
            Some(list) => NormSpec::weighted(SpdMatrix::diagonal(&parse_list(list)?)?),
            None => NormSpec::weighted(SpdMatrix::new(io::read_matrix(Path::new(s))?)?),
        },
    };
    if spec.dim() != dim {
        return Err(depcov::Error::DimensionMismatch {
            expected: dim,
            found: spec.dim(),
        }
        .into());
    }
    Ok(spec)
}

pub fn parse_list(list: &str) -> CliResult<Vec<f64>> {
    list.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::Config(format!("'{v}' is not a finite number")))
        })
        .collect()
}

/// Lambdas as a comma-separated list or `geometric:RATIO:COUNT`, giving
/// `RATIO^i` for `i = 1..=COUNT`.
pub fn parse_lambdas(arg: &str) -> CliResult<Vec<f64>> {
    match arg.strip_prefix("geometric:") {
        Some(rest) => {
            let (ratio, count) = rest
                .split_once(':')
                .ok_or_else(|| CliError::Config(format!("expected geometric:RATIO:COUNT, got '{arg}'")))?;
            let ratio: f64 = ratio
                .parse()
                .map_err(|_| CliError::Config(format!("bad ratio '{ratio}'")))?;
            let count: usize = count
                .parse()
                .map_err(|_| CliError::Config(format!("bad count '{count}'")))?;
            Ok((1..=count).map(|i| ratio.powi(i as i32)).collect())
        }
        None => parse_list(arg),
    }
}

/// A built-in basis by name, or a basis file.
pub fn load_basis(name: &str, grid: usize, lambdas: Vec<f64>) -> CliResult<BasisModel> {
    Ok(match name {
        "fourier" => BasisModel::fourier(grid, lambdas)?,
        "monomial" => BasisModel::monomial(grid, lambdas)?,
        path => io::read_basis(Path::new(path))?,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct InputRecord {
    pub x: Option<PathBuf>,
    pub y: Option<PathBuf>,
    pub paired: Option<PathBuf>,
    pub x_dim: Option<usize>,
    pub layout: Layout,
    pub trunc: Option<usize>,
    pub basis: Option<String>,
    pub norm_x: NormRecord,
    pub norm_y: NormRecord,
}

/// Details of the functional or l2 reduction applied to the input.
#[derive(Clone, Debug, Serialize)]
pub struct ReductionRecord {
    pub truncation: usize,
    pub original_dim_x: usize,
    pub original_dim_y: usize,
    /// Functional layout: `Σ_{i>m} λ_i²` from the basis constants.
    pub predicted_tail_error: Option<f64>,
    /// Mean squared error of the retained representation, per margin.
    pub discarded_x: f64,
    pub discarded_y: f64,
}

pub struct LoadedSample {
    pub sample: PairedSample,
    pub spec_x: NormSpec,
    pub spec_y: NormSpec,
    pub record: InputRecord,
    pub reduction: Option<ReductionRecord>,
}

pub fn load_sample(args: &SampleArgs) -> CliResult<LoadedSample> {
    let (xs, ys) = match (&args.paired, &args.x, &args.y) {
        (Some(p), _, _) => {
            if args.layout == Layout::Functional {
                return Err(CliError::Config(
                    "the functional layout needs separate --x and --y files".into(),
                ));
            }
            io::read_paired(p, args.x_dim)?
        }
        (None, Some(x), Some(y)) => (io::read_sample(x)?, io::read_sample(y)?),
        _ => return Err(CliError::Config("give --x and --y, or --paired".into())),
    };
    if xs.len() != ys.len() {
        return Err(CliError::Dimension(format!(
            "X has {} observations but Y has {}",
            xs.len(),
            ys.len()
        )));
    }
    let (px, py) = (xs[0].len(), ys[0].len());
    let (x, y, induced, reduction, basis) = match args.layout {
        Layout::Vectors => {
            if args.trunc.is_some() {
                return Err(CliError::Config(
                    "--trunc applies to the functional and ell2 layouts".into(),
                ));
            }
            (PointSet::from_rows(&xs)?, PointSet::from_rows(&ys)?, None, None, None)
        }
        Layout::Ell2 => {
            let m = args.trunc.unwrap_or(px.min(py));
            if m == 0 {
                return Err(CliError::Config("--trunc must be at least 1".into()));
            }
            let tx = ell2_truncate(&xs, m)?;
            let ty = ell2_truncate(&ys, m)?;
            let reduction = ReductionRecord {
                truncation: m,
                original_dim_x: px,
                original_dim_y: py,
                predicted_tail_error: None,
                discarded_x: tx.discarded_energy,
                discarded_y: ty.discarded_energy,
            };
            (
                PointSet::from_rows(&tx.vectors)?,
                PointSet::from_rows(&ty.vectors)?,
                None,
                Some(reduction),
                None,
            )
        }
        Layout::Functional => {
            let m = args
                .trunc
                .ok_or_else(|| CliError::Config("the functional layout needs --trunc".into()))?;
            if px != py {
                return Err(CliError::Dimension(format!(
                    "X rows have {px} grid values but Y rows have {py}"
                )));
            }
            let model = load_basis(&args.basis, px, vec![1.0; m.max(1)])?;
            let ex = embed(&xs, &model, m)?;
            let ey = embed(&ys, &model, m)?;
            let reduction = ReductionRecord {
                truncation: m,
                original_dim_x: px,
                original_dim_y: py,
                // Built-in bases carry placeholder lambdas here.
                predicted_tail_error: (!matches!(args.basis.as_str(), "fourier" | "monomial"))
                    .then_some(ex.predicted_tail_error),
                discarded_x: ex.mean_squared_error(&xs, &model),
                discarded_y: ey.mean_squared_error(&ys, &model),
            };
            let induced = Some((ex.norm.clone(), ey.norm.clone()));
            (ex.coeffs, ey.coeffs, induced, Some(reduction), Some(args.basis.clone()))
        }
    };
    let spec = |arg: &Option<String>, dim: usize, induced: Option<NormSpec>| match (arg, induced) {
        (None, Some(n)) => Ok(n),
        (arg, _) => parse_norm(arg.as_deref(), dim),
    };
    let spec_x = spec(&args.norm_x, x.dim(), induced.as_ref().map(|i| i.0.clone()))?;
    let spec_y = spec(&args.norm_y, y.dim(), induced.map(|i| i.1))?;
    let record = InputRecord {
        x: args.x.clone(),
        y: args.y.clone(),
        paired: args.paired.clone(),
        x_dim: args.x_dim,
        layout: args.layout,
        trunc: reduction.as_ref().map(|r| r.truncation),
        basis,
        norm_x: spec_x.record(),
        norm_y: spec_y.record(),
    };
    Ok(LoadedSample {
        sample: PairedSample::new(x, y)?,
        spec_x,
        spec_y,
        record,
        reduction,
    })
}
