use rand::Rng;
use rand_distr::StandardNormal;

use crate::dcov::PairedSample;
use crate::error::{Error, Result};
use crate::norms::PointSet;
use crate::par;
use crate::rng::stream;

use super::BasisModel;

/// Law of the mean-zero, unit-variance expansion variables `Z_i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZDist {
    Rademacher,
    StandardGaussian,
}

impl ZDist {
    pub fn draw<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            ZDist::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            ZDist::StandardGaussian => rng.sample(StandardNormal),
        }
    }
}

/// Tabulated draws from a basis expansion with the underlying `Z` values.
#[derive(Clone, Debug, PartialEq)]
pub struct KlSample {
    pub functions: Vec<Vec<f64>>,
    pub z: Vec<Vec<f64>>,
}

/// Draws `n` functions `Σ λ_i Z_i φ_i` on the model grid. Sample `k` uses
/// random stream `k`, so the output is independent of scheduling.
pub fn simulate_kl(model: &BasisModel, n: usize, z_dist: ZDist, seed: u64) -> Result<KlSample> {
    if model.m_full() == 0 {
        return Err(Error::EmptyBasis);
    }
    if n == 0 {
        return Err(Error::BadConfig("sample size must be at least 1".into()));
    }
    let m = model.m_full();
    let draws: Vec<(Vec<f64>, Vec<f64>)> = par::map_indexed(n, |k| {
        let mut rng = stream(seed, k as u64);
        let z: Vec<f64> = (0..m).map(|_| z_dist.draw(&mut rng)).collect();
        let coeffs: Vec<f64> = z.iter().zip(model.lambdas()).map(|(z, l)| l * z).collect();
        (model.reconstruct(&coeffs), z)
    });
    let (functions, z) = draws.into_iter().unzip();
    Ok(KlSample { functions, z })
}

/// Pairs whose dependence sits in `shared` leading latent coordinates.
///
/// For each observation, `Z^x` has `lambdas_x.len()` coordinates. The first
/// `shared` coordinates of `Z^y` are `Z^x_i + noise_sd·ε_i`; the remaining
/// ones are fresh independent draws. Observed coordinates are `λ_i Z_i`.
/// `shared = 0` gives an independent pair.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct FiniteDependenceConfig {
    pub shared: usize,
    pub lambdas_x: Vec<f64>,
    pub lambdas_y: Vec<f64>,
    pub noise_sd: f64,
    pub z_dist: ZDist,
}

impl FiniteDependenceConfig {
    /// `λ_i = ratio^i` for `i = 1..=dim` on both sides.
    pub fn geometric(shared: usize, dim_x: usize, dim_y: usize, ratio: f64, noise_sd: f64, z_dist: ZDist) -> Self {
        let lam = |d: usize| (1..=d).map(|i| ratio.powi(i as i32)).collect();
        FiniteDependenceConfig {
            shared,
            lambdas_x: lam(dim_x),
            lambdas_y: lam(dim_y),
            noise_sd,
            z_dist,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.lambdas_x.is_empty() || self.lambdas_y.is_empty() {
            return Err(Error::BadConfig("both sides need at least one coordinate".into()));
        }
        if self.shared > self.lambdas_x.len().min(self.lambdas_y.len()) {
            return Err(Error::BadConfig(format!(
                "{} shared coordinates exceed the dimensions ({}, {})",
                self.shared,
                self.lambdas_x.len(),
                self.lambdas_y.len()
            )));
        }
        if !(self.noise_sd.is_finite() && self.noise_sd >= 0.0) {
            return Err(Error::BadConfig("noise_sd must be finite and nonnegative".into()));
        }
        if self.lambdas_x.iter().chain(&self.lambdas_y).any(|l| !l.is_finite()) {
            return Err(Error::BadConfig("lambdas must be finite".into()));
        }
        Ok(())
    }
}

type Rows = Vec<Vec<f64>>;

/// Latent `(Z^x, Z^y)` draws for [`finite_dependence_sample`]. The `Z^x`
/// values coincide with [`simulate_kl`]'s draws for the same seed.
pub fn finite_dependence_latents(cfg: &FiniteDependenceConfig, n: usize, seed: u64) -> Result<(Rows, Rows)> {
    cfg.validate()?;
    if n == 0 {
        return Err(Error::BadConfig("sample size must be at least 1".into()));
    }
    let draws: Vec<(Vec<f64>, Vec<f64>)> = par::map_indexed(n, |k| {
        let mut rng = stream(seed, k as u64);
        let zx: Vec<f64> = (0..cfg.lambdas_x.len()).map(|_| cfg.z_dist.draw(&mut rng)).collect();
        let zy: Vec<f64> = (0..cfg.lambdas_y.len())
            .map(|i| {
                if i < cfg.shared {
                    let eps: f64 = if cfg.noise_sd > 0.0 {
                        rng.sample(StandardNormal)
                    } else {
                        0.0
                    };
                    zx[i] + cfg.noise_sd * eps
                } else {
                    cfg.z_dist.draw(&mut rng)
                }
            })
            .collect();
        (zx, zy)
    });
    Ok(draws.into_iter().unzip())
}

/// Coefficient-space pairs `(λ^x ∘ Z^x, λ^y ∘ Z^y)`.
pub fn finite_dependence_sample(cfg: &FiniteDependenceConfig, n: usize, seed: u64) -> Result<PairedSample> {
    let (zx, zy) = finite_dependence_latents(cfg, n, seed)?;
    let scale = |z: &[f64], lam: &[f64]| -> Vec<f64> { z.iter().zip(lam).map(|(z, l)| z * l).collect() };
    let xs: Vec<Vec<f64>> = zx.iter().map(|z| scale(z, &cfg.lambdas_x)).collect();
    let ys: Vec<Vec<f64>> = zy.iter().map(|z| scale(z, &cfg.lambdas_y)).collect();
    PairedSample::new(PointSet::from_rows(&xs)?, PointSet::from_rows(&ys)?)
}
