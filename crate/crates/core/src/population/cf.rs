//! `V_0` for scalar `X`, `Y` through the weighted characteristic-function
//! distance
//!
//! ```text
//! V_0 = 1/c1² ∬ |f_XY(t,s) − f_X(t) f_Y(s)|² / (t² s²) dt ds
//! ```
//!
//! truncated to `[−T, T]²` and evaluated by the midpoint rule.
//!
//! With distinct values `a_α` of X, `b_β` of Y and `Q_αβ = P(a_α, b_β) −
//! P(a_α) P(b_β)`, the numerator is `|Σ_α e^{i t a_α} G_α(s)|²` with
//! `G_α(s) = Σ_β Q_αβ e^{i s b_β}`. Working with `Q` directly avoids
//! subtracting two nearly equal characteristic functions. Because the rows
//! and columns of `Q` sum to zero, the numerator vanishes like `t² s²` at the
//! axes; a midpoint lying on an axis uses the analytic limit (the derivative
//! of the numerator's factor there) instead of dividing by zero.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::exact_sum;
use crate::par;

use super::DiscreteJoint;

/// Quadrature settings for [`cf_integral_v0_1d`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CfIntegralConfig {
    /// Half-width `T` of the integration square.
    pub truncation: f64,
    /// Cell width `h`.
    pub step: f64,
    /// Normalising constant `c1` of the one-dimensional weight.
    pub c1: f64,
}

impl Default for CfIntegralConfig {
    fn default() -> Self {
        CfIntegralConfig {
            truncation: 200.0,
            step: 0.05,
            c1: PI,
        }
    }
}

impl CfIntegralConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.truncation.is_finite()
            && self.truncation > 0.0
            && self.step.is_finite()
            && self.step > 0.0
            && self.step < self.truncation
            && self.c1.is_finite()
            && self.c1 > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::BadConfig(format!(
                "characteristic-function quadrature needs T > 0, 0 < h < T, c1 > 0 (got T={}, h={}, c1={})",
                self.truncation, self.step, self.c1
            )))
        }
    }

    fn cells(&self) -> usize {
        ((2.0 * self.truncation / self.step).round() as usize).max(1)
    }
}

/// Midpoint estimate at `h`, the estimate at `2h`, and the Richardson
/// extrapolation `fine + (fine − coarse)/3` for the O(h²) midpoint error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CfIntegralReport {
    pub value: f64,
    pub coarse: f64,
    pub richardson: f64,
    pub cells_per_axis: usize,
    pub config: CfIntegralConfig,
}

/// Midpoint-rule value of the characteristic-function integral for a joint
/// law with scalar marginals.
pub fn cf_integral_v0_1d(joint: &DiscreteJoint, cfg: &CfIntegralConfig) -> Result<f64> {
    cfg.validate()?;
    let factors = Factors::new(joint)?;
    Ok(factors.integrate(cfg.truncation, cfg.cells(), cfg.c1))
}

/// [`cf_integral_v0_1d`] together with a step-halving convergence check.
pub fn cf_integral_report(joint: &DiscreteJoint, cfg: &CfIntegralConfig) -> Result<CfIntegralReport> {
    cfg.validate()?;
    let factors = Factors::new(joint)?;
    let cells = cfg.cells();
    let value = factors.integrate(cfg.truncation, cells, cfg.c1);
    let coarse = factors.integrate(cfg.truncation, (cells / 2).max(1), cfg.c1);
    Ok(CfIntegralReport {
        value,
        coarse,
        richardson: value + (value - coarse) / 3.0,
        cells_per_axis: cells,
        config: *cfg,
    })
}

#[derive(Clone, Copy, Debug, Default)]
struct Complex {
    re: f64,
    im: f64,
}

impl Complex {
    fn cis(theta: f64) -> Self {
        let (im, re) = theta.sin_cos();
        Complex { re, im }
    }

    fn scale(self, k: f64) -> Self {
        Complex {
            re: self.re * k,
            im: self.im * k,
        }
    }

    fn mul_add(self, a: Complex, b: Complex) -> Self {
        Complex {
            re: self.re + a.re * b.re - a.im * b.im,
            im: self.im + a.re * b.im + a.im * b.re,
        }
    }

    fn norm_sqr(self) -> f64 {
        self.re * self.re + self.im * self.im
    }
}

struct Factors {
    x_values: Vec<f64>,
    y_values: Vec<f64>,
    // Q_αβ = P(a_α, b_β) − P(a_α) P(b_β)
    q: Vec<Vec<f64>>,
}

impl Factors {
    fn new(joint: &DiscreteJoint) -> Result<Self> {
        let (p, q) = joint.dims();
        if p != 1 || q != 1 {
            return Err(Error::DimensionNotOne { p, q });
        }
        let table = joint.contingency();
        let q = table
            .mass
            .iter()
            .enumerate()
            .map(|(a, row)| {
                row.iter()
                    .enumerate()
                    .map(|(b, &m)| m - table.px[a] * table.py[b])
                    .collect()
            })
            .collect();
        Ok(Factors {
            x_values: table.x_values.iter().map(|v| v[0]).collect(),
            y_values: table.y_values.iter().map(|v| v[0]).collect(),
            q,
        })
    }

    /// `G_α(s)/s`, or its limit `Σ_β Q_αβ·i·b_β` at `s = 0`.
    fn column_factor(&self, s: f64) -> Vec<Complex> {
        self.q
            .iter()
            .map(|row| {
                let mut acc = Complex::default();
                for (&qab, &b) in row.iter().zip(&self.y_values) {
                    if s == 0.0 {
                        acc.im += qab * b;
                    } else {
                        let e = Complex::cis(s * b);
                        acc.re += qab * e.re;
                        acc.im += qab * e.im;
                    }
                }
                if s == 0.0 {
                    acc
                } else {
                    acc.scale(1.0 / s)
                }
            })
            .collect()
    }

    /// `e^{i t a_α}/t`, or the limit `i·a_α` at `t = 0`.
    fn row_factor(&self, t: f64) -> Vec<Complex> {
        self.x_values
            .iter()
            .map(|&a| {
                if t == 0.0 {
                    Complex { re: 0.0, im: a }
                } else {
                    Complex::cis(t * a).scale(1.0 / t)
                }
            })
            .collect()
    }

    fn integrate(&self, truncation: f64, cells: usize, c1: f64) -> f64 {
        let h = 2.0 * truncation / cells as f64;
        let half = cells as f64 / 2.0;
        // Midpoints placed symmetrically about zero.
        let mid = |i: usize| h * (i as f64 + 0.5 - half);
        let columns: Vec<Vec<Complex>> = par::map_indexed(cells, |j| self.column_factor(mid(j)));
        // The integrand is even under (t, s) → (−t, −s) and the s-grid is
        // symmetric, so row −t carries the same total as row t.
        let lower = cells / 2;
        let rows: Vec<f64> = par::map_indexed(cells.div_ceil(2), |i| {
            let factor = self.row_factor(mid(i));
            let mut total = 0.0;
            for col in &columns {
                let mut d = Complex::default();
                for (e, g) in factor.iter().zip(col) {
                    d = d.mul_add(*e, *g);
                }
                total += d.norm_sqr();
            }
            if i < lower {
                2.0 * total
            } else {
                total
            }
        });
        exact_sum(rows) * h * h / (c1 * c1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::population::DiscreteDist;

    fn coin() -> DiscreteDist {
        DiscreteDist::from_rows(&[[0.0], [1.0]], vec![0.5, 0.5]).unwrap()
    }

    #[test]
    fn independent_coins_integrate_to_zero() {
        let j = DiscreteJoint::independent(&coin(), &coin()).unwrap();
        let v = cf_integral_v0_1d(&j, &CfIntegralConfig::default()).unwrap();
        assert!(v.abs() < 1e-6, "{v}");
    }

    #[test]
    fn equal_coins_integrate_to_quarter() {
        let j = DiscreteJoint::diagonal(&coin()).unwrap();
        let v = cf_integral_v0_1d(&j, &CfIntegralConfig::default()).unwrap();
        assert!((v - 0.25).abs() <= 0.01 * 0.25, "{v}");
    }

    #[test]
    fn odd_cell_count_uses_axis_limits() {
        // 2T/h odd puts midpoints exactly on both axes.
        let j = DiscreteJoint::diagonal(&coin()).unwrap();
        let cfg = CfIntegralConfig {
            truncation: 100.0,
            step: 200.0 / 2001.0,
            c1: PI,
        };
        assert_eq!(cfg.cells() % 2, 1);
        let v = cf_integral_v0_1d(&j, &cfg).unwrap();
        assert!(v.is_finite());
        assert!((v - 0.25).abs() <= 0.02 * 0.25, "{v}");
    }

    #[test]
    fn rejects_multivariate_and_bad_configs() {
        let two = DiscreteDist::from_rows(&[[0.0, 1.0], [1.0, 0.0]], vec![0.5, 0.5]).unwrap();
        let j = DiscreteJoint::diagonal(&two).unwrap();
        assert_eq!(
            cf_integral_v0_1d(&j, &CfIntegralConfig::default()),
            Err(Error::DimensionNotOne { p: 2, q: 2 })
        );
        let j = DiscreteJoint::diagonal(&coin()).unwrap();
        for cfg in [
            CfIntegralConfig {
                truncation: 0.0,
                ..Default::default()
            },
            CfIntegralConfig {
                step: 0.0,
                ..Default::default()
            },
            CfIntegralConfig {
                step: 300.0,
                ..Default::default()
            },
        ] {
            assert!(matches!(cf_integral_v0_1d(&j, &cfg), Err(Error::BadConfig(_))));
        }
    }

    #[test]
    fn report_halving_is_consistent() {
        let j = DiscreteJoint::diagonal(&coin()).unwrap();
        let cfg = CfIntegralConfig {
            truncation: 50.0,
            step: 0.1,
            c1: PI,
        };
        let r = cf_integral_report(&j, &cfg).unwrap();
        assert_eq!(r.cells_per_axis, 1000);
        assert!((r.value - r.coarse).abs() < 1e-3);
    }
}
