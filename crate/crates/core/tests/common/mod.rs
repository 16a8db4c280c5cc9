#![allow(dead_code)]

use depcov::{NormSpec, PairedSample, PointSet, SpdMatrix};
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

pub fn gaussian_rows<R: Rng>(rng: &mut R, n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..dim).map(|_| rng.sample(StandardNormal)).collect())
        .collect()
}

/// `BᵀB + δI` with a random Gaussian `B`, scaled to unit trace per dimension.
pub fn random_spd<R: Rng>(rng: &mut R, dim: usize) -> SpdMatrix {
    let b = DMatrix::from_fn(dim, dim, |_, _| rng.sample::<f64, _>(StandardNormal));
    let mut a = b.transpose() * &b + DMatrix::identity(dim, dim) * 0.1;
    let trace = a.trace() / dim as f64;
    a /= trace;
    SpdMatrix::new(a).unwrap()
}

/// Euclidean or random SPD-weighted, with equal odds.
pub fn random_spec<R: Rng>(rng: &mut R, dim: usize) -> NormSpec {
    if rng.random_bool(0.5) {
        NormSpec::euclidean(dim)
    } else {
        NormSpec::weighted(random_spd(rng, dim))
    }
}

/// Gaussian sample with an optional linear link between the margins, so
/// both dependent and independent cases appear.
pub fn random_sample<R: Rng>(rng: &mut R, n: usize, p: usize, q: usize) -> PairedSample {
    let xs = gaussian_rows(rng, n, p);
    let link: f64 = if rng.random_bool(0.5) {
        rng.random_range(0.0..2.0)
    } else {
        0.0
    };
    let ys: Vec<Vec<f64>> = xs
        .iter()
        .map(|x| {
            (0..q)
                .map(|j| link * x[j % p] + rng.sample::<f64, _>(StandardNormal))
                .collect()
        })
        .collect();
    PairedSample::from_rows(&xs, &ys).unwrap()
}

pub fn transform(points: &PointSet, spec: &NormSpec) -> PointSet {
    match spec.weight() {
        Some(a) => points.linear_map(&a.sqrt()).unwrap(),
        None => points.clone(),
    }
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Direct-sum `V_n`: a four-fold loop for `T2`, a triple loop for `T3`.
#[allow(clippy::needless_range_loop)]
pub fn naive_v(sample: &PairedSample, sx: &NormSpec, sy: &NormSpec) -> f64 {
    let n = sample.len();
    let d = |pts: &PointSet, spec: &NormSpec, k: usize, l: usize| {
        let diff: Vec<f64> = pts.row(k).iter().zip(pts.row(l)).map(|(a, b)| a - b).collect();
        spec.norm(&diff).unwrap()
    };
    let dx: Vec<Vec<f64>> = (0..n)
        .map(|k| (0..n).map(|l| d(sample.x(), sx, k, l)).collect())
        .collect();
    let dy: Vec<Vec<f64>> = (0..n)
        .map(|k| (0..n).map(|l| d(sample.y(), sy, k, l)).collect())
        .collect();
    let nf = n as f64;
    let mut t1 = Neumaier::default();
    for k in 0..n {
        for l in 0..n {
            t1.add(dx[k][l] * dy[k][l]);
        }
    }
    let mut t2 = Neumaier::default();
    for k in 0..n {
        for l in 0..n {
            for m in 0..n {
                for o in 0..n {
                    t2.add(dx[k][l] * dy[m][o]);
                }
            }
        }
    }
    let mut t3 = Neumaier::default();
    for k in 0..n {
        for l in 0..n {
            for m in 0..n {
                t3.add(dx[k][l] * dy[k][m]);
            }
        }
    }
    t1.total() / nf.powi(2) + t2.total() / nf.powi(4) - 2.0 * t3.total() / nf.powi(3)
}

/// Compensated summation, so the reference is limited by the algebra rather
/// than by accumulated rounding.
#[derive(Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

use depcov::population::{DiscreteDist, DiscreteJoint};

/// Random probability vector with every entry bounded away from zero.
pub fn random_probs<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = w.iter().sum();
    w.iter().map(|v| v / total).collect()
}

/// Random joint table on `{0, …, kx−1} × {0, …, ky−1}` scaled by `spacing`.
pub fn random_table<R: Rng>(rng: &mut R, kx: usize, ky: usize, spacing: f64) -> DiscreteJoint {
    let probs = random_probs(rng, kx * ky);
    let atoms: Vec<([f64; 1], [f64; 1], f64)> = (0..kx * ky)
        .map(|c| ([spacing * (c / ky) as f64], [spacing * (c % ky) as f64], probs[c]))
        .collect();
    DiscreteJoint::from_atoms(&atoms).unwrap()
}

pub fn scalar_dist(values: &[f64], probs: Vec<f64>) -> DiscreteDist {
    let rows: Vec<[f64; 1]> = values.iter().map(|&v| [v]).collect();
    DiscreteDist::from_rows(&rows, probs).unwrap()
}

pub fn coin() -> DiscreteDist {
    scalar_dist(&[0.0, 1.0], vec![0.5, 0.5])
}

/// Fixed battery of joint laws, scalar ones first. Scalar atoms sit at
/// least one unit apart.
pub fn battery() -> Vec<(String, DiscreteJoint)> {
    let mut out: Vec<(String, DiscreteJoint)> = Vec::new();
    let mut push = |name: &str, j: DiscreteJoint| out.push((name.to_string(), j));
    push("coin X=Y", DiscreteJoint::diagonal(&coin()).unwrap());
    push(
        "independent coins",
        DiscreteJoint::independent(&coin(), &coin()).unwrap(),
    );
    push(
        "X=-Y coin",
        DiscreteJoint::from_atoms(&[([0.0], [0.0], 0.5), ([1.0], [-1.0], 0.5)]).unwrap(),
    );
    push(
        "noisy coin",
        DiscreteJoint::from_atoms(&[
            ([0.0], [0.0], 0.4),
            ([1.0], [1.0], 0.4),
            ([0.0], [1.0], 0.1),
            ([1.0], [0.0], 0.1),
        ])
        .unwrap(),
    );
    push(
        "three-point X=Y",
        DiscreteJoint::diagonal(&scalar_dist(&[0.0, 1.0, 2.0], vec![0.2, 0.5, 0.3])).unwrap(),
    );
    push(
        "Y=X^2 on {-1,0,1}",
        DiscreteJoint::from_atoms(&[([-1.0], [1.0], 0.25), ([0.0], [0.0], 0.5), ([1.0], [1.0], 0.25)]).unwrap(),
    );
    push(
        "independent uneven",
        DiscreteJoint::independent(
            &scalar_dist(&[0.0, 1.0, 3.0], vec![0.6, 0.3, 0.1]),
            &scalar_dist(&[-2.0, 0.0], vec![0.25, 0.75]),
        )
        .unwrap(),
    );
    push(
        "wide spacing",
        DiscreteJoint::from_atoms(&[([0.0], [0.0], 0.3), ([2.0], [5.0], 0.3), ([5.0], [2.0], 0.4)]).unwrap(),
    );
    let mut rng = depcov::rng::stream(2024, 0);
    for k in 0..8 {
        let (kx, ky) = (2 + k % 3, 2 + (k / 2) % 3);
        push(
            &format!("random table {k} ({kx}x{ky})"),
            random_table(&mut rng, kx, ky, 1.0),
        );
    }
    let square = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]];
    let sq = DiscreteDist::from_rows(&square, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
    push("2-D X=Y", DiscreteJoint::diagonal(&sq).unwrap());
    push("2-D independent", DiscreteJoint::independent(&sq, &coin()).unwrap());
    push(
        "2-D vs 1-D dependent",
        DiscreteJoint::from_atoms(&[
            ([0.0, 0.0], [0.0], 0.3),
            ([1.0, 2.0], [1.0], 0.3),
            ([2.0, -1.0], [1.0], 0.2),
            ([0.0, 0.0], [1.0], 0.2),
        ])
        .unwrap(),
    );
    push("3-D random", {
        let mut atoms = Vec::new();
        let probs = random_probs(&mut rng, 6);
        for p in probs {
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
            let y: Vec<f64> = (0..2).map(|_| rng.random_range(-2.0..2.0)).collect();
            atoms.push((x, y, p));
        }
        DiscreteJoint::from_atoms(&atoms).unwrap()
    });
    out
}

use depcov::embed::{finite_dependence_latents, BasisModel, FiniteDependenceConfig, ZDist};

pub fn geometric_lambdas(m_full: usize) -> Vec<f64> {
    (1..=m_full).map(|i| 0.5f64.powi(i as i32)).collect()
}

/// Tabulated functional pairs on `model` whose latent scores share the first
/// `shared` coordinates up to Gaussian noise of size `noise_sd`.
pub fn functional_pairs(
    model: &BasisModel,
    n: usize,
    shared: usize,
    noise_sd: f64,
    seed: u64,
) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let cfg = FiniteDependenceConfig {
        shared,
        lambdas_x: model.lambdas().to_vec(),
        lambdas_y: model.lambdas().to_vec(),
        noise_sd,
        z_dist: ZDist::StandardGaussian,
    };
    let (zx, zy) = finite_dependence_latents(&cfg, n, seed).unwrap();
    let tab = |z: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
        z.iter()
            .map(|z| {
                let c: Vec<f64> = z.iter().zip(model.lambdas()).map(|(z, l)| z * l).collect();
                model.reconstruct(&c)
            })
            .collect()
    };
    (tab(&zx), tab(&zy))
}

/// `V_n` of the pair embedded at truncation `m`.
pub fn embedded_v(model: &BasisModel, fx: &[Vec<f64>], fy: &[Vec<f64>], m: usize) -> f64 {
    let ex = depcov::embed::embed(fx, model, m).unwrap();
    let ey = depcov::embed::embed(fy, model, m).unwrap();
    let s = PairedSample::new(ex.coeffs, ey.coeffs).unwrap();
    depcov::v_n(&s, &ex.norm, &ey.norm).unwrap().v_xy
}

/// Mean and standard error of `values`.
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
