use std::fs;
use std::path::{Path, PathBuf};

use depcov::dcov::DcovTerms;
use depcov::embed::{finite_dependence_latents, BasisModel, FiniteDependenceConfig, ZDist, DEFAULT_GRID};
use depcov::inference::{
    permutation_test, power_study, NormPair, PermutationTestResult, PowerStudyConfig, PowerStudyReport, Scenario,
    StatisticKind,
};
use depcov::norms::NormRecord;
use depcov::population::{
    brownian_kernel_v0, cf_integral_report, v0_exact, CfIntegralConfig, CfIntegralReport, DiscreteJoint, PopulationDcov,
};
use depcov::{v_n, NormSpec, SpdMatrix};
use serde::{Deserialize, Serialize};

use crate::args::{
    ComputeArgs, Format, Layout, OracleArgs, OutputArgs, PowerArgs, ScenarioArg, SimulateArgs, Statistic, TestArgs,
    ZArg,
};
use crate::error::{CliError, CliResult};
use crate::input::{load_basis, load_sample, parse_lambdas, parse_list, parse_norm, InputRecord, ReductionRecord};
use crate::io;

/// The seed to use, drawing one from system entropy when none was given.
fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let seed = rand::random::<u64>();
        eprintln!("depcov: no --seed given, using seed {seed}");
        seed
    })
}

fn statistic_kind(s: Statistic) -> StatisticKind {
    match s {
        Statistic::Covariance => StatisticKind::Covariance,
        Statistic::Correlation => StatisticKind::Correlation,
    }
}

fn csv_table(headers: &[&str], rows: &[Vec<String>]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::Other(format!("cannot format CSV: {e}"));
    w.write_record(headers).map_err(fail)?;
    for row in rows {
        w.write_record(row).map_err(fail)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Other(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Other(e.to_string()))
}

fn num(v: f64) -> String {
    format!("{v:?}")
}

fn emit<T: Serialize>(output: &OutputArgs, report: &T, csv: impl FnOnce() -> CliResult<String>) -> CliResult<()> {
    let text = match output.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).map_err(|e| CliError::Other(e.to_string()))?;
            s.push('\n');
            s
        }
        Format::Csv => csv()?,
    };
    io::write_output(output.out.as_ref(), &text)
}

#[derive(Serialize)]
struct NormSpecs {
    x: NormRecord,
    y: NormRecord,
}

#[derive(Serialize)]
struct TermsRecord {
    xy: DcovTerms,
    xx: DcovTerms,
    yy: DcovTerms,
}

#[derive(Serialize)]
struct ComputeConfig {
    input: InputRecord,
    format: Format,
}

#[derive(Serialize)]
struct ComputeReport {
    command: &'static str,
    n: usize,
    p: usize,
    q: usize,
    t1: f64,
    t2: f64,
    t3: f64,
    v_xy: f64,
    v_xx: f64,
    v_yy: f64,
    r: f64,
    terms: TermsRecord,
    norm_specs: NormSpecs,
    reduction: Option<ReductionRecord>,
    seed: Option<u64>,
    config: ComputeConfig,
}

pub fn compute(args: &ComputeArgs) -> CliResult<()> {
    let loaded = load_sample(&args.sample)?;
    let e = v_n(&loaded.sample, &loaded.spec_x, &loaded.spec_y)?;
    let report = ComputeReport {
        command: "compute",
        n: e.n,
        p: loaded.sample.x().dim(),
        q: loaded.sample.y().dim(),
        t1: e.terms_xy.t1,
        t2: e.terms_xy.t2,
        t3: e.terms_xy.t3,
        v_xy: e.v_xy,
        v_xx: e.v_xx,
        v_yy: e.v_yy,
        r: e.r,
        terms: TermsRecord {
            xy: e.terms_xy,
            xx: e.terms_xx,
            yy: e.terms_yy,
        },
        norm_specs: NormSpecs {
            x: e.spec_x.record(),
            y: e.spec_y.record(),
        },
        reduction: loaded.reduction,
        seed: None,
        config: ComputeConfig {
            input: loaded.record,
            format: args.output.format,
        },
    };
    emit(&args.output, &report, || {
        csv_table(
            &["n", "p", "q", "t1", "t2", "t3", "v_xy", "v_xx", "v_yy", "r"],
            &[vec![
                report.n.to_string(),
                report.p.to_string(),
                report.q.to_string(),
                num(report.t1),
                num(report.t2),
                num(report.t3),
                num(report.v_xy),
                num(report.v_xx),
                num(report.v_yy),
                num(report.r),
            ]],
        )
    })
}

#[derive(Serialize)]
struct TestConfig {
    input: InputRecord,
    #[serde(rename = "B")]
    b: usize,
    alpha: f64,
    statistic: Statistic,
    seed: u64,
    format: Format,
}

#[derive(Serialize)]
struct TestReport {
    command: &'static str,
    n: usize,
    p: usize,
    q: usize,
    alpha: f64,
    reject: bool,
    #[serde(flatten)]
    result: PermutationTestResult,
    norm_specs: NormSpecs,
    reduction: Option<ReductionRecord>,
    config: TestConfig,
}

pub fn test(args: &TestArgs) -> CliResult<()> {
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(CliError::Config(format!("alpha {} outside (0, 1)", args.alpha)));
    }
    let loaded = load_sample(&args.sample)?;
    let seed = resolve_seed(args.seed);
    let result = permutation_test(
        &loaded.sample,
        &loaded.spec_x,
        &loaded.spec_y,
        args.b,
        statistic_kind(args.statistic),
        seed,
    )?;
    let report = TestReport {
        command: "test",
        n: loaded.sample.len(),
        p: loaded.sample.x().dim(),
        q: loaded.sample.y().dim(),
        alpha: args.alpha,
        reject: result.rejects(args.alpha),
        result,
        norm_specs: NormSpecs {
            x: loaded.spec_x.record(),
            y: loaded.spec_y.record(),
        },
        reduction: loaded.reduction,
        config: TestConfig {
            input: loaded.record,
            b: args.b,
            alpha: args.alpha,
            statistic: args.statistic,
            seed,
            format: args.output.format,
        },
    };
    emit(&args.output, &report, || {
        let r = &report.result;
        csv_table(
            &["n", "statistic", "observed", "p_value", "B", "alpha", "reject", "seed"],
            &[vec![
                report.n.to_string(),
                match r.statistic_kind {
                    StatisticKind::Covariance => "v_n".into(),
                    StatisticKind::Correlation => "r_n".into(),
                },
                num(r.observed),
                num(r.p_value),
                r.b.to_string(),
                num(report.alpha),
                report.reject.to_string(),
                r.seed.to_string(),
            ]],
        )
    })
}

#[derive(Serialize)]
struct CfRecord {
    #[serde(flatten)]
    report: CfIntegralReport,
    delta: f64,
    relative_delta: Option<f64>,
}

#[derive(Serialize)]
struct OracleConfig {
    joint: PathBuf,
    norm_x: NormRecord,
    norm_y: NormRecord,
    cf: CfIntegralConfig,
    format: Format,
}

#[derive(Serialize)]
struct OracleReport {
    command: &'static str,
    support: usize,
    p: usize,
    q: usize,
    #[serde(flatten)]
    population: PopulationDcov,
    brownian_v0: f64,
    brownian_delta: f64,
    /// Present for scalar margins only.
    cf: Option<CfRecord>,
    norm_specs: NormSpecs,
    seed: Option<u64>,
    config: OracleConfig,
}

/// The joint with every atom mapped through the square roots of the norm
/// weights, so that Euclidean quantities of the result equal weighted ones
/// of the input.
fn to_euclidean(joint: &DiscreteJoint, sx: &NormSpec, sy: &NormSpec) -> CliResult<DiscreteJoint> {
    let map = |pts: &depcov::PointSet, spec: &NormSpec| match spec.weight() {
        Some(a) => pts.linear_map(&a.sqrt()),
        None => Ok(pts.clone()),
    };
    Ok(DiscreteJoint::new(
        map(joint.x(), sx)?,
        map(joint.y(), sy)?,
        joint.probs().to_vec(),
    )?)
}

pub fn oracle(args: &OracleArgs) -> CliResult<()> {
    let joint = io::read_joint(&args.joint)?;
    let (p, q) = joint.dims();
    let sx = parse_norm(args.norm_x.as_deref(), p)?;
    let sy = parse_norm(args.norm_y.as_deref(), q)?;
    let cfg = CfIntegralConfig {
        truncation: args.cf_truncation,
        step: args.cf_step,
        ..Default::default()
    };
    cfg.validate()?;
    let population = v0_exact(&joint, &sx, &sy)?;
    let brownian = brownian_kernel_v0(&joint, &sx, &sy)?;
    let cf = if (p, q) == (1, 1) {
        let report = cf_integral_report(&to_euclidean(&joint, &sx, &sy)?, &cfg)?;
        let delta = (report.value - population.v0).abs();
        Some(CfRecord {
            report,
            delta,
            relative_delta: (population.v0 > 0.0).then(|| delta / population.v0),
        })
    } else {
        None
    };
    let report = OracleReport {
        command: "oracle",
        support: joint.len(),
        p,
        q,
        population,
        brownian_v0: brownian,
        brownian_delta: (brownian - population.v0).abs(),
        cf,
        norm_specs: NormSpecs {
            x: sx.record(),
            y: sy.record(),
        },
        seed: None,
        config: OracleConfig {
            joint: args.joint.clone(),
            norm_x: sx.record(),
            norm_y: sy.record(),
            cf: cfg,
            format: args.output.format,
        },
    };
    emit(&args.output, &report, || {
        let d = &report.population;
        let cf = report.cf.as_ref();
        csv_table(
            &[
                "support",
                "t10",
                "t20",
                "t30",
                "v0",
                "v0_x",
                "v0_y",
                "r0",
                "brownian_delta",
                "cf_value",
                "cf_delta",
            ],
            &[vec![
                report.support.to_string(),
                num(d.t10),
                num(d.t20),
                num(d.t30),
                num(d.v0),
                num(d.v0_x),
                num(d.v0_y),
                num(d.r0),
                num(report.brownian_delta),
                cf.map_or(String::new(), |c| num(c.report.value)),
                cf.map_or(String::new(), |c| num(c.delta)),
            ]],
        )
    })
}

/// Everything needed to regenerate a simulated dataset.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub basis: String,
    pub grid: usize,
    pub lambdas: Vec<f64>,
    pub n: usize,
    pub z: ZArg,
    pub shared: usize,
    pub noise_sd: f64,
    pub layout: Layout,
    pub seed: u64,
}

#[derive(Serialize)]
struct ManifestFiles {
    x: &'static str,
    y: &'static str,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'static str,
    seed: u64,
    basis_id: &'a str,
    grid_size: usize,
    m_full: usize,
    lambdas: &'a [f64],
    files: ManifestFiles,
    config: &'a SimulateConfig,
}

#[derive(Deserialize)]
struct ManifestIn {
    config: SimulateConfig,
}

fn simulate_config(args: &SimulateArgs) -> CliResult<SimulateConfig> {
    if let Some(path) = &args.from_manifest {
        let text = io::read_text(path)?;
        let m: ManifestIn = serde_json::from_str(&text)
            .map_err(|e| CliError::parse(path, e.line(), (e.column() > 0).then_some(e.column()), e.to_string()))?;
        return Ok(m.config);
    }
    let basis = args.basis.clone().unwrap_or_else(|| "fourier".into());
    let builtin = matches!(basis.as_str(), "fourier" | "monomial");
    if !builtin && (args.lambdas.is_some() || args.grid.is_some()) {
        return Err(CliError::Config(
            "--lambdas and --grid come from the basis file when one is given".into(),
        ));
    }
    let (grid, lambdas) = if builtin {
        (
            args.grid.unwrap_or(DEFAULT_GRID),
            parse_lambdas(args.lambdas.as_deref().unwrap_or("geometric:0.5:20"))?,
        )
    } else {
        let model = io::read_basis(Path::new(&basis))?;
        (model.grid().len(), model.lambdas().to_vec())
    };
    Ok(SimulateConfig {
        basis,
        grid,
        lambdas,
        n: args.n.unwrap_or(100),
        z: args.z.unwrap_or(ZArg::StandardGaussian),
        shared: args.shared.unwrap_or(0),
        noise_sd: args.noise_sd.unwrap_or(0.0),
        layout: args.layout.unwrap_or(Layout::Functional),
        seed: resolve_seed(args.seed),
    })
}

fn z_dist(z: ZArg) -> ZDist {
    match z {
        ZArg::Rademacher => ZDist::Rademacher,
        ZArg::StandardGaussian => ZDist::StandardGaussian,
    }
}

pub fn simulate(args: &SimulateArgs) -> CliResult<()> {
    let cfg = simulate_config(args)?;
    let model: BasisModel = load_basis(&cfg.basis, cfg.grid, cfg.lambdas.clone())?;
    if model.grid().len() != cfg.grid {
        return Err(CliError::Config(format!(
            "basis has {} grid points but the configuration records {}",
            model.grid().len(),
            cfg.grid
        )));
    }
    let fd = FiniteDependenceConfig {
        shared: cfg.shared,
        lambdas_x: model.lambdas().to_vec(),
        lambdas_y: model.lambdas().to_vec(),
        noise_sd: cfg.noise_sd,
        z_dist: z_dist(cfg.z),
    };
    let (zx, zy) = finite_dependence_latents(&fd, cfg.n, cfg.seed)?;
    let rows = |z: &[Vec<f64>]| -> CliResult<Vec<Vec<f64>>> {
        z.iter()
            .map(|z| {
                let c: Vec<f64> = z.iter().zip(model.lambdas()).map(|(z, l)| z * l).collect();
                match cfg.layout {
                    Layout::Functional => Ok(model.reconstruct(&c)),
                    Layout::Ell2 => Ok(c),
                    Layout::Vectors => Err(CliError::Config("simulate writes the functional or ell2 layout".into())),
                }
            })
            .collect()
    };
    let (xs, ys) = (rows(&zx)?, rows(&zy)?);
    fs::create_dir_all(&args.out).map_err(|e| CliError::file(&args.out, e))?;
    let manifest = Manifest {
        command: "simulate",
        seed: cfg.seed,
        basis_id: model.id(),
        grid_size: model.grid().len(),
        m_full: model.m_full(),
        lambdas: model.lambdas(),
        files: ManifestFiles { x: "x.csv", y: "y.csv" },
        config: &cfg,
    };
    let write = |name: &str, content: &str| {
        let path = args.out.join(name);
        fs::write(&path, content).map_err(|e| CliError::file(&path, e))
    };
    write("x.csv", &io::format_rows(&xs))?;
    write("y.csv", &io::format_rows(&ys))?;
    let mut text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Other(e.to_string()))?;
    text.push('\n');
    write("manifest.json", &text)
}

#[derive(Serialize)]
struct PairRecord {
    label: String,
    x: String,
    y: String,
}

#[derive(Serialize)]
struct PowerConfig {
    scenario: ScenarioArg,
    dim: usize,
    noise_sd: f64,
    shared: usize,
    grid: usize,
    lambdas: Vec<f64>,
    trunc: usize,
    n: usize,
    #[serde(rename = "B")]
    b: usize,
    replications: usize,
    alpha: f64,
    confidence: f64,
    statistic: Statistic,
    seed: u64,
    norm_pairs: Vec<PairRecord>,
    format: Format,
}

#[derive(Serialize)]
struct PowerOutput {
    command: &'static str,
    #[serde(flatten)]
    report: PowerStudyReport,
    config: PowerConfig,
}

fn norm_pairs(args: &PowerArgs, dx: usize, dy: usize) -> CliResult<(Vec<NormPair>, Vec<PairRecord>)> {
    let mut pairs = Vec::new();
    let mut records = Vec::new();
    if let Some(list) = &args.first_weights {
        for w in parse_list(list)? {
            let diag = |d: usize| -> CliResult<NormSpec> {
                let mut weights = vec![1.0; d];
                weights[0] = w;
                Ok(NormSpec::weighted(SpdMatrix::diagonal(&weights)?))
            };
            let label = format!("w={w:?}");
            let spec = format!("diag(w={w:?}, 1, ...)");
            pairs.push(NormPair::new(&label, diag(dx)?, diag(dy)?));
            records.push(PairRecord {
                label,
                x: spec.clone(),
                y: spec,
            });
        }
        return Ok((pairs, records));
    }
    let count = args.norm_x.len().max(args.norm_y.len()).max(1);
    for (side, list) in [("--norm-x", &args.norm_x), ("--norm-y", &args.norm_y)] {
        if list.len() > 1 && list.len() != count {
            return Err(CliError::Config(format!(
                "{side} given {} times; expected 1 or {count}",
                list.len()
            )));
        }
    }
    let pick = |list: &[String], i: usize| -> String {
        match list.len() {
            0 => "euclidean".into(),
            1 => list[0].clone(),
            _ => list[i].clone(),
        }
    };
    for i in 0..count {
        let (ax, ay) = (pick(&args.norm_x, i), pick(&args.norm_y, i));
        let label = format!("{ax} | {ay}");
        pairs.push(NormPair::new(
            &label,
            parse_norm(Some(&ax), dx)?,
            parse_norm(Some(&ay), dy)?,
        ));
        records.push(PairRecord { label, x: ax, y: ay });
    }
    Ok((pairs, records))
}

pub fn power(args: &PowerArgs) -> CliResult<()> {
    let lambdas = parse_lambdas(&args.lambdas)?;
    let scenario = match args.scenario {
        ScenarioArg::Null => Scenario::independent(args.dim, args.dim),
        ScenarioArg::Identity => Scenario::identity(args.dim),
        ScenarioArg::Coordinate => Scenario::first_coordinate(args.dim, args.noise_sd),
        ScenarioArg::Functional => Scenario::Functional {
            model: BasisModel::fourier(args.grid, lambdas.clone())?,
            shared: args.shared,
            noise_sd: args.noise_sd,
            z_dist: ZDist::StandardGaussian,
            truncation: args.trunc,
        },
    };
    if args.dim == 0 {
        return Err(CliError::Config("--dim must be at least 1".into()));
    }
    let (dx, dy) = scenario.dims();
    let (pairs, records) = norm_pairs(args, dx, dy)?;
    let seed = resolve_seed(args.seed);
    let report = power_study(&PowerStudyConfig {
        scenario,
        norm_pairs: pairs,
        n: args.n,
        replicates: args.b,
        replications: args.replications,
        alpha: args.alpha,
        seed,
        statistic: statistic_kind(args.statistic),
        confidence: args.confidence,
    })?;
    let out = PowerOutput {
        command: "power",
        report,
        config: PowerConfig {
            scenario: args.scenario,
            dim: args.dim,
            noise_sd: args.noise_sd,
            shared: args.shared,
            grid: args.grid,
            lambdas,
            trunc: args.trunc,
            n: args.n,
            b: args.b,
            replications: args.replications,
            alpha: args.alpha,
            confidence: args.confidence,
            statistic: args.statistic,
            seed,
            norm_pairs: records,
            format: args.output.format,
        },
    };
    emit(&args.output, &out, || {
        let rows: Vec<Vec<String>> = out
            .report
            .results
            .iter()
            .map(|r| {
                vec![
                    r.label.clone(),
                    r.rejections.to_string(),
                    out.report.replications.to_string(),
                    num(r.rate),
                    num(r.ci_lower),
                    num(r.ci_upper),
                ]
            })
            .collect();
        csv_table(
            &["label", "rejections", "replications", "rate", "ci_lower", "ci_upper"],
            &rows,
        )
    })
}
