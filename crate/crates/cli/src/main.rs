//! `depcov` command-line front end.
//!
//! Every JSON report carries a `command` field, the effective configuration
//! with defaults filled in under `config`, and `seed` (null for the
//! deterministic commands). The schemas live in `schemas/`:
//!
//! | command    | schema                   | CSV columns                                   |
//! |------------|--------------------------|-----------------------------------------------|
//! | `compute`  | `compute.schema.json`    | n, p, q, t1, t2, t3, v_xy, v_xx, v_yy, r      |
//! | `test`     | `test.schema.json`       | n, statistic, observed, p_value, B, alpha, reject, seed |
//! | `oracle`   | `oracle.schema.json`     | support, t10, t20, t30, v0, v0_x, v0_y, r0, brownian_delta, cf_value, cf_delta |
//! | `simulate` | `simulate.schema.json`   | writes `x.csv`, `y.csv` and this manifest     |
//! | `power`    | `power.schema.json`      | label, rejections, replications, rate, ci_lower, ci_upper |
//!
//! Floats are written in shortest round-trip form, so reports are
//! byte-identical across reruns and thread counts.

mod args;
mod commands;
mod error;
mod input;
mod io;

use clap::Parser;

use args::{Cli, Command};
use error::{CliError, CliResult};

fn configure_threads(threads: Option<usize>) -> CliResult<()> {
    match threads {
        Some(0) => Err(CliError::Config("--threads must be at least 1".into())),
        #[cfg(feature = "parallel")]
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Other(format!("cannot start thread pool: {e}"))),
        _ => Ok(()),
    }
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads(cli.threads)?;
    match &cli.command {
        Command::Compute(a) => commands::compute(a),
        Command::Test(a) => commands::test(a),
        Command::Oracle(a) => commands::oracle(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Power(a) => commands::power(a),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("depcov: {e}");
        std::process::exit(e.exit_code());
    }
}
