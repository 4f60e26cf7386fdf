// Copyright 2026 The stokescell authors
//
// Licensed under the Apache license, version 2.0 (the "license");
// you may not use this file except in compliance with the license.
// You may obtain a copy of the license at
//
//     http://www.apache.org/licenses/license-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the license is distributed on an "as is" basis,
// without warranties or conditions of any kind, either express or implied.
// See the license for the specific language governing permissions and
// limitations under the license.


//! `stokescell` command line.
//!
//! Exit codes: 0 success, 1 input error, 2 numerical-invariant failure.

mod commands;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "stokescell", version, about = "Stokes capacity matrices and periodic cell correctors")]
struct Cli {
    /// Worker threads; falls back to STOKESCELL_THREADS, then to all cores.
    #[arg(long, global = true, env = "STOKESCELL_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Kernel basis, A_T and M of a hole, with a refinement table.
    Capacity(ShapeArgs),
    /// Cell correctors over a list of η.
    Cell(SweepArgs),
    /// Two-scale rate study with fitted slopes and a pass/fail summary.
    Rates(SweepArgs),
    /// Periodic Green function self-test.
    GreenSelftest(SelftestArgs),
    /// Regime classification of one (ε, η) pair.
    Regime(RegimeArgs),
    /// Jump relations of the layer potentials for a smooth density.
    Jumps(ShapeArgs),
}

#[derive(Args)]
pub struct Common {
    /// Output directory; results go to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Tolerance of the command's invariant check.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Args)]
pub struct ShapeArgs {
    /// Shape JSON, e.g. {"dim":2,"kind":"kite","scale":0.3}.
    #[arg(long)]
    pub shape: PathBuf,
    /// Node count: INT in 2D, AxB in 3D.
    #[arg(long)]
    pub n: Option<String>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub shape: ShapeArgs,
    /// Dimension check against the shape file.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Comma-separated η values; defaults to 0.2,0.1,0.05 (3D) or 1e-2,1e-3,1e-4 (2D).
    #[arg(long, value_delimiter = ',')]
    pub etas: Option<Vec<f64>>,
    /// Comma-separated ε values.
    #[arg(long, value_delimiter = ',', default_value = "0.1")]
    pub eps: Vec<f64>,
    /// Direction index k (1-based); all directions when absent (cell only).
    #[arg(long)]
    pub k: Option<usize>,
}

#[derive(Args)]
pub struct SelftestArgs {
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args)]
pub struct RegimeArgs {
    #[arg(long)]
    pub dim: usize,
    #[arg(long)]
    pub eps: f64,
    #[arg(long)]
    pub eta: f64,
    /// Shape JSON; emits the effective-model coefficients when given.
    #[arg(long)]
    pub shape: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<String>,
    #[command(flatten)]
    pub common: Common,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    let res = match cli.command {
        Command::Capacity(a) => commands::capacity(&a),
        Command::Cell(a) => commands::cell(&a),
        Command::Rates(a) => commands::rates(&a),
        Command::GreenSelftest(a) => commands::green_selftest(&a),
        Command::Regime(a) => commands::regime(&a),
        Command::Jumps(a) => commands::jumps(&a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
