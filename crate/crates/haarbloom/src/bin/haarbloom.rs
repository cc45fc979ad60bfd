//! Command-line harness for reproducible dyadic-analysis experiments:
//! exact-identity suites, the seven-quantity BMO comparability table, and
//! inequality-ratio sweeps. Exit codes: 0 = pass, 1 = violation,
//! 2 = usage or configuration error.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use haarbloom::experiment::{
    run_bmo_equivalence, run_identity_suite, run_sweep, ExperimentConfig, SweepTarget,
};

#[derive(Parser)]
#[command(
    name = "haarbloom",
    about = "Dyadic Haar analysis experiments on finite grids",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the exact-identity suites and report max residuals.
    Identities(CommonArgs),
    /// Emit the seven-quantity comparability table per instance.
    BmoEquiv(CommonArgs),
    /// Run an inequality-ratio sweep.
    Sweep {
        /// One of: shift-norm, shifted-sqfn, paraproduct, commutator, lambda.
        #[arg(long)]
        target: SweepTargetArg,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepTargetArg {
    ShiftNorm,
    ShiftedSqfn,
    Paraproduct,
    Commutator,
    Lambda,
}

impl From<SweepTargetArg> for SweepTarget {
    fn from(v: SweepTargetArg) -> SweepTarget {
        match v {
            SweepTargetArg::ShiftNorm => SweepTarget::ShiftNorm,
            SweepTargetArg::ShiftedSqfn => SweepTarget::ShiftedSqfn,
            SweepTargetArg::Paraproduct => SweepTarget::Paraproduct,
            SweepTargetArg::Commutator => SweepTarget::Commutator,
            SweepTargetArg::Lambda => SweepTarget::Lambda,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct CommonArgs {
    /// JSON run configuration; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    depth: Option<u32>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Output directory (default: $HAARBLOOM_OUT, else current directory).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Table format for sweep output files.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

fn resolve(common: &CommonArgs) -> Result<(ExperimentConfig, PathBuf), String> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
            ExperimentConfig::from_json(&text).map_err(|e| format!("bad config: {e}"))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(v) = common.seed {
        cfg.seed = v;
    }
    if let Some(v) = common.dim {
        cfg.dim = v;
    }
    if let Some(v) = common.depth {
        cfg.depth = v;
    }
    if let Some(v) = common.p {
        cfg.p = v;
    }
    if let Some(v) = common.trials {
        cfg.trials = v;
    }
    cfg.grid()
        .map_err(|e| format!("bad grid parameters: {e}"))?;
    let out = common
        .out
        .clone()
        .or_else(|| std::env::var_os("HAARBLOOM_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&out).map_err(|e| format!("cannot create {}: {e}", out.display()))?;
    Ok((cfg, out))
}

fn write_jsonl<T: serde::Serialize>(path: &PathBuf, rows: &[T]) -> Result<(), String> {
    let mut buf = Vec::new();
    for row in rows {
        let line = serde_json::to_string(row).map_err(|e| e.to_string())?;
        buf.extend_from_slice(line.as_bytes());
        buf.push(b'\n');
    }
    fs::write(path, buf).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn cmd_identities(common: &CommonArgs) -> Result<ExitCode, String> {
    let (cfg, out) = resolve(common)?;
    let (outcomes, log) = run_identity_suite(&cfg).map_err(|e| e.to_string())?;
    write_jsonl(&out.join("identities.jsonl"), &log)?;
    let mut all_pass = true;
    let mut stdout = std::io::stdout().lock();
    for o in &outcomes {
        all_pass &= o.pass;
        writeln!(
            stdout,
            "identities/{}: trials={} max_residual={:.3e} tolerance={:.1e} {}",
            o.name,
            o.trials,
            o.max_residual,
            o.tolerance,
            if o.pass { "PASS" } else { "FAIL" }
        )
        .map_err(|e| e.to_string())?;
    }
    Ok(if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

#[derive(serde::Serialize)]
struct EquivRow {
    module: &'static str,
    operation: &'static str,
    instance: usize,
    quantities: [f64; 7],
}

fn cmd_bmo_equiv(common: &CommonArgs) -> Result<ExitCode, String> {
    let (cfg, out) = resolve(common)?;
    let rows = run_bmo_equivalence(&cfg).map_err(|e| e.to_string())?;
    let mut violation = false;
    let mut jsonl = Vec::with_capacity(rows.len());
    // max over instances of q_r / q_c where both sides are meaningful
    let mut ratio_max = [[0.0f64; 7]; 7];
    for (t, rep) in &rows {
        let q = rep.quantities();
        if !rep.zeros_consistent(1e-12) || q.iter().any(|v| !v.is_finite()) {
            violation = true;
        }
        for r in 0..7 {
            for c in 0..7 {
                if q[c] > 1e-12 {
                    ratio_max[r][c] = ratio_max[r][c].max(q[r] / q[c]);
                }
            }
        }
        jsonl.push(EquivRow {
            module: "bmo-equivalence",
            operation: "seven_quantities",
            instance: *t,
            quantities: q,
        });
    }
    write_jsonl(&out.join("bmo_equiv.jsonl"), &jsonl)?;
    let summary = serde_json::json!({
        "instances": rows.len(),
        "pairwise_ratio_max": ratio_max,
        "violation": violation,
    });
    println!("{summary}");
    Ok(if violation {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

#[derive(serde::Serialize)]
struct SweepRow<'a> {
    module: &'static str,
    operation: &'a str,
    instance: usize,
    i: u32,
    j: u32,
    p: f64,
    ap_mu: f64,
    ap_lambda: f64,
    axis: f64,
    lhs: f64,
    rhs: f64,
    ratio: f64,
}

fn cmd_sweep(target: SweepTargetArg, common: &CommonArgs) -> Result<ExitCode, String> {
    let (cfg, out) = resolve(common)?;
    let target: SweepTarget = target.into();
    let name = match target {
        SweepTarget::ShiftNorm => "shift-norm",
        SweepTarget::ShiftedSqfn => "shifted-sqfn",
        SweepTarget::Paraproduct => "paraproduct",
        SweepTarget::Commutator => "commutator",
        SweepTarget::Lambda => "lambda",
    };
    let report = run_sweep(&cfg, target).map_err(|e| e.to_string())?;

    let rows: Vec<SweepRow> = report
        .records
        .iter()
        .map(|r| SweepRow {
            module: "sweep",
            operation: name,
            instance: r.id,
            i: r.i,
            j: r.j,
            p: r.p,
            ap_mu: r.ap_mu,
            ap_lambda: r.ap_lambda,
            axis: r.axis,
            lhs: r.lhs,
            rhs: r.rhs,
            ratio: r.ratio(),
        })
        .collect();
    write_jsonl(&out.join(format!("sweep_{name}.jsonl")), &rows)?;

    match common.format {
        Format::Csv => {
            let csv = report.csv_string().map_err(|e| e.to_string())?;
            fs::write(out.join(format!("sweep_{name}.csv")), csv).map_err(|e| e.to_string())?;
        }
        Format::Json => {
            let json = serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?;
            fs::write(out.join(format!("sweep_{name}.json")), json).map_err(|e| e.to_string())?;
        }
    }
    println!("{}", report.json_summary());
    let violation = report.records.iter().any(|r| !r.ratio().is_finite());
    Ok(if violation {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = match &cli.cmd {
        Cmd::Identities(common) => cmd_identities(common),
        Cmd::BmoEquiv(common) => cmd_bmo_equiv(common),
        Cmd::Sweep { target, common } => cmd_sweep(*target, common),
    };
    match run {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
