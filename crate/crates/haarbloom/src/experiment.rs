//! Reproducible experiment drivers: run configuration, seeded instance
//! generators, exact-identity suites, the seven-quantity comparability
//! table, and the concrete inequality-sweep families exposed by the CLI.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::bmo::{
    bmo_equivalence_report, bmo_norm, bmo_q_norm, unweighted_bmo_norm, BmoEquivalence,
};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::haar::{
    analyze, avg_difference_check, parseval_check, synthesize, HaarCoeffs, Signature, StepFunction,
};
use crate::operators::{
    commutator_decomposition_check, make_random_shift, noncancellative_remainder_check,
    paraproduct, product_decomposition_check, remainder, Commutator, LambdaKind, LambdaOp,
    LinearOperator, NonCancellativeShift, ParaKind, ParaproductOp, RemainderMethod,
};
use crate::opnorm::{opnorm_lp, shifted_square_opnorm};
use crate::sweep::{derive_seed, inequality_sweep, SweepRecord, SweepReport};
use crate::weights::{ap_characteristic, bloom, gen_cascade_weight, Weight};

/// Full description of a deterministic run; every random draw is derived
/// from `seed`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dim: usize,
    pub depth: u32,
    /// Rigid grid translation (length ≤ dim), in units of the base side.
    pub shift: Vec<f64>,
    pub p: f64,
    pub trials: usize,
    pub seed: u64,
    /// Sibling-ratio bound of the cascade weight generator.
    pub ratio_bound: f64,
    /// Per-level decay of random symbol coefficients.
    pub theta: f64,
    /// Rescale generated symbols to unit Bloom BMO² norm.
    pub normalize_symbol: bool,
    pub shift_i: u32,
    pub shift_j: u32,
    /// Dense shift tables (every slot) vs sparse random ones.
    pub dense: bool,
    /// Random starts per norm estimation.
    pub starts: usize,
    /// Iteration cap per norm-estimation start.
    pub iters: usize,
    /// Residual tolerance for exact identities.
    pub tolerance: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dim: 1,
            depth: 4,
            shift: Vec::new(),
            p: 2.0,
            trials: 50,
            seed: 7,
            ratio_bound: 1.5,
            theta: 0.7,
            normalize_symbol: true,
            shift_i: 1,
            shift_j: 1,
            dense: true,
            starts: 8,
            iters: 500,
            tolerance: 1e-12,
        }
    }
}

impl ExperimentConfig {
    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.dim, self.depth, &self.shift)
    }

    pub fn from_json(text: &str) -> Result<ExperimentConfig> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Random symbol with Haar coefficients `θ^level · |P|^{1/2} · U(−1,1)`;
/// mean-zero by construction.
pub fn gen_symbol(grid: &Grid, theta: f64, seed: u64) -> StepFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = HaarCoeffs::zero(grid.clone());
    for k in 0..grid.depth() {
        let scale = theta.powi(k as i32) * grid.volume_at(k).sqrt();
        for q in grid.level_cubes(k) {
            for sig in Signature::cancellative(grid.dim()) {
                c.add_code(q, sig.bits(), scale * rng.random_range(-1.0..1.0));
            }
        }
    }
    synthesize(&c)
}

/// Random cell-valued function, uniform in `(-1, 1)` per cell.
pub fn gen_step(grid: &Grid, seed: u64) -> StepFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    StepFunction::from_cell_fn(grid.clone(), |_| rng.random_range(-1.0..1.0))
}

/// Symbol from [`gen_symbol`], rescaled to `‖b‖_{BMO²(ν)} = 1` when the
/// norm is positive.
pub fn gen_unit_bloom_symbol(
    grid: &Grid,
    theta: f64,
    seed: u64,
    nu: &Weight,
) -> Result<StepFunction> {
    let b = gen_symbol(grid, theta, seed);
    let norm = bmo_q_norm(&b, nu, 2.0)?.value;
    Ok(if norm > 0.0 { b.scale(1.0 / norm) } else { b })
}

/// Outcome of one named identity check over many random trials.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdentityOutcome {
    pub name: String,
    pub trials: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// One JSONL log row: every emitted number carries its provenance triple.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LogRow {
    pub module: String,
    pub operation: String,
    pub instance: usize,
    pub value: f64,
}

fn outcome(name: &str, trials: usize, max_residual: f64, tolerance: f64) -> IdentityOutcome {
    IdentityOutcome {
        name: name.to_string(),
        trials,
        max_residual,
        tolerance,
        pass: max_residual <= tolerance,
    }
}

/// Runs the exact-identity suites (round trip, Parseval, average-difference
/// expansion, product decomposition, adjointness, remainder routes,
/// commutator expansion, non-cancellative remainders, and the 1-d
/// degeneration of Γ). Returns per-check outcomes and the full residual log.
pub fn run_identity_suite(cfg: &ExperimentConfig) -> Result<(Vec<IdentityOutcome>, Vec<LogRow>)> {
    let grid = cfg.grid()?;
    let depth = grid.depth();
    let tol = cfg.tolerance;
    let mut log: Vec<LogRow> = Vec::new();
    let mut outcomes = Vec::new();

    let push = |log: &mut Vec<LogRow>, op: &str, t: usize, v: f64| {
        log.push(LogRow {
            module: "identities".into(),
            operation: op.into(),
            instance: t,
            value: v,
        });
    };

    let shift_pairs: Vec<(u32, u32)> = [(0, 1), (1, 0), (1, 1), (1, 2), (2, 1)]
        .into_iter()
        .filter(|&(i, j)| i + j <= depth && i.max(j) < depth)
        .collect();

    let mut round_trip = 0.0f64;
    let mut parseval = 0.0f64;
    let mut avg_diff = 0.0f64;
    let mut decomp = 0.0f64;
    let mut adjoint = 0.0f64;
    let mut remainder_gap = 0.0f64;
    let mut commutator_gap = 0.0f64;
    let mut noncanc = 0.0f64;
    let mut gamma_1d = 0.0f64;

    for t in 0..cfg.trials {
        let s = derive_seed(cfg.seed, t);
        let f = gen_step(&grid, s);
        let g = gen_step(&grid, s ^ 0xA5A5);
        let b = gen_symbol(&grid, cfg.theta, s ^ 0x5A5A);

        let rt = f.max_abs_diff(&synthesize(&analyze(&f)))?;
        push(&mut log, "haar_round_trip", t, rt);
        round_trip = round_trip.max(rt);

        let (pl, pr) = parseval_check(&f);
        let pv = (pl - pr).abs();
        push(&mut log, "parseval", t, pv);
        parseval = parseval.max(pv);

        let mut rng = ChaCha8Rng::seed_from_u64(s ^ 0xC3C3);
        for i in 1..=depth {
            let level = rng.random_range(i..=depth);
            let index = rng.random_range(0..grid.cubes_at(level));
            let q = crate::grid::Cube { level, index };
            let (al, ar) = avg_difference_check(&f, q, i)?;
            avg_diff = avg_diff.max((al - ar).abs());
        }
        push(&mut log, "avg_difference", t, avg_diff);

        let pd = product_decomposition_check(&b, &f)?;
        push(&mut log, "product_decomposition", t, pd);
        decomp = decomp.max(pd);

        for kind in [ParaKind::Pi, ParaKind::PiStar, ParaKind::Gamma] {
            let op = ParaproductOp::new(kind, &b);
            let lhs = op.apply(&f)?.inner(&g)?;
            let rhs = f.inner(&op.apply_adjoint(&g)?)?;
            adjoint = adjoint.max((lhs - rhs).abs());
        }
        if let Some(&(i, j)) = shift_pairs.first() {
            let sh = make_random_shift(&grid, i, j, s ^ 0x77, cfg.dense)?;
            let lhs = sh.apply(&f)?.inner(&g)?;
            let rhs = f.inner(&sh.apply_adjoint(&g)?)?;
            adjoint = adjoint.max((lhs - rhs).abs());
        }
        push(&mut log, "adjoint_pairing", t, adjoint);

        for &(i, j) in &shift_pairs {
            let sh = make_random_shift(
                &grid,
                i,
                j,
                s ^ (0x100 + i as u64 + 16 * j as u64),
                cfg.dense,
            )?;
            let b0 = {
                let mean = b.integral() / grid.volume_at(0);
                b.sub(&StepFunction::constant(grid.clone(), mean))?
            };
            let direct = remainder(&b0, &sh, &f, RemainderMethod::Direct)?;
            for m in [RemainderMethod::Formula, RemainderMethod::Telescope] {
                let other = remainder(&b0, &sh, &f, m)?;
                remainder_gap = remainder_gap.max(direct.max_abs_diff(&other)?);
            }
            let cg = commutator_decomposition_check(&b, &sh, &f)?;
            commutator_gap = commutator_gap.max(cg);
        }
        push(&mut log, "remainder_routes", t, remainder_gap);
        push(&mut log, "commutator_expansion", t, commutator_gap);

        let core = make_random_shift(&grid, 0, 0, s ^ 0x33, cfg.dense)?;
        let mk_unit = |raw: StepFunction| {
            let n = unweighted_bmo_norm(&raw);
            if n > 0.0 {
                raw.scale(1.0 / n)
            } else {
                raw
            }
        };
        let ncs = NonCancellativeShift::new(
            core,
            mk_unit(gen_symbol(&grid, cfg.theta, s ^ 0x44)),
            mk_unit(gen_symbol(&grid, cfg.theta, s ^ 0x55)),
        )?;
        let res = noncancellative_remainder_check(&ncs, &b, &f)?;
        push(&mut log, "noncancellative_remainders", t, res.max());
        noncanc = noncanc.max(res.max());

        if grid.dim() == 1 {
            let gamma = paraproduct(ParaKind::Gamma, &b, &f)?;
            let gz = gamma.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
            push(&mut log, "gamma_vanishes_1d", t, gz);
            gamma_1d = gamma_1d.max(gz);
        }
    }

    outcomes.push(outcome("haar_round_trip", cfg.trials, round_trip, tol));
    outcomes.push(outcome("parseval", cfg.trials, parseval, tol));
    outcomes.push(outcome("avg_difference", cfg.trials, avg_diff, tol));
    outcomes.push(outcome("product_decomposition", cfg.trials, decomp, tol));
    outcomes.push(outcome("adjoint_pairing", cfg.trials, adjoint, tol));
    outcomes.push(outcome(
        "remainder_routes",
        cfg.trials * shift_pairs.len(),
        remainder_gap,
        tol,
    ));
    outcomes.push(outcome(
        "commutator_expansion",
        cfg.trials * shift_pairs.len(),
        commutator_gap,
        tol,
    ));
    outcomes.push(outcome(
        "noncancellative_remainders",
        cfg.trials,
        noncanc,
        tol,
    ));
    if grid.dim() == 1 {
        outcomes.push(outcome("gamma_vanishes_1d", cfg.trials, gamma_1d, tol));
    }
    Ok((outcomes, log))
}

/// Per-instance seven-quantity rows for the comparability table.
pub fn run_bmo_equivalence(cfg: &ExperimentConfig) -> Result<Vec<(usize, BmoEquivalence)>> {
    let grid = cfg.grid()?;
    let mut out = Vec::with_capacity(cfg.trials);
    for t in 0..cfg.trials {
        let s = derive_seed(cfg.seed, t);
        let mu = gen_cascade_weight(&grid, cfg.ratio_bound, s ^ 0x11)?;
        let la = gen_cascade_weight(&grid, cfg.ratio_bound, s ^ 0x22)?;
        let b = gen_symbol(&grid, cfg.theta, s ^ 0x33);
        let rep = bmo_equivalence_report(&b, &mu, &la, cfg.p, cfg.starts, cfg.iters)?;
        out.push((t, rep));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepTarget {
    ShiftNorm,
    ShiftedSqfn,
    Paraproduct,
    Commutator,
    Lambda,
}

impl std::str::FromStr for SweepTarget {
    type Err = Error;
    fn from_str(s: &str) -> Result<SweepTarget> {
        match s {
            "shift-norm" => Ok(SweepTarget::ShiftNorm),
            "shifted-sqfn" => Ok(SweepTarget::ShiftedSqfn),
            "paraproduct" => Ok(SweepTarget::Paraproduct),
            "commutator" => Ok(SweepTarget::Commutator),
            "lambda" => Ok(SweepTarget::Lambda),
            other => Err(Error::InvalidArgument(format!(
                "unknown sweep target `{other}`"
            ))),
        }
    }
}

fn kappa(i: u32, j: u32) -> f64 {
    i.max(j).max(1) as f64
}

/// `(i, j)` grid swept by the shift-indexed families.
const IJ_PAIRS: [(u32, u32); 9] = [
    (0, 0),
    (0, 1),
    (0, 2),
    (1, 0),
    (1, 1),
    (1, 2),
    (2, 0),
    (2, 1),
    (2, 2),
];

/// Dispatches one sweep family. `cfg.trials` counts instances per
/// `(i, j)` cell for shift-indexed targets, and total instances otherwise.
pub fn run_sweep(cfg: &ExperimentConfig, target: SweepTarget) -> Result<SweepReport> {
    let grid = cfg.grid()?;
    let depth = grid.depth();
    let n = grid.dim();
    let p = cfg.p;

    let report = match target {
        SweepTarget::ShiftedSqfn => {
            let total = IJ_PAIRS.len() * cfg.trials;
            inequality_sweep(total, cfg.seed, |t, s| {
                let (i, j) = IJ_PAIRS[t % IJ_PAIRS.len()];
                if j > depth || i >= depth {
                    return Ok(None);
                }
                let w = gen_cascade_weight(&grid, cfg.ratio_bound, s)?;
                let ap = ap_characteristic(&w, 2.0)?.value;
                let lhs = shifted_square_opnorm(&w, i, j, cfg.starts, cfg.iters)?.value;
                let rhs = 2f64.powf(n as f64 * (i + j) as f64 / 2.0);
                Ok(Some(SweepRecord {
                    id: t,
                    i,
                    j,
                    p: 2.0,
                    ap_mu: ap,
                    ap_lambda: ap,
                    axis: (i + j) as f64,
                    lhs,
                    rhs,
                }))
            })
        }
        SweepTarget::ShiftNorm => {
            let total = IJ_PAIRS.len() * cfg.trials;
            inequality_sweep(total, cfg.seed, |t, s| {
                let (i, j) = IJ_PAIRS[t % IJ_PAIRS.len()];
                if i + j > depth || i.max(j) + 1 > depth {
                    return Ok(None);
                }
                let w = gen_cascade_weight(&grid, cfg.ratio_bound, s)?;
                let ap = ap_characteristic(&w, p)?.value;
                let sh = make_random_shift(&grid, i, j, s ^ 0x51F7, cfg.dense)?;
                let lhs = opnorm_lp(&sh, &w, &w, p, cfg.starts, cfg.iters)?.value;
                let rhs = kappa(i, j) * ap.powf(1f64.max(1.0 / (p - 1.0)));
                Ok(Some(SweepRecord {
                    id: t,
                    i,
                    j,
                    p,
                    ap_mu: ap,
                    ap_lambda: ap,
                    axis: (i + j) as f64,
                    lhs,
                    rhs,
                }))
            })
        }
        SweepTarget::Paraproduct => inequality_sweep(cfg.trials, cfg.seed, |t, s| {
            let mu = gen_cascade_weight(&grid, cfg.ratio_bound, s ^ 0x11)?;
            let la = gen_cascade_weight(&grid, cfg.ratio_bound, s ^ 0x22)?;
            let nu = bloom(&mu, &la, p)?;
            let b = if cfg.normalize_symbol {
                gen_unit_bloom_symbol(&grid, cfg.theta, s ^ 0x33, &nu)?
            } else {
                gen_symbol(&grid, cfg.theta, s ^ 0x33)
            };
            let kind = if t % 2 == 0 {
                ParaKind::Pi
            } else {
                ParaKind::PiStar
            };
            let op = ParaproductOp::new(kind, &b);
            let lhs = opnorm_lp(&op, &mu, &la, p, cfg.starts, cfg.iters)?.value;
            let rhs = bmo_q_norm(&b, &nu, 2.0)?.value;
            Ok(Some(SweepRecord {
                id: t,
                i: 0,
                j: 0,
                p,
                ap_mu: ap_characteristic(&mu, p)?.value,
                ap_lambda: ap_characteristic(&la, p)?.value,
                axis: depth as f64,
                lhs,
                rhs,
            }))
        }),
        SweepTarget::Commutator => {
            let total = IJ_PAIRS.len() * cfg.trials;
            inequality_sweep(total, cfg.seed, |t, s| {
                let (i, j) = IJ_PAIRS[t % IJ_PAIRS.len()];
                if i + j > depth || i.max(j) + 1 > depth {
                    return Ok(None);
                }
                let mu = gen_cascade_weight(&grid, cfg.ratio_bound, s ^ 0x11)?;
                let la = gen_cascade_weight(&grid, cfg.ratio_bound, s ^ 0x22)?;
                let nu = bloom(&mu, &la, p)?;
                let b = if cfg.normalize_symbol {
                    gen_unit_bloom_symbol(&grid, cfg.theta, s ^ 0x33, &nu)?
                } else {
                    gen_symbol(&grid, cfg.theta, s ^ 0x33)
                };
                let sh = make_random_shift(&grid, i, j, s ^ 0x44, cfg.dense)?;
                let com = Commutator::new(b.clone(), Arc::new(sh))?;
                let lhs = opnorm_lp(&com, &mu, &la, p, cfg.starts, cfg.iters)?.value;
                let rhs = kappa(i, j) * bmo_norm(&b, &nu)?.value;
                Ok(Some(SweepRecord {
                    id: t,
                    i,
                    j,
                    p,
                    ap_mu: ap_characteristic(&mu, p)?.value,
                    ap_lambda: ap_characteristic(&la, p)?.value,
                    axis: (i + j) as f64,
                    lhs,
                    rhs,
                }))
            })
        }
        SweepTarget::Lambda => inequality_sweep(cfg.trials, cfg.seed, |t, s| {
            let mu = gen_cascade_weight(&grid, cfg.ratio_bound, s ^ 0x11)?;
            let la = gen_cascade_weight(&grid, cfg.ratio_bound, s ^ 0x22)?;
            let nu = bloom(&mu, &la, p)?;
            let a_raw = gen_symbol(&grid, cfg.theta, s ^ 0x33);
            let a_norm = unweighted_bmo_norm(&a_raw);
            let a = if a_norm > 0.0 {
                a_raw.scale(1.0 / a_norm)
            } else {
                a_raw
            };
            let b = if cfg.normalize_symbol {
                gen_unit_bloom_symbol(&grid, cfg.theta, s ^ 0x44, &nu)?
            } else {
                gen_symbol(&grid, cfg.theta, s ^ 0x44)
            };
            let kind = if t % 2 == 0 {
                LambdaKind::Lambda
            } else {
                LambdaKind::LambdaStar
            };
            let op = LambdaOp::new(kind, &a, &b)?;
            let lhs = opnorm_lp(&op, &mu, &la, p, cfg.starts, cfg.iters)?.value;
            let rhs = unweighted_bmo_norm(&a) * bmo_q_norm(&b, &nu, 2.0)?.value;
            let ap_mu = ap_characteristic(&mu, p)?.value;
            let ap_lambda = ap_characteristic(&la, p)?.value;
            Ok(Some(SweepRecord {
                id: t,
                i: 0,
                j: 0,
                p,
                ap_mu,
                ap_lambda,
                axis: ap_mu * ap_lambda,
                lhs,
                rhs,
            }))
        }),
    };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips_and_rejects_unknown_fields() {
        let cfg = ExperimentConfig::default();
        let text = cfg.to_json().unwrap();
        let back = ExperimentConfig::from_json(&text).unwrap();
        assert_eq!(back.depth, cfg.depth);
        assert!(ExperimentConfig::from_json("{\"bogus\": 1}").is_err());
        let partial = ExperimentConfig::from_json("{\"depth\": 3, \"dim\": 2}").unwrap();
        assert_eq!(partial.depth, 3);
        assert_eq!(partial.dim, 2);
        assert_eq!(partial.trials, ExperimentConfig::default().trials);
    }

    #[test]
    fn symbol_generator_is_deterministic_and_mean_zero() {
        let grid = Grid::new(2, 3, &[]).unwrap();
        let a = gen_symbol(&grid, 0.7, 9);
        let b = gen_symbol(&grid, 0.7, 9);
        let c = gen_symbol(&grid, 0.7, 10);
        assert_eq!(a.values(), b.values());
        assert_ne!(a.values(), c.values());
        assert!(a.integral().abs() < 1e-12);
    }

    #[test]
    fn unit_bloom_symbol_has_unit_norm() {
        let grid = Grid::new(1, 4, &[]).unwrap();
        let mu = gen_cascade_weight(&grid, 1.5, 1).unwrap();
        let la = gen_cascade_weight(&grid, 1.5, 2).unwrap();
        let nu = bloom(&mu, &la, 2.0).unwrap();
        let b = gen_unit_bloom_symbol(&grid, 0.7, 3, &nu).unwrap();
        assert!((bmo_q_norm(&b, &nu, 2.0).unwrap().value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn identity_suite_passes_on_default_sized_grids() {
        for (dim, depth) in [(1usize, 4u32), (2, 3)] {
            let cfg = ExperimentConfig {
                dim,
                depth,
                trials: 5,
                ..ExperimentConfig::default()
            };
            let (outcomes, log) = run_identity_suite(&cfg).unwrap();
            for o in &outcomes {
                assert!(o.pass, "dim {dim}: {} residual {}", o.name, o.max_residual);
            }
            assert!(!log.is_empty());
            let has_gamma = outcomes.iter().any(|o| o.name == "gamma_vanishes_1d");
            assert_eq!(has_gamma, dim == 1);
        }
    }

    #[test]
    fn sweep_families_produce_finite_bounded_ratios() {
        let cfg = ExperimentConfig {
            depth: 3,
            trials: 2,
            starts: 2,
            iters: 60,
            ..ExperimentConfig::default()
        };
        for target in [
            SweepTarget::ShiftNorm,
            SweepTarget::ShiftedSqfn,
            SweepTarget::Paraproduct,
            SweepTarget::Commutator,
            SweepTarget::Lambda,
        ] {
            let rep = run_sweep(&cfg, target).unwrap();
            assert!(!rep.records.is_empty(), "{target:?}");
            for r in &rep.records {
                assert!(r.ratio().is_finite(), "{target:?} id {}", r.id);
            }
            assert!(rep.max_ratio.is_finite(), "{target:?}");
        }
    }

    #[test]
    fn sweeps_are_deterministic() {
        let cfg = ExperimentConfig {
            depth: 3,
            trials: 2,
            starts: 2,
            iters: 40,
            ..ExperimentConfig::default()
        };
        let a = run_sweep(&cfg, SweepTarget::Paraproduct).unwrap();
        let b = run_sweep(&cfg, SweepTarget::Paraproduct).unwrap();
        assert_eq!(a.csv_string().unwrap(), b.csv_string().unwrap());
    }

    #[test]
    fn bmo_equivalence_rows_are_zero_consistent() {
        let cfg = ExperimentConfig {
            depth: 3,
            trials: 3,
            starts: 4,
            iters: 120,
            ..ExperimentConfig::default()
        };
        let rows = run_bmo_equivalence(&cfg).unwrap();
        assert_eq!(rows.len(), 3);
        for (t, rep) in rows {
            assert!(rep.zeros_consistent(1e-12), "instance {t}");
            for q in rep.quantities() {
                assert!(q.is_finite() && q >= 0.0);
            }
        }
    }
}
