//! Randomized inequality sweeps: run a family of instances in parallel with
//! deterministic per-trial seeds, record left/right sides of a bound, and
//! summarize the ratio distribution (max, median, spread, rank correlation
//! against a chosen axis).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;

/// One sampled instance of an inequality `lhs ≤ C · rhs`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRecord {
    pub id: usize,
    pub i: u32,
    pub j: u32,
    pub p: f64,
    pub ap_mu: f64,
    pub ap_lambda: f64,
    /// Trend axis for rank correlation (e.g. `i + j`, or the depth `K`).
    pub axis: f64,
    pub lhs: f64,
    pub rhs: f64,
}

impl SweepRecord {
    /// `lhs / rhs`; a vanishing bound yields 0 when the left side also
    /// vanishes and +∞ otherwise.
    pub fn ratio(&self) -> f64 {
        if self.rhs == 0.0 {
            if self.lhs == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            self.lhs / self.rhs
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepReport {
    pub records: Vec<SweepRecord>,
    pub skipped: usize,
    /// Per-skip explanation, indexed on trial id; deterministic.
    pub skip_log: Vec<String>,
    pub max_ratio: f64,
    pub median_ratio: f64,
    /// `max_ratio / median_ratio`.
    pub spread: f64,
    /// Spearman rank correlation of ratio against axis, when defined.
    pub spearman: Option<f64>,
}

/// Deterministic per-trial seed derivation (splitmix64 of a mixed index).
pub fn derive_seed(base: u64, index: usize) -> u64 {
    let mixed = (index as u64)
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(0xD1B5_4A32_D192_ED03);
    let mut z = base ^ mixed;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs `family(trial_index, derived_seed)` for every trial in parallel;
/// output order is by trial index regardless of scheduling. A family may
/// decline an instance (`Ok(None)`) or fail (`Err`), both of which are
/// skipped and logged.
pub fn inequality_sweep<F>(trials: usize, seed: u64, family: F) -> SweepReport
where
    F: Fn(usize, u64) -> Result<Option<SweepRecord>> + Sync,
{
    let outcomes: Vec<_> = (0..trials)
        .into_par_iter()
        .map(|t| family(t, derive_seed(seed, t)))
        .collect();
    let mut records = Vec::with_capacity(trials);
    let mut skip_log = Vec::new();
    for (t, out) in outcomes.into_iter().enumerate() {
        match out {
            Ok(Some(r)) => records.push(r),
            Ok(None) => skip_log.push(format!("trial {t}: declined")),
            Err(e) => skip_log.push(format!("trial {t}: {e}")),
        }
    }
    SweepReport::from_records(records, skip_log)
}

fn median_of_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Tie-averaged ranks, 1-based.
fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap());
    let mut out = vec![0.0; v.len()];
    let mut s = 0;
    while s < idx.len() {
        let mut e = s;
        while e + 1 < idx.len() && v[idx[e + 1]] == v[idx[s]] {
            e += 1;
        }
        let avg = (s + e) as f64 / 2.0 + 1.0;
        for k in s..=e {
            out[idx[k]] = avg;
        }
        s = e + 1;
    }
    out
}

/// Spearman rank correlation with tie-averaged ranks; `None` when fewer
/// than two finite pairs remain or either side has zero rank variance.
pub fn spearman_rho(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len());
    let pairs: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| a.is_finite() && b.is_finite())
        .map(|(&a, &b)| (a, b))
        .collect();
    if pairs.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let rx = ranks(&xs);
    let ry = ranks(&ys);
    let n = rx.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for k in 0..rx.len() {
        let dx = rx[k] - mx;
        let dy = ry[k] - my;
        cov += dx * dy;
        vx += dx * dx;
        vy += dy * dy;
    }
    if vx == 0.0 || vy == 0.0 {
        return None;
    }
    Some(cov / (vx * vy).sqrt())
}

impl SweepReport {
    pub fn from_records(records: Vec<SweepRecord>, skip_log: Vec<String>) -> SweepReport {
        let ratios: Vec<f64> = records.iter().map(SweepRecord::ratio).collect();
        let mut sorted = ratios.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let max_ratio = sorted.last().copied().unwrap_or(f64::NAN);
        let median_ratio = median_of_sorted(&sorted);
        let spread = max_ratio / median_ratio;
        let axes: Vec<f64> = records.iter().map(|r| r.axis).collect();
        let spearman = spearman_rho(&axes, &ratios);
        SweepReport {
            skipped: skip_log.len(),
            records,
            skip_log,
            max_ratio,
            median_ratio,
            spread,
            spearman,
        }
    }

    /// CSV table, one row per record.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "id",
            "i",
            "j",
            "p",
            "ap_mu",
            "ap_lambda",
            "axis",
            "lhs",
            "rhs",
            "ratio",
        ])?;
        for r in &self.records {
            w.write_record([
                r.id.to_string(),
                r.i.to_string(),
                r.j.to_string(),
                r.p.to_string(),
                r.ap_mu.to_string(),
                r.ap_lambda.to_string(),
                r.axis.to_string(),
                r.lhs.to_string(),
                r.rhs.to_string(),
                r.ratio().to_string(),
            ])?;
        }
        w.flush()
            .map_err(|e| crate::error::Error::Serialization(e.to_string()))?;
        Ok(())
    }

    pub fn csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| crate::error::Error::Serialization(e.to_string()))
    }

    /// Summary object with deterministic (sorted) key order.
    pub fn json_summary(&self) -> serde_json::Value {
        serde_json::json!({
            "records": self.records.len(),
            "skipped": self.skipped,
            "max_ratio": self.max_ratio,
            "median_ratio": self.median_ratio,
            "spread": self.spread,
            "spearman": self.spearman,
        })
    }
}
