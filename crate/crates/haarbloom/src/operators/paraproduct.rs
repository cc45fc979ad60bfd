//! Paraproducts with a fixed symbol and the pointwise-product decomposition.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::{same_grid, Grid};
use crate::haar::{analyze, synthesize, HaarCoeffs, LevelAverages, StepFunction};
use crate::operators::{accumulate_down, LinearOperator};

/// The three paraproduct shapes built from a symbol `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParaKind {
    /// `Π_b f = Σ b̂(Q,ε) ⟨f⟩_Q h_Q^ε`
    Pi,
    /// `Π*_b f = Σ b̂(Q,ε) f̂(Q,ε) 1_Q/|Q|`
    PiStar,
    /// `Γ_b f = Σ_{ε≠η} b̂(Q,ε) f̂(Q,η) |Q|^{-1/2} h_Q^{ε+η}`
    Gamma,
}

/// A paraproduct as a reusable operator: the symbol's coefficients are
/// analyzed once at construction.
pub struct ParaproductOp {
    kind: ParaKind,
    b_coeffs: HaarCoeffs,
}

impl ParaproductOp {
    pub fn new(kind: ParaKind, b: &StepFunction) -> ParaproductOp {
        ParaproductOp {
            kind,
            b_coeffs: analyze(b),
        }
    }

    pub fn kind(&self) -> ParaKind {
        self.kind
    }

    fn apply_kind(&self, kind: ParaKind, f: &StepFunction) -> Result<StepFunction> {
        same_grid(self.b_coeffs.grid(), f.grid())?;
        Ok(match kind {
            ParaKind::Pi => pi(&self.b_coeffs, f),
            ParaKind::PiStar => pi_star(&self.b_coeffs, &analyze(f)),
            ParaKind::Gamma => gamma(&self.b_coeffs, &analyze(f)),
        })
    }
}

impl LinearOperator for ParaproductOp {
    fn grid(&self) -> &Grid {
        self.b_coeffs.grid()
    }

    fn apply(&self, f: &StepFunction) -> Result<StepFunction> {
        self.apply_kind(self.kind, f)
    }

    /// `Π* = Π†`, `Π = (Π*)†`, and `Γ` is self-adjoint.
    fn apply_adjoint(&self, f: &StepFunction) -> Result<StepFunction> {
        let dual = match self.kind {
            ParaKind::Pi => ParaKind::PiStar,
            ParaKind::PiStar => ParaKind::Pi,
            ParaKind::Gamma => ParaKind::Gamma,
        };
        self.apply_kind(dual, f)
    }
}

/// One-shot paraproduct application.
pub fn paraproduct(kind: ParaKind, b: &StepFunction, f: &StepFunction) -> Result<StepFunction> {
    ParaproductOp::new(kind, b).apply(f)
}

fn pi(bc: &HaarCoeffs, f: &StepFunction) -> StepFunction {
    let grid = bc.grid().clone();
    let favg = LevelAverages::compute(f);
    let mut out = HaarCoeffs::zero(grid.clone());
    let stride = grid.branching() - 1;
    for k in 0..grid.depth() {
        let avgs = favg.level(k);
        let src = bc.level(k);
        let dst = out.level_mut(k);
        for (index, &avg) in avgs.iter().enumerate() {
            for s in 0..stride {
                dst[index * stride + s] = src[index * stride + s] * avg;
            }
        }
    }
    synthesize(&out)
}

fn pi_star(bc: &HaarCoeffs, fc: &HaarCoeffs) -> StepFunction {
    let grid = bc.grid().clone();
    let stride = grid.branching() - 1;
    let values = accumulate_down(&grid, |k, index| {
        let b_lv = bc.level(k);
        let f_lv = fc.level(k);
        let base = index * stride;
        let mut dot = 0.0;
        for s in 0..stride {
            dot += b_lv[base + s] * f_lv[base + s];
        }
        dot / grid.volume_at(k)
    });
    StepFunction::new(grid, values).expect("one value per cell")
}

fn gamma(bc: &HaarCoeffs, fc: &HaarCoeffs) -> StepFunction {
    let grid = bc.grid().clone();
    let full = grid.branching() as u32 - 1;
    let stride = full as usize;
    let mut out = HaarCoeffs::zero(grid.clone());
    for k in 0..grid.depth() {
        let inv_norm = 1.0 / grid.volume_at(k).sqrt();
        let b_lv = bc.level(k);
        let f_lv = fc.level(k);
        let dst = out.level_mut(k);
        for index in 0..grid.cubes_at(k) {
            let base = index * stride;
            for eb in 0..full {
                let bval = b_lv[base + eb as usize];
                if bval == 0.0 {
                    continue;
                }
                for hb in 0..full {
                    if eb == hb {
                        continue;
                    }
                    // ε ≠ η and both cancellative force ε+η cancellative
                    let sum_sig = !(eb ^ hb) & full;
                    dst[base + sum_sig as usize] += bval * f_lv[base + hb as usize] * inv_norm;
                }
            }
        }
    }
    synthesize(&out)
}

/// Max-norm residual of the pointwise-product expansion
/// `b f = ⟨b⟩⟨f⟩ 1 + Π_b f + Π_f b + Π*_b f + Γ_b f`,
/// whose first term is the base-cube boundary correction.
pub fn product_decomposition_check(b: &StepFunction, f: &StepFunction) -> Result<f64> {
    same_grid(b.grid(), f.grid())?;
    let grid = b.grid().clone();
    let b_mean = b.integral() / grid.volume_at(0);
    let f_mean = f.integral() / grid.volume_at(0);
    let mut rhs = StepFunction::constant(grid, b_mean * f_mean);
    rhs = rhs.add(&paraproduct(ParaKind::Pi, b, f)?)?;
    rhs = rhs.add(&paraproduct(ParaKind::Pi, f, b)?)?;
    rhs = rhs.add(&paraproduct(ParaKind::PiStar, b, f)?)?;
    rhs = rhs.add(&paraproduct(ParaKind::Gamma, b, f)?)?;
    b.mul(f)?.max_abs_diff(&rhs)
}
