//! Λ-operators: the cascade terms appearing in the remainder of the
//! non-cancellative shift decomposition.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::{same_grid, Cube, Grid};
use crate::haar::{analyze, synthesize, HaarCoeffs, StepFunction};
use crate::operators::LinearOperator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LambdaKind {
    /// `Λ_{a,b} f = Σ_{Q,ε} â(Q,ε) (1/|Q|) (Σ_{P⊆Q,η} b̂(P,η) f̂(P,η)) h_Q^ε`
    Lambda,
    /// `Λ*_{d,b} f = Σ_{Q,ε} d̂(Q,ε) f̂(Q,ε) (1/|Q|) Σ_{P⊆Q,η} b̂(P,η) h_P^η`
    LambdaStar,
}

/// A Λ-operator with both symbols fixed; `apply_adjoint` swaps the kind, so
/// `⟨Λ_{a,b} f, g⟩ = ⟨f, Λ*_{a,b} g⟩`.
pub struct LambdaOp {
    kind: LambdaKind,
    symbol_coeffs: HaarCoeffs,
    b_coeffs: HaarCoeffs,
}

impl LambdaOp {
    pub fn new(kind: LambdaKind, symbol: &StepFunction, b: &StepFunction) -> Result<LambdaOp> {
        same_grid(symbol.grid(), b.grid())?;
        Ok(LambdaOp {
            kind,
            symbol_coeffs: analyze(symbol),
            b_coeffs: analyze(b),
        })
    }

    pub fn kind(&self) -> LambdaKind {
        self.kind
    }

    fn apply_kind(&self, kind: LambdaKind, f: &StepFunction) -> Result<StepFunction> {
        same_grid(self.grid(), f.grid())?;
        let fc = analyze(f);
        let out = match kind {
            LambdaKind::Lambda => lambda(&self.symbol_coeffs, &self.b_coeffs, &fc),
            LambdaKind::LambdaStar => lambda_star(&self.symbol_coeffs, &self.b_coeffs, &fc),
        };
        Ok(synthesize(&out))
    }
}

impl LinearOperator for LambdaOp {
    fn grid(&self) -> &Grid {
        self.symbol_coeffs.grid()
    }

    fn apply(&self, f: &StepFunction) -> Result<StepFunction> {
        self.apply_kind(self.kind, f)
    }

    fn apply_adjoint(&self, f: &StepFunction) -> Result<StepFunction> {
        let dual = match self.kind {
            LambdaKind::Lambda => LambdaKind::LambdaStar,
            LambdaKind::LambdaStar => LambdaKind::Lambda,
        };
        self.apply_kind(dual, f)
    }
}

/// One-shot application.
pub fn lambda_op(
    kind: LambdaKind,
    symbol: &StepFunction,
    b: &StepFunction,
    f: &StepFunction,
) -> Result<StepFunction> {
    LambdaOp::new(kind, symbol, b)?.apply(f)
}

/// Bottom-up inner sums `m(Q) = Σ_{P⊆Q,η} b̂(P,η) f̂(P,η)`, then
/// `out(Q,ε) = â(Q,ε) m(Q)/|Q|`.
fn lambda(ac: &HaarCoeffs, bc: &HaarCoeffs, fc: &HaarCoeffs) -> HaarCoeffs {
    let grid = ac.grid().clone();
    let depth = grid.depth();
    let stride = grid.branching() - 1;
    let mut out = HaarCoeffs::zero(grid.clone());
    if depth == 0 {
        return out;
    }
    let mut inner: Vec<f64> = Vec::new();
    for k in (0..depth).rev() {
        let b_lv = bc.level(k);
        let f_lv = fc.level(k);
        let mut cur = vec![0.0; grid.cubes_at(k)];
        for (index, slot) in cur.iter_mut().enumerate() {
            let base = index * stride;
            let mut dot = 0.0;
            for s in 0..stride {
                dot += b_lv[base + s] * f_lv[base + s];
            }
            let q = Cube { level: k, index };
            let mut below = 0.0;
            if k + 1 < depth {
                for code in 0..grid.branching() {
                    below += inner[grid.child_unchecked(q, code).index];
                }
            }
            *slot = dot + below;
        }
        let a_lv = ac.level(k);
        let dst = out.level_mut(k);
        let inv_vol = 1.0 / grid.volume_at(k);
        for (index, &m) in cur.iter().enumerate() {
            let base = index * stride;
            for s in 0..stride {
                dst[base + s] = a_lv[base + s] * m * inv_vol;
            }
        }
        inner = cur;
    }
    out
}

/// Top-down prefix sums `t(P) = Σ_{Q⊇P,ε} d̂(Q,ε) f̂(Q,ε)/|Q|`, then
/// `out(P,η) = b̂(P,η) t(P)`.
fn lambda_star(dc: &HaarCoeffs, bc: &HaarCoeffs, fc: &HaarCoeffs) -> HaarCoeffs {
    let grid = dc.grid().clone();
    let depth = grid.depth();
    let stride = grid.branching() - 1;
    let mut out = HaarCoeffs::zero(grid.clone());
    let mut t = vec![0.0f64; 1];
    for k in 0..depth {
        let d_lv = dc.level(k);
        let f_lv = fc.level(k);
        let b_lv = bc.level(k);
        let dst = out.level_mut(k);
        let inv_vol = 1.0 / grid.volume_at(k);
        for (index, slot) in t.iter_mut().enumerate() {
            let base = index * stride;
            let mut dot = 0.0;
            for s in 0..stride {
                dot += d_lv[base + s] * f_lv[base + s];
            }
            *slot += dot * inv_vol;
            for s in 0..stride {
                dst[base + s] = b_lv[base + s] * *slot;
            }
        }
        if k + 1 < depth {
            let mut next = vec![0.0; grid.cubes_at(k + 1)];
            for (index, &v) in t.iter().enumerate() {
                let q = Cube { level: k, index };
                for code in 0..grid.branching() {
                    next[grid.child_unchecked(q, code).index] = v;
                }
            }
            t = next;
        }
    }
    out
}
