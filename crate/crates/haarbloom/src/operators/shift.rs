//! Cancellative dyadic shift operators.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{same_grid, Cube, Grid};
use crate::haar::{analyze, synthesize, HaarCoeffs, Signature, StepFunction};
use crate::operators::LinearOperator;

/// One term `a · f̂(P,ε) h_Q^η` of a shift: `P ∈ R_{(i)}`, `Q ∈ R_{(j)}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftEntry {
    pub r: Cube,
    pub p: Cube,
    pub q: Cube,
    pub eps: Signature,
    pub eta: Signature,
    pub a: f64,
}

/// Size cap for shift coefficients, `√(|P||Q|)/|R| = 2^{-n(i+j)/2}`.
pub fn coefficient_bound(dim: usize, i: u32, j: u32) -> f64 {
    0.5f64.powi((dim as u32 * (i + j)) as i32).sqrt()
}

/// Dyadic shift with parameters `(i, j)`: a sparse table of coefficients
/// `a^{εη}_{PQR}` mapping the Haar coefficient at `(P, ε)` to the Haar
/// function at `(Q, η)` inside each anchor cube `R`.
#[derive(Debug, Clone, Serialize)]
pub struct ShiftOperator {
    grid: Grid,
    i: u32,
    j: u32,
    entries: Vec<ShiftEntry>,
}

impl ShiftOperator {
    /// Validates levels, nesting, signatures and the coefficient size cap.
    /// Anchors must satisfy `level(R) ≤ K−1−max(i,j)` so both `P` and `Q`
    /// carry Haar coefficients; parameters admitting no such anchor are
    /// rejected.
    pub fn new(grid: Grid, i: u32, j: u32, entries: Vec<ShiftEntry>) -> Result<ShiftOperator> {
        let depth = grid.depth();
        let reach = i.max(j);
        if i + j > depth || reach + 1 > depth {
            return Err(Error::DepthOverflow(format!(
                "shift parameters ({i},{j}) admit no anchor cube on a depth-{depth} grid"
            )));
        }
        let max_anchor = depth - 1 - reach;
        let bound = coefficient_bound(grid.dim(), i, j);
        for e in &entries {
            if !grid.contains(e.r) || e.r.level > max_anchor {
                return Err(Error::MalformedShiftTable(format!(
                    "anchor {:?} outside levels 0..={max_anchor}",
                    e.r
                )));
            }
            if e.p.level != e.r.level + i || !grid.is_ancestor_of(e.r, e.p) {
                return Err(Error::MalformedShiftTable(format!(
                    "{:?} is not an i-th generation descendant of {:?}",
                    e.p, e.r
                )));
            }
            if e.q.level != e.r.level + j || !grid.is_ancestor_of(e.r, e.q) {
                return Err(Error::MalformedShiftTable(format!(
                    "{:?} is not a j-th generation descendant of {:?}",
                    e.q, e.r
                )));
            }
            for sig in [&e.eps, &e.eta] {
                if sig.dim() != grid.dim() {
                    return Err(Error::SignatureMismatch(sig.dim(), grid.dim()));
                }
                if !sig.is_cancellative() {
                    return Err(Error::MalformedShiftTable(
                        "shift tables use cancellative signatures only".into(),
                    ));
                }
            }
            if !e.a.is_finite() || e.a.abs() > bound {
                return Err(Error::CoefficientBound { value: e.a, bound });
            }
        }
        Ok(ShiftOperator {
            grid,
            i,
            j,
            entries,
        })
    }

    pub fn params(&self) -> (u32, u32) {
        (self.i, self.j)
    }

    /// Complexity weight `κ_ij = max(i, j, 1)`.
    pub fn kappa(&self) -> u32 {
        self.i.max(self.j).max(1)
    }

    pub fn entries(&self) -> &[ShiftEntry] {
        &self.entries
    }

    pub fn coefficient_bound(&self) -> f64 {
        coefficient_bound(self.grid.dim(), self.i, self.j)
    }

    /// The adjoint shift: parameters `(j, i)` with the table transposed.
    pub fn adjoint(&self) -> ShiftOperator {
        ShiftOperator {
            grid: self.grid.clone(),
            i: self.j,
            j: self.i,
            entries: self
                .entries
                .iter()
                .map(|e| ShiftEntry {
                    r: e.r,
                    p: e.q,
                    q: e.p,
                    eps: e.eta,
                    eta: e.eps,
                    a: e.a,
                })
                .collect(),
        }
    }

    /// Coefficient-space application: `out(Q,η) += a · in(P,ε)`.
    pub(crate) fn apply_coeffs(&self, c: &HaarCoeffs) -> HaarCoeffs {
        let mut out = HaarCoeffs::zero(self.grid.clone());
        for e in &self.entries {
            out.add_code(e.q, e.eta.bits(), e.a * c.get_code(e.p, e.eps.bits()));
        }
        out
    }

    pub(crate) fn apply_coeffs_adjoint(&self, c: &HaarCoeffs) -> HaarCoeffs {
        let mut out = HaarCoeffs::zero(self.grid.clone());
        for e in &self.entries {
            out.add_code(e.p, e.eps.bits(), e.a * c.get_code(e.q, e.eta.bits()));
        }
        out
    }
}

impl LinearOperator for ShiftOperator {
    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn apply(&self, f: &StepFunction) -> Result<StepFunction> {
        same_grid(&self.grid, f.grid())?;
        Ok(synthesize(&self.apply_coeffs(&analyze(f))))
    }

    fn apply_adjoint(&self, f: &StepFunction) -> Result<StepFunction> {
        same_grid(&self.grid, f.grid())?;
        Ok(synthesize(&self.apply_coeffs_adjoint(&analyze(f))))
    }
}

impl<'de> Deserialize<'de> for ShiftOperator {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            grid: Grid,
            i: u32,
            j: u32,
            entries: Vec<ShiftEntry>,
        }
        let raw = Raw::deserialize(d)?;
        ShiftOperator::new(raw.grid, raw.i, raw.j, raw.entries).map_err(serde::de::Error::custom)
    }
}

/// Random shift with parameters `(i, j)`: coefficients uniform in
/// `[-bound, +bound]`. Dense tables fill every `(R, P, Q, ε, η)` slot;
/// sparse ones draw `2^n` random entries per anchor.
pub fn make_random_shift(
    grid: &Grid,
    i: u32,
    j: u32,
    seed: u64,
    dense: bool,
) -> Result<ShiftOperator> {
    let depth = grid.depth();
    let reach = i.max(j);
    if i + j > depth || reach + 1 > depth {
        return Err(Error::DepthOverflow(format!(
            "shift parameters ({i},{j}) admit no anchor cube on a depth-{depth} grid"
        )));
    }
    let max_anchor = depth - 1 - reach;
    let bound = coefficient_bound(grid.dim(), i, j);
    let n = grid.dim();
    let full = grid.branching() as u32 - 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::new();
    for level in 0..=max_anchor {
        for r in grid.level_cubes(level) {
            if dense {
                let mut ps = Vec::new();
                grid.for_each_descendant(r, i, |idx| {
                    ps.push(Cube {
                        level: level + i,
                        index: idx,
                    })
                });
                let mut qs = Vec::new();
                grid.for_each_descendant(r, j, |idx| {
                    qs.push(Cube {
                        level: level + j,
                        index: idx,
                    })
                });
                for &p in &ps {
                    for &q in &qs {
                        for eb in 0..full {
                            for hb in 0..full {
                                entries.push(ShiftEntry {
                                    r,
                                    p,
                                    q,
                                    eps: Signature::new(eb, n).unwrap(),
                                    eta: Signature::new(hb, n).unwrap(),
                                    a: rng.random_range(-bound..=bound),
                                });
                            }
                        }
                    }
                }
            } else {
                for _ in 0..grid.branching() {
                    let p_off = rng.random_range(0..1usize << (n as u32 * i));
                    let q_off = rng.random_range(0..1usize << (n as u32 * j));
                    let eb = rng.random_range(0..full);
                    let hb = rng.random_range(0..full);
                    let p = nth_descendant(grid, r, i, p_off);
                    let q = nth_descendant(grid, r, j, q_off);
                    entries.push(ShiftEntry {
                        r,
                        p,
                        q,
                        eps: Signature::new(eb, n).unwrap(),
                        eta: Signature::new(hb, n).unwrap(),
                        a: rng.random_range(-bound..=bound),
                    });
                }
            }
        }
    }
    ShiftOperator::new(grid.clone(), i, j, entries)
}

/// The `offset`-th descendant of `r`, `down` generations below, in the
/// deterministic enumeration order.
fn nth_descendant(grid: &Grid, r: Cube, down: u32, offset: usize) -> Cube {
    let mut found = r;
    let mut seen = 0usize;
    grid.for_each_descendant(r, down, |idx| {
        if seen == offset {
            found = Cube {
                level: r.level + down,
                index: idx,
            };
        }
        seen += 1;
    });
    found
}
