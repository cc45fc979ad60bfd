//! Remainder of the commutator of a cancellative shift, computed three
//! independent ways, plus the telescoped grouping diagnostics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{same_grid, Cube, Grid};
use crate::haar::{analyze, child_sign, synthesize, HaarCoeffs, LevelAverages, StepFunction};
use crate::operators::{paraproduct, LinearOperator, ParaKind, ShiftOperator};

/// Three algebraically equal routes to the remainder
/// `R f = Π_{Sf} b − S Π_f b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RemainderMethod {
    /// Apply both paraproduct compositions and subtract.
    Direct,
    /// Per-entry sum `Σ a f̂(P,ε) (⟨b⟩_Q − ⟨b⟩_P) h_Q^η`.
    Formula,
    /// Telescoped sum `Σ_{k=1}^j A_k f − Σ_{k=1}^i B_k f`, expanding each
    /// average difference into Haar coefficients of `b` along the ancestor
    /// chains of `Q` and `P`.
    Telescope,
}

fn reject_zero_params(s: &ShiftOperator) -> Result<()> {
    if s.params() == (0, 0) {
        return Err(Error::InvalidArgument(
            "a (0,0) cancellative shift commutes with Π in this sense; its remainder \
             vanishes identically and is handled by the non-cancellative decomposition"
                .into(),
        ));
    }
    Ok(())
}

/// `R f` for a cancellative shift with `(i,j) ≠ (0,0)`.
pub fn remainder(
    b: &StepFunction,
    s: &ShiftOperator,
    f: &StepFunction,
    method: RemainderMethod,
) -> Result<StepFunction> {
    same_grid(b.grid(), f.grid())?;
    same_grid(b.grid(), s.grid())?;
    reject_zero_params(s)?;
    match method {
        RemainderMethod::Direct => {
            let sf = s.apply(f)?;
            let lhs = paraproduct(ParaKind::Pi, &sf, b)?;
            let rhs = s.apply(&paraproduct(ParaKind::Pi, f, b)?)?;
            lhs.sub(&rhs)
        }
        RemainderMethod::Formula => {
            let grid = b.grid().clone();
            let b_avg = LevelAverages::compute(b);
            let fc = analyze(f);
            let mut out = HaarCoeffs::zero(grid);
            for e in s.entries() {
                let diff = b_avg.avg(e.q) - b_avg.avg(e.p);
                out.add_code(
                    e.q,
                    e.eta.bits(),
                    e.a * fc.get_code(e.p, e.eps.bits()) * diff,
                );
            }
            Ok(synthesize(&out))
        }
        RemainderMethod::Telescope => {
            let (i, j) = s.params();
            let aks = telescope_group(b, s, f, ChainSide::Q, 1..=j)?;
            let bks = telescope_group(b, s, f, ChainSide::P, 1..=i)?;
            Ok(synthesize(&aks.sub(&bks)?))
        }
    }
}

#[derive(Clone, Copy)]
enum ChainSide {
    /// ancestors of Q (the `A_k` terms)
    Q,
    /// ancestors of P (the `B_k` terms)
    P,
}

/// Coefficient-space sum of the telescoping terms over `k ∈ range`, on one
/// ancestor chain:
/// `A_k: Σ a f̂(P,ε) [Σ_γ b̂(Q^{(k)},γ) h_{Q^{(k)}}^γ(Q)] h_Q^η` and `B_k`
/// with the `P`-chain in place of the `Q`-chain.
fn telescope_group(
    b: &StepFunction,
    s: &ShiftOperator,
    f: &StepFunction,
    side: ChainSide,
    range: std::ops::RangeInclusive<u32>,
) -> Result<HaarCoeffs> {
    let grid = b.grid().clone();
    let bc = analyze(b);
    let fc = analyze(f);
    let mut out = HaarCoeffs::zero(grid.clone());
    for k in range {
        for e in s.entries() {
            let x = match side {
                ChainSide::Q => e.q,
                ChainSide::P => e.p,
            };
            let anc = grid.ancestor_unchecked(x, k);
            let g = haar_series_value(&grid, &bc, anc, x);
            out.add_code(e.q, e.eta.bits(), e.a * fc.get_code(e.p, e.eps.bits()) * g);
        }
    }
    Ok(out)
}

/// `Σ_γ b̂(N,γ) h_N^γ(X)` for a strict subcube `X ⊊ N`: the jump of the
/// `b`-averages across one generation of the chain.
fn haar_series_value(grid: &Grid, bc: &HaarCoeffs, n_cube: Cube, x: Cube) -> f64 {
    let code = grid
        .step_code(n_cube, x)
        .expect("chain cubes are strict descendants") as u32;
    let full = grid.branching() as u32 - 1;
    let inv_norm = 1.0 / grid.volume_at(n_cube.level).sqrt();
    let mut g = 0.0;
    for gamma in 0..full {
        g += bc.get_code(n_cube, gamma) * child_sign(gamma, code);
    }
    g * inv_norm
}

/// The three telescoped groups `(upper tail, matched A-part, matched
/// B-part)`; they sum to the remainder and the first is identically zero
/// exactly when `i = j`.
pub fn remainder_parts(
    b: &StepFunction,
    s: &ShiftOperator,
    f: &StepFunction,
) -> Result<[StepFunction; 3]> {
    same_grid(b.grid(), f.grid())?;
    same_grid(b.grid(), s.grid())?;
    reject_zero_params(s)?;
    let (i, j) = s.params();
    let m = i.min(j);
    let (part1, part2, part3) = if j >= i {
        (
            telescope_group(b, s, f, ChainSide::Q, m + 1..=j)?,
            telescope_group(b, s, f, ChainSide::Q, 1..=m)?,
            telescope_group(b, s, f, ChainSide::P, 1..=i)?.scale(-1.0),
        )
    } else {
        (
            telescope_group(b, s, f, ChainSide::P, m + 1..=i)?.scale(-1.0),
            telescope_group(b, s, f, ChainSide::Q, 1..=j)?,
            telescope_group(b, s, f, ChainSide::P, 1..=m)?.scale(-1.0),
        )
    };
    Ok([synthesize(&part1), synthesize(&part2), synthesize(&part3)])
}

/// Max-norm residual of the exact expansion
/// `[b, S] f = (Π_b + Π*_b + Γ_b)(S f) − S((Π_b + Π*_b + Γ_b) f) + R f`,
/// obtained by expanding both products of the commutator; the boundary
/// terms vanish because `S` annihilates constants and outputs mean-zero
/// functions.
pub fn commutator_decomposition_check(
    b: &StepFunction,
    s: &ShiftOperator,
    f: &StepFunction,
) -> Result<f64> {
    let sf = s.apply(f)?;
    let lhs = b.mul(&sf)?.sub(&s.apply(&b.mul(f)?)?)?;
    let t1 = paraproduct_sum(b, &sf)?;
    let t2 = s.apply(&paraproduct_sum(b, f)?)?;
    let r = remainder(b, s, f, RemainderMethod::Formula)?;
    let rhs = t1.sub(&t2)?.add(&r)?;
    lhs.max_abs_diff(&rhs)
}

/// `(Π_b + Π*_b + Γ_b) f`.
pub(crate) fn paraproduct_sum(b: &StepFunction, f: &StepFunction) -> Result<StepFunction> {
    let mut out = paraproduct(ParaKind::Pi, b, f)?;
    out = out.add(&paraproduct(ParaKind::PiStar, b, f)?)?;
    out.add(&paraproduct(ParaKind::Gamma, b, f)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::operators::make_random_shift;
    use crate::operators::testutil::{random_mean_zero, random_step};
    use crate::tol::EXACT_IDENTITY;

    const METHODS: [RemainderMethod; 3] = [
        RemainderMethod::Direct,
        RemainderMethod::Formula,
        RemainderMethod::Telescope,
    ];

    #[test]
    fn constant_symbol_gives_zero_by_every_method() {
        let grid = Grid::new(1, 4, &[]).unwrap();
        let s = make_random_shift(&grid, 1, 2, 19, true).unwrap();
        let b = StepFunction::constant(grid.clone(), 3.5);
        let f = random_step(&grid, 91);
        for m in METHODS {
            let r = remainder(&b, &s, &f, m).unwrap();
            assert!(
                r.values().iter().all(|&v| v.abs() < EXACT_IDENTITY),
                "{m:?}"
            );
        }
    }

    #[test]
    fn three_methods_agree() {
        for (n, depth, i, j) in [
            (1usize, 5u32, 1u32, 2u32),
            (1, 5, 2, 1),
            (1, 5, 1, 1),
            (1, 5, 0, 1),
            (1, 5, 3, 0),
            (2, 3, 1, 2),
            (2, 4, 2, 2),
        ] {
            let grid = Grid::new(n, depth, &[]).unwrap();
            let s = make_random_shift(&grid, i, j, 23 + i as u64, true).unwrap();
            let b = random_step(&grid, 92);
            let f = random_step(&grid, 93);
            let outs: Vec<_> = METHODS
                .iter()
                .map(|&m| remainder(&b, &s, &f, m).unwrap())
                .collect();
            for a in &outs {
                for c in &outs {
                    assert!(
                        a.max_abs_diff(c).unwrap() < EXACT_IDENTITY,
                        "n={n} K={depth} (i,j)=({i},{j})"
                    );
                }
            }
        }
    }

    #[test]
    fn zero_parameters_are_rejected() {
        let grid = Grid::new(1, 3, &[]).unwrap();
        let s = make_random_shift(&grid, 0, 0, 3, true).unwrap();
        let b = random_step(&grid, 94);
        let f = random_step(&grid, 95);
        assert!(matches!(
            remainder(&b, &s, &f, RemainderMethod::Direct),
            Err(Error::InvalidArgument(_))
        ));
        assert!(remainder_parts(&b, &s, &f).is_err());
    }

    #[test]
    fn parts_sum_to_the_remainder_and_first_part_vanishes_iff_equal() {
        let grid = Grid::new(1, 5, &[]).unwrap();
        let b = random_mean_zero(&grid, 96);
        let f = random_step(&grid, 97);
        for (i, j) in [(1u32, 1u32), (2, 2), (1, 2), (2, 1), (0, 2), (2, 0)] {
            let s = make_random_shift(&grid, i, j, 29, true).unwrap();
            let parts = remainder_parts(&b, &s, &f).unwrap();
            let total = parts[0].add(&parts[1]).unwrap().add(&parts[2]).unwrap();
            let want = remainder(&b, &s, &f, RemainderMethod::Formula).unwrap();
            assert!(total.max_abs_diff(&want).unwrap() < EXACT_IDENTITY);
            let part1_max = parts[0].values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if i == j {
                assert!(part1_max == 0.0, "(i,j)=({i},{j})");
            } else {
                assert!(part1_max > 1e-8, "(i,j)=({i},{j}) unexpectedly degenerate");
            }
        }
    }

    #[test]
    fn commutator_expansion_is_exact() {
        let grid = Grid::new(1, 5, &[]).unwrap();
        let f = random_step(&grid, 98);
        for (i, j) in [(1u32, 2u32), (2, 1), (1, 1)] {
            let s = make_random_shift(&grid, i, j, 37, true).unwrap();
            let b0 = random_mean_zero(&grid, 99);
            assert!(commutator_decomposition_check(&b0, &s, &f).unwrap() < EXACT_IDENTITY);
            // the expansion needs no mean-zero assumption on this grid
            let b = random_step(&grid, 100);
            assert!(commutator_decomposition_check(&b, &s, &f).unwrap() < EXACT_IDENTITY);
        }
        let grid2 = Grid::new(2, 3, &[]).unwrap();
        let s2 = make_random_shift(&grid2, 1, 2, 41, true).unwrap();
        let b2 = random_mean_zero(&grid2, 101);
        let f2 = random_step(&grid2, 102);
        assert!(commutator_decomposition_check(&b2, &s2, &f2).unwrap() < EXACT_IDENTITY);
    }

    #[test]
    fn remainder_ignores_constant_shifts_of_the_symbol() {
        let grid = Grid::new(1, 4, &[]).unwrap();
        let s = make_random_shift(&grid, 1, 1, 43, true).unwrap();
        let b = random_step(&grid, 103);
        let b_shifted = b.add(&StepFunction::constant(grid.clone(), 11.0)).unwrap();
        let f = random_step(&grid, 104);
        for m in METHODS {
            let r1 = remainder(&b, &s, &f, m).unwrap();
            let r2 = remainder(&b_shifted, &s, &f, m).unwrap();
            assert!(r1.max_abs_diff(&r2).unwrap() < EXACT_IDENTITY, "{m:?}");
        }
    }
}
