//! Non-cancellative `(0,0)` shifts: a cancellative core plus paraproduct
//! terms `Π_a + Π*_d` whose symbols have unweighted BMO norm at most one,
//! together with exact expansions for the commutator remainders they induce.

use crate::bmo::unweighted_bmo_norm;
use crate::error::{Error, Result};
use crate::grid::{same_grid, Grid};
use crate::haar::StepFunction;
use crate::operators::lambda::{lambda_op, LambdaKind};
use crate::operators::paraproduct::{paraproduct, ParaKind};
use crate::operators::shift::ShiftOperator;
use crate::operators::LinearOperator;
use crate::tol;

/// `T = S_c + Π_a + Π*_d` with `S_c` a cancellative `(0,0)` shift and
/// symbols `a`, `d` of unweighted BMO norm `≤ 1`.
#[derive(Debug, Clone)]
pub struct NonCancellativeShift {
    core: ShiftOperator,
    a: StepFunction,
    d: StepFunction,
}

impl NonCancellativeShift {
    pub fn new(core: ShiftOperator, a: StepFunction, d: StepFunction) -> Result<Self> {
        if core.params() != (0, 0) {
            return Err(Error::InvalidArgument(
                "non-cancellative form requires a (0,0) core".into(),
            ));
        }
        same_grid(core.grid(), a.grid())?;
        same_grid(core.grid(), d.grid())?;
        for s in [&a, &d] {
            let norm = unweighted_bmo_norm(s);
            if norm > 1.0 + tol::EXACT_IDENTITY {
                return Err(Error::CoefficientBound {
                    value: norm,
                    bound: 1.0,
                });
            }
        }
        Ok(NonCancellativeShift { core, a, d })
    }

    /// Like [`NonCancellativeShift::new`] but rescales any symbol whose
    /// BMO norm exceeds one down to the unit ball.
    pub fn with_normalized_symbols(
        core: ShiftOperator,
        a: StepFunction,
        d: StepFunction,
    ) -> Result<Self> {
        let scale = |s: StepFunction| {
            let norm = unweighted_bmo_norm(&s);
            if norm > 1.0 {
                s.scale(1.0 / norm)
            } else {
                s
            }
        };
        Self::new(core, scale(a), scale(d))
    }

    pub fn core(&self) -> &ShiftOperator {
        &self.core
    }

    pub fn symbol_a(&self) -> &StepFunction {
        &self.a
    }

    pub fn symbol_d(&self) -> &StepFunction {
        &self.d
    }
}

impl LinearOperator for NonCancellativeShift {
    fn grid(&self) -> &Grid {
        self.core.grid()
    }

    fn apply(&self, f: &StepFunction) -> Result<StepFunction> {
        let mut out = self.core.apply(f)?;
        out = out.add(&paraproduct(ParaKind::Pi, &self.a, f)?)?;
        out.add(&paraproduct(ParaKind::PiStar, &self.d, f)?)
    }

    fn apply_adjoint(&self, g: &StepFunction) -> Result<StepFunction> {
        let mut out = self.core.apply_adjoint(g)?;
        out = out.add(&paraproduct(ParaKind::PiStar, &self.a, g)?)?;
        out.add(&paraproduct(ParaKind::Pi, &self.d, g)?)
    }
}

/// Residuals of the three commutator-remainder identities for a
/// non-cancellative shift; each should vanish to machine precision.
#[derive(Debug, Clone, Copy)]
pub struct NonCancellativeRemainders {
    /// `Π_{S_c f} b − S_c Π_f b` (exact zero for any symbol `b`).
    pub core_residual: f64,
    /// Direct-vs-expanded gap for `Π_{Π_a f} b − Π_a Π_f b`.
    pub pi_residual: f64,
    /// Direct-vs-expanded gap for `Π_{Π*_d f} b − Π*_d Π_f b`.
    pub pi_star_residual: f64,
}

impl NonCancellativeRemainders {
    pub fn max(&self) -> f64 {
        self.core_residual
            .max(self.pi_residual)
            .max(self.pi_star_residual)
    }
}

/// Checks the exact remainder structure of `[b, T]` for a non-cancellative
/// shift `T = S_c + Π_a + Π*_d`:
///
/// * the cancellative core commutes with averaging,
///   `Π_{S_c f} b = S_c Π_f b`, for any `b`;
/// * `Π_{Π_a f} b − Π_a Π_f b
///   = Π_a Π_b f + Π_a Γ_b f + Π_a Π*_b f − Λ_{a,b} f`;
/// * `Π_{Π*_d f} b − Π*_d Π_f b
///   = Λ*_{d,b} f − Π_b Π*_d f − Γ_b Π*_d f − Π*_b Π*_d f`.
///
/// The last two hold for mean-zero `b`; the symbol is centered internally
/// so any `b` may be passed.
pub fn noncancellative_remainder_check(
    op: &NonCancellativeShift,
    b: &StepFunction,
    f: &StepFunction,
) -> Result<NonCancellativeRemainders> {
    let grid = op.grid().clone();
    same_grid(&grid, b.grid())?;
    same_grid(&grid, f.grid())?;

    // Core identity, for the symbol exactly as passed.
    let sc_f = op.core().apply(f)?;
    let lhs = paraproduct(ParaKind::Pi, &sc_f, b)?;
    let rhs = op.core().apply(&paraproduct(ParaKind::Pi, f, b)?)?;
    let core_residual = lhs.max_abs_diff(&rhs)?;

    let mean = b.integral() / grid.volume_at(0);
    let b0 = b.sub(&StepFunction::constant(grid.clone(), mean))?;

    let a = op.symbol_a();
    let pa_f = paraproduct(ParaKind::Pi, a, f)?;
    let direct_a = paraproduct(ParaKind::Pi, &pa_f, &b0)?.sub(&paraproduct(
        ParaKind::Pi,
        a,
        &paraproduct(ParaKind::Pi, f, &b0)?,
    )?)?;
    let expanded_a = paraproduct(ParaKind::Pi, a, &paraproduct(ParaKind::Pi, &b0, f)?)?
        .add(&paraproduct(
            ParaKind::Pi,
            a,
            &paraproduct(ParaKind::Gamma, &b0, f)?,
        )?)?
        .add(&paraproduct(
            ParaKind::Pi,
            a,
            &paraproduct(ParaKind::PiStar, &b0, f)?,
        )?)?
        .sub(&lambda_op(LambdaKind::Lambda, a, &b0, f)?)?;
    let pi_residual = direct_a.max_abs_diff(&expanded_a)?;

    let d = op.symbol_d();
    let pd_f = paraproduct(ParaKind::PiStar, d, f)?;
    let direct_d = paraproduct(ParaKind::Pi, &pd_f, &b0)?.sub(&paraproduct(
        ParaKind::PiStar,
        d,
        &paraproduct(ParaKind::Pi, f, &b0)?,
    )?)?;
    let expanded_d = lambda_op(LambdaKind::LambdaStar, d, &b0, f)?
        .sub(&paraproduct(ParaKind::Pi, &b0, &pd_f)?)?
        .sub(&paraproduct(ParaKind::Gamma, &b0, &pd_f)?)?
        .sub(&paraproduct(ParaKind::PiStar, &b0, &pd_f)?)?;
    let pi_star_residual = direct_d.max_abs_diff(&expanded_d)?;

    Ok(NonCancellativeRemainders {
        core_residual,
        pi_residual,
        pi_star_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::shift::make_random_shift;
    use crate::operators::testutil::{adjoint_residual, random_step};
    use crate::tol::EXACT_IDENTITY;

    fn unit_bmo_symbol(grid: &Grid, seed: u64) -> StepFunction {
        let raw = random_step(grid, seed);
        let norm = unweighted_bmo_norm(&raw);
        raw.scale(1.0 / norm)
    }

    #[test]
    fn zero_symbols_reduce_to_the_core() {
        let grid = Grid::new(1, 3, &[]).unwrap();
        let core = make_random_shift(&grid, 0, 0, 5, true).unwrap();
        let zero = StepFunction::zero(grid.clone());
        let op = NonCancellativeShift::new(core.clone(), zero.clone(), zero).unwrap();
        let f = random_step(&grid, 9);
        let gap = op
            .apply(&f)
            .unwrap()
            .max_abs_diff(&core.apply(&f).unwrap())
            .unwrap();
        assert_eq!(gap, 0.0);
    }

    #[test]
    fn oversized_symbols_are_rejected_but_normalizable() {
        let grid = Grid::new(1, 3, &[]).unwrap();
        let core = make_random_shift(&grid, 0, 0, 6, true).unwrap();
        let big = random_step(&grid, 10).scale(50.0);
        let zero = StepFunction::zero(grid.clone());
        assert!(NonCancellativeShift::new(core.clone(), big.clone(), zero.clone()).is_err());
        let op = NonCancellativeShift::with_normalized_symbols(core, big, zero).unwrap();
        assert!(unweighted_bmo_norm(op.symbol_a()) <= 1.0 + EXACT_IDENTITY);
    }

    #[test]
    fn adjoint_is_consistent() {
        let grid = Grid::new(2, 2, &[]).unwrap();
        let core = make_random_shift(&grid, 0, 0, 7, true).unwrap();
        let op =
            NonCancellativeShift::new(core, unit_bmo_symbol(&grid, 11), unit_bmo_symbol(&grid, 12))
                .unwrap();
        assert!(adjoint_residual(&op, 4) < EXACT_IDENTITY);
    }

    #[test]
    fn remainder_identities_hold_to_machine_precision() {
        for (n, depth, seed) in [(1usize, 4u32, 21u64), (2, 2, 22), (1, 3, 23)] {
            let grid = Grid::new(n, depth, &[]).unwrap();
            let core = make_random_shift(&grid, 0, 0, seed, true).unwrap();
            let op = NonCancellativeShift::new(
                core,
                unit_bmo_symbol(&grid, seed + 100),
                unit_bmo_symbol(&grid, seed + 200),
            )
            .unwrap();
            // General (non-mean-zero) symbol: centering happens inside.
            let b = random_step(&grid, seed + 300);
            let f = random_step(&grid, seed + 400);
            let res = noncancellative_remainder_check(&op, &b, &f).unwrap();
            assert!(res.max() < EXACT_IDENTITY, "n={n} K={depth}: {:?}", res);
        }
    }

    #[test]
    fn core_identity_holds_for_arbitrary_symbols() {
        let grid = Grid::new(2, 3, &[]).unwrap();
        let core = make_random_shift(&grid, 0, 0, 31, false).unwrap();
        let op = NonCancellativeShift::new(
            core,
            StepFunction::zero(grid.clone()),
            StepFunction::zero(grid.clone()),
        )
        .unwrap();
        for seed in 0..5u64 {
            let b = random_step(&grid, 500 + seed).scale(3.0);
            let f = random_step(&grid, 600 + seed);
            let res = noncancellative_remainder_check(&op, &b, &f).unwrap();
            assert!(res.core_residual < EXACT_IDENTITY);
        }
    }
}
