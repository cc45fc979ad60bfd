//! Linear operators on step functions: maximal function, square functions,
//! dyadic shifts, paraproducts, Λ-operators, commutators and the remainder
//! decompositions linking them.

mod lambda;
mod maximal;
mod noncancellative;
mod paraproduct;
mod remainder;
mod shift;
mod square;

pub use lambda::{lambda_op, LambdaKind, LambdaOp};
pub use maximal::maximal;
pub use noncancellative::{
    noncancellative_remainder_check, NonCancellativeRemainders, NonCancellativeShift,
};
pub use paraproduct::{paraproduct, product_decomposition_check, ParaKind, ParaproductOp};
pub use remainder::{commutator_decomposition_check, remainder, remainder_parts, RemainderMethod};
pub use shift::{coefficient_bound, make_random_shift, ShiftEntry, ShiftOperator};
pub use square::{shifted_square_function, square_function};

use std::sync::Arc;

use crate::error::Result;
use crate::grid::{same_grid, Cube, Grid};
use crate::haar::StepFunction;

/// A linear map on step functions together with its adjoint under the
/// unweighted pairing `∫ f g`.
pub trait LinearOperator: Send + Sync {
    fn grid(&self) -> &Grid;
    fn apply(&self, f: &StepFunction) -> Result<StepFunction>;
    fn apply_adjoint(&self, f: &StepFunction) -> Result<StepFunction>;
}

/// `[b, T] f = b·(T f) − T(b·f)`.
pub fn commutator(
    b: &StepFunction,
    op: &dyn LinearOperator,
    f: &StepFunction,
) -> Result<StepFunction> {
    same_grid(b.grid(), f.grid())?;
    same_grid(b.grid(), op.grid())?;
    let t_f = op.apply(f)?;
    let t_bf = op.apply(&b.mul(f)?)?;
    b.mul(&t_f)?.sub(&t_bf)
}

/// The commutator `[b, T]` as an operator; its adjoint is
/// `g ↦ T*(b·g) − b·(T* g)`.
pub struct Commutator {
    b: StepFunction,
    inner: Arc<dyn LinearOperator>,
}

impl Commutator {
    pub fn new(b: StepFunction, inner: Arc<dyn LinearOperator>) -> Result<Commutator> {
        same_grid(b.grid(), inner.grid())?;
        Ok(Commutator { b, inner })
    }

    pub fn symbol(&self) -> &StepFunction {
        &self.b
    }
}

impl LinearOperator for Commutator {
    fn grid(&self) -> &Grid {
        self.b.grid()
    }

    fn apply(&self, f: &StepFunction) -> Result<StepFunction> {
        commutator(&self.b, self.inner.as_ref(), f)
    }

    fn apply_adjoint(&self, g: &StepFunction) -> Result<StepFunction> {
        let t_bg = self.inner.apply_adjoint(&self.b.mul(g)?)?;
        t_bg.sub(&self.b.mul(&self.inner.apply_adjoint(g)?)?)
    }
}

/// Helper shared by the accumulating operators: sums `own(level, index)`
/// over all ancestors of each cell (levels `0..depth`) in one top-down pass.
pub(crate) fn accumulate_down(grid: &Grid, own: impl Fn(u32, usize) -> f64) -> Vec<f64> {
    let depth = grid.depth();
    let mut cur = vec![0.0f64];
    for k in 0..depth {
        for (index, v) in cur.iter_mut().enumerate() {
            *v += own(k, index);
        }
        let mut next = vec![0.0; grid.cubes_at(k + 1)];
        for (index, &v) in cur.iter().enumerate() {
            let q = Cube { level: k, index };
            for code in 0..grid.branching() {
                next[grid.child_unchecked(q, code).index] = v;
            }
        }
        cur = next;
    }
    cur
}
