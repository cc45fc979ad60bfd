//! Dyadic square function and its shifted variant.

use crate::grid::Cube;
use crate::haar::{analyze, HaarCoeffs, StepFunction};
use crate::operators::accumulate_down;

/// `S f = [Σ_{Q,ε} f̂(Q,ε)² 1_Q / |Q|]^{1/2}`.
pub fn square_function(f: &StepFunction) -> StepFunction {
    let grid = f.grid().clone();
    let c = analyze(f);
    let stride = grid.branching() - 1;
    let acc = accumulate_down(&grid, |k, index| {
        let lv = c.level(k);
        let inv_vol = 1.0 / grid.volume_at(k);
        lv[index * stride..(index + 1) * stride]
            .iter()
            .map(|x| x * x)
            .sum::<f64>()
            * inv_vol
    });
    StepFunction::new(grid, acc.into_iter().map(f64::sqrt).collect()).expect("one value per cell")
}

/// Shifted square function with parameters `(i, j)`:
/// `[Σ_{Q,ε} (Σ_{P ∈ (Q^{(j)})_{(i)}} |f̂(P,ε)|)² 1_Q / |Q|]^{1/2}`,
/// summing over the `Q` whose `j`-th ancestor exists. Equals
/// [`square_function`] at `(0,0)`.
pub fn shifted_square_function(f: &StepFunction, i: u32, j: u32) -> StepFunction {
    let grid = f.grid().clone();
    let depth = grid.depth();
    let c = analyze(f);
    let stride = grid.branching() as u32 - 1;
    // group the Q-sum by the common ancestor R = Q^{(j)}: the inner sum
    // T(R,ε) is shared by all 2^{nj} descendants Q, and Σ_{Q∈R_(j)} 1_Q/|Q|
    // = 2^{nj}/|R| on R.
    let q_weight = (1usize << (grid.dim() as u32 * j)) as f64;
    let acc = accumulate_down(&grid, |k, index| {
        if k + j > depth || k + i >= depth {
            return 0.0;
        }
        let r = Cube { level: k, index };
        let mut total = 0.0;
        for eps in 0..stride {
            let t = abs_coeff_sum(&c, r, i, eps);
            total += t * t;
        }
        total * q_weight / grid.volume_at(k)
    });
    StepFunction::new(grid, acc.into_iter().map(f64::sqrt).collect()).expect("one value per cell")
}

/// `Σ_{P ∈ R_{(i)}} |f̂(P, ε)|`.
fn abs_coeff_sum(c: &HaarCoeffs, r: Cube, i: u32, eps: u32) -> f64 {
    let grid = c.grid();
    let stride = grid.branching() - 1;
    let lv = c.level(r.level + i);
    let mut t = 0.0;
    grid.for_each_descendant(r, i, |p_index| {
        t += lv[p_index * stride + eps as usize].abs();
    });
    t
}
