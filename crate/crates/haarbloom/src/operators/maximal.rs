//! Dyadic maximal function.

use crate::grid::Cube;
use crate::haar::{LevelAverages, StepFunction};

/// `M f`: at each cell, the largest average of `|f|` over the dyadic cubes
/// containing it, computed in one top-down pass.
pub fn maximal(f: &StepFunction) -> StepFunction {
    let grid = f.grid().clone();
    let avgs = LevelAverages::compute(&f.abs());
    let mut cur = vec![avgs.avg(grid.base_cube())];
    for k in 1..=grid.depth() {
        let mut next = vec![0.0; grid.cubes_at(k)];
        let level = avgs.level(k);
        for (index, &parent_best) in cur.iter().enumerate() {
            let q = Cube {
                level: k - 1,
                index,
            };
            for code in 0..grid.branching() {
                let child = grid.child_unchecked(q, code).index;
                next[child] = parent_best.max(level[child]);
            }
        }
        cur = next;
    }
    StepFunction::new(grid, cur).expect("one value per cell")
}
