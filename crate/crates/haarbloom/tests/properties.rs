//! Property-based checks of the algebraic contracts the library exposes:
//! transform round-trips, signature algebra, cube bookkeeping, weight
//! characteristics, and serialization fidelity.

use proptest::prelude::*;

use haarbloom::experiment::{gen_step, gen_symbol};
use haarbloom::haar::{haar_function, parseval_check};
use haarbloom::operators::{make_random_shift, maximal, square_function, LinearOperator};
use haarbloom::opnorm::weighted_lp_norm;
use haarbloom::weights::{
    ap_characteristic, conjugate, conjugate_exponent, gen_cascade_weight, Weight,
};
use haarbloom::{analyze, synthesize, Cube, Grid, Signature, StepFunction};

const REL: f64 = 1e-12;

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// Grids small enough that every property runs in microseconds, across all
/// supported dimensions and with nontrivial translations.
fn grid_strategy() -> impl Strategy<Value = Grid> {
    (1usize..=3)
        .prop_flat_map(|dim| {
            let max_depth = match dim {
                1 => 6u32,
                2 => 3,
                _ => 2,
            };
            (Just(dim), 1u32..=max_depth)
        })
        .prop_flat_map(|(dim, depth)| {
            let cells = prop::collection::vec(-4i64..=4, dim);
            (Just(dim), Just(depth), cells)
        })
        .prop_map(|(dim, depth, cells)| {
            let step = 0.5f64.powi(depth as i32);
            let shift: Vec<f64> = cells.iter().map(|&c| c as f64 * step).collect();
            Grid::new(dim, depth, &shift).expect("lattice-aligned shift")
        })
}

/// A grid together with a uniformly chosen cube on it.
fn grid_and_cube() -> impl Strategy<Value = (Grid, Cube)> {
    grid_strategy().prop_flat_map(|grid| {
        let depth = grid.depth();
        (Just(grid), 0u32..=depth).prop_flat_map(|(grid, level)| {
            let count = grid.cubes_at(level);
            (Just(grid), Just(level), 0usize..count)
                .prop_map(|(grid, level, index)| (grid, Cube { level, index }))
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn analyze_then_synthesize_recovers_the_function(grid in grid_strategy(), seed in any::<u64>()) {
        let f = gen_step(&grid, seed);
        let g = synthesize(&analyze(&f));
        let scale = f.values().iter().fold(1.0f64, |m, v| m.max(v.abs()));
        prop_assert!(f.max_abs_diff(&g).unwrap() <= REL * scale);
    }

    #[test]
    fn energy_splits_into_mean_plus_coefficients(grid in grid_strategy(), seed in any::<u64>()) {
        let f = gen_step(&grid, seed);
        let (lhs, rhs) = parseval_check(&f);
        prop_assert!(rel_close(lhs, rhs, REL));
    }

    #[test]
    fn square_function_energy_is_the_oscillation_energy(grid in grid_strategy(), seed in any::<u64>()) {
        let f = gen_step(&grid, seed);
        let s = square_function(&f);
        let mean = f.integral() / grid.volume_at(0);
        let osc = f.inner(&f).unwrap() - mean * mean * grid.volume_at(0);
        prop_assert!(rel_close(s.inner(&s).unwrap(), osc, 1e-11));
    }

    #[test]
    fn signature_addition_is_commutative_with_unit(dim in 1usize..=4, a in any::<u32>(), b in any::<u32>()) {
        let mask = (1u32 << dim) - 1;
        let sa = Signature::new(a & mask, dim).unwrap();
        let sb = Signature::new(b & mask, dim).unwrap();
        let ones = Signature::ones(dim).unwrap();
        prop_assert_eq!(sa.add(&sb).unwrap(), sb.add(&sa).unwrap());
        prop_assert_eq!(sa.add(&ones).unwrap(), sa);
        prop_assert_eq!(sa.add(&sa).unwrap(), ones);
    }

    #[test]
    fn haar_product_rule_holds_pointwise((grid, cube) in grid_and_cube(), a in any::<u32>(), b in any::<u32>()) {
        prop_assume!(cube.level < grid.depth());
        let mask = (1u32 << grid.dim()) - 1;
        let sa = Signature::new(a & mask, grid.dim()).unwrap();
        let sb = Signature::new(b & mask, grid.dim()).unwrap();
        let ha = haar_function(&grid, cube, &sa);
        let hb = haar_function(&grid, cube, &sb);
        prop_assume!(ha.is_ok() && hb.is_ok());
        let product = ha.unwrap().mul(&hb.unwrap()).unwrap();
        let hsum = haar_function(&grid, cube, &sa.add(&sb).unwrap()).unwrap();
        let expected = hsum.scale(1.0 / grid.volume_at(cube.level).sqrt());
        prop_assert!(product.max_abs_diff(&expected).unwrap() <= REL * grid.cell_volume().recip());
    }

    #[test]
    fn haar_functions_are_unit_norm_and_mean_zero((grid, cube) in grid_and_cube(), bits in any::<u32>()) {
        prop_assume!(cube.level < grid.depth());
        let mask = (1u32 << grid.dim()) - 1;
        let sig = Signature::new(bits & mask, grid.dim()).unwrap();
        prop_assume!(sig.is_cancellative());
        let h = haar_function(&grid, cube, &sig).unwrap();
        prop_assert!(h.integral().abs() <= REL);
        prop_assert!(rel_close(h.inner(&h).unwrap(), 1.0, REL));
        // Support is confined to the cube.
        let inside = StepFunction::indicator(grid.clone(), cube).unwrap();
        let masked = h.mul(&inside).unwrap();
        prop_assert!(h.max_abs_diff(&masked).unwrap() == 0.0);
    }

    #[test]
    fn cube_ancestry_is_coherent((grid, cube) in grid_and_cube(), up_frac in 0.0f64..1.0) {
        if cube.level > 0 {
            let parent = grid.parent(cube).unwrap();
            prop_assert!(grid.is_ancestor_of(parent, cube));
            let code = grid.step_code(parent, cube).unwrap();
            prop_assert_eq!(grid.child(parent, code).unwrap(), cube);

            let up = 1 + ((cube.level - 1) as f64 * up_frac) as u32;
            let anc = grid.ancestor(cube, up).unwrap();
            prop_assert_eq!(anc.level, cube.level - up);
            prop_assert!(grid.is_ancestor_of(anc, cube));
        }
        let down = (grid.depth() - cube.level).min(2);
        let kids = grid.descendants(cube, down).unwrap();
        prop_assert_eq!(kids.len(), grid.branching().pow(down));
        for k in &kids {
            prop_assert!(grid.is_ancestor_of(cube, *k) || (down == 0 && *k == cube));
        }
    }

    #[test]
    fn muckenhoupt_characteristic_is_scale_invariant(
        grid in grid_strategy(),
        seed in any::<u64>(),
        ratio in 1.0f64..3.0,
        scale in 0.05f64..20.0,
        p in 1.2f64..4.0,
    ) {
        let w = gen_cascade_weight(&grid, ratio, seed).unwrap();
        let scaled = w.pow(1.0).mul(&Weight::constant(grid.clone(), scale).unwrap()).unwrap();
        let a = ap_characteristic(&w, p).unwrap();
        let b = ap_characteristic(&scaled, p).unwrap();
        prop_assert!(a.value >= 1.0 - 1e-14);
        prop_assert!(rel_close(a.value, b.value, 1e-9));
        prop_assert_eq!(a.witness, b.witness);
    }

    #[test]
    fn conjugate_weight_characteristic_is_a_power_of_the_original(
        grid in grid_strategy(),
        seed in any::<u64>(),
        ratio in 1.0f64..2.5,
        p in 1.2f64..4.0,
    ) {
        let w = gen_cascade_weight(&grid, ratio, seed).unwrap();
        let q = conjugate_exponent(p).unwrap();
        let dual = conjugate(&w, p).unwrap();
        let direct = ap_characteristic(&dual, q).unwrap().value;
        let viapow = ap_characteristic(&w, p).unwrap().value.powf(q - 1.0);
        prop_assert!(rel_close(direct, viapow, 1e-9));
    }

    #[test]
    fn conjugate_exponent_is_an_involution(p in 1.05f64..40.0) {
        let q = conjugate_exponent(p).unwrap();
        prop_assert!(rel_close(1.0 / p + 1.0 / q, 1.0, REL));
        prop_assert!(rel_close(conjugate_exponent(q).unwrap(), p, 1e-9));
    }

    #[test]
    fn weighted_norm_is_absolutely_homogeneous(
        grid in grid_strategy(),
        seed in any::<u64>(),
        c in -8.0f64..8.0,
        p in 1.1f64..5.0,
    ) {
        let f = gen_step(&grid, seed);
        let w = gen_cascade_weight(&grid, 1.8, seed ^ 0xABCD).unwrap();
        let lhs = weighted_lp_norm(&f.scale(c), &w, p).unwrap();
        let rhs = c.abs() * weighted_lp_norm(&f, &w, p).unwrap();
        prop_assert!(rel_close(lhs, rhs, 1e-11));
    }

    #[test]
    fn cascade_weights_are_positive_with_unit_mass(
        grid in grid_strategy(),
        seed in any::<u64>(),
        ratio in 1.0f64..4.0,
    ) {
        let w = gen_cascade_weight(&grid, ratio, seed).unwrap();
        prop_assert!(w.cell_values().iter().all(|&v| v > 0.0));
        let avg = w.average_on(grid.base_cube()).unwrap();
        prop_assert!(rel_close(avg, 1.0, 1e-11));
        // Every value stays inside the per-level multiplicative envelope.
        let bound = ratio.powi(grid.depth() as i32) * 2.0;
        prop_assert!(w.cell_values().iter().all(|&v| v < bound && v > 1.0 / bound));
    }

    #[test]
    fn maximal_function_dominates_and_is_homogeneous(
        grid in grid_strategy(),
        seed in any::<u64>(),
        c in -5.0f64..5.0,
    ) {
        let f = gen_step(&grid, seed);
        let m = maximal(&f);
        for (mv, fv) in m.values().iter().zip(f.values()) {
            prop_assert!(*mv >= fv.abs() - 1e-13);
        }
        let ms = maximal(&f.scale(c));
        prop_assert!(ms.max_abs_diff(&m.scale(c.abs())).unwrap() <= 1e-12 * (1.0 + c.abs()));
    }

    #[test]
    fn random_shifts_serialize_and_rerun_identically(
        dim in 1usize..=2,
        seed in any::<u64>(),
        i in 0u32..=2,
        j in 0u32..=2,
        dense in any::<bool>(),
    ) {
        let depth = (i + j).max(i.max(j) + 1).max(2);
        prop_assume!(dim as u32 * depth <= 8);
        let grid = Grid::new(dim, depth, &[]).unwrap();
        let s = make_random_shift(&grid, i, j, seed, dense).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        let back: haarbloom::operators::ShiftOperator = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back.params(), s.params());
        prop_assert_eq!(back.entries(), s.entries());
        let f = gen_symbol(&grid, 0.7, seed ^ 0x55);
        let d = s.apply(&f).unwrap().max_abs_diff(&back.apply(&f).unwrap()).unwrap();
        prop_assert!(d == 0.0);
    }

    #[test]
    fn shift_coefficients_respect_the_size_cap(
        dim in 1usize..=2,
        seed in any::<u64>(),
        i in 0u32..=2,
        j in 0u32..=2,
    ) {
        let depth = (i + j).max(i.max(j) + 1).max(2);
        prop_assume!(dim as u32 * depth <= 8);
        let grid = Grid::new(dim, depth, &[]).unwrap();
        let s = make_random_shift(&grid, i, j, seed, true).unwrap();
        let cap = s.coefficient_bound();
        prop_assert!(s.entries().iter().all(|e| e.a.abs() <= cap));
        // The adjoint swaps the (i, j) roles and transposes every entry.
        let t = s.adjoint();
        prop_assert_eq!(t.params(), (j, i));
        prop_assert_eq!(t.entries().len(), s.entries().len());
    }
}
