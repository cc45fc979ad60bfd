//! Weighted oscillation functionals: BMO and BMO^q norms, the Bloom
//! two-weight oscillation quantities, the Carleson-measure norm, the dyadic
//! H¹ norm and their duality pairing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{same_grid, Cube};
use crate::haar::{analyze, LevelAverages, StepFunction};
use crate::operators::square_function;
use crate::weights::Weight;

/// Result of an oscillation-norm scan over the grid's cubes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BmoReport {
    pub value: f64,
    /// First cube (level-major order) attaining the supremum.
    pub witness: Cube,
    /// Maximum of the local quantity per level.
    pub per_level: Vec<f64>,
}

/// `sup_Q ((1/normalizer(Q)) ∫_Q |b − ⟨b⟩_Q|^e dmeasure)^{1/e}` with the
/// grid's exact cube measures.
fn oscillation_sup(
    b: &StepFunction,
    normalizer: &Weight,
    measure: &StepFunction,
    e: f64,
) -> Result<BmoReport> {
    same_grid(b.grid(), normalizer.grid())?;
    same_grid(b.grid(), measure.grid())?;
    if !(e.is_finite() && e >= 1.0) {
        return Err(Error::InvalidExponent {
            constraint: "1 <= exponent < inf",
            value: e,
        });
    }
    let grid = b.grid().clone();
    let b_avg = LevelAverages::compute(b);
    let cell_vol = grid.cell_volume();
    let norm_avg = normalizer.averages();
    let mut best = f64::NEG_INFINITY;
    let mut witness = grid.base_cube();
    let mut per_level = Vec::with_capacity(grid.depth() as usize + 1);
    for k in 0..=grid.depth() {
        let mut level_best = f64::NEG_INFINITY;
        let down = grid.depth() - k;
        for index in 0..grid.cubes_at(k) {
            let q = Cube { level: k, index };
            let center = b_avg.avg(q);
            let mut osc = 0.0;
            grid.for_each_descendant(q, down, |cell| {
                let dev = (b.values()[cell] - center).abs();
                osc += dev.powf(e) * measure.values()[cell];
            });
            osc *= cell_vol;
            let w_q = norm_avg.avg(q) * grid.volume_at(k);
            let local = (osc / w_q).powf(1.0 / e);
            level_best = level_best.max(local);
            if local > best {
                best = local;
                witness = q;
            }
        }
        per_level.push(level_best);
    }
    Ok(BmoReport {
        value: best,
        witness,
        per_level,
    })
}

/// `‖b‖_{BMO(w)} = sup_Q (1/w(Q)) ∫_Q |b − ⟨b⟩_Q| dx`.
pub fn bmo_norm(b: &StepFunction, w: &Weight) -> Result<BmoReport> {
    let ones = StepFunction::constant(b.grid().clone(), 1.0);
    oscillation_sup(b, w, &ones, 1.0)
}

/// Unweighted dyadic BMO norm, `sup_Q (1/|Q|) ∫_Q |b − ⟨b⟩_Q| dx`.
pub fn unweighted_bmo_norm(b: &StepFunction) -> f64 {
    let unit = Weight::constant(b.grid().clone(), 1.0).expect("unit weight");
    bmo_norm(b, &unit).expect("same grid").value
}

/// `‖b‖_{BMO^q(w)} = sup_Q ((1/w(Q)) ∫_Q |b − ⟨b⟩_Q|^q w^{1−q} dx)^{1/q}`.
///
/// The measure is the conjugate weight `w^{1-q}` for the norm exponent `q`
/// itself: `q = 1` recovers plain `BMO(w)` with Lebesgue measure, and
/// `q = 2` uses `w^{-1}`, which makes
/// `‖b‖_{BMO(w)} ≤ ‖b‖_{BMO^q(w)}` an unconditional Hölder inequality.
pub fn bmo_q_norm(b: &StepFunction, w: &Weight, q: f64) -> Result<BmoReport> {
    if !(q.is_finite() && q >= 1.0) {
        return Err(Error::InvalidExponent {
            constraint: "1 <= q < inf",
            value: q,
        });
    }
    let measure = w.pow(1.0 - q);
    oscillation_sup(b, w, measure.as_step(), q)
}

/// `B₁ = sup_Q ((1/μ(Q)) ∫_Q |b − ⟨b⟩_Q|^p dλ)^{1/p}`.
pub fn b1(b: &StepFunction, mu: &Weight, lambda: &Weight, p: f64) -> Result<BmoReport> {
    crate::weights::conjugate_exponent(p)?;
    oscillation_sup(b, mu, lambda.as_step(), p)
}

/// `B₂ = sup_Q ((1/λ'(Q)) ∫_Q |b − ⟨b⟩_Q|^q dμ')^{1/q}`, stated on the
/// conjugated weights.
pub fn b2(b: &StepFunction, mu_conj: &Weight, lambda_conj: &Weight, q: f64) -> Result<BmoReport> {
    crate::weights::conjugate_exponent(q)?;
    oscillation_sup(b, lambda_conj, mu_conj.as_step(), q)
}

/// Carleson-measure norm
/// `‖g‖_{CM¹(w)} = sup_Q ((1/w(Q)) Σ_{P⊆Q,ε} ĝ(P,ε)²/⟨w⟩_P)^{1/2}`,
/// via one bottom-up pass over the prefix sums.
pub fn cm1_norm(g: &StepFunction, w: &Weight) -> Result<BmoReport> {
    same_grid(g.grid(), w.grid())?;
    let grid = g.grid().clone();
    let depth = grid.depth();
    let gc = analyze(g);
    let w_avg = w.averages();
    let stride = grid.branching() - 1;
    let mut best = f64::NEG_INFINITY;
    let mut witness = grid.base_cube();
    let mut per_level = vec![f64::NEG_INFINITY; depth as usize];
    let mut below: Vec<f64> = Vec::new();
    for k in (0..depth).rev() {
        let lv = gc.level(k);
        let avgs = w_avg.level(k);
        let mut cur = vec![0.0; grid.cubes_at(k)];
        for (index, slot) in cur.iter_mut().enumerate() {
            let base = index * stride;
            let own: f64 = lv[base..base + stride].iter().map(|c| c * c).sum::<f64>() / avgs[index];
            let q = Cube { level: k, index };
            let mut sum = own;
            if k + 1 < depth {
                for code in 0..grid.branching() {
                    sum += below[grid.child_unchecked(q, code).index];
                }
            }
            *slot = sum;
            let w_q = avgs[index] * grid.volume_at(k);
            let local = (sum / w_q).sqrt();
            per_level[k as usize] = per_level[k as usize].max(local);
            if local > best || (local == best && (k, index) < (witness.level, witness.index)) {
                best = local;
                witness = q;
            }
        }
        below = cur;
    }
    if depth == 0 {
        best = 0.0;
    }
    Ok(BmoReport {
        value: best,
        witness,
        per_level,
    })
}

/// `‖Φ‖_{H¹(w)} = ∫ (S Φ) w dx`.
pub fn h1_norm(phi: &StepFunction, w: &Weight) -> Result<f64> {
    same_grid(phi.grid(), w.grid())?;
    Ok(square_function(phi).mul(w.as_step())?.integral())
}

/// Duality pairing `⟨b − ⟨b⟩, Φ⟩` against the product of the
/// Carleson-measure and H¹ norms.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DualityCheck {
    pub pairing: f64,
    pub cm1: f64,
    pub h1: f64,
    /// `|pairing| / (cm1 · h1)`; `None` when the bound degenerates to 0.
    pub ratio: Option<f64>,
    /// True when the ratio stays below `1 + 1e-9` or the check is vacuous.
    pub within_unit: bool,
}

pub fn duality_check(b: &StepFunction, phi: &StepFunction, w: &Weight) -> Result<DualityCheck> {
    same_grid(b.grid(), phi.grid())?;
    same_grid(b.grid(), w.grid())?;
    let grid = b.grid().clone();
    let mean = b.integral() / grid.volume_at(0);
    let b0 = b.sub(&StepFunction::constant(grid, mean))?;
    let pairing = b0.inner(phi)?;
    let cm1 = cm1_norm(b, w)?.value;
    let h1 = h1_norm(phi, w)?;
    let bound = cm1 * h1;
    if bound <= 0.0 {
        return Ok(DualityCheck {
            pairing,
            cm1,
            h1,
            ratio: None,
            within_unit: pairing.abs() <= crate::tol::ZERO_SCALE,
        });
    }
    let ratio = pairing.abs() / bound;
    Ok(DualityCheck {
        pairing,
        cm1,
        h1,
        ratio: Some(ratio),
        within_unit: ratio <= 1.0 + crate::tol::POWER_CHAIN,
    })
}

/// The seven quantities whose mutual comparability the two-weight theory
/// asserts, evaluated on one `(b, μ, λ, p)` instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BmoEquivalence {
    /// (1) `‖b‖_{BMO²(ν)}` for the Bloom weight `ν = (μ/λ)^{1/p}`.
    pub bloom_bmo2: f64,
    /// (2) estimated `‖Π_b‖_{L^p(μ) → L^p(λ)}`.
    pub pi_norm: f64,
    /// (3) estimated `‖Π*_b‖_{L^p(μ) → L^p(λ)}`.
    pub pi_star_norm: f64,
    /// (4) the larger of the two paraproduct norms `L²(ν) → L²(ν^{-1})`.
    pub dual_pair_norm: f64,
    /// (5) `B₁`.
    pub b1: f64,
    /// (6) `B₂`.
    pub b2: f64,
    /// (7) `‖b‖_{BMO(ν)}`.
    pub bloom_bmo: f64,
}

impl BmoEquivalence {
    pub fn quantities(&self) -> [f64; 7] {
        [
            self.bloom_bmo2,
            self.pi_norm,
            self.pi_star_norm,
            self.dual_pair_norm,
            self.b1,
            self.b2,
            self.bloom_bmo,
        ]
    }

    /// `ratios[r][c] = q_r / q_c` (`NaN` on 0/0, `inf` on x/0).
    pub fn pairwise_ratios(&self) -> [[f64; 7]; 7] {
        let q = self.quantities();
        let mut out = [[0.0; 7]; 7];
        for r in 0..7 {
            for c in 0..7 {
                out[r][c] = q[r] / q[c];
            }
        }
        out
    }

    /// True when no quantity vanishes (below `scale`) while another one is
    /// substantially nonzero.
    pub fn zeros_consistent(&self, scale: f64) -> bool {
        let q = self.quantities();
        let any_zero = q.iter().any(|&v| v.abs() <= scale);
        let any_big = q.iter().any(|&v| v.abs() > scale);
        !(any_zero && any_big)
    }
}

/// Evaluates all seven quantities. The paraproduct norms ((2)–(4)) are
/// witness-certified estimates (`starts`/`iters` forwarded to the Boyd
/// iteration); the rest are exact grid suprema.
pub fn bmo_equivalence_report(
    b: &StepFunction,
    mu: &Weight,
    lambda: &Weight,
    p: f64,
    starts: usize,
    iters: usize,
) -> Result<BmoEquivalence> {
    use crate::operators::{ParaKind, ParaproductOp};
    use crate::opnorm::{opnorm_l2, opnorm_lp};
    use crate::weights::{bloom, conjugate_exponent};

    same_grid(b.grid(), mu.grid())?;
    same_grid(b.grid(), lambda.grid())?;
    let q = conjugate_exponent(p)?;
    let nu = bloom(mu, lambda, p)?;
    let nu_inv = nu.pow(-1.0);
    let pi = ParaproductOp::new(ParaKind::Pi, b);
    let pi_star = ParaproductOp::new(ParaKind::PiStar, b);

    let pi_norm = opnorm_lp(&pi, mu, lambda, p, starts, iters)?.value;
    let pi_star_norm = opnorm_lp(&pi_star, mu, lambda, p, starts, iters)?.value;
    let dual_pair_norm = opnorm_l2(&pi, &nu, &nu_inv)?
        .value
        .max(opnorm_l2(&pi_star, &nu, &nu_inv)?.value);

    Ok(BmoEquivalence {
        bloom_bmo2: bmo_q_norm(b, &nu, 2.0)?.value,
        pi_norm,
        pi_star_norm,
        dual_pair_norm,
        b1: b1(b, mu, lambda, p)?.value,
        b2: b2(b, &mu.pow(1.0 - q), &lambda.pow(1.0 - q), q)?.value,
        bloom_bmo: bmo_norm(b, &nu)?.value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::haar::{haar_function, Signature};
    use crate::weights::{bloom, gen_cascade_weight};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_step(grid: &Grid, seed: u64) -> StepFunction {
        let mut rng = StdRng::seed_from_u64(seed);
        StepFunction::from_cell_fn(grid.clone(), |_| rng.random_range(-1.0..1.0))
    }

    fn sign_pattern(grid: &Grid) -> StepFunction {
        let half = grid.cell_count() / 2;
        StepFunction::from_cell_fn(grid.clone(), |i| if i < half { 1.0 } else { -1.0 })
    }

    #[test]
    fn constants_have_zero_oscillation() {
        let grid = Grid::new(1, 3, &[]).unwrap();
        let b = StepFunction::constant(grid.clone(), 9.0);
        let w = gen_cascade_weight(&grid, 1.5, 1).unwrap();
        assert_eq!(bmo_norm(&b, &w).unwrap().value, 0.0);
        assert_eq!(bmo_q_norm(&b, &w, 2.0).unwrap().value, 0.0);
        assert_eq!(b1(&b, &w, &w, 2.0).unwrap().value, 0.0);
        assert_eq!(cm1_norm(&b, &w).unwrap().value, 0.0);
    }

    #[test]
    fn sign_pattern_has_unit_norm() {
        for depth in 1..=4 {
            let grid = Grid::new(1, depth, &[]).unwrap();
            let b = sign_pattern(&grid);
            let rep = bmo_norm(&b, &Weight::constant(grid.clone(), 1.0).unwrap()).unwrap();
            assert_eq!(rep.value, 1.0, "K={depth}");
            assert_eq!(rep.witness, grid.base_cube());
        }
    }

    #[test]
    fn norm_is_absolutely_homogeneous() {
        let grid = Grid::new(1, 4, &[]).unwrap();
        let b = random_step(&grid, 121);
        let w = gen_cascade_weight(&grid, 1.4, 2).unwrap();
        let base = bmo_norm(&b, &w).unwrap().value;
        let scaled = bmo_norm(&b.scale(-2.5), &w).unwrap().value;
        assert!((scaled - 2.5 * base).abs() < 1e-12 * base.max(1.0));
        let q_base = bmo_q_norm(&b, &w, 2.0).unwrap().value;
        let q_scaled = bmo_q_norm(&b.scale(-2.5), &w, 2.0).unwrap().value;
        assert!((q_scaled - 2.5 * q_base).abs() < 1e-10 * q_base.max(1.0));
    }

    #[test]
    fn q_one_recovers_the_plain_norm_for_any_weight() {
        let grid = Grid::new(1, 4, &[]).unwrap();
        let b = random_step(&grid, 122);
        let w = gen_cascade_weight(&grid, 1.8, 3).unwrap();
        let plain = bmo_norm(&b, &w).unwrap().value;
        let q1 = bmo_q_norm(&b, &w, 1.0).unwrap().value;
        assert!((plain - q1).abs() < 1e-13 * plain.max(1.0));
    }

    #[test]
    fn left_inequality_of_the_norm_family() {
        let grid = Grid::new(1, 4, &[]).unwrap();
        for seed in 0..25u64 {
            let b = random_step(&grid, 3000 + seed);
            let w = gen_cascade_weight(&grid, 1.7, 5000 + seed).unwrap();
            let plain = bmo_norm(&b, &w).unwrap().value;
            for q in [1.0, 1.5, 2.0] {
                let bq = bmo_q_norm(&b, &w, q).unwrap().value;
                assert!(
                    plain <= bq * (1.0 + 1e-12) + 1e-12,
                    "seed {seed}, q {q}: {plain} > {bq}"
                );
            }
        }
    }

    #[test]
    fn b1_reduces_to_unweighted_bmo2() {
        let grid = Grid::new(1, 3, &[]).unwrap();
        let b = random_step(&grid, 123);
        let one = Weight::constant(grid.clone(), 1.0).unwrap();
        let via_b1 = b1(&b, &one, &one, 2.0).unwrap().value;
        let via_q = bmo_q_norm(&b, &one, 2.0).unwrap().value;
        assert!((via_b1 - via_q).abs() < 1e-12 * via_b1.max(1.0));
    }

    #[test]
    fn b1_is_controlled_by_the_bloom_norm() {
        let grid = Grid::new(1, 4, &[]).unwrap();
        let p = 2.0;
        let mut worst: f64 = 0.0;
        for seed in 0..30u64 {
            let b = random_step(&grid, 4000 + seed);
            let mu = gen_cascade_weight(&grid, 1.5, 6000 + seed).unwrap();
            let la = gen_cascade_weight(&grid, 1.5, 7000 + seed).unwrap();
            let nu = bloom(&mu, &la, p).unwrap();
            let b1v = b1(&b, &mu, &la, p).unwrap().value;
            let bloom_norm = bmo_q_norm(&b, &nu, 2.0).unwrap().value;
            if bloom_norm > 0.0 {
                worst = worst.max(b1v / bloom_norm);
            }
        }
        assert!(worst.is_finite() && worst > 0.0);
        assert!(worst < 100.0, "constant blew up: {worst}");
    }

    #[test]
    fn cm1_of_top_haar_function_is_one() {
        let grid = Grid::new(1, 3, &[]).unwrap();
        let sig = Signature::new(0, 1).unwrap();
        let g = haar_function(&grid, grid.base_cube(), &sig).unwrap();
        let rep = cm1_norm(&g, &Weight::constant(grid.clone(), 1.0).unwrap()).unwrap();
        assert!((rep.value - 1.0).abs() < 1e-12);
        assert_eq!(rep.witness, grid.base_cube());
    }

    #[test]
    fn cm1_matches_brute_force() {
        let grid = Grid::new(2, 3, &[]).unwrap();
        let g = random_step(&grid, 124);
        let w = gen_cascade_weight(&grid, 1.6, 7).unwrap();
        let gc = analyze(&g);
        let mut slow_best = 0.0f64;
        for k in 0..grid.depth() {
            for q in grid.level_cubes(k) {
                let mut sum = 0.0;
                for kp in k..grid.depth() {
                    for p in grid.descendants(q, kp - k).unwrap() {
                        for sig in Signature::cancellative(grid.dim()) {
                            let c = gc.get(p, &sig).unwrap();
                            sum += c * c / w.average_on(p).unwrap();
                        }
                    }
                }
                slow_best = slow_best.max((sum / w.measure_on(q).unwrap()).sqrt());
            }
        }
        let fast = cm1_norm(&g, &w).unwrap().value;
        assert!((fast - slow_best).abs() < 1e-12 * slow_best.max(1.0));
    }

    #[test]
    fn cm1_bounded_by_bloom_norm_on_a2_weights() {
        let grid = Grid::new(1, 4, &[]).unwrap();
        for seed in 0..30u64 {
            let b = random_step(&grid, 8000 + seed);
            let w = gen_cascade_weight(&grid, 1.6, 9000 + seed).unwrap();
            let cm = cm1_norm(&b, &w).unwrap().value;
            let bq = bmo_q_norm(&b, &w, 2.0).unwrap().value;
            // constant depends on [w]_{A2}; just confirm finiteness + order
            assert!(cm.is_finite() && bq.is_finite());
            if bq > 0.0 {
                assert!(cm / bq < 50.0, "seed {seed}: {cm} vs {bq}");
            }
        }
    }

    #[test]
    fn h1_and_duality_closed_form() {
        let grid = Grid::new(1, 3, &[]).unwrap();
        let sig = Signature::new(0, 1).unwrap();
        let h = haar_function(&grid, grid.base_cube(), &sig).unwrap();
        let unit = Weight::constant(grid.clone(), 1.0).unwrap();
        assert!((h1_norm(&h, &unit).unwrap() - 1.0).abs() < 1e-12);
        let check = duality_check(&h, &h, &unit).unwrap();
        assert!((check.pairing - 1.0).abs() < 1e-12);
        assert!((check.ratio.unwrap() - 1.0).abs() < 1e-9);
        assert!(check.within_unit);

        let zero = StepFunction::zero(grid);
        let vac = duality_check(&h, &zero, &unit).unwrap();
        assert!(vac.ratio.is_none() && vac.within_unit);
    }

    #[test]
    fn equivalence_report_vanishes_on_constants() {
        let grid = Grid::new(1, 3, &[]).unwrap();
        let b = StepFunction::constant(grid.clone(), 4.0);
        let mu = gen_cascade_weight(&grid, 1.5, 1).unwrap();
        let la = gen_cascade_weight(&grid, 1.5, 2).unwrap();
        let rep = bmo_equivalence_report(&b, &mu, &la, 2.0, 4, 100).unwrap();
        for q in rep.quantities() {
            assert!(q.abs() < 1e-12, "{:?}", rep.quantities());
        }
        assert!(rep.zeros_consistent(1e-12));
    }

    #[test]
    fn equivalence_collapses_at_unit_weights() {
        let grid = Grid::new(1, 3, &[]).unwrap();
        let b = random_step(&grid, 55);
        let one = Weight::constant(grid.clone(), 1.0).unwrap();
        let rep = bmo_equivalence_report(&b, &one, &one, 2.0, 8, 300).unwrap();
        // ν ≡ 1 and p = 2: the three oscillation quantities coincide and the
        // three operator norms coincide.
        assert!((rep.bloom_bmo2 - rep.b1).abs() < 1e-12 * rep.bloom_bmo2.max(1.0));
        assert!((rep.bloom_bmo2 - rep.b2).abs() < 1e-12 * rep.bloom_bmo2.max(1.0));
        assert!((rep.pi_norm - rep.pi_star_norm).abs() < 1e-6 * rep.pi_norm.max(1.0));
        let expect_pair = rep.pi_norm.max(rep.pi_star_norm);
        assert!((rep.dual_pair_norm - expect_pair).abs() < 1e-6 * expect_pair.max(1.0));
        assert!(rep.zeros_consistent(1e-12));
    }

    #[test]
    fn duality_ratio_stays_under_one_on_random_instances() {
        let grid = Grid::new(1, 4, &[]).unwrap();
        let mut max_ratio = 0.0f64;
        for seed in 0..50u64 {
            let b = random_step(&grid, 10_000 + seed);
            let phi = random_step(&grid, 11_000 + seed);
            let w = gen_cascade_weight(&grid, 1.5, 12_000 + seed).unwrap();
            let check = duality_check(&b, &phi, &w).unwrap();
            if let Some(r) = check.ratio {
                max_ratio = max_ratio.max(r);
            }
            assert!(check.within_unit, "seed {seed}: {:?}", check.ratio);
        }
        assert!(max_ratio > 0.0);
    }
}
