//! Muckenhoupt weights over the dyadic cubes of one grid.
//!
//! A [`Weight`] is a strictly positive step function. Its `A_p`
//! characteristic is the exact maximum of `⟨w⟩_Q ⟨w^{1-q}⟩_Q^{p-1}` over the
//! finitely many dyadic cubes, with `q` the conjugate exponent of `p`. The
//! module also builds conjugate weights, Bloom weights `ν = μ^{1/p} λ^{-1/p}`
//! with their `A_2` bound, mean-preserving multiplicative cascade weights for
//! experiments, and the Hölder chain linking the averages of `μ`, `λ` and `ν`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{same_grid, Cube, Grid};
use crate::haar::{LevelAverages, StepFunction};

/// Strictly positive step function, optionally annotated with the exponent
/// it is used under.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Weight {
    #[serde(flatten)]
    values: StepFunction,
    p: Option<f64>,
}

/// Validates `1 < p < ∞`; returns the conjugate exponent `q = p/(p-1)`.
pub fn conjugate_exponent(p: f64) -> Result<f64> {
    if !(p.is_finite() && p > 1.0) {
        return Err(Error::InvalidExponent {
            constraint: "1 < p < inf",
            value: p,
        });
    }
    Ok(p / (p - 1.0))
}

/// Cellwise power with the exact special cases `x^1 = x`, `x^0 = 1`,
/// `x^{-1} = 1/x`.
fn powf_cell(x: f64, alpha: f64) -> f64 {
    if alpha == 1.0 {
        x
    } else if alpha == 0.0 {
        1.0
    } else if alpha == -1.0 {
        1.0 / x
    } else {
        x.powf(alpha)
    }
}

impl Weight {
    pub fn new(values: StepFunction) -> Result<Weight> {
        for (cell, &v) in values.values().iter().enumerate() {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::NonPositiveWeight { cell, value: v });
            }
        }
        Ok(Weight { values, p: None })
    }

    pub fn with_exponent(values: StepFunction, p: f64) -> Result<Weight> {
        conjugate_exponent(p)?;
        let mut w = Weight::new(values)?;
        w.p = Some(p);
        Ok(w)
    }

    pub fn constant(grid: Grid, c: f64) -> Result<Weight> {
        Weight::new(StepFunction::constant(grid, c))
    }

    pub fn grid(&self) -> &Grid {
        self.values.grid()
    }

    pub fn as_step(&self) -> &StepFunction {
        &self.values
    }

    pub fn cell_values(&self) -> &[f64] {
        self.values.values()
    }

    pub fn exponent(&self) -> Option<f64> {
        self.p
    }

    /// Cellwise power `w^alpha` (again a weight).
    pub fn pow(&self, alpha: f64) -> Weight {
        Weight {
            values: self.values.map(|x| powf_cell(x, alpha)),
            p: None,
        }
    }

    pub fn mul(&self, other: &Weight) -> Result<Weight> {
        Ok(Weight {
            values: self.values.mul(&other.values)?,
            p: None,
        })
    }

    /// Weight of a cube, `w(Q) = Σ_{cells ⊆ Q} value · volume`.
    pub fn measure_on(&self, cube: Cube) -> Result<f64> {
        Ok(self.values.average_on(cube)? * self.grid().volume_at(cube.level))
    }

    /// Average `⟨w⟩_Q`.
    pub fn average_on(&self, cube: Cube) -> Result<f64> {
        self.values.average_on(cube)
    }

    pub fn averages(&self) -> LevelAverages {
        LevelAverages::compute(&self.values)
    }
}

impl<'de> Deserialize<'de> for Weight {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            #[serde(flatten)]
            values: StepFunction,
            p: Option<f64>,
        }
        let raw = Raw::deserialize(d)?;
        let mut w = Weight::new(raw.values).map_err(serde::de::Error::custom)?;
        if let Some(p) = raw.p {
            conjugate_exponent(p).map_err(serde::de::Error::custom)?;
            w.p = Some(p);
        }
        Ok(w)
    }
}

/// Result of an `A_p` characteristic scan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ApReport {
    /// `[w]_{A_p}` over the grid's dyadic cubes; always ≥ 1.
    pub value: f64,
    /// First cube (level-major enumeration) attaining the maximum.
    pub witness: Cube,
    /// Maximum of the defining product per level.
    pub per_level: Vec<f64>,
}

/// `[w]_{A_p} = max_Q ⟨w⟩_Q ⟨w^{1-q}⟩_Q^{p-1}`, exact over the grid.
pub fn ap_characteristic(w: &Weight, p: f64) -> Result<ApReport> {
    let q = conjugate_exponent(p)?;
    let grid = w.grid().clone();
    let avg_w = w.averages();
    let avg_c = w.pow(1.0 - q).averages();
    let mut best = f64::NEG_INFINITY;
    let mut witness = grid.base_cube();
    let mut per_level = Vec::with_capacity(grid.depth() as usize + 1);
    for k in 0..=grid.depth() {
        let mut level_best = f64::NEG_INFINITY;
        for (index, (&a, &c)) in avg_w.level(k).iter().zip(avg_c.level(k)).enumerate() {
            let prod = a * powf_cell(c, p - 1.0);
            level_best = level_best.max(prod);
            if prod > best {
                best = prod;
                witness = Cube { level: k, index };
            }
        }
        per_level.push(level_best);
    }
    Ok(ApReport {
        value: best,
        witness,
        per_level,
    })
}

/// Conjugate weight `w' = w^{1-q}`; satisfies `[w']_{A_q} = [w]_{A_p}^{q-1}`
/// cube by cube on the same grid.
pub fn conjugate(w: &Weight, p: f64) -> Result<Weight> {
    let q = conjugate_exponent(p)?;
    Ok(w.pow(1.0 - q))
}

/// Bloom weight `ν = μ^{1/p} λ^{-1/p}`.
pub fn bloom(mu: &Weight, lambda: &Weight, p: f64) -> Result<Weight> {
    conjugate_exponent(p)?;
    same_grid(mu.grid(), lambda.grid())?;
    mu.pow(1.0 / p).mul(&lambda.pow(-1.0 / p))
}

/// Both sides of `[ν]_{A_2} ≤ [μ]_{A_p}^{1/p} [λ]_{A_p}^{1/p}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NuA2Check {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

pub fn check_nu_a2(mu: &Weight, lambda: &Weight, p: f64) -> Result<NuA2Check> {
    let nu = bloom(mu, lambda, p)?;
    let lhs = ap_characteristic(&nu, 2.0)?.value;
    let rhs = (ap_characteristic(mu, p)?.value * ap_characteristic(lambda, p)?.value).powf(1.0 / p);
    Ok(NuA2Check {
        lhs,
        rhs,
        holds: lhs <= rhs + crate::tol::POWER_CHAIN,
    })
}

/// Mean-preserving multiplicative cascade: each sibling group multiplies the
/// parent value by factors drawn from `U[1/ratio_bound, ratio_bound]` and
/// renormalized to average 1. Draws run level-major in enumeration order, so
/// a deeper grid with the same seed refines the shallower weight exactly.
pub fn gen_cascade_weight(grid: &Grid, ratio_bound: f64, seed: u64) -> Result<Weight> {
    if !(ratio_bound.is_finite() && ratio_bound >= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "cascade ratio bound must be ≥ 1, got {ratio_bound}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = grid.branching();
    let mut cur = vec![1.0f64];
    let mut factors = vec![1.0f64; b];
    for k in 0..grid.depth() {
        let mut next = vec![0.0; grid.cubes_at(k + 1)];
        for (index, &parent) in cur.iter().enumerate() {
            let q = Cube { level: k, index };
            if ratio_bound > 1.0 {
                let mut sum = 0.0;
                for f in factors.iter_mut() {
                    *f = rng.random_range(1.0 / ratio_bound..=ratio_bound);
                    sum += *f;
                }
                let mean = sum / b as f64;
                for f in factors.iter_mut() {
                    *f /= mean;
                }
            }
            for (code, &f) in factors.iter().enumerate() {
                next[grid.child_unchecked(q, code).index] = parent * f;
            }
        }
        cur = next;
    }
    Weight::new(StepFunction::new(grid.clone(), cur)?)
}

/// The four quantities of the Hölder chain on one cube, ordered
/// `x2 ≤ x3 ≤ x4 ≤ x1` pointwise:
/// `x1 = ⟨μ⟩^{1/p}⟨λ'⟩^{1/q}`, `x2 = 1/(⟨μ'⟩^{1/q}⟨λ⟩^{1/p})`,
/// `x3 = 1/⟨ν^{-1}⟩`, `x4 = ⟨ν⟩`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NuHolderReport {
    pub upper: f64,
    pub lower: f64,
    pub inv_nu_avg_inv: f64,
    pub nu_avg: f64,
    /// `⟨ν⟩ ≤ ⟨μ⟩^{1/p}⟨λ'⟩^{1/q}` (Hölder, unconditional).
    pub holder_nu: bool,
    /// `⟨ν^{-1}⟩ ≤ ⟨μ'⟩^{1/q}⟨λ⟩^{1/p}` (Hölder, unconditional).
    pub holder_nu_inv: bool,
    /// Ratios across the chain links: upper/lower, lower/x3, x3/x4.
    pub link_ratios: [f64; 3],
}

pub fn nu_holder_check(
    mu: &Weight,
    lambda: &Weight,
    p: f64,
    q_cube: Cube,
) -> Result<NuHolderReport> {
    let q = conjugate_exponent(p)?;
    same_grid(mu.grid(), lambda.grid())?;
    let nu = bloom(mu, lambda, p)?;
    let mu_avg = mu.average_on(q_cube)?;
    let la_avg = lambda.average_on(q_cube)?;
    let mu_conj_avg = conjugate(mu, p)?.average_on(q_cube)?;
    let la_conj_avg = conjugate(lambda, p)?.average_on(q_cube)?;
    let nu_avg = nu.average_on(q_cube)?;
    let nu_inv_avg = nu.pow(-1.0).average_on(q_cube)?;
    let upper = mu_avg.powf(1.0 / p) * la_conj_avg.powf(1.0 / q);
    let lower = 1.0 / (mu_conj_avg.powf(1.0 / q) * la_avg.powf(1.0 / p));
    let x3 = 1.0 / nu_inv_avg;
    let tol = crate::tol::EXACT_IDENTITY;
    Ok(NuHolderReport {
        upper,
        lower,
        inv_nu_avg_inv: x3,
        nu_avg,
        holder_nu: nu_avg <= upper * (1.0 + tol) + tol,
        holder_nu_inv: lower <= x3 * (1.0 + tol) + tol,
        link_ratios: [upper / lower, lower / x3, x3 / nu_avg],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force_ap(w: &Weight, p: f64) -> f64 {
        let q = p / (p - 1.0);
        let grid = w.grid();
        let wc = w.pow(1.0 - q);
        let mut best = f64::NEG_INFINITY;
        for c in grid.all_cubes() {
            let prod = w.average_on(c).unwrap() * wc.average_on(c).unwrap().powf(p - 1.0);
            best = best.max(prod);
        }
        best
    }

    #[test]
    fn constant_weights_have_unit_characteristic() {
        let grid = Grid::new(1, 3, &[]).unwrap();
        for c in [1.0, 0.37, 42.0] {
            let w = Weight::constant(grid.clone(), c).unwrap();
            for p in [1.5, 2.0, 3.0] {
                let rep = ap_characteristic(&w, p).unwrap();
                assert!((rep.value - 1.0).abs() < 1e-12);
                assert_eq!(rep.witness, grid.base_cube());
            }
        }
    }

    #[test]
    fn characteristic_matches_brute_force_enumeration() {
        let grid = Grid::new(1, 4, &[]).unwrap();
        let w = gen_cascade_weight(&grid, 1.2, 9).unwrap();
        for p in [1.5, 2.0, 3.0] {
            let fast = ap_characteristic(&w, p).unwrap().value;
            let slow = brute_force_ap(&w, p);
            assert!((fast - slow).abs() <= 1e-12 * slow.max(1.0), "p={p}");
            assert!(fast >= 1.0 - 1e-12);
        }
        assert_eq!(grid.cube_count(), 31);
    }

    #[test]
    fn characteristic_is_scale_invariant() {
        let grid = Grid::new(2, 2, &[]).unwrap();
        let w = gen_cascade_weight(&grid, 1.4, 3).unwrap();
        let scaled = Weight::new(w.as_step().scale(7.3)).unwrap();
        for p in [1.5, 3.0] {
            let a = ap_characteristic(&w, p).unwrap().value;
            let b = ap_characteristic(&scaled, p).unwrap().value;
            assert!((a - b).abs() < 1e-12 * a);
        }
    }

    #[test]
    fn conjugate_weight_identity() {
        let grid = Grid::new(1, 4, &[]).unwrap();
        let one = Weight::constant(grid.clone(), 1.0).unwrap();
        assert_eq!(
            conjugate(&one, 2.5).unwrap().cell_values(),
            one.cell_values()
        );

        let w = gen_cascade_weight(&grid, 1.5, 17).unwrap();
        let recip = conjugate(&w, 2.0).unwrap();
        for (a, b) in w.cell_values().iter().zip(recip.cell_values()) {
            assert_eq!(*b, 1.0 / *a);
        }

        let p = 3.0;
        let q = 1.5;
        let wc = conjugate(&w, p).unwrap();
        let lhs = ap_characteristic(&wc, q).unwrap().value;
        let rhs = ap_characteristic(&w, p).unwrap().value.powf(q - 1.0);
        assert!((lhs - rhs).abs() < 1e-10 * rhs.max(1.0));
    }

    #[test]
    fn bloom_weight_of_equal_weights_is_one() {
        let grid = Grid::new(1, 4, &[]).unwrap();
        let w = gen_cascade_weight(&grid, 1.6, 23).unwrap();
        let nu = bloom(&w, &w, 2.0).unwrap();
        for &v in nu.cell_values() {
            assert!((v - 1.0).abs() < 1e-12);
        }
        let check = check_nu_a2(&w, &w, 2.0).unwrap();
        assert!(check.holds && (check.lhs - 1.0).abs() < 1e-9);

        let one = Weight::constant(grid, 1.0).unwrap();
        let c = check_nu_a2(&one, &one, 2.0).unwrap();
        assert!((c.lhs, c.rhs, c.holds) == (1.0, 1.0, true));
    }

    #[test]
    fn bloom_a2_bound_holds_for_random_pairs() {
        let grid = Grid::new(1, 4, &[]).unwrap();
        for seed in 0..20u64 {
            let mu = gen_cascade_weight(&grid, 1.7, 1000 + seed).unwrap();
            let la = gen_cascade_weight(&grid, 1.7, 2000 + seed).unwrap();
            for p in [1.5, 2.0, 3.0] {
                let c = check_nu_a2(&mu, &la, p).unwrap();
                assert!(c.holds, "seed {seed}, p {p}: {} > {}", c.lhs, c.rhs);
            }
        }
    }

    #[test]
    fn cascade_is_deterministic_and_mean_preserving() {
        let grid = Grid::new(2, 3, &[]).unwrap();
        let a = gen_cascade_weight(&grid, 1.5, 77).unwrap();
        let b = gen_cascade_weight(&grid, 1.5, 77).unwrap();
        assert_eq!(a.cell_values(), b.cell_values());
        let c = gen_cascade_weight(&grid, 1.5, 78).unwrap();
        assert_ne!(a.cell_values(), c.cell_values());

        let flat = gen_cascade_weight(&grid, 1.0, 5).unwrap();
        assert!(flat.cell_values().iter().all(|&v| v == 1.0));

        // sibling-group renormalization keeps every cube average at 1
        let avgs = a.averages();
        for k in 0..=grid.depth() {
            for &v in avgs.level(k) {
                assert!(v > 0.0);
            }
        }
        assert!((a.average_on(grid.base_cube()).unwrap() - 1.0).abs() < 1e-12);
        for q in grid.level_cubes(1) {
            let parent_avg = a.average_on(grid.base_cube()).unwrap();
            let mut child_sum = 0.0;
            for code in 0..grid.branching() {
                child_sum += a.average_on(grid.child(q, code).unwrap()).unwrap();
            }
            // children of q average back to q's own average
            assert!((child_sum / grid.branching() as f64 - a.average_on(q).unwrap()).abs() < 1e-12);
            let _ = parent_avg;
        }
    }

    #[test]
    fn cascade_characteristic_is_monotone_in_depth() {
        let mut prev = 0.0;
        for depth in 1..=5 {
            let grid = Grid::new(1, depth, &[]).unwrap();
            let w = gen_cascade_weight(&grid, 1.5, 99).unwrap();
            let a2 = ap_characteristic(&w, 2.0).unwrap().value;
            assert!(a2 >= prev - 1e-12, "depth {depth}: {a2} < {prev}");
            prev = a2;
        }
        assert!(prev >= 1.0);
    }

    #[test]
    fn holder_chain_orders_the_four_quantities() {
        let grid = Grid::new(1, 4, &[]).unwrap();
        let one = Weight::constant(grid.clone(), 1.0).unwrap();
        let rep = nu_holder_check(&one, &one, 2.0, grid.base_cube()).unwrap();
        for v in [rep.upper, rep.lower, rep.inv_nu_avg_inv, rep.nu_avg] {
            assert!((v - 1.0).abs() < 1e-12);
        }

        for seed in 0..10u64 {
            let mu = gen_cascade_weight(&grid, 1.8, 300 + seed).unwrap();
            let la = gen_cascade_weight(&grid, 1.8, 400 + seed).unwrap();
            let p = 2.5;
            let nu = bloom(&mu, &la, p).unwrap();
            let nu_a2 = ap_characteristic(&nu, 2.0).unwrap().value;
            for c in grid.all_cubes() {
                let rep = nu_holder_check(&mu, &la, p, c).unwrap();
                assert!(rep.holder_nu && rep.holder_nu_inv, "cube {c:?}");
                assert!(rep.lower <= rep.inv_nu_avg_inv * (1.0 + 1e-12));
                assert!(rep.inv_nu_avg_inv <= rep.nu_avg * (1.0 + 1e-12));
                assert!(rep.nu_avg <= rep.upper * (1.0 + 1e-12));
                // ⟨ν⟩⟨ν^{-1}⟩ ≤ [ν]_{A2} by definition of the characteristic
                assert!(rep.nu_avg / rep.inv_nu_avg_inv <= nu_a2 * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn weight_rejects_non_positive_cells() {
        let grid = Grid::new(1, 1, &[]).unwrap();
        let bad = StepFunction::new(grid.clone(), vec![1.0, 0.0]).unwrap();
        assert!(matches!(
            Weight::new(bad),
            Err(Error::NonPositiveWeight { cell: 1, .. })
        ));
        let neg = StepFunction::new(grid, vec![1.0, -2.0]).unwrap();
        assert!(Weight::new(neg).is_err());
    }

    #[test]
    fn weight_serde_round_trip() {
        let grid = Grid::new(1, 2, &[]).unwrap();
        let w = Weight::with_exponent(
            StepFunction::new(grid, vec![1.0, 2.0, 0.5, 4.0]).unwrap(),
            2.0,
        )
        .unwrap();
        let json = serde_json::to_string(&w).unwrap();
        let back: Weight = serde_json::from_str(&json).unwrap();
        assert_eq!(w, back);
        assert_eq!(back.exponent(), Some(2.0));
    }
}
