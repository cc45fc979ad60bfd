//! Haar system on a finite dyadic grid.
//!
//! Each cube `Q` strictly above the cell level carries `2^n - 1` cancellative
//! Haar functions `h_Q^ε`, indexed by signatures `ε ∈ {0,1}^n` other than the
//! all-ones one; the all-ones signature denotes the normalized indicator
//! `h_Q^1 = |Q|^{-1/2} 1_Q`. Along each coordinate the factor is either the
//! step `|I|^{-1/2}(1_{left} - 1_{right})` (signature bit 0) or the
//! normalized indicator (bit 1). Together with the normalized indicator of
//! the base cube, the cancellative functions form an orthonormal basis of
//! step functions; [`analyze`] and [`synthesize`] convert between cell values
//! and coefficients with one Walsh–Hadamard butterfly per cube.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{same_grid, Cube, Grid};

/// Tensor Haar signature: bit `i` set means the normalized-indicator factor
/// along coordinate `i`, clear means the cancellative step factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Signature {
    bits: u32,
    dim: u8,
}

impl Signature {
    pub fn new(bits: u32, dim: usize) -> Result<Signature> {
        if dim == 0 || dim > crate::grid::MAX_DIM {
            return Err(Error::InvalidArgument(format!(
                "signature dimension {dim} out of range"
            )));
        }
        if bits >= 1u32 << dim {
            return Err(Error::InvalidArgument(format!(
                "signature bits {bits:#b} exceed dimension {dim}"
            )));
        }
        Ok(Signature {
            bits,
            dim: dim as u8,
        })
    }

    /// Builds from an explicit bit vector, entry `i` giving bit `i`.
    pub fn from_bits(bits: &[u8]) -> Result<Signature> {
        let mut b = 0u32;
        for (i, &v) in bits.iter().enumerate() {
            if v > 1 {
                return Err(Error::InvalidArgument(format!(
                    "signature entries must be 0/1, got {v}"
                )));
            }
            b |= (v as u32) << i;
        }
        Signature::new(b, bits.len())
    }

    /// All-ones signature (normalized indicator).
    pub fn ones(dim: usize) -> Result<Signature> {
        Signature::new((1u32 << dim) - 1, dim)
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn bit(&self, i: usize) -> u8 {
        ((self.bits >> i) & 1) as u8
    }

    pub fn to_vec(&self) -> Vec<u8> {
        (0..self.dim()).map(|i| self.bit(i)).collect()
    }

    /// A signature is cancellative unless every bit is set.
    pub fn is_cancellative(&self) -> bool {
        self.bits != (1u32 << self.dim) - 1
    }

    /// Signature of a pointwise product: bit set exactly where the operands
    /// agree, so `h^ε h^η = |Q|^{-1/2} h^{ε+η}`.
    pub fn add(&self, other: &Signature) -> Result<Signature> {
        if self.dim != other.dim {
            return Err(Error::SignatureMismatch(self.dim(), other.dim()));
        }
        let mask = (1u32 << self.dim) - 1;
        Ok(Signature {
            bits: !(self.bits ^ other.bits) & mask,
            dim: self.dim,
        })
    }

    /// The cancellative signatures of a given dimension, in code order.
    pub fn cancellative(dim: usize) -> impl Iterator<Item = Signature> {
        let full = (1u32 << dim) - 1;
        (0..full).map(move |bits| Signature {
            bits,
            dim: dim as u8,
        })
    }
}

impl Serialize for Signature {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_vec().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Signature {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let bits = Vec::<u8>::deserialize(d)?;
        Signature::from_bits(&bits).map_err(serde::de::Error::custom)
    }
}

/// Sign (±1) taken by `h_Q^ε` on the child of `Q` selected by `child_code`
/// (bit `i` set = upper half along coordinate `i`): negative exactly when an
/// odd number of cancellative coordinates land in their upper half.
#[inline]
pub(crate) fn child_sign(sig_bits: u32, child_code: u32) -> f64 {
    if (child_code & !sig_bits).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Unnormalized Walsh–Hadamard transform in place:
/// `out[m] = Σ_δ buf[δ] (−1)^{popcount(δ & m)}`. Self-inverse up to `len`.
pub(crate) fn wht(buf: &mut [f64]) {
    let len = buf.len();
    debug_assert!(len.is_power_of_two());
    let mut h = 1;
    while h < len {
        let mut i = 0;
        while i < len {
            for j in i..i + h {
                let x = buf[j];
                let y = buf[j + h];
                buf[j] = x + y;
                buf[j + h] = x - y;
            }
            i += 2 * h;
        }
        h *= 2;
    }
}

/// Real-valued function constant on the finest-level cells of a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl StepFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<StepFunction> {
        if values.len() != grid.cell_count() {
            return Err(Error::InvalidArgument(format!(
                "{} cell values for a grid with {} cells",
                values.len(),
                grid.cell_count()
            )));
        }
        Ok(StepFunction { grid, values })
    }

    pub fn zero(grid: Grid) -> StepFunction {
        let values = vec![0.0; grid.cell_count()];
        StepFunction { grid, values }
    }

    pub fn constant(grid: Grid, c: f64) -> StepFunction {
        let values = vec![c; grid.cell_count()];
        StepFunction { grid, values }
    }

    /// Indicator of a dyadic cube (value 1 on its cells, 0 elsewhere).
    pub fn indicator(grid: Grid, cube: Cube) -> Result<StepFunction> {
        let mut f = StepFunction::zero(grid);
        if !f.grid.contains(cube) {
            return Err(Error::CubeOutOfRange(format!("{cube:?}")));
        }
        let down = f.grid.depth() - cube.level;
        let values = &mut f.values;
        f.grid.for_each_descendant(cube, down, |i| values[i] = 1.0);
        Ok(f)
    }

    pub fn from_cell_fn(grid: Grid, f: impl FnMut(usize) -> f64) -> StepFunction {
        let values = (0..grid.cell_count()).map(f).collect();
        StepFunction { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn integral(&self) -> f64 {
        let vol = self.grid.cell_volume();
        self.values.iter().sum::<f64>() * vol
    }

    /// `∫ f g` over the base cube.
    pub fn inner(&self, other: &StepFunction) -> Result<f64> {
        same_grid(&self.grid, &other.grid)?;
        let vol = self.grid.cell_volume();
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            * vol)
    }

    /// Average of `f` over a dyadic cube.
    pub fn average_on(&self, cube: Cube) -> Result<f64> {
        if !self.grid.contains(cube) {
            return Err(Error::CubeOutOfRange(format!("{cube:?}")));
        }
        let down = self.grid.depth() - cube.level;
        let mut sum = 0.0;
        self.grid
            .for_each_descendant(cube, down, |i| sum += self.values[i]);
        Ok(sum / (1usize << (self.grid.dim() as u32 * down)) as f64)
    }

    fn zip_with(&self, other: &StepFunction, op: impl Fn(f64, f64) -> f64) -> Result<StepFunction> {
        same_grid(&self.grid, &other.grid)?;
        Ok(StepFunction {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| op(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &StepFunction) -> Result<StepFunction> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &StepFunction) -> Result<StepFunction> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Pointwise product.
    pub fn mul(&self, other: &StepFunction) -> Result<StepFunction> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, c: f64) -> StepFunction {
        StepFunction {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    pub fn abs(&self) -> StepFunction {
        StepFunction {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v.abs()).collect(),
        }
    }

    pub fn map(&self, op: impl Fn(f64) -> f64) -> StepFunction {
        StepFunction {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| op(v)).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &StepFunction) -> Result<f64> {
        same_grid(&self.grid, &other.grid)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

impl<'de> Deserialize<'de> for StepFunction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            grid: Grid,
            values: Vec<f64>,
        }
        let raw = Raw::deserialize(d)?;
        StepFunction::new(raw.grid, raw.values).map_err(serde::de::Error::custom)
    }
}

/// Averages of a step function over every cube, level by level.
pub struct LevelAverages {
    levels: Vec<Vec<f64>>,
}

impl LevelAverages {
    pub fn compute(f: &StepFunction) -> LevelAverages {
        let grid = f.grid();
        let depth = grid.depth();
        let b = grid.branching();
        let mut levels = vec![Vec::new(); depth as usize + 1];
        levels[depth as usize] = f.values().to_vec();
        for k in (0..depth).rev() {
            let mut cur = vec![0.0; grid.cubes_at(k)];
            let next = &levels[k as usize + 1];
            for (index, slot) in cur.iter_mut().enumerate() {
                let c = Cube { level: k, index };
                let mut s = 0.0;
                for code in 0..b {
                    s += next[grid.child_unchecked(c, code).index];
                }
                *slot = s / b as f64;
            }
            levels[k as usize] = cur;
        }
        LevelAverages { levels }
    }

    pub fn avg(&self, cube: Cube) -> f64 {
        self.levels[cube.level as usize][cube.index]
    }

    pub fn level(&self, k: u32) -> &[f64] {
        &self.levels[k as usize]
    }
}

/// Haar coefficients of a step function: the mean over the base cube plus one
/// coefficient per (cube, cancellative signature) pair, stored densely per
/// level in cube-major, signature-code-minor order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HaarCoeffs {
    grid: Grid,
    mean: f64,
    levels: Vec<Vec<f64>>,
}

impl HaarCoeffs {
    pub fn zero(grid: Grid) -> HaarCoeffs {
        let depth = grid.depth();
        let stride = grid.branching() - 1;
        let levels = (0..depth)
            .map(|k| vec![0.0; grid.cubes_at(k) * stride])
            .collect();
        HaarCoeffs {
            grid,
            mean: 0.0,
            levels,
        }
    }

    pub fn from_parts(grid: Grid, mean: f64, levels: Vec<Vec<f64>>) -> Result<HaarCoeffs> {
        let stride = grid.branching() - 1;
        if levels.len() != grid.depth() as usize {
            return Err(Error::InvalidArgument(format!(
                "{} coefficient levels for a depth-{} grid",
                levels.len(),
                grid.depth()
            )));
        }
        for (k, lv) in levels.iter().enumerate() {
            if lv.len() != grid.cubes_at(k as u32) * stride {
                return Err(Error::InvalidArgument(format!(
                    "level {k} holds {} coefficients, expected {}",
                    lv.len(),
                    grid.cubes_at(k as u32) * stride
                )));
            }
        }
        Ok(HaarCoeffs { grid, mean, levels })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn set_mean(&mut self, mean: f64) {
        self.mean = mean;
    }

    /// Levels that carry coefficients: `0..depth`.
    pub fn coeff_levels(&self) -> u32 {
        self.levels.len() as u32
    }

    pub fn level(&self, k: u32) -> &[f64] {
        &self.levels[k as usize]
    }

    pub(crate) fn level_mut(&mut self, k: u32) -> &mut [f64] {
        &mut self.levels[k as usize]
    }

    #[inline]
    pub(crate) fn slot(&self, cube: Cube, code: u32) -> usize {
        cube.index * (self.grid.branching() - 1) + code as usize
    }

    /// Coefficient for a cube and cancellative signature code.
    #[inline]
    pub(crate) fn get_code(&self, cube: Cube, code: u32) -> f64 {
        self.levels[cube.level as usize][self.slot(cube, code)]
    }

    #[inline]
    pub(crate) fn add_code(&mut self, cube: Cube, code: u32, v: f64) {
        let s = self.slot(cube, code);
        self.levels[cube.level as usize][s] += v;
    }

    pub fn get(&self, cube: Cube, sig: &Signature) -> Result<f64> {
        self.check_slot(cube, sig)?;
        Ok(self.get_code(cube, sig.bits()))
    }

    pub fn set(&mut self, cube: Cube, sig: &Signature, v: f64) -> Result<()> {
        self.check_slot(cube, sig)?;
        let s = self.slot(cube, sig.bits());
        self.levels[cube.level as usize][s] = v;
        Ok(())
    }

    fn check_slot(&self, cube: Cube, sig: &Signature) -> Result<()> {
        if sig.dim() != self.grid.dim() {
            return Err(Error::SignatureMismatch(sig.dim(), self.grid.dim()));
        }
        if !sig.is_cancellative() {
            return Err(Error::InvalidArgument(
                "only cancellative signatures carry coefficients".into(),
            ));
        }
        if cube.level >= self.grid.depth() || !self.grid.contains(cube) {
            return Err(Error::CubeOutOfRange(format!(
                "{cube:?} carries no Haar coefficients"
            )));
        }
        Ok(())
    }

    /// Number of stored coefficients, `2^{nK} - 1`.
    pub fn coeff_count(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }

    /// `Σ f̂ ĝ + ⟨f⟩⟨g⟩|Q0|`, which equals `∫ f g` for matching grids.
    pub fn pairing(&self, other: &HaarCoeffs) -> Result<f64> {
        same_grid(&self.grid, &other.grid)?;
        let mut s = 0.0;
        for (a, b) in self.levels.iter().zip(&other.levels) {
            s += a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        }
        Ok(s + self.mean * other.mean * self.grid.volume_at(0))
    }

    pub fn sum_squares(&self) -> f64 {
        self.levels
            .iter()
            .map(|lv| lv.iter().map(|c| c * c).sum::<f64>())
            .sum()
    }

    pub fn scale(&self, c: f64) -> HaarCoeffs {
        HaarCoeffs {
            grid: self.grid.clone(),
            mean: c * self.mean,
            levels: self
                .levels
                .iter()
                .map(|lv| lv.iter().map(|v| c * v).collect())
                .collect(),
        }
    }

    pub fn add(&self, other: &HaarCoeffs) -> Result<HaarCoeffs> {
        same_grid(&self.grid, &other.grid)?;
        Ok(HaarCoeffs {
            grid: self.grid.clone(),
            mean: self.mean + other.mean,
            levels: self
                .levels
                .iter()
                .zip(&other.levels)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
                .collect(),
        })
    }

    pub fn sub(&self, other: &HaarCoeffs) -> Result<HaarCoeffs> {
        self.add(&other.scale(-1.0))
    }

    pub fn max_abs_diff(&self, other: &HaarCoeffs) -> Result<f64> {
        same_grid(&self.grid, &other.grid)?;
        let mut m = (self.mean - other.mean).abs();
        for (a, b) in self.levels.iter().zip(&other.levels) {
            for (x, y) in a.iter().zip(b) {
                m = m.max((x - y).abs());
            }
        }
        Ok(m)
    }
}

impl<'de> Deserialize<'de> for HaarCoeffs {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            grid: Grid,
            mean: f64,
            levels: Vec<Vec<f64>>,
        }
        let raw = Raw::deserialize(d)?;
        HaarCoeffs::from_parts(raw.grid, raw.mean, raw.levels).map_err(serde::de::Error::custom)
    }
}

/// Expands a step function in the Haar basis with one Walsh–Hadamard
/// butterfly over the child averages of each cube.
pub fn analyze(f: &StepFunction) -> HaarCoeffs {
    let grid = f.grid().clone();
    let la = LevelAverages::compute(f);
    let b = grid.branching();
    let full = b as u32 - 1;
    let mut out = HaarCoeffs::zero(grid.clone());
    out.set_mean(la.avg(grid.base_cube()));
    let mut buf = vec![0.0; b];
    for k in 0..grid.depth() {
        let next = la.level(k + 1);
        let scale = grid.volume_at(k).sqrt() / b as f64;
        let stride = b - 1;
        let lv = out.level_mut(k);
        for index in 0..grid.cubes_at(k) {
            let c = Cube { level: k, index };
            for (code, slot) in buf.iter_mut().enumerate() {
                *slot = next[grid.child_unchecked(c, code).index];
            }
            wht(&mut buf);
            for eps in 0..full {
                lv[index * stride + eps as usize] = scale * buf[(full ^ eps) as usize];
            }
        }
    }
    out
}

/// Exact inverse of [`analyze`]: rebuilds cell values from the mean and the
/// cancellative coefficients.
pub fn synthesize(c: &HaarCoeffs) -> StepFunction {
    let grid = c.grid().clone();
    let depth = grid.depth();
    let b = grid.branching();
    let full = b as u32 - 1;
    let mut cur = vec![c.mean()];
    let mut buf = vec![0.0; b];
    for k in 0..depth {
        let mut next = vec![0.0; grid.cubes_at(k + 1)];
        let inv_norm = 1.0 / grid.volume_at(k).sqrt();
        let lv = c.level(k);
        let stride = b - 1;
        for (index, &avg) in cur.iter().enumerate() {
            let q = Cube { level: k, index };
            buf[0] = avg;
            for m in 1..b as u32 {
                buf[m as usize] = inv_norm * lv[index * stride + (full ^ m) as usize];
            }
            wht(&mut buf);
            for (code, &v) in buf.iter().enumerate() {
                next[grid.child_unchecked(q, code).index] = v;
            }
        }
        cur = next;
    }
    StepFunction::new(grid, cur).expect("level-K averages are the cell values")
}

/// Value of `h_Q^ε` on one finest-level cell; zero when the cell lies
/// outside `Q`.
pub fn haar_eval(grid: &Grid, q: Cube, sig: &Signature, cell_index: usize) -> Result<f64> {
    if sig.dim() != grid.dim() {
        return Err(Error::SignatureMismatch(sig.dim(), grid.dim()));
    }
    if !grid.contains(q) {
        return Err(Error::CubeOutOfRange(format!("{q:?}")));
    }
    let cell = Cube {
        level: grid.depth(),
        index: cell_index,
    };
    if !grid.contains(cell) {
        return Err(Error::CubeOutOfRange(format!("cell {cell_index}")));
    }
    if !grid.is_ancestor_of(q, cell) {
        return Ok(0.0);
    }
    let norm = 1.0 / grid.volume_at(q.level).sqrt();
    if q.level == grid.depth() {
        // the cube is itself a cell: only the indicator signature exists
        return if sig.is_cancellative() {
            Err(Error::DepthOverflow(
                "cancellative Haar functions require subdivided cubes".into(),
            ))
        } else {
            Ok(norm)
        };
    }
    let code = grid.step_code(q, cell)? as u32;
    Ok(norm * child_sign(sig.bits(), code))
}

/// Constant value of `h_Q^ε` on a strict dyadic subcube `P ⊊ Q`.
pub fn haar_value_on_subcube(grid: &Grid, q: Cube, sig: &Signature, p: Cube) -> Result<f64> {
    if sig.dim() != grid.dim() {
        return Err(Error::SignatureMismatch(sig.dim(), grid.dim()));
    }
    let code = grid.step_code(q, p)? as u32;
    Ok(child_sign(sig.bits(), code) / grid.volume_at(q.level).sqrt())
}

/// Materializes `h_Q^ε` as a step function.
pub fn haar_function(grid: &Grid, q: Cube, sig: &Signature) -> Result<StepFunction> {
    if sig.dim() != grid.dim() {
        return Err(Error::SignatureMismatch(sig.dim(), grid.dim()));
    }
    if !grid.contains(q) {
        return Err(Error::CubeOutOfRange(format!("{q:?}")));
    }
    if sig.is_cancellative() && q.level >= grid.depth() {
        return Err(Error::DepthOverflow(
            "cancellative Haar functions require subdivided cubes".into(),
        ));
    }
    let mut f = StepFunction::zero(grid.clone());
    let norm = 1.0 / grid.volume_at(q.level).sqrt();
    if q.level == grid.depth() {
        f.values_mut()[q.index] = norm;
        return Ok(f);
    }
    for code in 0..grid.branching() {
        let child = grid.child_unchecked(q, code);
        let v = norm * child_sign(sig.bits(), code as u32);
        let down = grid.depth() - child.level;
        let values = f.values_mut();
        grid.for_each_descendant(child, down, |i| values[i] = v);
    }
    Ok(f)
}

/// Both sides of the telescoping average identity
/// `⟨f⟩_Q − ⟨f⟩_{Q^{(i)}} = Σ_{1≤k≤i} Σ_ε f̂(Q^{(k)}, ε) h_{Q^{(k)}}^ε(Q)`.
pub fn avg_difference_check(f: &StepFunction, q: Cube, i: u32) -> Result<(f64, f64)> {
    let grid = f.grid();
    let anc = grid.ancestor(q, i)?;
    let lhs = f.average_on(q)? - f.average_on(anc)?;
    if i == 0 {
        return Ok((lhs, 0.0));
    }
    let coeffs = analyze(f);
    let mut rhs = 0.0;
    for k in 1..=i {
        let a = grid.ancestor_unchecked(q, k);
        let code = grid.step_code(a, q)? as u32;
        let norm = 1.0 / grid.volume_at(a.level).sqrt();
        for eps in 0..(grid.branching() as u32 - 1) {
            rhs += coeffs.get_code(a, eps) * norm * child_sign(eps, code);
        }
    }
    Ok((lhs, rhs))
}

/// Both sides of the Parseval identity `Σ f̂² + ⟨f⟩²|Q0| = ∫ f²`.
pub fn parseval_check(f: &StepFunction) -> (f64, f64) {
    let c = analyze(f);
    let lhs = c.sum_squares() + c.mean() * c.mean() * f.grid().volume_at(0);
    let rhs = f.inner(f).expect("same grid");
    (lhs, rhs)
}
