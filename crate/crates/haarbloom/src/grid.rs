//! Finite dyadic grids.
//!
//! A [`Grid`] is the full dyadic tree of depth `K` under one base cube in
//! `R^n`: level `k` holds the `2^{nk}` cubes obtained by `k` rounds of
//! halving, and the level-`K` cubes are the *cells* on which step functions
//! live. Cubes are identified by `(level, index)` — never by floating-point
//! geometry — with the index enumerating the lexicographic order of the
//! multi-index, so nesting tests are exact and enumeration order is
//! deterministic (level-major, lexicographic within a level).
//!
//! An optional translation may be applied to the base cube. It must be a
//! multiple of the finest cell side, so every supported grid lives on a
//! common lattice and step functions move between grids without resampling.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest number of finest-level cells a grid may hold (2^24).
pub const MAX_CELLS: u32 = 24;

/// Largest supported dimension.
pub const MAX_DIM: usize = 4;

/// Serializable description of a grid: `{n, K, base_origin, base_side, shift}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDescriptor {
    pub n: usize,
    #[serde(rename = "K")]
    pub depth: u32,
    pub base_origin: Vec<f64>,
    pub base_side: f64,
    pub shift: Vec<f64>,
}

#[derive(Debug)]
struct GridData {
    n: usize,
    depth: u32,
    base_origin: Vec<f64>,
    base_side: f64,
    /// Translation in units of the finest cell side; exact by construction.
    shift_cells: Vec<i64>,
}

/// Immutable finite dyadic grid; cheap to clone and share across threads.
#[derive(Clone)]
pub struct Grid {
    data: Arc<GridData>,
}

/// A dyadic cube: its refinement level and the lexicographic rank of its
/// multi-index within that level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cube {
    pub level: u32,
    pub index: usize,
}

/// Fixed-capacity multi-index; only the first `n` entries are meaningful.
pub type Coords = [usize; MAX_DIM];

impl Grid {
    /// Builds the grid of depth `depth` on `[0, 1)^n` translated by `shift`.
    ///
    /// `shift` may be empty (no translation) or carry one entry per
    /// coordinate, each an exact multiple of the finest cell side
    /// `2^{-depth}`. Construction fails when the cell count would exceed the
    /// memory budget or the shift misses the finest lattice.
    pub fn new(n: usize, depth: u32, shift: &[f64]) -> Result<Grid> {
        Self::with_base(n, depth, vec![0.0; n], 1.0, shift)
    }

    /// As [`Grid::new`] with an explicit base cube.
    pub fn with_base(
        n: usize,
        depth: u32,
        base_origin: Vec<f64>,
        base_side: f64,
        shift: &[f64],
    ) -> Result<Grid> {
        if n == 0 || n > MAX_DIM {
            return Err(Error::InvalidGrid(format!(
                "dimension must be in 1..={MAX_DIM}, got {n}"
            )));
        }
        if (n as u32) * depth > MAX_CELLS {
            return Err(Error::BudgetExceeded(format!(
                "2^({n}*{depth}) cells exceed the 2^{MAX_CELLS} budget"
            )));
        }
        if !(base_side.is_finite() && base_side > 0.0) {
            return Err(Error::InvalidGrid(format!("base side {base_side} invalid")));
        }
        if base_origin.len() != n || base_origin.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidGrid("base origin malformed".into()));
        }
        if !shift.is_empty() && shift.len() != n {
            return Err(Error::InvalidGrid(format!(
                "shift has {} entries for dimension {n}",
                shift.len()
            )));
        }
        let cell = base_side / (1u64 << depth) as f64;
        let mut shift_cells = vec![0i64; n];
        for (i, &s) in shift.iter().enumerate() {
            if !s.is_finite() {
                return Err(Error::InvalidGrid(format!(
                    "shift component {i} not finite"
                )));
            }
            let m = (s / cell).round();
            if (s - m * cell).abs() > 1e-9 * cell {
                return Err(Error::ShiftNotQuantized {
                    component: i,
                    value: s,
                    cell,
                });
            }
            shift_cells[i] = m as i64;
        }
        Ok(Grid {
            data: Arc::new(GridData {
                n,
                depth,
                base_origin,
                base_side,
                shift_cells,
            }),
        })
    }

    pub fn from_descriptor(d: &GridDescriptor) -> Result<Grid> {
        Self::with_base(d.n, d.depth, d.base_origin.clone(), d.base_side, &d.shift)
    }

    pub fn descriptor(&self) -> GridDescriptor {
        GridDescriptor {
            n: self.data.n,
            depth: self.data.depth,
            base_origin: self.data.base_origin.clone(),
            base_side: self.data.base_side,
            shift: self.shift(),
        }
    }

    pub fn dim(&self) -> usize {
        self.data.n
    }

    pub fn depth(&self) -> u32 {
        self.data.depth
    }

    pub fn base_side(&self) -> f64 {
        self.data.base_side
    }

    /// Translation applied to the base cube, reconstructed exactly from its
    /// integer representation on the finest lattice.
    pub fn shift(&self) -> Vec<f64> {
        let cell = self.cell_side();
        self.data
            .shift_cells
            .iter()
            .map(|&m| m as f64 * cell)
            .collect()
    }

    /// Number of finest-level cells, `2^{n·K}`.
    pub fn cell_count(&self) -> usize {
        1usize << (self.data.n as u32 * self.data.depth)
    }

    /// Number of cubes at `level`.
    pub fn cubes_at(&self, level: u32) -> usize {
        1usize << (self.data.n as u32 * level)
    }

    /// Total number of cubes over all levels.
    pub fn cube_count(&self) -> usize {
        (0..=self.data.depth).map(|k| self.cubes_at(k)).sum()
    }

    /// Number of children of an internal cube, `2^n`.
    pub fn branching(&self) -> usize {
        1usize << self.data.n
    }

    pub fn side_at(&self, level: u32) -> f64 {
        self.data.base_side / (1u64 << level) as f64
    }

    pub fn cell_side(&self) -> f64 {
        self.side_at(self.data.depth)
    }

    pub fn volume_at(&self, level: u32) -> f64 {
        self.side_at(level).powi(self.data.n as i32)
    }

    pub fn cell_volume(&self) -> f64 {
        self.volume_at(self.data.depth)
    }

    pub fn base_cube(&self) -> Cube {
        Cube { level: 0, index: 0 }
    }

    pub fn contains(&self, c: Cube) -> bool {
        c.level <= self.data.depth && c.index < self.cubes_at(c.level)
    }

    fn check(&self, c: Cube) -> Result<()> {
        if self.contains(c) {
            Ok(())
        } else {
            Err(Error::CubeOutOfRange(format!(
                "(level {}, index {}) on a depth-{} grid",
                c.level, c.index, self.data.depth
            )))
        }
    }

    /// Multi-index of a cube (lexicographic decode of its linear index).
    pub fn coords(&self, c: Cube) -> Coords {
        let n = self.data.n;
        let mask = (1usize << c.level) - 1;
        let mut out = [0usize; MAX_DIM];
        let mut rest = c.index;
        for axis in (0..n).rev() {
            out[axis] = rest & mask;
            rest >>= c.level;
        }
        out
    }

    /// Linear index of a multi-index at `level`.
    pub fn index_of(&self, level: u32, coords: &Coords) -> usize {
        let mut idx = 0usize;
        for &c in coords.iter().take(self.data.n) {
            idx = (idx << level) | c;
        }
        idx
    }

    /// The `up`-th generation ancestor; fails when it would leave the grid.
    pub fn ancestor(&self, c: Cube, up: u32) -> Result<Cube> {
        self.check(c)?;
        if up > c.level {
            return Err(Error::CubeOutOfRange(format!(
                "ancestor {up} levels above a level-{} cube leaves the base cube",
                c.level
            )));
        }
        if up == 0 {
            return Ok(c);
        }
        let mut coords = self.coords(c);
        for coord in coords.iter_mut().take(self.data.n) {
            *coord >>= up;
        }
        Ok(Cube {
            level: c.level - up,
            index: self.index_of(c.level - up, &coords),
        })
    }

    pub fn parent(&self, c: Cube) -> Result<Cube> {
        self.ancestor(c, 1)
    }

    /// Child of `c` selected by an `n`-bit code (bit `i` picks the upper
    /// half along coordinate `i`).
    pub fn child(&self, c: Cube, code: usize) -> Result<Cube> {
        self.check(c)?;
        if c.level >= self.data.depth {
            return Err(Error::DepthOverflow(format!(
                "cube at level {} has no children (depth {})",
                c.level, self.data.depth
            )));
        }
        debug_assert!(code < self.branching());
        let mut coords = self.coords(c);
        for (axis, coord) in coords.iter_mut().enumerate().take(self.data.n) {
            *coord = (*coord << 1) | ((code >> axis) & 1);
        }
        Ok(Cube {
            level: c.level + 1,
            index: self.index_of(c.level + 1, &coords),
        })
    }

    /// All `2^{kn}` descendants `k` generations below `c`, in lexicographic
    /// order of their multi-indices.
    pub fn descendants(&self, c: Cube, down: u32) -> Result<Vec<Cube>> {
        self.check(c)?;
        if c.level + down > self.data.depth {
            return Err(Error::DepthOverflow(format!(
                "descendants {down} levels below level {} exceed depth {}",
                c.level, self.data.depth
            )));
        }
        let mut out = Vec::with_capacity(1usize << (self.data.n as u32 * down));
        self.for_each_descendant(c, down, |idx| {
            out.push(Cube {
                level: c.level + down,
                index: idx,
            })
        });
        Ok(out)
    }

    /// Visits the linear indices of the level-`(c.level+down)` cubes inside
    /// `c`, lexicographically. The caller must keep `c.level+down ≤ depth`.
    pub fn for_each_descendant(&self, c: Cube, down: u32, mut visit: impl FnMut(usize)) {
        let n = self.data.n;
        debug_assert!(c.level + down <= self.data.depth);
        let base = self.coords(c);
        let m = 1usize << down;
        let level = c.level + down;
        let mut off = [0usize; MAX_DIM];
        loop {
            let mut coords = [0usize; MAX_DIM];
            for axis in 0..n {
                coords[axis] = (base[axis] << down) + off[axis];
            }
            visit(self.index_of(level, &coords));
            // odometer, last axis fastest
            let mut axis = n;
            loop {
                if axis == 0 {
                    return;
                }
                axis -= 1;
                off[axis] += 1;
                if off[axis] < m {
                    break;
                }
                off[axis] = 0;
                if axis == 0 {
                    return;
                }
            }
        }
    }

    /// As [`Grid::child`] without range checks; for internal tree passes
    /// where the caller has already validated levels.
    pub(crate) fn child_unchecked(&self, c: Cube, code: usize) -> Cube {
        debug_assert!(c.level < self.data.depth && code < self.branching());
        let mut coords = self.coords(c);
        for (axis, coord) in coords.iter_mut().enumerate().take(self.data.n) {
            *coord = (*coord << 1) | ((code >> axis) & 1);
        }
        Cube {
            level: c.level + 1,
            index: self.index_of(c.level + 1, &coords),
        }
    }

    /// As [`Grid::ancestor`] without range checks.
    pub(crate) fn ancestor_unchecked(&self, c: Cube, up: u32) -> Cube {
        debug_assert!(up <= c.level);
        if up == 0 {
            return c;
        }
        let mut coords = self.coords(c);
        for coord in coords.iter_mut().take(self.data.n) {
            *coord >>= up;
        }
        Cube {
            level: c.level - up,
            index: self.index_of(c.level - up, &coords),
        }
    }

    /// Code of the first-generation child of `anc` on the path down to
    /// `desc` (`desc` strictly below `anc`).
    pub fn step_code(&self, anc: Cube, desc: Cube) -> Result<usize> {
        self.check(anc)?;
        self.check(desc)?;
        if desc.level <= anc.level {
            return Err(Error::CubeOutOfRange(
                "step_code requires a strict descendant".into(),
            ));
        }
        let up = desc.level - anc.level - 1;
        let child = self.ancestor(desc, up)?;
        let cc = self.coords(child);
        let ac = self.coords(anc);
        let mut code = 0usize;
        for axis in 0..self.data.n {
            if cc[axis] >> 1 != ac[axis] {
                return Err(Error::CubeOutOfRange(
                    "step_code requires a descendant of the given ancestor".into(),
                ));
            }
            code |= (cc[axis] & 1) << axis;
        }
        Ok(code)
    }

    /// Whether `inner` is contained in `outer` (every cube contains itself).
    pub fn is_ancestor_of(&self, outer: Cube, inner: Cube) -> bool {
        if outer.level > inner.level {
            return false;
        }
        match self.ancestor(inner, inner.level - outer.level) {
            Ok(a) => a == outer,
            Err(_) => false,
        }
    }

    /// Lower corner of a cube in physical coordinates (display/debug only;
    /// identity and nesting never consult geometry).
    pub fn lower_corner(&self, c: Cube) -> Vec<f64> {
        let coords = self.coords(c);
        let side = self.side_at(c.level);
        let cell = self.cell_side();
        (0..self.data.n)
            .map(|axis| {
                self.data.base_origin[axis]
                    + self.data.shift_cells[axis] as f64 * cell
                    + coords[axis] as f64 * side
            })
            .collect()
    }

    /// Cubes of one level in enumeration order.
    pub fn level_cubes(&self, level: u32) -> impl Iterator<Item = Cube> + '_ {
        (0..self.cubes_at(level)).map(move |index| Cube { level, index })
    }

    /// All cubes, level-major.
    pub fn all_cubes(&self) -> impl Iterator<Item = Cube> + '_ {
        (0..=self.data.depth).flat_map(move |level| self.level_cubes(level))
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.data, &other.data)
            || (self.data.n == other.data.n
                && self.data.depth == other.data.depth
                && self.data.base_origin == other.data.base_origin
                && self.data.base_side == other.data.base_side
                && self.data.shift_cells == other.data.shift_cells)
    }
}

impl Eq for Grid {}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Grid(n={}, K={}, side={})",
            self.data.n, self.data.depth, self.data.base_side
        )
    }
}

impl Serialize for Grid {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.descriptor().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Grid {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let desc = GridDescriptor::deserialize(d)?;
        Grid::from_descriptor(&desc).map_err(serde::de::Error::custom)
    }
}

pub(crate) fn same_grid(a: &Grid, b: &Grid) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_counts_per_level() {
        let g = Grid::new(1, 2, &[]).unwrap();
        assert_eq!(g.cube_count(), 7);
        let g = Grid::new(2, 1, &[]).unwrap();
        assert_eq!(g.cubes_at(1), 4);
        let g = Grid::new(2, 3, &[]).unwrap();
        assert_eq!(g.descendants(g.base_cube(), 2).unwrap().len(), 16);
    }

    #[test]
    fn quantized_shift_lands_on_lattice() {
        let g = Grid::new(1, 3, &[0.125]).unwrap();
        for c in g.all_cubes() {
            let x = g.lower_corner(c)[0];
            let on_lattice = (x * 8.0 - (x * 8.0).round()).abs() < 1e-12;
            assert!(on_lattice, "corner {x} off the 1/8 lattice");
        }
        assert!(matches!(
            Grid::new(1, 3, &[0.1]),
            Err(Error::ShiftNotQuantized { .. })
        ));
    }

    #[test]
    fn budget_and_dimension_guards() {
        assert!(matches!(Grid::new(0, 1, &[]), Err(Error::InvalidGrid(_))));
        assert!(matches!(
            Grid::new(3, 9, &[]),
            Err(Error::BudgetExceeded(_))
        ));
        assert!(Grid::new(3, 8, &[]).is_ok());
    }

    #[test]
    fn ancestor_descendant_navigation() {
        let g = Grid::new(1, 2, &[]).unwrap();
        let half = Cube { level: 1, index: 0 };
        assert_eq!(g.ancestor(half, 1).unwrap(), g.base_cube());
        assert_eq!(g.ancestor(half, 0).unwrap(), half);
        assert!(g.ancestor(half, 2).is_err());

        let kids = g.descendants(g.base_cube(), 1).unwrap();
        assert_eq!(kids.len(), 2);
        assert_eq!(kids[0], Cube { level: 1, index: 0 });
        assert_eq!(kids[1], Cube { level: 1, index: 1 });
        assert_eq!(
            g.descendants(g.base_cube(), 0).unwrap(),
            vec![g.base_cube()]
        );
    }

    #[test]
    fn ancestor_of_corner_cell_is_base() {
        let g = Grid::new(2, 2, &[]).unwrap();
        let coords: Coords = [3, 1, 0, 0];
        let cell = Cube {
            level: 2,
            index: g.index_of(2, &coords),
        };
        assert_eq!(g.ancestor(cell, 2).unwrap(), g.base_cube());
    }

    #[test]
    fn descendants_round_trip_through_ancestor() {
        let g = Grid::new(2, 3, &[]).unwrap();
        for q in g.level_cubes(1) {
            for d in g.descendants(q, 2).unwrap() {
                assert_eq!(g.ancestor(d, 2).unwrap(), q);
                assert!(g.is_ancestor_of(q, d));
            }
        }
    }

    #[test]
    fn level_volumes_tile_the_base_cube() {
        let g = Grid::new(3, 2, &[]).unwrap();
        for k in 0..=g.depth() {
            let total: f64 = g.level_cubes(k).map(|c| g.volume_at(c.level)).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn step_code_identifies_the_branch() {
        let g = Grid::new(2, 2, &[]).unwrap();
        let base = g.base_cube();
        for code in 0..g.branching() {
            let child = g.child(base, code).unwrap();
            assert_eq!(g.step_code(base, child).unwrap(), code);
            for gcode in 0..g.branching() {
                let gc = g.child(child, gcode).unwrap();
                assert_eq!(g.step_code(base, gc).unwrap(), code);
                assert_eq!(g.step_code(child, gc).unwrap(), gcode);
            }
        }
    }

    #[test]
    fn descriptor_round_trip() {
        let g = Grid::with_base(2, 3, vec![1.0, -0.5], 2.0, &[0.25, 0.0]).unwrap();
        let json = serde_json::to_string(&g.descriptor()).unwrap();
        let d: GridDescriptor = serde_json::from_str(&json).unwrap();
        let g2 = Grid::from_descriptor(&d).unwrap();
        assert_eq!(g, g2);
        assert!(json.contains("\"K\":3"));
    }
}
