//! Reuse-pattern cell coloring.
//!
//! A reuse pattern `(i, j)` marks as co-channel every cell reached by moving
//! `i` cells along a chain, turning once (60 degrees on hexagons, 90 on
//! squares) and moving `j` more. The co-channel cells form a sublattice
//! spanned by `v1 = i*e0 + j*e1` and its rotation `v2`; the colors are the
//! cosets of that sublattice and their number is the cluster size. With
//! `i = ceil(T/2)` and `j = floor(T/2)` the nearest co-channel cells are `T`
//! hops apart, so no walk of `T` cells meets a color twice.

use std::collections::HashMap;

use crate::par::map_indexed;
use crate::topology::{enumerate_paths, paths_from, CellGrid, CellId, Lattice, MobilityPath};
use crate::{Error, Result};

/// Largest grid accepted by [`brute_force_min_colors`].
pub const BRUTE_FORCE_MAX_CELLS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReusePattern {
    pub lattice: Lattice,
    pub i: u32,
    pub j: u32,
}

impl ReusePattern {
    pub fn new(lattice: Lattice, i: u32, j: u32) -> Result<Self> {
        if i + j == 0 {
            return Err(Error::InvalidParameter("reuse pattern needs i + j >= 1".into()));
        }
        Ok(ReusePattern { lattice, i, j })
    }

    /// Pattern with `i = ceil(T/2)`, `j = floor(T/2)`.
    pub fn for_path_length(lattice: Lattice, path_length: usize) -> Result<Self> {
        if path_length == 0 {
            return Err(Error::InvalidParameter("path length must be positive".into()));
        }
        let t = path_length as u32;
        Self::new(lattice, t.div_ceil(2), t / 2)
    }

    /// `i² + j² + ij` on hexagons, `i² + j²` on squares.
    pub fn cluster_size(&self) -> usize {
        let (i, j) = (self.i as usize, self.j as usize);
        match self.lattice {
            Lattice::Hexagonal => i * i + j * j + i * j,
            Lattice::Square => i * i + j * j,
        }
    }

    /// Center distance between nearest co-channel cells, in units of the
    /// cell-center spacing: `sqrt(3C)` for hexagons, `sqrt(C)` for squares.
    pub fn co_channel_distance(&self) -> f64 {
        let c = self.cluster_size() as f64;
        match self.lattice {
            Lattice::Hexagonal => (3.0 * c).sqrt(),
            Lattice::Square => c.sqrt(),
        }
    }

    /// Sublattice generators `(v1, v2)` with `v2` = `v1` rotated once.
    pub fn generators(&self) -> [(i64, i64); 2] {
        let (e0, e1) = (self.lattice.directions()[0], self.lattice.directions()[1]);
        let (i, j) = (self.i as i64, self.j as i64);
        let v1 = (i * e0.0 + j * e1.0, i * e0.1 + j * e1.1);
        [v1, self.lattice.rotate(v1)]
    }

    /// Coset key of an offset: `adj(V) * x mod C`, where `V` has the
    /// generators as columns. Two offsets share a color iff keys agree.
    fn coset_key(&self, (q, r): (i64, i64)) -> (i64, i64) {
        let [(a, b), (c, d)] = self.generators();
        let n = self.cluster_size() as i64;
        ((d * q - c * r).rem_euclid(n), (-b * q + a * r).rem_euclid(n))
    }

    /// Whether an offset is a co-channel displacement.
    pub fn is_co_channel(&self, v: (i64, i64)) -> bool {
        self.coset_key(v) == (0, 0)
    }

    /// Smallest `p > 0` with `(p, 0)` co-channel.
    pub fn column_period(&self) -> usize {
        (1..=self.cluster_size())
            .find(|&p| self.is_co_channel((p as i64, 0)))
            .expect("(C, 0) always lies in the sublattice")
    }

    /// Smallest `p > 0` with `(0, p)` co-channel.
    pub fn row_period(&self) -> usize {
        (1..=self.cluster_size())
            .find(|&p| self.is_co_channel((0, p as i64)))
            .expect("(0, C) always lies in the sublattice")
    }

    /// Whether the pattern wraps consistently on a torus of this grid.
    pub fn fits(&self, grid: &CellGrid) -> bool {
        grid.wrap_vectors().iter().all(|&w| self.is_co_channel(w))
    }

    /// Human-readable description of the compatible tori.
    fn torus_requirement(&self, grid: &CellGrid) -> String {
        let (pr, pc) = (self.row_period(), self.column_period());
        let mut msg = format!(
            "pattern ({}, {}) with {} colors needs the column count to be a multiple of {pc}; \
             smallest untwisted torus is {pr}x{pc} (rows x cols, any multiples)",
            self.i,
            self.j,
            self.cluster_size()
        );
        let twist = (0..grid.cols()).find(|&s| self.is_co_channel((s as i64, grid.rows() as i64)));
        match twist {
            Some(s) if grid.cols().is_multiple_of(pc) => {
                msg += &format!("; with {} rows use twist={s}", grid.rows())
            }
            Some(s) => {
                msg += &format!(
                    "; with {} rows use a multiple of {pc} columns and twist={s} (mod {pc})",
                    grid.rows()
                )
            }
            None => {}
        }
        msg
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColoringSource {
    ReusePattern { i: u32, j: u32 },
    Explicit,
}

/// Assignment of every cell to one of `L` color groups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coloring {
    colors: Vec<usize>,
    groups: Vec<Vec<CellId>>,
    source: ColoringSource,
}

impl Coloring {
    /// Coloring from an explicit per-cell color list with `num_colors`
    /// colors. Colors keep their given indices; groups may be empty.
    pub fn explicit(colors: Vec<usize>, num_colors: usize) -> Result<Self> {
        if let Some(&bad) = colors.iter().find(|&&c| c >= num_colors) {
            return Err(Error::InvalidParameter(format!(
                "color {bad} out of range for {num_colors} colors"
            )));
        }
        let mut groups = vec![Vec::new(); num_colors];
        for (cell, &c) in colors.iter().enumerate() {
            groups[c].push(cell);
        }
        Ok(Coloring {
            colors,
            groups,
            source: ColoringSource::Explicit,
        })
    }

    pub fn color(&self, cell: CellId) -> usize {
        self.colors[cell]
    }

    pub fn colors(&self) -> &[usize] {
        &self.colors
    }

    /// Number of colors `L`.
    pub fn num_colors(&self) -> usize {
        self.groups.len()
    }

    /// Cells of each color, ascending.
    pub fn groups(&self) -> &[Vec<CellId>] {
        &self.groups
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        self.groups.iter().map(Vec::len).collect()
    }

    pub fn source(&self) -> ColoringSource {
        self.source
    }

    pub fn num_cells(&self) -> usize {
        self.colors.len()
    }

    /// Copy with one cell moved to another color.
    pub fn recolored(&self, cell: CellId, color: usize) -> Result<Self> {
        let mut colors = self.colors.clone();
        *colors.get_mut(cell).ok_or(Error::InvalidCell {
            cell,
            cells: self.colors.len(),
        })? = color;
        Coloring::explicit(colors, self.num_colors().max(color + 1))
    }
}

/// Minimum number of colors such that every walk of `T` cells sees `T`
/// distinct colors on an unbounded lattice.
///
/// Hexagons: `3n²` for `T = 2n`, `3n² + 3n + 1` for `T = 2n + 1`.
/// Squares: `2n²` for `T = 2n`, `2n² + 2n + 1` for `T = 2n + 1`.
pub fn min_colors(lattice: Lattice, path_length: usize) -> Result<usize> {
    if path_length < 2 {
        return Err(Error::InvalidParameter(format!(
            "min_colors needs T >= 2, got {path_length}"
        )));
    }
    let n = path_length / 2;
    let even = path_length.is_multiple_of(2);
    Ok(match (lattice, even) {
        (Lattice::Hexagonal, true) => 3 * n * n,
        (Lattice::Hexagonal, false) => 3 * n * n + 3 * n + 1,
        (Lattice::Square, true) => 2 * n * n,
        (Lattice::Square, false) => 2 * n * n + 2 * n + 1,
    })
}

/// Colors the grid with the reuse pattern for paths of `path_length` cells.
///
/// On a torus the pattern must wrap consistently; the error names the
/// compatible dimensions otherwise. On a bounded grid the infinite pattern
/// is restricted to the grid, so groups may differ in size. Colors are
/// numbered by first appearance in cell order, so cell 0 has color 0.
pub fn color_cells(grid: &CellGrid, path_length: usize) -> Result<Coloring> {
    let pattern = ReusePattern::for_path_length(grid.lattice(), path_length)?;
    color_with_pattern(grid, &pattern)
}

pub fn color_with_pattern(grid: &CellGrid, pattern: &ReusePattern) -> Result<Coloring> {
    if pattern.lattice != grid.lattice() {
        return Err(Error::InvalidParameter(
            "pattern and grid use different lattices".into(),
        ));
    }
    if grid.boundary().is_torus() && !pattern.fits(grid) {
        return Err(Error::IncompatibleTorus {
            requirement: pattern.torus_requirement(grid),
        });
    }
    let num_colors = pattern.cluster_size();
    let mut index: HashMap<(i64, i64), usize> = HashMap::new();
    let mut colors = Vec::with_capacity(grid.len());
    for c in grid.cells() {
        let key = pattern.coset_key(grid.coords(c));
        let next = index.len();
        colors.push(*index.entry(key).or_insert(next));
    }
    // unused colors (small bounded grids) keep the highest indices
    let mut coloring = Coloring::explicit(colors, num_colors)?;
    coloring.source = ColoringSource::ReusePattern {
        i: pattern.i,
        j: pattern.j,
    };
    Ok(coloring)
}

/// Outcome of a validity check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verification {
    pub valid: bool,
    /// First offending walk in (start cell, depth-first) order.
    pub counterexample: Option<MobilityPath>,
}

fn has_repeated_color(coloring: &Coloring, path: &MobilityPath) -> bool {
    let cells = &path.cells;
    (0..cells.len())
        .any(|a| (a + 1..cells.len()).any(|b| coloring.color(cells[a]) == coloring.color(cells[b])))
}

/// Checks every self-avoiding walk of `path_length` cells for a repeated
/// color. Start cells are examined in parallel; the reported counterexample
/// is the first in sequential order regardless of scheduling.
pub fn verify_coloring(grid: &CellGrid, coloring: &Coloring, path_length: usize) -> Verification {
    assert_eq!(
        coloring.num_cells(),
        grid.len(),
        "coloring does not cover the grid"
    );
    if path_length <= 1 {
        return Verification {
            valid: true,
            counterexample: None,
        };
    }
    let per_start = map_indexed(grid.len(), |start| {
        paths_from(grid, start, path_length).find(|p| has_repeated_color(coloring, p))
    });
    let counterexample = per_start.into_iter().flatten().next();
    Verification {
        valid: counterexample.is_none(),
        counterexample,
    }
}

/// The pairwise formulation: valid iff every two same-colored cells are at
/// least `path_length` hops apart. Returns the first offending pair.
pub fn find_close_same_color_pair(
    grid: &CellGrid,
    coloring: &Coloring,
    path_length: usize,
) -> Option<(CellId, CellId)> {
    let per_cell = map_indexed(grid.len(), |a| {
        let dist = grid.distances_from(a).expect("cell in range");
        (a + 1..grid.len())
            .find(|&b| coloring.color(a) == coloring.color(b) && dist[b] < path_length)
            .map(|b| (a, b))
    });
    per_cell.into_iter().flatten().next()
}

/// Returns `Ok(())` if the coloring is valid, or the counterexample error.
pub fn require_valid(grid: &CellGrid, coloring: &Coloring, path_length: usize) -> Result<()> {
    let v = verify_coloring(grid, coloring, path_length);
    match v.counterexample {
        None => Ok(()),
        Some(p) => Err(Error::InvalidColoring {
            path_length,
            counterexample: p.cells,
        }),
    }
}

/// Conflict graph: an edge joins two cells that lie on a common walk of
/// `path_length` cells. Built directly from the walks, as bitmasks.
pub fn constraint_graph(grid: &CellGrid, path_length: usize) -> Vec<u64> {
    assert!(grid.len() <= 64);
    let mut adj = vec![0u64; grid.len()];
    for path in enumerate_paths(grid, path_length) {
        for &a in &path.cells {
            for &b in &path.cells {
                if a != b {
                    adj[a] |= 1 << b;
                }
            }
        }
    }
    adj
}

/// Exact chromatic number of the walk-conflict graph, with one optimal
/// coloring. Refuses grids above [`BRUTE_FORCE_MAX_CELLS`].
///
/// The search starts from a maximum-clique lower bound and tries `k`
/// colors by backtracking over cells in index order, lowest color first.
pub fn brute_force_coloring(grid: &CellGrid, path_length: usize) -> Result<(usize, Vec<usize>)> {
    if grid.len() > BRUTE_FORCE_MAX_CELLS {
        return Err(Error::TooLarge {
            cells: grid.len(),
            limit: BRUTE_FORCE_MAX_CELLS,
        });
    }
    if path_length == 0 {
        return Err(Error::InvalidParameter("path length must be positive".into()));
    }
    let adj = constraint_graph(grid, path_length);
    let lower = max_clique(&adj).max(1);
    for k in lower..=grid.len() {
        let mut colors = vec![usize::MAX; grid.len()];
        if color_backtrack(&adj, k, 0, 0, &mut colors) {
            return Ok((k, colors));
        }
    }
    unreachable!("K colors always suffice")
}

pub fn brute_force_min_colors(grid: &CellGrid, path_length: usize) -> Result<usize> {
    brute_force_coloring(grid, path_length).map(|(k, _)| k)
}

fn color_backtrack(adj: &[u64], k: usize, v: usize, used: usize, colors: &mut [usize]) -> bool {
    if v == adj.len() {
        return true;
    }
    let mut forbidden = 0u64;
    let mut nbrs = adj[v] & ((1u64 << v) - 1);
    while nbrs != 0 {
        let u = nbrs.trailing_zeros() as usize;
        forbidden |= 1 << colors[u];
        nbrs &= nbrs - 1;
    }
    // a fresh color beyond `used` is interchangeable with any other fresh one
    for c in 0..k.min(used + 1) {
        if forbidden & (1 << c) == 0 {
            colors[v] = c;
            if color_backtrack(adj, k, v + 1, used.max(c + 1), colors) {
                return true;
            }
        }
    }
    colors[v] = usize::MAX;
    false
}

fn max_clique(adj: &[u64]) -> usize {
    fn expand(adj: &[u64], size: usize, mut cand: u64, best: &mut usize) {
        if cand == 0 {
            *best = (*best).max(size);
            return;
        }
        while cand != 0 {
            if size + cand.count_ones() as usize <= *best {
                return;
            }
            let v = cand.trailing_zeros() as usize;
            cand &= cand - 1;
            expand(adj, size + 1, cand & adj[v], best);
        }
    }
    let all = if adj.len() == 64 {
        u64::MAX
    } else {
        (1u64 << adj.len()) - 1
    };
    let mut best = 0;
    expand(adj, 0, all, &mut best);
    best
}
