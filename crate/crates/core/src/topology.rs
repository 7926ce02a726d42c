//! Finite hexagonal and square cell grids.
//!
//! Cells are addressed by axial coordinates `(q, r)` with `q` in `0..cols`
//! and `r` in `0..rows`, mapped row-major onto dense ids `r * cols + q`.
//! Hexagonal adjacency uses the six axial offsets, square adjacency the four
//! von Neumann offsets.
//!
//! A torus may carry a twist: leaving the grid through the last row re-enters
//! at row 0 shifted by `twist` columns. The wrap lattice is then spanned by
//! `(cols, 0)` and `(twist, rows)`, which lets small tori match reuse
//! patterns whose cluster size is prime (the 7-color hexagonal pattern fits a
//! 3x7 twisted torus but needs 7x7 without the twist).

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::{Error, Result};

pub type CellId = usize;

/// Axial neighbor offsets in rotational order: each entry is the previous one
/// turned by 60 degrees.
pub const HEX_DIRECTIONS: [(i64, i64); 6] = [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)];

/// Square neighbor offsets in rotational order (90 degree turns).
pub const SQUARE_DIRECTIONS: [(i64, i64); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Lattice {
    Hexagonal,
    Square,
}

impl Lattice {
    pub fn directions(self) -> &'static [(i64, i64)] {
        match self {
            Lattice::Hexagonal => &HEX_DIRECTIONS,
            Lattice::Square => &SQUARE_DIRECTIONS,
        }
    }

    pub fn degree(self) -> usize {
        self.directions().len()
    }

    /// Rotate an offset by one step of the lattice's turn angle.
    pub fn rotate(self, (q, r): (i64, i64)) -> (i64, i64) {
        match self {
            Lattice::Hexagonal => (-r, q + r),
            Lattice::Square => (-r, q),
        }
    }

    /// Hop distance of an offset on the unbounded lattice.
    pub fn norm(self, (q, r): (i64, i64)) -> i64 {
        match self {
            Lattice::Hexagonal => (q.abs() + r.abs() + (q + r).abs()) / 2,
            Lattice::Square => q.abs() + r.abs(),
        }
    }

    fn short_name(self) -> &'static str {
        match self {
            Lattice::Hexagonal => "hex",
            Lattice::Square => "sq",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    Bounded,
    Torus { twist: usize },
}

impl Boundary {
    pub const TORUS: Boundary = Boundary::Torus { twist: 0 };

    pub fn is_torus(self) -> bool {
        matches!(self, Boundary::Torus { .. })
    }
}

/// Finite lattice of small cells with precomputed adjacency.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellGrid {
    lattice: Lattice,
    rows: usize,
    cols: usize,
    boundary: Boundary,
    adjacency: Vec<Vec<CellId>>,
}

impl CellGrid {
    pub fn new(lattice: Lattice, rows: usize, cols: usize, boundary: Boundary) -> Result<Self> {
        if rows < 2 || cols < 2 {
            return Err(Error::InvalidGrid(format!(
                "{rows}x{cols}: both dimensions must be at least 2"
            )));
        }
        if let Boundary::Torus { twist } = boundary {
            if twist >= cols {
                return Err(Error::InvalidGrid(format!(
                    "twist {twist} must be smaller than the column count {cols}"
                )));
            }
        }
        let mut grid = CellGrid {
            lattice,
            rows,
            cols,
            boundary,
            adjacency: Vec::new(),
        };
        grid.adjacency = (0..rows * cols)
            .map(|c| {
                let mut ns: Vec<CellId> = lattice
                    .directions()
                    .iter()
                    .filter_map(|&d| grid.offset(c, d))
                    .collect();
                ns.sort_unstable();
                ns
            })
            .collect();

        if boundary.is_torus() {
            // Every torus cell is a translate of cell 0, so checking one cell
            // is enough to rule out self-loops and merged neighbors.
            let raw: Vec<CellId> = lattice
                .directions()
                .iter()
                .filter_map(|&d| grid.offset(0, d))
                .collect();
            let mut dedup = raw.clone();
            dedup.sort_unstable();
            dedup.dedup();
            if dedup.len() != lattice.degree() || dedup.contains(&0) {
                return Err(Error::InvalidGrid(format!(
                    "{} is too small: torus wrap merges neighboring cells",
                    grid.spec()
                )));
            }
        }
        Ok(grid)
    }

    pub fn hexagonal(rows: usize, cols: usize, boundary: Boundary) -> Result<Self> {
        Self::new(Lattice::Hexagonal, rows, cols, boundary)
    }

    pub fn square(rows: usize, cols: usize, boundary: Boundary) -> Result<Self> {
        Self::new(Lattice::Square, rows, cols, boundary)
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// Number of cells `K`.
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cells(&self) -> std::ops::Range<CellId> {
        0..self.len()
    }

    pub fn coords(&self, c: CellId) -> (i64, i64) {
        ((c % self.cols) as i64, (c / self.cols) as i64)
    }

    pub fn cell_at(&self, q: i64, r: i64) -> Option<CellId> {
        if (0..self.cols as i64).contains(&q) && (0..self.rows as i64).contains(&r) {
            Some(r as usize * self.cols + q as usize)
        } else {
            None
        }
    }

    /// Generators of the wrap lattice (empty for bounded grids).
    pub fn wrap_vectors(&self) -> Vec<(i64, i64)> {
        match self.boundary {
            Boundary::Bounded => Vec::new(),
            Boundary::Torus { twist } => {
                vec![(self.cols as i64, 0), (twist as i64, self.rows as i64)]
            }
        }
    }

    /// Cell reached from `c` by a unit lattice offset, if any.
    fn offset(&self, c: CellId, (dq, dr): (i64, i64)) -> Option<CellId> {
        let (q, r) = self.coords(c);
        let (mut q2, mut r2) = (q + dq, r + dr);
        match self.boundary {
            Boundary::Bounded => self.cell_at(q2, r2),
            Boundary::Torus { twist } => {
                let rows = self.rows as i64;
                while r2 >= rows {
                    r2 -= rows;
                    q2 -= twist as i64;
                }
                while r2 < 0 {
                    r2 += rows;
                    q2 += twist as i64;
                }
                self.cell_at(q2.rem_euclid(self.cols as i64), r2)
            }
        }
    }

    fn check(&self, c: CellId) -> Result<()> {
        if c < self.len() {
            Ok(())
        } else {
            Err(Error::InvalidCell {
                cell: c,
                cells: self.len(),
            })
        }
    }

    /// Cells adjacent to `c`, ascending.
    pub fn neighbors(&self, c: CellId) -> Result<&[CellId]> {
        self.check(c)?;
        Ok(&self.adjacency[c])
    }

    pub fn is_adjacent(&self, a: CellId, b: CellId) -> bool {
        a < self.len() && self.adjacency[a].binary_search(&b).is_ok()
    }

    /// Hop distances from `c` to every cell (breadth-first search).
    pub fn distances_from(&self, c: CellId) -> Result<Vec<usize>> {
        self.check(c)?;
        let mut dist = vec![usize::MAX; self.len()];
        let mut queue = VecDeque::from([c]);
        dist[c] = 0;
        while let Some(x) = queue.pop_front() {
            for &y in &self.adjacency[x] {
                if dist[y] == usize::MAX {
                    dist[y] = dist[x] + 1;
                    queue.push_back(y);
                }
            }
        }
        Ok(dist)
    }

    /// Length of the shortest adjacency path between `a` and `b`.
    pub fn graph_distance(&self, a: CellId, b: CellId) -> Result<usize> {
        self.check(b)?;
        Ok(self.distances_from(a)?[b])
    }

    /// The grid in `<lattice>:<rows>x<cols>:<boundary>` notation.
    pub fn spec(&self) -> String {
        let boundary = match self.boundary {
            Boundary::Bounded => "bounded".to_string(),
            Boundary::Torus { twist: 0 } => "torus".to_string(),
            Boundary::Torus { twist } => format!("torus:twist={twist}"),
        };
        format!(
            "{}:{}x{}:{}",
            self.lattice.short_name(),
            self.rows,
            self.cols,
            boundary
        )
    }
}

impl fmt::Display for CellGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.spec())
    }
}

/// Parsed `<lattice>:<rows>x<cols>[:torus|:bounded][:twist=<s>]` string. The
/// boundary is optional so callers can apply their own default.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    pub lattice: Lattice,
    pub rows: usize,
    pub cols: usize,
    pub boundary: Option<Boundary>,
}

impl GridSpec {
    pub fn build(&self, default_boundary: Boundary) -> Result<CellGrid> {
        CellGrid::new(
            self.lattice,
            self.rows,
            self.cols,
            self.boundary.unwrap_or(default_boundary),
        )
    }
}

impl FromStr for GridSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let fail = |reason: &str| Error::GridSpec {
            spec: s.to_string(),
            reason: reason.to_string(),
        };
        let parts: Vec<&str> = s.trim().split(':').collect();
        if parts.len() < 2 || parts.len() > 4 {
            return Err(fail("expected <lattice>:<rows>x<cols>[:torus|:bounded]"));
        }
        let lattice = match parts[0].to_ascii_lowercase().as_str() {
            "hex" | "hexagonal" => Lattice::Hexagonal,
            "sq" | "square" => Lattice::Square,
            _ => return Err(fail("lattice must be `hex` or `sq`")),
        };
        let (rows, cols) = parts[1]
            .split_once(['x', 'X'])
            .ok_or_else(|| fail("dimensions must look like 6x4"))?;
        let rows: usize = rows.parse().map_err(|_| fail("bad row count"))?;
        let cols: usize = cols.parse().map_err(|_| fail("bad column count"))?;

        let mut boundary = None;
        let mut twist = None;
        for part in &parts[2..] {
            match *part {
                "torus" => boundary = Some(Boundary::TORUS),
                "bounded" => boundary = Some(Boundary::Bounded),
                p if p.starts_with("twist=") => {
                    twist = Some(p["twist=".len()..].parse().map_err(|_| fail("bad twist"))?)
                }
                _ => return Err(fail("boundary must be `torus` or `bounded`")),
            }
        }
        let boundary = match (boundary, twist) {
            (Some(Boundary::Bounded), Some(_)) => {
                return Err(fail("twist only applies to a torus"));
            }
            (Some(Boundary::Torus { .. }), Some(t)) | (None, Some(t)) => Some(Boundary::Torus { twist: t }),
            (b, None) => b,
        };
        Ok(GridSpec {
            lattice,
            rows,
            cols,
            boundary,
        })
    }
}

/// Ordered cells a user visits during one download session.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MobilityPath {
    pub cells: Vec<CellId>,
}

impl MobilityPath {
    pub fn new(cells: Vec<CellId>) -> Self {
        MobilityPath { cells }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Checks adjacency of consecutive cells and that no cell repeats.
    pub fn validate(&self, grid: &CellGrid) -> Result<()> {
        if self.cells.is_empty() {
            return Err(Error::InvalidPath("empty path".into()));
        }
        for &c in &self.cells {
            grid.check(c)?;
        }
        for w in self.cells.windows(2) {
            if !grid.is_adjacent(w[0], w[1]) {
                return Err(Error::InvalidPath(format!(
                    "cells {} and {} are not adjacent",
                    w[0], w[1]
                )));
            }
        }
        let mut seen = vec![false; grid.len()];
        for &c in &self.cells {
            if std::mem::replace(&mut seen[c], true) {
                return Err(Error::InvalidPath(format!("cell {c} visited twice")));
            }
        }
        Ok(())
    }
}

/// Depth-first stream of self-avoiding walks of a fixed number of cells.
pub struct PathIter<'a> {
    grid: &'a CellGrid,
    length: usize,
    starts: std::ops::Range<CellId>,
    // (cell, index of the next neighbor to try)
    stack: Vec<(CellId, usize)>,
    on_path: Vec<bool>,
}

impl<'a> PathIter<'a> {
    fn new(grid: &'a CellGrid, length: usize, starts: std::ops::Range<CellId>) -> Self {
        PathIter {
            grid,
            length,
            starts,
            stack: Vec::with_capacity(length),
            on_path: vec![false; grid.len()],
        }
    }

    fn current(&self) -> MobilityPath {
        MobilityPath::new(self.stack.iter().map(|&(c, _)| c).collect())
    }
}

impl Iterator for PathIter<'_> {
    type Item = MobilityPath;

    fn next(&mut self) -> Option<MobilityPath> {
        if self.length == 0 || self.length > self.grid.len() {
            return None;
        }
        loop {
            let Some(top) = self.stack.last_mut() else {
                let start = self.starts.next()?;
                self.stack.push((start, 0));
                self.on_path[start] = true;
                if self.length == 1 {
                    let path = self.current();
                    self.on_path[start] = false;
                    self.stack.pop();
                    return Some(path);
                }
                continue;
            };
            let (cell, next) = *top;
            let ns = &self.grid.adjacency[cell];
            if next >= ns.len() {
                self.on_path[cell] = false;
                self.stack.pop();
                continue;
            }
            top.1 += 1;
            let n = ns[next];
            if self.on_path[n] {
                continue;
            }
            if self.stack.len() + 1 == self.length {
                let mut path = self.current();
                path.cells.push(n);
                return Some(path);
            }
            self.on_path[n] = true;
            self.stack.push((n, 0));
        }
    }
}

/// Every self-avoiding walk of exactly `length` cells, each ordered sequence
/// once. Empty when `length` is zero or exceeds the cell count.
pub fn enumerate_paths(grid: &CellGrid, length: usize) -> PathIter<'_> {
    PathIter::new(grid, length, grid.cells())
}

/// Self-avoiding walks of `length` cells that start at `start`.
pub fn paths_from(grid: &CellGrid, start: CellId, length: usize) -> PathIter<'_> {
    let end = (start + 1).min(grid.len());
    PathIter::new(grid, length, start.min(end)..end)
}

/// Draws one mobility path per cell such that at every slot the users occupy
/// distinct cells (one user per SBS) and every path is self-avoiding. User
/// `u` starts at a uniformly random cell; the returned vector is indexed by
/// user.
pub fn random_full_occupancy_paths<R: Rng + ?Sized>(
    grid: &CellGrid,
    length: usize,
    rng: &mut R,
) -> Result<Vec<MobilityPath>> {
    const RESTARTS: usize = 200;
    const NODE_BUDGET: usize = 200_000;
    if length == 0 || length > grid.len() {
        return Err(Error::InvalidParameter(format!(
            "path length {length} must be in 1..={}",
            grid.len()
        )));
    }
    let k = grid.len();
    'restart: for _ in 0..RESTARTS {
        let mut start: Vec<CellId> = grid.cells().collect();
        start.shuffle(rng);
        let mut paths: Vec<Vec<CellId>> = start.iter().map(|&c| vec![c]).collect();
        for _ in 1..length {
            // user currently at each cell
            let mut at = vec![usize::MAX; k];
            for (u, p) in paths.iter().enumerate() {
                at[*p.last().unwrap()] = u;
            }
            let mut order: Vec<CellId> = grid.cells().collect();
            order.shuffle(rng);
            let candidates: Vec<Vec<CellId>> = order
                .iter()
                .map(|&c| {
                    let visited = &paths[at[c]];
                    let mut ns: Vec<CellId> = grid.adjacency[c]
                        .iter()
                        .copied()
                        .filter(|n| !visited.contains(n))
                        .collect();
                    ns.shuffle(rng);
                    ns
                })
                .collect();
            let mut taken = vec![false; k];
            let mut choice = vec![usize::MAX; k];
            let mut budget = NODE_BUDGET;
            if !assign_moves(&candidates, 0, &mut taken, &mut choice, &mut budget) {
                continue 'restart;
            }
            for (i, &c) in order.iter().enumerate() {
                paths[at[c]].push(candidates[i][choice[i]]);
            }
        }
        return Ok(paths.into_iter().map(MobilityPath::new).collect());
    }
    Err(Error::InvalidParameter(format!(
        "could not draw full-occupancy paths of length {length} on {grid}"
    )))
}

fn assign_moves(
    candidates: &[Vec<CellId>],
    i: usize,
    taken: &mut [bool],
    choice: &mut [usize],
    budget: &mut usize,
) -> bool {
    if i == candidates.len() {
        return true;
    }
    if *budget == 0 {
        return false;
    }
    *budget -= 1;
    for (j, &n) in candidates[i].iter().enumerate() {
        if !taken[n] {
            taken[n] = true;
            choice[i] = j;
            if assign_moves(candidates, i + 1, taken, choice, budget) {
                return true;
            }
            taken[n] = false;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn brute_force_saw_count(grid: &CellGrid, length: usize) -> usize {
        fn rec(grid: &CellGrid, path: &mut Vec<CellId>, length: usize) -> usize {
            if path.len() == length {
                return 1;
            }
            let last = *path.last().unwrap();
            let mut total = 0;
            for n in grid.cells() {
                if grid.is_adjacent(last, n) && !path.contains(&n) {
                    path.push(n);
                    total += rec(grid, path, length);
                    path.pop();
                }
            }
            total
        }
        grid.cells().map(|c| rec(grid, &mut vec![c], length)).sum()
    }

    #[test]
    fn square_torus_is_four_regular() {
        let g = CellGrid::square(6, 4, Boundary::TORUS).unwrap();
        for c in g.cells() {
            assert_eq!(g.neighbors(c).unwrap().len(), 4);
        }
    }

    #[test]
    fn square_bounded_corner_has_two_neighbors() {
        let g = CellGrid::square(6, 4, Boundary::Bounded).unwrap();
        assert_eq!(g.neighbors(0).unwrap(), &[1, 4]);
        for c in g.cells() {
            let d = g.neighbors(c).unwrap().len();
            assert!((2..=4).contains(&d));
        }
    }

    #[test]
    fn hex_torus_is_six_regular() {
        for (rows, cols, twist) in [(3, 3, 0), (6, 6, 0), (4, 6, 1), (3, 7, 6)] {
            let g = CellGrid::hexagonal(rows, cols, Boundary::Torus { twist }).unwrap();
            for c in g.cells() {
                assert_eq!(g.neighbors(c).unwrap().len(), 6, "{g} cell {c}");
            }
        }
    }

    #[test]
    fn hex_bounded_degrees() {
        let g = CellGrid::hexagonal(4, 5, Boundary::Bounded).unwrap();
        assert_eq!(g.neighbors(0).unwrap().len(), 2);
        for c in g.cells() {
            let d = g.neighbors(c).unwrap().len();
            assert!((2..=6).contains(&d));
        }
    }

    #[test]
    fn degenerate_torus_rejected() {
        assert!(CellGrid::square(2, 4, Boundary::TORUS).is_err());
        assert!(CellGrid::hexagonal(2, 3, Boundary::Torus { twist: 2 }).is_err());
        assert!(CellGrid::square(1, 4, Boundary::Bounded).is_err());
    }

    #[test]
    fn invalid_cell_is_domain_error() {
        let g = CellGrid::square(3, 3, Boundary::Bounded).unwrap();
        assert_eq!(g.neighbors(9), Err(Error::InvalidCell { cell: 9, cells: 9 }));
        assert!(g.graph_distance(0, 99).is_err());
    }

    #[test]
    fn distances() {
        let g = CellGrid::square(6, 4, Boundary::Bounded).unwrap();
        assert_eq!(g.graph_distance(3, 3).unwrap(), 0);
        assert_eq!(g.graph_distance(0, 1).unwrap(), 1);
        // (row 0, col 0) to (row 5, col 3)
        assert_eq!(g.graph_distance(0, 5 * 4 + 3).unwrap(), 8);
    }

    #[test]
    fn path_counts() {
        let g = CellGrid::square(4, 4, Boundary::TORUS).unwrap();
        assert_eq!(enumerate_paths(&g, 1).count(), 16);
        assert_eq!(enumerate_paths(&g, 2).count(), 64);
        assert_eq!(enumerate_paths(&g, 2).count(), brute_force_saw_count(&g, 2));
        assert_eq!(enumerate_paths(&g, 17).count(), 0);
        assert_eq!(enumerate_paths(&g, 0).count(), 0);

        let h = CellGrid::hexagonal(6, 6, Boundary::TORUS).unwrap();
        assert_eq!(enumerate_paths(&h, 3).count(), brute_force_saw_count(&h, 3));
        // 36 cells x 6 x 5
        assert_eq!(enumerate_paths(&h, 3).count(), 1080);

        let b = CellGrid::square(3, 4, Boundary::Bounded).unwrap();
        for t in 1..=5 {
            assert_eq!(enumerate_paths(&b, t).count(), brute_force_saw_count(&b, t));
        }
    }

    #[test]
    fn paths_from_single_start() {
        let g = CellGrid::hexagonal(6, 6, Boundary::TORUS).unwrap();
        assert!(paths_from(&g, 5, 3).all(|p| p.cells[0] == 5));
        assert_eq!(paths_from(&g, 5, 3).count(), 30);
    }

    #[test]
    fn grid_spec_parsing() {
        let s: GridSpec = "hex:6x4:torus".parse().unwrap();
        assert_eq!(s.lattice, Lattice::Hexagonal);
        assert_eq!((s.rows, s.cols), (6, 4));
        assert_eq!(s.boundary, Some(Boundary::TORUS));
        let s: GridSpec = "sq:6x4".parse().unwrap();
        assert_eq!(s.boundary, None);
        assert_eq!(s.build(Boundary::Bounded).unwrap().boundary(), Boundary::Bounded);
        let s: GridSpec = "hex:4x6:torus:twist=1".parse().unwrap();
        assert_eq!(s.boundary, Some(Boundary::Torus { twist: 1 }));
        let g = s.build(Boundary::Bounded).unwrap();
        assert_eq!(g.spec(), "hex:4x6:torus:twist=1");
        assert_eq!(g.spec().parse::<GridSpec>().unwrap(), s);
        for bad in [
            "tri:3x3",
            "hex:3",
            "hex:3x3:moebius",
            "hex:ax3",
            "sq:3x3:bounded:twist=1",
        ] {
            assert!(bad.parse::<GridSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn validate_path() {
        let g = CellGrid::square(4, 4, Boundary::Bounded).unwrap();
        assert!(MobilityPath::new(vec![0, 1, 5]).validate(&g).is_ok());
        assert!(MobilityPath::new(vec![0, 5]).validate(&g).is_err());
        assert!(MobilityPath::new(vec![0, 1, 0]).validate(&g).is_err());
        assert!(MobilityPath::new(vec![]).validate(&g).is_err());
    }

    #[test]
    fn full_occupancy_paths_are_permutations() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (g, t) in [
            (CellGrid::hexagonal(2, 3, Boundary::Bounded).unwrap(), 2),
            (
                CellGrid::hexagonal(4, 6, Boundary::Torus { twist: 1 }).unwrap(),
                2,
            ),
            (CellGrid::square(4, 4, Boundary::TORUS).unwrap(), 4),
        ] {
            let paths = random_full_occupancy_paths(&g, t, &mut rng).unwrap();
            assert_eq!(paths.len(), g.len());
            for p in &paths {
                assert_eq!(p.len(), t);
                p.validate(&g).unwrap();
            }
            for slot in 0..t {
                let mut cells: Vec<_> = paths.iter().map(|p| p.cells[slot]).collect();
                cells.sort_unstable();
                assert_eq!(cells, g.cells().collect::<Vec<_>>());
            }
        }
    }
}
