//! Random-mobility simulation of the offloading rate
//! `σ = served fragments / (Q_s K T)`.
//!
//! Users start with `round(Q_s λ)` per cell and perform a lazy random walk.
//! In each of the `T` slots every SBS serves up to `Q_s` of its residents.
//! In strict mode a user can only take a fragment from a color it has not
//! used yet; relaxed mode drops that constraint.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coloring::{require_valid, Coloring};
use crate::par::map_indexed;
use crate::stats::{pairwise_sum, Estimate};
use crate::topology::{CellGrid, CellId};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundaryRule {
    /// Moves that would leave the grid become stays.
    #[default]
    Lazy,
    /// Probabilities of the valid outcomes are rescaled to sum to one.
    Renormalize,
}

/// Stay with `stay_prob`, otherwise move to each lattice neighbor with
/// probability `(1 - stay_prob) / degree`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobilityModel {
    pub stay_prob: f64,
    pub boundary: BoundaryRule,
}

impl Default for MobilityModel {
    fn default() -> Self {
        MobilityModel {
            stay_prob: 0.2,
            boundary: BoundaryRule::Lazy,
        }
    }
}

impl MobilityModel {
    /// Outcome distribution from `cell`; the stay outcome comes first.
    pub fn transitions(&self, grid: &CellGrid, cell: CellId) -> Result<Vec<(CellId, f64)>> {
        let neighbors = grid.neighbors(cell)?;
        let move_prob = (1.0 - self.stay_prob) / grid.lattice().degree() as f64;
        let mut out = Vec::with_capacity(neighbors.len() + 1);
        out.push((cell, self.stay_prob));
        out.extend(neighbors.iter().map(|&n| (n, move_prob)));
        let total: f64 = out.iter().map(|(_, p)| p).sum();
        match self.boundary {
            BoundaryRule::Lazy => out[0].1 += 1.0 - total,
            BoundaryRule::Renormalize => out.iter_mut().for_each(|(_, p)| *p /= total),
        }
        Ok(out)
    }

    fn check(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.stay_prob) {
            return Err(Error::InvalidParameter(format!(
                "stay probability {} outside [0, 1]",
                self.stay_prob
            )));
        }
        Ok(())
    }
}

/// Per-cell cumulative transition tables.
#[derive(Debug, Clone)]
struct TransitionTable {
    rows: Vec<Vec<(CellId, f64)>>,
}

impl TransitionTable {
    fn new(grid: &CellGrid, model: &MobilityModel) -> Result<Self> {
        model.check()?;
        let rows = grid
            .cells()
            .map(|c| {
                let mut acc = 0.0;
                Ok(model
                    .transitions(grid, c)?
                    .into_iter()
                    .map(|(n, p)| {
                        acc += p;
                        (n, acc)
                    })
                    .collect())
            })
            .collect::<Result<_>>()?;
        Ok(TransitionTable { rows })
    }

    fn step<R: Rng + ?Sized>(&self, cell: CellId, rng: &mut R) -> CellId {
        let row = &self.rows[cell];
        let u: f64 = rng.random();
        row.iter()
            .find(|&&(_, acc)| u < acc)
            .map_or(row[row.len() - 1].0, |&(n, _)| n)
    }
}

/// Moves every user one step according to `model`.
pub fn step_users<R: Rng + ?Sized>(
    grid: &CellGrid,
    positions: &[CellId],
    model: &MobilityModel,
    rng: &mut R,
) -> Result<Vec<CellId>> {
    let table = TransitionTable::new(grid, model)?;
    positions
        .iter()
        .map(|&c| {
            if c >= grid.len() {
                Err(Error::InvalidCell {
                    cell: c,
                    cells: grid.len(),
                })
            } else {
                Ok(table.step(c, rng))
            }
        })
        .collect()
}

/// State of one download session.
#[derive(Debug, Clone)]
pub struct Session<'a> {
    coloring: &'a Coloring,
    capacity: usize,
    path_length: usize,
    relaxed: bool,
    positions: Vec<CellId>,
    used_colors: Vec<u64>,
    fragments: Vec<usize>,
    served: usize,
}

impl<'a> Session<'a> {
    pub fn new(
        coloring: &'a Coloring,
        capacity: usize,
        path_length: usize,
        relaxed: bool,
        positions: Vec<CellId>,
    ) -> Result<Self> {
        if coloring.num_colors() > 64 {
            return Err(Error::InvalidParameter("at most 64 colors are supported".into()));
        }
        if let Some(&c) = positions.iter().find(|&&c| c >= coloring.num_cells()) {
            return Err(Error::InvalidCell {
                cell: c,
                cells: coloring.num_cells(),
            });
        }
        let users = positions.len();
        Ok(Session {
            coloring,
            capacity,
            path_length,
            relaxed,
            positions,
            used_colors: vec![0; users],
            fragments: vec![0; users],
            served: 0,
        })
    }

    pub fn positions(&self) -> &[CellId] {
        &self.positions
    }

    pub fn set_positions(&mut self, positions: Vec<CellId>) {
        assert_eq!(positions.len(), self.positions.len(), "user count is fixed");
        self.positions = positions;
    }

    /// Fragments collected by each user.
    pub fn fragments(&self) -> &[usize] {
        &self.fragments
    }

    /// Colors each user has taken a fragment from, as bitmasks.
    pub fn used_colors(&self) -> &[u64] {
        &self.used_colors
    }

    pub fn served(&self) -> usize {
        self.served
    }

    fn eligible(&self, user: usize) -> bool {
        if self.fragments[user] >= self.path_length {
            return false;
        }
        let bit = 1u64 << self.coloring.color(self.positions[user]);
        self.relaxed || self.used_colors[user] & bit == 0
    }

    /// One service slot. Each SBS picks up to `Q_s` eligible residents
    /// uniformly at random. Returns the fragments served in this slot.
    pub fn serve<R: Rng + ?Sized>(&mut self, rng: &mut R) -> usize {
        let mut residents: Vec<Vec<usize>> = vec![Vec::new(); self.coloring.num_cells()];
        for u in 0..self.positions.len() {
            if self.eligible(u) {
                residents[self.positions[u]].push(u);
            }
        }
        let mut count = 0;
        for (cell, mut users) in residents.into_iter().enumerate() {
            if users.len() > self.capacity {
                users.shuffle(rng);
                users.truncate(self.capacity);
            }
            let bit = 1u64 << self.coloring.color(cell);
            for u in users {
                self.used_colors[u] |= bit;
                self.fragments[u] += 1;
                count += 1;
            }
        }
        self.served += count;
        count
    }
}

/// Offloading simulation setup.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub grid: CellGrid,
    pub path_length: usize,
    /// `Q_s`, users an SBS serves per slot.
    pub capacity: usize,
    /// `λ`; each cell starts with `round(Q_s λ)` users.
    pub density: f64,
    pub trials: usize,
    pub seed: u64,
    pub relaxed: bool,
    pub model: MobilityModel,
}

impl SimConfig {
    pub fn users_per_cell(&self) -> usize {
        (self.capacity as f64 * self.density).round() as usize
    }

    fn check(&self) -> Result<()> {
        if self.capacity == 0 {
            return Err(Error::InvalidParameter("Q_s must be at least 1".into()));
        }
        if !(self.density > 0.0 && self.density.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lambda = {} must be positive",
                self.density
            )));
        }
        if self.path_length == 0 {
            return Err(Error::InvalidParameter("T must be at least 1".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OffloadResult {
    pub sigma: f64,
    pub stderr: f64,
    /// Mean fragments served per session.
    pub served_mean: f64,
    pub users_per_cell: usize,
    pub trials: usize,
    pub relaxed: bool,
}

/// Runs one session; mobility and service draw from separate streams so
/// strict and relaxed runs with the same seed see the same trajectories.
fn run_trial(config: &SimConfig, coloring: &Coloring, table: &TransitionTable, trial: usize) -> usize {
    let mut walk = ChaCha8Rng::seed_from_u64(config.seed);
    walk.set_stream(2 * trial as u64);
    let mut service = ChaCha8Rng::seed_from_u64(config.seed);
    service.set_stream(2 * trial as u64 + 1);

    let per_cell = config.users_per_cell();
    let positions: Vec<CellId> = config
        .grid
        .cells()
        .flat_map(|c| std::iter::repeat_n(c, per_cell))
        .collect();
    let mut session = Session::new(
        coloring,
        config.capacity,
        config.path_length,
        config.relaxed,
        positions,
    )
    .expect("validated by caller");
    for slot in 0..config.path_length {
        session.serve(&mut service);
        if slot + 1 < config.path_length {
            let next = session
                .positions()
                .iter()
                .map(|&c| table.step(c, &mut walk))
                .collect();
            session.set_positions(next);
        }
    }
    session.served()
}

pub fn simulate_offloading(config: &SimConfig, coloring: &Coloring) -> Result<OffloadResult> {
    config.check()?;
    if coloring.num_cells() != config.grid.len() {
        return Err(Error::InvalidParameter("coloring does not cover the grid".into()));
    }
    require_valid(&config.grid, coloring, config.path_length)?;
    if coloring.num_colors() > 64 {
        return Err(Error::InvalidParameter("at most 64 colors are supported".into()));
    }
    let table = TransitionTable::new(&config.grid, &config.model)?;
    let served = map_indexed(config.trials, |trial| {
        run_trial(config, coloring, &table, trial) as f64
    });
    let full = (config.capacity * config.grid.len() * config.path_length) as f64;
    let sigmas: Vec<f64> = served.iter().map(|s| s / full).collect();
    let estimate = Estimate::from_samples(&sigmas);
    Ok(OffloadResult {
        sigma: estimate.mean,
        stderr: estimate.stderr,
        served_mean: pairwise_sum(&served) / served.len() as f64,
        users_per_cell: config.users_per_cell(),
        trials: config.trials,
        relaxed: config.relaxed,
    })
}

/// One density point with both service variants under the same seed.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityRow {
    pub density: f64,
    pub strict: OffloadResult,
    pub relaxed: OffloadResult,
}

pub fn sweep_density(base: &SimConfig, densities: &[f64], coloring: &Coloring) -> Result<Vec<DensityRow>> {
    densities
        .iter()
        .map(|&density| {
            let run = |relaxed| {
                simulate_offloading(
                    &SimConfig {
                        density,
                        relaxed,
                        ..base.clone()
                    },
                    coloring,
                )
            };
            Ok(DensityRow {
                density,
                strict: run(false)?,
                relaxed: run(true)?,
            })
        })
        .collect()
}

/// Parses `start:stop:step` (inclusive) or a comma-separated list.
pub fn parse_density_range(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidParameter(format!("bad density list `{spec}`"));
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() == 3 {
        let v: Vec<f64> = parts
            .iter()
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let (start, stop, step) = (v[0], v[1], v[2]);
        if !step.is_finite() || step <= 0.0 || start.is_nan() || stop < start {
            return Err(bad());
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        return Ok((0..=n).map(|i| start + i as f64 * step).collect());
    }
    spec.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coloring::color_cells;
    use crate::topology::Boundary;

    fn grid() -> CellGrid {
        CellGrid::square(4, 6, Boundary::Bounded).unwrap()
    }

    #[test]
    fn transitions_sum_to_one() {
        let g = grid();
        for rule in [BoundaryRule::Lazy, BoundaryRule::Renormalize] {
            let m = MobilityModel {
                stay_prob: 0.2,
                boundary: rule,
            };
            for c in g.cells() {
                let total: f64 = m.transitions(&g, c).unwrap().iter().map(|(_, p)| p).sum();
                assert!((total - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn corner_and_interior_probabilities() {
        let g = grid();
        let m = MobilityModel::default();
        let corner = m.transitions(&g, 0).unwrap();
        assert_eq!(corner.len(), 3);
        assert!((corner[0].1 - 0.6).abs() < 1e-12);
        assert!(corner[1..].iter().all(|(_, p)| (p - 0.2).abs() < 1e-12));
        let interior = m.transitions(&g, g.cell_at(2, 1).unwrap()).unwrap();
        assert_eq!(interior.len(), 5);
        assert!(interior.iter().all(|(_, p)| (p - 0.2).abs() < 1e-12));
    }

    #[test]
    fn frozen_model_keeps_positions() {
        let g = grid();
        let m = MobilityModel {
            stay_prob: 1.0,
            boundary: BoundaryRule::Lazy,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let pos: Vec<CellId> = g.cells().collect();
        assert_eq!(step_users(&g, &pos, &m, &mut rng).unwrap(), pos);
    }

    #[test]
    fn lone_user_collects_one_fragment_per_color() {
        let g = grid();
        let coloring = color_cells(&g, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let path = [0, 1, 2, 3];
        let mut s = Session::new(&coloring, 20, 4, false, vec![path[0]]).unwrap();
        for &c in &path {
            s.set_positions(vec![c]);
            s.serve(&mut rng);
        }
        assert_eq!(s.served(), 4);
        // staying put: the second slot at the same color is refused
        let mut s = Session::new(&coloring, 20, 4, false, vec![0]).unwrap();
        s.serve(&mut rng);
        assert_eq!(s.serve(&mut rng), 0);
        let mut s = Session::new(&coloring, 20, 4, true, vec![0]).unwrap();
        s.serve(&mut rng);
        assert_eq!(s.serve(&mut rng), 1);
    }

    #[test]
    fn density_ranges() {
        let v = parse_density_range("1.25:2.25:0.25").unwrap();
        assert_eq!(v.len(), 5);
        assert!((v[4] - 2.25).abs() < 1e-12);
        assert_eq!(parse_density_range("1,2.5").unwrap(), vec![1.0, 2.5]);
        assert!(parse_density_range("2:1:0.5").is_err());
    }
}
