use std::time::Instant;

use clap::{Args, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use mobicache::caching::{mobility_place_shared, UserSession};
use mobicache::coloring::{brute_force_min_colors, color_cells, min_colors, verify_coloring};
use mobicache::mds::{FileBlob, MdsCode};
use mobicache::mobility_sim::{sweep_density, MobilityModel, SimConfig};
use mobicache::popularity::{expected_rate_monte_carlo, optimize_cache_plan, zipf_profile, SystemParams};
use mobicache::rates::{rate_mobility_groups, table1, table2};
use mobicache::topology::{random_full_occupancy_paths, Boundary, CellGrid, Lattice};

use crate::error::CliError;
use crate::output::{csv_table, Report};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Scale {
    Smoke,
    Full,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "smoke")]
    pub scale: Scale,
    /// Tamper with one coloring to prove the checker reports it.
    #[arg(long)]
    pub inject_fault: bool,
}

type Check = Result<String, String>;
type NamedCheck<'a> = (&'static str, Box<dyn Fn() -> Check + 'a>);

fn q(a: usize, b: usize) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

fn torus(l: Lattice, rows: usize, cols: usize, twist: usize) -> CellGrid {
    CellGrid::new(l, rows, cols, Boundary::Torus { twist }).expect("fixed grid")
}

fn tables() -> Check {
    let t1 = table1().map_err(|e| e.to_string())?;
    let t2 = table2().map_err(|e| e.to_string())?;
    let computed = t1.iter().chain(&t2).filter(|r| r.rate.is_some()).count();
    if t1.len() != 10 || t2.len() != 4 || computed != 13 {
        return Err(format!(
            "rows: table1 {}, table2 {}, computed {computed}",
            t1.len(),
            t2.len()
        ));
    }
    Ok(format!("{computed} rows computed"))
}

fn min_colors_agree(scale: Scale) -> Check {
    use Lattice::*;
    let mut cases = vec![
        (Hexagonal, 2, torus(Hexagonal, 3, 3, 0)),
        (Square, 2, torus(Square, 4, 4, 0)),
        (Hexagonal, 3, torus(Hexagonal, 3, 7, 6)),
    ];
    if scale == Scale::Full {
        cases.extend([
            (Hexagonal, 2, torus(Hexagonal, 3, 6, 0)),
            (Hexagonal, 3, torus(Hexagonal, 4, 7, 1)),
            (Square, 3, torus(Square, 5, 5, 0)),
            (Square, 4, torus(Square, 4, 4, 0)),
        ]);
    }
    for (lattice, t, grid) in &cases {
        let formula = min_colors(*lattice, *t).map_err(|e| e.to_string())?;
        let exact = brute_force_min_colors(grid, *t).map_err(|e| e.to_string())?;
        if exact != formula {
            return Err(format!(
                "{} T={t}: exhaustive {exact}, formula {formula}",
                grid.spec()
            ));
        }
    }
    Ok(format!("{} tori agree", cases.len()))
}

fn colorings_valid(scale: Scale, inject_fault: bool) -> Check {
    use Lattice::*;
    let mut cases = vec![
        (2, torus(Hexagonal, 3, 3, 0)),
        (2, torus(Square, 4, 4, 0)),
        (3, torus(Hexagonal, 7, 7, 0)),
        (3, torus(Square, 5, 5, 0)),
    ];
    if scale == Scale::Full {
        cases.extend([
            (4, torus(Hexagonal, 6, 6, 0)),
            (4, torus(Square, 4, 4, 0)),
            (5, torus(Hexagonal, 19, 19, 0)),
            (5, torus(Square, 13, 13, 0)),
        ]);
    }
    for (i, (t, grid)) in cases.iter().enumerate() {
        let mut coloring = color_cells(grid, *t).map_err(|e| e.to_string())?;
        if inject_fault && i == 0 {
            let neighbor = grid.neighbors(0).map_err(|e| e.to_string())?[0];
            coloring = coloring
                .recolored(0, coloring.color(neighbor))
                .map_err(|e| e.to_string())?;
        }
        let v = verify_coloring(grid, &coloring, *t);
        if let Some(p) = v.counterexample {
            return Err(format!(
                "verify_coloring on {} T={t}: counterexample path {:?}",
                grid.spec(),
                p.cells
            ));
        }
    }
    Ok(format!("{} colorings valid", cases.len()))
}

fn mds_round_trip(scale: Scale) -> Check {
    let max_l = if scale == Scale::Full { 8 } else { 5 };
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut decodes = 0;
    for l in 1..=max_l {
        for t in 1..=l {
            let code = MdsCode::new(t, l).map_err(|e| e.to_string())?;
            let len = rng.random_range(1..200);
            let file = FileBlob::new(0, (0..len).map(|_| rng.random()).collect());
            let frags = code.encode(&file).map_err(|e| e.to_string())?;
            // every t-subset, enumerated as bitmasks
            for mask in 0u32..(1 << l) {
                if mask.count_ones() as usize != t {
                    continue;
                }
                let pick: Vec<_> = (0..l)
                    .filter(|i| mask >> i & 1 == 1)
                    .map(|i| frags[i].clone())
                    .collect();
                if code.decode(&pick).map_err(|e| e.to_string())? != file {
                    return Err(format!("({l},{t}) subset {mask:#b} decoded wrong bytes"));
                }
                decodes += 1;
            }
        }
    }
    Ok(format!("{decodes} subset decodes"))
}

/// Full-occupancy round trip; returns the number of users checked.
fn round_trip(grid: &CellGrid, files: usize, memory: &BigRational, seed: u64) -> Result<usize, String> {
    let coloring = color_cells(grid, 2).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = rng.random_range(50..400);
    let library: Vec<FileBlob> = (0..files)
        .map(|i| FileBlob::new(i, (0..len).map(|_| rng.random()).collect()))
        .collect();
    let shared =
        mobility_place_shared(grid, &coloring, files, memory, 2, &library).map_err(|e| e.to_string())?;
    if !shared.within_capacity() {
        return Err(format!("{}: cache budget exceeded", grid.spec()));
    }
    let paths = random_full_occupancy_paths(grid, 2, &mut rng).map_err(|e| e.to_string())?;
    let mut demands: Vec<usize> = (0..files).collect();
    demands.shuffle(&mut rng);
    let sessions: Vec<UserSession> = paths
        .into_iter()
        .enumerate()
        .map(|(user, path)| UserSession {
            user,
            demand: demands[user % files],
            path,
        })
        .collect();
    let messages = (0..2)
        .map(|slot| shared.deliver(&sessions, slot))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    for s in &sessions {
        let got = shared
            .decode(s, &messages)
            .map_err(|e| format!("user {}: {e}", s.user))?;
        if got != library[s.demand] {
            return Err(format!(
                "{} seed {seed}: user {} decoded wrong bytes",
                grid.spec(),
                s.user
            ));
        }
    }
    let measured = shared.normalized_load(&messages);
    let analytic =
        rate_mobility_groups(&coloring.group_sizes(), memory, files, 2).map_err(|e| e.to_string())?;
    if measured != analytic {
        return Err(format!(
            "{} seed {seed}: measured {measured}, analytic {analytic}",
            grid.spec()
        ));
    }
    Ok(sessions.len())
}

fn decode_oracle(scale: Scale) -> Check {
    let small = CellGrid::hexagonal(2, 3, Boundary::Bounded).map_err(|e| e.to_string())?;
    let mut setups = vec![(small, 6, q(3, 2), 5)];
    if scale == Scale::Full {
        setups.push((torus(Lattice::Hexagonal, 4, 6, 1), 24, q(3, 1), 20));
    }
    let mut users = 0;
    for (grid, files, memory, runs) in &setups {
        for seed in 0..*runs {
            users += round_trip(grid, *files, memory, seed)?;
        }
    }
    Ok(format!("{users} users decoded, rates exact"))
}

fn memory_sharing() -> Check {
    let grid = torus(Lattice::Hexagonal, 3, 6, 0);
    let users = round_trip(&grid, 18, &q(4, 1), 11)?;
    Ok(format!("fractional level round trip, {users} users"))
}

fn popularity_bound(scale: Scale) -> Check {
    let (params, files, trials) = match scale {
        Scale::Smoke => (
            SystemParams {
                k: 6,
                memory: q(1, 2),
                path_length: 2,
                colors: 3,
            },
            12,
            2_000,
        ),
        Scale::Full => (
            SystemParams {
                k: 24,
                memory: q(150, 1),
                path_length: 2,
                colors: 3,
            },
            1200,
            20_000,
        ),
    };
    let profile = zipf_profile(files, 1.0).map_err(|e| e.to_string())?;
    let plan = optimize_cache_plan(&profile, &params).map_err(|e| e.to_string())?;
    let mc =
        expected_rate_monte_carlo(&profile, &params, plan.n_cached, trials, 7).map_err(|e| e.to_string())?;
    if mc.bound_violations > 0 {
        return Err(format!(
            "{} samples exceed the per-sample bound",
            mc.bound_violations
        ));
    }
    if mc.estimate.mean > plan.bound + 3.0 * mc.estimate.stderr {
        return Err(format!(
            "estimate {} above bound {}",
            mc.estimate.mean, plan.bound
        ));
    }
    Ok(format!(
        "N_c={} estimate {:.4} +- {:.4}, bound {:.4}",
        plan.n_cached, mc.estimate.mean, mc.estimate.stderr, plan.bound
    ))
}

fn simulator(scale: Scale) -> Check {
    let trials = if scale == Scale::Full { 500 } else { 40 };
    let grid = CellGrid::square(6, 4, Boundary::Bounded).map_err(|e| e.to_string())?;
    let coloring = color_cells(&grid, 4).map_err(|e| e.to_string())?;
    let base = SimConfig {
        grid,
        path_length: 4,
        capacity: 20,
        density: 0.0,
        trials,
        seed: 7,
        relaxed: false,
        model: MobilityModel::default(),
    };
    let densities = [1.25, 1.75, 2.25];
    let rows = sweep_density(&base, &densities, &coloring).map_err(|e| e.to_string())?;
    let again = sweep_density(&base, &densities, &coloring).map_err(|e| e.to_string())?;
    if rows != again {
        return Err("identical seeds gave different results".into());
    }
    for r in &rows {
        for s in [&r.strict, &r.relaxed] {
            if !(0.0..=1.0).contains(&s.sigma) {
                return Err(format!("lambda={}: sigma {} outside [0, 1]", r.density, s.sigma));
            }
        }
        if r.relaxed.sigma < r.strict.sigma {
            return Err(format!(
                "lambda={}: relaxed {} below strict {}",
                r.density, r.relaxed.sigma, r.strict.sigma
            ));
        }
    }
    Ok(format!(
        "{} densities, deterministic, relaxed >= strict",
        rows.len()
    ))
}

pub fn verify_all(a: &VerifyArgs) -> Result<Report, CliError> {
    let checks: Vec<NamedCheck> = vec![
        ("rates.tables", Box::new(tables)),
        ("coloring.min_colors", Box::new(|| min_colors_agree(a.scale))),
        (
            "coloring.verify",
            Box::new(|| colorings_valid(a.scale, a.inject_fault)),
        ),
        ("mds.round_trip", Box::new(|| mds_round_trip(a.scale))),
        ("caching.decode", Box::new(|| decode_oracle(a.scale))),
        ("caching.memory_sharing", Box::new(memory_sharing)),
        ("popularity.bound", Box::new(|| popularity_bound(a.scale))),
        ("mobility_sim.invariants", Box::new(|| simulator(a.scale))),
    ];
    let mut text = String::new();
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    let mut failed = Vec::new();
    for (name, check) in checks {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        let (status, detail) = match &outcome {
            Ok(d) => ("PASS", d.clone()),
            Err(d) => {
                failed.push(format!("{name}: {d}"));
                ("FAIL", d.clone())
            }
        };
        text.push_str(&format!("{status} {name}: {detail}\n"));
        rows.push(vec![
            name.to_string(),
            status.to_string(),
            format!("\"{}\"", detail.replace('"', "'")),
        ]);
        entries.push(json!({ "check": name, "status": status, "detail": detail, "seconds": secs }));
    }
    Ok(Report {
        json: json!({ "scale": a.scale, "inject_fault": a.inject_fault, "checks": entries, "passed": failed.is_empty() }),
        text,
        csv: Some(csv_table(&["check", "status", "detail"], &rows)),
        failure: (!failed.is_empty()).then(|| failed.join("; ")),
    })
}
