use std::fs;
use std::path::PathBuf;
use std::str::FromStr;

use clap::Args;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use mobicache::caching::{mobility_place_shared, UserSession};
use mobicache::coloring::{brute_force_min_colors, color_cells, min_colors, verify_coloring, ColoringSource};
use mobicache::mds::{self, CodedFragment, FileBlob};
use mobicache::mobility_sim::{
    parse_density_range, simulate_offloading, sweep_density, BoundaryRule, MobilityModel, OffloadResult,
    SimConfig,
};
use mobicache::popularity::{
    expected_rate_bound, expected_rate_monte_carlo, optimize_cache_plan, zipf_profile, SystemParams,
};
use mobicache::rates::{
    evaluate, format_count, format_f64_sig, format_sig, rate_mobility_groups, table1, table2, RateParams,
    SchemeKind, SubfileCount, TableRow,
};
use mobicache::topology::{random_full_occupancy_paths, Boundary, CellGrid, GridSpec};

use crate::error::CliError;
use crate::output::{
    csv_table, parse_rational, rational_json, rational_text, sha256_hex, subfiles_json, subfiles_text,
    Report, RunManifest,
};

fn grid_from(spec: &str, default: Boundary) -> Result<CellGrid, CliError> {
    Ok(GridSpec::from_str(spec)?.build(default)?)
}

/// Short decimal for grid-like inputs such as densities.
fn num(x: f64) -> String {
    let s = format!("{x:.10}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn memory_from(
    ratio: Option<&str>,
    memory: Option<&str>,
    files: Option<usize>,
) -> Result<(BigRational, usize), CliError> {
    match (ratio, memory) {
        (Some(r), None) => {
            let r = parse_rational(r)?;
            let n = match files {
                Some(n) => n,
                None => r
                    .denom()
                    .to_usize()
                    .ok_or_else(|| CliError::Validation("M/N denominator is too large; pass --N".into()))?,
            };
            let m = &r * BigRational::from_integer(BigInt::from(n));
            Ok((m, n))
        }
        (None, Some(m)) => {
            let n = files.ok_or_else(|| CliError::Validation("--M needs --N".into()))?;
            Ok((parse_rational(m)?, n))
        }
        (Some(_), Some(_)) => Err(CliError::Validation("give either --MN or --M, not both".into())),
        (None, None) => Err(CliError::Validation("one of --MN or --M is required".into())),
    }
}

// ------------------------------------------------------------ rate, subfiles

#[derive(Debug, Args, Serialize)]
pub struct SchemeArgs {
    /// single_access, multi_access, mobility or clustering.
    #[arg(long)]
    pub scheme: Option<String>,
    /// Number of SBSs.
    #[arg(long = "K")]
    pub k: usize,
    /// Normalized cache size M/N, e.g. `1/8`.
    #[arg(long = "MN", value_name = "RATIO")]
    pub mn: Option<String>,
    /// Cache size in files (needs --N).
    #[arg(long = "M")]
    pub m: Option<String>,
    /// Library size; defaults to the denominator of --MN.
    #[arg(long = "N")]
    pub n: Option<usize>,
    /// Path length; also the fragment factor of single-access and
    /// clustering counts (use 1 for the plain count).
    #[arg(long = "T", default_value_t = 2)]
    pub t: usize,
    /// Colors for mobility, access degree for multi-access, clusters for
    /// clustering.
    #[arg(long = "L", visible_alias = "clusters", default_value_t = 3)]
    pub l: usize,
}

impl SchemeArgs {
    fn params(&self, scheme: SchemeKind) -> Result<RateParams, CliError> {
        let (memory, files) = memory_from(self.mn.as_deref(), self.m.as_deref(), self.n)?;
        Ok(RateParams {
            scheme,
            k: self.k,
            memory,
            files,
            path_length: self.t,
            groups: self.l,
        })
    }
}

fn rate_row(p: &RateParams, level: &BigRational, rate: &BigRational, sub: &SubfileCount) -> Vec<String> {
    let (sub_exact, sub_short) = match sub {
        SubfileCount::Exact(n) => (n.to_string(), format_count(n, 3)),
        other => (other.to_string(), subfiles_text(other)),
    };
    vec![
        p.scheme.name().to_string(),
        p.k.to_string(),
        p.memory.to_string(),
        p.files.to_string(),
        p.path_length.to_string(),
        p.groups.to_string(),
        level.to_string(),
        rate.to_string(),
        format_sig(rate, 3),
        sub_exact,
        sub_short,
    ]
}

const RATE_HEADER: [&str; 11] = [
    "scheme",
    "K",
    "M",
    "N",
    "T",
    "L",
    "level",
    "rate_exact",
    "rate",
    "subfiles_exact",
    "subfiles",
];

pub fn rate(a: &SchemeArgs) -> Result<Report, CliError> {
    let scheme = match &a.scheme {
        Some(s) => SchemeKind::from_str(s)?,
        None => SchemeKind::Mobility,
    };
    let p = a.params(scheme)?;
    let r = evaluate(&p)?;
    let ratio = &p.memory / BigRational::from_integer(BigInt::from(p.files));
    let text = format!(
        "scheme     {}\nK          {}\nM/N        {}\nT, L       {}, {}\nlevel t    {}\nrate       {}\nsub-files  {}\n",
        scheme,
        p.k,
        rational_text(&ratio),
        p.path_length,
        p.groups,
        rational_text(&r.level),
        rational_text(&r.rate),
        subfiles_text(&r.subfiles)
    );
    Ok(Report {
        json: json!({
            "scheme": scheme.name(),
            "K": p.k,
            "M": rational_json(&p.memory),
            "N": p.files,
            "M_over_N": rational_json(&ratio),
            "T": p.path_length,
            "L": p.groups,
            "level": rational_json(&r.level),
            "rate": rational_json(&r.rate),
            "subfiles": subfiles_json(&r.subfiles),
        }),
        text,
        csv: Some(csv_table(
            &RATE_HEADER,
            &[rate_row(&p, &r.level, &r.rate, &r.subfiles)],
        )),
        failure: None,
    })
}

pub fn subfiles(a: &SchemeArgs) -> Result<Report, CliError> {
    use SchemeKind::*;
    let schemes = match &a.scheme {
        Some(s) => vec![SchemeKind::from_str(s)?],
        None => vec![SingleAccess, MultiAccess, Mobility, Clustering],
    };
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    let mut text = String::new();
    for scheme in schemes {
        let p = a.params(scheme)?;
        match evaluate(&p) {
            Ok(r) => {
                text.push_str(&format!("{:<14} {}\n", scheme.name(), subfiles_text(&r.subfiles)));
                entries.push(json!({
                    "scheme": scheme.name(),
                    "level": rational_json(&r.level),
                    "subfiles": subfiles_json(&r.subfiles),
                }));
                rows.push(rate_row(&p, &r.level, &r.rate, &r.subfiles));
            }
            // a single requested scheme must evaluate; in the overview a
            // scheme that does not fit the parameters is reported instead
            Err(e) if a.scheme.is_none() => {
                text.push_str(&format!("{:<14} n/a ({e})\n", scheme.name()));
                entries.push(json!({ "scheme": scheme.name(), "error": e.to_string() }));
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(Report {
        json: json!({ "K": a.k, "T": a.t, "L": a.l, "schemes": entries }),
        text,
        csv: Some(csv_table(&RATE_HEADER, &rows)),
        failure: None,
    })
}

// ------------------------------------------------------------------- color

#[derive(Debug, Args, Serialize)]
pub struct ColorArgs {
    /// `<hex|sq>:<rows>x<cols>[:torus|:bounded][:twist=<s>]`; torus by default.
    #[arg(long)]
    pub grid: String,
    /// Path length.
    #[arg(long = "T")]
    pub t: usize,
    /// Check every mobility path of T cells.
    #[arg(long)]
    pub verify: bool,
    /// Also compute the exact minimum number of colors (small grids only).
    #[arg(long)]
    pub brute_force: bool,
    /// Overwrite one cell's color before verifying, as `CELL=COLOR`.
    #[arg(long, value_name = "CELL=COLOR")]
    pub recolor: Option<String>,
}

pub fn color(a: &ColorArgs) -> Result<Report, CliError> {
    let grid = grid_from(&a.grid, Boundary::TORUS)?;
    let mut coloring = color_cells(&grid, a.t)?;
    if let Some(spec) = &a.recolor {
        let parsed = spec
            .split_once('=')
            .and_then(|(c, k)| Some((c.trim().parse().ok()?, k.trim().parse().ok()?)));
        let (cell, col): (usize, usize) = parsed
            .ok_or_else(|| CliError::Validation(format!("--recolor expects CELL=COLOR, got `{spec}`")))?;
        coloring = coloring.recolored(cell, col)?;
    }
    let formula = min_colors(grid.lattice(), a.t)?;
    let mut json = json!({
        "grid": grid.spec(),
        "T": a.t,
        "L": coloring.num_colors(),
        "formula_L": formula,
        "groups": coloring.groups(),
        "group_sizes": coloring.group_sizes(),
    });
    if let ColoringSource::ReusePattern { i, j } = coloring.source() {
        json["pattern"] = json!({ "i": i, "j": j });
    }
    let mut text = format!(
        "grid {}  T={}  L={} (formula {})\ngroup sizes {:?}\n",
        grid.spec(),
        a.t,
        coloring.num_colors(),
        formula,
        coloring.group_sizes()
    );
    let mut failure = None;

    if a.verify || a.recolor.is_some() {
        let v = verify_coloring(&grid, &coloring, a.t);
        json["valid"] = json!(v.valid);
        match &v.counterexample {
            Some(p) => {
                json["counterexample"] = json!(p.cells);
                let colors: Vec<usize> = p.cells.iter().map(|&c| coloring.color(c)).collect();
                text.push_str(&format!("INVALID: path {:?} has colors {:?}\n", p.cells, colors));
                failure = Some(format!(
                    "verify_coloring: path {:?} visits colors {colors:?}",
                    p.cells
                ));
            }
            None => text.push_str("valid: every path meets distinct colors\n"),
        }
    }
    if a.brute_force {
        let exact = brute_force_min_colors(&grid, a.t)?;
        json["brute_force_L"] = json!(exact);
        text.push_str(&format!("exhaustive minimum {exact}\n"));
        if grid.boundary().is_torus() && exact != formula && failure.is_none() {
            failure = Some(format!(
                "brute_force_min_colors: {exact} colors on {} vs formula {formula}",
                grid.spec()
            ));
        }
    }
    let rows: Vec<Vec<String>> = grid
        .cells()
        .map(|c| {
            let (q, r) = grid.coords(c);
            vec![
                c.to_string(),
                q.to_string(),
                r.to_string(),
                coloring.color(c).to_string(),
            ]
        })
        .collect();
    Ok(Report {
        json,
        text,
        csv: Some(csv_table(&["cell", "q", "r", "color"], &rows)),
        failure,
    })
}

// ---------------------------------------------------------- deliver-verify

#[derive(Debug, Args, Serialize)]
pub struct DeliverArgs {
    /// Grid spec; torus by default.
    #[arg(long)]
    pub grid: String,
    #[arg(long = "T", default_value_t = 2)]
    pub t: usize,
    /// Normalized cache size, e.g. `1/4`.
    #[arg(long = "MN", value_name = "RATIO", alias = "MN-ratio")]
    pub mn: Option<String>,
    /// Cache size in files.
    #[arg(long = "M")]
    pub m: Option<String>,
    /// Library size.
    #[arg(long, alias = "N")]
    pub files: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Bytes per file before padding.
    #[arg(long, default_value_t = 256)]
    pub file_len: usize,
    /// Withhold one multicast message to exercise failure reporting.
    #[arg(long)]
    pub drop_message: bool,
}

pub fn deliver_verify(a: &DeliverArgs) -> Result<Report, CliError> {
    let grid = grid_from(&a.grid, Boundary::TORUS)?;
    let coloring = color_cells(&grid, a.t)?;
    let (memory, n) = memory_from(a.mn.as_deref(), a.m.as_deref(), Some(a.files))?;
    if a.file_len == 0 {
        return Err(CliError::Validation("--file-len must be positive".into()));
    }
    let k = grid.len();
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let library: Vec<FileBlob> = (0..n)
        .map(|i| FileBlob::new(i, (0..a.file_len).map(|_| rng.random()).collect()))
        .collect();
    let shared = mobility_place_shared(&grid, &coloring, n, &memory, a.t, &library)?;
    let paths = random_full_occupancy_paths(&grid, a.t, &mut rng)?;
    let demands: Vec<usize> = if n >= k {
        let mut d: Vec<usize> = (0..n).collect();
        d.shuffle(&mut rng);
        d.truncate(k);
        d
    } else {
        (0..k).map(|_| rng.random_range(0..n)).collect()
    };
    let sessions: Vec<UserSession> = paths
        .into_iter()
        .enumerate()
        .map(|(user, path)| UserSession {
            user,
            demand: demands[user],
            path,
        })
        .collect();
    let mut messages = (0..a.t)
        .map(|slot| shared.deliver(&sessions, slot))
        .collect::<Result<Vec<_>, _>>()?;
    let mut dropped = None;
    if a.drop_message {
        if let Some((part, list)) = messages[0].iter_mut().enumerate().find(|(_, l)| !l.is_empty()) {
            let m = list.remove(0);
            dropped = Some(json!({ "slot": 0, "part": part, "group": m.group, "subset": m.subset }));
        }
    }

    let mut decoded = 0;
    let mut first_error = None;
    for s in &sessions {
        match shared.decode(s, &messages) {
            Ok(f) if f == library[s.demand] => decoded += 1,
            Ok(_) => {
                first_error.get_or_insert(format!("user {} decoded wrong bytes", s.user));
            }
            Err(e) => {
                first_error.get_or_insert(format!("user {}: {e}", s.user));
            }
        }
    }
    let measured = shared.normalized_load(&messages);
    let analytic = rate_mobility_groups(&coloring.group_sizes(), &memory, n, a.t)?;
    let bytes: usize = messages.iter().flatten().flatten().map(|m| m.payload.len()).sum();
    let subfiles: Vec<usize> = shared.parts().iter().map(|p| p.subpacketization()).collect();
    let capacity_ok = shared.within_capacity();

    let mut problems = Vec::new();
    if decoded < k {
        problems.push(format!(
            "{decoded}/{k} users decoded; {}",
            first_error.clone().unwrap_or_default()
        ));
    }
    if measured != analytic {
        problems.push(format!("measured rate {measured} != analytic {analytic}"));
    }
    if !capacity_ok {
        problems.push("cache budget exceeded".into());
    }
    let failure = (!problems.is_empty()).then(|| problems.join("; "));

    let text = format!(
        "grid {}  K={k}  L={}  T={}  N={n}  M={}\nusers decoded   {decoded}/{k}\nmeasured rate   {}\nanalytic rate   {}\nsub-files       {:?}\nbackhaul bytes  {bytes} (file length {} after padding)\ncache budget    {}\n",
        grid.spec(),
        coloring.num_colors(),
        a.t,
        rational_text(&memory),
        rational_text(&measured),
        rational_text(&analytic),
        subfiles,
        shared.padded_file_len(),
        if capacity_ok { "respected" } else { "EXCEEDED" },
    );
    let mut json = json!({
        "grid": grid.spec(),
        "K": k,
        "L": coloring.num_colors(),
        "T": a.t,
        "N": n,
        "M": rational_json(&memory),
        "seed": a.seed,
        "users": k,
        "users_decoded": decoded,
        "measured_rate": rational_json(&measured),
        "analytic_rate": rational_json(&analytic),
        "subfiles": subfiles,
        "memory_sharing_weights": shared.weights().iter().map(|w| w.to_string()).collect::<Vec<_>>(),
        "padded_file_len": shared.padded_file_len(),
        "backhaul_bytes": bytes,
        "within_capacity": capacity_ok,
    });
    if let Some(e) = &first_error {
        json["first_error"] = json!(e);
    }
    if let Some(d) = dropped {
        json["dropped_message"] = d;
    }
    let csv = csv_table(
        &[
            "grid",
            "K",
            "L",
            "T",
            "N",
            "M",
            "seed",
            "users",
            "users_decoded",
            "measured_rate",
            "analytic_rate",
            "subfiles",
            "backhaul_bytes",
        ],
        &[vec![
            grid.spec(),
            k.to_string(),
            coloring.num_colors().to_string(),
            a.t.to_string(),
            n.to_string(),
            memory.to_string(),
            a.seed.to_string(),
            k.to_string(),
            decoded.to_string(),
            measured.to_string(),
            analytic.to_string(),
            subfiles
                .iter()
                .map(|s| s.to_string())
                .collect::<Vec<_>>()
                .join(" "),
            bytes.to_string(),
        ]],
    );
    Ok(Report {
        json,
        text,
        csv: Some(csv),
        failure,
    })
}

// -------------------------------------------------------------- cache-plan

#[derive(Debug, Args, Serialize)]
pub struct CachePlanArgs {
    #[arg(long = "K")]
    pub k: usize,
    /// Cache size in files.
    #[arg(long = "M")]
    pub m: String,
    /// Library size.
    #[arg(long = "N")]
    pub n: usize,
    #[arg(long = "T", default_value_t = 2)]
    pub t: usize,
    #[arg(long = "L", default_value_t = 3)]
    pub l: usize,
    /// Zipf exponent of the reported plan.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Monte Carlo trials at the optimum; 0 skips the simulation.
    #[arg(long, default_value_t = 10_000)]
    pub mc_trials: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Exponents of the CSV sweep.
    #[arg(long, default_value = "0.8,0.9,1.0,1.1")]
    pub sweep: String,
    /// Emit the whole bound-versus-N_c curve as CSV instead of the sweep.
    #[arg(long)]
    pub curve: bool,
}

struct PlanPoint {
    alpha: f64,
    opt: mobicache::popularity::CachePlan,
    uniform: f64,
    mc: Option<mobicache::popularity::MonteCarloRate>,
}

fn plan_at(a: &CachePlanArgs, params: &SystemParams, alpha: f64) -> Result<PlanPoint, CliError> {
    let profile = zipf_profile(a.n, alpha)?;
    let opt = optimize_cache_plan(&profile, params)?;
    let uniform = expected_rate_bound(&profile, params, a.n)?.bound;
    let mc = if a.mc_trials > 0 {
        Some(expected_rate_monte_carlo(
            &profile,
            params,
            opt.n_cached,
            a.mc_trials,
            a.seed,
        )?)
    } else {
        None
    };
    Ok(PlanPoint {
        alpha,
        opt,
        uniform,
        mc,
    })
}

fn plan_json(p: &PlanPoint) -> Value {
    let mut v = json!({
        "alpha": p.alpha,
        "N_c_opt": p.opt.n_cached,
        "level": rational_json(&p.opt.level),
        "cached_rate": rational_json(&p.opt.cached_rate),
        "p_cached": p.opt.p_cached,
        "bound": p.opt.bound,
        "uniform_bound": p.uniform,
    });
    if let Some(mc) = &p.mc {
        v["mc_estimate"] = json!(mc.estimate.mean);
        v["stderr"] = json!(mc.estimate.stderr);
        v["mc_trials"] = json!(mc.estimate.samples);
        v["bound_violations"] = json!(mc.bound_violations);
    }
    v
}

fn plan_problem(p: &PlanPoint) -> Option<String> {
    let mc = p.mc.as_ref()?;
    if mc.bound_violations > 0 {
        return Some(format!(
            "alpha={}: {} samples exceed the per-sample bound",
            p.alpha, mc.bound_violations
        ));
    }
    if mc.estimate.mean > p.opt.bound + 3.0 * mc.estimate.stderr + 1e-12 {
        return Some(format!(
            "alpha={}: estimate {} above bound {}",
            p.alpha, mc.estimate.mean, p.opt.bound
        ));
    }
    None
}

pub fn cache_plan(a: &CachePlanArgs) -> Result<Report, CliError> {
    let params = SystemParams {
        k: a.k,
        memory: parse_rational(&a.m)?,
        path_length: a.t,
        colors: a.l,
    };
    let main = plan_at(a, &params, a.alpha)?;
    let alphas = a
        .sweep
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Validation(format!("bad exponent `{s}`")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let sweep = alphas
        .iter()
        .map(|&al| plan_at(a, &params, al))
        .collect::<Result<Vec<_>, _>>()?;

    let mut json = plan_json(&main);
    json["K"] = json!(a.k);
    json["M"] = rational_json(&params.memory);
    json["N"] = json!(a.n);
    json["T"] = json!(a.t);
    json["L"] = json!(a.l);
    json["sweep"] = Value::Array(sweep.iter().map(plan_json).collect());

    let mut text = format!(
        "K={} M={} N={} T={} L={} alpha={}\noptimal N_c   {}\nbound         {}\nuniform bound {}\n",
        a.k,
        rational_text(&params.memory),
        a.n,
        a.t,
        a.l,
        a.alpha,
        main.opt.n_cached,
        format_f64_sig(main.opt.bound, 4),
        format_f64_sig(main.uniform, 4),
    );
    if let Some(mc) = &main.mc {
        text.push_str(&format!(
            "monte carlo   {} +- {} ({} trials)\n",
            format_f64_sig(mc.estimate.mean, 4),
            format_f64_sig(mc.estimate.stderr, 2),
            mc.estimate.samples
        ));
    }

    let csv = if a.curve {
        let mut rows = Vec::new();
        for &al in &alphas {
            let profile = zipf_profile(a.n, al)?;
            for n_c in 1..=a.n {
                let p = expected_rate_bound(&profile, &params, n_c)?;
                rows.push(vec![
                    al.to_string(),
                    n_c.to_string(),
                    p.bound.to_string(),
                    format_sig(&p.cached_rate, 6),
                    p.p_cached.to_string(),
                ]);
            }
        }
        csv_table(&["alpha", "N_c", "bound", "cached_rate", "p_cached"], &rows)
    } else {
        let rows: Vec<Vec<String>> = sweep
            .iter()
            .map(|p| {
                let (mean, se) = p.mc.as_ref().map_or((String::new(), String::new()), |m| {
                    (m.estimate.mean.to_string(), m.estimate.stderr.to_string())
                });
                vec![
                    p.alpha.to_string(),
                    p.opt.n_cached.to_string(),
                    p.opt.bound.to_string(),
                    p.uniform.to_string(),
                    mean,
                    se,
                ]
            })
            .collect();
        csv_table(
            &[
                "alpha",
                "N_c_opt",
                "bound_popularity",
                "bound_uniform",
                "mc_estimate",
                "mc_stderr",
            ],
            &rows,
        )
    };
    let failure = std::iter::once(&main).chain(&sweep).find_map(plan_problem);
    Ok(Report {
        json,
        text,
        csv: Some(csv),
        failure,
    })
}

// ------------------------------------------------------- simulate-mobility

#[derive(Debug, Args, Serialize)]
pub struct SimArgs {
    /// Grid spec; bounded by default.
    #[arg(long, default_value = "sq:6x4:bounded")]
    pub grid: String,
    #[arg(long = "T", default_value_t = 4)]
    pub t: usize,
    /// Users an SBS can serve per slot.
    #[arg(long = "Qs", default_value_t = 20)]
    pub qs: usize,
    /// Densities as `start:stop:step` or a comma list.
    #[arg(long, default_value = "1.25:2.25:0.25")]
    pub lambda: String,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Drop the one-fragment-per-color service constraint.
    #[arg(long, conflicts_with = "both")]
    pub relaxed: bool,
    /// Run the strict and relaxed variants on shared seeds.
    #[arg(long)]
    pub both: bool,
    #[arg(long, default_value_t = 0.2)]
    pub stay_prob: f64,
    /// `lazy` or `renormalize`.
    #[arg(long, default_value = "lazy")]
    pub boundary_rule: String,
}

pub fn simulate_mobility(a: &SimArgs) -> Result<Report, CliError> {
    let grid = grid_from(&a.grid, Boundary::Bounded)?;
    let coloring = color_cells(&grid, a.t)?;
    let boundary = match a.boundary_rule.as_str() {
        "lazy" => BoundaryRule::Lazy,
        "renormalize" => BoundaryRule::Renormalize,
        other => return Err(CliError::Validation(format!("unknown boundary rule `{other}`"))),
    };
    if !(0.0..=1.0).contains(&a.stay_prob) {
        return Err(CliError::Validation("--stay-prob must lie in [0, 1]".into()));
    }
    let densities = parse_density_range(&a.lambda)?;
    let base = SimConfig {
        grid: grid.clone(),
        path_length: a.t,
        capacity: a.qs,
        density: 0.0,
        trials: a.trials,
        seed: a.seed,
        relaxed: a.relaxed,
        model: MobilityModel {
            stay_prob: a.stay_prob,
            boundary,
        },
    };
    let mut results: Vec<(f64, OffloadResult)> = Vec::new();
    if a.both {
        for row in sweep_density(&base, &densities, &coloring)? {
            results.push((row.density, row.strict));
            results.push((row.density, row.relaxed));
        }
    } else {
        for &d in &densities {
            let cfg = SimConfig {
                density: d,
                ..base.clone()
            };
            results.push((d, simulate_offloading(&cfg, &coloring)?));
        }
    }

    let variant = |r: &OffloadResult| if r.relaxed { "relaxed" } else { "strict" };
    let rows: Vec<Vec<String>> = results
        .iter()
        .map(|(d, r)| {
            vec![
                num(*d),
                variant(r).to_string(),
                r.sigma.to_string(),
                r.stderr.to_string(),
                r.served_mean.to_string(),
            ]
        })
        .collect();
    let mut text = format!(
        "grid {}  T={}  Q_s={}  L={}  trials={}  seed={}\n{:>8} {:>8} {:>8} {:>9} {:>11}\n",
        grid.spec(),
        a.t,
        a.qs,
        coloring.num_colors(),
        a.trials,
        a.seed,
        "lambda",
        "variant",
        "sigma",
        "stderr",
        "served_mean"
    );
    for (d, r) in &results {
        text.push_str(&format!(
            "{:>8} {:>8} {:>8.4} {:>9.2e} {:>11.3}\n",
            num(*d),
            variant(r),
            r.sigma,
            r.stderr,
            r.served_mean
        ));
    }
    let json = json!({
        "grid": grid.spec(),
        "T": a.t,
        "Qs": a.qs,
        "L": coloring.num_colors(),
        "trials": a.trials,
        "seed": a.seed,
        "stay_prob": a.stay_prob,
        "boundary_rule": a.boundary_rule,
        "rows": results.iter().map(|(d, r)| json!({
            "lambda": d,
            "variant": variant(r),
            "users_per_cell": r.users_per_cell,
            "sigma": r.sigma,
            "stderr": r.stderr,
            "served_mean": r.served_mean,
        })).collect::<Vec<_>>(),
    });
    let csv = csv_table(&["lambda", "variant", "sigma", "stderr", "served_mean"], &rows);
    Ok(Report {
        json,
        text,
        csv: Some(csv),
        failure: None,
    })
}

// ------------------------------------------------------------------ tables

fn table_rows(rows: &[TableRow]) -> (Vec<Vec<String>>, Vec<Value>) {
    let mut csv = Vec::new();
    let mut json = Vec::new();
    for r in rows {
        let ratio = r.memory_ratio.to_string();
        match (&r.subfiles, &r.rate, r.reference) {
            (Some(sub), Some(rate), _) => {
                let (exact, short) = match sub {
                    SubfileCount::Exact(n) => (n.to_string(), format_count(n, 3)),
                    other => (other.to_string(), subfiles_text(other)),
                };
                csv.push(vec![
                    r.scheme.clone(),
                    r.k.to_string(),
                    ratio.clone(),
                    short,
                    exact,
                    format_sig(rate, 3),
                    rate.to_string(),
                    "computed".into(),
                ]);
                json.push(json!({
                    "scheme": r.scheme,
                    "K": r.k,
                    "M_over_N": ratio,
                    "subfiles": subfiles_json(sub),
                    "rate": rational_json(rate),
                    "source": "computed",
                }));
            }
            (_, _, Some((sub, rate))) => {
                csv.push(vec![
                    r.scheme.clone(),
                    r.k.to_string(),
                    ratio.clone(),
                    format!("{sub:.2e}"),
                    String::new(),
                    rate.to_string(),
                    String::new(),
                    "reference_only".into(),
                ]);
                json.push(json!({
                    "scheme": r.scheme,
                    "K": r.k,
                    "M_over_N": ratio,
                    "subfiles": sub,
                    "rate": rate,
                    "source": "reference_only",
                }));
            }
            _ => unreachable!("table rows are computed or reference"),
        }
    }
    (csv, json)
}

pub fn table(which: u8) -> Result<Report, CliError> {
    let rows = if which == 1 { table1()? } else { table2()? };
    let (csv_rows, json_rows) = table_rows(&rows);
    let csv = csv_table(
        &[
            "scheme",
            "K",
            "M_over_N",
            "subfiles",
            "subfiles_exact",
            "rate",
            "rate_exact",
            "source",
        ],
        &csv_rows,
    );
    Ok(Report {
        json: Value::Array(json_rows),
        text: csv.clone(),
        csv: Some(csv),
        failure: None,
    })
}

// --------------------------------------------------------------------- mds

#[derive(Debug, Args, Serialize)]
pub struct MdsEncodeArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Fragments needed to decode.
    #[arg(long = "T")]
    pub t: usize,
    /// Fragments produced.
    #[arg(long = "L")]
    pub l: usize,
    #[arg(long)]
    pub out_dir: PathBuf,
}

pub fn mds_encode(a: &MdsEncodeArgs) -> Result<Report, CliError> {
    let bytes = fs::read(&a.input)?;
    let frags = mds::mds_encode(&FileBlob::new(0, bytes.clone()), a.t, a.l)?;
    fs::create_dir_all(&a.out_dir)?;
    let mut entries = Vec::new();
    let mut rows = Vec::new();
    let mut text = String::new();
    for f in &frags {
        let path = a.out_dir.join(format!("fragment_{:03}.mcf", f.index));
        let raw = f.to_bytes();
        fs::write(&path, &raw)?;
        let digest = sha256_hex(&raw);
        text.push_str(&format!("{}  {}\n", digest, path.display()));
        rows.push(vec![
            f.index.to_string(),
            path.display().to_string(),
            raw.len().to_string(),
            digest.clone(),
        ]);
        entries.push(json!({ "index": f.index, "path": path.display().to_string(), "bytes": raw.len(), "sha256": digest }));
    }
    Ok(Report {
        json: json!({
            "input": a.input.display().to_string(),
            "bytes": bytes.len(),
            "sha256": sha256_hex(&bytes),
            "T": a.t,
            "L": a.l,
            "fragments": entries,
        }),
        text,
        csv: Some(csv_table(&["index", "path", "bytes", "sha256"], &rows)),
        failure: None,
    })
}

#[derive(Debug, Args, Serialize)]
pub struct MdsDecodeArgs {
    /// Fragment files; any T distinct ones suffice.
    #[arg(required = true)]
    pub fragments: Vec<PathBuf>,
    #[arg(long)]
    pub output: PathBuf,
}

pub fn mds_decode(a: &MdsDecodeArgs) -> Result<Report, CliError> {
    let frags = a
        .fragments
        .iter()
        .map(|p| {
            let raw = fs::read(p)?;
            CodedFragment::from_bytes(0, &raw)
                .map_err(|e| CliError::Validation(format!("{}: {e}", p.display())))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let first = &frags[0];
    let (t, l) = (first.data_fragments, first.total_fragments);
    if let Some(odd) = frags
        .iter()
        .find(|f| (f.data_fragments, f.total_fragments) != (t, l))
    {
        return Err(CliError::Validation(format!(
            "fragment {} belongs to a ({}, {}) code, expected ({l}, {t})",
            odd.index, odd.total_fragments, odd.data_fragments
        )));
    }
    let file = mds::mds_decode(&frags, t, l)?;
    fs::write(&a.output, &file.bytes)?;
    let digest = sha256_hex(&file.bytes);
    let used: Vec<usize> = frags.iter().map(|f| f.index).collect();
    Ok(Report {
        json: json!({
            "output": a.output.display().to_string(),
            "bytes": file.bytes.len(),
            "sha256": digest,
            "T": t,
            "L": l,
            "fragments": used,
        }),
        text: format!(
            "{}  {} ({} bytes)\n",
            digest,
            a.output.display(),
            file.bytes.len()
        ),
        csv: Some(csv_table(
            &["output", "bytes", "sha256"],
            &[vec![
                a.output.display().to_string(),
                file.bytes.len().to_string(),
                digest.clone(),
            ]],
        )),
        failure: None,
    })
}

// ------------------------------------------------------------------ replay

#[derive(Debug, Args, Serialize)]
pub struct ReplayArgs {
    /// Manifest written by `--manifest`.
    pub manifest_file: PathBuf,
}

pub fn replay(a: &ReplayArgs) -> Result<Report, CliError> {
    let body = fs::read_to_string(&a.manifest_file)?;
    let manifest: RunManifest =
        serde_json::from_str(&body).map_err(|e| CliError::Validation(format!("bad manifest: {e}")))?;
    let mut args = vec!["mobicache".to_string()];
    args.extend(manifest.args.iter().cloned());
    let cli = crate::parse(&args).map_err(|e| CliError::Validation(format!("manifest arguments: {e}")))?;
    if matches!(cli.command, crate::Command::Replay(_)) {
        return Err(CliError::Validation(
            "a manifest cannot replay another manifest".into(),
        ));
    }
    let (_, rendered) = crate::execute(&cli)?;
    let actual = crate::output_hashes(&rendered);

    let mut entries = Vec::new();
    let mut text = String::new();
    let mut mismatched = Vec::new();
    for (name, want) in &manifest.outputs {
        let got = actual.get(name).cloned().unwrap_or_default();
        let ok = &got == want;
        if !ok {
            mismatched.push(name.clone());
        }
        text.push_str(&format!("{} {name}\n", if ok { "match   " } else { "MISMATCH" }));
        entries.push(json!({ "name": name, "expected": want, "actual": got, "match": ok }));
    }
    if manifest.version != env!("CARGO_PKG_VERSION") {
        text.push_str(&format!(
            "note: manifest written by version {}\n",
            manifest.version
        ));
    }
    let rows: Vec<Vec<String>> = entries
        .iter()
        .map(|e| {
            ["name", "expected", "actual", "match"]
                .iter()
                .map(|k| e[k].as_str().map_or_else(|| e[k].to_string(), str::to_string))
                .collect()
        })
        .collect();
    Ok(Report {
        json: json!({
            "manifest": a.manifest_file.display().to_string(),
            "command": manifest.command,
            "outputs": entries,
            "reproduced": mismatched.is_empty(),
        }),
        text,
        csv: Some(csv_table(&["name", "expected", "actual", "match"], &rows)),
        failure: (!mismatched.is_empty()).then(|| format!("outputs differ: {}", mismatched.join(", "))),
    })
}
