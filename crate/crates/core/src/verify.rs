//! The acceptance suite: twelve criteria, each a list of named checks with
//! the tolerance it was held to. Outputs contain no timings, so two runs
//! with the same seed and scale serialize to identical bytes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;

use num_rational::BigRational;
use rand::distributions::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::forest::{brute_farthest_leaf, brute_nearest_leaf, build_forest, factorial, lehmer_unrank, ForestGraph};
use crate::limit::{
    build_r_ball_limit, limit_bumped_scan, limit_farthest_leaf, limit_nearest_leaf, yule_count, PointProcessFamily,
    SpineInput,
};
use crate::paths::{
    bumped_set, longest_path, longest_path_length, lub_bound, lub_bound_exact, shortest_path, simple_upper_bound,
    DEFAULT_STEP_BUDGET,
};
use crate::permutation::Permutation;
use crate::rng;
use crate::stats::{
    bx_tail_table, identity_tree_probe, indicator_tv_experiment, mc_forest_stats, rball_histogram_compare,
    sample_distribution, tail_decay_check, tv_distance, Geometric, McConfig, Poisson,
};

/// Seed used by `verify` unless another is given.
pub const DEFAULT_SEED: u64 = 271_828;

/// Edges `(child, parent)` of `F_3`.
pub const FIGURE_F3_EDGES: [(&str, &str); 4] = [("312", "123"), ("213", "123"), ("321", "213"), ("231", "321")];

/// Edges `(child, parent)` drawn for `F_4`.
pub const FIGURE_F4_EDGES: [(&str, &str); 18] = [
    ("4312", "3124"),
    ("2143", "1243"),
    ("2413", "4213"),
    ("2341", "3241"),
    ("4123", "1234"),
    ("3421", "4231"),
    ("2134", "1234"),
    ("2431", "4231"),
    ("3124", "1234"),
    ("4321", "3214"),
    ("4213", "2134"),
    ("3241", "2431"),
    ("3214", "2134"),
    ("4132", "1324"),
    ("2314", "3214"),
    ("3142", "1432"),
    ("3412", "4132"),
    ("4231", "2314"),
];

pub const SHARP_BOUND_MAX_N: usize = 20;
pub const ORACLE_N: usize = 6;
pub const BOUND_XS: [f64; 3] = [1.0, 2.0, 4.0];

pub const LIMIT_SAMPLES: u64 = 1_000_000;
pub const LIMIT_TV: f64 = 0.005;

pub const FINITE_N: usize = 1000;
pub const FINITE_TRIALS: u64 = 100_000;
pub const MEAN_M_TOL: f64 = 0.03;
pub const MEAN_L_TOL: f64 = 0.05;
pub const FINITE_TV: f64 = 0.02;

pub const RBALL_N: usize = 2000;
pub const RBALL_R1_TRIALS: u64 = 100_000;
pub const RBALL_R1_TV: f64 = 0.02;
pub const RBALL_R2_TRIALS: u64 = 10_000;
pub const RBALL_R2_TV: f64 = 0.05;

pub const INDICATOR_NS: [usize; 3] = [6, 7, 8];

pub const TAIL_N: usize = 1000;
pub const TAIL_TRIALS: u64 = 1_000_000;
pub const TAIL_C: f64 = 0.8;
pub const TAIL_K_MAX: u64 = 12;
pub const TAIL_MIN_SUPPORT: u64 = 100;
pub const BX_X: f64 = 2.0;
pub const BX_TS: [u64; 7] = [6, 7, 8, 9, 10, 11, 12];

pub const PROBE_NS: [usize; 3] = [100, 200, 400];
pub const PROBE_TRIALS: u64 = 100_000;
pub const PROBE_WALK_BUDGET: u64 = 1 << 12;

pub const ROUND_TRIPS: u64 = 10_000;
pub const ROUND_TRIP_WINDOW: i64 = 8;
pub const MUTATION_CASES: u64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    /// Sample sizes as stated in the criteria.
    Full,
    /// Sample sizes divided by 100; thresholds unchanged.
    Quick,
}

impl Scale {
    fn trials(self, full: u64) -> u64 {
        match self {
            Scale::Full => full,
            Scale::Quick => (full / 100).max(full.min(1000)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub scale: Scale,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self { seed: DEFAULT_SEED, scale: Scale::Full }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub observed: String,
    pub threshold: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub title: String,
    pub pass: bool,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub version: String,
    pub config: SuiteConfig,
    pub pass: bool,
    pub criteria: Vec<CriterionOutcome>,
}

pub const TITLES: [&str; 12] = [
    "figure reproduction",
    "forest counts",
    "worked example",
    "sharp bound",
    "oracle equivalence",
    "limit samplers",
    "finite-n limits",
    "local weak convergence",
    "indicator experiment",
    "tail bounds",
    "identity-tree probe",
    "structural properties",
];

fn check(name: impl Into<String>, observed: impl Display, threshold: impl Display, pass: bool) -> Check {
    Check { name: name.into(), observed: observed.to_string(), threshold: threshold.to_string(), pass }
}

/// Seed for part `part` of criterion `id`.
fn sub_seed(cfg: &SuiteConfig, id: u8, part: u64) -> u64 {
    rng::child_seed(&mut rng::stream(cfg.seed, (u64::from(id) << 16) | part))
}

pub fn run_criterion(id: u8, cfg: &SuiteConfig) -> CriterionOutcome {
    log::info!("criterion {id}: {}", TITLES[usize::from(id) - 1]);
    let checks = match id {
        1 => figures(),
        2 => forest_counts(),
        3 => worked_example(),
        4 => sharp_bound(),
        5 => oracle_equivalence(),
        6 => limit_samplers(cfg),
        7 => finite_limits(cfg),
        8 => local_convergence(cfg),
        9 => indicator_experiment(),
        10 => tail_bounds(cfg),
        11 => identity_probe(cfg),
        12 => structural(cfg),
        _ => panic!("no criterion {id}"),
    };
    CriterionOutcome {
        id,
        title: TITLES[usize::from(id) - 1].to_owned(),
        pass: checks.iter().all(|c| c.pass),
        checks,
    }
}

pub fn run_selected(ids: &[u8], cfg: &SuiteConfig) -> SuiteReport {
    let criteria: Vec<CriterionOutcome> = ids.iter().map(|&id| run_criterion(id, cfg)).collect();
    SuiteReport {
        version: crate::VERSION.to_owned(),
        config: *cfg,
        pass: criteria.iter().all(|c| c.pass),
        criteria,
    }
}

pub fn run_suite(cfg: &SuiteConfig) -> SuiteReport {
    run_selected(&(1..=12).collect::<Vec<u8>>(), cfg)
}

fn labeled_edges(f: &ForestGraph) -> BTreeSet<(String, String)> {
    f.edges().map(|(c, p)| (f.permutation(c).one_line(), f.permutation(p).one_line())).collect()
}

fn edge_set(edges: &[(&str, &str)]) -> BTreeSet<(String, String)> {
    edges.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
}

fn figures() -> Vec<Check> {
    let mut out = Vec::new();
    match (build_forest(3), build_forest(4)) {
        (Ok(f3), Ok(f4)) => {
            let e3 = labeled_edges(&f3);
            out.push(check("F_3 edge set", format!("{e3:?}"), "the 4 drawn edges", e3 == edge_set(&FIGURE_F3_EDGES)));
            let e4 = labeled_edges(&f4);
            let missing = edge_set(&FIGURE_F4_EDGES).difference(&e4).count();
            out.push(check("F_4 drawn edges missing", missing, 0, missing == 0));
            out.push(check("F_4 edge count", e4.len(), 18, e4.len() == 18));
            out.push(check("F_4 vertex count", f4.vertex_count(), 24, f4.vertex_count() == 24));
        }
        (a, b) => out.push(check("build", format!("{:?} {:?}", a.err(), b.err()), "ok", false)),
    }
    out
}

/// `D(n) = Σ_k (−1)^k n!/k!`.
pub fn derangements(n: usize) -> u64 {
    let nf = factorial(n) as i128;
    let mut sum = 0i128;
    let mut k_fact = 1i128;
    for k in 0..=n {
        if k > 0 {
            k_fact *= k as i128;
        }
        let term = nf / k_fact;
        sum += if k % 2 == 0 { term } else { -term };
    }
    sum as u64
}

fn forest_counts() -> Vec<Check> {
    let mut out = Vec::new();
    for n in 1..=7 {
        let f = match build_forest(n) {
            Ok(f) => f,
            Err(e) => {
                out.push(check(format!("n={n} build"), e, "ok", false));
                continue;
            }
        };
        let vertices = f.vertex_count() as u64;
        let bases = f.bases().count() as u64;
        let leaves = f.leaves().count() as u64;
        let deranged: Vec<usize> = (0..f.vertex_count()).filter(|&v| f.permutation(v).is_derangement()).collect();
        let d = derangements(n);
        let d_prev = derangements(n - 1);
        out.push(check(format!("n={n} vertices"), vertices, factorial(n), vertices == factorial(n)));
        out.push(check(format!("n={n} bases"), bases, factorial(n - 1), bases == factorial(n - 1)));
        out.push(check(format!("n={n} derangements"), deranged.len(), d, deranged.len() as u64 == d));
        let all_leaves = deranged.iter().all(|&v| f.children(v).is_empty());
        out.push(check(format!("n={n} derangements are leaves"), all_leaves, true, all_leaves));
        out.push(check(format!("n={n} leaves"), leaves, d + d_prev, leaves == d + d_prev));
        out.push(check(format!("n={n} acyclic"), f.is_acyclic(), true, f.is_acyclic()));
    }
    out
}

fn p(s: &str) -> Permutation {
    s.parse().expect("literal permutation")
}

fn labels(perms: &[Permutation]) -> String {
    perms.iter().map(Permutation::one_line).collect::<Vec<_>>().join(" ")
}

fn worked_example() -> Vec<Check> {
    let perm = p("32415");
    let mut out = Vec::new();
    let short = labels(&shortest_path(&perm).vertices);
    let want = "32415 53241 45321 34521";
    out.push(check("shortest path", &short, want, short == want));
    match longest_path(&perm, DEFAULT_STEP_BUDGET) {
        Ok(path) => {
            let long = labels(&path.vertices);
            let want = "32415 23415 52341 25341 32541 23541 42351 24351 32451 23451";
            out.push(check("longest path", &long, want, long == want));
            out.push(check("longest length", path.len(), 9, path.len() == 9));
        }
        Err(e) => out.push(check("longest path", e, "ok", false)),
    }
    let b = bumped_set(&perm).values;
    out.push(check("bumped set", format!("{b:?}"), "[2, 3, 4, 5]", b == vec![2, 3, 4, 5]));
    let lub = lub_bound(&perm);
    out.push(check("lub bound", lub, 15, lub == 15.0));
    let kids: BTreeSet<String> = p("42135").children().iter().map(Permutation::one_line).collect();
    let want: BTreeSet<String> = ["24135".to_string(), "54213".to_string()].into();
    out.push(check("children of 42135", format!("{kids:?}"), format!("{want:?}"), kids == want));
    out
}

fn sharp_bound() -> Vec<Check> {
    let mut bad = Vec::new();
    for n in 2..=SHARP_BOUND_MAX_N {
        let id = Permutation::identity(n);
        let expected = (1u64 << (n - 1)) - 1;
        let ell = longest_path_length(&id, DEFAULT_STEP_BUDGET);
        let exact = lub_bound_exact(&id) == BigRational::from_integer(expected.into());
        if ell != Ok(expected) || lub_bound(&id) != expected as f64 || !exact {
            bad.push(n);
        }
    }
    vec![check(
        format!("identity n=2..{SHARP_BOUND_MAX_N}: length and bound equal 2^(n-1)-1"),
        format!("failing n: {bad:?}"),
        "none",
        bad.is_empty(),
    )]
}

fn oracle_equivalence() -> Vec<Check> {
    let n = ORACLE_N;
    let (mut short_bad, mut long_bad, mut set_bad, mut chain_bad) = (0u64, 0u64, 0u64, 0u64);
    for rank in 0..factorial(n) {
        let perm = lehmer_unrank(n, rank);
        short_bad += u64::from(shortest_path(&perm).len() as u64 != brute_nearest_leaf(&perm));
        let Ok(long) = longest_path(&perm, DEFAULT_STEP_BUDGET) else {
            long_bad += 1;
            continue;
        };
        long_bad += u64::from(brute_farthest_leaf(&perm, u64::MAX) != Ok(long.len() as u64));
        let mut distinct = long.bumped_values.clone();
        distinct.sort_unstable();
        distinct.dedup();
        let set = bumped_set(&perm);
        set_bad += u64::from(set.values != distinct);
        if !set.is_empty() {
            let lub = lub_bound(&perm);
            let ok = long.len() as f64 <= lub
                && BOUND_XS.iter().all(|&x| simple_upper_bound(&perm, x).is_ok_and(|s| lub <= s * (1.0 + 1e-12)));
            chain_bad += u64::from(!ok);
        }
    }
    let total = factorial(n);
    vec![
        check(format!("S_{n} shortest = brute nearest (mismatches of {total})"), short_bad, 0, short_bad == 0),
        check(format!("S_{n} longest = brute farthest (mismatches of {total})"), long_bad, 0, long_bad == 0),
        check(format!("S_{n} bumped set = distinct bumped values"), set_bad, 0, set_bad == 0),
        check(format!("S_{n} length <= lub <= simple bound, x in {BOUND_XS:?}"), chain_bad, 0, chain_bad == 0),
    ]
}

fn limit_samplers(cfg: &SuiteConfig) -> Vec<Check> {
    let trials = cfg.scale.trials(LIMIT_SAMPLES);
    let nearest = sample_distribution("nearest", trials, sub_seed(cfg, 6, 0), limit_nearest_leaf);
    let farthest = sample_distribution("farthest", trials, sub_seed(cfg, 6, 1), limit_farthest_leaf);
    let scan = sample_distribution("scan", trials, sub_seed(cfg, 6, 2), limit_bumped_scan);
    let yule =
        sample_distribution("yule", trials, sub_seed(cfg, 6, 3), |r| yule_count(1.0, r).expect("t = 1 is valid"));
    let poi = Poisson::new(1.0).expect("unit mean");
    let geo = Geometric::inverse_e();
    let tvs = [
        ("TV(nearest leaf, Poi(1))", tv_distance(&nearest, &poi)),
        ("TV(farthest leaf, Geo(1/e))", tv_distance(&farthest, &geo)),
        ("TV(bumped scan, farthest leaf)", tv_distance(&scan, &farthest)),
        ("TV(Yule count at t=1, Geo(1/e))", tv_distance(&yule, &geo)),
    ];
    tvs.iter()
        .map(|&(name, tv)| check(format!("{name}, {trials} samples"), tv, format!("<= {LIMIT_TV}"), tv <= LIMIT_TV))
        .collect()
}

fn finite_limits(cfg: &SuiteConfig) -> Vec<Check> {
    let trials = cfg.scale.trials(FINITE_TRIALS);
    let mc = McConfig {
        xs: vec![],
        walk_budget: None,
        ..McConfig::new(FINITE_N, trials, sub_seed(cfg, 7, 0))
    };
    let stats = match mc_forest_stats(&mc) {
        Ok(s) => s,
        Err(e) => return vec![check("sampling", e, "ok", false)],
    };
    let m = stats.shortest.expect("paths enabled");
    let l = stats.longest.expect("paths enabled");
    let geo = Geometric::inverse_e();
    let e1 = std::f64::consts::E - 1.0;
    let sd_m = (1.0 / trials as f64).sqrt();
    let sd_l = ((1.0 - geo.q) / (geo.q * geo.q) / trials as f64).sqrt();
    let (mm, ml) = (m.mean(), l.mean());
    let tv_m = tv_distance(&m, &Poisson::new(1.0).expect("unit mean"));
    let tv_l = tv_distance(&l, &geo);
    vec![
        check(
            format!("n={FINITE_N}, {trials} trials: |mean M - 1|"),
            format!("{} (z = {:.2})", (mm - 1.0).abs(), (mm - 1.0) / sd_m),
            format!("<= {MEAN_M_TOL}"),
            (mm - 1.0).abs() <= MEAN_M_TOL,
        ),
        check("TV(M, Poi(1))", tv_m, format!("<= {FINITE_TV}"), tv_m <= FINITE_TV),
        check(
            "|mean L - (e - 1)|",
            format!("{} (z = {:.2})", (ml - e1).abs(), (ml - e1) / sd_l),
            format!("<= {MEAN_L_TOL}"),
            (ml - e1).abs() <= MEAN_L_TOL,
        ),
        check("TV(L, Geo(1/e))", tv_l, format!("<= {FINITE_TV}"), tv_l <= FINITE_TV),
        check("M <= L and |B_x| <= |B| on every sample", stats.invariant_violations, 0, stats.invariant_violations == 0),
    ]
}

fn local_convergence(cfg: &SuiteConfig) -> Vec<Check> {
    [(1usize, RBALL_R1_TRIALS, RBALL_R1_TV), (2, RBALL_R2_TRIALS, RBALL_R2_TV)]
        .iter()
        .map(|&(r, full, bound)| {
            let trials = cfg.scale.trials(full);
            match rball_histogram_compare(RBALL_N, r, trials, sub_seed(cfg, 8, r as u64)) {
                Ok(cmp) => check(
                    format!("n={RBALL_N}, r={r}, {trials} per side: TV of ball shapes"),
                    format!("{} ({} vs {} shapes)", cmp.tv, cmp.forest.len(), cmp.limit.len()),
                    format!("<= {bound}"),
                    cmp.tv <= bound,
                ),
                Err(e) => check(format!("r={r}"), e, "ok", false),
            }
        })
        .collect()
}

fn indicator_experiment() -> Vec<Check> {
    let mut out = Vec::new();
    let mut tvs = Vec::new();
    for n in INDICATOR_NS {
        match indicator_tv_experiment(n, 1, &[1]) {
            Ok(res) => {
                let limit = res.bound.min(1.0);
                out.push(check(
                    format!("n={n}, r=1: exact TV <= min(1, 18/(n-2))"),
                    res.exact_tv,
                    format!("<= {limit}"),
                    res.exact_tv <= limit,
                ));
                tvs.push(res.exact_tv);
            }
            Err(e) => out.push(check(format!("n={n}"), e, "ok", false)),
        }
    }
    let decreasing = tvs.len() == INDICATOR_NS.len() && tvs.windows(2).all(|w| w[1] < w[0]);
    out.push(check("exact TV strictly decreasing in n", format!("{tvs:?}"), "strictly decreasing", decreasing));
    out
}

fn tail_bounds(cfg: &SuiteConfig) -> Vec<Check> {
    let trials = cfg.scale.trials(TAIL_TRIALS);
    let mc = McConfig {
        xs: vec![BX_X],
        with_paths: false,
        walk_budget: None,
        ..McConfig::new(TAIL_N, trials, sub_seed(cfg, 10, 0))
    };
    let stats = match mc_forest_stats(&mc) {
        Ok(s) => s,
        Err(e) => return vec![check("sampling", e, "ok", false)],
    };
    let mut out = Vec::new();
    match tail_decay_check(&stats.bumped, TAIL_C, TAIL_K_MAX, TAIL_MIN_SUPPORT) {
        Ok(decay) => {
            for row in &decay.rows {
                out.push(check(
                    format!("n={TAIL_N}, {trials} trials: P[|B| >= {}] ({} samples)", row.k, row.supporting),
                    row.empirical,
                    format!("<= {TAIL_C}^{} = {}", row.k, row.bound),
                    row.pass,
                ));
            }
            let tested = decay.rows.len();
            out.push(check("k values with enough support", tested, ">= 1", tested >= 1));
        }
        Err(e) => out.push(check("tail decay", e, "ok", false)),
    }
    match bx_tail_table(&stats.bumped_x[0], TAIL_N, BX_X, &BX_TS) {
        Ok(table) => {
            for row in &table.rows {
                let z = row.z.map_or("n/a".to_owned(), |z| format!("{z:.2}"));
                out.push(check(
                    format!("P[|B_x| >= {}], x={BX_X}", row.t),
                    format!("{} (z = {z})", row.empirical),
                    format!("<= {} + 3 * {}", row.bound, row.sigma),
                    row.pass,
                ));
            }
        }
        Err(e) => out.push(check("B_x tail", e, "ok", false)),
    }
    out
}

fn identity_probe(cfg: &SuiteConfig) -> Vec<Check> {
    let trials = cfg.scale.trials(PROBE_TRIALS);
    let budget = match cfg.scale {
        Scale::Full => PROBE_WALK_BUDGET,
        Scale::Quick => PROBE_WALK_BUDGET / 16,
    };
    PROBE_NS
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let mc = McConfig {
                xs: vec![],
                with_paths: false,
                walk_budget: Some(budget),
                ..McConfig::new(n, trials, sub_seed(cfg, 11, i as u64))
            };
            match mc_forest_stats(&mc) {
                Ok(stats) => {
                    let probe = identity_tree_probe(&stats);
                    check(
                        format!("n={n}, {trials} trials, walk budget {budget}: n * P[in identity tree]"),
                        format!(
                            "in [{}, {}] ({} hits, {} walks censored)",
                            probe.scaled_low, probe.scaled_high, probe.hits, probe.censored
                        ),
                        format!("within [{}, {}]", probe.lower, probe.upper),
                        probe.pass,
                    )
                }
                Err(e) => check(format!("n={n}"), e, "ok", false),
            }
        })
        .collect()
}

fn structural(cfg: &SuiteConfig) -> Vec<Check> {
    let trips = cfg.scale.trials(ROUND_TRIPS);
    let cases = cfg.scale.trials(MUTATION_CASES);
    let mut rng = rng::stream(sub_seed(cfg, 12, 0), 0);
    let w = ROUND_TRIP_WINDOW;

    // bump an atom, then put it back
    let (mut done, mut bad_bf) = (0u64, 0u64);
    while done < trips {
        let fam = PointProcessFamily::lazy(rng::child_seed(&mut rng));
        let atoms = fam.level(0);
        if atoms.is_empty() {
            continue;
        }
        let x = atoms[rng.gen_range(0..atoms.len())];
        let back = fam.forward_map(x).and_then(|f| f.backward_map(x));
        bad_bf += u64::from(!back.is_ok_and(|b| b.window(-w..=w) == fam.window(-w..=w)));
        done += 1;
    }
    // insert an atom, then bump it
    let mut bad_fb = 0u64;
    for _ in 0..trips {
        let fam = PointProcessFamily::lazy(rng::child_seed(&mut rng));
        let u: f64 = rng.sample(Open01);
        let back = fam.backward_map(u).and_then(|b| b.forward_map(u));
        bad_fb += u64::from(!back.is_ok_and(|f| f.window(-w..=w) == fam.window(-w..=w)));
    }

    // levels outside -(r-1)..=r-1 never reach the radius-r ball
    let mut bad_mut = 0u64;
    for r in 1..=3usize {
        let reach = r as i64 - 1;
        for _ in 0..cases {
            let levels = PointProcessFamily::sample_window(-reach..=reach, &mut rng).window(-reach..=reach);
            let u = SpineInput::new((0..r).map(|_| rng.sample(Open01)).collect());
            let mut mutated = levels.clone();
            for k in [-reach - 2, -reach - 1, reach + 1, reach + 2] {
                mutated.insert(k, (0..3).map(|_| rng.sample::<f64, _>(Open01)).collect());
            }
            let shape = |lv: BTreeMap<i64, Vec<f64>>| {
                let fam = PointProcessFamily::from_levels(lv)?;
                build_r_ball_limit(u.as_ref().map_err(Clone::clone)?, &fam, r).map(|b| b.shape)
            };
            match (shape(levels), shape(mutated)) {
                (Ok(a), Ok(b)) if a == b => {}
                _ => bad_mut += 1,
            }
        }
    }

    let quick = SuiteConfig { seed: cfg.seed, scale: Scale::Quick };
    let ids: Vec<u8> = (1..=11).collect();
    let first = serde_json::to_vec(&run_selected(&ids, &quick)).expect("report serializes");
    let second = serde_json::to_vec(&run_selected(&ids, &quick)).expect("report serializes");

    vec![
        check(format!("backward(forward(x)) = identity, {trips} random families"), bad_bf, 0, bad_bf == 0),
        check(format!("forward(backward(u)) = identity, {trips} random families"), bad_fb, 0, bad_fb == 0),
        check(
            format!("radius-r ball unchanged by levels outside the window, r = 1..3, {cases} cases each"),
            bad_mut,
            0,
            bad_mut == 0,
        ),
        check(
            "two quick-scale suite runs serialize identically",
            format!("{} and {} bytes, equal: {}", first.len(), second.len(), first == second),
            "equal",
            first == second,
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derangement_numbers() {
        let d: Vec<u64> = (0..=8).map(derangements).collect();
        assert_eq!(d, vec![1, 0, 1, 2, 9, 44, 265, 1854, 14833]);
    }

    #[test]
    fn exact_criteria_pass() {
        let cfg = SuiteConfig::default();
        for id in [1, 2, 3, 4, 5, 9] {
            let outcome = run_criterion(id, &cfg);
            assert!(outcome.pass, "{outcome:#?}");
        }
    }

    #[test]
    fn quick_scale_divides_trials() {
        assert_eq!(Scale::Quick.trials(1_000_000), 10_000);
        assert_eq!(Scale::Quick.trials(10_000), 1000);
        assert_eq!(Scale::Quick.trials(500), 500);
        assert_eq!(Scale::Full.trials(500), 500);
    }
}
