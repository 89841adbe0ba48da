//! Empirical and theoretical laws on the nonnegative integers, total
//! variation distance, and the Monte Carlo and exact-enumeration drivers
//! comparing `F_n` with its limit.
//!
//! Monte Carlo work is split into chunks of [`CHUNK`] trials; chunk `c` draws
//! from `rng::stream(seed, c)` (or a fixed relabelling of `c`), so results do
//! not depend on how many worker threads rayon uses.

use std::collections::BTreeMap;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forest::{factorial, lehmer_unrank, local_r_ball};
use crate::limit::sample_limit_ball;
use crate::paths::{b_x_from_set, bumped_set, longest_path_length, shortest_path_length, DEFAULT_STEP_BUDGET};
use crate::permutation::Permutation;
use crate::rng::{self, StreamRng};

/// Trials per Monte Carlo chunk.
pub const CHUNK: u64 = 1024;

/// Padding past the largest observed value before theoretical tails are
/// folded into a single residual term.
pub const TV_PAD: u64 = 64;

/// Largest theoretical tail allowed in the residual of [`tv_distance`].
pub const TV_TAIL_EPS: f64 = 1e-12;

/// Largest `n` accepted by exhaustive Monte Carlo mode.
pub const MAX_EXHAUSTIVE_N: usize = 10;

/// Default number of sort steps spent looking for the base of each sample.
pub const DEFAULT_WALK_BUDGET: u64 = 1 << 12;

/// Default cap on `(n − r)!` for [`indicator_law_exact`].
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 5040;

/// Runs `f` on consecutive chunks of `trials`, in parallel, returning the
/// per-chunk results in chunk order. `stream_of(c)` picks the RNG stream.
pub fn chunked<T, F, S>(trials: u64, seed: u64, stream_of: S, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut StreamRng, u64) -> T + Sync,
    S: Fn(u64) -> u64 + Sync,
{
    let chunks = trials.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = rng::stream(seed, stream_of(c));
            f(&mut rng, CHUNK.min(trials - c * CHUNK))
        })
        .collect()
}

/// Draws `trials` values of `sample` into an empirical distribution.
pub fn sample_distribution<F>(label: &str, trials: u64, seed: u64, sample: F) -> EmpiricalDistribution
where
    F: Fn(&mut StreamRng) -> u64 + Sync,
{
    let parts = chunked(trials, seed, |c| c, |rng, count| {
        let mut d = EmpiricalDistribution::new(label, Some(seed));
        for _ in 0..count {
            d.record(sample(rng));
        }
        d
    });
    merge_all(label, Some(seed), parts)
}

fn merge_all(label: &str, seed: Option<u64>, parts: Vec<EmpiricalDistribution>) -> EmpiricalDistribution {
    parts.into_iter().fold(EmpiricalDistribution::new(label, seed), |mut acc, d| {
        acc.merge(&d);
        acc
    })
}

// ---------------------------------------------------------------------------
// Laws
// ---------------------------------------------------------------------------

/// Counts of observed nonnegative integer values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDistribution {
    pub label: String,
    pub seed: Option<u64>,
    counts: BTreeMap<u64, u64>,
    total: u64,
}

impl EmpiricalDistribution {
    pub fn new(label: impl Into<String>, seed: Option<u64>) -> Self {
        Self { label: label.into(), seed, counts: BTreeMap::new(), total: 0 }
    }

    pub fn from_values<I: IntoIterator<Item = u64>>(label: impl Into<String>, seed: Option<u64>, values: I) -> Self {
        let mut d = Self::new(label, seed);
        values.into_iter().for_each(|v| d.record(v));
        d
    }

    pub fn record(&mut self, value: u64) {
        self.record_n(value, 1);
    }

    pub fn record_n(&mut self, value: u64, weight: u64) {
        if weight > 0 {
            *self.counts.entry(value).or_insert(0) += weight;
            self.total += weight;
        }
    }

    /// Adds the counts of `other`; label and seed of `self` are kept.
    pub fn merge(&mut self, other: &Self) {
        for (&v, &c) in &other.counts {
            self.record_n(v, c);
        }
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn counts(&self) -> &BTreeMap<u64, u64> {
        &self.counts
    }

    pub fn count(&self, value: u64) -> u64 {
        self.counts.get(&value).copied().unwrap_or(0)
    }

    /// Number of samples `>= k`.
    pub fn tail_count(&self, k: u64) -> u64 {
        self.counts.range(k..).map(|(_, &c)| c).sum()
    }

    pub fn max_value(&self) -> Option<u64> {
        self.counts.keys().next_back().copied()
    }

    pub fn probability(&self, value: u64) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        self.count(value) as f64 / self.total as f64
    }

    /// `(value, probability)` for every observed value, ascending.
    pub fn pmf(&self) -> Vec<(u64, f64)> {
        let total = self.total as f64;
        self.counts.iter().map(|(&v, &c)| (v, c as f64 / total)).collect()
    }

    /// Raw moments `E[X^p]` for `p = 1..=4`.
    pub fn raw_moments(&self) -> [f64; 4] {
        let mut m = [0.0; 4];
        if self.total == 0 {
            return m;
        }
        for (&v, &c) in &self.counts {
            let (v, c) = (v as f64, c as f64);
            let mut pow = 1.0;
            for slot in m.iter_mut() {
                pow *= v;
                *slot += c * pow;
            }
        }
        m.map(|s| s / self.total as f64)
    }

    pub fn mean(&self) -> f64 {
        self.raw_moments()[0]
    }
}

/// A probability law on `{0, 1, 2, …}`.
pub trait DiscreteLaw {
    fn pmf(&self, j: u64) -> f64;
    /// `P[X >= j]`.
    fn tail(&self, j: u64) -> f64;
    /// Largest value with positive mass, when finite.
    fn support_max(&self) -> Option<u64>;
}

impl DiscreteLaw for EmpiricalDistribution {
    fn pmf(&self, j: u64) -> f64 {
        self.probability(j)
    }

    fn tail(&self, j: u64) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        self.tail_count(j) as f64 / self.total as f64
    }

    fn support_max(&self) -> Option<u64> {
        Some(self.max_value().unwrap_or(0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Poisson {
    pub lambda: f64,
}

impl Poisson {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Domain(format!("Poisson mean must be positive, got {lambda}")));
        }
        Ok(Self { lambda })
    }
}

fn ln_factorial(j: u64) -> f64 {
    (2..=j).map(|i| (i as f64).ln()).sum()
}

impl DiscreteLaw for Poisson {
    fn pmf(&self, j: u64) -> f64 {
        (-self.lambda + j as f64 * self.lambda.ln() - ln_factorial(j)).exp()
    }

    fn tail(&self, j: u64) -> f64 {
        if j == 0 {
            return 1.0;
        }
        let mut term = self.pmf(j);
        let mut sum = 0.0;
        let mut i = j;
        while term > 0.0 && (term > sum * 1e-17 || (i as f64) < self.lambda) {
            sum += term;
            i += 1;
            term *= self.lambda / i as f64;
        }
        sum
    }

    fn support_max(&self) -> Option<u64> {
        None
    }
}

/// Geometric law on `{0, 1, …}` with `P[X = j] = (1 − q)^j q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometric {
    pub q: f64,
}

impl Geometric {
    pub fn new(q: f64) -> Result<Self> {
        if !(q > 0.0 && q <= 1.0) {
            return Err(Error::Domain(format!("geometric parameter must lie in (0, 1], got {q}")));
        }
        Ok(Self { q })
    }

    /// The law of the longest path length in the limit, `Geo(1/e)`.
    pub fn inverse_e() -> Self {
        Self { q: (-1.0f64).exp() }
    }
}

impl DiscreteLaw for Geometric {
    fn pmf(&self, j: u64) -> f64 {
        (1.0 - self.q).powf(j as f64) * self.q
    }

    fn tail(&self, j: u64) -> f64 {
        (1.0 - self.q).powf(j as f64)
    }

    fn support_max(&self) -> Option<u64> {
        (self.q == 1.0).then_some(0)
    }
}

pub fn poisson_pmf(lambda: f64, j: u64) -> Result<f64> {
    Ok(Poisson::new(lambda)?.pmf(j))
}

pub fn geometric_pmf(q: f64, j: u64) -> Result<f64> {
    Ok(Geometric::new(q)?.pmf(j))
}

/// `E[X^p]` by direct summation until the remaining tail is negligible.
pub fn raw_moment<L: DiscreteLaw + ?Sized>(law: &L, p: i32) -> f64 {
    let mut sum = 0.0;
    let mut j = 0u64;
    loop {
        sum += law.pmf(j) * (j as f64).powi(p);
        j += 1;
        if let Some(max) = law.support_max() {
            if j > max {
                return sum;
            }
        }
        if j > 16 && law.tail(j) * (j as f64).powi(p + 2) < 1e-15 {
            return sum;
        }
    }
}

/// Total variation distance `½ Σ_j |p_j − q_j|`.
///
/// Sums exactly up to the largest observed value plus [`TV_PAD`], extended
/// until every theoretical tail is below [`TV_TAIL_EPS`]; the remaining tails
/// enter as `½ (P[X > j_max] + P[Y > j_max])`.
pub fn tv_distance<P, Q>(p: &P, q: &Q) -> f64
where
    P: DiscreteLaw + ?Sized,
    Q: DiscreteLaw + ?Sized,
{
    let (sp, sq) = (p.support_max(), q.support_max());
    let mut j_max = match (sp, sq) {
        (Some(a), Some(b)) => a.max(b),
        _ => sp.into_iter().chain(sq).max().unwrap_or(0) + TV_PAD,
    };
    while p.tail(j_max + 1).max(q.tail(j_max + 1)) >= TV_TAIL_EPS {
        j_max += TV_PAD;
    }
    let body: f64 = (0..=j_max).map(|j| (p.pmf(j) - q.pmf(j)).abs()).sum();
    let residual = p.tail(j_max + 1) + q.tail(j_max + 1);
    (0.5 * (body + residual)).clamp(0.0, 1.0)
}

/// TV distance between two histograms over arbitrary categories.
pub fn tv_histograms<K: Ord>(a: &BTreeMap<K, u64>, b: &BTreeMap<K, u64>) -> f64 {
    let ta: u64 = a.values().sum();
    let tb: u64 = b.values().sum();
    if ta == 0 || tb == 0 {
        return if ta == tb { 0.0 } else { 1.0 };
    }
    let pa = |k: &K| a.get(k).copied().unwrap_or(0) as f64 / ta as f64;
    let pb = |k: &K| b.get(k).copied().unwrap_or(0) as f64 / tb as f64;
    let mut sum: f64 = a.keys().map(|k| (pa(k) - pb(k)).abs()).sum();
    sum += b.keys().filter(|k| !a.contains_key(k)).map(pb).sum::<f64>();
    (0.5 * sum).clamp(0.0, 1.0)
}

/// `Σ_α |a_α − b_α|`, which bounds the TV distance between vectors of
/// independent Poissons with means `a` and `b`.
pub fn poisson_vector_tv_bound(means_a: &[f64], means_b: &[f64]) -> Result<f64> {
    if means_a.len() != means_b.len() {
        return Err(Error::Domain(format!(
            "mean vectors differ in length ({} vs {})",
            means_a.len(),
            means_b.len()
        )));
    }
    Ok(means_a.iter().zip(means_b).map(|(a, b)| (a - b).abs()).sum())
}

// ---------------------------------------------------------------------------
// Monte Carlo over F_n
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub n: usize,
    pub trials: u64,
    pub seed: u64,
    /// Thresholds for `|B_x|`.
    pub xs: Vec<f64>,
    /// Compute shortest and longest path lengths.
    pub with_paths: bool,
    pub step_budget: u64,
    /// Sort steps allowed when walking to the base; `None` skips the walk.
    pub walk_budget: Option<u64>,
    /// Enumerate all of `S_n` once instead of sampling.
    pub exhaustive: bool,
}

impl McConfig {
    pub fn new(n: usize, trials: u64, seed: u64) -> Self {
        Self {
            n,
            trials,
            seed,
            xs: vec![1.0, 2.0],
            with_paths: true,
            step_budget: DEFAULT_STEP_BUDGET,
            walk_budget: Some(DEFAULT_WALK_BUDGET),
            exhaustive: false,
        }
    }

    pub fn exhaustive(n: usize) -> Self {
        Self { exhaustive: true, trials: factorial(n), ..Self::new(n, 0, 0) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestStats {
    pub config: McConfig,
    pub samples: u64,
    pub shortest: Option<EmpiricalDistribution>,
    pub longest: Option<EmpiricalDistribution>,
    pub bumped: EmpiricalDistribution,
    pub bumped_x: Vec<EmpiricalDistribution>,
    pub base_distance: Option<EmpiricalDistribution>,
    /// Samples whose walk to the base ran out of budget.
    pub base_censored: u64,
    /// Samples whose base was reached and is the identity.
    pub identity_tree: u64,
    /// Samples breaking `M ≤ L` or `|B_x| ≤ |B|`; always zero.
    pub invariant_violations: u64,
}

impl ForestStats {
    fn empty(config: &McConfig) -> Self {
        let seed = (!config.exhaustive).then_some(config.seed);
        let dist = |label: &str| EmpiricalDistribution::new(label, seed);
        Self {
            config: config.clone(),
            samples: 0,
            shortest: config.with_paths.then(|| dist("M")),
            longest: config.with_paths.then(|| dist("L")),
            bumped: dist("|B|"),
            bumped_x: config.xs.iter().map(|x| dist(&format!("|B_x| x={x}"))).collect(),
            base_distance: config.walk_budget.map(|_| dist("R")),
            base_censored: 0,
            identity_tree: 0,
            invariant_violations: 0,
        }
    }

    fn record(&mut self, perm: &Permutation) -> Result<()> {
        let cfg = &self.config;
        let b = bumped_set(perm);
        let mut bad = false;
        if cfg.with_paths {
            let m = shortest_path_length(perm);
            let l = longest_path_length(perm, cfg.step_budget)?;
            bad |= m > l;
            self.shortest.as_mut().expect("paths enabled").record(m);
            self.longest.as_mut().expect("paths enabled").record(l);
        }
        for (x, d) in cfg.xs.iter().zip(self.bumped_x.iter_mut()) {
            let bx = b_x_from_set(&b, *x).len() as u64;
            bad |= bx > b.len() as u64;
            d.record(bx);
        }
        self.bumped.record(b.len() as u64);
        if let (Some(budget), Some(d)) = (cfg.walk_budget, self.base_distance.as_mut()) {
            match perm.walk_to_base_within(budget) {
                Ok((steps, base)) => {
                    d.record(steps);
                    self.identity_tree += u64::from(base.is_identity());
                }
                Err(Error::BudgetExceeded { .. }) => self.base_censored += 1,
                Err(e) => return Err(e),
            }
        }
        self.invariant_violations += u64::from(bad);
        self.samples += 1;
        Ok(())
    }

    fn merge(&mut self, other: &Self) {
        fn merge_opt(a: &mut Option<EmpiricalDistribution>, b: &Option<EmpiricalDistribution>) {
            if let (Some(a), Some(b)) = (a.as_mut(), b.as_ref()) {
                a.merge(b);
            }
        }
        merge_opt(&mut self.shortest, &other.shortest);
        merge_opt(&mut self.longest, &other.longest);
        merge_opt(&mut self.base_distance, &other.base_distance);
        self.bumped.merge(&other.bumped);
        for (a, b) in self.bumped_x.iter_mut().zip(&other.bumped_x) {
            a.merge(b);
        }
        self.samples += other.samples;
        self.base_censored += other.base_censored;
        self.identity_tree += other.identity_tree;
        self.invariant_violations += other.invariant_violations;
    }
}

/// Per-sample path statistics over uniform permutations of size `n`, or
/// over all of `S_n` (weight one each) in exhaustive mode.
pub fn mc_forest_stats(config: &McConfig) -> Result<ForestStats> {
    let n = config.n;
    if n < 1 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    if let Some(x) = config.xs.iter().find(|x| x.is_nan() || **x <= 0.0) {
        return Err(Error::Domain(format!("x must be positive, got {x}")));
    }
    let parts: Vec<Result<ForestStats>> = if config.exhaustive {
        if n > MAX_EXHAUSTIVE_N {
            return Err(Error::SizeLimit { n, max: MAX_EXHAUSTIVE_N });
        }
        let total = factorial(n);
        (0..total.div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| {
                let mut part = ForestStats::empty(config);
                for rank in c * CHUNK..total.min((c + 1) * CHUNK) {
                    part.record(&lehmer_unrank(n, rank))?;
                }
                Ok(part)
            })
            .collect()
    } else {
        if config.trials == 0 {
            return Err(Error::Domain("trials must be at least 1".into()));
        }
        chunked(config.trials, config.seed, |c| c, |rng, count| {
            let mut part = ForestStats::empty(config);
            for _ in 0..count {
                part.record(&Permutation::random(n, rng))?;
            }
            Ok(part)
        })
    };
    let mut stats = ForestStats::empty(config);
    for part in parts {
        stats.merge(&part?);
    }
    if config.exhaustive {
        stats.config.trials = stats.samples;
    }
    log::debug!("mc_forest_stats n={} samples={} censored={}", n, stats.samples, stats.base_censored);
    Ok(stats)
}

/// Membership of the identity tree, scaled by `n`, against the window
/// `[1 − 3σ, e + 3σ]`. Censored walks are counted on both sides: the check
/// passes only if every resolution of them would.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityTreeProbe {
    pub n: usize,
    pub trials: u64,
    pub hits: u64,
    pub censored: u64,
    pub scaled_low: f64,
    pub scaled_high: f64,
    pub sigma: f64,
    pub lower: f64,
    pub upper: f64,
    pub pass: bool,
}

pub fn identity_tree_probe(stats: &ForestStats) -> IdentityTreeProbe {
    let n = stats.config.n;
    let trials = stats.samples.max(1);
    let nf = n as f64;
    let p = (std::f64::consts::E / nf).min(1.0);
    let sigma = nf * (p * (1.0 - p) / trials as f64).sqrt();
    let scaled_low = nf * stats.identity_tree as f64 / trials as f64;
    let scaled_high = nf * (stats.identity_tree + stats.base_censored) as f64 / trials as f64;
    let lower = 1.0 - 3.0 * sigma;
    let upper = std::f64::consts::E + 3.0 * sigma;
    IdentityTreeProbe {
        n,
        trials: stats.samples,
        hits: stats.identity_tree,
        censored: stats.base_censored,
        scaled_low,
        scaled_high,
        sigma,
        lower,
        upper,
        pass: stats.config.walk_budget.is_some() && scaled_low >= lower && scaled_high <= upper,
    }
}

/// Observed `E[L_n^2]` against the second moment of `Geo(1/e)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentProbe {
    pub n: usize,
    pub observed: f64,
    pub expected: f64,
    pub relative_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn second_moment_probe(stats: &ForestStats, tolerance: f64) -> Option<MomentProbe> {
    let observed = stats.longest.as_ref()?.raw_moments()[1];
    let expected = raw_moment(&Geometric::inverse_e(), 2);
    let relative_error = (observed - expected).abs() / expected;
    Some(MomentProbe {
        n: stats.config.n,
        observed,
        expected,
        relative_error,
        tolerance,
        pass: relative_error <= tolerance,
    })
}

// ---------------------------------------------------------------------------
// r-ball histograms
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RballComparison {
    pub n: usize,
    pub r: usize,
    pub trials: u64,
    pub seed: u64,
    /// Canonical shape code → count.
    pub forest: BTreeMap<String, u64>,
    pub limit: BTreeMap<String, u64>,
    pub tv: f64,
}

/// Shapes of `r`-balls around uniform `π_n` against shapes of `r`-balls
/// around the root of the limit tree, `trials` samples per side.
pub fn rball_histogram_compare(n: usize, r: usize, trials: u64, seed: u64) -> Result<RballComparison> {
    if n < 1 || trials == 0 {
        return Err(Error::Domain("need n >= 1 and trials >= 1".into()));
    }
    let tally = |parts: Vec<BTreeMap<String, u64>>| {
        let mut acc = BTreeMap::new();
        for part in parts {
            for (k, c) in part {
                *acc.entry(k).or_insert(0) += c;
            }
        }
        acc
    };
    let forest = tally(chunked(trials, seed, |c| 2 * c, |rng, count| {
        let mut h = BTreeMap::new();
        for _ in 0..count {
            let shape = local_r_ball(&Permutation::random(n, rng), r).shape();
            *h.entry(shape.code).or_insert(0u64) += 1;
        }
        h
    }));
    let limit = tally(chunked(trials, seed, |c| 2 * c + 1, |rng, count| {
        let mut h = BTreeMap::new();
        for _ in 0..count {
            *h.entry(sample_limit_ball(r, rng).code).or_insert(0u64) += 1;
        }
        h
    }));
    let tv = tv_histograms(&forest, &limit);
    Ok(RballComparison { n, r, trials, seed, forest, limit, tv })
}

// ---------------------------------------------------------------------------
// Exact law of the separation indicators
// ---------------------------------------------------------------------------

/// `(i, k)`: position `i` is `k`-separated, `π(i) = i + k`.
pub type IndicatorIndex = (usize, i64);

/// Exact law of the separation indicators over the index set
/// `{(i, k) : |k| ≤ r − 1, i > r, 1 ≤ i + k ≤ n}` for a uniform permutation
/// conditioned on `π(1..=r) = a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorLaw {
    pub n: usize,
    pub r: usize,
    pub a: Vec<u32>,
    pub index_set: Vec<IndicatorIndex>,
    /// Set of firing indicators → number of conditioned permutations.
    pub counts: BTreeMap<Vec<IndicatorIndex>, u64>,
    /// `(n − r)!`.
    pub denominator: u64,
}

impl IndicatorLaw {
    pub fn probability(&self, active: &[IndicatorIndex]) -> Ratio<u64> {
        Ratio::new(self.counts.get(active).copied().unwrap_or(0), self.denominator)
    }

    pub fn total_probability(&self) -> Ratio<u64> {
        Ratio::new(self.counts.values().sum(), self.denominator)
    }

    pub fn support_size(&self) -> usize {
        self.counts.len()
    }
}

pub fn indicator_index_set(n: usize, r: usize) -> Vec<IndicatorIndex> {
    let reach = r as i64 - 1;
    let mut set = Vec::new();
    for i in r + 1..=n {
        for k in -reach..=reach {
            let target = i as i64 + k;
            if (1..=n as i64).contains(&target) {
                set.push((i, k));
            }
        }
    }
    set
}

pub fn indicator_law_exact(n: usize, r: usize, a: &[u32]) -> Result<IndicatorLaw> {
    indicator_law_exact_with_budget(n, r, a, DEFAULT_ENUMERATION_BUDGET)
}

pub fn indicator_law_exact_with_budget(n: usize, r: usize, a: &[u32], budget: u64) -> Result<IndicatorLaw> {
    if r == 0 {
        return Err(Error::Domain("the indicator index set is empty unless r >= 1".into()));
    }
    if r > n || a.len() != r {
        return Err(Error::Domain(format!("need r <= n and exactly r = {r} conditioning values, got {}", a.len())));
    }
    let mut used = vec![false; n + 1];
    for (idx, &v) in a.iter().enumerate() {
        if v == 0 || v as usize > n {
            return Err(Error::OutOfRange { position: idx + 1, value: v as i64, n });
        }
        if std::mem::replace(&mut used[v as usize], true) {
            return Err(Error::Duplicate { position: idx + 1, value: v });
        }
    }
    let m = n - r;
    if m > 20 || factorial(m) > budget {
        return Err(Error::BudgetExceeded { what: "conditioned permutations", budget });
    }
    let denominator = factorial(m);
    let rest: Vec<u32> = (1..=n as u32).filter(|&v| !used[v as usize]).collect();
    let index_set = indicator_index_set(n, r);
    let counts = (0..denominator)
        .into_par_iter()
        .fold(BTreeMap::new, |mut acc: BTreeMap<Vec<IndicatorIndex>, u64>, rank| {
            let order = if m == 0 { Vec::new() } else { lehmer_unrank(m, rank).into_values() };
            let value_at = |i: usize| if i <= r { a[i - 1] } else { rest[order[i - r - 1] as usize - 1] };
            let active: Vec<IndicatorIndex> =
                index_set.iter().copied().filter(|&(i, k)| value_at(i) as i64 == i as i64 + k).collect();
            *acc.entry(active).or_insert(0) += 1;
            acc
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (k, c) in b {
                *a.entry(k).or_insert(0) += c;
            }
            a
        });
    Ok(IndicatorLaw { n, r, a: a.to_vec(), index_set, counts, denominator })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorTv {
    pub n: usize,
    pub r: usize,
    pub a: Vec<u32>,
    pub index_count: usize,
    pub support_size: usize,
    pub exact_tv: f64,
    /// `(16r² + 2r) / (n − r − 1)`.
    pub bound: f64,
}

/// TV distance between the indicator law and independent `Poi(1/n)`
/// coordinates over the same index set.
///
/// The product law puts mass `e^{−|I|/n} n^{−|s|}` on a 0/1 configuration
/// `s`; everything it puts outside the indicator support (including any
/// coordinate `≥ 2`) is collected as one complementary term.
pub fn indicator_tv_experiment(n: usize, r: usize, a: &[u32]) -> Result<IndicatorTv> {
    if n < r + 2 {
        return Err(Error::Domain(format!("need n >= r + 2, got n = {n}, r = {r}")));
    }
    let law = indicator_law_exact(n, r, a)?;
    let nf = n as f64;
    let base = (-(law.index_set.len() as f64) / nf).exp();
    let mut body = 0.0;
    let mut covered = 0.0;
    for (active, &count) in &law.counts {
        let p_law = count as f64 / law.denominator as f64;
        let p_prod = base * nf.powi(-(active.len() as i32));
        body += (p_law - p_prod).abs();
        covered += p_prod;
    }
    let exact_tv = 0.5 * (body + (1.0 - covered));
    let rf = r as f64;
    Ok(IndicatorTv {
        n,
        r,
        a: a.to_vec(),
        index_count: law.index_set.len(),
        support_size: law.support_size(),
        exact_tv,
        bound: (16.0 * rf * rf + 2.0 * rf) / (nf - rf - 1.0),
    })
}

// ---------------------------------------------------------------------------
// Tail checks
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub k: u64,
    pub supporting: u64,
    pub empirical: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailDecayCheck {
    pub c: f64,
    pub rows: Vec<TailRow>,
    pub pass: bool,
}

/// `P̂[X ≥ k] ≤ c^k` for `1 ≤ k ≤ k_max`, skipping `k` with fewer than
/// `min_support` samples `≥ k`.
pub fn tail_decay_check(dist: &EmpiricalDistribution, c: f64, k_max: u64, min_support: u64) -> Result<TailDecayCheck> {
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::Domain(format!("decay base must lie in (0, 1), got {c}")));
    }
    let rows: Vec<TailRow> = (1..=k_max)
        .map(|k| {
            let supporting = dist.tail_count(k);
            let empirical = dist.tail(k);
            let bound = c.powi(k as i32);
            TailRow { k, supporting, empirical, bound, pass: empirical <= bound }
        })
        .filter(|row| row.supporting >= min_support)
        .collect();
    let pass = rows.iter().all(|r| r.pass);
    Ok(TailDecayCheck { c, rows, pass })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BxTailRow {
    pub t: u64,
    pub empirical: f64,
    pub bound: f64,
    pub sigma: f64,
    /// `(empirical − bound) / σ`; absent when the bound is at least 1.
    pub z: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BxTailCheck {
    pub n: usize,
    pub x: f64,
    pub trials: u64,
    pub rows: Vec<BxTailRow>,
    pub pass: bool,
}

/// Compares `P̂[|B_x| ≥ t]` with `(e x / t)^t`, allowing `3σ` of binomial
/// error where `σ² = p(1 − p)/N` and `p = min(bound, 1)`.
pub fn bx_tail_table(dist: &EmpiricalDistribution, n: usize, x: f64, ts: &[u64]) -> Result<BxTailCheck> {
    if x.is_nan() || x <= 0.0 {
        return Err(Error::Domain(format!("x must be positive, got {x}")));
    }
    if let Some(t) = ts.iter().find(|&&t| t == 0 || t as f64 > n as f64 - x) {
        return Err(Error::Domain(format!("need 1 <= t <= n - x, got t = {t}")));
    }
    let trials = dist.total();
    let rows: Vec<BxTailRow> = ts
        .iter()
        .map(|&t| {
            let tf = t as f64;
            let bound = (std::f64::consts::E * x / tf).powf(tf);
            let empirical = dist.tail(t);
            let p = bound.min(1.0);
            let sigma = (p * (1.0 - p) / trials.max(1) as f64).sqrt();
            let z = (sigma > 0.0).then(|| (empirical - bound) / sigma);
            BxTailRow { t, empirical, bound, sigma, z, pass: empirical <= bound + 3.0 * sigma }
        })
        .collect();
    let pass = rows.iter().all(|r| r.pass);
    Ok(BxTailCheck { n, x, trials, rows, pass })
}

/// Samples `|B_x|` and runs [`bx_tail_table`].
pub fn bx_tail_check(n: usize, x: f64, ts: &[u64], trials: u64, seed: u64) -> Result<BxTailCheck> {
    let config = McConfig { xs: vec![x], with_paths: false, walk_budget: None, ..McConfig::new(n, trials, seed) };
    let stats = mc_forest_stats(&config)?;
    bx_tail_table(&stats.bumped_x[0], n, x, ts)
}
