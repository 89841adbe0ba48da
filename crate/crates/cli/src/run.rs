use std::collections::BTreeMap;
use std::fmt::Write as _;

use fpforest::forest::{ball_to_dot, build_forest_with_limit, factorial, forest_to_csv, forest_to_dot, local_r_ball};
use fpforest::limit::{limit_bumped_scan, limit_farthest_leaf, limit_nearest_leaf, sample_limit_ball, yule_count};
use fpforest::paths::analyze;
use fpforest::report::pmf_csv;
use fpforest::stats::{
    chunked, indicator_tv_experiment, mc_forest_stats, rball_histogram_compare, sample_distribution, Geometric,
    Poisson,
};
use fpforest::verify::{self, Scale, SuiteConfig, FINITE_TV};
use fpforest::{Comparison, Error, McConfig, StatisticReport};
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::*;

/// A finished command: machine output plus whether its checks passed.
pub struct Output {
    pub result: Value,
    pub config: Value,
    /// Text for `--format csv` or `--format dot`, when the command has one.
    pub text: Option<String>,
    pub pass: bool,
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Run = Result<Output, Failure>;

fn to_value<T: Serialize>(v: &T) -> Result<Value, Failure> {
    Ok(serde_json::to_value(v)?)
}

fn output(config: Value, result: Value, text: Option<String>) -> Output {
    Output { result, config, text, pass: true }
}

/// Largest `n` with `n! ≤ budget`.
fn max_n_for_budget(budget: u64) -> usize {
    (1..=20).take_while(|&n| factorial(n) <= budget).last().unwrap_or(0)
}

pub fn forest_cmd(a: &ForestArgs, format: Format) -> Run {
    let config = to_value(a)?;
    match (&a.perm, a.n) {
        (Some(perm), _) => {
            let ball = local_r_ball(perm, a.r);
            if ball.len() as u64 > a.budget_nodes {
                return Err(Error::BudgetExceeded { what: "ball vertices", budget: a.budget_nodes }.into());
            }
            let text = match format {
                Format::Dot => Some(ball_to_dot(&ball)),
                Format::Csv => {
                    let mut s = String::from("index,one_line,distance,towards_root\n");
                    for (i, v) in ball.vertices.iter().enumerate() {
                        let up = ball.towards_root[i].map(|u| u.to_string()).unwrap_or_default();
                        writeln!(s, "{i},{},{},{up}", v.one_line(), ball.distance[i]).expect("String write");
                    }
                    Some(s)
                }
                Format::Json => None,
            };
            let edges: Vec<[String; 2]> = ball
                .edges
                .iter()
                .map(|&(c, p)| [ball.vertices[c].one_line(), ball.vertices[p].one_line()])
                .collect();
            let result = json!({
                "root": perm.one_line(),
                "r": a.r,
                "vertices": ball.vertices.iter().map(|p| p.one_line()).collect::<Vec<_>>(),
                "distance": ball.distance,
                "edges": edges,
                "shape": ball.shape().code,
            });
            Ok(output(config, result, text))
        }
        (None, Some(n)) => {
            let f = build_forest_with_limit(n, max_n_for_budget(a.budget_nodes))?;
            let text = match format {
                Format::Dot => Some(forest_to_dot(&f)),
                Format::Csv => Some(forest_to_csv(&f)),
                Format::Json => None,
            };
            let label = |v: usize| f.permutation(v).one_line();
            let edges: Vec<[String; 2]> = f.edges().map(|(c, p)| [label(c), label(p)]).collect();
            let result = json!({
                "n": n,
                "vertices": f.vertex_count(),
                "bases": f.bases().count(),
                "leaves": f.leaves().count(),
                "acyclic": f.is_acyclic(),
                "edges": edges,
            });
            Ok(output(config, result, text))
        }
        (None, None) => Err(Failure::Usage("forest needs --n or --perm".into())),
    }
}

pub fn paths_cmd(a: &PathsArgs, format: Format) -> Run {
    no_text(format, "paths")?;
    let analysis = analyze(&a.perm, a.x, !a.no_paths, a.budget_steps)?;
    Ok(output(to_value(a)?, to_value(&analysis)?, None))
}

fn no_text(format: Format, cmd: &str) -> Result<(), Failure> {
    match format {
        Format::Json => Ok(()),
        other => Err(Failure::Usage(format!("{cmd} only writes JSON, not {other:?}"))),
    }
}

fn no_dot(format: Format, cmd: &str) -> Result<(), Failure> {
    match format {
        Format::Dot => Err(Failure::Usage(format!("{cmd} has no graph output; use json or csv"))),
        _ => Ok(()),
    }
}

pub fn mc_cmd(a: &McArgs, seed: u64, format: Format) -> Run {
    no_dot(format, "mc")?;
    let cfg = McConfig {
        n: a.n,
        trials: a.trials,
        seed,
        xs: a.x.clone(),
        with_paths: true,
        step_budget: a.budget_steps,
        walk_budget: (a.budget_walk > 0).then_some(a.budget_walk),
        exhaustive: a.exhaustive,
    };
    let stats = mc_forest_stats(&cfg)?;
    let poi = Poisson::new(1.0)?;
    let geo = Geometric::inverse_e();
    let n = a.n;
    let mut reports = Vec::new();
    if let Some(m) = &stats.shortest {
        reports.push(
            StatisticReport::from_distribution("M", m)
                .with_n(n)
                .compare(Comparison::against("Poi(1)", m, &poi, Some(FINITE_TV))),
        );
    }
    if let Some(l) = &stats.longest {
        reports.push(
            StatisticReport::from_distribution("L", l)
                .with_n(n)
                .compare(Comparison::against("Geo(1/e)", l, &geo, Some(FINITE_TV))),
        );
    }
    reports.push(StatisticReport::from_distribution("|B|", &stats.bumped).with_n(n));
    for (x, d) in a.x.iter().zip(&stats.bumped_x) {
        reports.push(StatisticReport::from_distribution("|B_x|", d).with_n(n).with_x(*x));
    }
    if let Some(r) = &stats.base_distance {
        reports.push(StatisticReport::from_distribution("R", r).with_n(n));
    }
    let text = (format == Format::Csv).then(|| pmf_csv(&reports));
    let result = json!({
        "samples": stats.samples,
        "reports": to_value(&reports)?,
        "base_censored": stats.base_censored,
        "identity_tree": stats.identity_tree,
        "invariant_violations": stats.invariant_violations,
    });
    Ok(output(to_value(&cfg)?, result, text))
}

fn histogram_csv(header: &str, rows: impl Iterator<Item = String>) -> String {
    let mut s = format!("{header}\n");
    for r in rows {
        s.push_str(&r);
        s.push('\n');
    }
    s
}

pub fn limit_cmd(a: &LimitArgs, seed: u64, format: Format) -> Run {
    no_dot(format, "limit")?;
    if a.trials == 0 {
        return Err(Failure::Usage("trials must be at least 1".into()));
    }
    let config = to_value(a)?;
    if a.statistic == LimitStatistic::Ball {
        let parts = chunked(a.trials, seed, |c| c, |rng, count| {
            let mut h = BTreeMap::new();
            for _ in 0..count {
                *h.entry(sample_limit_ball(a.r, rng).code).or_insert(0u64) += 1;
            }
            h
        });
        let mut hist: BTreeMap<String, u64> = BTreeMap::new();
        for part in parts {
            for (k, c) in part {
                *hist.entry(k).or_insert(0) += c;
            }
        }
        let text = (format == Format::Csv)
            .then(|| histogram_csv("shape,count", hist.iter().map(|(k, c)| format!("{k},{c}"))));
        let result = json!({ "r": a.r, "trials": a.trials, "seed": seed, "shapes": hist });
        return Ok(output(config, result, text));
    }
    if a.statistic == LimitStatistic::Yule && !(a.t >= 0.0 && a.t.is_finite()) {
        return Err(Failure::Usage(format!("t must be a finite nonnegative time, got {}", a.t)));
    }
    let t = a.t;
    let (name, dist) = match a.statistic {
        LimitStatistic::Nearest => ("nearest", sample_distribution("nearest", a.trials, seed, limit_nearest_leaf)),
        LimitStatistic::Farthest => {
            ("farthest", sample_distribution("farthest", a.trials, seed, limit_farthest_leaf))
        }
        LimitStatistic::Scan => ("scan", sample_distribution("scan", a.trials, seed, limit_bumped_scan)),
        LimitStatistic::Yule => (
            "yule",
            sample_distribution("yule", a.trials, seed, |r| yule_count(t, r).expect("t checked above")),
        ),
        LimitStatistic::Ball => unreachable!("handled above"),
    };
    let mut report = StatisticReport::from_distribution(name, &dist);
    report = match a.statistic {
        LimitStatistic::Nearest => report.compare(Comparison::against("Poi(1)", &dist, &Poisson::new(1.0)?, None)),
        LimitStatistic::Farthest | LimitStatistic::Scan => {
            report.compare(Comparison::against("Geo(1/e)", &dist, &Geometric::inverse_e(), None))
        }
        LimitStatistic::Yule => {
            report.compare(Comparison::against("Geo(e^-t)", &dist, &Geometric::new((-t).exp())?, None))
        }
        LimitStatistic::Ball => report,
    };
    let text = (format == Format::Csv).then(|| pmf_csv(std::slice::from_ref(&report)));
    Ok(output(config, to_value(&report)?, text))
}

pub fn compare_cmd(a: &CompareArgs, seed: u64, format: Format) -> Run {
    no_dot(format, "compare")?;
    let cmp = rball_histogram_compare(a.n, a.r, a.trials, seed)?;
    let text = (format == Format::Csv).then(|| {
        let mut keys: Vec<&String> = cmp.forest.keys().chain(cmp.limit.keys()).collect();
        keys.sort();
        keys.dedup();
        histogram_csv(
            "shape,forest,limit",
            keys.into_iter().map(|k| {
                let get = |h: &BTreeMap<String, u64>| h.get(k).copied().unwrap_or(0);
                format!("{k},{},{}", get(&cmp.forest), get(&cmp.limit))
            }),
        )
    });
    Ok(output(to_value(a)?, to_value(&cmp)?, text))
}

pub fn tv_cmd(a: &TvArgs, format: Format) -> Run {
    no_dot(format, "tv")?;
    let cond: Vec<u32> = a.a.clone().unwrap_or_else(|| (1..=a.r as u32).collect());
    let tv = indicator_tv_experiment(a.n, a.r, &cond)?;
    let text = (format == Format::Csv).then(|| {
        let a_field = tv.a.iter().map(u32::to_string).collect::<Vec<_>>().join(" ");
        format!(
            "n,r,a,index_count,support_size,exact_tv,bound\n{},{},{},{},{},{},{}\n",
            tv.n, tv.r, a_field, tv.index_count, tv.support_size, tv.exact_tv, tv.bound
        )
    });
    Ok(output(to_value(a)?, to_value(&tv)?, text))
}

pub fn verify_cmd(a: &VerifyArgs, seed: u64, format: Format) -> Run {
    no_dot(format, "verify")?;
    let ids: Vec<u8> = a.criteria.clone().unwrap_or_else(|| (1..=12).collect());
    if let Some(bad) = ids.iter().find(|&&id| !(1..=12).contains(&id)) {
        return Err(Failure::Usage(format!("no criterion {bad}; valid ids are 1..=12")));
    }
    let scale = match a.scale {
        ScaleArg::Full => Scale::Full,
        ScaleArg::Quick => Scale::Quick,
    };
    let report = verify::run_selected(&ids, &SuiteConfig { seed, scale });
    for c in &report.criteria {
        eprintln!("criterion {:>2} [{}] {}", c.id, if c.pass { "PASS" } else { "FAIL" }, c.title);
    }
    let text = (format == Format::Csv).then(|| {
        let mut s = String::from("criterion,title,check,observed,threshold,pass\n");
        for c in &report.criteria {
            for k in &c.checks {
                writeln!(s, "{},{},{},{},{},{}", c.id, quote(&c.title), quote(&k.name), quote(&k.observed), quote(&k.threshold), k.pass)
                    .expect("String write");
            }
        }
        s
    });
    let mut out = output(to_value(a)?, to_value(&report)?, text);
    out.pass = report.pass;
    Ok(out)
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}
