//! Machine-readable summaries of empirical statistics.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::stats::{tv_distance, DiscreteLaw, EmpiricalDistribution};

/// One distance check of a statistic against a target law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub target: String,
    pub tv: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bound: Option<f64>,
    pub pass: bool,
}

impl Comparison {
    /// TV between `dist` and `law`; passes when it is at most `bound`.
    pub fn against<L: DiscreteLaw + ?Sized>(target: &str, dist: &EmpiricalDistribution, law: &L, bound: Option<f64>) -> Self {
        let tv = tv_distance(dist, law);
        Self { target: target.to_owned(), tv, bound, pass: bound.is_none_or(|b| tv <= b) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatisticReport {
    pub statistic: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub r: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub x: Option<f64>,
    pub trials: u64,
    pub seed: Option<u64>,
    pub pmf: Vec<(u64, f64)>,
    pub moments: [f64; 4],
    pub comparisons: Vec<Comparison>,
}

impl StatisticReport {
    pub fn from_distribution(statistic: &str, dist: &EmpiricalDistribution) -> Self {
        Self {
            statistic: statistic.to_owned(),
            n: None,
            r: None,
            x: None,
            trials: dist.total(),
            seed: dist.seed,
            pmf: dist.pmf(),
            moments: dist.raw_moments(),
            comparisons: Vec::new(),
        }
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = Some(n);
        self
    }

    pub fn with_r(mut self, r: usize) -> Self {
        self.r = Some(r);
        self
    }

    pub fn with_x(mut self, x: f64) -> Self {
        self.x = Some(x);
        self
    }

    pub fn compare(mut self, comparison: Comparison) -> Self {
        self.comparisons.push(comparison);
        self
    }

    pub fn pass(&self) -> bool {
        self.comparisons.iter().all(|c| c.pass)
    }
}

/// Long-format CSV: one row per `(statistic, value)`.
pub fn pmf_csv(reports: &[StatisticReport]) -> String {
    let mut out = String::from("statistic,n,r,x,trials,seed,value,probability\n");
    let opt = |v: Option<String>| v.unwrap_or_default();
    for rep in reports {
        for (value, prob) in &rep.pmf {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                csv_field(&rep.statistic),
                opt(rep.n.map(|v| v.to_string())),
                opt(rep.r.map(|v| v.to_string())),
                opt(rep.x.map(|v| v.to_string())),
                rep.trials,
                opt(rep.seed.map(|v| v.to_string())),
                value,
                prob
            )
            .expect("writing to a String");
        }
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}
