//! Greedy paths from a permutation to its descendant leaves.
//!
//! Bumping the rightmost true fixed point at every step gives a shortest
//! path; bumping the leftmost gives the unique longest one. The values
//! bumped along the longest path (the bumped set) can be read off in a
//! single right-to-left pass, and they control the upper bounds on the
//! longest path length computed here.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::permutation::{bump_in_place, true_fixed_points, Permutation};

/// Default cap on the number of bumps taken by [`longest_path`].
pub const DEFAULT_STEP_BUDGET: u64 = 1 << 26;

/// A path towards a leaf. `vertices[t + 1]` is `vertices[t]` with the value at
/// `bumped_positions[t]` moved to the front.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BumpPath {
    pub vertices: Vec<Permutation>,
    pub bumped_positions: Vec<usize>,
    pub bumped_values: Vec<u32>,
}

impl BumpPath {
    fn start(perm: &Permutation) -> Self {
        Self { vertices: vec![perm.clone()], bumped_positions: Vec::new(), bumped_values: Vec::new() }
    }

    /// Number of bumps.
    pub fn len(&self) -> usize {
        self.bumped_positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bumped_positions.is_empty()
    }

    pub fn last(&self) -> &Permutation {
        self.vertices.last().expect("a path has a start vertex")
    }
}

/// Ascending values `b_1 < … < b_k` bumped along the longest path.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BumpedSet {
    pub values: Vec<u32>,
}

impl BumpedSet {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `b_i − i` for `i = 1..=k`; weakly increasing and at least 1.
    pub fn gaps(&self) -> impl Iterator<Item = u64> + '_ {
        self.values.iter().enumerate().map(|(idx, &b)| b as u64 - (idx as u64 + 1))
    }
}

fn walk<F>(perm: &Permutation, mut pick: F) -> BumpPath
where
    F: FnMut(&[u32]) -> Option<usize>,
{
    let mut path = BumpPath::start(perm);
    let mut values = perm.values().to_vec();
    while let Some(i) = pick(&values) {
        bump_in_place(&mut values, i);
        path.bumped_positions.push(i);
        path.bumped_values.push(i as u32);
        path.vertices.push(Permutation::from_vec_unchecked(values.clone()));
    }
    path
}

/// Shortest path to a leaf: always bump the rightmost true fixed point.
pub fn shortest_path(perm: &Permutation) -> BumpPath {
    walk(perm, |v| true_fixed_points(v).next_back())
}

pub fn shortest_path_length(perm: &Permutation) -> u64 {
    let mut values = perm.values().to_vec();
    let mut steps = 0;
    loop {
        let Some(i) = true_fixed_points(&values).next_back() else { return steps };
        bump_in_place(&mut values, i);
        steps += 1;
    }
}

/// Right-to-left scan of the separation word picking `0, 1, 2, …` in turn
/// (a `0` at position 1 never counts). Positions come back in the order they
/// are picked, which is also the order their letters get bumped.
pub fn scan_shortest_positions(perm: &Permutation) -> Vec<usize> {
    let word = perm.separation_word().entries;
    let mut picked = Vec::new();
    let mut want = 0i64;
    let mut cursor = word.len();
    while let Some(pos) = (1..=cursor).rev().find(|&i| word[i - 1] == want && !(want == 0 && i == 1)) {
        picked.push(pos);
        cursor = pos - 1;
        want += 1;
    }
    picked
}

/// The unique longest path to a leaf: always bump the leftmost true fixed
/// point. Fails after `budget` bumps.
pub fn longest_path(perm: &Permutation, budget: u64) -> Result<BumpPath> {
    let mut steps = 0u64;
    let mut over = false;
    let path = walk(perm, |v| {
        if steps == budget {
            over = true;
            return None;
        }
        let next = true_fixed_points(v).next();
        steps += u64::from(next.is_some());
        next
    });
    if over && !path.last().is_leaf() {
        return Err(Error::BudgetExceeded { what: "bump steps", budget });
    }
    Ok(path)
}

/// Length of [`longest_path`] without materialising the vertices.
pub fn longest_path_length(perm: &Permutation, budget: u64) -> Result<u64> {
    let mut values = perm.values().to_vec();
    let mut steps = 0u64;
    // Bumping position i only shifts positions < i, so the next leftmost
    // fixed point is found by rescanning from the front.
    loop {
        let Some(i) = true_fixed_points(&values).next() else { return Ok(steps) };
        if steps == budget {
            return Err(Error::BudgetExceeded { what: "bump steps", budget });
        }
        bump_in_place(&mut values, i);
        steps += 1;
    }
}

/// Single right-to-left pass: `π(i)` is bumped iff `π(i) ≠ 1` and
/// `0 ≤ π(i) − i ≤ #{j > i : π(j) bumped}`.
pub fn bumped_set(perm: &Permutation) -> BumpedSet {
    let mut count = 0u64;
    let mut values = Vec::new();
    for (idx, &v) in perm.values().iter().enumerate().rev() {
        let i = idx as u64 + 1;
        let v64 = v as u64;
        if v != 1 && v64 >= i && v64 - i <= count {
            values.push(v);
            count += 1;
        }
    }
    values.sort_unstable();
    BumpedSet { values }
}

/// `1 + Σ_{m<k} Π_{i≤m} (1 + 1/(b_i − i))`, or 0 when nothing is bumped.
pub fn lub_bound(perm: &Permutation) -> f64 {
    lub_from_set(&bumped_set(perm))
}

pub fn lub_from_set(set: &BumpedSet) -> f64 {
    if set.is_empty() {
        return 0.0;
    }
    let mut total = 1.0;
    let mut product = 1.0;
    for gap in set.gaps().take(set.len() - 1) {
        product *= 1.0 + 1.0 / gap as f64;
        total += product;
    }
    total
}

/// [`lub_bound`] in exact rational arithmetic.
pub fn lub_bound_exact(perm: &Permutation) -> BigRational {
    let set = bumped_set(perm);
    if set.is_empty() {
        return BigRational::zero();
    }
    let mut total = BigRational::one();
    let mut product = BigRational::one();
    for gap in set.gaps().take(set.len() - 1) {
        let gap = BigInt::from(gap);
        product *= BigRational::new(gap.clone() + 1, gap);
        total += &product;
    }
    total
}

fn check_x(x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("x must be a positive finite number, got {x}")))
    }
}

/// Elements of the bumped set with `b_i − i < x`.
pub fn b_x_subset(perm: &Permutation, x: f64) -> Result<BumpedSet> {
    check_x(x)?;
    Ok(b_x_from_set(&bumped_set(perm), x))
}

pub fn b_x_from_set(set: &BumpedSet, x: f64) -> BumpedSet {
    BumpedSet {
        values: set.values.iter().zip(set.gaps()).filter(|(_, g)| (*g as f64) < x).map(|(&b, _)| b).collect(),
    }
}

/// `2^{|B_x|} · |B| · (1 + 1/x)^{|B|}`; 0 when the bumped set is empty.
pub fn simple_upper_bound(perm: &Permutation, x: f64) -> Result<f64> {
    check_x(x)?;
    let set = bumped_set(perm);
    let bx = b_x_from_set(&set, x).len();
    let k = set.len();
    Ok(2f64.powi(bx as i32) * k as f64 * (1.0 + 1.0 / x).powi(k as i32))
}

/// Everything the `paths` command reports for one permutation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathAnalysis {
    pub permutation: Permutation,
    pub separation_word: Vec<i64>,
    pub bumped_set: BumpedSet,
    pub x: f64,
    pub b_x: BumpedSet,
    pub longest: u64,
    pub shortest: u64,
    pub lub_bound: f64,
    pub simple_upper_bound: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shortest_path: Option<BumpPath>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub longest_path: Option<BumpPath>,
}

pub fn analyze(perm: &Permutation, x: f64, with_paths: bool, budget: u64) -> Result<PathAnalysis> {
    let set = bumped_set(perm);
    let b_x = b_x_subset(perm, x)?;
    Ok(PathAnalysis {
        permutation: perm.clone(),
        separation_word: perm.separation_word().entries,
        lub_bound: lub_from_set(&set),
        simple_upper_bound: simple_upper_bound(perm, x)?,
        bumped_set: set,
        x,
        b_x,
        longest: longest_path_length(perm, budget)?,
        shortest: shortest_path_length(perm),
        shortest_path: with_paths.then(|| shortest_path(perm)),
        longest_path: if with_paths { Some(longest_path(perm, budget)?) } else { None },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Permutation {
        s.parse().unwrap()
    }

    fn seq(items: &[&str]) -> Vec<Permutation> {
        items.iter().map(|s| p(s)).collect()
    }

    #[test]
    fn shortest_path_of_worked_example() {
        let path = shortest_path(&p("32415"));
        assert_eq!(path.vertices, seq(&["32415", "53241", "45321", "34521"]));
        assert_eq!(path.bumped_values, vec![5, 4, 3]);
        assert_eq!(shortest_path(&p("2143")).len(), 0);
        assert_eq!(shortest_path(&p("123")).len(), 1);
    }

    #[test]
    fn scan_examples() {
        let picked = scan_shortest_positions(&p("32415"));
        assert_eq!(picked, vec![5, 3, 1]);
        let letters: Vec<u32> = picked.iter().map(|&i| p("32415").get(i)).collect();
        assert_eq!(letters, vec![5, 4, 3]);
        assert!(scan_shortest_positions(&p("2143")).is_empty());
        assert_eq!(scan_shortest_positions(&Permutation::identity(3)), vec![3]);
    }

    #[test]
    fn longest_path_of_worked_example() {
        let path = longest_path(&p("32415"), DEFAULT_STEP_BUDGET).unwrap();
        assert_eq!(
            path.vertices,
            seq(&[
                "32415", "23415", "52341", "25341", "32541", "23541", "42351", "24351", "32451", "23451"
            ])
        );
        assert_eq!(path.len(), 9);
        assert_eq!(longest_path_length(&p("32415"), DEFAULT_STEP_BUDGET), Ok(9));
        assert_eq!(longest_path(&p("2143"), DEFAULT_STEP_BUDGET).unwrap().len(), 0);
    }

    #[test]
    fn longest_path_of_identity_is_sharp() {
        for n in 2..=20usize {
            let expected = (1u64 << (n - 1)) - 1;
            let id = Permutation::identity(n);
            assert_eq!(longest_path_length(&id, DEFAULT_STEP_BUDGET), Ok(expected), "n = {n}");
            assert_eq!(lub_bound(&id), expected as f64);
            assert_eq!(lub_bound_exact(&id), BigRational::from_integer(expected.into()));
        }
        assert_eq!(longest_path(&Permutation::identity(6), DEFAULT_STEP_BUDGET).unwrap().len(), 31);
    }

    #[test]
    fn longest_path_budget() {
        let id = Permutation::identity(8);
        assert!(matches!(longest_path_length(&id, 10), Err(Error::BudgetExceeded { .. })));
        assert!(matches!(longest_path(&id, 10), Err(Error::BudgetExceeded { .. })));
        assert_eq!(longest_path_length(&id, 127), Ok(127));
        assert_eq!(longest_path(&id, 127).unwrap().len(), 127);
    }

    #[test]
    fn bumped_set_examples() {
        assert_eq!(bumped_set(&p("32415")).values, vec![2, 3, 4, 5]);
        assert!(bumped_set(&p("2143")).is_empty());
        assert_eq!(bumped_set(&Permutation::identity(6)).values, vec![2, 3, 4, 5, 6]);
    }

    #[test]
    fn bounds_on_worked_example() {
        // B = {2,3,4,5}, all gaps 1: 1 + 2 + 4 + 8.
        assert_eq!(lub_bound(&p("32415")), 15.0);
        assert_eq!(lub_bound(&p("2143")), 0.0);
        assert_eq!(lub_bound_exact(&p("2143")), BigRational::zero());
        assert_eq!(simple_upper_bound(&p("2143"), 1.0), Ok(0.0));
        // |B_1| = 0, |B| = 4: 1 · 4 · 2^4
        assert_eq!(simple_upper_bound(&p("32415"), 1.0), Ok(64.0));
        // identity of length 4: gaps are all 1, so |B_1| = 0 and |B_2| = 3
        assert_eq!(simple_upper_bound(&Permutation::identity(4), 1.0), Ok(24.0));
        assert_eq!(simple_upper_bound(&Permutation::identity(4), 2.0), Ok(81.0));
    }

    #[test]
    fn b_x_examples() {
        assert_eq!(b_x_subset(&Permutation::identity(5), 2.0).unwrap().values, vec![2, 3, 4, 5]);
        assert!(b_x_subset(&p("32415"), 1.0).unwrap().is_empty());
        assert_eq!(b_x_subset(&p("32415"), 2.0).unwrap().values, vec![2, 3, 4, 5]);
        assert!(b_x_subset(&p("32415"), 0.0).is_err());
        assert!(simple_upper_bound(&p("32415"), -1.0).is_err());
    }

    #[test]
    fn exact_bound_matches_float() {
        use num_traits::ToPrimitive;
        // B = {3, 4} with gaps 2, 2
        let perm = p("1 3 5 4 2");
        assert_eq!(bumped_set(&perm).values, vec![3, 4]);
        let exact = lub_bound_exact(&perm);
        assert_eq!(exact, BigRational::new(5.into(), 2.into()));
        assert!((exact.to_f64().unwrap() - lub_bound(&perm)).abs() <= 1e-9);
    }

    #[test]
    fn analysis_report() {
        let a = analyze(&p("32415"), 2.0, true, DEFAULT_STEP_BUDGET).unwrap();
        assert_eq!((a.longest, a.shortest), (9, 3));
        assert_eq!(a.bumped_set.values, vec![2, 3, 4, 5]);
        assert_eq!(a.longest_path.as_ref().unwrap().len(), 9);
        let json = serde_json::to_value(&a).unwrap();
        assert_eq!(json["bumped_set"], serde_json::json!([2, 3, 4, 5]));
        assert_eq!(json["longest"], 9);
    }

    fn all_of(n: usize) -> impl Iterator<Item = Permutation> {
        (0..crate::forest::factorial(n)).map(move |r| crate::forest::lehmer_unrank(n, r))
    }

    #[test]
    fn greedy_paths_match_brute_force_on_s6() {
        use crate::forest::{brute_farthest_leaf, brute_nearest_leaf};
        for perm in all_of(6) {
            let short = shortest_path(&perm);
            assert_eq!(short.len() as u64, brute_nearest_leaf(&perm), "{perm}");
            assert_eq!(short.len() as u64, shortest_path_length(&perm));
            assert_eq!(scan_shortest_positions(&perm).len(), short.len(), "{perm}");
            let long = longest_path(&perm, DEFAULT_STEP_BUDGET).unwrap();
            assert_eq!(long.len() as u64, brute_farthest_leaf(&perm, u64::MAX).unwrap(), "{perm}");
            assert_eq!(long.len() as u64, longest_path_length(&perm, DEFAULT_STEP_BUDGET).unwrap());
            let mut distinct = long.bumped_values.clone();
            distinct.sort_unstable();
            distinct.dedup();
            assert_eq!(bumped_set(&perm).values, distinct, "{perm}");
        }
    }

    #[test]
    fn bounds_chain_on_s7() {
        for perm in all_of(7) {
            let set = bumped_set(&perm);
            let gaps: Vec<u64> = set.gaps().collect();
            assert!(gaps.windows(2).all(|w| w[0] <= w[1]), "{perm}: {gaps:?}");
            if set.is_empty() {
                continue;
            }
            let ell = longest_path_length(&perm, DEFAULT_STEP_BUDGET).unwrap() as f64;
            let lub = lub_bound(&perm);
            assert!(ell <= lub + 1e-9, "{perm}");
            for x in [1.0, 2.0, 4.0] {
                assert!(lub <= simple_upper_bound(&perm, x).unwrap() + 1e-9, "{perm} x={x}");
            }
        }
    }
}
