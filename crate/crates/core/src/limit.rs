//! The limit tree built from independent unit-intensity Poisson point
//! processes on `(0, 1)`.
//!
//! A vertex of the tree is a family `(ξ_k)_{k ∈ ℤ}` of point configurations,
//! where `ξ_k` marks the rescaled positions that are `k`-separated. Moving to a
//! child bumps an atom `x` of `ξ_0`: every point left of `x` drops one level
//! and `x` disappears. Moving to the parent inserts an atom `u` at level 0 and
//! lifts every point left of `u` one level.
//!
//! Families are persistent: a family is a base configuration plus the list of
//! forward/backward moves applied to it, and any level is evaluated on demand.
//! Base levels either come from an explicit map or are generated lazily from a
//! `(seed, level)` keyed stream, so unbounded walks never commit to a window.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::RangeInclusive;
use std::sync::{Arc, Mutex};

use rand::distributions::Open01;
use rand::Rng;
use rand_distr::{Distribution, Exp, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::shape::{canonical_shape, RootedTree, RootedTreeShape};

/// `N ~ Poi(1)` independent uniform points on `(0, 1)`, sorted and distinct.
pub fn sample_ppp<R: Rng + ?Sized>(rng: &mut R) -> Vec<f64> {
    let count = Poisson::new(1.0).expect("unit intensity").sample(rng) as usize;
    let mut points: Vec<f64> = (0..count).map(|_| rng.sample(Open01)).collect();
    points.sort_unstable_by(f64::total_cmp);
    while let Some(dup) = points.windows(2).position(|w| w[0] == w[1]) {
        log::warn!("resampling coincident point {}", points[dup]);
        points[dup] = rng.sample(Open01);
        points.sort_unstable_by(f64::total_cmp);
    }
    points
}

struct Base {
    explicit: BTreeMap<i64, Vec<f64>>,
    lazy_seed: Option<u64>,
    touched: Mutex<BTreeSet<i64>>,
}

impl Base {
    fn level(&self, k: i64) -> Vec<f64> {
        if let Some(points) = self.explicit.get(&k) {
            return points.clone();
        }
        match self.lazy_seed {
            Some(seed) => {
                self.touched.lock().expect("touched set").insert(k);
                sample_ppp(&mut rng::stream(seed, rng::signed_stream(k)))
            }
            None => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Move {
    /// Bump atom `x` of level 0 (towards a leaf).
    Forward(f64),
    /// Insert atom `u` at level 0 (towards the base).
    Backward(f64),
}

impl Move {
    fn at(self) -> f64 {
        match self {
            Move::Forward(x) | Move::Backward(x) => x,
        }
    }

    /// Level change for points strictly left of the cut.
    fn shift(self) -> i64 {
        match self {
            Move::Forward(_) => -1,
            Move::Backward(_) => 1,
        }
    }
}

/// An abstracted permutation: point configurations indexed by every integer level.
#[derive(Clone)]
pub struct PointProcessFamily {
    base: Arc<Base>,
    moves: Vec<Move>,
}

impl std::fmt::Debug for PointProcessFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PointProcessFamily")
            .field("window", &self.window(-3..=3))
            .field("lazy", &self.base.lazy_seed.is_some())
            .field("moves", &self.moves)
            .finish()
    }
}

fn check_unit(x: f64) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("point {x} is not in (0, 1)")))
    }
}

impl PointProcessFamily {
    fn with_base(explicit: BTreeMap<i64, Vec<f64>>, lazy_seed: Option<u64>) -> Self {
        Self {
            base: Arc::new(Base { explicit, lazy_seed, touched: Mutex::new(BTreeSet::new()) }),
            moves: Vec::new(),
        }
    }

    /// Every level empty.
    pub fn empty() -> Self {
        Self::with_base(BTreeMap::new(), None)
    }

    /// Explicit levels; unlisted levels are empty. Points must lie in `(0, 1)`
    /// and be distinct across all levels.
    pub fn from_levels(levels: BTreeMap<i64, Vec<f64>>) -> Result<Self> {
        Self::from_levels_with_source(levels, None)
    }

    /// Explicit levels, with unlisted levels drawn lazily from `seed` when given.
    pub fn from_levels_with_source(mut levels: BTreeMap<i64, Vec<f64>>, seed: Option<u64>) -> Result<Self> {
        let mut all = Vec::new();
        for points in levels.values_mut() {
            for &x in points.iter() {
                check_unit(x)?;
            }
            points.sort_unstable_by(f64::total_cmp);
            all.extend_from_slice(points);
        }
        all.sort_unstable_by(f64::total_cmp);
        if let Some(w) = all.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::CoincidentPoint(w[0]));
        }
        Ok(Self::with_base(levels, seed))
    }

    /// Independent unit Poisson processes at every level, materialised on
    /// first access from streams keyed by `(seed, level)`.
    pub fn lazy(seed: u64) -> Self {
        Self::with_base(BTreeMap::new(), Some(seed))
    }

    /// Independent unit Poisson processes on `levels`; every other level empty.
    pub fn sample_window<R: Rng + ?Sized>(levels: RangeInclusive<i64>, rng: &mut R) -> Self {
        let explicit: BTreeMap<i64, Vec<f64>> = levels.map(|k| (k, sample_ppp(rng))).collect();
        Self::with_base(explicit, None)
    }

    /// Base levels that were generated lazily so far.
    pub fn touched_levels(&self) -> BTreeSet<i64> {
        self.base.touched.lock().expect("touched set").clone()
    }

    /// Sorted points of level `k`.
    pub fn level(&self, k: i64) -> Vec<f64> {
        // Base points at location t sit at level k0 + D(t), where D(t) sums the
        // shifts of every move cutting to the right of t. D is constant
        // between consecutive cut locations.
        let mut cuts: Vec<f64> = self.moves.iter().map(|m| m.at()).collect();
        cuts.sort_unstable_by(f64::total_cmp);
        cuts.dedup();

        let mut out = Vec::new();
        let mut lo = 0.0f64;
        for seg in 0..=cuts.len() {
            let hi = cuts.get(seg).copied().unwrap_or(1.0);
            // moves cutting at or beyond `hi` are exactly those right of this segment
            let offset: i64 = self.moves.iter().filter(|m| m.at() >= hi).map(|m| m.shift()).sum();
            out.extend(self.base.level(k - offset).into_iter().filter(|&t| t > lo && t < hi));
            lo = hi;
        }

        // Atoms inserted by backward moves, unless a later move landed on them.
        for (m, mv) in self.moves.iter().enumerate() {
            if let Move::Backward(u) = *mv {
                let later = &self.moves[m + 1..];
                if later.iter().any(|l| l.at() == u) {
                    continue;
                }
                let level: i64 = later.iter().filter(|l| l.at() > u).map(|l| l.shift()).sum();
                if level == k {
                    out.push(u);
                }
            }
        }
        out.sort_unstable_by(f64::total_cmp);
        out
    }

    /// Levels in `range`, empty ones omitted.
    pub fn window(&self, range: RangeInclusive<i64>) -> BTreeMap<i64, Vec<f64>> {
        range.filter_map(|k| Some((k, self.level(k))).filter(|(_, v)| !v.is_empty())).collect()
    }

    /// Child obtained by bumping atom `x` of level 0:
    /// `ξ'_k = ξ_{k+1}|[0,x) + ξ_k|(x,1]`.
    pub fn forward_map(&self, x: f64) -> Result<Self> {
        if !self.level(0).contains(&x) {
            return Err(Error::NotAnAtom(x));
        }
        Ok(self.push(Move::Forward(x)))
    }

    /// Parent obtained by inserting an atom at `u`:
    /// `ξ'_0 = ξ_{-1}|[0,u) + ξ_0|(u,1] + δ_u`, `ξ'_k = ξ_{k-1}|[0,u) + ξ_k|(u,1]`.
    pub fn backward_map(&self, u: f64) -> Result<Self> {
        check_unit(u)?;
        if self.has_atom_at(u) {
            return Err(Error::CoincidentPoint(u));
        }
        Ok(self.push(Move::Backward(u)))
    }

    fn push(&self, mv: Move) -> Self {
        let mut moves = self.moves.clone();
        moves.push(mv);
        Self { base: Arc::clone(&self.base), moves }
    }

    /// Looks for an atom at `u` among explicit base points, inserted atoms and
    /// the levels a short walk can reach. Lazily generated levels further out
    /// coincide with probability zero.
    fn has_atom_at(&self, u: f64) -> bool {
        if self.base.explicit.values().flatten().any(|&t| t == u) {
            return true;
        }
        if self.moves.iter().any(|m| matches!(m, Move::Backward(b) if *b == u)) {
            return true;
        }
        if self.base.lazy_seed.is_some() {
            let reach = self.moves.len() as i64 + 2;
            return (-reach..=reach).any(|k| self.level(k).contains(&u));
        }
        false
    }
}

/// A family together with the subtree of descendants found by repeated
/// forward maps, children ordered by bumped atom.
#[derive(Debug, Clone)]
pub struct DescendantTree {
    pub tree: RootedTree,
    pub families: Vec<PointProcessFamily>,
    /// Atom bumped to reach each vertex from its tree parent.
    pub bumped: Vec<Option<f64>>,
}

/// Descendants of `family` down to depth `depth`.
pub fn descend_tree(family: &PointProcessFamily, depth: usize) -> DescendantTree {
    let mut out = DescendantTree { tree: RootedTree::singleton(), families: vec![family.clone()], bumped: vec![None] };
    attach_descendants(&mut out, 0, depth, None);
    out
}

fn attach_descendants(out: &mut DescendantTree, root: usize, depth: usize, skip: Option<f64>) {
    let mut frontier = vec![(root, 0usize, skip)];
    while let Some((v, d, skip)) = frontier.pop() {
        if d == depth {
            continue;
        }
        let fam = out.families[v].clone();
        for x in fam.level(0) {
            if Some(x) == skip {
                continue;
            }
            let child = fam.forward_map(x).expect("atom of level 0");
            let id = out.tree.add_child(v);
            out.families.push(child);
            out.bumped.push(Some(x));
            frontier.push((id, d + 1, None));
        }
    }
}

/// The bumped ancestor points `u_1, u_2, …` of the spine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpineInput {
    pub u: Vec<f64>,
}

impl SpineInput {
    pub fn new(u: Vec<f64>) -> Result<Self> {
        for &x in &u {
            check_unit(x)?;
        }
        let mut sorted = u.clone();
        sorted.sort_unstable_by(f64::total_cmp);
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::CoincidentPoint(w[0]));
        }
        Ok(Self { u })
    }
}

/// Ball of radius `r` around the root of the limit tree.
#[derive(Debug, Clone)]
pub struct LimitBall {
    pub tree: RootedTree,
    pub families: Vec<PointProcessFamily>,
    /// Tree ids of `ρ_0, …, ρ_r`.
    pub spine: Vec<usize>,
    pub shape: RootedTreeShape,
}

/// Builds the spine `ρ_{i+1} = b(ρ_i, u_{i+1})` for `i < r`, hangs the
/// descendants of each `ρ_i` (except the one recreating `ρ_{i-1}`) off it,
/// and keeps everything within graph distance `r` of `ρ_0`.
pub fn build_r_ball_limit(u: &SpineInput, family: &PointProcessFamily, r: usize) -> Result<LimitBall> {
    if u.u.len() < r {
        return Err(Error::SpineTooShort { need: r, got: u.u.len() });
    }
    let mut out = DescendantTree { tree: RootedTree::singleton(), families: vec![family.clone()], bumped: vec![None] };
    let mut spine = vec![0usize];
    attach_descendants(&mut out, 0, r, None);
    let mut current = family.clone();
    for (i, &ui) in u.u.iter().take(r).enumerate() {
        current = current.backward_map(ui)?;
        let id = out.tree.add_child(spine[i]);
        out.families.push(current.clone());
        out.bumped.push(None);
        spine.push(id);
        attach_descendants(&mut out, id, r - (i + 1), Some(ui));
    }
    let shape = canonical_shape(&out.tree);
    Ok(LimitBall { tree: out.tree, families: out.families, spine, shape })
}

/// Samples the radius-`r` ball of the limit tree.
pub fn sample_limit_ball<R: Rng + ?Sized>(r: usize, rng: &mut R) -> RootedTreeShape {
    let reach = r as i64 - 1;
    let family = PointProcessFamily::sample_window(-reach..=reach, rng);
    let window = family.window(-reach..=reach);
    let taken = |x: f64, chosen: &[f64]| chosen.contains(&x) || window.values().flatten().any(|&t| t == x);
    let mut u = Vec::with_capacity(r);
    for _ in 0..r {
        let mut x: f64 = rng.sample(Open01);
        while taken(x, &u) {
            log::warn!("resampling spine point {x} that coincides with an atom");
            x = rng.sample(Open01);
        }
        u.push(x);
    }
    let spine = SpineInput::new(u).expect("spine points are distinct and in (0, 1)");
    build_r_ball_limit(&spine, &family, r).expect("sampled configuration is in general position").shape
}

fn greedy_walk(family: PointProcessFamily, leftmost: bool) -> (u64, PointProcessFamily) {
    let mut fam = family;
    let mut steps = 0;
    loop {
        let atoms = fam.level(0);
        let pick = if leftmost { atoms.first() } else { atoms.last() };
        let Some(&x) = pick else { return (steps, fam) };
        fam = fam.forward_map(x).expect("picked an atom of level 0");
        steps += 1;
    }
}

/// Distance from the root to its nearest descendant leaf: bump the rightmost
/// atom of level 0 until level 0 is empty.
pub fn limit_nearest_leaf<R: Rng + ?Sized>(rng: &mut R) -> u64 {
    limit_nearest_leaf_from(PointProcessFamily::lazy(rng::child_seed(rng)))
}

pub fn limit_nearest_leaf_from(family: PointProcessFamily) -> u64 {
    greedy_walk(family, false).0
}

/// Distance from the root to its farthest descendant leaf: bump the leftmost
/// atom of level 0 until level 0 is empty.
pub fn limit_farthest_leaf<R: Rng + ?Sized>(rng: &mut R) -> u64 {
    limit_farthest_leaf_from(PointProcessFamily::lazy(rng::child_seed(rng)))
}

pub fn limit_farthest_leaf_from(family: PointProcessFamily) -> u64 {
    greedy_walk(family, true).0
}

/// Size of the bumped set built by scanning right to left: start at 1, find
/// the next point of `ξ_0`, then of `ξ_0 ∪ ξ_1`, then of `ξ_0 ∪ ξ_1 ∪ ξ_2`, …
pub fn limit_bumped_scan<R: Rng + ?Sized>(rng: &mut R) -> u64 {
    limit_bumped_scan_from(&PointProcessFamily::lazy(rng::child_seed(rng)))
}

pub fn limit_bumped_scan_from(family: &PointProcessFamily) -> u64 {
    let mut cursor = 1.0f64;
    let mut found = 0u64;
    let mut levels: Vec<Vec<f64>> = Vec::new();
    loop {
        levels.push(family.level(found as i64));
        let next = levels
            .iter()
            .filter_map(|lv| lv.iter().rev().copied().find(|&t| t < cursor))
            .max_by(f64::total_cmp);
        match next {
            Some(t) => {
                cursor = t;
                found += 1;
            }
            None => return found,
        }
    }
}

/// Jumps made by a Yule process started at 1 during `[0, t]`.
pub fn yule_count<R: Rng + ?Sized>(t: f64, rng: &mut R) -> Result<u64> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("time must be finite and nonnegative, got {t}")));
    }
    let mut clock = 0.0;
    let mut state = 1u64;
    loop {
        clock += Exp::new(state as f64).expect("positive rate").sample(rng);
        if clock > t {
            return Ok(state - 1);
        }
        state += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn fam(levels: &[(i64, &[f64])]) -> PointProcessFamily {
        PointProcessFamily::from_levels(levels.iter().map(|(k, v)| (*k, v.to_vec())).collect()).unwrap()
    }

    #[test]
    fn ppp_is_sorted_and_reproducible() {
        let a = sample_ppp(&mut stream(5, 0));
        assert_eq!(a, sample_ppp(&mut stream(5, 0)));
        for _ in 0..1000 {
            let pts = sample_ppp(&mut stream(9, 1));
            assert!(pts.windows(2).all(|w| w[0] < w[1]));
            assert!(pts.iter().all(|&x| x > 0.0 && x < 1.0));
        }
    }

    #[test]
    fn forward_map_examples() {
        let f = fam(&[(0, &[0.5])]).forward_map(0.5).unwrap();
        assert!(f.window(-5..=5).is_empty());

        let f = fam(&[(0, &[0.2, 0.5]), (1, &[0.1, 0.8])]).forward_map(0.5).unwrap();
        assert_eq!(f.level(0), vec![0.1]);
        assert_eq!(f.level(1), vec![0.8]);
        // 0.2 sat left of the cut at level 0, so it dropped to level -1
        assert_eq!(f.level(-1), vec![0.2]);

        assert_eq!(fam(&[(1, &[0.3])]).forward_map(0.3).unwrap_err(), Error::NotAnAtom(0.3));
    }

    #[test]
    fn forward_map_shifts_only_left_of_cut() {
        let base = fam(&[(0, &[0.55, 0.7]), (1, &[0.1, 0.65, 0.92]), (2, &[0.3, 0.5]), (3, &[0.27, 0.8])]);
        let child = base.forward_map(0.55).unwrap();
        assert_eq!(child.level(0), vec![0.1, 0.7]);
        assert_eq!(child.level(1), vec![0.3, 0.5, 0.65, 0.92]);
        assert_eq!(child.level(2), vec![0.27]);
        assert_eq!(child.level(3), vec![0.8]);
    }

    #[test]
    fn backward_map_examples() {
        let b = PointProcessFamily::empty().backward_map(0.5).unwrap();
        assert_eq!(b.window(-5..=5), BTreeMap::from([(0, vec![0.5])]));

        let b = fam(&[(0, &[0.7]), (-1, &[0.3])]).backward_map(0.5).unwrap();
        assert_eq!(b.level(0), vec![0.3, 0.5, 0.7]);
        assert!(b.level(-1).is_empty());

        let f = fam(&[(0, &[0.7])]);
        assert_eq!(f.backward_map(0.7).unwrap_err(), Error::CoincidentPoint(0.7));
        assert!(f.backward_map(1.0).is_err());
    }

    #[test]
    fn backward_inverts_forward_on_random_families() {
        let mut rng = stream(77, 0);
        let mut checked = 0;
        for trial in 0..2000u64 {
            let family = PointProcessFamily::lazy(trial);
            // walk a couple of random steps first so that moves compose
            let family = match family.level(0).first() {
                Some(&x) if trial % 2 == 0 => family.forward_map(x).unwrap(),
                _ => family,
            };
            let atoms = family.level(0);
            if atoms.is_empty() {
                continue;
            }
            let x = atoms[rng.gen_range(0..atoms.len())];
            let back = family.forward_map(x).unwrap().backward_map(x).unwrap();
            assert_eq!(back.window(-8..=8), family.window(-8..=8));
            checked += 1;
        }
        assert!(checked > 500);
    }

    #[test]
    fn descend_tree_word_0210() {
        // level-0 atoms at the first and last locations, a 2 then a 1 between them
        let f = fam(&[(0, &[0.1, 0.9]), (2, &[0.3]), (1, &[0.6])]);
        let d = descend_tree(&f, 3);
        assert_eq!(d.tree.level_sizes(), vec![1, 2, 2, 2]);

        assert_eq!(descend_tree(&PointProcessFamily::empty(), 3).tree.len(), 1);
        assert_eq!(descend_tree(&fam(&[(0, &[0.4])]), 3).tree.level_sizes(), vec![1, 1]);
    }

    #[test]
    fn limit_ball_trivial_cases() {
        let spine = SpineInput::new(vec![0.3, 0.6]).unwrap();
        let ball = build_r_ball_limit(&spine, &PointProcessFamily::empty(), 2).unwrap();
        assert_eq!(ball.shape.code, "((()))");
        assert_eq!(ball.tree.len(), 3);

        let spine = SpineInput::new(vec![0.7]).unwrap();
        let ball = build_r_ball_limit(&spine, &fam(&[(0, &[0.4])]), 1).unwrap();
        assert_eq!(ball.tree.len(), 3);
        assert_eq!(ball.shape.code, "(()())");

        assert!(matches!(
            build_r_ball_limit(&spine, &PointProcessFamily::empty(), 2),
            Err(Error::SpineTooShort { need: 2, got: 1 })
        ));
        assert_eq!(
            build_r_ball_limit(&SpineInput::new(vec![0.4]).unwrap(), &fam(&[(0, &[0.4])]), 1).unwrap_err(),
            Error::CoincidentPoint(0.4)
        );
        assert_eq!(sample_limit_ball(0, &mut stream(1, 1)), RootedTreeShape::single_vertex());
    }

    #[test]
    fn spine_parent_has_root_as_child() {
        let f = fam(&[(0, &[0.2]), (-1, &[0.4])]);
        let spine = SpineInput::new(vec![0.6]).unwrap();
        let ball = build_r_ball_limit(&spine, &f, 1).unwrap();
        let parent = &ball.families[ball.spine[1]];
        // ρ_1 bumps back to ρ_0 through u_1
        assert_eq!(parent.forward_map(0.6).unwrap().window(-4..=4), f.window(-4..=4));
        assert_eq!(parent.level(0), vec![0.4, 0.6]);
    }

    #[test]
    fn walks_on_fixed_configurations() {
        assert_eq!(limit_nearest_leaf_from(PointProcessFamily::empty()), 0);
        assert_eq!(limit_farthest_leaf_from(PointProcessFamily::empty()), 0);
        assert_eq!(limit_bumped_scan_from(&PointProcessFamily::empty()), 0);

        // word 0 2 1 0 read left to right
        let f = fam(&[(0, &[0.1, 0.9]), (2, &[0.3]), (1, &[0.6])]);
        // rightmost: 0.9, then 0.6 (now a 0), then 0.3, then nothing left of it
        assert_eq!(limit_nearest_leaf_from(f.clone()), 3);
        // leftmost: 0.1, then 0.9, then 0.6, then 0.3
        assert_eq!(limit_farthest_leaf_from(f.clone()), 4);
        assert_eq!(limit_bumped_scan_from(&f), 4);
    }

    #[test]
    fn nearest_walk_consumes_one_level_per_step() {
        for seed in 0..300 {
            let family = PointProcessFamily::lazy(seed);
            let m = limit_nearest_leaf_from(family.clone());
            let touched = family.touched_levels();
            let expected: BTreeSet<i64> = (0..=m as i64).collect();
            assert_eq!(touched, expected, "seed {seed}");
        }
    }

    #[test]
    fn lazy_levels_are_deterministic() {
        let a = PointProcessFamily::lazy(42);
        let b = PointProcessFamily::lazy(42);
        assert_eq!(a.window(-10..=10), b.window(-10..=10));
        assert_ne!(a.window(-10..=10), PointProcessFamily::lazy(43).window(-10..=10));
    }

    #[test]
    fn yule_edge_cases() {
        assert_eq!(yule_count(0.0, &mut stream(1, 0)), Ok(0));
        assert!(yule_count(-1.0, &mut stream(1, 0)).is_err());
    }

    fn window_ball(r: usize, seed: u64) -> (BTreeMap<i64, Vec<f64>>, SpineInput) {
        let mut rng = stream(seed, 0);
        let reach = r as i64 - 1;
        let levels = PointProcessFamily::sample_window(-reach..=reach, &mut rng).window(-reach..=reach);
        let u = SpineInput::new((0..r).map(|_| rng.sample(Open01)).collect()).unwrap();
        (levels, u)
    }

    #[test]
    fn ball_ignores_levels_outside_window() {
        for r in 1..=3usize {
            for seed in 0..200 {
                let (levels, u) = window_ball(r, seed);
                let before = build_r_ball_limit(&u, &PointProcessFamily::from_levels(levels.clone()).unwrap(), r).unwrap();
                let mut rng = stream(seed, 1);
                let mut mutated = levels.clone();
                let reach = r as i64;
                for k in [-reach - 1, -reach, reach, reach + 1] {
                    mutated.insert(k, (0..3).map(|_| rng.sample::<f64, _>(Open01)).collect());
                }
                let after = build_r_ball_limit(&u, &PointProcessFamily::from_levels(mutated).unwrap(), r).unwrap();
                assert_eq!(before.shape, after.shape, "r = {r}, seed = {seed}");
            }
        }
    }

    #[test]
    fn ball_sees_every_level_inside_window() {
        // an extra point at an inside level changes the shape for some configuration
        for r in 1..=3usize {
            let reach = r as i64 - 1;
            for k in -reach..=reach {
                let changed = (0..200).any(|seed| {
                    let (levels, u) = window_ball(r, seed);
                    let before =
                        build_r_ball_limit(&u, &PointProcessFamily::from_levels(levels.clone()).unwrap(), r).unwrap();
                    let mut mutated = levels;
                    mutated.entry(k).or_default().push(1e-6);
                    let after = build_r_ball_limit(&u, &PointProcessFamily::from_levels(mutated).unwrap(), r).unwrap();
                    before.shape != after.shape
                });
                assert!(changed, "r = {r}, level {k}");
            }
        }
    }

    #[test]
    fn ball_shape_invariant_under_monotone_map() {
        let h = |t: f64| t * t;
        for seed in 0..200 {
            let (levels, u) = window_ball(2, seed);
            let mapped: BTreeMap<i64, Vec<f64>> =
                levels.iter().map(|(k, v)| (*k, v.iter().map(|&t| h(t)).collect())).collect();
            let mapped_u = SpineInput::new(u.u.iter().map(|&t| h(t)).collect()).unwrap();
            let a = build_r_ball_limit(&u, &PointProcessFamily::from_levels(levels).unwrap(), 2).unwrap();
            let b = build_r_ball_limit(&mapped_u, &PointProcessFamily::from_levels(mapped).unwrap(), 2).unwrap();
            assert_eq!(a.shape, b.shape, "seed {seed}");
        }
    }

    #[test]
    fn ppp_count_is_unit_poisson() {
        let mut rng = stream(77, 0);
        let trials = 100_000;
        let (mut total, mut empty) = (0usize, 0usize);
        for _ in 0..trials {
            let n = sample_ppp(&mut rng).len();
            total += n;
            empty += usize::from(n == 0);
        }
        let mean = total as f64 / trials as f64;
        let p_empty = empty as f64 / trials as f64;
        assert!((mean - 1.0).abs() <= 0.01, "{mean}");
        assert!((p_empty - (-1.0f64).exp()).abs() <= 0.005, "{p_empty}");
    }

    #[test]
    fn root_has_one_parent_and_poisson_children() {
        // radius-1 ball: root, its parent, and Poi(1) children
        let mut rng = stream(78, 0);
        let trials = 100_000u64;
        let mut counts = BTreeMap::new();
        for _ in 0..trials {
            let shape = sample_limit_ball(1, &mut rng);
            *counts.entry(shape.vertices as u64 - 2).or_insert(0u64) += 1;
        }
        let mut tv = 0.0;
        let mut pois = (-1.0f64).exp();
        for j in 0..40u64 {
            if j > 0 {
                pois /= j as f64;
            }
            tv += (counts.get(&j).copied().unwrap_or(0) as f64 / trials as f64 - pois).abs();
        }
        assert!(0.5 * tv <= 0.01, "{}", 0.5 * tv);
    }
}
