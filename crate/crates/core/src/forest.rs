//! The fixed point forest: exhaustive construction for small `n`, local
//! balls for any `n`, brute-force leaf-distance oracles, and DOT/CSV export.

use std::collections::VecDeque;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::permutation::Permutation;
use crate::shape::{canonical_shape, RootedTree, RootedTreeShape};

/// Largest `n` accepted by [`build_forest`] unless overridden.
pub const DEFAULT_MAX_FOREST_N: usize = 9;

/// Vertex budget for [`brute_farthest_leaf`].
pub const DEFAULT_NODE_BUDGET: u64 = 10_000_000;

const NO_PARENT: u32 = u32::MAX;

pub fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// Lexicographic rank of a permutation via its Lehmer code. Requires `n <= 20`.
pub fn lehmer_rank(perm: &Permutation) -> u64 {
    let n = perm.len();
    assert!(n <= 20, "lehmer rank overflows u64 beyond n = 20");
    let mut seen: u32 = 0;
    let mut rank = 0u64;
    for (idx, &v) in perm.values().iter().enumerate() {
        let below = (v - 1) as u64 - (seen & ((1u32 << (v - 1)) - 1)).count_ones() as u64;
        rank += below * factorial(n - 1 - idx);
        seen |= 1 << (v - 1);
    }
    rank
}

/// Inverse of [`lehmer_rank`].
pub fn lehmer_unrank(n: usize, mut rank: u64) -> Permutation {
    assert!((1..=20).contains(&n));
    assert!(rank < factorial(n), "rank out of range");
    let mut unused: Vec<u32> = (1..=n as u32).collect();
    let mut values = Vec::with_capacity(n);
    for idx in 0..n {
        let f = factorial(n - 1 - idx);
        let digit = (rank / f) as usize;
        rank %= f;
        values.push(unused.remove(digit));
    }
    Permutation::from_vec_unchecked(values)
}

/// `F_n` with vertices indexed by Lehmer rank.
#[derive(Debug, Clone)]
pub struct ForestGraph {
    n: usize,
    parent: Vec<u32>,
    child_offsets: Vec<u32>,
    child_list: Vec<u32>,
}

impl ForestGraph {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vertex_count(&self) -> usize {
        self.parent.len()
    }

    pub fn permutation(&self, v: usize) -> Permutation {
        lehmer_unrank(self.n, v as u64)
    }

    pub fn vertex(&self, perm: &Permutation) -> usize {
        assert_eq!(perm.len(), self.n);
        lehmer_rank(perm) as usize
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        match self.parent[v] {
            NO_PARENT => None,
            p => Some(p as usize),
        }
    }

    pub fn children(&self, v: usize) -> &[u32] {
        &self.child_list[self.child_offsets[v] as usize..self.child_offsets[v + 1] as usize]
    }

    pub fn bases(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.vertex_count()).filter(|&v| self.parent[v] == NO_PARENT)
    }

    pub fn leaves(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.vertex_count()).filter(|&v| self.children(v).is_empty())
    }

    /// Edges as `(child, parent)` pairs, in child-rank order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.vertex_count()).filter_map(|v| self.parent(v).map(|p| (v, p)))
    }

    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }

    /// Checks that every vertex reaches a base by following parents.
    pub fn is_acyclic(&self) -> bool {
        // 0 = unknown, 1 = on the current walk, 2 = known to reach a base.
        let mut state = vec![0u8; self.vertex_count()];
        let mut walk = Vec::new();
        for start in 0..self.vertex_count() {
            let mut v = start;
            loop {
                match state[v] {
                    2 => break,
                    1 => return false,
                    _ => {}
                }
                state[v] = 1;
                walk.push(v);
                match self.parent(v) {
                    Some(p) => v = p,
                    None => break,
                }
            }
            for w in walk.drain(..) {
                state[w] = 2;
            }
        }
        true
    }

    /// The radius-`r` ball around `root`, read off the explicit graph.
    pub fn ball(&self, root: usize, r: usize) -> LabeledBall {
        let mut ball = LabeledBall::new(self.permutation(root));
        let mut queue = VecDeque::from([(root, 0usize, usize::MAX)]);
        while let Some((v, local, from)) = queue.pop_front() {
            if ball.distance[local] == r {
                continue;
            }
            let mut neighbours: Vec<(usize, bool)> =
                self.children(v).iter().map(|&c| (c as usize, true)).collect();
            if let Some(p) = self.parent(v) {
                neighbours.push((p, false));
            }
            for (w, is_child) in neighbours {
                if w == from {
                    continue;
                }
                let id = ball.push(self.permutation(w), local, is_child);
                queue.push_back((w, id, v));
            }
        }
        ball
    }
}

/// Builds `F_n` exhaustively. Fails beyond [`DEFAULT_MAX_FOREST_N`].
pub fn build_forest(n: usize) -> Result<ForestGraph> {
    build_forest_with_limit(n, DEFAULT_MAX_FOREST_N)
}

pub fn build_forest_with_limit(n: usize, max_n: usize) -> Result<ForestGraph> {
    if n == 0 {
        return Err(Error::Empty);
    }
    if n > max_n || n > 12 {
        return Err(Error::SizeLimit { n, max: max_n.min(12) });
    }
    let count = factorial(n) as usize;
    let parent: Vec<u32> = (0..count)
        .into_par_iter()
        .map(|v| {
            let perm = lehmer_unrank(n, v as u64);
            match perm.sort_step() {
                Ok(p) => lehmer_rank(&p) as u32,
                Err(_) => NO_PARENT,
            }
        })
        .collect();

    let mut child_offsets = vec![0u32; count + 1];
    for &p in &parent {
        if p != NO_PARENT {
            child_offsets[p as usize + 1] += 1;
        }
    }
    for v in 0..count {
        child_offsets[v + 1] += child_offsets[v];
    }
    let mut fill = child_offsets.clone();
    let mut child_list = vec![0u32; child_offsets[count] as usize];
    for (v, &p) in parent.iter().enumerate() {
        if p != NO_PARENT {
            child_list[fill[p as usize] as usize] = v as u32;
            fill[p as usize] += 1;
        }
    }
    Ok(ForestGraph { n, parent, child_offsets, child_list })
}

/// A ball around a permutation, with vertices in breadth-first order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledBall {
    pub vertices: Vec<Permutation>,
    /// Breadth-first predecessor, i.e. the neighbour closer to the root.
    pub towards_root: Vec<Option<usize>>,
    pub distance: Vec<usize>,
    /// Forest edges inside the ball as `(child, parent)` index pairs.
    pub edges: Vec<(usize, usize)>,
}

impl LabeledBall {
    fn new(root: Permutation) -> Self {
        Self { vertices: vec![root], towards_root: vec![None], distance: vec![0], edges: Vec::new() }
    }

    fn push(&mut self, perm: Permutation, from: usize, is_child: bool) -> usize {
        let id = self.vertices.len();
        self.vertices.push(perm);
        self.towards_root.push(Some(from));
        self.distance.push(self.distance[from] + 1);
        self.edges.push(if is_child { (id, from) } else { (from, id) });
        id
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// The ball as an undirected tree hanging from its root.
    pub fn tree(&self) -> RootedTree {
        RootedTree::from_parents(&self.towards_root)
    }

    pub fn shape(&self) -> RootedTreeShape {
        canonical_shape(&self.tree())
    }

    /// Edge set as one-line label pairs, sorted; handy for comparisons.
    pub fn labeled_edges(&self) -> Vec<(Permutation, Permutation)> {
        let mut e: Vec<_> = self
            .edges
            .iter()
            .map(|&(c, p)| (self.vertices[c].clone(), self.vertices[p].clone()))
            .collect();
        e.sort();
        e
    }
}

/// Breadth-first ball of radius `r` around `root`, generated on the fly
/// from sort steps and bumps. Exact for any `n`.
pub fn local_r_ball(root: &Permutation, r: usize) -> LabeledBall {
    let mut ball = LabeledBall::new(root.clone());
    // Each queue entry remembers the neighbour it was reached from; in a
    // forest that is the only neighbour already in the ball.
    let mut queue: VecDeque<(usize, Option<Permutation>)> = VecDeque::from([(0, None)]);
    while let Some((local, from)) = queue.pop_front() {
        if ball.distance[local] == r {
            continue;
        }
        let here = ball.vertices[local].clone();
        for child in here.children() {
            if from.as_ref() == Some(&child) {
                continue;
            }
            let id = ball.push(child, local, true);
            queue.push_back((id, Some(here.clone())));
        }
        if let Ok(parent) = here.sort_step() {
            if from.as_ref() != Some(&parent) {
                let id = ball.push(parent, local, false);
                queue.push_back((id, Some(here.clone())));
            }
        }
    }
    ball
}

/// Distance to the nearest descendant leaf, by breadth-first search.
pub fn brute_nearest_leaf(perm: &Permutation) -> u64 {
    let mut level = vec![perm.clone()];
    let mut depth = 0;
    loop {
        if level.iter().any(Permutation::is_leaf) {
            return depth;
        }
        level = level.iter().flat_map(Permutation::children).collect();
        depth += 1;
    }
}

/// Distance to the farthest descendant leaf, by exhaustive depth-first
/// search over the subtree. Fails once more than `budget` vertices are visited.
pub fn brute_farthest_leaf(perm: &Permutation, budget: u64) -> Result<u64> {
    let mut stack = vec![(perm.clone(), 0u64)];
    let mut visited = 0u64;
    let mut best = 0;
    while let Some((v, depth)) = stack.pop() {
        visited += 1;
        if visited > budget {
            return Err(Error::BudgetExceeded { what: "visited vertices", budget });
        }
        let kids = v.children();
        if kids.is_empty() {
            best = best.max(depth);
        }
        stack.extend(kids.into_iter().map(|c| (c, depth + 1)));
    }
    Ok(best)
}

fn dot_from_parts<'a>(
    name: &str,
    labels: impl Iterator<Item = String>,
    edges: impl Iterator<Item = (&'a str, &'a str)>,
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph {name} {{");
    for l in labels {
        let _ = writeln!(out, "  \"{l}\";");
    }
    for (c, p) in edges {
        let _ = writeln!(out, "  \"{c}\" -> \"{p}\";");
    }
    out.push_str("}\n");
    out
}

/// DOT digraph of the whole forest, edges pointing from child to parent.
pub fn forest_to_dot(forest: &ForestGraph) -> String {
    let labels: Vec<String> =
        (0..forest.vertex_count()).map(|v| forest.permutation(v).one_line()).collect();
    dot_from_parts(
        &format!("F{}", forest.n()),
        labels.iter().cloned(),
        forest.edges().map(|(c, p)| (labels[c].as_str(), labels[p].as_str())),
    )
}

/// DOT digraph of a ball, edges pointing from child to parent.
pub fn ball_to_dot(ball: &LabeledBall) -> String {
    let labels: Vec<String> = ball.vertices.iter().map(Permutation::one_line).collect();
    dot_from_parts(
        "ball",
        labels.iter().cloned(),
        ball.edges.iter().map(|&(c, p)| (labels[c].as_str(), labels[p].as_str())),
    )
}

/// CSV dump with columns `vertex_rank,one_line,parent_rank` (empty for bases).
pub fn forest_to_csv(forest: &ForestGraph) -> String {
    let mut out = String::from("vertex_rank,one_line,parent_rank\n");
    for v in 0..forest.vertex_count() {
        let parent = forest.parent(v).map(|p| p.to_string()).unwrap_or_default();
        let _ = writeln!(out, "{v},{},{parent}", forest.permutation(v).one_line());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn p(s: &str) -> Permutation {
        s.parse().unwrap()
    }

    fn edge_labels(f: &ForestGraph) -> BTreeSet<(String, String)> {
        f.edges()
            .map(|(c, q)| (f.permutation(c).one_line(), f.permutation(q).one_line()))
            .collect()
    }

    fn derangements_inclusion_exclusion(n: usize) -> u64 {
        // D(n) = Σ_k (-1)^k n!/k!
        let mut total: i64 = 0;
        for k in 0..=n {
            let term = (factorial(n) / factorial(k)) as i64;
            total += if k % 2 == 0 { term } else { -term };
        }
        total as u64
    }

    #[test]
    fn lehmer_roundtrip() {
        for n in 1..=6 {
            for r in 0..factorial(n) {
                assert_eq!(lehmer_rank(&lehmer_unrank(n, r)), r);
            }
        }
        assert_eq!(lehmer_unrank(3, 0), p("123"));
        assert_eq!(lehmer_unrank(3, 5), p("321"));
    }

    #[test]
    fn f3_matches_figure() {
        let f = build_forest(3).unwrap();
        assert_eq!(f.vertex_count(), 6);
        let expected: BTreeSet<(String, String)> =
            [("312", "123"), ("213", "123"), ("321", "213"), ("231", "321")]
                .iter()
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .collect();
        assert_eq!(edge_labels(&f), expected);
        let bases: BTreeSet<String> = f.bases().map(|v| f.permutation(v).one_line()).collect();
        assert_eq!(bases, BTreeSet::from(["123".to_string(), "132".to_string()]));
    }

    #[test]
    fn f4_contains_figure_edges() {
        let f = build_forest(4).unwrap();
        assert_eq!(f.vertex_count(), 24);
        assert_eq!(f.edge_count(), 18);
        let e = edge_labels(&f);
        for (c, q) in crate::verify::FIGURE_F4_EDGES {
            assert!(e.contains(&(c.to_string(), q.to_string())), "{c} -> {q}");
        }
    }

    #[test]
    fn f1_is_a_single_base_leaf() {
        let f = build_forest(1).unwrap();
        assert_eq!(f.vertex_count(), 1);
        assert_eq!(f.bases().count(), 1);
        assert_eq!(f.leaves().count(), 1);
    }

    #[test]
    fn size_limit() {
        assert_eq!(build_forest(10).unwrap_err(), Error::SizeLimit { n: 10, max: 9 });
        assert!(build_forest_with_limit(3, 2).is_err());
    }

    #[test]
    fn counts_up_to_seven() {
        for n in 1..=7 {
            let f = build_forest(n).unwrap();
            assert_eq!(f.vertex_count() as u64, factorial(n));
            assert_eq!(f.bases().count() as u64, factorial(n - 1));
            // a leaf has no true fixed point: derangements plus bases whose only fixed point is 1
            let leaves = f.leaves().count() as u64;
            let expected =
                derangements_inclusion_exclusion(n) + derangements_inclusion_exclusion(n - 1);
            assert_eq!(leaves, expected, "n = {n}");
            let deranged = (0..f.vertex_count()).filter(|&v| f.permutation(v).is_derangement());
            assert!(deranged.clone().all(|v| f.children(v).is_empty()));
            assert_eq!(deranged.count() as u64, derangements_inclusion_exclusion(n));
            assert!(f.is_acyclic());
            for v in 0..f.vertex_count() {
                for &c in f.children(v) {
                    assert_eq!(f.parent(c as usize), Some(v));
                }
            }
        }
    }

    #[test]
    fn local_ball_examples() {
        let b = local_r_ball(&p("1234"), 1);
        assert_eq!(b.len(), 4);
        let kids: BTreeSet<String> = b.vertices[1..].iter().map(|v| v.one_line()).collect();
        assert_eq!(kids, BTreeSet::from(["2134".into(), "3124".into(), "4123".into()]));
        assert!(b.edges.iter().all(|&(_, parent)| parent == 0));

        let b = local_r_ball(&p("231"), 1);
        assert_eq!(b.vertices, vec![p("231"), p("321")]);
        assert_eq!(b.edges, vec![(0, 1)]);

        let b = local_r_ball(&p("32415"), 0);
        assert_eq!(b.shape(), RootedTreeShape::single_vertex());
    }

    #[test]
    fn local_ball_agrees_with_built_forest() {
        for n in 1..=6 {
            let f = build_forest(n).unwrap();
            for v in 0..f.vertex_count() {
                let perm = f.permutation(v);
                for r in 0..=3 {
                    let local = local_r_ball(&perm, r);
                    let global = f.ball(v, r);
                    assert_eq!(local.labeled_edges(), global.labeled_edges(), "{perm} r={r}");
                    let mut a = local.vertices.clone();
                    let mut b = global.vertices.clone();
                    a.sort();
                    b.sort();
                    assert_eq!(a, b);
                    assert_eq!(local.shape(), global.shape());
                }
            }
        }
    }

    #[test]
    fn distinct_one_ball_shapes_in_s4() {
        // Oracle: a 1-ball is a star, so its shape is fixed by the root degree
        // (parent if not a base, plus one child per fixed point past position 1).
        let mut degrees = BTreeSet::new();
        for r in 0..24 {
            let v = lehmer_unrank(4, r).into_values();
            let parent = usize::from(v[0] != 1);
            let fixed = (1..4).filter(|&i| v[i] as usize == i + 1).count();
            degrees.insert(parent + fixed);
        }
        assert_eq!(degrees.len(), 4);

        let shapes: BTreeSet<RootedTreeShape> =
            (0..24).map(|r| local_r_ball(&lehmer_unrank(4, r), 1).shape()).collect();
        assert_eq!(shapes.len(), degrees.len());
    }

    #[test]
    fn brute_oracles() {
        assert_eq!(brute_nearest_leaf(&p("32415")), 3);
        assert_eq!(brute_nearest_leaf(&p("2143")), 0);
        assert_eq!(brute_nearest_leaf(&p("123")), 1);
        assert_eq!(brute_farthest_leaf(&p("32415"), DEFAULT_NODE_BUDGET), Ok(9));
        assert_eq!(brute_farthest_leaf(&p("2143"), DEFAULT_NODE_BUDGET), Ok(0));
        assert_eq!(brute_farthest_leaf(&Permutation::identity(4), DEFAULT_NODE_BUDGET), Ok(7));
        assert!(matches!(
            brute_farthest_leaf(&Permutation::identity(6), 10),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn nearest_never_exceeds_farthest() {
        let f = build_forest(6).unwrap();
        for v in 0..f.vertex_count() {
            let perm = f.permutation(v);
            let near = brute_nearest_leaf(&perm);
            let far = brute_farthest_leaf(&perm, DEFAULT_NODE_BUDGET).unwrap();
            assert!(near <= far, "{perm}");
        }
    }

    fn dot_counts(dot: &str) -> (usize, usize) {
        let edges = dot.lines().filter(|l| l.contains("->")).count();
        let nodes = dot.lines().filter(|l| l.trim_end().ends_with("\";") && !l.contains("->")).count();
        (nodes, edges)
    }

    #[test]
    fn dot_export() {
        let dot = forest_to_dot(&build_forest(3).unwrap());
        assert!(dot.starts_with("digraph F3 {"));
        assert_eq!(dot_counts(&dot), (6, 4));
        assert!(dot.contains("\"231\" -> \"321\";"));
        assert_eq!(dot_counts(&forest_to_dot(&build_forest(4).unwrap())), (24, 18));
        assert_eq!(dot_counts(&ball_to_dot(&local_r_ball(&p("2143"), 0))), (1, 0));
    }

    #[test]
    fn csv_export() {
        let csv = forest_to_csv(&build_forest(3).unwrap());
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "vertex_rank,one_line,parent_rank");
        assert_eq!(lines.len(), 7);
        assert_eq!(lines[1], "0,123,");
        // 312 has rank 4 and parent 123 (rank 0)
        assert_eq!(lines[5], "4,312,0");
    }
}
