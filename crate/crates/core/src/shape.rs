//! Finite rooted trees and their canonical (AHU) encodings.

use std::fmt;

use serde::{Deserialize, Serialize};

/// A finite rooted tree with vertex 0 as the root.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RootedTree {
    children: Vec<Vec<usize>>,
}

impl RootedTree {
    /// A tree consisting of the root alone.
    pub fn singleton() -> Self {
        Self { children: vec![Vec::new()] }
    }

    /// Builds a tree from a parent array; `parents[0]` must be `None` and
    /// every other entry must point to an earlier vertex.
    pub fn from_parents(parents: &[Option<usize>]) -> Self {
        let mut tree = Self::singleton();
        for (v, parent) in parents.iter().enumerate().skip(1) {
            let p = parent.expect("only the root lacks a parent");
            assert!(p < v, "parents must precede children");
            let id = tree.add_child(p);
            debug_assert_eq!(id, v);
        }
        tree
    }

    pub fn add_child(&mut self, parent: usize) -> usize {
        let id = self.children.len();
        self.children.push(Vec::new());
        self.children[parent].push(id);
        id
    }

    pub fn len(&self) -> usize {
        self.children.len()
    }

    pub fn is_empty(&self) -> bool {
        self.children.is_empty()
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    /// Vertex depths, indexed by vertex.
    pub fn depths(&self) -> Vec<usize> {
        let mut depth = vec![0; self.len()];
        let mut stack = vec![0usize];
        while let Some(v) = stack.pop() {
            for &c in &self.children[v] {
                depth[c] = depth[v] + 1;
                stack.push(c);
            }
        }
        depth
    }

    /// Number of vertices at each depth, starting with the root.
    pub fn level_sizes(&self) -> Vec<usize> {
        let mut sizes = Vec::new();
        for d in self.depths() {
            if sizes.len() <= d {
                sizes.resize(d + 1, 0);
            }
            sizes[d] += 1;
        }
        sizes
    }
}

/// Order-invariant encoding of a rooted tree. Two trees get equal shapes
/// iff they are isomorphic as rooted trees.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RootedTreeShape {
    pub code: String,
    pub vertices: usize,
    pub depth: usize,
}

impl RootedTreeShape {
    pub const LEAF: &'static str = "()";

    pub fn single_vertex() -> Self {
        Self { code: Self::LEAF.to_owned(), vertices: 1, depth: 0 }
    }
}

impl fmt::Debug for RootedTreeShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Shape({})", self.code)
    }
}

impl fmt::Display for RootedTreeShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.code)
    }
}

/// AHU encoding: a leaf is `()`, an inner vertex wraps the sorted
/// concatenation of its children's codes in parentheses.
pub fn canonical_shape(tree: &RootedTree) -> RootedTreeShape {
    let n = tree.len();
    // Children always have larger ids than parents in trees built by this
    // crate, but a general post-order keeps this independent of that.
    let mut order = Vec::with_capacity(n);
    let mut stack = vec![0usize];
    while let Some(v) = stack.pop() {
        order.push(v);
        stack.extend_from_slice(tree.children(v));
    }
    let mut codes: Vec<String> = vec![String::new(); n];
    let mut height = vec![0usize; n];
    for &v in order.iter().rev() {
        let mut kids: Vec<String> =
            tree.children(v).iter().map(|&c| std::mem::take(&mut codes[c])).collect();
        kids.sort_unstable();
        let mut code = String::with_capacity(2 + kids.iter().map(String::len).sum::<usize>());
        code.push('(');
        for k in &kids {
            code.push_str(k);
        }
        code.push(')');
        codes[v] = code;
        height[v] = tree.children(v).iter().map(|&c| height[c] + 1).max().unwrap_or(0);
    }
    RootedTreeShape { code: std::mem::take(&mut codes[0]), vertices: order.len(), depth: height[0] }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_vertex_is_leaf_token() {
        let s = canonical_shape(&RootedTree::singleton());
        assert_eq!(s, RootedTreeShape::single_vertex());
        assert_eq!(s.code, RootedTreeShape::LEAF);
    }

    #[test]
    fn path_rooted_at_end_differs_from_middle() {
        let end = RootedTree::from_parents(&[None, Some(0), Some(1)]);
        let middle = RootedTree::from_parents(&[None, Some(0), Some(0)]);
        let a = canonical_shape(&end);
        let b = canonical_shape(&middle);
        assert_ne!(a, b);
        assert_eq!(a.code, "((()))");
        assert_eq!(b.code, "(()())");
        assert_eq!((a.depth, b.depth), (2, 1));
    }

    #[test]
    fn level_sizes() {
        let t = RootedTree::from_parents(&[None, Some(0), Some(0), Some(1)]);
        assert_eq!(t.level_sizes(), vec![1, 2, 1]);
    }

    fn random_parents() -> impl Strategy<Value = Vec<Option<usize>>> {
        prop::collection::vec(any::<prop::sample::Index>(), 0..40).prop_map(|idx| {
            let mut parents = vec![None];
            for (v, i) in idx.into_iter().enumerate() {
                parents.push(Some(i.index(v + 1)));
            }
            parents
        })
    }

    proptest! {
        #[test]
        fn shape_ignores_child_order(parents in random_parents(), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let tree = RootedTree::from_parents(&parents);
            let mut shuffled = tree.clone();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            for kids in shuffled.children.iter_mut() {
                kids.shuffle(&mut rng);
            }
            prop_assert_eq!(canonical_shape(&tree), canonical_shape(&shuffled));
        }

        #[test]
        fn shape_counts_vertices(parents in random_parents()) {
            let tree = RootedTree::from_parents(&parents);
            let s = canonical_shape(&tree);
            prop_assert_eq!(s.vertices, parents.len());
            prop_assert_eq!(s.code.len(), 2 * parents.len());
            prop_assert_eq!(s.depth, tree.depths().into_iter().max().unwrap());
        }
    }
}
