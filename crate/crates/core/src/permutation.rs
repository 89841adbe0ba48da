//! Permutations in one-line notation and the two moves that define the
//! fixed point forest: the sort step (towards the base) and the bump
//! (towards the leaves).
//!
//! Positions and values are 1-indexed at every public boundary.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A bijection of `{1, …, n}` stored in one-line notation.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct Permutation {
    values: Vec<u32>,
}

/// `entries[i-1] = π(i) − i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeparationWord {
    pub entries: Vec<i64>,
}

impl Permutation {
    /// Validates `values` as a bijection of `{1, …, n}`.
    pub fn new(values: Vec<u32>) -> Result<Self> {
        let n = values.len();
        if n == 0 {
            return Err(Error::Empty);
        }
        let mut seen = vec![false; n + 1];
        for (idx, &v) in values.iter().enumerate() {
            let position = idx + 1;
            if v == 0 || v as usize > n {
                return Err(Error::OutOfRange { position, value: v as i64, n });
            }
            if std::mem::replace(&mut seen[v as usize], true) {
                return Err(Error::Duplicate { position, value: v });
            }
        }
        Ok(Self { values })
    }

    /// Caller guarantees `values` is a bijection.
    pub(crate) fn from_vec_unchecked(values: Vec<u32>) -> Self {
        debug_assert!(Self::new(values.clone()).is_ok());
        Self { values }
    }

    pub fn identity(n: usize) -> Self {
        assert!(n >= 1, "identity permutation needs n >= 1");
        Self { values: (1..=n as u32).collect() }
    }

    /// Uniformly random permutation of `{1, …, n}` (Fisher–Yates).
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        assert!(n >= 1, "random permutation needs n >= 1");
        let mut values: Vec<u32> = (1..=n as u32).collect();
        values.shuffle(rng);
        Self { values }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false; kept for API symmetry with `len`.
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `π(i)` for a 1-indexed position.
    #[inline]
    pub fn get(&self, i: usize) -> u32 {
        self.values[i - 1]
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn into_values(self) -> Vec<u32> {
        self.values
    }

    /// Position of `value`, 1-indexed.
    pub fn position_of(&self, value: u32) -> usize {
        self.values.iter().position(|&v| v == value).expect("value in range") + 1
    }

    pub fn separation_word(&self) -> SeparationWord {
        SeparationWord {
            entries: self
                .values
                .iter()
                .enumerate()
                .map(|(idx, &v)| v as i64 - (idx as i64 + 1))
                .collect(),
        }
    }

    /// Fixed points other than position 1, ascending.
    pub fn true_fixed_points(&self) -> Vec<usize> {
        true_fixed_points(&self.values).collect()
    }

    pub fn is_derangement(&self) -> bool {
        self.values.iter().enumerate().all(|(idx, &v)| v as usize != idx + 1)
    }

    /// No true fixed point, hence no children.
    pub fn is_leaf(&self) -> bool {
        true_fixed_points(&self.values).next().is_none()
    }

    /// Roots of the forest are exactly the permutations with `π(1) = 1`.
    pub fn is_base(&self) -> bool {
        self.values[0] == 1
    }

    /// The parent: remove `a = π(1)` and reinsert it at position `a`.
    pub fn sort_step(&self) -> Result<Self> {
        if self.is_base() {
            return Err(Error::Base(self.to_string()));
        }
        let mut values = self.values.clone();
        sort_step_in_place(&mut values);
        Ok(Self { values })
    }

    /// The child obtained by moving the fixed value at position `i` to the front.
    pub fn bump(&self, i: usize) -> Result<Self> {
        if i < 2 || i > self.len() || self.values[i - 1] as usize != i {
            return Err(Error::InvalidBump { perm: self.to_string(), position: i });
        }
        let mut values = self.values.clone();
        bump_in_place(&mut values, i);
        Ok(Self { values })
    }

    /// One child per true fixed point, in order of the bumped position.
    pub fn children(&self) -> Vec<Self> {
        true_fixed_points(&self.values)
            .map(|i| {
                let mut values = self.values.clone();
                bump_in_place(&mut values, i);
                Self { values }
            })
            .collect()
    }

    /// Number of sort steps to the base, and the base itself.
    pub fn walk_to_base(&self) -> (u64, Self) {
        let mut values = self.values.clone();
        let mut steps = 0u64;
        while values[0] != 1 {
            sort_step_in_place(&mut values);
            steps += 1;
        }
        (steps, Self { values })
    }

    /// [`walk_to_base`](Self::walk_to_base) giving up after `budget` steps.
    /// Walks can be as long as `2^(n-1) - 1`, and are that long for much
    /// of the identity tree.
    pub fn walk_to_base_within(&self, budget: u64) -> Result<(u64, Self)> {
        let mut values = self.values.clone();
        let mut steps = 0u64;
        while values[0] != 1 {
            if steps == budget {
                return Err(Error::BudgetExceeded { what: "sort steps to base", budget });
            }
            sort_step_in_place(&mut values);
            steps += 1;
        }
        Ok((steps, Self { values }))
    }

    pub fn is_identity(&self) -> bool {
        self.values.iter().enumerate().all(|(idx, &v)| v as usize == idx + 1)
    }

    pub fn distance_to_base(&self) -> u64 {
        self.walk_to_base().0
    }

    /// Whether this permutation lies in the tree whose base is the identity.
    pub fn in_identity_tree(&self) -> bool {
        self.walk_to_base().1.is_identity()
    }

    /// Compact label: digits run together when `n <= 9`, space separated otherwise.
    pub fn one_line(&self) -> String {
        if self.len() <= 9 {
            self.values.iter().map(|v| char::from(b'0' + *v as u8)).collect()
        } else {
            self.to_string()
        }
    }
}

/// Ascending 1-indexed positions `i >= 2` with `values[i-1] == i`.
pub(crate) fn true_fixed_points(values: &[u32]) -> impl DoubleEndedIterator<Item = usize> + '_ {
    values
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(idx, &v)| v as usize == idx + 1)
        .map(|(idx, _)| idx + 1)
}

#[inline]
pub(crate) fn sort_step_in_place(values: &mut [u32]) {
    let a = values[0] as usize;
    values[..a].rotate_left(1);
}

#[inline]
pub(crate) fn bump_in_place(values: &mut [u32], i: usize) {
    values[..i].rotate_right(1);
}

impl SeparationWord {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for v in &self.values {
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation[{}]", self.one_line())
    }
}

/// Accepts comma and/or whitespace separated values (`"3 2 4 1 5"`,
/// `"3,1,4,2"`). A single run of digits with no separator, such as `"32415"`,
/// is read one digit per entry.
impl FromStr for Permutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let tokens: Vec<&str> = s
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .collect();
        let values = match tokens.as_slice() {
            [] => return Err(Error::Empty),
            [compact] if compact.len() > 1 && compact.bytes().all(|b| b.is_ascii_digit()) => {
                compact.bytes().map(|b| (b - b'0') as u32).collect()
            }
            _ => tokens
                .iter()
                .enumerate()
                .map(|(idx, t)| {
                    t.parse::<u32>().map_err(|_| Error::Parse {
                        position: idx + 1,
                        token: (*t).to_owned(),
                    })
                })
                .collect::<Result<Vec<_>>>()?,
        };
        Self::new(values)
    }
}

impl TryFrom<Vec<u32>> for Permutation {
    type Error = Error;

    fn try_from(values: Vec<u32>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<Permutation> for Vec<u32> {
    fn from(p: Permutation) -> Self {
        p.values
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn p(s: &str) -> Permutation {
        s.parse().unwrap()
    }

    #[test]
    fn separation_words() {
        assert_eq!(p("32415").separation_word().entries, vec![2, 0, 1, -3, 0]);
        assert_eq!(Permutation::identity(4).separation_word().entries, vec![0; 4]);
        assert_eq!(p("21").separation_word().entries, vec![1, -1]);
    }

    #[test]
    fn true_fixed_points_skip_position_one() {
        assert_eq!(p("42135").true_fixed_points(), vec![2, 5]);
        assert_eq!(p("32415").true_fixed_points(), vec![2, 5]);
        assert_eq!(Permutation::identity(4).true_fixed_points(), vec![2, 3, 4]);
    }

    #[test]
    fn derangements_and_leaves() {
        assert!(p("34521").is_derangement());
        assert!(!p("1234").is_derangement());
        assert!(p("231").is_derangement());

        assert!(p("132").is_leaf());
        assert!(!p("132").is_derangement());
        assert!(!p("1234").is_leaf());
        assert!(p("2143").is_leaf());
    }

    #[test]
    fn sort_step_examples() {
        assert_eq!(p("3142").sort_step().unwrap(), p("1432"));
        assert_eq!(p("4312").sort_step().unwrap(), p("3124"));
        assert_eq!(p("21").sort_step().unwrap(), p("12"));
        assert!(matches!(p("132").sort_step(), Err(Error::Base(_))));
    }

    #[test]
    fn bump_examples() {
        assert_eq!(p("32415").bump(2).unwrap(), p("23415"));
        assert_eq!(p("32415").bump(5).unwrap(), p("53241"));
        assert_eq!(p("12").bump(2).unwrap(), p("21"));
        assert!(matches!(p("32415").bump(3), Err(Error::InvalidBump { .. })));
        assert!(matches!(p("123").bump(1), Err(Error::InvalidBump { .. })));
        assert!(matches!(p("123").bump(4), Err(Error::InvalidBump { .. })));
    }

    #[test]
    fn children_examples() {
        assert_eq!(p("42135").children(), vec![p("24135"), p("54213")]);
        assert_eq!(p("3124").children(), vec![p("4312")]);
        assert!(p("2143").children().is_empty());
    }

    #[test]
    fn distances_and_identity_tree() {
        assert_eq!(p("3142").distance_to_base(), 1);
        assert_eq!(p("4312").distance_to_base(), 2);
        assert_eq!(p("132").distance_to_base(), 0);
        assert!(p("4312").in_identity_tree());
        assert!(!p("2143").in_identity_tree());
        assert!(Permutation::identity(6).in_identity_tree());
    }

    #[test]
    fn parsing() {
        assert_eq!(p("3 2 4 1 5").values(), &[3, 2, 4, 1, 5]);
        assert_eq!(p("3,1,4,2").values(), &[3, 1, 4, 2]);
        assert_eq!(p(" 10, 1 2 3 4 5 6 7 8 9 ").len(), 10);
        assert_eq!(
            "1 1 2".parse::<Permutation>(),
            Err(Error::Duplicate { position: 2, value: 1 })
        );
        assert!(matches!("1 4 2".parse::<Permutation>(), Err(Error::OutOfRange { position: 2, .. })));
        assert!(matches!("1 x".parse::<Permutation>(), Err(Error::Parse { position: 2, .. })));
        assert_eq!("".parse::<Permutation>(), Err(Error::Empty));
        assert_eq!(p("1").values(), &[1]);
    }

    #[test]
    fn random_is_a_reproducible_bijection() {
        let a = Permutation::random(5, &mut rng::stream(11, 0));
        let b = Permutation::random(5, &mut rng::stream(11, 0));
        assert_eq!(a, b);
        assert!(Permutation::new(a.into_values()).is_ok());
    }

    #[test]
    fn random_is_uniform_on_s3() {
        // Each of the six permutations should appear with frequency 1/6 ± 0.01.
        let mut rng = rng::stream(2024, 0);
        let mut counts = std::collections::HashMap::new();
        let trials = 60_000;
        for _ in 0..trials {
            *counts.entry(Permutation::random(3, &mut rng)).or_insert(0u32) += 1;
        }
        assert_eq!(counts.len(), 6);
        for (perm, c) in counts {
            let freq = c as f64 / trials as f64;
            assert!((freq - 1.0 / 6.0).abs() <= 0.01, "{perm}: {freq}");
        }
    }

    #[test]
    fn serde_roundtrip_rejects_non_bijections() {
        let json = serde_json::to_string(&p("312")).unwrap();
        assert_eq!(json, "[3,1,2]");
        assert_eq!(serde_json::from_str::<Permutation>(&json).unwrap(), p("312"));
        assert!(serde_json::from_str::<Permutation>("[1,1]").is_err());
    }
}
