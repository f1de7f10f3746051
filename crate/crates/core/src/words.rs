//! Reduced words in a free group.
//!
//! Letters are nonzero integers: `k > 0` is generator `k - 1`, `-k` its
//! inverse.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::geometry::{ExtIsometry, Isometry};

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(pub Vec<i32>);

/// Shortlex rank of a letter: g1 < g1^-1 < g2 < g2^-1 < ...
fn letter_rank(l: i32) -> u32 {
    2 * (l.unsigned_abs() - 1) + u32::from(l < 0)
}

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn generator(index: usize) -> Self {
        Word(vec![index as i32 + 1])
    }

    pub fn from_letters(letters: &[i32]) -> Self {
        Word(letters.to_vec()).reduced()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[i32] {
        &self.0
    }

    pub fn reduced(&self) -> Self {
        let mut out: Vec<i32> = Vec::with_capacity(self.0.len());
        for &l in &self.0 {
            if out.last() == Some(&-l) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    /// Freely reduced product.
    pub fn mul(&self, other: &Word) -> Word {
        let mut out = self.0.clone();
        for &l in &other.0 {
            if out.last() == Some(&-l) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| -l).collect())
    }

    pub fn pow(&self, n: i32) -> Word {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut out = Word::empty();
        for _ in 0..n.unsigned_abs() {
            out = out.mul(&base);
        }
        out
    }

    pub fn evaluate(&self, gens: &[Isometry]) -> Isometry {
        self.evaluate_ext(gens).to_f64()
    }

    pub fn evaluate_ext(&self, gens: &[Isometry]) -> ExtIsometry {
        let mut m = ExtIsometry::IDENTITY;
        for &l in &self.0 {
            let g = ExtIsometry::from(gens[(l.unsigned_abs() - 1) as usize]);
            m = m * if l > 0 { g } else { g.inverse() };
        }
        m
    }

    /// Strips conjugating prefix/suffix pairs, leaving a cyclically reduced word.
    pub fn cyclically_reduced(&self) -> Word {
        let w = self.reduced().0;
        let (mut i, mut j) = (0usize, w.len());
        while j > i + 1 && w[i] == -w[j - 1] {
            i += 1;
            j -= 1;
        }
        Word(w[i..j].to_vec())
    }

    /// Smallest shortlex rotation of the cyclic reduction of `self` or of its
    /// inverse; equal exactly for words whose free-group elements are
    /// conjugate up to inversion.
    pub fn conjugacy_key(&self) -> Word {
        let c = self.cyclically_reduced();
        let a = min_rotation(&c.0);
        let b = min_rotation(&c.inverse().0);
        let (a, b) = (Word(a), Word(b));
        if a <= b {
            a
        } else {
            b
        }
    }

    /// Largest `k` with `self` conjugate to `r^k` for some root `r`.
    pub fn power_exponent(&self) -> usize {
        let c = self.cyclically_reduced().0;
        let n = c.len();
        if n == 0 {
            return 0;
        }
        for p in 1..=n {
            if n.is_multiple_of(p) && (0..n).all(|i| c[i] == c[i % p]) {
                return n / p;
            }
        }
        1
    }

    /// Highest generator index used plus one.
    pub fn rank_used(&self) -> usize {
        self.0
            .iter()
            .map(|l| l.unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }

    /// Replace each generator letter by a word (and inverses by inverse words).
    pub fn substitute(&self, images: &[Word]) -> Word {
        let mut out = Word::empty();
        for &l in &self.0 {
            let w = &images[(l.unsigned_abs() - 1) as usize];
            out = out.mul(&if l > 0 { w.clone() } else { w.inverse() });
        }
        out
    }
}

fn shortlex_cmp(a: &[i32], b: &[i32]) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| {
        a.iter()
            .map(|&l| letter_rank(l))
            .cmp(b.iter().map(|&l| letter_rank(l)))
    })
}

fn min_rotation(w: &[i32]) -> Vec<i32> {
    let n = w.len();
    let mut best: Vec<i32> = w.to_vec();
    for s in 1..n {
        let rot: Vec<i32> = w[s..].iter().chain(w[..s].iter()).copied().collect();
        if shortlex_cmp(&rot, &best) == Ordering::Less {
            best = rot;
        }
    }
    best
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        shortlex_cmp(&self.0, &other.0)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|&l| {
                if l > 0 {
                    format!("g{}", l)
                } else {
                    format!("g{}^-1", -l)
                }
            })
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn word_strategy() -> impl Strategy<Value = Vec<i32>> {
        prop::collection::vec(
            prop_oneof![Just(1), Just(-1), Just(2), Just(-2), Just(3), Just(-3)],
            0..14,
        )
    }

    #[test]
    fn reduction_and_inverse() {
        let w = Word::from_letters(&[1, 2, -2, -1, 3]);
        assert_eq!(w, Word(vec![3]));
        assert!(w.mul(&w.inverse()).is_empty());
    }

    #[test]
    fn cyclic_reduction() {
        let w = Word::from_letters(&[2, 1, 1, -2]);
        assert_eq!(w.cyclically_reduced(), Word(vec![1, 1]));
        assert_eq!(w.power_exponent(), 2);
        assert_eq!(Word::from_letters(&[1, 2, 1, 2, 1, 2]).power_exponent(), 3);
        assert_eq!(Word::from_letters(&[1, 2, -1, -2]).power_exponent(), 1);
    }

    proptest! {
        #[test]
        fn conjugates_share_key(w in word_strategy(), c in word_strategy()) {
            let w = Word::from_letters(&w);
            let c = Word::from_letters(&c);
            let conj = c.mul(&w).mul(&c.inverse());
            prop_assert_eq!(conj.conjugacy_key(), w.conjugacy_key());
            prop_assert_eq!(w.inverse().conjugacy_key(), w.conjugacy_key());
        }

        #[test]
        fn product_is_reduced(a in word_strategy(), b in word_strategy()) {
            let p = Word::from_letters(&a).mul(&Word::from_letters(&b));
            prop_assert_eq!(p.reduced(), p);
        }
    }
}
