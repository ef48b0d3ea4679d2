//! Reduced words in a finitely generated free group.
//!
//! Letters are generator indices with a sign; words maintain the invariant
//! of being freely reduced, so equality of `FreeWord` values is equality in
//! the free group. Generator 0 prints as `a`, inverses as uppercase.

use crate::error::{Error, Result};
use num_bigint::BigUint;
use std::fmt;

/// One letter of a word: a generator index and whether it is inverted.
///
/// The derived order `a < a^-1 < b < b^-1 < ...` is the letter order used
/// for lexicographic tie-breaks everywhere in the crate.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Letter {
    pub gen: u8,
    pub inv: bool,
}

impl Letter {
    pub fn new(gen: u8, inv: bool) -> Self {
        Letter { gen, inv }
    }

    pub fn inverse(self) -> Self {
        Letter { gen: self.gen, inv: !self.inv }
    }

    pub fn cancels(self, other: Letter) -> bool {
        self.gen == other.gen && self.inv != other.inv
    }

    /// Column index for tables over the doubled alphabet.
    pub fn index(self) -> usize {
        2 * self.gen as usize + self.inv as usize
    }

    pub fn from_index(i: usize) -> Self {
        Letter { gen: (i / 2) as u8, inv: i % 2 == 1 }
    }

    pub fn to_char(self) -> char {
        let base = b'a' + self.gen;
        if self.inv {
            base.to_ascii_uppercase() as char
        } else {
            base as char
        }
    }

    pub fn from_char(c: char) -> Result<Self> {
        match c {
            'a'..='z' => Ok(Letter::new(c as u8 - b'a', false)),
            'A'..='Z' => Ok(Letter::new(c as u8 - b'A', true)),
            _ => Err(Error::Serde(format!("invalid word letter {c:?}"))),
        }
    }
}

/// A freely reduced word. The identity is the empty word.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct FreeWord {
    letters: Vec<Letter>,
}

impl FreeWord {
    pub fn identity() -> Self {
        FreeWord { letters: Vec::new() }
    }

    pub fn generator(gen: u8) -> Self {
        FreeWord { letters: vec![Letter::new(gen, false)] }
    }

    pub fn letter(l: Letter) -> Self {
        FreeWord { letters: vec![l] }
    }

    /// Reduces an arbitrary letter sequence.
    pub fn from_letters<I: IntoIterator<Item = Letter>>(letters: I) -> Self {
        let mut stack: Vec<Letter> = Vec::new();
        for l in letters {
            match stack.last() {
                Some(&top) if top.cancels(l) => {
                    stack.pop();
                }
                _ => stack.push(l),
            }
        }
        FreeWord { letters: stack }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn mul(&self, other: &FreeWord) -> FreeWord {
        FreeWord::from_letters(self.letters.iter().chain(other.letters.iter()).copied())
    }

    pub fn inverse(&self) -> FreeWord {
        FreeWord { letters: self.letters.iter().rev().map(|l| l.inverse()).collect() }
    }

    pub fn pow(&self, k: i64) -> FreeWord {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut out = FreeWord::identity();
        for _ in 0..k.unsigned_abs() {
            out = out.mul(&base);
        }
        out
    }

    /// Splits into (prefix, suffix) at letter position `at`. Subwords of a
    /// reduced word are reduced.
    pub fn split_at(&self, at: usize) -> (FreeWord, FreeWord) {
        let (p, s) = self.letters.split_at(at);
        (FreeWord { letters: p.to_vec() }, FreeWord { letters: s.to_vec() })
    }

    /// Largest generator index used, if any.
    pub fn max_gen(&self) -> Option<u8> {
        self.letters.iter().map(|l| l.gen).max()
    }
}

impl fmt::Display for FreeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "e");
        }
        for l in &self.letters {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

impl std::str::FromStr for FreeWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "e" || s.is_empty() {
            return Ok(FreeWord::identity());
        }
        let mut letters = Vec::with_capacity(s.len());
        for c in s.chars() {
            letters.push(Letter::from_char(c)?);
        }
        Ok(FreeWord::from_letters(letters))
    }
}

/// Reduces a raw letter sequence to its normal form.
pub fn reduce_word(letters: &[Letter]) -> FreeWord {
    FreeWord::from_letters(letters.iter().copied())
}

/// All reduced words of length at most `n` over `rank` generators, in ball
/// order: by length, then lexicographically by letter.
pub fn free_ball(rank: u8, n: usize) -> Vec<FreeWord> {
    let alphabet: Vec<Letter> = (0..rank)
        .flat_map(|g| [Letter::new(g, false), Letter::new(g, true)])
        .collect();
    let mut ball = vec![FreeWord::identity()];
    let mut layer_start = 0;
    for _ in 0..n {
        let layer_end = ball.len();
        for i in layer_start..layer_end {
            let w = ball[i].clone();
            for &l in &alphabet {
                if w.letters.last().map_or(false, |&top| top.cancels(l)) {
                    continue;
                }
                let mut letters = w.letters.clone();
                letters.push(l);
                ball.push(FreeWord { letters });
            }
        }
        layer_start = layer_end;
    }
    ball
}

/// |B(n)| in the free group of the given rank: 1 + sum of sphere sizes
/// 2k * (2k-1)^(l-1).
pub fn free_ball_size(rank: u8, n: usize) -> BigUint {
    let mut total = BigUint::from(1u32);
    if rank == 0 {
        return total;
    }
    let mut sphere = BigUint::from(2u32 * rank as u32);
    for _ in 1..=n {
        total += &sphere;
        sphere *= 2u32 * rank as u32 - 1;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Oracle: rescan the whole letter sequence until no adjacent pair
    /// cancels, independent of the stack implementation.
    fn reduce_oracle(mut letters: Vec<Letter>) -> Vec<Letter> {
        loop {
            let mut changed = false;
            let mut out: Vec<Letter> = Vec::with_capacity(letters.len());
            let mut i = 0;
            while i < letters.len() {
                if i + 1 < letters.len() && letters[i].cancels(letters[i + 1]) {
                    i += 2;
                    changed = true;
                } else {
                    out.push(letters[i]);
                    i += 1;
                }
            }
            letters = out;
            if !changed {
                return letters;
            }
        }
    }

    fn arb_letters() -> impl Strategy<Value = Vec<Letter>> {
        prop::collection::vec((0u8..3, any::<bool>()).prop_map(|(g, i)| Letter::new(g, i)), 0..40)
    }

    #[test]
    fn reduction_examples() {
        let w: FreeWord = "abBA".parse().unwrap();
        assert!(w.is_empty());
        let w: FreeWord = "abAB".parse().unwrap();
        assert_eq!(w.len(), 4);
        assert_eq!(w.to_string(), "abAB");
    }

    #[test]
    fn ball_counts_rank2() {
        for (n, expect) in [(0usize, 1usize), (1, 5), (2, 17), (3, 53)] {
            let ball = free_ball(2, n);
            assert_eq!(ball.len(), expect, "ball radius {n}");
            assert_eq!(free_ball_size(2, n), BigUint::from(expect));
        }
        // 2 * 3^n - 1
        assert_eq!(free_ball_size(2, 10), BigUint::from(2u64 * 3u64.pow(10) - 1));
    }

    #[test]
    fn ball_counts_rank1() {
        for n in 0..6 {
            assert_eq!(free_ball(1, n).len(), 2 * n + 1);
        }
    }

    #[test]
    fn ball_is_sorted_and_distinct() {
        let ball = free_ball(2, 4);
        for pair in ball.windows(2) {
            let key = |w: &FreeWord| (w.len(), w.letters().to_vec());
            assert!(key(&pair[0]) < key(&pair[1]));
        }
    }

    #[test]
    fn split_parts_multiply_back() {
        let w: FreeWord = "abAbba".parse().unwrap();
        for at in 0..=w.len() {
            let (p, s) = w.split_at(at);
            assert_eq!(p.mul(&s), w);
        }
    }

    proptest! {
        #[test]
        fn reduce_matches_oracle(letters in arb_letters()) {
            let fast = reduce_word(&letters);
            let slow = reduce_oracle(letters);
            prop_assert_eq!(fast.letters(), &slow[..]);
        }

        #[test]
        fn mul_associative(a in arb_letters(), b in arb_letters(), c in arb_letters()) {
            let (a, b, c) = (reduce_word(&a), reduce_word(&b), reduce_word(&c));
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        }

        #[test]
        fn inverse_cancels(a in arb_letters()) {
            let a = reduce_word(&a);
            prop_assert!(a.mul(&a.inverse()).is_empty());
            prop_assert!(a.inverse().mul(&a).is_empty());
        }
    }
}
