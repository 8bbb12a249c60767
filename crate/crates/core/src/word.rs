//! Addresses in the binary defining tree.
//!
//! A [`Word`] is a finite string over the letters `1` and `2`; the empty word
//! is the root. Words order lexicographically with `1 < 2`, which is also the
//! canonical enumeration order used by every report in the crate.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Default cap on enumerated depths.
pub const DEFAULT_MAX_DEPTH: usize = 12;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Word(Vec<u8>);

impl Word {
    pub fn root() -> Self {
        Word(Vec::new())
    }

    pub fn from_letters(letters: &[u8]) -> Result<Self> {
        if letters.iter().any(|&l| l != 1 && l != 2) {
            return Err(Error::InvalidWord(format!("{letters:?}")));
        }
        Ok(Word(letters.to_vec()))
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, letter: u8) -> Word {
        debug_assert!(letter == 1 || letter == 2);
        let mut v = self.0.clone();
        v.push(letter);
        Word(v)
    }

    pub fn children(&self) -> (Word, Word) {
        (self.child(1), self.child(2))
    }

    pub fn parent(&self) -> Option<Word> {
        if self.0.is_empty() {
            None
        } else {
            Some(Word(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    pub fn last(&self) -> Option<u8> {
        self.0.last().copied()
    }

    pub fn prefix(&self, len: usize) -> Word {
        Word(self.0[..len.min(self.0.len())].to_vec())
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &l in &self.0 {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word(\"{self}\")")
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(|c| match c {
                '1' => Ok(1),
                '2' => Ok(2),
                _ => Err(Error::InvalidWord(s.to_string())),
            })
            .collect::<Result<Vec<u8>>>()?;
        Ok(Word(letters))
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `(w·1, w·2)`.
pub fn children(w: &Word) -> (Word, Word) {
    w.children()
}

/// All `2^k` words of depth `k` in lexicographic order, capped at [`DEFAULT_MAX_DEPTH`].
pub fn level(k: usize) -> Result<Vec<Word>> {
    level_capped(k, DEFAULT_MAX_DEPTH)
}

pub fn level_capped(k: usize, max_depth: usize) -> Result<Vec<Word>> {
    if k > max_depth {
        return Err(Error::DepthOverflow { requested: k, max: max_depth });
    }
    Ok((0..1usize << k)
        .map(|bits| {
            // most significant bit first so that the integer order is lexicographic
            Word((0..k).map(|i| 1 + ((bits >> (k - 1 - i)) & 1) as u8).collect())
        })
        .collect())
}

/// Every word of depth at most `k`, breadth first, lexicographic within a level.
pub fn up_to_level(k: usize) -> Result<Vec<Word>> {
    let mut out = Vec::new();
    for d in 0..=k {
        out.extend(level(d)?);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InterlacedWord {
    pub left: Word,
    pub right: Word,
    pub merged: Word,
}

/// Alternating merge `i1 j1 i2 j2 ...`; the tail of the longer word is appended.
pub fn interlace(w: &Word, w_hat: &Word) -> InterlacedWord {
    let (a, b) = (w.letters(), w_hat.letters());
    let mut merged = Vec::with_capacity(a.len() + b.len());
    let common = a.len().min(b.len());
    for i in 0..common {
        merged.push(a[i]);
        merged.push(b[i]);
    }
    merged.extend_from_slice(&a[common..]);
    merged.extend_from_slice(&b[common..]);
    InterlacedWord { left: w.clone(), right: w_hat.clone(), merged: Word(merged) }
}

/// Inverse of [`interlace`] given the depth of the left word.
pub fn deinterlace(merged: &Word, left_depth: usize) -> Result<(Word, Word)> {
    let m = merged.letters();
    if left_depth > m.len() {
        return Err(Error::InvalidWord(format!("{merged} cannot hold a left word of depth {left_depth}")));
    }
    let right_depth = m.len() - left_depth;
    let common = left_depth.min(right_depth);
    let mut left = Vec::with_capacity(left_depth);
    let mut right = Vec::with_capacity(right_depth);
    for i in 0..common {
        left.push(m[2 * i]);
        right.push(m[2 * i + 1]);
    }
    let tail = &m[2 * common..];
    if left_depth > right_depth {
        left.extend_from_slice(tail);
    } else {
        right.extend_from_slice(tail);
    }
    Ok((Word(left), Word(right)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn children_examples() {
        assert_eq!(children(&Word::root()), (w("1"), w("2")));
        assert_eq!(children(&w("12")), (w("121"), w("122")));
        assert_eq!(children(&w("2")), (w("21"), w("22")));
    }

    #[test]
    fn level_examples() {
        assert_eq!(level(0).unwrap(), vec![Word::root()]);
        assert_eq!(level(2).unwrap(), vec![w("11"), w("12"), w("21"), w("22")]);
        assert_eq!(level(3).unwrap().len(), 8);
        assert!(matches!(level(13), Err(Error::DepthOverflow { .. })));
    }

    #[test]
    fn level_prefix_closure() {
        for k in 0..8 {
            let cur = level(k).unwrap();
            let next = level(k + 1).unwrap();
            assert_eq!(cur.len(), 1 << k);
            assert!(next.iter().all(|n| cur.contains(&n.prefix(k))));
            assert!(cur.windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn interlace_examples() {
        assert_eq!(interlace(&Word::root(), &w("21")).merged, w("21"));
        assert_eq!(interlace(&w("11"), &w("22")).merged, w("1212"));
        assert_eq!(interlace(&w("12"), &w("2")).merged, w("122"));
    }

    #[test]
    fn deinterlace_roundtrip_exhaustive() {
        let words = up_to_level(8).unwrap();
        for a in &words {
            for b in &words {
                let iw = interlace(a, b);
                assert_eq!(iw.merged.depth(), a.depth() + b.depth());
                assert_eq!(deinterlace(&iw.merged, a.depth()).unwrap(), (a.clone(), b.clone()));
            }
        }
    }

    #[test]
    fn interlace_injective_equal_depth() {
        for d in 0..=5 {
            let lv = level(d).unwrap();
            let mut seen = std::collections::HashSet::new();
            for a in &lv {
                for b in &lv {
                    assert!(seen.insert(interlace(a, b).merged));
                }
            }
            assert_eq!(seen.len(), lv.len() * lv.len());
        }
    }

    #[test]
    fn string_form() {
        assert_eq!(Word::root().to_string(), "");
        assert_eq!(w("121").to_string(), "121");
        assert!("13".parse::<Word>().is_err());
        let j = serde_json::to_string(&w("212")).unwrap();
        assert_eq!(j, "\"212\"");
        assert_eq!(serde_json::from_str::<Word>(&j).unwrap(), w("212"));
    }
}
