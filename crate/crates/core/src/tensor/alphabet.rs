use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Letter reserved for the time component.
pub const TIME_LETTER: i32 = -1;
/// Letter reserved for the Brownian component of the primary process.
pub const BROWNIAN_LETTER: i32 = 0;
/// Letter of the compensated jump component of the primary process.
pub const JUMP_LETTER: i32 = 1;

/// An ordered, duplicate-free set of integer letters.
///
/// Letters are mapped to dense indices `0..size` in increasing order, which
/// fixes the storage layout of every tensor over this alphabet.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Alphabet {
    inner: Arc<Inner>,
}

#[derive(PartialEq, Eq, Hash)]
struct Inner {
    letters: Vec<i32>,
    min: i32,
    lookup: Vec<Option<usize>>,
}

impl Alphabet {
    /// Builds an alphabet from arbitrary letters; they are sorted and must be distinct.
    pub fn new(letters: impl IntoIterator<Item = i32>) -> Result<Self> {
        let mut letters: Vec<i32> = letters.into_iter().collect();
        if letters.is_empty() {
            return Err(Error::InvalidAlphabet("no letters".into()));
        }
        letters.sort_unstable();
        if letters.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidAlphabet("duplicate letters".into()));
        }
        let min = letters[0];
        let span = (letters[letters.len() - 1] - min) as usize + 1;
        let mut lookup = vec![None; span];
        for (idx, &l) in letters.iter().enumerate() {
            lookup[(l - min) as usize] = Some(idx);
        }
        Ok(Self {
            inner: Arc::new(Inner { letters, min, lookup }),
        })
    }

    /// Contiguous letters `lo..=hi`.
    pub fn range(lo: i32, hi: i32) -> Result<Self> {
        if hi < lo {
            return Err(Error::InvalidAlphabet(format!("empty range {lo}..={hi}")));
        }
        Self::new(lo..=hi)
    }

    /// Letters `-1, 0, 1, ..., max_moment` of the primary process.
    pub fn primary(max_moment: i32) -> Result<Self> {
        Self::range(TIME_LETTER, max_moment)
    }

    /// Letters `{-1, 1}` of a time-extended one-dimensional price path.
    pub fn time_extended_price() -> Self {
        Self::new([TIME_LETTER, JUMP_LETTER]).expect("static alphabet")
    }

    pub fn size(&self) -> usize {
        self.inner.letters.len()
    }

    pub fn letters(&self) -> &[i32] {
        &self.inner.letters
    }

    pub fn min_letter(&self) -> i32 {
        self.inner.min
    }

    pub fn max_letter(&self) -> i32 {
        *self.inner.letters.last().expect("non-empty")
    }

    pub fn contains(&self, letter: i32) -> bool {
        self.index_of(letter).is_some()
    }

    /// Dense index of `letter`, if it belongs to the alphabet.
    #[inline]
    pub fn index_of(&self, letter: i32) -> Option<usize> {
        let off = letter.checked_sub(self.inner.min)?;
        if off < 0 {
            return None;
        }
        self.inner.lookup.get(off as usize).copied().flatten()
    }

    /// Letter stored at dense index `idx`.
    #[inline]
    pub fn letter(&self, idx: usize) -> i32 {
        self.inner.letters[idx]
    }
}

impl fmt::Debug for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Alphabet{:?}", self.inner.letters)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primary_alphabet_maps_time_letter_first() {
        let a = Alphabet::primary(3).unwrap();
        assert_eq!(a.size(), 5);
        assert_eq!(a.index_of(-1), Some(0));
        assert_eq!(a.index_of(3), Some(4));
        assert_eq!(a.index_of(4), None);
        assert_eq!(a.index_of(-2), None);
    }

    #[test]
    fn sparse_alphabet_skips_missing_letters() {
        let a = Alphabet::time_extended_price();
        assert_eq!(a.size(), 2);
        assert_eq!(a.index_of(0), None);
        assert_eq!(a.index_of(1), Some(1));
        assert_eq!(a.letter(0), -1);
    }

    #[test]
    fn duplicate_letters_rejected() {
        assert!(Alphabet::new([1, 2, 1]).is_err());
        assert!(Alphabet::new([]).is_err());
    }
}
