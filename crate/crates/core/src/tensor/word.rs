use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A finite sequence of letters indexing one basis element of the tensor algebra.
///
/// Text form: letters joined by `.`, e.g. `-1.0.1`; the empty word is `@`.
/// Words order first by length, then lexicographically.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(Vec<i32>);

impl Word {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn new(letters: impl Into<Vec<i32>>) -> Self {
        Self(letters.into())
    }

    pub fn single(letter: i32) -> Self {
        Self(vec![letter])
    }

    pub fn letters(&self) -> &[i32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn last(&self) -> Option<i32> {
        self.0.last().copied()
    }

    /// The word with its last letter removed (empty stays empty).
    pub fn drop_last(&self) -> Word {
        let n = self.0.len().saturating_sub(1);
        Word(self.0[..n].to_vec())
    }

    /// The word with its last two letters removed.
    pub fn drop_last_two(&self) -> Word {
        let n = self.0.len().saturating_sub(2);
        Word(self.0[..n].to_vec())
    }

    /// Concatenation `self · other`.
    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// `self · (letter)`.
    pub fn with_letter(&self, letter: i32) -> Word {
        let mut v = self.0.clone();
        v.push(letter);
        Word(v)
    }

    pub fn prefix(&self, len: usize) -> Word {
        Word(self.0[..len].to_vec())
    }

    pub fn suffix_from(&self, start: usize) -> Word {
        Word(self.0[start..].to_vec())
    }

    /// Sum of the letters.
    pub fn letter_sum(&self) -> i32 {
        self.0.iter().sum()
    }

    /// True when the word is non-empty and every letter is at least 1.
    pub fn is_jump_moment_word(&self) -> bool {
        !self.0.is_empty() && self.0.iter().all(|&l| l >= 1)
    }

    /// Largest letter, if any.
    pub fn max_letter(&self) -> Option<i32> {
        self.0.iter().copied().max()
    }

    /// All splits `self = head · tail` including the trivial ones, by increasing head length.
    pub fn splits(&self) -> impl Iterator<Item = (Word, Word)> + '_ {
        (0..=self.len()).map(move |k| (self.prefix(k), self.suffix_from(k)))
    }
}

impl From<Vec<i32>> for Word {
    fn from(v: Vec<i32>) -> Self {
        Word(v)
    }
}

impl From<&[i32]> for Word {
    fn from(v: &[i32]) -> Self {
        Word(v.to_vec())
    }
}

impl<const N: usize> From<[i32; N]> for Word {
    fn from(v: [i32; N]) -> Self {
        Word(v.to_vec())
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("@");
        }
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "@" {
            return Ok(Word::empty());
        }
        if s.is_empty() {
            return Err(Error::WordParse { token: String::new() });
        }
        s.split('.')
            .map(|tok| {
                tok.parse::<i32>()
                    .map_err(|_| Error::WordParse { token: tok.to_string() })
            })
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }
}
