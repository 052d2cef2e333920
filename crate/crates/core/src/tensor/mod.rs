//! Truncated tensor algebra over a finite integer alphabet.
//!
//! Words, sparse word combinations with the shuffle product, and dense
//! truncated tensors with product, exponential, logarithm, inverse,
//! dilation and the homogeneous norm.

mod alphabet;
mod combination;
mod element;
mod word;

pub use alphabet::{Alphabet, BROWNIAN_LETTER, JUMP_LETTER, TIME_LETTER};
pub use combination::{shuffle_words, Coefficient, Combination, WordCombination};
pub use element::{all_words, TensorElement};
pub use word::Word;
