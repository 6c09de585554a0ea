use serde::{Deserialize, Serialize};

/// A tagged half-open range of token indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Span<T> {
    pub tag: T,
    pub token_start: usize,
    pub token_end: usize,
}

impl<T> Span<T> {
    pub fn new(tag: T, token_start: usize, token_end: usize) -> Self {
        debug_assert!(token_start < token_end);
        Span {
            tag,
            token_start,
            token_end,
        }
    }

    pub fn len(&self) -> usize {
        self.token_end - self.token_start
    }

    pub fn is_empty(&self) -> bool {
        self.token_end <= self.token_start
    }

    pub fn overlaps<U>(&self, other: &Span<U>) -> bool {
        self.token_start < other.token_end && other.token_start < self.token_end
    }
}
