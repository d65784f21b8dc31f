//! Context-token counting.
//!
//! The default counter is an approximation: a text costs
//! `max(segments, ceil(bytes / 4))` tokens, where a segment is either a
//! maximal run of alphanumeric characters or a single non-whitespace
//! punctuation character. Real tokenizers can be plugged in through
//! [`Tokenizer`]; relative comparisons (growth shape, reduction ratio) hold
//! under either.

/// Counts the context tokens a piece of text would occupy.
pub trait Tokenizer: Send + Sync {
    fn count(&self, text: &str) -> usize;

    fn name(&self) -> &str;
}

/// `max(word-ish segments, ceil(bytes/4))`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ApproxTokenizer;

impl ApproxTokenizer {
    pub fn segments(text: &str) -> usize {
        let mut count = 0;
        let mut in_word = false;
        for ch in text.chars() {
            if ch.is_alphanumeric() {
                if !in_word {
                    count += 1;
                    in_word = true;
                }
            } else {
                in_word = false;
                if !ch.is_whitespace() {
                    count += 1;
                }
            }
        }
        count
    }
}

impl Tokenizer for ApproxTokenizer {
    fn count(&self, text: &str) -> usize {
        Self::segments(text).max(text.len().div_ceil(4))
    }

    fn name(&self) -> &str {
        "approx-v1"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_is_free() {
        assert_eq!(ApproxTokenizer.count(""), 0);
        assert_eq!(ApproxTokenizer.count("   \n"), 1);
    }

    #[test]
    fn segments_count_words_and_punctuation() {
        assert_eq!(ApproxTokenizer::segments("read file"), 2);
        assert_eq!(ApproxTokenizer::segments("{\"a\": 1}"), 7);
        assert_eq!(ApproxTokenizer::segments("snake_case"), 3);
    }

    #[test]
    fn byte_floor_dominates_long_words() {
        // one segment, 20 bytes -> 5
        assert_eq!(ApproxTokenizer.count("abcdefghijklmnopqrst"), 5);
        // 4 segments, 7 bytes -> 4
        assert_eq!(ApproxTokenizer.count("a b c d"), 4);
    }
}
