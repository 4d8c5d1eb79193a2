//! Sliding-window n-gram counts over skill sequences.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NGramTable {
    pub n: usize,
    pub counts: BTreeMap<Vec<usize>, u64>,
}

impl NGramTable {
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn get(&self, key: &[usize]) -> u64 {
        self.counts.get(key).copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// n-grams containing `m`, most frequent first, ties by smallest key.
    pub fn containing(&self, m: usize) -> Vec<(&Vec<usize>, u64)> {
        let mut v: Vec<_> = self
            .counts
            .iter()
            .filter(|(k, _)| k.contains(&m))
            .map(|(k, &c)| (k, c))
            .collect();
        v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        v
    }
}

/// Counts every window of length `n` inside each sequence. Windows never
/// span two sequences.
pub fn ngram_frequencies<'a, I>(sequences: I, n: usize) -> Result<NGramTable>
where
    I: IntoIterator<Item = &'a Vec<usize>>,
{
    if n == 0 {
        return Err(CoreError::InvalidParameter("n-gram length must be >= 1".into()));
    }
    let mut counts = BTreeMap::new();
    for seq in sequences {
        for w in seq.windows(n) {
            *counts.entry(w.to_vec()).or_insert(0) += 1;
        }
    }
    Ok(NGramTable { n, counts })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bigram_counts() {
        let seqs = vec![vec![0, 1, 0, 1, 2]];
        let t = ngram_frequencies(&seqs, 2).unwrap();
        assert_eq!(t.get(&[0, 1]), 2);
        assert_eq!(t.get(&[1, 0]), 1);
        assert_eq!(t.get(&[1, 2]), 1);
        assert_eq!(t.counts.len(), 3);
        assert_eq!(t.containing(1)[0].0, &vec![0, 1]);
    }

    #[test]
    fn degenerate_lengths() {
        let seqs = vec![vec![3, 3, 1], vec![1]];
        let t = ngram_frequencies(&seqs, 1).unwrap();
        assert_eq!((t.get(&[3]), t.get(&[1])), (2, 2));
        assert!(ngram_frequencies(&seqs, 4).unwrap().is_empty());
        assert!(ngram_frequencies(&seqs, 0).is_err());
    }
}
