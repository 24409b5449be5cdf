//! Node partitions.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cluster assignment with ids `0..k`, every id used at least once.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    labels: Vec<usize>,
    k: usize,
}

impl Partition {
    /// Accepts labels already in `0..k` with every id present.
    pub fn new(labels: Vec<usize>) -> Result<Self> {
        let k = labels.iter().max().map_or(0, |m| m + 1);
        let mut seen = vec![false; k];
        for &l in &labels {
            seen[l] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidArgument(format!(
                "partition labels skip cluster id {missing}"
            )));
        }
        Ok(Self { labels, k })
    }

    /// Relabel arbitrary ids to `0..k` in order of first appearance.
    pub fn from_raw<T: std::hash::Hash + Eq + Copy>(raw: &[T]) -> Self {
        let mut ids: HashMap<T, usize> = HashMap::new();
        let labels = raw
            .iter()
            .map(|r| {
                let next = ids.len();
                *ids.entry(*r).or_insert(next)
            })
            .collect();
        Self {
            labels,
            k: ids.len(),
        }
    }

    /// Contiguous blocks of the given sizes.
    pub fn from_block_sizes(sizes: &[usize]) -> Self {
        let labels: Vec<usize> = sizes
            .iter()
            .enumerate()
            .flat_map(|(b, &s)| std::iter::repeat_n(b, s))
            .collect();
        Self::from_raw(&labels)
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    /// Restrict to `nodes` (new node `i` is old node `nodes[i]`), compacting ids.
    pub fn restrict(&self, nodes: &[usize]) -> Self {
        let raw: Vec<usize> = nodes.iter().map(|&i| self.labels[i]).collect();
        Self::from_raw(&raw)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction() {
        assert_eq!(Partition::new(vec![0, 1, 1, 0]).unwrap().k(), 2);
        assert!(Partition::new(vec![0, 2]).is_err());
        let p = Partition::from_raw(&[7u64, 3, 7, 9]);
        assert_eq!(p.labels(), &[0, 1, 0, 2]);
        assert_eq!(Partition::from_block_sizes(&[2, 0, 1]).labels(), &[0, 0, 1]);
        assert_eq!(p.restrict(&[3, 1]).labels(), &[0, 1]);
        assert_eq!(p.sizes(), vec![2, 1, 1]);
    }
}
