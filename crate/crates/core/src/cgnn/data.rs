use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::partition::Partition;
use crate::rng::rng_from_seed;

/// Disjoint node masks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<bool>,
    pub val: Vec<bool>,
    pub test: Vec<bool>,
}

impl Split {
    pub fn new(train: Vec<bool>, val: Vec<bool>, test: Vec<bool>) -> Result<Self> {
        let n = train.len();
        if val.len() != n || test.len() != n {
            return Err(Error::Shape("split masks differ in length".into()));
        }
        if let Some(i) = (0..n).find(|&i| (train[i] as u8 + val[i] as u8 + test[i] as u8) > 1) {
            return Err(Error::InvalidArgument(format!("node {i} is in more than one split")));
        }
        Ok(Self { train, val, test })
    }

    pub fn len(&self) -> usize {
        self.train.len()
    }

    pub fn is_empty(&self) -> bool {
        self.train.is_empty()
    }

    /// `(train, val, test)` node counts.
    pub fn counts(&self) -> (usize, usize, usize) {
        let c = |m: &[bool]| m.iter().filter(|&&b| b).count();
        (c(&self.train), c(&self.val), c(&self.test))
    }
}

/// Shuffle the nodes and cut them into train/val/test by the given
/// fractions; the test set takes the remainder.
pub fn random_split(n: usize, train_frac: f64, val_frac: f64, seed: u64) -> Result<Split> {
    if !(0.0..=1.0).contains(&train_frac) || !(0.0..=1.0).contains(&val_frac) || train_frac + val_frac > 1.0 {
        return Err(Error::InvalidArgument(format!(
            "split fractions {train_frac} / {val_frac} are not a sub-partition of 1"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_from_seed(seed));
    let n_train = (train_frac * n as f64).round() as usize;
    let n_val = ((val_frac * n as f64).round() as usize).min(n - n_train);
    let mut split = Split {
        train: vec![false; n],
        val: vec![false; n],
        test: vec![false; n],
    };
    for (rank, &i) in order.iter().enumerate() {
        if rank < n_train {
            split.train[i] = true;
        } else if rank < n_train + n_val {
            split.val[i] = true;
        } else {
            split.test[i] = true;
        }
    }
    Ok(split)
}

/// One-hot block membership plus i.i.d. `N(0, sigma²)` noise.
pub fn block_features(truth: &Partition, sigma: f64, seed: u64) -> Result<DenseMatrix> {
    let noise = Normal::new(0.0, sigma).map_err(|e| Error::InvalidArgument(format!("noise scale {sigma}: {e}")))?;
    let mut rng = rng_from_seed(seed);
    let k = truth.k();
    let mut x = DenseMatrix::zeros(truth.len(), k);
    for (i, &label) in truth.labels().iter().enumerate() {
        for (j, v) in x.row_mut(i).iter_mut().enumerate() {
            *v = if j == label { 1.0 } else { 0.0 } + noise.sample(&mut rng);
        }
    }
    Ok(x)
}

/// Features, labels and split for node classification.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainData {
    pub features: DenseMatrix,
    pub labels: Vec<usize>,
    pub split: Split,
}

impl TrainData {
    pub fn new(features: DenseMatrix, labels: Vec<usize>, split: Split) -> Result<Self> {
        let n = features.rows();
        if labels.len() != n || split.len() != n {
            return Err(Error::Shape(format!(
                "{n} feature rows, {} labels, {} split entries",
                labels.len(),
                split.len()
            )));
        }
        if features.cols() == 0 {
            return Err(Error::Shape("no feature columns".into()));
        }
        if !features.is_finite() {
            return Err(Error::NonFinite("input features".into()));
        }
        let (train, _, _) = split.counts();
        if train == 0 {
            return Err(Error::InvalidArgument("empty training set".into()));
        }
        Ok(Self { features, labels, split })
    }

    pub fn num_classes(&self) -> usize {
        self.labels.iter().max().map_or(0, |m| m + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_is_a_partition() {
        let s = random_split(10, 0.6, 0.2, 3).unwrap();
        assert_eq!(s.counts(), (6, 2, 2));
        for i in 0..10 {
            assert_eq!(s.train[i] as u8 + s.val[i] as u8 + s.test[i] as u8, 1);
        }
        assert_eq!(s, random_split(10, 0.6, 0.2, 3).unwrap());
        assert!(random_split(10, 0.8, 0.3, 3).is_err());
    }

    #[test]
    fn overlapping_masks_rejected() {
        assert!(Split::new(vec![true, false], vec![true, false], vec![false, true]).is_err());
    }

    #[test]
    fn noiseless_features_are_one_hot() {
        let p = Partition::from_block_sizes(&[2, 1]);
        let x = block_features(&p, 0.0, 1).unwrap();
        assert_eq!(x.as_slice(), &[1.0, 0.0, 1.0, 0.0, 0.0, 1.0]);
    }
}
