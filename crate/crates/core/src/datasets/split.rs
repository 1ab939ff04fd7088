use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{DatasetError, SpectralDataset};

/// Dataset restricted to the given sample indices, in the given order.
pub fn take_subset(data: &SpectralDataset, indices: &[usize]) -> SpectralDataset {
    let samples = indices.iter().map(|&i| data.samples()[i].clone()).collect();
    SpectralDataset::from_parts_unchecked(data.omegas().to_vec(), samples, data.metadata_names().to_vec())
}

/// Uniform random split without replacement: `n_train` samples for training,
/// the rest for testing. Each side keeps the original sample order.
pub fn split_dataset(
    data: &SpectralDataset,
    n_train: usize,
    seed: u64,
) -> Result<(SpectralDataset, SpectralDataset), DatasetError> {
    if n_train == 0 {
        return Err(DatasetError::InvalidSplit("training set would be empty".into()));
    }
    if n_train >= data.len() {
        return Err(DatasetError::InvalidSplit(format!(
            "n_train = {n_train} leaves no test samples out of {}",
            data.len()
        )));
    }
    let mut idx: Vec<usize> = (0..data.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (train, test) = idx.split_at_mut(n_train);
    train.sort_unstable();
    test.sort_unstable();
    Ok((take_subset(data, train), take_subset(data, test)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::Sample;
    use crate::numerics::Complex;

    fn tagged(n: usize) -> SpectralDataset {
        let samples = (0..n)
            .map(|i| Sample::new(vec![Complex::new(1.0, 0.0)], vec![i as f64]))
            .collect();
        SpectralDataset::new(vec![1.0], samples).unwrap()
    }

    fn tags(d: &SpectralDataset) -> Vec<usize> {
        d.samples().iter().map(|s| s.metadata[0] as usize).collect()
    }

    #[test]
    fn eighty_of_a_thousand() {
        let d = tagged(1000);
        let (tr, te) = split_dataset(&d, 80, 9).unwrap();
        assert_eq!((tr.len(), te.len()), (80, 920));
        let mut all: Vec<usize> = tags(&tr).into_iter().chain(tags(&te)).collect();
        all.sort_unstable();
        assert_eq!(all, (0..1000).collect::<Vec<_>>());
    }

    #[test]
    fn seeded_split_is_repeatable() {
        let d = tagged(50);
        let a = split_dataset(&d, 10, 3).unwrap();
        let b = split_dataset(&d, 10, 3).unwrap();
        assert_eq!(tags(&a.0), tags(&b.0));
        let c = split_dataset(&d, 10, 4).unwrap();
        assert_ne!(tags(&a.0), tags(&c.0));
    }

    #[test]
    fn rejects_degenerate_sizes() {
        let d = tagged(5);
        assert!(split_dataset(&d, 0, 1).is_err());
        assert!(split_dataset(&d, 5, 1).is_err());
    }
}
