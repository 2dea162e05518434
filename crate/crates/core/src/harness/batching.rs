use crate::error::{Error, Result};
use crate::harness::svmlight::LabeledDataset;
use crate::oracles::HingeBatch;

/// Sizes of a contiguous `m`-way split of `count` rows; the first
/// `count % m` parts get one extra row.
pub fn batch_sizes(count: usize, m: usize) -> Result<Vec<usize>> {
    if m == 0 {
        return Err(Error::invalid("number of batches must be positive"));
    }
    if m > count {
        return Err(Error::invalid(format!("cannot split {count} samples into {m} batches")));
    }
    let (base, extra) = (count / m, count % m);
    Ok((0..m).map(|i| base + usize::from(i < extra)).collect())
}

/// Splits the dataset, in order, into `m` hinge-loss components.
pub fn partition_batches(d: &LabeledDataset, m: usize) -> Result<Vec<HingeBatch>> {
    let sizes = batch_sizes(d.len(), m)?;
    let mut rest = d.samples();
    sizes
        .into_iter()
        .map(|size| {
            let (head, tail) = rest.split_at(size);
            rest = tail;
            HingeBatch::new(d.dim(), head.to_vec())
        })
        .collect()
}
