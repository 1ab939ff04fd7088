use std::ops::Range;

use super::{check_grid, BlaschkeError, BlaschkePhaseModel, FrequencyMap, SegmentedPhaseModel};

/// Splits `0..n` into `segments` contiguous ranges whose lengths differ by at
/// most one; the leading ranges take the remainder.
pub fn equal_partition(n: usize, segments: usize) -> Result<Vec<Range<usize>>, BlaschkeError> {
    if segments == 0 || segments > n {
        return Err(BlaschkeError::LengthMismatch {
            expected: n,
            got: segments,
        });
    }
    let base = n / segments;
    let extra = n % segments;
    let mut start = 0;
    Ok((0..segments)
        .map(|k| {
            let len = base + usize::from(k < extra);
            let r = start..start + len;
            start += len;
            r
        })
        .collect())
}

/// A frequency grid split into equal-length index segments, each with the
/// affine map that sends its own first and last frequency to -1 and 1.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPartition {
    omegas: Vec<f64>,
    ranges: Vec<Range<usize>>,
    maps: Vec<FrequencyMap>,
}

impl GridPartition {
    pub fn new(omegas: Vec<f64>, segments: usize) -> Result<Self, BlaschkeError> {
        check_grid(&omegas)?;
        let ranges = equal_partition(omegas.len(), segments)?;
        let maps = ranges
            .iter()
            .map(|r| FrequencyMap::spanning(omegas[r.start], omegas[r.end - 1]))
            .collect::<Result<_, _>>()?;
        Ok(Self {
            omegas,
            ranges,
            maps,
        })
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn segments(&self) -> usize {
        self.ranges.len()
    }

    pub fn ranges(&self) -> &[Range<usize>] {
        &self.ranges
    }

    pub fn map(&self, segment: usize) -> FrequencyMap {
        self.maps[segment]
    }

    /// Segment boundaries: each segment's first frequency plus the band end.
    pub fn boundaries(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.ranges.iter().map(|r| self.omegas[r.start]).collect();
        b.push(*self.omegas.last().unwrap());
        if b.len() == 2 && b[0] == b[1] {
            // single frequency, single segment
            b[1] = b[0] + 1.0;
        }
        b
    }

    /// Per-segment models from consecutive `[roots…, φ]` blocks of `2m+1` reals.
    pub fn models(&self, params: &[f64], roots_per_segment: usize) -> Result<Vec<BlaschkePhaseModel>, BlaschkeError> {
        let block = 2 * roots_per_segment + 1;
        if params.len() != block * self.segments() {
            return Err(BlaschkeError::LengthMismatch {
                expected: block * self.segments(),
                got: params.len(),
            });
        }
        params
            .chunks_exact(block)
            .zip(&self.maps)
            .map(|(p, &map)| BlaschkePhaseModel::from_flat(p, map))
            .collect()
    }

    pub fn segmented_model(&self, params: &[f64], roots_per_segment: usize) -> Result<SegmentedPhaseModel, BlaschkeError> {
        SegmentedPhaseModel::new(self.boundaries(), self.models(params, roots_per_segment)?)
    }
}
