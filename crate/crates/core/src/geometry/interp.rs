//! Interpolation constraints: prescribed elevations at selected stations.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Fixed elevations `x_i = y_i` for `i` in an index set (0-based) that
/// contains both end stations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpolationSpec {
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl InterpolationSpec {
    /// Builds the spec for a profile with `n` stations. Indices are sorted;
    /// duplicates are rejected.
    pub fn new(indices: Vec<usize>, values: Vec<f64>, n: usize) -> Result<Self> {
        if indices.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: indices.len(),
                got: values.len(),
            });
        }
        let mut pairs: Vec<(usize, f64)> = indices.into_iter().zip(values).collect();
        pairs.sort_by_key(|p| p.0);
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidSpec("duplicate interpolation index".into()));
        }
        let spec = InterpolationSpec {
            indices: pairs.iter().map(|p| p.0).collect(),
            values: pairs.iter().map(|p| p.1).collect(),
        };
        spec.validate(n)?;
        Ok(spec)
    }

    /// Pins only the two end stations.
    pub fn endpoints(first: f64, last: f64, n: usize) -> Result<Self> {
        Self::new(vec![0, n - 1], vec![first, last], n)
    }

    pub(crate) fn validate(&self, n: usize) -> Result<()> {
        if let Some(&bad) = self.indices.iter().find(|&&i| i >= n) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                lo: 0,
                hi: n.saturating_sub(1),
            });
        }
        if n < 2 || self.indices.first() != Some(&0) || self.indices.last() != Some(&(n - 1)) {
            return Err(Error::InvalidSpec(
                "interpolation indices must include the first and last station".into(),
            ));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec("interpolation values must be finite".into()));
        }
        Ok(())
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn project_in_place(&self, x: &mut [f64]) {
        for (&i, &y) in self.indices.iter().zip(&self.values) {
            x[i] = y;
        }
    }
}

/// Projection onto `{x : x_i = y_i for i in I}`: overwrite the fixed entries.
pub fn project_interpolation(x: &[f64], spec: &InterpolationSpec) -> Result<Vec<f64>> {
    if let Some(&bad) = spec.indices.iter().find(|&&i| i >= x.len()) {
        return Err(Error::IndexOutOfRange {
            index: bad,
            lo: 0,
            hi: x.len().saturating_sub(1),
        });
    }
    let mut out = x.to_vec();
    spec.project_in_place(&mut out);
    Ok(out)
}
