//! Product-space reformulation: `m` copies of the profile space, the
//! Cartesian product of the constraint sets, and the diagonal.

use crate::exec::Exec;
use crate::linalg;
use crate::sets::Constraint;
use crate::{Error, Result};

/// `m` profiles of length `n`, stored contiguously part after part.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductPoint {
    n: usize,
    data: Vec<f64>,
}

impl ProductPoint {
    pub fn from_parts(parts: &[Vec<f64>]) -> Result<Self> {
        let n = parts.first().map_or(0, Vec::len);
        if parts.len() < 2 {
            return Err(Error::InvalidSpec("product point needs at least 2 parts".into()));
        }
        if n == 0 {
            return Err(Error::InvalidSpec("empty parts".into()));
        }
        if let Some(p) = parts.iter().find(|p| p.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: p.len(),
            });
        }
        Ok(ProductPoint {
            n,
            data: parts.concat(),
        })
    }

    /// `(x, ..., x)` with `m` copies.
    pub fn diagonal(x: &[f64], m: usize) -> Self {
        assert!(m >= 1 && !x.is_empty());
        ProductPoint {
            n: x.len(),
            data: x.repeat(m),
        }
    }

    pub(crate) fn from_flat(n: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len() % n, 0);
        ProductPoint { n, data }
    }

    pub fn part_len(&self) -> usize {
        self.n
    }

    pub fn num_parts(&self) -> usize {
        self.data.len() / self.n
    }

    pub fn part(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn parts(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.n)
    }

    pub fn to_parts(&self) -> Vec<Vec<f64>> {
        self.parts().map(<[f64]>::to_vec).collect()
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn as_flat_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        linalg::mean_of_chunks(&self.data, self.n, &mut out);
        out
    }

    pub fn dist(&self, other: &ProductPoint) -> f64 {
        linalg::dist(&self.data, &other.data)
    }
}

/// `P_C`: projects every part onto its own set.
pub fn project_cartesian<S: Constraint>(p: &ProductPoint, sets: &[S], exec: Exec) -> Result<ProductPoint> {
    if sets.len() != p.num_parts() {
        return Err(Error::DimensionMismatch {
            expected: p.num_parts(),
            got: sets.len(),
        });
    }
    if let Some(s) = sets.iter().find(|s| s.dim() != p.n) {
        return Err(Error::DimensionMismatch {
            expected: p.n,
            got: s.dim(),
        });
    }
    let mut out = p.clone();
    exec.for_each_chunk(&mut out.data, p.n, |i, x| sets[i].project_in_place(x));
    Ok(out)
}

/// `P_D`: replaces every part by the mean of all parts.
pub fn project_diagonal(p: &ProductPoint) -> ProductPoint {
    ProductPoint::diagonal(&p.mean(), p.num_parts())
}

/// The Cartesian product `C_1 x ... x C_m` as a [`Constraint`] on flattened
/// product vectors.
pub struct CartesianSet<'a, S> {
    sets: &'a [S],
    n: usize,
}

impl<'a, S: Constraint> CartesianSet<'a, S> {
    pub fn new(sets: &'a [S]) -> Self {
        let n = sets.first().map_or(0, Constraint::dim);
        CartesianSet { sets, n }
    }
}

impl<S: Constraint> Constraint for CartesianSet<'_, S> {
    fn dim(&self) -> usize {
        self.n * self.sets.len()
    }
    fn project_in_place(&self, x: &mut [f64]) {
        for (chunk, s) in x.chunks_exact_mut(self.n).zip(self.sets) {
            s.project_in_place(chunk);
        }
    }
}

/// The diagonal `{(x, ..., x)}` as a [`Constraint`] on flattened product
/// vectors.
pub struct DiagonalSet {
    n: usize,
    m: usize,
}

impl DiagonalSet {
    pub fn new(n: usize, m: usize) -> Self {
        DiagonalSet { n, m }
    }
}

impl Constraint for DiagonalSet {
    fn dim(&self) -> usize {
        self.n * self.m
    }
    fn project_in_place(&self, x: &mut [f64]) {
        let mut mean = vec![0.0; self.n];
        linalg::mean_of_chunks(x, self.n, &mut mean);
        for chunk in x.chunks_exact_mut(self.n) {
            chunk.copy_from_slice(&mean);
        }
    }
    fn is_affine(&self) -> bool {
        true
    }
}
