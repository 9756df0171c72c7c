//! Curvature constraints: bounds on the change of slope across a station.
//!
//! For the triple starting at 0-based position `i` with spacings
//! `tau_i = t_{i+1} - t_i`, `tau_{i+1} = t_{i+2} - t_{i+1}` the constraint is
//! `delta_i tau_i tau_{i+1} <= <u_i, x> <= gamma_i tau_i tau_{i+1}` with
//! `u_i = (tau_{i+1}, -(tau_i + tau_{i+1}), tau_i)` on positions
//! `i, i+1, i+2`. Triples three apart never share a coordinate, which makes
//! blockwise projection exact.

use serde::{Deserialize, Serialize};

use super::Breakpoints;
use crate::{Error, Result};

/// Upper (`gamma`) and lower (`delta`) bounds on consecutive slope
/// differences, one per interior station.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureBounds {
    gamma: Vec<f64>,
    delta: Vec<f64>,
}

impl CurvatureBounds {
    pub fn new(gamma: Vec<f64>, delta: Vec<f64>) -> Result<Self> {
        let b = CurvatureBounds { gamma, delta };
        b.validate()?;
        Ok(b)
    }

    /// `delta = -gamma`.
    pub fn symmetric(gamma: Vec<f64>) -> Result<Self> {
        let delta = gamma.iter().map(|g| -g).collect();
        Self::new(gamma, delta)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.gamma.len() != self.delta.len() {
            return Err(Error::DimensionMismatch {
                expected: self.gamma.len(),
                got: self.delta.len(),
            });
        }
        for (i, (&g, &d)) in self.gamma.iter().zip(&self.delta).enumerate() {
            if !(g >= d) {
                return Err(Error::InvalidSpec(format!(
                    "station {i}: need gamma ({g}) >= delta ({d})"
                )));
            }
        }
        Ok(())
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn delta(&self) -> &[f64] {
        &self.delta
    }

    pub fn len(&self) -> usize {
        self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma.is_empty()
    }
}

/// Precomputed normal and bounds for one triple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Triple {
    pub u: [f64; 3],
    pub norm_sq: f64,
    /// `delta_i tau_i tau_{i+1}`
    pub lo: f64,
    /// `gamma_i tau_i tau_{i+1}`
    pub hi: f64,
}

impl Triple {
    fn new(tau0: f64, tau1: f64, gamma: f64, delta: f64) -> Self {
        let u = [tau1, -(tau0 + tau1), tau0];
        let tt = tau0 * tau1;
        Triple {
            u,
            norm_sq: u[0] * u[0] + u[1] * u[1] + u[2] * u[2],
            lo: delta * tt,
            hi: gamma * tt,
        }
    }

    #[inline]
    fn inner(&self, x: &[f64]) -> f64 {
        self.u[0] * x[0] + self.u[1] * x[1] + self.u[2] * x[2]
    }

    #[inline]
    fn shift(&self, x: &mut [f64], coef: f64) {
        for (xk, uk) in x.iter_mut().zip(&self.u) {
            *xk += coef * uk;
        }
    }

    /// `x` is the 3-slice starting at the triple's first position.
    pub fn project(&self, x: &mut [f64]) {
        let s = self.inner(x);
        if s < self.lo {
            self.shift(x, (self.lo - s) / self.norm_sq);
        } else if s > self.hi {
            self.shift(x, (self.hi - s) / self.norm_sq);
        }
    }

    pub fn intrepid(&self, x: &mut [f64]) {
        let s = self.inner(x);
        let mid = 0.5 * (self.lo + self.hi);
        if s < (3.0 * self.lo - self.hi) / 2.0 {
            self.shift(x, -(s - mid) / self.norm_sq);
        } else if s < self.lo {
            self.shift(x, -2.0 * (s - self.lo) / self.norm_sq);
        } else if s <= self.hi {
        } else if s <= (3.0 * self.hi - self.lo) / 2.0 {
            self.shift(x, -2.0 * (s - self.hi) / self.norm_sq);
        } else {
            self.shift(x, -(s - mid) / self.norm_sq);
        }
    }
}

pub(crate) fn triples(t: &Breakpoints, b: &CurvatureBounds) -> Result<Vec<Triple>> {
    let tau = t.spacings();
    if b.len() + 2 != t.len() {
        return Err(Error::DimensionMismatch {
            expected: t.len().saturating_sub(2),
            got: b.len(),
        });
    }
    Ok((0..b.len())
        .map(|i| Triple::new(tau[i], tau[i + 1], b.gamma[i], b.delta[i]))
        .collect())
}

/// 0-based start of the first triple in block `j` (1, 2 or 3).
pub(crate) fn block_start(j: u8) -> Result<usize> {
    match j {
        1..=3 => Ok(j as usize - 1),
        _ => Err(Error::IndexOutOfRange {
            index: j as usize,
            lo: 1,
            hi: 3,
        }),
    }
}

fn single(
    x: &[f64],
    i: usize,
    b: &CurvatureBounds,
    t: &Breakpoints,
    apply: impl Fn(&Triple, &mut [f64]),
) -> Result<Vec<f64>> {
    if x.len() != t.len() {
        return Err(Error::DimensionMismatch {
            expected: t.len(),
            got: x.len(),
        });
    }
    let tr = triples(t, b)?;
    let triple = tr.get(i).ok_or(Error::IndexOutOfRange {
        index: i,
        lo: 0,
        hi: t.len().saturating_sub(3),
    })?;
    let mut out = x.to_vec();
    apply(triple, &mut out[i..i + 3]);
    Ok(out)
}

/// Projection onto the single curvature constraint whose triple starts at
/// 0-based position `i`.
pub fn project_curvature_single(x: &[f64], i: usize, b: &CurvatureBounds, t: &Breakpoints) -> Result<Vec<f64>> {
    single(x, i, b, t, Triple::project)
}

/// Intrepid counterpart of [`project_curvature_single`].
pub fn intrepid_curvature_single(x: &[f64], i: usize, b: &CurvatureBounds, t: &Breakpoints) -> Result<Vec<f64>> {
    single(x, i, b, t, Triple::intrepid)
}

pub(crate) fn apply_block_in_place(
    x: &mut [f64],
    triples: &[Triple],
    start: usize,
    apply: impl Fn(&Triple, &mut [f64]),
) {
    let mut i = start;
    while i < triples.len() {
        apply(&triples[i], &mut x[i..i + 3]);
        i += 3;
    }
}

fn block(
    x: &[f64],
    j: u8,
    b: &CurvatureBounds,
    t: &Breakpoints,
    apply: impl Fn(&Triple, &mut [f64]),
) -> Result<Vec<f64>> {
    let start = block_start(j)?;
    if x.len() != t.len() {
        return Err(Error::DimensionMismatch {
            expected: t.len(),
            got: x.len(),
        });
    }
    let tr = triples(t, b)?;
    let mut out = x.to_vec();
    apply_block_in_place(&mut out, &tr, start, apply);
    Ok(out)
}

/// Exact projection onto block `C_[j]`, `j` in `1..=3`: every third
/// constraint starting with the `j`-th.
pub fn project_curvature_block(x: &[f64], j: u8, b: &CurvatureBounds, t: &Breakpoints) -> Result<Vec<f64>> {
    block(x, j, b, t, Triple::project)
}

pub fn intrepid_curvature_block(x: &[f64], j: u8, b: &CurvatureBounds, t: &Breakpoints) -> Result<Vec<f64>> {
    block(x, j, b, t, Triple::intrepid)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    fn unit_t(n: usize) -> Breakpoints {
        Breakpoints::new((0..n).map(|i| i as f64).collect()).unwrap()
    }

    #[test]
    fn single_examples() {
        let t = unit_t(3);
        let b = CurvatureBounds::new(vec![0.0], vec![0.0]).unwrap();
        let third = 1.0 / 3.0;
        let p = project_curvature_single(&[0.0, 1.0, 0.0], 0, &b, &t).unwrap();
        assert!(close(&p, &[third; 3]), "{p:?}");
        let p = project_curvature_single(&[0.0, -1.0, 0.0], 0, &b, &t).unwrap();
        assert!(close(&p, &[-third; 3]), "{p:?}");

        let wide = CurvatureBounds::new(vec![3.0], vec![-3.0]).unwrap();
        let x = [0.0, 1.0, 0.0];
        assert_eq!(project_curvature_single(&x, 0, &wide, &t).unwrap(), x.to_vec());
    }

    #[test]
    fn single_index_out_of_range() {
        let t = unit_t(4);
        let b = CurvatureBounds::symmetric(vec![1.0; 2]).unwrap();
        assert!(matches!(
            project_curvature_single(&[0.0; 4], 2, &b, &t),
            Err(Error::IndexOutOfRange { index: 2, .. })
        ));
    }

    #[test]
    fn block_two_leaves_first_entry() {
        let t = unit_t(4);
        let b = CurvatureBounds::symmetric(vec![0.1; 2]).unwrap();
        let x = [7.0, 0.0, 5.0, 0.0];
        let p = project_curvature_block(&x, 2, &b, &t).unwrap();
        assert_eq!(p[0], 7.0);
        assert!(p[1..].iter().zip(&x[1..]).any(|(a, b)| a != b));
        let single = project_curvature_single(&x, 1, &b, &t).unwrap();
        assert_eq!(p, single);
    }

    #[test]
    fn block_one_on_three_points_is_single() {
        let t = Breakpoints::new(vec![0.0, 2.0, 3.0]).unwrap();
        let b = CurvatureBounds::new(vec![0.2], vec![-0.1]).unwrap();
        let x = [1.0, 3.0, -2.0];
        assert_eq!(
            project_curvature_block(&x, 1, &b, &t).unwrap(),
            project_curvature_single(&x, 0, &b, &t).unwrap()
        );
        assert!(project_curvature_block(&x, 4, &b, &t).is_err());
    }

    #[test]
    fn intrepid_examples() {
        let t = unit_t(3);
        let b = CurvatureBounds::new(vec![3.0], vec![-3.0]).unwrap();
        let x = [0.0, 1.0, 0.0];
        assert_eq!(intrepid_curvature_single(&x, 0, &b, &t).unwrap(), x.to_vec());

        let b = CurvatureBounds::new(vec![1.0], vec![-1.0]).unwrap();
        let p = intrepid_curvature_single(&[0.0, 2.0, 0.0], 0, &b, &t).unwrap();
        let inner = p[0] - 2.0 * p[1] + p[2];
        assert!(inner.abs() < 1e-12, "{p:?}");
    }

    #[test]
    fn intrepid_zero_width_is_projection() {
        let t = Breakpoints::new(vec![0.0, 1.5, 4.0]).unwrap();
        let b = CurvatureBounds::new(vec![0.3], vec![0.3]).unwrap();
        for x in [[0.0, 1.0, 0.0], [2.0, -1.0, 5.0], [0.0, 0.45, 1.5]] {
            let a = intrepid_curvature_single(&x, 0, &b, &t).unwrap();
            let p = project_curvature_single(&x, 0, &b, &t).unwrap();
            assert!(close(&a, &p), "{a:?} vs {p:?}");
        }
    }
}
