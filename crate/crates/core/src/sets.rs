//! The [`Constraint`] abstraction the algorithms iterate over, plus a few
//! generic sets (halfspaces, stripes, balls, linear subspaces) used for small
//! analytic instances.

use crate::linalg::{self, dot, norm_sq};

/// A closed set with a computable (possibly set-valued, then resolved)
/// nearest-point map.
pub trait Constraint: Send + Sync {
    fn dim(&self) -> usize;

    /// Replaces `x` by its projection.
    fn project_in_place(&self, x: &mut [f64]);

    /// The operator used by relaxed sweeps (cyclic intrepid projections).
    /// Defaults to the projector.
    fn relax_in_place(&self, x: &mut [f64]) {
        self.project_in_place(x)
    }

    /// Affine sets get special treatment in extrapolated alternating
    /// projections.
    fn is_affine(&self) -> bool {
        false
    }

    fn projected(&self, x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        self.project_in_place(&mut y);
        y
    }

    fn distance(&self, x: &[f64]) -> f64 {
        linalg::dist(x, &self.projected(x))
    }
}

impl<T: Constraint + ?Sized> Constraint for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn project_in_place(&self, x: &mut [f64]) {
        (**self).project_in_place(x)
    }
    fn relax_in_place(&self, x: &mut [f64]) {
        (**self).relax_in_place(x)
    }
    fn is_affine(&self) -> bool {
        (**self).is_affine()
    }
}

impl<T: Constraint + ?Sized> Constraint for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn project_in_place(&self, x: &mut [f64]) {
        (**self).project_in_place(x)
    }
    fn relax_in_place(&self, x: &mut [f64]) {
        (**self).relax_in_place(x)
    }
    fn is_affine(&self) -> bool {
        (**self).is_affine()
    }
}

/// `{x : <a, x> <= b}`
#[derive(Debug, Clone)]
pub struct Halfspace {
    a: Vec<f64>,
    b: f64,
    a_norm_sq: f64,
}

impl Halfspace {
    pub fn new(a: Vec<f64>, b: f64) -> Self {
        let a_norm_sq = norm_sq(&a);
        assert!(a_norm_sq > 0.0, "halfspace normal must be nonzero");
        Halfspace { a, b, a_norm_sq }
    }
}

impl Constraint for Halfspace {
    fn dim(&self) -> usize {
        self.a.len()
    }
    fn project_in_place(&self, x: &mut [f64]) {
        let s = dot(&self.a, x);
        if s > self.b {
            linalg::axpy((self.b - s) / self.a_norm_sq, &self.a, x);
        }
    }
}

/// `{x : lo <= <a, x> <= hi}`
#[derive(Debug, Clone)]
pub struct Stripe {
    a: Vec<f64>,
    lo: f64,
    hi: f64,
    a_norm_sq: f64,
}

impl Stripe {
    pub fn new(a: Vec<f64>, lo: f64, hi: f64) -> Self {
        let a_norm_sq = norm_sq(&a);
        assert!(a_norm_sq > 0.0 && lo <= hi);
        Stripe { a, lo, hi, a_norm_sq }
    }
}

impl Constraint for Stripe {
    fn dim(&self) -> usize {
        self.a.len()
    }
    fn project_in_place(&self, x: &mut [f64]) {
        let s = dot(&self.a, x);
        if s < self.lo {
            linalg::axpy((self.lo - s) / self.a_norm_sq, &self.a, x);
        } else if s > self.hi {
            linalg::axpy((self.hi - s) / self.a_norm_sq, &self.a, x);
        }
    }
}

/// Closed Euclidean ball.
#[derive(Debug, Clone)]
pub struct Ball {
    center: Vec<f64>,
    radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Self {
        assert!(radius >= 0.0);
        Ball { center, radius }
    }
}

impl Constraint for Ball {
    fn dim(&self) -> usize {
        self.center.len()
    }
    fn project_in_place(&self, x: &mut [f64]) {
        let r = linalg::dist(x, &self.center);
        if r > self.radius {
            let f = self.radius / r;
            for (xi, ci) in x.iter_mut().zip(&self.center) {
                *xi = ci + f * (*xi - ci);
            }
        }
    }
}

/// Linear subspace spanned by an orthonormal basis.
#[derive(Debug, Clone)]
pub struct Subspace {
    dim: usize,
    basis: Vec<Vec<f64>>,
}

impl Subspace {
    /// Orthonormalises `vectors` by modified Gram-Schmidt, dropping
    /// (numerically) dependent ones.
    pub fn span(dim: usize, vectors: &[Vec<f64>]) -> Self {
        let mut basis: Vec<Vec<f64>> = Vec::new();
        for v in vectors {
            assert_eq!(v.len(), dim);
            let mut w = v.clone();
            for q in &basis {
                let c = dot(q, &w);
                linalg::axpy(-c, q, &mut w);
            }
            let nrm = linalg::norm(&w);
            if nrm > 1e-10 * linalg::norm(v).max(1.0) {
                basis.push(linalg::scale(1.0 / nrm, &w));
            }
        }
        Subspace { dim, basis }
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }
}

impl Constraint for Subspace {
    fn dim(&self) -> usize {
        self.dim
    }
    fn project_in_place(&self, x: &mut [f64]) {
        let coefs: Vec<f64> = self.basis.iter().map(|q| dot(q, x)).collect();
        x.iter_mut().for_each(|v| *v = 0.0);
        for (c, q) in coefs.iter().zip(&self.basis) {
            linalg::axpy(*c, q, x);
        }
    }
    fn is_affine(&self) -> bool {
        true
    }
}
