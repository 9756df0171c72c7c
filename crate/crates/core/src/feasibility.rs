//! Feasibility-seeking projection methods.
//!
//! Every method except Douglas-Rachford iterates a single operator `T` on
//! the profile space and monitors the iterates themselves. Douglas-Rachford
//! runs in the product space and monitors the mean of its parts.

use crate::exec::Exec;
use crate::linalg::{self, dist_sq, norm_sq};
use crate::product::ProductPoint;
use crate::sets::Constraint;
use crate::{Error, Result};

/// Single-operator feasibility methods, usable as the `T` of a
/// superiorization loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Operator {
    /// `P_m ... P_1`
    CycP,
    /// `R_m ... R_1` with each set's relaxed (intrepid) operator
    CycPPlus,
    /// `(1/m) sum P_i`
    ParP,
    /// `(1/m) (P_1 + P_2 P_1 + ... + P_m ... P_1)`
    SaP,
    /// extrapolated parallel projections
    ExParP,
    /// extrapolated alternating projections, first set affine
    ExAltP,
}

impl Operator {
    pub fn apply<S: Constraint>(self, x: &[f64], sets: &[S], exec: Exec) -> Result<Vec<f64>> {
        Ok(match self {
            Operator::CycP => step_cycp(x, sets),
            Operator::CycPPlus => step_cycp_plus(x, sets),
            Operator::ParP => step_parp(x, sets, exec),
            Operator::SaP => step_sap(x, sets),
            Operator::ExParP => step_exparp(x, sets, exec),
            Operator::ExAltP => step_exaltp(x, sets, exec)?,
        })
    }
}

pub fn step_cycp<S: Constraint>(x: &[f64], sets: &[S]) -> Vec<f64> {
    let mut y = x.to_vec();
    for s in sets {
        s.project_in_place(&mut y);
    }
    y
}

pub fn step_cycp_plus<S: Constraint>(x: &[f64], sets: &[S]) -> Vec<f64> {
    let mut y = x.to_vec();
    for s in sets {
        s.relax_in_place(&mut y);
    }
    y
}

fn all_projections<S: Constraint>(x: &[f64], sets: &[S], exec: Exec) -> Vec<Vec<f64>> {
    exec.map(sets, |s| s.projected(x))
}

pub fn step_parp<S: Constraint>(x: &[f64], sets: &[S], exec: Exec) -> Vec<f64> {
    let projections = all_projections(x, sets, exec);
    let mut out = vec![0.0; x.len()];
    for p in &projections {
        linalg::axpy(1.0, p, &mut out);
    }
    out.iter_mut().for_each(|v| *v /= sets.len() as f64);
    out
}

pub fn step_sap<S: Constraint>(x: &[f64], sets: &[S]) -> Vec<f64> {
    let mut y = x.to_vec();
    let mut acc = vec![0.0; x.len()];
    for s in sets {
        s.project_in_place(&mut y);
        linalg::axpy(1.0, &y, &mut acc);
    }
    acc.iter_mut().for_each(|v| *v /= sets.len() as f64);
    acc
}

pub fn step_exparp<S: Constraint>(x: &[f64], sets: &[S], exec: Exec) -> Vec<f64> {
    let projections = all_projections(x, sets, exec);
    let num: f64 = projections.iter().map(|p| dist_sq(x, p)).sum();
    if num == 0.0 {
        return x.to_vec();
    }
    let mut dir = vec![0.0; x.len()];
    for p in &projections {
        for ((d, pi), xi) in dir.iter_mut().zip(p).zip(x) {
            *d += pi - xi;
        }
    }
    let den = norm_sq(&dir);
    if den == 0.0 {
        // only reachable when the sets do not intersect
        return x.to_vec();
    }
    let mut out = x.to_vec();
    linalg::axpy(num / den, &dir, &mut out);
    out
}

/// Extrapolated alternating projections with `I_k = {2, ..., m}` at every
/// step. `sets[0]` must be affine.
pub fn step_exaltp<S: Constraint>(x: &[f64], sets: &[S], exec: Exec) -> Result<Vec<f64>> {
    let (first, rest) = sets
        .split_first()
        .ok_or_else(|| Error::Config("no constraint sets".into()))?;
    if !first.is_affine() {
        return Err(Error::Config(
            "extrapolated alternating projections need an affine first set".into(),
        ));
    }
    if rest.is_empty() {
        return Ok(first.projected(x));
    }
    let z = first.projected(x);
    let projections = all_projections(&z, rest, exec);
    let residual: f64 = projections.iter().map(|p| dist_sq(&z, p)).sum();
    let mk = rest.len() as f64;
    let mut avg = vec![0.0; z.len()];
    for p in &projections {
        linalg::axpy(1.0 / mk, p, &mut avg);
    }
    first.project_in_place(&mut avg);
    let p = avg;
    let gap = dist_sq(&p, &z);
    let mu = if residual == 0.0 || gap == 0.0 {
        1.0
    } else {
        residual / (mk * gap)
    };
    Ok(z.iter().zip(&p).map(|(zi, pi)| zi + mu * (pi - zi)).collect())
}

/// Douglas-Rachford in the product space.
#[derive(Debug, Clone)]
pub struct DrState {
    parts: ProductPoint,
    mean: Vec<f64>,
}

impl DrState {
    /// Starts from `(v, ..., v)`.
    pub fn new(v: &[f64], m: usize) -> Self {
        Self::from_point(ProductPoint::diagonal(v, m))
    }

    pub fn from_point(parts: ProductPoint) -> Self {
        let mean = parts.mean();
        DrState { parts, mean }
    }

    pub fn parts(&self) -> &ProductPoint {
        &self.parts
    }

    /// The monitored mean of the parts.
    pub fn monitor(&self) -> &[f64] {
        &self.mean
    }
}

/// `x_i <- x_i - xbar + P_i(2 xbar - x_i)`, then recompute the mean.
pub fn step_dr<S: Constraint>(state: &mut DrState, sets: &[S], exec: Exec) {
    let n = state.parts.part_len();
    let mean = std::mem::take(&mut state.mean);
    exec.for_each_chunk(state.parts.as_flat_mut(), n, |i, x| {
        let mut r: Vec<f64> = mean.iter().zip(x.iter()).map(|(m, xi)| 2.0 * m - xi).collect();
        sets[i].project_in_place(&mut r);
        for ((xi, m), ri) in x.iter_mut().zip(&mean).zip(&r) {
            *xi = *xi - m + ri;
        }
    });
    state.mean = state.parts.mean();
}

/// Two-set Douglas-Rachford governing step:
/// `x <- P_A(2 P_B x - x) + x - P_B x`. Returns `(P_B x, x_next)`.
pub fn step_dr_two_set<A: Constraint, B: Constraint>(x: &[f64], a: &A, b: &B) -> (Vec<f64>, Vec<f64>) {
    let y = b.projected(x);
    let mut r: Vec<f64> = y.iter().zip(x).map(|(yi, xi)| 2.0 * yi - xi).collect();
    a.project_in_place(&mut r);
    let next = r.iter().zip(x).zip(&y).map(|((ri, xi), yi)| ri + xi - yi).collect();
    (y, next)
}

/// ADMM iterates for a two-set feasibility problem.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmmState {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub u: Vec<f64>,
}

impl AdmmState {
    pub fn new(b0: Vec<f64>, u0: Vec<f64>) -> Self {
        AdmmState {
            a: b0.clone(),
            b: b0,
            u: u0,
        }
    }
}

/// `a+ = P_A(b - u)`, `b+ = P_B(a+ + u)`, `u+ = u + a+ - b+`.
pub fn step_admm_two_set<A: Constraint, B: Constraint>(s: &AdmmState, a: &A, b: &B) -> AdmmState {
    let mut a_next = linalg::sub(&s.b, &s.u);
    a.project_in_place(&mut a_next);
    let mut b_next = linalg::add(&a_next, &s.u);
    b.project_in_place(&mut b_next);
    let u_next =
        s.u.iter()
            .zip(&a_next)
            .zip(&b_next)
            .map(|((u, an), bn)| u + an - bn)
            .collect();
    AdmmState {
        a: a_next,
        b: b_next,
        u: u_next,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ConstraintSet, Mode, Parity, SlopeBounds};
    use crate::product::{project_cartesian, project_diagonal};
    use crate::sets::{Halfspace, Subspace};

    fn quadrant() -> Vec<Halfspace> {
        vec![Halfspace::new(vec![1.0, 0.0], 0.0), Halfspace::new(vec![0.0, 1.0], 0.0)]
    }

    #[test]
    fn cycp_examples() {
        let c = quadrant();
        assert_eq!(step_cycp(&[1.0, 1.0], &c), vec![0.0, 0.0]);
        assert_eq!(step_cycp(&[-1.0, -1.0], &c), vec![-1.0, -1.0]);
        assert_eq!(step_cycp(&[1.0, -1.0], &c), vec![0.0, -1.0]);
    }

    #[test]
    fn cycp_plus_examples() {
        let stripe = |mode| {
            ConstraintSet::slope(Parity::Odd, SlopeBounds::new(vec![1.0], None).unwrap())
                .unwrap()
                .with_mode(mode)
        };
        let exact = vec![stripe(Mode::Exact)];
        let bold = vec![stripe(Mode::Intrepid)];
        assert_eq!(step_cycp_plus(&[0.0, 3.0], &exact), step_cycp(&[0.0, 3.0], &exact));
        assert_eq!(step_cycp_plus(&[0.0, 3.0], &bold), vec![1.5, 1.5]);
        assert_eq!(step_cycp_plus(&[0.0, 0.5], &bold), vec![0.0, 0.5]);
    }

    #[test]
    fn parp_examples() {
        let c = quadrant();
        assert_eq!(step_parp(&[1.0, 1.0], &c, Exec::Sequential), vec![0.5, 0.5]);
        assert_eq!(step_parp(&[-1.0, -2.0], &c, Exec::Parallel), vec![-1.0, -2.0]);
    }

    #[test]
    fn parp_is_diagonal_after_cartesian() {
        let c = quadrant();
        let x = [0.7, 2.5];
        let p = ProductPoint::diagonal(&x, 2);
        let q = project_diagonal(&project_cartesian(&p, &c, Exec::Sequential).unwrap());
        let direct = step_parp(&x, &c, Exec::Sequential);
        assert!(linalg::max_abs_diff(q.part(0), &direct) <= 1e-12);
    }

    #[test]
    fn sap_examples() {
        let c = quadrant();
        assert_eq!(step_sap(&[1.0, 1.0], &c), vec![0.0, 0.5]);
        assert_eq!(step_sap(&[-1.0, -1.0], &c), vec![-1.0, -1.0]);
        let one = &c[..1];
        assert_eq!(step_sap(&[1.0, 1.0], one), one[0].projected(&[1.0, 1.0]));
    }

    #[test]
    fn exparp_examples() {
        let c = quadrant();
        assert_eq!(step_exparp(&[1.0, 1.0], &c, Exec::Sequential), vec![0.0, 0.0]);
        assert_eq!(step_exparp(&[-1.0, -1.0], &c, Exec::Sequential), vec![-1.0, -1.0]);
        let one = &c[..1];
        assert_eq!(step_exparp(&[3.0, 1.0], one, Exec::Sequential), vec![0.0, 1.0]);
    }

    #[test]
    fn exaltp_examples() {
        let axis = Subspace::span(2, &[vec![1.0, 0.0]]);
        let left = Halfspace::new(vec![1.0, 0.0], 0.0);
        let sets: Vec<Box<dyn Constraint>> = vec![Box::new(axis), Box::new(left)];
        assert_eq!(
            step_exaltp(&[1.0, 1.0], &sets, Exec::Sequential).unwrap(),
            vec![0.0, 0.0]
        );
        assert_eq!(
            step_exaltp(&[-2.0, 0.0], &sets, Exec::Sequential).unwrap(),
            vec![-2.0, 0.0]
        );
        // z already in the remaining sets: mu = 1 and the result is p = z
        assert_eq!(
            step_exaltp(&[-2.0, 5.0], &sets, Exec::Sequential).unwrap(),
            vec![-2.0, 0.0]
        );
    }

    #[test]
    fn exaltp_rejects_non_affine_first() {
        assert!(matches!(
            step_exaltp(&[1.0, 1.0], &quadrant(), Exec::Sequential),
            Err(Error::Config(_))
        ));
    }

    fn cycling_sets() -> Vec<ConstraintSet> {
        vec![
            ConstraintSet::slope(Parity::Odd, SlopeBounds::new(vec![5.0], None).unwrap()).unwrap(),
            ConstraintSet::slope(
                Parity::Odd,
                SlopeBounds::new(vec![f64::INFINITY], Some(vec![5.0])).unwrap(),
            )
            .unwrap(),
        ]
    }

    #[test]
    fn dr_cycles_on_the_nonconvex_pair() {
        let sets = cycling_sets();
        let start = ProductPoint::from_parts(&[vec![0.0, -1.0], vec![-2.0, 1.0]]).unwrap();
        let mut s = DrState::from_point(start.clone());
        assert_eq!(s.monitor(), &[-1.0, 0.0]);
        step_dr(&mut s, &sets, Exec::Sequential);
        assert_eq!(s.parts().as_flat(), &[-1.0, 0.0, 1.0, -2.0]);
        assert_eq!(s.monitor(), &[0.0, -1.0]);
        step_dr(&mut s, &sets, Exec::Sequential);
        assert_eq!(s.parts(), &start);
    }

    #[test]
    fn dr_fixed_on_feasible_diagonal() {
        let c = quadrant();
        let mut s = DrState::new(&[-1.0, -3.0], 2);
        step_dr(&mut s, &c, Exec::Sequential);
        assert_eq!(s.parts().as_flat(), &[-1.0, -3.0, -1.0, -3.0]);
    }

    #[test]
    fn admm_examples() {
        let a = Subspace::span(2, &[vec![1.0, 1.0]]);
        let b = Subspace::span(2, &[vec![1.0, 0.0]]);
        let mut s = AdmmState::new(vec![1.0, 0.0], vec![0.0, 0.0]);
        for _ in 0..2 {
            s = step_admm_two_set(&s, &a, &b);
        }
        assert!(linalg::norm(&s.a) < 1e-12 && linalg::norm(&s.b) < 1e-12);

        let fixed = AdmmState::new(vec![0.0, 0.0], vec![0.0, 0.0]);
        assert_eq!(step_admm_two_set(&fixed, &a, &b), fixed);
    }
}
