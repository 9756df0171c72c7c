//! Best-approximation methods: iterations whose limit is the projection of
//! the anchor `v` onto the intersection, not merely some feasible point.

use crate::exec::Exec;
use crate::feasibility::{step_cycp, step_parp};
use crate::linalg::{self, dot, norm_sq};
use crate::product::ProductPoint;
use crate::sets::Constraint;
use crate::{Error, Result};

/// Haugazeau's combiner: the projection of `x` onto the intersection of the
/// two halfspaces `{p : <p - y, x - y> <= 0}` and `{p : <p - z, y - z> <= 0}`.
///
/// With `chi = <x-y, y-z>`, `mu = ||x-y||^2`, `nu = ||y-z||^2` and
/// `rho = mu nu - chi^2`, `rho` is clamped to zero when
/// `|rho| <= 1e-14 mu nu`; an empty intersection is reported when then
/// `chi < -1e-12`.
pub fn q_operator(x: &[f64], y: &[f64], z: &[f64]) -> Result<Vec<f64>> {
    let xy = linalg::sub(x, y);
    let yz = linalg::sub(y, z);
    let chi = dot(&xy, &yz);
    let mu = norm_sq(&xy);
    let nu = norm_sq(&yz);
    let mut rho = mu * nu - chi * chi;
    if rho.abs() <= 1e-14 * mu * nu {
        rho = 0.0;
    }
    if rho <= 0.0 {
        if chi < -1e-12 {
            return Err(Error::EmptyIntersection);
        }
        return Ok(z.to_vec());
    }
    if chi * nu >= rho {
        let c = 1.0 + chi / nu;
        Ok(x.iter()
            .zip(z)
            .zip(y)
            .map(|((xi, zi), yi)| xi + c * (zi - yi))
            .collect())
    } else {
        let f = nu / rho;
        Ok(y.iter()
            .zip(&xy)
            .zip(z)
            .map(|((yi, dxy), zi)| yi + f * (chi * dxy + mu * (zi - yi)))
            .collect())
    }
}

/// Halpern-Wittmann: `x_{k+1} = v/(k+1) + k/(k+1) P_m ... P_1 x_k`.
pub fn step_hw<S: Constraint>(x: &[f64], k: usize, sets: &[S], v: &[f64]) -> Vec<f64> {
    let tx = step_cycp(x, sets);
    let a = 1.0 / (k as f64 + 1.0);
    let b = k as f64 / (k as f64 + 1.0);
    v.iter().zip(&tx).map(|(vi, ti)| a * vi + b * ti).collect()
}

/// Cyclic Dykstra: one projection per step, visiting the sets in order, with
/// a ring of `m` correction vectors.
#[derive(Debug, Clone)]
pub struct CycDykState {
    pub k: usize,
    pub x: Vec<f64>,
    ring: Vec<Vec<f64>>,
}

impl CycDykState {
    pub fn new(v: &[f64], m: usize) -> Self {
        CycDykState {
            k: 0,
            x: v.to_vec(),
            ring: vec![vec![0.0; v.len()]; m],
        }
    }

    /// The correction `q_k` produced by the most recent step.
    pub fn last_correction(&self) -> &[f64] {
        let m = self.ring.len();
        &self.ring[(self.k + m - 1) % m]
    }
}

/// `x_{k+1} = P_{[k+1]}(x_k + q_{k+1-m})`, `q_{k+1} = x_k + q_{k+1-m} - x_{k+1}`.
pub fn step_cycdyk<S: Constraint>(s: &mut CycDykState, sets: &[S]) {
    let m = sets.len();
    let slot = s.k % m;
    let mut shifted = linalg::add(&s.x, &s.ring[slot]);
    let before = shifted.clone();
    sets[slot].project_in_place(&mut shifted);
    s.ring[slot] = linalg::sub(&before, &shifted);
    s.x = shifted;
    s.k += 1;
}

/// Parallel Dykstra: Dykstra on the Cartesian product and the diagonal.
#[derive(Debug, Clone)]
pub struct ParDykState {
    y: ProductPoint,
    z: ProductPoint,
    mean: Vec<f64>,
}

impl ParDykState {
    pub fn new(v: &[f64], m: usize) -> Self {
        ParDykState {
            y: ProductPoint::diagonal(v, m),
            z: ProductPoint::diagonal(&vec![0.0; v.len()], m),
            mean: v.to_vec(),
        }
    }

    pub fn monitor(&self) -> &[f64] {
        &self.mean
    }
}

/// `y_i <- P_i(z_i + xbar)`, `z_i <- z_i + xbar - y_i`.
pub fn step_pardyk<S: Constraint>(s: &mut ParDykState, sets: &[S], exec: Exec) {
    let n = s.y.part_len();
    let shifted: Vec<f64> =
        s.z.as_flat()
            .iter()
            .enumerate()
            .map(|(j, zj)| zj + s.mean[j % n])
            .collect();
    let mut y = ProductPoint::from_flat(n, shifted.clone());
    exec.for_each_chunk(y.as_flat_mut(), n, |i, yi| sets[i].project_in_place(yi));
    for ((z, sh), yj) in s.z.as_flat_mut().iter_mut().zip(&shifted).zip(y.as_flat()) {
        *z = sh - yj;
    }
    s.mean = y.mean();
    s.y = y;
}

/// Two-set Dykstra iterates `(a, b, p, q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DykstraTwoSet {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

impl DykstraTwoSet {
    pub fn new(v: &[f64]) -> Self {
        let zero = vec![0.0; v.len()];
        DykstraTwoSet {
            a: v.to_vec(),
            b: v.to_vec(),
            p: zero.clone(),
            q: zero,
        }
    }
}

/// `a+ = P_A(b + p)`, `p+ = b + p - a+`, `b+ = P_B(a+ + q)`, `q+ = a+ + q - b+`.
pub fn step_dykstra_two_set<A: Constraint, B: Constraint>(s: &DykstraTwoSet, a: &A, b: &B) -> DykstraTwoSet {
    let bp = linalg::add(&s.b, &s.p);
    let a_next = a.projected(&bp);
    let p_next = linalg::sub(&bp, &a_next);
    let aq = linalg::add(&a_next, &s.q);
    let b_next = b.projected(&aq);
    let q_next = linalg::sub(&aq, &b_next);
    DykstraTwoSet {
        a: a_next,
        b: b_next,
        p: p_next,
        q: q_next,
    }
}

/// The same recursion when `B` is a linear subspace: the `q` corrections lie
/// in `B`'s complement and drop out.
pub fn step_dykstra_two_set_linear<A: Constraint, B: Constraint>(s: &DykstraTwoSet, a: &A, b: &B) -> DykstraTwoSet {
    let bp = linalg::add(&s.b, &s.p);
    let a_next = a.projected(&bp);
    let b_next = b.projected(&a_next);
    let p_next = linalg::sub(&bp, &a_next);
    DykstraTwoSet {
        a: a_next,
        b: b_next,
        p: p_next,
        q: s.q.clone(),
    }
}

/// Haugazeau with cyclic projections: `x_{k+1} = Q(x_0, x_k, P_{[k+1]} x_k)`.
pub fn step_hcycp<S: Constraint>(x: &[f64], k: usize, sets: &[S], x0: &[f64]) -> Result<Vec<f64>> {
    let z = sets[k % sets.len()].projected(x);
    q_operator(x0, x, &z)
}

/// Haugazeau with the parallel-projection average.
pub fn step_hparp<S: Constraint>(x: &[f64], sets: &[S], x0: &[f64], exec: Exec) -> Result<Vec<f64>> {
    let z = step_parp(x, sets, exec);
    q_operator(x0, x, &z)
}

fn dr_operator<S: Constraint>(x: &ProductPoint, sets: &[S], exec: Exec) -> ProductPoint {
    let mut out = x.clone();
    let mean = x.mean();
    let n = x.part_len();
    exec.for_each_chunk(out.as_flat_mut(), n, |i, xi| {
        let mut r: Vec<f64> = mean.iter().zip(xi.iter()).map(|(m, v)| 2.0 * m - v).collect();
        sets[i].project_in_place(&mut r);
        for ((v, m), ri) in xi.iter_mut().zip(&mean).zip(&r) {
            *v = *v - m + ri;
        }
    });
    out
}

/// Haugazeau-modified Douglas-Rachford in the product space.
#[derive(Debug, Clone)]
pub struct HdrState {
    anchor: ProductPoint,
    x: ProductPoint,
    mean: Vec<f64>,
}

impl HdrState {
    pub fn new(v: &[f64], m: usize) -> Self {
        let anchor = ProductPoint::diagonal(v, m);
        HdrState {
            x: anchor.clone(),
            anchor,
            mean: v.to_vec(),
        }
    }

    pub fn point(&self) -> &ProductPoint {
        &self.x
    }

    pub fn monitor(&self) -> &[f64] {
        &self.mean
    }
}

pub fn step_hdr<S: Constraint>(s: &mut HdrState, sets: &[S], exec: Exec) -> Result<()> {
    let tx = dr_operator(&s.x, sets, exec);
    let next = q_operator(s.anchor.as_flat(), s.x.as_flat(), tx.as_flat())?;
    s.x = ProductPoint::from_flat(s.x.part_len(), next);
    s.mean = s.x.mean();
    Ok(())
}

/// Douglas-Rachford adapted to best approximation, in the product space.
#[derive(Debug, Clone)]
pub struct BaDrState {
    x: ProductPoint,
    mean: Vec<f64>,
}

impl BaDrState {
    pub fn new(v: &[f64], m: usize) -> Self {
        BaDrState {
            x: ProductPoint::diagonal(v, m),
            mean: v.to_vec(),
        }
    }

    pub fn point(&self) -> &ProductPoint {
        &self.x
    }

    pub fn monitor(&self) -> &[f64] {
        &self.mean
    }
}

/// `x_i <- x_i - xbar + P_i((v + 2 xbar - x_i) / 2)`.
pub fn step_badr<S: Constraint>(s: &mut BaDrState, sets: &[S], v: &[f64], exec: Exec) {
    let n = s.x.part_len();
    let mean = std::mem::take(&mut s.mean);
    exec.for_each_chunk(s.x.as_flat_mut(), n, |i, xi| {
        let mut r: Vec<f64> = v
            .iter()
            .zip(&mean)
            .zip(xi.iter())
            .map(|((vv, m), x)| 0.5 * (vv + 2.0 * m - x))
            .collect();
        sets[i].project_in_place(&mut r);
        for ((x, m), ri) in xi.iter_mut().zip(&mean).zip(&r) {
            *x = *x - m + ri;
        }
    });
    s.mean = s.x.mean();
}

/// Two-set form of [`step_badr`]: returns `(P_B x, x_next)` with
/// `x_next = x - P_B x + P_A(P_B x + (v - x)/2)`.
pub fn step_badr_two_set<A: Constraint, B: Constraint>(x: &[f64], a: &A, b: &B, v: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let y = b.projected(x);
    let mut r: Vec<f64> = y
        .iter()
        .zip(v)
        .zip(x)
        .map(|((yi, vi), xi)| yi + 0.5 * (vi - xi))
        .collect();
    a.project_in_place(&mut r);
    let next = x.iter().zip(&y).zip(&r).map(|((xi, yi), ri)| xi - yi + ri).collect();
    (y, next)
}
