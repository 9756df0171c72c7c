//! Small analytic instances with known iterates, runnable as a self-check.
//!
//! Each fixture compares computed values against closed forms within a fixed
//! tolerance. [`Faults`] perturbs every projector the fixtures use, so a
//! caller can confirm that the checks actually detect a broken operator.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bestapprox::{step_badr_two_set, step_dykstra_two_set, step_dykstra_two_set_linear, DykstraTwoSet};
use crate::exec::Exec;
use crate::feasibility::{step_admm_two_set, step_dr, step_dr_two_set, AdmmState, DrState};
use crate::geometry::{ConstraintSet, Parity, SlopeBounds};
use crate::linalg::{self, max_abs_diff};
use crate::product::ProductPoint;
use crate::sets::{Ball, Constraint, Halfspace, Stripe, Subspace};

/// Deliberate defects injected into the fixtures' projectors.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Faults {
    /// added to the first coordinate of every projection
    pub projector_shift: f64,
}

/// A set whose projector is shifted by a constant.
pub struct Perturbed<S> {
    inner: S,
    shift: f64,
}

impl<S> Perturbed<S> {
    pub fn new(inner: S, faults: Faults) -> Self {
        Perturbed {
            inner,
            shift: faults.projector_shift,
        }
    }
}

impl<S: Constraint> Constraint for Perturbed<S> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn project_in_place(&self, x: &mut [f64]) {
        self.inner.project_in_place(x);
        if self.shift != 0.0 {
            x[0] += self.shift;
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub what: String,
    pub expected: f64,
    pub computed: f64,
    pub tol: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FixtureReport {
    pub name: &'static str,
    pub checks: Vec<Check>,
}

impl FixtureReport {
    fn new(name: &'static str) -> Self {
        FixtureReport {
            name,
            checks: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// `|computed - expected| <= tol`
    fn close(&mut self, what: impl Into<String>, expected: f64, computed: f64, tol: f64) {
        self.checks.push(Check {
            what: what.into(),
            expected,
            computed,
            tol,
            passed: (computed - expected).abs() <= tol,
        });
    }

    /// Records only the worst deviation of a family of comparisons.
    fn worst(&mut self, what: impl Into<String>, deviations: impl IntoIterator<Item = f64>, tol: f64) {
        let w = deviations
            .into_iter()
            .fold(0.0, |a: f64, d| if d.is_nan() { f64::NAN } else { a.max(d) });
        self.close(what, 0.0, w, tol);
    }

    /// `computed > bound`
    fn above(&mut self, what: impl Into<String>, bound: f64, computed: f64) {
        self.checks.push(Check {
            what: what.into(),
            expected: bound,
            computed,
            tol: 0.0,
            passed: computed > bound,
        });
    }
}

/// Douglas-Rachford on `|x1 - x2| <= 5` and `|x1 - x2| >= 5` from
/// `(0, -1, -2, 1)` alternates between two product points forever.
pub fn dr_cycling(faults: Faults) -> FixtureReport {
    let mut r = FixtureReport::new("dr-cycling");
    let clock = Instant::now();
    let sets = [
        Perturbed::new(
            ConstraintSet::slope(Parity::Odd, SlopeBounds::new(vec![5.0], None).expect("bounds")).expect("set"),
            faults,
        ),
        Perturbed::new(
            ConstraintSet::slope(
                Parity::Odd,
                SlopeBounds::new(vec![f64::INFINITY], Some(vec![5.0])).expect("bounds"),
            )
            .expect("set"),
            faults,
        ),
    ];
    let even = [0.0, -1.0, -2.0, 1.0];
    let odd = [-1.0, 0.0, 1.0, -2.0];
    let start = ProductPoint::from_parts(&[even[..2].to_vec(), even[2..].to_vec()]).expect("start");
    let mut s = DrState::from_point(start);
    let mut dev_x = Vec::new();
    let mut dev_m = Vec::new();
    for k in 0..=100 {
        let (want_x, want_m): (&[f64], [f64; 2]) = if k % 2 == 0 {
            (&even, [-1.0, 0.0])
        } else {
            (&odd, [0.0, -1.0])
        };
        dev_x.push(max_abs_diff(s.parts().as_flat(), want_x));
        dev_m.push(max_abs_diff(s.monitor(), &want_m));
        step_dr(&mut s, &sets, Exec::Sequential);
    }
    r.worst("product iterates alternate", dev_x, 1e-12);
    r.worst("monitored means alternate", dev_m, 1e-12);
    r.close("runtime below 1 s", 0.0, clock.elapsed().as_secs_f64(), 1.0);
    r
}

/// Disk of radius 1 at `(0, 1)` and the horizontal axis from `v = (1, 0)`:
/// Dykstra and the best-approximation Douglas-Rachford variant part ways at
/// the second step.
pub fn disk_and_line(faults: Faults) -> FixtureReport {
    let mut r = FixtureReport::new("disk-and-line");
    let a = Perturbed::new(Ball::new(vec![0.0, 1.0], 1.0), faults);
    let b = Perturbed::new(Subspace::span(2, &[vec![1.0, 0.0]]), faults);
    let v = [1.0, 0.0];
    let d1 = step_dykstra_two_set_linear(&DykstraTwoSet::new(&v), &a, &b);
    let d2 = step_dykstra_two_set_linear(&d1, &a, &b);
    let (_, x1) = step_badr_two_set(&v, &a, &b, &v);
    let (y1, x2) = step_badr_two_set(&x1, &a, &b, &v);
    let (y2, _) = step_badr_two_set(&x2, &a, &b, &v);
    let s2 = 2f64.sqrt();
    r.close("b1 = y1 = sqrt(2)/2 (Dykstra)", s2 / 2.0, d1.b[0], 1e-12);
    r.close("b1 = y1 = sqrt(2)/2 (D-R)", s2 / 2.0, y1[0], 1e-12);
    r.close("b2 first coordinate", 2.0 / (22.0 - 8.0 * s2).sqrt(), d2.b[0], 1e-6);
    r.close(
        "y2 first coordinate",
        0.5 * (s2 + 2.0) / (11.0 - 2.0 * s2).sqrt(),
        y2[0],
        1e-6,
    );
    r.close("b2 second coordinate", 0.0, d2.b[1], 1e-12);
    r.above("|b2 - y2| > 0.01", 0.01, (d2.b[0] - y2[0]).abs());
    r
}

/// `A = span{(1,1)}`, `B` the horizontal axis, start `(1, 0)`: Dykstra
/// halves each step while ADMM lands on the origin after two.
pub fn dykstra_vs_admm(faults: Faults) -> FixtureReport {
    let mut r = FixtureReport::new("dykstra-vs-admm");
    let a = Perturbed::new(Subspace::span(2, &[vec![1.0, 1.0]]), faults);
    let b = Perturbed::new(Subspace::span(2, &[vec![1.0, 0.0]]), faults);
    let mut s = DykstraTwoSet::new(&[1.0, 0.0]);
    let mut dev = Vec::new();
    for k in 1..=30 {
        s = step_dykstra_two_set(&s, &a, &b);
        dev.push(max_abs_diff(&s.b, &[2f64.powi(-k), 0.0]));
    }
    r.worst("Dykstra b_k = (2^-k, 0), k <= 30", dev, 1e-10);
    let mut m = AdmmState::new(vec![1.0, 0.0], vec![0.0, 0.0]);
    for _ in 0..2 {
        m = step_admm_two_set(&m, &a, &b);
    }
    r.close("ADMM b_2 = 0", 0.0, linalg::norm(&m.b), 1e-12);
    r
}

fn unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let a: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = linalg::norm(&a);
        if n > 0.1 {
            return linalg::scale(1.0 / n, &a);
        }
    }
}

/// A random halfspace or stripe in `R^dim` containing `anchor`.
fn random_convex(rng: &mut ChaCha8Rng, dim: usize, anchor: &[f64]) -> Box<dyn Constraint> {
    let a = unit(rng, dim);
    let c = linalg::dot(&a, anchor);
    if rng.gen_bool(0.5) {
        Box::new(Halfspace::new(a, c + rng.gen_range(0.0..1.0)))
    } else {
        let lo = c - rng.gen_range(0.0..1.0);
        Box::new(Stripe::new(a, lo, c + rng.gen_range(0.0..1.0)))
    }
}

/// Douglas-Rachford and ADMM on random convex pairs in `R^4`: with
/// `x_0 = b_0 in B`, `u_0 = 0` they satisfy `x_k = a_k + u_{k-1}` and
/// `P_B x_k = b_k`.
pub fn dr_admm_equivalence(faults: Faults) -> FixtureReport {
    let mut r = FixtureReport::new("dr-admm-equivalence");
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
    let mut dev_x = Vec::new();
    let mut dev_y = Vec::new();
    let mut idem = Vec::new();
    for _ in 0..20 {
        let anchor: Vec<f64> = (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let a = Perturbed::new(random_convex(&mut rng, 4, &anchor), faults);
        let b = Perturbed::new(random_convex(&mut rng, 4, &anchor), faults);
        let raw: Vec<f64> = (0..4).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let b0 = b.projected(&raw);
        let mut x = b0.clone();
        let mut m = AdmmState::new(b0, vec![0.0; 4]);
        for _ in 0..50 {
            let u_prev = m.u.clone();
            m = step_admm_two_set(&m, &a, &b);
            x = step_dr_two_set(&x, &a, &b).1;
            let y = b.projected(&x);
            dev_x.push(max_abs_diff(&x, &linalg::add(&m.a, &u_prev)));
            dev_y.push(max_abs_diff(&y, &m.b));
            idem.push(max_abs_diff(&b.projected(&m.b), &m.b));
        }
    }
    r.worst("x_k = a_k + u_{k-1} (20 pairs, 50 steps)", dev_x, 1e-9);
    r.worst("P_B x_k = b_k (20 pairs, 50 steps)", dev_y, 1e-9);
    // the identities hold for any pair of maps; this pins the projectors
    r.worst("P_B b_k = b_k", idem, 1e-9);
    r
}

/// For two linear subspaces and `v in B`, the best-approximation
/// Douglas-Rachford variant's `P_B x_k` equals `(P_B P_A)^k v`.
pub fn doubly_linear(faults: Faults) -> FixtureReport {
    let mut r = FixtureReport::new("doubly-linear-collapse");
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0005);
    let mut dev = Vec::new();
    for _ in 0..20 {
        let span = |rng: &mut ChaCha8Rng| {
            let k = rng.gen_range(1..=4);
            let vs: Vec<Vec<f64>> = (0..k).map(|_| unit(rng, 5)).collect();
            Subspace::span(5, &vs)
        };
        let a = Perturbed::new(span(&mut rng), faults);
        let b = Perturbed::new(span(&mut rng), faults);
        let raw: Vec<f64> = (0..5).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let v = b.projected(&raw);
        let mut x = v.clone();
        let mut alt = v.clone();
        for _ in 0..30 {
            x = step_badr_two_set(&x, &a, &b, &v).1;
            alt = b.projected(&a.projected(&alt));
            dev.push(max_abs_diff(&b.projected(&x), &alt));
        }
    }
    r.worst("P_B x_k = (P_B P_A)^k v (20 pairs, 30 steps)", dev, 1e-9);
    r
}

pub fn run_all(faults: Faults) -> Vec<FixtureReport> {
    vec![
        dr_cycling(faults),
        disk_and_line(faults),
        dykstra_vs_admm(faults),
        dr_admm_equivalence(faults),
        doubly_linear(faults),
    ]
}
