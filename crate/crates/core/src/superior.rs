//! Superiorization of a feasibility operator `T` with `Fix T = C`.
//!
//! Each pass perturbs the current iterate by a step of length `theta` along
//! `(x_k - v) / ||x_k - v||`, halves `theta`, and accepts `T` of the
//! perturbed point only when it is no farther from `v` than `x_k` and has a
//! strictly smaller performance value. A rejected pass keeps `x_k`.

use serde::{Deserialize, Serialize};

use crate::linalg;

/// Sign of the perturbation step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Perturbation {
    /// `x + theta (x - v) / ||x - v||`, the step as usually stated. It moves
    /// away from `v`, so the proximity test rejects every pass with
    /// `x_k != v`.
    #[default]
    AwayFromAnchor,
    /// `x - theta (x - v) / ||x - v||`
    TowardAnchor,
}

#[derive(Debug, Clone)]
pub struct SuperiorState {
    pub k: usize,
    pub x: Vec<f64>,
    /// `2^-j` after `j` passes
    pub theta: f64,
    d_current: f64,
}

impl SuperiorState {
    /// `d_v` is the performance value of `v`.
    pub fn new(v: &[f64], d_v: f64) -> Self {
        SuperiorState {
            k: 0,
            x: v.to_vec(),
            theta: 1.0,
            d_current: d_v,
        }
    }

    pub fn performance(&self) -> f64 {
        self.d_current
    }

    /// One pass of the loop body. Returns whether the candidate was accepted.
    pub fn step(
        &mut self,
        v: &[f64],
        perturbation: Perturbation,
        op: impl Fn(&[f64]) -> Vec<f64>,
        d: impl Fn(&[f64]) -> f64,
    ) -> bool {
        let offset = linalg::sub(&self.x, v);
        let r = linalg::norm(&offset);
        let candidate = if r > 0.0 {
            let sign = match perturbation {
                Perturbation::AwayFromAnchor => 1.0,
                Perturbation::TowardAnchor => -1.0,
            };
            let mut c = self.x.clone();
            linalg::axpy(sign * self.theta / r, &offset, &mut c);
            c
        } else {
            self.x.clone()
        };
        self.theta /= 2.0;
        let mut accepted = false;
        if linalg::dist(&candidate, v) <= r {
            let next = op(&candidate);
            let d_next = d(&next);
            if d_next < self.d_current {
                self.x = next;
                self.d_current = d_next;
                accepted = true;
            }
        }
        self.k += 1;
        accepted
    }
}

#[derive(Debug, Clone)]
pub struct SuperiorOutcome {
    pub x: Vec<f64>,
    pub k: usize,
    pub converged: bool,
}

/// Runs the loop from `x_0 = v` until `d(x_k) <= eps` or `k_max` passes.
pub fn superiorize(
    op: impl Fn(&[f64]) -> Vec<f64>,
    v: &[f64],
    eps: f64,
    d: impl Fn(&[f64]) -> f64,
    k_max: usize,
    perturbation: Perturbation,
) -> SuperiorOutcome {
    let mut s = SuperiorState::new(v, d(v));
    while s.performance() > eps && s.k < k_max {
        s.step(v, perturbation, &op, &d);
    }
    SuperiorOutcome {
        converged: s.performance() <= eps,
        k: s.k,
        x: s.x,
    }
}
