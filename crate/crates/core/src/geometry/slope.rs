//! Slope constraints `beta_i <= |x_{i+1} - x_i| <= alpha_i` on consecutive
//! elevations.
//!
//! Each single constraint touches only the pair `(x_i, x_{i+1})`, so all
//! pairs of one parity can be projected independently and the result is the
//! exact projection onto the intersection of that parity class.

use serde::{Deserialize, Serialize};

use super::{Breakpoints, Parity};
use crate::{Error, Result};

/// Per-segment elevation-difference bounds.
///
/// `alpha[i]` bounds `|x_{i+1} - x_i|` from above and may be `f64::INFINITY`
/// for an unconstrained segment. `beta`, when present, is a lower bound and
/// makes the set nonconvex wherever `beta[i] > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeBounds {
    #[serde(with = "unbounded_as_null")]
    alpha: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    beta: Option<Vec<f64>>,
}

impl SlopeBounds {
    pub fn new(alpha: Vec<f64>, beta: Option<Vec<f64>>) -> Result<Self> {
        let bounds = SlopeBounds { alpha, beta };
        bounds.validate()?;
        Ok(bounds)
    }

    /// Convex bounds from maximum grades `sigma` (fractions, e.g. `0.04`):
    /// `alpha_i = sigma_i * (t_{i+1} - t_i)`.
    pub fn from_grades(t: &Breakpoints, sigma: &[f64]) -> Result<Self> {
        let tau = t.spacings();
        if sigma.len() != tau.len() {
            return Err(Error::DimensionMismatch {
                expected: tau.len(),
                got: sigma.len(),
            });
        }
        Self::new(tau.iter().zip(sigma).map(|(d, s)| s * d).collect(), None)
    }

    /// Uniform maximum grade, optionally with a uniform minimum grade.
    pub fn uniform_grade(t: &Breakpoints, max_grade: f64, min_grade: Option<f64>) -> Result<Self> {
        let tau = t.spacings();
        let alpha = tau.iter().map(|d| max_grade * d).collect();
        let beta = min_grade.map(|g| tau.iter().map(|d| g * d).collect());
        Self::new(alpha, beta)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if let Some(&a) = self.alpha.iter().find(|a| a.is_nan() || **a < 0.0) {
            return Err(Error::InvalidSpec(format!("slope bound alpha = {a} must be >= 0")));
        }
        if let Some(beta) = &self.beta {
            if beta.len() != self.alpha.len() {
                return Err(Error::DimensionMismatch {
                    expected: self.alpha.len(),
                    got: beta.len(),
                });
            }
            for (i, (&a, &b)) in self.alpha.iter().zip(beta).enumerate() {
                if !(b >= 0.0 && b <= a) || b.is_infinite() {
                    return Err(Error::InvalidSpec(format!(
                        "segment {i}: need 0 <= beta ({b}) <= alpha ({a})"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> Option<&[f64]> {
        self.beta.as_deref()
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    pub fn is_convex(&self) -> bool {
        self.beta.as_ref().is_none_or(|b| b.iter().all(|&v| v == 0.0))
    }

    fn beta_at(&self, i: usize) -> f64 {
        self.beta.as_ref().map_or(0.0, |b| b[i])
    }
}

/// JSON has no infinity, so unbounded segments travel as `null`.
mod unbounded_as_null {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let opt: Vec<Option<f64>> = v.iter().map(|&a| if a.is_finite() { Some(a) } else { None }).collect();
        opt.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let opt = Vec::<Option<f64>>::deserialize(d)?;
        Ok(opt.into_iter().map(|a| a.unwrap_or(f64::INFINITY)).collect())
    }
}

/// Projection of `(xi, xj)` onto `{ |xj - xi| <= alpha }`.
///
/// When a change happens both entries move and their sum is preserved.
pub fn project_slope_pair(xi: f64, xj: f64, alpha: f64) -> (f64, f64) {
    let s = xi + xj;
    if xi - xj > alpha {
        (0.5 * (s + alpha), 0.5 * (s - alpha))
    } else if xj - xi > alpha {
        (0.5 * (s - alpha), 0.5 * (s + alpha))
    } else {
        (xi, xj)
    }
}

/// Intrepid counterpart of [`project_slope_pair`]: reflect into the stripe,
/// or jump to its midline when the pair is more than `2 alpha` apart.
pub fn intrepid_slope_pair(xi: f64, xj: f64, alpha: f64) -> (f64, f64) {
    let gap = (xj - xi).abs();
    if gap <= alpha {
        (xi, xj)
    } else if gap > 2.0 * alpha {
        let mid = 0.5 * (xi + xj);
        (mid, mid)
    } else {
        // at gap == 2 alpha the reflection lands on the midline as well
        let sgn = (xj - xi).signum();
        (xj - sgn * alpha, xi + sgn * alpha)
    }
}

/// Projection of `(xi, xj)` onto `{ beta <= |xj - xi| <= alpha }`.
///
/// At `xi == xj` with `beta > 0` the projection is two-valued; the branch with
/// `xj > xi` is returned.
pub fn project_slope_pair_nonconvex(xi: f64, xj: f64, alpha: f64, beta: f64) -> (f64, f64) {
    let s = xi + xj;
    if xj < xi - alpha {
        (0.5 * (s + alpha), 0.5 * (s - alpha))
    } else if xj <= xi - beta {
        (xi, xj)
    } else if xi - beta < xj && xj < xi {
        (0.5 * (s + beta), 0.5 * (s - beta))
    } else if xj < xi + beta {
        // covers the tie xj == xi
        (0.5 * (s - beta), 0.5 * (s + beta))
    } else if xj <= xi + alpha {
        (xi, xj)
    } else {
        (0.5 * (s - alpha), 0.5 * (s + alpha))
    }
}

/// Intrepid counterpart of [`project_slope_pair_nonconvex`].
///
/// Cases are tested in order and the first match wins, which settles the
/// boundary overlaps that appear when `3 beta == alpha`. The two cases that
/// jump to the branch midline from inside the forbidden band only occur when
/// `3 beta > alpha`.
pub fn intrepid_slope_pair_nonconvex(xi: f64, xj: f64, alpha: f64, beta: f64) -> (f64, f64) {
    let s = xi + xj;
    let half_mid = 0.5 * (alpha + beta);
    let d = xj - xi;
    if d < (beta - 3.0 * alpha) / 2.0 {
        (0.5 * (s + half_mid), 0.5 * (s - half_mid))
    } else if d < -alpha {
        (xj + alpha, xi - alpha)
    } else if d <= -beta {
        (xi, xj)
    } else if d <= f64::min(0.0, (alpha - 3.0 * beta) / 2.0) {
        (xj + beta, xi - beta)
    } else if d <= 0.0 {
        (0.5 * (s + half_mid), 0.5 * (s - half_mid))
    } else if d <= (3.0 * beta - alpha) / 2.0 {
        (0.5 * (s - half_mid), 0.5 * (s + half_mid))
    } else if d < beta {
        (xj - beta, xi + beta)
    } else if d <= alpha {
        (xi, xj)
    } else if d <= (3.0 * alpha - beta) / 2.0 {
        (xj - alpha, xi + alpha)
    } else {
        (0.5 * (s - half_mid), 0.5 * (s + half_mid))
    }
}

/// First 0-based pair start for a parity class. Odd segments (1-based
/// `1, 3, 5, ...`) start at 0; even segments start at 1.
fn first_pair(parity: Parity) -> usize {
    match parity {
        Parity::Odd => 0,
        Parity::Even => 1,
    }
}

fn check_len(x: &[f64], b: &SlopeBounds) -> Result<()> {
    if b.len() + 1 != x.len() {
        return Err(Error::DimensionMismatch {
            expected: b.len() + 1,
            got: x.len(),
        });
    }
    Ok(())
}

pub(crate) fn apply_parity_in_place(
    x: &mut [f64],
    b: &SlopeBounds,
    parity: Parity,
    op: impl Fn(f64, f64, f64, f64) -> (f64, f64),
) {
    let mut i = first_pair(parity);
    while i + 1 < x.len() {
        let (a, c) = op(x[i], x[i + 1], b.alpha[i], b.beta_at(i));
        x[i] = a;
        x[i + 1] = c;
        i += 2;
    }
}

pub(crate) fn project_parity_in_place(x: &mut [f64], b: &SlopeBounds, parity: Parity) {
    if b.beta.is_some() {
        apply_parity_in_place(x, b, parity, project_slope_pair_nonconvex);
    } else {
        apply_parity_in_place(x, b, parity, |xi, xj, a, _| project_slope_pair(xi, xj, a));
    }
}

pub(crate) fn intrepid_parity_in_place(x: &mut [f64], b: &SlopeBounds, parity: Parity) {
    if b.beta.is_some() {
        apply_parity_in_place(x, b, parity, intrepid_slope_pair_nonconvex);
    } else {
        apply_parity_in_place(x, b, parity, |xi, xj, a, _| intrepid_slope_pair(xi, xj, a));
    }
}

/// Exact projection onto the convex parity class `S_even` or `S_odd`.
pub fn project_slope_parity(x: &[f64], b: &SlopeBounds, parity: Parity) -> Result<Vec<f64>> {
    check_len(x, b)?;
    if b.beta.is_some() {
        return Err(Error::Mode(
            "lower slope bounds present; use project_slope_parity_nonconvex".into(),
        ));
    }
    let mut out = x.to_vec();
    project_parity_in_place(&mut out, b, parity);
    Ok(out)
}

/// Projection onto a parity class of the nonconvex slope set (one branch per
/// pair, chosen by distance).
pub fn project_slope_parity_nonconvex(x: &[f64], b: &SlopeBounds, parity: Parity) -> Result<Vec<f64>> {
    check_len(x, b)?;
    let mut out = x.to_vec();
    apply_parity_in_place(&mut out, b, parity, project_slope_pair_nonconvex);
    Ok(out)
}

pub fn intrepid_slope_parity(x: &[f64], b: &SlopeBounds, parity: Parity) -> Result<Vec<f64>> {
    check_len(x, b)?;
    let mut out = x.to_vec();
    intrepid_parity_in_place(&mut out, b, parity);
    Ok(out)
}
