//! Brute-force nearest-point search shared by the integration tests.
#![allow(dead_code)]

/// A constraint `lo <= a . p <= hi`.
pub type Row = (Vec<f64>, f64, f64);

/// Coefficients of a linear functional, read off from unit vectors.
pub fn linear_row(n: usize, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    let zero = vec![0.0; n];
    let f0 = f(&zero);
    (0..n)
        .map(|k| {
            let mut e = zero.clone();
            e[k] = 1.0;
            f(&e) - f0
        })
        .collect()
}

/// Solves `m y = r` in place by Gaussian elimination; `None` when singular.
fn solve(mut m: Vec<Vec<f64>>, mut r: Vec<f64>) -> Option<Vec<f64>> {
    let k = r.len();
    for c in 0..k {
        let piv = (c..k).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))?;
        if m[piv][c].abs() < 1e-12 {
            return None;
        }
        m.swap(c, piv);
        r.swap(c, piv);
        let (top, rest) = m.split_at_mut(c + 1);
        let pivot = &top[c];
        for (i, row) in rest.iter_mut().enumerate() {
            let f = row[c] / pivot[c];
            for (a, b) in row[c..].iter_mut().zip(&pivot[c..]) {
                *a -= f * b;
            }
            r[c + 1 + i] -= f * r[c];
        }
    }
    let mut y = vec![0.0; k];
    for c in (0..k).rev() {
        let s: f64 = (c + 1..k).map(|j| m[c][j] * y[j]).sum();
        y[c] = (r[c] - s) / m[c][c];
    }
    Some(y)
}

/// Nearest point of the polyhedron `rows` to `x`, by trying every pattern of
/// active bounds: project onto the affine piece, keep the feasible candidates
/// and take the closest.
pub fn polyhedral_nearest(x: &[f64], rows: &[Row]) -> Option<Vec<f64>> {
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, v)| u * v).sum::<f64>();
    let feasible = |p: &[f64]| {
        rows.iter().all(|(a, lo, hi)| {
            let v = dot(a, p);
            let tol = 1e-9 * (1.0 + lo.abs().max(hi.abs()));
            v >= lo - tol && v <= hi + tol
        })
    };
    let mut best: Option<(f64, Vec<f64>)> = None;
    let patterns = 3usize.pow(rows.len() as u32);
    for code in 0..patterns {
        let mut active: Vec<(&[f64], f64)> = Vec::new();
        let mut c = code;
        for (a, lo, hi) in rows {
            match c % 3 {
                1 => active.push((a, *lo)),
                2 if hi != lo => active.push((a, *hi)),
                2 => {}
                _ if hi == lo => active.push((a, *lo)),
                _ => {}
            }
            c /= 3;
        }
        let cand = if active.is_empty() {
            x.to_vec()
        } else {
            let gram = active
                .iter()
                .map(|(a, _)| active.iter().map(|(b, _)| dot(a, b)).collect())
                .collect();
            let resid = active.iter().map(|(a, b)| dot(a, x) - b).collect();
            let Some(y) = solve(gram, resid) else { continue };
            let mut p = x.to_vec();
            for ((a, _), yk) in active.iter().zip(&y) {
                for (pi, ai) in p.iter_mut().zip(a.iter()) {
                    *pi -= yk * ai;
                }
            }
            p
        };
        if feasible(&cand) {
            let d = dist(x, &cand);
            if best.as_ref().is_none_or(|(b, _)| d < *b) {
                best = Some((d, cand));
            }
        }
    }
    best.map(|(_, p)| p)
}

pub fn all_coords(n: usize) -> Vec<usize> {
    (0..n).collect()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// The expected output of a reflect-or-jump operator for a convex stripe of
/// half-width `half_width` (in the normal direction), given the nearest
/// point `q` of the stripe to `x`.
pub fn reflect_or_midline(x: &[f64], q: &[f64], half_width: f64) -> Vec<f64> {
    let r = dist(x, q);
    if r <= half_width {
        x.iter().zip(q).map(|(a, b)| 2.0 * b - a).collect()
    } else {
        x.iter().zip(q).map(|(a, b)| b + (b - a) * half_width / r).collect()
    }
}

/// Slope change across the middle station of a triple.
pub fn slope_change(t: &[f64], x: &[f64], i: usize) -> f64 {
    (x[i + 2] - x[i + 1]) / (t[i + 2] - t[i + 1]) - (x[i + 1] - x[i]) / (t[i + 1] - t[i])
}

/// Euclidean norm of the gradient of [`slope_change`].
pub fn slope_change_grad_norm(t: &[f64], i: usize) -> f64 {
    let a = 1.0 / (t[i + 1] - t[i]);
    let b = 1.0 / (t[i + 2] - t[i + 1]);
    (a * a + (a + b) * (a + b) + b * b).sqrt()
}
