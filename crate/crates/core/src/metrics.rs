//! Normalized infeasibility, stopping rules, and the batch statistics used to
//! compare algorithms: performance profiles, relative-proximity curves and
//! normalized distance tables.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::linalg;
use crate::runner::RunRecord;
use crate::sets::Constraint;
use crate::{Error, Result};

/// `d(x) = sqrt(sum_i d^2(x, C_i) / sum_i d^2(x_0, C_i))`.
#[derive(Debug, Clone)]
pub struct Proximity {
    denom: f64,
}

pub fn sum_sq_dist<S: Constraint>(x: &[f64], sets: &[S]) -> f64 {
    sets.iter()
        .map(|c| {
            let d = c.distance(x);
            d * d
        })
        .sum()
}

impl Proximity {
    /// Fails with [`Error::UndefinedNormalizer`] when `x0` lies in every set.
    pub fn new<S: Constraint>(x0: &[f64], sets: &[S]) -> Result<Self> {
        let denom = sum_sq_dist(x0, sets);
        if denom > 0.0 {
            Ok(Proximity { denom })
        } else {
            Err(Error::UndefinedNormalizer)
        }
    }

    pub fn eval<S: Constraint>(&self, x: &[f64], sets: &[S]) -> f64 {
        (sum_sq_dist(x, sets) / self.denom).sqrt()
    }
}

pub fn proximity<S: Constraint>(x: &[f64], x0: &[f64], sets: &[S]) -> Result<f64> {
    Ok(Proximity::new(x0, sets)?.eval(x, sets))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StopRule {
    pub eps: f64,
    pub k_max: usize,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule { eps: 5e-3, k_max: 5000 }
    }
}

impl StopRule {
    pub fn new(eps: f64, k_max: usize) -> Result<Self> {
        if !(eps > 0.0) || k_max == 0 {
            return Err(Error::Config(format!(
                "stop rule needs eps > 0 and k_max >= 1, got eps={eps}, k_max={k_max}"
            )));
        }
        Ok(StopRule { eps, k_max })
    }

    pub fn feasible(&self, d: f64) -> bool {
        d < self.eps
    }

    /// Best approximation additionally needs the monitored step to be short.
    pub fn settled(&self, d: f64, step: f64) -> bool {
        d < self.eps && step < self.eps
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileCurve {
    pub algorithm: String,
    /// `(kappa, rho)` pairs in increasing `kappa`.
    pub points: Vec<(f64, f64)>,
}

/// `0, step, 2 step, ...` up to `log2(k_max)` inclusive.
pub fn kappa_grid(k_max: usize, step: f64) -> Vec<f64> {
    let top = (k_max.max(1) as f64).log2();
    let count = (top / step).ceil() as usize;
    (0..=count).map(|i| (i as f64 * step).min(top)).collect()
}

type PairIndex<'a> = (
    BTreeSet<&'a str>,
    BTreeSet<&'a str>,
    BTreeMap<(&'a str, &'a str), &'a RunRecord>,
);

fn by_pair(records: &[RunRecord]) -> PairIndex<'_> {
    let mut algs = BTreeSet::new();
    let mut probs = BTreeSet::new();
    let mut map = BTreeMap::new();
    for r in records {
        algs.insert(r.algorithm.as_str());
        probs.insert(r.problem.as_str());
        map.insert((r.algorithm.as_str(), r.problem.as_str()), r);
    }
    (algs, probs, map)
}

/// `rho_a(kappa) = card{p : log2 r_{a,p} <= kappa} / card P` with
/// `r_{a,p} = k_{a,p} / min_a' k_{a',p}`. Runs stopped by the iteration cap
/// enter with their capped count; zero counts are raised to one.
pub fn performance_profile(records: &[RunRecord], kappas: &[f64]) -> Result<Vec<ProfileCurve>> {
    let (algs, probs, map) = by_pair(records);
    let mut ratios: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for p in &probs {
        let mut ks = Vec::with_capacity(algs.len());
        for a in &algs {
            let r = map
                .get(&(*a, *p))
                .ok_or_else(|| Error::Config(format!("missing run for algorithm {a} on problem {p}")))?;
            ks.push(r.iterations.max(1) as f64);
        }
        let best = ks.iter().copied().fold(f64::INFINITY, f64::min);
        for (a, k) in algs.iter().zip(ks) {
            ratios.entry(a).or_default().push((k / best).log2());
        }
    }
    let total = probs.len() as f64;
    Ok(ratios
        .into_iter()
        .map(|(a, logs)| ProfileCurve {
            algorithm: a.to_string(),
            points: kappas
                .iter()
                .map(|&kappa| {
                    let c = logs.iter().filter(|&&l| l <= kappa).count();
                    (kappa, c as f64 / total)
                })
                .collect(),
        })
        .collect())
}

/// `beta_a(k) = 10 log10(mean_p d^2(x_k))`, traces shorter than `k + 1`
/// padded with their last value.
pub fn relative_proximity(records: &[RunRecord], k: usize) -> BTreeMap<String, f64> {
    let mut acc: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
    for r in records {
        let d = r.d_trace.get(k).or_else(|| r.d_trace.last()).copied().unwrap_or(0.0);
        let e = acc.entry(&r.algorithm).or_insert((0.0, 0));
        e.0 += d * d;
        e.1 += 1;
    }
    acc.into_iter()
        .map(|(a, (s, c))| (a.to_string(), 10.0 * (s / c as f64).log10()))
        .collect()
}

/// `beta_a(k)` for `k = 0..=k_max`.
pub fn relative_proximity_curves(records: &[RunRecord], k_max: usize) -> BTreeMap<String, Vec<f64>> {
    let mut out: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for k in 0..=k_max {
        for (a, b) in relative_proximity(records, k) {
            out.entry(a).or_default().push(b);
        }
    }
    out
}

/// Min, quartiles, max, mean and sample standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
    pub std_dev: f64,
}

/// Linear interpolation between order statistics at position `q (n - 1)`.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = q * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

impl Summary {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut s = values.to_vec();
        s.sort_by(f64::total_cmp);
        let n = s.len() as f64;
        let mean = s.iter().sum::<f64>() / n;
        let std_dev = if s.len() > 1 {
            (s.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Some(Summary {
            min: s[0],
            q1: quantile(&s, 0.25),
            median: quantile(&s, 0.5),
            q3: quantile(&s, 0.75),
            max: s[s.len() - 1],
            mean,
            std_dev,
        })
    }
}

/// Per-algorithm normalized distances `||v - x_final|| / ||v||`. A run that
/// did not converge inherits the largest final distance any algorithm
/// reached on that problem. Problems with `v = 0` or no anchor are skipped.
pub fn normalized_distances(records: &[RunRecord], anchors: &BTreeMap<String, Vec<f64>>) -> BTreeMap<String, Vec<f64>> {
    let mut worst: BTreeMap<&str, f64> = BTreeMap::new();
    for r in records {
        if let Some(v) = anchors.get(&r.problem) {
            let d = linalg::dist(v, &r.x_final);
            let w = worst.entry(&r.problem).or_insert(0.0);
            *w = w.max(d);
        }
    }
    let mut out: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in records {
        let Some(v) = anchors.get(&r.problem) else {
            log::warn!("no anchor for problem {}, skipped", r.problem);
            continue;
        };
        let nv = linalg::norm(v);
        if nv == 0.0 {
            log::warn!("zero anchor for problem {}, skipped", r.problem);
            continue;
        }
        let d = if r.converged {
            linalg::dist(v, &r.x_final)
        } else {
            worst[r.problem.as_str()]
        };
        out.entry(r.algorithm.clone()).or_default().push(d / nv);
    }
    out
}

pub fn distance_stats(records: &[RunRecord], anchors: &BTreeMap<String, Vec<f64>>) -> BTreeMap<String, Summary> {
    normalized_distances(records, anchors)
        .into_iter()
        .filter_map(|(a, d)| Summary::of(&d).map(|s| (a, s)))
        .collect()
}

pub fn write_profile_csv<W: Write>(w: W, curves: &[ProfileCurve]) -> Result<()> {
    let mut out = std::io::BufWriter::new(w);
    let io = |e: std::io::Error| Error::Config(e.to_string());
    writeln!(out, "algorithm,kappa,rho").map_err(io)?;
    for c in curves {
        for (k, r) in &c.points {
            writeln!(out, "{},{k},{r}", c.algorithm).map_err(io)?;
        }
    }
    out.flush().map_err(io)
}

pub fn write_proximity_csv<W: Write>(w: W, curves: &BTreeMap<String, Vec<f64>>) -> Result<()> {
    let mut out = std::io::BufWriter::new(w);
    let io = |e: std::io::Error| Error::Config(e.to_string());
    writeln!(out, "algorithm,k,beta").map_err(io)?;
    for (a, betas) in curves {
        for (k, b) in betas.iter().enumerate() {
            writeln!(out, "{a},{k},{b}").map_err(io)?;
        }
    }
    out.flush().map_err(io)
}

pub fn write_distance_csv<W: Write>(w: W, stats: &BTreeMap<String, Summary>) -> Result<()> {
    let mut out = std::io::BufWriter::new(w);
    let io = |e: std::io::Error| Error::Config(e.to_string());
    writeln!(out, "Algorithm,Min,1st Qrt.,Median,3rd Qrt.,Max,Mean,Std.dev").map_err(io)?;
    for (a, s) in stats {
        writeln!(
            out,
            "{a},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4}",
            s.min, s.q1, s.median, s.q3, s.max, s.mean, s.std_dev
        )
        .map_err(io)?;
    }
    out.flush().map_err(io)
}
