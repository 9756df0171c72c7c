//! Seeded generation of random road-profile test problems.
//!
//! A problem of target length `L` (m) at design speed `V` (km/h) with
//! elevations in `[0, xi_max]` has `n` stations drawn uniformly from
//! `ceil(L / (3 s)) ..= floor(1 + L / (1.5 s))`, `s = min(0.625 V, 30)`.
//! Station gaps are drawn uniformly on `[0.625 V, 1.25 V]` and rescaled to
//! sum to `L`; elevations are drawn uniformly and rejected until consecutive
//! points are at least `0.625 V` apart. A draw that cannot meet the spacing
//! restarts from a fresh `n`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::exec::Exec;
use crate::geometry::{Breakpoints, ConstraintSet, CurvatureBounds, InterpolationSpec, Mode, SlopeBounds};
use crate::problem::{FeasibilityProblem, ProblemMeta};
use crate::{Error, Result};

const ELEVATION_TRIES: usize = 200;
const RESTARTS: usize = 10_000;

/// Vertical-curve rate `K` (m of curve per percent of grade change) keyed by
/// design speed in km/h. Speeds between entries use the next faster one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct KTable(BTreeMap<String, f64>);

impl Default for KTable {
    fn default() -> Self {
        KTable(
            [("30", 6.0), ("50", 13.0), ("80", 30.0), ("100", 52.0)]
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
        )
    }
}

impl KTable {
    pub fn new(entries: impl IntoIterator<Item = (u32, f64)>) -> Result<Self> {
        let t = KTable(entries.into_iter().map(|(k, v)| (k.to_string(), v)).collect());
        t.entries()?;
        Ok(t)
    }

    fn entries(&self) -> Result<Vec<(f64, f64)>> {
        let mut e = self
            .0
            .iter()
            .map(|(k, &v)| {
                let s: f64 = k
                    .parse()
                    .map_err(|_| Error::Config(format!("K table key {k:?} is not a speed")))?;
                if !(v > 0.0) {
                    return Err(Error::Config(format!("K value for {k} must be positive")));
                }
                Ok((s, v))
            })
            .collect::<Result<Vec<_>>>()?;
        if e.is_empty() {
            return Err(Error::Config("empty K table".into()));
        }
        e.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(e)
    }

    pub fn k_for(&self, speed: f64) -> Result<f64> {
        let e = self.entries()?;
        Ok(e.iter().find(|(s, _)| *s >= speed).unwrap_or(&e[e.len() - 1]).1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    /// target length, m
    pub length: f64,
    /// design speed, km/h
    pub speed: f64,
    /// maximum elevation, m
    pub xi_max: f64,
    pub seed: u64,
    pub sigma_max: f64,
    /// minimum drainage grade; `Some` makes the slope sets nonconvex
    pub drainage_grade: Option<f64>,
    pub k_table: KTable,
}

impl ProblemSpec {
    pub fn new(length: f64, speed: f64, xi_max: f64, seed: u64) -> Self {
        ProblemSpec {
            length,
            speed,
            xi_max,
            seed,
            sigma_max: 0.04,
            drainage_grade: None,
            k_table: KTable::default(),
        }
    }

    pub fn min_spacing(&self) -> f64 {
        0.625 * self.speed
    }

    /// Inclusive range of admissible station counts.
    pub fn n_range(&self) -> Result<(usize, usize)> {
        let s = self.min_spacing().min(30.0);
        let lo = (self.length / (3.0 * s)).ceil().max(2.0) as usize;
        let hi = (1.0 + self.length / (1.5 * s)).floor() as usize;
        if lo > hi {
            return Err(Error::InvalidSpec(format!(
                "no station count for L={}, V={}",
                self.length, self.speed
            )));
        }
        Ok((lo, hi))
    }

    fn validate(&self) -> Result<()> {
        let ok = self.length > 0.0
            && self.speed > 0.0
            && self.xi_max >= 0.0
            && self.sigma_max > 0.0
            && self.drainage_grade.is_none_or(|b| (0.0..=self.sigma_max).contains(&b));
        if !ok {
            return Err(Error::InvalidSpec(format!("invalid problem spec {self:?}")));
        }
        Ok(())
    }
}

fn draw_stations(rng: &mut ChaCha8Rng, n: usize, length: f64, s: f64) -> Vec<f64> {
    let gaps: Vec<f64> = (1..n).map(|_| rng.gen_range(s..=2.0 * s)).collect();
    let scale = length / gaps.iter().sum::<f64>();
    let mut t = Vec::with_capacity(n);
    let mut acc = 0.0;
    t.push(0.0);
    for g in &gaps[..gaps.len() - 1] {
        acc += g * scale;
        t.push(acc);
    }
    t.push(length);
    t
}

fn draw_elevations(rng: &mut ChaCha8Rng, t: &[f64], xi_max: f64, s: f64) -> Option<Vec<f64>> {
    let mut v = Vec::with_capacity(t.len());
    v.push(rng.gen_range(0.0..=xi_max));
    for w in t.windows(2) {
        let tau = w[1] - w[0];
        let prev = v[v.len() - 1];
        let next = (0..ELEVATION_TRIES)
            .map(|_| rng.gen_range(0.0..=xi_max))
            .find(|&y| tau.hypot(y - prev) >= s)?;
        v.push(next);
    }
    Some(v)
}

/// `gamma_i`: the grade change a vertical curve of rate `K` allows over the
/// mean of the two adjacent gaps.
pub fn curvature_bounds(t: &Breakpoints, k: f64) -> Result<CurvatureBounds> {
    let tau = t.spacings();
    let gamma = tau.windows(2).map(|w| 0.5 * (w[0] + w[1]) / (100.0 * k)).collect();
    CurvatureBounds::symmetric(gamma)
}

/// The six road sets for stations `t` and start `v` under `spec`, in
/// intrepid mode.
pub fn road_constraints(spec: &ProblemSpec, t: &Breakpoints, v: &[f64]) -> Result<Vec<ConstraintSet>> {
    let n = t.len();
    let interp = InterpolationSpec::endpoints(v[0], v[n - 1], n)?;
    let slope = SlopeBounds::uniform_grade(t, spec.sigma_max, spec.drainage_grade)?;
    let curv = curvature_bounds(t, spec.k_table.k_for(spec.speed)?)?;
    Ok(ConstraintSet::road_sets(t, interp, slope, curv)?
        .into_iter()
        .map(|c| c.with_mode(Mode::Intrepid))
        .collect())
}

/// Whether the straight line between the end points satisfies every
/// constraint. For convex sets this is also necessary.
fn straight_line_feasible(spec: &ProblemSpec, t: &Breakpoints, v: &[f64]) -> bool {
    let grade = (v[v.len() - 1] - v[0]).abs() / t.span();
    let tol = 1e-12;
    grade <= spec.sigma_max + tol && spec.drainage_grade.is_none_or(|b| grade >= b - tol)
}

pub fn generate(spec: &ProblemSpec) -> Result<FeasibilityProblem> {
    generate_with_id(spec, format!("seed-{:016x}", spec.seed))
}

fn generate_with_id(spec: &ProblemSpec, id: String) -> Result<FeasibilityProblem> {
    spec.validate()?;
    let (lo, hi) = spec.n_range()?;
    let s = spec.min_spacing();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for _ in 0..RESTARTS {
        let n = rng.gen_range(lo..=hi);
        let t = draw_stations(&mut rng, n, spec.length, s);
        let Some(v) = draw_elevations(&mut rng, &t, spec.xi_max, s) else {
            continue;
        };
        let t = Breakpoints::new(t)?;
        let sets = road_constraints(spec, &t, &v)?;
        let certified = straight_line_feasible(spec, &t, &v);
        let mut p = FeasibilityProblem::new(id, t, sets, v)?;
        p.meta = ProblemMeta {
            length: Some(spec.length),
            speed: Some(spec.speed),
            xi_max: Some(spec.xi_max),
            seed: Some(spec.seed),
            certified_feasible: Some(certified),
        };
        return Ok(p);
    }
    Err(Error::InvalidSpec(format!(
        "could not meet the spacing bound {s} m within [0, {}] after {RESTARTS} draws",
        spec.xi_max
    )))
}

/// Grids and shared parameters for a batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BatchParams {
    pub lengths: Vec<f64>,
    pub speeds: Vec<f64>,
    pub xi_max: Vec<f64>,
    pub sigma_max: f64,
    pub drainage_grade: Option<f64>,
    pub k_table: KTable,
}

impl Default for BatchParams {
    fn default() -> Self {
        BatchParams {
            lengths: vec![500.0, 1000.0, 5000.0, 10000.0, 20000.0],
            speeds: vec![30.0, 50.0, 80.0, 100.0],
            xi_max: vec![30.0, 60.0, 100.0, 120.0, 150.0],
            sigma_max: 0.04,
            drainage_grade: None,
            k_table: KTable::default(),
        }
    }
}

impl BatchParams {
    /// The default grids with slope sets bounded below by a 0.5% grade.
    pub fn nonconvex() -> Self {
        BatchParams {
            drainage_grade: Some(0.005),
            ..Self::default()
        }
    }

    /// Problem `i` of `count`: consecutive problems share a length group
    /// (`lengths[i * |lengths| / count]`), the group also selects the
    /// elevation cap, and speeds cycle with `i`.
    pub fn spec_for(&self, i: usize, count: usize, master_seed: u64) -> ProblemSpec {
        let g = i * self.lengths.len() / count;
        ProblemSpec {
            length: self.lengths[g],
            speed: self.speeds[i % self.speeds.len()],
            xi_max: self.xi_max[g % self.xi_max.len()],
            seed: child_seed(master_seed, i),
            sigma_max: self.sigma_max,
            drainage_grade: self.drainage_grade,
            k_table: self.k_table.clone(),
        }
    }
}

/// SplitMix64 finalizer applied to `master + (i + 1) * golden`.
pub fn child_seed(master: u64, i: usize) -> u64 {
    let mut z = master.wrapping_add((i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn make_batch(count: usize, params: &BatchParams, master_seed: u64, exec: Exec) -> Result<Vec<FeasibilityProblem>> {
    if count == 0 {
        return Err(Error::Config("batch count must be at least 1".into()));
    }
    if params.lengths.is_empty() || params.speeds.is_empty() || params.xi_max.is_empty() {
        return Err(Error::Config("batch grids must be nonempty".into()));
    }
    let idx: Vec<usize> = (0..count).collect();
    let width = count.to_string().len().max(3);
    exec.map(&idx, |&i| {
        generate_with_id(&params.spec_for(i, count, master_seed), format!("p{i:0width$}"))
    })
    .into_iter()
    .collect()
}
