//! Algorithm registry and drivers: run any registered method on a problem
//! and record its monitored trace, then fan out over (algorithm, problem)
//! pairs.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::bestapprox::{self as ba, BaDrState, CycDykState, HdrState, ParDykState};
use crate::exec::Exec;
use crate::feasibility::{step_dr, DrState, Operator};
use crate::geometry::ConstraintSet;
use crate::linalg;
use crate::metrics::{Proximity, StopRule};
use crate::problem::FeasibilityProblem;
use crate::superior::{Perturbation, SuperiorState};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum AlgorithmId {
    CycP,
    CycPPlus,
    ParP,
    SaP,
    ExParP,
    ExAltP,
    Dr,
    SCycP,
    SCycPPlus,
    SParP,
    SSaP,
    SExParP,
    SExAltP,
    Hw,
    CycDyk,
    ParDyk,
    HCycP,
    HParP,
    HDr,
    BaDr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Feasibility,
    Superiorized,
    BestApprox,
}

impl AlgorithmId {
    pub const ALL: [AlgorithmId; 20] = [
        AlgorithmId::CycP,
        AlgorithmId::CycPPlus,
        AlgorithmId::ParP,
        AlgorithmId::SaP,
        AlgorithmId::ExParP,
        AlgorithmId::ExAltP,
        AlgorithmId::Dr,
        AlgorithmId::SCycP,
        AlgorithmId::SCycPPlus,
        AlgorithmId::SParP,
        AlgorithmId::SSaP,
        AlgorithmId::SExParP,
        AlgorithmId::SExAltP,
        AlgorithmId::Hw,
        AlgorithmId::CycDyk,
        AlgorithmId::ParDyk,
        AlgorithmId::HCycP,
        AlgorithmId::HParP,
        AlgorithmId::HDr,
        AlgorithmId::BaDr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AlgorithmId::CycP => "CycP",
            AlgorithmId::CycPPlus => "CycP+",
            AlgorithmId::ParP => "ParP",
            AlgorithmId::SaP => "SaP",
            AlgorithmId::ExParP => "ExParP",
            AlgorithmId::ExAltP => "ExAltP",
            AlgorithmId::Dr => "D-R",
            AlgorithmId::SCycP => "sCycP",
            AlgorithmId::SCycPPlus => "sCycP+",
            AlgorithmId::SParP => "sParP",
            AlgorithmId::SSaP => "sSaP",
            AlgorithmId::SExParP => "sExParP",
            AlgorithmId::SExAltP => "sExAltP",
            AlgorithmId::Hw => "H-W",
            AlgorithmId::CycDyk => "CycDyk",
            AlgorithmId::ParDyk => "ParDyk",
            AlgorithmId::HCycP => "hCycP",
            AlgorithmId::HParP => "hParP",
            AlgorithmId::HDr => "hD-R",
            AlgorithmId::BaDr => "baD-R",
        }
    }

    pub fn family(self) -> Family {
        use AlgorithmId::*;
        match self {
            CycP | CycPPlus | ParP | SaP | ExParP | ExAltP | Dr => Family::Feasibility,
            SCycP | SCycPPlus | SParP | SSaP | SExParP | SExAltP => Family::Superiorized,
            Hw | CycDyk | ParDyk | HCycP | HParP | HDr | BaDr => Family::BestApprox,
        }
    }

    pub fn of_family(family: Family) -> Vec<AlgorithmId> {
        Self::ALL.into_iter().filter(|a| a.family() == family).collect()
    }

    /// The single-operator step behind a feasibility or superiorized method.
    pub fn operator(self) -> Option<Operator> {
        use AlgorithmId::*;
        Some(match self {
            CycP | SCycP => Operator::CycP,
            CycPPlus | SCycPPlus => Operator::CycPPlus,
            ParP | SParP => Operator::ParP,
            SaP | SSaP => Operator::SaP,
            ExParP | SExParP => Operator::ExParP,
            ExAltP | SExAltP => Operator::ExAltP,
            _ => return None,
        })
    }
}

impl fmt::Display for AlgorithmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AlgorithmId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim();
        Self::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(key))
            .ok_or_else(|| Error::UnknownAlgorithm(key.to_string()))
    }
}

impl From<AlgorithmId> for String {
    fn from(a: AlgorithmId) -> String {
        a.name().to_string()
    }
}

impl TryFrom<String> for AlgorithmId {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum RunStatus {
    /// The start profile already lies in every set.
    FeasibleStart,
    Converged,
    IterationCap,
    Failed {
        reason: String,
    },
}

/// Outcome of one algorithm on one problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub algorithm: String,
    pub problem: String,
    pub iterations: usize,
    pub converged: bool,
    #[serde(flatten)]
    pub status: RunStatus,
    /// `d` of the monitored iterate, index `k` after `k` iterations.
    pub d_trace: Vec<f64>,
    pub x_final: Vec<f64>,
    pub wall_seconds: f64,
}

impl RunRecord {
    pub fn key(&self) -> (&str, &str) {
        (&self.algorithm, &self.problem)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub rule: StopRule,
    pub perturbation: Perturbation,
    /// Parallelism inside one run (per-set projections).
    #[serde(skip)]
    pub exec: Exec,
}

enum Driver {
    Op(Operator, Vec<f64>),
    Dr(DrState),
    Super(Operator, SuperiorState),
    Hw(usize, Vec<f64>),
    CycDyk(CycDykState),
    ParDyk(ParDykState),
    HCycP(usize, Vec<f64>),
    HParP(Vec<f64>),
    HDr(HdrState),
    BaDr(BaDrState),
}

impl Driver {
    fn monitor(&self) -> &[f64] {
        match self {
            Driver::Op(_, x) | Driver::Hw(_, x) | Driver::HCycP(_, x) | Driver::HParP(x) => x,
            Driver::Dr(s) => s.monitor(),
            Driver::Super(_, s) => &s.x,
            Driver::CycDyk(s) => &s.x,
            Driver::ParDyk(s) => s.monitor(),
            Driver::HDr(s) => s.monitor(),
            Driver::BaDr(s) => s.monitor(),
        }
    }
}

struct Ctx<'a> {
    sets: &'a [ConstraintSet],
    v: &'a [f64],
    prox: Proximity,
    opts: RunOptions,
}

impl Ctx<'_> {
    fn d(&self, x: &[f64]) -> f64 {
        self.prox.eval(x, self.sets)
    }

    fn advance(&self, drv: &mut Driver) -> Result<()> {
        let exec = self.opts.exec;
        let sets = self.sets;
        match drv {
            Driver::Op(op, x) => *x = op.apply(x, sets, exec)?,
            Driver::Dr(s) => step_dr(s, sets, exec),
            Driver::Super(op, s) => {
                // a failing operator leaves the point unchanged, which the
                // acceptance test then rejects
                let t = |y: &[f64]| op.apply(y, sets, exec).unwrap_or_else(|_| y.to_vec());
                s.step(self.v, self.opts.perturbation, t, |y| self.d(y));
            }
            Driver::Hw(k, x) => {
                *x = ba::step_hw(x, *k, sets, self.v);
                *k += 1;
            }
            Driver::CycDyk(s) => ba::step_cycdyk(s, sets),
            Driver::ParDyk(s) => ba::step_pardyk(s, sets, exec),
            Driver::HCycP(k, x) => {
                *x = ba::step_hcycp(x, *k, sets, self.v)?;
                *k += 1;
            }
            Driver::HParP(x) => *x = ba::step_hparp(x, sets, self.v, exec)?,
            Driver::HDr(s) => ba::step_hdr(s, sets, exec)?,
            Driver::BaDr(s) => ba::step_badr(s, sets, self.v, exec),
        }
        Ok(())
    }
}

/// Runs `alg` on `problem` from its start profile under `opts.rule`.
pub fn run(alg: AlgorithmId, problem: &FeasibilityProblem, opts: &RunOptions) -> RunRecord {
    let clock = Instant::now();
    let mut rec = RunRecord {
        algorithm: alg.name().to_string(),
        problem: problem.id.clone(),
        iterations: 0,
        converged: false,
        status: RunStatus::IterationCap,
        d_trace: Vec::new(),
        x_final: problem.v.clone(),
        wall_seconds: 0.0,
    };
    if let Err(e) = drive(alg, problem, opts, &mut rec) {
        rec.status = RunStatus::Failed { reason: e.to_string() };
        rec.converged = false;
    }
    rec.wall_seconds = clock.elapsed().as_secs_f64();
    rec
}

fn drive(alg: AlgorithmId, problem: &FeasibilityProblem, opts: &RunOptions, rec: &mut RunRecord) -> Result<()> {
    let reordered;
    let sets: &[ConstraintSet] = if alg.operator() == Some(Operator::ExAltP) {
        reordered = problem.affine_first()?;
        &reordered
    } else {
        &problem.sets
    };
    let v = problem.v.as_slice();
    let m = sets.len();
    let mut drv = match alg {
        AlgorithmId::Dr => Driver::Dr(DrState::from_point(problem.dr_start())),
        AlgorithmId::Hw => Driver::Hw(0, v.to_vec()),
        AlgorithmId::CycDyk => Driver::CycDyk(CycDykState::new(v, m)),
        AlgorithmId::ParDyk => Driver::ParDyk(ParDykState::new(v, m)),
        AlgorithmId::HCycP => Driver::HCycP(0, v.to_vec()),
        AlgorithmId::HParP => Driver::HParP(v.to_vec()),
        AlgorithmId::HDr => Driver::HDr(HdrState::new(v, m)),
        AlgorithmId::BaDr => Driver::BaDr(BaDrState::new(v, m)),
        other => {
            let op = other.operator().expect("single-operator method");
            if other.family() == Family::Superiorized {
                Driver::Super(op, SuperiorState::new(v, 1.0))
            } else {
                Driver::Op(op, v.to_vec())
            }
        }
    };
    let x0 = drv.monitor().to_vec();
    let prox = match Proximity::new(&x0, sets) {
        Ok(p) => p,
        Err(Error::UndefinedNormalizer) => {
            rec.status = RunStatus::FeasibleStart;
            rec.converged = true;
            rec.d_trace = vec![0.0];
            rec.x_final = x0;
            return Ok(());
        }
        Err(e) => return Err(e),
    };
    let ctx = Ctx {
        sets,
        v,
        prox,
        opts: *opts,
    };
    let rule = opts.rule;
    let best_approx = alg.family() == Family::BestApprox;
    rec.d_trace.push(1.0);
    let mut prev = x0;
    let result = (|| {
        for k in 1..=rule.k_max {
            ctx.advance(&mut drv)?;
            let x = drv.monitor();
            let d = ctx.d(x);
            rec.d_trace.push(d);
            rec.iterations = k;
            let done = if best_approx {
                rule.settled(d, linalg::dist(x, &prev))
            } else {
                rule.feasible(d)
            };
            if done {
                rec.converged = true;
                rec.status = RunStatus::Converged;
                return Ok(());
            }
            if best_approx {
                prev.copy_from_slice(x);
            }
        }
        Ok(())
    })();
    rec.x_final = drv.monitor().to_vec();
    result
}

/// Every pair of `algorithms` x `problems`, sorted by (algorithm, problem).
/// `exec` fans out over pairs; each run is sequential inside.
pub fn run_batch(
    algorithms: &[AlgorithmId],
    problems: &[FeasibilityProblem],
    opts: &RunOptions,
    exec: Exec,
) -> Vec<RunRecord> {
    let pairs: Vec<(AlgorithmId, usize)> = algorithms
        .iter()
        .flat_map(|&a| (0..problems.len()).map(move |p| (a, p)))
        .collect();
    let inner = RunOptions {
        exec: Exec::Sequential,
        ..*opts
    };
    let mut out = exec.map(&pairs, |&(a, p)| run(a, &problems[p], &inner));
    sort_records(&mut out);
    out
}

pub fn sort_records(records: &mut [RunRecord]) {
    records.sort_by(|a, b| a.algorithm.cmp(&b.algorithm).then_with(|| a.problem.cmp(&b.problem)));
}
