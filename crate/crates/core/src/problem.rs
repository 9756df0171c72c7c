//! A road-profile feasibility problem: stations, constraint sets, and the
//! start profile, with its JSON file format.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::geometry::{Breakpoints, ConstraintSet, Mode, SetSpec};
use crate::product::ProductPoint;
use crate::sets::Constraint;
use crate::{Error, Result};

/// Provenance of a generated problem.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ProblemMeta {
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    #[serde(rename = "V", default, skip_serializing_if = "Option::is_none")]
    pub speed: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// `true` when the intersection is known to be nonempty.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certified_feasible: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct FeasibilityProblem {
    pub id: String,
    pub t: Breakpoints,
    pub sets: Vec<ConstraintSet>,
    pub v: Vec<f64>,
    pub meta: ProblemMeta,
    /// Product-space start for Douglas-Rachford; defaults to `(v, ..., v)`.
    pub dr_start: Option<ProductPoint>,
}

#[derive(Serialize, Deserialize)]
struct ConstraintsFile {
    sets: Vec<SetSpec>,
    #[serde(default)]
    mode: Mode,
}

#[derive(Serialize, Deserialize)]
struct ProblemFile {
    #[serde(default)]
    id: String,
    t: Breakpoints,
    v: Vec<f64>,
    constraints: ConstraintsFile,
    #[serde(default)]
    meta: ProblemMeta,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dr_start: Option<Vec<Vec<f64>>>,
}

impl FeasibilityProblem {
    pub fn new(id: impl Into<String>, t: Breakpoints, sets: Vec<ConstraintSet>, v: Vec<f64>) -> Result<Self> {
        let p = FeasibilityProblem {
            id: id.into(),
            t,
            sets,
            v,
            meta: ProblemMeta::default(),
            dr_start: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.t.len();
        if self.sets.len() < 2 {
            return Err(Error::InvalidSpec(format!(
                "need at least 2 constraint sets, got {}",
                self.sets.len()
            )));
        }
        if self.v.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: self.v.len(),
            });
        }
        if let Some(c) = self.sets.iter().find(|c| c.dim() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: c.dim(),
            });
        }
        if let Some(p) = &self.dr_start {
            if p.part_len() != n || p.num_parts() != self.sets.len() {
                return Err(Error::InvalidSpec(format!(
                    "dr_start has {} parts of length {}, expected {} of length {n}",
                    p.num_parts(),
                    p.part_len(),
                    self.sets.len()
                )));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.t.len()
    }

    pub fn m(&self) -> usize {
        self.sets.len()
    }

    pub fn is_convex(&self) -> bool {
        self.sets.iter().all(ConstraintSet::is_convex)
    }

    /// Sets the relaxed-step operator of every set.
    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.sets = self.sets.into_iter().map(|c| c.with_mode(mode)).collect();
        self
    }

    pub fn dr_start(&self) -> ProductPoint {
        self.dr_start
            .clone()
            .unwrap_or_else(|| ProductPoint::diagonal(&self.v, self.m()))
    }

    /// The sets with an affine one moved to the front, as extrapolated
    /// alternating projections require. Order is otherwise preserved.
    pub fn affine_first(&self) -> Result<Vec<ConstraintSet>> {
        let i = self
            .sets
            .iter()
            .position(Constraint::is_affine)
            .ok_or_else(|| Error::Config("no affine constraint set".into()))?;
        let mut out = self.sets.clone();
        let a = out.remove(i);
        out.insert(0, a);
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        let mode = self.sets.first().map_or(Mode::Exact, ConstraintSet::mode);
        let file = ProblemFile {
            id: self.id.clone(),
            t: self.t.clone(),
            v: self.v.clone(),
            constraints: ConstraintsFile {
                sets: self.sets.iter().map(ConstraintSet::to_spec).collect(),
                mode,
            },
            meta: self.meta.clone(),
            dr_start: self.dr_start.as_ref().map(ProductPoint::to_parts),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: ProblemFile = serde_json::from_str(s)?;
        let sets = file
            .constraints
            .sets
            .iter()
            .map(|spec| ConstraintSet::from_spec(spec, &file.t).map(|c| c.with_mode(file.constraints.mode)))
            .collect::<Result<Vec<_>>>()?;
        let dr_start = file
            .dr_start
            .map(|parts| ProductPoint::from_parts(&parts))
            .transpose()?;
        let p = FeasibilityProblem {
            id: file.id,
            t: file.t,
            sets,
            v: file.v,
            meta: file.meta,
            dr_start,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut p = Self::from_json(&s)?;
        if p.id.is_empty() {
            p.id = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
        }
        Ok(p)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n").map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{CurvatureBounds, InterpolationSpec, SetTag, SlopeBounds};

    fn sample() -> FeasibilityProblem {
        let t = Breakpoints::new(vec![0.0, 10.0, 25.0, 30.0, 50.0]).unwrap();
        let interp = InterpolationSpec::endpoints(1.0, 2.0, 5).unwrap();
        let slope = SlopeBounds::uniform_grade(&t, 0.04, None).unwrap();
        let curv = CurvatureBounds::symmetric(vec![0.01; 3]).unwrap();
        let sets = ConstraintSet::road_sets(&t, interp, slope, curv).unwrap();
        FeasibilityProblem::new("p0", t, sets, vec![1.0, 3.0, 0.0, 4.0, 2.0])
            .unwrap()
            .with_mode(Mode::Intrepid)
    }

    #[test]
    fn json_roundtrip() {
        let mut p = sample();
        p.meta.seed = Some(7);
        p.meta.length = Some(50.0);
        let back = FeasibilityProblem::from_json(&p.to_json().unwrap()).unwrap();
        assert_eq!(back.sets, p.sets);
        assert_eq!(back.v, p.v);
        assert_eq!(back.meta, p.meta);
        assert_eq!(back.t, p.t);
        assert_eq!(back.to_json().unwrap(), p.to_json().unwrap());
    }

    #[test]
    fn rejects_mismatched_start() {
        let p = sample();
        let err = FeasibilityProblem::new("bad", p.t.clone(), p.sets.clone(), vec![0.0; 4]);
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn affine_first_moves_interpolation() {
        let mut p = sample();
        p.sets.rotate_left(2);
        let s = p.affine_first().unwrap();
        assert!(s[0].is_affine());
        assert_eq!(s[1].tag(), p.sets[0].tag());
        assert_eq!(s.len(), 6);
        let slope_only: Vec<_> = p
            .sets
            .iter()
            .filter(|c| c.tag() == SetTag::SlopeEven)
            .cloned()
            .collect();
        let q = FeasibilityProblem {
            sets: vec![slope_only[0].clone(), slope_only[0].clone()],
            ..p
        };
        assert!(q.affine_first().is_err());
    }
}
