//! Stations, constraint parameterisations and their closed-form projectors.
//!
//! All positions in this module are 0-based. Slope parity and curvature
//! block numbers follow the customary 1-based segment numbering: the odd
//! slope class holds segments `1, 3, 5, ...` (pairs starting at 0-based
//! positions `0, 2, 4, ...`) and curvature block `j` holds triples
//! `j, j+3, j+6, ...`.

mod curvature;
mod interp;
mod slope;

use serde::{Deserialize, Serialize};

pub use curvature::{
    intrepid_curvature_block, intrepid_curvature_single, project_curvature_block, project_curvature_single,
    CurvatureBounds,
};
pub use interp::{project_interpolation, InterpolationSpec};
pub use slope::{
    intrepid_slope_pair, intrepid_slope_pair_nonconvex, intrepid_slope_parity, project_slope_pair,
    project_slope_pair_nonconvex, project_slope_parity, project_slope_parity_nonconvex, SlopeBounds,
};

use crate::linalg;
use crate::sets::Constraint;
use crate::{Error, Result};
use curvature::Triple;

/// Strictly increasing stations (meters).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Breakpoints(Vec<f64>);

impl Breakpoints {
    pub fn new(t: Vec<f64>) -> Result<Self> {
        if t.len() < 2 {
            return Err(Error::InvalidSpec(format!(
                "need at least 2 breakpoints, got {}",
                t.len()
            )));
        }
        if t.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec("breakpoints must be finite".into()));
        }
        if let Some(i) = t.windows(2).position(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidSpec(format!(
                "breakpoints not strictly increasing at position {i}"
            )));
        }
        Ok(Breakpoints(t))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// `t_{i+1} - t_i` for every segment.
    pub fn spacings(&self) -> Vec<f64> {
        self.0.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn span(&self) -> f64 {
        self.0[self.0.len() - 1] - self.0[0]
    }
}

impl TryFrom<Vec<f64>> for Breakpoints {
    type Error = Error;
    fn try_from(t: Vec<f64>) -> Result<Self> {
        Breakpoints::new(t)
    }
}

impl From<Breakpoints> for Vec<f64> {
    fn from(t: Breakpoints) -> Self {
        t.0
    }
}

impl std::ops::Deref for Breakpoints {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

/// Which operator a set contributes when an algorithm asks for its
/// relaxed step: the projector itself, or its intrepid counterpart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Exact,
    Intrepid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SetTag {
    Interp,
    SlopeEven,
    SlopeOdd,
    Curv1,
    Curv2,
    Curv3,
}

/// Serialisable description of one aggregated constraint set. Curvature
/// sets take their stations from the surrounding problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SetSpec {
    Interp(InterpolationSpec),
    Slope {
        parity: Parity,
        #[serde(flatten)]
        bounds: SlopeBounds,
    },
    Curvature {
        block: u8,
        #[serde(flatten)]
        bounds: CurvatureBounds,
    },
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Interp(InterpolationSpec),
    Slope {
        parity: Parity,
        bounds: SlopeBounds,
    },
    Curvature {
        block: u8,
        bounds: CurvatureBounds,
        triples: Vec<Triple>,
    },
}

/// One of the six aggregated road-design sets (interpolation, even/odd slope,
/// curvature blocks 1-3), validated against a profile length.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSet {
    n: usize,
    kind: Kind,
    mode: Mode,
}

impl ConstraintSet {
    pub fn interpolation(spec: InterpolationSpec, n: usize) -> Result<Self> {
        spec.validate(n)?;
        Ok(ConstraintSet {
            n,
            kind: Kind::Interp(spec),
            mode: Mode::Exact,
        })
    }

    pub fn slope(parity: Parity, bounds: SlopeBounds) -> Result<Self> {
        bounds.validate()?;
        Ok(ConstraintSet {
            n: bounds.len() + 1,
            kind: Kind::Slope { parity, bounds },
            mode: Mode::Exact,
        })
    }

    pub fn curvature(block: u8, bounds: CurvatureBounds, t: &Breakpoints) -> Result<Self> {
        curvature::block_start(block)?;
        bounds.validate()?;
        let triples = curvature::triples(t, &bounds)?;
        Ok(ConstraintSet {
            n: t.len(),
            kind: Kind::Curvature { block, bounds, triples },
            mode: Mode::Exact,
        })
    }

    pub fn from_spec(spec: &SetSpec, t: &Breakpoints) -> Result<Self> {
        let set = match spec {
            SetSpec::Interp(s) => Self::interpolation(s.clone(), t.len())?,
            SetSpec::Slope { parity, bounds } => Self::slope(*parity, bounds.clone())?,
            SetSpec::Curvature { block, bounds } => Self::curvature(*block, bounds.clone(), t)?,
        };
        if set.n != t.len() {
            return Err(Error::DimensionMismatch {
                expected: t.len(),
                got: set.n,
            });
        }
        Ok(set)
    }

    pub fn to_spec(&self) -> SetSpec {
        match &self.kind {
            Kind::Interp(s) => SetSpec::Interp(s.clone()),
            Kind::Slope { parity, bounds } => SetSpec::Slope {
                parity: *parity,
                bounds: bounds.clone(),
            },
            Kind::Curvature { block, bounds, .. } => SetSpec::Curvature {
                block: *block,
                bounds: bounds.clone(),
            },
        }
    }

    /// The six sets in their canonical order `Y, S_even, S_odd, C_[1..3]`.
    pub fn road_sets(
        t: &Breakpoints,
        interp: InterpolationSpec,
        slope: SlopeBounds,
        curv: CurvatureBounds,
    ) -> Result<Vec<Self>> {
        Ok(vec![
            Self::interpolation(interp, t.len())?,
            Self::slope(Parity::Even, slope.clone())?,
            Self::slope(Parity::Odd, slope)?,
            Self::curvature(1, curv.clone(), t)?,
            Self::curvature(2, curv.clone(), t)?,
            Self::curvature(3, curv, t)?,
        ])
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn tag(&self) -> SetTag {
        match &self.kind {
            Kind::Interp(_) => SetTag::Interp,
            Kind::Slope {
                parity: Parity::Even, ..
            } => SetTag::SlopeEven,
            Kind::Slope {
                parity: Parity::Odd, ..
            } => SetTag::SlopeOdd,
            Kind::Curvature { block: 1, .. } => SetTag::Curv1,
            Kind::Curvature { block: 2, .. } => SetTag::Curv2,
            Kind::Curvature { .. } => SetTag::Curv3,
        }
    }

    pub fn is_convex(&self) -> bool {
        match &self.kind {
            Kind::Slope { bounds, .. } => bounds.is_convex(),
            _ => true,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x)?;
        let mut out = x.to_vec();
        self.project_in_place(&mut out);
        Ok(out)
    }

    pub fn intrepid(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x)?;
        let mut out = x.to_vec();
        self.intrepid_in_place(&mut out);
        Ok(out)
    }

    pub fn intrepid_in_place(&self, x: &mut [f64]) {
        match &self.kind {
            // the affine set has empty interior, so its intrepid map is the projector
            Kind::Interp(spec) => spec.project_in_place(x),
            Kind::Slope { parity, bounds } => slope::intrepid_parity_in_place(x, bounds, *parity),
            Kind::Curvature { block, triples, .. } => {
                curvature::apply_block_in_place(x, triples, *block as usize - 1, Triple::intrepid)
            }
        }
    }
}

impl Constraint for ConstraintSet {
    fn dim(&self) -> usize {
        self.n
    }

    fn project_in_place(&self, x: &mut [f64]) {
        match &self.kind {
            Kind::Interp(spec) => spec.project_in_place(x),
            Kind::Slope { parity, bounds } => slope::project_parity_in_place(x, bounds, *parity),
            Kind::Curvature { block, triples, .. } => {
                curvature::apply_block_in_place(x, triples, *block as usize - 1, Triple::project)
            }
        }
    }

    fn relax_in_place(&self, x: &mut [f64]) {
        match self.mode {
            Mode::Exact => self.project_in_place(x),
            Mode::Intrepid => self.intrepid_in_place(x),
        }
    }

    fn is_affine(&self) -> bool {
        matches!(self.kind, Kind::Interp(_))
    }
}

/// `||x - P_c x||`, the distance from `x` to the set (to the nearest branch
/// for nonconvex slope sets).
pub fn residual(x: &[f64], c: &ConstraintSet) -> Result<f64> {
    let p = c.project(x)?;
    Ok(linalg::dist(x, &p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn breakpoints_invariants() {
        assert!(Breakpoints::new(vec![0.0]).is_err());
        assert!(Breakpoints::new(vec![0.0, 0.0]).is_err());
        assert!(Breakpoints::new(vec![0.0, 2.0, 1.0]).is_err());
        let t = Breakpoints::new(vec![0.0, 2.0, 5.0]).unwrap();
        assert_eq!(t.spacings(), vec![2.0, 3.0]);
        assert!(serde_json::from_str::<Breakpoints>("[1.0, 0.5]").is_err());
    }

    #[test]
    fn residual_examples() {
        let b = SlopeBounds::new(vec![1.0], None).unwrap();
        let s = ConstraintSet::slope(Parity::Odd, b).unwrap();
        assert!((residual(&[0.0, 3.0], &s).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(residual(&[0.0, 0.5], &s).unwrap(), 0.0);

        let spec = InterpolationSpec::new(vec![0, 2], vec![1.0, 1.0], 3).unwrap();
        let y = ConstraintSet::interpolation(spec, 3).unwrap();
        assert_eq!(residual(&[4.0, 9.0, 5.0], &y).unwrap(), 5.0);
    }

    #[test]
    fn set_spec_json_shape() {
        let t = Breakpoints::new(vec![0.0, 1.0, 2.0]).unwrap();
        let set = ConstraintSet::curvature(1, CurvatureBounds::symmetric(vec![0.5]).unwrap(), &t).unwrap();
        let json = serde_json::to_value(set.to_spec()).unwrap();
        assert_eq!(json["kind"], "curvature");
        assert_eq!(json["block"], 1);
        let back: SetSpec = serde_json::from_value(json).unwrap();
        assert_eq!(ConstraintSet::from_spec(&back, &t).unwrap(), set);
    }

    #[test]
    fn intrepid_interp_is_projection() {
        let spec = InterpolationSpec::new(vec![0, 2], vec![1.0, 1.0], 3).unwrap();
        let y = ConstraintSet::interpolation(spec, 3).unwrap().with_mode(Mode::Intrepid);
        let x = [4.0, 9.0, 5.0];
        assert_eq!(y.intrepid(&x).unwrap(), y.project(&x).unwrap());
    }

    #[test]
    fn tags_and_convexity() {
        let t = Breakpoints::new(vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let sets = ConstraintSet::road_sets(
            &t,
            InterpolationSpec::endpoints(0.0, 1.0, 4).unwrap(),
            SlopeBounds::new(vec![1.0; 3], Some(vec![0.1; 3])).unwrap(),
            CurvatureBounds::symmetric(vec![1.0; 2]).unwrap(),
        )
        .unwrap();
        let tags: Vec<SetTag> = sets.iter().map(|s| s.tag()).collect();
        assert_eq!(
            tags,
            vec![
                SetTag::Interp,
                SetTag::SlopeEven,
                SetTag::SlopeOdd,
                SetTag::Curv1,
                SetTag::Curv2,
                SetTag::Curv3
            ]
        );
        assert!(!sets[1].is_convex());
        assert!(sets[3].is_convex());
        assert!(sets[0].is_affine());
    }
}
