//! Uniform parameterization interface: a bounded design vector decoding to
//! a wing surface, with the three concrete instances (FFD offsets, B-spline
//! surface, and the trained generator's latent space).

mod bspline;
mod ffd;
mod gan;

pub use bspline::{bspline_basis, clamped_uniform_knots, BsplineParam};
pub use ffd::FfdParam;
pub use gan::GanParam;

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::SurfaceGrid;

/// Box-bounded design space of a parameterization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignSpace {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

/// Slack for bounds checks, relative to each variable's range.
const BOUNDS_TOL: f64 = 1e-9;

impl DesignSpace {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::InvalidArgument(
                "bound vectors must be non-empty and equally long".into(),
            ));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l < u)) {
            return Err(Error::InvalidArgument(
                "lower bounds must be strictly below upper bounds".into(),
            ));
        }
        Ok(Self { lower, upper })
    }

    /// Symmetric space `[-bound, bound]^dim`.
    pub fn symmetric(dim: usize, bound: f64) -> Result<Self> {
        Self::new(vec![-bound; dim], vec![bound; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter().zip(self.lower.iter().zip(&self.upper)).all(|(v, (l, u))| {
                let slack = BOUNDS_TOL * (u - l);
                v.is_finite() && *v >= l - slack && *v <= u + slack
            })
    }

    pub fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::InvalidArgument(format!(
                "design vector has {} entries, space has {}",
                x.len(),
                self.dim()
            )));
        }
        if !self.contains(x) {
            return Err(Error::OutOfBounds(
                "design vector violates its bounds".into(),
            ));
        }
        Ok(())
    }

    pub fn clamp(&self, x: &mut [f64]) {
        for (v, (l, u)) in x.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *v = v.clamp(*l, *u);
        }
    }

    /// Uniform sample within the bounds.
    pub fn sample(&self, rng: &mut impl Rng) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| rng.random_range(*l..*u))
            .collect()
    }

    /// Maps a unit-cube point into the bounds.
    pub fn from_unit(&self, unit: &[f64]) -> Vec<f64> {
        assert_eq!(unit.len(), self.dim());
        unit.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(t, (l, u))| l + t * (u - l))
            .collect()
    }
}

/// A design vector to wing surface map with box bounds.
pub trait Parameterization {
    fn name(&self) -> &str;
    fn space(&self) -> &DesignSpace;
    /// Decodes an in-bounds design vector; out-of-bounds input is an error.
    fn decode(&self, x: &[f64]) -> Result<SurfaceGrid>;
}

/// Concrete parameterization dispatch for the harness and CLI.
pub enum AnyParam {
    Ffd(FfdParam),
    Bspline(BsplineParam),
    Gan(GanParam),
}

impl Parameterization for AnyParam {
    fn name(&self) -> &str {
        match self {
            AnyParam::Ffd(p) => p.name(),
            AnyParam::Bspline(p) => p.name(),
            AnyParam::Gan(p) => p.name(),
        }
    }

    fn space(&self) -> &DesignSpace {
        match self {
            AnyParam::Ffd(p) => p.space(),
            AnyParam::Bspline(p) => p.space(),
            AnyParam::Gan(p) => p.space(),
        }
    }

    fn decode(&self, x: &[f64]) -> Result<SurfaceGrid> {
        match self {
            AnyParam::Ffd(p) => p.decode(x),
            AnyParam::Bspline(p) => p.decode(x),
            AnyParam::Gan(p) => p.decode(x),
        }
    }
}

/// Serializable parameterization definition for reuse across runs.
///
/// FFD and B-spline definitions are self-contained (the base shape plus the
/// construction parameters reproduce the instance deterministically); a GAN
/// definition points at its checkpoint stem.
#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum ParamDef {
    Ffd {
        base: SurfaceGrid,
        control_counts: (usize, usize, usize),
        bound: f64,
    },
    Bspline {
        base: SurfaceGrid,
        ctrl_span: usize,
        ctrl_chord: usize,
        sweep_bound_deg: f64,
        z_bound: f64,
    },
    Gan {
        checkpoint_stem: String,
    },
}

impl ParamDef {
    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    /// Instantiates the parameterization this definition describes.
    pub fn build(&self) -> Result<AnyParam> {
        match self {
            ParamDef::Ffd {
                base,
                control_counts,
                bound,
            } => Ok(AnyParam::Ffd(FfdParam::new(
                base.clone(),
                *control_counts,
                *bound,
            )?)),
            ParamDef::Bspline {
                base,
                ctrl_span,
                ctrl_chord,
                sweep_bound_deg,
                z_bound,
            } => Ok(AnyParam::Bspline(BsplineParam::fit(
                base,
                *ctrl_span,
                *ctrl_chord,
                *sweep_bound_deg,
                *z_bound,
            )?)),
            ParamDef::Gan { checkpoint_stem } => {
                let (gen, _) = crate::neural::load_generator(Path::new(checkpoint_stem))?;
                Ok(AnyParam::Gan(GanParam::new(gen)))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn design_space_basics() {
        let ds = DesignSpace::symmetric(3, 0.1).unwrap();
        assert_eq!(ds.dim(), 3);
        assert!(ds.contains(&[0.1, -0.1, 0.05]));
        assert!(!ds.contains(&[0.2, 0.0, 0.0]));
        assert!(ds.check(&[0.0, 0.0]).is_err());
        let mut x = [0.3, -0.4, 0.0];
        ds.clamp(&mut x);
        assert_eq!(x, [0.1, -0.1, 0.0]);
        assert!(DesignSpace::new(vec![0.0], vec![0.0]).is_err());
    }

    #[test]
    fn sampling_respects_bounds() {
        let ds = DesignSpace::new(vec![-1.0, 2.0], vec![1.0, 5.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let x = ds.sample(&mut rng);
            assert!(ds.contains(&x));
        }
        assert_eq!(ds.from_unit(&[0.5, 0.0]), vec![0.0, 2.0]);
    }
}
