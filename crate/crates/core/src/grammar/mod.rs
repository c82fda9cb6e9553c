//! Probabilistic-grammar wing synthesizer.
//!
//! A wing instance is a root-to-tip list of sections, each carrying a span
//! location, chord, twist, leading-edge offsets and an airfoil. Section
//! attributes are drawn uniformly within bounds conditioned on the previous
//! section, which keeps transitions smooth and the chord monotone. Realized
//! surfaces interpolate linearly between sections and come out already in
//! the aligned dataset convention (root leading edge at the origin, root
//! chord along +x, half-span 1).

mod airfoil;
mod dataset;

pub use airfoil::{load_airfoil_file, naca4_airfoil, AirfoilSection};
pub use dataset::{generate_dataset, read_dataset, write_dataset, Dataset};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point3, SurfaceGrid};

/// One wing cross-section of a grammar instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WingSection {
    /// Position along the half-span in [0, 1]; strictly increasing.
    pub span_fraction: f64,
    /// Section chord in half-span units; non-increasing root to tip.
    pub chord: f64,
    /// Incidence in degrees, positive nose-up.
    pub twist_deg: f64,
    /// Leading-edge x offset (backward sweep accumulates positively).
    pub le_x: f64,
    /// Leading-edge z offset (dihedral accumulates positively).
    pub le_z: f64,
    pub airfoil: AirfoilSection,
}

/// A sampled wing: 4 to 8 sections from root (span 0) to tip (span 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WingSpec {
    pub sections: Vec<WingSection>,
}

impl WingSpec {
    fn validate(&self) -> Result<()> {
        let k = self.sections.len();
        if !(4..=8).contains(&k) {
            return Err(Error::InvalidArgument(format!(
                "wing must have 4..=8 sections, got {k}"
            )));
        }
        if self.sections[0].span_fraction != 0.0
            || self.sections[k - 1].span_fraction != 1.0
        {
            return Err(Error::InvalidArgument(
                "span fractions must run from 0 to 1".into(),
            ));
        }
        for w in self.sections.windows(2) {
            if w[1].span_fraction <= w[0].span_fraction {
                return Err(Error::InvalidArgument(
                    "span fractions must be strictly increasing".into(),
                ));
            }
            if w[1].chord > w[0].chord {
                return Err(Error::InvalidArgument(
                    "chord must be non-increasing root to tip".into(),
                ));
            }
        }
        if self.sections.iter().any(|s| s.chord <= 0.0) {
            return Err(Error::InvalidArgument("chord must be positive".into()));
        }
        Ok(())
    }
}

/// Attribute bounds for the wing grammar. Each rule conditions a section's
/// draw on the previous section; see field docs for the exact rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrammarConfig {
    /// Root chord range as a fraction of the half-span.
    pub root_chord: (f64, f64),
    /// Minimum tip/root chord ratio; later chords never drop below
    /// `min_tip_ratio * root chord`.
    pub min_tip_ratio: f64,
    /// Per-step chord lower bound as a ratio of the previous chord.
    pub chord_step_ratio: f64,
    /// Per-section twist increment bound in degrees (symmetric).
    pub twist_step_deg: f64,
    /// Cumulative twist bound in degrees (symmetric).
    pub twist_total_deg: f64,
    /// Per-section leading-edge sweep increment range (non-negative).
    pub sweep_step: (f64, f64),
    /// Per-section leading-edge dihedral increment range (non-negative).
    pub dihedral_step: (f64, f64),
    /// NACA camber range.
    pub camber: (f64, f64),
    /// NACA camber-position range.
    pub camber_pos: (f64, f64),
    /// NACA thickness range.
    pub thickness: (f64, f64),
    /// Minimum gap between sampled span fractions.
    pub min_span_gap: f64,
    /// Space spec sections uniformly instead of sampling their locations.
    pub uniform_spacing: bool,
    /// Output sections per realized surface.
    pub grid_sections: usize,
    /// Output points per section (odd; shared with the airfoil sampler).
    pub grid_points: usize,
}

impl Default for GrammarConfig {
    fn default() -> Self {
        Self {
            root_chord: (0.15, 0.45),
            min_tip_ratio: 0.2,
            chord_step_ratio: 0.6,
            twist_step_deg: 5.0,
            twist_total_deg: 10.0,
            sweep_step: (0.0, 0.06),
            dihedral_step: (0.0, 0.03),
            camber: (0.0, 0.05),
            camber_pos: (0.25, 0.65),
            thickness: (0.08, 0.16),
            min_span_gap: 0.05,
            uniform_spacing: false,
            grid_sections: 21,
            grid_points: 199,
        }
    }
}

impl GrammarConfig {
    pub fn validate(&self) -> Result<()> {
        let ranges = [
            ("root_chord", self.root_chord),
            ("sweep_step", self.sweep_step),
            ("dihedral_step", self.dihedral_step),
            ("camber", self.camber),
            ("camber_pos", self.camber_pos),
            ("thickness", self.thickness),
        ];
        for (name, (lb, ub)) in ranges {
            if !(lb.is_finite() && ub.is_finite() && lb <= ub) {
                return Err(Error::InvalidArgument(format!("{name} bounds invalid: [{lb}, {ub}]")));
            }
        }
        if self.root_chord.0 <= 0.0 {
            return Err(Error::InvalidArgument("root chord must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.min_tip_ratio) {
            return Err(Error::InvalidArgument("min_tip_ratio must be in [0, 1)".into()));
        }
        if !(0.0..1.0).contains(&self.chord_step_ratio) {
            return Err(Error::InvalidArgument("chord_step_ratio must be in [0, 1)".into()));
        }
        if self.twist_step_deg < 0.0 || self.twist_total_deg < 0.0 {
            return Err(Error::InvalidArgument("twist bounds must be non-negative".into()));
        }
        if self.sweep_step.0 < 0.0 || self.dihedral_step.0 < 0.0 {
            return Err(Error::InvalidArgument(
                "sweep and dihedral increments must be non-negative".into(),
            ));
        }
        if self.min_span_gap <= 0.0 || self.min_span_gap * 9.0 >= 1.0 {
            return Err(Error::InvalidArgument(
                "min_span_gap must be positive and leave room for 8 sections".into(),
            ));
        }
        if self.grid_sections < 8 {
            return Err(Error::InvalidArgument("grid_sections must be at least 8".into()));
        }
        if self.grid_points < 65 || self.grid_points % 2 == 0 {
            return Err(Error::InvalidArgument(
                "grid_points must be odd and at least 65".into(),
            ));
        }
        Ok(())
    }
}

fn uniform_in(rng: &mut impl Rng, (lb, ub): (f64, f64)) -> f64 {
    if lb == ub {
        lb
    } else {
        rng.random_range(lb..ub)
    }
}

fn sample_span_fractions(rng: &mut impl Rng, k: usize, cfg: &GrammarConfig) -> Vec<f64> {
    if cfg.uniform_spacing {
        return (0..k).map(|i| i as f64 / (k - 1) as f64).collect();
    }
    loop {
        let mut interior: Vec<f64> = (0..k - 2).map(|_| rng.random_range(0.0..1.0)).collect();
        interior.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut fr = Vec::with_capacity(k);
        fr.push(0.0);
        fr.extend(interior);
        fr.push(1.0);
        if fr.windows(2).all(|w| w[1] - w[0] >= cfg.min_span_gap) {
            return fr;
        }
    }
}

/// Draws one wing instance from the grammar.
///
/// The draw order is fixed (section count, span locations, then per-section
/// airfoil and attributes), so a seeded stream reproduces the same spec.
/// The root section is pinned at zero twist and zero offsets so realized
/// surfaces land in the aligned convention.
pub fn sample_wing(cfg: &GrammarConfig, rng: &mut impl Rng) -> Result<WingSpec> {
    cfg.validate()?;
    let k = rng.random_range(4..=8usize);
    let fractions = sample_span_fractions(rng, k, cfg);
    let mut sections: Vec<WingSection> = Vec::with_capacity(k);
    let mut root_chord = 0.0;
    for (idx, &fr) in fractions.iter().enumerate() {
        let m = uniform_in(rng, cfg.camber);
        let p = uniform_in(rng, cfg.camber_pos);
        let t = uniform_in(rng, cfg.thickness);
        let airfoil = naca4_airfoil(m, p, t, cfg.grid_points)?;
        let sec = if idx == 0 {
            root_chord = uniform_in(rng, cfg.root_chord);
            WingSection {
                span_fraction: fr,
                chord: root_chord,
                twist_deg: 0.0,
                le_x: 0.0,
                le_z: 0.0,
                airfoil,
            }
        } else {
            let prev = &sections[idx - 1];
            let lo = (cfg.min_tip_ratio * root_chord).max(cfg.chord_step_ratio * prev.chord);
            let chord = uniform_in(rng, (lo, prev.chord));
            debug_assert!(chord <= prev.chord);
            let t_lo = (prev.twist_deg - cfg.twist_step_deg).max(-cfg.twist_total_deg);
            let t_hi = (prev.twist_deg + cfg.twist_step_deg).min(cfg.twist_total_deg);
            WingSection {
                span_fraction: fr,
                chord,
                twist_deg: uniform_in(rng, (t_lo, t_hi)),
                le_x: prev.le_x + uniform_in(rng, cfg.sweep_step),
                le_z: prev.le_z + uniform_in(rng, cfg.dihedral_step),
                airfoil,
            }
        };
        sections.push(sec);
    }
    let spec = WingSpec { sections };
    spec.validate()?;
    Ok(spec)
}

/// Realizes a wing spec as an `m_out x n_out` surface grid.
///
/// Stations are uniformly spaced along the span; airfoil shape, chord,
/// twist and leading-edge offsets are interpolated linearly between the
/// bracketing spec sections. The output is already aligned: root leading
/// edge at the origin, root chord along +x, span exactly 1.
pub fn realize_surface(spec: &WingSpec, m_out: usize, n_out: usize) -> Result<SurfaceGrid> {
    spec.validate()?;
    if m_out < spec.sections.len() {
        return Err(Error::InvalidArgument(format!(
            "output sections {m_out} fewer than spec sections {}",
            spec.sections.len()
        )));
    }
    let n_air = spec.sections[0].airfoil.len();
    if spec.sections.iter().any(|s| s.airfoil.len() != n_air) {
        return Err(Error::InvalidArgument(
            "all spec sections must share the airfoil point count".into(),
        ));
    }
    if n_out != n_air {
        return Err(Error::InvalidArgument(format!(
            "output resolution {n_out} must match airfoil point count {n_air}"
        )));
    }
    let mut points = Vec::with_capacity(m_out * n_out);
    let mut upper = 1usize;
    for s in 0..m_out {
        let fr = s as f64 / (m_out - 1) as f64;
        while upper + 1 < spec.sections.len() && spec.sections[upper].span_fraction < fr {
            upper += 1;
        }
        let lo = &spec.sections[upper - 1];
        let hi = &spec.sections[upper];
        let t = ((fr - lo.span_fraction) / (hi.span_fraction - lo.span_fraction)).clamp(0.0, 1.0);
        let lerp = |a: f64, b: f64| a + (b - a) * t;
        let chord = lerp(lo.chord, hi.chord);
        let twist = lerp(lo.twist_deg, hi.twist_deg).to_radians();
        let le_x = lerp(lo.le_x, hi.le_x);
        let le_z = lerp(lo.le_z, hi.le_z);
        let foil = lo.airfoil.lerp(&hi.airfoil, t);
        let (sin_t, cos_t) = twist.sin_cos();
        for &(ax, az) in foil.points() {
            // Scale to chord, rotate nose-up about the leading edge, offset.
            let (px, pz) = (ax * chord, az * chord);
            points.push(Point3::new(
                le_x + cos_t * px + sin_t * pz,
                fr,
                le_z - sin_t * px + cos_t * pz,
            ));
        }
    }
    SurfaceGrid::new(m_out, n_out, points)
}
