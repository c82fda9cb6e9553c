//! Parametric airfoil sections.
//!
//! Sections are closed 2-D polylines in chordwise/thickness coordinates,
//! ordered TE -> upper -> LE -> lower -> TE with the first point repeated at
//! the end and the chord normalized to [0, 1].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{polygon_is_simple, polygon_signed_area};

/// A unit-chord airfoil section polyline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AirfoilSection {
    points: Vec<(f64, f64)>,
}

impl AirfoilSection {
    /// Wraps raw (x, z) points, checking closure, chord normalization and
    /// polygon simplicity.
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 5 {
            return Err(Error::InvalidArgument(
                "airfoil needs at least 5 points".into(),
            ));
        }
        let first = points[0];
        let last = points[points.len() - 1];
        if first != last {
            return Err(Error::InvalidArgument(
                "airfoil polyline must repeat its first point (closed trailing edge)".into(),
            ));
        }
        if points.iter().any(|(x, z)| !x.is_finite() || !z.is_finite()) {
            return Err(Error::InvalidArgument("non-finite airfoil point".into()));
        }
        let (min_x, max_x) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (x, _)| {
            (lo.min(*x), hi.max(*x))
        });
        if (max_x - min_x - 1.0).abs() > 1e-6 || min_x.abs() > 1e-6 {
            return Err(Error::InvalidArgument(format!(
                "chord must span [0, 1], got [{min_x}, {max_x}]"
            )));
        }
        if polygon_signed_area(&points) <= 0.0 || !polygon_is_simple(&points) {
            return Err(Error::InvalidArgument(
                "airfoil polygon must be simple and counterclockwise".into(),
            ));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Pointwise blend of two sections with the same point count.
    pub fn lerp(&self, other: &AirfoilSection, t: f64) -> AirfoilSection {
        assert_eq!(self.len(), other.len(), "airfoil point counts must match");
        let points = self
            .points
            .iter()
            .zip(&other.points)
            .map(|((x0, z0), (x1, z1))| (x0 + (x1 - x0) * t, z0 + (z1 - z0) * t))
            .collect();
        AirfoilSection { points }
    }
}

// Closed-trailing-edge variant of the NACA 4-digit thickness polynomial: the
// final coefficient is -0.1036 instead of -0.1015 so the half-thickness is
// exactly zero at x = 1.
const THICKNESS_COEFFS: [f64; 5] = [0.2969, -0.1260, -0.3516, 0.2843, -0.1036];

fn half_thickness(t: f64, x: f64) -> f64 {
    let [a0, a1, a2, a3, a4] = THICKNESS_COEFFS;
    5.0 * t * (a0 * x.sqrt() + x * (a1 + x * (a2 + x * (a3 + x * a4))))
}

fn camber(m: f64, p: f64, x: f64) -> f64 {
    if m == 0.0 {
        0.0
    } else if x <= p {
        m / (p * p) * (2.0 * p * x - x * x)
    } else {
        m / ((1.0 - p) * (1.0 - p)) * (1.0 - 2.0 * p + 2.0 * p * x - x * x)
    }
}

/// NACA 4-digit airfoil with maximum camber `m` at chord fraction `p` and
/// relative thickness `t`, sampled at `n` cosine-spaced points.
///
/// `n` must be odd (and at least 65) so the leading edge lands exactly on a
/// station; thickness is applied vertically about the camber line.
pub fn naca4_airfoil(m: f64, p: f64, t: f64, n: usize) -> Result<AirfoilSection> {
    if !(0.0..=0.09).contains(&m) {
        return Err(Error::InvalidArgument(format!("camber {m} outside [0, 0.09]")));
    }
    if m > 0.0 && !(0.2..=0.7).contains(&p) {
        return Err(Error::InvalidArgument(format!(
            "camber position {p} outside [0.2, 0.7]"
        )));
    }
    if !(0.06..=0.18).contains(&t) {
        return Err(Error::InvalidArgument(format!(
            "thickness {t} outside [0.06, 0.18]"
        )));
    }
    if n < 65 || n % 2 == 0 {
        return Err(Error::InvalidArgument(format!(
            "point count {n} must be odd and >= 65"
        )));
    }
    let half = (n - 1) / 2;
    let mut points = Vec::with_capacity(n);
    // Upper surface TE -> LE.
    for i in 0..=half {
        let x = 0.5 * (1.0 + (std::f64::consts::PI * i as f64 / half as f64).cos());
        points.push((x, camber(m, p, x) + half_thickness(t, x)));
    }
    // Lower surface LE -> TE, skipping the shared LE point.
    for i in 1..=half {
        let x = 0.5 * (1.0 - (std::f64::consts::PI * i as f64 / half as f64).cos());
        points.push((x, camber(m, p, x) - half_thickness(t, x)));
    }
    // Exact closure at the trailing edge.
    points[0] = (1.0, 0.0);
    let last = points.len() - 1;
    points[last] = (1.0, 0.0);
    AirfoilSection::new(points)
}

/// Loads an airfoil from a plain coordinate file: one `x z` pair per line,
/// `#`-prefixed comments allowed, ordered TE -> upper -> LE -> lower -> TE.
///
/// The polyline is closed if the file leaves the trailing edge open, then
/// validated like any other section.
pub fn load_airfoil_file(path: &std::path::Path) -> Result<AirfoilSection> {
    let text = std::fs::read_to_string(path)?;
    let mut points = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        let parse = |tok: Option<&str>| -> Result<f64> {
            tok.ok_or_else(|| Error::Format(format!("line {}: expected two numbers", lineno + 1)))?
                .parse()
                .map_err(|_| Error::Format(format!("line {}: bad number", lineno + 1)))
        };
        let x = parse(it.next())?;
        let z = parse(it.next())?;
        points.push((x, z));
    }
    if points.len() >= 2 && points[0] != points[points.len() - 1] {
        points.push(points[0]);
    }
    AirfoilSection::new(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_airfoil_mirrors() {
        let a = naca4_airfoil(0.0, 0.4, 0.12, 65).unwrap();
        let pts = a.points();
        let n = pts.len();
        for i in 0..n {
            let (xu, zu) = pts[i];
            let (xl, zl) = pts[n - 1 - i];
            assert!((xu - xl).abs() <= 1e-12);
            assert!((zu + zl).abs() <= 1e-12);
        }
    }

    #[test]
    fn published_thickness_value() {
        // t = 0.12 at x = 0.3 gives half-thickness 0.0600 to 1e-3.
        assert!((half_thickness(0.12, 0.3) - 0.06).abs() <= 1e-3);
    }

    #[test]
    fn closure_is_exact() {
        let a = naca4_airfoil(0.04, 0.4, 0.12, 199).unwrap();
        assert_eq!(a.points()[0], *a.points().last().unwrap());
        assert_eq!(a.points()[0], (1.0, 0.0));
    }

    #[test]
    fn leading_edge_on_station() {
        let a = naca4_airfoil(0.02, 0.4, 0.12, 65).unwrap();
        let (x_le, _) = a.points()[(a.len() - 1) / 2];
        assert_eq!(x_le, 0.0);
    }

    #[test]
    fn rejects_out_of_range_parameters() {
        assert!(naca4_airfoil(0.10, 0.4, 0.12, 65).is_err());
        assert!(naca4_airfoil(0.02, 0.1, 0.12, 65).is_err());
        assert!(naca4_airfoil(0.02, 0.4, 0.30, 65).is_err());
        assert!(naca4_airfoil(0.02, 0.4, 0.12, 64).is_err());
        assert!(naca4_airfoil(0.02, 0.4, 0.12, 33).is_err());
    }

    #[test]
    fn camber_line_peaks_at_p() {
        let m = 0.04;
        let p = 0.4;
        assert!((camber(m, p, p) - m).abs() <= 1e-12);
        assert!(camber(m, p, 0.0).abs() <= 1e-12);
        assert!(camber(m, p, 1.0).abs() <= 1e-12);
    }

    #[test]
    fn loads_coordinate_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("foil.dat");
        let a = naca4_airfoil(0.02, 0.4, 0.12, 65).unwrap();
        let mut text = String::from("# test foil\n");
        for (x, z) in a.points() {
            text.push_str(&format!("{x} {z}\n"));
        }
        std::fs::write(&path, text).unwrap();
        let b = load_airfoil_file(&path).unwrap();
        assert_eq!(a.len(), b.len());
        for ((xa, za), (xb, zb)) in a.points().iter().zip(b.points()) {
            assert!((xa - xb).abs() <= 1e-12 && (za - zb).abs() <= 1e-12);
        }
    }
}
