//! Core wing geometry: surface grids, FFD control lattices, Bernstein
//! kernels, shape metrics and dataset preprocessing.
//!
//! Every operation here is pure; nothing holds shared mutable state, so all
//! of it is safe to call from worker threads.

mod polygon;

pub use polygon::{polygon_is_simple, polygon_signed_area, self_intersection_check};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point in normalized model units (half-span = 1 after alignment).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn dist(&self, other: &Point3) -> f64 {
        self.dist_sq(other).sqrt()
    }

    pub fn dist_sq(&self, other: &Point3) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        dx * dx + dy * dy + dz * dz
    }
}

impl std::ops::Add for Point3 {
    type Output = Point3;
    fn add(self, o: Point3) -> Point3 {
        Point3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl std::ops::Sub for Point3 {
    type Output = Point3;
    fn sub(self, o: Point3) -> Point3 {
        Point3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl std::ops::Mul<f64> for Point3 {
    type Output = Point3;
    fn mul(self, s: f64) -> Point3 {
        Point3::new(self.x * s, self.y * s, self.z * s)
    }
}

/// M sections of N surface points each, row-major by section.
///
/// Section index runs root to tip; y-coordinates are non-decreasing with
/// the section index. Each section is a closed airfoil polyline ordered
/// TE -> upper -> LE -> lower -> TE.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceGrid {
    m: usize,
    n: usize,
    points: Vec<Point3>,
}

impl SurfaceGrid {
    /// Builds a grid from row-major points, checking the type invariants.
    pub fn new(m: usize, n: usize, points: Vec<Point3>) -> Result<Self> {
        if m < 2 || n < 4 {
            return Err(Error::InvalidArgument(format!(
                "grid must be at least 2x4, got {m}x{n}"
            )));
        }
        if points.len() != m * n {
            return Err(Error::InvalidArgument(format!(
                "expected {} points, got {}",
                m * n,
                points.len()
            )));
        }
        if !points.iter().all(Point3::is_finite) {
            return Err(Error::InvalidArgument("non-finite surface point".into()));
        }
        let grid = Self { m, n, points };
        let mut prev = f64::NEG_INFINITY;
        for s in 0..m {
            let y = grid.section_mean_y(s);
            if y < prev - 1e-9 {
                return Err(Error::InvalidArgument(
                    "section y-coordinates must be non-decreasing".into(),
                ));
            }
            prev = y;
        }
        Ok(grid)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn point(&self, s: usize, t: usize) -> Point3 {
        self.points[s * self.n + t]
    }

    pub fn section(&self, s: usize) -> &[Point3] {
        &self.points[s * self.n..(s + 1) * self.n]
    }

    fn section_mean_y(&self, s: usize) -> f64 {
        let sec = self.section(s);
        sec.iter().map(|p| p.y).sum::<f64>() / sec.len() as f64
    }

    /// Largest absolute coordinate difference to another grid of equal shape.
    pub fn max_abs_diff(&self, other: &SurfaceGrid) -> f64 {
        assert_eq!((self.m, self.n), (other.m, other.n));
        self.points
            .iter()
            .zip(&other.points)
            .flat_map(|(a, b)| [(a.x - b.x).abs(), (a.y - b.y).abs(), (a.z - b.z).abs()])
            .fold(0.0, f64::max)
    }
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub min: Point3,
    pub max: Point3,
}

impl BoundingBox {
    pub fn new(min: Point3, max: Point3) -> Result<Self> {
        if !(min.is_finite() && max.is_finite()) {
            return Err(Error::InvalidArgument("non-finite box corner".into()));
        }
        if min.x > max.x || min.y > max.y || min.z > max.z {
            return Err(Error::InvalidArgument(
                "box min must not exceed max componentwise".into(),
            ));
        }
        Ok(Self { min, max })
    }

    /// Tight box of a point set.
    pub fn of_points<'a>(points: impl IntoIterator<Item = &'a Point3>) -> Result<Self> {
        let mut it = points.into_iter();
        let first = *it
            .next()
            .ok_or_else(|| Error::InvalidArgument("empty point set".into()))?;
        let mut min = first;
        let mut max = first;
        for p in it {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            min.z = min.z.min(p.z);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
            max.z = max.z.max(p.z);
        }
        Self::new(min, max)
    }

    /// Grows the box by `frac` of each axis extent on both sides.
    pub fn inflated(&self, frac: f64) -> BoundingBox {
        let e = self.extent();
        BoundingBox {
            min: Point3::new(
                self.min.x - frac * e.x,
                self.min.y - frac * e.y,
                self.min.z - frac * e.z,
            ),
            max: Point3::new(
                self.max.x + frac * e.x,
                self.max.y + frac * e.y,
                self.max.z + frac * e.z,
            ),
        }
    }

    pub fn extent(&self) -> Point3 {
        self.max - self.min
    }
}

/// Margin, as a fraction of each axis extent, used when deriving an FFD box
/// from a base shape so that nearby deformed shapes stay parameterizable.
pub const FFD_BOX_MARGIN: f64 = 0.05;

/// Bounding box of a base surface inflated by [`FFD_BOX_MARGIN`] per axis.
pub fn ffd_box(base: &SurfaceGrid) -> Result<BoundingBox> {
    Ok(BoundingBox::of_points(base.points())?.inflated(FFD_BOX_MARGIN))
}

/// An FFD control lattice of (l+1) x (m+1) x (n+1) points inside a box.
///
/// `l`, `m`, `n` are degree counts (points minus one per axis). Point
/// (i, j, k) is stored at index `(i*(m+1) + j)*(n+1) + k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlLattice {
    l: usize,
    m: usize,
    n: usize,
    points: Vec<Point3>,
    bounds: BoundingBox,
}

impl ControlLattice {
    pub fn degrees(&self) -> (usize, usize, usize) {
        (self.l, self.m, self.n)
    }

    /// Control points per axis: (l+1, m+1, n+1).
    pub fn point_counts(&self) -> (usize, usize, usize) {
        (self.l + 1, self.m + 1, self.n + 1)
    }

    pub fn point_count(&self) -> usize {
        (self.l + 1) * (self.m + 1) * (self.n + 1)
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn bounds(&self) -> &BoundingBox {
        &self.bounds
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * (self.m + 1) + j) * (self.n + 1) + k
    }

    pub fn point(&self, i: usize, j: usize, k: usize) -> Point3 {
        self.points[self.index(i, j, k)]
    }
}

/// Parametric coordinates of an embedded surface grid, each in [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamCoords {
    m: usize,
    n: usize,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
}

impl ParamCoords {
    pub fn grid_dims(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }
}

/// The i-th Bernstein polynomial of degree `l` at `u`:
/// `C(l,i) * u^i * (1-u)^(l-i)`.
pub fn bernstein(i: usize, l: usize, u: f64) -> Result<f64> {
    if i > l {
        return Err(Error::InvalidArgument(format!(
            "bernstein index {i} exceeds degree {l}"
        )));
    }
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::OutOfDomain(format!(
            "bernstein parameter {u} outside [0, 1]"
        )));
    }
    Ok(binomial(l, i) * u.powi(i as i32) * (1.0 - u).powi((l - i) as i32))
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut acc = 1.0;
    for j in 0..k {
        acc = acc * (n - j) as f64 / (j + 1) as f64;
    }
    acc
}

/// All Bernstein values of degree `l` at `u`, by index.
///
/// Evaluated with the de Casteljau-style recurrence, which keeps the
/// partition-of-unity identity exact to rounding.
fn bernstein_row(l: usize, u: f64) -> Vec<f64> {
    let mut row = vec![0.0; l + 1];
    row[0] = 1.0;
    for deg in 1..=l {
        let mut prev = 0.0;
        for item in row.iter_mut().take(deg + 1) {
            let cur = *item;
            *item = cur * (1.0 - u) + prev * u;
            prev = cur;
        }
    }
    row
}

/// Equally spaced control points filling `bounds`.
///
/// Point (i, j, k) sits at `min + (i/l, j/m, k/n) .* (max - min)`.
pub fn base_lattice(bounds: &BoundingBox, l: usize, m: usize, n: usize) -> Result<ControlLattice> {
    if l < 1 || m < 1 || n < 1 {
        return Err(Error::InvalidArgument(
            "lattice needs at least degree 1 (two points) per axis".into(),
        ));
    }
    let e = bounds.extent();
    for (axis, ext) in [("x", e.x), ("y", e.y), ("z", e.z)] {
        if ext <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "degenerate box axis {axis} cannot carry control points"
            )));
        }
    }
    let mut points = Vec::with_capacity((l + 1) * (m + 1) * (n + 1));
    for i in 0..=l {
        for j in 0..=m {
            for k in 0..=n {
                points.push(Point3::new(
                    bounds.min.x + (i as f64 / l as f64) * e.x,
                    bounds.min.y + (j as f64 / m as f64) * e.y,
                    bounds.min.z + (k as f64 / n as f64) * e.z,
                ));
            }
        }
    }
    Ok(ControlLattice {
        l,
        m,
        n,
        points,
        bounds: *bounds,
    })
}

/// Relative tolerance for points nominally inside the FFD box.
const COORD_TOL: f64 = 1e-9;

/// Maps base surface points to parametric coordinates in [0, 1] by the
/// per-axis affine map of the box.
pub fn param_coords(base: &SurfaceGrid, bounds: &BoundingBox) -> Result<ParamCoords> {
    let e = bounds.extent();
    for (axis, ext) in [("x", e.x), ("y", e.y), ("z", e.z)] {
        if ext <= 0.0 {
            return Err(Error::Degenerate(format!(
                "box axis {axis} has zero extent; parametric coordinates undefined"
            )));
        }
    }
    let map = |val: f64, lo: f64, ext: f64, axis: &str| -> Result<f64> {
        let t = (val - lo) / ext;
        if !(-COORD_TOL..=1.0 + COORD_TOL).contains(&t) {
            return Err(Error::OutOfDomain(format!(
                "point {axis}-coordinate {val} outside box beyond tolerance"
            )));
        }
        Ok(t.clamp(0.0, 1.0))
    };
    let np = base.points().len();
    let mut u = Vec::with_capacity(np);
    let mut v = Vec::with_capacity(np);
    let mut w = Vec::with_capacity(np);
    for p in base.points() {
        u.push(map(p.x, bounds.min.x, e.x, "x")?);
        v.push(map(p.y, bounds.min.y, e.y, "y")?);
        w.push(map(p.z, bounds.min.z, e.z, "z")?);
    }
    Ok(ParamCoords {
        m: base.m(),
        n: base.n(),
        u,
        v,
        w,
    })
}

/// Deforms the embedded surface by the trivariate Bernstein sum over
/// `base + delta` control points.
///
/// The output is linear in `delta`; a zero `delta` reproduces the embedded
/// base surface exactly (affine precision of the Bernstein basis).
pub fn ffd_deform(
    base: &ControlLattice,
    delta: &[Point3],
    coords: &ParamCoords,
) -> Result<SurfaceGrid> {
    if delta.len() != base.point_count() {
        return Err(Error::InvalidArgument(format!(
            "delta has {} offsets, lattice has {} points",
            delta.len(),
            base.point_count()
        )));
    }
    let (l, m, n) = base.degrees();
    let (gm, gn) = coords.grid_dims();
    let mut out = Vec::with_capacity(coords.len());
    for p in 0..coords.len() {
        let bu = bernstein_row(l, coords.u[p]);
        let bv = bernstein_row(m, coords.v[p]);
        let bw = bernstein_row(n, coords.w[p]);
        let mut acc = Point3::default();
        for (i, &wu) in bu.iter().enumerate() {
            for (j, &wv) in bv.iter().enumerate() {
                let wuv = wu * wv;
                for (k, &ww) in bw.iter().enumerate() {
                    let idx = base.index(i, j, k);
                    let cp = base.points()[idx] + delta[idx];
                    acc = acc + cp * (wuv * ww);
                }
            }
        }
        out.push(acc);
    }
    SurfaceGrid::new(gm, gn, out)
}

/// Dense FFD basis matrix: row per surface point, column per control point,
/// entry `B_i(u) B_j(v) B_k(w)` in lattice index order.
///
/// With this matrix the deformation is the linear map
/// `surface = basis * (base + delta)` applied per axis, which is what the
/// generator's FFD layer and the FFD least-squares fit both use.
pub fn ffd_basis_matrix(lattice: &ControlLattice, coords: &ParamCoords) -> Vec<f64> {
    let (l, m, n) = lattice.degrees();
    let ncp = lattice.point_count();
    let mut rows = Vec::with_capacity(coords.len() * ncp);
    for p in 0..coords.len() {
        let bu = bernstein_row(l, coords.u[p]);
        let bv = bernstein_row(m, coords.v[p]);
        let bw = bernstein_row(n, coords.w[p]);
        for &wu in &bu {
            for &wv in &bv {
                let wuv = wu * wv;
                for &ww in &bw {
                    rows.push(wuv * ww);
                }
            }
        }
    }
    rows
}

/// Hausdorff distance between the two grids' point sets.
///
/// Symmetric max of the two directed sup-inf distances; grid sizes need not
/// match. Exact over the discrete points (no surface interpolation).
pub fn hausdorff(a: &SurfaceGrid, b: &SurfaceGrid) -> f64 {
    directed_hausdorff(a.points(), b.points()).max(directed_hausdorff(b.points(), a.points()))
}

/// Directed Hausdorff distance between raw point sets.
pub fn directed_hausdorff(from: &[Point3], to: &[Point3]) -> f64 {
    // Early-break scan: once a target closer than the current supremum is
    // found the inner loop stops; the final max is unaffected.
    let mut sup = 0.0f64;
    let mut sup_sq = 0.0f64;
    for p in from {
        let mut best = f64::INFINITY;
        for q in to {
            let d = p.dist_sq(q);
            if d < best {
                best = d;
                if best <= sup_sq {
                    break;
                }
            }
        }
        if best > sup_sq {
            sup_sq = best;
            sup = best.sqrt();
        }
    }
    sup
}

/// Mean over all grid points of the squared Euclidean distance between
/// corresponding points.
pub fn mse_fit_error(a: &SurfaceGrid, b: &SurfaceGrid) -> Result<f64> {
    if (a.m(), a.n()) != (b.m(), b.n()) {
        return Err(Error::InvalidArgument(format!(
            "grid sizes differ: {}x{} vs {}x{}",
            a.m(),
            a.n(),
            b.m(),
            b.n()
        )));
    }
    let sum: f64 = a
        .points()
        .iter()
        .zip(b.points())
        .map(|(p, q)| p.dist_sq(q))
        .sum();
    Ok(sum / (a.m() * a.n()) as f64)
}

/// Pointwise arithmetic mean of equally sized grids.
pub fn mean_shape<'a, I>(grids: I) -> Result<SurfaceGrid>
where
    I: IntoIterator<Item = &'a SurfaceGrid>,
{
    let mut it = grids.into_iter();
    let first = it
        .next()
        .ok_or_else(|| Error::InvalidArgument("mean of empty grid list".into()))?;
    let (m, n) = (first.m(), first.n());
    let mut acc: Vec<Point3> = first.points().to_vec();
    let mut count = 1usize;
    for g in it {
        if (g.m(), g.n()) != (m, n) {
            return Err(Error::InvalidArgument(
                "grids must share dimensions for averaging".into(),
            ));
        }
        for (a, p) in acc.iter_mut().zip(g.points()) {
            *a = *a + *p;
        }
        count += 1;
    }
    let inv = 1.0 / count as f64;
    for a in &mut acc {
        *a = *a * inv;
    }
    SurfaceGrid::new(m, n, acc)
}

/// Root-section chord landmarks: (leading edge, trailing edge).
///
/// The trailing edge is the (closed) endpoint pair of the section polyline;
/// the leading edge is the section point farthest from it, which equals the
/// minimum-x point once the section is de-rotated.
fn root_chord_landmarks(grid: &SurfaceGrid) -> Result<(Point3, Point3)> {
    let sec = grid.section(0);
    let first = sec[0];
    let last = sec[sec.len() - 1];
    let te = Point3::new(
        0.5 * (first.x + last.x),
        0.5 * (first.y + last.y),
        0.5 * (first.z + last.z),
    );
    let le = *sec
        .iter()
        .max_by(|a, b| {
            let da = sq2(a.x - te.x, a.z - te.z);
            let db = sq2(b.x - te.x, b.z - te.z);
            da.partial_cmp(&db).unwrap()
        })
        .unwrap();
    let chord = sq2(te.x - le.x, te.z - le.z).sqrt();
    if chord <= 1e-12 {
        return Err(Error::Degenerate("first section has zero chord".into()));
    }
    Ok((le, te))
}

fn sq2(a: f64, b: f64) -> f64 {
    a * a + b * b
}

/// Aligns a wing to the dataset convention:
/// first-section leading edge at the origin, first-section chord line along
/// (1, 0, 0) via a rotation about the +y axis, and the span scaled so that
/// `max y - min y = 1`.
pub fn align(grid: &SurfaceGrid) -> Result<SurfaceGrid> {
    let (le, te) = root_chord_landmarks(grid)?;
    // Chord angle in the x-z plane; rotating by its negative maps the chord
    // direction onto +x. Rotation about y leaves y untouched.
    let theta = (te.z - le.z).atan2(te.x - le.x);
    let (sin_t, cos_t) = theta.sin_cos();
    let mut pts = Vec::with_capacity(grid.points().len());
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for p in grid.points() {
        let dx = p.x - le.x;
        let dz = p.z - le.z;
        let y = p.y - le.y;
        pts.push(Point3::new(
            cos_t * dx + sin_t * dz,
            y,
            -sin_t * dx + cos_t * dz,
        ));
        y_min = y_min.min(y);
        y_max = y_max.max(y);
    }
    let span = y_max - y_min;
    if span <= 1e-12 {
        return Err(Error::Degenerate("wing has zero span".into()));
    }
    let scale = 1.0 / span;
    for p in &mut pts {
        p.y = (p.y - y_min) * scale;
    }
    SurfaceGrid::new(grid.m(), grid.n(), pts)
}

#[cfg(test)]
mod tests;
