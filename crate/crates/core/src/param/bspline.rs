//! B-spline surface baseline.
//!
//! A bicubic tensor-product surface is fitted once to the mean shape by
//! linear least squares at a fixed parameter grid (v = span fraction,
//! u = mean normalized chordwise arc length). Each section's first and last
//! chordwise control points are tied so the airfoil stays closed at the
//! trailing edge. Design variables are the two sweep-angle deltas (moving
//! control x-coordinates by span times tangent, blended from leading-edge
//! to trailing-edge influence) followed by the z-offsets of the free
//! control points.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::{DesignSpace, Parameterization};
use crate::error::{Error, Result};
use crate::geometry::{Point3, SurfaceGrid};

/// Cox-de Boor basis value `N_{i,degree}(t)` over `knots`.
///
/// The parameter must lie inside the knot range; at the right end the last
/// basis function evaluates to one (clamped convention).
pub fn bspline_basis(i: usize, degree: usize, t: f64, knots: &[f64]) -> Result<f64> {
    if knots.len() < degree + 2 || i + degree + 1 >= knots.len() {
        return Err(Error::InvalidArgument(format!(
            "basis index {i} of degree {degree} needs {} knots, got {}",
            i + degree + 2,
            knots.len()
        )));
    }
    let (t_min, t_max) = (knots[0], knots[knots.len() - 1]);
    if !(t_min..=t_max).contains(&t) {
        return Err(Error::OutOfDomain(format!(
            "parameter {t} outside knot range [{t_min}, {t_max}]"
        )));
    }
    Ok(cox_de_boor(i, degree, t, knots))
}

fn cox_de_boor(i: usize, p: usize, t: f64, knots: &[f64]) -> f64 {
    if p == 0 {
        let hit = t >= knots[i] && t < knots[i + 1];
        // Close the last non-empty span at the right end.
        let at_end = t == knots[knots.len() - 1] && knots[i] < knots[i + 1] && {
            knots[i + 1..].iter().all(|&k| k == t)
        };
        return if hit || at_end { 1.0 } else { 0.0 };
    }
    let mut acc = 0.0;
    let d1 = knots[i + p] - knots[i];
    if d1 > 0.0 {
        acc += (t - knots[i]) / d1 * cox_de_boor(i, p - 1, t, knots);
    }
    let d2 = knots[i + p + 1] - knots[i + 1];
    if d2 > 0.0 {
        acc += (knots[i + p + 1] - t) / d2 * cox_de_boor(i + 1, p - 1, t, knots);
    }
    acc
}

/// Clamped knot vector on [0, 1] with uniform interior spacing.
pub fn clamped_uniform_knots(n_ctrl: usize, degree: usize) -> Vec<f64> {
    assert!(n_ctrl > degree, "need more control points than the degree");
    let spans = n_ctrl - degree;
    let mut knots = vec![0.0; degree + 1];
    for k in 1..spans {
        knots.push(k as f64 / spans as f64);
    }
    knots.extend(vec![1.0; degree + 1]);
    knots
}

/// Greville abscissae (knot averages) of a clamped knot vector.
fn greville(knots: &[f64], degree: usize, n_ctrl: usize) -> Vec<f64> {
    (0..n_ctrl)
        .map(|i| knots[i + 1..i + 1 + degree].iter().sum::<f64>() / degree as f64)
        .collect()
}

const DEGREE: usize = 3;

pub struct BsplineParam {
    name: String,
    /// Control rows along the span (`m'' + 1`).
    ctrl_span: usize,
    /// Control columns along the chord (`n'' + 1`, last tied to first).
    ctrl_chord: usize,
    /// Fitted base control net, row-major `[span][chord]`.
    net: Vec<Point3>,
    /// Chordwise basis at the fixed u parameters (`n x ctrl_chord`).
    bu: Vec<f64>,
    /// Spanwise basis at the fixed v parameters (`m x ctrl_span`).
    bv: Vec<f64>,
    u_params: Vec<f64>,
    v_params: Vec<f64>,
    /// Span fraction of each control row (Greville).
    row_span: Vec<f64>,
    /// Leading-to-trailing-edge influence of each control point in [0, 1],
    /// from the base net's x-extent per row.
    chord_influence: Vec<f64>,
    /// Cholesky factor of the tied normal equations, reused by fits.
    normal_chol: Cholesky<f64, Dyn>,
    /// Tied design matrix (`m*n x ctrl_span*(ctrl_chord-1)`).
    design: DMatrix<f64>,
    m: usize,
    n: usize,
    sweep_bound_deg: f64,
    z_bound: f64,
    space: DesignSpace,
}

impl BsplineParam {
    /// Fits the base surface with `ctrl_span x ctrl_chord` control points.
    ///
    /// The parameter assignment is fixed here once: v from section heights,
    /// u from the mean normalized chordwise arc length of the base shape.
    pub fn fit(
        base: &SurfaceGrid,
        ctrl_span: usize,
        ctrl_chord: usize,
        sweep_bound_deg: f64,
        z_bound: f64,
    ) -> Result<Self> {
        let (m, n) = (base.m(), base.n());
        let y0 = base.point(0, 0).y;
        let y1 = base.point(m - 1, 0).y;
        if y1 - y0 <= 0.0 {
            return Err(Error::Degenerate("base has zero span".into()));
        }
        let v_params: Vec<f64> = (0..m)
            .map(|s| ((base.point(s, 0).y - y0) / (y1 - y0)).clamp(0.0, 1.0))
            .collect();
        let mut u_params = vec![0.0; n];
        for s in 0..m {
            let sec = base.section(s);
            let mut acc = vec![0.0; n];
            for t in 1..n {
                acc[t] = acc[t - 1] + sec[t].dist(&sec[t - 1]);
            }
            let total = acc[n - 1];
            if total <= 0.0 {
                return Err(Error::Degenerate(format!("section {s} has zero length")));
            }
            for t in 0..n {
                u_params[t] += acc[t] / total;
            }
        }
        for u in u_params.iter_mut() {
            *u /= m as f64;
        }
        u_params[0] = 0.0;
        u_params[n - 1] = 1.0;
        Self::fit_with_params(
            base,
            u_params,
            v_params,
            ctrl_span,
            ctrl_chord,
            sweep_bound_deg,
            z_bound,
        )
    }

    /// Fit at an explicit parameter grid (shared by refits of surfaces that
    /// already live in this spline space).
    pub(crate) fn fit_with_params(
        base: &SurfaceGrid,
        u_params: Vec<f64>,
        v_params: Vec<f64>,
        ctrl_span: usize,
        ctrl_chord: usize,
        sweep_bound_deg: f64,
        z_bound: f64,
    ) -> Result<Self> {
        if ctrl_span <= DEGREE || ctrl_chord <= DEGREE + 1 {
            return Err(Error::InvalidArgument(format!(
                "need more than {} span and {} chord control points",
                DEGREE,
                DEGREE + 1
            )));
        }
        let (m, n) = (base.m(), base.n());
        if ctrl_span * ctrl_chord > m * n {
            return Err(Error::InvalidArgument(
                "control net larger than the data grid".into(),
            ));
        }
        if u_params.len() != n || v_params.len() != m {
            return Err(Error::InvalidArgument("parameter grid size mismatch".into()));
        }

        let knots_u = clamped_uniform_knots(ctrl_chord, DEGREE);
        let knots_v = clamped_uniform_knots(ctrl_span, DEGREE);
        let mut bu = vec![0.0; n * ctrl_chord];
        for t in 0..n {
            for b in 0..ctrl_chord {
                bu[t * ctrl_chord + b] = bspline_basis(b, DEGREE, u_params[t], &knots_u)?;
            }
        }
        let mut bv = vec![0.0; m * ctrl_span];
        for s in 0..m {
            for a in 0..ctrl_span {
                bv[s * ctrl_span + a] = bspline_basis(a, DEGREE, v_params[s], &knots_v)?;
            }
        }

        // Tied design matrix: the last chordwise column is folded into the
        // first, enforcing trailing-edge closure as an equality constraint.
        let free_chord = ctrl_chord - 1;
        let unknowns = ctrl_span * free_chord;
        let mut design = DMatrix::zeros(m * n, unknowns);
        for s in 0..m {
            for t in 0..n {
                let row = s * n + t;
                for a in 0..ctrl_span {
                    let bva = bv[s * ctrl_span + a];
                    if bva == 0.0 {
                        continue;
                    }
                    for b in 0..free_chord {
                        let mut val = bu[t * ctrl_chord + b];
                        if b == 0 {
                            val += bu[t * ctrl_chord + ctrl_chord - 1];
                        }
                        if val != 0.0 {
                            design[(row, a * free_chord + b)] = bva * val;
                        }
                    }
                }
            }
        }
        let normal = design.transpose() * &design;
        let normal_chol = normal
            .cholesky()
            .ok_or_else(|| Error::Fit("rank-deficient B-spline normal system".into()))?;

        let solve_coord = |get: fn(&Point3) -> f64| -> Vec<f64> {
            let rhs = design.transpose()
                * DVector::from_iterator(m * n, base.points().iter().map(get));
            normal_chol.solve(&rhs).iter().copied().collect()
        };
        let cx = solve_coord(|p| p.x);
        let cy = solve_coord(|p| p.y);
        let cz = solve_coord(|p| p.z);
        let mut net = vec![Point3::default(); ctrl_span * ctrl_chord];
        for a in 0..ctrl_span {
            for b in 0..ctrl_chord {
                let src = a * free_chord + if b == ctrl_chord - 1 { 0 } else { b };
                net[a * ctrl_chord + b] = Point3::new(cx[src], cy[src], cz[src]);
            }
        }

        let row_span = greville(&knots_v, DEGREE, ctrl_span);
        let mut chord_influence = vec![0.0; ctrl_span * ctrl_chord];
        for a in 0..ctrl_span {
            let xs: Vec<f64> = (0..ctrl_chord).map(|b| net[a * ctrl_chord + b].x).collect();
            let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let ext = (hi - lo).max(1e-9);
            for b in 0..ctrl_chord {
                chord_influence[a * ctrl_chord + b] = ((xs[b] - lo) / ext).clamp(0.0, 1.0);
            }
        }

        let dim = 2 + ctrl_span * free_chord;
        let mut lower = vec![-sweep_bound_deg; 2];
        let mut upper = vec![sweep_bound_deg; 2];
        lower.extend(vec![-z_bound; dim - 2]);
        upper.extend(vec![z_bound; dim - 2]);
        let space = DesignSpace::new(lower, upper)?;

        Ok(Self {
            name: format!("bspline-{ctrl_span}x{ctrl_chord}"),
            ctrl_span,
            ctrl_chord,
            net,
            bu,
            bv,
            u_params,
            v_params,
            row_span,
            chord_influence,
            normal_chol,
            design,
            m,
            n,
            sweep_bound_deg,
            z_bound,
            space,
        })
    }

    pub fn ctrl_counts(&self) -> (usize, usize) {
        (self.ctrl_span, self.ctrl_chord)
    }

    pub fn sweep_bound_deg(&self) -> f64 {
        self.sweep_bound_deg
    }

    pub fn z_bound(&self) -> f64 {
        self.z_bound
    }

    pub fn net(&self) -> &[Point3] {
        &self.net
    }

    /// Control net displaced by a design vector.
    fn displaced_net(&self, x: &[f64]) -> Vec<Point3> {
        let (le, te) = (x[0].to_radians().tan(), x[1].to_radians().tan());
        let free_chord = self.ctrl_chord - 1;
        let mut net = self.net.clone();
        for a in 0..self.ctrl_span {
            for b in 0..self.ctrl_chord {
                let idx = a * self.ctrl_chord + b;
                let f = self.chord_influence[idx];
                net[idx].x += self.row_span[a] * (le * (1.0 - f) + te * f);
                let zb = if b == self.ctrl_chord - 1 { 0 } else { b };
                net[idx].z += x[2 + a * free_chord + zb];
            }
        }
        net
    }

    fn evaluate_net(&self, net: &[Point3]) -> SurfaceGrid {
        let mut points = Vec::with_capacity(self.m * self.n);
        for s in 0..self.m {
            let bv_row = &self.bv[s * self.ctrl_span..(s + 1) * self.ctrl_span];
            for t in 0..self.n {
                let bu_row = &self.bu[t * self.ctrl_chord..(t + 1) * self.ctrl_chord];
                let mut acc = Point3::default();
                for (a, &wa) in bv_row.iter().enumerate() {
                    if wa == 0.0 {
                        continue;
                    }
                    for (b, &wb) in bu_row.iter().enumerate() {
                        if wb != 0.0 {
                            acc = acc + net[a * self.ctrl_chord + b] * (wa * wb);
                        }
                    }
                }
                points.push(acc);
            }
        }
        SurfaceGrid::new(self.m, self.n, points).expect("evaluated surface is well-formed")
    }

    /// Mean squared surface error of the base fit against `target`.
    pub fn base_fit_mse(&self, target: &SurfaceGrid) -> Result<f64> {
        crate::geometry::mse_fit_error(&self.evaluate_net(&self.net), target)
    }

    /// Bounded least-squares fit of the z-offsets for a fixed sweep pair,
    /// reusing the fitting normal equations (clip + one active-set pass).
    pub(crate) fn fit_z_offsets(&self, target: &SurfaceGrid, sweeps: (f64, f64)) -> Vec<f64> {
        let free_chord = self.ctrl_chord - 1;
        let unknowns = self.ctrl_span * free_chord;
        // Residual against the sweep-displaced base surface.
        let mut x0 = vec![0.0; self.space.dim()];
        x0[0] = sweeps.0;
        x0[1] = sweeps.1;
        let swept = self.evaluate_net(&self.displaced_net(&x0));
        let rhs_vec = DVector::from_iterator(
            self.m * self.n,
            target
                .points()
                .iter()
                .zip(swept.points())
                .map(|(t, b)| t.z - b.z),
        );
        let mut sol: Vec<f64> = self
            .normal_chol
            .solve(&(self.design.transpose() * &rhs_vec))
            .iter()
            .copied()
            .collect();
        let clipped: Vec<usize> = (0..unknowns)
            .filter(|&i| sol[i].abs() > self.z_bound)
            .collect();
        for v in sol.iter_mut() {
            *v = v.clamp(-self.z_bound, self.z_bound);
        }
        if !clipped.is_empty() && clipped.len() < unknowns {
            let free: Vec<usize> = (0..unknowns).filter(|i| !clipped.contains(i)).collect();
            let mut r_adj = rhs_vec;
            for &i in &clipped {
                r_adj -= self.design.column(i) * sol[i];
            }
            let sub = DMatrix::from_fn(free.len(), free.len(), |p, q| {
                self.design.column(free[p]).dot(&self.design.column(free[q]))
            });
            let sub_rhs =
                DVector::from_iterator(free.len(), free.iter().map(|&i| self.design.column(i).dot(&r_adj)));
            if let Some(chol) = sub.cholesky() {
                let s = chol.solve(&sub_rhs);
                for (k, &i) in free.iter().enumerate() {
                    sol[i] = s[k].clamp(-self.z_bound, self.z_bound);
                }
            }
        }
        sol
    }
}

impl Parameterization for BsplineParam {
    fn name(&self) -> &str {
        &self.name
    }

    fn space(&self) -> &DesignSpace {
        &self.space
    }

    fn decode(&self, x: &[f64]) -> Result<SurfaceGrid> {
        self.space.check(x)?;
        Ok(self.evaluate_net(&self.displaced_net(x)))
    }
}
