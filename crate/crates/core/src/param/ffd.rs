//! FFD baseline: bounded control-point offsets around the mean shape.

use nalgebra::{DMatrix, DVector};

use super::{DesignSpace, Parameterization};
use crate::error::{Error, Result};
use crate::geometry::{
    base_lattice, ffd_basis_matrix, ffd_box, ffd_deform, param_coords, ControlLattice,
    ParamCoords, Point3, SurfaceGrid,
};

/// Design variables are `[dx (ncp) | dz (ncp)]` control-point offsets in
/// lattice index order; y offsets are fixed at zero. The decoded surface is
/// the base shape deformed through the shared inflated bounding box.
pub struct FfdParam {
    name: String,
    base: SurfaceGrid,
    lattice: ControlLattice,
    coords: ParamCoords,
    /// Dense `points x ncp` Bernstein basis (shared by fit and tests).
    basis: Vec<f64>,
    counts: (usize, usize, usize),
    bound: f64,
    space: DesignSpace,
}

impl FfdParam {
    /// `counts` are control points per axis, e.g. `(3, 4, 2)`; offsets are
    /// bounded in `[-bound, bound]`.
    pub fn new(base: SurfaceGrid, counts: (usize, usize, usize), bound: f64) -> Result<Self> {
        let (px, py, pz) = counts;
        if px < 2 || py < 2 || pz < 2 {
            return Err(Error::InvalidArgument(
                "need at least two control points per axis".into(),
            ));
        }
        if bound <= 0.0 {
            return Err(Error::InvalidArgument("bound must be positive".into()));
        }
        let bounds = ffd_box(&base)?;
        let lattice = base_lattice(&bounds, px - 1, py - 1, pz - 1)?;
        let coords = param_coords(&base, &bounds)?;
        let basis = ffd_basis_matrix(&lattice, &coords);
        let dim = 2 * lattice.point_count();
        let space = DesignSpace::symmetric(dim, bound)?;
        Ok(Self {
            name: format!("ffd-{px}x{py}x{pz}"),
            base,
            lattice,
            coords,
            basis,
            counts,
            bound,
            space,
        })
    }

    pub fn ncp(&self) -> usize {
        self.lattice.point_count()
    }

    pub fn counts(&self) -> (usize, usize, usize) {
        self.counts
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn base(&self) -> &SurfaceGrid {
        &self.base
    }

    fn delta_from_x(&self, x: &[f64]) -> Vec<Point3> {
        let ncp = self.ncp();
        (0..ncp)
            .map(|i| Point3::new(x[i], 0.0, x[ncp + i]))
            .collect()
    }

    /// Box-constrained least squares fit of `target`.
    ///
    /// The x and z problems are independent: each is solved unconstrained
    /// through the normal equations, clipped to the bounds, then re-solved
    /// once on the inactive set and clipped again.
    pub fn fit_least_squares(&self, target: &SurfaceGrid) -> Result<Vec<f64>> {
        if (target.m(), target.n()) != (self.base.m(), self.base.n()) {
            return Err(Error::InvalidArgument(
                "target resolution must match the base shape".into(),
            ));
        }
        let ncp = self.ncp();
        let npts = self.base.points().len();
        let basis = DMatrix::from_row_slice(npts, ncp, &self.basis);
        let normal = basis.transpose() * &basis;

        let embedded = self.decode(&vec![0.0; self.space.dim()])?;
        let residual = |axis: fn(&Point3) -> f64| -> DVector<f64> {
            DVector::from_iterator(
                npts,
                target
                    .points()
                    .iter()
                    .zip(embedded.points())
                    .map(|(t, b)| axis(t) - axis(b)),
            )
        };

        let solve_axis = |r: &DVector<f64>| -> Result<Vec<f64>> {
            let rhs = basis.transpose() * r;
            let chol = normal
                .clone()
                .cholesky()
                .ok_or_else(|| Error::Fit("FFD normal equations not positive definite".into()))?;
            let mut delta: Vec<f64> = chol.solve(&rhs).iter().copied().collect();
            let clipped: Vec<usize> = (0..ncp)
                .filter(|&i| delta[i].abs() > self.bound)
                .collect();
            for d in delta.iter_mut() {
                *d = d.clamp(-self.bound, self.bound);
            }
            if !clipped.is_empty() && clipped.len() < ncp {
                // One active-set pass: freeze clipped offsets at their
                // bounds, re-solve the free coordinates.
                let free: Vec<usize> = (0..ncp).filter(|i| !clipped.contains(i)).collect();
                let mut r_adj = r.clone();
                for &i in &clipped {
                    let col = basis.column(i);
                    r_adj -= col * delta[i];
                }
                let sub = DMatrix::from_fn(free.len(), free.len(), |a, b| {
                    normal[(free[a], free[b])]
                });
                let sub_b = DMatrix::from_fn(npts, free.len(), |p, a| basis[(p, free[a])]);
                let sub_rhs = sub_b.transpose() * r_adj;
                if let Some(chol) = sub.cholesky() {
                    let sol = chol.solve(&sub_rhs);
                    for (a, &i) in free.iter().enumerate() {
                        delta[i] = sol[a].clamp(-self.bound, self.bound);
                    }
                }
            }
            Ok(delta)
        };

        let dx = solve_axis(&residual(|p| p.x))?;
        let dz = solve_axis(&residual(|p| p.z))?;
        let mut x = dx;
        x.extend(dz);
        Ok(x)
    }
}

impl Parameterization for FfdParam {
    fn name(&self) -> &str {
        &self.name
    }

    fn space(&self) -> &DesignSpace {
        &self.space
    }

    fn decode(&self, x: &[f64]) -> Result<SurfaceGrid> {
        self.space.check(x)?;
        ffd_deform(&self.lattice, &self.delta_from_x(x), &self.coords)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::mse_fit_error;
    use crate::grammar::{generate_dataset, GrammarConfig};
    use crate::geometry::mean_shape;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn small_base() -> SurfaceGrid {
        let cfg = GrammarConfig {
            grid_sections: 9,
            grid_points: 65,
            ..GrammarConfig::default()
        };
        let ds = generate_dataset(&cfg, 16, 2).unwrap();
        mean_shape(ds.grids.iter()).unwrap()
    }

    #[test]
    fn paper_dims() {
        let p = FfdParam::new(small_base(), (3, 4, 2), 0.1).unwrap();
        assert_eq!(p.space().dim(), 48);
        assert_eq!(p.space().upper(), vec![0.1; 48].as_slice());
        assert_eq!(p.name(), "ffd-3x4x2");
    }

    #[test]
    fn zero_vector_decodes_to_base() {
        let base = small_base();
        let p = FfdParam::new(base.clone(), (3, 4, 2), 0.1).unwrap();
        let out = p.decode(&vec![0.0; 48]).unwrap();
        assert!(out.max_abs_diff(&base) <= 1e-10);
    }

    #[test]
    fn rejects_out_of_bounds() {
        let p = FfdParam::new(small_base(), (2, 3, 2), 0.1).unwrap();
        let mut x = vec![0.0; p.space().dim()];
        x[3] = 0.11;
        assert!(matches!(p.decode(&x), Err(Error::OutOfBounds(_))));
    }

    #[test]
    fn decode_is_affine_in_x() {
        let p = FfdParam::new(small_base(), (2, 3, 2), 0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let dim = p.space().dim();
        let rand_x = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            (0..dim).map(|_| rng.random_range(-0.05..0.05)).collect()
        };
        let (a, b) = (rand_x(&mut rng), rand_x(&mut rng));
        let combo: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.5 * x + 0.5 * y).collect();
        let base = p.decode(&vec![0.0; dim]).unwrap();
        let (da, db, dc) = (
            p.decode(&a).unwrap(),
            p.decode(&b).unwrap(),
            p.decode(&combo).unwrap(),
        );
        for i in 0..base.points().len() {
            let lhs = dc.points()[i] - base.points()[i];
            let rhs = (da.points()[i] - base.points()[i]) * 0.5
                + (db.points()[i] - base.points()[i]) * 0.5;
            assert!((lhs.x - rhs.x).abs() <= 1e-10);
            assert!((lhs.z - rhs.z).abs() <= 1e-10);
        }
    }

    #[test]
    fn fit_recovers_representable_target() {
        let p = FfdParam::new(small_base(), (2, 3, 2), 0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x0: Vec<f64> = (0..p.space().dim())
            .map(|_| rng.random_range(-0.08..0.08))
            .collect();
        let target = p.decode(&x0).unwrap();
        let x_fit = p.fit_least_squares(&target).unwrap();
        let fitted = p.decode(&x_fit).unwrap();
        assert!(mse_fit_error(&fitted, &target).unwrap() < 1e-10);
    }

    #[test]
    fn fit_never_leaves_bounds() {
        let base = small_base();
        let p = FfdParam::new(base.clone(), (2, 3, 2), 0.02).unwrap();
        // A target needing larger offsets than the bounds allow.
        let stretched = SurfaceGrid::new(
            base.m(),
            base.n(),
            base.points()
                .iter()
                .map(|q| Point3::new(q.x + 0.1, q.y, q.z))
                .collect(),
        )
        .unwrap();
        let x = p.fit_least_squares(&stretched).unwrap();
        assert!(p.space().contains(&x));
    }
}
