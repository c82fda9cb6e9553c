//! The learned parameterization: a trained generator's latent space.

use super::{DesignSpace, Parameterization};
use crate::error::Result;
use crate::geometry::SurfaceGrid;
use crate::neural::tape::{grad, Tape};
use crate::neural::tensor::Tensor;
use crate::neural::train::{adam_step, AdamState};
use crate::neural::GeneratorNet;

/// Latent design space of a trained generator, each variable in [-1, 1].
pub struct GanParam {
    gen: GeneratorNet,
    space: DesignSpace,
    name: String,
}

impl GanParam {
    pub fn new(gen: GeneratorNet) -> Self {
        let space = DesignSpace::symmetric(gen.d_z(), 1.0).expect("d_z >= 1");
        let name = format!("ffd-gan-dz{}", gen.d_z());
        Self { gen, space, name }
    }

    pub fn generator(&self) -> &GeneratorNet {
        &self.gen
    }

    /// Gradient-based latent fit of `target`, minimizing the mean squared
    /// surface error through the generator.
    ///
    /// Runs `steps` Adam iterations from each restart point (clamping the
    /// latent into its bounds every step) and keeps the best. Returns the
    /// best latent and its achieved error.
    pub fn fit_latent(
        &self,
        target: &SurfaceGrid,
        restarts: &[Vec<f64>],
        steps: usize,
        lr: f64,
    ) -> Result<(Vec<f64>, f64)> {
        let layer = self.gen.full_layer();
        let target_row = Tensor::row(layer.grid_to_row(target)?);
        let n_points = (target.m() * target.n()) as f64;
        let mut best: Option<(Vec<f64>, f64)> = None;
        for start in restarts {
            self.space.check(start)?;
            let mut z = start.clone();
            let mut z_tensor = Tensor::row(z.clone());
            let mut adam = AdamState::like(&z_tensor);
            let mut local_best = (z.clone(), f64::INFINITY);
            for _ in 0..steps {
                let tape = Tape::new();
                let params = self.gen.mlp.leaf_params(&tape);
                let z_var = tape.leaf(z_tensor.clone());
                let delta = self.gen.mlp.forward_tape(&params, &z_var);
                let fake = layer.forward_tape(&tape, &delta);
                let t_leaf = tape.leaf(target_row.clone());
                let diff = fake.sub(&t_leaf);
                let mse = diff.mul(&diff).sum_all().scale(1.0 / n_points);
                let err = mse.item();
                if err < local_best.1 {
                    local_best = (z.clone(), err);
                }
                let g = grad(&mse, &[&z_var], false)?.remove(0);
                adam_step(&mut z_tensor, &g.value(), &mut adam, lr, 0.9, 0.999, 1e-8);
                for (zi, v) in z.iter_mut().zip(z_tensor.data_mut().iter_mut()) {
                    *v = v.clamp(-1.0, 1.0);
                    *zi = *v;
                }
            }
            // Score the final iterate too.
            let final_err = self.mse_at(&z, &target_row, n_points)?;
            if final_err < local_best.1 {
                local_best = (z, final_err);
            }
            if best.as_ref().is_none_or(|(_, e)| local_best.1 < *e) {
                best = Some(local_best);
            }
        }
        Ok(best.expect("at least one restart"))
    }

    fn mse_at(&self, z: &[f64], target_row: &Tensor, n_points: f64) -> Result<f64> {
        let layer = self.gen.full_layer();
        let planar = layer.forward_values(&self.gen.offsets_values(&Tensor::row(z.to_vec()))?);
        let err = planar
            .data()
            .iter()
            .zip(target_row.data())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            / n_points;
        Ok(err)
    }
}

impl Parameterization for GanParam {
    fn name(&self) -> &str {
        &self.name
    }

    fn space(&self) -> &DesignSpace {
        &self.space
    }

    fn decode(&self, z: &[f64]) -> Result<SurfaceGrid> {
        self.space.check(z)?;
        Ok(self.gen.decode(z)?.grid)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{mse_fit_error, Point3};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn test_base() -> SurfaceGrid {
        let sec = |c: f64, y: f64| {
            vec![
                Point3::new(c, y, 0.0),
                Point3::new(0.5 * c, y, 0.05 * c),
                Point3::new(0.0, y, 0.0),
                Point3::new(0.5 * c, y, -0.05 * c),
                Point3::new(c, y, 0.0),
            ]
        };
        let mut pts = sec(0.4, 0.0);
        pts.extend(sec(0.35, 0.4));
        pts.extend(sec(0.3, 0.7));
        pts.extend(sec(0.25, 1.0));
        SurfaceGrid::new(4, 5, pts).unwrap()
    }

    fn small_gan(d_z: usize) -> GanParam {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let gen = GeneratorNet::new(d_z, &[16], (2, 3, 2), test_base(), &mut rng).unwrap();
        GanParam::new(gen)
    }

    #[test]
    fn latent_dim_and_bounds() {
        let p = small_gan(15);
        assert_eq!(p.space().dim(), 15);
        assert_eq!(p.space().lower(), vec![-1.0; 15].as_slice());
        assert_eq!(p.space().upper(), vec![1.0; 15].as_slice());
    }

    #[test]
    fn decode_is_deterministic_and_bounded() {
        let p = small_gan(3);
        let z = [0.5, -0.5, 0.25];
        assert_eq!(p.decode(&z).unwrap(), p.decode(&z).unwrap());
        assert!(p.decode(&[1.5, 0.0, 0.0]).is_err());
    }

    #[test]
    fn latent_fit_recovers_representable_target() {
        let p = small_gan(2);
        let z0 = vec![0.4, -0.3];
        let target = p.decode(&z0).unwrap();
        let restarts = vec![vec![0.0, 0.0], vec![0.5, 0.5], vec![-0.5, 0.5]];
        let (z_fit, err) = p.fit_latent(&target, &restarts, 150, 0.05).unwrap();
        assert!(p.space().contains(&z_fit));
        let refit = p.decode(&z_fit).unwrap();
        let mse = mse_fit_error(&refit, &target).unwrap();
        assert!(mse <= 1e-4, "latent fit mse {mse} (reported {err})");
    }
}
