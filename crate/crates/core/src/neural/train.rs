//! WGAN-GP training of the generator.
//!
//! Per generator iteration the critic takes `critic_iters` update steps on
//!
//! `loss_D = mean D(fake) - mean D(real) + gamma1 * R1`
//!
//! with `R1` the gradient penalty on interpolates
//! `Xhat = eps * X_real + (1 - eps) * X_fake`, then the generator takes one
//! step on
//!
//! `loss_G = -mean D(fake) + gamma2 * R2`
//!
//! where `R2` is the mean squared control-point offset over the batch and
//! lattice. Optimization is Adam. The loop itself is single-threaded over
//! the tape; the tensor kernels inside parallelize over rows, which keeps
//! two runs with the same seed bit-identical.

use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::checkpoint::save_generator;
use super::net::{DiscriminatorNet, FfdLayer, GeneratorNet, Mlp, MlpVars};
use super::tape::{grad, Tape, Var};
use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::geometry::{mean_shape, SurfaceGrid};

/// Hyperparameters for one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Latent dimension.
    pub d_z: usize,
    /// Generator hidden widths.
    pub g_widths: Vec<usize>,
    /// Critic hidden widths.
    pub d_widths: Vec<usize>,
    /// Control points per axis for the FFD layer.
    pub lattice: (usize, usize, usize),
    /// Keep every `stride`-th point per section for the critic input.
    pub stride: usize,
    /// Adam learning rate for both networks.
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    /// Critic steps per generator step.
    pub critic_iters: usize,
    /// Batch size.
    pub batch: usize,
    /// Generator iterations.
    pub gen_iters: usize,
    /// Gradient-penalty weight.
    pub gamma1: f64,
    /// Offset-regularizer weight.
    pub gamma2: f64,
    pub seed: u64,
    /// Checkpoint interval in generator iterations (0 disables).
    pub checkpoint_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            d_z: 15,
            g_widths: vec![256, 256],
            d_widths: vec![512, 256],
            lattice: (4, 8, 2),
            stride: 1,
            lr: 2e-4,
            beta1: 0.5,
            beta2: 0.9,
            critic_iters: 5,
            batch: 64,
            gen_iters: 10_000,
            gamma1: 10.0,
            gamma2: 1.0,
            seed: 0,
            checkpoint_every: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d_z == 0
            || self.batch == 0
            || self.critic_iters == 0
            || self.gen_iters == 0
            || self.stride == 0
        {
            return Err(Error::InvalidArgument(
                "d_z, batch, critic_iters, gen_iters and stride must be positive".into(),
            ));
        }
        if self.lr <= 0.0 || self.gamma1 < 0.0 || self.gamma2 < 0.0 {
            return Err(Error::InvalidArgument(
                "learning rate must be positive and penalty weights non-negative".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(Error::InvalidArgument("betas must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

/// Adam first/second-moment state for one parameter tensor.
#[derive(Debug, Clone)]
pub struct AdamState {
    m: Tensor,
    v: Tensor,
    t: u64,
}

impl AdamState {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            m: Tensor::zeros(rows, cols),
            v: Tensor::zeros(rows, cols),
            t: 0,
        }
    }

    pub fn like(t: &Tensor) -> Self {
        Self::new(t.rows(), t.cols())
    }
}

/// One bias-corrected Adam update in place.
pub fn adam_step(
    param: &mut Tensor,
    gradient: &Tensor,
    state: &mut AdamState,
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
) {
    assert_eq!(param.shape(), gradient.shape(), "adam shape mismatch");
    assert_eq!(param.shape(), state.m.shape(), "adam state mismatch");
    state.t += 1;
    let bc1 = 1.0 - beta1.powi(state.t as i32);
    let bc2 = 1.0 - beta2.powi(state.t as i32);
    for i in 0..param.len() {
        let g = gradient.data()[i];
        let m = beta1 * state.m.data()[i] + (1.0 - beta1) * g;
        let v = beta2 * state.v.data()[i] + (1.0 - beta2) * g * g;
        state.m.data_mut()[i] = m;
        state.v.data_mut()[i] = v;
        let m_hat = m / bc1;
        let v_hat = v / bc2;
        param.data_mut()[i] -= lr * m_hat / (v_hat.sqrt() + eps);
    }
}

const ADAM_EPS: f64 = 1e-8;
/// Keeps the penalty's norm differentiable at exactly zero gradients.
const NORM_GUARD: f64 = 1e-12;

/// Per-generator-iteration training record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterStats {
    pub iter: usize,
    /// Wasserstein estimate `mean D(real) - mean D(fake)` at the last
    /// critic step.
    pub wasserstein: f64,
    pub r1: f64,
    pub r2: f64,
    pub loss_d: f64,
    pub loss_g: f64,
}

struct CriticLossParts {
    loss: Var,
    wasserstein: f64,
    r1: f64,
}

/// Critic loss graph on `tape` for fixed real/fake/interpolated batches.
fn critic_loss_graph(
    tape: &Tape,
    d: &DiscriminatorNet,
    d_vars: &MlpVars,
    real: Tensor,
    fake: Tensor,
    xhat: Tensor,
    gamma1: f64,
) -> Result<CriticLossParts> {
    let real_v = tape.leaf(real);
    let fake_v = tape.leaf(fake);
    let xhat_v = tape.leaf(xhat);
    let d_real = d.mlp.forward_tape(d_vars, &real_v);
    let d_fake = d.mlp.forward_tape(d_vars, &fake_v);
    let d_hat = d.mlp.forward_tape(d_vars, &xhat_v);

    // Gradient of the summed critic output w.r.t. the interpolates; kept on
    // the graph so the penalty reaches the critic parameters.
    let s = d_hat.sum_all();
    let gx = grad(&s, &[&xhat_v], true)?.remove(0);
    let norm = gx
        .mul(&gx)
        .row_sums()
        .add_scalar(NORM_GUARD)
        .sqrt_el();
    let r1 = norm.add_scalar(-1.0);
    let r1 = r1.mul(&r1).mean_all();

    let mean_fake = d_fake.mean_all();
    let mean_real = d_real.mean_all();
    let loss = mean_fake.sub(&mean_real).add(&r1.scale(gamma1));
    let wasserstein = mean_real.item() - mean_fake.item();
    let r1_val = r1.item();
    Ok(CriticLossParts {
        loss,
        wasserstein,
        r1: r1_val,
    })
}

struct GenLossParts {
    loss: Var,
    r2: f64,
}

/// Generator loss graph on `tape`: the z batch flows through the dense
/// stack, the FFD layer and the critic.
fn gen_loss_graph(
    tape: &Tape,
    g: &GeneratorNet,
    g_vars: &MlpVars,
    d: &DiscriminatorNet,
    d_vars: &MlpVars,
    layer: &FfdLayer,
    z: Tensor,
    gamma2: f64,
) -> GenLossParts {
    let ncp = layer.ncp();
    let batch = z.rows();
    let z_v = tape.leaf(z);
    let delta = g.mlp.forward_tape(g_vars, &z_v);
    let fake = layer.forward_tape(tape, &delta);
    let d_fake = d.mlp.forward_tape(d_vars, &fake);
    // Eq-style mean over batch and lattice points (the zero y-channel
    // contributes nothing, so summing the x/z blocks is the full norm).
    let r2 = delta
        .mul(&delta)
        .sum_all()
        .scale(1.0 / (batch * ncp) as f64);
    let loss = d_fake.mean_all().neg().add(&r2.scale(gamma2));
    let r2_val = r2.item();
    GenLossParts { loss, r2: r2_val }
}

/// Both WGAN-GP losses for one batch, without touching any parameters.
///
/// `eps` holds one interpolation coefficient in [0, 1] per sample. The fake
/// batch is decoded from `z` through the generator at the critic's input
/// resolution (`stride`).
pub fn wgan_gp_losses(
    g: &GeneratorNet,
    d: &DiscriminatorNet,
    real: &Tensor,
    z: &Tensor,
    eps: &[f64],
    stride: usize,
    gamma1: f64,
    gamma2: f64,
) -> Result<(f64, f64)> {
    let batch = real.rows();
    if z.rows() != batch || eps.len() != batch {
        return Err(Error::InvalidArgument(
            "real, z and eps batches must have equal size".into(),
        ));
    }
    if eps.iter().any(|e| !(0.0..=1.0).contains(e)) {
        return Err(Error::InvalidArgument("eps must lie in [0, 1]".into()));
    }
    let layer = g.subsampled_layer(stride)?;
    if layer.output_dim() != real.cols() || d.input_dim() != real.cols() {
        return Err(Error::InvalidArgument(
            "real batch width does not match the critic input".into(),
        ));
    }
    let fake = layer.forward_values(&g.offsets_values(z)?);
    let xhat = interpolate_rows(real, &fake, eps);

    let tape = Tape::new();
    let d_vars = d.mlp.leaf_params(&tape);
    let critic = critic_loss_graph(&tape, d, &d_vars, real.clone(), fake, xhat, gamma1)?;
    let loss_d = critic.loss.item();

    let tape = Tape::new();
    let g_vars = g.mlp.leaf_params(&tape);
    let d_vars = d.mlp.leaf_params(&tape);
    let gen = gen_loss_graph(&tape, g, &g_vars, d, &d_vars, &layer, z.clone(), gamma2);
    let loss_g = gen.loss.item();
    if !(loss_d.is_finite() && loss_g.is_finite()) {
        return Err(Error::Numeric("non-finite WGAN-GP loss".into()));
    }
    Ok((loss_d, loss_g))
}

fn interpolate_rows(real: &Tensor, fake: &Tensor, eps: &[f64]) -> Tensor {
    assert_eq!(real.shape(), fake.shape());
    let mut out = real.clone();
    let cols = out.cols();
    for (r, row) in out.data_mut().chunks_mut(cols).enumerate() {
        let e = eps[r];
        for (c, v) in row.iter_mut().enumerate() {
            *v = e * *v + (1.0 - e) * fake.get(r, c);
        }
    }
    out
}

fn uniform_tensor(rng: &mut impl Rng, rows: usize, cols: usize, lo: f64, hi: f64) -> Tensor {
    Tensor::from_vec(
        rows,
        cols,
        (0..rows * cols).map(|_| rng.random_range(lo..hi)).collect(),
    )
}

fn apply_grads(
    mlp: &mut Mlp,
    grads: &[Var],
    states: &mut [AdamState],
    cfg: &TrainConfig,
) {
    for ((param, state), g) in mlp.params_mut().into_iter().zip(states).zip(grads) {
        adam_step(
            param,
            &g.value(),
            state,
            cfg.lr,
            cfg.beta1,
            cfg.beta2,
            ADAM_EPS,
        );
    }
}

/// Trains a generator on aligned wings.
///
/// Checkpoints land under `ckpt_dir` as `ckpt_<iter>` every
/// `checkpoint_every` iterations, plus `ckpt_final`; on divergence the last
/// state is saved as `ckpt_diverged` before the error returns.
pub fn train(
    wings: &[&SurfaceGrid],
    cfg: &TrainConfig,
    ckpt_dir: Option<&Path>,
) -> Result<(GeneratorNet, Vec<IterStats>)> {
    cfg.validate()?;
    if wings.len() < 2 {
        return Err(Error::InvalidArgument(
            "training needs at least two wings".into(),
        ));
    }
    let base = mean_shape(wings.iter().copied())?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut gen = GeneratorNet::new(cfg.d_z, &cfg.g_widths, cfg.lattice, base, &mut rng)?;
    let layer = gen.subsampled_layer(cfg.stride)?;
    let input_dim = layer.output_dim();
    let mut disc = DiscriminatorNet::new(input_dim, &cfg.d_widths, &mut rng);

    // Planar real samples at the critic resolution.
    let reals: Vec<Vec<f64>> = wings
        .iter()
        .map(|w| layer.grid_to_row(w))
        .collect::<Result<_>>()?;

    let mut g_states: Vec<AdamState> = gen.mlp.params().iter().map(|t| AdamState::like(t)).collect();
    let mut d_states: Vec<AdamState> = disc.mlp.params().iter().map(|t| AdamState::like(t)).collect();

    let sample_real = |rng: &mut ChaCha8Rng| -> Tensor {
        let mut data = Vec::with_capacity(cfg.batch * input_dim);
        for _ in 0..cfg.batch {
            let idx = rng.random_range(0..reals.len());
            data.extend_from_slice(&reals[idx]);
        }
        Tensor::from_vec(cfg.batch, input_dim, data)
    };

    let mut history = Vec::with_capacity(cfg.gen_iters);
    for iter in 1..=cfg.gen_iters {
        let mut wasserstein = 0.0;
        let mut r1 = 0.0;
        let mut loss_d = 0.0;
        for _ in 0..cfg.critic_iters {
            let real = sample_real(&mut rng);
            let z = uniform_tensor(&mut rng, cfg.batch, cfg.d_z, -1.0, 1.0);
            let eps: Vec<f64> = (0..cfg.batch).map(|_| rng.random_range(0.0..1.0)).collect();
            let fake = layer.forward_values(&gen.offsets_values(&z)?);
            let xhat = interpolate_rows(&real, &fake, &eps);

            let tape = Tape::new();
            let d_vars = disc.mlp.leaf_params(&tape);
            let parts = critic_loss_graph(&tape, &disc, &d_vars, real, fake, xhat, cfg.gamma1)?;
            loss_d = parts.loss.item();
            wasserstein = parts.wasserstein;
            r1 = parts.r1;
            if !loss_d.is_finite() {
                return diverged(&gen, iter, ckpt_dir);
            }
            let grads = grad(&parts.loss, &d_vars.all(), false)?;
            apply_grads(&mut disc.mlp, &grads, &mut d_states, cfg);
        }

        let z = uniform_tensor(&mut rng, cfg.batch, cfg.d_z, -1.0, 1.0);
        let tape = Tape::new();
        let g_vars = gen.mlp.leaf_params(&tape);
        let d_vars = disc.mlp.leaf_params(&tape);
        let parts = gen_loss_graph(&tape, &gen, &g_vars, &disc, &d_vars, &layer, z, cfg.gamma2);
        let loss_g = parts.loss.item();
        if !loss_g.is_finite() {
            return diverged(&gen, iter, ckpt_dir);
        }
        let grads = grad(&parts.loss, &g_vars.all(), false)?;
        apply_grads(&mut gen.mlp, &grads, &mut g_states, cfg);

        history.push(IterStats {
            iter,
            wasserstein,
            r1,
            r2: parts.r2,
            loss_d,
            loss_g,
        });

        if let Some(dir) = ckpt_dir {
            if cfg.checkpoint_every > 0 && iter % cfg.checkpoint_every == 0 {
                save_generator(&gen, iter, &dir.join(format!("ckpt_{iter}")))?;
            }
        }
    }
    if let Some(dir) = ckpt_dir {
        save_generator(&gen, cfg.gen_iters, &dir.join("ckpt_final"))?;
    }
    Ok((gen, history))
}

fn diverged(
    gen: &GeneratorNet,
    iter: usize,
    ckpt_dir: Option<&Path>,
) -> Result<(GeneratorNet, Vec<IterStats>)> {
    if let Some(dir) = ckpt_dir {
        save_generator(gen, iter, &dir.join("ckpt_diverged"))?;
    }
    Err(Error::Numeric(format!(
        "training diverged at iteration {iter}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point3;
    use crate::grammar::{generate_dataset, GrammarConfig};

    fn approx(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} != {b} (tol {tol})");
    }

    #[test]
    fn adam_zero_gradient_keeps_params() {
        let mut p = Tensor::from_vec(1, 3, vec![1.0, -2.0, 3.0]);
        let g = Tensor::zeros(1, 3);
        let mut st = AdamState::like(&p);
        adam_step(&mut p, &g, &mut st, 0.1, 0.9, 0.999, 1e-8);
        assert_eq!(p.data(), &[1.0, -2.0, 3.0]);
    }

    #[test]
    fn adam_first_step_is_bias_corrected_sign_step() {
        // After bias correction the first update is lr * g / (|g| + eps).
        let mut p = Tensor::from_vec(1, 2, vec![0.5, -0.5]);
        let g = Tensor::from_vec(1, 2, vec![0.2, -3.0]);
        let mut st = AdamState::like(&p);
        let lr = 0.01;
        adam_step(&mut p, &g, &mut st, lr, 0.9, 0.999, 1e-8);
        approx(p.data()[0], 0.5 - lr * (0.2 / (0.2 + 1e-8)), 1e-12);
        approx(p.data()[1], -0.5 + lr * (3.0 / (3.0 + 1e-8)), 1e-12);
    }

    #[test]
    fn adam_is_deterministic() {
        let run = || {
            let mut p = Tensor::from_vec(2, 2, vec![0.1, 0.2, 0.3, 0.4]);
            let mut st = AdamState::like(&p);
            for k in 1..=5 {
                let g = Tensor::from_vec(2, 2, vec![0.1 * k as f64; 4]);
                adam_step(&mut p, &g, &mut st, 0.05, 0.5, 0.9, 1e-8);
            }
            p
        };
        assert_eq!(run(), run());
    }

    fn toy_base() -> SurfaceGrid {
        let sec = |c: f64, y: f64| {
            vec![
                Point3::new(c, y, 0.0),
                Point3::new(0.5 * c, y, 0.05),
                Point3::new(0.0, y, 0.0),
                Point3::new(0.5 * c, y, -0.05),
            ]
        };
        let mut pts = sec(0.4, 0.0);
        pts.extend(sec(0.3, 1.0));
        SurfaceGrid::new(2, 4, pts).unwrap()
    }

    fn toy_nets() -> (GeneratorNet, DiscriminatorNet) {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let gen = GeneratorNet::new(1, &[], (2, 2, 2), toy_base(), &mut rng).unwrap();
        let disc = DiscriminatorNet::new(24, &[], &mut rng);
        (gen, disc)
    }

    #[test]
    fn unit_norm_linear_critic_has_zero_penalty() {
        let (gen, mut disc) = toy_nets();
        // D(x) = x[0]: input gradient is e0, norm exactly 1.
        let mut w = Tensor::zeros(24, 1);
        w.set(0, 0, 1.0);
        disc.mlp.layers[0].w = w;
        disc.mlp.layers[0].b = Tensor::zeros(1, 1);

        let layer = gen.subsampled_layer(1).unwrap();
        let real = Tensor::from_vec(2, 24, (0..48).map(|i| i as f64 * 0.01).collect());
        let z = Tensor::from_vec(2, 1, vec![0.3, -0.6]);
        let eps = [0.25, 0.75];
        let fake = layer.forward_values(&gen.offsets_values(&z).unwrap());

        let tape = Tape::new();
        let d_vars = disc.mlp.leaf_params(&tape);
        let xhat = interpolate_rows(&real, &fake, &eps);
        let parts =
            critic_loss_graph(&tape, &disc, &d_vars, real, fake, xhat, 10.0).unwrap();
        approx(parts.r1, 0.0, 1e-12);
    }

    #[test]
    fn zero_offsets_give_zero_regularizer() {
        let (mut gen, disc) = toy_nets();
        gen.mlp.layers[0].w = Tensor::zeros(1, 16);
        gen.mlp.layers[0].b = Tensor::zeros(1, 16);
        let layer = gen.subsampled_layer(1).unwrap();
        let z = Tensor::from_vec(2, 1, vec![0.5, -0.5]);
        let tape = Tape::new();
        let g_vars = gen.mlp.leaf_params(&tape);
        let d_vars = disc.mlp.leaf_params(&tape);
        let parts = gen_loss_graph(&tape, &gen, &g_vars, &disc, &d_vars, &layer, z, 1.0);
        assert_eq!(parts.r2, 0.0);
    }

    #[test]
    fn losses_match_hand_computation() {
        // Spreadsheet-style oracle on a 2-sample batch with a linear critic
        // and a linear generator over a 2x2x2 lattice.
        let (gen, mut disc) = toy_nets();
        let dw: Vec<f64> = (0..24).map(|i| 0.05 * (i as f64 - 11.5)).collect();
        disc.mlp.layers[0].w = Tensor::from_vec(24, 1, dw.clone());
        disc.mlp.layers[0].b = Tensor::from_vec(1, 1, vec![0.3]);

        let real = Tensor::from_vec(2, 24, (0..48).map(|i| (i as f64 * 0.37).sin() * 0.2).collect());
        let z = Tensor::from_vec(2, 1, vec![0.4, -0.8]);
        let eps = [0.2, 0.9];
        let (gamma1, gamma2) = (10.0, 1.0);

        let (loss_d, loss_g) =
            wgan_gp_losses(&gen, &disc, &real, &z, &eps, 1, gamma1, gamma2).unwrap();

        // Oracle: plain scalar evaluation of the objective pieces.
        let layer = gen.subsampled_layer(1).unwrap();
        let delta = gen.offsets_values(&z).unwrap();
        let fake = layer.forward_values(&delta);
        let d_of = |row: &[f64]| -> f64 {
            row.iter().zip(&dw).map(|(x, w)| x * w).sum::<f64>() + 0.3
        };
        let mean_fake = (d_of(fake.row_slice(0)) + d_of(fake.row_slice(1))) / 2.0;
        let mean_real = (d_of(real.row_slice(0)) + d_of(real.row_slice(1))) / 2.0;
        // Linear critic: the input gradient is w for every interpolate.
        let wnorm = dw.iter().map(|v| v * v).sum::<f64>().sqrt();
        let r1 = (wnorm - 1.0) * (wnorm - 1.0);
        let expect_d = mean_fake - mean_real + gamma1 * r1;
        // Eq-style mean over batch and lattice points (ncp = 8).
        let r2 = delta.data().iter().map(|v| v * v).sum::<f64>() / (2.0 * 8.0) ;
        let expect_g = -mean_fake + gamma2 * r2;

        approx(loss_d, expect_d, 1e-9);
        approx(loss_g, expect_g, 1e-9);
    }

    #[test]
    fn losses_are_batch_permutation_invariant() {
        let (gen, disc) = toy_nets();
        let real = Tensor::from_vec(2, 24, (0..48).map(|i| (i as f64 * 0.11).cos() * 0.3).collect());
        let z = Tensor::from_vec(2, 1, vec![0.7, -0.2]);
        let eps = [0.4, 0.6];
        let (d1, g1) = wgan_gp_losses(&gen, &disc, &real, &z, &eps, 1, 10.0, 1.0).unwrap();

        let swap_rows = |t: &Tensor| {
            let mut data = t.row_slice(1).to_vec();
            data.extend_from_slice(t.row_slice(0));
            Tensor::from_vec(2, t.cols(), data)
        };
        let (d2, g2) = wgan_gp_losses(
            &gen,
            &disc,
            &swap_rows(&real),
            &swap_rows(&z),
            &[0.6, 0.4],
            1,
            10.0,
            1.0,
        )
        .unwrap();
        approx(d1, d2, 1e-12);
        approx(g1, g2, 1e-12);
    }

    fn tiny_train_cfg() -> TrainConfig {
        TrainConfig {
            d_z: 2,
            g_widths: vec![8],
            d_widths: vec![8],
            lattice: (2, 3, 2),
            stride: 8,
            critic_iters: 2,
            batch: 8,
            gen_iters: 3,
            seed: 5,
            ..TrainConfig::default()
        }
    }

    fn tiny_wings() -> Vec<SurfaceGrid> {
        let cfg = GrammarConfig {
            grid_sections: 9,
            grid_points: 65,
            ..GrammarConfig::default()
        };
        generate_dataset(&cfg, 12, 1).unwrap().grids
    }

    #[test]
    fn training_runs_and_is_deterministic() {
        let wings = tiny_wings();
        let refs: Vec<&SurfaceGrid> = wings.iter().collect();
        let cfg = tiny_train_cfg();
        let (gen_a, hist_a) = train(&refs, &cfg, None).unwrap();
        let (gen_b, hist_b) = train(&refs, &cfg, None).unwrap();
        assert_eq!(hist_a.len(), 3);
        assert!(hist_a.iter().all(|s| {
            s.wasserstein.is_finite() && s.r1.is_finite() && s.r2.is_finite()
        }));
        assert_eq!(hist_a, hist_b);
        let za = [0.5, -0.5];
        assert_eq!(
            gen_a.decode(&za).unwrap().grid,
            gen_b.decode(&za).unwrap().grid
        );
    }

    #[test]
    fn training_writes_checkpoints() {
        let wings = tiny_wings();
        let refs: Vec<&SurfaceGrid> = wings.iter().collect();
        let cfg = TrainConfig {
            checkpoint_every: 2,
            ..tiny_train_cfg()
        };
        let dir = tempfile::tempdir().unwrap();
        train(&refs, &cfg, Some(dir.path())).unwrap();
        assert!(dir.path().join("ckpt_2.json").exists());
        assert!(dir.path().join("ckpt_final.bin").exists());
        let (loaded, iter) =
            crate::neural::load_generator(&dir.path().join("ckpt_final")).unwrap();
        assert_eq!(iter, 3);
        assert_eq!(loaded.d_z(), 2);
    }
}
