//! Generator and critic networks.
//!
//! The generator is a dense stack mapping a latent vector to control-point
//! offsets, followed by an FFD layer that turns offsets into surface points.
//! Offsets act on the x and z axes only; the y channel is identically zero
//! because section span positions are fixed by the dataset convention. The
//! critic is a dense stack on the flattened (optionally subsampled) grid.
//!
//! ## Sample layout
//!
//! A batch row is `[x-plane | y-plane | z-plane]`, each plane holding the
//! kept grid points in section-major order. Offset vectors are
//! `[dx (ncp) | dz (ncp)]` in lattice index order, `ncp` being the number of
//! control points.

use rand::Rng;

use super::tape::{Tape, Var};
use super::tensor::{self, Tensor};
use crate::error::{Error, Result};
use crate::geometry::{
    base_lattice, ffd_basis_matrix, ffd_box, param_coords, ControlLattice, ParamCoords, Point3,
    SurfaceGrid,
};

/// Leaky-ReLU slope used by both networks.
pub const LEAKY_SLOPE: f64 = 0.2;

/// One dense layer; weights are `in x out`, bias is `1 x out`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub w: Tensor,
    pub b: Tensor,
}

/// Dense stack with leaky-ReLU activations and a linear final layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub layers: Vec<DenseLayer>,
}

/// Per-tape leaf handles for an [`Mlp`]'s parameters.
pub struct MlpVars(Vec<(Var, Var)>);

impl Mlp {
    /// Glorot-uniform initialized stack over `dims` (input first).
    pub fn new(dims: &[usize], rng: &mut impl Rng) -> Self {
        assert!(dims.len() >= 2, "mlp needs at least input and output dims");
        let layers = dims
            .windows(2)
            .map(|io| {
                let (fan_in, fan_out) = (io[0], io[1]);
                let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
                let w = Tensor::from_vec(
                    fan_in,
                    fan_out,
                    (0..fan_in * fan_out)
                        .map(|_| rng.random_range(-bound..bound))
                        .collect(),
                );
                DenseLayer {
                    w,
                    b: Tensor::zeros(1, fan_out),
                }
            })
            .collect();
        Self { layers }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].w.rows()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().w.cols()
    }

    /// Plain numeric forward pass, checking activations per layer.
    pub fn forward_values(&self, x: &Tensor) -> Result<Tensor> {
        let mut h = x.clone();
        let last = self.layers.len() - 1;
        for (li, layer) in self.layers.iter().enumerate() {
            h = tensor::add_row_vec(&tensor::matmul(&h, &layer.w), &layer.b);
            if li != last {
                h = tensor::leaky_relu(&h, LEAKY_SLOPE);
            }
            if !h.is_finite() {
                return Err(Error::Numeric(format!(
                    "non-finite activations after layer {li}"
                )));
            }
        }
        Ok(h)
    }

    /// Registers parameters as leaves on `tape`.
    pub fn leaf_params(&self, tape: &Tape) -> MlpVars {
        MlpVars(
            self.layers
                .iter()
                .map(|l| (tape.leaf(l.w.clone()), tape.leaf(l.b.clone())))
                .collect(),
        )
    }

    /// Recorded forward pass through previously leafed parameters.
    pub fn forward_tape(&self, params: &MlpVars, x: &Var) -> Var {
        let last = params.0.len() - 1;
        let mut h = x.clone();
        for (li, (w, b)) in params.0.iter().enumerate() {
            h = h.matmul(w).add_row_vec(b);
            if li != last {
                h = h.leaky_relu(LEAKY_SLOPE);
            }
        }
        h
    }

    pub fn params(&self) -> Vec<&Tensor> {
        self.layers.iter().flat_map(|l| [&l.w, &l.b]).collect()
    }

    pub fn params_mut(&mut self) -> Vec<&mut Tensor> {
        self.layers
            .iter_mut()
            .flat_map(|l| [&mut l.w, &mut l.b])
            .collect()
    }
}

impl MlpVars {
    pub fn all(&self) -> Vec<&Var> {
        self.0.iter().flat_map(|(w, b)| [w, b]).collect()
    }
}

/// FFD layer at a fixed grid resolution: a linear map from control-point
/// offsets to planar surface rows around the embedded base surface.
#[derive(Debug, Clone)]
pub struct FfdLayer {
    /// `kept_points x ncp` Bernstein basis products.
    basis: Tensor,
    base_x: Tensor,
    base_y: Tensor,
    base_z: Tensor,
    m: usize,
    n_full: usize,
    kept: Vec<usize>,
}

impl FfdLayer {
    /// Builds the layer for `base` embedded in `lattice`, keeping every
    /// `stride`-th point of each section.
    pub fn new(
        base: &SurfaceGrid,
        lattice: &ControlLattice,
        coords: &ParamCoords,
        stride: usize,
    ) -> Result<Self> {
        if stride == 0 {
            return Err(Error::InvalidArgument("stride must be positive".into()));
        }
        let (m, n) = (base.m(), base.n());
        let kept: Vec<usize> = (0..n).step_by(stride).collect();
        let ncp = lattice.point_count();
        let full = ffd_basis_matrix(lattice, coords);
        let rows = m * kept.len();
        let mut basis = Vec::with_capacity(rows * ncp);
        let mut base_x = Vec::with_capacity(rows);
        let mut base_y = Vec::with_capacity(rows);
        let mut base_z = Vec::with_capacity(rows);
        for s in 0..m {
            for &t in &kept {
                let p = s * n + t;
                basis.extend_from_slice(&full[p * ncp..(p + 1) * ncp]);
                let pt = base.points()[p];
                base_x.push(pt.x);
                base_y.push(pt.y);
                base_z.push(pt.z);
            }
        }
        Ok(Self {
            basis: Tensor::from_vec(rows, ncp, basis),
            base_x: Tensor::row(base_x),
            base_y: Tensor::row(base_y),
            base_z: Tensor::row(base_z),
            m,
            n_full: n,
            kept,
        })
    }

    pub fn ncp(&self) -> usize {
        self.basis.cols()
    }

    /// Points kept per wing.
    pub fn kept_points(&self) -> usize {
        self.basis.rows()
    }

    /// Planar row width: `3 * kept_points`.
    pub fn output_dim(&self) -> usize {
        3 * self.kept_points()
    }

    /// Offsets `[B x 2ncp]` to planar samples `[B x 3P]`, recorded.
    pub fn forward_tape(&self, tape: &Tape, delta: &Var) -> Var {
        let ncp = self.ncp();
        let basis = tape.leaf(self.basis.clone());
        let bx = tape.leaf(self.base_x.clone());
        let by = tape.leaf(self.base_y.clone());
        let bz = tape.leaf(self.base_z.clone());
        let rows = delta.value().rows();
        let ones = tape.leaf(Tensor::filled(rows, 1, 1.0));
        let dx = delta.slice_cols(0, ncp);
        let dz = delta.slice_cols(ncp, ncp);
        let x = dx.matmul_nt(&basis).add_row_vec(&bx);
        let y = ones.matmul(&by);
        let z = dz.matmul_nt(&basis).add_row_vec(&bz);
        // [x | y | z]: two binary concats.
        concat_vars(&concat_vars(&x, &y), &z)
    }

    /// Numeric twin of [`forward_tape`].
    pub fn forward_values(&self, delta: &Tensor) -> Tensor {
        let ncp = self.ncp();
        let dx = tensor::slice_cols(delta, 0, ncp);
        let dz = tensor::slice_cols(delta, ncp, ncp);
        let x = tensor::add_row_vec(&tensor::matmul_nt(&dx, &self.basis), &self.base_x);
        let z = tensor::add_row_vec(&tensor::matmul_nt(&dz, &self.basis), &self.base_z);
        let mut y = Tensor::zeros(delta.rows(), self.kept_points());
        for r in 0..delta.rows() {
            y.data_mut()[r * self.kept_points()..(r + 1) * self.kept_points()]
                .copy_from_slice(self.base_y.data());
        }
        tensor::concat_cols(&tensor::concat_cols(&x, &y), &z)
    }

    /// Extracts one planar row from a grid of the layer's full resolution.
    pub fn grid_to_row(&self, grid: &SurfaceGrid) -> Result<Vec<f64>> {
        if (grid.m(), grid.n()) != (self.m, self.n_full) {
            return Err(Error::InvalidArgument(format!(
                "grid is {}x{}, layer expects {}x{}",
                grid.m(),
                grid.n(),
                self.m,
                self.n_full
            )));
        }
        let p = self.kept_points();
        let mut row = vec![0.0; 3 * p];
        let mut i = 0;
        for s in 0..self.m {
            for &t in &self.kept {
                let pt = grid.point(s, t);
                row[i] = pt.x;
                row[p + i] = pt.y;
                row[2 * p + i] = pt.z;
                i += 1;
            }
        }
        Ok(row)
    }

    /// Rebuilds a grid from one full-resolution planar row (stride 1 only).
    pub fn row_to_grid(&self, row: &[f64]) -> Result<SurfaceGrid> {
        let p = self.kept_points();
        if self.kept.len() != self.n_full {
            return Err(Error::State(
                "grid reconstruction needs a stride-1 layer".into(),
            ));
        }
        if row.len() != 3 * p {
            return Err(Error::InvalidArgument("planar row length mismatch".into()));
        }
        let points = (0..p)
            .map(|i| Point3::new(row[i], row[p + i], row[2 * p + i]))
            .collect();
        SurfaceGrid::new(self.m, self.n_full, points)
    }
}

fn concat_vars(a: &Var, b: &Var) -> Var {
    // concat = pad both sides into the target width and add.
    let (ac, bc) = (a.value().cols(), b.value().cols());
    a.pad_cols(0, bc).add(&b.pad_cols(ac, 0))
}

/// The trained half of the model: dense stack plus full-resolution FFD layer.
#[derive(Debug, Clone)]
pub struct GeneratorNet {
    pub mlp: Mlp,
    lattice: ControlLattice,
    coords: ParamCoords,
    base: SurfaceGrid,
    full_layer: FfdLayer,
    d_z: usize,
}

/// Result of one generator evaluation.
pub struct GeneratorOutput {
    /// Control-point offsets `[1 x 2ncp]` (`[dx | dz]`, y-channel zero).
    pub delta_p: Tensor,
    pub grid: SurfaceGrid,
    /// False when some latent component left `[-1, 1]` (accepted anyway).
    pub latent_in_bounds: bool,
}

impl GeneratorNet {
    /// Builds an untrained generator around a base (mean) shape.
    ///
    /// `lattice_counts` are control-point counts per axis (e.g. `(4, 8, 2)`);
    /// dense widths are the hidden layer sizes between `d_z` and `2 ncp`.
    pub fn new(
        d_z: usize,
        widths: &[usize],
        lattice_counts: (usize, usize, usize),
        base: SurfaceGrid,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        if d_z == 0 {
            return Err(Error::InvalidArgument("d_z must be positive".into()));
        }
        let (px, py, pz) = lattice_counts;
        if px < 2 || py < 2 || pz < 2 {
            return Err(Error::InvalidArgument(
                "lattice needs at least two control points per axis".into(),
            ));
        }
        let bounds = ffd_box(&base)?;
        let lattice = base_lattice(&bounds, px - 1, py - 1, pz - 1)?;
        let coords = param_coords(&base, &bounds)?;
        let ncp = lattice.point_count();
        let mut dims = vec![d_z];
        dims.extend_from_slice(widths);
        dims.push(2 * ncp);
        let mlp = Mlp::new(&dims, rng);
        let full_layer = FfdLayer::new(&base, &lattice, &coords, 1)?;
        Ok(Self {
            mlp,
            lattice,
            coords,
            base,
            full_layer,
            d_z,
        })
    }

    /// Rebuilds a generator from checkpoint parts.
    pub fn from_parts(d_z: usize, mlp: Mlp, lattice_counts: (usize, usize, usize), base: SurfaceGrid) -> Result<Self> {
        let (px, py, pz) = lattice_counts;
        let bounds = ffd_box(&base)?;
        let lattice = base_lattice(&bounds, px - 1, py - 1, pz - 1)?;
        let coords = param_coords(&base, &bounds)?;
        if mlp.input_dim() != d_z || mlp.output_dim() != 2 * lattice.point_count() {
            return Err(Error::Format("mlp dims inconsistent with lattice".into()));
        }
        let full_layer = FfdLayer::new(&base, &lattice, &coords, 1)?;
        Ok(Self {
            mlp,
            lattice,
            coords,
            base,
            full_layer,
            d_z,
        })
    }

    pub fn d_z(&self) -> usize {
        self.d_z
    }

    pub fn base(&self) -> &SurfaceGrid {
        &self.base
    }

    pub fn lattice(&self) -> &ControlLattice {
        &self.lattice
    }

    pub fn lattice_counts(&self) -> (usize, usize, usize) {
        let (l, m, n) = self.lattice.degrees();
        (l + 1, m + 1, n + 1)
    }

    pub fn full_layer(&self) -> &FfdLayer {
        &self.full_layer
    }

    /// FFD layer at a subsampled resolution for training.
    pub fn subsampled_layer(&self, stride: usize) -> Result<FfdLayer> {
        FfdLayer::new(&self.base, &self.lattice, &self.coords, stride)
    }

    /// Numeric batch decode: `[B x d_z]` to offsets `[B x 2ncp]`.
    pub fn offsets_values(&self, z: &Tensor) -> Result<Tensor> {
        if z.cols() != self.d_z {
            return Err(Error::InvalidArgument(format!(
                "latent width {} does not match d_z {}",
                z.cols(),
                self.d_z
            )));
        }
        self.mlp.forward_values(z)
    }

    /// Full decode of one latent vector.
    pub fn decode(&self, z: &[f64]) -> Result<GeneratorOutput> {
        if z.len() != self.d_z {
            return Err(Error::InvalidArgument(format!(
                "latent length {} does not match d_z {}",
                z.len(),
                self.d_z
            )));
        }
        let zt = Tensor::row(z.to_vec());
        let delta_p = self.offsets_values(&zt)?;
        let planar = self.full_layer.forward_values(&delta_p);
        let grid = self.full_layer.row_to_grid(planar.row_slice(0))?;
        Ok(GeneratorOutput {
            delta_p,
            grid,
            latent_in_bounds: z.iter().all(|v| v.abs() <= 1.0),
        })
    }
}

/// Runs the generator on one latent vector: dense stack, then the FFD layer,
/// differentiable end to end (the recorded path is exercised in training and
/// latent fitting; this entry point is the numeric one).
pub fn generator_forward(net: &GeneratorNet, z: &[f64]) -> Result<GeneratorOutput> {
    net.decode(z)
}

/// Critic: dense stack from a planar sample row to one scalar.
#[derive(Debug, Clone)]
pub struct DiscriminatorNet {
    pub mlp: Mlp,
}

impl DiscriminatorNet {
    pub fn new(input_dim: usize, widths: &[usize], rng: &mut impl Rng) -> Self {
        let mut dims = vec![input_dim];
        dims.extend_from_slice(widths);
        dims.push(1);
        Self {
            mlp: Mlp::new(&dims, rng),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.mlp.input_dim()
    }
}
