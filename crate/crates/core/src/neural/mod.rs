//! Autodiff tape, generator/critic networks and WGAN-GP training.

pub mod checkpoint;
pub mod net;
pub mod tape;
pub mod tensor;
pub mod train;

pub use checkpoint::{load_generator, save_generator};
pub use net::{generator_forward, DiscriminatorNet, FfdLayer, GeneratorNet, GeneratorOutput, Mlp};
pub use tape::{grad, Tape, Var};
pub use tensor::Tensor;
pub use train::{adam_step, train, wgan_gp_losses, AdamState, IterStats, TrainConfig};
