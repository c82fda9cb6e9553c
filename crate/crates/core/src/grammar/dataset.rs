//! Dataset synthesis and the on-disk dataset format.
//!
//! A dataset is written as two files sharing a stem: `<stem>.bin` holds
//! little-endian 32-bit floats, row-major `M x N x 3` per wing in wing
//! order, and `<stem>.json` is a structured-text header recording the wing
//! count, grid resolution, master seed, grammar-config hash and the
//! train/test split indices.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{realize_surface, sample_wing, GrammarConfig};
use crate::error::{Error, Result};
use crate::geometry::{self_intersection_check, Point3, SurfaceGrid};
use crate::parallel::par_map_indexed;

/// Salt folded into the master seed for the split shuffle so it does not
/// collide with any per-wing stream.
const SPLIT_SEED_SALT: u64 = 0x5350_4c49_545f_3830;

/// A synthesized wing dataset with its deterministic 80/20 split.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub grids: Vec<SurfaceGrid>,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub seed: u64,
    pub config_hash: String,
}

impl Dataset {
    pub fn m(&self) -> usize {
        self.grids[0].m()
    }

    pub fn n(&self) -> usize {
        self.grids[0].n()
    }

    pub fn train_grids(&self) -> Vec<&SurfaceGrid> {
        self.train_indices.iter().map(|&i| &self.grids[i]).collect()
    }

    pub fn test_grids(&self) -> Vec<&SurfaceGrid> {
        self.test_indices.iter().map(|&i| &self.grids[i]).collect()
    }
}

/// SHA-256 hex digest of the canonical JSON form of a grammar config.
pub fn config_hash(cfg: &GrammarConfig) -> String {
    let json = serde_json::to_string(cfg).expect("config serializes");
    let mut hasher = Sha256::new();
    hasher.update(json.as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Synthesizes `count` wings with per-wing derived seeds (`seed + index`),
/// so the result is identical regardless of thread count, and splits them
/// 80/20 by a seeded shuffle.
///
/// Every grid is verified non-self-intersecting; a failing realization is
/// deterministically resampled from an attempt-offset stream.
pub fn generate_dataset(cfg: &GrammarConfig, count: usize, seed: u64) -> Result<Dataset> {
    cfg.validate()?;
    if count < 10 {
        return Err(Error::InvalidArgument(format!(
            "dataset needs at least 10 wings, got {count}"
        )));
    }
    let results = par_map_indexed(count, |i| synthesize_one(cfg, seed, i as u64));
    let grids = results.into_iter().collect::<Result<Vec<_>>>()?;

    let mut order: Vec<usize> = (0..count).collect();
    let mut split_rng = ChaCha8Rng::seed_from_u64(seed ^ SPLIT_SEED_SALT);
    order.shuffle(&mut split_rng);
    let n_train = count * 8 / 10;
    let mut train_indices = order[..n_train].to_vec();
    let mut test_indices = order[n_train..].to_vec();
    train_indices.sort_unstable();
    test_indices.sort_unstable();

    Ok(Dataset {
        grids,
        train_indices,
        test_indices,
        seed,
        config_hash: config_hash(cfg),
    })
}

fn synthesize_one(cfg: &GrammarConfig, seed: u64, index: u64) -> Result<SurfaceGrid> {
    for attempt in 0..10u64 {
        let wing_seed = seed
            .wrapping_add(index)
            .wrapping_add(attempt.wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let mut rng = ChaCha8Rng::seed_from_u64(wing_seed);
        let spec = sample_wing(cfg, &mut rng)?;
        let grid = realize_surface(&spec, cfg.grid_sections, cfg.grid_points)?;
        if !self_intersection_check(&grid) {
            return Ok(grid);
        }
    }
    Err(Error::Degenerate(format!(
        "wing {index} failed the intersection check after 10 resamples"
    )))
}

#[derive(Debug, Serialize, Deserialize)]
struct DatasetHeader {
    format: String,
    count: usize,
    m: usize,
    n: usize,
    seed: u64,
    config_hash: String,
    train_indices: Vec<usize>,
    test_indices: Vec<usize>,
}

const DATA_FORMAT: &str = "f32le/m*n*3/wing-major";

/// Writes `<stem>.bin` and `<stem>.json`.
pub fn write_dataset(ds: &Dataset, stem: &Path) -> Result<()> {
    let header = DatasetHeader {
        format: DATA_FORMAT.to_string(),
        count: ds.grids.len(),
        m: ds.m(),
        n: ds.n(),
        seed: ds.seed,
        config_hash: ds.config_hash.clone(),
        train_indices: ds.train_indices.clone(),
        test_indices: ds.test_indices.clone(),
    };
    let json = serde_json::to_string_pretty(&header)?;
    std::fs::write(stem.with_extension("json"), json)?;

    let mut bytes = Vec::with_capacity(ds.grids.len() * ds.m() * ds.n() * 12);
    for g in &ds.grids {
        for p in g.points() {
            for v in [p.x as f32, p.y as f32, p.z as f32] {
                bytes.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    std::fs::write(stem.with_extension("bin"), bytes)?;
    Ok(())
}

/// Reads a dataset written by [`write_dataset`].
pub fn read_dataset(stem: &Path) -> Result<Dataset> {
    let json = std::fs::read_to_string(stem.with_extension("json"))?;
    let header: DatasetHeader = serde_json::from_str(&json)?;
    if header.format != DATA_FORMAT {
        return Err(Error::Format(format!(
            "unsupported dataset format {:?}",
            header.format
        )));
    }
    let bytes = std::fs::read(stem.with_extension("bin"))?;
    let expected = header.count * header.m * header.n * 12;
    if bytes.len() != expected {
        return Err(Error::Format(format!(
            "dataset payload is {} bytes, header implies {expected}",
            bytes.len()
        )));
    }
    let mut grids = Vec::with_capacity(header.count);
    let stride = header.m * header.n * 12;
    for wing in bytes.chunks_exact(stride) {
        let points: Vec<Point3> = wing
            .chunks_exact(12)
            .map(|p| {
                let f = |o: usize| f32::from_le_bytes([p[o], p[o + 1], p[o + 2], p[o + 3]]) as f64;
                Point3::new(f(0), f(4), f(8))
            })
            .collect();
        grids.push(SurfaceGrid::new(header.m, header.n, points)?);
    }
    let max_idx = header
        .train_indices
        .iter()
        .chain(&header.test_indices)
        .copied()
        .max()
        .unwrap_or(0);
    if max_idx >= header.count
        || header.train_indices.len() + header.test_indices.len() != header.count
    {
        return Err(Error::Format("split indices inconsistent with count".into()));
    }
    Ok(Dataset {
        grids,
        train_indices: header.train_indices,
        test_indices: header.test_indices,
        seed: header.seed,
        config_hash: header.config_hash,
    })
}
