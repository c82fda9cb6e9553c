//! Generator checkpoints.
//!
//! A checkpoint is two files sharing a stem: `<stem>.json` is a
//! structured-text header (architecture, training iteration, tensor table)
//! and `<stem>.bin` holds the tensor payload. Payload layout: for each entry
//! of the header's `tensors` table, `rows * cols` little-endian 32-bit
//! floats in row-major order, starting at the entry's `offset` (in floats).
//! Dense layers appear as `g.w<i>` / `g.b<i>`; the base (mean) shape is the
//! final `base_grid` block of `m * n` rows by 3 columns, which makes a
//! checkpoint self-contained.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::net::{DenseLayer, GeneratorNet, Mlp};
use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::geometry::{Point3, SurfaceGrid};

const FORMAT: &str = "ffdgan-ckpt-v1";

#[derive(Debug, Serialize, Deserialize)]
struct TensorEntry {
    name: String,
    rows: usize,
    cols: usize,
    /// Offset into the payload, in floats.
    offset: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct CheckpointHeader {
    format: String,
    iteration: usize,
    d_z: usize,
    /// Control points per axis of the FFD layer.
    lattice_counts: (usize, usize, usize),
    grid_m: usize,
    grid_n: usize,
    tensors: Vec<TensorEntry>,
}

/// Writes `<stem>.json` + `<stem>.bin`.
pub fn save_generator(gen: &GeneratorNet, iteration: usize, stem: &Path) -> Result<()> {
    let mut tensors = Vec::new();
    let mut payload: Vec<f32> = Vec::new();
    let push = |name: String, t: &Tensor, payload: &mut Vec<f32>, tensors: &mut Vec<TensorEntry>| {
        tensors.push(TensorEntry {
            name,
            rows: t.rows(),
            cols: t.cols(),
            offset: payload.len(),
        });
        payload.extend(t.data().iter().map(|&v| v as f32));
    };
    for (i, layer) in gen.mlp.layers.iter().enumerate() {
        push(format!("g.w{i}"), &layer.w, &mut payload, &mut tensors);
        push(format!("g.b{i}"), &layer.b, &mut payload, &mut tensors);
    }
    let base = gen.base();
    let base_t = Tensor::from_vec(
        base.m() * base.n(),
        3,
        base.points()
            .iter()
            .flat_map(|p| [p.x, p.y, p.z])
            .collect(),
    );
    push("base_grid".into(), &base_t, &mut payload, &mut tensors);

    let header = CheckpointHeader {
        format: FORMAT.into(),
        iteration,
        d_z: gen.d_z(),
        lattice_counts: gen.lattice_counts(),
        grid_m: base.m(),
        grid_n: base.n(),
        tensors,
    };
    std::fs::write(
        stem.with_extension("json"),
        serde_json::to_string_pretty(&header)?,
    )?;
    let bytes: Vec<u8> = payload.iter().flat_map(|v| v.to_le_bytes()).collect();
    std::fs::write(stem.with_extension("bin"), bytes)?;
    Ok(())
}

/// Reads a checkpoint back into a generator; returns the stored iteration.
pub fn load_generator(stem: &Path) -> Result<(GeneratorNet, usize)> {
    let header: CheckpointHeader =
        serde_json::from_str(&std::fs::read_to_string(stem.with_extension("json"))?)?;
    if header.format != FORMAT {
        return Err(Error::Format(format!(
            "unsupported checkpoint format {:?}",
            header.format
        )));
    }
    let bytes = std::fs::read(stem.with_extension("bin"))?;
    if bytes.len() % 4 != 0 {
        return Err(Error::Format("checkpoint payload not float-aligned".into()));
    }
    let floats: Vec<f32> = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    let fetch = |entry: &TensorEntry| -> Result<Tensor> {
        let end = entry.offset + entry.rows * entry.cols;
        if end > floats.len() {
            return Err(Error::Format(format!(
                "tensor {} overruns the payload",
                entry.name
            )));
        }
        Ok(Tensor::from_vec(
            entry.rows,
            entry.cols,
            floats[entry.offset..end].iter().map(|&v| v as f64).collect(),
        ))
    };

    let mut layers = Vec::new();
    let mut i = 0;
    loop {
        let w = header.tensors.iter().find(|t| t.name == format!("g.w{i}"));
        let b = header.tensors.iter().find(|t| t.name == format!("g.b{i}"));
        match (w, b) {
            (Some(w), Some(b)) => layers.push(DenseLayer {
                w: fetch(w)?,
                b: fetch(b)?,
            }),
            (None, None) => break,
            _ => return Err(Error::Format(format!("layer {i} incomplete"))),
        }
        i += 1;
    }
    if layers.is_empty() {
        return Err(Error::Format("checkpoint holds no layers".into()));
    }
    let base_entry = header
        .tensors
        .iter()
        .find(|t| t.name == "base_grid")
        .ok_or_else(|| Error::Format("checkpoint missing base_grid".into()))?;
    let base_t = fetch(base_entry)?;
    if base_t.rows() != header.grid_m * header.grid_n || base_t.cols() != 3 {
        return Err(Error::Format("base_grid block has wrong shape".into()));
    }
    let points = base_t
        .data()
        .chunks_exact(3)
        .map(|p| Point3::new(p[0], p[1], p[2]))
        .collect();
    let base = SurfaceGrid::new(header.grid_m, header.grid_n, points)?;
    let gen = GeneratorNet::from_parts(header.d_z, Mlp { layers }, header.lattice_counts, base)?;
    Ok((gen, header.iteration))
}
