//! Dense row-major matrices and the kernels behind the autodiff tape.
//!
//! Matrix products parallelize over output rows (each row is produced by one
//! thread with a fixed-order inner loop, so results are bitwise identical to
//! the sequential path); reductions stay sequential for the same reason.
//! The `*_seq` twins are the fallback used without the `parallel` feature
//! and are benchmarked against the parallel versions.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Row-major 2-D array of f64.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

/// Below this many multiply-adds a parallel matmul is not worth spawning.
#[cfg(feature = "parallel")]
const PAR_FLOP_THRESHOLD: usize = 1 << 15;

impl Tensor {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "tensor data length mismatch");
        Self { rows, cols, data }
    }

    pub fn scalar(value: f64) -> Self {
        Self::from_vec(1, 1, vec![value])
    }

    pub fn row(data: Vec<f64>) -> Self {
        Self::from_vec(1, data.len(), data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row_slice(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn item(&self) -> f64 {
        assert_eq!(self.data.len(), 1, "item() on non-scalar tensor");
        self.data[0]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Tensor {
        Tensor {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    fn zip(&self, other: &Tensor, f: impl Fn(f64, f64) -> f64) -> Tensor {
        assert_eq!(self.shape(), other.shape(), "elementwise shape mismatch");
        Tensor {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }
}

fn matmul_row(out_row: &mut [f64], a_row: &[f64], b: &Tensor) {
    for (k, &aik) in a_row.iter().enumerate() {
        if aik == 0.0 {
            continue;
        }
        let b_row = b.row_slice(k);
        for (o, &bkj) in out_row.iter_mut().zip(b_row) {
            *o += aik * bkj;
        }
    }
}

/// `a * b`.
pub fn matmul(a: &Tensor, b: &Tensor) -> Tensor {
    assert_eq!(a.cols, b.rows, "matmul inner dimension mismatch");
    #[cfg(feature = "parallel")]
    {
        if a.rows * a.cols * b.cols >= PAR_FLOP_THRESHOLD {
            let mut out = Tensor::zeros(a.rows, b.cols);
            out.data
                .par_chunks_mut(b.cols)
                .zip(a.data.par_chunks(a.cols))
                .for_each(|(out_row, a_row)| matmul_row(out_row, a_row, b));
            return out;
        }
    }
    matmul_seq(a, b)
}

/// Sequential twin of [`matmul`].
pub fn matmul_seq(a: &Tensor, b: &Tensor) -> Tensor {
    assert_eq!(a.cols, b.rows, "matmul inner dimension mismatch");
    let mut out = Tensor::zeros(a.rows, b.cols);
    for (out_row, a_row) in out.data.chunks_mut(b.cols).zip(a.data.chunks(a.cols)) {
        matmul_row(out_row, a_row, b);
    }
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// `a * b^T`.
pub fn matmul_nt(a: &Tensor, b: &Tensor) -> Tensor {
    assert_eq!(a.cols, b.cols, "matmul_nt inner dimension mismatch");
    #[cfg(feature = "parallel")]
    {
        if a.rows * a.cols * b.rows >= PAR_FLOP_THRESHOLD {
            let mut out = Tensor::zeros(a.rows, b.rows);
            out.data
                .par_chunks_mut(b.rows)
                .zip(a.data.par_chunks(a.cols))
                .for_each(|(out_row, a_row)| {
                    for (j, o) in out_row.iter_mut().enumerate() {
                        *o = dot(a_row, b.row_slice(j));
                    }
                });
            return out;
        }
    }
    matmul_nt_seq(a, b)
}

/// Sequential twin of [`matmul_nt`].
pub fn matmul_nt_seq(a: &Tensor, b: &Tensor) -> Tensor {
    assert_eq!(a.cols, b.cols, "matmul_nt inner dimension mismatch");
    let mut out = Tensor::zeros(a.rows, b.rows);
    for (out_row, a_row) in out.data.chunks_mut(b.rows).zip(a.data.chunks(a.cols)) {
        for (j, o) in out_row.iter_mut().enumerate() {
            *o = dot(a_row, b.row_slice(j));
        }
    }
    out
}

/// `a^T * b`.
pub fn matmul_tn(a: &Tensor, b: &Tensor) -> Tensor {
    assert_eq!(a.rows, b.rows, "matmul_tn inner dimension mismatch");
    #[cfg(feature = "parallel")]
    {
        if a.rows * a.cols * b.cols >= PAR_FLOP_THRESHOLD {
            let mut out = Tensor::zeros(a.cols, b.cols);
            let a_cols = a.cols;
            out.data
                .par_chunks_mut(b.cols)
                .enumerate()
                .for_each(|(k, out_row)| {
                    for i in 0..a.rows {
                        let aik = a.data[i * a_cols + k];
                        if aik == 0.0 {
                            continue;
                        }
                        for (o, &bij) in out_row.iter_mut().zip(b.row_slice(i)) {
                            *o += aik * bij;
                        }
                    }
                });
            return out;
        }
    }
    matmul_tn_seq(a, b)
}

/// Sequential twin of [`matmul_tn`].
pub fn matmul_tn_seq(a: &Tensor, b: &Tensor) -> Tensor {
    assert_eq!(a.rows, b.rows, "matmul_tn inner dimension mismatch");
    let mut out = Tensor::zeros(a.cols, b.cols);
    for i in 0..a.rows {
        let b_row = b.row_slice(i);
        for (k, o_row) in out.data.chunks_mut(b.cols).enumerate() {
            let aik = a.data[i * a.cols + k];
            if aik == 0.0 {
                continue;
            }
            for (o, &bij) in o_row.iter_mut().zip(b_row) {
                *o += aik * bij;
            }
        }
    }
    out
}

pub fn add(a: &Tensor, b: &Tensor) -> Tensor {
    a.zip(b, |x, y| x + y)
}

pub fn sub(a: &Tensor, b: &Tensor) -> Tensor {
    a.zip(b, |x, y| x - y)
}

pub fn mul(a: &Tensor, b: &Tensor) -> Tensor {
    a.zip(b, |x, y| x * y)
}

pub fn neg(a: &Tensor) -> Tensor {
    a.map(|x| -x)
}

pub fn scale(a: &Tensor, s: f64) -> Tensor {
    a.map(|x| x * s)
}

pub fn add_scalar(a: &Tensor, s: f64) -> Tensor {
    a.map(|x| x + s)
}

/// Adds a `1 x cols` row vector to every row.
pub fn add_row_vec(a: &Tensor, v: &Tensor) -> Tensor {
    assert_eq!(v.rows, 1, "row vector expected");
    assert_eq!(a.cols, v.cols, "row vector width mismatch");
    let mut out = a.clone();
    for row in out.data.chunks_mut(out.cols) {
        for (o, &b) in row.iter_mut().zip(&v.data) {
            *o += b;
        }
    }
    out
}

/// Multiplies row `i` by `s[i]` (`s` is `rows x 1`).
pub fn scale_rows(a: &Tensor, s: &Tensor) -> Tensor {
    assert_eq!(s.cols, 1, "column vector expected");
    assert_eq!(a.rows, s.rows, "row scale length mismatch");
    let mut out = a.clone();
    for (row, &f) in out.data.chunks_mut(out.cols).zip(&s.data) {
        for o in row.iter_mut() {
            *o *= f;
        }
    }
    out
}

pub fn leaky_relu(a: &Tensor, slope: f64) -> Tensor {
    a.map(|x| if x > 0.0 { x } else { slope * x })
}

/// Derivative mask of the leaky ReLU, constant in backward passes.
pub fn leaky_mask(a: &Tensor, slope: f64) -> Tensor {
    a.map(|x| if x > 0.0 { 1.0 } else { slope })
}

pub fn sqrt_el(a: &Tensor) -> Tensor {
    a.map(f64::sqrt)
}

pub fn recip_el(a: &Tensor) -> Tensor {
    a.map(f64::recip)
}

/// Per-row sums: `r x c -> r x 1`.
pub fn row_sums(a: &Tensor) -> Tensor {
    let data = a.data.chunks(a.cols).map(|row| row.iter().sum()).collect();
    Tensor::from_vec(a.rows, 1, data)
}

/// Per-column sums: `r x c -> 1 x c`.
pub fn col_sums(a: &Tensor) -> Tensor {
    let mut out = vec![0.0; a.cols];
    for row in a.data.chunks(a.cols) {
        for (o, &v) in out.iter_mut().zip(row) {
            *o += v;
        }
    }
    Tensor::from_vec(1, a.cols, out)
}

pub fn sum_all(a: &Tensor) -> Tensor {
    Tensor::scalar(a.data.iter().sum())
}

/// Horizontal concatenation of two equal-height tensors.
pub fn concat_cols(a: &Tensor, b: &Tensor) -> Tensor {
    assert_eq!(a.rows, b.rows, "concat_cols height mismatch");
    let cols = a.cols + b.cols;
    let mut data = Vec::with_capacity(a.rows * cols);
    for (ra, rb) in a.data.chunks(a.cols).zip(b.data.chunks(b.cols)) {
        data.extend_from_slice(ra);
        data.extend_from_slice(rb);
    }
    Tensor::from_vec(a.rows, cols, data)
}

/// Columns `[start, start + len)` of every row.
pub fn slice_cols(a: &Tensor, start: usize, len: usize) -> Tensor {
    assert!(start + len <= a.cols, "slice_cols out of range");
    let mut data = Vec::with_capacity(a.rows * len);
    for row in a.data.chunks(a.cols) {
        data.extend_from_slice(&row[start..start + len]);
    }
    Tensor::from_vec(a.rows, len, data)
}

/// Embeds a tensor between `left` and `right` zero columns.
pub fn pad_cols(a: &Tensor, left: usize, right: usize) -> Tensor {
    let cols = left + a.cols + right;
    let mut out = Tensor::zeros(a.rows, cols);
    for (dst, src) in out.data.chunks_mut(cols).zip(a.data.chunks(a.cols)) {
        dst[left..left + a.cols].copy_from_slice(src);
    }
    out
}
