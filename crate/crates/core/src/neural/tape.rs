//! Reverse-mode autodiff on a tensor tape, with gradients-of-gradients.
//!
//! Every operation appends a node holding its forward value and parent
//! indices. [`grad`] walks the recorded range backwards and, crucially,
//! expresses each backward rule through the same tape operations, so with
//! `create_graph = true` the returned gradients are themselves recorded
//! nodes and a second [`grad`] differentiates through them. This is what the
//! critic's gradient penalty needs.
//!
//! Tapes are single-threaded by design (one per training step); trained
//! parameter tensors live outside the tape and are re-leafed each step.

use std::cell::{Ref, RefCell};
use std::rc::Rc;

use super::tensor::{self, Tensor};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Leaf,
    Matmul,
    MatmulNt,
    MatmulTn,
    Add,
    Sub,
    Mul,
    Neg,
    Scale(f64),
    AddScalar(f64),
    AddRowVec,
    ScaleRows,
    LeakyRelu(f64),
    SqrtEl,
    RecipEl,
    RowSums,
    ColSums,
    SumAll,
    SliceCols(usize, usize),
    PadCols(usize, usize),
}

struct Node {
    op: Op,
    a: usize,
    b: usize,
    value: Tensor,
}

#[derive(Default)]
struct TapeInner {
    nodes: Vec<Node>,
}

/// A recording of tensor operations; cheap to clone (shared handle).
#[derive(Clone, Default)]
pub struct Tape {
    inner: Rc<RefCell<TapeInner>>,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of recorded nodes.
    pub fn len(&self) -> usize {
        self.inner.borrow().nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Records a constant/input tensor.
    pub fn leaf(&self, value: Tensor) -> Var {
        self.push(Op::Leaf, 0, 0, value)
    }

    pub fn leaf_scalar(&self, value: f64) -> Var {
        self.leaf(Tensor::scalar(value))
    }

    fn push(&self, op: Op, a: usize, b: usize, value: Tensor) -> Var {
        let mut inner = self.inner.borrow_mut();
        let idx = inner.nodes.len();
        inner.nodes.push(Node { op, a, b, value });
        Var {
            tape: self.clone(),
            idx,
        }
    }

    fn value_of(&self, idx: usize) -> Ref<'_, Tensor> {
        Ref::map(self.inner.borrow(), |t| &t.nodes[idx].value)
    }
}

/// Handle to one tape node.
#[derive(Clone)]
pub struct Var {
    tape: Tape,
    idx: usize,
}

macro_rules! unary_op {
    ($name:ident, $op:expr, $kernel:expr) => {
        pub fn $name(&self) -> Var {
            let value = $kernel(&*self.value());
            self.tape.push($op, self.idx, 0, value)
        }
    };
}

impl Var {
    /// Borrow of the forward value.
    pub fn value(&self) -> Ref<'_, Tensor> {
        self.tape.value_of(self.idx)
    }

    pub fn value_clone(&self) -> Tensor {
        self.value().clone()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.value().shape()
    }

    pub fn item(&self) -> f64 {
        self.value().item()
    }

    fn same_tape(&self, other: &Var) {
        assert!(
            Rc::ptr_eq(&self.tape.inner, &other.tape.inner),
            "vars must live on the same tape"
        );
    }

    fn binary(&self, other: &Var, op: Op, kernel: impl FnOnce(&Tensor, &Tensor) -> Tensor) -> Var {
        self.same_tape(other);
        let value = kernel(&*self.value(), &*other.value());
        self.tape.push(op, self.idx, other.idx, value)
    }

    pub fn matmul(&self, other: &Var) -> Var {
        self.binary(other, Op::Matmul, |a, b| tensor::matmul(a, b))
    }

    /// `self * other^T`.
    pub fn matmul_nt(&self, other: &Var) -> Var {
        self.binary(other, Op::MatmulNt, |a, b| tensor::matmul_nt(a, b))
    }

    /// `self^T * other`.
    pub fn matmul_tn(&self, other: &Var) -> Var {
        self.binary(other, Op::MatmulTn, |a, b| tensor::matmul_tn(a, b))
    }

    pub fn add(&self, other: &Var) -> Var {
        self.binary(other, Op::Add, |a, b| tensor::add(a, b))
    }

    pub fn sub(&self, other: &Var) -> Var {
        self.binary(other, Op::Sub, |a, b| tensor::sub(a, b))
    }

    pub fn mul(&self, other: &Var) -> Var {
        self.binary(other, Op::Mul, |a, b| tensor::mul(a, b))
    }

    pub fn add_row_vec(&self, v: &Var) -> Var {
        self.binary(v, Op::AddRowVec, |a, b| tensor::add_row_vec(a, b))
    }

    pub fn scale_rows(&self, s: &Var) -> Var {
        self.binary(s, Op::ScaleRows, |a, b| tensor::scale_rows(a, b))
    }

    unary_op!(neg, Op::Neg, tensor::neg);
    unary_op!(sqrt_el, Op::SqrtEl, tensor::sqrt_el);
    unary_op!(recip_el, Op::RecipEl, tensor::recip_el);
    unary_op!(row_sums, Op::RowSums, tensor::row_sums);
    unary_op!(col_sums, Op::ColSums, tensor::col_sums);
    unary_op!(sum_all, Op::SumAll, tensor::sum_all);

    pub fn scale(&self, s: f64) -> Var {
        let value = tensor::scale(&self.value(), s);
        self.tape.push(Op::Scale(s), self.idx, 0, value)
    }

    pub fn add_scalar(&self, s: f64) -> Var {
        let value = tensor::add_scalar(&self.value(), s);
        self.tape.push(Op::AddScalar(s), self.idx, 0, value)
    }

    pub fn leaky_relu(&self, slope: f64) -> Var {
        let value = tensor::leaky_relu(&self.value(), slope);
        self.tape.push(Op::LeakyRelu(slope), self.idx, 0, value)
    }

    pub fn slice_cols(&self, start: usize, len: usize) -> Var {
        let value = tensor::slice_cols(&self.value(), start, len);
        self.tape.push(Op::SliceCols(start, len), self.idx, 0, value)
    }

    pub fn pad_cols(&self, left: usize, right: usize) -> Var {
        let value = tensor::pad_cols(&self.value(), left, right);
        self.tape.push(Op::PadCols(left, right), self.idx, 0, value)
    }

    /// Mean of all entries, as a scalar node.
    pub fn mean_all(&self) -> Var {
        let n = self.value().len();
        self.sum_all().scale(1.0 / n as f64)
    }
}

fn accumulate(slot: &mut Option<Var>, contribution: Var) {
    *slot = Some(match slot.take() {
        None => contribution,
        Some(existing) => existing.add(&contribution),
    });
}

/// Gradients of a scalar `output` with respect to `inputs`.
///
/// With `create_graph` the backward pass is recorded, so the returned vars
/// can be differentiated again; otherwise they are detached leaves. An input
/// the output does not depend on gets a zero gradient of its shape.
pub fn grad(output: &Var, inputs: &[&Var], create_graph: bool) -> Result<Vec<Var>> {
    if output.shape() != (1, 1) {
        return Err(Error::InvalidArgument(format!(
            "grad needs a scalar output, got {:?}",
            output.shape()
        )));
    }
    for v in inputs {
        output.same_tape(v);
    }
    let tape = output.tape.clone();
    let out_idx = output.idx;
    let mut adjoints: Vec<Option<Var>> = Vec::new();
    adjoints.resize_with(out_idx + 1, || None);
    adjoints[out_idx] = Some(tape.leaf_scalar(1.0));

    for idx in (0..=out_idx).rev() {
        let Some(g) = adjoints[idx].clone() else {
            continue;
        };
        let (op, pa, pb) = {
            let inner = tape.inner.borrow();
            let node = &inner.nodes[idx];
            (node.op, node.a, node.b)
        };
        let var_at = |i: usize| Var {
            tape: tape.clone(),
            idx: i,
        };
        match op {
            Op::Leaf => {}
            Op::Matmul => {
                let (a, b) = (var_at(pa), var_at(pb));
                accumulate(&mut adjoints[pa], g.matmul_nt(&b));
                accumulate(&mut adjoints[pb], a.matmul_tn(&g));
            }
            Op::MatmulNt => {
                let (a, b) = (var_at(pa), var_at(pb));
                accumulate(&mut adjoints[pa], g.matmul(&b));
                accumulate(&mut adjoints[pb], g.matmul_tn(&a));
            }
            Op::MatmulTn => {
                let (a, b) = (var_at(pa), var_at(pb));
                accumulate(&mut adjoints[pa], b.matmul_nt(&g));
                accumulate(&mut adjoints[pb], a.matmul(&g));
            }
            Op::Add => {
                accumulate(&mut adjoints[pa], g.clone());
                accumulate(&mut adjoints[pb], g);
            }
            Op::Sub => {
                accumulate(&mut adjoints[pa], g.clone());
                accumulate(&mut adjoints[pb], g.neg());
            }
            Op::Mul => {
                let (a, b) = (var_at(pa), var_at(pb));
                accumulate(&mut adjoints[pa], g.mul(&b));
                accumulate(&mut adjoints[pb], g.mul(&a));
            }
            Op::Neg => accumulate(&mut adjoints[pa], g.neg()),
            Op::Scale(s) => accumulate(&mut adjoints[pa], g.scale(s)),
            Op::AddScalar(_) => accumulate(&mut adjoints[pa], g),
            Op::AddRowVec => {
                accumulate(&mut adjoints[pa], g.clone());
                accumulate(&mut adjoints[pb], g.col_sums());
            }
            Op::ScaleRows => {
                let (a, s) = (var_at(pa), var_at(pb));
                accumulate(&mut adjoints[pa], g.scale_rows(&s));
                accumulate(&mut adjoints[pb], g.mul(&a).row_sums());
            }
            Op::LeakyRelu(slope) => {
                // Piecewise-linear: the mask is constant under further
                // differentiation (exact almost everywhere).
                let mask_t = tensor::leaky_mask(&var_at(pa).value(), slope);
                let mask = tape.leaf(mask_t);
                accumulate(&mut adjoints[pa], g.mul(&mask));
            }
            Op::SqrtEl => {
                let out = var_at(idx);
                accumulate(&mut adjoints[pa], g.mul(&out.recip_el()).scale(0.5));
            }
            Op::RecipEl => {
                let out = var_at(idx);
                accumulate(&mut adjoints[pa], g.mul(&out).mul(&out).neg());
            }
            Op::RowSums => {
                let cols = var_at(pa).value().cols();
                let ones = tape.leaf(Tensor::filled(1, cols, 1.0));
                accumulate(&mut adjoints[pa], g.matmul(&ones));
            }
            Op::ColSums => {
                let rows = var_at(pa).value().rows();
                let ones = tape.leaf(Tensor::filled(rows, 1, 1.0));
                accumulate(&mut adjoints[pa], ones.matmul(&g));
            }
            Op::SumAll => {
                let (rows, cols) = var_at(pa).shape();
                let col = tape.leaf(Tensor::filled(rows, 1, 1.0));
                let row = tape.leaf(Tensor::filled(1, cols, 1.0));
                accumulate(&mut adjoints[pa], col.matmul(&g).matmul(&row));
            }
            Op::SliceCols(start, len) => {
                let total = var_at(pa).value().cols();
                accumulate(&mut adjoints[pa], g.pad_cols(start, total - start - len));
            }
            Op::PadCols(left, _) => {
                let cols = var_at(pa).value().cols();
                accumulate(&mut adjoints[pa], g.slice_cols(left, cols));
            }
        }
    }

    let mut out = Vec::with_capacity(inputs.len());
    for input in inputs {
        let g = match adjoints.get(input.idx).and_then(|s| s.clone()) {
            Some(g) => {
                if create_graph {
                    g
                } else {
                    tape.leaf(g.value_clone())
                }
            }
            // Unreachable input: zero gradient by convention.
            None => {
                let (r, c) = input.shape();
                tape.leaf(Tensor::zeros(r, c))
            }
        };
        out.push(g);
    }
    Ok(out)
}
