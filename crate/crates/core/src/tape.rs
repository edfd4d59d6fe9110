//! Reverse-mode gradient tape over the fixed set of matrix operations used by
//! the classifiers.
//!
//! Values are recorded eagerly. Nodes that depend on no parameter carry no
//! gradient, so graph inputs and frozen embeddings are never differentiated.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::sparse::{concat_cols, spmm, spmm_transposed, DenseMatrix, SparseMatrix};

/// Handle to a recorded value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

#[derive(Debug)]
enum Op<'a> {
    Input,
    Param(usize),
    MatMul(Var, Var),
    /// `a · bᵀ`
    MatMulT(Var, Var),
    SpMM(&'a SparseMatrix, Var),
    /// `x + 1·b` with `b` a single row.
    AddBias(Var, Var),
    Add(Var, Var),
    Relu(Var),
    Concat(Vec<Var>),
    TopRows(Var),
    /// Per-row convex combination `λ_r a_r + (1 − λ_r) b_r`.
    Mix(Var, Var, Vec<f64>),
}

#[derive(Debug)]
struct Node<'a> {
    op: Op<'a>,
    value: DenseMatrix,
    needs_grad: bool,
}

#[derive(Debug, Default)]
pub struct Tape<'a> {
    nodes: Vec<Node<'a>>,
}

fn param_key(p: &DenseMatrix) -> usize {
    p as *const DenseMatrix as usize
}

/// Parameter gradients keyed by the identity of the parameter tensor.
#[derive(Debug, Default)]
pub struct Gradients {
    by_param: HashMap<usize, DenseMatrix>,
}

impl Gradients {
    /// Gradient of `param`, if it took part in the recorded computation.
    pub fn get(&self, param: &DenseMatrix) -> Option<&DenseMatrix> {
        self.by_param.get(&param_key(param))
    }

    /// Gradient of `param`, zeros when it was unused.
    pub fn get_or_zeros(&self, param: &DenseMatrix) -> DenseMatrix {
        self.get(param)
            .cloned()
            .unwrap_or_else(|| DenseMatrix::zeros(param.rows(), param.cols()))
    }
}

impl<'a> Tape<'a> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &DenseMatrix {
        &self.nodes[v.0].value
    }

    fn push(&mut self, op: Op<'a>, value: DenseMatrix, needs_grad: bool) -> Var {
        self.nodes.push(Node { op, value, needs_grad });
        Var(self.nodes.len() - 1)
    }

    fn grad(&self, v: Var) -> bool {
        self.nodes[v.0].needs_grad
    }

    /// Constant input; never differentiated.
    pub fn input(&mut self, value: DenseMatrix) -> Var {
        self.push(Op::Input, value, false)
    }

    /// Trainable tensor. Its gradient is reported under the tensor's identity;
    /// the borrow keeps it in place for the life of the tape.
    pub fn param(&mut self, param: &'a DenseMatrix) -> Var {
        self.push(Op::Param(param_key(param)), param.clone(), true)
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = self.value(a).matmul(self.value(b))?;
        let g = self.grad(a) || self.grad(b);
        Ok(self.push(Op::MatMul(a, b), value, g))
    }

    pub fn matmul_t(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = self.value(a).matmul_transposed(self.value(b))?;
        let g = self.grad(a) || self.grad(b);
        Ok(self.push(Op::MatMulT(a, b), value, g))
    }

    pub fn spmm(&mut self, s: &'a SparseMatrix, x: Var) -> Result<Var> {
        let value = spmm(s, self.value(x))?;
        let g = self.grad(x);
        Ok(self.push(Op::SpMM(s, x), value, g))
    }

    pub fn add_bias(&mut self, x: Var, bias: Var) -> Result<Var> {
        let b = self.value(bias);
        let xv = self.value(x);
        if b.rows() != 1 || b.cols() != xv.cols() {
            return Err(Error::shape(format!(
                "bias {:?} for activations {:?}",
                b.shape(),
                xv.shape()
            )));
        }
        let mut value = xv.clone();
        for r in 0..value.rows() {
            for (o, bv) in value.row_mut(r).iter_mut().zip(b.row(0)) {
                *o += bv;
            }
        }
        let g = self.grad(x) || self.grad(bias);
        Ok(self.push(Op::AddBias(x, bias), value, g))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = self.value(a).add(self.value(b))?;
        let g = self.grad(a) || self.grad(b);
        Ok(self.push(Op::Add(a, b), value, g))
    }

    pub fn relu(&mut self, x: Var) -> Var {
        let value = self.value(x).map(|v| v.max(0.0));
        let g = self.grad(x);
        self.push(Op::Relu(x), value, g)
    }

    pub fn concat(&mut self, parts: &[Var]) -> Result<Var> {
        let values: Vec<&DenseMatrix> = parts.iter().map(|&p| self.value(p)).collect();
        let value = concat_cols(&values)?;
        let g = parts.iter().any(|&p| self.grad(p));
        Ok(self.push(Op::Concat(parts.to_vec()), value, g))
    }

    /// Keeps rows `0..n`.
    pub fn top_rows(&mut self, x: Var, n: usize) -> Result<Var> {
        let value = self.value(x).top_rows(n)?;
        let g = self.grad(x);
        Ok(self.push(Op::TopRows(x), value, g))
    }

    /// Row-wise `λ_r a_r + (1 − λ_r) b_r`. Rows with `λ = 1` copy `a` and rows
    /// with `λ = 0` copy `b` exactly, whatever the other operand holds.
    pub fn mix(&mut self, a: Var, b: Var, lambdas: &[f64]) -> Result<Var> {
        let (av, bv) = (self.value(a), self.value(b));
        if av.shape() != bv.shape() || lambdas.len() != av.rows() {
            return Err(Error::shape(format!(
                "mix of {:?} and {:?} with {} weights",
                av.shape(),
                bv.shape(),
                lambdas.len()
            )));
        }
        let mut value = DenseMatrix::zeros(av.rows(), av.cols());
        for (r, &l) in lambdas.iter().enumerate() {
            let out = value.row_mut(r);
            if l == 1.0 {
                out.copy_from_slice(av.row(r));
            } else if l == 0.0 {
                out.copy_from_slice(bv.row(r));
            } else {
                for ((o, x), y) in out.iter_mut().zip(av.row(r)).zip(bv.row(r)) {
                    *o = l * x + (1.0 - l) * y;
                }
            }
        }
        let g = self.grad(a) || self.grad(b);
        Ok(self.push(Op::Mix(a, b, lambdas.to_vec()), value, g))
    }

    /// Propagates `upstream = ∂L/∂output` back to every recorded parameter.
    pub fn backward(&self, output: Var, upstream: &DenseMatrix) -> Result<Gradients> {
        if output.0 >= self.nodes.len() {
            return Err(Error::shape("backward on a variable that was never recorded"));
        }
        if upstream.shape() != self.value(output).shape() {
            return Err(Error::shape(format!(
                "upstream gradient {:?} for output {:?}",
                upstream.shape(),
                self.value(output).shape()
            )));
        }
        let mut grads: Vec<Option<DenseMatrix>> = vec![None; output.0 + 1];
        grads[output.0] = Some(upstream.clone());
        let mut out = Gradients::default();

        for idx in (0..=output.0).rev() {
            let node = &self.nodes[idx];
            if !node.needs_grad {
                continue;
            }
            let Some(g) = grads[idx].take() else { continue };
            let mut send = |v: Var, contribution: DenseMatrix| {
                if !self.nodes[v.0].needs_grad {
                    return;
                }
                match &mut grads[v.0] {
                    Some(acc) => acc.add_assign(&contribution),
                    slot @ None => *slot = Some(contribution),
                }
            };
            match &node.op {
                Op::Input => {}
                Op::Param(key) => match out.by_param.get_mut(key) {
                    Some(acc) => acc.add_assign(&g),
                    None => {
                        out.by_param.insert(*key, g);
                    }
                },
                Op::MatMul(a, b) => {
                    if self.grad(*a) {
                        send(*a, g.matmul_transposed(self.value(*b))?);
                    }
                    if self.grad(*b) {
                        send(*b, self.value(*a).transposed_matmul(&g)?);
                    }
                }
                Op::MatMulT(a, b) => {
                    if self.grad(*a) {
                        send(*a, g.matmul(self.value(*b))?);
                    }
                    if self.grad(*b) {
                        send(*b, g.transposed_matmul(self.value(*a))?);
                    }
                }
                Op::SpMM(s, x) => send(*x, spmm_transposed(s, &g)?),
                Op::AddBias(x, b) => {
                    if self.grad(*b) {
                        let mut gb = DenseMatrix::zeros(1, g.cols());
                        for r in 0..g.rows() {
                            for (o, v) in gb.row_mut(0).iter_mut().zip(g.row(r)) {
                                *o += v;
                            }
                        }
                        send(*b, gb);
                    }
                    send(*x, g);
                }
                Op::Add(a, b) => {
                    send(*a, g.clone());
                    send(*b, g);
                }
                Op::Relu(x) => {
                    let mask = g.zip_with(&node.value, |gv, y| if y > 0.0 { gv } else { 0.0 })?;
                    send(*x, mask);
                }
                Op::Concat(parts) => {
                    let mut offset = 0;
                    for p in parts {
                        let w = self.value(*p).cols();
                        if self.grad(*p) {
                            let mut part = DenseMatrix::zeros(g.rows(), w);
                            for r in 0..g.rows() {
                                part.row_mut(r).copy_from_slice(&g.row(r)[offset..offset + w]);
                            }
                            send(*p, part);
                        }
                        offset += w;
                    }
                }
                Op::TopRows(x) => {
                    let (rows, cols) = self.value(*x).shape();
                    let mut full = DenseMatrix::zeros(rows, cols);
                    for r in 0..g.rows() {
                        full.row_mut(r).copy_from_slice(g.row(r));
                    }
                    send(*x, full);
                }
                Op::Mix(a, b, lambdas) => {
                    let scaled = |w: &dyn Fn(f64) -> f64| {
                        let mut m = g.clone();
                        for (r, &l) in lambdas.iter().enumerate() {
                            let f = w(l);
                            m.row_mut(r).iter_mut().for_each(|v| *v *= f);
                        }
                        m
                    };
                    if self.grad(*a) {
                        send(*a, scaled(&|l| l));
                    }
                    if self.grad(*b) {
                        send(*b, scaled(&|l| 1.0 - l));
                    }
                }
            }
        }
        Ok(out)
    }
}
