//! Minimal reverse-mode differentiation.
//!
//! A [`Tape`] records every operation on [`Var`]s as a node holding the local
//! partial derivatives towards at most two inputs. [`Tape::gradient`] then
//! sweeps the nodes backwards once. Values created with
//! [`Scalar::constant`] are not on any tape and carry no gradient.
//!
//! The tape also logs the outcome of every comparison made while recording
//! (`max`, `min`, `abs`, `sqrt` at zero, interval overlap tests). Two
//! recordings of the same expression with equal logs lie on the same smooth
//! piece of the loss.

use std::cell::RefCell;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::geometry::Scalar;

const NONE: usize = usize::MAX;

#[derive(Clone, Copy)]
struct Node {
    inputs: [(usize, f64); 2],
}

#[derive(Default)]
pub struct Tape {
    nodes: RefCell<Vec<Node>>,
    branches: RefCell<Vec<bool>>,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    /// A new independent variable.
    pub fn var(&self, value: f64) -> Var<'_> {
        self.push(value, [(NONE, 0.0), (NONE, 0.0)])
    }

    fn push(&self, val: f64, inputs: [(usize, f64); 2]) -> Var<'_> {
        let mut nodes = self.nodes.borrow_mut();
        nodes.push(Node { inputs });
        Var { tape: Some(self), idx: nodes.len() - 1, val }
    }

    fn branch(&self, outcome: bool) {
        self.branches.borrow_mut().push(outcome);
    }

    pub fn len(&self) -> usize {
        self.nodes.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Comparison outcomes in recording order.
    pub fn branches(&self) -> Vec<bool> {
        self.branches.borrow().clone()
    }

    /// Adjoints `∂out/∂node` for every node on the tape. Constant outputs
    /// give all zeros.
    pub fn gradient(&self, out: Var<'_>) -> Vec<f64> {
        let nodes = self.nodes.borrow();
        let mut adj = vec![0.0; nodes.len()];
        let Some(tape) = out.tape else {
            return adj;
        };
        assert!(std::ptr::eq(tape, self), "variable from another tape");
        adj[out.idx] = 1.0;
        for i in (0..=out.idx).rev() {
            let a = adj[i];
            if a == 0.0 {
                continue;
            }
            for (j, d) in nodes[i].inputs {
                if j != NONE {
                    adj[j] += a * d;
                }
            }
        }
        adj
    }
}

/// A scalar that is either recorded on a tape or a constant.
#[derive(Clone, Copy)]
pub struct Var<'t> {
    tape: Option<&'t Tape>,
    idx: usize,
    val: f64,
}

impl fmt::Debug for Var<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.tape {
            Some(_) => write!(f, "Var#{}({})", self.idx, self.val),
            None => write!(f, "Const({})", self.val),
        }
    }
}

impl<'t> Var<'t> {
    /// Position on the tape; `None` for constants.
    pub fn index(&self) -> Option<usize> {
        self.tape.map(|_| self.idx)
    }

    fn unary(self, val: f64, d: f64) -> Self {
        match self.tape {
            None => Var::constant(val),
            Some(t) => t.push(val, [(self.idx, d), (NONE, 0.0)]),
        }
    }

    fn binary(self, other: Self, val: f64, da: f64, db: f64) -> Self {
        let edge = |v: Self, d: f64| if v.tape.is_some() { (v.idx, d) } else { (NONE, 0.0) };
        match self.tape.or(other.tape) {
            None => Var::constant(val),
            Some(t) => t.push(val, [edge(self, da), edge(other, db)]),
        }
    }

    fn log(&self, other: Option<&Self>, outcome: bool) {
        if let Some(t) = self.tape.or(other.and_then(|o| o.tape)) {
            t.branch(outcome);
        }
    }
}

impl<'t> Add for Var<'t> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.binary(rhs, self.val + rhs.val, 1.0, 1.0)
    }
}

impl<'t> Sub for Var<'t> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.binary(rhs, self.val - rhs.val, 1.0, -1.0)
    }
}

impl<'t> Mul for Var<'t> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.binary(rhs, self.val * rhs.val, rhs.val, self.val)
    }
}

impl<'t> Neg for Var<'t> {
    type Output = Self;
    fn neg(self) -> Self {
        self.unary(-self.val, -1.0)
    }
}

impl<'t> Scalar for Var<'t> {
    fn constant(v: f64) -> Self {
        Var { tape: None, idx: NONE, val: v }
    }

    fn value(self) -> f64 {
        self.val
    }

    fn abs(self) -> Self {
        self.log(None, self.val > 0.0);
        self.log(None, self.val < 0.0);
        let d = if self.val > 0.0 {
            1.0
        } else if self.val < 0.0 {
            -1.0
        } else {
            0.0
        };
        self.unary(self.val.abs(), d)
    }

    fn sqrt(self) -> Self {
        self.log(None, self.val > 0.0);
        let r = self.val.sqrt();
        let d = if self.val > 0.0 { 0.5 / r } else { 0.0 };
        self.unary(r, d)
    }

    fn ge(self, other: Self) -> bool {
        let outcome = self.val >= other.val;
        self.log(Some(&other), outcome);
        outcome
    }

    fn scale(self, k: f64) -> Self {
        self.unary(self.val * k, k)
    }
}
