//! Second-order forward-mode evaluation.
//!
//! A [`Jet2`] carries a value, a gradient over the k declared coordinates and
//! a k×k Hessian. Every rule composes Hessians from symmetric pieces
//! (scaled Hessians and symmetrized outer products), so the Hessian is
//! symmetric to bit equality by construction.

use super::{BinOp, Builtin, Expr, Func};
use crate::linalg::Mat;
use crate::quadring::{rational_to_f64, MetallicParams};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("domain error in `{expr}`: {reason}")]
    Domain { expr: String, reason: String },
    #[error("unknown name `{0}` (not a coordinate, constant, or builtin)")]
    UnknownName(String),
}

/// Evaluation context: coordinate names get derivative seeds, named constants
/// evaluate with zero derivatives, and the builtins sigma/sigbar/p/q are bound
/// to `params`.
pub struct EvalPoint<'a> {
    coord_names: &'a [String],
    coords: &'a [f64],
    consts: &'a BTreeMap<String, f64>,
    params: MetallicParams,
}

impl<'a> EvalPoint<'a> {
    pub fn new(
        coord_names: &'a [String],
        coords: &'a [f64],
        consts: &'a BTreeMap<String, f64>,
        params: MetallicParams,
    ) -> Self {
        assert_eq!(coord_names.len(), coords.len());
        EvalPoint { coord_names, coords, consts, params }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// Value, gradient and Hessian of a scalar expression at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub grad: Vec<f64>,
    pub hess: Mat,
}

impl Jet2 {
    pub fn constant(v: f64, k: usize) -> Jet2 {
        Jet2 { value: v, grad: vec![0.0; k], hess: Mat::zeros(k, k) }
    }

    pub fn coordinate(v: f64, index: usize, k: usize) -> Jet2 {
        let mut grad = vec![0.0; k];
        grad[index] = 1.0;
        Jet2 { value: v, grad, hess: Mat::zeros(k, k) }
    }

    fn add(&self, o: &Jet2) -> Jet2 {
        Jet2 {
            value: self.value + o.value,
            grad: self.grad.iter().zip(&o.grad).map(|(a, b)| a + b).collect(),
            hess: self.hess.add(&o.hess),
        }
    }

    fn sub(&self, o: &Jet2) -> Jet2 {
        Jet2 {
            value: self.value - o.value,
            grad: self.grad.iter().zip(&o.grad).map(|(a, b)| a - b).collect(),
            hess: self.hess.sub(&o.hess),
        }
    }

    fn neg(&self) -> Jet2 {
        Jet2 {
            value: -self.value,
            grad: self.grad.iter().map(|a| -a).collect(),
            hess: self.hess.scale(-1.0),
        }
    }

    /// Symmetrized outer product a·gᵀ + g·aᵀ; bitwise symmetric because the
    /// (i,j) and (j,i) entries are the same two products in swapped order.
    fn sym_outer(a: &[f64], b: &[f64]) -> Mat {
        let k = a.len();
        Mat::from_fn(k, k, |i, j| a[i] * b[j] + b[i] * a[j])
    }

    fn mul(&self, o: &Jet2) -> Jet2 {
        let k = self.grad.len();
        let grad: Vec<f64> = (0..k)
            .map(|i| self.grad[i] * o.value + o.grad[i] * self.value)
            .collect();
        let hess = self
            .hess
            .scale(o.value)
            .add(&o.hess.scale(self.value))
            .add(&Self::sym_outer(&self.grad, &o.grad));
        Jet2 { value: self.value * o.value, grad, hess }
    }

    /// Chain rule through a scalar function with first and second derivative
    /// values `d1 = φ'(u)` and `d2 = φ''(u)`.
    fn chain(&self, value: f64, d1: f64, d2: f64) -> Jet2 {
        let k = self.grad.len();
        let grad: Vec<f64> = self.grad.iter().map(|g| d1 * g).collect();
        // g·gᵀ is bitwise symmetric since IEEE multiplication commutes
        let outer = Mat::from_fn(k, k, |i, j| self.grad[i] * self.grad[j]);
        let hess = self.hess.scale(d1).add(&outer.scale(d2));
        Jet2 { value, grad, hess }
    }

    fn recip(&self) -> Jet2 {
        let v = self.value;
        self.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))
    }

    fn powi(&self, n: u32) -> Jet2 {
        let k = self.grad.len();
        match n {
            0 => Jet2::constant(1.0, k),
            1 => self.clone(),
            _ => {
                let u = self.value;
                let nf = n as f64;
                let value = u.powi(n as i32);
                let d1 = nf * u.powi(n as i32 - 1);
                let d2 = nf * (nf - 1.0) * u.powi(n as i32 - 2);
                self.chain(value, d1, d2)
            }
        }
    }
}

impl Expr {
    /// Evaluate with second-order forward-mode propagation.
    pub fn eval_jet2(&self, at: &EvalPoint) -> Result<Jet2, EvalError> {
        let k = at.dim();
        match self {
            Expr::Num(r) => Ok(Jet2::constant(rational_to_f64(r), k)),
            Expr::Builtin(b) => {
                let v = match b {
                    Builtin::Pi => std::f64::consts::PI,
                    Builtin::Sigma => at.params.sigma_float(),
                    Builtin::Sigbar => at.params.sigbar_float(),
                    Builtin::P => at.params.p() as f64,
                    Builtin::Q => at.params.q() as f64,
                };
                Ok(Jet2::constant(v, k))
            }
            Expr::Param(name) => {
                if let Some(i) = at.coord_names.iter().position(|n| n == name) {
                    return Ok(Jet2::coordinate(at.coords[i], i, k));
                }
                if let Some(v) = at.consts.get(name) {
                    return Ok(Jet2::constant(*v, k));
                }
                Err(EvalError::UnknownName(name.clone()))
            }
            Expr::Neg(e) => Ok(e.eval_jet2(at)?.neg()),
            Expr::Bin(op, l, r) => {
                let a = l.eval_jet2(at)?;
                let b = r.eval_jet2(at)?;
                match op {
                    BinOp::Add => Ok(a.add(&b)),
                    BinOp::Sub => Ok(a.sub(&b)),
                    BinOp::Mul => Ok(a.mul(&b)),
                    BinOp::Div => {
                        if b.value == 0.0 {
                            return Err(EvalError::Domain {
                                expr: r.render(),
                                reason: "division by zero".into(),
                            });
                        }
                        Ok(a.mul(&b.recip()))
                    }
                }
            }
            Expr::Pow(b, n) => Ok(b.eval_jet2(at)?.powi(*n)),
            Expr::Call(f, arg) => {
                let u = arg.eval_jet2(at)?;
                let v = u.value;
                let out = match f {
                    Func::Sin => u.chain(v.sin(), v.cos(), -v.sin()),
                    Func::Cos => u.chain(v.cos(), -v.sin(), -v.cos()),
                    Func::Tan => {
                        let t = v.tan();
                        let sec2 = 1.0 + t * t;
                        u.chain(t, sec2, 2.0 * t * sec2)
                    }
                    Func::Sqrt => {
                        if v <= 0.0 {
                            return Err(EvalError::Domain {
                                expr: arg.render(),
                                reason: format!("sqrt argument {v} is not positive"),
                            });
                        }
                        let s = v.sqrt();
                        u.chain(s, 0.5 / s, -0.25 / (v * s))
                    }
                    Func::Exp => {
                        let e = v.exp();
                        u.chain(e, e, e)
                    }
                    Func::Ln => {
                        if v <= 0.0 {
                            return Err(EvalError::Domain {
                                expr: arg.render(),
                                reason: format!("ln argument {v} is not positive"),
                            });
                        }
                        u.chain(v.ln(), 1.0 / v, -1.0 / (v * v))
                    }
                };
                Ok(out)
            }
        }
    }
}
