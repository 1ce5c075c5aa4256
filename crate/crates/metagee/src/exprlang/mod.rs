//! Expression DSL for immersion components, warping functions and
//! distribution coefficients.
//!
//! Grammar (EBNF):
//!
//! ```text
//! expr   := term (("+"|"-") term)* ;
//! term   := factor (("*"|"/") factor)* ;
//! factor := "-" factor | power ;
//! power  := atom ("^" intlit)? ;
//! atom   := numlit | ident | func "(" expr ")" | "(" expr ")" ;
//! func   := "sin"|"cos"|"tan"|"sqrt"|"exp"|"ln" ;
//! ident  := letter (letter|digit|"_")* ;    numlit := decimal literal
//! ```
//!
//! Reserved identifiers: `pi`, `sigma`, `sigbar`, `p`, `q`. The constants
//! `sigma`/`sigbar`/`p`/`q` are bound to a (p, q) pair at evaluation time, not
//! at parse time, so one tree serves every parameter set. Angles are radians.
//!
//! Evaluation runs second-order forward mode and returns a [`Jet2`]: value,
//! gradient and Hessian with respect to the declared coordinates. No finite
//! differencing is involved; the Hessian is built from symmetric pieces and is
//! symmetric to bit equality.

mod jet;
mod parse;

pub use jet::{EvalError, EvalPoint, Jet2};
pub use parse::{parse, ParseError};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    Pi,
    Sigma,
    Sigbar,
    P,
    Q,
}

impl Builtin {
    pub fn name(self) -> &'static str {
        match self {
            Builtin::Pi => "pi",
            Builtin::Sigma => "sigma",
            Builtin::Sigbar => "sigbar",
            Builtin::P => "p",
            Builtin::Q => "q",
        }
    }

    pub fn from_name(s: &str) -> Option<Builtin> {
        Some(match s {
            "pi" => Builtin::Pi,
            "sigma" => Builtin::Sigma,
            "sigbar" => Builtin::Sigbar,
            "p" => Builtin::P,
            "q" => Builtin::Q,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Sqrt,
    Exp,
    Ln,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Ln => "ln",
        }
    }

    pub fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "sqrt" => Func::Sqrt,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Abstract syntax tree of the DSL. Numeric literals are exact rationals;
/// the parser only produces literals whose denominator is a power of ten.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(BigRational),
    Param(String),
    Builtin(Builtin),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Call(Func, Box<Expr>),
}

// Precedence levels used by the renderer; higher binds tighter.
const LVL_ADD: u8 = 1;
const LVL_MUL: u8 = 2;
const LVL_NEG: u8 = 3;
const LVL_POW: u8 = 4;
const LVL_ATOM: u8 = 5;

impl Expr {
    pub fn num_int(n: i64) -> Expr {
        if n < 0 {
            Expr::Neg(Box::new(Expr::Num(BigRational::from_integer(BigInt::from(-n)))))
        } else {
            Expr::Num(BigRational::from_integer(BigInt::from(n)))
        }
    }

    /// Free parameter names, sorted.
    pub fn free_vars(&self) -> std::collections::BTreeSet<String> {
        let mut out = std::collections::BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut std::collections::BTreeSet<String>) {
        match self {
            Expr::Num(_) | Expr::Builtin(_) => {}
            Expr::Param(name) => {
                out.insert(name.clone());
            }
            Expr::Neg(e) => e.collect_vars(out),
            Expr::Bin(_, l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
            Expr::Pow(b, _) => b.collect_vars(out),
            Expr::Call(_, a) => a.collect_vars(out),
        }
    }

    fn level(&self) -> u8 {
        match self {
            Expr::Num(_) | Expr::Param(_) | Expr::Builtin(_) | Expr::Call(..) => LVL_ATOM,
            Expr::Pow(..) => LVL_POW,
            Expr::Neg(_) => LVL_NEG,
            Expr::Bin(BinOp::Mul | BinOp::Div, ..) => LVL_MUL,
            Expr::Bin(BinOp::Add | BinOp::Sub, ..) => LVL_ADD,
        }
    }

    /// Render back to source text. `parse(render(e))` is structurally equal
    /// to `e` for every tree whose literals are decimal-representable, i.e.
    /// every tree the parser can produce.
    pub fn render(&self) -> String {
        let mut s = String::new();
        self.render_into(&mut s);
        s
    }

    fn render_child(child: &Expr, min_level: u8, out: &mut String) {
        if child.level() < min_level {
            out.push('(');
            child.render_into(out);
            out.push(')');
        } else {
            child.render_into(out);
        }
    }

    fn render_into(&self, out: &mut String) {
        match self {
            Expr::Num(r) => out.push_str(&render_rational(r)),
            Expr::Param(name) => out.push_str(name),
            Expr::Builtin(b) => out.push_str(b.name()),
            Expr::Neg(e) => {
                out.push('-');
                Self::render_child(e, LVL_NEG, out);
            }
            Expr::Bin(op, l, r) => {
                let (sym, lvl) = match op {
                    BinOp::Add => ("+", LVL_ADD),
                    BinOp::Sub => ("-", LVL_ADD),
                    BinOp::Mul => ("*", LVL_MUL),
                    BinOp::Div => ("/", LVL_MUL),
                };
                // left-associative: the right child needs parens at equal level
                Self::render_child(l, lvl, out);
                out.push_str(sym);
                Self::render_child(r, lvl + 1, out);
            }
            Expr::Pow(b, n) => {
                Self::render_child(b, LVL_ATOM, out);
                out.push('^');
                out.push_str(&n.to_string());
            }
            Expr::Call(f, a) => {
                out.push_str(f.name());
                out.push('(');
                a.render_into(out);
                out.push(')');
            }
        }
    }
}

/// Render a nonnegative rational as a decimal literal when its denominator is
/// of the form 2^a·5^b, which covers everything the parser produces. Other
/// denominators fall back to a parenthesized quotient of integers (which
/// re-parses to an equivalent but structurally different tree).
fn render_rational(r: &BigRational) -> String {
    debug_assert!(!r.is_negative(), "negative literals are carried by Neg");
    let mut den = r.denom().clone();
    if den.is_one() {
        return r.numer().to_string();
    }
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let mut twos = 0u32;
    let mut fives = 0u32;
    while (&den % &two).is_zero() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        return format!("({}/{})", r.numer(), r.denom());
    }
    // scale to denominator 10^m
    let m = twos.max(fives);
    let scale = two.pow(m - twos) * five.pow(m - fives);
    let digits = (r.numer() * scale).to_string();
    let m = m as usize;
    if digits.len() <= m {
        format!("0.{}{}", "0".repeat(m - digits.len()), digits)
    } else {
        let split = digits.len() - m;
        format!("{}.{}", &digits[..split], &digits[split..])
    }
}
