//! The identity catalog: every checkable relation gets a stable tag, a
//! statement string, a numeric class with its tolerance, and a result record.
//!
//! Tags whose structural requirements a fixture does not meet are skipped by
//! the runner and reported as "not applicable" rather than failed.

use serde::Serialize;
use std::fmt;

/// Class of the computation that produces a residual; each class carries one
/// tolerance (see [`crate::tol`]).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NumericClass {
    Exact,
    Algebraic,
    LinearSolve,
    FiniteDiff,
}

impl NumericClass {
    pub fn tolerance(self) -> f64 {
        match self {
            NumericClass::Exact => 0.0,
            NumericClass::Algebraic => crate::tol::ALGEBRAIC,
            NumericClass::LinearSolve => crate::tol::LINEAR_SOLVE,
            NumericClass::FiniteDiff => crate::tol::FINITE_DIFF,
        }
    }
}

macro_rules! identity_tags {
    ($(($variant:ident, $name:literal, $class:ident, $statement:literal),)*) => {
        /// Stable catalog tags, in report order.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
        pub enum IdentityTag {
            $($variant,)*
        }

        impl IdentityTag {
            pub const ALL: &'static [IdentityTag] = &[$(IdentityTag::$variant,)*];

            pub fn name(self) -> &'static str {
                match self {
                    $(IdentityTag::$variant => $name,)*
                }
            }

            pub fn class(self) -> NumericClass {
                match self {
                    $(IdentityTag::$variant => NumericClass::$class,)*
                }
            }

            /// The relation being checked, written out.
            pub fn statement(self) -> &'static str {
                match self {
                    $(IdentityTag::$variant => $statement,)*
                }
            }

            pub fn parse(s: &str) -> Option<IdentityTag> {
                let upper = s.to_ascii_uppercase();
                $(if upper == $name.to_ascii_uppercase() { return Some(IdentityTag::$variant); })*
                None
            }
        }
    };
}

identity_tags![
    (E7i, "ID_E7i", Algebraic, "g(TX,Y) = g(X,TY)"),
    (E7ii, "ID_E7ii", Algebraic, "g(nU,V) = g(U,nV)"),
    (E8, "ID_E8", Algebraic, "g(NX,V) = g(X,tV)"),
    (E9i, "ID_E9i", LinearSolve, "T^2 X = pTX + qX - tNX"),
    (E9ii, "ID_E9ii", LinearSolve, "pNX = NTX + nNX"),
    (E10i, "ID_E10i", LinearSolve, "n^2 V = pnV + qV - NtV"),
    (E10ii, "ID_E10ii", LinearSolve, "ptV = TtV + tnV"),
    (E13i, "ID_E13i", FiniteDiff, "(grad_X T)Y: tensor route = Leibniz route"),
    (E13ii, "ID_E13ii", FiniteDiff, "tangential d(NY) = -A_{NY}X (Weingarten split)"),
    (E14i, "ID_E14i", FiniteDiff, "(grad_X t)V: projected-field route = J-constancy route"),
    (E14ii, "ID_E14ii", FiniteDiff, "(grad_X n)V: projected-field route = J-constancy route"),
    (E16, "ID_E16", FiniteDiff, "g((grad_X T)Y,Z) = g(Y,(grad_X T)Z)"),
    (E17i, "ID_E17i", FiniteDiff, "(grad_X T)Y = A_{NY}X + t h(X,Y)"),
    (E17ii, "ID_E17ii", FiniteDiff, "(grad_X N)Y = n h(X,Y) - h(X,TY)"),
    (E18i, "ID_E18i", FiniteDiff, "(grad_X t)V = A_{nV}X - T A_V X"),
    (E18ii, "ID_E18ii", FiniteDiff, "(grad_X n)V = -h(X,tV) - N A_V X"),
    (E19, "ID_E19", FiniteDiff, "g((grad_X N)Y,V) = g((grad_X t)V,Y)"),
    (E21, "ID_E21", LinearSolve, "g(TX,TY) = cos^2(th) [p g(X,TY) + q g(X,Y)] on slant args"),
    (E22, "ID_E22", LinearSolve, "g(NX,NY) = sin^2(th) [p g(X,TY) + q g(X,Y)] on slant args"),
    (E23i, "ID_E23i", LinearSolve, "T^2 = cos^2(th) (pT + qI) on the slant distribution"),
    (E23ii, "ID_E23ii", FiniteDiff, "grad(T^2) = p cos^2(th) grad(T)"),
    (E24, "ID_E24", LinearSolve, "g(TP2X,TP2Y) = cos^2(th) [p g(TP2X,P2Y) + q g(P2X,P2Y)]"),
    (
        E25,
        "ID_E25",
        LinearSolve,
        "g(NX,NY) = sin^2(th) [p g(TP2X,P2Y) + q g(P2X,P2Y)] (+ q g(P1X,P1Y) for anti-invariant P1)"
    ),
    (Wpm, "ID_WPM", FiniteDiff, "induced metric splits as g1 + f^2 g2 over base/fiber"),
    (L1a, "ID_L1A", LinearSolve, "grad_X Y stays in the base span"),
    (L1b, "ID_L1B", LinearSolve, "grad_X Z = X(ln f) Z"),
    (L1c, "ID_L1C", FiniteDiff, "grad_Z W = fiber connection term - (grad f / f) g(Z,W)"),
    (W1a, "ID_W1a", LinearSolve, "g(h(X,Y),NZ) = -g(h(X,Z),NY)"),
    (W1b, "ID_W1b", LinearSolve, "g(h(X,Z),NW) = 0"),
    (W3, "ID_W3", LinearSolve, "g(h(Z,W),NX) = TX(ln f) g(Z,W) - X(ln f) g(Z,TW)"),
    (E32, "ID_E32", LinearSolve, "h(TX,Z) = X(ln f) NZ + n h(X,Z)"),
    (P1, "ID_P1", LinearSolve, "TX(ln f) = -(q/p) X(ln f)"),
    (P2, "ID_P2", FiniteDiff, "q X(ln f) Z + (T-pI) A_{NX} Z + t grad-perp_Z NX = 0"),
    (P3, "ID_P3", LinearSolve, "TX(ln f)/X(ln f) equals sigma or sigbar"),
    (P4, "ID_P4", FiniteDiff, "q X(ln f) Z = t grad-perp_Z NX - p t h(X,Z)"),
    (
        Hs,
        "ID_HS",
        LinearSolve,
        "X(ln f) TZ = A_{NZ}X - A_{NX}Z (roles follow the anti-invariant side)"
    ),
];

impl fmt::Display for IdentityTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Outcome of one identity check over a fixture's grid.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityResult {
    pub id: String,
    pub anchor: String,
    pub class: NumericClass,
    pub residual: f64,
    pub tol: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl IdentityResult {
    pub fn new(tag: IdentityTag, residual: f64) -> IdentityResult {
        let tol = tag.class().tolerance();
        IdentityResult {
            id: tag.name().to_string(),
            anchor: tag.statement().to_string(),
            class: tag.class(),
            residual,
            tol,
            pass: residual <= tol,
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// Override the pass verdict (used by composite checks whose parts carry
    /// different tolerances).
    pub fn with_pass(mut self, pass: bool) -> Self {
        self.pass = pass;
        self
    }
}
