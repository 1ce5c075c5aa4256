//! The ambient space: (ℝⁿ, ⟨·,·⟩) with a fixed diagonal structure J whose
//! axis coefficients are σ or σ̄.
//!
//! Every supported structure is diagonal, which makes J symmetric for the
//! Euclidean metric and parallel for the flat connection, so the ambient is
//! automatically locally metallic. Structure axioms are ring identities and
//! are checked exactly; only `apply_j` touches floating point.

use crate::linalg::Mat;
use crate::quadring::{MetallicParams, RingElem};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum AmbientError {
    #[error("dimension mismatch: structure has n={0}, vector has length {1}")]
    Dimension(usize, usize),
    #[error("empty sign pattern")]
    Empty,
}

/// Diagonal axis coefficient of J: σ or σ̄ = p − σ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisSign {
    Sigma,
    Sigbar,
}

/// A diagonal metallic structure on ℝⁿ.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbientStructure {
    signs: Vec<AxisSign>,
    params: MetallicParams,
    sigma: f64,
    sigbar: f64,
}

impl AmbientStructure {
    pub fn new(signs: Vec<AxisSign>, params: MetallicParams) -> Result<Self, AmbientError> {
        if signs.is_empty() {
            return Err(AmbientError::Empty);
        }
        Ok(AmbientStructure {
            sigma: params.sigma_float(),
            sigbar: params.sigbar_float(),
            signs,
            params,
        })
    }

    pub fn dim(&self) -> usize {
        self.signs.len()
    }

    pub fn params(&self) -> MetallicParams {
        self.params
    }

    pub fn signs(&self) -> &[AxisSign] {
        &self.signs
    }

    /// The diagonal of J as floats.
    pub fn j_diag(&self) -> Vec<f64> {
        self.signs
            .iter()
            .map(|s| match s {
                AxisSign::Sigma => self.sigma,
                AxisSign::Sigbar => self.sigbar,
            })
            .collect()
    }

    /// Apply J to an ambient vector.
    pub fn apply_j(&self, v: &[f64]) -> Result<Vec<f64>, AmbientError> {
        if v.len() != self.dim() {
            return Err(AmbientError::Dimension(self.dim(), v.len()));
        }
        Ok(self
            .signs
            .iter()
            .zip(v)
            .map(|(s, x)| match s {
                AxisSign::Sigma => self.sigma * x,
                AxisSign::Sigbar => self.sigbar * x,
            })
            .collect())
    }

    /// Apply J to each column of an n×k matrix.
    pub fn apply_j_mat(&self, m: &Mat) -> Mat {
        assert_eq!(m.rows, self.dim());
        let d = self.j_diag();
        Mat::from_fn(m.rows, m.cols, |i, j| d[i] * m[(i, j)])
    }

    /// Exact verification of the structure axioms: each diagonal coefficient
    /// satisfies x² = px + q in ring arithmetic, and σσ̄ = −q. Metric
    /// compatibility ⟨JX,Y⟩ = ⟨X,JY⟩ is automatic for a diagonal J.
    pub fn check_metallic(&self) -> bool {
        let mp = self.params;
        let sigma = RingElem::sigma(mp);
        let sigbar = RingElem::sigbar(mp);
        if !satisfies_structure_polynomial(&sigma) || !satisfies_structure_polynomial(&sigbar) {
            return false;
        }
        let minus_q = RingElem::from_int(-(mp.q() as i64), mp);
        sigma.mul(&sigbar).unwrap() == minus_q
    }

    /// The complementary projection operators l and m as exact coefficient
    /// pairs (α, β) meaning αI + βJ:
    ///
    /// ```text
    /// l = (σ/(2σ−p)) I − (1/(2σ−p)) J
    /// m = ((σ−p)/(2σ−p)) I + (1/(2σ−p)) J
    /// ```
    ///
    /// 2σ − p = √(p²+4q) is never zero, so the inverse always exists.
    pub fn projectors(&self) -> (StructurePoly, StructurePoly) {
        let mp = self.params;
        let sigma = RingElem::sigma(mp);
        let p = RingElem::from_int(mp.p() as i64, mp);
        let two_sigma_minus_p = sigma.add(&sigma).unwrap().sub(&p).unwrap();
        let inv = two_sigma_minus_p
            .inverse()
            .expect("2σ−p has norm −(p²+4q) ≠ 0");
        let l = StructurePoly {
            on_identity: sigma.mul(&inv).unwrap(),
            on_j: inv.neg(),
        };
        let m = StructurePoly {
            on_identity: sigma.sub(&p).unwrap().mul(&inv).unwrap(),
            on_j: inv.clone(),
        };
        (l, m)
    }
}

/// Does x satisfy the structure polynomial x² = px + q, exactly?
pub fn satisfies_structure_polynomial(x: &RingElem) -> bool {
    let mp = x.params();
    let p = RingElem::from_int(mp.p() as i64, mp);
    let q = RingElem::from_int(mp.q() as i64, mp);
    let lhs = x.mul(x).unwrap();
    let rhs = p.mul(x).unwrap().add(&q).unwrap();
    lhs == rhs
}

/// A degree-one polynomial αI + βJ in the structure tensor, with exact
/// coefficients. Composition reduces J² via the structure polynomial, so the
/// algebra here is the same as in the ring itself.
#[derive(Debug, Clone, PartialEq)]
pub struct StructurePoly {
    pub on_identity: RingElem,
    pub on_j: RingElem,
}

impl StructurePoly {
    pub fn identity(params: MetallicParams) -> Self {
        StructurePoly {
            on_identity: RingElem::one(params),
            on_j: RingElem::zero(params),
        }
    }

    pub fn zero(params: MetallicParams) -> Self {
        StructurePoly {
            on_identity: RingElem::zero(params),
            on_j: RingElem::zero(params),
        }
    }

    pub fn add(&self, other: &StructurePoly) -> StructurePoly {
        StructurePoly {
            on_identity: self.on_identity.add(&other.on_identity).unwrap(),
            on_j: self.on_j.add(&other.on_j).unwrap(),
        }
    }

    /// (α₁I + β₁J)(α₂I + β₂J) with J² = pJ + qI reduced away.
    pub fn compose(&self, other: &StructurePoly) -> StructurePoly {
        let mp = self.on_identity.params();
        let p = RingElem::from_int(mp.p() as i64, mp);
        let q = RingElem::from_int(mp.q() as i64, mp);
        let a1 = &self.on_identity;
        let b1 = &self.on_j;
        let a2 = &other.on_identity;
        let b2 = &other.on_j;
        let bb = b1.mul(b2).unwrap();
        StructurePoly {
            on_identity: a1.mul(a2).unwrap().add(&bb.mul(&q).unwrap()).unwrap(),
            on_j: a1
                .mul(b2)
                .unwrap()
                .add(&a2.mul(b1).unwrap())
                .unwrap()
                .add(&bb.mul(&p).unwrap())
                .unwrap(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm_inf;

    fn golden_r4() -> AmbientStructure {
        AmbientStructure::new(
            vec![AxisSign::Sigma, AxisSign::Sigbar, AxisSign::Sigma, AxisSign::Sigbar],
            MetallicParams::golden(),
        )
        .unwrap()
    }

    #[test]
    fn apply_j_scales_axes() {
        let s = AmbientStructure::new(
            vec![AxisSign::Sigma, AxisSign::Sigbar],
            MetallicParams::golden(),
        )
        .unwrap();
        let jv = s.apply_j(&[1.0, 1.0]).unwrap();
        assert!((jv[0] - 1.618033988749895).abs() < 1e-12);
        assert!((jv[1] + 0.618033988749895).abs() < 1e-12);
        assert_eq!(s.apply_j(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        assert!(matches!(
            s.apply_j(&[1.0]),
            Err(AmbientError::Dimension(2, 1))
        ));
    }

    #[test]
    fn j_squared_is_pj_plus_q_in_float() {
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            // splitmix64
            state = state.wrapping_add(0x9e3779b97f4a7c15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
            z ^= z >> 31;
            (z as f64 / u64::MAX as f64) * 2.0 - 1.0
        };
        let s = golden_r4();
        let (p, q) = (1.0, 1.0);
        for _ in 0..1000 {
            let v: Vec<f64> = (0..4).map(|_| next()).collect();
            let jv = s.apply_j(&v).unwrap();
            let jjv = s.apply_j(&jv).unwrap();
            let resid: Vec<f64> = (0..4)
                .map(|i| jjv[i] - p * jv[i] - q * v[i])
                .collect();
            assert!(norm_inf(&resid) <= 1e-12 * norm_inf(&v).max(1e-30));
        }
    }

    #[test]
    fn check_metallic_is_exact_for_valid_structures() {
        for (p, q) in [(1, 1), (2, 3), (5, 2), (20, 20)] {
            let mp = MetallicParams::new(p, q).unwrap();
            let s = AmbientStructure::new(vec![AxisSign::Sigma, AxisSign::Sigbar], mp).unwrap();
            assert!(s.check_metallic());
        }
    }

    #[test]
    fn rational_sigma_case_is_uniform() {
        // p=2, q=3: x²−2x−3 = (x−3)(x+1), so σ = 3 and σ̄ = −1, both rational
        let mp = MetallicParams::new(2, 3).unwrap();
        let s = AmbientStructure::new(vec![AxisSign::Sigma, AxisSign::Sigbar], mp).unwrap();
        assert!(s.check_metallic());
        assert_eq!(mp.sigma_float(), 3.0);
        assert_eq!(mp.sigbar_float(), -1.0);
    }

    #[test]
    fn wrong_diagonal_entry_fails_polynomial() {
        // p+1 in place of σ violates x² = px + q
        let mp = MetallicParams::golden();
        let fake = RingElem::from_int(mp.p() as i64 + 1, mp);
        assert!(!satisfies_structure_polynomial(&fake));
        assert!(satisfies_structure_polynomial(&RingElem::sigma(mp)));
    }

    #[test]
    fn projectors_are_exact_idempotents() {
        for (p, q) in [(1, 1), (2, 1), (3, 2), (7, 5)] {
            let mp = MetallicParams::new(p, q).unwrap();
            let s = AmbientStructure::new(vec![AxisSign::Sigma], mp).unwrap();
            let (l, m) = s.projectors();
            assert_eq!(l.add(&m), StructurePoly::identity(mp));
            assert_eq!(l.compose(&l), l);
            assert_eq!(m.compose(&m), m);
            assert_eq!(l.compose(&m), StructurePoly::zero(mp));
            assert_eq!(m.compose(&l), StructurePoly::zero(mp));
        }
    }
}
