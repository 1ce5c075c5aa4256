//! Exact arithmetic in the quadratic ring ℚ\[σ\], where σ = σ_{p,q} is the
//! positive root of x² − px − q = 0.
//!
//! Elements are stored as a + bσ with arbitrary-precision rational a, b, so
//! structure identities like l² = l can be checked exactly rather than to a
//! tolerance. The conjugate σ̄ = p − σ is the other root; σσ̄ = −q and
//! σ + σ̄ = p.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RingError {
    #[error("invalid metallic parameters: p and q must be positive integers")]
    InvalidParams,
    #[error("ring mismatch: (p,q)=({0},{1}) vs ({2},{3})")]
    Mismatch(u32, u32, u32, u32),
    #[error("division by zero-norm element")]
    ZeroNormDivisor,
}

/// The pair (p, q) defining σ_{p,q} = (p + √(p²+4q))/2. Both must be ≥ 1,
/// which guarantees σ > 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MetallicParams {
    p: u32,
    q: u32,
}

impl MetallicParams {
    pub fn new(p: u32, q: u32) -> Result<Self, RingError> {
        if p == 0 || q == 0 {
            return Err(RingError::InvalidParams);
        }
        Ok(MetallicParams { p, q })
    }

    /// The Golden case p = q = 1, with σ = φ = (1+√5)/2.
    pub fn golden() -> Self {
        MetallicParams { p: 1, q: 1 }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// σ_{p,q} = (p + √(p²+4q))/2 in floating point.
    pub fn sigma_float(&self) -> f64 {
        let p = self.p as f64;
        let q = self.q as f64;
        (p + (p * p + 4.0 * q).sqrt()) / 2.0
    }

    /// σ̄ = p − σ in floating point.
    pub fn sigbar_float(&self) -> f64 {
        self.p as f64 - self.sigma_float()
    }
}

/// An element a + bσ of ℚ[σ_{p,q}], with exact rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RingElem {
    a: BigRational,
    b: BigRational,
    params: MetallicParams,
}

fn big(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl RingElem {
    pub fn new(a: BigRational, b: BigRational, params: MetallicParams) -> Self {
        RingElem { a, b, params }
    }

    pub fn from_int(n: i64, params: MetallicParams) -> Self {
        RingElem::new(big(n), BigRational::zero(), params)
    }

    pub fn from_ratio(num: i64, den: i64, params: MetallicParams) -> Self {
        assert!(den != 0);
        RingElem::new(
            BigRational::new(BigInt::from(num), BigInt::from(den)),
            BigRational::zero(),
            params,
        )
    }

    pub fn zero(params: MetallicParams) -> Self {
        RingElem::from_int(0, params)
    }

    pub fn one(params: MetallicParams) -> Self {
        RingElem::from_int(1, params)
    }

    /// σ itself, the element (0, 1).
    pub fn sigma(params: MetallicParams) -> Self {
        RingElem::new(BigRational::zero(), BigRational::one(), params)
    }

    /// σ̄ = p − σ, the element (p, −1).
    pub fn sigbar(params: MetallicParams) -> Self {
        RingElem::new(big(params.p as i64), -BigRational::one(), params)
    }

    pub fn a(&self) -> &BigRational {
        &self.a
    }

    pub fn b(&self) -> &BigRational {
        &self.b
    }

    pub fn params(&self) -> MetallicParams {
        self.params
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    fn check(&self, other: &RingElem) -> Result<(), RingError> {
        if self.params != other.params {
            return Err(RingError::Mismatch(
                self.params.p,
                self.params.q,
                other.params.p,
                other.params.q,
            ));
        }
        Ok(())
    }

    pub fn add(&self, other: &RingElem) -> Result<RingElem, RingError> {
        self.check(other)?;
        Ok(RingElem::new(&self.a + &other.a, &self.b + &other.b, self.params))
    }

    pub fn sub(&self, other: &RingElem) -> Result<RingElem, RingError> {
        self.check(other)?;
        Ok(RingElem::new(&self.a - &other.a, &self.b - &other.b, self.params))
    }

    pub fn neg(&self) -> RingElem {
        RingElem::new(-self.a.clone(), -self.b.clone(), self.params)
    }

    /// (a₁+b₁σ)(a₂+b₂σ) reduced by σ² = pσ + q:
    /// real part a₁a₂ + b₁b₂q, σ part a₁b₂ + a₂b₁ + b₁b₂p.
    pub fn mul(&self, other: &RingElem) -> Result<RingElem, RingError> {
        self.check(other)?;
        let p = big(self.params.p as i64);
        let q = big(self.params.q as i64);
        let a = &self.a * &other.a + &self.b * &other.b * &q;
        let b = &self.a * &other.b + &other.a * &self.b + &self.b * &other.b * &p;
        Ok(RingElem::new(a, b, self.params))
    }

    /// Conjugation σ ↦ σ̄: a + bσ ↦ (a + bp) − bσ. An involutive ring
    /// homomorphism fixing ℚ.
    pub fn conj(&self) -> RingElem {
        let p = big(self.params.p as i64);
        RingElem::new(&self.a + &self.b * &p, -self.b.clone(), self.params)
    }

    /// Field norm x·conj(x) = a² + abp − b²q, a rational.
    pub fn norm(&self) -> BigRational {
        let p = big(self.params.p as i64);
        let q = big(self.params.q as i64);
        &self.a * &self.a + &self.a * &self.b * &p - &self.b * &self.b * &q
    }

    /// Multiplicative inverse via x⁻¹ = conj(x) / (x·conj(x)).
    pub fn inverse(&self) -> Result<RingElem, RingError> {
        let n = self.norm();
        if n.is_zero() {
            return Err(RingError::ZeroNormDivisor);
        }
        let c = self.conj();
        Ok(RingElem::new(c.a / &n, c.b / &n, self.params))
    }

    pub fn div(&self, other: &RingElem) -> Result<RingElem, RingError> {
        self.check(other)?;
        self.mul(&other.inverse()?)
    }

    /// a + b·σ_float. Exact rational coefficients are rounded once each.
    pub fn to_float(&self) -> f64 {
        rational_to_f64(&self.a) + rational_to_f64(&self.b) * self.params.sigma_float()
    }
}

/// Round a BigRational to the nearest f64.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // fall back for huge numerators: divide as floats of the parts
        let n = r.numer().to_f64().unwrap_or(if r.numer().is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        });
        let d = r.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gp() -> MetallicParams {
        MetallicParams::golden()
    }

    #[test]
    fn values_are_shareable_across_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<MetallicParams>();
        assert_send_sync::<RingElem>();
        assert_send_sync::<crate::ambient::AmbientStructure>();
        assert_send_sync::<crate::exprlang::Expr>();
        assert_send_sync::<crate::submanifold::ImmersionSpec>();
    }

    #[test]
    fn params_reject_zero() {
        assert_eq!(MetallicParams::new(0, 1), Err(RingError::InvalidParams));
        assert_eq!(MetallicParams::new(1, 0), Err(RingError::InvalidParams));
        assert!(MetallicParams::new(1, 1).is_ok());
    }

    #[test]
    fn sigma_plus_sigbar_is_p() {
        for (p, q) in [(1, 1), (2, 1), (1, 2), (3, 2), (7, 11)] {
            let mp = MetallicParams::new(p, q).unwrap();
            let s = RingElem::sigma(mp).add(&RingElem::sigbar(mp)).unwrap();
            assert_eq!(s, RingElem::from_int(p as i64, mp));
        }
    }

    #[test]
    fn add_identity_and_componentwise() {
        let mp = gp();
        let sigma = RingElem::sigma(mp);
        assert_eq!(RingElem::zero(mp).add(&sigma).unwrap(), sigma);
        let one_one = RingElem::new(big(1), big(1), mp);
        assert_eq!(
            one_one.add(&one_one).unwrap(),
            RingElem::new(big(2), big(2), mp)
        );
    }

    #[test]
    fn sigma_squared_reduces() {
        for (p, q) in [(1u32, 1u32), (2, 1), (4, 3)] {
            let mp = MetallicParams::new(p, q).unwrap();
            let s = RingElem::sigma(mp);
            let s2 = s.mul(&s).unwrap();
            assert_eq!(s2, RingElem::new(big(q as i64), big(p as i64), mp));
        }
    }

    #[test]
    fn sigma_times_sigbar_is_minus_q() {
        for (p, q) in [(1u32, 1u32), (2, 1), (3, 2)] {
            let mp = MetallicParams::new(p, q).unwrap();
            let prod = RingElem::sigma(mp).mul(&RingElem::sigbar(mp)).unwrap();
            assert_eq!(prod, RingElem::from_int(-(q as i64), mp));
        }
    }

    #[test]
    fn golden_square_expansion() {
        // (1+σ)² with p=q=1 expands by hand via σ² = σ + 1 to 2 + 3σ
        let mp = gp();
        let x = RingElem::new(big(1), big(1), mp);
        let sq = x.mul(&x).unwrap();
        assert_eq!(sq, RingElem::new(big(2), big(3), mp));
    }

    #[test]
    fn conj_is_involution_and_fixes_rationals() {
        let mp = gp();
        let sigma = RingElem::sigma(mp);
        assert_eq!(sigma.conj(), RingElem::sigbar(mp));
        let x = RingElem::new(
            BigRational::new(BigInt::from(3), BigInt::from(7)),
            BigRational::new(BigInt::from(-2), BigInt::from(5)),
            mp,
        );
        assert_eq!(x.conj().conj(), x);
        // conj(σ·σ̄) is the rational −q, fixed by conjugation
        let prod = sigma.mul(&RingElem::sigbar(mp)).unwrap();
        assert_eq!(prod.conj(), RingElem::from_int(-1, mp));
    }

    #[test]
    fn to_float_known_values() {
        let golden = RingElem::sigma(gp()).to_float();
        assert!((golden - 1.618033988749895).abs() < 1e-12);
        let silver = RingElem::sigma(MetallicParams::new(2, 1).unwrap()).to_float();
        assert!((silver - 2.414213562373095).abs() < 1e-12);
        let mp = gp();
        let r = RingElem::from_ratio(3, 2, mp);
        assert_eq!(r.to_float(), 1.5);
    }

    #[test]
    fn mismatch_is_an_error() {
        let x = RingElem::sigma(gp());
        let y = RingElem::sigma(MetallicParams::new(2, 1).unwrap());
        assert!(matches!(x.add(&y), Err(RingError::Mismatch(..))));
        assert!(matches!(x.mul(&y), Err(RingError::Mismatch(..))));
    }

    #[test]
    fn inverse_by_conjugate_trick() {
        let mp = MetallicParams::new(3, 2).unwrap();
        let x = RingElem::new(big(2), big(-5), mp);
        let inv = x.inverse().unwrap();
        assert_eq!(x.mul(&inv).unwrap(), RingElem::one(mp));
        assert_eq!(
            RingElem::zero(mp).inverse(),
            Err(RingError::ZeroNormDivisor)
        );
    }

    #[test]
    fn zero_norm_nonzero_element_rejected_when_discriminant_square() {
        // p=2, q=3 gives σ = 3 rational, so σ − 3 = (−3 + σ) has norm 0
        let mp = MetallicParams::new(2, 3).unwrap();
        let x = RingElem::new(big(-3), big(1), mp);
        assert!(x.norm().is_zero());
        assert_eq!(x.inverse(), Err(RingError::ZeroNormDivisor));
    }

    fn small_rational() -> impl Strategy<Value = BigRational> {
        (-8i64..=8, 1i64..=4)
            .prop_map(|(n, d)| BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    fn any_rational() -> impl Strategy<Value = BigRational> {
        (-10_000i64..=10_000, 1i64..=997)
            .prop_map(|(n, d)| BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    fn elem(params: MetallicParams) -> impl Strategy<Value = RingElem> {
        (any_rational(), any_rational()).prop_map(move |(a, b)| RingElem::new(a, b, params))
    }

    // Coefficients kept small so the two float routes differ only by a few
    // ulps of intermediates bounded near 2e3; see the bound in the assert.
    fn small_elem(params: MetallicParams) -> impl Strategy<Value = RingElem> {
        (small_rational(), small_rational()).prop_map(move |(a, b)| RingElem::new(a, b, params))
    }

    fn params_strategy() -> impl Strategy<Value = MetallicParams> {
        (1u32..=20, 1u32..=20).prop_map(|(p, q)| MetallicParams::new(p, q).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1024))]

        #[test]
        fn ring_laws_hold_exactly(
            (a, b, c) in params_strategy()
                .prop_flat_map(|mp| (elem(mp), elem(mp), elem(mp))),
        ) {
            prop_assert_eq!(a.add(&b).unwrap(), b.add(&a).unwrap());
            prop_assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
            prop_assert_eq!(
                a.add(&b).unwrap().add(&c).unwrap(),
                a.add(&b.add(&c).unwrap()).unwrap()
            );
            prop_assert_eq!(
                a.mul(&b).unwrap().mul(&c).unwrap(),
                a.mul(&b.mul(&c).unwrap()).unwrap()
            );
            prop_assert_eq!(
                a.mul(&b.add(&c).unwrap()).unwrap(),
                a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap()
            );
            // conj is a ring homomorphism
            prop_assert_eq!(a.mul(&b).unwrap().conj(), a.conj().mul(&b.conj()).unwrap());
        }

        #[test]
        fn to_float_is_multiplicative_within_1e12(
            (x, y) in (1u32..=4, 1u32..=4)
                .prop_map(|(p, q)| MetallicParams::new(p, q).unwrap())
                .prop_flat_map(|mp| (small_elem(mp), small_elem(mp))),
        ) {
            let exact = x.mul(&y).unwrap().to_float();
            let float = x.to_float() * y.to_float();
            let bound = 1e-12 * (1.0 + float.abs());
            prop_assert!(
                (exact - float).abs() <= bound,
                "exact={} float={}", exact, float
            );
        }
    }
}
