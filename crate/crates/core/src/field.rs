//! Exact arithmetic in the unramified quadratic extension `F = Q_p(sqrt(u))`
//! of `F0 = Q_p`, for an odd prime `p` and a quadratic non-residue unit `u`.
//!
//! Elements are stored as exact rationals `x + y*sqrt(u)`; the uniformizer is
//! `varpi = p` and the Galois involution sends `sqrt(u)` to `-sqrt(u)`.
//! Truncated rings `O_F / varpi^k` are provided for enumeration.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Fixed local data: the odd prime `p`, the chosen non-residue `u`, and the
/// residue cardinality `q` (equal to `p` since `F0 = Q_p`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeContext {
    p: u64,
    u: u64,
}

fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &b in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == b {
            return true;
        }
        if n % b == 0 {
            return false;
        }
    }
    // deterministic Miller-Rabin for u64
    let d = n - 1;
    let s = d.trailing_zeros();
    let d = d >> s;
    'outer: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = mod_pow(a % n, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mod_mul(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

pub(crate) fn mod_mul(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn mod_pow(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mod_mul(acc, b, m);
        }
        b = mod_mul(b, b, m);
        e >>= 1;
    }
    acc
}

impl PrimeContext {
    /// Build the context for an odd prime, choosing `u` as the least positive
    /// quadratic non-residue modulo `p`.
    pub fn new(p: u64) -> Result<Self> {
        if p < 3 || !is_prime_u64(p) {
            return Err(Error::BadPrime(format!("{p} is not an odd prime")));
        }
        let u = (2..p)
            .find(|&c| mod_pow(c, (p - 1) / 2, p) == p - 1)
            .expect("a non-residue exists for every odd prime");
        Ok(PrimeContext { p, u })
    }

    /// Build the context with an explicit non-residue `u`.
    pub fn with_nonresidue(p: u64, u: u64) -> Result<Self> {
        if p < 3 || !is_prime_u64(p) {
            return Err(Error::BadPrime(format!("{p} is not an odd prime")));
        }
        if u == 0 || u % p == 0 || mod_pow(u % p, (p - 1) / 2, p) != p - 1 {
            return Err(Error::BadPrime(format!("{u} is not a non-residue unit mod {p}")));
        }
        Ok(PrimeContext { p, u })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// The non-residue `u` with `F = F0(sqrt(u))`.
    pub fn u(&self) -> u64 {
        self.u
    }

    /// Residue field cardinality of `F0`.
    pub fn q(&self) -> u64 {
        self.p
    }
}

fn val_p_int(n: &BigInt, p: u64) -> i64 {
    debug_assert!(!n.is_zero());
    let p = BigInt::from(p);
    let mut n = n.clone();
    let mut v = 0i64;
    loop {
        let (d, r) = n.div_rem(&p);
        if r.is_zero() {
            v += 1;
            n = d;
        } else {
            return v;
        }
    }
}

/// p-adic valuation of an exact rational, `None` for zero.
pub fn val_p(r: &BigRational, p: u64) -> Option<i64> {
    if r.is_zero() {
        None
    } else {
        Some(val_p_int(r.numer(), p) - val_p_int(r.denom(), p))
    }
}

/// An exact element `x + y*sqrt(u)` of `F`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FElement {
    ctx: PrimeContext,
    x: BigRational,
    y: BigRational,
}

impl fmt::Display for FElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.y.is_zero() {
            write!(f, "{}", self.x)
        } else if self.x.is_zero() {
            write!(f, "{}*sqrt({})", self.y, self.ctx.u)
        } else {
            write!(f, "{} + {}*sqrt({})", self.x, self.y, self.ctx.u)
        }
    }
}

fn denom_is_p_power(r: &BigRational, p: u64) -> bool {
    let mut d = r.denom().abs();
    let p = BigInt::from(p);
    while !d.is_one() {
        let (q, rem) = d.div_rem(&p);
        if !rem.is_zero() {
            return false;
        }
        d = q;
    }
    true
}

impl FElement {
    /// Construct from exact coordinates. Rejects denominators that are not
    /// p-powers: inputs must lie in `F`, not merely in `Q(sqrt(u))`.
    pub fn new(ctx: PrimeContext, x: BigRational, y: BigRational) -> Result<Self> {
        if !denom_is_p_power(&x, ctx.p) {
            return Err(Error::BadDenominator(x.to_string()));
        }
        if !denom_is_p_power(&y, ctx.p) {
            return Err(Error::BadDenominator(y.to_string()));
        }
        Ok(FElement { ctx, x, y })
    }

    pub fn from_int(ctx: PrimeContext, n: i64) -> Self {
        FElement {
            ctx,
            x: BigRational::from_integer(n.into()),
            y: BigRational::zero(),
        }
    }

    pub fn zero(ctx: PrimeContext) -> Self {
        Self::from_int(ctx, 0)
    }

    pub fn one(ctx: PrimeContext) -> Self {
        Self::from_int(ctx, 1)
    }

    /// `sqrt(u)` itself.
    pub fn sqrt_u(ctx: PrimeContext) -> Self {
        FElement {
            ctx,
            x: BigRational::zero(),
            y: BigRational::one(),
        }
    }

    /// `varpi^e` for any integer `e` (so `varpi = p`).
    pub fn varpi_pow(ctx: PrimeContext, e: i64) -> Self {
        let p = BigInt::from(ctx.p);
        let r = if e >= 0 {
            BigRational::from_integer(p.pow(e as u32))
        } else {
            BigRational::new(BigInt::one(), p.pow((-e) as u32))
        };
        FElement {
            ctx,
            x: r,
            y: BigRational::zero(),
        }
    }

    pub fn ctx(&self) -> PrimeContext {
        self.ctx
    }

    pub fn x(&self) -> &BigRational {
        &self.x
    }

    pub fn y(&self) -> &BigRational {
        &self.y
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    /// Whether the element lies in `F0` (no `sqrt(u)` part).
    pub fn is_rational(&self) -> bool {
        self.y.is_zero()
    }

    /// Normalized valuation with `val(varpi) = 1`; `None` for zero.
    pub fn valuation(&self) -> Option<i64> {
        match (val_p(&self.x, self.ctx.p), val_p(&self.y, self.ctx.p)) {
            (None, None) => None,
            (Some(a), None) => Some(a),
            (None, Some(b)) => Some(b),
            (Some(a), Some(b)) => Some(a.min(b)),
        }
    }

    /// Galois conjugate `x - y*sqrt(u)`.
    pub fn conj(&self) -> Self {
        FElement {
            ctx: self.ctx,
            x: self.x.clone(),
            y: -self.y.clone(),
        }
    }

    /// `Nm(a) = a * conj(a) = x^2 - u*y^2`, an element of `F0`.
    pub fn norm(&self) -> BigRational {
        let u = BigRational::from_integer(self.ctx.u.into());
        &self.x * &self.x - u * &self.y * &self.y
    }

    /// `Tr(a) = a + conj(a) = 2x`, an element of `F0`.
    pub fn trace(&self) -> BigRational {
        &self.x + &self.x
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let n = self.norm();
        Ok(FElement {
            ctx: self.ctx,
            x: &self.x / &n,
            y: -(&self.y / &n),
        })
    }

    /// Multiply by a scalar from `F0`.
    pub fn scale(&self, c: &BigRational) -> Self {
        FElement {
            ctx: self.ctx,
            x: &self.x * c,
            y: &self.y * c,
        }
    }
}

impl Add for &FElement {
    type Output = FElement;
    fn add(self, rhs: &FElement) -> FElement {
        debug_assert_eq!(self.ctx, rhs.ctx);
        FElement {
            ctx: self.ctx,
            x: &self.x + &rhs.x,
            y: &self.y + &rhs.y,
        }
    }
}

impl Sub for &FElement {
    type Output = FElement;
    fn sub(self, rhs: &FElement) -> FElement {
        debug_assert_eq!(self.ctx, rhs.ctx);
        FElement {
            ctx: self.ctx,
            x: &self.x - &rhs.x,
            y: &self.y - &rhs.y,
        }
    }
}

impl Mul for &FElement {
    type Output = FElement;
    fn mul(self, rhs: &FElement) -> FElement {
        debug_assert_eq!(self.ctx, rhs.ctx);
        let u = BigRational::from_integer(self.ctx.u.into());
        FElement {
            ctx: self.ctx,
            x: &self.x * &rhs.x + &u * &self.y * &rhs.y,
            y: &self.x * &rhs.y + &self.y * &rhs.x,
        }
    }
}

impl Neg for &FElement {
    type Output = FElement;
    fn neg(self) -> FElement {
        FElement {
            ctx: self.ctx,
            x: -self.x.clone(),
            y: -self.y.clone(),
        }
    }
}

impl Div for &FElement {
    type Output = FElement;
    /// Panics on zero divisor; use [`FElement::inv`] for a checked path.
    fn div(self, rhs: &FElement) -> FElement {
        self * &rhs.inv().expect("division by zero")
    }
}

/// The four basic field operations as a single entry point.
pub fn f_arith(a: &FElement, b: &FElement, op: ArithOp) -> Result<FElement> {
    Ok(match op {
        ArithOp::Add => a + b,
        ArithOp::Sub => a - b,
        ArithOp::Mul => a * b,
        ArithOp::Div => a * &b.inv()?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// The truncated ring `O_F / varpi^k O_F`, elements `(a, b)` meaning
/// `a + b*sqrt(u)` with `0 <= a, b < p^k`.
#[derive(Debug, Clone, Copy)]
pub struct ResidueRing {
    ctx: PrimeContext,
    k: u32,
    modulus: u64,
}

/// An element of a [`ResidueRing`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ResidueElt {
    pub a: u64,
    pub b: u64,
}

impl ResidueRing {
    pub fn new(ctx: PrimeContext, k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::IndexOutOfRange("precision k must be >= 1".into()));
        }
        let modulus = ctx
            .p
            .checked_pow(k)
            .filter(|&m| m < (1u64 << 31))
            .ok_or_else(|| Error::BudgetExceeded {
                estimate: (ctx.p as f64).powi(k as i32),
                cap: (1u64 << 31) as f64,
            })?;
        Ok(ResidueRing { ctx, k, modulus })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// `p^{2k}`, the number of elements.
    pub fn cardinality(&self) -> u128 {
        (self.modulus as u128) * (self.modulus as u128)
    }

    pub fn zero(&self) -> ResidueElt {
        ResidueElt { a: 0, b: 0 }
    }

    pub fn one(&self) -> ResidueElt {
        ResidueElt { a: 1 % self.modulus, b: 0 }
    }

    pub fn add(&self, x: ResidueElt, y: ResidueElt) -> ResidueElt {
        ResidueElt {
            a: (x.a + y.a) % self.modulus,
            b: (x.b + y.b) % self.modulus,
        }
    }

    pub fn neg(&self, x: ResidueElt) -> ResidueElt {
        ResidueElt {
            a: (self.modulus - x.a) % self.modulus,
            b: (self.modulus - x.b) % self.modulus,
        }
    }

    pub fn mul(&self, x: ResidueElt, y: ResidueElt) -> ResidueElt {
        let m = self.modulus;
        let u = self.ctx.u % m;
        ResidueElt {
            a: (mod_mul(x.a, y.a, m) + mod_mul(u, mod_mul(x.b, y.b, m), m)) % m,
            b: (mod_mul(x.a, y.b, m) + mod_mul(x.b, y.a, m)) % m,
        }
    }

    pub fn conj(&self, x: ResidueElt) -> ResidueElt {
        ResidueElt {
            a: x.a,
            b: (self.modulus - x.b) % self.modulus,
        }
    }

    /// `Nm(x) = a^2 - u b^2` in `Z/p^k`.
    pub fn norm(&self, x: ResidueElt) -> u64 {
        let m = self.modulus;
        let u = self.ctx.u % m;
        (mod_mul(x.a, x.a, m) + m - mod_mul(u, mod_mul(x.b, x.b, m), m) % m) % m
    }

    /// Reduce an exact element with non-negative valuation.
    pub fn reduce(&self, e: &FElement) -> Result<ResidueElt> {
        Ok(ResidueElt {
            a: reduce_rational(&e.x, self.ctx.p, self.modulus)?,
            b: reduce_rational(&e.y, self.ctx.p, self.modulus)?,
        })
    }

    /// Yields each of the `p^{2k}` residues exactly once, in lexicographic
    /// `(a, b)` order.
    pub fn enumerate(&self) -> impl Iterator<Item = ResidueElt> {
        let m = self.modulus;
        (0..m).flat_map(move |a| (0..m).map(move |b| ResidueElt { a, b }))
    }
}

/// Reduce an exact rational with p-integral denominator modulo `p^k`.
pub(crate) fn reduce_rational(r: &BigRational, p: u64, modulus: u64) -> Result<u64> {
    let m = BigInt::from(modulus);
    let num = r.numer().mod_floor(&m);
    let den = r.denom().mod_floor(&m);
    let den_u: u64 = (&den)
        .try_into()
        .map_err(|_| Error::Parse("denominator reduction".into()))?;
    if den_u == 0 || den_u % p == 0 {
        return Err(Error::BadDenominator(r.to_string()));
    }
    let num_u: u64 = (&num).try_into().map_err(|_| Error::Parse("numerator reduction".into()))?;
    // invert the denominator modulo p^k
    let inv = mod_inverse(den_u, modulus).ok_or_else(|| Error::BadDenominator(r.to_string()))?;
    Ok(mod_mul(num_u, inv, modulus))
}

pub(crate) fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    let (mut t, mut new_t) = (0i128, 1i128);
    let (mut r, mut new_r) = (m as i128, (a % m) as i128);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    if r != 1 {
        return None;
    }
    Some(((t % m as i128 + m as i128) % m as i128) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx3() -> PrimeContext {
        PrimeContext::new(3).unwrap()
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn least_nonresidue() {
        assert_eq!(ctx3().u(), 2);
        assert_eq!(PrimeContext::new(5).unwrap().u(), 2);
        assert_eq!(PrimeContext::new(7).unwrap().u(), 3);
        assert_eq!(PrimeContext::new(11).unwrap().u(), 2);
        assert!(PrimeContext::new(2).is_err());
        assert!(PrimeContext::new(9).is_err());
    }

    #[test]
    fn defining_relation() {
        let ctx = ctx3();
        let s = FElement::sqrt_u(ctx);
        let sq = &s * &s;
        assert_eq!(sq, FElement::from_int(ctx, 2));
    }

    #[test]
    fn norm_expansion() {
        let ctx = ctx3();
        let one = FElement::one(ctx);
        let s = FElement::sqrt_u(ctx);
        let a = &one + &s;
        let b = &one - &s;
        // (1 + sqrt(u))(1 - sqrt(u)) = 1 - u
        assert_eq!(&a * &b, FElement::from_int(ctx, 1 - 2));
    }

    #[test]
    fn scalar_cancellation() {
        // (3 + 6 sqrt 2)/3 = 1 + 2 sqrt 2
        let ctx = ctx3();
        let a = FElement::new(ctx, rat(3, 1), rat(6, 1)).unwrap();
        let b = FElement::from_int(ctx, 3);
        let q = f_arith(&a, &b, ArithOp::Div).unwrap();
        assert_eq!(q, FElement::new(ctx, rat(1, 1), rat(2, 1)).unwrap());
    }

    #[test]
    fn valuations() {
        let ctx = ctx3();
        assert_eq!(FElement::one(ctx).valuation(), Some(0));
        let a = FElement::new(ctx, rat(3, 1), rat(6, 1)).unwrap();
        assert_eq!(a.valuation(), Some(1));
        let third = FElement::new(ctx, rat(1, 3), rat(0, 1)).unwrap();
        assert_eq!(third.valuation(), Some(-1));
        assert_eq!(FElement::zero(ctx).valuation(), None);
    }

    #[test]
    fn conj_norm_trace_examples() {
        let ctx = ctx3();
        let s = FElement::sqrt_u(ctx);
        assert_eq!(s.conj(), -&s);
        assert_eq!(s.norm(), rat(-2, 1));
        assert_eq!(s.trace(), rat(0, 1));

        let one = FElement::one(ctx);
        assert_eq!(one.conj(), one);
        assert_eq!(one.norm(), rat(1, 1));
        assert_eq!(one.trace(), rat(2, 1));

        let a = &one + &s; // 1 + sqrt(2)
        assert_eq!(a.conj(), &one - &s);
        assert_eq!(a.norm(), rat(-1, 1));
        assert_eq!(a.trace(), rat(2, 1));
    }

    #[test]
    fn constructor_rejects_non_p_power_denominators() {
        let ctx = ctx3();
        assert!(FElement::new(ctx, rat(1, 2), rat(0, 1)).is_err());
        assert!(FElement::new(ctx, rat(1, 9), rat(1, 27)).is_ok());
    }

    #[test]
    fn valuation_is_multiplicative_and_conj_compatible() {
        // val(ab) = val(a) + val(b) and val(Nm a) = 2 val(a) on a sample
        let ctx = ctx3();
        let samples = [
            FElement::new(ctx, rat(1, 3), rat(2, 1)).unwrap(),
            FElement::new(ctx, rat(4, 1), rat(6, 1)).unwrap(),
            FElement::new(ctx, rat(9, 1), rat(0, 1)).unwrap(),
            FElement::new(ctx, rat(5, 9), rat(7, 3)).unwrap(),
        ];
        for a in &samples {
            for b in &samples {
                let ab = a * b;
                assert_eq!(
                    ab.valuation().unwrap(),
                    a.valuation().unwrap() + b.valuation().unwrap()
                );
            }
            assert_eq!(a.conj().conj(), *a);
            assert_eq!(
                val_p(&a.norm(), 3).unwrap(),
                2 * a.valuation().unwrap(),
                "norm valuation doubles for {a}"
            );
        }
    }

    #[test]
    fn unit_norm_is_unit_exhaustive_mod_p() {
        // a valuation-0 element has unit norm; checked exhaustively mod p
        for p in [3u64, 5, 7] {
            let ctx = PrimeContext::new(p).unwrap();
            let ring = ResidueRing::new(ctx, 1).unwrap();
            for e in ring.enumerate() {
                if e.a % p != 0 || e.b % p != 0 {
                    assert_ne!(ring.norm(e) % p, 0, "p={p} elt=({},{})", e.a, e.b);
                }
            }
        }
    }

    #[test]
    fn residue_cardinalities() {
        let ctx = ctx3();
        assert_eq!(ResidueRing::new(ctx, 1).unwrap().enumerate().count(), 9);
        assert_eq!(ResidueRing::new(ctx, 2).unwrap().enumerate().count(), 81);
        let ctx5 = PrimeContext::new(5).unwrap();
        assert_eq!(ResidueRing::new(ctx5, 1).unwrap().enumerate().count(), 25);
    }

    #[test]
    fn reduction_is_ring_hom_commuting_with_conj() {
        use rand::{Rng, SeedableRng};
        let ctx = ctx3();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for k in 1u32..=3 {
            let ring = ResidueRing::new(ctx, k).unwrap();
            for _ in 0..1000 {
                let a = FElement::new(ctx, rat(rng.gen_range(-50..50), 1), rat(rng.gen_range(-50..50), 1)).unwrap();
                let b = FElement::new(ctx, rat(rng.gen_range(-50..50), 1), rat(rng.gen_range(-50..50), 1)).unwrap();
                let ra = ring.reduce(&a).unwrap();
                let rb = ring.reduce(&b).unwrap();
                assert_eq!(ring.reduce(&(&a + &b)).unwrap(), ring.add(ra, rb));
                assert_eq!(ring.reduce(&(&a * &b)).unwrap(), ring.mul(ra, rb));
                assert_eq!(ring.reduce(&a.conj()).unwrap(), ring.conj(ra));
            }
        }
    }
}
