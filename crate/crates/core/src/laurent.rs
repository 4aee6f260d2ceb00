//! Exact symbolic layer in the formal variable `q`: Laurent polynomials with
//! rational coefficients and reduced rational functions.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// A Laurent polynomial in `q` over `Q`, canonically stored (no zero
/// coefficients).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LaurentQ {
    coeffs: BTreeMap<i64, BigRational>,
}

impl LaurentQ {
    pub fn zero() -> Self {
        LaurentQ::default()
    }

    pub fn one() -> Self {
        LaurentQ::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        let mut m = BTreeMap::new();
        if !c.is_zero() {
            m.insert(0, c);
        }
        LaurentQ { coeffs: m }
    }

    pub fn from_int(n: i64) -> Self {
        Self::constant(BigRational::from_integer(n.into()))
    }

    /// The monomial `c * q^e`.
    pub fn monomial(e: i64, c: BigRational) -> Self {
        let mut m = BTreeMap::new();
        if !c.is_zero() {
            m.insert(e, c);
        }
        LaurentQ { coeffs: m }
    }

    /// `q^e`.
    pub fn q_pow(e: i64) -> Self {
        Self::monomial(e, BigRational::one())
    }

    /// `(-q)^e = (-1)^e q^e`.
    pub fn nq_pow(e: i64) -> Self {
        let sign = if e.rem_euclid(2) == 0 { 1 } else { -1 };
        Self::monomial(e, BigRational::from_integer(sign.into()))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, e: i64) -> BigRational {
        self.coeffs.get(&e).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&i64, &BigRational)> {
        self.coeffs.iter()
    }

    pub fn min_exp(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i64> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        LaurentQ {
            coeffs: self.coeffs.iter().map(|(e, v)| (*e, v * c)).collect(),
        }
    }

    fn insert_add(m: &mut BTreeMap<i64, BigRational>, e: i64, v: BigRational) {
        if v.is_zero() {
            return;
        }
        match m.entry(e) {
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get() + v;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
            std::collections::btree_map::Entry::Vacant(vac) => {
                vac.insert(v);
            }
        }
    }

    /// Evaluate at an exact rational value of `q`.
    pub fn eval(&self, q: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for (e, c) in &self.coeffs {
            acc += c * rational_pow(q, *e);
        }
        acc
    }

    /// As a constant, if it is one.
    pub fn as_constant(&self) -> Option<BigRational> {
        if self.coeffs.is_empty() {
            Some(BigRational::zero())
        } else if self.coeffs.len() == 1 && self.coeffs.contains_key(&0) {
            Some(self.coeff(0))
        } else {
            None
        }
    }
}

pub fn rational_pow(q: &BigRational, e: i64) -> BigRational {
    if e >= 0 {
        let mut acc = BigRational::one();
        for _ in 0..e {
            acc *= q;
        }
        acc
    } else {
        let inv = q.recip();
        let mut acc = BigRational::one();
        for _ in 0..(-e) {
            acc *= &inv;
        }
        acc
    }
}

impl Add for &LaurentQ {
    type Output = LaurentQ;
    fn add(self, rhs: &LaurentQ) -> LaurentQ {
        let mut m = self.coeffs.clone();
        for (e, v) in &rhs.coeffs {
            LaurentQ::insert_add(&mut m, *e, v.clone());
        }
        LaurentQ { coeffs: m }
    }
}

impl Sub for &LaurentQ {
    type Output = LaurentQ;
    fn sub(self, rhs: &LaurentQ) -> LaurentQ {
        let mut m = self.coeffs.clone();
        for (e, v) in &rhs.coeffs {
            LaurentQ::insert_add(&mut m, *e, -v.clone());
        }
        LaurentQ { coeffs: m }
    }
}

impl Mul for &LaurentQ {
    type Output = LaurentQ;
    fn mul(self, rhs: &LaurentQ) -> LaurentQ {
        let mut m = BTreeMap::new();
        for (e1, c1) in &self.coeffs {
            for (e2, c2) in &rhs.coeffs {
                LaurentQ::insert_add(&mut m, e1 + e2, c1 * c2);
            }
        }
        LaurentQ { coeffs: m }
    }
}

impl Neg for &LaurentQ {
    type Output = LaurentQ;
    fn neg(self) -> LaurentQ {
        LaurentQ {
            coeffs: self.coeffs.iter().map(|(e, v)| (*e, -v.clone())).collect(),
        }
    }
}

impl fmt::Display for LaurentQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.coeffs.iter().rev() {
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            match *e {
                0 => write!(f, "{mag}")?,
                1 => {
                    if mag.is_one() {
                        write!(f, "q")?
                    } else {
                        write!(f, "{mag}*q")?
                    }
                }
                e => {
                    if mag.is_one() {
                        write!(f, "q^{e}")?
                    } else {
                        write!(f, "{mag}*q^{e}")?
                    }
                }
            }
        }
        Ok(())
    }
}

/// A dense polynomial in `q` over `Q` (index = degree).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyQ(Vec<BigRational>);

impl PolyQ {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        PolyQ(coeffs)
    }

    pub fn zero() -> Self {
        PolyQ(vec![])
    }

    pub fn one() -> Self {
        PolyQ(vec![BigRational::one()])
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        if self.0.is_empty() {
            None
        } else {
            Some(self.0.len() - 1)
        }
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.0
    }

    pub fn leading(&self) -> Option<&BigRational> {
        self.0.last()
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        PolyQ(self.0.iter().map(|x| x * c).collect())
    }

    pub fn add(&self, rhs: &PolyQ) -> PolyQ {
        let n = self.0.len().max(rhs.0.len());
        let mut out = vec![BigRational::zero(); n];
        for (i, c) in self.0.iter().enumerate() {
            out[i] += c;
        }
        for (i, c) in rhs.0.iter().enumerate() {
            out[i] += c;
        }
        PolyQ::new(out)
    }

    pub fn sub(&self, rhs: &PolyQ) -> PolyQ {
        self.add(&rhs.scale(&-BigRational::one()))
    }

    pub fn mul(&self, rhs: &PolyQ) -> PolyQ {
        if self.is_zero() || rhs.is_zero() {
            return PolyQ::zero();
        }
        let mut out = vec![BigRational::zero(); self.0.len() + rhs.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        PolyQ::new(out)
    }

    /// Euclidean division: `(quotient, remainder)`.
    pub fn div_rem(&self, rhs: &PolyQ) -> (PolyQ, PolyQ) {
        assert!(!rhs.is_zero(), "division by zero polynomial");
        let mut rem = self.0.clone();
        let dr = rhs.0.len() - 1;
        let lead_inv = rhs.0.last().unwrap().recip();
        if rem.len() < rhs.0.len() {
            return (PolyQ::zero(), PolyQ::new(rem));
        }
        let mut quo = vec![BigRational::zero(); rem.len() - dr];
        for i in (dr..rem.len()).rev() {
            let c = &rem[i] * &lead_inv;
            if c.is_zero() {
                continue;
            }
            quo[i - dr] = c.clone();
            for j in 0..=dr {
                let t = &c * &rhs.0[j];
                rem[i - dr + j] -= t;
            }
        }
        (PolyQ::new(quo), PolyQ::new(rem))
    }

    pub fn gcd(&self, rhs: &PolyQ) -> PolyQ {
        let (mut a, mut b) = (self.clone(), rhs.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        if a.is_zero() {
            a
        } else {
            let inv = a.leading().unwrap().recip();
            a.scale(&inv)
        }
    }

    pub fn eval(&self, q: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.0.iter().rev() {
            acc = acc * q + c;
        }
        acc
    }
}

/// A reduced rational function in `q`: `gcd(num, den) = 1`, monic denominator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalFunctionQ {
    num: PolyQ,
    den: PolyQ,
}

impl RationalFunctionQ {
    pub fn new(num: PolyQ, den: PolyQ) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        if num.is_zero() {
            return RationalFunctionQ {
                num: PolyQ::zero(),
                den: PolyQ::one(),
            };
        }
        let g = num.gcd(&den);
        let (num, _) = num.div_rem(&g);
        let (den, _) = den.div_rem(&g);
        let lead_inv = den.leading().unwrap().recip();
        RationalFunctionQ {
            num: num.scale(&lead_inv),
            den: den.scale(&lead_inv),
        }
    }

    pub fn zero() -> Self {
        RationalFunctionQ {
            num: PolyQ::zero(),
            den: PolyQ::one(),
        }
    }

    pub fn one() -> Self {
        RationalFunctionQ {
            num: PolyQ::one(),
            den: PolyQ::one(),
        }
    }

    pub fn constant(c: BigRational) -> Self {
        RationalFunctionQ {
            num: PolyQ::new(vec![c]),
            den: PolyQ::one(),
        }
    }

    pub fn num(&self) -> &PolyQ {
        &self.num
    }

    pub fn den(&self) -> &PolyQ {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Self::new(
            self.num.mul(&rhs.den).add(&rhs.num.mul(&self.den)),
            self.den.mul(&rhs.den),
        )
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        Self::new(
            self.num.mul(&rhs.den).sub(&rhs.num.mul(&self.den)),
            self.den.mul(&rhs.den),
        )
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        Self::new(self.num.mul(&rhs.num), self.den.mul(&rhs.den))
    }

    pub fn div(&self, rhs: &Self) -> Self {
        assert!(!rhs.is_zero(), "division by zero rational function");
        Self::new(self.num.mul(&rhs.den), self.den.mul(&rhs.num))
    }

    /// Evaluate, `None` on a pole.
    pub fn eval(&self, q: &BigRational) -> Option<BigRational> {
        let d = self.den.eval(q);
        if d.is_zero() {
            None
        } else {
            Some(self.num.eval(q) / d)
        }
    }

    pub fn as_constant(&self) -> Option<BigRational> {
        if self.num.is_zero() {
            return Some(BigRational::zero());
        }
        if self.num.degree() == Some(0) && self.den.degree() == Some(0) {
            Some(&self.num.coeffs()[0] / &self.den.coeffs()[0])
        } else {
            None
        }
    }
}

impl From<&LaurentQ> for RationalFunctionQ {
    fn from(l: &LaurentQ) -> Self {
        if l.is_zero() {
            return RationalFunctionQ::zero();
        }
        let shift = l.min_exp().unwrap().min(0);
        // num = l * q^{-shift}, den = q^{-shift}
        let deg = (l.max_exp().unwrap() - shift) as usize;
        let mut num = vec![BigRational::zero(); deg + 1];
        for (e, c) in l.terms() {
            num[(e - shift) as usize] = c.clone();
        }
        let mut den = vec![BigRational::zero(); (-shift) as usize + 1];
        let dlen = den.len();
        den[dlen - 1] = BigRational::one();
        RationalFunctionQ::new(PolyQ::new(num), PolyQ::new(den))
    }
}

impl fmt::Display for RationalFunctionQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |p: &PolyQ| -> String {
            if p.is_zero() {
                return "0".into();
            }
            let mut parts = Vec::new();
            for (i, c) in p.coeffs().iter().enumerate().rev() {
                if c.is_zero() {
                    continue;
                }
                let t = match i {
                    0 => format!("{c}"),
                    1 => {
                        if c.is_one() {
                            "q".into()
                        } else {
                            format!("{c}*q")
                        }
                    }
                    _ => {
                        if c.is_one() {
                            format!("q^{i}")
                        } else {
                            format!("{c}*q^{i}")
                        }
                    }
                };
                parts.push(t);
            }
            parts.join(" + ")
        };
        if self.den == PolyQ::one() {
            write!(f, "{}", show(&self.num))
        } else {
            write!(f, "({}) / ({})", show(&self.num), show(&self.den))
        }
    }
}

/// Format an exact rational as `num/den`.
pub fn rat_str(r: &BigRational) -> String {
    if r.denom() == &BigInt::one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn laurent_ring_ops() {
        // (1 - (-q)^{-1}) * (1 + q) at q -> exact expansion
        let a = &LaurentQ::one() - &LaurentQ::nq_pow(-1);
        assert_eq!(a.coeff(-1), r(1, 1)); // 1 + q^{-1}
        let b = &LaurentQ::one() + &LaurentQ::q_pow(1);
        let prod = &a * &b;
        // (1 + q^{-1})(1 + q) = q^{-1} + 2 + q
        assert_eq!(prod.coeff(-1), r(1, 1));
        assert_eq!(prod.coeff(0), r(2, 1));
        assert_eq!(prod.coeff(1), r(1, 1));
        assert_eq!(prod.eval(&r(3, 1)), r(16, 3));
    }

    #[test]
    fn nq_pow_signs() {
        assert_eq!(LaurentQ::nq_pow(2).coeff(2), r(1, 1));
        assert_eq!(LaurentQ::nq_pow(3).coeff(3), r(-1, 1));
        assert_eq!(LaurentQ::nq_pow(-1).coeff(-1), r(-1, 1));
    }

    #[test]
    fn poly_divide_and_gcd() {
        // (q^2 - 1) / (q - 1) = q + 1
        let num = PolyQ::new(vec![r(-1, 1), r(0, 1), r(1, 1)]);
        let den = PolyQ::new(vec![r(-1, 1), r(1, 1)]);
        let (q, rem) = num.div_rem(&den);
        assert!(rem.is_zero());
        assert_eq!(q, PolyQ::new(vec![r(1, 1), r(1, 1)]));
        let g = num.gcd(&den);
        assert_eq!(g, den); // monic q - 1
    }

    #[test]
    fn rational_function_reduction() {
        // (q^2 - 1)/(2q - 2) reduces to (q + 1)/2
        let f = RationalFunctionQ::new(
            PolyQ::new(vec![r(-1, 1), r(0, 1), r(1, 1)]),
            PolyQ::new(vec![r(-2, 1), r(2, 1)]),
        );
        assert_eq!(f.eval(&r(5, 1)).unwrap(), r(3, 1));
        // fully reduced: (q + 1)/2 over denominator 1
        assert_eq!(f.den(), &PolyQ::one());
        let g = RationalFunctionQ::new(PolyQ::new(vec![r(1, 2), r(1, 2)]), PolyQ::one());
        assert_eq!(f, g);
    }

    #[test]
    fn laurent_to_rational_function() {
        // 1/(1-(-q)^{-n}) for n = 1: 1/(1 + q^{-1}) = q/(q+1)
        let den_l = &LaurentQ::one() - &LaurentQ::nq_pow(-1);
        let one = RationalFunctionQ::one();
        let f = one.div(&RationalFunctionQ::from(&den_l));
        assert_eq!(f.eval(&r(3, 1)).unwrap(), r(3, 4));
    }
}
