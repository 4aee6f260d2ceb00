//! Closed-form layer: the rank-1-target density formula, the three 1x1
//! specializations and their derivatives, the recursion reducer, and density
//! polynomials with their central derivatives.
//!
//! Densities attached to `r` added hyperbolic planes are polynomials in the
//! column variable `Ytilde = (-q)^{-2r}`; the plane variable of the main
//! polynomial is `X = (-q)^{-r}`, so `F(X) = Ftilde(X^2)` is always even in
//! `X` for the families produced here.

use crate::error::{Error, Result};
use crate::field::{FElement, PrimeContext};
use crate::herm::{AdmissibleFunction, HermMatrix, Weight};
use crate::laurent::{rational_pow, LaurentQ};
use num_rational::BigRational;
use num_traits::{One, Zero};

/// `sum_j min(xi_j, a)`, which equals the pairing of the conjugate partition
/// of `xi` with `(1^a)`.
fn conj_pairing(xi: &[i64], a: i64) -> i64 {
    xi.iter().map(|&x| x.min(a).max(0)).sum()
}

/// A polynomial in `Ytilde = (-q)^{-2r}` with Laurent-polynomial coefficients
/// in `q`. Densities as functions of the augmentation count `r` live here.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FPoly {
    /// coefficient of `Ytilde^i`
    coeffs: Vec<LaurentQ>,
}

impl FPoly {
    pub fn zero() -> Self {
        FPoly { coeffs: vec![] }
    }

    pub fn one() -> Self {
        FPoly {
            coeffs: vec![LaurentQ::one()],
        }
    }

    pub fn constant(c: LaurentQ) -> Self {
        if c.is_zero() {
            Self::zero()
        } else {
            FPoly { coeffs: vec![c] }
        }
    }

    pub fn from_coeffs(mut coeffs: Vec<LaurentQ>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        FPoly { coeffs }
    }

    pub fn coeffs(&self) -> &[LaurentQ] {
        &self.coeffs
    }

    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add_term(&mut self, deg: usize, c: LaurentQ) {
        if c.is_zero() {
            return;
        }
        if self.coeffs.len() <= deg {
            self.coeffs.resize(deg + 1, LaurentQ::zero());
        }
        self.coeffs[deg] = &self.coeffs[deg] + &c;
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn mul(&self, rhs: &FPoly) -> FPoly {
        if self.is_zero() || rhs.is_zero() {
            return FPoly::zero();
        }
        let mut out = vec![LaurentQ::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        FPoly::from_coeffs(out)
    }

    pub fn scale(&self, c: &LaurentQ) -> FPoly {
        FPoly::from_coeffs(self.coeffs.iter().map(|x| x * c).collect())
    }

    /// Value at `Ytilde = 1`, i.e. the density at `r = 0`.
    pub fn value_at_center(&self) -> LaurentQ {
        let mut acc = LaurentQ::zero();
        for c in &self.coeffs {
            acc = &acc + c;
        }
        acc
    }

    /// `-d/dYtilde` at `Ytilde = 1`: the column-convention central derivative.
    pub fn neg_derivative_at_center(&self) -> LaurentQ {
        let mut acc = LaurentQ::zero();
        for (i, c) in self.coeffs.iter().enumerate() {
            if i == 0 {
                continue;
            }
            acc = &acc + &c.scale(&BigRational::from_integer((i as i64).into()));
        }
        -&acc
    }

    /// Symbolic value at a given `r >= 0`: substitute `Ytilde = q^{-2r}`.
    pub fn value_at_r(&self, r: u32) -> LaurentQ {
        let mut acc = LaurentQ::zero();
        for (i, c) in self.coeffs.iter().enumerate() {
            acc = &acc + &(c * &LaurentQ::q_pow(-2 * (r as i64) * (i as i64)));
        }
        acc
    }

    /// Numeric value at `q = q_val`, `Ytilde = q_val^{-2r}`.
    pub fn eval(&self, q_val: &BigRational, r: u32) -> BigRational {
        self.value_at_r(r).eval(q_val)
    }
}

/// The rank-1-target closed form for `alpha(diag(varpi^{xi}), (varpi^lam))`
/// as a Laurent polynomial in `q`, for `xi` sorted descending with entries
/// `>= 0` and `lam >= 0`.
pub fn sankaran_alpha(xi: &[i64], lam: i64) -> LaurentQ {
    sankaran_fpoly(xi, 0, lam).value_at_center()
}

/// The same closed form as a polynomial in `Ytilde`, where the lattice also
/// carries `2r` extra diagonal entries `varpi^{aug_exp}` (`aug_exp` is 0 for
/// a plain unit augmentation, 1 after a global `varpi`-scaling).
///
/// Entries of `xi` must be `>= 0`; a negative target (`lam < 0`) yields the
/// zero polynomial since an integral lattice represents nothing of negative
/// valuation.
pub fn sankaran_fpoly(xi: &[i64], aug_exp: i64, lam: i64) -> FPoly {
    assert!(xi.iter().all(|&e| e >= 0), "xi entries must be >= 0");
    assert!((0..=1).contains(&aug_exp));
    if lam < 0 {
        return FPoly::zero();
    }
    let k_b = xi.len() as i64 - 1;
    assert!(k_b >= 0, "xi must have at least one entry");
    let mut f = FPoly::one();
    // middle terms: (1 + (-q)^{-1}) * (-1)^a * (-q)^{-k_b a + <xi', 1^a>},
    // each carrying Ytilde^{a - min(aug_exp, a)}
    let unit_factor = &LaurentQ::one() + &LaurentQ::nq_pow(-1);
    for a in 1..=lam {
        let exp = -k_b * a + conj_pairing(xi, a);
        let sign = if a % 2 == 0 { 1 } else { -1 };
        let coeff = (&unit_factor * &LaurentQ::nq_pow(exp))
            .scale(&BigRational::from_integer(sign.into()));
        let deg = (a - a.min(aug_exp)) as usize;
        f.add_term(deg, coeff);
    }
    // boundary term at a = lam + 1 with an extra (-q)^{-1}
    let a = lam + 1;
    let exp = -k_b * a + conj_pairing(xi, a);
    let sign = if (lam + 1) % 2 == 0 { 1 } else { -1 };
    let coeff = (&LaurentQ::nq_pow(-1) * &LaurentQ::nq_pow(exp))
        .scale(&BigRational::from_integer(sign.into()));
    let deg = (a - a.min(aug_exp)) as usize;
    f.add_term(deg, coeff);
    f
}

/// The three 1x1 closed values/derivatives of the base-case table.
///
/// `s_exp` is the valuation of the 1x1 Gram entry (0, 1, or -1).
/// With `want_derivative = false` the piecewise value is returned for either
/// parity of `lam`; with `want_derivative = true` only the parity at which
/// the value vanishes is accepted.
pub fn hironaka_value(s_exp: i64, lam: i64, want_derivative: bool) -> Result<LaurentQ> {
    let even = lam.rem_euclid(2) == 0;
    let one = LaurentQ::one();
    let lam_rat = |num: i64, den: i64| BigRational::new(num.into(), den.into());
    match s_exp {
        0 => {
            if lam < 0 {
                return Ok(LaurentQ::zero());
            }
            if !want_derivative {
                Ok(if even {
                    &one - &LaurentQ::nq_pow(-1)
                } else {
                    LaurentQ::zero()
                })
            } else if even {
                Err(Error::ParityMismatch(
                    "derivative of alpha((1), .) needs odd lam".into(),
                ))
            } else {
                // (1 - (-q)^{-1}) (lam+1)/2
                Ok((&one - &LaurentQ::nq_pow(-1)).scale(&lam_rat(lam + 1, 2)))
            }
        }
        1 => {
            if lam < 0 {
                return Ok(LaurentQ::zero());
            }
            if !want_derivative {
                Ok(if even {
                    LaurentQ::zero()
                } else {
                    &one + &LaurentQ::q_pow(1)
                })
            } else if !even {
                Err(Error::ParityMismatch(
                    "derivative of alpha((varpi), .) needs even lam".into(),
                ))
            } else {
                // (1+q) lam/2 + 1
                Ok(&(&one + &LaurentQ::q_pow(1)).scale(&lam_rat(lam, 2)) + &one)
            }
        }
        -1 => {
            if lam < -1 {
                return Ok(LaurentQ::zero());
            }
            if !want_derivative {
                Ok(if even {
                    LaurentQ::zero()
                } else {
                    &one + &LaurentQ::q_pow(-1)
                })
            } else if !even {
                Err(Error::ParityMismatch(
                    "derivative of alpha((varpi^{-1}), .) needs even lam".into(),
                ))
            } else {
                // (1+q^{-1}) lam/2 + q^{-1}
                Ok(&(&one + &LaurentQ::q_pow(-1)).scale(&lam_rat(lam, 2)) + &LaurentQ::q_pow(-1))
            }
        }
        _ => Err(Error::IndexOutOfRange(format!(
            "hironaka table covers s_exp in {{0, 1, -1}}, got {s_exp}"
        ))),
    }
}

/// One peeled factor of a recursion reduction: the rank-1-target weighted
/// density `alpha_t(r, 1_Lambda)` for a vertex lattice or its dual.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rank1Factor {
    /// rank of the lattice
    pub rank: usize,
    /// vertex type of the underlying lattice
    pub type_t: usize,
    /// whether the dual lattice indicator is used (a `Y` factor)
    pub dual: bool,
    /// valuation of the 1x1 target
    pub lam: i64,
}

impl Rank1Factor {
    /// The factor as a `Ytilde`-polynomial in the weighted (self-dual
    /// measure) normalization, symbolic in `q`.
    pub fn weighted_fpoly(&self) -> FPoly {
        let (xi, aug_exp, lam, conv_exp): (Vec<i64>, i64, i64, i64) = if !self.dual {
            // Gram exponents (1^t, 0^{rank-t}); conversion q^{-t}
            let mut xi = vec![1i64; self.type_t];
            xi.extend(std::iter::repeat(0).take(self.rank - self.type_t));
            (xi, 0, self.lam, -(self.type_t as i64))
        } else {
            // dual Gram (0^{rank-t}, -1^t); after the varpi-scaling the base
            // exponents are (1^{rank-t}, 0^t) and the target gains one.
            // conversion q^{-val det - sigma} = q^{t - 1}
            let mut xi = vec![1i64; self.rank - self.type_t];
            xi.extend(std::iter::repeat(0).take(self.type_t));
            (xi, 1, self.lam + 1, self.type_t as i64 - 1)
        };
        sankaran_fpoly(&xi, aug_exp, lam).scale(&LaurentQ::q_pow(conv_exp))
    }
}

/// Which recursion case a reduction step used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReduceCase {
    /// unit pivot at a `Z` position, type unchanged
    ZUnit,
    /// valuation -1 pivot at a `Y` position, type drops by one
    YCodual,
}

#[derive(Debug, Clone)]
pub struct ReduceStep {
    pub case: ReduceCase,
    pub factor: Rank1Factor,
    /// exponent of the measure factor `q^{measure_exp}` carried by the step:
    /// 0 for unit pivots, `-(rank - 1)` for codual pivots (the off-diagonal
    /// moment constraints against a norm-`varpi^{-1}` vector each cost `q`;
    /// calibrated against the counting oracle and pinned by the volume
    /// lemma's split-independence)
    pub measure_exp: i64,
}

/// Outcome of a reduction chain.
#[derive(Debug, Clone)]
pub enum ReduceTail {
    /// fully reduced; the last rank-1 problem is recorded as a factor
    Done,
    /// no eligible pivot at rank >= 2; the remaining problem is returned
    Stuck {
        t_rest: HermMatrix,
        phi_rest: AdmissibleFunction,
    },
}

#[derive(Debug, Clone)]
pub struct ReductionTrace {
    pub steps: Vec<ReduceStep>,
    pub tail: ReduceTail,
}

impl ReductionTrace {
    pub fn fully_reduced(&self) -> bool {
        matches!(self.tail, ReduceTail::Done)
    }

    /// Product of the weighted factors and step measure factors, when fully
    /// reduced.
    pub fn weighted_fpoly(&self) -> Option<FPoly> {
        if !self.fully_reduced() {
            return None;
        }
        let mut f = FPoly::one();
        for s in &self.steps {
            f = f.mul(&s.factor.weighted_fpoly());
            if s.measure_exp != 0 {
                f = f.scale(&LaurentQ::q_pow(s.measure_exp));
            }
        }
        Some(f)
    }
}

/// Search for an eligible pivot among the positions of the given weight.
/// Returns the pivot index after an in-place symmetrization if the minimal
/// valuation sits off the diagonal of the same-weight block.
pub(crate) fn find_pivot(
    t: &mut HermMatrix,
    weights: &[Weight],
    want: Weight,
    want_val: i64,
) -> Option<usize> {
    let n = t.n();
    for i in 0..n {
        if weights[i] == want && t.at(i, i).valuation() == Some(want_val) {
            return Some(i);
        }
    }
    // off-diagonal within the same-weight block: make a diagonal pivot by a
    // unimodular column move (2 and u are units, so one of c = 1, sqrt(u)
    // exposes the minimal valuation on the diagonal)
    let ctx = t.ctx();
    for i in 0..n {
        for j in 0..n {
            if i == j || weights[i] != want || weights[j] != want {
                continue;
            }
            if t.at(i, j).valuation() == Some(want_val) {
                for c in [FElement::one(ctx), FElement::sqrt_u(ctx)] {
                    let cross = &t.at(i, j).conj() * &c;
                    let cross = &cross + &cross.conj();
                    let probe = &(t.at(i, i) + &cross) + &(&(&c.conj() * &c) * t.at(j, j));
                    if probe.valuation() == Some(want_val) {
                        // congruence by the elementary matrix E = I + c e_{j,i}
                        // (column i += c * column j)
                        let mut u_mat = identity_entries(ctx, n);
                        u_mat[j * n + i] = c.clone();
                        *t = t.congruence(&u_mat);
                        debug_assert_eq!(t.at(i, i).valuation(), Some(want_val));
                        return Some(i);
                    }
                }
            }
        }
    }
    None
}

fn identity_entries(ctx: PrimeContext, n: usize) -> Vec<FElement> {
    let mut v = vec![FElement::zero(ctx); n * n];
    for i in 0..n {
        v[i * n + i] = FElement::one(ctx);
    }
    v
}

/// Greedily apply the two recursion cases, producing a factorization of
/// `alpha_T(r, phi)` into rank-1-target factors. The trace ends either fully
/// reduced (rank-1 terminal included as the last factor) or stuck.
pub fn recursion_reduce(t: &HermMatrix, phi: &AdmissibleFunction) -> Result<ReductionTrace> {
    if t.n() != phi.n() {
        return Err(Error::RankMismatch {
            expected: phi.n(),
            got: t.n(),
        });
    }
    if !t.is_nonsingular() {
        return Err(Error::Singular);
    }
    let mut cur = t.clone();
    let mut weights: Vec<Weight> = phi.weight().0.clone();
    let mut type_t = phi.type_t();
    let mut steps = Vec::new();

    loop {
        let n = cur.n();
        if n == 1 {
            let lam = cur.at(0, 0).valuation().unwrap();
            let dual = weights[0] == Weight::Y && type_t > 0;
            steps.push(ReduceStep {
                case: if dual { ReduceCase::YCodual } else { ReduceCase::ZUnit },
                factor: Rank1Factor {
                    rank: 1,
                    type_t,
                    dual,
                    lam,
                },
                measure_exp: 0,
            });
            return Ok(ReductionTrace {
                steps,
                tail: ReduceTail::Done,
            });
        }
        // case 1: Z-weight unit pivot, needs type != n
        let mut applied = false;
        if type_t != n {
            if let Some(i) = find_pivot(&mut cur, &weights, Weight::Z, 0) {
                steps.push(ReduceStep {
                    case: ReduceCase::ZUnit,
                    factor: Rank1Factor {
                        rank: n,
                        type_t,
                        dual: false,
                        lam: 0,
                    },
                    measure_exp: 0,
                });
                cur = crate::herm::schur_complement(&cur, i);
                weights.remove(i);
                applied = true;
            }
        }
        if !applied && type_t != 0 {
            if let Some(i) = find_pivot(&mut cur, &weights, Weight::Y, -1) {
                steps.push(ReduceStep {
                    case: ReduceCase::YCodual,
                    factor: Rank1Factor {
                        rank: n,
                        type_t,
                        dual: true,
                        lam: -1,
                    },
                    measure_exp: -(n as i64 - 1),
                });
                cur = crate::herm::schur_complement(&cur, i);
                weights.remove(i);
                type_t -= 1;
                // a freshly exhausted type normalizes Y weights away
                if type_t == 0 {
                    for w in weights.iter_mut() {
                        *w = Weight::Z;
                    }
                }
                applied = true;
            }
        }
        if !applied {
            let phi_rest = AdmissibleFunction::new(
                crate::herm::WeightVector(weights.clone()),
                type_t,
            )?;
            return Ok(ReductionTrace {
                steps,
                tail: ReduceTail::Stuck {
                    t_rest: cur,
                    phi_rest,
                },
            });
        }
    }
}

/// Derivative conventions for the central derivative of a density polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum DerivConvention {
    /// differentiate in the plane variable `X = (-q)^{-r}`
    Plane,
    /// differentiate in the added-column variable `(-q)^{-2r}`; half the
    /// plane value on even polynomials
    Column,
}

/// The density polynomial `F_T(X, phi)` at a fixed numeric `q`, stored in the
/// plane variable `X`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityPoly {
    pub q_value: BigRational,
    /// coefficient of `X^i`
    pub coeffs: Vec<BigRational>,
    /// number of interpolation nodes used to stabilize (0 for closed forms)
    pub stabilization_order: usize,
}

impl DensityPoly {
    /// Build from a `Ytilde`-polynomial with exact rational coefficients:
    /// `F(X) = Ftilde(X^2)`.
    pub fn from_column_coeffs(
        q_value: BigRational,
        ytilde_coeffs: &[BigRational],
        stabilization_order: usize,
    ) -> Self {
        let mut coeffs = vec![BigRational::zero(); ytilde_coeffs.len().saturating_mul(2).max(1)];
        for (i, c) in ytilde_coeffs.iter().enumerate() {
            coeffs[2 * i] = c.clone();
        }
        while coeffs.last().is_some_and(|c| c.is_zero()) && coeffs.len() > 1 {
            coeffs.pop();
        }
        DensityPoly {
            q_value,
            coeffs,
            stabilization_order,
        }
    }

    pub fn from_fpoly(q_value: BigRational, f: &FPoly) -> Self {
        let yt: Vec<BigRational> = f.coeffs().iter().map(|c| c.eval(&q_value)).collect();
        Self::from_column_coeffs(q_value, &yt, 0)
    }

    /// Evaluate at `X = (-q)^{-r}`.
    pub fn eval_at_r(&self, r: u32) -> BigRational {
        let x = rational_pow(&-self.q_value.clone(), -(r as i64));
        self.eval(&x)
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn value_at_center(&self) -> BigRational {
        self.coeffs.iter().fold(BigRational::zero(), |a, c| a + c)
    }
}

/// `-d/dX F(X)` at `X = 1` under the chosen convention.
pub fn derivative_at_one(f: &DensityPoly, convention: DerivConvention) -> Result<BigRational> {
    match convention {
        DerivConvention::Plane => {
            let mut acc = BigRational::zero();
            for (i, c) in f.coeffs.iter().enumerate() {
                acc += c * BigRational::from_integer((i as i64).into());
            }
            Ok(-acc)
        }
        DerivConvention::Column => {
            let mut acc = BigRational::zero();
            for (i, c) in f.coeffs.iter().enumerate() {
                if i % 2 == 1 {
                    if !c.is_zero() {
                        return Err(Error::ParityMismatch(
                            "column convention undefined: polynomial has odd-degree terms".into(),
                        ));
                    }
                    continue;
                }
                acc += c * BigRational::from_integer(((i / 2) as i64).into());
            }
            Ok(-acc)
        }
    }
}

/// Exact Newton interpolation through `(nodes[i], values[i])`, returned in
/// the monomial basis.
pub fn newton_interpolate(nodes: &[BigRational], values: &[BigRational]) -> Vec<BigRational> {
    assert_eq!(nodes.len(), values.len());
    let n = nodes.len();
    if n == 0 {
        return vec![];
    }
    // divided differences
    let mut dd: Vec<BigRational> = values.to_vec();
    for level in 1..n {
        for i in (level..n).rev() {
            let num = &dd[i] - &dd[i - 1];
            let den = &nodes[i] - &nodes[i - level];
            dd[i] = num / den;
        }
    }
    // expand Newton form to monomials
    let mut poly = vec![BigRational::zero(); n];
    let mut basis = vec![BigRational::zero(); n];
    basis[0] = BigRational::one(); // running product starts at 1
    let mut basis_len = 1;
    for (i, c) in dd.iter().enumerate() {
        for (j, b) in basis.iter().enumerate().take(basis_len) {
            poly[j] += c * b;
        }
        if i + 1 < n {
            // basis *= (x - nodes[i])
            let mut next = vec![BigRational::zero(); basis_len + 1];
            for j in 0..basis_len {
                next[j + 1] += &basis[j];
                next[j] -= &basis[j] * &nodes[i];
            }
            basis_len += 1;
            basis[..basis_len].clone_from_slice(&next[..basis_len]);
        }
    }
    while poly.last().is_some_and(|c| c.is_zero()) && poly.len() > 1 {
        poly.pop();
    }
    poly
}

fn eval_poly(coeffs: &[BigRational], x: &BigRational) -> BigRational {
    let mut acc = BigRational::zero();
    for c in coeffs.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

/// Interpolate a density polynomial in the column variable from a value
/// source `r -> alpha_T(r, phi)`, growing the node count until the interpolant
/// predicts the next unseen value twice in a row.
pub fn interpolate_stabilized(
    q_value: &BigRational,
    mut value_at: impl FnMut(u32) -> Result<BigRational>,
    max_nodes: u32,
) -> Result<DensityPoly> {
    let mut nodes: Vec<BigRational> = Vec::new();
    let mut values: Vec<BigRational> = Vec::new();
    let node = |r: u32| rational_pow(q_value, -2 * (r as i64));
    let mut confirmations = 0u32;
    let mut r = 0u32;
    loop {
        let v = value_at(r)?;
        if !nodes.is_empty() {
            let coeffs = newton_interpolate(&nodes, &values);
            if eval_poly(&coeffs, &node(r)) == v {
                confirmations += 1;
            } else {
                confirmations = 0;
            }
        }
        nodes.push(node(r));
        values.push(v);
        if confirmations >= 2 {
            // refit on all but the confirming nodes to keep the degree minimal
            let fit = newton_interpolate(
                &nodes[..nodes.len() - confirmations as usize],
                &values[..values.len() - confirmations as usize],
            );
            return Ok(DensityPoly::from_column_coeffs(
                q_value.clone(),
                &fit,
                nodes.len(),
            ));
        }
        r += 1;
        if r > max_nodes {
            return Err(Error::Unstabilized {
                k_cap: max_nodes,
                best: "interpolation did not stabilize".into(),
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn conj_pairing_is_prefix_sum_of_conjugate() {
        // xi = (2, 1): conjugate partition (2, 1): prefix sums 2, 3, 3, ...
        assert_eq!(conj_pairing(&[2, 1], 1), 2);
        assert_eq!(conj_pairing(&[2, 1], 2), 3);
        assert_eq!(conj_pairing(&[2, 1], 5), 3);
    }

    #[test]
    fn sankaran_matches_hironaka_values_and_derivatives() {
        // all six families of the 1x1 table, symbolically in q, lam in 0..=6
        for lam in 0..=6i64 {
            // family (1): S = (1), xi = (0)
            let f = sankaran_fpoly(&[0], 0, lam);
            assert_eq!(
                f.value_at_center(),
                hironaka_value(0, lam, false).unwrap(),
                "value family 1 lam={lam}"
            );
            if lam % 2 == 1 {
                assert_eq!(
                    f.neg_derivative_at_center(),
                    hironaka_value(0, lam, true).unwrap(),
                    "derivative family 1 lam={lam}"
                );
            }
            // family (2): S = (varpi), xi = (1)
            let f = sankaran_fpoly(&[1], 0, lam);
            assert_eq!(
                f.value_at_center(),
                hironaka_value(1, lam, false).unwrap(),
                "value family 2 lam={lam}"
            );
            if lam % 2 == 0 {
                assert_eq!(
                    f.neg_derivative_at_center(),
                    hironaka_value(1, lam, true).unwrap(),
                    "derivative family 2 lam={lam}"
                );
            }
            // family (3): S = (varpi^{-1}) via the scaled system
            // xi = (0) scaled with aug_exp = 1 and target lam + 1
            let f = sankaran_fpoly(&[0], 1, lam + 1);
            assert_eq!(
                f.value_at_center(),
                hironaka_value(-1, lam, false).unwrap(),
                "value family 3 lam={lam}"
            );
            if lam % 2 == 0 {
                assert_eq!(
                    f.neg_derivative_at_center(),
                    hironaka_value(-1, lam, true).unwrap(),
                    "derivative family 3 lam={lam}"
                );
            }
        }
    }

    #[test]
    fn sankaran_shift_identity() {
        // alpha(diag(varpi^{-1}, 1_k), (varpi^lam)) = alpha(diag(varpi 1_k, 1), (varpi^{lam+1}))
        // as Laurent polynomials: the scaled dual profile matches the shifted plain one
        for k in 0..=3usize {
            for lam in 0..=4i64 {
                let mut shifted = vec![1i64; k];
                shifted.push(0);
                let plain = sankaran_alpha(&shifted, lam + 1);
                // dual profile: (0^k... ) scaled -> (1^k, 0), target lam+1 (same thing)
                let mut xi = vec![1i64; k];
                xi.push(0);
                assert_eq!(plain, sankaran_alpha(&xi, lam + 1));
            }
        }
    }

    #[test]
    fn hironaka_parity_errors() {
        assert!(hironaka_value(0, 2, true).is_err());
        assert!(hironaka_value(1, 3, true).is_err());
        assert!(hironaka_value(-1, 1, true).is_err());
        assert!(hironaka_value(2, 0, false).is_err());
    }

    #[test]
    fn derivative_conventions() {
        // F(X) = 1 - X: plane convention gives 1, column convention errors
        let f = DensityPoly {
            q_value: r(3, 1),
            coeffs: vec![r(1, 1), r(-1, 1)],
            stabilization_order: 0,
        };
        assert_eq!(derivative_at_one(&f, DerivConvention::Plane).unwrap(), r(1, 1));
        assert!(derivative_at_one(&f, DerivConvention::Column).is_err());

        // constant polynomial: both conventions give 0
        let c = DensityPoly {
            q_value: r(3, 1),
            coeffs: vec![r(4, 3)],
            stabilization_order: 0,
        };
        assert_eq!(derivative_at_one(&c, DerivConvention::Plane).unwrap(), r(0, 1));
        assert_eq!(derivative_at_one(&c, DerivConvention::Column).unwrap(), r(0, 1));

        // even polynomial: plane = 2 * column
        let f = DensityPoly {
            q_value: r(3, 1),
            coeffs: vec![r(1, 1), r(0, 1), r(-1, 1)],
            stabilization_order: 0,
        };
        assert_eq!(derivative_at_one(&f, DerivConvention::Plane).unwrap(), r(2, 1));
        assert_eq!(derivative_at_one(&f, DerivConvention::Column).unwrap(), r(1, 1));
    }

    #[test]
    fn newton_interpolation_exact() {
        // interpolate x^2 - 1/2 through three nodes
        let nodes = vec![r(1, 1), r(1, 9), r(1, 81)];
        let values: Vec<BigRational> = nodes.iter().map(|x| x * x - r(1, 2)).collect();
        let poly = newton_interpolate(&nodes, &values);
        assert_eq!(poly, vec![r(-1, 2), r(0, 1), r(1, 1)]);
    }

    #[test]
    fn interpolate_stabilized_constant() {
        let q = r(3, 1);
        let f = interpolate_stabilized(&q, |_r| Ok(r(4, 3)), 10).unwrap();
        assert_eq!(f.coeffs, vec![r(4, 3)]);
        assert_eq!(f.value_at_center(), r(4, 3));
    }

    #[test]
    fn fpoly_center_values() {
        // the unit-lattice family vanishes at the center for odd lam
        for lam in [1i64, 3, 5] {
            let f = sankaran_fpoly(&[0], 0, lam);
            assert!(f.value_at_center().is_zero());
        }
        // and equals 1 - (-q)^{-1} for even lam
        let f = sankaran_fpoly(&[0], 0, 4);
        assert_eq!(
            f.value_at_center(),
            &LaurentQ::one() - &LaurentQ::nq_pow(-1)
        );
        let one = LaurentQ::one();
        assert!(FPoly::constant(one.clone()).value_at_center() == one);
    }

    #[test]
    fn rank1_factor_conversion_constants() {
        // Z factor, rank 1, type 1, lam 1: q^{-1} * alpha((varpi), (varpi)) = q^{-1}(1+q)
        let f = Rank1Factor {
            rank: 1,
            type_t: 1,
            dual: false,
            lam: 1,
        }
        .weighted_fpoly();
        let v = f.value_at_center();
        assert_eq!(
            v,
            &(&LaurentQ::one() + &LaurentQ::q_pow(1)) * &LaurentQ::q_pow(-1)
        );

        // Y factor, rank 1, type 1, lam -1: conversion q^{0}, value 1 + q^{-1}
        let f = Rank1Factor {
            rank: 1,
            type_t: 1,
            dual: true,
            lam: -1,
        }
        .weighted_fpoly();
        assert_eq!(f.value_at_center(), &LaurentQ::one() + &LaurentQ::q_pow(-1));
    }
}
