//! Hermitian matrices and lattices over `F`: duals, vertex types, Jordan
//! diagonalization, the orthogonal (Schur) splitting used by the recursion,
//! moment matrices, and admissible Schwartz-function descriptors.

use crate::error::{Error, Result};
use crate::field::{FElement, PrimeContext};
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

/// A hermitian `n x n` matrix over `F`: equal to its conjugate transpose,
/// with diagonal entries in `F0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HermMatrix {
    ctx: PrimeContext,
    n: usize,
    entries: Vec<FElement>, // row-major
}

impl HermMatrix {
    pub fn new(ctx: PrimeContext, n: usize, entries: Vec<FElement>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::RankMismatch {
                expected: n * n,
                got: entries.len(),
            });
        }
        let m = HermMatrix { ctx, n, entries };
        for i in 0..n {
            for j in 0..n {
                if m.at(i, j) != &m.at(j, i).conj() {
                    return Err(Error::Parse(format!(
                        "not hermitian at ({i},{j}): {} vs conj {}",
                        m.at(i, j),
                        m.at(j, i)
                    )));
                }
            }
        }
        Ok(m)
    }

    /// Diagonal matrix with entries `varpi^{e_i}`.
    pub fn diag_powers(ctx: PrimeContext, exps: &[i64]) -> Self {
        let n = exps.len();
        let mut entries = vec![FElement::zero(ctx); n * n];
        for (i, &e) in exps.iter().enumerate() {
            entries[i * n + i] = FElement::varpi_pow(ctx, e);
        }
        HermMatrix { ctx, n, entries }
    }

    pub fn diag(ctx: PrimeContext, d: &[FElement]) -> Result<Self> {
        let n = d.len();
        let mut entries = vec![FElement::zero(ctx); n * n];
        for (i, e) in d.iter().enumerate() {
            if !e.is_rational() {
                return Err(Error::Parse(format!("diagonal entry {e} not in F0")));
            }
            entries[i * n + i] = e.clone();
        }
        Ok(HermMatrix { ctx, n, entries })
    }

    pub fn identity(ctx: PrimeContext, n: usize) -> Self {
        Self::diag_powers(ctx, &vec![0; n])
    }

    pub fn ctx(&self) -> PrimeContext {
        self.ctx
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn at(&self, i: usize, j: usize) -> &FElement {
        &self.entries[i * self.n + j]
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| i == j || self.at(i, j).is_zero()))
    }

    /// Exact determinant (Laplace expansion is fine for the small ranks here;
    /// fraction-free elimination keeps it quick for n up to a dozen).
    pub fn det(&self) -> FElement {
        // Gaussian elimination over the field F, exact.
        let n = self.n;
        if n == 0 {
            return FElement::one(self.ctx);
        }
        let mut m: Vec<FElement> = self.entries.clone();
        let mut det = FElement::one(self.ctx);
        for col in 0..n {
            let pivot_row = (col..n).find(|&r| !m[r * n + col].is_zero());
            let Some(pr) = pivot_row else {
                return FElement::zero(self.ctx);
            };
            if pr != col {
                for j in 0..n {
                    m.swap(pr * n + j, col * n + j);
                }
                det = -&det;
            }
            let piv = m[col * n + col].clone();
            det = &det * &piv;
            let inv = piv.inv().expect("nonzero pivot");
            for r in col + 1..n {
                let factor = &m[r * n + col] * &inv;
                if factor.is_zero() {
                    continue;
                }
                for j in col..n {
                    let sub = &factor * &m[col * n + j];
                    m[r * n + j] = &m[r * n + j] - &sub;
                }
            }
        }
        det
    }

    pub fn is_nonsingular(&self) -> bool {
        !self.det().is_zero()
    }

    /// Conjugate transpose (equals self for a valid hermitian matrix).
    pub fn conj_transpose(&self) -> Self {
        let n = self.n;
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(self.at(j, i).conj());
            }
        }
        HermMatrix { ctx: self.ctx, n, entries }
    }

    /// Exact inverse.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.n;
        let mut a: Vec<FElement> = self.entries.clone();
        let mut b: Vec<FElement> = HermMatrix::identity(self.ctx, n).entries;
        for col in 0..n {
            let pr = (col..n)
                .find(|&r| !a[r * n + col].is_zero())
                .ok_or(Error::Singular)?;
            if pr != col {
                for j in 0..n {
                    a.swap(pr * n + j, col * n + j);
                    b.swap(pr * n + j, col * n + j);
                }
            }
            let inv = a[col * n + col].inv().map_err(|_| Error::Singular)?;
            for j in 0..n {
                a[col * n + j] = &a[col * n + j] * &inv;
                b[col * n + j] = &b[col * n + j] * &inv;
            }
            for r in 0..n {
                if r == col || a[r * n + col].is_zero() {
                    continue;
                }
                let f = a[r * n + col].clone();
                for j in 0..n {
                    let s = &f * &a[col * n + j];
                    a[r * n + j] = &a[r * n + j] - &s;
                    let s = &f * &b[col * n + j];
                    b[r * n + j] = &b[r * n + j] - &s;
                }
            }
        }
        Ok(HermMatrix { ctx: self.ctx, n, entries: b })
    }

    /// `conj(U)^t * S * U` for a general square matrix `U` (row-major).
    pub fn congruence(&self, u: &[FElement]) -> Self {
        let n = self.n;
        debug_assert_eq!(u.len(), n * n);
        // tmp = S * U
        let mut tmp = vec![FElement::zero(self.ctx); n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = FElement::zero(self.ctx);
                for l in 0..n {
                    acc = &acc + &(self.at(i, l) * &u[l * n + j]);
                }
                tmp[i * n + j] = acc;
            }
        }
        // out = conj(U)^t * tmp
        let mut out = vec![FElement::zero(self.ctx); n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = FElement::zero(self.ctx);
                for l in 0..n {
                    acc = &acc + &(&u[l * n + i].conj() * &tmp[l * n + j]);
                }
                out[i * n + j] = acc;
            }
        }
        HermMatrix { ctx: self.ctx, n, entries: out }
    }

    /// Simultaneously permute rows and columns: entry `(i,j)` of the result is
    /// `(perm[i], perm[j])` of self.
    pub fn permute(&self, perm: &[usize]) -> Self {
        let n = self.n;
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(self.at(perm[i], perm[j]).clone());
            }
        }
        HermMatrix { ctx: self.ctx, n, entries }
    }

    /// Scale every entry by `varpi^e`.
    pub fn scale_varpi(&self, e: i64) -> Self {
        let c = FElement::varpi_pow(self.ctx, e);
        let entries = self.entries.iter().map(|x| x * &c).collect();
        HermMatrix { ctx: self.ctx, n: self.n, entries }
    }

    /// Minimum valuation over all entries (`None` for the zero matrix).
    pub fn min_valuation(&self) -> Option<i64> {
        self.entries.iter().filter_map(|e| e.valuation()).min()
    }

    /// The principal submatrix dropping row/column `i`.
    pub fn drop_index(&self, i: usize) -> Self {
        let n = self.n;
        let mut entries = Vec::with_capacity((n - 1) * (n - 1));
        for r in 0..n {
            if r == i {
                continue;
            }
            for c in 0..n {
                if c == i {
                    continue;
                }
                entries.push(self.at(r, c).clone());
            }
        }
        HermMatrix { ctx: self.ctx, n: n - 1, entries }
    }
}

/// Gram matrix of the dual lattice in the dual basis: the conjugate-inverse.
pub fn dual_gram(s: &HermMatrix) -> Result<HermMatrix> {
    if !s.is_nonsingular() {
        return Err(Error::Singular);
    }
    Ok(s.inverse()?.conj_transpose())
}

/// Result of a vertex-lattice test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexType {
    NotVertex,
    Type(usize),
}

/// Type of the lattice with Gram `s`: `t = n - rank(S mod varpi)` when `S`
/// and `varpi * S^{-1}` are both integral, `NotVertex` otherwise.
pub fn vertex_type(s: &HermMatrix) -> Result<VertexType> {
    if !s.is_nonsingular() {
        return Err(Error::Singular);
    }
    let (exps, _) = diagonalize(s)?;
    if exps.iter().all(|&e| e == 0 || e == 1) {
        Ok(VertexType::Type(exps.iter().filter(|&&e| e == 1).count()))
    } else {
        Ok(VertexType::NotVertex)
    }
}

/// Jordan diagonalization of a nonsingular hermitian matrix: returns sorted
/// exponents `e_1 <= ... <= e_n` and an invertible transform `U` with
/// `conj(U)^t S U` diagonal with entry valuations exactly `e_i`.
///
/// Diagonal entries are `varpi^{e_i}` times exact units; the unit parts are
/// not normalized to 1 (exact rational arithmetic cannot solve the norm
/// equation in general), which no downstream computation depends on.
pub fn diagonalize(s: &HermMatrix) -> Result<(Vec<i64>, Vec<FElement>)> {
    let n = s.n();
    let ctx = s.ctx();
    if !s.is_nonsingular() {
        return Err(Error::Singular);
    }
    let mut work = s.clone();
    let mut u = HermMatrix::identity(ctx, n).entries; // accumulated transform
    let mut exps = Vec::with_capacity(n);

    for step in 0..n {
        // pick the minimum-valuation entry in the remaining block,
        // preferring diagonal, then lexicographic position
        let mut best: Option<(i64, bool, usize, usize)> = None;
        for i in step..n {
            for j in step..n {
                if let Some(v) = work.at(i, j).valuation() {
                    let diag = i == j;
                    let better = match &best {
                        None => true,
                        Some((bv, bdiag, bi, bj)) => {
                            (v, !diag, i.min(j), i.max(j)) < (*bv, !*bdiag, *bi.min(bj), *bi.max(bj))
                        }
                    };
                    if better {
                        best = Some((v, diag, i, j));
                    }
                }
            }
        }
        let (v, diag, bi, bj) = best.ok_or(Error::Singular)?;

        if !diag {
            // symmetrize: add column bj into column bi with c in {1, sqrt(u)}
            // so the new diagonal entry achieves valuation v (2 is a unit).
            let cands = [FElement::one(ctx), FElement::sqrt_u(ctx)];
            let mut done = false;
            for c in cands {
                let mut probe = work.at(bi, bi).clone();
                let cross = &work.at(bi, bj).conj() * &c; // conj((b_i, c b_j)) term
                let cross = &cross + &cross.conj();
                probe = &probe + &cross;
                let nc = &(&c.conj() * &c) * work.at(bj, bj);
                probe = &probe + &nc;
                if probe.valuation() == Some(v) {
                    add_column(&mut work, &mut u, bj, bi, &c);
                    done = true;
                    break;
                }
            }
            debug_assert!(done, "symmetrization must expose the minimal valuation");
        }
        let pivot_pos = if diag { bi } else { bi };
        if pivot_pos != step {
            swap_columns(&mut work, &mut u, pivot_pos, step);
        }
        debug_assert_eq!(work.at(step, step).valuation(), Some(v));
        exps.push(v);

        // clear the pivot row/column by Gram-Schmidt
        let inv = work.at(step, step).inv().expect("pivot nonzero");
        for j in step + 1..n {
            let coeff = -&(&inv * work.at(step, j));
            if coeff.is_zero() {
                continue;
            }
            add_column(&mut work, &mut u, step, j, &coeff);
        }
    }

    // sort ascending with a simultaneous permutation
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| exps[i]);
    let sorted: Vec<i64> = order.iter().map(|&i| exps[i]).collect();
    // permute columns of U accordingly
    let mut u_sorted = vec![FElement::zero(ctx); n * n];
    for (new_j, &old_j) in order.iter().enumerate() {
        for i in 0..n {
            u_sorted[i * n + new_j] = u[i * n + old_j].clone();
        }
    }
    Ok((sorted, u_sorted))
}

/// column operation: col[to] += c * col[from], applied as a congruence
fn add_column(work: &mut HermMatrix, u: &mut [FElement], from: usize, to: usize, c: &FElement) {
    let n = work.n;
    debug_assert_ne!(from, to);
    // S <- conj(E)^t S E with E = I + c * e_{from,to}
    // new column `to` of S: S[:,to] += c * S[:,from]
    for i in 0..n {
        let add = &(work.at(i, from) * c);
        let cur = work.at(i, to).clone();
        work.entries[i * n + to] = &cur + add;
    }
    // new row `to`: S[to,:] += conj(c) * S[from,:]
    let cc = c.conj();
    for j in 0..n {
        let add = &(&cc * work.at(from, j));
        let cur = work.at(to, j).clone();
        work.entries[to * n + j] = &cur + add;
    }
    for i in 0..n {
        let add = &u[i * n + from] * c;
        let cur = u[i * n + to].clone();
        u[i * n + to] = &cur + &add;
    }
}

fn swap_columns(work: &mut HermMatrix, u: &mut [FElement], a: usize, b: usize) {
    let n = work.n;
    for i in 0..n {
        work.entries.swap(i * n + a, i * n + b);
    }
    for j in 0..n {
        work.entries.swap(a * n + j, b * n + j);
    }
    for i in 0..n {
        u.swap(i * n + a, i * n + b);
    }
}

/// Splitting mode for [`gram_schmidt_split`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitMode {
    /// pivot diagonal entry must have valuation 0
    Unit,
    /// pivot diagonal entry must have valuation -1
    Codual,
}

/// Move `pivot` to the front and split off its Schur complement
/// `T_flat = T_2 - t1^{-1} t21 t12`, exactly.
pub fn gram_schmidt_split(
    s: &HermMatrix,
    pivot: usize,
    mode: SplitMode,
) -> Result<(FElement, HermMatrix)> {
    let n = s.n();
    if pivot >= n {
        return Err(Error::IndexOutOfRange(format!("pivot {pivot} >= {n}")));
    }
    let need = match mode {
        SplitMode::Unit => 0,
        SplitMode::Codual => -1,
    };
    let t1 = s.at(pivot, pivot).clone();
    if t1.valuation() != Some(need) {
        return Err(Error::PivotValuation {
            need,
            found: t1.valuation(),
        });
    }
    Ok((t1.clone(), schur_complement(s, pivot)))
}

/// Schur complement dropping row/column `pivot`:
/// `T_flat[i][j] = T[i][j] - T[i][pivot] * t1^{-1} * T[pivot][j]`.
pub fn schur_complement(s: &HermMatrix, pivot: usize) -> HermMatrix {
    let n = s.n();
    let ctx = s.ctx();
    let inv = s.at(pivot, pivot).inv().expect("pivot nonzero");
    let mut entries = Vec::with_capacity((n - 1) * (n - 1));
    for i in 0..n {
        if i == pivot {
            continue;
        }
        for j in 0..n {
            if j == pivot {
                continue;
            }
            let corr = &(s.at(i, pivot) * &inv) * s.at(pivot, j);
            entries.push(s.at(i, j) - &corr);
        }
    }
    HermMatrix::new(ctx, n - 1, entries).expect("Schur complement is hermitian")
}

/// The two possible entries of a weight vector: `Z` marks `1_L`, `Y` marks
/// `1_{L^sharp}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Weight {
    Z,
    Y,
}

/// A weight vector `w in {Z, Y}^n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WeightVector(pub Vec<Weight>);

impl WeightVector {
    pub fn parse(s: &str) -> Result<Self> {
        let mut v = Vec::new();
        for c in s.chars() {
            match c {
                'Z' | 'z' => v.push(Weight::Z),
                'Y' | 'y' => v.push(Weight::Y),
                _ => return Err(Error::Parse(format!("bad weight character {c:?}"))),
            }
        }
        if v.is_empty() {
            return Err(Error::Parse("empty weight vector".into()));
        }
        Ok(WeightVector(v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of `Z` entries.
    pub fn a(&self) -> usize {
        self.0.iter().filter(|w| **w == Weight::Z).count()
    }

    /// Number of `Y` entries.
    pub fn b(&self) -> usize {
        self.len() - self.a()
    }

    pub fn pure_z(n: usize) -> Self {
        WeightVector(vec![Weight::Z; n])
    }

    pub fn sorted(a: usize, b: usize) -> Self {
        let mut v = vec![Weight::Z; a];
        v.extend(vec![Weight::Y; b]);
        WeightVector(v)
    }

    /// The permutation sorting this weight to `(Z^a, Y^b)`: returns `perm`
    /// with `sorted[i] = self[perm[i]]`.
    pub fn sorting_permutation(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by_key(|&i| self.0[i]);
        idx
    }
}

impl std::fmt::Display for WeightVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for w in &self.0 {
            write!(f, "{}", if *w == Weight::Z { 'Z' } else { 'Y' })?;
        }
        Ok(())
    }
}

/// Descriptor of an admissible Schwartz function `phi^{[t]}_w`: a weight
/// vector and a vertex-lattice type `t`.
///
/// Type-0 functions are weight-agnostic (`L = L^sharp`), so construction
/// normalizes them to all-`Z`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AdmissibleFunction {
    weight: WeightVector,
    type_t: usize,
}

impl AdmissibleFunction {
    pub fn new(weight: WeightVector, type_t: usize) -> Result<Self> {
        let n = weight.len();
        if type_t > n {
            return Err(Error::IndexOutOfRange(format!("type {type_t} > rank {n}")));
        }
        let weight = if type_t == 0 {
            WeightVector::pure_z(n)
        } else {
            weight
        };
        Ok(AdmissibleFunction { weight, type_t })
    }

    pub fn pure(n: usize, type_t: usize) -> Result<Self> {
        Self::new(WeightVector::pure_z(n), type_t)
    }

    pub fn n(&self) -> usize {
        self.weight.len()
    }

    pub fn type_t(&self) -> usize {
        self.type_t
    }

    pub fn weight(&self) -> &WeightVector {
        &self.weight
    }

    pub fn a(&self) -> usize {
        self.weight.a()
    }

    pub fn b(&self) -> usize {
        self.weight.b()
    }

    /// Determinant-valuation parity of the hermitian space containing a
    /// type-`t` vertex lattice of this rank.
    pub fn space_parity(&self) -> u8 {
        (self.type_t % 2) as u8
    }

    /// The matched function of lower type `t` (same weight) on the opposite
    /// space.
    pub fn matched(&self, t: usize) -> Result<AdmissibleFunction> {
        AdmissibleFunction::new(self.weight.clone(), t)
    }

    /// Canonical moment matrix of the sorted weight: the Gram of the standard
    /// basis with `a` vectors from `L^{[t]}` and `b` from `L^{[t],sharp}`.
    pub fn canonical_moment(&self, ctx: PrimeContext) -> HermMatrix {
        moment_matrix(ctx, self.n(), self.type_t, self.a(), self.b())
            .expect("canonical moment in range")
    }
}

/// The moment matrix `S^{[h]}_{a,b}`:
/// `diag(1^{(n-h)}, varpi^{(h-b)}, (varpi^{-1})^{b})` when `h >= b`, and
/// `diag(1^{(n-h)}, (varpi^{-1})^{h})` when `h < b`.
pub fn moment_matrix(
    ctx: PrimeContext,
    n: usize,
    h: usize,
    a: usize,
    b: usize,
) -> Result<HermMatrix> {
    if h > n || a + b != n {
        return Err(Error::IndexOutOfRange(format!(
            "moment matrix out of range: n={n} h={h} a={a} b={b}"
        )));
    }
    let mut exps = Vec::with_capacity(n);
    if h >= b {
        exps.extend(std::iter::repeat(0).take(n - h));
        exps.extend(std::iter::repeat(1).take(h - b));
        exps.extend(std::iter::repeat(-1).take(b));
    } else {
        exps.extend(std::iter::repeat(0).take(n - h));
        exps.extend(std::iter::repeat(-1).take(h));
    }
    Ok(HermMatrix::diag_powers(ctx, &exps))
}

/// Wrapper recording the `(n, h, a, b)` that generated a moment matrix.
#[derive(Debug, Clone)]
pub struct MomentMatrix {
    pub matrix: HermMatrix,
    pub n: usize,
    pub h: usize,
    pub a: usize,
    pub b: usize,
}

impl MomentMatrix {
    pub fn new(ctx: PrimeContext, n: usize, h: usize, a: usize, b: usize) -> Result<Self> {
        Ok(MomentMatrix {
            matrix: moment_matrix(ctx, n, h, a, b)?,
            n,
            h,
            a,
            b,
        })
    }
}

/// Determinant-valuation parity of a hermitian space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpaceParity {
    Even,
    Odd,
}

/// Whether the (unramified) space of the given determinant parity represents
/// a nonsingular `T` of the same rank.
pub fn represents(parity: SpaceParity, t: &HermMatrix) -> Result<bool> {
    let d = t.det();
    if d.is_zero() {
        return Err(Error::Singular);
    }
    let v = d.valuation().unwrap();
    Ok(match parity {
        SpaceParity::Even => v.rem_euclid(2) == 0,
        SpaceParity::Odd => v.rem_euclid(2) == 1,
    })
}

pub fn parity_of(v: i64) -> SpaceParity {
    if v.rem_euclid(2) == 0 {
        SpaceParity::Even
    } else {
        SpaceParity::Odd
    }
}

/// Helper constructing an `FElement` from a rational pair.
pub fn felt(ctx: PrimeContext, x: BigRational, y: BigRational) -> FElement {
    FElement::new(ctx, x, y).expect("valid coordinates")
}

/// `varpi^e` as a rational.
pub fn varpi_rat(ctx: PrimeContext, e: i64) -> BigRational {
    let p = num_bigint::BigInt::from(ctx.p());
    if e >= 0 {
        BigRational::from_integer(p.pow(e as u32))
    } else {
        BigRational::new(num_bigint::BigInt::one(), p.pow((-e) as u32))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    fn ctx() -> PrimeContext {
        PrimeContext::new(3).unwrap()
    }

    fn fz(c: PrimeContext, n: i64) -> FElement {
        FElement::from_int(c, n)
    }

    #[test]
    fn dual_gram_examples() {
        let c = ctx();
        let s = HermMatrix::diag_powers(c, &[1]);
        let d = dual_gram(&s).unwrap();
        assert_eq!(d, HermMatrix::diag_powers(c, &[-1]));

        let id = HermMatrix::identity(c, 3);
        assert_eq!(dual_gram(&id).unwrap(), id);

        let s = HermMatrix::diag_powers(c, &[0, 1]);
        assert_eq!(dual_gram(&s).unwrap(), HermMatrix::diag_powers(c, &[0, -1]));
    }

    #[test]
    fn dual_gram_involutive_up_to_congruence() {
        let c = ctx();
        for exps in [vec![0i64, 1], vec![2, -1], vec![1, 1, 0]] {
            let s = HermMatrix::diag_powers(c, &exps);
            let dd = dual_gram(&dual_gram(&s).unwrap()).unwrap();
            let (e1, _) = diagonalize(&s).unwrap();
            let (e2, _) = diagonalize(&dd).unwrap();
            assert_eq!(e1, e2);
        }
    }

    #[test]
    fn vertex_types() {
        let c = ctx();
        assert_eq!(
            vertex_type(&HermMatrix::diag_powers(c, &[0, 1])).unwrap(),
            VertexType::Type(1)
        );
        assert_eq!(
            vertex_type(&HermMatrix::diag_powers(c, &[2])).unwrap(),
            VertexType::NotVertex
        );
        assert_eq!(
            vertex_type(&HermMatrix::identity(c, 3)).unwrap(),
            VertexType::Type(0)
        );
    }

    #[test]
    fn diagonalize_hyperbolic_plane() {
        let c = ctx();
        let zero = FElement::zero(c);
        let one = FElement::one(c);
        let s = HermMatrix::new(c, 2, vec![zero.clone(), one.clone(), one, zero]).unwrap();
        let (exps, _) = diagonalize(&s).unwrap();
        assert_eq!(exps, vec![0, 0]);
    }

    #[test]
    fn diagonalize_sorts() {
        let c = ctx();
        let s = HermMatrix::diag_powers(c, &[1, 0]);
        let (exps, _) = diagonalize(&s).unwrap();
        assert_eq!(exps, vec![0, 1]);
    }

    #[test]
    fn diagonalize_derived_example() {
        // [[1,1],[1,1+3]] at p=3: pivot at (1,1), Schur complement is 3
        let c = ctx();
        let one = FElement::one(c);
        let s = HermMatrix::new(c, 2, vec![one.clone(), one.clone(), one, fz(c, 4)]).unwrap();
        let (exps, u) = diagonalize(&s).unwrap();
        assert_eq!(exps, vec![0, 1]);
        // transform reassembles exactly to a diagonal matrix
        let d = s.congruence(&u);
        assert!(d.is_diagonal());
        assert_eq!(d.at(0, 0).valuation(), Some(0));
        assert_eq!(d.at(1, 1).valuation(), Some(1));
    }

    #[test]
    fn diagonalize_reassembles_on_random_matrices() {
        use rand::{Rng, SeedableRng};
        let c = ctx();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for n in 1..=3usize {
            let mut done = 0;
            while done < 200 {
                let mut entries = vec![FElement::zero(c); n * n];
                for i in 0..n {
                    for j in 0..=i {
                        if i == j {
                            entries[i * n + i] = fz(c, rng.gen_range(-40..40));
                        } else {
                            let e = FElement::new(
                                c,
                                BigRational::from_integer(rng.gen_range(-9..9).into()),
                                BigRational::from_integer(rng.gen_range(-9..9).into()),
                            )
                            .unwrap();
                            entries[i * n + j] = e.conj();
                            entries[j * n + i] = e;
                        }
                    }
                }
                let s = HermMatrix::new(c, n, entries).unwrap();
                if !s.is_nonsingular() {
                    continue;
                }
                done += 1;
                let (exps, u) = diagonalize(&s).unwrap();
                let d = s.congruence(&u);
                assert!(d.is_diagonal(), "must diagonalize exactly");
                let mut vals: Vec<i64> =
                    (0..n).map(|i| d.at(i, i).valuation().unwrap()).collect();
                vals.sort();
                assert_eq!(vals, exps);
            }
        }
    }

    #[test]
    fn split_examples() {
        let c = ctx();
        // diag(1, varpi^3), pivot 0, unit
        let s = HermMatrix::diag_powers(c, &[0, 3]);
        let (t1, rest) = gram_schmidt_split(&s, 0, SplitMode::Unit).unwrap();
        assert_eq!(t1, FElement::one(c));
        assert_eq!(rest, HermMatrix::diag_powers(c, &[3]));

        // [[1,1],[1,1+varpi]]: Schur complement (varpi)
        let one = FElement::one(c);
        let s = HermMatrix::new(c, 2, vec![one.clone(), one.clone(), one, fz(c, 4)]).unwrap();
        let (t1, rest) = gram_schmidt_split(&s, 0, SplitMode::Unit).unwrap();
        assert_eq!(t1, FElement::one(c));
        assert_eq!(rest.at(0, 0).valuation(), Some(1));

        // diag(varpi^{-1}, 1), pivot 0, codual
        let s = HermMatrix::diag_powers(c, &[-1, 0]);
        let (t1, rest) = gram_schmidt_split(&s, 0, SplitMode::Codual).unwrap();
        assert_eq!(t1, FElement::varpi_pow(c, -1));
        assert_eq!(rest, HermMatrix::diag_powers(c, &[0]));

        // precondition violation
        assert!(gram_schmidt_split(&HermMatrix::diag_powers(c, &[1, 0]), 0, SplitMode::Unit).is_err());
    }

    #[test]
    fn split_then_diagonalize_matches_direct() {
        use rand::{Rng, SeedableRng};
        let c = ctx();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut done = 0;
        while done < 50 {
            let n = 3;
            let mut entries = vec![FElement::zero(c); n * n];
            for i in 0..n {
                for j in 0..=i {
                    if i == j {
                        entries[i * n + i] = fz(c, rng.gen_range(-30..30));
                    } else {
                        let e = fz(c, rng.gen_range(-9..9));
                        entries[i * n + j] = e.clone();
                        entries[j * n + i] = e;
                    }
                }
            }
            let Ok(s) = HermMatrix::new(c, n, entries) else { continue };
            if !s.is_nonsingular() || s.at(0, 0).valuation() != Some(0) {
                continue;
            }
            done += 1;
            let (t1, rest) = gram_schmidt_split(&s, 0, SplitMode::Unit).unwrap();
            let (mut e_split, _) = diagonalize(&rest).unwrap();
            e_split.push(t1.valuation().unwrap());
            e_split.sort();
            let (e_direct, _) = diagonalize(&s).unwrap();
            assert_eq!(e_split, e_direct);
        }
    }

    #[test]
    fn moment_matrix_patterns() {
        let c = ctx();
        assert_eq!(
            moment_matrix(c, 3, 1, 3, 0).unwrap(),
            HermMatrix::diag_powers(c, &[0, 0, 1])
        );
        assert_eq!(
            moment_matrix(c, 1, 1, 0, 1).unwrap(),
            HermMatrix::diag_powers(c, &[-1])
        );
        assert_eq!(
            moment_matrix(c, 2, 1, 0, 2).unwrap(),
            HermMatrix::diag_powers(c, &[0, -1])
        );
        assert!(moment_matrix(c, 2, 3, 2, 0).is_err());
    }

    #[test]
    fn moment_matrix_vertex_types_agree() {
        let c = ctx();
        for n in 1..=4usize {
            for h in 0..=n {
                let m = moment_matrix(c, n, h, n, 0).unwrap();
                assert_eq!(vertex_type(&m).unwrap(), VertexType::Type(h));
            }
        }
    }

    #[test]
    fn represents_parity() {
        let c = ctx();
        assert!(represents(SpaceParity::Even, &HermMatrix::identity(c, 2)).unwrap());
        assert!(!represents(SpaceParity::Odd, &HermMatrix::identity(c, 1)).unwrap());
        assert!(represents(SpaceParity::Even, &HermMatrix::diag_powers(c, &[1, 1])).unwrap());
    }

    #[test]
    fn admissible_type0_weight_agnostic() {
        let w = WeightVector::parse("ZYY").unwrap();
        let f = AdmissibleFunction::new(w, 0).unwrap();
        assert_eq!(f.weight(), &WeightVector::pure_z(3));
        assert_eq!(f.a(), 3);
    }

    #[test]
    fn det_zero_detected() {
        let c = ctx();
        let one = FElement::one(c);
        let s = HermMatrix::new(c, 2, vec![one.clone(), one.clone(), one.clone(), one]).unwrap();
        assert!(s.det().is_zero());
        assert!(diagonalize(&s).is_err());
    }
}
