//! Congruence-count tables over `Herm_n(O_F / varpi^K)`.
//!
//! A candidate matrix `x` contributes its hermitian moment `S[x]` to a group
//! element; rows of `x` contribute additively, so the full count table is the
//! convolution of per-row tables over `(Z/p^K)^{n^2}`. Row tables are swept
//! directly; convolutions run in the NTT domain with CRT-exact counts.
//! Everything is cached: row sweeps, transformed rows, and (transform-domain
//! and materialized) products, so interpolation in `r` and verification
//! suites reuse nearly all work.

use super::ntt::{crt, mul_mod, NttPlan};
use crate::error::{Error, Result};
use num_bigint::BigUint;
use rayon::prelude::*;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) struct GroupKey {
    pub p: u64,
    pub k: u32,
    pub n: usize,
}

/// Geometry of the value group `(Z/p^K)^{n^2}`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct GroupSpec {
    pub key: GroupKey,
    pub m_pk: u64,
    pub axes: usize,
    pub size: usize,
}

impl GroupSpec {
    pub fn new(p: u64, k: u32, n: usize, max_group: usize) -> Result<Self> {
        let m_pk = p
            .checked_pow(k)
            .ok_or_else(|| Error::BudgetExceeded {
                estimate: f64::INFINITY,
                cap: max_group as f64,
            })?;
        let axes = n * n;
        let size_f = (m_pk as f64).powi(axes as i32);
        if size_f > max_group as f64 {
            return Err(Error::BudgetExceeded {
                estimate: size_f,
                cap: max_group as f64,
            });
        }
        let size = (m_pk as usize).pow(axes as u32);
        Ok(GroupSpec {
            key: GroupKey { p, k, n },
            m_pk,
            axes,
            size,
        })
    }

    /// Digits are ordered: `n` diagonal entries, then the upper off-diagonal
    /// pairs `(re, im)` in row-major order.
    pub fn index_of(&self, digits: &[u64]) -> usize {
        debug_assert_eq!(digits.len(), self.axes);
        let mut idx: usize = 0;
        for &d in digits.iter().rev() {
            debug_assert!(d < self.m_pk);
            idx = idx * self.m_pk as usize + d as usize;
        }
        idx
    }
}

/// Exponent pattern of one row: the upper triangle (including diagonal) of
/// the pair-coefficient exponents, after any global scaling (so all entries
/// are non-negative).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) struct RowKind {
    pub n: usize,
    /// exps[tri(i,j)] for i <= j
    pub exps: Vec<u8>,
}

impl RowKind {
    pub fn uniform(n: usize, e: u8) -> Self {
        RowKind {
            n,
            exps: vec![e; n * (n + 1) / 2],
        }
    }

    /// Typed row for sorted weight signs `s` (`+1` = Z, `-1` = Y) scaled by
    /// `varpi^sigma`: pair `(i, j)` carries exponent `sigma + (s_i + s_j)/2`.
    pub fn typed(signs: &[i8], sigma: i64) -> Self {
        let n = signs.len();
        let mut exps = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                let e = sigma + (signs[i] as i64 + signs[j] as i64) / 2;
                assert!(e >= 0, "scaling must clear negative exponents");
                exps.push(e as u8);
            }
        }
        RowKind { n, exps }
    }

    fn tri(&self, i: usize, j: usize) -> usize {
        debug_assert!(i <= j);
        // row i starts after n + (n-1) + ... + (n-i+1) entries
        i * self.n - i * (i + 1) / 2 + i + (j - i)
    }
}

/// A sorted multiset of row kinds.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) struct RowsKey(pub Vec<(RowKind, u32)>);

impl RowsKey {
    pub fn from_rows(mut rows: Vec<(RowKind, u32)>) -> Self {
        rows.retain(|(_, c)| *c > 0);
        rows.sort();
        // merge equal kinds
        let mut merged: Vec<(RowKind, u32)> = Vec::new();
        for (k, c) in rows {
            if let Some(last) = merged.last_mut() {
                if last.0 == k {
                    last.1 += c;
                    continue;
                }
            }
            merged.push((k, c));
        }
        RowsKey(merged)
    }

    pub fn total_rows(&self) -> u32 {
        self.0.iter().map(|(_, c)| c).sum()
    }

    /// Remove one row of the kind with the largest multiplicity (ties by kind
    /// order); this makes augmentation chains share cached prefixes.
    fn pop_one(&self) -> Option<(RowKind, RowsKey)> {
        if self.0.is_empty() {
            return None;
        }
        let pos = self
            .0
            .iter()
            .enumerate()
            .max_by_key(|(_, (k, c))| (*c, k.clone()))
            .map(|(i, _)| i)
            .unwrap();
        let kind = self.0[pos].0.clone();
        let mut rest = self.0.clone();
        if rest[pos].1 == 1 {
            rest.remove(pos);
        } else {
            rest[pos].1 -= 1;
        }
        Some((kind, RowsKey(rest)))
    }
}

/// Materialized count table: per-prime residues, CRT on lookup.
pub(crate) struct CountTable {
    pub primes: Vec<u64>,
    pub residues: Vec<Arc<Vec<u64>>>,
}

impl CountTable {
    pub fn get(&self, idx: usize) -> BigUint {
        let rs: Vec<u64> = self.residues.iter().map(|t| t[idx]).collect();
        crt(&rs, &self.primes)
    }
}

#[derive(Default)]
struct Caches {
    plans: HashMap<(u64, u64), Arc<NttPlan>>,
    primes_for_axis: HashMap<u64, Vec<u64>>,
    rows: HashMap<(GroupKey, RowKind), Arc<Vec<u64>>>,
    transformed: HashMap<(GroupKey, RowKind, u64), Arc<Vec<u64>>>,
    products: HashMap<(GroupKey, RowsKey, u64), Arc<Vec<u64>>>,
    materialized: HashMap<(GroupKey, RowsKey, u64), Arc<Vec<u64>>>,
    bytes: usize,
}

static CACHES: OnceLock<Mutex<Caches>> = OnceLock::new();

fn with_caches<T>(f: impl FnOnce(&mut Caches) -> T) -> T {
    let m = CACHES.get_or_init(|| Mutex::new(Caches::default()));
    let mut guard = m.lock().expect("oracle cache lock");
    // crude eviction: drop the big tables once the cache grows past ~1 GiB
    if guard.bytes > 1 << 30 {
        guard.transformed.clear();
        guard.products.clear();
        guard.materialized.clear();
        guard.bytes = 0;
    }
    f(&mut guard)
}

/// Sweep the count table of a single row: for every `rho in (O/p^K)^n`,
/// accumulate at the group element with entries `p^{e_ij} conj(rho_i) rho_j`.
fn sweep_row(spec: &GroupSpec, kind: &RowKind) -> Vec<u64> {
    let m = spec.m_pk;
    let n = spec.key.n;
    // powers of p modulo p^K (exponent >= K collapses to 0)
    let pw = |e: u8| -> u64 {
        if (e as u32) >= spec.key.k {
            0
        } else {
            spec.key.p.pow(e as u32) % m
        }
    };
    let u = crate::oracle::ctx_u(spec.key.p) % m;
    let coords: u64 = m * m; // residues per coordinate
    let total: u64 = coords.pow(n as u32);

    let sweep_chunk = |lo: u64, hi: u64| -> Vec<u64> {
        let mut table = vec![0u64; spec.size];
        let mut a = vec![0u64; n];
        let mut b = vec![0u64; n];
        let mut digits = vec![0u64; spec.axes];
        for code in lo..hi {
            let mut c = code;
            for i in 0..n {
                a[i] = c % m;
                c /= m;
                b[i] = c % m;
                c /= m;
            }
            // diagonal digits: p^{e_ii} * Nm(rho_i)
            for i in 0..n {
                let nm = (mul_mod(a[i], a[i], m) + m * m
                    - mul_mod(u, mul_mod(b[i], b[i], m), m))
                    % m;
                digits[i] = mul_mod(pw(kind.exps[kind.tri(i, i)]), nm, m);
            }
            // off-diagonal digits: p^{e_ij} * conj(rho_i) rho_j
            let mut t = n;
            for i in 0..n {
                for j in i + 1..n {
                    let re = (mul_mod(a[i], a[j], m) + m * m
                        - mul_mod(u, mul_mod(b[i], b[j], m), m))
                        % m;
                    let im = (mul_mod(a[i], b[j], m) + m * m - mul_mod(b[i], a[j], m)) % m;
                    let c = pw(kind.exps[kind.tri(i, j)]);
                    digits[t] = mul_mod(c, re, m);
                    digits[t + 1] = mul_mod(c, im, m);
                    t += 2;
                }
            }
            table[spec.index_of(&digits)] += 1;
        }
        table
    };

    if total > 1 << 22 {
        // parallel sweep in chunks, merged by addition
        let chunks = 16u64;
        let step = total / chunks + 1;
        let parts: Vec<Vec<u64>> = (0..chunks)
            .into_par_iter()
            .map(|c| sweep_chunk(c * step, ((c + 1) * step).min(total)))
            .collect();
        let mut table = vec![0u64; spec.size];
        for part in parts {
            for (t, v) in table.iter_mut().zip(part) {
                *t += v;
            }
        }
        table
    } else {
        sweep_chunk(0, total)
    }
}

fn primes_for(caches: &mut Caches, axis_len: u64, min_bits: u64) -> Vec<u64> {
    let have = caches.primes_for_axis.entry(axis_len).or_default();
    let mut bits: u64 = have.len() as u64 * 60;
    if bits <= min_bits + 1 {
        *have = super::ntt::find_primes(axis_len, min_bits);
        bits = have.len() as u64 * 60;
        debug_assert!(bits > min_bits);
    }
    let mut needed = Vec::new();
    let mut acc = 0u64;
    for &p in have.iter() {
        needed.push(p);
        acc += 60;
        if acc > min_bits + 1 {
            break;
        }
    }
    needed
}

fn plan_for(caches: &mut Caches, p: u64, axis_len: u64, prime: u64) -> Arc<NttPlan> {
    caches
        .plans
        .entry((axis_len, prime))
        .or_insert_with(|| Arc::new(NttPlan::new(prime, p, axis_len as usize)))
        .clone()
}

fn row_table(caches: &mut Caches, spec: &GroupSpec, kind: &RowKind) -> Arc<Vec<u64>> {
    if let Some(t) = caches.rows.get(&(spec.key, kind.clone())) {
        return t.clone();
    }
    let t = Arc::new(sweep_row(spec, kind));
    caches.bytes += t.len() * 8;
    caches.rows.insert((spec.key, kind.clone()), t.clone());
    t
}

fn transformed_row(
    caches: &mut Caches,
    spec: &GroupSpec,
    kind: &RowKind,
    prime: u64,
) -> Arc<Vec<u64>> {
    if let Some(t) = caches.transformed.get(&(spec.key, kind.clone(), prime)) {
        return t.clone();
    }
    let raw = row_table(caches, spec, kind);
    let plan = plan_for(caches, spec.key.p, spec.m_pk, prime);
    let mut v: Vec<u64> = raw.iter().map(|&x| x % prime).collect();
    plan.multidim(&mut v, spec.axes, false);
    let t = Arc::new(v);
    caches.bytes += t.len() * 8;
    caches
        .transformed
        .insert((spec.key, kind.clone(), prime), t.clone());
    t
}

fn product_transformed(
    caches: &mut Caches,
    spec: &GroupSpec,
    rows: &RowsKey,
    prime: u64,
) -> Arc<Vec<u64>> {
    if let Some(t) = caches.products.get(&(spec.key, rows.clone(), prime)) {
        return t.clone();
    }
    let (kind, rest) = rows.pop_one().expect("non-empty row multiset");
    let factor = transformed_row(caches, spec, &kind, prime);
    let result = if rest.0.is_empty() {
        factor
    } else {
        let base = product_transformed(caches, spec, &rest, prime);
        let mut v = Vec::with_capacity(spec.size);
        v.extend(
            base.iter()
                .zip(factor.iter())
                .map(|(&x, &y)| mul_mod(x, y, prime)),
        );
        Arc::new(v)
    };
    caches.bytes += result.len() * 8;
    caches
        .products
        .insert((spec.key, rows.clone(), prime), result.clone());
    result
}

fn materialized(
    caches: &mut Caches,
    spec: &GroupSpec,
    rows: &RowsKey,
    prime: u64,
) -> Arc<Vec<u64>> {
    if let Some(t) = caches.materialized.get(&(spec.key, rows.clone(), prime)) {
        return t.clone();
    }
    let prod = product_transformed(caches, spec, rows, prime);
    let plan = plan_for(caches, spec.key.p, spec.m_pk, prime);
    let mut v: Vec<u64> = prod.as_ref().clone();
    plan.multidim(&mut v, spec.axes, true);
    let t = Arc::new(v);
    caches.bytes += t.len() * 8;
    caches
        .materialized
        .insert((spec.key, rows.clone(), prime), t.clone());
    t
}

/// Exact count of matrices whose scaled moment equals the target index.
pub(crate) fn congruence_count(spec: &GroupSpec, rows: &RowsKey, target_idx: usize) -> BigUint {
    let m = rows.total_rows() as u64;
    // worst-case count is (p^{2K})^{n m}
    let min_bits = 2 * spec.key.k as u64 * spec.key.n as u64 * m
        * (64 - spec.key.p.leading_zeros() as u64)
        + 2;
    with_caches(|caches| {
        let primes = primes_for(caches, spec.m_pk, min_bits);
        let mut residues = Vec::with_capacity(primes.len());
        for &prime in &primes {
            residues.push(materialized(caches, spec, rows, prime));
        }
        let table = CountTable { primes, residues };
        table.get(target_idx)
    })
}

/// Direct (no tables, no NTT) count over all candidate matrices; used as an
/// independent cross-check on small instances.
#[cfg(test)]
pub(crate) fn direct_count(spec: &GroupSpec, rows: &RowsKey, target_idx: usize) -> BigUint {
    let mut kinds: Vec<&RowKind> = Vec::new();
    for (k, c) in &rows.0 {
        for _ in 0..*c {
            kinds.push(k);
        }
    }
    let m = spec.m_pk;
    let n = spec.key.n;
    let u = crate::oracle::ctx_u(spec.key.p) % m;
    let coords = (m * m).pow(n as u32);
    let total_f = (coords as f64).powi(kinds.len() as i32);
    assert!(total_f <= 2e8, "direct count too large: {total_f}");
    let pw = |e: u8| -> u64 {
        if (e as u32) >= spec.key.k {
            0
        } else {
            spec.key.p.pow(e as u32) % m
        }
    };
    let mut count = BigUint::from(0u32);
    let mut codes = vec![0u64; kinds.len()];
    loop {
        // accumulate the moment of this candidate
        let mut digits = vec![0u64; spec.axes];
        for (row, &code) in kinds.iter().zip(&codes) {
            let mut a = vec![0u64; n];
            let mut b = vec![0u64; n];
            let mut c = code;
            for i in 0..n {
                a[i] = c % m;
                c /= m;
                b[i] = c % m;
                c /= m;
            }
            for i in 0..n {
                let nm =
                    (mul_mod(a[i], a[i], m) + m * m - mul_mod(u, mul_mod(b[i], b[i], m), m)) % m;
                digits[i] = (digits[i] + mul_mod(pw(row.exps[row.tri(i, i)]), nm, m)) % m;
            }
            let mut t = n;
            for i in 0..n {
                for j in i + 1..n {
                    let re = (mul_mod(a[i], a[j], m) + m * m
                        - mul_mod(u, mul_mod(b[i], b[j], m), m))
                        % m;
                    let im = (mul_mod(a[i], b[j], m) + m * m - mul_mod(b[i], a[j], m)) % m;
                    let cc = pw(row.exps[row.tri(i, j)]);
                    digits[t] = (digits[t] + mul_mod(cc, re, m)) % m;
                    digits[t + 1] = (digits[t + 1] + mul_mod(cc, im, m)) % m;
                    t += 2;
                }
            }
        }
        if spec.index_of(&digits) == target_idx {
            count += 1u32;
        }
        // increment the candidate code vector
        let mut pos = 0;
        loop {
            if pos == codes.len() {
                return count;
            }
            codes[pos] += 1;
            if codes[pos] < coords {
                break;
            }
            codes[pos] = 0;
            pos += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_engine_matches_direct_enumeration() {
        // n = 1, p = 3, K = 2: two rows with exponents (0) and (1)
        let spec = GroupSpec::new(3, 2, 1, 1 << 22).unwrap();
        let rows = RowsKey::from_rows(vec![
            (RowKind::uniform(1, 0), 1),
            (RowKind::uniform(1, 1), 1),
        ]);
        for target in 0..spec.size {
            assert_eq!(
                congruence_count(&spec, &rows, target),
                direct_count(&spec, &rows, target),
                "target {target}"
            );
        }
    }

    #[test]
    fn table_engine_matches_direct_n2() {
        // n = 2, p = 3, K = 1: one unit row and one typed row (Z, Y) scaled
        let spec = GroupSpec::new(3, 1, 2, 1 << 22).unwrap();
        let rows = RowsKey::from_rows(vec![
            (RowKind::uniform(2, 1), 1),
            (RowKind::typed(&[1, -1], 1), 1),
        ]);
        for target in [0usize, 1, 5, 17, 80] {
            let t = target % spec.size;
            assert_eq!(
                congruence_count(&spec, &rows, t),
                direct_count(&spec, &rows, t),
                "target {t}"
            );
        }
    }

    #[test]
    fn row_kind_triangle_indexing() {
        let k = RowKind::uniform(3, 0);
        assert_eq!(k.tri(0, 0), 0);
        assert_eq!(k.tri(0, 2), 2);
        assert_eq!(k.tri(1, 1), 3);
        assert_eq!(k.tri(1, 2), 4);
        assert_eq!(k.tri(2, 2), 5);
    }
}
