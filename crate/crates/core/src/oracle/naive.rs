//! Slow reference counting path: direct enumeration with none of the table,
//! convolution, or diagonalization machinery. Exists so the fast engine can
//! be cross-checked exactly on small instances.

use crate::error::{Error, Result};
use crate::field::{ResidueElt, ResidueRing};
use crate::herm::{AdmissibleFunction, HermMatrix, Weight};
use num_bigint::BigUint;

/// Count `x in M_{m,n}(O/varpi^k)` with `varpi^sigma * (conj(x)^t S x) ==
/// varpi^sigma * T` modulo `varpi^k`, entrywise, for arbitrary hermitian `S`.
pub fn naive_count_representations(
    s: &HermMatrix,
    t: &HermMatrix,
    k: u32,
    max_candidates: f64,
) -> Result<BigUint> {
    let ctx = s.ctx();
    let m = s.n();
    let n = t.n();
    let sigma = (-s.min_valuation().unwrap_or(0))
        .max(-t.min_valuation().unwrap_or(0))
        .max(0);
    let ring = ResidueRing::new(ctx, k)?;
    let s_scaled = s.scale_varpi(sigma);
    let t_scaled = t.scale_varpi(sigma);
    let mut s_red = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            s_red.push(ring.reduce(s_scaled.at(i, j))?);
        }
    }
    let mut t_red = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            t_red.push(ring.reduce(t_scaled.at(i, j))?);
        }
    }

    let coords = ring.cardinality();
    let total = (coords as f64).powi((m * n) as i32);
    if total > max_candidates {
        return Err(Error::BudgetExceeded {
            estimate: total,
            cap: max_candidates,
        });
    }

    let modulus = ring.modulus();
    let decode = |c: u64| ResidueElt {
        a: c % modulus,
        b: (c / modulus) % modulus,
    };
    let coords = (modulus * modulus) as u64;
    let cells = m * n;
    let mut codes = vec![0u64; cells];
    let mut count = BigUint::from(0u32);
    loop {
        // x[l][j] = decode(codes[l * n + j]); check conj(x)^t (S x) == T
        let mut ok = true;
        'check: for i in 0..n {
            for j in 0..n {
                let mut acc = ring.zero();
                for l in 0..m {
                    // (S x)_{l j}
                    let mut sx = ring.zero();
                    for l2 in 0..m {
                        sx = ring.add(sx, ring.mul(s_red[l * m + l2], decode(codes[l2 * n + j])));
                    }
                    acc = ring.add(acc, ring.mul(ring.conj(decode(codes[l * n + i])), sx));
                }
                if acc != t_red[i * n + j] {
                    ok = false;
                    break 'check;
                }
            }
        }
        if ok {
            count += 1u32;
        }
        let mut pos = 0;
        loop {
            if pos == cells {
                return Ok(count);
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

/// The per-column-lattice count underlying the weighted density, enumerated
/// directly from the definition: column `j` runs over the coordinates of its
/// own lattice (`L^{[t]}` at `Z` positions, `L^{[t],sharp}` at `Y`), plus
/// `2r` self-dual augmentation coordinates, and the pairwise moments are
/// compared with `T` after a global `varpi^sigma` scaling.
pub fn naive_weighted_count(
    phi: &AdmissibleFunction,
    r: u32,
    t: &HermMatrix,
    k: u32,
    max_candidates: f64,
) -> Result<BigUint> {
    let ctx = t.ctx();
    let n = phi.n();
    if t.n() != n {
        return Err(Error::RankMismatch {
            expected: n,
            got: t.n(),
        });
    }
    let tt = phi.type_t();
    let weights = &phi.weight().0;
    let sigma = if tt > 0 && phi.b() > 0 { 1i64 } else { 0 }.max(-t.min_valuation().unwrap_or(0));
    let ring = ResidueRing::new(ctx, k)?;
    let modulus = ring.modulus();
    let m = n + 2 * r as usize;

    // pair-coefficient exponents: rows n-tt..n are the type block
    let exp_of = |row: usize, i: usize, j: usize| -> u32 {
        let base = if row >= n - tt && row < n {
            let si = if weights[i] == Weight::Z { 1i64 } else { -1 };
            let sj = if weights[j] == Weight::Z { 1i64 } else { -1 };
            sigma + (si + sj) / 2
        } else {
            sigma
        };
        base as u32
    };
    let pw = |e: u32| -> u64 {
        if e >= k {
            0
        } else {
            ctx.p().pow(e) % modulus
        }
    };

    let t_scaled = t.scale_varpi(sigma);
    let mut t_red = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            t_red.push(ring.reduce(t_scaled.at(i, j))?);
        }
    }

    let coords = (modulus * modulus) as u64;
    let total = (coords as f64).powi((m * n) as i32);
    if total > max_candidates {
        return Err(Error::BudgetExceeded {
            estimate: total,
            cap: max_candidates,
        });
    }

    let decode = |c: u64| ResidueElt {
        a: c % modulus,
        b: (c / modulus) % modulus,
    };
    let cells = m * n;
    let mut codes = vec![0u64; cells];
    let mut count = BigUint::from(0u32);
    loop {
        let mut ok = true;
        'check: for i in 0..n {
            for j in 0..n {
                let mut acc = ring.zero();
                for l in 0..m {
                    let c = ResidueElt {
                        a: pw(exp_of(l, i, j)),
                        b: 0,
                    };
                    let prod = ring.mul(
                        c,
                        ring.mul(ring.conj(decode(codes[l * n + i])), decode(codes[l * n + j])),
                    );
                    acc = ring.add(acc, prod);
                }
                if acc != t_red[i * n + j] {
                    ok = false;
                    break 'check;
                }
            }
        }
        if ok {
            count += 1u32;
        }
        let mut pos = 0;
        loop {
            if pos == cells {
                return Ok(count);
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
