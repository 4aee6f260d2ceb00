//! Exact convolution support: number-theoretic transforms over axes of
//! prime-power length, with CRT reconstruction of large counts.
//!
//! Congruence-count tables live on the abelian group `(Z/p^K)^{n^2}`;
//! convolving row contributions is a cyclic convolution along every axis.

use num_bigint::BigUint;

#[inline]
pub(crate) fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    acc
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &b in &[2u64, 3, 5, 7, 11, 13] {
        if n == b {
            return true;
        }
        if n % b == 0 {
            return false;
        }
    }
    let d = n - 1;
    let s = d.trailing_zeros();
    let d = d >> s;
    'outer: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// NTT-friendly primes `P = c * axis_len + 1` just under 2^62, enough of them
/// that the product exceeds `2^min_bits`.
pub(crate) fn find_primes(axis_len: u64, min_bits: u64) -> Vec<u64> {
    let mut primes = Vec::new();
    let mut bits = 0u64;
    let mut c = (1u64 << 61) / axis_len;
    while bits <= min_bits + 1 {
        c += 1;
        let p = match c.checked_mul(axis_len).and_then(|v| v.checked_add(1)) {
            Some(p) => p,
            None => panic!("prime search overflow for axis length {axis_len}"),
        };
        if is_prime(p) {
            primes.push(p);
            bits += 60;
        }
    }
    primes
}

/// An order-`len` root of unity modulo `prime` (with `len | prime - 1`),
/// found from random candidates raised to `(prime-1)/len`.
fn root_of_unity(prime: u64, len: u64, radix: u64) -> u64 {
    let mut x = 2u64;
    loop {
        let w = pow_mod(x, (prime - 1) / len, prime);
        // order must be exactly len: w^(len/radix) != 1
        if w != 1 && pow_mod(w, len / radix, prime) != 1 {
            return w;
        }
        x += 1;
    }
}

/// Transform plan for one prime: precomputed powers of a length-`len` root.
pub(crate) struct NttPlan {
    pub prime: u64,
    pub len: usize,
    radix: usize,
    pows: Vec<u64>,
    inv_pows: Vec<u64>,
    inv_len: u64,
}

impl NttPlan {
    pub fn new(prime: u64, radix: u64, len: usize) -> Self {
        assert_eq!((prime - 1) % len as u64, 0);
        let w = root_of_unity(prime, len as u64, radix);
        let wi = pow_mod(w, prime - 2, prime);
        let mut pows = Vec::with_capacity(len);
        let mut inv_pows = Vec::with_capacity(len);
        let (mut a, mut b) = (1u64, 1u64);
        for _ in 0..len {
            pows.push(a);
            inv_pows.push(b);
            a = mul_mod(a, w, prime);
            b = mul_mod(b, wi, prime);
        }
        NttPlan {
            prime,
            len,
            radix: radix as usize,
            pows,
            inv_pows,
            inv_len: pow_mod(len as u64, prime - 2, prime),
        }
    }

    /// In-place DFT of length `len`. Naive for short axes, recursive radix-p
    /// decimation for long ones.
    pub fn dft(&self, v: &mut [u64], inverse: bool) {
        debug_assert_eq!(v.len(), self.len);
        let pows = if inverse { &self.inv_pows } else { &self.pows };
        if self.len <= 128 {
            let mut out = vec![0u64; self.len];
            for (j, o) in out.iter_mut().enumerate() {
                let mut acc = 0u128;
                for (t, &x) in v.iter().enumerate() {
                    let w = pows[(j * t) % self.len];
                    acc += x as u128 * w as u128;
                    // keep the accumulator bounded
                    if acc >= (1u128 << 126) {
                        acc %= self.prime as u128;
                    }
                }
                *o = (acc % self.prime as u128) as u64;
            }
            v.copy_from_slice(&out);
        } else {
            let mut scratch = vec![0u64; self.len];
            self.dft_rec(v, &mut scratch, pows, 1);
        }
        // the inverse scaling by 1/len is applied by the caller once per axis
    }

    fn dft_rec(&self, v: &mut [u64], scratch: &mut [u64], pows: &[u64], stride: usize) {
        let m = v.len();
        if m == 1 {
            return;
        }
        let p = self.radix;
        let l = m / p;
        // gather subsequences by index mod p
        for s in 0..p {
            for t in 0..l {
                scratch[s * l + t] = v[s + p * t];
            }
        }
        for s in 0..p {
            self.dft_rec(
                &mut scratch[s * l..(s + 1) * l],
                &mut v[..l],
                pows,
                stride * p,
            );
        }
        // combine: X[j] = sum_s w^{j s stride} Y_s[j mod l]
        for j in 0..m {
            let mut acc: u128 = 0;
            for s in 0..p {
                let w = pows[(j * s * stride) % self.len];
                acc += scratch[s * l + (j % l)] as u128 * w as u128;
            }
            v[j] = (acc % self.prime as u128) as u64;
        }
    }

    /// Multi-dimensional transform: every axis has length `len`; `axes` axes.
    pub fn multidim(&self, table: &mut [u64], axes: usize, inverse: bool) {
        let n = self.len;
        debug_assert_eq!(table.len(), n.pow(axes as u32));
        let mut fiber = vec![0u64; n];
        for axis in 0..axes {
            let stride = n.pow(axis as u32);
            let block = stride * n;
            let blocks = table.len() / block;
            for b in 0..blocks {
                for inner in 0..stride {
                    let base = b * block + inner;
                    for j in 0..n {
                        fiber[j] = table[base + j * stride];
                    }
                    self.dft(&mut fiber, inverse);
                    for j in 0..n {
                        table[base + j * stride] = fiber[j];
                    }
                }
            }
        }
        if inverse {
            // one global scaling by len^{-axes}
            let scale = pow_mod(self.inv_len, axes as u64, self.prime);
            for x in table.iter_mut() {
                *x = mul_mod(*x, scale, self.prime);
            }
        }
    }
}

/// Reconstruct the unique value below the product of moduli from residues.
pub(crate) fn crt(residues: &[u64], primes: &[u64]) -> BigUint {
    let mut result = BigUint::from(0u32);
    let mut modulus = BigUint::from(1u32);
    for (&r, &p) in residues.iter().zip(primes) {
        // result += modulus * t, with t = (r - result) / modulus mod p
        let cur_u = (&result % p).to_u64_digits().first().copied().unwrap_or(0);
        let m_u = (&modulus % p).to_u64_digits().first().copied().unwrap_or(0);
        let diff = (r + p - cur_u % p) % p;
        let t = mul_mod(diff, pow_mod(m_u, p - 2, p), p);
        result += &modulus * BigUint::from(t);
        modulus *= BigUint::from(p);
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes_found_for_axis_lengths() {
        for axis in [27u64, 81, 729, 15625, 19683] {
            let primes = find_primes(axis, 120);
            assert!(primes.len() >= 2);
            for p in &primes {
                assert!(is_prime(*p));
                assert_eq!((p - 1) % axis, 0);
            }
        }
    }

    #[test]
    fn dft_roundtrip() {
        let primes = find_primes(27, 60);
        let plan = NttPlan::new(primes[0], 3, 27);
        let orig: Vec<u64> = (0..27u64).map(|i| i * i + 1).collect();
        let mut v = orig.clone();
        plan.dft(&mut v, false);
        plan.dft(&mut v, true);
        let inv27 = pow_mod(27, plan.prime - 2, plan.prime);
        for x in v.iter_mut() {
            *x = mul_mod(*x, inv27, plan.prime);
        }
        assert_eq!(v, orig);
    }

    #[test]
    fn multidim_convolution_matches_direct() {
        // convolve two random tables on (Z/9)^2 both ways
        let n = 9usize;
        let size = n * n;
        let primes = find_primes(n as u64, 80);
        let a: Vec<u64> = (0..size as u64).map(|i| (i * 7 + 3) % 50).collect();
        let b: Vec<u64> = (0..size as u64).map(|i| (i * 13 + 1) % 50).collect();
        // direct convolution
        let mut direct = vec![0u64; size];
        for i in 0..size {
            for j in 0..size {
                let (i0, i1) = (i % n, i / n);
                let (j0, j1) = (j % n, j / n);
                let t = ((i0 + j0) % n) + n * ((i1 + j1) % n);
                direct[t] += a[i] * b[j];
            }
        }
        // ntt path with two primes + crt
        let mut residues: Vec<Vec<u64>> = Vec::new();
        for &p in &primes {
            let plan = NttPlan::new(p, 3, n);
            let mut ta: Vec<u64> = a.iter().map(|&x| x % p).collect();
            let mut tb: Vec<u64> = b.iter().map(|&x| x % p).collect();
            plan.multidim(&mut ta, 2, false);
            plan.multidim(&mut tb, 2, false);
            for i in 0..size {
                ta[i] = mul_mod(ta[i], tb[i], p);
            }
            plan.multidim(&mut ta, 2, true);
            residues.push(ta);
        }
        for t in 0..size {
            let rs: Vec<u64> = residues.iter().map(|r| r[t]).collect();
            assert_eq!(crt(&rs, &primes), BigUint::from(direct[t]));
        }
    }

    #[test]
    fn radix5_long_axis() {
        let len = 3125usize;
        let primes = find_primes(len as u64, 60);
        let plan = NttPlan::new(primes[0], 5, len);
        let orig: Vec<u64> = (0..len as u64).map(|i| (i * 31 + 17) % 1000).collect();
        let mut v = orig.clone();
        plan.dft(&mut v, false);
        plan.dft(&mut v, true);
        let invl = pow_mod(len as u64, plan.prime - 2, plan.prime);
        for x in v.iter_mut() {
            *x = mul_mod(*x, invl, plan.prime);
        }
        assert_eq!(v, orig);
    }
}
