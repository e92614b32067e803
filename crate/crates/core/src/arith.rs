//! Integer factorisation and multiplicative functions.
//!
//! Inputs in this crate stay below `10^7`, so trial division is plenty and
//! `u64` outputs cannot overflow for any function here (the largest,
//! `sigma(n)`, is below `5 n` at that size).

use crate::error::{ensure, Result};
use serde::{Deserialize, Serialize};

/// `n = prod p^e` with primes strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Factorization {
    pub n: u64,
    pub factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    /// `v_p(n)`; zero for primes not listed.
    pub fn exponent(&self, p: u64) -> u32 {
        self.factors
            .iter()
            .find(|&&(q, _)| q == p)
            .map_or(0, |&(_, e)| e)
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }

    /// Recompute the product; used by the invariant checks.
    pub fn product(&self) -> u64 {
        self.factors.iter().map(|&(p, e)| p.pow(e)).product()
    }

    /// Prime powers `p^e` exactly dividing `n`.
    pub fn prime_powers(&self) -> impl Iterator<Item = (u64, u32, u64)> + '_ {
        self.factors.iter().map(|&(p, e)| (p, e, p.pow(e)))
    }
}

pub fn factor(n: u64) -> Result<Factorization> {
    ensure!(n >= 1, Domain, "factor: n must be positive");
    Ok(factor_nonzero(n))
}

pub(crate) fn factor_nonzero(n: u64) -> Factorization {
    debug_assert!(n >= 1);
    let mut m = n;
    let mut factors = Vec::new();
    let mut push = |p: u64, m: &mut u64| {
        let mut e = 0;
        while *m % p == 0 {
            *m /= p;
            e += 1;
        }
        if e > 0 {
            factors.push((p, e));
        }
    };
    push(2, &mut m);
    push(3, &mut m);
    let mut p = 5;
    while p * p <= m {
        push(p, &mut m);
        push(p + 2, &mut m);
        p += 6;
    }
    if m > 1 {
        factors.push((m, 1));
    }
    Factorization { n, factors }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2, 3, 5] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut p = 7;
    while p * p <= n {
        if n % p == 0 || n % (p + 4) == 0 {
            return false;
        }
        // wheel of 6: p = 6k+1, p+4 = 6k+5
        p += 6;
    }
    true
}

/// Index of `Gamma_0(n)` in `SL_2(Z)`: `n prod (1 + 1/p)`.
pub fn psi(n: u64) -> u64 {
    let f = factor_nonzero(n);
    f.factors.iter().fold(n, |acc, &(p, _)| acc / p * (p + 1))
}

pub fn phi(n: u64) -> u64 {
    let f = factor_nonzero(n);
    f.factors.iter().fold(n, |acc, &(p, _)| acc / p * (p - 1))
}

/// Number of divisors.
pub fn d(n: u64) -> u64 {
    factor_nonzero(n)
        .factors
        .iter()
        .map(|&(_, e)| e as u64 + 1)
        .product()
}

pub fn sigma(n: u64) -> u64 {
    factor_nonzero(n)
        .factors
        .iter()
        .map(|&(p, e)| (p.pow(e + 1) - 1) / (p - 1))
        .product()
}

/// Ordered triples `(a, b, c)` with `abc = n`.
pub fn d3(n: u64) -> u64 {
    factor_nonzero(n)
        .factors
        .iter()
        .map(|&(_, e)| {
            let e = e as u64;
            (e + 1) * (e + 2) / 2
        })
        .product()
}

pub fn mu(n: u64) -> i32 {
    let f = factor_nonzero(n);
    if !f.is_squarefree() {
        return 0;
    }
    if f.factors.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// `v_p(n)`; `n` must be nonzero and `p >= 2`.
pub fn vp(mut n: u64, p: u64) -> u32 {
    debug_assert!(n != 0 && p >= 2);
    let mut e = 0;
    while n % p == 0 {
        n /= p;
        e += 1;
    }
    e
}

/// Divisors in increasing order.
pub fn divisors(n: u64) -> Vec<u64> {
    divisors_of(&factor_nonzero(n))
}

pub fn divisors_of(f: &Factorization) -> Vec<u64> {
    let mut out = vec![1u64];
    for &(p, e) in &f.factors {
        let len = out.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                out.push(out[i] * pk);
            }
        }
    }
    out.sort_unstable();
    out
}

pub fn gcd(a: u64, b: u64) -> u64 {
    num_integer::gcd(a, b)
}

pub fn lcm(a: u64, b: u64) -> u64 {
    num_integer::lcm(a, b)
}

/// Largest `r` with `r^2 <= n`.
pub fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

pub fn square_root(n: u64) -> Option<u64> {
    let r = isqrt(n);
    (r * r == n).then_some(r)
}

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut r = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Inverse of `a` modulo `m`, if it exists. `inv_mod(_, 1) = Some(0)`.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return None;
    }
    Some(t0.rem_euclid(m as i128) as u64)
}

/// Reduce a signed integer into `[0, m)`.
pub fn reduce(a: i64, m: u64) -> u64 {
    (a as i128).rem_euclid(m as i128) as u64
}

/// Prime-power part of `n` supported on the primes of `w`, and the cofactor.
pub fn split_smooth(n: u64, w: u64) -> (u64, u64) {
    let mut smooth = 1;
    let mut rest = n;
    for p in factor_nonzero(w).primes() {
        while rest % p == 0 {
            rest /= p;
            smooth *= p;
        }
    }
    (smooth, rest)
}

/// `prod_{p | n} p`.
pub fn radical(n: u64) -> u64 {
    factor_nonzero(n).primes().product()
}

/// `ln Gamma(k)` for a positive integer `k`, summed exactly in log space.
pub fn ln_factorial(k: u64) -> f64 {
    (2..=k).map(|j| (j as f64).ln()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_factorisations() {
        assert!(factor(0).is_err());
        assert!(factor(1).unwrap().factors.is_empty());
        assert_eq!(factor(12).unwrap().factors, vec![(2, 2), (3, 1)]);
        assert_eq!(factor(97).unwrap().factors, vec![(97, 1)]);
        assert_eq!(factor(9_999_991).unwrap().factors, vec![(9_999_991, 1)]);
    }

    #[test]
    fn named_values() {
        assert_eq!(psi(1), 1);
        assert_eq!(psi(12), 24);
        assert_eq!(psi(97), 98);
        assert_eq!((d(12), sigma(12)), (6, 28));
        assert_eq!(d3(4), 6);
        assert_eq!((mu(1), mu(12), mu(30)), (1, 0, -1));
        assert_eq!(vp(48, 2), 4);
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
    }

    #[test]
    fn primality_agrees_with_factor() {
        for n in 0..5000u64 {
            let by_factor = n >= 2 && factor_nonzero(n).factors == vec![(n, 1)];
            assert_eq!(is_prime(n), by_factor, "n = {n}");
        }
    }

    #[test]
    fn d3_counts_triples() {
        for n in 1..200u64 {
            let mut count = 0;
            for a in divisors(n) {
                count += d(n / a);
            }
            assert_eq!(d3(n), count);
        }
    }

    #[test]
    fn inverse_and_power() {
        assert_eq!(inv_mod(3, 7), Some(5));
        assert_eq!(inv_mod(2, 4), None);
        assert_eq!(pow_mod(5, 117, 19), {
            let mut r = 1;
            for _ in 0..117 {
                r = r * 5 % 19;
            }
            r
        });
    }
}
