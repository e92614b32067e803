//! Exact q-expansions of the shipped eigenforms, Hecke operators, the naive
//! adjoint-square series and the local oldform basis.
//!
//! Only trivial nebentypus is shipped. The local machinery (`xi`, `V`,
//! `r_f`) takes arbitrary local data so that it can be exercised at
//! nontrivial characters.

use crate::arith::{self, divisors, factor_nonzero, gcd, is_prime, ln_factorial, mu, psi};
use crate::error::{ensure, Error, Result};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// `sum_{n=0}^{P} a(n) q^n` for a form of level `N`, weight `k`, trivial character.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QExpansion {
    pub level: u64,
    pub weight: u32,
    pub coeffs: Vec<BigInt>,
}

impl QExpansion {
    pub fn precision(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, n: usize) -> Result<&BigInt> {
        self.coeffs.get(n).ok_or_else(|| {
            Error::Precision(format!("coefficient {n} beyond precision {}", self.precision()))
        })
    }

    /// Product of two expansions, truncated to the smaller precision.
    pub fn mul(&self, other: &QExpansion) -> QExpansion {
        let p = self.precision().min(other.precision());
        QExpansion {
            level: arith::lcm(self.level, other.level),
            weight: self.weight + other.weight,
            coeffs: mul_big(&self.coeffs, &other.coeffs, p),
        }
    }
}

fn mul_big(a: &[BigInt], b: &[BigInt], p: usize) -> Vec<BigInt> {
    let nz: Vec<(usize, &BigInt)> = a
        .iter()
        .enumerate()
        .take(p + 1)
        .filter(|(_, c)| !c.is_zero())
        .collect();
    (0..=p)
        .into_par_iter()
        .map(|n| {
            let mut acc = BigInt::zero();
            for &(i, c) in &nz {
                if i > n {
                    break;
                }
                let d = &b[n - i];
                if !d.is_zero() {
                    acc += c * d;
                }
            }
            acc
        })
        .collect()
}

/// `prod (1 - q^n)` as `(exponent, coefficient)` pairs up to `p`.
fn pentagonal(p: usize) -> Vec<(usize, i64)> {
    let mut out = vec![(0usize, 1i64)];
    let mut k = 1i64;
    loop {
        let e1 = (k * (3 * k - 1) / 2) as usize;
        if e1 > p {
            break;
        }
        let s = if k % 2 == 0 { 1 } else { -1 };
        out.push((e1, s));
        let e2 = (k * (3 * k + 1) / 2) as usize;
        if e2 <= p {
            out.push((e2, s));
        }
        k += 1;
    }
    out.sort_unstable();
    out
}

/// `prod (1 - q^n)^3 = sum (-1)^k (2k+1) q^{k(k+1)/2}`.
fn jacobi_cube(p: usize) -> Vec<(usize, i64)> {
    let mut out = Vec::new();
    let mut k = 0usize;
    while k * (k + 1) / 2 <= p {
        let s = if k % 2 == 0 { 1 } else { -1 };
        out.push((k * (k + 1) / 2, s * (2 * k as i64 + 1)));
        k += 1;
    }
    out
}

fn sparse_mul_i128(a: &[i128], s: &[(usize, i64)]) -> Option<Vec<i128>> {
    (0..a.len())
        .into_par_iter()
        .map(|n| {
            let mut acc = 0i128;
            for &(e, c) in s {
                if e > n {
                    break;
                }
                acc = acc.checked_add(a[n - e].checked_mul(c as i128)?)?;
            }
            Some(acc)
        })
        .collect()
}

fn sparse_mul_big(a: &[BigInt], s: &[(usize, i64)]) -> Vec<BigInt> {
    (0..a.len())
        .into_par_iter()
        .map(|n| {
            let mut acc = BigInt::zero();
            for &(e, c) in s {
                if e > n {
                    break;
                }
                acc += &a[n - e] * c;
            }
            acc
        })
        .collect()
}

/// `prod (1 - q^n)^r` to precision `p` for `r >= 0`, in `i128` when it fits.
fn euler_power_i128(r: u32, p: usize) -> Option<Vec<i128>> {
    let mut a = vec![0i128; p + 1];
    a[0] = 1;
    let cube = jacobi_cube(p);
    let pent = pentagonal(p);
    for _ in 0..r / 3 {
        a = sparse_mul_i128(&a, &cube)?;
    }
    for _ in 0..r % 3 {
        a = sparse_mul_i128(&a, &pent)?;
    }
    Some(a)
}

fn partitions(p: usize) -> Vec<BigInt> {
    let pent = pentagonal(p);
    let mut out = vec![BigInt::zero(); p + 1];
    out[0] = BigInt::one();
    for n in 1..=p {
        let mut acc = BigInt::zero();
        for &(e, c) in &pent[1..] {
            if e > n {
                break;
            }
            // 1 / prod(1 - q^n): p(n) = -sum_{e > 0} c_e p(n - e)
            acc -= &out[n - e] * c;
        }
        out[n] = acc;
    }
    out
}

fn euler_power_big(r: i32, p: usize) -> Vec<BigInt> {
    if r >= 0 {
        if let Some(v) = euler_power_i128(r as u32, p) {
            return v.into_iter().map(BigInt::from).collect();
        }
        let mut a = vec![BigInt::zero(); p + 1];
        a[0] = BigInt::one();
        let cube = jacobi_cube(p);
        let pent = pentagonal(p);
        for _ in 0..r / 3 {
            a = sparse_mul_big(&a, &cube);
        }
        for _ in 0..r % 3 {
            a = sparse_mul_big(&a, &pent);
        }
        a
    } else {
        let part = partitions(p);
        let mut a = part.clone();
        for _ in 1..(-r) {
            a = mul_big(&a, &part, p);
        }
        a
    }
}

fn eta_shift(spec: &[(u64, i32)]) -> Result<usize> {
    ensure!(!spec.is_empty(), Domain, "empty eta product");
    ensure!(spec.iter().all(|&(d, _)| d >= 1), Domain, "eta divisors must be positive");
    let s: i64 = spec.iter().map(|&(d, r)| d as i64 * r as i64).sum();
    ensure!(
        s >= 0 && s % 24 == 0,
        Domain,
        "sum of d r = {s} is not a nonnegative multiple of 24"
    );
    Ok((s / 24) as usize)
}

/// `q^{sum d r / 24} prod_d prod_n (1 - q^{dn})^r` to precision `p`.
pub fn eta_product(spec: &[(u64, i32)], p: usize) -> Result<QExpansion> {
    let shift = eta_shift(spec)?;
    let level = spec.iter().fold(1, |acc, &(d, _)| arith::lcm(acc, d));
    let weight: i32 = spec.iter().map(|&(_, r)| r).sum();
    ensure!(weight > 0 && weight % 2 == 0, Domain, "eta product of weight {}/2", weight);
    let mut coeffs = vec![BigInt::zero(); p + 1];
    if shift <= p {
        let inner = p - shift;
        let mut acc = vec![BigInt::zero(); inner + 1];
        acc[0] = BigInt::one();
        for &(d, r) in spec {
            let d = d as usize;
            let base = euler_power_big(r, inner / d);
            let mut dil = vec![BigInt::zero(); inner + 1];
            for (i, c) in base.into_iter().enumerate() {
                dil[i * d] = c;
            }
            acc = mul_big(&dil, &acc, inner);
        }
        for (i, c) in acc.into_iter().enumerate() {
            coeffs[i + shift] = c;
        }
    }
    Ok(QExpansion {
        level,
        weight: (weight / 2) as u32,
        coeffs,
    })
}

/// Fixed-width version of [`eta_product`] for nonnegative exponents; `None` on overflow.
pub fn eta_product_i128(spec: &[(u64, i32)], p: usize) -> Result<Option<Vec<i128>>> {
    let shift = eta_shift(spec)?;
    ensure!(spec.iter().all(|&(_, r)| r >= 0), Domain, "fixed-width path needs r >= 0");
    let mut out = vec![0i128; p + 1];
    if shift > p {
        return Ok(Some(out));
    }
    let inner = p - shift;
    let mut acc = vec![0i128; inner + 1];
    acc[0] = 1;
    for &(d, r) in spec {
        let d = d as usize;
        let Some(base) = euler_power_i128(r as u32, inner / d) else {
            return Ok(None);
        };
        let sparse: Vec<(usize, i64)> = match base
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0)
            .map(|(i, &c)| i64::try_from(c).ok().map(|c| (i * d, c)))
            .collect::<Option<Vec<_>>>()
        {
            Some(s) => s,
            None => return Ok(None),
        };
        let Some(next) = sparse_mul_i128(&acc, &sparse) else {
            return Ok(None);
        };
        acc = next;
    }
    out[shift..].copy_from_slice(&acc);
    Ok(Some(out))
}

/// `tau(n)` for `0 <= n <= p` (`tau(0) = 0`), via `q (prod (1 - q^n)^3)^8`.
pub fn tau_table(p: usize) -> Result<Vec<i128>> {
    ensure!(p <= 1_000_000, Domain, "tau table limited to 10^6 terms");
    let mut out = vec![0i128; p + 1];
    if p == 0 {
        return Ok(out);
    }
    let inner = p - 1;
    let cube = jacobi_cube(inner);
    let mut a = vec![0i128; inner + 1];
    for &(e, c) in &cube {
        a[e] = c as i128;
    }
    for _ in 1..8 {
        a = sparse_mul_i128(&a, &cube)
            .ok_or_else(|| Error::Precision("tau overflowed i128".into()))?;
    }
    out[1..].copy_from_slice(&a);
    Ok(out)
}

/// Normalised Eisenstein series `E_k = 1 - (2k / B_k) sum sigma_{k-1}(n) q^n`.
pub fn eisenstein(k: u32, p: usize) -> Result<QExpansion> {
    let c: i64 = match k {
        4 => 240,
        6 => -504,
        8 => 480,
        10 => -264,
        14 => -24,
        _ => return Err(Error::Unsupported(format!("Eisenstein weight {k}"))),
    };
    let mut sig = vec![BigInt::zero(); p + 1];
    for d in 1..=p {
        let dk = BigInt::from(d).pow(k - 1);
        let mut m = d;
        while m <= p {
            sig[m] += &dk;
            m += d;
        }
    }
    let mut coeffs: Vec<BigInt> = sig.into_iter().map(|s| s * c).collect();
    coeffs[0] = BigInt::one();
    Ok(QExpansion {
        level: 1,
        weight: k,
        coeffs,
    })
}

/// `T_m f` with `a(n) = sum_{d | (m, n), (d, N) = 1} d^{k-1} a(mn / d^2)`, precision `P / m`.
pub fn hecke_apply(m: u64, f: &QExpansion) -> Result<QExpansion> {
    ensure!(m >= 1, Domain, "Hecke index must be positive");
    let p = f.precision() / m as usize;
    ensure!(p >= 1, Precision, "T_{m} leaves no coefficients from precision {}", f.precision());
    let dm: Vec<u64> = divisors(m).into_iter().filter(|&d| gcd(d, f.level) == 1).collect();
    let pw: Vec<BigInt> = dm.iter().map(|&d| BigInt::from(d).pow(f.weight - 1)).collect();
    let coeffs = (0..=p as u64)
        .into_par_iter()
        .map(|n| {
            let mut acc = BigInt::zero();
            for (d, w) in dm.iter().zip(&pw) {
                if n % d == 0 {
                    acc += w * &f.coeffs[(m * n / (d * d)) as usize];
                }
            }
            acc
        })
        .collect();
    Ok(QExpansion {
        level: f.level,
        weight: f.weight,
        coeffs,
    })
}

/// A Hecke-normalised newform with trivial character and integer coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NewformData {
    pub level: u64,
    pub weight: u32,
    pub coeffs: Vec<BigInt>,
}

/// Eigenforms shipped by [`NewformData::shipped`].
pub const SHIPPED_SPACES: [(u32, u64); 7] = [(12, 1), (16, 1), (18, 1), (20, 1), (22, 1), (26, 1), (2, 11)];

impl NewformData {
    pub fn from_expansion(f: QExpansion) -> Result<Self> {
        ensure!(f.precision() >= 1, Precision, "need at least a(1)");
        ensure!(f.coeffs[0].is_zero(), Domain, "not a cusp form");
        ensure!(f.coeffs[1].is_one(), Domain, "not normalised: a(1) = {}", f.coeffs[1]);
        Ok(NewformData {
            level: f.level,
            weight: f.weight,
            coeffs: f.coeffs,
        })
    }

    /// The unique normalised eigenform of `S_k(Gamma_0(N))` for the shipped spaces.
    pub fn shipped(kappa: u32, level: u64, p: usize) -> Result<Self> {
        let from_i128 = |level, weight, v: Vec<i128>| NewformData {
            level,
            weight,
            coeffs: v.into_iter().map(BigInt::from).collect(),
        };
        match (kappa, level) {
            (12, 1) => Ok(from_i128(1, 12, tau_table(p)?)),
            (2, 11) => {
                let v = eta_product_i128(&[(1, 2), (11, 2)], p)?
                    .ok_or_else(|| Error::Precision("level 11 overflowed i128".into()))?;
                Ok(from_i128(11, 2, v))
            }
            (16 | 18 | 20 | 22 | 26, 1) => {
                let delta = QExpansion {
                    level: 1,
                    weight: 12,
                    coeffs: tau_table(p)?.into_iter().map(BigInt::from).collect(),
                };
                let e = eisenstein(kappa - 12, p)?;
                NewformData::from_expansion(delta.mul(&e))
            }
            _ => Err(Error::Unsupported(format!(
                "no eigenform shipped for weight {kappa}, level {level}"
            ))),
        }
    }

    pub fn delta(p: usize) -> Result<Self> {
        Self::shipped(12, 1, p)
    }

    pub fn level11(p: usize) -> Result<Self> {
        Self::shipped(2, 11, p)
    }

    pub fn precision(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn expansion(&self) -> QExpansion {
        QExpansion {
            level: self.level,
            weight: self.weight,
            coeffs: self.coeffs.clone(),
        }
    }

    pub fn a(&self, n: u64) -> Result<&BigInt> {
        self.coeffs.get(n as usize).ok_or_else(|| {
            Error::Precision(format!("a({n}) beyond precision {}", self.precision()))
        })
    }

    /// `a(n) / n^{(k-1)/2}`.
    pub fn lambda(&self, n: u64) -> Result<f64> {
        ensure!(n >= 1, Domain, "eigenvalue index must be positive");
        let a = self.a(n)?.to_f64().unwrap();
        Ok(a / (n as f64).powf((self.weight as f64 - 1.0) / 2.0))
    }

    /// The character value `chi(p)` (trivial character mod the level).
    fn chi_int(&self, p: u64) -> i64 {
        (gcd(p, self.level) == 1) as i64
    }

    /// `a(mn) = a(m) a(n)` for coprime `m, n` and the prime-power recursion, for `mn <= limit`.
    pub fn check_hecke_relations(&self, limit: u64) -> Result<bool> {
        ensure!(limit as usize <= self.precision(), Precision, "limit {limit} beyond precision");
        let k1 = self.weight - 1;
        for n in 2..=limit {
            let f = factor_nonzero(n);
            if f.factors.len() > 1 {
                let (p, e) = f.factors[0];
                let pe = p.pow(e);
                if *self.a(n)? != self.a(pe)? * self.a(n / pe)? {
                    return Ok(false);
                }
            } else {
                let (p, e) = f.factors[0];
                if e >= 2 {
                    let want = self.a(p)? * self.a(n / p)?
                        - BigInt::from(self.chi_int(p)) * BigInt::from(p).pow(k1) * self.a(n / (p * p))?;
                    if *self.a(n)? != want {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }

    /// `a(p)^2 <= 4 p^{k-1}` for every prime in range.
    pub fn check_deligne(&self) -> bool {
        (2..=self.precision() as u64).filter(|&p| is_prime(p)).all(|p| {
            let a = &self.coeffs[p as usize];
            a * a <= BigInt::from(4) * BigInt::from(p).pow(self.weight - 1)
        })
    }

    /// `T_m f = a(m) f` on the available coefficients.
    pub fn check_eigen(&self, m: u64) -> Result<bool> {
        let t = hecke_apply(m, &self.expansion())?;
        let am = self.a(m)?;
        Ok(t.coeffs.iter().zip(&self.coeffs).all(|(x, y)| *x == am * y))
    }

    pub fn local_data(&self, p: u64) -> Result<LocalData> {
        ensure!(is_prime(p), Domain, "{p} is not prime");
        let in_level = self.level % p == 0;
        Ok(LocalData {
            p,
            lambda: Complex64::new(self.lambda(p)?, 0.0),
            chi: Complex64::new(self.chi_int(p) as f64, 0.0),
            in_level,
        })
    }

    /// Exact unnormalised `a(p^j)` by the Hecke recursion from `a(p)`.
    fn a_prime_powers(&self, p: u64, j: u32) -> Result<Vec<BigInt>> {
        let ap = self.a(p)?.clone();
        let chi_pk = BigInt::from(self.chi_int(p)) * BigInt::from(p).pow(self.weight - 1);
        let mut out = vec![BigInt::one(), ap.clone()];
        for i in 2..=j as usize {
            let next = &ap * &out[i - 1] - &chi_pk * &out[i - 2];
            out.push(next);
        }
        out.truncate(j as usize + 1);
        Ok(out)
    }

    /// `rho_f(p^k)` exactly; zero for `p | N`.
    fn rho_local_exact(&self, p: u64, k: u32) -> Result<BigRational> {
        if self.level % p == 0 {
            return Ok(BigRational::zero());
        }
        let a = self.a_prime_powers(p, 2 * k)?;
        let k1 = self.weight - 1;
        let mut acc = BigRational::zero();
        let mut i = k % 2;
        while i <= k {
            // lambda(p^{2i}) = a(p^{2i}) / p^{i (k-1)}
            let den = BigInt::from(p).pow(i * k1);
            acc += BigRational::new(a[2 * i as usize].clone(), den);
            i += 2;
        }
        Ok(acc)
    }

    /// `rho_f(n)` for `n = 1..=x`, exactly.
    pub fn rho_coeffs(&self, x: u64) -> Result<Vec<BigRational>> {
        let mut out = Vec::with_capacity(x as usize);
        for n in 1..=x {
            let mut acc = BigRational::one();
            for (p, e) in factor_nonzero(n).factors {
                acc *= self.rho_local_exact(p, e)?;
            }
            out.push(acc);
        }
        Ok(out)
    }

    /// `omega_f(x) = sum_{n <= x} rho_f(n) / n`, exactly.
    pub fn omega_exact(&self, x: u64) -> Result<BigRational> {
        let rho = self.rho_coeffs(x)?;
        Ok(rho
            .into_iter()
            .enumerate()
            .map(|(i, r)| r / BigInt::from(i as u64 + 1))
            .fold(BigRational::zero(), |a, b| a + b))
    }

    /// `chibar(n) lambda_f(n^2)` rebuilt as `sum_{m^2 l = n} mu(m) rho_f(l)`.
    pub fn lambda_sq_from_rho(&self, n: u64) -> Result<BigRational> {
        let rho = self.rho_coeffs(n)?;
        let mut acc = BigRational::zero();
        let mut m = 1;
        while m * m <= n {
            if n % (m * m) == 0 {
                acc += &rho[(n / (m * m) - 1) as usize] * BigInt::from(mu(m));
            }
            m += 1;
        }
        Ok(acc)
    }

    /// `chibar(n) lambda_f(n^2)` read off the q-expansion; zero when `(n, N) > 1`.
    pub fn lambda_sq_direct(&self, n: u64) -> Result<BigRational> {
        if gcd(n, self.level) != 1 {
            return Ok(BigRational::zero());
        }
        let a = self.a(n * n)?.clone();
        Ok(BigRational::new(a, BigInt::from(n).pow(self.weight - 1)))
    }

    /// `omega_f(x)` in floating point, for each cut in `cuts` (increasing).
    /// Needs `a(p)` for `p <= max(cuts)`.
    pub fn omega_float(&self, cuts: &[u64]) -> Result<Vec<f64>> {
        let x = *cuts.last().unwrap_or(&1);
        ensure!(cuts.windows(2).all(|w| w[0] < w[1]), Domain, "cuts must increase");
        ensure!(x as usize <= self.precision(), Precision, "need a(p) up to {x}");
        let x = x as usize;
        let mut spf = vec![0u32; x + 1];
        for i in 2..=x {
            if spf[i] == 0 {
                let mut j = i;
                while j <= x {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
        }
        let half = (self.weight as f64 - 1.0) / 2.0;
        let mut rho = vec![0f64; x + 1];
        rho[1] = 1.0;
        let mut out = Vec::with_capacity(cuts.len());
        let mut next = 0;
        let mut omega = 0f64;
        for n in 1..=x {
            if n > 1 {
                let p = spf[n] as usize;
                let mut rest = n;
                let mut k = 0u32;
                while rest % p == 0 {
                    rest /= p;
                    k += 1;
                }
                rho[n] = if self.level % p as u64 == 0 {
                    0.0
                } else {
                    let lam = self.coeffs[p].to_f64().unwrap() / (p as f64).powf(half);
                    rho[rest] * rho_local_float(lam, k)
                };
            }
            omega += rho[n] / n as f64;
            while next < cuts.len() && cuts[next] as usize == n {
                out.push(omega);
                next += 1;
            }
        }
        Ok(out)
    }
}

/// `sum_{2j + i = k} lambda(p^{2i})` with trivial character.
fn rho_local_float(lam: f64, k: u32) -> f64 {
    let mut pw = vec![1.0, lam];
    for i in 2..=2 * k as usize {
        pw.push(lam * pw[i - 1] - pw[i - 2]);
    }
    let mut acc = 0.0;
    let mut i = k % 2;
    while i <= k {
        acc += pw[2 * i as usize];
        i += 2;
    }
    acc
}

/// `<f, f>_N` from the partial sums `omega_f`, with the gap between two
/// truncations as a (heuristic) error bar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    pub error_bar: f64,
    pub x: u64,
    pub omega_x: f64,
    pub omega_2x: f64,
    /// `prod_{p | N} L_p(1, Ad^2 f)`.
    pub bad_factor: f64,
    pub heuristic: bool,
}

/// `L_p(1, Ad^2 f)` for `p | N`: `(1 - 1/p)(1 - |lambda_f(p)|^2 / p)^-1`, exactly.
pub fn bad_local_factor(f: &NewformData, p: u64) -> Result<BigRational> {
    ensure!(f.level % p == 0, Precondition, "{p} does not divide the level");
    let a = f.a(p)?;
    let lam2 = BigRational::new(a * a, BigInt::from(p).pow(f.weight - 1));
    let pr = BigRational::from_integer(BigInt::from(p));
    let one = BigRational::one();
    Ok((&one - &one / &pr) / (&one - lam2 / pr))
}

/// `<f, f>_N = (pi/3) psi(N) Gamma(k) L(1, Ad^2 f) / (zeta^(N)(2) (4 pi)^k)`,
/// with `L^(N)(1)` replaced by `omega_f(2x)`. Fails if the relative bar
/// exceeds `max_relative_bar`.
pub fn petersson_norm(f: &NewformData, x: u64, max_relative_bar: Option<f64>) -> Result<NormEstimate> {
    ensure!(x >= 1, Domain, "truncation must be positive");
    let om = f.omega_float(&[x, 2 * x])?;
    let mut bad = 1.0;
    let mut zeta2 = PI * PI / 6.0;
    for p in factor_nonzero(f.level).primes() {
        bad *= bad_local_factor(f, p)?.to_f64().unwrap();
        zeta2 *= 1.0 - 1.0 / (p * p) as f64;
    }
    let k = f.weight as f64;
    let scale = (PI / 3.0) * psi(f.level) as f64 * bad
        * (ln_factorial(f.weight as u64 - 1) - k * (4.0 * PI).ln()).exp()
        / zeta2;
    let value = scale * om[1];
    let error_bar = (scale * (om[1] - om[0])).abs();
    if let Some(r) = max_relative_bar {
        ensure!(
            error_bar <= r * value.abs(),
            Precision,
            "norm bar {:.3e} above {r} of the value at X = {x}",
            error_bar / value.abs()
        );
    }
    Ok(NormEstimate {
        value,
        error_bar,
        x,
        omega_x: om[0],
        omega_2x: om[1],
        bad_factor: bad,
        heuristic: true,
    })
}

/// The data at one prime `p` of a newform of level `M`: `lambda_f(p)`,
/// `chi(p)` and whether `p | M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalData {
    pub p: u64,
    pub lambda: Complex64,
    pub chi: Complex64,
    pub in_level: bool,
}

impl LocalData {
    pub fn validate(&self) -> Result<()> {
        ensure!(is_prime(self.p), Domain, "{} is not prime", self.p);
        if self.in_level {
            ensure!(self.chi.norm() == 0.0, Domain, "chi(p) must vanish for p | M");
        } else {
            ensure!((self.chi.norm() - 1.0).abs() < 1e-12, Domain, "|chi(p)| must be 1 for p !| M");
        }
        Ok(())
    }

    /// `eps_{0,M}(p)`.
    pub fn eps0(&self) -> f64 {
        if self.in_level {
            0.0
        } else {
            1.0
        }
    }

    /// `lambda_f(p^k)` by `lambda(p^{k+1}) = lambda(p) lambda(p^k) - chi(p) lambda(p^{k-1})`.
    pub fn lambda_pow(&self, k: u32) -> Complex64 {
        let (mut a, mut b) = (Complex64::new(1.0, 0.0), self.lambda);
        if k == 0 {
            return a;
        }
        for _ in 1..k {
            let c = self.lambda * b - self.chi * a;
            a = b;
            b = c;
        }
        b
    }

    /// `r_f(p) = 1 - |lambda_f(p)|^2 / (p (1 + eps0 / p)^2)`.
    pub fn r_f(&self) -> f64 {
        let p = self.p as f64;
        let e = 1.0 + self.eps0() / p;
        1.0 - self.lambda.norm_sqr() / (p * e * e)
    }
}

/// `xi_{p^nu}(p^j)`; zero outside the five patterns.
pub fn xi(nu: u32, j: u32, ld: &LocalData) -> Complex64 {
    let p = ld.p as f64;
    let e0 = ld.eps0();
    let c = |x: f64| Complex64::new(x, 0.0);
    let top = |nu: u32| {
        if nu == 1 {
            ld.r_f().powf(-0.5)
        } else {
            ld.r_f().powf(-0.5) * (1.0 - e0 * e0 / (p * p)).powf(-0.5)
        }
    };
    match (nu, j) {
        (0, 0) => c(1.0),
        (1, 1) => c(top(1)),
        (1, 0) => -ld.lambda.conj() / (p.sqrt() * (1.0 + e0 / p)) * top(1),
        (nu, j) if nu >= 2 && j == nu => c(top(nu)),
        (nu, j) if nu >= 2 && j + 1 == nu => -ld.lambda.conj() / p.sqrt() * top(nu),
        (nu, j) if nu >= 2 && j + 2 == nu => ld.chi.conj() / p * top(nu),
        _ => c(0.0),
    }
}

/// `xi_{p^nu}(p^j)` for `nu <= nu_max`, `j <= nu`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XiTable {
    pub data: LocalData,
    pub values: Vec<Vec<Complex64>>,
}

impl XiTable {
    pub fn get(&self, nu: u32, j: u32) -> Complex64 {
        self.values
            .get(nu as usize)
            .and_then(|r| r.get(j as usize))
            .copied()
            .unwrap_or_default()
    }

    /// Number of nonzero entries in each row; at most three.
    pub fn support(&self) -> Vec<usize> {
        self.values
            .iter()
            .map(|r| r.iter().filter(|z| z.norm() > 0.0).count())
            .collect()
    }
}

pub fn xi_table(data: &LocalData, nu_max: u32) -> Result<XiTable> {
    data.validate()?;
    let values = (0..=nu_max)
        .map(|nu| (0..=nu).map(|j| xi(nu, j, data)).collect())
        .collect();
    Ok(XiTable { data: *data, values })
}

/// `m = p^exp m'` with `lambda_f(m') = rest`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalArg {
    pub exp: u32,
    pub rest: Complex64,
}

impl LocalArg {
    fn lambda_div(&self, ld: &LocalData, j: u32) -> Option<Complex64> {
        (j <= self.exp).then(|| ld.lambda_pow(self.exp - j) * self.rest)
    }
}

/// `sum_{d | (p^nu, m)} xi_{p^nu}(d) sqrt(d) lambda_f(m / d)`.
fn xi_sum(nu: u32, m: &LocalArg, ld: &LocalData) -> Complex64 {
    let p = ld.p as f64;
    (0..=nu.min(m.exp))
        .map(|j| xi(nu, j, ld) * p.powf(j as f64 / 2.0) * m.lambda_div(ld, j).unwrap())
        .sum()
}

/// `Xi_{p^nu}(m, n) = conj(xi_sum(m)) xi_sum(n)`.
pub fn big_xi(nu: u32, m: &LocalArg, n: &LocalArg, ld: &LocalData) -> Complex64 {
    xi_sum(nu, m, ld).conj() * xi_sum(nu, n, ld)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VMode {
    /// `sum_{d | p^alpha} Xi_d` from the raw sums.
    Definition,
    /// The case formula valid when `p` does not divide both `m` and `n`.
    Closed,
}

/// `V_{p^alpha}(m, n)`.
pub fn v_palpha(alpha: u32, m: &LocalArg, n: &LocalArg, ld: &LocalData, mode: VMode) -> Result<Complex64> {
    ld.validate()?;
    match mode {
        VMode::Definition => Ok((0..=alpha).map(|nu| big_xi(nu, m, n, ld)).sum()),
        VMode::Closed => {
            ensure!(alpha >= 1, Domain, "closed form needs alpha >= 1");
            ensure!(
                m.exp == 0 || n.exp == 0,
                Precondition,
                "closed form needs (m, n, p) = 1"
            );
            let sp = (ld.p as f64).sqrt();
            let pf = ld.p as f64;
            let x1 = |j| xi(1, j, ld);
            let x2 = |j| xi(2, j, ld);
            let two = alpha >= 2;
            let lm = |j| m.lambda_div(ld, j).map(|z| z.conj());
            let ln = |j| n.lambda_div(ld, j);
            let (lm0, ln0) = (lm(0).unwrap(), ln(0).unwrap());
            let mut diag = 1.0 + x1(0).norm_sqr();
            if two {
                diag += x2(0).norm_sqr();
            }
            let mut v = lm0 * ln0 * diag;
            let mut cross_m = x1(1).conj() * x1(0);
            let mut cross_n = x1(0).conj() * x1(1);
            if two {
                cross_m += x2(1).conj() * x2(0);
                cross_n += x2(0).conj() * x2(1);
            }
            if let Some(z) = lm(1) {
                v += z * ln0 * sp * cross_m;
            }
            if let Some(z) = ln(1) {
                v += lm0 * z * sp * cross_n;
            }
            if two {
                if let Some(z) = lm(2) {
                    v += z * ln0 * pf * x2(2).conj() * x2(0);
                }
                if let Some(z) = ln(2) {
                    v += lm0 * z * pf * x2(0).conj() * x2(2);
                }
            }
            Ok(v)
        }
    }
}

/// Residuals of the `r_f` identities at one prime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RfReport {
    pub r_f: f64,
    /// `|1 + |xi_p(1)|^2 - r_f^-1|`.
    pub first: f64,
    /// `|1 + |xi_p(1)|^2 + |xi_{p^2}(1)|^2 - r_f^-1 (1 - eps0/p^2)^-1|`.
    pub second: f64,
    /// The series identity for `p !| M`, or the Ogg form for `p | M`.
    pub third: Option<f64>,
    /// Bound on the neglected tail of the series.
    pub tail_bar: f64,
}

impl RfReport {
    pub fn max_residual(&self) -> f64 {
        self.first.max(self.second).max(self.third.unwrap_or(0.0))
    }
}

const RF_SERIES_TERMS: u32 = 400;

/// Checks the `r_f(p)` identities. For `p | M`, `ogg` is `a_{M,chi}(p)`.
pub fn r_f_identities(ld: &LocalData, ogg: Option<f64>) -> Result<RfReport> {
    ld.validate()?;
    let p = ld.p as f64;
    let e0 = ld.eps0();
    let r = ld.r_f();
    let first = (1.0 + xi(1, 0, ld).norm_sqr() - 1.0 / r).abs();
    let second = (1.0 + xi(1, 0, ld).norm_sqr() + xi(2, 0, ld).norm_sqr()
        - 1.0 / (r * (1.0 - e0 / (p * p))))
        .abs();
    let mut tail_bar = 0.0;
    let third = if !ld.in_level {
        let lam2 = ld.lambda.norm_sqr();
        ensure!(
            (ld.chi.conj() * ld.lambda * ld.lambda - lam2).norm() <= 1e-12 * (1.0 + lam2),
            Precondition,
            "need |lambda(p)|^2 = conj(chi(p)) lambda(p)^2"
        );
        ensure!(ld.lambda.norm() <= 2.0 + 1e-12, Domain, "|lambda(p)| above 2");
        let mut s = Complex64::new(0.0, 0.0);
        let mut chi_a = Complex64::new(1.0, 0.0);
        for a in 0..=RF_SERIES_TERMS {
            s += chi_a * ld.lambda_pow(2 * a) / p.powi(a as i32);
            chi_a *= ld.chi.conj();
        }
        // |lambda(p^j)| <= j + 1
        let a1 = (RF_SERIES_TERMS + 1) as f64;
        let q = 1.0 / p;
        tail_bar = q.powf(a1) * ((2.0 * a1 + 1.0) / (1.0 - q) + 2.0 * q / ((1.0 - q) * (1.0 - q)));
        Some((s - 1.0 / ((1.0 + 1.0 / p) * r)).norm())
    } else {
        ogg.map(|a| (1.0 / r - 1.0 / (1.0 - a / p)).abs())
    };
    Ok(RfReport {
        r_f: r,
        first,
        second,
        third,
        tail_bar,
    })
}

/// Coefficient `n` of the oldform `f^{(g)} = sum_{d | g} xi_g(d) d^{k/2} f(dz)`.
pub fn oldform_coeff(f: &NewformData, g: u64, n: u64) -> Result<Complex64> {
    ensure!(g >= 1 && n >= 1, Domain, "g and n must be positive");
    let gf = factor_nonzero(g);
    let locals: Vec<(LocalData, u32)> = gf
        .factors
        .iter()
        .map(|&(p, e)| f.local_data(p).map(|ld| (ld, e)))
        .collect::<Result<_>>()?;
    let mut acc = Complex64::new(0.0, 0.0);
    for d in divisors(gcd(g, n)) {
        let mut x = Complex64::new(1.0, 0.0);
        for (ld, e) in &locals {
            x *= xi(*e, arith::vp(d, ld.p), ld);
        }
        let a = f.a(n / d)?.to_f64().unwrap();
        acc += x * (d as f64).powf(f.weight as f64 / 2.0) * a;
    }
    Ok(acc)
}

/// `|a|` as `f64`.
pub fn abs_f64(a: &BigInt) -> f64 {
    a.abs().to_f64().unwrap_or(f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn level11_data(p: u64) -> LocalData {
        NewformData::level11(200).unwrap().local_data(p).unwrap()
    }

    #[test]
    fn delta_and_level11_coefficients() {
        let d = eta_product(&[(1, 24)], 10).unwrap();
        assert_eq!(d.coeffs[1], BigInt::from(1));
        assert_eq!(d.coeffs[2], BigInt::from(-24));
        assert_eq!(d.coeffs[3], BigInt::from(252));
        let t = tau_table(10).unwrap();
        for n in 0..=10 {
            assert_eq!(BigInt::from(t[n]), d.coeffs[n]);
        }
        let f = eta_product(&[(1, 2), (11, 2)], 20).unwrap();
        assert_eq!(f.coeffs[2], BigInt::from(-2));
        assert_eq!(f.coeffs[3], BigInt::from(-1));
        assert_eq!(f.level, 11);
        assert_eq!(f.weight, 2);
        let g = eta_product_i128(&[(1, 2), (11, 2)], 20).unwrap().unwrap();
        assert!(g.iter().zip(&f.coeffs).all(|(a, b)| BigInt::from(*a) == *b));
    }

    #[test]
    fn negative_exponents_use_partitions() {
        // eta(z)^{26} / eta(z)^2 = eta(z)^{24} … shifted by q^{26/24 - 2/24} = q
        let a = eta_product(&[(1, 26), (1, -2)], 30).unwrap();
        let b = eta_product(&[(1, 24)], 30).unwrap();
        assert_eq!(a.coeffs, b.coeffs);
        assert!(eta_product(&[(1, 1)], 5).is_err());
    }

    #[test]
    fn eisenstein_coefficients() {
        assert_eq!(eisenstein(4, 3).unwrap().coeffs[1], BigInt::from(240));
        assert_eq!(eisenstein(6, 3).unwrap().coeffs[1], BigInt::from(-504));
        assert_eq!(eisenstein(14, 3).unwrap().coeffs[0], BigInt::from(1));
        assert!(eisenstein(12, 3).is_err());
        // E4^2 = E8
        let e4 = eisenstein(4, 40).unwrap();
        assert_eq!(e4.mul(&e4).coeffs, eisenstein(8, 40).unwrap().coeffs);
    }

    #[test]
    fn hecke_and_eigenvalues() {
        let d = NewformData::delta(400).unwrap();
        let t2 = hecke_apply(2, &d.expansion()).unwrap();
        assert_eq!(t2.precision(), 200);
        assert!(t2.coeffs.iter().zip(&d.coeffs).all(|(x, y)| *x == y * -24));
        assert_eq!(hecke_apply(1, &d.expansion()).unwrap().coeffs, d.coeffs);
        for m in 1..=20 {
            assert!(d.check_eigen(m).unwrap(), "m = {m}");
        }
        assert!((d.lambda(2).unwrap() + 0.530330).abs() < 1e-6);
        assert!(d.check_hecke_relations(400).unwrap());
        assert!(d.check_deligne());
        assert_eq!(*d.a(4).unwrap(), BigInt::from(-24 * -24 - 2048));
        let f = NewformData::level11(400).unwrap();
        assert!(f.check_eigen(3).unwrap());
        assert!((f.lambda(4).unwrap() - 1.0).abs() < 1e-14);
        assert!(f.check_hecke_relations(400).unwrap());
        assert!(hecke_apply(500, &f.expansion()).is_err());
    }

    #[test]
    fn level_one_products_are_eigenforms() {
        for k in [16, 18, 20, 22, 26] {
            let f = NewformData::shipped(k, 1, 300).unwrap();
            assert!(f.check_hecke_relations(300).unwrap(), "k = {k}");
            assert!(f.check_deligne());
        }
        assert!(NewformData::shipped(24, 1, 10).is_err());
    }

    #[test]
    fn rho_roundtrip() {
        let d = NewformData::delta(2500).unwrap();
        let rho = d.rho_coeffs(50).unwrap();
        assert!(rho[0].is_one());
        for n in 1..=50 {
            assert_eq!(d.lambda_sq_from_rho(n).unwrap(), d.lambda_sq_direct(n).unwrap(), "n = {n}");
        }
        let f = NewformData::level11(2500).unwrap();
        for n in 1..=50 {
            assert_eq!(f.lambda_sq_from_rho(n).unwrap(), f.lambda_sq_direct(n).unwrap(), "n = {n}");
        }
        let om = d.omega_exact(30).unwrap().to_f64().unwrap();
        let fl = d.omega_float(&[30]).unwrap()[0];
        assert!((om - fl).abs() < 1e-12);
    }

    #[test]
    fn level11_bad_factor() {
        let f = NewformData::level11(20).unwrap();
        assert_eq!(
            bad_local_factor(&f, 11).unwrap(),
            BigRational::new(BigInt::from(11), BigInt::from(12))
        );
    }

    #[test]
    fn xi_display_values() {
        let ld = level11_data(2);
        assert_eq!(xi(0, 0, &ld), Complex64::new(1.0, 0.0));
        for nu in 2..5 {
            let lhs = xi(nu, nu - 1, &ld);
            let rhs = -ld.lambda.conj() / 2f64.sqrt() * xi(nu, nu, &ld);
            assert!((lhs - rhs).norm() < 1e-15);
        }
        let t = xi_table(&ld, 5).unwrap();
        assert!(t.support().iter().all(|&s| s <= 3));
    }

    #[test]
    fn r_f_degenerate_and_bad_prime() {
        let ld = LocalData {
            p: 3,
            lambda: Complex64::new(0.0, 0.0),
            chi: Complex64::new(0.0, 0.0),
            in_level: true,
        };
        assert_eq!(ld.r_f(), 1.0);
        let bad = level11_data(11);
        let rep = r_f_identities(&bad, Some(1.0 / 11.0)).unwrap();
        assert!(rep.max_residual() < 1e-12);
    }

    #[test]
    fn oldform_small_cases() {
        let f = NewformData::level11(100).unwrap();
        for n in 1..30 {
            let a = f.a(n).unwrap().to_f64().unwrap();
            assert_eq!(oldform_coeff(&f, 1, n).unwrap().re, a);
        }
        let ld = f.local_data(2).unwrap();
        let z = oldform_coeff(&f, 2, 3).unwrap();
        assert!((z - xi(1, 0, &ld) * -1.0).norm() < 1e-12);
    }
}
