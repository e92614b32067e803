//! The geometric side of the Petersson formula and its newform inversion.
//!
//! `Delta_{k,N,chi}(m, n) = delta(m, n) + 2 pi i^-k sum_{N | c} S_chi(m, n, c) / c J_{k-1}(4 pi sqrt(mn) / c)`
//!
//! The newform average is
//!
//! `Delta*(m, n) = sum_{LM = N} mu(L) R(M, L, chi) sum_{l | L^inf, (l, M) = 1} chibar_M(l) / l Delta_{k,M,chi_M}(m, n l^2)`
//!
//! where `chi_M` is `chi` as a character modulo `M`. Pairs with
//! `cond(chi) !| M` contribute nothing.

use crate::analytic::{self, bessel_j, DivisorBound, TailBoundInput};
use crate::arith::{self, divisors, factor_nonzero, gcd, ln_factorial, mu, psi};
use crate::characters::{character_group, DirichletCharacter};
use crate::config::{default_truncation, DEFAULT_ELL_MAX};
use crate::error::{ensure, Result};
use crate::expsums::{weil_bound, KloostermanKernel};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use std::f64::consts::PI;
use std::sync::atomic::{AtomicBool, Ordering};

/// Flips the sign of `R(M, L, chi)`. Only for checking that the identity
/// suites notice a broken factor.
#[doc(hidden)]
pub static FAULT_FLIP_R: AtomicBool = AtomicBool::new(false);

fn rat(n: u64, d: u64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Ogg's `a_{M,chi}(p)`: 1 if `chi` is not a character mod `M/p`, else `1/p`
/// when `p^2 !| M` and `0` when `p^2 | M`.
pub fn a_ogg(p: u64, m: u64, chi: &DirichletCharacter) -> Result<BigRational> {
    ensure!(arith::is_prime(p), Domain, "{p} is not prime");
    ensure!(m % p == 0, Precondition, "{p} does not divide {m}");
    let f = chi.conductor();
    Ok(if (m / p) % f != 0 {
        BigRational::one()
    } else if m % (p * p) != 0 {
        rat(1, p)
    } else {
        BigRational::zero()
    })
}

/// `F(M, chi)`, with `cond_p` taken from `chi`.
pub fn f_factor(m: u64, chi: &DirichletCharacter) -> BigRational {
    let mut acc = BigRational::one();
    for (p, a) in factor_nonzero(m).factors {
        let c = chi.cond_p(p);
        if a == 1 && c == 1 {
            acc *= rat(p + 1, p);
        } else if a >= 2 && c == a {
            acc *= rat(p, p - 1);
        }
    }
    acc
}

/// `R(M, L, chi)`.
pub fn r_factor(m: u64, l: u64, chi: &DirichletCharacter) -> BigRational {
    let mut acc = rat(1, l);
    for p in factor_nonzero(l).primes() {
        if m % p != 0 {
            if l % (p * p) == 0 {
                acc *= rat(p * p, p * p - 1);
            }
        } else {
            let a = a_ogg(p, m, chi).expect("p | M");
            let one = BigRational::one();
            acc /= &one - a / BigRational::from_integer(BigInt::from(p));
        }
    }
    if FAULT_FLIP_R.load(Ordering::Relaxed) {
        -acc
    } else {
        acc
    }
}

fn prod_p2(m: u64) -> BigRational {
    let mut acc = BigRational::one();
    for (p, a) in factor_nonzero(m).factors {
        if a >= 2 {
            acc *= rat(p * p - 1, p * p);
        }
    }
    acc
}

/// `psi(N) [cond | N] = sum_{LM=N} M F(M) [cond | M] prod_{p^2 | M} (1 - p^-2)`.
pub fn verify_psi_identity(n: u64, chi: &DirichletCharacter) -> bool {
    let f = chi.conductor();
    let lhs = if n % f == 0 {
        BigRational::from_integer(BigInt::from(psi(n)))
    } else {
        BigRational::zero()
    };
    let mut rhs = BigRational::zero();
    for m in divisors(n) {
        if m % f != 0 {
            continue;
        }
        rhs += BigRational::from_integer(BigInt::from(m)) * f_factor(m, chi) * prod_p2(m);
    }
    lhs == rhs
}

/// `R(p^b, p^a) R(p^g, p^(b-g)) = R(p^g, p^(a+b-g))`, for
/// `g <= b` and `cond_p(chi) <= b - 1`.
pub fn verify_r_composition(p: u64, alpha: u32, beta: u32, gamma: u32, chi: &DirichletCharacter) -> Result<bool> {
    ensure!(arith::is_prime(p), Domain, "{p} is not prime");
    ensure!(gamma <= beta, Precondition, "need gamma <= beta");
    ensure!(
        beta >= 1 && chi.cond_p(p) < beta,
        Precondition,
        "need cond_p(chi) <= beta - 1"
    );
    let pw = |e: u32| p.pow(e);
    let lhs = r_factor(pw(beta), pw(alpha), chi) * r_factor(pw(gamma), pw(beta - gamma), chi);
    let rhs = r_factor(pw(gamma), pw(alpha + beta - gamma), chi);
    Ok(lhs == rhs)
}

/// `R(M, L) R(W, Q) [cond | W] = R(W, LQ) [cond | W]` with `N = LM`, `M = WQ`.
pub fn verify_inversion_helper(n: u64, w: u64, q: u64, l: u64, chi: &DirichletCharacter) -> Result<bool> {
    ensure!(l >= 1 && w >= 1 && q >= 1, Domain, "factors must be positive");
    ensure!(w * q * l == n, Precondition, "need N = L W Q");
    let m = w * q;
    if w % chi.conductor() != 0 {
        return Ok(true);
    }
    let lhs = r_factor(m, l, chi) * r_factor(w, q, chi);
    Ok(lhs == r_factor(w, l * q, chi))
}

/// `(psi(LM)/M) prod_{p | LM} (1 - 1/p)(1 - a_{LM}(p)/p)^-1 R(M, L) = prod_{p^2 | M} (1 - p^-2) F(M)`.
pub fn verify_harmonic_factor(l: u64, m: u64, chi: &DirichletCharacter) -> bool {
    let n = l * m;
    let mut lhs = rat(psi(n), m) * r_factor(m, l, chi);
    for p in factor_nonzero(n).primes() {
        let a = a_ogg(p, n, chi).expect("p | N");
        let pr = BigRational::from_integer(BigInt::from(p));
        lhs *= rat(p - 1, p) / (BigRational::one() - a / pr);
    }
    lhs == prod_p2(m) * f_factor(m, chi)
}

/// A Petersson-side value with an upper bound on its distance to the
/// untruncated sum.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaValue {
    pub value: Complex64,
    pub tail_bound: f64,
    pub truncation_c: u64,
    pub ell_truncation: Option<u64>,
    /// False when any piece of `tail_bound` used a heuristic majorant.
    pub certified: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeterssonOptions {
    /// Truncation of the `c`-sum; per-term default when `None`.
    pub trunc: Option<u64>,
    pub ell_max: u64,
    /// Stop the `l`-sum early once the certified remainder is below this.
    pub ell_tolerance: Option<f64>,
    pub divisor_bound: DivisorBound,
}

impl Default for PeterssonOptions {
    fn default() -> Self {
        PeterssonOptions {
            trunc: None,
            ell_max: DEFAULT_ELL_MAX,
            ell_tolerance: None,
            divisor_bound: DivisorBound::Certified,
        }
    }
}

fn i_pow_neg(kappa: u32) -> Complex64 {
    match kappa % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    }
}

fn check_parity(kappa: u32, chi: &DirichletCharacter) -> Result<()> {
    let want = if kappa % 2 == 0 { 1 } else { -1 };
    ensure!(
        chi.parity() == want,
        Precondition,
        "character parity {} does not match (-1)^{kappa}",
        chi.parity()
    );
    Ok(())
}

/// `Delta_{k,N,chi}(m, n)` truncated at `c <= C`, `N = modulus(chi)`.
pub fn delta_geometric(
    kappa: u32,
    chi: &DirichletCharacter,
    m: u64,
    n: u64,
    trunc: Option<u64>,
) -> Result<DeltaValue> {
    delta_geometric_with(kappa, chi, m, n, trunc, DivisorBound::Certified)
}

pub fn delta_geometric_with(
    kappa: u32,
    chi: &DirichletCharacter,
    m: u64,
    n: u64,
    trunc: Option<u64>,
    divisor_bound: DivisorBound,
) -> Result<DeltaValue> {
    ensure!(kappa >= 2, Domain, "weight must be at least 2");
    ensure!(m >= 1 && n >= 1, Domain, "m, n must be positive");
    check_parity(kappa, chi)?;
    let level = chi.modulus();
    let c_max = trunc.unwrap_or_else(|| default_truncation(level, m, n));
    let tail = analytic::petersson_tail_bound(&TailBoundInput {
        kappa,
        level,
        m,
        n,
        trunc: c_max,
        conductor: chi.conductor(),
        squarefree_conductor: chi.squarefree_conductor(),
        divisor_bound,
    })?;
    let kernel = KloostermanKernel::new(chi);
    let x = 4.0 * PI * ((m as f64) * (n as f64)).sqrt();
    let (sum, abs) = kloosterman_bessel_sum(&kernel, kappa, m as i64, n as i64, level, c_max, x)?;
    let delta = if m == n { 1.0 } else { 0.0 };
    let value = Complex64::new(delta, 0.0) + i_pow_neg(kappa) * sum * (2.0 * PI);
    Ok(DeltaValue {
        value,
        tail_bound: 2.0 * PI * tail + 1e-13 * (1.0 + 2.0 * PI * abs),
        truncation_c: c_max,
        ell_truncation: None,
        certified: divisor_bound == DivisorBound::Certified,
    })
}

/// `sum_{c <= C, W | c} S(a, b, c) / c J_{k-1}(x / c)` and the sum of the
/// absolute values of its terms.
fn kloosterman_bessel_sum(
    kernel: &KloostermanKernel,
    kappa: u32,
    a: i64,
    b: i64,
    w: u64,
    c_max: u64,
    x: f64,
) -> Result<(Complex64, f64)> {
    let kmax = c_max / w;
    let terms: Vec<Result<Complex64>> = (1..kmax as usize + 1)
        .into_par_iter()
        .with_min_len(16)
        .map(|k| {
            let c = k as u64 * w;
            let j = bessel_j(kappa - 1, x / c as f64)?;
            if j == 0.0 {
                return Ok(Complex64::new(0.0, 0.0));
            }
            Ok(kernel.eval(a, b, c)? * (j / c as f64))
        })
        .collect();
    let mut sum = Complex64::new(0.0, 0.0);
    let mut abs = 0.0;
    for t in terms {
        let t = t?;
        sum += t;
        abs += t.norm();
    }
    Ok((sum, abs))
}

/// Landau's constant in `|J_nu(x)| <= b x^(-1/3)`, rounded up.
const LANDAU_B: f64 = 0.7858;

/// `sum_{k >= 1} d(k) k^(-1/2) |J_nu(x / k)|`, majorised.
fn bessel_divisor_majorant(nu: u32, x: f64) -> f64 {
    let s = nu as f64 + 0.5;
    let y = x / 2.0;
    let lead = (nu as f64 * y.ln() - ln_factorial(nu as u64)).exp();
    if y < 1.0 {
        let z = s / (s - 1.0);
        return lead * z * z;
    }
    let small = LANDAU_B * x.powf(-1.0 / 3.0) * 1.2 * y.powf(5.0 / 6.0) * (y.ln() + 1.0);
    let large = lead * analytic::divisor_dirichlet_tail(y.floor() as u64, s);
    small + large
}

/// Certified `|Delta_{k,M,chi}(m, n')|` with `cond(chi) | M`.
fn delta_abs_bound(kappa: u32, level: u64, chi_k: f64, m: u64, np: f64) -> f64 {
    let x = 4.0 * PI * (m as f64 * np).sqrt();
    let mf = level as f64;
    2.0 * PI
        * chi_k
        * (m as f64).sqrt()
        * arith::d(level) as f64
        * mf.powf(-0.5)
        * bessel_divisor_majorant(kappa - 1, x / mf)
}

/// Numbers `l > from` composed of `primes`, up to `cap`, as floats.
fn smooth_numbers(primes: &[u64], cap: f64) -> Vec<f64> {
    let mut out = vec![1.0f64];
    for &p in primes {
        let len = out.len();
        for i in 0..len {
            let mut v = out[i] * p as f64;
            while v <= cap {
                out.push(v);
                v *= p as f64;
            }
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out
}

const ELL_ENUM_CAP: f64 = 1e30;

/// Certified bound for `sum_{l > from, l | L^inf, (l, M) = 1} |Delta_{k,M}(m, n l^2)| / l`.
fn ell_tail_bound(kappa: u32, level: u64, chi_k: f64, m: u64, n: u64, primes: &[u64], from: u64) -> f64 {
    if primes.is_empty() {
        return 0.0;
    }
    let mut total = 0.0;
    for l in smooth_numbers(primes, ELL_ENUM_CAP) {
        if l <= from as f64 {
            continue;
        }
        let np = n as f64 * l * l;
        let mut b = delta_abs_bound(kappa, level, chi_k, m, np);
        if (np - m as f64).abs() < 0.5 {
            b += 1.0;
        }
        total += b / l;
    }
    // Beyond the cap: |Delta| / l <= G l^(-1/2) (ln l + H), then
    // ln l <= l^(1/8) / (e / 8) and Rankin's trick with exponent 3/16.
    let nu = kappa - 1;
    let s = nu as f64 + 0.5;
    let x1 = 4.0 * PI * ((m * n) as f64).sqrt() / level as f64;
    let base = 2.0 * PI * chi_k * (m as f64).sqrt() * arith::d(level) as f64 * (level as f64).powf(-0.5);
    let y1 = (x1 / 2.0).max(1e-300);
    let a1 = LANDAU_B * 1.2 * 2f64.powf(-5.0 / 6.0) * 2f64.sqrt();
    let a2 = 2f64.powf(nu as f64 - 0.5) * s / (ln_factorial(nu as u64)).exp();
    let t = s - 1.0;
    // S1(y l) <= (y l)^(1/2) [ (a1 + a2/t)(ln(y l) + 1) + a2 / t^2 ]
    let coef = base * y1.sqrt();
    let h = (y1.ln() + 1.0).max(0.0);
    let c_log = a1 + a2 / t;
    let g_l = coef * c_log;
    let g_0 = coef * (c_log * h + a2 / (t * t));
    let eta = 0.125;
    let mult = g_l / (std::f64::consts::E * eta) + g_0;
    let tau = 3.0 / 16.0;
    let euler: f64 = primes.iter().map(|&p| 1.0 / (1.0 - (p as f64).powf(-tau))).product();
    total + mult * ELL_ENUM_CAP.powf(tau - 0.375) * euler
}

/// One `(L, M)` summand of the newform formulas with its inner `l`-sum.
#[derive(Debug, Clone)]
pub struct NewformPair {
    pub l: u64,
    pub m: u64,
    pub inner: DeltaValue,
}

fn newform_pairs(
    kappa: u32,
    chi: &DirichletCharacter,
    m: u64,
    n: u64,
    opts: &PeterssonOptions,
) -> Result<Vec<NewformPair>> {
    let level = chi.modulus();
    ensure!(
        gcd(m * n, level) == 1,
        Precondition,
        "need (mn, N) = 1, got m = {m}, n = {n}, N = {level}"
    );
    check_parity(kappa, chi)?;
    let mut out = Vec::new();
    for big_m in divisors(level) {
        let big_l = level / big_m;
        if mu(big_l) == 0 || !chi.is_character_mod(big_m) {
            continue;
        }
        let chi_m = chi.restrict(big_m)?;
        let chi_k = (chi.conductor() as f64).powf(0.25) * (chi.squarefree_conductor() as f64).powf(0.25);
        let primes: Vec<u64> = factor_nonzero(big_l)
            .primes()
            .filter(|p| big_m % p != 0)
            .collect();
        let ells: Vec<u64> = smooth_numbers(&primes, opts.ell_max as f64)
            .into_iter()
            .map(|v| v as u64)
            .collect();
        let mut value = Complex64::new(0.0, 0.0);
        let mut tail = 0.0;
        let mut c_used = 0;
        let mut certified = true;
        let mut last = 0;
        for &ell in &ells {
            if let Some(tol) = opts.ell_tolerance {
                if last > 0 && ell_tail_bound(kappa, big_m, chi_k, m, n, &primes, last) < tol {
                    break;
                }
            }
            let np = n * ell * ell;
            let need = default_truncation(big_m, m, np);
            let c = opts.trunc.map_or(need, |t| {
                let floor = if kappa == 2 {
                    (8.0 * PI * ((m * np) as f64).sqrt()).ceil() as u64
                } else {
                    0
                };
                t.max(floor).max(big_m)
            });
            let d = delta_geometric_with(kappa, &chi_m, m, np, Some(c), opts.divisor_bound)?;
            let w = chi_m.eval_u(ell).conj() / ell as f64;
            value += w * d.value;
            tail += d.tail_bound / ell as f64;
            c_used = c_used.max(d.truncation_c);
            certified &= d.certified;
            last = ell;
        }
        tail += ell_tail_bound(kappa, big_m, chi_k, m, n, &primes, last.max(1));
        out.push(NewformPair {
            l: big_l,
            m: big_m,
            inner: DeltaValue {
                value,
                tail_bound: tail,
                truncation_c: c_used,
                ell_truncation: Some(last),
                certified,
            },
        });
    }
    Ok(out)
}

fn combine(pairs: &[NewformPair], weight: impl Fn(&NewformPair) -> f64) -> DeltaValue {
    let mut value = Complex64::new(0.0, 0.0);
    let mut tail = 0.0;
    let mut c = 0;
    let mut ell = 0;
    let mut certified = true;
    for pr in pairs {
        let w = weight(pr);
        value += pr.inner.value * w;
        tail += pr.inner.tail_bound * w.abs();
        c = c.max(pr.inner.truncation_c);
        ell = ell.max(pr.inner.ell_truncation.unwrap_or(0));
        certified &= pr.inner.certified;
    }
    DeltaValue {
        value,
        tail_bound: tail,
        truncation_c: c,
        ell_truncation: Some(ell),
        certified,
    }
}

/// `c_k sum_{f newform} conj(lambda_f(m)) lambda_f(n) / <f, f>`, geometrically.
pub fn delta_star(
    kappa: u32,
    chi: &DirichletCharacter,
    m: u64,
    n: u64,
    opts: &PeterssonOptions,
) -> Result<DeltaValue> {
    let pairs = newform_pairs(kappa, chi, m, n, opts)?;
    Ok(combine(&pairs, |pr| {
        mu(pr.l) as f64 * r_factor(pr.m, pr.l, chi).to_f64().unwrap()
    }))
}

/// Harmonic average of `conj(lambda_f(m)) lambda_f(n)` over newforms.
pub fn harmonic_average(
    kappa: u32,
    chi: &DirichletCharacter,
    m: u64,
    n: u64,
    opts: &PeterssonOptions,
) -> Result<DeltaValue> {
    let pairs = newform_pairs(kappa, chi, m, n, opts)?;
    let psi_n = psi(chi.modulus()) as f64;
    Ok(combine(&pairs, |pr| {
        let w = BigRational::from_integer(BigInt::from(pr.m)) * f_factor(pr.m, chi) * prod_p2(pr.m);
        mu(pr.l) as f64 * w.to_f64().unwrap() / psi_n
    }))
}

/// `prod_{p | N} (1 - 1/p)(1 - a_N(p)/p)^-1`, the factor relating the
/// harmonic average to `delta_star`.
pub fn harmonic_factor(chi: &DirichletCharacter) -> BigRational {
    let n = chi.modulus();
    let mut acc = BigRational::one();
    for p in factor_nonzero(n).primes() {
        let a = a_ogg(p, n, chi).expect("p | N");
        let pr = BigRational::from_integer(BigInt::from(p));
        acc *= rat(p - 1, p) / (BigRational::one() - a / pr);
    }
    acc
}

/// `sum_{LM=N} R(M, L) sum_l chibar(l)/l Delta*_{M}(m, n l^2)`, which should
/// give back `Delta_N(m, n)`. `inner` supplies the `Delta*` values.
pub fn reassemble_delta(
    kappa: u32,
    chi: &DirichletCharacter,
    m: u64,
    n: u64,
    ell_max: u64,
    inner: &PeterssonOptions,
) -> Result<DeltaValue> {
    let level = chi.modulus();
    let mut value = Complex64::new(0.0, 0.0);
    let mut tail = 0.0;
    let mut c = 0;
    for big_m in divisors(level) {
        let big_l = level / big_m;
        if !chi.is_character_mod(big_m) {
            continue;
        }
        let chi_m = chi.restrict(big_m)?;
        let r = r_factor(big_m, big_l, chi).to_f64().unwrap();
        let primes: Vec<u64> = factor_nonzero(big_l)
            .primes()
            .filter(|p| big_m % p != 0)
            .collect();
        for ell in smooth_numbers(&primes, ell_max as f64) {
            let ell = ell as u64;
            let d = delta_star(kappa, &chi_m, m, n * ell * ell, inner)?;
            let w = chi_m.eval_u(ell).conj() * (r / ell as f64);
            value += w * d.value;
            tail += d.tail_bound * w.norm();
            c = c.max(d.truncation_c);
        }
    }
    Ok(DeltaValue {
        value,
        tail_bound: tail,
        truncation_c: c,
        ell_truncation: Some(ell_max),
        certified: false,
    })
}

/// The off-diagonal sum `B(Y, m, W)` with its comparison majorants.
#[derive(Debug, Clone, PartialEq)]
pub struct OffDiagonal {
    pub value: Complex64,
    /// `sum |weights| |S| / c |J|` with `|S|` replaced by the Weil bound.
    pub termwise_majorant: f64,
    /// The `m^(1/4) psi(W) / W^(3/2) sum d_3 log / sqrt(ql)` envelope with
    /// constant 1. Not a proven bound.
    pub ils_envelope: f64,
    pub q_cap: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffDiagonalInput {
    pub y: f64,
    pub m: u64,
    pub w: u64,
    pub q: u64,
    pub kappa: u32,
    pub trunc: Option<u64>,
    pub q_cap: u64,
}

/// `B(Y, m, W) = sum_{l <= Y, (l, WQ) = 1} sum_{q | Q^inf, (q, W) = 1} chibar(ql)/(ql)
/// sum_{W | c} S_chi(m, q^2 l^2, c)/c J_{k-1}(4 pi q l sqrt(m) / c)`, with
/// `chi` taken modulo `W`.
pub fn off_diagonal_b(inp: &OffDiagonalInput, chi: &DirichletCharacter) -> Result<OffDiagonal> {
    ensure!(inp.kappa >= 2, Domain, "weight must be at least 2");
    ensure!(
        chi.modulus() % inp.w == 0,
        Precondition,
        "W = {} must divide the modulus {}",
        inp.w,
        chi.modulus()
    );
    let zero = OffDiagonal {
        value: Complex64::new(0.0, 0.0),
        termwise_majorant: 0.0,
        ils_envelope: 0.0,
        q_cap: inp.q_cap,
    };
    if inp.y < 1.0 || !chi.is_character_mod(inp.w) {
        return Ok(zero);
    }
    let chi_w = chi.restrict(inp.w)?;
    let kernel = KloostermanKernel::new(&chi_w);
    let big_m = inp.w * inp.q;
    let qprimes: Vec<u64> = factor_nonzero(inp.q)
        .primes()
        .filter(|p| inp.w % p != 0)
        .collect();
    let qs: Vec<u64> = smooth_numbers(&qprimes, inp.q_cap as f64)
        .into_iter()
        .map(|v| v as u64)
        .collect();
    let mut out = zero;
    for ell in 1..=(inp.y.floor() as u64) {
        if gcd(ell, big_m) != 1 {
            continue;
        }
        for &q in &qs {
            let ql = q * ell;
            let b = (ql * ql) as i64;
            let x = 4.0 * PI * ql as f64 * (inp.m as f64).sqrt();
            let c_max = inp
                .trunc
                .unwrap_or_else(|| default_truncation(inp.w, inp.m, ql * ql));
            let weight = chi_w.eval_u(ql).conj() / ql as f64;
            let (s, _) = kloosterman_bessel_sum(&kernel, inp.kappa, inp.m as i64, b, inp.w, c_max, x)?;
            out.value += weight * s;
            let mut maj = 0.0;
            for k in 1..=(c_max / inp.w) {
                let c = k * inp.w;
                let j = bessel_j(inp.kappa - 1, x / c as f64)?.abs();
                maj += weil_bound(Some(&chi_w), inp.m as i64, b, c) / c as f64 * j;
            }
            out.termwise_majorant += weight.norm() * maj;
            let g = gcd(inp.m, ql * ql);
            out.ils_envelope += arith::d3(g) as f64 / (ql as f64).sqrt() * (2.0 * (ql * ql) as f64 * inp.m as f64).ln();
        }
    }
    out.ils_envelope *= (inp.m as f64).powf(0.25) / (inp.kappa as f64).powf(5.0 / 6.0) * psi(inp.w) as f64
        / (inp.w as f64).powf(1.5);
    Ok(out)
}

/// Characters modulo `N` of parity `(-1)^kappa`.
pub fn characters_of_parity(level: u64, kappa: u32) -> Result<Vec<DirichletCharacter>> {
    let want = if kappa % 2 == 0 { 1 } else { -1 };
    Ok(character_group(level)?
        .characters()
        .filter(|c| c.parity() == want)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triv(n: u64) -> DirichletCharacter {
        character_group(n).unwrap().trivial()
    }

    fn conductor_char(n: u64, f: u64) -> DirichletCharacter {
        character_group(n)
            .unwrap()
            .characters()
            .find(|c| c.conductor() == f)
            .unwrap()
    }

    #[test]
    fn ogg_examples() {
        assert_eq!(a_ogg(5, 5, &triv(5)).unwrap(), rat(1, 5));
        assert_eq!(a_ogg(5, 25, &triv(25)).unwrap(), BigRational::zero());
        assert_eq!(a_ogg(2, 4, &conductor_char(4, 4)).unwrap(), BigRational::one());
        assert!(a_ogg(3, 4, &triv(4)).is_err());
    }

    #[test]
    fn f_and_r_examples() {
        assert_eq!(f_factor(12, &triv(12)), BigRational::one());
        assert_eq!(f_factor(4, &conductor_char(4, 4)), rat(2, 1));
        assert_eq!(f_factor(3, &conductor_char(3, 3)), rat(4, 3));
        for m in [1u64, 2, 6, 9] {
            assert_eq!(r_factor(m, 1, &triv(m)), BigRational::one());
        }
        assert_eq!(r_factor(1, 7, &triv(7)), rat(1, 7));
        assert_eq!(r_factor(2, 2, &triv(4)), rat(2, 3));
    }

    #[test]
    fn psi_identity_small() {
        assert!(verify_psi_identity(1, &triv(1)));
        assert!(verify_psi_identity(4, &triv(4)));
        for chi in character_group(12).unwrap().characters() {
            assert!(verify_psi_identity(12, &chi));
        }
    }

    #[test]
    fn r_composition_base_case() {
        assert!(verify_r_composition(2, 1, 1, 0, &triv(2)).unwrap());
        assert!(verify_r_composition(3, 2, 2, 2, &triv(9)).unwrap());
        assert!(verify_r_composition(2, 1, 1, 0, &conductor_char(4, 4)).is_err());
    }

    #[test]
    fn inversion_helper_twelve() {
        for chi in character_group(12).unwrap().characters() {
            for l in divisors(12) {
                for w in divisors(12 / l) {
                    let q = 12 / l / w;
                    assert!(verify_inversion_helper(12, w, q, l, &chi).unwrap());
                }
            }
        }
    }

    #[test]
    fn harmonic_factor_identity() {
        for n in 1..=60u64 {
            for chi in character_group(n).unwrap().characters() {
                for m in divisors(n) {
                    if chi.is_character_mod(m) {
                        assert!(verify_harmonic_factor(n / m, m, &chi), "n={n} m={m} {chi:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn parity_mismatch_refused() {
        assert!(delta_geometric(3, &triv(1), 1, 1, Some(100)).is_err());
        assert!(delta_geometric(2, &triv(5), 1, 1, Some(20)).is_err());
    }

    #[test]
    fn weight_four_level_one_vanishes() {
        let d = delta_geometric(4, &triv(1), 1, 1, Some(2000)).unwrap();
        assert!(d.value.norm() <= d.tail_bound + 1e-8, "{d:?}");
    }

    #[test]
    fn off_diagonal_empty() {
        let inp = OffDiagonalInput { y: 0.5, m: 1, w: 1, q: 1, kappa: 4, trunc: None, q_cap: 100 };
        assert_eq!(off_diagonal_b(&inp, &triv(1)).unwrap().value, Complex64::new(0.0, 0.0));
    }
}
