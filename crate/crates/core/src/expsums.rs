//! Twisted Kloosterman sums and the character averages `T_W`, `T'_W`.
//!
//! `S_chi(a, b, c) = sum_{d mod c, (d,c)=1} chi(d) e((a d + b dbar) / c)`,
//! where `chi` is evaluated through the primitive character inducing it, so
//! the only requirement is `cond(chi) | c`. When `N | c` this is the same as
//! evaluating `chi` itself. `S(., ., 1) = 1`.
//!
//! The fast path factors `c`, splits the sum with twisted multiplicativity
//!
//! `S_chi(a, b, c1 c2) = S_chi1(a c2bar, b c2bar; c1) S_chi2(a c1bar, b c1bar; c2)`
//!
//! and pairs `d` with `-d` inside each prime-power sum.

use crate::arith::{self, factor_nonzero, gcd, inv_mod, phi, reduce};
use crate::characters::{character_group, DirichletCharacter, TABLE_NON_UNIT};
use crate::config::MAX_KLOOSTERMAN_MODULUS;
use crate::error::{ensure, Result};
use num_complex::Complex64;
use num_traits::ToPrimitive;
use std::f64::consts::TAU;
use std::sync::Arc;

fn e(t: f64) -> Complex64 {
    let (s, c) = (TAU * t).sin_cos();
    Complex64::new(c, s)
}

/// Barrett reduction for moduli below `2^32`.
#[derive(Clone, Copy)]
struct Barrett {
    q: u64,
    m: u128,
}

impl Barrett {
    fn new(q: u64) -> Self {
        debug_assert!(q >= 1 && q < (1 << 32));
        Barrett {
            q,
            m: (u64::MAX / q) as u128,
        }
    }
    #[inline(always)]
    fn reduce(&self, x: u64) -> u64 {
        let qh = ((x as u128 * self.m) >> 64) as u64;
        let mut r = x - qh * self.q;
        while r >= self.q {
            r -= self.q;
        }
        r
    }
    #[inline(always)]
    fn mul(&self, a: u64, b: u64) -> u64 {
        self.reduce(a * b)
    }
}

/// `cos(2 pi k / q)` and `sin(2 pi k / q)` for `0 <= k < q`, by rotation
/// reseeded from `sin_cos` every 32 steps.
fn trig_table(q: u64, want_sin: bool) -> (Vec<f64>, Vec<f64>) {
    let n = q as usize;
    let mut cos = vec![0.0; n];
    let mut sin = if want_sin { vec![0.0; n] } else { Vec::new() };
    let step = TAU / q as f64;
    let (s1, c1) = step.sin_cos();
    let (mut c, mut s) = (1.0, 0.0);
    for k in 0..n {
        if k % 32 == 0 {
            let (sk, ck) = (step * k as f64).sin_cos();
            c = ck;
            s = sk;
        }
        cos[k] = c;
        if want_sin {
            sin[k] = s;
        }
        let nc = c * c1 - s * s1;
        s = s * c1 + c * s1;
        c = nc;
    }
    (cos, sin)
}

/// Local character data at one prime of the modulus.
#[derive(Clone)]
struct LocalChar {
    p: u64,
    cond_exp: u32,
    /// Angles on residues modulo `p^v_p(N)`.
    table: Vec<u32>,
}

/// A reusable evaluator of `S_chi(a, b, c)` for one fixed character.
#[derive(Clone)]
pub struct KloostermanKernel {
    modulus: u64,
    roots: Arc<Vec<Complex64>>,
    locals: Vec<LocalChar>,
}

impl KloostermanKernel {
    pub fn trivial() -> Self {
        KloostermanKernel {
            modulus: 1,
            roots: Arc::new(vec![Complex64::new(1.0, 0.0)]),
            locals: Vec::new(),
        }
    }

    pub fn new(chi: &DirichletCharacter) -> Self {
        let g = chi.group();
        let locals = g
            .components()
            .iter()
            .filter_map(|comp| {
                let cond_exp = chi.cond_p(comp.p);
                if cond_exp == 0 {
                    return None;
                }
                let (_, table) = chi.component_table(comp.p)?;
                Some(LocalChar {
                    p: comp.p,
                    cond_exp,
                    table,
                })
            })
            .collect();
        KloostermanKernel {
            modulus: chi.modulus(),
            roots: Arc::new(g.roots().to_vec()),
            locals,
        }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// `S_chi(a, b, c)` for any `c` with `cond(chi) | c`.
    pub fn eval(&self, a: i64, b: i64, c: u64) -> Result<Complex64> {
        ensure!(c >= 1, Domain, "Kloosterman modulus must be positive");
        ensure!(
            c <= MAX_KLOOSTERMAN_MODULUS,
            Unsupported,
            "Kloosterman modulus {c} above the cap {MAX_KLOOSTERMAN_MODULUS}"
        );
        for lc in &self.locals {
            ensure!(
                c % lc.p.pow(lc.cond_exp) == 0,
                Precondition,
                "conductor of the character does not divide c = {c}"
            );
        }
        if c == 1 {
            return Ok(Complex64::new(1.0, 0.0));
        }
        let f = factor_nonzero(c);
        let mut acc = Complex64::new(1.0, 0.0);
        for (p, _, q) in f.prime_powers() {
            let rest = c / q;
            let rinv = inv_mod(rest % q, q).expect("coprime cofactor");
            let br = Barrett::new(q);
            let aa = br.mul(reduce(a, q), rinv);
            let bb = br.mul(reduce(b, q), rinv);
            let local = self.locals.iter().find(|lc| lc.p == p);
            acc *= self.local_sum(p, q, aa, bb, local);
            if acc == Complex64::new(0.0, 0.0) {
                break;
            }
        }
        Ok(acc)
    }

    fn local_sum(
        &self,
        p: u64,
        q: u64,
        a: u64,
        b: u64,
        local: Option<&LocalChar>,
    ) -> Complex64 {
        let ang = |d: u64| -> u64 {
            match local {
                None => 0,
                Some(lc) => {
                    let r = lc.table[(d % lc.table.len() as u64) as usize];
                    debug_assert_ne!(r, TABLE_NON_UNIT);
                    r as u64
                }
            }
        };
        if q == 2 {
            let s = if (a + b) % 2 == 0 { 1.0 } else { -1.0 };
            return self.roots[ang(1) as usize] * s;
        }
        let br = Barrett::new(q);
        // units in [1, q/2); d and q - d pair up
        let half = q / 2;
        let mut units: Vec<u64> = Vec::with_capacity(half as usize);
        for d in 1..=half {
            if d % p != 0 && d != q - d {
                units.push(d);
            }
        }
        let inverses = batch_inverse(&units, &br);
        let trivial = local.is_none();
        let odd = !trivial && ang(q - 1) != 0;
        let (cos, sin) = trig_table(q, odd);
        if trivial {
            let mut s = 0.0;
            for (&d, &di) in units.iter().zip(&inverses) {
                let t = br.reduce(a * d + br.mul(b, di));
                s += cos[t as usize];
            }
            return Complex64::new(2.0 * s, 0.0);
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (&d, &di) in units.iter().zip(&inverses) {
            let t = br.reduce(a * d + br.mul(b, di)) as usize;
            let w = if odd {
                Complex64::new(0.0, sin[t])
            } else {
                Complex64::new(cos[t], 0.0)
            };
            acc += w * self.roots[ang(d) as usize];
        }
        acc * 2.0
    }
}

/// Inverses of units modulo `q` by prefix products.
fn batch_inverse(xs: &[u64], br: &Barrett) -> Vec<u64> {
    if xs.is_empty() {
        return Vec::new();
    }
    let mut prefix = Vec::with_capacity(xs.len());
    let mut run = 1u64;
    for &x in xs {
        run = br.mul(run, x);
        prefix.push(run);
    }
    let mut inv = inv_mod(run, br.q).expect("product of units is a unit");
    let mut out = vec![0u64; xs.len()];
    for i in (0..xs.len()).rev() {
        out[i] = if i == 0 {
            inv
        } else {
            br.mul(inv, prefix[i - 1])
        };
        inv = br.mul(inv, xs[i]);
    }
    out
}

/// Classical `S(a, b; c)`.
pub fn kloosterman(a: i64, b: i64, c: u64) -> Result<Complex64> {
    KloostermanKernel::trivial().eval(a, b, c)
}

/// `S_chi(a, b; c)`; the modulus of `chi` must divide `c`.
pub fn twisted_kloosterman(chi: &DirichletCharacter, a: i64, b: i64, c: u64) -> Result<Complex64> {
    ensure!(c >= 1, Domain, "Kloosterman modulus must be positive");
    ensure!(
        c % chi.modulus() == 0,
        Precondition,
        "character modulus {} does not divide c = {c}",
        chi.modulus()
    );
    KloostermanKernel::new(chi).eval(a, b, c)
}

/// Straight from the definition, one `sin_cos` per term. Test oracle.
pub fn twisted_kloosterman_naive(
    chi: Option<&DirichletCharacter>,
    a: i64,
    b: i64,
    c: u64,
) -> Result<Complex64> {
    ensure!(c >= 1, Domain, "Kloosterman modulus must be positive");
    if c == 1 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    if let Some(chi) = chi {
        ensure!(
            c % chi.conductor() == 0,
            Precondition,
            "conductor does not divide c = {c}"
        );
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for d in 1..c {
        if gcd(d, c) != 1 {
            continue;
        }
        let di = inv_mod(d, c).unwrap();
        let t = (reduce(a, c) as u128 * d as u128 + reduce(b, c) as u128 * di as u128) % c as u128;
        let w = match chi {
            None => Complex64::new(1.0, 0.0),
            Some(chi) => chi.group().root(chi.primitive_angle(d, c).unwrap()),
        };
        acc += w * e(t as f64 / c as f64);
    }
    Ok(acc)
}

/// `d(c) (a, b, c)^(1/2) c^(1/2) cond^(1/4) cond*^(1/4)`.
pub fn weil_bound(chi: Option<&DirichletCharacter>, a: i64, b: i64, c: u64) -> f64 {
    let g = gcd(gcd(a.unsigned_abs(), b.unsigned_abs()), c);
    let (f, fs) = chi.map_or((1, 1), |x| (x.conductor(), x.squarefree_conductor()));
    arith::d(c) as f64
        * (g as f64).sqrt()
        * (c as f64).sqrt()
        * (f as f64).powf(0.25)
        * (fs as f64).powf(0.25)
}

/// `sum_{x mod p^g, (x,p)=1, x = y mod p^k} e((A x + B xbar) / p^g)`.
pub fn incomplete_kloosterman(p: u64, gamma: u32, k: u32, y: u64, a: u64, b: u64) -> Complex64 {
    debug_assert!(k <= gamma);
    let q = p.pow(gamma);
    if q == 1 {
        return Complex64::new(1.0, 0.0);
    }
    let pk = p.pow(k);
    let start = y % pk;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut x = start;
    while x < q {
        if x % p != 0 {
            let xi = inv_mod(x, q).unwrap();
            let t = (a % q * x + b % q * xi) % q;
            acc += e(t as f64 / q as f64);
        }
        x += pk;
    }
    acc
}

/// Which exponent the Moebius factor in the local Case 3/4 formula carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoebiusVariant {
    /// `mu(p^alpha / delta)`: matches the brute-force sum.
    Alpha,
    /// `mu(p^gamma / delta)`: the alternative reading, kept for comparison.
    Gamma,
}

/// Closed form of the `p`-local factor of `T'_{p^alpha}` at `c = p^gamma`,
/// `beta = v_p(N)`, with local arguments `A, B, D`.
pub fn t_prime_local(
    p: u64,
    alpha: u32,
    beta: u32,
    gamma: u32,
    a: u64,
    b: u64,
    d: u64,
    variant: MoebiusVariant,
) -> Result<Complex64> {
    ensure!(alpha <= gamma, Precondition, "need alpha <= gamma");
    ensure!(alpha <= 2 * beta, Precondition, "need p^alpha | N^2");
    let q = p.pow(gamma);
    let bb = b % q;
    let k = |j: u32| -> Complex64 {
        if bb % p == 0 && j > 0 {
            return Complex64::new(0.0, 0.0);
        }
        let pj = p.pow(j).max(1);
        let y = if j == 0 {
            0
        } else {
            let di = inv_mod(d % pj, pj).expect("(d, p) = 1");
            arith::mul_mod(di, bb % pj, pj)
        };
        incomplete_kloosterman(p, gamma, j, y, a, bb)
    };
    let phi_p = |j: u32| phi(p.pow(j)) as f64;
    let moebius_sum = |top: u32| -> Complex64 {
        // sum_{delta | p^top} phi(delta) mu(p^e / delta) K(v_p delta)
        let e = match variant {
            MoebiusVariant::Alpha => alpha,
            MoebiusVariant::Gamma => gamma,
        };
        let mut s = Complex64::new(0.0, 0.0);
        for j in 0..=top {
            let mu = match e.checked_sub(j) {
                Some(0) => 1.0,
                Some(1) => -1.0,
                _ => 0.0,
            };
            if mu != 0.0 {
                s += k(j) * (phi_p(j) * mu);
            }
        }
        s
    };
    let pf = p as f64;
    Ok(if alpha > beta {
        k(beta) * phi_p(beta)
    } else if alpha == 0 {
        if beta > 0 && bb % p == 0 {
            Complex64::new(0.0, 0.0)
        } else {
            k(0)
        }
    } else if alpha == 1 {
        k(1) * phi_p(1) + moebius_sum(1) / pf
    } else {
        k(alpha) * phi_p(alpha) + moebius_sum(alpha) / (pf - 1.0)
    })
}

/// Parameters of `T_W(a, b, c)` and `T'_W(a, b, c)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TwQuery {
    pub w: u64,
    pub n: u64,
    pub d: i64,
    pub a: i64,
    pub b: i64,
    pub c: u64,
    pub kappa: i64,
}

impl TwQuery {
    pub fn validate(&self) -> Result<()> {
        ensure!(self.n >= 1 && self.w >= 1 && self.c >= 1, Domain, "W, N, c must be positive");
        ensure!((self.n * self.n) % self.w == 0, Precondition, "W must divide N^2");
        ensure!(self.c % self.w == 0, Precondition, "W must divide c");
        ensure!(
            gcd(self.b.unsigned_abs(), self.w) == 1,
            Precondition,
            "(b, W) must be 1"
        );
        ensure!(
            gcd(self.d.unsigned_abs(), self.n) == 1,
            Precondition,
            "(d, N) must be 1"
        );
        Ok(())
    }

    fn with_d(&self, d: i64) -> TwQuery {
        TwQuery { d, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TMode {
    Brute,
    Closed,
}

/// Characters mod `N` with conductor dividing `W`, and their `F(W, chi)`.
fn characters_below(n: u64, w: u64) -> Result<Vec<(DirichletCharacter, f64)>> {
    let g = character_group(n)?;
    Ok(g
        .characters()
        .filter(|chi| w % chi.conductor() == 0)
        .map(|chi| {
            let f = crate::petersson::f_factor(w, &chi).to_f64().unwrap();
            (chi, f)
        })
        .collect())
}

fn t_prime_brute(q: &TwQuery, parity: Option<i32>) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for (chi, f) in characters_below(q.n, q.w)? {
        if parity.is_some_and(|s| chi.parity() != s) {
            continue;
        }
        let weight = chi.eval(q.d) * chi.eval(q.b).conj() * f;
        if weight == Complex64::new(0.0, 0.0) {
            continue;
        }
        acc += weight * KloostermanKernel::new(&chi).eval(q.a, q.b, q.c)?;
    }
    Ok(acc)
}

/// `T'_W(a, b, c)`; closed mode needs `c` and `W` powers of one prime.
pub fn t_prime_sum(q: &TwQuery, mode: TMode) -> Result<Complex64> {
    q.validate()?;
    match mode {
        TMode::Brute => t_prime_brute(q, None),
        TMode::Closed => {
            let fc = factor_nonzero(q.c);
            ensure!(
                fc.factors.len() <= 1,
                Precondition,
                "closed mode needs prime-power c, got {}",
                q.c
            );
            if q.c == 1 {
                return Ok(indicator(gcd(q.b.unsigned_abs(), q.n) == 1));
            }
            let (p, gamma) = fc.factors[0];
            ensure!(
                arith::split_smooth(q.w, p).1 == 1,
                Precondition,
                "closed mode needs W a power of {p}"
            );
            let alpha = if q.w == 1 { 0 } else { arith::vp(q.w, p) };
            let beta = if q.n % p == 0 { arith::vp(q.n, p) } else { 0 };
            let rest = q.n / p.pow(beta);
            if gcd(q.b.unsigned_abs(), rest) != 1 {
                return Ok(Complex64::new(0.0, 0.0));
            }
            let pc = p.pow(gamma);
            t_prime_local(
                p,
                alpha,
                beta,
                gamma,
                reduce(q.a, pc),
                reduce(q.b, pc),
                reduce(q.d, pc),
                MoebiusVariant::Alpha,
            )
        }
    }
}

fn indicator(b: bool) -> Complex64 {
    Complex64::new(if b { 1.0 } else { 0.0 }, 0.0)
}

/// `T'_W` as a product of closed-form local factors over `p | c`, with
/// the arguments twisted by the inverse of the complementary part of `c`.
pub fn t_prime_factored(q: &TwQuery) -> Result<Complex64> {
    q.validate()?;
    let fc = factor_nonzero(q.c);
    let fnn = factor_nonzero(q.n);
    let mut acc = Complex64::new(1.0, 0.0);
    for (p, _) in &fnn.factors {
        if q.c % p != 0 && q.b.rem_euclid(*p as i64) == 0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
    }
    for (p, gamma, pc) in fc.prime_powers() {
        let rest = q.c / pc;
        let ri = inv_mod(rest % pc, pc).unwrap();
        let tw = |x: i64| arith::mul_mod(reduce(x, pc), ri, pc);
        let alpha = if q.w % p == 0 { arith::vp(q.w, p) } else { 0 };
        let beta = fnn.exponent(p);
        acc *= t_prime_local(
            p,
            alpha,
            beta,
            gamma,
            tw(q.a),
            tw(q.b),
            tw(q.d),
            MoebiusVariant::Alpha,
        )?;
    }
    Ok(acc)
}

/// `T_W`: `1/2 T'_W(d) + (-1)^kappa / 2 T'_W(-d)`, evaluated factored.
pub fn t_sum(q: &TwQuery) -> Result<Complex64> {
    q.validate()?;
    let s = if q.kappa.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    Ok(t_prime_factored(q)? * 0.5 + t_prime_factored(&q.with_d(-q.d))? * (0.5 * s))
}

/// `T_W` summed directly over characters of parity `(-1)^kappa`.
pub fn t_sum_brute(q: &TwQuery) -> Result<Complex64> {
    q.validate()?;
    let s = if q.kappa.rem_euclid(2) == 0 { 1 } else { -1 };
    t_prime_brute(q, Some(s))
}

/// The half-sum with `-b` in place of `-d`. It is not `T_W` in general,
/// since `S_chi(a, -b, c) = chi(-1) S_chi(-a, b, c)`.
pub fn t_sum_negated_b(q: &TwQuery) -> Result<Complex64> {
    q.validate()?;
    let s = if q.kappa.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let neg = TwQuery { b: -q.b, ..*q };
    Ok(t_prime_brute(q, None)? * 0.5 + t_prime_brute(&neg, None)? * (0.5 * s))
}

/// `psi(c1) d(c2) (a, b, c2)^(1/2) c2^(1/2)`, `c1` the `W`-smooth part of `c`.
pub fn tsum_bound(w: u64, a: i64, b: i64, c: u64) -> Result<f64> {
    ensure!(w >= 1 && c % w == 0, Precondition, "W must divide c");
    let (c1, c2) = arith::split_smooth(c, w);
    let g = gcd(gcd(a.unsigned_abs(), b.unsigned_abs()), c2);
    Ok(arith::psi(c1) as f64 * arith::d(c2) as f64 * (g as f64).sqrt() * (c2 as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn classical_values() {
        assert!(close(kloosterman(1, 1, 2).unwrap(), Complex64::new(1.0, 0.0), 1e-12));
        assert!(close(kloosterman(1, 1, 3).unwrap(), Complex64::new(-1.0, 0.0), 1e-12));
        for c in 1..40 {
            let v = kloosterman(0, 0, c).unwrap();
            assert!(close(v, Complex64::new(phi(c) as f64, 0.0), 1e-9));
        }
    }

    #[test]
    fn odd_character_mod_four_cancels() {
        let g = character_group(4).unwrap();
        let chi = g.character(1).unwrap();
        assert!(twisted_kloosterman(&chi, 1, 1, 4).unwrap().norm() < 1e-12);
        assert!(twisted_kloosterman(&chi, 1, 1, 6).is_err());
    }

    #[test]
    fn fast_matches_naive() {
        for n in [1u64, 3, 4, 5, 8, 9, 12, 16, 25, 27] {
            let g = character_group(n).unwrap();
            for chi in g.characters() {
                let k = KloostermanKernel::new(&chi);
                for c in (n..=200).step_by(n as usize) {
                    for (a, b) in [(1, 1), (2, -3), (0, 5), (7, 0), (6, 10)] {
                        let x = k.eval(a, b, c).unwrap();
                        let y = twisted_kloosterman_naive(Some(&chi), a, b, c).unwrap();
                        assert!(close(x, y, 1e-9 * c as f64), "{chi:?} c={c} ({a},{b}) {x} {y}");
                    }
                }
            }
        }
    }

    #[test]
    fn weil_examples() {
        assert!((weil_bound(None, 1, 1, 3) - 2.0 * 3f64.sqrt()).abs() < 1e-12);
        assert!((weil_bound(None, 0, 0, 12) - 6.0 * 12.0).abs() < 1e-9);
        let g = character_group(4).unwrap();
        let chi = g.character(1).unwrap();
        let want = 3.0 * 2.0 * 4f64.powf(0.25) * 2f64.powf(0.25);
        assert!((weil_bound(Some(&chi), 1, 1, 4) - want).abs() < 1e-12);
    }

    #[test]
    fn tsum_bound_examples() {
        assert_eq!(tsum_bound(2, 1, 1, 2).unwrap(), 3.0);
        assert!((tsum_bound(2, 1, 1, 6).unwrap() - 6.0 * 3f64.sqrt()).abs() < 1e-12);
        assert_eq!(tsum_bound(4, 1, 1, 4).unwrap(), 6.0);
    }

    #[test]
    fn t_prime_small_examples() {
        let q = TwQuery { w: 2, n: 2, d: 1, a: 1, b: 1, c: 2, kappa: 2 };
        let v = t_prime_sum(&q, TMode::Brute).unwrap();
        assert!(close(v, Complex64::new(1.0, 0.0), 1e-12));
        assert!(t_sum(&TwQuery { kappa: 3, ..q }).unwrap().norm() < 1e-12);
        assert!(close(t_sum(&q).unwrap(), Complex64::new(1.0, 0.0), 1e-12));
        let w1 = TwQuery { w: 1, n: 3, d: 1, a: 2, b: 1, c: 9, kappa: 2 };
        let s = kloosterman(2, 1, 9).unwrap();
        assert!(close(t_prime_sum(&w1, TMode::Closed).unwrap(), s, 1e-10));
    }

    #[test]
    fn closed_matches_brute_on_prime_powers() {
        for p in [2u64, 3, 5] {
            for beta in 0..=2u32 {
                let n = p.pow(beta) * if p == 2 { 3 } else { 2 };
                for alpha in 0..=(2 * beta) {
                    for gamma in alpha.max(1)..=3 {
                        let c = p.pow(gamma);
                        if c > 125 {
                            continue;
                        }
                        for (a, b, d) in [(1i64, 1i64, 1i64), (2, 5, 7), (0, 1, 5), (3, 7, 11)] {
                            let w = p.pow(alpha);
                            let q = TwQuery { w, n, d, a, b, c, kappa: 0 };
                            if q.validate().is_err() {
                                continue;
                            }
                            let x = t_prime_sum(&q, TMode::Brute).unwrap();
                            let y = t_prime_sum(&q, TMode::Closed).unwrap();
                            assert!(close(x, y, 1e-8 * c as f64), "{q:?}: {x} vs {y}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn gamma_variant_disagrees() {
        // p = 3, alpha = 1, beta = 1, gamma = 2
        let q = TwQuery { w: 3, n: 3, d: 1, a: 1, b: 1, c: 9, kappa: 0 };
        let brute = t_prime_sum(&q, TMode::Brute).unwrap();
        let lit = t_prime_local(3, 1, 1, 2, 1, 1, 1, MoebiusVariant::Gamma).unwrap();
        assert!((brute - lit).norm() > 1e-3);
    }

    #[test]
    fn negated_b_form_is_not_t_sum() {
        let q = TwQuery { w: 4, n: 4, d: 1, a: 1, b: 1, c: 8, kappa: 3 };
        let direct = t_sum_brute(&q).unwrap();
        assert!(close(t_sum(&q).unwrap(), direct, 1e-9));
        let lit = t_sum_negated_b(&q).unwrap();
        assert!((lit - direct).norm() > 1e-3, "{lit} {direct}");
    }
}
