//! Bessel `J_k`, Chebyshev `U_j`, `c_kappa`, and majorants for the tail of
//! the Petersson Kloosterman series.

use crate::arith::{self, ln_factorial};
use crate::config::{MAX_BESSEL_ARG, MAX_BESSEL_ORDER, MAX_CHEBYSHEV_DEGREE};
use crate::error::{ensure, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`.
#[derive(Clone, Copy, Debug)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    fn new(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }
    fn two_sum(a: f64, b: f64) -> Dd {
        let s = a + b;
        let v = s - a;
        Dd {
            hi: s,
            lo: (a - (s - v)) + (b - v),
        }
    }
    fn add(self, o: Dd) -> Dd {
        let s = Dd::two_sum(self.hi, o.hi);
        let lo = s.lo + self.lo + o.lo;
        Dd::two_sum(s.hi, lo)
    }
    fn mul_f(self, b: f64) -> Dd {
        let p = self.hi * b;
        let e = self.hi.mul_add(b, -p);
        Dd::two_sum(p, e + self.lo * b)
    }
    fn div_f(self, b: f64) -> Dd {
        let q1 = self.hi / b;
        let r = self.add(Dd::new(q1).mul_f(-b));
        let q2 = r.hi / b;
        Dd::two_sum(q1, q2)
    }
    fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p);
        Dd::two_sum(p, e + self.hi * o.lo + self.lo * o.hi)
    }
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

const SERIES_LIMIT: f64 = 12.0;
const UNDERFLOW: f64 = 1e-290;

/// `J_k(x)` for integers `0 <= k <= 200` and real `0 <= x <= 10^5`.
pub fn bessel_j(k: u32, x: f64) -> Result<f64> {
    ensure!(k <= MAX_BESSEL_ORDER, Domain, "Bessel order {k} above {MAX_BESSEL_ORDER}");
    ensure!(
        x.is_finite() && (0.0..=MAX_BESSEL_ARG).contains(&x),
        Domain,
        "Bessel argument {x} outside [0, {MAX_BESSEL_ARG}]"
    );
    if x == 0.0 {
        return Ok(if k == 0 { 1.0 } else { 0.0 });
    }
    Ok(if x <= SERIES_LIMIT {
        bessel_series(k, x)
    } else {
        bessel_miller(k, x)
    })
}

fn bessel_series(k: u32, x: f64) -> f64 {
    let h = Dd::new(x).div_f(2.0);
    let mut lead = Dd::new(1.0);
    for i in 1..=k {
        lead = lead.mul(h).div_f(i as f64);
        if lead.hi.abs() < 1e-300 {
            return 0.0;
        }
    }
    let h2 = h.mul(h).neg();
    let mut term = lead;
    let mut sum = lead;
    let mut j = 0f64;
    loop {
        j += 1.0;
        term = term.mul(h2).div_f(j * (j + k as f64));
        sum = sum.add(term);
        if term.hi.abs() <= 1e-34 * sum.hi.abs().max(1e-300) && j > h.hi {
            break;
        }
    }
    let v = sum.hi + sum.lo;
    if v.abs() < UNDERFLOW {
        0.0
    } else {
        v
    }
}

fn bessel_miller(k: u32, x: f64) -> f64 {
    let top = (k as f64).max(x);
    let mut n0 = (top + 20.0 * top.cbrt() + 40.0).ceil() as u64;
    if n0 % 2 == 1 {
        n0 += 1;
    }
    let (mut f_next, mut f) = (0.0f64, 1e-30f64);
    let mut target = if k as u64 == n0 { f } else { 0.0 };
    // J_0 + 2 sum J_{2j} = 1
    let mut norm = if n0 % 2 == 0 { 2.0 * f } else { 0.0 };
    let two_over_x = 2.0 / x;
    let mut n = n0;
    while n > 0 {
        let f_prev = (n as f64) * two_over_x * f - f_next;
        f_next = f;
        f = f_prev;
        n -= 1;
        if n == k as u64 {
            target = f;
        }
        if n % 2 == 0 {
            norm += if n == 0 { f } else { 2.0 * f };
        }
        if f.abs() > 1e200 {
            f *= 1e-200;
            f_next *= 1e-200;
            norm *= 1e-200;
            target *= 1e-200;
        }
    }
    let v = target / norm;
    if v.abs() < UNDERFLOW {
        0.0
    } else {
        v
    }
}

/// `U_j(x)` by the three-term recurrence.
pub fn chebyshev_u(j: u32, x: f64) -> Result<f64> {
    ensure!(j <= MAX_CHEBYSHEV_DEGREE, Domain, "Chebyshev degree {j} above {MAX_CHEBYSHEV_DEGREE}");
    let (mut u0, mut u1) = (1.0, 2.0 * x);
    if j == 0 {
        return Ok(u0);
    }
    for _ in 1..j {
        let u2 = 2.0 * x * u1 - u0;
        u0 = u1;
        u1 = u2;
    }
    Ok(u1)
}

/// `Gamma(kappa - 1) / (4 pi)^(kappa - 1)`.
pub fn c_kappa(kappa: u32) -> Result<f64> {
    ensure!(kappa >= 2, Domain, "weight must be at least 2");
    let k = (kappa - 1) as f64;
    Ok((ln_factorial((kappa - 2) as u64) - k * (4.0 * PI).ln()).exp())
}

/// How `d(c)` is majorised in the tail bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DivisorBound {
    /// Partial summation against `sum_{k <= t} d(k) <= t (ln t + 1)`.
    #[default]
    Certified,
    /// `d(c) <= exp(1.066 ln c / ln ln c)`; not a proof.
    Heuristic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailBoundInput {
    pub kappa: u32,
    pub level: u64,
    pub m: u64,
    pub n: u64,
    pub trunc: u64,
    pub conductor: u64,
    pub squarefree_conductor: u64,
    #[serde(default)]
    pub divisor_bound: DivisorBound,
}

/// `sum_{k > K} d(k) k^-s` for `s > 1`, `K >= 1`.
pub fn divisor_dirichlet_tail(big_k: u64, s: f64) -> f64 {
    debug_assert!(s > 1.0 && big_k >= 1);
    let k = big_k as f64;
    let t = s - 1.0;
    s * k.powf(-t) * ((k.ln() + 1.0) / t + 1.0 / (t * t))
}

/// A majorant for `|sum_{c > C, N | c} S_chi(m, n, c) / c J_{kappa-1}(4 pi sqrt(mn) / c)|`.
///
/// Uses the Weil bound with `(m, n, c) <= (m, n)`, `|J_nu(y)| <= (y/2)^nu / nu!`
/// and `d(Nk) <= d(N) d(k)`.
pub fn petersson_tail_bound(inp: &TailBoundInput) -> Result<f64> {
    ensure!(inp.kappa >= 2, Domain, "weight must be at least 2");
    ensure!(inp.level >= 1 && inp.m >= 1 && inp.n >= 1, Domain, "N, m, n must be positive");
    ensure!(
        inp.trunc >= inp.level,
        Precondition,
        "truncation {} below the level {}",
        inp.trunc,
        inp.level
    );
    let x = 4.0 * PI * ((inp.m as f64) * (inp.n as f64)).sqrt();
    if inp.kappa == 2 {
        ensure!(
            inp.trunc as f64 >= 2.0 * x,
            Precondition,
            "weight 2 needs truncation at least 8 pi sqrt(mn) = {:.1}",
            2.0 * x
        );
    }
    let nu = (inp.kappa - 1) as f64;
    let s = nu + 0.5;
    let g = arith::gcd(inp.m, inp.n) as f64;
    let chi_k = (inp.conductor as f64).powf(0.25) * (inp.squarefree_conductor as f64).powf(0.25);
    let lead_ln = nu * (x / 2.0).ln() - ln_factorial(inp.kappa as u64 - 1);
    let k0 = inp.trunc / inp.level;
    let nf = inp.level as f64;
    let tail = match inp.divisor_bound {
        DivisorBound::Certified => {
            arith::d(inp.level) as f64 * nf.powf(-s) * divisor_dirichlet_tail(k0, s)
        }
        DivisorBound::Heuristic => {
            let c = (inp.trunc as f64).max(16.0);
            let eta = 1.066 / c.ln().ln();
            let sigma = s - eta;
            if sigma <= 1.0 {
                f64::INFINITY
            } else {
                let k = k0 as f64;
                nf.powf(eta - s) * (k.powf(1.0 - sigma) / (sigma - 1.0))
            }
        }
    };
    Ok(chi_k * g.sqrt() * lead_ln.exp() * tail)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bessel_named_values() {
        assert_eq!(bessel_j(1, 0.0).unwrap(), 0.0);
        assert_eq!(bessel_j(0, 0.0).unwrap(), 1.0);
        assert!((bessel_j(1, 1.0).unwrap() - 0.4400505857449335).abs() < 1e-16);
        assert!(bessel_j(201, 1.0).is_err());
        assert!(bessel_j(1, -1.0).is_err());
        assert!(bessel_j(1, 2e5).is_err());
    }

    #[test]
    fn recurrence_residual() {
        for k in 1..60u32 {
            for &x in &[0.5, 3.0, 11.9, 12.1, 25.0, 80.0, 300.0, 5000.0] {
                let jm = bessel_j(k - 1, x).unwrap();
                let j0 = bessel_j(k, x).unwrap();
                let jp = bessel_j(k + 1, x).unwrap();
                let r = (jm + jp - 2.0 * k as f64 / x * j0).abs();
                assert!(r <= 1e-9 * j0.abs().max(1.0), "k={k} x={x} r={r}");
                assert!(j0.abs() <= 1.0);
            }
        }
    }

    #[test]
    fn chebyshev_values() {
        assert_eq!(chebyshev_u(0, 0.3).unwrap(), 1.0);
        assert_eq!(chebyshev_u(2, 1.0).unwrap(), 3.0);
        for j in 0..=64 {
            assert_eq!(chebyshev_u(j, 1.0).unwrap(), (j + 1) as f64);
        }
        assert!(chebyshev_u(65, 0.0).is_err());
    }

    #[test]
    fn c_kappa_values() {
        assert!((c_kappa(2).unwrap() - 1.0 / (4.0 * PI)).abs() < 1e-15);
        assert!((c_kappa(3).unwrap() - 1.0 / (4.0 * PI).powi(2)).abs() < 1e-16);
        let want = 3628800.0 / (4.0 * PI).powi(11);
        assert!((c_kappa(12).unwrap() / want - 1.0).abs() < 1e-13);
    }

    fn input(kappa: u32, level: u64, trunc: u64) -> TailBoundInput {
        TailBoundInput {
            kappa,
            level,
            m: 1,
            n: 1,
            trunc,
            conductor: 1,
            squarefree_conductor: 1,
            divisor_bound: DivisorBound::Certified,
        }
    }

    #[test]
    fn tail_bound_examples() {
        assert!(petersson_tail_bound(&input(12, 1, 100)).unwrap() < 1e-12);
        let mut prev = f64::INFINITY;
        for c in [100u64, 200, 400, 800, 1600] {
            let b = petersson_tail_bound(&input(4, 3, c)).unwrap();
            assert!(b <= prev);
            prev = b;
        }
        assert!(petersson_tail_bound(&input(2, 5, 20)).is_err());
        assert!(petersson_tail_bound(&input(4, 5, 4)).is_err());
    }
}
