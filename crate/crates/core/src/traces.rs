//! Main terms and error envelopes for traces of Hecke operators, exact
//! traces on the small shipped spaces, and the point-count predictor for
//! `X_0(N)`.
//!
//! All O-constants are set to 1 and every envelope is flagged ineffective.

use crate::arith::{self, d, gcd, phi, psi, sigma, square_root};
use crate::characters::DirichletCharacter;
use crate::error::{ensure, Error, Result};
use crate::modforms::NewformData;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// The `epsilon` used wherever an envelope carries `(N m k)^epsilon`.
pub const ENVELOPE_EPS: f64 = 0.05;

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

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MainTerm {
    pub value: Complex64,
    /// Present when `chi(sqrt m)` is `0` or `+-1`.
    #[serde(with = "opt_rational")]
    pub exact: Option<BigRational>,
    /// Divided by `m^((k-1)/2)`, the main term for `T'_m`.
    pub normalized: Complex64,
}

/// `((k-1)/12) chi(sqrt m) m^(k/2-1) psi(N)`, zero unless `m` is a square.
pub fn main_term_mt1(kappa: u32, chi: &DirichletCharacter, m: u64) -> Result<MainTerm> {
    ensure!(kappa >= 2, Domain, "weight must be at least 2");
    ensure!(m >= 1, Domain, "m must be positive");
    let n = chi.modulus();
    check_parity(kappa, chi)?;
    ensure!(gcd(n, m) == 1, Precondition, "need (N, m) = 1, got N = {n}, m = {m}");
    let norm = (m as f64).powf((kappa as f64 - 1.0) / 2.0);
    let Some(r) = square_root(m) else {
        let z = Complex64::new(0.0, 0.0);
        return Ok(MainTerm {
            value: z,
            exact: Some(BigRational::zero()),
            normalized: z,
        });
    };
    let c = chi.eval_u(r);
    // m^(k/2 - 1) = r^(k - 2)
    let base = BigRational::new(
        BigInt::from(kappa - 1) * BigInt::from(r).pow(kappa - 2) * BigInt::from(psi(n)),
        BigInt::from(12),
    );
    let bf = base.to_f64().unwrap();
    let value = c * bf;
    let exact = if c.im.abs() < 1e-12 && (c.re.abs() < 1e-12 || (c.re.abs() - 1.0).abs() < 1e-12) {
        Some(base * BigInt::from(c.re.round() as i64))
    } else {
        None
    };
    Ok(MainTerm {
        value,
        exact,
        normalized: value / norm,
    })
}

/// `((k-1)/24) m^(k/2-1) phi(N) psi(NM) (delta_N(sqrt(m) d, 1) + (-1)^k delta_N(sqrt(m) d, -1))`.
pub fn main_term_mt2(kappa: u32, big_m: u64, n: u64, dd: i64, m: u64) -> Result<BigRational> {
    ensure!(kappa >= 2, Domain, "weight must be at least 2");
    ensure!(big_m >= 1 && n >= 1 && m >= 1, Domain, "M, N, m must be positive");
    ensure!(n % big_m == 0, Precondition, "M = {big_m} does not divide N = {n}");
    ensure!(gcd(n, m) == 1, Precondition, "need (N, m) = 1");
    ensure!(gcd(dd.unsigned_abs(), n) == 1, Precondition, "need (d, N) = 1");
    let Some(r) = square_root(m) else {
        return Ok(BigRational::zero());
    };
    let x = arith::reduce(dd, n) as u128 * r as u128 % n as u128;
    let one = (x == 1 % n as u128) as i64;
    let minus = (x == (n as u128 - 1) % n as u128) as i64;
    let sign = if kappa % 2 == 0 { 1 } else { -1 };
    let ind = one + sign * minus;
    Ok(BigRational::new(
        BigInt::from(kappa - 1)
            * BigInt::from(r).pow(kappa - 2)
            * BigInt::from(phi(n))
            * BigInt::from(psi(n * big_m))
            * BigInt::from(ind),
        BigInt::from(24),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Trivial,
    Serre,
    Petersson,
}

/// The three error envelopes with constant 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Envelopes {
    /// `((k-1)/12) psi(N) d(m) m^((k-1)/2)`.
    pub trivial: f64,
    /// `(sigma(m) max_{f^2 < 4m} psi(f) + d(m) N^(1/2)) m^((k-1)/2) d(N)`.
    pub serre: f64,
    /// `N^(10/11) m^((k-1)/2 + 1/44) k^(61/66) cond^(1/44) cond*^(1/44) (N m k)^eps`.
    pub petersson: f64,
    /// Whether `m` lies in the window where the last envelope is smallest.
    pub crossover: bool,
    pub smallest: Regime,
    pub ineffective: bool,
}

fn max_psi_below(m: u64) -> u64 {
    // f^2 < 4m
    let mut best = 0;
    let mut f = 1;
    while f * f < 4 * m {
        best = best.max(psi(f));
        f += 1;
    }
    best
}

pub fn error_envelopes(kappa: u32, chi: &DirichletCharacter, m: u64) -> Result<Envelopes> {
    ensure!(kappa >= 2, Domain, "weight must be at least 2");
    ensure!(m >= 1, Domain, "m must be positive");
    let n = chi.modulus();
    let (nf, mf, kf) = (n as f64, m as f64, kappa as f64);
    let mk = mf.powf((kf - 1.0) / 2.0);
    let trivial = (kf - 1.0) * psi(n) as f64 / 12.0 * d(m) as f64 * mk;
    let serre = (sigma(m) as f64 * max_psi_below(m) as f64 + d(m) as f64 * nf.sqrt()) * mk * d(n) as f64;
    let (f, fs) = (chi.conductor() as f64, chi.squarefree_conductor() as f64);
    let petersson = nf.powf(10.0 / 11.0)
        * mf.powf((kf - 1.0) / 2.0 + 1.0 / 44.0)
        * kf.powf(61.0 / 66.0)
        * (f * fs).powf(1.0 / 44.0)
        * (nf * mf * kf).powf(ENVELOPE_EPS);
    let lower = nf.powf(8.0 / 13.0) * kf.powf(122.0 / 195.0) * (nf * kf).powf(ENVELOPE_EPS) * (f * fs).powf(1.0 / 65.0);
    let upper = (nf.powi(4) * kf.powf(10.0 / 3.0)).powf(1.0 - ENVELOPE_EPS) / (f * fs);
    let smallest = if petersson <= trivial && petersson <= serre {
        Regime::Petersson
    } else if serre <= trivial {
        Regime::Serre
    } else {
        Regime::Trivial
    };
    Ok(Envelopes {
        trivial,
        serre,
        petersson,
        crossover: lower <= mf && mf <= upper,
        smallest,
        ineffective: true,
    })
}

/// Main term plus envelopes for `tr(T_m | S_k(Gamma_0(N), chi))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEstimate {
    pub main_term: MainTerm,
    pub envelopes: Envelopes,
    /// The smallest of the three envelopes.
    pub error_envelope: f64,
    pub regime: Regime,
}

pub fn trace_estimate(kappa: u32, chi: &DirichletCharacter, m: u64) -> Result<TraceEstimate> {
    let main_term = main_term_mt1(kappa, chi, m)?;
    let envelopes = error_envelopes(kappa, chi, m)?;
    Ok(TraceEstimate {
        main_term,
        error_envelope: envelopes.trivial.min(envelopes.serre).min(envelopes.petersson),
        regime: envelopes.smallest,
        envelopes,
    })
}

/// `tr(T_m | S_k(Gamma_0(N)))` on a shipped space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactTrace {
    pub dimension: u64,
    /// The integer trace of `T_m`.
    #[serde(with = "bigint_str")]
    pub trace: BigInt,
    /// `trace^2 / m^(k-1)`, the square of the `T'_m` trace, exactly.
    #[serde(with = "rational_str")]
    pub normalized_squared: BigRational,
    /// `trace / m^((k-1)/2)` in floating point.
    pub normalized: f64,
}

const ZERO_WEIGHT2_LEVELS: [u64; 15] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 12, 13, 16, 18, 25];

/// Newforms (by level) and multiplicities `d(N/M)` making up `S_k(Gamma_0(N))`,
/// or `None` if the space is not covered.
fn space_decomposition(kappa: u32, n: u64) -> Option<Vec<(u64, u64)>> {
    if kappa % 2 == 1 {
        return Some(vec![]);
    }
    match (kappa, n) {
        (2, n) if ZERO_WEIGHT2_LEVELS.contains(&n) => Some(vec![]),
        (2, 11) => Some(vec![(11, 1)]),
        (2, 22) => Some(vec![(11, 2)]),
        (4 | 6 | 8 | 10 | 14, 1) => Some(vec![]),
        (12 | 16 | 18 | 20 | 22 | 26, 1) => Some(vec![(1, 1)]),
        (12, 2) => Some(vec![(1, 2)]),
        _ => None,
    }
}

/// Whether [`exact_trace_small`] covers `(k, N)`.
pub fn is_small_space(kappa: u32, n: u64) -> bool {
    space_decomposition(kappa, n).is_some()
}

pub fn exact_trace_small(kappa: u32, n: u64, m: u64) -> Result<ExactTrace> {
    ensure!(kappa >= 2 && n >= 1 && m >= 1, Domain, "k >= 2, N >= 1, m >= 1 required");
    ensure!(gcd(m, n) == 1, Precondition, "need (N, m) = 1");
    let parts = space_decomposition(kappa, n)
        .ok_or_else(|| Error::Unsupported(format!("no exact space for weight {kappa}, level {n}")))?;
    let mut trace = BigInt::zero();
    let mut dim = 0;
    for (level, mult) in parts {
        let f = NewformData::shipped(kappa, level, m as usize)?;
        trace += f.a(m)? * BigInt::from(mult);
        dim += mult;
    }
    let den = BigInt::from(m).pow(kappa - 1);
    let normalized_squared = BigRational::new(&trace * &trace, den);
    let normalized = trace.to_f64().unwrap() / (m as f64).powf((kappa as f64 - 1.0) / 2.0);
    Ok(ExactTrace {
        dimension: dim,
        trace,
        normalized_squared,
        normalized,
    })
}

/// `|X_0(N)(F_q)|` predicted by the main term `q + (p-1) psi(N)/12 [v even]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct X0Prediction {
    pub q: u64,
    pub main_term: f64,
    /// The three-way minimum, times `q^(1/2)`.
    pub error_envelope: f64,
    pub envelopes: [f64; 3],
    pub ineffective: bool,
}

pub fn x0_predict(n: u64, p: u64, v: u32) -> Result<X0Prediction> {
    ensure!(arith::is_prime(p), Domain, "{p} is not prime");
    ensure!(n >= 1 && v >= 1, Domain, "N and v must be positive");
    ensure!(n % p != 0, Precondition, "p = {p} divides N = {n}");
    let q = p
        .checked_pow(v)
        .ok_or_else(|| Error::Domain(format!("{p}^{v} overflows")))?;
    let (qf, nf) = (q as f64, n as f64);
    let main_term = qf + if v % 2 == 0 { (p - 1) as f64 * psi(n) as f64 / 12.0 } else { 0.0 };
    let e = ENVELOPE_EPS;
    let envelopes = [
        psi(n) as f64 * qf.sqrt(),
        qf.powf(1.0 / 44.0) * nf.powf(10.0 / 11.0) * (qf * nf).powf(e) * qf.sqrt(),
        (qf.powf(1.5) + nf.sqrt()) * d(n) as f64 * qf.powf(e) * qf.sqrt(),
    ];
    Ok(X0Prediction {
        q,
        main_term,
        error_envelope: envelopes.iter().copied().fold(f64::INFINITY, f64::min),
        envelopes,
        ineffective: true,
    })
}

/// `|X_0(11)(F_p)| = p + 1 - a_p` from the level-11 q-expansion.
pub fn x0_exact_11(p: u64) -> Result<i64> {
    ensure!(arith::is_prime(p), Domain, "{p} is not prime");
    ensure!(p != 11, Precondition, "bad reduction at 11");
    let f = NewformData::level11(p as usize)?;
    let ap = f.a(p)?.to_i64().unwrap();
    Ok(p as i64 + 1 - ap)
}

mod opt_rational {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
        v.as_ref().map(|r| r.to_string()).serialize(s)
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigRational>, D::Error> {
        let s: Option<String> = Option::deserialize(d)?;
        s.map(|s| s.parse().map_err(serde::de::Error::custom)).transpose()
    }
}

pub(crate) mod rational_str {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

mod bigint_str {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::character_group;
    use num_traits::One;

    fn triv(n: u64) -> DirichletCharacter {
        character_group(n).unwrap().trivial()
    }

    #[test]
    fn mt1_examples() {
        assert_eq!(main_term_mt1(12, &triv(1), 2).unwrap().exact, Some(BigRational::zero()));
        let t = main_term_mt1(12, &triv(1), 1).unwrap();
        assert_eq!(t.exact, Some(BigRational::new(11.into(), 12.into())));
        let t = main_term_mt1(2, &triv(5), 4).unwrap();
        assert_eq!(t.exact, Some(BigRational::new(1.into(), 2.into())));
        assert_eq!(exact_trace_small(2, 5, 4).unwrap().trace, BigInt::zero());
        assert!(main_term_mt1(3, &triv(5), 1).is_err());
        assert!(main_term_mt1(2, &triv(5), 5).is_err());
    }

    #[test]
    fn envelope_examples() {
        let e = error_envelopes(2, &triv(5), 1).unwrap();
        assert!((e.trivial - 0.5).abs() < 1e-15);
        // d and sigma only grow along divisibility, so compare m with 2m, 3m, ...
        for m in 1..100 {
            let e = error_envelopes(4, &triv(7), m).unwrap();
            for k in 2..6 {
                if (m * k) % 7 == 0 {
                    continue;
                }
                let f = error_envelopes(4, &triv(7), m * k).unwrap();
                assert!(f.trivial >= e.trivial && f.serre >= e.serre && f.petersson >= e.petersson, "m = {m}");
            }
        }
        let n = 1000;
        let e = error_envelopes(2, &triv(n), n).unwrap();
        let sig = (sigma(n) * max_psi_below(n)) as f64;
        assert!(sig > (d(n) as f64) * (n as f64).sqrt());
        assert!(e.serre > 0.0);
    }

    #[test]
    fn mt2_examples() {
        assert!(main_term_mt2(4, 1, 5, 1, 2).unwrap().is_zero());
        let v = main_term_mt2(4, 1, 5, 1, 1).unwrap();
        assert_eq!(v, BigRational::new(BigInt::from(3 * 4 * 6), 24.into()));
        let v = main_term_mt2(4, 1, 1, 1, 1).unwrap();
        assert_eq!(v, BigRational::new(3.into(), 12.into()));
    }

    #[test]
    fn mt2_is_character_sum_of_mt1() {
        for n in 1..=12u64 {
            for big_m in crate::arith::divisors(n) {
                for kappa in [2u32, 3, 4] {
                    for dd in 1..n.max(2) as i64 {
                        if gcd(dd as u64, n) != 1 {
                            continue;
                        }
                        for m in [1u64, 4, 9, 25, 49, 2] {
                            if gcd(m, n) != 1 {
                                continue;
                            }
                            let g = character_group(n).unwrap();
                            let mut acc = Complex64::new(0.0, 0.0);
                            for chi in g.characters() {
                                let want = if kappa % 2 == 0 { 1 } else { -1 };
                                if chi.parity() != want {
                                    continue;
                                }
                                let lifted = chi.extend(n * big_m).unwrap();
                                acc += chi.eval(dd) * main_term_mt1(kappa, &lifted, m).unwrap().value;
                            }
                            let want = main_term_mt2(kappa, big_m, n, dd, m).unwrap().to_f64().unwrap();
                            assert!((acc.re - want).abs() < 1e-9 && acc.im.abs() < 1e-9, "n={n} M={big_m} k={kappa} d={dd} m={m}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn exact_small_spaces() {
        let t = exact_trace_small(2, 11, 1).unwrap();
        assert!(t.trace.is_one());
        for m in 1..10 {
            assert!(exact_trace_small(4, 1, m).unwrap().trace.is_zero());
        }
        let t = exact_trace_small(12, 1, 2).unwrap();
        assert_eq!(t.trace, BigInt::from(-24));
        assert_eq!(t.normalized_squared, BigRational::new(576.into(), 2048.into()));
        let t = exact_trace_small(2, 22, 3).unwrap();
        assert_eq!(t.trace, BigInt::from(-2));
        assert!(exact_trace_small(2, 37, 1).is_err());
    }

    #[test]
    fn x0_examples() {
        assert_eq!(x0_exact_11(3).unwrap(), 5);
        assert_eq!(x0_exact_11(2).unwrap(), 5);
        assert!(x0_exact_11(11).is_err());
        let p = x0_predict(11, 3, 1).unwrap();
        assert_eq!(p.main_term, 3.0);
        assert!(x0_predict(11, 11, 1).is_err());
        let p = x0_predict(11, 3, 2).unwrap();
        assert_eq!(p.main_term, 9.0 + 2.0);
    }
}
