//! Isomorphism classes of elliptic curves `y^2 = x^3 + a x + b` over `F_q`,
//! `q` prime, `5 <= q <= 2000`, with traces, automorphism counts and the
//! invariant factors of the point group.
//!
//! Each class is weighted by `1 / (q |Aut|)`.

use crate::analytic::chebyshev_u;
use crate::arith::{self, factor_nonzero, gcd, is_prime, mul_mod, phi, psi};
use crate::config::MAX_CENSUS_PRIME;
use crate::error::{ensure, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveRecord {
    pub q: u64,
    pub a: u64,
    pub b: u64,
    pub t: i64,
    pub aut: u32,
    pub n1: u64,
    pub n2: u64,
}

impl CurveRecord {
    pub fn order(&self) -> u64 {
        (self.q as i64 + 1 - self.t) as u64
    }
}

fn check_field(q: u64) -> Result<()> {
    ensure!(is_prime(q), Domain, "{q} is not prime");
    ensure!(q >= 5, Domain, "characteristic {q} excluded; need q >= 5");
    ensure!(q <= MAX_CENSUS_PRIME, Domain, "q = {q} above the census cap {MAX_CENSUS_PRIME}");
    Ok(())
}

fn is_singular(q: u64, a: u64, b: u64) -> bool {
    let a3 = mul_mod(mul_mod(a, a, q), a, q);
    let b2 = mul_mod(b, b, q);
    (4 * a3 + 27 * b2) % q == 0
}

/// `chi_2(x)` for `x mod q`, as a table.
fn legendre_table(q: u64) -> Vec<i8> {
    let mut t = vec![-1i8; q as usize];
    t[0] = 0;
    for y in 1..q {
        t[(y * y % q) as usize] = 1;
    }
    t
}

fn count_with(q: u64, a: u64, b: u64, leg: &[i8]) -> u64 {
    let mut acc = 1i64;
    for x in 0..q {
        let v = (mul_mod(mul_mod(x, x, q), x, q) + mul_mod(a, x, q) + b) % q;
        acc += 1 + leg[v as usize] as i64;
    }
    acc as u64
}

/// `#E(F_q)` including the point at infinity.
pub fn count_points(q: u64, a: u64, b: u64) -> Result<u64> {
    check_field(q)?;
    let (a, b) = (a % q, b % q);
    ensure!(!is_singular(q, a, b), Domain, "singular curve: 4a^3 + 27b^2 = 0 mod {q}");
    Ok(count_with(q, a, b, &legendre_table(q)))
}

/// `#E(F_p)` for `y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6`, by a double loop.
/// Works in every characteristic; the curve must be nonsingular mod `p`.
pub fn count_points_long(p: u64, coeffs: [i64; 5]) -> Result<u64> {
    ensure!(is_prime(p), Domain, "{p} is not prime");
    ensure!(p <= MAX_CENSUS_PRIME, Domain, "p above the census cap");
    let [a1, a2, a3, a4, a6] = coeffs.map(|c| arith::reduce(c, p));
    let mut n = 1;
    for x in 0..p {
        let rhs = (mul_mod(mul_mod(x, x, p), x, p) + mul_mod(a2, mul_mod(x, x, p), p) + mul_mod(a4, x, p) + a6) % p;
        for y in 0..p {
            let lhs = (mul_mod(y, y, p) + mul_mod(a1, mul_mod(x, y, p), p) + mul_mod(a3, y, p)) % p;
            if lhs == rhs {
                n += 1;
            }
        }
    }
    Ok(n)
}

/// The curve `y^2 + y = x^3 - x^2 - 10x - 20` of conductor 11.
pub const CURVE_11A: [i64; 5] = [0, -1, 1, -10, -20];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Pt {
    Inf,
    A(u64, u64),
}

struct Curve {
    q: u64,
    a: u64,
}

impl Curve {
    fn inv(&self, x: u64) -> u64 {
        arith::inv_mod(x, self.q).expect("nonzero")
    }
    fn add(&self, p: Pt, r: Pt) -> Pt {
        let q = self.q;
        match (p, r) {
            (Pt::Inf, o) | (o, Pt::Inf) => o,
            (Pt::A(x1, y1), Pt::A(x2, y2)) => {
                let lam = if x1 == x2 {
                    if (y1 + y2) % q == 0 {
                        return Pt::Inf;
                    }
                    let num = (3 * mul_mod(x1, x1, q) + self.a) % q;
                    mul_mod(num, self.inv(2 * y1 % q), q)
                } else {
                    mul_mod((y2 + q - y1) % q, self.inv((x2 + q - x1) % q), q)
                };
                let x3 = (mul_mod(lam, lam, q) + 2 * q - x1 - x2) % q;
                let y3 = (mul_mod(lam, (x1 + q - x3) % q, q) + q - y1) % q;
                Pt::A(x3, y3)
            }
        }
    }
    fn mul(&self, mut k: u64, p: Pt) -> Pt {
        let mut acc = Pt::Inf;
        let mut base = p;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add(acc, base);
            }
            base = self.add(base, base);
            k >>= 1;
        }
        acc
    }
    fn order(&self, p: Pt, n: u64, primes: &[u64]) -> u64 {
        let mut ord = n;
        for &l in primes {
            while ord % l == 0 && self.mul(ord / l, p) == Pt::Inf {
                ord /= l;
            }
        }
        ord
    }
}

fn points(q: u64, a: u64, b: u64, leg: &[i8]) -> impl Iterator<Item = Pt> + '_ {
    let roots = sqrt_table(q);
    (0..q).flat_map(move |x| {
        let v = (mul_mod(mul_mod(x, x, q), x, q) + mul_mod(a, x, q) + b) % q;
        let out: Vec<Pt> = match leg[v as usize] {
            0 => vec![Pt::A(x, 0)],
            1 => {
                let y = roots[v as usize];
                vec![Pt::A(x, y), Pt::A(x, q - y)]
            }
            _ => vec![],
        };
        out.into_iter()
    })
}

fn sqrt_table(q: u64) -> Vec<u64> {
    let mut t = vec![0u64; q as usize];
    for y in 1..q {
        t[(y * y % q) as usize] = y;
    }
    t
}

/// Exponents `e` with `L | e | n` and `(n / e) | gcd(e, q - 1)`.
fn exponent_candidates(l: u64, n: u64, q: u64) -> Vec<u64> {
    arith::divisors(n / l)
        .into_iter()
        .map(|k| l * k)
        .filter(|&e| gcd(e, q - 1) % (n / e) == 0)
        .collect()
}

/// `(n1, n2)` with `E(F_q) = Z/n1 x Z/n2`, `n2 | n1`: `n1` is the lcm of point orders.
pub fn group_structure(q: u64, a: u64, b: u64) -> Result<(u64, u64)> {
    let n = count_points(q, a, b)?;
    Ok(structure_with(q, a % q, b % q, n, &legendre_table(q)))
}

fn structure_with(q: u64, a: u64, b: u64, n: u64, leg: &[i8]) -> (u64, u64) {
    let primes: Vec<u64> = factor_nonzero(n).primes().collect();
    let curve = Curve { q, a };
    let mut l = 1;
    for p in points(q, a, b, leg) {
        let o = curve.order(p, n, &primes);
        let nl = arith::lcm(l, o);
        if nl != l {
            l = nl;
            if exponent_candidates(l, n, q) == [l] {
                break;
            }
        }
    }
    (l, n / l)
}

/// `#{P : k P = O}` by brute force.
pub fn torsion_count(q: u64, a: u64, b: u64, k: u64) -> Result<u64> {
    count_points(q, a, b)?;
    let curve = Curve { q, a: a % q };
    let leg = legendre_table(q);
    Ok(1 + points(q, a % q, b % q, &leg).filter(|&p| curve.mul(k, p) == Pt::Inf).count() as u64)
}

/// `#{u in F_q^* : u^4 a = a, u^6 b = b}`.
fn stabilizer(q: u64, a: u64, b: u64) -> u32 {
    (1..q)
        .filter(|&u| {
            let u2 = mul_mod(u, u, q);
            let u4 = mul_mod(u2, u2, q);
            let u6 = mul_mod(u4, u2, q);
            mul_mod(u4, a, q) == a && mul_mod(u6, b, q) == b
        })
        .count() as u32
}

/// One representative per `F_q`-isomorphism class (lexicographically least),
/// ordered by `(a, b)`.
pub fn enumerate_curves(q: u64) -> Result<Vec<CurveRecord>> {
    check_field(q)?;
    let qs = q as usize;
    let mut seen = vec![false; qs * qs];
    let pw: Vec<(u64, u64)> = (1..q)
        .map(|u| {
            let u2 = mul_mod(u, u, q);
            let u4 = mul_mod(u2, u2, q);
            (u4, mul_mod(u4, u2, q))
        })
        .collect();
    let mut reps = Vec::new();
    for a in 0..q {
        for b in 0..q {
            if seen[a as usize * qs + b as usize] || is_singular(q, a, b) {
                continue;
            }
            for &(u4, u6) in &pw {
                let (x, y) = (mul_mod(u4, a, q), mul_mod(u6, b, q));
                seen[x as usize * qs + y as usize] = true;
            }
            reps.push((a, b));
        }
    }
    let leg = legendre_table(q);
    Ok(reps
        .par_iter()
        .map(|&(a, b)| {
            let n = count_with(q, a, b, &leg);
            let (n1, n2) = structure_with(q, a, b, n, &leg);
            CurveRecord {
                q,
                a,
                b,
                t: q as i64 + 1 - n as i64,
                aut: stabilizer(q, a, b),
                n1,
                n2,
            }
        })
        .collect())
}

/// `sum_classes 1 / |Aut|`, exactly.
pub fn mass(records: &[CurveRecord]) -> BigRational {
    records
        .iter()
        .map(|r| BigRational::new(1.into(), r.aut.into()))
        .fold(BigRational::zero(), |a, b| a + b)
}

/// `Z/alpha1 x Z/alpha2` with `alpha2 | alpha1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupShape {
    pub n1: u64,
    pub n2: u64,
}

impl GroupShape {
    pub fn new(n1: u64, n2: u64) -> Result<Self> {
        ensure!(n1 >= 1 && n2 >= 1, Domain, "invariant factors must be positive");
        ensure!(n1 % n2 == 0, Domain, "need n2 | n1, got ({n1}, {n2})");
        Ok(GroupShape { n1, n2 })
    }
    pub fn trivial() -> Self {
        GroupShape { n1: 1, n2: 1 }
    }
}

/// `Phi_A(E)`: whether `A` embeds in `E(F_q)`.
pub fn phi_a(shape: GroupShape, rec: &CurveRecord) -> bool {
    rec.n1 % shape.n1 == 0 && rec.n2 % shape.n2 == 0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentResult {
    pub q: u64,
    pub j: u32,
    pub shape: GroupShape,
    /// `E_q(U_j(t / 2 sqrt q) Phi_A)`.
    pub expectation: f64,
    /// Exact for `j = 0`.
    #[serde(with = "opt_rational")]
    pub expectation_exact: Option<BigRational>,
    /// `v(n1, n2)`; absent when `q != 1 mod n2`.
    #[serde(with = "opt_rational")]
    pub v_main: Option<BigRational>,
    /// `|expectation - v [j = 0]|`.
    pub deviation: f64,
}

/// `(1/q) sum_{A -> E} U_j(t / 2 sqrt q) / |Aut|` over the records of one field.
pub fn moment_from(records: &[CurveRecord], j: u32, shape: GroupShape) -> Result<MomentResult> {
    ensure!(!records.is_empty(), Domain, "empty census");
    let q = records[0].q;
    let sq = 2.0 * (q as f64).sqrt();
    let mut exact = BigRational::zero();
    let mut acc = 0.0;
    for r in records.iter().filter(|r| phi_a(shape, r)) {
        if j == 0 {
            exact += BigRational::new(1.into(), r.aut.into());
        } else {
            acc += chebyshev_u(j, r.t as f64 / sq)? / r.aut as f64;
        }
    }
    let (expectation, expectation_exact) = if j == 0 {
        let e = exact / BigInt::from(q);
        (e.to_f64().unwrap(), Some(e))
    } else {
        (acc / q as f64, None)
    };
    let v = if (q - 1) % shape.n2 == 0 {
        Some(v_main(shape.n1, shape.n2, q)?)
    } else {
        None
    };
    let main = if j == 0 {
        v.as_ref().map_or(0.0, |v| v.to_f64().unwrap())
    } else {
        0.0
    };
    Ok(MomentResult {
        q,
        j,
        shape,
        expectation,
        expectation_exact,
        v_main: v,
        deviation: (expectation - main).abs(),
    })
}

pub fn moment(q: u64, j: u32, shape: GroupShape) -> Result<MomentResult> {
    moment_from(&enumerate_curves(q)?, j, shape)
}

/// `v(n1, n2) = n1 / (psi(n1) phi(n1) n2^2) prod_{l | n1/(q-1,n1)} (1 + l^(-1 - 2 v_l((q-1,n1)/n2)))`.
pub fn v_main(n1: u64, n2: u64, q: u64) -> Result<BigRational> {
    ensure!(n1 >= 1 && n2 >= 1 && q >= 2, Domain, "positive arguments required");
    ensure!(n1 % n2 == 0, Precondition, "need n2 | n1");
    ensure!((q - 1) % n2 == 0, Precondition, "need q = 1 mod n2");
    let g = gcd(q - 1, n1);
    let inner = g / n2;
    let mut acc = BigRational::new(n1.into(), BigInt::from(psi(n1)) * phi(n1) * n2 * n2);
    for l in factor_nonzero(n1 / g).primes() {
        let e = 1 + 2 * arith::vp(inner, l);
        acc *= BigRational::new(BigInt::from(l).pow(e) + 1, BigInt::from(l).pow(e));
    }
    Ok(acc)
}

/// CSV with header `q,a,b,t,aut,n1,n2`.
pub fn to_csv(records: &[CurveRecord]) -> String {
    let mut out = String::from("q,a,b,t,aut,n1,n2\n");
    for r in records {
        out.push_str(&format!("{},{},{},{},{},{},{}\n", r.q, r.a, r.b, r.t, r.aut, r.n1, r.n2));
    }
    out
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

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mass_is_q() {
        for q in [5u64, 7, 11, 13] {
            let recs = enumerate_curves(q).unwrap();
            assert_eq!(mass(&recs), BigRational::from_integer(q.into()));
            for r in &recs {
                assert!(r.t * r.t <= 4 * q as i64);
                assert_eq!(r.n1 * r.n2, r.order());
                assert_eq!(gcd(r.n1, q - 1) % r.n2, 0);
                assert!([2, 4, 6].contains(&r.aut));
            }
        }
        assert!(enumerate_curves(3).is_err());
        assert!(enumerate_curves(15).is_err());
    }

    #[test]
    fn classes_match_union_find() {
        let q = 5u64;
        let n = (q * q) as usize;
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for a in 0..q {
            for b in 0..q {
                for u in 1..q {
                    let a2 = a * u.pow(4) % q;
                    let b2 = b * u.pow(6) % q;
                    let (x, y) = (find(&mut parent, (a * q + b) as usize), find(&mut parent, (a2 * q + b2) as usize));
                    parent[x] = y;
                }
            }
        }
        let mut roots = std::collections::BTreeSet::new();
        for a in 0..q {
            for b in 0..q {
                if !is_singular(q, a, b) {
                    roots.insert(find(&mut parent, (a * q + b) as usize));
                }
            }
        }
        assert_eq!(roots.len(), enumerate_curves(q).unwrap().len());
    }

    #[test]
    fn aut_matches_j_table() {
        for q in [5u64, 7, 13, 101] {
            for r in enumerate_curves(q).unwrap() {
                let want = if r.a == 0 && q % 3 == 1 {
                    6
                } else if r.b == 0 && q % 4 == 1 {
                    4
                } else {
                    2
                };
                assert_eq!(r.aut, want, "q={q} a={} b={}", r.a, r.b);
            }
        }
    }

    #[test]
    fn point_counts() {
        let mut direct = 1;
        for x in 0..5u64 {
            for y in 0..5u64 {
                if (y * y) % 5 == (x * x * x + 1) % 5 {
                    direct += 1;
                }
            }
        }
        assert_eq!(count_points(5, 0, 1).unwrap(), direct);
        for q in [5u64, 11, 17, 23, 29] {
            assert_eq!(count_points(q, 0, 1).unwrap(), q + 1);
            assert_eq!(count_points_long(q, [0, 0, 0, 0, 1]).unwrap(), q + 1);
        }
        assert!(count_points(7, 0, 0).is_err());
    }

    #[test]
    fn structure_against_torsion_counts() {
        for q in [5u64, 7, 13, 17] {
            for r in enumerate_curves(q).unwrap() {
                for l in [2u64, 3, 5] {
                    let full = torsion_count(q, r.a, r.b, l).unwrap() == l * l;
                    assert_eq!(full, r.n2 % l == 0, "q={q} {r:?} l={l}");
                }
                let cyclic_count = torsion_count(q, r.a, r.b, r.n1).unwrap();
                assert_eq!(cyclic_count, r.order());
                if is_prime(r.order()) {
                    assert_eq!((r.n1, r.n2), (r.order(), 1));
                }
                let two = phi_a(GroupShape::new(2, 1).unwrap(), &r);
                assert_eq!(two, r.order() % 2 == 0);
                let four = phi_a(GroupShape::new(2, 2).unwrap(), &r);
                assert_eq!(four, torsion_count(q, r.a, r.b, 2).unwrap() == 4);
            }
        }
    }

    #[test]
    fn v_examples() {
        assert_eq!(v_main(1, 1, 101).unwrap(), BigRational::from_integer(1.into()));
        assert_eq!(v_main(2, 1, 101).unwrap(), BigRational::new(2.into(), 3.into()));
        assert!(v_main(2, 3, 101).is_err());
    }

    #[test]
    fn moments_small() {
        let recs = enumerate_curves(13).unwrap();
        let m = moment_from(&recs, 0, GroupShape::trivial()).unwrap();
        assert_eq!(m.expectation_exact, Some(BigRational::from_integer(1.into())));
        let m = moment_from(&recs, 1, GroupShape::new(5, 5).unwrap()).unwrap();
        assert_eq!(m.expectation, 0.0);
        assert!(m.v_main.is_none());
    }
}
