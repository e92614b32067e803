//! Dirichlet characters modulo `N`.
//!
//! The unit group of `Z/N` is written as a product over `p^a || N` of its
//! local unit groups, each with fixed generators:
//!
//! * odd `p`: the least primitive root modulo `p^a`;
//! * `2^a`, `a >= 3`: `-1` (order 2) and `5` (order `2^(a-2)`);
//! * `4`: `-1`; `2`: no generator.
//!
//! A character is an exponent vector against those generators. Values are
//! stored as angles modulo the group exponent `L` and read out of one shared
//! table of `L`-th roots of unity.

use crate::arith::{self, factor_nonzero};
use crate::config::MAX_CHARACTER_MODULUS;
use crate::error::{ensure, Result};
use num_complex::Complex64;
use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

const NON_UNIT: u32 = u32::MAX;

#[derive(Debug, Clone)]
pub struct LocalComponent {
    pub p: u64,
    pub a: u32,
    /// `p^a`
    pub pa: u64,
    pub generators: Vec<u64>,
    pub orders: Vec<u64>,
    /// `dlog[r][i]` is the exponent of generator `i` in `r`, or `NON_UNIT`.
    dlog: Vec<[u32; 2]>,
}

impl LocalComponent {
    fn new(p: u64, a: u32) -> Self {
        let pa = p.pow(a);
        let mut dlog = vec![[NON_UNIT; 2]; pa as usize];
        let (generators, orders) = if p == 2 {
            match a {
                1 => {
                    dlog[1] = [0, 0];
                    (vec![], vec![])
                }
                2 => {
                    dlog[1] = [0, 0];
                    dlog[3] = [1, 0];
                    (vec![3], vec![2])
                }
                _ => {
                    let ord5 = pa / 4;
                    let mut x = 1u64;
                    for e2 in 0..ord5 {
                        dlog[x as usize] = [0, e2 as u32];
                        dlog[(pa - x) as usize] = [1, e2 as u32];
                        x = x * 5 % pa;
                    }
                    (vec![pa - 1, 5], vec![2, ord5])
                }
            }
        } else {
            let ord = pa / p * (p - 1);
            let g = least_primitive_root(p, a);
            let mut x = 1u64;
            for k in 0..ord {
                dlog[x as usize] = [k as u32, 0];
                x = x * g % pa;
            }
            (vec![g], vec![ord])
        };
        LocalComponent {
            p,
            a,
            pa,
            generators,
            orders,
            dlog,
        }
    }

    /// Exponents of `r` against the generators, or `None` for non-units.
    pub fn log(&self, r: u64) -> Option<[u32; 2]> {
        let v = self.dlog[(r % self.pa) as usize];
        (v[0] != NON_UNIT).then_some(v)
    }

    /// Local conductor exponent of the component character with exponents `e`.
    fn conductor_exponent(&self, e: &[u64]) -> u32 {
        if self.p == 2 {
            match self.a {
                1 => 0,
                2 => {
                    if e[0] == 0 {
                        0
                    } else {
                        2
                    }
                }
                a => {
                    if e[1] == 0 {
                        if e[0] == 0 {
                            0
                        } else {
                            2
                        }
                    } else {
                        a - arith::vp(e[1], 2)
                    }
                }
            }
        } else if e[0] == 0 {
            0
        } else {
            self.a - arith::vp(e[0], self.p)
        }
    }
}

fn least_primitive_root(p: u64, a: u32) -> u64 {
    let order = p - 1;
    let qs: Vec<u64> = factor_nonzero(order).primes().collect();
    let p2 = p * p;
    (2..)
        .find(|&g| {
            g % p != 0
                && qs.iter().all(|&q| arith::pow_mod(g, order / q, p) != 1)
                && (a == 1 || arith::pow_mod(g, p - 1, p2) != 1)
        })
        .expect("primitive roots exist modulo odd prime powers")
}

/// The full group of characters modulo `N`.
pub struct CharacterGroup {
    modulus: u64,
    components: Vec<LocalComponent>,
    /// Each local generator embedded in `Z/N` (1 at the other primes).
    global_generators: Vec<u64>,
    /// `(component, slot)` of each flattened generator.
    slots: Vec<(usize, usize)>,
    orders: Vec<u64>,
    exponent: u64,
    roots: Vec<Complex64>,
    size: u64,
}

impl fmt::Debug for CharacterGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CharacterGroup")
            .field("modulus", &self.modulus)
            .field("orders", &self.orders)
            .finish()
    }
}

impl CharacterGroup {
    pub fn new(modulus: u64) -> Result<Arc<Self>> {
        ensure!(modulus >= 1, Domain, "character modulus must be positive");
        ensure!(
            modulus <= MAX_CHARACTER_MODULUS,
            Unsupported,
            "character modulus {modulus} above the configured cap {MAX_CHARACTER_MODULUS}"
        );
        let f = factor_nonzero(modulus);
        let components: Vec<LocalComponent> = f
            .factors
            .iter()
            .map(|&(p, a)| LocalComponent::new(p, a))
            .collect();
        let mut global_generators = Vec::new();
        let mut slots = Vec::new();
        let mut orders = Vec::new();
        for (ci, comp) in components.iter().enumerate() {
            let rest = modulus / comp.pa;
            for (si, &g) in comp.generators.iter().enumerate() {
                global_generators.push(crt_pair(g, comp.pa, 1, rest));
                slots.push((ci, si));
                orders.push(comp.orders[si]);
            }
        }
        let exponent = orders.iter().fold(1, |acc, &o| arith::lcm(acc, o));
        let roots = (0..exponent)
            .map(|k| {
                let (s, c) = (TAU * k as f64 / exponent as f64).sin_cos();
                Complex64::new(c, s)
            })
            .collect();
        let size = orders.iter().product();
        Ok(Arc::new(CharacterGroup {
            modulus,
            components,
            global_generators,
            slots,
            orders,
            exponent,
            roots,
            size,
        }))
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }
    pub fn size(&self) -> u64 {
        self.size
    }
    pub fn orders(&self) -> &[u64] {
        &self.orders
    }
    pub fn generators(&self) -> &[u64] {
        &self.global_generators
    }
    pub fn components(&self) -> &[LocalComponent] {
        &self.components
    }
    /// Exponent `L` of the group; every value is an `L`-th root of unity.
    pub fn exponent(&self) -> u64 {
        self.exponent
    }
    pub fn root(&self, angle: u64) -> Complex64 {
        self.roots[(angle % self.exponent) as usize]
    }
    pub fn roots(&self) -> &[Complex64] {
        &self.roots
    }

    /// Character with mixed-radix index `index` (first generator fastest).
    pub fn character(self: &Arc<Self>, index: u64) -> Result<DirichletCharacter> {
        ensure!(
            index < self.size,
            Domain,
            "character index {index} out of range for modulus {} ({} characters)",
            self.modulus,
            self.size
        );
        let mut rest = index;
        let exps = self
            .orders
            .iter()
            .map(|&o| {
                let e = rest % o;
                rest /= o;
                e
            })
            .collect();
        Ok(DirichletCharacter {
            group: Arc::clone(self),
            exps,
        })
    }

    pub fn trivial(self: &Arc<Self>) -> DirichletCharacter {
        DirichletCharacter {
            group: Arc::clone(self),
            exps: vec![0; self.orders.len()],
        }
    }

    pub fn characters(self: &Arc<Self>) -> impl Iterator<Item = DirichletCharacter> + '_ {
        (0..self.size).map(move |i| self.character(i).expect("index in range"))
    }

    /// All exponent logs of a residue, or `None` for non-units.
    fn logs(&self, a: u64) -> Option<Vec<u64>> {
        let mut out = Vec::with_capacity(self.slots.len());
        for comp in &self.components {
            let l = comp.log(a % comp.pa)?;
            for (si, _) in comp.generators.iter().enumerate() {
                out.push(l[si] as u64);
            }
        }
        Some(out)
    }
}

/// The unique `x mod m1 m2` with `x = r1 (m1)`, `x = r2 (m2)`.
pub(crate) fn crt_pair(r1: u64, m1: u64, r2: u64, m2: u64) -> u64 {
    if m2 == 1 {
        return r1 % m1;
    }
    if m1 == 1 {
        return r2 % m2;
    }
    let m = m1 * m2;
    let inv = arith::inv_mod(m1 % m2, m2).expect("coprime moduli");
    let t = arith::mul_mod((r2 + m2 - r1 % m2) % m2, inv, m2);
    (r1 + m1 * t) % m
}

pub fn character_group(modulus: u64) -> Result<Arc<CharacterGroup>> {
    CharacterGroup::new(modulus)
}

#[derive(Clone)]
pub struct DirichletCharacter {
    group: Arc<CharacterGroup>,
    exps: Vec<u64>,
}

impl fmt::Debug for DirichletCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "chi[mod {}, exps {:?}]",
            self.group.modulus, self.exps
        )
    }
}

impl PartialEq for DirichletCharacter {
    fn eq(&self, other: &Self) -> bool {
        self.group.modulus == other.group.modulus && self.exps == other.exps
    }
}
impl Eq for DirichletCharacter {}

impl DirichletCharacter {
    pub fn group(&self) -> &Arc<CharacterGroup> {
        &self.group
    }
    pub fn modulus(&self) -> u64 {
        self.group.modulus
    }
    pub fn exponents(&self) -> &[u64] {
        &self.exps
    }

    pub fn index(&self) -> u64 {
        let mut idx = 0;
        let mut radix = 1;
        for (e, o) in self.exps.iter().zip(&self.group.orders) {
            idx += e * radix;
            radix *= o;
        }
        idx
    }

    pub fn is_trivial(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    /// Value as an angle `k` meaning `exp(2 pi i k / L)`; `None` off the units.
    pub fn angle(&self, a: i64) -> Option<u64> {
        let r = arith::reduce(a, self.group.modulus);
        let logs = self.group.logs(r)?;
        Some(self.angle_of_logs(&logs))
    }

    fn angle_of_logs(&self, logs: &[u64]) -> u64 {
        let l = self.group.exponent;
        let mut acc = 0u64;
        for ((&e, &k), &o) in self.exps.iter().zip(logs).zip(&self.group.orders) {
            acc = (acc + (e * k % o) * (l / o)) % l;
        }
        acc
    }

    pub fn eval(&self, a: i64) -> Complex64 {
        match self.angle(a) {
            Some(k) => self.group.roots[k as usize],
            None => Complex64::new(0.0, 0.0),
        }
    }

    pub fn eval_u(&self, a: u64) -> Complex64 {
        self.eval((a % self.group.modulus) as i64)
    }

    pub fn conj(&self) -> DirichletCharacter {
        DirichletCharacter {
            group: Arc::clone(&self.group),
            exps: self
                .exps
                .iter()
                .zip(&self.group.orders)
                .map(|(&e, &o)| (o - e) % o)
                .collect(),
        }
    }

    /// Product with another character of the same modulus.
    pub fn mul(&self, other: &DirichletCharacter) -> DirichletCharacter {
        assert_eq!(self.modulus(), other.modulus());
        DirichletCharacter {
            group: Arc::clone(&self.group),
            exps: self
                .exps
                .iter()
                .zip(&other.exps)
                .zip(&self.group.orders)
                .map(|((&a, &b), &o)| (a + b) % o)
                .collect(),
        }
    }

    /// Exponent slice belonging to component `ci`.
    fn component_exps(&self, ci: usize) -> Vec<u64> {
        let mut out = vec![0, 0];
        for (fi, &(c, s)) in self.group.slots.iter().enumerate() {
            if c == ci {
                out[s] = self.exps[fi];
            }
        }
        out
    }

    /// `v_p(cond(chi))`.
    pub fn cond_p(&self, p: u64) -> u32 {
        self.group
            .components
            .iter()
            .position(|c| c.p == p)
            .map_or(0, |ci| {
                self.group.components[ci].conductor_exponent(&self.component_exps(ci))
            })
    }

    pub fn conductor(&self) -> u64 {
        self.group
            .components
            .iter()
            .enumerate()
            .map(|(ci, c)| c.p.pow(c.conductor_exponent(&self.component_exps(ci))))
            .product()
    }

    /// `prod_{p | cond} p`.
    pub fn squarefree_conductor(&self) -> u64 {
        self.group
            .components
            .iter()
            .enumerate()
            .filter(|(ci, c)| c.conductor_exponent(&self.component_exps(*ci)) > 0)
            .map(|(_, c)| c.p)
            .product()
    }

    pub fn is_primitive(&self) -> bool {
        self.conductor() == self.modulus()
    }

    /// `chi(-1)`.
    pub fn parity(&self) -> i32 {
        match self.angle(-1) {
            Some(0) => 1,
            Some(_) => -1,
            None => unreachable!("-1 is a unit"),
        }
    }

    pub fn is_character_mod(&self, m: u64) -> bool {
        m >= 1 && m % self.conductor() == 0
    }

    /// The character modulo `m | N` inducing `chi`.
    pub fn restrict(&self, m: u64) -> Result<DirichletCharacter> {
        let n = self.modulus();
        ensure!(m >= 1 && n % m == 0, Precondition, "restrict: {m} does not divide {n}");
        ensure!(
            self.is_character_mod(m),
            Precondition,
            "restrict: conductor {} does not divide {m}",
            self.conductor()
        );
        let target = CharacterGroup::new(m)?;
        self.transfer(&target, |g| {
            // any lift of g coprime to N; chi is constant on such lifts
            let mut x = g;
            while arith::gcd(x, n) != 1 {
                x += m;
            }
            x
        })
    }

    /// The character modulo a multiple `m` of `N` induced by `chi`.
    pub fn extend(&self, m: u64) -> Result<DirichletCharacter> {
        let n = self.modulus();
        ensure!(m % n == 0, Precondition, "extend: {n} does not divide {m}");
        let target = CharacterGroup::new(m)?;
        self.transfer(&target, |g| g % n)
    }

    fn transfer(
        &self,
        target: &Arc<CharacterGroup>,
        mut lift: impl FnMut(u64) -> u64,
    ) -> Result<DirichletCharacter> {
        let l = self.group.exponent;
        let exps = target
            .global_generators
            .iter()
            .zip(&target.orders)
            .map(|(&g, &o)| {
                let ang = self.angle(lift(g) as i64).expect("lift is a unit");
                debug_assert_eq!((ang * o) % l, 0);
                ang * o / l
            })
            .collect();
        Ok(DirichletCharacter {
            group: Arc::clone(target),
            exps,
        })
    }

    /// Angle of the primitive character inducing `chi` at a unit `r` modulo
    /// any `c` with `cond(chi) | c`. Returns `None` if `gcd(r, c) > 1`.
    pub fn primitive_angle(&self, r: u64, c: u64) -> Option<u64> {
        if arith::gcd(r, c) != 1 {
            return None;
        }
        let l = self.group.exponent;
        let mut acc = 0u64;
        for (ci, comp) in self.group.components.iter().enumerate() {
            let e = self.component_exps(ci);
            if comp.generators.is_empty() || e.iter().all(|&x| x == 0) {
                continue;
            }
            let ec = if c % comp.p == 0 { arith::vp(c, comp.p) } else { 0 };
            debug_assert!(comp.conductor_exponent(&e) <= ec);
            let rep = if ec >= comp.a {
                r % comp.pa
            } else {
                r % comp.p.pow(ec)
            };
            // rep may be 0 only when ec = 0, i.e. the component is trivial
            let logs = comp.log(rep).expect("representative is a unit");
            for (si, &o) in comp.orders.iter().enumerate() {
                acc = (acc + (e[si] * logs[si] as u64 % o) * (l / o)) % l;
            }
        }
        Some(acc)
    }

    /// Angles of the `p`-component on residues modulo `p^a`, flattened to
    /// the group exponent. `None` marks non-units.
    pub fn component_table(&self, p: u64) -> Option<(u64, Vec<u32>)> {
        let ci = self.group.components.iter().position(|c| c.p == p)?;
        let comp = &self.group.components[ci];
        let e = self.component_exps(ci);
        let l = self.group.exponent;
        let table = (0..comp.pa)
            .map(|r| match comp.log(r) {
                None => NON_UNIT,
                Some(logs) => {
                    let mut acc = 0u64;
                    for (si, &o) in comp.orders.iter().enumerate() {
                        acc = (acc + (e[si] * logs[si] as u64 % o) * (l / o)) % l;
                    }
                    acc as u32
                }
            })
            .collect();
        Some((comp.pa, table))
    }
}

pub(crate) const TABLE_NON_UNIT: u32 = NON_UNIT;

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn group_sizes() {
        assert_eq!(character_group(1).unwrap().size(), 1);
        assert_eq!(character_group(4).unwrap().size(), 2);
        let g8 = character_group(8).unwrap();
        assert_eq!(g8.size(), 4);
        assert_eq!(g8.orders(), &[2, 2]);
        for n in 1..300 {
            assert_eq!(character_group(n).unwrap().size(), arith::phi(n));
        }
    }

    #[test]
    fn mod_four() {
        let g = character_group(4).unwrap();
        let chi = g.character(1).unwrap();
        assert!(close(chi.eval(3), Complex64::new(-1.0, 0.0)));
        assert_eq!(chi.eval(2), Complex64::new(0.0, 0.0));
        assert_eq!(chi.conductor(), 4);
        assert_eq!(chi.squarefree_conductor(), 2);
        assert_eq!(chi.parity(), -1);
        assert_eq!(g.trivial().parity(), 1);
    }

    #[test]
    fn mod_three_parity() {
        let g = character_group(3).unwrap();
        assert_eq!(g.character(1).unwrap().parity(), -1);
    }

    #[test]
    fn conductor_matches_brute_force() {
        for n in 1..=120u64 {
            let g = character_group(n).unwrap();
            for chi in g.characters() {
                let brute = arith::divisors(n)
                    .into_iter()
                    .find(|&f| {
                        (1..n).all(|a| {
                            arith::gcd(a, n) != 1
                                || a % f != 1 % f
                                || chi.angle(a as i64) == Some(0)
                        })
                    })
                    .unwrap();
                assert_eq!(chi.conductor(), brute, "n={n} {chi:?}");
            }
        }
    }

    #[test]
    fn restriction_and_extension() {
        let g12 = character_group(12).unwrap();
        assert!(g12.trivial().is_character_mod(3));
        let g8 = character_group(8).unwrap();
        for chi in g8.characters() {
            if chi.conductor() == 4 {
                assert!(!chi.is_character_mod(2));
                assert!(chi.restrict(2).is_err());
                let r = chi.restrict(4).unwrap();
                for a in [1i64, 3, 5, 7] {
                    assert!(close(r.eval(a), chi.eval(a)));
                }
            }
        }
        for n in [15u64, 36, 40, 63] {
            let g = character_group(n).unwrap();
            for chi in g.characters() {
                let f = chi.conductor();
                let r = chi.restrict(f).unwrap();
                assert!(r.is_primitive());
                let back = r.extend(n).unwrap();
                assert_eq!(back, chi);
            }
        }
    }
}
