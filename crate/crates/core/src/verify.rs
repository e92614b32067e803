//! Deterministic identity suites. Each check is a pure function of its
//! inputs and the seed, so two runs give byte-identical reports.

use std::str::FromStr;

use num_complex::Complex64;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::c_kappa;
use crate::arith::{divisors, gcd, is_prime};
use crate::census::{self, GroupShape, CURVE_11A};
use crate::characters::{character_group, DirichletCharacter};
use crate::config::{Tolerances, DEFAULT_SEED};
use crate::error::{Error, Result};
use crate::expsums::{
    t_prime_factored, t_prime_sum, t_sum, t_sum_brute, tsum_bound, twisted_kloosterman,
    twisted_kloosterman_naive, weil_bound, KloostermanKernel, TMode, TwQuery,
};
use crate::modforms::{
    petersson_norm, r_f_identities, v_palpha, LocalArg, LocalData, NewformData, VMode,
};
use crate::petersson::{
    self, a_ogg, delta_geometric, delta_star, verify_harmonic_factor, verify_inversion_helper,
    verify_psi_identity, verify_r_composition, PeterssonOptions,
};
use crate::traces::x0_exact_11;

pub const REPORT_SCHEMA: &str = "hecke.verify.v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub cases: u64,
    pub max_error: Option<f64>,
    pub tolerance: Option<f64>,
    pub detail: String,
}

impl Check {
    fn exact(name: &str, cases: u64, failures: Vec<String>) -> Check {
        Check {
            name: name.into(),
            passed: failures.is_empty(),
            cases,
            max_error: None,
            tolerance: None,
            detail: summarize(&failures),
        }
    }

    fn measured(name: &str, cases: u64, max_error: f64, tolerance: f64, failures: Vec<String>) -> Check {
        Check {
            name: name.into(),
            passed: failures.is_empty() && max_error <= tolerance,
            cases,
            max_error: Some(max_error),
            tolerance: Some(tolerance),
            detail: summarize(&failures),
        }
    }

    fn errored(name: &str, e: Error) -> Check {
        Check {
            name: name.into(),
            passed: false,
            cases: 0,
            max_error: None,
            tolerance: None,
            detail: format!("error: {e}"),
        }
    }
}

fn summarize(failures: &[String]) -> String {
    match failures.len() {
        0 => String::new(),
        1 => failures[0].clone(),
        n => format!("{} (and {} more)", failures[0], n - 1),
    }
}

fn wrap(name: &str, f: impl FnOnce() -> Result<Check>) -> Check {
    f().unwrap_or_else(|e| Check::errored(name, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub suite: Suite,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    All,
    Expsums,
    Petersson,
    Modforms,
    Census,
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "all" => Suite::All,
            "expsums" => Suite::Expsums,
            "petersson" => Suite::Petersson,
            "modforms" => Suite::Modforms,
            "census" => Suite::Census,
            _ => return Err(Error::Domain(format!("unknown suite {s:?}"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub seed: u64,
    pub tolerances: Tolerances,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: DEFAULT_SEED,
            tolerances: Tolerances::default(),
        }
    }
}

pub fn run(suite: Suite, opts: &VerifyOptions) -> Report {
    let tol = &opts.tolerances;
    let mut checks = Vec::new();
    let on = |s: Suite| suite == Suite::All || suite == s;
    if on(Suite::Petersson) {
        checks.push(psi_identity(300));
        checks.push(r_composition());
        checks.push(inversion_helper(200));
        checks.push(harmonic_factor(60));
    }
    if on(Suite::Expsums) {
        checks.push(kloosterman_fast_vs_naive(60, tol));
        checks.push(tw_grid(opts.seed, tol));
    }
    if on(Suite::Petersson) {
        checks.push(dimension_zero(tol));
        checks.push(eigen_recovery(tol));
    }
    if on(Suite::Modforms) {
        checks.push(norm_closure(tol));
        checks.push(hecke_relations());
        checks.push(rho_inversion());
        checks.push(xi_v_grid(tol));
        checks.push(r_f_grid(tol));
        checks.push(level11_bridge(50));
    }
    if on(Suite::Census) {
        checks.extend(census_checks(&[5, 7, 11, 13, 101, 211], &[101, 211, 401]));
    }
    Report {
        schema: REPORT_SCHEMA.into(),
        suite,
        seed: opts.seed,
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}

/// All characters mod every `N <= n_max`, in index order.
fn all_characters(n_max: u64) -> Result<Vec<DirichletCharacter>> {
    let mut out = Vec::new();
    for n in 1..=n_max {
        out.extend(character_group(n)?.characters());
    }
    Ok(out)
}

pub fn psi_identity(n_max: u64) -> Check {
    wrap("psi_identity", || {
        let chars = all_characters(n_max)?;
        let failures: Vec<String> = chars
            .par_iter()
            .filter(|chi| !verify_psi_identity(chi.modulus(), chi))
            .map(|chi| format!("N = {}, chi #{}", chi.modulus(), chi.index()))
            .collect();
        Ok(Check::exact("psi_identity", chars.len() as u64, failures))
    })
}

pub fn r_composition() -> Check {
    wrap("r_composition", || {
        let mut cases = 0;
        let mut failures = Vec::new();
        for p in [2u64, 3, 5, 7] {
            for beta in 1..=4u32 {
                // the identity only sees chi through its p-part
                let g = character_group(p.pow(beta))?;
                for chi in g.characters().filter(|c| c.cond_p(p) < beta) {
                    for alpha in 0..=4u32 {
                        for gamma in 0..=beta {
                            cases += 1;
                            if !verify_r_composition(p, alpha, beta, gamma, &chi)? {
                                failures.push(format!(
                                    "p = {p}, (a, b, g) = ({alpha}, {beta}, {gamma}), chi #{}",
                                    chi.index()
                                ));
                            }
                        }
                    }
                }
            }
        }
        Ok(Check::exact("r_composition", cases, failures))
    })
}

pub fn inversion_helper(n_max: u64) -> Check {
    wrap("inversion_helper", || {
        let chars = all_characters(n_max)?;
        let results: Vec<Result<(u64, Vec<String>)>> = chars
            .par_iter()
            .map(|chi| {
                let n = chi.modulus();
                let mut cases = 0;
                let mut bad = Vec::new();
                for l in divisors(n) {
                    let m = n / l;
                    for w in divisors(m) {
                        cases += 1;
                        if !verify_inversion_helper(n, w, m / w, l, chi)? {
                            bad.push(format!("N = {n}, (L, W) = ({l}, {w}), chi #{}", chi.index()));
                        }
                    }
                }
                Ok((cases, bad))
            })
            .collect();
        let mut cases = 0;
        let mut failures = Vec::new();
        for r in results {
            let (c, b) = r?;
            cases += c;
            failures.extend(b);
        }
        Ok(Check::exact("inversion_helper", cases, failures))
    })
}

pub fn harmonic_factor(n_max: u64) -> Check {
    wrap("harmonic_factor", || {
        let chars = all_characters(n_max)?;
        let mut cases = 0;
        let mut failures = Vec::new();
        for chi in &chars {
            let n = chi.modulus();
            for m in divisors(n) {
                if !chi.is_character_mod(m) {
                    continue;
                }
                cases += 1;
                if !verify_harmonic_factor(n / m, m, chi) {
                    failures.push(format!("N = {n}, M = {m}, chi #{}", chi.index()));
                }
            }
        }
        Ok(Check::exact("harmonic_factor", cases, failures))
    })
}

pub fn kloosterman_fast_vs_naive(c_max: u64, tol: &Tolerances) -> Check {
    wrap("kloosterman_fast_vs_naive", || {
        let mut worst: f64 = 0.0;
        let mut cases = 0;
        let mut failures = Vec::new();
        for c in 1..=c_max {
            for chi in character_group(c)?.characters() {
                for (a, b) in [(1i64, 1i64), (2, 3), (0, 5), (-7, 4), (c as i64, 1)] {
                    cases += 1;
                    let fast = twisted_kloosterman(&chi, a, b, c)?;
                    let slow = twisted_kloosterman_naive(Some(&chi), a, b, c)?;
                    worst = worst.max((fast - slow).norm() / c as f64);
                    if fast.norm() > weil_bound(Some(&chi), a, b, c) * (1.0 + 1e-12) + 1e-9 {
                        failures.push(format!("Weil bound fails at c = {c}, chi #{}", chi.index()));
                    }
                }
            }
        }
        Ok(Check::measured(
            "kloosterman_fast_vs_naive",
            cases,
            worst,
            tol.character_per_term,
            failures,
        ))
    })
}

const TW_C_MAX: u64 = 96;
const TW_SAMPLES: usize = 1_000;

/// Per-term discrepancy and bound violations for one `T_W` query.
fn tw_case(q: &TwQuery) -> Result<(f64, Option<String>)> {
    let g = character_group(q.n)?;
    let chars: Vec<DirichletCharacter> = g.characters().filter(|c| q.w % c.conductor() == 0).collect();
    let terms = (chars.len() as u64 * q.c).max(1) as f64;
    let brute = t_prime_sum(q, TMode::Brute)?;
    let fact = t_prime_factored(q)?;
    let tb = t_sum_brute(q)?;
    let tf = t_sum(q)?;
    let err = (brute - fact).norm().max((tb - tf).norm()) / terms;
    let mut bad = None;
    for chi in &chars {
        let s = KloostermanKernel::new(chi).eval(q.a, q.b, q.c)?;
        if s.norm() > weil_bound(Some(chi), q.a, q.b, q.c) * (1.0 + 1e-12) + 1e-9 {
            bad = Some(format!("Weil bound fails at {q:?}, chi #{}", chi.index()));
        }
    }
    if tf.norm() > tsum_bound(q.w, q.a, q.b, q.c)? * (1.0 + 1e-12) + 1e-9 {
        bad = Some(format!("T_W bound fails at {q:?}"));
    }
    Ok((err, bad))
}

fn units(n: u64) -> Vec<i64> {
    (1..=n).filter(|&d| gcd(d, n) == 1).map(|d| d as i64).collect()
}

fn tw_levels(n: u64) -> Vec<u64> {
    divisors(n * n).into_iter().filter(|&w| w <= TW_C_MAX).collect()
}

/// Exhaustive grid for `N <= 12`, seeded samples for `13 <= N <= 24`.
pub fn tw_queries(seed: u64) -> Vec<TwQuery> {
    let mut out = Vec::new();
    for n in 1..=12u64 {
        let ds = units(n);
        for w in tw_levels(n) {
            for c in (w..=TW_C_MAX).step_by(w as usize) {
                for b in 0..c as i64 {
                    if gcd(b as u64, w) != 1 {
                        continue;
                    }
                    for &d in &ds {
                        for (a, kappa) in [(1i64, 2i64), (3, 3)] {
                            out.push(TwQuery { w, n, d, a, b, c, kappa });
                        }
                    }
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..TW_SAMPLES {
        let n = rng.random_range(13..=24u64);
        let ws = tw_levels(n);
        let w = ws[rng.random_range(0..ws.len())];
        let c = w * rng.random_range(1..=TW_C_MAX / w);
        let b = loop {
            let b = rng.random_range(0..c as i64);
            if gcd(b as u64, w) == 1 {
                break b;
            }
        };
        let ds = units(n);
        let d = ds[rng.random_range(0..ds.len())];
        let a = rng.random_range(-(c as i64)..=c as i64);
        let kappa = rng.random_range(2..=3i64);
        out.push(TwQuery { w, n, d, a, b, c, kappa });
    }
    out
}

pub fn tw_grid(seed: u64, tol: &Tolerances) -> Check {
    wrap("tw_grid", || {
        let qs = tw_queries(seed);
        let results: Vec<Result<(f64, Option<String>)>> = qs.par_iter().map(tw_case).collect();
        let mut worst: f64 = 0.0;
        let mut failures = Vec::new();
        for r in results {
            let (e, bad) = r?;
            worst = worst.max(e);
            failures.extend(bad);
        }
        Ok(Check::measured("tw_grid", qs.len() as u64, worst, tol.tsum_per_term, failures))
    })
}

pub const DIMENSION_ZERO: [(u32, u64); 9] = [
    (4, 1),
    (6, 1),
    (8, 1),
    (10, 1),
    (14, 1),
    (2, 2),
    (2, 3),
    (2, 5),
    (2, 7),
];

/// `|Delta(m, n)| - tail` must stay below the slack; the reported error is
/// the largest `|Delta|` seen.
pub fn dimension_zero(tol: &Tolerances) -> Check {
    wrap("dimension_zero", || {
        let mut worst: f64 = 0.0;
        let mut cases = 0;
        let mut failures = Vec::new();
        for (kappa, n) in DIMENSION_ZERO {
            let chi = character_group(n)?.trivial();
            for m in 1..=3u64 {
                for k in 1..=3u64 {
                    if gcd(m * k, n) != 1 {
                        continue;
                    }
                    cases += 1;
                    let v = delta_geometric(kappa, &chi, m, k, None)?;
                    let a = v.value.norm();
                    worst = worst.max(a);
                    if a > v.tail_bound + tol.petersson_slack {
                        failures.push(format!(
                            "(k, N) = ({kappa}, {n}), (m, n) = ({m}, {k}): |Delta| = {a:.3e} > tail {:.3e}",
                            v.tail_bound
                        ));
                    }
                }
            }
        }
        Ok(Check {
            name: "dimension_zero".into(),
            passed: failures.is_empty(),
            cases,
            max_error: Some(worst),
            tolerance: None,
            detail: summarize(&failures),
        })
    })
}

/// Options used for eigenvalue recovery. The `l`-sum converges fast and a
/// short one is enough; at weight 2 the error is dominated by the `c` cut.
pub fn eigen_options(kappa: u32) -> PeterssonOptions {
    PeterssonOptions {
        ell_max: 100,
        trunc: (kappa == 2).then_some(20_000),
        ..Default::default()
    }
}

/// `Delta*(1, m) / Delta*(1, 1)` against the q-expansion eigenvalues.
pub fn eigen_recovery(tol: &Tolerances) -> Check {
    wrap("eigen_recovery", || {
        let mut worst2: f64 = 0.0;
        let mut worst12: f64 = 0.0;
        let mut cases = 0;
        for (kappa, n, ms) in [(2u32, 11u64, &[2u64, 3, 4, 5, 9][..]), (12, 1, &[2, 3, 4][..])] {
            let chi = character_group(n)?.trivial();
            let opts = eigen_options(kappa);
            let f = NewformData::shipped(kappa, n, 20)?;
            let d1 = delta_star(kappa, &chi, 1, 1, &opts)?.value;
            for &m in ms {
                cases += 1;
                let r = (delta_star(kappa, &chi, 1, m, &opts)?.value / d1).re;
                let e = (r - f.lambda(m)?).abs();
                if kappa == 2 {
                    worst2 = worst2.max(e);
                } else {
                    worst12 = worst12.max(e);
                }
            }
        }
        let passed = worst2 <= tol.eigen_weight2 && worst12 <= tol.eigen_weight12;
        Ok(Check {
            name: "eigen_recovery".into(),
            passed,
            cases,
            max_error: Some(worst2.max(worst12)),
            tolerance: Some(tol.eigen_weight2),
            detail: format!("weight 2: {worst2:.3e} (tol {:e}); weight 12: {worst12:.3e} (tol {:e})",
                tol.eigen_weight2, tol.eigen_weight12),
        })
    })
}

pub const NORM_X: u64 = 10_000;

/// `Delta(1, 1) <Delta, Delta> / c_12 = 1` with the norm from partial sums.
pub fn norm_closure(tol: &Tolerances) -> Check {
    wrap("norm_closure", || {
        let f = NewformData::delta(2 * NORM_X as usize)?;
        let norm = petersson_norm(&f, NORM_X, None)?;
        let chi = character_group(1)?.trivial();
        let d = delta_geometric(12, &chi, 1, 1, None)?;
        let closure = d.value.re * norm.value / c_kappa(12)?;
        let err = (closure - 1.0).abs();
        let bar = norm.error_bar / norm.value;
        let mut failures = Vec::new();
        if bar > tol.norm_closure {
            failures.push(format!("norm bar {bar:.3e} too wide"));
        }
        let mut c = Check::measured("norm_closure", 1, err, tol.norm_closure, failures);
        c.detail = format!("closure {closure:.9}, norm {:.10e} +- {:.2e}", norm.value, norm.error_bar);
        Ok(c)
    })
}

pub fn hecke_relations() -> Check {
    wrap("hecke_relations", || {
        let mut cases = 0;
        let mut failures = Vec::new();
        for (kappa, n) in crate::modforms::SHIPPED_SPACES {
            let f = NewformData::shipped(kappa, n, 400)?;
            cases += 1;
            if !f.check_hecke_relations(20)? || !f.check_deligne() {
                failures.push(format!("(k, N) = ({kappa}, {n})"));
            }
            for m in [2u64, 3, 5] {
                if n % m == 0 {
                    continue;
                }
                cases += 1;
                if !f.check_eigen(m)? {
                    failures.push(format!("T_{m} at (k, N) = ({kappa}, {n})"));
                }
            }
        }
        Ok(Check::exact("hecke_relations", cases, failures))
    })
}

/// `|lambda(n)|^2` from the `rho` coefficients against the direct value.
pub fn rho_inversion() -> Check {
    wrap("rho_inversion", || {
        let mut cases = 0;
        let mut failures = Vec::new();
        for f in [NewformData::delta(200)?, NewformData::level11(200)?] {
            for n in 1..=60u64 {
                cases += 1;
                if f.lambda_sq_from_rho(n)? != f.lambda_sq_direct(n)? {
                    failures.push(format!("n = {n} at level {}", f.level));
                }
            }
        }
        Ok(Check::exact("rho_inversion", cases, failures))
    })
}

/// Eigenform data at small primes plus synthetic local data with
/// nontrivial nebentype, `lambda = t e^{i theta / 2}`, `chi(p) = e^{i theta}`.
pub fn local_data_grid() -> Result<Vec<(LocalData, Option<f64>)>> {
    let mut out = Vec::new();
    let delta = NewformData::delta(20)?;
    let f11 = NewformData::level11(20)?;
    for p in [2u64, 3] {
        out.push((delta.local_data(p)?, None));
        out.push((f11.local_data(p)?, None));
    }
    let triv11 = character_group(11)?.trivial();
    let ogg = a_ogg(11, 11, &triv11)?.to_f64();
    out.push((f11.local_data(11)?, ogg));
    for p in [2u64, 3, 5] {
        for theta in [0.7f64, 2.1] {
            for t in [0.3f64, 1.7] {
                let lambda = Complex64::from_polar(t, theta / 2.0);
                out.push((
                    LocalData { p, lambda, chi: Complex64::from_polar(1.0, theta), in_level: false },
                    None,
                ));
                out.push((
                    LocalData { p, lambda, chi: Complex64::new(0.0, 0.0), in_level: true },
                    None,
                ));
            }
        }
    }
    Ok(out)
}

pub fn xi_v_grid(tol: &Tolerances) -> Check {
    wrap("xi_v_grid", || {
        let rests = [Complex64::new(1.0, 0.0), Complex64::new(0.6, -0.8), Complex64::new(-1.3, 0.4)];
        let mut worst: f64 = 0.0;
        let mut cases = 0;
        for (ld, _) in local_data_grid()? {
            for alpha in 1..=3u32 {
                for em in 0..=3u32 {
                    for en in 0..=3u32 {
                        if em != 0 && en != 0 {
                            continue;
                        }
                        for (i, &rm) in rests.iter().enumerate() {
                            let rn = rests[(i + 1) % rests.len()];
                            let m = LocalArg { exp: em, rest: rm };
                            let n = LocalArg { exp: en, rest: rn };
                            let a = v_palpha(alpha, &m, &n, &ld, VMode::Definition)?;
                            let b = v_palpha(alpha, &m, &n, &ld, VMode::Closed)?;
                            worst = worst.max((a - b).norm());
                            cases += 1;
                        }
                    }
                }
            }
        }
        Ok(Check::measured("xi_v_grid", cases, worst, tol.local_identity, Vec::new()))
    })
}

pub fn r_f_grid(tol: &Tolerances) -> Check {
    wrap("r_f_grid", || {
        let mut worst: f64 = 0.0;
        let mut cases = 0;
        for (ld, ogg) in local_data_grid()? {
            let rep = r_f_identities(&ld, ogg)?;
            worst = worst.max(rep.max_residual() - rep.tail_bar);
            cases += 1;
        }
        Ok(Check::measured("r_f_grid", cases, worst.max(0.0), tol.local_identity, Vec::new()))
    })
}

/// `|X_0(11)(F_p)|` from the q-expansion, a point count of `11a`, and
/// the exact trace formula.
pub fn level11_bridge(p_max: u64) -> Check {
    wrap("level11_bridge", || {
        let f = NewformData::level11(p_max as usize)?;
        let mut cases = 0;
        let mut failures = Vec::new();
        for p in (2..=p_max).filter(|&p| is_prime(p) && p != 11) {
            cases += 1;
            let from_ap = p as i64 + 1 - f.a(p)?.to_i64().unwrap();
            let counted = census::count_points_long(p, CURVE_11A)? as i64;
            let exact = x0_exact_11(p)?;
            if from_ap != counted || counted != exact {
                failures.push(format!("p = {p}: {from_ap}, {counted}, {exact}"));
            }
        }
        Ok(Check::exact("level11_bridge", cases, failures))
    })
}

pub const MOMENT_SHAPES: [(u64, u64); 4] = [(1, 1), (2, 1), (3, 1), (2, 2)];
pub const VANISHING_SHAPES: [(u64, u64); 4] = [(3, 3), (4, 4), (5, 5), (7, 7)];

pub fn census_checks(mass_fields: &[u64], moment_fields: &[u64]) -> Vec<Check> {
    let mut fields: Vec<u64> = mass_fields.iter().chain(moment_fields).copied().collect();
    fields.sort_unstable();
    fields.dedup();
    let census: Vec<Result<(u64, Vec<census::CurveRecord>)>> = fields
        .iter()
        .map(|&q| census::enumerate_curves(q).map(|r| (q, r)))
        .collect();
    let mut tables = Vec::new();
    for r in census {
        match r {
            Ok(t) => tables.push(t),
            Err(e) => return vec![Check::errored("census", e)],
        }
    }
    let get = |q: u64| &tables.iter().find(|t| t.0 == q).unwrap().1;
    vec![
        wrap("census_mass", || {
            let mut failures = Vec::new();
            for &q in mass_fields {
                let m = census::mass(get(q));
                if m != num_rational::BigRational::from_integer(q.into()) {
                    failures.push(format!("q = {q}: mass {m}"));
                }
            }
            Ok(Check::exact("census_mass", mass_fields.len() as u64, failures))
        }),
        wrap("census_moment_zero", || {
            let mut failures = Vec::new();
            for &q in &fields {
                let r = census::moment_from(get(q), 0, GroupShape::trivial())?;
                if r.expectation_exact != Some(num_rational::BigRational::from_integer(1.into())) {
                    failures.push(format!("q = {q}: {:?}", r.expectation_exact));
                }
            }
            Ok(Check::exact("census_moment_zero", fields.len() as u64, failures))
        }),
        wrap("census_moments", || {
            let mut worst: f64 = 0.0;
            let mut cases = 0;
            let mut failures = Vec::new();
            for &q in moment_fields {
                let bound = 10.0 / (q as f64).sqrt();
                for (n1, n2) in MOMENT_SHAPES {
                    if (q - 1) % n2 != 0 {
                        continue;
                    }
                    for j in 0..=2 {
                        cases += 1;
                        let r = census::moment_from(get(q), j, GroupShape::new(n1, n2)?)?;
                        worst = worst.max(r.deviation * (q as f64).sqrt());
                        if r.deviation > bound {
                            failures.push(format!(
                                "q = {q}, j = {j}, A = ({n1}, {n2}): deviation {:.4}",
                                r.deviation
                            ));
                        }
                    }
                }
            }
            // reported as deviation * sqrt(q)
            Ok(Check::measured("census_moments", cases, worst, 10.0, failures))
        }),
        wrap("census_vanishing", || {
            let mut cases = 0;
            let mut failures = Vec::new();
            for &q in moment_fields {
                for (n1, n2) in VANISHING_SHAPES {
                    if (q - 1) % n2 == 0 {
                        continue;
                    }
                    for j in 0..=2 {
                        cases += 1;
                        let r = census::moment_from(get(q), j, GroupShape::new(n1, n2)?)?;
                        if r.expectation != 0.0 {
                            failures.push(format!("q = {q}, j = {j}, A = ({n1}, {n2})"));
                        }
                    }
                }
            }
            Ok(Check::exact("census_vanishing", cases, failures))
        }),
    ]
}

pub fn fault_active() -> bool {
    petersson::FAULT_FLIP_R.load(std::sync::atomic::Ordering::Relaxed)
}
