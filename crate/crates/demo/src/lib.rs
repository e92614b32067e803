//! Three views for the browser page in `www/`. Each returns a flat
//! `Vec<f64>` so the page can wrap it in a `Float64Array` without
//! extra glue. The functions are plain Rust and are tested natively.

use std::f64::consts::PI;

use hecke_core::analytic::bessel_j;
use hecke_core::census;
use hecke_core::characters::character_group;
use hecke_core::expsums::{kloosterman, weil_bound, KloostermanKernel};
use hecke_core::petersson::delta_geometric;
use wasm_bindgen::prelude::*;

const MAX_SCATTER_C: u32 = 20_000;
const MAX_PARTIAL_C: u64 = 200_000;

/// `[c, S(a, b; c), weil_bound]` for `c = 1..=c_max`, flattened.
#[wasm_bindgen]
pub fn kloosterman_scatter(a: i32, b: i32, c_max: u32) -> Result<Vec<f64>, String> {
    if c_max == 0 || c_max > MAX_SCATTER_C {
        return Err(format!("c_max must be in 1..={MAX_SCATTER_C}"));
    }
    let mut out = Vec::with_capacity(3 * c_max as usize);
    for c in 1..=c_max as u64 {
        let s = kloosterman(a as i64, b as i64, c).map_err(|e| e.to_string())?;
        out.extend([c as f64, s.re, weil_bound(None, a as i64, b as i64, c)]);
    }
    Ok(out)
}

/// Angles `cos theta = t / 2 sqrt q` over all curves mod `q`, weighted by
/// `1 / |Aut|`: `bins` observed masses followed by `bins` Sato-Tate masses.
#[wasm_bindgen]
pub fn sato_tate_histogram(q: u32, bins: u32) -> Result<Vec<f64>, String> {
    if bins == 0 || bins > 1_000 {
        return Err("bins must be in 1..=1000".into());
    }
    let recs = census::enumerate_curves(q as u64).map_err(|e| e.to_string())?;
    let nb = bins as usize;
    let mut obs = vec![0.0; nb];
    let sq = 2.0 * (q as f64).sqrt();
    for r in &recs {
        let theta = (r.t as f64 / sq).clamp(-1.0, 1.0).acos();
        let i = ((theta / PI * nb as f64) as usize).min(nb - 1);
        obs[i] += 1.0 / r.aut as f64;
    }
    let total = q as f64;
    let cdf = |x: f64| (x - x.sin() * x.cos()) / PI;
    let mut out: Vec<f64> = obs.into_iter().map(|w| w / total).collect();
    for i in 0..nb {
        let (lo, hi) = (PI * i as f64 / nb as f64, PI * (i + 1) as f64 / nb as f64);
        out.push(cdf(hi) - cdf(lo));
    }
    Ok(out)
}

/// Running value of `Delta_{k,N}(m, n)` with the trivial character:
/// `[C, value]` at every `C = N, 2N, ...` up to `c_max`, one point per `stride`.
#[wasm_bindgen]
pub fn petersson_partial_sums(kappa: u32, level: u32, m: u32, n: u32, c_max: u32, stride: u32) -> Result<Vec<f64>, String> {
    if kappa < 2 || kappa % 2 == 1 {
        return Err("weight must be even and at least 2".into());
    }
    if level == 0 || m == 0 || n == 0 || stride == 0 {
        return Err("level, m, n and stride must be positive".into());
    }
    if c_max as u64 > MAX_PARTIAL_C {
        return Err(format!("c_max above {MAX_PARTIAL_C}"));
    }
    let chi = character_group(level as u64).map_err(|e| e.to_string())?.trivial();
    let kernel = KloostermanKernel::new(&chi);
    let x = 4.0 * PI * ((m as f64) * (n as f64)).sqrt();
    let sign = if kappa % 4 == 0 { 1.0 } else { -1.0 };
    let mut value = if m == n { 1.0 } else { 0.0 };
    let mut out = Vec::new();
    let mut k = 0;
    let mut c = level as u64;
    while c <= c_max as u64 {
        let j = bessel_j(kappa - 1, x / c as f64).map_err(|e| e.to_string())?;
        if j != 0.0 {
            let s = kernel.eval(m as i64, n as i64, c).map_err(|e| e.to_string())?;
            value += sign * 2.0 * PI * s.re * j / c as f64;
        }
        if k % stride == 0 {
            out.extend([c as f64, value]);
        }
        k += 1;
        c += level as u64;
    }
    Ok(out)
}

/// Certified bound on `|Delta - partial sum at c_max|`.
#[wasm_bindgen]
pub fn petersson_tail(kappa: u32, level: u32, m: u32, n: u32, c_max: u32) -> Result<f64, String> {
    let chi = character_group(level as u64).map_err(|e| e.to_string())?.trivial();
    delta_geometric(kappa, &chi, m as u64, n as u64, Some(c_max as u64))
        .map(|d| d.tail_bound)
        .map_err(|e| e.to_string())
}
