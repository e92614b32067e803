//! Every tolerance and default used by the crate, in one place.

use serde::{Deserialize, Serialize};

/// Tolerances for floating-point identity checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Per summand, for character sums and orthogonality.
    pub character_per_term: f64,
    /// Per summand, for agreement between evaluations of `T'_W`.
    pub tsum_per_term: f64,
    /// Absolute slack on top of a certified tail bound.
    pub petersson_slack: f64,
    /// Local oldform machinery (xi, V, r_f).
    pub local_identity: f64,
    /// Relative error for the normalised eigenvalues at weight 12.
    pub eigen_weight12: f64,
    /// Absolute error for the normalised eigenvalues at weight 2.
    pub eigen_weight2: f64,
    /// Relative error for `Delta(1,1) <f,f> / c_k`.
    pub norm_closure: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            character_per_term: 1e-9,
            tsum_per_term: 1e-8,
            petersson_slack: 1e-6,
            local_identity: 1e-10,
            eigen_weight12: 1e-6,
            eigen_weight2: 5e-3,
            norm_closure: 2e-2,
        }
    }
}

/// Hard caps on inputs so that eager tables stay small.
pub const MAX_CHARACTER_MODULUS: u64 = 100_000;
pub const MAX_CENSUS_PRIME: u64 = 2_000;
pub const MAX_BESSEL_ORDER: u32 = 200;
pub const MAX_BESSEL_ARG: f64 = 1e5;
pub const MAX_CHEBYSHEV_DEGREE: u32 = 64;
pub const MAX_KLOOSTERMAN_MODULUS: u64 = 10_000_000;

/// Default truncation of the `ell | L^infinity` sums.
pub const DEFAULT_ELL_MAX: u64 = 1_000;
/// Default q-expansion precision.
pub const DEFAULT_PRECISION: usize = 2_000;
/// Default seed for sampled grids.
pub const DEFAULT_SEED: u64 = 20_240_611;

/// Default Petersson truncation: `max(1000 N, 32 pi sqrt(mn))`.
pub fn default_truncation(level: u64, m: u64, n: u64) -> u64 {
    let geo = 32.0 * std::f64::consts::PI * ((m as f64) * (n as f64)).sqrt();
    (1000 * level).max(geo.ceil() as u64)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Defaults {
    pub tolerances: Tolerances,
    pub ell_max: u64,
    pub precision: usize,
    pub seed: u64,
    pub truncation_rule: String,
    pub max_character_modulus: u64,
    pub max_census_prime: u64,
}

pub fn defaults() -> Defaults {
    Defaults {
        tolerances: Tolerances::default(),
        ell_max: DEFAULT_ELL_MAX,
        precision: DEFAULT_PRECISION,
        seed: DEFAULT_SEED,
        truncation_rule: "max(1000*N, ceil(32*pi*sqrt(m*n)))".into(),
        max_character_modulus: MAX_CHARACTER_MODULUS,
        max_census_prime: MAX_CENSUS_PRIME,
    }
}
