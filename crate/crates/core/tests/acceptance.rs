use std::time::{Duration, Instant};

use hecke_core::config::Tolerances;
use hecke_core::verify::{self, Check, Suite, VerifyOptions};

struct Outcome {
    id: u32,
    name: &'static str,
    checks: Vec<Check>,
    elapsed: Duration,
    budget: Option<Duration>,
}

impl Outcome {
    fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed) && self.budget.map_or(true, |b| self.elapsed <= b)
    }

    fn line(&self) -> String {
        let mut parts: Vec<String> = self
            .checks
            .iter()
            .map(|c| {
                let mut s = format!("{} {}/{}", c.name, if c.passed { "ok" } else { "FAILED" }, c.cases);
                if let Some(e) = c.max_error {
                    s += &format!(" err {e:.3e}");
                }
                if !c.detail.is_empty() && !c.passed {
                    s += &format!(" [{}]", c.detail);
                }
                s
            })
            .collect();
        let mut t = format!("{:.1}s", self.elapsed.as_secs_f64());
        if let Some(b) = self.budget {
            t += &format!(" of {}s", b.as_secs());
        }
        parts.push(t);
        format!(
            "{} criterion {}: {}: {}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            parts.join("; ")
        )
    }
}

fn timed(
    id: u32,
    name: &'static str,
    budget: Option<u64>,
    f: impl FnOnce() -> Vec<Check>,
) -> Outcome {
    let t = Instant::now();
    let checks = f();
    let out = Outcome {
        id,
        name,
        checks,
        elapsed: t.elapsed(),
        budget: budget.map(Duration::from_secs),
    };
    println!("{}", out.line());
    out
}

fn main() {
    let tol = Tolerances::default();
    let opts = VerifyOptions::default();
    let mut all = Vec::new();
    all.push(timed(1, "exact identity suites", Some(60), || {
        vec![verify::psi_identity(300), verify::r_composition(), verify::inversion_helper(200)]
    }));
    all.push(timed(2, "T_W closed form vs brute force, Weil and T_W bounds", None, || {
        vec![verify::tw_grid(opts.seed, &tol)]
    }));
    all.push(timed(3, "dimension-zero vanishing", Some(120), || {
        vec![verify::dimension_zero(&tol)]
    }));
    all.push(timed(4, "newform eigenvalue recovery", None, || {
        vec![verify::eigen_recovery(&tol)]
    }));
    all.push(timed(5, "norm loop closure", None, || vec![verify::norm_closure(&tol)]));
    all.push(timed(6, "xi/V and r_f identities", None, || {
        vec![verify::xi_v_grid(&tol), verify::r_f_grid(&tol)]
    }));
    all.push(timed(7, "X_0(11) point counts three ways", None, || {
        vec![verify::level11_bridge(50)]
    }));
    all.push(timed(8, "census statistics", Some(600), || {
        verify::census_checks(&[5, 7, 11, 13, 101, 211], &[101, 211, 401])
    }));
    all.push(timed(9, "determinism of verify all", None, || {
        let a = serde_json::to_string(&verify::run(Suite::All, &opts)).unwrap();
        let b = serde_json::to_string(&verify::run(Suite::All, &opts)).unwrap();
        let same = a == b;
        vec![Check {
            name: "byte_identical".into(),
            passed: same,
            cases: 2,
            max_error: None,
            tolerance: None,
            detail: if same { String::new() } else { "reports differ".into() },
        }]
    }));
    let failed = all.iter().filter(|o| !o.passed()).count();
    println!("{} of {} criteria passed", all.len() - failed, all.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
