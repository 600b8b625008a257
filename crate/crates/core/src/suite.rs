//! Runs the selected verification suites and assembles a [`Report`].

use std::fmt::Display;

use crate::calogero::{CalogeroModel, ModelOptions};
use crate::config::{ConfigError, SuiteConfig, SuiteSelector};
use crate::kernel::kernel_smoke_test;
use crate::qho::PseudoBosonFamily;
use crate::report::{Check, Report};
use crate::scalar::rational_to_f64;

/// Tolerance for exact-versus-quadrature comparisons.
pub const QUAD_TOLERANCE: f64 = 1e-10;

/// Kernel smoke test settings used inside the oscillator suite.
pub const KERNEL_ORDER: usize = 20;
pub const KERNEL_POINTS: &[(f64, f64)] = &[(0.5, -0.5), (1.0, 0.25)];

/// Calogero check groups run after the commutator suite; entries from the
/// third on are two-particle only.
const DEPENDENT_CHECKS: &[&str] = &[
    "gauge",
    "Ad series",
    "eigenfamily",
    "truncated eigenstates",
    "A/B operators",
    "adjoint identity",
    "T-space",
    "Omega termination survey",
];

/// Samples drawn by the reconstruction check.
const RECONSTRUCTION_SAMPLES: usize = 8;

/// Validates `cfg` and runs every selected suite. Check order is fixed, so
/// the report depends only on the configuration.
pub fn run_suite(cfg: &SuiteConfig) -> Result<Report, ConfigError> {
    cfg.validate()?;
    let mut report = Report::new(cfg.suite.to_string(), cfg.params());
    let (qho, calogero) = rayon::join(
        || matches!(cfg.suite, SuiteSelector::Qho | SuiteSelector::All).then(|| qho_checks(cfg)),
        || matches!(cfg.suite, SuiteSelector::Calogero | SuiteSelector::All).then(|| calogero_checks(cfg)),
    );
    report.extend(qho.into_iter().flatten());
    report.extend(calogero.into_iter().flatten());
    Ok(report)
}

fn prefixed(prefix: &str, checks: Vec<Check>) -> Vec<Check> {
    checks
        .into_iter()
        .map(|mut c| {
            c.name = format!("{prefix}: {}", c.name);
            c
        })
        .collect()
}

fn collect<E: Display>(out: &mut Vec<Check>, group: &str, r: Result<Vec<Check>, E>) {
    match r {
        Ok(cs) => out.extend(cs),
        Err(e) => out.push(Check::fail(group, format!("error: {e}"))),
    }
}

pub fn qho_checks(cfg: &SuiteConfig) -> Vec<Check> {
    let family = match PseudoBosonFamily::new(cfg.omega.clone(), cfg.beta()) {
        Ok(f) => f,
        Err(e) => return vec![Check::fail("qho: construction", format!("error: {e}"))],
    };
    let nmax = cfg.nmax;
    let mut out = family.commutator_checks();
    out.extend(family.check_closed_forms(nmax));
    collect(&mut out, "ladder spectra", family.check_ladder_spectra(nmax));
    collect(&mut out, "biorthogonality", family.check_biorthogonality(nmax).map(|c| vec![c]));
    collect(
        &mut out,
        "reconstruction",
        family.check_reconstruction(nmax, cfg.seed, RECONSTRUCTION_SAMPLES),
    );
    collect(&mut out, "vacuum norms", family.check_vacuum_norms());
    collect(
        &mut out,
        "quadrature agreement",
        family
            .check_quadrature(nmax, cfg.quad_order, QUAD_TOLERANCE)
            .map(|(c, _)| vec![c]),
    );
    if family.is_multiplier_point() {
        collect(&mut out, "norm ratio growth", family.check_non_regularity(nmax).map(|c| vec![c]));
        collect(&mut out, "intertwining", family.check_intertwining(nmax));
        collect(&mut out, "similarity chain", family.appendix_chain(nmax));
    } else {
        for name in ["norm ratio growth", "intertwining", "similarity chain"] {
            out.push(Check::skipped(name, "requires beta = omega/2"));
        }
    }
    out.extend(kernel_smoke_test(rational_to_f64(&cfg.omega), KERNEL_ORDER, KERNEL_POINTS));
    prefixed("qho", out)
}

pub fn calogero_checks(cfg: &SuiteConfig) -> Vec<Check> {
    let opts = ModelOptions {
        allow_nu: cfg.allow_nu,
        corrupt_ol: cfg.inject_fault,
    };
    let model = match CalogeroModel::new(cfg.n, cfg.omega.clone(), cfg.nu.clone(), opts) {
        Ok(m) => m,
        Err(e) => return vec![Check::fail("calogero: construction", format!("error: {e}"))],
    };
    let bound = cfg.exp_bound;
    let mut out = model.commutator_suite(cfg.degmax);
    if out.iter().any(Check::failed) {
        // everything below assumes the scaling relations
        for name in DEPENDENT_CHECKS {
            out.push(Check::skipped(*name, "prerequisite commutator relations failed"));
        }
        return prefixed(&format!("calogero N={}", cfg.n), out);
    }
    collect(&mut out, "gauge", model.gauge_suite());
    collect(&mut out, "Ad series", model.ad_exponential_check(bound));
    if cfg.n == 2 {
        collect(&mut out, "eigenfamily", model.eigenfamily_suite(cfg.degmax, bound));
        collect(&mut out, "truncated eigenstates", model.truncated_suite(cfg.nmax, cfg.cutoff, bound));
        collect(&mut out, "A/B operators", model.ab_operator_suite(cfg.cutoff, bound));
        collect(&mut out, "adjoint identity", model.adjoint_identity_check(cfg.degmax));
        collect(&mut out, "T-space", model.t_orthonormality(cfg.nmax, cfg.cutoff, bound));
        out.push(termination_note(&model, cfg.degmax, bound));
    } else {
        for name in &DEPENDENT_CHECKS[2..] {
            out.push(Check::skipped(*name, "implemented for two particles only"));
        }
    }
    prefixed(&format!("calogero N={}", cfg.n), out)
}

/// Lists the monomials on which exact-mode `exp(−O_L/4ω)` terminates.
fn termination_note(model: &CalogeroModel, degmax: u32, bound: usize) -> Check {
    let survey = model.termination_survey(degmax, bound);
    let render = |e: &[u32]| {
        e.iter()
            .enumerate()
            .filter(|(_, &k)| k > 0)
            .map(|(i, &k)| if k == 1 { format!("x{}", i + 1) } else { format!("x{}^{k}", i + 1) })
            .collect::<Vec<_>>()
            .join("*")
    };
    let terminating: Vec<String> = survey
        .iter()
        .filter(|(_, ok)| *ok)
        .map(|(e, _)| {
            let r = render(e);
            if r.is_empty() {
                "1".to_string()
            } else {
                r
            }
        })
        .collect();
    Check::pass(format!("Omega termination survey (degree <= {degmax})")).with_reason(format!(
        "terminates within deg/2 + 2 steps on {} of {} monomials: {}",
        terminating.len(),
        survey.len(),
        terminating.join(", ")
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat_int;

    #[test]
    fn rejects_invalid_config_before_running() {
        let cfg = SuiteConfig {
            omega: rat_int(-1),
            ..Default::default()
        };
        assert!(matches!(run_suite(&cfg), Err(ConfigError::Invalid(_))));
    }

    #[test]
    fn small_qho_run_passes() {
        let cfg = SuiteConfig {
            suite: SuiteSelector::Qho,
            nmax: 2,
            ..Default::default()
        };
        let r = run_suite(&cfg).unwrap();
        assert!(r.all_passed(), "{}", r.to_markdown());
        assert!(r.checks.iter().all(|c| c.name.starts_with("qho: ")));
    }
}
