//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use pseudoboson::calogero::{CalogeroModel, ModelOptions};
use pseudoboson::config::{SuiteConfig, SuiteSelector};
use pseudoboson::qho::PseudoBosonFamily;
use pseudoboson::report::Check;
use pseudoboson::scalar::{rat, rat_int, RadScalar, Rational};
use pseudoboson::suite::run_suite;

const BOUND: usize = 64;
const CUTOFF: i64 = -12;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn qho_points() -> Vec<(Rational, Rational)> {
    vec![(rat_int(1), rat(1, 2)), (rat_int(4), rat_int(2)), (rat_int(2), rat(3, 2))]
}

fn calogero_points() -> Vec<(Rational, Rational)> {
    vec![(rat_int(1), rat(3, 2)), (rat_int(2), rat(5, 2)), (rat_int(1), rat_int(1))]
}

fn family(omega: &Rational, beta: &Rational) -> Result<PseudoBosonFamily, String> {
    PseudoBosonFamily::new(omega.clone(), beta.clone()).map_err(|e| format!("family({omega}, {beta}): {e}"))
}

fn model(n: usize, omega: &Rational, nu: &Rational) -> Result<CalogeroModel, String> {
    CalogeroModel::new(n, omega.clone(), nu.clone(), ModelOptions::default())
        .map_err(|e| format!("model(N={n}, {omega}, {nu}): {e}"))
}

/// Ok with the number of checks, or the first failure.
fn all_pass(label: &str, checks: &[Check]) -> Result<usize, String> {
    match checks.iter().find(|c| !c.passed()) {
        Some(c) => Err(format!(
            "{label}: {} -> {}",
            c.name,
            c.witness.as_deref().or(c.reason.as_deref()).unwrap_or("")
        )),
        None => Ok(checks.len()),
    }
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let t = start.elapsed();
    if t < limit {
        Ok(())
    } else {
        Err(format!("took {:.1} s, limit {} s", t.as_secs_f64(), limit.as_secs()))
    }
}

fn ac1_commutators() -> Outcome {
    let start = Instant::now();
    let mut count = 0;
    for (omega, beta) in qho_points() {
        count += all_pass(&format!("qho ({omega}, {beta})"), &family(&omega, &beta)?.commutator_checks())?;
    }
    for n in [2, 3] {
        for (omega, nu) in calogero_points() {
            let m = model(n, &omega, &nu)?;
            count += all_pass(&format!("calogero N={n} ({omega}, {nu})"), &m.commutator_suite(8))?;
        }
    }
    within(Duration::from_secs(30), start)?;
    Ok(format!("{count} relations, {:.1} s", start.elapsed().as_secs_f64()))
}

fn ac2_biorthogonality() -> Outcome {
    let mut done = 0;
    for omega in [rat_int(1), rat_int(4)] {
        for frac in [rat(1, 4), rat(1, 2), rat(3, 4)] {
            let beta = &omega * &frac;
            let gram = family(&omega, &beta)?
                .biorthogonality_matrix(6)
                .map_err(|e| e.to_string())?;
            if gram.len() != 49 || gram.iter().any(|r| r.len() != 49) {
                return Err(format!("({omega}, {beta}): Gram matrix is not 49x49"));
            }
            for (r, row) in gram.iter().enumerate() {
                for (c, v) in row.iter().enumerate() {
                    let want = if r == c { RadScalar::one() } else { RadScalar::zero() };
                    if *v != want {
                        return Err(format!("({omega}, {beta}): entry ({r}, {c}) = {v}"));
                    }
                }
            }
            done += 1;
        }
    }
    Ok(format!("{done} exact 49x49 identities"))
}

fn ac3_spectra_intertwining() -> Outcome {
    let mut count = 0;
    for omega in [rat_int(1), rat_int(4)] {
        let f = family(&omega, &(&omega / rat_int(2)))?;
        let label = format!("omega = {omega}");
        count += all_pass(&label, &f.check_ladder_spectra(5).map_err(|e| e.to_string())?)?;
        count += all_pass(&label, &f.check_intertwining(5).map_err(|e| e.to_string())?)?;
    }
    Ok(format!("{count} relations over indices <= 5"))
}

fn ac4_gauge() -> Outcome {
    let mut count = 0;
    for (omega, nu) in calogero_points() {
        let m = model(2, &omega, &nu)?;
        count += all_pass("N=2 gauge", &m.gauge_suite().map_err(|e| e.to_string())?)?;
        let e0 = RadScalar::from_rational(&omega * (rat_int(1) + &nu * rat_int(2)));
        let got = m.h_d().apply(m.psi0()).map_err(|e| e.to_string())?;
        if got != m.psi0().scale(&e0) {
            return Err(format!("H_D Psi0 = {got}, want {e0} Psi0"));
        }
        let m3 = model(3, &omega, &nu)?;
        count += all_pass("N=3 gauge", &m3.gauge_suite().map_err(|e| e.to_string())?)?;
        let want = &omega * rat(3, 2) + &nu * rat_int(6) * &omega;
        if *m3.e0() != RadScalar::from_rational(want.clone()) {
            return Err(format!("N=3 E0 = {}, want {want}", m3.e0()));
        }
    }
    Ok(format!("{count} checks at three parameter points"))
}

fn ac5_eigenfamilies() -> Outcome {
    let mut count = 0;
    for (omega, nu) in calogero_points() {
        let m = model(2, &omega, &nu)?;
        count += all_pass("invariant", &m.eigenfamily_suite(10, BOUND).map_err(|e| e.to_string())?)?;
        count += all_pass("truncated", &m.truncated_suite(6, CUTOFF, BOUND).map_err(|e| e.to_string())?)?;
    }
    Ok(format!("{count} eigenchecks"))
}

fn ac6_adjoint() -> Outcome {
    let mut count = 0;
    for (omega, nu) in calogero_points().into_iter().take(2) {
        let m = model(2, &omega, &nu)?;
        count += all_pass("adjoint", &m.adjoint_identity_check(8).map_err(|e| e.to_string())?)?;
    }
    Ok(format!("{count} checks at two parameter points"))
}

fn ac7_ad_series() -> Outcome {
    let mut count = 0;
    for (omega, nu) in calogero_points() {
        let m = model(2, &omega, &nu)?;
        count += all_pass("Ad", &m.ad_exponential_check(BOUND).map_err(|e| e.to_string())?)?;
    }
    Ok(format!("{count} checks at three parameter points"))
}

fn ac8_t_space() -> Outcome {
    let mut count = 0;
    for (omega, nu) in calogero_points() {
        let m = model(2, &omega, &nu)?;
        count += all_pass("T-space", &m.t_orthonormality(6, CUTOFF, BOUND).map_err(|e| e.to_string())?)?;
    }
    Ok(format!("{count} checks"))
}

fn ac9_oracle() -> Outcome {
    let start = Instant::now();
    let mut pairs = 0;
    let points = [
        (rat_int(1), rat(1, 2)),
        (rat_int(4), rat_int(2)),
        (rat_int(2), rat(3, 2)),
        (rat_int(1), rat(1, 4)),
    ];
    for (omega, beta) in points {
        let (check, n) = family(&omega, &beta)?
            .check_quadrature(3, 40, 1e-10)
            .map_err(|e| e.to_string())?;
        all_pass(&format!("({omega}, {beta})"), &[check])?;
        pairs += n;
    }
    if pairs < 200 {
        return Err(format!("only {pairs} pairs compared"));
    }
    within(Duration::from_secs(60), start)?;
    Ok(format!("{pairs} pairs within 1e-10, {:.1} s", start.elapsed().as_secs_f64()))
}

fn ac10_determinism() -> Outcome {
    let cfg = SuiteConfig {
        suite: SuiteSelector::All,
        nmax: 4,
        ..Default::default()
    };
    let a = run_suite(&cfg).map_err(|e| e.to_string())?.to_json();
    let b = run_suite(&cfg).map_err(|e| e.to_string())?.to_json();
    if a.as_bytes() == b.as_bytes() {
        Ok(format!("{} identical bytes", a.len()))
    } else {
        Err("JSON bodies differ".into())
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("AC1 commutator suite", ac1_commutators),
        ("AC2 biorthogonality", ac2_biorthogonality),
        ("AC3 spectra and intertwining", ac3_spectra_intertwining),
        ("AC4 gauge identity", ac4_gauge),
        ("AC5 Calogero eigenfamilies", ac5_eigenfamilies),
        ("AC6 adjoint identity", ac6_adjoint),
        ("AC7 Ad-exponential identity", ac7_ad_series),
        ("AC8 T-space structure", ac8_t_space),
        ("AC9 oracle agreement", ac9_oracle),
        ("AC10 determinism", ac10_determinism),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
