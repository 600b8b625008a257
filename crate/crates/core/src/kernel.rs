//! Partial sums of the Hermite kernel `Σ_{k≤K} H_k(x)H_k(y)/(2^k k!)`.
//!
//! The full sum is a delta-function limit, so only finiteness is checked;
//! the decay and oscillation statistics are reported as notes.

use crate::report::Check;

pub const LABEL: &str = "distributional identity - smoke test only";

/// Terms `h_k(x) h_k(y)` for `k = 0..=order`, with `h_k = H_k/√(2^k k!)`
/// evaluated by the normalized three-term recurrence.
pub fn kernel_terms(x: f64, y: f64, order: usize) -> Vec<f64> {
    let mut hx = (1.0, 0.0);
    let mut hy = (1.0, 0.0);
    let mut out = Vec::with_capacity(order + 1);
    for k in 0..=order {
        out.push(hx.0 * hy.0);
        let kf = k as f64;
        let up = (2.0 / (kf + 1.0)).sqrt();
        let down = (kf / (kf + 1.0)).sqrt();
        hx = (up * x * hx.0 - down * hx.1, hx.0);
        hy = (up * y * hy.0 - down * hy.1, hy.0);
    }
    out
}

/// One check per sample point, with Hermite arguments scaled by `√ω`.
pub fn kernel_smoke_test(omega: f64, order: usize, points: &[(f64, f64)]) -> Vec<Check> {
    let root = omega.sqrt();
    points
        .iter()
        .map(|&(x, y)| {
            let name = format!("kernel partial sum at ({x}, {y}), K = {order} ({LABEL})");
            if order < 5 {
                return Check::skipped(name, "partial order must be at least 5");
            }
            if x == y {
                return Check::skipped(name, "excluded (delta singularity)");
            }
            let terms = kernel_terms(root * x, root * y, order);
            let sum: f64 = terms.iter().sum();
            let last = terms.last().copied().unwrap_or(0.0).abs();
            let max = terms.iter().fold(0.0_f64, |m, t| m.max(t.abs()));
            let sign_changes = terms
                .windows(2)
                .filter(|w| w[0] != 0.0 && w[1] != 0.0 && (w[0] < 0.0) != (w[1] < 0.0))
                .count();
            let note = format!("S_K = {sum:.6e}, |last term| = {last:.3e}, max |term| = {max:.3e}, sign changes = {sign_changes}");
            if sum.is_finite() && terms.iter().all(|t| t.is_finite()) {
                Check::pass(name).with_reason(note)
            } else {
                Check::fail(name, note)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hermite(n: usize, x: f64) -> f64 {
        let (mut a, mut b) = (1.0, 2.0 * x);
        if n == 0 {
            return a;
        }
        for k in 1..n {
            let c = 2.0 * x * b - 2.0 * k as f64 * a;
            a = b;
            b = c;
        }
        b
    }

    #[test]
    fn matches_direct_sum() {
        let (x, y) = (0.5, -0.5);
        let terms = kernel_terms(x, y, 12);
        let mut norm = 1.0;
        for (k, t) in terms.iter().enumerate() {
            if k > 0 {
                norm *= 2.0 * k as f64;
            }
            let direct = hermite(k, x) * hermite(k, y) / norm;
            assert!((t - direct).abs() < 1e-12 * direct.abs().max(1.0), "k = {k}");
        }
    }

    #[test]
    fn reports_finite_and_excluded() {
        let checks = kernel_smoke_test(1.0, 20, &[(0.5, -0.5), (0.3, 0.3)]);
        assert!(checks[0].passed());
        assert!(checks[0].reason.as_deref().unwrap().starts_with("S_K = "));
        assert_eq!(checks[1].reason.as_deref(), Some("excluded (delta singularity)"));
        let small = kernel_smoke_test(1.0, 5, &[(0.5, -0.5)]);
        assert!(small[0].passed());
        assert!(kernel_smoke_test(1.0, 4, &[(0.5, -0.5)])[0].reason.is_some());
    }
}
