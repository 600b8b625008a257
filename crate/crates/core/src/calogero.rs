//! The D-type Calogero model: gauge transformation to `ω O_E − ½ O_L`,
//! commutation relations, the similarity chain to decoupled oscillators,
//! eigenfunctions and the pseudo-bosonic operators built on them.

use std::sync::OnceLock;

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::funcspace::{Element, FuncError, GradedSeries, Monomial, Poly};
use crate::gaussint::{inner_product_pi, inner_product_t, IntError, TSpaceVector, WeightSpec};
use crate::opalg::{ad_exp, apply_exp, exp_series, monomial_span, DiffOp, ExpMode, OpError};
use crate::qho::{first_non_identity, PseudoBosonFamily, QhoError};
use crate::report::{summarize, Check};
use crate::scalar::{rat, rat_int, RadScalar, Rational, ScalarError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CalogeroError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("operation is only available for two particles, model has {0}")]
    TwoParticlesOnly(usize),
    #[error(transparent)]
    Op(#[from] OpError),
    #[error(transparent)]
    Func(#[from] FuncError),
    #[error(transparent)]
    Int(#[from] IntError),
    #[error(transparent)]
    Qho(#[from] QhoError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ModelOptions {
    /// Accept `ν <= 1/2`.
    pub allow_nu: bool,
    /// Adds `x1` to the `∂1` coefficient of `O_L`; used to exercise failure
    /// reporting.
    pub corrupt_ol: bool,
}

/// Result of pushing Φ-side coordinates through the similarity chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChainValue {
    Exact(Element),
    Truncated(GradedSeries),
}

#[derive(Debug, Clone)]
pub struct ChainOutput {
    pub value: ChainValue,
    /// Present when the input is homogeneous in `n1 + n2`.
    pub eigencheck: Option<Check>,
}

#[derive(Debug)]
pub struct CalogeroModel {
    n: usize,
    omega: Rational,
    nu: Rational,
    oe: DiffOp,
    ol: DiffOp,
    x2: DiffOp,
    lap: DiffOp,
    h_tilde: DiffOp,
    h_d: DiffOp,
    psi0: Element,
    e0: RadScalar,
    oscillator: OnceLock<PseudoBosonFamily>,
}

/// `∏_{(k,l) ≠ (i,j)} (x_k² − x_l²)`, so that `1/(x_i² − x_j²)` is this
/// polynomial times the inverse prefactor.
fn complementary_pairs(n: usize, i: usize, j: usize) -> Poly {
    let mut p = Poly::one(n);
    for k in 0..n {
        for l in k + 1..n {
            if (k, l) != (i, j) {
                p = &p * &Poly::pair_factor(n, k, l);
            }
        }
    }
    p
}

fn sum_ops(n: usize, ops: impl IntoIterator<Item = DiffOp>) -> Result<DiffOp, OpError> {
    ops.into_iter().try_fold(DiffOp::zero(n), |acc, op| acc.try_add(&op))
}

impl CalogeroModel {
    pub fn new(n: usize, omega: Rational, nu: Rational, opts: ModelOptions) -> Result<Self, CalogeroError> {
        if !(2..=3).contains(&n) {
            return Err(CalogeroError::InvalidParameter(format!("N must be 2 or 3, got {n}")));
        }
        if !omega.is_positive() {
            return Err(CalogeroError::InvalidParameter(format!("omega must be positive, got {omega}")));
        }
        if nu <= rat(1, 2) && !opts.allow_nu {
            return Err(CalogeroError::InvalidParameter(format!(
                "nu must exceed 1/2, got {nu} (override available)"
            )));
        }
        let x = |i: usize| DiffOp::var(n, i);
        let d = |i: usize| DiffOp::partial(n, i);
        let oe = sum_ops(n, (0..n).map(|i| x(i).compose(&d(i)).expect("same arity")))?;
        let lap = sum_ops(n, (0..n).map(|i| d(i).pow(2).expect("same arity")))?;
        let x2 = DiffOp::multiplication(Element::from_poly(Poly::radius_squared(n)));
        let four_nu = &nu * rat_int(4);
        let inv_p = rat_int(-1);
        let mut interaction = DiffOp::zero(n);
        for i in 0..n {
            for j in i + 1..n {
                let q = complementary_pairs(n, i, j).scale_rational(&four_nu);
                let ci = Element::new(&q * &Poly::var(n, i), inv_p.clone(), Rational::zero());
                let cj = Element::new(&q * &Poly::var(n, j), inv_p.clone(), Rational::zero()).neg();
                interaction = interaction
                    .try_add(&DiffOp::term(ci, Monomial::var(n, i).0))?
                    .try_add(&DiffOp::term(cj, Monomial::var(n, j).0))?;
            }
        }
        if opts.corrupt_ol {
            interaction = interaction.try_add(&x(0).compose(&d(0))?)?;
        }
        let ol = lap.try_add(&interaction)?;
        let h_tilde = oe.scale_rational(&omega).try_sub(&ol.scale_rational(&rat(1, 2)))?;

        let coupling = &nu * (&nu - Rational::one()) * rat_int(2);
        let mut potential = Element::zero(n);
        for i in 0..n {
            for j in i + 1..n {
                let q = complementary_pairs(n, i, j);
                let num = &(&Poly::var(n, i).pow(2) + &Poly::var(n, j).pow(2)) * &(&q * &q);
                potential = potential.try_add(&Element::new(num.scale_rational(&coupling), rat_int(-2), Rational::zero()))?;
            }
        }
        let h_d = lap
            .scale_rational(&rat(-1, 2))
            .try_add(&x2.scale_rational(&(&omega * &omega / rat_int(2))))?
            .try_add(&DiffOp::multiplication(potential))?;
        let psi0 = Element::new(Poly::one(n), nu.clone(), -&omega / rat_int(2));
        let nn = rat_int(n as i64);
        let e0 = &nn * &omega / rat_int(2) + &nu * &nn * (&nn - Rational::one()) * &omega;
        Ok(Self {
            n,
            omega,
            nu,
            oe,
            ol,
            x2,
            lap,
            h_tilde,
            h_d,
            psi0,
            e0: RadScalar::from_rational(e0),
            oscillator: OnceLock::new(),
        })
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn omega(&self) -> &Rational {
        &self.omega
    }

    pub fn nu(&self) -> &Rational {
        &self.nu
    }

    /// Euler operator `Σ x_i ∂_i`.
    pub fn oe(&self) -> &DiffOp {
        &self.oe
    }

    /// `∇² + 4ν Σ_{i<j} (x_i∂_i − x_j∂_j)/(x_i² − x_j²)`.
    pub fn ol(&self) -> &DiffOp {
        &self.ol
    }

    pub fn x2(&self) -> &DiffOp {
        &self.x2
    }

    pub fn lap(&self) -> &DiffOp {
        &self.lap
    }

    /// `ω O_E − ½ O_L`.
    pub fn h_tilde(&self) -> &DiffOp {
        &self.h_tilde
    }

    pub fn h_d(&self) -> &DiffOp {
        &self.h_d
    }

    /// `∏(x_i² − x_j²)^ν exp(−ω X²/2)` on the chamber.
    pub fn psi0(&self) -> &Element {
        &self.psi0
    }

    pub fn e0(&self) -> &RadScalar {
        &self.e0
    }

    fn require_two(&self) -> Result<(), CalogeroError> {
        if self.n == 2 {
            Ok(())
        } else {
            Err(CalogeroError::TwoParticlesOnly(self.n))
        }
    }

    /// Oscillator family at `β = ω/2` supplying the Φ basis.
    pub fn oscillator(&self) -> Result<&PseudoBosonFamily, CalogeroError> {
        if let Some(f) = self.oscillator.get() {
            return Ok(f);
        }
        let fam = PseudoBosonFamily::new(self.omega.clone(), &self.omega / rat_int(2))?;
        Ok(self.oscillator.get_or_init(|| fam))
    }

    /// Rate of `Ω = exp(c · O_L)`.
    fn omega_rate(&self) -> RadScalar {
        RadScalar::from_rational(-(&self.omega * rat_int(4)).recip())
    }

    pub fn s(&self) -> Element {
        Element::from_poly(Poly::radius_squared(self.n))
    }

    pub fn p(&self) -> Element {
        Element::monomial(&[1, 1])
    }

    /// `{1, s, p, s², sp, p²}`.
    pub fn invariant_span(&self) -> Vec<Element> {
        let (s, p) = (self.s(), self.p());
        vec![Element::one(2), s.clone(), p.clone(), s.mul(&s), s.mul(&p), p.mul(&p)]
    }

    /// Scaling relations of `O_E`, `O_L`, `X²`, `∇²`. Two particles are
    /// compared as operators, three on the monomial span up to `degmax`.
    pub fn commutator_suite(&self, degmax: u32) -> Vec<Check> {
        let n = self.n;
        let id = DiffOp::identity(n);
        let two = rat_int(2);
        let rels: Vec<(&str, &DiffOp, &DiffOp, DiffOp)> = vec![
            ("[OL,OE] = 2 OL", &self.ol, &self.oe, self.ol.scale_rational(&two)),
            ("[OE,X2] = 2 X2", &self.oe, &self.x2, self.x2.scale_rational(&two)),
            ("[LAP,OE] = 2 LAP", &self.lap, &self.oe, self.lap.scale_rational(&two)),
            (
                "[LAP,X2] = 4(OE + N/2)",
                &self.lap,
                &self.x2,
                self.oe
                    .try_add(&id.scale_rational(&rat(n as i64, 2)))
                    .expect("addable")
                    .scale_rational(&rat_int(4)),
            ),
        ];
        let prefix = format!("N={n} ");
        if n == 2 {
            rels.into_iter()
                .map(|(name, a, b, want)| {
                    let name = format!("{prefix}{name}");
                    match a.commutator(b) {
                        Ok(got) => Check::expect(&name, got == want, || {
                            format!("difference {}", got.try_sub(&want).map(|d| d.to_string()).unwrap_or_default())
                        }),
                        Err(e) => Check::fail(&name, format!("error: {e}")),
                    }
                })
                .collect()
        } else {
            let span = monomial_span(n, degmax);
            rels.into_par_iter()
                .map(|(name, a, b, want)| {
                    let name = format!("{prefix}{name} on degree <= {degmax}");
                    for f in &span {
                        let ab = a.apply(&b.apply(f)?)?;
                        let ba = b.apply(&a.apply(f)?)?;
                        let got = ab.try_sub(&ba)?;
                        let w = want.apply(f)?;
                        if got != w {
                            return Ok(Check::fail(&name, format!("on {f}: left {got}, right {w}")));
                        }
                    }
                    Ok(Check::pass(&name))
                })
                .map(|r: Result<Check, OpError>| r.unwrap_or_else(|e| Check::fail("N=3 commutators", e.to_string())))
                .collect()
        }
    }

    /// Ten monomials: invariant and non-invariant, degree at most 6.
    pub fn gauge_test_set(&self) -> Vec<Element> {
        let exps: Vec<Vec<u32>> = if self.n == 2 {
            vec![
                vec![0, 0],
                vec![1, 1],
                vec![1, 0],
                vec![2, 0],
                vec![0, 3],
                vec![2, 1],
                vec![3, 1],
                vec![4, 0],
                vec![2, 4],
                vec![5, 1],
            ]
        } else {
            vec![
                vec![0, 0, 0],
                vec![1, 1, 1],
                vec![1, 0, 0],
                vec![2, 0, 0],
                vec![0, 2, 1],
                vec![1, 1, 2],
                vec![3, 1, 0],
                vec![2, 2, 2],
                vec![4, 0, 2],
                vec![0, 1, 5],
            ]
        };
        let mut out: Vec<Element> = exps.iter().map(|e| Element::monomial(e)).collect();
        if self.n == 2 {
            // the sum s is checked alongside the bare monomials
            out[3] = self.s();
        }
        out
    }

    /// `Ψ0⁻¹ (H_D − E0)(Ψ0 f) = H̃ f`.
    pub fn gauge_check(&self, f: &Element) -> Result<Check, CalogeroError> {
        let name = format!("gauge on {f}");
        let g = self.psi0.mul(f);
        let lhs = self
            .psi0
            .try_inverse()?
            .mul(&self.h_d.apply(&g)?.try_sub(&g.scale(&self.e0))?);
        let rhs = self.h_tilde.apply(f)?;
        Ok(Check::expect(name, lhs == rhs, || format!("left {lhs}, right {rhs}")))
    }

    /// `H_D Ψ0 = E0 Ψ0` and the closed form of `E0`.
    pub fn ground_state_checks(&self) -> Result<Vec<Check>, CalogeroError> {
        let hp = self.h_d.apply(&self.psi0)?;
        let want = self.psi0.scale(&self.e0);
        let mut out = vec![Check::expect("H_D psi0 = E0 psi0", hp == want, || {
            format!("H_D psi0 = {hp}, E0 psi0 = {want}")
        })];
        if self.n == 2 {
            let e = RadScalar::from_rational(&self.omega * (Rational::one() + &self.nu * rat_int(2)));
            out.push(Check::expect("E0 = omega(1+2nu)", e == self.e0, || format!("E0 = {}", self.e0)));
        }
        Ok(out)
    }

    /// `Ω(s^a p^b)` in exact mode, scaled by `(ω/π)^(1/2)`, with its eigenvalue
    /// `ω(2a + 2b)` checked exactly.
    pub fn invariant_eigenstate(&self, a: u32, b: u32, bound: usize) -> Result<(Element, Rational, Check), CalogeroError> {
        self.require_two()?;
        let s = Poly::radius_squared(2).pow(a);
        let p = Poly::from_exponents(&[1, 1], RadScalar::one()).pow(b);
        let f = Element::from_poly(&s * &p);
        let name = format!("eigenstate s^{a} p^{b}");
        let state = match apply_exp(&self.omega_rate(), &self.ol, &f, ExpMode::Exact { bound }) {
            Ok(out) => out.exact().expect("exact mode"),
            Err(e) => {
                return Ok((f, Rational::zero(), Check::fail(name, format!("Omega did not terminate: {e}"))));
            }
        };
        let ev = &self.omega * rat_int(2 * (a + b) as i64);
        let got = self.h_tilde.apply(&state)?;
        let want = state.scale_rational(&ev);
        let check = Check::expect(name, got == want, || format!("H state = {got}, want {want}"));
        let norm = RadScalar::sqrt_rational(&self.omega)? * RadScalar::pi_half_power(-1);
        Ok((state.scale(&norm), ev, check))
    }

    /// `Ω(x1^n1 x2^n2)` as a graded series above `cutoff`; the residual of
    /// `(ω O_E − ½ O_L − ω(n1 + n2))` on it must lie strictly below `cutoff`.
    pub fn truncated_eigenstate(
        &self,
        n1: u32,
        n2: u32,
        cutoff: i64,
        bound: usize,
    ) -> Result<(GradedSeries, Check), CalogeroError> {
        self.require_two()?;
        let f = Element::monomial(&[n1, n2]);
        let series = exp_series(&self.omega_rate(), &self.ol, &GradedSeries::from_element(&f, cutoff), bound)?;
        let ev = &self.omega * rat_int((n1 + n2) as i64);
        let shifted = self.h_tilde.try_sub(&DiffOp::identity(2).scale_rational(&ev))?;
        let residual = shifted.apply_series(&series.without_cutoff())?;
        let limit = rat_int(cutoff);
        let status = if series.was_truncated() { "truncated" } else { "terminated" };
        let name = format!("residual of Omega x1^{n1} x2^{n2} ({status})");
        let check = Check::expect(name, !residual.has_support_at_or_above(&limit), || {
            format!("residual {residual}")
        });
        Ok((series, check))
    }

    /// `Σ_{n1+n2 <= nmax}` truncated eigenstate checks, plus the symmetrized
    /// sum `Ω x1² + Ω x2² = Ω s`.
    pub fn truncated_suite(&self, nmax: u32, cutoff: i64, bound: usize) -> Result<Vec<Check>, CalogeroError> {
        let pairs: Vec<(u32, u32)> = (0..=nmax).flat_map(|t| (0..=t).map(move |n1| (n1, t - n1))).collect();
        let mut checks: Vec<Check> = pairs
            .par_iter()
            .map(|&(n1, n2)| self.truncated_eigenstate(n1, n2, cutoff, bound).map(|(_, c)| c))
            .collect::<Result<_, _>>()?;
        let (a, _) = self.truncated_eigenstate(2, 0, cutoff, bound)?;
        let (b, _) = self.truncated_eigenstate(0, 2, cutoff, bound)?;
        let sym = a.try_add(&b)?.symmetrize_d2()?;
        let (exact, _, _) = self.invariant_eigenstate(1, 0, bound)?;
        let norm = RadScalar::sqrt_rational(&self.omega)? * RadScalar::pi_half_power(-1);
        let exact = exact.scale(&norm.inv()?);
        let sum = sym.sum()?;
        checks.push(Check::expect("symmetrized Omega x1^2 + Omega x2^2 = Omega s", sum == exact, || {
            format!("got {sum}, want {exact}")
        }));
        Ok(checks)
    }

    /// `e^(−O_L/4ω)(ω O_E)e^(O_L/4ω)` by its terminating commutator series.
    pub fn ad_exponential_check(&self, bound: usize) -> Result<Vec<Check>, CalogeroError> {
        let woe = self.oe.scale_rational(&self.omega);
        let ad = ad_exp(&self.omega_rate(), &self.ol, &woe, bound)?;
        let second = ad.terms.get(1).cloned().unwrap_or_else(|| DiffOp::zero(self.n));
        let half_ol = self.ol.scale_rational(&rat(-1, 2));
        Ok(vec![
            Check::expect("Ad series second term = -1/2 OL", second == half_ol, || second.to_string()),
            Check::expect("Ad series stops after two terms", ad.terms.len() == 2, || {
                format!("{} nonzero terms", ad.terms.len())
            }),
            Check::expect("Ad_Omega(omega OE) = H~", ad.sum == self.h_tilde, || {
                format!("sum {}", ad.sum)
            }),
        ])
    }

    fn conj_partial(&self, j: usize, s: &GradedSeries, bound: usize) -> Result<GradedSeries, CalogeroError> {
        let c = self.omega_rate();
        let inner = exp_series(&-c.clone(), &self.ol, s, bound)?;
        let d = DiffOp::partial(2, j).apply_series(&inner)?;
        Ok(exp_series(&c, &self.ol, &d, bound)?)
    }

    fn conj_position(&self, k: usize, s: &GradedSeries, bound: usize) -> Result<GradedSeries, CalogeroError> {
        let c = self.omega_rate();
        let inner = exp_series(&-c.clone(), &self.ol, s, bound)?;
        let x = inner.mul_homogeneous(&Element::var(2, k))?;
        Ok(exp_series(&c, &self.ol, &x, bound)?)
    }

    /// `A_j = Ω ∂_j Ω⁻¹/√(2ω)` applied to a series.
    pub fn a_op(&self, j: usize, s: &GradedSeries, bound: usize) -> Result<GradedSeries, CalogeroError> {
        let r = RadScalar::sqrt_rational(&(&self.omega * rat_int(2)).recip())?;
        Ok(self.conj_partial(j, s, bound)?.scale(&r))
    }

    /// `B_k = √(2ω) Ω x_k Ω⁻¹` applied to a series.
    pub fn b_op(&self, k: usize, s: &GradedSeries, bound: usize) -> Result<GradedSeries, CalogeroError> {
        let r = RadScalar::sqrt_rational(&(&self.omega * rat_int(2)))?;
        Ok(self.conj_position(k, s, bound)?.scale(&r))
    }

    /// Ad-exponential identity, `[A_j, B_k] = δ_jk` on the invariant span
    /// above `cutoff`, and `H̃(Ω p) = 2ω Ω p`.
    pub fn ab_operator_suite(&self, cutoff: i64, bound: usize) -> Result<Vec<Check>, CalogeroError> {
        self.require_two()?;
        let mut out = self.ad_exponential_check(bound)?;
        let span = self.invariant_span();
        let working = cutoff - 1;
        for j in 0..2 {
            for k in 0..2 {
                let name = format!("[A{},B{}] = {}", j + 1, k + 1, if j == k { 1 } else { 0 });
                let mut bad = None;
                for f in &span {
                    let fs = GradedSeries::from_element(f, working);
                    let ab = self.a_op(j, &self.b_op(k, &fs, bound)?, bound)?;
                    let ba = self.b_op(k, &self.a_op(j, &fs, bound)?, bound)?;
                    let mut diff = ab.try_sub(&ba)?;
                    if j == k {
                        diff = diff.try_sub(&fs)?;
                    }
                    let diff = diff.truncate_at(cutoff);
                    if !diff.is_empty() {
                        bad = Some(format!("on {f}: {diff}"));
                        break;
                    }
                }
                out.push(match bad {
                    None => Check::pass(name),
                    Some(w) => Check::fail(name, w),
                });
            }
        }
        let (state, _, _) = self.invariant_eigenstate(0, 1, bound)?;
        let got = self.h_tilde.apply(&state)?;
        let want = state.scale_rational(&(&self.omega * rat_int(2)));
        out.push(Check::expect("H~(Omega p) = 2 omega Omega p", got == want, || got.to_string()));
        Ok(out)
    }

    /// `H̃† + H̃ + ∇² + 4ν(x1² + x2²)/(x1² − x2²)² + 2ω = 0`, as operators and on
    /// the monomial span up to `degmax`.
    pub fn adjoint_identity_check(&self, degmax: u32) -> Result<Vec<Check>, CalogeroError> {
        self.require_two()?;
        let dag = self.h_tilde.dagger()?;
        let extra = Element::new(
            Poly::radius_squared(2).scale_rational(&(&self.nu * rat_int(4))),
            rat_int(-2),
            Rational::zero(),
        );
        let rhs = self
            .h_tilde
            .try_add(&self.lap)?
            .try_add(&DiffOp::multiplication(extra))?
            .try_add(&DiffOp::identity(2).scale_rational(&(&self.omega * rat_int(2))))?
            .neg();
        let total = dag.try_sub(&rhs)?;
        Ok(vec![
            Check::expect("adjoint identity (operator)", total.is_zero(), || format!("residual {total}")),
            DiffOp::equal_on_span("adjoint identity (span)", &dag, &rhs, &monomial_span(2, degmax)),
        ])
    }

    /// Pushes `Σ c_n Φ_n` through `exp(−O_L/4ω) exp(∇²/4ω) exp(ωX²/2)`.
    pub fn similarity_chain(&self, v: &TSpaceVector, cutoff: i64, bound: usize) -> Result<ChainOutput, CalogeroError> {
        self.require_two()?;
        let osc = self.oscillator()?;
        let half = &self.omega / rat_int(2);
        let mut phi_side = Element::zero(2);
        let mut levels = Vec::new();
        for (idx, c) in v.coords() {
            phi_side = phi_side.try_add(&osc.phi(idx[0], idx[1])?.scale(c))?;
            levels.push(idx[0] + idx[1]);
        }
        let exact = ExpMode::Exact { bound };
        let q = apply_exp(&RadScalar::from_rational(half), &self.x2, &phi_side, exact)?
            .exact()
            .expect("exact mode");
        let heat_rate = RadScalar::from_rational((&self.omega * rat_int(4)).recip());
        let q = apply_exp(&heat_rate, &self.lap, &q, exact)?.exact().expect("exact mode");
        let homogeneous = levels.windows(2).all(|w| w[0] == w[1]);
        let invariant = q.symmetrize_d2()? == q;
        if invariant {
            let t = apply_exp(&self.omega_rate(), &self.ol, &q, exact)?.exact().expect("exact mode");
            let eigencheck = match (homogeneous, levels.first()) {
                (true, Some(&d)) => {
                    let got = self.h_tilde.apply(&t)?;
                    let want = t.scale_rational(&(&self.omega * rat_int(d as i64)));
                    Some(Check::expect(format!("H~ T phi = {d} omega T phi"), got == want, || {
                        format!("got {got}, want {want}")
                    }))
                }
                _ => None,
            };
            Ok(ChainOutput {
                value: ChainValue::Exact(t),
                eigencheck,
            })
        } else {
            let s = exp_series(&self.omega_rate(), &self.ol, &GradedSeries::from_element(&q, cutoff), bound)?;
            Ok(ChainOutput {
                value: ChainValue::Truncated(s),
                eigencheck: None,
            })
        }
    }

    fn phi_indices(nmax: u32) -> Vec<(u32, u32)> {
        (0..=nmax).flat_map(|n| (0..=nmax).map(move |l| (n, l))).collect()
    }

    /// Orthonormality and the `H̃` matrix in the pulled-back space, the
    /// chain's ground state, and eigenchecks on invariant chain images.
    pub fn t_orthonormality(&self, nmax: u32, cutoff: i64, bound: usize) -> Result<Vec<Check>, CalogeroError> {
        self.require_two()?;
        let osc = self.oscillator()?;
        let idx = Self::phi_indices(nmax);
        let vecs: Vec<TSpaceVector> = idx.iter().map(|&(n, l)| TSpaceVector::basis(&[n, l])).collect();
        let t_gram: Vec<Vec<RadScalar>> = vecs
            .iter()
            .map(|u| vecs.iter().map(|v| inner_product_t(u, v)).collect())
            .collect();

        let plain = WeightSpec::unweighted(2);
        let phis: Vec<Element> = idx.iter().map(|&(n, l)| osc.phi(n, l)).collect::<Result<_, _>>()?;
        let hphis: Vec<Element> = phis.iter().map(|f| osc.h().apply(f)).collect::<Result<_, _>>()?;
        let l2_gram: Vec<Vec<RadScalar>> = phis
            .par_iter()
            .map(|u| phis.iter().map(|v| inner_product_pi(u, v, &plain)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<_, _>>()?;
        let h_matrix: Vec<Vec<RadScalar>> = phis
            .par_iter()
            .map(|u| hphis.iter().map(|hv| inner_product_pi(u, hv, &plain)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<_, _>>()?;
        let mut bad_h = None;
        'outer: for (r, row) in h_matrix.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                let want = if r == c {
                    RadScalar::from_rational(&self.omega * rat_int((idx[r].0 + idx[r].1) as i64))
                } else {
                    RadScalar::zero()
                };
                // symmetry of the matrix is implied by the diagonal form
                if *v != want {
                    bad_h = Some(format!("<phi{:?}, H~ phi{:?}>_T = {v}, want {want}", idx[r], idx[c]));
                    break 'outer;
                }
            }
        }

        let ground = self.similarity_chain(&TSpaceVector::basis(&[0, 0]), cutoff, bound)?;
        let norm = RadScalar::sqrt_rational(&self.omega)? * RadScalar::pi_half_power(-1);
        let want_ground = Element::constant(2, norm.clone());
        let ground_ok = ground.value == ChainValue::Exact(want_ground.clone());

        // Φ(1,1) maps to the invariant p; Φ(2,0) + Φ(0,2) to a combination of s and 1
        let mut chain_checks = Vec::new();
        let mut pair = TSpaceVector::new();
        pair.set(&[2, 0], RadScalar::one());
        pair.set(&[0, 2], RadScalar::one());
        for v in [TSpaceVector::basis(&[1, 1]), pair] {
            let out = self.similarity_chain(&v, cutoff, bound)?;
            if let Some(c) = out.eigencheck {
                chain_checks.push(c);
            } else {
                chain_checks.push(Check::fail("chain eigencheck", "invariant input produced no eigencheck"));
            }
        }
        let p11 = self.similarity_chain(&TSpaceVector::basis(&[1, 1]), cutoff, bound)?;
        let want_p11 = Element::from_poly(Poly::from_exponents(&[1, 1], norm.scale(&(&self.omega * rat_int(2)))));
        chain_checks.push(Check::expect(
            "T phi(1,1) = 2 omega (omega/pi)^(1/2) x1 x2",
            p11.value == ChainValue::Exact(want_p11),
            || format!("{:?}", p11.value),
        ));

        let mut out = vec![
            to_check("T-space Gram = identity", first_non_identity(&t_gram, &idx, "<phi{r}, phi{c}>_T")),
            to_check("pulled-back L2 Gram = identity", first_non_identity(&l2_gram, &idx, "<Phi{r}, Phi{c}>")),
            to_check("H~ matrix = diag(omega(n1+n2))", bad_h),
            Check::expect("T Phi(0,0) = (omega/pi)^(1/2)", ground_ok, || format!("{:?}", ground.value)),
        ];
        out.extend(chain_checks);
        Ok(out)
    }

    /// Every invariant eigenstate with `2a + 2b <= degmax`.
    pub fn eigenfamily_suite(&self, degmax: u32, bound: usize) -> Result<Vec<Check>, CalogeroError> {
        let pairs: Vec<(u32, u32)> = (0..=degmax / 2)
            .flat_map(|t| (0..=t).map(move |a| (a, t - a)))
            .collect();
        let checks: Vec<Check> = pairs
            .par_iter()
            .map(|&(a, b)| self.invariant_eigenstate(a, b, bound).map(|(_, _, c)| c))
            .collect::<Result<_, _>>()?;
        Ok(checks)
    }

    /// Termination status of exact-mode `Ω` on each monomial up to `degmax`.
    /// `O_L` lowers degree by two, so a polynomial image vanishes within
    /// `deg/2 + 1` steps; each monomial gets `min(bound, deg/2 + 2)` steps.
    pub fn termination_survey(&self, degmax: u32, bound: usize) -> Vec<(Vec<u32>, bool)> {
        monomial_span(self.n, degmax)
            .into_par_iter()
            .map(|m| {
                let exps = m.poly().terms().next().map(|(k, _)| k.0.clone()).unwrap_or_default();
                let deg: u32 = exps.iter().sum();
                let steps = bound.min(deg as usize / 2 + 2);
                let ok = apply_exp(&self.omega_rate(), &self.ol, &m, ExpMode::Exact { bound: steps }).is_ok();
                (exps, ok)
            })
            .collect()
    }

    /// Gauge identity on the test set plus the ground-state relations.
    pub fn gauge_suite(&self) -> Result<Vec<Check>, CalogeroError> {
        let mut out = self.ground_state_checks()?;
        let checks: Vec<Check> = self
            .gauge_test_set()
            .par_iter()
            .map(|f| self.gauge_check(f))
            .collect::<Result<_, _>>()?;
        out.push(summarize("gauge identity on test set", &checks));
        out.extend(checks);
        Ok(out)
    }
}

fn to_check(name: &str, bad: Option<String>) -> Check {
    match bad {
        None => Check::pass(name),
        Some(w) => Check::fail(name, w),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(omega: Rational, nu: Rational) -> CalogeroModel {
        CalogeroModel::new(2, omega, nu, ModelOptions::default()).unwrap()
    }

    #[test]
    fn ground_energy() {
        let m = model(rat_int(1), rat(3, 2));
        assert_eq!(m.e0(), &RadScalar::from_int(4));
        let m3 = CalogeroModel::new(3, rat_int(1), rat_int(1), ModelOptions::default()).unwrap();
        assert_eq!(m3.e0(), &RadScalar::from_rational(rat(15, 2)));
    }

    #[test]
    fn parameter_validation() {
        assert!(CalogeroModel::new(4, rat_int(1), rat_int(1), ModelOptions::default()).is_err());
        assert!(CalogeroModel::new(2, rat_int(1), rat(1, 2), ModelOptions::default()).is_err());
        let opts = ModelOptions {
            allow_nu: true,
            ..Default::default()
        };
        assert!(CalogeroModel::new(2, rat_int(1), rat(1, 2), opts).is_ok());
    }

    #[test]
    fn ol_examples() {
        let nu = rat(3, 2);
        let m = model(rat_int(1), nu.clone());
        assert!(m.ol().apply(&m.p()).unwrap().is_zero());
        let want = Element::constant(2, RadScalar::from_rational(rat_int(4) + &nu * rat_int(8)));
        assert_eq!(m.ol().apply(&m.s()).unwrap(), want);
        assert_eq!(m.oe().apply(&m.p()).unwrap(), m.p().scale_rational(&rat_int(2)));
    }

    #[test]
    fn omega_on_s() {
        let m = model(rat_int(2), rat(3, 2));
        let (state, ev, check) = m.invariant_eigenstate(1, 0, 64).unwrap();
        assert!(check.passed());
        assert_eq!(ev, rat_int(4));
        // s − (1 + 2ν)/ω = s − 2
        let norm = RadScalar::sqrt_rational(&rat_int(2)).unwrap() * RadScalar::pi_half_power(-1);
        let want = m.s().try_sub(&Element::constant(2, RadScalar::from_int(2))).unwrap().scale(&norm);
        assert_eq!(state, want);
    }

    #[test]
    fn omega_on_x1_squared_does_not_terminate() {
        let m = model(rat_int(1), rat(3, 2));
        let f = Element::monomial(&[2, 0]);
        let r = apply_exp(&m.omega_rate(), m.ol(), &f, ExpMode::Exact { bound: 6 });
        assert!(matches!(r, Err(OpError::NonTermination { .. })));
    }

    #[test]
    fn truncated_x1_squared_leading_terms() {
        let omega = rat_int(1);
        let nu = rat(3, 2);
        let m = model(omega.clone(), nu.clone());
        let (series, check) = m.truncated_eigenstate(2, 0, -6, 64).unwrap();
        assert!(check.passed(), "{:?}", check);
        assert_eq!(series.component(&rat_int(2)), Some(&Element::monomial(&[2, 0])));
        // −(1/4ω)(2 + 8ν x1²/(x1² − x2²)) as a single element over the prefactor
        let poly = &Poly::pair_factor(2, 0, 1).scale_rational(&rat_int(2))
            + &Poly::from_exponents(&[2, 0], RadScalar::from_rational(&nu * rat_int(8)));
        let want = Element::new(poly.scale_rational(&rat(-1, 4)), rat_int(-1), Rational::zero());
        assert_eq!(series.component(&rat_int(0)), Some(&want));
        assert!(series.was_truncated());
    }

    #[test]
    fn gauge_small() {
        let m = model(rat_int(1), rat(3, 2));
        assert!(summarize("g", &m.gauge_suite().unwrap()).passed());
    }

    #[test]
    fn commutators_two_particles() {
        let m = model(rat_int(2), rat(5, 2));
        assert!(summarize("c", &m.commutator_suite(8)).passed());
    }

    #[test]
    fn corrupted_ol_is_detected() {
        let opts = ModelOptions {
            corrupt_ol: true,
            ..Default::default()
        };
        let m = CalogeroModel::new(2, rat_int(1), rat(3, 2), opts).unwrap();
        let checks = m.commutator_suite(8);
        let bad = checks.iter().find(|c| c.failed()).expect("failure expected");
        assert!(bad.witness.as_deref().unwrap().contains("d1"));
    }

    #[test]
    fn adjoint_identity_and_nu_zero_reduction() {
        let m = model(rat_int(1), rat(3, 2));
        assert!(summarize("adj", &m.adjoint_identity_check(4).unwrap()).passed());
        let opts = ModelOptions {
            allow_nu: true,
            ..Default::default()
        };
        let m0 = CalogeroModel::new(2, rat_int(3), rat_int(0), opts).unwrap();
        let dag = m0.h_tilde().dagger().unwrap();
        let want = m0
            .oe()
            .scale_rational(&rat_int(-3))
            .try_sub(&m0.lap().scale_rational(&rat(1, 2)))
            .unwrap()
            .try_sub(&DiffOp::identity(2).scale_rational(&rat_int(6)))
            .unwrap();
        assert_eq!(dag, want);
    }

    #[test]
    fn ad_series() {
        let m = model(rat_int(1), rat(3, 2));
        assert!(summarize("ad", &m.ad_exponential_check(8).unwrap()).passed());
    }

    #[test]
    fn heat_step_on_hermite() {
        // exp(∇²/4ω) H2(√ω x1) = 4ω x1²
        let omega = rat_int(3);
        let m = model(omega.clone(), rat(3, 2));
        let h2 = Element::from_poly(crate::qho::hermite_poly(2, &omega, 2, 0));
        let rate = RadScalar::from_rational(rat(1, 12));
        let out = apply_exp(&rate, m.lap(), &h2, ExpMode::Exact { bound: 8 }).unwrap().exact().unwrap();
        assert_eq!(out, Element::monomial(&[2, 0]).scale_rational(&rat_int(12)));
    }

    #[test]
    fn chain_ground_state() {
        let m = model(rat_int(1), rat(3, 2));
        let out = m.similarity_chain(&TSpaceVector::basis(&[0, 0]), -12, 64).unwrap();
        let want = Element::constant(2, RadScalar::pi_half_power(-1));
        assert_eq!(out.value, ChainValue::Exact(want));
        let nonsym = m.similarity_chain(&TSpaceVector::basis(&[1, 0]), -5, 64).unwrap();
        assert!(matches!(nonsym.value, ChainValue::Truncated(_)));
    }
}
