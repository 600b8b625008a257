//! Pseudo-bosonic ladder families for the two-mode harmonic oscillator in
//! the Gaussian-weighted space with weight `exp((β − ω) Σ x_j²)`.

use std::collections::HashMap;
use std::sync::Mutex;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::funcspace::{Element, FuncError, Poly};
use crate::gaussint::{inner_product_pi, quad_oracle, relative_gap, IntError, WeightSpec};
use crate::opalg::{DiffOp, OpError};
use crate::report::Check;
use crate::scalar::{factorial, rat, rat_int, RadScalar, Rational, ScalarError};

const MODES: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QhoError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("multiplier forms need beta = omega/2, got beta = {beta}, omega = {omega}")]
    UnsupportedBeta { omega: String, beta: String },
    #[error("ladder relations failed at construction: {0}")]
    Construction(String),
    #[error(transparent)]
    Op(#[from] OpError),
    #[error(transparent)]
    Int(#[from] IntError),
    #[error(transparent)]
    Func(#[from] FuncError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

/// Which multiplication intertwiner to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Multiplier {
    /// `exp(−ω X²/2)`, mapping the Ψ family onto the φ family.
    SPhi,
    /// `exp(+ω X²/2)`, mapping the φ family onto the Ψ family.
    SPsi,
}

/// `H_n(√ω · x_var)` as a polynomial in `nvars` variables.
pub fn hermite_poly(n: u32, omega: &Rational, nvars: usize, var: usize) -> Poly {
    let root = RadScalar::sqrt_rational(omega).expect("omega is positive");
    let y = Poly::var(nvars, var).scale(&root);
    let two_y = y.scale_rational(&rat_int(2));
    let mut prev = Poly::one(nvars);
    if n == 0 {
        return prev;
    }
    let mut cur = two_y.clone();
    for k in 1..n {
        let next = &(&two_y * &cur) - &prev.scale_rational(&rat_int(2 * k as i64));
        prev = cur;
        cur = next;
    }
    cur
}

fn inv_sqrt_int(n: &num_bigint::BigInt) -> RadScalar {
    RadScalar::sqrt_rational(&Rational::from_integer(n.clone()).recip()).expect("positive")
}

pub struct PseudoBosonFamily {
    omega: Rational,
    beta: Rational,
    weight: WeightSpec,
    norm: RadScalar,
    a: Vec<DiffOp>,
    b: Vec<DiffOp>,
    a_star: Vec<DiffOp>,
    b_star: Vec<DiffOp>,
    number: Vec<DiffOp>,
    number_star: Vec<DiffOp>,
    h: DiffOp,
    h_star: DiffOp,
    phi_cache: Mutex<HashMap<(u32, u32), Element>>,
    psi_cache: Mutex<HashMap<(u32, u32), Element>>,
}

impl std::fmt::Debug for PseudoBosonFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PseudoBosonFamily")
            .field("omega", &self.omega)
            .field("beta", &self.beta)
            .finish_non_exhaustive()
    }
}

impl PseudoBosonFamily {
    /// Builds the family and checks the ladder commutation relations.
    pub fn new(omega: Rational, beta: Rational) -> Result<Self, QhoError> {
        if !omega.is_positive() {
            return Err(QhoError::InvalidParameter(format!("omega must be positive, got {omega}")));
        }
        if !beta.is_positive() || beta > omega {
            return Err(QhoError::InvalidParameter(format!(
                "beta must satisfy 0 < beta <= omega, got {beta}"
            )));
        }
        let n = MODES;
        let gamma_pi = &beta - &omega;
        let weight = WeightSpec::new(n, gamma_pi.clone())?;
        let inv_root = RadScalar::sqrt_rational(&(&omega * rat_int(2)).recip())?;
        let wx = |j: usize| DiffOp::var(n, j).scale_rational(&omega);
        let a: Vec<DiffOp> = (0..n)
            .map(|j| wx(j).try_add(&DiffOp::partial(n, j)).map(|op| op.scale(&inv_root)))
            .collect::<Result<_, _>>()?;
        let b: Vec<DiffOp> = (0..n)
            .map(|j| wx(j).try_sub(&DiffOp::partial(n, j)).map(|op| op.scale(&inv_root)))
            .collect::<Result<_, _>>()?;
        let a_star: Vec<DiffOp> = a.iter().map(|op| op.star(&gamma_pi)).collect::<Result<_, _>>()?;
        let b_star: Vec<DiffOp> = b.iter().map(|op| op.star(&gamma_pi)).collect::<Result<_, _>>()?;
        let number: Vec<DiffOp> = (0..n).map(|j| b[j].compose(&a[j])).collect::<Result<_, _>>()?;
        let number_star: Vec<DiffOp> = (0..n)
            .map(|j| a_star[j].compose(&b_star[j]))
            .collect::<Result<_, _>>()?;
        let h = number[0].try_add(&number[1])?.scale_rational(&omega);
        let h_star = h.star(&gamma_pi)?;
        let norm = RadScalar::sqrt_rational(&omega)? * RadScalar::pi_half_power(-1);
        let fam = Self {
            omega,
            beta,
            weight,
            norm,
            a,
            b,
            a_star,
            b_star,
            number,
            number_star,
            h,
            h_star,
            phi_cache: Mutex::new(HashMap::new()),
            psi_cache: Mutex::new(HashMap::new()),
        };
        if let Some(bad) = fam.commutator_checks().into_iter().find(Check::failed) {
            return Err(QhoError::Construction(format!(
                "{}: {}",
                bad.name,
                bad.witness.unwrap_or_default()
            )));
        }
        Ok(fam)
    }

    pub fn omega(&self) -> &Rational {
        &self.omega
    }

    pub fn beta(&self) -> &Rational {
        &self.beta
    }

    pub fn weight(&self) -> &WeightSpec {
        &self.weight
    }

    /// `N_φ = N_Ψ = √(ω/π)`.
    pub fn norm(&self) -> &RadScalar {
        &self.norm
    }

    pub fn a(&self, j: usize) -> &DiffOp {
        &self.a[j]
    }

    pub fn b(&self, j: usize) -> &DiffOp {
        &self.b[j]
    }

    pub fn a_star(&self, j: usize) -> &DiffOp {
        &self.a_star[j]
    }

    pub fn b_star(&self, j: usize) -> &DiffOp {
        &self.b_star[j]
    }

    /// `N_j = b_j a_j`.
    pub fn number(&self, j: usize) -> &DiffOp {
        &self.number[j]
    }

    /// `a_j* b_j*`, the weighted adjoint of `N_j`.
    pub fn number_star(&self, j: usize) -> &DiffOp {
        &self.number_star[j]
    }

    pub fn h(&self) -> &DiffOp {
        &self.h
    }

    pub fn h_star(&self) -> &DiffOp {
        &self.h_star
    }

    pub fn is_multiplier_point(&self) -> bool {
        self.beta.clone() * rat_int(2) == self.omega
    }

    fn require_multiplier_point(&self) -> Result<(), QhoError> {
        if self.is_multiplier_point() {
            Ok(())
        } else {
            Err(QhoError::UnsupportedBeta {
                omega: self.omega.to_string(),
                beta: self.beta.to_string(),
            })
        }
    }

    pub fn phi00(&self) -> Element {
        Element::constant(MODES, self.norm.clone()).shift_gaussian(&(-&self.omega / rat_int(2)))
    }

    pub fn psi00(&self) -> Element {
        Element::constant(MODES, self.norm.clone()).shift_gaussian(&(&self.omega / rat_int(2) - &self.beta))
    }

    fn ladder(
        &self,
        cache: &Mutex<HashMap<(u32, u32), Element>>,
        raise: &[DiffOp],
        vacuum: Element,
        n1: u32,
        n2: u32,
    ) -> Result<Element, QhoError> {
        if let Some(e) = cache.lock().expect("cache lock").get(&(n1, n2)) {
            return Ok(e.clone());
        }
        let value = if n1 == 0 && n2 == 0 {
            vacuum
        } else {
            let (j, k, prev) = if n2 > 0 { (1, n2, (n1, n2 - 1)) } else { (0, n1, (n1 - 1, 0)) };
            let below = self.ladder(cache, raise, vacuum, prev.0, prev.1)?;
            raise[j].apply(&below)?.scale(&inv_sqrt_int(&k.into()))
        };
        cache.lock().expect("cache lock").insert((n1, n2), value.clone());
        Ok(value)
    }

    /// `(n1! n2!)^(−1/2) b1^n1 b2^n2 φ00`.
    pub fn phi(&self, n1: u32, n2: u32) -> Result<Element, QhoError> {
        self.ladder(&self.phi_cache, &self.b, self.phi00(), n1, n2)
    }

    /// `(n1! n2!)^(−1/2) (a1*)^n1 (a2*)^n2 Ψ00`.
    pub fn psi(&self, n1: u32, n2: u32) -> Result<Element, QhoError> {
        self.ladder(&self.psi_cache, &self.a_star, self.psi00(), n1, n2)
    }

    fn hermite_pair(&self, n1: u32, n2: u32) -> Poly {
        let scale = inv_sqrt_int(&(factorial(n1) * factorial(n2) * (num_bigint::BigInt::one() << (n1 + n2) as usize)));
        let p = &hermite_poly(n1, &self.omega, MODES, 0) * &hermite_poly(n2, &self.omega, MODES, 1);
        p.scale(&(&scale * &self.norm))
    }

    /// Closed Hermite form of φ.
    pub fn phi_closed(&self, n1: u32, n2: u32) -> Element {
        Element::from_poly(self.hermite_pair(n1, n2)).shift_gaussian(&(-&self.omega / rat_int(2)))
    }

    /// Closed Hermite form of Ψ; the polynomial part does not depend on β.
    pub fn psi_closed(&self, n1: u32, n2: u32) -> Element {
        Element::from_poly(self.hermite_pair(n1, n2)).shift_gaussian(&(&self.omega / rat_int(2) - &self.beta))
    }

    pub fn inner(&self, f: &Element, g: &Element) -> Result<RadScalar, QhoError> {
        Ok(inner_product_pi(f, g, &self.weight)?)
    }

    /// Multiplication intertwiners, defined at `β = ω/2`.
    pub fn s_multiplier_apply(&self, which: Multiplier, f: &Element) -> Result<Element, QhoError> {
        self.require_multiplier_point()?;
        let half = &self.omega / rat_int(2);
        Ok(match which {
            Multiplier::SPhi => f.shift_gaussian(&-half),
            Multiplier::SPsi => f.shift_gaussian(&half),
        })
    }

    /// Commutation relations of the two ladder pairs, vacuum annihilation
    /// and the closed forms of the weighted adjoints.
    pub fn commutator_checks(&self) -> Vec<Check> {
        let n = MODES;
        let id = DiffOp::identity(n);
        let zero = DiffOp::zero(n);
        let mut out = Vec::new();
        let rel = |name: String, got: Result<DiffOp, OpError>, want: &DiffOp| match got {
            Ok(op) => Check::expect(name, op == *want, || format!("got {op}, want {want}")),
            Err(e) => Check::fail(name, format!("error: {e}")),
        };
        for j in 0..n {
            for k in 0..n {
                let want = if j == k { &id } else { &zero };
                out.push(rel(format!("[a{},b{}]", j + 1, k + 1), self.a[j].commutator(&self.b[k]), want));
                out.push(rel(format!("[b{}*,a{}*]", j + 1, k + 1), self.b_star[j].commutator(&self.a_star[k]), want));
                if j < k {
                    out.push(rel(format!("[a{},a{}]", j + 1, k + 1), self.a[j].commutator(&self.a[k]), &zero));
                    out.push(rel(format!("[b{},b{}]", j + 1, k + 1), self.b[j].commutator(&self.b[k]), &zero));
                }
            }
        }
        for j in 0..n {
            let phi = self.a[j].apply(&self.phi00());
            out.push(match phi {
                Ok(e) => Check::expect(format!("a{} phi00 = 0", j + 1), e.is_zero(), || e.to_string()),
                Err(e) => Check::fail(format!("a{} phi00 = 0", j + 1), e.to_string()),
            });
            let psi = self.b_star[j].apply(&self.psi00());
            out.push(match psi {
                Ok(e) => Check::expect(format!("b{}* psi00 = 0", j + 1), e.is_zero(), || e.to_string()),
                Err(e) => Check::fail(format!("b{}* psi00 = 0", j + 1), e.to_string()),
            });
        }
        out.extend(self.star_closed_form_checks());
        out
    }

    /// `a_j* = ((3ω − 2β)x_j − ∂_j)/√(2ω)` and `b_j* = ((2β − ω)x_j + ∂_j)/√(2ω)`.
    fn star_closed_form_checks(&self) -> Vec<Check> {
        let n = MODES;
        let inv_root = RadScalar::sqrt_rational(&(&self.omega * rat_int(2)).recip()).expect("positive");
        let two_b = &self.beta * rat_int(2);
        let ca = &self.omega * rat_int(3) - &two_b;
        let cb = &two_b - &self.omega;
        (0..n)
            .flat_map(|j| {
                let x = DiffOp::var(n, j);
                let d = DiffOp::partial(n, j);
                let want_a = x.scale_rational(&ca).try_sub(&d).expect("addable").scale(&inv_root);
                let want_b = x.scale_rational(&cb).try_add(&d).expect("addable").scale(&inv_root);
                [
                    Check::expect(format!("a{}* closed form", j + 1), self.a_star[j] == want_a, || {
                        format!("got {}, want {want_a}", self.a_star[j])
                    }),
                    Check::expect(format!("b{}* closed form", j + 1), self.b_star[j] == want_b, || {
                        format!("got {}, want {want_b}", self.b_star[j])
                    }),
                ]
            })
            .collect()
    }

    fn indices(nmax: u32) -> Vec<(u32, u32)> {
        (0..=nmax).flat_map(|n| (0..=nmax).map(move |l| (n, l))).collect()
    }

    /// Ladder vectors agree with the closed Hermite forms.
    pub fn check_closed_forms(&self, nmax: u32) -> Vec<Check> {
        let mut phi_bad = None;
        let mut psi_bad = None;
        for (n, l) in Self::indices(nmax) {
            if phi_bad.is_none() {
                match self.phi(n, l) {
                    Ok(e) if e == self.phi_closed(n, l) => {}
                    Ok(e) => phi_bad = Some(format!("({n},{l}): ladder {e}, closed {}", self.phi_closed(n, l))),
                    Err(e) => phi_bad = Some(format!("({n},{l}): {e}")),
                }
            }
            if psi_bad.is_none() {
                match self.psi(n, l) {
                    Ok(e) if e == self.psi_closed(n, l) => {}
                    Ok(e) => psi_bad = Some(format!("({n},{l}): ladder {e}, closed {}", self.psi_closed(n, l))),
                    Err(e) => psi_bad = Some(format!("({n},{l}): {e}")),
                }
            }
        }
        vec![to_check("phi ladder = Hermite form", phi_bad), to_check("psi ladder = Hermite form", psi_bad)]
    }

    /// Number-operator and Hamiltonian eigenrelations on both families.
    pub fn check_ladder_spectra(&self, nmax: u32) -> Result<Vec<Check>, QhoError> {
        let mut bad: [Option<String>; 6] = Default::default();
        let names = ["N1 phi = n phi", "N2 phi = l phi", "N1* psi = n psi", "N2* psi = l psi", "h phi", "h* psi"];
        for (n, l) in Self::indices(nmax) {
            let phi = self.phi(n, l)?;
            let psi = self.psi(n, l)?;
            let total = rat_int((n + l) as i64) * &self.omega;
            let cases = [
                (&self.number[0], &phi, rat_int(n as i64)),
                (&self.number[1], &phi, rat_int(l as i64)),
                (&self.number_star[0], &psi, rat_int(n as i64)),
                (&self.number_star[1], &psi, rat_int(l as i64)),
                (&self.h, &phi, total.clone()),
                (&self.h_star, &psi, total),
            ];
            for (slot, (op, v, ev)) in bad.iter_mut().zip(cases) {
                if slot.is_some() {
                    continue;
                }
                let got = op.apply(v)?;
                let want = v.scale_rational(&ev);
                if got != want {
                    *slot = Some(format!("({n},{l}): got {got}, want {want}"));
                }
            }
        }
        Ok(names.iter().zip(bad).map(|(name, b)| to_check(name, b)).collect())
    }

    /// Exact Gram matrix `⟨Ψ_(n,l), φ_(m,k)⟩_π` in row-major index order.
    pub fn biorthogonality_matrix(&self, nmax: u32) -> Result<Vec<Vec<RadScalar>>, QhoError> {
        let idx = Self::indices(nmax);
        let phis: Vec<Element> = idx.iter().map(|&(n, l)| self.phi(n, l)).collect::<Result<_, _>>()?;
        let psis: Vec<Element> = idx.iter().map(|&(n, l)| self.psi(n, l)).collect::<Result<_, _>>()?;
        psis.par_iter()
            .map(|psi| phis.iter().map(|phi| self.inner(psi, phi)).collect::<Result<Vec<_>, _>>())
            .collect()
    }

    pub fn check_biorthogonality(&self, nmax: u32) -> Result<Check, QhoError> {
        let idx = Self::indices(nmax);
        let gram = self.biorthogonality_matrix(nmax)?;
        Ok(to_check("biorthogonality", first_non_identity(&gram, &idx, "<Psi{r}, phi{c}>")))
    }

    /// `f = Σ ⟨Ψ_k, f⟩_π φ_k` for seeded random `f` in the φ span, and the
    /// dual statement with roles swapped.
    pub fn check_reconstruction(&self, nmax: u32, seed: u64, samples: usize) -> Result<Vec<Check>, QhoError> {
        let idx = Self::indices(nmax);
        let phis: Vec<Element> = idx.iter().map(|&(n, l)| self.phi(n, l)).collect::<Result<_, _>>()?;
        let psis: Vec<Element> = idx.iter().map(|&(n, l)| self.psi(n, l)).collect::<Result<_, _>>()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut bad_phi = None;
        let mut bad_psi = None;
        for s in 0..samples {
            let coeffs: Vec<Rational> = idx
                .iter()
                .map(|_| {
                    if rng.gen_bool(0.3) {
                        Rational::zero()
                    } else {
                        rat(rng.gen_range(-6..=6), rng.gen_range(1..=5))
                    }
                })
                .collect();
            for (basis, dual, slot) in [(&phis, &psis, &mut bad_phi), (&psis, &phis, &mut bad_psi)] {
                if slot.is_some() {
                    continue;
                }
                let f = combine(basis, &coeffs)?;
                let mut rebuilt = Element::zero(MODES);
                for (d, v) in dual.iter().zip(basis) {
                    let c = self.inner(d, &f)?;
                    rebuilt = rebuilt.try_add(&v.scale(&c))?;
                }
                if rebuilt != f {
                    *slot = Some(format!("sample {s}: f = {f}, rebuilt {rebuilt}"));
                }
            }
        }
        Ok(vec![
            to_check("reconstruction in phi span", bad_phi),
            to_check("reconstruction in psi span", bad_psi),
        ])
    }

    /// `‖Ψ_(n,n)‖²_π / ‖φ_(n,n)‖²_π` for `n = 0..=nmax`, exactly.
    pub fn norm_ratios(&self, nmax: u32) -> Result<Vec<RadScalar>, QhoError> {
        (0..=nmax)
            .map(|n| {
                let psi = self.psi(n, n)?;
                let phi = self.phi(n, n)?;
                Ok(self.inner(&psi, &psi)?.div(&self.inner(&phi, &phi)?)?)
            })
            .collect()
    }

    /// The norm ratio grows strictly with `n`.
    pub fn check_non_regularity(&self, nmax: u32) -> Result<Check, QhoError> {
        let ratios = self.norm_ratios(nmax)?;
        let mut prev: Option<Rational> = None;
        for (n, r) in ratios.iter().enumerate() {
            let Some(q) = r.as_rational() else {
                return Ok(Check::fail("norm ratio growth", format!("n = {n}: ratio {r} is not rational")));
            };
            if let Some(p) = &prev {
                if q <= *p {
                    return Ok(Check::fail("norm ratio growth", format!("n = {n}: {q} <= {p}")));
                }
            }
            prev = Some(q);
        }
        Ok(Check::pass("norm ratio growth"))
    }

    /// `⟨Ψ00, Ψ00⟩_π = N² π/β` and `⟨Ψ00, φ00⟩_π = 1`.
    pub fn check_vacuum_norms(&self) -> Result<Vec<Check>, QhoError> {
        let psi = self.psi00();
        let got = self.inner(&psi, &psi)?;
        let want = (&self.norm * &self.norm) * RadScalar::pi_half_power(2).scale(&self.beta.recip());
        let pair = self.inner(&psi, &self.phi00())?;
        Ok(vec![
            Check::expect("psi00 norm", got == want, || format!("got {got}, want {want}")),
            Check::expect("<psi00, phi00> = 1", pair.is_one(), || pair.to_string()),
        ])
    }

    /// Multiplier mapping and intertwining relations at `β = ω/2`.
    pub fn check_intertwining(&self, nmax: u32) -> Result<Vec<Check>, QhoError> {
        self.require_multiplier_point()?;
        let mut bad: [Option<String>; 6] = Default::default();
        let names = [
            "S_phi psi = phi",
            "S_psi S_phi = 1",
            "S_psi N_j = N_j* S_psi",
            "N_j S_phi = S_phi N_j*",
            "S_psi h = h* S_psi",
            "S_psi phi = psi",
        ];
        let note = |slot: &mut Option<String>, ok: bool, w: &dyn Fn() -> String| {
            if slot.is_none() && !ok {
                *slot = Some(w());
            }
        };
        for (n, l) in Self::indices(nmax) {
            let phi = self.phi(n, l)?;
            let psi = self.psi(n, l)?;
            let s_phi_psi = self.s_multiplier_apply(Multiplier::SPhi, &psi)?;
            note(&mut bad[0], s_phi_psi == phi, &|| format!("({n},{l}): {s_phi_psi}"));
            let round = self.s_multiplier_apply(Multiplier::SPsi, &self.s_multiplier_apply(Multiplier::SPhi, &phi)?)?;
            note(&mut bad[1], round == phi, &|| format!("({n},{l}): {round}"));
            for j in 0..MODES {
                let lhs = self.s_multiplier_apply(Multiplier::SPsi, &self.number[j].apply(&phi)?)?;
                let rhs = self.number_star[j].apply(&self.s_multiplier_apply(Multiplier::SPsi, &phi)?)?;
                note(&mut bad[2], lhs == rhs, &|| format!("j={}, ({n},{l}): {lhs} vs {rhs}", j + 1));
                let lhs = self.number[j].apply(&self.s_multiplier_apply(Multiplier::SPhi, &psi)?)?;
                let rhs = self.s_multiplier_apply(Multiplier::SPhi, &self.number_star[j].apply(&psi)?)?;
                note(&mut bad[3], lhs == rhs, &|| format!("j={}, ({n},{l}): {lhs} vs {rhs}", j + 1));
            }
            let lhs = self.s_multiplier_apply(Multiplier::SPsi, &self.h.apply(&phi)?)?;
            let rhs = self.h_star.apply(&self.s_multiplier_apply(Multiplier::SPsi, &phi)?)?;
            note(&mut bad[4], lhs == rhs, &|| format!("({n},{l}): {lhs} vs {rhs}"));
            let mapped = self.s_multiplier_apply(Multiplier::SPsi, &phi)?;
            note(&mut bad[5], mapped == psi, &|| format!("({n},{l}): {mapped}"));
        }
        Ok(names.iter().zip(bad).map(|(name, b)| to_check(name, b)).collect())
    }

    /// `e_k = exp(ωX²/4) φ_k`: orthonormal in the weighted space, with
    /// `T e_k = φ_k` and `T⁻¹ e_k = Ψ_k` for `T = exp(−ωX²/4)`.
    pub fn appendix_chain(&self, nmax: u32) -> Result<Vec<Check>, QhoError> {
        self.require_multiplier_point()?;
        let quarter = &self.omega / rat_int(4);
        let idx = Self::indices(nmax);
        let es: Vec<Element> = idx
            .iter()
            .map(|&(n, l)| self.phi(n, l).map(|p| p.shift_gaussian(&quarter)))
            .collect::<Result<_, _>>()?;
        let gram: Vec<Vec<RadScalar>> = es
            .par_iter()
            .map(|u| es.iter().map(|v| self.inner(u, v)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<_, _>>()?;
        let mut bad_t = None;
        let mut bad_tinv = None;
        for (e, &(n, l)) in es.iter().zip(&idx) {
            let te = e.shift_gaussian(&-&quarter);
            if bad_t.is_none() && te != self.phi(n, l)? {
                bad_t = Some(format!("({n},{l}): {te}"));
            }
            let tinv = e.shift_gaussian(&quarter);
            if bad_tinv.is_none() && tinv != self.psi(n, l)? {
                bad_tinv = Some(format!("({n},{l}): {tinv}"));
            }
        }
        Ok(vec![
            to_check("e basis orthonormal", first_non_identity(&gram, &idx, "<e{r}, e{c}>")),
            to_check("T e = phi", bad_t),
            to_check("T^-1 e = psi", bad_tinv),
        ])
    }

    /// Exact `⟨Ψ_i, φ_j⟩_π` and `⟨φ_i, φ_j⟩_π` against Gauss–Hermite
    /// quadrature of the given order. Returns the check and the number of
    /// pairs compared.
    pub fn check_quadrature(&self, nmax: u32, order: usize, tol: f64) -> Result<(Check, usize), QhoError> {
        let (phis, psis) = self.sample_vectors(nmax)?;
        let idx = Self::indices(nmax);
        let rows: Vec<(String, &Element)> = psis
            .iter()
            .zip(&idx)
            .map(|(v, k)| (format!("Psi{k:?}"), v))
            .chain(phis.iter().zip(&idx).map(|(v, k)| (format!("phi{k:?}"), v)))
            .collect();
        let gaps: Vec<(f64, String)> = rows
            .par_iter()
            .map(|(rname, u)| {
                let mut worst = (0.0_f64, String::new());
                for (v, k) in phis.iter().zip(&idx) {
                    let exact = self.inner(u, v)?.to_f64();
                    let quad = quad_oracle(u, v, &self.weight, order)?;
                    let gap = relative_gap(quad, exact);
                    if gap > worst.0 || gap.is_nan() {
                        worst = (gap, format!("<{rname}, phi{k:?}>: exact {exact:e}, quadrature {quad:e}"));
                    }
                }
                Ok(worst)
            })
            .collect::<Result<_, QhoError>>()?;
        let pairs = rows.len() * phis.len();
        let (gap, witness) = gaps
            .into_iter()
            .fold((0.0, String::new()), |a, b| if b.0 > a.0 || b.0.is_nan() { b } else { a });
        let name = format!("quadrature agreement ({pairs} pairs, order {order})");
        Ok((
            Check::expect(name, gap <= tol, || format!("relative gap {gap:e} at {witness}")),
            pairs,
        ))
    }

    /// Elements used by the quadrature cross-check: φ and Ψ up to `nmax`.
    pub fn sample_vectors(&self, nmax: u32) -> Result<(Vec<Element>, Vec<Element>), QhoError> {
        let idx = Self::indices(nmax);
        let phis = idx.iter().map(|&(n, l)| self.phi(n, l)).collect::<Result<_, _>>()?;
        let psis = idx.iter().map(|&(n, l)| self.psi(n, l)).collect::<Result<_, _>>()?;
        Ok((phis, psis))
    }
}

fn combine(basis: &[Element], coeffs: &[Rational]) -> Result<Element, QhoError> {
    let mut f = Element::zero(MODES);
    for (v, c) in basis.iter().zip(coeffs) {
        if !c.is_zero() {
            f = f.try_add(&v.scale_rational(c))?;
        }
    }
    Ok(f)
}

fn to_check(name: &str, bad: Option<String>) -> Check {
    match bad {
        None => Check::pass(name),
        Some(w) => Check::fail(name, w),
    }
}

/// First entry of `gram` differing from the identity, rendered with the
/// pattern's `{r}`/`{c}` replaced by index pairs.
pub(crate) fn first_non_identity(gram: &[Vec<RadScalar>], idx: &[(u32, u32)], pattern: &str) -> Option<String> {
    for (r, row) in gram.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            let ok = if r == c { v.is_one() } else { v.is_zero() };
            if !ok {
                let label = pattern
                    .replace("{r}", &format!("({},{})", idx[r].0, idx[r].1))
                    .replace("{c}", &format!("({},{})", idx[c].0, idx[c].1));
                return Some(format!("{label} = {v}"));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::summarize;

    fn fam(omega: i64, beta: Rational) -> PseudoBosonFamily {
        PseudoBosonFamily::new(rat_int(omega), beta).unwrap()
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(PseudoBosonFamily::new(rat_int(0), rat(1, 2)).is_err());
        assert!(PseudoBosonFamily::new(rat_int(1), rat_int(2)).is_err());
        assert!(PseudoBosonFamily::new(rat_int(1), rat_int(0)).is_err());
    }

    #[test]
    fn hermite_recurrence_values() {
        // H2(y) = 4y² − 2, H3(y) = 8y³ − 12y at ω = 1
        let h2 = hermite_poly(2, &rat_int(1), 1, 0);
        assert_eq!(h2.to_string(), "4*x1^2 - 2");
        let h3 = hermite_poly(3, &rat_int(1), 1, 0);
        assert_eq!(h3.to_string(), "8*x1^3 - 12*x1");
        // ω = 4 scales y = 2x
        assert_eq!(hermite_poly(2, &rat_int(4), 1, 0).to_string(), "16*x1^2 - 2");
    }

    #[test]
    fn first_excited_state() {
        let f = fam(1, rat(1, 2));
        // √(ω/π)·(1/√2)·2√ω x1 = √2 π^(-1/2) x1 at ω = 1
        let phi10 = f.phi(1, 0).unwrap();
        let c = RadScalar::sqrt_rational(&rat_int(2)).unwrap() * RadScalar::pi_half_power(-1);
        let want = Element::from_poly(Poly::var(2, 0).scale(&c)).shift_gaussian(&rat(-1, 2));
        assert_eq!(phi10, want);
        assert_eq!(f.number(0).apply(&phi10).unwrap(), phi10);
    }

    #[test]
    fn b_star_is_a_derivative_at_half_omega() {
        let f = fam(2, rat_int(1));
        let want = DiffOp::partial(2, 0).scale(&RadScalar::sqrt_rational(&rat(1, 4)).unwrap());
        assert_eq!(f.b_star(0), &want);
    }

    #[test]
    fn psi_is_gaussian_free_at_half_omega() {
        let f = fam(1, rat(1, 2));
        assert_eq!(f.psi00(), Element::constant(2, f.norm().clone()));
        let psi21 = f.psi(2, 1).unwrap();
        assert!(psi21.gamma().is_zero());
        assert_eq!(psi21, f.psi_closed(2, 1));
    }

    #[test]
    fn closed_forms_and_spectra_small() {
        for beta in [rat(1, 4), rat(1, 2), rat(3, 4)] {
            let f = fam(1, beta);
            assert!(summarize("closed", &f.check_closed_forms(3)).passed());
            assert!(summarize("spectra", &f.check_ladder_spectra(3).unwrap()).passed());
        }
    }

    #[test]
    fn biorthogonality_small() {
        let f = fam(4, rat_int(1));
        assert!(f.check_biorthogonality(2).unwrap().passed());
        let m = f.biorthogonality_matrix(1).unwrap();
        assert!(m[0][0].is_one());
        assert!(m[2][0].is_zero());
    }

    #[test]
    fn vacuum_norm_uses_beta() {
        for beta in [rat(1, 4), rat(1, 2), rat(3, 4)] {
            assert!(summarize("vac", &fam(1, beta).check_vacuum_norms().unwrap()).passed());
        }
    }

    #[test]
    fn multipliers_need_half_omega() {
        let f = fam(1, rat(1, 4));
        assert!(matches!(
            f.s_multiplier_apply(Multiplier::SPhi, &f.phi00()),
            Err(QhoError::UnsupportedBeta { .. })
        ));
        let g = fam(1, rat(1, 2));
        assert_eq!(g.s_multiplier_apply(Multiplier::SPsi, &g.phi00()).unwrap(), g.psi00());
    }

    #[test]
    fn intertwining_and_appendix_small() {
        let f = fam(2, rat_int(1));
        assert!(summarize("int", &f.check_intertwining(2).unwrap()).passed());
        assert!(summarize("app", &f.appendix_chain(2).unwrap()).passed());
    }

    #[test]
    fn reconstruction_small() {
        let f = fam(1, rat(3, 4));
        assert!(summarize("rec", &f.check_reconstruction(2, 7, 3).unwrap()).passed());
    }

    #[test]
    fn norm_ratio_grows() {
        let f = fam(1, rat(1, 2));
        let r = f.norm_ratios(3).unwrap();
        assert!(r.iter().all(|x| x.as_rational().is_some()));
        assert!(f.check_non_regularity(4).unwrap().passed());
    }
}
