//! The one-register algorithm with tunable phase functions.
//!
//! Instead of two ancilla qubits, a single qubit receives both amplitude
//! encodings, and each oracle carries a free phase function (`theta` on the
//! group, `chi` on the dual). The interference between the two "bad" branches
//! can push the success probability above `(rhat/R)^2`, all the way to 1 for
//! certain non-bent functions.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::abelian::{char_eval_unchecked, fourier, GroupElement, GroupSpec};
use crate::gfunc::VectorFn;
use crate::hiddenshift::{AlgorithmId, HiddenShiftInstance, RunConfig, RunReport};
use crate::statevec::{complete_column, complete_row, Register, RegisterKind, SimState, ValueAlphabet};
use crate::{Error, Result};

const TAU: f64 = 2.0 * std::f64::consts::PI;

/// Phase functions `theta: G -> [0, 2pi)` and `chi: dual -> [0, 2pi)`, stored as
/// tables in lexicographic element order.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseAssignment {
    pub theta: Vec<f64>,
    pub chi: Vec<f64>,
}

impl PhaseAssignment {
    pub fn new(group: &GroupSpec, theta: Vec<f64>, chi: Vec<f64>) -> Result<Self> {
        if theta.len() != group.order() || chi.len() != group.order() {
            return Err(Error::Dimension("phase tables must cover the group and its dual".into()));
        }
        let reduce = |v: Vec<f64>| v.into_iter().map(|a| a.rem_euclid(TAU)).collect();
        Ok(PhaseAssignment { theta: reduce(theta), chi: reduce(chi) })
    }

    pub fn zero(group: &GroupSpec) -> Self {
        PhaseAssignment { theta: vec![0.0; group.order()], chi: vec![0.0; group.order()] }
    }

    pub fn random<R: Rng>(group: &GroupSpec, rng: &mut R) -> Self {
        let n = group.order();
        PhaseAssignment {
            theta: (0..n).map(|_| rng.gen_range(0.0..TAU)).collect(),
            chi: (0..n).map(|_| rng.gen_range(0.0..TAU)).collect(),
        }
    }
}

/// The interference data: `h_s(x) = e^{i theta(x+s)} sqrt(1 - |f(x)/R|^2)`, its
/// Fourier transform, and the cross term `Z_s`.
#[derive(Debug, Clone)]
pub struct HsData {
    pub hs: VectorFn,
    pub hshat: VectorFn,
    pub zs: Complex64,
}

fn check_one_register_instance(instance: &HiddenShiftInstance) -> Result<()> {
    if instance.dim() != 1 {
        return Err(Error::Precondition("one-register algorithm needs d = 1".into()));
    }
    if !instance.profile().full_windows() {
        return Err(Error::Precondition(
            "one-register algorithm expects an (R, rhat) profile with alpha = alphahat = 1".into(),
        ));
    }
    Ok(())
}

// The weight expressions below are written exactly as the simulation's oracle
// blocks compute them (complex division, then norm_sqr). At window boundaries
// like |f_hat| = rhat the square root amplifies any ulp-level difference to
// ~1e-8, so the formula path must share the simulation's arithmetic.

fn dual_weight(instance: &HiddenShiftInstance, phi_idx: usize) -> Result<f64> {
    let rhat = instance.profile().rhat;
    let fhat = instance.fhat().scalar_at(phi_idx);
    if fhat.norm() < 1e-12 {
        return Err(Error::DivisionByZero(format!(
            "f_hat vanishes at dual index {phi_idx}"
        )));
    }
    let good = rhat / fhat;
    Ok((1.0 - good.norm_sqr()).max(0.0).sqrt())
}

fn group_weight(instance: &HiddenShiftInstance, x_idx: usize) -> f64 {
    let good = instance.f().scalar_at(x_idx) / instance.profile().big_r;
    (1.0 - good.norm_sqr()).max(0.0).sqrt()
}

/// Computes `h_s`, its transform, and `Z_s` for the given phases.
pub fn hs_data(instance: &HiddenShiftInstance, phases: &PhaseAssignment) -> Result<HsData> {
    check_one_register_instance(instance)?;
    let group = instance.group();
    let n = group.order();
    let s = instance.shift_s();
    let mut table = Vec::with_capacity(n);
    for idx in 0..n {
        let x = group.element_at(idx);
        let xs = group.index_of(&group.add(&x, s));
        table.push(Complex64::from_polar(group_weight(instance, idx), phases.theta[xs]));
    }
    let hs = VectorFn::scalar(group.clone(), table)?;
    let hshat = fourier(&hs);
    let mut zs = Complex64::default();
    for phi_idx in 0..n {
        let w = dual_weight(instance, phi_idx)?;
        zs += Complex64::from_polar(1.0, -phases.chi[phi_idx]) * w * hshat.scalar_at(phi_idx);
    }
    zs /= n as f64;
    Ok(HsData { hs, hshat, zs })
}

/// The closed-form success probability, evaluated as the explicit double sum:
/// `|rhat/R + |G|^{-3/2} sum_x sum_phi phi(x) e^{i theta(x+s)}
/// sqrt(1-|f(x)/R|^2) e^{-i chi(phi)} sqrt(1-|rhat/f_hat(phi)|^2)|^2`.
pub fn prob_formula_one_register(
    instance: &HiddenShiftInstance,
    phases: &PhaseAssignment,
) -> Result<f64> {
    check_one_register_instance(instance)?;
    let group = instance.group();
    let n = group.order();
    let p = instance.profile();
    let s = instance.shift_s();
    let mut weights = Vec::with_capacity(n);
    for phi_idx in 0..n {
        weights.push(
            Complex64::from_polar(1.0, -phases.chi[phi_idx]) * dual_weight(instance, phi_idx)?,
        );
    }
    let mut sum = Complex64::default();
    for x_idx in 0..n {
        let x = group.element_at(x_idx);
        let xs = group.index_of(&group.add(&x, s));
        let hx = Complex64::from_polar(group_weight(instance, x_idx), phases.theta[xs]);
        for phi_idx in 0..n {
            let phi_x = char_eval_unchecked(group, &group.character_at(phi_idx), &x);
            sum += phi_x * hx * weights[phi_idx];
        }
    }
    let amp = Complex64::new(p.rhat / p.big_r, 0.0) + sum / (n as f64).powf(1.5);
    Ok(amp.norm_sqr())
}

/// Runs `(F^dag x I) U_{1/f_hat} (F x I) U_g` on the uniform superposition and
/// reports `P(x, ancilla = 0)`.
pub fn run_one_register(
    instance: &HiddenShiftInstance,
    phases: &PhaseAssignment,
    cfg: RunConfig,
) -> Result<RunReport> {
    check_one_register_instance(instance)?;
    let group = instance.group().clone();
    let n = group.order();
    let p = instance.profile();
    let big_r = p.big_r;
    let rhat = p.rhat;
    // oracle guards: every |g| <= R and |f_hat| >= rhat, as encoded
    for idx in 0..n {
        if instance.g().norm_at(idx) > big_r + 1e-9 {
            return Err(Error::Encoding(format!("|g| exceeds R at index {idx}")));
        }
        dual_weight(instance, idx)?;
        if instance.fhat().norm_at(idx) < rhat - 1e-9 {
            return Err(Error::Encoding(format!("|f_hat| below rhat at index {idx}")));
        }
    }
    let regs = vec![
        Register { kind: RegisterKind::Group, dim: n },
        Register { kind: RegisterKind::Ancilla, dim: 2 },
    ];
    let mut st = SimState::new_uniform(group.clone(), regs, ValueAlphabet::empty())?;
    st.apply_group_keyed(1, |x| {
        let good = instance.g().scalar_at(x) / big_r;
        let bad = (1.0 - good.norm_sqr()).max(0.0).sqrt();
        let col = [good, Complex64::from_polar(bad, phases.theta[x])];
        Ok(complete_column(&col, cfg.completion))
    })?;
    st.apply_fourier_reg()?;
    st.apply_group_keyed(1, |phi| {
        let fhat = instance.fhat().scalar_at(phi);
        let good = rhat / fhat;
        let bad = (1.0 - good.norm_sqr()).max(0.0).sqrt();
        let row = [good, Complex64::from_polar(bad, -phases.chi[phi])];
        Ok(complete_row(&row, cfg.completion))
    })?;
    st.apply_inverse_fourier_reg()?;
    let dist = st.group_distribution_with(&[(1, 0)]);
    let s_idx = group.index_of(instance.shift_s());
    Ok(RunReport {
        algorithm: AlgorithmId::OneRegister,
        formula_prob: prob_formula_one_register(instance, phases)?,
        sim_prob: dist[s_idx],
        sim_distribution: dist,
        postselect_probs: vec![],
        g_calls: 2,
        fhat_calls: 2,
        failed_certain: false,
    })
}

/// Outcome of a certainty check with the first failing condition as witness.
#[derive(Debug, Clone)]
pub struct CertaintyVerdict {
    pub certain: bool,
    pub witness: Option<String>,
}

/// `p(s) = 1` iff `rhat = R`, or `rhat < R` together with `|f_hat| = sqrt(rhat R)`
/// everywhere and `h_hat_s(phi) = e^{i chi(phi)} sqrt(1 - rhat/R)` everywhere.
pub fn certainty_conditions(
    instance: &HiddenShiftInstance,
    phases: &PhaseAssignment,
) -> Result<CertaintyVerdict> {
    check_one_register_instance(instance)?;
    let p = instance.profile();
    let tol = 1e-9;
    if (p.rhat - p.big_r).abs() <= tol {
        return Ok(CertaintyVerdict { certain: true, witness: None });
    }
    let n = instance.group().order();
    let target_mod = (p.rhat * p.big_r).sqrt();
    for phi_idx in 0..n {
        if (instance.fhat().norm_at(phi_idx) - target_mod).abs() > tol {
            return Ok(CertaintyVerdict {
                certain: false,
                witness: Some(format!(
                    "|f_hat| at dual index {phi_idx} is {}, not sqrt(rhat R) = {target_mod}",
                    instance.fhat().norm_at(phi_idx)
                )),
            });
        }
    }
    let data = hs_data(instance, phases)?;
    let target = (1.0 - p.rhat / p.big_r).sqrt();
    for phi_idx in 0..n {
        let expect = Complex64::from_polar(target, phases.chi[phi_idx]);
        if (data.hshat.scalar_at(phi_idx) - expect).norm() > tol {
            return Ok(CertaintyVerdict {
                certain: false,
                witness: Some(format!(
                    "h_hat_s at dual index {phi_idx} is {}, expected {expect}",
                    data.hshat.scalar_at(phi_idx)
                )),
            });
        }
    }
    Ok(CertaintyVerdict { certain: true, witness: None })
}

/// Witness for all-shift certainty: the special point and the constant phase.
#[derive(Debug, Clone)]
pub struct AllShiftVerdict {
    pub certain: bool,
    pub x0: Option<GroupElement>,
    pub alpha: Option<f64>,
    pub witness: Option<String>,
}

/// `p(s) = 1` for every `s` iff `rhat = R`, or the flat-spectrum single-dip
/// shape holds: `|f_hat| = sqrt(rhat R)` everywhere, `|f(x)| = R` off one point
/// `x0` where `|f(x0)| = R sqrt(1 - |G|(1 - rhat/R))`, `theta` constant `alpha`,
/// and `chi(phi) = alpha + arg(phi(x0))`.
pub fn all_shift_certainty(
    instance: &HiddenShiftInstance,
    phases: &PhaseAssignment,
) -> Result<AllShiftVerdict> {
    check_one_register_instance(instance)?;
    let p = instance.profile();
    let tol = 1e-9;
    if (p.rhat - p.big_r).abs() <= tol {
        return Ok(AllShiftVerdict { certain: true, x0: None, alpha: None, witness: None });
    }
    let group = instance.group();
    let n = group.order();
    let ratio = p.rhat / p.big_r;
    let fail = |msg: String| AllShiftVerdict { certain: false, x0: None, alpha: None, witness: Some(msg) };
    if !(1.0 - 1.0 / n as f64 - tol <= ratio && ratio < 1.0) {
        return Ok(fail(format!("rhat/R = {ratio} outside [1 - 1/|G|, 1)")));
    }
    let target_mod = (p.rhat * p.big_r).sqrt();
    for phi_idx in 0..n {
        if (instance.fhat().norm_at(phi_idx) - target_mod).abs() > tol {
            return Ok(fail(format!("|f_hat| not flat at sqrt(rhat R) (dual index {phi_idx})")));
        }
    }
    // theta must be constant
    let alpha = phases.theta[0];
    for (idx, &t) in phases.theta.iter().enumerate() {
        if (Complex64::from_polar(1.0, t) - Complex64::from_polar(1.0, alpha)).norm() > tol {
            return Ok(fail(format!("theta is not constant (index {idx})")));
        }
    }
    let dip = p.big_r * (1.0 - n as f64 * (1.0 - ratio)).max(0.0).sqrt();
    // locate x0 as the unique point off the plateau |f| = R
    let mut x0 = None;
    for idx in 0..n {
        let nm = instance.f().norm_at(idx);
        if (nm - p.big_r).abs() <= tol {
            continue;
        }
        if (nm - dip).abs() <= tol && x0.is_none() {
            x0 = Some(idx);
        } else {
            return Ok(fail(format!("|f| at index {idx} is {nm}, neither R nor the dip value {dip}")));
        }
    }
    let x0_idx = match x0 {
        Some(i) => i,
        // |f| = R everywhere forces rhat = R via Parseval, contradicting ratio < 1
        None => return Ok(fail("no dip point x0 found while rhat < R".into())),
    };
    let x0_el = group.element_at(x0_idx);
    for phi_idx in 0..n {
        let phi_x0 = char_eval_unchecked(group, &group.character_at(phi_idx), &x0_el);
        let expect = alpha + phi_x0.arg();
        let got = phases.chi[phi_idx];
        if (Complex64::from_polar(1.0, got) - Complex64::from_polar(1.0, expect)).norm() > tol {
            return Ok(fail(format!("chi at dual index {phi_idx} differs from alpha + arg(phi(x0))")));
        }
    }
    Ok(AllShiftVerdict { certain: true, x0: Some(x0_el), alpha: Some(alpha), witness: None })
}

/// With `theta = 0`, the optimal `chi` is `arg(h_hat(phi))` (0 where `h_hat`
/// vanishes), achieving
/// `p = (rhat/R + |G|^{-1} sum_phi sqrt(1-|rhat/f_hat|^2) |h_hat(phi)|)^2`,
/// independent of the shift.
pub fn optimal_chi_theta0(instance: &HiddenShiftInstance) -> Result<(Vec<f64>, f64)> {
    check_one_register_instance(instance)?;
    let group = instance.group();
    let n = group.order();
    let p = instance.profile();
    let h: Vec<Complex64> =
        (0..n).map(|idx| Complex64::new(group_weight(instance, idx), 0.0)).collect();
    let hhat = fourier(&VectorFn::scalar(group.clone(), h)?);
    let mut chi = Vec::with_capacity(n);
    let mut gain = 0.0;
    for phi_idx in 0..n {
        let hh = hhat.scalar_at(phi_idx);
        chi.push(if hh.norm() > 1e-12 { hh.arg().rem_euclid(TAU) } else { 0.0 });
        gain += dual_weight(instance, phi_idx)? * hh.norm();
    }
    let prob = (p.rhat / p.big_r + gain / n as f64).powi(2);
    Ok((chi, prob))
}

/// Closed form for the expected success probability when the `chi` values are
/// i.i.d. uniform on `[0, 2pi)` and `theta = 0`.
pub fn expected_prob_random_chi(instance: &HiddenShiftInstance) -> Result<f64> {
    check_one_register_instance(instance)?;
    let group = instance.group();
    let n = group.order();
    let p = instance.profile();
    let h: Vec<Complex64> =
        (0..n).map(|idx| Complex64::new(group_weight(instance, idx), 0.0)).collect();
    let hhat = fourier(&VectorFn::scalar(group.clone(), h)?);
    let mut acc = 0.0;
    for phi_idx in 0..n {
        let w = dual_weight(instance, phi_idx)?;
        acc += w * w * hhat.scalar_at(phi_idx).norm_sqr();
    }
    Ok((p.rhat / p.big_r).powi(2) + acc / (n as f64).powi(2))
}

/// Closed form when both phase functions are i.i.d. uniform on `[0, 2pi)`.
pub fn expected_prob_random_both(instance: &HiddenShiftInstance) -> Result<f64> {
    check_one_register_instance(instance)?;
    let n = instance.group().order();
    let p = instance.profile();
    let mut dual_acc = 0.0;
    for phi_idx in 0..n {
        let w = dual_weight(instance, phi_idx)?;
        dual_acc += w * w;
    }
    let mut group_acc = 0.0;
    for x_idx in 0..n {
        let w = group_weight(instance, x_idx);
        group_acc += w * w;
    }
    Ok((p.rhat / p.big_r).powi(2) + dual_acc * group_acc / (n as f64).powi(3))
}

/// Seeded Monte Carlo estimate (mean, standard error) of the success
/// probability over uniform random `chi` with `theta = 0`.
pub fn monte_carlo_random_chi(
    instance: &HiddenShiftInstance,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    check_one_register_instance(instance)?;
    let n = instance.group().order();
    let p = instance.profile();
    let zero = PhaseAssignment::zero(instance.group());
    let data = hs_data(instance, &zero)?;
    let mut weighted = Vec::with_capacity(n);
    for phi_idx in 0..n {
        weighted.push(dual_weight(instance, phi_idx)? * data.hshat.scalar_at(phi_idx));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = p.rhat / p.big_r;
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for i in 0..samples {
        let mut z = Complex64::default();
        for w in &weighted {
            z += Complex64::from_polar(1.0, -rng.gen_range(0.0..TAU)) * w;
        }
        let value = (Complex64::new(base, 0.0) + z / n as f64).norm_sqr();
        let delta = value - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (value - mean);
    }
    let var = m2 / (samples as f64 - 1.0);
    Ok((mean, (var / samples as f64).sqrt()))
}

/// Seeded Monte Carlo estimate over uniform random `theta` and `chi`.
pub fn monte_carlo_random_both(
    instance: &HiddenShiftInstance,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    check_one_register_instance(instance)?;
    let group = instance.group();
    let n = group.order();
    let p = instance.profile();
    let mut weights = Vec::with_capacity(n);
    for phi_idx in 0..n {
        weights.push(dual_weight(instance, phi_idx)?);
    }
    let h: Vec<f64> = (0..n).map(|idx| group_weight(instance, idx)).collect();
    let s = instance.shift_s().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = p.rhat / p.big_r;
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for i in 0..samples {
        let theta: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..TAU)).collect();
        let chi: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..TAU)).collect();
        let hs: Vec<Complex64> = (0..n)
            .map(|idx| {
                let x = group.element_at(idx);
                let xs = group.index_of(&group.add(&x, &s));
                Complex64::from_polar(h[idx], theta[xs])
            })
            .collect();
        let hshat = fourier(&VectorFn::scalar(group.clone(), hs)?);
        let mut z = Complex64::default();
        for phi_idx in 0..n {
            z += Complex64::from_polar(1.0, -chi[phi_idx])
                * weights[phi_idx]
                * hshat.scalar_at(phi_idx);
        }
        let value = (Complex64::new(base, 0.0) + z / n as f64).norm_sqr();
        let delta = value - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (value - mean);
    }
    let var = m2 / (samples as f64 - 1.0);
    Ok((mean, (var / samples as f64).sqrt()))
}

/// The flat-spectrum families attaining all-shift certainty.
///
/// For `|eta| = 1`: on `Z/2Z` (requires `Re eta <= 0`) the pair
/// `f = ((1+eta)/sqrt2, (1-eta)/sqrt2)` with `f_hat = (1, eta)`; on `Z/3Z` the
/// pair `f = ((1+2eta)/sqrt3, (1-eta)/sqrt3, (1-eta)/sqrt3)` with
/// `f_hat = (1, eta, eta)`. In both cases `R = 1/rhat = |1-eta|/sqrt(n)` and the
/// dip point is `x0 = 0`. On `Z/3Z` the boundedness conditions force
/// `Re eta <= -1/2` (so that `|f(0)| <= R`); values outside that range are
/// rejected.
pub fn eta_family(n: u64, eta: Complex64) -> Result<(VectorFn, f64, f64)> {
    if (eta.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::Precondition("eta must lie on the unit circle".into()));
    }
    let one = Complex64::new(1.0, 0.0);
    // R is the plateau height |f(x)| off the dip point; nudging it a couple of
    // ulps below the tabulated maximum makes the plateau radicands
    // 1 - |f(x)/R|^2 come out non-positive, so the clamp yields h(x) = 0
    // exactly and the theorem's flatness conditions survive float evaluation.
    let plateau = |f: &VectorFn| f.max_norm() * (1.0 - 5e-16);
    match n {
        2 => {
            if eta.re > 1e-12 {
                return Err(Error::Precondition("the Z/2 family needs Re(eta) <= 0".into()));
            }
            let s = 2.0f64.sqrt();
            let f = VectorFn::scalar(
                GroupSpec::cyclic(2),
                vec![(one + eta) / s, (one - eta) / s],
            )?;
            let big_r = plateau(&f);
            Ok((f, big_r, 1.0 / big_r))
        }
        3 => {
            if eta.re > -0.5 + 1e-12 {
                return Err(Error::Precondition(
                    "the Z/3 family needs Re(eta) <= -1/2 for |f(0)| <= R".into(),
                ));
            }
            let s = 3.0f64.sqrt();
            let f = VectorFn::scalar(
                GroupSpec::cyclic(3),
                vec![(one + eta * 2.0) / s, (one - eta) / s, (one - eta) / s],
            )?;
            let big_r = plateau(&f);
            Ok((f, big_r, 1.0 / big_r))
        }
        _ => Err(Error::Input("eta families are defined for n = 2 and n = 3".into())),
    }
}

/// The theorem's phase choice for an eta-family instance: constant `theta = 0`
/// and `chi(phi) = arg(phi(x0))` with `x0 = 0`, so `chi = 0` identically.
pub fn eta_family_phases(group: &GroupSpec) -> PhaseAssignment {
    PhaseAssignment::zero(group)
}
