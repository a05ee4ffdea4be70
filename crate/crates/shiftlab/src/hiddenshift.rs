//! The hidden-shift algorithms: classical exact, exact bent, approximate bounded,
//! subset/post-selected, mirrored, multidimensional exact and approximate, and
//! amplitude amplification.
//!
//! Every quantum variant has two routes to a success probability: the closed-form
//! expression and a statevector simulation of the circuit. Reports carry both so
//! tests can assert they agree. The algorithms consume only the oracle views
//! (`g` and `f_hat`); the instance carries the ground-truth shift solely so
//! reports can look up the success entry.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::abelian::{char_eval_unchecked, fourier, GroupElement, GroupSpec};
use crate::gfunc::{extract_bounds, is_bent, shift, BoundProfile, Side, VectorFn, BENT_TOL};
use crate::statevec::lazy::LazyState;
use crate::statevec::{CompletionStyle, Register, RegisterKind, SimState, ValueAlphabet};
use crate::{Error, Result};

/// A hidden-shift problem instance: the reference function, the ground-truth
/// shift, the shifted oracle view, and a boundedness profile.
#[derive(Debug, Clone)]
pub struct HiddenShiftInstance {
    f: VectorFn,
    s: GroupElement,
    g: VectorFn,
    fhat: VectorFn,
    profile: BoundProfile,
}

impl HiddenShiftInstance {
    /// Builds an instance with the maximal witness sets for the given window
    /// `(r, R, rhat, Rhat)`.
    pub fn new(f: VectorFn, s: GroupElement, window: (f64, f64, f64, f64)) -> Result<Self> {
        if f.side() != Side::Group {
            return Err(Error::GroupMismatch("instance function must live on G".into()));
        }
        let profile = extract_bounds(&f, window.0, window.1, window.2, window.3)?;
        let g = shift(&f, &s)?;
        let fhat = fourier(&f);
        let s = f.group().element(&s.coords)?;
        Ok(HiddenShiftInstance { f, s, g, fhat, profile })
    }

    /// The tight full-window profile: `r = 0`, `R = max ||f||`, `rhat = min ||f_hat||`,
    /// `Rhat = infinity`, so `alpha = alphahat = 1`.
    pub fn with_full_windows(f: VectorFn, s: GroupElement) -> Result<Self> {
        let big_r = f.max_norm();
        let rhat = fourier(&f).min_norm();
        HiddenShiftInstance::new(f, s, (0.0, big_r, rhat, f64::INFINITY))
    }

    pub fn group(&self) -> &GroupSpec {
        self.f.group()
    }

    /// Ground truth; only report builders and formula paths may use this.
    pub fn shift_s(&self) -> &GroupElement {
        &self.s
    }

    /// Ground truth reference function (formula paths and verification only).
    pub fn f(&self) -> &VectorFn {
        &self.f
    }

    /// Oracle view of the shifted function.
    pub fn g(&self) -> &VectorFn {
        &self.g
    }

    /// Oracle view of the Fourier transform of `f`.
    pub fn fhat(&self) -> &VectorFn {
        &self.fhat
    }

    pub fn profile(&self) -> &BoundProfile {
        &self.profile
    }

    pub fn dim(&self) -> usize {
        self.f.dim()
    }

    /// Membership mask of `A + s` (the set the g-oracle's indicator flags).
    pub fn member_g(&self) -> Vec<bool> {
        let g = self.group();
        (0..g.order())
            .map(|idx| {
                let x = g.element_at(idx);
                self.profile.a_mask[g.index_of(&g.sub(&x, &self.s))]
            })
            .collect()
    }

    pub fn member_fhat(&self) -> Vec<bool> {
        self.profile.ahat_mask.clone()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgorithmId {
    Classical,
    ExactBent,
    ApproxBounded,
    ApproxSubset,
    Mirrored,
    ExactMultidim,
    ApproxMultidim,
    OneRegister,
}

impl AlgorithmId {
    pub const ALL: [AlgorithmId; 8] = [
        AlgorithmId::Classical,
        AlgorithmId::ExactBent,
        AlgorithmId::ApproxBounded,
        AlgorithmId::ApproxSubset,
        AlgorithmId::Mirrored,
        AlgorithmId::ExactMultidim,
        AlgorithmId::ApproxMultidim,
        AlgorithmId::OneRegister,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            AlgorithmId::Classical => "classical",
            AlgorithmId::ExactBent => "exact-bent",
            AlgorithmId::ApproxBounded => "approx-bounded",
            AlgorithmId::ApproxSubset => "approx-subset",
            AlgorithmId::Mirrored => "mirrored",
            AlgorithmId::ExactMultidim => "exact-multidim",
            AlgorithmId::ApproxMultidim => "approx-multidim",
            AlgorithmId::OneRegister => "one-register",
        }
    }
}

impl fmt::Display for AlgorithmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AlgorithmId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AlgorithmId::ALL
            .iter()
            .find(|a| a.name() == s)
            .copied()
            .ok_or_else(|| Error::Input(format!("unknown algorithm id '{s}'")))
    }
}

/// Simulation backend selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    /// Full product state including the value register; the oracle of record.
    #[default]
    Dense,
    /// Value register kept implicit; fast path for larger groups.
    Lazy,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunConfig {
    pub backend: Backend,
    pub completion: CompletionStyle,
    /// When set, the amplitude encoders read polar-quantized oracle tables with
    /// `delta = 2^-bits` (the finite-precision oracle error model).
    pub quant_bits: Option<u32>,
}

/// Per-algorithm outcome: the closed-form probability, the simulated one, the
/// joint success distribution, the post-selection record, and query counts.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub algorithm: AlgorithmId,
    pub formula_prob: f64,
    pub sim_prob: f64,
    /// `P(measure x AND all success flags)` per group element, lexicographic.
    /// The missing mass is the FAIL probability.
    pub sim_distribution: Vec<f64>,
    pub postselect_probs: Vec<f64>,
    pub g_calls: usize,
    pub fhat_calls: usize,
    /// Set when a post-selection had probability zero (FAIL with certainty).
    pub failed_certain: bool,
}

impl RunReport {
    pub fn distribution_pairs(&self, group: &GroupSpec) -> Vec<(GroupElement, f64)> {
        self.sim_distribution.iter().enumerate().map(|(i, &p)| (group.element_at(i), p)).collect()
    }

    /// The element the run identifies: argmax of the success distribution.
    pub fn recovered(&self, group: &GroupSpec) -> GroupElement {
        let idx = self
            .sim_distribution
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(i, _)| i)
            .unwrap_or(0);
        group.element_at(idx)
    }
}

/// Outcome of the classical algorithm.
#[derive(Debug, Clone)]
pub struct ClassicalReport {
    pub recovered: GroupElement,
    pub g_calls: usize,
    pub fhat_calls: usize,
}

/// Queries `g` on all of `G`, computes `g_hat` at each generator character, and
/// reads the shift off `phi_j(s) = g_hat(phi_j) / f_hat(phi_j)` coordinate-wise.
pub fn classical_exact(instance: &HiddenShiftInstance) -> Result<ClassicalReport> {
    if instance.dim() != 1 {
        return Err(Error::Precondition("classical recovery is defined for scalar f".into()));
    }
    let group = instance.group().clone();
    let n = group.order();
    // Step 1: query g everywhere (|G| oracle calls).
    let g_values: Vec<Complex64> = (0..n).map(|i| instance.g().scalar_at(i)).collect();
    let scale = 1.0 / (n as f64).sqrt();
    let mut coords = Vec::with_capacity(group.num_factors());
    for j in 0..group.num_factors() {
        let chi = group.generator_character(j);
        let mut ghat = Complex64::default();
        for (idx, gv) in g_values.iter().enumerate() {
            ghat += char_eval_unchecked(&group, &chi, &group.element_at(idx)) * gv;
        }
        ghat *= scale;
        // one f_hat query per factor
        let fhat_j = instance.fhat().scalar_at(group.index_of_character(&chi));
        if fhat_j.norm() < 1e-12 {
            return Err(Error::DivisionByZero(format!(
                "f_hat vanishes at generator character {j}"
            )));
        }
        let phi_s = ghat / fhat_j;
        let nj = group.moduli()[j] as f64;
        let t = nj * phi_s.arg() / (2.0 * std::f64::consts::PI);
        let k = t.round();
        if (t - k).abs() > 0.25 {
            return Err(Error::Ambiguous(format!(
                "recovered exponent {t} in factor {j} is not within 0.25 of an integer"
            )));
        }
        let nj = group.moduli()[j];
        coords.push(((k as i64).rem_euclid(nj as i64)) as u64);
    }
    Ok(ClassicalReport {
        recovered: group.element(&coords)?,
        g_calls: n,
        fhat_calls: group.num_factors(),
    })
}

/// The exact bent algorithm: `F^dag O~_{1/f_hat} F O~_g` applied to the uniform
/// superposition recovers the shift with certainty.
pub fn run_exact_bent(instance: &HiddenShiftInstance) -> Result<RunReport> {
    if instance.dim() != 1 {
        return Err(Error::Precondition("the phase-oracle algorithm needs d = 1".into()));
    }
    if !is_bent(instance.f(), BENT_TOL) {
        return Err(Error::Precondition("exact algorithm requires a bent function".into()));
    }
    let group = instance.group().clone();
    let n = group.order();
    let regs = vec![Register { kind: RegisterKind::Group, dim: n }];
    let mut st = SimState::new_uniform(group, regs, ValueAlphabet::empty())?;
    let g_phases: Vec<Complex64> = (0..n).map(|i| instance.g().scalar_at(i)).collect();
    st.apply_phase_oracle(&g_phases)?;
    st.apply_fourier_reg()?;
    let inv_fhat: Vec<Complex64> =
        (0..n).map(|i| Complex64::new(1.0, 0.0) / instance.fhat().scalar_at(i)).collect();
    st.apply_phase_oracle(&inv_fhat)?;
    st.apply_inverse_fourier_reg()?;
    let dist = st.measure_distribution(0);
    let s_idx = instance.group().index_of(instance.shift_s());
    Ok(RunReport {
        algorithm: AlgorithmId::ExactBent,
        formula_prob: 1.0,
        sim_prob: dist[s_idx],
        sim_distribution: dist,
        postselect_probs: vec![],
        g_calls: 1,
        fhat_calls: 1,
        failed_certain: false,
    })
}

enum SubsetEngine {
    Dense(SimState),
    Lazy(LazyState),
}

const ANC_A: usize = 3;
const ANC_B: usize = 4;

impl SubsetEngine {
    fn new(instance: &HiddenShiftInstance, backend: Backend) -> Result<Self> {
        let d = instance.dim();
        match backend {
            Backend::Dense => {
                let alphabet = ValueAlphabet::from_tables(&[instance.g(), instance.fhat()])?;
                let regs = vec![
                    Register { kind: RegisterKind::Group, dim: instance.group().order() },
                    Register { kind: RegisterKind::Indicator, dim: 2 },
                    Register { kind: RegisterKind::Value, dim: alphabet.register_dim() },
                    Register { kind: RegisterKind::Ancilla, dim: d + 1 },
                    Register { kind: RegisterKind::Ancilla, dim: 2 },
                ];
                Ok(SubsetEngine::Dense(SimState::new_uniform(instance.group().clone(), regs, alphabet)?))
            }
            Backend::Lazy => {
                Ok(SubsetEngine::Lazy(LazyState::new_uniform(instance.group().clone(), d, d + 1, 2)))
            }
        }
    }

    fn oracle(&mut self, table: &VectorFn, member: &[bool]) -> Result<()> {
        match self {
            SubsetEngine::Dense(st) => st.apply_oracle(table, member),
            SubsetEngine::Lazy(st) => st.apply_oracle(table, member),
        }
    }

    fn postselect_indicator(&mut self) -> f64 {
        match self {
            SubsetEngine::Dense(st) => st.postselect(1, 1),
            SubsetEngine::Lazy(st) => st.postselect_indicator(1),
        }
    }

    fn encoder_a(&mut self, enc: crate::statevec::Encoder, style: CompletionStyle) -> Result<()> {
        match self {
            SubsetEngine::Dense(st) => st.apply_encoder(ANC_A, enc, style),
            SubsetEngine::Lazy(st) => st.apply_encoder_a(enc, style),
        }
    }

    fn encoder_b(&mut self, enc: crate::statevec::Encoder, style: CompletionStyle) -> Result<()> {
        match self {
            SubsetEngine::Dense(st) => st.apply_encoder(ANC_B, enc, style),
            SubsetEngine::Lazy(st) => st.apply_encoder_b(enc, style),
        }
    }

    fn fourier(&mut self) -> Result<()> {
        match self {
            SubsetEngine::Dense(st) => st.apply_fourier_reg(),
            SubsetEngine::Lazy(st) => st.apply_fourier_reg(),
        }
    }

    fn inverse_fourier(&mut self) -> Result<()> {
        match self {
            SubsetEngine::Dense(st) => st.apply_inverse_fourier_reg(),
            SubsetEngine::Lazy(st) => st.apply_inverse_fourier_reg(),
        }
    }

    fn negate(&mut self) -> Result<()> {
        match self {
            SubsetEngine::Dense(st) => {
                st.apply_negate_reg();
                Ok(())
            }
            SubsetEngine::Lazy(st) => st.apply_negate_reg(),
        }
    }

    fn success_distribution(&self) -> Vec<f64> {
        match self {
            SubsetEngine::Dense(st) => st.group_distribution_with(&[(ANC_A, 0), (ANC_B, 0)]),
            SubsetEngine::Lazy(st) => st.group_distribution_with(0, 0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SubsetFlavor {
    /// The two-ancilla circuit with `U_1(w/R)` and scalar `U_2(rhat/conj(w))`.
    Standard,
    /// The mirrored circuit with `U_1(r/w)`, `U_2(conj(w)/Rhat)` and negations.
    Mirrored,
    /// The multidimensional circuit with `V_rot` and norm-based `U_2`.
    Multidim,
}

fn run_subset_circuit(
    instance: &HiddenShiftInstance,
    cfg: RunConfig,
    flavor: SubsetFlavor,
) -> Result<(Vec<f64>, Vec<f64>, bool)> {
    use crate::statevec::Encoder;
    let p = instance.profile();
    let member_g = instance.member_g();
    let member_fhat = instance.member_fhat();
    let mut eng = SubsetEngine::new(instance, cfg.backend)?;
    let mut posts = Vec::new();

    eng.oracle(instance.g(), &member_g)?;
    let p1 = eng.postselect_indicator();
    posts.push(p1);
    if p1 == 0.0 {
        return Ok((posts, vec![0.0; instance.group().order()], true));
    }
    let delta = cfg.quant_bits.map(|b| 0.5f64.powi(b as i32));
    match flavor {
        SubsetFlavor::Standard | SubsetFlavor::Multidim => {
            let enc = match delta {
                Some(delta) => Encoder::U1Quantized { big_r: p.big_r, delta },
                None => Encoder::U1 { big_r: p.big_r },
            };
            eng.encoder_a(enc, cfg.completion)?
        }
        SubsetFlavor::Mirrored => eng.encoder_a(Encoder::U1Mirror { r: p.r }, cfg.completion)?,
    }
    eng.oracle(instance.g(), &member_g)?;
    if flavor == SubsetFlavor::Mirrored {
        eng.negate()?;
    }
    eng.fourier()?;

    eng.oracle(instance.fhat(), &member_fhat)?;
    let p2 = eng.postselect_indicator();
    posts.push(p2);
    if p2 == 0.0 {
        return Ok((posts, vec![0.0; instance.group().order()], true));
    }
    match flavor {
        SubsetFlavor::Standard => {
            let enc = match delta {
                Some(delta) => Encoder::U2ScalarQuantized { rhat: p.rhat, delta },
                None => Encoder::U2Scalar { rhat: p.rhat },
            };
            eng.encoder_b(enc, cfg.completion)?
        }
        SubsetFlavor::Multidim => {
            eng.encoder_a(Encoder::Vrot, cfg.completion)?;
            eng.encoder_b(Encoder::U2Norm { rhat: p.rhat }, cfg.completion)?;
        }
        SubsetFlavor::Mirrored => {
            eng.encoder_b(Encoder::U2Mirror { big_rhat: p.big_rhat }, cfg.completion)?
        }
    }
    eng.oracle(instance.fhat(), &member_fhat)?;
    eng.inverse_fourier()?;
    if flavor == SubsetFlavor::Mirrored {
        eng.negate()?;
    }

    let post_product: f64 = posts.iter().product();
    let dist: Vec<f64> = eng.success_distribution().into_iter().map(|q| q * post_product).collect();
    Ok((posts, dist, false))
}

fn subset_report(
    instance: &HiddenShiftInstance,
    cfg: RunConfig,
    flavor: SubsetFlavor,
    algorithm: AlgorithmId,
    formula_prob: f64,
) -> Result<RunReport> {
    let (posts, dist, failed) = run_subset_circuit(instance, cfg, flavor)?;
    let s_idx = instance.group().index_of(instance.shift_s());
    Ok(RunReport {
        algorithm,
        formula_prob,
        sim_prob: dist[s_idx],
        sim_distribution: dist,
        postselect_probs: posts,
        g_calls: 2,
        fhat_calls: 2,
        failed_certain: failed,
    })
}

/// The two-ancilla algorithm for `(R, rhat)`-bounded functions; succeeds with
/// probability `(rhat / R)^2`.
pub fn run_approx_bounded(instance: &HiddenShiftInstance, cfg: RunConfig) -> Result<RunReport> {
    if instance.dim() != 1 {
        return Err(Error::Precondition("approx-bounded needs d = 1".into()));
    }
    if !instance.profile().full_windows() {
        return Err(Error::Precondition(
            "approx-bounded expects a full-window (R, rhat) profile with alpha = alphahat = 1".into(),
        ));
    }
    let p = instance.profile();
    let formula = (p.rhat / p.big_r).powi(2);
    subset_report(instance, cfg, SubsetFlavor::Standard, AlgorithmId::ApproxBounded, formula)
}

/// Evaluates the closed-form success probability of the subset algorithm:
/// `(rhat/R)^2 |alphahat - |G|^{-3/2} sum_{phi in Ahat} sum_{x not in A+s}
/// phi(x) conj(phi(s)) g(x) / f_hat(phi)|^2`.
pub fn prob_formula_subset(instance: &HiddenShiftInstance) -> Result<f64> {
    if instance.dim() != 1 {
        return Err(Error::Precondition("the scalar formula needs d = 1".into()));
    }
    let group = instance.group();
    let n = group.order();
    let p = instance.profile();
    let member_g = instance.member_g();
    let s = instance.shift_s();
    let mut sum = Complex64::default();
    for phi_idx in 0..n {
        if !p.ahat_mask[phi_idx] {
            continue;
        }
        let chi = group.character_at(phi_idx);
        let fhat_phi = instance.fhat().scalar_at(phi_idx);
        if fhat_phi.norm() < 1e-12 {
            return Err(Error::DivisionByZero(format!(
                "f_hat vanishes on the witness set at index {phi_idx}"
            )));
        }
        let phi_s_conj = char_eval_unchecked(group, &chi, s).conj();
        for x_idx in 0..n {
            if member_g[x_idx] {
                continue;
            }
            let phi_x = char_eval_unchecked(group, &chi, &group.element_at(x_idx));
            sum += phi_x * phi_s_conj * instance.g().scalar_at(x_idx) / fhat_phi;
        }
    }
    let inner = Complex64::new(p.alphahat(), 0.0) - sum / (n as f64).powf(1.5);
    Ok((p.rhat / p.big_r).powi(2) * inner.norm_sqr())
}

/// The post-selected subset algorithm. The report's overall success probability
/// (post-selection masses times conditional success) matches
/// [`prob_formula_subset`].
pub fn run_approx_subset(instance: &HiddenShiftInstance, cfg: RunConfig) -> Result<RunReport> {
    if instance.dim() != 1 {
        return Err(Error::Precondition("approx-subset needs d = 1; use approx-multidim".into()));
    }
    let formula = prob_formula_subset(instance)?;
    subset_report(instance, cfg, SubsetFlavor::Standard, AlgorithmId::ApproxSubset, formula)
}

/// Closed form for the mirrored algorithm:
/// `(r/Rhat)^2 |alpha - |G|^{-3/2} sum_{phi not in Ahat} sum_{-x in A+s}
/// phi(x) conj(phi(-s)) f_hat(phi) / g(-x)|^2`.
pub fn prob_formula_mirrored(instance: &HiddenShiftInstance) -> Result<f64> {
    if instance.dim() != 1 {
        return Err(Error::Precondition("the mirrored formula needs d = 1".into()));
    }
    let group = instance.group();
    let n = group.order();
    let p = instance.profile();
    if !p.big_rhat.is_finite() {
        return Err(Error::Precondition("mirrored algorithm needs a finite Rhat".into()));
    }
    if p.r <= 0.0 {
        return Err(Error::Precondition("mirrored algorithm needs r > 0".into()));
    }
    let member_g = instance.member_g();
    let neg_s = group.neg(instance.shift_s());
    let mut sum = Complex64::default();
    for phi_idx in 0..n {
        if p.ahat_mask[phi_idx] {
            continue;
        }
        let chi = group.character_at(phi_idx);
        let fhat_phi = instance.fhat().scalar_at(phi_idx);
        let phi_negs_conj = char_eval_unchecked(group, &chi, &neg_s).conj();
        for x_idx in 0..n {
            let x = group.element_at(x_idx);
            let neg_x_idx = group.index_of(&group.neg(&x));
            if !member_g[neg_x_idx] {
                continue;
            }
            let g_neg_x = instance.g().scalar_at(neg_x_idx);
            if g_neg_x.norm() < 1e-12 {
                return Err(Error::DivisionByZero(format!(
                    "g vanishes on -(A+s) at index {neg_x_idx}"
                )));
            }
            let phi_x = char_eval_unchecked(group, &chi, &x);
            sum += phi_x * phi_negs_conj * fhat_phi / g_neg_x;
        }
    }
    let inner = Complex64::new(p.alpha(), 0.0) - sum / (n as f64).powf(1.5);
    Ok((p.r / p.big_rhat).powi(2) * inner.norm_sqr())
}

/// The mirrored subset algorithm: `U_1` encodes `r / g`, `U_2` encodes
/// `conj(w) / Rhat`, and the negation `U_- |x> = |-x>` is applied once the value
/// register is uncomputed and again before the final measurement.
pub fn run_mirrored_subset(instance: &HiddenShiftInstance, cfg: RunConfig) -> Result<RunReport> {
    let formula = prob_formula_mirrored(instance)?;
    subset_report(instance, cfg, SubsetFlavor::Mirrored, AlgorithmId::Mirrored, formula)
}

/// Which reading of the multidimensional success formula to evaluate. The
/// theorem statement and its proof disagree; the dense simulation arbitrates
/// (it matches [`MultidimVariant::Proof`]), and tests pin that choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MultidimVariant {
    /// As printed in the theorem statement: no `conj(phi(s))` factor and a
    /// single power of `||f_hat(phi)||` in the denominator.
    Statement,
    /// As derived in the proof: `conj(phi(s))` present and `||f_hat(phi)||^2`.
    Proof,
}

/// Closed form for the multidimensional subset algorithm under either reading.
pub fn prob_formula_multidim(instance: &HiddenShiftInstance, variant: MultidimVariant) -> Result<f64> {
    let group = instance.group();
    let n = group.order();
    let d = instance.dim();
    let p = instance.profile();
    let member_g = instance.member_g();
    let s = instance.shift_s();
    let mut sum = Complex64::default();
    for phi_idx in 0..n {
        if !p.ahat_mask[phi_idx] {
            continue;
        }
        let chi = group.character_at(phi_idx);
        let fhat_phi = instance.fhat().value_at(phi_idx);
        let norm = instance.fhat().norm_at(phi_idx);
        if norm < 1e-12 {
            return Err(Error::DivisionByZero(format!(
                "f_hat vanishes on the witness set at index {phi_idx}"
            )));
        }
        let phi_s_conj = char_eval_unchecked(group, &chi, s).conj();
        for x_idx in 0..n {
            if member_g[x_idx] {
                continue;
            }
            let gx = instance.g().value_at(x_idx);
            let mut inner = Complex64::default();
            for i in 0..d {
                inner += gx[i] * fhat_phi[i].conj();
            }
            let phi_x = char_eval_unchecked(group, &chi, &group.element_at(x_idx));
            sum += match variant {
                MultidimVariant::Statement => phi_x * inner / norm,
                MultidimVariant::Proof => phi_x * phi_s_conj * inner / (norm * norm),
            };
        }
    }
    let inner = Complex64::new(p.alphahat(), 0.0) - sum / (n as f64).powf(1.5);
    Ok((p.rhat / p.big_r).powi(2) * inner.norm_sqr())
}

/// The exact multidimensional algorithm
/// `(F^dag x I) O~_{f_hat}^dag (F x I) O~_g` for multidimensional bent `f`; the
/// value rotations are realized by two calls to the underlying oracle each.
pub fn run_exact_multidim(instance: &HiddenShiftInstance, cfg: RunConfig) -> Result<RunReport> {
    if !is_bent(instance.f(), BENT_TOL) {
        return Err(Error::Precondition("exact algorithm requires a multidimensional bent function".into()));
    }
    use crate::statevec::Encoder;
    let d = instance.dim();
    let group = instance.group().clone();
    let n = group.order();
    let none = vec![false; n];
    let dist = match cfg.backend {
        Backend::Dense => {
            let alphabet = ValueAlphabet::from_tables(&[instance.g(), instance.fhat()])?;
            let regs = vec![
                Register { kind: RegisterKind::Group, dim: n },
                Register { kind: RegisterKind::Value, dim: alphabet.register_dim() },
                Register { kind: RegisterKind::Ancilla, dim: d },
            ];
            let mut st = SimState::new_uniform(group.clone(), regs, alphabet)?;
            st.apply_oracle(instance.g(), &none)?;
            st.apply_value_rotation(2, false, cfg.completion)?;
            st.apply_oracle(instance.g(), &none)?;
            st.apply_fourier_reg()?;
            st.apply_oracle(instance.fhat(), &none)?;
            st.apply_value_rotation(2, true, cfg.completion)?;
            st.apply_oracle(instance.fhat(), &none)?;
            st.apply_inverse_fourier_reg()?;
            st.group_distribution_with(&[(2, 0)])
        }
        Backend::Lazy => {
            let mut st = LazyState::new_uniform(group.clone(), d, d, 1);
            st.apply_oracle(instance.g(), &none)?;
            st.apply_encoder_a(Encoder::ValueRotation { adjoint: false }, cfg.completion)?;
            st.apply_oracle(instance.g(), &none)?;
            st.apply_fourier_reg()?;
            st.apply_oracle(instance.fhat(), &none)?;
            st.apply_encoder_a(Encoder::ValueRotation { adjoint: true }, cfg.completion)?;
            st.apply_oracle(instance.fhat(), &none)?;
            st.apply_inverse_fourier_reg()?;
            st.group_distribution_with(0, 0)
        }
    };
    let s_idx = group.index_of(instance.shift_s());
    Ok(RunReport {
        algorithm: AlgorithmId::ExactMultidim,
        formula_prob: 1.0,
        sim_prob: dist[s_idx],
        sim_distribution: dist,
        postselect_probs: vec![],
        g_calls: 2,
        fhat_calls: 2,
        failed_certain: false,
    })
}

/// The approximate multidimensional algorithm (valid for any `d >= 1`). The
/// formula column of the report evaluates the proof reading of the success
/// probability, which the dense simulation matches.
pub fn run_approx_multidim(instance: &HiddenShiftInstance, cfg: RunConfig) -> Result<RunReport> {
    let formula = prob_formula_multidim(instance, MultidimVariant::Proof)?;
    subset_report(instance, cfg, SubsetFlavor::Multidim, AlgorithmId::ApproxMultidim, formula)
}

/// A circuit captured as an explicit unitary over a register layout, for
/// amplitude amplification (which needs the adjoint).
pub struct DenseCircuit {
    pub regs: Vec<Register>,
    pub group: GroupSpec,
    dim: usize,
    /// Row-major `dim x dim` unitary.
    matrix: Vec<Complex64>,
    /// Basis states counted as "good": check qubits 1, final ancillas 0.
    good: Vec<bool>,
}

impl DenseCircuit {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn good_mask(&self) -> &[bool] {
        &self.good
    }

    fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim;
        let mut out = vec![Complex64::default(); n];
        for r in 0..n {
            let mut acc = Complex64::default();
            for c in 0..n {
                acc += self.matrix[r * n + c] * v[c];
            }
            out[r] = acc;
        }
        out
    }

    fn apply_adjoint(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim;
        let mut out = vec![Complex64::default(); n];
        for r in 0..n {
            let mut acc = Complex64::default();
            for c in 0..n {
                acc += self.matrix[c * n + r].conj() * v[c];
            }
            out[r] = acc;
        }
        out
    }
}

/// Builds the amplification-ready variant of the subset circuit: the indicator
/// checks are copied to separate qubits instead of being measured, so the whole
/// algorithm is one unitary. Good states have both checks at 1 and both
/// encoding ancillas at 0.
pub fn build_adapted_subset_circuit(
    instance: &HiddenShiftInstance,
    cfg: RunConfig,
) -> Result<DenseCircuit> {
    use crate::statevec::Encoder;
    let d = instance.dim();
    let alphabet = ValueAlphabet::from_tables(&[instance.g(), instance.fhat()])?;
    let regs = vec![
        Register { kind: RegisterKind::Group, dim: instance.group().order() },
        Register { kind: RegisterKind::Indicator, dim: 2 },
        Register { kind: RegisterKind::Value, dim: alphabet.register_dim() },
        Register { kind: RegisterKind::Ancilla, dim: d + 1 },
        Register { kind: RegisterKind::Ancilla, dim: 2 },
        Register { kind: RegisterKind::Ancilla, dim: 2 }, // check: x in A+s
        Register { kind: RegisterKind::Ancilla, dim: 2 }, // check: phi in Ahat
    ];
    let member_g = instance.member_g();
    let member_fhat = instance.member_fhat();
    let p = instance.profile();
    let run = |st: &mut SimState| -> Result<()> {
        // the algorithm's step 1 (uniform superposition) is part of the unitary
        st.apply_uniform_prep();
        st.apply_oracle(instance.g(), &member_g)?;
        st.apply_cnot(1, 5)?;
        st.apply_encoder_lenient(ANC_A, Encoder::U1 { big_r: p.big_r }, cfg.completion)?;
        st.apply_oracle(instance.g(), &member_g)?;
        st.apply_fourier_reg()?;
        st.apply_oracle(instance.fhat(), &member_fhat)?;
        st.apply_cnot(1, 6)?;
        if d == 1 {
            st.apply_encoder_lenient(ANC_B, Encoder::U2Scalar { rhat: p.rhat }, cfg.completion)?;
        } else {
            st.apply_encoder_lenient(ANC_A, Encoder::Vrot, cfg.completion)?;
            st.apply_encoder_lenient(ANC_B, Encoder::U2Norm { rhat: p.rhat }, cfg.completion)?;
        }
        st.apply_oracle(instance.fhat(), &member_fhat)?;
        st.apply_inverse_fourier_reg()?;
        Ok(())
    };
    let template = SimState::new_uniform(instance.group().clone(), regs.clone(), alphabet.clone())?;
    let dim: usize = regs.iter().map(|r| r.dim).product();
    let mut matrix = vec![Complex64::default(); dim * dim];
    for col in 0..dim {
        let mut st = template.clone();
        st.set_basis_state(col);
        run(&mut st)?;
        for (row, &amp) in st.amps().iter().enumerate() {
            matrix[row * dim + col] = amp;
        }
    }
    let strides: Vec<usize> = (0..regs.len()).map(|i| regs[i + 1..].iter().map(|r| r.dim).product()).collect();
    let good = (0..dim)
        .map(|flat| {
            let at = |reg: usize| flat / strides[reg] % regs[reg].dim;
            at(5) == 1 && at(6) == 1 && at(ANC_A) == 0 && at(ANC_B) == 0
        })
        .collect();
    Ok(DenseCircuit { regs, group: instance.group().clone(), dim, matrix, good })
}

#[derive(Debug, Clone)]
pub struct AmplifiedReport {
    /// The success probability fed in (defines the rotation angle).
    pub p: f64,
    pub theta: f64,
    /// Number of amplification-operator applications, `floor(pi / (4 theta))`.
    pub k: usize,
    /// Good-subspace mass of `A|0>` as measured.
    pub initial_good: f64,
    /// Good-subspace mass after `k` applications of `Q`.
    pub boosted_good: f64,
    /// The closed form `sin^2((2k+1) theta)`.
    pub predicted: f64,
    /// Distribution over the group register conditional on the good subspace.
    pub conditional_distribution: Vec<f64>,
}

/// Runs the amplification operator `Q = -A S_0 A^dag S_chi` for
/// `k = floor(pi/(4 theta))` rounds on `A|0>`, where `sin^2(theta) = p`.
pub fn amplitude_amplify(circuit: &DenseCircuit, p: f64) -> Result<AmplifiedReport> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Precondition(format!(
            "amplification needs p in (0, 1], got {p} (p = 0 cannot be amplified)"
        )));
    }
    let theta = p.sqrt().min(1.0).asin();
    let k = (std::f64::consts::PI / (4.0 * theta)).floor() as usize;
    let mut init = vec![Complex64::default(); circuit.dim()];
    init[0] = Complex64::new(1.0, 0.0);
    let mut state = circuit.apply(&init);
    let good_mass = |v: &[Complex64]| -> f64 {
        v.iter().zip(circuit.good_mask()).filter(|(_, &g)| g).map(|(a, _)| a.norm_sqr()).sum()
    };
    let initial_good = good_mass(&state);
    for _ in 0..k {
        // S_chi: flip the sign of every good basis state
        for (a, &g) in state.iter_mut().zip(circuit.good_mask()) {
            if g {
                *a = -*a;
            }
        }
        let mut v = circuit.apply_adjoint(&state);
        // S_0: flip the sign of |0...0>
        v[0] = -v[0];
        state = circuit.apply(&v);
        // global minus sign of Q (irrelevant to probabilities, kept for fidelity)
        for a in &mut state {
            *a = -*a;
        }
    }
    let boosted_good = good_mass(&state);
    let predicted = ((2 * k + 1) as f64 * theta).sin().powi(2);
    // conditional distribution over the group register within the good subspace
    let greg = circuit.regs.iter().position(|r| r.kind == RegisterKind::Group).unwrap();
    let stride: usize = circuit.regs[greg + 1..].iter().map(|r| r.dim).product();
    let g_dim = circuit.regs[greg].dim;
    let mut cond = vec![0.0; g_dim];
    for (flat, amp) in state.iter().enumerate() {
        if circuit.good_mask()[flat] {
            cond[flat / stride % g_dim] += amp.norm_sqr();
        }
    }
    if boosted_good > 0.0 {
        for c in &mut cond {
            *c /= boosted_good;
        }
    }
    Ok(AmplifiedReport {
        p,
        theta,
        k,
        initial_good,
        boosted_good,
        predicted,
        conditional_distribution: cond,
    })
}
