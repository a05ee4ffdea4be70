//! Complex vector-valued functions on a group: shifting, bentness tests,
//! boundedness profiles, and autocorrelation.

use num_complex::Complex64;
use rand::Rng;

use crate::abelian::{fourier, GroupElement, GroupSpec};
use crate::{Error, Result};

/// Default absolute tolerance on norms for bentness decisions: two orders above
/// double-precision DFT noise at |G| <= 4096.
pub const BENT_TOL: f64 = 1e-9;

/// Whether a function lives on the group or on its dual.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Group,
    Dual,
}

/// A table mapping each group (or dual) element to a complex `d`-vector.
///
/// The table is flat with stride `dim`, indexed in the group's lexicographic
/// element order. Values are immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorFn {
    group: GroupSpec,
    side: Side,
    dim: usize,
    table: Vec<Complex64>,
}

impl VectorFn {
    pub fn from_flat(group: GroupSpec, side: Side, dim: usize, table: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Dimension("function dimension must be >= 1".into()));
        }
        if table.len() != group.order() * dim {
            return Err(Error::Dimension(format!(
                "table length {} does not cover |G| * d = {} * {}",
                table.len(),
                group.order(),
                dim
            )));
        }
        Ok(VectorFn { group, side, dim, table })
    }

    /// A scalar (`d = 1`) function on the group.
    pub fn scalar(group: GroupSpec, values: Vec<Complex64>) -> Result<Self> {
        VectorFn::from_flat(group, Side::Group, 1, values)
    }

    pub fn scalar_on(group: GroupSpec, side: Side, values: Vec<Complex64>) -> Result<Self> {
        VectorFn::from_flat(group, side, 1, values)
    }

    /// Builds from per-element vectors in lexicographic order.
    pub fn from_rows(group: GroupSpec, side: Side, rows: Vec<Vec<Complex64>>) -> Result<Self> {
        if rows.len() != group.order() {
            return Err(Error::Dimension(format!(
                "expected {} rows, got {}",
                group.order(),
                rows.len()
            )));
        }
        let dim = rows.first().map(|r| r.len()).unwrap_or(0);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Dimension("rows have inconsistent dimension".into()));
        }
        let table = rows.into_iter().flatten().collect();
        VectorFn::from_flat(group, side, dim, table)
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn table(&self) -> &[Complex64] {
        &self.table
    }

    /// The `d`-vector at element index `idx`.
    pub fn value_at(&self, idx: usize) -> &[Complex64] {
        &self.table[idx * self.dim..(idx + 1) * self.dim]
    }

    /// Scalar value at element index `idx` (panics unless `d = 1`).
    pub fn scalar_at(&self, idx: usize) -> Complex64 {
        assert_eq!(self.dim, 1);
        self.table[idx]
    }

    pub fn value(&self, x: &GroupElement) -> &[Complex64] {
        self.value_at(self.group.index_of(x))
    }

    pub fn norm_at(&self, idx: usize) -> f64 {
        self.value_at(idx).iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_norm(&self) -> f64 {
        (0..self.group.order()).map(|i| self.norm_at(i)).fold(0.0, f64::max)
    }

    pub fn min_norm(&self) -> f64 {
        (0..self.group.order()).map(|i| self.norm_at(i)).fold(f64::INFINITY, f64::min)
    }
}

/// `result(x) = f(x - s)`.
pub fn shift(f: &VectorFn, s: &GroupElement) -> Result<VectorFn> {
    if s.coords.len() != f.group().num_factors() {
        return Err(Error::GroupMismatch("shift element has wrong coordinate count".into()));
    }
    if f.side() != Side::Group {
        return Err(Error::GroupMismatch("shift applies to functions on G".into()));
    }
    let g = f.group();
    let d = f.dim();
    let mut table = vec![Complex64::default(); g.order() * d];
    for idx in 0..g.order() {
        let x = g.element_at(idx);
        let src = g.index_of(&g.sub(&x, s));
        table[idx * d..(idx + 1) * d].copy_from_slice(f.value_at(src));
    }
    VectorFn::from_flat(g.clone(), Side::Group, d, table)
}

/// True iff `||f(x)||` and `||f_hat(phi)||` are within `tol` of 1 everywhere.
pub fn is_bent(f: &VectorFn, tol: f64) -> bool {
    let fh = fourier(f);
    (0..f.group().order())
        .all(|i| (f.norm_at(i) - 1.0).abs() <= tol && (fh.norm_at(i) - 1.0).abs() <= tol)
}

/// `sum_x <f(x), f(x+a)> = sum_x sum_i f_i(x) conj(f_i(x+a))`.
///
/// Vanishing for every `a != 0` is equivalent to bentness for unit-norm `f`.
pub fn autocorrelation(f: &VectorFn, a: &GroupElement) -> Complex64 {
    let g = f.group();
    let mut acc = Complex64::default();
    for idx in 0..g.order() {
        let x = g.element_at(idx);
        let xa = g.index_of(&g.add(&x, a));
        let u = f.value_at(idx);
        let v = f.value_at(xa);
        for i in 0..f.dim() {
            acc += u[i] * v[i].conj();
        }
    }
    acc
}

/// The tuple `(r, R, r_hat, R_hat, alpha, alpha_hat)` with its witness sets.
///
/// `A` and `A_hat` are canonicalized as the full preimages of the norm windows,
/// which makes profiles maximal and reproducible. The fractions are kept as exact
/// rationals `|A| / |G|`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundProfile {
    pub r: f64,
    pub big_r: f64,
    pub rhat: f64,
    pub big_rhat: f64,
    /// Membership mask of `A` over G in lexicographic order.
    pub a_mask: Vec<bool>,
    /// Membership mask of `A_hat` over the dual.
    pub ahat_mask: Vec<bool>,
}

impl BoundProfile {
    pub fn a_size(&self) -> usize {
        self.a_mask.iter().filter(|&&b| b).count()
    }

    pub fn ahat_size(&self) -> usize {
        self.ahat_mask.iter().filter(|&&b| b).count()
    }

    /// `alpha = |A| / |G|` as an exact rational pair.
    pub fn alpha_ratio(&self) -> (usize, usize) {
        (self.a_size(), self.a_mask.len())
    }

    pub fn alphahat_ratio(&self) -> (usize, usize) {
        (self.ahat_size(), self.ahat_mask.len())
    }

    pub fn alpha(&self) -> f64 {
        self.a_size() as f64 / self.a_mask.len() as f64
    }

    pub fn alphahat(&self) -> f64 {
        self.ahat_size() as f64 / self.ahat_mask.len() as f64
    }

    pub fn full_windows(&self) -> bool {
        self.a_mask.iter().all(|&b| b) && self.ahat_mask.iter().all(|&b| b)
    }

    /// Indices of A in lexicographic order.
    pub fn a_indices(&self) -> Vec<usize> {
        self.a_mask.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect()
    }

    pub fn ahat_indices(&self) -> Vec<usize> {
        self.ahat_mask.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect()
    }
}

/// Boundary slack for window membership: user-supplied bounds like `sqrt(5/2)`
/// sit a few ulps away from the DFT-computed norms they are meant to include,
/// and |G| <= 4096 transforms carry about `|G| * eps < 1e-12` of noise.
const WINDOW_SLACK: f64 = 1e-12;

/// Extracts the maximal witness sets for the window `[r, R] x [rhat, Rhat]`:
/// `A = {x : ||f(x)|| in [r, R]}` and `A_hat = {phi : ||f_hat(phi)|| in [rhat, Rhat]}`.
///
/// Empty witness sets are legal; the subset algorithms then post-select to zero
/// probability rather than erroring.
pub fn extract_bounds(f: &VectorFn, r: f64, big_r: f64, rhat: f64, big_rhat: f64) -> Result<BoundProfile> {
    if !(0.0 <= r && r <= big_r) || !(0.0 <= rhat && rhat <= big_rhat) {
        return Err(Error::Input("window bounds must satisfy 0 <= r <= R and 0 <= rhat <= Rhat".into()));
    }
    let fh = fourier(f);
    let n = f.group().order();
    let a_mask = (0..n)
        .map(|i| {
            let nm = f.norm_at(i);
            r - WINDOW_SLACK <= nm && nm <= big_r + WINDOW_SLACK
        })
        .collect();
    let ahat_mask = (0..n)
        .map(|i| {
            let nm = fh.norm_at(i);
            rhat - WINDOW_SLACK <= nm && nm <= big_rhat + WINDOW_SLACK
        })
        .collect();
    Ok(BoundProfile { r, big_r, rhat, big_rhat, a_mask, ahat_mask })
}

/// One failed claim in a [`BoundedReport`].
#[derive(Debug, Clone)]
pub struct PropertyViolation {
    pub claim: String,
    pub witness: String,
}

/// Outcome of [`check_bounded_props`].
#[derive(Debug, Clone, Default)]
pub struct BoundedReport {
    pub violations: Vec<PropertyViolation>,
}

impl BoundedReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the structural facts about `(R, rhat)`-bounded functions: `rhat <= R`;
/// if `rhat = R` then `|f| = R` and `|f_hat| = rhat` everywhere; and shifts stay
/// `(R, rhat)`-bounded (checked for random shifts drawn from `rng`).
pub fn check_bounded_props<R: Rng>(f: &VectorFn, profile: &BoundProfile, rng: &mut R) -> Result<BoundedReport> {
    if !profile.full_windows() {
        return Err(Error::Precondition(
            "check_bounded_props expects a profile with alpha = alphahat = 1".into(),
        ));
    }
    let mut report = BoundedReport::default();
    let big_r = profile.big_r;
    let rhat = profile.rhat;
    if rhat > big_r + 1e-12 {
        report.violations.push(PropertyViolation {
            claim: "rhat <= R".into(),
            witness: format!("rhat = {rhat}, R = {big_r}"),
        });
    }
    if (rhat - big_r).abs() <= 1e-9 {
        let fh = fourier(f);
        for i in 0..f.group().order() {
            if (f.norm_at(i) - big_r).abs() > 1e-9 {
                report.violations.push(PropertyViolation {
                    claim: "rhat = R forces ||f|| = R everywhere".into(),
                    witness: format!("x index {i}: ||f(x)|| = {}", f.norm_at(i)),
                });
            }
            if (fh.norm_at(i) - rhat).abs() > 1e-9 {
                report.violations.push(PropertyViolation {
                    claim: "rhat = R forces ||f_hat|| = rhat everywhere".into(),
                    witness: format!("phi index {i}: ||f_hat(phi)|| = {}", fh.norm_at(i)),
                });
            }
        }
    }
    for _ in 0..4 {
        let s = f.group().element_at(rng.gen_range(0..f.group().order()));
        let shifted = shift(f, &s)?;
        let sh = fourier(&shifted);
        if shifted.max_norm() > big_r + 1e-9 || sh.min_norm() < rhat - 1e-9 {
            report.violations.push(PropertyViolation {
                claim: "shift preserves (R, rhat)-boundedness".into(),
                witness: format!(
                    "s = {:?}: max ||g|| = {}, min ||g_hat|| = {}",
                    s.coords,
                    shifted.max_norm(),
                    sh.min_norm()
                ),
            });
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn omega() -> Complex64 {
        Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0)
    }

    fn z2(f0: Complex64, f1: Complex64) -> VectorFn {
        VectorFn::scalar(GroupSpec::cyclic(2), vec![f0, f1]).unwrap()
    }

    #[test]
    fn shift_examples() {
        let f = z2(c(1.0, 0.0), c(0.0, 1.0));
        let s = f.group().element(&[1]).unwrap();
        let g = shift(&f, &s).unwrap();
        assert_eq!(g.scalar_at(0), c(0.0, 1.0));
        assert_eq!(g.scalar_at(1), c(1.0, 0.0));

        // s = 0 is the identity shift
        let zero = f.group().identity();
        assert_eq!(shift(&f, &zero).unwrap(), f);

        // index rotation on Z/3
        let g3 = GroupSpec::cyclic(3);
        let w = omega();
        let f3 = VectorFn::scalar(g3.clone(), vec![c(1.0, 0.0), w, c(1.0, 0.0)]).unwrap();
        let s1 = g3.element(&[1]).unwrap();
        let rotated = shift(&f3, &s1).unwrap();
        assert_eq!(rotated.scalar_at(0), c(1.0, 0.0));
        assert_eq!(rotated.scalar_at(1), c(1.0, 0.0));
        assert_eq!(rotated.scalar_at(2), w);

        // round trip through -s
        let back = shift(&rotated, &g3.neg(&s1)).unwrap();
        assert_eq!(back, f3);
    }

    #[test]
    fn bentness_examples() {
        assert!(is_bent(&z2(c(1.0, 0.0), c(0.0, 1.0)), BENT_TOL));
        let w = omega();
        let f3 = VectorFn::scalar(GroupSpec::cyclic(3), vec![c(1.0, 0.0), w, c(1.0, 0.0)]).unwrap();
        assert!(is_bent(&f3, BENT_TOL));
        assert!(!is_bent(&z2(c(1.0, 0.0), c(0.0, 2.0)), BENT_TOL));
    }

    #[test]
    fn autocorrelation_examples() {
        // 1 * conj(i) + i * conj(1) = -i + i = 0
        let f = z2(c(1.0, 0.0), c(0.0, 1.0));
        let one = f.group().element(&[1]).unwrap();
        assert!(autocorrelation(&f, &one).norm() < 1e-12);

        // a = 0 gives sum of squared norms = |G| for unit-norm f
        let zero = f.group().identity();
        assert!((autocorrelation(&f, &zero) - c(2.0, 0.0)).norm() < 1e-12);

        // non-bent witness: (1, 1) has autocorrelation 2 at a = 1
        let flat = z2(c(1.0, 0.0), c(1.0, 0.0));
        assert!((autocorrelation(&flat, &one) - c(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn extract_bounds_examples() {
        // f = (1, 2i) with window [0,2] x [sqrt(5/2), inf)
        let f = z2(c(1.0, 0.0), c(0.0, 2.0));
        let rhat = (5.0_f64 / 2.0).sqrt();
        let p = extract_bounds(&f, 0.0, 2.0, rhat, f64::INFINITY).unwrap();
        assert_eq!(p.alpha_ratio(), (2, 2));
        assert_eq!(p.alphahat_ratio(), (2, 2));
        assert!(p.full_windows());

        // bent function with the tight window [1,1] x [1,1]
        let bent = z2(c(1.0, 0.0), c(0.0, 1.0));
        let p = extract_bounds(&bent, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert!(p.full_windows());

        // Dirichlet character mod 3: f = (0, 1, -1), f_hat = (0, i, -i)
        let g3 = GroupSpec::cyclic(3);
        let d3 = VectorFn::scalar(g3, vec![c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)]).unwrap();
        let p = extract_bounds(&d3, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(p.a_indices(), vec![1, 2]);
        assert_eq!(p.alpha_ratio(), (2, 3));
        assert_eq!(p.ahat_indices(), vec![1, 2]);
        assert_eq!(p.alphahat_ratio(), (2, 3));
    }

    #[test]
    fn witness_sets_are_maximal() {
        // nothing outside A satisfies the window, and everything inside does
        let g4 = GroupSpec::cyclic(4);
        let f = VectorFn::scalar(
            g4,
            vec![c(0.5, 0.0), c(1.5, 0.0), c(0.0, 2.5), c(1.0, 0.0)],
        )
        .unwrap();
        let p = extract_bounds(&f, 0.9, 2.0, 0.0, f64::INFINITY).unwrap();
        for i in 0..4 {
            let inside = (0.9..=2.0).contains(&f.norm_at(i));
            assert_eq!(p.a_mask[i], inside, "index {i}");
        }
        assert_eq!(p.a_indices(), vec![1, 3]);
    }

    #[test]
    fn bounded_props_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        // (1, 2i): rhat = sqrt(5/2) <= 2 = R
        let f = z2(c(1.0, 0.0), c(0.0, 2.0));
        let p = extract_bounds(&f, 0.0, 2.0, (5.0_f64 / 2.0).sqrt(), f64::INFINITY).unwrap();
        assert!(check_bounded_props(&f, &p, &mut rng).unwrap().passed());

        // bent: rhat = R = 1 and flatness holds
        let bent = z2(c(1.0, 0.0), c(0.0, 1.0));
        let p = extract_bounds(&bent, 0.0, 1.0, 1.0, f64::INFINITY).unwrap();
        assert!(check_bounded_props(&bent, &p, &mut rng).unwrap().passed());

        // random unit-modulus non-bent f on Z/4: strict rhat < R, still consistent
        let g4 = GroupSpec::cyclic(4);
        let f4 = VectorFn::scalar(
            g4,
            vec![
                Complex64::from_polar(1.0, 0.3),
                Complex64::from_polar(1.0, 1.1),
                Complex64::from_polar(1.0, 2.9),
                Complex64::from_polar(1.0, 4.2),
            ],
        )
        .unwrap();
        let fh = fourier(&f4);
        let rhat = fh.min_norm();
        assert!(rhat < 1.0 - 1e-6, "chosen f4 should not be bent");
        let p = extract_bounds(&f4, 0.0, 1.0, rhat, f64::INFINITY).unwrap();
        assert!(check_bounded_props(&f4, &p, &mut rng).unwrap().passed());

        // violation is reported with a witness, not masked
        let bad = BoundProfile {
            r: 0.0,
            big_r: 1.0,
            rhat: 1.5,
            big_rhat: f64::INFINITY,
            a_mask: vec![true; 2],
            ahat_mask: vec![true; 2],
        };
        let rep = check_bounded_props(&bent, &bad, &mut rng).unwrap();
        assert!(!rep.passed());
        assert!(rep.violations[0].claim.contains("rhat <= R"));
    }
}
