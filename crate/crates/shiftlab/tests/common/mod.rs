//! Shared generators for the property and acceptance suites.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use shiftlab::abelian::{fourier, GroupElement, GroupSpec};
use shiftlab::bentlib;
use shiftlab::gfunc::{is_bent, shift, Side, VectorFn, BENT_TOL};
use shiftlab::hiddenshift::HiddenShiftInstance;

pub const TAU: f64 = 2.0 * std::f64::consts::PI;

/// Group shapes used by the randomized suites, all of order <= 64.
pub fn group_pool() -> Vec<GroupSpec> {
    [
        vec![2],
        vec![3],
        vec![4],
        vec![5],
        vec![6],
        vec![7],
        vec![8],
        vec![9],
        vec![12],
        vec![2, 2],
        vec![2, 3],
        vec![3, 3],
        vec![2, 4],
        vec![2, 2, 2],
        vec![16],
        vec![4, 4],
        vec![2, 3, 4],
        vec![32],
        vec![64],
    ]
    .into_iter()
    .map(|m| GroupSpec::new(m).unwrap())
    .collect()
}

/// Small groups only (dense-friendly everywhere).
pub fn small_group(rng: &mut ChaCha8Rng) -> GroupSpec {
    let pool = group_pool();
    let small: Vec<_> = pool.into_iter().filter(|g| g.order() <= 16).collect();
    small[rng.gen_range(0..small.len())].clone()
}

pub fn random_element(rng: &mut ChaCha8Rng, group: &GroupSpec) -> GroupElement {
    group.element_at(rng.gen_range(0..group.order()))
}

/// Unit-modulus function with independent random phases.
pub fn random_unit_fn(rng: &mut ChaCha8Rng, group: &GroupSpec) -> VectorFn {
    let table: Vec<Complex64> =
        (0..group.order()).map(|_| Complex64::from_polar(1.0, rng.gen_range(0.0..TAU))).collect();
    VectorFn::scalar(group.clone(), table).unwrap()
}

/// Scalar function with moduli in [0.3, 1.7] (bounded away from zero so the
/// mirrored algorithm's divisions stay well conditioned).
pub fn random_scalar_fn(rng: &mut ChaCha8Rng, group: &GroupSpec) -> VectorFn {
    let table: Vec<Complex64> = (0..group.order())
        .map(|_| Complex64::from_polar(rng.gen_range(0.3..1.7), rng.gen_range(0.0..TAU)))
        .collect();
    VectorFn::scalar(group.clone(), table).unwrap()
}

pub fn random_vector_fn(rng: &mut ChaCha8Rng, group: &GroupSpec, dim: usize) -> VectorFn {
    let table: Vec<Complex64> = (0..group.order() * dim)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    VectorFn::from_flat(group.clone(), Side::Group, dim, table).unwrap()
}

/// A window whose boundaries sit at quantile midpoints of the actual norms, so
/// witness sets are nonempty, often proper, and never boundary-degenerate.
/// Returns (r, R, rhat, Rhat).
pub fn random_window(rng: &mut ChaCha8Rng, f: &VectorFn) -> (f64, f64, f64, f64) {
    let n = f.group().order();
    let mut norms: Vec<f64> = (0..n).map(|i| f.norm_at(i)).collect();
    norms.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let fh = fourier(f);
    let mut dual: Vec<f64> = (0..n).map(|i| fh.norm_at(i)).collect();
    dual.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let cut = |sorted: &[f64], rng: &mut ChaCha8Rng| -> (f64, f64) {
        // lower cut below some order statistic, upper cut above a later one
        let lo_idx = rng.gen_range(0..sorted.len().div_ceil(2));
        let hi_idx = rng.gen_range(lo_idx..sorted.len());
        let lo = if lo_idx == 0 {
            (sorted[0] * 0.5).max(1e-3)
        } else {
            (sorted[lo_idx - 1] + sorted[lo_idx]) / 2.0
        };
        let hi = if hi_idx + 1 == sorted.len() {
            sorted[hi_idx] + 0.25
        } else {
            (sorted[hi_idx] + sorted[hi_idx + 1]) / 2.0
        };
        (lo.max(1e-3), hi)
    };
    let (r, big_r) = cut(&norms, rng);
    let (rhat, big_rhat) = cut(&dual, rng);
    (r, big_r, rhat, big_rhat)
}

/// Random subset instance with a well-conditioned window.
pub fn random_subset_instance(rng: &mut ChaCha8Rng, group: &GroupSpec, dim: usize) -> HiddenShiftInstance {
    let f = if dim == 1 { random_scalar_fn(rng, group) } else { random_vector_fn(rng, group, dim) };
    let window = random_window(rng, &f);
    let s = random_element(rng, group);
    HiddenShiftInstance::new(f, s, window).unwrap()
}

/// Random full-window `(R, rhat)` instance (alpha = alphahat = 1).
pub fn random_bounded_instance(rng: &mut ChaCha8Rng, group: &GroupSpec) -> HiddenShiftInstance {
    let f = random_scalar_fn(rng, group);
    let s = random_element(rng, group);
    HiddenShiftInstance::with_full_windows(f, s).unwrap()
}

/// A catalog of genuinely bent functions on assorted groups: chirps, phase
/// twists and modulations of chirps, the B1(Z/3Z) members, concatenations, and
/// disjoint-support functions. Every entry is checked bent on construction.
pub fn bent_catalog() -> Vec<VectorFn> {
    let mut out: Vec<VectorFn> = Vec::new();
    for moduli in [vec![2], vec![3], vec![4], vec![5], vec![6], vec![7], vec![8], vec![2, 2], vec![2, 3], vec![3, 3], vec![2, 2, 2], vec![9], vec![12]] {
        let g = GroupSpec::new(moduli).unwrap();
        let chirp = bentlib::bent_chirp(&g);
        out.push(chirp.clone());
        // global phase twist
        let twist = Complex64::from_polar(1.0, 1.234);
        let twisted: Vec<Complex64> = chirp.table().iter().map(|&z| z * twist).collect();
        out.push(VectorFn::scalar(g.clone(), twisted).unwrap());
        // modulation by a character permutes the spectrum, preserving bentness
        let chi = g.character_at(1 % g.order());
        let modulated: Vec<Complex64> = (0..g.order())
            .map(|i| {
                chirp.scalar_at(i)
                    * shiftlab::abelian::char_eval(&g, &chi, &g.element_at(i)).unwrap()
            })
            .collect();
        out.push(VectorFn::scalar(g, modulated).unwrap());
    }
    out.extend(bentlib::enumerate_b1_z3());
    // multidimensional members
    let g3 = GroupSpec::cyclic(3);
    let b1 = bentlib::enumerate_b1_z3();
    let s = 1.0 / 2.0f64.sqrt();
    out.push(
        bentlib::concatenate(
            &[b1[2].clone(), b1[4].clone()],
            &[Complex64::new(s, 0.0), Complex64::new(0.0, s)],
        )
        .unwrap(),
    );
    let g2 = GroupSpec::cyclic(2);
    out.push(
        bentlib::concatenate(
            &[bentlib::bent_chirp(&g2), bentlib::bent_chirp(&g2)],
            &[Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)],
        )
        .unwrap(),
    );
    out.push(bentlib::disjoint_support(&g2));
    out.push(bentlib::disjoint_support(&g3));
    out.push(bentlib::disjoint_support(&GroupSpec::new(vec![2, 2]).unwrap()));
    for f in &out {
        assert!(is_bent(f, BENT_TOL), "catalog entry on {:?} is not bent", f.group().moduli());
    }
    out
}

/// All shifts of a function's group.
#[allow(dead_code)]
pub fn all_shifts(group: &GroupSpec) -> Vec<GroupElement> {
    (0..group.order()).map(|i| group.element_at(i)).collect()
}

#[allow(dead_code)]
pub fn shifted_copy(f: &VectorFn, t: &GroupElement) -> VectorFn {
    shift(f, t).unwrap()
}
