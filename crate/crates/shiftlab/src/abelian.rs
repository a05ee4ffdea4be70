//! Finite abelian groups as products of cyclic groups, their characters, and the
//! Fourier transform on complex functions.
//!
//! A group `G = Z/N_1 x ... x Z/N_l` is described by its list of moduli. Elements
//! and characters are coordinate vectors; a character `a` evaluates as
//! `phi_a(x) = exp(2*pi*i * sum_j a_j x_j / N_j)`, which has unit modulus. The dual
//! group is identified with the same coordinate space, so functions on `G` and on
//! the dual share one enumeration: lexicographic over coordinate vectors. That
//! order is part of the file-format contract and must not change.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::gfunc::{Side, VectorFn};
use crate::{Error, Result};

/// A finite abelian group given as an ordered product of cyclic factors.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupSpec {
    moduli: Vec<u64>,
    order: u64,
}

/// An element of a [`GroupSpec`], stored as residues `0 <= x_j < N_j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupElement {
    pub coords: Vec<u64>,
}

/// A character of the group, stored as its exponent vector.
///
/// Characters are never tabulated; evaluation is lazy so a character costs
/// `O(l)` storage and the arithmetic in the exponent stays exact.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Character {
    pub exponents: Vec<u64>,
}

impl GroupSpec {
    pub fn new(moduli: Vec<u64>) -> Result<Self> {
        if moduli.is_empty() {
            return Err(Error::Input("group needs at least one cyclic factor".into()));
        }
        if moduli.iter().any(|&n| n == 0) {
            return Err(Error::Input("cyclic moduli must be >= 1".into()));
        }
        let order = moduli.iter().try_fold(1u64, |acc, &n| acc.checked_mul(n));
        let order = order.ok_or_else(|| Error::Input("group order overflows u64".into()))?;
        Ok(GroupSpec { moduli, order })
    }

    /// Shorthand for a single cyclic group `Z/nZ`.
    pub fn cyclic(n: u64) -> Self {
        GroupSpec::new(vec![n]).expect("n >= 1")
    }

    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }

    pub fn order(&self) -> usize {
        self.order as usize
    }

    pub fn num_factors(&self) -> usize {
        self.moduli.len()
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement { coords: vec![0; self.moduli.len()] }
    }

    pub fn trivial_character(&self) -> Character {
        Character { exponents: vec![0; self.moduli.len()] }
    }

    /// The generator character `phi_j` with exponent 1 in slot `j`.
    pub fn generator_character(&self, j: usize) -> Character {
        let mut exponents = vec![0; self.moduli.len()];
        exponents[j] = 1 % self.moduli[j];
        Character { exponents }
    }

    fn check_shape(&self, coords: &[u64]) -> Result<()> {
        if coords.len() != self.moduli.len() {
            return Err(Error::Dimension(format!(
                "expected {} coordinates, got {}",
                self.moduli.len(),
                coords.len()
            )));
        }
        Ok(())
    }

    /// Builds an element, reducing each coordinate mod `N_j`.
    pub fn element(&self, coords: &[u64]) -> Result<GroupElement> {
        self.check_shape(coords)?;
        let coords = coords.iter().zip(&self.moduli).map(|(&c, &n)| c % n).collect();
        Ok(GroupElement { coords })
    }

    pub fn character(&self, exponents: &[u64]) -> Result<Character> {
        self.check_shape(exponents)?;
        let exponents = exponents.iter().zip(&self.moduli).map(|(&c, &n)| c % n).collect();
        Ok(Character { exponents })
    }

    /// Lexicographic index of an element (first coordinate most significant).
    pub fn index_of(&self, x: &GroupElement) -> usize {
        debug_assert_eq!(x.coords.len(), self.moduli.len());
        let mut idx = 0u64;
        for (c, n) in x.coords.iter().zip(&self.moduli) {
            idx = idx * n + c;
        }
        idx as usize
    }

    pub fn index_of_character(&self, chi: &Character) -> usize {
        self.index_of(&GroupElement { coords: chi.exponents.clone() })
    }

    pub fn element_at(&self, mut idx: usize) -> GroupElement {
        let mut coords = vec![0u64; self.moduli.len()];
        for j in (0..self.moduli.len()).rev() {
            let n = self.moduli[j] as usize;
            coords[j] = (idx % n) as u64;
            idx /= n;
        }
        GroupElement { coords }
    }

    pub fn character_at(&self, idx: usize) -> Character {
        Character { exponents: self.element_at(idx).coords }
    }

    /// All elements in lexicographic order.
    pub fn elements(&self) -> impl Iterator<Item = GroupElement> + '_ {
        (0..self.order()).map(|i| self.element_at(i))
    }

    pub fn characters(&self) -> impl Iterator<Item = Character> + '_ {
        (0..self.order()).map(|i| self.character_at(i))
    }

    pub fn add(&self, x: &GroupElement, y: &GroupElement) -> GroupElement {
        let coords = x
            .coords
            .iter()
            .zip(&y.coords)
            .zip(&self.moduli)
            .map(|((&a, &b), &n)| (a + b) % n)
            .collect();
        GroupElement { coords }
    }

    pub fn sub(&self, x: &GroupElement, y: &GroupElement) -> GroupElement {
        let coords = x
            .coords
            .iter()
            .zip(&y.coords)
            .zip(&self.moduli)
            .map(|((&a, &b), &n)| (a + n - b) % n)
            .collect();
        GroupElement { coords }
    }

    pub fn neg(&self, x: &GroupElement) -> GroupElement {
        let coords = x.coords.iter().zip(&self.moduli).map(|(&a, &n)| (n - a) % n).collect();
        GroupElement { coords }
    }
}

/// Evaluates `chi(x) = prod_j exp(2*pi*i * a_j x_j / N_j)`.
///
/// The phase is accumulated exactly as an integer multiple of `2*pi/|G|` before a
/// single conversion to floating point, so no per-factor rounding accumulates.
pub fn char_eval(group: &GroupSpec, chi: &Character, x: &GroupElement) -> Result<Complex64> {
    group.check_shape(&chi.exponents)?;
    group.check_shape(&x.coords)?;
    Ok(char_eval_unchecked(group, chi, x))
}

pub(crate) fn char_eval_unchecked(group: &GroupSpec, chi: &Character, x: &GroupElement) -> Complex64 {
    let order = group.order as u128;
    let mut phase: u128 = 0;
    for ((&a, &c), &n) in chi.exponents.iter().zip(&x.coords).zip(&group.moduli) {
        let weight = order / n as u128;
        phase = (phase + (a as u128) * (c as u128) % order * weight) % order;
    }
    let angle = 2.0 * std::f64::consts::PI * (phase as f64) / (order as f64);
    Complex64::from_polar(1.0, angle)
}

/// The unitary `|G| x |G|` Fourier matrix with entry `F[phi, x] = phi(x) / sqrt(|G|)`.
///
/// Row index enumerates the dual group, column index the group, both in
/// lexicographic order. This is the dense cross-check path; the transforms below
/// factor through the cyclic components instead.
pub fn fourier_matrix(group: &GroupSpec) -> Vec<Vec<Complex64>> {
    let n = group.order();
    let scale = 1.0 / (n as f64).sqrt();
    let mut rows = Vec::with_capacity(n);
    for p in 0..n {
        let chi = group.character_at(p);
        let mut row = Vec::with_capacity(n);
        for x in 0..n {
            let el = group.element_at(x);
            row.push(char_eval_unchecked(group, &chi, &el) * scale);
        }
        rows.push(row);
    }
    rows
}

/// Applies the DFT of one cyclic factor along its axis of the element index.
///
/// `sign = +1` gives the forward kernel `exp(+2*pi*i*a*x/N)`, `sign = -1` the
/// conjugate kernel of the inverse transform. Each factor contributes `1/sqrt(N)`.
fn transform_axis(data: &mut [Complex64], dim: usize, moduli: &[u64], axis: usize, sign: f64) {
    let n = moduli[axis] as usize;
    if n == 1 {
        return;
    }
    let inner: usize = moduli[axis + 1..].iter().map(|&m| m as usize).product::<usize>() * dim;
    let outer: usize = moduli[..axis].iter().map(|&m| m as usize).product();
    let scale = 1.0 / (n as f64).sqrt();
    // kernel[k] = exp(sign * 2*pi*i*k/n), k reduced mod n exactly
    let kernel: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(1.0, sign * 2.0 * std::f64::consts::PI * k as f64 / n as f64))
        .collect();
    let mut scratch = vec![Complex64::default(); n];
    for o in 0..outer {
        for i in 0..inner {
            let base = o * n * inner + i;
            for (a, slot) in scratch.iter_mut().enumerate() {
                let mut acc = Complex64::default();
                for x in 0..n {
                    acc += kernel[a * x % n] * data[base + x * inner];
                }
                *slot = acc * scale;
            }
            for (a, &v) in scratch.iter().enumerate() {
                data[base + a * inner] = v;
            }
        }
    }
}

pub(crate) fn fourier_raw(group: &GroupSpec, dim: usize, data: &mut [Complex64], inverse: bool) {
    let sign = if inverse { -1.0 } else { 1.0 };
    for axis in 0..group.moduli.len() {
        transform_axis(data, dim, &group.moduli, axis, sign);
    }
}

/// Fourier transform `f_hat(phi) = |G|^{-1/2} sum_x phi(x) f(x)`, coordinate-wise
/// for vector-valued functions. Computed as a tensor product of per-factor cyclic
/// DFTs.
pub fn fourier(f: &VectorFn) -> VectorFn {
    assert_eq!(f.side(), Side::Group, "fourier maps functions on G to functions on the dual");
    let mut data = f.table().to_vec();
    fourier_raw(f.group(), f.dim(), &mut data, false);
    VectorFn::from_flat(f.group().clone(), Side::Dual, f.dim(), data).expect("shape preserved")
}

/// Inverse Fourier transform `h_check(x) = |G|^{-1/2} sum_phi conj(phi(x)) h(phi)`.
pub fn inverse_fourier(h: &VectorFn) -> VectorFn {
    assert_eq!(h.side(), Side::Dual, "inverse_fourier maps functions on the dual to functions on G");
    let mut data = h.table().to_vec();
    fourier_raw(h.group(), h.dim(), &mut data, true);
    VectorFn::from_flat(h.group().clone(), Side::Group, h.dim(), data).expect("shape preserved")
}

/// Dense-matrix Fourier path, the cross-check oracle for the factored transform.
pub fn fourier_dense(f: &VectorFn) -> VectorFn {
    assert!(f.group().order() <= 1024, "dense path is reserved for |G| <= 1024");
    let mat = fourier_matrix(f.group());
    let n = f.group().order();
    let d = f.dim();
    let mut out = vec![Complex64::default(); n * d];
    for (p, row) in mat.iter().enumerate() {
        for x in 0..n {
            let fv = f.value_at(x);
            for i in 0..d {
                out[p * d + i] += row[x] * fv[i];
            }
        }
    }
    VectorFn::from_flat(f.group().clone(), Side::Dual, d, out).expect("shape preserved")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gfunc::VectorFn;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn omega() -> Complex64 {
        Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0)
    }

    #[test]
    fn char_eval_z2_nontrivial() {
        let g = GroupSpec::cyclic(2);
        let chi = g.character(&[1]).unwrap();
        let x = g.element(&[1]).unwrap();
        let v = char_eval(&g, &chi, &x).unwrap();
        assert_abs_diff_eq!(v.re, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn char_eval_z3_is_omega() {
        let g = GroupSpec::cyclic(3);
        let chi = g.character(&[1]).unwrap();
        let x = g.element(&[1]).unwrap();
        let v = char_eval(&g, &chi, &x).unwrap();
        let w = omega();
        assert!((v - w).norm() < 1e-12);
    }

    #[test]
    fn char_eval_product_group() {
        // (-1) * omega^2 computed independently as a product of component values
        let g = GroupSpec::new(vec![2, 3]).unwrap();
        let chi = g.character(&[1, 2]).unwrap();
        let x = g.element(&[1, 1]).unwrap();
        let v = char_eval(&g, &chi, &x).unwrap();
        let expect = c(-1.0, 0.0) * omega() * omega();
        assert!((v - expect).norm() < 1e-12);
        assert_abs_diff_eq!(v.norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn char_eval_rejects_shape_mismatch() {
        let g = GroupSpec::new(vec![2, 3]).unwrap();
        let chi = g.character(&[1, 2]).unwrap();
        let bad = GroupElement { coords: vec![1] };
        assert!(matches!(char_eval(&g, &chi, &bad), Err(Error::Dimension(_))));
    }

    #[test]
    fn fourier_z2_example() {
        // oracle: direct 2-point sum, f_hat(a) = (f(0) + (-1)^a f(1)) / sqrt(2)
        let g = GroupSpec::cyclic(2);
        let f = VectorFn::scalar(g, vec![c(1.0, 0.0), c(0.0, 1.0)]).unwrap();
        let fh = fourier(&f);
        let s = 1.0 / 2.0_f64.sqrt();
        assert!((fh.scalar_at(0) - c(s, s)).norm() < 1e-12);
        assert!((fh.scalar_at(1) - c(s, -s)).norm() < 1e-12);
    }

    #[test]
    fn fourier_delta_and_constant() {
        let g = GroupSpec::new(vec![2, 3]).unwrap();
        let n = g.order();
        let mut delta = vec![c(0.0, 0.0); n];
        delta[0] = c(1.0, 0.0);
        let fh = fourier(&VectorFn::scalar(g.clone(), delta).unwrap());
        for p in 0..n {
            assert!((fh.scalar_at(p) - c(1.0 / (n as f64).sqrt(), 0.0)).norm() < 1e-12);
        }
        let ones = vec![c(1.0, 0.0); n];
        let fh = fourier(&VectorFn::scalar(g, ones).unwrap());
        assert!((fh.scalar_at(0) - c((n as f64).sqrt(), 0.0)).norm() < 1e-12);
        for p in 1..n {
            assert!(fh.scalar_at(p).norm() < 1e-12);
        }
    }

    #[test]
    fn inverse_fourier_examples() {
        let g = GroupSpec::cyclic(2);
        let f = VectorFn::scalar(g.clone(), vec![c(1.0, 0.0), c(0.0, 1.0)]).unwrap();
        let back = inverse_fourier(&fourier(&f));
        for x in 0..2 {
            assert!((back.scalar_at(x) - f.scalar_at(x)).norm() < 1e-12);
        }

        // h(phi_a) = omega^a on Z/3: oracle is the direct 3-point sum, which puts
        // the whole mass sqrt(3) at x = 1.
        let g3 = GroupSpec::cyclic(3);
        let w = omega();
        let h = VectorFn::scalar_on(g3, Side::Dual, vec![c(1.0, 0.0), w, w * w]).unwrap();
        let hv = inverse_fourier(&h);
        assert!(hv.scalar_at(0).norm() < 1e-12);
        assert!((hv.scalar_at(1) - c(3.0_f64.sqrt(), 0.0)).norm() < 1e-12);
        assert!(hv.scalar_at(2).norm() < 1e-12);
    }

    #[test]
    fn fourier_matrix_small_groups() {
        let h = fourier_matrix(&GroupSpec::cyclic(2));
        let s = 1.0 / 2.0_f64.sqrt();
        for (p, row) in h.iter().enumerate() {
            for (x, v) in row.iter().enumerate() {
                let expect = if p == 1 && x == 1 { -s } else { s };
                assert!((v - c(expect, 0.0)).norm() < 1e-12);
            }
        }
        // Z/3: Vandermonde in omega
        let m = fourier_matrix(&GroupSpec::cyclic(3));
        let w = omega();
        let s3 = 1.0 / 3.0_f64.sqrt();
        for p in 0..3 {
            for x in 0..3 {
                let expect = w.powu((p * x % 3) as u32) * s3;
                assert!((m[p][x] - expect).norm() < 1e-12);
            }
        }
        // Z/2 x Z/2: tensor square of the 2x2 case
        let t = fourier_matrix(&GroupSpec::new(vec![2, 2]).unwrap());
        for p in 0..4 {
            for x in 0..4 {
                let expect = h[p / 2][x / 2] * h[p % 2][x % 2];
                assert!((t[p][x] - expect).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn fourier_matrix_is_unitary() {
        for moduli in [vec![4], vec![2, 3], vec![2, 2, 2]] {
            let g = GroupSpec::new(moduli).unwrap();
            let m = fourier_matrix(&g);
            let n = g.order();
            for i in 0..n {
                for j in 0..n {
                    let mut acc = Complex64::default();
                    for k in 0..n {
                        acc += m[k][i].conj() * m[k][j];
                    }
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((acc - c(expect, 0.0)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn factored_transform_matches_dense_path() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for moduli in [vec![6], vec![2, 3], vec![4, 2], vec![2, 2, 3]] {
            let g = GroupSpec::new(moduli).unwrap();
            let n = g.order();
            let table: Vec<Complex64> =
                (0..n).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let f = VectorFn::scalar(g, table).unwrap();
            let a = fourier(&f);
            let b = fourier_dense(&f);
            for p in 0..n {
                assert!((a.scalar_at(p) - b.scalar_at(p)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn lexicographic_enumeration_contract() {
        let g = GroupSpec::new(vec![2, 3]).unwrap();
        let order: Vec<Vec<u64>> = g.elements().map(|e| e.coords).collect();
        assert_eq!(
            order,
            vec![
                vec![0, 0],
                vec![0, 1],
                vec![0, 2],
                vec![1, 0],
                vec![1, 1],
                vec![1, 2],
            ]
        );
        for i in 0..g.order() {
            assert_eq!(g.index_of(&g.element_at(i)), i);
        }
    }
}
