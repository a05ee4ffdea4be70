//! Example instances from number theory: primitive Dirichlet characters on
//! `Z/nZ` and multiplicative characters of finite fields, together with their
//! predicted hidden-shift success probabilities.

use num_complex::Complex64;
use num_integer::Integer;

use crate::abelian::{Character, GroupSpec};
use crate::gfunc::VectorFn;
use crate::{Error, Result};

fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

fn euler_phi(n: u64) -> u64 {
    factorize(n).iter().map(|&(p, e)| p.pow(e - 1) * (p - 1)).product()
}

fn pow_mod(base: u64, mut exp: u64, modulus: u64) -> u64 {
    let mut acc = 1u128;
    let m = modulus as u128;
    let mut b = (base % modulus) as u128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc as u64
}

fn multiplicative_order(a: u64, modulus: u64, group_order: u64) -> u64 {
    let mut order = group_order;
    for (p, _) in factorize(group_order) {
        while order % p == 0 && pow_mod(a, order / p, modulus) == 1 {
            order /= p;
        }
    }
    order
}

/// Smallest primitive root modulo an odd prime power.
fn primitive_root(pk: u64, p: u64) -> u64 {
    let phi = euler_phi(pk);
    (2..pk)
        .filter(|&g| g % p != 0)
        .find(|&g| multiplicative_order(g, pk, phi) == phi)
        .expect("odd prime powers are cyclic")
}

/// One cyclic component of the unit group `(Z/nZ)*`: a generator (lifted to a
/// residue mod `n` that is 1 modulo the other prime-power factors) and its order.
#[derive(Debug, Clone)]
struct UnitComponent {
    generator: u64,
    order: u64,
}

/// Lifts `residue` mod `pk` to the residue mod `n` that is 1 mod `n/pk`.
fn crt_lift(residue: u64, pk: u64, n: u64) -> u64 {
    let rest = n / pk;
    if rest == 1 {
        return residue % n;
    }
    // x = residue (mod pk), x = 1 (mod rest)
    for k in 0..pk {
        let cand = (k as u128 * rest as u128 + 1) % n as u128;
        if cand % pk as u128 == residue as u128 % pk as u128 {
            return cand as u64;
        }
    }
    unreachable!("coprime moduli always admit a CRT solution")
}

fn unit_components(n: u64) -> Vec<UnitComponent> {
    let mut comps = Vec::new();
    for (p, e) in factorize(n) {
        let pk = p.pow(e);
        if p == 2 {
            match e {
                1 => {}
                2 => comps.push(UnitComponent { generator: crt_lift(3, 4, n), order: 2 }),
                _ => {
                    comps.push(UnitComponent { generator: crt_lift(pk - 1, pk, n), order: 2 });
                    comps.push(UnitComponent {
                        generator: crt_lift(5, pk, n),
                        order: pk / 4,
                    });
                }
            }
        } else {
            comps.push(UnitComponent {
                generator: crt_lift(primitive_root(pk, p), pk, n),
                order: euler_phi(pk),
            });
        }
    }
    comps
}

/// A multiplicative character of `(Z/nZ)*` extended by zero, as a table on the
/// additive group `Z/nZ`.
#[derive(Debug, Clone)]
pub struct DirichletChar {
    pub modulus: u64,
    pub index: usize,
    pub values: VectorFn,
    pub primitive: bool,
}

impl DirichletChar {
    pub fn is_trivial(&self) -> bool {
        self.index == 0
    }
}

/// Builds the `index`-th character of `(Z/nZ)*` (mixed-radix over the cyclic
/// components of the unit group, index 0 being the principal character).
/// Primitivity is decided by testing every proper divisor `n1 | n`: the
/// character is induced mod `n1` exactly when it is trivial on the units
/// congruent to 1 mod `n1`.
pub fn dirichlet_character(n: u64, index: usize) -> Result<DirichletChar> {
    if n < 2 {
        return Err(Error::Input("Dirichlet modulus must be at least 2".into()));
    }
    let phi = euler_phi(n) as usize;
    if index >= phi {
        return Err(Error::Input(format!(
            "character index {index} out of range: (Z/{n}Z)* has {phi} characters"
        )));
    }
    let comps = unit_components(n);
    // mixed-radix digits of the index over the component orders
    let mut digits = Vec::with_capacity(comps.len());
    let mut rest = index as u64;
    for comp in &comps {
        digits.push(rest % comp.order);
        rest /= comp.order;
    }
    debug_assert_eq!(rest, 0);
    // decompose every unit over the generators once
    let mut dlog: Vec<Option<Vec<u64>>> = vec![None; n as usize];
    let mut exps = vec![0u64; comps.len()];
    loop {
        let mut residue = 1u128;
        for (comp, &e) in comps.iter().zip(&exps) {
            residue = residue * pow_mod(comp.generator, e, n) as u128 % n as u128;
        }
        dlog[residue as usize] = Some(exps.clone());
        // increment the mixed-radix counter
        let mut carry = true;
        for (slot, comp) in exps.iter_mut().zip(&comps) {
            if carry {
                *slot += 1;
                if *slot == comp.order {
                    *slot = 0;
                } else {
                    carry = false;
                }
            }
        }
        if carry {
            break;
        }
    }
    let group = GroupSpec::cyclic(n);
    let mut table = vec![Complex64::default(); n as usize];
    for (x, slot) in table.iter_mut().enumerate() {
        if let Some(exponents) = &dlog[x] {
            let mut angle = 0.0;
            for ((&k, &e), comp) in digits.iter().zip(exponents).zip(&comps) {
                angle += 2.0 * std::f64::consts::PI * (k * e % comp.order) as f64 / comp.order as f64;
            }
            *slot = Complex64::from_polar(1.0, angle);
        }
    }
    let values = VectorFn::scalar(group, table)?;
    // conductor test over proper divisors: induced mod n1 iff trivial on the
    // units congruent to 1 mod n1 (for n1 = 1 that is every unit)
    let mut primitive = true;
    for n1 in (1..n).filter(|d| n % d == 0) {
        let induced = (1..n)
            .filter(|&x| x.gcd(&n) == 1 && x % n1 == 1 % n1)
            .all(|x| (values.scalar_at(x as usize) - Complex64::new(1.0, 0.0)).norm() < 1e-9);
        if induced {
            primitive = false;
            break;
        }
    }
    Ok(DirichletChar { modulus: n, index, values, primitive })
}

/// Predicted success probability with its degeneracy flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictedProb {
    pub value: f64,
    /// Set when the flatness argument behind the formula does not apply (the
    /// trivial-unit-group modulus n = 2); the formula value is still reported.
    pub degenerate: bool,
}

/// `p(s) = (phi(n)/n)^2` for a primitive character.
pub fn predicted_prob_dirichlet(chr: &DirichletChar) -> Result<PredictedProb> {
    let phi = euler_phi(chr.modulus);
    let value = (phi as f64 / chr.modulus as f64).powi(2);
    if chr.primitive {
        return Ok(PredictedProb { value, degenerate: false });
    }
    if phi == 1 {
        // n = 2: the lone character is induced mod 1, the Gauss-sum flatness
        // argument degenerates, but the formula value is still well defined
        return Ok(PredictedProb { value, degenerate: true });
    }
    Err(Error::Precondition(format!(
        "character {} mod {} is imprimitive; the flatness argument needs primitivity",
        chr.index, chr.modulus
    )))
}

// ---------------- finite fields ----------------

/// Polynomial arithmetic over F_p with coefficient vectors (degree-major last).
fn poly_mul_mod(a: &[u64], b: &[u64], poly: &[u64], p: u64) -> Vec<u64> {
    let k = poly.len() - 1;
    let mut prod = vec![0u64; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + ai * bj) % p;
        }
    }
    // reduce modulo the monic irreducible polynomial
    for d in (k..prod.len()).rev() {
        let c = prod[d];
        if c == 0 {
            continue;
        }
        prod[d] = 0;
        for (j, &pj) in poly.iter().enumerate().take(k) {
            let idx = d - k + j;
            prod[idx] = (prod[idx] + c * (p - pj % p)) % p;
        }
    }
    prod.truncate(k);
    prod.resize(k, 0);
    prod
}

fn poly_is_irreducible(poly: &[u64], p: u64) -> bool {
    let k = poly.len() - 1;
    if k == 0 || poly[k] != 1 {
        return false;
    }
    if k == 1 {
        return true;
    }
    // trial division by all monic polynomials of degree 1..=k/2
    for deg in 1..=k / 2 {
        let count = p.pow(deg as u32);
        for code in 0..count {
            let mut divisor = Vec::with_capacity(deg + 1);
            let mut c = code;
            for _ in 0..deg {
                divisor.push(c % p);
                c /= p;
            }
            divisor.push(1);
            if poly_divides(&divisor, poly, p) {
                return false;
            }
        }
    }
    true
}

fn poly_divides(divisor: &[u64], dividend: &[u64], p: u64) -> bool {
    let mut rem: Vec<u64> = dividend.to_vec();
    let dd = divisor.len() - 1;
    while rem.len() > dd {
        let lead = *rem.last().unwrap() % p;
        if lead != 0 {
            let shift = rem.len() - 1 - dd;
            for (j, &cj) in divisor.iter().enumerate() {
                let idx = shift + j;
                rem[idx] = (rem[idx] + lead * (p - cj % p)) % p;
            }
        }
        rem.pop();
        while rem.len() > dd && *rem.last().unwrap() == 0 {
            if rem.len() == dd + 1 {
                break;
            }
            rem.pop();
        }
    }
    rem.iter().all(|&c| c % p == 0)
}

/// Built-in irreducible polynomials (Conway-style lowest lexicographic choice)
/// for small prime powers; callers may supply their own instead.
pub fn default_irreducible(p: u64, k: usize) -> Option<Vec<u64>> {
    if k == 1 {
        return Some(vec![0, 1]);
    }
    if p.pow(k as u32) > 1024 {
        return None;
    }
    // smallest monic polynomial of degree k that is irreducible
    let count = p.pow(k as u32);
    for code in 0..count {
        let mut poly = Vec::with_capacity(k + 1);
        let mut c = code;
        for _ in 0..k {
            poly.push(c % p);
            c /= p;
        }
        poly.push(1);
        if poly_is_irreducible(&poly, p) {
            return Some(poly);
        }
    }
    None
}

/// A multiplicative character of `F_q*` extended by `f(0) = 0`, tabulated on the
/// additive group `(Z/pZ)^k` in lexicographic coordinate order (coordinate `j`
/// is the coefficient of `T^j`).
#[derive(Debug, Clone)]
pub struct FiniteFieldChar {
    pub p: u64,
    pub k: usize,
    pub poly: Vec<u64>,
    /// Field elements as coefficient vectors of the fixed generator's powers:
    /// `generator_powers[i]` is `g^i`.
    pub generator: Vec<u64>,
    pub index: usize,
    pub values: VectorFn,
}

impl FiniteFieldChar {
    pub fn q(&self) -> u64 {
        self.p.pow(self.k as u32)
    }

    pub fn is_trivial(&self) -> bool {
        self.index == 0
    }

    pub fn group(&self) -> &GroupSpec {
        self.values.group()
    }

    fn coords_of_index(&self, idx: usize) -> Vec<u64> {
        self.group().element_at(idx).coords
    }

    fn index_of_coords(&self, coords: &[u64]) -> usize {
        self.group().index_of(&self.group().element(coords).expect("reduced coords"))
    }

    /// Field multiplication on element indices.
    pub fn mul(&self, a: usize, b: usize) -> usize {
        let av = self.coords_of_index(a);
        let bv = self.coords_of_index(b);
        let prod = poly_mul_mod(&av, &bv, &self.poly, self.p);
        self.index_of_coords(&prod)
    }

    /// The trace `Tr(x) = sum_j x^(p^j)` as an element of `F_p`.
    pub fn trace(&self, x: usize) -> u64 {
        let mut acc = vec![0u64; self.k];
        let mut power = self.coords_of_index(x);
        for _ in 0..self.k {
            for (a, &b) in acc.iter_mut().zip(&power) {
                *a = (*a + b) % self.p;
            }
            // frobenius: y -> y^p by square-and-multiply
            let mut base = power.clone();
            let mut cur = vec![0u64; self.k];
            cur[0] = 1;
            let mut e = self.p;
            while e > 0 {
                if e & 1 == 1 {
                    cur = poly_mul_mod(&cur, &base, &self.poly, self.p);
                }
                base = poly_mul_mod(&base, &base, &self.poly, self.p);
                e >>= 1;
            }
            power = cur;
        }
        debug_assert!(acc[1..].iter().all(|&c| c == 0), "trace must land in F_p");
        acc[0]
    }

    /// The additive character `phi_y: x -> exp(2 pi i Tr(xy) / p)` as an
    /// exponent-vector character of `(Z/pZ)^k`: exponent `j` is `Tr(T^j y)`.
    pub fn additive_character_of(&self, y: usize) -> Character {
        let group = self.group().clone();
        let exponents: Vec<u64> = (0..self.k)
            .map(|j| {
                let mut coords = vec![0u64; self.k];
                coords[j] = 1;
                let tj = self.index_of_coords(&coords);
                self.trace(self.mul(tj, y))
            })
            .collect();
        group.character(&exponents).expect("exponents already reduced")
    }
}

/// Builds the `index`-th multiplicative character: with `g` the fixed generator
/// (smallest nonzero element by table order with full order), character `j`
/// maps `g^i` to `exp(2 pi i * i * j / (q - 1))`.
pub fn ffield_character(p: u64, k: usize, poly: &[u64], index: usize) -> Result<FiniteFieldChar> {
    if factorize(p).len() != 1 || factorize(p)[0].1 != 1 {
        return Err(Error::Input(format!("{p} is not prime")));
    }
    if poly.len() != k + 1 {
        return Err(Error::Input(format!("polynomial must have degree {k}")));
    }
    let poly: Vec<u64> = poly.iter().map(|&c| c % p).collect();
    if !poly_is_irreducible(&poly, p) {
        return Err(Error::Input("polynomial is reducible over F_p".into()));
    }
    let q = p.pow(k as u32);
    if index >= (q - 1) as usize {
        return Err(Error::Input(format!("character index {index} out of range for F_{q}*")));
    }
    let group = GroupSpec::new(vec![p; k])?;
    let scratch = FiniteFieldChar {
        p,
        k,
        poly: poly.clone(),
        generator: vec![],
        index,
        values: VectorFn::scalar(group.clone(), vec![Complex64::default(); q as usize])?,
    };
    // find the generator: smallest table index with multiplicative order q - 1
    let mut generator_idx = None;
    'search: for cand in 1..q as usize {
        let mut seen = 1usize;
        let mut acc = cand;
        while acc != scratch.index_of_coords(&{
            let mut one = vec![0u64; k];
            one[0] = 1;
            one
        }) {
            acc = scratch.mul(acc, cand);
            seen += 1;
            if seen > q as usize {
                continue 'search;
            }
        }
        if seen == (q - 1) as usize {
            generator_idx = Some(cand);
            break;
        }
    }
    let generator_idx = generator_idx.ok_or_else(|| Error::Input("no generator found".into()))?;
    // tabulate g^i and assign character values
    let mut table = vec![Complex64::default(); q as usize];
    let mut acc = {
        let mut one = vec![0u64; k];
        one[0] = 1;
        scratch.index_of_coords(&one)
    };
    for i in 0..(q - 1) as usize {
        let angle = 2.0 * std::f64::consts::PI * (i * index % (q - 1) as usize) as f64
            / (q - 1) as f64;
        table[acc] = Complex64::from_polar(1.0, angle);
        acc = scratch.mul(acc, generator_idx);
    }
    let values = VectorFn::scalar(group.clone(), table)?;
    Ok(FiniteFieldChar {
        p,
        k,
        poly,
        generator: group.element_at(generator_idx).coords,
        index,
        values,
    })
}

/// `p(s) = (1 - 1/q)^2` for a nontrivial multiplicative character.
pub fn predicted_prob_ffield(chr: &FiniteFieldChar) -> Result<f64> {
    if chr.is_trivial() {
        return Err(Error::Precondition(
            "the trivial character has no vanishing-tail argument; probability formula needs a nontrivial character".into(),
        ));
    }
    let q = chr.q() as f64;
    Ok((1.0 - 1.0 / q) * (1.0 - 1.0 / q))
}
