//! Lazy simulation backend.
//!
//! Between paired oracle calls the value register holds a fixed function of the
//! group register, so its content never needs its own tensor factor. This engine
//! tracks amplitudes over (group, indicator, ancilla a, ancilla b) only; the
//! loaded table is remembered and consulted when a value-keyed block is applied.
//! State size is `|G| * 2 * dim_a * dim_b` instead of `|G| * 2 * (2|G|+1) * ...`,
//! which keeps |G| up to a few thousand workable. The dense backend validates
//! this one.

use num_complex::Complex64;

use crate::abelian::{fourier_raw, GroupSpec};
use crate::gfunc::{Side, VectorFn};
use crate::statevec::{CompletionStyle, Encoder};
use crate::{Error, Result};

#[derive(Debug, Clone)]
struct Loaded {
    table: Vec<Complex64>,
    dim: usize,
}

/// Amplitudes over (group, indicator, a, b) with the value register implicit.
#[derive(Debug, Clone)]
pub struct LazyState {
    group: GroupSpec,
    side: Side,
    a_dim: usize,
    b_dim: usize,
    amps: Vec<Complex64>,
    loaded: Option<Loaded>,
    value_dim: usize,
}

impl LazyState {
    pub fn new_uniform(group: GroupSpec, value_dim: usize, a_dim: usize, b_dim: usize) -> Self {
        let n = group.order();
        let trailing = 2 * a_dim * b_dim;
        let mut amps = vec![Complex64::default(); n * trailing];
        let scale = 1.0 / (n as f64).sqrt();
        for x in 0..n {
            amps[x * trailing] = Complex64::new(scale, 0.0);
        }
        LazyState { group, side: Side::Group, a_dim, b_dim, amps, loaded: None, value_dim }
    }

    pub fn side(&self) -> Side {
        self.side
    }

    fn trailing(&self) -> usize {
        2 * self.a_dim * self.b_dim
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Toggles the value register between blank and `table[x]`, flipping the
    /// indicator for group indices in `member`. The second call must present the
    /// same table, otherwise the XOR would not return the register to blank.
    pub fn apply_oracle(&mut self, table: &VectorFn, member: &[bool]) -> Result<()> {
        if table.side() != self.side || table.group() != &self.group {
            return Err(Error::GroupMismatch("oracle table does not match register side".into()));
        }
        if table.dim() != self.value_dim {
            return Err(Error::Dimension("oracle value dimension mismatch".into()));
        }
        match self.loaded.take() {
            None => {
                self.loaded = Some(Loaded { table: table.table().to_vec(), dim: table.dim() });
            }
            Some(prev) => {
                let same = prev.dim == table.dim()
                    && prev
                        .table
                        .iter()
                        .zip(table.table())
                        .all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits());
                if !same {
                    return Err(Error::Alphabet(
                        "second oracle call must uncompute the value it loaded".into(),
                    ));
                }
            }
        }
        let trailing = self.trailing();
        let ab = self.a_dim * self.b_dim;
        for x in 0..self.group.order() {
            if member[x] {
                let base = x * trailing;
                for k in 0..ab {
                    self.amps.swap(base + k, base + ab + k);
                }
            }
        }
        Ok(())
    }

    pub fn postselect_indicator(&mut self, outcome: usize) -> f64 {
        let trailing = self.trailing();
        let ab = self.a_dim * self.b_dim;
        let mut prob = 0.0;
        for x in 0..self.group.order() {
            let base = x * trailing + outcome * ab;
            for k in 0..ab {
                prob += self.amps[base + k].norm_sqr();
            }
        }
        if prob <= 0.0 {
            self.amps.iter_mut().for_each(|a| *a = Complex64::default());
            return 0.0;
        }
        let scale = 1.0 / prob.sqrt();
        for x in 0..self.group.order() {
            for i in 0..2 {
                let base = x * trailing + i * ab;
                for k in 0..ab {
                    if i == outcome {
                        self.amps[base + k] *= scale;
                    } else {
                        self.amps[base + k] = Complex64::default();
                    }
                }
            }
        }
        prob
    }

    fn keyed_on_a(&mut self, enc: Encoder, style: CompletionStyle) -> Result<()> {
        let loaded = self
            .loaded
            .as_ref()
            .ok_or_else(|| Error::Input("value register is blank; nothing to key on".into()))?;
        let d = loaded.dim;
        let trailing = self.trailing();
        let ab = self.a_dim * self.b_dim;
        let mut scratch = vec![Complex64::default(); self.a_dim];
        for x in 0..self.group.order() {
            let w = &loaded.table[x * d..(x + 1) * d];
            let mut block = None;
            for i in 0..2 {
                let base = x * trailing + i * ab;
                let touched = (0..ab).any(|k| self.amps[base + k] != Complex64::default());
                if !touched {
                    continue;
                }
                if block.is_none() {
                    block = Some(enc.block(w, style)?);
                }
                let Some(b) = block.as_ref().unwrap() else { continue };
                for bb in 0..self.b_dim {
                    for (r, slot) in scratch.iter_mut().enumerate() {
                        let mut acc = Complex64::default();
                        for c in 0..self.a_dim {
                            acc += b[r][c] * self.amps[base + c * self.b_dim + bb];
                        }
                        *slot = acc;
                    }
                    for (r, &v) in scratch.iter().enumerate() {
                        self.amps[base + r * self.b_dim + bb] = v;
                    }
                }
            }
        }
        Ok(())
    }

    fn keyed_on_b(&mut self, enc: Encoder, style: CompletionStyle) -> Result<()> {
        let loaded = self
            .loaded
            .as_ref()
            .ok_or_else(|| Error::Input("value register is blank; nothing to key on".into()))?;
        let d = loaded.dim;
        let trailing = self.trailing();
        let ab = self.a_dim * self.b_dim;
        let mut scratch = vec![Complex64::default(); self.b_dim];
        for x in 0..self.group.order() {
            let w = &loaded.table[x * d..(x + 1) * d];
            let mut block = None;
            for i in 0..2 {
                let base = x * trailing + i * ab;
                let touched = (0..ab).any(|k| self.amps[base + k] != Complex64::default());
                if !touched {
                    continue;
                }
                if block.is_none() {
                    block = Some(enc.block(w, style)?);
                }
                let Some(bm) = block.as_ref().unwrap() else { continue };
                for aa in 0..self.a_dim {
                    let off = base + aa * self.b_dim;
                    for (r, slot) in scratch.iter_mut().enumerate() {
                        let mut acc = Complex64::default();
                        for c in 0..self.b_dim {
                            acc += bm[r][c] * self.amps[off + c];
                        }
                        *slot = acc;
                    }
                    for (r, &v) in scratch.iter().enumerate() {
                        self.amps[off + r] = v;
                    }
                }
            }
        }
        Ok(())
    }

    pub(crate) fn apply_encoder_a(&mut self, enc: Encoder, style: CompletionStyle) -> Result<()> {
        self.keyed_on_a(enc, style)
    }

    pub(crate) fn apply_encoder_b(&mut self, enc: Encoder, style: CompletionStyle) -> Result<()> {
        self.keyed_on_b(enc, style)
    }

    pub fn apply_u1(&mut self, big_r: f64, style: CompletionStyle) -> Result<()> {
        self.keyed_on_a(Encoder::U1 { big_r }, style)
    }

    pub fn apply_u1_mirror(&mut self, r: f64, style: CompletionStyle) -> Result<()> {
        self.keyed_on_a(Encoder::U1Mirror { r }, style)
    }

    pub fn apply_u2_scalar(&mut self, rhat: f64, style: CompletionStyle) -> Result<()> {
        self.keyed_on_b(Encoder::U2Scalar { rhat }, style)
    }

    pub fn apply_u2_norm(&mut self, rhat: f64, style: CompletionStyle) -> Result<()> {
        self.keyed_on_b(Encoder::U2Norm { rhat }, style)
    }

    pub fn apply_u2_mirror(&mut self, big_rhat: f64, style: CompletionStyle) -> Result<()> {
        self.keyed_on_b(Encoder::U2Mirror { big_rhat }, style)
    }

    pub fn apply_vrot(&mut self, style: CompletionStyle) -> Result<()> {
        self.keyed_on_a(Encoder::Vrot, style)
    }

    pub fn apply_value_rotation(&mut self, adjoint: bool, style: CompletionStyle) -> Result<()> {
        self.keyed_on_a(Encoder::ValueRotation { adjoint }, style)
    }

    pub fn apply_fourier_reg(&mut self) -> Result<()> {
        if self.side != Side::Group {
            return Err(Error::GroupMismatch("fourier layer expects the register on G".into()));
        }
        self.fourier_inner(false)?;
        self.side = Side::Dual;
        Ok(())
    }

    pub fn apply_inverse_fourier_reg(&mut self) -> Result<()> {
        if self.side != Side::Dual {
            return Err(Error::GroupMismatch("inverse fourier expects the register on the dual".into()));
        }
        self.fourier_inner(true)?;
        self.side = Side::Group;
        Ok(())
    }

    fn fourier_inner(&mut self, inverse: bool) -> Result<()> {
        if self.loaded.is_some() {
            return Err(Error::Input(
                "fourier layer with a loaded value register would decouple it from the group index"
                    .into(),
            ));
        }
        let trailing = self.trailing();
        fourier_raw(&self.group, trailing, &mut self.amps, inverse);
        Ok(())
    }

    pub fn apply_negate_reg(&mut self) -> Result<()> {
        if self.loaded.is_some() {
            return Err(Error::Input("negation with a loaded value register is not supported".into()));
        }
        let trailing = self.trailing();
        let mut out = vec![Complex64::default(); self.amps.len()];
        for x in 0..self.group.order() {
            let nx = self.group.index_of(&self.group.neg(&self.group.element_at(x)));
            out[nx * trailing..(nx + 1) * trailing]
                .copy_from_slice(&self.amps[x * trailing..(x + 1) * trailing]);
        }
        self.amps = out;
        Ok(())
    }

    /// `P(group = x, a = a0, b = b0)` for every `x`.
    pub fn group_distribution_with(&self, a0: usize, b0: usize) -> Vec<f64> {
        let trailing = self.trailing();
        let mut probs = vec![0.0; self.group.order()];
        for x in 0..self.group.order() {
            for i in 0..2 {
                let flat = x * trailing + i * self.a_dim * self.b_dim + a0 * self.b_dim + b0;
                probs[x] += self.amps[flat].norm_sqr();
            }
        }
        probs
    }

    /// Marginal distribution of the group register.
    pub fn group_distribution(&self) -> Vec<f64> {
        let trailing = self.trailing();
        let mut probs = vec![0.0; self.group.order()];
        for x in 0..self.group.order() {
            for k in 0..trailing {
                probs[x] += self.amps[x * trailing + k].norm_sqr();
            }
        }
        probs
    }
}
