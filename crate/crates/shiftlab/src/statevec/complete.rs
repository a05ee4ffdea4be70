//! Deterministic unitary completions.
//!
//! The oracle-derived block unitaries only pin one column (or one row); the rest
//! is a free choice that must not affect any measured distribution. The default
//! completion is produced by Gram-Schmidt against the standard basis with the
//! determinant normalized to 1. A second, deliberately different completion is
//! kept around so tests can assert completion independence.

use num_complex::Complex64;

/// How to fill the unconstrained columns of a block unitary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CompletionStyle {
    /// Gram-Schmidt completion with determinant 1.
    #[default]
    DetOne,
    /// Same construction with the last free column rotated by `exp(i*pi/3)`.
    PhaseSkew,
}

/// Row-major square matrix.
pub type Block = Vec<Vec<Complex64>>;

fn determinant(m: &Block) -> Complex64 {
    let n = m.len();
    let mut a: Vec<Vec<Complex64>> = m.clone();
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].norm().partial_cmp(&a[j][col].norm()).unwrap())
            .unwrap();
        if a[pivot][col].norm() == 0.0 {
            return Complex64::default();
        }
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        det *= a[col][col];
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                let sub = factor * a[col][k];
                a[row][k] -= sub;
            }
        }
    }
    det
}

/// Completes a unit-norm column to a full unitary with `M[:, 0] = col`.
pub fn complete_column(col: &[Complex64], style: CompletionStyle) -> Block {
    let n = col.len();
    debug_assert!(
        ((col.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt() - 1.0).abs() < 1e-9,
        "completion input must be unit norm"
    );
    if n == 1 {
        return vec![vec![col[0]]];
    }
    let mut cols: Vec<Vec<Complex64>> = vec![col.to_vec()];
    // Dropping the axis with the largest component keeps the set full rank.
    let skip = (0..n)
        .max_by(|&i, &j| col[i].norm().partial_cmp(&col[j].norm()).unwrap())
        .unwrap();
    for i in (0..n).filter(|&i| i != skip) {
        let mut v = vec![Complex64::default(); n];
        v[i] = Complex64::new(1.0, 0.0);
        for c in &cols {
            let overlap: Complex64 = c.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (vk, ck) in v.iter_mut().zip(c) {
                *vk -= overlap * ck;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for vk in &mut v {
            *vk /= norm;
        }
        cols.push(v);
    }
    let mut m: Block = vec![vec![Complex64::default(); n]; n];
    for (c, colvec) in cols.iter().enumerate() {
        for (r, &v) in colvec.iter().enumerate() {
            m[r][c] = v;
        }
    }
    let det = determinant(&m);
    let mut fix = det.conj() / det.norm();
    if style == CompletionStyle::PhaseSkew {
        fix *= Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_3);
    }
    for row in &mut m {
        row[n - 1] *= fix;
    }
    m
}

/// Completes a unit-norm row to a full unitary with `M[0, :] = row`.
pub fn complete_row(row: &[Complex64], style: CompletionStyle) -> Block {
    let conj: Vec<Complex64> = row.iter().map(|v| v.conj()).collect();
    adjoint(&complete_column(&conj, style))
}

pub fn adjoint(m: &Block) -> Block {
    let n = m.len();
    let mut out = vec![vec![Complex64::default(); n]; n];
    for r in 0..n {
        for c in 0..n {
            out[c][r] = m[r][c].conj();
        }
    }
    out
}
