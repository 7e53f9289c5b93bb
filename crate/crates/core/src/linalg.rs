//! Small dense matrices, singular values and the singular value function.
//!
//! Spectral quantities are kept in natural-log units throughout; products of
//! many contractions are carried as a normalized base matrix times
//! `exp(log_scale)` so that nothing underflows.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::symbolic::{Letter, SubshiftAutomaton};

/// Relative determinant threshold below which an input matrix is treated as
/// singular.
pub const INVERTIBILITY_TOL: f64 = 1e-12;

/// Strictness threshold, in radians, for the cone condition.
pub const CONE_MARGIN_TOL: f64 = 1e-9;

/// A dense `d × d` real matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        Ok(Matrix { dim, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Matrix::new(dim, data)
    }

    pub fn identity(dim: usize) -> Self {
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = 1.0;
        }
        Matrix { dim, data }
    }

    pub fn diagonal(entries: &[f64]) -> Self {
        let dim = entries.len();
        let mut m = Matrix {
            dim,
            data: vec![0.0; dim * dim],
        };
        for (i, &e) in entries.iter().enumerate() {
            m.data[i * dim + i] = e;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.dim + col]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let d = self.dim;
        let mut data = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                data[j * d + i] = self.data[i * d + j];
            }
        }
        Matrix { dim: d, data }
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        let d = self.dim;
        debug_assert_eq!(d, other.dim);
        let mut data = vec![0.0; d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.data[i * d + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..d {
                    data[i * d + j] += a * other.data[k * d + j];
                }
            }
        }
        Matrix { dim: d, data }
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        self.data
            .chunks(self.dim)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn scale(&self, factor: f64) -> Matrix {
        Matrix {
            dim: self.dim,
            data: self.data.iter().map(|x| x * factor).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn is_diagonal(&self) -> bool {
        let d = self.dim;
        (0..d).all(|i| (0..d).all(|j| i == j || self.data[i * d + j] == 0.0))
    }

    pub fn diagonal_entries(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    /// `AᵀA`.
    pub fn gram(&self) -> Matrix {
        self.transpose().mul(self)
    }

    /// `(sign, log|det|)` by Gaussian elimination with partial pivoting.
    /// A singular matrix gives `(0.0, -inf)`.
    pub fn log_det(&self) -> (f64, f64) {
        let d = self.dim;
        let mut a = self.data.clone();
        let mut sign = 1.0;
        let mut log_abs = 0.0;
        for col in 0..d {
            let pivot = (col..d)
                .max_by(|&i, &j| a[i * d + col].abs().total_cmp(&a[j * d + col].abs()))
                .unwrap_or(col);
            let p = a[pivot * d + col];
            if p == 0.0 || !p.is_finite() {
                return (0.0, f64::NEG_INFINITY);
            }
            if pivot != col {
                for j in 0..d {
                    a.swap(col * d + j, pivot * d + j);
                }
                sign = -sign;
            }
            if p < 0.0 {
                sign = -sign;
            }
            log_abs += p.abs().ln();
            for i in col + 1..d {
                let f = a[i * d + col] / p;
                if f != 0.0 {
                    for j in col..d {
                        a[i * d + j] -= f * a[col * d + j];
                    }
                }
            }
        }
        (sign, log_abs)
    }

    /// Fails with [`Error::SingularMatrix`] unless `|det| / max|a_ij|^d`
    /// exceeds [`INVERTIBILITY_TOL`].
    pub fn check_invertible(&self) -> Result<()> {
        let scale = self.max_abs();
        if scale == 0.0 {
            return Err(Error::SingularMatrix);
        }
        let (_, log_abs) = self.log_det();
        if log_abs - self.dim as f64 * scale.ln() > INVERTIBILITY_TOL.ln() {
            Ok(())
        } else {
            Err(Error::SingularMatrix)
        }
    }
}

/// A matrix represented as `base · exp(log_scale)` with `max|base_ij| = 1`,
/// carrying `log|det|` accumulated factor by factor.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaledMatrix {
    base: Matrix,
    log_scale: f64,
    log_abs_det: f64,
}

impl ScaledMatrix {
    pub fn new(m: &Matrix) -> Self {
        ScaledMatrix {
            base: m.clone(),
            log_scale: 0.0,
            log_abs_det: m.log_det().1,
        }
        .renormalized()
    }

    pub fn identity(dim: usize) -> Self {
        ScaledMatrix {
            base: Matrix::identity(dim),
            log_scale: 0.0,
            log_abs_det: 0.0,
        }
    }

    pub fn base(&self) -> &Matrix {
        &self.base
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    /// `log|det|` of the represented matrix, the sum over its factors.
    pub fn log_abs_det(&self) -> f64 {
        self.log_abs_det
    }

    pub fn dim(&self) -> usize {
        self.base.dim
    }

    fn renormalized(mut self) -> Self {
        let m = self.base.max_abs();
        if m > 0.0 && m.is_finite() {
            let inv = 1.0 / m;
            for x in &mut self.base.data {
                *x *= inv;
            }
            self.log_scale += m.ln();
        }
        self
    }

    /// `self · rhs`, renormalized.
    pub fn mul(&self, rhs: &Matrix) -> ScaledMatrix {
        ScaledMatrix {
            base: self.base.mul(rhs),
            log_scale: self.log_scale,
            log_abs_det: self.log_abs_det + rhs.log_det().1,
        }
        .renormalized()
    }

    pub fn mul_scaled(&self, rhs: &ScaledMatrix) -> ScaledMatrix {
        ScaledMatrix {
            base: self.base.mul(&rhs.base),
            log_scale: self.log_scale + rhs.log_scale,
            log_abs_det: self.log_abs_det + rhs.log_abs_det,
        }
        .renormalized()
    }

    /// The represented matrix in plain floating point (may underflow).
    pub fn to_matrix(&self) -> Matrix {
        self.base.scale(self.log_scale.exp())
    }
}

/// Logarithms of the singular values `α₁ ≥ … ≥ α_d` and of `|det|`.
#[derive(Clone, Debug, PartialEq)]
pub struct SingularSpectrum {
    log_alphas: Vec<f64>,
    log_det: f64,
}

impl SingularSpectrum {
    /// Builds a spectrum from log singular values in any order.
    pub fn from_log_alphas(mut log_alphas: Vec<f64>) -> Self {
        log_alphas.sort_by(|a, b| b.total_cmp(a));
        let log_det = log_alphas.iter().sum();
        SingularSpectrum {
            log_alphas,
            log_det,
        }
    }

    pub fn log_alphas(&self) -> &[f64] {
        &self.log_alphas
    }

    pub fn log_det(&self) -> f64 {
        self.log_det
    }

    pub fn dim(&self) -> usize {
        self.log_alphas.len()
    }

    /// `log φᵗ` for `t ≥ 0`; see [`log_phi`].
    pub fn log_phi(&self, t: f64) -> Result<f64> {
        log_phi(t, self)
    }
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, sorted
/// nonincreasing.
pub fn symmetric_eigenvalues(m: &Matrix) -> Vec<f64> {
    const MAX_SWEEPS: usize = 64;
    let d = m.dim;
    let mut a = m.data.clone();
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..d)
            .flat_map(|i| (0..d).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * d + j] * a[i * d + j])
            .sum();
        let diag: f64 = (0..d).map(|i| a[i * d + i] * a[i * d + i]).sum();
        if off <= f64::EPSILON * f64::EPSILON * diag * 1e-4 || off == 0.0 {
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                let apq = a[p * d + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * d + p];
                let aqq = a[q * d + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..d {
                    let akp = a[k * d + p];
                    let akq = a[k * d + q];
                    a[k * d + p] = c * akp - s * akq;
                    a[k * d + q] = s * akp + c * akq;
                }
                for k in 0..d {
                    let apk = a[p * d + k];
                    let aqk = a[q * d + k];
                    a[p * d + k] = c * apk - s * aqk;
                    a[q * d + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..d).map(|i| a[i * d + i]).collect();
    eig.sort_by(|x, y| y.total_cmp(x));
    eig
}

/// Singular values of `A` from the eigenvalues of `AᵀA`. The smallest one is
/// recovered from the accumulated `|det A|`, so it keeps full relative
/// accuracy however ill-conditioned the product is.
///
/// For `d > 2` the intermediate values come from the shared scale, so they
/// must stay within the `f64` exponent range of the largest one.
pub fn singular_spectrum(a: &ScaledMatrix) -> Result<SingularSpectrum> {
    let d = a.dim();
    let log_det = a.log_abs_det;
    if !log_det.is_finite() {
        return Err(Error::SingularMatrix);
    }
    let eig = symmetric_eigenvalues(&a.base.gram());
    let mut log_alphas = Vec::with_capacity(d);
    for &e in &eig[..d - 1] {
        if e <= 0.0 {
            return Err(Error::SingularMatrix);
        }
        log_alphas.push(0.5 * e.ln() + a.log_scale);
    }
    let rest: f64 = log_alphas.iter().sum();
    log_alphas.push(log_det - rest);
    log_alphas.sort_by(|x, y| y.total_cmp(x));
    Ok(SingularSpectrum {
        log_alphas,
        log_det,
    })
}

pub fn matrix_spectrum(m: &Matrix) -> Result<SingularSpectrum> {
    singular_spectrum(&ScaledMatrix::new(m))
}

/// `log φᵗ` evaluated on log singular values, without validation of `t`.
#[inline]
pub fn log_phi_raw(t: f64, log_alphas: &[f64]) -> f64 {
    let d = log_alphas.len();
    if t >= d as f64 {
        return t / d as f64 * log_alphas.iter().sum::<f64>();
    }
    let whole = t.floor();
    let l = whole as usize;
    let mut acc = 0.0;
    for &la in &log_alphas[..l] {
        acc += la;
    }
    let frac = t - whole;
    if frac > 0.0 {
        acc += frac * log_alphas[l];
    }
    acc
}

/// Logarithm of the singular value function
/// `φᵗ(A) = α₁⋯α_l · α_{l+1}^{t-l}` (`l = ⌊t⌋ < d`), and `|det A|^{t/d}` for
/// `t ≥ d`.
pub fn log_phi(t: f64, spectrum: &SingularSpectrum) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::NegativeT(t));
    }
    Ok(log_phi_raw(t, &spectrum.log_alphas))
}

fn check_letters(letters: &[Letter], count: usize) -> Result<()> {
    match letters.iter().find(|&&l| l >= count) {
        Some(&l) => Err(Error::LetterOutOfRange {
            letter: l,
            alphabet: count,
        }),
        None => Ok(()),
    }
}

/// `A_w = A_{w₁}⋯A_{wₙ}`, renormalized after every factor. The empty word
/// gives the identity.
pub fn word_product(word: &[Letter], matrices: &[Matrix]) -> Result<ScaledMatrix> {
    check_letters(word, matrices.len())?;
    let dim = matrices.first().map(Matrix::dim).unwrap_or(1);
    Ok(word
        .iter()
        .fold(ScaledMatrix::identity(dim), |acc, &l| acc.mul(&matrices[l])))
}

/// `(log α̲, log ᾱ)`: the log of the smallest singular value over all maps
/// and the log of the largest operator norm.
pub fn log_alpha_bounds(matrices: &[Matrix]) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for m in matrices {
        let s = matrix_spectrum(m)?;
        hi = hi.max(s.log_alphas[0]);
        lo = lo.min(*s.log_alphas.last().unwrap());
    }
    Ok((lo, hi))
}

/// Operator norm `‖A‖ = α₁(A)`.
pub fn operator_norm(m: &Matrix) -> Result<f64> {
    Ok(matrix_spectrum(m)?.log_alphas[0].exp())
}

/// Outcome of [`check_cone_condition`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConeCheck {
    pub holds: bool,
    /// Smallest angular slack, in radians, of a boundary-ray image inside
    /// the cone. Negative when some image leaves the cone; `-π/2` when the
    /// two images of one map fall in opposite halves of the double cone.
    pub margin: f64,
}

/// Checks that every `A_i` and `A_iᵀ` maps the closed double cone
/// `{x : |θ·x| ≥ cos(β/2)|x|}` into its interior (plus the origin).
///
/// Linear images of a convex sector are spanned by the images of its two
/// boundary rays, so only those are tested.
pub fn check_cone_condition(matrices: &[Matrix], theta: [f64; 2], beta: f64) -> Result<ConeCheck> {
    if let Some(m) = matrices.iter().find(|m| m.dim() != 2) {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: m.dim(),
        });
    }
    if !(beta > 0.0 && beta < FRAC_PI_2) {
        return Err(Error::InvalidArgument(format!(
            "cone aperture {beta} not in (0, π/2)"
        )));
    }
    let norm = theta[0].hypot(theta[1]);
    if norm == 0.0 {
        return Err(Error::InvalidArgument(
            "cone axis is the zero vector".into(),
        ));
    }
    let axis = [theta[0] / norm, theta[1] / norm];
    let half = beta / 2.0;
    let rotate = |v: [f64; 2], a: f64| {
        [
            v[0] * a.cos() - v[1] * a.sin(),
            v[0] * a.sin() + v[1] * a.cos(),
        ]
    };
    let rays = [rotate(axis, half), rotate(axis, -half)];

    let mut margin = f64::INFINITY;
    for m in matrices.iter().flat_map(|m| [m.clone(), m.transpose()]) {
        let images: Vec<Vec<f64>> = rays.iter().map(|r| m.mul_vec(r)).collect();
        let dots: Vec<f64> = images
            .iter()
            .map(|v| axis[0] * v[0] + axis[1] * v[1])
            .collect();
        if dots[0] * dots[1] <= 0.0 {
            margin = margin.min(-FRAC_PI_2);
            continue;
        }
        for (v, dot) in images.iter().zip(&dots) {
            let len = v[0].hypot(v[1]);
            let angle = (dot.abs() / len).min(1.0).acos();
            margin = margin.min(half - angle);
        }
    }
    Ok(ConeCheck {
        holds: margin > CONE_MARGIN_TOL,
        margin,
    })
}

/// Result of [`probe_quasimultiplicativity`]. The constant is only the
/// largest ratio seen among the probed word pairs, not a certified bound.
#[derive(Clone, Debug, PartialEq)]
pub struct QuasiProbe {
    pub t: f64,
    pub depth: usize,
    pub log_constant: f64,
    pub pairs: usize,
}

impl QuasiProbe {
    pub fn constant(&self) -> f64 {
        self.log_constant.exp()
    }
}

/// Largest value of `φᵗ(A_i)φᵗ(A_j) / φᵗ(A_{ij})` over allowed words `i`,
/// `j` of lengths `1..=depth` whose concatenation is allowed. Never below 1
/// (the value reported for an empty probe).
pub fn probe_quasimultiplicativity(
    t: f64,
    depth: usize,
    automaton: &SubshiftAutomaton,
    matrices: &[Matrix],
) -> Result<QuasiProbe> {
    if !(t >= 0.0) {
        return Err(Error::NegativeT(t));
    }
    if depth == 0 {
        return Err(Error::InvalidArgument(
            "probe depth must be at least 1".into(),
        ));
    }
    check_letters(&[automaton.alphabet() - 1], matrices.len())?;
    let dim = matrices[0].dim();
    let mut words: Vec<(Vec<Letter>, ScaledMatrix, f64)> = Vec::new();
    let mut failure = None;
    automaton.walk(
        depth,
        ScaledMatrix::identity(dim),
        |p, a| p.mul(&matrices[a]),
        |w, p| match singular_spectrum(p) {
            Ok(s) => words.push((w.to_vec(), p.clone(), log_phi_raw(t, s.log_alphas()))),
            Err(e) => failure = Some(e),
        },
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let mut log_constant: f64 = 0.0;
    let mut pairs = 0;
    for (wi, pi, phi_i) in &words {
        let Some(node) = automaton.node_after(wi) else {
            continue;
        };
        for (wj, pj, phi_j) in &words {
            if wj
                .iter()
                .try_fold(node, |n, &a| automaton.step(n, a))
                .is_none()
            {
                continue;
            }
            let joint = singular_spectrum(&pi.mul_scaled(pj))?;
            log_constant = log_constant.max(phi_i + phi_j - log_phi_raw(t, joint.log_alphas()));
            pairs += 1;
        }
    }
    Ok(QuasiProbe {
        t,
        depth,
        log_constant,
        pairs,
    })
}
