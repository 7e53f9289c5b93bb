//! Finite-depth topological pressure.
//!
//! For a depth `n` the quantity `(1/n) log Σ_{w ∈ K_n} φᵗ(A_w)` is an upper
//! bound for the pressure at every `n` (the sequence of log-sums is
//! subadditive). Lower bounds need a quasi-multiplicativity constant and are
//! always returned together with that assumption.

use rayon::prelude::*;

use crate::diagonal::DiagonalPair;
use crate::error::{Error, Result};
use crate::linalg::{log_phi_raw, probe_quasimultiplicativity, singular_spectrum, ScaledMatrix};
use crate::numeric::{bisect_decreasing, log_sum_exp};
use crate::system::MatrixSystem;

/// Default finite-difference step for pressure derivatives.
pub const DEFAULT_STEP: f64 = 1e-3;

const LSE_CHUNK: usize = 1 << 12;

/// Per-word log singular values of `A_w` for every `w ∈ K_n`, in
/// lexicographic word order.
#[derive(Clone, Debug)]
pub struct SpectrumTable {
    depth: usize,
    dim: usize,
    log_alphas: Vec<f64>,
}

impl SpectrumTable {
    /// Enumerates `K_n`, subtrees under distinct first letters in parallel.
    pub fn build(system: &MatrixSystem, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("depth must be at least 1".into()));
        }
        system.budget().check(system.automaton(), n)?;
        let automaton = system.automaton();
        let matrices = system.matrices();
        let dim = system.dim();
        let parts: Vec<Result<Vec<f64>>> = automaton
            .first_letters()
            .into_par_iter()
            .map(|a| {
                let start = ScaledMatrix::new(&matrices[a]);
                let mut out = Vec::new();
                if n == 1 {
                    out.extend_from_slice(singular_spectrum(&start)?.log_alphas());
                    return Ok(out);
                }
                let mut failure = None;
                automaton.walk_under(
                    &[a],
                    n,
                    start,
                    |p, l| p.mul(&matrices[l]),
                    |w, p| {
                        if w.len() == n {
                            match singular_spectrum(p) {
                                Ok(s) => out.extend_from_slice(s.log_alphas()),
                                Err(e) => failure = Some(e),
                            }
                        }
                    },
                );
                match failure {
                    Some(e) => Err(e),
                    None => Ok(out),
                }
            })
            .collect();
        let mut log_alphas = Vec::new();
        for p in parts {
            log_alphas.extend(p?);
        }
        Ok(SpectrumTable {
            depth: n,
            dim,
            log_alphas,
        })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.log_alphas.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.log_alphas.is_empty()
    }

    /// Log singular values of the `i`-th word of `K_n`.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.log_alphas[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.log_alphas.chunks(self.dim)
    }

    /// `log φᵗ(A_w)` for every word, in table order.
    pub fn log_phis(&self, t: f64) -> Vec<f64> {
        self.rows().map(|r| log_phi_raw(t, r)).collect()
    }

    /// `log Σ φᵗ(A_w)`. Chunks are reduced in parallel and combined in a
    /// fixed order, so the result does not depend on the thread count.
    pub fn log_partition_sum(&self, t: f64) -> f64 {
        let dim = self.dim;
        let partial: Vec<f64> = self
            .log_alphas
            .par_chunks(LSE_CHUNK * dim)
            .map(|chunk| {
                let v: Vec<f64> = chunk.chunks(dim).map(|r| log_phi_raw(t, r)).collect();
                log_sum_exp(&v)
            })
            .collect();
        log_sum_exp(&partial)
    }
}

/// The depth-`n` pressure `t ↦ (1/n) log Σ_{K_n} φᵗ(A_w)` with its
/// per-word data cached, so evaluating many `t` costs one enumeration.
#[derive(Clone, Debug)]
pub enum DepthPressure {
    Enumerated(SpectrumTable),
    /// Two diagonal maps on the full shift: exact binomial sum.
    Diagonal {
        pair: DiagonalPair,
        depth: usize,
    },
}

impl DepthPressure {
    /// Uses the binomial fast path when the system is two diagonal maps on
    /// the full shift, otherwise enumerates `K_n`.
    pub fn new(system: &MatrixSystem, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("depth must be at least 1".into()));
        }
        if system.automaton().is_full_shift() {
            if let Ok(pair) = DiagonalPair::new(system.matrices()) {
                return Ok(DepthPressure::Diagonal { pair, depth: n });
            }
        }
        Self::enumerated(system, n)
    }

    pub fn enumerated(system: &MatrixSystem, n: usize) -> Result<Self> {
        Ok(DepthPressure::Enumerated(SpectrumTable::build(system, n)?))
    }

    pub fn depth(&self) -> usize {
        match self {
            DepthPressure::Enumerated(table) => table.depth(),
            DepthPressure::Diagonal { depth, .. } => *depth,
        }
    }

    pub fn log_partition_sum(&self, t: f64) -> f64 {
        match self {
            DepthPressure::Enumerated(table) => table.log_partition_sum(t),
            DepthPressure::Diagonal { pair, depth } => pair.log_partition_sum(t, *depth),
        }
    }

    pub fn pressure(&self, t: f64) -> f64 {
        self.log_partition_sum(t) / self.depth() as f64
    }
}

/// `log Σ_{w ∈ K_n} φᵗ(A_w)` at one `(t, n)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PartitionSum {
    pub t: f64,
    pub n: usize,
    pub log_z: f64,
}

pub fn log_partition_sum(t: f64, n: usize, system: &MatrixSystem) -> Result<PartitionSum> {
    check_t(t)?;
    let log_z = SpectrumTable::build(system, n)?.log_partition_sum(t);
    Ok(PartitionSum { t, n, log_z })
}

fn check_t(t: f64) -> Result<()> {
    if t >= 0.0 {
        Ok(())
    } else {
        Err(Error::NegativeT(t))
    }
}

/// Hypothesis under which a lower bound was derived.
#[derive(Clone, Debug, PartialEq)]
pub enum Assumption {
    None,
    /// `φᵗ(A_i)φᵗ(A_j) ≤ D φᵗ(A_{ij})` for all allowed words, with the block
    /// length `m` used in the bound. `probe_depth` is set when `D` came from
    /// a finite probe rather than from the caller.
    QuasiMultiplicative {
        constant: f64,
        block: usize,
        probe_depth: Option<usize>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct PressureEstimate {
    pub t: f64,
    pub upper: f64,
    pub n_used: usize,
    pub lower: Option<f64>,
    pub assumption: Assumption,
}

/// `min_n (1/n) log Z_n(t)` over the given depths.
pub fn pressure_upper(t: f64, depths: &[usize], system: &MatrixSystem) -> Result<PressureEstimate> {
    check_t(t)?;
    if depths.is_empty() {
        return Err(Error::InvalidArgument("no depths given".into()));
    }
    let mut best: Option<(f64, usize)> = None;
    for &n in depths {
        let p = DepthPressure::new(system, n)?.pressure(t);
        if best.is_none_or(|(b, _)| p < b) {
            best = Some((p, n));
        }
    }
    let (upper, n_used) = best.unwrap();
    Ok(PressureEstimate {
        t,
        upper,
        n_used,
        lower: None,
        assumption: Assumption::None,
    })
}

/// Parameters for a quasi-multiplicative lower bound. When `constant` is
/// `None` the constant is probed at `probe_depth` for each `t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuasiMultiplicativity {
    pub block: usize,
    pub constant: Option<f64>,
    pub probe_depth: usize,
}

impl QuasiMultiplicativity {
    fn resolve(&self, t: f64, system: &MatrixSystem) -> Result<(f64, Option<usize>)> {
        match self.constant {
            Some(d) if d >= 1.0 => Ok((d, None)),
            Some(d) => Err(Error::InvalidArgument(format!(
                "constant D = {d} must be at least 1"
            ))),
            None => {
                let probe = probe_quasimultiplicativity(
                    t,
                    self.probe_depth,
                    system.automaton(),
                    system.matrices(),
                )?;
                Ok((probe.constant(), Some(self.probe_depth)))
            }
        }
    }
}

/// `(1/m)(log Z_m(t) − log D)`. Valid as a lower bound only if the constant
/// holds for every pair of allowed words, hence the attached assumption.
pub fn pressure_lower(
    t: f64,
    quasi: &QuasiMultiplicativity,
    system: &MatrixSystem,
) -> Result<PressureEstimate> {
    check_t(t)?;
    let (constant, probe_depth) = quasi.resolve(t, system)?;
    let table = DepthPressure::new(system, quasi.block)?;
    let m = quasi.block as f64;
    let log_z = table.log_partition_sum(t);
    Ok(PressureEstimate {
        t,
        upper: log_z / m,
        n_used: quasi.block,
        lower: Some((log_z - constant.ln()) / m),
        assumption: Assumption::QuasiMultiplicative {
            constant,
            block: quasi.block,
            probe_depth,
        },
    })
}

/// Bracket for the zero of the pressure.
#[derive(Clone, Debug, PartialEq)]
pub struct DimensionBracket {
    /// Upper end of the final bisection bracket for the zero of the depth-n
    /// pressure; an upper bound for the singularity dimension.
    pub s_upper: f64,
    pub s_lower: Option<f64>,
    pub n_used: usize,
    pub tolerance: f64,
    pub assumption: Assumption,
}

/// Zero of `t ↦ (1/n) log Z_n(t)` by bisection on `[0, T]` with
/// `T = log #K_1 / log(1/ᾱ) + d`, at which the depth-n pressure is negative.
pub fn singularity_dimension(
    n: usize,
    tol: f64,
    system: &MatrixSystem,
    lower: Option<&QuasiMultiplicativity>,
) -> Result<DimensionBracket> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance {tol} must be positive"
        )));
    }
    system.check_contractive()?;
    let (_, log_top) = system.log_alpha_bounds()?;
    let first = system.automaton().count(1) as f64;
    let t_max = first.ln() / -log_top + system.dim() as f64;

    let depth_n = DepthPressure::new(system, n)?;
    let (_, s_upper) = bisect_decreasing(|t| depth_n.pressure(t), 0.0, t_max, tol);

    let (s_lower, assumption) = match lower {
        None => (None, Assumption::None),
        Some(q) => {
            let block = DepthPressure::new(system, q.block)?;
            let m = q.block as f64;
            let mut failure = None;
            let mut last: (f64, Option<usize>) = (1.0, None);
            let (lo, _) = bisect_decreasing(
                |t| match q.resolve(t, system) {
                    Ok((d, probe)) => {
                        last = (last.0.max(d), probe);
                        (block.log_partition_sum(t) - d.ln()) / m
                    }
                    Err(e) => {
                        failure = Some(e);
                        -1.0
                    }
                },
                0.0,
                t_max,
                tol,
            );
            if let Some(e) = failure {
                return Err(e);
            }
            (
                Some(lo),
                Assumption::QuasiMultiplicative {
                    constant: last.0,
                    block: q.block,
                    probe_depth: last.1,
                },
            )
        }
    };
    Ok(DimensionBracket {
        s_upper,
        s_lower,
        n_used: n,
        tolerance: tol,
        assumption,
    })
}

/// `max{log(βᵗ + λᵗ), log(γᵗ + θᵗ)}` for `A_0 = diag(β, γ)`,
/// `A_1 = diag(λ, θ)` and `0 ≤ t ≤ 1`.
pub fn diagonal_pressure(t: f64, matrices: &[crate::linalg::Matrix]) -> Result<f64> {
    if matrices.len() != 2 {
        return Err(Error::InvalidArgument(format!(
            "need two maps, got {}",
            matrices.len()
        )));
    }
    for (i, m) in matrices.iter().enumerate() {
        if m.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: m.dim(),
            });
        }
        if !m.is_diagonal() {
            return Err(Error::NotDiagonal { map: i });
        }
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::TOutOfRange(t));
    }
    let (a, b) = (
        matrices[0].diagonal_entries(),
        matrices[1].diagonal_entries(),
    );
    let first = (a[0].abs().powf(t) + b[0].abs().powf(t)).ln();
    let second = (a[1].abs().powf(t) + b[1].abs().powf(t)).ln();
    Ok(first.max(second))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// One-sided derivative of `f` at `t` by Richardson extrapolation of the
/// difference quotients with steps `h` and `h/2`. The pressure is only
/// convex between integers, so a step window `2h` containing an integer
/// other than `t` itself is refused.
pub fn pressure_derivative<F: Fn(f64) -> f64>(f: F, t: f64, side: Side, h: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "derivative needs t > 0, got {t}"
        )));
    }
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("step {h} must be positive")));
    }
    let (from, to) = match side {
        Side::Left => (t - 2.0 * h, t),
        Side::Right => (t, t + 2.0 * h),
    };
    let k = from.floor() + 1.0;
    if k < to {
        return Err(Error::IntegerCrossing {
            from,
            to,
            integer: k as i64,
        });
    }
    Ok(one_sided(&f, t, side, h))
}

fn one_sided<F: Fn(f64) -> f64>(f: &F, t: f64, side: Side, h: f64) -> f64 {
    let f0 = f(t);
    let quotient = |step: f64| match side {
        Side::Right => (f(t + step) - f0) / step,
        Side::Left => (f0 - f(t - step)) / step,
    };
    2.0 * quotient(h / 2.0) - quotient(h)
}

/// A located jump in the derivative of the pressure.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Kink {
    pub t: f64,
    pub jump: f64,
}

const KINK_MARGIN: f64 = 4.0;

/// Scans `f` on a uniform grid over `[start, end]` for points where the
/// derivative jumps by more than `threshold`. Grid cells whose derivative
/// increase exceeds a quarter of the threshold are merged into candidate
/// intervals, each narrowed by bisection on the derivative gap; a candidate
/// is kept if `f'(t+) − f'(t−)`, read `4h` outside the final bracket,
/// still exceeds the threshold.
pub fn detect_kink<F: Fn(f64) -> f64>(
    f: F,
    start: f64,
    end: f64,
    grid: usize,
    threshold: f64,
    h: f64,
) -> Result<Vec<Kink>> {
    if grid < 16 {
        return Err(Error::InvalidArgument(format!(
            "grid needs at least 16 points, got {grid}"
        )));
    }
    if !(end > start) || !(h > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "bad range [{start}, {end}] or step {h}"
        )));
    }
    let spacing = (end - start) / (grid - 1) as f64;
    if 8.0 * h >= spacing {
        return Err(Error::InvalidArgument(format!(
            "step {h} too large for grid spacing {spacing}"
        )));
    }
    let points: Vec<f64> = (0..grid).map(|i| start + i as f64 * spacing).collect();
    let slope = |t: f64| {
        if t + h <= end {
            one_sided(&f, t, Side::Right, h)
        } else {
            one_sided(&f, t, Side::Left, h)
        }
    };
    let slopes: Vec<f64> = points.iter().map(|&t| slope(t)).collect();

    let mut intervals: Vec<(f64, f64)> = Vec::new();
    for i in 0..grid - 1 {
        if slopes[i + 1] - slopes[i] > threshold / 4.0 {
            match intervals.last_mut() {
                Some(last) if last.1 == points[i] => last.1 = points[i + 1],
                _ => intervals.push((points[i], points[i + 1])),
            }
        }
    }

    let mut kinks = Vec::new();
    for (mut lo, mut hi) in intervals {
        let (mut s_lo, mut s_hi) = (slope(lo), slope(hi));
        while hi - lo > 8.0 * h {
            let mid = 0.5 * (lo + hi);
            let s_mid = slope(mid);
            if s_mid - s_lo >= s_hi - s_mid {
                hi = mid;
                s_hi = s_mid;
            } else {
                lo = mid;
                s_lo = s_mid;
            }
        }
        // a finite-depth pressure rounds the corner over a few steps, so the
        // one-sided slopes are read MARGIN steps outside the bracket
        let (a, b) = (lo - KINK_MARGIN * h, hi + KINK_MARGIN * h);
        let left = if a - h >= start {
            one_sided(&f, a, Side::Left, h)
        } else {
            s_lo
        };
        let right = if b + h <= end {
            one_sided(&f, b, Side::Right, h)
        } else {
            s_hi
        };
        let jump = right - left;
        if jump > threshold {
            kinks.push(Kink {
                t: 0.5 * (lo + hi),
                jump,
            });
        }
    }
    Ok(kinks)
}

/// `(t, P_n(t))` pairs on a uniform grid of `steps + 1` points.
pub fn pressure_curve(
    pressure: &DepthPressure,
    start: f64,
    end: f64,
    steps: usize,
) -> Vec<(f64, f64)> {
    let steps = steps.max(1);
    (0..=steps)
        .map(|i| {
            let t = start + (end - start) * i as f64 / steps as f64;
            (t, pressure.pressure(t))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::symbolic::SubshiftSpec;
    use std::f64::consts::LN_2;

    fn shear(lambda: f64) -> Matrix {
        Matrix::from_rows(&[vec![lambda, lambda], vec![0.0, lambda]]).unwrap()
    }

    fn not_unique() -> MatrixSystem {
        MatrixSystem::full_shift(vec![
            Matrix::diagonal(&[0.5, 0.25]),
            Matrix::diagonal(&[0.25, 0.5]),
        ])
        .unwrap()
    }

    fn nondifferentiable() -> MatrixSystem {
        MatrixSystem::full_shift(vec![
            Matrix::diagonal(&[0.25, 1.0 / 32.0]),
            Matrix::diagonal(&[0.25, 0.5]),
        ])
        .unwrap()
    }

    #[test]
    fn zero_t_counts_words() {
        let sys =
            MatrixSystem::full_shift(vec![shear(0.25), Matrix::diagonal(&[0.3, 0.2])]).unwrap();
        for n in [1, 3, 8] {
            let z = log_partition_sum(0.0, n, &sys).unwrap();
            assert!((z.log_z - n as f64 * LN_2).abs() < 1e-12);
        }
        let est = pressure_upper(0.0, &[2, 5, 9], &sys).unwrap();
        assert!((est.upper - LN_2).abs() < 1e-12);
    }

    #[test]
    fn equal_maps_identity() {
        let a = shear(0.25);
        let sys = MatrixSystem::full_shift(vec![a.clone(), a.clone()]).unwrap();
        for n in [1, 4, 9] {
            let power = crate::linalg::word_product(&vec![0; n], &[a.clone()]).unwrap();
            let s = singular_spectrum(&power).unwrap();
            for t in [0.2, 0.5, 1.3, 2.0, 2.5] {
                let z = log_partition_sum(t, n, &sys).unwrap().log_z;
                let expected = n as f64 * LN_2 + log_phi_raw(t, s.log_alphas());
                assert!((z - expected).abs() < 1e-12, "n = {n}, t = {t}");
            }
        }
    }

    #[test]
    fn diagonal_fast_path_matches_enumeration() {
        let sys = nondifferentiable();
        for n in [1, 5, 11] {
            let fast = DepthPressure::new(&sys, n).unwrap();
            assert!(matches!(fast, DepthPressure::Diagonal { .. }));
            let slow = DepthPressure::enumerated(&sys, n).unwrap();
            for t in [0.0, 0.4, 0.88, 1.0, 1.7, 2.3] {
                assert!((fast.pressure(t) - slow.pressure(t)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn diagonal_pressure_examples() {
        let half = Matrix::diagonal(&[0.5, 0.5]);
        for t in [0.0, 0.3, 1.0] {
            let p = diagonal_pressure(t, &[half.clone(), half.clone()]).unwrap();
            assert!((p - (2.0 * 2f64.powf(-t)).ln()).abs() < 1e-14);
        }
        let sys = nondifferentiable();
        assert!(diagonal_pressure(0.5, sys.matrices()).unwrap().abs() < 1e-15);
        let s = 0.6942419136306174;
        assert!(diagonal_pressure(s, not_unique().matrices()).unwrap().abs() < 1e-14);
        assert_eq!(
            diagonal_pressure(1.5, sys.matrices()),
            Err(Error::TOutOfRange(1.5))
        );
        let sh = shear(0.25);
        assert_eq!(
            diagonal_pressure(0.5, &[half, sh]),
            Err(Error::NotDiagonal { map: 1 })
        );
    }

    #[test]
    fn budget_is_enforced() {
        let sys = not_unique().with_budget(crate::system::Budget {
            max_words: 1000,
            max_depth: 64,
        });
        assert!(matches!(
            log_partition_sum(0.5, 10, &sys),
            Err(Error::DepthBudgetExceeded {
                depth: 10,
                words: 1024,
                budget: 1000
            })
        ));
        assert!(log_partition_sum(0.5, 9, &sys).is_ok());
    }

    #[test]
    fn single_similarity_has_dimension_one() {
        let sys = MatrixSystem::full_shift(vec![
            Matrix::diagonal(&[0.5, 0.5]),
            Matrix::diagonal(&[0.5, 0.5]),
        ])
        .unwrap();
        let b = singularity_dimension(6, 1e-10, &sys, None).unwrap();
        assert!((b.s_upper - 1.0).abs() < 1e-9, "{b:?}");
        assert!(b.s_upper >= 1.0 - 1e-15);
    }

    #[test]
    fn non_contractive_is_rejected() {
        let sys = MatrixSystem::full_shift(vec![
            Matrix::diagonal(&[1.01, 0.5]),
            Matrix::diagonal(&[0.5, 0.5]),
        ])
        .unwrap();
        assert!(matches!(
            singularity_dimension(4, 1e-6, &sys, None),
            Err(Error::NonContractive { map: 0, .. })
        ));
    }

    #[test]
    fn lower_bound_with_unit_constant() {
        let sys = MatrixSystem::full_shift(vec![
            Matrix::diagonal(&[0.5, 0.25]),
            Matrix::diagonal(&[1.0 / 3.0, 0.125]),
        ])
        .unwrap();
        let q = QuasiMultiplicativity {
            block: 8,
            constant: None,
            probe_depth: 4,
        };
        let est = pressure_lower(0.5, &q, &sys).unwrap();
        let lower = est.lower.unwrap();
        assert!((lower - est.upper).abs() < 1e-12);
        let exact = diagonal_pressure(0.5, sys.matrices()).unwrap();
        assert!(lower <= exact + 1e-12);
        let upper = pressure_upper(0.5, &[4, 8, 16], &sys).unwrap().upper;
        assert!(lower <= upper);
        match est.assumption {
            Assumption::QuasiMultiplicative {
                constant,
                block: 8,
                probe_depth: Some(4),
            } => {
                assert!((constant - 1.0).abs() < 1e-12)
            }
            other => panic!("{other:?}"),
        }
        let b = singularity_dimension(12, 1e-9, &sys, Some(&q)).unwrap();
        assert!(b.s_lower.unwrap() <= b.s_upper);
    }

    #[test]
    fn lower_bound_equal_maps() {
        let a = shear(0.25);
        let sys = MatrixSystem::full_shift(vec![a.clone(), a.clone()]).unwrap();
        let q = QuasiMultiplicativity {
            block: 6,
            constant: Some(1.0),
            probe_depth: 0,
        };
        let est = pressure_lower(0.5, &q, &sys).unwrap();
        let power = crate::linalg::word_product(&[0; 6], &[a]).unwrap();
        let expected =
            LN_2 + log_phi_raw(0.5, singular_spectrum(&power).unwrap().log_alphas()) / 6.0;
        assert!((est.lower.unwrap() - expected).abs() < 1e-12);
        let probed = QuasiMultiplicativity {
            block: 6,
            constant: None,
            probe_depth: 6,
        };
        let est = pressure_lower(0.5, &probed, &sys).unwrap();
        assert!(matches!(
            est.assumption,
            Assumption::QuasiMultiplicative {
                block: 6,
                probe_depth: Some(6),
                ..
            }
        ));
        assert!(est.lower.unwrap() < est.upper);
        let bad = QuasiMultiplicativity {
            block: 6,
            constant: Some(0.5),
            probe_depth: 0,
        };
        assert!(pressure_lower(0.5, &bad, &sys).is_err());
    }

    #[test]
    fn derivative_of_affine_pressure() {
        let m = Matrix::diagonal(&[0.3, 0.3]);
        let sys = MatrixSystem::full_shift(vec![m.clone(), m]).unwrap();
        let p = DepthPressure::new(&sys, 8).unwrap();
        for side in [Side::Left, Side::Right] {
            let d = pressure_derivative(|t| p.pressure(t), 0.4, side, DEFAULT_STEP).unwrap();
            assert!((d - 0.3f64.ln()).abs() < 1e-9);
        }
        assert!(matches!(
            pressure_derivative(|t| p.pressure(t), 0.9995, Side::Right, DEFAULT_STEP),
            Err(Error::IntegerCrossing { integer: 1, .. })
        ));
        assert!(pressure_derivative(|t| p.pressure(t), 1.0, Side::Right, DEFAULT_STEP).is_ok());
        assert!(pressure_derivative(|t| p.pressure(t), 1.0, Side::Left, DEFAULT_STEP).is_ok());
        assert!(pressure_derivative(|t| p.pressure(t), 0.001, Side::Left, DEFAULT_STEP).is_err());
    }

    #[test]
    fn kink_branches_of_nondifferentiable_example() {
        let p = DepthPressure::new(&nondifferentiable(), 4096).unwrap();
        let f = |t| p.pressure(t);
        let d = pressure_derivative(f, 0.6, Side::Right, DEFAULT_STEP).unwrap();
        assert!((d + 2.0 * LN_2).abs() < 1e-2, "{d}");
        let t: f64 = 0.95;
        let (a, b) = (32f64.powf(-t), 2f64.powf(-t));
        let analytic = -(5.0 * LN_2 * a + LN_2 * b) / (a + b);
        let d = pressure_derivative(f, t, Side::Left, DEFAULT_STEP).unwrap();
        assert!((d - analytic).abs() < 1e-2, "{d} vs {analytic}");
    }

    #[test]
    fn no_kinks_on_smooth_pressures() {
        let p = DepthPressure::new(&not_unique(), 4096).unwrap();
        assert!(
            detect_kink(|t| p.pressure(t), 0.05, 0.95, 32, 0.1, DEFAULT_STEP)
                .unwrap()
                .is_empty()
        );
        let m = Matrix::diagonal(&[0.3, 0.3]);
        let sys = MatrixSystem::full_shift(vec![m.clone(), m]).unwrap();
        let p = DepthPressure::new(&sys, 64).unwrap();
        assert!(
            detect_kink(|t| p.pressure(t), 0.05, 0.95, 16, 0.1, DEFAULT_STEP)
                .unwrap()
                .is_empty()
        );
        assert!(detect_kink(|t| t, 0.0, 1.0, 8, 0.1, DEFAULT_STEP).is_err());
    }

    #[test]
    fn subshift_pressure_counts_allowed_words() {
        let spec = SubshiftSpec::new(2, vec!["01".parse().unwrap()]).unwrap();
        let m = Matrix::diagonal(&[0.5, 0.5]);
        let sys = MatrixSystem::new(spec, vec![m.clone(), m]).unwrap();
        let z = log_partition_sum(1.0, 10, &sys).unwrap();
        assert!((z.log_z - (11f64.ln() + 10.0 * 0.5f64.ln())).abs() < 1e-12);
    }
}
