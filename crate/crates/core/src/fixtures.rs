//! Named reference systems with known pressure, dimension or measure
//! behaviour, plus two classical attractors used as box-counting oracles.

use crate::error::{Error, Result};
use crate::geometry::AffineIfs;
use crate::linalg::Matrix;
use crate::measures::Measure;
use crate::symbolic::SubshiftSpec;
use crate::system::MatrixSystem;

pub const NAMES: [&str; 4] = [
    "not-unique",
    "no-semiconformal",
    "nondifferentiable",
    "tractable",
];

/// Looks up one of [`NAMES`], or `cantor`, `unit-square`, `two-points`.
pub fn by_name(name: &str) -> Result<AffineIfs> {
    match name {
        "not-unique" => not_unique(),
        "no-semiconformal" => no_semiconformal(),
        "nondifferentiable" => nondifferentiable(),
        "tractable" => tractable(),
        "cantor" => cantor(),
        "unit-square" => unit_square(),
        "two-points" => two_points(),
        other => Err(Error::InvalidArgument(format!("unknown fixture {other:?}"))),
    }
}

pub const NOT_UNIQUE_LAMBDA: f64 = 0.5;
pub const NOT_UNIQUE_GAMMA: f64 = 0.25;

/// `diag(λ, γ)` and `diag(γ, λ)` with `λ = 1/2`, `γ = 1/4`, translated so the
/// second map fixes `(1, 1)`. Two distinct ergodic equilibrium measures at
/// the singularity dimension.
pub fn not_unique() -> Result<AffineIfs> {
    let (l, g) = (NOT_UNIQUE_LAMBDA, NOT_UNIQUE_GAMMA);
    let sys = MatrixSystem::full_shift(vec![Matrix::diagonal(&[l, g]), Matrix::diagonal(&[g, l])])?;
    AffineIfs::new(sys, vec![vec![0.0, 0.0], vec![1.0 - g, 1.0 - l]])
}

/// Root of `2⁻ˢ + 4⁻ˢ = 1`: `2⁻ˢ` is the golden section `(√5 − 1)/2`.
pub fn not_unique_dimension() -> f64 {
    -((5f64.sqrt() - 1.0) / 2.0).log2()
}

/// The two Bernoulli equilibrium measures `μ = (λˢ, γˢ)` and `ν = (γˢ, λˢ)`.
pub fn not_unique_measures() -> Result<(Measure, Measure)> {
    let s = not_unique_dimension();
    let (a, b) = (NOT_UNIQUE_LAMBDA.powf(s), NOT_UNIQUE_GAMMA.powf(s));
    let total = a + b;
    Ok((
        Measure::bernoulli(vec![a / total, b / total])?,
        Measure::bernoulli(vec![b / total, a / total])?,
    ))
}

pub const SHEAR_LAMBDA: f64 = 0.25;

/// `A_0 = A_1 = λ[[1,1],[0,1]]`, `λ = 1/4`, with translations `0` and
/// `(1, 1)`; no semiconformal measure exists at the dimension `1/2`.
pub fn no_semiconformal() -> Result<AffineIfs> {
    let a = Matrix::from_rows(&[vec![SHEAR_LAMBDA, SHEAR_LAMBDA], vec![0.0, SHEAR_LAMBDA]])?;
    let sys = MatrixSystem::full_shift(vec![a.clone(), a])?;
    AffineIfs::new(sys, vec![vec![0.0, 0.0], vec![1.0, 1.0]])
}

/// `diag(1/4, 1/32)` and `diag(1/4, 1/2)`, whose pressure has a corner in
/// `(1/2, 1)`.
pub fn nondifferentiable() -> Result<AffineIfs> {
    let sys = MatrixSystem::full_shift(vec![
        Matrix::diagonal(&[0.25, 1.0 / 32.0]),
        Matrix::diagonal(&[0.25, 0.5]),
    ])?;
    AffineIfs::new(sys, vec![vec![0.0, 0.0], vec![0.75, 0.5]])
}

/// Location of the corner: `t* = −log₂ y` with `y³ + y² + y = 1`.
pub fn nondifferentiable_kink() -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let y = 0.5 * (lo + hi);
        if y * y * y + y * y + y < 1.0 {
            lo = y;
        } else {
            hi = y;
        }
    }
    -(0.5 * (lo + hi)).log2()
}

pub const TRACTABLE_LAMBDA_BAR: f64 = 1.0 / 3.0;
pub const TRACTABLE_BETA: [f64; 2] = [0.17, 0.13];
pub const TRACTABLE_THETA: [f64; 2] = [0.13, 0.17];

/// Positive matrices `[[λ̄−β_i, θ_i],[β_i, λ̄−θ_i]]` with `λ̄ = 1/3` whose
/// attractor lies on the line `x + y = 1`, where both maps are similitudes
/// of ratio `1/30`.
pub fn tractable() -> Result<AffineIfs> {
    let l = TRACTABLE_LAMBDA_BAR;
    let mut matrices = Vec::new();
    let mut translations = Vec::new();
    for (b, t) in TRACTABLE_BETA.into_iter().zip(TRACTABLE_THETA) {
        matrices.push(Matrix::from_rows(&[vec![l - b, t], vec![b, l - t]])?);
        translations.push(vec![(1.0 - l) * t / (b + t), (1.0 - l) * b / (b + t)]);
    }
    AffineIfs::new(MatrixSystem::full_shift(matrices)?, translations)
}

/// Middle-third Cantor set on the line.
pub fn cantor() -> Result<AffineIfs> {
    let m = Matrix::diagonal(&[1.0 / 3.0]);
    AffineIfs::new(
        MatrixSystem::full_shift(vec![m.clone(), m])?,
        vec![vec![0.0], vec![2.0 / 3.0]],
    )
}

/// Four half-scale copies filling the unit square.
pub fn unit_square() -> Result<AffineIfs> {
    let half = Matrix::diagonal(&[0.5, 0.5]);
    let corners = vec![
        vec![0.0, 0.0],
        vec![0.5, 0.0],
        vec![0.0, 0.5],
        vec![0.5, 0.5],
    ];
    AffineIfs::new(MatrixSystem::full_shift(vec![half; 4])?, corners)
}

/// The `not-unique` maps restricted to the two fixed sequences `0^∞`, `1^∞`.
pub fn two_points() -> Result<AffineIfs> {
    let base = not_unique()?;
    let spec = SubshiftSpec::new(2, vec!["01".parse()?, "10".parse()?])?;
    let sys = MatrixSystem::new(spec, base.system().matrices().to_vec())?;
    AffineIfs::new(sys, base.translations().to_vec())
}
