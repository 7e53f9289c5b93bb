//! Invariant measures on the symbol space and the finite-depth quantities
//! built from them: entropy, t-energy, Lyapunov exponents, the Jensen gap
//! to the partition sum, Gibbs ratios, and the averaged empirical measures
//! whose limits are equilibrium measures.
//!
//! Every finite-depth value is returned together with its depth.

use std::collections::BTreeMap;

use crate::diagonal::DiagonalPair;
use crate::error::{Error, Result};
use crate::linalg::{log_phi_raw, singular_spectrum, ScaledMatrix};
use crate::numeric::log_sum_exp;
use crate::pressure::SpectrumTable;
use crate::symbolic::{Letter, SubshiftSpec, Word};
use crate::system::MatrixSystem;

const PROB_TOL: f64 = 1e-12;
const STATIONARY_TOL: f64 = 1e-10;
const CONSISTENCY_TOL: f64 = 1e-9;

fn check_letters(w: &[Letter], alphabet: usize) -> Result<()> {
    match w.iter().find(|&&l| l >= alphabet) {
        Some(&l) => Err(Error::LetterOutOfRange {
            letter: l,
            alphabet,
        }),
        None => Ok(()),
    }
}

fn check_probability_vector(p: &[f64], what: &str) -> Result<()> {
    if p.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(Error::InvalidMeasure(format!(
            "{what} has a negative or non-finite entry"
        )));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > PROB_TOL {
        return Err(Error::InvalidMeasure(format!(
            "{what} sums to {total}, not 1"
        )));
    }
    Ok(())
}

fn ln_or_neg_inf(x: f64) -> f64 {
    if x > 0.0 {
        x.ln()
    } else {
        f64::NEG_INFINITY
    }
}

/// Product measure with `μ([i]) = p_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct BernoulliMeasure {
    p: Vec<f64>,
    log_p: Vec<f64>,
}

impl BernoulliMeasure {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        check_probability_vector(&p, "probability vector")?;
        if p.iter().any(|&x| x <= 0.0) {
            return Err(Error::InvalidMeasure(
                "Bernoulli weights must be strictly positive".into(),
            ));
        }
        let log_p = p.iter().map(|x| x.ln()).collect();
        Ok(BernoulliMeasure { p, log_p })
    }

    pub fn uniform(alphabet: usize) -> Self {
        Self::new(vec![1.0 / alphabet as f64; alphabet]).expect("uniform vector is valid")
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn entropy(&self) -> f64 {
        self.p.iter().map(|&x| -x * x.ln()).sum()
    }
}

/// Stationary Markov measure with `μ([w]) = π_{w_1} Π P_{w_k w_{k+1}}`.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkovMeasure {
    transition: Vec<Vec<f64>>,
    stationary: Vec<f64>,
}

impl MarkovMeasure {
    /// `stationary` may be omitted when the chain has a unique stationary
    /// vector; it must be given otherwise.
    pub fn new(transition: Vec<Vec<f64>>, stationary: Option<Vec<f64>>) -> Result<Self> {
        let k = transition.len();
        if k == 0 {
            return Err(Error::InvalidMeasure("empty transition matrix".into()));
        }
        for (i, row) in transition.iter().enumerate() {
            if row.len() != k {
                return Err(Error::DimensionMismatch {
                    expected: k,
                    found: row.len(),
                });
            }
            check_probability_vector(row, &format!("transition row {i}"))?;
        }
        let stationary = match stationary {
            Some(pi) => pi,
            None => solve_stationary(&transition)?,
        };
        if stationary.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                found: stationary.len(),
            });
        }
        check_probability_vector(&stationary, "stationary vector")?;
        for j in 0..k {
            let flow: f64 = (0..k).map(|i| stationary[i] * transition[i][j]).sum();
            if (flow - stationary[j]).abs() > STATIONARY_TOL {
                return Err(Error::InvalidMeasure(format!(
                    "vector is not stationary at state {j}: {flow} vs {}",
                    stationary[j]
                )));
            }
        }
        Ok(MarkovMeasure {
            transition,
            stationary,
        })
    }

    pub fn transition(&self) -> &[Vec<f64>] {
        &self.transition
    }

    pub fn stationary(&self) -> &[f64] {
        &self.stationary
    }

    /// Requires every forbidden word to be a pair `ab` with `P_ab = 0`.
    pub fn check_support(&self, spec: &SubshiftSpec) -> Result<()> {
        if spec.alphabet() != self.transition.len() {
            return Err(Error::DimensionMismatch {
                expected: spec.alphabet(),
                found: self.transition.len(),
            });
        }
        for w in spec.forbidden() {
            if w.len() != 2 {
                return Err(Error::InvalidMeasure(format!(
                    "Markov measures need a memory-1 subshift; forbidden word {w} is longer"
                )));
            }
            let (a, b) = (w.letters()[0], w.letters()[1]);
            if self.transition[a][b] != 0.0 {
                return Err(Error::InvalidMeasure(format!(
                    "transition {a}->{b} is forbidden but has mass"
                )));
            }
        }
        Ok(())
    }

    pub fn entropy(&self) -> f64 {
        let mut h = 0.0;
        for (pi, row) in self.stationary.iter().zip(&self.transition) {
            for &p in row {
                if p > 0.0 {
                    h -= pi * p * p.ln();
                }
            }
        }
        h
    }
}

/// Solves `πP = π`, `Σπ = 1` by Gaussian elimination.
fn solve_stationary(p: &[Vec<f64>]) -> Result<Vec<f64>> {
    let k = p.len();
    // rows: (Pᵀ − I) with the last row replaced by ones
    let mut a = vec![vec![0.0; k + 1]; k];
    for i in 0..k {
        for j in 0..k {
            a[i][j] = p[j][i] - if i == j { 1.0 } else { 0.0 };
        }
    }
    for j in 0..k {
        a[k - 1][j] = 1.0;
    }
    a[k - 1][k] = 1.0;
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .unwrap();
        if a[pivot][col].abs() < 1e-12 {
            return Err(Error::InvalidMeasure(
                "stationary vector is not unique; supply it explicitly".into(),
            ));
        }
        a.swap(col, pivot);
        for r in 0..k {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..=k {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    Ok((0..k).map(|i| (a[i][k] / a[i][i]).max(0.0)).collect())
}

/// Cylinder weights at one depth `k`, supported on `K_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct CylinderDistribution {
    alphabet: usize,
    depth: usize,
    weights: BTreeMap<Word, f64>,
}

impl CylinderDistribution {
    pub fn new(alphabet: usize, depth: usize, weights: BTreeMap<Word, f64>) -> Result<Self> {
        for (w, &x) in &weights {
            if w.len() != depth {
                return Err(Error::InvalidMeasure(format!(
                    "word {w} does not have length {depth}"
                )));
            }
            check_letters(w.letters(), alphabet)?;
            if !(x >= 0.0) {
                return Err(Error::InvalidMeasure(format!("negative weight on {w}")));
            }
        }
        let total: f64 = weights.values().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidMeasure(format!("weights sum to {total}")));
        }
        Ok(CylinderDistribution {
            alphabet,
            depth,
            weights,
        })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn weights(&self) -> &BTreeMap<Word, f64> {
        &self.weights
    }

    fn prob(&self, w: &[Letter]) -> Result<f64> {
        if w.len() > self.depth {
            return Err(Error::DepthExceeded {
                requested: w.len(),
                available: self.depth,
            });
        }
        let lo = Word::from(w);
        Ok(self
            .weights
            .range(lo..)
            .take_while(|(k, _)| k.letters().starts_with(w))
            .map(|(_, x)| x)
            .sum())
    }

    /// Marginal one level up, summing over the last letter.
    pub fn marginal_by_last(&self) -> BTreeMap<Word, f64> {
        let mut out = BTreeMap::new();
        for (w, x) in &self.weights {
            *out.entry(w.parent()).or_insert(0.0) += x;
        }
        out
    }

    /// Marginal one level up, summing over the first letter (the law of
    /// the shifted window).
    pub fn marginal_by_first(&self) -> BTreeMap<Word, f64> {
        let mut out = BTreeMap::new();
        for (w, x) in &self.weights {
            *out.entry(w.shift(1)).or_insert(0.0) += x;
        }
        out
    }
}

/// A measure on `I^∞` given through its cylinder probabilities.
#[derive(Clone, Debug, PartialEq)]
pub enum Measure {
    Bernoulli(BernoulliMeasure),
    Markov(MarkovMeasure),
    /// Convex combination of measures; weights sum to 1.
    Mixture(Vec<(f64, Measure)>),
    Cylinder(CylinderDistribution),
}

impl Measure {
    pub fn bernoulli(p: Vec<f64>) -> Result<Self> {
        Ok(Measure::Bernoulli(BernoulliMeasure::new(p)?))
    }

    pub fn markov(transition: Vec<Vec<f64>>, stationary: Option<Vec<f64>>) -> Result<Self> {
        Ok(Measure::Markov(MarkovMeasure::new(transition, stationary)?))
    }

    pub fn mixture(parts: Vec<(f64, Measure)>) -> Result<Self> {
        let weights: Vec<f64> = parts.iter().map(|(w, _)| *w).collect();
        check_probability_vector(&weights, "mixture weights")?;
        let alphabets: Vec<usize> = parts.iter().map(|(_, m)| m.alphabet()).collect();
        if alphabets.windows(2).any(|w| w[0] != w[1]) {
            return Err(Error::InvalidMeasure(
                "mixture components have different alphabets".into(),
            ));
        }
        Ok(Measure::Mixture(parts))
    }

    pub fn alphabet(&self) -> usize {
        match self {
            Measure::Bernoulli(b) => b.p.len(),
            Measure::Markov(m) => m.transition.len(),
            Measure::Mixture(parts) => parts.first().map(|(_, m)| m.alphabet()).unwrap_or(0),
            Measure::Cylinder(c) => c.alphabet,
        }
    }

    /// `log μ([w])`, `-inf` for null cylinders.
    pub fn log_cylinder_prob(&self, w: &[Letter]) -> Result<f64> {
        check_letters(w, self.alphabet())?;
        match self {
            Measure::Bernoulli(b) => Ok(w.iter().map(|&l| b.log_p[l]).sum()),
            Measure::Markov(m) => {
                let Some(&first) = w.first() else {
                    return Ok(0.0);
                };
                let mut acc = ln_or_neg_inf(m.stationary[first]);
                for pair in w.windows(2) {
                    acc += ln_or_neg_inf(m.transition[pair[0]][pair[1]]);
                }
                Ok(acc)
            }
            Measure::Mixture(parts) => {
                let terms = parts
                    .iter()
                    .map(|(weight, m)| Ok(ln_or_neg_inf(*weight) + m.log_cylinder_prob(w)?))
                    .collect::<Result<Vec<f64>>>()?;
                Ok(log_sum_exp(&terms))
            }
            Measure::Cylinder(c) => Ok(ln_or_neg_inf(c.prob(w)?)),
        }
    }

    pub fn cylinder_prob(&self, w: &[Letter]) -> Result<f64> {
        Ok(self.log_cylinder_prob(w)?.exp())
    }

    /// Entropy from its closed form. Mixtures use the affinity of entropy
    /// on invariant measures.
    pub fn entropy_closed(&self) -> Result<f64> {
        match self {
            Measure::Bernoulli(b) => Ok(b.entropy()),
            Measure::Markov(m) => Ok(m.entropy()),
            Measure::Mixture(parts) => parts
                .iter()
                .map(|(w, m)| Ok(w * m.entropy_closed()?))
                .sum::<Result<f64>>(),
            Measure::Cylinder(_) => Err(Error::InvalidMeasure(
                "no closed-form entropy for a cylinder table".into(),
            )),
        }
    }
}

/// A finite-depth value and its depth.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AtDepth {
    pub n: usize,
    pub value: f64,
}

fn check_alphabet(measure: &Measure, system: &MatrixSystem) -> Result<()> {
    if measure.alphabet() != system.alphabet() {
        return Err(Error::DimensionMismatch {
            expected: system.alphabet(),
            found: measure.alphabet(),
        });
    }
    Ok(())
}

fn check_depth(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidArgument("depth must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// Bernoulli measure on two diagonal maps over the full shift.
fn diagonal_fast_path(measure: &Measure, system: &MatrixSystem) -> Option<(DiagonalPair, f64)> {
    let Measure::Bernoulli(b) = measure else {
        return None;
    };
    if !system.automaton().is_full_shift() {
        return None;
    }
    DiagonalPair::new(system.matrices())
        .ok()
        .map(|pair| (pair, b.p[0]))
}

/// `log μ([w])` for every `w ∈ K_n`, lexicographic order.
fn log_probs(measure: &Measure, n: usize, system: &MatrixSystem) -> Result<Vec<f64>> {
    system.budget().check(system.automaton(), n)?;
    system
        .automaton()
        .words(n)
        .map(|w| measure.log_cylinder_prob(w.letters()))
        .collect()
}

/// `(1/n) Σ_{w ∈ K_n} H(μ([w]))` with `H(x) = −x log x`, `H(0) = 0`.
pub fn entropy_finite(measure: &Measure, n: usize, system: &MatrixSystem) -> Result<AtDepth> {
    check_depth(n)?;
    check_alphabet(measure, system)?;
    let total: f64 = log_probs(measure, n, system)?
        .into_iter()
        .filter(|lp| lp.is_finite())
        .map(|lp| -lp.exp() * lp)
        .sum();
    Ok(AtDepth {
        n,
        value: total / n as f64,
    })
}

/// `(1/n) Σ_{w ∈ K_n} μ([w]) log φᵗ(A_w)`.
pub fn energy_finite(
    measure: &Measure,
    t: f64,
    n: usize,
    system: &MatrixSystem,
) -> Result<AtDepth> {
    check_depth(n)?;
    check_alphabet(measure, system)?;
    if !(t >= 0.0) {
        return Err(Error::NegativeT(t));
    }
    if let Some((pair, p0)) = diagonal_fast_path(measure, system) {
        return Ok(AtDepth {
            n,
            value: pair.bernoulli_energy(p0, t, n),
        });
    }
    let table = SpectrumTable::build(system, n)?;
    let probs = log_probs(measure, n, system)?;
    let total: f64 = table
        .rows()
        .zip(&probs)
        .map(|(row, lp)| lp.exp() * log_phi_raw(t, row))
        .sum();
    Ok(AtDepth {
        n,
        value: total / n as f64,
    })
}

/// Depth-`n` Lyapunov exponents `λ_l = Λˡ_n − Λˡ⁻¹_n`, i.e.
/// `(1/n) Σ μ([w]) log α_l(A_w)`; nonincreasing in `l`.
pub fn lyapunov(measure: &Measure, n: usize, system: &MatrixSystem) -> Result<Vec<f64>> {
    check_depth(n)?;
    check_alphabet(measure, system)?;
    if let Some((pair, p0)) = diagonal_fast_path(measure, system) {
        return Ok(pair.bernoulli_lyapunov(p0, n));
    }
    let table = SpectrumTable::build(system, n)?;
    let probs = log_probs(measure, n, system)?;
    let mut acc = vec![0.0; system.dim()];
    for (row, lp) in table.rows().zip(&probs) {
        let w = lp.exp();
        for (a, la) in acc.iter_mut().zip(row) {
            *a += w * la;
        }
    }
    Ok(acc.into_iter().map(|a| a / n as f64).collect())
}

/// `(1/n)(log Z_n(t) − Σ μ([w])(−log μ([w]) + log φᵗ(A_w)))`, which is
/// nonnegative by Jensen's inequality for any measure carried by `K`.
pub fn equilibrium_gap(
    measure: &Measure,
    t: f64,
    n: usize,
    system: &MatrixSystem,
) -> Result<AtDepth> {
    check_depth(n)?;
    check_alphabet(measure, system)?;
    if !(t >= 0.0) {
        return Err(Error::NegativeT(t));
    }
    let table = SpectrumTable::build(system, n)?;
    let log_phis = table.log_phis(t);
    let log_z = log_sum_exp(&log_phis);
    let probs = log_probs(measure, n, system)?;
    let s: f64 = probs
        .iter()
        .zip(&log_phis)
        .filter(|(lp, _)| lp.is_finite())
        .map(|(lp, phi)| lp.exp() * (phi - lp))
        .sum();
    Ok(AtDepth {
        n,
        value: (log_z - s) / n as f64,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DepthRatios {
    pub n: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
}

/// Extremes of `μ([w]) / (e^{−nP} φᵗ(A_w))` over allowed words.
#[derive(Clone, Debug, PartialEq)]
pub struct GibbsReport {
    pub t: f64,
    pub pressure: f64,
    pub max_depth: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub per_depth: Vec<DepthRatios>,
}

impl GibbsReport {
    /// Whether every ratio lies in `[1/c, c]`.
    pub fn within(&self, c: f64) -> bool {
        self.min_ratio >= 1.0 / c && self.max_ratio <= c
    }
}

pub fn gibbs_ratios(
    measure: &Measure,
    t: f64,
    pressure: f64,
    max_depth: usize,
    system: &MatrixSystem,
) -> Result<GibbsReport> {
    check_depth(max_depth)?;
    check_alphabet(measure, system)?;
    if !(t >= 0.0) {
        return Err(Error::NegativeT(t));
    }
    system.budget().check(system.automaton(), max_depth)?;
    let matrices = system.matrices();
    let mut per_depth: Vec<DepthRatios> = (1..=max_depth)
        .map(|n| DepthRatios {
            n,
            min_ratio: f64::INFINITY,
            max_ratio: f64::NEG_INFINITY,
        })
        .collect();
    let mut failure = None;
    system.automaton().walk(
        max_depth,
        ScaledMatrix::identity(system.dim()),
        |p, a| p.mul(&matrices[a]),
        |w, p| {
            let spectrum = match singular_spectrum(p) {
                Ok(s) => s,
                Err(e) => {
                    failure = Some(e);
                    return;
                }
            };
            let lp = match measure.log_cylinder_prob(w) {
                Ok(lp) => lp,
                Err(e) => {
                    failure = Some(e);
                    return;
                }
            };
            let n = w.len();
            let ratio = (lp + n as f64 * pressure - log_phi_raw(t, spectrum.log_alphas())).exp();
            let slot = &mut per_depth[n - 1];
            slot.min_ratio = slot.min_ratio.min(ratio);
            slot.max_ratio = slot.max_ratio.max(ratio);
        },
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let min_ratio = per_depth
        .iter()
        .map(|d| d.min_ratio)
        .fold(f64::INFINITY, f64::min);
    let max_ratio = per_depth
        .iter()
        .map(|d| d.max_ratio)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(GibbsReport {
        t,
        pressure,
        max_depth,
        min_ratio,
        max_ratio,
        per_depth,
    })
}

/// Depth-`k` marginal of `μ_n = (1/n) Σ_{j<n} ν_n ∘ σ⁻ʲ`, where `ν_n`
/// puts mass `φᵗ(A_w)/Z_n` on each `w ∈ K_n` followed by its
/// lexicographically least allowed infinite continuation.
///
/// With `averaged = false` only the window `j = 0` is used, i.e. the
/// marginal of `ν_n` itself.
pub fn empirical_equilibrium(
    t: f64,
    n: usize,
    k: usize,
    averaged: bool,
    system: &MatrixSystem,
) -> Result<CylinderDistribution> {
    check_depth(n)?;
    if k == 0 {
        return Err(Error::InvalidArgument(
            "window length must be at least 1".into(),
        ));
    }
    if k > n {
        return Err(Error::WindowOverrun { k, n });
    }
    if !(t >= 0.0) {
        return Err(Error::NegativeT(t));
    }
    let automaton = system.automaton();
    let table = SpectrumTable::build(system, n)?;
    let log_phis = table.log_phis(t);
    let log_z = log_sum_exp(&log_phis);
    let windows = if averaged { n } else { 1 };
    let mut weights: BTreeMap<Word, f64> = BTreeMap::new();
    let mut extended: Vec<Letter> = Vec::with_capacity(n + k);
    for (w, lp) in automaton.words(n).zip(&log_phis) {
        let mass = (lp - log_z).exp() / windows as f64;
        let node = automaton
            .node_after(w.letters())
            .expect("enumerated word is allowed");
        extended.clear();
        extended.extend_from_slice(w.letters());
        extended.extend(automaton.least_tail(node, k - 1));
        for j in 0..windows {
            *weights
                .entry(Word::from(&extended[j..j + k]))
                .or_insert(0.0) += mass;
        }
    }
    CylinderDistribution::new(system.alphabet(), k, weights)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Consistency {
    pub consistent: bool,
    pub max_defect: f64,
}

/// Compares the depth-`(k−1)` marginals obtained by dropping the last and
/// the first letter; they agree for a shift-invariant measure.
pub fn check_consistency(cd: &CylinderDistribution) -> Result<Consistency> {
    if cd.depth < 2 {
        return Err(Error::InvalidArgument(
            "consistency check needs depth at least 2".into(),
        ));
    }
    let by_last = cd.marginal_by_last();
    let by_first = cd.marginal_by_first();
    let mut max_defect: f64 = 0.0;
    for key in by_last.keys().chain(by_first.keys()) {
        let a = by_last.get(key).copied().unwrap_or(0.0);
        let b = by_first.get(key).copied().unwrap_or(0.0);
        max_defect = max_defect.max((a - b).abs());
    }
    Ok(Consistency {
        consistent: max_defect <= CONSISTENCY_TOL,
        max_defect,
    })
}
