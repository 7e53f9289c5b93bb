use crate::error::{Error, Result};
use crate::linalg::{log_alpha_bounds, operator_norm, Matrix};
use crate::symbolic::{SubshiftAutomaton, SubshiftSpec};

/// Default cap on the number of words enumerated at one depth.
pub const DEFAULT_MAX_WORDS: u128 = 1 << 24;

/// Limits on enumeration work.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    pub max_words: u128,
    pub max_depth: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_words: DEFAULT_MAX_WORDS,
            max_depth: 64,
        }
    }
}

impl Budget {
    /// Fails unless `K_n` may be enumerated within the budget.
    pub fn check(&self, automaton: &SubshiftAutomaton, n: usize) -> Result<u128> {
        let words = automaton.count(n);
        if n > self.max_depth || words > self.max_words {
            return Err(Error::DepthBudgetExceeded {
                depth: n,
                words,
                budget: self.max_words,
            });
        }
        Ok(words)
    }
}

/// A subshift together with one invertible matrix per letter.
#[derive(Clone, Debug)]
pub struct MatrixSystem {
    spec: SubshiftSpec,
    automaton: SubshiftAutomaton,
    matrices: Vec<Matrix>,
    budget: Budget,
}

impl MatrixSystem {
    pub fn new(spec: SubshiftSpec, matrices: Vec<Matrix>) -> Result<Self> {
        if matrices.len() != spec.alphabet() {
            return Err(Error::InvalidArgument(format!(
                "{} matrices for an alphabet of {} letters",
                matrices.len(),
                spec.alphabet()
            )));
        }
        let d = matrices[0].dim();
        for m in &matrices {
            if m.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: m.dim(),
                });
            }
            m.check_invertible()?;
        }
        let automaton = spec.compile()?;
        Ok(MatrixSystem {
            spec,
            automaton,
            matrices,
            budget: Budget::default(),
        })
    }

    /// Full shift over one letter per matrix.
    pub fn full_shift(matrices: Vec<Matrix>) -> Result<Self> {
        let spec = SubshiftSpec::full_shift(matrices.len())?;
        Self::new(spec, matrices)
    }

    pub fn with_budget(mut self, budget: Budget) -> Self {
        self.budget = budget;
        self
    }

    pub fn spec(&self) -> &SubshiftSpec {
        &self.spec
    }

    pub fn automaton(&self) -> &SubshiftAutomaton {
        &self.automaton
    }

    pub fn matrices(&self) -> &[Matrix] {
        &self.matrices
    }

    pub fn budget(&self) -> Budget {
        self.budget
    }

    pub fn dim(&self) -> usize {
        self.matrices[0].dim()
    }

    pub fn alphabet(&self) -> usize {
        self.matrices.len()
    }

    /// `(log α̲, log ᾱ)` over all maps.
    pub fn log_alpha_bounds(&self) -> Result<(f64, f64)> {
        log_alpha_bounds(&self.matrices)
    }

    /// Fails with [`Error::NonContractive`] naming the first map whose
    /// operator norm is at least 1.
    pub fn check_contractive(&self) -> Result<()> {
        for (i, m) in self.matrices.iter().enumerate() {
            let norm = operator_norm(m)?;
            if norm >= 1.0 {
                return Err(Error::NonContractive { map: i, norm });
            }
        }
        Ok(())
    }
}
