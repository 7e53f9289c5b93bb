//! JSON system configuration: parsing, validation, canonical digest and
//! conversion into library types.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use subaffine::geometry::AffineIfs;
use subaffine::linalg::{operator_norm, Matrix};
use subaffine::measures::{MarkovMeasure, Measure};
use subaffine::symbolic::{SubshiftSpec, Word};
use subaffine::system::DEFAULT_MAX_WORDS;
use subaffine::{Budget, MatrixSystem};

use crate::error::{CliError, CliResult};

pub const DEFAULT_MAX_DEPTH: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub dimension: usize,
    pub maps: Vec<MapConfig>,
    #[serde(default)]
    pub subshift: SubshiftConfig,
    #[serde(default)]
    pub measure: Option<MeasureConfig>,
    #[serde(default)]
    pub budgets: BudgetConfig,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapConfig {
    pub matrix: Vec<Vec<f64>>,
    /// Filled with zeros during validation when absent.
    #[serde(default)]
    pub translation: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubshiftConfig {
    #[serde(default)]
    pub forbidden_words: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum MeasureConfig {
    Bernoulli { p: Vec<f64> },
    Markov { transition: Vec<Vec<f64>> },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetConfig {
    #[serde(default = "default_max_depth")]
    pub max_depth: usize,
    #[serde(default = "default_max_words")]
    pub max_words: u64,
}

fn default_max_depth() -> usize {
    DEFAULT_MAX_DEPTH
}

fn default_max_words() -> u64 {
    DEFAULT_MAX_WORDS as u64
}

impl Default for BudgetConfig {
    fn default() -> Self {
        BudgetConfig {
            max_depth: default_max_depth(),
            max_words: default_max_words(),
        }
    }
}

/// A validated configuration and the library objects built from it.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub config: SystemConfig,
    pub ifs: AffineIfs,
    pub measure: Option<Measure>,
    /// Hex SHA-256 of the canonical JSON form.
    pub digest: String,
}

impl Loaded {
    pub fn system(&self) -> &MatrixSystem {
        self.ifs.system()
    }

    pub fn measure(&self) -> CliResult<&Measure> {
        self.measure.as_ref().ok_or_else(|| {
            CliError::malformed(
                "measure",
                "this command needs a measure (config or --measure)",
            )
        })
    }
}

/// Parses JSON text; type errors name the offending path.
pub fn parse_json(text: &str) -> CliResult<SystemConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let field = if path == "." {
            "<root>".to_string()
        } else {
            path
        };
        CliError::malformed(field, e.inner())
    })
}

pub fn parse_measure(text: &str) -> CliResult<MeasureConfig> {
    serde_json::from_str(text).map_err(|e| CliError::malformed("measure", e))
}

/// Serializes an attractor's maps back into a configuration.
pub fn from_ifs(ifs: &AffineIfs) -> SystemConfig {
    let maps = ifs
        .system()
        .matrices()
        .iter()
        .zip(ifs.translations())
        .map(|(m, a)| MapConfig {
            matrix: m.rows(),
            translation: Some(a.clone()),
        })
        .collect();
    SystemConfig {
        dimension: ifs.dim(),
        maps,
        subshift: SubshiftConfig {
            forbidden_words: ifs
                .system()
                .spec()
                .forbidden()
                .iter()
                .map(|w| w.letters().to_vec())
                .collect(),
        },
        measure: None,
        budgets: BudgetConfig::default(),
        seed: 0,
    }
}

fn check_finite(field: &str, values: &[f64]) -> CliResult<()> {
    if values.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(CliError::malformed(field, "entries must be finite"))
    }
}

/// Validates, fills defaults and builds the library objects.
pub fn load(mut config: SystemConfig) -> CliResult<Loaded> {
    let d = config.dimension;
    if d == 0 {
        return Err(CliError::malformed("dimension", "must be at least 1"));
    }
    if config.maps.len() < 2 {
        return Err(CliError::malformed(
            "maps",
            format!("need at least 2 maps, found {}", config.maps.len()),
        ));
    }
    let mut matrices = Vec::with_capacity(config.maps.len());
    for (i, map) in config.maps.iter_mut().enumerate() {
        let field = format!("maps[{i}].matrix");
        if map.matrix.len() != d || map.matrix.iter().any(|r| r.len() != d) {
            return Err(CliError::malformed(
                &field,
                format!("expected {d}×{d} rows"),
            ));
        }
        check_finite(&field, &map.matrix.concat())?;
        let m = Matrix::from_rows(&map.matrix).map_err(|e| CliError::malformed(&field, e))?;
        m.check_invertible()
            .map_err(|e| CliError::malformed(&field, e))?;
        let norm = operator_norm(&m).map_err(|e| CliError::malformed(&field, e))?;
        if !(norm < 1.0) {
            return Err(CliError::NonContractive { field, norm });
        }
        matrices.push(m);

        let field = format!("maps[{i}].translation");
        let a = map.translation.get_or_insert_with(|| vec![0.0; d]);
        if a.len() != d {
            return Err(CliError::malformed(
                &field,
                format!("expected {d} entries, found {}", a.len()),
            ));
        }
        check_finite(&field, a)?;
    }

    let kappa = matrices.len();
    for (j, w) in config.subshift.forbidden_words.iter().enumerate() {
        let field = format!("subshift.forbidden_words[{j}]");
        if w.len() < 2 {
            return Err(CliError::BadSubshift {
                field,
                message: "forbidden words need at least 2 letters".into(),
            });
        }
        if let Some(l) = w.iter().find(|&&l| l >= kappa) {
            return Err(CliError::BadSubshift {
                field,
                message: format!("letter {l} out of range for {kappa} maps"),
            });
        }
    }
    let bad_subshift = |e: subaffine::Error| CliError::BadSubshift {
        field: "subshift.forbidden_words".into(),
        message: e.to_string(),
    };
    let words = config
        .subshift
        .forbidden_words
        .iter()
        .map(|w| Word::new(w.clone()))
        .collect();
    let spec = SubshiftSpec::new(kappa, words).map_err(bad_subshift)?;
    spec.compile().map_err(bad_subshift)?;

    let b = config.budgets;
    if b.max_depth == 0 || b.max_words == 0 {
        return Err(CliError::malformed("budgets", "limits must be positive"));
    }
    let system = MatrixSystem::new(spec, matrices)
        .map_err(|e| CliError::malformed("maps", e))?
        .with_budget(Budget {
            max_words: b.max_words as u128,
            max_depth: b.max_depth,
        });
    let translations = config
        .maps
        .iter()
        .map(|m| m.translation.clone().unwrap_or_default())
        .collect();
    let ifs = AffineIfs::new(system, translations).map_err(|e| CliError::malformed("maps", e))?;
    let measure = config
        .measure
        .as_ref()
        .map(|m| build_measure(m, ifs.system()))
        .transpose()?;

    let canonical = serde_json::to_string(&config).expect("config serializes");
    let digest = format!("{:x}", Sha256::digest(canonical.as_bytes()));
    Ok(Loaded {
        config,
        ifs,
        measure,
        digest,
    })
}

fn build_measure(m: &MeasureConfig, system: &MatrixSystem) -> CliResult<Measure> {
    let kappa = system.alphabet();
    match m {
        MeasureConfig::Bernoulli { p } => {
            if p.len() != kappa {
                return Err(CliError::malformed(
                    "measure.p",
                    format!("expected {kappa} probabilities, found {}", p.len()),
                ));
            }
            Measure::bernoulli(p.clone()).map_err(|e| CliError::malformed("measure.p", e))
        }
        MeasureConfig::Markov { transition } => {
            let field = "measure.transition";
            if transition.len() != kappa {
                return Err(CliError::malformed(
                    field,
                    format!("expected {kappa} rows, found {}", transition.len()),
                ));
            }
            let markov = MarkovMeasure::new(transition.clone(), None)
                .map_err(|e| CliError::malformed(field, e))?;
            markov
                .check_support(system.spec())
                .map_err(|e| CliError::malformed(field, e))?;
            Ok(Measure::Markov(markov))
        }
    }
}
