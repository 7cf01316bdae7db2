//! Text formats: models and rational tables as JSON with `num/den` strings.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::Model;
use crate::process::Process;
use crate::random_time::RandomTime;
use crate::rational::{format_rational, parse_rational, Rational};
use crate::space::{Filtration, FiniteProbSpace, Partition};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Infinite {
    #[serde(rename = "inf")]
    Inf,
}

/// `τ(ω)` as a grid time or the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TauEntry {
    Finite(usize),
    Infinite(Infinite),
}

/// `[t][outcome][component]` table of `num/den` strings.
pub type Table = Vec<Vec<Vec<String>>>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub schema: u32,
    pub probabilities: Vec<String>,
    /// Blocks of `F_t` for `t = 0..=T`.
    pub filtration: Vec<Vec<Vec<usize>>>,
    pub assets: Table,
    pub tau: Vec<TauEntry>,
}

pub fn process_table(x: &Process) -> Table {
    (0..=x.horizon())
        .map(|t| (0..x.n_outcomes()).map(|w| x.at(t, w).iter().map(format_rational).collect()).collect())
        .collect()
}

pub fn parse_table(table: &Table, what: &str) -> Result<Process> {
    let parsed = table
        .iter()
        .enumerate()
        .map(|(t, row)| {
            row.iter()
                .enumerate()
                .map(|(w, cell)| {
                    cell.iter()
                        .map(|s| {
                            parse_rational(s).map_err(|_| {
                                Error::Format(format!("{what}[t={t}][outcome={w}]: malformed rational `{s}`"))
                            })
                        })
                        .collect::<Result<Vec<Rational>>>()
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Process::from_table(parsed)
}

impl ModelFile {
    pub fn from_model(model: &Model) -> ModelFile {
        ModelFile {
            schema: SCHEMA_VERSION,
            probabilities: model.space.probs().iter().map(format_rational).collect(),
            filtration: model.f.partitions().iter().map(|p| p.blocks().to_vec()).collect(),
            assets: process_table(&model.s),
            tau: model
                .tau
                .times()
                .iter()
                .map(|t| t.map_or(TauEntry::Infinite(Infinite::Inf), TauEntry::Finite))
                .collect(),
        }
    }

    /// Validates every structural requirement and builds the model.
    pub fn to_model(&self) -> Result<Model> {
        if self.schema != SCHEMA_VERSION {
            return Err(Error::Format(format!("unsupported schema version {}", self.schema)));
        }
        let probs = self
            .probabilities
            .iter()
            .enumerate()
            .map(|(w, s)| {
                parse_rational(s)
                    .map_err(|_| Error::Format(format!("probabilities[{w}]: malformed rational `{s}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        let n = probs.len();
        let space = FiniteProbSpace::new(probs)?;
        let parts = self
            .filtration
            .iter()
            .enumerate()
            .map(|(t, blocks)| {
                Partition::new(n, blocks.clone())
                    .map_err(|e| Error::Format(format!("filtration[{t}]: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let f = Filtration::new(parts)?;
        let s = parse_table(&self.assets, "assets")?;
        s.check_grid(&f)?;
        let tau = RandomTime::new(
            self.tau
                .iter()
                .map(|e| match e {
                    TauEntry::Finite(t) => Some(*t),
                    TauEntry::Infinite(_) => None,
                })
                .collect(),
        );
        if let Some(w) = (0..tau.n_outcomes()).find(|&w| tau.time(w).is_some_and(|t| t > f.horizon())) {
            return Err(Error::Format(format!(
                "tau[{w}] = {} lies beyond the horizon {}",
                tau.time(w).expect("finite"),
                f.horizon()
            )));
        }
        Model::new(space, f, s, tau)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serialises")
    }

    pub fn parse(text: &str) -> Result<ModelFile> {
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }

    /// `sha256` of the compact JSON form.
    pub fn digest(&self) -> String {
        digest_json(&serde_json::to_string(self).expect("plain data serialises"))
    }
}

pub fn digest_json(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

pub fn model_digest(model: &Model) -> String {
    ModelFile::from_model(model).digest()
}
