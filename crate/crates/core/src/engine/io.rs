//! Rule files.
//!
//! ```json
//! {"alphabet": ["0", "1"], "radius": 1, "kind": "table",
//!  "entries": {"000": "0", "001": "1", "...": "..."}}
//! {"alphabet": ["0", "1"], "kind": "builtin", "builtin": "eca-184"}
//! {"kind": "builtin", "builtin": "two-phase"}
//! {"alphabet": ["0", "1"], "kind": "spreading", "state": "s",
//!  "base": {"alphabet": ["0", "1"], "kind": "builtin", "builtin": "max"}}
//! {"kind": "construction", "construction": { ... }}
//! ```
//!
//! Builtin names: `identity`, `shift-left`, `max`, `eca-<n>`,
//! `spreading-<state>` (spreading over the identity), `two-phase`.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Deserialize;
use thiserror::Error;

use super::{spreading_over, Alphabet, Builtin, EngineError, LocalRule};
use crate::toolbox::{self, ConstructionSpec};

#[derive(Debug, Error)]
pub enum RuleIoError {
    #[error("invalid rule file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("rule file: {0}")]
    Invalid(String),
    #[error("construction: {0}")]
    Construction(#[from] toolbox::ToolboxError),
}

#[derive(Debug, Deserialize)]
struct RuleFile {
    #[serde(default)]
    alphabet: Vec<String>,
    #[serde(default)]
    radius: Option<u32>,
    kind: String,
    #[serde(default)]
    entries: BTreeMap<String, String>,
    #[serde(default)]
    builtin: Option<String>,
    #[serde(default)]
    construction: Option<ConstructionSpec>,
    #[serde(default)]
    base: Option<Box<RuleFile>>,
    #[serde(default)]
    state: Option<String>,
}

pub fn rule_from_json(text: &str) -> Result<LocalRule, RuleIoError> {
    let file: RuleFile = serde_json::from_str(text)?;
    build(file)
}

fn build(file: RuleFile) -> Result<LocalRule, RuleIoError> {
    match file.kind.as_str() {
        "table" => {
            let alphabet = Alphabet::new(file.alphabet.clone())?;
            let radius = file
                .radius
                .ok_or_else(|| RuleIoError::Invalid("table rule needs a radius".into()))?;
            let q = alphabet.len() as u64;
            let span = (2 * radius + 1) as usize;
            let required = (q as u128).pow(span as u32);
            if file.entries.len() as u128 != required {
                return Err(RuleIoError::Invalid(format!(
                    "table has {} entries, expected {required}",
                    file.entries.len()
                )));
            }
            let mut table = vec![0u64; required as usize];
            let mut seen = vec![false; required as usize];
            for (neigh_text, image) in &file.entries {
                let neigh = alphabet.parse_word(neigh_text)?;
                if neigh.len() != span {
                    return Err(RuleIoError::Invalid(format!(
                        "neighborhood {neigh_text:?} has length {}, expected {span}",
                        neigh.len()
                    )));
                }
                let mut idx = 0u64;
                for &s in &neigh {
                    idx = idx * q + s;
                }
                let img = alphabet
                    .index_of(image)
                    .ok_or_else(|| EngineError::UnknownSymbol(image.clone()))?;
                table[idx as usize] = img;
                seen[idx as usize] = true;
            }
            if seen.iter().any(|s| !s) {
                return Err(RuleIoError::Invalid("table is not total".into()));
            }
            Ok(LocalRule::from_table(alphabet, radius, table)?)
        }
        "builtin" => {
            let name = file
                .builtin
                .ok_or_else(|| RuleIoError::Invalid("builtin rule needs a name".into()))?;
            if name == "two-phase" {
                let rule = toolbox::two_phase::TwoPhaseRule::new();
                return Ok(LocalRule::from_program(Arc::new(rule)));
            }
            let alphabet = Alphabet::new(file.alphabet.clone())?;
            let builtin = Builtin::parse(&name, &alphabet)?;
            Ok(LocalRule::from_builtin(builtin, alphabet)?)
        }
        "spreading" => {
            let base = file
                .base
                .ok_or_else(|| RuleIoError::Invalid("spreading rule needs a base".into()))?;
            let state = file
                .state
                .ok_or_else(|| RuleIoError::Invalid("spreading rule needs a state name".into()))?;
            let base = build(*base)?;
            Ok(spreading_over(&base, &state)?)
        }
        "construction" => {
            let spec = file
                .construction
                .ok_or_else(|| RuleIoError::Invalid("construction rule needs parameters".into()))?;
            let rule = toolbox::build_from_spec(&spec)?;
            Ok(LocalRule::from_program(rule))
        }
        other => Err(RuleIoError::Invalid(format!("unknown rule kind {other:?}"))),
    }
}
