//! The mutation instruction catalog.
//!
//! The default catalog has fifteen entries in four categories. Users can
//! replace it with a TOML file of `[[instruction]]` tables.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, IoContext, Result};
use crate::model::{Category, Deadness, MutationInstruction};

/// Ids of the built-in instructions that describe non-executed code.
pub const DEAD_INSTRUCTION_IDS: [&str; 5] = [
    "cf-dead-conditional",
    "cf-dead-nested-conditional",
    "cf-dead-loop",
    "cf-dead-nested-loop",
    "cond-dead-complicate",
];

const DEFAULT_ENTRIES: [(&str, Category, &str); 15] = [
    ("cf-conditional", Category::ControlFlow, "add a conditional statement with a statement inside"),
    (
        "cf-nested-conditional",
        Category::ControlFlow,
        "add a nested conditional statement with a non trivial condition and a statement inside",
    ),
    ("cf-dead-conditional", Category::ControlFlow, "add a dead conditional statement with a statement inside"),
    (
        "cf-dead-nested-conditional",
        Category::ControlFlow,
        "add a dead nested conditional statement with a non trivial condition and a statement inside",
    ),
    ("cf-loop", Category::ControlFlow, "add a loop with a complex condition and statement inside"),
    ("cf-dead-loop", Category::ControlFlow, "add a dead loop with a complex condition and statement inside"),
    ("cf-nested-loop", Category::ControlFlow, "add a nested loop with a complex condition and a statement inside"),
    (
        "cf-dead-nested-loop",
        Category::ControlFlow,
        "add a dead nested loop with a complex condition and a statement inside",
    ),
    ("cond-complicate", Category::Conditionals, "make a condition more complicated"),
    ("cond-dead-complicate", Category::Conditionals, "make a dead condition more complicated"),
    ("agg-array", Category::AggregatesPointers, "add array code"),
    ("agg-pointers", Category::AggregatesPointers, "add pointers code"),
    ("agg-struct", Category::AggregatesPointers, "add struct code usage"),
    ("agg-union", Category::AggregatesPointers, "add union code usage"),
    (
        "fn-arguments",
        Category::FunctionArguments,
        "add function arguments to a function that already exists, no default arguments",
    ),
];

/// Languages without C-style unions get the enumeration variant.
const UNIONLESS_LANGUAGES: [&str; 1] = ["swift"];

pub fn default_catalog() -> Vec<MutationInstruction> {
    DEFAULT_ENTRIES
        .iter()
        .map(|(id, category, text)| {
            let deadness =
                if DEAD_INSTRUCTION_IDS.contains(id) { Deadness::Dead } else { Deadness::Live };
            let mut per_language_text = BTreeMap::new();
            if text.contains("union") {
                for lang in UNIONLESS_LANGUAGES {
                    per_language_text.insert(lang.to_string(), text.replace("union", "enumeration"));
                }
            }
            MutationInstruction {
                id: id.to_string(),
                category: *category,
                text: text.to_string(),
                deadness,
                per_language_text,
            }
        })
        .collect()
}

#[derive(Debug, Serialize, Deserialize)]
struct CatalogFile {
    instruction: Vec<MutationInstruction>,
}

fn mentions_dead(text: &str) -> bool {
    text.split(|c: char| !c.is_ascii_alphanumeric()).any(|w| w.eq_ignore_ascii_case("dead"))
}

/// Checks the structural invariants every catalog must satisfy.
pub fn validate_catalog(catalog: &[MutationInstruction]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for ins in catalog {
        if ins.id.trim().is_empty() {
            return Err(Error::Catalog("instruction with empty id".into()));
        }
        if !seen.insert(ins.id.as_str()) {
            return Err(Error::Catalog(format!("duplicate instruction id `{}`", ins.id)));
        }
        let texts = std::iter::once(&ins.text).chain(ins.per_language_text.values());
        for text in texts {
            if text.trim().is_empty() || text.contains('\n') || text.contains('\r') {
                return Err(Error::Catalog(format!(
                    "instruction `{}` text must be a single non-empty line",
                    ins.id
                )));
            }
        }
        let expected_dead = if DEAD_INSTRUCTION_IDS.contains(&ins.id.as_str()) {
            true
        } else if DEFAULT_ENTRIES.iter().any(|(id, ..)| *id == ins.id) {
            false
        } else {
            mentions_dead(&ins.text)
        };
        if (ins.deadness == Deadness::Dead) != expected_dead {
            return Err(Error::Catalog(format!(
                "instruction `{}` deadness {:?} disagrees with its description",
                ins.id, ins.deadness
            )));
        }
    }
    Ok(())
}

pub fn parse_catalog(text: &str) -> Result<Vec<MutationInstruction>> {
    let file: CatalogFile = toml::from_str(text)?;
    validate_catalog(&file.instruction)?;
    Ok(file.instruction)
}

pub fn load_catalog(path: &Path) -> Result<Vec<MutationInstruction>> {
    let text = std::fs::read_to_string(path).at(path)?;
    parse_catalog(&text)
}

pub fn render_catalog(catalog: &[MutationInstruction]) -> String {
    let file = CatalogFile { instruction: catalog.to_vec() };
    toml::to_string_pretty(&file).expect("catalog serializes")
}
