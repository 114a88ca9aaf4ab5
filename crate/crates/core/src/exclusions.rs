//! Record and cell exclusions applied before measurement, and removal of
//! replicated uniques from a synthetic table.
//!
//! Exclusions remove whole `(q, t)` cells, which is the same as removing the
//! records in them. Margins and proportions are recomputed from what
//! survives; the percentage bases `N_d` and `N_s` are not.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::ColumnTable;
use crate::tabulate::{compose_q, proportions, AlignedPair, Proportions};

/// One excluded (key, key level, target level) combination.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExcludedPair {
    pub key: String,
    pub key_level: String,
    pub target_level: String,
}

impl std::str::FromStr for ExcludedPair {
    type Err = Error;

    /// Parses `KEY=LEVEL:TARGETLEVEL`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("expected KEY=LEVEL:TARGETLEVEL, got `{s}`"));
        let (key, rest) = s.split_once('=').ok_or_else(bad)?;
        let (key_level, target_level) = rest.rsplit_once(':').ok_or_else(bad)?;
        if key.is_empty() {
            return Err(bad());
        }
        Ok(ExcludedPair {
            key: key.to_string(),
            key_level: key_level.to_string(),
            target_level: target_level.to_string(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExclusionSpec {
    pub not_target: Vec<String>,
    /// Per key; empty means every key keeps its missing values.
    pub use_keys_na: Vec<bool>,
    pub use_target_na: bool,
    pub excluded_pairs: Vec<ExcludedPair>,
    pub denom_lim: u64,
    pub exclude_ov_denom_lim: bool,
}

impl Default for ExclusionSpec {
    fn default() -> Self {
        ExclusionSpec {
            not_target: Vec::new(),
            use_keys_na: Vec::new(),
            use_target_na: true,
            excluded_pairs: Vec::new(),
            denom_lim: 5,
            exclude_ov_denom_lim: false,
        }
    }
}

impl ExclusionSpec {
    pub fn validate(&self, n_keys: usize) -> Result<()> {
        if !self.use_keys_na.is_empty() && self.use_keys_na.len() != 1 && self.use_keys_na.len() != n_keys {
            return Err(Error::Config(format!(
                "use_keys_na has {} entries for {n_keys} keys",
                self.use_keys_na.len()
            )));
        }
        if self.denom_lim == 0 {
            return Err(Error::Config("denom_lim must be positive".into()));
        }
        Ok(())
    }

    pub fn key_na_included(&self, k: usize) -> bool {
        match self.use_keys_na.as_slice() {
            [] => true,
            [one] => *one,
            many => many.get(k).copied().unwrap_or(true),
        }
    }

    /// True when nothing would be excluded.
    pub fn is_empty(&self) -> bool {
        self.not_target.is_empty()
            && self.use_keys_na.iter().all(|b| *b)
            && self.use_target_na
            && self.excluded_pairs.is_empty()
            && !self.exclude_ov_denom_lim
    }
}

#[derive(Debug, Clone)]
pub struct Excluded {
    pub pair: AlignedPair,
    pub props: Proportions,
    pub warnings: Vec<String>,
}

pub fn apply_exclusions(pair: &AlignedPair, spec: &ExclusionSpec) -> Excluded {
    let mut warnings = Vec::new();
    let target_name = pair.target().unwrap_or("(none)").to_string();

    let mut dropped_t: HashSet<u32> = HashSet::new();
    for level in &spec.not_target {
        match pair.t_id(level) {
            Some(t) => {
                dropped_t.insert(t);
            }
            None => warnings.push(format!("not_target: level `{level}` not found in `{target_name}`")),
        }
    }
    if !spec.use_target_na {
        if let Some(t) = pair.t_missing() {
            dropped_t.insert(t);
        }
    }

    let dropped_key_na: Vec<(usize, u32)> = (0..pair.keys().len())
        .filter(|&k| !spec.key_na_included(k))
        .filter_map(|k| pair.key_missing(k).map(|id| (k, id)))
        .collect();

    // (key index, key level id) -> excluded target ids
    let mut pair_rules: HashMap<(usize, u32), HashSet<u32>> = HashMap::new();
    for ex in &spec.excluded_pairs {
        let Some(k) = pair.keys().iter().position(|k| *k == ex.key) else {
            warnings.push(format!("exclude pair: `{}` is not a key", ex.key));
            continue;
        };
        let Some(lvl) = pair.key_levels(k).iter().position(|l| *l == ex.key_level) else {
            warnings.push(format!(
                "exclude pair: key `{}` has no level `{}`",
                ex.key, ex.key_level
            ));
            continue;
        };
        let Some(t) = pair.t_id(&ex.target_level) else {
            warnings.push(format!(
                "exclude pair: `{target_name}` has no level `{}`",
                ex.target_level
            ));
            continue;
        };
        pair_rules.entry((k, lvl as u32)).or_default().insert(t);
    }

    let cells = pair
        .cells()
        .iter()
        .filter(|c| !dropped_t.contains(&c.t))
        .filter(|c| !dropped_key_na.iter().any(|&(k, id)| pair.q_key(c.q, k) == id))
        .filter(|c| {
            !(0..pair.keys().len()).any(|k| {
                pair_rules
                    .get(&(k, pair.q_key(c.q, k)))
                    .is_some_and(|ts| ts.contains(&c.t))
            })
        })
        .map(|c| {
            let mut c = *c;
            if spec.exclude_ov_denom_lim {
                if c.s > spec.denom_lim {
                    c.s = 0;
                }
                if c.d > spec.denom_lim {
                    c.d = 0;
                }
            }
            c
        })
        .collect();

    let pair = pair.with_cells(cells);
    let props = proportions(&pair);
    Excluded { pair, props, warnings }
}

fn q_labels(table: &ColumnTable, keys: &[String]) -> Result<Vec<String>> {
    let cols = keys.iter().map(|k| table.require(k)).collect::<Result<Vec<_>>>()?;
    (0..table.n_rows())
        .map(|row| {
            let values: Vec<_> = cols.iter().map(|c| c.level(row)).collect();
            compose_q(&values, keys.len()).map(|q| q.rendered)
        })
        .collect()
}

/// Synthetic table without the records whose q is unique in both datasets.
pub fn strip_replicated_uniques(orig: &ColumnTable, syn: &ColumnTable, keys: &[String]) -> Result<ColumnTable> {
    let orig_q = q_labels(orig, keys)?;
    let syn_q = q_labels(syn, keys)?;
    let mut orig_counts: HashMap<&str, u64> = HashMap::new();
    for q in &orig_q {
        *orig_counts.entry(q).or_default() += 1;
    }
    let mut syn_counts: HashMap<&str, u64> = HashMap::new();
    for q in &syn_q {
        *syn_counts.entry(q).or_default() += 1;
    }
    let keep: Vec<usize> = syn_q
        .iter()
        .enumerate()
        .filter(|(_, q)| !(syn_counts[q.as_str()] == 1 && orig_counts.get(q.as_str()) == Some(&1)))
        .map(|(i, _)| i)
        .collect();
    Ok(syn.select_rows(&keep))
}
