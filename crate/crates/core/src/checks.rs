//! Flags for apparent disclosures that prior knowledge would explain: one
//! dominant target level (1-way), or one key level that on its own predicts
//! the target level of large disclosive cells (2-way).

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tabulate::AlignedPair;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CheckThresholds {
    /// (minimum disclosive records for the level, percent of disclosive records to exceed)
    pub thresh_1way: (u64, f64),
    /// (minimum synthetic denominator, percent of key-level records to exceed)
    pub thresh_2way: (u64, f64),
}

impl Default for CheckThresholds {
    fn default() -> Self {
        CheckThresholds {
            thresh_1way: (50, 90.0),
            thresh_2way: (5, 80.0),
        }
    }
}

impl CheckThresholds {
    pub fn validate(&self) -> Result<()> {
        for (name, (count, pct)) in [("thresh_1way", self.thresh_1way), ("thresh_2way", self.thresh_2way)] {
            if count == 0 {
                return Err(Error::Config(format!("{name}: count must be positive")));
            }
            if !(pct > 0.0 && pct <= 100.0) {
                return Err(Error::Config(format!(
                    "{name}: percent must lie in (0, 100], got {pct}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check1Way {
    #[serde(rename = "Level")]
    pub level: String,
    /// Original records (the percentage base).
    #[serde(rename = "All")]
    pub all: u64,
    /// Original records with this level.
    pub level_count: u64,
    #[serde(rename = "PctLevelAll")]
    pub pct_level_all: f64,
    #[serde(rename = "totalDisclosive")]
    pub total_disclosive: u64,
    #[serde(rename = "nLevelDis")]
    pub n_level_dis: u64,
    #[serde(rename = "PctLevelDis")]
    pub pct_level_dis: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check2Way {
    /// `TARGETLEVEL|KEYLEVEL`
    pub target_key_levs: String,
    pub target_level: String,
    pub key_level: String,
    pub npairs: u64,
    pub key: String,
    pub key_target_total: u64,
    pub key_total: u64,
    #[serde(rename = "PctTargetKeyLevel")]
    pub pct_target_key_level: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckFlags {
    pub check_1way: Vec<Check1Way>,
    pub check_2way: Vec<Check2Way>,
}

pub fn run_checks(pair: &AlignedPair, thresh: &CheckThresholds) -> CheckFlags {
    CheckFlags {
        check_1way: check_1way(pair, thresh),
        check_2way: check_2way(pair, thresh),
    }
}

/// Target levels that dominate the records counted in DiSCO.
pub fn check_1way(pair: &AlignedPair, thresh: &CheckThresholds) -> Vec<Check1Way> {
    let (min_count, min_pct) = thresh.thresh_1way;
    let mut dis_by_level = vec![0u64; pair.n_t()];
    for c in pair.cells() {
        if pair.syn_certain(c) {
            dis_by_level[c.t as usize] += c.d;
        }
    }
    let total: u64 = dis_by_level.iter().sum();
    if total == 0 {
        return Vec::new();
    }
    let nd = pair.n_d();
    (0..pair.n_t())
        .filter_map(|t| {
            let n_level_dis = dis_by_level[t];
            let pct_level_dis = 100.0 * n_level_dis as f64 / total as f64;
            if n_level_dis < min_count || pct_level_dis <= min_pct {
                return None;
            }
            let level_count = pair.d_t()[t];
            Some(Check1Way {
                level: pair.t_level(t as u32).to_string(),
                all: nd,
                level_count,
                pct_level_all: 100.0 * level_count as f64 / nd as f64,
                total_disclosive: total,
                n_level_dis,
                pct_level_dis,
            })
        })
        .collect()
}

/// Key levels that by themselves predict the target level of disclosive
/// cells with large synthetic denominators.
pub fn check_2way(pair: &AlignedPair, thresh: &CheckThresholds) -> Vec<Check2Way> {
    let (min_denom, min_pct) = thresh.thresh_2way;
    let n_keys = pair.keys().len();

    // original counts by (key, key level, target level) and by (key, key level)
    let mut key_target: HashMap<(usize, u32, u32), u64> = HashMap::new();
    let mut key_total: HashMap<(usize, u32), u64> = HashMap::new();
    for c in pair.cells().iter().filter(|c| c.d > 0) {
        for k in 0..n_keys {
            let lvl = pair.q_key(c.q, k);
            *key_target.entry((k, lvl, c.t)).or_default() += c.d;
            *key_total.entry((k, lvl)).or_default() += c.d;
        }
    }

    let mut npairs: HashMap<(usize, u32, u32), u64> = HashMap::new();
    for c in pair.cells() {
        if !(pair.syn_certain(c) && c.d > 0 && c.s >= min_denom) {
            continue;
        }
        // best key: largest key_target/key_total, first key wins ties
        let mut best: Option<(usize, u32, u64, u64)> = None;
        for k in 0..n_keys {
            let lvl = pair.q_key(c.q, k);
            let num = key_target[&(k, lvl, c.t)];
            let den = key_total[&(k, lvl)];
            let better = match best {
                None => true,
                Some((_, _, bn, bd)) => (num as u128) * (bd as u128) > (bn as u128) * (den as u128),
            };
            if better {
                best = Some((k, lvl, num, den));
            }
        }
        if let Some((k, lvl, _, _)) = best {
            *npairs.entry((k, lvl, c.t)).or_default() += 1;
        }
    }

    let mut out: Vec<(usize, Check2Way)> = npairs
        .into_iter()
        .filter_map(|((k, lvl, t), n)| {
            let num = key_target[&(k, lvl, t)];
            let den = key_total[&(k, lvl)];
            let pct = 100.0 * num as f64 / den as f64;
            if pct <= min_pct {
                return None;
            }
            let target_level = pair.t_level(t).to_string();
            let key_level = pair.key_levels(k)[lvl as usize].clone();
            Some((
                k,
                Check2Way {
                    target_key_levs: format!("{target_level}|{key_level}"),
                    target_level,
                    key_level,
                    npairs: n,
                    key: pair.keys()[k].clone(),
                    key_target_total: num,
                    key_total: den,
                    pct_target_key_level: pct,
                },
            ))
        })
        .collect();
    out.sort_by(|(ka, a), (kb, b)| {
        b.npairs
            .cmp(&a.npairs)
            .then_with(|| a.target_key_levs.cmp(&b.target_key_levs))
            .then_with(|| ka.cmp(kb))
    });
    out.into_iter().map(|(_, c)| c).collect()
}
