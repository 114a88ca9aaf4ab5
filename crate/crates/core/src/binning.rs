//! Equal-frequency grouping of numeric columns.
//!
//! Cut points are sample quantiles of the pooled original and synthetic
//! values, so every replicate is grouped with the same breaks and the level
//! sets line up. Tied cut points collapse, which is why fewer groups than
//! requested can come out of skewed or low-cardinality columns.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{format_number, Cell, Column, ColumnKind, ColumnSchema, ColumnTable, SyntheticSet, MISSING_LABEL};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GroupingSpec {
    /// Requested groups per key, 0 leaves the key as it is. Empty means all 0.
    #[serde(default)]
    pub ngroups_keys: Vec<usize>,
    #[serde(default)]
    pub ngroups_targets: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinningResult {
    pub column: String,
    pub labels: Vec<String>,
    pub code_labels: Vec<String>,
    pub missing_label: String,
    pub breaks: Vec<f64>,
}

impl BinningResult {
    pub fn n_bins(&self) -> usize {
        self.labels.len()
    }

    /// Index of the value bin holding `v`.
    pub fn bin_of(&self, v: f64) -> usize {
        let last = self.n_bins() - 1;
        self.breaks.partition_point(|b| *b <= v).saturating_sub(1).min(last)
    }
}

/// Sample quantile with linear interpolation between order statistics
/// (the default definition in R and numpy). `sorted` must be ascending.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    debug_assert!(n > 0);
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    if lo + 1 >= n {
        return sorted[n - 1];
    }
    sorted[lo] + (h - lo as f64) * (sorted[lo + 1] - sorted[lo])
}

/// Deduplicated quantile cut points at probabilities 0, 1/n, ..., 1.
pub fn quantile_breaks(sorted: &[f64], ngroups: usize) -> Vec<f64> {
    let mut breaks: Vec<f64> = (0..=ngroups)
        .map(|k| quantile(sorted, k as f64 / ngroups as f64))
        .collect();
    breaks.dedup();
    breaks
}

fn interval_labels(breaks: &[f64]) -> Vec<String> {
    if breaks.len() == 1 {
        let b = format_number(breaks[0]);
        return vec![format!("[{b},{b}]")];
    }
    let last = breaks.len() - 2;
    breaks
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            let (lo, hi) = (format_number(w[0]), format_number(w[1]));
            if i == last {
                format!("[{lo},{hi}]")
            } else {
                format!("[{lo},{hi})")
            }
        })
        .collect()
}

/// Groups one numeric column of the original and the matching column of every replicate.
pub fn group_numeric(orig: &Column, syn: &[&Column], ngroups: usize) -> Result<(BinningResult, Column, Vec<Column>)> {
    let name = orig.name().to_string();
    let err = |message: String| Error::Binning {
        column: name.clone(),
        message,
    };
    if ngroups < 2 {
        return Err(err(format!("need at least 2 groups, got {ngroups}")));
    }
    if std::iter::once(orig)
        .chain(syn.iter().copied())
        .any(|c| c.kind() != ColumnKind::Numeric)
    {
        return Err(err("column is not numeric".into()));
    }

    let mut pooled = Vec::new();
    let mut codes: Vec<f64> = Vec::new();
    for col in std::iter::once(orig).chain(syn.iter().copied()) {
        for cell in col.cells() {
            match *cell {
                Cell::Number(v) => pooled.push(v),
                Cell::Code(c) => {
                    if !codes.contains(&c) {
                        codes.push(c);
                    }
                }
                Cell::Missing | Cell::Label(_) => {}
            }
        }
    }
    if pooled.is_empty() {
        return Err(err("no numeric values to group (all codes or missing)".into()));
    }
    pooled.sort_by(|a, b| a.total_cmp(b));
    // present codes keep the order they are declared in
    let declared = &orig.schema().na_codes;
    codes.sort_by_key(|c| declared.iter().position(|d| d == c).unwrap_or(usize::MAX));

    let breaks = quantile_breaks(&pooled, ngroups);
    let result = BinningResult {
        column: name.clone(),
        labels: interval_labels(&breaks),
        code_labels: codes.iter().map(|c| format_number(*c)).collect(),
        missing_label: MISSING_LABEL.to_string(),
        breaks,
    };

    let registry: Vec<String> = result.labels.iter().chain(result.code_labels.iter()).cloned().collect();
    let n_bins = result.n_bins();
    let regroup = |col: &Column| -> Column {
        let cells = col
            .cells()
            .iter()
            .map(|cell| match *cell {
                Cell::Number(v) => Cell::Label(result.bin_of(v) as u32),
                Cell::Code(c) => {
                    let i = codes.iter().position(|x| *x == c).expect("code collected above");
                    Cell::Label((n_bins + i) as u32)
                }
                Cell::Missing | Cell::Label(_) => Cell::Missing,
            })
            .collect();
        let schema = ColumnSchema {
            name: col.name().to_string(),
            kind: ColumnKind::Categorical,
            na_codes: Vec::new(),
            missing_tokens: col.schema().missing_tokens.clone(),
        };
        Column::from_parts(schema, registry.clone(), cells)
    };
    let grouped_orig = regroup(orig);
    let grouped_syn = syn.iter().map(|c| regroup(c)).collect();
    Ok((result, grouped_orig, grouped_syn))
}

#[derive(Debug, Clone)]
pub struct Grouped {
    pub orig: ColumnTable,
    pub syn: SyntheticSet,
    pub bins: Vec<BinningResult>,
}

/// Applies the requested grouping to keys and targets, leaving 0-entries and
/// everything else untouched.
pub fn apply_grouping(
    spec: &GroupingSpec,
    orig: &ColumnTable,
    syn: &SyntheticSet,
    keys: &[String],
    targets: &[String],
) -> Result<Grouped> {
    let mut requests: Vec<(&String, usize)> = Vec::new();
    for (names, counts, what) in [
        (keys, &spec.ngroups_keys, "ngroups_keys"),
        (targets, &spec.ngroups_targets, "ngroups_targets"),
    ] {
        if counts.is_empty() {
            continue;
        }
        if counts.len() != names.len() {
            return Err(Error::Config(format!(
                "{what} has {} entries but there are {} variables",
                counts.len(),
                names.len()
            )));
        }
        requests.extend(names.iter().zip(counts.iter().copied()).filter(|(_, n)| *n > 0));
    }

    let mut orig = orig.clone();
    let mut replicates = syn.replicates().to_vec();
    let mut bins = Vec::new();
    for (name, n) in requests {
        let o = orig.require(name)?;
        if o.kind() != ColumnKind::Numeric {
            return Err(Error::Config(format!(
                "grouping requested for `{name}`, which is categorical"
            )));
        }
        let s = replicates.iter().map(|r| r.require(name)).collect::<Result<Vec<_>>>()?;
        let (result, go, gs) = group_numeric(o, &s, n)?;
        orig.replace_column(go)?;
        for (r, c) in replicates.iter_mut().zip(gs) {
            r.replace_column(c)?;
        }
        bins.push(result);
    }
    Ok(Grouped {
        orig,
        syn: SyntheticSet::new(replicates)?,
        bins,
    })
}
