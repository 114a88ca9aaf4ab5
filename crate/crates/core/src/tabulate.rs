//! Quasi-identifier composition and the aligned original/synthetic q×t tables.
//!
//! Both tables live in one sparse cell list keyed by interned `(q, t)` ids,
//! sorted by `q` then `t`, with a row-pointer array giving each `q` its
//! contiguous run of cells. Levels are the union over both datasets, so
//! `d` and `s` are indexed identically.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::{Column, ColumnTable};

pub const Q_SEPARATOR: &str = " | ";

/// Target level used when tabulating q alone.
pub const ALL_LEVEL: &str = "(all)";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QLevel {
    pub key_values: Vec<String>,
    pub rendered: String,
}

impl QLevel {
    /// Splits a rendered composite label back into key values.
    pub fn parse(rendered: &str) -> QLevel {
        QLevel {
            key_values: rendered.split(Q_SEPARATOR).map(str::to_string).collect(),
            rendered: rendered.to_string(),
        }
    }
}

pub fn compose_q<S: AsRef<str>>(values: &[S], n_keys: usize) -> Result<QLevel> {
    if values.len() != n_keys {
        return Err(Error::Tabulate(format!(
            "expected {n_keys} key values, got {}",
            values.len()
        )));
    }
    let key_values: Vec<String> = values.iter().map(|v| v.as_ref().to_string()).collect();
    let rendered = key_values.join(Q_SEPARATOR);
    Ok(QLevel { key_values, rendered })
}

/// Which variables keep their missing values as a level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NaPolicy {
    /// One flag per key; empty means every key keeps missing values.
    pub keys: Vec<bool>,
    pub target: bool,
}

impl Default for NaPolicy {
    fn default() -> Self {
        NaPolicy {
            keys: Vec::new(),
            target: true,
        }
    }
}

impl NaPolicy {
    pub fn key_included(&self, k: usize) -> bool {
        self.keys.get(k).copied().unwrap_or(true)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CellCount {
    pub q: u32,
    pub t: u32,
    /// Original count `d_tq`.
    pub d: u64,
    /// Synthetic count `s_tq`.
    pub s: u64,
}

#[derive(Debug, Clone)]
pub struct AlignedPair {
    keys: Vec<String>,
    target: Option<String>,
    key_levels: Vec<Vec<String>>,
    key_missing: Vec<Option<u32>>,
    q_keys: Vec<Vec<u32>>,
    t_levels: Vec<String>,
    t_missing: Option<u32>,
    cells: Vec<CellCount>,
    q_start: Vec<usize>,
    d_q: Vec<u64>,
    s_q: Vec<u64>,
    d_t: Vec<u64>,
    s_t: Vec<u64>,
    n_d: u64,
    n_s: u64,
    n_b: u64,
    n_d_only: u64,
    n_s_only: u64,
    row_index_orig: Vec<Option<(u32, u32)>>,
}

struct Interner {
    index: HashMap<String, u32>,
    levels: Vec<String>,
}

impl Interner {
    fn new() -> Self {
        Interner {
            index: HashMap::new(),
            levels: Vec::new(),
        }
    }

    fn intern(&mut self, s: &str) -> u32 {
        if let Some(&id) = self.index.get(s) {
            return id;
        }
        let id = self.levels.len() as u32;
        self.levels.push(s.to_string());
        self.index.insert(s.to_string(), id);
        id
    }
}

/// Per-column level ids for one table; `None` marks a row dropped by the NA policy.
fn level_ids(col: &Column, interner: &mut Interner, keep_missing: bool) -> Vec<Option<u32>> {
    // map the column's own label registry once instead of hashing every cell
    let label_ids: Vec<u32> = col.labels().iter().map(|l| interner.intern(l)).collect();
    col.cells()
        .iter()
        .enumerate()
        .map(|(row, cell)| match cell {
            crate::ingest::Cell::Missing if !keep_missing => None,
            crate::ingest::Cell::Label(i) => Some(label_ids[*i as usize]),
            _ => Some(interner.intern(&col.level(row))),
        })
        .collect()
}

pub fn build_pair(
    orig: &ColumnTable,
    syn: &ColumnTable,
    keys: &[String],
    target: &str,
    na_policy: &NaPolicy,
) -> Result<AlignedPair> {
    AlignedPair::build(orig, syn, keys, Some(target), na_policy)
}

/// Tabulates q alone (a single pseudo target level); used for identity measures.
pub fn build_q_only(
    orig: &ColumnTable,
    syn: &ColumnTable,
    keys: &[String],
    na_policy: &NaPolicy,
) -> Result<AlignedPair> {
    AlignedPair::build(orig, syn, keys, None, na_policy)
}

impl AlignedPair {
    fn build(
        orig: &ColumnTable,
        syn: &ColumnTable,
        keys: &[String],
        target: Option<&str>,
        na_policy: &NaPolicy,
    ) -> Result<Self> {
        if keys.is_empty() {
            return Err(Error::Config("at least one key is required".into()));
        }
        if let Some(t) = target {
            if keys.iter().any(|k| k == t) {
                return Err(Error::Config(format!("target `{t}` is also a key")));
            }
        }
        if orig.n_rows() == 0 {
            return Err(Error::Empty("original table has no rows".into()));
        }
        if syn.n_rows() == 0 {
            return Err(Error::Empty("synthetic table has no rows".into()));
        }
        let lookup = |table: &'_ ColumnTable, which: &str, name: &str| -> Result<()> {
            if table.column(name).is_none() {
                return Err(Error::Config(format!("unknown column `{name}` in {which} data")));
            }
            Ok(())
        };
        for name in keys.iter().map(String::as_str).chain(target) {
            lookup(orig, "original", name)?;
            lookup(syn, "synthetic", name)?;
        }

        let n_keys = keys.len();
        let mut key_interners: Vec<Interner> = (0..n_keys).map(|_| Interner::new()).collect();
        let mut t_interner = Interner::new();
        let mut q_index: HashMap<Vec<u32>, u32> = HashMap::new();
        let mut q_keys: Vec<Vec<u32>> = Vec::new();
        let mut counts: HashMap<(u32, u32), (u64, u64)> = HashMap::new();
        let mut row_index_orig = Vec::with_capacity(orig.n_rows());

        for (is_orig, table) in [(true, orig), (false, syn)] {
            let key_cols: Vec<Vec<Option<u32>>> = keys
                .iter()
                .enumerate()
                .map(|(k, name)| {
                    let col = table.column(name).expect("checked above");
                    level_ids(col, &mut key_interners[k], na_policy.key_included(k))
                })
                .collect();
            let t_col: Vec<Option<u32>> = match target {
                Some(name) => {
                    let col = table.column(name).expect("checked above");
                    level_ids(col, &mut t_interner, na_policy.target)
                }
                None => {
                    let id = t_interner.intern(ALL_LEVEL);
                    vec![Some(id); table.n_rows()]
                }
            };
            let mut tuple = Vec::with_capacity(n_keys);
            for row in 0..table.n_rows() {
                tuple.clear();
                let mut keep = t_col[row].is_some();
                for col in &key_cols {
                    match col[row] {
                        Some(id) => tuple.push(id),
                        None => keep = false,
                    }
                }
                if !keep {
                    if is_orig {
                        row_index_orig.push(None);
                    }
                    continue;
                }
                let t = t_col[row].expect("checked keep");
                let q = match q_index.get(&tuple) {
                    Some(&q) => q,
                    None => {
                        let q = q_keys.len() as u32;
                        q_index.insert(tuple.clone(), q);
                        q_keys.push(tuple.clone());
                        q
                    }
                };
                let e = counts.entry((q, t)).or_insert((0, 0));
                if is_orig {
                    e.0 += 1;
                    row_index_orig.push(Some((q, t)));
                } else {
                    e.1 += 1;
                }
            }
        }

        let key_missing = key_interners
            .iter()
            .map(|i| i.index.get(crate::ingest::MISSING_LABEL).copied())
            .collect();
        let t_missing = match target {
            Some(_) => t_interner.index.get(crate::ingest::MISSING_LABEL).copied(),
            None => None,
        };
        let cells = counts
            .into_iter()
            .map(|((q, t), (d, s))| CellCount { q, t, d, s })
            .collect();
        Ok(AlignedPair::assemble(
            keys.to_vec(),
            target.map(str::to_string),
            key_interners.into_iter().map(|i| i.levels).collect(),
            key_missing,
            q_keys,
            t_interner.levels,
            t_missing,
            cells,
            orig.n_rows() as u64,
            syn.n_rows() as u64,
            row_index_orig,
        ))
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        keys: Vec<String>,
        target: Option<String>,
        key_levels: Vec<Vec<String>>,
        key_missing: Vec<Option<u32>>,
        q_keys: Vec<Vec<u32>>,
        t_levels: Vec<String>,
        t_missing: Option<u32>,
        mut cells: Vec<CellCount>,
        n_d: u64,
        n_s: u64,
        row_index_orig: Vec<Option<(u32, u32)>>,
    ) -> Self {
        cells.sort_unstable_by_key(|c| (c.q, c.t));
        let nq = q_keys.len();
        let nt = t_levels.len();
        let mut q_start = vec![0usize; nq + 1];
        let mut d_q = vec![0u64; nq];
        let mut s_q = vec![0u64; nq];
        let mut d_t = vec![0u64; nt];
        let mut s_t = vec![0u64; nt];
        for c in &cells {
            q_start[c.q as usize + 1] += 1;
            d_q[c.q as usize] += c.d;
            s_q[c.q as usize] += c.s;
            d_t[c.t as usize] += c.d;
            s_t[c.t as usize] += c.s;
        }
        for q in 0..nq {
            q_start[q + 1] += q_start[q];
        }
        let mut n_b = 0;
        let mut n_d_only = 0;
        let mut n_s_only = 0;
        for q in 0..nq {
            if s_q[q] > 0 {
                n_b += d_q[q];
            } else {
                n_d_only += d_q[q];
            }
            if d_q[q] == 0 {
                n_s_only += s_q[q];
            }
        }
        AlignedPair {
            keys,
            target,
            key_levels,
            key_missing,
            q_keys,
            t_levels,
            t_missing,
            cells,
            q_start,
            d_q,
            s_q,
            d_t,
            s_t,
            n_d,
            n_s,
            n_b,
            n_d_only,
            n_s_only,
            row_index_orig,
        }
    }

    /// New pair over `cells` (same ids as `self`), dropping empty cells and
    /// compacting the q registry. Percentage bases are kept.
    pub(crate) fn with_cells(&self, cells: Vec<CellCount>) -> AlignedPair {
        let cells: Vec<CellCount> = cells.into_iter().filter(|c| c.d > 0 || c.s > 0).collect();
        let mut remap = vec![u32::MAX; self.q_keys.len()];
        for c in &cells {
            remap[c.q as usize] = 0;
        }
        let mut q_keys = Vec::new();
        for (q, slot) in remap.iter_mut().enumerate() {
            if *slot == 0 {
                *slot = q_keys.len() as u32;
                q_keys.push(self.q_keys[q].clone());
            }
        }
        let surviving: std::collections::HashSet<(u32, u32)> =
            cells.iter().filter(|c| c.d > 0).map(|c| (c.q, c.t)).collect();
        let row_index_orig = self
            .row_index_orig
            .iter()
            .map(|r| match r {
                Some(qt) if surviving.contains(qt) => Some((remap[qt.0 as usize], qt.1)),
                _ => None,
            })
            .collect();
        let cells = cells
            .into_iter()
            .map(|c| CellCount {
                q: remap[c.q as usize],
                ..c
            })
            .collect();
        AlignedPair::assemble(
            self.keys.clone(),
            self.target.clone(),
            self.key_levels.clone(),
            self.key_missing.clone(),
            q_keys,
            self.t_levels.clone(),
            self.t_missing,
            cells,
            self.n_d,
            self.n_s,
            row_index_orig,
        )
    }

    pub fn keys(&self) -> &[String] {
        &self.keys
    }

    pub fn target(&self) -> Option<&str> {
        self.target.as_deref()
    }

    pub fn n_q(&self) -> usize {
        self.q_keys.len()
    }

    pub fn n_t(&self) -> usize {
        self.t_levels.len()
    }

    pub fn cells(&self) -> &[CellCount] {
        &self.cells
    }

    /// Cells of one q, sorted by t.
    pub fn cells_of(&self, q: u32) -> &[CellCount] {
        let q = q as usize;
        &self.cells[self.q_start[q]..self.q_start[q + 1]]
    }

    pub fn cell_range(&self, q: u32) -> std::ops::Range<usize> {
        self.q_start[q as usize]..self.q_start[q as usize + 1]
    }

    fn find(&self, q: u32, t: u32) -> Option<&CellCount> {
        let run = self.cells_of(q);
        run.binary_search_by_key(&t, |c| c.t).ok().map(|i| &run[i])
    }

    /// `d_tq`
    pub fn d(&self, q: u32, t: u32) -> u64 {
        self.find(q, t).map_or(0, |c| c.d)
    }

    /// `s_tq`
    pub fn s(&self, q: u32, t: u32) -> u64 {
        self.find(q, t).map_or(0, |c| c.s)
    }

    pub fn d_q(&self) -> &[u64] {
        &self.d_q
    }

    pub fn s_q(&self) -> &[u64] {
        &self.s_q
    }

    pub fn d_t(&self) -> &[u64] {
        &self.d_t
    }

    pub fn s_t(&self) -> &[u64] {
        &self.s_t
    }

    /// Original record count; the percentage base for every original-side measure.
    pub fn n_d(&self) -> u64 {
        self.n_d
    }

    pub fn n_s(&self) -> u64 {
        self.n_s
    }

    /// Original records whose q also occurs in the synthetic data.
    pub fn n_b(&self) -> u64 {
        self.n_b
    }

    pub fn n_d_only(&self) -> u64 {
        self.n_d_only
    }

    pub fn n_s_only(&self) -> u64 {
        self.n_s_only
    }

    /// Sum of tabulated original counts (below `n_d` after exclusions).
    pub fn counted_d(&self) -> u64 {
        self.d_q.iter().sum()
    }

    pub fn counted_s(&self) -> u64 {
        self.s_q.iter().sum()
    }

    pub fn row_index_orig(&self) -> &[Option<(u32, u32)>] {
        &self.row_index_orig
    }

    pub fn t_levels(&self) -> &[String] {
        &self.t_levels
    }

    pub fn t_level(&self, t: u32) -> &str {
        &self.t_levels[t as usize]
    }

    pub fn t_missing(&self) -> Option<u32> {
        self.t_missing
    }

    pub fn t_id(&self, level: &str) -> Option<u32> {
        self.t_levels.iter().position(|l| l == level).map(|i| i as u32)
    }

    pub fn key_levels(&self, k: usize) -> &[String] {
        &self.key_levels[k]
    }

    pub fn key_missing(&self, k: usize) -> Option<u32> {
        self.key_missing[k]
    }

    /// Level id of key `k` within q.
    pub fn q_key(&self, q: u32, k: usize) -> u32 {
        self.q_keys[q as usize][k]
    }

    pub fn q_level(&self, q: u32) -> QLevel {
        let values: Vec<&str> = self.q_keys[q as usize]
            .iter()
            .enumerate()
            .map(|(k, &id)| self.key_levels[k][id as usize].as_str())
            .collect();
        compose_q(&values, self.keys.len()).expect("arity matches keys")
    }

    pub fn q_rendered(&self) -> Vec<String> {
        (0..self.n_q() as u32).map(|q| self.q_level(q).rendered).collect()
    }

    /// `ps_tq = 1`, i.e. the synthetic q group is uniform on this t.
    pub fn syn_certain(&self, c: &CellCount) -> bool {
        c.s > 0 && c.s == self.s_q[c.q as usize]
    }

    /// `pd_tq = 1`
    pub fn orig_certain(&self, c: &CellCount) -> bool {
        c.d > 0 && c.d == self.d_q[c.q as usize]
    }
}

/// Column proportions aligned with [`AlignedPair::cells`].
#[derive(Debug, Clone, PartialEq)]
pub struct Proportions {
    pub pd: Vec<f64>,
    pub ps: Vec<f64>,
    /// `d_t. / N_d`, indexed by t.
    pub pd_t: Vec<f64>,
}

pub fn proportions(pair: &AlignedPair) -> Proportions {
    let ratio = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let pd = pair
        .cells()
        .iter()
        .map(|c| ratio(c.d, pair.d_q()[c.q as usize]))
        .collect();
    let ps = pair
        .cells()
        .iter()
        .map(|c| ratio(c.s, pair.s_q()[c.q as usize]))
        .collect();
    let pd_t = pair.d_t().iter().map(|&d| ratio(d, pair.n_d())).collect();
    Proportions { pd, ps, pd_t }
}
