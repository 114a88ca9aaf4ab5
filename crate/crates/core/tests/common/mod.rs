//! Random instances and a naive per-record oracle.
//!
//! The oracle works on plain string rows and loops over every pair of
//! records, so it shares nothing with the sparse tabulation it checks.

#![allow(dead_code)]

use disclosure_risk::attribute::{attrib_measures, AttribMeasures};
use disclosure_risk::cap::{cap_measures, CapMeasures};
use disclosure_risk::identity::{ident_measures, IdentMeasures};
use disclosure_risk::ingest::{ColumnTable, LoadOptions};
use disclosure_risk::tabulate::{build_pair, proportions, AlignedPair, NaPolicy, Proportions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Rows hold the key values followed by the target value.
#[derive(Debug, Clone)]
pub struct Instance {
    pub keys: Vec<String>,
    pub target: String,
    pub orig: Vec<Vec<String>>,
    pub syn: Vec<Vec<String>>,
}

pub struct Shape {
    pub max_rows: usize,
    pub n_keys: (usize, usize),
    pub levels: (usize, usize),
    pub same_size: bool,
    /// Chance that a key or target value is missing.
    pub p_missing: f64,
}

impl Default for Shape {
    fn default() -> Self {
        Shape {
            max_rows: 500,
            n_keys: (2, 4),
            levels: (2, 6),
            same_size: false,
            p_missing: 0.0,
        }
    }
}

fn skewed(rng: &mut ChaCha8Rng, n: usize) -> usize {
    // geometric-ish so some levels are rare and some q are unique
    let mut i = 0;
    while i + 1 < n && rng.gen_bool(0.45) {
        i += 1;
    }
    i
}

pub fn random_instance(seed: u64, shape: &Shape) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_keys = rng.gen_range(shape.n_keys.0..=shape.n_keys.1);
    let levels: Vec<usize> = (0..=n_keys)
        .map(|_| rng.gen_range(shape.levels.0..=shape.levels.1))
        .collect();
    let n_orig = rng.gen_range(1..=shape.max_rows);
    let n_syn = if shape.same_size {
        n_orig
    } else {
        rng.gen_range(1..=shape.max_rows)
    };
    let value = |rng: &mut ChaCha8Rng, col: usize| -> String {
        if shape.p_missing > 0.0 && rng.gen_bool(shape.p_missing) {
            "NA".to_string()
        } else {
            format!("v{col}_{}", skewed(rng, levels[col]))
        }
    };
    let mut orig: Vec<Vec<String>> = Vec::with_capacity(n_orig);
    for _ in 0..n_orig {
        let mut row: Vec<String> = (0..n_keys).map(|c| value(&mut rng, c)).collect();
        // target loosely follows the first key so disclosive groups occur
        let t = if rng.gen_bool(0.6) {
            let k0: usize = row[0].rsplit('_').next().and_then(|s| s.parse().ok()).unwrap_or(0);
            format!("v{n_keys}_{}", k0 % levels[n_keys])
        } else {
            value(&mut rng, n_keys)
        };
        row.push(t);
        orig.push(row);
    }
    // synthetic rows copy an original row and perturb some cells
    let syn = (0..n_syn)
        .map(|_| {
            let mut row = orig[rng.gen_range(0..n_orig)].clone();
            for (c, cell) in row.iter_mut().enumerate() {
                if rng.gen_bool(0.15) {
                    *cell = value(&mut rng, c);
                }
            }
            row
        })
        .collect();
    Instance {
        keys: (0..n_keys).map(|i| format!("k{i}")).collect(),
        target: "t".to_string(),
        orig,
        syn,
    }
}

impl Instance {
    pub fn header(&self) -> Vec<String> {
        let mut h = self.keys.clone();
        h.push(self.target.clone());
        h
    }

    fn table(&self, rows: &[Vec<String>]) -> ColumnTable {
        let opts = LoadOptions::default();
        if rows.is_empty() {
            let cols = self
                .header()
                .iter()
                .map(|name| {
                    disclosure_risk::ingest::Column::categorical(name.clone(), std::iter::empty::<Option<&str>>())
                        .unwrap()
                })
                .collect();
            return ColumnTable::new(cols).unwrap();
        }
        ColumnTable::from_records(&self.header(), rows, &opts).unwrap()
    }

    pub fn orig_table(&self) -> ColumnTable {
        self.table(&self.orig)
    }

    pub fn syn_table(&self) -> ColumnTable {
        self.table(&self.syn)
    }

    pub fn n_keys(&self) -> usize {
        self.keys.len()
    }
}

fn q(row: &[String], n_keys: usize) -> &[String] {
    &row[..n_keys]
}

fn t(row: &[String], n_keys: usize) -> &str {
    &row[n_keys]
}

#[derive(Debug, Clone, Default)]
pub struct OracleMeasures {
    pub uio: f64,
    pub uis: f64,
    pub uiois: f64,
    pub rep_u: f64,
    pub dorig: f64,
    pub dsyn: f64,
    pub is: f64,
    pub dis: f64,
    pub disco: f64,
    pub disdio: f64,
    pub dcap_d: f64,
    pub max_denom: u64,
    pub mean_denom: f64,
    pub base_cap_d: f64,
    pub cap_d: f64,
    pub cap_s: f64,
    pub dcap_b: f64,
    pub dcap_s: f64,
    pub tcap_s: f64,
    pub tcap_b: f64,
    pub tcap: f64,
    pub n_b: u64,
    pub n_bp: u64,
}

/// Per-record counts for one record against both tables.
struct Counts {
    d_q: u64,
    d_tq: u64,
    s_q: u64,
    s_tq: u64,
    /// Every synthetic record with this q has the same target.
    syn_uniform: bool,
}

fn counts(row: &[String], orig: &[Vec<String>], syn: &[Vec<String>], nk: usize) -> Counts {
    let (rq, rt) = (q(row, nk), t(row, nk));
    let mut c = Counts {
        d_q: 0,
        d_tq: 0,
        s_q: 0,
        s_tq: 0,
        syn_uniform: true,
    };
    for o in orig {
        if q(o, nk) == rq {
            c.d_q += 1;
            if t(o, nk) == rt {
                c.d_tq += 1;
            }
        }
    }
    let mut first_t: Option<&str> = None;
    for s in syn {
        if q(s, nk) == rq {
            c.s_q += 1;
            if t(s, nk) == rt {
                c.s_tq += 1;
            }
            match first_t {
                None => first_t = Some(t(s, nk)),
                Some(ft) if ft != t(s, nk) => c.syn_uniform = false,
                _ => {}
            }
        }
    }
    c
}

fn pct(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        100.0 * num / den
    } else {
        0.0
    }
}

/// Measures over the given rows with the given percentage bases.
pub fn oracle_with_bases(orig: &[Vec<String>], syn: &[Vec<String>], nk: usize, n_d: u64, n_s: u64) -> OracleMeasures {
    let (nd, ns) = (n_d as f64, n_s as f64);
    let mut m = OracleMeasures::default();
    let (mut uio, mut uiois, mut rep_u, mut dorig, mut is, mut dis, mut disco, mut disdio) = (0, 0, 0, 0, 0, 0, 0, 0);
    let (mut dcap_num, mut cap_d) = (0.0, 0.0);
    let mut denoms: Vec<u64> = Vec::new();
    for row in orig {
        let c = counts(row, orig, syn, nk);
        if c.d_q == 1 {
            uio += 1;
            if c.s_q > 0 {
                uiois += 1;
            }
            if c.s_q == 1 {
                rep_u += 1;
            }
        }
        if c.d_tq == c.d_q {
            dorig += 1;
        }
        cap_d += c.d_tq as f64 / c.d_q as f64;
        if c.s_q > 0 {
            is += 1;
            dcap_num += c.s_tq as f64 / c.s_q as f64;
            if c.syn_uniform {
                dis += 1;
            }
            if c.s_tq == c.s_q {
                disco += 1;
                if c.d_tq == c.d_q {
                    disdio += 1;
                    denoms.push(c.s_tq);
                }
            }
        }
    }
    let (mut uis, mut dsyn, mut cap_s) = (0, 0, 0.0);
    for row in syn {
        let mut s_q = 0u64;
        let mut s_tq = 0u64;
        for other in syn {
            if q(other, nk) == q(row, nk) {
                s_q += 1;
                if t(other, nk) == t(row, nk) {
                    s_tq += 1;
                }
            }
        }
        if s_q == 1 {
            uis += 1;
        }
        if s_tq == s_q {
            dsyn += 1;
        }
        cap_s += s_tq as f64 / s_q as f64;
    }
    let mut levels: Vec<&str> = orig.iter().map(|r| t(r, nk)).collect();
    levels.sort_unstable();
    levels.dedup();
    let base: f64 = levels
        .iter()
        .map(|l| {
            let p = orig.iter().filter(|r| t(r, nk) == *l).count() as f64 / nd;
            p * p
        })
        .sum();

    let n_b = is as u64;
    let n_bp = dis as u64;
    m.uio = pct(uio as f64, nd);
    m.uis = pct(uis as f64, ns);
    m.uiois = pct(uiois as f64, nd);
    m.rep_u = pct(rep_u as f64, nd);
    m.dorig = pct(dorig as f64, nd);
    m.dsyn = pct(dsyn as f64, ns);
    m.is = pct(is as f64, nd);
    m.dis = pct(dis as f64, nd);
    m.disco = pct(disco as f64, nd);
    m.disdio = pct(disdio as f64, nd);
    m.dcap_d = pct(dcap_num, nd);
    m.max_denom = denoms.iter().copied().max().unwrap_or(0);
    m.mean_denom = if denoms.is_empty() {
        0.0
    } else {
        denoms.iter().sum::<u64>() as f64 / denoms.len() as f64
    };
    m.base_cap_d = 100.0 * base;
    m.cap_d = pct(cap_d, nd);
    m.cap_s = pct(cap_s, ns);
    m.dcap_b = pct(dcap_num, n_b as f64);
    m.dcap_s = pct(dcap_num, ns);
    m.tcap_s = pct(disco as f64, ns);
    m.tcap_b = pct(disco as f64, n_b as f64);
    m.tcap = pct(disco as f64, n_bp as f64);
    m.n_b = n_b;
    m.n_bp = n_bp;
    m
}

pub fn oracle(inst: &Instance) -> OracleMeasures {
    oracle_with_bases(
        &inst.orig,
        &inst.syn,
        inst.n_keys(),
        inst.orig.len() as u64,
        inst.syn.len() as u64,
    )
}

/// Sum over original records of their synthetic proportion, counting only
/// proportions at or above `tau`.
pub fn oracle_generalized(inst: &Instance, tau: f64) -> f64 {
    let nk = inst.n_keys();
    let mut num = 0.0;
    for row in &inst.orig {
        let c = counts(row, &inst.orig, &inst.syn, nk);
        if c.s_q > 0 {
            let p = c.s_tq as f64 / c.s_q as f64;
            if p > 0.0 && p >= tau {
                num += p;
            }
        }
    }
    pct(num, inst.orig.len() as f64)
}

/// (level, level_count, total_disclosive, n_level_dis)
pub fn oracle_1way(inst: &Instance, min_count: u64, min_pct: f64) -> Vec<(String, u64, u64, u64)> {
    let nk = inst.n_keys();
    let dis: Vec<&Vec<String>> = inst
        .orig
        .iter()
        .filter(|r| {
            let c = counts(r, &inst.orig, &inst.syn, nk);
            c.s_q > 0 && c.s_tq == c.s_q
        })
        .collect();
    let total = dis.len() as u64;
    let mut levels: Vec<&str> = inst.orig.iter().map(|r| t(r, nk)).collect();
    levels.sort_unstable();
    levels.dedup();
    levels
        .into_iter()
        .filter_map(|l| {
            let n = dis.iter().filter(|r| t(r, nk) == l).count() as u64;
            let all = inst.orig.iter().filter(|r| t(r, nk) == l).count() as u64;
            (total > 0 && n >= min_count && 100.0 * n as f64 / total as f64 > min_pct)
                .then(|| (l.to_string(), all, total, n))
        })
        .collect()
}

/// (target|key level, npairs, key, key_target_total, key_total), sorted.
pub fn oracle_2way(inst: &Instance, min_denom: u64, min_pct: f64) -> Vec<(String, u64, String, u64, u64)> {
    let nk = inst.n_keys();
    // distinct disclosive cells with large synthetic counts
    let mut cells: Vec<(Vec<String>, String)> = Vec::new();
    for row in &inst.orig {
        let c = counts(row, &inst.orig, &inst.syn, nk);
        if c.s_q > 0 && c.s_tq == c.s_q && c.s_tq >= min_denom {
            let cell = (q(row, nk).to_vec(), t(row, nk).to_string());
            if !cells.contains(&cell) {
                cells.push(cell);
            }
        }
    }
    let mut groups: Vec<(usize, String, String, u64)> = Vec::new();
    for (qv, tv) in &cells {
        let mut best: Option<(usize, u64, u64)> = None;
        for (k, kv) in qv.iter().enumerate() {
            let total = inst.orig.iter().filter(|r| r[k] == *kv).count() as u64;
            let hit = inst.orig.iter().filter(|r| r[k] == *kv && t(r, nk) == tv).count() as u64;
            let better = match best {
                None => true,
                Some((_, bh, bt)) => hit * bt > bh * total,
            };
            if better {
                best = Some((k, hit, total));
            }
        }
        let (k, _, _) = best.unwrap();
        match groups.iter_mut().find(|g| g.0 == k && g.1 == qv[k] && g.2 == *tv) {
            Some(g) => g.3 += 1,
            None => groups.push((k, qv[k].clone(), tv.clone(), 1)),
        }
    }
    let mut out: Vec<_> = groups
        .into_iter()
        .filter_map(|(k, kv, tv, n)| {
            let total = inst.orig.iter().filter(|r| r[k] == kv).count() as u64;
            let hit = inst.orig.iter().filter(|r| r[k] == kv && t(r, nk) == tv).count() as u64;
            (100.0 * hit as f64 / total as f64 > min_pct)
                .then(|| (format!("{tv}|{kv}"), n, inst.keys[k].clone(), hit, total))
        })
        .collect();
    out.sort();
    out
}

pub fn assert_close(name: &str, got: f64, want: f64, tol: f64) {
    assert!((got - want).abs() <= tol, "{name}: pipeline {got} vs oracle {want}");
}

pub struct Measured {
    pub pair: AlignedPair,
    pub props: Proportions,
    pub ident: IdentMeasures,
    pub attrib: AttribMeasures,
    pub caps: CapMeasures,
}

pub fn measure_pair(pair: AlignedPair, props: Proportions) -> Measured {
    Measured {
        ident: ident_measures(&pair).unwrap(),
        attrib: attrib_measures(&pair, &props),
        caps: cap_measures(&pair, &props),
        pair,
        props,
    }
}

pub fn measure(inst: &Instance) -> Measured {
    let pair = build_pair(
        &inst.orig_table(),
        &inst.syn_table(),
        &inst.keys,
        &inst.target,
        &NaPolicy::default(),
    )
    .unwrap();
    let props = proportions(&pair);
    measure_pair(pair, props)
}

/// Every measure the oracle knows, as (name, pipeline, oracle).
pub fn compare(m: &Measured, o: &OracleMeasures) -> Vec<(&'static str, f64, f64)> {
    vec![
        ("UiO", m.ident.uio, o.uio),
        ("UiS", m.ident.uis, o.uis),
        ("UiOiS", m.ident.uiois, o.uiois),
        ("repU", m.ident.rep_u, o.rep_u),
        ("Dorig", m.attrib.dorig, o.dorig),
        ("Dsyn", m.attrib.dsyn, o.dsyn),
        ("iS", m.attrib.is, o.is),
        ("DiS", m.attrib.dis, o.dis),
        ("DiSCO", m.attrib.disco, o.disco),
        ("DiSDiO", m.attrib.disdio, o.disdio),
        ("DCAP_d", m.attrib.dcap_d, o.dcap_d),
        ("max_denom", m.attrib.max_denom as f64, o.max_denom as f64),
        ("mean_denom", m.attrib.mean_denom, o.mean_denom),
        ("baseCAPd", m.caps.base_cap_d, o.base_cap_d),
        ("CAPd", m.caps.cap_d, o.cap_d),
        ("CAPs", m.caps.cap_s, o.cap_s),
        ("DCAP_b", m.caps.dcap_b, o.dcap_b),
        ("DCAP_s", m.caps.dcap_s, o.dcap_s),
        ("DCAP_d (cap)", m.caps.dcap_d, o.dcap_d),
        ("TCAP_s", m.caps.tcap_s, o.tcap_s),
        ("TCAP_b", m.caps.tcap_b, o.tcap_b),
        ("TCAP", m.caps.tcap, o.tcap),
        ("N_b", m.caps.n_b as f64, o.n_b as f64),
        ("N_bp", m.caps.n_bp as f64, o.n_bp as f64),
    ]
}
