//! End-to-end runs: single target, all targets, and the synthetic-size sweep.
//!
//! Every (target, replicate) job is independent and runs on the rayon pool.
//! Results are collected in job order, so output never depends on scheduling.

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attribute::{attrib_measures, generalized_disclosure, AttribMeasures};
use crate::binning::{apply_grouping, BinningResult};
use crate::cap::{cap_measures, CapMeasures};
use crate::checks::{run_checks, Check1Way, Check2Way};
use crate::error::{Error, Result};
use crate::exclusions::{apply_exclusions, Excluded, ExclusionSpec};
use crate::identity::{ident_measures, IdentMeasures};
use crate::ingest::{load_dataset, ColumnTable, SyntheticSet};
use crate::tabulate::{build_pair, build_q_only, AlignedPair, NaPolicy};

use super::config::{RunConfig, DEFAULT_FRACTIONS};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportKind {
    Disclosure,
    Multi,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauValue {
    pub tau: f64,
    pub value: f64,
}

/// Record counts behind one (target, replicate) result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Totals {
    #[serde(rename = "N_d")]
    pub n_d: u64,
    #[serde(rename = "N_s")]
    pub n_s: u64,
    /// Original records still counted after exclusions.
    pub counted_d: u64,
    pub counted_s: u64,
    /// Original records whose q is absent from the synthetic data.
    pub n_d_only: u64,
    pub n_s_only: u64,
}

impl Totals {
    fn of(pair: &AlignedPair) -> Totals {
        Totals {
            n_d: pair.n_d(),
            n_s: pair.n_s(),
            counted_d: pair.counted_d(),
            counted_s: pair.counted_s(),
            n_d_only: pair.n_d_only(),
            n_s_only: pair.n_s_only(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateMeasures {
    /// 1-based replicate number.
    pub replicate: usize,
    pub attrib: AttribMeasures,
    #[serde(rename = "allCAPs")]
    pub all_caps: CapMeasures,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub generalized: Vec<TauValue>,
    pub check_1way: Vec<Check1Way>,
    pub check_2way: Vec<Check2Way>,
    pub totals: Totals,
    /// Target level registry of this replicate's table.
    pub target_levels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetReport {
    pub target: String,
    pub replicates: Vec<ReplicateMeasures>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl TargetReport {
    fn mean_of(&self, f: impl Fn(&ReplicateMeasures) -> f64) -> f64 {
        self.replicates.iter().map(f).sum::<f64>() / self.replicates.len() as f64
    }

    pub fn mean_attrib(&self) -> AttribMeasures {
        let m = |f: fn(&AttribMeasures) -> f64| self.mean_of(|r| f(&r.attrib));
        AttribMeasures {
            dorig: m(|a| a.dorig),
            dsyn: m(|a| a.dsyn),
            is: m(|a| a.is),
            dis: m(|a| a.dis),
            disco: m(|a| a.disco),
            disdio: m(|a| a.disdio),
            dcap_d: m(|a| a.dcap_d),
            max_denom: self.replicates.iter().map(|r| r.attrib.max_denom).max().unwrap_or(0),
            mean_denom: m(|a| a.mean_denom),
        }
    }

    /// Replicate means of the nine CAP-family measures, in column order.
    pub fn mean_caps(&self) -> Vec<(&'static str, f64)> {
        let mut out: Vec<(&'static str, f64)> = Vec::new();
        for r in &self.replicates {
            for (i, (name, v)) in r.all_caps.named().into_iter().enumerate() {
                if out.len() <= i {
                    out.push((name, 0.0));
                }
                out[i].1 += v / self.replicates.len() as f64;
            }
        }
        out
    }
}

/// One row of the all-targets table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub target: String,
    /// Target name with any check suffix, as printed.
    pub label: String,
    /// Mean Dorig over replicates.
    #[serde(rename = "attrib.orig")]
    pub attrib_orig: f64,
    /// Mean DiSCO over replicates.
    #[serde(rename = "attrib.syn")]
    pub attrib_syn: f64,
    pub check1: String,
    pub check2: String,
    #[serde(rename = "Npairs")]
    pub npairs: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyRegistry {
    pub replicate: usize,
    /// Levels per key, in id order.
    pub levels: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisclosureReport {
    pub schema_version: u32,
    pub kind: ReportKind,
    pub keys: Vec<String>,
    pub n_orig: u64,
    pub n_syn: Vec<u64>,
    /// One row per replicate.
    pub ident: Vec<IdentMeasures>,
    pub targets: Vec<TargetReport>,
    pub summary: Vec<SummaryRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bins: Vec<BinningResult>,
    pub key_registries: Vec<KeyRegistry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl DisclosureReport {
    pub fn m(&self) -> usize {
        self.n_syn.len()
    }

    pub fn target(&self, name: &str) -> Option<&TargetReport> {
        self.targets.iter().find(|t| t.target == name)
    }
}

pub fn load_inputs(config: &RunConfig) -> Result<(ColumnTable, SyntheticSet)> {
    config.validate()?;
    let orig = config.orig.as_ref().expect("validated");
    load_dataset(orig, &config.syn, &config.load_options()?)
}

/// Targets as configured, or every synthetic column that is not a key.
pub fn resolve_targets(orig: &ColumnTable, syn: &SyntheticSet, config: &RunConfig) -> Result<Vec<String>> {
    let first = &syn.replicates()[0];
    for name in &config.keys {
        if orig.column(name).is_none() || first.column(name).is_none() {
            return Err(Error::Config(format!("key `{name}` is not a column of both datasets")));
        }
    }
    if !config.targets.is_empty() {
        for name in &config.targets {
            if orig.column(name).is_none() || first.column(name).is_none() {
                return Err(Error::Config(format!(
                    "target `{name}` is not a column of both datasets"
                )));
            }
        }
        return Ok(config.targets.clone());
    }
    Ok(first
        .names()
        .into_iter()
        .filter(|n| !config.keys.iter().any(|k| k == n))
        .map(str::to_string)
        .collect())
}

struct Job {
    measures: ReplicateMeasures,
    excluded: Excluded,
}

fn measure_target(
    orig: &ColumnTable,
    syn: &ColumnTable,
    target: &str,
    replicate: usize,
    config: &RunConfig,
) -> Result<Job> {
    let pair = build_pair(orig, syn, &config.keys, target, &NaPolicy::default())?;
    let excluded = apply_exclusions(&pair, &config.exclusions);
    let (p, props) = (&excluded.pair, &excluded.props);
    let generalized = config
        .taus
        .iter()
        .map(|&tau| generalized_disclosure(p, props, tau).map(|value| TauValue { tau, value }))
        .collect::<Result<Vec<_>>>()?;
    let checks = run_checks(p, &config.thresholds);
    let measures = ReplicateMeasures {
        replicate,
        attrib: attrib_measures(p, props),
        all_caps: cap_measures(p, props),
        generalized,
        check_1way: checks.check_1way,
        check_2way: checks.check_2way,
        totals: Totals::of(p),
        target_levels: p.t_levels().to_vec(),
    };
    Ok(Job { measures, excluded })
}

/// Exclusions that make sense without a target.
fn key_only_exclusions(spec: &ExclusionSpec) -> ExclusionSpec {
    ExclusionSpec {
        not_target: Vec::new(),
        use_target_na: true,
        excluded_pairs: Vec::new(),
        ..spec.clone()
    }
}

fn key_registry(pair: &AlignedPair, replicate: usize) -> KeyRegistry {
    KeyRegistry {
        replicate,
        levels: (0..pair.keys().len()).map(|k| pair.key_levels(k).to_vec()).collect(),
    }
}

fn summary_row(t: &TargetReport) -> SummaryRow {
    let mut levels_1way: Vec<String> = Vec::new();
    let mut pairs_2way: Vec<String> = Vec::new();
    let mut npairs = 0;
    for r in &t.replicates {
        for c in &r.check_1way {
            if !levels_1way.contains(&c.level) {
                levels_1way.push(c.level.clone());
            }
        }
        for c in &r.check_2way {
            npairs += c.npairs;
            if !pairs_2way.contains(&c.target_key_levs) {
                pairs_2way.push(c.target_key_levs.clone());
            }
        }
    }
    let check1 = if levels_1way.is_empty() {
        String::new()
    } else {
        format!("Check  {}  level  {}", t.target, levels_1way.join(" "))
    };
    let check2 = if pairs_2way.is_empty() {
        String::new()
    } else {
        format!("Check  {}  pairs  {}", t.target, pairs_2way.join(" "))
    };
    let suffix = match (check1.is_empty(), check2.is_empty()) {
        (true, true) => "",
        (false, true) => " 1way checks",
        (true, false) => " 2way checks",
        (false, false) => " 1way 2way checks",
    };
    let mean = t.mean_attrib();
    SummaryRow {
        target: t.target.clone(),
        label: format!("{}{suffix}", t.target),
        attrib_orig: mean.dorig,
        attrib_syn: mean.disco,
        check1,
        check2,
        npairs,
    }
}

fn run(
    orig: &ColumnTable,
    syn: &SyntheticSet,
    config: &RunConfig,
    targets: Vec<String>,
    kind: ReportKind,
) -> Result<DisclosureReport> {
    config.validate_variables()?;
    let grouped = apply_grouping(&config.grouping, orig, syn, &config.keys, &targets)?;
    let (orig, syn) = (&grouped.orig, &grouped.syn);
    let m = syn.m();

    let jobs: Vec<(usize, usize)> = (0..targets.len()).flat_map(|t| (0..m).map(move |r| (t, r))).collect();
    let results = jobs
        .par_iter()
        .map(|&(t, r)| measure_target(orig, &syn.replicates()[r], &targets[t], r + 1, config))
        .collect::<Result<Vec<Job>>>()?;

    let ident_pairs: Vec<AlignedPair> = if targets.is_empty() {
        let spec = key_only_exclusions(&config.exclusions);
        syn.replicates()
            .par_iter()
            .map(|s| {
                build_q_only(orig, s, &config.keys, &NaPolicy::default()).map(|p| apply_exclusions(&p, &spec).pair)
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        results[..m].iter().map(|j| j.excluded.pair.clone()).collect()
    };
    let ident = ident_pairs.iter().map(ident_measures).collect::<Result<Vec<_>>>()?;
    let key_registries = ident_pairs
        .iter()
        .enumerate()
        .map(|(r, p)| key_registry(p, r + 1))
        .collect();

    let mut warnings = Vec::new();
    let mut target_reports = Vec::with_capacity(targets.len());
    let mut results = results.into_iter();
    for target in &targets {
        let mut replicates = Vec::with_capacity(m);
        let mut tw: Vec<String> = Vec::new();
        for job in results.by_ref().take(m) {
            for w in job.excluded.warnings {
                if !tw.contains(&w) {
                    tw.push(w);
                }
            }
            replicates.push(job.measures);
        }
        warnings.extend(tw.iter().cloned());
        target_reports.push(TargetReport {
            target: target.clone(),
            replicates,
            warnings: tw,
        });
    }

    let mut summary: Vec<SummaryRow> = target_reports.iter().map(summary_row).collect();
    summary.sort_by(|a, b| a.attrib_syn.total_cmp(&b.attrib_syn));

    Ok(DisclosureReport {
        schema_version: SCHEMA_VERSION,
        kind,
        keys: config.keys.clone(),
        n_orig: orig.n_rows() as u64,
        n_syn: syn.replicates().iter().map(|r| r.n_rows() as u64).collect(),
        ident,
        targets: target_reports,
        summary,
        bins: grouped.bins,
        key_registries,
        warnings,
    })
}

/// Measures for exactly one target, once per replicate.
pub fn disclosure(orig: &ColumnTable, syn: &SyntheticSet, config: &RunConfig) -> Result<DisclosureReport> {
    if config.targets.len() != 1 {
        return Err(Error::Config(format!(
            "disclosure needs exactly one target, got {}",
            config.targets.len()
        )));
    }
    let targets = resolve_targets(orig, syn, config)?;
    run(orig, syn, config, targets, ReportKind::Disclosure)
}

/// Measures for every target plus the summary table ordered by DiSCO.
pub fn multi_disclosure(orig: &ColumnTable, syn: &SyntheticSet, config: &RunConfig) -> Result<DisclosureReport> {
    let targets = resolve_targets(orig, syn, config)?;
    run(orig, syn, config, targets, ReportKind::Multi)
}

/// Measures tracked across synthetic sizes.
pub const SWEEP_MEASURES: [&str; 7] = ["DiSCO", "DCAP_d", "DCAP_s", "DCAP_b", "TCAP_s", "TCAP_b", "TCAP"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub fraction: f64,
    pub target: String,
    /// Mean synthetic rows per replicate at this fraction.
    pub n_syn: f64,
    /// Replicate means.
    pub measures: BTreeMap<String, f64>,
}

impl SweepPoint {
    pub fn get(&self, measure: &str) -> f64 {
        self.measures.get(measure).copied().unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub schema_version: u32,
    pub keys: Vec<String>,
    pub targets: Vec<String>,
    pub n_orig: u64,
    pub m: usize,
    pub seed: u64,
    pub fractions: Vec<f64>,
    /// Ordered by fraction, then target.
    pub points: Vec<SweepPoint>,
}

impl SweepReport {
    /// Points of one target in fraction order.
    pub fn series(&self, target: &str) -> Vec<&SweepPoint> {
        self.points.iter().filter(|p| p.target == target).collect()
    }
}

fn sweep_values(a: &AttribMeasures, c: &CapMeasures) -> [f64; 7] {
    [a.disco, c.dcap_d, c.dcap_s, c.dcap_b, c.tcap_s, c.tcap_b, c.tcap]
}

/// Rows kept when subsampling `n` rows to fraction `f`; `None` keeps all.
fn subsample(n: usize, f: f64, seed: u64, stream: u64) -> Result<Option<Vec<usize>>> {
    let k = (f * n as f64).round() as usize;
    if k < 1 {
        return Err(Error::Config(format!(
            "fraction {f} of {n} synthetic rows leaves no rows"
        )));
    }
    if k >= n {
        return Ok(None);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut rows = sample(&mut rng, n, k).into_vec();
    rows.sort_unstable();
    Ok(Some(rows))
}

/// Row-subsamples every replicate without replacement to each fraction and
/// averages the measures over replicates.
pub fn sweep(orig: &ColumnTable, syn: &SyntheticSet, config: &RunConfig) -> Result<SweepReport> {
    config.validate_variables()?;
    let fractions: Vec<f64> = if config.fractions.is_empty() {
        DEFAULT_FRACTIONS.to_vec()
    } else {
        config.fractions.clone()
    };
    for &f in &fractions {
        if !(f > 0.0 && f <= 1.0) {
            return Err(Error::Config(format!("fraction must lie in (0, 1], got {f}")));
        }
    }
    let targets = resolve_targets(orig, syn, config)?;
    if targets.is_empty() {
        return Err(Error::Config("sweep needs at least one target".into()));
    }
    let grouped = apply_grouping(&config.grouping, orig, syn, &config.keys, &targets)?;
    let (orig, syn) = (&grouped.orig, &grouped.syn);
    let m = syn.m();

    let jobs: Vec<(usize, usize)> = (0..fractions.len()).flat_map(|f| (0..m).map(move |r| (f, r))).collect();
    let results = jobs
        .par_iter()
        .map(|&(fi, ri)| -> Result<(usize, Vec<[f64; 7]>)> {
            let full = &syn.replicates()[ri];
            let stream = (fi * m + ri) as u64;
            let sub;
            let rep = match subsample(full.n_rows(), fractions[fi], config.seed, stream)? {
                Some(rows) => {
                    sub = full.select_rows(&rows);
                    &sub
                }
                None => full,
            };
            let values = targets
                .iter()
                .map(|t| {
                    let job = measure_target(orig, rep, t, ri + 1, config)?;
                    Ok(sweep_values(&job.measures.attrib, &job.measures.all_caps))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((rep.n_rows(), values))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut points = Vec::with_capacity(fractions.len() * targets.len());
    for (fi, &fraction) in fractions.iter().enumerate() {
        let block = &results[fi * m..(fi + 1) * m];
        let n_syn = block.iter().map(|(n, _)| *n as f64).sum::<f64>() / m as f64;
        for (ti, target) in targets.iter().enumerate() {
            let measures = SWEEP_MEASURES
                .iter()
                .enumerate()
                .map(|(i, name)| {
                    let mean = block.iter().map(|(_, v)| v[ti][i]).sum::<f64>() / m as f64;
                    (name.to_string(), mean)
                })
                .collect();
            points.push(SweepPoint {
                fraction,
                target: target.clone(),
                n_syn,
                measures,
            });
        }
    }
    Ok(SweepReport {
        schema_version: SCHEMA_VERSION,
        keys: config.keys.clone(),
        targets,
        n_orig: orig.n_rows() as u64,
        m,
        seed: config.seed,
        fractions,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::LoadOptions;
    use crate::tabulate::tests::toy5;

    fn config(targets: &[&str]) -> RunConfig {
        RunConfig {
            keys: vec!["k".into()],
            targets: targets.iter().map(|s| s.to_string()).collect(),
            ..Default::default()
        }
    }

    fn toy5_set() -> (ColumnTable, SyntheticSet) {
        let (o, s) = toy5();
        (o, SyntheticSet::new(vec![s]).unwrap())
    }

    #[test]
    fn toy5_disclosure() {
        let (o, s) = toy5_set();
        let r = disclosure(&o, &s, &config(&["t"])).unwrap();
        assert_eq!(r.ident.len(), 1);
        assert_eq!(r.ident[0].uio, 60.0);
        assert_eq!(r.ident[0].rep_u, 20.0);
        let t = &r.targets[0].replicates[0];
        assert_eq!(t.attrib.disco, 20.0);
        assert_eq!(t.all_caps.dcap_b, 37.5);
        assert_eq!(r.summary.len(), 1);
        assert_eq!(r.summary[0].attrib_orig, 60.0);
        assert_eq!(r.summary[0].attrib_syn, 20.0);
    }

    #[test]
    fn disclosure_needs_one_target() {
        let (o, s) = toy5_set();
        assert!(disclosure(&o, &s, &config(&[])).unwrap_err().is_config());
        assert!(disclosure(&o, &s, &config(&["k"])).unwrap_err().is_config());
        assert!(disclosure(&o, &s, &config(&["zz"])).unwrap_err().is_config());
    }

    #[test]
    fn multi_resolves_all_non_keys_and_sorts() {
        let rows: Vec<Vec<&str>> = vec![
            vec!["a", "x", "1", "p"],
            vec!["a", "x", "2", "p"],
            vec!["b", "y", "3", "q"],
            vec!["c", "z", "4", "q"],
        ];
        let o = ColumnTable::from_records(&["k", "t1", "t2", "t3"], &rows, &LoadOptions::default()).unwrap();
        let s = SyntheticSet::new(vec![o.clone()]).unwrap();
        let r = multi_disclosure(&o, &s, &config(&[])).unwrap();
        let names: Vec<_> = r.targets.iter().map(|t| t.target.as_str()).collect();
        assert_eq!(names, vec!["t1", "t2", "t3"]);
        // t2 is disclosive only for the two unique keys; t1 and t3 tie at 100
        let order: Vec<_> = r.summary.iter().map(|s| s.target.as_str()).collect();
        assert_eq!(order, vec!["t2", "t1", "t3"]);
        assert_eq!(r.summary[0].attrib_syn, 50.0);
    }

    #[test]
    fn no_targets_gives_identity_only() {
        let (o, s) = toy5_set();
        let mut c = config(&[]);
        c.keys = vec!["k".into(), "t".into()];
        let r = multi_disclosure(&o, &s, &c).unwrap();
        assert!(r.targets.is_empty());
        assert_eq!(r.ident.len(), 1);
        assert_eq!(r.ident[0].uio, 100.0);
    }

    #[test]
    fn sweep_full_fraction_matches_full_run() {
        let (o, s) = toy5_set();
        let mut c = config(&["t"]);
        c.fractions = vec![1.0];
        let sw = sweep(&o, &s, &c).unwrap();
        assert_eq!(sw.points.len(), 1);
        assert_eq!(sw.points[0].get("DiSCO"), 20.0);
        assert_eq!(sw.points[0].get("DCAP_b"), 37.5);
        assert_eq!(sw.points[0].n_syn, 5.0);
    }

    #[test]
    fn sweep_rejects_empty_sample() {
        let (o, s) = toy5_set();
        let mut c = config(&["t"]);
        c.fractions = vec![1e-9];
        assert!(sweep(&o, &s, &c).is_err());
    }

    #[test]
    fn subsample_is_seeded() {
        let a = subsample(100, 0.3, 5, 2).unwrap().unwrap();
        assert_eq!(a.len(), 30);
        assert_eq!(a, subsample(100, 0.3, 5, 2).unwrap().unwrap());
        assert_ne!(a, subsample(100, 0.3, 5, 3).unwrap().unwrap());
        assert!(subsample(100, 1.0, 5, 0).unwrap().is_none());
    }
}
