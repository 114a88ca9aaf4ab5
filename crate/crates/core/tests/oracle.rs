mod common;

use common::*;
use disclosure_risk::attribute::generalized_disclosure;
use disclosure_risk::checks::{check_1way, check_2way, CheckThresholds};
use disclosure_risk::exclusions::{apply_exclusions, ExcludedPair, ExclusionSpec};
use disclosure_risk::tabulate::{build_pair, NaPolicy};

const TOL: f64 = 1e-9;

fn assert_matches(seed: u64, m: &Measured, o: &OracleMeasures) {
    for (name, got, want) in compare(m, o) {
        assert!(
            (got - want).abs() <= TOL,
            "seed {seed}, {name}: pipeline {got} vs oracle {want}"
        );
    }
}

#[test]
fn random_tables_match_oracle() {
    for seed in 1000..1300 {
        let inst = random_instance(seed, &Shape::default());
        assert_matches(seed, &measure(&inst), &oracle(&inst));
    }
}

#[test]
fn tables_with_missing_values_match_oracle() {
    let shape = Shape {
        p_missing: 0.1,
        ..Default::default()
    };
    for seed in 2000..2100 {
        let inst = random_instance(seed, &shape);
        assert_matches(seed, &measure(&inst), &oracle(&inst));
    }
}

#[test]
fn tiny_tables_match_oracle() {
    let shape = Shape {
        max_rows: 6,
        n_keys: (1, 2),
        levels: (1, 3),
        ..Default::default()
    };
    for seed in 0..500 {
        let inst = random_instance(seed, &shape);
        assert_matches(seed, &measure(&inst), &oracle(&inst));
    }
}

#[test]
fn generalized_measure_matches_oracle() {
    for seed in 3000..3100 {
        let inst = random_instance(seed, &Shape::default());
        let m = measure(&inst);
        for tau in [0.0, 0.1, 0.25, 1.0 / 3.0, 0.5, 0.6, 0.9, 1.0] {
            let got = generalized_disclosure(&m.pair, &m.props, tau).unwrap();
            let want = oracle_generalized(&inst, tau);
            assert!((got - want).abs() <= TOL, "seed {seed}, tau {tau}: {got} vs {want}");
        }
    }
}

/// Removes the rows the exclusions remove, then zeroes large cells by
/// dropping their records.
fn excluded_rows(inst: &Instance, spec: &ExclusionSpec) -> (Vec<Vec<String>>, Vec<Vec<String>>) {
    let nk = inst.n_keys();
    let keep = |r: &Vec<String>| -> bool {
        if spec.not_target.contains(&r[nk]) {
            return false;
        }
        if !spec.use_target_na && r[nk] == "NA" {
            return false;
        }
        if r[..nk]
            .iter()
            .enumerate()
            .any(|(k, v)| !spec.key_na_included(k) && v == "NA")
        {
            return false;
        }
        !spec.excluded_pairs.iter().any(|p| {
            let k = inst.keys.iter().position(|n| *n == p.key).unwrap();
            r[k] == p.key_level && r[nk] == p.target_level
        })
    };
    let filter = |rows: &[Vec<String>]| -> Vec<Vec<String>> {
        let rows: Vec<Vec<String>> = rows.iter().filter(|r| keep(r)).cloned().collect();
        if !spec.exclude_ov_denom_lim {
            return rows;
        }
        rows.iter()
            .filter(|r| rows.iter().filter(|o| o == r).count() as u64 <= spec.denom_lim)
            .cloned()
            .collect()
    };
    (filter(&inst.orig), filter(&inst.syn))
}

#[test]
fn exclusions_match_brute_force_removal() {
    let shape = Shape {
        p_missing: 0.08,
        ..Default::default()
    };
    for seed in 4000..4150 {
        let inst = random_instance(seed, &shape);
        let nk = inst.n_keys();
        let variant = seed % 5;
        let spec = ExclusionSpec {
            not_target: if variant == 0 {
                vec![inst.orig[0][nk].clone()]
            } else {
                vec![]
            },
            use_keys_na: if variant == 1 { vec![false] } else { vec![] },
            use_target_na: variant != 2,
            excluded_pairs: if variant == 3 {
                vec![ExcludedPair {
                    key: inst.keys[1].clone(),
                    key_level: inst.orig[0][1].clone(),
                    target_level: inst.orig[0][nk].clone(),
                }]
            } else {
                vec![]
            },
            denom_lim: 1 + seed % 3,
            exclude_ov_denom_lim: variant == 4 || seed % 2 == 0,
        };
        let pair = build_pair(
            &inst.orig_table(),
            &inst.syn_table(),
            &inst.keys,
            &inst.target,
            &NaPolicy::default(),
        )
        .unwrap();
        let ex = apply_exclusions(&pair, &spec);
        let m = measure_pair(ex.pair, ex.props);
        let (o_rows, s_rows) = excluded_rows(&inst, &spec);
        let o = oracle_with_bases(&o_rows, &s_rows, nk, inst.orig.len() as u64, inst.syn.len() as u64);
        assert_matches(seed, &m, &o);
    }
}

#[test]
fn check_statistics_recompute_from_raw_counts() {
    let mut flagged_1 = 0;
    let mut flagged_2 = 0;
    for seed in 5000..5200 {
        let inst = random_instance(seed, &Shape::default());
        let m = measure(&inst);
        for (c1, c2) in [((1, 30.0), (1, 30.0)), ((3, 50.0), (2, 60.0)), ((50, 90.0), (5, 80.0))] {
            let th = CheckThresholds {
                thresh_1way: c1,
                thresh_2way: c2,
            };
            let mut got: Vec<_> = check_1way(&m.pair, &th)
                .into_iter()
                .map(|c| {
                    assert_eq!(c.all, inst.orig.len() as u64);
                    assert!((c.pct_level_dis - 100.0 * c.n_level_dis as f64 / c.total_disclosive as f64).abs() < 1e-12);
                    (c.level, c.level_count, c.total_disclosive, c.n_level_dis)
                })
                .collect();
            got.sort();
            let mut want = oracle_1way(&inst, c1.0, c1.1);
            want.sort();
            assert_eq!(got, want, "seed {seed} 1-way");
            flagged_1 += got.len();

            let mut got: Vec<_> = check_2way(&m.pair, &th)
                .into_iter()
                .map(|c| (c.target_key_levs, c.npairs, c.key, c.key_target_total, c.key_total))
                .collect();
            got.sort();
            let want = oracle_2way(&inst, c2.0, c2.1);
            assert_eq!(got, want, "seed {seed} 2-way");
            flagged_2 += got.len();
        }
    }
    // the comparison means little if nothing is ever flagged
    assert!(flagged_1 > 20 && flagged_2 > 20, "{flagged_1} {flagged_2}");
}
