//! Correct attribution probability family.
//!
//! Two numerators (sum of synthetic proportions over original records, and
//! the count of original records predicted with certainty and correctly)
//! crossed with four denominators (`N_d`, `N_s`, `N_b`, `N_bp`).
//! A zero denominator yields 0 and the measure's name in `undefined`.

use serde::{Deserialize, Serialize};

use crate::tabulate::{AlignedPair, Proportions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapMeasures {
    #[serde(rename = "baseCAPd")]
    pub base_cap_d: f64,
    #[serde(rename = "CAPd")]
    pub cap_d: f64,
    #[serde(rename = "CAPs")]
    pub cap_s: f64,
    #[serde(rename = "DCAP_b")]
    pub dcap_b: f64,
    #[serde(rename = "DCAP_s")]
    pub dcap_s: f64,
    #[serde(rename = "DCAP_d")]
    pub dcap_d: f64,
    #[serde(rename = "TCAP_s")]
    pub tcap_s: f64,
    #[serde(rename = "TCAP_b")]
    pub tcap_b: f64,
    #[serde(rename = "TCAP")]
    pub tcap: f64,
    #[serde(rename = "N_b")]
    pub n_b: u64,
    #[serde(rename = "N_bp")]
    pub n_bp: u64,
    /// Measures whose denominator was zero.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub undefined: Vec<String>,
}

impl CapMeasures {
    /// Measures in the column order of the numerator/denominator summary.
    pub fn named(&self) -> [(&'static str, f64); 9] {
        [
            ("baseCAPd", self.base_cap_d),
            ("CAPd", self.cap_d),
            ("CAPs", self.cap_s),
            ("DCAP_d", self.dcap_d),
            ("DCAP_s", self.dcap_s),
            ("DCAP_b", self.dcap_b),
            ("TCAP_s", self.tcap_s),
            ("TCAP_b", self.tcap_b),
            ("TCAP", self.tcap),
        ]
    }
}

pub fn cap_measures(pair: &AlignedPair, props: &Proportions) -> CapMeasures {
    let mut undefined = Vec::new();
    let mut pct = |name: &str, num: f64, den: u64| {
        if den == 0 {
            undefined.push(name.to_string());
            0.0
        } else {
            100.0 * num / den as f64
        }
    };

    let base: f64 = props.pd_t.iter().map(|p| p * p).sum();
    let mut cap_d = 0.0;
    let mut cap_s = 0.0;
    let mut dcap_num = 0.0;
    let mut tcap_num = 0u64;
    let mut n_bp = 0u64;
    for q in 0..pair.n_q() as u32 {
        let range = pair.cell_range(q);
        let mut any_certain = false;
        for i in range {
            let c = &pair.cells()[i];
            cap_d += props.pd[i] * c.d as f64;
            cap_s += props.ps[i] * c.s as f64;
            dcap_num += props.ps[i] * c.d as f64;
            if pair.syn_certain(c) {
                any_certain = true;
                tcap_num += c.d;
            }
        }
        if any_certain {
            n_bp += pair.d_q()[q as usize];
        }
    }
    let tcap_num = tcap_num as f64;

    let measures = CapMeasures {
        base_cap_d: 100.0 * base,
        cap_d: pct("CAPd", cap_d, pair.n_d()),
        cap_s: pct("CAPs", cap_s, pair.n_s()),
        dcap_b: pct("DCAP_b", dcap_num, pair.n_b()),
        dcap_s: pct("DCAP_s", dcap_num, pair.n_s()),
        dcap_d: pct("DCAP_d", dcap_num, pair.n_d()),
        tcap_s: pct("TCAP_s", tcap_num, pair.n_s()),
        tcap_b: pct("TCAP_b", tcap_num, pair.n_b()),
        tcap: pct("TCAP", tcap_num, n_bp),
        n_b: pair.n_b(),
        n_bp,
        undefined: Vec::new(),
    };
    CapMeasures { undefined, ..measures }
}
