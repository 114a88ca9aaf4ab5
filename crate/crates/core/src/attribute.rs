//! Attribute disclosure for one target: the staged intruder measures from
//! "found in the synthetic data" down to "uniform in both and correct".
//!
//! Every "proportion equals one" condition is evaluated on integer counts
//! (`s_tq == s_.q`), never on the floating-point proportion.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tabulate::{AlignedPair, Proportions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttribMeasures {
    #[serde(rename = "Dorig")]
    pub dorig: f64,
    #[serde(rename = "Dsyn")]
    pub dsyn: f64,
    /// Also known as iSO.
    #[serde(rename = "iS")]
    pub is: f64,
    #[serde(rename = "DiS")]
    pub dis: f64,
    #[serde(rename = "DiSCO")]
    pub disco: f64,
    #[serde(rename = "DiSDiO")]
    pub disdio: f64,
    /// Shown as `DCAPorig` in text reports.
    #[serde(rename = "DCAP_d")]
    pub dcap_d: f64,
    /// Largest synthetic cell count behind a record counted in DiSDiO.
    pub max_denom: u64,
    /// Mean of those denominators over the records, 0 when there are none.
    pub mean_denom: f64,
}

pub fn attrib_measures(pair: &AlignedPair, props: &Proportions) -> AttribMeasures {
    let nd = pair.n_d() as f64;
    let ns = pair.n_s() as f64;
    let pct = |num: f64, den: f64| if den > 0.0 { 100.0 * num / den } else { 0.0 };

    let (mut dorig, mut dsyn, mut is, mut dis, mut disco, mut disdio) = (0u64, 0u64, 0u64, 0u64, 0u64, 0u64);
    let mut dcap = 0.0;
    let mut max_denom = 0u64;
    let mut denom_sum = 0u64;
    for q in 0..pair.n_q() as u32 {
        let range = pair.cell_range(q);
        let cells = &pair.cells()[range.clone()];
        let dq = pair.d_q()[q as usize];
        let sq = pair.s_q()[q as usize];
        if sq > 0 {
            is += dq;
            if cells.iter().any(|c| pair.syn_certain(c)) {
                dis += dq;
            }
        }
        for (c, i) in cells.iter().zip(range) {
            let syn_certain = pair.syn_certain(c);
            let orig_certain = pair.orig_certain(c);
            if orig_certain {
                dorig += c.d;
            }
            if syn_certain {
                dsyn += c.s;
                disco += c.d;
                if orig_certain {
                    disdio += c.d;
                    max_denom = max_denom.max(c.s);
                    denom_sum += c.s * c.d;
                }
            }
            dcap += props.ps[i] * c.d as f64;
        }
    }
    AttribMeasures {
        dorig: pct(dorig as f64, nd),
        dsyn: pct(dsyn as f64, ns),
        is: pct(is as f64, nd),
        dis: pct(dis as f64, nd),
        disco: pct(disco as f64, nd),
        disdio: pct(disdio as f64, nd),
        dcap_d: pct(dcap, nd),
        max_denom,
        mean_denom: if disdio > 0 {
            denom_sum as f64 / disdio as f64
        } else {
            0.0
        },
    }
}

/// Percent of original records whose synthetic attribution probability is
/// correct and at least `tau`, weighted by that probability. `tau = 1` gives
/// DiSCO and `tau = 0` gives DCAP_d.
pub fn generalized_disclosure(pair: &AlignedPair, props: &Proportions, tau: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::Config(format!("tau must lie in [0, 1], got {tau}")));
    }
    if pair.n_d() == 0 {
        return Ok(0.0);
    }
    let total: f64 = pair
        .cells()
        .iter()
        .zip(&props.ps)
        .filter(|(_, &ps)| ps > 0.0 && ps >= tau)
        .map(|(c, &ps)| ps * c.d as f64)
        .sum();
    Ok(100.0 * total / pair.n_d() as f64)
}
