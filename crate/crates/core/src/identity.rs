//! Identity disclosure: uniqueness of q in the original and synthetic data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tabulate::AlignedPair;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentMeasures {
    /// % of original records unique on q.
    #[serde(rename = "UiO")]
    pub uio: f64,
    /// % of synthetic records unique on q (base `N_s`).
    #[serde(rename = "UiS")]
    pub uis: f64,
    /// % of original records unique on q whose q occurs in the synthetic data.
    #[serde(rename = "UiOiS")]
    pub uiois: f64,
    /// % of original records unique on q in both datasets.
    #[serde(rename = "repU")]
    pub rep_u: f64,
}

pub fn ident_measures(pair: &AlignedPair) -> Result<IdentMeasures> {
    if pair.n_d() == 0 {
        return Err(Error::Empty("original table has no rows".into()));
    }
    if pair.n_s() == 0 {
        return Err(Error::Empty("synthetic table has no rows".into()));
    }
    let (mut uio, mut uis, mut uiois, mut rep_u) = (0u64, 0u64, 0u64, 0u64);
    for (&d, &s) in pair.d_q().iter().zip(pair.s_q()) {
        if s == 1 {
            uis += 1;
        }
        if d == 1 {
            uio += 1;
            if s > 0 {
                uiois += 1;
            }
            if s == 1 {
                rep_u += 1;
            }
        }
    }
    let nd = pair.n_d() as f64;
    Ok(IdentMeasures {
        uio: 100.0 * uio as f64 / nd,
        uis: 100.0 * uis as f64 / pair.n_s() as f64,
        uiois: 100.0 * uiois as f64 / nd,
        rep_u: 100.0 * rep_u as f64 / nd,
    })
}
