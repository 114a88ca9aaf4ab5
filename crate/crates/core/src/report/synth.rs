//! Toy synthesizers for demos and tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::ColumnTable;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SynthMode {
    /// Whole rows drawn with replacement.
    #[default]
    RowBootstrap,
    /// Each column drawn independently from its own empirical distribution.
    IndependentMarginals,
}

impl std::str::FromStr for SynthMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "row_bootstrap" | "row-bootstrap" => Ok(SynthMode::RowBootstrap),
            "independent_marginals" | "independent-marginals" => Ok(SynthMode::IndependentMarginals),
            other => Err(Error::Config(format!("unknown synthesis mode `{other}`"))),
        }
    }
}

fn draw(rng: &mut ChaCha8Rng, n_in: usize, n_out: usize) -> Vec<usize> {
    (0..n_out).map(|_| rng.gen_range(0..n_in)).collect()
}

pub fn bootstrap_synth(orig: &ColumnTable, mode: SynthMode, n_out: usize, seed: u64) -> Result<ColumnTable> {
    if orig.n_rows() == 0 {
        return Err(Error::Empty("cannot synthesize from an empty table".into()));
    }
    if n_out == 0 {
        return Err(Error::Config("synthetic size must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match mode {
        SynthMode::RowBootstrap => Ok(orig.select_rows(&draw(&mut rng, orig.n_rows(), n_out))),
        SynthMode::IndependentMarginals => {
            let columns = orig
                .columns()
                .iter()
                .map(|c| c.select(&draw(&mut rng, orig.n_rows(), n_out)))
                .collect();
            ColumnTable::new(columns)
        }
    }
}
