use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use disclosure_risk::error::{Error, Result};
use disclosure_risk::exclusions::{strip_replicated_uniques, ExcludedPair};
use disclosure_risk::ingest::{load_dataset, load_table, write_table, write_table_path, LoadOptions};
use disclosure_risk::report::config::{OutputFormat, RunConfig, Section};
use disclosure_risk::report::pipeline::{disclosure, load_inputs, multi_disclosure, sweep};
use disclosure_risk::report::render::{render_report, render_sweep};
use disclosure_risk::report::synth::{bootstrap_synth, SynthMode};

#[derive(Parser)]
#[command(
    name = "disclosure-risk",
    version,
    about = "Disclosure risk measures for synthetic data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Measures for a single target
    Disclosure(RunArgs),
    /// Measures for every target, with the summary table
    Multi(RunArgs),
    /// Measures as the synthetic data shrinks
    Sweep(RunArgs),
    /// Write a bootstrap synthetic table
    Synth(SynthArgs),
    /// Drop synthetic records that are unique on the keys in both tables
    StripUniques(StripArgs),
}

fn parse_thresh(s: &str) -> std::result::Result<(u64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected COUNT,PERCENT, got `{s}`"))?;
    let a = a.trim().parse::<u64>().map_err(|e| format!("`{a}`: {e}"))?;
    let b = b.trim().parse::<f64>().map_err(|e| format!("`{b}`: {e}"))?;
    Ok((a, b))
}

fn parse_na_code(s: &str) -> std::result::Result<(String, f64), String> {
    let (col, val) = s
        .split_once('=')
        .ok_or_else(|| format!("expected COL=VALUE, got `{s}`"))?;
    let v = val.trim().parse::<f64>().map_err(|e| format!("`{val}`: {e}"))?;
    Ok((col.to_string(), v))
}

#[derive(Args)]
struct RunArgs {
    /// Flat JSON config file; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    orig: Option<PathBuf>,
    /// Synthetic replicate (repeat for several)
    #[arg(long)]
    syn: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    keys: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    targets: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    ngroups_keys: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    ngroups_targets: Vec<usize>,
    /// Numeric code to treat as missing, COL=VALUE (repeatable)
    #[arg(long, value_parser = parse_na_code)]
    na_codes: Vec<(String, f64)>,
    #[arg(long, value_delimiter = ',')]
    missing_tokens: Vec<String>,
    #[arg(long)]
    delimiter: Option<char>,
    #[arg(long = "thresh-1way", value_parser = parse_thresh)]
    thresh_1way: Option<(u64, f64)>,
    #[arg(long = "thresh-2way", value_parser = parse_thresh)]
    thresh_2way: Option<(u64, f64)>,
    /// text, json, csv or svg
    #[arg(long)]
    format: Option<OutputFormat>,
    /// Sections: ident, attrib, allCAPs, check_1way, check_2way
    #[arg(long, value_delimiter = ',')]
    to_print: Vec<Section>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Thresholds for the generalized measure
    #[arg(long, value_delimiter = ',')]
    taus: Vec<f64>,
    /// Synthetic size fractions for `sweep`
    #[arg(long, value_delimiter = ',')]
    fractions: Vec<f64>,
    /// Target level to exclude (repeatable)
    #[arg(long)]
    not_target: Vec<String>,
    /// Keep missing key values, one flag or one per key
    #[arg(long, value_delimiter = ',')]
    use_keys_na: Vec<bool>,
    #[arg(long)]
    use_target_na: Option<bool>,
    /// KEY=LEVEL:TARGETLEVEL (repeatable)
    #[arg(long)]
    exclude_pair: Vec<ExcludedPair>,
    #[arg(long)]
    denom_lim: Option<u64>,
    #[arg(long)]
    exclude_ov_denom_lim: bool,
}

impl RunArgs {
    fn into_config(self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(path) => RunConfig::from_json_file(path)?,
            None => RunConfig::default(),
        };
        fn set<T>(slot: &mut T, v: Option<T>) {
            if let Some(v) = v {
                *slot = v;
            }
        }
        fn set_vec<T>(slot: &mut Vec<T>, v: Vec<T>) {
            if !v.is_empty() {
                *slot = v;
            }
        }
        if self.orig.is_some() {
            c.orig = self.orig;
        }
        set_vec(&mut c.syn, self.syn);
        set_vec(&mut c.keys, self.keys);
        set_vec(&mut c.targets, self.targets);
        set_vec(&mut c.grouping.ngroups_keys, self.ngroups_keys);
        set_vec(&mut c.grouping.ngroups_targets, self.ngroups_targets);
        for (col, v) in self.na_codes {
            c.na_codes.entry(col).or_default().push(v);
        }
        set_vec(&mut c.missing_tokens, self.missing_tokens);
        set(&mut c.delimiter, self.delimiter);
        set(&mut c.thresholds.thresh_1way, self.thresh_1way);
        set(&mut c.thresholds.thresh_2way, self.thresh_2way);
        set(&mut c.format, self.format);
        set_vec(&mut c.to_print, self.to_print);
        set(&mut c.seed, self.seed);
        if self.out.is_some() {
            c.out = self.out;
        }
        set_vec(&mut c.taus, self.taus);
        set_vec(&mut c.fractions, self.fractions);
        set_vec(&mut c.exclusions.not_target, self.not_target);
        set_vec(&mut c.exclusions.use_keys_na, self.use_keys_na);
        set(&mut c.exclusions.use_target_na, self.use_target_na);
        set_vec(&mut c.exclusions.excluded_pairs, self.exclude_pair);
        set(&mut c.exclusions.denom_lim, self.denom_lim);
        if self.exclude_ov_denom_lim {
            c.exclusions.exclude_ov_denom_lim = true;
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    orig: PathBuf,
    /// Output file; with --m above 1, `_1`, `_2`, ... are added to the stem
    #[arg(long)]
    out: PathBuf,
    /// Rows per synthetic table (default: as many as the original)
    #[arg(long)]
    n: Option<usize>,
    /// row_bootstrap or independent_marginals
    #[arg(long, default_value = "row_bootstrap")]
    mode: SynthMode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of tables to write
    #[arg(long, default_value_t = 1)]
    m: usize,
    #[arg(long, default_value_t = ',')]
    delimiter: char,
}

#[derive(Args)]
struct StripArgs {
    #[arg(long)]
    orig: PathBuf,
    #[arg(long)]
    syn: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    keys: Vec<String>,
    /// Output file (default: standard output)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = ',')]
    delimiter: char,
}

fn delimiter_byte(c: char) -> Result<u8> {
    if c.is_ascii() {
        Ok(c as u8)
    } else {
        Err(Error::Config(format!("delimiter `{c}` is not a single byte")))
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| Error::Io {
                path: "<stdout>".into(),
                source: e,
            })
        }
    }
}

fn replicate_path(out: &Path, i: usize) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match out.extension() {
        Some(ext) => format!("{stem}_{i}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{i}"),
    };
    out.with_file_name(name)
}

enum Analysis {
    Single,
    Multi,
    Sweep,
}

fn analyse(args: RunArgs, kind: Analysis) -> Result<()> {
    let config = args.into_config()?;
    let (orig, syn) = load_inputs(&config)?;
    let text = match kind {
        Analysis::Single => render_report(&disclosure(&orig, &syn, &config)?, config.format, &config.sections())?,
        Analysis::Multi => render_report(
            &multi_disclosure(&orig, &syn, &config)?,
            config.format,
            &config.sections(),
        )?,
        Analysis::Sweep => render_sweep(&sweep(&orig, &syn, &config)?, config.format)?,
    };
    emit(config.out.as_deref(), &text)
}

fn synth(a: SynthArgs) -> Result<()> {
    let delimiter = delimiter_byte(a.delimiter)?;
    if a.m == 0 {
        return Err(Error::Config("--m must be at least 1".into()));
    }
    let opts = LoadOptions {
        delimiter,
        ..Default::default()
    };
    let orig = load_table(&a.orig, &opts)?;
    let n = a.n.unwrap_or(orig.n_rows());
    for i in 0..a.m {
        let table = bootstrap_synth(&orig, a.mode, n, a.seed.wrapping_add(i as u64))?;
        let path = if a.m == 1 {
            a.out.clone()
        } else {
            replicate_path(&a.out, i + 1)
        };
        write_table_path(&table, &path, delimiter)?;
    }
    Ok(())
}

fn strip(a: StripArgs) -> Result<()> {
    let delimiter = delimiter_byte(a.delimiter)?;
    let opts = LoadOptions {
        delimiter,
        ..Default::default()
    };
    let (orig, syn) = load_dataset(&a.orig, &[&a.syn], &opts)?;
    let stripped = strip_replicated_uniques(&orig, &syn.replicates()[0], &a.keys)?;
    match &a.out {
        Some(path) => write_table_path(&stripped, path, delimiter),
        None => write_table(&stripped, std::io::stdout().lock(), delimiter),
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Disclosure(a) => analyse(a, Analysis::Single),
        Command::Multi(a) => analyse(a, Analysis::Multi),
        Command::Sweep(a) => analyse(a, Analysis::Sweep),
        Command::Synth(a) => synth(a),
        Command::StripUniques(a) => strip(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
