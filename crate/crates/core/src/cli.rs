//! The `udc` command-line surface.
//!
//! Every subcommand prints a JSON document to stdout. With `--out FILE` it
//! also writes `FILE` (the same document), `FILE.csv` (region vertices) and,
//! where the computation produces one, `FILE.log`. Exit status is 0 on
//! success, 1 when the library refuses the input on domain grounds and 2
//! for usage or parse problems.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::capacity::{capacity_degraded_z, capacity_semidet_hi, hi_regime_falsify};
use crate::channel::{classify, ChannelSpec, ClassReport, CLASSIFY_TOL};
use crate::error::{Error, Result};
use crate::inner::{inner_region, AuxCards, SamplerConfig};
use crate::outer::outer_region_estimate;
use crate::polytope::{project_to_region, LinearSystem, Region2D, RegionDoc, DEFAULT_CAP};

#[derive(Debug, Parser)]
#[command(name = "udc", about = "Rate regions for the cognitive interference channel with destination cooperation")]
#[command(args_override_self = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Structural classification, optionally with a high-interference search.
    Classify {
        channel: PathBuf,
        /// Also search for violations of the high-interference-gain regime.
        #[arg(long)]
        hi_check: bool,
        #[arg(long, default_value_t = CLASSIFY_TOL)]
        tol: f64,
        #[command(flatten)]
        sampling: Sampling,
        #[command(flatten)]
        common: Common,
    },
    /// Inner-bound region estimate.
    Inner {
        channel: PathBuf,
        #[command(flatten)]
        sampling: Sampling,
        #[command(flatten)]
        aux: AuxFlags,
        /// Upper limit on structured corner distributions.
        #[arg(long)]
        corner_cap: Option<usize>,
        #[arg(long)]
        no_corners: bool,
        #[arg(long)]
        no_yhat_variant: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Outer-bound estimate with its caveat record.
    Outer {
        channel: PathBuf,
        #[command(flatten)]
        sampling: Sampling,
        #[command(flatten)]
        common: Common,
    },
    /// Capacity region of a channel class.
    Capacity {
        channel: PathBuf,
        #[arg(long, value_enum)]
        class: ClassArg,
        /// Evaluate even if the falsifier finds a regime violation.
        #[arg(long)]
        force: bool,
        #[command(flatten)]
        sampling: Sampling,
        #[command(flatten)]
        common: Common,
    },
    /// Containment of two exported regions in both directions.
    Compare {
        region_a: PathBuf,
        region_b: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Projects a linear system onto two of its variables.
    Fm {
        system: PathBuf,
        /// The two variables to keep, comma separated.
        #[arg(long, value_delimiter = ',', num_args = 1)]
        keep: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ClassArg {
    DegradedZ,
    SemidetHi,
}

#[derive(Debug, Args)]
struct Sampling {
    #[arg(long, default_value_t = 0)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    card_v12: Option<usize>,
    /// Number of support directions.
    #[arg(long, default_value_t = 64)]
    fan: usize,
    #[arg(long, default_value_t = 5)]
    refine_starts: usize,
    #[arg(long, default_value_t = 50)]
    refine_sweeps: usize,
    #[arg(long, default_value_t = 1.0)]
    concentration: f64,
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Debug, Args)]
struct AuxFlags {
    #[arg(long, default_value_t = 2)]
    card_u1p: usize,
    #[arg(long, default_value_t = 2)]
    card_u1: usize,
    #[arg(long, default_value_t = 2)]
    card_v1: usize,
    #[arg(long, default_value_t = 2)]
    card_u2p: usize,
    #[arg(long, default_value_t = 2)]
    card_u2: usize,
    #[arg(long, default_value_t = 2)]
    card_v12_aux: usize,
    #[arg(long, default_value_t = 2)]
    card_v2: usize,
    #[arg(long, default_value_t = 2)]
    card_yhat2: usize,
}

#[derive(Debug, Args)]
struct Common {
    /// Flat `key=value` file; flags on the command line take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Base path for output files.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Sampling {
    fn config(&self) -> SamplerConfig {
        SamplerConfig {
            seed: self.seed,
            num_samples: self.samples,
            dirichlet_concentration: self.concentration,
            card_v12: self.card_v12,
            fan: self.fan,
            refine_starts: self.refine_starts,
            refine_sweeps: self.refine_sweeps,
            threads: self.threads.max(1),
            ..SamplerConfig::default()
        }
    }
}

impl AuxFlags {
    fn cards(&self) -> AuxCards {
        AuxCards {
            u1p: self.card_u1p,
            u1: self.card_u1,
            v1: self.card_v1,
            u2p: self.card_u2p,
            u2: self.card_u2,
            v12: self.card_v12_aux,
            v2: self.card_v2,
            yhat2: self.card_yhat2,
        }
    }
}

/// Files produced by one run besides stdout.
struct Output {
    doc: Value,
    csv: Option<String>,
    log: Option<String>,
}

/// Runs the CLI on `args` (including the program name) and returns the
/// process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match merge_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_usage() {
                2
            } else {
                1
            }
        }
    }
}

/// Splices `key=value` entries of a `--config FILE` right after the
/// subcommand, so that explicit flags, which come later, override them.
fn merge_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(pos) = args.iter().position(|a| a == "--config") else {
        return Ok(args);
    };
    let Some(path) = args.get(pos + 1) else {
        return Ok(args);
    };
    let text = fs::read_to_string(path)?;
    let mut injected = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("config line {}: expected key=value", n + 1)))?;
        let (key, value) = (key.trim().replace('_', "-"), value.trim());
        match value {
            "true" => injected.push(OsString::from(format!("--{key}"))),
            "false" => {}
            v => {
                injected.push(OsString::from(format!("--{key}")));
                injected.push(OsString::from(v));
            }
        }
    }
    let mut out = args[..2.min(args.len())].to_vec();
    out.extend(injected);
    out.extend(args[2.min(args.len())..].iter().cloned());
    Ok(out)
}

fn load_channel(path: &Path) -> Result<ChannelSpec> {
    ChannelSpec::from_json(&fs::read_to_string(path)?)
}

fn region_doc(region: &Region2D) -> Map<String, Value> {
    match serde_json::to_value(RegionDoc::from(region)).expect("region serializes") {
        Value::Object(m) => m,
        _ => unreachable!(),
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn execute(command: Command) -> Result<()> {
    let (output, out) = match command {
        Command::Classify {
            channel,
            hi_check,
            tol,
            sampling,
            common,
        } => {
            let ch = load_channel(&channel)?;
            let hi_regime = if hi_check {
                Some(hi_regime_falsify(&ch, &sampling.config())?)
            } else {
                None
            };
            let report = ClassReport {
                structure: classify(&ch, tol),
                hi_regime,
            };
            (
                Output {
                    doc: to_value(&report),
                    csv: None,
                    log: None,
                },
                common.out,
            )
        }
        Command::Inner {
            channel,
            sampling,
            aux,
            corner_cap,
            no_corners,
            no_yhat_variant,
            common,
        } => {
            let ch = load_channel(&channel)?;
            let mut cfg = sampling.config();
            cfg.aux = aux.cards();
            cfg.include_deterministic_corners = !no_corners;
            cfg.include_yhat_constant_variant = !no_yhat_variant;
            if let Some(c) = corner_cap {
                cfg.corner_cap = c;
            }
            let res = inner_region(&ch, &cfg)?;
            let mut doc = region_doc(&res.region);
            doc.insert("distributions".into(), json!(res.log.len()));
            doc.insert(
                "admissible".into(),
                json!(res.log.iter().filter(|r| r.admissible).count()),
            );
            (
                Output {
                    doc: Value::Object(doc),
                    csv: Some(res.region.to_csv()),
                    log: Some(res.log_text()),
                },
                common.out,
            )
        }
        Command::Outer {
            channel,
            sampling,
            common,
        } => {
            let ch = load_channel(&channel)?;
            let res = outer_region_estimate(&ch, &sampling.config())?;
            let mut doc = region_doc(&res.region);
            doc.insert("caveat".into(), to_value(&res.caveat));
            (
                Output {
                    doc: Value::Object(doc),
                    csv: Some(res.region.to_csv()),
                    log: None,
                },
                common.out,
            )
        }
        Command::Capacity {
            channel,
            class,
            force,
            sampling,
            common,
        } => {
            let ch = load_channel(&channel)?;
            let cfg = sampling.config();
            let res = match class {
                ClassArg::DegradedZ => capacity_degraded_z(&ch, &cfg)?,
                ClassArg::SemidetHi => capacity_semidet_hi(&ch, &cfg, force)?,
            };
            let mut doc = region_doc(&res.region);
            doc.insert(
                "class".into(),
                json!(match class {
                    ClassArg::DegradedZ => "degraded-z",
                    ClassArg::SemidetHi => "semidet-hi",
                }),
            );
            doc.insert("samples".into(), json!(cfg.num_samples));
            doc.insert("seed".into(), json!(cfg.seed));
            if let Some(r) = &res.hi_regime {
                doc.insert("hi_regime".into(), to_value(r));
                doc.insert("drop_mismatches".into(), json!(res.drop_mismatches));
            }
            let log = res
                .best
                .iter()
                .map(|p| serde_json::to_string(p).expect("pmf serializes") + "\n")
                .collect();
            (
                Output {
                    doc: Value::Object(doc),
                    csv: Some(res.region.to_csv()),
                    log: Some(log),
                },
                common.out,
            )
        }
        Command::Compare { region_a, region_b, tol } => {
            let a = Region2D::from_json(&fs::read_to_string(&region_a)?)?;
            let b = Region2D::from_json(&fs::read_to_string(&region_b)?)?;
            let doc = json!({
                "a_contains_b": a.contains(&b, tol),
                "b_contains_a": b.contains(&a, tol),
                "hausdorff": a.hausdorff(&b),
                "tol": tol,
            });
            (
                Output {
                    doc,
                    csv: None,
                    log: None,
                },
                None,
            )
        }
        Command::Fm { system, keep, common } => {
            if keep.len() != 2 {
                return Err(Error::InvalidConfig(format!(
                    "--keep needs exactly two variables, got {}",
                    keep.len()
                )));
            }
            let sys = LinearSystem::from_json(&fs::read_to_string(&system)?)?;
            let region = project_to_region(&sys, &keep[0], &keep[1], DEFAULT_CAP)?;
            (
                Output {
                    doc: Value::Object(region_doc(&region)),
                    csv: Some(region.to_csv()),
                    log: None,
                },
                common.out,
            )
        }
    };
    let text = serde_json::to_string_pretty(&output.doc).expect("json") + "\n";
    print!("{text}");
    if let Some(base) = out {
        fs::write(&base, &text)?;
        if let Some(csv) = output.csv {
            fs::write(with_suffix(&base, ".csv"), csv)?;
        }
        if let Some(log) = output.log {
            fs::write(with_suffix(&base, ".log"), log)?;
        }
    }
    Ok(())
}

fn with_suffix(base: &Path, suffix: &str) -> PathBuf {
    let mut s = base.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}
