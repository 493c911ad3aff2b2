//! Argument parsing and command dispatch for the `conv-regions` binary.
//!
//! Commands take an architecture either from `--config FILE` or inline via
//! `--input H,W,D` plus repeated `--layer FH,FW,STRIDE,DEPTH` flags, and
//! write their report as JSON (default) or CSV (`--format csv`; the default
//! for `table`) to stdout or `--out FILE`. Failures print a one-line JSON
//! object to stderr and exit with 2 (parse), 3 (validation), 4 (bound
//! hypothesis violation), or 5 (oracle mismatch after a retry).

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_rational::BigRational;
use num_traits::One;
use rand::SeedableRng;
use serde_json::{json, Value};

use conv_regions::arch::{layer_output_dims, parameter_count, validate_architecture};
use conv_regions::bounds::{
    arch_bounds, fc_bounds, multilayer_upper_bound, naive_bound, ArchSummary, Bound, BoundsError,
};
use conv_regions::counting::{exact_region_count, region_polynomial};
use conv_regions::oracle::{
    build_layer_arrangement, count_regions, general_position_bound, sample_rational_weights,
    Arrangement,
};
use conv_regions::tensor::{conv_forward, fold_layers, RTensor};
use conv_regions::{Architecture, Dims, LayerSpec};

use crate::config::{self, ArchConfig};
use crate::oracle_io;
use crate::report::{emit, render_report, Format, SweepRow, SweepTable};
use crate::sampler::{estimate_region_count, he_init, SamplingConfig};
use crate::tables;
use crate::CliError;

/// XOR-ed into a failed oracle seed to derive the deterministic retry seed.
const RETRY_SALT: u64 = 0x9E37_79B9_7F4A_7C15;

/// XOR-ed into the compose seed so verification inputs are independent of
/// the sampled weights.
const VERIFY_SALT: u64 = 0xC0DE_F01D_ED15_EA5E;

#[derive(Parser, Debug)]
#[command(
    name = "conv-regions",
    version,
    about = "Exact region counts, bounds, oracles, and sampling estimates \
             for ReLU convolutional networks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Where the architecture comes from: a config file or inline flags.
#[derive(Args, Debug)]
pub struct ArchArgs {
    /// JSON architecture file {"input":{"h","w","d"},"layers":[{"fh","fw","stride","depth"}]}
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Inline input grid (alternative to --config)
    #[arg(long, value_name = "H,W,D", conflicts_with = "config")]
    pub input: Option<String>,
    /// Inline hidden layer; repeat once per layer
    #[arg(long, value_name = "FH,FW,STRIDE,DEPTH", requires = "input")]
    pub layer: Vec<String>,
}

impl ArchArgs {
    pub fn architecture(&self) -> Result<Architecture, CliError> {
        match (&self.config, &self.input) {
            (Some(path), None) => config::load_architecture(path),
            (None, Some(input)) => config::parse_inline(input, &self.layer),
            (None, None) => Err(CliError::Parse(
                "an architecture is required: pass --config FILE, or --input H,W,D \
                 with one --layer FH,FW,STRIDE,DEPTH per layer"
                    .into(),
            )),
            (Some(_), Some(_)) => unreachable!("clap rejects --config with --input"),
        }
    }
}

/// Report destination and encoding.
#[derive(Args, Debug)]
pub struct OutputArgs {
    /// Write the report here instead of stdout
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Report encoding; defaults to json (csv for `table`)
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Validate an architecture and report every grid's dimensions
    Dims {
        #[command(flatten)]
        arch: ArchArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Count trainable parameters (weights plus one bias per filter)
    Params {
        #[command(flatten)]
        arch: ArchArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Exact region count of a one-layer network, optionally swept over depth
    Exact {
        #[command(flatten)]
        arch: ArchArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Inclusive depth sweep A..B (A at least 1)
        #[arg(long, value_name = "A..B")]
        d1: Option<String>,
    },
    /// Region-count polynomial of a one-layer network in its depth
    Poly {
        #[command(flatten)]
        arch: ArchArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Also evaluate the polynomial over the inclusive sweep A..B
        #[arg(long, value_name = "A..B")]
        d1: Option<String>,
    },
    /// Bracket the region count: lower, upper, and naive bounds
    Bounds {
        #[command(flatten)]
        arch: ArchArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Fully-connected widths D0,D1,...,DL instead of an architecture
        #[arg(long, value_name = "D0,D1,...", conflicts_with_all = ["config", "input", "layer"])]
        fc: Option<String>,
    },
    /// Cross-check the closed form by exact region counting of a sampled arrangement
    Oracle {
        #[command(flatten)]
        arch: ArchArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Weight seed; a mismatch retries once with a derived seed
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Count the regions of an arrangement file instead of sampling
        #[arg(long, value_name = "PATH", conflicts_with_all = ["config", "input", "layer"])]
        arrangement: Option<PathBuf>,
        /// Write the counted arrangement to this file for replay
        #[arg(long, value_name = "PATH")]
        dump: Option<PathBuf>,
    },
    /// Estimate the region count from distinct activation patterns
    Sample {
        #[command(flatten)]
        arch: ArchArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Seed for both the He-initialized weights and the Gaussian inputs
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Inputs drawn per standard deviation
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        /// Comma-separated Gaussian standard deviations
        #[arg(long, value_name = "V1,V2,...")]
        std: Option<String>,
        /// Worker threads (default: all cores); never changes results
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Fold two consecutive linear layers into one and verify the composite
    Compose {
        #[command(flatten)]
        arch: ArchArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Seed for the rational weights the verification runs on
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Recompute a built-in table (T1, T2, S1-S5)
    Table {
        /// Table identifier
        id: String,
        #[command(flatten)]
        output: OutputArgs,
        /// Seed for the sampled row of T2
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Sampling budget for the sampled row of T2
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// Worker threads (default: all cores); never changes results
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Compare expressivity (regions per parameter) of two architectures
    Compare {
        /// First architecture config file
        first: PathBuf,
        /// Second architecture config file
        second: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
}

/// Runs one parsed invocation end to end.
pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Dims { arch, output } => {
            deliver(dims_report(&arch.architecture()?)?, &output)
        }
        Command::Params { arch, output } => {
            deliver(params_report(&arch.architecture()?)?, &output)
        }
        Command::Exact { arch, output, d1 } => {
            let table = exact_table(&arch.architecture()?, parse_sweep(d1.as_deref())?)?;
            deliver_table(table, &output, Format::Json)
        }
        Command::Poly { arch, output, d1 } => {
            deliver(poly_report(&arch.architecture()?, parse_sweep(d1.as_deref())?)?, &output)
        }
        Command::Bounds { arch, output, fc } => {
            let (value, failure) = match fc {
                Some(widths) => (fc_bounds_report(&parse_fc_widths(&widths)?), None),
                None => bounds_report(&arch.architecture()?)?,
            };
            deliver(value, &output)?;
            failure.map_or(Ok(()), Err)
        }
        Command::Oracle { arch, output, seed, arrangement, dump } => {
            let (value, counted, failure) = match arrangement {
                Some(path) => {
                    let text = fs::read_to_string(&path)
                        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
                    let arrangement = oracle_io::parse_arrangement(&text)?;
                    let value = arrangement_report(&arrangement)?;
                    (value, arrangement, None)
                }
                None => oracle_report(&arch.architecture()?, seed)?,
            };
            if let Some(path) = dump {
                fs::write(&path, oracle_io::write_arrangement(&counted))
                    .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
            }
            deliver(value, &output)?;
            failure.map_or(Ok(()), Err)
        }
        Command::Sample { arch, output, seed, samples, std, threads } => {
            let arch = arch.architecture()?;
            let config = SamplingConfig {
                num_samples: samples,
                std_values: parse_std_list(std.as_deref())?,
                seed,
                ..SamplingConfig::default()
            };
            let value = with_threads(threads, || sample_report(&arch, &config))??;
            deliver(value, &output)
        }
        Command::Compose { arch, output, seed } => {
            deliver(compose_report(&arch.architecture()?, seed)?, &output)
        }
        Command::Table { id, output, seed, samples, threads } => {
            let table = with_threads(threads, || tables::reproduce_table(&id, seed, samples))??;
            deliver_table(table, &output, Format::Csv)
        }
        Command::Compare { first, second, output } => {
            let a = config::load_architecture(&first)?;
            let b = config::load_architecture(&second)?;
            deliver(compare_report(&a, &b)?, &output)
        }
    }
}

fn deliver(value: Value, output: &OutputArgs) -> Result<(), CliError> {
    let format = output.format.unwrap_or(Format::Json);
    emit(&render_report(value, format), output.out.as_deref())
}

fn deliver_table(table: SweepTable, output: &OutputArgs, default: Format) -> Result<(), CliError> {
    let format = output.format.unwrap_or(default);
    emit(&table.render(format), output.out.as_deref())
}

/// Runs `body` on a dedicated pool of `threads` workers, or inline on the
/// default pool. Thread count is a scheduling knob only; every result is
/// keyed by seeds and indices, never by worker identity.
fn with_threads<T: Send>(
    threads: Option<usize>,
    body: impl FnOnce() -> T + Send,
) -> Result<T, CliError> {
    match threads {
        None => Ok(body()),
        Some(0) => Err(CliError::Validation("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Validation(format!("thread pool: {e}")))
            .map(|pool| pool.install(body)),
    }
}

// ---------------------------------------------------------------------------
// Flag parsing helpers
// ---------------------------------------------------------------------------

/// Parses an inclusive sweep `A..B` with `1 ≤ A ≤ B`.
pub fn parse_sweep(sweep: Option<&str>) -> Result<Option<(usize, usize)>, CliError> {
    let Some(text) = sweep else { return Ok(None) };
    let parse = |s: &str| {
        s.trim().parse::<usize>().map_err(|_| {
            CliError::Parse(format!("sweep `{text}` must have the form A..B with integers"))
        })
    };
    let (a, b) = match text.split_once("..") {
        Some((a, b)) => (parse(a)?, parse(b)?),
        None => return Err(CliError::Parse(format!("sweep `{text}` must have the form A..B"))),
    };
    if a < 1 {
        return Err(CliError::Validation("sweep must start at depth 1 or higher".into()));
    }
    if a > b {
        return Err(CliError::Validation(format!("sweep {a}..{b} is empty")));
    }
    Ok(Some((a, b)))
}

/// Parses `--std V1,V2,...` into positive floats; `None` keeps the default
/// sweep.
pub fn parse_std_list(list: Option<&str>) -> Result<Vec<f64>, CliError> {
    let Some(text) = list else {
        return Ok(crate::sampler::DEFAULT_STD_VALUES.to_vec());
    };
    text.split(',')
        .map(|field| {
            field.trim().parse::<f64>().map_err(|_| {
                CliError::Parse(format!("--std `{text}`: `{field}` is not a number"))
            })
        })
        .collect()
}

/// Parses `--fc D0,D1,...,DL`: the input width followed by at least one
/// hidden width, all positive.
pub fn parse_fc_widths(text: &str) -> Result<Vec<usize>, CliError> {
    let widths: Vec<usize> = text
        .split(',')
        .map(|field| {
            field.trim().parse::<usize>().map_err(|_| {
                CliError::Parse(format!("--fc `{text}`: `{field}` is not a non-negative integer"))
            })
        })
        .collect::<Result<_, _>>()?;
    if widths.len() < 2 {
        return Err(CliError::Validation(
            "--fc needs an input width and at least one hidden width".into(),
        ));
    }
    if widths.contains(&0) {
        return Err(CliError::Validation("--fc widths must all be at least 1".into()));
    }
    Ok(widths)
}

fn one_layer(arch: &Architecture, command: &str) -> Result<(Dims, LayerSpec), CliError> {
    match arch.layers.as_slice() {
        [layer] => Ok((arch.input, *layer)),
        layers => Err(CliError::Validation(format!(
            "`{command}` needs exactly one hidden layer; the architecture has {}",
            layers.len()
        ))),
    }
}

fn rational_str(value: &BigRational) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

fn bound_json(bound: &Bound) -> Value {
    json!({ "value": bound.value.to_string(), "method": bound.method })
}

// ---------------------------------------------------------------------------
// Report builders
// ---------------------------------------------------------------------------

/// Grid dimensions of the input and every hidden layer.
pub fn dims_report(arch: &Architecture) -> Result<Value, CliError> {
    let dims = validate_architecture(arch)?;
    let grid = |d: &Dims| {
        json!({ "height": d.height, "width": d.width, "depth": d.depth, "neurons": d.total() })
    };
    Ok(json!({
        "input": grid(&arch.input),
        "layers": dims.iter().map(grid).collect::<Vec<_>>(),
        "hidden_neurons": dims.iter().map(Dims::total).sum::<usize>(),
    }))
}

/// Trainable parameter count.
pub fn params_report(arch: &Architecture) -> Result<Value, CliError> {
    Ok(json!({ "parameters": parameter_count(arch)?.to_string() }))
}

/// Exact counts of a one-layer network over the sweep (or its own depth).
pub fn exact_table(
    arch: &Architecture,
    sweep: Option<(usize, usize)>,
) -> Result<SweepTable, CliError> {
    let (input, spec) = one_layer(arch, "exact")?;
    let (lo, hi) = sweep.unwrap_or((spec.depth, spec.depth));
    let columns: Vec<usize> = (lo..=hi).collect();
    let values = columns
        .iter()
        .map(|&depth| {
            exact_region_count(input, &LayerSpec { depth, ..spec })
                .map(|count| count.to_string())
                .map_err(CliError::from)
        })
        .collect::<Result<_, _>>()?;
    Ok(SweepTable {
        title: "exact".into(),
        sweep: "d1".into(),
        columns,
        rows: vec![SweepRow { label: "exact".into(), values }],
    })
}

/// The count polynomial of a one-layer network, with optional evaluations.
pub fn poly_report(
    arch: &Architecture,
    sweep: Option<(usize, usize)>,
) -> Result<Value, CliError> {
    let (input, spec) = one_layer(arch, "poly")?;
    let poly = region_polynomial(input, &spec)?;
    let mut report = json!({
        "degree": poly.degree(),
        "leading": rational_str(poly.leading_coefficient()),
        "coefficients": poly.coefficients().iter().map(rational_str).collect::<Vec<_>>(),
    });
    if let Some((lo, hi)) = sweep {
        report["evaluations"] = (lo..=hi)
            .map(|d| json!({ "d1": d, "count": poly.evaluate(d).to_string() }))
            .collect::<Vec<_>>()
            .into();
    }
    Ok(report)
}

/// Bound bracket of an architecture. On a lower-bound hypothesis violation
/// the report carries `lower: null` plus the violation, and the command
/// still exits 4 — the second element is the error to raise after emitting.
pub fn bounds_report(arch: &Architecture) -> Result<(Value, Option<CliError>), CliError> {
    match arch_bounds(arch) {
        Ok(report) => Ok((
            json!({
                "lower": bound_json(&report.lower),
                "upper": bound_json(&report.upper),
                "naive_upper": bound_json(&report.naive_upper),
            }),
            None,
        )),
        Err(violated @ BoundsError::HypothesisViolated { layer, depth, input_depth }) => {
            let up_tag = if arch.layers.len() == 1 { "exact" } else { "multi-layer-upper" };
            let upper = Bound { value: multilayer_upper_bound(arch)?, method: up_tag };
            let naive = Bound { value: naive_bound(arch)?, method: "naive" };
            Ok((
                json!({
                    "lower": Value::Null,
                    "upper": bound_json(&upper),
                    "naive_upper": bound_json(&naive),
                    "hypothesis_violation": {
                        "layer": layer,
                        "depth": depth,
                        "input_depth": input_depth,
                    },
                }),
                Some(violated.into()),
            ))
        }
        Err(other) => Err(other.into()),
    }
}

/// Bound bracket of a fully-connected stack given as widths.
pub fn fc_bounds_report(widths: &[usize]) -> Value {
    let report = fc_bounds(widths[0], &widths[1..]);
    json!({
        "lower": bound_json(&report.lower),
        "upper": bound_json(&report.upper),
        "naive_upper": bound_json(&report.naive_upper),
    })
}

/// Counts an explicit arrangement and reports it next to the general-position
/// maximum for the same number of hyperplanes.
pub fn arrangement_report(arrangement: &Arrangement) -> Result<Value, CliError> {
    let regions = count_regions(arrangement)?;
    Ok(json!({
        "mode": "file",
        "ambient": arrangement.ambient_dim(),
        "hyperplanes": arrangement.len(),
        "regions": regions.to_string(),
        "general_position_bound":
            general_position_bound(arrangement.ambient_dim(), arrangement.len()).to_string(),
    }))
}

/// Samples rational weights, counts the regions of the induced arrangement,
/// and compares against the closed form; one deterministic retry on
/// mismatch. Returns the report, the last counted arrangement (for
/// `--dump`), and the mismatch error to raise after emitting, if any.
pub fn oracle_report(
    arch: &Architecture,
    seed: u64,
) -> Result<(Value, Arrangement, Option<CliError>), CliError> {
    let (input, spec) = one_layer(arch, "oracle")?;
    let expected = exact_region_count(input, &spec)?;
    let attempt = |seed: u64| -> Result<_, CliError> {
        let weights = sample_rational_weights(arch, seed)?;
        let arrangement = build_layer_arrangement(input, &spec, &weights.layers[0])?;
        let counted = count_regions(&arrangement)?;
        Ok((counted, arrangement))
    };
    let (first_counted, first_arrangement) = attempt(seed)?;
    let (counted, arrangement, retried, retry_seed) = if first_counted == expected {
        (first_counted.clone(), first_arrangement, false, None)
    } else {
        let retry = seed ^ RETRY_SALT;
        let (second_counted, second_arrangement) = attempt(retry)?;
        (second_counted, second_arrangement, true, Some(retry))
    };
    let matched = counted == expected;
    let report = json!({
        "mode": "sampled",
        "expected": expected.to_string(),
        "counted": counted.to_string(),
        "match": matched,
        "seed": seed,
        "retried": retried,
        "retry_seed": retry_seed,
        "first_counted": if retried { Value::from(first_counted.to_string()) } else { Value::Null },
        "ambient": arrangement.ambient_dim(),
        "hyperplanes": arrangement.len(),
    });
    let failure = (!matched).then(|| {
        CliError::Mismatch(format!(
            "closed form predicts {expected} regions but the sampled arrangements yield \
             {first_counted} (seed {seed}) and {counted} (seed {})",
            retry_seed.expect("mismatch implies a retry happened"),
        ))
    });
    Ok((report, arrangement, failure))
}

/// He-initializes weights and estimates the region count from distinct
/// activation patterns over the standard-deviation sweep.
pub fn sample_report(arch: &Architecture, config: &SamplingConfig) -> Result<Value, CliError> {
    let weights = he_init(arch, config.seed)?;
    let report = estimate_region_count(arch, &weights, config)?;
    Ok(json!({
        "arch": serde_json::to_value(ArchConfig::from_architecture(arch))
            .expect("architecture echo serializes"),
        "seed": config.seed,
        "per_v": report
            .per_std
            .iter()
            .map(|run| json!({ "v": run.std, "distinct": run.distinct }))
            .collect::<Vec<_>>(),
        "max_distinct": report.max_distinct,
    }))
}

/// Folds a two-layer linear stack into one layer and verifies the fold on
/// random rational inputs in exact arithmetic.
pub fn compose_report(arch: &Architecture, seed: u64) -> Result<Value, CliError> {
    if arch.layers.len() != 2 {
        return Err(CliError::Validation(format!(
            "`compose` needs exactly two hidden layers; the architecture has {}",
            arch.layers.len()
        )));
    }
    validate_architecture(arch)?;
    let (first, second) = (&arch.layers[0], &arch.layers[1]);
    let weights = sample_rational_weights(arch, seed)?;
    let (folded, folded_weights) =
        fold_layers(arch.input, first, &weights.layers[0], second, &weights.layers[1])?;
    let output = layer_output_dims(arch.input, &folded)?;
    let checks = 3;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ VERIFY_SALT);
    for _ in 0..checks {
        let input = random_integer_tensor(arch.input, &mut rng);
        let stacked = conv_forward(
            &conv_forward(&input, first, &weights.layers[0])?,
            second,
            &weights.layers[1],
        )?;
        let direct = conv_forward(&input, &folded, &folded_weights)?;
        assert_eq!(direct, stacked, "folded layer reproduces the stacked linear map");
    }
    Ok(json!({
        "folded": {
            "fh": folded.filter_height,
            "fw": folded.filter_width,
            "stride": folded.stride,
            "depth": folded.depth,
        },
        "output": { "h": output.height, "w": output.width, "d": output.depth },
        "checks": checks,
        "verified": true,
        "seed": seed,
    }))
}

fn random_integer_tensor(dims: Dims, rng: &mut rand_chacha::ChaCha8Rng) -> RTensor {
    use rand::Rng;
    let mut tensor = RTensor::zeros(dims);
    for i in 1..=dims.height {
        for j in 1..=dims.width {
            for k in 1..=dims.depth {
                let value: i64 = rng.gen_range(-100..=100);
                tensor.set(i, j, k, BigRational::from_integer(value.into()));
            }
        }
    }
    tensor
}

fn summary_json(summary: &ArchSummary) -> Value {
    json!({
        "parameters": summary.parameters.to_string(),
        "lower": summary.lower.as_ref().map(bound_json),
        "upper": bound_json(&summary.upper),
        "naive_upper": bound_json(&summary.naive_upper),
        "lower_per_parameter": summary.lower_per_parameter.as_ref().map(|r| rational_str(r)),
        "upper_per_parameter": rational_str(&summary.upper_per_parameter),
    })
}

/// Side-by-side regions-per-parameter comparison of two architectures.
pub fn compare_report(a: &Architecture, b: &Architecture) -> Result<Value, CliError> {
    let report = conv_regions::bounds::expressivity_report(a, b)?;
    Ok(json!({
        "first": summary_json(&report.first),
        "second": summary_json(&report.second),
    }))
}
