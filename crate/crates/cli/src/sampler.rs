//! Monte-Carlo estimation of region counts from activation patterns.
//!
//! Two inputs land in the same linear region exactly when every hidden ReLU
//! has the same on/off state on both, so the number of distinct activation
//! patterns seen over many random inputs is a lower estimate of the region
//! count that becomes exact once every region has been hit. This module
//! draws He-initialized floating-point networks, Gaussian inputs over a
//! sweep of standard deviations, and counts distinct patterns.
//!
//! Reproducibility rules:
//!
//! * Weights are drawn from a single seeded stream in a fixed order
//!   (layers → filters → weight storage order → bias).
//! * Each sampled input gets its own generator keyed by
//!   `(seed, std index, sample index)`, so neither the batch size nor the
//!   number of worker threads can change any estimate, and growing
//!   `num_samples` only appends to the sample stream (estimates are
//!   monotone in the budget).
//! * A pre-activation of exactly zero reads as "off" in the pattern.

use std::collections::HashSet;
use std::ops::Range;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use conv_regions::arch::{validate_architecture, ArchError};
use conv_regions::{Architecture, Dims};

use crate::CliError;

/// Gaussian input standard deviations swept by default.
pub const DEFAULT_STD_VALUES: [f64; 6] = [3.0, 5.0, 7.0, 9.0, 11.0, 13.0];

/// Knobs of one estimation run.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplingConfig {
    /// Inputs drawn per standard deviation; must be at least 1.
    pub num_samples: usize,
    /// Standard deviations of the zero-mean Gaussian input distribution.
    pub std_values: Vec<f64>,
    /// Root seed of the run; fully determines weights and inputs.
    pub seed: u64,
    /// Samples handed to one worker at a time. Affects scheduling only,
    /// never results.
    pub batch_size: usize,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            num_samples: 100_000,
            std_values: DEFAULT_STD_VALUES.to_vec(),
            seed: 0,
            batch_size: 4096,
        }
    }
}

/// One filter with flattened weights (filter row, column, channel — channel
/// innermost) and its bias.
#[derive(Clone, Debug, PartialEq)]
pub struct FloatFilter {
    pub weights: Vec<f64>,
    pub bias: f64,
}

/// Filters of one layer, one per output channel.
#[derive(Clone, Debug, PartialEq)]
pub struct FloatLayer {
    pub filters: Vec<FloatFilter>,
}

/// Concrete floating-point weights for a whole architecture.
#[derive(Clone, Debug, PartialEq)]
pub struct FloatWeights {
    pub layers: Vec<FloatLayer>,
}

/// Draws He-initialized weights: every weight and bias of a layer is
/// `Normal(0, √(2/fan_in))` with `fan_in = fh·fw·d_{in}`, reproducibly from
/// `seed` in a fixed draw order.
pub fn he_init(arch: &Architecture, seed: u64) -> Result<FloatWeights, ArchError> {
    validate_architecture(arch)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut layers = Vec::with_capacity(arch.layers.len());
    let mut in_depth = arch.input.depth;
    for spec in &arch.layers {
        let fan_in = spec.filter_height * spec.filter_width * in_depth;
        let normal = Normal::new(0.0, (2.0 / fan_in as f64).sqrt()).expect("positive fan-in");
        let mut filters = Vec::with_capacity(spec.depth);
        for _ in 0..spec.depth {
            let weights = (0..fan_in).map(|_| normal.sample(&mut rng)).collect();
            let bias = normal.sample(&mut rng);
            filters.push(FloatFilter { weights, bias });
        }
        layers.push(FloatLayer { filters });
        in_depth = spec.depth;
    }
    Ok(FloatWeights { layers })
}

/// The deterministic per-sample generator key: root seed, index of the
/// standard deviation in the sweep, and sample index, plus a domain tag.
pub fn sample_key(seed: u64, std_index: u64, sample: u64) -> [u8; 32] {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&std_index.to_le_bytes());
    key[16..24].copy_from_slice(&sample.to_le_bytes());
    key[24..].copy_from_slice(b"convsamp");
    key
}

struct LayerPlan {
    filter_height: usize,
    filter_width: usize,
    stride: usize,
    in_dims: Dims,
    out_dims: Dims,
    filters: Vec<FloatFilter>,
}

/// A validated architecture with concrete weights, ready for repeated
/// forward passes.
pub struct Network {
    input: Dims,
    layers: Vec<LayerPlan>,
    hidden: usize,
}

/// Reusable per-worker buffers: pre-activations and ReLU outputs per layer.
pub struct Scratch {
    z: Vec<Vec<f64>>,
    act: Vec<Vec<f64>>,
}

impl Scratch {
    /// Pre-activations of every layer from the last forward pass.
    pub fn preactivations(&self) -> &[Vec<f64>] {
        &self.z
    }
}

impl Network {
    /// Validates the shapes once so that forward passes can run unchecked.
    pub fn new(arch: &Architecture, weights: &FloatWeights) -> Result<Self, ArchError> {
        let dims = validate_architecture(arch)?;
        assert_eq!(weights.layers.len(), arch.layers.len(), "one weight layer per spec layer");
        let mut layers = Vec::with_capacity(arch.layers.len());
        let mut in_dims = arch.input;
        for (spec, (layer, out_dims)) in
            arch.layers.iter().zip(weights.layers.iter().zip(dims.iter()))
        {
            assert_eq!(layer.filters.len(), spec.depth, "one filter per output channel");
            let fan_in = spec.filter_height * spec.filter_width * in_dims.depth;
            for filter in &layer.filters {
                assert_eq!(filter.weights.len(), fan_in, "filter covers its receptive field");
            }
            layers.push(LayerPlan {
                filter_height: spec.filter_height,
                filter_width: spec.filter_width,
                stride: spec.stride,
                in_dims,
                out_dims: *out_dims,
                filters: layer.filters.clone(),
            });
            in_dims = *out_dims;
        }
        let hidden = dims.iter().map(Dims::total).sum();
        Ok(Network { input: arch.input, layers, hidden })
    }

    /// Length of a flattened input (row-major, channel innermost).
    pub fn input_len(&self) -> usize {
        self.input.total()
    }

    /// Total ReLU count across all layers — the pattern bit width.
    pub fn hidden_neurons(&self) -> usize {
        self.hidden
    }

    /// Fresh forward-pass buffers for one worker.
    pub fn scratch(&self) -> Scratch {
        Scratch {
            z: self.layers.iter().map(|l| vec![0.0; l.out_dims.total()]).collect(),
            act: self.layers.iter().map(|l| vec![0.0; l.out_dims.total()]).collect(),
        }
    }

    /// Runs the network on one flattened input, filling `scratch` with every
    /// layer's pre-activations (and ReLU outputs, which feed the next layer).
    pub fn forward_into(&self, input: &[f64], scratch: &mut Scratch) {
        assert_eq!(input.len(), self.input.total(), "input matches the grid");
        for (l, plan) in self.layers.iter().enumerate() {
            let (done, rest) = scratch.act.split_at_mut(l);
            let x: &[f64] = if l == 0 { input } else { &done[l - 1] };
            let z = &mut scratch.z[l];
            let act = &mut rest[0];
            let (iw, id) = (plan.in_dims.width, plan.in_dims.depth);
            let mut n = 0;
            for i in 0..plan.out_dims.height {
                for j in 0..plan.out_dims.width {
                    for filter in &plan.filters {
                        let mut acc = filter.bias;
                        let mut w = 0;
                        for a in 0..plan.filter_height {
                            let row = (i * plan.stride + a) * iw + j * plan.stride;
                            for b in 0..plan.filter_width {
                                let base = (row + b) * id;
                                for c in 0..id {
                                    acc += filter.weights[w] * x[base + c];
                                    w += 1;
                                }
                            }
                        }
                        z[n] = acc;
                        act[n] = acc.max(0.0);
                        n += 1;
                    }
                }
            }
        }
    }

    /// Packs the pattern of the last forward pass into `bits`: one bit per
    /// hidden neuron in (layer, row, column, channel) order, set exactly
    /// when the pre-activation is strictly positive.
    pub fn write_pattern(&self, scratch: &Scratch, bits: &mut Vec<u64>) {
        bits.clear();
        bits.resize((self.hidden + 63) / 64, 0);
        let mut index = 0;
        for z in &scratch.z {
            for &value in z {
                if value > 0.0 {
                    bits[index / 64] |= 1 << (index % 64);
                }
                index += 1;
            }
        }
    }
}

/// All layer pre-activations for one input, outermost index the layer.
///
/// Convenience wrapper over [`Network`] for one-off calls; repeated callers
/// should build the network once and reuse a [`Scratch`].
pub fn forward_preactivations(
    arch: &Architecture,
    weights: &FloatWeights,
    input: &[f64],
) -> Result<Vec<Vec<f64>>, ArchError> {
    let network = Network::new(arch, weights)?;
    let mut scratch = network.scratch();
    network.forward_into(input, &mut scratch);
    Ok(scratch.z)
}

/// The activation pattern of precomputed pre-activations, bit-packed in
/// (layer, row, column, channel) order; strictly positive means "on".
pub fn activation_pattern(preactivations: &[Vec<f64>]) -> Vec<u64> {
    let total: usize = preactivations.iter().map(Vec::len).sum();
    let mut bits = vec![0u64; (total + 63) / 64];
    let mut index = 0;
    for layer in preactivations {
        for &value in layer {
            if value > 0.0 {
                bits[index / 64] |= 1 << (index % 64);
            }
            index += 1;
        }
    }
    bits
}

/// Distinct activation patterns observed for one standard deviation.
#[derive(Clone, Debug, PartialEq)]
pub struct VarianceRun {
    pub std: f64,
    pub distinct: u64,
}

/// Per-std breakdown plus the best estimate over the sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleReport {
    pub per_std: Vec<VarianceRun>,
    pub max_distinct: u64,
}

fn check_config(config: &SamplingConfig) -> Result<(), CliError> {
    if config.num_samples == 0 {
        return Err(CliError::Validation("num_samples must be at least 1".into()));
    }
    if config.batch_size == 0 {
        return Err(CliError::Validation("batch_size must be at least 1".into()));
    }
    if config.std_values.is_empty() {
        return Err(CliError::Validation("std_values must not be empty".into()));
    }
    for &v in &config.std_values {
        if !(v.is_finite() && v > 0.0) {
            return Err(CliError::Validation(format!(
                "std_values must be positive and finite; got {v}"
            )));
        }
    }
    Ok(())
}

fn batch_ranges(total: usize, batch: usize) -> Vec<Range<u64>> {
    (0..total)
        .step_by(batch)
        .map(|start| start as u64..(start + batch.min(total - start)) as u64)
        .collect()
}

/// Counts distinct activation patterns over Gaussian inputs, per standard
/// deviation and maximized over the sweep.
///
/// Every sample's generator is keyed by `(seed, std index, sample index)`,
/// so results depend only on the config — not on batching or threads — and
/// a larger `num_samples` can only add patterns.
pub fn estimate_region_count(
    arch: &Architecture,
    weights: &FloatWeights,
    config: &SamplingConfig,
) -> Result<SampleReport, CliError> {
    check_config(config)?;
    let network = Network::new(arch, weights)?;
    let input_len = network.input_len();
    let mut per_std = Vec::with_capacity(config.std_values.len());
    for (std_index, &std) in config.std_values.iter().enumerate() {
        let sets: Vec<HashSet<Vec<u64>>> = batch_ranges(config.num_samples, config.batch_size)
            .into_par_iter()
            .map(|range| {
                let normal = Normal::new(0.0, std).expect("std validated positive");
                let mut scratch = network.scratch();
                let mut input = vec![0.0; input_len];
                let mut bits = Vec::new();
                let mut seen = HashSet::new();
                for sample in range {
                    let mut rng =
                        ChaCha8Rng::from_seed(sample_key(config.seed, std_index as u64, sample));
                    for slot in &mut input {
                        *slot = normal.sample(&mut rng);
                    }
                    network.forward_into(&input, &mut scratch);
                    network.write_pattern(&scratch, &mut bits);
                    if !seen.contains(bits.as_slice()) {
                        seen.insert(bits.clone());
                    }
                }
                seen
            })
            .collect();
        let mut union = HashSet::new();
        for set in sets {
            union.extend(set);
        }
        per_std.push(VarianceRun { std, distinct: union.len() as u64 });
    }
    let max_distinct = per_std.iter().map(|r| r.distinct).max().expect("sweep is nonempty");
    Ok(SampleReport { per_std, max_distinct })
}
