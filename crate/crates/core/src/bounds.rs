//! Lower and upper bounds on region counts of multi-layer networks.
//!
//! Exact counts are only available for one hidden layer; deeper stacks are
//! bracketed instead:
//!
//! * the *naive* bound `2^n` over all `n` hidden neurons (each activation
//!   pattern claims at most one region);
//! * a *lower* bound that replicates the input channels through the depth of
//!   every intermediate layer — each intermediate layer `l` contributes a
//!   factor `⌊d_l/d₀⌋` per replicated neuron, and the last layer contributes
//!   the exact count of a derived one-layer network. Requires `d_l ≥ d₀`
//!   for every hidden layer;
//! * an *upper* bound in which every layer past the first cuts each existing
//!   piece into at most the general-position maximum of its arrangement —
//!   the hyperplanes of layer `l` live in the previous layer's activation
//!   space, so the binomial sum is capped at the previous layer's neuron
//!   count;
//! * the classic fully-connected specialization of both bounds.
//!
//! All bounds are exact big-integer values; reports carry a method tag per
//! value so serialized rows stay self-describing.

use core::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow};

use crate::arch::{parameter_count, validate_architecture, ArchError, Architecture, Dims};
use crate::counting::{binomial, exact_region_count, fc_region_count, CountValue};

/// A single bound value with the name of the method that produced it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bound {
    pub value: CountValue,
    pub method: &'static str,
}

impl Bound {
    fn new(value: CountValue, method: &'static str) -> Self {
        Bound { value, method }
    }
}

/// A bracket `lower ≤ true count ≤ upper ≤ naive_upper`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundReport {
    pub lower: Bound,
    pub upper: Bound,
    pub naive_upper: Bound,
}

/// Errors raised by bound computations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BoundsError {
    Arch(ArchError),
    /// The lower bound requires every hidden layer to be at least as deep as
    /// the input (`d_l ≥ d₀`); `layer` is the 0-based offending index.
    HypothesisViolated { layer: usize, depth: usize, input_depth: usize },
}

impl From<ArchError> for BoundsError {
    fn from(e: ArchError) -> Self {
        BoundsError::Arch(e)
    }
}

impl fmt::Display for BoundsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundsError::Arch(e) => write!(f, "{e}"),
            BoundsError::HypothesisViolated { layer, depth, input_depth } => write!(
                f,
                "lower bound needs depth >= input depth on every layer; \
                 layer {layer} has depth {depth} < {input_depth}"
            ),
        }
    }
}

impl core::error::Error for BoundsError {}

fn exponent(value: usize) -> u32 {
    u32::try_from(value).expect("exponent fits in u32")
}

/// `2^n` over all hidden neurons — every network is cut into at most this
/// many regions, with room to spare.
pub fn naive_bound(arch: &Architecture) -> Result<CountValue, BoundsError> {
    let n: usize = validate_architecture(arch)?.iter().map(Dims::total).sum();
    Ok(CountValue::one() << n)
}

/// Lower bound on the maximal region count of a multi-layer network.
///
/// The last layer is rebuilt as a one-layer network over the previous grid
/// with the *input* channel count (its exact count is computable); every
/// earlier layer multiplies by `⌊d_l/d₀⌋` per neuron of its grid restricted
/// to `d₀` channels. For one hidden layer this is the exact count.
pub fn multilayer_lower_bound(arch: &Architecture) -> Result<CountValue, BoundsError> {
    let dims = validate_architecture(arch)?;
    let d0 = arch.input.depth;
    for (layer, spec) in arch.layers.iter().enumerate() {
        if spec.depth < d0 {
            return Err(BoundsError::HypothesisViolated {
                layer,
                depth: spec.depth,
                input_depth: d0,
            });
        }
    }
    let last_index = arch.layers.len() - 1;
    let last = &arch.layers[last_index];
    let prev = if last_index == 0 { arch.input } else { dims[last_index - 1] };
    let derived_input = Dims::new(prev.height, prev.width, d0);
    let mut result = exact_region_count(derived_input, last)?;
    for l in 0..last_index {
        let replicas = CountValue::from(arch.layers[l].depth / d0);
        let neurons = dims[l].height * dims[l].width * d0;
        result *= Pow::pow(replicas, exponent(neurons));
    }
    Ok(result)
}

/// Upper bound on the region count of a multi-layer network: the exact count
/// of the first layer times, for each later layer `l`, the general-position
/// region maximum `Σ_{i=0}^{N_{l−1}} C(N_l, i)` of `N_l` hyperplanes in the
/// previous layer's `N_{l−1}`-dimensional activation space.
pub fn multilayer_upper_bound(arch: &Architecture) -> Result<CountValue, BoundsError> {
    let dims = validate_architecture(arch)?;
    let mut result = exact_region_count(arch.input, &arch.layers[0])?;
    let mut prev_total = dims[0].total();
    for d in &dims[1..] {
        let layer_total = d.total();
        let cuts: CountValue = (0..=prev_total).map(|i| binomial(layer_total, i)).sum();
        result *= cuts;
        prev_total = layer_total;
    }
    Ok(result)
}

/// All three bounds for an architecture. For a single hidden layer the
/// lower and upper bounds coincide with the exact count and are tagged so.
pub fn arch_bounds(arch: &Architecture) -> Result<BoundReport, BoundsError> {
    let one_layer = arch.layers.len() == 1;
    let (lo_tag, up_tag) =
        if one_layer { ("exact", "exact") } else { ("multi-layer-lower", "multi-layer-upper") };
    Ok(BoundReport {
        lower: Bound::new(multilayer_lower_bound(arch)?, lo_tag),
        upper: Bound::new(multilayer_upper_bound(arch)?, up_tag),
        naive_upper: Bound::new(naive_bound(arch)?, "naive"),
    })
}

/// The fully-connected specialization: `d₀` inputs and hidden widths
/// `depths = (d_1, …, d_L)`, all grids 1×1.
///
/// ```text
/// lower = Σ_{k=0}^{d₀} C(d_L, k) · Π_{l=1}^{L−1} ⌊d_l/d₀⌋^{d₀}
/// upper = Π_{l=1}^{L} Σ_{i=0}^{d₀} C(d_l, i)
/// ```
///
/// For `L = 1` both collapse to the classic one-layer count. A width below
/// `d₀` zeroes a lower-bound factor, leaving the (vacuous) bound 0.
pub fn fc_bounds(d0: usize, depths: &[usize]) -> BoundReport {
    assert!(d0 >= 1, "input width must be positive");
    assert!(!depths.is_empty(), "at least one hidden layer");
    let mut lower = fc_region_count(d0, depths[depths.len() - 1]);
    for &dl in &depths[..depths.len() - 1] {
        lower *= Pow::pow(CountValue::from(dl / d0), exponent(d0));
    }
    let upper: CountValue = depths.iter().map(|&dl| fc_region_count(d0, dl)).product();
    let naive = CountValue::one() << depths.iter().sum::<usize>();
    BoundReport {
        lower: Bound::new(lower, "fc-lower"),
        upper: Bound::new(upper, "fc-upper"),
        naive_upper: Bound::new(naive, "naive"),
    }
}

/// Bounds and regions-per-parameter ratios for one architecture.
///
/// When the lower-bound hypothesis fails, `lower` and its ratio are omitted
/// rather than substituted — the remaining fields stay valid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArchSummary {
    pub parameters: CountValue,
    pub lower: Option<Bound>,
    pub upper: Bound,
    pub naive_upper: Bound,
    /// `lower / parameters` as an exact rational.
    pub lower_per_parameter: Option<BigRational>,
    /// `upper / parameters` as an exact rational.
    pub upper_per_parameter: BigRational,
}

/// Side-by-side expressivity comparison of two architectures.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpressivityReport {
    pub first: ArchSummary,
    pub second: ArchSummary,
}

fn ratio(value: &CountValue, parameters: &CountValue) -> BigRational {
    BigRational::new(BigInt::from(value.clone()), BigInt::from(parameters.clone()))
}

/// Summarizes one architecture for an expressivity comparison. Only finite
/// quantities at the given sizes are reported — no asymptotic claims.
pub fn summarize_architecture(arch: &Architecture) -> Result<ArchSummary, BoundsError> {
    let parameters = parameter_count(arch)?;
    let one_layer = arch.layers.len() == 1;
    let (lo_tag, up_tag) =
        if one_layer { ("exact", "exact") } else { ("multi-layer-lower", "multi-layer-upper") };
    let upper = Bound::new(multilayer_upper_bound(arch)?, up_tag);
    let naive_upper = Bound::new(naive_bound(arch)?, "naive");
    let lower = match multilayer_lower_bound(arch) {
        Ok(value) => Some(Bound::new(value, lo_tag)),
        Err(BoundsError::HypothesisViolated { .. }) => None,
        Err(e) => return Err(e),
    };
    let lower_per_parameter = lower.as_ref().map(|b| ratio(&b.value, &parameters));
    let upper_per_parameter = ratio(&upper.value, &parameters);
    Ok(ArchSummary {
        parameters,
        lower,
        upper,
        naive_upper,
        lower_per_parameter,
        upper_per_parameter,
    })
}

/// Compares two architectures: parameter counts, bound brackets, and
/// regions-per-parameter ratios for each.
pub fn expressivity_report(
    arch_a: &Architecture,
    arch_b: &Architecture,
) -> Result<ExpressivityReport, BoundsError> {
    Ok(ExpressivityReport {
        first: summarize_architecture(arch_a)?,
        second: summarize_architecture(arch_b)?,
    })
}
