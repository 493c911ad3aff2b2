//! Architecture shapes for ReLU CNNs.
//!
//! An [`Architecture`] is an input grid plus a stack of convolutional layers,
//! each described by a [`LayerSpec`] (filter height/width, stride, number of
//! filters). This module derives per-layer output dimensions, validates whole
//! stacks, counts trainable parameters, and composes two consecutive *linear*
//! convolutional layers into a single equivalent layer.
//!
//! Index conventions: tensor indices `(a, b, c)` and grid positions `(i, j)`
//! are 1-based everywhere in this crate, matching the usual convolution
//! formulas. Layer indices in error values are 0-based, matching how layers
//! are stored in [`Architecture::layers`].

use alloc::vec::Vec;
use core::fmt;

use crate::counting::CountValue;

/// One convolutional layer: `depth` filters of shape
/// `filter_height × filter_width × (input depth)`, slid with `stride`.
///
/// The stride applies to both grid axes; rectangular strides are not modeled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LayerSpec {
    pub filter_height: usize,
    pub filter_width: usize,
    pub stride: usize,
    pub depth: usize,
}

impl LayerSpec {
    pub fn new(filter_height: usize, filter_width: usize, stride: usize, depth: usize) -> Self {
        LayerSpec { filter_height, filter_width, stride, depth }
    }
}

/// Dimensions of one neuron grid: `height × width × depth`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Dims {
    pub height: usize,
    pub width: usize,
    pub depth: usize,
}

impl Dims {
    pub fn new(height: usize, width: usize, depth: usize) -> Self {
        Dims { height, width, depth }
    }

    /// Total number of neurons in the grid.
    pub fn total(&self) -> usize {
        self.height * self.width * self.depth
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.height, self.width, self.depth)
    }
}

/// A full network shape: input dimensions plus an ordered layer stack.
///
/// Only the hidden convolutional stack is modeled; the scalar output unit
/// carries no ReLU and does not affect region counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Architecture {
    pub input: Dims,
    pub layers: Vec<LayerSpec>,
}

impl Architecture {
    pub fn new(input: Dims, layers: Vec<LayerSpec>) -> Self {
        Architecture { input, layers }
    }

    /// Convenience constructor for a single-layer network.
    pub fn one_layer(input: Dims, layer: LayerSpec) -> Self {
        Architecture { input, layers: alloc::vec![layer] }
    }

    /// Output dimensions of every hidden layer, in order.
    ///
    /// Fails atomically with the 0-based index of the first invalid layer.
    pub fn layer_dims(&self) -> Result<Vec<Dims>, ArchError> {
        validate_architecture(self)
    }

    /// Total number of hidden neurons across all layers.
    pub fn hidden_neurons(&self) -> Result<usize, ArchError> {
        Ok(self.layer_dims()?.iter().map(Dims::total).sum())
    }
}

/// Shape errors raised while deriving layer geometry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ArchError {
    /// The architecture has no hidden layers.
    NoLayers,
    /// A shape field that must be ≥ 1 was zero. `layer` is the 0-based hidden
    /// layer index, or `None` when the input dimensions are at fault.
    ZeroField { layer: Option<usize>, field: &'static str },
    /// A filter does not fit inside the grid it slides over (the output grid
    /// would be empty). `layer` is the 0-based offending layer index.
    FilterExceedsInput {
        layer: usize,
        input: Dims,
        filter_height: usize,
        filter_width: usize,
    },
}

impl fmt::Display for ArchError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArchError::NoLayers => write!(f, "architecture has no hidden layers"),
            ArchError::ZeroField { layer: Some(l), field } => {
                write!(f, "layer {l}: field `{field}` must be at least 1")
            }
            ArchError::ZeroField { layer: None, field } => {
                write!(f, "input dimensions: field `{field}` must be at least 1")
            }
            ArchError::FilterExceedsInput { layer, input, filter_height, filter_width } => {
                write!(
                    f,
                    "layer {layer}: filter {filter_height}x{filter_width} does not fit in input {input}"
                )
            }
        }
    }
}

impl core::error::Error for ArchError {}

fn check_dims(d: &Dims) -> Result<(), ArchError> {
    let zero = |field| ArchError::ZeroField { layer: None, field };
    if d.height == 0 {
        return Err(zero("height"));
    }
    if d.width == 0 {
        return Err(zero("width"));
    }
    if d.depth == 0 {
        return Err(zero("depth"));
    }
    Ok(())
}

fn check_layer(index: usize, l: &LayerSpec) -> Result<(), ArchError> {
    let zero = |field| ArchError::ZeroField { layer: Some(index), field };
    if l.filter_height == 0 {
        return Err(zero("filter_height"));
    }
    if l.filter_width == 0 {
        return Err(zero("filter_width"));
    }
    if l.stride == 0 {
        return Err(zero("stride"));
    }
    if l.depth == 0 {
        return Err(zero("depth"));
    }
    Ok(())
}

/// Output dimensions of a single layer applied to `input`:
/// `⌊(n − f)/s⌋ + 1` per grid axis, depth = number of filters.
///
/// Standalone calls report shape errors with layer index 0;
/// [`validate_architecture`] rewrites the index for stacked layers.
pub fn layer_output_dims(input: Dims, layer: &LayerSpec) -> Result<Dims, ArchError> {
    check_dims(&input)?;
    check_layer(0, layer)?;
    if layer.filter_height > input.height || layer.filter_width > input.width {
        return Err(ArchError::FilterExceedsInput {
            layer: 0,
            input,
            filter_height: layer.filter_height,
            filter_width: layer.filter_width,
        });
    }
    Ok(Dims {
        height: (input.height - layer.filter_height) / layer.stride + 1,
        width: (input.width - layer.filter_width) / layer.stride + 1,
        depth: layer.depth,
    })
}

/// Chains [`layer_output_dims`] over the whole stack, returning the
/// dimensions of every hidden layer. Fails atomically: the first invalid
/// layer aborts the derivation, with its 0-based index in the error.
pub fn validate_architecture(arch: &Architecture) -> Result<Vec<Dims>, ArchError> {
    check_dims(&arch.input)?;
    if arch.layers.is_empty() {
        return Err(ArchError::NoLayers);
    }
    let mut dims = Vec::with_capacity(arch.layers.len());
    let mut current = arch.input;
    for (index, layer) in arch.layers.iter().enumerate() {
        check_layer(index, layer)?;
        current = layer_output_dims(current, layer).map_err(|e| match e {
            ArchError::FilterExceedsInput { input, filter_height, filter_width, .. } => {
                ArchError::FilterExceedsInput { layer: index, input, filter_height, filter_width }
            }
            other => other,
        })?;
        dims.push(current);
    }
    Ok(dims)
}

/// Number of trainable parameters:
/// `Σ_l (f_l⁽¹⁾ · f_l⁽²⁾ · d_{l−1} · d_l + d_l)` (weights plus one bias per
/// filter). Strictly monotone in every depth and filter dimension.
pub fn parameter_count(arch: &Architecture) -> Result<CountValue, ArchError> {
    validate_architecture(arch)?;
    let mut total = CountValue::from(0u32);
    let mut prev_depth = arch.input.depth;
    for layer in &arch.layers {
        let weights = CountValue::from(layer.filter_height)
            * CountValue::from(layer.filter_width)
            * CountValue::from(prev_depth)
            * CountValue::from(layer.depth);
        total += weights + CountValue::from(layer.depth);
        prev_depth = layer.depth;
    }
    Ok(total)
}

/// Composes two consecutive convolutional layers *without an activation in
/// between* into one equivalent layer: filter
/// `(f₁⁽¹⁾ + (f₂⁽¹⁾ − 1)s₁) × (f₁⁽²⁾ + (f₂⁽²⁾ − 1)s₁)`, stride `s₁s₂`,
/// depth `d₂`.
///
/// The composed layer computes the same linear map as the stack; see
/// [`crate::tensor::fold_layers`] for the concrete weight construction, which
/// is verified against the stacked forward pass in exact arithmetic.
pub fn compose_linear_layers(
    spec1: &LayerSpec,
    spec2: &LayerSpec,
    input: Dims,
) -> Result<LayerSpec, ArchError> {
    let mid = layer_output_dims(input, spec1)?;
    layer_output_dims(mid, spec2).map_err(|e| match e {
        ArchError::FilterExceedsInput { input, filter_height, filter_width, .. } => {
            ArchError::FilterExceedsInput { layer: 1, input, filter_height, filter_width }
        }
        other => other,
    })?;
    Ok(LayerSpec {
        filter_height: spec1.filter_height + (spec2.filter_height - 1) * spec1.stride,
        filter_width: spec1.filter_width + (spec2.filter_width - 1) * spec1.stride,
        stride: spec1.stride * spec2.stride,
        depth: spec2.depth,
    })
}
