//! Rational-valued tensors and exact convolution arithmetic.
//!
//! Inputs, filters, and activations are rank-3 tensors indexed 1-based as
//! `(row, column, channel)`, stored row-major with the channel index
//! innermost. Entries are arbitrary-precision rationals, so forward passes
//! and layer folding are exact — two weight constructions that should agree
//! can be compared with `==` instead of a tolerance.
//!
//! The centerpiece is [`fold_layers`]: given concrete weights for two
//! stacked layers *without an activation in between*, it builds the weights
//! of the single equivalent layer whose shape [`compose_linear_layers`]
//! predicts, and the fold is verified here against the two-step forward
//! pass.

use alloc::vec;
use alloc::vec::Vec;

use num_rational::BigRational;
use num_traits::Zero;

use crate::arch::{compose_linear_layers, layer_output_dims, ArchError, Dims, LayerSpec};

/// A dense rank-3 tensor of exact rationals, indexed 1-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RTensor {
    dims: Dims,
    /// Row-major with the channel index innermost.
    data: Vec<BigRational>,
}

impl RTensor {
    /// The all-zero tensor of the given shape.
    pub fn zeros(dims: Dims) -> Self {
        RTensor { dims, data: vec![BigRational::zero(); dims.total()] }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    fn flat(&self, row: usize, column: usize, channel: usize) -> usize {
        assert!(
            (1..=self.dims.height).contains(&row)
                && (1..=self.dims.width).contains(&column)
                && (1..=self.dims.depth).contains(&channel),
            "index ({row},{column},{channel}) outside tensor {}",
            self.dims
        );
        ((row - 1) * self.dims.width + (column - 1)) * self.dims.depth + (channel - 1)
    }

    pub fn get(&self, row: usize, column: usize, channel: usize) -> &BigRational {
        &self.data[self.flat(row, column, channel)]
    }

    pub fn set(&mut self, row: usize, column: usize, channel: usize, value: BigRational) {
        let k = self.flat(row, column, channel);
        self.data[k] = value;
    }
}

/// One convolution filter: a weight tensor over its receptive field plus a
/// scalar bias.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Filter {
    pub weights: RTensor,
    pub bias: BigRational,
}

/// The filters of one layer, one per output channel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayerWeights {
    pub filters: Vec<Filter>,
}

impl LayerWeights {
    /// Number of output channels.
    pub fn depth(&self) -> usize {
        self.filters.len()
    }
}

/// Concrete weights for every layer of an architecture, in stack order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightSet {
    pub layers: Vec<LayerWeights>,
}

fn check_weights(weights: &LayerWeights, spec: &LayerSpec, input_depth: usize) {
    assert_eq!(weights.depth(), spec.depth, "one filter per output channel");
    let field = Dims::new(spec.filter_height, spec.filter_width, input_depth);
    for filter in &weights.filters {
        assert_eq!(filter.weights.dims(), field, "filter shape matches the layer");
    }
}

/// Applies one layer as a purely linear (affine) map — no activation.
/// Output channel `k` at grid position `(i, j)` is
/// `bias_k + Σ_{a,b,c} W^k_{a,b,c} · x_{a+(i−1)s, b+(j−1)s, c}`.
pub fn conv_forward(
    input: &RTensor,
    spec: &LayerSpec,
    weights: &LayerWeights,
) -> Result<RTensor, ArchError> {
    let out = layer_output_dims(input.dims(), spec)?;
    check_weights(weights, spec, input.dims().depth);
    let mut output = RTensor::zeros(out);
    for i in 1..=out.height {
        for j in 1..=out.width {
            for (k, filter) in weights.filters.iter().enumerate() {
                let mut acc = filter.bias.clone();
                for a in 1..=spec.filter_height {
                    for b in 1..=spec.filter_width {
                        for c in 1..=input.dims().depth {
                            let w = filter.weights.get(a, b, c);
                            if w.is_zero() {
                                continue;
                            }
                            let x = input.get(
                                a + (i - 1) * spec.stride,
                                b + (j - 1) * spec.stride,
                                c,
                            );
                            acc += w * x;
                        }
                    }
                }
                output.set(i, j, k + 1, acc);
            }
        }
    }
    Ok(output)
}

/// Folds two stacked linear layers into the one layer computing the same
/// affine map, returning its shape (as from [`compose_linear_layers`]) with
/// concrete weights.
///
/// Folded filter `k` reads the union of the input windows feeding one
/// second-layer window:
///
/// ```text
/// W′ᵏ_{A,B,c} = Σ_{a′,b′,c′} W₂ᵏ_{a′,b′,c′} · W₁^{c′}_{A−(a′−1)s₁, B−(b′−1)s₁, c}
/// B′ᵏ        = B₂ᵏ + Σ_{a′,b′,c′} W₂ᵏ_{a′,b′,c′} · B₁^{c′}
/// ```
///
/// with out-of-range first-layer indices contributing nothing.
pub fn fold_layers(
    input: Dims,
    first: &LayerSpec,
    first_weights: &LayerWeights,
    second: &LayerSpec,
    second_weights: &LayerWeights,
) -> Result<(LayerSpec, LayerWeights), ArchError> {
    let folded = compose_linear_layers(first, second, input)?;
    check_weights(first_weights, first, input.depth);
    check_weights(second_weights, second, first.depth);
    let field = Dims::new(folded.filter_height, folded.filter_width, input.depth);
    let mut filters = Vec::with_capacity(second.depth);
    for w2 in &second_weights.filters {
        let mut weights = RTensor::zeros(field);
        let mut bias = w2.bias.clone();
        for ap in 1..=second.filter_height {
            for bp in 1..=second.filter_width {
                for cp in 1..=first.depth {
                    let w2v = w2.weights.get(ap, bp, cp);
                    if w2v.is_zero() {
                        continue;
                    }
                    let w1 = &first_weights.filters[cp - 1];
                    bias += w2v * &w1.bias;
                    for a in 1..=first.filter_height {
                        for b in 1..=first.filter_width {
                            for c in 1..=input.depth {
                                let w1v = w1.weights.get(a, b, c);
                                if w1v.is_zero() {
                                    continue;
                                }
                                let row = a + (ap - 1) * first.stride;
                                let col = b + (bp - 1) * first.stride;
                                let acc = weights.get(row, col, c) + w2v * w1v;
                                weights.set(row, col, c, acc);
                            }
                        }
                    }
                }
            }
        }
        filters.push(Filter { weights, bias });
    }
    Ok((folded, LayerWeights { filters }))
}
