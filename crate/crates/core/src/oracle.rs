//! Seeded weight realizations and exact hyperplane-arrangement region
//! counts — an independent geometric check on the combinatorial counting
//! formulas.
//!
//! A one-layer network with concrete weights cuts its input space along one
//! hyperplane per output neuron, `w·x = −bias` over the neuron's window.
//! The number of connected components of the complement — the network's
//! linear regions — is computed exactly via the Whitney-sum form of
//! Zaslavsky's region-count theorem:
//!
//! ```text
//! r(A) = Σ_{B ⊆ A central} (−1)^{|B| − rank B}
//! ```
//!
//! summed over *central* subsets (those whose hyperplanes share a common
//! point). Central subsets are walked depth-first with an incremental exact
//! elimination ([`crate::linalg::Echelon`]); an inconsistent subset prunes
//! all of its supersets, which keeps the walk far below `2^m` whenever many
//! subsets fail to meet. The walk is still exponential in the worst case,
//! so counting refuses arrangements above [`MAX_HYPERPLANES`] planes.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arch::{layer_output_dims, validate_architecture, ArchError, Architecture, Dims, LayerSpec};
use crate::counting::{binomial, CountValue};
use crate::tensor::{Filter, LayerWeights, RTensor, WeightSet};

/// Hard cap on the arrangement size accepted by [`count_regions`].
pub const MAX_HYPERPLANES: usize = 20;

/// Magnitude bound for sampled integer weights and biases.
pub const WEIGHT_RANGE: i64 = 1_000_000;

/// The affine hyperplane `normal · x = offset`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hyperplane {
    pub normal: Vec<BigRational>,
    pub offset: BigRational,
}

/// A finite set of hyperplanes in a fixed ambient dimension. Construction
/// validates that every normal has the right length and is not identically
/// zero; nothing else is assumed (parallel, repeated, and degenerate
/// configurations are all legal).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arrangement {
    ambient: usize,
    hyperplanes: Vec<Hyperplane>,
}

/// Errors raised while building or counting arrangements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleError {
    Arch(ArchError),
    /// A normal has the wrong number of entries for the ambient space.
    DimensionMismatch { index: usize, expected: usize, got: usize },
    /// A normal is identically zero — not a hyperplane.
    ZeroNormal { index: usize },
    /// Region counting is capped at [`MAX_HYPERPLANES`].
    TooManyHyperplanes { count: usize, max: usize },
}

impl From<ArchError> for OracleError {
    fn from(e: ArchError) -> Self {
        OracleError::Arch(e)
    }
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::Arch(e) => write!(f, "{e}"),
            OracleError::DimensionMismatch { index, expected, got } => {
                write!(f, "hyperplane {index}: normal has {got} entries, expected {expected}")
            }
            OracleError::ZeroNormal { index } => {
                write!(f, "hyperplane {index}: normal is identically zero")
            }
            OracleError::TooManyHyperplanes { count, max } => {
                write!(f, "{count} hyperplanes exceed the exact-counting cap of {max}")
            }
        }
    }
}

impl core::error::Error for OracleError {}

impl Arrangement {
    pub fn new(ambient: usize, hyperplanes: Vec<Hyperplane>) -> Result<Self, OracleError> {
        for (index, h) in hyperplanes.iter().enumerate() {
            if h.normal.len() != ambient {
                return Err(OracleError::DimensionMismatch {
                    index,
                    expected: ambient,
                    got: h.normal.len(),
                });
            }
            if h.normal.iter().all(Zero::is_zero) {
                return Err(OracleError::ZeroNormal { index });
            }
        }
        Ok(Arrangement { ambient, hyperplanes })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn hyperplanes(&self) -> &[Hyperplane] {
        &self.hyperplanes
    }

    pub fn len(&self) -> usize {
        self.hyperplanes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hyperplanes.is_empty()
    }
}

/// Counts the regions (connected components of the complement) of the
/// arrangement, exactly.
///
/// The alternating sum over central subsets is accumulated in an `i64`: with
/// at most [`MAX_HYPERPLANES`] planes there are fewer than `2^20` terms of
/// magnitude 1, so overflow is impossible.
pub fn count_regions(arrangement: &Arrangement) -> Result<CountValue, OracleError> {
    let m = arrangement.len();
    if m > MAX_HYPERPLANES {
        return Err(OracleError::TooManyHyperplanes { count: m, max: MAX_HYPERPLANES });
    }
    let mut echelon = crate::linalg::Echelon::new(arrangement.ambient);
    // The empty subset is central with rank 0 and contributes +1.
    let mut total: i64 = 1;
    walk(arrangement, &mut echelon, 0, 0, &mut total);
    let total = u64::try_from(total).expect("region count is positive");
    Ok(CountValue::from(total))
}

fn walk(
    arrangement: &Arrangement,
    echelon: &mut crate::linalg::Echelon,
    start: usize,
    size: usize,
    total: &mut i64,
) {
    for h in start..arrangement.hyperplanes.len() {
        let plane = &arrangement.hyperplanes[h];
        if echelon.push(&plane.normal, &plane.offset) == crate::linalg::PushOutcome::Inconsistent {
            // Empty intersection; every superset is empty too, so the whole
            // branch below h is pruned.
            continue;
        }
        let size = size + 1;
        *total += if (size - echelon.rank()) % 2 == 0 { 1 } else { -1 };
        walk(arrangement, echelon, h + 1, size, total);
        echelon.pop();
    }
}

/// Zaslavsky's general-position maximum: `m` hyperplanes in dimension `n`
/// bound at most `Σ_{i=0}^{n} C(m, i)` regions. Every arrangement's true
/// count is at most this, with equality exactly in general position.
pub fn general_position_bound(ambient: usize, count: usize) -> CountValue {
    (0..=ambient.min(count)).map(|i| binomial(count, i)).sum()
}

/// Draws integer weights and biases uniformly from `[−10⁶, 10⁶]` for every
/// layer of the architecture, reproducibly from `seed`.
///
/// A filter whose weights all come out zero would degenerate its hyperplanes
/// and is redrawn from the same stream; biases may be zero. Draw order is
/// layers → filters → weight tensor in storage order → bias, so any prefix
/// of the architecture sees the same values under the same seed.
pub fn sample_rational_weights(arch: &Architecture, seed: u64) -> Result<WeightSet, ArchError> {
    validate_architecture(arch)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut layers = Vec::with_capacity(arch.layers.len());
    let mut in_depth = arch.input.depth;
    for spec in &arch.layers {
        let field = Dims::new(spec.filter_height, spec.filter_width, in_depth);
        let mut filters = Vec::with_capacity(spec.depth);
        for _ in 0..spec.depth {
            let weights = loop {
                let mut tensor = RTensor::zeros(field);
                let mut nonzero = false;
                for a in 1..=field.height {
                    for b in 1..=field.width {
                        for c in 1..=field.depth {
                            let v = rng.gen_range(-WEIGHT_RANGE..=WEIGHT_RANGE);
                            nonzero |= v != 0;
                            tensor.set(a, b, c, BigRational::from_integer(v.into()));
                        }
                    }
                }
                if nonzero {
                    break tensor;
                }
            };
            let bias = rng.gen_range(-WEIGHT_RANGE..=WEIGHT_RANGE);
            filters.push(Filter { weights, bias: BigRational::from_integer(bias.into()) });
        }
        layers.push(LayerWeights { filters });
        in_depth = spec.depth;
    }
    Ok(WeightSet { layers })
}

/// Builds the pre-activation arrangement of one layer with concrete weights:
/// one hyperplane per output neuron `(i, j, k)`, its normal the filter-`k`
/// weights embedded at the window of `(i, j)` and its offset `−bias_k`.
/// Hyperplanes are ordered row-major over `(i, j)` with the channel index
/// `k` innermost; the ambient space is the full input grid.
pub fn build_layer_arrangement(
    input: Dims,
    spec: &LayerSpec,
    weights: &LayerWeights,
) -> Result<Arrangement, OracleError> {
    let out = layer_output_dims(input, spec)?;
    assert_eq!(weights.depth(), spec.depth, "one filter per output channel");
    let ambient = input.total();
    let flat = |a: usize, b: usize, c: usize| ((a - 1) * input.width + (b - 1)) * input.depth + (c - 1);
    let mut hyperplanes = Vec::with_capacity(out.height * out.width * out.depth);
    for i in 1..=out.height {
        for j in 1..=out.width {
            for filter in &weights.filters {
                let mut normal = vec![BigRational::zero(); ambient];
                for a in 1..=spec.filter_height {
                    for b in 1..=spec.filter_width {
                        for c in 1..=input.depth {
                            let w = filter.weights.get(a, b, c);
                            if !w.is_zero() {
                                normal[flat(
                                    a + (i - 1) * spec.stride,
                                    b + (j - 1) * spec.stride,
                                    c,
                                )] = w.clone();
                            }
                        }
                    }
                }
                hyperplanes.push(Hyperplane { normal, offset: -&filter.bias });
            }
        }
    }
    Arrangement::new(ambient, hyperplanes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::exact_region_count;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    /// The line `ax + by = c` in the plane.
    fn line(a: i64, b: i64, c: i64) -> Hyperplane {
        Hyperplane { normal: vec![q(a), q(b)], offset: q(c) }
    }

    fn planar(lines: Vec<Hyperplane>) -> Arrangement {
        Arrangement::new(2, lines).unwrap()
    }

    fn count(arrangement: &Arrangement) -> u64 {
        let c = count_regions(arrangement).unwrap();
        assert!(c <= general_position_bound(arrangement.ambient_dim(), arrangement.len()));
        u64::try_from(c).unwrap()
    }

    #[test]
    fn empty_arrangement_has_one_region() {
        assert_eq!(count(&Arrangement::new(3, vec![]).unwrap()), 1);
    }

    #[test]
    fn one_hyperplane_cuts_two_regions() {
        assert_eq!(count(&planar(vec![line(1, 0, 0)])), 2);
    }

    #[test]
    fn generic_lines_follow_the_quadratic() {
        // x − iy = i² for i = 1..k: pairwise non-parallel, no three meet,
        // so the count is the general-position value 1 + k + C(k, 2).
        for k in 1..=6i64 {
            let lines = (1..=k).map(|i| line(1, -i, i * i)).collect();
            assert_eq!(count(&planar(lines)), (1 + k + k * (k - 1) / 2) as u64);
        }
    }

    #[test]
    fn parallel_lines_stack_regions() {
        assert_eq!(count(&planar(vec![line(1, 0, 0), line(1, 0, 1)])), 3);
        assert_eq!(count(&planar(vec![line(1, 0, 0), line(1, 0, 1), line(1, 0, 2)])), 4);
        // Two parallel classes: a 3×3 grid.
        let grid = vec![line(1, 0, 0), line(1, 0, 1), line(0, 1, 0), line(0, 1, 1)];
        assert_eq!(count(&planar(grid)), 9);
    }

    #[test]
    fn concurrent_lines_form_a_pencil() {
        // k distinct lines through the origin cut the plane into 2k sectors.
        let pencil = vec![line(1, 0, 0), line(0, 1, 0), line(1, 1, 0)];
        assert_eq!(count(&planar(pencil)), 6);
    }

    #[test]
    fn repeated_hyperplanes_count_once() {
        assert_eq!(count(&planar(vec![line(2, 0, 0), line(3, 0, 0)])), 2);
    }

    #[test]
    fn general_position_bound_values() {
        assert_eq!(general_position_bound(2, 3), CountValue::from(7u32));
        assert_eq!(general_position_bound(3, 20), CountValue::from(1351u32));
        // Dimension at least the plane count: all 2^m orthants appear.
        assert_eq!(general_position_bound(5, 3), CountValue::from(8u32));
        assert_eq!(general_position_bound(4, 0), CountValue::from(1u32));
    }

    #[test]
    fn oversized_arrangements_are_refused() {
        let lines: Vec<Hyperplane> =
            (0..21).map(|i| Hyperplane { normal: vec![q(1)], offset: q(i) }).collect();
        let arrangement = Arrangement::new(1, lines).unwrap();
        assert_eq!(
            count_regions(&arrangement).unwrap_err(),
            OracleError::TooManyHyperplanes { count: 21, max: 20 }
        );
    }

    #[test]
    fn malformed_hyperplanes_are_rejected() {
        let err = Arrangement::new(2, vec![Hyperplane { normal: vec![q(1)], offset: q(0) }]);
        assert_eq!(
            err.unwrap_err(),
            OracleError::DimensionMismatch { index: 0, expected: 2, got: 1 }
        );
        let err = Arrangement::new(2, vec![line(1, 1, 0), line(0, 0, 3)]);
        assert_eq!(err.unwrap_err(), OracleError::ZeroNormal { index: 1 });
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let arch = Architecture::one_layer(Dims::new(1, 3, 1), LayerSpec::new(1, 2, 1, 2));
        let first = sample_rational_weights(&arch, 7).unwrap();
        let again = sample_rational_weights(&arch, 7).unwrap();
        assert_eq!(first, again);
        for seed in 0..10 {
            let a = sample_rational_weights(&arch, 2 * seed).unwrap();
            let b = sample_rational_weights(&arch, 2 * seed + 1).unwrap();
            assert_ne!(a, b, "seeds {} and {} drew identical weights", 2 * seed, 2 * seed + 1);
        }
    }

    #[test]
    fn sampled_weights_are_bounded_integers_with_nonzero_filters() {
        let arch = Architecture::new(
            Dims::new(2, 3, 2),
            vec![LayerSpec::new(2, 2, 1, 3), LayerSpec::new(1, 2, 1, 2)],
        );
        let lo = q(-WEIGHT_RANGE);
        let hi = q(WEIGHT_RANGE);
        for seed in 0..5 {
            let ws = sample_rational_weights(&arch, seed).unwrap();
            assert_eq!(ws.layers.len(), 2);
            for layer in &ws.layers {
                for filter in &layer.filters {
                    let dims = filter.weights.dims();
                    let mut nonzero = false;
                    for a in 1..=dims.height {
                        for b in 1..=dims.width {
                            for c in 1..=dims.depth {
                                let w = filter.weights.get(a, b, c);
                                assert!(w.is_integer() && (&lo..=&hi).contains(&w));
                                nonzero |= !w.is_zero();
                            }
                        }
                    }
                    assert!(nonzero, "filter weights must not all vanish");
                    assert!(filter.bias.is_integer());
                }
            }
        }
    }

    #[test]
    fn layer_arrangement_embeds_filters_at_their_windows() {
        let input = Dims::new(1, 3, 1);
        let spec = LayerSpec::new(1, 2, 1, 2);
        let arch = Architecture::one_layer(input, spec);
        let ws = sample_rational_weights(&arch, 3).unwrap();
        let arrangement = build_layer_arrangement(input, &spec, &ws.layers[0]).unwrap();
        assert_eq!(arrangement.ambient_dim(), 3);
        assert_eq!(arrangement.len(), 4);
        // Window (1,1) reads inputs {1,2}; window (1,2) reads {2,3}. The
        // first two hyperplanes belong to window (1,1), channels 1 and 2.
        for (h, plane) in arrangement.hyperplanes().iter().enumerate() {
            let window = h / 2;
            let filter = &ws.layers[0].filters[h % 2];
            let outside = if window == 0 { 2 } else { 0 };
            assert!(plane.normal[outside].is_zero());
            assert_eq!(plane.normal[window], *filter.weights.get(1, 1, 1));
            assert_eq!(plane.normal[window + 1], *filter.weights.get(1, 2, 1));
            assert_eq!(plane.offset, -&filter.bias);
        }
    }

    #[test]
    fn seeded_counts_match_the_combinatorial_formula() {
        let cases = [
            (Dims::new(1, 3, 1), LayerSpec::new(1, 2, 1, 2), Some(15u64)),
            (Dims::new(2, 2, 1), LayerSpec::new(1, 2, 1, 2), Some(16)),
            (Dims::new(1, 4, 1), LayerSpec::new(1, 2, 1, 1), Some(8)),
        ];
        for (input, spec, expected) in cases {
            let arch = Architecture::one_layer(input, spec);
            let ws = sample_rational_weights(&arch, 1).unwrap();
            let arrangement = build_layer_arrangement(input, &spec, &ws.layers[0]).unwrap();
            let counted = count_regions(&arrangement).unwrap();
            assert_eq!(counted, exact_region_count(input, &spec).unwrap());
            if let Some(e) = expected {
                assert_eq!(counted, CountValue::from(e));
            }
        }
    }

    #[test]
    fn translations_preserve_the_count() {
        let input = Dims::new(1, 3, 1);
        let spec = LayerSpec::new(1, 2, 1, 2);
        let arch = Architecture::one_layer(input, spec);
        let ws = sample_rational_weights(&arch, 9).unwrap();
        let arrangement = build_layer_arrangement(input, &spec, &ws.layers[0]).unwrap();
        let before = count_regions(&arrangement).unwrap();
        // Substituting x → x + t shifts every offset by normal·t and maps
        // regions bijectively.
        let t = [BigRational::new(1.into(), 2.into()), q(-2), q(3)];
        let shifted: Vec<Hyperplane> = arrangement
            .hyperplanes()
            .iter()
            .map(|p| {
                let shift: BigRational =
                    p.normal.iter().zip(&t).map(|(n, ti)| n * ti).sum();
                Hyperplane { normal: p.normal.clone(), offset: &p.offset + shift }
            })
            .collect();
        let shifted = Arrangement::new(3, shifted).unwrap();
        assert_eq!(count_regions(&shifted).unwrap(), before);
    }
}
