//! Exact linear-region counts for one-layer ReLU CNNs.
//!
//! For a one-layer network the number of linear regions (maximal over
//! weights, and simultaneously the expectation under any weight distribution
//! with a density) has the closed form
//!
//! ```text
//! R  =  Σ_{t feasible}  Π_{(i,j)}  C(d₁, t_{i,j})
//! ```
//!
//! where the sum runs over the coverage-feasible tuples of the layer's
//! receptive-field family (see [`crate::coverage`]) and `d₁` is the number
//! of filters. This module evaluates that sum exactly with big integers,
//! exposes it as a polynomial in `d₁` with exact rational coefficients, and
//! provides the classic fully-connected count `Σ_{i≤n₀} C(n₁, i)` for
//! comparison. No floating point is used anywhere.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::arch::{ArchError, Dims, LayerSpec};
use crate::coverage::ReceptiveFieldMap;

/// Arbitrary-precision nonnegative count (region counts and bounds routinely
/// exceed machine words). Every valid architecture has at least one region.
pub type CountValue = BigUint;

/// Binomial coefficient `C(n, k)` by the exact multiplicative formula;
/// zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> CountValue {
    if k > n {
        return CountValue::zero();
    }
    let k = k.min(n - k);
    let mut result = CountValue::one();
    for i in 1..=k {
        // Exact at every step: C(n-k+1..n-k+i) is divisible by i!.
        result = result * CountValue::from(n - k + i) / CountValue::from(i);
    }
    result
}

/// The receptive-field family of the layer's geometry. The filter count is
/// irrelevant to the family, so a zero depth is tolerated here — it simply
/// means "no hyperplanes" further down.
fn geometry_map(input: Dims, layer: &LayerSpec) -> Result<ReceptiveFieldMap, ArchError> {
    let geometry = LayerSpec { depth: layer.depth.max(1), ..*layer };
    ReceptiveFieldMap::for_layer(input, &geometry)
}

/// Exact number of linear regions of the one-layer network.
///
/// Tuples are enumerated with every coordinate capped at
/// `min(|S_{i,j}|, d₁)`; terms with `t > d₁` vanish anyway, and the cap
/// keeps the enumeration size independent of large filter counts. A depth
/// of 0 yields 1 (no hyperplanes cut the input space).
pub fn exact_region_count(input: Dims, layer: &LayerSpec) -> Result<CountValue, ArchError> {
    let rf = geometry_map(input, layer)?;
    let d1 = layer.depth;
    let max_t = rf
        .positions()
        .iter()
        .enumerate()
        .map(|(k, _)| rf.set_at(k).len())
        .max()
        .unwrap_or(0)
        .min(d1);
    let binomials: Vec<CountValue> = (0..=max_t).map(|t| binomial(d1, t)).collect();
    let caps = vec![d1; rf.len()];
    let mut sum = CountValue::zero();
    rf.for_each_feasible(&caps, |t| {
        let mut product = CountValue::one();
        for &v in t {
            product *= &binomials[v];
        }
        sum += product;
    });
    Ok(sum)
}

/// Average number of linear regions under weight distributions with a
/// density — which equals [`exact_region_count`] for one layer. Exposed as
/// a distinct operation so callers record which claim they invoke; it does
/// not simulate any distribution.
pub fn expected_region_count(input: Dims, layer: &LayerSpec) -> Result<CountValue, ArchError> {
    exact_region_count(input, layer)
}

/// The region count of a one-layer geometry as a polynomial in the filter
/// count `d₁`, with exact rational coefficients (index = power).
///
/// Its degree equals the number of input neurons covered by at least one
/// window, and evaluating at any integer `d₁ ≥ 0` gives back the exact
/// count.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountPolynomial {
    coefficients: Vec<BigRational>,
}

impl CountPolynomial {
    /// Coefficients from the constant term upward; the last entry is
    /// nonzero.
    pub fn coefficients(&self) -> &[BigRational] {
        &self.coefficients
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn leading_coefficient(&self) -> &BigRational {
        self.coefficients.last().expect("polynomial is never empty")
    }

    /// Exact evaluation at an integer point. The result of a count
    /// polynomial is always a nonnegative integer.
    pub fn evaluate(&self, d1: usize) -> CountValue {
        let x = BigRational::from_integer(d1.into());
        let mut acc = BigRational::zero();
        for c in self.coefficients.iter().rev() {
            acc = acc * &x + c;
        }
        debug_assert!(acc.is_integer() && !acc.is_negative());
        acc.to_integer()
            .to_biguint()
            .expect("count polynomial is nonnegative at integer points")
    }
}

impl fmt::Display for CountPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, c) in self.coefficients.iter().enumerate().rev() {
            if c.is_zero() && self.degree() > 0 {
                continue;
            }
            if k < self.degree() {
                write!(f, " + ")?;
            }
            match k {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}·d")?,
                _ => write!(f, "{c}·d^{k}")?,
            }
        }
        Ok(())
    }
}

fn poly_mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_add_assign(a: &mut Vec<BigRational>, b: &[BigRational]) {
    if b.len() > a.len() {
        a.resize(b.len(), BigRational::zero());
    }
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
}

/// `C(x, t)` as a polynomial in `x`: `x(x−1)…(x−t+1)/t!`, for `t = 0..=max`.
fn choose_polynomials(max: usize) -> Vec<Vec<BigRational>> {
    let mut polys = Vec::with_capacity(max + 1);
    polys.push(vec![BigRational::one()]);
    for t in 1..=max {
        // C(x,t) = C(x,t−1) · (x − (t−1)) / t
        let prev = polys.last().expect("nonempty by construction");
        let shift = BigRational::from_integer((t as i64 - 1).into());
        let mut next = poly_mul(prev, &[-shift, BigRational::one()]);
        let t_inv = BigRational::new(1.into(), (t as i64).into());
        for c in &mut next {
            *c *= &t_inv;
        }
        polys.push(next);
    }
    polys
}

/// The count of the one-layer geometry as a polynomial in the filter count:
/// the feasible-tuple sum with every `C(d₁, t)` kept symbolic. Enumeration
/// is uncapped (all coordinates up to `|S_{i,j}|`), so the result is valid
/// for every `d₁ ≥ 0`; the stored depth of `layer` is ignored.
pub fn region_polynomial(input: Dims, layer: &LayerSpec) -> Result<CountPolynomial, ArchError> {
    let rf = geometry_map(input, layer)?;
    let max_t = (0..rf.len()).map(|k| rf.set_at(k).len()).max().unwrap_or(0);
    let choose = choose_polynomials(max_t);
    let caps: Vec<usize> = (0..rf.len()).map(|k| rf.set_at(k).len()).collect();
    let mut sum = vec![BigRational::zero()];
    rf.for_each_feasible(&caps, |t| {
        let mut product = vec![BigRational::one()];
        for &v in t {
            product = poly_mul(&product, &choose[v]);
        }
        poly_add_assign(&mut sum, &product);
    });
    while sum.len() > 1 && sum.last().is_some_and(Zero::is_zero) {
        sum.pop();
    }
    Ok(CountPolynomial { coefficients: sum })
}

/// Degree of the count polynomial: the number of input neurons read by at
/// least one filter window. Equals the full input size exactly when the
/// windows cover every input neuron.
pub fn asymptotic_exponent(input: Dims, layer: &LayerSpec) -> Result<usize, ArchError> {
    Ok(geometry_map(input, layer)?.universe().len())
}

/// Maximal number of linear regions of a one-layer fully-connected ReLU
/// network with `n0` inputs and `n1` hidden units: `Σ_{i=0}^{n0} C(n1, i)`.
pub fn fc_region_count(n0: usize, n1: usize) -> CountValue {
    (0..=n0).map(|i| binomial(n1, i)).sum()
}
