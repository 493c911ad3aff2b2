//! Receptive-field families and their coverage feasibility set.
//!
//! A convolutional layer assigns to each output-grid position `(i, j)` the
//! set `S_{i,j}` of input neurons its filter window reads. The region count
//! of the layer is a sum over the *feasible set* of that family: all tuples
//! `t = (t_{i,j})` of nonnegative integers with
//!
//! ```text
//! Σ_{(i,j) ∈ J} t_{i,j}  ≤  |∪_{(i,j) ∈ J} S_{i,j}|   for every subset J.
//! ```
//!
//! The right-hand side is the *coverage rank* of `J` — a monotone submodular
//! set function. By Hall's transversal criterion, a tuple is feasible exactly
//! when one can pick `t_{i,j}` pairwise-distinct input neurons out of each
//! window, so [`ReceptiveFieldMap::is_feasible`] runs a bipartite matching
//! (polynomial) instead of testing all `2^|I|` subset inequalities; the
//! exhaustive check survives in the test suites as an oracle.
//!
//! The feasible set is down-closed (shrinking any coordinate preserves
//! feasibility), which lets [`ReceptiveFieldMap::feasible_tuples`] enumerate
//! it by depth-first extension with matching-based pruning.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::arch::{layer_output_dims, ArchError, Dims, LayerSpec};

/// Output-grid position `(i, j)`, 1-based.
pub type Position = (usize, usize);

/// Input-neuron index `(a, b, c)` = (row, column, channel), 1-based.
pub type InputIndex = (usize, usize, usize);

/// A tuple `t` of nonnegative integers, one per output-grid position, in the
/// same (row-major) order as [`ReceptiveFieldMap::positions`]. The derived
/// `Ord` is lexicographic in that order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex {
    values: Vec<usize>,
}

impl MultiIndex {
    pub fn new(values: Vec<usize>) -> Self {
        MultiIndex { values }
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Sum of all coordinates.
    pub fn total(&self) -> usize {
        self.values.iter().sum()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, v) in self.values.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// Errors raised by coverage queries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CoverageError {
    /// A queried position is not part of the output grid.
    UnknownPosition(Position),
    /// A tuple's length does not match the number of grid positions.
    DimensionMismatch { expected: usize, got: usize },
    /// A receptive-field set was empty (constructing from explicit sets).
    EmptySet { position: Position },
}

impl fmt::Display for CoverageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoverageError::UnknownPosition((i, j)) => {
                write!(f, "position ({i},{j}) is not in the output grid")
            }
            CoverageError::DimensionMismatch { expected, got } => {
                write!(f, "tuple has {got} coordinates, expected {expected}")
            }
            CoverageError::EmptySet { position: (i, j) } => {
                write!(f, "receptive field at ({i},{j}) is empty")
            }
        }
    }
}

impl core::error::Error for CoverageError {}

/// The family `{S_{i,j}}` of receptive-field sets of one convolutional
/// layer, with positions in row-major order. Immutable after construction.
#[derive(Clone, Debug)]
pub struct ReceptiveFieldMap {
    positions: Vec<Position>,
    /// Per-position sorted sets of input indices, aligned with `positions`.
    sets: Vec<Vec<InputIndex>>,
    /// Sorted union of all sets.
    universe: Vec<InputIndex>,
    /// Per-position adjacency as indices into `universe`.
    adjacency: Vec<Vec<usize>>,
}

impl ReceptiveFieldMap {
    /// Builds the family for one layer on the given input grid:
    /// `S_{i,j} = {(a + (i−1)s, b + (j−1)s, c)}` over the filter extent
    /// `1 ≤ a ≤ f⁽¹⁾`, `1 ≤ b ≤ f⁽²⁾` and all input channels `1 ≤ c ≤ d₀`.
    ///
    /// Input neurons never touched by any window are simply absent from the
    /// universe; sparse strides are legal and affect the asymptotic degree.
    pub fn for_layer(input: Dims, layer: &LayerSpec) -> Result<Self, ArchError> {
        let out = layer_output_dims(input, layer)?;
        let mut positions = Vec::with_capacity(out.height * out.width);
        let mut sets = Vec::with_capacity(out.height * out.width);
        for i in 1..=out.height {
            for j in 1..=out.width {
                let mut set =
                    Vec::with_capacity(layer.filter_height * layer.filter_width * input.depth);
                for a in 1..=layer.filter_height {
                    for b in 1..=layer.filter_width {
                        for c in 1..=input.depth {
                            set.push((a + (i - 1) * layer.stride, b + (j - 1) * layer.stride, c));
                        }
                    }
                }
                set.sort_unstable();
                positions.push((i, j));
                sets.push(set);
            }
        }
        Ok(Self::from_parts(positions, sets))
    }

    /// Builds a family from explicit sets (duplicates within a set are
    /// dropped). Every set must be nonempty.
    pub fn from_sets(
        positions: Vec<Position>,
        sets: Vec<Vec<InputIndex>>,
    ) -> Result<Self, CoverageError> {
        if positions.len() != sets.len() {
            return Err(CoverageError::DimensionMismatch {
                expected: positions.len(),
                got: sets.len(),
            });
        }
        let mut cleaned = Vec::with_capacity(sets.len());
        for (pos, set) in positions.iter().zip(sets) {
            let dedup: BTreeSet<InputIndex> = set.into_iter().collect();
            if dedup.is_empty() {
                return Err(CoverageError::EmptySet { position: *pos });
            }
            cleaned.push(dedup.into_iter().collect::<Vec<_>>());
        }
        Ok(Self::from_parts(positions, cleaned))
    }

    fn from_parts(positions: Vec<Position>, sets: Vec<Vec<InputIndex>>) -> Self {
        let universe: Vec<InputIndex> = sets
            .iter()
            .flat_map(|s| s.iter().copied())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let adjacency = sets
            .iter()
            .map(|s| {
                s.iter()
                    .map(|e| universe.binary_search(e).expect("element outside universe"))
                    .collect()
            })
            .collect();
        ReceptiveFieldMap { positions, sets, universe, adjacency }
    }

    /// Output-grid positions in row-major order.
    pub fn positions(&self) -> &[Position] {
        &self.positions
    }

    /// The receptive-field set of the position at `index` (sorted).
    pub fn set_at(&self, index: usize) -> &[InputIndex] {
        &self.sets[index]
    }

    /// The receptive-field set of a position, if it exists.
    pub fn set_of(&self, position: Position) -> Option<&[InputIndex]> {
        self.index_of(position).map(|k| self.sets[k].as_slice())
    }

    /// Sorted union of all receptive-field sets.
    pub fn universe(&self) -> &[InputIndex] {
        &self.universe
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    fn index_of(&self, position: Position) -> Option<usize> {
        // Positions are few; a linear scan beats a map for every real grid.
        self.positions.iter().position(|p| *p == position)
    }

    /// Coverage rank of a subset of positions: `|∪_{(i,j) ∈ J} S_{i,j}|`
    /// (duplicates in `subset` are harmless; the empty subset has rank 0).
    pub fn coverage_rank(&self, subset: &[Position]) -> Result<usize, CoverageError> {
        let mut union = BTreeSet::new();
        for pos in subset {
            let k = self
                .index_of(*pos)
                .ok_or(CoverageError::UnknownPosition(*pos))?;
            union.extend(self.sets[k].iter().copied());
        }
        Ok(union.len())
    }

    /// Whether `t` is feasible: every subset inequality
    /// `Σ_J t ≤ |∪_J S|` holds. Decided by routing `t_{i,j}` units from each
    /// position to pairwise-distinct universe elements of its set (unit
    /// augmenting paths); this is equivalent to the exhaustive subset check
    /// by the transversal criterion.
    pub fn is_feasible(&self, t: &MultiIndex) -> Result<bool, CoverageError> {
        if t.len() != self.positions.len() {
            return Err(CoverageError::DimensionMismatch {
                expected: self.positions.len(),
                got: t.len(),
            });
        }
        Ok(self.is_feasible_slice(t.values()))
    }

    fn is_feasible_slice(&self, t: &[usize]) -> bool {
        if t.iter().zip(&self.sets).any(|(v, s)| *v > s.len()) {
            return false;
        }
        if t.iter().sum::<usize>() > self.universe.len() {
            return false;
        }
        let mut m = Matching::new(self.universe.len());
        for (p, &demand) in t.iter().enumerate() {
            for _ in 0..demand {
                if !m.augment(p, &self.adjacency) {
                    return false;
                }
            }
        }
        true
    }

    /// Visits every feasible tuple with `t_p ≤ caps[p]`, in lexicographic
    /// order over the row-major position order. `caps` must have one entry
    /// per position (entries above `|S_p|` are harmless).
    ///
    /// The walk extends tuples one position at a time, carrying the matching
    /// of already-placed units; a failed augmentation prunes the whole
    /// branch, which is sound because the feasible set is down-closed.
    pub fn for_each_feasible<F: FnMut(&[usize])>(&self, caps: &[usize], mut visit: F) {
        assert_eq!(caps.len(), self.positions.len(), "one cap per position");
        let mut t = vec![0usize; self.positions.len()];
        let mut m = Matching::new(self.universe.len());
        self.dfs(0, caps, &mut t, &mut m, &mut visit);
    }

    fn dfs<F: FnMut(&[usize])>(
        &self,
        p: usize,
        caps: &[usize],
        t: &mut Vec<usize>,
        m: &mut Matching,
        visit: &mut F,
    ) {
        if p == self.positions.len() {
            visit(t);
            return;
        }
        let entry = m.owner.clone();
        t[p] = 0;
        self.dfs(p + 1, caps, t, m, visit);
        m.owner.clone_from(&entry);
        let cap = caps[p].min(self.sets[p].len());
        for v in 1..=cap {
            // One more unit for position p on top of the carried matching;
            // failure here rules out every t[p] ≥ v.
            if !m.augment(p, &self.adjacency) {
                break;
            }
            t[p] = v;
            let snapshot = m.owner.clone();
            self.dfs(p + 1, caps, t, m, visit);
            m.owner.clone_from(&snapshot);
        }
        m.owner.clone_from(&entry);
        t[p] = 0;
    }

    /// The feasible set, optionally intersected with `t_{i,j} ≤ cap` on
    /// every coordinate, as a lexicographically ordered list.
    pub fn feasible_tuples(&self, per_coordinate_cap: Option<usize>) -> Vec<MultiIndex> {
        let caps: Vec<usize> = self
            .sets
            .iter()
            .map(|s| per_coordinate_cap.map_or(s.len(), |c| c.min(s.len())))
            .collect();
        let mut out = Vec::new();
        self.for_each_feasible(&caps, |t| out.push(MultiIndex::new(t.to_vec())));
        out
    }

    /// A feasible tuple whose total equals the coverage rank of the whole
    /// grid, built greedily: in row-major order each position takes the
    /// number of universe elements its set adds over its predecessors.
    pub fn max_total(&self) -> MultiIndex {
        let mut covered: BTreeSet<InputIndex> = BTreeSet::new();
        let mut values = Vec::with_capacity(self.sets.len());
        for set in &self.sets {
            let fresh = set.iter().filter(|e| !covered.contains(e)).count();
            covered.extend(set.iter().copied());
            values.push(fresh);
        }
        MultiIndex::new(values)
    }
}

/// Unit-capacity bipartite matching state: `owner[e]` is the position
/// currently holding universe element `e`.
struct Matching {
    owner: Vec<Option<usize>>,
    visited: Vec<bool>,
}

impl Matching {
    fn new(elements: usize) -> Self {
        Matching { owner: vec![None; elements], visited: vec![false; elements] }
    }

    /// Tries to route one more unit from position `p` along an augmenting
    /// path (Kuhn's algorithm with position demands as repeated sources).
    fn augment(&mut self, p: usize, adjacency: &[Vec<usize>]) -> bool {
        self.visited.iter_mut().for_each(|v| *v = false);
        self.try_place(p, adjacency)
    }

    fn try_place(&mut self, p: usize, adjacency: &[Vec<usize>]) -> bool {
        for &e in &adjacency[p] {
            if self.visited[e] {
                continue;
            }
            self.visited[e] = true;
            match self.owner[e] {
                None => {
                    self.owner[e] = Some(p);
                    return true;
                }
                Some(q) => {
                    if self.try_place(q, adjacency) {
                        self.owner[e] = Some(p);
                        return true;
                    }
                }
            }
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn example_map() -> ReceptiveFieldMap {
        // 1×3×1 input, 1×2 filter, stride 1: two overlapping windows.
        ReceptiveFieldMap::for_layer(Dims::new(1, 3, 1), &LayerSpec::new(1, 2, 1, 1)).unwrap()
    }

    fn tuples(values: &[&[usize]]) -> Vec<MultiIndex> {
        values.iter().map(|v| MultiIndex::new(v.to_vec())).collect()
    }

    #[test]
    fn window_sets_slide_with_stride() {
        let rf = example_map();
        assert_eq!(rf.positions(), &[(1, 1), (1, 2)]);
        assert_eq!(rf.set_at(0), &[(1, 1, 1), (1, 2, 1)]);
        assert_eq!(rf.set_at(1), &[(1, 2, 1), (1, 3, 1)]);
        assert_eq!(rf.universe(), &[(1, 1, 1), (1, 2, 1), (1, 3, 1)]);
    }

    #[test]
    fn full_filter_covers_everything() {
        let rf =
            ReceptiveFieldMap::for_layer(Dims::new(2, 2, 3), &LayerSpec::new(2, 2, 1, 1)).unwrap();
        assert_eq!(rf.positions(), &[(1, 1)]);
        assert_eq!(rf.set_at(0).len(), 12);
        assert_eq!(rf.universe().len(), 12);
    }

    #[test]
    fn sparse_stride_leaves_uncovered_columns() {
        let rf =
            ReceptiveFieldMap::for_layer(Dims::new(1, 5, 1), &LayerSpec::new(1, 2, 3, 1)).unwrap();
        assert_eq!(rf.positions(), &[(1, 1), (1, 2)]);
        // Column 3 is never read by any window.
        assert_eq!(rf.universe(), &[(1, 1, 1), (1, 2, 1), (1, 4, 1), (1, 5, 1)]);
    }

    #[test]
    fn every_window_has_filter_volume_elements() {
        let rf =
            ReceptiveFieldMap::for_layer(Dims::new(4, 5, 2), &LayerSpec::new(2, 3, 1, 6)).unwrap();
        for k in 0..rf.len() {
            assert_eq!(rf.set_at(k).len(), 2 * 3 * 2);
        }
    }

    #[test]
    fn coverage_rank_counts_unions() {
        let rf = example_map();
        assert_eq!(rf.coverage_rank(&[]).unwrap(), 0);
        assert_eq!(rf.coverage_rank(&[(1, 1)]).unwrap(), 2);
        assert_eq!(rf.coverage_rank(&[(1, 2)]).unwrap(), 2);
        assert_eq!(rf.coverage_rank(&[(1, 1), (1, 2)]).unwrap(), 3);
        // Duplicates do not change the union.
        assert_eq!(rf.coverage_rank(&[(1, 1), (1, 1)]).unwrap(), 2);
        assert_eq!(
            rf.coverage_rank(&[(7, 7)]).unwrap_err(),
            CoverageError::UnknownPosition((7, 7))
        );
    }

    #[test]
    fn feasibility_matches_known_tuples() {
        let rf = example_map();
        assert!(rf.is_feasible(&MultiIndex::new(vec![0, 0])).unwrap());
        assert!(rf.is_feasible(&MultiIndex::new(vec![1, 2])).unwrap());
        assert!(rf.is_feasible(&MultiIndex::new(vec![2, 1])).unwrap());
        // (2,2) would need four distinct inputs out of a three-element union.
        assert!(!rf.is_feasible(&MultiIndex::new(vec![2, 2])).unwrap());
        assert!(!rf.is_feasible(&MultiIndex::new(vec![3, 0])).unwrap());
        assert_eq!(
            rf.is_feasible(&MultiIndex::new(vec![1])).unwrap_err(),
            CoverageError::DimensionMismatch { expected: 2, got: 1 }
        );
    }

    #[test]
    fn enumeration_matches_hand_listing() {
        let rf = example_map();
        assert_eq!(
            rf.feasible_tuples(None),
            tuples(&[&[0, 0], &[0, 1], &[0, 2], &[1, 0], &[1, 1], &[1, 2], &[2, 0], &[2, 1]])
        );
    }

    #[test]
    fn single_window_enumerates_an_interval() {
        let rf =
            ReceptiveFieldMap::for_layer(Dims::new(1, 4, 1), &LayerSpec::new(1, 4, 1, 9)).unwrap();
        assert_eq!(rf.feasible_tuples(None), tuples(&[&[0], &[1], &[2], &[3], &[4]]));
        assert_eq!(rf.feasible_tuples(Some(2)), tuples(&[&[0], &[1], &[2]]));
    }

    #[test]
    fn pointwise_filters_enumerate_the_full_box() {
        // 1×1×d₀ filters: disjoint windows of size d₀ = 2 on a 1×2 grid.
        let rf =
            ReceptiveFieldMap::for_layer(Dims::new(1, 2, 2), &LayerSpec::new(1, 1, 1, 5)).unwrap();
        let expected: Vec<MultiIndex> = (0..=2)
            .flat_map(|a| (0..=2).map(move |b| MultiIndex::new(vec![a, b])))
            .collect();
        assert_eq!(rf.feasible_tuples(None), expected);
    }

    #[test]
    fn enumeration_is_down_closed() {
        let rf =
            ReceptiveFieldMap::for_layer(Dims::new(2, 3, 1), &LayerSpec::new(2, 2, 1, 3)).unwrap();
        let set: BTreeSet<MultiIndex> = rf.feasible_tuples(None).into_iter().collect();
        for t in &set {
            for k in 0..t.len() {
                if t.values()[k] > 0 {
                    let mut smaller = t.values().to_vec();
                    smaller[k] -= 1;
                    assert!(set.contains(&MultiIndex::new(smaller)));
                }
            }
        }
    }

    #[test]
    fn greedy_tuple_attains_the_total_rank() {
        let rf = example_map();
        let t = rf.max_total();
        assert_eq!(t, MultiIndex::new(vec![2, 1]));
        assert_eq!(t.total(), rf.coverage_rank(&[(1, 1), (1, 2)]).unwrap());
        assert!(rf.is_feasible(&t).unwrap());

        // Disjoint windows saturate every set.
        let rf =
            ReceptiveFieldMap::for_layer(Dims::new(2, 2, 1), &LayerSpec::new(1, 2, 1, 2)).unwrap();
        assert_eq!(rf.max_total(), MultiIndex::new(vec![2, 2]));

        // Single window takes its whole set.
        let rf =
            ReceptiveFieldMap::for_layer(Dims::new(1, 3, 1), &LayerSpec::new(1, 3, 1, 1)).unwrap();
        assert_eq!(rf.max_total(), MultiIndex::new(vec![3]));
    }

    #[test]
    fn explicit_sets_roundtrip() {
        let rf = ReceptiveFieldMap::from_sets(
            vec![(1, 1), (1, 2)],
            vec![vec![(1, 1, 1), (1, 1, 1), (1, 2, 1)], vec![(1, 3, 1)]],
        )
        .unwrap();
        assert_eq!(rf.set_at(0), &[(1, 1, 1), (1, 2, 1)]);
        assert_eq!(rf.universe().len(), 3);
        assert_eq!(
            ReceptiveFieldMap::from_sets(vec![(1, 1)], vec![vec![]]).unwrap_err(),
            CoverageError::EmptySet { position: (1, 1) }
        );
    }

    /// Exhaustive subset-inequality check, used as an oracle for the
    /// matching-based feasibility decision.
    fn brute_force_feasible(rf: &ReceptiveFieldMap, t: &[usize]) -> bool {
        let n = rf.len();
        for mask in 0u32..(1 << n) {
            let subset: Vec<Position> = (0..n)
                .filter(|k| mask & (1 << k) != 0)
                .map(|k| rf.positions()[k])
                .collect();
            let demand: usize =
                (0..n).filter(|k| mask & (1 << k) != 0).map(|k| t[k]).sum();
            if demand > rf.coverage_rank(&subset).unwrap() {
                return false;
            }
        }
        true
    }

    #[test]
    fn matching_agrees_with_exhaustive_subset_checks() {
        let geometries = [
            (Dims::new(1, 3, 1), LayerSpec::new(1, 2, 1, 1)),
            (Dims::new(1, 4, 1), LayerSpec::new(1, 2, 1, 1)),
            (Dims::new(2, 3, 1), LayerSpec::new(2, 2, 1, 1)),
            (Dims::new(1, 5, 1), LayerSpec::new(1, 2, 3, 1)),
            (Dims::new(3, 3, 2), LayerSpec::new(2, 2, 1, 1)),
        ];
        for (input, layer) in geometries {
            let rf = ReceptiveFieldMap::for_layer(input, &layer).unwrap();
            // Walk the whole cap box, not just the feasible set.
            let caps: Vec<usize> = (0..rf.len()).map(|k| rf.set_at(k).len()).collect();
            let mut t = vec![0usize; rf.len()];
            'box_walk: loop {
                assert_eq!(
                    rf.is_feasible_slice(&t),
                    brute_force_feasible(&rf, &t),
                    "disagreement at {t:?} for {input:?}"
                );
                // Odometer increment over the box.
                let mut k = 0;
                loop {
                    if k == t.len() {
                        break 'box_walk;
                    }
                    if t[k] < caps[k] {
                        t[k] += 1;
                        break;
                    }
                    t[k] = 0;
                    k += 1;
                }
            }
        }
    }
}
