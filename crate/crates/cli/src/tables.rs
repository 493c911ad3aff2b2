//! Built-in geometry fixtures and the reproducible tables they generate.
//!
//! Each table sweeps the depth of one layer from 1 to 8 over a fixed input
//! geometry and reports, per depth:
//!
//! * one-layer tables (`T1`, `S1`–`S5`) — the exact region count, the
//!   fully-connected count with the same neuron budget (what a dense layer
//!   in general position would achieve; weight sharing can only lose
//!   regions), and the naive `2^n` cap;
//! * the two-layer table (`T2`) — the multi-layer lower and upper bounds
//!   plus a seed-labeled Monte-Carlo row, the only non-exact row anywhere.
//!
//! Every exact and bound row is recomputed from the fixture geometry on each
//! run — nothing numeric is hardcoded here — so the output doubles as an
//! end-to-end self-check of the counting machinery.

use conv_regions::arch::layer_output_dims;
use conv_regions::bounds::arch_bounds;
use conv_regions::counting::{exact_region_count, fc_region_count, CountValue};
use conv_regions::{Architecture, Dims, LayerSpec};

use crate::report::{SweepRow, SweepTable};
use crate::sampler::{estimate_region_count, he_init, SamplingConfig};
use crate::CliError;

/// Identifiers accepted by the `table` command.
pub const TABLE_IDS: &[&str] = &["T1", "T2", "S1", "S2", "S3", "S4", "S5"];

/// Depth sweep shared by every table.
const SWEEP: std::ops::RangeInclusive<usize> = 1..=8;

enum Fixture {
    /// One convolutional layer whose depth is swept.
    OneLayer { input: Dims, filter: (usize, usize), stride: usize },
    /// A fixed first layer; the second layer's depth is swept.
    TwoLayer { input: Dims, first: LayerSpec, filter: (usize, usize), stride: usize },
}

fn fixture(id: &str) -> Option<(Fixture, &'static str)> {
    let one = |h, w, d, fh, fw, s| Fixture::OneLayer {
        input: Dims::new(h, w, d),
        filter: (fh, fw),
        stride: s,
    };
    Some(match id {
        "T1" => (one(1, 3, 1, 1, 2, 1), "1x3x1 input, 1x2 filters, stride 1"),
        "S1" => (one(2, 2, 1, 1, 2, 1), "2x2x1 input, 1x2 filters, stride 1"),
        "S2" => (one(1, 4, 1, 1, 2, 1), "1x4x1 input, 1x2 filters, stride 1"),
        "S3" => (one(2, 3, 1, 2, 2, 1), "2x3x1 input, 2x2 filters, stride 1"),
        "S4" => (one(6, 6, 1, 1, 3, 2), "6x6x1 input, 1x3 filters, stride 2"),
        "S5" => (one(3, 3, 2, 2, 2, 1), "3x3x2 input, 2x2x2 filters, stride 1"),
        "T2" => (
            Fixture::TwoLayer {
                input: Dims::new(1, 4, 1),
                first: LayerSpec::new(1, 2, 1, 2),
                filter: (1, 2),
                stride: 1,
            },
            "1x4x1 input, a fixed 2-filter 1x2 layer, then a swept 1x2 layer",
        ),
        _ => return None,
    })
}

/// Human-readable geometry of a table id, if it exists.
pub fn describe(id: &str) -> Option<&'static str> {
    fixture(id).map(|(_, description)| description)
}

fn unknown_table(id: &str) -> CliError {
    CliError::Validation(format!("unknown table `{id}`; available: {}", TABLE_IDS.join(", ")))
}

fn one_layer_rows(
    input: Dims,
    filter: (usize, usize),
    stride: usize,
) -> Result<Vec<SweepRow>, CliError> {
    let mut exact = Vec::new();
    let mut fc = Vec::new();
    let mut naive = Vec::new();
    for depth in SWEEP {
        let spec = LayerSpec::new(filter.0, filter.1, stride, depth);
        let hidden = layer_output_dims(input, &spec)?.total();
        exact.push(exact_region_count(input, &spec)?.to_string());
        fc.push(fc_region_count(input.total(), hidden).to_string());
        naive.push((CountValue::from(1u32) << hidden).to_string());
    }
    Ok(vec![
        SweepRow { label: "exact".into(), values: exact },
        SweepRow { label: "fc-upper".into(), values: fc },
        SweepRow { label: "naive".into(), values: naive },
    ])
}

fn two_layer_rows(
    input: Dims,
    first: LayerSpec,
    filter: (usize, usize),
    stride: usize,
    seed: u64,
    samples: usize,
) -> Result<Vec<SweepRow>, CliError> {
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    let mut sampled = Vec::new();
    let config = SamplingConfig { num_samples: samples, seed, ..SamplingConfig::default() };
    for depth in SWEEP {
        let arch = Architecture::new(
            input,
            vec![first, LayerSpec::new(filter.0, filter.1, stride, depth)],
        );
        let report = arch_bounds(&arch)?;
        lower.push(report.lower.value.to_string());
        upper.push(report.upper.value.to_string());
        let weights = he_init(&arch, seed)?;
        let estimate = estimate_region_count(&arch, &weights, &config)?;
        sampled.push(estimate.max_distinct.to_string());
    }
    Ok(vec![
        SweepRow { label: "lower".into(), values: lower },
        SweepRow { label: "upper".into(), values: upper },
        SweepRow { label: format!("sampled-seed-{seed}"), values: sampled },
    ])
}

/// Recomputes one built-in table. `seed` and `samples` only affect the
/// Monte-Carlo row of `T2`; exact and bound rows are fully determined by
/// the fixture.
pub fn reproduce_table(id: &str, seed: u64, samples: usize) -> Result<SweepTable, CliError> {
    let (fixture, _) = fixture(id).ok_or_else(|| unknown_table(id))?;
    let (sweep, rows) = match fixture {
        Fixture::OneLayer { input, filter, stride } => {
            ("d1", one_layer_rows(input, filter, stride)?)
        }
        Fixture::TwoLayer { input, first, filter, stride } => {
            ("d2", two_layer_rows(input, first, filter, stride, seed, samples)?)
        }
    };
    Ok(SweepTable {
        title: id.to_string(),
        sweep: sweep.to_string(),
        columns: SWEEP.collect(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_id_produces_a_full_sweep() {
        for id in TABLE_IDS {
            let table = reproduce_table(id, 0, 50).unwrap();
            assert_eq!(table.columns, (1..=8).collect::<Vec<_>>());
            assert_eq!(table.rows.len(), 3);
            for row in &table.rows {
                assert_eq!(row.values.len(), 8, "{id}/{}", row.label);
            }
            assert!(describe(id).is_some());
        }
    }

    #[test]
    fn unknown_ids_list_the_available_tables() {
        let err = reproduce_table("T9", 0, 50).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        assert!(err.to_string().contains("T1"));
    }

    #[test]
    fn strip_table_starts_with_the_known_counts() {
        let table = reproduce_table("T1", 0, 50).unwrap();
        assert_eq!(table.rows[0].label, "exact");
        assert_eq!(&table.rows[0].values[..3], ["4", "15", "40"]);
        assert_eq!(table.rows[1].label, "fc-upper");
        assert_eq!(&table.rows[1].values[..3], ["4", "15", "42"]);
        assert_eq!(table.rows[2].label, "naive");
        assert_eq!(&table.rows[2].values[..3], ["4", "16", "64"]);
    }

    #[test]
    fn square_table_counts_factor_over_independent_halves() {
        // The 2x2 input with 1x2 filters splits into two disjoint windows,
        // so every count is a perfect square of the width-2 strip count.
        let table = reproduce_table("S1", 0, 50).unwrap();
        assert_eq!(&table.rows[0].values[..4], ["4", "16", "49", "121"]);
    }

    #[test]
    fn two_layer_table_is_seed_stable_and_seed_labeled() {
        let a = reproduce_table("T2", 3, 60).unwrap();
        let b = reproduce_table("T2", 3, 60).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.sweep, "d2");
        assert_eq!(a.rows[2].label, "sampled-seed-3");
        assert_eq!(a.rows[0].label, "lower");
        assert_eq!(a.rows[1].label, "upper");
        assert_eq!(&a.rows[1].values[..2], ["220", "880"]);
    }
}
