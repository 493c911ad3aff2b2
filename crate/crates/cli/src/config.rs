//! Architecture configuration: JSON files and inline shape flags.
//!
//! The on-disk format is a single JSON object:
//!
//! ```json
//! {
//!   "input": { "h": 1, "w": 4, "d": 1 },
//!   "layers": [
//!     { "fh": 1, "fw": 2, "stride": 1, "depth": 2 },
//!     { "fh": 1, "fw": 2, "stride": 1, "depth": 3 }
//!   ]
//! }
//! ```
//!
//! Unknown keys are rejected so that a typo (`"strides"`, `"depht"`) fails
//! loudly instead of silently falling back to a default. The same shapes can
//! be given inline as `--input H,W,D` plus one `--layer FH,FW,STRIDE,DEPTH`
//! per layer.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use conv_regions::{Architecture, Dims, LayerSpec};

use crate::CliError;

/// Input grid dimensions as they appear in config files.
#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct InputConfig {
    pub h: usize,
    pub w: usize,
    pub d: usize,
}

/// One convolutional layer as it appears in config files.
#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct LayerConfig {
    pub fh: usize,
    pub fw: usize,
    pub stride: usize,
    pub depth: usize,
}

/// A full architecture file: input dimensions plus the hidden layer stack.
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct ArchConfig {
    pub input: InputConfig,
    pub layers: Vec<LayerConfig>,
}

impl ArchConfig {
    /// Converts the parsed file into the core architecture type. Shape
    /// validation happens later, in whichever computation consumes it.
    pub fn to_architecture(&self) -> Architecture {
        Architecture::new(
            Dims::new(self.input.h, self.input.w, self.input.d),
            self.layers
                .iter()
                .map(|l| LayerSpec::new(l.fh, l.fw, l.stride, l.depth))
                .collect(),
        )
    }

    /// Re-encodes an architecture for echoing into reports.
    pub fn from_architecture(arch: &Architecture) -> Self {
        ArchConfig {
            input: InputConfig {
                h: arch.input.height,
                w: arch.input.width,
                d: arch.input.depth,
            },
            layers: arch
                .layers
                .iter()
                .map(|l| LayerConfig {
                    fh: l.filter_height,
                    fw: l.filter_width,
                    stride: l.stride,
                    depth: l.depth,
                })
                .collect(),
        }
    }
}

/// Reads and parses an architecture config file.
pub fn load_architecture(path: &Path) -> Result<Architecture, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    let config: ArchConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    Ok(config.to_architecture())
}

/// Parses a fixed-arity comma-separated field list like `1,4,1`.
fn parse_fields(value: &str, arity: usize, what: &str, shape: &str) -> Result<Vec<usize>, CliError> {
    let fields: Vec<&str> = value.split(',').map(str::trim).collect();
    if fields.len() != arity {
        return Err(CliError::Parse(format!(
            "{what} `{value}` must have the form {shape}"
        )));
    }
    fields
        .iter()
        .map(|f| {
            f.parse::<usize>().map_err(|_| {
                CliError::Parse(format!("{what} `{value}`: `{f}` is not a non-negative integer"))
            })
        })
        .collect()
}

/// Builds an architecture from `--input H,W,D` and repeated
/// `--layer FH,FW,STRIDE,DEPTH` flags.
pub fn parse_inline(input: &str, layers: &[String]) -> Result<Architecture, CliError> {
    let dims = parse_fields(input, 3, "--input", "H,W,D")?;
    let mut specs = Vec::with_capacity(layers.len());
    for layer in layers {
        let fields = parse_fields(layer, 4, "--layer", "FH,FW,STRIDE,DEPTH")?;
        specs.push(LayerSpec::new(fields[0], fields[1], fields[2], fields[3]));
    }
    Ok(Architecture::new(Dims::new(dims[0], dims[1], dims[2]), specs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_two_layer_config() {
        let text = r#"{
            "input": { "h": 1, "w": 4, "d": 1 },
            "layers": [
                { "fh": 1, "fw": 2, "stride": 1, "depth": 2 },
                { "fh": 1, "fw": 2, "stride": 1, "depth": 3 }
            ]
        }"#;
        let config: ArchConfig = serde_json::from_str(text).unwrap();
        let arch = config.to_architecture();
        assert_eq!(arch.input, Dims::new(1, 4, 1));
        assert_eq!(arch.layers.len(), 2);
        assert_eq!(arch.layers[1], LayerSpec::new(1, 2, 1, 3));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = r#"{
            "input": { "h": 1, "w": 3, "d": 1 },
            "layers": [ { "fh": 1, "fw": 2, "strides": 1, "depth": 2 } ]
        }"#;
        let err = serde_json::from_str::<ArchConfig>(text).unwrap_err();
        assert!(err.to_string().contains("strides"));
        let text = r#"{
            "input": { "h": 1, "w": 3, "d": 1, "batch": 8 },
            "layers": [ { "fh": 1, "fw": 2, "stride": 1, "depth": 2 } ]
        }"#;
        assert!(serde_json::from_str::<ArchConfig>(text).is_err());
    }

    #[test]
    fn missing_keys_are_rejected() {
        let text = r#"{
            "input": { "h": 1, "w": 3, "d": 1 },
            "layers": [ { "fh": 1, "fw": 2, "stride": 1 } ]
        }"#;
        assert!(serde_json::from_str::<ArchConfig>(text).is_err());
    }

    #[test]
    fn round_trips_through_the_echo_form() {
        let arch = Architecture::new(
            Dims::new(2, 3, 2),
            vec![LayerSpec::new(2, 2, 1, 4), LayerSpec::new(1, 1, 2, 3)],
        );
        let echoed = ArchConfig::from_architecture(&arch).to_architecture();
        assert_eq!(echoed, arch);
    }

    #[test]
    fn inline_flags_build_the_same_architecture() {
        let arch = parse_inline("1,4,1", &["1,2,1,2".into(), "1,2,1,3".into()]).unwrap();
        assert_eq!(arch.input, Dims::new(1, 4, 1));
        assert_eq!(arch.layers[0], LayerSpec::new(1, 2, 1, 2));
        assert_eq!(arch.layers[1], LayerSpec::new(1, 2, 1, 3));
        assert!(parse_inline("1,4", &[]).is_err());
        assert!(parse_inline("1,4,x", &[]).is_err());
        assert!(parse_inline("1,4,1", &["1,2,1".into()]).is_err());
    }
}
