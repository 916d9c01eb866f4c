use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::design::{
    BlockPartition, ConfigLabel, DesignBundle, DesignConfig, OperatorKind, OperatorSample, StateKind, StateSample,
};
use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, C64};

pub const FORMAT_TAG: &str = "bodf";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Deserialize)]
struct Header {
    format: String,
    version: u32,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BundleDoc {
    format: String,
    version: u32,
    config: ConfigDoc,
    partition: Vec<Vec<usize>>,
    seed: u64,
    preset_label: String,
    operators: Vec<OperatorDoc>,
    states: Vec<StateDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigDoc {
    d: usize,
    n_e: usize,
    n_rho: usize,
    ambient_dim: usize,
    label: ConfigLabel,
}

/// Rows of `[re, im]` pairs.
type MatrixDoc = Vec<Vec<[f64; 2]>>;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OperatorDoc {
    kind: OperatorKind,
    matrix: MatrixDoc,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateDoc {
    kind: StateKind,
    matrix: MatrixDoc,
}

fn matrix_doc(m: &DenseMatrix) -> MatrixDoc {
    (0..m.rows())
        .map(|r| m.row(r).iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

fn matrix_from_doc(doc: &MatrixDoc, field: &str) -> Result<DenseMatrix> {
    let rows = doc.len();
    let cols = doc.first().map_or(0, Vec::len);
    if let Some(r) = doc.iter().position(|row| row.len() != cols) {
        return Err(Error::invalid(format!("{field}: row {r} has a different length")));
    }
    let data = doc.iter().flatten().map(|&[re, im]| C64::new(re, im)).collect();
    DenseMatrix::new(rows, cols, data).map_err(|e| Error::invalid(format!("{field}: {e}")))
}

pub fn bundle_to_string(bundle: &DesignBundle) -> String {
    let doc = BundleDoc {
        format: FORMAT_TAG.into(),
        version: FORMAT_VERSION,
        config: ConfigDoc {
            d: bundle.config.d,
            n_e: bundle.config.n_e,
            n_rho: bundle.config.n_rho,
            ambient_dim: bundle.config.ambient_dim(),
            label: bundle.config.label,
        },
        partition: bundle.partition.blocks().to_vec(),
        seed: bundle.seed,
        preset_label: bundle.preset_label.clone(),
        operators: bundle
            .operators
            .iter()
            .map(|o| OperatorDoc {
                kind: o.kind,
                matrix: matrix_doc(&o.matrix),
            })
            .collect(),
        states: bundle
            .states
            .iter()
            .map(|s| StateDoc {
                kind: s.kind,
                matrix: matrix_doc(&s.matrix),
            })
            .collect(),
    };
    let mut out = serde_json::to_string(&doc).expect("bundle serializes");
    out.push('\n');
    out
}

/// Parse and fully re-validate a bundle document.
pub fn bundle_from_str(text: &str) -> Result<DesignBundle> {
    let header: Header = serde_json::from_str(text).map_err(|e| Error::invalid(format!("bundle document: {e}")))?;
    if header.format != FORMAT_TAG {
        return Err(Error::invalid(format!(
            "format: expected {FORMAT_TAG:?}, got {:?}",
            header.format
        )));
    }
    if header.version != FORMAT_VERSION {
        return Err(Error::invalid(format!(
            "version: unsupported version {} (expected {FORMAT_VERSION})",
            header.version
        )));
    }
    let doc: BundleDoc = serde_json::from_str(text).map_err(|e| Error::invalid(format!("bundle document: {e}")))?;
    let config = DesignConfig {
        d: doc.config.d,
        n_e: doc.config.n_e,
        n_rho: doc.config.n_rho,
        label: doc.config.label,
    };
    config.validate().map_err(|e| Error::invalid(format!("config: {e}")))?;
    if doc.config.ambient_dim != config.ambient_dim() {
        return Err(Error::invalid(format!(
            "config.ambient_dim: {} is not d^4 = {}",
            doc.config.ambient_dim,
            config.ambient_dim()
        )));
    }
    let partition =
        BlockPartition::new(doc.partition, config.d).map_err(|e| Error::invalid(format!("partition: {e}")))?;
    let operators = doc
        .operators
        .iter()
        .enumerate()
        .map(|(i, o)| {
            Ok(OperatorSample {
                matrix: matrix_from_doc(&o.matrix, &format!("operators[{i}].matrix"))?,
                kind: o.kind,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let states = doc
        .states
        .iter()
        .enumerate()
        .map(|(j, s)| {
            Ok(StateSample {
                matrix: matrix_from_doc(&s.matrix, &format!("states[{j}].matrix"))?,
                kind: s.kind,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let bundle = DesignBundle {
        config,
        operators,
        states,
        partition,
        seed: doc.seed,
        preset_label: doc.preset_label,
    };
    bundle.validate()?;
    Ok(bundle)
}

pub fn save_bundle(bundle: &DesignBundle, path: &Path) -> Result<()> {
    bundle.validate()?;
    super::write_atomic(path, bundle_to_string(bundle).as_bytes())
}

pub fn load_bundle(path: &Path) -> Result<DesignBundle> {
    bundle_from_str(&super::read_text(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{sample_block_perturbed, sample_generic, BlockPartition};

    #[test]
    fn exact_round_trip() {
        let b = sample_generic(DesignConfig::config_a(), 1).unwrap();
        assert_eq!(bundle_from_str(&bundle_to_string(&b)).unwrap(), b);
        let p = sample_block_perturbed(DesignConfig::config_b(), &BlockPartition::default_for(4), 1e-6, 4).unwrap();
        assert_eq!(bundle_from_str(&bundle_to_string(&p)).unwrap(), p);
    }

    #[test]
    fn rejects_version_and_tag() {
        let b = sample_generic(DesignConfig::custom(2, 1, 1).unwrap(), 1).unwrap();
        let text = bundle_to_string(&b);
        let v2 = text.replace("\"version\":1", "\"version\":2");
        assert!(bundle_from_str(&v2).unwrap_err().to_string().contains("version"));
        let tag = text.replace("\"bodf\"", "\"npz\"");
        assert!(bundle_from_str(&tag).unwrap_err().to_string().contains("format"));
    }

    #[test]
    fn rejects_bad_trace_with_field_path() {
        let mut b = sample_generic(DesignConfig::custom(2, 1, 2).unwrap(), 1).unwrap();
        b.states[1].matrix = b.states[1].matrix.scale(C64::new(0.9, 0.0));
        let err = bundle_from_str(&bundle_to_string(&b)).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("states[1]") && msg.contains("trace"), "{msg}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn rejects_truncated() {
        let b = sample_generic(DesignConfig::custom(2, 1, 1).unwrap(), 1).unwrap();
        let text = bundle_to_string(&b);
        let err = bundle_from_str(&text[..text.len() / 2]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
