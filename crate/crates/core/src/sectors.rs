//! Numerical nullspace and its split into block sectors.
//!
//! Sectors are coordinate masks in the fixed feature basis, derived from the
//! block partition alone. A feature index decodes into an operator entry
//! pair and a state entry pair; a pair is "within" when both indices lie in
//! the same block.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::design::BlockPartition;
use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, SingularSpectrum, C64};
use crate::par::{self, Parallelism};
use crate::rank::rank_at_tolerance;

pub const BLOCK_DIAGONAL: &str = "block-diagonal";
pub const BLOCK_OFF_DIAGONAL: &str = "block-off-diagonal";
pub const FOUR_SECTOR_NAMES: [&str; 4] = ["DD", "DO", "OD", "OO"];

/// Orthonormal basis of the numerical nullspace at one tolerance.
#[derive(Clone, Debug, PartialEq)]
pub struct NullspaceBasis {
    pub vectors: Vec<Vec<C64>>,
    pub tolerance: f64,
    pub source_label: String,
}

impl NullspaceBasis {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// The basis `{n_l} · U` for a square unitary `U` of matching size.
    pub fn rotated(&self, u: &DenseMatrix) -> Result<Self> {
        let m = self.dim();
        if u.shape() != (m, m) {
            return Err(Error::invalid(format!("rotation must be {m}x{m}, got {:?}", u.shape())));
        }
        let len = self.vectors.first().map_or(0, Vec::len);
        let vectors = (0..m)
            .map(|k| {
                let mut out = vec![C64::new(0.0, 0.0); len];
                for (l, v) in self.vectors.iter().enumerate() {
                    let w = u[(l, k)];
                    for (o, x) in out.iter_mut().zip(v) {
                        *o += x * w;
                    }
                }
                out
            })
            .collect();
        Ok(Self {
            vectors,
            tolerance: self.tolerance,
            source_label: self.source_label.clone(),
        })
    }
}

/// Right singular vectors with `sigma_k <= tau * sigma_max`, plus the
/// trailing basis completion of wide inputs. Always `cols - rank` vectors.
pub fn nullspace_basis(spectrum: &SingularSpectrum, tau: f64) -> Result<NullspaceBasis> {
    let rank = rank_at_tolerance(spectrum, tau)?;
    let vectors = (rank..spectrum.source_cols())
        .map(|k| spectrum.right_vector(k))
        .collect();
    Ok(NullspaceBasis {
        vectors,
        tolerance: tau,
        source_label: String::new(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SectorMode {
    TwoSector,
    FourSector,
}

impl FromStr for SectorMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two" | "two-sector" => Ok(SectorMode::TwoSector),
            "four" | "four-sector" => Ok(SectorMode::FourSector),
            _ => Err(Error::invalid(format!("unknown sector scheme {s:?}"))),
        }
    }
}

/// Entry pairs a feature coordinate multiplies: `E[e_entry] * rho[rho_entry]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FeatureCoord {
    pub e_entry: (usize, usize),
    pub rho_entry: (usize, usize),
}

/// Inverse of the feature layout: index `(b*d + e)*d^2 + (a*d + c)` holds
/// `E[a,b] * rho[e,c]`.
pub fn decode_feature_index(t: usize, d: usize) -> FeatureCoord {
    let d2 = d * d;
    let (row, col) = (t % d2, t / d2);
    let (a, c) = (row / d, row % d);
    let (b, e) = (col / d, col % d);
    FeatureCoord {
        e_entry: (a, b),
        rho_entry: (e, c),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sector {
    pub name: String,
    pub indices: Vec<usize>,
}

/// Coordinate partition of feature space into named sectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SectorScheme {
    pub mode: SectorMode,
    pub partition: BlockPartition,
    pub sectors: Vec<Sector>,
    feature_len: usize,
}

impl SectorScheme {
    pub fn feature_len(&self) -> usize {
        self.feature_len
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.sectors.iter().map(|s| s.name.as_str())
    }

    pub fn sector(&self, name: &str) -> Option<&Sector> {
        self.sectors.iter().find(|s| s.name == name)
    }
}

pub fn build_sector_scheme(partition: &BlockPartition, d: usize, mode: SectorMode) -> Result<SectorScheme> {
    if partition.dim() != d {
        return Err(Error::invalid(format!(
            "partition covers {} indices but d = {d}",
            partition.dim()
        )));
    }
    let names: Vec<&str> = match mode {
        SectorMode::TwoSector => vec![BLOCK_DIAGONAL, BLOCK_OFF_DIAGONAL],
        SectorMode::FourSector => FOUR_SECTOR_NAMES.to_vec(),
    };
    let mut sectors: Vec<Sector> = names
        .iter()
        .map(|n| Sector {
            name: (*n).to_string(),
            indices: Vec::new(),
        })
        .collect();
    let feature_len = d.pow(4);
    for t in 0..feature_len {
        let coord = decode_feature_index(t, d);
        let e_in = partition.same_block(coord.e_entry.0, coord.e_entry.1);
        let rho_in = partition.same_block(coord.rho_entry.0, coord.rho_entry.1);
        let slot = match mode {
            SectorMode::TwoSector => usize::from(!(e_in && rho_in)),
            SectorMode::FourSector => 2 * usize::from(!e_in) + usize::from(!rho_in),
        };
        sectors[slot].indices.push(t);
    }
    Ok(SectorScheme {
        mode,
        partition: partition.clone(),
        sectors,
        feature_len,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorWeight {
    pub sector: String,
    pub weight: f64,
}

/// Per-sector nullspace weights; `weights` is `None` ("undefined") when the
/// nullspace is empty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorWeights {
    pub weights: Option<Vec<SectorWeight>>,
    pub tolerance: f64,
    pub nullspace_dim: usize,
}

impl SectorWeights {
    pub fn get(&self, sector: &str) -> Option<f64> {
        self.weights
            .as_ref()?
            .iter()
            .find(|w| w.sector == sector)
            .map(|w| w.weight)
    }

    pub fn is_defined(&self) -> bool {
        self.weights.is_some()
    }
}

pub fn sector_weights(basis: &NullspaceBasis, scheme: &SectorScheme) -> Result<SectorWeights> {
    sector_weights_with(basis, scheme, Parallelism::default())
}

/// `w_s = sum_l |P_s n_l|^2 / sum_l |n_l|^2`.
pub fn sector_weights_with(basis: &NullspaceBasis, scheme: &SectorScheme, mode: Parallelism) -> Result<SectorWeights> {
    if let Some((l, v)) = basis
        .vectors
        .iter()
        .enumerate()
        .find(|(_, v)| v.len() != scheme.feature_len)
    {
        return Err(Error::invalid(format!(
            "nullspace vector {l} has length {}, sector scheme expects {}",
            v.len(),
            scheme.feature_len
        )));
    }
    if basis.is_empty() {
        return Ok(SectorWeights {
            weights: None,
            tolerance: basis.tolerance,
            nullspace_dim: 0,
        });
    }
    let per_vector: Vec<Vec<f64>> = par::map(mode, &basis.vectors, |v| {
        scheme
            .sectors
            .iter()
            .map(|s| s.indices.iter().map(|&t| v[t].norm_sqr()).sum())
            .collect()
    });
    let mut numer = vec![0.0; scheme.sectors.len()];
    for row in &per_vector {
        for (acc, x) in numer.iter_mut().zip(row) {
            *acc += x;
        }
    }
    // Masks partition the coordinates, so this is the total squared norm.
    let total: f64 = numer.iter().sum();
    let weights = scheme
        .sectors
        .iter()
        .zip(&numer)
        .map(|(s, &x)| SectorWeight {
            sector: s.name.clone(),
            weight: x / total,
        })
        .collect();
    Ok(SectorWeights {
        weights: Some(weights),
        tolerance: basis.tolerance,
        nullspace_dim: basis.dim(),
    })
}

/// Sector carrying the largest weight.
#[derive(Clone, Debug, PartialEq)]
pub struct DominantSector {
    pub sector: String,
    pub weight: f64,
    pub tie: bool,
}

impl fmt::Display for DominantSector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {:.12}", self.sector, self.weight)?;
        if self.tie {
            f.write_str(" (tie)")?;
        }
        Ok(())
    }
}

/// Weights within this distance of the maximum count as tied.
pub const TIE_TOL: f64 = 1e-12;

/// Argmax over sectors; ties go to the sector listed first in the scheme.
pub fn dominant_sector(weights: &SectorWeights) -> Result<DominantSector> {
    let ws = weights
        .weights
        .as_ref()
        .ok_or_else(|| Error::invalid("sector weights are undefined (empty nullspace)"))?;
    let best = ws.iter().map(|w| w.weight).fold(f64::NEG_INFINITY, f64::max);
    let mut near = ws.iter().filter(|w| best - w.weight <= TIE_TOL);
    let first = near.next().expect("at least one sector");
    Ok(DominantSector {
        sector: first.sector.clone(),
        weight: first.weight,
        tie: near.next().is_some(),
    })
}
