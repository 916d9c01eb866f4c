//! Config runs, refinements versus modifications, and comparison reports.

use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::design::{
    assemble_design, modify_problem, BlockPartition, ConfigLabel, DesignBundle, DesignConfig, Modification, Preset,
};
use crate::error::{Error, Result};
use crate::matrix::{svd, DenseMatrix, C64};
use crate::par::{self, Parallelism};
use crate::rank::{detect_plateaus, realify, sweep_spectrum, Plateau, RankProfile, ToleranceGrid};
use crate::sectors::{build_sector_scheme, nullspace_basis, sector_weights, SectorMode, SectorWeights};

/// Tolerance at which the comparison report summarizes sector weights.
pub const SECTOR_SUMMARY_TOL: f64 = 1e-12;

/// Procedures that keep the operator and state families fixed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RefinementProcedure {
    ToleranceSweep,
    GlobalRescale { re: f64, im: f64 },
    RowPermutation { seed: u64 },
    RealificationCheck,
}

impl RefinementProcedure {
    pub fn rescale(c: C64) -> Self {
        RefinementProcedure::GlobalRescale { re: c.re, im: c.im }
    }

    /// Tolerance sweep, rescales by `1e-6`, `3`, `1e6` and a unit phase,
    /// one row permutation and the realification check.
    pub fn standard_set() -> Vec<Self> {
        vec![
            RefinementProcedure::ToleranceSweep,
            Self::rescale(C64::new(1e-6, 0.0)),
            Self::rescale(C64::new(3.0, 0.0)),
            Self::rescale(C64::new(1e6, 0.0)),
            Self::rescale(C64::from_polar(1.0, 0.7)),
            RefinementProcedure::RowPermutation { seed: 17 },
            RefinementProcedure::RealificationCheck,
        ]
    }
}

impl fmt::Display for RefinementProcedure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RefinementProcedure::ToleranceSweep => f.write_str("tolerance-sweep"),
            RefinementProcedure::GlobalRescale { re, im } if *im == 0.0 => write!(f, "global-rescale({re:e})"),
            RefinementProcedure::GlobalRescale { re, im } => write!(f, "global-rescale({re:e}{im:+e}i)"),
            RefinementProcedure::RowPermutation { seed } => write!(f, "row-permutation({seed})"),
            RefinementProcedure::RealificationCheck => f.write_str("realification-check"),
        }
    }
}

/// A change to the admissible families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModificationProcedure {
    pub kind: Modification,
    pub seed: u64,
}

impl ModificationProcedure {
    pub fn standard_set(seed: u64) -> Vec<Self> {
        vec![
            ModificationProcedure {
                kind: Modification::ReplaceGeneric,
                seed,
            },
            ModificationProcedure {
                kind: Modification::AugmentCrossBlock { extra: None },
                seed,
            },
        ]
    }
}

impl fmt::Display for ModificationProcedure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(seed={})", self.kind, self.seed)
    }
}

/// Build, assemble, sweep the default grid and detect plateaus.
pub fn run_config(label: ConfigLabel, preset: &Preset, seed: u64) -> Result<(DesignBundle, RankProfile, Vec<Plateau>)> {
    let config = DesignConfig::from_label(label)?;
    let bundle = preset.sample(config, &BlockPartition::default_for(config.d), seed)?;
    let design = assemble_design(&bundle)?;
    let profile = profile_of(&bundle, &design, &ToleranceGrid::default(), &bundle.preset_label)?;
    let plateaus = detect_plateaus(&profile);
    Ok((bundle, profile, plateaus))
}

fn profile_of(bundle: &DesignBundle, design: &DenseMatrix, grid: &ToleranceGrid, label: &str) -> Result<RankProfile> {
    let spectrum = svd(design)?;
    sweep_spectrum(&spectrum, grid, bundle.ambient_dim(), label)
}

/// Re-evaluate the rank profile under a refinement on the default grid.
pub fn apply_refinement(
    bundle: &DesignBundle,
    design: &DenseMatrix,
    procedure: &RefinementProcedure,
) -> Result<RankProfile> {
    apply_refinement_on(bundle, design, procedure, &ToleranceGrid::default())
}

pub fn apply_refinement_on(
    bundle: &DesignBundle,
    design: &DenseMatrix,
    procedure: &RefinementProcedure,
    grid: &ToleranceGrid,
) -> Result<RankProfile> {
    let label = format!("{}:{}", bundle.preset_label, procedure);
    match *procedure {
        RefinementProcedure::ToleranceSweep => profile_of(bundle, design, grid, &label),
        RefinementProcedure::GlobalRescale { re, im } => {
            let c = C64::new(re, im);
            if c == C64::new(0.0, 0.0) || !c.is_finite() {
                return Err(Error::invalid(format!(
                    "rescale factor must be nonzero and finite, got {c}"
                )));
            }
            profile_of(bundle, &design.scale(c), grid, &label)
        }
        RefinementProcedure::RowPermutation { seed } => {
            let mut order: Vec<usize> = (0..design.rows()).collect();
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            profile_of(bundle, &design.permute_rows(&order)?, grid, &label)
        }
        RefinementProcedure::RealificationCheck => {
            let complex = profile_of(bundle, design, grid, &label)?;
            let real = realify(design);
            let real_spectrum = svd(real.matrix())?;
            let real_profile = sweep_spectrum(&real_spectrum, grid, 2 * bundle.ambient_dim(), "")?;
            for (k, (&rc, &rr)) in complex.ranks.iter().zip(&real_profile.ranks).enumerate() {
                if rr != 2 * rc {
                    return Err(Error::Numerical {
                        rows: real.matrix().rows(),
                        cols: real.matrix().cols(),
                        message: format!(
                            "realified rank {rr} is not twice complex rank {rc} at tau={:e}",
                            grid.values()[k]
                        ),
                    });
                }
            }
            Ok(complex)
        }
    }
}

/// Modify the families, then sweep the new design on the default grid.
pub fn apply_modification(
    bundle: &DesignBundle,
    procedure: &ModificationProcedure,
) -> Result<(DesignBundle, RankProfile)> {
    apply_modification_on(bundle, procedure, &ToleranceGrid::default())
}

pub fn apply_modification_on(
    bundle: &DesignBundle,
    procedure: &ModificationProcedure,
    grid: &ToleranceGrid,
) -> Result<(DesignBundle, RankProfile)> {
    let modified = modify_problem(bundle, procedure.kind, procedure.seed)?;
    let design = assemble_design(&modified)?;
    let profile = profile_of(&modified, &design, grid, &modified.preset_label)?;
    Ok((modified, profile))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementResult {
    pub procedure: RefinementProcedure,
    pub profile: RankProfile,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModificationResult {
    pub procedure: ModificationProcedure,
    pub profile: RankProfile,
}

/// Baseline against refinements and modifications of one bundle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub preset_label: String,
    pub baseline_profile: RankProfile,
    pub baseline_plateaus: Vec<Plateau>,
    pub refinement_results: Vec<RefinementResult>,
    pub modification_results: Vec<ModificationResult>,
    /// Every refinement has the baseline's plateau values and boundaries.
    pub plateaus_preserved: bool,
    pub max_rank_after_modification: usize,
    pub sector_summary: SectorWeights,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompareOptions {
    pub grid: ToleranceGrid,
    pub sector_tolerance: f64,
    pub sector_mode: SectorMode,
    pub parallelism: Parallelism,
}

impl Default for CompareOptions {
    fn default() -> Self {
        Self {
            grid: ToleranceGrid::default(),
            sector_tolerance: SECTOR_SUMMARY_TOL,
            sector_mode: SectorMode::TwoSector,
            parallelism: Parallelism::default(),
        }
    }
}

pub fn same_plateau_structure(a: &[Plateau], b: &[Plateau]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.same_structure(y))
}

pub fn compare(
    bundle: &DesignBundle,
    refinements: &[RefinementProcedure],
    modifications: &[ModificationProcedure],
) -> Result<ComparisonReport> {
    compare_with(bundle, refinements, modifications, &CompareOptions::default())
}

pub fn compare_with(
    bundle: &DesignBundle,
    refinements: &[RefinementProcedure],
    modifications: &[ModificationProcedure],
    options: &CompareOptions,
) -> Result<ComparisonReport> {
    if refinements.is_empty() || modifications.is_empty() {
        return Err(Error::invalid(
            "compare needs at least one refinement and one modification",
        ));
    }
    let design = assemble_design(bundle)?;
    let spectrum = svd(&design)?;
    let baseline_profile = sweep_spectrum(&spectrum, &options.grid, bundle.ambient_dim(), &bundle.preset_label)?;
    let baseline_plateaus = detect_plateaus(&baseline_profile);

    let scheme = build_sector_scheme(&bundle.partition, bundle.config.d, options.sector_mode)?;
    let mut basis = nullspace_basis(&spectrum, options.sector_tolerance)?;
    basis.source_label = bundle.preset_label.clone();
    let sector_summary = sector_weights(&basis, &scheme)?;

    let refinement_results = par::map(options.parallelism, refinements, |p| {
        apply_refinement_on(bundle, &design, p, &options.grid)
            .map(|profile| RefinementResult { procedure: *p, profile })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let modification_results = par::map(options.parallelism, modifications, |p| {
        apply_modification_on(bundle, p, &options.grid)
            .map(|(_, profile)| ModificationResult { procedure: *p, profile })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let plateaus_preserved = refinement_results
        .iter()
        .all(|r| same_plateau_structure(&detect_plateaus(&r.profile), &baseline_plateaus));
    let max_rank_after_modification = modification_results
        .iter()
        .map(|m| m.profile.max_rank())
        .max()
        .unwrap_or(0);

    Ok(ComparisonReport {
        preset_label: bundle.preset_label.clone(),
        baseline_profile,
        baseline_plateaus,
        refinement_results,
        modification_results,
        plateaus_preserved,
        max_rank_after_modification,
        sector_summary,
    })
}
