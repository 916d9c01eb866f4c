//! Relative-threshold rank, tolerance sweeps, plateaus and realification.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{svd_with, DenseMatrix, SingularSpectrum, C64};
use crate::par::{self, Parallelism};

/// Strictly increasing tolerances in `(0, 1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ToleranceGrid {
    values: Vec<f64>,
}

impl ToleranceGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("tolerance grid is empty"));
        }
        if let Some(t) = values.iter().find(|t| !(**t > 0.0 && **t < 1.0)) {
            return Err(Error::invalid(format!("tolerance {t} outside (0, 1)")));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("tolerance grid must be strictly increasing"));
        }
        Ok(Self { values })
    }

    /// `count` points evenly spaced in `log10` from `start` to `stop`; both
    /// endpoints are kept exactly.
    pub fn log_spaced(start: f64, stop: f64, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::invalid("grid count must be positive"));
        }
        if !(start > 0.0 && stop > 0.0) {
            return Err(Error::invalid("grid endpoints must be positive"));
        }
        if count == 1 {
            return Self::new(vec![start]);
        }
        let (lo, hi) = (start.log10(), stop.log10());
        let step = (hi - lo) / (count - 1) as f64;
        let mut values: Vec<f64> = (0..count).map(|k| 10f64.powf(lo + step * k as f64)).collect();
        values[0] = start;
        values[count - 1] = stop;
        Self::new(values)
    }

    /// Parse `start:stop:count`.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        let [start, stop, count] = parts.as_slice() else {
            return Err(Error::invalid(format!("grid must be start:stop:count, got {text:?}")));
        };
        let bad = || Error::invalid(format!("cannot parse grid {text:?}"));
        let start: f64 = start.parse().map_err(|_| bad())?;
        let stop: f64 = stop.parse().map_err(|_| bad())?;
        let count: usize = count.parse().map_err(|_| bad())?;
        Self::log_spaced(start, stop, count)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl Default for ToleranceGrid {
    /// 29 points from `1e-16` to `1e-2`, half a decade apart.
    fn default() -> Self {
        Self::log_spaced(1e-16, 1e-2, 29).expect("default grid is valid")
    }
}

impl TryFrom<Vec<f64>> for ToleranceGrid {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<ToleranceGrid> for Vec<f64> {
    fn from(g: ToleranceGrid) -> Self {
        g.values
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "tolerance must be positive and finite, got {tau}"
        )))
    }
}

/// Number of singular values with `sigma_k > tau * sigma_max` (strict).
/// The zero matrix has rank zero at every tolerance.
pub fn rank_at_tolerance(spectrum: &SingularSpectrum, tau: f64) -> Result<usize> {
    check_tau(tau)?;
    Ok(count_above(spectrum.values(), tau))
}

fn count_above(values: &[f64], tau: f64) -> usize {
    let smax = values.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return 0;
    }
    let threshold = tau * smax;
    values.partition_point(|&s| s > threshold)
}

pub fn nullity_at_tolerance(rank: usize, ambient_dim: usize) -> Result<usize> {
    ambient_dim.checked_sub(rank).ok_or_else(|| {
        Error::invalid(format!(
            "rank {rank} exceeds ambient dimension {ambient_dim}; ambient dimension is mis-specified"
        ))
    })
}

/// Rank and nullity over a tolerance grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankProfile {
    pub grid: ToleranceGrid,
    pub ranks: Vec<usize>,
    pub nullities: Vec<usize>,
    pub ambient_dim: usize,
    pub source_label: String,
}

impl RankProfile {
    /// Build from ranks, deriving nullities; checks monotonicity.
    pub fn from_ranks(
        grid: ToleranceGrid,
        ranks: Vec<usize>,
        ambient_dim: usize,
        source_label: impl Into<String>,
    ) -> Result<Self> {
        if ranks.len() != grid.len() {
            return Err(Error::invalid("rank count does not match grid length"));
        }
        if ranks.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::invalid("ranks must be non-increasing in tolerance"));
        }
        let nullities = ranks
            .iter()
            .map(|&r| nullity_at_tolerance(r, ambient_dim))
            .collect::<Result<_>>()?;
        Ok(Self {
            grid,
            ranks,
            nullities,
            ambient_dim,
            source_label: source_label.into(),
        })
    }

    /// Rank at a tolerance that is on the grid.
    pub fn rank_at(&self, tau: f64) -> Option<usize> {
        self.grid.values().iter().position(|&t| t == tau).map(|k| self.ranks[k])
    }

    pub fn max_rank(&self) -> usize {
        self.ranks.iter().copied().max().unwrap_or(0)
    }
}

/// Threshold a cached spectrum at every grid point.
pub fn sweep_spectrum(
    spectrum: &SingularSpectrum,
    grid: &ToleranceGrid,
    ambient_dim: usize,
    source_label: impl Into<String>,
) -> Result<RankProfile> {
    let ranks = grid
        .values()
        .iter()
        .map(|&t| count_above(spectrum.values(), t))
        .collect();
    RankProfile::from_ranks(grid.clone(), ranks, ambient_dim, source_label)
}

/// One SVD, then a threshold per grid point.
pub fn sweep(a: &DenseMatrix, grid: &ToleranceGrid, ambient_dim: usize) -> Result<RankProfile> {
    sweep_with(a, grid, ambient_dim, Parallelism::default())
}

pub fn sweep_with(a: &DenseMatrix, grid: &ToleranceGrid, ambient_dim: usize, mode: Parallelism) -> Result<RankProfile> {
    let spectrum = svd_with(a, mode)?;
    sweep_spectrum(&spectrum, grid, ambient_dim, "")
}

/// Sweep many matrices; results in input order.
pub fn sweep_batch(
    matrices: &[DenseMatrix],
    grid: &ToleranceGrid,
    ambient_dim: usize,
    mode: Parallelism,
) -> Result<Vec<RankProfile>> {
    // Outer fan-out only; each SVD runs sequentially inside its task.
    par::map(mode, matrices, |a| {
        sweep_with(a, grid, ambient_dim, Parallelism::Sequential)
    })
    .into_iter()
    .collect()
}

/// Maximal run of constant rank on the grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Plateau {
    pub start_index: usize,
    pub end_index: usize,
    pub rank_value: usize,
    /// `log10(tau_end / tau_start)`.
    pub span_decades: f64,
}

impl Plateau {
    pub fn len(&self) -> usize {
        self.end_index - self.start_index + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Same rank and grid boundaries, ignoring the derived span.
    pub fn same_structure(&self, other: &Plateau) -> bool {
        (self.start_index, self.end_index, self.rank_value) == (other.start_index, other.end_index, other.rank_value)
    }
}

/// Run-length encode the rank sequence.
pub fn detect_plateaus(profile: &RankProfile) -> Vec<Plateau> {
    let taus = profile.grid.values();
    let mut out: Vec<Plateau> = Vec::new();
    for (k, &r) in profile.ranks.iter().enumerate() {
        match out.last_mut() {
            Some(p) if p.rank_value == r => p.end_index = k,
            _ => out.push(Plateau {
                start_index: k,
                end_index: k,
                rank_value: r,
                span_decades: 0.0,
            }),
        }
    }
    for p in &mut out {
        p.span_decades = (taus[p.end_index] / taus[p.start_index]).log10();
    }
    out
}

/// `[[Re A, -Im A], [Im A, Re A]]`, stored with zero imaginary parts.
#[derive(Clone, Debug, PartialEq)]
pub struct RealifiedMatrix(DenseMatrix);

impl RealifiedMatrix {
    pub fn matrix(&self) -> &DenseMatrix {
        &self.0
    }

    pub fn into_inner(self) -> DenseMatrix {
        self.0
    }
}

pub fn realify(a: &DenseMatrix) -> RealifiedMatrix {
    let (m, n) = a.shape();
    RealifiedMatrix(DenseMatrix::from_fn(2 * m, 2 * n, |r, c| {
        let z = a[(r % m, c % n)];
        let v = match (r < m, c < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        };
        C64::new(v, 0.0)
    }))
}
