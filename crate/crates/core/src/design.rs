//! Operator/state families, the bilinear feature map and design assembly.
//!
//! Feature coordinates follow the column-major `vec` convention: the
//! feature of `(E, rho)` at index `(b*d + e)*d^2 + (a*d + c)` is
//! `E[a,b] * rho[e,c]`, i.e. entry `(a*d + c, b*d + e)` of `E ⊗ rhoᵀ`.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, C64};
use crate::par::{self, Parallelism};

/// Entry-wise Hermiticity tolerance for samples.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Allowed deviation of a state trace from one.
pub const TRACE_TOL: f64 = 1e-12;
/// Most negative eigenvalue tolerated in a state.
pub const PSD_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConfigLabel {
    A,
    B,
    C,
    #[serde(rename = "custom")]
    Custom,
}

impl fmt::Display for ConfigLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConfigLabel::A => "A",
            ConfigLabel::B => "B",
            ConfigLabel::C => "C",
            ConfigLabel::Custom => "custom",
        })
    }
}

impl FromStr for ConfigLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(ConfigLabel::A),
            "B" | "b" => Ok(ConfigLabel::B),
            "C" | "c" => Ok(ConfigLabel::C),
            "custom" => Ok(ConfigLabel::Custom),
            other => Err(Error::invalid(format!("unknown config label {other:?}"))),
        }
    }
}

/// Problem dimensions. Configs B and C share a shape and differ only in
/// the seed used to sample them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DesignConfig {
    pub d: usize,
    pub n_e: usize,
    pub n_rho: usize,
    pub label: ConfigLabel,
}

impl DesignConfig {
    pub fn config_a() -> Self {
        Self {
            d: 4,
            n_e: 16,
            n_rho: 16,
            label: ConfigLabel::A,
        }
    }

    pub fn config_b() -> Self {
        Self {
            d: 4,
            n_e: 20,
            n_rho: 20,
            label: ConfigLabel::B,
        }
    }

    pub fn config_c() -> Self {
        Self {
            d: 4,
            n_e: 20,
            n_rho: 20,
            label: ConfigLabel::C,
        }
    }

    pub fn from_label(label: ConfigLabel) -> Result<Self> {
        match label {
            ConfigLabel::A => Ok(Self::config_a()),
            ConfigLabel::B => Ok(Self::config_b()),
            ConfigLabel::C => Ok(Self::config_c()),
            ConfigLabel::Custom => Err(Error::invalid("custom configs need explicit dimensions")),
        }
    }

    pub fn custom(d: usize, n_e: usize, n_rho: usize) -> Result<Self> {
        let cfg = Self {
            d,
            n_e,
            n_rho,
            label: ConfigLabel::Custom,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `d^4`, the feature-space dimension.
    pub fn ambient_dim(&self) -> usize {
        self.d.pow(4)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::invalid(format!("config.d must be >= 2, got {}", self.d)));
        }
        if self.n_e == 0 || self.n_rho == 0 {
            return Err(Error::invalid("config.n_e and config.n_rho must be positive"));
        }
        let forced = match self.label {
            ConfigLabel::A => Some((16, 16)),
            ConfigLabel::B | ConfigLabel::C => Some((20, 20)),
            ConfigLabel::Custom => None,
        };
        if let Some(shape) = forced {
            if (self.n_e, self.n_rho) != shape {
                return Err(Error::invalid(format!(
                    "config.label {} requires (n_e, n_rho) = {shape:?}",
                    self.label
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OperatorKind {
    GenericHermitian,
    BlockDiagonal,
    BlockPerturbed,
    Augmented,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StateKind {
    Density,
    BlockDiagonalDensity,
    SubspaceRestricted,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OperatorSample {
    pub matrix: DenseMatrix,
    pub kind: OperatorKind,
}

impl OperatorSample {
    pub fn validate(&self, d: usize) -> Result<()> {
        if self.matrix.shape() != (d, d) {
            return Err(Error::invalid(format!(
                "shape {:?}, expected {d}x{d}",
                self.matrix.shape()
            )));
        }
        let defect = self.matrix.hermitian_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::invalid(format!("not Hermitian (defect {defect:e})")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateSample {
    pub matrix: DenseMatrix,
    pub kind: StateKind,
}

impl StateSample {
    pub fn validate(&self, d: usize) -> Result<()> {
        if self.matrix.shape() != (d, d) {
            return Err(Error::invalid(format!(
                "shape {:?}, expected {d}x{d}",
                self.matrix.shape()
            )));
        }
        let defect = self.matrix.hermitian_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::invalid(format!("not Hermitian (defect {defect:e})")));
        }
        let tr = self.matrix.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::invalid(format!("trace {} is not 1", tr.re)));
        }
        if !is_psd_within(&self.matrix, PSD_TOL) {
            return Err(Error::invalid("not positive semidefinite"));
        }
        Ok(())
    }
}

/// Cholesky test on `m + 2*tol*I`; succeeds for Hermitian `m` whose
/// eigenvalues are all at least `-tol` (up to roundoff).
fn is_psd_within(m: &DenseMatrix, tol: f64) -> bool {
    let n = m.rows();
    let mut l = vec![C64::new(0.0, 0.0); n * n];
    for j in 0..n {
        let mut diag = m[(j, j)].re + 2.0 * tol;
        for k in 0..j {
            diag -= l[j * n + k].norm_sqr();
        }
        if diag <= 0.0 {
            return false;
        }
        let ljj = diag.sqrt();
        l[j * n + j] = C64::new(ljj, 0.0);
        for i in j + 1..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k].conj();
            }
            l[i * n + j] = s / ljj;
        }
    }
    true
}

/// Disjoint index blocks covering `0..d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BlockPartition {
    blocks: Vec<Vec<usize>>,
    owner: Vec<usize>,
}

impl BlockPartition {
    pub fn new(blocks: Vec<Vec<usize>>, d: usize) -> Result<Self> {
        let mut owner = vec![usize::MAX; d];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::invalid(format!("partition.blocks[{b}] is empty")));
            }
            for &i in block {
                if i >= d {
                    return Err(Error::invalid(format!("partition index {i} out of range for d={d}")));
                }
                if owner[i] != usize::MAX {
                    return Err(Error::invalid(format!("partition index {i} appears twice")));
                }
                owner[i] = b;
            }
        }
        if let Some(i) = owner.iter().position(|&o| o == usize::MAX) {
            return Err(Error::invalid(format!("partition does not cover index {i}")));
        }
        Ok(Self { blocks, owner })
    }

    /// Two contiguous halves, `{0,1},{2,3}` for `d = 4`.
    pub fn default_for(d: usize) -> Self {
        let half = d.div_ceil(2);
        let blocks = if d < 2 {
            vec![(0..d).collect()]
        } else {
            vec![(0..half).collect(), (half..d).collect()]
        };
        Self::new(blocks, d).expect("halves form a partition")
    }

    /// Parse `"0,1|2,3"`.
    pub fn parse(text: &str, d: usize) -> Result<Self> {
        let blocks = text
            .split('|')
            .map(|b| {
                b.split(',')
                    .map(|i| {
                        i.trim()
                            .parse::<usize>()
                            .map_err(|_| Error::invalid(format!("bad partition index {i:?}")))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(blocks, d)
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn dim(&self) -> usize {
        self.owner.len()
    }

    pub fn same_block(&self, i: usize, j: usize) -> bool {
        self.owner[i] == self.owner[j]
    }

    /// Number of ordered index pairs `(i, j)` inside one block.
    pub fn within_pairs(&self) -> usize {
        self.blocks.iter().map(|b| b.len() * b.len()).sum()
    }
}

impl fmt::Display for BlockPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .blocks
            .iter()
            .map(|b| b.iter().map(usize::to_string).collect::<Vec<_>>().join(","))
            .collect();
        f.write_str(&parts.join("|"))
    }
}

/// The fixed problem definition: dimensions, both families and the
/// partition used for every downstream sector analysis.
#[derive(Clone, Debug, PartialEq)]
pub struct DesignBundle {
    pub config: DesignConfig,
    pub operators: Vec<OperatorSample>,
    pub states: Vec<StateSample>,
    pub partition: BlockPartition,
    pub seed: u64,
    pub preset_label: String,
}

impl DesignBundle {
    /// Check every invariant; the error names the first failing field.
    pub fn validate(&self) -> Result<()> {
        let d = self.config.d;
        self.config.validate()?;
        if self.partition.dim() != d {
            return Err(Error::invalid(format!(
                "partition covers {} indices but d = {d}",
                self.partition.dim()
            )));
        }
        if self.operators.len() != self.config.n_e {
            return Err(Error::invalid(format!(
                "operators: {} samples but config.n_e = {}",
                self.operators.len(),
                self.config.n_e
            )));
        }
        if self.states.len() != self.config.n_rho {
            return Err(Error::invalid(format!(
                "states: {} samples but config.n_rho = {}",
                self.states.len(),
                self.config.n_rho
            )));
        }
        for (i, op) in self.operators.iter().enumerate() {
            op.validate(d).map_err(|e| prefix(e, &format!("operators[{i}]")))?;
        }
        for (j, st) in self.states.iter().enumerate() {
            st.validate(d).map_err(|e| prefix(e, &format!("states[{j}]")))?;
        }
        Ok(())
    }

    pub fn ambient_dim(&self) -> usize {
        self.config.ambient_dim()
    }
}

fn prefix(e: Error, field: &str) -> Error {
    match e {
        Error::InvalidInput(msg) => Error::InvalidInput(format!("{field}: {msg}")),
        other => other,
    }
}

/// Bilinear feature `vec(E ⊗ rhoᵀ)`, length `d^4`.
pub fn feature_vector(e: &OperatorSample, rho: &StateSample) -> Result<Vec<C64>> {
    feature_of(&e.matrix, &rho.matrix)
}

/// [`feature_vector`] on bare matrices.
pub fn feature_of(e: &DenseMatrix, rho: &DenseMatrix) -> Result<Vec<C64>> {
    let d = e.rows();
    if e.shape() != (d, d) || rho.shape() != (d, d) {
        return Err(Error::invalid(format!(
            "feature map needs two square matrices of equal size, got {:?} and {:?}",
            e.shape(),
            rho.shape()
        )));
    }
    let d2 = d * d;
    let mut out = vec![C64::new(0.0, 0.0); d2 * d2];
    for b in 0..d {
        for e_idx in 0..d {
            let col = (b * d + e_idx) * d2;
            for a in 0..d {
                let eab = e[(a, b)];
                for c in 0..d {
                    out[col + a * d + c] = eab * rho[(e_idx, c)];
                }
            }
        }
    }
    Ok(out)
}

/// Design matrix with default parallelism.
pub fn assemble_design(bundle: &DesignBundle) -> Result<DenseMatrix> {
    assemble_design_with(bundle, Parallelism::default())
}

/// Rows `i*n_rho + j` hold `feature_vector(E_i, rho_j)ᵀ` (no conjugation).
pub fn assemble_design_with(bundle: &DesignBundle, mode: Parallelism) -> Result<DenseMatrix> {
    bundle.validate()?;
    let n_rho = bundle.states.len();
    let n_rows = bundle.operators.len() * n_rho;
    let rows = par::map_range(mode, n_rows, |r| {
        feature_vector(&bundle.operators[r / n_rho], &bundle.states[r % n_rho])
    });
    let mut data = Vec::with_capacity(n_rows * bundle.ambient_dim());
    for row in rows {
        data.extend(row?);
    }
    DenseMatrix::new(n_rows, bundle.ambient_dim(), data)
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `(G + G†)/2` with complex Gaussian `G`.
fn generic_hermitian(d: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    let g = DenseMatrix::gaussian(d, d, rng);
    DenseMatrix::from_fn(d, d, |r, c| (g[(r, c)] + g[(c, r)].conj()) * 0.5)
}

/// `G G† / tr(G G†)`.
fn gram_density(g: &DenseMatrix) -> DenseMatrix {
    let d = g.rows();
    let gg = DenseMatrix::from_fn(d, d, |r, c| (0..d).map(|k| g[(r, k)] * g[(c, k)].conj()).sum());
    let tr = gg.trace().re;
    gg.scale(C64::new(1.0 / tr, 0.0))
}

fn mask_block_diagonal(m: &DenseMatrix, partition: &BlockPartition) -> DenseMatrix {
    DenseMatrix::from_fn(m.rows(), m.cols(), |r, c| {
        if partition.same_block(r, c) {
            m[(r, c)]
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

fn unit_frobenius(m: DenseMatrix) -> DenseMatrix {
    let n = m.frobenius_norm();
    m.scale(C64::new(1.0 / n, 0.0))
}

fn check_partition(config: &DesignConfig, partition: &BlockPartition) -> Result<()> {
    config.validate()?;
    if partition.dim() != config.d {
        return Err(Error::invalid(format!(
            "partition covers {} indices but d = {}",
            partition.dim(),
            config.d
        )));
    }
    Ok(())
}

/// Generic families: Gaussian-symmetrized Hermitian operators and
/// normalized Gram-product densities.
pub fn sample_generic(config: DesignConfig, seed: u64) -> Result<DesignBundle> {
    config.validate()?;
    let mut rng = rng_for(seed, 0);
    let d = config.d;
    let operators = (0..config.n_e)
        .map(|_| OperatorSample {
            matrix: generic_hermitian(d, &mut rng),
            kind: OperatorKind::GenericHermitian,
        })
        .collect();
    let states = (0..config.n_rho)
        .map(|_| StateSample {
            matrix: gram_density(&DenseMatrix::gaussian(d, d, &mut rng)),
            kind: StateKind::Density,
        })
        .collect();
    Ok(DesignBundle {
        config,
        operators,
        states,
        partition: BlockPartition::default_for(d),
        seed,
        preset_label: "generic".into(),
    })
}

/// Every operator and state block-diagonal with respect to `partition`.
pub fn sample_block_restricted(config: DesignConfig, partition: &BlockPartition, seed: u64) -> Result<DesignBundle> {
    check_partition(&config, partition)?;
    let mut rng = rng_for(seed, 0);
    let d = config.d;
    let operators = (0..config.n_e)
        .map(|_| OperatorSample {
            matrix: mask_block_diagonal(&generic_hermitian(d, &mut rng), partition),
            kind: OperatorKind::BlockDiagonal,
        })
        .collect();
    let states = (0..config.n_rho)
        .map(|_| {
            let g = mask_block_diagonal(&DenseMatrix::gaussian(d, d, &mut rng), partition);
            StateSample {
                matrix: gram_density(&g),
                kind: StateKind::BlockDiagonalDensity,
            }
        })
        .collect();
    Ok(DesignBundle {
        config,
        operators,
        states,
        partition: partition.clone(),
        seed,
        preset_label: "block-restricted".into(),
    })
}

/// Block-restricted samples plus `epsilon` times unit-Frobenius generic
/// Hermitian perturbations. States are shifted by `epsilon * I` (enough
/// for positivity, since the perturbation has spectral norm at most one)
/// and renormalized to unit trace.
pub fn sample_block_perturbed(
    config: DesignConfig,
    partition: &BlockPartition,
    epsilon: f64,
    seed: u64,
) -> Result<DesignBundle> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::invalid(format!(
            "epsilon must be finite and >= 0, got {epsilon}"
        )));
    }
    let mut bundle = sample_block_restricted(config, partition, seed)?;
    bundle.preset_label = format!("block-perturbed:{epsilon:e}");
    if epsilon == 0.0 {
        return Ok(bundle);
    }
    let d = config.d;
    let mut rng = rng_for(seed, 1);
    let eps = C64::new(epsilon, 0.0);
    for op in &mut bundle.operators {
        let p = unit_frobenius(generic_hermitian(d, &mut rng));
        op.matrix = op.matrix.add(&p.scale(eps))?;
        op.kind = OperatorKind::BlockPerturbed;
    }
    let shift = DenseMatrix::identity(d).scale(eps);
    for st in &mut bundle.states {
        let p = unit_frobenius(generic_hermitian(d, &mut rng));
        let raw = st.matrix.add(&p.scale(eps))?.add(&shift)?;
        let tr = raw.trace().re;
        st.matrix = raw.scale(C64::new(1.0 / tr, 0.0));
    }
    Ok(bundle)
}

/// Seeded basis of the state subspace used by [`sample_mixed_restriction`]:
/// the identity (so trace normalization and positivity repair stay inside
/// the span) followed by `dim - 1` generic Hermitian matrices, which couple
/// within-block and cross-block coordinates alike.
pub fn mixed_state_basis(d: usize, dim: usize, seed: u64) -> Result<Vec<DenseMatrix>> {
    if dim == 0 || dim > d * d {
        return Err(Error::invalid(format!(
            "state_subspace_dim must be in 1..={}, got {dim}",
            d * d
        )));
    }
    let mut rng = rng_for(seed, 2);
    let mut basis = vec![DenseMatrix::identity(d)];
    basis.extend((1..dim).map(|_| unit_frobenius(generic_hermitian(d, &mut rng))));
    Ok(basis)
}

/// Generic operators; states confined to a fixed seeded real subspace of
/// Hermitian matrices of dimension `state_subspace_dim`.
pub fn sample_mixed_restriction(
    config: DesignConfig,
    partition: &BlockPartition,
    state_subspace_dim: usize,
    seed: u64,
) -> Result<DesignBundle> {
    check_partition(&config, partition)?;
    let d = config.d;
    let basis = mixed_state_basis(d, state_subspace_dim, seed)?;
    let mut rng = rng_for(seed, 0);
    let operators = (0..config.n_e)
        .map(|_| OperatorSample {
            matrix: generic_hermitian(d, &mut rng),
            kind: OperatorKind::GenericHermitian,
        })
        .collect();
    let states = (0..config.n_rho)
        .map(|_| {
            let mut h = DenseMatrix::zeros(d, d);
            for b in &basis {
                let coef: f64 = StandardNormal.sample(&mut rng);
                h = h.add(&b.scale(C64::new(coef, 0.0))).expect("same shape");
            }
            // Frobenius norm bounds the spectral norm, so this shift is PSD.
            let shifted = h
                .add(&DenseMatrix::identity(d).scale(C64::new(h.frobenius_norm(), 0.0)))
                .expect("same shape");
            let tr = shifted.trace().re;
            StateSample {
                matrix: shifted.scale(C64::new(1.0 / tr, 0.0)),
                kind: StateKind::SubspaceRestricted,
            }
        })
        .collect();
    Ok(DesignBundle {
        config,
        operators,
        states,
        partition: partition.clone(),
        seed,
        preset_label: format!("mixed:{state_subspace_dim}"),
    })
}

/// Named sampling presets.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Preset {
    Generic,
    BlockRestricted,
    BlockPerturbed { epsilon: f64 },
    Mixed { state_subspace_dim: usize },
}

impl Preset {
    pub fn sample(&self, config: DesignConfig, partition: &BlockPartition, seed: u64) -> Result<DesignBundle> {
        match *self {
            Preset::Generic => {
                check_partition(&config, partition)?;
                let mut b = sample_generic(config, seed)?;
                b.partition = partition.clone();
                Ok(b)
            }
            Preset::BlockRestricted => sample_block_restricted(config, partition, seed),
            Preset::BlockPerturbed { epsilon } => sample_block_perturbed(config, partition, epsilon, seed),
            Preset::Mixed { state_subspace_dim } => {
                sample_mixed_restriction(config, partition, state_subspace_dim, seed)
            }
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Preset::Generic => f.write_str("generic"),
            Preset::BlockRestricted => f.write_str("block-restricted"),
            Preset::BlockPerturbed { epsilon } => write!(f, "block-perturbed:{epsilon:e}"),
            Preset::Mixed { state_subspace_dim } => write!(f, "mixed:{state_subspace_dim}"),
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "generic" => return Ok(Preset::Generic),
            "block-restricted" => return Ok(Preset::BlockRestricted),
            _ => {}
        }
        if let Some(eps) = s.strip_prefix("block-perturbed:") {
            let epsilon: f64 = eps
                .parse()
                .map_err(|_| Error::invalid(format!("bad epsilon in preset {s:?}")))?;
            if !(epsilon >= 0.0 && epsilon.is_finite()) {
                return Err(Error::invalid(format!("epsilon must be finite and >= 0 in {s:?}")));
            }
            return Ok(Preset::BlockPerturbed { epsilon });
        }
        if let Some(dim) = s.strip_prefix("mixed:") {
            let state_subspace_dim = dim
                .parse()
                .map_err(|_| Error::invalid(format!("bad subspace dimension in preset {s:?}")))?;
            return Ok(Preset::Mixed { state_subspace_dim });
        }
        Err(Error::invalid(format!("unknown preset {s:?}")))
    }
}

/// Structural changes to the admissible families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Modification {
    /// Append generic operators and states; `extra` defaults to
    /// `d^2 - sum |block|^2`, the number of cross-block directions.
    AugmentCrossBlock { extra: Option<usize> },
    /// Resample both families generically at the same sizes.
    ReplaceGeneric,
}

impl fmt::Display for Modification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Modification::AugmentCrossBlock { extra: None } => f.write_str("augment-cross-block"),
            Modification::AugmentCrossBlock { extra: Some(k) } => write!(f, "augment-cross-block:{k}"),
            Modification::ReplaceGeneric => f.write_str("replace-generic"),
        }
    }
}

/// Apply a structural modification; the result is a `custom` config whose
/// `preset_label` records what was done.
pub fn modify_problem(bundle: &DesignBundle, mode: Modification, seed: u64) -> Result<DesignBundle> {
    bundle.validate()?;
    let d = bundle.config.d;
    let mut out = match mode {
        Modification::AugmentCrossBlock { extra } => {
            let extra = extra.unwrap_or(d * d - bundle.partition.within_pairs());
            let mut rng = rng_for(seed, 3);
            let mut out = bundle.clone();
            out.operators.extend((0..extra).map(|_| OperatorSample {
                matrix: generic_hermitian(d, &mut rng),
                kind: OperatorKind::Augmented,
            }));
            out.states.extend((0..extra).map(|_| StateSample {
                matrix: gram_density(&DenseMatrix::gaussian(d, d, &mut rng)),
                kind: StateKind::Density,
            }));
            out
        }
        Modification::ReplaceGeneric => {
            let cfg = DesignConfig::custom(d, bundle.config.n_e, bundle.config.n_rho)?;
            let mut out = sample_generic(cfg, seed)?;
            out.partition = bundle.partition.clone();
            out
        }
    };
    out.config = DesignConfig::custom(d, out.operators.len(), out.states.len())?;
    out.preset_label = format!("{}+{}", bundle.preset_label, mode);
    out.seed = bundle.seed;
    Ok(out)
}
