//! Quantumness-of-correlations quantifiers for fermionic mode systems.
//!
//! All values are computed in nats; [`QuantifierResult::in_unit`] converts.
//! Minimizations over bases use [`crate::optimize`]; results carry the
//! optimizer statistics and a convergence flag because global optimality is
//! not certified.

use crate::error::{Error, Result};
use crate::fock::{
    annihilation_matrix, bogoliubov_lift, mode_bit, parity_of, FockBasis, SectorTable,
    SingleParticleUnitary,
};
use crate::linalg::{self, CMatrix, C64, ZERO};
use crate::measurement::{embed_local, DephasingBlocks, ModePartition, ProjectiveMeasurement};
use crate::optimize::{minimize_unitaries, OptimizerConfig, OptimizerStats, SearchOutcome};
use crate::quantinfo::{
    self, relative_entropy, shannon_of, von_neumann_entropy, DensityMatrix, LogBase,
    ProbabilityVector,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Largest measured block for searches over `U(2^k)`.
pub const MAX_BLOCK_MODES: usize = 3;
/// Tolerance of the parity / sector support checks.
pub const SECTOR_TOL: f64 = 1e-8;

/// Which inner evaluation produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvaluationRoute {
    /// Occupation dephasing in each single-particle basis (single parity sector).
    ClosedForm,
    /// Joint search over the single-particle basis and local mode rotations.
    LocalFallback,
    /// Direct search over local block unitaries.
    Direct,
}

/// A local unitary acting on a block of modes, first listed mode most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalUnitary {
    pub modes: Vec<usize>,
    pub unitary: CMatrix,
}

/// Basis attaining a quantifier: the Fock-space rotation is
/// `W = (∏ local) · Γ(U)`, and the measurement is the occupation basis of the
/// rotated state `W ρ W†`.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalBasis {
    pub single_particle: Option<SingleParticleUnitary>,
    pub local: Vec<LocalUnitary>,
}

impl OptimalBasis {
    pub fn fock_rotation(&self, modes: usize) -> Result<CMatrix> {
        let dim = 1usize << modes;
        let mut w = match &self.single_particle {
            Some(u) => SectorTable::new(modes).lift(u.matrix()),
            None => CMatrix::identity(dim, dim),
        };
        for l in &self.local {
            w = embed_local(&l.unitary, &l.modes, modes)? * w;
        }
        Ok(w)
    }

    /// Projective measurement of the listed modes in this basis.
    pub fn measurement(&self, modes: usize, measured: &[usize]) -> Result<ProjectiveMeasurement> {
        ProjectiveMeasurement::rotated(modes, self.fock_rotation(modes)?, measured)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantifierResult {
    pub value: f64,
    pub unit: LogBase,
    pub optimal_basis: OptimalBasis,
    pub optimizer_stats: OptimizerStats,
    pub converged: bool,
    pub route: EvaluationRoute,
}

impl QuantifierResult {
    /// The same result expressed in `unit` (gap included).
    pub fn in_unit(mut self, unit: LogBase) -> Self {
        let nats = self.unit.to_nats(self.value);
        let gap = self.unit.to_nats(self.optimizer_stats.gap);
        self.value = unit.from_nats(nats);
        self.optimizer_stats.gap = unit.from_nats(gap);
        self.unit = unit;
        self
    }

    pub fn nats(&self) -> f64 {
        self.unit.to_nats(self.value)
    }
}

fn state_modes(rho: &DensityMatrix) -> Result<usize> {
    rho.modes()
        .ok_or_else(|| Error::Shape(format!("dimension {} is not a power of two", rho.dim())))
}

/// The parity (0 even, 1 odd) of a state that commutes with `(−1)^N̂` and
/// lives in one parity sector, or `None`.
pub fn parity_sector(rho: &DensityMatrix) -> Option<usize> {
    label_sector(rho.matrix(), parity_of)
}

/// The particle number of a state supported on a single number sector, or `None`.
pub fn number_sector(rho: &DensityMatrix) -> Option<usize> {
    label_sector(rho.matrix(), |i| i.count_ones() as usize)
}

fn label_sector(m: &CMatrix, label: impl Fn(usize) -> usize) -> Option<usize> {
    let dim = m.nrows();
    let mut found: Option<usize> = None;
    let mut weights = std::collections::BTreeMap::new();
    for i in 0..dim {
        *weights.entry(label(i)).or_insert(0.0) += m[(i, i)].re;
    }
    for (&k, &w) in &weights {
        if w > SECTOR_TOL {
            if found.is_some() {
                return None;
            }
            found = Some(k);
        }
    }
    let k = found?;
    for c in 0..dim {
        for r in 0..dim {
            if (label(r) != k || label(c) != k) && m[(r, c)].norm() > SECTOR_TOL {
                return None;
            }
        }
    }
    Some(k)
}

fn require_parity_sector(rho: &DensityMatrix, what: &str) -> Result<usize> {
    parity_sector(rho).ok_or_else(|| {
        Error::Precondition(format!(
            "{what} needs a state in a single parity sector; use one_way_deficit for general states"
        ))
    })
}

/// `M ← V M V†` with the 2×2 unitary `v` acting on the mode with bit `bit`.
fn rotate_mode(m: &mut CMatrix, bit: usize, v: &CMatrix) {
    let dim = m.nrows();
    let (v00, v01, v10, v11) = (v[(0, 0)], v[(0, 1)], v[(1, 0)], v[(1, 1)]);
    for r0 in (0..dim).filter(|r| r & bit == 0) {
        let r1 = r0 | bit;
        for c in 0..dim {
            let (a, b) = (m[(r0, c)], m[(r1, c)]);
            m[(r0, c)] = v00 * a + v01 * b;
            m[(r1, c)] = v10 * a + v11 * b;
        }
    }
    let (w00, w01, w10, w11) = (v00.conj(), v01.conj(), v10.conj(), v11.conj());
    for c0 in (0..dim).filter(|c| c & bit == 0) {
        let c1 = c0 | bit;
        for r in 0..dim {
            let (a, b) = (m[(r, c0)], m[(r, c1)]);
            m[(r, c0)] = w00 * a + w01 * b;
            m[(r, c1)] = w10 * a + w11 * b;
        }
    }
}

fn conjugate(w: &CMatrix, m: &CMatrix) -> CMatrix {
    w * m * w.adjoint()
}

fn diagonal_entropy(m: &CMatrix) -> f64 {
    let p: Vec<f64> = (0..m.nrows()).map(|i| m[(i, i)].re).collect();
    shannon_of(&p)
}

fn finish(
    out: SearchOutcome,
    basis: OptimalBasis,
    route: EvaluationRoute,
) -> QuantifierResult {
    QuantifierResult {
        value: out.value.max(0.0),
        unit: LogBase::Nats,
        optimal_basis: basis,
        optimizer_stats: out.stats,
        converged: out.converged,
        route,
    }
}

fn check_block(modes: usize, block: &[usize]) -> Result<()> {
    if block.is_empty() {
        return Err(Error::Validation("empty measured block".into()));
    }
    if block.len() > MAX_BLOCK_MODES {
        return Err(Error::Capability(format!(
            "search over U(2^{}) is not supported; blocks are limited to {MAX_BLOCK_MODES} modes",
            block.len()
        )));
    }
    for &m in block {
        crate::fock::check_mode(m, modes)?;
    }
    Ok(())
}

fn block_mask(modes: usize, block: &[usize]) -> usize {
    block.iter().fold(0, |acc, &m| acc | mode_bit(m, modes))
}

/// Apply the local unitaries of a partition to `ρ`.
fn apply_locals(rho: &CMatrix, modes: usize, blocks: &[Vec<usize>], us: &[CMatrix]) -> CMatrix {
    let mut m = rho.clone();
    for (block, u) in blocks.iter().zip(us) {
        if block.len() == 1 {
            rotate_mode(&mut m, mode_bit(block[0], modes), u);
        } else {
            // blocks were validated by the caller
            let w = embed_local(u, block, modes).expect("validated block");
            m = conjugate(&w, &m);
        }
    }
    m
}

/// One-way work deficit: minimum over rank-1 projective
/// measurements on the modes `a` of `S(Π^A(ρ)) − S(ρ)`.
pub fn one_way_deficit(
    rho: &DensityMatrix,
    a: &[usize],
    cfg: &OptimizerConfig,
) -> Result<QuantifierResult> {
    let modes = state_modes(rho)?;
    check_block(modes, a)?;
    let blocks = vec![a.to_vec()];
    search_local_blocks(rho, modes, &blocks, cfg)
}

/// Multipartite relative entropy of quantumness over a partition of
/// measured mode blocks.
pub fn mreq(
    rho: &DensityMatrix,
    partition: &ModePartition,
    cfg: &OptimizerConfig,
) -> Result<QuantifierResult> {
    let modes = state_modes(rho)?;
    if partition.modes() != modes {
        return Err(Error::Shape("partition and state mode counts differ".into()));
    }
    for b in partition.blocks() {
        check_block(modes, b)?;
    }
    search_local_blocks(rho, modes, partition.blocks(), cfg)
}

fn search_local_blocks(
    rho: &DensityMatrix,
    modes: usize,
    blocks: &[Vec<usize>],
    cfg: &OptimizerConfig,
) -> Result<QuantifierResult> {
    let s_rho = von_neumann_entropy(rho)?;
    let mask = blocks.iter().fold(0, |acc, b| acc | block_mask(modes, b));
    let dephasing = DephasingBlocks::new(rho.dim(), mask, false);
    let dims: Vec<usize> = blocks.iter().map(|b| 1usize << b.len()).collect();
    let m = rho.matrix();
    let objective = |us: &[CMatrix]| dephasing.entropy(&apply_locals(m, modes, blocks, us)) - s_rho;
    let out = minimize_unitaries(&dims, objective, cfg, None);
    let basis = OptimalBasis {
        single_particle: None,
        local: blocks
            .iter()
            .zip(&out.point)
            .map(|(b, u)| LocalUnitary {
                modes: b.clone(),
                unitary: u.clone(),
            })
            .collect(),
    };
    Ok(finish(out, basis, EvaluationRoute::Direct))
}

/// Closed form `S(Σ_± P_± ρ P_±) − S(ρ)` with the occupation
/// projectors of mode `j`. Valid for states in a single parity sector.
pub fn single_mode_deficit_symmetric(rho: &DensityMatrix, j: usize) -> Result<f64> {
    let modes = state_modes(rho)?;
    crate::fock::check_mode(j, modes)?;
    require_parity_sector(rho, "the symmetric single-mode deficit")?;
    let blocks = DephasingBlocks::new(rho.dim(), mode_bit(j, modes), false);
    Ok((blocks.entropy(rho.matrix()) - von_neumann_entropy(rho)?).max(0.0))
}

/// `H{p(l⃗)} − S(ρ)` with `p` the occupation-basis diagonal: the value of the
/// full occupation dephasing in the current mode basis.
pub fn occupation_quantumness(rho: &DensityMatrix) -> Result<f64> {
    Ok((diagonal_entropy(rho.matrix()) - von_neumann_entropy(rho)?).max(0.0))
}

/// One-body density matrix `γ_ij = Tr(ρ a†_j a_i)`.
pub fn one_body_density(rho: &DensityMatrix) -> Result<CMatrix> {
    let modes = state_modes(rho)?;
    let a: Vec<CMatrix> = (1..=modes).map(|j| annihilation_matrix(modes, j)).collect();
    Ok(CMatrix::from_fn(modes, modes, |i, j| {
        linalg::trace(&(rho.matrix() * a[j].adjoint() * &a[i]))
    }))
}

/// Quantumness of indistinguishable particles `Q_p^∅`: the occupation
/// dephasing in the best single-particle basis.
pub fn q_particles(rho: &DensityMatrix, cfg: &OptimizerConfig) -> Result<QuantifierResult> {
    q_particles_warm(rho, cfg, None)
}

/// [`q_particles`] with an optional warm start replacing the first restart.
pub fn q_particles_warm(
    rho: &DensityMatrix,
    cfg: &OptimizerConfig,
    warm: Option<&OptimalBasis>,
) -> Result<QuantifierResult> {
    let modes = state_modes(rho)?;
    let s_rho = von_neumann_entropy(rho)?;
    let table = SectorTable::new(modes);
    let warm_u = warm
        .and_then(|w| w.single_particle.as_ref())
        .map(|u| u.matrix().clone());
    if parity_sector(rho).is_some() {
        // Γ(U) is block diagonal in particle number, so only the same-number
        // blocks of ρ reach the diagonal.
        let blocks: Vec<(usize, CMatrix)> = (0..=modes)
            .filter_map(|n| {
                let idx = table.sector_indices(n);
                let b = CMatrix::from_fn(idx.len(), idx.len(), |r, c| rho.matrix()[(idx[r], idx[c])]);
                (linalg::trace(&b).re > 1e-14).then_some((n, b))
            })
            .collect();
        let objective = |us: &[CMatrix]| {
            let mut h = 0.0;
            for (n, b) in &blocks {
                let g = table.lift_block(&us[0], *n);
                let gb = &g * b;
                for r in 0..g.nrows() {
                    let p: f64 = (0..g.ncols()).map(|c| (gb[(r, c)] * g[(r, c)].conj()).re).sum();
                    if p > 0.0 {
                        h -= p * p.ln();
                    }
                }
            }
            h - s_rho
        };
        let out = minimize_unitaries(&[modes], objective, cfg, warm_u.map(|u| vec![u]));
        let basis = OptimalBasis {
            single_particle: Some(SingleParticleUnitary::from_trusted(out.point[0].clone())),
            local: Vec::new(),
        };
        return Ok(finish(out, basis, EvaluationRoute::ClosedForm));
    }

    let bits: Vec<usize> = (1..=modes).map(|j| mode_bit(j, modes)).collect();
    let mut dims = vec![modes];
    dims.extend(std::iter::repeat_n(2, modes));
    let objective = |us: &[CMatrix]| {
        let g = table.lift(&us[0]);
        let mut m = conjugate(&g, rho.matrix());
        for (bit, v) in bits.iter().zip(&us[1..]) {
            rotate_mode(&mut m, *bit, v);
        }
        diagonal_entropy(&m) - s_rho
    };
    let warm_point = warm.and_then(|w| fallback_warm_point(w, modes));
    let out = minimize_unitaries(&dims, objective, cfg, warm_point);
    Ok(finish(
        out.clone(),
        fallback_basis(&out.point, modes),
        EvaluationRoute::LocalFallback,
    ))
}

fn fallback_warm_point(w: &OptimalBasis, modes: usize) -> Option<Vec<CMatrix>> {
    let u = w.single_particle.as_ref()?.matrix().clone();
    let mut point = vec![u];
    for j in 1..=modes {
        let local = w
            .local
            .iter()
            .find(|l| l.modes == [j])
            .map(|l| l.unitary.clone())
            .unwrap_or_else(|| CMatrix::identity(2, 2));
        point.push(local);
    }
    Some(point)
}

fn fallback_basis(point: &[CMatrix], modes: usize) -> OptimalBasis {
    OptimalBasis {
        single_particle: Some(SingleParticleUnitary::from_trusted(point[0].clone())),
        local: (1..=modes)
            .map(|j| LocalUnitary {
                modes: vec![j],
                unitary: point[j].clone(),
            })
            .collect(),
    }
}

/// One-body quantumness `Q_sp`: minimum over single-particle bases
/// of the summed single-mode deficits.
pub fn q_sp(rho: &DensityMatrix, cfg: &OptimizerConfig) -> Result<QuantifierResult> {
    q_sp_warm(rho, cfg, None)
}

pub fn q_sp_warm(
    rho: &DensityMatrix,
    cfg: &OptimizerConfig,
    warm: Option<&OptimalBasis>,
) -> Result<QuantifierResult> {
    let modes = state_modes(rho)?;
    let s_rho = von_neumann_entropy(rho)?;
    let table = SectorTable::new(modes);
    let lf = modes as f64;
    let bits: Vec<usize> = (1..=modes).map(|j| mode_bit(j, modes)).collect();
    if parity_sector(rho).is_some() {
        let dephasing: Vec<DephasingBlocks> = bits
            .iter()
            .map(|&b| DephasingBlocks::new(rho.dim(), b, true))
            .collect();
        let objective = |us: &[CMatrix]| {
            let m = conjugate(&table.lift(&us[0]), rho.matrix());
            dephasing.iter().map(|d| d.entropy(&m)).sum::<f64>() - lf * s_rho
        };
        let warm_u = warm
            .and_then(|w| w.single_particle.as_ref())
            .map(|u| vec![u.matrix().clone()]);
        let out = minimize_unitaries(&[modes], objective, cfg, warm_u);
        let basis = OptimalBasis {
            single_particle: Some(SingleParticleUnitary::from_trusted(out.point[0].clone())),
            local: Vec::new(),
        };
        return Ok(finish(out, basis, EvaluationRoute::ClosedForm));
    }

    let dephasing: Vec<DephasingBlocks> = bits
        .iter()
        .map(|&b| DephasingBlocks::new(rho.dim(), b, false))
        .collect();
    let mut dims = vec![modes];
    dims.extend(std::iter::repeat_n(2, modes));
    let objective = |us: &[CMatrix]| {
        let m = conjugate(&table.lift(&us[0]), rho.matrix());
        let mut total = 0.0;
        for ((bit, v), d) in bits.iter().zip(&us[1..]).zip(&dephasing) {
            let mut mj = m.clone();
            rotate_mode(&mut mj, *bit, v);
            total += d.entropy(&mj);
        }
        total - lf * s_rho
    };
    let warm_point = warm.and_then(|w| fallback_warm_point(w, modes));
    let out = minimize_unitaries(&dims, objective, cfg, warm_point);
    Ok(finish(
        out.clone(),
        fallback_basis(&out.point, modes),
        EvaluationRoute::LocalFallback,
    ))
}

/// Classically correlated state `Γ(U) [Σ_l p(l) |l⟩⟨l|] Γ(U)†`.
pub fn classical_state(
    basis: &FockBasis,
    p: &ProbabilityVector,
    u: &SingleParticleUnitary,
) -> Result<DensityMatrix> {
    if p.len() != basis.dim() {
        return Err(Error::Shape(format!(
            "{} probabilities for a {}-dimensional Fock space",
            p.len(),
            basis.dim()
        )));
    }
    if u.modes() != basis.modes() {
        return Err(Error::Shape("unitary and basis mode counts differ".into()));
    }
    let g = SectorTable::new(basis.modes()).lift(u.matrix());
    let d = CMatrix::from_diagonal(&crate::linalg::CVector::from_iterator(
        p.len(),
        p.values().iter().map(|&x| C64::new(x, 0.0)),
    ));
    DensityMatrix::new(linalg::hermitian_part(&conjugate(&g, &d)))
}

/// Measurement-basis rotation `V_S` of the activation protocol.
#[derive(Debug, Clone, PartialEq)]
pub enum ActivationBasis {
    /// `V_S = Γ(V)`.
    SingleParticle(SingleParticleUnitary),
    /// Arbitrary Fock-space unitary.
    Fock(CMatrix),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntanglementFunctional {
    Negativity,
    /// Entropy of entanglement in nats; pure inputs only.
    EntropyOfEntanglement,
}

/// Entanglement between system and apparatus after the copying interaction
/// `|k⟩_S|0⟩_M → |k⟩_S|k⟩_M` applied to `V_S ρ V_S†`.
///
/// `V_S` maps the measurement basis onto the occupation basis: for
/// `classical_state(p, U)` the activation-free choice is `V = U†`.
pub fn activation_entanglement(
    rho: &DensityMatrix,
    v: &ActivationBasis,
    functional: EntanglementFunctional,
) -> Result<f64> {
    let modes = state_modes(rho)?;
    let d = rho.dim();
    let w = match v {
        ActivationBasis::SingleParticle(u) => {
            if u.modes() != modes {
                return Err(Error::Shape("unitary and state mode counts differ".into()));
            }
            SectorTable::new(modes).lift(u.matrix())
        }
        ActivationBasis::Fock(w) => {
            if w.nrows() != d || w.ncols() != d {
                return Err(Error::Shape("V_S does not act on the state's space".into()));
            }
            if linalg::unitarity_defect(w) > 1e-10 {
                return Err(Error::Validation("V_S is not unitary".into()));
            }
            w.clone()
        }
    };
    if functional == EntanglementFunctional::EntropyOfEntanglement
        && rho.purity() < 1.0 - quantinfo::STATE_TOL
    {
        return Err(Error::Capability(
            "entropy of entanglement is only defined here for pure inputs; use negativity".into(),
        ));
    }
    let sigma = conjugate(&w, rho.matrix());
    // ρ̃ = Σ_kl σ_kl |k⟩⟨l|_S ⊗ |k⟩⟨l|_M, system modes first
    let mut copied = CMatrix::zeros(d * d, d * d);
    for l in 0..d {
        for k in 0..d {
            copied[(k * d + k, l * d + l)] = sigma[(k, l)];
        }
    }
    let total = 2 * modes;
    match functional {
        EntanglementFunctional::Negativity => {
            let apparatus: Vec<usize> = (modes + 1..=total).collect();
            negativity_of(&copied, total, &apparatus)
        }
        EntanglementFunctional::EntropyOfEntanglement => {
            let system: Vec<usize> = (1..=modes).collect();
            let reduced = quantinfo::partial_trace_matrix(&copied, total, &system)?;
            Ok(quantinfo::entropy_of_eigenvalues(&quantinfo::clipped_spectrum(&reduced)?))
        }
    }
}

/// `(‖ρ^{T_B}‖₁ − 1)/2` with `B` the listed modes.
pub(crate) fn negativity_of(m: &CMatrix, modes: usize, transposed: &[usize]) -> Result<f64> {
    let pt = quantinfo::partial_transpose(m, modes, transposed)?;
    Ok(((linalg::trace_norm_hermitian(&pt) - 1.0) / 2.0).max(0.0))
}

/// Symmetry used to block-decompose a state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Symmetry {
    Parity,
    ParticleNumber,
}

impl Symmetry {
    fn label(self, index: usize) -> usize {
        match self {
            Symmetry::Parity => parity_of(index),
            Symmetry::ParticleNumber => index.count_ones() as usize,
        }
    }

    fn labels(self, modes: usize) -> usize {
        match self {
            Symmetry::Parity => 2,
            Symmetry::ParticleNumber => modes + 1,
        }
    }

    fn eigenvalue(self, label: usize) -> f64 {
        match self {
            Symmetry::Parity => {
                if label == 0 {
                    1.0
                } else {
                    -1.0
                }
            }
            Symmetry::ParticleNumber => label as f64,
        }
    }

    /// Diagonal operator `Θ` on the Fock space.
    pub fn operator(self, modes: usize) -> CMatrix {
        let dim = 1usize << modes;
        CMatrix::from_fn(dim, dim, |r, c| {
            if r == c {
                C64::new(self.eigenvalue(self.label(r)), 0.0)
            } else {
                ZERO
            }
        })
    }
}

/// Block decomposition `ρ = Σ_j q_j ρ_j` of a symmetric state together with
/// its image `ρ_SX = Σ_j q_j ρ_j ⊗ |θ_j⟩⟨θ_j|` under the labelling isometry.
#[derive(Debug, Clone)]
pub struct SymmetryBlockDecomposition {
    pub symmetry: Symmetry,
    pub eigenvalues: Vec<f64>,
    pub degeneracies: Vec<usize>,
    pub weights: Vec<f64>,
    /// Normalized block states embedded in the full space; `None` for empty blocks.
    pub states: Vec<Option<DensityMatrix>>,
    /// `ρ_SX`, system index major: row `s·N + j`.
    pub extended: CMatrix,
}

impl SymmetryBlockDecomposition {
    pub fn new(rho: &DensityMatrix, symmetry: Symmetry) -> Result<Self> {
        let modes = state_modes(rho)?;
        let dim = rho.dim();
        let m = rho.matrix();
        for c in 0..dim {
            for r in 0..dim {
                if symmetry.label(r) != symmetry.label(c) && m[(r, c)].norm() > SECTOR_TOL {
                    return Err(Error::Precondition(format!(
                        "state does not commute with the {symmetry:?} symmetry"
                    )));
                }
            }
        }
        let n = symmetry.labels(modes);
        let mut degeneracies = vec![0; n];
        let mut weights = vec![0.0; n];
        for i in 0..dim {
            degeneracies[symmetry.label(i)] += 1;
            weights[symmetry.label(i)] += m[(i, i)].re;
        }
        let mut extended = CMatrix::zeros(dim * n, dim * n);
        let mut states = Vec::with_capacity(n);
        for (j, &q) in weights.iter().enumerate() {
            if q <= quantinfo::EPS_EIG {
                states.push(None);
                continue;
            }
            let block = CMatrix::from_fn(dim, dim, |r, c| {
                if symmetry.label(r) == j && symmetry.label(c) == j {
                    m[(r, c)] / q
                } else {
                    ZERO
                }
            });
            for c in 0..dim {
                for r in 0..dim {
                    extended[(r * n + j, c * n + j)] = block[(r, c)] * q;
                }
            }
            states.push(Some(DensityMatrix::new(block)?));
        }
        Ok(Self {
            symmetry,
            eigenvalues: (0..n).map(|j| symmetry.eigenvalue(j)).collect(),
            degeneracies,
            weights,
            states,
            extended,
        })
    }

    /// Labels of the blocks carrying weight.
    pub fn support(&self) -> Vec<usize> {
        (0..self.weights.len())
            .filter(|&j| self.states[j].is_some() && self.weights[j] > SECTOR_TOL)
            .collect()
    }

    /// `S(ρ_SX ‖ (P ⊗ P^θ)(ρ_SX))` for a system measurement `P` that is
    /// applied inside every symmetry block.
    pub fn extended_disturbance(&self, p: &ProjectiveMeasurement) -> Result<f64> {
        let n = self.weights.len();
        let dim = self.extended.nrows() / n;
        let mut dephased = CMatrix::zeros(dim * n, dim * n);
        for (j, state) in self.states.iter().enumerate() {
            if let Some(s) = state {
                let b = p.dephase_matrix(s.matrix())?;
                for c in 0..dim {
                    for r in 0..dim {
                        dephased[(r * n + j, c * n + j)] = b[(r, c)] * self.weights[j];
                    }
                }
            }
        }
        relative_entropy(
            &DensityMatrix::new(self.extended.clone())?,
            &DensityMatrix::new(dephased)?,
        )
    }

    /// `Σ_j q_j S(ρ_j ‖ P(ρ_j))`.
    pub fn weighted_block_disturbance(&self, p: &ProjectiveMeasurement) -> Result<f64> {
        let mut total = 0.0;
        for (state, &q) in self.states.iter().zip(&self.weights) {
            if let Some(s) = state {
                total += q * crate::measurement::disturbance(s, p)?;
            }
        }
        Ok(total)
    }
}

/// Outcome of comparing symmetric and non-symmetric local measurements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    /// Smallest disturbance over symmetric measurements (nats).
    pub symmetric: f64,
    /// Smallest disturbance over the sampled Haar measurements (nats).
    pub min_sampled: f64,
    pub margin: f64,
    pub samples: usize,
    pub nonnegative: bool,
    pub sector_weights: Vec<f64>,
}

/// Symmetric-measurement check on a state supported on one eigenvalue block of `symmetry`:
/// the best symmetric local measurement on `measured` disturbs the state no
/// more than any of `n_samples` Haar-random local measurements.
pub fn lemma_inequality_check(
    rho: &DensityMatrix,
    measured: &[usize],
    symmetry: Symmetry,
    n_samples: usize,
    seed: u64,
) -> Result<LemmaReport> {
    let decomposition = SymmetryBlockDecomposition::new(rho, symmetry)?;
    if decomposition.support().len() != 1 {
        return Err(Error::Precondition(
            "state populates more than one symmetry block".into(),
        ));
    }
    disturbance_comparison(rho, measured, symmetry, n_samples, seed)
}

/// The comparison of [`lemma_inequality_check`] without the single-block
/// precondition; on states spread over several blocks the report may be
/// negative.
pub fn disturbance_comparison(
    rho: &DensityMatrix,
    measured: &[usize],
    symmetry: Symmetry,
    n_samples: usize,
    seed: u64,
) -> Result<LemmaReport> {
    let decomposition = SymmetryBlockDecomposition::new(rho, symmetry)?;
    let modes = state_modes(rho)?;
    check_block(modes, measured)?;
    let s_rho = von_neumann_entropy(rho)?;
    let dephasing = DephasingBlocks::new(rho.dim(), block_mask(modes, measured), false);
    let m = rho.matrix();
    let blocks = vec![measured.to_vec()];
    let value = |u: &CMatrix| -> f64 {
        dephasing.entropy(&apply_locals(m, modes, &blocks, std::slice::from_ref(u))) - s_rho
    };

    // symmetric local unitaries are block diagonal over the local labels
    let k = measured.len();
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); symmetry.labels(k)];
    for i in 0..1usize << k {
        groups[symmetry.label(i)].push(i);
    }
    groups.retain(|g| !g.is_empty());
    let symmetric = if groups.iter().all(|g| g.len() == 1) {
        value(&CMatrix::identity(1 << k, 1 << k))
    } else {
        let dims: Vec<usize> = groups.iter().map(|g| g.len()).collect();
        let assemble = |us: &[CMatrix]| {
            let mut u = CMatrix::zeros(1 << k, 1 << k);
            for (g, b) in groups.iter().zip(us) {
                for (r, &gr) in g.iter().enumerate() {
                    for (c, &gc) in g.iter().enumerate() {
                        u[(gr, gc)] = b[(r, c)];
                    }
                }
            }
            u
        };
        let cfg = OptimizerConfig::default().with_seed(seed).with_restarts(8);
        minimize_unitaries(&dims, |us| value(&assemble(us)), &cfg, None).value
    }
    .max(0.0);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_sampled = f64::INFINITY;
    for _ in 0..n_samples {
        let u = linalg::haar_unitary(1 << k, &mut rng);
        min_sampled = min_sampled.min(value(&u));
    }
    let margin = min_sampled - symmetric;
    Ok(LemmaReport {
        symmetric,
        min_sampled,
        margin,
        samples: n_samples,
        nonnegative: margin >= -1e-8,
        sector_weights: decomposition.weights,
    })
}

/// `Γ(U) ρ Γ(U)†` through the matrix-exponential lift.
pub fn rotate_state(rho: &DensityMatrix, u: &SingleParticleUnitary) -> Result<DensityMatrix> {
    let modes = state_modes(rho)?;
    let basis = FockBasis::new(modes)?;
    let g = bogoliubov_lift(&basis, u)?;
    Ok(rho.conjugate_by(g.matrix()))
}
