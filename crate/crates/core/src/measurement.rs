//! Local projective measurements on modes and the dephasing maps they induce.
//!
//! A measurement on a set of modes is stored either as an explicit list of
//! projectors or, for rank-1 local measurements, as a unitary `W` followed by
//! dephasing in the occupation basis of the measured modes. The projectors of
//! the second form are `W† (|m⟩⟨m| ⊗ I) W`.

use crate::error::{Error, Result};
use crate::fock::{check_mode, mode_bit, parity_of, FockBasis};
use crate::linalg::{self, CMatrix, C64, ZERO};
use crate::quantinfo::{self, DensityMatrix};

const MEASUREMENT_TOL: f64 = 1e-10;

/// Disjoint blocks of modes; the union is the measured set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModePartition {
    modes: usize,
    blocks: Vec<Vec<usize>>,
}

impl ModePartition {
    pub fn new(modes: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; modes + 1];
        for block in &blocks {
            if block.is_empty() {
                return Err(Error::Validation("empty block in mode partition".into()));
            }
            for &m in block {
                check_mode(m, modes)?;
                if seen[m] {
                    return Err(Error::Validation(format!("mode {m} appears in two blocks")));
                }
                seen[m] = true;
            }
        }
        Ok(Self { modes, blocks })
    }

    /// Every mode in its own block.
    pub fn singletons(modes: usize) -> Self {
        Self {
            modes,
            blocks: (1..=modes).map(|m| vec![m]).collect(),
        }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Measured modes, ascending.
    pub fn measured(&self) -> Vec<usize> {
        let mut m: Vec<usize> = self.blocks.iter().flatten().copied().collect();
        m.sort_unstable();
        m
    }
}

/// Angles of the single-mode basis `cos φ |0⟩ + e^{iθ} sin φ |1⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectorAngles {
    phi: f64,
    theta: f64,
}

impl ProjectorAngles {
    pub fn new(phi: f64, theta: f64) -> Result<Self> {
        use std::f64::consts::PI;
        if !(0.0..=PI).contains(&phi) || !(0.0..2.0 * PI).contains(&theta) {
            return Err(Error::Validation(format!(
                "angles (φ={phi}, θ={theta}) outside [0,π]×[0,2π)"
            )));
        }
        Ok(Self { phi, theta })
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Rows `⟨ψ₁|` and `⟨ψ₂|`: maps the measurement basis onto `|0⟩, |1⟩`.
    pub fn rotation(&self) -> CMatrix {
        angle_rotation(self.phi, self.theta)
    }
}

pub(crate) fn angle_rotation(phi: f64, theta: f64) -> CMatrix {
    let (s, c) = phi.sin_cos();
    let e = C64::from_polar(1.0, theta);
    // ψ₁ = (c, e s), ψ₂ = (−e* s, c)
    CMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(c, 0.0),
            e.conj() * s,
            -e * s,
            C64::new(c, 0.0),
        ],
    )
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Explicit(Vec<CMatrix>),
    Rotated { unitary: Option<CMatrix>, mask: usize },
}

/// Orthogonal, complete set of projectors.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveMeasurement {
    dim: usize,
    kind: Kind,
}

impl ProjectiveMeasurement {
    /// Validates `Π_m Π_n = δ_mn Π_m` and `Σ Π_m = I` to 1e−10.
    pub fn from_projectors(projectors: Vec<CMatrix>) -> Result<Self> {
        let dim = projectors
            .first()
            .map(|p| p.nrows())
            .ok_or_else(|| Error::Measurement("no projectors".into()))?;
        let mut sum = CMatrix::zeros(dim, dim);
        for (m, pm) in projectors.iter().enumerate() {
            if pm.nrows() != dim || pm.ncols() != dim {
                return Err(Error::Measurement("projectors of different sizes".into()));
            }
            for (n, pn) in projectors.iter().enumerate() {
                let prod = pm * pn;
                let expect = if m == n { pm.clone() } else { CMatrix::zeros(dim, dim) };
                if linalg::max_abs(&(prod - expect)) > MEASUREMENT_TOL {
                    return Err(Error::Measurement(format!(
                        "projectors {m} and {n} violate Π_m Π_n = δ_mn Π_m"
                    )));
                }
            }
            sum += pm;
        }
        if linalg::max_abs(&(sum - CMatrix::identity(dim, dim))) > MEASUREMENT_TOL {
            return Err(Error::Measurement("projectors do not sum to the identity".into()));
        }
        Ok(Self {
            dim,
            kind: Kind::Explicit(projectors),
        })
    }

    /// The trivial measurement `{I}`.
    pub fn trivial(dim: usize) -> Self {
        Self {
            dim,
            kind: Kind::Explicit(vec![CMatrix::identity(dim, dim)]),
        }
    }

    /// Occupation-basis measurement of the listed modes.
    pub fn occupation(modes: usize, measured: &[usize]) -> Result<Self> {
        Ok(Self {
            dim: 1 << modes,
            kind: Kind::Rotated {
                unitary: None,
                mask: mode_mask(modes, measured)?,
            },
        })
    }

    /// Measurement with projectors `W† (|m⟩⟨m| ⊗ I) W`, `W` a full-space unitary.
    pub fn rotated(modes: usize, unitary: CMatrix, measured: &[usize]) -> Result<Self> {
        let dim = 1usize << modes;
        if unitary.nrows() != dim || unitary.ncols() != dim {
            return Err(Error::Shape("rotation does not act on the full Fock space".into()));
        }
        if linalg::unitarity_defect(&unitary) > MEASUREMENT_TOL {
            return Err(Error::Measurement("rotation is not unitary".into()));
        }
        Ok(Self {
            dim,
            kind: Kind::Rotated {
                unitary: Some(unitary),
                mask: mode_mask(modes, measured)?,
            },
        })
    }

    /// Rank-1 measurement of `block` in the basis given by the rows of `block_unitary`.
    pub fn local(modes: usize, block: &[usize], block_unitary: &CMatrix) -> Result<Self> {
        let w = embed_local(block_unitary, block, modes)?;
        Self::rotated(modes, w, block)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Explicit projectors. Rotated measurements enumerate the outcome
    /// patterns of the measured modes in ascending order.
    pub fn projectors(&self) -> Vec<CMatrix> {
        match &self.kind {
            Kind::Explicit(p) => p.clone(),
            Kind::Rotated { unitary, mask } => {
                let mut patterns: Vec<usize> = (0..self.dim).map(|i| i & mask).collect();
                patterns.sort_unstable();
                patterns.dedup();
                patterns
                    .into_iter()
                    .map(|pat| {
                        let mut p = CMatrix::zeros(self.dim, self.dim);
                        for i in (0..self.dim).filter(|i| i & mask == pat) {
                            p[(i, i)] = C64::new(1.0, 0.0);
                        }
                        match unitary {
                            Some(w) => w.adjoint() * p * w,
                            None => p,
                        }
                    })
                    .collect()
            }
        }
    }

    /// `Σ_m Π_m M Π_m` for an arbitrary matrix.
    pub fn dephase_matrix(&self, m: &CMatrix) -> Result<CMatrix> {
        if m.nrows() != self.dim || m.ncols() != self.dim {
            return Err(Error::Shape(format!(
                "measurement acts on dimension {}, state has {}",
                self.dim,
                m.nrows()
            )));
        }
        Ok(match &self.kind {
            Kind::Explicit(ps) => ps.iter().fold(CMatrix::zeros(self.dim, self.dim), |acc, p| {
                acc + p * m * p
            }),
            Kind::Rotated { unitary, mask } => match unitary {
                Some(w) => {
                    let rotated = w * m * w.adjoint();
                    w.adjoint() * mask_coherences(&rotated, *mask) * w
                }
                None => mask_coherences(m, *mask),
            },
        })
    }
}

fn mode_mask(modes: usize, measured: &[usize]) -> Result<usize> {
    let mut mask = 0;
    for &m in measured {
        check_mode(m, modes)?;
        mask |= mode_bit(m, modes);
    }
    Ok(mask)
}

/// Zero every entry whose row and column differ on the masked bits.
pub(crate) fn mask_coherences(m: &CMatrix, mask: usize) -> CMatrix {
    let mut out = m.clone();
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            if (r ^ c) & mask != 0 {
                out[(r, c)] = ZERO;
            }
        }
    }
    out
}

/// Embed a `2^k × 2^k` unitary acting on `block` (first listed mode most
/// significant) into the full `2^L` space as `U ⊗ I`.
pub fn embed_local(u: &CMatrix, block: &[usize], modes: usize) -> Result<CMatrix> {
    let k = block.len();
    if u.nrows() != 1 << k || u.ncols() != 1 << k {
        return Err(Error::Shape(format!(
            "block unitary is {}x{}, block has {k} modes",
            u.nrows(),
            u.ncols()
        )));
    }
    let mut mask = 0;
    for &m in block {
        check_mode(m, modes)?;
        if mask & mode_bit(m, modes) != 0 {
            return Err(Error::Validation(format!("mode {m} repeated in block")));
        }
        mask |= mode_bit(m, modes);
    }
    let local_index = |i: usize| -> usize {
        block.iter().fold(0, |acc, &m| (acc << 1) | usize::from(i & mode_bit(m, modes) != 0))
    };
    let dim = 1usize << modes;
    Ok(CMatrix::from_fn(dim, dim, |r, c| {
        if r & !mask == c & !mask {
            u[(local_index(r), local_index(c))]
        } else {
            ZERO
        }
    }))
}

/// `Σ_m Π_m ρ Π_m`.
pub fn dephase(rho: &DensityMatrix, m: &ProjectiveMeasurement) -> Result<DensityMatrix> {
    Ok(DensityMatrix::from_trusted(m.dephase_matrix(rho.matrix())?))
}

/// Occupation projectors `{a_j a†_j, a†_j a_j}` of mode `j`.
pub fn mode_projectors(basis: &FockBasis, j: usize) -> Result<ProjectiveMeasurement> {
    ProjectiveMeasurement::occupation(basis.modes(), &[j])
}

/// Projectors onto `|ψ₁(φ,θ)⟩` and `|ψ₂(φ,θ)⟩` of mode `j`, identity elsewhere.
pub fn angle_projectors(
    basis: &FockBasis,
    j: usize,
    angles: ProjectorAngles,
) -> Result<ProjectiveMeasurement> {
    ProjectiveMeasurement::local(basis.modes(), &[j], &angles.rotation())
}

/// Dephasing in the full occupation basis: keeps only `diag(ρ)`.
pub fn all_modes_occupation_dephase(rho: &DensityMatrix) -> DensityMatrix {
    let d = rho.matrix().diagonal();
    DensityMatrix::from_trusted(CMatrix::from_diagonal(&d))
}

/// Whether `‖dephase(ρ) − ρ‖_max ≤ tol`.
pub fn is_fixed_point(rho: &DensityMatrix, m: &ProjectiveMeasurement, tol: f64) -> Result<bool> {
    let out = m.dephase_matrix(rho.matrix())?;
    Ok(linalg::max_abs(&(out - rho.matrix())) <= tol)
}

/// `S(ρ‖Π(ρ))` in nats.
pub fn disturbance(rho: &DensityMatrix, m: &ProjectiveMeasurement) -> Result<f64> {
    quantinfo::relative_entropy(rho, &dephase(rho, m)?)
}

/// Index groups of the blocks of a dephased matrix, used to evaluate its
/// entropy blockwise. With `split_parity`, blocks are further split by total
/// parity, which is exact for parity-commuting matrices.
#[derive(Debug, Clone)]
pub(crate) struct DephasingBlocks {
    groups: Vec<Vec<usize>>,
}

impl DephasingBlocks {
    pub(crate) fn new(dim: usize, mask: usize, split_parity: bool) -> Self {
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); 2 * dim];
        for i in 0..dim {
            let key = 2 * (i & mask) + if split_parity { parity_of(i) } else { 0 };
            groups[key].push(i);
        }
        groups.retain(|g| !g.is_empty());
        Self { groups }
    }

    /// Entropy (nats) of the dephased matrix, from the blocks of `m`.
    pub(crate) fn entropy(&self, m: &CMatrix) -> f64 {
        self.groups
            .iter()
            .map(|g| {
                if g.len() == 1 {
                    let x = m[(g[0], g[0])].re;
                    return if x > quantinfo::EPS_EIG { -x * x.ln() } else { 0.0 };
                }
                let block = CMatrix::from_fn(g.len(), g.len(), |r, c| m[(g[r], g[c])]);
                quantinfo::block_entropy(&block)
            })
            .sum()
    }
}
