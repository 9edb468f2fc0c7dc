//! Entanglement comparators for two fermions: concurrence through the
//! ε-tensor dual, partial-transpose negativity across a mode cut, and a
//! shifted negativity that vanishes on Slater determinants.

use crate::error::{Error, Result};
use crate::fock::{check_mode, mode_bit, SectorTable};
use crate::linalg::{self, CMatrix, C64};
use crate::optimize::{minimize_unitaries, OptimizerConfig};
use crate::quantifiers::{negativity_of, number_sector};
use crate::quantinfo::DensityMatrix;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntanglementKind {
    Concurrence,
    Negativity,
    ShiftedNegativity,
    MinimizedNegativity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntanglementValue {
    pub value: f64,
    pub quantifier: EntanglementKind,
    /// Partially transposed modes, for the negativities on a mode cut.
    pub cut: Option<Vec<usize>>,
    /// Set when the value comes out of a basis search.
    pub converged: Option<bool>,
}

impl EntanglementValue {
    fn new(value: f64, quantifier: EntanglementKind) -> Self {
        Self {
            value: value.max(0.0),
            quantifier,
            cut: None,
            converged: None,
        }
    }
}

/// Two-particle configurations in lexicographic order (12,13,14,23,24,34)
/// as zero-based mode pairs.
pub const PAIR_ORDER: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

fn pair_index(modes: usize, (i, j): (usize, usize)) -> usize {
    mode_bit(i + 1, modes) | mode_bit(j + 1, modes)
}

/// The ε-tensor duality on the two-particle sector of four modes in
/// [`PAIR_ORDER`]: `(Dc)_{ij} = ½ Σ ε_{ijkl} c_{kl}`.
pub fn dual_matrix() -> CMatrix {
    let mut d = CMatrix::zeros(6, 6);
    for (a, b, s) in [(0, 5, 1.0), (1, 4, -1.0), (2, 3, 1.0)] {
        d[(a, b)] = C64::new(s, 0.0);
        d[(b, a)] = C64::new(s, 0.0);
    }
    d
}

fn require_sector(rho: &DensityMatrix, particles: usize, what: &str) -> Result<usize> {
    let modes = rho
        .modes()
        .ok_or_else(|| Error::Shape("state is not on a Fock space".into()))?;
    if number_sector(rho) != Some(particles) {
        return Err(Error::Precondition(format!(
            "{what} needs a state supported on the {particles}-particle sector"
        )));
    }
    Ok(modes)
}

/// Concurrence of two fermions in four modes,
/// `max(0, λ₁ − λ₂ − … − λ₆)` with `λ` the decreasing square roots of the
/// eigenvalues of `ρ ρ̃`, `ρ̃ = D ρ* D`.
pub fn fermionic_concurrence(rho: &DensityMatrix) -> Result<EntanglementValue> {
    let modes = require_sector(rho, 2, "the fermionic concurrence")?;
    if modes != 4 {
        return Err(Error::Precondition(format!(
            "the concurrence is defined here for four modes, got {modes}"
        )));
    }
    let idx: Vec<usize> = PAIR_ORDER.iter().map(|&p| pair_index(4, p)).collect();
    let s = CMatrix::from_fn(6, 6, |r, c| rho.matrix()[(idx[r], idx[c])]);
    // λ_i are the singular values of √ρ √ρ̃ with √ρ̃ = D √ρ* D; the trailing
    // D is unitary and dropped, which avoids square roots of round-off
    let eig = linalg::hermitian_part(&s).symmetric_eigen();
    let sqrt_diag = CMatrix::from_diagonal(
        &eig.eigenvalues.map(|x| C64::new(x.max(0.0).sqrt(), 0.0)),
    );
    let root = &eig.eigenvectors * sqrt_diag * eig.eigenvectors.adjoint();
    let x = &root * dual_matrix() * root.map(|z| z.conj());
    let mut lambdas: Vec<f64> = x.singular_values().iter().copied().collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    let c = lambdas[0] - lambdas[1..].iter().sum::<f64>();
    Ok(EntanglementValue::new(c, EntanglementKind::Concurrence))
}

/// `(‖ρ^{T_A}‖₁ − 1)/2` with `A` the listed modes, in the current mode basis.
pub fn mode_negativity(rho: &DensityMatrix, transposed: &[usize]) -> Result<EntanglementValue> {
    let modes = rho
        .modes()
        .ok_or_else(|| Error::Shape("state is not on a Fock space".into()))?;
    for &m in transposed {
        check_mode(m, modes)?;
    }
    let mut v = EntanglementValue::new(
        negativity_of(rho.matrix(), modes, transposed)?,
        EntanglementKind::Negativity,
    );
    v.cut = Some(transposed.to_vec());
    Ok(v)
}

/// Shifted negativity of a two-particle state.
///
/// The state is written in first quantization on the antisymmetric subspace
/// of `C^L ⊗ C^L`; the negativity across the particle cut is shifted by its
/// Slater-determinant value `1/2`: `max(0, (‖ρ^{T₂}‖₁ − 2)/2)`. It is
/// invariant under single-particle unitaries, vanishes on mixtures of Slater
/// determinants and equals the concurrence on pure states.
pub fn shifted_negativity(rho: &DensityMatrix) -> Result<EntanglementValue> {
    let modes = require_sector(rho, 2, "the shifted negativity")?;
    let table = SectorTable::new(modes);
    let idx = table.sector_indices(2);
    let occ: Vec<(usize, usize)> = idx
        .iter()
        .map(|&i| {
            let occupied: Vec<usize> = (0..modes).filter(|&k| i & mode_bit(k + 1, modes) != 0).collect();
            (occupied[0], occupied[1])
        })
        .collect();
    // |ij⟩_Fock ↦ (|i⟩|j⟩ − |j⟩|i⟩)/√2
    let n = modes * modes;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut iso = CMatrix::zeros(n, idx.len());
    for (k, &(i, j)) in occ.iter().enumerate() {
        iso[(i * modes + j, k)] = C64::new(h, 0.0);
        iso[(j * modes + i, k)] = C64::new(-h, 0.0);
    }
    let s = CMatrix::from_fn(idx.len(), idx.len(), |r, c| rho.matrix()[(idx[r], idx[c])]);
    let first = &iso * s * iso.adjoint();
    // transpose the second particle
    let pt = CMatrix::from_fn(n, n, |r, c| {
        let (r1, r2) = (r / modes, r % modes);
        let (c1, c2) = (c / modes, c % modes);
        first[(r1 * modes + c2, c1 * modes + r2)]
    });
    let norm = linalg::trace_norm_hermitian(&pt);
    Ok(EntanglementValue::new(
        (norm - 2.0) / 2.0,
        EntanglementKind::ShiftedNegativity,
    ))
}

/// Mode negativity across `transposed`, minimized over single-particle bases.
pub fn min_mode_negativity(
    rho: &DensityMatrix,
    transposed: &[usize],
    cfg: &OptimizerConfig,
) -> Result<EntanglementValue> {
    let modes = rho
        .modes()
        .ok_or_else(|| Error::Shape("state is not on a Fock space".into()))?;
    for &m in transposed {
        check_mode(m, modes)?;
    }
    let table = SectorTable::new(modes);
    let m = rho.matrix();
    let objective = |us: &[CMatrix]| {
        let g = table.lift(&us[0]);
        negativity_of(&(&g * m * g.adjoint()), modes, transposed).unwrap_or(f64::INFINITY)
    };
    let out = minimize_unitaries(&[modes], objective, cfg, None);
    let mut v = EntanglementValue::new(out.value, EntanglementKind::MinimizedNegativity);
    v.cut = Some(transposed.to_vec());
    v.converged = Some(out.converged);
    Ok(v)
}

/// Balanced cut `{1, …, ⌊L/2⌋}`.
pub fn balanced_cut(modes: usize) -> Vec<usize> {
    (1..=modes / 2).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{apply_creations, FockBasis, SingleParticleUnitary};
    use crate::linalg::ZERO;
    use crate::quantinfo::PureState;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pure(basis: &FockBasis, terms: &[(&[usize], f64)]) -> DensityMatrix {
        let mut v = basis.vacuum() * ZERO;
        for (modes, w) in terms {
            v += apply_creations(basis, modes).unwrap() * C64::new(*w, 0.0);
        }
        PureState::normalized(v).unwrap().density_matrix()
    }

    #[test]
    fn dual_matrix_is_a_real_symmetric_involution() {
        let d = dual_matrix();
        assert!(linalg::max_abs(&(&d * &d - CMatrix::identity(6, 6))) < 1e-15);
        assert!(linalg::max_abs(&(&d - d.transpose())) < 1e-15);
    }

    #[test]
    fn concurrence_examples() {
        let b = FockBasis::new(4).unwrap();
        let slater = pure(&b, &[(&[1, 3], 1.0)]);
        assert!(fermionic_concurrence(&slater).unwrap().value < 1e-12);
        let max = pure(&b, &[(&[1, 2], 1.0), (&[3, 4], 1.0)]);
        assert!((fermionic_concurrence(&max).unwrap().value - 1.0).abs() < 1e-12);
        let outside = pure(&b, &[(&[1], 1.0)]);
        assert!(matches!(
            fermionic_concurrence(&outside),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn shifted_negativity_examples() {
        let b = FockBasis::new(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = SingleParticleUnitary::haar(4, &mut rng);
        let g = crate::fock::lift_by_minors(&b, &u).unwrap();
        let slater = pure(&b, &[(&[2, 3], 1.0)]).conjugate_by(g.matrix());
        assert!(shifted_negativity(&slater).unwrap().value < 1e-12);
        let max = pure(&b, &[(&[1, 2], 1.0), (&[3, 4], 1.0)]);
        assert!((shifted_negativity(&max).unwrap().value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mode_negativity_of_bell_like_pair() {
        let b = FockBasis::new(2).unwrap();
        let rho = pure(&b, &[(&[1], 1.0), (&[2], 1.0)]);
        assert!((mode_negativity(&rho, &[2]).unwrap().value - 0.5).abs() < 1e-12);
        let product = pure(&b, &[(&[1], 1.0)]);
        assert!(mode_negativity(&product, &[2]).unwrap().value < 1e-12);
    }
}
