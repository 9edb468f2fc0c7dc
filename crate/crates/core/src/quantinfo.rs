//! Entropies, relative entropy, partial trace and related primitives.
//!
//! All entropies are computed in nats; [`LogBase`] converts for reporting.

use crate::error::{Error, Result};
use crate::fock::check_mode;
use crate::linalg::{self, CMatrix, CVector, C64};
use serde::{Deserialize, Serialize};

/// Eigenvalues at or below this are treated as zero when deciding supports.
pub const EPS_EIG: f64 = 1e-12;
/// Negative eigenvalues down to this value are clipped to zero.
pub const NEG_CLIP: f64 = 1e-10;
/// Tolerance for Hermiticity and unit trace of density matrices.
pub const STATE_TOL: f64 = 1e-10;

/// Reporting unit for entropic quantities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    #[default]
    Bits,
    Nats,
}

impl LogBase {
    pub fn from_nats(self, x: f64) -> f64 {
        match self {
            LogBase::Bits => x / std::f64::consts::LN_2,
            LogBase::Nats => x,
        }
    }

    pub fn to_nats(self, x: f64) -> f64 {
        match self {
            LogBase::Bits => x * std::f64::consts::LN_2,
            LogBase::Nats => x,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            LogBase::Bits => "bits",
            LogBase::Nats => "nats",
        }
    }
}

/// Nats to bits.
pub fn bits(nats: f64) -> f64 {
    LogBase::Bits.from_nats(nats)
}

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::Shape("density matrix must be square and non-empty".into()));
        }
        if !linalg::is_hermitian(&matrix, STATE_TOL) {
            return Err(Error::Validation("density matrix is not Hermitian".into()));
        }
        let tr = linalg::trace(&matrix).re;
        if !((tr - 1.0).abs() <= STATE_TOL) {
            return Err(Error::Validation(format!("trace is {tr}, expected 1")));
        }
        let min = linalg::hermitian_eigenvalues(&matrix)[0];
        if min < -NEG_CLIP {
            return Err(Error::Validation(format!(
                "density matrix has eigenvalue {min:.3e} below -{NEG_CLIP:e}"
            )));
        }
        Ok(Self { matrix })
    }

    /// Accepts a matrix produced by a trusted computation, symmetrizing it.
    pub(crate) fn from_trusted(matrix: CMatrix) -> Self {
        Self {
            matrix: linalg::hermitian_part(&matrix),
        }
    }

    pub fn from_pure(psi: &PureState) -> Self {
        let v = psi.amplitudes();
        Self {
            matrix: v * v.adjoint(),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: CMatrix::identity(dim, dim).scale(1.0 / dim as f64),
        }
    }

    /// Diagonal state with the given probabilities.
    pub fn diagonal(p: &ProbabilityVector) -> Self {
        let d = CVector::from_iterator(p.len(), p.values().iter().map(|&x| C64::new(x, 0.0)));
        Self {
            matrix: CMatrix::from_diagonal(&d),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Number of modes when the dimension is a power of two.
    pub fn modes(&self) -> Option<usize> {
        let d = self.dim();
        d.is_power_of_two().then(|| d.trailing_zeros() as usize)
    }

    pub fn purity(&self) -> f64 {
        let m = &self.matrix;
        m.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Eigenvalues, ascending, with small negatives clipped to zero.
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        clipped_spectrum(&self.matrix)
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn fidelity_with_pure(&self, psi: &PureState) -> f64 {
        let v = psi.amplitudes();
        (v.adjoint() * &self.matrix * v)[(0, 0)].re
    }

    pub fn expectation(&self, op: &CMatrix) -> C64 {
        linalg::trace(&(&self.matrix * op))
    }

    /// `U ρ U†`.
    pub fn conjugate_by(&self, u: &CMatrix) -> Self {
        Self::from_trusted(u * &self.matrix * u.adjoint())
    }
}

/// Normalized state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: CVector,
}

impl PureState {
    pub fn new(amplitudes: CVector) -> Result<Self> {
        let n = amplitudes.norm();
        if !((n - 1.0).abs() <= 1e-12) {
            return Err(Error::Validation(format!("state norm is {n}, expected 1")));
        }
        Ok(Self { amplitudes })
    }

    pub fn normalized(amplitudes: CVector) -> Result<Self> {
        let n = amplitudes.norm();
        if !(n > 0.0) {
            return Err(Error::Validation("cannot normalize the zero vector".into()));
        }
        Ok(Self {
            amplitudes: amplitudes / C64::new(n, 0.0),
        })
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn density_matrix(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }
}

/// Nonnegative weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector {
    p: Vec<f64>,
}

impl ProbabilityVector {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::Validation("empty probability vector".into()));
        }
        if let Some(x) = p.iter().find(|x| !(**x >= 0.0)) {
            return Err(Error::Validation(format!("negative probability {x}")));
        }
        let s: f64 = p.iter().sum();
        if !((s - 1.0).abs() <= 1e-10) {
            return Err(Error::Validation(format!("probabilities sum to {s}")));
        }
        Ok(Self { p })
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            p: vec![1.0 / n as f64; n],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.p
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }
}

pub(crate) fn clipped_spectrum(m: &CMatrix) -> Result<Vec<f64>> {
    let mut ev = linalg::hermitian_eigenvalues(m);
    for x in ev.iter_mut() {
        if *x < 0.0 {
            if *x < -NEG_CLIP {
                return Err(Error::Validation(format!(
                    "eigenvalue {x:.3e} is negative beyond tolerance"
                )));
            }
            *x = 0.0;
        }
    }
    Ok(ev)
}

/// `−Σ λ log λ` over eigenvalues above [`EPS_EIG`]; eigenvalues need not sum to one.
pub(crate) fn entropy_of_eigenvalues(ev: &[f64]) -> f64 {
    ev.iter()
        .filter(|&&x| x > EPS_EIG)
        .map(|&x| -x * x.ln())
        .sum()
}

/// Entropy of a Hermitian PSD block that is part of a larger state; no trace
/// normalization and no validation.
pub(crate) fn block_entropy(m: &CMatrix) -> f64 {
    let ev = linalg::hermitian_eigenvalues(m);
    ev.iter()
        .filter(|&&x| x > EPS_EIG)
        .map(|&x| -x * x.ln())
        .sum()
}

/// Von Neumann entropy in nats.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    Ok(entropy_of_eigenvalues(&rho.spectrum()?))
}

/// `S(ρ‖σ)` in nats, or `f64::INFINITY` when the support of ρ is not inside
/// the support of σ.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::Shape(format!(
            "relative entropy of a {}-dim state against a {}-dim state",
            rho.dim(),
            sigma.dim()
        )));
    }
    let s_rho = von_neumann_entropy(rho)?;
    let eig = linalg::hermitian_part(sigma.matrix()).symmetric_eigen();
    let v = &eig.eigenvectors;
    let rv = rho.matrix() * v;
    let mut cross = 0.0;
    for (k, &mu) in eig.eigenvalues.iter().enumerate() {
        if mu < -NEG_CLIP {
            return Err(Error::Validation(format!("σ has eigenvalue {mu:.3e}")));
        }
        let w: f64 = (v.column(k).adjoint() * rv.column(k))[(0, 0)].re;
        if mu <= EPS_EIG {
            if w > 1e-10 {
                return Ok(f64::INFINITY);
            }
            continue;
        }
        cross += w * mu.ln();
    }
    Ok((-s_rho - cross).max(0.0))
}

/// Shannon entropy in nats with `0 log 0 = 0`.
pub fn shannon_entropy(p: &ProbabilityVector) -> f64 {
    shannon_of(p.values())
}

pub(crate) fn shannon_of(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum()
}

/// Binary entropy `h(x)` in nats.
pub fn binary_entropy(x: f64) -> f64 {
    shannon_of(&[x, 1.0 - x])
}

/// Reduced state on the listed modes (1-based). Kept modes appear in
/// ascending order in the result; an empty list yields the 1×1 matrix `[1]`.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let l = rho
        .modes()
        .ok_or_else(|| Error::Shape("partial trace needs a 2^L-dimensional state".into()))?;
    Ok(DensityMatrix::from_trusted(partial_trace_matrix(rho.matrix(), l, keep)?))
}

pub(crate) fn partial_trace_matrix(m: &CMatrix, modes: usize, keep: &[usize]) -> Result<CMatrix> {
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    for &k in &kept {
        check_mode(k, modes)?;
    }
    let traced: Vec<usize> = (1..=modes).filter(|m| !kept.contains(m)).collect();
    let kd = 1usize << kept.len();
    let td = 1usize << traced.len();
    let compose = |a: usize, b: usize| -> usize {
        // a enumerates kept bits (first kept mode most significant), b the traced bits
        let mut idx = 0;
        for (pos, &m) in kept.iter().enumerate() {
            if a & (1 << (kept.len() - 1 - pos)) != 0 {
                idx |= 1 << (modes - m);
            }
        }
        for (pos, &m) in traced.iter().enumerate() {
            if b & (1 << (traced.len() - 1 - pos)) != 0 {
                idx |= 1 << (modes - m);
            }
        }
        idx
    };
    let mut out = CMatrix::zeros(kd, kd);
    for r in 0..kd {
        for c in 0..kd {
            let mut acc = C64::new(0.0, 0.0);
            for t in 0..td {
                acc += m[(compose(r, t), compose(c, t))];
            }
            out[(r, c)] = acc;
        }
    }
    Ok(out)
}

/// Partial transpose over the listed modes (1-based) in the occupation basis.
pub fn partial_transpose(m: &CMatrix, modes: usize, transposed: &[usize]) -> Result<CMatrix> {
    let mut mask = 0usize;
    for &t in transposed {
        check_mode(t, modes)?;
        mask |= 1 << (modes - t);
    }
    let dim = 1usize << modes;
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::Shape("matrix does not match the mode count".into()));
    }
    Ok(CMatrix::from_fn(dim, dim, |r, c| {
        // swap the transposed bits between row and column
        let r2 = (r & !mask) | (c & mask);
        let c2 = (c & !mask) | (r & mask);
        m[(r2, c2)]
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::haar_vector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag(p: &[f64]) -> DensityMatrix {
        DensityMatrix::diagonal(&ProbabilityVector::new(p.to_vec()).unwrap())
    }

    #[test]
    fn entropy_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let psi = PureState::new(haar_vector(8, &mut rng)).unwrap();
        assert!(von_neumann_entropy(&psi.density_matrix()).unwrap().abs() < 1e-9);
        for d in [2usize, 5, 16] {
            let s = von_neumann_entropy(&DensityMatrix::maximally_mixed(d)).unwrap();
            assert!((s - (d as f64).ln()).abs() < 1e-9);
        }
        let s = bits(von_neumann_entropy(&diag(&[0.25, 0.75])).unwrap());
        assert!((s - 0.811_278_124_459_132_9).abs() < 1e-9);
    }

    #[test]
    fn rejects_invalid_states() {
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![
            C64::new(1.2, 0.0),
            C64::new(-0.2, 0.0),
        ]));
        assert!(matches!(DensityMatrix::new(m), Err(Error::Validation(_))));
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![C64::new(0.5, 0.0); 3]));
        assert!(DensityMatrix::new(m).is_err());
        assert!(ProbabilityVector::new(vec![0.5, 0.6]).is_err());
        assert!(ProbabilityVector::new(vec![-0.1, 1.1]).is_err());
    }

    #[test]
    fn relative_entropy_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = crate::linalg::ginibre(4, 4, &mut rng);
        let m = &g * g.adjoint();
        let rho = DensityMatrix::new(m.scale(1.0 / crate::linalg::trace(&m).re)).unwrap();
        assert!(relative_entropy(&rho, &rho).unwrap().abs() < 1e-9);

        let a = PureState::new(CVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]))
            .unwrap();
        let b = PureState::new(CVector::from_vec(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]))
            .unwrap();
        let r = relative_entropy(&a.density_matrix(), &b.density_matrix()).unwrap();
        assert!(r.is_infinite());

        let err = relative_entropy(&rho, &DensityMatrix::maximally_mixed(2));
        assert!(matches!(err, Err(Error::Shape(_))));
    }

    #[test]
    fn partial_trace_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ga = crate::linalg::ginibre(2, 2, &mut rng);
        let gb = crate::linalg::ginibre(4, 4, &mut rng);
        let ra = &ga * ga.adjoint();
        let rb = &gb * gb.adjoint();
        let ra = ra.scale(1.0 / crate::linalg::trace(&ra).re);
        let rb = rb.scale(1.0 / crate::linalg::trace(&rb).re);
        let rho = DensityMatrix::new(ra.kronecker(&rb)).unwrap();
        let red = partial_trace(&rho, &[1]).unwrap();
        assert!(crate::linalg::max_abs(&(red.matrix() - &ra)) < 1e-12);
        let all = partial_trace(&rho, &[1, 2, 3]).unwrap();
        assert!(crate::linalg::max_abs(&(all.matrix() - rho.matrix())) < 1e-15);
        let none = partial_trace(&rho, &[]).unwrap();
        assert_eq!(none.dim(), 1);
        assert!((none.matrix()[(0, 0)].re - 1.0).abs() < 1e-12);
        assert!(partial_trace(&rho, &[4]).is_err());
    }

    #[test]
    fn shannon_and_binary() {
        assert_eq!(binary_entropy(0.0), 0.0);
        assert_eq!(binary_entropy(1.0), 0.0);
        assert!((bits(binary_entropy(0.5)) - 1.0).abs() < 1e-15);
        let u = bits(shannon_entropy(&ProbabilityVector::uniform(6)));
        assert!((u - 2.584_962_500_721_156).abs() < 1e-12);
    }

    #[test]
    fn partial_transpose_is_involution() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = crate::linalg::ginibre(8, 8, &mut rng);
        let t = partial_transpose(&g, 3, &[2]).unwrap();
        let back = partial_transpose(&t, 3, &[2]).unwrap();
        assert_eq!(back, g);
        let full = partial_transpose(&g, 3, &[1, 2, 3]).unwrap();
        assert_eq!(full, g.transpose());
    }
}
