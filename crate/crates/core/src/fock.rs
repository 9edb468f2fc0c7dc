//! Fock space of `L` fermionic modes in the occupation-number representation.
//!
//! Basis states are `|j_1 … j_L⟩ = (a†_1)^{j_1} ⋯ (a†_L)^{j_L} |vac⟩`. The
//! integer label of a basis state is `Σ_k j_k 2^{L−k}`, so mode 1 is the most
//! significant bit. Modes are labelled `1..=L` throughout the public API.
//!
//! The Jordan–Wigner sign of `a_j` counts the occupied modes with a smaller
//! label than `j`.

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, C64, ONE, ZERO};
use rand::Rng;

/// Largest supported mode count; dense `2^L × 2^L` matrices above this are
/// not practical.
pub const MAX_MODES: usize = 14;

/// Occupations of `L` modes, mode 1 first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OccupationVector {
    bits: Vec<bool>,
}

impl OccupationVector {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    /// Occupation vector with the listed modes (1-based) occupied.
    pub fn from_occupied(modes: usize, occupied: &[usize]) -> Result<Self> {
        let mut bits = vec![false; modes];
        for &m in occupied {
            check_mode(m, modes)?;
            bits[m - 1] = true;
        }
        Ok(Self { bits })
    }

    pub fn from_index(index: usize, modes: usize) -> Self {
        let bits = (1..=modes).map(|m| index & mode_bit(m, modes) != 0).collect();
        Self { bits }
    }

    pub fn index(&self) -> usize {
        let l = self.bits.len();
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(k, _)| 1usize << (l - 1 - k))
            .sum()
    }

    pub fn modes(&self) -> usize {
        self.bits.len()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn particles(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Occupied mode labels, ascending.
    pub fn occupied(&self) -> Vec<usize> {
        (1..=self.bits.len()).filter(|&m| self.bits[m - 1]).collect()
    }
}

/// Bit mask of mode `m` (1-based) inside a basis index.
#[inline]
pub fn mode_bit(m: usize, modes: usize) -> usize {
    1usize << (modes - m)
}

#[inline]
pub(crate) fn parity_of(index: usize) -> usize {
    (index.count_ones() & 1) as usize
}

pub(crate) fn check_mode(m: usize, modes: usize) -> Result<()> {
    if m == 0 || m > modes {
        Err(Error::ModeIndex { index: m, modes })
    } else {
        Ok(())
    }
}

/// The `2^L`-dimensional occupation-number basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockBasis {
    modes: usize,
}

impl FockBasis {
    pub fn new(modes: usize) -> Result<Self> {
        if modes == 0 || modes > MAX_MODES {
            return Err(Error::Size(modes));
        }
        Ok(Self { modes })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn dim(&self) -> usize {
        1 << self.modes
    }

    pub fn index_of(&self, occ: &OccupationVector) -> Result<usize> {
        if occ.modes() != self.modes {
            return Err(Error::Shape(format!(
                "occupation vector has {} modes, basis has {}",
                occ.modes(),
                self.modes
            )));
        }
        Ok(occ.index())
    }

    pub fn occupation(&self, index: usize) -> OccupationVector {
        OccupationVector::from_index(index, self.modes)
    }

    /// Basis vector `|index⟩`.
    pub fn ket(&self, index: usize) -> CVector {
        let mut v = CVector::zeros(self.dim());
        v[index] = ONE;
        v
    }

    pub fn vacuum(&self) -> CVector {
        self.ket(0)
    }

    pub fn check_mode(&self, m: usize) -> Result<()> {
        check_mode(m, self.modes)
    }

    pub fn sector(&self, particles: usize) -> Result<NumberSector> {
        NumberSector::new(*self, particles)
    }
}

/// Build the Fock basis for `modes` modes.
pub fn build_basis(modes: usize) -> Result<FockBasis> {
    FockBasis::new(modes)
}

/// A dense operator on Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    matrix: CMatrix,
    modes: usize,
    hermitian: bool,
}

impl Operator {
    pub fn new(basis: &FockBasis, matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != basis.dim() || matrix.ncols() != basis.dim() {
            return Err(Error::Shape(format!(
                "operator is {}x{}, basis dimension is {}",
                matrix.nrows(),
                matrix.ncols(),
                basis.dim()
            )));
        }
        Ok(Self {
            matrix,
            modes: basis.modes(),
            hermitian: false,
        })
    }

    /// Tag as Hermitian after checking `max|M − M†| ≤ 1e−12`.
    pub fn hermitian(basis: &FockBasis, matrix: CMatrix) -> Result<Self> {
        let mut op = Self::new(basis, matrix)?;
        if !linalg::is_hermitian(&op.matrix, 1e-12) {
            return Err(Error::Validation("operator is not Hermitian".into()));
        }
        op.hermitian = true;
        Ok(op)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn dagger(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
            modes: self.modes,
            hermitian: self.hermitian,
        }
    }
}

/// `a_j` with the Jordan–Wigner sign `(−1)^{Σ_{i<j} n_i}`.
pub fn annihilation_op(basis: &FockBasis, j: usize) -> Result<Operator> {
    basis.check_mode(j)?;
    Operator::new(basis, annihilation_matrix(basis.modes(), j))
}

/// `a†_j`, the conjugate transpose of [`annihilation_op`].
pub fn creation_op(basis: &FockBasis, j: usize) -> Result<Operator> {
    Ok(annihilation_op(basis, j)?.dagger())
}

pub(crate) fn annihilation_matrix(modes: usize, j: usize) -> CMatrix {
    let dim = 1usize << modes;
    let bit = mode_bit(j, modes);
    // occupied modes with label < j sit in the bits above `bit`
    let higher = !((bit << 1) - 1) & (dim - 1);
    let mut m = CMatrix::zeros(dim, dim);
    for col in 0..dim {
        if col & bit != 0 {
            let sign = if (col & higher).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            m[(col ^ bit, col)] = C64::new(sign, 0.0);
        }
    }
    m
}

/// Diagonal particle-number operator.
pub fn number_op(basis: &FockBasis) -> Operator {
    let diag = CVector::from_fn(basis.dim(), |i, _| C64::new(i.count_ones() as f64, 0.0));
    Operator {
        matrix: CMatrix::from_diagonal(&diag),
        modes: basis.modes(),
        hermitian: true,
    }
}

/// Diagonal parity operator `(−1)^N̂`.
pub fn parity_op(basis: &FockBasis) -> Operator {
    let diag = CVector::from_fn(basis.dim(), |i, _| {
        C64::new(if parity_of(i) == 0 { 1.0 } else { -1.0 }, 0.0)
    });
    Operator {
        matrix: CMatrix::from_diagonal(&diag),
        modes: basis.modes(),
        hermitian: true,
    }
}

/// An `L × L` unitary defining the mode transformation `f†_k = Σ_j U_kj a†_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleParticleUnitary {
    u: CMatrix,
}

impl SingleParticleUnitary {
    pub const TOLERANCE: f64 = 1e-10;

    pub fn new(u: CMatrix) -> Result<Self> {
        if !u.is_square() || u.nrows() == 0 {
            return Err(Error::Shape("single-particle unitary must be square".into()));
        }
        let defect = linalg::unitarity_defect(&u);
        if !(defect <= Self::TOLERANCE) {
            return Err(Error::Validation(format!(
                "matrix is not unitary: max|U†U − I| = {defect:.3e}"
            )));
        }
        Ok(Self { u })
    }

    pub(crate) fn from_trusted(u: CMatrix) -> Self {
        Self { u }
    }

    pub fn identity(modes: usize) -> Self {
        Self {
            u: CMatrix::identity(modes, modes),
        }
    }

    pub fn haar<R: Rng + ?Sized>(modes: usize, rng: &mut R) -> Self {
        Self {
            u: linalg::haar_unitary(modes, rng),
        }
    }

    /// Swap of two modes (1-based).
    pub fn swap(modes: usize, a: usize, b: usize) -> Result<Self> {
        check_mode(a, modes)?;
        check_mode(b, modes)?;
        let mut u = CMatrix::identity(modes, modes);
        u.swap_columns(a - 1, b - 1);
        Ok(Self { u })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.u
    }

    pub fn modes(&self) -> usize {
        self.u.nrows()
    }

    pub fn adjoint(&self) -> Self {
        Self { u: self.u.adjoint() }
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self { u: &self.u * &other.u }
    }
}

/// Many-body unitary `Γ(U) = exp(Σ_{jk} h_jk a†_j a_k)` with `h = log U` on the
/// principal branch. It satisfies `Γ a†_j Γ† = Σ_k U_kj a†_k` and fixes the
/// vacuum.
pub fn bogoliubov_lift(basis: &FockBasis, u: &SingleParticleUnitary) -> Result<Operator> {
    let l = basis.modes();
    if u.modes() != l {
        return Err(Error::Shape(format!(
            "single-particle unitary acts on {} modes, basis has {l}",
            u.modes()
        )));
    }
    SingleParticleUnitary::new(u.matrix().clone())?;
    let h = linalg::unitary_log(u.matrix());
    let ann: Vec<CMatrix> = (1..=l).map(|j| annihilation_matrix(l, j)).collect();
    let dim = basis.dim();
    let mut generator = CMatrix::zeros(dim, dim);
    for j in 0..l {
        let cre = ann[j].adjoint();
        for k in 0..l {
            let c = h[(j, k)];
            if c != ZERO {
                generator += (&cre * &ann[k]) * c;
            }
        }
    }
    Operator::new(basis, linalg::expm_anti_hermitian(&generator))
}

/// Fixed particle-number subspace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NumberSector {
    modes: usize,
    particles: usize,
    indices: Vec<usize>,
}

impl NumberSector {
    pub fn new(basis: FockBasis, particles: usize) -> Result<Self> {
        if particles > basis.modes() {
            return Err(Error::Precondition(format!(
                "{particles} particles do not fit in {} modes",
                basis.modes()
            )));
        }
        let indices = (0..basis.dim())
            .filter(|i| i.count_ones() as usize == particles)
            .collect();
        Ok(Self {
            modes: basis.modes(),
            particles,
            indices,
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    /// Full-space indices of the sector basis, ascending.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn embed(&self, v: &CVector) -> Result<CVector> {
        if v.len() != self.dim() {
            return Err(Error::Shape(format!(
                "sector vector has length {}, sector dimension is {}",
                v.len(),
                self.dim()
            )));
        }
        let mut out = CVector::zeros(1 << self.modes);
        for (k, &i) in self.indices.iter().enumerate() {
            out[i] = v[k];
        }
        Ok(out)
    }

    pub fn restrict(&self, v: &CVector) -> Result<CVector> {
        if v.len() != 1 << self.modes {
            return Err(Error::Shape(format!(
                "vector has length {}, Fock dimension is {}",
                v.len(),
                1usize << self.modes
            )));
        }
        Ok(CVector::from_iterator(
            self.dim(),
            self.indices.iter().map(|&i| v[i]),
        ))
    }

    pub fn embed_matrix(&self, m: &CMatrix) -> Result<CMatrix> {
        let d = self.dim();
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::Shape("sector matrix has the wrong dimension".into()));
        }
        let full = 1usize << self.modes;
        let mut out = CMatrix::zeros(full, full);
        for (r, &i) in self.indices.iter().enumerate() {
            for (c, &j) in self.indices.iter().enumerate() {
                out[(i, j)] = m[(r, c)];
            }
        }
        Ok(out)
    }

    pub fn restrict_matrix(&self, m: &CMatrix) -> Result<CMatrix> {
        let full = 1usize << self.modes;
        if m.nrows() != full || m.ncols() != full {
            return Err(Error::Shape("matrix does not act on the full Fock space".into()));
        }
        let d = self.dim();
        Ok(CMatrix::from_fn(d, d, |r, c| {
            m[(self.indices[r], self.indices[c])]
        }))
    }

    /// Norm of the part of `m` that leaves the sector (rows or columns outside it).
    pub fn leakage(&self, m: &CMatrix) -> f64 {
        let full = 1usize << self.modes;
        let mut inside = vec![false; full];
        for &i in &self.indices {
            inside[i] = true;
        }
        let mut worst: f64 = 0.0;
        for r in 0..full {
            for c in 0..full {
                if !(inside[r] && inside[c]) {
                    worst = worst.max(m[(r, c)].norm());
                }
            }
        }
        worst
    }
}

/// Particle-number sectors of a Fock space with, for every sector, the
/// occupied-mode lists of its basis states. Used to evaluate `Γ(U)`
/// block by block through minors of `U`.
#[derive(Debug, Clone)]
pub struct SectorTable {
    modes: usize,
    sectors: Vec<Vec<usize>>,
    occupied: Vec<Vec<Vec<usize>>>,
}

impl SectorTable {
    pub fn new(modes: usize) -> Self {
        let dim = 1usize << modes;
        let mut sectors = vec![Vec::new(); modes + 1];
        for i in 0..dim {
            sectors[i.count_ones() as usize].push(i);
        }
        let occupied = sectors
            .iter()
            .map(|idx| {
                idx.iter()
                    .map(|&i| (0..modes).filter(|&k| i & (1 << (modes - 1 - k)) != 0).collect())
                    .collect()
            })
            .collect();
        Self {
            modes,
            sectors,
            occupied,
        }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn sector_indices(&self, particles: usize) -> &[usize] {
        &self.sectors[particles]
    }

    /// Block of `Γ(U)` on the `particles` sector: entry `(S, T)` is the minor
    /// `det U[S, T]` (rows `S`, columns `T`).
    pub fn lift_block(&self, u: &CMatrix, particles: usize) -> CMatrix {
        let occ = &self.occupied[particles];
        let d = occ.len();
        let n = particles;
        let mut buf = vec![ZERO; n * n];
        CMatrix::from_fn(d, d, |r, c| {
            let rows = &occ[r];
            let cols = &occ[c];
            for (a, &ra) in rows.iter().enumerate() {
                for (b, &cb) in cols.iter().enumerate() {
                    buf[a * n + b] = u[(ra, cb)];
                }
            }
            linalg::small_det(&mut buf, n)
        })
    }

    /// Dense `Γ(U)` assembled from its sector blocks.
    pub fn lift(&self, u: &CMatrix) -> CMatrix {
        let dim = 1usize << self.modes;
        let mut g = CMatrix::zeros(dim, dim);
        for n in 0..=self.modes {
            let block = self.lift_block(u, n);
            let idx = &self.sectors[n];
            for (r, &i) in idx.iter().enumerate() {
                for (c, &j) in idx.iter().enumerate() {
                    g[(i, j)] = block[(r, c)];
                }
            }
        }
        g
    }
}

/// `Γ(U)` through Slater-determinant minors. Agrees with [`bogoliubov_lift`]
/// exactly (both fix the vacuum) and is much cheaper inside optimizers.
pub fn lift_by_minors(basis: &FockBasis, u: &SingleParticleUnitary) -> Result<Operator> {
    if u.modes() != basis.modes() {
        return Err(Error::Shape("unitary and basis mode counts differ".into()));
    }
    Operator::new(basis, SectorTable::new(basis.modes()).lift(u.matrix()))
}

/// `a†_{m1} a†_{m2} ⋯ |vac⟩` for the listed modes, applied right to left
/// (the last listed mode is created first).
pub fn apply_creations(basis: &FockBasis, modes: &[usize]) -> Result<CVector> {
    let mut v = basis.vacuum();
    for &m in modes.iter().rev() {
        basis.check_mode(m)?;
        v = annihilation_matrix(basis.modes(), m).adjoint() * v;
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn basis_dimensions_and_index_convention() {
        assert_eq!(build_basis(4).unwrap().dim(), 16);
        assert_eq!(build_basis(1).unwrap().dim(), 2);
        let b = build_basis(10).unwrap();
        assert_eq!(b.dim(), 1024);
        let mut bits = vec![false; 10];
        bits[0] = true;
        assert_eq!(b.index_of(&OccupationVector::new(bits)).unwrap(), 512);
        assert_eq!(build_basis(0), Err(Error::Size(0)));
        assert_eq!(build_basis(15), Err(Error::Size(15)));
    }

    #[test]
    fn index_bijection() {
        for l in 1..=10 {
            for i in 0..(1usize << l) {
                assert_eq!(OccupationVector::from_index(i, l).index(), i);
            }
        }
    }

    #[test]
    fn single_mode_annihilator() {
        let b = build_basis(1).unwrap();
        let a = annihilation_op(&b, 1).unwrap();
        let expect = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]);
        assert_eq!(a.matrix(), &expect);
        assert!(matches!(
            annihilation_op(&b, 2),
            Err(Error::ModeIndex { index: 2, modes: 1 })
        ));
        assert!(annihilation_op(&b, 0).is_err());
    }

    #[test]
    fn creation_order_signs() {
        let b = build_basis(2).unwrap();
        let v12 = apply_creations(&b, &[1, 2]).unwrap();
        let v21 = apply_creations(&b, &[2, 1]).unwrap();
        assert_eq!(v12[3], ONE);
        assert_eq!(v21[3], -ONE);
    }

    #[test]
    fn number_and_parity() {
        let b = build_basis(2).unwrap();
        let n: Vec<f64> = number_op(&b).matrix().diagonal().iter().map(|z| z.re).collect();
        assert_eq!(n, vec![0.0, 1.0, 1.0, 2.0]);
        let p: Vec<f64> = parity_op(&b).matrix().diagonal().iter().map(|z| z.re).collect();
        assert_eq!(p, vec![1.0, -1.0, -1.0, 1.0]);
        let (nm, pm) = (number_op(&b), parity_op(&b));
        assert_eq!(max_abs(&linalg::commutator(nm.matrix(), pm.matrix())), 0.0);
    }

    #[test]
    fn identity_lifts_to_identity() {
        let b = build_basis(3).unwrap();
        let g = bogoliubov_lift(&b, &SingleParticleUnitary::identity(3)).unwrap();
        assert!(max_abs(&(g.matrix() - CMatrix::identity(8, 8))) < 1e-14);
    }

    #[test]
    fn lift_rejects_non_unitary() {
        let b = build_basis(2).unwrap();
        let bad = CMatrix::from_element(2, 2, ONE);
        assert!(SingleParticleUnitary::new(bad.clone()).is_err());
        assert!(bogoliubov_lift(&b, &SingleParticleUnitary::from_trusted(bad)).is_err());
    }

    #[test]
    fn lift_conjugates_creation_operators() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for l in 2..=4 {
            let b = build_basis(l).unwrap();
            let u = SingleParticleUnitary::haar(l, &mut rng);
            let g = bogoliubov_lift(&b, &u).unwrap();
            let gm = g.matrix();
            for j in 1..=l {
                let lhs = gm * creation_op(&b, j).unwrap().matrix() * gm.adjoint();
                let mut rhs = CMatrix::zeros(b.dim(), b.dim());
                for k in 1..=l {
                    rhs += creation_op(&b, k).unwrap().matrix() * u.matrix()[(k - 1, j - 1)];
                }
                assert!(max_abs(&(lhs - rhs)) < 1e-8);
            }
            // fixes the vacuum
            assert!((gm[(0, 0)] - ONE).norm() < 1e-10);
        }
    }

    #[test]
    fn swap_lift_exchanges_single_particle_states() {
        let b = build_basis(2).unwrap();
        let g = bogoliubov_lift(&b, &SingleParticleUnitary::swap(2, 1, 2).unwrap()).unwrap();
        let m = g.matrix();
        // |01⟩ = index 1, |10⟩ = index 2
        assert!((m[(2, 1)].norm() - 1.0).abs() < 1e-10);
        assert!((m[(1, 2)].norm() - 1.0).abs() < 1e-10);
        assert!((m[(0, 0)].norm() - 1.0).abs() < 1e-10);
        assert!((m[(3, 3)].norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn minors_agree_with_exponential_lift() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for l in 1..=5 {
            let b = build_basis(l).unwrap();
            let u = SingleParticleUnitary::haar(l, &mut rng);
            let g1 = bogoliubov_lift(&b, &u).unwrap();
            let g2 = lift_by_minors(&b, &u).unwrap();
            assert!(max_abs(&(g1.matrix() - g2.matrix())) < 1e-9, "L={l}");
        }
    }

    #[test]
    fn sectors() {
        let b = build_basis(4).unwrap();
        assert_eq!(b.sector(2).unwrap().dim(), 6);
        let vac = b.sector(0).unwrap();
        assert_eq!(vac.dim(), 1);
        assert_eq!(vac.indices(), &[0]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = b.sector(2).unwrap();
        let v = linalg::haar_vector(6, &mut rng);
        let back = s.restrict(&s.embed(&v).unwrap()).unwrap();
        assert!((back - &v).norm() < 1e-14);
        assert!((s.embed(&v).unwrap().norm() - v.norm()).abs() < 1e-14);
    }
}
