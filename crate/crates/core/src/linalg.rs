//! Dense complex linear algebra shared by the rest of the crate.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Largest absolute entry.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    m.is_square() && max_abs(&(m - m.adjoint())) <= tol
}

/// Eigenvalues of a Hermitian matrix, ascending. Only the lower triangle is read.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    if m.nrows() == 1 {
        return vec![m[(0, 0)].re];
    }
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn anticommutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b + b * a
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub fn trace_norm_hermitian(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(&hermitian_part(m))
        .iter()
        .map(|x| x.abs())
        .sum()
}

/// `U†U − I`, max-norm.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let n = u.nrows();
    max_abs(&(u.adjoint() * u - CMatrix::identity(n, n)))
}

/// Anti-Hermitian matrix from `n²` real coordinates: `n` imaginary diagonal
/// entries followed by (re, im) pairs of the strict upper triangle.
pub fn anti_hermitian_from_params(params: &[f64], n: usize) -> CMatrix {
    debug_assert_eq!(params.len(), n * n);
    let mut a = CMatrix::zeros(n, n);
    for k in 0..n {
        a[(k, k)] = C64::new(0.0, params[k]);
    }
    let mut p = n;
    for r in 0..n {
        for c in r + 1..n {
            let z = C64::new(params[p], params[p + 1]);
            a[(r, c)] = z;
            a[(c, r)] = -z.conj();
            p += 2;
        }
    }
    a
}

/// Exponential of an anti-Hermitian matrix via the eigendecomposition of `iA`.
pub fn expm_anti_hermitian(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    if n == 1 {
        return CMatrix::from_element(1, 1, a[(0, 0)].exp());
    }
    let h = hermitian_part(&(a * C64::new(0.0, 1.0)));
    let eig = h.symmetric_eigen();
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (k, lambda) in eig.eigenvalues.iter().enumerate() {
        // A = -i H, so exp(A) = V exp(-i Λ) V†
        let phase = C64::new(0.0, -lambda).exp();
        for r in 0..n {
            scaled[(r, k)] *= phase;
        }
    }
    scaled * v.adjoint()
}

/// General matrix exponential (scaling and squaring Padé).
pub fn expm(a: &CMatrix) -> CMatrix {
    a.clone().exp()
}

/// Principal logarithm of a unitary matrix, returned anti-Hermitian.
///
/// Unitaries are normal, so the complex Schur form is diagonal up to
/// rounding and `log U = Q diag(i arg t_kk) Q†`.
pub fn unitary_log(u: &CMatrix) -> CMatrix {
    let n = u.nrows();
    let (q, t) = nalgebra::linalg::Schur::new(u.clone()).unpack();
    let mut d = CMatrix::zeros(n, n);
    for k in 0..n {
        d[(k, k)] = C64::new(0.0, t[(k, k)].arg());
    }
    let log = &q * d * q.adjoint();
    (&log - log.adjoint()).scale(0.5)
}

/// Complex Ginibre matrix with i.i.d. standard complex normal entries.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phases of
/// `diag(R)` absorbed into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let z = ginibre(n, n, rng);
    let qr = z.qr();
    let (mut q, r) = qr.unpack();
    for k in 0..n {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for row in 0..n {
            q[(row, k)] *= phase;
        }
    }
    q
}

/// Haar-random unit vector.
pub fn haar_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVector {
    let g = ginibre(n, 1, rng);
    let v = CVector::from_iterator(n, g.iter().copied());
    let norm = v.norm();
    v / C64::new(norm, 0.0)
}

/// Determinant of a small square matrix stored row-major in `m` (destroyed).
pub(crate) fn small_det(m: &mut [C64], n: usize) -> C64 {
    match n {
        0 => ONE,
        1 => m[0],
        2 => m[0] * m[3] - m[1] * m[2],
        _ => {
            let mut det = ONE;
            for col in 0..n {
                let mut pivot = col;
                let mut best = m[col * n + col].norm();
                for row in col + 1..n {
                    let v = m[row * n + col].norm();
                    if v > best {
                        best = v;
                        pivot = row;
                    }
                }
                if best == 0.0 {
                    return ZERO;
                }
                if pivot != col {
                    for k in 0..n {
                        m.swap(col * n + k, pivot * n + k);
                    }
                    det = -det;
                }
                let d = m[col * n + col];
                det *= d;
                for row in col + 1..n {
                    let f = m[row * n + col] / d;
                    if f != ZERO {
                        for k in col..n {
                            let v = m[col * n + k];
                            m[row * n + k] -= f * v;
                        }
                    }
                }
            }
            det
        }
    }
}
