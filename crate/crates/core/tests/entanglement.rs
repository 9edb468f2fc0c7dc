use fermicorr::entanglement::*;
use fermicorr::fock::{apply_creations, lift_by_minors, FockBasis, SingleParticleUnitary};
use fermicorr::linalg::{self, CMatrix, CVector, C64};
use fermicorr::optimize::OptimizerConfig;
use fermicorr::quantifiers::classical_state;
use fermicorr::quantinfo::{DensityMatrix, ProbabilityVector, PureState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PAIRS: [[usize; 2]; 6] = [[1, 2], [1, 3], [1, 4], [2, 3], [2, 4], [3, 4]];

fn basis() -> FockBasis {
    FockBasis::new(4).unwrap()
}

/// `Σ c_ij a†_i a†_j |vac⟩` in lexicographic pair order.
fn two_particle(c: &[C64; 6]) -> CVector {
    let b = basis();
    let mut v = CVector::zeros(16);
    for (w, p) in c.iter().zip(PAIRS) {
        v += apply_creations(&b, &p).unwrap() * *w;
    }
    v
}

fn random_coefficients(rng: &mut ChaCha8Rng) -> [C64; 6] {
    let v = linalg::haar_vector(6, rng);
    std::array::from_fn(|k| v[k])
}

/// Pure-state concurrence from the ε-sum, `2|c12 c34 − c13 c24 + c14 c23|`.
fn epsilon_sum(c: &[C64; 6]) -> f64 {
    2.0 * (c[0] * c[5] - c[1] * c[4] + c[2] * c[3]).norm()
}

fn random_sector_mixture(rank: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
    let mut m = CMatrix::zeros(16, 16);
    for _ in 0..rank {
        let v = two_particle(&random_coefficients(rng));
        m += &v * v.adjoint() * C64::new(rng.random::<f64>(), 0.0);
    }
    let t = linalg::trace(&m).re;
    DensityMatrix::new(m.scale(1.0 / t)).unwrap()
}

fn lift(u: &SingleParticleUnitary) -> CMatrix {
    lift_by_minors(&basis(), u).unwrap().into_matrix()
}

#[test]
fn pure_state_concurrence_matches_epsilon_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let c = random_coefficients(&mut rng);
        let rho = PureState::normalized(two_particle(&c)).unwrap().density_matrix();
        let got = fermionic_concurrence(&rho).unwrap().value;
        assert!((got - epsilon_sum(&c)).abs() < 1e-8, "{got} vs {}", epsilon_sum(&c));
        // the shifted negativity equals the concurrence on pure states
        assert!((shifted_negativity(&rho).unwrap().value - got).abs() < 1e-8);
    }
}

#[test]
fn dark_state_values() {
    let w = C64::new(1.0 / 6f64.sqrt(), 0.0);
    let c = [w; 6];
    assert!((epsilon_sum(&c) - 1.0 / 3.0).abs() < 1e-15);
    let rho = PureState::new(two_particle(&c)).unwrap().density_matrix();
    let conc = fermionic_concurrence(&rho).unwrap();
    assert_eq!(conc.quantifier, EntanglementKind::Concurrence);
    assert!((conc.value - 1.0 / 3.0).abs() < 1e-10);
    assert!((shifted_negativity(&rho).unwrap().value - 1.0 / 3.0).abs() < 1e-10);
}

#[test]
fn single_particle_invariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..5 {
        let rho = random_sector_mixture(3, &mut rng);
        let g = lift(&SingleParticleUnitary::haar(4, &mut rng));
        let rotated = rho.conjugate_by(&g);
        for f in [fermionic_concurrence, shifted_negativity] {
            let (a, b) = (f(&rho).unwrap().value, f(&rotated).unwrap().value);
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }
}

#[test]
fn slater_mixtures_are_not_entangled() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..5 {
        let u = SingleParticleUnitary::haar(4, &mut rng);
        let mut p = vec![0.0; 16];
        for &i in &[0b1100usize, 0b1010, 0b0110, 0b0011] {
            p[i] = rng.random::<f64>();
        }
        let s: f64 = p.iter().sum();
        let p = ProbabilityVector::new(p.iter().map(|x| x / s).collect()).unwrap();
        let rho = classical_state(&basis(), &p, &u).unwrap();
        assert!(fermionic_concurrence(&rho).unwrap().value < 1e-8);
        assert!(shifted_negativity(&rho).unwrap().value < 1e-8);
    }
    let slater = PureState::new(two_particle(&std::array::from_fn(|k| {
        C64::new(if k == 1 { 1.0 } else { 0.0 }, 0.0)
    })))
    .unwrap()
    .density_matrix();
    let cfg = OptimizerConfig::default().with_restarts(4).with_seed(2);
    let rotated = slater.conjugate_by(&lift(&SingleParticleUnitary::haar(4, &mut rng)));
    let v = min_mode_negativity(&rotated, &balanced_cut(4), &cfg).unwrap();
    assert_eq!(v.quantifier, EntanglementKind::MinimizedNegativity);
    assert!(v.value < 1e-6, "{}", v.value);
}

#[test]
fn mixing_with_the_sector_identity_lowers_entanglement() {
    let w = C64::new(1.0 / 6f64.sqrt(), 0.0);
    let dark = PureState::new(two_particle(&[w; 6])).unwrap().density_matrix();
    let mut noise = CMatrix::zeros(16, 16);
    for &i in &[0b1100usize, 0b1010, 0b1001, 0b0110, 0b0101, 0b0011] {
        noise[(i, i)] = C64::new(1.0 / 6.0, 0.0);
    }
    let mut prev = (f64::INFINITY, f64::INFINITY);
    for k in 0..=10 {
        let p = k as f64 / 10.0;
        let rho = DensityMatrix::new(dark.matrix().scale(1.0 - p) + noise.scale(p)).unwrap();
        let cur = (
            fermionic_concurrence(&rho).unwrap().value,
            shifted_negativity(&rho).unwrap().value,
        );
        assert!(cur.0 <= prev.0 + 1e-12 && cur.1 <= prev.1 + 1e-12);
        prev = cur;
    }
    assert!(prev.0 < 1e-12 && prev.1 < 1e-12);
}

#[test]
fn negativities_are_continuous() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let a = random_sector_mixture(2, &mut rng);
    let b = random_sector_mixture(2, &mut rng);
    let eps = 1e-7;
    let near = DensityMatrix::new(a.matrix().scale(1.0 - eps) + b.matrix().scale(eps)).unwrap();
    let cut = balanced_cut(4);
    assert!(
        (mode_negativity(&a, &cut).unwrap().value - mode_negativity(&near, &cut).unwrap().value)
            .abs()
            < 1e-5
    );
    assert!(
        (shifted_negativity(&a).unwrap().value - shifted_negativity(&near).unwrap().value).abs()
            < 1e-5
    );
}

#[test]
fn preconditions() {
    let b = basis();
    let one = PureState::new(apply_creations(&b, &[1]).unwrap()).unwrap().density_matrix();
    assert!(fermionic_concurrence(&one).is_err());
    assert!(shifted_negativity(&one).is_err());
    assert!(mode_negativity(&one, &[5]).is_err());
    let five = FockBasis::new(5).unwrap();
    let pair = PureState::new(apply_creations(&five, &[1, 2]).unwrap()).unwrap().density_matrix();
    assert!(fermionic_concurrence(&pair).is_err());
    assert!(shifted_negativity(&pair).unwrap().value < 1e-12);
    assert_eq!(balanced_cut(5), vec![1, 2]);
}
