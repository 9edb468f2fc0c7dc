use fermicorr::entanglement::{fermionic_concurrence, mode_negativity, shifted_negativity};
use fermicorr::error::Error;
use fermicorr::fock::{apply_creations, number_op, FockBasis};
use fermicorr::linalg::{self, CMatrix, C64};
use fermicorr::lindblad::*;
use fermicorr::optimize::OptimizerConfig;
use fermicorr::quantifiers::{one_body_density, q_particles};
use fermicorr::quantinfo::{DensityMatrix, LogBase};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `(t, purity, concurrence, shifted negativity, negativity 12|34, fidelity
/// with ψ_D)` from the exact propagator `exp(tℒ)` on the full Fock space,
/// computed independently with numpy/scipy (no RK4, no sector restriction).
const EXACT: [(f64, f64, f64, f64, f64, f64); 6] = [
    (0.5, 0.674172946871, 0.0, 0.0, 0.335721769898, 0.640925077107),
    (1.0, 0.721852613034, 0.067755916813, 0.020018463048, 0.461862112083, 0.762681360266),
    (2.0, 0.824566579442, 0.186512985512, 0.159557403173, 0.650605614605, 0.887565351771),
    (5.0, 0.978067713441, 0.318282477900, 0.314742173286, 0.814857332779, 0.988585798755),
    (10.0, 0.999501167232, 0.333005920673, 0.332924999757, 0.832930987133, 0.999749623744),
    (30.0, 0.999999999884, 0.333333325356, 0.333333333239, 0.833333333240, 0.999999999942),
];

fn basis() -> FockBasis {
    FockBasis::new(4).unwrap()
}

fn model() -> LindbladModel {
    LindbladModel::chain_in_sector(&basis(), 1.0, 2).unwrap()
}

fn integrator(t_max: f64, record_every: f64) -> IntegratorConfig {
    IntegratorConfig {
        t_max,
        record_every,
        ..IntegratorConfig::default()
    }
}

fn random_sector_state(seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = linalg::ginibre(6, 6, &mut rng);
    let b = &g * g.adjoint();
    let t = linalg::trace(&b).re;
    b.scale(1.0 / t)
}

#[test]
fn operators_annihilate_symmetric_pairs() {
    let b = basis();
    for (j, l) in chain_lindblad_ops(&b).unwrap().iter().enumerate() {
        let pair = apply_creations(&b, &[j + 1]).unwrap() + apply_creations(&b, &[j + 2]).unwrap();
        assert!((l.matrix() * pair).norm() < 1e-12);
        let n = number_op(&b);
        assert!(linalg::max_abs(&linalg::commutator(l.matrix(), n.matrix())) < 1e-12);
    }
}

#[test]
fn dark_state_properties() {
    let b = basis();
    let psi = dark_state_4_2(&b).unwrap();
    assert!((psi.amplitudes().norm() - 1.0).abs() < 1e-12);
    let nonzero: Vec<f64> = psi
        .amplitudes()
        .iter()
        .map(|z| z.norm())
        .filter(|&m| m > 1e-12)
        .collect();
    assert_eq!(nonzero.len(), 6);
    for m in nonzero {
        assert!((m - 6f64.sqrt().recip()).abs() < 1e-12);
    }
    for l in chain_lindblad_ops(&b).unwrap() {
        assert!((l.matrix() * psi.amplitudes()).norm() < 1e-12);
    }
    // tabulated by hand from the six amplitudes: diagonal 1/2, ±1/3 off it
    let g = one_body_density(&psi.density_matrix()).unwrap();
    let third = 1.0 / 3.0;
    let expected = [
        [0.5, third, 0.0, -third],
        [third, 0.5, third, 0.0],
        [0.0, third, 0.5, third],
        [-third, 0.0, third, 0.5],
    ];
    for i in 0..4 {
        for j in 0..4 {
            assert!((g[(i, j)] - C64::new(expected[i][j], 0.0)).norm() < 1e-12);
        }
    }
    assert!(dark_state_4_2(&FockBasis::new(3).unwrap()).is_err());
}

#[test]
fn initial_state_properties() {
    let b = basis();
    let rho = initial_state_fig2(&b).unwrap().density_matrix();
    assert!((rho.purity() - 1.0).abs() < 1e-12);
    let g = one_body_density(&rho).unwrap();
    for (j, n) in [1.0, 0.0, 1.0, 0.0].into_iter().enumerate() {
        assert!((g[(j, j)].re - n).abs() < 1e-12);
    }
    let q = q_particles(&rho, &OptimizerConfig::default().with_restarts(4)).unwrap();
    assert!(q.value.abs() < 1e-8);
}

#[test]
fn liouvillian_is_trace_free_and_hermiticity_preserving() {
    let m = model();
    for seed in 0..5 {
        let rho = random_sector_state(seed);
        let d = liouvillian_apply(&m, &rho).unwrap();
        assert!(linalg::trace(&d).norm() < 1e-10);
        assert!(linalg::is_hermitian(&d, 1e-12));
    }
    let mixed = CMatrix::identity(6, 6).scale(1.0 / 6.0);
    let d = liouvillian_apply(&m, &mixed).unwrap();
    assert!(linalg::trace(&d).norm() < 1e-10);
    assert!(linalg::is_hermitian(&d, 1e-12));
    assert!(matches!(
        liouvillian_apply(&m, &CMatrix::identity(16, 16)),
        Err(Error::Shape(_))
    ));
}

#[test]
fn sector_and_full_space_generators_agree() {
    let b = basis();
    let full = LindbladModel::chain(&b, 1.0).unwrap();
    let sector = model();
    let s = sector.sector().unwrap();
    let rho = random_sector_state(9);
    let lhs = s.embed_matrix(&liouvillian_apply(&sector, &rho).unwrap()).unwrap();
    let rhs = liouvillian_apply(&full, &s.embed_matrix(&rho).unwrap()).unwrap();
    assert!(linalg::max_abs(&(lhs - rhs)) < 1e-12);
}

#[test]
fn dark_state_is_a_fixed_point_of_the_integrator() {
    let b = basis();
    let dark = dark_state_4_2(&b).unwrap();
    let rho = dark.density_matrix();
    let mut obs = [
        Observable::new("purity", 1, |_, r| Ok(r.purity())),
        Observable::new("concurrence", 1, |_, r| Ok(fermionic_concurrence(r)?.value)),
        Observable::new("fidelity", 1, |_, r| Ok(r.fidelity_with_pure(&dark))),
    ];
    let rec = rk4_evolve(&model(), &rho, &integrator(10.0, 0.5), &mut obs).unwrap();
    for (name, expected) in [("purity", 1.0), ("concurrence", 1.0 / 3.0), ("fidelity", 1.0)] {
        for (_, v) in rec.samples(name) {
            assert!((v - expected).abs() < 1e-6, "{name} = {v}");
        }
    }
}

#[test]
fn trajectory_matches_exact_propagator() {
    let b = basis();
    let dark = dark_state_4_2(&b).unwrap();
    let n = number_op(&b).into_matrix();
    let rho0 = initial_state_fig2(&b).unwrap().density_matrix();
    let mut obs = [
        Observable::new("purity", 1, |_, r| Ok(r.purity())),
        Observable::new("concurrence", 1, |_, r| Ok(fermionic_concurrence(r)?.value)),
        Observable::new("shifted", 1, |_, r| Ok(shifted_negativity(r)?.value)),
        Observable::new("negativity", 1, |_, r| Ok(mode_negativity(r, &[1, 2])?.value)),
        Observable::new("fidelity", 1, |_, r| Ok(r.fidelity_with_pure(&dark))),
        Observable::new("number", 1, |_, r| Ok(r.expectation(&n).re)),
    ];
    let rec = rk4_evolve(&model(), &rho0, &integrator(30.0, 0.5), &mut obs).unwrap();
    for &(t, purity, conc, shifted, neg, fid) in &EXACT {
        let k = rec.times.iter().position(|&s| (s - t).abs() < 1e-9).unwrap();
        for (name, expected) in [
            ("purity", purity),
            ("concurrence", conc),
            ("shifted", shifted),
            ("negativity", neg),
            ("fidelity", fid),
        ] {
            let got = rec.series(name).unwrap()[k].unwrap();
            assert!((got - expected).abs() < 1e-8, "{name} at t={t}: {got} vs {expected}");
        }
    }
    // invariants along the whole trajectory
    for (_, v) in rec.samples("number") {
        assert!((v - 2.0).abs() < 1e-8);
    }
    assert!(rec.min_eigenvalue.iter().all(|&e| e >= -1e-6));
    assert!(rec.trace_err.iter().all(|&e| e <= 1e-7));
    let fid = rec.samples("fidelity");
    let late: Vec<f64> = fid.iter().filter(|(t, _)| *t >= 5.0).map(|&(_, f)| f).collect();
    assert!(late.windows(2).all(|w| w[1] >= w[0] - 1e-12));
    assert!(*late.last().unwrap() >= 0.999);
    // purity dips, then returns to one
    let purity = rec.samples("purity");
    assert!(purity.iter().any(|&(_, p)| p < 0.9));
    assert!((purity.last().unwrap().1 - 1.0).abs() < 1e-3);
}

#[test]
fn halving_the_step_changes_little() {
    let b = basis();
    let rho0 = initial_state_fig2(&b).unwrap().density_matrix();
    let coarse = rk4_evolve(&model(), &rho0, &integrator(10.0, 10.0), &mut []).unwrap();
    let fine_cfg = IntegratorConfig {
        dt: 5e-4,
        ..integrator(10.0, 10.0)
    };
    let fine = rk4_evolve(&model(), &rho0, &fine_cfg, &mut []).unwrap();
    let diff = linalg::max_abs(&(coarse.final_state().matrix() - fine.final_state().matrix()));
    assert!(diff < 1e-8, "{diff}");
}

#[test]
fn unstable_step_is_reported() {
    let b = basis();
    let rho0 = initial_state_fig2(&b).unwrap().density_matrix();
    let cfg = IntegratorConfig {
        dt: 0.8,
        ..integrator(30.0, 0.8)
    };
    match rk4_evolve(&model(), &rho0, &cfg, &mut []) {
        Err(Error::Integration { time, reason }) => {
            assert!(time > 0.0);
            assert!(reason.contains("halve dt"));
        }
        other => panic!("expected an integration error, got {other:?}"),
    }
}

#[test]
fn states_outside_the_sector_are_rejected() {
    let b = basis();
    let one = DensityMatrix::new({
        let v = apply_creations(&b, &[2]).unwrap();
        &v * v.adjoint()
    })
    .unwrap();
    assert!(rk4_evolve(&model(), &one, &integrator(1.0, 0.1), &mut []).is_err());
}

#[test]
fn steady_state_quantumness_reaches_the_dark_value() {
    let cfg = EvolveConfig {
        integrator: integrator(30.0, 0.5),
        quantifier_every: 10.0,
        ..EvolveConfig::default()
    };
    let rec = evolve_chain(&cfg).unwrap();
    let q = rec.samples("q_particles");
    assert_eq!(q.first().unwrap().0, 0.0);
    assert!(q.first().unwrap().1.abs() < 1e-8);
    let dark = q_particles(
        &dark_state_4_2(&basis()).unwrap().density_matrix(),
        &OptimizerConfig::default().with_restarts(8),
    )
    .unwrap()
    .in_unit(LogBase::Bits);
    let last = q.last().unwrap();
    assert_eq!(last.0, 30.0);
    assert!((last.1 - dark.value).abs() < 1e-3);
    assert!((dark.value - 0.187_298_598_568_77).abs() < 1e-4);
    let csv = rec.to_csv();
    assert!(csv.starts_with(
        "t,purity,q_particles,concurrence,negativity,shifted_negativity,trace_err\n"
    ));
}

#[test]
fn dark_subspace_and_other_fillings() {
    let b = basis();
    let m = model();
    let p = m.dark_projector();
    assert!((linalg::trace(&p).re - 1.0).abs() < 1e-10);
    let dark = dark_state_4_2(&b).unwrap().density_matrix();
    assert!((m.dark_population(&dark).unwrap() - 1.0).abs() < 1e-10);
    assert_eq!(
        alternating_slater(&FockBasis::new(5).unwrap(), 4).unwrap().amplitudes(),
        &apply_creations(&FockBasis::new(5).unwrap(), &[1, 2, 3, 5]).unwrap()
    );
    // three particles on five sites: no concurrence or shifted negativity
    let cfg = EvolveConfig {
        modes: 5,
        particles: 3,
        integrator: integrator(2.0, 0.5),
        quantifier_every: 1.0,
        ..EvolveConfig::default()
    };
    let rec = evolve_chain(&cfg).unwrap();
    let names: Vec<&str> = rec.series.iter().map(|s| s.name.as_str()).collect();
    assert_eq!(names, ["purity", "q_particles", "negativity"]);
    assert!(rec.trace_err.iter().all(|&e| e < 1e-7));
}
