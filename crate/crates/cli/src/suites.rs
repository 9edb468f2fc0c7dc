//! Property suites: the fermionic Fock algebra, symmetric local
//! measurements, the characterization and ordering of the quantifiers, the
//! block-decomposition identity, the Schmidt-state deficit and the
//! classicality of `classical_state`.
//!
//! Every property is a quantity that must stay at or below a tolerance on
//! every generated case; the report keeps the worst case.

use clap::ValueEnum;
use fermicorr::ensembles::{sample_state, EnsembleKind, EnsembleSpec};
use fermicorr::error::Result;
use fermicorr::fock::{
    annihilation_op, bogoliubov_lift, creation_op, lift_by_minors, number_op, parity_op, FockBasis,
    SingleParticleUnitary,
};
use fermicorr::linalg::{self, CMatrix, CVector, C64};
use fermicorr::measurement::{angle_projectors, disturbance, ProjectiveMeasurement, ProjectorAngles};
use fermicorr::optimize::OptimizerConfig;
use fermicorr::quantifiers::{
    classical_state, disturbance_comparison, lemma_inequality_check, occupation_quantumness,
    one_body_density, one_way_deficit, q_particles, q_particles_warm, q_sp, rotate_state,
    single_mode_deficit_symmetric, Symmetry, SymmetryBlockDecomposition,
};
use fermicorr::quantinfo::{binary_entropy, DensityMatrix, LogBase, ProbabilityVector, PureState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    /// Canonical anticommutation relations, number/parity operators, lifts.
    Fock,
    /// Symmetric single-mode dephasing beats Haar-sampled measurements.
    Lemma,
    /// Q_p is the occupation dephasing of the best single-particle basis.
    Theorem1,
    /// Q_sp of pure states equals the summed one-body binary entropies.
    Theorem2,
    /// Q_p ≤ Q_sp.
    Theorem3,
    /// Block decomposition identity and symmetric measurements on two modes.
    Appendix,
    /// One-way deficit of a qubit Schmidt state and the angle-grid bound.
    Schmidt,
    /// Classically correlated states have vanishing Q_p at a fixed-point basis.
    Classicality,
}

#[derive(Debug, Clone, Serialize)]
pub struct Property {
    pub name: String,
    /// What is bounded, e.g. "q_p − q_sp (nats)".
    pub quantity: String,
    pub tolerance: f64,
    pub worst: f64,
    pub cases: usize,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub properties: Vec<Property>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.properties.iter().all(|p| p.passed)
    }
}

struct Tracker {
    name: &'static str,
    quantity: &'static str,
    tolerance: f64,
    worst: f64,
    cases: usize,
    nan: bool,
}

impl Tracker {
    fn new(name: &'static str, quantity: &'static str, tolerance: f64) -> Self {
        Self {
            name,
            quantity,
            tolerance,
            worst: f64::NEG_INFINITY,
            cases: 0,
            nan: false,
        }
    }

    fn record(&mut self, x: f64) {
        self.cases += 1;
        if x.is_nan() {
            self.nan = true;
        } else {
            self.worst = self.worst.max(x);
        }
    }

    fn finish(self) -> Property {
        Property {
            name: self.name.to_string(),
            quantity: self.quantity.to_string(),
            tolerance: self.tolerance,
            worst: if self.nan { f64::NAN } else { self.worst },
            cases: self.cases,
            passed: self.cases > 0 && !self.nan && self.worst <= self.tolerance,
        }
    }
}

/// Run sizes; `None` takes the suite default.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct SuiteOptions {
    pub seed: u64,
    pub samples: Option<usize>,
}

impl Suite {
    /// Number of generated states (or unitaries) per run by default.
    pub fn default_samples(self) -> usize {
        match self {
            Suite::Fock => 3,
            Suite::Lemma => 240,
            Suite::Theorem1 => 60,
            Suite::Theorem2 => 100,
            Suite::Theorem3 => 500,
            Suite::Appendix => 60,
            Suite::Schmidt => 3,
            Suite::Classicality => 100,
        }
    }
}

pub fn run_suite(suite: Suite, opts: SuiteOptions) -> Result<SuiteReport> {
    let n = opts.samples.unwrap_or(suite.default_samples());
    let seed = opts.seed;
    let properties = match suite {
        Suite::Fock => fock(n, seed)?,
        Suite::Lemma => lemma(n, seed)?,
        Suite::Theorem1 => theorem1(n, seed)?,
        Suite::Theorem2 => theorem2(n, seed)?,
        Suite::Theorem3 => theorem3(n, seed)?,
        Suite::Appendix => appendix(n, seed)?,
        Suite::Schmidt => schmidt(seed)?,
        Suite::Classicality => classicality(n, seed)?,
    };
    Ok(SuiteReport {
        suite,
        seed,
        properties,
    })
}

fn optimizer(seed: u64, index: usize, restarts: usize) -> OptimizerConfig {
    OptimizerConfig::default()
        .with_seed(seed.wrapping_add(index as u64))
        .with_restarts(restarts)
}

/// The `index`-th random state on one parity sector (alternating with the
/// index) with a rank cycling through `1..=max_rank`.
fn sector_state(modes: usize, max_rank: usize, seed: u64, index: usize) -> Result<DensityMatrix> {
    let block = 1usize << (modes - 1);
    let rank = 1 + (index / 2) % max_rank.min(block);
    let spec = EnsembleSpec::new(EnsembleKind::ParitySector)
        .with_modes(modes)
        .with_rank(rank)
        .with_seed(seed);
    sample_state(&spec, index)
}

fn fock(n_unitaries: usize, seed: u64) -> Result<Vec<Property>> {
    let mut car = Tracker::new("anticommutation relations, L ≤ 6", "max |{a_i, a_j†} − δ_ij| and |{a_i, a_j}|", 1e-12);
    let mut counting = Tracker::new("number and parity operators", "max deviation from popcount / (−1)^popcount", 1e-12);
    for l in 1..=6 {
        let basis = FockBasis::new(l)?;
        let a: Vec<CMatrix> = (1..=l).map(|j| annihilation_op(&basis, j).map(|o| o.into_matrix())).collect::<Result<_>>()?;
        let ad: Vec<CMatrix> = (1..=l).map(|j| creation_op(&basis, j).map(|o| o.into_matrix())).collect::<Result<_>>()?;
        let id = CMatrix::identity(basis.dim(), basis.dim());
        for i in 0..l {
            for j in 0..l {
                let delta = if i == j { id.clone() } else { CMatrix::zeros(basis.dim(), basis.dim()) };
                car.record(linalg::max_abs(&(linalg::anticommutator(&a[i], &ad[j]) - delta)));
                car.record(linalg::max_abs(&linalg::anticommutator(&a[i], &a[j])));
            }
        }
        let nn = number_op(&basis);
        let pp = parity_op(&basis);
        let mut dev: f64 = 0.0;
        for k in 0..basis.dim() {
            let count = k.count_ones() as f64;
            let sign = if k.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            dev = dev.max((nn.matrix()[(k, k)] - C64::new(count, 0.0)).norm());
            dev = dev.max((pp.matrix()[(k, k)] - C64::new(sign, 0.0)).norm());
        }
        let off_diag = |m: &CMatrix| {
            let mut d = m.clone();
            d.fill_diagonal(C64::new(0.0, 0.0));
            linalg::max_abs(&d)
        };
        counting.record(dev.max(off_diag(nn.matrix())).max(off_diag(pp.matrix())));
    }

    let mut lift = Tracker::new("Bogoliubov lift", "max |Γ a†_j Γ† − Σ_k U_kj a†_k|, |Γ†Γ − I|, |Γ − Γ_minors|", 1e-9);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for l in 2..=5 {
        let basis = FockBasis::new(l)?;
        for _ in 0..n_unitaries {
            let u = SingleParticleUnitary::haar(l, &mut rng);
            let g = bogoliubov_lift(&basis, &u)?.into_matrix();
            let minors = lift_by_minors(&basis, &u)?.into_matrix();
            let mut dev = linalg::unitarity_defect(&g).max(linalg::max_abs(&(&g - &minors)));
            for j in 1..=l {
                let lhs = &g * creation_op(&basis, j)?.matrix() * g.adjoint();
                let mut rhs = CMatrix::zeros(basis.dim(), basis.dim());
                for k in 1..=l {
                    rhs += creation_op(&basis, k)?.into_matrix() * u.matrix()[(k - 1, j - 1)];
                }
                dev = dev.max(linalg::max_abs(&(lhs - rhs)));
            }
            lift.record(dev);
        }
    }
    Ok(vec![car.finish(), counting.finish(), lift.finish()])
}

fn lemma(n: usize, seed: u64) -> Result<Vec<Property>> {
    let mut ineq = Tracker::new(
        "symmetric dephasing ≤ 1000 Haar measurements",
        "symmetric − min sampled disturbance (nats)",
        1e-8,
    );
    let mut closed = Tracker::new(
        "closed form = one-way deficit",
        "|S(Π_sym ρ) − S(ρ) − one_way_deficit| (nats)",
        1e-5,
    );
    for i in 0..n {
        let modes = 2 + i % 3;
        let rho = sector_state(modes, 4, seed, i)?;
        let j = 1 + (i / 3) % modes;
        let report = lemma_inequality_check(&rho, &[j], Symmetry::Parity, 1000, seed.wrapping_add(i as u64))?;
        ineq.record(-report.margin);
        let c = single_mode_deficit_symmetric(&rho, j)?;
        let brute = one_way_deficit(&rho, &[j], &optimizer(seed, i, 4))?;
        closed.record((c - brute.value).abs());
    }
    Ok(vec![ineq.finish(), closed.finish()])
}

fn theorem1(n: usize, seed: u64) -> Result<Vec<Property>> {
    let mut attained = Tracker::new(
        "value attained by the reported basis",
        "|H{p} − S in the optimal basis − q_p| (nats)",
        1e-9,
    );
    let mut bound = Tracker::new(
        "q_p ≤ site-basis occupation dephasing",
        "q_p − (H{p} − S) in the site basis (nats)",
        1e-9,
    );
    let mut covariance = Tracker::new(
        "mode rotations map optima onto optima",
        "q_p(Γ(U)ρΓ(U)†) from the mapped optimum − q_p(ρ) (nats)",
        1e-8,
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..n {
        let modes = 3 + i % 2;
        let rho = sector_state(modes, 8, seed, i)?;
        let q = q_particles(&rho, &optimizer(seed, i, 4))?;
        let w = q.optimal_basis.fock_rotation(modes)?;
        attained.record((occupation_quantumness(&rho.conjugate_by(&w))? - q.value).abs());
        bound.record(q.value - occupation_quantumness(&rho)?);

        let u = SingleParticleUnitary::haar(modes, &mut rng);
        let rotated = rotate_state(&rho, &u)?;
        let mut mapped = q.optimal_basis.clone();
        mapped.single_particle = mapped
            .single_particle
            .map(|v| v.compose(&u.adjoint()));
        let q2 = q_particles_warm(&rotated, &optimizer(seed, i, 1), Some(&mapped))?;
        covariance.record(q2.value - q.value);
    }
    Ok(vec![attained.finish(), bound.finish(), covariance.finish()])
}

fn theorem2(n: usize, seed: u64) -> Result<Vec<Property>> {
    let mut equal = Tracker::new(
        "q_sp(|ψ⟩) = Σ_k h(eigenvalues of γ)",
        "|q_sp − Σ h(λ_k)| (nats)",
        1e-5,
    );
    for i in 0..n {
        let modes = 3 + i % 2;
        let spec = EnsembleSpec::new(EnsembleKind::ParitySector)
            .with_modes(modes)
            .with_rank(1)
            .with_seed(seed);
        let rho = sample_state(&spec, i)?;
        let gamma = one_body_density(&rho)?;
        let oracle: f64 = linalg::hermitian_eigenvalues(&gamma)
            .into_iter()
            .map(|x| binary_entropy(x.clamp(0.0, 1.0)))
            .sum();
        let s = q_sp(&rho, &optimizer(seed, i, 6))?;
        equal.record((s.value - oracle).abs());
    }
    Ok(vec![equal.finish()])
}

fn theorem3(n: usize, seed: u64) -> Result<Vec<Property>> {
    let mut order = Tracker::new("q_p ≤ q_sp", "q_p − q_sp (nats)", 1e-6);
    let mut nonneg = Tracker::new("q_p ≥ 0", "−q_p (nats)", 1e-12);
    for i in 0..n {
        let modes = 3 + i % 2;
        let rho = sector_state(modes, 8, seed, i)?;
        let s = q_sp(&rho, &optimizer(seed, i, 3))?;
        let p = q_particles_warm(&rho, &optimizer(seed, i, 2), Some(&s.optimal_basis))?;
        order.record(p.value - s.value);
        nonneg.record(-p.value);
    }
    Ok(vec![order.finish(), nonneg.finish()])
}

fn appendix(n: usize, seed: u64) -> Result<Vec<Property>> {
    let mut identity = Tracker::new(
        "S(ρ_SX‖P⊗P^θ(ρ_SX)) = Σ_j q_j S(ρ_j‖P(ρ_j))",
        "|extended − weighted block disturbance| (nats)",
        1e-9,
    );
    let mut pair = Tracker::new(
        "symmetric ≤ sampled disturbance on two measured modes",
        "symmetric − min of 200 sampled disturbances (nats)",
        1e-8,
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..n {
        let modes = 2 + i % 2;
        let spec = EnsembleSpec::new(EnsembleKind::ParityMixture)
            .with_modes(modes)
            .with_seed(seed);
        let rho = sample_state(&spec, i)?;
        let d = SymmetryBlockDecomposition::new(&rho, Symmetry::Parity)?;
        let j = 1 + i % modes;
        let u = linalg::haar_unitary(2, &mut rng);
        let p = ProjectiveMeasurement::local(modes, &[j], &u)?;
        identity.record((d.extended_disturbance(&p)? - d.weighted_block_disturbance(&p)?).abs());

        let modes = 3 + i % 2;
        let rho = sector_state(modes, 4, seed, i)?;
        let r = disturbance_comparison(&rho, &[1, 2], Symmetry::Parity, 200, seed.wrapping_add(i as u64))?;
        pair.record(-r.margin);
    }
    Ok(vec![identity.finish(), pair.finish()])
}

/// `√p₁ |a₁ b₁⟩ + √(1−p₁) |a₂ b₂⟩` with `a` the occupation of mode 1 and `b`
/// on modes 2, 3; `ua`, `ub` map the occupation basis onto the Schmidt bases.
fn schmidt_state(p1: f64, ua: &CMatrix, ub: &CMatrix) -> Result<DensityMatrix> {
    let mut v = CVector::zeros(8);
    for (i, w) in [p1, 1.0 - p1].into_iter().enumerate() {
        for a in 0..2 {
            for b in 0..4 {
                v[a * 4 + b] += ua[(a, i)] * ub[(b, i)] * w.sqrt();
            }
        }
    }
    Ok(PureState::new(v)?.density_matrix())
}

fn schmidt(seed: u64) -> Result<Vec<Property>> {
    let mut deficit = Tracker::new("one_way_deficit = h(p₁)", "|one_way_deficit − h(p₁)| (nats)", 1e-5);
    let mut grid = Tracker::new(
        "h(p̃₁) ≥ h(p₁) on a 61×61 angle grid",
        "h(p₁) − S(ρ‖Π^(φ,θ)ρ) (nats)",
        1e-12,
    );
    let mut formula = Tracker::new(
        "grid dephasing = h(cos²φ p₁ + sin²φ (1 − p₁))",
        "|S(ρ‖Π^(φ,θ)ρ) − h(p̃₁)| (nats)",
        1e-10,
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let basis = FockBasis::new(3)?;
    for (i, p1) in [0.1f64, 0.25, 0.5].into_iter().enumerate() {
        let ua = linalg::haar_unitary(2, &mut rng);
        let ub = linalg::haar_unitary(4, &mut rng);
        let rho = schmidt_state(p1, &ua, &ub)?;
        let r = one_way_deficit(&rho, &[1], &optimizer(seed, i, 4))?;
        deficit.record((r.value - binary_entropy(p1)).abs());

        // Schmidt basis of A = occupation basis of mode 1
        let rho = schmidt_state(p1, &CMatrix::identity(2, 2), &ub)?;
        for k in 0..61 {
            let phi = PI * k as f64 / 60.0;
            for l in 0..61 {
                let theta = 2.0 * PI * l as f64 / 61.0;
                let m = angle_projectors(&basis, 1, ProjectorAngles::new(phi, theta)?)?;
                let d = disturbance(&rho, &m)?;
                let c2 = phi.cos().powi(2);
                grid.record(binary_entropy(p1) - d);
                formula.record((d - binary_entropy(c2 * p1 + (1.0 - c2) * (1.0 - p1))).abs());
            }
        }
    }
    Ok(vec![deficit.finish(), grid.finish(), formula.finish()])
}

fn classicality(n: usize, seed: u64) -> Result<Vec<Property>> {
    let mut vanish = Tracker::new("q_p(χ) ≤ 1e-5", "q_p (bits)", 1e-5);
    let mut fixed = Tracker::new(
        "optimal basis is a fixed point of χ",
        "max |Π(χ) − χ| in the reported basis",
        1e-5,
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..n {
        let modes = 3 + i % 2;
        let basis = FockBasis::new(modes)?;
        let raw: Vec<f64> = (0..basis.dim()).map(|_| rng.random::<f64>()).collect();
        let total: f64 = raw.iter().sum();
        let p = ProbabilityVector::new(raw.iter().map(|x| x / total).collect())?;
        let u = SingleParticleUnitary::haar(modes, &mut rng);
        let chi = classical_state(&basis, &p, &u)?;
        let r = q_particles(&chi, &optimizer(seed, i, 16))?.in_unit(LogBase::Bits);
        vanish.record(r.value);
        let all: Vec<usize> = (1..=modes).collect();
        let m = r.optimal_basis.measurement(modes, &all)?;
        fixed.record(linalg::max_abs(&(m.dephase_matrix(chi.matrix())? - chi.matrix())));
    }
    Ok(vec![vanish.finish(), fixed.finish()])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_runs_pass() {
        for suite in [Suite::Fock, Suite::Lemma, Suite::Theorem3, Suite::Appendix] {
            let r = run_suite(suite, SuiteOptions { seed: 1, samples: Some(4) }).unwrap();
            assert!(r.passed(), "{r:#?}");
        }
    }

    #[test]
    fn tracker_fails_on_nan_and_empty() {
        let mut t = Tracker::new("x", "x", 1.0);
        assert!(!Tracker::new("x", "x", 1.0).finish().passed);
        t.record(f64::NAN);
        assert!(!t.finish().passed);
    }
}
