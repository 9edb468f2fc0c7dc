//! Purely dissipative evolution under number-conserving chain operators
//! `L_j = (a†_j + a†_{j+1})(a_j − a_{j+1})`, integrated with classic RK4 in a
//! fixed particle-number sector.

use crate::entanglement::{
    balanced_cut, fermionic_concurrence, mode_negativity, shifted_negativity,
};
use crate::error::{Error, Result};
use crate::fock::{annihilation_op, apply_creations, creation_op, FockBasis, NumberSector, Operator};
use crate::linalg::{self, CMatrix, C64};
use crate::optimize::OptimizerConfig;
use crate::quantifiers::{q_particles_warm, OptimalBasis};
use crate::quantinfo::{DensityMatrix, LogBase, PureState};
use crate::report::format_sig;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Largest negative eigenvalue tolerated at a record point before the
/// integration is declared unstable.
pub const POSITIVITY_TOL: f64 = 1e-6;

/// The `L − 1` open-boundary chain operators.
pub fn chain_lindblad_ops(basis: &FockBasis) -> Result<Vec<Operator>> {
    let modes = basis.modes();
    if modes < 2 {
        return Err(Error::Precondition(format!(
            "the chain needs at least two sites, got {modes}"
        )));
    }
    (1..modes)
        .map(|j| {
            let plus = creation_op(basis, j)?.into_matrix() + creation_op(basis, j + 1)?.matrix();
            let minus =
                annihilation_op(basis, j)?.into_matrix() - annihilation_op(basis, j + 1)?.matrix();
            Operator::new(basis, plus * minus)
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct LindbladModel {
    basis: FockBasis,
    rate: f64,
    ops: Vec<CMatrix>,
    /// `Σ_j L_j† L_j`
    decay: CMatrix,
    hamiltonian: CMatrix,
    sector: Option<NumberSector>,
}

impl LindbladModel {
    /// The chain model on the full Fock space with rate `J`.
    pub fn chain(basis: &FockBasis, rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::Precondition(format!("rate must be positive, got {rate}")));
        }
        let ops: Vec<CMatrix> = chain_lindblad_ops(basis)?
            .into_iter()
            .map(Operator::into_matrix)
            .collect();
        let dim = basis.dim();
        Ok(Self::assemble(*basis, rate, ops, CMatrix::zeros(dim, dim), None))
    }

    /// The chain model restricted to the `particles`-particle sector.
    pub fn chain_in_sector(basis: &FockBasis, rate: f64, particles: usize) -> Result<Self> {
        Self::chain(basis, rate)?.restricted(particles)
    }

    fn assemble(
        basis: FockBasis,
        rate: f64,
        ops: Vec<CMatrix>,
        hamiltonian: CMatrix,
        sector: Option<NumberSector>,
    ) -> Self {
        let dim = hamiltonian.nrows();
        let decay = ops
            .iter()
            .fold(CMatrix::zeros(dim, dim), |acc, l| acc + l.adjoint() * l);
        Self {
            basis,
            rate,
            ops,
            decay,
            hamiltonian,
            sector,
        }
    }

    /// Restricts every operator to a particle-number sector; fails if an
    /// operator leaks out of it.
    pub fn restricted(self, particles: usize) -> Result<Self> {
        if self.sector.is_some() {
            return Err(Error::Precondition("model is already sector-restricted".into()));
        }
        let sector = NumberSector::new(self.basis, particles)?;
        let mut ops = Vec::with_capacity(self.ops.len());
        for l in &self.ops {
            // rows outside the sector may only be hit by columns outside it
            let idx = sector.indices();
            let leak = (0..self.basis.dim())
                .filter(|r| !idx.contains(r))
                .flat_map(|r| idx.iter().map(move |&c| (r, c)))
                .map(|(r, c)| l[(r, c)].norm())
                .fold(0.0, f64::max);
            if leak > 1e-12 {
                return Err(Error::Precondition(
                    "Lindblad operator does not conserve particle number".into(),
                ));
            }
            ops.push(sector.restrict_matrix(l)?);
        }
        let h = sector.restrict_matrix(&self.hamiltonian)?;
        Ok(Self::assemble(self.basis, self.rate, ops, h, Some(sector)))
    }

    pub fn basis(&self) -> &FockBasis {
        &self.basis
    }

    pub fn modes(&self) -> usize {
        self.basis.modes()
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// The operators in the working space (sector or full).
    pub fn ops(&self) -> &[CMatrix] {
        &self.ops
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        &self.hamiltonian
    }

    pub fn sector(&self) -> Option<&NumberSector> {
        self.sector.as_ref()
    }

    /// Dimension of the working space.
    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    /// Maps a full-space state into the working space.
    pub fn restrict_state(&self, rho: &DensityMatrix) -> Result<CMatrix> {
        if rho.dim() != self.basis.dim() {
            return Err(Error::Shape(format!(
                "state has dimension {}, Fock dimension is {}",
                rho.dim(),
                self.basis.dim()
            )));
        }
        match &self.sector {
            None => Ok(rho.matrix().clone()),
            Some(s) => {
                if s.leakage(rho.matrix()) > 1e-10 {
                    return Err(Error::Precondition(format!(
                        "state is not supported on the {}-particle sector",
                        s.particles()
                    )));
                }
                s.restrict_matrix(rho.matrix())
            }
        }
    }

    /// Maps a working-space matrix back to the full Fock space.
    pub fn embed_state(&self, m: &CMatrix) -> Result<CMatrix> {
        match &self.sector {
            None => Ok(m.clone()),
            Some(s) => s.embed_matrix(m),
        }
    }
}

/// `dρ/dt = −i[H, ρ] + J Σ_j (L_j ρ L_j† − ½{L_j† L_j, ρ})` on the model's
/// working space.
pub fn liouvillian_apply(model: &LindbladModel, rho: &CMatrix) -> Result<CMatrix> {
    let d = model.dim();
    if rho.nrows() != d || rho.ncols() != d {
        return Err(Error::Shape(format!(
            "state is {}x{}, model works on dimension {d}",
            rho.nrows(),
            rho.ncols()
        )));
    }
    Ok(liouvillian(model, rho))
}

fn liouvillian(model: &LindbladModel, rho: &CMatrix) -> CMatrix {
    let mut out = model
        .ops
        .iter()
        .fold(CMatrix::zeros(rho.nrows(), rho.ncols()), |acc, l| {
            acc + l * rho * l.adjoint()
        });
    out -= linalg::anticommutator(&model.decay, rho).scale(0.5);
    out = out.scale(model.rate);
    out -= linalg::commutator(&model.hamiltonian, rho) * C64::new(0.0, 1.0);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub t_max: f64,
    pub record_every: f64,
    pub trace_tol: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_max: 30.0,
            record_every: 0.01,
            trace_tol: 1e-7,
        }
    }
}

impl IntegratorConfig {
    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("dt", self.dt),
            ("t_max", self.t_max),
            ("record_every", self.record_every),
            ("trace_tol", self.trace_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Precondition(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_max / self.dt).round().max(1.0) as usize
    }

    /// Integration steps between record points.
    pub fn record_stride(&self) -> usize {
        (self.record_every / self.dt).round().max(1.0) as usize
    }
}

type ObservableFn<'a> = Box<dyn FnMut(f64, &DensityMatrix) -> Result<f64> + 'a>;

/// A named quantity evaluated on the full-space state at record points.
pub struct Observable<'a> {
    pub name: String,
    /// Evaluated on every `every`-th record point (and the last one).
    pub every: usize,
    eval: ObservableFn<'a>,
}

impl<'a> Observable<'a> {
    pub fn new(
        name: impl Into<String>,
        every: usize,
        eval: impl FnMut(f64, &DensityMatrix) -> Result<f64> + 'a,
    ) -> Self {
        Self {
            name: name.into(),
            every: every.max(1),
            eval: Box::new(eval),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    /// `None` where the observable was not sampled.
    pub values: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostics {
    pub dt: f64,
    pub steps: usize,
    pub rate: f64,
    pub modes: usize,
    pub particles: Option<usize>,
    pub max_trace_err: f64,
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub series: Vec<Series>,
    /// `|Tr ρ − 1|` at each record point.
    pub trace_err: Vec<f64>,
    /// Smallest eigenvalue of ρ at each record point.
    pub min_eigenvalue: Vec<f64>,
    pub diagnostics: StepDiagnostics,
    #[serde(skip)]
    final_state: Option<DensityMatrix>,
}

impl TrajectoryRecord {
    pub fn series(&self, name: &str) -> Option<&[Option<f64>]> {
        self.series
            .iter()
            .find(|s| s.name == name)
            .map(|s| s.values.as_slice())
    }

    /// Sampled `(t, value)` pairs of one series.
    pub fn samples(&self, name: &str) -> Vec<(f64, f64)> {
        self.series(name)
            .map(|vals| {
                self.times
                    .iter()
                    .zip(vals)
                    .filter_map(|(&t, v)| v.map(|v| (t, v)))
                    .collect()
            })
            .unwrap_or_default()
    }

    /// Full-space state at the last record point.
    pub fn final_state(&self) -> &DensityMatrix {
        self.final_state
            .as_ref()
            .expect("a trajectory always carries its final state")
    }

    /// CSV with columns `t`, every series in registration order, `trace_err`.
    /// Unsampled cells are left empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for s in &self.series {
            out.push(',');
            out.push_str(&s.name);
        }
        out.push_str(",trace_err\n");
        for (k, &t) in self.times.iter().enumerate() {
            out.push_str(&format_sig(t));
            for s in &self.series {
                out.push(',');
                if let Some(v) = s.values[k] {
                    out.push_str(&format_sig(v));
                }
            }
            let _ = writeln!(out, ",{}", format_sig(self.trace_err[k]));
        }
        out
    }
}

/// Fixed-step classic RK4 from `rho0` (full-space) under `model`.
///
/// At each record point the state is re-Hermitized, its trace and smallest
/// eigenvalue are checked, and the observables due at that point are
/// evaluated on the full-space state.
pub fn rk4_evolve(
    model: &LindbladModel,
    rho0: &DensityMatrix,
    cfg: &IntegratorConfig,
    observables: &mut [Observable<'_>],
) -> Result<TrajectoryRecord> {
    cfg.validate()?;
    let mut rho = model.restrict_state(rho0)?;
    let steps = cfg.steps();
    let stride = cfg.record_stride();
    let dt = cfg.dt;
    let mut record = TrajectoryRecord {
        times: Vec::new(),
        series: observables
            .iter()
            .map(|o| Series {
                name: o.name.clone(),
                values: Vec::new(),
            })
            .collect(),
        trace_err: Vec::new(),
        min_eigenvalue: Vec::new(),
        diagnostics: StepDiagnostics {
            dt,
            steps,
            rate: model.rate,
            modes: model.modes(),
            particles: model.sector.as_ref().map(NumberSector::particles),
            max_trace_err: 0.0,
            min_eigenvalue: f64::INFINITY,
        },
        final_state: None,
    };
    let mut n_record = 0usize;
    for step in 0..=steps {
        if step > 0 {
            let k1 = liouvillian(model, &rho);
            let k2 = liouvillian(model, &(&rho + k1.scale(dt / 2.0)));
            let k3 = liouvillian(model, &(&rho + k2.scale(dt / 2.0)));
            let k4 = liouvillian(model, &(&rho + k3.scale(dt)));
            rho += (k1 + k2.scale(2.0) + k3.scale(2.0) + k4).scale(dt / 6.0);
        }
        let last = step == steps;
        if step % stride != 0 && !last {
            continue;
        }
        let t = step as f64 * dt;
        rho = linalg::hermitian_part(&rho);
        let err = (linalg::trace(&rho).re - 1.0).abs();
        if !(err <= cfg.trace_tol) {
            return Err(Error::Integration {
                time: t,
                reason: format!(
                    "trace drifted by {err:.3e} (tolerance {:.1e}); halve dt (currently {dt})",
                    cfg.trace_tol
                ),
            });
        }
        let min_eig = linalg::hermitian_eigenvalues(&rho)[0];
        if !(min_eig >= -POSITIVITY_TOL) {
            return Err(Error::Integration {
                time: t,
                reason: format!(
                    "state lost positivity (eigenvalue {min_eig:.3e}); halve dt (currently {dt})"
                ),
            });
        }
        let full = DensityMatrix::from_trusted(model.embed_state(&rho)?);
        for (obs, series) in observables.iter_mut().zip(record.series.iter_mut()) {
            let due = n_record % obs.every == 0 || last;
            series
                .values
                .push(if due { Some((obs.eval)(t, &full)?) } else { None });
        }
        record.times.push(t);
        record.trace_err.push(err);
        record.min_eigenvalue.push(min_eig);
        record.diagnostics.max_trace_err = record.diagnostics.max_trace_err.max(err);
        record.diagnostics.min_eigenvalue = record.diagnostics.min_eigenvalue.min(min_eig);
        n_record += 1;
        if last {
            record.final_state = Some(full);
        }
    }
    Ok(record)
}

fn require_four_modes(basis: &FockBasis) -> Result<()> {
    if basis.modes() != 4 {
        return Err(Error::Precondition(format!(
            "this state is defined on four modes, got {}",
            basis.modes()
        )));
    }
    Ok(())
}

/// `Σ_{i<j} a†_i a†_j |vac⟩ / √6`, the common zero mode of the chain operators.
pub fn dark_state_4_2(basis: &FockBasis) -> Result<PureState> {
    require_four_modes(basis)?;
    let mut v = basis.vacuum() * C64::new(0.0, 0.0);
    for i in 1..=4 {
        for j in i + 1..=4 {
            v += apply_creations(basis, &[i, j])?;
        }
    }
    PureState::normalized(v)
}

/// The uncorrelated Slater determinant `a†_1 a†_3 |vac⟩`.
pub fn initial_state_fig2(basis: &FockBasis) -> Result<PureState> {
    require_four_modes(basis)?;
    alternating_slater(basis, 2)
}

/// Column names of the chain trajectory, in export order. Columns whose
/// quantity is undefined for the chosen `(L, N)` are left out.
pub const TRAJECTORY_SERIES: [&str; 5] = [
    "purity",
    "q_particles",
    "concurrence",
    "negativity",
    "shifted_negativity",
];

/// `N` fermions on alternating sites `1, 3, 5, …`, continuing on the even
/// sites once the odd ones are full; `a†_1 a†_3 |vac⟩` for `L = 4, N = 2`.
pub fn alternating_slater(basis: &FockBasis, particles: usize) -> Result<PureState> {
    let modes = basis.modes();
    if particles > modes {
        return Err(Error::Precondition(format!(
            "{particles} particles do not fit in {modes} modes"
        )));
    }
    let mut occupied: Vec<usize> = (1..=modes).step_by(2).chain((2..=modes).step_by(2)).collect();
    occupied.truncate(particles);
    occupied.sort_unstable();
    PureState::new(apply_creations(basis, &occupied)?)
}

impl LindbladModel {
    /// Projector (working space) onto the common kernel of all `L_j`: the
    /// dark subspace, left invariant by the evolution.
    pub fn dark_projector(&self) -> CMatrix {
        let eig = linalg::hermitian_part(&self.decay).symmetric_eigen();
        let d = self.dim();
        let mut p = CMatrix::zeros(d, d);
        for (k, &x) in eig.eigenvalues.iter().enumerate() {
            if x.abs() < 1e-10 {
                let v = eig.eigenvectors.column(k);
                p += &v * v.adjoint();
            }
        }
        p
    }

    /// Population of the dark subspace, `Tr(P_D ρ)`, for a full-space state.
    pub fn dark_population(&self, rho: &DensityMatrix) -> Result<f64> {
        let r = self.restrict_state(rho)?;
        Ok(linalg::trace(&(self.dark_projector() * r)).re)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolveConfig {
    pub modes: usize,
    pub particles: usize,
    pub rate: f64,
    pub integrator: IntegratorConfig,
    /// Time between `q_particles` evaluations; rounded to a multiple of
    /// `integrator.record_every`.
    pub quantifier_every: f64,
    pub optimizer: OptimizerConfig,
    pub log_base: LogBase,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self {
            modes: 4,
            particles: 2,
            rate: 1.0,
            integrator: IntegratorConfig::default(),
            quantifier_every: 0.05,
            optimizer: OptimizerConfig::default().with_restarts(4),
            log_base: LogBase::Bits,
        }
    }
}

/// The chain relaxation from [`alternating_slater`] in the `N`-particle
/// sector: purity, `Q_p` (warm-started from the
/// previous optimum), concurrence (`L = 4, N = 2`), site-basis negativity
/// across the balanced cut and the shifted negativity (`N = 2`).
pub fn evolve_chain(cfg: &EvolveConfig) -> Result<TrajectoryRecord> {
    let basis = FockBasis::new(cfg.modes)?;
    let model = LindbladModel::chain_in_sector(&basis, cfg.rate, cfg.particles)?;
    let rho0 = alternating_slater(&basis, cfg.particles)?.density_matrix();
    let every = (cfg.quantifier_every / cfg.integrator.record_every)
        .round()
        .max(1.0) as usize;
    let cut = balanced_cut(cfg.modes);
    let mut warm: Option<OptimalBasis> = None;
    let opt = cfg.optimizer.clone();
    let unit = cfg.log_base;
    let mut observables = vec![
        Observable::new(TRAJECTORY_SERIES[0], 1, |_, r| Ok(r.purity())),
        Observable::new(TRAJECTORY_SERIES[1], every, move |_, r| {
            let q = q_particles_warm(r, &opt, warm.as_ref())?;
            warm = Some(q.optimal_basis.clone());
            Ok(q.in_unit(unit).value)
        }),
    ];
    if cfg.modes == 4 && cfg.particles == 2 {
        observables.push(Observable::new(TRAJECTORY_SERIES[2], 1, |_, r| {
            Ok(fermionic_concurrence(r)?.value)
        }));
    }
    observables.push(Observable::new(TRAJECTORY_SERIES[3], 1, move |_, r| {
        Ok(mode_negativity(r, &cut)?.value)
    }));
    if cfg.particles == 2 {
        observables.push(Observable::new(TRAJECTORY_SERIES[4], 1, |_, r| {
            Ok(shifted_negativity(r)?.value)
        }));
    }
    rk4_evolve(&model, &rho0, &cfg.integrator, &mut observables)
}

/// Maximal time intervals on which the state is entangled (concurrence above
/// `min_concurrence`) yet has non-positive shifted negativity (≤ `neg_tol`):
/// the PPT-entangled windows.
pub fn ppt_windows(
    record: &TrajectoryRecord,
    neg_tol: f64,
    min_concurrence: f64,
) -> Vec<(f64, f64)> {
    let (Some(conc), Some(neg)) = (
        record.series("concurrence"),
        record.series("shifted_negativity"),
    ) else {
        return Vec::new();
    };
    let mut windows = Vec::new();
    let mut open: Option<(f64, f64)> = None;
    for (k, &t) in record.times.iter().enumerate() {
        let inside = matches!(
            (conc[k], neg[k]),
            (Some(c), Some(n)) if c > min_concurrence && n <= neg_tol
        );
        open = match (open, inside) {
            (None, true) => Some((t, t)),
            (Some((s, _)), true) => Some((s, t)),
            (Some(w), false) => {
                windows.push(w);
                None
            }
            (None, false) => None,
        };
    }
    windows.extend(open);
    windows
}
