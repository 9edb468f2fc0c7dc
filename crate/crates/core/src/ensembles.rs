//! Parity-symmetric random-state ensembles and the local-projector
//! landscape `T_E(φ, θ)`: the ensemble average of the excess disturbance of
//! the single-mode measurement `{|ψ₁(φ,θ)⟩, |ψ₂(φ,θ)⟩}` over the per-state
//! minimum.

use crate::error::{Error, Result};
use crate::fock::{check_mode, mode_bit, parity_of};
use crate::linalg::{self, CMatrix, C64};
use crate::measurement::angle_rotation;
use crate::optimize::OptimizerConfig;
use crate::quantifiers::one_way_deficit;
use crate::quantinfo::{self, DensityMatrix, LogBase};
use crate::report::format_sig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Write as _;

/// States per work unit; fixed so that reductions do not depend on the
/// number of worker threads.
const CHUNK: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleKind {
    /// Supported on one parity sector (`E_par^(1)`); the sector alternates
    /// with the sample index.
    ParitySector,
    /// `q ρ_even ⊕ (1 − q) ρ_odd` with `q` uniform on `[0, 1]` (`E_par`).
    ParityMixture,
    /// Occupation-basis states `|n⟩⟨n|` of either parity; classical by
    /// construction, for calibration.
    OccupationStates,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub modes: usize,
    pub measured_mode: usize,
    pub sample_size: usize,
    /// Ancilla dimension of the induced measure; `None` is the block
    /// dimension (Hilbert–Schmidt measure).
    pub rank: Option<usize>,
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn new(kind: EnsembleKind) -> Self {
        Self {
            kind,
            modes: 3,
            measured_mode: 1,
            sample_size: 10_000,
            rank: None,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_samples(mut self, n: usize) -> Self {
        self.sample_size = n;
        self
    }

    pub fn with_rank(mut self, rank: usize) -> Self {
        self.rank = Some(rank);
        self
    }

    pub fn with_modes(mut self, modes: usize) -> Self {
        self.modes = modes;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.modes < 2 || self.modes > 10 {
            return Err(Error::Precondition(format!(
                "ensembles need 2 ≤ L ≤ 10 modes, got {}",
                self.modes
            )));
        }
        check_mode(self.measured_mode, self.modes)?;
        if self.sample_size == 0 {
            return Err(Error::Precondition("sample_size must be at least 1".into()));
        }
        if self.rank == Some(0) {
            return Err(Error::Precondition("rank must be at least 1".into()));
        }
        Ok(())
    }

    fn block_dim(&self) -> usize {
        1 << (self.modes - 1)
    }

    pub fn effective_rank(&self) -> usize {
        self.rank.unwrap_or(self.block_dim())
    }
}

fn parity_indices(modes: usize, parity: usize) -> Vec<usize> {
    (0..1usize << modes).filter(|&i| parity_of(i) == parity).collect()
}

/// Induced-measure state on the listed indices, scaled to trace `weight`.
fn induced_block(
    out: &mut CMatrix,
    idx: &[usize],
    rank: usize,
    weight: f64,
    rng: &mut ChaCha8Rng,
) {
    let g = linalg::ginibre(idx.len(), rank, rng);
    let b = &g * g.adjoint();
    let scale = weight / linalg::trace(&b).re;
    for (r, &i) in idx.iter().enumerate() {
        for (c, &j) in idx.iter().enumerate() {
            out[(i, j)] = b[(r, c)] * scale;
        }
    }
}

/// The `index`-th sample; a deterministic function of `(spec, index)`.
pub fn sample_state(spec: &EnsembleSpec, index: usize) -> Result<DensityMatrix> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(index as u64);
    let dim = 1usize << spec.modes;
    let rank = spec.effective_rank();
    let mut m = CMatrix::zeros(dim, dim);
    match spec.kind {
        EnsembleKind::ParitySector => {
            let idx = parity_indices(spec.modes, index % 2);
            induced_block(&mut m, &idx, rank, 1.0, &mut rng);
        }
        EnsembleKind::ParityMixture => {
            let q: f64 = rng.random();
            induced_block(&mut m, &parity_indices(spec.modes, 0), rank, q, &mut rng);
            induced_block(&mut m, &parity_indices(spec.modes, 1), rank, 1.0 - q, &mut rng);
        }
        EnsembleKind::OccupationStates => {
            let n = rng.random_range(0..dim);
            m[(n, n)] = C64::new(1.0, 0.0);
        }
    }
    Ok(DensityMatrix::from_trusted(m))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridDims {
    pub n_phi: usize,
    pub n_theta: usize,
}

impl Default for GridDims {
    fn default() -> Self {
        Self {
            n_phi: 61,
            n_theta: 61,
        }
    }
}

impl GridDims {
    fn validate(&self) -> Result<()> {
        if self.n_phi < 2 || self.n_theta < 1 {
            return Err(Error::Precondition(format!(
                "grid needs n_phi ≥ 2 and n_theta ≥ 1, got {}×{}",
                self.n_phi, self.n_theta
            )));
        }
        Ok(())
    }

    /// `φ_k = kπ/(n_φ − 1)`, endpoints included.
    pub fn phis(&self) -> Vec<f64> {
        (0..self.n_phi)
            .map(|k| PI * k as f64 / (self.n_phi - 1) as f64)
            .collect()
    }

    /// `θ_l = 2πl/n_θ`.
    pub fn thetas(&self) -> Vec<f64> {
        (0..self.n_theta)
            .map(|l| 2.0 * PI * l as f64 / self.n_theta as f64)
            .collect()
    }

    /// Whether row `k` is one of the occupation-basis lines φ ∈ {0, π/2, π}.
    pub fn is_symmetric_row(&self, k: usize) -> bool {
        k == 0 || k + 1 == self.n_phi || 2 * k + 1 == self.n_phi
    }

    pub fn cells(&self) -> usize {
        self.n_phi * self.n_theta
    }
}

/// How the per-state reference minimum `Q(ρ)` is obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceMinimum {
    /// Minimum over the scanned grid; `T ≥ 0` holds exactly.
    Grid,
    /// The smaller of the grid minimum and a continuous search over the
    /// measured mode's U(2), for spot checks.
    Continuous(OptimizerConfig),
}

/// Rotation coefficients of one grid cell: for each outcome row `k` of the
/// 2×2 rotation, the weights of `A`, `B`, `B†`, `C` in the dephased block.
#[derive(Clone, Copy)]
struct CellWeights([[C64; 4]; 2]);

impl CellWeights {
    fn new(phi: f64, theta: f64) -> Self {
        let v = angle_rotation(phi, theta);
        Self(std::array::from_fn(|k| {
            let (a, b) = (v[(k, 0)], v[(k, 1)]);
            [a * a.conj(), a * b.conj(), b * a.conj(), b * b.conj()]
        }))
    }
}

/// Blocks of `ρ` with respect to the measured mode: `A` (empty), `C`
/// (occupied) and the coherence `B = ⟨·0|ρ|·1⟩`.
struct ModeBlocks {
    a: CMatrix,
    b: CMatrix,
    bd: CMatrix,
    c: CMatrix,
}

impl ModeBlocks {
    fn new(rho: &CMatrix, modes: usize, mode: usize) -> Self {
        let bit = mode_bit(mode, modes);
        let zeros: Vec<usize> = (0..rho.nrows()).filter(|i| i & bit == 0).collect();
        let n = zeros.len();
        let at = |r: usize, c: usize, rb: usize, cb: usize| rho[(zeros[r] | rb, zeros[c] | cb)];
        let b = CMatrix::from_fn(n, n, |r, c| at(r, c, 0, bit));
        Self {
            a: CMatrix::from_fn(n, n, |r, c| at(r, c, 0, 0)),
            bd: b.adjoint(),
            b,
            c: CMatrix::from_fn(n, n, |r, c| at(r, c, bit, bit)),
        }
    }

    /// `S(Π(ρ))` for the measurement of the occupation basis.
    fn occupation_entropy(&self) -> f64 {
        quantinfo::block_entropy(&self.a) + quantinfo::block_entropy(&self.c)
    }

    fn rotated_entropy(&self, w: &CellWeights, scratch: &mut CMatrix) -> f64 {
        let mut s = 0.0;
        for k in 0..2 {
            let [wa, wb, wbd, wc] = w.0[k];
            for r in 0..self.a.nrows() {
                for c in 0..self.a.ncols() {
                    scratch[(r, c)] = wa * self.a[(r, c)]
                        + wb * self.b[(r, c)]
                        + wbd * self.bd[(r, c)]
                        + wc * self.c[(r, c)];
                }
            }
            s += scratch
                .symmetric_eigenvalues()
                .iter()
                .filter(|&&x| x > quantinfo::EPS_EIG)
                .map(|&x| -x * x.ln())
                .sum::<f64>();
        }
        s
    }
}

/// Per-state table of `S(Π^{(φ,θ)}[ρ])` over the grid, φ-major. `S(ρ)` is
/// omitted: it cancels in every difference used here.
struct StateScan {
    entropies: Vec<f64>,
}

struct Scanner {
    dims: GridDims,
    weights: Vec<Option<CellWeights>>,
    modes: usize,
    mode: usize,
}

impl Scanner {
    fn new(dims: GridDims, modes: usize, mode: usize) -> Self {
        let phis = dims.phis();
        let thetas = dims.thetas();
        let mut weights = Vec::with_capacity(dims.cells());
        for (k, &phi) in phis.iter().enumerate() {
            for &theta in &thetas {
                weights.push(if dims.is_symmetric_row(k) {
                    None
                } else {
                    Some(CellWeights::new(phi, theta))
                });
            }
        }
        Self {
            dims,
            weights,
            modes,
            mode,
        }
    }

    fn scan(&self, rho: &DensityMatrix) -> StateScan {
        let blocks = ModeBlocks::new(rho.matrix(), self.modes, self.mode);
        // the occupation lines are one measurement; evaluating it once keeps
        // those cells bit-identical
        let symmetric = blocks.occupation_entropy();
        let n = blocks.a.nrows();
        let mut scratch = CMatrix::zeros(n, n);
        let entropies = self
            .weights
            .iter()
            .map(|w| match w {
                None => symmetric,
                Some(w) => blocks.rotated_entropy(w, &mut scratch),
            })
            .collect();
        StateScan { entropies }
    }
}

impl StateScan {
    fn minimum(&self) -> f64 {
        self.entropies.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Per-state reference minimum `Q(ρ)` in nats: the one-way deficit of the
/// measured mode restricted to the grid (or refined).
fn reference(
    rho: &DensityMatrix,
    scan: &StateScan,
    spec: &EnsembleSpec,
    how: &ReferenceMinimum,
) -> Result<(f64, f64)> {
    let s_rho = quantinfo::von_neumann_entropy(rho)?;
    let grid = scan.minimum();
    let q = match how {
        ReferenceMinimum::Grid => grid - s_rho,
        ReferenceMinimum::Continuous(cfg) => {
            let cont = one_way_deficit(rho, &[spec.measured_mode], cfg)?.value;
            (grid - s_rho).min(cont)
        }
    };
    Ok((q, s_rho))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LandscapeGrid {
    pub spec: EnsembleSpec,
    pub dims: GridDims,
    pub phis: Vec<f64>,
    pub thetas: Vec<f64>,
    /// Mean of `T` per cell, φ-major, in `unit`.
    pub mean: Vec<f64>,
    /// Standard error of the mean per cell.
    pub se: Vec<f64>,
    pub samples: usize,
    /// Per-state reference minimum `Q(ρ)`, in sample order.
    pub minima: Vec<f64>,
    pub unit: LogBase,
}

impl LandscapeGrid {
    pub fn cell(&self, k: usize, l: usize) -> (f64, f64) {
        let i = k * self.dims.n_theta + l;
        (self.mean[i], self.se[i])
    }

    pub fn in_unit(mut self, unit: LogBase) -> Self {
        let f = unit.from_nats(self.unit.to_nats(1.0));
        for v in self
            .mean
            .iter_mut()
            .chain(self.se.iter_mut())
            .chain(self.minima.iter_mut())
        {
            *v *= f;
        }
        self.unit = unit;
        self
    }

    /// CSV with columns `phi, theta, T_mean, T_se, n`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("phi,theta,T_mean,T_se,n\n");
        for (k, &phi) in self.phis.iter().enumerate() {
            for (l, &theta) in self.thetas.iter().enumerate() {
                let (m, se) = self.cell(k, l);
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    format_sig(phi),
                    format_sig(theta),
                    format_sig(m),
                    format_sig(se),
                    self.samples
                );
            }
        }
        out
    }
}

/// Per-chunk partial sums of `T` and `T²` per cell, plus the state minima.
struct Partial {
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
    minima: Vec<f64>,
}

fn scan_chunk(
    spec: &EnsembleSpec,
    scanner: &Scanner,
    how: &ReferenceMinimum,
    range: std::ops::Range<usize>,
) -> Result<Partial> {
    let cells = scanner.dims.cells();
    let mut p = Partial {
        sum: vec![0.0; cells],
        sum_sq: vec![0.0; cells],
        minima: Vec::with_capacity(range.len()),
    };
    for index in range {
        let rho = sample_state(spec, index)?;
        let scan = scanner.scan(&rho);
        let (q, s_rho) = reference(&rho, &scan, spec, how)?;
        for (i, &s) in scan.entropies.iter().enumerate() {
            let t = (s - s_rho) - q;
            p.sum[i] += t;
            p.sum_sq[i] += t * t;
        }
        p.minima.push(q);
    }
    Ok(p)
}

fn chunked<T: Send>(
    n: usize,
    f: impl Fn(std::ops::Range<usize>) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| f(c * CHUNK..((c + 1) * CHUNK).min(n)))
        .collect()
}

/// Monte-Carlo estimate of `T_E(φ, θ)` over the grid, in nats.
pub fn t_landscape(spec: &EnsembleSpec, dims: GridDims) -> Result<LandscapeGrid> {
    t_landscape_with(spec, dims, &ReferenceMinimum::Grid)
}

pub fn t_landscape_with(
    spec: &EnsembleSpec,
    dims: GridDims,
    how: &ReferenceMinimum,
) -> Result<LandscapeGrid> {
    spec.validate()?;
    dims.validate()?;
    let scanner = Scanner::new(dims, spec.modes, spec.measured_mode);
    let n = spec.sample_size;
    let parts = chunked(n, |r| scan_chunk(spec, &scanner, how, r))?;
    // reduce in chunk order
    let cells = dims.cells();
    let mut sum = vec![0.0; cells];
    let mut sum_sq = vec![0.0; cells];
    let mut minima = Vec::with_capacity(n);
    for p in parts {
        for i in 0..cells {
            sum[i] += p.sum[i];
            sum_sq[i] += p.sum_sq[i];
        }
        minima.extend(p.minima);
    }
    let nf = n as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / nf).collect();
    let se = if n > 1 {
        mean.iter()
            .zip(&sum_sq)
            .map(|(m, s2)| ((s2 - nf * m * m).max(0.0) / (nf - 1.0) / nf).sqrt())
            .collect()
    } else {
        vec![0.0; cells]
    };
    Ok(LandscapeGrid {
        spec: spec.clone(),
        dims,
        phis: dims.phis(),
        thetas: dims.thetas(),
        mean,
        se,
        samples: n,
        minima,
        unit: LogBase::Nats,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `bins + 1` increasing edges.
    pub edges: Vec<f64>,
    /// Probability mass per bin; sums to one.
    pub prob: Vec<f64>,
    pub unit: LogBase,
}

impl Histogram {
    /// Histogram of `values` on `[0, upper]`; values outside are clamped
    /// into the end bins.
    pub fn from_values(values: &[f64], bins: usize, upper: f64, unit: LogBase) -> Result<Self> {
        if bins == 0 || !(upper > 0.0) || values.is_empty() {
            return Err(Error::Precondition(
                "histogram needs bins ≥ 1, a positive range and at least one value".into(),
            ));
        }
        let width = upper / bins as f64;
        let mut counts = vec![0usize; bins];
        for &v in values {
            let b = ((v / width).floor().max(0.0) as usize).min(bins - 1);
            counts[b] += 1;
        }
        let n = values.len() as f64;
        Ok(Self {
            edges: (0..=bins).map(|b| b as f64 * width).collect(),
            prob: counts.iter().map(|&c| c as f64 / n).collect(),
            unit,
        })
    }

    /// CSV with columns `bin_left, bin_right, prob`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_left,bin_right,prob\n");
        for (b, p) in self.prob.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{}",
                format_sig(self.edges[b]),
                format_sig(self.edges[b + 1]),
                format_sig(*p)
            );
        }
        out
    }
}

/// Distribution of the per-state quantumness `Q(ρ)` (grid one-way deficit of
/// the measured mode) on `[0, ln 2]`, the range of a single-mode deficit.
pub fn quantumness_histogram(
    spec: &EnsembleSpec,
    bins: usize,
    dims: GridDims,
    unit: LogBase,
) -> Result<Histogram> {
    spec.validate()?;
    dims.validate()?;
    let scanner = Scanner::new(dims, spec.modes, spec.measured_mode);
    let minima: Vec<f64> = chunked(spec.sample_size, |r| {
        r.map(|index| {
            let rho = sample_state(spec, index)?;
            let scan = scanner.scan(&rho);
            Ok(unit.from_nats(reference(&rho, &scan, spec, &ReferenceMinimum::Grid)?.0))
        })
        .collect::<Result<Vec<f64>>>()
    })?
    .into_iter()
    .flatten()
    .collect();
    Histogram::from_values(&minima, bins, unit.from_nats(2f64.ln()), unit)
}
