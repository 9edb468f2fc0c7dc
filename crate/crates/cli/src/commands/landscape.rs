use crate::error::{CliError, CliResult};
use crate::output::{num, nums, OutputDir};
use crate::{Format, Shared};
use clap::{Args, ValueEnum};
use fermicorr::ensembles::{t_landscape, EnsembleKind, EnsembleSpec, GridDims, Histogram, LandscapeGrid};
use fermicorr::quantinfo::LogBase;
use fermicorr::report::format_sig;
use serde::Serialize;
use serde_json::json;
use std::f64::consts::FRAC_PI_2;

/// Cells closer than this (in φ) to an occupation-basis line are exempt
/// from the positivity summary.
pub const LINE_MARGIN: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Ensemble {
    /// Mixtures of the two parity sectors.
    Par,
    /// States in a single parity sector.
    Par1,
    /// Occupation-basis states (calibration).
    Occupation,
}

impl Ensemble {
    fn kind(self) -> EnsembleKind {
        match self {
            Ensemble::Par => EnsembleKind::ParityMixture,
            Ensemble::Par1 => EnsembleKind::ParitySector,
            Ensemble::Occupation => EnsembleKind::OccupationStates,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LandscapeArgs {
    #[arg(long, value_enum, default_value_t = Ensemble::Par1)]
    pub ensemble: Ensemble,
    /// Number of modes.
    #[arg(long = "L", default_value_t = 3)]
    pub modes: usize,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    /// Ancilla dimension of the induced measure (default: block dimension).
    #[arg(long)]
    pub rank: Option<usize>,
    /// Grid size as `N_PHIxN_THETA`.
    #[arg(long, default_value = "61x61", value_parser = parse_grid)]
    pub grid: GridArg,
    /// Measured mode.
    #[arg(long, default_value_t = 1)]
    pub mode: usize,
    /// Histogram bins on [0, ln 2].
    #[arg(long, default_value_t = 20)]
    pub bins: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GridArg {
    pub n_phi: usize,
    pub n_theta: usize,
}

fn parse_grid(s: &str) -> Result<GridArg, String> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("`{s}` is not of the form NxM"))?;
    let n = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("`{t}` is not a count"));
    Ok(GridArg {
        n_phi: n(a)?,
        n_theta: n(b)?,
    })
}

/// Whether `phi` lies within `margin` of one of φ ∈ {0, π/2, π}, where the
/// measurement is the occupation basis.
pub fn near_occupation_line(phi: f64, margin: f64) -> bool {
    let d = (phi / FRAC_PI_2).round() * FRAC_PI_2 - phi;
    d.abs() <= margin
}

/// Grid-level statistics of a landscape, in its unit.
#[derive(Debug, Clone, Serialize)]
pub struct LandscapeSummary {
    pub global_min: CellStat,
    /// Largest `T` on the occupation-basis rows.
    pub symmetric_rows_max: CellStat,
    /// Smallest `T/SE` among cells farther than [`LINE_MARGIN`] from those rows.
    pub off_line_min_z: Option<CellStat>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CellStat {
    pub phi: f64,
    pub theta: f64,
    pub t: f64,
    pub se: f64,
}

impl CellStat {
    pub fn z(&self) -> f64 {
        if self.se > 0.0 {
            self.t / self.se
        } else if self.t > 0.0 {
            f64::INFINITY
        } else {
            0.0
        }
    }

    fn json(&self) -> serde_json::Value {
        json!({
            "phi": num(self.phi),
            "theta": num(self.theta),
            "T": num(self.t),
            "se": num(self.se),
            "z": num(self.z()),
        })
    }
}

pub fn summarize(grid: &LandscapeGrid) -> LandscapeSummary {
    let mut cells = Vec::with_capacity(grid.dims.cells());
    for (k, &phi) in grid.phis.iter().enumerate() {
        for (l, &theta) in grid.thetas.iter().enumerate() {
            let (t, se) = grid.cell(k, l);
            cells.push((k, CellStat { phi, theta, t, se }));
        }
    }
    let by = |f: &dyn Fn(&CellStat) -> f64, pick_max: bool, keep: &dyn Fn(usize, &CellStat) -> bool| {
        cells
            .iter()
            .filter(|(k, c)| keep(*k, c))
            .map(|(_, c)| *c)
            .reduce(|a, b| {
                let better = if pick_max { f(&b) > f(&a) } else { f(&b) < f(&a) };
                if better {
                    b
                } else {
                    a
                }
            })
    };
    LandscapeSummary {
        global_min: by(&|c| c.t, false, &|_, _| true).expect("grids are non-empty"),
        symmetric_rows_max: by(&|c| c.t, true, &|k, _| grid.dims.is_symmetric_row(k))
            .expect("row 0 is symmetric"),
        off_line_min_z: by(&|c| c.z(), false, &|_, c| !near_occupation_line(c.phi, LINE_MARGIN)),
    }
}

fn unit_header(csv: String, unit: LogBase, columns: &[&str]) -> String {
    let (header, body) = csv.split_once('\n').expect("CSV has a header");
    let header: Vec<String> = header
        .split(',')
        .map(|c| {
            if columns.contains(&c) {
                format!("{c}_{}", unit.label())
            } else {
                c.to_string()
            }
        })
        .collect();
    format!("{}\n{body}", header.join(","))
}

pub fn run(shared: &Shared, args: &LandscapeArgs) -> CliResult<()> {
    if args.bins == 0 {
        return Err(CliError::Usage("--bins must be at least 1".into()));
    }
    let unit = shared.log_base.unit();
    let mut spec = EnsembleSpec::new(args.ensemble.kind())
        .with_seed(shared.seed)
        .with_samples(args.samples)
        .with_modes(args.modes);
    spec.measured_mode = args.mode;
    if let Some(r) = args.rank {
        spec = spec.with_rank(r);
    }
    if args.mode == 0 || args.mode > args.modes {
        return Err(CliError::Usage(format!(
            "--mode {} outside 1..={}",
            args.mode, args.modes
        )));
    }
    let dims = GridDims {
        n_phi: args.grid.n_phi,
        n_theta: args.grid.n_theta,
    };
    let grid = t_landscape(&spec, dims)?.in_unit(unit);
    let hist = Histogram::from_values(&grid.minima, args.bins, unit.from_nats(2f64.ln()), unit)?;
    let summary = summarize(&grid);

    let mut out = OutputDir::create(&shared.out)?;
    match shared.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            out.write("landscape.csv", &unit_header(grid.to_csv(), unit, &["T_mean", "T_se"]))?;
            out.write("histogram.csv", &unit_header(hist.to_csv(), unit, &["bin_left", "bin_right"]))?;
        }
        Format::Json => {
            let rows = |v: &[f64]| -> Vec<serde_json::Value> {
                v.chunks(grid.dims.n_theta).map(nums).collect()
            };
            out.write_json(
                "landscape.json",
                &json!({
                    "unit": unit.label(),
                    "samples": grid.samples,
                    "phi": nums(&grid.phis),
                    "theta": nums(&grid.thetas),
                    "T_mean": rows(&grid.mean),
                    "T_se": rows(&grid.se),
                }),
            )?;
            out.write_json(
                "histogram.json",
                &json!({ "unit": unit.label(), "edges": nums(&hist.edges), "prob": nums(&hist.prob) }),
            )?;
        }
    }
    out.write_json(
        "summary.json",
        &json!({
            "unit": unit.label(),
            "ensemble": args.ensemble,
            "samples": grid.samples,
            "global_min": summary.global_min.json(),
            "symmetric_rows_max": summary.symmetric_rows_max.json(),
            "off_line_min_z": summary.off_line_min_z.map(|c| c.json()),
        }),
    )?;
    let g = summary.global_min;
    println!(
        "global minimum T = {} ± {} {} at (phi, theta) = ({}, {}); largest T on occupation rows = {}{}",
        format_sig(g.t),
        format_sig(g.se),
        unit.label(),
        format_sig(g.phi),
        format_sig(g.theta),
        format_sig(summary.symmetric_rows_max.t),
        summary
            .off_line_min_z
            .map(|c| format!("; smallest T/SE off those rows = {}", format_sig(c.z())))
            .unwrap_or_default(),
    );
    let config = json!({ "shared": shared, "args": args, "ensemble": spec, "grid": dims });
    out.finish("landscape", config, shared.seed)?;
    Ok(())
}
