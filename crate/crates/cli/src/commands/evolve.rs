use crate::error::{CliError, CliResult};
use crate::output::{num, nums, OutputDir};
use crate::{Format, Shared};
use clap::Args;
use fermicorr::fock::FockBasis;
use fermicorr::lindblad::{evolve_chain, ppt_windows, EvolveConfig, IntegratorConfig, LindbladModel};
use fermicorr::optimize::OptimizerConfig;
use fermicorr::report::format_sig;
use serde::Serialize;
use serde_json::{json, Map, Value};

/// Negativity at or below this counts as PPT.
pub const PPT_NEGATIVITY_TOL: f64 = 1e-6;
/// Concurrence above this counts as entangled.
pub const PPT_MIN_CONCURRENCE: f64 = 0.01;

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvolveArgs {
    /// Number of sites (modes).
    #[arg(long = "L", default_value_t = 4)]
    pub modes: usize,
    /// Number of particles.
    #[arg(long = "N", default_value_t = 2)]
    pub particles: usize,
    /// Dissipation rate J.
    #[arg(long = "J", default_value_t = 1.0)]
    pub rate: f64,
    /// RK4 step.
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    /// Final time.
    #[arg(long, default_value_t = 30.0)]
    pub tmax: f64,
    /// Time between recorded rows.
    #[arg(long = "record-every", default_value_t = 0.01)]
    pub record_every: f64,
    /// Time between q_particles evaluations.
    #[arg(long = "quantifier-every", default_value_t = 0.05)]
    pub quantifier_every: f64,
    /// Optimizer restarts per q_particles evaluation (plus a warm start).
    #[arg(long, default_value_t = 4)]
    pub restarts: usize,
}

pub fn run(shared: &Shared, args: &EvolveArgs) -> CliResult<()> {
    if args.restarts == 0 {
        return Err(CliError::Usage("--restarts must be at least 1".into()));
    }
    let unit = shared.log_base.unit();
    let cfg = EvolveConfig {
        modes: args.modes,
        particles: args.particles,
        rate: args.rate,
        integrator: IntegratorConfig {
            dt: args.dt,
            t_max: args.tmax,
            record_every: args.record_every,
            ..IntegratorConfig::default()
        },
        quantifier_every: args.quantifier_every,
        optimizer: OptimizerConfig::default()
            .with_seed(shared.seed)
            .with_restarts(args.restarts),
        log_base: unit,
    };
    let record = evolve_chain(&cfg)?;

    let basis = FockBasis::new(args.modes)?;
    let model = LindbladModel::chain_in_sector(&basis, args.rate, args.particles)?;
    let fidelity = model.dark_population(record.final_state())?;
    let windows = ppt_windows(&record, PPT_NEGATIVITY_TOL, PPT_MIN_CONCURRENCE);
    let last = |name: &str| record.samples(name).last().map(|&(_, v)| v);
    let summary = json!({
        "unit": unit.label(),
        "final_time": num(*record.times.last().expect("a trajectory has rows")),
        "rows": record.times.len(),
        "final_dark_fidelity": num(fidelity),
        "final_purity": last("purity").map(num),
        "final_q_particles": last("q_particles").map(num),
        "final_concurrence": last("concurrence").map(num),
        "max_trace_error": num(record.diagnostics.max_trace_err),
        "min_eigenvalue": num(record.diagnostics.min_eigenvalue),
        "ppt_windows": windows.iter().map(|&(a, b)| vec![num(a), num(b)]).collect::<Vec<_>>(),
    });

    let mut out = OutputDir::create(&shared.out)?;
    match shared.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let csv = record.to_csv();
            let (header, body) = csv.split_once('\n').expect("CSV has a header");
            let header: Vec<String> = header
                .split(',')
                .map(|c| match c {
                    "q_particles" => format!("q_particles_{}", unit.label()),
                    other => other.to_string(),
                })
                .collect();
            out.write("trajectory.csv", &format!("{}\n{body}", header.join(",")))?;
        }
        Format::Json => {
            let mut series = Map::new();
            for s in &record.series {
                series.insert(
                    s.name.clone(),
                    Value::Array(s.values.iter().map(|v| v.map_or(Value::Null, num)).collect()),
                );
            }
            out.write_json(
                "trajectory.json",
                &json!({
                    "unit": unit.label(),
                    "t": nums(&record.times),
                    "series": series,
                    "trace_err": nums(&record.trace_err),
                    "min_eigenvalue": nums(&record.min_eigenvalue),
                }),
            )?;
        }
    }
    out.write_json("summary.json", &summary)?;

    let windows_text = if windows.is_empty() {
        "none".to_string()
    } else {
        windows
            .iter()
            .map(|&(a, b)| format!("[{}, {}]", format_sig(a), format_sig(b)))
            .collect::<Vec<_>>()
            .join(" ")
    };
    println!(
        "final dark-state fidelity {} at t = {}; max trace error {}; PPT windows (t): {windows_text}",
        format_sig(fidelity),
        format_sig(*record.times.last().expect("a trajectory has rows")),
        format_sig(record.diagnostics.max_trace_err),
    );
    let config = json!({ "shared": shared, "args": args, "resolved": cfg });
    out.finish("evolve", config, shared.seed)?;
    Ok(())
}
