use crate::error::{CliError, CliResult};
use crate::output::{complex_matrix, num, OutputDir};
use crate::{statefile, Format, Shared};
use clap::{Args, ValueEnum};
use fermicorr::measurement::ModePartition;
use fermicorr::optimize::OptimizerConfig;
use fermicorr::quantifiers::{
    mreq, occupation_quantumness, one_way_deficit, q_particles, q_sp, QuantifierResult,
};
use serde::Serialize;
use serde_json::{json, Value};
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[value(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
pub enum Quantifier {
    /// Quantumness of indistinguishable particles, minimized over single-particle bases.
    QParticles,
    /// One-body quantumness (summed single-mode deficits).
    QSp,
    /// One-way work deficit of the `--measured` modes.
    OneWayDeficit,
    /// Relative entropy of quantumness over the `--blocks` partition.
    Mreq,
    /// Occupation-basis dephasing in the given mode basis (no search).
    Occupation,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct QuantumnessArgs {
    /// State specification file (TOML).
    pub state: PathBuf,
    #[arg(long, value_enum, default_value_t = Quantifier::QParticles)]
    pub quantifier: Quantifier,
    /// Measured modes of `one_way_deficit`, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub measured: Vec<usize>,
    /// Partition of `mreq` as `1,2;3` (default: every mode on its own).
    #[arg(long)]
    pub blocks: Option<String>,
    /// Optimizer restarts.
    #[arg(long, default_value_t = 32)]
    pub restarts: usize,
    /// Nelder–Mead iterations per restart.
    #[arg(long = "max-iters", default_value_t = 2000)]
    pub max_iters: usize,
}

fn parse_blocks(text: &str, modes: usize) -> CliResult<ModePartition> {
    let blocks = text
        .split(';')
        .map(|b| {
            b.split(',')
                .map(|m| {
                    m.trim()
                        .parse::<usize>()
                        .map_err(|_| CliError::Usage(format!("--blocks: `{m}` is not a mode")))
                })
                .collect::<CliResult<Vec<usize>>>()
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(ModePartition::new(modes, blocks)?)
}

fn basis_json(r: &QuantifierResult) -> Value {
    json!({
        "single_particle": r.optimal_basis.single_particle.as_ref().map(|u| complex_matrix(u.matrix())),
        "local": r.optimal_basis.local.iter().map(|l| json!({
            "modes": l.modes,
            "unitary": complex_matrix(&l.unitary),
        })).collect::<Vec<_>>(),
    })
}

pub fn run(shared: &Shared, args: &QuantumnessArgs) -> CliResult<()> {
    if args.restarts == 0 {
        return Err(CliError::Usage("--restarts must be at least 1".into()));
    }
    let spec = statefile::load(&args.state)?;
    let rho = &spec.rho;
    let modes = rho.modes().expect("state files hold 2^L matrices");
    let unit = shared.log_base.unit();
    let cfg = OptimizerConfig::default()
        .with_seed(shared.seed)
        .with_restarts(args.restarts)
        .with_max_iters(args.max_iters);

    let result = match args.quantifier {
        Quantifier::QParticles => Some(q_particles(rho, &cfg)?),
        Quantifier::QSp => Some(q_sp(rho, &cfg)?),
        Quantifier::OneWayDeficit => Some(one_way_deficit(rho, &args.measured, &cfg)?),
        Quantifier::Mreq => {
            let partition = match &args.blocks {
                Some(b) => parse_blocks(b, modes)?,
                None => ModePartition::singletons(modes),
            };
            Some(mreq(rho, &partition, &cfg)?)
        }
        Quantifier::Occupation => None,
    }
    .map(|r| r.in_unit(unit));

    let mut value = json!({
        "quantifier": args.quantifier,
        "state": spec.description,
        "modes": modes,
        "unit": unit.label(),
    });
    let (v, converged) = match &result {
        Some(r) => {
            value["route"] = json!(r.route);
            value["optimal_basis"] = basis_json(r);
            value["optimizer"] = json!({
                "restarts": r.optimizer_stats.restarts,
                "iterations": r.optimizer_stats.iterations,
                "converged_restarts": r.optimizer_stats.converged_restarts,
                "gap": num(r.optimizer_stats.gap),
            });
            (r.value, r.converged)
        }
        None => (unit.from_nats(occupation_quantumness(rho)?), true),
    };
    value["value"] = num(v);
    value["converged"] = json!(converged);

    let mut out = OutputDir::create(&shared.out)?;
    match shared.format.unwrap_or(Format::Json) {
        Format::Json => out.write_json("result.json", &value)?,
        Format::Csv => {
            let q = serde_json::to_value(args.quantifier).expect("tag serializes");
            out.write(
                "result.csv",
                &format!(
                    "quantifier,value,unit,converged\n{},{},{},{converged}\n",
                    q.as_str().unwrap_or_default(),
                    fermicorr::report::format_sig(v),
                    unit.label()
                ),
            )?
        }
    };
    println!("{}", serde_json::to_string_pretty(&value).expect("JSON values serialize"));
    let config = json!({ "shared": shared, "args": args });
    out.finish("quantumness", config, shared.seed)?;
    Ok(())
}
