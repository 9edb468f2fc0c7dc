//! State specification files.
//!
//! A TOML document with one `[state]` table, either a builtin
//!
//! ```toml
//! [state]
//! builtin = "slater"     # dark_4_2 | slater | bell_modes
//! modes = 4
//! occupied = [1, 3]      # slater only
//! ```
//!
//! or an explicit density matrix, one string per row of space-separated
//! `re,im` entries:
//!
//! ```toml
//! [state]
//! rows = ["0.5,0 0.5,0", "0.5,0 0.5,0"]
//! ```

use crate::error::{CliError, CliResult};
use fermicorr::fock::{apply_creations, FockBasis};
use fermicorr::linalg::{CMatrix, C64};
use fermicorr::lindblad::dark_state_4_2;
use fermicorr::quantinfo::{DensityMatrix, PureState};
use serde::Deserialize;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Builtin {
    /// Equal superposition of all two-particle configurations on four modes.
    #[serde(rename = "dark_4_2")]
    Dark42,
    /// `a†_{i₁} ⋯ a†_{i_N} |vac⟩` for the listed modes.
    Slater,
    /// `(a†_i + a†_j)|vac⟩/√2`, one particle shared by two modes.
    BellModes,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateTable {
    builtin: Option<Builtin>,
    modes: Option<usize>,
    occupied: Option<Vec<usize>>,
    pair: Option<[usize; 2]>,
    rows: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateFile {
    state: StateTable,
}

/// A parsed state and a short description of where it came from.
#[derive(Debug, Clone)]
pub struct StateSpec {
    pub description: String,
    pub rho: DensityMatrix,
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Usage(format!("state spec: {}", msg.into()))
}

pub fn load(path: &Path) -> CliResult<StateSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse(text: &str) -> CliResult<StateSpec> {
    let file: StateFile = toml::from_str(text).map_err(|e| bad(e.to_string()))?;
    let t = file.state;
    match (t.builtin, &t.rows) {
        (Some(_), Some(_)) => Err(bad("give either `builtin` or `rows`, not both")),
        (None, None) => Err(bad("missing `builtin` or `rows`")),
        (None, Some(rows)) => {
            if t.occupied.is_some() || t.pair.is_some() {
                return Err(bad("`occupied` and `pair` apply to builtins only"));
            }
            let m = parse_rows(rows)?;
            if let Some(l) = t.modes {
                if m.nrows() != 1usize << l {
                    return Err(bad(format!("{} rows do not match modes = {l}", m.nrows())));
                }
            }
            if !m.nrows().is_power_of_two() || m.nrows() < 2 {
                return Err(bad(format!("dimension {} is not 2^L", m.nrows())));
            }
            let rho = DensityMatrix::new(m).map_err(|e| bad(e.to_string()))?;
            Ok(StateSpec {
                description: format!("explicit {}x{} matrix", rho.dim(), rho.dim()),
                rho,
            })
        }
        (Some(b), None) => builtin(b, &t),
    }
}

fn builtin(b: Builtin, t: &StateTable) -> CliResult<StateSpec> {
    let lib = |e: fermicorr::error::Error| bad(e.to_string());
    match b {
        Builtin::Dark42 => {
            if t.modes.is_some_and(|l| l != 4) || t.occupied.is_some() || t.pair.is_some() {
                return Err(bad("dark_4_2 takes no parameters (it has 4 modes)"));
            }
            let basis = FockBasis::new(4).map_err(lib)?;
            Ok(StateSpec {
                description: "dark_4_2".into(),
                rho: dark_state_4_2(&basis).map_err(lib)?.density_matrix(),
            })
        }
        Builtin::Slater => {
            let l = t.modes.ok_or_else(|| bad("slater needs `modes`"))?;
            let occ = t.occupied.as_ref().ok_or_else(|| bad("slater needs `occupied`"))?;
            if t.pair.is_some() {
                return Err(bad("`pair` applies to bell_modes only"));
            }
            let basis = FockBasis::new(l).map_err(lib)?;
            let v = apply_creations(&basis, occ).map_err(lib)?;
            let psi = PureState::normalized(v).map_err(|_| bad("repeated mode in `occupied`"))?;
            Ok(StateSpec {
                description: format!("slater modes={l} occupied={occ:?}"),
                rho: psi.density_matrix(),
            })
        }
        Builtin::BellModes => {
            let l = t.modes.unwrap_or(2);
            let [i, j] = t.pair.unwrap_or([1, 2]);
            if t.occupied.is_some() {
                return Err(bad("`occupied` applies to slater only"));
            }
            if i == j {
                return Err(bad("`pair` needs two distinct modes"));
            }
            let basis = FockBasis::new(l).map_err(lib)?;
            let v = apply_creations(&basis, &[i]).map_err(lib)?
                + apply_creations(&basis, &[j]).map_err(lib)?;
            Ok(StateSpec {
                description: format!("bell_modes modes={l} pair=[{i}, {j}]"),
                rho: PureState::normalized(v).map_err(lib)?.density_matrix(),
            })
        }
    }
}

fn parse_rows(rows: &[String]) -> CliResult<CMatrix> {
    let n = rows.len();
    let mut m = CMatrix::zeros(n, n);
    for (r, row) in rows.iter().enumerate() {
        let entries: Vec<&str> = row.split_whitespace().collect();
        if entries.len() != n {
            return Err(bad(format!(
                "row {} has {} entries, expected {n}",
                r + 1,
                entries.len()
            )));
        }
        for (c, e) in entries.iter().enumerate() {
            let (re, im) = e
                .split_once(',')
                .ok_or_else(|| bad(format!("entry `{e}` is not `re,im`")))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| bad(format!("entry `{e}` is not a pair of finite numbers")))
            };
            m[(r, c)] = C64::new(parse(re)?, parse(im)?);
        }
    }
    Ok(m)
}
