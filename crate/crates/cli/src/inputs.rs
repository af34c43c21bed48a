//! Named and file-based states and observables.
//!
//! States: `zero`, `magic:<tau>`, `superposition:<alpha>,<beta>`, or a JSON file
//! holding either amplitudes (`{"amplitudes_re": [...], "amplitudes_im": [...]}`)
//! or an operator. Observables: `z:<j>`, `x:<j>`, `zstring:<m>`, `parity`, a
//! Pauli string such as `ZIXI`, or an operator JSON file.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use bp_core::circuit::InputState;
use bp_core::dense::c;
use bp_core::operator::OperatorFile;
use bp_core::{states, PauliSumOperator, PauliTerm};
use num_complex::Complex64;
use serde::Deserialize;

use crate::ConfigError;

#[derive(Deserialize)]
struct AmplitudeFile {
    amplitudes_re: Vec<f64>,
    #[serde(default)]
    amplitudes_im: Option<Vec<f64>>,
}

/// A state as a vector when one is available, otherwise as a density operator.
pub enum State {
    Pure(Vec<Complex64>),
    Density(PauliSumOperator),
}

impl State {
    pub fn n(&self) -> usize {
        match self {
            State::Pure(psi) => psi.len().trailing_zeros() as usize,
            State::Density(rho) => rho.n(),
        }
    }

    pub fn density(&self) -> Result<PauliSumOperator> {
        match self {
            State::Pure(psi) => Ok(PauliSumOperator::from_state(psi)?),
            State::Density(rho) => Ok(rho.clone()),
        }
    }

    pub fn input(&self) -> Result<InputState> {
        match self {
            State::Pure(psi) => Ok(InputState::pure(psi.clone())?),
            State::Density(rho) => Ok(InputState::from_density(rho)?),
        }
    }
}

fn config(msg: String) -> anyhow::Error {
    anyhow!(ConfigError(msg))
}

fn number(text: &str, what: &str) -> Result<f64> {
    text.trim().parse::<f64>().map_err(|_| config(format!("{what}: cannot parse {text:?} as a number")))
}

fn index(text: &str, what: &str) -> Result<usize> {
    text.trim().parse::<usize>().map_err(|_| config(format!("{what}: cannot parse {text:?} as an index")))
}

pub fn parse_state(spec: &str, n: Option<usize>) -> Result<State> {
    let (name, arg) = spec.split_once(':').unwrap_or((spec, ""));
    let need_n = || n.ok_or_else(|| config(format!("state {spec:?} needs --n")));
    match name {
        "zero" => Ok(State::Pure(states::computational_zero(need_n()?)?)),
        "magic" => Ok(State::Pure(states::magic_state(need_n()?, number(arg, "magic tau")?)?)),
        "superposition" => {
            let (a, b) = arg
                .split_once(',')
                .ok_or_else(|| config("superposition needs <alpha>,<beta>".into()))?;
            let (a, b) = (number(a, "alpha")?, number(b, "beta")?);
            Ok(State::Pure(states::superposition(need_n()?, c(a, 0.0), c(b, 0.0))?))
        }
        _ => {
            if !Path::new(spec).is_file() {
                bail!(config(format!("unknown state {spec:?}: not a named state or an existing file")));
            }
            let state = load_state_file(Path::new(spec))?;
            if let Some(n) = n {
                if state.n() != n {
                    bail!(config(format!("{spec} holds {} qubits but --n is {n}", state.n())));
                }
            }
            Ok(state)
        }
    }
}

fn load_state_file(path: &Path) -> Result<State> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if let Ok(amps) = serde_json::from_str::<AmplitudeFile>(&text) {
        let len = amps.amplitudes_re.len();
        if !len.is_power_of_two() || len < 2 {
            bail!(config(format!("{}: amplitude count {len} is not a power of two", path.display())));
        }
        let im = amps.amplitudes_im.unwrap_or_else(|| vec![0.0; len]);
        if im.len() != len {
            bail!(config(format!("{}: amplitudes_im has {} entries, expected {len}", path.display(), im.len())));
        }
        return Ok(State::Pure(amps.amplitudes_re.iter().zip(&im).map(|(&r, &i)| c(r, i)).collect()));
    }
    let file: OperatorFile = serde_json::from_str(&text)
        .map_err(|e| config(format!("{}: neither an amplitude nor an operator file ({e})", path.display())))?;
    Ok(State::Density(PauliSumOperator::from_json(&file)?))
}

pub fn parse_observable(spec: &str, n: usize) -> Result<PauliSumOperator> {
    let (name, arg) = spec.split_once(':').unwrap_or((spec, ""));
    let op = match name {
        "z" => states::z(n, index(arg, "z qubit")?)?,
        "x" => states::x(n, index(arg, "x qubit")?)?,
        "zstring" => states::z_string(n, index(arg, "zstring length")?)?,
        "parity" => states::parity(n)?,
        _ if looks_like_pauli(spec) => {
            let term: PauliTerm = spec.parse()?;
            PauliSumOperator::from_term(&term, c(1.0, 0.0))
        }
        _ if Path::new(spec).is_file() => {
            PauliSumOperator::load(Path::new(spec)).with_context(|| format!("loading observable {spec}"))?
        }
        _ => bail!(config(format!("unknown observable {spec:?}: not a named observable, Pauli string or existing file"))),
    };
    if op.n() != n {
        bail!(config(format!("observable {spec:?} acts on {} qubits, expected {n}", op.n())));
    }
    Ok(op)
}

fn looks_like_pauli(s: &str) -> bool {
    let body = s.trim_start_matches(['+', '-', 'i']);
    !body.is_empty() && body.chars().all(|ch| matches!(ch, 'I' | 'X' | 'Y' | 'Z'))
}
