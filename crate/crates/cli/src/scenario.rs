//! JSON scenario files.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use sigprice::algebra::WeightedWord;
use sigprice::approx::BoundParams;
use sigprice::correlator::{CorrelatorRequest, Route};
use sigprice::pricing::PayoffSpec;
use sigprice::signature::LiftKind;
use sigprice::stochastic::{ProcessSpec, SimulationGrid};

use crate::CliError;

pub const SCHEMA: &str = "sigprice.scenario.v1";

fn yes() -> bool {
    true
}

fn default_paths() -> usize {
    10_000
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: String,
    /// Free text, ignored.
    #[serde(default)]
    pub description: Option<String>,
    pub process: ProcessSpec,
    pub grid: SimulationGrid,
    #[serde(default)]
    pub lift: LiftKind,
    #[serde(default = "yes")]
    pub time_enhance: bool,
    #[serde(default = "default_paths")]
    pub n_paths: usize,
    #[serde(default)]
    pub seed: u64,
    /// Number of paths `simulate` writes.
    #[serde(default)]
    pub sample_paths: Option<usize>,
    #[serde(default)]
    pub correlators: Option<CorrelatorBatch>,
    #[serde(default)]
    pub payoff: Option<PayoffSpec>,
    #[serde(default)]
    pub convergence_orders: Vec<u32>,
    #[serde(default)]
    pub bound: Option<BoundParams>,
    #[serde(default)]
    pub outputs: Outputs,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelatorBatch {
    #[serde(default)]
    pub route: Route,
    pub requests: Vec<RequestSpec>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RequestSpec {
    #[serde(default)]
    pub id: Option<String>,
    pub words: Vec<String>,
    pub exponents: Vec<u32>,
    #[serde(default)]
    pub depth: Option<usize>,
    #[serde(default)]
    pub lift: Option<LiftKind>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Outputs {
    pub dir: PathBuf,
    pub path_prefix: String,
    pub correlators: String,
    pub price: String,
    pub convergence: String,
}

impl Default for Outputs {
    fn default() -> Self {
        Outputs {
            dir: PathBuf::from("."),
            path_prefix: "path".into(),
            correlators: "correlators.csv".into(),
            price: "price.csv".into(),
            convergence: "convergence.csv".into(),
        }
    }
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Input(m) => CliError::Input(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| CliError::Input(e.to_string()))?;
        if s.schema != SCHEMA {
            return Err(CliError::Input(format!("unsupported schema `{}`, expected `{SCHEMA}`", s.schema)));
        }
        s.grid.validate()?;
        s.process.simulator(s.grid)?;
        if let Some(p) = &s.payoff {
            p.validate()?;
        }
        s.correlator_requests()?;
        Ok(s)
    }

    pub fn alphabet(&self) -> usize {
        self.process.dim() + usize::from(self.time_enhance)
    }

    /// Parsed requests with their ids. Depth defaults to the longest word.
    pub fn correlator_requests(&self) -> Result<Vec<(String, CorrelatorRequest)>, CliError> {
        let Some(batch) = &self.correlators else {
            return Ok(Vec::new());
        };
        let d = self.alphabet();
        batch
            .requests
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let id = r.id.clone().unwrap_or_else(|| format!("r{i}"));
                let words = r
                    .words
                    .iter()
                    .map(|w| WeightedWord::parse(w, d))
                    .collect::<sigprice::Result<Vec<_>>>()
                    .map_err(|e| CliError::Input(format!("request {id}: {e}")))?;
                let depth = r.depth.unwrap_or_else(|| words.iter().map(WeightedWord::max_len).max().unwrap_or(0));
                let req = CorrelatorRequest::new(words, r.exponents.clone(), r.lift.unwrap_or(self.lift), depth)
                    .map_err(|e| CliError::Input(format!("request {id}: {e}")))?;
                Ok((id, req))
            })
            .collect()
    }
}
