//! Monte Carlo estimation of signature correlators
//! `E[prod_i <pi_i, sig>^{m_i}]`.
//!
//! Every estimate in one batch is computed from the same paths: path `k` is
//! regenerated from `(seed, k)`, lifted, and paired against the union of the
//! requested words. Reductions go through [`crate::numeric`], so the output
//! is bit-identical for any worker count.

use std::time::Instant;

use serde::Serialize;

use crate::algebra::WeightedWord;
use crate::error::{Error, Result};
use crate::numeric::mean_and_std_error;
use crate::parallel::{map_indexed, Execution};
use crate::signature::{lift, LiftKind};
use crate::stochastic::{ProcessSpec, Seed, SimulationGrid};

#[derive(Clone, Debug, PartialEq)]
pub struct CorrelatorRequest {
    pub words: Vec<WeightedWord>,
    pub exponents: Vec<u32>,
    pub lift: LiftKind,
    pub depth: usize,
}

impl CorrelatorRequest {
    pub fn new(words: Vec<WeightedWord>, exponents: Vec<u32>, lift: LiftKind, depth: usize) -> Result<Self> {
        let r = CorrelatorRequest { words, exponents, lift, depth };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if self.words.is_empty() {
            return Err(Error::InvalidArgument("a correlator needs at least one word".into()));
        }
        if self.words.len() != self.exponents.len() {
            return Err(Error::InvalidArgument(format!(
                "{} words but {} exponents",
                self.words.len(),
                self.exponents.len()
            )));
        }
        let d = self.alphabet();
        for w in &self.words {
            if w.alphabet() != d {
                return Err(Error::AlphabetMismatch { left: d, right: w.alphabet() });
            }
            if w.max_len() > self.depth {
                return Err(Error::WordTooLong { word: w.to_string(), len: w.max_len(), depth: self.depth });
            }
        }
        Ok(())
    }

    pub fn alphabet(&self) -> usize {
        self.words.first().map_or(0, WeightedWord::alphabet)
    }

    /// Depth needed to evaluate the monomial from pairings directly.
    pub fn direct_depth(&self) -> usize {
        self.words.iter().map(WeightedWord::max_len).max().unwrap_or(0)
    }

    /// Depth needed by the single linearized word.
    pub fn linearized_depth(&self) -> usize {
        self.words.iter().zip(&self.exponents).map(|(w, &m)| m as usize * w.max_len()).sum()
    }

    pub fn monomial(&self, pairings: &[f64]) -> f64 {
        pairings.iter().zip(&self.exponents).map(|(x, &m)| x.powi(m as i32)).product()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CorrelatorEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_paths: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McSettings {
    pub grid: SimulationGrid,
    pub n_paths: usize,
    pub seed: Seed,
    /// Prepend time as letter 1 before lifting.
    pub time_enhance: bool,
    pub execution: Execution,
}

impl McSettings {
    pub fn new(grid: SimulationGrid, n_paths: usize, seed: Seed) -> Self {
        McSettings { grid, n_paths, seed, time_enhance: true, execution: Execution::default() }
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if self.n_paths < 2 {
            return Err(Error::InvalidArgument(format!("need at least 2 paths, got {}", self.n_paths)));
        }
        Ok(())
    }

    pub fn alphabet(&self, process: &ProcessSpec) -> usize {
        process.dim() + usize::from(self.time_enhance)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    #[default]
    DirectProducts,
    ShuffleLinearized,
}

/// Per-path pairings `<w_j, sig(path_k)>`, row-major by path.
#[derive(Clone, Debug, PartialEq)]
pub struct PairingSample {
    n_words: usize,
    values: Vec<f64>,
    execution: Execution,
}

impl PairingSample {
    pub fn n_paths(&self) -> usize {
        self.values.len().checked_div(self.n_words).unwrap_or(0)
    }

    pub fn n_words(&self) -> usize {
        self.n_words
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.values[k * self.n_words..(k + 1) * self.n_words]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.n_words.max(1))
    }

    /// Per-path values of `f(row)`, in path order.
    pub fn map<F: Fn(&[f64]) -> f64 + Sync + Send>(&self, f: F) -> Vec<f64> {
        map_indexed(self.n_paths(), self.execution, |k| f(self.row(k)))
    }

    /// Sample mean and standard error of `f(row)`.
    pub fn estimate<F: Fn(&[f64]) -> f64 + Sync + Send>(&self, f: F) -> CorrelatorEstimate {
        let v = self.map(f);
        let (value, std_error) = mean_and_std_error(&v, self.execution);
        CorrelatorEstimate { value, std_error, n_paths: v.len() }
    }
}

/// Simulates `settings.n_paths` paths and pairs each lift with `words`.
pub fn sample_pairings(
    process: &ProcessSpec,
    settings: &McSettings,
    words: &[WeightedWord],
    lift_kind: LiftKind,
    depth: usize,
) -> Result<PairingSample> {
    settings.validate()?;
    let d = settings.alphabet(process);
    for w in words {
        if w.alphabet() != d {
            return Err(Error::AlphabetMismatch { left: d, right: w.alphabet() });
        }
        if w.max_len() > depth {
            return Err(Error::WordTooLong { word: w.to_string(), len: w.max_len(), depth });
        }
    }
    // Surface size errors once, before any simulation.
    crate::signature::TruncatedSignature::identity(d, depth, 0.0)?;
    let sim = process.simulator(settings.grid)?;
    let rows = map_indexed(settings.n_paths, settings.execution, |k| -> Result<Vec<f64>> {
        let mut path = sim.sample(settings.seed, k as u64);
        if settings.time_enhance {
            path = path.time_enhance();
        }
        let sig = lift(&path, depth, lift_kind)?;
        words.iter().map(|w| sig.pair(w)).collect()
    });
    let mut values = Vec::with_capacity(settings.n_paths * words.len());
    for r in rows {
        values.extend(r?);
    }
    Ok(PairingSample { n_words: words.len(), values, execution: settings.execution })
}

/// The linear functional whose pairing equals the requested monomial on
/// geometric lifts.
pub fn shuffle_linearize(request: &CorrelatorRequest) -> Result<WeightedWord> {
    request.validate()?;
    if !request.lift.is_geometric() {
        return Err(Error::GeometricLiftRequired("shuffle linearization"));
    }
    linearized_word(request)
}

fn linearized_word(request: &CorrelatorRequest) -> Result<WeightedWord> {
    let mut phi = WeightedWord::unit(request.alphabet());
    for (w, &m) in request.words.iter().zip(&request.exponents) {
        phi = phi.shuffle(&w.shuffle_power(m))?;
    }
    Ok(phi)
}

fn dedup_push(words: &mut Vec<WeightedWord>, w: &WeightedWord) -> usize {
    match words.iter().position(|u| u == w) {
        Some(i) => i,
        None => {
            words.push(w.clone());
            words.len() - 1
        }
    }
}

pub fn estimate_correlator(
    process: &ProcessSpec,
    settings: &McSettings,
    request: &CorrelatorRequest,
) -> Result<CorrelatorEstimate> {
    Ok(estimate_correlators(process, settings, std::slice::from_ref(request), Route::DirectProducts)?[0])
}

/// Estimates a batch of correlators on shared paths.
pub fn estimate_correlators(
    process: &ProcessSpec,
    settings: &McSettings,
    requests: &[CorrelatorRequest],
    route: Route,
) -> Result<Vec<CorrelatorEstimate>> {
    let d = settings.alphabet(process);
    for r in requests {
        r.validate()?;
        if r.alphabet() != d {
            return Err(Error::AlphabetMismatch { left: d, right: r.alphabet() });
        }
    }
    settings.validate()?;
    let mut out = vec![None; requests.len()];
    match route {
        Route::DirectProducts => {
            for kind in [LiftKind::Stratonovich, LiftKind::Ito] {
                let group: Vec<usize> = (0..requests.len()).filter(|&i| requests[i].lift == kind).collect();
                if group.is_empty() {
                    continue;
                }
                let mut words = Vec::new();
                let columns: Vec<Vec<usize>> = group
                    .iter()
                    .map(|&i| requests[i].words.iter().map(|w| dedup_push(&mut words, w)).collect())
                    .collect();
                let depth = group.iter().map(|&i| requests[i].depth).max().unwrap_or(0);
                let sample = sample_pairings(process, settings, &words, kind, depth)?;
                for (&i, cols) in group.iter().zip(&columns) {
                    let r = &requests[i];
                    out[i] = Some(sample.estimate(|row| {
                        cols.iter().zip(&r.exponents).map(|(&c, &m)| row[c].powi(m as i32)).product()
                    }));
                }
            }
        }
        Route::ShuffleLinearized => {
            let phis = requests.iter().map(shuffle_linearize).collect::<Result<Vec<_>>>()?;
            let mut words = Vec::new();
            let columns: Vec<usize> = phis.iter().map(|p| dedup_push(&mut words, p)).collect();
            let depth = phis.iter().map(WeightedWord::max_len).max().unwrap_or(0);
            let sample = sample_pairings(process, settings, &words, LiftKind::Stratonovich, depth)?;
            for (i, &c) in columns.iter().enumerate() {
                out[i] = Some(sample.estimate(|row| row[c]));
            }
        }
    }
    Ok(out.into_iter().map(|e| e.expect("every request is assigned a group")).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CostReport {
    pub direct_depth: usize,
    pub linearized_depth: usize,
    pub direct_seconds: f64,
    pub linearized_seconds: f64,
}

/// Depths of both routes and the wall time each takes to lift and pair
/// `path` (best of a few repetitions).
pub fn cost_report(request: &CorrelatorRequest, path: &crate::signature::SampledPath) -> Result<CostReport> {
    request.validate()?;
    let phi = linearized_word(request)?;
    let (dd, ld) = (request.direct_depth(), request.linearized_depth());
    let time = |depth: usize, words: &[WeightedWord]| -> Result<f64> {
        let mut best = f64::INFINITY;
        for _ in 0..3 {
            let start = Instant::now();
            let sig = lift(path, depth, request.lift)?;
            let p: Vec<f64> = words.iter().map(|w| sig.pair(w)).collect::<Result<_>>()?;
            std::hint::black_box(request.monomial(&p));
            best = best.min(start.elapsed().as_secs_f64());
        }
        Ok(best)
    };
    Ok(CostReport {
        direct_depth: dd,
        linearized_depth: ld,
        direct_seconds: time(dd, &request.words)?,
        linearized_seconds: time(ld, std::slice::from_ref(&phi))?,
    })
}
