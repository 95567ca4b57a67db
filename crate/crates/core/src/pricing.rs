//! Payoffs that are functions of signature pairings, priced either by
//! expanding the payoff into a polynomial and summing `α_m ρ_m` over
//! estimated correlators, or directly by Monte Carlo on the same paths.
//!
//! All payoffs read a time-enhanced path: letter 1 is time, letter `i + 1`
//! is component `i` of the process.

use serde::{Deserialize, Serialize};

use crate::algebra::{WeightedWord, Word};
use crate::approx::{
    coefficient_condition, remainder_bound, smoothmax, smoothmax_series, BoundParams, MultiIndexPolynomial,
    SmoothmaxSeries,
};
use crate::correlator::{estimate_correlators, sample_pairings, CorrelatorRequest, McSettings, PairingSample, Route};
use crate::error::{Error, Result};
use crate::parallel::Execution;
use crate::numeric::{fixed_tree_sum, NeumaierSum};
use crate::signature::LiftKind;
use crate::stochastic::ProcessSpec;

fn default_sharpness() -> f64 {
    1.0
}

fn default_order() -> u32 {
    8
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case", deny_unknown_fields)]
pub enum PayoffSpec {
    /// `max(int_0^T (X_s - X_0) ds - K, 0)` on component 1.
    AsianCall {
        strike: f64,
        #[serde(default = "default_sharpness")]
        sharpness: f64,
        #[serde(default = "default_order")]
        order: u32,
    },
    /// `max(X1_T - c X2_T, 0)`.
    Spread {
        conversion: f64,
        #[serde(default = "default_sharpness")]
        sharpness: f64,
        #[serde(default = "default_order")]
        order: u32,
    },
    /// `max(int V ds - K, 0) max(L - int P ds, 0)` with volume `V` on
    /// component 1 and price `P` on component 2.
    QuantoPutCall {
        volume_strike: f64,
        price_strike: f64,
        #[serde(default = "default_sharpness")]
        sharpness: f64,
        #[serde(default = "default_order")]
        order: u32,
    },
    /// `(1/T) int C S ds / ((1/T) int C ds (1/T) int S ds)` with capacity `C`
    /// on component 1 and normalized price `S` on component 2.
    QualityFactor { m_trunc: u32, n_trunc: u32 },
}

impl PayoffSpec {
    pub fn validate(&self) -> Result<()> {
        let check_series = |sharpness: f64| {
            if sharpness > 0.0 && sharpness.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!("sharpness must be positive, got {sharpness}")))
            }
        };
        let finite = |x: f64, name: &str| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!("{name} must be finite")))
            }
        };
        match *self {
            PayoffSpec::AsianCall { strike, sharpness, .. } => {
                finite(strike, "strike")?;
                check_series(sharpness)
            }
            PayoffSpec::Spread { conversion, sharpness, .. } => {
                finite(conversion, "conversion")?;
                check_series(sharpness)
            }
            PayoffSpec::QuantoPutCall { volume_strike, price_strike, sharpness, .. } => {
                finite(volume_strike, "volume strike")?;
                finite(price_strike, "price strike")?;
                check_series(sharpness)
            }
            PayoffSpec::QualityFactor { .. } => Ok(()),
        }
    }

    /// Process components the payoff reads.
    pub fn components(&self) -> usize {
        match self {
            PayoffSpec::AsianCall { .. } => 1,
            _ => 2,
        }
    }

    /// The same payoff with its truncation order(s) replaced.
    pub fn with_order(&self, order: u32) -> PayoffSpec {
        let mut s = self.clone();
        match &mut s {
            PayoffSpec::AsianCall { order: o, .. }
            | PayoffSpec::Spread { order: o, .. }
            | PayoffSpec::QuantoPutCall { order: o, .. } => *o = order,
            PayoffSpec::QualityFactor { m_trunc, n_trunc } => {
                *m_trunc = order;
                *n_trunc = order;
            }
        }
        s
    }
}

fn word(text: &str, alphabet: usize) -> Word {
    Word::parse(text, alphabet).expect("catalog words fit the checked alphabet")
}

fn need_initial(initial: &[f64], k: usize, what: &str) -> Result<()> {
    if initial.len() < k {
        return Err(Error::MissingInitialValues(format!("{what} needs {k} initial values, got {}", initial.len())));
    }
    Ok(())
}

/// Words `π_i` whose pairings the payoff is a function of.
pub fn payoff_words(spec: &PayoffSpec, alphabet: usize, initial: &[f64]) -> Result<Vec<WeightedWord>> {
    spec.validate()?;
    if alphabet < spec.components() + 1 {
        return Err(Error::InvalidArgument(format!(
            "payoff reads {} components, the time-enhanced alphabet has only {alphabet} letters",
            spec.components()
        )));
    }
    let w = |t: &str| word(t, alphabet);
    let single = |t: &str, c: f64| WeightedWord::from_word(alphabet, w(t), c);
    Ok(match *spec {
        PayoffSpec::AsianCall { .. } => vec![single("21", 1.0)],
        PayoffSpec::Spread { conversion: c, .. } => {
            need_initial(initial, 2, "spread")?;
            let mut pi = single("2", 1.0);
            pi.add_term(w("3"), -c);
            pi.add_term(Word::empty(), initial[0] - c * initial[1]);
            vec![pi]
        }
        PayoffSpec::QuantoPutCall { .. } => {
            need_initial(initial, 2, "quanto")?;
            let mut volume = single("21", 1.0);
            volume.add_term(w("1"), initial[0]);
            let mut price = single("31", -1.0);
            price.add_term(w("1"), -initial[1]);
            vec![volume, price]
        }
        PayoffSpec::QualityFactor { .. } => {
            need_initial(initial, 2, "quality factor")?;
            let (c0, s0) = (initial[0], initial[1]);
            let mut pi1 = single("2", 1.0).shuffle(&single("3", 1.0))?.concat(&single("1", 1.0))?;
            pi1.add_term(w("31"), c0);
            pi1.add_term(w("21"), s0);
            pi1.add_term(w("1"), c0 * s0);
            let mut pi2 = single("21", 1.0);
            pi2.add_term(w("1"), c0 - 1.0);
            let mut pi3 = single("31", 1.0);
            pi3.add_term(w("1"), s0 - 1.0);
            vec![pi1, pi2, pi3]
        }
    })
}

#[derive(Clone, Debug)]
enum Shape {
    /// `max(x, 0)` of one variable.
    Call(SmoothmaxSeries),
    /// `max(x, 0) max(y, 0)`.
    CallProduct(SmoothmaxSeries),
    /// `(x/T) / ((1 + y/T)(1 + z/T))`.
    Ratio { horizon: f64, m: u32, n: u32 },
}

/// Pairing variables, the exact payoff in them, and its polynomial surrogate.
#[derive(Clone, Debug)]
pub struct Expansion {
    /// Words whose pairings are the payoff variables (strikes folded in as
    /// empty-word terms).
    pub words: Vec<WeightedWord>,
    pub poly: MultiIndexPolynomial,
    shape: Shape,
}

impl Expansion {
    pub fn new(spec: &PayoffSpec, alphabet: usize, initial: &[f64], horizon: f64) -> Result<Self> {
        let mut words = payoff_words(spec, alphabet, initial)?;
        let (poly, shape) = match *spec {
            PayoffSpec::AsianCall { strike, sharpness, order } => {
                words[0].add_term(Word::empty(), -strike);
                let s = smoothmax_series(sharpness, order);
                (s.poly.clone(), Shape::Call(s))
            }
            PayoffSpec::Spread { sharpness, order, .. } => {
                let s = smoothmax_series(sharpness, order);
                (s.poly.clone(), Shape::Call(s))
            }
            PayoffSpec::QuantoPutCall { volume_strike, price_strike, sharpness, order } => {
                words[0].add_term(Word::empty(), -volume_strike);
                words[1].add_term(Word::empty(), price_strike);
                let s = smoothmax_series(sharpness, order);
                (s.poly.tensor_product(&s.poly), Shape::CallProduct(s))
            }
            PayoffSpec::QualityFactor { m_trunc, n_trunc } => {
                let mut p = MultiIndexPolynomial::new(3);
                for m in 0..=m_trunc {
                    for n in 0..=n_trunc {
                        p.add_term(vec![1, m, n], (-1.0 / horizon).powi((m + n) as i32) / horizon)?;
                    }
                }
                (p, Shape::Ratio { horizon, m: m_trunc, n: n_trunc })
            }
        };
        Ok(Expansion { words, poly, shape })
    }

    pub fn depth(&self) -> usize {
        self.words.iter().map(WeightedWord::max_len).max().unwrap_or(0)
    }

    /// Payoff evaluated exactly on the pairing variables.
    pub fn exact(&self, x: &[f64]) -> f64 {
        match &self.shape {
            Shape::Call(_) => x[0].max(0.0),
            Shape::CallProduct(_) => x[0].max(0.0) * x[1].max(0.0),
            Shape::Ratio { horizon: t, .. } => (x[0] / t) / ((1.0 + x[1] / t) * (1.0 + x[2] / t)),
        }
    }

    pub fn surrogate(&self, x: &[f64]) -> f64 {
        self.poly.eval(x).expect("variables match words")
    }

    /// Truncation tail over the sample. Smoothed-max payoffs: mean over
    /// paths of the smoothing bound plus the series gap at the sampled point.
    /// Quality factor: `r^{K+1} / (1 - r)` with `r` the largest sampled
    /// `|<π_2>|/T`, `|<π_3>|/T` and `K = min(M, N)`; `None` once `r >= 1`.
    fn tail_bound(&self, sample: &PairingSample, exec: Execution) -> Option<f64> {
        let mean = |v: Vec<f64>| fixed_tree_sum(&v, exec, |t| t) / v.len() as f64;
        match &self.shape {
            Shape::Call(s) => {
                let eps = s.smoothing_bound();
                Some(mean(sample.map(|x| eps + (s.target(x[0]) - s.eval(x[0])).abs())))
            }
            Shape::CallProduct(s) => {
                let eps = s.smoothing_bound();
                Some(mean(sample.map(|x| {
                    let (sa, sb) = (smoothmax(s.sharpness, x[0]), smoothmax(s.sharpness, x[1]));
                    eps * (x[1].max(0.0) + sa.abs()) + (sa * sb - self.surrogate(x)).abs()
                })))
            }
            Shape::Ratio { m, n, .. } => {
                let r = self.max_ratio(sample);
                (r < 1.0).then(|| r.powi((*m).min(*n) as i32 + 1) / (1.0 - r))
            }
        }
    }

    fn max_ratio(&self, sample: &PairingSample) -> f64 {
        match self.shape {
            Shape::Ratio { horizon: t, .. } => {
                sample.rows().map(|x| (x[1] / t).abs().max((x[2] / t).abs())).fold(0.0, f64::max)
            }
            _ => f64::NAN,
        }
    }

    fn range_warnings(&self, sample: &PairingSample) -> Vec<String> {
        let mut out = Vec::new();
        match &self.shape {
            Shape::Call(s) | Shape::CallProduct(s) => {
                for j in 0..self.words.len() {
                    let max = sample.rows().map(|r| r[j].abs()).fold(0.0, f64::max);
                    if max >= s.radius {
                        out.push(format!(
                            "pairing {} reaches |x| = {max:.4}, outside the series radius {:.4}",
                            j + 1,
                            s.radius
                        ));
                    }
                }
            }
            Shape::Ratio { .. } => {
                let r = self.max_ratio(sample);
                if r >= 1.0 {
                    out.push(format!("geometric ratio reaches {r:.4}; the quality factor series diverges"));
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    CorrelatorExpansion,
    DirectMc,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::CorrelatorExpansion => "correlator_expansion",
            Method::DirectMc => "direct_mc",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PriceReport {
    pub price: f64,
    pub std_error: f64,
    pub method: Method,
    /// Retained multi-indices (0 for direct MC).
    pub terms: usize,
    /// Series order(s) used.
    pub truncation: Vec<u32>,
    pub n_paths: usize,
    /// Estimated bound on the series truncation error.
    pub tail_bound: Option<f64>,
    pub warnings: Vec<String>,
}

fn truncation_of(spec: &PayoffSpec) -> Vec<u32> {
    match *spec {
        PayoffSpec::AsianCall { order, .. }
        | PayoffSpec::Spread { order, .. }
        | PayoffSpec::QuantoPutCall { order, .. } => vec![order],
        PayoffSpec::QualityFactor { m_trunc, n_trunc } => vec![m_trunc, n_trunc],
    }
}

fn prepare(
    spec: &PayoffSpec,
    process: &ProcessSpec,
    settings: &McSettings,
    lift: LiftKind,
) -> Result<(Expansion, PairingSample)> {
    if !settings.time_enhance {
        return Err(Error::InvalidArgument("payoffs are defined on time-enhanced paths".into()));
    }
    if matches!(spec, PayoffSpec::QualityFactor { .. }) && !lift.is_geometric() {
        return Err(Error::GeometricLiftRequired("the quality factor expansion"));
    }
    let exp = Expansion::new(spec, settings.alphabet(process), &process.initial_values(), settings.grid.horizon)?;
    let sample = sample_pairings(process, settings, &exp.words, lift, exp.depth())?;
    Ok((exp, sample))
}

/// `Σ α_m ρ_m` with correlators estimated on shared paths
/// (direct products of pairings).
pub fn price_via_correlators(
    spec: &PayoffSpec,
    process: &ProcessSpec,
    settings: &McSettings,
    lift: LiftKind,
) -> Result<PriceReport> {
    price_via_correlators_with(spec, process, settings, lift, Route::DirectProducts)
}

pub fn price_via_correlators_with(
    spec: &PayoffSpec,
    process: &ProcessSpec,
    settings: &McSettings,
    lift: LiftKind,
    route: Route,
) -> Result<PriceReport> {
    let (exp, sample) = prepare(spec, process, settings, lift)?;
    let terms: Vec<(&Vec<u32>, f64)> = exp.poly.terms().collect();
    let estimates = match route {
        Route::DirectProducts => terms
            .iter()
            .map(|(m, _)| {
                sample.estimate(|x| x.iter().zip(m.iter()).map(|(xi, &k)| xi.powi(k as i32)).product())
            })
            .collect(),
        Route::ShuffleLinearized => {
            let requests = terms
                .iter()
                .map(|(m, _)| CorrelatorRequest::new(exp.words.clone(), m.to_vec(), lift, exp.depth()))
                .collect::<Result<Vec<_>>>()?;
            estimate_correlators(process, settings, &requests, route)?
        }
    };
    let mut price = NeumaierSum::default();
    let mut se = NeumaierSum::default();
    for ((_, alpha), e) in terms.iter().zip(&estimates) {
        price.add(alpha * e.value);
        se.add(alpha.abs() * e.std_error);
    }

    let tail_bound = exp.tail_bound(&sample, settings.execution);
    Ok(PriceReport {
        price: price.value(),
        std_error: se.value(),
        method: Method::CorrelatorExpansion,
        terms: terms.len(),
        truncation: truncation_of(spec),
        n_paths: sample.n_paths(),
        tail_bound,
        warnings: exp.range_warnings(&sample),
    })
}

/// Sample mean of the exact payoff on the pairing variables.
pub fn price_direct_mc(
    spec: &PayoffSpec,
    process: &ProcessSpec,
    settings: &McSettings,
    lift: LiftKind,
) -> Result<PriceReport> {
    let (exp, sample) = prepare(spec, process, settings, lift)?;
    let e = sample.estimate(|x| exp.exact(x));
    Ok(PriceReport {
        price: e.value,
        std_error: e.std_error,
        method: Method::DirectMc,
        terms: 0,
        truncation: Vec::new(),
        n_paths: e.n_paths,
        tail_bound: None,
        warnings: Vec::new(),
    })
}

/// Truncated double-series expectation of the quality factor.
pub fn quality_factor_expectation(
    process: &ProcessSpec,
    settings: &McSettings,
    lift: LiftKind,
    m_trunc: u32,
    n_trunc: u32,
) -> Result<PriceReport> {
    price_via_correlators(&PayoffSpec::QualityFactor { m_trunc, n_trunc }, process, settings, lift)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub order: u32,
    pub expansion: f64,
    pub expansion_se: f64,
    pub direct: f64,
    pub direct_se: f64,
    pub abs_gap: f64,
    pub tail_bound: Option<f64>,
    /// Remainder bound, present when the coefficient condition holds.
    pub theory_bound: Option<f64>,
}

/// Expansion price per truncation order against one direct-MC reference.
pub fn convergence_report(
    spec: &PayoffSpec,
    process: &ProcessSpec,
    settings: &McSettings,
    lift: LiftKind,
    orders: &[u32],
    bound: Option<&BoundParams>,
) -> Result<Vec<ConvergenceRow>> {
    let direct = price_direct_mc(spec, process, settings, lift)?;
    let alphabet = settings.alphabet(process);
    orders
        .iter()
        .map(|&order| {
            let s = spec.with_order(order);
            let r = price_via_correlators(&s, process, settings, lift)?;
            let theory_bound = match bound {
                Some(params) => {
                    let exp = Expansion::new(&s, alphabet, &process.initial_values(), settings.grid.horizon)?;
                    let n = exp.poly.n_vars();
                    if exp.poly.len() > n && coefficient_condition(&exp.poly, params)? {
                        Some(remainder_bound(params.c, n, exp.poly.len())?)
                    } else {
                        None
                    }
                }
                None => None,
            };
            Ok(ConvergenceRow {
                order,
                expansion: r.price,
                expansion_se: r.std_error,
                direct: direct.price,
                direct_se: direct.std_error,
                abs_gap: (r.price - direct.price).abs(),
                tail_bound: r.tail_bound,
                theory_bound,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stochastic::{BrownianSpec, LogisticOuSpec, OUSpec, Seed, SimulationGrid};

    fn settings(n: usize, steps: usize) -> McSettings {
        McSettings::new(SimulationGrid::new(1.0, steps).unwrap(), n, Seed(77))
    }

    fn bm1() -> ProcessSpec {
        ProcessSpec::Brownian(BrownianSpec::independent(1))
    }

    fn still_ou(initial: [f64; 2]) -> ProcessSpec {
        ProcessSpec::OrnsteinUhlenbeck(OUSpec {
            mean_reversion: [0.5, 1.5],
            volatility: [0.0, 0.0],
            correlation: 0.0,
            initial,
        })
    }

    fn asian(strike: f64) -> PayoffSpec {
        PayoffSpec::AsianCall { strike, sharpness: 1.0, order: 8 }
    }

    #[test]
    fn catalog_words() {
        let qf = PayoffSpec::QualityFactor { m_trunc: 1, n_trunc: 1 };
        let w = payoff_words(&qf, 3, &[1.0, 1.0]).unwrap();
        assert_eq!(w[1], WeightedWord::parse("21", 3).unwrap());
        assert_eq!(w[2], WeightedWord::parse("31", 3).unwrap());
        let w = payoff_words(&qf, 3, &[0.3, 0.6]).unwrap();
        assert_eq!(w[0], WeightedWord::parse("231 + 321 + 0.3*31 + 0.6*21 + 0.18*1", 3).unwrap());
        let spread = PayoffSpec::Spread { conversion: 1.0, sharpness: 1.0, order: 4 };
        assert_eq!(payoff_words(&spread, 3, &[2.0, 2.0]).unwrap()[0], WeightedWord::parse("2 - 3", 3).unwrap());
        assert_eq!(payoff_words(&asian(0.3), 2, &[]).unwrap()[0], WeightedWord::parse("21", 2).unwrap());
        assert!(matches!(payoff_words(&spread, 3, &[1.0]), Err(Error::MissingInitialValues(_))));
        assert!(payoff_words(&spread, 2, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn printed_quality_factor_word_misses_constant_processes() {
        // C ≡ S ≡ 1/2: int C S ds = T / 4, which the corrected word recovers.
        let t = 2.0;
        let path = crate::signature::SampledPath::new(vec![0.0, t], vec![0.5, 0.5, 0.5, 0.5], 2).unwrap().time_enhance();
        let sig = crate::signature::stratonovich_lift(&path, 3).unwrap();
        let ours = &payoff_words(&PayoffSpec::QualityFactor { m_trunc: 0, n_trunc: 0 }, 3, &[0.5, 0.5]).unwrap()[0];
        assert!((sig.pair(ours).unwrap() - t / 4.0).abs() < 1e-15);
        let printed = WeightedWord::parse("231 + 321 + 0.5*31 + 0.5*21", 3).unwrap();
        assert_eq!(sig.pair(&printed).unwrap(), 0.0);
    }

    #[test]
    fn flat_path_prices_to_zero() {
        let r = price_via_correlators(&asian(0.0), &still_ou([0.0, 0.0]), &settings(10, 20), LiftKind::Stratonovich)
            .unwrap();
        assert_eq!((r.price, r.std_error), (0.0, 0.0));
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn deterministic_payoffs() {
        let s = settings(8, 40);
        let spread = PayoffSpec::Spread { conversion: 0.8, sharpness: 1.0, order: 4 };
        let ou = still_ou([1.0, 0.5]);
        let r = price_direct_mc(&spread, &ou, &s, LiftKind::Stratonovich).unwrap();
        let expect = ((-0.5f64).exp() - 0.8 * 0.5 * (-1.5f64).exp()).max(0.0);
        assert!((r.price - expect).abs() < 1e-12);
        assert_eq!(r.std_error, 0.0);

        let quanto = PayoffSpec::QuantoPutCall { volume_strike: 0.2, price_strike: 0.9, sharpness: 1.0, order: 4 };
        let r = price_direct_mc(&quanto, &ou, &s, LiftKind::Stratonovich).unwrap();
        let int_v = (1.0 - (-0.5f64).exp()) / 0.5;
        let int_p = 0.5 * (1.0 - (-1.5f64).exp()) / 1.5;
        let expect = (int_v - 0.2).max(0.0) * (0.9 - int_p).max(0.0);
        // piecewise-linear quadrature of the exponential on 40 steps
        assert!((r.price - expect).abs() < 1e-4, "{} vs {expect}", r.price);
        assert_eq!(r.std_error, 0.0);
    }

    #[test]
    fn asian_direct_mc_matches_gaussian_closed_form() {
        let r = price_direct_mc(&asian(0.0), &bm1(), &settings(20_000, 100), LiftKind::Stratonovich).unwrap();
        let closed = (1.0 / 3.0f64).sqrt() / (2.0 * std::f64::consts::PI).sqrt();
        assert!((r.price - closed).abs() <= 4.0 * r.std_error, "{r:?}");
    }

    #[test]
    fn asian_methods_agree_within_tail() {
        let s = settings(10_000, 100);
        let a = price_via_correlators(&asian(0.0), &bm1(), &s, LiftKind::Stratonovich).unwrap();
        let b = price_direct_mc(&asian(0.0), &bm1(), &s, LiftKind::Stratonovich).unwrap();
        let tol = (3.0 * (a.std_error + b.std_error)).max(a.tail_bound.unwrap());
        assert!((a.price - b.price).abs() <= tol, "{a:?} {b:?}");
        // x, then x^{n+1} for odd n: Euler numbers vanish at even n
        assert_eq!(a.terms, 5);
    }

    #[test]
    fn direct_price_is_monotone_in_strike() {
        let s = settings(2_000, 50);
        let prices: Vec<f64> = [-0.5, -0.1, 0.0, 0.2, 0.7]
            .iter()
            .map(|&k| price_direct_mc(&asian(k), &bm1(), &s, LiftKind::Stratonovich).unwrap().price)
            .collect();
        assert!(prices.windows(2).all(|w| w[1] <= w[0]), "{prices:?}");
    }

    #[test]
    fn linearized_and_direct_routes_match_for_asian() {
        let spec = PayoffSpec::AsianCall { strike: 0.1, sharpness: 1.0, order: 3 };
        let s = settings(200, 20);
        let a = price_via_correlators_with(&spec, &bm1(), &s, LiftKind::Stratonovich, Route::DirectProducts).unwrap();
        let b = price_via_correlators_with(&spec, &bm1(), &s, LiftKind::Stratonovich, Route::ShuffleLinearized).unwrap();
        assert!((a.price - b.price).abs() <= 1e-10 * a.price.abs().max(1.0), "{} vs {}", a.price, b.price);
    }

    fn constant_logistic(shift: f64) -> ProcessSpec {
        ProcessSpec::LogisticOu(LogisticOuSpec {
            ou: OUSpec { mean_reversion: [1.0, 1.0], volatility: [0.0, 0.0], correlation: 0.0, initial: [0.0, 0.0] },
            shift: [shift, shift],
        })
    }

    #[test]
    fn quality_factor_of_constant_processes_is_one() {
        let s = settings(4, 50);
        let r = quality_factor_expectation(&constant_logistic(99f64.ln()), &s, LiftKind::Stratonovich, 4, 4).unwrap();
        assert!((r.price - 1.0).abs() < 1e-6, "{r:?}");
        assert_eq!(r.terms, 25);
        assert!(matches!(
            quality_factor_expectation(&constant_logistic(1.0), &s, LiftKind::Ito, 4, 4),
            Err(Error::GeometricLiftRequired(_))
        ));
    }

    #[test]
    fn quality_factor_leading_term_is_revenue_integral() {
        let s = settings(4, 50);
        let p = constant_logistic(0.0);
        let r = quality_factor_expectation(&p, &s, LiftKind::Stratonovich, 0, 0).unwrap();
        assert!((r.price - 0.25).abs() < 1e-14);
    }

    #[test]
    fn convergence_table_shares_reference() {
        let s = settings(2_000, 50);
        let rows = convergence_report(&asian(0.0), &bm1(), &s, LiftKind::Stratonovich, &[2, 4, 8], None).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|r| r.direct == rows[0].direct));
        let one = convergence_report(&asian(0.0), &bm1(), &s, LiftKind::Stratonovich, &[4], None).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].direct, rows[0].direct);
        assert!(rows[2].abs_gap <= rows[0].abs_gap + 3.0 * rows[0].expansion_se);
    }

    #[test]
    fn reports_are_reproducible() {
        let s = settings(500, 30);
        let a = price_via_correlators(&asian(0.1), &bm1(), &s, LiftKind::Stratonovich).unwrap();
        let b = price_via_correlators(&asian(0.1), &bm1(), &s, LiftKind::Stratonovich).unwrap();
        assert_eq!(a, b);
    }
}
