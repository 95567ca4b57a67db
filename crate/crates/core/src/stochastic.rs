//! Exact simulation of correlated Brownian motion and Ornstein–Uhlenbeck
//! pairs, plus closed-form moments used as Monte Carlo oracles.
//!
//! Randomness: path `k` under seed `s` draws from `ChaCha8Rng` seeded with
//! `seed_from_u64(s)` and switched to stream `k`. Streams are independent
//! 2^64-block sequences of the same key, so any path can be regenerated on
//! its own, in any order, on any worker.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::algebra::Word;
use crate::error::{Error, Result};
use crate::signature::SampledPath;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationGrid {
    pub horizon: f64,
    pub steps: usize,
}

impl SimulationGrid {
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        let g = SimulationGrid { horizon, steps };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::InvalidArgument(format!("horizon must be positive, got {}", self.horizon)));
        }
        if self.steps == 0 {
            return Err(Error::InvalidArgument("grid needs at least one step".into()));
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    pub fn times(&self) -> Vec<f64> {
        let m = self.steps as f64;
        (0..=self.steps).map(|k| self.horizon * (k as f64 / m)).collect()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Seed(pub u64);

impl Seed {
    /// Generator for path `index`.
    pub fn path_rng(self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.0);
        rng.set_stream(index);
        rng
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BrownianSpec {
    pub correlation: Vec<Vec<f64>>,
    pub initial: Vec<f64>,
}

impl BrownianSpec {
    pub fn new(correlation: Vec<Vec<f64>>, initial: Vec<f64>) -> Result<Self> {
        let spec = BrownianSpec { correlation, initial };
        spec.cholesky()?;
        Ok(spec)
    }

    /// `d` independent components started at the origin.
    pub fn independent(d: usize) -> Self {
        let correlation = (0..d).map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        BrownianSpec { correlation, initial: vec![0.0; d] }
    }

    pub fn dim(&self) -> usize {
        self.initial.len()
    }

    /// Lower-triangular factor, row-major `d x d`. Semi-definite matrices are
    /// accepted; a zero pivot zeroes its column.
    pub fn cholesky(&self) -> Result<Vec<f64>> {
        let d = self.dim();
        if d == 0 {
            return Err(Error::InvalidArgument("Brownian motion needs at least one component".into()));
        }
        if self.correlation.len() != d || self.correlation.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidArgument(format!("correlation must be {d}x{d}")));
        }
        let c = &self.correlation;
        for i in 0..d {
            if c[i][i] != 1.0 {
                return Err(Error::InvalidArgument(format!("correlation diagonal entry {i} is {}", c[i][i])));
            }
            for j in 0..d {
                if !c[i][j].is_finite() || c[i][j] != c[j][i] {
                    return Err(Error::InvalidArgument("correlation must be finite and symmetric".into()));
                }
            }
        }
        if let Some(x) = self.initial.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite initial value {x}")));
        }
        const TOL: f64 = 1e-12;
        let mut l = vec![0.0; d * d];
        for j in 0..d {
            let pivot = c[j][j] - (0..j).map(|k| l[j * d + k] * l[j * d + k]).sum::<f64>();
            if pivot < -TOL {
                return Err(Error::NotPositiveDefinite { pivot: j, value: pivot });
            }
            let ljj = pivot.max(0.0).sqrt();
            l[j * d + j] = ljj;
            for i in j + 1..d {
                let r = c[i][j] - (0..j).map(|k| l[i * d + k] * l[j * d + k]).sum::<f64>();
                if ljj > TOL {
                    l[i * d + j] = r / ljj;
                } else if r.abs() > TOL {
                    return Err(Error::NotPositiveDefinite { pivot: j, value: pivot });
                }
            }
        }
        Ok(l)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OUSpec {
    pub mean_reversion: [f64; 2],
    pub volatility: [f64; 2],
    pub correlation: f64,
    pub initial: [f64; 2],
}

impl OUSpec {
    pub fn validate(&self) -> Result<()> {
        for i in 0..2 {
            let (a, s) = (self.mean_reversion[i], self.volatility[i]);
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::InvalidArgument(format!("mean reversion a{} must be positive, got {a}", i + 1)));
            }
            if !(s >= 0.0 && s.is_finite()) {
                return Err(Error::InvalidArgument(format!("volatility sigma{} must be non-negative, got {s}", i + 1)));
            }
            if !self.initial[i].is_finite() {
                return Err(Error::InvalidArgument("non-finite OU initial value".into()));
            }
        }
        if !(self.correlation.abs() <= 1.0) {
            return Err(Error::InvalidArgument(format!("OU correlation must lie in [-1, 1], got {}", self.correlation)));
        }
        Ok(())
    }

    /// One-step transition: decay factors and the Cholesky factor
    /// `[l11, l21, l22]` of the step covariance.
    fn transition(&self, dt: f64) -> ([f64; 2], [f64; 3]) {
        let [a1, a2] = self.mean_reversion;
        let [s1, s2] = self.volatility;
        let decay = [(-a1 * dt).exp(), (-a2 * dt).exp()];
        let v1 = s1 * s1 * -(-2.0 * a1 * dt).exp_m1() / (2.0 * a1);
        let v2 = s2 * s2 * -(-2.0 * a2 * dt).exp_m1() / (2.0 * a2);
        let cov = self.correlation * s1 * s2 * -(-(a1 + a2) * dt).exp_m1() / (a1 + a2);
        let l11 = v1.sqrt();
        let (l21, l22) = if v1 > 0.0 {
            let ratio = cov / v1;
            (l11 * ratio, (v2 - cov * ratio).max(0.0).sqrt())
        } else {
            (0.0, v2.sqrt())
        };
        (decay, [l11, l21, l22])
    }
}

/// OU pair mapped through `u -> 1 / (1 + exp(-(shift + u)))` per component,
/// giving processes with values in (0, 1).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogisticOuSpec {
    pub ou: OUSpec,
    #[serde(default)]
    pub shift: [f64; 2],
}

pub fn logistic(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProcessSpec {
    Brownian(BrownianSpec),
    OrnsteinUhlenbeck(OUSpec),
    LogisticOu(LogisticOuSpec),
}

impl ProcessSpec {
    pub fn dim(&self) -> usize {
        match self {
            ProcessSpec::Brownian(b) => b.dim(),
            _ => 2,
        }
    }

    /// Values at time 0.
    pub fn initial_values(&self) -> Vec<f64> {
        match self {
            ProcessSpec::Brownian(b) => b.initial.clone(),
            ProcessSpec::OrnsteinUhlenbeck(o) => o.initial.to_vec(),
            ProcessSpec::LogisticOu(l) => (0..2).map(|i| logistic(l.shift[i] + l.ou.initial[i])).collect(),
        }
    }

    pub fn simulator(&self, grid: SimulationGrid) -> Result<Simulator> {
        grid.validate()?;
        let kernel = match self {
            ProcessSpec::Brownian(b) => {
                Kernel::Brownian { chol: b.cholesky()?, initial: b.initial.clone(), sqrt_dt: grid.dt().sqrt() }
            }
            ProcessSpec::OrnsteinUhlenbeck(o) => ou_kernel(o, grid, None)?,
            ProcessSpec::LogisticOu(l) => {
                if !l.shift.iter().all(|s| s.is_finite()) {
                    return Err(Error::InvalidArgument("non-finite logistic shift".into()));
                }
                ou_kernel(&l.ou, grid, Some(l.shift))?
            }
        };
        Ok(Simulator { grid, times: grid.times(), kernel })
    }
}

fn ou_kernel(o: &OUSpec, grid: SimulationGrid, shift: Option<[f64; 2]>) -> Result<Kernel> {
    o.validate()?;
    let (decay, chol) = o.transition(grid.dt());
    Ok(Kernel::Ou { decay, chol, initial: o.initial, shift })
}

#[derive(Clone, Debug)]
enum Kernel {
    Brownian { chol: Vec<f64>, initial: Vec<f64>, sqrt_dt: f64 },
    Ou { decay: [f64; 2], chol: [f64; 3], initial: [f64; 2], shift: Option<[f64; 2]> },
}

/// A validated process bound to a grid, with step factors precomputed.
#[derive(Clone, Debug)]
pub struct Simulator {
    grid: SimulationGrid,
    times: Vec<f64>,
    kernel: Kernel,
}

impl Simulator {
    pub fn grid(&self) -> SimulationGrid {
        self.grid
    }

    pub fn dim(&self) -> usize {
        match &self.kernel {
            Kernel::Brownian { initial, .. } => initial.len(),
            Kernel::Ou { .. } => 2,
        }
    }

    /// Path number `index` under `seed`.
    pub fn sample(&self, seed: Seed, index: u64) -> SampledPath {
        let mut rng = seed.path_rng(index);
        let d = self.dim();
        let m = self.grid.steps;
        let mut values = Vec::with_capacity((m + 1) * d);
        match &self.kernel {
            Kernel::Brownian { chol, initial, sqrt_dt } => {
                values.extend_from_slice(initial);
                let mut z = vec![0.0; d];
                for k in 0..m {
                    for zi in z.iter_mut() {
                        *zi = rng.sample::<f64, _>(StandardNormal);
                    }
                    for i in 0..d {
                        let inc: f64 = (0..=i).map(|j| chol[i * d + j] * z[j]).sum();
                        let prev = values[k * d + i];
                        values.push(prev + sqrt_dt * inc);
                    }
                }
            }
            Kernel::Ou { decay, chol, initial, shift } => {
                let mut y = *initial;
                let emit = |y: &[f64; 2], out: &mut Vec<f64>| match shift {
                    Some(s) => out.extend([logistic(s[0] + y[0]), logistic(s[1] + y[1])]),
                    None => out.extend(y),
                };
                emit(&y, &mut values);
                for _ in 0..m {
                    let z1: f64 = rng.sample(StandardNormal);
                    let z2: f64 = rng.sample(StandardNormal);
                    y[0] = y[0] * decay[0] + chol[0] * z1;
                    y[1] = y[1] * decay[1] + chol[1] * z1 + chol[2] * z2;
                    emit(&y, &mut values);
                }
            }
        }
        SampledPath::new(self.times.clone(), values, d).expect("simulated grid is valid")
    }
}

pub fn simulate_bm(spec: &BrownianSpec, grid: SimulationGrid, seed: Seed) -> Result<SampledPath> {
    Ok(ProcessSpec::Brownian(spec.clone()).simulator(grid)?.sample(seed, 0))
}

pub fn simulate_ou(spec: &OUSpec, grid: SimulationGrid, seed: Seed) -> Result<SampledPath> {
    Ok(ProcessSpec::OrnsteinUhlenbeck(*spec).simulator(grid)?.sample(seed, 0))
}

fn double_factorial(n: u32) -> f64 {
    (1..=n).rev().step_by(2).map(f64::from).product()
}

/// `E[<21 - 31, Y>^n]` for `Y = (t, B1, B2)` with independent components.
pub fn bm_integral_moment(t: f64, n: u32) -> f64 {
    if n % 2 == 1 {
        return 0.0;
    }
    (2.0 / 3.0 * t * t * t).powi((n / 2) as i32) * double_factorial(n.saturating_sub(1))
}

/// Expected Stratonovich signature entry of time-enhanced independent
/// Brownian motion. Letter 1 is time; Brownian letters are 2, 3, ...
pub fn expected_bm_signature_word(word: &Word, t: f64) -> Result<f64> {
    let letters = word.letters();
    if letters.contains(&1) {
        return Err(Error::InvalidArgument(format!(
            "word {:?} contains the time letter; only pure Brownian words are supported",
            word
        )));
    }
    if letters.len() % 2 == 1 {
        return Ok(0.0);
    }
    if letters.chunks(2).any(|p| p[0] != p[1]) {
        return Ok(0.0);
    }
    let k = (letters.len() / 2) as i32;
    let k_fact: f64 = (1..=k).map(f64::from).product();
    Ok((t / 2.0).powi(k) / k_fact)
}

/// `E[Z^n]` for `Z ~ N(mu, sigma^2)`.
pub fn gaussian_moment(mu: f64, sigma: f64, n: u32) -> f64 {
    let s2 = sigma * sigma;
    let (mut prev, mut cur) = (1.0, mu);
    if n == 0 {
        return 1.0;
    }
    for k in 2..=n {
        let next = mu * cur + (k - 1) as f64 * s2 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `int_0^t (1 - e^{-a v})(1 - e^{-b v}) dv`.
fn kernel_overlap(a: f64, b: f64, t: f64) -> f64 {
    let g = |c: f64| -(-c * t).exp_m1() / c;
    t - g(a) - g(b) + g(a + b)
}

/// Mean and variance of `Z_t = int_0^t (Y1 - Y2) ds`.
pub fn ou_z_stats(spec: &OUSpec, t: f64) -> Result<(f64, f64)> {
    spec.validate()?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("t must be positive, got {t}")));
    }
    let [a1, a2] = spec.mean_reversion;
    let [s1, s2] = spec.volatility;
    let [y1, y2] = spec.initial;
    let mu = y1 * -(-a1 * t).exp_m1() / a1 - y2 * -(-a2 * t).exp_m1() / a2;
    let (k1, k2) = (s1 / a1, s2 / a2);
    let var = k1 * k1 * kernel_overlap(a1, a1, t) - 2.0 * spec.correlation * k1 * k2 * kernel_overlap(a1, a2, t)
        + k2 * k2 * kernel_overlap(a2, a2, t);
    Ok((mu, var.max(0.0)))
}
