//! Truncated signatures of sampled paths.
//!
//! Two lifts are supported. The Stratonovich lift is the signature of the
//! piecewise-linear interpolant, i.e. the ordered product of the tensor
//! exponentials of the increments. The Itô lift is the discrete left-point
//! lift, the ordered product of `1 + Δ` over the increments, which is the
//! level-by-level recursion `⟨w a, S_{s,t}⟩ = Σ_k ⟨w, S_{s,t_k}⟩ ΔX^a_k`.
//! Both are multiplicative, so Chen's identity holds exactly for both.

use serde::{Deserialize, Serialize};

use crate::algebra::{WeightedWord, Word};
use crate::error::{Error, Result};

/// Upper bound on the total number of stored tensor entries.
pub const MAX_ENTRIES: u64 = 100_000_000;

/// Observations of a `d`-dimensional path on a strictly increasing time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledPath {
    times: Vec<f64>,
    // row-major, times.len() rows of `dim` values
    values: Vec<f64>,
    dim: usize,
}

impl SampledPath {
    pub fn new(times: Vec<f64>, values: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidPath("dimension must be at least 1".into()));
        }
        if values.len() != times.len() * dim {
            return Err(Error::InvalidPath(format!(
                "{} values do not fill {} rows of dimension {dim}",
                values.len(),
                times.len()
            )));
        }
        if let Some(k) = times.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidPath(format!(
                "times must be strictly increasing (rows {} and {})",
                k,
                k + 1
            )));
        }
        if times.iter().chain(values.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidPath("non-finite sample".into()));
        }
        Ok(SampledPath { times, values, dim })
    }

    /// Builds from rows of equal length.
    pub fn from_rows(times: Vec<f64>, rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidPath("ragged rows".into()));
        }
        SampledPath::new(times, rows.concat(), dim)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn time(&self, k: usize) -> f64 {
        self.times[k]
    }

    pub fn point(&self, k: usize) -> &[f64] {
        &self.values[k * self.dim..(k + 1) * self.dim]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Component `i` (0-based) at every sample.
    pub fn component(&self, i: usize) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().skip(i).step_by(self.dim).copied()
    }

    /// Prepends time as component 1; the original components follow in order.
    pub fn time_enhance(&self) -> SampledPath {
        let dim = self.dim + 1;
        let mut values = Vec::with_capacity(self.len() * dim);
        for k in 0..self.len() {
            values.push(self.times[k]);
            values.extend_from_slice(self.point(k));
        }
        SampledPath { times: self.times.clone(), values, dim }
    }

    /// Samples `start..=end`, sharing endpoints with neighbouring slices.
    pub fn slice(&self, start: usize, end: usize) -> Result<SampledPath> {
        if start >= end || end >= self.len() {
            return Err(Error::InvalidArgument(format!(
                "slice {start}..={end} of a path with {} points",
                self.len()
            )));
        }
        Ok(SampledPath {
            times: self.times[start..=end].to_vec(),
            values: self.values[start * self.dim..(end + 1) * self.dim].to_vec(),
            dim: self.dim,
        })
    }

    /// Total 1-variation of the piecewise-linear interpolant (Euclidean).
    pub fn one_variation(&self) -> f64 {
        (1..self.len())
            .map(|k| {
                self.point(k)
                    .iter()
                    .zip(self.point(k - 1))
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            })
            .sum()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LiftKind {
    #[default]
    Stratonovich,
    Ito,
}

impl LiftKind {
    pub fn is_geometric(self) -> bool {
        matches!(self, LiftKind::Stratonovich)
    }
}

impl std::str::FromStr for LiftKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "stratonovich" | "strat" => Ok(LiftKind::Stratonovich),
            "ito" | "itô" => Ok(LiftKind::Ito),
            other => Err(Error::Parse(format!("unknown lift `{other}`"))),
        }
    }
}

impl std::fmt::Display for LiftKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            LiftKind::Stratonovich => "stratonovich",
            LiftKind::Ito => "ito",
        })
    }
}

/// Levels `0..=depth` of the tensor algebra over `R^dim`, stored densely.
///
/// The entry for the word `i_1 … i_k` in level `k` sits at the big-endian
/// index `Σ (i_j - 1) d^{k-j}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedSignature {
    depth: usize,
    dim: usize,
    levels: Vec<Vec<f64>>,
    interval: (f64, f64),
}

fn check_size(dim: usize, depth: usize) -> Result<()> {
    let mut total: u64 = 0;
    let mut level: u64 = 1;
    for _ in 0..=depth {
        total = total.saturating_add(level);
        level = level.saturating_mul(dim as u64);
    }
    if total > MAX_ENTRIES {
        return Err(Error::SignatureTooLarge { dim, depth });
    }
    Ok(())
}

impl TruncatedSignature {
    /// The unit element `(1, 0, …, 0)` over the degenerate interval `[t, t]`.
    pub fn identity(dim: usize, depth: usize, t: f64) -> Result<Self> {
        check_size(dim, depth)?;
        let levels = (0..=depth)
            .map(|k| {
                let mut v = vec![0.0; dim.pow(k as u32)];
                if k == 0 {
                    v[0] = 1.0;
                }
                v
            })
            .collect();
        Ok(TruncatedSignature { depth, dim, levels, interval: (t, t) })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn level(&self, k: usize) -> &[f64] {
        &self.levels[k]
    }

    fn index(&self, word: &Word) -> usize {
        word.letters().iter().fold(0, |acc, &l| acc * self.dim + (l as usize - 1))
    }

    /// Entry indexed by a word; fails if the word is too long or uses
    /// letters outside the alphabet.
    pub fn get(&self, word: &Word) -> Result<f64> {
        if word.len() > self.depth {
            return Err(Error::WordTooLong {
                word: word.to_text(self.dim),
                len: word.len(),
                depth: self.depth,
            });
        }
        if let Some(&l) = word.letters().iter().find(|&&l| l as usize > self.dim) {
            return Err(Error::InvalidLetter { letter: l as usize, alphabet: self.dim });
        }
        Ok(self.levels[word.len()][self.index(word)])
    }

    /// Linear pairing `⟨π, S⟩`.
    pub fn pair(&self, pi: &WeightedWord) -> Result<f64> {
        if pi.alphabet() != self.dim {
            return Err(Error::AlphabetMismatch { left: pi.alphabet(), right: self.dim });
        }
        let mut total = 0.0;
        for (w, c) in pi.terms() {
            total += c * self.get(w)?;
        }
        Ok(total)
    }

    /// All `(level, word, value)` entries in graded-lexicographic order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, Word, f64)> + '_ {
        self.levels.iter().enumerate().flat_map(move |(k, level)| {
            level.iter().enumerate().map(move |(idx, &v)| {
                let mut letters = vec![0u16; k];
                let mut rem = idx;
                for slot in letters.iter_mut().rev() {
                    *slot = (rem % self.dim) as u16 + 1;
                    rem /= self.dim;
                }
                (k, Word::new(letters, self.dim).expect("in range"), v)
            })
        })
    }

    /// Truncated tensor product `z_n = Σ_k a_k ⊗ b_{n-k}` of adjacent pieces.
    pub fn chen_combine(&self, other: &TruncatedSignature) -> Result<TruncatedSignature> {
        if self.depth != other.depth {
            return Err(Error::DepthMismatch { left: self.depth, right: other.depth });
        }
        if self.dim != other.dim {
            return Err(Error::AlphabetMismatch { left: self.dim, right: other.dim });
        }
        if self.interval.1 != other.interval.0 {
            return Err(Error::IntervalMismatch { end: self.interval.1, start: other.interval.0 });
        }
        let mut levels = Vec::with_capacity(self.depth + 1);
        for n in 0..=self.depth {
            let mut z = vec![0.0; self.dim.pow(n as u32)];
            for k in 0..=n {
                let a = &self.levels[k];
                let b = &other.levels[n - k];
                let width = b.len();
                for (i, &ai) in a.iter().enumerate() {
                    if ai == 0.0 {
                        continue;
                    }
                    let out = &mut z[i * width..(i + 1) * width];
                    for (o, &bj) in out.iter_mut().zip(b) {
                        *o += ai * bj;
                    }
                }
            }
            levels.push(z);
        }
        Ok(TruncatedSignature {
            depth: self.depth,
            dim: self.dim,
            levels,
            interval: (self.interval.0, other.interval.1),
        })
    }

    /// Right-multiplies in place by the lift of one linear segment.
    fn push_segment(&mut self, delta: &[f64], kind: LiftKind, scratch: &mut Vec<f64>) {
        let d = self.dim;
        match kind {
            LiftKind::Ito => {
                // S_n += S_{n-1} ⊗ Δ, highest level first so S_{n-1} is still old.
                for n in (1..=self.depth).rev() {
                    let (lower, upper) = self.levels.split_at_mut(n);
                    let prev = &lower[n - 1];
                    let cur = &mut upper[0];
                    for (i, &p) in prev.iter().enumerate() {
                        for (c, &dx) in cur[i * d..(i + 1) * d].iter_mut().zip(delta) {
                            *c += p * dx;
                        }
                    }
                }
            }
            LiftKind::Stratonovich => {
                // S_n <- Σ_k S_{n-k} ⊗ Δ^{⊗k}/k!, Horner form:
                // acc = S_0; acc = S_j + acc ⊗ Δ / (n - j + 1) for j = 1..=n.
                for n in (1..=self.depth).rev() {
                    scratch.clear();
                    scratch.push(self.levels[0][0]);
                    for j in 1..=n {
                        let inv = 1.0 / (n - j + 1) as f64;
                        let next_len = scratch.len() * d;
                        let mut next = Vec::with_capacity(next_len);
                        for &a in scratch.iter() {
                            let a = a * inv;
                            next.extend(delta.iter().map(|&dx| a * dx));
                        }
                        if j < n {
                            for (x, &s) in next.iter_mut().zip(&self.levels[j]) {
                                *x += s;
                            }
                            *scratch = next;
                        } else {
                            for (x, s) in self.levels[n].iter_mut().zip(next) {
                                *x += s;
                            }
                        }
                    }
                }
            }
        }
    }
}

/// Signature of `path` under the requested lift, truncated at `depth`.
pub fn lift(path: &SampledPath, depth: usize, kind: LiftKind) -> Result<TruncatedSignature> {
    if path.len() < 2 {
        return Err(Error::TooFewPoints(path.len()));
    }
    if depth == 0 {
        return Err(Error::InvalidArgument("depth must be at least 1".into()));
    }
    let mut sig = TruncatedSignature::identity(path.dim(), depth, path.time(0))?;
    let mut delta = vec![0.0; path.dim()];
    let mut scratch = Vec::new();
    for k in 1..path.len() {
        for ((d, a), b) in delta.iter_mut().zip(path.point(k)).zip(path.point(k - 1)) {
            *d = a - b;
        }
        sig.push_segment(&delta, kind, &mut scratch);
    }
    sig.interval = (path.time(0), path.time(path.len() - 1));
    Ok(sig)
}

pub fn stratonovich_lift(path: &SampledPath, depth: usize) -> Result<TruncatedSignature> {
    lift(path, depth, LiftKind::Stratonovich)
}

pub fn ito_lift(path: &SampledPath, depth: usize) -> Result<TruncatedSignature> {
    lift(path, depth, LiftKind::Ito)
}

/// Per-level comparison against the factorial decay bound `V^k / k!`.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayReport {
    pub variation: f64,
    /// `|level k| · k! / V^k` for `k = 1..=depth`; 0 when `V = 0`.
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
}

impl DecayReport {
    /// Holds up to a relative slack for round-off in the equality case.
    pub fn holds(&self) -> bool {
        self.max_ratio <= 1.0 + 1e-12
    }
}

/// Checks `|S^k| ≤ V^k / k!` where `V` is the 1-variation of the interpolant
/// and `|·|` is the Hilbert–Schmidt norm on `(R^d)^{⊗k}`.
pub fn decay_check(sig: &TruncatedSignature, path: &SampledPath) -> DecayReport {
    let variation = path.one_variation();
    let mut ratios = Vec::with_capacity(sig.depth);
    let mut bound = 1.0;
    for k in 1..=sig.depth {
        bound *= variation / k as f64;
        let norm = sig.levels[k].iter().map(|x| x * x).sum::<f64>().sqrt();
        ratios.push(if bound > 0.0 { norm / bound } else { 0.0 });
    }
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    DecayReport { variation, ratios, max_ratio }
}
