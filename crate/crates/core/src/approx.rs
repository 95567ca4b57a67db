//! Polynomial approximation of payoff functions of signature pairings.
//!
//! Payoffs of the form `f(⟨π_1, S⟩, …, ⟨π_n, S⟩)` are replaced by
//! multivariate polynomials `Σ α_m x^m`, whose expectations are linear in the
//! correlators `E[x^m]`. This module builds such polynomials (Taylor,
//! Hermite, Bernstein, smoothed max) and evaluates the coefficient growth
//! condition and remainder bound that control the truncation error.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::error::{Error, Result};

pub type MultiIndex = Vec<u32>;

/// `Σ_m α_m x^m` over a finite set of multi-indices.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiIndexPolynomial {
    n_vars: usize,
    terms: BTreeMap<MultiIndex, f64>,
}

impl MultiIndexPolynomial {
    pub fn new(n_vars: usize) -> Self {
        MultiIndexPolynomial { n_vars, terms: BTreeMap::new() }
    }

    /// `Σ_k coeffs[k] x^k`, skipping zero coefficients.
    pub fn univariate(coeffs: &[f64]) -> Self {
        let mut p = MultiIndexPolynomial::new(1);
        for (k, &c) in coeffs.iter().enumerate().filter(|(_, &c)| c != 0.0) {
            p.add_term(vec![k as u32], c).expect("one variable");
        }
        p
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    /// Adds `α x^m`, merging with an existing term for `m`.
    pub fn add_term(&mut self, m: MultiIndex, alpha: f64) -> Result<()> {
        if m.len() != self.n_vars {
            return Err(Error::InvalidArgument(format!(
                "multi-index of length {} for a polynomial in {} variables",
                m.len(),
                self.n_vars
            )));
        }
        if !alpha.is_finite() {
            return Err(Error::InvalidArgument(format!("non-finite coefficient {alpha}")));
        }
        *self.terms.entry(m).or_insert(0.0) += alpha;
        Ok(())
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, f64)> {
        self.terms.iter().map(|(m, &a)| (m, a))
    }

    pub fn coefficient(&self, m: &[u32]) -> f64 {
        self.terms.get(m).copied().unwrap_or(0.0)
    }

    /// Number of retained multi-indices, `|N|`.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n_vars {
            return Err(Error::InvalidArgument(format!(
                "point of dimension {} for a polynomial in {} variables",
                x.len(),
                self.n_vars
            )));
        }
        Ok(self
            .terms()
            .map(|(m, a)| a * m.iter().zip(x).map(|(&k, &xi)| xi.powi(k as i32)).product::<f64>())
            .sum())
    }

    /// Product of polynomials in disjoint variable blocks: `p(x) q(y)`.
    pub fn tensor_product(&self, other: &MultiIndexPolynomial) -> MultiIndexPolynomial {
        let mut out = MultiIndexPolynomial::new(self.n_vars + other.n_vars);
        for (m, a) in self.terms() {
            for (k, b) in other.terms() {
                let mut idx = m.clone();
                idx.extend_from_slice(k);
                out.add_term(idx, a * b).expect("dimensions add up");
            }
        }
        out
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// `x!` for real `x >= 0`, through the gamma function.
fn real_factorial(x: f64) -> f64 {
    libm::tgamma(x + 1.0)
}

// ---------------------------------------------------------------- Taylor

/// Functions with a built-in Maclaurin expansion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TaylorFunction {
    Exp,
    /// `x σ(s x)` with sharpness `s`.
    SigmoidSmoothmax { sharpness: f64 },
}

impl TaylorFunction {
    /// Catalog ids: `exp`, `sigmoid_smoothmax` (sharpness 1).
    pub fn from_id(id: &str) -> Result<Self> {
        match id {
            "exp" => Ok(TaylorFunction::Exp),
            "sigmoid_smoothmax" => Ok(TaylorFunction::SigmoidSmoothmax { sharpness: 1.0 }),
            other => Err(Error::UnknownCatalog(other.to_string())),
        }
    }
}

#[derive(Clone, Debug)]
pub struct TaylorSeries {
    pub function: TaylorFunction,
    pub order: u32,
    pub poly: MultiIndexPolynomial,
}

impl TaylorSeries {
    pub fn eval(&self, x: f64) -> f64 {
        self.poly.eval(&[x]).expect("univariate")
    }

    /// Lagrange remainder bound `sup|f^{(k+1)}| |x|^{k+1} / (k+1)!` over
    /// `[0, x]`, when a derivative bound is known.
    pub fn remainder_bound(&self, x: f64) -> Option<f64> {
        match self.function {
            TaylorFunction::Exp => {
                let k1 = self.order + 1;
                Some(x.max(0.0).exp() * x.abs().powi(k1 as i32) / factorial(k1))
            }
            TaylorFunction::SigmoidSmoothmax { .. } => None,
        }
    }
}

/// Maclaurin polynomial of degree `order` for a catalog function.
pub fn taylor_series(function: TaylorFunction, order: u32) -> TaylorSeries {
    let coeffs: Vec<f64> = match function {
        TaylorFunction::Exp => (0..=order).map(|k| 1.0 / factorial(k)).collect(),
        TaylorFunction::SigmoidSmoothmax { sharpness } => {
            let s = smoothmax_series(sharpness, order.saturating_sub(1));
            let mut c: Vec<f64> = (0..=order).map(|k| s.poly.coefficient(&[k])).collect();
            if order == 0 {
                c = vec![0.0];
            }
            c
        }
    };
    TaylorSeries { function, order, poly: MultiIndexPolynomial::univariate(&coeffs) }
}

// ---------------------------------------------------------------- smoothed max

/// Bernoulli number `B_m` (with `B_1 = -1/2`).
pub fn bernoulli(m: u32) -> f64 {
    const SMALL: [f64; 7] =
        [1.0, 1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0, -691.0 / 2730.0];
    match m {
        0 => 1.0,
        1 => -0.5,
        m if m % 2 == 1 => 0.0,
        m if (m / 2) < SMALL.len() as u32 => SMALL[(m / 2) as usize],
        m => {
            // B_{2k} = (-1)^{k+1} 2 (2k)! ζ(2k) / (2π)^{2k}
            let zeta: f64 = (1..=200).rev().map(|j| (j as f64).powi(-(m as i32))).sum();
            let sign = if (m / 2) % 2 == 1 { 1.0 } else { -1.0 };
            let mut mag = 2.0 * zeta;
            for j in 1..=m {
                mag *= j as f64 / (2.0 * PI);
            }
            sign * mag
        }
    }
}

/// Euler polynomial value `E_n(0) = 2 (1 - 2^{n+1}) B_{n+1} / (n+1)`, `E_0(0) = 1`.
pub fn euler_at_zero(n: u32) -> f64 {
    if n == 0 {
        return 1.0;
    }
    2.0 * (1.0 - 2f64.powi(n as i32 + 1)) * bernoulli(n + 1) / (n as f64 + 1.0)
}

/// Truncated Maclaurin series of the smoothed max `x σ(s x)`.
#[derive(Clone, Debug)]
pub struct SmoothmaxSeries {
    pub sharpness: f64,
    pub order: u32,
    /// Degree `order + 1` polynomial in `x`.
    pub poly: MultiIndexPolynomial,
    /// Convergence radius `π / s` (nearest poles of the sigmoid at `±iπ/s`).
    pub radius: f64,
}

impl SmoothmaxSeries {
    pub fn eval(&self, x: f64) -> f64 {
        self.poly.eval(&[x]).expect("univariate")
    }

    /// The function the series expands.
    pub fn target(&self, x: f64) -> f64 {
        smoothmax(self.sharpness, x)
    }

    /// `sup_x |x σ(s x) - max(x, 0)|`, attained at `s x = y*` with
    /// `y* = 1 + e^{-y*}`; the supremum equals `(y* - 1) / s`.
    pub fn smoothing_bound(&self) -> f64 {
        smoothing_sup_error(self.sharpness)
    }
}

pub fn smoothmax(sharpness: f64, x: f64) -> f64 {
    let y = sharpness * x;
    if y >= 0.0 {
        x / (1.0 + (-y).exp())
    } else {
        let e = y.exp();
        x * e / (1.0 + e)
    }
}

pub fn smoothing_sup_error(sharpness: f64) -> f64 {
    let mut y: f64 = 1.3;
    for _ in 0..50 {
        // Newton on g(y) = y - 1 - e^{-y}
        let g = y - 1.0 - (-y).exp();
        y -= g / (1.0 + (-y).exp());
    }
    (y - 1.0) / sharpness
}

/// `x σ(s x) = Σ_{n=0}^{M} c_n s^n x^{n+1}` with `c_0 = 1/2` and
/// `c_n = -E_n(0) / (2 n!)` for `n >= 1`, from `σ(y) = 1 - ½ Σ E_n(0) y^n / n!`.
pub fn smoothmax_series(sharpness: f64, order: u32) -> SmoothmaxSeries {
    let mut coeffs = vec![0.0; order as usize + 2];
    coeffs[1] = 0.5;
    let mut s_pow = 1.0;
    for n in 1..=order {
        s_pow *= sharpness;
        coeffs[n as usize + 1] = -euler_at_zero(n) * s_pow / (2.0 * factorial(n));
    }
    SmoothmaxSeries {
        sharpness,
        order,
        poly: MultiIndexPolynomial::univariate(&coeffs),
        radius: PI / sharpness,
    }
}

// ---------------------------------------------------------------- Hermite

/// Orthonormal Hermite functions `e_n = He_n / √(n!)` at `x`, `n = 0..=order`.
pub fn hermite_basis(order: usize, x: f64) -> Vec<f64> {
    let mut e = Vec::with_capacity(order + 1);
    e.push(1.0);
    if order >= 1 {
        e.push(x);
    }
    for n in 1..order {
        // He_{n+1} = x He_n - n He_{n-1}, normalised.
        let next = (x * e[n] - (n as f64).sqrt() * e[n - 1]) / ((n + 1) as f64).sqrt();
        e.push(next);
    }
    e
}

/// `Σ_{n ≤ N} α_n e_n(x)`.
pub fn hermite_eval(coeffs: &[f64], x: f64) -> f64 {
    if coeffs.is_empty() {
        return 0.0;
    }
    hermite_basis(coeffs.len() - 1, x).iter().zip(coeffs).map(|(e, a)| e * a).sum()
}

fn gaussian_weight(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Coefficients `⟨f, e_n⟩` of a call payoff `max(x - K, 0)` in the
/// orthonormal Hermite basis of `L²(N(0,1))`.
pub fn hermite_coeffs(strike: f64, order: usize) -> Result<Vec<f64>> {
    hermite_coeffs_of(|x| (x - strike).max(0.0), &[strike], order)
}

// Outside this window the Gaussian weight times any e_n with n <= ~60 is
// below 1e-40.
const HERMITE_WINDOW: f64 = 16.0;

/// `⟨f, e_n⟩` for `n = 0..=order`. `kinks` lists points where `f` is not
/// smooth; the integration range is split there.
pub fn hermite_coeffs_of(
    f: impl Fn(f64) -> f64,
    kinks: &[f64],
    order: usize,
) -> Result<Vec<f64>> {
    let bound = HERMITE_WINDOW + (order as f64).sqrt();
    let mut cuts: Vec<f64> = vec![-bound, bound];
    cuts.extend(kinks.iter().copied().filter(|k| k.abs() < bound));
    // Unit panels keep each piece well resolved.
    let mut x = -bound.floor();
    while x < bound {
        cuts.push(x);
        x += 1.0;
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut coeffs = vec![0.0; order + 1];
    for n in 0..=order {
        let integrand = |x: f64| f(x) * hermite_basis(n, x)[n] * gaussian_weight(x);
        let mut total = 0.0;
        for w in cuts.windows(2) {
            total += adaptive_kronrod(&integrand, w[0], w[1], 1e-15, 1e-12)?;
        }
        coeffs[n] = total;
    }
    Ok(coeffs)
}

const KRONROD_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights on the odd Kronrod nodes (indices 1, 3, 5, 7).
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod_panel(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kronrod = 0.0;
    let mut gauss = 0.0;
    for i in 0..8 {
        let x = KRONROD_NODES[i];
        let fx = if x == 0.0 { f(c) } else { f(c - h * x) + f(c + h * x) };
        kronrod += KRONROD_WEIGHTS[i] * fx;
        if i % 2 == 1 {
            gauss += GAUSS_WEIGHTS[i / 2] * fx;
        }
    }
    (kronrod * h, (kronrod - gauss).abs() * h)
}

/// Adaptive 7–15 Gauss–Kronrod quadrature by bisection.
pub fn adaptive_kronrod(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<f64> {
    const MAX_PANELS: usize = 4096;
    let (v, e) = kronrod_panel(f, a, b);
    let mut panels = vec![(a, b, v, e)];
    loop {
        let total: f64 = panels.iter().map(|p| p.2).sum();
        let err: f64 = panels.iter().map(|p| p.3).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(total);
        }
        if panels.len() >= MAX_PANELS {
            let change = err / total.abs().max(f64::MIN_POSITIVE);
            if change > 1e-10 {
                return Err(Error::QuadratureNonConvergence { change });
            }
            return Ok(total);
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .expect("non-empty");
        let (a, b, _, _) = panels.swap_remove(worst);
        let mid = 0.5 * (a + b);
        let (v1, e1) = kronrod_panel(f, a, mid);
        let (v2, e2) = kronrod_panel(f, mid, b);
        panels.push((a, mid, v1, e1));
        panels.push((mid, b, v2, e2));
    }
}

// ---------------------------------------------------------------- Bernstein

/// `B_n(f)(x) = Σ_{k=0}^{n} f(k/n) C(n,k) x^k (1-x)^{n-k}` from the samples
/// `f(k/n)`, evaluated by de Casteljau's algorithm.
pub fn bernstein_approx(samples: &[f64], x: f64) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::InvalidArgument("Bernstein needs n >= 1 (two samples)".into()));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidArgument(format!("Bernstein point {x} outside [0, 1]")));
    }
    let mut b = samples.to_vec();
    for r in 1..b.len() {
        for k in 0..b.len() - r {
            b[k] = (1.0 - x) * b[k] + x * b[k + 1];
        }
    }
    Ok(b[0])
}

/// Samples `f(k/n)`, `k = 0..=n`.
pub fn bernstein_samples(f: impl Fn(f64) -> f64, n: usize) -> Vec<f64> {
    (0..=n).map(|k| f(k as f64 / n as f64)).collect()
}

// ---------------------------------------------------------------- bounds

/// Data for the coefficient growth condition and remainder bound.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BoundParams {
    pub c: f64,
    /// Variation order `p >= 1`.
    pub p: f64,
    /// Per variable `i`: `(κ_ij, |w_ij|)` for the words of `π_i`.
    pub words: Vec<Vec<(f64, usize)>>,
    /// Signature growth constant `K`.
    pub k_norm: f64,
}

impl BoundParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0) || !(self.k_norm > 0.0) || !(self.p >= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "bound parameters need C > 0, K > 0, p >= 1 (got C = {}, K = {}, p = {})",
                self.c, self.k_norm, self.p
            )));
        }
        Ok(())
    }

    /// `Σ_j |κ_ij| (|w_ij|/p)! / K^{|w_ij|}` for variable `i`.
    fn word_factor(&self, i: usize) -> f64 {
        self.words[i]
            .iter()
            .map(|&(kappa, len)| {
                kappa.abs() * real_factorial(len as f64 / self.p) / self.k_norm.powi(len as i32)
            })
            .sum()
    }
}

/// True iff `|α_m| <= C^{|m|}/m! · Π_i (Σ_j |κ_ij| (|w_ij|/p)!/K^{|w_ij|})^{m_i}`
/// for every retained multi-index.
pub fn coefficient_condition(poly: &MultiIndexPolynomial, params: &BoundParams) -> Result<bool> {
    params.validate()?;
    if params.words.len() != poly.n_vars() {
        return Err(Error::InvalidArgument(format!(
            "word data for {} variables, polynomial has {}",
            params.words.len(),
            poly.n_vars()
        )));
    }
    let factors: Vec<f64> = (0..poly.n_vars()).map(|i| params.word_factor(i)).collect();
    Ok(poly.terms().all(|(m, alpha)| {
        let total: u32 = m.iter().sum();
        let m_fact: f64 = m.iter().map(|&k| factorial(k)).product();
        let rhs = params.c.powi(total as i32) / m_fact
            * m.iter().zip(&factors).map(|(&k, f)| f.powi(k as i32)).product::<f64>();
        alpha.abs() <= rhs
    }))
}

/// `exp(C) C^{|N|+1} / ((n-1)! (|N|-n-1)!)`.
pub fn remainder_bound(c: f64, n_vars: usize, card: usize) -> Result<f64> {
    if n_vars == 0 || card < n_vars + 1 {
        return Err(Error::InvalidArgument(format!(
            "remainder bound needs |N| >= n + 1 (got |N| = {card}, n = {n_vars})"
        )));
    }
    Ok(c.exp() * c.powi(card as i32 + 1)
        / (factorial(n_vars as u32 - 1) * factorial((card - n_vars - 1) as u32)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use statrs::distribution::{Continuous, ContinuousCDF, Normal};

    fn naive_eval(poly: &MultiIndexPolynomial, x: &[f64]) -> f64 {
        let mut total = 0.0;
        for (m, a) in poly.terms() {
            let mut mono = 1.0;
            for (i, &k) in m.iter().enumerate() {
                for _ in 0..k {
                    mono *= x[i];
                }
            }
            total += a * mono;
        }
        total
    }

    /// E_n(0) from Σ_k C(n,k) E_k(0) + E_n(0) = 2·0^n, with the magnitude
    /// of the cancelling sum as an error scale.
    fn euler_recurrence(n_max: usize) -> Vec<(f64, f64)> {
        let mut e: Vec<f64> = vec![1.0];
        let mut out = vec![(1.0, 1.0)];
        for n in 1..=n_max {
            let mut s = 0.0;
            let mut scale = 0.0;
            let mut binom = 1.0;
            for (k, ek) in e.iter().enumerate() {
                s += binom * ek;
                scale += (binom * ek).abs();
                binom *= (n - k) as f64 / (k + 1) as f64;
            }
            e.push(-0.5 * s);
            out.push((-0.5 * s, scale));
        }
        out
    }

    #[test]
    fn eval_examples() {
        let mut p = MultiIndexPolynomial::new(2);
        p.add_term(vec![0, 0], 5.0).unwrap();
        assert_eq!(p.eval(&[3.0, -7.0]).unwrap(), 5.0);
        let mut q = MultiIndexPolynomial::new(2);
        q.add_term(vec![1, 1], 1.0).unwrap();
        assert_eq!(q.eval(&[2.0, 3.0]).unwrap(), 6.0);
        assert!(q.eval(&[1.0]).is_err());
        assert!(q.add_term(vec![1], 1.0).is_err());
    }

    #[test]
    fn taylor_exp() {
        let s = taylor_series(TaylorFunction::Exp, 3);
        for (k, c) in [1.0, 1.0, 0.5, 1.0 / 6.0].iter().enumerate() {
            assert!((s.poly.coefficient(&[k as u32]) - c).abs() < 1e-16);
        }
        let s10 = taylor_series(TaylorFunction::Exp, 10);
        let diff = (s10.eval(0.5) - 0.5f64.exp()).abs();
        let lagrange = 0.5f64.powi(11) / factorial(11) * 1f64.exp();
        assert!(diff <= lagrange, "{diff} > {lagrange}");
        assert!(diff <= s10.remainder_bound(0.5).unwrap());
        let s0 = taylor_series(TaylorFunction::Exp, 0);
        assert_eq!(s0.poly.len(), 1);
        assert_eq!(s0.eval(3.0), 1.0);
        assert!(matches!(TaylorFunction::from_id("cosh"), Err(Error::UnknownCatalog(_))));
        let sm = taylor_series(TaylorFunction::from_id("sigmoid_smoothmax").unwrap(), 6);
        assert!((sm.eval(0.3) - smoothmax(1.0, 0.3)).abs() < 1e-6);
        assert!(sm.remainder_bound(0.3).is_none());
    }

    #[test]
    fn euler_values_match_recurrence() {
        let oracle = euler_recurrence(25);
        let first: Vec<f64> = oracle[..4].iter().map(|p| p.0).collect();
        assert_eq!(first, [1.0, -0.5, 0.0, 0.25]);
        for (n, &(e, scale)) in oracle.iter().enumerate() {
            let got = euler_at_zero(n as u32);
            assert!((got - e).abs() <= 1e-13 * scale, "n={n}: {got} vs {e}");
        }
    }

    #[test]
    fn smoothmax_series_accuracy() {
        let s = smoothmax_series(4.0, 12);
        assert_eq!(s.eval(0.0), 0.0);
        let direct = smoothmax(4.0, 0.2);
        assert!(((s.eval(0.2) - direct) / direct).abs() <= 1e-4);
        assert!((s.radius - PI / 4.0).abs() < 1e-15);
    }

    #[test]
    fn smoothmax_diverges_outside_radius() {
        let n = 2.0;
        let x = 2.0 * PI / n;
        let values: Vec<f64> =
            [10, 20, 30, 40].iter().map(|&m| smoothmax_series(n, m).eval(x)).collect();
        let errors: Vec<f64> = values.iter().map(|v| (v - smoothmax(n, x)).abs()).collect();
        assert!(errors.windows(2).all(|w| w[1] > w[0]), "{errors:?}");
        assert!(errors[3] > 1e3);
        // and converge inside
        let inside = 0.5 * PI / n;
        let e40 = (smoothmax_series(n, 40).eval(inside) - smoothmax(n, inside)).abs();
        assert!(e40 < 1e-8);
    }

    #[test]
    fn printed_coefficient_formula_regression() {
        // Literal reading: (-1)^n E_n(0) / (2n)! N^n x^{n+1}; reading the
        // factorial as 2·n! instead reproduces the Maclaurin series.
        let (n_sharp, order) = (3.0, 9u32);
        let s = smoothmax_series(n_sharp, order);
        let mut literal_differs = false;
        for n in 0..=order {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let e = euler_at_zero(n);
            let literal = sign * e / factorial(2 * n) * n_sharp.powi(n as i32);
            let two_n_fact = sign * e / (2.0 * factorial(n)) * n_sharp.powi(n as i32);
            let ours = s.poly.coefficient(&[n + 1]);
            assert!((two_n_fact - ours).abs() <= 1e-12 * ours.abs().max(1.0), "n={n}");
            literal_differs |= (literal - ours).abs() > 1e-6;
        }
        assert!(literal_differs);
    }

    #[test]
    fn smoothing_bound_is_sup() {
        let s = 3.0;
        let bound = smoothing_sup_error(s);
        let sup = (0..20001)
            .map(|k| -5.0 + k as f64 * 5e-4)
            .map(|x| (smoothmax(s, x) - x.max(0.0)).abs())
            .fold(0.0, f64::max);
        assert!((sup - bound).abs() < 1e-7, "{sup} {bound}");
        assert!((smoothing_sup_error(1.0) - 0.278_464_542_761_074).abs() < 1e-12);
    }

    #[test]
    fn hermite_closed_form_oracles() {
        let std = Normal::standard();
        for strike in [0.0, 1.0, -0.7] {
            let a = hermite_coeffs(strike, 3).unwrap();
            // α_0 = E[(Z-K)^+] = φ(K) - K(1-Φ(K)); α_1 = E[(Z-K)^+ Z] = 1-Φ(K)
            let a0 = std.pdf(strike) - strike * (1.0 - std.cdf(strike));
            let a1 = 1.0 - std.cdf(strike);
            assert!((a[0] - a0).abs() < 1e-10, "K={strike}: {} vs {a0}", a[0]);
            assert!((a[1] - a1).abs() < 1e-10);
        }
        let a = hermite_coeffs(0.0, 0).unwrap();
        assert!((a[0] - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-12);
        let a = hermite_coeffs(1.0, 0).unwrap();
        assert!((a[0] - 0.083_315_47).abs() < 1e-8);
    }

    #[test]
    fn hermite_basis_function_hook() {
        let coeffs = hermite_coeffs_of(|x| x, &[], 6).unwrap();
        for (n, c) in coeffs.iter().enumerate() {
            let expected = if n == 1 { 1.0 } else { 0.0 };
            assert!((c - expected).abs() < 1e-12, "n={n}: {c}");
        }
    }

    #[test]
    fn hermite_orthonormality() {
        for i in 0..=10 {
            for j in 0..=10 {
                let g = |x: f64| {
                    let e = hermite_basis(10, x);
                    e[i] * e[j] * gaussian_weight(x)
                };
                let v = adaptive_kronrod(&g, -30.0, 30.0, 1e-15, 1e-13).unwrap();
                let delta = if i == j { 1.0 } else { 0.0 };
                assert!((v - delta).abs() < 1e-8, "({i},{j}) = {v}");
            }
        }
    }

    #[test]
    fn hermite_eval_examples() {
        assert_eq!(hermite_eval(&[2.5, 0.0, 0.0, 0.0], 1.7), 2.5);
        let a = hermite_coeffs(0.0, 20).unwrap();
        assert!((hermite_eval(&a, 2.0) - 2.0).abs() < 0.15);
    }

    #[test]
    fn hermite_l2_error_non_increasing() {
        // Parseval: ||f - F_N||² = ||f||² - Σ_{n<=N} α_n²
        let strike = 0.3;
        let norm_sq = adaptive_kronrod(
            &|x: f64| (x - strike).max(0.0).powi(2) * gaussian_weight(x),
            strike,
            30.0,
            1e-15,
            1e-13,
        )
        .unwrap();
        let a = hermite_coeffs(strike, 25).unwrap();
        let mut prev = f64::INFINITY;
        let mut partial = 0.0;
        for c in a {
            partial += c * c;
            let err = norm_sq - partial;
            assert!(err <= prev + 1e-14);
            assert!(err > -1e-10);
            prev = err;
        }
    }

    #[test]
    fn quadrature_non_convergence_reported() {
        let wild = |x: f64| (1.0 / x.abs().max(1e-300)).sin() / x.abs().max(1e-300).sqrt();
        let r = adaptive_kronrod(&wild, -1.0, 1.0, 0.0, 1e-15);
        assert!(matches!(r, Err(Error::QuadratureNonConvergence { .. })));
        assert!(r.unwrap_err().is_numerical());
    }

    #[test]
    fn bernstein_examples() {
        let c = bernstein_samples(|_| 0.37, 9);
        let x = bernstein_samples(|x| x, 9);
        for k in 0..=20 {
            let t = k as f64 / 20.0;
            assert!((bernstein_approx(&c, t).unwrap() - 0.37).abs() < 1e-15);
            assert!((bernstein_approx(&x, t).unwrap() - t).abs() < 1e-15);
        }
        assert!(bernstein_approx(&c, 1.2).is_err());
        assert!(bernstein_approx(&[1.0], 0.5).is_err());
    }

    #[test]
    fn bernstein_sup_error_decreases() {
        let f = |x: f64| (x - 0.5).max(0.0);
        let sup = |n: usize| {
            let s = bernstein_samples(f, n);
            (0..=100)
                .map(|k| k as f64 / 100.0)
                .map(|x| (bernstein_approx(&s, x).unwrap() - f(x)).abs())
                .fold(0.0, f64::max)
        };
        let (a, b, c) = (sup(8), sup(32), sup(128));
        assert!(a > b && b > c, "{a} {b} {c}");
    }

    #[test]
    fn remainder_bound_examples() {
        assert_eq!(remainder_bound(1.0, 1, 5).unwrap(), 1f64.exp() / 6.0);
        assert!(remainder_bound(1e-9, 1, 5).unwrap() < 1e-40);
        assert!(remainder_bound(1.0, 2, 2).is_err());
        for n in 1..4 {
            let vals: Vec<f64> =
                (n + 1..n + 15).map(|card| remainder_bound(0.9, n, card).unwrap()).collect();
            assert!(vals.windows(2).all(|w| w[1] <= w[0]));
        }
    }

    #[test]
    fn coefficient_condition_for_exp_series() {
        // Taylor coefficients 1/k! meet the condition with C = 1, one-letter
        // word, K = 1, p = 1: rhs = 1/k!.
        let params = BoundParams { c: 1.0, p: 1.0, words: vec![vec![(1.0, 1)]], k_norm: 1.0 };
        let s = taylor_series(TaylorFunction::Exp, 8);
        assert!(coefficient_condition(&s.poly, &params).unwrap());
        let mut bigger = s.poly.clone();
        bigger.add_term(vec![3], 1.0).unwrap();
        assert!(!coefficient_condition(&bigger, &params).unwrap());
        let bad = BoundParams { words: vec![], ..params.clone() };
        assert!(coefficient_condition(&s.poly, &bad).is_err());
        let bad = BoundParams { c: 0.0, ..params };
        assert!(coefficient_condition(&s.poly, &bad).is_err());
    }

    fn arb_poly(n: usize) -> impl Strategy<Value = MultiIndexPolynomial> {
        prop::collection::vec((prop::collection::vec(0u32..5, n), -3.0f64..3.0), 1..8).prop_map(
            move |terms| {
                let mut p = MultiIndexPolynomial::new(n);
                for (m, a) in terms {
                    p.add_term(m, a).unwrap();
                }
                p
            },
        )
    }

    proptest! {
        #[test]
        fn eval_matches_naive(p in arb_poly(3), x in prop::collection::vec(-2.0f64..2.0, 3)) {
            let fast = p.eval(&x).unwrap();
            let slow = naive_eval(&p, &x);
            let scale: f64 = p.terms()
                .map(|(m, a)| (a * m.iter().zip(&x).map(|(&k, xi)| xi.powi(k as i32)).product::<f64>()).abs())
                .sum();
            prop_assert!((fast - slow).abs() <= 1e-14 * scale.max(f64::MIN_POSITIVE));
        }

        #[test]
        fn eval_multiplicative_across_blocks(p in arb_poly(2), q in arb_poly(1),
                                             x in prop::collection::vec(-2.0f64..2.0, 3)) {
            let pq = p.tensor_product(&q);
            let lhs = pq.eval(&x).unwrap();
            let rhs = p.eval(&x[..2]).unwrap() * q.eval(&x[2..]).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()));
        }

        #[test]
        fn bernstein_endpoints(vals in prop::collection::vec(-5.0f64..5.0, 2..40)) {
            prop_assert_eq!(bernstein_approx(&vals, 0.0).unwrap(), vals[0]);
            prop_assert_eq!(bernstein_approx(&vals, 1.0).unwrap(), *vals.last().unwrap());
        }
    }
}
