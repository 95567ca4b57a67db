//! Compensated, order-fixed reductions.

use crate::parallel::{map_indexed, Execution};

/// Neumaier's compensated summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = NeumaierSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Block length of the fixed reduction tree.
pub const BLOCK: usize = 1024;

/// Sum of `f(values[i])` in a fixed two-level tree: compensated sums over
/// consecutive blocks of [`BLOCK`] items, then a compensated sum of the block
/// totals. The grouping depends only on the length, never on workers.
pub fn fixed_tree_sum(values: &[f64], exec: Execution, f: impl Fn(f64) -> f64 + Sync) -> f64 {
    let blocks = values.len().div_ceil(BLOCK);
    let partial = map_indexed(blocks, exec, |b| {
        let end = ((b + 1) * BLOCK).min(values.len());
        values[b * BLOCK..end].iter().map(|&x| f(x)).collect::<NeumaierSum>().value()
    });
    partial.into_iter().collect::<NeumaierSum>().value()
}

/// Sample mean and standard error of the mean (two-pass, `n - 1` variance).
pub fn mean_and_std_error(values: &[f64], exec: Execution) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = fixed_tree_sum(values, exec, |x| x) / n as f64;
    if n < 2 {
        return (mean, f64::NAN);
    }
    let ss = fixed_tree_sum(values, exec, |x| (x - mean) * (x - mean));
    (mean, (ss / (n - 1) as f64 / n as f64).sqrt())
}
