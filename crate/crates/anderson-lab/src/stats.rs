//! Deterministic statistical accumulators.
//!
//! Ensemble reductions always run over index-ordered sample vectors with
//! compensated summation, so reported statistics do not depend on thread
//! count or scheduling.

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

pub fn compensated_sum(xs: &[f64]) -> f64 {
    let mut s = NeumaierSum::new();
    for &x in xs {
        s.add(x);
    }
    s.total()
}

/// Sample mean and its standard error.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    assert!(n > 1, "need at least two samples");
    let mean = compensated_sum(xs) / n as f64;
    let mut sq = NeumaierSum::new();
    for &x in xs {
        let d = x - mean;
        sq.add(d * d);
    }
    let var = sq.total() / (n as f64 - 1.0);
    (mean, (var / n as f64).sqrt())
}

/// z-score of `mean(after - before) / SE`; exactly zero when every paired
/// difference vanishes (the degenerate null of a no-op evolution).
pub fn paired_z(before: &[f64], after: &[f64]) -> (f64, f64, f64) {
    assert_eq!(before.len(), after.len());
    let diffs: Vec<f64> = after.iter().zip(before.iter()).map(|(a, b)| a - b).collect();
    let (mean, se) = mean_and_se(&diffs);
    let z = if mean == 0.0 { 0.0 } else { mean / se };
    (mean, se, z)
}

/// Ordinary least squares `y = a + b x`; returns `(a, b, se_b)`.
pub fn ols(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    assert!(xs.len() >= 3, "need at least three points for a slope SE");
    let mx = compensated_sum(xs) / n;
    let my = compensated_sum(ys) / n;
    let mut sxx = NeumaierSum::new();
    let mut sxy = NeumaierSum::new();
    for (&x, &y) in xs.iter().zip(ys.iter()) {
        sxx.add((x - mx) * (x - mx));
        sxy.add((x - mx) * (y - my));
    }
    let b = sxy.total() / sxx.total();
    let a = my - b * mx;
    let mut sse = NeumaierSum::new();
    for (&x, &y) in xs.iter().zip(ys.iter()) {
        let r = y - a - b * x;
        sse.add(r * r);
    }
    let sigma2 = sse.total() / (n - 2.0);
    (a, b, (sigma2 / sxx.total()).sqrt())
}

/// Mean and autocorrelation-robust standard error by the method of batch
/// means: contiguous batches (in chain order) absorb serial correlation as
/// long as a batch spans several autocorrelation times.
pub fn batch_mean_se(xs: &[f64], n_batches: usize) -> (f64, f64) {
    let b = n_batches.max(2);
    let per = xs.len() / b;
    assert!(per >= 1, "need at least one sample per batch");
    let used = &xs[..per * b];
    let means: Vec<f64> = used
        .chunks_exact(per)
        .map(|chunk| compensated_sum(chunk) / per as f64)
        .collect();
    mean_and_se(&means)
}

/// Effective sample size of normalized importance weights.
pub fn effective_sample_size(weights: &[f64]) -> f64 {
    let s = compensated_sum(weights);
    let s2 = weights.iter().map(|w| w * w).sum::<f64>();
    if s2 == 0.0 {
        0.0
    } else {
        s * s / s2
    }
}
