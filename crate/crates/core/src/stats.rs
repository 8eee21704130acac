//! Small statistical helpers: batch means, bootstrap, least squares.

use rand::Rng;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanEstimate {
    pub mean: f64,
    pub stderr: f64,
}

/// Sample mean and its i.i.d. standard error.
pub fn mean_stderr(values: &[f64]) -> MeanEstimate {
    let n = values.len() as f64;
    if values.is_empty() {
        return MeanEstimate {
            mean: f64::NAN,
            stderr: f64::NAN,
        };
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return MeanEstimate { mean, stderr: 0.0 };
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    MeanEstimate {
        mean,
        stderr: (var / n).sqrt(),
    }
}

/// Mean of a correlated series with a batch-means standard error. The last
/// `len % batches` values only enter the mean. Falls back to the i.i.d.
/// formula when there are fewer values than batches.
pub fn batch_means(values: &[f64], batches: usize) -> MeanEstimate {
    let n = values.len();
    if n < batches.max(2) {
        return mean_stderr(values);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let size = n / batches;
    let bm: Vec<f64> = values
        .chunks_exact(size)
        .take(batches)
        .map(|c| c.iter().sum::<f64>() / size as f64)
        .collect();
    let b = bm.len() as f64;
    let bmean = bm.iter().sum::<f64>() / b;
    let var = bm.iter().map(|v| (v - bmean).powi(2)).sum::<f64>() / (b - 1.0);
    MeanEstimate {
        mean,
        stderr: (var / b).sqrt(),
    }
}

/// Bootstrap standard error of the sample mean.
pub fn bootstrap_mean<R: Rng + ?Sized>(values: &[f64], resamples: usize, rng: &mut R) -> MeanEstimate {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return MeanEstimate { mean, stderr: 0.0 };
    }
    let means: Vec<f64> = (0..resamples)
        .map(|_| (0..n).map(|_| values[rng.random_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    let m = means.iter().sum::<f64>() / means.len() as f64;
    let var = means.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (means.len() as f64 - 1.0);
    MeanEstimate {
        mean,
        stderr: var.sqrt(),
    }
}

/// Ordinary least squares `y ≈ intercept + slope·x`; returns `(slope, intercept)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Linear-interpolated empirical quantile of an unsorted sample.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let w = pos - lo as f64;
    v[lo] * (1.0 - w) + v[hi] * w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn batch_means_of_constant_series() {
        let e = batch_means(&[2.5; 1000], 16);
        assert_eq!(e.mean, 2.5);
        assert_eq!(e.stderr, 0.0);
    }

    #[test]
    fn linear_fit_recovers_line() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 - 0.7 * v).collect();
        let (s, i) = linear_fit(&x, &y);
        assert!((s + 0.7).abs() < 1e-12 && (i - 3.0).abs() < 1e-12);
    }

    #[test]
    fn quantile_endpoints() {
        let v = [3.0, 1.0, 2.0];
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 1.0), 3.0);
        assert_eq!(quantile(&v, 0.5), 2.0);
    }
}
