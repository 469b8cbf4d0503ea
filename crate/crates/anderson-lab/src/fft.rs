//! Thin 2d FFT layer over rustfft with a global plan cache.
//!
//! Conventions: a field is `f(x) = sum_k fhat(k) e^{2 pi i k.x}` sampled at
//! `x = j/n`. `inverse2` evaluates that sum (unnormalized inverse DFT);
//! `forward2` recovers `fhat` (forward DFT divided by `n^2`). With these
//! normalizations Parseval reads `integral |f|^2 dx = sum_k |fhat(k)|^2`.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

struct Plans {
    forward: HashMap<usize, Arc<dyn Fft<f64>>>,
    inverse: HashMap<usize, Arc<dyn Fft<f64>>>,
}

fn plans() -> &'static Mutex<Plans> {
    static PLANS: OnceLock<Mutex<Plans>> = OnceLock::new();
    PLANS.get_or_init(|| {
        Mutex::new(Plans {
            forward: HashMap::new(),
            inverse: HashMap::new(),
        })
    })
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut guard = plans().lock().expect("fft plan cache");
    let map = if inverse {
        &mut guard.inverse
    } else {
        &mut guard.forward
    };
    map.entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if inverse {
                planner.plan_fft_inverse(n)
            } else {
                planner.plan_fft_forward(n)
            }
        })
        .clone()
}

fn transpose(n: usize, data: &mut [Complex64]) {
    for i in 0..n {
        for j in (i + 1)..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}

fn fft2(n: usize, data: &mut [Complex64], inverse: bool) {
    debug_assert_eq!(data.len(), n * n);
    let fft = plan(n, inverse);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    fft.process_with_scratch(data, &mut scratch);
    transpose(n, data);
    fft.process_with_scratch(data, &mut scratch);
    transpose(n, data);
}

/// Physical samples -> Fourier coefficients (includes the `1/n^2`).
pub fn forward2(n: usize, data: &mut [Complex64]) {
    fft2(n, data, false);
    let scale = 1.0 / (n * n) as f64;
    for v in data.iter_mut() {
        *v *= scale;
    }
}

/// Fourier coefficients -> physical samples.
pub fn inverse2(n: usize, data: &mut [Complex64]) {
    fft2(n, data, true);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_single_mode() {
        let n = 16;
        // single mode k = (2, 13) == (2, -3)
        let mut coeffs = vec![Complex64::default(); n * n];
        coeffs[2 * n + 13] = Complex64::new(1.0, 0.0);
        let mut physical = coeffs.clone();
        inverse2(n, &mut physical);
        // check against e^{2 pi i (2 x1 - 3 x2)} at a few points
        for &(j1, j2) in &[(0usize, 0usize), (3, 5), (11, 2)] {
            let phase = 2.0 * std::f64::consts::PI
                * (2.0 * j1 as f64 / n as f64 - 3.0 * j2 as f64 / n as f64);
            let expect = Complex64::new(phase.cos(), phase.sin());
            let got = physical[j1 * n + j2];
            assert!((got - expect).norm() < 1e-12);
        }
        forward2(n, &mut physical);
        for (a, b) in physical.iter().zip(coeffs.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
