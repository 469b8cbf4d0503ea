//! White-noise sampling, the renormalization constant, and the enhanced
//! noise `(xi_eps, xi_eps o G xi_eps - c_eps)`.

use crate::field::SpectralField;
use crate::grid::TorusGrid;
use crate::mollifier::{mollify, Mollifier};
use crate::para::resonant;
use crate::rng::normal_pair;
use crate::stats::NeumaierSum;
use num_complex::Complex64;

/// Coefficient of one white-noise mode, as a pure function of
/// `(grid, seed, k)`. Each `{k, -k}` pair carries an independent complex
/// Gaussian with unit total variance (`E|xi_hat(k)|^2 = 1`), keyed by the
/// counter stream of the pair's canonical representative; the zero mode is
/// a real standard Gaussian and Nyquist modes are zero.
pub fn white_noise_mode(grid: TorusGrid, seed: u64, k: (i64, i64)) -> Complex64 {
    if !grid.is_resolved(k) {
        return Complex64::default();
    }
    if k == (0, 0) {
        let (a, _) = normal_pair(seed, grid.index_of(k) as u64);
        return Complex64::new(a, 0.0);
    }
    let canonical = grid.is_canonical(k);
    let rep = if canonical { k } else { (-k.0, -k.1) };
    let (a, b) = normal_pair(seed, grid.index_of(rep) as u64);
    let half = std::f64::consts::FRAC_1_SQRT_2;
    let value = Complex64::new(a * half, b * half);
    if canonical {
        value
    } else {
        value.conj()
    }
}

/// Draw spatial white noise on `grid`. Deterministic in `(grid, seed)` and
/// independent of evaluation order.
pub fn sample_white_noise(grid: TorusGrid, seed: u64) -> SpectralField {
    let coeffs: Vec<Complex64> = (0..grid.modes())
        .map(|idx| white_noise_mode(grid, seed, grid.wavenumber(idx)))
        .collect();
    SpectralField::from_coeffs(grid, coeffs, true).expect("matching grid")
}

/// The renormalization constant together with the bound on what the grid
/// truncation discards.
#[derive(Clone, Copy, Debug)]
pub struct RenormConstant {
    pub value: f64,
    /// Upper bound on the omitted tail `sum_{|k| > resolved}`.
    pub tail_bound: f64,
    /// True when `tail_bound < 1e-12 * value`; otherwise callers should
    /// treat the constant as under-resolved.
    pub tail_resolved: bool,
}

/// `c_eps = sum_k |rho_hat_eps(k)|^2 / (|k|^2 + 1)` over resolved modes,
/// the trace of `rho_eps * (-Delta + 1)^{-1} * rho_eps` on the grid.
pub fn renorm_constant(m: &Mollifier, grid: TorusGrid) -> RenormConstant {
    let mut sum = NeumaierSum::new();
    for (_, k) in grid.iter_modes() {
        if !grid.is_resolved(k) {
            continue;
        }
        let k_sq = (k.0 * k.0 + k.1 * k.1) as f64;
        let r = m.multiplier_sq(k_sq);
        sum.add(r * r / (k_sq + 1.0));
    }
    let value = sum.total();
    let radius = (grid.n() / 2 - 1) as f64;
    let tail_bound = match m.kind {
        crate::mollifier::MollifierKind::Gaussian => {
            if m.epsilon == 0.0 {
                f64::INFINITY
            } else {
                // sum_{|k| >= R} e^{-eps^2 |k|^2} / (1+|k|^2)
                //   <= pi/eps^2 * e^{-eps^2 (R-1)^2} / (1+R^2)
                let e2 = m.epsilon * m.epsilon;
                let r1 = (radius - 1.0).max(0.0);
                std::f64::consts::PI / e2 * (-e2 * r1 * r1).exp() / (1.0 + radius * radius)
            }
        }
        crate::mollifier::MollifierKind::SharpCutoff => {
            if m.epsilon > 0.0 && 1.0 / m.epsilon <= radius {
                0.0
            } else {
                f64::INFINITY
            }
        }
    };
    RenormConstant {
        value,
        tail_bound,
        tail_resolved: tail_bound < 1e-12 * value.max(f64::MIN_POSITIVE),
    }
}

/// Wick variance of the mass-`mass` free field smoothed by `m`:
/// `sum_k |rho_hat_eps(k)|^2 / (|k|^2 + mass)`.
pub fn gff_wick_constant(m: &Mollifier, grid: TorusGrid, mass: f64) -> f64 {
    let mut sum = NeumaierSum::new();
    for (_, k) in grid.iter_modes() {
        if !grid.is_resolved(k) {
            continue;
        }
        let k_sq = (k.0 * k.0 + k.1 * k.1) as f64;
        let r = m.multiplier_sq(k_sq);
        sum.add(r * r / (k_sq + mass));
    }
    sum.total()
}

/// A white-noise draw together with its mollification, renormalized
/// resonant square and counterterm.
#[derive(Clone, Debug)]
pub struct EnhancedNoise {
    pub xi: SpectralField,
    pub xi_eps: SpectralField,
    /// `xi_eps o (1-Delta)^{-1} xi_eps - c_eps`.
    pub xi2_eps: SpectralField,
    pub c_eps: f64,
    pub seed: u64,
    pub mollifier: Mollifier,
}

impl EnhancedNoise {
    pub fn grid(&self) -> TorusGrid {
        self.xi.grid()
    }

    pub fn epsilon(&self) -> f64 {
        self.mollifier.epsilon
    }

    /// The all-zero enhancement (no noise, no counterterm); the identity
    /// benchmark for paracontrolled maps.
    pub fn zero(grid: TorusGrid) -> Self {
        EnhancedNoise {
            xi: SpectralField::zeros(grid),
            xi_eps: SpectralField::zeros(grid),
            xi2_eps: SpectralField::zeros(grid),
            c_eps: 0.0,
            seed: 0,
            mollifier: Mollifier::gaussian(0.0),
        }
    }

    pub fn sample(grid: TorusGrid, m: &Mollifier, seed: u64) -> Self {
        build_enhanced(sample_white_noise(grid, seed), m)
    }
}

/// Assemble the enhanced noise from a white-noise draw.
pub fn build_enhanced(xi: SpectralField, m: &Mollifier) -> EnhancedNoise {
    let seed = 0; // seed is tracked by callers that sampled xi themselves
    let grid = xi.grid();
    let xi_eps = mollify(&xi, m);
    let green = xi_eps.greens(1.0);
    let mut xi2_eps = resonant(&green, &xi_eps).expect("same grid");
    let c = renorm_constant(m, grid);
    let shifted = xi2_eps.coeff((0, 0)) - Complex64::new(c.value, 0.0);
    xi2_eps.set_pair((0, 0), shifted);
    EnhancedNoise {
        xi,
        xi_eps,
        xi2_eps,
        c_eps: c.value,
        seed,
        mollifier: *m,
    }
}
