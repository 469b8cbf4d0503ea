//! Fourier mollifiers `rho_eps`.

use crate::field::SpectralField;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MollifierKind {
    /// `rho_hat_eps(k) = exp(-eps^2 |k|^2 / 2)`; the default.
    Gaussian,
    /// Sharp cutoff `1_{|k| <= 1/eps}`; for mollifier-independence studies.
    SharpCutoff,
}

/// A symmetric mollifier acting as the Fourier multiplier
/// `rho_hat_eps(k) in [0,1]` with `rho_hat_eps(0) = 1`, even in `k` and
/// nonincreasing in `|k|`. `eps = 0` is the identity.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Mollifier {
    pub epsilon: f64,
    pub kind: MollifierKind,
}

impl Mollifier {
    pub fn gaussian(epsilon: f64) -> Self {
        assert!(epsilon >= 0.0, "mollification scale must be nonnegative");
        Mollifier {
            epsilon,
            kind: MollifierKind::Gaussian,
        }
    }

    pub fn sharp(epsilon: f64) -> Self {
        assert!(epsilon >= 0.0, "mollification scale must be nonnegative");
        Mollifier {
            epsilon,
            kind: MollifierKind::SharpCutoff,
        }
    }

    pub fn new(kind: MollifierKind, epsilon: f64) -> Self {
        match kind {
            MollifierKind::Gaussian => Self::gaussian(epsilon),
            MollifierKind::SharpCutoff => Self::sharp(epsilon),
        }
    }

    /// Multiplier value at squared radius `|k|^2`.
    pub fn multiplier_sq(&self, k_sq: f64) -> f64 {
        if self.epsilon == 0.0 {
            return 1.0;
        }
        match self.kind {
            MollifierKind::Gaussian => (-0.5 * self.epsilon * self.epsilon * k_sq).exp(),
            MollifierKind::SharpCutoff => {
                if k_sq.sqrt() * self.epsilon <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn multiplier(&self, k: (i64, i64)) -> f64 {
        self.multiplier_sq((k.0 * k.0 + k.1 * k.1) as f64)
    }

    /// Scale with half the regularization, for refinement ladders.
    pub fn halved(&self) -> Mollifier {
        Mollifier {
            epsilon: self.epsilon / 2.0,
            kind: self.kind,
        }
    }
}

/// Pointwise Fourier multiplication by `rho_hat_eps`.
pub fn mollify(field: &SpectralField, m: &Mollifier) -> SpectralField {
    field.apply_multiplier(|k| m.multiplier(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TorusGrid;
    use crate::noise::sample_white_noise;

    #[test]
    fn multiplier_properties() {
        let m = Mollifier::gaussian(0.3);
        assert_eq!(m.multiplier((0, 0)), 1.0);
        assert_eq!(m.multiplier((3, -4)), m.multiplier((-3, 4)));
        let mut last = 1.0;
        for r in 1..40 {
            let v = m.multiplier_sq((r * r) as f64);
            assert!(v <= last && v >= 0.0);
            last = v;
        }
    }

    #[test]
    fn eps_zero_is_identity_and_constants_pass() {
        let grid = TorusGrid::new(16).unwrap();
        let f = sample_white_noise(grid, 5);
        let id = mollify(&f, &Mollifier::gaussian(0.0));
        assert!(f.max_coeff_distance(&id) == 0.0);
        let c = SpectralField::constant(grid, 4.2);
        let mc = mollify(&c, &Mollifier::gaussian(0.7));
        assert!(c.max_coeff_distance(&mc) == 0.0);
    }

    #[test]
    fn double_mollification_is_squared_multiplier() {
        let grid = TorusGrid::new(16).unwrap();
        let f = sample_white_noise(grid, 9);
        let m = Mollifier::gaussian(0.25);
        let twice = mollify(&mollify(&f, &m), &m);
        let squared = f.apply_multiplier(|k| {
            let v = m.multiplier(k);
            v * v
        });
        assert!(twice.max_coeff_distance(&squared) < 1e-15);
    }
}
