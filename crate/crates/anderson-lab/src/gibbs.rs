//! The quartic Gibbs reweighting of the Anderson free field: interaction
//! functional, independence sampler, and partition-function diagnostics.
//!
//! The canonical interaction is the Wick-ordered quartic of the smoothed,
//! rank-truncated field against the Anderson covariance profile
//! `sigma^2(x)`:
//!
//! ```text
//! V(phi) = 1/4 integral [ g^4 - 6 sigma^2 g^2 + 3 sigma^4 ] dx,
//! g = rho_eps * P_{<=N} phi,
//! ```
//!
//! whose gradient in eigen coordinates is exactly the Wick-cubic force of
//! the Galerkin flow; that identity is what makes the reweighted measure
//! invariant under the finite-dimensional Hamiltonian dynamics.

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::gaussian::{eigen_white_noise, wick_covariance_profile};
use crate::mollifier::{mollify, Mollifier};
use crate::noise::gff_wick_constant;
use crate::operator::SpectralData;
use crate::rng::{sample_seed, stream_rng, sub_seed};
use crate::stats::{compensated_sum, effective_sample_size, mean_and_se, NeumaierSum};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Which normalization of the measure the weight carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GibbsVariant {
    /// Quartic interaction only (the form the Liouville argument uses).
    QuarticOnly,
    /// Quartic minus `(K/2)` times the Wick square.
    QuarticPlusK,
}

/// Reference covariance for the Wick ordering.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WickReference {
    /// Position-dependent profile of the truncated Anderson field.
    AgffProfile,
    /// Flat free-field constant at the same mass.
    GffConstant,
}

/// `-V(phi)` on the natural log scale plus the raw interaction value.
#[derive(Clone, Copy, Debug)]
pub struct GibbsWeight {
    pub log_weight: f64,
    pub interaction_v: f64,
    pub variant: GibbsVariant,
}

/// Precomputed interaction functional for one `(operator, mollifier, rank)`
/// configuration.
#[derive(Clone, Debug)]
pub struct Interaction {
    pub rank: usize,
    pub mollifier: Mollifier,
    pub variant: GibbsVariant,
    pub reference: WickReference,
    pub enabled: bool,
    /// Wick covariance `sigma^2(x)` as a field (constant for the flat
    /// reference).
    pub profile: SpectralField,
    profile_pad: Vec<f64>,
    /// `integral sigma^4 dx`, the ground value scale: `V(0) = 3/4` of it.
    pub profile_sq_integral: f64,
    shift_k: f64,
}

impl Interaction {
    pub fn new(
        s: &SpectralData,
        m: &Mollifier,
        rank: usize,
        variant: GibbsVariant,
        reference: WickReference,
    ) -> Self {
        let grid = s.basis.grid();
        let rank = rank.min(s.len());
        let profile = match reference {
            WickReference::AgffProfile => wick_covariance_profile(s, m, rank),
            WickReference::GffConstant => {
                SpectralField::constant(grid, gff_wick_constant(m, grid, s.shift_k + s.mass))
            }
        };
        let pad = grid.padded();
        let profile_pad = profile.to_physical_padded(pad);
        let sq = profile_pad.iter().map(|v| v * v).collect::<Vec<_>>();
        let profile_sq_integral = compensated_sum(&sq) / pad.modes() as f64;
        Interaction {
            rank,
            mollifier: *m,
            variant,
            reference,
            enabled: true,
            profile,
            profile_pad,
            profile_sq_integral,
            shift_k: s.shift_k,
        }
    }

    /// The interaction that is identically zero (free reference measure).
    pub fn disabled(s: &SpectralData, m: &Mollifier, rank: usize) -> Self {
        let mut out = Self::new(
            s,
            m,
            rank,
            GibbsVariant::QuarticOnly,
            WickReference::AgffProfile,
        );
        out.enabled = false;
        out
    }

    /// Hard lower bound `-(3/2) integral sigma^4` from the minimum of the
    /// fourth Hermite polynomial.
    pub fn lower_bound(&self) -> f64 {
        if self.enabled {
            -1.5 * self.profile_sq_integral
        } else {
            0.0
        }
    }

    /// Smoothed truncated field `g = rho_eps * P_{<=N} phi` on the padded
    /// physical grid.
    fn smoothed_pad(&self, s: &SpectralData, coeffs: &[f64]) -> Vec<f64> {
        let mut truncated = coeffs.to_vec();
        truncated.truncate(self.rank);
        let field = s.eigen_to_field(&truncated);
        mollify(&field, &self.mollifier).to_physical_padded(s.basis.grid().padded())
    }

    /// `V(phi)` from eigenbasis coordinates.
    pub fn evaluate_eigen(&self, s: &SpectralData, coeffs: &[f64]) -> GibbsWeight {
        if !self.enabled {
            return GibbsWeight {
                log_weight: 0.0,
                interaction_v: 0.0,
                variant: self.variant,
            };
        }
        let pad_modes = s.basis.grid().padded().modes() as f64;
        let g = self.smoothed_pad(s, coeffs);
        let mut quartic = NeumaierSum::new();
        let mut square = NeumaierSum::new();
        for (v, sigma2) in g.iter().zip(self.profile_pad.iter()) {
            let v2 = v * v;
            quartic.add(0.25 * v2 * v2 - 1.5 * sigma2 * v2 + 0.75 * sigma2 * sigma2);
            square.add(v2 - sigma2);
        }
        let mut v_total = quartic.total() / pad_modes;
        if self.variant == GibbsVariant::QuarticPlusK {
            v_total -= 0.5 * self.shift_k * (square.total() / pad_modes);
        }
        debug_assert!(
            self.variant != GibbsVariant::QuarticOnly
                || v_total >= self.lower_bound() - 1e-9 * (1.0 + self.profile_sq_integral),
            "quartic interaction broke its Hermite floor"
        );
        GibbsWeight {
            log_weight: -v_total,
            interaction_v: v_total,
            variant: self.variant,
        }
    }

    /// `V(phi)` for a field on the operator basis.
    pub fn evaluate_field(&self, s: &SpectralData, field: &SpectralField) -> GibbsWeight {
        self.evaluate_eigen(s, &s.field_to_eigen(field))
    }

    /// Wick square observable `integral [g^2 - sigma^2] dx`; the quadratic
    /// difference between the two variants is `K/2` times this.
    pub fn wick_square_integral(&self, s: &SpectralData, coeffs: &[f64]) -> f64 {
        let pad_modes = s.basis.grid().padded().modes() as f64;
        let g = self.smoothed_pad(s, coeffs);
        let mut square = NeumaierSum::new();
        for (v, sigma2) in g.iter().zip(self.profile_pad.iter()) {
            square.add(v * v - sigma2);
        }
        square.total() / pad_modes
    }

    /// Eigen-space gradient of the pure-cubic part `1/4 integral g^4`:
    /// component `n` is `< rho_eps * g^3, f_n >` below the rank, zero
    /// above. The splitting integrator rotates with the quadratic part and
    /// kicks with this.
    pub fn cubic_gradient_eigen(&self, s: &SpectralData, coeffs: &[f64]) -> Vec<f64> {
        let len = coeffs.len();
        if !self.enabled {
            return vec![0.0; len];
        }
        let grid = s.basis.grid();
        let pad = grid.padded();
        let g = self.smoothed_pad(s, coeffs);
        let cubic: Vec<f64> = g.iter().map(|v| v * v * v).collect();
        let field = SpectralField::from_physical_truncated(grid, pad, &cubic);
        let smoothed = mollify(&field, &self.mollifier);
        let mut out = s.field_to_eigen(&smoothed);
        out.resize(len, 0.0);
        for c in out.iter_mut().skip(self.rank) {
            *c = 0.0;
        }
        out
    }

    /// The linear Wick operator on the rank block:
    /// `W[n,m] = integral sigma^2 (rho*f_n)(rho*f_m) dx`. The quadratic
    /// part of the flow Hamiltonian is `diag(lambda+K+1) - 3W`.
    pub fn wick_linear_block(&self, s: &SpectralData) -> nalgebra::DMatrix<f64> {
        let rank = self.rank;
        let grid = s.basis.grid();
        let pad = grid.padded();
        let pad_modes = pad.modes() as f64;
        if !self.enabled {
            return nalgebra::DMatrix::zeros(rank, rank);
        }
        let smoothed: Vec<Vec<f64>> = (0..rank)
            .map(|n| mollify(&s.eigenfunction(n), &self.mollifier).to_physical_padded(pad))
            .collect();
        let mut w = nalgebra::DMatrix::zeros(rank, rank);
        for n in 0..rank {
            for m in n..rank {
                let mut acc = NeumaierSum::new();
                for ((a, b), sigma2) in smoothed[n]
                    .iter()
                    .zip(smoothed[m].iter())
                    .zip(self.profile_pad.iter())
                {
                    acc.add(sigma2 * a * b);
                }
                let v = acc.total() / pad_modes;
                w[(n, m)] = v;
                w[(m, n)] = v;
            }
        }
        w
    }

    /// Gradient of the *quartic* interaction in eigen coordinates:
    /// component `n` is `< rho_eps * [g^3 - 3 sigma^2 g], f_n >` for
    /// `n < rank` and zero above. (The Galerkin force is minus this.)
    pub fn gradient_eigen(&self, s: &SpectralData, coeffs: &[f64]) -> Vec<f64> {
        let len = coeffs.len();
        if !self.enabled {
            return vec![0.0; len];
        }
        let grid = s.basis.grid();
        let pad = grid.padded();
        let g = self.smoothed_pad(s, coeffs);
        let cubic: Vec<f64> = g
            .iter()
            .zip(self.profile_pad.iter())
            .map(|(v, sigma2)| v * v * v - 3.0 * sigma2 * v)
            .collect();
        let field = SpectralField::from_physical_truncated(grid, pad, &cubic);
        let smoothed = mollify(&field, &self.mollifier);
        let mut out = s.field_to_eigen(&smoothed);
        out.resize(len, 0.0);
        for c in out.iter_mut().skip(self.rank) {
            *c = 0.0;
        }
        out
    }
}

/// How `sample_gibbs` turns reference draws into a reweighted ensemble.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SamplerMode {
    /// Independence Metropolis-Hastings with the free field as proposal.
    /// Mixes well while the interaction fluctuates by order one; at strong
    /// coupling the density ratio spans many units and the chain sticks.
    IndependenceMh { burn_in: usize, thin: usize },
    /// Plain importance weights attached to independent draws.
    ImportanceWeights,
    /// Preconditioned Crank-Nicolson: local moves `phi' = sqrt(1-b^2) phi
    /// + b zeta` against the same free-field reference, exact acceptance
    /// `exp(V - V')`. The step size adapts toward the target acceptance
    /// during burn-in only, then freezes, so the kept chain is unbiased.
    Pcn {
        burn_in: usize,
        thin: usize,
        initial_step: f64,
        target_acceptance: f64,
    },
}

#[derive(Clone, Debug)]
pub struct GibbsSample {
    /// Eigenbasis coordinates of the field.
    pub coeffs: Vec<f64>,
    pub weight: GibbsWeight,
    /// Normalized importance weight (mean one); 1 for MH samples.
    pub importance: f64,
    /// Whether the chain moved while producing this sample.
    pub moved: bool,
}

#[derive(Clone, Debug)]
pub struct GibbsEnsemble {
    pub samples: Vec<GibbsSample>,
    pub effective_sample_size: f64,
    pub acceptance_rate: f64,
    pub seed_base: u64,
    pub variant: GibbsVariant,
}

impl GibbsEnsemble {
    pub fn field(&self, s: &SpectralData, i: usize) -> SpectralField {
        s.eigen_to_field(&self.samples[i].coeffs)
    }
}

/// Sample the Gibbs ensemble. The proposal is the Anderson free field
/// drawn in its own eigenbasis, so the density ratio is `exp(V_cur -
/// V_prop)` and mixing is governed purely by the interaction strength.
pub fn sample_gibbs(
    s: &SpectralData,
    interaction: &Interaction,
    n_samples: usize,
    seed_base: u64,
    mode: SamplerMode,
) -> Result<GibbsEnsemble> {
    match mode {
        SamplerMode::IndependenceMh { burn_in, thin } => {
            let thin = thin.max(1);
            let total = burn_in + thin * n_samples;
            let accept_seed = sub_seed(seed_base, 0xACCE);
            let mut accepted = 0usize;

            let draw = |i: usize| -> Vec<f64> {
                let g = eigen_white_noise(s.len(), sample_seed(seed_base, i));
                g.iter()
                    .enumerate()
                    .map(|(n, gn)| gn / s.shifted_eigenvalue(n).sqrt())
                    .collect()
            };

            let mut current = draw(0);
            let mut current_v = interaction.evaluate_eigen(s, &current).interaction_v;
            let mut samples = Vec::with_capacity(n_samples);
            let mut moved_since_kept = false;
            for i in 1..=total {
                let proposal = draw(i);
                let prop_v = interaction.evaluate_eigen(s, &proposal).interaction_v;
                let log_ratio = current_v - prop_v;
                let u: f64 = stream_rng(accept_seed, i as u64).random();
                if log_ratio >= 0.0 || u < log_ratio.exp() {
                    current = proposal;
                    current_v = prop_v;
                    accepted += 1;
                    moved_since_kept = true;
                }
                if i > burn_in && (i - burn_in) % thin == 0 {
                    samples.push(GibbsSample {
                        coeffs: current.clone(),
                        weight: GibbsWeight {
                            log_weight: -current_v,
                            interaction_v: current_v,
                            variant: interaction.variant,
                        },
                        importance: 1.0,
                        moved: moved_since_kept,
                    });
                    moved_since_kept = false;
                    if samples.len() == n_samples {
                        break;
                    }
                }
            }
            let acceptance_rate = accepted as f64 / total as f64;
            // chance that a kept sample repeats its predecessor verbatim
            let stale = (1.0 - acceptance_rate).powi(thin as i32);
            let ess = n_samples as f64 * (1.0 - stale);
            if interaction.enabled && ess < 0.05 * n_samples as f64 {
                return Err(Error::DegenerateWeights { ess, n_samples });
            }
            Ok(GibbsEnsemble {
                samples,
                effective_sample_size: ess,
                acceptance_rate,
                seed_base,
                variant: interaction.variant,
            })
        }
        SamplerMode::Pcn {
            burn_in,
            thin,
            initial_step,
            target_acceptance,
        } => {
            let thin = thin.max(1);
            let total = burn_in + thin * n_samples;
            let accept_seed = sub_seed(seed_base, 0xACCE);
            let fresh = |i: usize| -> Vec<f64> {
                let g = eigen_white_noise(s.len(), sample_seed(seed_base, i));
                g.iter()
                    .enumerate()
                    .map(|(n, gn)| gn / s.shifted_eigenvalue(n).sqrt())
                    .collect()
            };
            let mut beta = initial_step.clamp(1e-4, 1.0);
            let mut current = fresh(0);
            let mut current_v = interaction.evaluate_eigen(s, &current).interaction_v;
            let mut samples = Vec::with_capacity(n_samples);
            let mut accepted = 0usize;
            let mut window_accepted = 0usize;
            let mut moved_since_kept = false;
            for i in 1..=total {
                let zeta = fresh(i);
                let contraction = (1.0 - beta * beta).sqrt();
                let proposal: Vec<f64> = current
                    .iter()
                    .zip(zeta.iter())
                    .map(|(c, z)| contraction * c + beta * z)
                    .collect();
                let prop_v = interaction.evaluate_eigen(s, &proposal).interaction_v;
                let log_ratio = current_v - prop_v;
                let u: f64 = stream_rng(accept_seed, i as u64).random();
                if log_ratio >= 0.0 || u < log_ratio.exp() {
                    current = proposal;
                    current_v = prop_v;
                    accepted += 1;
                    window_accepted += 1;
                    moved_since_kept = true;
                }
                // step-size adaptation, burn-in only
                if i <= burn_in && i % 50 == 0 {
                    let rate = window_accepted as f64 / 50.0;
                    if rate > target_acceptance * 1.3 {
                        beta = (beta * 1.25).min(1.0);
                    } else if rate < target_acceptance * 0.7 {
                        beta = (beta / 1.25).max(1e-4);
                    }
                    window_accepted = 0;
                }
                if i > burn_in && (i - burn_in) % thin == 0 {
                    samples.push(GibbsSample {
                        coeffs: current.clone(),
                        weight: GibbsWeight {
                            log_weight: -current_v,
                            interaction_v: current_v,
                            variant: interaction.variant,
                        },
                        importance: 1.0,
                        moved: moved_since_kept,
                    });
                    moved_since_kept = false;
                    if samples.len() == n_samples {
                        break;
                    }
                }
            }
            let acceptance_rate = accepted as f64 / total as f64;
            let stale = (1.0 - acceptance_rate).powi(thin as i32);
            let ess = n_samples as f64 * (1.0 - stale);
            if interaction.enabled && ess < 0.05 * n_samples as f64 {
                return Err(Error::DegenerateWeights { ess, n_samples });
            }
            Ok(GibbsEnsemble {
                samples,
                effective_sample_size: ess,
                acceptance_rate,
                seed_base,
                variant: interaction.variant,
            })
        }
        SamplerMode::ImportanceWeights => {
            let raw: Vec<(Vec<f64>, f64)> = crate::par::map_indexed(n_samples, |i| {
                let g = eigen_white_noise(s.len(), sample_seed(seed_base, i));
                let coeffs: Vec<f64> = g
                    .iter()
                    .enumerate()
                    .map(|(n, gn)| gn / s.shifted_eigenvalue(n).sqrt())
                    .collect();
                let v = interaction.evaluate_eigen(s, &coeffs).interaction_v;
                (coeffs, v)
            });
            let v_min = raw.iter().map(|(_, v)| *v).fold(f64::INFINITY, f64::min);
            let unnormalized: Vec<f64> = raw.iter().map(|(_, v)| (v_min - v).exp()).collect();
            let ess = effective_sample_size(&unnormalized);
            if ess < 0.05 * n_samples as f64 {
                return Err(Error::DegenerateWeights { ess, n_samples });
            }
            let mean_w = compensated_sum(&unnormalized) / n_samples as f64;
            let samples = raw
                .into_iter()
                .zip(unnormalized.iter())
                .map(|((coeffs, v), &w)| GibbsSample {
                    coeffs,
                    weight: GibbsWeight {
                        log_weight: -v,
                        interaction_v: v,
                        variant: interaction.variant,
                    },
                    importance: w / mean_w,
                    moved: true,
                })
                .collect();
            Ok(GibbsEnsemble {
                samples,
                effective_sample_size: ess,
                acceptance_rate: 1.0,
                seed_base,
                variant: interaction.variant,
            })
        }
    }
}

/// Plain Monte Carlo estimate of `Z = E_mu[exp(-V)]` over free-field draws,
/// with its standard error. Finiteness of `Z` is the testable content of
/// the exponential-integrability theorem.
pub fn partition_estimate(
    s: &SpectralData,
    interaction: &Interaction,
    n_samples: usize,
    seed_base: u64,
) -> (f64, f64) {
    let weights = crate::par::map_indexed(n_samples, |i| {
        let g = eigen_white_noise(s.len(), sample_seed(seed_base, i));
        let coeffs: Vec<f64> = g
            .iter()
            .enumerate()
            .map(|(n, gn)| gn / s.shifted_eigenvalue(n).sqrt())
            .collect();
        (-interaction.evaluate_eigen(s, &coeffs).interaction_v).exp()
    });
    mean_and_se(&weights)
}
