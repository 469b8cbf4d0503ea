//! Gaussian free fields, the Anderson free field, their coupling through a
//! shared white noise, and Wick / pseudo-Wick powers.

use crate::field::SpectralField;
use crate::grid::TorusGrid;
use crate::mollifier::{mollify, Mollifier};
use crate::noise::gff_wick_constant;
use crate::operator::SpectralData;
use crate::rng::stream_rng;
use crate::stats::NeumaierSum;
use rand_distr::{Distribution, StandardNormal};

/// Probabilists' Hermite polynomial `H_n` via the three-term recurrence
/// `H_{n+1} = x H_n - n H_{n-1}`, `H_0 = 1`, `H_1 = x`.
pub fn hermite(n: usize, x: f64) -> f64 {
    match n {
        0 => 1.0,
        1 => x,
        _ => {
            let mut prev = 1.0;
            let mut cur = x;
            for m in 1..n {
                let next = x * cur - m as f64 * prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// Draw the Gaussian free field with covariance `(-Delta + mass)^{-1}`:
/// mode `k` carries `white_noise(k) / sqrt(|k|^2 + mass)`.
pub fn sample_gff(grid: TorusGrid, mass: f64, seed: u64) -> SpectralField {
    assert!(mass > 0.0, "effective mass must be positive");
    crate::noise::sample_white_noise(grid, seed)
        .apply_multiplier(|k| 1.0 / (((k.0 * k.0 + k.1 * k.1) as f64) + mass).sqrt())
}

/// Standard-normal coordinates in the eigenbasis, stream-keyed per index.
pub fn eigen_white_noise(len: usize, seed: u64) -> Vec<f64> {
    (0..len)
        .map(|n| {
            let mut rng = stream_rng(seed, n as u64);
            StandardNormal.sample(&mut rng)
        })
        .collect()
}

/// Draw the Anderson free field `sum_n g_n / sqrt(lambda_n + K + 1) f_n`.
pub fn sample_agff(s: &SpectralData, seed: u64) -> SpectralField {
    let g = eigen_white_noise(s.len(), seed);
    let coeffs: Vec<f64> = g
        .iter()
        .enumerate()
        .map(|(n, gn)| gn / s.shifted_eigenvalue(n).sqrt())
        .collect();
    s.eigen_to_field(&coeffs)
}

/// One white-noise draw pushed through both inverse square roots: the
/// coupled pair of the spectral construction.
#[derive(Clone, Debug)]
pub struct CoupledPair {
    /// White-noise coordinates in the eigenbasis.
    pub psi: Vec<f64>,
    /// `(-Delta + K + 1)^{-1/2} psi`.
    pub phi_g: SpectralField,
    /// `(H^{omega,K})^{-1/2} psi`.
    pub phi_a: SpectralField,
    /// The shift `h = phi_a - phi_g`.
    pub h: SpectralField,
    pub seed: u64,
    /// Total mass `K + 1` of the comparison free field.
    pub gff_mass: f64,
}

/// Sample the coupling: a single `psi` drawn in the eigenbasis feeds the
/// Anderson side through functional calculus and the flat side through the
/// Fourier multiplier `(|k|^2 + K + 1)^{-1/2}`.
pub fn coupled_sample(s: &SpectralData, seed: u64) -> CoupledPair {
    let psi = eigen_white_noise(s.len(), seed);
    let a_coeffs: Vec<f64> = psi
        .iter()
        .enumerate()
        .map(|(n, g)| g / s.shifted_eigenvalue(n).sqrt())
        .collect();
    let phi_a = s.eigen_to_field(&a_coeffs);
    let psi_field = s.eigen_to_field(&psi);
    let mass = s.shift_k + s.mass;
    let phi_g =
        psi_field.apply_multiplier(|k| 1.0 / (((k.0 * k.0 + k.1 * k.1) as f64) + mass).sqrt());
    let h = &phi_a - &phi_g;
    CoupledPair {
        psi,
        phi_g,
        phi_a,
        h,
        seed,
        gff_mass: mass,
    }
}

/// How a Wick power was renormalized.
#[derive(Clone, Debug)]
pub enum WickConstant {
    /// Flat constant `c_eps` (free-field reference).
    Scalar(f64),
    /// Position-dependent covariance profile (Anderson reference).
    Profile(SpectralField),
}

/// A renormalized power `:phi_eps^M:`.
#[derive(Clone, Debug)]
pub struct WickField {
    pub base: SpectralField,
    pub order: usize,
    pub epsilon: f64,
    pub constant: WickConstant,
    pub value: SpectralField,
}

fn hermite_field(smoothed: &SpectralField, order: usize, variance: f64) -> SpectralField {
    let grid = smoothed.grid();
    let c = variance.max(f64::MIN_POSITIVE);
    let sqrt_c = c.sqrt();
    let scale = c.powf(order as f64 / 2.0);
    let values: Vec<f64> = smoothed
        .to_physical()
        .iter()
        .map(|&v| scale * hermite(order, v / sqrt_c))
        .collect();
    SpectralField::from_physical(grid, &values).expect("grid sized")
}

/// Wick power of a free-field draw:
/// `:phi_eps^M: = c_eps^{M/2} H_M(phi_eps / sqrt(c_eps))` with
/// `c_eps = sum_k |rho_hat(k)|^2 / (|k|^2 + mass)`.
pub fn wick_power_gff(field: &SpectralField, order: usize, m: &Mollifier, mass: f64) -> WickField {
    let smoothed = mollify(field, m);
    let c = gff_wick_constant(m, field.grid(), mass);
    WickField {
        base: field.clone(),
        order,
        epsilon: m.epsilon,
        constant: WickConstant::Scalar(c),
        value: hermite_field(&smoothed, order, c),
    }
}

/// Pseudo-Wick power of the Anderson field: both equivalent evaluations.
#[derive(Clone, Debug)]
pub struct PseudoWick {
    /// `c_eps^{M/2} H_M(phi^A_eps / sqrt(c_eps))` directly.
    pub direct: WickField,
    /// The binomial route `sum_k C(M,k) :(phi^G_eps)^k: h_eps^{M-k}`.
    pub binomial: SpectralField,
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut out = 1.0f64;
    for i in 0..k {
        out = out * (n - i) as f64 / (i + 1) as f64;
    }
    out
}

/// Pseudo-Wick power `(phi^A_eps)^{oM}`: the Anderson field renormalized
/// with the *free-field* constant of mass `K + 1`. Exposes the direct
/// Hermite evaluation and the binomial re-expansion through the coupling
/// shift; the two agree pointwise by the Hermite addition identity.
pub fn pseudo_wick_agff(pair: &CoupledPair, order: usize, m: &Mollifier) -> PseudoWick {
    let grid = pair.phi_a.grid();
    let c = gff_wick_constant(m, grid, pair.gff_mass);
    let smoothed_a = mollify(&pair.phi_a, m);
    let direct_value = hermite_field(&smoothed_a, order, c);

    let g_eps = mollify(&pair.phi_g, m).to_physical();
    let h_eps = mollify(&pair.h, m).to_physical();
    let sqrt_c = c.max(f64::MIN_POSITIVE).sqrt();
    let mut values = vec![0.0f64; grid.modes()];
    for k in 0..=order {
        let ck = c.powf(k as f64 / 2.0);
        let b = binomial(order, k);
        for (dst, (g, h)) in values.iter_mut().zip(g_eps.iter().zip(h_eps.iter())) {
            *dst += b * ck * hermite(k, g / sqrt_c) * h.powi((order - k) as i32);
        }
    }
    let binomial_value = SpectralField::from_physical(grid, &values).expect("grid sized");

    PseudoWick {
        direct: WickField {
            base: pair.phi_a.clone(),
            order,
            epsilon: m.epsilon,
            constant: WickConstant::Scalar(c),
            value: direct_value,
        },
        binomial: binomial_value,
    }
}

/// Covariance profile of the smoothed, rank-truncated Anderson field:
/// `sigma^2_N(x) = sum_{n < rank} (rho_eps * f_n)(x)^2 / (lambda_n + K + 1)`.
/// This is the Wick reference of the Gibbs interaction; the dynamics
/// counterterm is three times this profile.
pub fn wick_covariance_profile(s: &SpectralData, m: &Mollifier, rank: usize) -> SpectralField {
    let grid = s.basis.grid();
    let pad = grid.padded();
    let mut acc = vec![0.0f64; pad.modes()];
    for n in 0..rank.min(s.len()) {
        let f = mollify(&s.eigenfunction(n), m);
        let phys = f.to_physical_padded(pad);
        let w = 1.0 / s.shifted_eigenvalue(n);
        for (dst, v) in acc.iter_mut().zip(phys.iter()) {
            *dst += w * v * v;
        }
    }
    SpectralField::from_physical_truncated(grid, pad, &acc)
}

/// Monte Carlo vs exact pointwise second-moment profile of the smoothed
/// Anderson field, both minus the flat constant `c_eps`.
#[derive(Clone, Debug)]
pub struct ComparisonProfile {
    /// `E[(phi^A_eps)^2](x) - c_eps` estimated over `samples` draws.
    pub monte_carlo: Vec<f64>,
    /// Pointwise standard error of the Monte Carlo estimate.
    pub std_error: Vec<f64>,
    /// `sum_n (rho_eps * f_n)(x)^2 / (lambda_n + K + 1) - c_eps`.
    pub exact: Vec<f64>,
    pub samples: usize,
}

/// The difference of the two renormalization conventions as a function of
/// `x`: Anderson second moments against the free-field constant.
pub fn wick_comparison_profile(
    s: &SpectralData,
    m: &Mollifier,
    samples: usize,
    seed: u64,
) -> ComparisonProfile {
    assert!(samples >= 2, "need at least two samples");
    let grid = s.basis.grid();
    let c = gff_wick_constant(m, grid, s.shift_k + s.mass);
    let fields = crate::par::map_indexed(samples, |i| {
        let draw = sample_agff(s, crate::rng::sample_seed(seed, i));
        mollify(&draw, m).to_physical()
    });
    let points = grid.modes();
    let mut mean = vec![0.0f64; points];
    let mut se = vec![0.0f64; points];
    for p in 0..points {
        let mut acc = NeumaierSum::new();
        for f in &fields {
            acc.add(f[p] * f[p]);
        }
        let mu = acc.total() / samples as f64;
        let mut var = NeumaierSum::new();
        for f in &fields {
            let d = f[p] * f[p] - mu;
            var.add(d * d);
        }
        mean[p] = mu - c;
        se[p] = (var.total() / ((samples - 1) as f64 * samples as f64)).sqrt();
    }
    let exact_field = wick_covariance_profile(s, m, s.len());
    let exact: Vec<f64> = exact_field.to_physical().iter().map(|v| v - c).collect();
    ComparisonProfile {
        monte_carlo: mean,
        std_error: se,
        exact,
        samples,
    }
}

/// Dyadic energy profile of the coupling shift:
/// `(j, 2^{2 alpha j} |Delta_j h|_{L^2}^2)`.
pub fn shift_regularity_profile(h: &SpectralField, alpha: f64) -> Vec<(i32, f64)> {
    let top = crate::dyadic::max_block(h.grid());
    (-1..=top)
        .map(|j| {
            let e = crate::dyadic::lp_block(h, j).l2_norm();
            let w = (2.0f64).powf(2.0 * alpha * j as f64);
            (j, w * e * e)
        })
        .collect()
}

/// OLS slope of `log2(term)` against `j` over the blocks `j >= 1`;
/// negative slopes mean summable tails (membership evidence for
/// `H^alpha`). NaN when fewer than three dyadic points carry energy.
pub fn profile_tail_slope(profile: &[(i32, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = profile
        .iter()
        .filter(|&&(j, v)| j >= 1 && v > 0.0)
        .map(|&(j, v)| (j as f64, v.log2()))
        .collect();
    if pts.len() < 3 {
        return f64::NAN;
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    crate::stats::ols(&xs, &ys).1
}

/// Gauss-Hermite nodes/weights for the standard normal weight, by Newton
/// iteration on the physicists' polynomial; the oracle behind Hermite
/// orthogonality tests.
pub fn gauss_hermite_standard(n: usize) -> Vec<(f64, f64)> {
    let mut nodes = Vec::with_capacity(n);
    let m = (n + 1) / 2;
    let mut x = 0.0f64;
    for i in 0..m {
        // Stroud-Secrest initial guesses
        x = match i {
            0 => ((2 * n + 1) as f64).sqrt() - 1.85575 * ((2 * n + 1) as f64).powf(-1.0 / 6.0),
            1 => x - 1.14 * (n as f64).powf(0.426) / x,
            2 => 1.86 * x - 0.86 * nodes[0],
            3 => 1.91 * x - 0.91 * nodes[1],
            _ => 2.0 * x - nodes[i - 2],
        };
        for _ in 0..100 {
            let mut p0 = std::f64::consts::PI.powf(-0.25);
            let mut p1 = x * std::f64::consts::SQRT_2 * p0;
            for j in 2..=n {
                let p2 =
                    x * (2.0 / j as f64).sqrt() * p1 - (((j - 1) as f64) / j as f64).sqrt() * p0;
                p0 = p1;
                p1 = p2;
            }
            let dp = (2.0 * n as f64).sqrt() * p0;
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes.push(x);
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..m {
        let x = nodes[i];
        let mut p0 = std::f64::consts::PI.powf(-0.25);
        let mut p1 = x * std::f64::consts::SQRT_2 * p0;
        for j in 2..=n {
            let p2 = x * (2.0 / j as f64).sqrt() * p1 - (((j - 1) as f64) / j as f64).sqrt() * p0;
            p0 = p1;
            p1 = p2;
        }
        let w = 1.0 / ((2.0 * n as f64) * p0 * p0);
        out.push((x, w));
        if x != 0.0 {
            out.push((-x, w));
        }
    }
    // switch from physicists' weight e^{-x^2} to the standard normal
    let total: f64 = out.iter().map(|&(_, w)| w).sum();
    out.iter()
        .map(|&(x, w)| (x * std::f64::consts::SQRT_2, w / total))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::EnhancedNoise;
    use crate::operator::{assemble, diagonalize};
    use crate::stats::mean_and_se;

    #[test]
    fn hermite_small_values() {
        assert_eq!(hermite(2, 2.0), 3.0); // x^2 - 1 at 2
        assert_eq!(hermite(3, 0.0), 0.0);
        assert_eq!(hermite(4, 0.0), 3.0);
        // H5(x) = x^5 - 10x^3 + 15x
        let x = 1.3f64;
        let expect = x.powi(5) - 10.0 * x.powi(3) + 15.0 * x;
        assert!((hermite(5, x) - expect).abs() < 1e-12);
    }

    #[test]
    fn hermite_orthogonality_by_quadrature() {
        let quad = gauss_hermite_standard(24);
        let factorial = |n: usize| (1..=n).map(|i| i as f64).product::<f64>();
        for m in 0..=4usize {
            for n in 0..=4usize {
                let integral: f64 = quad
                    .iter()
                    .map(|&(x, w)| w * hermite(m, x) * hermite(n, x))
                    .sum();
                let expect = if m == n { factorial(n) } else { 0.0 };
                assert!(
                    (integral - expect).abs() < 1e-9 * (1.0 + expect),
                    "m={m} n={n}: {integral} vs {expect}"
                );
            }
        }
    }

    #[test]
    fn gff_mode_variance() {
        let grid = TorusGrid::new(16).unwrap();
        let mass = 2.0;
        let n_draws = 20_000;
        for k in [(1i64, 0i64), (2, 2)] {
            let samples: Vec<f64> = (0..n_draws)
                .map(|s| sample_gff(grid, mass, s as u64).coeff(k).norm_sqr())
                .collect();
            let (mean, se) = mean_and_se(&samples);
            let expect = 1.0 / ((k.0 * k.0 + k.1 * k.1) as f64 + mass);
            assert!(
                (mean - expect).abs() < 3.0 * se,
                "k={k:?}: {mean} vs {expect} (se {se})"
            );
        }
    }

    #[test]
    fn gff_determinism() {
        let grid = TorusGrid::new(16).unwrap();
        let a = sample_gff(grid, 1.0, 9);
        let b = sample_gff(grid, 1.0, 9);
        assert_eq!(a.coeffs(), b.coeffs());
    }

    fn small_spectral_data(seed: u64) -> SpectralData {
        let grid = TorusGrid::new(32).unwrap();
        let m = Mollifier::gaussian(0.3);
        let noise = EnhancedNoise::sample(grid, &m, seed);
        diagonalize(&assemble(&noise, 4).unwrap()).unwrap()
    }

    #[test]
    fn agff_eigen_variance_and_determinism() {
        let s = small_spectral_data(5);
        let n_draws = 8_000;
        for n in [0usize, 3, 10] {
            let samples: Vec<f64> = (0..n_draws)
                .map(|d| {
                    let f = sample_agff(&s, d as u64);
                    let c = s.field_to_eigen(&f);
                    c[n] * c[n]
                })
                .collect();
            let (mean, se) = mean_and_se(&samples);
            let expect = 1.0 / s.shifted_eigenvalue(n);
            assert!((mean - expect).abs() < 3.0 * se, "n={n}: {mean} vs {expect}");
        }
        let a = sample_agff(&s, 4);
        let b = sample_agff(&s, 4);
        assert_eq!(a.coeffs(), b.coeffs());
    }

    #[test]
    fn coupled_pair_identity_and_zero_noise() {
        let s = small_spectral_data(6);
        let pair = coupled_sample(&s, 11);
        let sum = &pair.phi_g + &pair.h;
        assert!(sum.max_coeff_distance(&pair.phi_a) < 1e-12);

        // zero noise: both routes coincide, h = 0
        let grid = TorusGrid::new(32).unwrap();
        let z = EnhancedNoise::zero(grid);
        let s0 = diagonalize(&assemble(&z, 4).unwrap()).unwrap();
        let pair0 = coupled_sample(&s0, 3);
        assert!(pair0.h.l2_norm() < 1e-10);
    }

    #[test]
    fn wick_power_order_one_is_smoothed_field() {
        let grid = TorusGrid::new(32).unwrap();
        let m = Mollifier::gaussian(0.2);
        let phi = sample_gff(grid, 1.0, 17);
        let w = wick_power_gff(&phi, 1, &m, 1.0);
        let expect = mollify(&phi, &m);
        assert!(w.value.max_coeff_distance(&expect) < 1e-10);
    }

    #[test]
    fn wick_cube_polynomial_identity() {
        // c^{3/2} H_3(phi/sqrt c) = phi^3 - 3 c phi pointwise
        let grid = TorusGrid::new(32).unwrap();
        let m = Mollifier::gaussian(0.25);
        let phi = sample_gff(grid, 1.0, 31);
        let w = wick_power_gff(&phi, 3, &m, 1.0);
        let c = match w.constant {
            WickConstant::Scalar(c) => c,
            _ => unreachable!(),
        };
        let smoothed = mollify(&phi, &m).to_physical();
        let poly: Vec<f64> = smoothed.iter().map(|&v| v.powi(3) - 3.0 * c * v).collect();
        let expect = SpectralField::from_physical(grid, &poly).unwrap();
        let direct = w.value.to_physical();
        let scale: f64 = direct.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for (a, b) in direct.iter().zip(expect.to_physical().iter()) {
            assert!((a - b).abs() < 1e-10 * scale);
        }
    }

    #[test]
    fn wick_square_integral_centering() {
        let grid = TorusGrid::new(32).unwrap();
        let m = Mollifier::gaussian(0.2);
        let n_draws = 4_000;
        let samples: Vec<f64> = (0..n_draws)
            .map(|s| {
                let phi = sample_gff(grid, 1.0, 1_000_000 + s as u64);
                wick_power_gff(&phi, 2, &m, 1.0).value.integral()
            })
            .collect();
        let (mean, se) = mean_and_se(&samples);
        assert!(mean.abs() < 3.0 * se, "{mean} +- {se}");
    }

    #[test]
    fn pseudo_wick_routes_agree() {
        let s = small_spectral_data(7);
        let m = Mollifier::gaussian(0.2);
        for order in [2usize, 3, 4] {
            for draw in 0..5u64 {
                let pair = coupled_sample(&s, 100 + draw);
                let pw = pseudo_wick_agff(&pair, order, &m);
                let direct = pw.direct.value.to_physical();
                let bino = pw.binomial.to_physical();
                let scale: f64 = direct.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
                for (a, b) in direct.iter().zip(bino.iter()) {
                    assert!((a - b).abs() < 1e-9 * scale, "order {order}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn pseudo_wick_reduces_to_gff_wick_when_shift_vanishes() {
        let grid = TorusGrid::new(32).unwrap();
        let z = EnhancedNoise::zero(grid);
        let s0 = diagonalize(&assemble(&z, 4).unwrap()).unwrap();
        let m = Mollifier::gaussian(0.25);
        let pair = coupled_sample(&s0, 9);
        let pw = pseudo_wick_agff(&pair, 2, &m);
        let w = wick_power_gff(&pair.phi_g, 2, &m, pair.gff_mass);
        let d = (&pw.direct.value - &w.value).l2_norm();
        assert!(d < 1e-9, "difference {d}");
    }

    #[test]
    fn comparison_profile_mc_matches_exact() {
        let s = small_spectral_data(8);
        let m = Mollifier::gaussian(0.3);
        let profile = wick_comparison_profile(&s, &m, 400, 77);
        let mut covered = 0usize;
        for ((mc, se), ex) in profile
            .monte_carlo
            .iter()
            .zip(profile.std_error.iter())
            .zip(profile.exact.iter())
        {
            if (mc - ex).abs() <= 3.0 * se {
                covered += 1;
            }
        }
        // pointwise 3-sigma coverage at the vast majority of grid points
        let frac = covered as f64 / profile.monte_carlo.len() as f64;
        assert!(frac > 0.97, "coverage {frac}");
    }

    #[test]
    fn shift_profile_zero_noise_is_flat_zero() {
        let grid = TorusGrid::new(32).unwrap();
        let z = EnhancedNoise::zero(grid);
        let s0 = diagonalize(&assemble(&z, 4).unwrap()).unwrap();
        let pair = coupled_sample(&s0, 2);
        let profile = shift_regularity_profile(&pair.h, 0.9);
        for &(_, v) in &profile {
            assert!(v < 1e-18);
        }
    }
}
