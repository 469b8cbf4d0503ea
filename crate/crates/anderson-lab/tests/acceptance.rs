//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with the measured numbers. Tolerances are pinned in the
//! assertions; nothing is deferred to later calibration.

use anderson_lab::dpd::{dpd_local_solve, theta_norm_record};
use anderson_lab::dyadic::sobolev_norm;
use anderson_lab::experiment::{
    convergence_suite, invariance_test, ConvergenceConfig, InvarianceConfig,
};
use anderson_lab::gaussian::{
    coupled_sample, pseudo_wick_agff, sample_agff, sample_gff,
    shift_regularity_profile, wick_power_gff,
};
use anderson_lab::gibbs::{partition_estimate, Interaction, WickReference};
use anderson_lab::grid::TorusGrid;
use anderson_lab::mollifier::Mollifier;
use anderson_lab::noise::{
    build_enhanced, sample_white_noise, EnhancedNoise,
};
use anderson_lab::operator::{
    assemble, assemble_with_counterterm, diagonalize, resolvent_distance, SpectralData,
};
use anderson_lab::para::{
    apply_direct, apply_hamiltonian, para_greater, para_less, paracontrolled_from_u, resonant,
};
use anderson_lab::rng::{sample_seed, sub_seed};
use anderson_lab::stats::mean_and_se;
use anderson_lab::wave::{
    galerkin_evolve, galerkin_flow, gibbs_pair_initial, hamiltonian_energy, linear_propagate,
    local_time_estimate, FlowConfig, PhasePoint,
};

fn spectral_at(grid_n: usize, k_max: usize, eps: f64, seed: u64) -> (EnhancedNoise, SpectralData) {
    let grid = TorusGrid::new(grid_n).unwrap();
    let noise = EnhancedNoise::sample(grid, &Mollifier::gaussian(eps), seed);
    let s = diagonalize(&assemble(&noise, k_max).unwrap()).unwrap();
    (noise, s)
}

#[test]
fn criterion_01_exact_product_decomposition() {
    let grid = TorusGrid::new(64).unwrap();
    let mut worst = 0.0f64;
    for pair in 0..100u64 {
        let f = sample_white_noise(grid, 2 * pair);
        let g = sample_white_noise(grid, 2 * pair + 1);
        let direct = f.product(&g).unwrap();
        let sum = &(&para_less(&f, &g).unwrap() + &resonant(&f, &g).unwrap())
            + &para_greater(&f, &g).unwrap();
        worst = worst.max(direct.max_coeff_distance(&sum));
    }
    assert!(worst < 1e-11, "max decomposition error {worst:.3e}");
    println!("ACCEPTANCE 01 PASS - paraproduct decomposition max error {worst:.3e} over 100 pairs");
}

#[test]
fn criterion_02_paracontrolled_identity() {
    let grid = TorusGrid::new(64).unwrap();
    let m = Mollifier::gaussian(0.2);
    let mut worst = 0.0f64;
    for draw in 0..20u64 {
        let noise = EnhancedNoise::sample(grid, &m, 1000 + draw);
        // a random paracontrolled function with the cutoff inactive
        let u_field = sample_white_noise(grid, 5000 + draw).greens(1.0);
        let u = paracontrolled_from_u(&u_field, &noise, None).unwrap();
        let lhs = apply_hamiltonian(&u, &noise).unwrap();
        let rhs = apply_direct(&u_field, &noise).unwrap();
        worst = worst.max((&lhs - &rhs).l2_norm() / rhs.l2_norm());
    }
    assert!(worst < 1e-8, "worst relative error {worst:.3e}");
    println!("ACCEPTANCE 02 PASS - operator representation matches direct evaluation to {worst:.3e} relative");
}

#[test]
fn criterion_03_renormalization_and_resolvent_cauchy() {
    // grid resolves the finest mollifier: 0.05 * 63 > 3
    let grid = TorusGrid::new(128).unwrap();
    let xi = sample_white_noise(grid, 33);
    let ladder = [0.4f64, 0.2, 0.1, 0.05];
    let spectra: Vec<SpectralData> = ladder
        .iter()
        .map(|&e| {
            diagonalize(&assemble(&build_enhanced(xi.clone(), &Mollifier::gaussian(e)), 16).unwrap())
                .unwrap()
        })
        .collect();
    let reference = spectra.last().unwrap();
    let shift = 2.0 + spectra.iter().map(|s| s.shift_k).fold(0.0, f64::max);
    let distances: Vec<f64> = spectra
        .iter()
        .map(|s| resolvent_distance(s, reference, shift).unwrap())
        .collect();
    for i in 1..distances.len() - 1 {
        assert!(
            distances[i] < distances[i - 1],
            "distances to the finest reference not decreasing: {distances:?}"
        );
    }
    assert!(distances[ladder.len() - 1] < 1e-12, "self distance {distances:?}");

    // with the counterterm removed the ground state dives as eps shrinks
    let mut lambda1 = Vec::new();
    for &e in &ladder {
        let noise = build_enhanced(xi.clone(), &Mollifier::gaussian(e));
        let op = assemble_with_counterterm(&noise, 16, 0.0).unwrap();
        lambda1.push(diagonalize(&op).unwrap().eigenvalues[0]);
    }
    for i in 1..lambda1.len() {
        assert!(
            lambda1[i] < lambda1[i - 1] - 0.5,
            "unrenormalized ground state should dive by > 0.5 per halving: {lambda1:?}"
        );
    }
    println!(
        "ACCEPTANCE 03 PASS - resolvent distances to the finest reference {distances:?}; unrenormalized lambda_1 ladder {lambda1:?}"
    );
}

#[test]
fn criterion_04_weyl_law() {
    let mut worst_spread = 0.0f64;
    for seed in 0..5u64 {
        let (_, s) = spectral_at(144, 24, 0.2, 4000 + seed);
        let profile = s.weyl_profile();
        let ratios: Vec<f64> = profile.iter().map(|&(_, r)| r).collect();
        let max = ratios.iter().fold(0.0f64, |m, &v| m.max(v));
        let min = ratios.iter().fold(f64::INFINITY, |m, &v| m.min(v));
        let spread = max / min;
        worst_spread = worst_spread.max(spread);
        assert!(spread < 1.5, "seed {seed}: ratio spread {spread}");
        // ordering is monotone by construction of the sort; check anyway
        for w in s.eigenvalues.windows(2) {
            assert!(w[0] <= w[1]);
        }
    }
    println!("ACCEPTANCE 04 PASS - bulk Weyl ratio spread <= {worst_spread:.4} < 1.5 on 5 seeds at k_max 24");
}

#[test]
fn criterion_05_functional_calculus_and_group_law() {
    let (_, s) = spectral_at(48, 6, 0.25, 9);
    let v = s.basis.field_to_vec(&sample_white_noise(s.basis.grid(), 77));
    let t = 0.83;
    let trig = s
        .apply_function(
            |x| (t * x.sqrt()).cos().powi(2) + (t * x.sqrt()).sin().powi(2),
            &v,
        )
        .unwrap();
    let vf = s.basis.vec_to_field(&v);
    let tf = s.basis.vec_to_field(&trig);
    let trig_err = (&vf - &tf).l2_norm() / vf.l2_norm();
    assert!(trig_err < 1e-10, "pythagorean identity error {trig_err:.3e}");

    let p = gibbs_pair_initial(&s, 3);
    let ab = linear_propagate(&s, &linear_propagate(&s, &p, 0.37), 0.41);
    let once = linear_propagate(&s, &p, 0.78);
    let group_err = ab.distance(&once) / (1.0 + once.position_norm());
    assert!(group_err < 1e-12, "group law error {group_err:.3e}");
    println!("ACCEPTANCE 05 PASS - cos^2+sin^2 error {trig_err:.3e}, propagator group law error {group_err:.3e}");
}

#[test]
fn criterion_06_wick_moments() {
    let grid = TorusGrid::new(64).unwrap();
    let m = Mollifier::gaussian(0.2);
    let mass = 1.0;
    let n = 10_000;
    let integrals = anderson_lab::par::map_indexed(n, |i| {
        let phi = sample_gff(grid, mass, sample_seed(60_000, i));
        wick_power_gff(&phi, 2, &m, mass).value.integral()
    });
    let (mean, se) = mean_and_se(&integrals);
    assert!(mean.abs() < 3.0 * se, "centering: {mean:.3e} +- {se:.3e}");

    let squares: Vec<f64> = integrals.iter().map(|v| v * v).collect();
    let (second, second_se) = mean_and_se(&squares);
    // lattice oracle: 2 sum |rho|^4 / (|k|^2 + mass)^2 from the pairing
    // count of the Wick square covariance
    let mut oracle = 0.0;
    for (_, k) in grid.iter_modes() {
        if !grid.is_resolved(k) {
            continue;
        }
        let k_sq = (k.0 * k.0 + k.1 * k.1) as f64;
        let r = m.multiplier_sq(k_sq);
        oracle += (r * r / (k_sq + mass)).powi(2);
    }
    oracle *= 2.0;
    assert!(
        (second - oracle).abs() < 3.0 * second_se,
        "second moment {second:.5} vs lattice oracle {oracle:.5} (se {second_se:.2e})"
    );
    println!(
        "ACCEPTANCE 06 PASS - E[int :phi^2:] = {mean:.2e} +- {se:.2e}; E[(int :phi^2:)^2] = {second:.5} vs oracle {oracle:.5}"
    );
}

#[test]
fn criterion_07_coupling_marginals_and_shift_regularity() {
    // marginal moments at k_max 12
    let (_, s) = spectral_at(72, 12, 0.2, 21);
    let n = 10_000;
    let coupled = anderson_lab::par::map_indexed(n, |i| {
        let pair = coupled_sample(&s, sample_seed(70_000, i));
        let a = s.field_to_eigen(&pair.phi_a);
        let g1 = pair.phi_g.coeff((1, 0)).norm_sqr();
        let g2 = pair.phi_g.coeff((2, 1)).norm_sqr();
        (a[0] * a[0], a[7] * a[7], a[0], g1, g2)
    });
    let agff = anderson_lab::par::map_indexed(n, |i| {
        let f = sample_agff(&s, sample_seed(80_000, i));
        let a = s.field_to_eigen(&f);
        (a[0] * a[0], a[7] * a[7], a[0])
    });
    let gff_mass = s.shift_k + s.mass;
    let gff = anderson_lab::par::map_indexed(n, |i| {
        let f = sample_gff(s.basis.grid(), gff_mass, sample_seed(90_000, i));
        (f.coeff((1, 0)).norm_sqr(), f.coeff((2, 1)).norm_sqr())
    });
    let two_sample = |a: &[f64], b: &[f64]| -> f64 {
        let (ma, sa) = mean_and_se(a);
        let (mb, sb) = mean_and_se(b);
        (ma - mb).abs() / (sa * sa + sb * sb).sqrt()
    };
    let c_a0: Vec<f64> = coupled.iter().map(|t| t.0).collect();
    let c_a7: Vec<f64> = coupled.iter().map(|t| t.1).collect();
    let c_mean: Vec<f64> = coupled.iter().map(|t| t.2).collect();
    let a_a0: Vec<f64> = agff.iter().map(|t| t.0).collect();
    let a_a7: Vec<f64> = agff.iter().map(|t| t.1).collect();
    let a_mean: Vec<f64> = agff.iter().map(|t| t.2).collect();
    let c_g1: Vec<f64> = coupled.iter().map(|t| t.3).collect();
    let c_g2: Vec<f64> = coupled.iter().map(|t| t.4).collect();
    let g_g1: Vec<f64> = gff.iter().map(|t| t.0).collect();
    let g_g2: Vec<f64> = gff.iter().map(|t| t.1).collect();
    for (name, za) in [
        ("agff mode-1 second moment", two_sample(&c_a0, &a_a0)),
        ("agff mode-8 second moment", two_sample(&c_a7, &a_a7)),
        ("agff mode-1 first moment", two_sample(&c_mean, &a_mean)),
        ("gff (1,0) second moment", two_sample(&c_g1, &g_g1)),
        ("gff (2,1) second moment", two_sample(&c_g2, &g_g2)),
    ] {
        assert!(za < 3.0, "{name}: z = {za:.2}");
    }

    // dyadic tail of |h|^2_{H^0.9} on 10 seeds at k_max 24
    let mut slopes = Vec::new();
    for seed in 0..10u64 {
        let (_, s24) = spectral_at(144, 24, 0.2, 7000 + seed);
        // ensemble-averaged dyadic profile over 16 draws
        let profiles = anderson_lab::par::map_indexed(16, |i| {
            let pair = coupled_sample(&s24, sample_seed(sub_seed(seed, 3), i));
            shift_regularity_profile(&pair.h, 0.9)
        });
        let top = profiles[0].len();
        let averaged: Vec<(i32, f64)> = (0..top)
            .map(|j| {
                let mean = profiles.iter().map(|p| p[j].1).sum::<f64>() / profiles.len() as f64;
                (profiles[0][j].0, mean)
            })
            .collect();
        let slope = anderson_lab::gaussian::profile_tail_slope(&averaged);
        assert!(slope < 0.0, "seed {seed}: tail slope {slope:.3}");
        slopes.push(slope);
    }
    println!(
        "ACCEPTANCE 07 PASS - coupling marginals within 3 SE over {n} draws; H^0.9 dyadic tail slopes on 10 seeds: {slopes:?}"
    );
}

#[test]
fn criterion_08_pseudo_wick_binomial_identity() {
    let (_, s) = spectral_at(48, 6, 0.2, 15);
    let m = Mollifier::gaussian(0.2);
    let mut worst = 0.0f64;
    for draw in 0..20u64 {
        let pair = coupled_sample(&s, 300 + draw);
        for order in [2usize, 3, 4] {
            let pw = pseudo_wick_agff(&pair, order, &m);
            let direct = pw.direct.value.to_physical();
            let binomial = pw.binomial.to_physical();
            let scale = direct.iter().fold(1.0f64, |a, v| a.max(v.abs()));
            for (a, b) in direct.iter().zip(binomial.iter()) {
                worst = worst.max((a - b).abs() / scale);
            }
        }
    }
    assert!(worst < 1e-9, "worst pointwise gap {worst:.3e}");
    println!("ACCEPTANCE 08 PASS - pseudo-Wick binomial identity to {worst:.3e} for M in (2,3,4) on 20 draws");
}

/// Expected RED on its final clause. The finiteness parts hold (Z > 0,
/// relative SE below 10% at the pinned parameters), but the epsilon
/// stability is unattainable at desk scale: the partition function's
/// response to halving the mollifier is orders of magnitude beyond the
/// Monte Carlo resolution for every faithful composition (operator
/// rebuilt per epsilon, or fixed operator with the interaction mollifier
/// halving; profile- or constant-referenced ordering; ranks 2..8). The
/// unit-floored, Anderson-localized ground mode makes the quartic heavy
/// tailed, and the estimand genuinely moves with epsilon while 10^4
/// samples resolve a few percent. See the decisions ledger for the full
/// measurement matrix.
#[test]
fn criterion_09_partition_function_stability() {
    let grid = TorusGrid::new(128).unwrap();
    let xi = sample_white_noise(grid, 5);
    let n = 10_000;
    let rank = 4;
    let mut estimates = Vec::new();
    for eps in [0.4f64, 0.2] {
        let m = Mollifier::gaussian(eps);
        let s = diagonalize(&assemble(&build_enhanced(xi.clone(), &m), 16).unwrap()).unwrap();
        let inter = Interaction::new(
            &s,
            &m,
            rank,
            anderson_lab::gibbs::GibbsVariant::QuarticOnly,
            WickReference::AgffProfile,
        );
        let (z, se) = partition_estimate(&s, &inter, n, 501);
        assert!(z > 0.0, "finiteness proxy: Z must be positive");
        assert!(se / z < 0.1, "eps {eps}: relative SE {:.3}", se / z);
        estimates.push((z, se));
    }
    let gap = (estimates[0].0 - estimates[1].0).abs();
    let tol = 3.0 * (estimates[0].1.powi(2) + estimates[1].1.powi(2)).sqrt();
    println!(
        "ACCEPTANCE 09 PARTIAL - Z(0.4) = {:.4e} +- {:.4e}, Z(0.2) = {:.4e} +- {:.4e}; stability clause follows",
        estimates[0].0, estimates[0].1, estimates[1].0, estimates[1].1
    );
    assert!(
        gap < tol,
        "Z gap {gap:.4e} exceeds 3 SE {tol:.4e}: the epsilon response of the \
         partition function at these scales is not a sampling fluctuation \
         (verified unattainable; see the decisions ledger)"
    );
    println!("ACCEPTANCE 09 PASS");
}

#[test]
fn criterion_10_dynamics_quality() {
    // integrator-quality criterion: run in the oscillatory regime (heavy
    // mollification keeps the quadratic block positive); the inverted-well
    // regime is exercised by the blow-up policy tests instead
    let (_, s) = spectral_at(48, 6, 1.0, 12);
    let m = Mollifier::gaussian(1.0);

    // energy drift over T = 1 at dt = 1e-3 with moderate random data
    let cfg = FlowConfig::new(&s, 10, &m, 1e-3, 1.0, WickReference::AgffProfile).unwrap();
    let mut p0 = gibbs_pair_initial(&s, 19);
    for v in p0.u.iter_mut().chain(p0.ut.iter_mut()) {
        *v *= 0.5;
    }
    let e0 = hamiltonian_energy(&s, &cfg, &p0);
    let trajectory = galerkin_flow(&s, &cfg, &p0).unwrap();
    let mut drift = 0.0f64;
    for p in &trajectory {
        drift = drift.max((hamiltonian_energy(&s, &cfg, p) - e0).abs() / e0.abs());
    }
    assert!(drift < 1e-6, "energy drift {drift:.3e}");

    // time reversal against the one-way discretization error
    let one_way = {
        let fine =
            FlowConfig::new(&s, 10, &m, 5e-4, 1.0, WickReference::AgffProfile).unwrap();
        galerkin_evolve(&s, &cfg, &p0)
            .unwrap()
            .distance(&galerkin_evolve(&s, &fine, &p0).unwrap())
    };
    let end = trajectory.last().unwrap();
    let mut back = end.clone();
    for v in back.ut.iter_mut() {
        *v = -*v;
    }
    let returned = galerkin_evolve(&s, &cfg, &back).unwrap();
    let mut mirrored = returned.clone();
    for v in mirrored.ut.iter_mut() {
        *v = -*v;
    }
    let reversal = mirrored.distance(&p0);
    assert!(
        reversal < 5.0 * one_way.max(1e-12),
        "reversal {reversal:.3e} vs one-way error {one_way:.3e}"
    );

    // single-mode oscillator against a high-accuracy ODE oracle: the force
    // along one eigenmode is an odd cubic -a u^3 + b u, with coefficients
    // extracted exactly from two force evaluations
    let osc = FlowConfig::new(&s, 1, &m, 1e-4, 1.0, WickReference::AgffProfile).unwrap();
    let force_at = |x: f64| -> f64 {
        let mut u = vec![0.0; s.len()];
        u[0] = x;
        anderson_lab::wave::wick_cubic_force(&s, &osc, &u)[0]
    };
    let f1 = force_at(1.0);
    let f2 = force_at(2.0);
    let a = (2.0 * f1 - f2) / 6.0;
    let b = f1 + a;
    // sanity: the extraction reproduces the force
    assert!((force_at(1.5) - (-a * 1.5f64.powi(3) + b * 1.5)).abs() < 1e-10);
    let w2 = s.shifted_eigenvalue(0);
    let mut p = PhasePoint::zero(s.len());
    p.u[0] = 0.4;
    p.ut[0] = -0.1;
    let flow = galerkin_evolve(&s, &osc, &p).unwrap();
    // RK4 at dt = 1e-6 on the reduced system
    let (mut x, mut v) = (0.4f64, -0.1f64);
    let rhs = |x: f64, v: f64| (v, -w2 * x - a * x * x * x + b * x);
    let h = 1e-6;
    for _ in 0..1_000_000 {
        let (k1x, k1v) = rhs(x, v);
        let (k2x, k2v) = rhs(x + 0.5 * h * k1x, v + 0.5 * h * k1v);
        let (k3x, k3v) = rhs(x + 0.5 * h * k2x, v + 0.5 * h * k2v);
        let (k4x, k4v) = rhs(x + h * k3x, v + h * k3v);
        x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    }
    let osc_err = ((flow.u[0] - x).powi(2) + (flow.ut[0] - v).powi(2)).sqrt();
    assert!(osc_err < 1e-6, "oscillator error {osc_err:.3e}");
    println!(
        "ACCEPTANCE 10 PASS - energy drift {drift:.2e}, reversal {reversal:.2e} (one-way {one_way:.2e}), oscillator vs RK4 {osc_err:.2e}"
    );
}

#[test]
fn criterion_11_dpd_consistency_and_contraction() {
    let (_, s) = spectral_at(72, 12, 0.2, 31);
    let m = Mollifier::gaussian(0.2);
    let dt = 1e-3;
    let t_final = 0.1;
    let delta = 0.1;
    let cfg = FlowConfig::new(&s, 20, &m, dt, t_final, WickReference::AgffProfile).unwrap();
    let mut p0 = gibbs_pair_initial(&s, 5);
    for v in p0.u.iter_mut().chain(p0.ut.iter_mut()) {
        *v *= 0.5;
    }
    let nodes = (t_final / dt).round() as usize + 1;
    let theta: Vec<PhasePoint> = (0..nodes)
        .map(|i| linear_propagate(&s, &p0, i as f64 * dt))
        .collect();
    let solution = dpd_local_solve(&s, &cfg, &theta, delta).unwrap();
    let direct = galerkin_flow(&s, &cfg, &p0).unwrap();
    let mut gap = 0.0f64;
    for i in 0..nodes {
        let combined: Vec<f64> = theta[i]
            .u
            .iter()
            .zip(solution.v[i].iter())
            .map(|(a, b)| a + b)
            .collect();
        let diff: Vec<f64> = combined
            .iter()
            .zip(direct[i].u.iter())
            .map(|(a, b)| a - b)
            .collect();
        gap = gap.max(sobolev_norm(&s.eigen_to_field(&diff), -0.1));
    }
    assert!(gap < 1e-4, "cross-method gap {gap:.3e}");

    // contraction at the theorem time (measured norms, p = 8), halved once
    // as the discrete-quadrature safety margin
    let p_exp = 8u32;
    let coarse: Vec<PhasePoint> = (0..=16)
        .map(|i| linear_propagate(&s, &p0, i as f64 / 16.0))
        .collect();
    let norms = theta_norm_record(&s, &cfg, &coarse, p_exp, delta);
    let t_rule = 0.5 * local_time_estimate(&norms, p_exp);
    let rule_nodes = ((t_rule / dt).ceil() as usize).max(2) + 1;
    let rule_cfg = FlowConfig::new(
        &s,
        20,
        &m,
        dt,
        (rule_nodes - 1) as f64 * dt,
        WickReference::AgffProfile,
    )
    .unwrap();
    let rule_theta: Vec<PhasePoint> = (0..rule_nodes)
        .map(|i| linear_propagate(&s, &p0, i as f64 * dt))
        .collect();
    let rule_solution = dpd_local_solve(&s, &rule_cfg, &rule_theta, delta).unwrap();
    assert!(
        rule_solution.contraction_factor < 0.5,
        "contraction {} at the rule time {t_rule:.4}",
        rule_solution.contraction_factor
    );
    println!(
        "ACCEPTANCE 11 PASS - u = theta + v matches the splitting flow to {gap:.3e}; Picard contraction {:.3} at the rule time {t_rule:.4}",
        rule_solution.contraction_factor
    );
}

#[test]
fn criterion_12_linear_flow_preserves_law() {
    let (_, s) = spectral_at(48, 6, 0.25, 3);
    let n = 10_000;
    let t = 0.6;
    // paired covariance entries of theta(t) vs theta(0) over shared draws
    let modes = [0usize, 1, 2, 4, 7, 11];
    let draws = anderson_lab::par::map_indexed(n, |i| {
        let p0 = gibbs_pair_initial(&s, sample_seed(120_000, i));
        let pt = linear_propagate(&s, &p0, t);
        let mut before = Vec::new();
        let mut after = Vec::new();
        for (ai, &a) in modes.iter().enumerate() {
            for &b in modes.iter().skip(ai) {
                before.push(p0.u[a] * p0.u[b]);
                after.push(pt.u[a] * pt.u[b]);
            }
        }
        (before, after)
    });
    let entries = draws[0].0.len();
    let mut worst = 0.0f64;
    for j in 0..entries {
        let diffs: Vec<f64> = draws.iter().map(|(b, a)| a[j] - b[j]).collect();
        let (mean, se) = mean_and_se(&diffs);
        let z = if mean == 0.0 { 0.0 } else { mean / se };
        worst = worst.max(z.abs());
    }
    assert!(worst < 3.0, "worst covariance-entry z {worst:.2}");
    println!(
        "ACCEPTANCE 12 PASS - theta(t) covariance matches theta(0) over {entries} entries, worst |z| = {worst:.2}"
    );
}

#[test]
fn criterion_13_headline_gibbs_invariance() {
    let (_, s) = spectral_at(72, 12, 0.2, 2026);
    let m = Mollifier::gaussian(0.2);
    let mut cfg = InvarianceConfig::new(30, 0.5, 2000, 2026);
    cfg.dt = 1e-2;
    cfg.burn_in = 4000;
    cfg.thin = 40;
    cfg.batches = 25;
    let report = invariance_test(&s, &m, &cfg).unwrap();
    assert_eq!(report.blowups, 0, "blow-ups in the invariance ensemble");
    for o in &report.observables {
        assert!(
            o.z_score.abs() < 3.0,
            "{}: z = {:.3}\n{}",
            o.name,
            o.z_score,
            report.to_markdown()
        );
    }
    let worst = report
        .observables
        .iter()
        .fold(0.0f64, |m, o| m.max(o.z_score.abs()));
    println!(
        "ACCEPTANCE 13 PASS - Gibbs invariance at k_max 12, N 30, eps 0.2, t 0.5, 2000 paired samples: worst |z| = {worst:.2}, zero blow-ups"
    );
}

#[test]
fn criterion_14_convergence_suite() {
    let report = convergence_suite(&ConvergenceConfig::default()).unwrap();
    assert!(report.pass, "{}", report.to_markdown());
    let rates: Vec<(String, f64)> = report
        .observables
        .iter()
        .filter(|o| o.name.ends_with("fitted_rate"))
        .map(|o| (o.name.clone(), o.after))
        .collect();
    println!("ACCEPTANCE 14 PASS - all four refinement studies decrease; fitted rates {rates:?}");
}

#[test]
fn criterion_15_determinism_across_thread_counts() {
    let (_, s) = spectral_at(48, 6, 0.25, 8);
    let m = Mollifier::gaussian(0.25);
    let run = |threads: usize| -> Vec<Vec<String>> {
        anderson_lab::par::with_threads(Some(threads), || {
            let mut cfg = InvarianceConfig::new(10, 0.3, 150, 4);
            cfg.burn_in = 400;
            cfg.thin = 8;
            cfg.batches = 10;
            let report = invariance_test(&s, &m, &cfg).unwrap();
            report.observables_csv_rows()
        })
    };
    let one = run(1);
    let two = run(2);
    assert_eq!(one, two, "observable CSV rows differ across thread counts");
    // and the CSV byte stream itself
    let render = |rows: &[Vec<String>]| -> String {
        rows.iter()
            .map(|r| r.join(","))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(render(&one), render(&two));
    println!("ACCEPTANCE 15 PASS - byte-identical experiment output on 1 and 2 worker threads");
}
