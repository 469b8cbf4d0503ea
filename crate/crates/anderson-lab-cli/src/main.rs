//! Command-line front end: configuration parsing, experiment dispatch,
//! artifact file management and plot-ready CSV emission.
//!
//! Exit codes: 0 on success/pass, 2 when an experiment verdict fails,
//! 1 on error.

mod config;
mod manifest;

use anderson_lab::dpd::{dpd_local_solve, theta_norm_record};
use anderson_lab::dyadic::sobolev_norm;
use anderson_lab::experiment::{
    convergence_suite, invariance_test, tail_test, ConvergenceConfig, ExperimentReport,
    InvarianceConfig, TailConfig,
};
use anderson_lab::gaussian::{
    coupled_sample, profile_tail_slope, sample_agff, sample_gff, shift_regularity_profile,
    wick_power_gff,
};
use anderson_lab::gibbs::{partition_estimate, sample_gibbs, Interaction, SamplerMode};
use anderson_lab::grid::TorusGrid;
use anderson_lab::io::{
    field_csv_rows, fmt_f64, spectrum_csv_rows, write_csv, write_field, write_spectral_data,
};
use anderson_lab::noise::{renorm_constant, EnhancedNoise};
use anderson_lab::operator::{assemble, diagonalize, SpectralData};
use anderson_lab::rng::{sample_seed, sub_seed};
use anderson_lab::stats::mean_and_se;
use anderson_lab::wave::{
    galerkin_flow, gibbs_pair_initial, hamiltonian_energy, linear_propagate, local_time_estimate,
    FlowConfig, PhasePoint,
};
use anyhow::Result;
use clap::{Parser, Subcommand};
use config::RunConfig;
use manifest::RunDir;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "anderson-lab",
    about = "Spectral laboratory for the 2d Anderson Hamiltonian: renormalized operators, Gaussian couplings, Wick-ordered Gibbs measures and cubic wave dynamics",
    version
)]
struct Cli {
    /// JSON configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base random seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (overrides config and ANDERSON_LAB_OUTDIR).
    #[arg(long, global = true)]
    outdir: Option<String>,
    /// Worker-count hint; results are independent of it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Override single config keys, repeatable: --set key=value.
    #[arg(long = "set", global = true)]
    sets: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw white noise and its renormalized enhancement.
    SampleNoise,
    /// Assemble and diagonalize the operator; save the spectral data.
    BuildOperator,
    /// Export the operator spectrum as CSV.
    Spectrum,
    /// Ensemble statistics of the free fields (GFF and Anderson GFF).
    SampleFields,
    /// Draw the coupled pair and profile the shift regularity.
    Couple,
    /// Wick-power moment checks against the lattice oracle.
    Wick,
    /// Sample the quartic Gibbs ensemble.
    Gibbs,
    /// Integrate the Galerkin flow and export the trajectory.
    Evolve,
    /// Da Prato-Debussche local solve with the existence-time rule.
    LocalSolve,
    /// Gibbs invariance experiment (paired z-scores).
    Invariance,
    /// Exponential tail experiment for Wick powers of the linear flow.
    Tails,
    /// The four refinement studies.
    Converge,
    /// Check the configuration without executing.
    Validate,
}

fn resolve_outdir(cfg: &RunConfig) -> PathBuf {
    if let Some(o) = &cfg.outdir {
        return PathBuf::from(o);
    }
    if let Ok(env) = std::env::var("ANDERSON_LAB_OUTDIR") {
        if !env.is_empty() {
            return PathBuf::from(env);
        }
    }
    PathBuf::from("runs")
}

fn build_spectral(cfg: &RunConfig) -> Result<(EnhancedNoise, SpectralData)> {
    let grid = TorusGrid::new(cfg.grid_n)?;
    let noise = if cfg.noise == "zero" {
        EnhancedNoise::zero(grid)
    } else {
        EnhancedNoise::sample(grid, &cfg.mollifier_obj(), cfg.seed)
    };
    let s = diagonalize(&assemble(&noise, cfg.k_max)?)?;
    Ok((noise, s))
}

fn write_report(run: &mut RunDir, report: &ExperimentReport) -> Result<()> {
    let json = run.path("report.json");
    std::fs::write(&json, report.to_json())?;
    run.register(json);
    let md = run.path("report.md");
    std::fs::write(&md, report.to_markdown())?;
    run.register(md);
    let csv = run.path("observables.csv");
    write_csv(
        &csv,
        &["observable", "before", "after", "std_error", "z_score", "verdict"],
        &report.observables_csv_rows(),
    )?;
    run.register(csv);
    Ok(())
}

fn sampler_mode(cfg: &RunConfig) -> SamplerMode {
    match cfg.sampler.as_str() {
        "pcn" => SamplerMode::Pcn {
            burn_in: cfg.burn_in,
            thin: cfg.thin,
            initial_step: 0.25,
            target_acceptance: 0.3,
        },
        "importance" => SamplerMode::ImportanceWeights,
        _ => SamplerMode::IndependenceMh {
            burn_in: cfg.burn_in,
            thin: cfg.thin,
        },
    }
}

fn run(cli: Cli) -> Result<i32> {
    let cfg = RunConfig::load(
        cli.config.as_deref(),
        &cli.sets,
        cli.seed,
        cli.outdir,
        cli.threads,
    )?;

    if matches!(cli.command, Command::Validate) {
        let diags = cfg.diagnostics();
        if diags.is_empty() {
            println!("config valid");
        } else {
            for d in &diags {
                println!("{d}");
            }
        }
        return Ok(0);
    }

    cfg.require_valid()?;
    let outdir = resolve_outdir(&cfg);
    let threads = cfg.threads;
    anderson_lab::par::with_threads(threads, || dispatch(&cli.command, &cfg, &outdir))
}

fn dispatch(command: &Command, cfg: &RunConfig, outdir: &PathBuf) -> Result<i32> {
    match command {
        Command::Validate => unreachable!("handled before dispatch"),
        Command::SampleNoise => {
            let mut run = RunDir::create(outdir, "sample-noise", cfg)?;
            let grid = TorusGrid::new(cfg.grid_n)?;
            let m = cfg.mollifier_obj();
            let noise = EnhancedNoise::sample(grid, &m, cfg.seed);
            let c = renorm_constant(&m, grid);
            for (field, name, role) in [
                (&noise.xi, "xi.bin", "white-noise"),
                (&noise.xi_eps, "xi_eps.bin", "mollified"),
                (&noise.xi2_eps, "xi2_eps.bin", "resonant-square"),
            ] {
                let p = run.path(name);
                write_field(&p, field, role)?;
                run.register(p);
            }
            let csv = run.path("xi.csv");
            write_csv(&csv, &["k1", "k2", "re", "im"], &field_csv_rows(&noise.xi))?;
            run.register(csv);
            let summary = run.path("summary.csv");
            write_csv(
                &summary,
                &["quantity", "value"],
                &[
                    vec!["c_eps".into(), fmt_f64(noise.c_eps)],
                    vec!["tail_bound".into(), fmt_f64(c.tail_bound)],
                    vec![
                        "tail_resolved".into(),
                        if c.tail_resolved { "1" } else { "0" }.into(),
                    ],
                ],
            )?;
            run.register(summary);
            println!("c_eps = {} (tail resolved: {})", noise.c_eps, c.tail_resolved);
            run.finish()?;
            Ok(0)
        }
        Command::BuildOperator => {
            let mut run = RunDir::create(outdir, "build-operator", cfg)?;
            let grid = TorusGrid::new(cfg.grid_n)?;
            let noise = EnhancedNoise::sample(grid, &cfg.mollifier_obj(), cfg.seed);
            let op = assemble(&noise, cfg.k_max)?;
            let defect = op.hermiticity_defect();
            let s = diagonalize(&op)?;
            let bin = run.path("spectral.bin");
            write_spectral_data(&bin, &s, "anderson")?;
            run.register(bin);
            let summary = run.path("summary.csv");
            write_csv(
                &summary,
                &["quantity", "value"],
                &[
                    vec!["basis_size".into(), s.len().to_string()],
                    vec!["hermiticity_defect".into(), fmt_f64(defect)],
                    vec!["c_eps".into(), fmt_f64(op.c_eps)],
                    vec!["lambda_1".into(), fmt_f64(s.eigenvalues[0])],
                    vec!["shift_k".into(), fmt_f64(s.shift_k)],
                ],
            )?;
            run.register(summary);
            println!(
                "assembled {} modes, defect {defect:.2e}, lambda_1 = {:.6}, K = {:.6}",
                s.len(),
                s.eigenvalues[0],
                s.shift_k
            );
            run.finish()?;
            Ok(0)
        }
        Command::Spectrum => {
            let mut run = RunDir::create(outdir, "spectrum", cfg)?;
            let (_, s) = build_spectral(cfg)?;
            let csv = run.path("spectrum.csv");
            write_csv(&csv, &["n", "lambda"], &spectrum_csv_rows(&s.eigenvalues))?;
            run.register(csv);
            println!(
                "spectrum of {} modes: lambda_1 = {:.6}, lambda_M = {:.6}",
                s.len(),
                s.eigenvalues[0],
                s.eigenvalues[s.len() - 1]
            );
            run.finish()?;
            Ok(0)
        }
        Command::SampleFields => {
            let mut run = RunDir::create(outdir, "sample-fields", cfg)?;
            let (_, s) = build_spectral(cfg)?;
            let grid = s.basis.grid();
            let n = cfg.n_samples;
            let mut rows = Vec::new();
            // GFF mode variances against 1/(|k|^2 + mass)
            for k in [(1i64, 0i64), (0, 1), (2, 2)] {
                let vals = anderson_lab::par::map_indexed(n, |i| {
                    sample_gff(grid, cfg.mass, sample_seed(cfg.seed, i))
                        .coeff(k)
                        .norm_sqr()
                });
                let (mean, se) = mean_and_se(&vals);
                rows.push(vec![
                    format!("gff_mode_{}_{}_variance", k.0, k.1),
                    fmt_f64(mean),
                    fmt_f64(se),
                    n.to_string(),
                    cfg.seed.to_string(),
                ]);
            }
            // AGFF eigen-coefficient variances against 1/(lambda_n + K + 1)
            let agff_seed = sub_seed(cfg.seed, 1);
            for idx in [0usize, 1, 4] {
                let vals = anderson_lab::par::map_indexed(n, |i| {
                    let f = sample_agff(&s, sample_seed(agff_seed, i));
                    let c = s.field_to_eigen(&f);
                    c[idx] * c[idx]
                });
                let (mean, se) = mean_and_se(&vals);
                rows.push(vec![
                    format!("agff_eigen_{}_variance", idx + 1),
                    fmt_f64(mean),
                    fmt_f64(se),
                    n.to_string(),
                    cfg.seed.to_string(),
                ]);
            }
            let csv = run.path("ensemble.csv");
            write_csv(
                &csv,
                &["observable", "estimate", "std_error", "n_samples", "seed_base"],
                &rows,
            )?;
            run.register(csv);
            let field = sample_agff(&s, sample_seed(agff_seed, 0));
            let bin = run.path("agff_draw.bin");
            write_field(&bin, &field, "agff")?;
            run.register(bin);
            println!("wrote ensemble statistics over {n} draws");
            run.finish()?;
            Ok(0)
        }
        Command::Couple => {
            let mut run = RunDir::create(outdir, "couple", cfg)?;
            let (_, s) = build_spectral(cfg)?;
            let pair = coupled_sample(&s, cfg.seed);
            for (field, name, role) in [
                (&pair.phi_g, "phi_g.bin", "gff-side"),
                (&pair.phi_a, "phi_a.bin", "agff-side"),
                (&pair.h, "shift.bin", "coupling-shift"),
            ] {
                let p = run.path(name);
                write_field(&p, field, role)?;
                run.register(p);
            }
            let mut rows = Vec::new();
            for alpha in [0.9, 1.2] {
                let profile = shift_regularity_profile(&pair.h, alpha);
                let slope = profile_tail_slope(&profile);
                for &(j, v) in &profile {
                    rows.push(vec![
                        fmt_f64(alpha),
                        j.to_string(),
                        fmt_f64(v),
                        fmt_f64(slope),
                    ]);
                }
            }
            let csv = run.path("shift_profile.csv");
            write_csv(&csv, &["alpha", "j", "weighted_energy", "tail_slope"], &rows)?;
            run.register(csv);
            println!(
                "coupled draw: |h|_L2 = {:.6}, alpha=0.9 slope {:.3}, alpha=1.2 slope {:.3}",
                pair.h.l2_norm(),
                profile_tail_slope(&shift_regularity_profile(&pair.h, 0.9)),
                profile_tail_slope(&shift_regularity_profile(&pair.h, 1.2)),
            );
            run.finish()?;
            Ok(0)
        }
        Command::Wick => {
            let mut run = RunDir::create(outdir, "wick", cfg)?;
            let grid = TorusGrid::new(cfg.grid_n)?;
            let m = cfg.mollifier_obj();
            let n = cfg.n_samples;
            let order = cfg.order.max(1);
            let integrals = anderson_lab::par::map_indexed(n, |i| {
                let phi = sample_gff(grid, cfg.mass, sample_seed(cfg.seed, i));
                wick_power_gff(&phi, order, &m, cfg.mass).value.integral()
            });
            let (mean, se) = mean_and_se(&integrals);
            let squares: Vec<f64> = integrals.iter().map(|v| v * v).collect();
            let (second, second_se) = mean_and_se(&squares);
            // lattice oracle for the order-2 second moment
            let mut oracle = f64::NAN;
            if order == 2 {
                let mut acc = 0.0;
                for (_, k) in grid.iter_modes() {
                    if !grid.is_resolved(k) {
                        continue;
                    }
                    let k_sq = (k.0 * k.0 + k.1 * k.1) as f64;
                    let r = m.multiplier_sq(k_sq);
                    acc += (r * r / (k_sq + cfg.mass)).powi(2);
                }
                oracle = 2.0 * acc;
            }
            let rows = vec![
                vec![
                    "wick_integral_mean".into(),
                    fmt_f64(mean),
                    fmt_f64(se),
                    n.to_string(),
                    cfg.seed.to_string(),
                ],
                vec![
                    "wick_integral_second_moment".into(),
                    fmt_f64(second),
                    fmt_f64(second_se),
                    n.to_string(),
                    cfg.seed.to_string(),
                ],
                vec![
                    "second_moment_lattice_oracle".into(),
                    fmt_f64(oracle),
                    "0".into(),
                    n.to_string(),
                    cfg.seed.to_string(),
                ],
            ];
            let csv = run.path("wick_moments.csv");
            write_csv(
                &csv,
                &["observable", "estimate", "std_error", "n_samples", "seed_base"],
                &rows,
            )?;
            run.register(csv);
            let mean_ok = mean.abs() <= 3.0 * se;
            let second_ok = order != 2 || (second - oracle).abs() <= 3.0 * second_se;
            println!(
                "E[int :phi^{order}:] = {mean:.4e} +- {se:.4e}; second moment {second:.6} vs oracle {oracle:.6}"
            );
            run.finish()?;
            Ok(if mean_ok && second_ok { 0 } else { 2 })
        }
        Command::Gibbs => {
            let mut run = RunDir::create(outdir, "gibbs", cfg)?;
            let (_, s) = build_spectral(cfg)?;
            let m = cfg.mollifier_obj();
            let interaction = Interaction::new(
                &s,
                &m,
                cfg.galerkin_n,
                cfg.variant_obj(),
                cfg.wick_reference_obj(),
            );
            let ensemble = sample_gibbs(&s, &interaction, cfg.n_samples, cfg.seed, sampler_mode(cfg))?;
            let rows: Vec<Vec<String>> = ensemble
                .samples
                .iter()
                .enumerate()
                .map(|(i, smp)| {
                    vec![
                        i.to_string(),
                        fmt_f64(smp.weight.interaction_v),
                        fmt_f64(smp.weight.log_weight),
                        if smp.moved { "1" } else { "0" }.to_string(),
                    ]
                })
                .collect();
            let csv = run.path("ensemble.csv");
            write_csv(&csv, &["sample_index", "V", "log_weight", "accepted"], &rows)?;
            run.register(csv);
            if cfg.snapshot_stride > 0 {
                for (i, smp) in ensemble
                    .samples
                    .iter()
                    .enumerate()
                    .step_by(cfg.snapshot_stride)
                {
                    let p = run.path(&format!("sample_{i:06}.bin"));
                    write_field(&p, &s.eigen_to_field(&smp.coeffs), "gibbs-sample")?;
                    run.register(p);
                }
            }
            let (z, z_se) = partition_estimate(&s, &interaction, cfg.n_samples, sub_seed(cfg.seed, 7));
            println!(
                "{} samples, acceptance {:.3}, ESS {:.1}, Z = {z:.4} +- {z_se:.4}",
                ensemble.samples.len(),
                ensemble.acceptance_rate,
                ensemble.effective_sample_size
            );
            run.finish()?;
            Ok(0)
        }
        Command::Evolve => {
            let mut run = RunDir::create(outdir, "evolve", cfg)?;
            let (_, s) = build_spectral(cfg)?;
            let m = cfg.mollifier_obj();
            let flow = FlowConfig::new(
                &s,
                cfg.galerkin_n,
                &m,
                cfg.dt,
                cfg.t_final,
                cfg.wick_reference_obj(),
            )?;
            let p0 = gibbs_pair_initial(&s, cfg.seed);
            let trajectory = galerkin_flow(&s, &flow, &p0)?;
            let mut rows = Vec::new();
            for (i, p) in trajectory.iter().enumerate() {
                // the remainder against the exact linear flow of the same
                // data fills the v-norm column
                let theta = linear_propagate(&s, &p0, p.time);
                let v: Vec<f64> = p
                    .u
                    .iter()
                    .zip(theta.u.iter())
                    .map(|(a, b)| a - b)
                    .collect();
                let u_field = s.eigen_to_field(&p.u);
                let v_field = s.eigen_to_field(&v);
                rows.push(vec![
                    fmt_f64(p.time),
                    fmt_f64(hamiltonian_energy(&s, &flow, p)),
                    fmt_f64(sobolev_norm(&u_field, -0.1)),
                    fmt_f64(u_field.l2_norm()),
                    fmt_f64(sobolev_norm(&v_field, 0.9)),
                ]);
                if cfg.snapshot_stride > 0 && i % cfg.snapshot_stride == 0 {
                    let p_bin = run.path(&format!("u_{i:06}.bin"));
                    write_field(&p_bin, &u_field, "wave-state")?;
                    run.register(p_bin);
                }
            }
            let csv = run.path("trajectory.csv");
            write_csv(
                &csv,
                &["t", "energy", "u_h_minus_0.1", "u_l2", "v_h_0.9"],
                &rows,
            )?;
            run.register(csv);
            let e0 = hamiltonian_energy(&s, &flow, &trajectory[0]);
            let e1 = hamiltonian_energy(&s, &flow, trajectory.last().unwrap());
            println!(
                "evolved to t = {} in {} steps; relative energy drift {:.3e}",
                cfg.t_final,
                trajectory.len() - 1,
                ((e1 - e0) / e0).abs()
            );
            run.finish()?;
            Ok(0)
        }
        Command::LocalSolve => {
            let mut run = RunDir::create(outdir, "local-solve", cfg)?;
            let (_, s) = build_spectral(cfg)?;
            let m = cfg.mollifier_obj();
            let delta = 0.1;
            let p = 8u32;
            let p0 = gibbs_pair_initial(&s, cfg.seed);

            // norms of the linear evolution over [0,1] on a coarse grid
            let probe_flow = FlowConfig::new(
                &s,
                cfg.galerkin_n,
                &m,
                cfg.dt,
                1.0,
                cfg.wick_reference_obj(),
            )?;
            let coarse: Vec<PhasePoint> = (0..=16)
                .map(|i| linear_propagate(&s, &p0, i as f64 / 16.0))
                .collect();
            let norms = theta_norm_record(&s, &probe_flow, &coarse, p, delta);
            // existence-time rule, halved once as the discrete-quadrature
            // safety margin
            let t_rule = 0.5 * local_time_estimate(&norms, p);
            let nodes = ((t_rule / cfg.dt).ceil() as usize).max(2) + 1;
            let t_run = (nodes - 1) as f64 * cfg.dt;
            let flow = FlowConfig::new(
                &s,
                cfg.galerkin_n,
                &m,
                cfg.dt,
                t_run,
                cfg.wick_reference_obj(),
            )?;
            let theta: Vec<PhasePoint> = (0..nodes)
                .map(|i| linear_propagate(&s, &p0, i as f64 * cfg.dt))
                .collect();
            let solution = dpd_local_solve(&s, &flow, &theta, delta)?;

            // cross-method consistency against the splitting integrator
            let direct = galerkin_flow(&s, &flow, &p0)?;
            let mut worst = 0.0f64;
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
                worst = worst.max(sobolev_norm(&s.eigen_to_field(&diff), -0.1));
            }

            let mut rows = Vec::new();
            for (i, v) in solution.v.iter().enumerate() {
                let vf = s.eigen_to_field(v);
                rows.push(vec![
                    fmt_f64(solution.times[i]),
                    fmt_f64(sobolev_norm(&vf, 1.0 - delta)),
                    fmt_f64(vf.l2_norm()),
                ]);
            }
            let csv = run.path("remainder.csv");
            write_csv(&csv, &["t", "v_h_0.9", "v_l2"], &rows)?;
            run.register(csv);
            let diag = run.path("diagnostics.csv");
            write_csv(
                &diag,
                &["quantity", "value"],
                &[
                    vec!["rule_time".into(), fmt_f64(t_rule)],
                    vec!["run_time".into(), fmt_f64(t_run)],
                    vec!["iterations".into(), solution.iterations.to_string()],
                    vec![
                        "contraction_factor".into(),
                        fmt_f64(solution.contraction_factor),
                    ],
                    vec!["residual".into(), fmt_f64(solution.residual)],
                    vec!["galerkin_gap_h_minus_0.1".into(), fmt_f64(worst)],
                ],
            )?;
            run.register(diag);
            println!(
                "local solve to T = {t_run:.4} ({} Picard iterations, contraction {:.3}); gap to the splitting flow {worst:.3e}",
                solution.iterations, solution.contraction_factor
            );
            run.finish()?;
            Ok(0)
        }
        Command::Invariance => {
            let mut run = RunDir::create(outdir, "invariance", cfg)?;
            let (_, s) = build_spectral(cfg)?;
            let m = cfg.mollifier_obj();
            let mut icfg = InvarianceConfig::new(cfg.galerkin_n, cfg.t_evolve, cfg.n_samples, cfg.seed);
            icfg.dt = cfg.dt;
            icfg.burn_in = cfg.burn_in;
            icfg.thin = cfg.thin;
            let report = invariance_test(&s, &m, &icfg)?;
            write_report(&mut run, &report)?;
            println!("{}", report.to_markdown());
            run.finish()?;
            Ok(if report.pass { 0 } else { 2 })
        }
        Command::Tails => {
            let mut run = RunDir::create(outdir, "tails", cfg)?;
            let (_, s) = build_spectral(cfg)?;
            let m = cfg.mollifier_obj();
            let tcfg = TailConfig::new(cfg.order.max(1), cfg.n_samples, cfg.seed);
            let report = tail_test(&s, &m, &tcfg)?;
            write_report(&mut run, &report)?;
            println!("{}", report.to_markdown());
            run.finish()?;
            Ok(if report.pass { 0 } else { 2 })
        }
        Command::Converge => {
            let mut run = RunDir::create(outdir, "converge", cfg)?;
            let ccfg = ConvergenceConfig {
                grid_n: cfg.grid_n,
                k_max: cfg.k_max,
                base_epsilon: cfg.epsilon,
                seed: cfg.seed,
                dt: cfg.dt,
                ..ConvergenceConfig::default()
            };
            let report = convergence_suite(&ccfg)?;
            write_report(&mut run, &report)?;
            println!("{}", report.to_markdown());
            run.finish()?;
            Ok(if report.pass { 0 } else { 2 })
        }
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(1);
        }
    }
}
