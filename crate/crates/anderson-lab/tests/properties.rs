//! Property tests for the spectral core: transform round trips, Parseval,
//! the dyadic partition of unity, product decompositions, and flow
//! algebra, over randomized inputs.

use anderson_lab::dyadic::{lp_blocks, sobolev_norm};
use anderson_lab::field::SpectralField;
use anderson_lab::grid::TorusGrid;
use anderson_lab::mollifier::{mollify, Mollifier};
use anderson_lab::noise::{renorm_constant, sample_white_noise};
use anderson_lab::para::{para_greater, para_less, resonant};
use proptest::prelude::*;

fn random_field(seed: u64, n: usize) -> SpectralField {
    sample_white_noise(TorusGrid::new(n).unwrap(), seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn physical_roundtrip(seed in 0u64..1_000_000, n in prop::sample::select(vec![16usize, 32, 48])) {
        let f = random_field(seed, n);
        let back = SpectralField::from_physical(f.grid(), &f.to_physical()).unwrap();
        prop_assert!(f.max_coeff_distance(&back) < 1e-12);
    }

    #[test]
    fn parseval_identity(seed in 0u64..1_000_000) {
        let f = random_field(seed, 32);
        let phys = f.to_physical();
        let l2_phys = (phys.iter().map(|v| v * v).sum::<f64>() / phys.len() as f64).sqrt();
        prop_assert!((l2_phys - f.l2_norm()).abs() < 1e-12 * (1.0 + f.l2_norm()));
    }

    #[test]
    fn blocks_partition_unity(seed in 0u64..1_000_000) {
        let f = random_field(seed, 32);
        let mut sum = SpectralField::zeros(f.grid());
        for b in lp_blocks(&f) {
            sum = &sum + &b;
        }
        prop_assert!(f.max_coeff_distance(&sum) < 1e-12);
    }

    #[test]
    fn product_decomposition_exact(seed in 0u64..1_000_000) {
        let f = random_field(seed, 32);
        let g = random_field(seed.wrapping_add(7_777), 32);
        let direct = f.product(&g).unwrap();
        let sum = &(&para_less(&f, &g).unwrap() + &resonant(&f, &g).unwrap())
            + &para_greater(&f, &g).unwrap();
        prop_assert!(direct.max_coeff_distance(&sum) < 1e-11);
    }

    #[test]
    fn product_commutes(seed in 0u64..1_000_000) {
        let f = random_field(seed, 16);
        let g = random_field(seed.wrapping_add(13), 16);
        let fg = f.product(&g).unwrap();
        let gf = g.product(&f).unwrap();
        prop_assert!(fg.max_coeff_distance(&gf) < 1e-13);
    }

    #[test]
    fn mollification_contracts_sobolev(seed in 0u64..1_000_000, eps in 0.05f64..1.0) {
        let f = random_field(seed, 32);
        let m = Mollifier::gaussian(eps);
        let smoothed = mollify(&f, &m);
        prop_assert!(smoothed.l2_norm() <= f.l2_norm() + 1e-12);
        prop_assert!(sobolev_norm(&smoothed, 0.5) <= sobolev_norm(&f, 0.5) + 1e-12);
    }

    #[test]
    fn renorm_constant_monotone_in_eps(eps in 0.05f64..0.8) {
        let grid = TorusGrid::new(64).unwrap();
        let coarse = renorm_constant(&Mollifier::gaussian(2.0 * eps), grid).value;
        let fine = renorm_constant(&Mollifier::gaussian(eps), grid).value;
        prop_assert!(fine > coarse);
    }

    #[test]
    fn white_noise_thread_count_free(seed in 0u64..100_000) {
        // same bits no matter how the modes are scheduled
        let grid = TorusGrid::new(16).unwrap();
        let a = anderson_lab::par::with_threads(Some(1), || sample_white_noise(grid, seed));
        let b = anderson_lab::par::with_threads(Some(2), || sample_white_noise(grid, seed));
        prop_assert_eq!(a.coeffs(), b.coeffs());
    }
}
