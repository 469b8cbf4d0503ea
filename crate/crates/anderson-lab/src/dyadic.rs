//! Littlewood-Paley blocks and Besov / Sobolev norm estimators.
//!
//! The partition uses the standard smooth pair `(chi, rho)`:
//! `chi = 1` on `[0, 3/4]`, supported in `[0, 4/3]`, and
//! `rho(r) = chi(r/2) - chi(r)` supported in `[3/4, 8/3]`. Because the
//! family telescopes, the partition of unity is *exact* on every grid mode
//! once enough blocks are used, and blocks two apart have disjoint supports
//! (the 1-block separation that makes `E[xi_eps o G xi_eps]` equal the full
//! lattice sum `c_eps`).

use crate::field::SpectralField;
use crate::grid::TorusGrid;

fn smooth_step(t: f64) -> f64 {
    // C-infinity step: 0 for t <= 0, 1 for t >= 1.
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let f = (-1.0 / t).exp();
        let g = (-1.0 / (1.0 - t)).exp();
        f / (f + g)
    }
}

/// Low-pass profile: 1 on `[0, 3/4]`, 0 beyond `4/3`.
pub fn chi(r: f64) -> f64 {
    smooth_step((4.0 / 3.0 - r) / (4.0 / 3.0 - 3.0 / 4.0))
}

/// Annulus profile `chi(r/2) - chi(r)`, supported in `[3/4, 8/3]`.
pub fn rho(r: f64) -> f64 {
    chi(r / 2.0) - chi(r)
}

/// Multiplier of block `j` (`j = -1` is the low-pass `chi`).
pub fn lp_multiplier(j: i32, k_abs: f64) -> f64 {
    if j == -1 {
        chi(k_abs)
    } else {
        rho(k_abs / (1u64 << j) as f64)
    }
}

/// Highest block index carrying any resolved mode of `grid`; also the
/// smallest `J` with `chi(2^{-J-1}|k|) = 1` on the grid, so blocks
/// `-1..=J` sum to one exactly.
pub fn max_block(grid: TorusGrid) -> i32 {
    let kmax = grid.max_abs_k();
    let mut j = -1i32;
    while (1u64 << (j + 1)) as f64 * 0.75 < kmax {
        j += 1;
    }
    j
}

/// The Littlewood-Paley block `Delta_j f`.
pub fn lp_block(field: &SpectralField, j: i32) -> SpectralField {
    field.apply_multiplier(|k| {
        lp_multiplier(j, ((k.0 * k.0 + k.1 * k.1) as f64).sqrt())
    })
}

/// All blocks `Delta_{-1} f, ..., Delta_{max_block} f`.
pub fn lp_blocks(field: &SpectralField) -> Vec<SpectralField> {
    let top = max_block(field.grid());
    (-1..=top).map(|j| lp_block(field, j)).collect()
}

/// Partial sum `S_j f = sum_{i = -1}^{j-1} Delta_i f`. The family
/// telescopes to the multiplier `chi(2^{-j} |k|)` for `j >= 0`; `S_j = 0`
/// for `j < 0`.
pub fn lp_low_pass(field: &SpectralField, j: i32) -> SpectralField {
    if j < 0 {
        return SpectralField::zeros(field.grid());
    }
    field.apply_multiplier(|k| {
        let k_abs = ((k.0 * k.0 + k.1 * k.1) as f64).sqrt();
        chi(k_abs / (1u64 << j) as f64)
    })
}

/// Exponent choices the Besov estimator supports.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpExponent {
    Two,
    Inf,
}

fn block_lp_norm(block: &SpectralField, p: LpExponent) -> f64 {
    match p {
        LpExponent::Two => block.l2_norm(),
        LpExponent::Inf => block.linf_physical(),
    }
}

/// Besov norm `( sum_j (2^{js} |Delta_j f|_{L^p})^q )^{1/q}` with
/// `p, q in {2, inf}`. For `p = q = 2` this is equivalent to the direct
/// Sobolev lattice sum within a fixed factor (block overlap is at most two
/// and annuli pin `|k|` to within `[3/4, 8/3] 2^j`).
pub fn besov_norm(field: &SpectralField, s: f64, p: LpExponent, q: LpExponent) -> f64 {
    let top = max_block(field.grid());
    let mut sum = 0.0f64;
    let mut sup = 0.0f64;
    for j in -1..=top {
        let weight = (2.0f64).powf(s * j as f64);
        let term = weight * block_lp_norm(&lp_block(field, j), p);
        match q {
            LpExponent::Two => sum += term * term,
            LpExponent::Inf => sup = sup.max(term),
        }
    }
    match q {
        LpExponent::Two => sum.sqrt(),
        LpExponent::Inf => sup,
    }
}

/// Direct Sobolev lattice sum `( sum_k (1+|k|^2)^s |fhat(k)|^2 )^{1/2}`;
/// the oracle the Besov estimator is checked against.
pub fn sobolev_norm(field: &SpectralField, s: f64) -> f64 {
    field
        .coeffs()
        .iter()
        .enumerate()
        .map(|(idx, c)| (1.0 + field.grid().k_squared(idx)).powf(s) * c.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Holder-Besov norm `C^s = B^s_{inf,inf}`.
pub fn holder_norm(field: &SpectralField, s: f64) -> f64 {
    besov_norm(field, s, LpExponent::Inf, LpExponent::Inf)
}
