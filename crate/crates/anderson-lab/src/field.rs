//! `SpectralField`: a field on the discrete torus held as Fourier
//! coefficients, plus the dealiased product machinery.

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::TorusGrid;
use num_complex::Complex64;

/// A (usually real) field stored as one complex amplitude per wavenumber.
///
/// Real fields satisfy `coeff(-k) = conj(coeff(k))` and carry zero on the
/// Nyquist rows; every constructor that starts from physical samples
/// enforces both, so the round trip through physical space stays below
/// `1e-12` in max norm.
#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: TorusGrid,
    coeffs: Vec<Complex64>,
    real: bool,
}

impl SpectralField {
    pub fn zeros(grid: TorusGrid) -> Self {
        SpectralField {
            grid,
            coeffs: vec![Complex64::default(); grid.modes()],
            real: true,
        }
    }

    /// Constant field `c` (only the zero mode is populated).
    pub fn constant(grid: TorusGrid, c: f64) -> Self {
        let mut f = Self::zeros(grid);
        f.coeffs[0] = Complex64::new(c, 0.0);
        f
    }

    pub fn from_coeffs(grid: TorusGrid, coeffs: Vec<Complex64>, real: bool) -> Result<Self> {
        if coeffs.len() != grid.modes() {
            return Err(Error::InvalidGrid(format!(
                "coefficient count {} does not match grid {}^2",
                coeffs.len(),
                grid.n()
            )));
        }
        let mut f = SpectralField { grid, coeffs, real };
        if real {
            f.symmetrize();
        }
        Ok(f)
    }

    /// Field from physical samples (row-major `n x n`, `x = j/n`).
    pub fn from_physical(grid: TorusGrid, values: &[f64]) -> Result<Self> {
        if values.len() != grid.modes() {
            return Err(Error::InvalidGrid(format!(
                "sample count {} does not match grid {}^2",
                values.len(),
                grid.n()
            )));
        }
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft::forward2(grid.n(), &mut data);
        let mut f = SpectralField {
            grid,
            coeffs: data,
            real: true,
        };
        f.symmetrize();
        Ok(f)
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: (i64, i64)) -> Complex64 {
        self.coeffs[self.grid.index_of(k)]
    }

    /// Set `coeff(k)` and, for real fields, `coeff(-k) = conj`.
    pub fn set_pair(&mut self, k: (i64, i64), value: Complex64) {
        let idx = self.grid.index_of(k);
        self.coeffs[idx] = value;
        if self.real {
            let neg = self.grid.negated_index(idx);
            if neg == idx {
                self.coeffs[idx] = Complex64::new(value.re, 0.0);
            } else {
                self.coeffs[neg] = value.conj();
            }
        }
    }

    /// Enforce Hermitian symmetry and zero Nyquist rows in place.
    pub fn symmetrize(&mut self) {
        let grid = self.grid;
        for idx in 0..grid.modes() {
            let k = grid.wavenumber(idx);
            if !grid.is_resolved(k) {
                self.coeffs[idx] = Complex64::default();
                continue;
            }
            let neg = grid.negated_index(idx);
            if neg == idx {
                self.coeffs[idx] = Complex64::new(self.coeffs[idx].re, 0.0);
            } else if neg > idx {
                let avg = 0.5 * (self.coeffs[idx] + self.coeffs[neg].conj());
                self.coeffs[idx] = avg;
                self.coeffs[neg] = avg.conj();
            }
        }
        self.real = true;
    }

    /// Worst Hermitian-pairing defect, `max_k |coeff(-k) - conj(coeff(k))|`.
    pub fn hermitian_defect(&self) -> f64 {
        let grid = self.grid;
        let mut worst = 0.0f64;
        for idx in 0..grid.modes() {
            let neg = grid.negated_index(idx);
            let d = (self.coeffs[neg] - self.coeffs[idx].conj()).norm();
            worst = worst.max(d);
        }
        worst
    }

    /// Multiply every coefficient by `m(k)`; real even multipliers keep the
    /// field real.
    pub fn apply_multiplier(&self, m: impl Fn((i64, i64)) -> f64) -> SpectralField {
        let mut out = self.clone();
        for (idx, k) in self.grid.iter_modes() {
            out.coeffs[idx] *= m(k);
        }
        out
    }

    /// Green's multiplier `1/(|k|^2 + mass)`.
    pub fn greens(&self, mass: f64) -> SpectralField {
        self.apply_multiplier(|k| 1.0 / ((k.0 * k.0 + k.1 * k.1) as f64 + mass))
    }

    /// `(1 - Delta)` as multiplication by `1 + |k|^2`.
    pub fn one_minus_laplacian(&self) -> SpectralField {
        self.apply_multiplier(|k| 1.0 + (k.0 * k.0 + k.1 * k.1) as f64)
    }

    /// Physical samples on the field's own grid.
    pub fn to_physical(&self) -> Vec<f64> {
        let mut data = self.coeffs.clone();
        fft::inverse2(self.grid.n(), &mut data);
        data.iter().map(|c| c.re).collect()
    }

    /// Physical samples on a larger grid (zero-padded spectrum). Used for
    /// dealiased products and exact quadrature of polynomial integrands.
    pub fn to_physical_padded(&self, target: TorusGrid) -> Vec<f64> {
        debug_assert!(target.n() >= self.grid.n());
        let mut big = vec![Complex64::default(); target.modes()];
        for (idx, k) in self.grid.iter_modes() {
            if self.grid.is_resolved(k) {
                big[target.index_of(k)] = self.coeffs[idx];
            }
        }
        fft::inverse2(target.n(), &mut big);
        big.iter().map(|c| c.re).collect()
    }

    /// Build a field on `grid` from samples living on the larger grid
    /// `source`: forward transform there, then keep the modes `grid`
    /// resolves.
    pub fn from_physical_truncated(
        grid: TorusGrid,
        source: TorusGrid,
        values: &[f64],
    ) -> SpectralField {
        debug_assert_eq!(values.len(), source.modes());
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft::forward2(source.n(), &mut data);
        let mut out = SpectralField::zeros(grid);
        for (idx, k) in grid.iter_modes() {
            if grid.is_resolved(k) {
                out.coeffs[idx] = data[source.index_of(k)];
            }
        }
        out.symmetrize();
        out
    }

    /// Re-embed this field on another grid (both directions; truncates when
    /// shrinking).
    pub fn resample(&self, target: TorusGrid) -> SpectralField {
        let mut out = SpectralField::zeros(target);
        for (idx, k) in target.iter_modes() {
            if !target.is_resolved(k) {
                continue;
            }
            let ny = self.grid.nyquist();
            if k.0.abs() < ny && k.1.abs() < ny {
                out.coeffs[idx] = self.coeffs[self.grid.index_of(k)];
            }
        }
        out.real = self.real;
        out
    }

    /// Pointwise product, dealiased by the 3/2 rule: both factors are
    /// evaluated on the padded grid, multiplied there, and the result is
    /// truncated back. Quadratic sums that exceed the padded Nyquist band
    /// cannot fold back into the retained modes.
    pub fn product(&self, other: &SpectralField) -> Result<SpectralField> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch {
                left: self.grid.n(),
                right: other.grid.n(),
            });
        }
        let pad = self.grid.padded();
        let a = self.to_physical_padded(pad);
        let b = other.to_physical_padded(pad);
        let prod: Vec<f64> = a.iter().zip(b.iter()).map(|(x, y)| x * y).collect();
        Ok(SpectralField::from_physical_truncated(
            self.grid, pad, &prod,
        ))
    }

    /// `integral f dx` over the unit torus: the zero mode.
    pub fn integral(&self) -> f64 {
        self.coeffs[0].re
    }

    /// `L^2` norm via Parseval.
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn linf_physical(&self) -> f64 {
        self.to_physical().iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn scale(&self, s: f64) -> SpectralField {
        let mut out = self.clone();
        for c in out.coeffs.iter_mut() {
            *c *= s;
        }
        out
    }

    pub fn max_coeff_distance(&self, other: &SpectralField) -> f64 {
        self.coeffs
            .iter()
            .zip(other.coeffs.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0f64, f64::max)
    }
}

impl std::ops::Add<&SpectralField> for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        assert_eq!(self.grid, rhs.grid, "grid mismatch");
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(rhs.coeffs.iter()) {
            *a += b;
        }
        out.real = self.real && rhs.real;
        out
    }
}

impl std::ops::Sub<&SpectralField> for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        assert_eq!(self.grid, rhs.grid, "grid mismatch");
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(rhs.coeffs.iter()) {
            *a -= b;
        }
        out.real = self.real && rhs.real;
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::sample_white_noise;

    #[test]
    fn physical_roundtrip_is_tight() {
        let grid = TorusGrid::new(32).unwrap();
        let f = sample_white_noise(grid, 11);
        let back = SpectralField::from_physical(grid, &f.to_physical()).unwrap();
        assert!(f.max_coeff_distance(&back) < 1e-12);
    }

    #[test]
    fn parseval() {
        let grid = TorusGrid::new(32).unwrap();
        let f = sample_white_noise(grid, 3);
        let phys = f.to_physical();
        let l2_phys =
            (phys.iter().map(|v| v * v).sum::<f64>() / grid.modes() as f64).sqrt();
        assert!((l2_phys - f.l2_norm()).abs() < 1e-12 * (1.0 + f.l2_norm()));
    }

    #[test]
    fn dealiased_product_matches_convolution_on_tiny_grid() {
        let grid = TorusGrid::new(8).unwrap();
        let mut f = SpectralField::zeros(grid);
        let mut g = SpectralField::zeros(grid);
        f.set_pair((1, 0), Complex64::new(0.3, 0.1));
        f.set_pair((0, 2), Complex64::new(-0.2, 0.05));
        g.set_pair((2, 1), Complex64::new(0.7, -0.4));
        g.set_pair((1, -1), Complex64::new(0.1, 0.2));
        let prod = f.product(&g).unwrap();
        // brute-force convolution restricted to resolved modes
        let mut expect = SpectralField::zeros(grid);
        for (ia, ka) in grid.iter_modes() {
            for (ib, kb) in grid.iter_modes() {
                let k = (ka.0 + kb.0, ka.1 + kb.1);
                if k.0.abs() < 4 && k.1.abs() < 4 {
                    let idx = grid.index_of(k);
                    expect.coeffs[idx] += f.coeffs[ia] * g.coeffs[ib];
                }
            }
        }
        assert!(prod.max_coeff_distance(&expect) < 1e-12);
    }

    #[test]
    fn product_of_constants() {
        let grid = TorusGrid::new(16).unwrap();
        let a = SpectralField::constant(grid, 2.5);
        let b = SpectralField::constant(grid, -1.5);
        let p = a.product(&b).unwrap();
        assert!((p.coeff((0, 0)).re + 3.75).abs() < 1e-13);
        assert!(p.l2_norm() - 3.75 < 1e-12);
    }
}
