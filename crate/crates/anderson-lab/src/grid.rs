//! The discrete 2-torus grid and its wavenumber bookkeeping.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// An `n x n` Fourier grid on the unit torus `(R/Z)^2`.
///
/// Row-major storage index `(i1, i2)` carries the wavenumber
/// `k_j = i_j` for `i_j <= n/2` and `i_j - n` otherwise, so
/// `k_j` ranges over `{-n/2+1, ..., n/2}`. The Nyquist rows `k_j = n/2`
/// have no negation partner on the grid; real fields keep them identically
/// zero (a documented resolution loss) so that the wavenumber set actually
/// used is closed under `k -> -k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusGrid {
    n: usize,
}

impl TorusGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 4 {
            return Err(Error::InvalidGrid(format!("n = {n} < 4")));
        }
        if n % 2 != 0 {
            return Err(Error::InvalidGrid(format!("n = {n} is odd")));
        }
        Ok(TorusGrid { n })
    }

    /// Points (and wavenumbers) per dimension.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Total number of stored modes, `n^2`.
    pub fn modes(&self) -> usize {
        self.n * self.n
    }

    pub fn nyquist(&self) -> i64 {
        (self.n / 2) as i64
    }

    /// Wavenumber of the storage index along one axis.
    #[inline]
    pub fn wavenumber_1d(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i <= n / 2 {
            i
        } else {
            i - n
        }
    }

    #[inline]
    pub fn index_1d(&self, k: i64) -> usize {
        let n = self.n as i64;
        debug_assert!(-n / 2 < k || k == -n / 2, "wavenumber out of range");
        debug_assert!(k <= n / 2, "wavenumber out of range");
        (k.rem_euclid(n)) as usize
    }

    /// Wavenumber pair of a row-major storage index.
    #[inline]
    pub fn wavenumber(&self, idx: usize) -> (i64, i64) {
        let (i1, i2) = (idx / self.n, idx % self.n);
        (self.wavenumber_1d(i1), self.wavenumber_1d(i2))
    }

    /// Row-major storage index of a wavenumber pair.
    #[inline]
    pub fn index_of(&self, k: (i64, i64)) -> usize {
        self.index_1d(k.0) * self.n + self.index_1d(k.1)
    }

    /// `|k|^2` with integer wavenumbers; the Laplacian symbol (2-pi factors
    /// are absorbed into units throughout the crate).
    #[inline]
    pub fn k_squared(&self, idx: usize) -> f64 {
        let (k1, k2) = self.wavenumber(idx);
        (k1 * k1 + k2 * k2) as f64
    }

    /// True when neither component sits on the Nyquist row. Only these
    /// modes carry data in real fields; sums "over resolved modes" run here.
    #[inline]
    pub fn is_resolved(&self, k: (i64, i64)) -> bool {
        let ny = self.nyquist();
        k.0 != ny && k.1 != ny
    }

    /// Storage index of `-k` (Nyquist rows map to themselves).
    #[inline]
    pub fn negated_index(&self, idx: usize) -> usize {
        let (i1, i2) = (idx / self.n, idx % self.n);
        let j1 = (self.n - i1) % self.n;
        let j2 = (self.n - i2) % self.n;
        j1 * self.n + j2
    }

    /// Canonical representative of the pair `{k, -k}`: `k > 0`
    /// lexicographically. `k = 0` and Nyquist-row modes are their own
    /// representatives.
    #[inline]
    pub fn is_canonical(&self, k: (i64, i64)) -> bool {
        k.0 > 0 || (k.0 == 0 && k.1 >= 0)
    }

    /// Largest `|k|` among resolved modes; sets the number of dyadic blocks.
    pub fn max_abs_k(&self) -> f64 {
        let m = (self.n / 2 - 1) as f64;
        (2.0 * m * m).sqrt()
    }

    /// Grid used for dealiased products: 3/2 zero padding.
    pub fn padded(&self) -> TorusGrid {
        TorusGrid { n: 3 * self.n / 2 }
    }

    pub fn iter_modes(&self) -> impl Iterator<Item = (usize, (i64, i64))> + '_ {
        (0..self.modes()).map(move |idx| (idx, self.wavenumber(idx)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(TorusGrid::new(2).is_err());
        assert!(TorusGrid::new(7).is_err());
        assert!(TorusGrid::new(4).is_ok());
    }

    #[test]
    fn wavenumber_roundtrip() {
        let g = TorusGrid::new(8).unwrap();
        for idx in 0..g.modes() {
            let k = g.wavenumber(idx);
            assert_eq!(g.index_of(k), idx);
            assert!(k.0 >= -3 && k.0 <= 4);
        }
    }

    #[test]
    fn negation_pairs_up() {
        let g = TorusGrid::new(8).unwrap();
        for idx in 0..g.modes() {
            let k = g.wavenumber(idx);
            let neg = g.negated_index(idx);
            if g.is_resolved(k) {
                let (k1, k2) = g.wavenumber(neg);
                assert_eq!((k1, k2), (-k.0, -k.1));
            }
            assert_eq!(g.negated_index(neg), idx);
        }
    }

    #[test]
    fn canonical_splits_pairs() {
        let g = TorusGrid::new(16).unwrap();
        for (idx, k) in g.iter_modes() {
            if !g.is_resolved(k) || k == (0, 0) {
                continue;
            }
            let neg = g.wavenumber(g.negated_index(idx));
            assert_ne!(g.is_canonical(k), g.is_canonical(neg));
        }
    }
}
