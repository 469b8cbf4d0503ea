//! The mollified renormalized Anderson Hamiltonian as a dense Hermitian
//! matrix on a truncated Fourier basis: assembly, diagonalization, the
//! shifted operator, functional calculus and spectral diagnostics.
//!
//! The matrix represents `-Delta + xi_eps - c_eps` on the modes
//! `|k| <= k_max`. Because the potential is a real field, the operator is
//! real in the orthonormal cosine/sine basis; `diagonalize` performs the
//! unitary change of basis and runs a real symmetric eigensolve, then maps
//! eigenvectors back to Fourier coefficients.

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::TorusGrid;
use crate::mollifier::Mollifier;
use crate::noise::EnhancedNoise;
use crate::rng::stream_rng;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

/// Ordered list of wavenumbers with `|k| <= k_max`, sorted by
/// `(|k|^2, k1, k2)` so the basis is deterministic.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierBasis {
    grid: TorusGrid,
    k_max: usize,
    modes: Vec<(i64, i64)>,
}

impl FourierBasis {
    pub fn new(grid: TorusGrid, k_max: usize) -> Result<Self> {
        if 6 * k_max > grid.n() {
            return Err(Error::CutoffTooLarge { k_max, n: grid.n() });
        }
        if k_max == 0 {
            return Err(Error::Config("k_max must be at least 1".into()));
        }
        let bound = (k_max * k_max) as i64;
        let r = k_max as i64;
        let mut modes = Vec::new();
        for k1 in -r..=r {
            for k2 in -r..=r {
                if k1 * k1 + k2 * k2 <= bound {
                    modes.push((k1, k2));
                }
            }
        }
        modes.sort_by_key(|&(k1, k2)| (k1 * k1 + k2 * k2, k1, k2));
        Ok(FourierBasis { grid, k_max, modes })
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn modes(&self) -> &[(i64, i64)] {
        &self.modes
    }

    /// Restrict a field to the basis modes.
    pub fn field_to_vec(&self, field: &SpectralField) -> Vec<Complex64> {
        self.modes.iter().map(|&k| field.coeff(k)).collect()
    }

    /// Embed basis coefficients as a field on the basis grid.
    pub fn vec_to_field(&self, v: &[Complex64]) -> SpectralField {
        let mut coeffs = vec![Complex64::default(); self.grid.modes()];
        for (&k, &c) in self.modes.iter().zip(v.iter()) {
            coeffs[self.grid.index_of(k)] = c;
        }
        let mut f = SpectralField::from_coeffs(self.grid, coeffs, false).expect("sized");
        // keep the real flag only when the data is Hermitian
        if f.hermitian_defect() < 1e-10 {
            f.symmetrize();
        }
        f
    }
}

/// Real orthonormal basis over the mode pairs: the constant mode, then
/// `sqrt(2) cos` and `sqrt(2) sin` per canonical pair.
#[derive(Clone, Debug)]
enum RealMode {
    Zero(usize),
    Cos { plus: usize, minus: usize },
    Sin { plus: usize, minus: usize },
}

#[derive(Clone, Debug)]
struct RealBasis {
    entries: Vec<RealMode>,
}

impl RealBasis {
    fn new(basis: &FourierBasis) -> Self {
        let index_of = |k: (i64, i64)| -> usize {
            basis
                .modes
                .iter()
                .position(|&m| m == k)
                .expect("paired mode present")
        };
        let mut entries = Vec::with_capacity(basis.len());
        for (i, &k) in basis.modes.iter().enumerate() {
            if k == (0, 0) {
                entries.push(RealMode::Zero(i));
            } else if basis.grid.is_canonical(k) {
                let minus = index_of((-k.0, -k.1));
                entries.push(RealMode::Cos { plus: i, minus });
                entries.push(RealMode::Sin { plus: i, minus });
            }
        }
        debug_assert_eq!(entries.len(), basis.len());
        RealBasis { entries }
    }

    /// Hermitian complex coefficients -> real coordinates.
    fn to_real(&self, v: &[Complex64]) -> DVector<f64> {
        let sqrt2 = std::f64::consts::SQRT_2;
        DVector::from_iterator(
            self.entries.len(),
            self.entries.iter().map(|e| match *e {
                RealMode::Zero(i) => v[i].re,
                RealMode::Cos { plus, .. } => sqrt2 * v[plus].re,
                RealMode::Sin { plus, .. } => -sqrt2 * v[plus].im,
            }),
        )
    }

    /// Real coordinates -> Hermitian complex coefficients.
    fn to_complex(&self, r: &DVector<f64>, len: usize) -> Vec<Complex64> {
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        let mut v = vec![Complex64::default(); len];
        for (alpha, e) in self.entries.iter().enumerate() {
            match *e {
                RealMode::Zero(i) => v[i] += Complex64::new(r[alpha], 0.0),
                RealMode::Cos { plus, minus } => {
                    let c = Complex64::new(r[alpha] * inv_sqrt2, 0.0);
                    v[plus] += c;
                    v[minus] += c;
                }
                RealMode::Sin { plus, minus } => {
                    let c = Complex64::new(0.0, -r[alpha] * inv_sqrt2);
                    v[plus] += c;
                    v[minus] -= c;
                }
            }
        }
        v
    }
}

/// The assembled operator on the truncated Fourier basis:
/// `A[k,l] = |k|^2 delta_{kl} + xi_hat_eps(k - l) - c_eps delta_{kl}`.
#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    pub basis: FourierBasis,
    pub entries: DMatrix<Complex64>,
    pub c_eps: f64,
    pub mollifier: Mollifier,
    pub noise_seed: u64,
}

impl OperatorMatrix {
    /// Worst deviation from Hermitian symmetry.
    pub fn hermiticity_defect(&self) -> f64 {
        let m = self.basis.len();
        let mut worst = 0.0f64;
        for a in 0..m {
            for b in a..m {
                worst = worst.max((self.entries[(a, b)] - self.entries[(b, a)].conj()).norm());
            }
            worst = worst.max(self.entries[(a, a)].im.abs());
        }
        worst
    }

    pub fn trace(&self) -> f64 {
        (0..self.basis.len()).map(|a| self.entries[(a, a)].re).sum()
    }
}

/// Assemble with an explicit counterterm value (`0.0` gives the
/// unrenormalized operator used in divergence diagnostics).
pub fn assemble_with_counterterm(
    noise: &EnhancedNoise,
    k_max: usize,
    c_eps: f64,
) -> Result<OperatorMatrix> {
    let basis = FourierBasis::new(noise.grid(), k_max)?;
    let m = basis.len();
    let mut entries = DMatrix::<Complex64>::zeros(m, m);
    for a in 0..m {
        let ka = basis.modes[a];
        for b in 0..m {
            let kb = basis.modes[b];
            let dk = (ka.0 - kb.0, ka.1 - kb.1);
            let mut v = noise.xi_eps.coeff(dk);
            if a == b {
                v += Complex64::new((ka.0 * ka.0 + ka.1 * ka.1) as f64 - c_eps, 0.0);
            }
            entries[(a, b)] = v;
        }
    }
    Ok(OperatorMatrix {
        basis,
        entries,
        c_eps,
        mollifier: noise.mollifier,
        noise_seed: noise.seed,
    })
}

/// Assemble the renormalized operator `-Delta + xi_eps - c_eps`.
pub fn assemble(noise: &EnhancedNoise, k_max: usize) -> Result<OperatorMatrix> {
    assemble_with_counterterm(noise, k_max, noise.c_eps)
}

/// Full spectrum of the assembled operator plus the positivity shift.
///
/// `eigenvalues` are the raw eigenvalues of the matrix; the shifted
/// operator adds `shift_k + mass`, with `shift_k = max(0, -lambda_1)` so
/// the lowest shifted eigenvalue is at least `mass = 1`.
#[derive(Clone, Debug)]
pub struct SpectralData {
    pub basis: FourierBasis,
    pub eigenvalues: Vec<f64>,
    real_basis: RealBasis,
    /// Column `n` holds eigenfunction `f_n` in real-basis coordinates.
    vectors: DMatrix<f64>,
    pub shift_k: f64,
    pub mass: f64,
    pub mollifier: Mollifier,
    pub c_eps: f64,
}

/// Diagonalize a Hermitian operator matrix.
pub fn diagonalize(op: &OperatorMatrix) -> Result<SpectralData> {
    let m = op.basis.len();
    let defect = op.hermiticity_defect();
    if defect > 1e-10 {
        return Err(Error::EigensolveFailure(format!(
            "matrix not Hermitian: defect {defect:.3e}"
        )));
    }
    let real_basis = RealBasis::new(&op.basis);

    // R = T^H A T with T the sparse unitary into the cos/sine basis.
    let sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let i_unit = Complex64::new(0.0, 1.0);
    // A T: columns combined two at a time
    let mut at = DMatrix::<Complex64>::zeros(m, m);
    for (beta, e) in real_basis.entries.iter().enumerate() {
        match *e {
            RealMode::Zero(i) => {
                for r in 0..m {
                    at[(r, beta)] = op.entries[(r, i)];
                }
            }
            RealMode::Cos { plus, minus } => {
                for r in 0..m {
                    at[(r, beta)] = (op.entries[(r, plus)] + op.entries[(r, minus)]) * sqrt2;
                }
            }
            RealMode::Sin { plus, minus } => {
                for r in 0..m {
                    at[(r, beta)] =
                        (op.entries[(r, plus)] - op.entries[(r, minus)]) * (-i_unit) * sqrt2;
                }
            }
        }
    }
    let mut real = DMatrix::<f64>::zeros(m, m);
    let mut worst_im = 0.0f64;
    for (alpha, e) in real_basis.entries.iter().enumerate() {
        match *e {
            RealMode::Zero(i) => {
                for c in 0..m {
                    let v = at[(i, c)];
                    real[(alpha, c)] = v.re;
                    worst_im = worst_im.max(v.im.abs());
                }
            }
            RealMode::Cos { plus, minus } => {
                for c in 0..m {
                    let v = (at[(plus, c)] + at[(minus, c)]) * sqrt2;
                    real[(alpha, c)] = v.re;
                    worst_im = worst_im.max(v.im.abs());
                }
            }
            RealMode::Sin { plus, minus } => {
                // row of T^H: conjugate of the sine column
                for c in 0..m {
                    let v = (at[(plus, c)] - at[(minus, c)]) * i_unit * sqrt2;
                    real[(alpha, c)] = v.re;
                    worst_im = worst_im.max(v.im.abs());
                }
            }
        }
    }
    if worst_im > 1e-9 {
        return Err(Error::EigensolveFailure(format!(
            "real-basis transform left imaginary residue {worst_im:.3e}"
        )));
    }
    // symmetrize rounding noise
    for a in 0..m {
        for b in (a + 1)..m {
            let avg = 0.5 * (real[(a, b)] + real[(b, a)]);
            real[(a, b)] = avg;
            real[(b, a)] = avg;
        }
    }

    let eig = real.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .expect("finite eigenvalues")
    });
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::<f64>::zeros(m, m);
    for (new, &old) in order.iter().enumerate() {
        vectors.set_column(new, &eig.eigenvectors.column(old));
    }

    // spot-check residuals and orthonormality on a deterministic subset
    for &n in &[0usize, m / 2, m.saturating_sub(1)] {
        let v = vectors.column(n);
        let rv = &real * v;
        let residual = (&rv - eigenvalues[n] * v).norm();
        if residual > 1e-8 * (1.0 + eigenvalues[n].abs()) {
            return Err(Error::EigensolveFailure(format!(
                "eigenpair {n} residual {residual:.3e}"
            )));
        }
        let norm_defect = (v.norm() - 1.0).abs();
        if norm_defect > 1e-10 {
            return Err(Error::EigensolveFailure(format!(
                "eigenvector {n} norm defect {norm_defect:.3e}"
            )));
        }
    }

    let shift_k = (-eigenvalues[0]).max(0.0);
    Ok(SpectralData {
        basis: op.basis.clone(),
        eigenvalues,
        real_basis,
        vectors,
        shift_k,
        mass: 1.0,
        mollifier: op.mollifier,
        c_eps: op.c_eps,
    })
}

impl SpectralData {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Eigenvalue of the uniformly positive shifted operator.
    pub fn shifted_eigenvalue(&self, n: usize) -> f64 {
        self.eigenvalues[n] + self.shift_k + self.mass
    }

    /// Frequency `omega_n = sqrt(lambda_n + K + 1)` of the wave propagator.
    pub fn omega(&self, n: usize) -> f64 {
        self.shifted_eigenvalue(n).sqrt()
    }

    /// Eigenfunction `f_n` as a field on the basis grid.
    pub fn eigenfunction(&self, n: usize) -> SpectralField {
        let col = self.vectors.column(n).into_owned();
        let v = self.real_basis.to_complex(&col, self.basis.len());
        self.basis.vec_to_field(&v)
    }

    /// Coordinates of a Hermitian coefficient vector in the eigenbasis.
    pub fn to_eigen(&self, v: &[Complex64]) -> Vec<f64> {
        let r = self.real_basis.to_real(v);
        (self.vectors.transpose() * r).iter().copied().collect()
    }

    pub fn field_to_eigen(&self, field: &SpectralField) -> Vec<f64> {
        self.to_eigen(&self.basis.field_to_vec(field))
    }

    /// Back from eigenbasis coordinates to Hermitian coefficients; short
    /// vectors are treated as rank-truncated (padded with zeros).
    pub fn from_eigen(&self, c: &[f64]) -> Vec<Complex64> {
        let mut full = DVector::zeros(self.len());
        for (dst, &src) in full.iter_mut().zip(c.iter()) {
            *dst = src;
        }
        let r = &self.vectors * full;
        self.real_basis.to_complex(&r, self.basis.len())
    }

    pub fn eigen_to_field(&self, c: &[f64]) -> SpectralField {
        self.basis.vec_to_field(&self.from_eigen(c))
    }

    /// Functional calculus `g(H^{omega,K}) v = sum_n g(lambda_n + K + 1)
    /// <f_n, v> f_n` on a Hermitian coefficient vector.
    pub fn apply_function(
        &self,
        g: impl Fn(f64) -> f64,
        v: &[Complex64],
    ) -> Result<Vec<Complex64>> {
        let mut c = self.to_eigen(v);
        for (n, cn) in c.iter_mut().enumerate() {
            let x = self.shifted_eigenvalue(n);
            let gx = g(x);
            if !gx.is_finite() {
                return Err(Error::DomainError { eigenvalue: x });
            }
            *cn *= gx;
        }
        Ok(self.from_eigen(&c))
    }

    /// `(H^{omega,K})^{s/2} v` for `s` in `(-1, 1)`.
    pub fn fractional_power(&self, s: f64, v: &[Complex64]) -> Result<Vec<Complex64>> {
        self.apply_function(|x| x.powf(s / 2.0), v)
    }

    /// Sobolev-type norm through the operator: `|(H^{omega,K})^{s/2} u|_{l2}`.
    pub fn operator_sobolev_norm(&self, field: &SpectralField, s: f64) -> f64 {
        let c = self.field_to_eigen(field);
        c.iter()
            .enumerate()
            .map(|(n, cn)| self.shifted_eigenvalue(n).powf(s) * cn * cn)
            .sum::<f64>()
            .sqrt()
    }

    /// `(n, lambda_n / n)` over the bulk window `n in [M/4, M/2]`
    /// (1-based), with the shifted eigenvalues.
    pub fn weyl_profile(&self) -> Vec<(usize, f64)> {
        let m = self.len();
        (m / 4..=m / 2)
            .filter(|&n| n >= 1)
            .map(|n| (n, self.shifted_eigenvalue(n - 1) / n as f64))
            .collect()
    }

    /// Orthogonal projection onto the first `rank` eigenfunctions.
    pub fn project_low(&self, rank: usize, v: &[Complex64]) -> Vec<Complex64> {
        let mut c = self.to_eigen(v);
        for cn in c.iter_mut().skip(rank.min(self.len())) {
            *cn = 0.0;
        }
        self.from_eigen(&c)
    }

    /// Gram defect over a deterministic sample of column pairs.
    pub fn orthonormality_defect(&self, pairs: usize) -> f64 {
        let m = self.len();
        let mut worst = 0.0f64;
        for i in 0..pairs.min(m * m) {
            let a = (i * 7919) % m;
            let b = (i * 104729 + 1) % m;
            let dot = self.vectors.column(a).dot(&self.vectors.column(b));
            let expect = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((dot - expect).abs());
        }
        worst
    }
}

/// Operator-norm distance between the resolvents `(A_i + shift)^{-1}` of
/// two operators sharing a basis, by power iteration on the symmetric
/// difference in the real basis.
pub fn resolvent_distance(s1: &SpectralData, s2: &SpectralData, shift: f64) -> Result<f64> {
    if s1.basis.modes() != s2.basis.modes() {
        return Err(Error::BasisMismatch);
    }
    let l1 = s1.eigenvalues[0];
    let l2 = s2.eigenvalues[0];
    if shift + l1 <= 0.0 || shift + l2 <= 0.0 {
        return Err(Error::ShiftTooSmall {
            shift,
            lambda1_a: l1,
            lambda1_b: l2,
        });
    }
    let m = s1.len();
    let resolvent = |s: &SpectralData| -> DMatrix<f64> {
        // V D V^T with D = diag(1/(lambda + shift))
        let mut scaled = s.vectors.clone();
        for (j, &l) in s.eigenvalues.iter().enumerate() {
            scaled.column_mut(j).scale_mut(1.0 / (l + shift));
        }
        &scaled * s.vectors.transpose()
    };
    let diff = resolvent(s1) - resolvent(s2);

    // symmetric matrix: power iteration converges to |lambda|_max
    let mut rng = stream_rng(0x5eed_0123 ^ m as u64, 0);
    let mut v = DVector::from_iterator(m, (0..m).map(|_| rng.random::<f64>() - 0.5));
    let mut norm_estimate = 0.0f64;
    v /= v.norm();
    for _ in 0..200 {
        let w = &diff * &v;
        let n = w.norm();
        if n == 0.0 {
            return Ok(0.0);
        }
        let next = w / n;
        let delta = (n - norm_estimate).abs();
        norm_estimate = n;
        v = next;
        if delta < 1e-12 * norm_estimate.max(1e-300) {
            break;
        }
    }
    Ok(norm_estimate)
}
