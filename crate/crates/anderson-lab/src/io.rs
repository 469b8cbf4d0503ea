//! Flat binary containers and CSV exports.
//!
//! Container layout (little-endian throughout): magic `ALAB`, format
//! version `u16`, kind `u16`, a 16-byte zero-padded ASCII role tag, then
//! the kind-specific payload. Fields store the grid size, the real flag
//! and the complex64 coefficient array; spectral data stores the basis,
//! eigenvalues and the eigenvector matrix.

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::TorusGrid;
use crate::mollifier::{Mollifier, MollifierKind};
use crate::operator::{FourierBasis, SpectralData};
use num_complex::Complex64;
use std::io::{Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"ALAB";
const VERSION: u16 = 1;
const KIND_FIELD: u16 = 1;
const KIND_SPECTRAL: u16 = 2;

fn role_bytes(role: &str) -> [u8; 16] {
    let mut out = [0u8; 16];
    for (dst, src) in out.iter_mut().zip(role.bytes()) {
        *dst = src;
    }
    out
}

fn role_string(bytes: &[u8; 16]) -> String {
    String::from_utf8_lossy(bytes)
        .trim_end_matches('\0')
        .to_string()
}

struct Cursor<'a>(&'a [u8]);

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.0.len() < n {
            return Err(Error::BadContainer("truncated file".into()));
        }
        let (head, tail) = self.0.split_at(n);
        self.0 = tail;
        Ok(head)
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn i32(&mut self) -> Result<i32> {
        Ok(i32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// Serialize a field: header plus the coefficient array.
pub fn write_field(path: &Path, field: &SpectralField, role: &str) -> Result<()> {
    let mut buf = Vec::with_capacity(32 + 16 * field.grid().modes());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&KIND_FIELD.to_le_bytes());
    buf.extend_from_slice(&role_bytes(role));
    buf.extend_from_slice(&(field.grid().n() as u32).to_le_bytes());
    buf.push(u8::from(field.is_real()));
    buf.extend_from_slice(&[0u8; 3]);
    for c in field.coeffs() {
        buf.extend_from_slice(&c.re.to_le_bytes());
        buf.extend_from_slice(&c.im.to_le_bytes());
    }
    std::fs::File::create(path)?.write_all(&buf)?;
    Ok(())
}

/// Read a field container back, returning the role tag too.
pub fn read_field(path: &Path) -> Result<(SpectralField, String)> {
    let mut data = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut data)?;
    let mut cur = Cursor(&data);
    if cur.take(4)? != MAGIC {
        return Err(Error::BadContainer("bad magic".into()));
    }
    if cur.u16()? != VERSION {
        return Err(Error::BadContainer("unknown version".into()));
    }
    if cur.u16()? != KIND_FIELD {
        return Err(Error::BadContainer("not a field container".into()));
    }
    let role: [u8; 16] = cur.take(16)?.try_into().unwrap();
    let n = cur.u32()? as usize;
    let real = cur.take(1)?[0] != 0;
    cur.take(3)?;
    let grid = TorusGrid::new(n)?;
    let mut coeffs = Vec::with_capacity(grid.modes());
    for _ in 0..grid.modes() {
        let re = cur.f64()?;
        let im = cur.f64()?;
        coeffs.push(Complex64::new(re, im));
    }
    let field = SpectralField::from_coeffs(grid, coeffs, real)?;
    Ok((field, role_string(&role)))
}

/// Serialize spectral data: basis, eigenvalues, eigenvector matrix.
pub fn write_spectral_data(path: &Path, s: &SpectralData, role: &str) -> Result<()> {
    let m = s.len();
    let mut buf = Vec::new();
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&KIND_SPECTRAL.to_le_bytes());
    buf.extend_from_slice(&role_bytes(role));
    buf.extend_from_slice(&(s.basis.grid().n() as u32).to_le_bytes());
    buf.extend_from_slice(&(s.basis.k_max() as u32).to_le_bytes());
    buf.extend_from_slice(&(m as u32).to_le_bytes());
    buf.push(match s.mollifier.kind {
        MollifierKind::Gaussian => 0,
        MollifierKind::SharpCutoff => 1,
    });
    buf.extend_from_slice(&[0u8; 3]);
    buf.extend_from_slice(&s.mollifier.epsilon.to_le_bytes());
    buf.extend_from_slice(&s.shift_k.to_le_bytes());
    buf.extend_from_slice(&s.mass.to_le_bytes());
    buf.extend_from_slice(&s.c_eps.to_le_bytes());
    for &(k1, k2) in s.basis.modes() {
        buf.extend_from_slice(&(k1 as i32).to_le_bytes());
        buf.extend_from_slice(&(k2 as i32).to_le_bytes());
    }
    for &l in &s.eigenvalues {
        buf.extend_from_slice(&l.to_le_bytes());
    }
    // eigenvectors as Fourier coefficients, column by column
    for n in 0..m {
        let f = s.eigenfunction(n);
        for &k in s.basis.modes() {
            let c = f.coeff(k);
            buf.extend_from_slice(&c.re.to_le_bytes());
            buf.extend_from_slice(&c.im.to_le_bytes());
        }
    }
    std::fs::File::create(path)?.write_all(&buf)?;
    Ok(())
}

/// The deserialized spectral payload.
pub struct SpectralPayload {
    pub grid: TorusGrid,
    pub k_max: usize,
    pub eigenvalues: Vec<f64>,
    pub eigenfunctions: Vec<SpectralField>,
    pub shift_k: f64,
    pub mass: f64,
    pub c_eps: f64,
    pub mollifier: Mollifier,
    pub role: String,
}

pub fn read_spectral_data(path: &Path) -> Result<SpectralPayload> {
    let mut data = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut data)?;
    let mut cur = Cursor(&data);
    if cur.take(4)? != MAGIC {
        return Err(Error::BadContainer("bad magic".into()));
    }
    if cur.u16()? != VERSION {
        return Err(Error::BadContainer("unknown version".into()));
    }
    if cur.u16()? != KIND_SPECTRAL {
        return Err(Error::BadContainer("not a spectral container".into()));
    }
    let role: [u8; 16] = cur.take(16)?.try_into().unwrap();
    let n = cur.u32()? as usize;
    let k_max = cur.u32()? as usize;
    let m = cur.u32()? as usize;
    let kind = match cur.take(1)?[0] {
        0 => MollifierKind::Gaussian,
        1 => MollifierKind::SharpCutoff,
        other => {
            return Err(Error::BadContainer(format!("bad mollifier tag {other}")));
        }
    };
    cur.take(3)?;
    let epsilon = cur.f64()?;
    let shift_k = cur.f64()?;
    let mass = cur.f64()?;
    let c_eps = cur.f64()?;
    let grid = TorusGrid::new(n)?;
    let basis = FourierBasis::new(grid, k_max)?;
    if basis.len() != m {
        return Err(Error::BadContainer(format!(
            "basis size mismatch: stored {m}, derived {}",
            basis.len()
        )));
    }
    for &(k1, k2) in basis.modes() {
        let s1 = cur.i32()? as i64;
        let s2 = cur.i32()? as i64;
        if (s1, s2) != (k1, k2) {
            return Err(Error::BadContainer("mode list mismatch".into()));
        }
    }
    let mut eigenvalues = Vec::with_capacity(m);
    for _ in 0..m {
        eigenvalues.push(cur.f64()?);
    }
    let mut eigenfunctions = Vec::with_capacity(m);
    for _ in 0..m {
        let mut v = Vec::with_capacity(m);
        for _ in 0..m {
            let re = cur.f64()?;
            let im = cur.f64()?;
            v.push(Complex64::new(re, im));
        }
        eigenfunctions.push(basis.vec_to_field(&v));
    }
    Ok(SpectralPayload {
        grid,
        k_max,
        eigenvalues,
        eigenfunctions,
        shift_k,
        mass,
        c_eps,
        mollifier: Mollifier::new(kind, epsilon),
        role: role_string(&role),
    })
}

/// Deterministic shortest-roundtrip float formatting for CSV cells.
pub fn fmt_f64(v: f64) -> String {
    if v == 0.0 {
        // normalize the sign of zero so re-runs are byte-identical
        "0".to_string()
    } else {
        format!("{v}")
    }
}

/// Write rows as CSV: comma separation, header line, `.` decimal point.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    std::fs::File::create(path)?.write_all(out.as_bytes())?;
    Ok(())
}

/// CSV inspection export of a field: `k1,k2,re,im` in storage order.
pub fn field_csv_rows(field: &SpectralField) -> Vec<Vec<String>> {
    field
        .grid()
        .iter_modes()
        .map(|(idx, (k1, k2))| {
            let c = field.coeffs()[idx];
            vec![
                k1.to_string(),
                k2.to_string(),
                fmt_f64(c.re),
                fmt_f64(c.im),
            ]
        })
        .collect()
}

/// Spectrum export rows: `n,lambda_n` (raw eigenvalues, 1-based index).
pub fn spectrum_csv_rows(eigenvalues: &[f64]) -> Vec<Vec<String>> {
    eigenvalues
        .iter()
        .enumerate()
        .map(|(i, &l)| vec![(i + 1).to_string(), fmt_f64(l)])
        .collect()
}

/// 64-bit FNV-1a, used for config and content hashes in run manifests.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100_0000_01b3);
    }
    hash
}
