//! Forward/inverse discrete Fourier transforms, Fourier-multiplier
//! application and dealiasing on the periodic grid.
//!
//! Conventions:
//! - the forward transform is unnormalized, the inverse carries `1/(nx*ny)`,
//!   so the Parseval identity reads `mean(u^2) = sum |coeffs|^2 / (nx*ny)^2`;
//! - symbols with a 0/0 at the zero frequency (the non-local and Riesz
//!   families) are set to 0 there, consistent with `L = inv(Delta) d/dx`
//!   annihilating constants;
//! - factors of the wavenumber that appear to an odd power are zeroed at
//!   the Nyquist slot so that every multiplier maps real fields to real
//!   fields.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::field::{Field, SpectralField};
use crate::grid::Grid2D;

/// Periodic 2D grid constructor (re-exported entry point of the substrate).
pub fn make_grid(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Grid2D> {
    Grid2D::new(nx, ny, lx, ly)
}

struct AxisPlans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

fn plans_for(n: usize) -> Arc<AxisPlans> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<AxisPlans>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().expect("fft plan cache poisoned");
    map.entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(AxisPlans {
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
            })
        })
        .clone()
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    // src is rows x cols (row-major), dst becomes cols x rows.
    for r in 0..rows {
        for c in 0..cols {
            dst[c * rows + r] = src[r * cols + c];
        }
    }
}

/// Unnormalized in-place 2D FFT on a raw buffer (row-column algorithm);
/// the hot path of the solver bypasses the `Field` wrappers through this.
pub(crate) fn fft2_raw(buf: &mut Vec<Complex64>, nx: usize, ny: usize, forward: bool) {
    fft2_in_place(buf, nx, ny, forward)
}

fn fft2_in_place(buf: &mut Vec<Complex64>, nx: usize, ny: usize, forward: bool) {
    let px = plans_for(nx);
    let py = plans_for(ny);
    let plan_x = if forward { &px.forward } else { &px.inverse };
    let plan_y = if forward { &py.forward } else { &py.inverse };

    let mut scratch =
        vec![Complex64::new(0.0, 0.0); plan_x.get_inplace_scratch_len().max(plan_y.get_inplace_scratch_len())];
    for row in buf.chunks_exact_mut(nx) {
        plan_x.process_with_scratch(row, &mut scratch);
    }
    let mut tmp = vec![Complex64::new(0.0, 0.0); buf.len()];
    transpose(buf, &mut tmp, ny, nx);
    for col in tmp.chunks_exact_mut(ny) {
        plan_y.process_with_scratch(col, &mut scratch);
    }
    transpose(&tmp, buf, nx, ny);
}

/// Forward transform; rejects NaN/Inf input.
pub fn transform(f: &Field) -> Result<SpectralField> {
    f.require_finite()?;
    let grid = f.grid();
    let mut buf: Vec<Complex64> = f.data().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft2_in_place(&mut buf, grid.nx(), grid.ny(), true);
    Ok(SpectralField::from_parts(grid.clone(), buf))
}

/// Inverse transform (normalized); the imaginary residue of a Hermitian
/// spectrum is dropped.
pub fn inverse_transform(f: &SpectralField) -> Result<Field> {
    if !f.is_finite() {
        return Err(Error::NonFinite);
    }
    let grid = f.grid();
    let mut buf = f.coeffs().to_vec();
    fft2_in_place(&mut buf, grid.nx(), grid.ny(), false);
    let scale = 1.0 / grid.len() as f64;
    let data = buf.iter().map(|c| c.re * scale).collect();
    Field::from_data(grid, data)
}

/// Fourier multipliers used across the toolkit.
///
/// `NonlocalX`/`NonlocalY` are the derivatives of `L = inv(Delta) d/dx`
/// with symbols `xi^2/(xi^2+eta^2)` and `xi*eta/(xi^2+eta^2)`; the Riesz
/// symbols are `-i xi/|k|` and `-i eta/|k|`; `Bessel(s)` is
/// `(1+xi^2+eta^2)^(s/2)`; `Propagator(t)` is `exp(i t xi (xi^2+eta^2))`,
/// the exact flow of the linear part `d/dt + d/dx Delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MultiplierKind {
    Dx,
    Dy,
    Laplacian,
    DxLaplacian,
    NonlocalX,
    NonlocalY,
    RieszX,
    RieszY,
    Bessel(f64),
    Propagator(f64),
}

impl MultiplierKind {
    /// Symbol value at one mode. `nyq_x`/`nyq_y` mark the self-paired
    /// Nyquist slots, where odd powers of the wavenumber are replaced by 0.
    pub fn symbol(&self, kx: f64, ky: f64, nyq_x: bool, nyq_y: bool) -> Complex64 {
        // Odd-power occurrences at the Nyquist slot use a zeroed wavenumber.
        let kxo = if nyq_x { 0.0 } else { kx };
        let kyo = if nyq_y { 0.0 } else { ky };
        let k2 = kx * kx + ky * ky;
        match *self {
            MultiplierKind::Dx => Complex64::new(0.0, kxo),
            MultiplierKind::Dy => Complex64::new(0.0, kyo),
            MultiplierKind::Laplacian => Complex64::new(-k2, 0.0),
            MultiplierKind::DxLaplacian => Complex64::new(0.0, -kxo * k2),
            MultiplierKind::NonlocalX => {
                if k2 == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(kx * kx / k2, 0.0)
                }
            }
            MultiplierKind::NonlocalY => {
                if k2 == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(kxo * kyo / k2, 0.0)
                }
            }
            MultiplierKind::RieszX => {
                if k2 == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(0.0, -kxo / k2.sqrt())
                }
            }
            MultiplierKind::RieszY => {
                if k2 == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(0.0, -kyo / k2.sqrt())
                }
            }
            MultiplierKind::Bessel(s) => Complex64::new((1.0 + k2).powf(0.5 * s), 0.0),
            MultiplierKind::Propagator(t) => Complex64::from_polar(1.0, t * kxo * k2),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            MultiplierKind::Bessel(s) if !s.is_finite() => Err(Error::NonFinite),
            MultiplierKind::Propagator(t) if !t.is_finite() => Err(Error::NonFinite),
            _ => Ok(()),
        }
    }
}

/// Coefficient-wise product with the symbol; the input is untouched.
pub fn apply_multiplier(f: &SpectralField, kind: MultiplierKind) -> Result<SpectralField> {
    kind.validate()?;
    if !f.is_finite() {
        return Err(Error::NonFinite);
    }
    let grid = f.grid();
    let (nx, ny) = (grid.nx(), grid.ny());
    let mut out = f.coeffs().to_vec();
    for iy in 0..ny {
        let ky = grid.ky()[iy];
        let nyq_y = iy == ny / 2;
        for ix in 0..nx {
            let s = kind.symbol(grid.kx()[ix], ky, ix == nx / 2, nyq_y);
            out[iy * nx + ix] *= s;
        }
    }
    Ok(SpectralField::from_parts(grid.clone(), out))
}

/// Convenience: transform, multiply, inverse-transform.
pub fn apply_multiplier_real(f: &Field, kind: MultiplierKind) -> Result<Field> {
    inverse_transform(&apply_multiplier(&transform(f)?, kind)?)
}

/// Two-thirds rule: zero every coefficient with `|m| > n/3` on either axis.
pub fn dealias(f: &SpectralField) -> SpectralField {
    let grid = f.grid();
    let (nx, ny) = (grid.nx(), grid.ny());
    let mut out = f.coeffs().to_vec();
    let cut_x = nx as f64 / 3.0;
    let cut_y = ny as f64 / 3.0;
    for iy in 0..ny {
        let my = Grid2D::freq_index(iy, ny).unsigned_abs() as f64;
        for ix in 0..nx {
            let mx = Grid2D::freq_index(ix, nx).unsigned_abs() as f64;
            if mx > cut_x || my > cut_y {
                out[iy * nx + ix] = Complex64::new(0.0, 0.0);
            }
        }
    }
    SpectralField::from_parts(grid.clone(), out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid(n: usize) -> Grid2D {
        Grid2D::new(n, n, 2.0 * PI, 2.0 * PI).unwrap()
    }

    #[test]
    fn cos_x_concentrates_on_unit_modes() {
        let g = grid(64);
        let f = Field::from_fn(&g, |x, _| x.cos());
        let hat = transform(&f).unwrap();
        let n2 = (g.len() * g.len()) as f64;
        let total = hat.energy() / n2;
        let on_modes = (hat.at_mode(1, 0).norm_sqr() + hat.at_mode(63, 0).norm_sqr()) / n2;
        assert!((total - 0.5).abs() < 1e-12, "mean square of cos is 1/2");
        assert!((total - on_modes).abs() < 1e-13);
    }

    #[test]
    fn zero_field_transforms_to_zero() {
        let g = grid(16);
        let hat = transform(&Field::zeros(&g)).unwrap();
        assert!(hat.coeffs().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn rejects_non_finite_input() {
        let g = grid(8);
        let mut f = Field::zeros(&g);
        f.data_mut()[3] = f64::NAN;
        assert!(transform(&f).is_err());
    }

    #[test]
    fn plane_wave_symbols_match_hand_values() {
        let g = grid(32);
        // (xi, eta) = (1, 0): NonlocalX multiplies by 1.
        let f = Field::from_fn(&g, |x, _| x.cos());
        let out = apply_multiplier_real(&f, MultiplierKind::NonlocalX).unwrap();
        assert!(out.l2_distance(&f).unwrap() < 1e-12);
        // (0, 1): NonlocalX kills it.
        let f = Field::from_fn(&g, |_, y| y.cos());
        let out = apply_multiplier_real(&f, MultiplierKind::NonlocalX).unwrap();
        assert!(out.l2_norm() < 1e-12);
        // (1, 1): both non-local symbols are 1/2.
        let f = Field::from_fn(&g, |x, y| (x + y).cos());
        for kind in [MultiplierKind::NonlocalX, MultiplierKind::NonlocalY] {
            let out = apply_multiplier_real(&f, kind).unwrap();
            let mut half = f.clone();
            half.scale(0.5);
            assert!(out.l2_distance(&half).unwrap() < 1e-12, "{kind:?}");
        }
    }

    #[test]
    fn dx_matches_analytic_derivative_of_trig_polynomials() {
        let g = grid(64);
        let f = Field::from_fn(&g, |x, y| (3.0 * x).sin() + (2.0 * x).cos() * (5.0 * y).sin());
        let want = Field::from_fn(&g, |x, y| {
            3.0 * (3.0 * x).cos() - 2.0 * (2.0 * x).sin() * (5.0 * y).sin()
        });
        let got = apply_multiplier_real(&f, MultiplierKind::Dx).unwrap();
        assert!(got.l2_distance(&want).unwrap() < 1e-12 * want.l2_norm().max(1.0));
    }

    #[test]
    fn dealias_zeroes_top_third_and_is_idempotent() {
        let g = grid(64);
        let mut hat = SpectralField::zeros(&g);
        hat.coeffs_mut()[31] = Complex64::new(1.0, 0.0); // mode (31, 0)
        hat.coeffs_mut()[g.nx() + 1] = Complex64::new(1.0, 0.0); // mode (1, 1)
        let once = dealias(&hat);
        assert_eq!(once.coeffs()[31], Complex64::new(0.0, 0.0));
        assert_eq!(once.coeffs()[g.nx() + 1], Complex64::new(1.0, 0.0));
        let twice = dealias(&once);
        for (a, b) in once.coeffs().iter().zip(twice.coeffs()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn propagator_is_unitary_and_real() {
        let g = grid(32);
        let f = Field::from_fn(&g, |x, y| (2.0 * x).sin() * y.cos() + 0.3 * (3.0 * y).sin());
        let hat = transform(&f).unwrap();
        let moved = apply_multiplier(&hat, MultiplierKind::Propagator(0.37)).unwrap();
        assert!((moved.energy() - hat.energy()).abs() < 1e-9 * hat.energy());
        let back = inverse_transform(&moved).unwrap();
        assert!(back.is_finite());
        // Forward then backward in time returns the field.
        let there_and_back = apply_multiplier(&moved, MultiplierKind::Propagator(-0.37)).unwrap();
        let round = inverse_transform(&there_and_back).unwrap();
        assert!(round.l2_distance(&f).unwrap() < 1e-12);
    }

    #[test]
    fn nonlocal_partition_of_unity() {
        // NonlocalX plus the complementary symbol eta^2/(xi^2+eta^2) is the
        // identity off the zero mode.
        let g = grid(32);
        let f = Field::from_fn(&g, |x, y| (x.cos() + (2.0 * y).sin() + (x + 3.0 * y).cos()) as f64);
        let mean = f.mean();
        let nx_part = apply_multiplier_real(&f, MultiplierKind::NonlocalX).unwrap();
        // Complementary multiplier via Laplacian relation: eta^2/k^2 = 1 - xi^2/k^2.
        let hat = transform(&f).unwrap();
        let mut comp = SpectralField::zeros(&g);
        for iy in 0..g.ny() {
            for ix in 0..g.nx() {
                let kx = g.kx()[ix];
                let ky = g.ky()[iy];
                let k2 = kx * kx + ky * ky;
                let s = if k2 == 0.0 { 0.0 } else { ky * ky / k2 };
                comp.coeffs_mut()[iy * g.nx() + ix] =
                    hat.coeffs()[iy * g.nx() + ix] * Complex64::new(s, 0.0);
            }
        }
        let comp = inverse_transform(&comp).unwrap();
        let mut sum = nx_part.clone();
        sum.add_scaled(&comp, 1.0).unwrap();
        let mut centered = f.clone();
        for v in centered.data_mut() {
            *v -= mean;
        }
        assert!(sum.l2_distance(&centered).unwrap() < 1e-10);
    }
}
