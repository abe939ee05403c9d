//! Real-space and Fourier-space sample containers.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid2D;

/// Real scalar samples on a [`Grid2D`], index `iy*nx + ix`.
#[derive(Debug, Clone)]
pub struct Field {
    grid: Grid2D,
    data: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: &Grid2D) -> Self {
        Field {
            grid: grid.clone(),
            data: vec![0.0; grid.len()],
        }
    }

    /// Wrap raw samples; the length must match the grid.
    pub fn from_data(grid: &Grid2D, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        Ok(Field {
            grid: grid.clone(),
            data,
        })
    }

    /// Sample a function of the centered coordinates.
    pub fn from_fn(grid: &Grid2D, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let mut data = Vec::with_capacity(grid.len());
        for iy in 0..grid.ny() {
            let y = grid.y(iy);
            for ix in 0..grid.nx() {
                data.push(f(grid.x(ix), y));
            }
        }
        Field {
            grid: grid.clone(),
            data,
        }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.data[iy * self.grid.nx() + ix]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn require_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite)
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `integral of u dx dy` by the trapezoid rule (= plain sum on a torus).
    pub fn mass(&self) -> f64 {
        self.data.iter().sum::<f64>() * self.grid.cell_area()
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// `(integral of u^2 dx dy)^(1/2)`.
    pub fn l2_norm(&self) -> f64 {
        (self.data.iter().map(|v| v * v).sum::<f64>() * self.grid.cell_area()).sqrt()
    }

    pub fn scale(&mut self, c: f64) {
        for v in &mut self.data {
            *v *= c;
        }
    }

    pub fn add_scaled(&mut self, other: &Field, c: f64) -> Result<()> {
        if !self.grid.same_layout(&other.grid) {
            return Err(Error::GridMismatch);
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
        Ok(())
    }

    /// Pointwise product, a fresh field.
    pub fn mul(&self, other: &Field) -> Result<Field> {
        if !self.grid.same_layout(&other.grid) {
            return Err(Error::GridMismatch);
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a * b)
            .collect();
        Ok(Field {
            grid: self.grid.clone(),
            data,
        })
    }

    /// `self - other`, a fresh field.
    pub fn sub(&self, other: &Field) -> Result<Field> {
        if !self.grid.same_layout(&other.grid) {
            return Err(Error::GridMismatch);
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Field {
            grid: self.grid.clone(),
            data,
        })
    }

    /// L2 norm of the difference.
    pub fn l2_distance(&self, other: &Field) -> Result<f64> {
        if !self.grid.same_layout(&other.grid) {
            return Err(Error::GridMismatch);
        }
        let s: f64 = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        Ok((s * self.grid.cell_area()).sqrt())
    }
}

/// Complex Fourier coefficients in the layout produced by the forward
/// transform (unnormalized; the inverse carries `1/(nx*ny)`).
#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: Grid2D,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub(crate) fn from_parts(grid: Grid2D, coeffs: Vec<Complex64>) -> Self {
        SpectralField { grid, coeffs }
    }

    pub fn zeros(grid: &Grid2D) -> Self {
        SpectralField {
            grid: grid.clone(),
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn at_mode(&self, ix: usize, iy: usize) -> Complex64 {
        self.coeffs[iy * self.grid.nx() + ix]
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Sum of squared moduli (unnormalized Parseval side).
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }
}
