//! Periodic computational torus.
//!
//! The torus `[-Lx/2, Lx/2) x [-Ly/2, Ly/2)` stands in for the plane: all
//! experiments choose the domain large enough that fields are negligible
//! near the boundary, and operators become discrete Fourier multipliers.

use std::sync::Arc;

use crate::error::{Error, Result};

/// Uniform periodic 2D grid with angular wavenumber tables.
///
/// Sample `(ix, iy)` sits at `(ix*dx - Lx/2, iy*dy - Ly/2)` and is stored
/// at index `iy*nx + ix` (x fastest). Wavenumbers follow the usual FFT
/// layout `2*pi*m/L` with `m = 0, 1, ..., nx/2-1, -nx/2, ..., -1`; the
/// Nyquist slot carries the negative frequency.
#[derive(Debug, Clone)]
pub struct Grid2D {
    nx: usize,
    ny: usize,
    lx: f64,
    ly: f64,
    kx: Arc<[f64]>,
    ky: Arc<[f64]>,
}

fn wavenumbers(n: usize, l: f64) -> Arc<[f64]> {
    let scale = 2.0 * std::f64::consts::PI / l;
    (0..n)
        .map(|i| {
            let m = if i <= n / 2 - 1 {
                i as i64
            } else {
                i as i64 - n as i64
            };
            scale * m as f64
        })
        .collect()
}

impl Grid2D {
    /// Build a grid; sizes must be even and at least 8, lengths positive.
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        if nx < 8 || ny < 8 || nx % 2 != 0 || ny % 2 != 0 {
            return Err(Error::BadGridSize { nx, ny });
        }
        if !(lx > 0.0) || !(ly > 0.0) || !lx.is_finite() || !ly.is_finite() {
            return Err(Error::BadDomainLength { lx, ly });
        }
        Ok(Grid2D {
            nx,
            ny,
            lx,
            ly,
            kx: wavenumbers(nx, lx),
            ky: wavenumbers(ny, ly),
        })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn lx(&self) -> f64 {
        self.lx
    }

    pub fn ly(&self) -> f64 {
        self.ly
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        self.lx / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        self.ly / self.ny as f64
    }

    /// Quadrature weight of one cell.
    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dy()
    }

    pub fn kx(&self) -> &[f64] {
        &self.kx
    }

    pub fn ky(&self) -> &[f64] {
        &self.ky
    }

    pub fn x(&self, ix: usize) -> f64 {
        ix as f64 * self.dx() - 0.5 * self.lx
    }

    pub fn y(&self, iy: usize) -> f64 {
        iy as f64 * self.dy() - 0.5 * self.ly
    }

    /// Signed integer frequency of slot `i` along an axis of `n` points.
    pub fn freq_index(i: usize, n: usize) -> i64 {
        if i <= n / 2 - 1 {
            i as i64
        } else {
            i as i64 - n as i64
        }
    }

    /// True when two grids have identical layout (sizes and lengths).
    pub fn same_layout(&self, other: &Grid2D) -> bool {
        self.nx == other.nx && self.ny == other.ny && self.lx == other.lx && self.ly == other.ly
    }
}

impl PartialEq for Grid2D {
    fn eq(&self, other: &Self) -> bool {
        self.same_layout(other)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_wavenumbers_on_2pi_torus() {
        let g = Grid2D::new(64, 64, 2.0 * std::f64::consts::PI, 2.0 * std::f64::consts::PI)
            .unwrap();
        for m in 0..32 {
            assert!((g.kx()[m] - m as f64).abs() < 1e-12);
        }
        assert!((g.kx()[63] + 1.0).abs() < 1e-12);
        assert!((g.kx()[33] + 31.0).abs() < 1e-12);
        assert_eq!(g.kx()[0], 0.0);
    }

    #[test]
    fn nyquist_slot_carries_negative_frequency() {
        let g = Grid2D::new(8, 8, 2.0 * std::f64::consts::PI, 2.0 * std::f64::consts::PI)
            .unwrap();
        assert!((g.kx()[4] + 4.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_odd_and_tiny_sizes() {
        assert!(Grid2D::new(7, 8, 1.0, 1.0).is_err());
        assert!(Grid2D::new(8, 6, 1.0, 1.0).is_err());
        assert!(Grid2D::new(4, 4, 1.0, 1.0).is_err());
        assert!(Grid2D::new(8, 8, 0.0, 1.0).is_err());
        assert!(Grid2D::new(8, 8, 1.0, -2.0).is_err());
    }

    #[test]
    fn antisymmetry_except_nyquist() {
        let g = Grid2D::new(16, 16, 3.0, 3.0).unwrap();
        for m in 1..8 {
            assert!((g.kx()[m] + g.kx()[16 - m]).abs() < 1e-12);
        }
        assert!(g.dx() > 0.0 && g.dy() > 0.0);
    }
}
