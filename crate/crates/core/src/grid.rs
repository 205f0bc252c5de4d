use crate::cheb;
use crate::error::{LabError, Result};
use nalgebra::DMatrix;
use std::sync::Arc;

/// Periodic-in-`x`, wall-bounded-in-`y` channel `[0, Lx) x [0, 1]`.
///
/// `x` nodes are uniform; `y` nodes are Chebyshev–Gauss–Lobatto points
/// clustered at the walls, with both walls included exactly.
#[derive(Debug, Clone)]
pub struct ChannelGrid {
    lx: f64,
    nx: usize,
    ny: usize,
    x: Vec<f64>,
    y: Vec<f64>,
    wy: Vec<f64>,
    dy: DMatrix<f64>,
}

impl ChannelGrid {
    pub fn new(lx: f64, nx: usize, ny: usize) -> Result<Self> {
        if !(lx.is_finite() && lx > 0.0) {
            return Err(LabError::InvalidGrid(format!(
                "Lx must be positive, got {lx}"
            )));
        }
        if nx < 8 || nx % 2 != 0 {
            return Err(LabError::InvalidGrid(format!(
                "Nx must be even and >= 8, got {nx}"
            )));
        }
        if ny < 9 {
            return Err(LabError::InvalidGrid(format!("Ny must be >= 9, got {ny}")));
        }
        let x = (0..nx).map(|i| lx * i as f64 / nx as f64).collect();
        Ok(ChannelGrid {
            lx,
            nx,
            ny,
            x,
            y: cheb::nodes(ny - 1),
            wy: cheb::quadrature_weights(ny - 1),
            dy: cheb::diff_matrix(ny - 1),
        })
    }

    pub fn lx(&self) -> f64 {
        self.lx
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// Quadrature weights in `y` (Clenshaw–Curtis, sum to 1).
    pub fn y_weights(&self) -> &[f64] {
        &self.wy
    }

    /// Uniform trapezoid weight in `x`, `Lx / Nx`.
    pub fn x_weight(&self) -> f64 {
        self.lx / self.nx as f64
    }

    /// `d/dy` on the wall-normal nodes.
    pub fn dy_matrix(&self) -> &DMatrix<f64> {
        &self.dy
    }

    /// Admissible streamwise wavenumber for mode index `k`.
    pub fn wavenumber(&self, k: usize) -> f64 {
        2.0 * std::f64::consts::PI * k as f64 / self.lx
    }

    /// Flat index of node `(i, j)`, x-fastest.
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn same_shape(&self, other: &ChannelGrid) -> bool {
        self.nx == other.nx && self.ny == other.ny && self.lx == other.lx
    }
}

/// Validating constructor returning a shareable grid.
pub fn make_grid(lx: f64, nx: usize, ny: usize) -> Result<Arc<ChannelGrid>> {
    ChannelGrid::new(lx, nx, ny).map(Arc::new)
}
