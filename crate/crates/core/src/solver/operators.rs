//! Wall-normal operators shared by every streamwise mode.

use crate::cheb;
use nalgebra::DMatrix;

/// Collocation derivatives on the solver nodes plus the transfer matrices to
/// and from the (optionally padded) grid on which products are formed.
#[derive(Debug, Clone)]
pub(crate) struct WallNormalOps {
    /// `d^m/dy^m`, `m = 0..=4`, on the `Ny` solver nodes.
    pub d: Vec<DMatrix<f64>>,
    /// Values of `d^m/dy^m`, `m = 0..=3`, at the product nodes.
    pub to_fine: Vec<DMatrix<f64>>,
    /// Product nodes back to solver nodes (Chebyshev truncation).
    pub from_fine: DMatrix<f64>,
    /// Product-grid nodes and local spacing, used by the CFL estimate.
    pub fine_y: Vec<f64>,
    pub fine_dy: Vec<f64>,
}

impl WallNormalOps {
    pub fn new(ny: usize, pad: bool) -> Self {
        let n = ny - 1;
        let d = cheb::derivative_powers(n, 4);
        let (to_fine, from_fine, fine_y) = if pad {
            // 3/2 rule: products of two degree-n polynomials keep exact
            // Chebyshev coefficients up to n when m > 3n/2.
            let m = (3 * n).div_ceil(2) + 1;
            let fine_y = cheb::nodes(m);
            let interp = cheb::interpolation_matrix(n, &fine_y);
            let to_fine = (0..=3).map(|k| &interp * &d[k]).collect();
            let coeffs = cheb::coefficient_matrix(m);
            let eval = cheb::evaluation_matrix(n + 1, &cheb::nodes(n));
            let from_fine = eval * coeffs.rows(0, n + 1);
            (to_fine, from_fine, fine_y)
        } else {
            let to_fine = (0..=3).map(|k| d[k].clone()).collect();
            (to_fine, DMatrix::identity(ny, ny), cheb::nodes(n))
        };
        let fine_dy = local_spacing(&fine_y);
        WallNormalOps {
            d,
            to_fine,
            from_fine,
            fine_y,
            fine_dy,
        }
    }

    pub fn fine_len(&self) -> usize {
        self.fine_y.len()
    }
}

fn local_spacing(y: &[f64]) -> Vec<f64> {
    let n = y.len();
    (0..n)
        .map(|j| {
            let left = if j > 0 {
                y[j] - y[j - 1]
            } else {
                f64::INFINITY
            };
            let right = if j + 1 < n {
                y[j + 1] - y[j]
            } else {
                f64::INFINITY
            };
            left.min(right)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    #[test]
    fn padded_projection_is_exact_for_products_of_resolved_polynomials() {
        let ny = 17;
        let n = ny - 1;
        let ops = WallNormalOps::new(ny, true);
        let y = cheb::nodes(n);
        // degree-n factors; their product has degree 2n
        let f = |t: f64| cheb_t(n, 2.0 * t - 1.0) + t;
        let g = |t: f64| cheb_t(n - 1, 2.0 * t - 1.0) - 0.5 * t * t;
        let fv = DVector::from_iterator(ny, y.iter().map(|&t| f(t)));
        let gv = DVector::from_iterator(ny, y.iter().map(|&t| g(t)));
        let ff = &ops.to_fine[0] * fv;
        let gf = &ops.to_fine[0] * gv;
        let prod = ff.component_mul(&gf);
        let back = &ops.from_fine * prod;
        // oracle: truncate the exact Chebyshev series of f*g, computed on a
        // much finer grid where no aliasing can occur
        let big = 4 * n;
        let yb = cheb::nodes(big);
        let exact = DVector::from_iterator(big + 1, yb.iter().map(|&t| f(t) * g(t)));
        let a = cheb::coefficient_matrix(big) * exact;
        let truncated = cheb::evaluation_matrix(n + 1, &y) * a.rows(0, n + 1);
        assert!((back - truncated).amax() < 1e-12);
    }

    fn cheb_t(k: usize, x: f64) -> f64 {
        (k as f64 * x.clamp(-1.0, 1.0).acos()).cos()
    }

    #[test]
    fn unpadded_is_identity_transfer() {
        let ops = WallNormalOps::new(9, false);
        assert_eq!(ops.fine_len(), 9);
        assert_eq!(ops.from_fine, DMatrix::identity(9, 9));
    }
}
