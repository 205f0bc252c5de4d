//! Chebyshev–Gauss–Lobatto machinery on the wall-normal interval `[0, 1]`.
//!
//! Nodes are ordered with increasing `y`: `y_j = (1 - cos(pi j / N)) / 2`, so
//! `y_0 = 0` and `y_N = 1` are the two walls. All derivative matrices are
//! already scaled to `d/dy`.

use nalgebra::DMatrix;
use std::f64::consts::PI;

/// Wall-normal nodes for `n + 1` Chebyshev–Gauss–Lobatto points on `[0, 1]`.
pub fn nodes(n: usize) -> Vec<f64> {
    (0..=n)
        .map(|j| {
            if j == 0 {
                0.0
            } else if j == n {
                1.0
            } else {
                // sin^2 form avoids cancellation near the walls.
                let s = (PI * j as f64 / (2.0 * n as f64)).sin();
                s * s
            }
        })
        .collect()
}

/// The reference coordinate `xi = 2y - 1 = -cos(pi j / N)`.
fn reference_nodes(n: usize) -> Vec<f64> {
    (0..=n).map(|j| -(PI * j as f64 / n as f64).cos()).collect()
}

/// First-derivative matrix `d/dy` on the `n + 1` nodes.
///
/// Off-diagonal entries use the trigonometric form of the node differences,
/// and the diagonal is set by the negative-sum trick so that constants are
/// differentiated to exactly zero.
pub fn diff_matrix(n: usize) -> DMatrix<f64> {
    assert!(n >= 2, "need at least three nodes");
    let np = n + 1;
    let weight = |j: usize| -> f64 {
        let c = if j == 0 || j == n { 2.0 } else { 1.0 };
        if j % 2 == 0 {
            c
        } else {
            -c
        }
    };
    let mut d = DMatrix::<f64>::zeros(np, np);
    let h = PI / (2.0 * n as f64);
    for i in 0..np {
        for j in 0..np {
            if i == j {
                continue;
            }
            // For x_j = cos(pi j/N): x_i - x_j = 2 sin((i+j)h) sin((j-i)h).
            let diff = 2.0 * ((i + j) as f64 * h).sin() * ((j as f64 - i as f64) * h).sin();
            d[(i, j)] = weight(i) / weight(j) / diff;
        }
    }
    for i in 0..np {
        let s: f64 = (0..np).filter(|&j| j != i).map(|j| d[(i, j)]).sum();
        d[(i, i)] = -s;
    }
    // Rows above were built for x = cos(.), which decreases with j. Our
    // xi = -x, and y = (1 + xi)/2, so d/dy = -2 d/dx.
    d * -2.0
}

/// Clenshaw–Curtis quadrature weights for `[0, 1]` on the `n + 1` nodes.
pub fn quadrature_weights(n: usize) -> Vec<f64> {
    let nf = n as f64;
    let mut w = vec![0.0; n + 1];
    let theta: Vec<f64> = (0..=n).map(|j| PI * j as f64 / nf).collect();
    if n % 2 == 0 {
        w[0] = 1.0 / (nf * nf - 1.0);
        w[n] = w[0];
        for j in 1..n {
            let mut v = 1.0;
            for k in 1..n / 2 {
                v -= 2.0 * (2.0 * k as f64 * theta[j]).cos() / (4.0 * (k * k) as f64 - 1.0);
            }
            v -= (nf * theta[j]).cos() / (nf * nf - 1.0);
            w[j] = 2.0 * v / nf;
        }
    } else {
        w[0] = 1.0 / (nf * nf);
        w[n] = w[0];
        for j in 1..n {
            let mut v = 1.0;
            for k in 1..=(n - 1) / 2 {
                v -= 2.0 * (2.0 * k as f64 * theta[j]).cos() / (4.0 * (k * k) as f64 - 1.0);
            }
            w[j] = 2.0 * v / nf;
        }
    }
    // Weights above integrate over [-1, 1]; the map to [0, 1] halves them.
    w.iter().map(|v| 0.5 * v).collect()
}

/// Barycentric interpolation matrix from the `n + 1` nodes to arbitrary
/// target points in `[0, 1]`. Exact for polynomials of degree `<= n`.
pub fn interpolation_matrix(n: usize, targets: &[f64]) -> DMatrix<f64> {
    let src = nodes(n);
    let bw: Vec<f64> = (0..=n)
        .map(|j| {
            let c = if j == 0 || j == n { 0.5 } else { 1.0 };
            if j % 2 == 0 {
                c
            } else {
                -c
            }
        })
        .collect();
    let mut m = DMatrix::<f64>::zeros(targets.len(), n + 1);
    for (r, &t) in targets.iter().enumerate() {
        if let Some(j) = src.iter().position(|&s| (s - t).abs() < 1e-15) {
            m[(r, j)] = 1.0;
            continue;
        }
        let terms: Vec<f64> = (0..=n).map(|j| bw[j] / (t - src[j])).collect();
        let total: f64 = terms.iter().sum();
        for j in 0..=n {
            m[(r, j)] = terms[j] / total;
        }
    }
    m
}

/// Matrix taking nodal values on `n + 1` nodes to Chebyshev coefficients
/// `a_k`, `k = 0..=n`, such that `f(xi) = sum a_k T_k(xi)` interpolates.
pub fn coefficient_matrix(n: usize) -> DMatrix<f64> {
    let nf = n as f64;
    let c = |j: usize| if j == 0 || j == n { 2.0 } else { 1.0 };
    DMatrix::from_fn(n + 1, n + 1, |k, j| {
        // T_k(-cos(pi j/N)) = (-1)^k cos(pi j k / N)
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let t = sign * (PI * (j * k) as f64 / nf).cos();
        2.0 / (nf * c(k) * c(j)) * t
    })
}

/// Matrix evaluating a Chebyshev series with `m` coefficients at `targets`.
pub fn evaluation_matrix(m: usize, targets: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(targets.len(), m, |r, k| {
        let xi = (2.0 * targets[r] - 1.0).clamp(-1.0, 1.0);
        (k as f64 * xi.acos()).cos()
    })
}

/// Derivative matrices `D^0 ..= D^order` on all nodes.
pub fn derivative_powers(n: usize, order: usize) -> Vec<DMatrix<f64>> {
    let d = diff_matrix(n);
    let mut out = vec![DMatrix::<f64>::identity(n + 1, n + 1)];
    for k in 1..=order {
        let next = &d * &out[k - 1];
        out.push(next);
    }
    out
}

/// Derivative matrices for functions with a double zero at both walls.
///
/// The function is represented as `f = (1 - xi^2) p(xi)` where `p` is the
/// degree-`n` interpolant with `p(+-1) = 0` and `p_j = f_j / (1 - xi_j^2)`
/// on the interior. The returned matrices map the `n - 1` interior values of
/// `f` to the `m`-th `y`-derivative at all `n + 1` nodes, so `f = f' = 0`
/// holds at both walls by construction.
pub fn clamped_derivatives(n: usize, order: usize) -> Vec<DMatrix<f64>> {
    let xi = reference_nodes(n);
    let mut dxi = derivative_powers(n, order);
    // derivative_powers is in y; convert back to xi derivatives.
    for (m, mat) in dxi.iter_mut().enumerate() {
        *mat /= 2f64.powi(m as i32);
    }
    let np = n + 1;
    let mut scale = DMatrix::<f64>::zeros(np, n - 1);
    for j in 1..n {
        scale[(j, j - 1)] = 1.0 / (1.0 - xi[j] * xi[j]);
    }
    (0..=order)
        .map(|m| {
            let mut g = DMatrix::<f64>::zeros(np, np);
            for i in 0..np {
                for j in 0..np {
                    let mut v = (1.0 - xi[i] * xi[i]) * dxi[m][(i, j)];
                    if m >= 1 {
                        v -= 2.0 * m as f64 * xi[i] * dxi[m - 1][(i, j)];
                    }
                    if m >= 2 {
                        v -= (m * (m - 1)) as f64 * dxi[m - 2][(i, j)];
                    }
                    g[(i, j)] = v;
                }
            }
            (g * &scale) * 2f64.powi(m as i32)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_hit_walls_exactly_and_increase() {
        let y = nodes(16);
        assert_eq!(y[0], 0.0);
        assert_eq!(y[16], 1.0);
        assert!(y.windows(2).all(|w| w[1] > w[0]));
        assert!((y[8] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn differentiates_polynomials_exactly() {
        let n = 12;
        let y = nodes(n);
        let d = diff_matrix(n);
        let f: Vec<f64> = y.iter().map(|&t| t.powi(5) - 3.0 * t * t + 1.0).collect();
        let df = &d * nalgebra::DVector::from_vec(f);
        for (j, &t) in y.iter().enumerate() {
            let exact = 5.0 * t.powi(4) - 6.0 * t;
            assert!((df[j] - exact).abs() < 1e-11, "{} vs {}", df[j], exact);
        }
    }

    #[test]
    fn weights_integrate_polynomials() {
        for n in [8, 9, 16, 33] {
            let w = quadrature_weights(n);
            let y = nodes(n);
            let s: f64 = w.iter().sum();
            assert!((s - 1.0).abs() < 1e-14);
            let q: f64 = w.iter().zip(&y).map(|(w, y)| w * y.powi(6)).sum();
            assert!((q - 1.0 / 7.0).abs() < 1e-14);
        }
    }

    #[test]
    fn interpolation_is_exact_for_low_degree() {
        let n = 10;
        let y = nodes(n);
        let targets = [0.1234, 0.5, 0.987, 0.0];
        let m = interpolation_matrix(n, &targets);
        let f = nalgebra::DVector::from_iterator(n + 1, y.iter().map(|t| t.powi(7) - t));
        let v = m * f;
        for (r, &t) in targets.iter().enumerate() {
            assert!((v[r] - (t.powi(7) - t)).abs() < 1e-13);
        }
    }

    #[test]
    fn coefficients_round_trip_through_evaluation() {
        let n = 14;
        let y = nodes(n);
        let f = nalgebra::DVector::from_iterator(n + 1, y.iter().map(|t| (3.0 * t).sin()));
        let a = coefficient_matrix(n) * &f;
        let back = evaluation_matrix(n + 1, &y) * a;
        assert!((back - f).amax() < 1e-13);
    }

    #[test]
    fn clamped_representation_has_double_zero_at_walls() {
        let n = 20;
        let y = nodes(n);
        let ops = clamped_derivatives(n, 4);
        // f = y^2 (1-y)^2 sin(y) has f = f' = 0 at both walls.
        let f = |t: f64| t * t * (1.0 - t) * (1.0 - t) * t.sin();
        let interior = nalgebra::DVector::from_iterator(n - 1, y[1..n].iter().map(|&t| f(t)));
        let v0 = &ops[0] * &interior;
        let v1 = &ops[1] * &interior;
        assert_eq!(v0[0], 0.0);
        assert_eq!(v0[n], 0.0);
        assert!(v1[0].abs() < 1e-14 && v1[n].abs() < 1e-14);
        // derivative accuracy against a finite-difference oracle
        let h = 1e-5;
        for j in 1..n {
            let t = y[j];
            let fd = (f(t + h) - f(t - h)) / (2.0 * h);
            assert!((v1[j] - fd).abs() < 1e-7, "j={j}: {} vs {}", v1[j], fd);
        }
    }
}
