//! Gauss-Legendre quadrature on `[-1, 1]` and its tensor product over a box.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

use super::domain::DomainBox;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`,
/// exact for polynomials of degree `2n - 1`. Computed via the Golub-Welsch
/// eigenvalue problem of the Jacobi matrix.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "quadrature order must be positive");
    if n == 1 {
        return (vec![0.0], vec![2.0]);
    }
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for j in 1..n {
        let jf = j as f64;
        let beta = jf / (4.0 * jf * jf - 1.0).sqrt();
        jacobi[(j - 1, j)] = beta;
        jacobi[(j, j - 1)] = beta;
    }
    let eig = jacobi.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let node = eig.eigenvalues[i];
            let first = eig.eigenvectors[(0, i)];
            (node, 2.0 * first * first)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Tensor-product Gauss-Legendre grid over a box, with weights normalized to
/// the uniform probability measure (they sum to one).
pub(crate) struct QuadratureGrid {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl QuadratureGrid {
    pub fn new(domain: &DomainBox, points_per_axis: usize) -> Result<Self> {
        let dim = domain.dim();
        let total = (points_per_axis as u128).checked_pow(dim as u32).ok_or_else(|| {
            Error::Capacity(format!(
                "{points_per_axis}^{dim} quadrature points overflow"
            ))
        })?;
        if total > 20_000_000 {
            return Err(Error::Capacity(format!(
                "{total} quadrature points exceed the supported grid size"
            )));
        }
        let (nodes, weights) = gauss_legendre(points_per_axis);
        let total = total as usize;
        let mut points = Vec::with_capacity(total);
        let mut wprod = Vec::with_capacity(total);
        let norm = 2.0_f64.powi(dim as i32);
        let mut idx = vec![0usize; dim];
        loop {
            let mut x = Vec::with_capacity(dim);
            let mut w = 1.0;
            for m in 0..dim {
                x.push(domain.from_unit(m, nodes[idx[m]]));
                w *= weights[idx[m]];
            }
            points.push(x);
            wprod.push(w / norm);
            // Odometer increment over the tensor grid.
            let mut m = dim;
            loop {
                if m == 0 {
                    return Ok(Self {
                        points,
                        weights: wprod,
                    });
                }
                m -= 1;
                idx[m] += 1;
                if idx[m] < points_per_axis {
                    break;
                }
                idx[m] = 0;
            }
        }
    }
}
