//! Axis-aligned hypercube domain in phase space with the affine map to the
//! Legendre reference cube `[-1, 1]^{2d}`.

use rand::Rng;

use crate::error::{Error, Result};

/// Bounded box `prod_m [a_m, b_m]` with even dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl DomainBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() || lower.len() % 2 != 0 {
            return Err(Error::Dimension(format!(
                "domain bounds must share a positive even length, got {} and {}",
                lower.len(),
                upper.len()
            )));
        }
        for m in 0..lower.len() {
            if !(lower[m].is_finite() && upper[m].is_finite() && lower[m] < upper[m]) {
                return Err(Error::Argument(format!(
                    "domain coordinate {m} needs finite a < b, got [{}, {}]",
                    lower[m], upper[m]
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The reference cube `[-1, 1]^dim`.
    pub fn unit(dim: usize) -> Result<Self> {
        Self::new(vec![-1.0; dim], vec![1.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn dim_d(&self) -> usize {
        self.lower.len() / 2
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn extent(&self, m: usize) -> f64 {
        self.upper[m] - self.lower[m]
    }

    /// Affine map of coordinate `m` onto `[-1, 1]`. The numerator groups the
    /// bounds so the map is exactly the identity on `[-1, 1]` itself.
    pub fn to_unit(&self, m: usize, x: f64) -> f64 {
        (2.0 * x - (self.lower[m] + self.upper[m])) / (self.upper[m] - self.lower[m])
    }

    /// Inverse of [`Self::to_unit`].
    pub fn from_unit(&self, m: usize, s: f64) -> f64 {
        0.5 * (self.lower[m] + self.upper[m]) + 0.5 * s * (self.upper[m] - self.lower[m])
    }

    /// Chain-rule factor `ds/dx = 2 / (b_m - a_m)` of the affine map.
    pub fn chain_factor(&self, m: usize) -> f64 {
        2.0 / (self.upper[m] - self.lower[m])
    }

    /// Containment with a tolerance relative to each coordinate extent.
    pub fn contains(&self, x: &[f64], rel_tol: f64) -> bool {
        x.len() == self.dim()
            && (0..self.dim()).all(|m| {
                let slack = rel_tol * self.extent(m);
                x[m] >= self.lower[m] - slack && x[m] <= self.upper[m] + slack
            })
    }

    /// Project a point onto the box.
    pub fn clamp_point(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim())
            .map(|m| x[m].clamp(self.lower[m], self.upper[m]))
            .collect()
    }

    /// One uniform draw from the box.
    pub fn sample_uniform<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        (0..self.dim())
            .map(|m| rng.random_range(self.lower[m]..self.upper[m]))
            .collect()
    }

    /// The box shrunk by `margin_m = frac * extent_m` per side, for sampling
    /// points whose finite-difference stencils must stay inside.
    pub fn shrunk(&self, frac: f64) -> Result<Self> {
        let lower = (0..self.dim())
            .map(|m| self.lower[m] + frac * self.extent(m))
            .collect();
        let upper = (0..self.dim())
            .map(|m| self.upper[m] - frac * self.extent(m))
            .collect();
        Self::new(lower, upper)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_bounds() {
        assert!(DomainBox::new(vec![0.0, 0.0], vec![1.0]).is_err());
        assert!(DomainBox::new(vec![0.0], vec![1.0]).is_err()); // odd dim
        assert!(DomainBox::new(vec![1.0, 0.0], vec![0.0, 1.0]).is_err()); // a >= b
        assert!(DomainBox::new(vec![f64::NEG_INFINITY, 0.0], vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn affine_map_round_trip() {
        let b = DomainBox::new(vec![0.0, -2.0], vec![2.0, 4.0]).unwrap();
        assert_eq!(b.to_unit(0, 1.5), 0.5);
        assert_eq!(b.to_unit(1, -2.0), -1.0);
        assert_eq!(b.to_unit(1, 4.0), 1.0);
        assert!((b.from_unit(0, b.to_unit(0, 0.77)) - 0.77).abs() < 1e-15);
        assert_eq!(b.chain_factor(0), 1.0);
        assert!((b.chain_factor(1) - 1.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn containment_uses_relative_tolerance() {
        let b = DomainBox::new(vec![0.0, 0.0], vec![10.0, 10.0]).unwrap();
        assert!(b.contains(&[10.0 + 1e-9 * 10.0 * 0.5, 5.0], 1e-9));
        assert!(!b.contains(&[10.0 + 1e-7, 5.0], 1e-9));
        assert!(!b.contains(&[5.0], 1e-9));
    }
}
