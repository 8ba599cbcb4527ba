//! Tensor-product Legendre basis of all multi-indices with `|i| <= n`.

use crate::error::{Error, Result};
use crate::phase::StateVector;

use super::domain::DomainBox;
use super::index::{enumerate_indices, MultiIndex};
use super::legendre::legendre_table;

/// What to do with evaluation points outside the domain box.
///
/// `Strict` rejects points further than `1e-9` of the coordinate extent
/// outside; `Clamp` projects onto the box. Trajectories of learned systems
/// can leave the training domain, so extrapolation-by-clamping is an explicit
/// opt-in rather than a silent default.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainPolicy {
    Strict,
    Clamp,
}

const STRICT_REL_TOL: f64 = 1e-9;

/// Basis of the polynomial space `W = P_n^{2d}` on a hypercube: products of
/// univariate Legendre polynomials composed with the affine map onto
/// `[-1, 1]` per coordinate. The zero index (the constant) comes first; the
/// gradient space `V` spans the gradients of the remaining `dim_w - 1`
/// functions.
#[derive(Debug, Clone)]
pub struct TotalDegreeBasis {
    degree: u32,
    domain: DomainBox,
    indices: Vec<MultiIndex>,
    policy: DomainPolicy,
}

/// Reusable per-point scratch: mapped coordinates and the univariate
/// value/derivative tables.
#[derive(Debug, Clone)]
pub struct BasisWorkspace {
    s: Vec<f64>,
    vals: Vec<f64>,
    ders: Vec<f64>,
    stride: usize,
}

impl BasisWorkspace {
    fn new(degree: u32, dim: usize) -> Self {
        let stride = degree as usize + 1;
        Self {
            s: vec![0.0; dim],
            vals: vec![0.0; stride * dim],
            ders: vec![0.0; stride * dim],
            stride,
        }
    }

    #[inline]
    fn val(&self, m: usize, k: u32) -> f64 {
        self.vals[m * self.stride + k as usize]
    }

    #[inline]
    fn der(&self, m: usize, k: u32) -> f64 {
        self.ders[m * self.stride + k as usize]
    }
}

impl TotalDegreeBasis {
    /// Build the basis of total degree `n >= 1` on the given box.
    pub fn new(degree: u32, domain: DomainBox) -> Result<Self> {
        if degree == 0 {
            return Err(Error::Argument(
                "basis degree must be at least 1 (the constant alone has no gradient space)"
                    .into(),
            ));
        }
        let indices = enumerate_indices(degree, domain.dim())?;
        Ok(Self {
            degree,
            domain,
            indices,
            policy: DomainPolicy::Strict,
        })
    }

    pub fn with_policy(mut self, policy: DomainPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn domain(&self) -> &DomainBox {
        &self.domain
    }

    pub fn policy(&self) -> DomainPolicy {
        self.policy
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    /// Dimension of `W = P_n^{2d}`.
    pub fn dim_w(&self) -> usize {
        self.indices.len()
    }

    /// Dimension of the gradient space `V` (the constant drops out).
    pub fn dim_v(&self) -> usize {
        self.indices.len() - 1
    }

    /// Phase-space dimension `2d`.
    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    /// Degrees of freedom `d`.
    pub fn dim_d(&self) -> usize {
        self.domain.dim_d()
    }

    pub fn workspace(&self) -> BasisWorkspace {
        BasisWorkspace::new(self.degree, self.dim())
    }

    /// Map a point into the reference cube under the domain policy and fill
    /// the univariate tables.
    pub(crate) fn prepare(&self, x: &[f64], ws: &mut BasisWorkspace) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "point dimension {} does not match basis dimension {}",
                x.len(),
                self.dim()
            )));
        }
        if self.policy == DomainPolicy::Strict && !self.domain.contains(x, STRICT_REL_TOL) {
            return Err(Error::Domain(format!(
                "point {x:?} leaves the box [{:?}, {:?}] beyond the {STRICT_REL_TOL} relative tolerance",
                self.domain.lower(),
                self.domain.upper()
            )));
        }
        let stride = ws.stride;
        for m in 0..self.dim() {
            ws.s[m] = self.domain.to_unit(m, x[m]).clamp(-1.0, 1.0);
            legendre_table(
                self.degree,
                ws.s[m],
                &mut ws.vals[m * stride..(m + 1) * stride],
                &mut ws.ders[m * stride..(m + 1) * stride],
            );
        }
        Ok(())
    }

    #[inline]
    pub(crate) fn eval_prepared(&self, j: usize, ws: &BasisWorkspace) -> f64 {
        let mut prod = 1.0;
        for (m, &k) in self.indices[j].exponents().iter().enumerate() {
            prod *= ws.val(m, k);
        }
        prod
    }

    pub(crate) fn grad_prepared(&self, j: usize, ws: &BasisWorkspace, out: &mut [f64]) {
        let exps = self.indices[j].exponents();
        let dim = exps.len();
        for m in 0..dim {
            let mut comp = self.domain.chain_factor(m) * ws.der(m, exps[m]);
            if comp != 0.0 {
                for (mm, &k) in exps.iter().enumerate() {
                    if mm != m {
                        comp *= ws.val(mm, k);
                    }
                }
            }
            out[m] = comp;
        }
    }

    /// `phi_j(x)`: product of mapped univariate Legendre values.
    pub fn eval(&self, j: usize, x: &StateVector) -> Result<f64> {
        self.check_j(j)?;
        let mut ws = self.workspace();
        self.prepare(x.values(), &mut ws)?;
        Ok(self.eval_prepared(j, &ws))
    }

    /// `grad phi_j(x)` with the affine chain-rule factor per coordinate.
    pub fn grad(&self, j: usize, x: &StateVector) -> Result<Vec<f64>> {
        self.check_j(j)?;
        let mut ws = self.workspace();
        self.prepare(x.values(), &mut ws)?;
        let mut out = vec![0.0; self.dim()];
        self.grad_prepared(j, &ws, &mut out);
        Ok(out)
    }

    /// All basis values at a point; `out` has `dim_w` entries.
    pub fn eval_all(&self, x: &[f64], ws: &mut BasisWorkspace, out: &mut [f64]) -> Result<()> {
        self.prepare(x, ws)?;
        for j in 0..self.dim_w() {
            out[j] = self.eval_prepared(j, ws);
        }
        Ok(())
    }

    /// All gradients at a point, row-major: `out[j * dim + m]` holds the
    /// `m`-th component of `grad phi_j(x)`.
    pub fn grad_all(&self, x: &[f64], ws: &mut BasisWorkspace, out: &mut [f64]) -> Result<()> {
        self.prepare(x, ws)?;
        let dim = self.dim();
        for j in 0..self.dim_w() {
            let row = &mut out[j * dim..(j + 1) * dim];
            self.grad_prepared(j, ws, row);
        }
        Ok(())
    }

    fn check_j(&self, j: usize) -> Result<()> {
        if j >= self.dim_w() {
            return Err(Error::Argument(format!(
                "basis index {j} out of range (dim_w = {})",
                self.dim_w()
            )));
        }
        Ok(())
    }
}
