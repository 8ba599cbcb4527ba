//! Tensor-product Legendre bases of total degree `<= n` on a hypercube,
//! with gradient evaluation and the least-squares stability diagnostics.

mod domain;
mod index;
mod legendre;
mod quadrature;
mod stability;
mod total_degree;

pub use domain::DomainBox;
pub use index::{enumerate_indices, MultiIndex};
pub use legendre::legendre_eval_with_deriv;
pub use quadrature::gauss_legendre;
pub(crate) use quadrature::QuadratureGrid;
pub use stability::{check_stability, kn_estimate, kn_estimate_at, StabilityDiagnostic};
pub use total_degree::{BasisWorkspace, DomainPolicy, TotalDegreeBasis};
