//! Polynomial kernel, kernel centers and the explicit monomial form of a
//! fitted model.

mod kernel;
mod model;
mod multi_index;
mod sparse;

pub use kernel::{
    build_centers, kernel_eval, kernel_matrix, validate_fundamental_system, CenterSet,
    CenterStrategy, FundamentalCheck,
};
pub use model::{classify, predict_kernel, KernelModel, Scaling};
pub use multi_index::{
    binomial, enumerate_multi_indices, multinomial, polynomial_space_dim, MultiIndex, MAX_DEGREE,
};
pub use sparse::{expand_to_monomials, predict_sparse, SparsePolynomial};
