//! Losses, the ADMM optimizer and the pseudo-inverse path for squared loss.

mod admm;
mod loss;
mod pinv;

pub use admm::{
    fit_admm, u_update, v_update_newton, v_update_prox_hinge, w_update, AdmmConfig, FitReport,
    UStep,
};
pub use loss::{check_labels, sigmoid, softplus, LossKind};
pub use pinv::{fit_pinv, pinv_solve, PINV_RCOND};
