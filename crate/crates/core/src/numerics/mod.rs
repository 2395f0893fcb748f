//! Distribution functions, quadrature, root finding and procedure constants.

mod constants;
mod dist;
mod quadrature;
mod roots;
pub mod special;

pub use constants::{
    bechhofer_h, bechhofer_h_solved, equicorrelated_max_cdf, kn_eta, kn_h2, rinott_h,
    rinott_h_solved, RinottIntegral, Solved,
};
pub(crate) use dist::acklam;
pub use dist::{
    normal_cdf, normal_pdf, normal_quantile, t_cdf, t_pdf, t_quantile, StudentT,
};
pub use quadrature::{integrate, Quadrature, DEFAULT_HALFWIDTH, DEFAULT_NODE_COUNT};
pub use roots::{find_root, DEFAULT_ROOT_TOL};
