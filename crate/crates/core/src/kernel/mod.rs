//! The radial profile f_N of the biharmonic heat kernel
//! b_N(x, t) = α_N t^{−N/4} f_N(|x| / t^{1/4}).

mod bessel;
mod profile;
mod quad;
mod table;

pub use profile::{
    alpha_normalization, eval_f, eval_f_deriv, eval_f_jet, kernel_mass, lq_scaling_mass,
    ode_operator, ode_residual, radial_moment, unit_sphere_area, QuadratureMethod, QuadratureSpec,
    RADIAL_CUTOFF,
};
pub use quad::gauss_legendre;
pub use table::{build_kernel_table, Envelope, KernelTable};
