//! Discrete geometry of the flat torus: grids, spectral derivatives,
//! matrix-valued forms and their exterior calculus.

pub mod background;
pub mod calculus;
pub mod form;
pub mod grid;
pub mod spectral;

pub use background::Background;
pub use calculus::{
    adjoint_form, background_curvature, band_limit_form, contract_against_volume, contract_top,
    dbar, del, integrate, integrate_scalar, kahler_form, top_coeff, unit_form, volume, wedge,
    wedge_power,
};
pub use form::{binomial, index_sets, EndForm};
pub use grid::GridField;
pub use spectral::{band_limit, field_from_fn};
