//! Periodic uniform B-spline spaces on the unit circle: circulant Gram
//! systems, L² projection and quasiinterpolation.

mod banded;
pub mod bspline;
pub mod circulant;
mod error;
pub mod gram;
pub mod projection;
pub mod quadrature;
pub mod quasi;

pub use bspline::{
    cardinal_bspline_eval, cardinal_bspline_fourier, periodic_basis_eval, PeriodicSpline, SplineSpace,
    MAX_ORDER,
};
pub use circulant::{
    assemble_antisymmetric, assemble_symmetric, demko_bound, shift_apply, AntisymmetricStencil,
    CirculantMatrix, DemkoBound, SymmetricStencil, DEFAULT_SOLVE_TOL,
};
pub use error::{Error, Result};
pub use gram::{
    certify_decay, cosine_symbol, decay_constants_from_band, fit_decay, gram_circulant, gram_matrix, gram_stencil,
    spectral_bounds, weighted_gamma_sum, BandedTruncation, DecayCertificate, GramSystem, SpectralBounds,
    SymbolEvaluator,
};
pub use quadrature::CellRule;
