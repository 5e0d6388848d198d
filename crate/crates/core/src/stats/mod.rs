//! Statistics over shot distributions and run corpora.

pub mod bound;
pub mod corr;
pub mod extrap;
pub mod maxima;

pub use bound::{binomial_alpha, gaussian_bound_check, BoundRow};
pub use corr::{
    binned_g2, fit_xi, n_star, spin_correlations, Aggregate, CorrFit, CorrSample, G2Curve,
};
pub use extrap::{fit_extrapolation, regressor, ExtrapFit, ExtrapSample, Prediction};
pub use maxima::{expected_max_ratio, expected_max_value, mean_ratio, EnergyCdf};
