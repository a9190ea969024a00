//! # depbound
//!
//! Sharp bounds on the expected value of a performance function `c(X, Y)` of
//! two dependent random channel gains when only the marginal laws of `X` and
//! `Y` are known.
//!
//! If `c` satisfies the Monge condition (is submodular), the expectation over
//! every joint law with the given marginals lies between the comonotonic and
//! the countermonotonic coupling:
//!
//! ```text
//! ∫₀¹ c(F_X⁻¹(u), F_Y⁻¹(u)) du  ≤  E[c(X, Y)]  ≤  ∫₀¹ c(F_X⁻¹(u), F_Y⁻¹(1 − u)) du
//! ```
//!
//! For supermodular `c` the two roles swap.
//!
//! ## Modules
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`marginals`] | Parametric marginal laws with CDF, quantile, density, mean, sampler |
//! | [`costs`] | Builtin performance functions (SINR, MAC rate, sum rate, secret key, ...) |
//! | [`monge`] | Grid checks of the Monge condition by cross differences or mixed partials |
//! | [`quadrature`] | Adaptive Gauss–Kronrod integration with error estimates |
//! | [`transport`] | Comonotonic / countermonotonic / independent expectations and bounds |
//! | [`sampler`] | Seeded Monte Carlo estimates under the three canonical couplings |
//! | [`collision`] | Two-user collision channel under arbitrary access dependence |
//! | [`tworay`] | Two-ray ground reflection envelopes at two stacked antennas |
//! | [`cli`] | The `depbound` command line front-end |
//!
//! ## Quick start
//!
//! ```rust
//! use depbound::{costs, marginals::Marginal, monge, transport};
//!
//! let sinr = costs::builtin("sinr", &[]).unwrap();
//! let fx = Marginal::exponential(1.0).unwrap();
//! let fy = Marginal::exponential(2.0).unwrap();
//! let report = monge::check_cross_difference(&sinr, monge::Rect::new(0.0, 5.0, 0.0, 5.0).unwrap(), 64, 1e-12).unwrap();
//! let b = transport::bounds(&sinr, &fx, &fy, &Default::default(), &report).unwrap();
//! assert!((b.lower - 0.555).abs() < 5e-3);
//! assert!((b.upper - 0.870).abs() < 5e-3);
//! ```

pub mod cli;
pub mod collision;
pub mod costs;
mod error;
pub mod marginals;
pub mod monge;
pub mod numfmt;
pub mod quadrature;
pub mod sampler;
pub mod transport;
pub mod tworay;

pub use error::{Error, Result};
