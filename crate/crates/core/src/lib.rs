//! Certification of area-minimizing cones over minimal links.
//!
//! A regular minimal cone `C(L)` is area-minimizing when its vanishing angle
//! `θ0` exists and `θ0 ≤ R(L)/2`, where `R(L)` is the normal radius of the
//! link. This crate provides link data (catalog and user supplied), minimal
//! products, vanishing-angle solvers for several curvature bounds, and the
//! searches built on top of them.

pub mod certify;
pub mod error;
pub mod links;
mod ode;
pub mod product;
mod series;
pub mod vanishing;

pub use certify::{certify, Certificate, Certifier, Strategy, Verdict};
pub use error::{Error, Result};
pub use links::{catalog_enumerate, classify, CatalogId, Link, SlopeClass};
pub use product::{minimal_product, minimal_product_with, ProductOptions};
pub use vanishing::{
    theta_F, theta_c, theta_det, vanishing_angle, vanishing_angle_gform, BoundEvaluator, BoundKind,
    Outcome, SolverOptions, VanishingResult,
};
