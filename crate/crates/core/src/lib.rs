//! Skew loops: construction on cylinders over asymmetric ovals, certified
//! verification for closed space curves, and numerical checks of the
//! invariants that rule skew loops out on positively curved quadrics.

pub mod arclength;
pub mod bounds;
pub mod construct;
pub mod curve;
pub mod io;
pub mod oval;
pub mod quadrature;
pub mod quadric;
pub mod trigpoly;
pub mod verify;

pub type Vec3 = nalgebra::Vector3<f64>;
pub type Mat3 = nalgebra::Matrix3<f64>;

pub use bounds::BoundBox;
pub use construct::{construct_height, construct_mu, cylinder_margin, build_cylinder_loop, HeightFunction};
pub use curve::{AffineStatus, AnalyticCurve, SampledC1, SmoothLoop, SpaceCurve};
pub use oval::{PlanarOval, SupportFunction};
pub use trigpoly::TrigPoly;
pub use verify::{verify_skew, SkewCertificate, SkewStatus, VerifyOptions};
