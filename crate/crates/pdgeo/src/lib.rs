//! Geometry and geometric algorithms on PD(n), the manifold of symmetric
//! positive-definite matrices with the affine-invariant metric.
//!
//! The crate is built around horofunctions — limits of normalized distance
//! functions along geodesic rays — whose sublevel sets (horoballs) stand in
//! for halfspaces. Two constructions sit on top:
//!
//! * [`hull::build_eps_ball_hull`]: a finite intersection of horoballs whose
//!   extent along every geodesic ray through the origin matches the extent of
//!   the input set up to `epsilon`;
//! * [`center::approx_horo_center`]: a point contained, up to `epsilon`, in
//!   every horoball holding more than `N*d/(d+1)` of the `N` input points,
//!   where `d = n(n+1)/2`.
//!
//! All numeric kernels are generic over the scalar type through
//! [`scalar::Real`] (`f32` or `f64`). The aliases at the crate root pin
//! `f64`, which is what the CLI and the test suites use.

pub mod center;
pub mod chull;
mod error;
pub mod grid;
pub mod horo;
pub mod hull;
pub mod json;
pub mod mat;
pub mod oracle;
pub mod scalar;
pub mod spd;

pub use error::Error;
pub use scalar::Real;

pub type Result<V> = std::result::Result<V, Error>;

/// `f64` aliases for the core types.
pub type SqMatrix = mat::SqMatrix<f64>;
pub type SymMatrix = spd::SymMatrix<f64>;
pub type SymEig = spd::SymEig<f64>;
pub type SpdPoint = spd::SpdPoint<f64>;
pub type Geodesic = spd::Geodesic<f64>;
pub type Flat = horo::Flat<f64>;
pub type Horofunction = horo::Horofunction<f64>;
pub type Horoball = horo::Horoball<f64>;
pub type HoroDecomposition = horo::HoroDecomposition<f64>;
pub type GivensFactor = grid::GivensFactor<f64>;
pub type DirectionGrid = grid::DirectionGrid<f64>;
pub type FlatChart = hull::FlatChart<f64>;
pub type BallHull = hull::BallHull<f64>;
pub type ConstraintSet = center::ConstraintSet<f64>;
pub type CenterResult = center::CenterResult<f64>;
pub type SampledHull = oracle::SampledHull<f64>;
