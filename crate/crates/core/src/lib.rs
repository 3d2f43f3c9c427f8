#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod field;
pub mod geodesic;
pub mod lump;
pub mod moduli;
pub mod ode;
pub mod poly;
pub mod quadrature;
pub mod special;
pub mod verify;
pub mod xi0;

pub use error::{Error, Result};
pub use field::{FieldGrid, GridSpec};
pub use geodesic::{
    ConservedQuantities, GammaLine, GeodesicOutcome, GeodesicState, ScatteringFamily, Trajectory,
};
pub use lump::{CylinderPoint, IsometryTag, RationalLump, TargetValue};
pub use moduli::{CollapseFamily, FiberCoordinates, HermitianMetric, ModuliPath};
pub use quadrature::QuadratureConfig;
pub use special::EllipticModulus;
pub use xi0::{EmbeddingProfile, RadialCoordinate};
