//! Broken lines, local theta functions, theta-basis structure constants and the checks run
//! on the resulting algebras.

mod algebra;
mod checks;
mod consistency;
mod lines;

pub use algebra::{support_points, AlgebraOptions, Element, MirrorAlgebra, Table, TableKey};
pub use checks::{
    absolutize, check_associativity, check_convexity, check_grading, infer_grading, rees_filtration,
    AbsoluteTable, AssociativityReport, ConvexityReport, Grading, GradingReport, PointWeight,
    ReesReport, Violation,
};
pub use consistency::{check_consistency, theta_consistency_at_wall, theta_consistency_check, ThetaConsistency};
pub use lines::{enumerate_broken_lines, theta_local, Bend, BrokenLine, Segment, ThetaFunction};

use thiserror::Error;

use crate::geometry::GeometryError;
use crate::scattering::ScatteringError;
use crate::series::SeriesError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ThetaError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Scattering(#[from] ScatteringError),
    #[error("point is not generic: {0}")]
    NonGeneric(String),
    #[error("point {0:?} is outside the support")]
    OutsideSupport(Vec<i64>),
    #[error("PL section decreases a class across a fan ray")]
    NonConvexSection,
    #[error("structure constant for {inputs:?} -> {target:?} differs between basepoints: {values:?}")]
    Unstable {
        inputs: Vec<Vec<i64>>,
        target: Vec<i64>,
        values: Vec<String>,
    },
    #[error("no generic basepoint found near {0:?}")]
    NoBasepoint(Vec<i64>),
    #[error("product leaves the basis; a norm bound of {needed} is needed")]
    NeedsLargerBound { needed: i64 },
    #[error("{0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, ThetaError>;
