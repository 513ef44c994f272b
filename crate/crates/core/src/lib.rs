pub mod body;
pub mod density;
pub mod error;
pub mod estimators;
pub mod fit;
pub mod hull;
pub mod io;
pub mod linalg;
pub mod metric;
pub mod polytope;
pub mod quadrature;
pub mod sphere;
pub mod volume;

pub use error::{Error, Result};
pub use linalg::{Matrix, Vector};
pub use polytope::{Face, FaceId, FaceLattice, Flag, FlagSimplex, Halfspace, Polytope};
