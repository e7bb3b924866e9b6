//! Classification of linear flows `e^{tA}` up to topological (C⁰) and smooth
//! (C¹) equivalence.

pub mod canonical;
pub mod cores;
pub mod equiv;
pub mod error;
pub mod linalg;
pub mod ratclass;
pub mod sample;
pub mod special;
pub mod spectral;
pub mod witness;

pub use error::{Error, Result};
pub use linalg::{Field, Mat, Scalar, Tolerance};
