//! Locality seminorms, structured automorphisms and Lieb-Robinson style
//! diagnostics for quantum spin lattices, computed exactly on finite windows.

pub mod algebra;
pub mod automorphisms;
pub mod diagnostics;
pub mod error;
pub mod lattice;
pub mod sampling;
pub mod seminorms;
pub mod sequences;

pub use algebra::{Observable, PauliString};
pub use error::{Error, Result};
pub use lattice::{MetricConstants, Region, Site, Window};
pub use num_complex::Complex64 as C64;
