pub mod endo;
pub mod field;
pub mod fsets;
pub mod lattice;
pub mod matrix;
pub mod poly;
pub mod reduction;
pub mod report;
pub mod scalar;
pub mod skew;
pub mod system;
pub mod trichotomy;
