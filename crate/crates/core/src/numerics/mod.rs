//! Quadrature grids, symmetric matrices and eigensolvers shared by every
//! other module.

mod eigen;
mod matrix;
mod quadrature;
pub mod tridiag;

pub use eigen::{eigh_desc, eigvalsh_desc, partial_sum, Eigh};
pub use matrix::SymMatrix;
pub use quadrature::{build_grid, gauss_legendre, Grid, Interval, PanelLayout};
