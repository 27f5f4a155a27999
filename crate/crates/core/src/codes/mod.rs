//! Symbol-level regenerating codes with exact linear repair.

mod gpm;
mod linear;
mod pm;
mod shortened;
pub mod sym;
mod systematic;

pub use gpm::{GpmCode, GpmDefect};
pub use linear::{
    derive_ip_matrices, nearest_first_ranks, random_file, reconstruct, solve_combination, validate_assignment,
    Codeword, Generators, IpMatrixSet, LinearRegeneratingCode,
};
pub use pm::PmCode;
pub use shortened::{unit_msr, ShortenedPmCode};
pub use systematic::SystematicCode;
