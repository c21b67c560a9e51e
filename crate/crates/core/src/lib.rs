//! Exact coefficient arithmetic for half-integral and integral weight
//! modular forms, the Shimura lift, and sign-equidistribution statistics.

pub mod arith;
pub mod characters;
pub mod coeff;
pub mod cyclotomic;
pub mod density;
pub mod exec;
pub mod halfint;
pub mod qseries;
pub mod satotate;
pub mod shimura;

pub use exec::Execution;
