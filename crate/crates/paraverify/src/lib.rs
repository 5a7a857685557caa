pub mod coherent;
pub mod dkp;
pub mod error;
pub mod fock;
pub mod govorkov;
pub mod kernel;
pub mod reldsl;
pub mod report;
pub mod su_unitary;
pub mod supertriple;
