pub mod charsolve;
pub mod cli;
pub mod error;
pub mod latex;
pub mod nilalg;
pub mod poly;
pub mod resolvent;
pub mod solutions;
pub mod verify;

pub use error::{Error, Result};
pub use nilalg::{AlgebraTable, TableKind, TruncatedElement, C64};
