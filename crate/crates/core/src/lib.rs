pub mod field;
pub mod error;
pub mod linalg;
pub mod magic;
pub mod opoly;
pub mod catalog;
pub mod cache;
pub mod wild;
pub mod pseudo_oval;
pub mod incidence;

pub use error::{Error, Result};
