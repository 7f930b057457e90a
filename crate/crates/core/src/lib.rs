pub mod error;
pub mod fields;
pub mod geometry;
pub mod linalg;
pub mod dnl;
pub mod plaplace;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};

#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/geometry.md")]
    mod geometry {}
    #[doc = include_str!("../../../book/src/fields.md")]
    mod fields {}
    #[doc = include_str!("../../../book/src/plaplace.md")]
    mod plaplace {}
    #[doc = include_str!("../../../book/src/dnl.md")]
    mod dnl {}
    #[doc = include_str!("../../../book/src/verify.md")]
    mod verify {}
}
