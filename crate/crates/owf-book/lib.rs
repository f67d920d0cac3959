//! Compiles the guide's code listings as doctests.

#[doc = include_str!("../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../book/src/weights.md")]
pub mod weights {}
#[doc = include_str!("../../book/src/similarity.md")]
pub mod similarity {}
#[doc = include_str!("../../book/src/filters.md")]
pub mod filters {}
#[doc = include_str!("../../book/src/evaluation.md")]
pub mod evaluation {}
#[doc = include_str!("../../book/src/cli.md")]
pub mod cli {}
