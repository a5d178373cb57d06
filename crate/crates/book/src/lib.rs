//! The guide under `book/` is compiled into this crate so that `cargo test`
//! runs every listing. One module per chapter keeps failures traceable.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/systems.md")]
pub mod systems {}
#[doc = include_str!("../../../book/src/scalings.md")]
pub mod scalings {}
#[doc = include_str!("../../../book/src/limits.md")]
pub mod limits {}
#[doc = include_str!("../../../book/src/control.md")]
pub mod control {}
#[doc = include_str!("../../../book/src/saturation.md")]
pub mod saturation {}
#[doc = include_str!("../../../book/src/regular.md")]
pub mod regular {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
