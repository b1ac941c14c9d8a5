//! Doc-test shim for the book under `book/`.
//!
//! mdbook renders the chapters but cannot execute their Rust snippets;
//! including each chapter as module documentation makes `cargo test`
//! compile and run every fenced `rust` block, so the book cannot drift
//! from the library. A failing doctest names the chapter module it came
//! from.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/projections.md")]
pub mod projections {}

#[doc = include_str!("../../../book/src/isometries.md")]
pub mod isometries {}

#[doc = include_str!("../../../book/src/distribution-tests.md")]
pub mod distribution_tests {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
