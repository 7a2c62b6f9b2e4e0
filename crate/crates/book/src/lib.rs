//! The guide under `book/src`, compiled as documentation so that
//! `cargo test` runs every snippet.
#![doc = include_str!("../../../book/src/introduction.md")]

#[doc = include_str!("../../../book/src/rules.md")]
pub mod rules {}

#[doc = include_str!("../../../book/src/stationary.md")]
pub mod stationary {}

#[doc = include_str!("../../../book/src/fusion.md")]
pub mod fusion {}

#[doc = include_str!("../../../book/src/first_meeting.md")]
pub mod first_meeting {}

#[doc = include_str!("../../../book/src/non_backtracking.md")]
pub mod non_backtracking {}

#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}

#[doc = include_str!("../../../README.md")]
pub mod readme {}
