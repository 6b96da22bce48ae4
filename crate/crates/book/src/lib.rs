//! The guide under `book/`, compiled so its code samples run as doc-tests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/scansion.md")]
pub mod scansion {}
#[doc = include_str!("../../../book/src/meters.md")]
pub mod meters {}
#[doc = include_str!("../../../book/src/language-models.md")]
pub mod language_models {}
#[doc = include_str!("../../../book/src/generation.md")]
pub mod generation {}
#[doc = include_str!("../../../book/src/evaluation.md")]
pub mod evaluation {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
#[doc = include_str!("../../../book/src/protocols.md")]
pub mod protocols {}
#[doc = include_str!("../../../README.md")]
pub mod readme {}
