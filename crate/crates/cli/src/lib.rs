//! Pipeline commands behind the `nlca` binary.

pub mod benchmark;
pub mod commands;
pub mod config;
pub mod format;

// The command-line chapter of the book uses this crate, so it is tested here.
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/benchmark.md")]
mod book_benchmark {}
