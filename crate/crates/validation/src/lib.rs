//! Holds the `acceptance` test target (`tests/acceptance.rs`), which checks
//! the workspace end to end and prints one PASS/FAIL line per criterion.
//!
//! It lives in its own package so that `cargo test --workspace` runs it after
//! every other test target.
