//! Acceptance checks for the scoring pipeline live in `tests/acceptance.rs`.
