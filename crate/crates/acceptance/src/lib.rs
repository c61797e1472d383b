//! Acceptance suite for `kratzer-dirac`; see `tests/acceptance.rs`.
