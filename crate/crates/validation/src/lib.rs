//! Empty library; the acceptance runner lives in `tests/acceptance.rs`.
