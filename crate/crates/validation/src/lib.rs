//! Acceptance checks for the namefit workspace live under `tests/`.
