//! Verification grids (placeholder during bring-up).
