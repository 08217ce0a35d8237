//! Exact truncated q-series machinery for double-pole Nahm sums, Bailey
//! pairs and the identities built from them.

pub mod bailey;
pub mod identities;
pub mod nahm;
pub mod qdiff;
pub mod series;
