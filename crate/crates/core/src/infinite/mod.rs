//! Infinite-horizon economies: two-agent exchange, entrepreneurs with
//! leverage, and idiosyncratic storage risk.

pub mod kocherlakota;
pub mod leverage;
pub mod storage;
