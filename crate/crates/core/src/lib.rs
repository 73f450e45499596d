//! Numerical toolkit for rational-bubble equilibrium models: steady states,
//! local determinacy, saddle paths, and the dividend-injection argument that
//! rules out equilibria converging to the bubbleless steady state.

pub mod cli;
pub mod diagnostics;
pub mod dynsys;
pub mod infinite;
pub mod olg;
pub mod production;
pub mod reduced_form;
pub mod report;
pub mod roots;
pub mod utility;
