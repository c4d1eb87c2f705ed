#![forbid(unsafe_code)]
// `!(x > 0.0)` style guards are kept on purpose: unlike the suggested
// rewrite they also reject NaN inputs.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Desk-scale laboratory for extremal problems on sparse random structures.
//!
//! The pieces fit together like this: a combinatorial problem (forbidden
//! subgraphs in `K_n`, forbidden arithmetic progressions, Schur triples in an
//! abelian group) is [encoded](encode) as a `k`-uniform hypergraph whose
//! vertices are the base objects and whose edges are the forbidden
//! configurations. Independent sets of the hypergraph are exactly the
//! configuration-free subsets. On top of that sit:
//!
//! * [`hypergraph`] — the hypergraph container itself plus the local
//!   functionals (`deg_i`, `E_U^i(W)`, rich vertices) everything else uses;
//! * [`density`] — exact rational density parameters (`m_2`, `m_ell`),
//!   strict balancedness, and threshold scales;
//! * [`moments`] — Chernoff tail bounds and the second-moment functional
//!   `mu_i` with its boundedness diagnostics;
//! * [`exposure`] — multi-round exposure schedules that split one Bernoulli
//!   sample into geometrically growing rounds;
//! * [`solver`] — branch-and-bound maximization of configuration-free
//!   subsets inside random samples;
//! * [`stability`] — distances from witnesses to target families and a
//!   small search for stability counterexamples;
//! * [`ledger`] — the explicit constant recursion, tracked in log space.
//!
//! Everything stochastic takes an explicit seed and derives per-trial
//! substreams with [`seeding::derive_seed`], so results are reproducible and
//! independent of thread count.

pub mod combin;
pub mod density;
pub mod encode;
pub mod error;
pub mod exposure;
pub mod hypergraph;
pub mod ledger;
pub mod moments;
pub mod seeding;
pub mod solver;
pub mod stability;
pub mod subset;

pub use error::{Error, Result};
pub use hypergraph::UniformHypergraph;
pub use subset::VertexSubset;
