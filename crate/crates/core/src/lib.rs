//! Exact computational model of tri-graded `F2[λ]` Adams charts.
//!
//! The crate is organized around the life cycle of a chart:
//!
//! * [`chart`] — the data model: generators, `λ`-homogeneous elements,
//!   product/differential records, class declarations, validation, and the
//!   classical → synthetic lift.
//! * [`gf2`] and [`lambda`] — the linear-algebra substrate: bit-packed GF(2)
//!   row reduction and graded Smith decomposition over `F2[λ]`.
//! * [`pages`] — the spectral sequence engine: builds the free `E2` page,
//!   replays recorded differentials with their `λ^(r-1)` coefficients, and
//!   reports the `E∞` torsion census.
//! * [`homotopy`] — assembles bigraded homotopy columns from `E∞` data and
//!   resolves 2-local abelian group structure from extension chains.
//! * [`reasoner`] — degree and bookkeeping checkers for differential,
//!   extension, bracket, and cell-complex records, plus window scans.
//!
//! Everything here is pure and deterministic; IO, parsing, and rendering live
//! in the companion CLI crate. The crate is `no_std` (with `alloc`).

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod chart;
pub mod degree;
pub mod gf2;
pub mod homotopy;
pub mod lambda;
pub mod pages;
pub mod reasoner;
pub mod report;

pub use chart::{
    Chart, ChartKind, ClassDecl, DifferentialRecord, Generator, LambdaElement, ProductRecord,
    Support, Truncation,
};
pub use degree::{motivic_to_synthetic_degree, TriDegree, Window, TAU_LAMBDA_EXP};
pub use pages::{Order, PageState, Summand};
pub use report::{Finding, Severity};
