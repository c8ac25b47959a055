//! Exact-arithmetic laboratory for inhomogeneous Diophantine approximation.
//!
//! Everything that decides a verdict is computed in exact arithmetic:
//! rationals, real quadratic extensions `a + b*sqrt(D)`, formal k-th roots
//! and power products of positive rationals, and certified rational
//! intervals for the few genuinely transcendental comparisons (values
//! `c * e^{r t}` along the diagonal flow). Floating point appears only in
//! display fields of reports, never in a comparison that a test or a
//! verdict depends on.
//!
//! Module map:
//! - [`exact`]: scalars (rationals, quadratic field elements, roots, power
//!   products, certified intervals), small exact linear algebra, and
//!   exhaustive lattice enumeration (SVP / CVP / successive minima) for
//!   dimensions up to four.
//! - [`dioph`]: badness functionals for affine forms, approximation
//!   exponents, best-approximation sequences and the derived covering /
//!   series machinery.
//! - [`transfer`]: explicit transference inequalities with exact constants,
//!   in both the inhomogeneous (Cassels V.17) and homogeneous (Cassels V.II)
//!   forms, plus the sandwich between badness and Dirichlet improvability.
//! - [`singular`]: finite-range detectors for classical singularity and for
//!   the weighted "singular for b" systems.
//! - [`farey`]: Farey lattices, cone decompositions, children sets, the
//!   restricted fractal trees and their validators.
//! - [`flow`]: unimodular grids, the diagonal flow `a_t`, exact `Delta` /
//!   `Delta_0` trajectories and the conjugation identities.
//! - [`cli`]: configuration, report emission and the subcommand front end.

pub mod cli;
pub mod dioph;
pub mod exact;
pub mod farey;
pub mod flow;
pub mod singular;
pub mod transfer;

pub use exact::lattice::{LatticeBasis, Norm};
pub use exact::quad::Quad;
pub use exact::rational::Rat;
