//! Exact computations with commutator matrices of `sl_n` lattices over `Z/p^r`: rank loci,
//! centralizer classes of `sl_4`, Poincare series, zeta functions and shadow-preserving lifts.

pub mod arith;
pub mod linalg;
pub mod lattice;
pub mod ratfunc;
pub mod classify;
pub mod scan;
pub mod transitions;
pub mod zeta;
pub mod shadow;

pub use arith::Zpr;
pub use classify::Class;
pub use lattice::{LieLattice, Sl4Element};
pub use ratfunc::{QtPoly, QtRational};
