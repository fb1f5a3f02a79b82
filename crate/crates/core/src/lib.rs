//! Finite-dimensional operator-system cones and bipartite correlation boxes.
//!
//! The crate decides membership in the min and max tensor cones of
//! `V = {(a,b,c,d) : a + b = c + d} ⊂ ℓ∞₄`, evaluates the square-root Bell
//! inequality that separates them, reproduces the `S₁ ⊗ S₁` separation
//! through a grid relaxation and a determinant obstruction, and classifies
//! 2-input/2-output correlation boxes as non-signaling, quantum or local.

pub mod numerics;
pub mod convex;
pub mod opsys;
pub mod tensorlab;
pub mod boxes;
