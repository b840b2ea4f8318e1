//! Reduction workbench for Cluster Editing above a modification-disjoint P3
//! packing: compiles 3-CNF formulas into instances, converts certificates in
//! both directions, verifies structural invariants and decides small
//! instances exactly.

pub mod clause_gadget;
pub mod ffield;
pub mod formula;
pub mod graph;
pub mod io;
pub mod merging_model;
pub mod padding;
pub mod reduction;
pub mod solver;
pub mod transform;
pub mod variable_gadget;
pub mod verifier;
