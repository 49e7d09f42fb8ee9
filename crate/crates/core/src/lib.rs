//! Time-sliced path integrals for a particle on a line.
//!
//! Kernels are built by summing `exp(iS/ħ)` over lattice paths, either by
//! explicit enumeration or by composing short-time kernels with quadrature
//! weights. The same machinery gives transition quantities, the weighted
//! path sums with an insertion `f(x(τ))`, and a Newton solver locates the
//! classical path on the time lattice.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

pub mod action;
pub mod classical;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod linalg;
pub mod potential;
pub mod propagator;
pub mod transition;

pub use action::{action_gradient, action_hessian, discrete_action, slice_action, ActionValue};
pub use classical::{
    harmonic_classical_path, perturbation_probe, slice_energies, solve_classical_path, solve_from,
    stationarity_residual, ClassicalPathResult, MinimumCertificate, SolveMode, SolveOptions,
};
pub use error::{Error, Result};
pub use grid::{
    enumerate_lattice_paths, lattice_path_count, LatticePath, DEFAULT_ENUMERATION_CAP, LatticePaths, PhysicalConstants, SpaceGrid, TimeGrid,
};
pub use potential::{eval_potential, eval_potential_derivative, Potential};
pub use propagator::{
    alias_free_separation, analytic_kernel_free, analytic_kernel_harmonic, analytic_kernel_harmonic_eps,
    brute_force_kernel, compose_kernels, evolve_wavefunction, lattice_kernel, sampled_kernel, short_time_kernel,
    short_time_prefactor, step_wavefunction, weighted_path_sum, GaussianPacket, Kernel, Provenance, SliceOperator,
    Wavefunction, FOCAL_EPS,
};
pub use transition::{
    modulus_and_phase, path_delta, transition_coordinate_path, transition_edge_leak, transition_modulus_and_phase,
    transition_quantities, transition_quantity, transition_quantity_brute_force, transition_quantity_enumerated,
    transition_quantity_insertion, wrap_to_pi, KinematicQuantity, TransitionProvenance, TransitionQuantity,
};
