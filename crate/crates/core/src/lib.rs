//! Kinematic analysis of 3R serial manipulators.
//!
//! The crate covers the full analysis chain for three-revolute regional
//! structures described by their DH parameters:
//!
//! - forward kinematics and the Jacobian determinant ([`kinematics`])
//! - inverse kinematics of the orthogonal family through the quartic in
//!   `tan(theta3/2)`, with multiple-root detection ([`ik`])
//! - singularity curves on the joint-space torus, their workspace images,
//!   cusp and node detection, aspects ([`singular`])
//! - classification of orthogonal manipulators with no offset along the
//!   last axis: bifurcating surfaces, parameter-space domains, workspace
//!   topology types, cuspidality verdicts ([`classify`])
//! - characteristic surfaces, reduced aspects, uniqueness domains, regions
//!   of feasible paths and nonsingular posture-change planning
//!   ([`feasibility`])
//!
//! All analyses are deterministic for a fixed model and grid resolution.

pub mod classify;
pub mod export;
pub mod feasibility;
pub mod grid;
pub mod ik;
pub mod kinematics;
pub mod model;
pub mod poly;
pub mod singular;

pub use ik::{count_ik, solve_ik, IkCount, IkSolution};
pub use kinematics::{cross_section, forward, jacobian, CrossSectionPoint, WorkspacePoint};
pub use model::{DhParams, JointConfig, Manipulator};
