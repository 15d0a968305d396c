//! Numeric action-model learning, grounded numeric planning and masked policy-gradient
//! RL on a grid-world crafting benchmark.

pub mod encodings;
pub mod model;
pub mod num;
pub mod world;
pub mod planner;
pub mod nsam;
pub mod shortcut;
pub mod policy;
pub mod ramp;
pub mod harness;
