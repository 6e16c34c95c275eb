//! Discrete-event simulation of a UAV relaying buffered ground-user traffic,
//! with a scripted expert scheduler and a behavioral-cloning learner trained
//! on its demonstrations.

pub mod bc;
pub mod config;
pub mod energy;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod metrics;
pub mod mobility;
pub mod policy;
pub mod queue;
pub mod rng;
pub mod sampling;
pub mod session;
pub mod trajectory;
pub mod world;

pub use config::{AlphaMode, ArrivalModel, SimConfig};
pub use error::{Error, Result};
pub use geometry::{Movement, SectorRing};
pub use policy::{Decision, ExpertConfig, ExpertPolicy, Observation, Policy, StickyPolicy};
pub use trajectory::{FeatureSpec, Source, TrajectoryRecord};
pub use world::{EventOutcome, WorldState};
