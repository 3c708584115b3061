//! Scripted synthetic scenes for trajectory anomaly detection.
//!
//! A world template provides lanes and constant-speed background traffic; the
//! target vehicle is driven by a kinematic bicycle model whose controller
//! tracks a scripted route with lateral and longitudinal perturbations.

mod background;
mod dataset;
mod error;
pub mod geometry;
mod kinematics;
mod script;
mod simulate;
mod world;

pub use background::{BackgroundAgent, Episode};
pub use dataset::{
    generate_dataset, generate_scenes, largest_remainder, mix_seed, ClassConfig, ClassSummary, DatasetConfig, Manifest, SceneEntry,
    SplitConfig, SplitSummary, MAX_DURATION_S, MIN_DURATION_S, REFERENCE_ABNORMAL_TIMESTEPS,
};
pub use error::DatagenError;
pub use kinematics::{step_kinematics, wrap_angle, ControlCommand, VehicleLimits, VehicleState};
pub use script::{
    auto_world, feasible_worlds, plan, required_start_lane, AbnormalWhen, Axis, ManeuverScript, Oscillation, Plan, Profile, SpeedPlan,
};
pub use simulate::{episode_for, generate_scene, resolve_labels, simulate_target, world_for, SceneSettings, TargetTrace, IGNORE_MARGIN};
pub use world::{junction_route, LaneKind, StartLane, Turn, World, WorldSpec, WorldTemplate, LANE_WIDTH};
