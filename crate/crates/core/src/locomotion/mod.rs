//! Planar three-fin swimming simulation.

pub mod body;
pub mod collision;
pub mod dynamics;
pub mod scenario;
pub mod simulate;
pub mod state;
pub mod summary;

pub use body::{FinActivation, FinMount, FinRole, FishBody};
pub use collision::{check_collision, CollisionEvent, Obstacle};
pub use dynamics::{kinetic_energy, step, terminal_surge_speed, MAX_DT};
pub use scenario::{
    builtin, target_scenario, Scenario, ScheduleEntry, BUILTIN_SCENARIOS, TARGET_DURATION, TARGET_SCENARIOS,
};
pub use simulate::{read_trajectory_csv, simulate, write_trajectory_csv, Stepper, Trajectory};
pub use state::SimState;
pub use summary::{fit_circle, summarize, TrajectorySummary, DEFAULT_STEADY_FRACTION};
