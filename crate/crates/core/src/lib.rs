//! Closed-loop control of a simulated LTE/NR cell cluster.
//!
//! The crate is organised bottom-up:
//!
//! * [`radio`], [`harq`], [`scheduler`] – link-level models.
//! * [`twin`] – the deterministic network simulator ("digital twin").
//! * [`observer`] – telemetry aggregation, rewards, anomaly detection,
//!   load forecasting and state discretisation.
//! * [`agents`] – tabular Q-learning for sub-band masks, linear
//!   actor–critic for transmit power, and baselines.
//! * [`supervisor`] – safety envelope, shadow evaluation on forked twins,
//!   checkpoints and rollback.
//! * [`control`] – the observe → learn → act → supervise → actuate loop.
//! * [`io`] – scenario documents, line-delimited export, checkpoint files.

// `!(x > 0.0)` is used on purpose so NaN fails validation too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agents;
pub mod control;
pub mod harq;
pub mod io;
pub mod observer;
pub mod radio;
pub mod rng;
pub mod scheduler;
pub mod supervisor;
pub mod twin;

pub use agents::{ActionSet, Agent, AgentKind, CellAction};
pub use control::{run_episode, Episode, LoopConfig, RunRecord};
pub use io::{parse_scenario, IoError, Scenario};
pub use observer::{ObjectiveWeights, RewardSignal, TelemetryReport};
pub use supervisor::{SafetyEnvelope, Verdict};
pub use twin::{CellConfig, Point, SubbandMask, TtiStats, TwinSetup, TwinState};
