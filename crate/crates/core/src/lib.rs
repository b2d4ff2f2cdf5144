//! Effective capacity of fixed-rate transmissions over block-fading Rayleigh
//! channels that are learned through a single MMSE-estimated pilot per frame.
//!
//! The crate is organised bottom-up:
//!
//! * [`channel`]: energy split between pilot and data, estimation statistics,
//!   effective SNR, the ON/OFF outage threshold and the optimal training fraction.
//! * [`capacity`]: effective capacity (spectral efficiency) under a QoS exponent,
//!   maximised over the fixed transmission rate, and the bit-energy map.
//! * [`asymptotics`]: wideband-regime minimum bit energy and wideband slope, and
//!   the low-power bit-energy scan.
//! * [`queue`]: Monte-Carlo simulation of the ON/OFF service queue used to check
//!   the queue-tail decay rate against the QoS exponent.
//! * [`optimize`]: scalar maximisation helpers shared by the above.

pub mod asymptotics;
pub mod capacity;
pub mod channel;
mod error;
pub mod optimize;
pub mod queue;

pub use asymptotics::{WidebandConstants, WidebandResult};
pub use capacity::{BitEnergy, EffCapSolution, QosExponent};
pub use channel::{EstimationStats, SystemParams};
pub use error::Error;
pub use queue::{SimConfig, TailEstimate};

pub type Result<T, E = Error> = std::result::Result<T, E>;
