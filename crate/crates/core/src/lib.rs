//! Delayed contact dynamics of a chaser spacecraft probing a fixed target
//! nozzle, as seen through a robotic hardware-in-the-loop docking simulator.
//!
//! The crate is organised bottom-up:
//!
//! * [`params`] - body, contact and run parameters, validation, nominal state.
//! * [`contact`] - penetration kinematics and the spring-dashpot force law.
//! * [`dynamics`] - delay line, fixed-step RK4 integration, full simulations.
//! * [`linear`] - linearisation about the nominal contact point and the
//!   decoupled penetration-depth delay equation.
//! * [`stability`] - pole-location analysis of `mu s^2 + e^{-sh}(beta s + kappa)`.
//! * [`analysis`] - coefficient of restitution and the passivity observer.
//!
//! All quantities are SI; angles are radians.

pub mod analysis;
pub mod contact;
pub mod dynamics;
mod error;
pub mod linear;
pub mod params;
pub mod stability;

pub use error::{Diagnostic, Error, ValidationReport};
pub use params::{
    Activation, BodyParams, ChaserState2D, ChaserState3D, ContactParams, InitialState, SimConfig,
    Spring,
};

pub type Result<T, E = Error> = std::result::Result<T, E>;
