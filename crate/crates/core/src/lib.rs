//! Gaussian Wave Packet wavelets: an exact, directional solution of the wave
//! equation, its closed-form spectrum, a continuous wavelet transform built on
//! it, and the quantities used to judge its localization.

pub mod cwt;
pub mod error;
pub mod fft;
pub mod grid;
pub mod metrics;
pub mod packet;
pub mod quad;
pub mod sources;
pub mod special;
pub mod verify;

pub use cwt::{
    AdmissibilityMethod, AdmissibilityResult, Convention, FamilyIndex, TransformCoefficients,
};
pub use error::{GwpError, Result};
pub use grid::{ComplexField, Domain, FieldKind, GridSpec};
pub use metrics::{MomentReport, SweepMode, SweepPoint, SweepResult};
pub use packet::PacketParams;
pub use sources::FieldValue;
