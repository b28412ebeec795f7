//! Synthetic ISM-band traffic, blind burst detection and MAC protocol
//! classification.
//!
//! The pipeline mirrors a capture-and-classify workflow:
//!
//! 1. [`signal`] synthesizes labeled baseband recordings of Wi-Fi exchanges,
//!    Wi-Fi beacons and Bluetooth links, and impairs them with AWGN.
//! 2. [`detect`] finds frames with a twin-window energy-ratio detector.
//! 3. [`features`] turns frames into (frame width, silence gap, PAPR) vectors.
//! 4. [`svm`] and [`knn`] classify those vectors into three protocol classes.
//! 5. [`eval`] runs train/test splits, confusion matrices and SNR sweeps.

pub mod detect;
pub mod error;
pub mod eval;
pub mod features;
pub mod io;
pub mod knn;
pub mod signal;
pub mod svm;

mod util;

pub use error::{Error, Result};
pub use signal::{
    BurstTruth, FrameKind, GeneratorConfig, IqRecording, ProtocolLabel, Scenario, Span, TruthBurst,
};
