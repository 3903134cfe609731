//! Dynamical decoupling and dynamically corrected gates on spin ensembles.

pub mod dcg;
pub mod group;
pub mod schedule;
pub mod sequence;

pub use dcg::{
    assemble_dcg, protected_schedule, DcgSchedule, DcgSequences, LeakageProbe, Strategy,
};
pub use group::{eulerian_order, RotationGroup};
pub use schedule::{
    balanced_pair, finite_duration_error, simulate_schedule, BalancedPair, ControlSchedule,
    FlipErrors, Generator, PulseRole, PulseSegment,
};
pub use sequence::{
    search_sequences, symmetrize, verify_decoupling, DDSequence, NoiseFamily, SequenceConfig,
};
