//! Experiment configuration, initial data, run orchestration and output.

pub mod config;
pub mod experiment;
pub mod initial;
pub mod scaling;

pub use config::{
    ConfigError, ExperimentConfig, GateSpec, GridSpec, InitialSpec, MonitorSpec, OutputSpec, PhysicsSpec,
    ScalingSpec, StepSpec, SweepPoint, SweepSpec, OUTPUT_DIR_ENV,
};
pub use experiment::{
    execute, gate_fields, replay, run_experiment, run_sweep, BeltramiOracle, Experiment, ExperimentSummary,
    GateReport, HarnessError, ReplayReport, SweepEntry, SweepIndex, CONFIG_FILE, EXIT_BLOWUP, EXIT_CHECK,
    EXIT_CONFIG, EXIT_OK, EXIT_RESOLUTION, FINAL_CHECKPOINT, INDEX_FILE, LEDGER_FILE, SUMMARY_FILE,
};
pub use initial::{
    gen_beltrami, gen_orszag_tang_2p5d, gen_orszag_tang_3d, gen_random_bandlimited, InitialData,
    InitialDataError, Populate, TargetNorm,
};
pub use scaling::{dilate, scaling_pair, ScalingReport};
