//! Instruction fetch and branch prediction.

pub mod fetch;
pub mod predictor;

pub use fetch::{fetch, FetchPacket, FetchStatus, FetchedInst, Frontend};
pub use predictor::{
    BimodalTable, BranchPredictor, Btb, Prediction, PredictorConfig, PredictorKind, TwoLevelPredictor,
};
