//! Federated training of a small multilayer perceptron with pluggable
//! aggregation, for FedSGD (clients send gradients) and FedAvg (clients send
//! locally updated parameters).

mod mlp;
mod partition;
mod train;

pub use mlp::{
    evaluate_model, forward_loss_grad, init_model, local_update, Activation, MlpConfig, ModelParams,
};
pub use partition::{partition_data, PartitionScheme};
pub use train::{Mode, RoundOutcome, RoundRecord, Simulation, TrainConfig, DEFAULT_HIDDEN};
