//! Byzantine-tolerant centroid aggregation for federated learning.
//!
//! The server-side view of one round is a [`Layout`]: the vectors received
//! from up to `n` clients, at most `t` of which may be Byzantine. The
//! [`aggregators`] module turns a layout into one output vector; the
//! [`evaluation`] module, which alone sees the simulator's [`GroundTruth`],
//! measures how far that output lies from the centroid of the non-faulty
//! vectors relative to the radius of the minimum covering ball of all
//! candidate centroids.
//!
//! [`flsim`] drives FedSGD / FedAvg training of a small MLP with these
//! aggregators under the attacks in [`attacks`].

pub mod aggregators;
pub mod attacks;
pub mod candidates;
pub mod dataio;
pub mod error;
pub mod evaluation;
pub mod flsim;
pub mod geometry;
pub mod seed;

pub use aggregators::{get_aggregator, AggregationResult, Aggregator};
pub use candidates::{ClientId, Layout};
pub use error::{Error, Result};
pub use evaluation::{GroundTruth, Ratio, RatioReport};
pub use geometry::{Ball, Hyperbox};
