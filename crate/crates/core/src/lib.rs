//! Kernel dependence measures: exact and randomized HSIC, independence
//! tests, sensitivity maps and their applications.

pub mod apps;
pub mod bench;
pub mod error;
pub mod hsic;
pub mod kernelcore;
pub mod nulltest;
pub mod rff;
pub mod seeding;
pub mod sensmap;

pub use error::{Error, Result};
pub use hsic::{hsic, rhsic, DependenceStatistic, Estimator, Method};
pub use kernelcore::{Bandwidth, BandwidthSpec, DataMatrix, GramMatrix, Heuristic};
pub use nulltest::{independence_test, DependenceResult, NullKind, NullModel, TestConfig};
pub use rff::{FeatureMap, FrequencyMatrix};
pub use sensmap::{SensitivityAggregate, SensitivityMap};
