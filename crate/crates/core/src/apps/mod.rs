//! Applications of the dependence measures: filter feature ranking and
//! additive-noise causal direction scoring.

pub mod causal;
pub mod ranking;
pub mod regress;
pub mod synthetic;

pub use causal::{causal_rank, causal_score, CausalConfig, CausalDecision, CausalPair, CausalRanking, Direction, ScoreKind};
pub use ranking::{pearson, rank_features, FeatureRanking, RankConfig, RankCriterion};
pub use regress::{knn_regress, Regressor};
