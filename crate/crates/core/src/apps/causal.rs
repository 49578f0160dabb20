//! Additive-noise-model direction scoring and weighted ranking curves.
//!
//! A pair is scored by regressing each variable on the other with
//! leave-one-out predictions and comparing how dependent the residuals stay
//! on the regressor input. `Ĉ = stat(x, r_f) − stat(y, r_b)` is negative when
//! the forward residuals are the more independent ones, so `Ĉ < 0` reads as
//! `x → y`. `Ĉ_s` compares mean squared sensitivities the other way round,
//! so `Ĉ_s > 0` reads as `x → y`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hsic::{centered_maps, hsic, rhsic, Estimator};
use crate::kernelcore::{BandwidthSpec, DataMatrix};
use crate::seeding::{derive_seed, domain};
use crate::sensmap::{block_mean_square, hsic_sensitivity, rhsic_sensitivity};

use super::regress::Regressor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    XcausesY,
    YcausesX,
}

impl Direction {
    pub fn as_str(&self) -> &'static str {
        match self {
            Direction::XcausesY => "x->y",
            Direction::YcausesX => "y->x",
        }
    }

    pub fn reversed(self) -> Direction {
        match self {
            Direction::XcausesY => Direction::YcausesX,
            Direction::YcausesX => Direction::XcausesY,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which score picks the direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ScoreKind {
    #[default]
    Statistic,
    Sensitivity,
}

impl ScoreKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScoreKind::Statistic => "C",
            ScoreKind::Sensitivity => "Cs",
        }
    }
}

impl FromStr for ScoreKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "C" | "c" | "statistic" => Ok(ScoreKind::Statistic),
            "Cs" | "cs" | "sensitivity" => Ok(ScoreKind::Sensitivity),
            other => Err(Error::InvalidParameter(format!("unknown score {other:?}, expected C or Cs"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CausalConfig {
    pub estimator: Estimator,
    pub bandwidth: BandwidthSpec,
    /// Neighbour count; `None` means `⌈√n⌉`.
    pub neighbors: Option<usize>,
    pub score: ScoreKind,
    pub seed: u64,
}

impl Default for CausalConfig {
    fn default() -> Self {
        Self {
            estimator: Estimator::Exact,
            bandwidth: BandwidthSpec::AutoMean,
            neighbors: None,
            score: ScoreKind::Statistic,
            seed: 0,
        }
    }
}

/// Mean squared entries of the four sensitivity blocks entering `Ĉ_s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensitivityTerms {
    pub forward_x: f64,
    pub forward_r: f64,
    pub backward_y: f64,
    pub backward_r: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CausalDecision {
    pub score_c: f64,
    pub score_cs: f64,
    pub direction: Direction,
    pub forward_residuals: Vec<f64>,
    pub backward_residuals: Vec<f64>,
    pub components: SensitivityTerms,
}

impl CausalDecision {
    pub fn direction_by(&self, score: ScoreKind) -> Direction {
        let forward = match score {
            ScoreKind::Statistic => self.score_c < 0.0,
            ScoreKind::Sensitivity => self.score_cs > 0.0,
        };
        if forward {
            Direction::XcausesY
        } else {
            Direction::YcausesX
        }
    }

    /// Score oriented so that larger means more evidence for `x → y`.
    pub fn forward_evidence(&self, score: ScoreKind) -> f64 {
        match score {
            ScoreKind::Statistic => -self.score_c,
            ScoreKind::Sensitivity => self.score_cs,
        }
    }
}

/// Residual-independence statistic of `(input, residual)` and the mean
/// squared sensitivities of its two blocks.
fn residual_dependence(input: &DataMatrix, residual: &DataMatrix, config: &CausalConfig) -> Result<(f64, f64, f64)> {
    let si = config.bandwidth.resolve(input)?;
    let sr = config.bandwidth.resolve(residual)?;
    match config.estimator {
        Estimator::Exact => {
            let value = hsic(input, residual, si, sr)?.value;
            let map = hsic_sensitivity(input, residual, si, sr)?;
            Ok((value, block_mean_square(&map.sx), block_mean_square(&map.sy)))
        }
        Estimator::Randomized { features } => {
            let (zi, zr) = centered_maps(input, residual, si, sr, features, config.seed)?;
            let value = rhsic(&zi, &zr)?.value;
            let map = rhsic_sensitivity(input, residual, &zi, &zr)?;
            Ok((value, block_mean_square(&map.sx), block_mean_square(&map.sy)))
        }
    }
}

/// Scores one pair of one-dimensional variables.
///
/// Both directions go through the same pipeline with the same seed, so
/// swapping `x` and `y` negates both scores exactly.
pub fn causal_score(x: &[f64], y: &[f64], config: &CausalConfig) -> Result<CausalDecision> {
    if x.len() != y.len() {
        return Err(Error::RowCountMismatch(x.len(), y.len()));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::TooFewSamples { required: 3, got: n });
    }
    let regressor = config.neighbors.map_or_else(|| Regressor::default_for(n), Regressor::knn);
    let xm = DataMatrix::from_column(x)?;
    let ym = DataMatrix::from_column(y)?;
    let forward_residuals = regressor.residuals(&xm, y)?;
    let backward_residuals = regressor.residuals(&ym, x)?;
    let (fwd, fx, fr) = residual_dependence(&xm, &DataMatrix::from_column(&forward_residuals)?, config)?;
    let (bwd, by, br) = residual_dependence(&ym, &DataMatrix::from_column(&backward_residuals)?, config)?;
    let components = SensitivityTerms {
        forward_x: fx,
        forward_r: fr,
        backward_y: by,
        backward_r: br,
    };
    let mut decision = CausalDecision {
        score_c: fwd - bwd,
        score_cs: (by + br) - (fx + fr),
        direction: Direction::XcausesY,
        forward_residuals,
        backward_residuals,
        components,
    };
    decision.direction = decision.direction_by(config.score);
    Ok(decision)
}

/// A pair to score, with optional ground truth and a positive weight.
#[derive(Debug, Clone, PartialEq)]
pub struct CausalPair {
    pub id: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub truth: Option<Direction>,
    pub weight: f64,
}

/// One entry of the confidence-ordered decision list.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedDecision {
    pub index: usize,
    pub id: String,
    pub score: f64,
    pub predicted: Direction,
    pub truth: Option<Direction>,
    pub weight: f64,
    /// Weight of correct decisions at or above this confidence.
    pub cumulative_correct: f64,
    /// Weight of incorrect decisions at or above this confidence.
    pub cumulative_incorrect: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub threshold: f64,
    pub false_positive_rate: f64,
    pub true_positive_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrPoint {
    pub threshold: f64,
    pub recall: f64,
    pub precision: f64,
}

/// Weighted curves for one score; `x → y` is the positive class.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedCurves {
    pub score: ScoreKind,
    pub roc: Vec<RocPoint>,
    pub pr: Vec<PrPoint>,
    /// `None` when one of the classes carries no weight.
    pub auc: Option<f64>,
    pub accuracy: Option<f64>,
    pub ranked: Vec<RankedDecision>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CausalRanking {
    pub decisions: Vec<CausalDecision>,
    pub statistic: WeightedCurves,
    pub sensitivity: WeightedCurves,
}

/// Seed used for pair `index` under root `seed`.
pub fn pair_seed(seed: u64, index: usize) -> u64 {
    derive_seed(derive_seed(seed, domain::PAIRS), index as u64)
}

/// Weighted ROC and precision-recall curves of `scores` (larger means
/// positive) against boolean labels.
pub fn weighted_curves(scores: &[f64], positive: &[bool], weights: &[f64]) -> (Vec<RocPoint>, Vec<PrPoint>, Option<f64>) {
    let total_pos: f64 = positive.iter().zip(weights).filter(|(p, _)| **p).map(|(_, w)| w).sum();
    let total_neg: f64 = positive.iter().zip(weights).filter(|(p, _)| !**p).map(|(_, w)| w).sum();
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let rate = |v: f64, total: f64| if total > 0.0 { v / total } else { 0.0 };
    let mut roc = vec![RocPoint {
        threshold: f64::INFINITY,
        false_positive_rate: 0.0,
        true_positive_rate: 0.0,
    }];
    let mut pr = Vec::new();
    let (mut tp, mut fp) = (0.0, 0.0);
    let mut auc = 0.0;
    let mut k = 0;
    while k < order.len() {
        let t = scores[order[k]];
        let (prev_tp, prev_fp) = (tp, fp);
        while k < order.len() && scores[order[k]] == t {
            let i = order[k];
            if positive[i] {
                tp += weights[i];
            } else {
                fp += weights[i];
            }
            k += 1;
        }
        // trapezoid over the tied block counts ties as half
        auc += (fp - prev_fp) * (tp + prev_tp) / 2.0;
        roc.push(RocPoint {
            threshold: t,
            false_positive_rate: rate(fp, total_neg),
            true_positive_rate: rate(tp, total_pos),
        });
        pr.push(PrPoint {
            threshold: t,
            recall: rate(tp, total_pos),
            precision: if tp + fp > 0.0 { tp / (tp + fp) } else { 1.0 },
        });
    }
    let auc = (total_pos > 0.0 && total_neg > 0.0).then(|| (auc / (total_pos * total_neg)).clamp(0.0, 1.0));
    (roc, pr, auc)
}

fn curves_for(pairs: &[CausalPair], decisions: &[CausalDecision], score: ScoreKind) -> WeightedCurves {
    let labelled: Vec<usize> = (0..pairs.len()).filter(|&i| pairs[i].truth.is_some()).collect();
    let scores: Vec<f64> = labelled.iter().map(|&i| decisions[i].forward_evidence(score)).collect();
    let positive: Vec<bool> = labelled.iter().map(|&i| pairs[i].truth == Some(Direction::XcausesY)).collect();
    let weights: Vec<f64> = labelled.iter().map(|&i| pairs[i].weight).collect();
    let (roc, pr, auc) = weighted_curves(&scores, &positive, &weights);

    let mut order: Vec<usize> = (0..pairs.len()).collect();
    let conf = |i: usize| decisions[i].forward_evidence(score).abs();
    order.sort_by(|&a, &b| conf(b).total_cmp(&conf(a)).then(a.cmp(&b)));
    let (mut good, mut bad) = (0.0, 0.0);
    let ranked = order
        .into_iter()
        .map(|i| {
            let predicted = decisions[i].direction_by(score);
            match pairs[i].truth {
                Some(t) if t == predicted => good += pairs[i].weight,
                Some(_) => bad += pairs[i].weight,
                None => {}
            }
            RankedDecision {
                index: i,
                id: pairs[i].id.clone(),
                score: decisions[i].forward_evidence(score),
                predicted,
                truth: pairs[i].truth,
                weight: pairs[i].weight,
                cumulative_correct: good,
                cumulative_incorrect: bad,
            }
        })
        .collect();
    let accuracy = (good + bad > 0.0).then(|| good / (good + bad));
    WeightedCurves {
        score,
        roc,
        pr,
        auc,
        accuracy,
        ranked,
    }
}

/// Scores every pair in parallel (pair `i` uses [`pair_seed`]) and builds
/// weighted curves for both scores.
pub fn causal_rank(pairs: &[CausalPair], config: &CausalConfig) -> Result<CausalRanking> {
    if let Some(bad) = pairs.iter().find(|p| !(p.weight.is_finite() && p.weight > 0.0)) {
        return Err(Error::InvalidParameter(format!("pair {} has non-positive weight {}", bad.id, bad.weight)));
    }
    let decisions = pairs
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let cfg = CausalConfig {
                seed: pair_seed(config.seed, i),
                ..*config
            };
            causal_score(&p.x, &p.y, &cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CausalRanking {
        statistic: curves_for(pairs, &decisions, ScoreKind::Statistic),
        sensitivity: curves_for(pairs, &decisions, ScoreKind::Sensitivity),
        decisions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn anm(n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        crate::apps::synthetic::anm_sample(0, n, &mut rng)
    }

    /// Probability that a random positive outscores a random negative,
    /// weighted, ties counting half.
    fn brute_auc(scores: &[f64], positive: &[bool], weights: &[f64]) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..scores.len() {
            for j in 0..scores.len() {
                if positive[i] && !positive[j] {
                    let w = weights[i] * weights[j];
                    den += w;
                    num += w * if scores[i] > scores[j] {
                        1.0
                    } else if scores[i] == scores[j] {
                        0.5
                    } else {
                        0.0
                    };
                }
            }
        }
        num / den
    }

    #[test]
    fn antisymmetric_under_swap() {
        let (x, y) = anm(60, 1);
        for estimator in [Estimator::Exact, Estimator::Randomized { features: 20 }] {
            let cfg = CausalConfig {
                estimator,
                seed: 9,
                ..CausalConfig::default()
            };
            let a = causal_score(&x, &y, &cfg).unwrap();
            let b = causal_score(&y, &x, &cfg).unwrap();
            assert_eq!(a.score_c, -b.score_c);
            assert_eq!(a.score_cs, -b.score_cs);
            assert_eq!(a.direction, b.direction.reversed());
            assert_eq!(a.forward_residuals, b.backward_residuals);
        }
    }

    #[test]
    fn cubic_pair_points_forward() {
        let (x, y) = anm(200, 2);
        let d = causal_score(&x, &y, &CausalConfig::default()).unwrap();
        assert!(d.score_c < 0.0);
        assert_eq!(d.direction, Direction::XcausesY);
    }

    #[test]
    fn affine_map_of_x_keeps_residuals() {
        let (x, y) = anm(80, 3);
        let x2: Vec<f64> = x.iter().map(|v| 3.0 * v + 2.0).collect();
        let cfg = CausalConfig::default();
        let a = causal_score(&x, &y, &cfg).unwrap();
        let b = causal_score(&x2, &y, &cfg).unwrap();
        assert_eq!(a.forward_residuals, b.forward_residuals);
        assert_eq!(a.score_c < 0.0, b.score_c < 0.0);
    }

    #[test]
    fn auc_matches_brute_force_on_small_fixtures() {
        let weights = [0.25; 4];
        let fixtures: [([f64; 4], [bool; 4]); 4] = [
            ([0.9, 0.2, 0.5, -0.1], [true, false, true, false]),
            ([0.1, 0.2, 0.3, 0.4], [true, false, true, false]),
            ([0.5, 0.5, 0.2, 0.5], [true, false, false, true]),
            ([-1.0, 2.0, 0.0, 1.0], [false, true, true, false]),
        ];
        for (scores, labels) in fixtures {
            let (_, _, auc) = weighted_curves(&scores, &labels, &weights);
            assert!((auc.unwrap() - brute_auc(&scores, &labels, &weights)).abs() < 1e-15);
        }
    }

    #[test]
    fn auc_weighted_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let scores: Vec<f64> = (0..12).map(|_| (rng.random::<f64>() * 4.0).round()).collect();
            let labels: Vec<bool> = (0..12).map(|i| i % 3 != 0).collect();
            let weights: Vec<f64> = (0..12).map(|_| rng.random::<f64>() + 0.1).collect();
            let (roc, _, auc) = weighted_curves(&scores, &labels, &weights);
            assert!((auc.unwrap() - brute_auc(&scores, &labels, &weights)).abs() < 1e-12);
            let last = roc.last().unwrap();
            assert!((last.true_positive_rate - 1.0).abs() < 1e-12 && (last.false_positive_rate - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn perfect_separation_and_missing_class() {
        let (_, pr, auc) = weighted_curves(&[3.0, 2.0, -1.0, -2.0], &[true, true, false, false], &[1.0; 4]);
        assert_eq!(auc, Some(1.0));
        assert_eq!(pr[1].precision, 1.0);
        assert_eq!(pr[1].recall, 1.0);
        let (_, _, auc) = weighted_curves(&[3.0, 2.0], &[true, true], &[1.0; 2]);
        assert_eq!(auc, None);
    }

    #[test]
    fn rank_orders_by_confidence() {
        let pairs: Vec<CausalPair> = (0..4)
            .map(|i| {
                let (x, y) = anm(50, 10 + i);
                let (x, y, truth) = if i % 2 == 0 {
                    (x, y, Direction::XcausesY)
                } else {
                    (y, x, Direction::YcausesX)
                };
                CausalPair {
                    id: format!("p{i}"),
                    x,
                    y,
                    truth: Some(truth),
                    weight: 0.25,
                }
            })
            .collect();
        let r = causal_rank(&pairs, &CausalConfig::default()).unwrap();
        let conf: Vec<f64> = r.statistic.ranked.iter().map(|d| d.score.abs()).collect();
        assert!(conf.windows(2).all(|w| w[0] >= w[1]));
        let last = r.statistic.ranked.last().unwrap();
        assert!((last.cumulative_correct + last.cumulative_incorrect - 1.0).abs() < 1e-15);
        assert_eq!(r.decisions.len(), 4);

        let mut bad = pairs.clone();
        bad[0].weight = 0.0;
        assert!(causal_rank(&bad, &CausalConfig::default()).is_err());
    }
}
