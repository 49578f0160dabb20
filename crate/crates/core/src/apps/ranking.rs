//! Filter-style feature ranking against a single target.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::hsic::hsic;
use crate::kernelcore::{shifted_mean, BandwidthSpec, DataMatrix};
use crate::sensmap::{aggregate, hsic_sensitivity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RankCriterion {
    /// HSIC between each feature alone and the target.
    HsicPerFeature,
    /// Mean squared HSIC sensitivity of each `X` column, all features jointly.
    SensitivityPerFeature,
    /// Absolute Pearson correlation.
    PearsonAbs,
}

impl RankCriterion {
    pub const ALL: [RankCriterion; 3] = [
        RankCriterion::HsicPerFeature,
        RankCriterion::SensitivityPerFeature,
        RankCriterion::PearsonAbs,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            RankCriterion::HsicPerFeature => "hsic",
            RankCriterion::SensitivityPerFeature => "sensitivity",
            RankCriterion::PearsonAbs => "pearson",
        }
    }
}

impl fmt::Display for RankCriterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RankCriterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hsic" => Ok(RankCriterion::HsicPerFeature),
            "sensitivity" => Ok(RankCriterion::SensitivityPerFeature),
            "pearson" => Ok(RankCriterion::PearsonAbs),
            other => Err(Error::InvalidParameter(format!(
                "unknown criterion {other:?}, expected hsic, sensitivity or pearson"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRanking {
    pub scores: Vec<f64>,
    /// Feature indices by descending score, ties by lower index.
    pub order: Vec<usize>,
    pub criterion: RankCriterion,
}

impl FeatureRanking {
    pub fn top(&self, nf: usize) -> &[usize] {
        &self.order[..nf.min(self.order.len())]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RankConfig {
    pub bandwidth: BandwidthSpec,
}

/// Sample Pearson correlation, clamped to `[−1, 1]`.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::RowCountMismatch(x.len(), y.len()));
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::TooFewSamples { required: 2, got: n });
    }
    let mx = shifted_mean(x.iter().copied(), n);
    let my = shifted_mean(y.iter().copied(), n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

fn is_constant(values: &[f64]) -> bool {
    values.iter().all(|&v| v == values[0])
}

/// Scores every column of `x` against `y` and sorts them. Constant features
/// score zero under every criterion.
pub fn rank_features(x: &DataMatrix, y: &DataMatrix, criterion: RankCriterion, config: &RankConfig) -> Result<FeatureRanking> {
    if y.d() != 1 {
        return Err(Error::ShapeMismatch(format!("target must have one column, got {}", y.d())));
    }
    if x.n() != y.n() {
        return Err(Error::RowCountMismatch(x.n(), y.n()));
    }
    if x.n() < 2 {
        return Err(Error::TooFewSamples { required: 2, got: x.n() });
    }
    let target = y.column_values(0);
    let constant: Vec<bool> = (0..x.d()).map(|j| is_constant(&x.column_values(j))).collect();
    let scores = match criterion {
        RankCriterion::HsicPerFeature => {
            let sy = config.bandwidth.resolve(y)?;
            let mut scores = Vec::with_capacity(x.d());
            for (j, &flat) in constant.iter().enumerate() {
                scores.push(if flat {
                    0.0
                } else {
                    let col = x.column(j);
                    hsic(&col, y, config.bandwidth.resolve(&col)?, sy)?.value
                });
            }
            scores
        }
        RankCriterion::SensitivityPerFeature => {
            let map = hsic_sensitivity(x, y, config.bandwidth.resolve(x)?, config.bandwidth.resolve(y)?)?;
            aggregate(&map).per_feature[..x.d()].to_vec()
        }
        RankCriterion::PearsonAbs => {
            let mut scores = Vec::with_capacity(x.d());
            for (j, &flat) in constant.iter().enumerate() {
                scores.push(if flat { 0.0 } else { pearson(&x.column_values(j), &target)?.abs() });
            }
            scores
        }
    };
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    Ok(FeatureRanking {
        scores,
        order,
        criterion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn pearson_affine_and_reversed() {
        let x: Vec<f64> = (0..20).map(|i| i as f64 * 0.37 - 2.0).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        assert!((pearson(&x, &y).unwrap() - 1.0).abs() < 1e-15);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson(&x, &neg).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn pearson_errors() {
        assert_eq!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), Err(Error::ZeroVariance));
        assert_eq!(pearson(&[1.0, 2.0], &[1.0]), Err(Error::RowCountMismatch(2, 1)));
        assert!(matches!(pearson(&[1.0], &[1.0]), Err(Error::TooFewSamples { .. })));
    }

    #[test]
    fn pearson_matches_textbook_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x: Vec<f64> = (0..50).map(|_| StandardNormal.sample(&mut rng)).collect();
        let y: Vec<f64> = x.iter().map(|v| v + 0.7 * Distribution::<f64>::sample(&StandardNormal, &mut rng)).collect();
        let n = 50.0;
        let (sx, sy) = (x.iter().sum::<f64>(), y.iter().sum::<f64>());
        let sxy: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let sxx: f64 = x.iter().map(|a| a * a).sum();
        let syy: f64 = y.iter().map(|b| b * b).sum();
        let want = (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt());
        assert!((pearson(&x, &y).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn single_feature_order() {
        let x = DataMatrix::from_column(&[0.1, 0.5, 0.2, 0.9]).unwrap();
        let y = DataMatrix::from_column(&[1.0, 0.0, 2.0, 0.5]).unwrap();
        for c in RankCriterion::ALL {
            assert_eq!(rank_features(&x, &y, c, &RankConfig::default()).unwrap().order, vec![0]);
        }
    }

    #[test]
    fn ties_break_by_index_and_constants_score_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let col: Vec<f64> = (0..30).map(|_| StandardNormal.sample(&mut rng)).collect();
        let x = Array2::from_shape_fn((30, 4), |(i, j)| match j {
            0 | 3 => 5.0,
            _ => col[i],
        });
        let x = DataMatrix::new(x).unwrap();
        let y = DataMatrix::from_column(&col.iter().map(|v| v * v).collect::<Vec<_>>()).unwrap();
        for c in RankCriterion::ALL {
            let r = rank_features(&x, &y, c, &RankConfig::default()).unwrap();
            assert_eq!(r.scores[0], 0.0, "{c}");
            assert_eq!(r.scores[1], r.scores[2], "{c}");
            assert_eq!(r.order, vec![1, 2, 0, 3], "{c}");
        }
    }

    #[test]
    fn rejects_multicolumn_target() {
        let x = DataMatrix::from_column(&[0.0, 1.0, 2.0]).unwrap();
        let y = DataMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0], vec![2.0, 2.0]]).unwrap();
        assert!(matches!(
            rank_features(&x, &y, RankCriterion::PearsonAbs, &RankConfig::default()),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn criterion_names_round_trip() {
        for c in RankCriterion::ALL {
            assert_eq!(c.as_str().parse::<RankCriterion>().unwrap(), c);
        }
        assert!("greedy".parse::<RankCriterion>().is_err());
    }
}
