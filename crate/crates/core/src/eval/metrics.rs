//! Accuracy measures for effort predictions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Magnitude of relative error `|actual - predicted| / actual`.
pub fn mre(actual: f64, predicted: f64) -> Result<f64> {
    if !(actual.is_finite() && actual > 0.0) {
        return Err(Error::ParameterDomain(format!(
            "actual effort must be > 0, got {actual}"
        )));
    }
    if !(predicted.is_finite() && predicted >= 0.0) {
        return Err(Error::ParameterDomain(format!(
            "predicted effort must be >= 0, got {predicted}"
        )));
    }
    Ok((actual - predicted).abs() / actual)
}

fn check(actuals: &[f64], predictions: &[f64]) -> Result<()> {
    if actuals.len() != predictions.len() {
        return Err(Error::Argument(format!(
            "{} actuals but {} predictions",
            actuals.len(),
            predictions.len()
        )));
    }
    if actuals.is_empty() {
        return Err(Error::Argument("no observations".into()));
    }
    Ok(())
}

pub fn mres(actuals: &[f64], predictions: &[f64]) -> Result<Vec<f64>> {
    check(actuals, predictions)?;
    actuals.iter().zip(predictions).map(|(a, p)| mre(*a, *p)).collect()
}

pub fn mmre(actuals: &[f64], predictions: &[f64]) -> Result<f64> {
    let e = mres(actuals, predictions)?;
    Ok(e.iter().sum::<f64>() / e.len() as f64)
}

/// Median MRE; an even count takes the mean of the two central values.
pub fn mdmre(actuals: &[f64], predictions: &[f64]) -> Result<f64> {
    Ok(median(&mres(actuals, predictions)?))
}

/// Fraction of observations with MRE at most `x`.
pub fn pred(actuals: &[f64], predictions: &[f64], x: f64) -> Result<f64> {
    if x.is_nan() || x <= 0.0 {
        return Err(Error::Argument(format!("PRED threshold must be > 0, got {x}")));
    }
    let e = mres(actuals, predictions)?;
    Ok(e.iter().filter(|m| **m <= x).count() as f64 / e.len() as f64)
}

pub fn mse(actuals: &[f64], predictions: &[f64]) -> Result<f64> {
    check(actuals, predictions)?;
    let sum: f64 = actuals.iter().zip(predictions).map(|(a, p)| (a - p) * (a - p)).sum();
    Ok(sum / actuals.len() as f64)
}

/// Median of a nonempty sample.
pub(crate) fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// The five accuracy columns reported for a model. PRED values lie in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub n: usize,
    pub mmre: f64,
    pub mdmre: f64,
    pub pred30: f64,
    pub pred50: f64,
    pub mse: f64,
}

impl MetricSet {
    pub fn compute(actuals: &[f64], predictions: &[f64]) -> Result<MetricSet> {
        let e = mres(actuals, predictions)?;
        let n = e.len();
        let frac = |x: f64| e.iter().filter(|m| **m <= x).count() as f64 / n as f64;
        Ok(MetricSet {
            n,
            mmre: e.iter().sum::<f64>() / n as f64,
            mdmre: median(&e),
            pred30: frac(0.30),
            pred50: frac(0.50),
            mse: mse(actuals, predictions)?,
        })
    }
}

/// Candidate gains over the baseline: `baseline - candidate` for the error
/// measures and `candidate - baseline` for PRED, so positive is better.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Improvement {
    pub mmre: f64,
    pub mdmre: f64,
    pub pred30: f64,
    pub pred50: f64,
    pub mse: f64,
    /// `(baseline - candidate) / baseline` for MMRE; zero when the baseline MMRE is zero.
    pub mmre_relative: f64,
}

impl Improvement {
    pub fn between(baseline: &MetricSet, candidate: &MetricSet) -> Improvement {
        Improvement {
            mmre: baseline.mmre - candidate.mmre,
            mdmre: baseline.mdmre - candidate.mdmre,
            pred30: candidate.pred30 - baseline.pred30,
            pred50: candidate.pred50 - baseline.pred50,
            mse: baseline.mse - candidate.mse,
            mmre_relative: if baseline.mmre > 0.0 {
                (baseline.mmre - candidate.mmre) / baseline.mmre
            } else {
                0.0
            },
        }
    }

    /// True when the candidate is strictly better on all five measures.
    pub fn all_better(&self) -> bool {
        self.mmre > 0.0 && self.mdmre > 0.0 && self.pred30 > 0.0 && self.pred50 > 0.0 && self.mse > 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mre_examples() {
        assert_eq!(mre(100.0, 100.0).unwrap(), 0.0);
        assert_eq!(mre(100.0, 150.0).unwrap(), 0.5);
        assert_eq!(mre(200.0, 100.0).unwrap(), 0.5);
        assert!(mre(0.0, 1.0).is_err());
        assert!(mre(-3.0, 1.0).is_err());
    }

    #[test]
    fn aggregate_examples() {
        assert_eq!(mmre(&[100.0, 200.0], &[100.0, 200.0]).unwrap(), 0.0);
        assert!((mmre(&[100.0, 200.0], &[110.0, 180.0]).unwrap() - 0.1).abs() < 1e-15);
        assert_eq!(mdmre(&[100.0], &[150.0]).unwrap(), 0.5);
        assert!((median(&[0.1, 0.9, 0.2]) - 0.2).abs() < 1e-15);
        assert!((median(&[0.1, 0.3]) - 0.2).abs() < 1e-15);
        assert_eq!(mse(&[1.0, 2.0], &[2.0, 4.0]).unwrap(), 2.5);
    }

    #[test]
    fn pred_examples() {
        // MREs 0.1, 0.25, 0.31, 0.6
        let a = [100.0; 4];
        let p = [110.0, 125.0, 131.0, 160.0];
        assert_eq!(pred(&a, &p, 0.3).unwrap(), 0.5);
        assert_eq!(pred(&a, &p, f64::INFINITY).unwrap(), 1.0);
        assert_eq!(pred(&a, &p, 0.6).unwrap(), 1.0);
    }

    #[test]
    fn shape_errors() {
        assert!(matches!(mmre(&[1.0], &[1.0, 2.0]), Err(Error::Argument(_))));
        assert!(matches!(mse(&[], &[]), Err(Error::Argument(_))));
    }

    #[test]
    fn improvement_signs() {
        let b = MetricSet {
            n: 4,
            mmre: 0.5,
            mdmre: 0.4,
            pred30: 0.25,
            pred50: 0.5,
            mse: 10.0,
        };
        let c = MetricSet {
            n: 4,
            mmre: 0.3,
            mdmre: 0.3,
            pred30: 0.5,
            pred50: 0.75,
            mse: 4.0,
        };
        let i = Improvement::between(&b, &c);
        assert!(i.all_better());
        assert!((i.mmre_relative - 0.4).abs() < 1e-15);
        assert!(!Improvement::between(&b, &b).all_better());
    }
}
