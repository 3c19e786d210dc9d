//! SEER-SEM effort path: effective technology, lifecycle effort, development effort.

use serde::{Deserialize, Serialize};

use crate::bank::NfBank;
use crate::dataset::ProjectRecord;
use crate::error::{Error, Result};

/// Ratio of development effort to total lifecycle effort.
pub const DEVELOPMENT_FRACTION: f64 = 0.393469;

/// Tunable constants of the effort equations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SeerConstants {
    pub development_fraction: f64,
    pub staffing_exponent: f64,
    pub size_exponent: f64,
    pub months_per_year: f64,
}

impl Default for SeerConstants {
    fn default() -> Self {
        SeerConstants {
            development_fraction: DEVELOPMENT_FRACTION,
            staffing_exponent: 0.4,
            size_exponent: 1.2,
            months_per_year: 12.0,
        }
    }
}

impl SeerConstants {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("development_fraction", self.development_fraction),
            ("staffing_exponent", self.staffing_exponent),
            ("size_exponent", self.size_exponent),
            ("months_per_year", self.months_per_year),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::ParameterDomain(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeerInputs {
    /// Effective size in KLOC.
    pub se: f64,
    /// Staffing complexity.
    pub d: f64,
    /// Effective technology.
    pub cte: f64,
    /// Basic technology constant.
    pub ctb: f64,
}

impl SeerInputs {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("se", self.se), ("d", self.d), ("cte", self.cte), ("ctb", self.ctb)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::ParameterDomain(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EffortEstimate {
    pub k_person_years: f64,
    pub e_person_years: f64,
    pub e_person_months: f64,
}

/// `cte = ctb / prod(m_i)`: every effort multiplier above one erodes the
/// technology rating.
pub fn effective_technology(ctb: f64, multipliers: impl IntoIterator<Item = f64>) -> Result<f64> {
    if !(ctb.is_finite() && ctb > 0.0) {
        return Err(Error::ParameterDomain(format!("ctb must be > 0, got {ctb}")));
    }
    let mut product = 1.0;
    for m in multipliers {
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::ParameterDomain(format!("multiplier must be > 0, got {m}")));
        }
        product *= m;
    }
    Ok(ctb / product)
}

/// `K = d^0.4 * (se / cte)^1.2` person-years (exponents from `constants`).
pub fn lifecycle_effort(inputs: &SeerInputs, constants: &SeerConstants) -> Result<f64> {
    inputs.validate()?;
    Ok(inputs.d.powf(constants.staffing_exponent) * (inputs.se / inputs.cte).powf(constants.size_exponent))
}

pub fn development_effort(k: f64, constants: &SeerConstants) -> Result<EffortEstimate> {
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::ParameterDomain(format!("lifecycle effort must be > 0, got {k}")));
    }
    let e = constants.development_fraction * k;
    Ok(EffortEstimate {
        k_person_years: k,
        e_person_years: e,
        e_person_months: constants.months_per_year * e,
    })
}

/// Full estimate for one project: bank multipliers, then `cte`, `K`, `E`.
/// A project's own staffing complexity overrides the bank's `d`.
pub fn estimate_detailed(project: &ProjectRecord, bank: &NfBank) -> Result<EffortEstimate> {
    project.validate()?;
    let multipliers = bank.multipliers_for(project)?;
    let cte = effective_technology(bank.ctb(), multipliers.values().copied()).map_err(|e| e.in_record(&project.id))?;
    let inputs = SeerInputs {
        se: project.size_kloc,
        d: project.staffing_complexity.unwrap_or(bank.d()),
        cte,
        ctb: bank.ctb(),
    };
    let k = lifecycle_effort(&inputs, bank.constants()).map_err(|e| e.in_record(&project.id))?;
    development_effort(k, bank.constants()).map_err(|e| e.in_record(&project.id))
}

/// Development effort in person-months.
pub fn estimate(project: &ProjectRecord, bank: &NfBank) -> Result<f64> {
    Ok(estimate_detailed(project, bank)?.e_person_months)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c() -> SeerConstants {
        SeerConstants::default()
    }

    #[test]
    fn technology_examples() {
        assert_eq!(effective_technology(5000.0, [1.0, 1.0, 1.0]).unwrap(), 5000.0);
        assert_eq!(effective_technology(5000.0, [2.0, 0.5]).unwrap(), 5000.0);
        assert!((effective_technology(5000.0, [1.2]).unwrap() - 4166.666666666667).abs() < 1e-9);
        assert!(effective_technology(5000.0, [0.0]).is_err());
        assert!(effective_technology(-1.0, []).is_err());
    }

    #[test]
    fn lifecycle_examples() {
        let base = SeerInputs {
            se: 7.0,
            d: 1.0,
            cte: 7.0,
            ctb: 7.0,
        };
        assert_eq!(lifecycle_effort(&base, &c()).unwrap(), 1.0);
        let doubled = SeerInputs { se: 14.0, ..base };
        let ratio = lifecycle_effort(&doubled, &c()).unwrap() / lifecycle_effort(&base, &c()).unwrap();
        assert!((ratio - 2.2973967099940698).abs() < 1e-12);
        let staffed = SeerInputs { d: 2.0, ..base };
        assert!((lifecycle_effort(&staffed, &c()).unwrap() - 1.3195079107728942).abs() < 1e-12);
        assert!(lifecycle_effort(&SeerInputs { se: 0.0, ..base }, &c()).is_err());
    }

    #[test]
    fn development_examples() {
        let one = development_effort(1.0, &c()).unwrap();
        assert_eq!(one.e_person_years, 0.393469);
        assert!((one.e_person_months - 4.721628).abs() < 1e-12);
        assert!((development_effort(10.0, &c()).unwrap().e_person_years - 3.93469).abs() < 1e-15);
        assert!(development_effort(1e-300, &c()).unwrap().e_person_years < 1e-299);
        assert!(development_effort(0.0, &c()).is_err());
    }
}
