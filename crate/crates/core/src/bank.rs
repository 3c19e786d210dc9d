//! The neuro-fuzzy bank: one ANFIS sub-model per SEER parameter, turning a
//! rating ordinal into an effort multiplier, trained end to end through the
//! effort equation.
//!
//! Training minimizes `L = sum_j ((E_hat_j - E_j) / E_j)^2`. Each epoch:
//!
//! 1. refits `ctb` in closed form (the exact minimizer of `L` along `ctb`);
//! 2. per sub-model, solves a weighted least-squares problem for the
//!    consequents against the multiplier each project would need to be
//!    predicted exactly, keeping the solve only if `L` drops;
//! 3. takes one gradient step on every premise, back-propagating through
//!    `E_hat ∝ prod m_i^1.2`;
//! 4. rescales each sub-model so its Nominal output equals the Nominal
//!    anchor (the scale moves into `ctb`, predictions are unchanged);
//! 5. projects sub-models that left their declared direction back onto a
//!    monotone curve.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::anfis::{AnfisNet, Domain, ModelFile, PremiseGradient, TrainConfig};
use crate::dataset::ProjectRecord;
use crate::error::{Error, Result};
use crate::isotonic::isotonic_fit;
use crate::rating::{MappingTable, RatingLevel};
use crate::seer::SeerConstants;

pub const DEFAULT_SPECS_TOML: &str = include_str!("../config/parameters.toml");

/// Multipliers never drop below this value.
pub const MULTIPLIER_FLOOR: f64 = 1e-3;
/// Allowed relative error when a sub-model reproduces its anchors.
pub const ANCHOR_TOLERANCE: f64 = 0.01;
pub const MONOTONE_GRID: usize = 101;
pub const MONOTONE_SLACK: f64 = 1e-9;
/// Linear fill points between adjacent anchors when fitting a curve.
const INTERIOR_POINTS: usize = 8;
const NOMINAL_ORDINAL: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    IncreasesEffort,
    DecreasesEffort,
}

impl Direction {
    fn increasing(self) -> bool {
        self == Direction::IncreasesEffort
    }
}

/// Roster entry for one SEER parameter: its direction and anchor multipliers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterSpec {
    pub name: String,
    pub direction: Direction,
    /// Multiplier at every defined level; the keys are the defined levels.
    pub anchors: BTreeMap<RatingLevel, f64>,
}

impl ParameterSpec {
    pub fn new(name: &str, direction: Direction, anchors: BTreeMap<RatingLevel, f64>) -> Result<Self> {
        let spec = ParameterSpec {
            name: name.to_string(),
            direction,
            anchors,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Geometric ladder: 1.0 at Nominal, `1 ± step` per rating step in the
    /// declared direction.
    pub fn ladder(name: &str, direction: Direction, levels: &[RatingLevel], step: f64) -> Result<Self> {
        let ratio = match direction {
            Direction::IncreasesEffort => 1.0 + step,
            Direction::DecreasesEffort => 1.0 / (1.0 + step),
        };
        let anchors = levels
            .iter()
            .map(|l| (*l, ratio.powf(l.ordinal() - NOMINAL_ORDINAL)))
            .collect();
        ParameterSpec::new(name, direction, anchors)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |reason: String| {
            Err(Error::SpecValidation {
                parameter: self.name.clone(),
                reason,
            })
        };
        if self.anchors.is_empty() {
            return fail("no defined levels".into());
        }
        for (level, v) in &self.anchors {
            if !(v.is_finite() && *v > 0.0) {
                return fail(format!("anchor at {level} must be > 0, got {v}"));
            }
        }
        let values: Vec<(RatingLevel, f64)> = self.anchors.iter().map(|(l, v)| (*l, *v)).collect();
        for pair in values.windows(2) {
            let (l0, v0) = pair[0];
            let (l1, v1) = pair[1];
            let bad = match self.direction {
                Direction::IncreasesEffort => v1 < v0,
                Direction::DecreasesEffort => v1 > v0,
            };
            if bad {
                return fail(format!(
                    "anchors not monotone ({l0} = {v0}, {l1} = {v1}) for direction {:?}",
                    self.direction
                ));
            }
        }
        Ok(())
    }

    pub fn levels(&self) -> Vec<RatingLevel> {
        self.anchors.keys().copied().collect()
    }

    pub fn domain(&self) -> Domain {
        let lo = self.anchors.keys().next().expect("validated").ordinal();
        let hi = self.anchors.keys().next_back().expect("validated").ordinal();
        Domain { lo, hi }
    }

    /// Input used when a project does not rate this parameter.
    pub fn nominal_input(&self) -> f64 {
        let d = self.domain();
        NOMINAL_ORDINAL.clamp(d.lo, d.hi)
    }

    /// Log-linear interpolation of the anchor table.
    pub fn anchor_at(&self, x: f64) -> f64 {
        let pts: Vec<(f64, f64)> = self.anchors.iter().map(|(l, v)| (l.ordinal(), *v)).collect();
        interpolate_log(&pts, x)
    }
}

fn interpolate_log(pts: &[(f64, f64)], x: f64) -> f64 {
    if x <= pts[0].0 {
        return pts[0].1;
    }
    for w in pts.windows(2) {
        let ((x0, v0), (x1, v1)) = (w[0], w[1]);
        if x <= x1 {
            let t = (x - x0) / (x1 - x0);
            return (v0.ln() + t * (v1.ln() - v0.ln())).exp();
        }
    }
    pts[pts.len() - 1].1
}

/// Anchor pairs plus fill points between adjacent anchors, taken from the
/// monotone cubic (Fritsch-Carlson) interpolant through the anchors. The
/// interpolant is smooth and never overshoots, which keeps the fitted curve
/// from rippling where the ladder changes slope.
fn curve_samples(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let slopes = pchip_slopes(points);
    let mut out = Vec::with_capacity(points.len() * (INTERIOR_POINTS + 1));
    for (i, &(x0, y0)) in points.iter().enumerate() {
        out.push((x0, y0));
        if let Some(&(x1, y1)) = points.get(i + 1) {
            let h = x1 - x0;
            for k in 1..=INTERIOR_POINTS {
                let t = k as f64 / (INTERIOR_POINTS + 1) as f64;
                let (t2, t3) = (t * t, t * t * t);
                let y = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
                    + (t3 - 2.0 * t2 + t) * h * slopes[i]
                    + (-2.0 * t3 + 3.0 * t2) * y1
                    + (t3 - t2) * h * slopes[i + 1];
                out.push((x0 + t * h, y));
            }
        }
    }
    out
}

fn pchip_slopes(points: &[(f64, f64)]) -> Vec<f64> {
    let n = points.len();
    if n < 2 {
        return vec![0.0; n];
    }
    let h: Vec<f64> = points.windows(2).map(|w| w[1].0 - w[0].0).collect();
    let delta: Vec<f64> = points.windows(2).zip(&h).map(|(w, h)| (w[1].1 - w[0].1) / h).collect();
    if n == 2 {
        return vec![delta[0]; 2];
    }
    let mut d = vec![0.0; n];
    for k in 1..n - 1 {
        if delta[k - 1] * delta[k] > 0.0 {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
        }
    }
    let end = |h0: f64, h1: f64, d0: f64, d1: f64| {
        let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if s * d0 <= 0.0 {
            0.0
        } else if d0 * d1 <= 0.0 && s.abs() > 3.0 * d0.abs() {
            3.0 * d0
        } else {
            s
        }
    };
    d[0] = end(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

#[derive(Deserialize, Serialize)]
struct SpecFileEntry {
    name: String,
    direction: Direction,
    anchors: BTreeMap<String, f64>,
}

#[derive(Deserialize, Serialize)]
struct SpecFile {
    parameter: Vec<SpecFileEntry>,
}

/// Parses a parameter-spec TOML document:
///
/// ```toml
/// [[parameter]]
/// name = "ACAP"
/// direction = "decreases_effort"   # or "increases_effort"
/// anchors = { "VLo" = 1.17, "Low" = 1.08, "Nom" = 1.0, "Hi" = 0.93 }
/// ```
pub fn parse_specs(text: &str) -> Result<Vec<ParameterSpec>> {
    let file: SpecFile = toml::from_str(text)?;
    let mut names = std::collections::BTreeSet::new();
    file.parameter
        .into_iter()
        .map(|e| {
            if !names.insert(e.name.clone()) {
                return Err(Error::SpecValidation {
                    parameter: e.name,
                    reason: "declared twice".into(),
                });
            }
            let mut anchors = BTreeMap::new();
            for (token, v) in e.anchors {
                let level: RatingLevel = token.parse()?;
                if anchors.insert(level, v).is_some() {
                    return Err(Error::SpecValidation {
                        parameter: e.name.clone(),
                        reason: format!("level {token} listed twice"),
                    });
                }
            }
            ParameterSpec::new(&e.name, e.direction, anchors)
        })
        .collect()
}

pub fn load_specs(path: &Path) -> Result<Vec<ParameterSpec>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_specs(&text)
}

pub fn default_specs() -> Vec<ParameterSpec> {
    parse_specs(DEFAULT_SPECS_TOML).expect("shipped parameter specs are valid")
}

/// Renders specs in the TOML layout read by [`parse_specs`].
pub fn specs_to_toml(specs: &[ParameterSpec]) -> String {
    let mut out = String::new();
    for s in specs {
        let direction = match s.direction {
            Direction::IncreasesEffort => "increases_effort",
            Direction::DecreasesEffort => "decreases_effort",
        };
        let anchors: Vec<String> = s.anchors.iter().map(|(l, v)| format!("\"{l}\" = {v:?}")).collect();
        out.push_str(&format!(
            "[[parameter]]\nname = \"{}\"\ndirection = \"{direction}\"\nanchors = {{ {} }}\n\n",
            s.name,
            anchors.join(", ")
        ));
    }
    out
}

/// Builds a roster from the SEER levels defined in a mapping table.
pub fn specs_from_table(
    table: &MappingTable,
    directions: &BTreeMap<&str, Direction>,
    step: f64,
) -> Result<Vec<ParameterSpec>> {
    table
        .seer_parameters()
        .into_iter()
        .map(|p| {
            let direction = *directions
                .get(p)
                .ok_or_else(|| Error::UnknownParameter(p.to_string()))?;
            ParameterSpec::ladder(p, direction, &table.seer_levels(p), step)
        })
        .collect()
}

/// Settings shared by every bank built from anchors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BankSettings {
    pub ctb: f64,
    pub d: f64,
    pub constants: SeerConstants,
    /// Hybrid training used to fit each sub-model to its anchors.
    pub anchor_fit: TrainConfig,
}

impl Default for BankSettings {
    fn default() -> Self {
        BankSettings {
            ctb: 2.0,
            d: 1.0,
            constants: SeerConstants::default(),
            anchor_fit: TrainConfig {
                epochs: 100,
                learning_rate: 1e-3,
                tolerance: 1e-14,
                seed: 0,
            },
        }
    }
}

/// Options for [`NfBank::train`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BankTrainOptions {
    pub train: TrainConfig,
    /// Weight of the current curve, relative to one project, in the
    /// consequent solve; keeps levels the data never visits in place.
    pub curve_prior: f64,
    pub enforce_monotone: bool,
}

impl Default for BankTrainOptions {
    fn default() -> Self {
        BankTrainOptions {
            train: TrainConfig {
                epochs: 60,
                learning_rate: 1e-3,
                tolerance: 0.0,
                seed: 0,
            },
            curve_prior: 0.5,
            enforce_monotone: true,
        }
    }
}

/// Loss bookkeeping for one training epoch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EpochLoss {
    pub epoch: usize,
    pub before_ctb: f64,
    pub after_ctb: f64,
    pub after_update: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub parameter: String,
    /// Index of the left grid point of the offending pair.
    pub index: usize,
    pub x: (f64, f64),
    pub y: (f64, f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct NfBank {
    specs: BTreeMap<String, ParameterSpec>,
    submodels: BTreeMap<String, AnfisNet>,
    ctb: f64,
    d: f64,
    constants: SeerConstants,
}

/// Per-project quantities reused across one training step.
struct Snapshot {
    /// `[param][project]` multiplier after the floor.
    multipliers: Vec<Vec<f64>>,
    /// `[param][project]` whether the floor was active.
    floored: Vec<Vec<bool>>,
    predictions: Vec<f64>,
    loss: f64,
}

impl NfBank {
    pub fn new(
        specs: Vec<ParameterSpec>,
        submodels: BTreeMap<String, AnfisNet>,
        ctb: f64,
        d: f64,
        constants: SeerConstants,
    ) -> Result<Self> {
        let specs: BTreeMap<String, ParameterSpec> = specs.into_iter().map(|s| (s.name.clone(), s)).collect();
        let bank = NfBank {
            specs,
            submodels,
            ctb,
            d,
            constants,
        };
        bank.validate()?;
        Ok(bank)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ctb.is_finite() && self.ctb > 0.0) {
            return Err(Error::ParameterDomain(format!("ctb must be > 0, got {}", self.ctb)));
        }
        if !(self.d.is_finite() && self.d > 0.0) {
            return Err(Error::ParameterDomain(format!("d must be > 0, got {}", self.d)));
        }
        self.constants.validate()?;
        if self.specs.len() != self.submodels.len() {
            return Err(Error::Argument("every parameter needs exactly one sub-model".into()));
        }
        for (name, spec) in &self.specs {
            spec.validate()?;
            let net = self
                .submodels
                .get(name)
                .ok_or_else(|| Error::UnknownParameter(name.clone()))?;
            net.validate()?;
            let (want, have) = (spec.domain(), net.domain());
            if have.lo > want.lo || have.hi < want.hi {
                return Err(Error::SpecValidation {
                    parameter: name.clone(),
                    reason: format!(
                        "sub-model domain [{}, {}] does not cover [{}, {}]",
                        have.lo, have.hi, want.lo, want.hi
                    ),
                });
            }
        }
        Ok(())
    }

    /// Fits one sub-model per spec so it reproduces every anchor within 1%.
    pub fn init_from_anchors(specs: Vec<ParameterSpec>, settings: &BankSettings) -> Result<Self> {
        let mut submodels = BTreeMap::new();
        for spec in &specs {
            spec.validate()?;
            submodels.insert(spec.name.clone(), fit_anchor_curve(spec, &settings.anchor_fit)?);
        }
        NfBank::new(specs, submodels, settings.ctb, settings.d, settings.constants)
    }

    pub fn ctb(&self) -> f64 {
        self.ctb
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn constants(&self) -> &SeerConstants {
        &self.constants
    }

    pub fn specs(&self) -> impl Iterator<Item = &ParameterSpec> {
        self.specs.values()
    }

    pub fn spec(&self, name: &str) -> Option<&ParameterSpec> {
        self.specs.get(name)
    }

    pub fn submodel(&self, name: &str) -> Option<&AnfisNet> {
        self.submodels.get(name)
    }

    pub fn parameters(&self) -> impl Iterator<Item = &str> {
        self.specs.keys().map(String::as_str)
    }

    pub fn with_ctb(&self, ctb: f64) -> Result<Self> {
        let mut bank = self.clone();
        bank.ctb = ctb;
        bank.validate()?;
        Ok(bank)
    }

    pub fn with_d(&self, d: f64) -> Result<Self> {
        let mut bank = self.clone();
        bank.d = d;
        bank.validate()?;
        Ok(bank)
    }

    pub fn with_submodel(&self, name: &str, net: AnfisNet) -> Result<Self> {
        if !self.specs.contains_key(name) {
            return Err(Error::UnknownParameter(name.to_string()));
        }
        let mut bank = self.clone();
        bank.submodels.insert(name.to_string(), net);
        bank.validate()?;
        Ok(bank)
    }

    /// Multiplier for one parameter at a rating ordinal.
    pub fn multiplier(&self, name: &str, ordinal: f64) -> Result<f64> {
        let net = self
            .submodels
            .get(name)
            .ok_or_else(|| Error::UnknownParameter(name.to_string()))?;
        let d = self.specs[name].domain();
        let slack = 1e-9;
        if !(ordinal >= d.lo - slack && ordinal <= d.hi + slack) {
            return Err(Error::OutOfDomain {
                parameter: name.to_string(),
                ordinal,
                lo: d.lo,
                hi: d.hi,
            });
        }
        Ok(net.output(ordinal)?.max(MULTIPLIER_FLOOR))
    }

    pub fn nominal_multiplier(&self, name: &str) -> Result<f64> {
        let spec = self
            .specs
            .get(name)
            .ok_or_else(|| Error::UnknownParameter(name.to_string()))?;
        self.multiplier(name, spec.nominal_input())
    }

    /// One multiplier per parameter; parameters absent from `ratings` get
    /// their Nominal value.
    pub fn evaluate(&self, ratings: &BTreeMap<String, f64>) -> Result<BTreeMap<String, f64>> {
        if let Some(unknown) = ratings.keys().find(|k| !self.specs.contains_key(*k)) {
            return Err(Error::UnknownParameter(unknown.clone()));
        }
        self.specs
            .keys()
            .map(|name| {
                let m = match ratings.get(name) {
                    Some(&x) => self.multiplier(name, x)?,
                    None => self.nominal_multiplier(name)?,
                };
                Ok((name.clone(), m))
            })
            .collect()
    }

    /// Rating ordinal fed to each sub-model for a project.
    fn inputs_for(&self, project: &ProjectRecord) -> Result<Vec<f64>> {
        if let Some(unknown) = project.ratings.keys().find(|k| !self.specs.contains_key(*k)) {
            return Err(Error::UnknownParameter(unknown.clone()).in_record(&project.id));
        }
        self.specs
            .iter()
            .map(|(name, spec)| {
                let x = project.ratings.get(name).map_or(spec.nominal_input(), |l| l.ordinal());
                let d = spec.domain();
                if !(x >= d.lo - 1e-9 && x <= d.hi + 1e-9) {
                    return Err(Error::OutOfDomain {
                        parameter: name.clone(),
                        ordinal: x,
                        lo: d.lo,
                        hi: d.hi,
                    }
                    .in_record(&project.id));
                }
                Ok(x)
            })
            .collect()
    }

    pub fn multipliers_for(&self, project: &ProjectRecord) -> Result<BTreeMap<String, f64>> {
        self.evaluate(&project.ordinals()).map_err(|e| e.in_record(&project.id))
    }

    /// `months * fraction * d^sx * (size / ctb)^e`: everything in the
    /// prediction except the multiplier product.
    fn base_effort(&self, project: &ProjectRecord) -> f64 {
        let c = &self.constants;
        let d = project.staffing_complexity.unwrap_or(self.d);
        c.months_per_year
            * c.development_fraction
            * d.powf(c.staffing_exponent)
            * (project.size_kloc / self.ctb).powf(c.size_exponent)
    }

    fn snapshot(&self, projects: &[ProjectRecord], inputs: &[Vec<f64>]) -> Result<Snapshot> {
        let e = self.constants.size_exponent;
        let mut multipliers = Vec::with_capacity(self.specs.len());
        let mut floored = Vec::with_capacity(self.specs.len());
        for (i, net) in self.submodels.values().enumerate() {
            let mut row = Vec::with_capacity(projects.len());
            let mut flags = Vec::with_capacity(projects.len());
            for x in &inputs[i] {
                let raw = net.output(*x)?;
                flags.push(raw < MULTIPLIER_FLOOR);
                row.push(raw.max(MULTIPLIER_FLOOR));
            }
            multipliers.push(row);
            floored.push(flags);
        }
        let mut predictions = Vec::with_capacity(projects.len());
        let mut loss = 0.0;
        for (j, p) in projects.iter().enumerate() {
            let product: f64 = multipliers.iter().map(|row| row[j]).product();
            let pred = self.base_effort(p) * product.powf(e);
            let r = (pred - p.actual_effort_pm) / p.actual_effort_pm;
            loss += r * r;
            predictions.push(pred);
        }
        Ok(Snapshot {
            multipliers,
            floored,
            predictions,
            loss,
        })
    }

    /// Per-parameter input columns, `[param][project]`.
    fn input_matrix(&self, projects: &[ProjectRecord]) -> Result<Vec<Vec<f64>>> {
        let mut cols = vec![Vec::with_capacity(projects.len()); self.specs.len()];
        for p in projects {
            for (i, x) in self.inputs_for(p)?.into_iter().enumerate() {
                cols[i].push(x);
            }
        }
        Ok(cols)
    }

    /// Predicted effort in person-months.
    pub fn predict(&self, project: &ProjectRecord) -> Result<f64> {
        crate::seer::estimate(project, self)
    }

    /// Sum of squared relative errors over `projects`.
    pub fn loss(&self, projects: &[ProjectRecord]) -> Result<f64> {
        check_projects(projects, 1)?;
        let inputs = self.input_matrix(projects)?;
        Ok(self.snapshot(projects, &inputs)?.loss)
    }

    /// Gradient of [`NfBank::loss`] with respect to every premise parameter.
    pub fn loss_gradient(&self, projects: &[ProjectRecord]) -> Result<BTreeMap<String, Vec<PremiseGradient>>> {
        check_projects(projects, 1)?;
        let inputs = self.input_matrix(projects)?;
        let snap = self.snapshot(projects, &inputs)?;
        self.gradient_from(projects, &inputs, &snap)
    }

    fn gradient_from(
        &self,
        projects: &[ProjectRecord],
        inputs: &[Vec<f64>],
        snap: &Snapshot,
    ) -> Result<BTreeMap<String, Vec<PremiseGradient>>> {
        let e = self.constants.size_exponent;
        // dL/dE_hat_j * dE_hat_j/dm_ij * m_ij = 2 r_j / E_j * e * E_hat_j
        let common: Vec<f64> = projects
            .iter()
            .zip(&snap.predictions)
            .map(|(p, &pred)| {
                let actual = p.actual_effort_pm;
                2.0 * (pred - actual) / (actual * actual) * e * pred
            })
            .collect();
        let mut out = BTreeMap::new();
        for (i, (name, net)) in self.submodels.iter().enumerate() {
            let upstream: Vec<f64> = (0..projects.len())
                .map(|j| {
                    if snap.floored[i][j] {
                        0.0
                    } else {
                        common[j] / snap.multipliers[i][j]
                    }
                })
                .collect();
            out.insert(name.clone(), net.backprop(&inputs[i], &upstream)?);
        }
        Ok(out)
    }

    /// Scale factor `s` minimizing `sum (s q_j - 1)^2` with `q_j = E_hat_j / E_j`,
    /// applied through `ctb`.
    fn refit_ctb(&mut self, projects: &[ProjectRecord], predictions: &[f64]) {
        let (mut sq, mut sqq) = (0.0, 0.0);
        for (p, pred) in projects.iter().zip(predictions) {
            let q = pred / p.actual_effort_pm;
            sq += q;
            sqq += q * q;
        }
        if sqq > 0.0 && sq > 0.0 {
            let scale = sq / sqq;
            self.ctb *= scale.powf(-1.0 / self.constants.size_exponent);
        }
    }

    /// Calibrates `ctb` only; the sub-models are untouched.
    pub fn calibrate_ctb(&self, projects: &[ProjectRecord]) -> Result<NfBank> {
        check_projects(projects, 1)?;
        let inputs = self.input_matrix(projects)?;
        let snap = self.snapshot(projects, &inputs)?;
        let mut bank = self.clone();
        bank.refit_ctb(projects, &snap.predictions);
        bank.validate()?;
        Ok(bank)
    }

    /// Moves each sub-model's Nominal scale into `ctb`.
    fn renormalize(&mut self) -> Result<()> {
        let names: Vec<String> = self.specs.keys().cloned().collect();
        for name in names {
            let spec = &self.specs[&name];
            let x = spec.nominal_input();
            let current = self.submodels[&name].output(x)?;
            if current < MULTIPLIER_FLOOR {
                continue;
            }
            let scale = spec.anchor_at(x) / current;
            let net = self.submodels[&name].scaled(scale);
            self.submodels.insert(name, net);
            // m -> s m for this parameter needs ctb -> s ctb to keep cte.
            self.ctb *= scale;
        }
        Ok(())
    }

    /// Block update of one sub-model's consequents.
    fn solve_consequents(
        &self,
        index: usize,
        name: &str,
        projects: &[ProjectRecord],
        inputs: &[Vec<f64>],
        snap: &Snapshot,
        prior: f64,
    ) -> Result<AnfisNet> {
        let e = self.constants.size_exponent;
        let net = &self.submodels[name];
        let spec = &self.specs[name];
        let mut rows = Vec::with_capacity(projects.len() + spec.anchors.len() * (INTERIOR_POINTS + 1));
        for (j, p) in projects.iter().enumerate() {
            let m = snap.multipliers[index][j];
            let target = m * (p.actual_effort_pm / snap.predictions[j]).powf(1.0 / e);
            // relative error of E_hat ~ e * (m - target) / target
            let w = (e / target).powi(2);
            rows.push((inputs[index][j], target, w));
        }
        let current: Vec<(f64, f64)> = spec
            .levels()
            .iter()
            .map(|l| Ok((l.ordinal(), net.output(l.ordinal())?.max(MULTIPLIER_FLOOR))))
            .collect::<Result<_>>()?;
        let curve = curve_samples(&current);
        let per_point = prior / (INTERIOR_POINTS + 1) as f64;
        for (x, v) in curve {
            rows.push((x, v, per_point * (e / v).powi(2)));
        }
        net.fit_consequents_weighted(&rows)
    }

    /// Trains the bank on `projects`; returns the trained bank and per-epoch losses.
    pub fn train(&self, projects: &[ProjectRecord], opts: &BankTrainOptions) -> Result<(NfBank, Vec<EpochLoss>)> {
        opts.train.validate()?;
        check_projects(projects, 2)?;
        let inputs = self.input_matrix(projects)?;
        let mut bank = self.clone();
        let mut history = Vec::with_capacity(opts.train.epochs);
        if opts.train.epochs == 0 {
            return Ok((bank, history));
        }
        let n = projects.len() as f64;
        let names: Vec<String> = bank.specs.keys().cloned().collect();

        for epoch in 0..opts.train.epochs {
            let snap = bank.snapshot(projects, &inputs)?;
            let before_ctb = snap.loss;
            if !before_ctb.is_finite() {
                return Err(Error::Divergence { epoch });
            }
            bank.refit_ctb(projects, &snap.predictions);
            let mut snap = bank.snapshot(projects, &inputs)?;
            let after_ctb = snap.loss;

            for (i, name) in names.iter().enumerate() {
                let candidate = bank.solve_consequents(i, name, projects, &inputs, &snap, opts.curve_prior)?;
                let mut trial = bank.clone();
                trial.submodels.insert(name.clone(), candidate);
                let trial_snap = trial.snapshot(projects, &inputs)?;
                if trial_snap.loss < snap.loss {
                    bank = trial;
                    snap = trial_snap;
                }
            }

            let grads = bank.gradient_from(projects, &inputs, &snap)?;
            for name in &names {
                let g = &grads[name];
                if g.iter()
                    .any(|g| !(g.a.is_finite() && g.b.is_finite() && g.c.is_finite()))
                {
                    return Err(Error::Divergence { epoch });
                }
                let stepped = bank.submodels[name].descend(g, opts.train.learning_rate / n)?;
                bank.submodels.insert(name.clone(), stepped);
            }

            bank.renormalize()?;
            if opts.enforce_monotone {
                bank.repair_monotone()?;
            }
            let after_update = bank.snapshot(projects, &inputs)?.loss;
            if !after_update.is_finite() {
                return Err(Error::Divergence { epoch });
            }
            let stop = history
                .last()
                .is_some_and(|prev: &EpochLoss| (prev.after_ctb - after_ctb).abs() < opts.train.tolerance);
            history.push(EpochLoss {
                epoch,
                before_ctb,
                after_ctb,
                after_update,
            });
            if stop {
                break;
            }
        }
        let snap = bank.snapshot(projects, &inputs)?;
        bank.refit_ctb(projects, &snap.predictions);
        bank.validate()?;
        Ok((bank, history))
    }

    /// Re-fits every sub-model whose curve breaks its declared direction.
    fn repair_monotone(&mut self) -> Result<()> {
        let names: Vec<String> = self.specs.keys().cloned().collect();
        for name in names {
            let spec = &self.specs[&name];
            let net = &self.submodels[&name];
            if curve_violations(&name, net, spec.direction)?.is_empty() {
                continue;
            }
            let repaired = monotone_refit(spec, net)?;
            self.submodels.insert(name, repaired);
        }
        Ok(())
    }

    /// Grid pairs (101 points per domain) where a sub-model moves against its
    /// declared direction by more than `1e-9`.
    pub fn monotonicity_check(&self) -> Result<Vec<Violation>> {
        let mut out = Vec::new();
        for (name, spec) in &self.specs {
            out.extend(curve_violations(name, &self.submodels[name], spec.direction)?);
        }
        Ok(out)
    }

    /// Worst relative anchor error over all parameters and levels.
    pub fn anchor_error(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (name, spec) in &self.specs {
            for (level, v) in &spec.anchors {
                let m = self.multiplier(name, level.ordinal())?;
                worst = worst.max((m - v).abs() / v);
            }
        }
        Ok(worst)
    }

    pub fn to_file_string(&self) -> String {
        let file = BankFile {
            format: BANK_FORMAT.into(),
            version: BANK_VERSION,
            ctb: self.ctb,
            d: self.d,
            constants: self.constants,
            parameters: self.specs.values().cloned().collect(),
            submodels: self
                .submodels
                .iter()
                .map(|(k, v)| (k.clone(), ModelFile::new(v)))
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("bank serialization cannot fail")
    }

    pub fn from_file_str(text: &str) -> Result<NfBank> {
        let file: BankFile = serde_json::from_str(text)?;
        if file.format != BANK_FORMAT || file.version != BANK_VERSION {
            return Err(Error::Argument(format!(
                "unsupported bank format {} v{}",
                file.format, file.version
            )));
        }
        let submodels = file
            .submodels
            .into_iter()
            .map(|(k, v)| Ok((k, v.into_net()?)))
            .collect::<Result<_>>()?;
        NfBank::new(file.parameters, submodels, file.ctb, file.d, file.constants)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_file_string() + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<NfBank> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        NfBank::from_file_str(&text)
    }
}

const BANK_FORMAT: &str = "nfseer-bank";
const BANK_VERSION: u32 = 1;

/// Bank persistence layout: calibration constants, the parameter roster, and
/// one embedded ANFIS model file per parameter.
#[derive(Serialize, Deserialize)]
struct BankFile {
    format: String,
    version: u32,
    ctb: f64,
    d: f64,
    constants: SeerConstants,
    parameters: Vec<ParameterSpec>,
    submodels: BTreeMap<String, ModelFile>,
}

fn check_projects(projects: &[ProjectRecord], min: usize) -> Result<()> {
    if projects.len() < min {
        return Err(Error::Argument(format!(
            "need at least {min} projects, got {}",
            projects.len()
        )));
    }
    for p in projects {
        p.validate()?;
    }
    Ok(())
}

fn grid(domain: Domain) -> Vec<f64> {
    (0..MONOTONE_GRID)
        .map(|k| domain.lo + domain.width() * k as f64 / (MONOTONE_GRID - 1) as f64)
        .collect()
}

fn curve_violations(name: &str, net: &AnfisNet, direction: Direction) -> Result<Vec<Violation>> {
    let xs = grid(net.domain());
    let ys: Vec<f64> = xs
        .iter()
        .map(|&x| Ok(net.output(x)?.max(MULTIPLIER_FLOOR)))
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for k in 0..xs.len() - 1 {
        let bad = match direction {
            Direction::IncreasesEffort => ys[k + 1] < ys[k] - MONOTONE_SLACK,
            Direction::DecreasesEffort => ys[k + 1] > ys[k] + MONOTONE_SLACK,
        };
        if bad {
            out.push(Violation {
                parameter: name.to_string(),
                index: k,
                x: (xs[k], xs[k + 1]),
                y: (ys[k], ys[k + 1]),
            });
        }
    }
    Ok(out)
}

/// Weight of an anchor point relative to a fill point in the final solve.
const ANCHOR_WEIGHT: f64 = 50.0;

/// Hybrid training on the densified curve, then one weighted consequent solve
/// that pins the anchors while the fill points keep the curve smooth. Rules
/// sit on every level and midway between levels.
fn fit_curve(points: &[(f64, f64)], domain: Domain, cfg: &TrainConfig) -> Result<AnfisNet> {
    let mut centers: Vec<f64> = Vec::with_capacity(2 * points.len());
    for (i, p) in points.iter().enumerate() {
        centers.push(p.0);
        if let Some(q) = points.get(i + 1) {
            centers.push(0.5 * (p.0 + q.0));
        }
    }
    let net = AnfisNet::with_centers(&centers, domain)?;
    let samples = curve_samples(points);
    let (net, _) = net.train_hybrid(&samples, cfg)?;
    net.fit_consequents_weighted(&anchor_weighted(points))
}

fn fit_anchor_curve(spec: &ParameterSpec, cfg: &TrainConfig) -> Result<AnfisNet> {
    let points: Vec<(f64, f64)> = spec.anchors.iter().map(|(l, v)| (l.ordinal(), *v)).collect();
    let net = blend_to_monotone(&spec.name, &fit_curve(&points, spec.domain(), cfg)?, spec.direction)?;
    // Pin the Nominal anchor exactly, so an all-Nominal project on a unit
    // ladder sees cte = ctb.
    let net = match spec.anchors.get(&RatingLevel::NOMINAL) {
        Some(&v) => {
            let at_nominal = net.output(RatingLevel::NOMINAL.ordinal())?;
            if at_nominal > MULTIPLIER_FLOOR {
                net.scaled(v / at_nominal)
            } else {
                net
            }
        }
        None => net,
    };
    let worst = points
        .iter()
        .map(|&(x, v)| Ok((net.output(x)?.max(MULTIPLIER_FLOOR) - v).abs() / v))
        .try_fold(0.0f64, |acc, e: Result<f64>| Ok::<_, Error>(acc.max(e?)))?;
    if worst > ANCHOR_TOLERANCE {
        return Err(Error::SpecValidation {
            parameter: spec.name.clone(),
            reason: format!("anchor fit error {worst:.4} exceeds {ANCHOR_TOLERANCE}"),
        });
    }
    Ok(net)
}

/// Restores the declared direction: isotonic projection of the level values,
/// a weighted consequent refit on the monotone cubic through them (which
/// irons out ripples between levels), then the smallest blend toward a
/// straight line that removes whatever ripple is left.
fn monotone_refit(spec: &ParameterSpec, net: &AnfisNet) -> Result<AnfisNet> {
    let levels = spec.levels();
    let values: Vec<f64> = levels
        .iter()
        .map(|l| Ok(net.output(l.ordinal())?.max(MULTIPLIER_FLOOR)))
        .collect::<Result<_>>()?;
    let projected = isotonic_fit(&values, &vec![1.0; values.len()], spec.direction.increasing());
    let points: Vec<(f64, f64)> = levels.iter().map(|l| l.ordinal()).zip(projected).collect();
    let refit = net.fit_consequents_weighted(&anchor_weighted(&points))?;
    blend_to_monotone(&spec.name, &refit, spec.direction)
}

/// Densified curve samples with the anchors weighted above the fill points.
fn anchor_weighted(points: &[(f64, f64)]) -> Vec<(f64, f64, f64)> {
    curve_samples(points)
        .into_iter()
        .map(|(x, t)| {
            let anchor = points.iter().any(|p| p.0 == x);
            (x, t, if anchor { ANCHOR_WEIGHT } else { 1.0 })
        })
        .collect()
}

/// Adding the same line `s x + q` to every rule's consequent adds that line to
/// the network output, so `(1 - t) net + t line` is again a network. With
/// `line` the chord between the domain end values, `t = 1` is monotone; the
/// smallest passing `t` is found by bisection.
fn blend_to_monotone(name: &str, net: &AnfisNet, direction: Direction) -> Result<AnfisNet> {
    if curve_violations(name, net, direction)?.is_empty() {
        return Ok(net.clone());
    }
    let d = net.domain();
    let (y0, y1) = (net.output(d.lo)?, net.output(d.hi)?);
    let (lo_v, hi_v) = match direction {
        Direction::IncreasesEffort => (y0.min(y1), y0.max(y1)),
        Direction::DecreasesEffort => (y0.max(y1), y0.min(y1)),
    };
    let slope = if d.width() > 0.0 {
        (hi_v - lo_v) / d.width()
    } else {
        0.0
    };
    let intercept = lo_v - slope * d.lo;
    let blend = |t: f64| {
        let qs = net
            .consequents()
            .iter()
            .map(|q| {
                crate::anfis::Consequent::new((1.0 - t) * q.slope + t * slope, (1.0 - t) * q.intercept + t * intercept)
            })
            .collect();
        net.with_consequents(qs)
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if curve_violations(name, &blend(mid)?, direction)?.is_empty() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    blend(hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rating::Base;

    fn lvl(s: &str) -> RatingLevel {
        s.parse().unwrap()
    }

    fn table(pairs: &[(&str, f64)]) -> BTreeMap<RatingLevel, f64> {
        pairs.iter().map(|(l, v)| (lvl(l), *v)).collect()
    }

    #[test]
    fn non_monotone_anchors_rejected() {
        let err = ParameterSpec::new("X", Direction::IncreasesEffort, table(&[("Low", 1.0), ("Nom", 0.9)]));
        assert!(matches!(err, Err(Error::SpecValidation { .. })));
        assert!(ParameterSpec::new("X", Direction::IncreasesEffort, table(&[("Low", -1.0)])).is_err());
    }

    #[test]
    fn ladder_values() {
        let s = ParameterSpec::ladder(
            "ACAP",
            Direction::DecreasesEffort,
            &[lvl("VLo-"), lvl("Nom"), lvl("Hi")],
            0.08,
        )
        .unwrap();
        assert_eq!(s.anchors[&lvl("Nom")], 1.0);
        assert!((s.anchors[&lvl("Hi")] - 1.0 / 1.08).abs() < 1e-15);
        assert!((s.anchors[&lvl("VLo-")] - 1.08f64.powf(2.5)).abs() < 1e-12);
    }

    #[test]
    fn constant_anchor_table() {
        let spec = ParameterSpec::new(
            "C",
            Direction::IncreasesEffort,
            table(&[("Low", 1.0), ("Nom", 1.0), ("Hi", 1.0), ("VHi", 1.0)]),
        )
        .unwrap();
        let bank = NfBank::init_from_anchors(vec![spec], &BankSettings::default()).unwrap();
        for l in ["Low", "Nom", "Hi", "VHi"] {
            assert!((bank.multiplier("C", lvl(l).ordinal()).unwrap() - 1.0).abs() < 1e-9);
        }
        assert!(bank.monotonicity_check().unwrap().is_empty());
    }

    #[test]
    fn two_level_table_is_exact() {
        let spec = ParameterSpec::new("T", Direction::IncreasesEffort, table(&[("Low", 0.9), ("Hi", 1.1)])).unwrap();
        let bank = NfBank::init_from_anchors(vec![spec], &BankSettings::default()).unwrap();
        let net = bank.submodel("T").unwrap();
        let sse = net.sse(&[(2.0, 0.9), (4.0, 1.1)]).unwrap();
        assert!(sse < 1e-10, "sse = {sse}");
    }

    #[test]
    fn single_level_parameter() {
        let spec = ParameterSpec::new("S", Direction::IncreasesEffort, table(&[("Nom", 1.3)])).unwrap();
        let bank = NfBank::init_from_anchors(vec![spec], &BankSettings::default()).unwrap();
        assert!((bank.multiplier("S", 3.0).unwrap() - 1.3).abs() < 1e-9);
        assert!(bank.monotonicity_check().unwrap().is_empty());
    }

    #[test]
    fn evaluate_defaults_and_errors() {
        let bank = NfBank::init_from_anchors(default_specs(), &BankSettings::default()).unwrap();
        let all = bank.evaluate(&BTreeMap::new()).unwrap();
        assert_eq!(all.len(), bank.parameters().count());
        for (name, m) in &all {
            assert!(
                (m - bank.spec(name).unwrap().anchor_at(3.0)).abs() < 0.01,
                "{name}: {m}"
            );
        }
        let unknown: BTreeMap<String, f64> = [("NOPE".to_string(), 3.0)].into();
        assert!(matches!(bank.evaluate(&unknown), Err(Error::UnknownParameter(_))));
        let outside: BTreeMap<String, f64> = [("MEMC".to_string(), 1.0)].into();
        assert!(matches!(bank.evaluate(&outside), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn midway_rating_lies_between_anchors() {
        let bank = NfBank::init_from_anchors(default_specs(), &BankSettings::default()).unwrap();
        let lo = bank.multiplier("ACAP", Base::Nom.index() as f64).unwrap();
        let hi = bank.multiplier("ACAP", Base::Hi.index() as f64).unwrap();
        let mid = bank.multiplier("ACAP", 3.5).unwrap();
        assert!(mid < lo && mid > hi, "{hi} < {mid} < {lo}");
    }

    #[test]
    fn dip_is_reported() {
        use crate::anfis::{BellMf, Consequent};
        let spec = ParameterSpec::new("D", Direction::IncreasesEffort, table(&[("Low", 1.0), ("Hi", 1.2)])).unwrap();
        let dip = AnfisNet::new(
            vec![
                BellMf::new(0.3, 2.0, 2.0).unwrap(),
                BellMf::new(0.3, 2.0, 3.0).unwrap(),
                BellMf::new(0.3, 2.0, 4.0).unwrap(),
            ],
            vec![
                Consequent::new(0.0, 1.0),
                Consequent::new(0.0, 0.8),
                Consequent::new(0.0, 1.2),
            ],
            Domain::new(2.0, 4.0).unwrap(),
        )
        .unwrap();
        let mut sub = BTreeMap::new();
        sub.insert("D".to_string(), dip.clone());
        let bank = NfBank::new(vec![spec], sub, 1.0, 1.0, SeerConstants::default()).unwrap();
        let found = bank.monotonicity_check().unwrap();
        // independent scan of the same grid
        let xs: Vec<f64> = (0..101).map(|k| 2.0 + 2.0 * k as f64 / 100.0).collect();
        let expected: Vec<usize> = (0..100)
            .filter(|&k| dip.output(xs[k + 1]).unwrap() < dip.output(xs[k]).unwrap() - 1e-9)
            .collect();
        assert!(!expected.is_empty());
        assert_eq!(found.iter().map(|v| v.index).collect::<Vec<_>>(), expected);
    }

    #[test]
    fn shipped_specs_cover_the_mapping_table() {
        let specs = default_specs();
        let t = MappingTable::shipped();
        let names: Vec<&str> = specs.iter().map(|s| s.name.as_str()).collect();
        let mut params = t.seer_parameters();
        params.sort();
        assert_eq!(names, params);
        for s in &specs {
            assert_eq!(s.levels(), t.seer_levels(&s.name), "{}", s.name);
        }
    }

    #[test]
    fn spec_toml_round_trip() {
        let specs = default_specs();
        assert_eq!(parse_specs(&specs_to_toml(&specs)).unwrap(), specs);
    }
}
