//! Cross-validated comparison of two estimators built per fold.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::bank::{BankTrainOptions, NfBank};
use crate::dataset::{FoldPlan, ProjectRecord};
use crate::error::{Error, Result};
use crate::eval::mann_whitney::{mann_whitney_u, MannWhitney};
use crate::eval::metrics::{mres, Improvement, MetricSet};

/// Anything that predicts effort (person-months) for a project.
pub trait Estimator: Send + Sync {
    fn predict(&self, project: &ProjectRecord) -> Result<f64>;
}

impl Estimator for NfBank {
    fn predict(&self, project: &ProjectRecord) -> Result<f64> {
        NfBank::predict(self, project)
    }
}

/// Produces an estimator from a training subset.
pub trait Builder: Sync {
    fn name(&self) -> &str;
    fn build(&self, train: &[ProjectRecord]) -> Result<Box<dyn Estimator>>;
}

/// The unmodified multiplier bank with only `ctb` calibrated on the fold.
#[derive(Clone, Debug)]
pub struct BaselineBuilder {
    pub bank: NfBank,
}

impl Builder for BaselineBuilder {
    fn name(&self) -> &str {
        "baseline"
    }

    fn build(&self, train: &[ProjectRecord]) -> Result<Box<dyn Estimator>> {
        Ok(Box::new(self.bank.calibrate_ctb(train)?))
    }
}

/// The bank calibrated and then trained end to end on the fold.
#[derive(Clone, Debug)]
pub struct CandidateBuilder {
    pub bank: NfBank,
    pub options: BankTrainOptions,
}

impl Builder for CandidateBuilder {
    fn name(&self) -> &str {
        "candidate"
    }

    fn build(&self, train: &[ProjectRecord]) -> Result<Box<dyn Estimator>> {
        let start = self.bank.calibrate_ctb(train)?;
        Ok(Box::new(start.train(train, &self.options)?.0))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ResidualKind {
    /// `|actual - predicted|`.
    #[default]
    Absolute,
    /// `actual - predicted`.
    Raw,
}

impl ResidualKind {
    fn of(self, actual: f64, predicted: f64) -> f64 {
        match self {
            ResidualKind::Absolute => (actual - predicted).abs(),
            ResidualKind::Raw => actual - predicted,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct CvOptions {
    /// Evaluate folds on the rayon pool. Results are identical either way.
    pub parallel: bool,
    pub residuals: ResidualKind,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PredictionRow {
    pub id: String,
    pub fold: usize,
    pub actual: f64,
    pub baseline: f64,
    pub candidate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FoldReport {
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub completed: bool,
    pub baseline: Option<MetricSet>,
    pub candidate: Option<MetricSet>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SignificanceTest {
    pub residuals: ResidualKind,
    #[serde(flatten)]
    pub result: MannWhitney,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub baseline_name: String,
    pub candidate_name: String,
    pub k: usize,
    pub seed: u64,
    pub records: usize,
    pub baseline: MetricSet,
    pub candidate: MetricSet,
    pub improvement: Improvement,
    pub mann_whitney: SignificanceTest,
    pub per_fold: Vec<FoldReport>,
    pub predictions: Vec<PredictionRow>,
    pub warnings: Vec<String>,
}

struct FoldRun {
    report: FoldReport,
    rows: Vec<PredictionRow>,
}

fn run_fold(
    fold: usize,
    indices: &[Vec<usize>],
    projects: &[ProjectRecord],
    baseline: &dyn Builder,
    candidate: &dyn Builder,
) -> FoldRun {
    let test: Vec<&ProjectRecord> = indices[fold].iter().map(|&i| &projects[i]).collect();
    let train: Vec<ProjectRecord> = indices
        .iter()
        .enumerate()
        .filter(|(f, _)| *f != fold)
        .flat_map(|(_, idx)| idx.iter().map(|&i| projects[i].clone()))
        .collect();
    let attempt = || -> Result<(Vec<PredictionRow>, MetricSet, MetricSet)> {
        let b = baseline.build(&train)?;
        let c = candidate.build(&train)?;
        let mut rows = Vec::with_capacity(test.len());
        for p in &test {
            let (pb, pc) = (b.predict(p)?, c.predict(p)?);
            for v in [pb, pc] {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::Data {
                        record: p.id.clone(),
                        reason: format!("invalid prediction {v}"),
                    });
                }
            }
            rows.push(PredictionRow {
                id: p.id.clone(),
                fold,
                actual: p.actual_effort_pm,
                baseline: pb,
                candidate: pc,
            });
        }
        let actual: Vec<f64> = rows.iter().map(|r| r.actual).collect();
        let mb = MetricSet::compute(&actual, &rows.iter().map(|r| r.baseline).collect::<Vec<_>>())?;
        let mc = MetricSet::compute(&actual, &rows.iter().map(|r| r.candidate).collect::<Vec<_>>())?;
        Ok((rows, mb, mc))
    };
    match attempt() {
        Ok((rows, mb, mc)) => FoldRun {
            report: FoldReport {
                fold,
                n_train: train.len(),
                n_test: test.len(),
                completed: true,
                baseline: Some(mb),
                candidate: Some(mc),
                error: None,
            },
            rows,
        },
        Err(e) => FoldRun {
            report: FoldReport {
                fold,
                n_train: train.len(),
                n_test: test.len(),
                completed: false,
                baseline: None,
                candidate: None,
                error: Some(e.to_string()),
            },
            rows: Vec::new(),
        },
    }
}

/// Builds both estimators on every training split, predicts the held-out
/// fold, and compares the pooled out-of-fold predictions. Failed folds are
/// reported and skipped; if every fold fails the comparison is an error.
pub fn cross_validate(
    projects: &[ProjectRecord],
    plan: &FoldPlan,
    baseline: &dyn Builder,
    candidate: &dyn Builder,
    options: &CvOptions,
) -> Result<ComparisonReport> {
    for p in projects {
        p.validate()?;
    }
    let indices = plan.fold_indices(projects)?;
    if let Some(empty) = indices.iter().position(Vec::is_empty) {
        return Err(Error::Argument(format!("fold {empty} has no records")));
    }
    let runs: Vec<FoldRun> = if options.parallel {
        (0..plan.k)
            .into_par_iter()
            .map(|f| run_fold(f, &indices, projects, baseline, candidate))
            .collect()
    } else {
        (0..plan.k)
            .map(|f| run_fold(f, &indices, projects, baseline, candidate))
            .collect()
    };

    let mut warnings = Vec::new();
    let mut rows: Vec<PredictionRow> = Vec::with_capacity(projects.len());
    let mut per_fold = Vec::with_capacity(plan.k);
    for run in runs {
        if let Some(e) = &run.report.error {
            warnings.push(format!("fold {} failed: {e}", run.report.fold));
        }
        rows.extend(run.rows);
        per_fold.push(run.report);
    }
    if rows.is_empty() {
        return Err(Error::Argument(format!(
            "all {} folds failed: {}",
            plan.k,
            warnings.join("; ")
        )));
    }
    // pool in dataset order
    let position: BTreeMap<&str, usize> = projects.iter().enumerate().map(|(i, p)| (p.id.as_str(), i)).collect();
    rows.sort_by_key(|r| position[r.id.as_str()]);

    let actual: Vec<f64> = rows.iter().map(|r| r.actual).collect();
    let pb: Vec<f64> = rows.iter().map(|r| r.baseline).collect();
    let pc: Vec<f64> = rows.iter().map(|r| r.candidate).collect();
    let mb = MetricSet::compute(&actual, &pb)?;
    let mc = MetricSet::compute(&actual, &pc)?;
    let rb: Vec<f64> = rows
        .iter()
        .map(|r| options.residuals.of(r.actual, r.baseline))
        .collect();
    let rc: Vec<f64> = rows
        .iter()
        .map(|r| options.residuals.of(r.actual, r.candidate))
        .collect();
    Ok(ComparisonReport {
        baseline_name: baseline.name().to_string(),
        candidate_name: candidate.name().to_string(),
        k: plan.k,
        seed: plan.seed,
        records: rows.len(),
        baseline: mb,
        candidate: mc,
        improvement: Improvement::between(&mb, &mc),
        mann_whitney: SignificanceTest {
            residuals: options.residuals,
            result: mann_whitney_u(&rb, &rc)?,
        },
        per_fold,
        predictions: rows,
        warnings,
    })
}

impl ComparisonReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail") + "\n"
    }

    /// Pooled out-of-fold MRE samples keyed by model name, for plotting.
    pub fn mre_samples(&self) -> Result<BTreeMap<String, Vec<f64>>> {
        let actual: Vec<f64> = self.predictions.iter().map(|r| r.actual).collect();
        let b: Vec<f64> = self.predictions.iter().map(|r| r.baseline).collect();
        let c: Vec<f64> = self.predictions.iter().map(|r| r.candidate).collect();
        let mut out = BTreeMap::new();
        out.insert(self.baseline_name.clone(), mres(&actual, &b)?);
        out.insert(self.candidate_name.clone(), mres(&actual, &c)?);
        Ok(out)
    }

    /// Accuracy table with PRED shown in percent, an improvement row, and the
    /// significance test.
    pub fn summary_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<14}{:>10}{:>10}{:>12}{:>12}{:>16}",
            "Model", "MMRE", "MdMRE", "PRED(0.30)", "PRED(0.50)", "MSE"
        );
        for (name, m) in [
            (&self.baseline_name, &self.baseline),
            (&self.candidate_name, &self.candidate),
        ] {
            let _ = writeln!(
                s,
                "{:<14}{:>10.4}{:>10.4}{:>12.2}{:>12.2}{:>16.2}",
                name,
                m.mmre,
                m.mdmre,
                100.0 * m.pred30,
                100.0 * m.pred50,
                m.mse
            );
        }
        let i = &self.improvement;
        let _ = writeln!(
            s,
            "{:<14}{:>10.4}{:>10.4}{:>12.2}{:>12.2}{:>16.2}",
            "Improvement",
            i.mmre,
            i.mdmre,
            100.0 * i.pred30,
            100.0 * i.pred50,
            i.mse
        );
        let _ = writeln!(s, "MMRE relative improvement: {:.2}%", 100.0 * i.mmre_relative);
        let mw = &self.mann_whitney.result;
        let _ = writeln!(
            s,
            "Mann-Whitney U = {} (p = {:.4}, {:?} residuals, {:?})",
            mw.u, mw.p_two_sided, self.mann_whitney.residuals, mw.method
        );
        let _ = writeln!(
            s,
            "records: {}  folds: {} of {} completed",
            self.records,
            self.per_fold.iter().filter(|f| f.completed).count(),
            self.k
        );
        for w in &self.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        s
    }
}
