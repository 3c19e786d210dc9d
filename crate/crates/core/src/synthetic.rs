//! Synthetic project histories drawn from a known bank, used as an oracle for
//! training and evaluation.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bank::{BankSettings, Direction, NfBank, ParameterSpec};
use crate::dataset::{Mode, ProjectRecord};
use crate::error::Result;
use crate::rating::RatingLevel;

/// How the "true" multipliers depart from a spec's anchors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Perturbation {
    /// Each per-level step ratio is drawn from `[1 + lo, 1 + hi]`.
    pub step_lo: f64,
    pub step_hi: f64,
}

impl Default for Perturbation {
    fn default() -> Self {
        Perturbation {
            step_lo: 0.02,
            step_hi: 0.20,
        }
    }
}

/// Replaces every anchor ladder with a random monotone ladder, keeping the
/// value at Nominal (or the level closest to it) at exactly 1.
pub fn perturbed_specs(specs: &[ParameterSpec], p: Perturbation, seed: u64) -> Result<Vec<ParameterSpec>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    specs
        .iter()
        .map(|spec| {
            let levels = spec.levels();
            let pivot = levels
                .iter()
                .enumerate()
                .min_by(|(_, a), (_, b)| (a.ordinal() - 3.0).abs().total_cmp(&(b.ordinal() - 3.0).abs()))
                .map(|(i, _)| i)
                .expect("specs have levels");
            let up = spec.direction == Direction::IncreasesEffort;
            let mut values = vec![1.0; levels.len()];
            for i in pivot + 1..levels.len() {
                let r = 1.0 + rng.gen_range(p.step_lo..=p.step_hi);
                let gap = levels[i].ordinal() - levels[i - 1].ordinal();
                values[i] = values[i - 1] * if up { r } else { 1.0 / r }.powf(gap);
            }
            for i in (0..pivot).rev() {
                let r = 1.0 + rng.gen_range(p.step_lo..=p.step_hi);
                let gap = levels[i + 1].ordinal() - levels[i].ordinal();
                values[i] = values[i + 1] * if up { 1.0 / r } else { r }.powf(gap);
            }
            let anchors: BTreeMap<RatingLevel, f64> = levels.into_iter().zip(values).collect();
            ParameterSpec::new(&spec.name, spec.direction, anchors)
        })
        .collect()
}

/// A bank whose anchors are a random perturbation of `specs`.
pub fn known_bank(specs: &[ParameterSpec], p: Perturbation, seed: u64, settings: &BankSettings) -> Result<NfBank> {
    NfBank::init_from_anchors(perturbed_specs(specs, p, seed)?, settings)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectDraw {
    pub count: usize,
    pub kloc_lo: f64,
    pub kloc_hi: f64,
    /// Multiplicative log-normal noise on effort (standard deviation of the log).
    pub noise: f64,
}

impl Default for ProjectDraw {
    fn default() -> Self {
        ProjectDraw {
            count: 99,
            kloc_lo: 2.0,
            kloc_hi: 300.0,
            noise: 0.0,
        }
    }
}

/// Projects with log-uniform size and ratings drawn uniformly over each
/// parameter's defined levels; effort is the bank's own prediction.
pub fn generate_projects(bank: &NfBank, draw: &ProjectDraw, seed: u64) -> Result<Vec<ProjectRecord>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes = [Mode::Embedded, Mode::Organic, Mode::Semidetached];
    let (lo, hi) = (draw.kloc_lo.ln(), draw.kloc_hi.ln());
    let mut out = Vec::with_capacity(draw.count);
    for j in 0..draw.count {
        let size_kloc = rng.gen_range(lo..=hi).exp();
        let ratings: BTreeMap<String, RatingLevel> = bank
            .specs()
            .map(|s| (s.name.clone(), *s.levels().choose(&mut rng).expect("specs have levels")))
            .collect();
        let mode = modes[rng.gen_range(0..modes.len())];
        let mut project = ProjectRecord {
            id: format!("syn-{j:03}"),
            source: "synthetic".into(),
            mode,
            size_kloc,
            actual_effort_pm: 1.0,
            ratings,
            staffing_complexity: None,
        };
        let exact = bank.predict(&project)?;
        let factor = if draw.noise > 0.0 {
            // Box-Muller from two uniforms keeps the draw on the seeded stream.
            let (u1, u2): (f64, f64) = (rng.gen_range(f64::EPSILON..1.0), rng.gen());
            (draw.noise * (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()).exp()
        } else {
            1.0
        };
        project.actual_effort_pm = exact * factor;
        out.push(project);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bank::default_specs;

    #[test]
    fn perturbed_specs_stay_monotone_with_unit_nominal() {
        for seed in 0..5 {
            for s in perturbed_specs(&default_specs(), Perturbation::default(), seed).unwrap() {
                s.validate().unwrap();
                assert_eq!(s.anchors[&RatingLevel::NOMINAL], 1.0, "{}", s.name);
            }
        }
    }

    #[test]
    fn generated_efforts_match_the_bank() {
        let bank = NfBank::init_from_anchors(default_specs(), &BankSettings::default()).unwrap();
        let draw = ProjectDraw {
            count: 5,
            ..Default::default()
        };
        let ps = generate_projects(&bank, &draw, 3).unwrap();
        assert_eq!(ps.len(), 5);
        for p in &ps {
            assert!((2.0..=300.0).contains(&p.size_kloc));
            assert_eq!(p.actual_effort_pm, bank.predict(p).unwrap());
        }
        assert_eq!(ps, generate_projects(&bank, &draw, 3).unwrap());
    }
}
