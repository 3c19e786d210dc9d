//! Single-input first-order Sugeno network with generalized bell memberships.
//!
//! Layers: fuzzify (`mu_i(x)`), fire (`w_i = mu_i`), normalize
//! (`wn_i = w_i / sum w`), consequent (`f_i = p_i x + r_i`), sum (`y = sum wn_i f_i`).
//! Training alternates a least-squares solve for the consequents with one
//! batch gradient step on the premise parameters `(a, b, c)`.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this total firing strength a forward pass refuses to normalize.
pub const DEGENERATE_FIRING: f64 = 1e-300;

/// Bell slope given to rules laid out by [`AnfisNet::with_centers`].
pub const DEFAULT_SLOPE: f64 = 1.5;
pub const MIN_WIDTH: f64 = 1e-3;
pub const MIN_SLOPE: f64 = 0.1;
pub const MAX_SLOPE: f64 = 10.0;
pub const MIN_CENTER_GAP: f64 = 1e-3;

const MODEL_FORMAT: &str = "nfseer-anfis";
const MODEL_VERSION: u32 = 1;

/// Generalized bell `1 / (1 + |(x - c) / a|^(2b))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BellMf {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// Partial derivatives of one membership degree.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BellPartials {
    pub mu: f64,
    pub da: f64,
    pub db: f64,
    pub dc: f64,
}

impl BellMf {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        let mf = BellMf { a, b, c };
        mf.validate()?;
        Ok(mf)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.a > 0.0) {
            return Err(Error::ParameterDomain(format!("bell width a = {} must be > 0", self.a)));
        }
        if !(self.b.is_finite() && self.b > 0.0) {
            return Err(Error::ParameterDomain(format!("bell slope b = {} must be > 0", self.b)));
        }
        if !self.c.is_finite() {
            return Err(Error::ParameterDomain(format!(
                "bell center c = {} must be finite",
                self.c
            )));
        }
        Ok(())
    }

    /// Membership degree of `x`, in `(0, 1]` for finite input.
    pub fn eval(&self, x: f64) -> Result<f64> {
        self.validate()?;
        if !x.is_finite() {
            return Err(Error::ParameterDomain(format!("input x = {x} is not finite")));
        }
        Ok(self.degree(x))
    }

    pub(crate) fn degree(&self, x: f64) -> f64 {
        let z = (x - self.c) / self.a;
        1.0 / (1.0 + (z * z).powf(self.b))
    }

    pub(crate) fn partials(&self, x: f64) -> BellPartials {
        let z = (x - self.c) / self.a;
        let u = (z * z).powf(self.b);
        let mu = 1.0 / (1.0 + u);
        // g = u * mu^2, written to survive u -> inf
        let g = if u > 1e100 { 1.0 / u } else { u * mu * mu };
        if z == 0.0 {
            return BellPartials {
                mu,
                ..Default::default()
            };
        }
        BellPartials {
            mu,
            da: 2.0 * self.b * g / self.a,
            db: -2.0 * z.abs().ln() * g,
            dc: 2.0 * self.b * g / (self.a * z),
        }
    }
}

/// Linear rule output `slope * x + intercept`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Consequent {
    pub slope: f64,
    pub intercept: f64,
}

impl Consequent {
    pub fn new(slope: f64, intercept: f64) -> Self {
        Consequent { slope, intercept }
    }

    #[inline]
    pub fn at(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }
}

/// Closed interval of rating ordinals a network is meant to serve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub lo: f64,
    pub hi: f64,
}

impl Domain {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::ParameterDomain(format!("invalid input domain [{lo}, {hi}]")));
        }
        Ok(Domain { lo, hi })
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Intermediate values of one forward pass.
#[derive(Clone, Debug, PartialEq)]
pub struct ForwardTrace {
    pub strengths: Vec<f64>,
    pub normalized: Vec<f64>,
    pub rule_outputs: Vec<f64>,
    pub extrapolated: bool,
}

/// Gradient of a scalar objective with respect to one membership function.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PremiseGradient {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    /// Early stop once the loss changes by less than this between epochs.
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 200,
            learning_rate: 0.01,
            tolerance: 0.0,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::Argument(format!(
                "learning rate must be > 0, got {}",
                self.learning_rate
            )));
        }
        if !(self.tolerance >= 0.0) {
            return Err(Error::Argument(format!(
                "tolerance must be >= 0, got {}",
                self.tolerance
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnfisNet {
    mfs: Vec<BellMf>,
    consequents: Vec<Consequent>,
    domain: Domain,
}

impl AnfisNet {
    pub fn new(mfs: Vec<BellMf>, consequents: Vec<Consequent>, domain: Domain) -> Result<Self> {
        let net = AnfisNet {
            mfs,
            consequents,
            domain,
        };
        net.validate()?;
        Ok(net)
    }

    /// One rule per center, widths at half the local spacing, slope 2, zero consequents.
    pub fn with_centers(centers: &[f64], domain: Domain) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::Argument("a network needs at least one rule".into()));
        }
        let m = centers.len();
        let mfs = (0..m)
            .map(|i| {
                let left = (i > 0).then(|| centers[i] - centers[i - 1]);
                let right = (i + 1 < m).then(|| centers[i + 1] - centers[i]);
                let spacing = match (left, right) {
                    (Some(l), Some(r)) => 0.5 * (l + r),
                    (Some(g), None) | (None, Some(g)) => g,
                    (None, None) => domain.width().max(1.0),
                };
                BellMf {
                    a: (0.5 * spacing).max(MIN_WIDTH),
                    b: DEFAULT_SLOPE,
                    c: centers[i],
                }
            })
            .collect();
        AnfisNet::new(mfs, vec![Consequent::default(); m], domain)
    }

    pub fn validate(&self) -> Result<()> {
        if self.mfs.is_empty() {
            return Err(Error::ParameterDomain("network has no rules".into()));
        }
        if self.mfs.len() != self.consequents.len() {
            return Err(Error::ParameterDomain(format!(
                "{} membership functions but {} consequents",
                self.mfs.len(),
                self.consequents.len()
            )));
        }
        for mf in &self.mfs {
            mf.validate()?;
        }
        for pair in self.mfs.windows(2) {
            if !(pair[0].c < pair[1].c) {
                return Err(Error::ParameterDomain(format!(
                    "membership centers must be strictly increasing ({} then {})",
                    pair[0].c, pair[1].c
                )));
            }
        }
        if self
            .consequents
            .iter()
            .any(|q| !(q.slope.is_finite() && q.intercept.is_finite()))
        {
            return Err(Error::ParameterDomain("non-finite consequent".into()));
        }
        Domain::new(self.domain.lo, self.domain.hi)?;
        Ok(())
    }

    pub fn rules(&self) -> usize {
        self.mfs.len()
    }

    pub fn mfs(&self) -> &[BellMf] {
        &self.mfs
    }

    pub fn consequents(&self) -> &[Consequent] {
        &self.consequents
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn with_consequents(&self, consequents: Vec<Consequent>) -> Result<Self> {
        AnfisNet::new(self.mfs.clone(), consequents, self.domain)
    }

    pub fn with_mfs(&self, mfs: Vec<BellMf>) -> Result<Self> {
        AnfisNet::new(mfs, self.consequents.clone(), self.domain)
    }

    /// Multiplies every rule output by `factor`, which scales `y` by the same factor.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut net = self.clone();
        for q in &mut net.consequents {
            q.slope *= factor;
            q.intercept *= factor;
        }
        net
    }

    fn firing(&self, x: f64) -> Result<(Vec<f64>, f64)> {
        if !x.is_finite() {
            return Err(Error::ParameterDomain(format!("input x = {x} is not finite")));
        }
        let w: Vec<f64> = self.mfs.iter().map(|mf| mf.degree(x)).collect();
        let total: f64 = w.iter().sum();
        if !(total >= DEGENERATE_FIRING) {
            return Err(Error::DegenerateFiring {
                x,
                total,
                context: "all rules underflow".into(),
            });
        }
        Ok((w, total))
    }

    pub fn forward(&self, x: f64) -> Result<(f64, ForwardTrace)> {
        let (strengths, total) = self.firing(x)?;
        let normalized: Vec<f64> = strengths.iter().map(|w| w / total).collect();
        let rule_outputs: Vec<f64> = self.consequents.iter().map(|q| q.at(x)).collect();
        let y = normalized.iter().zip(&rule_outputs).map(|(wn, f)| wn * f).sum();
        Ok((
            y,
            ForwardTrace {
                strengths,
                normalized,
                rule_outputs,
                extrapolated: !self.domain.contains(x),
            },
        ))
    }

    pub fn output(&self, x: f64) -> Result<f64> {
        let (w, total) = self.firing(x)?;
        Ok(w.iter().zip(&self.consequents).map(|(w, q)| w * q.at(x)).sum::<f64>() / total)
    }

    pub fn sse(&self, samples: &[(f64, f64)]) -> Result<f64> {
        samples.iter().try_fold(0.0, |acc, &(x, t)| {
            let e = self.output(x)? - t;
            Ok(acc + e * e)
        })
    }

    /// Least-squares consequents for fixed premises; returns the refit net and its sse.
    pub fn fit_consequents(&self, samples: &[(f64, f64)]) -> Result<(AnfisNet, f64)> {
        let weighted: Vec<(f64, f64, f64)> = samples.iter().map(|&(x, t)| (x, t, 1.0)).collect();
        let net = self.fit_consequents_weighted(&weighted)?;
        let sse = net.sse(samples)?;
        Ok((net, sse))
    }

    /// Minimizes `sum w_s (y(x_s) - t_s)^2` over all consequents.
    /// Rank-deficient systems get the minimum-norm solution.
    pub fn fit_consequents_weighted(&self, samples: &[(f64, f64, f64)]) -> Result<AnfisNet> {
        if samples.is_empty() {
            return Err(Error::Argument("least-squares fit needs at least one sample".into()));
        }
        let m = self.rules();
        let mut design = DMatrix::<f64>::zeros(samples.len(), 2 * m);
        let mut rhs = DVector::<f64>::zeros(samples.len());
        for (row, &(x, t, weight)) in samples.iter().enumerate() {
            if !(weight >= 0.0 && weight.is_finite()) {
                return Err(Error::Argument(format!("sample {row}: invalid weight {weight}")));
            }
            let (w, total) = self.firing(x).map_err(|e| match e {
                Error::DegenerateFiring { x, total, .. } => Error::DegenerateFiring {
                    x,
                    total,
                    context: format!("sample {row}"),
                },
                other => other,
            })?;
            let sw = weight.sqrt();
            for (i, wi) in w.iter().enumerate() {
                let wn = wi / total;
                design[(row, 2 * i)] = sw * wn * x;
                design[(row, 2 * i + 1)] = sw * wn;
            }
            rhs[row] = sw * t;
        }
        let theta = solve_min_norm(design, rhs)?;
        let consequents = (0..m)
            .map(|i| Consequent::new(theta[2 * i], theta[2 * i + 1]))
            .collect();
        self.with_consequents(consequents)
    }

    /// Partial derivatives of `y(x)` with respect to every `(a, b, c)`.
    pub fn output_partials(&self, x: f64) -> Result<(f64, Vec<PremiseGradient>)> {
        let (_, total) = self.firing(x)?;
        let parts: Vec<BellPartials> = self.mfs.iter().map(|mf| mf.partials(x)).collect();
        let f: Vec<f64> = self.consequents.iter().map(|q| q.at(x)).collect();
        let y = parts.iter().zip(&f).map(|(p, fi)| p.mu * fi).sum::<f64>() / total;
        let grads = parts
            .iter()
            .zip(&f)
            .map(|(p, fi)| {
                let dy_dw = (fi - y) / total;
                PremiseGradient {
                    a: dy_dw * p.da,
                    b: dy_dw * p.db,
                    c: dy_dw * p.dc,
                }
            })
            .collect();
        Ok((y, grads))
    }

    /// Gradient of `sum_s g_s * y(x_s)` where `g_s` is the upstream derivative per input.
    pub fn backprop(&self, inputs: &[f64], upstream: &[f64]) -> Result<Vec<PremiseGradient>> {
        if inputs.len() != upstream.len() {
            return Err(Error::Argument("inputs and upstream gradients differ in length".into()));
        }
        let mut acc = vec![PremiseGradient::default(); self.rules()];
        for (&x, &g) in inputs.iter().zip(upstream) {
            if g == 0.0 {
                continue;
            }
            let (_, grads) = self.output_partials(x)?;
            for (sum, d) in acc.iter_mut().zip(grads) {
                sum.a += g * d.a;
                sum.b += g * d.b;
                sum.c += g * d.c;
            }
        }
        Ok(acc)
    }

    /// Gradient of the sum of squared errors with respect to every premise.
    pub fn premise_gradients(&self, samples: &[(f64, f64)]) -> Result<Vec<PremiseGradient>> {
        let mut inputs = Vec::with_capacity(samples.len());
        let mut upstream = Vec::with_capacity(samples.len());
        for &(x, t) in samples {
            inputs.push(x);
            upstream.push(2.0 * (self.output(x)? - t));
        }
        self.backprop(&inputs, &upstream)
    }

    /// Applies `theta -= lr * grad` to the premises, then repairs them.
    pub fn descend(&self, grads: &[PremiseGradient], learning_rate: f64) -> Result<AnfisNet> {
        let mfs = self
            .mfs
            .iter()
            .zip(grads)
            .map(|(mf, g)| BellMf {
                a: mf.a - learning_rate * g.a,
                b: mf.b - learning_rate * g.b,
                c: mf.c - learning_rate * g.c,
            })
            .collect();
        AnfisNet::new(repair_premises(mfs)?, self.consequents.clone(), self.domain)
    }

    /// Hybrid learning: each epoch solves the consequents exactly, records the
    /// sse, then takes one gradient step on the premises. A final solve leaves
    /// the consequents optimal for the returned premises.
    pub fn train_hybrid(&self, samples: &[(f64, f64)], cfg: &TrainConfig) -> Result<(AnfisNet, Vec<f64>)> {
        cfg.validate()?;
        if cfg.epochs == 0 {
            return Ok((self.clone(), Vec::new()));
        }
        let mut net = self.clone();
        let mut history = Vec::with_capacity(cfg.epochs);
        for epoch in 0..cfg.epochs {
            let (fitted, sse) = net.fit_consequents(samples)?;
            if !sse.is_finite() {
                return Err(Error::Divergence { epoch });
            }
            let stop = history
                .last()
                .is_some_and(|prev: &f64| (prev - sse).abs() < cfg.tolerance);
            history.push(sse);
            net = fitted;
            if stop || sse == 0.0 {
                break;
            }
            let grads = net.premise_gradients(samples)?;
            if grads
                .iter()
                .any(|g| !(g.a.is_finite() && g.b.is_finite() && g.c.is_finite()))
            {
                return Err(Error::Divergence { epoch });
            }
            net = net.descend(&grads, cfg.learning_rate)?;
        }
        let (net, _) = net.fit_consequents(samples)?;
        Ok((net, history))
    }

    pub fn to_model_string(&self) -> String {
        serde_json::to_string_pretty(&ModelFile::new(self)).expect("model serialization cannot fail")
    }

    pub fn from_model_str(text: &str) -> Result<AnfisNet> {
        serde_json::from_str::<ModelFile>(text)?.into_net()
    }

    pub fn write_model(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_model_string() + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn read_model(path: &Path) -> Result<AnfisNet> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        AnfisNet::from_model_str(&text)
    }
}

/// On-disk layout of a single network.
///
/// ```json
/// { "format": "nfseer-anfis", "version": 1, "rules": 2,
///   "net": { "mfs": [{"a":0.5,"b":2.0,"c":1.0}, ...],
///            "consequents": [{"slope":0.1,"intercept":0.9}, ...],
///            "domain": {"lo":1.0,"hi":2.0} } }
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    format: String,
    version: u32,
    rules: usize,
    net: AnfisNet,
}

impl ModelFile {
    pub fn new(net: &AnfisNet) -> Self {
        ModelFile {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            rules: net.rules(),
            net: net.clone(),
        }
    }

    pub fn into_net(self) -> Result<AnfisNet> {
        if self.format != MODEL_FORMAT || self.version != MODEL_VERSION {
            return Err(Error::Argument(format!(
                "unsupported model format {} v{}",
                self.format, self.version
            )));
        }
        if self.rules != self.net.rules() {
            return Err(Error::ParameterDomain(format!(
                "model declares {} rules but stores {}",
                self.rules,
                self.net.rules()
            )));
        }
        self.net.validate()?;
        Ok(self.net)
    }
}

/// Clamps widths and slopes into range and pushes centers apart so they stay
/// strictly increasing with at least `MIN_CENTER_GAP` between neighbors.
pub fn repair_premises(mut mfs: Vec<BellMf>) -> Result<Vec<BellMf>> {
    for mf in &mut mfs {
        if !(mf.a.is_finite() && mf.b.is_finite() && mf.c.is_finite()) {
            return Err(Error::ParameterDomain(format!("non-finite premise {mf:?}")));
        }
        mf.a = mf.a.max(MIN_WIDTH);
        mf.b = mf.b.clamp(MIN_SLOPE, MAX_SLOPE);
    }
    for i in 1..mfs.len() {
        let floor = mfs[i - 1].c + MIN_CENTER_GAP;
        if mfs[i].c < floor {
            mfs[i].c = floor;
        }
    }
    Ok(mfs)
}

pub(crate) fn solve_min_norm(design: DMatrix<f64>, rhs: DVector<f64>) -> Result<DVector<f64>> {
    let dims = design.nrows().max(design.ncols()) as f64;
    let svd = design.svd(true, true);
    let largest = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let eps = largest * dims * f64::EPSILON;
    svd.solve(&rhs, eps)
        .map_err(|e| Error::ParameterDomain(format!("least-squares solve failed: {e}")))
}
