//! Binary soft-margin SVM with an RBF kernel, trained by sequential minimal
//! optimization (SMO).
//!
//! Leaf is the positive class. Features are standardized per dimension with
//! statistics of the training set, and the scaling travels inside the
//! model. The solver follows the usual maximal-violating-pair scheme with
//! second-order working-set selection and stops when the largest KKT
//! violation drops below `tol`.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::features::FeatureVector;
use crate::sampling::{TrainingEntry, TrainingSet};
use crate::{Class, Error, LabelVector, Result};

pub const DIM: usize = FeatureVector::DIM;
pub type Row = [f64; DIM];

const TAU: f64 = 1e-12;
const CACHE_BYTES: usize = 256 << 20;
const FORMAT_MAGIC: &str = "leafwood-svm-model";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingParams {
    pub mean: Row,
    pub std: Row,
}

impl ScalingParams {
    pub const IDENTITY: ScalingParams = ScalingParams {
        mean: [0.0; DIM],
        std: [1.0; DIM],
    };

    /// Per-dimension mean and population standard deviation. Dimensions
    /// without spread get std 1.
    pub fn fit(rows: &[Row]) -> Self {
        let n = rows.len() as f64;
        let mut mean = [0.0; DIM];
        let mut std = [1.0; DIM];
        for d in 0..DIM {
            let m0 = rows.iter().map(|r| r[d]).sum::<f64>() / n;
            let m = m0 + rows.iter().map(|r| r[d] - m0).sum::<f64>() / n;
            let var = rows.iter().map(|r| (r[d] - m) * (r[d] - m)).sum::<f64>() / n;
            let s = var.sqrt();
            mean[d] = m;
            std[d] = if s > 1e-12 * m.abs() && s > 0.0 && s.is_finite() {
                s
            } else {
                1.0
            };
        }
        ScalingParams { mean, std }
    }

    pub fn apply(&self, row: &Row) -> Row {
        let mut out = [0.0; DIM];
        for d in 0..DIM {
            out[d] = (row[d] - self.mean[d]) / self.std[d];
        }
        out
    }
}

/// Standardizes feature rows. Without `params` the statistics are fitted to
/// the input; with them the given transform is applied.
pub fn standardize(
    features: &[FeatureVector],
    params: Option<&ScalingParams>,
) -> Result<(Vec<Row>, ScalingParams)> {
    if features.is_empty() {
        return Err(Error::InvalidInput("cannot standardize an empty feature set".into()));
    }
    let raw: Vec<Row> = features.iter().map(FeatureVector::to_array).collect();
    let params = match params {
        Some(p) => *p,
        None => ScalingParams::fit(&raw),
    };
    Ok((raw.iter().map(|r| params.apply(r)).collect(), params))
}

/// Gaussian kernel `exp(-gamma * |u - v|^2)`.
#[inline]
pub fn rbf(u: &[f64], v: &[f64], gamma: f64) -> f64 {
    let d2: f64 = u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum();
    (-gamma * d2).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmHyperparams {
    /// Box constraint.
    pub c: f64,
    /// RBF width.
    pub gamma: f64,
    /// KKT tolerance used as the stopping criterion.
    pub tol: f64,
    pub max_iter: usize,
    /// Standardize features before training.
    pub scaling: bool,
}

impl Default for SvmHyperparams {
    fn default() -> Self {
        SvmHyperparams {
            c: 10.0,
            gamma: 1.0 / DIM as f64,
            tol: 1e-3,
            max_iter: 1_000_000,
            scaling: true,
        }
    }
}

impl SvmHyperparams {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if !ok(self.c) || !ok(self.gamma) || !ok(self.tol) || self.max_iter == 0 {
            return Err(Error::Config(format!(
                "SVM hyperparameters must be positive (C={}, gamma={}, tol={}, max_iter={})",
                self.c, self.gamma, self.tol, self.max_iter
            )));
        }
        Ok(())
    }
}

/// A trained classifier: support vectors in scaled feature space, their
/// coefficients `alpha_i * y_i`, the bias and the scaling transform.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    support: Vec<Row>,
    coef: Vec<f64>,
    bias: f64,
    gamma: f64,
    c: f64,
    tol: f64,
    scaling: ScalingParams,
}

impl SvmModel {
    pub fn new(
        support: Vec<Row>,
        coef: Vec<f64>,
        bias: f64,
        gamma: f64,
        c: f64,
        tol: f64,
        scaling: ScalingParams,
    ) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::Numeric("model has no support vectors".into()));
        }
        if support.len() != coef.len() {
            return Err(Error::InvalidInput("support vector / coefficient count mismatch".into()));
        }
        if coef.iter().any(|&a| a == 0.0 || !a.is_finite()) {
            return Err(Error::Numeric("support vector with zero or non-finite coefficient".into()));
        }
        if !(bias.is_finite() && gamma > 0.0) {
            return Err(Error::Numeric("invalid bias or gamma".into()));
        }
        Ok(SvmModel {
            support,
            coef,
            bias,
            gamma,
            c,
            tol,
            scaling,
        })
    }

    pub fn support_vectors(&self) -> &[Row] {
        &self.support
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coef
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn scaling(&self) -> &ScalingParams {
        &self.scaling
    }

    /// Decision value for an already-scaled row.
    pub fn decision_scaled(&self, row: &Row) -> f64 {
        self.support
            .iter()
            .zip(&self.coef)
            .map(|(sv, a)| a * rbf(sv, row, self.gamma))
            .sum::<f64>()
            + self.bias
    }

    pub fn decision_value(&self, fv: &FeatureVector) -> f64 {
        self.decision_scaled(&self.scaling.apply(&fv.to_array()))
    }

    /// Leaf when the decision value is `>= 0`.
    pub fn predict(&self, fv: &FeatureVector) -> Class {
        if self.decision_value(fv) >= 0.0 {
            Class::Leaf
        } else {
            Class::Wood
        }
    }

    /// Same model with the support vectors stored in a different order.
    pub fn permuted(&self, order: &[usize]) -> SvmModel {
        SvmModel {
            support: order.iter().map(|&i| self.support[i]).collect(),
            coef: order.iter().map(|&i| self.coef[i]).collect(),
            ..self.clone()
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let row = |r: &Row| r.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(" ");
        let _ = writeln!(s, "{FORMAT_MAGIC} {FORMAT_VERSION}");
        let _ = writeln!(s, "kernel rbf");
        let _ = writeln!(s, "gamma {:?}", self.gamma);
        let _ = writeln!(s, "c {:?}", self.c);
        let _ = writeln!(s, "tol {:?}", self.tol);
        let _ = writeln!(s, "bias {:?}", self.bias);
        let _ = writeln!(s, "scale_mean {}", row(&self.scaling.mean));
        let _ = writeln!(s, "scale_std {}", row(&self.scaling.std));
        let _ = writeln!(s, "support_vectors {}", self.support.len());
        for (sv, a) in self.support.iter().zip(&self.coef) {
            let _ = writeln!(s, "{a:?} {}", row(sv));
        }
        s.push_str("end\n");
        s
    }

    pub fn from_text(text: &str, origin: &Path) -> Result<Self> {
        let mut rd = ModelReader::new(text, origin);
        let (ln, v) = rd.keyed(FORMAT_MAGIC)?;
        if v != [FORMAT_VERSION.to_string().as_str()] {
            return Err(Error::UnsupportedFormat {
                path: origin.to_path_buf(),
                what: format!("model version {:?} at line {ln}", v.join(" ")),
            });
        }
        let (ln, kernel) = rd.keyed("kernel")?;
        if kernel != ["rbf"] {
            return Err(rd.err(ln, "only the rbf kernel is supported"));
        }
        let gamma = rd.scalar("gamma")?;
        let c = rd.scalar("c")?;
        let tol = rd.scalar("tol")?;
        let bias = rd.scalar("bias")?;
        let (ln, t) = rd.keyed("scale_mean")?;
        let mean = rd.row(ln, &t)?;
        let (ln, t) = rd.keyed("scale_std")?;
        let std = rd.row(ln, &t)?;
        let (ln, t) = rd.keyed("support_vectors")?;
        let n: usize = match t.as_slice() {
            [v] => v
                .parse()
                .map_err(|_| rd.err(ln, "invalid support vector count"))?,
            _ => return Err(rd.err(ln, "expected a count")),
        };
        let mut support = Vec::with_capacity(n);
        let mut coef = Vec::with_capacity(n);
        for _ in 0..n {
            let (ln, toks) = rd.raw()?;
            if toks.len() != DIM + 1 {
                return Err(rd.err(ln, &format!("expected {} values", DIM + 1)));
            }
            coef.push(rd.num(ln, toks[0])?);
            support.push(rd.row(ln, &toks[1..])?);
        }
        rd.keyed("end")?;
        SvmModel::new(support, coef, bias, gamma, c, tol, ScalingParams { mean, std })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text, path)
    }
}

struct ModelReader<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
    origin: &'a Path,
}

impl<'a> ModelReader<'a> {
    fn new(text: &'a str, origin: &'a Path) -> Self {
        ModelReader {
            lines: text.lines().enumerate(),
            origin,
        }
    }

    fn err(&self, ln: usize, m: &str) -> Error {
        Error::parse(self.origin, ln, m.to_string())
    }

    fn raw(&mut self) -> Result<(usize, Vec<&'a str>)> {
        match self.lines.next() {
            Some((i, l)) => Ok((i + 1, l.split_whitespace().collect())),
            None => Err(self.err(0, "unexpected end of file")),
        }
    }

    fn keyed(&mut self, want: &str) -> Result<(usize, Vec<&'a str>)> {
        let (ln, toks) = self.raw()?;
        if toks.first() != Some(&want) {
            return Err(self.err(ln, &format!("expected '{want}'")));
        }
        Ok((ln, toks[1..].to_vec()))
    }

    fn num(&self, ln: usize, t: &str) -> Result<f64> {
        t.parse::<f64>()
            .map_err(|_| self.err(ln, &format!("invalid number {t:?}")))
    }

    fn scalar(&mut self, want: &str) -> Result<f64> {
        match self.keyed(want)? {
            (ln, t) if t.len() == 1 => self.num(ln, t[0]),
            (ln, _) => Err(self.err(ln, "expected one value")),
        }
    }

    fn row(&self, ln: usize, t: &[&str]) -> Result<Row> {
        if t.len() != DIM {
            return Err(self.err(ln, &format!("expected {DIM} values")));
        }
        let mut r = [0.0; DIM];
        for (d, tok) in t.iter().enumerate() {
            r[d] = self.num(ln, tok)?;
        }
        Ok(r)
    }
}

/// Raw SMO output for a training problem, in the caller's row order.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoSolution {
    pub alpha: Vec<f64>,
    pub bias: f64,
    /// Dual objective `sum(alpha) - 1/2 alpha' Q alpha` (maximization form).
    pub objective: f64,
    pub iterations: usize,
    /// Largest KKT violation `max_up(-yG) - min_low(-yG)` at exit.
    pub violation: f64,
}

struct KernelCache<'a> {
    rows: &'a [Row],
    gamma: f64,
    slots: Vec<Option<Arc<[f64]>>>,
    last_used: Vec<u64>,
    cached: Vec<usize>,
    capacity: usize,
    clock: u64,
}

impl<'a> KernelCache<'a> {
    fn new(rows: &'a [Row], gamma: f64) -> Self {
        let n = rows.len();
        let capacity = (CACHE_BYTES / (8 * n.max(1))).clamp(2, n.max(2));
        KernelCache {
            rows,
            gamma,
            slots: vec![None; n],
            last_used: vec![0; n],
            cached: Vec::new(),
            capacity,
            clock: 0,
        }
    }

    fn row(&mut self, i: usize) -> Arc<[f64]> {
        self.clock += 1;
        self.last_used[i] = self.clock;
        if let Some(r) = &self.slots[i] {
            return Arc::clone(r);
        }
        if self.cached.len() >= self.capacity {
            let (pos, _) = self
                .cached
                .iter()
                .enumerate()
                .min_by_key(|(_, &j)| self.last_used[j])
                .expect("cache is non-empty");
            let victim = self.cached.swap_remove(pos);
            self.slots[victim] = None;
        }
        let xi = &self.rows[i];
        let r: Arc<[f64]> = self.rows.iter().map(|xj| rbf(xi, xj, self.gamma)).collect();
        self.slots[i] = Some(Arc::clone(&r));
        self.cached.push(i);
        r
    }
}

/// Solves the soft-margin SVM dual for scaled rows `x` with targets `y`
/// (±1) by SMO.
pub fn solve_smo(x: &[Row], y: &[f64], c: f64, gamma: f64, tol: f64, max_iter: usize) -> Result<SmoSolution> {
    let n = x.len();
    if n != y.len() {
        return Err(Error::InvalidInput("row / target count mismatch".into()));
    }
    if !y.iter().any(|&v| v > 0.0) || !y.iter().any(|&v| v < 0.0) {
        return Err(Error::Numeric("training data contains a single class".into()));
    }
    let mut cache = KernelCache::new(x, gamma);
    let mut alpha = vec![0.0; n];
    // G = Q alpha - e
    let mut grad = vec![-1.0; n];
    let in_up = |a: f64, yi: f64| (yi > 0.0 && a < c) || (yi < 0.0 && a > 0.0);
    let in_low = |a: f64, yi: f64| (yi > 0.0 && a > 0.0) || (yi < 0.0 && a < c);
    let objective = |alpha: &[f64], grad: &[f64]| -> f64 {
        -0.5 * alpha.iter().zip(grad).map(|(a, g)| a * (g - 1.0)).sum::<f64>()
    };
    let mut last_obj = 0.0f64;

    let mut iter = 0;
    let violation = loop {
        // Maximal violating i, then j by second-order gain.
        let mut gmax = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..n {
            if in_up(alpha[t], y[t]) && -y[t] * grad[t] > gmax {
                gmax = -y[t] * grad[t];
                i = t;
            }
        }
        let mut gmin = f64::INFINITY;
        for t in 0..n {
            if in_low(alpha[t], y[t]) {
                gmin = gmin.min(-y[t] * grad[t]);
            }
        }
        if i == usize::MAX || gmax - gmin < tol {
            break (gmax - gmin).max(0.0);
        }
        if iter >= max_iter {
            return Err(Error::NotConverged {
                iterations: iter,
                violation: gmax - gmin,
                objective: objective(&alpha, &grad),
            });
        }
        let ki = cache.row(i);
        let mut j = usize::MAX;
        let mut best = f64::INFINITY;
        for t in 0..n {
            if !in_low(alpha[t], y[t]) {
                continue;
            }
            let b = gmax + y[t] * grad[t];
            if b > 0.0 {
                let a = ki[i] + 1.0 - 2.0 * ki[t];
                let a = if a > 0.0 { a } else { TAU };
                let gain = -(b * b) / a;
                if gain < best {
                    best = gain;
                    j = t;
                }
            }
        }
        if j == usize::MAX {
            break (gmax - gmin).max(0.0);
        }
        let kj = cache.row(j);
        let (ai_old, aj_old) = (alpha[i], alpha[j]);
        let quad = {
            let q = ki[i] + kj[j] - 2.0 * ki[j];
            if q > 0.0 { q } else { TAU }
        };
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let dai = (alpha[i] - ai_old) * y[i];
        let daj = (alpha[j] - aj_old) * y[j];
        for t in 0..n {
            grad[t] += y[t] * (ki[t] * dai + kj[t] * daj);
        }
        iter += 1;
        if cfg!(debug_assertions) {
            let obj = objective(&alpha, &grad);
            debug_assert!(
                obj >= last_obj - 1e-9 * (1.0 + last_obj.abs()),
                "dual objective decreased: {last_obj} -> {obj}"
            );
            last_obj = obj;
        }
    };

    // Bias from free variables, or the midpoint of the feasible interval.
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut sum_free = 0.0;
    let mut n_free = 0usize;
    for t in 0..n {
        let yg = y[t] * grad[t];
        let at_upper = alpha[t] >= c;
        let at_lower = alpha[t] <= 0.0;
        if at_upper {
            if y[t] < 0.0 { ub = ub.min(yg) } else { lb = lb.max(yg) }
        } else if at_lower {
            if y[t] > 0.0 { ub = ub.min(yg) } else { lb = lb.max(yg) }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    let rho = if n_free > 0 {
        sum_free / n_free as f64
    } else {
        (ub + lb) / 2.0
    };
    Ok(SmoSolution {
        objective: objective(&alpha, &grad),
        alpha,
        bias: -rho,
        iterations: iter,
        violation,
    })
}

/// Training diagnostics alongside the model.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub iterations: usize,
    pub objective: f64,
    pub violation: f64,
    pub n_support: usize,
    /// Dual variables in training-set order.
    pub alpha: Vec<f64>,
}

fn check_entries(entries: &[TrainingEntry]) -> Result<()> {
    if entries.len() < 2 {
        return Err(Error::Numeric("training needs at least two samples".into()));
    }
    let leaf = entries.iter().filter(|e| e.class == Class::Leaf).count();
    if leaf == 0 || leaf == entries.len() {
        return Err(Error::Numeric("training set contains a single class".into()));
    }
    Ok(())
}

/// Trains on raw entries; see [`train`].
pub fn train_entries(
    entries: &[TrainingEntry],
    hp: &SvmHyperparams,
    seed: u64,
) -> Result<(SvmModel, TrainReport)> {
    hp.validate()?;
    check_entries(entries)?;
    let feats: Vec<FeatureVector> = entries.iter().map(|e| e.features).collect();
    let (scaled, params) = if hp.scaling {
        standardize(&feats, None)?
    } else {
        standardize(&feats, Some(&ScalingParams::IDENTITY))?
    };
    // Seeded presentation order; results are mapped back to input order.
    let mut order: Vec<usize> = (0..entries.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let x: Vec<Row> = order.iter().map(|&i| scaled[i]).collect();
    let y: Vec<f64> = order.iter().map(|&i| entries[i].class.sign()).collect();
    let sol = solve_smo(&x, &y, hp.c, hp.gamma, hp.tol, hp.max_iter)?;

    let mut alpha = vec![0.0; entries.len()];
    for (pos, &i) in order.iter().enumerate() {
        alpha[i] = sol.alpha[pos];
    }
    let (support, coef): (Vec<Row>, Vec<f64>) = (0..entries.len())
        .filter(|&i| alpha[i] > 0.0)
        .map(|i| (scaled[i], alpha[i] * entries[i].class.sign()))
        .unzip();
    let model = SvmModel::new(support, coef, sol.bias, hp.gamma, hp.c, hp.tol, params)?;
    let report = TrainReport {
        iterations: sol.iterations,
        objective: sol.objective,
        violation: sol.violation,
        n_support: model.support.len(),
        alpha,
    };
    Ok((model, report))
}

/// Trains a model on a training set. Deterministic for a given seed.
pub fn train(ts: &TrainingSet, hp: &SvmHyperparams, seed: u64) -> Result<SvmModel> {
    Ok(train_entries(ts.entries(), hp, seed)?.0)
}

pub fn predict(model: &SvmModel, fv: &FeatureVector) -> Class {
    model.predict(fv)
}

/// Predicts every point in order, in parallel on the current rayon pool.
pub fn classify_cloud(model: &SvmModel, features: &[FeatureVector]) -> LabelVector {
    LabelVector(features.par_iter().map(|f| model.predict(f)).collect())
}

/// One evaluated point of a hyperparameter grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub c: f64,
    pub gamma: f64,
    pub cv_accuracy: f64,
}

pub const GRID_C: [f64; 3] = [1.0, 10.0, 100.0];
pub const GRID_GAMMA: [f64; 3] = [0.05, 0.2, 1.0];

/// Stratified k-fold cross-validated grid search over `C` and `gamma`.
/// Returns the best hyperparameters (first in grid order on ties) and the
/// full grid.
pub fn grid_search(
    ts: &TrainingSet,
    base: &SvmHyperparams,
    cs: &[f64],
    gammas: &[f64],
    folds: usize,
    seed: u64,
) -> Result<(SvmHyperparams, Vec<GridPoint>)> {
    if folds < 2 {
        return Err(Error::Config("cross-validation needs at least 2 folds".into()));
    }
    let entries = ts.entries();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold_of = vec![0usize; entries.len()];
    for class in [Class::Leaf, Class::Wood] {
        let mut idx: Vec<usize> = (0..entries.len()).filter(|&i| entries[i].class == class).collect();
        idx.shuffle(&mut rng);
        for (r, i) in idx.into_iter().enumerate() {
            fold_of[i] = r % folds;
        }
    }
    let mut grid = Vec::new();
    let mut best: Option<GridPoint> = None;
    for &c in cs {
        for &gamma in gammas {
            let hp = SvmHyperparams { c, gamma, ..*base };
            let mut correct = 0usize;
            for f in 0..folds {
                let train_part: Vec<TrainingEntry> = entries
                    .iter()
                    .zip(&fold_of)
                    .filter(|(_, &k)| k != f)
                    .map(|(e, _)| *e)
                    .collect();
                let (model, _) = train_entries(&train_part, &hp, seed)?;
                correct += entries
                    .iter()
                    .zip(&fold_of)
                    .filter(|(e, &k)| k == f && model.predict(&e.features) == e.class)
                    .count();
            }
            let gp = GridPoint {
                c,
                gamma,
                cv_accuracy: correct as f64 / entries.len() as f64,
            };
            if best.is_none_or(|b| gp.cv_accuracy > b.cv_accuracy) {
                best = Some(gp);
            }
            grid.push(gp);
        }
    }
    let b = best.ok_or_else(|| Error::Config("empty hyperparameter grid".into()))?;
    Ok((
        SvmHyperparams {
            c: b.c,
            gamma: b.gamma,
            ..*base
        },
        grid,
    ))
}
