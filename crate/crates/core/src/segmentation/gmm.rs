//! Baseline phase detector: a diagonal-covariance Gaussian mixture over the
//! four force channels of one foot, fitted by expectation-maximization with
//! k-means++ seeding and restarts, with the component count chosen by BIC.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::phases::{PhaseHypothesis, PhaseHypothesisSet};
use crate::data::{Foot, Trial};
use crate::error::{Error, Result};

const DIM: usize = 4;
type Point = [f64; DIM];

const LN_2PI: f64 = 1.837_877_066_409_345_3;

#[derive(Debug, Clone, PartialEq)]
pub struct GmmOptions {
    pub k_min: usize,
    pub k_max: usize,
    pub restarts: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub var_floor: f64,
    pub seed: u64,
}

impl Default for GmmOptions {
    fn default() -> Self {
        GmmOptions {
            k_min: 2,
            k_max: 12,
            restarts: 20,
            max_iter: 200,
            tol: 1e-6,
            var_floor: 1e-6,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GmmFit {
    pub weights: Vec<f64>,
    pub means: Vec<Point>,
    pub vars: Vec<Point>,
    pub log_likelihood: f64,
}

impl GmmFit {
    pub fn k(&self) -> usize {
        self.weights.len()
    }

    fn free_parameters(&self) -> usize {
        self.k() * 2 * DIM + self.k() - 1
    }

    pub fn bic(&self, n: usize) -> f64 {
        -2.0 * self.log_likelihood + self.free_parameters() as f64 * (n as f64).ln()
    }

    fn log_terms(&self) -> Vec<(f64, Point)> {
        self.weights
            .iter()
            .zip(&self.vars)
            .map(|(&w, var)| {
                let log_det: f64 = var.iter().map(|v| LN_2PI + v.ln()).sum();
                (w.ln() - 0.5 * log_det, var.map(|v| 1.0 / v))
            })
            .collect()
    }

    fn component_logs(&self, terms: &[(f64, Point)], x: &Point, out: &mut [f64]) {
        for (k, ((c, inv), mean)) in terms.iter().zip(&self.means).enumerate() {
            let mut q = 0.0;
            for d in 0..DIM {
                let diff = x[d] - mean[d];
                q += diff * diff * inv[d];
            }
            out[k] = c - 0.5 * q;
        }
    }

    /// Maximum-posterior component of each point.
    pub fn assign(&self, points: &[Point]) -> Vec<usize> {
        let terms = self.log_terms();
        let mut buf = vec![0.0; self.k()];
        points
            .iter()
            .map(|x| {
                self.component_logs(&terms, x, &mut buf);
                argmax(&buf)
            })
            .collect()
    }
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let m = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + values.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

fn sq_dist(a: &Point, b: &Point) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// k-means++ seeding. Returns `None` when fewer than `k` distinct points exist.
fn seed_centers<R: Rng>(points: &[Point], k: usize, rng: &mut R) -> Option<Vec<Point>> {
    let mut centers = vec![points[rng.random_range(0..points.len())]];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        if total <= 0.0 {
            return None;
        }
        let mut target = rng.random::<f64>() * total;
        let mut pick = d2.len() - 1;
        for (i, &d) in d2.iter().enumerate() {
            if d <= 0.0 {
                continue;
            }
            if target < d {
                pick = i;
                break;
            }
            target -= d;
        }
        if d2[pick] <= 0.0 {
            // numeric fallthrough landed on a zero-weight point
            pick = argmax(&d2);
        }
        let c = points[pick];
        for (p, d) in points.iter().zip(d2.iter_mut()) {
            *d = d.min(sq_dist(p, &c));
        }
        centers.push(c);
    }
    Some(centers)
}

/// Accumulate weighted first and second moments into a fit.
fn m_step(points: &[Point], resp: &[f64], k: usize, floor: f64, prev: Option<&GmmFit>) -> GmmFit {
    let n = points.len();
    let mut nk = vec![0.0; k];
    let mut s1 = vec![[0.0; DIM]; k];
    let mut s2 = vec![[0.0; DIM]; k];
    for (i, x) in points.iter().enumerate() {
        let r = &resp[i * k..(i + 1) * k];
        for j in 0..k {
            let w = r[j];
            if w == 0.0 {
                continue;
            }
            nk[j] += w;
            for d in 0..DIM {
                s1[j][d] += w * x[d];
                s2[j][d] += w * x[d] * x[d];
            }
        }
    }
    let mut weights = vec![0.0; k];
    let mut means = vec![[0.0; DIM]; k];
    let mut vars = vec![[floor; DIM]; k];
    for j in 0..k {
        weights[j] = nk[j] / n as f64;
        if nk[j] < 1e-12 {
            if let Some(p) = prev {
                means[j] = p.means[j];
                vars[j] = p.vars[j];
            }
            continue;
        }
        for d in 0..DIM {
            let m = s1[j][d] / nk[j];
            means[j][d] = m;
            vars[j][d] = (s2[j][d] / nk[j] - m * m).max(0.0) + floor;
        }
    }
    GmmFit {
        weights,
        means,
        vars,
        log_likelihood: f64::NEG_INFINITY,
    }
}

/// One EM run from k-means++ seeds.
fn fit_once<R: Rng>(points: &[Point], k: usize, opts: &GmmOptions, rng: &mut R) -> Option<GmmFit> {
    let centers = seed_centers(points, k, rng)?;
    let mut resp = vec![0.0; points.len() * k];
    for (i, p) in points.iter().enumerate() {
        let dists: Vec<f64> = centers.iter().map(|c| -sq_dist(p, c)).collect();
        resp[i * k + argmax(&dists)] = 1.0;
    }
    let mut fit = m_step(points, &resp, k, opts.var_floor, None);
    let mut buf = vec![0.0; k];
    let mut prev_ll = f64::NEG_INFINITY;
    for _ in 0..opts.max_iter {
        let terms = fit.log_terms();
        let mut ll = 0.0;
        for (i, x) in points.iter().enumerate() {
            fit.component_logs(&terms, x, &mut buf);
            let lse = log_sum_exp(&buf);
            ll += lse;
            for j in 0..k {
                resp[i * k + j] = (buf[j] - lse).exp();
            }
        }
        fit.log_likelihood = ll;
        if (ll - prev_ll).abs() <= opts.tol * ll.abs().max(1.0) {
            break;
        }
        prev_ll = ll;
        fit = m_step(points, &resp, k, opts.var_floor, Some(&fit));
    }
    if !fit.log_likelihood.is_finite() {
        return None;
    }
    Some(fit)
}

/// Best of `opts.restarts` EM runs for a fixed component count.
pub fn fit_gmm(points: &[Point], k: usize, opts: &GmmOptions) -> Option<GmmFit> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(k as u64));
    let mut best: Option<GmmFit> = None;
    for _ in 0..opts.restarts.max(1) {
        if let Some(fit) = fit_once(points, k, opts, &mut rng) {
            if best
                .as_ref()
                .is_none_or(|b| fit.log_likelihood > b.log_likelihood)
            {
                best = Some(fit);
            }
        }
    }
    best
}

/// Relabel component ids to `0..K'` over the components actually used,
/// ordered by the norm of their means.
fn compact_labels(fit: &GmmFit, raw: &[usize]) -> Vec<usize> {
    let mut used: Vec<usize> = raw.to_vec();
    used.sort_unstable();
    used.dedup();
    used.sort_by(|&a, &b| {
        let na = fit.means[a].iter().map(|v| v * v).sum::<f64>();
        let nb = fit.means[b].iter().map(|v| v * v).sum::<f64>();
        na.total_cmp(&nb).then(a.cmp(&b))
    });
    let mut map = vec![usize::MAX; fit.k()];
    for (new, &old) in used.iter().enumerate() {
        map[old] = new;
    }
    raw.iter().map(|&c| map[c]).collect()
}

/// Fit mixtures for every K in `[k_min, k_max]` to one foot's samples and
/// return the BIC-selected maximum-posterior labeling as a single hypothesis.
pub fn detect_phases_baseline(trial: &Trial, foot: Foot, opts: &GmmOptions) -> Result<PhaseHypothesisSet> {
    if !(2 <= opts.k_min && opts.k_min <= opts.k_max && opts.k_max <= 12) {
        return Err(Error::domain(format!(
            "phase count range must satisfy 2 <= k_min <= k_max <= 12, got [{}, {}]",
            opts.k_min, opts.k_max
        )));
    }
    let points = trial.foot_channels(foot);
    let n = points.len();
    let degenerate = PhaseHypothesisSet {
        foot,
        hypotheses: vec![PhaseHypothesis::new(1.0, vec![0; n])],
        degenerate: true,
    };
    if points.iter().all(|p| *p == points[0]) {
        log::warn!(
            "trial `{}` {foot} foot: all samples identical, using one phase",
            trial.trial_id
        );
        return Ok(degenerate);
    }

    let mut best: Option<(f64, GmmFit)> = None;
    for k in opts.k_min..=opts.k_max.min(n) {
        let Some(fit) = fit_gmm(&points, k, opts) else {
            // fewer distinct points than components; larger K cannot seed either
            break;
        };
        let bic = fit.bic(n);
        if best.as_ref().is_none_or(|(b, _)| bic < *b) {
            best = Some((bic, fit));
        }
    }
    let Some((_, fit)) = best else {
        log::warn!(
            "trial `{}` {foot} foot: no mixture could be fitted, using one phase",
            trial.trial_id
        );
        return Ok(degenerate);
    };
    let labels = compact_labels(&fit, &fit.assign(&points));
    PhaseHypothesisSet::new(foot, vec![PhaseHypothesis::new(1.0, labels)], n)
}
