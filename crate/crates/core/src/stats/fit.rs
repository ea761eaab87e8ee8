//! Crossing-point and sustainable-threshold fits.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use super::nelder_mead::{nelder_mead, NelderMeadOptions};
use super::SweepRecord;
use crate::error::{Error, Result};

/// One `(L, p)` estimate of the logical error rate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossingPoint {
    #[serde(rename = "L")]
    pub size: usize,
    pub p: f64,
    pub p_l: f64,
    pub stderr: f64,
    /// Trials behind `p_l`; zero disables bootstrapping.
    pub trials: u64,
}

impl From<&SweepRecord> for CrossingPoint {
    fn from(r: &SweepRecord) -> Self {
        CrossingPoint {
            size: r.size,
            p: r.p,
            p_l: r.p_l,
            stderr: r.stderr,
            trials: r.trials,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossingOptions {
    pub p_th_guess: f64,
    pub mu_guess: f64,
    /// Only points with `|p - p_th_guess| <= window` enter the fit.
    pub window: f64,
    pub restarts: usize,
    /// Bootstrap resamples for the spread of `p_th`; zero skips it.
    pub bootstrap: usize,
    pub seed: u64,
}

impl Default for CrossingOptions {
    fn default() -> Self {
        Self {
            p_th_guess: 0.1,
            mu_guess: 1.5,
            window: 0.015,
            restarts: 5,
            bootstrap: 200,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossingFit {
    pub p_th: f64,
    pub mu: f64,
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    /// Weighted sum of squared residuals of `p_L`.
    pub residual: f64,
    /// Bootstrap standard deviation of `p_th`.
    pub p_th_stderr: Option<f64>,
    pub points_used: usize,
}

impl CrossingFit {
    pub fn predict(&self, size: usize, p: f64) -> f64 {
        let x = (p - self.p_th) * (size as f64).powf(1.0 / self.mu);
        self.a0 + self.a1 * x + self.a2 * x * x
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum CrossingVerdict {
    Threshold(CrossingFit),
    /// `p_L` grows with `L` at every swept rate.
    NoThreshold,
}

/// True when, at every rate with two or more sizes, `p_L` increases from
/// each size to the next by more than twice the combined standard error.
pub fn no_threshold(points: &[CrossingPoint]) -> bool {
    let mut ps: Vec<f64> = points.iter().map(|c| c.p).collect();
    ps.sort_by(f64::total_cmp);
    ps.dedup();
    let mut compared = false;
    for p in ps {
        let mut at: Vec<&CrossingPoint> = points.iter().filter(|c| c.p == p).collect();
        at.sort_by_key(|c| c.size);
        for w in at.windows(2) {
            compared = true;
            let gap = w[1].p_l - w[0].p_l;
            let sigma = (w[0].stderr.powi(2) + w[1].stderr.powi(2)).sqrt();
            if gap <= 2.0 * sigma {
                return false;
            }
        }
    }
    compared
}

/// Inverse-variance weights when every point has a positive standard
/// error, uniform weights otherwise.
fn point_weights(points: &[CrossingPoint]) -> Vec<f64> {
    if points.iter().all(|c| c.stderr > 0.0) {
        points.iter().map(|c| c.stderr.powi(-2)).collect()
    } else {
        vec![1.0; points.len()]
    }
}

/// Quadratic coefficients minimizing the weighted squared error for fixed `p_th`, `μ`.
fn quadratic_coefficients(points: &[CrossingPoint], p_th: f64, mu: f64) -> Option<([f64; 3], f64)> {
    let mut ata = [[0.0f64; 3]; 3];
    let mut atb = [0.0f64; 3];
    let xs: Vec<f64> = points
        .iter()
        .map(|c| (c.p - p_th) * (c.size as f64).powf(1.0 / mu))
        .collect();
    let weights = point_weights(points);
    for ((c, &x), &w) in points.iter().zip(&xs).zip(&weights) {
        let row = [1.0, x, x * x];
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += w * row[i] * row[j];
            }
            atb[i] += w * row[i] * c.p_l;
        }
    }
    let a = solve3(ata, atb)?;
    let sse = points
        .iter()
        .zip(&xs)
        .zip(&weights)
        .map(|((c, &x), &w)| w * (a[0] + a[1] * x + a[2] * x * x - c.p_l).powi(2))
        .sum();
    Some((a, sse))
}

#[allow(clippy::needless_range_loop)]
fn solve3(mut m: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[pivot][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        b.swap(col, pivot);
        for r in 0..3 {
            if r != col {
                let f = m[r][col] / m[col][col];
                for k in col..3 {
                    m[r][k] -= f * m[col][k];
                }
                b[r] -= f * b[col];
            }
        }
    }
    Some([b[0] / m[0][0], b[1] / m[1][1], b[2] / m[2][2]])
}

const MIN_MU: f64 = 0.05;

/// Best `(p_th, μ)` from one start, with the quadratic solved exactly inside.
fn profile_fit(points: &[CrossingPoint], p_th: f64, mu: f64, step: f64) -> (f64, f64, f64) {
    let f = |x: &[f64]| {
        if x[1] < MIN_MU {
            return f64::INFINITY;
        }
        quadratic_coefficients(points, x[0], x[1]).map_or(f64::INFINITY, |(_, sse)| sse)
    };
    let opts = NelderMeadOptions {
        max_iterations: 5_000,
        f_tolerance: 1e-20,
        x_tolerance: 1e-9,
    };
    let m = nelder_mead(f, &[p_th, mu], &[step, 0.2 * mu], opts);
    (m.x[0], m.x[1], m.value)
}

fn fit_window(
    points: &[CrossingPoint],
    opts: &CrossingOptions,
    rng: &mut ChaCha8Rng,
) -> Result<CrossingFit> {
    let step = (opts.window / 3.0).max(1e-4);
    let mut best = profile_fit(points, opts.p_th_guess, opts.mu_guess, step);
    for _ in 1..opts.restarts.max(1) {
        let p0 = opts.p_th_guess + rng.random_range(-1.0..1.0) * opts.window / 2.0;
        let mu0 = opts.mu_guess * rng.random_range(0.6..1.6);
        let candidate = profile_fit(points, p0, mu0, step);
        if candidate.2 < best.2 {
            best = candidate;
        }
    }
    let (p_th, mu, _) = best;
    let (a, sse) = quadratic_coefficients(points, p_th, mu)
        .ok_or_else(|| Error::FitFailure("crossing fit is singular".into()))?;

    // Polish all five parameters together.
    let weights = point_weights(points);
    let full = |x: &[f64]| {
        if x[1] < MIN_MU {
            return f64::INFINITY;
        }
        points
            .iter()
            .zip(&weights)
            .map(|(c, w)| {
                let t = (c.p - x[0]) * (c.size as f64).powf(1.0 / x[1]);
                w * (x[2] + x[3] * t + x[4] * t * t - c.p_l).powi(2)
            })
            .sum()
    };
    let start = [p_th, mu, a[0], a[1], a[2]];
    let steps: Vec<f64> = start.iter().map(|v| 0.01 * v.abs().max(1e-3)).collect();
    let polished = nelder_mead(full, &start, &steps, NelderMeadOptions::default());
    let x = if polished.value < sse {
        polished.x
    } else {
        start.to_vec()
    };
    Ok(CrossingFit {
        p_th: x[0],
        mu: x[1],
        a0: x[2],
        a1: x[3],
        a2: x[4],
        residual: polished.value.min(sse),
        p_th_stderr: None,
        points_used: points.len(),
    })
}

/// Fits `p_L ≈ a0 + a1·x + a2·x²`, `x = (p − p_th)·L^{1/μ}`, to the points
/// within the window, or reports that there is no crossing at all.
pub fn fit_crossing(points: &[CrossingPoint], opts: &CrossingOptions) -> Result<CrossingVerdict> {
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.size.cmp(&b.size).then(a.p.total_cmp(&b.p)));
    if no_threshold(&sorted) {
        return Ok(CrossingVerdict::NoThreshold);
    }
    let used: Vec<CrossingPoint> = sorted
        .into_iter()
        .filter(|c| (c.p - opts.p_th_guess).abs() <= opts.window + 1e-12)
        .collect();
    let mut sizes: Vec<usize> = used.iter().map(|c| c.size).collect();
    sizes.dedup();
    let mut ps: Vec<f64> = used.iter().map(|c| c.p).collect();
    ps.sort_by(f64::total_cmp);
    ps.dedup();
    if sizes.len() < 3 || ps.len() < 4 {
        return Err(Error::FitFailure(format!(
            "crossing fit needs 3 sizes and 4 rates in the window, found {} and {}",
            sizes.len(),
            ps.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut fit = fit_window(&used, opts, &mut rng)?;
    let (lo, hi) = (ps[0], ps[ps.len() - 1]);
    if !(lo..=hi).contains(&fit.p_th) {
        return Err(Error::FitFailure(format!(
            "fitted crossing {:.5} lies outside the swept range [{lo}, {hi}]",
            fit.p_th
        )));
    }

    if opts.bootstrap > 0 && used.iter().all(|c| c.trials > 0) {
        let mut samples = Vec::with_capacity(opts.bootstrap);
        for _ in 0..opts.bootstrap {
            let resampled: Vec<CrossingPoint> = used
                .iter()
                .map(|c| {
                    let k = Binomial::new(c.trials, c.p_l.clamp(0.0, 1.0))
                        .expect("valid binomial parameters")
                        .sample(&mut rng);
                    CrossingPoint {
                        p_l: k as f64 / c.trials as f64,
                        ..*c
                    }
                })
                .collect();
            let (p_th, _, sse) = profile_fit(&resampled, fit.p_th, fit.mu, opts.window / 3.0);
            if sse.is_finite() {
                samples.push(p_th);
            }
        }
        if samples.len() > 1 {
            let mean = samples.iter().sum::<f64>() / samples.len() as f64;
            let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>()
                / (samples.len() - 1) as f64;
            fit.p_th_stderr = Some(var.sqrt());
        }
    }
    Ok(CrossingVerdict::Threshold(fit))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SustainableFit {
    pub p_sus: f64,
    /// `None` when the data do not depend on `N`, leaving the rate unidentified.
    pub gamma: Option<f64>,
    pub p_th0: f64,
    pub residual: f64,
    pub degenerate: bool,
}

/// `p_th(N) = p_sus·(1 − e^{−γN}) + p_th0·e^{−γN}`.
pub fn sustainable_curve(p_sus: f64, gamma: f64, p_th0: f64, n: f64) -> f64 {
    let e = (-gamma * n).exp();
    p_sus * (1.0 - e) + p_th0 * e
}

/// Best `(p_sus, p_th0)` and squared error for a fixed decay rate.
fn sustainable_linear(data: &[(f64, f64)], gamma: f64) -> Option<(f64, f64, f64)> {
    let (mut uu, mut uv, mut vv, mut uy, mut vy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(n, y) in data {
        let v = (-gamma * n).exp();
        let u = 1.0 - v;
        uu += u * u;
        uv += u * v;
        vv += v * v;
        uy += u * y;
        vy += v * y;
    }
    let det = uu * vv - uv * uv;
    if det.abs() < 1e-300 {
        return None;
    }
    let p_sus = (uy * vv - vy * uv) / det;
    let p_th0 = (vy * uu - uy * uv) / det;
    let sse = data
        .iter()
        .map(|&(n, y)| (sustainable_curve(p_sus, gamma, p_th0, n) - y).powi(2))
        .sum();
    Some((p_sus, p_th0, sse))
}

const LN_GAMMA_RANGE: (f64, f64) = (-7.0, 4.0);

/// Fits the saturating threshold curve to `(N, p_th(N))` pairs.
pub fn fit_sustainable(thresholds: &[(usize, f64)]) -> Result<SustainableFit> {
    let mut data: Vec<(f64, f64)> = thresholds.iter().map(|&(n, p)| (n as f64, p)).collect();
    data.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut ns: Vec<f64> = data.iter().map(|d| d.0).collect();
    ns.dedup();
    if ns.len() < 4 {
        return Err(Error::FitFailure(format!(
            "need at least 4 distinct round counts, got {}",
            ns.len()
        )));
    }
    if data.iter().any(|d| !(0.0..=1.0).contains(&d.1)) {
        return Err(Error::FitFailure("thresholds must be probabilities".into()));
    }
    let (min, max) = data
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), d| {
            (lo.min(d.1), hi.max(d.1))
        });
    if max - min <= 1e-12 * max.abs().max(1e-12) {
        let c = data.iter().map(|d| d.1).sum::<f64>() / data.len() as f64;
        return Ok(SustainableFit {
            p_sus: c,
            gamma: None,
            p_th0: c,
            residual: data.iter().map(|d| (d.1 - c).powi(2)).sum(),
            degenerate: true,
        });
    }

    let profile = |t: f64| sustainable_linear(&data, t.exp()).map_or(f64::INFINITY, |r| r.2);
    let (lo, hi) = LN_GAMMA_RANGE;
    let steps = 440;
    let grid_best = (0..=steps)
        .map(|i| lo + (hi - lo) * i as f64 / steps as f64)
        .min_by(|a, b| profile(*a).total_cmp(&profile(*b)))
        .expect("grid is not empty");
    let opts = NelderMeadOptions {
        max_iterations: 10_000,
        f_tolerance: 0.0,
        x_tolerance: 1e-13,
    };
    let m = nelder_mead(|x: &[f64]| profile(x[0]), &[grid_best], &[0.05], opts);
    let theta = m.x[0];
    if theta <= lo + 1e-6 || theta >= hi - 1e-6 {
        return Err(Error::FitFailure(format!(
            "decay rate did not converge (γ = {:.3e})",
            theta.exp()
        )));
    }
    let gamma = theta.exp();
    let (p_sus, p_th0, residual) = sustainable_linear(&data, gamma)
        .ok_or_else(|| Error::FitFailure("sustainable fit is singular".into()))?;
    if p_sus > p_th0 {
        return Err(Error::FitFailure(format!(
            "thresholds increase with N (p_sus {p_sus:.5} > p_th(0) {p_th0:.5})"
        )));
    }
    if p_sus <= 0.0 {
        return Err(Error::FitFailure(format!(
            "fitted sustainable threshold {p_sus:.5} is not positive"
        )));
    }
    Ok(SustainableFit {
        p_sus,
        gamma: Some(gamma),
        p_th0,
        residual,
        degenerate: false,
    })
}
