//! Monte Carlo sweeps over `(p, L, N)` and threshold fits.

mod fit;
mod nelder_mead;

pub use fit::{
    fit_crossing, fit_sustainable, no_threshold, sustainable_curve, CrossingFit, CrossingOptions,
    CrossingPoint, CrossingVerdict, SustainableFit,
};
pub use nelder_mead::{nelder_mead, Minimum, NelderMeadOptions};

use std::collections::hash_map::Entry;
use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codes::{build_code, Family};
use crate::error::{Error, Result};
use crate::noise::NoiseModel;
use crate::protocol::{CheckScheme, Sides, TrialRunner};

/// Smallest trial count accepted per sweep point.
pub const MIN_TRIALS: u64 = 100;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub p: f64,
    #[serde(rename = "L")]
    pub size: usize,
    #[serde(rename = "N")]
    pub rounds: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepSpec {
    pub family: Family,
    pub scheme: CheckScheme,
    /// Template; its rate is replaced by each point's `p`.
    pub noise: NoiseModel,
    pub points: Vec<SweepPoint>,
    pub trials: u64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub model: String,
    pub scheme: CheckScheme,
    pub family: Family,
    #[serde(rename = "L")]
    pub size: usize,
    #[serde(rename = "N")]
    pub rounds: usize,
    pub p: f64,
    pub trials: u64,
    pub failures: u64,
    pub p_l: f64,
    pub stderr: f64,
    /// Seed of the point; trial `i` uses `trial_seed(seed, i)`.
    pub seed: u64,
}

impl SweepRecord {
    fn new(spec: &SweepSpec, point: SweepPoint, seed: u64, trials: u64, failures: u64) -> Self {
        let mut r = SweepRecord {
            model: spec.noise.name().to_string(),
            scheme: spec.scheme,
            family: spec.family,
            size: point.size,
            rounds: point.rounds,
            p: point.p,
            trials,
            failures,
            p_l: 0.0,
            stderr: 0.0,
            seed,
        };
        r.refresh();
        r
    }

    fn refresh(&mut self) {
        let (p_l, stderr) = binomial_estimate(self.failures, self.trials);
        self.p_l = p_l;
        self.stderr = stderr;
    }

    /// Adds the counts of another batch of the same point.
    pub fn merge(&mut self, other: &SweepRecord) -> Result<()> {
        let same = self.model == other.model
            && self.scheme == other.scheme
            && self.family == other.family
            && self.size == other.size
            && self.rounds == other.rounds
            && self.p == other.p
            && self.seed == other.seed;
        if !same {
            return Err(Error::InvalidParameter(
                "records describe different sweep points".into(),
            ));
        }
        self.trials += other.trials;
        self.failures += other.failures;
        self.refresh();
        Ok(())
    }
}

/// `p_L = k/n` and its binomial standard error.
pub fn binomial_estimate(failures: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 0.0);
    }
    let p = failures as f64 / trials as f64;
    (p, (p * (1.0 - p) / trials as f64).sqrt())
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Seed of a sweep point, from the master seed and the point's coordinates
/// only, so that it does not depend on grid order.
pub fn point_seed(master: u64, family: Family, scheme: CheckScheme, point: SweepPoint) -> u64 {
    let mut h = splitmix64(master);
    for word in [
        family as u64,
        scheme as u64,
        point.size as u64,
        point.rounds as u64,
        point.p.to_bits(),
    ] {
        h = splitmix64(h ^ word);
    }
    h
}

pub fn trial_seed(point_seed: u64, trial: u64) -> u64 {
    splitmix64(point_seed ^ splitmix64(trial))
}

/// Failures among trials `start..start + count` of one point.
pub fn run_trials(
    runner: &TrialRunner,
    noise: &NoiseModel,
    rounds: usize,
    seed: u64,
    start: u64,
    count: u64,
) -> Result<u64> {
    (start..start + count)
        .into_par_iter()
        .map(|i| {
            runner
                .run(noise, rounds, trial_seed(seed, i), false)
                .map(|o| u64::from(o.logical_failure.any()))
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))
}

fn check_spec(spec: &SweepSpec) -> Result<()> {
    if spec.trials < MIN_TRIALS {
        return Err(Error::InvalidParameter(format!(
            "at least {MIN_TRIALS} trials per point are needed, got {}",
            spec.trials
        )));
    }
    for point in &spec.points {
        spec.noise.with_rate(point.p).validate()?;
        if spec.scheme == CheckScheme::LocalRepeated && point.rounds != point.size {
            return Err(Error::InvalidParameter(format!(
                "repeated local checks use N = L, got N = {} at L = {}",
                point.rounds, point.size
            )));
        }
    }
    Ok(())
}

/// Runs every point of the sweep, calling `on_record` as each finishes.
/// Runs on the current rayon pool.
pub fn run_sweep_with(
    spec: &SweepSpec,
    mut on_record: impl FnMut(&SweepRecord) -> Result<()>,
) -> Result<Vec<SweepRecord>> {
    check_spec(spec)?;
    let sides = Sides::for_model(&spec.noise);
    let mut runners: HashMap<usize, TrialRunner> = HashMap::new();
    let mut records = Vec::with_capacity(spec.points.len());
    for &point in &spec.points {
        let runner = match runners.entry(point.size) {
            Entry::Occupied(e) => e.into_mut(),
            Entry::Vacant(e) => {
                let code = build_code(spec.family, point.size)?;
                e.insert(TrialRunner::new(&code, spec.scheme, sides)?)
            }
        };
        let noise = spec.noise.with_rate(point.p);
        let seed = point_seed(spec.seed, spec.family, spec.scheme, point);
        let failures = run_trials(runner, &noise, point.rounds, seed, 0, spec.trials)?;
        let record = SweepRecord::new(spec, point, seed, spec.trials, failures);
        on_record(&record)?;
        records.push(record);
    }
    Ok(records)
}

pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRecord>> {
    run_sweep_with(spec, |_| Ok(()))
}

/// Points of the full grid `ps × sizes × rounds`.
pub fn grid(ps: &[f64], sizes: &[usize], rounds: &[usize]) -> Vec<SweepPoint> {
    let mut points = Vec::with_capacity(ps.len() * sizes.len() * rounds.len());
    for &n in rounds {
        for &size in sizes {
            for &p in ps {
                points.push(SweepPoint { p, size, rounds: n });
            }
        }
    }
    points
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::PhenomenologicalParams;

    fn spec(points: Vec<SweepPoint>, trials: u64) -> SweepSpec {
        SweepSpec {
            family: Family::Toric,
            scheme: CheckScheme::SingleShotAnalytic,
            noise: NoiseModel::Phenomenological(PhenomenologicalParams::coupled(0.0)),
            points,
            trials,
            seed: 17,
        }
    }

    #[test]
    fn zero_rate_never_fails() {
        let recs = run_sweep(&spec(grid(&[0.0], &[3, 5], &[0, 2]), 200)).unwrap();
        assert_eq!(recs.len(), 4);
        assert!(recs.iter().all(|r| r.failures == 0 && r.p_l == 0.0));
    }

    #[test]
    fn too_few_trials_are_rejected() {
        assert!(run_sweep(&spec(grid(&[0.1], &[3], &[0]), 99)).is_err());
    }

    #[test]
    fn halves_merge_into_the_whole() {
        let point = SweepPoint {
            p: 0.08,
            size: 5,
            rounds: 1,
        };
        let s = spec(vec![point], 400);
        let code = build_code(Family::Toric, 5).unwrap();
        let runner = TrialRunner::new(&code, s.scheme, Sides::ZOnly).unwrap();
        let noise = s.noise.with_rate(point.p);
        let seed = point_seed(s.seed, s.family, s.scheme, point);
        let a = run_trials(&runner, &noise, 1, seed, 0, 150).unwrap();
        let b = run_trials(&runner, &noise, 1, seed, 150, 250).unwrap();
        let mut left = SweepRecord::new(&s, point, seed, 150, a);
        left.merge(&SweepRecord::new(&s, point, seed, 250, b))
            .unwrap();
        let whole = run_sweep(&s).unwrap().remove(0);
        assert_eq!(left, whole);
        assert!(whole.failures > 0);
    }

    #[test]
    fn seeds_ignore_grid_order() {
        let pts = grid(&[0.05, 0.09], &[3, 5], &[1]);
        let mut reversed = pts.clone();
        reversed.reverse();
        let mut a = run_sweep(&spec(pts, 150)).unwrap();
        let mut b = run_sweep(&spec(reversed, 150)).unwrap();
        b.reverse();
        assert_eq!(a, b);
        a[0].seed ^= 1;
        assert!(a[0].merge(&b[0]).is_err());
    }

    #[test]
    fn stderr_scales_as_inverse_root_of_trials() {
        let (p1, s1) = binomial_estimate(300, 1000);
        let (p2, s2) = binomial_estimate(600, 2000);
        assert_eq!(p1, p2);
        assert!((s1 / s2 - 2f64.sqrt()).abs() < 1e-12);
    }
}
