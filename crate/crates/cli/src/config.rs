use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use ssqec::codes::Family;
use ssqec::noise::{NoiseModel, PhenomenologicalParams, ZxParams};
use ssqec::protocol::CheckScheme;
use ssqec::stats::{CrossingOptions, SweepPoint, SweepSpec};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Phenomenological,
    Zx,
}

/// Crossing-fit settings; every field falls back to a default.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub p_th_guess: Option<f64>,
    pub mu_guess: Option<f64>,
    pub window: Option<f64>,
    pub bootstrap: Option<usize>,
    pub restarts: Option<usize>,
}

impl FitConfig {
    pub fn overlay(&mut self, other: &FitConfig) {
        macro_rules! take {
            ($($f:ident),*) => { $(if other.$f.is_some() { self.$f = other.$f; })* };
        }
        take!(p_th_guess, mu_guess, window, bootstrap, restarts);
    }

    /// Options for one fit; without a guess the middle of the swept rates
    /// is used.
    pub fn options(&self, ps: &[f64], seed: u64) -> CrossingOptions {
        let d = CrossingOptions::default();
        let mid = if ps.is_empty() {
            d.p_th_guess
        } else {
            let lo = ps.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = ps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (lo + hi) / 2.0
        };
        CrossingOptions {
            p_th_guess: self.p_th_guess.unwrap_or(mid),
            mu_guess: self.mu_guess.unwrap_or(d.mu_guess),
            window: self.window.unwrap_or(d.window),
            restarts: self.restarts.unwrap_or(d.restarts),
            bootstrap: self.bootstrap.unwrap_or(d.bootstrap),
            seed,
        }
    }
}

/// A sweep as read from a JSON file and overridden by flags.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub family: Option<Family>,
    #[serde(rename = "L")]
    pub sizes: Option<Vec<usize>>,
    pub scheme: Option<CheckScheme>,
    pub model: Option<Model>,
    pub p: Option<Vec<f64>>,
    #[serde(rename = "N")]
    pub rounds: Option<Vec<usize>>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub output: Option<PathBuf>,
    pub summary: Option<PathBuf>,
    /// ZX model only: count ancilla depolarizing as an extra outcome flip.
    pub ancilla_flip: Option<bool>,
    #[serde(default)]
    pub fit: FitConfig,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))
    }

    /// Fields set in `flags` win.
    pub fn overlay(&mut self, flags: ExperimentConfig) {
        macro_rules! take {
            ($($f:ident),*) => { $(if flags.$f.is_some() { self.$f = flags.$f; })* };
        }
        take!(
            family,
            sizes,
            scheme,
            model,
            p,
            rounds,
            trials,
            seed,
            workers,
            output,
            summary,
            ancilla_flip
        );
        self.fit.overlay(&flags.fit);
    }

    pub fn noise_template(&self) -> NoiseModel {
        match self.model.unwrap_or(Model::Phenomenological) {
            Model::Phenomenological => {
                NoiseModel::Phenomenological(PhenomenologicalParams::coupled(0.0))
            }
            Model::Zx => NoiseModel::Zx(ZxParams {
                p_g: 0.0,
                ancilla_depolarizing_as_flip: self.ancilla_flip.unwrap_or(true),
            }),
        }
    }

    /// Checks everything a sweep needs before any trial runs.
    pub fn sweep_spec(&self) -> Result<SweepSpec, CliError> {
        let missing = |what: &str| CliError::Config(format!("missing {what}"));
        let family = self.family.ok_or_else(|| missing("family"))?;
        let scheme = self.scheme.ok_or_else(|| missing("scheme"))?;
        let sizes = self
            .sizes
            .clone()
            .ok_or_else(|| missing("lattice sizes (L)"))?;
        let ps = self.p.clone().ok_or_else(|| missing("error rates (p)"))?;
        let trials = self.trials.ok_or_else(|| missing("trials"))?;
        if sizes.is_empty() || ps.is_empty() {
            return Err(CliError::Config("L and p lists must not be empty".into()));
        }
        for &l in &sizes {
            if l < 2 {
                return Err(CliError::Config(format!("lattice size {l} is below 2")));
            }
        }
        if scheme == CheckScheme::SingleShotAnalytic && family != Family::Toric {
            return Err(CliError::Config(format!(
                "analytic single-shot checks exist for the toric code only, not {family}"
            )));
        }
        let noise = self.noise_template();
        for &p in &ps {
            noise
                .with_rate(p)
                .validate()
                .map_err(|e| CliError::Config(e.to_string()))?;
        }
        let mut points = Vec::new();
        if scheme == CheckScheme::LocalRepeated {
            // Repeated local checks always take L noisy rounds.
            if self.rounds.is_some() {
                return Err(CliError::Config(
                    "N is fixed to L for the local-repeated scheme; drop the N list".into(),
                ));
            }
            for &size in &sizes {
                for &p in &ps {
                    points.push(SweepPoint {
                        p,
                        size,
                        rounds: size,
                    });
                }
            }
        } else {
            let rounds = self.rounds.clone().unwrap_or_else(|| vec![1]);
            if rounds.is_empty() {
                return Err(CliError::Config("N list must not be empty".into()));
            }
            points = ssqec::stats::grid(&ps, &sizes, &rounds);
        }
        let spec = SweepSpec {
            family,
            scheme,
            noise,
            points,
            trials,
            seed: self.seed.unwrap_or(0),
        };
        if trials < ssqec::stats::MIN_TRIALS {
            return Err(CliError::Config(format!(
                "at least {} trials per point are needed, got {trials}",
                ssqec::stats::MIN_TRIALS
            )));
        }
        if let Some(0) = self.workers {
            return Err(CliError::Config("workers must be positive".into()));
        }
        Ok(spec)
    }
}

/// Parses `a,b,c` or an inclusive range `start:stop:step`.
pub fn parse_f64_list(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let v: Vec<f64> = parts
            .iter()
            .map(|x| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}")))
            .collect::<Result<_, _>>()?;
        let (start, stop, step) = (v[0], v[1], v[2]);
        if step <= 0.0 || stop < start {
            return Err(format!("bad range {s:?}"));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize;
        // Round to kill accumulated binary noise in the printed rates.
        return Ok((0..=count)
            .map(|i| ((start + step * i as f64) * 1e12).round() / 1e12)
            .collect());
    }
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}")))
        .collect()
}

/// Parses `a,b,c` or an inclusive range `start:stop:step`.
pub fn parse_usize_list(s: &str) -> Result<Vec<usize>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let v: Vec<usize> = parts
            .iter()
            .map(|x| x.trim().parse::<usize>().map_err(|e| format!("{x:?}: {e}")))
            .collect::<Result<_, _>>()?;
        if v[2] == 0 || v[1] < v[0] {
            return Err(format!("bad range {s:?}"));
        }
        return Ok((v[0]..=v[1]).step_by(v[2]).collect());
    }
    s.split(',')
        .map(|x| x.trim().parse::<usize>().map_err(|e| format!("{x:?}: {e}")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_and_ranges_parse() {
        assert_eq!(parse_f64_list("0.1,0.2").unwrap(), vec![0.1, 0.2]);
        assert_eq!(
            parse_f64_list("0.01:0.03:0.01").unwrap(),
            vec![0.01, 0.02, 0.03]
        );
        assert_eq!(parse_usize_list("3:9:2").unwrap(), vec![3, 5, 7, 9]);
        assert!(parse_usize_list("3,x").is_err());
        assert!(parse_f64_list("0.1:0.0:0.1").is_err());
    }

    #[test]
    fn flags_override_file_values() {
        let mut file: ExperimentConfig = serde_json::from_str(
            r#"{"family":"toric","L":[3,5],"scheme":"local","p":[0.1],"trials":200,"fit":{"window":0.02}}"#,
        )
        .unwrap();
        file.overlay(ExperimentConfig {
            sizes: Some(vec![7]),
            fit: FitConfig {
                bootstrap: Some(0),
                ..FitConfig::default()
            },
            ..ExperimentConfig::default()
        });
        assert_eq!(file.sizes, Some(vec![7]));
        assert_eq!(file.family, Some(Family::Toric));
        assert_eq!(file.fit.window, Some(0.02));
        assert_eq!(file.fit.bootstrap, Some(0));
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let base = ExperimentConfig {
            family: Some(Family::Planar),
            sizes: Some(vec![3]),
            scheme: Some(CheckScheme::SingleShotAnalytic),
            p: Some(vec![0.1]),
            trials: Some(100),
            ..ExperimentConfig::default()
        };
        assert!(base.sweep_spec().is_err());
        let mut ok = base.clone();
        ok.scheme = Some(CheckScheme::SingleShotEliminated);
        assert_eq!(ok.sweep_spec().unwrap().points.len(), 1);
        let mut bad_p = ok.clone();
        bad_p.p = Some(vec![1.5]);
        assert!(bad_p.sweep_spec().is_err());
        let mut few = ok.clone();
        few.trials = Some(10);
        assert!(few.sweep_spec().is_err());
        let mut repeated = ok;
        repeated.scheme = Some(CheckScheme::LocalRepeated);
        repeated.rounds = Some(vec![2]);
        assert!(repeated.sweep_spec().is_err());
    }
}
