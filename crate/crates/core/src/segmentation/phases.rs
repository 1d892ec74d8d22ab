//! Phase hypotheses and the pluggable detectors that produce them.
//!
//! A detector labels every sample of one foot with a phase id. Detectors that
//! track several competing labelings (e.g. particle filters) return one
//! weighted hypothesis per labeling; the baseline mixture detector returns a
//! single hypothesis of weight 1.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::gmm::{detect_phases_baseline, GmmOptions};
use crate::data::{Foot, Trial};
use crate::error::{Error, Result};

pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseHypothesis {
    pub weight: f64,
    pub labels: Vec<usize>,
    pub num_phases: usize,
}

impl PhaseHypothesis {
    pub fn new(weight: f64, labels: Vec<usize>) -> Self {
        let num_phases = labels.iter().collect::<BTreeSet<_>>().len();
        PhaseHypothesis {
            weight,
            labels,
            num_phases,
        }
    }

    /// Sorted distinct phase ids.
    pub fn phase_ids(&self) -> Vec<usize> {
        self.labels
            .iter()
            .copied()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseHypothesisSet {
    pub foot: Foot,
    pub hypotheses: Vec<PhaseHypothesis>,
    /// Set when the detector fell back to a single phase on degenerate data.
    #[serde(default)]
    pub degenerate: bool,
}

impl PhaseHypothesisSet {
    /// Build a set, checking weights, phase counts and label lengths.
    pub fn new(foot: Foot, hypotheses: Vec<PhaseHypothesis>, n_samples: usize) -> Result<Self> {
        if hypotheses.is_empty() {
            return Err(Error::domain("phase hypothesis set is empty"));
        }
        for (i, h) in hypotheses.iter().enumerate() {
            if !(0.0..=1.0).contains(&h.weight) {
                return Err(Error::domain(format!(
                    "hypothesis {i} has weight {} outside [0, 1]",
                    h.weight
                )));
            }
            if h.labels.len() != n_samples {
                return Err(Error::domain(format!(
                    "hypothesis {i} labels {} samples, trial has {n_samples}",
                    h.labels.len()
                )));
            }
            let distinct = h.labels.iter().collect::<BTreeSet<_>>().len();
            if distinct != h.num_phases {
                return Err(Error::domain(format!(
                    "hypothesis {i} claims {} phases but labels use {distinct}",
                    h.num_phases
                )));
            }
        }
        check_weight_sum(&hypotheses)?;
        Ok(PhaseHypothesisSet {
            foot,
            hypotheses,
            degenerate: false,
        })
    }
}

fn check_weight_sum(hypotheses: &[PhaseHypothesis]) -> Result<()> {
    let total: f64 = hypotheses.iter().map(|h| h.weight).sum();
    if (total - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
        return Err(Error::domain(format!(
            "hypothesis weights sum to {total}, expected 1"
        )));
    }
    Ok(())
}

/// Expected number of gait phases, the weighted mean of phase counts.
pub fn expected_num_phases(phs: &PhaseHypothesisSet) -> Result<f64> {
    check_weight_sum(&phs.hypotheses)?;
    Ok(phs
        .hypotheses
        .iter()
        .map(|h| h.weight * h.num_phases as f64)
        .sum())
}

#[derive(Debug, Serialize, Deserialize)]
struct SidecarLine {
    weight: f64,
    labels: Vec<usize>,
}

/// Read hypotheses from a JSONL sidecar, one `{"weight", "labels"}` object per line.
pub fn read_sidecar<R: BufRead>(reader: R, foot: Foot, n_samples: usize) -> Result<PhaseHypothesisSet> {
    let mut hypotheses = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row: SidecarLine = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: i as u64 + 1,
            message: e.to_string(),
        })?;
        hypotheses.push(PhaseHypothesis::new(row.weight, row.labels));
    }
    PhaseHypothesisSet::new(foot, hypotheses, n_samples)
}

pub fn write_sidecar<W: Write>(phs: &PhaseHypothesisSet, mut out: W) -> Result<()> {
    for h in &phs.hypotheses {
        let line = SidecarLine {
            weight: h.weight,
            labels: h.labels.clone(),
        };
        serde_json::to_writer(&mut out, &line)?;
        writeln!(out)?;
    }
    Ok(())
}

/// Per-call inputs a detector may need besides the trial itself.
#[derive(Debug, Clone, Default)]
pub struct DetectContext {
    pub seed: u64,
    /// Path the trial was read from, used to locate sidecar files.
    pub source: Option<PathBuf>,
}

pub trait PhaseDetector: Send + Sync {
    fn name(&self) -> &str;

    fn detect(&self, trial: &Trial, foot: Foot, ctx: &DetectContext) -> Result<PhaseHypothesisSet>;
}

/// Gaussian-mixture baseline with BIC model selection.
#[derive(Debug, Clone, Default)]
pub struct GmmBicDetector {
    pub options: GmmOptions,
}

impl PhaseDetector for GmmBicDetector {
    fn name(&self) -> &str {
        "gmm-bic"
    }

    fn detect(&self, trial: &Trial, foot: Foot, ctx: &DetectContext) -> Result<PhaseHypothesisSet> {
        let options = GmmOptions {
            seed: self.options.seed ^ ctx.seed,
            ..self.options.clone()
        };
        detect_phases_baseline(trial, foot, &options)
    }
}

/// Reads hypotheses produced by an external detector from
/// `<trial stem>.<foot>.phases.jsonl` next to the trial file.
#[derive(Debug, Clone, Default)]
pub struct SidecarDetector;

impl SidecarDetector {
    pub fn sidecar_path(source: &Path, foot: Foot) -> PathBuf {
        let stem = source
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        source.with_file_name(format!("{stem}.{foot}.phases.jsonl"))
    }
}

impl PhaseDetector for SidecarDetector {
    fn name(&self) -> &str {
        "sidecar"
    }

    fn detect(&self, trial: &Trial, foot: Foot, ctx: &DetectContext) -> Result<PhaseHypothesisSet> {
        let source = ctx.source.as_deref().ok_or_else(|| {
            Error::domain(format!(
                "trial `{}` has no source path to locate its sidecar",
                trial.trial_id
            ))
        })?;
        let path = Self::sidecar_path(source, foot);
        let file = std::fs::File::open(&path).map_err(|e| {
            Error::domain(format!("cannot open sidecar {}: {e}", path.display()))
        })?;
        read_sidecar(std::io::BufReader::new(file), foot, trial.len())
    }
}

pub type DetectorFactory = fn(&GmmOptions) -> Arc<dyn PhaseDetector>;

/// Phase detectors selectable by name.
pub struct DetectorRegistry {
    factories: BTreeMap<String, DetectorFactory>,
}

impl DetectorRegistry {
    pub fn empty() -> Self {
        DetectorRegistry {
            factories: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, name: &str, factory: DetectorFactory) {
        self.factories.insert(name.to_string(), factory);
    }

    pub fn names(&self) -> Vec<&str> {
        self.factories.keys().map(String::as_str).collect()
    }

    pub fn build(&self, name: &str, options: &GmmOptions) -> Result<Arc<dyn PhaseDetector>> {
        self.factories
            .get(name)
            .map(|f| f(options))
            .ok_or_else(|| Error::UnknownName {
                kind: "phase detector",
                name: name.to_string(),
            })
    }
}

impl Default for DetectorRegistry {
    fn default() -> Self {
        let mut reg = DetectorRegistry::empty();
        reg.register("gmm-bic", |opts| {
            Arc::new(GmmBicDetector {
                options: opts.clone(),
            })
        });
        reg.register("sidecar", |_| Arc::new(SidecarDetector));
        reg
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(weights: &[f64], ks: &[usize]) -> PhaseHypothesisSet {
        let hyps = weights
            .iter()
            .zip(ks)
            .map(|(&w, &k)| PhaseHypothesis::new(w, (0..k).collect()))
            .collect();
        PhaseHypothesisSet {
            foot: Foot::Left,
            hypotheses: hyps,
            degenerate: false,
        }
    }

    #[test]
    fn expected_phases_examples() {
        assert_eq!(expected_num_phases(&set(&[1.0], &[8])).unwrap(), 8.0);
        assert_eq!(expected_num_phases(&set(&[0.5, 0.5], &[8, 6])).unwrap(), 7.0);
        let k = expected_num_phases(&set(&[0.2, 0.3, 0.5], &[5, 8, 9])).unwrap();
        assert!((k - 7.9).abs() < 1e-12);
    }

    #[test]
    fn expected_phases_rejects_bad_weights() {
        assert!(expected_num_phases(&set(&[0.5, 0.4], &[8, 6])).is_err());
    }

    #[test]
    fn constructor_checks_invariants() {
        let ok = PhaseHypothesisSet::new(Foot::Left, vec![PhaseHypothesis::new(1.0, vec![0, 1, 1])], 3);
        assert!(ok.is_ok());
        let wrong_len = PhaseHypothesisSet::new(Foot::Left, vec![PhaseHypothesis::new(1.0, vec![0])], 3);
        assert!(wrong_len.is_err());
        let mut bad_k = PhaseHypothesis::new(1.0, vec![0, 1, 2]);
        bad_k.num_phases = 2;
        assert!(PhaseHypothesisSet::new(Foot::Left, vec![bad_k], 3).is_err());
        assert!(PhaseHypothesisSet::new(Foot::Left, vec![], 3).is_err());
    }

    #[test]
    fn sidecar_round_trip() {
        let phs = PhaseHypothesisSet::new(
            Foot::Right,
            vec![
                PhaseHypothesis::new(0.25, vec![0, 0, 3, 3]),
                PhaseHypothesis::new(0.75, vec![1, 2, 2, 1]),
            ],
            4,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_sidecar(&phs, &mut buf).unwrap();
        let back = read_sidecar(buf.as_slice(), Foot::Right, 4).unwrap();
        assert_eq!(back, phs);
        assert_eq!(expected_num_phases(&back).unwrap(), 2.0);
    }

    #[test]
    fn registry_lookup() {
        let reg = DetectorRegistry::default();
        assert_eq!(reg.names(), vec!["gmm-bic", "sidecar"]);
        assert_eq!(reg.build("sidecar", &GmmOptions::default()).unwrap().name(), "sidecar");
        assert!(matches!(
            reg.build("crp-particle", &GmmOptions::default()),
            Err(Error::UnknownName { .. })
        ));
    }

    #[test]
    fn sidecar_path_naming() {
        let p = SidecarDetector::sidecar_path(Path::new("/data/s1__t3.csv"), Foot::Left);
        assert_eq!(p, PathBuf::from("/data/s1__t3.left.phases.jsonl"));
    }
}
