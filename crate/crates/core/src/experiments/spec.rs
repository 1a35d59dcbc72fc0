use serde::{Deserialize, Serialize};

use crate::elliptic::{SolverConfig, DEFAULT_DELTA};
use crate::ensembles::EnsembleSpec;
use crate::lattice::TorusGrid;
use crate::parabolic::{check_dyadic, MIN_STEPS_PER_DYAD};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ExperimentName {
    #[serde(rename = "E1-clt-decay")]
    CltDecay,
    #[serde(rename = "E2-systematic-error")]
    SystematicError,
    #[serde(rename = "E3-semigroup-decay")]
    SemigroupDecay,
    #[serde(rename = "E4-corrector-growth")]
    CorrectorGrowth,
    #[serde(rename = "E5-commutator-gaussianity")]
    CommutatorGaussianity,
    #[serde(rename = "E6-two-scale")]
    TwoScale,
    #[serde(rename = "E7-propagator-error")]
    PropagatorError,
    #[serde(rename = "E8-minimal-radius")]
    MinimalRadius,
}

impl ExperimentName {
    pub const ALL: [ExperimentName; 8] = [
        Self::CltDecay,
        Self::SystematicError,
        Self::SemigroupDecay,
        Self::CorrectorGrowth,
        Self::CommutatorGaussianity,
        Self::TwoScale,
        Self::PropagatorError,
        Self::MinimalRadius,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::CltDecay => "E1-clt-decay",
            Self::SystematicError => "E2-systematic-error",
            Self::SemigroupDecay => "E3-semigroup-decay",
            Self::CorrectorGrowth => "E4-corrector-growth",
            Self::CommutatorGaussianity => "E5-commutator-gaussianity",
            Self::TwoScale => "E6-two-scale",
            Self::PropagatorError => "E7-propagator-error",
            Self::MinimalRadius => "E8-minimal-radius",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|n| n.as_str() == s || n.as_str().split('-').next() == Some(s))
            .ok_or_else(|| Error::Config(format!("unknown experiment '{s}'")))
    }

    fn default_samples(&self) -> usize {
        match self {
            Self::CltDecay | Self::SystematicError | Self::MinimalRadius => 200,
            Self::SemigroupDecay | Self::CorrectorGrowth | Self::PropagatorError => 100,
            Self::CommutatorGaussianity => 400,
            Self::TwoScale => 50,
        }
    }
}

impl std::fmt::Display for ExperimentName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Parameter ladders; which fields are read depends on the experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Ladder {
    /// Cutoff times `T` (E2, E3, E4) or start times `t` (E7).
    #[serde(default)]
    pub t: Vec<f64>,
    /// Mollification or test-function scales.
    #[serde(default)]
    pub r: Vec<f64>,
    /// Grid sides for the `eps = 1 / L` ladder (E6).
    #[serde(default)]
    pub sides: Vec<usize>,
    /// Richardson levels (E2).
    #[serde(default)]
    pub kappa: Vec<usize>,
    /// Single cutoff: `T` for E1, E7, E8; `t` for E5. May be infinite,
    /// which is written as the string `"inf"`.
    #[serde(default, with = "extended_float")]
    pub cutoff: Option<f64>,
}

mod extended_float {
    use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Number(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(x) if x.is_infinite() && *x > 0.0 => s.serialize_some(&Repr::Text("inf".into())),
            Some(x) => s.serialize_some(&Repr::Number(*x)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        match Option::<Repr>::deserialize(d)? {
            None => Ok(None),
            Some(Repr::Number(x)) => Ok(Some(x)),
            Some(Repr::Text(t)) => match t.trim().to_ascii_lowercase().as_str() {
                "inf" | "infinity" => Ok(Some(f64::INFINITY)),
                other => Err(de::Error::custom(format!("expected a number or \"inf\", got {other:?}"))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: ExperimentName,
    pub master_seed: u64,
    pub samples: usize,
    pub dim: usize,
    pub side: usize,
    pub ensemble: EnsembleSpec,
    pub ladder: Ladder,
    pub solver: SolverConfig,
    pub steps_per_dyad: usize,
    /// Threshold for the minimal radius (E8).
    pub delta: f64,
    /// Pilot realizations for the constant coefficient of E7.
    pub pilot_samples: usize,
    /// E2 only: feed the synthetic model `c0 + c1 / T` through the ladder.
    pub dry_run: bool,
}

pub const MIN_SAMPLES: usize = 30;

fn dyadic_range(lo: f64, hi: f64) -> Vec<f64> {
    std::iter::successors(Some(lo), |t| Some(t * 2.0))
        .take_while(|&t| t <= hi)
        .collect()
}

impl ExperimentSpec {
    /// The configuration of the acceptance criteria on an `L^d` grid, with
    /// ladders scaled to the side length.
    pub fn preset(name: ExperimentName, dim: usize, side: usize) -> Self {
        let mut s = Self {
            name,
            master_seed: 1,
            samples: name.default_samples(),
            dim,
            side,
            ensemble: EnsembleSpec::default(),
            ladder: Ladder::default(),
            solver: SolverConfig::default(),
            steps_per_dyad: if name == ExperimentName::CommutatorGaussianity { 4 } else { 8 },
            delta: DEFAULT_DELTA,
            pilot_samples: 8,
            dry_run: false,
        };
        s.fill_defaults();
        s
    }

    /// Fills empty ladders with the defaults for the experiment and side.
    pub fn fill_defaults(&mut self) {
        let l = self.side as f64;
        let big_t = (l / 8.0).powi(2);
        let lad = &mut self.ladder;
        match self.name {
            ExperimentName::CltDecay => {
                lad.cutoff.get_or_insert(big_t);
                if lad.r.is_empty() {
                    lad.r = dyadic_range(1.0, l / 8.0);
                }
            }
            ExperimentName::SystematicError => {
                if lad.t.is_empty() {
                    lad.t = dyadic_range(8.0, (2.0 * (l / 16.0).powi(2)).max(64.0));
                }
                if lad.kappa.is_empty() {
                    lad.kappa = vec![1, 2];
                }
            }
            ExperimentName::SemigroupDecay | ExperimentName::CorrectorGrowth => {
                if lad.t.is_empty() {
                    lad.t = dyadic_range(4.0, big_t);
                }
            }
            ExperimentName::CommutatorGaussianity => {
                lad.cutoff.get_or_insert((l / 16.0).powi(2));
                if lad.r.is_empty() {
                    lad.r = vec![l / 32.0, l / 16.0, l / 8.0];
                }
            }
            ExperimentName::TwoScale => {
                if lad.sides.is_empty() {
                    lad.sides = vec![32, 64, 128, 256];
                }
            }
            ExperimentName::PropagatorError => {
                let t = *lad.cutoff.get_or_insert(big_t);
                if lad.t.is_empty() {
                    lad.t = dyadic_range(t / 16.0, t / 2.0);
                }
                if lad.r.is_empty() {
                    lad.r = vec![t.sqrt()];
                }
            }
            ExperimentName::MinimalRadius => {
                lad.cutoff.get_or_insert((l / 4.0).powi(2));
            }
        }
    }

    pub fn grid(&self) -> Result<TorusGrid> {
        TorusGrid::new(self.dim, self.side)
    }

    pub fn cutoff(&self) -> Result<f64> {
        self.ladder
            .cutoff
            .ok_or_else(|| Error::Config(format!("{} needs ladder.cutoff", self.name)))
    }

    pub fn hash(&self) -> String {
        crate::hash_json(self)
    }

    pub fn validate(&self) -> Result<()> {
        let grid = self.grid()?;
        self.ensemble.validate(&grid)?;
        self.solver.validate()?;
        if self.samples < MIN_SAMPLES {
            return Err(Error::Config(format!(
                "samples must be >= {MIN_SAMPLES}, got {}",
                self.samples
            )));
        }
        if self.steps_per_dyad < MIN_STEPS_PER_DYAD {
            return Err(Error::Config(format!(
                "steps_per_dyad must be >= {MIN_STEPS_PER_DYAD}"
            )));
        }
        let lad = &self.ladder;
        let dyadic = |ts: &[f64], what: &str| -> Result<()> {
            for &t in ts {
                check_dyadic(t).map_err(|_| {
                    Error::Config(format!("{what} must be dyadic, got {t}"))
                })?;
            }
            Ok(())
        };
        let need = |ok: bool, msg: &str| -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(Error::Config(format!("{}: {msg}", self.name)))
            }
        };
        match self.name {
            ExperimentName::CltDecay => {
                need(lad.r.len() >= 4, "needs at least 4 scales")?;
                self.cutoff()?;
            }
            ExperimentName::SystematicError => {
                need(lad.t.len() >= 4, "needs at least 4 cutoffs")?;
                dyadic(&lad.t, "ladder.t")?;
                need(
                    !lad.kappa.is_empty() && lad.kappa.iter().all(|&k| (1..=3).contains(&k)),
                    "kappa must lie in 1..=3",
                )?;
            }
            ExperimentName::SemigroupDecay => {
                need(lad.t.len() >= 4, "needs at least 4 times")?;
                dyadic(&lad.t, "ladder.t")?;
            }
            ExperimentName::CorrectorGrowth => {
                need(self.dim == 2, "is defined for d = 2")?;
                need(lad.t.len() >= 4, "needs at least 4 cutoffs")?;
                dyadic(&lad.t, "ladder.t")?;
            }
            ExperimentName::CommutatorGaussianity => {
                dyadic(&[self.cutoff()?], "ladder.cutoff")?;
                need(!lad.r.is_empty(), "needs a scale")?;
                let rmax = lad.r.iter().cloned().fold(0.0, f64::max);
                need(
                    4.0 * rmax + 2.0 < self.side as f64,
                    "test functions do not fit twice on the torus",
                )?;
                need(self.samples >= 200, "needs at least 200 samples")?;
            }
            ExperimentName::TwoScale => {
                need(lad.sides.len() >= 4, "needs at least 4 grid sides")?;
                for &s in &lad.sides {
                    let g = TorusGrid::new(self.dim, s)?;
                    self.ensemble.validate(&g)?;
                }
            }
            ExperimentName::PropagatorError => {
                let t = self.cutoff()?;
                dyadic(&[t], "ladder.cutoff")?;
                dyadic(&lad.t, "ladder.t")?;
                need(lad.t.len() >= 2, "needs at least 2 start times")?;
                need(lad.t.iter().all(|&s| s < t), "start times must precede the cutoff")?;
                need(lad.r.len() == 1, "needs exactly one scale")?;
                need(self.pilot_samples >= 1, "needs pilot samples")?;
            }
            ExperimentName::MinimalRadius => {
                self.cutoff()?;
                need(self.delta > 0.0, "delta must be positive")?;
            }
        }
        Ok(())
    }
}
