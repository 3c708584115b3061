use std::fmt;
use std::str::FromStr;

use maad_core::{to_displacements, Window};
use serde::{Deserialize, Serialize};

use crate::{ModelError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Architecture {
    Cvm,
    Lti,
    Seq2Seq,
    Stgae,
    LanegcnAe,
}

impl Architecture {
    pub const ALL: [Architecture; 5] =
        [Architecture::Cvm, Architecture::Lti, Architecture::Seq2Seq, Architecture::Stgae, Architecture::LanegcnAe];

    pub fn name(self) -> &'static str {
        match self {
            Architecture::Cvm => "cvm",
            Architecture::Lti => "lti",
            Architecture::Seq2Seq => "seq2seq",
            Architecture::Stgae => "stgae",
            Architecture::LanegcnAe => "lanegcn_ae",
        }
    }

    pub fn is_linear(self) -> bool {
        matches!(self, Architecture::Cvm | Architecture::Lti)
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Architecture {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self> {
        Architecture::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| ModelError::Unknown { kind: "architecture", name: s.to_string() })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    Recon,
    Dsvdd,
}

impl Objective {
    pub fn name(self) -> &'static str {
        match self {
            Objective::Recon => "recon",
            Objective::Dsvdd => "dsvdd",
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Objective {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "recon" => Ok(Objective::Recon),
            "dsvdd" => Ok(Objective::Dsvdd),
            _ => Err(ModelError::Unknown { kind: "objective", name: s.to_string() }),
        }
    }
}

/// Layer widths. The latent code is the encoder's final hidden state, so
/// `latent` always equals `hidden`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub embed: usize,
    pub hidden: usize,
    pub latent: usize,
}

impl Default for Dims {
    fn default() -> Self {
        Dims { embed: 8, hidden: 16, latent: 16 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelDescriptor {
    pub architecture: Architecture,
    pub objective: Objective,
    pub dims: Dims,
    pub dsvdd_center: Option<Vec<f64>>,
}

impl ModelDescriptor {
    pub fn new(architecture: Architecture, objective: Objective) -> Result<Self> {
        if architecture.is_linear() && objective != Objective::Recon {
            return Err(ModelError::InvalidPairing { architecture: architecture.name(), objective: objective.name() });
        }
        Ok(ModelDescriptor { architecture, objective, dims: Dims::default(), dsvdd_center: None })
    }
}

/// Scales that bring network inputs and targets to roughly unit size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    /// RMS of target coordinates, in metres.
    pub position_scale: f64,
    /// RMS of per-step target displacement components, in metres.
    pub displacement_scale: f64,
}

impl Default for Normalization {
    fn default() -> Self {
        Normalization { position_scale: 1.0, displacement_scale: 1.0 }
    }
}

impl Normalization {
    /// Scales measured over the target agent of `windows`. Degenerate data
    /// (all zeros) keeps unit scales.
    pub fn fit<'a>(windows: impl IntoIterator<Item = &'a Window>) -> Self {
        let (mut pos, mut np, mut disp, mut nd) = (0.0, 0usize, 0.0, 0usize);
        for w in windows {
            let target = w.target();
            for s in target.states.iter().filter(|s| s.valid) {
                pos += s.x * s.x + s.y * s.y;
                np += 2;
            }
            for (t, d) in to_displacements(&target.states).iter().enumerate() {
                if target.states[t].valid && target.states[t + 1].valid {
                    disp += d[0] * d[0] + d[1] * d[1];
                    nd += 2;
                }
            }
        }
        let rms = |sum: f64, n: usize| {
            let r = (sum / n.max(1) as f64).sqrt();
            if r > 1e-9 && r.is_finite() {
                r
            } else {
                1.0
            }
        };
        Normalization { position_scale: rms(pos, np), displacement_scale: rms(disp, nd) }
    }
}
