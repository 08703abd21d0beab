//! Fusion of the three sub-metrics into MOTCOM.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub ocom: f64,
    pub mcom: f64,
    pub vcom: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Self {
            ocom: 1.0,
            mcom: 1.0,
            vcom: 1.0,
        }
    }
}

impl Weights {
    pub fn new(ocom: f64, mcom: f64, vcom: f64) -> Result<Self> {
        let w = Self { ocom, mcom, vcom };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.ocom, self.mcom, self.vcom];
        if all.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidInput(format!("weights must be non-negative: {all:?}")));
        }
        if all.iter().sum::<f64>() <= 0.0 {
            return Err(Error::InvalidInput("weights are all zero".into()));
        }
        Ok(())
    }

    fn is_uniform(&self) -> bool {
        self.ocom == self.mcom && self.mcom == self.vcom
    }
}

impl std::str::FromStr for Weights {
    type Err = Error;

    /// Parses `o,m,v`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::InvalidInput(format!("weights {s:?}: expected three numbers")))?;
        match parts.as_slice() {
            [o, m, v] => Weights::new(*o, *m, *v),
            _ => Err(Error::InvalidInput(format!("weights {s:?}: expected three numbers"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeanKind {
    #[default]
    Arithmetic,
    Quadratic,
    Geometric,
    Harmonic,
}

impl std::str::FromStr for MeanKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "arithmetic" => Ok(Self::Arithmetic),
            "quadratic" => Ok(Self::Quadratic),
            "geometric" => Ok(Self::Geometric),
            "harmonic" => Ok(Self::Harmonic),
            _ => Err(Error::InvalidInput(format!("unknown mean kind {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubScores {
    pub ocom: f64,
    pub mcom: f64,
    /// Absent when the visual metric was not computed.
    pub vcom: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotcomScore {
    pub motcom: f64,
    pub mean_kind: MeanKind,
    pub weights: Weights,
    pub sub_scores: SubScores,
    /// Set when a sub-score was missing and the mean covers the rest.
    pub partial: bool,
}

/// Combines the sub-metrics. Only the arithmetic mean uses the weights; the
/// other means are unweighted.
pub fn combine(scores: SubScores, weights: Weights, kind: MeanKind) -> Result<MotcomScore> {
    weights.validate()?;
    let mut pairs = vec![(scores.ocom, weights.ocom), (scores.mcom, weights.mcom)];
    if let Some(v) = scores.vcom {
        pairs.push((v, weights.vcom));
    }
    if let Some((m, _)) = pairs.iter().find(|(m, _)| !(0.0..=1.0).contains(m)) {
        return Err(Error::InvalidInput(format!("sub-score {m} outside [0, 1]")));
    }
    if kind != MeanKind::Arithmetic && !weights.is_uniform() {
        log::warn!("{kind:?} mean ignores the sub-metric weights");
    }

    let values: Vec<f64> = pairs.iter().map(|(m, _)| *m).collect();
    let n = values.len() as f64;
    let motcom = match kind {
        MeanKind::Arithmetic => {
            let total: f64 = pairs.iter().map(|(_, w)| w).sum();
            if total <= 0.0 {
                return Err(Error::InvalidInput(
                    "weights of the available sub-metrics are all zero".into(),
                ));
            }
            pairs.iter().map(|(m, w)| m * w).sum::<f64>() / total
        }
        MeanKind::Quadratic => (values.iter().map(|m| m * m).sum::<f64>() / n).sqrt(),
        MeanKind::Geometric => values.iter().product::<f64>().powf(1.0 / n),
        MeanKind::Harmonic => {
            if values.contains(&0.0) {
                0.0
            } else {
                n / values.iter().map(|m| 1.0 / m).sum::<f64>()
            }
        }
    };
    Ok(MotcomScore {
        motcom,
        mean_kind: kind,
        weights,
        sub_scores: scores,
        partial: scores.vcom.is_none(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn full(o: f64, m: f64, v: f64) -> SubScores {
        SubScores {
            ocom: o,
            mcom: m,
            vcom: Some(v),
        }
    }

    const KINDS: [MeanKind; 4] = [
        MeanKind::Arithmetic,
        MeanKind::Quadratic,
        MeanKind::Geometric,
        MeanKind::Harmonic,
    ];

    #[test]
    fn equal_weight_arithmetic() {
        let s = combine(full(0.3, 0.6, 0.9), Weights::default(), MeanKind::Arithmetic).unwrap();
        assert!((s.motcom - 0.6).abs() < 1e-15);
        assert!(!s.partial);
    }

    #[test]
    fn equal_inputs_fixed_point() {
        for kind in KINDS {
            let s = combine(full(0.42, 0.42, 0.42), Weights::default(), kind).unwrap();
            assert!((s.motcom - 0.42).abs() < 1e-15, "{kind:?}");
        }
    }

    #[test]
    fn zero_collapses_geometric_and_harmonic() {
        for kind in [MeanKind::Geometric, MeanKind::Harmonic] {
            assert_eq!(combine(full(0.0, 0.5, 0.9), Weights::default(), kind).unwrap().motcom, 0.0);
        }
    }

    #[test]
    fn weighted_and_partial() {
        let w = Weights::new(2.0, 1.0, 1.0).unwrap();
        let s = combine(full(1.0, 0.0, 0.0), w, MeanKind::Arithmetic).unwrap();
        assert_eq!(s.motcom, 0.5);
        let partial = SubScores {
            ocom: 0.2,
            mcom: 0.6,
            vcom: None,
        };
        let s = combine(partial, Weights::new(1.0, 3.0, 5.0).unwrap(), MeanKind::Arithmetic).unwrap();
        assert!((s.motcom - 0.5).abs() < 1e-15);
        assert!(s.partial);
        assert!(combine(partial, Weights::new(0.0, 0.0, 1.0).unwrap(), MeanKind::Arithmetic).is_err());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(combine(full(1.2, 0.5, 0.5), Weights::default(), MeanKind::Arithmetic).is_err());
        assert!(combine(full(0.2, -0.1, 0.5), Weights::default(), MeanKind::Harmonic).is_err());
        assert!(Weights::new(0.0, 0.0, 0.0).is_err());
        assert!(Weights::new(-1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn parses_flags() {
        assert_eq!("1,2,3".parse::<Weights>().unwrap(), Weights::new(1.0, 2.0, 3.0).unwrap());
        assert!("1,2".parse::<Weights>().is_err());
        assert_eq!("Harmonic".parse::<MeanKind>().unwrap(), MeanKind::Harmonic);
        assert!("median".parse::<MeanKind>().is_err());
    }
}
