use serde::Serialize;

use super::fam::{Consequent, LabelStrengths};
use super::FuzzyError;

pub const DEFAULT_RESOLUTION: usize = 1001;

/// Anchor interval of each consequent on the output universe [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsequentScale {
    pub anchors: [(f64, f64); 4],
}

impl Default for ConsequentScale {
    fn default() -> Self {
        Self {
            anchors: [(0.0, 0.25), (0.25, 0.5), (0.5, 0.75), (0.75, 1.0)],
        }
    }
}

impl ConsequentScale {
    pub fn new(anchors: [(f64, f64); 4]) -> Result<Self, FuzzyError> {
        let contiguous = anchors[0].0 == 0.0
            && anchors[3].1 == 1.0
            && anchors.iter().all(|(lo, hi)| lo < hi)
            && anchors.windows(2).all(|w| w[0].1 == w[1].0);
        if !contiguous {
            return Err(FuzzyError::Config(
                "consequent anchors must partition [0, 1] in severity order".into(),
            ));
        }
        Ok(Self { anchors })
    }

    pub fn anchor(&self, c: Consequent) -> (f64, f64) {
        self.anchors[c.index()]
    }

    pub fn midpoint(&self, c: Consequent) -> f64 {
        let (lo, hi) = self.anchor(c);
        (lo + hi) / 2.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Defuzzified {
    pub score: f64,
    pub no_rule_fired: bool,
}

/// Mean of maxima over `resolution` evenly spaced samples of [0, 1].
///
/// Each label contributes its strength over its closed anchor interval; a
/// sample's membership is the max across labels. The result is the mean of
/// the samples whose membership equals the global maximum.
pub fn defuzzify_mom(strengths: &LabelStrengths, scale: &ConsequentScale, resolution: usize) -> Defuzzified {
    if strengths.is_zero() || resolution < 2 {
        return Defuzzified {
            score: 0.0,
            no_rule_fired: true,
        };
    }
    let peak = strengths.0.iter().copied().fold(0.0, f64::max);
    let peak_labels: Vec<(f64, f64)> = strengths
        .nonzero()
        .filter(|(_, s)| *s == peak)
        .map(|(c, _)| scale.anchor(c))
        .collect();
    let step = (resolution - 1) as f64;
    let mut sum = 0.0;
    let mut count = 0usize;
    for i in 0..resolution {
        let u = i as f64 / step;
        if peak_labels.iter().any(|&(lo, hi)| lo <= u && u <= hi) {
            sum += u;
            count += 1;
        }
    }
    if count == 0 {
        // anchors narrower than the sample spacing: fall back to midpoints
        let mids: Vec<f64> = peak_labels.iter().map(|(lo, hi)| (lo + hi) / 2.0).collect();
        return Defuzzified {
            score: mids.iter().sum::<f64>() / mids.len() as f64,
            no_rule_fired: false,
        };
    }
    Defuzzified {
        score: sum / count as f64,
        no_rule_fired: false,
    }
}

/// The label whose half-open anchor `[lo, hi)` contains the score; the top
/// label also owns 1.0.
pub fn classify(score: f64, scale: &ConsequentScale) -> Consequent {
    let score = score.clamp(0.0, 1.0);
    Consequent::ALL
        .into_iter()
        .find(|&c| {
            let (lo, hi) = scale.anchor(c);
            lo <= score && score < hi
        })
        .unwrap_or(Consequent::Intrusive)
}
