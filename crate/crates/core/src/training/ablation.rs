//! The 2x3 ablation: forecaster ids on or off, crossed with which kinds of
//! forecasters feed the aggregator.

use serde::{Deserialize, Serialize};

use super::cv::{cross_validate, Aggregator, CvOptions};
use crate::domain::{ForecasterKind, Tournament};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeatureToggle {
    WithoutId,
    WithId,
}

impl FeatureToggle {
    pub fn label(self) -> &'static str {
        match self {
            FeatureToggle::WithoutId => "None",
            FeatureToggle::WithId => "Forecaster id",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SourceToggle {
    Human,
    Machine,
    Both,
}

impl SourceToggle {
    pub fn label(self) -> &'static str {
        match self {
            SourceToggle::Human => "Human",
            SourceToggle::Machine => "Machine",
            SourceToggle::Both => "Human + Machine",
        }
    }

    fn admits(self, kind: Option<ForecasterKind>) -> bool {
        matches!(
            (self, kind),
            (SourceToggle::Both, _)
                | (SourceToggle::Human, Some(ForecasterKind::Human))
                | (SourceToggle::Machine, Some(ForecasterKind::Machine))
        )
    }
}

/// One row of the ablation table; `brier` is `None` when the cell has too
/// little data to cross-validate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationCell {
    pub feature: String,
    pub forecaster_type: String,
    pub brier: Option<f64>,
}

/// Cross-validated attention MMDB for one cell. Questions left without
/// forecasts by the source filter are dropped, so the machine-only cell
/// covers just the questions machines forecast on.
pub fn ablation_run(
    tournament: &Tournament,
    feature: FeatureToggle,
    source: SourceToggle,
    opts: &CvOptions,
) -> Result<Option<f64>> {
    let data = tournament.filter_forecasts(|_, who| source.admits(who.map(|w| w.kind)));
    if data.questions().len() < opts.k.max(2) {
        return Ok(None);
    }
    let mut opts = opts.clone();
    opts.aggregators = vec![Aggregator::Attention];
    opts.train.use_forecaster_ids = feature == FeatureToggle::WithId;
    let cv = cross_validate(&data, &opts)?;
    Ok(cv.run(Aggregator::Attention).map(|r| r.report.mmdb))
}

/// All six cells in table order: ids off then on, each over human, machine
/// and both.
pub fn ablation_table(tournament: &Tournament, opts: &CvOptions) -> Result<Vec<AblationCell>> {
    let mut rows = Vec::with_capacity(6);
    for feature in [FeatureToggle::WithoutId, FeatureToggle::WithId] {
        for source in [SourceToggle::Human, SourceToggle::Machine, SourceToggle::Both] {
            rows.push(AblationCell {
                feature: feature.label().into(),
                forecaster_type: source.label().into(),
                brier: ablation_run(tournament, feature, source, opts)?,
            });
        }
    }
    Ok(rows)
}
