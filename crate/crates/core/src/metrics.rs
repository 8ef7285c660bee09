//! Success rate, success weighted by path length, and success weighted by
//! action efficiency over episode records.

use serde::{Deserialize, Serialize};

use crate::error::{HozError, Result};
use crate::model::Action;
use crate::sim::EpisodeRecord;

/// Episodes whose oracle path is at least this long form the long-path subset.
pub const LONG_PATH_MIN: u32 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Subset {
    All,
    #[serde(rename = "L>=5")]
    LongPath,
}

impl Subset {
    pub fn label(self) -> &'static str {
        match self {
            Subset::All => "ALL",
            Subset::LongPath => "L>=5",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub sr: f64,
    pub spl: f64,
    pub sae: f64,
    pub n_episodes: usize,
    pub subset: Subset,
}

/// Mean and sample variance of one metric across trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spread {
    pub mean: f64,
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub sr: Spread,
    pub spl: Spread,
    pub sae: Spread,
    pub trials: usize,
    pub n_episodes: usize,
    pub subset: Subset,
}

fn non_empty(records: &[EpisodeRecord]) -> Result<()> {
    if records.is_empty() {
        Err(HozError::Empty("episode records"))
    } else {
        Ok(())
    }
}

fn mean_of(records: &[EpisodeRecord], term: impl Fn(&EpisodeRecord) -> Result<f64>) -> Result<f64> {
    non_empty(records)?;
    let mut total = 0.0;
    for r in records {
        total += term(r)?;
    }
    Ok(total / records.len() as f64)
}

pub fn compute_sr(records: &[EpisodeRecord]) -> Result<f64> {
    mean_of(records, |r| Ok(f64::from(u8::from(r.success))))
}

pub fn compute_spl(records: &[EpisodeRecord]) -> Result<f64> {
    mean_of(records, |r| {
        let optimal = r.optimal_length.ok_or_else(|| {
            HozError::InvalidInput(format!("episode in {} has no oracle path length", r.env_id))
        })?;
        if !r.success {
            return Ok(0.0);
        }
        let denom = r.actual_length.max(optimal);
        Ok(if denom == 0 {
            1.0
        } else {
            f64::from(optimal) / f64::from(denom)
        })
    })
}

pub fn compute_sae(records: &[EpisodeRecord]) -> Result<f64> {
    mean_of(records, |r| {
        if !r.success {
            return Ok(0.0);
        }
        if r.actions.is_empty() {
            return Err(HozError::InvalidInput(format!(
                "successful episode in {} has no actions",
                r.env_id
            )));
        }
        let moves = r.actions.iter().filter(|&&a| a == Action::MoveAhead).count();
        Ok(moves as f64 / r.actions.len() as f64)
    })
}

/// Records whose oracle path length is at least `min_optimal`; records
/// without an oracle length are dropped.
pub fn filter_subset(records: &[EpisodeRecord], min_optimal: u32) -> Vec<EpisodeRecord> {
    records
        .iter()
        .filter(|r| r.optimal_length.is_some_and(|l| l >= min_optimal))
        .cloned()
        .collect()
}

pub fn report(records: &[EpisodeRecord], subset: Subset) -> Result<MetricsReport> {
    let selected;
    let records = match subset {
        Subset::All => records,
        Subset::LongPath => {
            selected = filter_subset(records, LONG_PATH_MIN);
            if selected.is_empty() {
                return Err(HozError::Empty("long-path subset"));
            }
            &selected
        }
    };
    Ok(MetricsReport {
        sr: compute_sr(records)?,
        spl: compute_spl(records)?,
        sae: compute_sae(records)?,
        n_episodes: records.len(),
        subset,
    })
}

/// Mean and unbiased sample variance, computed in two passes.
pub fn mean_variance(values: &[f64]) -> Result<Spread> {
    if values.len() < 2 {
        return Err(HozError::TooFewSamples {
            needed: 2,
            got: values.len(),
        });
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let variance = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(Spread { mean, variance })
}

pub fn aggregate_trials(reports: &[MetricsReport]) -> Result<AggregateReport> {
    if reports.len() < 2 {
        return Err(HozError::TooFewSamples {
            needed: 2,
            got: reports.len(),
        });
    }
    let subset = reports[0].subset;
    if reports.iter().any(|r| r.subset != subset) {
        return Err(HozError::InvalidInput("trials cover different subsets".into()));
    }
    let pick = |f: fn(&MetricsReport) -> f64| {
        mean_variance(&reports.iter().map(f).collect::<Vec<_>>())
    };
    Ok(AggregateReport {
        sr: pick(|r| r.sr)?,
        spl: pick(|r| r.spl)?,
        sae: pick(|r| r.sae)?,
        trials: reports.len(),
        n_episodes: reports.iter().map(|r| r.n_episodes).sum(),
        subset,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Pitch, Pose, Yaw};
    use Action::*;

    fn record(success: bool, actions: Vec<Action>, actual: u32, optimal: Option<u32>) -> EpisodeRecord {
        let pose = Pose::new(0, 0, Yaw::North, Pitch::Level);
        EpisodeRecord {
            env_id: "fixture".into(),
            mode: String::new(),
            trial: 0,
            target: 0,
            seed: 0,
            poses: vec![pose; actions.len() + 1],
            actions,
            success,
            actual_length: actual,
            optimal_length: optimal,
            planner_trace: Vec::new(),
        }
    }

    #[test]
    fn sr_examples() {
        let ok = record(true, vec![Done], 0, Some(0));
        let bad = record(false, vec![MoveAhead], 1, Some(3));
        let mixed = vec![ok.clone(), ok.clone(), ok.clone(), bad.clone()];
        assert_eq!(compute_sr(&mixed).unwrap(), 0.75);
        assert_eq!(compute_sr(&[bad.clone(), bad]).unwrap(), 0.0);
        assert_eq!(compute_sr(&[ok]).unwrap(), 1.0);
        assert!(matches!(compute_sr(&[]), Err(HozError::Empty(_))));
    }

    #[test]
    fn spl_examples() {
        let r = record(true, vec![MoveAhead; 8], 8, Some(4));
        assert_eq!(compute_spl(&[r]).unwrap(), 0.5);
        let exact = record(true, vec![MoveAhead, Done], 1, Some(1));
        assert_eq!(compute_spl(&[exact]).unwrap(), 1.0);
        let short = record(true, vec![MoveAhead, Done], 1, Some(3));
        assert_eq!(compute_spl(&[short]).unwrap(), 1.0);
        assert!(compute_spl(&[record(true, vec![Done], 0, None)]).is_err());
    }

    #[test]
    fn sae_examples() {
        let r = record(true, vec![MoveAhead, RotateLeft, MoveAhead, Done], 2, Some(2));
        assert_eq!(compute_sae(&[r]).unwrap(), 0.5);
        let mut actions = vec![MoveAhead; 4];
        actions.push(Done);
        assert_eq!(compute_sae(&[record(true, actions, 4, Some(4))]).unwrap(), 0.8);
        assert_eq!(compute_sae(&[record(false, vec![MoveAhead; 3], 3, Some(2))]).unwrap(), 0.0);
        assert!(compute_sae(&[record(true, vec![], 0, Some(0))]).is_err());
        assert_eq!(compute_sae(&[record(true, vec![Done], 0, Some(0))]).unwrap(), 0.0);
    }

    #[test]
    fn subset_filter() {
        let recs = vec![
            record(true, vec![Done], 0, Some(5)),
            record(true, vec![Done], 0, Some(4)),
        ];
        let kept = filter_subset(&recs, 5);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].optimal_length, Some(5));
        assert_eq!(filter_subset(&kept, 5), kept);
        assert!(matches!(
            report(&recs[1..], Subset::LongPath),
            Err(HozError::Empty(_))
        ));
    }

    #[test]
    fn aggregation() {
        let rep = |sr| MetricsReport {
            sr,
            spl: sr / 2.0,
            sae: sr / 4.0,
            n_episodes: 10,
            subset: Subset::All,
        };
        let agg = aggregate_trials(&[rep(0.4), rep(0.6)]).unwrap();
        assert!((agg.sr.mean - 0.5).abs() < 1e-15);
        assert!((agg.sr.variance - 0.02).abs() < 1e-15);
        let same = aggregate_trials(&[rep(0.3), rep(0.3), rep(0.3)]).unwrap();
        assert_eq!(same.sr.variance, 0.0);
        assert!(aggregate_trials(&[rep(0.3)]).is_err());
    }
}
