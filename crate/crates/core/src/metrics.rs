//! Income, invite cost and efficiency, per run and across runs.

use std::fmt;

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::world::RunRecord;

/// Efficiency of a run: prey removed per unit of invite energy.
///
/// Runs that never invite have no cost, so their efficiency is undefined.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Efficiency {
    Defined(f64),
    Undefined,
}

impl Efficiency {
    pub fn value(self) -> Option<f64> {
        match self {
            Efficiency::Defined(v) => Some(v),
            Efficiency::Undefined => None,
        }
    }

    pub fn is_defined(self) -> bool {
        matches!(self, Efficiency::Defined(_))
    }
}

impl fmt::Display for Efficiency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Efficiency::Defined(v) => write!(f, "{v}"),
            Efficiency::Undefined => f.write_str("undefined"),
        }
    }
}

impl Serialize for Efficiency {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Efficiency::Defined(v) => s.serialize_f64(*v),
            Efficiency::Undefined => s.serialize_str("undefined"),
        }
    }
}

/// Energy spent broadcasting: `power * invite_ticks`.
pub fn invite_cost(invite_power: f64, invite_ticks: u64) -> f64 {
    invite_power * invite_ticks as f64
}

/// `content_removed / (P * invite_ticks)`, undefined when nobody invited.
pub fn compute_nu(content_removed: f64, invite_power: f64, invite_ticks: u64) -> Result<Efficiency> {
    if !(content_removed.is_finite() && content_removed >= 0.0) {
        return Err(Error::Contract(format!(
            "content removed must be a nonnegative number, got {content_removed}"
        )));
    }
    if !(invite_power.is_finite() && invite_power > 0.0) {
        return Err(Error::Contract(format!(
            "invite power must be positive, got {invite_power}"
        )));
    }
    if invite_ticks == 0 {
        return Ok(Efficiency::Undefined);
    }
    Ok(Efficiency::Defined(
        content_removed / invite_cost(invite_power, invite_ticks),
    ))
}

pub fn percent_removed(content_removed: u64, initial_total: u64) -> Result<f64> {
    if initial_total == 0 {
        return Err(Error::Contract("initial prey total must be positive".into()));
    }
    if content_removed > initial_total {
        return Err(Error::Contract(format!(
            "removed {content_removed} exceeds initial total {initial_total}"
        )));
    }
    Ok(100.0 * content_removed as f64 / initial_total as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateStats {
    pub runs: usize,
    pub percent_mean: f64,
    pub percent_median: f64,
    pub percent_min: f64,
    pub percent_max: f64,
    /// `None` when no run had a defined efficiency.
    pub nu_mean: Option<f64>,
    pub nu_median: Option<f64>,
    pub runs_at_least_half_removed: usize,
    pub nu_undefined_runs: usize,
}

/// Values are sorted before summing so the result does not depend on input order.
fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

fn mean_of_sorted(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn median_of_sorted(v: &[f64]) -> f64 {
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

pub fn aggregate_runs(records: &[RunRecord]) -> Result<AggregateStats> {
    let first = records
        .first()
        .ok_or_else(|| Error::Contract("cannot aggregate an empty run list".into()))?;
    if let Some(r) = records.iter().find(|r| r.config_digest != first.config_digest) {
        return Err(Error::Contract(format!(
            "mixed configurations in one aggregate ({} vs {})",
            first.config_digest, r.config_digest
        )));
    }

    let pct = sorted(records.iter().map(|r| r.percent_removed).collect());
    let nus = sorted(records.iter().filter_map(|r| r.nu.value()).collect());
    let (nu_mean, nu_median) = if nus.is_empty() {
        (None, None)
    } else {
        (Some(mean_of_sorted(&nus)), Some(median_of_sorted(&nus)))
    };

    Ok(AggregateStats {
        runs: records.len(),
        percent_mean: mean_of_sorted(&pct),
        percent_median: median_of_sorted(&pct),
        percent_min: pct[0],
        percent_max: pct[pct.len() - 1],
        nu_mean,
        nu_median,
        runs_at_least_half_removed: pct.iter().filter(|&&p| p >= 50.0).count(),
        nu_undefined_runs: records.len() - nus.len(),
    })
}
