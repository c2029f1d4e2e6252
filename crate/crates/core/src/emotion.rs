//! Hunger/loneliness drives and the invite policies built on them.
//!
//! Everything here is a pure function of a robot's own drives and what it
//! can sense locally. The engine calls these once per robot per tick.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{
    clamp_emotion, EmotionState, EmotionValue, HungerLevel, LonelinessLevel, SimConfig,
};

/// The invite policy used by every robot in a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeuristicKind {
    /// Invite only while grazing, satiated and lonely.
    HungerLoneliness,
    /// Never invite.
    RandomOnly,
    /// Invite whenever grazing.
    ImmediateInvite,
}

impl HeuristicKind {
    pub const ALL: [HeuristicKind; 3] = [
        HeuristicKind::HungerLoneliness,
        HeuristicKind::RandomOnly,
        HeuristicKind::ImmediateInvite,
    ];

    /// Stable index used for seed derivation and output ordering.
    pub fn index(self) -> u64 {
        match self {
            HeuristicKind::HungerLoneliness => 0,
            HeuristicKind::RandomOnly => 1,
            HeuristicKind::ImmediateInvite => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            HeuristicKind::HungerLoneliness => "hl",
            HeuristicKind::RandomOnly => "random",
            HeuristicKind::ImmediateInvite => "invite",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hl" | "hunger_loneliness" => Some(HeuristicKind::HungerLoneliness),
            "random" | "random_only" => Some(HeuristicKind::RandomOnly),
            "invite" | "immediate_invite" => Some(HeuristicKind::ImmediateInvite),
            _ => None,
        }
    }
}

impl fmt::Display for HeuristicKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// What a robot knows about its surroundings after grazing is resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LocalView {
    pub is_grazing: bool,
    /// Container load strictly increased this tick.
    pub grazed_this_tick: bool,
    /// Other grazing robots within the companionship radius.
    pub grazing_companions: u32,
}

pub fn update_hunger(h: EmotionValue, grazed_this_tick: bool, cfg: &SimConfig) -> EmotionValue {
    if grazed_this_tick {
        clamp_emotion(h.get() - cfg.hunger_decrement)
    } else {
        clamp_emotion(h.get() + cfg.hunger_increment)
    }
}

/// Loneliness only falls while grazing in company; grazing alone or not
/// grazing at all both raise it.
pub fn update_loneliness(l: EmotionValue, view: LocalView, cfg: &SimConfig) -> EmotionValue {
    if view.is_grazing && view.grazing_companions >= 1 {
        clamp_emotion(l.get() - cfg.loneliness_decrement)
    } else {
        clamp_emotion(l.get() + cfg.loneliness_increment)
    }
}

/// Threshold values belong to the low side: `h <= threshold` is satiated.
pub fn classify_emotion(h: EmotionValue, l: EmotionValue, cfg: &SimConfig) -> EmotionState {
    EmotionState {
        hunger: if h.get() <= cfg.satiation_threshold {
            HungerLevel::Satiated
        } else {
            HungerLevel::Hungry
        },
        loneliness: if l.get() <= cfg.loneliness_threshold {
            LonelinessLevel::Low
        } else {
            LonelinessLevel::High
        },
    }
}

pub fn invite_decision(kind: HeuristicKind, state: EmotionState, view: LocalView) -> bool {
    match kind {
        HeuristicKind::RandomOnly => false,
        HeuristicKind::ImmediateInvite => view.is_grazing,
        HeuristicKind::HungerLoneliness => {
            view.is_grazing && state == EmotionState::SATIATED_LONELY
        }
    }
}
