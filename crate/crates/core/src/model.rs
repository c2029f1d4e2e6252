//! Domain types shared by the engine, the policies and the harness.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::emotion::HeuristicKind;
use crate::error::{Error, Result};

pub const EMOTION_MIN: f64 = 1.0;
pub const EMOTION_MAX: f64 = 100.0;

/// A point or displacement in field coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        debug_assert!(x.is_finite() && y.is_finite(), "non-finite Vec2 ({x}, {y})");
        Vec2 { x, y }
    }

    pub fn norm(self) -> f64 {
        (self.x * self.x + self.y * self.y).sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

/// Euclidean distance between two points.
pub fn distance(a: Vec2, b: Vec2) -> f64 {
    (b - a).norm()
}

/// Clamp a raw drive value into the emotion interval [1, 100].
pub fn clamp_emotion(v: f64) -> EmotionValue {
    debug_assert!(!v.is_nan());
    EmotionValue(v.clamp(EMOTION_MIN, EMOTION_MAX))
}

/// A hunger or loneliness level, always inside [1, 100].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EmotionValue(f64);

impl EmotionValue {
    pub fn new(v: f64) -> Self {
        clamp_emotion(v)
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HungerLevel {
    Satiated,
    Hungry,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LonelinessLevel {
    Low,
    High,
}

/// One of the four emotional quadrants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EmotionState {
    pub hunger: HungerLevel,
    pub loneliness: LonelinessLevel,
}

impl EmotionState {
    pub const SATIATED_LONELY: EmotionState = EmotionState {
        hunger: HungerLevel::Satiated,
        loneliness: LonelinessLevel::High,
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RobotId(pub u32);

impl fmt::Display for RobotId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PreyId(pub u32);

impl fmt::Display for PreyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// What a robot is currently doing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BehaviorMode {
    RandomSearch,
    DirectedSearch { target: Vec2, source: RobotId },
    Grazing { prey: PreyId },
    Shutdown,
}

impl BehaviorMode {
    pub fn kind(&self) -> ModeKind {
        match self {
            BehaviorMode::RandomSearch => ModeKind::RandomSearch,
            BehaviorMode::DirectedSearch { .. } => ModeKind::DirectedSearch,
            BehaviorMode::Grazing { .. } => ModeKind::Grazing,
            BehaviorMode::Shutdown => ModeKind::Shutdown,
        }
    }

    pub fn is_grazing(&self) -> bool {
        matches!(self, BehaviorMode::Grazing { .. })
    }

    pub fn is_shutdown(&self) -> bool {
        matches!(self, BehaviorMode::Shutdown)
    }
}

/// Payload-free tag of a [`BehaviorMode`], used in traces and transition logs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeKind {
    RandomSearch,
    DirectedSearch,
    Grazing,
    Shutdown,
}

impl ModeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModeKind::RandomSearch => "random_search",
            ModeKind::DirectedSearch => "directed_search",
            ModeKind::Grazing => "grazing",
            ModeKind::Shutdown => "shutdown",
        }
    }

    /// Whether `self -> to` is an edge of the behavior state machine.
    /// Self-loops are legal for every mode.
    pub fn can_transition_to(self, to: ModeKind) -> bool {
        use ModeKind::*;
        if self == to {
            return true;
        }
        matches!(
            (self, to),
            (RandomSearch, Grazing)
                | (RandomSearch, DirectedSearch)
                | (DirectedSearch, Grazing)
                | (DirectedSearch, RandomSearch)
                | (Grazing, RandomSearch)
                | (Grazing, Shutdown)
        )
    }
}

impl fmt::Display for ModeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotState {
    pub id: RobotId,
    pub position: Vec2,
    pub hunger: EmotionValue,
    pub loneliness: EmotionValue,
    pub mode: BehaviorMode,
    pub container_load: u64,
    pub inviting: bool,
}

/// A circular prey patch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prey {
    pub id: PreyId,
    pub center: Vec2,
    pub radius: f64,
    pub content: u64,
}

impl Prey {
    pub fn is_exhausted(&self) -> bool {
        self.content == 0
    }
}

/// An invitation broadcast by a grazing robot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Signal {
    pub source: RobotId,
    pub position: Vec2,
    pub radius: f64,
}

/// Where the swarm is released at the start of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpawnCase {
    /// Case A: half the swarm at each of two opposite corners.
    TwoCorners,
    /// Case B: a quarter of the swarm at each corner.
    FourCorners,
}

impl SpawnCase {
    pub const ALL: [SpawnCase; 2] = [SpawnCase::TwoCorners, SpawnCase::FourCorners];

    pub fn index(self) -> u64 {
        match self {
            SpawnCase::TwoCorners => 0,
            SpawnCase::FourCorners => 1,
        }
    }

    /// Short label used on the command line and in exported files.
    pub fn label(self) -> &'static str {
        match self {
            SpawnCase::TwoCorners => "a",
            SpawnCase::FourCorners => "b",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "a" | "two_corners" => Some(SpawnCase::TwoCorners),
            "b" | "four_corners" => Some(SpawnCase::FourCorners),
            _ => None,
        }
    }

    pub fn corner_count(self) -> u32 {
        match self {
            SpawnCase::TwoCorners => 2,
            SpawnCase::FourCorners => 4,
        }
    }
}

/// Every tunable of a simulation run.
///
/// Unset keys in a JSON document fall back to [`SimConfig::default`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub robot_count: u32,
    pub total_ticks: u32,
    pub step_length: f64,
    pub field_edge: f64,
    pub invite_range: f64,
    pub invite_power: f64,
    pub container_capacity: u64,
    pub grazing_rate: u64,
    /// `(content, count)` pairs.
    pub prey_composition: Vec<(u64, u32)>,
    /// Intended sum of `content * count` over `prey_composition`.
    pub total_prey_content: u64,
    pub prey_radius: f64,
    pub min_prey_separation: f64,
    pub hunger_increment: f64,
    pub hunger_decrement: f64,
    pub loneliness_increment: f64,
    pub loneliness_decrement: f64,
    pub companionship_radius: f64,
    pub initial_hunger: f64,
    pub initial_loneliness: f64,
    pub satiation_threshold: f64,
    pub loneliness_threshold: f64,
    pub spawn_case: SpawnCase,
    pub heuristic: HeuristicKind,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            robot_count: 60,
            total_ticks: 1500,
            step_length: 0.5,
            field_edge: 40.0,
            invite_range: 30.0,
            invite_power: 0.05,
            container_capacity: 100,
            grazing_rate: 1,
            prey_composition: vec![(2900, 2), (50, 4)],
            total_prey_content: 6000,
            prey_radius: 1.0,
            min_prey_separation: 2.0,
            hunger_increment: 1.0,
            hunger_decrement: 1.0,
            loneliness_increment: 1.0,
            loneliness_decrement: 1.0,
            companionship_radius: 2.0,
            initial_hunger: 100.0,
            initial_loneliness: 100.0,
            satiation_threshold: 50.0,
            loneliness_threshold: 50.0,
            spawn_case: SpawnCase::TwoCorners,
            heuristic: HeuristicKind::HungerLoneliness,
        }
    }
}

fn positive(key: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::config(key, format!("must be a finite positive number, got {v}")))
    }
}

fn nonzero(key: &str, v: u64) -> Result<()> {
    if v > 0 {
        Ok(())
    } else {
        Err(Error::config(key, "must be strictly positive"))
    }
}

fn threshold(key: &str, v: f64) -> Result<()> {
    if (EMOTION_MIN..EMOTION_MAX).contains(&v) {
        Ok(())
    } else {
        Err(Error::config(key, format!("must lie in [1, 100), got {v}")))
    }
}

fn emotion(key: &str, v: f64) -> Result<()> {
    if (EMOTION_MIN..=EMOTION_MAX).contains(&v) {
        Ok(())
    } else {
        Err(Error::config(key, format!("must lie in [1, 100], got {v}")))
    }
}

impl SimConfig {
    /// Parse a (possibly partial) JSON document over the defaults.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| json_error(&e))
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("SimConfig always serializes")
    }

    /// Sum of `content * count` over the prey composition.
    pub fn composition_total(&self) -> u64 {
        self.prey_composition
            .iter()
            .map(|&(content, count)| content * u64::from(count))
            .sum()
    }

    pub fn prey_patch_count(&self) -> usize {
        self.prey_composition.iter().map(|&(_, n)| n as usize).sum()
    }

    /// Check every invariant; the error names the first offending key.
    pub fn validate(&self) -> Result<()> {
        nonzero("robot_count", self.robot_count.into())?;
        nonzero("total_ticks", self.total_ticks.into())?;
        positive("step_length", self.step_length)?;
        positive("field_edge", self.field_edge)?;
        positive("invite_range", self.invite_range)?;
        positive("invite_power", self.invite_power)?;
        nonzero("container_capacity", self.container_capacity)?;
        nonzero("grazing_rate", self.grazing_rate)?;
        positive("prey_radius", self.prey_radius)?;
        positive("min_prey_separation", self.min_prey_separation)?;
        positive("hunger_increment", self.hunger_increment)?;
        positive("hunger_decrement", self.hunger_decrement)?;
        positive("loneliness_increment", self.loneliness_increment)?;
        positive("loneliness_decrement", self.loneliness_decrement)?;
        positive("companionship_radius", self.companionship_radius)?;
        emotion("initial_hunger", self.initial_hunger)?;
        emotion("initial_loneliness", self.initial_loneliness)?;
        threshold("satiation_threshold", self.satiation_threshold)?;
        threshold("loneliness_threshold", self.loneliness_threshold)?;

        for &(content, count) in &self.prey_composition {
            if content == 0 || count == 0 {
                return Err(Error::config(
                    "prey_composition",
                    format!("entry ({content}, {count}) must have positive content and count"),
                ));
            }
        }
        let total = self.composition_total();
        if total != self.total_prey_content {
            return Err(Error::config(
                "prey_composition",
                format!(
                    "contents sum to {total} but total_prey_content is {}",
                    self.total_prey_content
                ),
            ));
        }
        if !self.prey_composition.is_empty() && 2.0 * self.prey_radius >= self.field_edge {
            return Err(Error::config(
                "prey_radius",
                "a prey patch does not fit inside the field",
            ));
        }
        let corners = self.spawn_case.corner_count();
        if !self.robot_count.is_multiple_of(corners) {
            return Err(Error::config(
                "robot_count",
                format!(
                    "{} robots cannot be split evenly over {corners} corners",
                    self.robot_count
                ),
            ));
        }
        Ok(())
    }

    /// Short checksum of the canonical JSON form.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("SimConfig always serializes");
        let hash = Sha256::digest(&bytes);
        hash[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Turn a serde error into a config error, extracting the key name where serde reports one.
pub(crate) fn json_error(e: &serde_json::Error) -> Error {
    let msg = e.to_string();
    let key = msg
        .strip_prefix("unknown field `")
        .and_then(|rest| rest.split('`').next())
        .unwrap_or("config")
        .to_owned();
    Error::config(key, msg)
}
