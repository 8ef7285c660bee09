//! Shared domain types: poses, actions, bag-of-objects features and detections.

use std::fmt;
use std::sync::Arc;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{HozError, Result};

/// Default number of object categories.
pub const DEFAULT_CATEGORY_COUNT: usize = 22;

/// Width of the per-category appearance feature rows.
pub const APPEARANCE_DIM: usize = 512;

/// Names of the default category set, indexed by category id.
pub const CATEGORY_NAMES: [&str; DEFAULT_CATEGORY_COUNT] = [
    "AlarmClock",
    "Book",
    "Bowl",
    "Chair",
    "CoffeeMachine",
    "DeskLamp",
    "FloorLamp",
    "Fridge",
    "GarbageCan",
    "Kettle",
    "Laptop",
    "LightSwitch",
    "Microwave",
    "Pan",
    "Plate",
    "Pot",
    "RemoteControl",
    "Sink",
    "StoveBurner",
    "Television",
    "Toaster",
    "Toilet",
];

pub fn category_index(name: &str) -> Option<usize> {
    CATEGORY_NAMES.iter().position(|n| *n == name)
}

pub fn category_name(index: usize) -> &'static str {
    CATEGORY_NAMES.get(index).copied().unwrap_or("?")
}

/// Furniture and appliances that stay detectable at long range; every other
/// built-in category is a small object seen only up close.
pub const LARGE_CATEGORIES: [&str; 10] = [
    "Chair",
    "CoffeeMachine",
    "FloorLamp",
    "Fridge",
    "GarbageCan",
    "Microwave",
    "Sink",
    "StoveBurner",
    "Television",
    "Toilet",
];

/// Whether a category is a small object. Categories beyond the built-in
/// list are treated as large.
pub fn is_small_category(index: usize) -> bool {
    CATEGORY_NAMES
        .get(index)
        .is_some_and(|name| !LARGE_CATEGORIES.contains(name))
}

/// Heading in the ground plane. Yaw 0 faces +z, yaw 90 faces +x.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u16", into = "u16")]
pub enum Yaw {
    North,
    East,
    South,
    West,
}

impl Yaw {
    pub const ALL: [Yaw; 4] = [Yaw::North, Yaw::East, Yaw::South, Yaw::West];

    pub fn degrees(self) -> u16 {
        self.index() as u16 * 90
    }

    pub fn index(self) -> usize {
        match self {
            Yaw::North => 0,
            Yaw::East => 1,
            Yaw::South => 2,
            Yaw::West => 3,
        }
    }

    pub fn from_index(i: usize) -> Yaw {
        Yaw::ALL[i % 4]
    }

    pub fn right(self) -> Yaw {
        Yaw::from_index(self.index() + 1)
    }

    pub fn left(self) -> Yaw {
        Yaw::from_index(self.index() + 3)
    }

    /// Unit step `(dx, dz)` for moving ahead.
    pub fn delta(self) -> (i32, i32) {
        match self {
            Yaw::North => (0, 1),
            Yaw::East => (1, 0),
            Yaw::South => (0, -1),
            Yaw::West => (-1, 0),
        }
    }
}

impl TryFrom<u16> for Yaw {
    type Error = String;

    fn try_from(deg: u16) -> std::result::Result<Self, Self::Error> {
        match deg {
            0 => Ok(Yaw::North),
            90 => Ok(Yaw::East),
            180 => Ok(Yaw::South),
            270 => Ok(Yaw::West),
            other => Err(format!("yaw must be one of 0/90/180/270, got {other}")),
        }
    }
}

impl From<Yaw> for u16 {
    fn from(y: Yaw) -> u16 {
        y.degrees()
    }
}

/// Camera tilt in 30 degree steps. Positive is up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "i16", into = "i16")]
pub enum Pitch {
    Down,
    Level,
    Up,
}

impl Pitch {
    pub const ALL: [Pitch; 3] = [Pitch::Down, Pitch::Level, Pitch::Up];

    pub fn degrees(self) -> i16 {
        match self {
            Pitch::Down => -30,
            Pitch::Level => 0,
            Pitch::Up => 30,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Pitch::Down => 0,
            Pitch::Level => 1,
            Pitch::Up => 2,
        }
    }

    /// Tilt up one step, clamped.
    pub fn up(self) -> Pitch {
        match self {
            Pitch::Down => Pitch::Level,
            _ => Pitch::Up,
        }
    }

    /// Tilt down one step, clamped.
    pub fn down(self) -> Pitch {
        match self {
            Pitch::Up => Pitch::Level,
            _ => Pitch::Down,
        }
    }
}

impl TryFrom<i16> for Pitch {
    type Error = String;

    fn try_from(deg: i16) -> std::result::Result<Self, Self::Error> {
        match deg {
            -30 => Ok(Pitch::Down),
            0 => Ok(Pitch::Level),
            30 => Ok(Pitch::Up),
            other => Err(format!("pitch must be one of -30/0/30, got {other}")),
        }
    }
}

impl From<Pitch> for i16 {
    fn from(p: Pitch) -> i16 {
        p.degrees()
    }
}

/// Agent location: grid cell, heading and camera tilt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pose {
    pub x: i32,
    pub z: i32,
    pub yaw: Yaw,
    pub pitch: Pitch,
}

impl Pose {
    pub fn new(x: i32, z: i32, yaw: Yaw, pitch: Pitch) -> Self {
        Self { x, z, yaw, pitch }
    }

    pub fn cell(&self) -> (i32, i32) {
        (self.x, self.z)
    }
}

impl fmt::Display for Pose {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, yaw {}, pitch {})",
            self.x,
            self.z,
            self.yaw.degrees(),
            self.pitch.degrees()
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    MoveAhead,
    RotateLeft,
    RotateRight,
    LookDown,
    LookUp,
    Done,
}

impl Action {
    pub const ALL: [Action; 6] = [
        Action::MoveAhead,
        Action::RotateLeft,
        Action::RotateRight,
        Action::LookDown,
        Action::LookUp,
        Action::Done,
    ];

    /// Movement actions in the policy's tie-break order.
    pub const MOVES: [Action; 5] = [
        Action::MoveAhead,
        Action::RotateLeft,
        Action::RotateRight,
        Action::LookUp,
        Action::LookDown,
    ];

    pub fn index(self) -> usize {
        Action::ALL.iter().position(|a| *a == self).unwrap()
    }

    /// Whether the action can change the agent's location.
    pub fn changes_location(self) -> bool {
        matches!(self, Action::MoveAhead)
    }
}

/// Vertical placement of an object; stands in for pitch-dependent visibility.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeightBand {
    Low,
    Mid,
    High,
}

impl HeightBand {
    pub fn index(self) -> usize {
        match self {
            HeightBand::Low => 0,
            HeightBand::Mid => 1,
            HeightBand::High => 2,
        }
    }
}

/// Which categories appear in a single view. Entries are 0 or 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BagOfObjects(Vec<f64>);

impl BagOfObjects {
    pub fn empty(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    /// Bag with a 1 at each listed category; repeated categories count once.
    pub fn from_categories(n: usize, present: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut bag = Self::empty(n);
        for c in present {
            bag.insert(c)?;
        }
        Ok(bag)
    }

    /// Validates that `values` is a 0/1 vector.
    pub fn from_bits(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|&&v| v != 0.0 && v != 1.0) {
            return Err(HozError::InvalidInput(format!(
                "bag-of-objects entries must be 0 or 1, got {v}"
            )));
        }
        Ok(Self(values))
    }

    pub fn insert(&mut self, category: usize) -> Result<()> {
        let len = self.0.len();
        let slot = self
            .0
            .get_mut(category)
            .ok_or(HozError::IndexOutOfRange { index: category, len })?;
        *slot = 1.0;
        Ok(())
    }

    pub fn contains(&self, category: usize) -> bool {
        self.0.get(category).is_some_and(|&v| v > 0.0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|&&v| v > 0.0).count()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn present(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0.0)
            .map(|(i, _)| i)
    }
}

/// One explored view: what was seen and where.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationSample {
    pub feature: BagOfObjects,
    pub location: Pose,
}

/// Per-category appearance rows, zero for categories not in view.
///
/// The dense `N x D_v` matrix is only materialized on request; the rows of
/// visible categories are shared with the simulator's constant table.
#[derive(Debug, Clone, PartialEq)]
pub struct AppearanceFeatures {
    table: Arc<Vec<Vec<f64>>>,
    visible: Vec<bool>,
}

impl AppearanceFeatures {
    pub fn new(table: Arc<Vec<Vec<f64>>>, visible: Vec<bool>) -> Self {
        debug_assert_eq!(table.len(), visible.len());
        Self { table, visible }
    }

    pub fn zeros(n: usize, dim: usize) -> Self {
        Self::new(Arc::new(vec![vec![0.0; dim]; n]), vec![false; n])
    }

    pub fn category_count(&self) -> usize {
        self.visible.len()
    }

    pub fn dim(&self) -> usize {
        self.table.first().map_or(0, Vec::len)
    }

    pub fn row(&self, category: usize) -> Vec<f64> {
        if self.visible[category] {
            self.table[category].clone()
        } else {
            vec![0.0; self.dim()]
        }
    }

    pub fn to_matrix(&self) -> Array2<f64> {
        let (n, d) = (self.visible.len(), self.dim());
        Array2::from_shape_fn((n, d), |(c, j)| {
            if self.visible[c] {
                self.table[c][j]
            } else {
                0.0
            }
        })
    }
}

/// Ground-truth detector output for one view.
///
/// `boxes` rows are `[x0, y0, x1, y1]` in normalized image coordinates.
/// Rows for categories not in view are all zero.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionFrame {
    pub boxes: Vec<[f64; 4]>,
    pub confidences: Vec<f64>,
    pub appearance: AppearanceFeatures,
}

impl DetectionFrame {
    pub fn empty(n: usize, appearance_dim: usize) -> Self {
        Self {
            boxes: vec![[0.0; 4]; n],
            confidences: vec![0.0; n],
            appearance: AppearanceFeatures::zeros(n, appearance_dim),
        }
    }

    pub fn category_count(&self) -> usize {
        self.confidences.len()
    }

    /// Box width for a category; 0 when not detected.
    pub fn box_size(&self, category: usize) -> f64 {
        self.boxes.get(category).map_or(0.0, |b| b[2] - b[0])
    }
}

/// Indicator vector of length `len` with a 1 at `index`.
pub fn one_hot(index: usize, len: usize) -> Result<Vec<f64>> {
    if index >= len {
        return Err(HozError::IndexOutOfRange { index, len });
    }
    let mut v = vec![0.0; len];
    v[index] = 1.0;
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_hot_examples() {
        assert_eq!(one_hot(0, 3).unwrap(), vec![1.0, 0.0, 0.0]);
        assert_eq!(one_hot(2, 3).unwrap(), vec![0.0, 0.0, 1.0]);
        assert!(matches!(
            one_hot(3, 3),
            Err(HozError::IndexOutOfRange { index: 3, len: 3 })
        ));
        for k in 1..10 {
            for i in 0..k {
                assert_eq!(one_hot(i, k).unwrap().iter().sum::<f64>(), 1.0);
            }
        }
    }

    #[test]
    fn yaw_arithmetic() {
        assert_eq!(Yaw::West.right(), Yaw::North);
        assert_eq!(Yaw::North.left(), Yaw::West);
        for y in Yaw::ALL {
            assert_eq!(y.left().right(), y);
        }
    }

    #[test]
    fn pitch_clamps() {
        assert_eq!(Pitch::Up.up(), Pitch::Up);
        assert_eq!(Pitch::Down.down(), Pitch::Down);
        assert_eq!(Pitch::Level.up(), Pitch::Up);
    }

    #[test]
    fn bag_records_repeats_once() {
        let bag = BagOfObjects::from_categories(4, [1, 1, 3]).unwrap();
        assert_eq!(bag.values(), &[0.0, 1.0, 0.0, 1.0]);
        assert_eq!(bag.count(), 2);
        assert!(BagOfObjects::from_bits(vec![0.0, 0.5]).is_err());
        assert!(BagOfObjects::from_categories(2, [2]).is_err());
    }

    #[test]
    fn pose_serde_rejects_bad_angles() {
        let ok: Pose = serde_json::from_str(r#"{"x":1,"z":2,"yaw":270,"pitch":-30}"#).unwrap();
        assert_eq!(ok.yaw, Yaw::West);
        assert_eq!(ok.pitch, Pitch::Down);
        assert!(serde_json::from_str::<Pose>(r#"{"x":1,"z":2,"yaw":45,"pitch":0}"#).is_err());
        assert!(serde_json::from_str::<Pose>(r#"{"x":1,"z":2,"yaw":0,"pitch":10}"#).is_err());
    }
}
