//! Grid environments and their on-disk format.
//!
//! An environment file is TOML with a fixed key order:
//!
//! ```toml
//! version = 1
//! room_id = "kitchen_003"
//! scene_label = 0
//! categories = 22
//! width = 4
//! depth = 3
//! walkable = [
//!     "....",   # z = 0, characters are x = 0..width
//!     ".##.",   # '.' walkable, '#' blocked
//!     "....",
//! ]
//!
//! [[objects]]
//! category = 7
//! x = 1
//! z = 1
//! band = "mid"
//! ```
//!
//! Saving a loaded environment reproduces the file byte for byte.

use std::collections::{BTreeSet, VecDeque};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{HozError, Result};
use crate::model::{HeightBand, DEFAULT_CATEGORY_COUNT};

pub const FORMAT_VERSION: u32 = 1;

/// Minimum number of distinct categories an environment must contain.
pub const MIN_CATEGORIES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ObjectInstance {
    pub category: usize,
    pub x: i32,
    pub z: i32,
    pub band: HeightBand,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridEnvironment {
    pub room_id: String,
    pub scene_label: usize,
    pub categories: usize,
    pub width: usize,
    pub depth: usize,
    walkable: Vec<bool>,
    pub objects: Vec<ObjectInstance>,
}

#[derive(Serialize, Deserialize)]
struct EnvFile {
    version: u32,
    room_id: String,
    scene_label: usize,
    categories: usize,
    width: usize,
    depth: usize,
    walkable: Vec<String>,
    #[serde(default)]
    objects: Vec<ObjectInstance>,
}

impl GridEnvironment {
    /// Build and validate an environment. `walkable` is row-major with `z` as the row.
    pub fn new(
        room_id: impl Into<String>,
        scene_label: usize,
        categories: usize,
        width: usize,
        depth: usize,
        walkable: Vec<bool>,
        objects: Vec<ObjectInstance>,
    ) -> Result<Self> {
        let env = Self {
            room_id: room_id.into(),
            scene_label,
            categories,
            width,
            depth,
            walkable,
            objects,
        };
        env.validate()?;
        Ok(env)
    }

    /// Parse `rows` of `.`/`#` characters (row index is `z`) with the default category count.
    pub fn from_rows(
        room_id: impl Into<String>,
        scene_label: usize,
        rows: &[&str],
        objects: Vec<ObjectInstance>,
    ) -> Result<Self> {
        let depth = rows.len();
        let width = rows.first().map_or(0, |r| r.chars().count());
        let walkable = parse_rows(rows.iter().copied(), width)?;
        Self::new(
            room_id,
            scene_label,
            DEFAULT_CATEGORY_COUNT,
            width,
            depth,
            walkable,
            objects,
        )
    }

    pub fn in_bounds(&self, x: i32, z: i32) -> bool {
        x >= 0 && z >= 0 && (x as usize) < self.width && (z as usize) < self.depth
    }

    pub fn is_walkable(&self, x: i32, z: i32) -> bool {
        self.in_bounds(x, z) && self.walkable[z as usize * self.width + x as usize]
    }

    /// Walkable cells in row-major order (`z` outer, `x` inner).
    pub fn walkable_cells(&self) -> Vec<(i32, i32)> {
        let mut cells = Vec::new();
        for z in 0..self.depth as i32 {
            for x in 0..self.width as i32 {
                if self.is_walkable(x, z) {
                    cells.push((x, z));
                }
            }
        }
        cells
    }

    /// Distinct categories present, ascending.
    pub fn present_categories(&self) -> Vec<usize> {
        self.objects
            .iter()
            .map(|o| o.category)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    pub fn has_category(&self, category: usize) -> bool {
        self.objects.iter().any(|o| o.category == category)
    }

    pub fn instances_of(&self, category: usize) -> impl Iterator<Item = &ObjectInstance> {
        self.objects.iter().filter(move |o| o.category == category)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HozError::InvalidEnvironment(msg));
        if self.width == 0 || self.depth == 0 {
            return bad(format!("empty grid {}x{}", self.width, self.depth));
        }
        if self.walkable.len() != self.width * self.depth {
            return bad(format!(
                "walkable mask has {} cells, expected {}",
                self.walkable.len(),
                self.width * self.depth
            ));
        }
        if self.categories == 0 {
            return bad("category count must be positive".into());
        }
        for o in &self.objects {
            if !self.in_bounds(o.x, o.z) {
                return bad(format!(
                    "object of category {} at out-of-bounds cell ({}, {})",
                    o.category, o.x, o.z
                ));
            }
            if o.category >= self.categories {
                return bad(format!(
                    "object at ({}, {}) has category {} but only {} categories exist",
                    o.x, o.z, o.category, self.categories
                ));
            }
        }
        let distinct = self.present_categories().len();
        if distinct < MIN_CATEGORIES {
            return bad(format!(
                "{distinct} distinct object categories, need at least {MIN_CATEGORIES}"
            ));
        }
        let cells = self.walkable_cells();
        let Some(&start) = cells.first() else {
            return bad("no walkable cells".into());
        };
        let reached = self.reachable_from(start);
        if let Some(&(x, z)) = cells.iter().find(|c| !reached.contains(c)) {
            return bad(format!(
                "walkable region is disconnected: cell ({x}, {z}) unreachable from ({}, {})",
                start.0, start.1
            ));
        }
        Ok(())
    }

    fn reachable_from(&self, start: (i32, i32)) -> BTreeSet<(i32, i32)> {
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some((x, z)) = queue.pop_front() {
            for (dx, dz) in [(0, 1), (1, 0), (0, -1), (-1, 0)] {
                let n = (x + dx, z + dz);
                if self.is_walkable(n.0, n.1) && seen.insert(n) {
                    queue.push_back(n);
                }
            }
        }
        seen
    }

    pub fn to_toml(&self) -> String {
        let rows = (0..self.depth)
            .map(|z| {
                (0..self.width)
                    .map(|x| if self.walkable[z * self.width + x] { '.' } else { '#' })
                    .collect()
            })
            .collect();
        let file = EnvFile {
            version: FORMAT_VERSION,
            room_id: self.room_id.clone(),
            scene_label: self.scene_label,
            categories: self.categories,
            width: self.width,
            depth: self.depth,
            walkable: rows,
            objects: self.objects.clone(),
        };
        toml::to_string(&file).expect("environment serializes")
    }

    pub fn from_toml(text: &str, origin: &Path) -> Result<Self> {
        let file: EnvFile = toml::from_str(text).map_err(|e| HozError::parse(origin, e))?;
        if file.version != FORMAT_VERSION {
            return Err(HozError::parse(
                origin,
                format!("unsupported version {}", file.version),
            ));
        }
        if file.walkable.len() != file.depth {
            return Err(HozError::InvalidEnvironment(format!(
                "{} walkable rows, expected depth {}",
                file.walkable.len(),
                file.depth
            )));
        }
        let walkable = parse_rows(file.walkable.iter().map(String::as_str), file.width)?;
        Self::new(
            file.room_id,
            file.scene_label,
            file.categories,
            file.width,
            file.depth,
            walkable,
            file.objects,
        )
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml()).map_err(|e| HozError::io(path, e))
    }
}

fn parse_rows<'a>(rows: impl Iterator<Item = &'a str>, width: usize) -> Result<Vec<bool>> {
    let mut mask = Vec::new();
    for (z, row) in rows.enumerate() {
        let n = row.chars().count();
        if n != width {
            return Err(HozError::InvalidEnvironment(format!(
                "row z={z} has {n} cells, expected width {width}"
            )));
        }
        for (x, ch) in row.chars().enumerate() {
            mask.push(match ch {
                '.' => true,
                '#' => false,
                other => {
                    return Err(HozError::InvalidEnvironment(format!(
                        "cell ({x}, {z}) has invalid character {other:?}"
                    )))
                }
            });
        }
    }
    Ok(mask)
}

/// Read and validate an environment file.
pub fn load_environment(path: &Path) -> Result<GridEnvironment> {
    let text = std::fs::read_to_string(path).map_err(|e| HozError::io(path, e))?;
    GridEnvironment::from_toml(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obj(category: usize, x: i32, z: i32) -> ObjectInstance {
        ObjectInstance {
            category,
            x,
            z,
            band: HeightBand::Mid,
        }
    }

    fn minimal() -> GridEnvironment {
        GridEnvironment::from_rows(
            "mini",
            0,
            &["...", "...", "..."],
            vec![obj(0, 0, 0), obj(1, 2, 0), obj(2, 0, 2), obj(3, 2, 2)],
        )
        .unwrap()
    }

    #[test]
    fn minimal_room_loads() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mini.toml");
        minimal().save(&path).unwrap();
        let env = load_environment(&path).unwrap();
        assert_eq!(env.objects.len(), 4);
        assert_eq!(env, minimal());
    }

    #[test]
    fn out_of_bounds_object_names_cell() {
        let err = GridEnvironment::from_rows(
            "oob",
            0,
            &["...", "...", "..."],
            vec![obj(0, 0, 0), obj(1, 1, 0), obj(2, 2, 0), obj(3, 5, 7)],
        )
        .unwrap_err();
        assert!(err.to_string().contains("(5, 7)"), "{err}");
    }

    #[test]
    fn disconnected_region_names_cell() {
        let err = GridEnvironment::from_rows(
            "split",
            0,
            &[".#.", ".#.", ".#."],
            vec![obj(0, 0, 0), obj(1, 0, 1), obj(2, 0, 2), obj(3, 1, 1)],
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("disconnected") && msg.contains("(2, 0)"), "{msg}");
    }

    #[test]
    fn too_few_categories_rejected() {
        let err = GridEnvironment::from_rows(
            "few",
            0,
            &["..."],
            vec![obj(0, 0, 0), obj(0, 1, 0), obj(1, 2, 0)],
        )
        .unwrap_err();
        assert!(err.to_string().contains("distinct"));
    }

    #[test]
    fn bad_version_and_bad_rows_rejected() {
        let text = minimal().to_toml().replace("version = 1", "version = 9");
        assert!(GridEnvironment::from_toml(&text, Path::new("x")).is_err());
        let text = minimal().to_toml().replacen("\"...\"", "\"..x\"", 1);
        let err = GridEnvironment::from_toml(&text, Path::new("x")).unwrap_err();
        assert!(err.to_string().contains("invalid character"));
    }

    #[test]
    fn toml_layout_is_canonical() {
        let text = minimal().to_toml();
        let keys: Vec<&str> = text
            .lines()
            .filter_map(|l| l.split_once(" = ").map(|(k, _)| k))
            .take(6)
            .collect();
        assert_eq!(
            keys,
            ["version", "room_id", "scene_label", "categories", "width", "depth"]
        );
        let again = GridEnvironment::from_toml(&text, Path::new("x")).unwrap();
        assert_eq!(again.to_toml(), text);
    }
}
