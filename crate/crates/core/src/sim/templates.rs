//! Scene templates and procedural room generation.
//!
//! A template lists object groups in a fixed cyclic order. Rooms place each
//! group on its own stretch of the room perimeter, so groups occupy disjoint
//! regions and neighbouring groups in the template are spatially adjacent in
//! every room of the scene. The starting corner and winding direction vary
//! per room, and short wall stubs between groups add occlusion.

use serde::{Deserialize, Serialize};

use crate::env::{GridEnvironment, ObjectInstance};
use crate::error::{HozError, Result};
use crate::model::{category_index, HeightBand, DEFAULT_CATEGORY_COUNT};
use crate::rng::SeededRng;

pub const SCENE_NAMES: [&str; 4] = ["kitchen", "living_room", "bedroom", "bathroom"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeRange {
    pub min: usize,
    pub max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemSpec {
    pub category: usize,
    pub band: HeightBand,
    /// Probability that the item is placed; 1.0 marks an anchor.
    pub presence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub name: String,
    pub items: Vec<ItemSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneTemplate {
    pub label: usize,
    pub name: String,
    pub categories: usize,
    pub size: SizeRange,
    pub groups: Vec<GroupSpec>,
    /// Number of wall stubs placed between neighbouring groups.
    pub partitions: usize,
}

fn item(name: &str, band: HeightBand, presence: f64) -> ItemSpec {
    ItemSpec {
        category: category_index(name).unwrap_or_else(|| panic!("unknown category {name}")),
        band,
        presence,
    }
}

fn group(name: &str, items: Vec<ItemSpec>) -> GroupSpec {
    GroupSpec {
        name: name.to_string(),
        items,
    }
}

/// The four built-in scene categories over the default 22 object categories.
pub fn standard_templates() -> Vec<SceneTemplate> {
    use HeightBand::*;
    vec![
        SceneTemplate {
            label: 0,
            name: SCENE_NAMES[0].into(),
            categories: DEFAULT_CATEGORY_COUNT,
            size: SizeRange { min: 10, max: 13 },
            groups: vec![
                group(
                    "stove",
                    vec![
                        item("StoveBurner", Mid, 1.0),
                        item("Pot", Mid, 0.9),
                        item("Pan", Mid, 0.8),
                        item("Kettle", Mid, 0.7),
                    ],
                ),
                group(
                    "sink",
                    vec![item("Sink", Mid, 1.0), item("Bowl", Mid, 0.8)],
                ),
                group(
                    "fridge",
                    vec![item("Fridge", Mid, 1.0), item("GarbageCan", Low, 0.9)],
                ),
                group(
                    "appliances",
                    vec![
                        item("CoffeeMachine", Mid, 1.0),
                        item("Toaster", Mid, 0.9),
                        item("Microwave", High, 0.9),
                    ],
                ),
                group(
                    "table",
                    vec![item("Chair", Low, 1.0), item("Plate", Mid, 0.8)],
                ),
                group("door", vec![item("LightSwitch", High, 1.0)]),
            ],
            partitions: 2,
        },
        SceneTemplate {
            label: 1,
            name: SCENE_NAMES[1].into(),
            categories: DEFAULT_CATEGORY_COUNT,
            size: SizeRange { min: 10, max: 13 },
            groups: vec![
                group(
                    "media",
                    vec![item("Television", Mid, 1.0), item("RemoteControl", Low, 0.9)],
                ),
                group(
                    "reading",
                    vec![item("FloorLamp", High, 1.0), item("Book", Low, 0.8)],
                ),
                group(
                    "desk",
                    vec![
                        item("Laptop", Mid, 1.0),
                        item("DeskLamp", Mid, 0.9),
                        item("Chair", Low, 0.8),
                    ],
                ),
                group(
                    "dining",
                    vec![item("Plate", Mid, 1.0), item("GarbageCan", Low, 0.8)],
                ),
                group("door", vec![item("LightSwitch", High, 1.0)]),
            ],
            partitions: 2,
        },
        SceneTemplate {
            label: 2,
            name: SCENE_NAMES[2].into(),
            categories: DEFAULT_CATEGORY_COUNT,
            size: SizeRange { min: 9, max: 12 },
            groups: vec![
                group(
                    "nightstand",
                    vec![item("AlarmClock", Mid, 1.0), item("Book", Low, 0.8)],
                ),
                group(
                    "desk",
                    vec![
                        item("Laptop", Mid, 1.0),
                        item("DeskLamp", Mid, 0.9),
                        item("Chair", Low, 0.9),
                    ],
                ),
                group(
                    "dresser",
                    vec![item("Bowl", Mid, 1.0), item("GarbageCan", Low, 0.8)],
                ),
                group("door", vec![item("LightSwitch", High, 1.0)]),
            ],
            partitions: 1,
        },
        SceneTemplate {
            label: 3,
            name: SCENE_NAMES[3].into(),
            categories: DEFAULT_CATEGORY_COUNT,
            size: SizeRange { min: 7, max: 9 },
            groups: vec![
                group("vanity", vec![item("Sink", Mid, 1.0)]),
                group(
                    "toilet",
                    vec![item("Toilet", Low, 1.0), item("GarbageCan", Low, 1.0)],
                ),
                group("door", vec![item("LightSwitch", High, 1.0)]),
            ],
            partitions: 1,
        },
    ]
}

impl SceneTemplate {
    pub fn validate(&self) -> Result<()> {
        if self.groups.is_empty() || self.groups.iter().any(|g| g.items.is_empty()) {
            return Err(HozError::InvalidInput(format!(
                "template {} needs non-empty object groups",
                self.name
            )));
        }
        if self.size.min < 3 || self.size.min > self.size.max {
            return Err(HozError::InvalidInput(format!(
                "template {} has invalid size range {}..={}",
                self.name, self.size.min, self.size.max
            )));
        }
        Ok(())
    }
}

/// Perimeter cells in winding order starting at (0, 0).
fn perimeter(width: i32, depth: i32) -> Vec<(i32, i32)> {
    let mut cells = Vec::new();
    cells.extend((0..width).map(|x| (x, 0)));
    cells.extend((1..depth).map(|z| (width - 1, z)));
    cells.extend((0..width - 1).rev().map(|x| (x, depth - 1)));
    cells.extend((1..depth - 1).rev().map(|z| (0, z)));
    cells
}

/// Unit step pointing into the room from a perimeter cell, `None` at corners.
fn inward(cell: (i32, i32), width: i32, depth: i32) -> Option<(i32, i32)> {
    let (x, z) = cell;
    let on_x_edge = x == 0 || x == width - 1;
    let on_z_edge = z == 0 || z == depth - 1;
    match (on_x_edge, on_z_edge) {
        (true, true) => None,
        (true, false) => Some((if x == 0 { 1 } else { -1 }, 0)),
        (false, true) => Some((0, if z == 0 { 1 } else { -1 })),
        (false, false) => None,
    }
}

/// Generate one room from a template.
pub fn generate_environment(
    template: &SceneTemplate,
    room_id: &str,
    rng: &mut SeededRng,
) -> Result<GridEnvironment> {
    template.validate()?;
    let mut last_err = None;
    for _ in 0..64 {
        match try_generate(template, room_id, rng) {
            Ok(env) => return Ok(env),
            Err(e) => last_err = Some(e),
        }
    }
    Err(HozError::Generation(format!(
        "template {}: {}",
        template.name,
        last_err.map_or_else(|| "no attempt".into(), |e| e.to_string())
    )))
}

fn try_generate(
    template: &SceneTemplate,
    room_id: &str,
    rng: &mut SeededRng,
) -> Result<GridEnvironment> {
    let width = rng.range(template.size.min..=template.size.max) as i32;
    let depth = rng.range(template.size.min..=template.size.max) as i32;
    let mut ring = perimeter(width, depth);
    let groups = template.groups.len();
    let mandatory: usize = template.groups.iter().map(|g| g.items.len() + 1).sum();
    if ring.len() < mandatory {
        return Err(HozError::Generation(format!(
            "{width}x{depth} room has {} perimeter cells, {mandatory} needed",
            ring.len()
        )));
    }
    if rng.bernoulli(0.5) {
        ring.reverse();
    }
    let offset = rng.index(ring.len());
    ring.rotate_left(offset);

    let mut walkable = vec![true; (width * depth) as usize];
    let block = |c: (i32, i32), walkable: &mut Vec<bool>| {
        walkable[(c.1 * width + c.0) as usize] = false;
    };
    let segment = ring.len() as f64 / groups as f64;
    let mut objects = Vec::new();
    for (g, spec) in template.groups.iter().enumerate() {
        let start = (g as f64 * segment).round() as usize;
        let end = ((g + 1) as f64 * segment).round() as usize;
        let len = end - start;
        let placed: Vec<&ItemSpec> = spec
            .items
            .iter()
            .filter(|it| it.presence >= 1.0 || rng.bernoulli(it.presence))
            .collect();
        let slack = len.saturating_sub(placed.len() + 1);
        let first = start + 1 + rng.index(slack + 1);
        for (i, it) in placed.iter().enumerate() {
            let cell = ring[(first + i) % ring.len()];
            block(cell, &mut walkable);
            objects.push(ObjectInstance {
                category: it.category,
                x: cell.0,
                z: cell.1,
                band: it.band,
            });
        }
    }

    // Wall stubs at group boundaries.
    let mut boundaries: Vec<usize> = (0..groups)
        .map(|g| (g as f64 * segment).round() as usize % ring.len())
        .collect();
    rng.shuffle(&mut boundaries);
    let max_len = (width.min(depth) / 2 - 1).max(1);
    for &b in boundaries.iter().take(template.partitions) {
        let cell = ring[b];
        let Some((dx, dz)) = inward(cell, width, depth) else { continue };
        let len = rng.range(1..=max_len);
        for step in 0..=len {
            block((cell.0 + dx * step, cell.1 + dz * step), &mut walkable);
        }
    }

    objects.sort();
    GridEnvironment::new(
        room_id,
        template.label,
        template.categories,
        width as usize,
        depth as usize,
        walkable,
        objects,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::category_name;

    #[test]
    fn kitchen_contains_anchor_groups() {
        let kitchen = &standard_templates()[0];
        let env = generate_environment(kitchen, "k", &mut SeededRng::new(1)).unwrap();
        let names: Vec<&str> = env
            .present_categories()
            .into_iter()
            .map(category_name)
            .collect();
        for anchor in ["Fridge", "Sink", "StoveBurner", "CoffeeMachine", "LightSwitch"] {
            assert!(names.contains(&anchor), "{anchor} missing from {names:?}");
        }
    }

    #[test]
    fn generation_is_deterministic() {
        for t in standard_templates() {
            let a = generate_environment(&t, "r", &mut SeededRng::new(9)).unwrap();
            let b = generate_environment(&t, "r", &mut SeededRng::new(9)).unwrap();
            assert_eq!(a.to_toml(), b.to_toml());
        }
    }

    #[test]
    fn too_small_room_is_rejected() {
        let mut t = standard_templates()[0].clone();
        t.size = SizeRange { min: 3, max: 3 };
        let err = generate_environment(&t, "tiny", &mut SeededRng::new(1)).unwrap_err();
        assert!(matches!(err, HozError::Generation(_)));
    }

    #[test]
    fn perimeter_is_a_cycle() {
        let ring = perimeter(4, 3);
        assert_eq!(ring.len(), 2 * (4 + 3) - 4);
        for w in ring.windows(2) {
            assert_eq!((w[0].0 - w[1].0).abs() + (w[0].1 - w[1].1).abs(), 1);
        }
    }
}
