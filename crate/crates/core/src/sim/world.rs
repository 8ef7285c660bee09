use std::collections::VecDeque;
use std::sync::Arc;

use crate::env::GridEnvironment;
use crate::error::{HozError, Result};
use crate::model::{
    is_small_category, Action, AppearanceFeatures, BagOfObjects, DetectionFrame, HeightBand, ObservationSample, Pitch, Pose, Yaw,
    APPEARANCE_DIM,
};
use crate::rng::{derive_seed, SeededRng};

/// Height bands visible at each pitch, indexed by `Pitch::index` then `HeightBand::index`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PitchBandMap(pub [[bool; 3]; 3]);

impl Default for PitchBandMap {
    fn default() -> Self {
        // Down sees low+mid, level sees everything, up sees mid+high.
        Self([[true, true, false], [true, true, true], [false, true, true]])
    }
}

impl PitchBandMap {
    pub fn visible(&self, pitch: Pitch, band: HeightBand) -> bool {
        self.0[pitch.index()][band.index()]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VisibilityParams {
    pub max_range: f64,
    /// Range limit for small objects (capped by `max_range`).
    pub small_object_range: f64,
    pub fov_half_angle: f64,
    pub pitch_bands: PitchBandMap,
    /// Whether object cells block the line of sight like walls do.
    pub objects_occlude: bool,
}

impl Default for VisibilityParams {
    fn default() -> Self {
        Self {
            max_range: 5.0,
            small_object_range: 2.5,
            fov_half_angle: 45.0,
            pitch_bands: PitchBandMap::default(),
            objects_occlude: false,
        }
    }
}

impl VisibilityParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.max_range >= 1.0) {
            return Err(HozError::InvalidInput(format!(
                "max_range must be >= 1, got {}",
                self.max_range
            )));
        }
        if !(self.small_object_range >= 1.0) {
            return Err(HozError::InvalidInput(format!(
                "small_object_range must be >= 1, got {}",
                self.small_object_range
            )));
        }
        if !(self.fov_half_angle > 0.0 && self.fov_half_angle <= 90.0) {
            return Err(HozError::InvalidInput(format!(
                "fov_half_angle must lie in (0, 90], got {}",
                self.fov_half_angle
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimParams {
    pub visibility: VisibilityParams,
    pub success_radius: f64,
    /// Seed of the per-category appearance vectors.
    pub appearance_seed: u64,
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            visibility: VisibilityParams::default(),
            success_radius: 1.5,
            appearance_seed: 0x0A77_EA2A_2CE0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AgentState {
    pub pose: Pose,
    pub steps_taken: usize,
    pub done: bool,
}

impl AgentState {
    pub fn at(pose: Pose) -> Self {
        Self {
            pose,
            steps_taken: 0,
            done: false,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Sighting {
    object: usize,
    distance: f64,
    /// Signed azimuth offset in degrees, positive to the right.
    offset: f64,
}

/// A gridworld bound to one environment. Visibility for every pose is
/// computed once at construction; all queries afterwards are lookups.
#[derive(Debug, Clone)]
pub struct Simulator<'a> {
    env: &'a GridEnvironment,
    params: SimParams,
    sightings: Vec<Vec<Sighting>>,
    appearance: Arc<Vec<Vec<f64>>>,
}

fn pose_slot(env: &GridEnvironment, x: i32, z: i32, yaw: Yaw, pitch: Pitch) -> usize {
    ((z as usize * env.width + x as usize) * 4 + yaw.index()) * 3 + pitch.index()
}

/// Cells strictly between two cells along their supercover line. When the
/// line passes exactly through a lattice corner both side cells are included.
pub fn line_of_sight_cells(from: (i32, i32), to: (i32, i32)) -> Vec<(i32, i32)> {
    let (mut x, mut z) = from;
    let dx = (to.0 - from.0).abs();
    let dz = (to.1 - from.1).abs();
    let sx = (to.0 - from.0).signum();
    let sz = (to.1 - from.1).signum();
    let mut cells = Vec::new();
    // Walk cell boundaries; `err` compares progress along x and z scaled by 2.
    let (mut ix, mut iz) = (0, 0);
    while ix < dx || iz < dz {
        let decision = (1 + 2 * ix) * dz - (1 + 2 * iz) * dx;
        if decision == 0 {
            // exact corner: the two side cells are both touched
            cells.push((x + sx, z));
            cells.push((x, z + sz));
            x += sx;
            z += sz;
            ix += 1;
            iz += 1;
        } else if decision < 0 {
            x += sx;
            ix += 1;
        } else {
            z += sz;
            iz += 1;
        }
        cells.push((x, z));
    }
    cells.pop();
    cells.retain(|&c| c != from && c != to);
    cells
}

impl<'a> Simulator<'a> {
    pub fn new(env: &'a GridEnvironment, params: SimParams) -> Result<Self> {
        params.visibility.validate()?;
        let appearance = (0..env.categories)
            .map(|c| {
                let mut rng = SeededRng::new(derive_seed(params.appearance_seed, &[c as u64]));
                (0..APPEARANCE_DIM).map(|_| rng.unit()).collect()
            })
            .collect();
        let mut sim = Self {
            env,
            params,
            sightings: Vec::new(),
            appearance: Arc::new(appearance),
        };
        sim.sightings = sim.compute_sightings();
        Ok(sim)
    }

    pub fn env(&self) -> &'a GridEnvironment {
        self.env
    }

    pub fn params(&self) -> &SimParams {
        &self.params
    }

    fn compute_sightings(&self) -> Vec<Vec<Sighting>> {
        let env = self.env;
        let mut table = vec![Vec::new(); env.width * env.depth * 12];
        for z in 0..env.depth as i32 {
            for x in 0..env.width as i32 {
                for yaw in Yaw::ALL {
                    let in_view: Vec<Sighting> = env
                        .objects
                        .iter()
                        .enumerate()
                        .filter_map(|(i, o)| {
                            self.sight(x, z, yaw, o.x, o.z, self.range_of(o.category))
                                .map(|(d, off)| (i, d, off))
                        })
                        .map(|(object, distance, offset)| Sighting {
                            object,
                            distance,
                            offset,
                        })
                        .collect();
                    for pitch in Pitch::ALL {
                        table[pose_slot(env, x, z, yaw, pitch)] = in_view
                            .iter()
                            .copied()
                            .filter(|s| {
                                self.params
                                    .visibility
                                    .pitch_bands
                                    .visible(pitch, env.objects[s.object].band)
                            })
                            .collect();
                    }
                }
            }
        }
        table
    }

    /// Distance and azimuth offset of a cell if it is in range, in the field
    /// of view and not occluded; pitch is handled by the caller.
    fn range_of(&self, category: usize) -> f64 {
        let vis = &self.params.visibility;
        if is_small_category(category) {
            vis.small_object_range.min(vis.max_range)
        } else {
            vis.max_range
        }
    }

    fn sight(&self, x: i32, z: i32, yaw: Yaw, ox: i32, oz: i32, range: f64) -> Option<(f64, f64)> {
        let vis = &self.params.visibility;
        let (vx, vz) = ((ox - x) as f64, (oz - z) as f64);
        let distance = vx.hypot(vz);
        if distance == 0.0 {
            return Some((0.0, 0.0));
        }
        if distance > range + 1e-9 {
            return None;
        }
        let (fx, fz) = yaw.delta();
        let (fx, fz) = (fx as f64, fz as f64);
        let ahead = vx * fx + vz * fz;
        let right = vx * fz - vz * fx;
        let offset = right.atan2(ahead).to_degrees();
        if offset.abs() > vis.fov_half_angle + 1e-9 {
            return None;
        }
        let clear = line_of_sight_cells((x, z), (ox, oz))
            .into_iter()
            .all(|(cx, cz)| {
                self.env.is_walkable(cx, cz)
                    || (!vis.objects_occlude && self.env.objects.iter().any(|o| (o.x, o.z) == (cx, cz)))
            });
        clear.then_some((distance, offset))
    }

    fn sightings_at(&self, pose: &Pose) -> &[Sighting] {
        if !self.env.in_bounds(pose.x, pose.z) {
            return &[];
        }
        &self.sightings[pose_slot(self.env, pose.x, pose.z, pose.yaw, pose.pitch)]
    }

    /// Random walkable start with level pitch that does not already satisfy the target.
    pub fn reset(&self, target: usize, rng: &mut SeededRng) -> Result<AgentState> {
        if !self.env.has_category(target) {
            return Err(HozError::TargetAbsent(target));
        }
        let cells = self.env.walkable_cells();
        let candidates: Vec<Pose> = cells
            .iter()
            .flat_map(|&(x, z)| Yaw::ALL.map(|yaw| Pose::new(x, z, yaw, Pitch::Level)))
            .collect();
        if candidates
            .iter()
            .all(|p| self.success_check(&AgentState::at(*p), target))
        {
            return Err(HozError::InvalidInput(format!(
                "every start pose already sees target {target}"
            )));
        }
        loop {
            let (x, z) = cells[rng.index(cells.len())];
            let yaw = Yaw::from_index(rng.index(4));
            let state = AgentState::at(Pose::new(x, z, yaw, Pitch::Level));
            if !self.success_check(&state, target) {
                return Ok(state);
            }
        }
    }

    /// Apply one action. Blocked moves leave the pose unchanged.
    pub fn step(&self, state: &AgentState, action: Action) -> AgentState {
        let mut next = *state;
        next.steps_taken += 1;
        let pose = &mut next.pose;
        match action {
            Action::MoveAhead => {
                let (dx, dz) = pose.yaw.delta();
                if self.env.is_walkable(pose.x + dx, pose.z + dz) {
                    pose.x += dx;
                    pose.z += dz;
                }
            }
            Action::RotateLeft => pose.yaw = pose.yaw.left(),
            Action::RotateRight => pose.yaw = pose.yaw.right(),
            Action::LookUp => pose.pitch = pose.pitch.up(),
            Action::LookDown => pose.pitch = pose.pitch.down(),
            Action::Done => next.done = true,
        }
        next
    }

    /// Pose reached by an action, ignoring bookkeeping.
    pub fn peek(&self, pose: &Pose, action: Action) -> Pose {
        self.step(&AgentState::at(*pose), action).pose
    }

    pub fn observe_bag(&self, pose: &Pose) -> BagOfObjects {
        let mut bag = BagOfObjects::empty(self.env.categories);
        for s in self.sightings_at(pose) {
            bag.insert(self.env.objects[s.object].category)
                .expect("validated category");
        }
        bag
    }

    /// Bag-of-objects and ground-truth detection frame for the current view.
    pub fn observe(&self, state: &AgentState) -> (BagOfObjects, DetectionFrame) {
        let n = self.env.categories;
        let bag = self.observe_bag(&state.pose);
        let mut boxes = vec![[0.0; 4]; n];
        let mut confidences = vec![0.0; n];
        // One instance per category: nearest wins, then lowest object index.
        let mut best: Vec<Option<Sighting>> = vec![None; n];
        for s in self.sightings_at(&state.pose) {
            let c = self.env.objects[s.object].category;
            if best[c].is_none_or(|b| s.distance < b.distance) {
                best[c] = Some(*s);
            }
        }
        let fov = self.params.visibility.fov_half_angle;
        for (c, sighting) in best.iter().enumerate() {
            let Some(s) = sighting else { continue };
            let size = 1.0 / s.distance.max(1.0);
            let horizontal = 0.5 + 0.5 * (s.offset / fov).clamp(-1.0, 1.0);
            let vertical = match self.env.objects[s.object].band {
                HeightBand::High => 0.2,
                HeightBand::Mid => 0.5,
                HeightBand::Low => 0.8,
            };
            let cx = size / 2.0 + (1.0 - size) * horizontal;
            let cy = size / 2.0 + (1.0 - size) * vertical;
            boxes[c] = [cx - size / 2.0, cy - size / 2.0, cx + size / 2.0, cy + size / 2.0];
            confidences[c] = 1.0;
        }
        let visible = bag.values().iter().map(|&v| v > 0.0).collect();
        let frame = DetectionFrame {
            boxes,
            confidences,
            appearance: AppearanceFeatures::new(Arc::clone(&self.appearance), visible),
        };
        (bag, frame)
    }

    /// Whether the target is in view and some instance lies within the success radius.
    pub fn success_check(&self, state: &AgentState, target: usize) -> bool {
        self.success_at(&state.pose, target)
    }

    fn success_at(&self, pose: &Pose, target: usize) -> bool {
        let visible = self
            .sightings_at(pose)
            .iter()
            .any(|s| self.env.objects[s.object].category == target);
        visible
            && self.env.instances_of(target).any(|o| {
                let d = ((o.x - pose.x) as f64).hypot((o.z - pose.z) as f64);
                d <= self.params.success_radius
            })
    }

    /// Cells from which some yaw/pitch satisfies the success check.
    pub fn goal_cells(&self, target: usize) -> Vec<(i32, i32)> {
        self.env
            .walkable_cells()
            .into_iter()
            .filter(|&(x, z)| {
                Yaw::ALL.iter().any(|&yaw| {
                    Pitch::ALL
                        .iter()
                        .any(|&pitch| self.success_at(&Pose::new(x, z, yaw, pitch), target))
                })
            })
            .collect()
    }

    /// Fewest MoveAhead steps from `start` to a goal cell, by breadth-first
    /// search over walkable cells. `None` when no goal cell is reachable.
    pub fn shortest_path_length(&self, start: &Pose, target: usize) -> Option<u32> {
        let env = self.env;
        let mut goal = vec![false; env.width * env.depth];
        for (x, z) in self.goal_cells(target) {
            goal[z as usize * env.width + x as usize] = true;
        }
        let idx = |x: i32, z: i32| z as usize * env.width + x as usize;
        if !env.is_walkable(start.x, start.z) {
            return None;
        }
        let mut dist = vec![u32::MAX; env.width * env.depth];
        dist[idx(start.x, start.z)] = 0;
        let mut queue = VecDeque::from([(start.x, start.z)]);
        while let Some((x, z)) = queue.pop_front() {
            let d = dist[idx(x, z)];
            if goal[idx(x, z)] {
                return Some(d);
            }
            for (dx, dz) in [(0, 1), (1, 0), (0, -1), (-1, 0)] {
                let (nx, nz) = (x + dx, z + dz);
                if env.is_walkable(nx, nz) && dist[idx(nx, nz)] == u32::MAX {
                    dist[idx(nx, nz)] = d + 1;
                    queue.push_back((nx, nz));
                }
            }
        }
        None
    }

    /// One sample per walkable cell and yaw at level pitch, row-major then yaw ascending.
    pub fn sweep_observations(&self) -> Vec<ObservationSample> {
        self.env
            .walkable_cells()
            .into_iter()
            .flat_map(|(x, z)| Yaw::ALL.map(|yaw| Pose::new(x, z, yaw, Pitch::Level)))
            .map(|location| ObservationSample {
                feature: self.observe_bag(&location),
                location,
            })
            .collect()
    }
}
