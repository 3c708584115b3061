use maad_core::Point;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::geometry::Path;
use crate::world::{LaneKind, Turn, World, ARM_LENGTH};

/// Constant-speed lane follower standing in for replayed traffic.
#[derive(Debug, Clone)]
pub struct BackgroundAgent {
    pub agent_id: String,
    pub path: Path,
    pub s0: f64,
    pub speed: f64,
}

impl BackgroundAgent {
    pub fn arc_length(&self, t: f64) -> f64 {
        self.s0 + self.speed * t
    }

    pub fn position(&self, t: f64) -> Point {
        self.path.point(self.arc_length(t))
    }

    pub fn on_path(&self, t: f64) -> bool {
        let s = self.arc_length(t);
        (0.0..=self.path.length()).contains(&s)
    }
}

/// A world plus everything drawn from the scene seed that does not depend on the target's script.
#[derive(Debug, Clone)]
pub struct Episode {
    pub world: World,
    /// Target arc length at frame 0 along its start lane or junction route.
    pub target_s0: f64,
    pub target_v0: f64,
    pub agents: Vec<BackgroundAgent>,
    pub lead: Option<usize>,
    pub follower: Option<usize>,
    pub neighbor: Option<usize>,
    pub view_center: Point,
    pub view_radius: f64,
}

impl Episode {
    pub fn sample(world: World, rng: &mut ChaCha8Rng) -> Episode {
        let v0 = rng.gen_range(9.0..12.5);
        let mut agents = Vec::new();
        let mut push = |path: &Path, s0: f64, speed: f64| {
            let id = format!("bg_{:02}", agents.len() + 1);
            agents.push(BackgroundAgent { agent_id: id, path: path.clone(), s0, speed });
            agents.len() - 1
        };
        let (target_s0, target_path, lead, follower, neighbor);
        if let Some(j) = &world.junction {
            let lead_turn = if j.through.is_some() { Turn::Through } else { Turn::Left };
            target_path = j.route(lead_turn).unwrap().clone();
            target_s0 = j.entry_s - v0 * rng.gen_range(2.5..3.5);
            lead = Some(push(&target_path, target_s0 + rng.gen_range(25.0..40.0), v0 + rng.gen_range(0.3..1.5)));
            follower = Some(push(&target_path, target_s0 - rng.gen_range(25.0..40.0), v0 + rng.gen_range(-1.0..0.3)));
            neighbor = None;
            // Cross traffic queues at the stop lines; other traffic leaves the box.
            for i in world.lanes_of(LaneKind::Inbound) {
                let queue = rng.gen_range(0..3usize);
                for k in 0..queue {
                    push(&world.lanes[i].path, ARM_LENGTH - 2.5 - 7.0 * k as f64, 0.0);
                }
            }
            for i in world.lanes_of(LaneKind::Outbound) {
                if rng.gen_bool(0.7) {
                    push(&world.lanes[i].path, rng.gen_range(5.0..40.0), rng.gen_range(6.0..11.0));
                }
            }
        } else {
            target_path = world.lanes[world.target_lane].path.clone();
            target_s0 = 80.0 + rng.gen_range(0.0..10.0);
            let adjacent = &world.lanes[world.adjacent_lane.unwrap()].path;
            lead = Some(push(&target_path, target_s0 + rng.gen_range(25.0..40.0), v0 + rng.gen_range(0.3..1.5)));
            follower = Some(push(&target_path, target_s0 - rng.gen_range(25.0..40.0), v0 + rng.gen_range(-1.0..0.3)));
            neighbor = Some(push(adjacent, target_s0 - rng.gen_range(6.0..12.0), v0 - rng.gen_range(0.0..1.0)));
            push(adjacent, target_s0 + rng.gen_range(35.0..70.0), v0 + rng.gen_range(-1.0..1.0));
            let oncoming = world.lanes_of(LaneKind::Oncoming);
            let n = rng.gen_range(2..5usize);
            for _ in 0..n {
                let lane = &world.lanes[oncoming[rng.gen_range(0..oncoming.len())]].path;
                let (s_target, _) = lane.project(target_path.point(target_s0));
                push(lane, s_target - rng.gen_range(20.0..150.0), rng.gen_range(8.0..13.0));
            }
        }
        let ahead = target_path.point(target_s0 + 3.0 * v0);
        Episode { world, target_s0, target_v0: v0, agents, lead, follower, neighbor, view_center: ahead, view_radius: 90.0 }
    }

    pub fn visible(&self, p: Point) -> bool {
        (p[0] - self.view_center[0]).hypot(p[1] - self.view_center[1]) <= self.view_radius
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{StartLane, WorldSpec, WorldTemplate};
    use rand::SeedableRng;

    #[test]
    fn episodes_are_seed_deterministic() {
        for t in WorldTemplate::ALL {
            let spec = WorldSpec::new(t, StartLane::Outer);
            let a = Episode::sample(World::build(spec), &mut ChaCha8Rng::seed_from_u64(3));
            let b = Episode::sample(World::build(spec), &mut ChaCha8Rng::seed_from_u64(3));
            assert_eq!(a.agents.len(), b.agents.len());
            for (x, y) in a.agents.iter().zip(&b.agents) {
                assert_eq!((x.s0, x.speed), (y.s0, y.speed));
                assert_eq!(x.position(2.0), y.position(2.0));
            }
            assert!(a.lead.is_some() && a.follower.is_some());
        }
    }
}
