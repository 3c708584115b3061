use maad_core::{AgentRole, AgentState, FrameLabel, LabelCategory, Point, Scene, Subclass, Trajectory, FRAME_DT};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::background::Episode;
use crate::geometry::RigidTransform;
use crate::kinematics::{step_kinematics, wrap_angle, ControlCommand, VehicleLimits, VehicleState};
use crate::script::{auto_world, plan, AbnormalWhen, Axis, ManeuverScript, Plan, SpeedPlan};
use crate::world::{World, WorldSpec};
use crate::DatagenError;

/// Frames on each side of a normal/abnormal transition that are relabelled as ignore.
pub const IGNORE_MARGIN: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct SceneSettings {
    pub scene_id: String,
    pub frames: usize,
    pub limits: VehicleLimits,
    /// Attach frame labels (test split).
    pub labeled: bool,
    /// Place the scene at a seeded random pose instead of the canonical one.
    pub random_pose: bool,
}

impl SceneSettings {
    pub fn new(scene_id: impl Into<String>, duration_s: f64) -> Self {
        SceneSettings {
            scene_id: scene_id.into(),
            frames: (duration_s / FRAME_DT).round() as usize,
            limits: VehicleLimits::default(),
            labeled: true,
            random_pose: false,
        }
    }
}

/// Target states and the route arc length each frame was aimed at.
#[derive(Debug, Clone)]
pub struct TargetTrace {
    pub states: Vec<VehicleState>,
    pub arc: Vec<f64>,
}

fn reference(plan: &Plan, s: f64, t: f64) -> Point {
    let mut p = plan.route.point(s);
    if let Some((other, weight)) = &plan.blend {
        let w = weight.eval(t, s);
        if w != 0.0 {
            let q = other.point(s);
            p = [p[0] + w * (q[0] - p[0]), p[1] + w * (q[1] - p[1])];
        }
    }
    let d = plan.lateral_offset(t, s);
    if d != 0.0 {
        let n = plan.route.left_normal(s);
        p = [p[0] + d * n[0], p[1] + d * n[1]];
    }
    p
}

/// Smallest arc length past `s_prev` whose reference point lies `dist` away from `from`.
fn solve_arc(plan: &Plan, from: Point, dist: f64, t: f64, s_prev: f64) -> f64 {
    if dist < 1e-9 {
        return s_prev;
    }
    let hi = s_prev + 3.0 * dist + 2.0;
    let mut s = s_prev + dist;
    for _ in 0..30 {
        let r = reference(plan, s, t);
        let gap = (r[0] - from[0]).hypot(r[1] - from[1]);
        let f = gap - dist;
        if f.abs() < 1e-11 {
            break;
        }
        let h = 1e-5;
        let r2 = reference(plan, s + h, t);
        let df = ((r[0] - from[0]) * (r2[0] - r[0]) + (r[1] - from[1]) * (r2[1] - r[1])) / (gap * h);
        if df.abs() < 1e-6 {
            break;
        }
        s = (s - f / df).clamp(s_prev, hi);
    }
    s
}

fn agent_arc(plan: &Plan, episode: &Episode, agent: usize, t: f64) -> f64 {
    plan.route.project(episode.agents[agent].position(t)).0
}

fn speed_target(plan: &Plan, episode: &Episode, v: f64, s: f64, t: f64, limits: &VehicleLimits) -> f64 {
    let dt = FRAME_DT;
    match &plan.speed {
        SpeedPlan::Profile(p) => p.eval(t + dt, s + v * dt),
        SpeedPlan::Follow { agent, gap, gain, comfort } | SpeedPlan::Alongside { agent, offset: gap, gain, comfort } => {
            let a = &episode.agents[*agent];
            let ahead = agent_arc(plan, episode, *agent, t) - s;
            let want = if matches!(plan.speed, SpeedPlan::Follow { .. }) { ahead - gap } else { ahead + gap };
            let v_ref = (a.speed + gain * want).clamp(0.0, limits.v_max);
            v + (v_ref - v).clamp(-comfort * dt, comfort * dt)
        }
    }
}

fn initial_speed(plan: &Plan, episode: &Episode) -> f64 {
    match &plan.speed {
        SpeedPlan::Profile(p) => p.eval(0.0, episode.target_s0),
        _ => episode.target_v0,
    }
}

/// Runs the dead-beat lane-following controller for `frames` steps.
pub fn simulate_target(plan: &Plan, episode: &Episode, limits: &VehicleLimits, frames: usize) -> TargetTrace {
    let dt = FRAME_DT;
    let s0 = episode.target_s0;
    let x0 = reference(plan, s0, 0.0);
    let v0 = initial_speed(plan, episode).clamp(0.0, limits.v_max);
    let mut s_next = solve_arc(plan, x0, v0 * dt, dt, s0);
    let r1 = reference(plan, s_next, dt);
    let heading = if v0 > 0.0 { (r1[1] - x0[1]).atan2(r1[0] - x0[0]) } else { plan.route.heading(s0) };
    let mut state = VehicleState { x: x0[0], y: x0[1], heading: wrap_angle(heading), speed: v0 };
    let mut states = Vec::with_capacity(frames);
    let mut arc = Vec::with_capacity(frames);
    let mut s_cur = s0;
    for k in 0..frames {
        states.push(state);
        arc.push(s_cur);
        let t = k as f64 * dt;
        let v = state.speed;
        let v_ref = speed_target(plan, episode, v, s_cur, t, limits).clamp(0.0, limits.v_max);
        let accel = ((v_ref - v) / dt).clamp(-limits.a_max, limits.a_max);
        let v_next = (v + accel * dt).clamp(0.0, limits.v_max);
        let accel = (v_next - v) / dt;
        // The next position is already fixed by the current heading; steer so the one after lands on the reference.
        let next = [state.x + v * state.heading.cos() * dt, state.y + v * state.heading.sin() * dt];
        let s_after = solve_arc(plan, next, v_next * dt, t + 2.0 * dt, s_next);
        let aim = reference(plan, s_after, t + 2.0 * dt);
        let steer = if v > 1e-3 && v_next > 1e-9 {
            let want = wrap_angle((aim[1] - next[1]).atan2(aim[0] - next[0]) - state.heading);
            (want * limits.wheelbase / (v * dt)).atan()
        } else {
            0.0
        };
        let cmd = ControlCommand { accel, steer }.clamped(limits);
        state = step_kinematics(state, cmd, limits.wheelbase, dt);
        s_cur = s_next;
        s_next = s_after;
    }
    TargetTrace { states, arc }
}

/// Frame-wise labels: abnormal where the plan says so, then ignore margins around every transition.
pub fn resolve_labels(plan: &Plan, episode: &Episode, trace: &TargetTrace) -> Vec<FrameLabel> {
    let n = trace.states.len();
    let abnormal: Vec<bool> = (0..n)
        .map(|k| {
            let (t, s) = (k as f64 * FRAME_DT, trace.arc[k]);
            plan.subclass.is_abnormal()
                && plan.abnormal.iter().any(|c| match *c {
                    AbnormalWhen::Span { axis, from, to } => {
                        let x = if axis == Axis::Time { t } else { s };
                        x >= from && x < to
                    }
                    AbnormalWhen::LateralBeyond(th) => {
                        let d = plan.lateral_offset(t, s);
                        if th >= 0.0 {
                            d > th
                        } else {
                            d < th
                        }
                    }
                    AbnormalWhen::GapBelow { agent, gap } => agent_arc(plan, episode, agent, t) - s < gap,
                })
        })
        .collect();
    let mut category: Vec<LabelCategory> =
        abnormal.iter().map(|&a| if a { LabelCategory::Abnormal } else { LabelCategory::Normal }).collect();
    for k in 1..n {
        if abnormal[k] != abnormal[k - 1] {
            for c in category.iter_mut().take((k + IGNORE_MARGIN).min(n)).skip(k.saturating_sub(IGNORE_MARGIN)) {
                *c = LabelCategory::Ignore;
            }
        }
    }
    category
        .into_iter()
        .enumerate()
        .map(|(k, c)| {
            let sub = match c {
                LabelCategory::Abnormal => Some(plan.subclass),
                LabelCategory::Normal => Some(plan.normal_subclass),
                LabelCategory::Ignore => None,
            };
            FrameLabel::new(k, c, sub).expect("consistent label")
        })
        .collect()
}

fn scene_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Seeds the world pose, the background and the script independently so that
/// background traffic depends only on the world spec and the seed.
pub fn episode_for(world: &WorldSpec, seed: u64) -> Episode {
    Episode::sample(World::build(*world), &mut scene_rng(seed, 1))
}

pub fn world_for(subclass: Subclass, seed: u64) -> WorldSpec {
    auto_world(subclass, &mut scene_rng(seed, 3))
}

/// Animates one scene: background replay plus the scripted target.
pub fn generate_scene(world: &WorldSpec, script: &ManeuverScript, settings: &SceneSettings, seed: u64) -> Result<Scene, DatagenError> {
    let episode = episode_for(world, seed);
    let mut rng = scene_rng(seed, 2);
    let duration = settings.frames as f64 * FRAME_DT;
    let plan = plan(script, &episode, &mut rng, duration, settings.limits.v_max).map_err(|e| e.in_scene(&settings.scene_id))?;
    let trace = simulate_target(&plan, &episode, &settings.limits, settings.frames);

    let pose = if settings.random_pose {
        let mut prng = scene_rng(seed, 4);
        RigidTransform {
            rotation: prng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
            translation: [prng.gen_range(-2000.0..2000.0), prng.gen_range(-2000.0..2000.0)],
        }
    } else {
        RigidTransform::identity()
    };
    let place = |p: Point| {
        let q = pose.apply(p);
        AgentState::new(q[0], q[1])
    };

    let mut trajectories = vec![Trajectory::new("agent", AgentRole::Target, trace.states.iter().map(|s| place([s.x, s.y])).collect())];
    for (i, a) in episode.agents.iter().enumerate() {
        let states: Vec<AgentState> = (0..settings.frames)
            .map(|k| {
                let t = k as f64 * FRAME_DT;
                let p = a.position(t);
                if a.on_path(t) && episode.visible(p) {
                    place(p)
                } else {
                    AgentState::PADDED
                }
            })
            .collect();
        if states.iter().any(|s| s.valid) {
            let role = if Some(i) == episode.follower { AgentRole::Ego } else { AgentRole::Other };
            let id = if role == AgentRole::Ego { "av".to_string() } else { a.agent_id.clone() };
            trajectories.push(Trajectory::new(id, role, states));
        }
    }
    let mut lane_graph = episode.world.lane_graph.clone();
    for lane in &mut lane_graph.lanes {
        for p in &mut lane.centerline {
            *p = pose.apply(*p);
        }
    }
    let labels = settings.labeled.then(|| resolve_labels(&plan, &episode, &trace));
    Ok(Scene::new(settings.scene_id.clone(), 0.0, trajectories, lane_graph, labels)?)
}
