use crate::{AgentRole, AgentState, CoreError, Point, Result, Scene, FIRST_SCORED_FRAME, WINDOW_LEN};

/// Below this displacement (metres) two positions count as the same point.
const MIN_HEADING_STEP: f64 = 1e-9;

/// Rigid transform from world coordinates into a target-centric frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub origin: Point,
    /// World-frame heading (radians) that becomes the local +x axis.
    pub heading: f64,
}

impl Pose {
    pub fn identity() -> Self {
        Pose { origin: [0.0, 0.0], heading: 0.0 }
    }

    pub fn to_local(&self, p: Point) -> Point {
        let (s, c) = self.heading.sin_cos();
        let dx = p[0] - self.origin[0];
        let dy = p[1] - self.origin[1];
        [c * dx + s * dy, -s * dx + c * dy]
    }

    pub fn to_world(&self, p: Point) -> Point {
        let (s, c) = self.heading.sin_cos();
        [c * p[0] - s * p[1] + self.origin[0], s * p[0] + c * p[1] + self.origin[1]]
    }

    /// Rotates a direction vector into the local frame.
    pub fn rotate_to_local(&self, v: Point) -> Point {
        let (s, c) = self.heading.sin_cos();
        [c * v[0] + s * v[1], -s * v[0] + c * v[1]]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowAgent {
    pub agent_id: String,
    pub role: AgentRole,
    pub states: [AgentState; WINDOW_LEN],
}

impl WindowAgent {
    pub fn positions(&self) -> [Point; WINDOW_LEN] {
        self.states.map(|s| s.point())
    }

    /// Local position at the window's last frame.
    pub fn current(&self) -> Point {
        self.states[WINDOW_LEN - 1].point()
    }
}

/// A 16-frame multi-agent slice in the target-centric frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub agents: Vec<WindowAgent>,
    pub target_index: usize,
    /// Scene frame of the last window step; the frame this window scores.
    pub end_frame: usize,
    pub pose: Pose,
}

impl Window {
    pub fn target(&self) -> &WindowAgent {
        &self.agents[self.target_index]
    }

    pub fn target_positions(&self) -> [Point; WINDOW_LEN] {
        self.target().positions()
    }

    /// Builds a single-agent window directly from local positions.
    pub fn from_target_positions(positions: [Point; WINDOW_LEN]) -> Self {
        Window {
            agents: vec![WindowAgent {
                agent_id: "target".into(),
                role: AgentRole::Target,
                states: positions.map(|p| AgentState::new(p[0], p[1])),
            }],
            target_index: 0,
            end_frame: FIRST_SCORED_FRAME,
            pose: Pose::identity(),
        }
    }
}

fn heading_at(scene: &Scene, target: usize, end_frame: usize) -> f64 {
    let states = &scene.trajectories[target].states;
    for k in (1..=end_frame).rev() {
        let (a, b) = (states[k - 1], states[k]);
        if !(a.valid && b.valid) {
            continue;
        }
        let (dx, dy) = (b.x - a.x, b.y - a.y);
        if dx.hypot(dy) >= MIN_HEADING_STEP {
            return dy.atan2(dx);
        }
    }
    0.0
}

/// Extracts the window ending at `end_frame`, expressed in the frame where the
/// target sits at the origin facing +x.
///
/// Only agents observed at `end_frame` are kept; frames before an agent's
/// first observation (or any gap) are padded with (0, 0) and flagged invalid.
pub fn to_target_frame(scene: &Scene, end_frame: usize) -> Result<Window> {
    let len = scene.len();
    if end_frame < FIRST_SCORED_FRAME || end_frame >= len {
        return Err(CoreError::FrameOutOfRange { frame: end_frame, len });
    }
    let target = scene.target_index().ok_or(CoreError::MissingTarget)?;
    let current = scene.trajectories[target].states[end_frame];
    if !current.valid {
        return Err(CoreError::TargetAbsent(end_frame));
    }
    let pose = Pose { origin: current.point(), heading: heading_at(scene, target, end_frame) };
    let start = end_frame + 1 - WINDOW_LEN;

    let mut agents = Vec::new();
    let mut target_index = 0;
    for (i, traj) in scene.trajectories.iter().enumerate() {
        if !traj.states[end_frame].valid {
            continue;
        }
        if i == target {
            target_index = agents.len();
        }
        let mut states = [AgentState::PADDED; WINDOW_LEN];
        for (t, s) in traj.states[start..=end_frame].iter().enumerate() {
            if s.valid {
                let [x, y] = if i == target && t == WINDOW_LEN - 1 { [0.0, 0.0] } else { pose.to_local(s.point()) };
                states[t] = AgentState::new(x, y);
            }
        }
        agents.push(WindowAgent { agent_id: traj.agent_id.clone(), role: traj.role, states });
    }
    Ok(Window { agents, target_index, end_frame, pose })
}

/// Per-step displacements of one agent's window states. Steps touching a
/// padded state are (0, 0).
pub fn to_displacements(states: &[AgentState; WINDOW_LEN]) -> [Point; WINDOW_LEN - 1] {
    let mut out = [[0.0; 2]; WINDOW_LEN - 1];
    for (t, d) in out.iter_mut().enumerate() {
        let (a, b) = (states[t], states[t + 1]);
        if a.valid && b.valid {
            *d = [b.x - a.x, b.y - a.y];
        }
    }
    out
}

/// Inverse of [`to_displacements`] for the span starting at the agent's first
/// observed frame `first`, located at `start`.
pub fn from_displacements(start: Point, first: usize, disp: &[Point; WINDOW_LEN - 1]) -> [Point; WINDOW_LEN] {
    let mut out = [[0.0; 2]; WINDOW_LEN];
    out[first] = start;
    for t in first..WINDOW_LEN - 1 {
        out[t + 1] = [out[t][0] + disp[t][0], out[t][1] + disp[t][1]];
    }
    out
}

/// Sliding windows of stride one over a scene, one per scored frame
/// `15..len`.
pub fn window_iter(scene: &Scene) -> Result<impl Iterator<Item = Result<Window>> + '_> {
    let len = scene.len();
    if len < WINDOW_LEN {
        return Err(CoreError::SceneTooShort(len));
    }
    Ok((FIRST_SCORED_FRAME..len).map(move |end| to_target_frame(scene, end)))
}
