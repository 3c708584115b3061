use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};

use maad_core::Subclass;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::background::Episode;
use crate::geometry::{smoothstep, Path};
use crate::world::{junction_route, StartLane, Turn, WorldSpec, WorldTemplate, ARM_LENGTH, BOX_HALF, LANE_WIDTH};
use crate::DatagenError;

/// A maneuver request: the class plus optional numeric overrides of its profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManeuverScript {
    pub subclass: Subclass,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl ManeuverScript {
    pub fn new(subclass: Subclass) -> Self {
        ManeuverScript { subclass, params: BTreeMap::new() }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    fn param(&self, key: &str, default: f64) -> f64 {
        self.params.get(key).copied().unwrap_or(default)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Time,
    Distance,
}

/// Piecewise profile through knots, constant outside them.
#[derive(Debug, Clone)]
pub struct Profile {
    pub axis: Axis,
    pub knots: Vec<(f64, f64)>,
    /// Quintic easing between knots instead of linear interpolation.
    pub smooth: bool,
}

impl Profile {
    pub fn constant(value: f64) -> Self {
        Profile { axis: Axis::Time, knots: vec![(0.0, value)], smooth: false }
    }

    pub fn eased(axis: Axis, knots: Vec<(f64, f64)>) -> Self {
        Profile { axis, knots, smooth: true }
    }

    pub fn linear(axis: Axis, knots: Vec<(f64, f64)>) -> Self {
        Profile { axis, knots, smooth: false }
    }

    pub fn eval(&self, t: f64, s: f64) -> f64 {
        let x = match self.axis {
            Axis::Time => t,
            Axis::Distance => s,
        };
        let k = &self.knots;
        if x <= k[0].0 {
            return k[0].1;
        }
        for w in k.windows(2) {
            let ((x0, y0), (x1, y1)) = (w[0], w[1]);
            if x < x1 {
                let u = (x - x0) / (x1 - x0);
                let u = if self.smooth { smoothstep(u) } else { u };
                return y0 + (y1 - y0) * u;
            }
        }
        k[k.len() - 1].1
    }
}

/// Sinusoidal lateral weave with eased on/off envelopes.
#[derive(Debug, Clone, Copy)]
pub struct Oscillation {
    pub start: f64,
    pub end: f64,
    pub amplitude: f64,
    pub period: f64,
    pub ramp: f64,
}

impl Oscillation {
    pub fn eval(&self, t: f64) -> f64 {
        if t <= self.start || t >= self.end {
            return 0.0;
        }
        let env = smoothstep((t - self.start) / self.ramp) * smoothstep((self.end - t) / self.ramp);
        self.amplitude * env * (2.0 * PI * (t - self.start) / self.period).sin()
    }
}

#[derive(Debug, Clone)]
pub enum SpeedPlan {
    Profile(Profile),
    /// Gap control behind a background agent, gap measured along the route.
    Follow {
        agent: usize,
        gap: f64,
        gain: f64,
        comfort: f64,
    },
    /// Hold a longitudinal offset relative to a background agent in another lane.
    Alongside {
        agent: usize,
        offset: f64,
        gain: f64,
        comfort: f64,
    },
}

/// Conditions under which a frame counts as abnormal.
#[derive(Debug, Clone, Copy)]
pub enum AbnormalWhen {
    Span {
        axis: Axis,
        from: f64,
        to: f64,
    },
    /// Scripted lateral offset beyond the threshold, same sign as the threshold.
    LateralBeyond(f64),
    GapBelow {
        agent: usize,
        gap: f64,
    },
}

/// Everything the controller and the labeller need for one target.
#[derive(Debug, Clone)]
pub struct Plan {
    pub subclass: Subclass,
    /// Label of non-abnormal frames.
    pub normal_subclass: Subclass,
    pub route: Path,
    pub blend: Option<(Path, Profile)>,
    pub lateral: Vec<Profile>,
    pub oscillation: Option<Oscillation>,
    pub speed: SpeedPlan,
    pub abnormal: Vec<AbnormalWhen>,
}

impl Plan {
    fn on(route: Path, subclass: Subclass, normal_subclass: Subclass, speed: SpeedPlan) -> Self {
        Plan { subclass, normal_subclass, route, blend: None, lateral: Vec::new(), oscillation: None, speed, abnormal: Vec::new() }
    }

    pub fn lateral_offset(&self, t: f64, s: f64) -> f64 {
        self.lateral.iter().map(|p| p.eval(t, s)).sum::<f64>() + self.oscillation.map_or(0.0, |o| o.eval(t))
    }
}

/// Templates a class can be animated in, preferred first.
pub fn feasible_worlds(subclass: Subclass) -> &'static [WorldTemplate] {
    use Subclass::*;
    use WorldTemplate as W;
    match subclass {
        TurnLeft | TurnRight | LastMinuteTurn | EnterWrongLane => &[W::FourWay, W::TIntersection],
        CancelTurn => &[W::FourWay],
        _ => &[W::Straight, W::Curved],
    }
}

/// Start lane a class needs on two-lane carriageways, if any.
pub fn required_start_lane(subclass: Subclass) -> Option<StartLane> {
    use Subclass::*;
    match subclass {
        GhostDriver | LaneChangeRight | AggressiveShearingRight => Some(StartLane::Inner),
        LeaveRoad | LaneChangeLeft | AggressiveShearingLeft | Thwarting => Some(StartLane::Outer),
        _ => None,
    }
}

/// Picks a feasible world for the class.
pub fn auto_world(subclass: Subclass, rng: &mut ChaCha8Rng) -> WorldSpec {
    let options = feasible_worlds(subclass);
    let template = options[rng.gen_range(0..options.len())];
    let lane = required_start_lane(subclass).unwrap_or(if rng.gen_bool(0.5) { StartLane::Inner } else { StartLane::Outer });
    WorldSpec::new(template, lane)
}

fn infeasible(subclass: Subclass, reason: impl Into<String>) -> DatagenError {
    DatagenError::InfeasibleScript { scene_id: String::new(), subclass, reason: reason.into() }
}

/// Time of maneuver onset: late enough to leave scored normal frames, early enough to fit.
fn onset(script: &ManeuverScript, rng: &mut ChaCha8Rng, duration: f64) -> f64 {
    let default = rng.gen_range(2.2..3.2f64).min(0.35 * duration);
    script.param("onset_s", default)
}

/// Builds the controller plan of `script` inside `episode`.
pub fn plan(script: &ManeuverScript, episode: &Episode, rng: &mut ChaCha8Rng, duration: f64, v_max: f64) -> Result<Plan, DatagenError> {
    use Subclass::*;
    let sub = script.subclass;
    let spec = episode.world.spec;
    if !feasible_worlds(sub).contains(&spec.template) {
        return Err(infeasible(sub, format!("needs one of {:?}, world is {}", feasible_worlds(sub), spec.template)));
    }
    if let Some(lane) = required_start_lane(sub) {
        if lane != spec.start_lane {
            return Err(infeasible(sub, format!("needs the {lane:?} start lane")));
        }
    }
    let v0 = episode.target_v0;
    let t_on = onset(script, rng, duration);
    let hold = SpeedPlan::Profile(Profile::constant(v0));
    let span = |from: f64, to: f64| AbnormalWhen::Span { axis: Axis::Time, from, to };
    let w = LANE_WIDTH;

    if let Some(j) = &episode.world.junction {
        let entry = j.entry_s;
        let route = |turn: Turn| j.route(turn).cloned().ok_or_else(|| infeasible(sub, format!("no {turn:?} movement")));
        let v_turn = script.param("turn_speed", rng.gen_range(4.5..6.5));
        let decel = 1.5;
        // Slow down into the box and speed up after leaving it.
        let turning = |conn: f64| {
            let d_dec = (v0 * v0 - v_turn * v_turn) / (2.0 * decel);
            SpeedPlan::Profile(Profile::linear(
                Axis::Distance,
                vec![(entry - d_dec, v0), (entry, v_turn), (entry + conn, v_turn), (entry + conn + d_dec, v0)],
            ))
        };
        let left_len = (BOX_HALF + 0.5 * w) * FRAC_PI_2;
        let right_len = (BOX_HALF - 0.5 * w) * FRAC_PI_2;
        return Ok(match sub {
            TurnLeft => Plan::on(route(Turn::Left)?, sub, TurnLeft, turning(left_len)),
            TurnRight => Plan::on(route(Turn::Right)?, sub, TurnRight, turning(right_len)),
            CancelTurn => {
                let mut p = Plan::on(route(Turn::Through)?, sub, TurnLeft, turning(2.0 * BOX_HALF));
                let turn_s = script.param("turn_s", 1.0);
                let (a, b) = (entry + v_turn * turn_s, entry + 1.6 * v_turn * turn_s);
                let back = b + script.param("revert_m", 18.0);
                let depth = script.param("depth", 0.8);
                p.blend =
                    Some((route(Turn::Left)?, Profile::eased(Axis::Distance, vec![(entry, 0.0), (a, depth), (b, depth), (back, 0.0)])));
                p.abnormal.push(AbnormalWhen::Span { axis: Axis::Distance, from: a, to: back });
                p
            }
            LastMinuteTurn => {
                let left = if script.params.contains_key("left") { script.param("left", 0.0) > 0.5 } else { rng.gen_bool(0.5) };
                let late = script.param("late_m", 1.5);
                let (radius, sweep) = if left { (BOX_HALF + 0.5 * w - late, FRAC_PI_2) } else { (BOX_HALF - 0.5 * w - late, -FRAC_PI_2) };
                let path = Path::builder(junction_route(Turn::Left).point(0.0), 0.0)
                    .straight(ARM_LENGTH + late)
                    .arc(radius, sweep)
                    .straight(ARM_LENGTH + late)
                    .build();
                let turn_start = entry + late;
                let mut p = Plan::on(path, sub, Straight, hold);
                p.abnormal.push(AbnormalWhen::Span {
                    axis: Axis::Distance,
                    from: turn_start - 0.3 * v0,
                    to: turn_start + radius * FRAC_PI_2 + 3.0,
                });
                p
            }
            EnterWrongLane => {
                let radius = BOX_HALF - 0.5 * w;
                let path = Path::builder(junction_route(Turn::Left).point(0.0), 0.0)
                    .straight(ARM_LENGTH)
                    .arc(radius, FRAC_PI_2)
                    .straight(ARM_LENGTH + 2.0 * BOX_HALF)
                    .build();
                let arc = radius * FRAC_PI_2;
                let mut p = Plan::on(path, sub, TurnLeft, turning(arc));
                p.abnormal.push(AbnormalWhen::Span { axis: Axis::Distance, from: entry + arc, to: f64::INFINITY });
                p
            }
            _ => unreachable!("road classes are rejected above"),
        });
    }

    let route = episode.world.lanes[episode.world.target_lane].path.clone();
    let lead = episode.lead.expect("roads have a lead slot");
    let neighbor = episode.neighbor.expect("roads have a neighbour slot");
    // Lateral direction towards the adjacent same-direction lane.
    let towards_adjacent = match spec.start_lane {
        StartLane::Inner => -1.0,
        StartLane::Outer => 1.0,
    };
    let mut p = Plan::on(route, sub, Straight, hold.clone());
    match sub {
        Straight => {}
        Following => {
            let lead_v = episode.agents[lead].speed;
            let gap = script.param("gap_m", (1.8 * lead_v).max(14.0));
            p.normal_subclass = Following;
            p.speed = SpeedPlan::Follow { agent: lead, gap, gain: 0.4, comfort: 2.0 };
        }
        SideBySide => {
            p.normal_subclass = SideBySide;
            let offset = script.param("offset_m", rng.gen_range(-1.0..1.0));
            p.speed = SpeedPlan::Alongside { agent: neighbor, offset, gain: 0.6, comfort: 2.0 };
        }
        LaneChangeLeft | LaneChangeRight => {
            p.normal_subclass = sub;
            let dur = script.param("duration_s", rng.gen_range(3.5..5.0));
            let side = if sub == LaneChangeLeft { 1.0 } else { -1.0 };
            p.lateral.push(Profile::eased(Axis::Time, vec![(t_on, 0.0), (t_on + dur, side * w)]));
        }
        Brake => {
            p.normal_subclass = Brake;
            let rate = script.param("decel", rng.gen_range(1.5..2.5));
            let dv = script.param("delta_v", rng.gen_range(4.0..7.0)).min(v0 - 2.0);
            p.speed = SpeedPlan::Profile(Profile::linear(Axis::Time, vec![(t_on, v0), (t_on + dv / rate, v0 - dv)]));
        }
        Accelerate => {
            p.normal_subclass = Accelerate;
            let rate = script.param("accel", rng.gen_range(1.0..2.0));
            let dv = script.param("delta_v", rng.gen_range(3.0..6.0)).min(v_max - 0.5 - v0).max(0.0);
            p.speed = SpeedPlan::Profile(Profile::linear(Axis::Time, vec![(t_on, v0), (t_on + dv / rate, v0 + dv)]));
        }
        GhostDriver => {
            let ramp = script.param("ramp_s", 2.5);
            p.lateral.push(Profile::eased(Axis::Time, vec![(t_on, 0.0), (t_on + ramp, w)]));
            p.abnormal.push(AbnormalWhen::LateralBeyond(script.param("threshold_m", 2.0)));
        }
        LeaveRoad => {
            let ramp = script.param("ramp_s", 3.0);
            let off = script.param("offset_m", 0.5 * w + 3.0);
            p.lateral.push(Profile::eased(Axis::Time, vec![(t_on, 0.0), (t_on + ramp, -off)]));
            p.speed = SpeedPlan::Profile(Profile::linear(Axis::Time, vec![(t_on + ramp, v0), (t_on + ramp + 2.0, 0.6 * v0)]));
            p.abnormal.push(AbnormalWhen::LateralBeyond(-script.param("threshold_m", 1.0)));
        }
        Thwarting => {
            let dur = script.param("duration_s", 2.0);
            let rate = script.param("decel", 3.5);
            let dv = script.param("delta_v", 6.0).min(v0 - 2.0);
            p.lateral.push(Profile::eased(Axis::Time, vec![(t_on, 0.0), (t_on + dur, w)]));
            let b0 = t_on + 0.75 * dur;
            p.speed = SpeedPlan::Profile(Profile::linear(Axis::Time, vec![(b0, v0), (b0 + dv / rate, v0 - dv)]));
            p.abnormal.push(span(t_on, b0 + dv / rate + 0.5));
        }
        Staggering => {
            let period = script.param("period_s", 2.0);
            let cycles = script.param("cycles", 2.0);
            let osc = Oscillation {
                start: t_on,
                end: t_on + cycles * period,
                amplitude: script.param("amplitude_m", 1.0),
                period,
                ramp: 0.25 * period,
            };
            p.oscillation = Some(osc);
            p.abnormal.push(span(osc.start, osc.end));
        }
        PushingAway => {
            let push = script.param("offset_m", 1.5) * towards_adjacent;
            let hold_s = script.param("hold_s", 2.0);
            p.speed = SpeedPlan::Alongside { agent: neighbor, offset: 0.0, gain: 0.6, comfort: 2.5 };
            p.lateral.push(Profile::eased(
                Axis::Time,
                vec![(t_on, 0.0), (t_on + 1.0, push), (t_on + 1.0 + hold_s, push), (t_on + 2.5 + hold_s, 0.0)],
            ));
            p.abnormal.push(AbnormalWhen::LateralBeyond(0.5 * push / push.abs()));
        }
        SwervingLeft | SwervingRight => {
            let side = if sub == SwervingLeft { 1.0 } else { -1.0 };
            let amp = script.param("amplitude_m", 1.5);
            let dur = script.param("duration_s", 1.6);
            p.lateral.push(Profile::eased(Axis::Time, vec![(t_on, 0.0), (t_on + 0.5 * dur, side * amp), (t_on + dur, 0.0)]));
            p.abnormal.push(span(t_on, t_on + dur));
        }
        Tailgating => {
            p.normal_subclass = Following;
            let gap = script.param("gap_m", 6.5);
            p.speed = SpeedPlan::Follow { agent: lead, gap, gain: 0.5, comfort: 2.5 };
            p.abnormal.push(AbnormalWhen::GapBelow { agent: lead, gap: script.param("threshold_m", 12.0) });
        }
        AggressiveShearingLeft | AggressiveShearingRight => {
            let side = if sub == AggressiveShearingLeft { 1.0 } else { -1.0 };
            let dur = script.param("duration_s", 1.5);
            let boost = script.param("delta_v", 2.0).min(v_max - 0.5 - v0).max(0.0);
            p.lateral.push(Profile::eased(Axis::Time, vec![(t_on, 0.0), (t_on + dur, side * w)]));
            p.speed = SpeedPlan::Profile(Profile::linear(Axis::Time, vec![(t_on - 1.0, v0), (t_on, v0 + boost)]));
            p.abnormal.push(span(t_on, t_on + dur));
        }
        _ => unreachable!("junction classes are rejected above"),
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eased_profile_hits_knots() {
        let p = Profile::eased(Axis::Time, vec![(1.0, 0.0), (2.0, 3.0), (4.0, -1.0)]);
        assert_eq!(p.eval(0.0, 0.0), 0.0);
        assert_eq!(p.eval(2.0, 0.0), 3.0);
        assert_eq!(p.eval(1.5, 0.0), 1.5);
        assert_eq!(p.eval(9.0, 0.0), -1.0);
    }

    #[test]
    fn oscillation_reaches_full_amplitude() {
        let o = Oscillation { start: 1.0, end: 5.0, amplitude: 1.0, period: 2.0, ramp: 0.5 };
        assert!((o.eval(1.5) - 1.0).abs() < 1e-12);
        assert!((o.eval(2.5) + 1.0).abs() < 1e-12);
        assert_eq!(o.eval(0.5), 0.0);
        assert_eq!(o.eval(5.5), 0.0);
    }

    #[test]
    fn every_class_has_a_feasible_world() {
        for c in Subclass::ALL {
            assert!(!feasible_worlds(c).is_empty());
        }
    }
}
