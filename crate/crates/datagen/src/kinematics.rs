use std::f64::consts::PI;

/// Kinematic bicycle state, rear-axle reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleState {
    pub x: f64,
    pub y: f64,
    /// Radians in (-pi, pi].
    pub heading: f64,
    /// Metres per second, never negative.
    pub speed: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlCommand {
    pub accel: f64,
    /// Front-wheel angle in radians.
    pub steer: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleLimits {
    pub wheelbase: f64,
    pub a_max: f64,
    pub steer_max: f64,
    pub v_max: f64,
}

impl Default for VehicleLimits {
    fn default() -> Self {
        VehicleLimits { wheelbase: 2.5, a_max: 4.0, steer_max: 0.5, v_max: 20.0 }
    }
}

impl ControlCommand {
    pub fn clamped(self, limits: &VehicleLimits) -> Self {
        ControlCommand {
            accel: self.accel.clamp(-limits.a_max, limits.a_max),
            steer: self.steer.clamp(-limits.steer_max, limits.steer_max),
        }
    }
}

pub fn wrap_angle(a: f64) -> f64 {
    let mut a = a % (2.0 * PI);
    if a <= -PI {
        a += 2.0 * PI;
    } else if a > PI {
        a -= 2.0 * PI;
    }
    a
}

/// One explicit Euler step of the kinematic bicycle model.
pub fn step_kinematics(state: VehicleState, cmd: ControlCommand, wheelbase: f64, dt: f64) -> VehicleState {
    let v = state.speed;
    VehicleState {
        x: state.x + v * state.heading.cos() * dt,
        y: state.y + v * state.heading.sin() * dt,
        heading: wrap_angle(state.heading + v / wheelbase * cmd.steer.tan() * dt),
        speed: (v + cmd.accel * dt).max(0.0),
    }
}
