use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::CoreError;

/// Closed set of maneuver classes: 13 abnormal and 9 normal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subclass {
    // abnormal
    GhostDriver,
    LeaveRoad,
    Thwarting,
    CancelTurn,
    LastMinuteTurn,
    EnterWrongLane,
    Staggering,
    PushingAway,
    SwervingLeft,
    SwervingRight,
    Tailgating,
    AggressiveShearingLeft,
    AggressiveShearingRight,
    // normal
    Straight,
    TurnLeft,
    TurnRight,
    Following,
    SideBySide,
    LaneChangeLeft,
    LaneChangeRight,
    Brake,
    Accelerate,
}

impl Subclass {
    pub const ALL: [Subclass; 22] = [
        Subclass::GhostDriver,
        Subclass::LeaveRoad,
        Subclass::Thwarting,
        Subclass::CancelTurn,
        Subclass::LastMinuteTurn,
        Subclass::EnterWrongLane,
        Subclass::Staggering,
        Subclass::PushingAway,
        Subclass::SwervingLeft,
        Subclass::SwervingRight,
        Subclass::Tailgating,
        Subclass::AggressiveShearingLeft,
        Subclass::AggressiveShearingRight,
        Subclass::Straight,
        Subclass::TurnLeft,
        Subclass::TurnRight,
        Subclass::Following,
        Subclass::SideBySide,
        Subclass::LaneChangeLeft,
        Subclass::LaneChangeRight,
        Subclass::Brake,
        Subclass::Accelerate,
    ];

    pub fn abnormal() -> impl Iterator<Item = Subclass> {
        Self::ALL.into_iter().filter(|s| s.is_abnormal())
    }

    pub fn normal() -> impl Iterator<Item = Subclass> {
        Self::ALL.into_iter().filter(|s| !s.is_abnormal())
    }

    pub fn is_abnormal(self) -> bool {
        (self as usize) < 13
    }

    pub fn name(self) -> &'static str {
        match self {
            Subclass::GhostDriver => "ghost_driver",
            Subclass::LeaveRoad => "leave_road",
            Subclass::Thwarting => "thwarting",
            Subclass::CancelTurn => "cancel_turn",
            Subclass::LastMinuteTurn => "last_minute_turn",
            Subclass::EnterWrongLane => "enter_wrong_lane",
            Subclass::Staggering => "staggering",
            Subclass::PushingAway => "pushing_away",
            Subclass::SwervingLeft => "swerving_left",
            Subclass::SwervingRight => "swerving_right",
            Subclass::Tailgating => "tailgating",
            Subclass::AggressiveShearingLeft => "aggressive_shearing_left",
            Subclass::AggressiveShearingRight => "aggressive_shearing_right",
            Subclass::Straight => "straight",
            Subclass::TurnLeft => "turn_left",
            Subclass::TurnRight => "turn_right",
            Subclass::Following => "following",
            Subclass::SideBySide => "side_by_side",
            Subclass::LaneChangeLeft => "lane_change_left",
            Subclass::LaneChangeRight => "lane_change_right",
            Subclass::Brake => "brake",
            Subclass::Accelerate => "accelerate",
        }
    }
}

impl fmt::Display for Subclass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Subclass {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Subclass::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| CoreError::UnknownSubclass(s.to_string()))
    }
}
