//! World geometry for the two navigation benchmarks.

use std::fmt;
use std::str::FromStr;

use nalgebra::Point2;
use serde::{Deserialize, Serialize};

use super::geometry::{Rect, Segment};
use crate::error::{Error, Result};

/// Number of discrete actions in every navigation world.
pub const NUM_ACTIONS: usize = 3;

/// Benchmark world identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum World {
    #[serde(rename = "u")]
    U,
    #[serde(rename = "s")]
    S,
}

impl fmt::Display for World {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            World::U => write!(f, "U"),
            World::S => write!(f, "S"),
        }
    }
}

impl FromStr for World {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "u" => Ok(World::U),
            "s" => Ok(World::S),
            other => Err(Error::Config(format!(
                "unknown world {other:?}; expected \"u\" or \"s\""
            ))),
        }
    }
}

/// Immutable environment geometry plus reward constants.
///
/// The unit square is bounded by walls on all sides; solid rectangular
/// obstacles carve the U- or S-shaped corridor. A straight unimpeded run
/// across the square takes `1 / step_length` ≈ 22 forward actions.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldSpec {
    name: World,
    bounds: Rect,
    walls: Vec<Segment>,
    obstacles: Vec<Rect>,
    goal_center: Point2<f64>,
    goal_radius: f64,
    step_length: f64,
    rotation: f64,
    goal_reward: f64,
    crash_penalty: f64,
}

impl WorldSpec {
    pub(crate) fn from_parts(
        name: World,
        obstacles: Vec<Rect>,
        goal_center: Point2<f64>,
        goal_radius: f64,
        crash_penalty: f64,
    ) -> Self {
        let bounds = Rect::new(0.0, 0.0, 1.0, 1.0);
        let mut walls: Vec<Segment> = bounds.edges().to_vec();
        for obstacle in &obstacles {
            walls.extend_from_slice(&obstacle.edges());
        }
        let step_length = 0.045;
        let crossing = (bounds.max_x - bounds.min_x) / step_length;
        assert!(
            (20.0..=25.0).contains(&crossing),
            "crossing takes {crossing:.1} moves, outside [20, 25]"
        );
        WorldSpec {
            name,
            bounds,
            walls,
            obstacles,
            goal_center,
            goal_radius,
            step_length,
            rotation: std::f64::consts::FRAC_PI_4,
            goal_reward: 1.0,
            crash_penalty,
        }
    }

    pub fn name(&self) -> World {
        self.name
    }

    pub fn bounds(&self) -> &Rect {
        &self.bounds
    }

    pub fn walls(&self) -> &[Segment] {
        &self.walls
    }

    pub fn obstacles(&self) -> &[Rect] {
        &self.obstacles
    }

    pub fn goal_center(&self) -> Point2<f64> {
        self.goal_center
    }

    pub fn goal_radius(&self) -> f64 {
        self.goal_radius
    }

    pub fn step_length(&self) -> f64 {
        self.step_length
    }

    /// Rotation angle per rotate action (π/4).
    pub fn rotation(&self) -> f64 {
        self.rotation
    }

    pub fn goal_reward(&self) -> f64 {
        self.goal_reward
    }

    pub fn crash_penalty(&self) -> f64 {
        self.crash_penalty
    }

    /// Whether `(x, y)` lies in free space: inside the bounds and not inside
    /// (or on the boundary of) any obstacle.
    pub fn is_free(&self, x: f64, y: f64) -> bool {
        if !self.bounds.contains(x, y) {
            return false;
        }
        !self.obstacles.iter().any(|o| o.contains(x, y))
    }

    /// Whether `(x, y)` is inside the goal circle.
    pub fn in_goal(&self, x: f64, y: f64) -> bool {
        let dx = x - self.goal_center.x;
        let dy = y - self.goal_center.y;
        dx * dx + dy * dy <= self.goal_radius * self.goal_radius
    }
}

/// Construct the fixed geometry of a benchmark world.
///
/// The U-world has one central obstacle and penalizes crashes with −1; the
/// S-world has two interleaved obstacles and penalizes crashes with −10.
/// Identical on every call.
pub fn make_world(name: World) -> WorldSpec {
    match name {
        World::U => WorldSpec::from_parts(
            World::U,
            vec![Rect::new(0.3, 0.0, 0.7, 0.6)],
            Point2::new(0.85, 0.15),
            0.1,
            -1.0,
        ),
        World::S => WorldSpec::from_parts(
            World::S,
            vec![
                Rect::new(0.3, 0.0, 0.45, 0.65),
                Rect::new(0.6, 0.35, 0.75, 1.0),
            ],
            Point2::new(0.9, 0.1),
            0.1,
            -10.0,
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crash_penalties_match_worlds() {
        assert_eq!(make_world(World::U).crash_penalty(), -1.0);
        assert_eq!(make_world(World::S).crash_penalty(), -10.0);
    }

    #[test]
    fn crossing_takes_22_moves() {
        let w = make_world(World::U);
        assert_eq!((1.0 / w.step_length()).floor(), 22.0);
    }

    #[test]
    fn worlds_are_reproducible() {
        assert_eq!(make_world(World::U), make_world(World::U));
        assert_eq!(make_world(World::S), make_world(World::S));
    }

    #[test]
    fn free_space_excludes_obstacles() {
        let w = make_world(World::U);
        assert!(w.is_free(0.15, 0.15));
        assert!(!w.is_free(0.5, 0.3));
        assert!(!w.is_free(1.2, 0.5));
    }

    #[test]
    fn goal_regions() {
        let u = make_world(World::U);
        assert!(u.in_goal(0.85, 0.15));
        assert!(u.in_goal(0.85, 0.249));
        assert!(!u.in_goal(0.85, 0.26));
    }

    #[test]
    fn world_parsing() {
        assert_eq!("u".parse::<World>().unwrap(), World::U);
        assert_eq!("S".parse::<World>().unwrap(), World::S);
        assert!("x".parse::<World>().is_err());
    }
}
