//! Positions of the base station, the reflecting surface and the users on a
//! flat 3D grid (meters).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum RIS-to-user separation enforced by the optimizer.
pub const SEPARATION_MIN: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point3D {
    pub x: f64,
    pub y: f64,
    /// Height above ground.
    pub h: f64,
}

impl Point3D {
    pub const fn new(x: f64, y: f64, h: f64) -> Self {
        Self { x, y, h }
    }

    pub fn distance(&self, other: &Point3D) -> f64 {
        distance(self, other)
    }
}

/// Euclidean distance in meters.
pub fn distance(a: &Point3D, b: &Point3D) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    let dh = a.h - b.h;
    (dx * dx + dy * dy + dh * dh).sqrt()
}

/// Axis-aligned box of admissible RIS positions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DeploymentRegion {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub h_min: f64,
    pub h_max: f64,
}

impl DeploymentRegion {
    pub fn new(x: (f64, f64), y: (f64, f64), h: (f64, f64)) -> Result<Self> {
        let region = Self {
            x_min: x.0,
            x_max: x.1,
            y_min: y.0,
            y_max: y.1,
            h_min: h.0,
            h_max: h.1,
        };
        region.validate()?;
        Ok(region)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.x_min <= self.x_max && self.y_min <= self.y_max && self.h_min <= self.h_max;
        let finite = [self.x_min, self.x_max, self.y_min, self.y_max, self.h_min, self.h_max]
            .iter()
            .all(|v| v.is_finite());
        if ok && finite {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("degenerate deployment region {self:?}")))
        }
    }

    /// Closed-interval membership on all three axes.
    pub fn contains(&self, p: &Point3D) -> bool {
        (self.x_min..=self.x_max).contains(&p.x)
            && (self.y_min..=self.y_max).contains(&p.y)
            && (self.h_min..=self.h_max).contains(&p.h)
    }

    pub fn clamp(&self, p: Point3D) -> Point3D {
        Point3D {
            x: p.x.clamp(self.x_min, self.x_max),
            y: p.y.clamp(self.y_min, self.y_max),
            h: p.h.clamp(self.h_min, self.h_max),
        }
    }

    /// Uniformly spaced grid point `(i, j, k)` of an `nx × ny × nh` lattice
    /// spanning the box (a single point per axis sits at the axis midpoint).
    pub fn grid_point(&self, n: [usize; 3], idx: [usize; 3]) -> Point3D {
        fn axis(lo: f64, hi: f64, n: usize, i: usize) -> f64 {
            if n <= 1 {
                0.5 * (lo + hi)
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        }
        Point3D {
            x: axis(self.x_min, self.x_max, n[0], idx[0]),
            y: axis(self.y_min, self.y_max, n[1], idx[1]),
            h: axis(self.h_min, self.h_max, n[2], idx[2]),
        }
    }
}

impl Default for DeploymentRegion {
    /// Deployment box of the default evaluation setup.
    fn default() -> Self {
        Self {
            x_min: 50.0,
            x_max: 450.0,
            y_min: 0.0,
            y_max: 400.0,
            h_min: 35.0,
            h_max: 90.0,
        }
    }
}

pub fn region_contains(region: &DeploymentRegion, p: &Point3D) -> bool {
    region.contains(p)
}

/// Base station, users and RIS.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkLayout {
    pub qbs: Point3D,
    pub users: Vec<Point3D>,
    pub ris: Point3D,
}

impl NetworkLayout {
    pub fn new(qbs: Point3D, users: Vec<Point3D>, ris: Point3D) -> Result<Self> {
        if users.is_empty() {
            return Err(Error::InvalidArgument("layout needs at least one user".into()));
        }
        Ok(Self { qbs, users, ris })
    }

    pub fn user(&self, index: usize) -> Result<&Point3D> {
        self.users.get(index).ok_or(Error::IndexOutOfRange {
            index,
            len: self.users.len(),
        })
    }

    /// QBS → RIS leg.
    pub fn d_sr(&self) -> f64 {
        distance(&self.qbs, &self.ris)
    }

    /// RIS → user leg.
    pub fn d_ri(&self, index: usize) -> Result<f64> {
        Ok(distance(&self.ris, self.user(index)?))
    }

    pub fn e2e_distance(&self, index: usize) -> Result<f64> {
        e2e_distance(self, index)
    }

    /// Smallest RIS-to-user distance.
    pub fn min_separation(&self) -> f64 {
        self.users
            .iter()
            .map(|u| distance(&self.ris, u))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn separation_ok(&self) -> bool {
        self.min_separation() >= SEPARATION_MIN
    }
}

/// Reflected path length QBS → RIS → user.
pub fn e2e_distance(layout: &NetworkLayout, user_index: usize) -> Result<f64> {
    let user = layout.user(user_index)?;
    Ok(distance(&layout.qbs, &layout.ris) + distance(&layout.ris, user))
}
