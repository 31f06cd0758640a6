//! Small 2-D float geometry kit: vectors, plane isometries, angle helpers.

use std::f64::consts::{PI, TAU};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

pub const fn v(x: f64, y: f64) -> Vec2 {
    Vec2 { x, y }
}

impl Vec2 {
    pub const ZERO: Vec2 = v(0.0, 0.0);

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the cross product; positive when `o` is counterclockwise from `self`.
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Vec2) -> f64 {
        (self - o).norm()
    }

    pub fn unit(self) -> Vec2 {
        let n = self.norm();
        v(self.x / n, self.y / n)
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn perp(self) -> Vec2 {
        v(-self.y, self.x)
    }

    pub fn scale(self, s: f64) -> Vec2 {
        v(self.x * s, self.y * s)
    }

    pub fn from_angle(a: f64) -> Vec2 {
        let (s, c) = a.sin_cos();
        v(c, s)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl std::ops::Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        v(self.x + o.x, self.y + o.y)
    }
}

impl std::ops::Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        v(self.x - o.x, self.y - o.y)
    }
}

impl std::ops::Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        v(-self.x, -self.y)
    }
}

/// Signed angle from `u` to `w`, counterclockwise positive, in (−π, π].
pub fn signed_angle(u: Vec2, w: Vec2) -> f64 {
    let a = u.cross(w).atan2(u.dot(w));
    // atan2 returns −π for the straight-back case depending on rounding; pin the branch.
    if a <= -PI {
        PI
    } else {
        a
    }
}

/// Reduce an angle to [0, 2π).
pub fn wrap_tau(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Distance from `a` to the nearest multiple of 2π.
pub fn dist_mod_tau(a: f64) -> f64 {
    let r = wrap_tau(a);
    r.min(TAU - r)
}

/// Orientation-preserving or -reversing linear map of the plane plus a translation.
///
/// Application order: p ↦ M p + t.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Isometry {
    /// Row-major 2×2 orthogonal matrix.
    pub m: [[f64; 2]; 2],
    pub t: Vec2,
}

impl Isometry {
    pub const IDENTITY: Isometry = Isometry {
        m: [[1.0, 0.0], [0.0, 1.0]],
        t: Vec2::ZERO,
    };

    pub fn rotation(angle: f64) -> Isometry {
        let (s, c) = angle.sin_cos();
        Isometry {
            m: [[c, -s], [s, c]],
            t: Vec2::ZERO,
        }
    }

    /// Reflection whose matrix is [[cos a, sin a], [sin a, −cos a]] (axis at angle a/2).
    pub fn reflection(angle: f64) -> Isometry {
        let (s, c) = angle.sin_cos();
        Isometry {
            m: [[c, s], [s, -c]],
            t: Vec2::ZERO,
        }
    }

    pub fn translation(t: Vec2) -> Isometry {
        Isometry {
            m: Isometry::IDENTITY.m,
            t,
        }
    }

    pub fn with_translation(self, t: Vec2) -> Isometry {
        Isometry { m: self.m, t }
    }

    pub fn apply(&self, p: Vec2) -> Vec2 {
        v(
            self.m[0][0] * p.x + self.m[0][1] * p.y + self.t.x,
            self.m[1][0] * p.x + self.m[1][1] * p.y + self.t.y,
        )
    }

    /// Applies only the linear part (directions, tangent vectors).
    pub fn apply_vec(&self, p: Vec2) -> Vec2 {
        v(
            self.m[0][0] * p.x + self.m[0][1] * p.y,
            self.m[1][0] * p.x + self.m[1][1] * p.y,
        )
    }

    /// self ∘ other (apply `other` first).
    pub fn compose(&self, other: &Isometry) -> Isometry {
        let a = self.m;
        let b = other.m;
        Isometry {
            m: [
                [
                    a[0][0] * b[0][0] + a[0][1] * b[1][0],
                    a[0][0] * b[0][1] + a[0][1] * b[1][1],
                ],
                [
                    a[1][0] * b[0][0] + a[1][1] * b[1][0],
                    a[1][0] * b[0][1] + a[1][1] * b[1][1],
                ],
            ],
            t: self.apply(other.t),
        }
    }

    /// Inverse; valid because the linear part is orthogonal (Mᵀ = M⁻¹).
    pub fn inverse(&self) -> Isometry {
        let mt = [[self.m[0][0], self.m[1][0]], [self.m[0][1], self.m[1][1]]];
        let ti = v(
            -(mt[0][0] * self.t.x + mt[0][1] * self.t.y),
            -(mt[1][0] * self.t.x + mt[1][1] * self.t.y),
        );
        Isometry { m: mt, t: ti }
    }

    pub fn det(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn max_matrix_dev(&self, other: &Isometry) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                d = d.max((self.m[i][j] - other.m[i][j]).abs());
            }
        }
        d
    }
}

/// Specular reflection of `dir` at a wall with unit normal `n`.
pub fn reflect_dir(dir: Vec2, n: Vec2) -> Vec2 {
    dir - n.scale(2.0 * dir.dot(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signed_angle_quadrants() {
        let e = 1e-15;
        assert!((signed_angle(v(1.0, 0.0), v(0.0, 1.0)) - PI / 2.0).abs() < e);
        assert!((signed_angle(v(0.0, 1.0), v(1.0, 0.0)) + PI / 2.0).abs() < e);
        assert!((signed_angle(v(1.0, 0.0), v(-1.0, 0.0)) - PI).abs() < e);
    }

    #[test]
    fn isometry_inverse_roundtrip() {
        let g = Isometry::rotation(0.7).with_translation(v(3.0, -2.0));
        let p = v(0.3, 1.9);
        let q = g.inverse().apply(g.apply(p));
        assert!(p.dist(q) < 1e-14);
    }

    #[test]
    fn reflection_matrix_is_involution() {
        let r = Isometry::reflection(1.1);
        let p = v(-0.4, 2.2);
        assert!(r.apply(r.apply(p)).dist(p) < 1e-15);
        assert!((r.det() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn reflect_dir_specular() {
        let d = reflect_dir(v(1.0, -1.0).unit(), v(0.0, -1.0));
        assert!(d.dist(v(1.0, 1.0).unit()) < 1e-15);
    }
}
