//! Exact rotation bookkeeping: rational turns, O(2) elements with rational
//! angle data, and rational snapping of float angles.
//!
//! Turns are fractions of a full revolution kept reduced and in [0, 1).
//! They are the exact currency of the engine: all gluing rotation parts,
//! holonomy elements, and cone-angle fractional parts live here, while
//! coordinates stay in floats.

use std::f64::consts::TAU;
use std::fmt;

use crate::geom::Isometry;

fn gcd(mut a: i64, mut b: i64) -> i64 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Rotation by 2π·(num/den), stored reduced with 0 ≤ num < den.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RationalTurn {
    num: i64,
    den: i64,
}

impl RationalTurn {
    pub const ZERO: RationalTurn = RationalTurn { num: 0, den: 1 };
    pub const HALF: RationalTurn = RationalTurn { num: 1, den: 2 };

    /// Reduces and wraps into [0, 1). Panics on a zero denominator.
    pub fn new(num: i64, den: i64) -> RationalTurn {
        assert!(den != 0, "zero denominator");
        let (mut num, mut den) = if den < 0 { (-num, -den) } else { (num, den) };
        let g = gcd(num, den);
        if g > 1 {
            num /= g;
            den /= g;
        }
        num = num.rem_euclid(den);
        RationalTurn { num, den }
    }

    pub fn numerator(self) -> i64 {
        self.num
    }

    pub fn denominator(self) -> i64 {
        self.den
    }

    pub fn is_zero(self) -> bool {
        self.num == 0
    }

    /// Fraction value in [0, 1).
    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn radians(self) -> f64 {
        TAU * self.num as f64 / self.den as f64
    }

    pub fn add(self, o: RationalTurn) -> RationalTurn {
        let den = (self.den as i128) * (o.den as i128);
        let num = (self.num as i128) * (o.den as i128) + (o.num as i128) * (self.den as i128);
        Self::from_i128(num, den)
    }

    pub fn neg(self) -> RationalTurn {
        RationalTurn::new(-self.num, self.den)
    }

    pub fn sub(self, o: RationalTurn) -> RationalTurn {
        self.add(o.neg())
    }

    pub fn times(self, k: i64) -> RationalTurn {
        Self::from_i128(self.num as i128 * k as i128, self.den as i128)
    }

    fn from_i128(num: i128, den: i128) -> RationalTurn {
        let (mut num, mut den) = if den < 0 { (-num, -den) } else { (num, den) };
        let g = gcd128(num, den);
        if g > 1 {
            num /= g;
            den /= g;
        }
        num = num.rem_euclid(den);
        assert!(den <= i64::MAX as i128, "turn denominator overflow");
        RationalTurn {
            num: num as i64,
            den: den as i64,
        }
    }

    /// Multiplicative order as a rotation: the reduced denominator.
    pub fn order(self) -> i64 {
        self.den
    }
}

fn gcd128(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl fmt::Display for RationalTurn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl fmt::Debug for RationalTurn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// Element of O(2) with exact rational angle data.
///
/// `reflect = false`: rotation by 2π·turn.
/// `reflect = true`: reflection with matrix [[cos a, sin a], [sin a, −cos a]]
/// where a = 2π·turn, i.e. the reflection about the axis at angle π·turn.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct OrthogonalPart {
    pub turn: RationalTurn,
    pub reflect: bool,
}

impl OrthogonalPart {
    pub const IDENTITY: OrthogonalPart = OrthogonalPart {
        turn: RationalTurn::ZERO,
        reflect: false,
    };

    pub fn rotation(turn: RationalTurn) -> OrthogonalPart {
        OrthogonalPart {
            turn,
            reflect: false,
        }
    }

    pub fn reflection(turn: RationalTurn) -> OrthogonalPart {
        OrthogonalPart {
            turn,
            reflect: true,
        }
    }

    pub fn is_identity(self) -> bool {
        !self.reflect && self.turn.is_zero()
    }

    /// self ∘ rhs (rhs applied first). Uses the semidirect-product rule:
    /// a reflection conjugates the incoming rotation to its inverse.
    pub fn compose(self, rhs: OrthogonalPart) -> OrthogonalPart {
        let turn = if self.reflect {
            self.turn.sub(rhs.turn)
        } else {
            self.turn.add(rhs.turn)
        };
        OrthogonalPart {
            turn,
            reflect: self.reflect != rhs.reflect,
        }
    }

    pub fn inverse(self) -> OrthogonalPart {
        if self.reflect {
            self
        } else {
            OrthogonalPart {
                turn: self.turn.neg(),
                reflect: false,
            }
        }
    }

    /// Angle parameter in radians: rotation angle, or 2× the reflection axis angle.
    pub fn angle(self) -> f64 {
        self.turn.radians()
    }

    pub fn matrix(self) -> Isometry {
        if self.reflect {
            Isometry::reflection(self.angle())
        } else {
            Isometry::rotation(self.angle())
        }
    }
}

impl fmt::Display for OrthogonalPart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.reflect {
            write!(f, "refl {}", self.turn)
        } else {
            write!(f, "rot {}", self.turn)
        }
    }
}

/// Finds the fraction p/q, q ≤ q_max, nearest to `x` on the real line
/// (no mod-1 wrap). Returns (p, q, distance) with p/q reduced.
pub fn snap_ratio(x: f64, q_max: i64) -> (i64, i64, f64) {
    assert!(q_max >= 1 && q_max <= 1_000_000, "q_max out of range");
    assert!(x.abs() < 1e15, "ratio out of range");
    let mut best = (0i64, 1i64, f64::INFINITY);
    for q in 1..=q_max {
        let p = (x * q as f64).round() as i64;
        let err = (x - p as f64 / q as f64).abs();
        if err < best.2 {
            let g = gcd(p, q);
            best = (p / g.max(1), q / g.max(1), err);
        }
    }
    best
}

/// Result of snapping a real in [0, 1) to a fraction with bounded denominator.
#[derive(Debug, Clone, Copy)]
pub struct FractionSnap {
    pub best: RationalTurn,
    pub best_err: f64,
    /// Closest reduced fraction different from `best`, with its distance.
    pub second: Option<(RationalTurn, f64)>,
}

/// Finds the fraction p/q, q ≤ q_max, nearest to `x` (taken mod 1).
///
/// Exhaustive over denominators; q_max is expected to stay small (≤ 10⁶).
pub fn snap_unit_fraction(x: f64, q_max: i64) -> FractionSnap {
    assert!(q_max >= 1 && q_max <= 1_000_000, "q_max out of range");
    let x = x.rem_euclid(1.0);
    let mut best: Option<(RationalTurn, f64)> = None;
    let mut second: Option<(RationalTurn, f64)> = None;
    for q in 1..=q_max {
        let p = (x * q as f64).round() as i64;
        let err = (x - p as f64 / q as f64).abs();
        let frac = RationalTurn::new(p, q);
        match best {
            None => best = Some((frac, err)),
            Some((bf, be)) => {
                if frac == bf {
                    if err < be {
                        best = Some((frac, err));
                    }
                } else if err < be {
                    second = Some(best.unwrap());
                    best = Some((frac, err));
                } else {
                    match second {
                        Some((sf, se)) if sf != frac && err >= se => {}
                        Some((sf, _)) if sf == frac => {}
                        _ => second = Some((frac, err)),
                    }
                }
            }
        }
    }
    let (best, best_err) = best.unwrap();
    FractionSnap {
        best,
        best_err,
        second,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::v;

    #[test]
    fn turn_reduces_and_wraps() {
        assert_eq!(RationalTurn::new(2, 4), RationalTurn::new(1, 2));
        assert_eq!(RationalTurn::new(-1, 4), RationalTurn::new(3, 4));
        assert_eq!(RationalTurn::new(5, 4), RationalTurn::new(1, 4));
        assert_eq!(RationalTurn::new(3, -4), RationalTurn::new(1, 4));
        assert_eq!(RationalTurn::new(7, 7), RationalTurn::ZERO);
    }

    #[test]
    fn turn_arithmetic() {
        let a = RationalTurn::new(1, 6);
        let b = RationalTurn::new(2, 3);
        assert_eq!(a.add(b), RationalTurn::new(5, 6));
        assert_eq!(b.add(b), RationalTurn::new(1, 3));
        assert_eq!(a.sub(b), RationalTurn::new(1, 2));
        assert_eq!(a.times(6), RationalTurn::ZERO);
    }

    // Composition rules checked against explicit 2×2 float matrices.
    #[test]
    fn orthogonal_composition_matches_matrices() {
        let parts = [
            OrthogonalPart::rotation(RationalTurn::new(0, 1)),
            OrthogonalPart::rotation(RationalTurn::new(1, 3)),
            OrthogonalPart::rotation(RationalTurn::new(5, 7)),
            OrthogonalPart::reflection(RationalTurn::new(0, 1)),
            OrthogonalPart::reflection(RationalTurn::new(1, 4)),
            OrthogonalPart::reflection(RationalTurn::new(3, 5)),
        ];
        for &p in &parts {
            for &q in &parts {
                let exact = p.compose(q).matrix();
                let float = p.matrix().compose(&q.matrix());
                assert!(exact.max_matrix_dev(&float) < 1e-12, "compose {p} ∘ {q}");
            }
            let inv = p.inverse();
            assert!(p.compose(inv).is_identity());
            assert!(inv.compose(p).is_identity());
            let probe = v(0.3, -1.7);
            let round = p.matrix().apply_vec(inv.matrix().apply_vec(probe));
            assert!(round.dist(probe) < 1e-12);
        }
    }

    #[test]
    fn reflection_axis_convention() {
        // Axis at angle π·t maps a vector at angle φ to 2π·t − φ.
        let m = OrthogonalPart::reflection(RationalTurn::new(1, 4)).matrix();
        let im = m.apply_vec(v(1.0, 0.0));
        assert!(im.dist(v(0.0, 1.0)) < 1e-15);
    }

    #[test]
    fn snap_finds_simple_fractions() {
        let s = snap_unit_fraction(0.75 + 3e-10, 3600);
        assert_eq!(s.best, RationalTurn::new(3, 4));
        assert!(s.best_err < 1e-9);
        let (_, second_err) = s.second.unwrap();
        assert!(second_err > 1e-5);
    }

    #[test]
    fn snap_rejects_one_over_pi() {
        // 1/π has no q ≤ 3600 approximation anywhere near 1e−9.
        let s = snap_unit_fraction(1.0 / std::f64::consts::PI, 3600);
        assert!(s.best_err > 1e-8);
    }
}
