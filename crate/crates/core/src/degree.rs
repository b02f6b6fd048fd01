//! Grading conventions: stem, Adams filtration, synthetic degree.

use core::fmt;

/// Tri-degree of a chart element.
///
/// `λ` has tri-degree `(0, 0, -1)`; a module generator in filtration `f`
/// starts at synthetic degree `f`, so every element satisfies `syndeg <= filt`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct TriDegree {
    pub stem: i32,
    pub filt: i32,
    pub syndeg: i32,
}

impl TriDegree {
    pub fn new(stem: i32, filt: i32, syndeg: i32) -> Self {
        TriDegree { stem, filt, syndeg }
    }

    /// Degree of a fresh generator: synthetic degree equals filtration.
    pub fn generator(stem: i32, filt: i32) -> Self {
        TriDegree { stem, filt, syndeg: filt }
    }

    /// Multiply by `λ^k`.
    pub fn lambda_shift(self, k: u32) -> Self {
        TriDegree { stem: self.stem, filt: self.filt, syndeg: self.syndeg - k as i32 }
    }

    /// Where a `d_r` differential out of this degree lands: `(s-1, f+r, d+1)`.
    pub fn differential_target(self, r: u32) -> Self {
        TriDegree {
            stem: self.stem - 1,
            filt: self.filt + r as i32,
            syndeg: self.syndeg + 1,
        }
    }

    /// λ-exponent `f - d` of an element at this tri-degree.
    pub fn lambda_exp(self) -> i32 {
        self.filt - self.syndeg
    }
}

impl fmt::Display for TriDegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.stem, self.filt, self.syndeg)
    }
}

/// Inclusive rectangular chart region: the range over which a chart's
/// generator list is complete.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Window {
    pub s_min: i32,
    pub s_max: i32,
    pub f_min: i32,
    pub f_max: i32,
}

impl Window {
    pub fn new(s_min: i32, s_max: i32, f_min: i32, f_max: i32) -> Self {
        Window { s_min, s_max, f_min, f_max }
    }

    pub fn contains(&self, stem: i32, filt: i32) -> bool {
        stem >= self.s_min && stem <= self.s_max && filt >= self.f_min && filt <= self.f_max
    }

    pub fn contains_window(&self, other: &Window) -> bool {
        self.s_min <= other.s_min
            && self.s_max >= other.s_max
            && self.f_min <= other.f_min
            && self.f_max >= other.f_max
    }

    /// A bidegree is safe when every differential of page `r <= r_max` into or
    /// out of it stays inside the window. Filtrations below zero are vacuously
    /// contained (nothing lives there).
    pub fn is_safe(&self, stem: i32, filt: i32, r_max: u32) -> bool {
        if !self.contains(stem, filt) {
            return false;
        }
        for r in 2..=r_max {
            let r = r as i32;
            let src_f = filt - r;
            if src_f >= 0 && !self.contains(stem + 1, src_f) {
                return false;
            }
            if !self.contains(stem - 1, filt + r) {
                return false;
            }
        }
        true
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{} {}..{}", self.s_min, self.s_max, self.f_min, self.f_max)
    }
}

/// Map a motivic `(stem, weight)` index to the synthetic `(stem, syndeg)`
/// index: `π_{s,w} -> π_{s,2w-s}`.
pub fn motivic_to_synthetic_degree(stem: i32, weight: i32) -> (i32, i32) {
    (stem, 2 * weight - stem)
}

/// λ-exponent of the image of the motivic parameter τ under the same map.
pub const TAU_LAMBDA_EXP: u32 = 2;
