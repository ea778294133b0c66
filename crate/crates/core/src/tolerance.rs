//! Numerical tolerances used when validating states and channels.
//!
//! Every threshold is a fixed base value multiplied by one global scale,
//! so a whole run can be tightened or relaxed from a single knob.

/// Base tolerances, all multiplied by [`Tolerances::scale`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub scale: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { scale: 1.0 }
    }
}

impl Tolerances {
    pub fn scaled(scale: f64) -> Self {
        Self { scale }
    }

    /// Max |ρ − ρ†| for a battery state.
    pub fn hermiticity(&self) -> f64 {
        1e-11 * self.scale
    }

    /// |tr ρ − 1| for a battery state.
    pub fn trace(&self) -> f64 {
        1e-10 * self.scale
    }

    /// Most negative eigenvalue accepted for a battery state.
    pub fn positivity(&self) -> f64 {
        1e-9 * self.scale
    }

    /// Atom-state eigenvalues in `[-atom_clamp, 0)` are clamped to zero.
    pub fn atom_clamp(&self) -> f64 {
        1e-10 * self.scale
    }

    /// Atom-state eigenvalues below this are dropped from the Kraus set.
    pub fn atom_drop(&self) -> f64 {
        1e-14
    }

    /// ‖∑K†K − 1‖_max for a channel.
    pub fn completeness(&self) -> f64 {
        1e-10 * self.scale
    }

    /// Most negative eigenvalue accepted when computing ergotropy.
    pub fn ergotropy_positivity(&self) -> f64 {
        1e-8 * self.scale
    }
}
