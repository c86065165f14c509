//! Benchmark drift functions used in the simulation studies.

use core::f64::consts::PI;

use crate::basis::wrap_unit;
use crate::error::{invalid, Result};

/// A named 1-periodic drift.
#[derive(Clone, Copy, Debug)]
pub struct NamedDrift {
    pub name: &'static str,
    pub f: fn(f64) -> f64,
}

impl NamedDrift {
    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }
}

/// `b(x) = 12 (a(x̃) + 0.05)` with the piecewise `a` below; Hölder of order 1.5.
///
/// ```text
/// a(x) = 2/7 − x − (2/7)(1 − 3x)·√|1 − 3x|   x ∈ [0, 2/3)
/// a(x) = −2/7 + (2/7)x                      x ∈ [2/3, 1]
/// ```
pub fn main_drift(x: f64) -> f64 {
    let x = wrap_unit(x);
    let a = if x < 2.0 / 3.0 {
        let u = 1.0 - 3.0 * x;
        2.0 / 7.0 - x - (2.0 / 7.0) * u * libm::sqrt(libm::fabs(u))
    } else {
        -2.0 / 7.0 + (2.0 / 7.0) * x
    };
    12.0 * (a + 0.05)
}

/// `8 sin(4πx)`
pub fn b1(x: f64) -> f64 {
    8.0 * libm::sin(4.0 * PI * wrap_unit(x))
}

/// `200 x̃(1 − 2x̃)³` on `[0, ½)`, `−(400/3)(1 − x̃)(2x̃ − 1)³` on `[½, 1)`.
pub fn b2(x: f64) -> f64 {
    let x = wrap_unit(x);
    if x < 0.5 {
        let u = 1.0 - 2.0 * x;
        200.0 * x * u * u * u
    } else {
        let u = 2.0 * x - 1.0;
        -(400.0 / 3.0) * (1.0 - x) * u * u * u
    }
}

/// `−8 sin(π(4x − 1))` on `x̃ ∈ [¼, ¾]`, zero elsewhere.
pub fn b3(x: f64) -> f64 {
    let x = wrap_unit(x);
    if (0.25..=0.75).contains(&x) {
        -8.0 * libm::sin(PI * (4.0 * x - 1.0))
    } else {
        0.0
    }
}

pub const NAMES: [&str; 4] = ["main", "b1", "b2", "b3"];

/// Looks up a drift by name: `main`, `b1`, `b2` or `b3`.
pub fn gallery(name: &str) -> Result<NamedDrift> {
    let f: fn(f64) -> f64 = match name {
        "main" => main_drift,
        "b1" => b1,
        "b2" => b2,
        "b3" => b3,
        other => {
            return Err(invalid(alloc::format!(
                "unknown drift '{other}' (expected one of main, b1, b2, b3)"
            )))
        }
    };
    let name = NAMES.iter().find(|n| **n == name).copied().unwrap_or("main");
    Ok(NamedDrift { name, f })
}
