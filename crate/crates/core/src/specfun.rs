//! Spherical Bessel functions of the first kind and associated Legendre
//! functions, restricted to the integer orders used by the breather modes.
//!
//! Associated Legendre functions carry the Condon–Shortley phase `(-1)^n`.

use crate::error::{Error, Result};

/// Largest polar order supported by [`spherical_bessel_j`] and
/// [`assoc_legendre_p`].
pub const MAX_ORDER: u32 = 64;

/// Polar order `l` and azimuthal order `n` of a spinning breather mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct ModeIndex {
    l: u32,
    n: i32,
}

impl ModeIndex {
    /// The spherically symmetric mode `l = n = 0`.
    pub const SPHERICAL: ModeIndex = ModeIndex { l: 0, n: 0 };

    pub fn new(l: u32, n: i32) -> Result<Self> {
        if l > MAX_ORDER {
            return Err(Error::Domain(format!(
                "polar order l = {l} exceeds the supported maximum {MAX_ORDER}"
            )));
        }
        if n.unsigned_abs() > l {
            return Err(Error::Domain(format!(
                "azimuthal order |n| = {} exceeds polar order l = {l}",
                n.unsigned_abs()
            )));
        }
        Ok(Self { l, n })
    }

    /// Builds a mode from real-valued orders, rejecting anything that is not
    /// an integer (half-integer orders in particular have no conventional
    /// Legendre function here).
    pub fn from_f64(l: f64, n: f64) -> Result<Self> {
        if l.fract() != 0.0 || n.fract() != 0.0 || l < 0.0 || !l.is_finite() || !n.is_finite() {
            return Err(Error::Domain(format!(
                "mode orders must be integers with l >= 0, got (l, n) = ({l}, {n})"
            )));
        }
        if l > MAX_ORDER as f64 || n.abs() > MAX_ORDER as f64 {
            return Err(Error::Domain(format!("mode orders ({l}, {n}) out of range")));
        }
        Self::new(l as u32, n as i32)
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn n(&self) -> i32 {
        self.n
    }

    pub fn is_spherical(&self) -> bool {
        self.l == 0 && self.n == 0
    }
}

impl Default for ModeIndex {
    fn default() -> Self {
        Self::SPHERICAL
    }
}

/// Below `SERIES_SCALE * (l + 1)` the power series is used.
const SERIES_SCALE: f64 = 1e-3;

/// Spherical Bessel function of the first kind `j_l(x)` for `x >= 0`.
///
/// Small arguments go through the ascending power series, so `j_l(0)` is
/// exact. For `x > l` the upward recurrence is stable; otherwise a Miller
/// downward recurrence is normalized with `sum (2k+1) j_k(x)^2 = 1`.
pub fn spherical_bessel_j(l: u32, x: f64) -> Result<f64> {
    if l > MAX_ORDER {
        return Err(Error::Domain(format!(
            "spherical Bessel order {l} exceeds the supported maximum {MAX_ORDER}"
        )));
    }
    if !x.is_finite() || x < 0.0 {
        return Err(Error::Domain(format!(
            "spherical Bessel argument must be finite and non-negative, got {x}"
        )));
    }
    let value = if x < SERIES_SCALE * (l as f64 + 1.0) {
        bessel_series(l, x)
    } else if x > l as f64 {
        bessel_upward(l, x)
    } else {
        bessel_miller(l, x)
    };
    Ok(value)
}

fn bessel_series(l: u32, x: f64) -> f64 {
    // leading factor x^l / (2l+1)!!
    let mut lead = 1.0;
    for k in 1..=l {
        lead *= x / (2 * k + 1) as f64;
    }
    let y = -0.5 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..40u32 {
        term *= y / (k as f64 * (2 * l + 2 * k + 1) as f64);
        sum += term;
        if term.abs() <= f64::EPSILON * 1e-2 * sum.abs() {
            break;
        }
    }
    lead * sum
}

fn bessel_upward(l: u32, x: f64) -> f64 {
    let (s, c) = x.sin_cos();
    let j0 = s / x;
    if l == 0 {
        return j0;
    }
    let j1 = (j0 - c) / x;
    let (mut prev, mut curr) = (j0, j1);
    for k in 1..l {
        let next = (2 * k + 1) as f64 / x * curr - prev;
        prev = curr;
        curr = next;
    }
    curr
}

fn bessel_miller(l: u32, x: f64) -> f64 {
    const BIG: f64 = 1e100;
    let start = l + 20 + (40.0 * (l as f64 + 1.0)).sqrt().ceil() as u32;

    let mut upper = 0.0_f64; // f_{k+1}
    let mut curr = 1e-30_f64; // f_k
    let mut norm = (2 * start + 1) as f64 * curr * curr;
    let mut at_l = if start == l { curr } else { 0.0 };
    let mut f1 = 0.0;
    for k in (1..=start).rev() {
        let lower = (2 * k + 1) as f64 / x * curr - upper;
        upper = curr;
        curr = lower;
        let idx = k - 1;
        norm += (2 * idx + 1) as f64 * curr * curr;
        if idx == l {
            at_l = curr;
        }
        if idx == 1 {
            f1 = curr;
        }
        if curr.abs() > BIG {
            curr /= BIG;
            upper /= BIG;
            at_l /= BIG;
            f1 /= BIG;
            norm /= BIG * BIG;
        }
    }
    let f0 = curr;
    let scale = 1.0 / norm.sqrt();

    // Fix the overall sign against whichever low-order closed form is larger.
    let (s, c) = x.sin_cos();
    let j0 = s / x;
    let j1 = (j0 - c) / x;
    let positive = if j0.abs() >= j1.abs() {
        (j0 >= 0.0) == (f0 >= 0.0)
    } else {
        (j1 >= 0.0) == (f1 >= 0.0)
    };
    let sign = if positive { 1.0 } else { -1.0 };
    sign * at_l * scale
}

/// Associated Legendre function `P_l^n(u)` with the Condon–Shortley phase,
/// for `|n| <= l` and `|u| <= 1`.
///
/// Negative orders use `P_l^{-m} = (-1)^m (l-m)!/(l+m)! P_l^m`.
pub fn assoc_legendre_p(l: u32, n: i32, u: f64) -> Result<f64> {
    if l > MAX_ORDER {
        return Err(Error::Domain(format!(
            "Legendre degree {l} exceeds the supported maximum {MAX_ORDER}"
        )));
    }
    let m = n.unsigned_abs();
    if m > l {
        return Err(Error::Domain(format!("Legendre order |n| = {m} exceeds degree l = {l}")));
    }
    if !(-1.0..=1.0).contains(&u) {
        return Err(Error::Domain(format!("Legendre argument must lie in [-1, 1], got {u}")));
    }

    let mut pmm = 1.0;
    if m > 0 {
        let somx2 = ((1.0 - u) * (1.0 + u)).sqrt();
        let mut odd = 1.0;
        for _ in 0..m {
            pmm *= -odd * somx2;
            odd += 2.0;
        }
    }
    let value = if l == m {
        pmm
    } else {
        let mut lower = pmm;
        let mut upper = u * (2 * m + 1) as f64 * pmm;
        for ll in (m + 2)..=l {
            let next = (u * (2 * ll - 1) as f64 * upper - (ll + m - 1) as f64 * lower)
                / (ll - m) as f64;
            lower = upper;
            upper = next;
        }
        upper
    };

    if n >= 0 {
        Ok(value)
    } else {
        let mut ratio = 1.0;
        for k in (l - m + 1)..=(l + m) {
            ratio /= k as f64;
        }
        let phase = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
        Ok(phase * ratio * value)
    }
}
