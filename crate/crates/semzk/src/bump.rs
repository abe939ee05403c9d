//! Smooth compactly supported bumps and the monotone ramps built from them.
//!
//! Everything here derives from the standard C-infinity bump
//! `B(s) = exp(-1/(1-s^2))` on `(-1, 1)`. Monotone ramps are its normalized
//! integral, evaluated from a precomputed cumulative table (per-interval
//! Gauss-Legendre, accurate to machine precision). Plateau values are exact
//! by branching, not by saturation of a formula.

use std::sync::OnceLock;

/// `exp(-1/(1-s^2))` on `(-1,1)`, 0 outside.
pub fn bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s * s)).exp()
    }
}

/// The exponent `g(s) = -1/(1-s^2)` with derivatives up to third order.
/// Returns `None` outside the open support (or too close to the edge for
/// the rational factors to be representable; the bump is below 1e-260000
/// there, identically zero for every purpose in this crate).
pub fn bump_exponent_jet(s: f64) -> Option<(f64, f64, f64, f64)> {
    let q = 1.0 - s * s;
    if q <= 1e-60 {
        return None;
    }
    let q1 = 1.0 / q;
    let q2 = q1 * q1;
    let q3 = q2 * q1;
    let q4 = q2 * q2;
    let g = -q1;
    let g1 = -2.0 * s * q2;
    let g2 = -2.0 * (1.0 + 3.0 * s * s) * q3;
    let g3 = -24.0 * s * (1.0 + s * s) * q4;
    Some((g, g1, g2, g3))
}

/// First three derivatives of the bump itself.
pub fn bump_jet(s: f64) -> (f64, f64, f64, f64) {
    match bump_exponent_jet(s) {
        None => (0.0, 0.0, 0.0, 0.0),
        Some((g, g1, g2, g3)) => {
            let b = g.exp();
            let d1 = g1 * b;
            let d2 = (g2 + g1 * g1) * b;
            let d3 = (g3 + 3.0 * g1 * g2 + g1 * g1 * g1) * b;
            (b, d1, d2, d3)
        }
    }
}

const RAMP_INTERVALS: usize = 8192;

struct RampTable {
    cum: Vec<f64>,
    total: f64,
}

// 5-point Gauss-Legendre nodes/weights on [-1, 1].
const GL5_X: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GL5_W: [f64; 5] = [
    0.236_926_885_056_189,
    0.478_628_670_499_366,
    0.568_888_888_888_889,
    0.478_628_670_499_366,
    0.236_926_885_056_189,
];

fn gl5(a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for i in 0..5 {
        acc += GL5_W[i] * bump(mid + half * GL5_X[i]);
    }
    acc * half
}

fn ramp_table() -> &'static RampTable {
    static TABLE: OnceLock<RampTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let h = 2.0 / RAMP_INTERVALS as f64;
        let mut cum = Vec::with_capacity(RAMP_INTERVALS + 1);
        cum.push(0.0);
        let mut acc = 0.0;
        for j in 0..RAMP_INTERVALS {
            let a = -1.0 + j as f64 * h;
            acc += gl5(a, a + h);
            cum.push(acc);
        }
        RampTable { cum, total: acc }
    })
}

/// Total mass `integral of B over (-1,1)` (about 0.443994).
pub fn bump_mass() -> f64 {
    ramp_table().total
}

/// Normalized integrated bump: 0 at `s <= -1`, 1 at `s >= 1`, strictly
/// increasing and C-infinity in between.
pub fn ramp(s: f64) -> f64 {
    if s <= -1.0 {
        return 0.0;
    }
    if s >= 1.0 {
        return 1.0;
    }
    let table = ramp_table();
    let h = 2.0 / RAMP_INTERVALS as f64;
    let pos = (s + 1.0) / h;
    let j = (pos.floor() as usize).min(RAMP_INTERVALS - 1);
    let a = -1.0 + j as f64 * h;
    ((table.cum[j] + gl5(a, s)) / table.total).clamp(0.0, 1.0)
}

/// `(ramp, ramp', ramp'', ramp''')`; the derivatives are scaled bump jets.
pub fn ramp_jet(s: f64) -> (f64, f64, f64, f64) {
    let (b, d1, d2, _) = bump_jet(s);
    let inv = 1.0 / bump_mass();
    (ramp(s), b * inv, d1 * inv, d2 * inv)
}

/// Smooth monotone step: exactly 0 for `s <= lo`, exactly 1 for `s >= hi`.
#[derive(Debug, Clone, Copy)]
pub struct SmoothStep {
    lo: f64,
    hi: f64,
}

impl SmoothStep {
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(hi > lo, "step needs hi > lo");
        SmoothStep { lo, hi }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    fn s(&self, x: f64) -> f64 {
        (2.0 * (x - self.lo) / (self.hi - self.lo)) - 1.0
    }

    /// ds/dx.
    fn rate(&self) -> f64 {
        2.0 / (self.hi - self.lo)
    }

    pub fn value(&self, x: f64) -> f64 {
        ramp(self.s(x))
    }

    /// Value with derivatives up to third order in `x`.
    pub fn jet(&self, x: f64) -> (f64, f64, f64, f64) {
        let s = self.s(x);
        let r = self.rate();
        let (v, r1, r2, r3) = ramp_jet(s);
        (v, r1 * r, r2 * r * r, r3 * r * r * r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ramp_hits_exact_plateaus() {
        assert_eq!(ramp(-1.0), 0.0);
        assert_eq!(ramp(1.0), 1.0);
        assert_eq!(ramp(-5.0), 0.0);
        assert_eq!(ramp(2.0), 1.0);
        assert!((ramp(0.0) - 0.5).abs() < 1e-14, "bump is even");
    }

    #[test]
    fn ramp_is_monotone_and_consistent_with_its_derivative() {
        let mut prev = 0.0;
        for i in 0..=1000 {
            let s = -1.0 + 2.0 * i as f64 / 1000.0;
            let v = ramp(s);
            assert!(v >= prev - 1e-15);
            prev = v;
        }
        // Centered finite difference against the analytic derivative.
        for &s in &[-0.8, -0.3, 0.0, 0.4, 0.9] {
            let h = 1e-6;
            let fd = (ramp(s + h) - ramp(s - h)) / (2.0 * h);
            let (_, d1, _, _) = ramp_jet(s);
            assert!((fd - d1).abs() < 1e-8 * d1.abs().max(1.0), "s = {s}");
        }
    }

    #[test]
    fn bump_jet_matches_finite_differences() {
        for &s in &[-0.7, -0.2, 0.1, 0.5, 0.85] {
            let h = 1e-5;
            let (b, d1, d2, _) = bump_jet(s);
            let (bp, _, _, _) = bump_jet(s + h);
            let (bm, _, _, _) = bump_jet(s - h);
            assert!(((bp - bm) / (2.0 * h) - d1).abs() < 1e-6 * (1.0 + d1.abs()));
            assert!(((bp - 2.0 * b + bm) / (h * h) - d2).abs() < 1e-3 * (1.0 + d2.abs()));
        }
    }

    #[test]
    fn smooth_step_plateaus_and_transition() {
        let st = SmoothStep::new(2.0, 3.0);
        assert_eq!(st.value(2.0), 0.0);
        assert_eq!(st.value(1.0), 0.0);
        assert_eq!(st.value(3.0), 1.0);
        assert_eq!(st.value(7.5), 1.0);
        let mid = st.value(2.5);
        assert!((mid - 0.5).abs() < 1e-13);
    }

    #[test]
    fn bump_mass_matches_reference_quadrature() {
        // Independent check: fine composite Simpson.
        let n = 1 << 16;
        let h = 2.0 / n as f64;
        let mut acc = bump(-1.0) + bump(1.0);
        for i in 1..n {
            let s = -1.0 + i as f64 * h;
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * bump(s);
        }
        acc *= h / 3.0;
        assert!((bump_mass() - acc).abs() < 1e-12);
    }
}
