//! Closed-form level-1 QAOA on the complete graph `K_2n`.
//!
//! With `d = 2n - 2`, the per-edge expectation of `½(1 - Z_i Z_j)` is
//!
//! ```text
//! <C_ij> = ½ + f(γ, β)
//! f(γ, β) = ½ sin 4β sin γ cos^d γ − ¼ sin² 2β (1 − cos^d 2γ)
//! ```
//!
//! Maximizing over β in closed form gives `f(γ)`; bounding `f(γ)` below
//! `1/(4n-1)` is equivalent to positivity of the polynomial `g(t)` on
//! `t = cos² γ ∈ [0, 1]`, which [`CompleteParams::verify_g_positivity`]
//! certifies numerically.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::optimize::golden_section_max;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticError {
    #[error("n = {0} is below 2")]
    Domain(usize),
    #[error("t = {0} is outside [0, 1]")]
    OutsideUnitInterval(f64),
    #[error("optimal beta is singular at gamma = {0} (1 - cos^d 2γ = 0)")]
    Singular(f64),
}

/// Integer power by repeated squaring.
pub fn ipow(base: f64, exp: u32) -> f64 {
    let (mut acc, mut b, mut e) = (1.0, base, exp);
    while e > 0 {
        if e & 1 == 1 {
            acc *= b;
        }
        b *= b;
        e >>= 1;
    }
    acc
}

/// Half vertex count `n` of `K_2n` and the exponent `d = 2n - 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompleteParams {
    n: u32,
    d: u32,
}

/// Optimum of `f` along γ with its matching β.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaProfile {
    pub gamma: f64,
    pub beta_star: f64,
    pub f_value: f64,
    pub x_value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub t: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositivityReport {
    pub n: u32,
    pub grid_step: f64,
    /// Smallest value over the grid and the located critical points.
    pub min_value: f64,
    pub argmin: f64,
    pub endpoint_value: f64,
    pub critical_points: Vec<CriticalPoint>,
    /// `(4n-13) / (4(n-1)(4n-1)²)`, the floor for critical values when n ≥ 4.
    pub critical_bound: Option<f64>,
    pub passes: bool,
}

const BISECTION_STEPS: usize = 60;

impl CompleteParams {
    pub fn new(n: usize) -> Result<Self, AnalyticError> {
        if n < 2 || n > (u32::MAX / 4) as usize {
            return Err(AnalyticError::Domain(n));
        }
        let n = n as u32;
        Ok(Self { n, d: 2 * n - 2 })
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn vertices(&self) -> usize {
        2 * self.n as usize
    }

    pub fn edges(&self) -> usize {
        let m = self.vertices();
        m * (m - 1) / 2
    }

    /// Maximum cut of `K_2n`: a balanced split cuts `n²` edges.
    pub fn max_cut(&self) -> f64 {
        (self.n as f64).powi(2)
    }

    fn nf(&self) -> f64 {
        self.n as f64
    }

    /// `f(γ, β)`, the deviation of `<C_ij>` from ½.
    pub fn f(&self, gamma: f64, beta: f64) -> f64 {
        let cd = ipow(gamma.cos(), self.d);
        let c2d = ipow((2.0 * gamma).cos(), self.d);
        let s2b = (2.0 * beta).sin();
        0.5 * (4.0 * beta).sin() * gamma.sin() * cd - 0.25 * s2b * s2b * (1.0 - c2d)
    }

    /// `<½(1 - Z_i Z_j)>` on any edge after one QAOA layer.
    pub fn expected_edge_cost(&self, gamma: f64, beta: f64) -> f64 {
        0.5 + self.f(gamma, beta)
    }

    /// `<Z_i Z_j>` on any edge, `1 - 2<C_ij>`.
    pub fn edge_correlation(&self, gamma: f64, beta: f64) -> f64 {
        1.0 - 2.0 * self.expected_edge_cost(gamma, beta)
    }

    /// Level-1 expectation of the whole MAX-CUT cost, `|E| <C_ij>`.
    pub fn expected_cut(&self, gamma: f64, beta: f64) -> f64 {
        self.edges() as f64 * self.expected_edge_cost(gamma, beta)
    }

    /// `x(γ) = 4 sin γ cos^d γ / (1 - cos^d 2γ)`; `None` where the
    /// denominator vanishes.
    pub fn x(&self, gamma: f64) -> Option<f64> {
        let denom = 1.0 - ipow((2.0 * gamma).cos(), self.d);
        if denom == 0.0 {
            return None;
        }
        Some(4.0 * gamma.sin() * ipow(gamma.cos(), self.d) / denom)
    }

    /// Stationary maximizer in β: `¼ arctan x(γ)`, principal branch.
    ///
    /// On that branch `cos 4β > 0` and `sin 4β` has the sign of `x`, so the
    /// second β-derivative is negative whenever `1 - cos^d 2γ > 0`.
    pub fn optimal_beta(&self, gamma: f64) -> Result<f64, AnalyticError> {
        self.x(gamma)
            .map(|x| 0.25 * x.atan())
            .ok_or(AnalyticError::Singular(gamma))
    }

    /// `f(γ) = max_β f(γ, β)` in closed form, valid for every γ.
    ///
    /// Evaluated as `2 s² c^{2d} / (√(A² + 16 s² c^{2d}) + A)` with
    /// `A = 1 − (2c² − 1)^d`, the cancellation-free form of
    /// `⅛(√(A² + 16 s² c^{2d}) − A)`.
    pub fn f_reduced(&self, gamma: f64) -> f64 {
        let c2 = gamma.cos().powi(2);
        let s2 = gamma.sin().powi(2);
        let a = 1.0 - ipow(2.0 * c2 - 1.0, self.d);
        let b = 16.0 * s2 * ipow(c2, self.d);
        if b == 0.0 {
            return 0.0;
        }
        2.0 * s2 * ipow(c2, self.d) / ((a * a + b).sqrt() + a)
    }

    /// `argmax_γ f(γ)` on `[0, π/2]`: scan at step 1e-3, then golden section
    /// to 1e-10 around the best scanned point.
    pub fn maximize_f(&self) -> GammaProfile {
        const STEP: f64 = 1e-3;
        let count = (FRAC_PI_2 / STEP).floor() as usize;
        let mut best = (0.0, self.f_reduced(0.0));
        for k in 1..=count + 1 {
            let g = (k as f64 * STEP).min(FRAC_PI_2);
            let v = self.f_reduced(g);
            if v > best.1 {
                best = (g, v);
            }
        }
        let lo = (best.0 - STEP).max(0.0);
        let hi = (best.0 + STEP).min(FRAC_PI_2);
        let (g, v, _) = golden_section_max(|g| self.f_reduced(g), lo, hi, 1e-10);
        let (gamma, f_value) = if v >= best.1 { (g, v) } else { best };
        GammaProfile {
            gamma,
            beta_star: self.optimal_beta(gamma).unwrap_or(0.0),
            f_value,
            x_value: self.x(gamma).unwrap_or(0.0),
        }
    }

    /// Best level-1 approximation ratio, `(2n-1)(½ + max f) / n`.
    pub fn qaoa1_ratio(&self) -> f64 {
        let f = self.maximize_f().f_value;
        (2.0 * self.nf() - 1.0) * (0.5 + f) / self.nf()
    }

    /// `1 - 1/(2n(4n-1))`, the ratio implied by `f < 1/(4n-1)`.
    pub fn intermediate_bound(&self) -> f64 {
        let n = self.nf();
        1.0 - 1.0 / (2.0 * n * (4.0 * n - 1.0))
    }

    /// `1 - 1/(8n²)`.
    pub fn ratio_bound(&self) -> f64 {
        1.0 - 1.0 / (8.0 * self.nf() * self.nf())
    }

    /// `1/(4n-1)`.
    pub fn f_bound(&self) -> f64 {
        1.0 / (4.0 * self.nf() - 1.0)
    }

    fn check_t(t: f64) -> Result<(), AnalyticError> {
        if (0.0..=1.0).contains(&t) {
            Ok(())
        } else {
            Err(AnalyticError::OutsideUnitInterval(t))
        }
    }

    /// `g(t) = 4/(4n-1)² + (1 - (2t-1)^d)/(4n-1) - (1-t) t^d`.
    pub fn g(&self, t: f64) -> Result<f64, AnalyticError> {
        Self::check_t(t)?;
        Ok(self.g_unchecked(t))
    }

    fn g_unchecked(&self, t: f64) -> f64 {
        let k = 4.0 * self.nf() - 1.0;
        4.0 / (k * k) + (1.0 - ipow(2.0 * t - 1.0, self.d)) / k - (1.0 - t) * ipow(t, self.d)
    }

    /// `g'(t) = -(4n-4)/(4n-1) (2t-1)^{2n-3} + t^{2n-3} ((2n-1)t - (2n-2))`.
    pub fn g_derivative(&self, t: f64) -> Result<f64, AnalyticError> {
        Self::check_t(t)?;
        Ok(self.g_derivative_unchecked(t))
    }

    fn g_derivative_unchecked(&self, t: f64) -> f64 {
        let n = self.nf();
        let e = self.d - 1;
        -(4.0 * n - 4.0) / (4.0 * n - 1.0) * ipow(2.0 * t - 1.0, e)
            + ipow(t, e) * ((2.0 * n - 1.0) * t - (2.0 * n - 2.0))
    }

    /// `(4n-13) / (4(n-1)(4n-1)²)`.
    pub fn critical_bound(&self) -> f64 {
        let n = self.nf();
        (4.0 * n - 13.0) / (4.0 * (n - 1.0) * (4.0 * n - 1.0).powi(2))
    }

    /// Scans `g` on `[0, 1]` and locates the zeros of `g'` by bisection
    /// inside every grid cell where it changes sign.
    ///
    /// Passes iff the minimum is positive and, for n ≥ 4, every interior
    /// critical value exceeds [`CompleteParams::critical_bound`].
    pub fn verify_g_positivity(&self, grid_step: f64) -> PositivityReport {
        let cells = (1.0 / grid_step).round().max(1.0) as usize;
        let t_at = |k: usize| k as f64 / cells as f64;
        let mut min_value = f64::INFINITY;
        let mut argmin = 0.0;
        let mut consider = |t: f64, v: f64| {
            if v < min_value {
                min_value = v;
                argmin = t;
            }
        };
        let mut critical_points = Vec::new();
        let mut prev_t = 0.0;
        let mut prev_d = self.g_derivative_unchecked(0.0);
        consider(0.0, self.g_unchecked(0.0));
        for k in 1..=cells {
            let t = t_at(k);
            let dv = self.g_derivative_unchecked(t);
            consider(t, self.g_unchecked(t));
            if dv == 0.0 && k < cells {
                critical_points.push(CriticalPoint {
                    t,
                    value: self.g_unchecked(t),
                });
            } else if prev_d != 0.0 && dv != 0.0 && (prev_d < 0.0) != (dv < 0.0) {
                let (mut lo, mut hi) = (prev_t, t);
                let lo_negative = prev_d < 0.0;
                for _ in 0..BISECTION_STEPS {
                    let mid = 0.5 * (lo + hi);
                    if (self.g_derivative_unchecked(mid) < 0.0) == lo_negative {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let tc = 0.5 * (lo + hi);
                critical_points.push(CriticalPoint {
                    t: tc,
                    value: self.g_unchecked(tc),
                });
            }
            prev_t = t;
            prev_d = dv;
        }
        for c in &critical_points {
            consider(c.t, c.value);
        }
        let critical_bound = (self.n >= 4).then(|| self.critical_bound());
        let above_bound =
            critical_bound.is_none_or(|b| critical_points.iter().all(|c| c.value > b));
        PositivityReport {
            n: self.n,
            grid_step,
            min_value,
            argmin,
            endpoint_value: self.g_unchecked(0.0).min(self.g_unchecked(1.0)),
            critical_points,
            critical_bound,
            passes: min_value > 0.0 && above_bound,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn p(n: usize) -> CompleteParams {
        CompleteParams::new(n).unwrap()
    }

    #[test]
    fn domain() {
        assert_eq!(CompleteParams::new(1), Err(AnalyticError::Domain(1)));
        assert_eq!(p(5).d(), 8);
        assert_eq!(p(3).edges(), 15);
        assert_eq!(p(3).max_cut(), 9.0);
    }

    #[test]
    fn ipow_matches_powi() {
        for &b in &[-1.3, -0.5, 0.0, 0.7, 2.0] {
            for e in 0..12 {
                assert!(
                    (ipow(b, e) - f64::powi(b, e as i32)).abs()
                        <= 1e-12 * f64::powi(b, e as i32).abs().max(1.0)
                );
            }
        }
        assert_eq!(ipow(-1.0, 6), 1.0);
        assert_eq!(ipow(-1.0, 7), -1.0);
    }

    #[test]
    fn edge_cost_trivial_points() {
        for n in 2..6 {
            let c = p(n);
            for &b in &[0.0, 0.3, 1.2] {
                assert_eq!(c.expected_edge_cost(0.0, b), 0.5);
                assert_eq!(c.edge_correlation(0.0, b), 0.0);
            }
            for &g in &[0.1, 0.9, 2.0] {
                assert_eq!(c.expected_edge_cost(g, 0.0), 0.5);
            }
        }
    }

    #[test]
    fn k4_at_quarter_pi() {
        let c = p(2);
        let want = (3f64.sqrt() - 1.0) / 8.0;
        let beta = c.optimal_beta(FRAC_PI_4).unwrap();
        assert!((beta - 0.25 * 2f64.sqrt().atan()).abs() < 1e-15);
        assert!((c.expected_edge_cost(FRAC_PI_4, beta) - (0.5 + want)).abs() < 1e-15);
        assert!((c.f_reduced(FRAC_PI_4) - want).abs() < 1e-15);
        assert!((c.x(FRAC_PI_4).unwrap() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn f_reduced_endpoints() {
        for n in 2..10 {
            assert_eq!(p(n).f_reduced(0.0), 0.0);
            assert!(p(n).f_reduced(FRAC_PI_2).abs() < 1e-30);
        }
    }

    #[test]
    fn singular_gamma() {
        assert_eq!(p(3).optimal_beta(0.0), Err(AnalyticError::Singular(0.0)));
        // approaching zero, the optimized f vanishes (linearly in γ)
        let c = p(3);
        for near in [1e-4, 1e-6, 1e-8] {
            let b = c.optimal_beta(near).unwrap();
            assert!(c.f(near, b).abs() < near);
            assert!((c.f(near, b) - c.f_reduced(near)).abs() < 1e-15);
        }
    }

    #[test]
    fn optimal_beta_is_a_maximum() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let n = rng.gen_range(2..=10);
            let g = rng.gen_range(0.01..FRAC_PI_2 - 0.01);
            let c = p(n);
            let b = c.optimal_beta(g).unwrap();
            let h = 1e-5;
            let f0 = c.f(g, b);
            assert!(c.f(g, b + h) <= f0 + 1e-15 && c.f(g, b - h) <= f0 + 1e-15);
        }
    }

    #[test]
    fn optimal_beta_maximizes_outside_first_quadrant() {
        let c = p(2);
        for &g in &[2.0, 2.9, 4.0] {
            let b = c.optimal_beta(g).unwrap();
            let scan = (0..20000)
                .map(|k| c.f(g, k as f64 * PI / 20000.0))
                .fold(f64::NEG_INFINITY, f64::max);
            assert!(c.f(g, b) >= scan - 1e-12);
            assert!((c.f(g, b) - c.f_reduced(g)).abs() < 1e-12);
        }
    }

    #[test]
    fn joint_f_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..500 {
            let c = p(rng.gen_range(2..30));
            let (g, b) = (rng.gen_range(-PI..PI), rng.gen_range(-PI..PI));
            assert!((c.expected_edge_cost(g, b) - 0.5 - c.f(g, b)).abs() <= 1e-14);
            let m = c.edge_correlation(g, b);
            assert!((-1.0..=1.0).contains(&m));
        }
    }

    #[test]
    fn correlation_range_on_grid() {
        for n in [2, 3, 7] {
            let c = p(n);
            for a in 0..100 {
                for b in 0..100 {
                    let m = c.edge_correlation(a as f64 * 2.0 * PI / 100.0, b as f64 * PI / 100.0);
                    assert!((-1.0..=1.0).contains(&m));
                }
            }
        }
    }

    #[test]
    fn f_reduced_matches_beta_substitution() {
        for n in 2..=20 {
            let c = p(n);
            for k in 1..1000 {
                let g = k as f64 * FRAC_PI_2 / 1000.0;
                let Ok(b) = c.optimal_beta(g) else { continue };
                assert!(
                    (c.f_reduced(g) - c.f(g, b)).abs() <= 1e-12,
                    "n={n} g={g}: {} vs {}",
                    c.f_reduced(g),
                    c.f(g, b)
                );
            }
        }
    }

    #[test]
    fn maximize_f_profile() {
        for n in 2..=200 {
            let c = p(n);
            let prof = c.maximize_f();
            assert!(prof.f_value > 0.0);
            assert!(prof.f_value >= c.f_reduced(FRAC_PI_4));
            assert!(prof.f_value < c.f_bound(), "n={n}");
            assert!((c.f(prof.gamma, prof.beta_star) - prof.f_value).abs() <= 1e-12);
            assert!(c.edge_correlation(prof.gamma, prof.beta_star) < 0.0);
        }
    }

    #[test]
    fn maximize_f_beats_coarse_full_period_scan() {
        for n in [2, 3, 5, 12] {
            let c = p(n);
            let best = c.maximize_f().f_value;
            let full = (0..20000)
                .map(|k| c.f_reduced(k as f64 * 2.0 * PI / 20000.0))
                .fold(f64::NEG_INFINITY, f64::max);
            assert!(best >= full - 1e-12, "n={n}");
        }
    }

    #[test]
    fn ratios() {
        for n in 2..=200 {
            let c = p(n);
            let r = c.qaoa1_ratio();
            assert!(r > 0.0 && r < 1.0);
            assert!(r < c.intermediate_bound());
            if n >= 4 {
                assert!(c.intermediate_bound() < c.ratio_bound());
                assert!(r < c.ratio_bound());
            }
        }
    }

    #[test]
    fn g_values() {
        for n in 2..12 {
            let c = p(n);
            let k = 4.0 * n as f64 - 1.0;
            assert!((c.g(0.0).unwrap() - 4.0 / (k * k)).abs() < 1e-16);
            assert!((c.g(1.0).unwrap() - 4.0 / (k * k)).abs() < 1e-16);
        }
        assert!((p(2).g(0.5).unwrap() - (11.0 / 49.0 - 0.125)).abs() < 1e-15);
        assert_eq!(p(2).g(1.5), Err(AnalyticError::OutsideUnitInterval(1.5)));
        assert!(p(2).g_derivative(-0.1).is_err());
    }

    #[test]
    fn g_derivative_matches_finite_differences() {
        let h = 1e-6;
        for n in 2..30 {
            let c = p(n);
            for k in 1..100 {
                let t = k as f64 / 100.0;
                let fd = (c.g(t + h).unwrap() - c.g(t - h).unwrap()) / (2.0 * h);
                assert!(
                    (fd - c.g_derivative(t).unwrap()).abs() <= 1e-6,
                    "n={n} t={t}"
                );
            }
        }
    }

    #[test]
    fn positivity_small_n() {
        for n in [2, 3] {
            let r = p(n).verify_g_positivity(1e-4);
            assert!(r.passes && r.min_value > 0.0);
            assert!(r.critical_bound.is_none());
            assert!(p(n).qaoa1_ratio() < 1.0);
        }
    }

    #[test]
    fn positivity_report_fields() {
        let r = p(5).verify_g_positivity(1e-4);
        assert!(r.passes);
        assert_eq!(r.critical_bound, Some(p(5).critical_bound()));
        assert!(!r.critical_points.is_empty());
        for c in &r.critical_points {
            assert!(p(5).g_derivative(c.t).unwrap().abs() < 1e-10);
        }
    }

    #[test]
    fn critical_points_bracket_scan_minima() {
        for n in [2, 4, 9, 25] {
            let c = p(n);
            let step = 1e-4;
            let report = c.verify_g_positivity(step);
            let vals: Vec<f64> = (0..=10000).map(|k| c.g(k as f64 * step).unwrap()).collect();
            // windowed minima; the plateau in the middle is flat to rounding
            let w = 50;
            for k in w..vals.len() - w {
                let window = &vals[k - w..=k + w];
                let is_min = window.iter().all(|&v| v >= vals[k]);
                if is_min && window[0] - vals[k] > 1e-14 && window[2 * w] - vals[k] > 1e-14 {
                    let t = k as f64 * step;
                    assert!(
                        report
                            .critical_points
                            .iter()
                            .any(|cp| (cp.t - t).abs() <= 2.0 * step),
                        "n={n}: scan minimum at {t} not bracketed"
                    );
                }
            }
        }
    }
}
