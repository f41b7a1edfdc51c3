//! Reference computations shared by the integration tests. Nothing here
//! calls into the library's numerics.

#![allow(dead_code)]

use mobgrid::ScenarioConfig;

fn pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let m = 0.5 * (a + b);
    (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b))
}

fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let left = simpson(f, a, m);
    let right = simpson(f, m, b);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        adaptive(f, a, m, left, tol / 2.0, depth - 1)
            + adaptive(f, m, b, right, tol / 2.0, depth - 1)
    }
}

/// Integral of `f` over `[a, b]` by adaptive Simpson quadrature.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    adaptive(f, a, b, simpson(f, a, b), tol, 50)
}

/// Area under the standard normal density from 0 to `z`.
pub fn zero_to_z(z: f64) -> f64 {
    if z == 0.0 {
        return 0.0;
    }
    let sign = z.signum();
    sign * integrate(&pdf, 0.0, z.abs(), 1e-15)
}

/// Standard normal CDF by quadrature.
pub fn phi(z: f64) -> f64 {
    0.5 + zero_to_z(z)
}

/// Confining angles of a hexagonal cell with inner radius `ri` and outer
/// radius `ro`, in degrees: (forward, forward-side, side).
pub fn angles(ri: f64, ro: f64) -> (f64, f64, f64) {
    (
        (ro / (4.0 * ri)).atan().to_degrees(),
        (ro / ri).atan().to_degrees(),
        90.0,
    )
}

/// Six direction probabilities in B, R, Fr, F, Fl, L order for the regular
/// unit hexagon.
pub fn direction_table(sigma: f64) -> [f64; 6] {
    let (f_ang, fl_ang, l_ang) = angles(1.0, 2.0 / 3f64.sqrt());
    let a = |deg: f64| zero_to_z(deg / sigma);
    let f = 2.0 * a(f_ang);
    let fl = a(fl_ang) - a(f_ang);
    let l = a(l_ang) - a(fl_ang);
    let b = (1.0 - f - 2.0 * fl - 2.0 * l).max(0.0);
    [b, l, fl, f, fl, l]
}

/// Tiny stationary scenario: one initiator, one sub job, one subordinate.
pub fn micro_config() -> ScenarioConfig {
    ScenarioConfig {
        vo_count: 1,
        aos_per_vo: 1,
        population: 2,
        population_min: 2,
        initiators: 1,
        subjob_count: 1,
        mobility_factor: 0.0,
        step_interval_s: f64::INFINITY,
        ..ScenarioConfig::default()
    }
}

/// Short mobile run with churn on every scan.
pub fn busy_config() -> ScenarioConfig {
    ScenarioConfig {
        population: 60,
        mobility_factor: 0.4,
        duration_s: 600.0,
        ..ScenarioConfig::default()
    }
}
