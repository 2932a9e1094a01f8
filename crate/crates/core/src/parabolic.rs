//! Parabolic cylinder functions `D_a(eta)` for complex order and argument.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use crate::error::{Error, Result};
use crate::linalg::{C64, I, ONE, ZERO};
use crate::special::recip_gamma;

/// Largest `|a|` accepted.
pub const ORDER_ENVELOPE: f64 = 5.0;
/// Largest `|eta|` accepted.
pub const ARGUMENT_ENVELOPE: f64 = 50.0;
/// Radius at which the series and asymptotic expansions are compared.
pub const SERIES_RADIUS: f64 = 6.0;
/// Below this radius the series loses at most a few digits on any ray.
const SERIES_SAFE: f64 = 2.0;
/// Beyond this radius the truncated expansion is accurate to rounding on any ray.
const ASYMPTOTIC_SAFE: f64 = 14.0;
const TAYLOR_STEP: f64 = 0.5;

const MAX_TERMS: usize = 400;

pub fn parabolic_cylinder(a: C64, eta: C64) -> Result<C64> {
    if !(a.norm() <= ORDER_ENVELOPE) || !(eta.norm() <= ARGUMENT_ENVELOPE) {
        return Err(Error::OutOfEnvelope);
    }
    let r = eta.norm();
    if r <= SERIES_SAFE {
        return Ok(series(a, eta));
    }
    if r >= ASYMPTOTIC_SAFE {
        return Ok(asymptotic(a, eta));
    }
    let dir = eta / r;
    let theta = eta.arg();
    let inward = theta.abs() <= FRAC_PI_2
        && amplification(a, theta, ASYMPTOTIC_SAFE, r) < amplification(a, theta, SERIES_SAFE, r);
    let (start, eval): (C64, fn(C64, C64) -> C64) =
        if inward { (dir * ASYMPTOTIC_SAFE, asymptotic) } else { (dir * SERIES_SAFE, series) };
    let y = eval(a, start);
    // D_a' = eta D_a / 2 - D_{a+1}
    let dy = 0.5 * start * y - eval(a + 1.0, start);
    Ok(continue_along(a, start, y, dy, eta))
}

/// `D_a'(eta) = -eta D_a(eta) / 2 + a D_{a-1}(eta)`.
pub fn parabolic_cylinder_derivative(a: C64, eta: C64) -> Result<C64> {
    Ok(-0.5 * eta * parabolic_cylinder(a, eta)? + a * parabolic_cylinder(a - ONE, eta)?)
}

/// Log of `|D_a / D_{-a-1}(i eta)|` on the ray `arg eta = theta`, up to a constant.
fn relative_growth(a: C64, theta: f64, r: f64) -> f64 {
    (2.0 * a.re + 1.0) * r.ln() - 0.5 * r * r * (2.0 * theta).cos()
}

/// Worst log-amplification of relative errors when continuing from radius `from` to `to`.
fn amplification(a: C64, theta: f64, from: f64, to: f64) -> f64 {
    let end = relative_growth(a, theta, to);
    (0..=16)
        .map(|k| from + (to - from) * k as f64 / 16.0)
        .map(|s| relative_growth(a, theta, s) - end)
        .fold(0.0, f64::max)
}

/// Carries `(y, y')` from `from` to `to` along the straight segment, by Taylor steps of
/// `y'' = (eta^2/4 - a - 1/2) y`.
fn continue_along(a: C64, from: C64, mut y: C64, mut dy: C64, to: C64) -> C64 {
    let span = to - from;
    let steps = (span.norm() / TAYLOR_STEP).ceil().max(1.0) as usize;
    let w = span / steps as f64;
    let mut eta = from;
    for _ in 0..steps {
        (y, dy) = taylor_step(a, eta, y, dy, w);
        eta += w;
    }
    y
}

fn taylor_step(a: C64, eta: C64, y: C64, dy: C64, w: C64) -> (C64, C64) {
    // scaled coefficients d_n = c_n w^n of the expansion about eta:
    // d_{n+2} (n+1)(n+2) = k0 d_n + k1 d_{n-1} + k2 d_{n-2}
    let k0 = (eta * eta * 0.25 - a - 0.5) * w * w;
    let k1 = eta * 0.5 * w * w * w;
    let k2 = 0.25 * w * w * w * w;
    let mut d = [ZERO, ZERO, y, dy * w];
    let mut sum = d[2] + d[3];
    let mut dsum = d[3];
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        let next = (k0 * d[2] + k1 * d[1] + k2 * d[0]) / ((nf + 1.0) * (nf + 2.0));
        d = [d[1], d[2], d[3], next];
        sum += next;
        dsum += (nf + 2.0) * next;
        let tail = d[1].norm() + d[2].norm() + d[3].norm();
        if n > 4 && tail * (nf + 3.0) < 1e-18 * (sum.norm() + dsum.norm()) {
            break;
        }
    }
    (sum, dsum / w)
}

/// Confluent hypergeometric `M(alpha, beta, x)` by direct summation.
fn kummer(alpha: C64, beta: f64, x: C64) -> C64 {
    let mut term = ONE;
    let mut sum = ONE;
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        term *= (alpha + nf) * x / ((beta + nf) * (nf + 1.0));
        sum += term;
        if term.norm() < 1e-18 * sum.norm() && n > 4 {
            break;
        }
    }
    sum
}

pub(crate) fn series(a: C64, eta: C64) -> C64 {
    let x = eta * eta * 0.5;
    let even = kummer(-a * 0.5, 0.5, x) * recip_gamma((ONE - a) * 0.5);
    let odd = std::f64::consts::SQRT_2 * eta * kummer((ONE - a) * 0.5, 1.5, x) * recip_gamma(-a * 0.5);
    (a * 0.5 * std::f64::consts::LN_2).exp() * PI.sqrt() * (-eta * eta * 0.25).exp() * (even - odd)
}

/// Sums an asymptotic series with ratio `next/term`, truncating at its smallest term.
fn asymptotic_sum(ratio: impl Fn(usize) -> C64) -> C64 {
    let mut term = ONE;
    let mut sum = ONE;
    let mut last = f64::INFINITY;
    for n in 0..MAX_TERMS {
        let next = term * ratio(n);
        let size = next.norm();
        if size >= last || size < 1e-17 * sum.norm() {
            break;
        }
        sum += next;
        last = size;
        term = next;
    }
    sum
}

pub(crate) fn asymptotic(a: C64, eta: C64) -> C64 {
    let inv2 = ONE / (eta * eta);
    let leading = asymptotic_sum(|n| {
        let k = 2.0 * n as f64;
        -(a - k) * (a - k - 1.0) * inv2 / (2.0 * (n as f64 + 1.0))
    });
    let log_eta = eta.ln();
    let mut d = (a * log_eta - eta * eta * 0.25).exp() * leading;
    let arg = eta.arg();
    // the subdominant term is switched on across the Stokes line |arg| = pi/2
    let weight = stokes_weight(eta.norm(), arg.abs() - FRAC_PI_2);
    if weight > 0.0 {
        let sign = if arg > 0.0 { 1.0 } else { -1.0 };
        let subdominant = asymptotic_sum(|n| {
            let k = 2.0 * n as f64;
            (a + k + 1.0) * (a + k + 2.0) * inv2 / (2.0 * (n as f64 + 1.0))
        });
        let factor = (2.0 * PI).sqrt() * recip_gamma(-a) * (sign * a * PI * I).exp();
        d -= weight * factor * ((-a - 1.0) * log_eta + eta * eta * 0.25).exp() * subdominant;
    }
    d
}

/// Error-function smoothing of the Stokes multiplier, `delta` measured from the Stokes line.
fn stokes_weight(r: f64, delta: f64) -> f64 {
    if delta <= -FRAC_PI_4 {
        return 0.0;
    }
    if delta >= FRAC_PI_4 {
        return 1.0;
    }
    let sigma = r * (2.0 * delta).sin() / (2.0 * (2.0 * delta).cos().sqrt());
    0.5 * libm::erfc(-sigma)
}

/// Rays on which the series and asymptotic forms are compared.
pub const CHECK_RAYS: [f64; 3] = [0.0, FRAC_PI_2, -FRAC_PI_2];

/// Relative gap between the two evaluation paths at `|eta| = SERIES_RADIUS`.
pub fn switch_consistency(a: C64, arg: f64) -> f64 {
    let eta = C64::from_polar(SERIES_RADIUS, arg);
    let s = series(a, eta);
    let m = asymptotic(a, eta);
    if s == ZERO {
        m.norm()
    } else {
        (s - m).norm() / s.norm()
    }
}
