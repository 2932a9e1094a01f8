//! Complex Gamma function (Lanczos, g = 7).

use std::f64::consts::PI;

use crate::linalg::{C64, ONE};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `log Gamma(z)` for `Re z >= 1/2` (principal branch of the Lanczos form).
fn ln_gamma_right(z: C64) -> C64 {
    let z = z - ONE;
    let mut x = C64::new(LANCZOS[0], 0.0);
    for (k, c) in LANCZOS.iter().enumerate().skip(1) {
        x += *c / (z + k as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + x.ln()
}

pub fn gamma(z: C64) -> C64 {
    if z.re < 0.5 {
        // Reflection: Gamma(z) Gamma(1 - z) = pi / sin(pi z).
        PI / ((PI * z).sin() * ln_gamma_right(ONE - z).exp())
    } else {
        ln_gamma_right(z).exp()
    }
}

/// `1 / Gamma(z)`, entire; exact zeros at non-positive integers.
pub fn recip_gamma(z: C64) -> C64 {
    if z.re < 0.5 {
        (PI * z).sin() * ln_gamma_right(ONE - z).exp() / PI
    } else {
        (-ln_gamma_right(z)).exp()
    }
}

/// `arg Gamma(i nu)` in `(-pi, pi]`.
pub fn arg_gamma_imaginary(nu: f64) -> f64 {
    gamma(C64::new(0.0, nu)).arg()
}
