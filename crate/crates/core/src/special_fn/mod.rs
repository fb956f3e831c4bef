//! Special functions: Γ family, zeta functions, Bernoulli data, θ₃, q-numbers.

pub mod bernoulli;
pub mod epstein;
pub mod gamma;
pub mod incgamma;
pub mod theta;
pub mod zeta;

pub use bernoulli::{bernoulli_number, bernoulli_poly};
pub use epstein::{epstein_zd, lattice_zeta};
pub use gamma::{digamma, gamma, gamma_laurent, log_gamma, polygamma, rgamma};
pub use theta::jacobi_theta3;
pub use zeta::{hurwitz_zeta, riemann_zeta};

use crate::scalar::Real;

/// q-number [x] = (q^{-x} - q^x)/(q^{-1} - q), evaluated as sinh(xL)/sinh(L), L = ln(1/q).
pub fn q_number<T: Real>(x: T, q: T) -> T {
    let l = -q.ln();
    let xl = x * l;
    if xl.abs() < T::of(30.0) {
        xl.sinh() / l.sinh()
    } else {
        // sinh(xL) ≈ e^{xL}/2 with relative error e^{-2xL}
        let sign = if xl < T::zero() { -T::one() } else { T::one() };
        sign * (xl.abs() - T::of(2.0).ln() - l.sinh().ln()).exp()
    }
}

/// ln [x] for x > 0; stays finite where [x] itself overflows.
pub fn ln_q_number(x: f64, q: f64) -> f64 {
    let l = -q.ln();
    let xl = x * l;
    if xl < 30.0 {
        (xl.sinh() / l.sinh()).ln()
    } else {
        xl + (-(-2.0 * xl).exp()).ln_1p() - 2f64.ln() - l.sinh().ln()
    }
}
