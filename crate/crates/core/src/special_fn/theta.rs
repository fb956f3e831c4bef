//! Jacobi θ₃.

use crate::error::{invalid, Result};
use num_complex::Complex64;

/// θ₃(z; q) = Σ_n q^{n²} e^{2niz}.
pub fn jacobi_theta3(z: Complex64, q: Complex64) -> Result<Complex64> {
    if q.norm() >= 1.0 {
        return invalid("theta3 needs |q| < 1");
    }
    if q.norm() == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let lq = q.norm().ln();
    let mut sum = Complex64::new(1.0, 0.0);
    let mut n = 1i64;
    loop {
        let nf = n as f64;
        let bound = (nf * nf * lq + 2.0 * nf * z.im.abs()).exp();
        let qn = q.powf(nf * nf);
        let cz = (Complex64::new(0.0, 2.0 * nf) * z).exp() + (Complex64::new(0.0, -2.0 * nf) * z).exp();
        sum += qn * cz;
        if bound < 1e-18 * sum.norm() && nf * lq + z.im.abs() < 0.0 {
            break;
        }
        n += 1;
        if n > 1_000_000 {
            break;
        }
    }
    Ok(sum)
}
