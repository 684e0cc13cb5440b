use crate::error::{Error, Result};

/// `P(ρ, β)` with `Re c₂(β) = d₂ + a₃₂₀₁β₂` and `Re c₃ = d₃`.
fn p_system(d2: f64, d3: f64, a: f64, rho: f64, b: [f64; 2]) -> ([f64; 2], [[f64; 2]; 2]) {
    let r2 = rho * rho;
    let r4 = r2 * r2;
    let c2 = d2 + a * b[1];
    let p = [b[0] + b[1] * r2 + c2 * r4 + d3 * r4 * r2, b[1] + 2.0 * c2 * r2 + 3.0 * d3 * r4];
    let j = [[1.0, r2 + a * r4], [0.0, 1.0 + 2.0 * a * r2]];
    (p, j)
}

/// Solves the truncated double-zero system of the amplitude equation for `β` by Newton's method.
pub fn amplitude_oracle(d2: f64, d3: f64, a3201: f64, rho: f64) -> Result<[f64; 2]> {
    if d2 == 0.0 {
        return Err(Error::Invalid("d2 must be nonzero".into()));
    }
    let r2 = rho * rho;
    let mut b = [d2 * r2 * r2 + 2.0 * (d3 - a3201 * d2) * r2 * r2 * r2, -2.0 * d2 * r2 + (4.0 * a3201 * d2 - 3.0 * d3) * r2 * r2];
    for _ in 0..20 {
        let (p, j) = p_system(d2, d3, a3201, rho, b);
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.abs() < 1e-12 {
            return Err(Error::Convergence(alloc::format!("amplitude system singular at rho = {rho}")));
        }
        let db = [(j[1][1] * p[0] - j[0][1] * p[1]) / det, (j[0][0] * p[1] - j[1][0] * p[0]) / det];
        b = [b[0] - db[0], b[1] - db[1]];
        let scale = b[0].abs().max(b[1].abs());
        if db[0].abs().max(db[1].abs()) <= 1e-15 * scale || scale == 0.0 {
            return Ok(b);
        }
    }
    Err(Error::Convergence(alloc::format!("amplitude Newton iteration at rho = {rho}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predictor::{beta_of_eps, Order};

    #[test]
    fn oracle_basics() {
        assert_eq!(amplitude_oracle(-1.0, 0.0, 0.0, 0.0).unwrap(), [0.0, 0.0]);
        let b = amplitude_oracle(-1.0, 0.0, 0.0, 0.05).unwrap();
        let f = beta_of_eps(-1.0, 0.0, 0.0, 0.05, Order::Higher);
        assert!((b[0] - f[0]).abs() < 10.0 * libm::pow(0.05, 7.0));
        assert!((b[1] - f[1]).abs() < 10.0 * libm::pow(0.05, 5.0));
        let (p, _) = p_system(-1.0, 0.0, 0.0, 0.05, b);
        assert!(p[0].abs() < 1e-18 && p[1].abs() < 1e-16);
    }
}
