//! Second-order forward-mode jets over the complex numbers.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;

/// Value with its first and second derivative in one complex parameter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub v: Complex64,
    pub d1: Complex64,
    pub d2: Complex64,
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

impl Jet {
    pub fn constant(v: Complex64) -> Self {
        Self { v, d1: ZERO, d2: ZERO }
    }

    pub fn real(v: f64) -> Self {
        Self::constant(Complex64::new(v, 0.0))
    }

    /// The independent variable at `x`.
    pub fn variable(x: Complex64) -> Self {
        Self { v: x, d1: Complex64::new(1.0, 0.0), d2: ZERO }
    }

    pub fn scale(self, s: f64) -> Self {
        Self { v: self.v * s, d1: self.d1 * s, d2: self.d2 * s }
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet { v: self.v + o.v, d1: self.d1 + o.d1, d2: self.d2 + o.d2 }
    }
}

impl AddAssign for Jet {
    fn add_assign(&mut self, o: Jet) {
        *self = *self + o;
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet { v: self.v - o.v, d1: self.d1 - o.d1, d2: self.d2 - o.d2 }
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet {
            v: self.v * o.v,
            d1: self.d1 * o.v + self.v * o.d1,
            d2: self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2,
        }
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, s: f64) -> Jet {
        self.scale(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_derivatives() {
        let x = Jet::variable(Complex64::new(0.7, -0.2));
        let y = x * x * x - x * 2.0 + Jet::real(1.0);
        let z = x.v;
        assert!((y.v - (z * z * z - 2.0 * z + 1.0)).norm() < 1e-15);
        assert!((y.d1 - (3.0 * z * z - 2.0)).norm() < 1e-15);
        assert!((y.d2 - 6.0 * z).norm() < 1e-15);
    }
}
