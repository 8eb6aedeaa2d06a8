//! Complex trigonometric polynomials `Σ_{|m|≤d} c_m e^{2πimx}` on the unit circle.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::profiles::TrigPoly;

/// Number of uniform grid points used for suprema of a polynomial of degree `deg`.
pub fn sup_grid_size(deg: usize) -> usize {
    4096.max(64 * deg)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Fourier {
    deg: usize,
    c: Vec<Complex64>,
}

impl Fourier {
    pub fn zero() -> Self {
        Self::constant(Complex64::new(0.0, 0.0))
    }

    pub fn constant(c: Complex64) -> Self {
        Self { deg: 0, c: vec![c] }
    }

    /// The single mode `c·e^{2πimx}`.
    pub fn mode(m: i64, c: Complex64) -> Self {
        let mut f = Self::with_degree(m.unsigned_abs() as usize);
        f.set(m, c);
        f
    }

    pub fn with_degree(deg: usize) -> Self {
        Self { deg, c: vec![Complex64::new(0.0, 0.0); 2 * deg + 1] }
    }

    /// Builds from `(mode, coefficient)` pairs; repeated modes add up.
    pub fn from_modes(modes: &[(i64, Complex64)]) -> Self {
        let deg = modes.iter().map(|(m, _)| m.unsigned_abs() as usize).max().unwrap_or(0);
        let mut f = Self::with_degree(deg);
        for &(m, c) in modes {
            let i = f.index(m);
            f.c[i] += c;
        }
        f
    }

    pub fn from_trig(p: &TrigPoly) -> Self {
        let deg = p.max_harmonic();
        let mut f = Self::with_degree(deg);
        f.set(0, Complex64::new(p.constant, 0.0));
        for m in 1..=deg {
            let a = p.cos.get(m - 1).copied().unwrap_or(0.0);
            let b = p.sin.get(m - 1).copied().unwrap_or(0.0);
            f.set(m as i64, Complex64::new(a / 2.0, -b / 2.0));
            f.set(-(m as i64), Complex64::new(a / 2.0, b / 2.0));
        }
        f
    }

    /// Real part as a real trig polynomial.
    pub fn real_part(&self) -> TrigPoly {
        let mut cos = Vec::with_capacity(self.deg);
        let mut sin = Vec::with_capacity(self.deg);
        for m in 1..=self.deg as i64 {
            let (p, q) = (self.coeff(m), self.coeff(-m));
            // Re(p e^{iθ} + q e^{-iθ}) = Re(p+q) cos θ − Im(p−q) sin θ
            cos.push((p + q).re);
            sin.push(-(p - q).im);
        }
        TrigPoly::new(self.coeff(0).re, cos, sin)
    }

    pub fn degree(&self) -> usize {
        self.deg
    }

    fn index(&self, m: i64) -> usize {
        (m + self.deg as i64) as usize
    }

    pub fn coeff(&self, m: i64) -> Complex64 {
        if m.unsigned_abs() as usize > self.deg {
            Complex64::new(0.0, 0.0)
        } else {
            self.c[self.index(m)]
        }
    }

    pub fn set(&mut self, m: i64, v: Complex64) {
        assert!(m.unsigned_abs() as usize <= self.deg, "mode {m} beyond degree {}", self.deg);
        let i = self.index(m);
        self.c[i] = v;
    }

    pub fn modes(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let d = self.deg as i64;
        self.c.iter().enumerate().map(move |(i, &c)| (i as i64 - d, c))
    }

    pub fn map_modes(&self, f: impl Fn(i64, Complex64) -> Complex64) -> Self {
        let d = self.deg as i64;
        Self {
            deg: self.deg,
            c: self.c.iter().enumerate().map(|(i, &c)| f(i as i64 - d, c)).collect(),
        }
    }

    fn widened(&self, deg: usize) -> Self {
        let mut out = Self::with_degree(deg.max(self.deg));
        for (m, c) in self.modes() {
            out.set(m, c);
        }
        out
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.widened(o.deg);
        for (m, c) in o.modes() {
            let i = out.index(m);
            out.c[i] += c;
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        self.map_modes(|_, c| c * s)
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = Self::with_degree(self.deg + o.deg);
        for (m, a) in self.modes() {
            if a == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (n, b) in o.modes() {
                let i = out.index(m + n);
                out.c[i] += a * b;
            }
        }
        out
    }

    pub fn derivative(&self, order: u32) -> Self {
        self.map_modes(|m, c| c * Complex64::new(0.0, 2.0 * PI * m as f64).powu(order))
    }

    /// `x ↦ f(x + s)`.
    pub fn translate(&self, s: f64) -> Self {
        self.map_modes(|m, c| c * Complex64::from_polar(1.0, 2.0 * PI * m as f64 * s))
    }

    /// `x ↦ f(2x)`.
    pub fn frequency_double(&self) -> Self {
        let mut out = Self::with_degree(2 * self.deg);
        for (m, c) in self.modes() {
            out.set(2 * m, c);
        }
        out
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        let w = Complex64::from_polar(1.0, 2.0 * PI * x);
        let mut acc = self.coeff(0);
        let mut wp = Complex64::new(1.0, 0.0);
        for m in 1..=self.deg as i64 {
            wp *= w;
            acc += self.coeff(m) * wp + self.coeff(-m) * wp.conj();
        }
        acc
    }

    /// `Σ f̂_m conj(ĝ_m)`, the L² pairing on [0,1].
    pub fn inner(&self, o: &Self) -> Complex64 {
        self.modes().map(|(m, c)| c * o.coeff(m).conj()).sum()
    }

    /// `(Σ|f̂_m|²(1+|m|)^{2ℓ})^{1/2}`.
    pub fn sobolev_norm(&self, l: u32) -> f64 {
        self.modes()
            .map(|(m, c)| c.norm_sqr() * (1.0 + m.abs() as f64).powi(2 * l as i32))
            .sum::<f64>()
            .sqrt()
    }

    pub fn l2_norm(&self) -> f64 {
        self.sobolev_norm(0)
    }

    /// `sup_x Σ_{j≤ℓ} |∂^j f(x)|` on the uniform grid of [`sup_grid_size`] points.
    pub fn c_norm(&self, l: u32) -> f64 {
        let derivs: Vec<Fourier> = (0..=l).map(|j| self.derivative(j)).collect();
        let g = sup_grid_size(self.deg);
        let mut sup: f64 = 0.0;
        for i in 0..g {
            let x = i as f64 / g as f64;
            let s: f64 = derivs.iter().map(|d| d.eval(x).norm()).sum();
            sup = sup.max(s);
        }
        sup
    }

    pub fn sup_norm(&self) -> f64 {
        self.c_norm(0)
    }

    /// Largest |coefficient| difference; a cheap equality measure between polynomials.
    pub fn max_coeff_diff(&self, o: &Self) -> f64 {
        self.sub(o).modes().map(|(_, c)| c.norm()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn trig_round_trip() {
        let p = TrigPoly::new(0.25, vec![1.0, 0.0, -0.5], vec![0.3, 2.0]);
        let f = Fourier::from_trig(&p);
        for i in 0..17 {
            let x = i as f64 / 17.0 + 0.013;
            assert!((f.eval(x).re - p.eval(x)).abs() < 1e-13);
            assert!(f.eval(x).im.abs() < 1e-13);
        }
        let q = f.real_part();
        assert!(q.max_abs_diff(&p) < 1e-15);
    }

    #[test]
    fn product_matches_pointwise() {
        let f = Fourier::from_modes(&[(1, c(1.0, 0.5)), (-2, c(0.0, -1.0)), (0, c(0.3, 0.0))]);
        let g = Fourier::from_modes(&[(3, c(0.2, 0.1)), (-1, c(1.0, 0.0))]);
        let h = f.mul(&g);
        for i in 0..11 {
            let x = 0.07 * i as f64;
            assert!((h.eval(x) - f.eval(x) * g.eval(x)).norm() < 1e-13);
        }
    }

    #[test]
    fn derivative_and_translation() {
        let f = Fourier::mode(3, c(1.0, 0.0));
        let d = f.derivative(1);
        assert!((d.coeff(3) - c(0.0, 6.0 * PI)).norm() < 1e-13);
        let t = f.translate(0.1);
        assert!((t.eval(0.2) - f.eval(0.3)).norm() < 1e-13);
    }

    #[test]
    fn parseval_and_sobolev() {
        let f = Fourier::from_trig(&TrigPoly::cos(1, 1.0));
        assert!((f.l2_norm() - 0.5f64.sqrt()).abs() < 1e-15);
        // weight (1+1)^2 on both modes
        assert!((f.sobolev_norm(1) - 2.0 * 0.5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn c2_norm_of_cosine() {
        // sup (1+4π²)|cos t| + 2π|sin t| = sqrt((1+4π²)² + 4π²)
        let f = Fourier::from_trig(&TrigPoly::cos(1, 1.0));
        let exact = ((1.0 + 4.0 * PI * PI).powi(2) + 4.0 * PI * PI).sqrt();
        assert!((f.c_norm(2) - exact).abs() / exact < 1e-6);
    }
}
