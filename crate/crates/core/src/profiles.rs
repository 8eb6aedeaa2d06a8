//! Profiles α, β as real trigonometric polynomials, Flaschka sampling and the Hill potentials.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::Fourier;
use crate::jacobi::PeriodicJacobiMatrix;

/// `constant + Σ_m cos[m-1]·cos(2πmx) + sin[m-1]·sin(2πmx)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrigPoly {
    #[serde(default)]
    pub constant: f64,
    #[serde(default)]
    pub cos: Vec<f64>,
    #[serde(default)]
    pub sin: Vec<f64>,
}

impl TrigPoly {
    pub fn new(constant: f64, cos: Vec<f64>, sin: Vec<f64>) -> Self {
        Self { constant, cos, sin }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// `amp·cos(2πmx)`.
    pub fn cos(m: usize, amp: f64) -> Self {
        assert!(m >= 1);
        let mut c = vec![0.0; m];
        c[m - 1] = amp;
        Self::new(0.0, c, vec![])
    }

    /// `amp·sin(2πmx)`.
    pub fn sin(m: usize, amp: f64) -> Self {
        assert!(m >= 1);
        let mut s = vec![0.0; m];
        s[m - 1] = amp;
        Self::new(0.0, vec![], s)
    }

    pub fn cos_coeff(&self, m: usize) -> f64 {
        self.cos.get(m - 1).copied().unwrap_or(0.0)
    }

    pub fn sin_coeff(&self, m: usize) -> f64 {
        self.sin.get(m - 1).copied().unwrap_or(0.0)
    }

    /// Highest harmonic with a nonzero coefficient (0 for constants).
    pub fn max_harmonic(&self) -> usize {
        let last = |v: &[f64]| v.iter().rposition(|&x| x != 0.0).map_or(0, |i| i + 1);
        last(&self.cos).max(last(&self.sin))
    }

    pub fn is_zero(&self) -> bool {
        self.constant == 0.0 && self.max_harmonic() == 0
    }

    pub fn eval(&self, x: f64) -> f64 {
        let mut acc = self.constant;
        for m in 1..=self.max_harmonic() {
            let (s, c) = (2.0 * PI * m as f64 * x).sin_cos();
            acc += self.cos_coeff(m) * c + self.sin_coeff(m) * s;
        }
        acc
    }

    /// `x ↦ p(2x)`: harmonic m moves to 2m.
    pub fn frequency_double(&self) -> Self {
        let h = self.max_harmonic();
        let mut cos = vec![0.0; 2 * h];
        let mut sin = vec![0.0; 2 * h];
        for m in 1..=h {
            cos[2 * m - 1] = self.cos_coeff(m);
            sin[2 * m - 1] = self.sin_coeff(m);
        }
        Self::new(self.constant, cos, sin)
    }

    pub fn derivative(&self) -> Self {
        let h = self.max_harmonic();
        let mut cos = vec![0.0; h];
        let mut sin = vec![0.0; h];
        for m in 1..=h {
            let w = 2.0 * PI * m as f64;
            cos[m - 1] = w * self.sin_coeff(m);
            sin[m - 1] = -w * self.cos_coeff(m);
        }
        Self::new(0.0, cos, sin)
    }

    pub fn add(&self, o: &Self) -> Self {
        let h = self.max_harmonic().max(o.max_harmonic());
        let cos = (1..=h).map(|m| self.cos_coeff(m) + o.cos_coeff(m)).collect();
        let sin = (1..=h).map(|m| self.sin_coeff(m) + o.sin_coeff(m)).collect();
        Self::new(self.constant + o.constant, cos, sin)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(
            s * self.constant,
            self.cos.iter().map(|c| s * c).collect(),
            self.sin.iter().map(|c| s * c).collect(),
        )
    }

    pub fn max_abs_diff(&self, o: &Self) -> f64 {
        let h = self.max_harmonic().max(o.max_harmonic());
        (1..=h)
            .flat_map(|m| {
                [(self.cos_coeff(m) - o.cos_coeff(m)).abs(), (self.sin_coeff(m) - o.sin_coeff(m)).abs()]
            })
            .fold((self.constant - o.constant).abs(), f64::max)
    }

    pub fn has_only_even_harmonics(&self) -> bool {
        (1..=self.max_harmonic())
            .step_by(2)
            .all(|m| self.cos_coeff(m) == 0.0 && self.sin_coeff(m) == 0.0)
    }

    pub fn to_fourier(&self) -> Fourier {
        Fourier::from_trig(self)
    }

    /// `sup_x Σ_{j≤ℓ} |∂^j p(x)|` on a uniform grid.
    pub fn c_norm(&self, l: u32) -> f64 {
        self.to_fourier().c_norm(l)
    }

    /// Sobolev norm `(Σ|p̂_n|²(1+|n|)^{2ℓ})^{1/2}`.
    pub fn sobolev_norm(&self, l: u32) -> f64 {
        self.to_fourier().sobolev_norm(l)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfilePair {
    #[serde(default)]
    pub alpha: TrigPoly,
    #[serde(default)]
    pub beta: TrigPoly,
}

impl ProfilePair {
    pub fn new(alpha: TrigPoly, beta: TrigPoly) -> Result<Self> {
        for p in [&alpha, &beta] {
            if p.constant != 0.0 {
                return Err(Error::NonZeroMean(p.constant));
            }
        }
        Ok(Self { alpha, beta })
    }

    pub fn free() -> Self {
        Self { alpha: TrigPoly::zero(), beta: TrigPoly::zero() }
    }

    pub fn is_free(&self) -> bool {
        self.alpha.is_zero() && self.beta.is_zero()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { alpha: self.alpha.scale(s), beta: self.beta.scale(s) }
    }

    pub fn max_harmonic(&self) -> usize {
        self.alpha.max_harmonic().max(self.beta.max_harmonic())
    }

    /// `(q₊, q₋) = (−2α(2x) − β(2x), −2α(2x) + β(2x))`.
    pub fn hill_potentials(&self) -> (TrigPoly, TrigPoly) {
        let a2 = self.alpha.frequency_double().scale(-2.0);
        let b2 = self.beta.frequency_double();
        (a2.add(&b2.scale(-1.0)), a2.add(&b2))
    }

    /// `K_{α,β} = ‖α‖_{C²} + ‖β‖_{C²} + 1`.
    pub fn k_alpha_beta(&self) -> f64 {
        self.alpha.c_norm(2) + self.beta.c_norm(2) + 1.0
    }

    pub fn norms(&self) -> NormBundle {
        let alpha = ProfileNorms::of(&self.alpha);
        let beta = ProfileNorms::of(&self.beta);
        let k_alpha_beta = alpha.c2 + beta.c2 + 1.0;
        NormBundle { alpha, beta, k_alpha_beta }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProfileNorms {
    pub c0: f64,
    pub c2: f64,
    pub sobolev: [f64; 3],
}

impl ProfileNorms {
    pub fn of(p: &TrigPoly) -> Self {
        let f = p.to_fourier();
        Self {
            c0: f.c_norm(0),
            c2: f.c_norm(2),
            sobolev: [f.sobolev_norm(0), f.sobolev_norm(1), f.sobolev_norm(2)],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormBundle {
    pub alpha: ProfileNorms,
    pub beta: ProfileNorms,
    pub k_alpha_beta: f64,
}

/// Coupling `ε = (2N)^{-2}`.
pub fn epsilon(n: usize) -> f64 {
    1.0 / (4.0 * (n * n) as f64)
}

/// `b_n = εβ(n/N)`, `a_n = 1 + εα(n/N)`, `n = 1..N`.
pub fn sample_flaschka(pp: &ProfilePair, n: usize) -> Result<PeriodicJacobiMatrix> {
    if n < 2 {
        return Err(Error::SizeTooSmall(n));
    }
    let eps = epsilon(n);
    let mut b = Vec::with_capacity(n);
    let mut a = Vec::with_capacity(n);
    for k in 1..=n {
        let x = k as f64 / n as f64;
        b.push(eps * pp.beta.eval(x));
        a.push(1.0 + eps * pp.alpha.eval(x));
    }
    PeriodicJacobiMatrix::new(b, a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluation() {
        assert_eq!(TrigPoly::cos(1, 1.0).eval(0.0), 1.0);
        assert!(TrigPoly::cos(1, 1.0).eval(0.25).abs() < 1e-16);
        assert!((TrigPoly::sin(2, 0.3).eval(0.125) - 0.3).abs() < 1e-16);
    }

    #[test]
    fn doubling() {
        let p = TrigPoly::sin(1, 1.0).add(&TrigPoly::cos(2, 1.0));
        let d = p.frequency_double();
        assert_eq!(d, TrigPoly::sin(2, 1.0).add(&TrigPoly::cos(4, 1.0)));
        assert_eq!(TrigPoly::new(0.7, vec![], vec![]).frequency_double().constant, 0.7);
        assert!(d.has_only_even_harmonics());
    }

    #[test]
    fn flaschka_examples() {
        let free = sample_flaschka(&ProfilePair::free(), 8).unwrap();
        assert!(free.b.iter().all(|&x| x == 0.0) && free.a.iter().all(|&x| x == 1.0));

        let pp = ProfilePair::new(TrigPoly::cos(1, 1.0), TrigPoly::zero()).unwrap();
        let m = sample_flaschka(&pp, 2).unwrap();
        assert!((m.a[0] - 15.0 / 16.0).abs() < 1e-15 && (m.a[1] - 17.0 / 16.0).abs() < 1e-15);

        let pp = ProfilePair::new(TrigPoly::zero(), TrigPoly::sin(1, 1.0)).unwrap();
        let m = sample_flaschka(&pp, 4).unwrap();
        let want = [1.0 / 64.0, 0.0, -1.0 / 64.0, 0.0];
        for (x, y) in m.b.iter().zip(want) {
            assert!((x - y).abs() < 1e-17);
        }
    }

    #[test]
    fn rejects_large_amplitude_and_nonzero_mean() {
        let pp = ProfilePair::new(TrigPoly::cos(1, 40.0), TrigPoly::zero()).unwrap();
        assert!(matches!(sample_flaschka(&pp, 2), Err(Error::NonPositiveOffDiagonal { .. })));
        assert!(ProfilePair::new(TrigPoly::new(0.1, vec![], vec![]), TrigPoly::zero()).is_err());
    }

    #[test]
    fn hill_potential_examples() {
        let pp = ProfilePair::new(TrigPoly::cos(1, 1.0), TrigPoly::zero()).unwrap();
        let (qp, qm) = pp.hill_potentials();
        assert_eq!(qp, TrigPoly::cos(2, -2.0).add(&TrigPoly::zero()));
        assert!(qp.max_abs_diff(&qm) == 0.0);

        let pp = ProfilePair::new(TrigPoly::zero(), TrigPoly::sin(1, 1.0)).unwrap();
        let (qp, qm) = pp.hill_potentials();
        assert!(qm.max_abs_diff(&TrigPoly::sin(2, 1.0)) == 0.0);
        assert!(qp.max_abs_diff(&TrigPoly::sin(2, -1.0)) == 0.0);
    }

    #[test]
    fn norm_examples() {
        assert_eq!(ProfilePair::free().norms().k_alpha_beta, 1.0);
        let pp = ProfilePair::new(TrigPoly::cos(1, 1.0), TrigPoly::zero()).unwrap();
        let nb = pp.norms();
        assert!((nb.alpha.sobolev[0] - 0.5f64.sqrt()).abs() < 1e-15);
        // sup of (1+4π²)|cos| + 2π|sin| is attained off x = 0
        let exact = 1.0 + ((1.0 + 4.0 * PI * PI).powi(2) + 4.0 * PI * PI).sqrt();
        assert!((nb.k_alpha_beta - exact).abs() < 1e-4);
    }
}
