//! Periodic Jacobi matrices `L(b, a)`, the doubled matrix `Q`, their spectra, the
//! discriminant `Δ_N` and the Casimirs.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::linalg::{self, SymMatrix};
use crate::profiles::{sample_flaschka, ProfilePair};

/// Two eigenvalues count as equal when they differ by at most this.
pub fn pairing_tol(lambda: f64) -> f64 {
    1e-8 * (1.0 + lambda.abs())
}

/// Diagonal `b` and couplings `a` of a periodic Jacobi matrix; `a[i]` couples sites
/// `i` and `i+1 mod n`, so `a[n-1]` is the corner entry.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicJacobiMatrix {
    pub b: Vec<f64>,
    pub a: Vec<f64>,
}

impl PeriodicJacobiMatrix {
    pub fn new(b: Vec<f64>, a: Vec<f64>) -> Result<Self> {
        if b.len() != a.len() {
            return Err(Error::InvalidArgument(format!("b has {} entries, a has {}", b.len(), a.len())));
        }
        if b.len() < 2 {
            return Err(Error::SizeTooSmall(b.len()));
        }
        if let Some((i, &v)) = a.iter().enumerate().find(|(_, &v)| !(v > 0.0)) {
            return Err(Error::NonPositiveOffDiagonal { index: i + 1, value: v });
        }
        Ok(Self { b, a })
    }

    pub fn free(n: usize) -> Self {
        Self { b: vec![0.0; n], a: vec![1.0; n] }
    }

    pub fn n_sites(&self) -> usize {
        self.b.len()
    }

    /// `((b, b), (a, a))`.
    pub fn doubled(&self) -> Self {
        let mut b = self.b.clone();
        b.extend_from_slice(&self.b);
        let mut a = self.a.clone();
        a.extend_from_slice(&self.a);
        Self { b, a }
    }

    /// Dense `L(b, a)`. For two sites the corner and the off-diagonal coincide and
    /// the coupling is `a₁ + a₂`.
    pub fn build_l(&self) -> SymMatrix {
        let n = self.n_sites();
        let mut m = SymMatrix::zeros(n);
        for i in 0..n {
            m.set(i, i, self.b[i]);
        }
        if n == 2 {
            m.set(0, 1, self.a[0] + self.a[1]);
        } else {
            for i in 0..n - 1 {
                m.set(i, i + 1, self.a[i]);
            }
            m.set(0, n - 1, self.a[n - 1]);
        }
        m
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        if self.n_sites() == 2 {
            linalg::eigvalsh(&self.build_l())
        } else {
            linalg::cyclic_eigenvalues(&self.b, &self.a)
        }
    }
}

/// `Q^{α,β}_N = L((b, b), (a, a))` for the Flaschka samples of `pp`.
pub fn build_q(pp: &ProfilePair, n: usize) -> Result<PeriodicJacobiMatrix> {
    Ok(sample_flaschka(pp, n)?.doubled())
}

/// The 2N eigenvalues of `Q` with multiplicity, ascending.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumN {
    pub n_sites: usize,
    pub values: Vec<f64>,
}

impl SpectrumN {
    pub fn get(&self, j: usize) -> f64 {
        self.values[j]
    }

    /// Indices `k` where the strict gap `λ_{2k} < λ_{2k+1}` fails under the pairing tolerance.
    pub fn interlacing_violations(&self) -> Vec<usize> {
        (0..self.n_sites)
            .filter(|&k| self.values[2 * k + 1] - self.values[2 * k] <= pairing_tol(self.values[2 * k]))
            .collect()
    }
}

/// Spectrum of the doubled matrix `q` (even size `2N`).
pub fn eig_spectrum(q: &PeriodicJacobiMatrix) -> Result<SpectrumN> {
    let len = q.n_sites();
    if !len.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("doubled matrix must have even size, got {len}")));
    }
    Ok(SpectrumN { n_sites: len / 2, values: q.eigenvalues()? })
}

pub fn spectrum(pp: &ProfilePair, n: usize) -> Result<SpectrumN> {
    eig_spectrum(&build_q(pp, n)?)
}

/// Indices of the eigenvalues of `L` inside the spectrum of `Q`.
pub fn floquet_indices(n: usize) -> Vec<usize> {
    let keep: [usize; 2] = if n.is_multiple_of(2) { [0, 3] } else { [1, 2] };
    (0..2 * n).filter(|j| keep.contains(&(j % 4))).collect()
}

pub fn floquet_subset(s: &SpectrumN) -> Vec<f64> {
    floquet_indices(s.n_sites).into_iter().map(|j| s.values[j]).collect()
}

/// Largest deviation between the Floquet subset of `s` and the spectrum of `l`;
/// errors above `1e-9`.
pub fn check_floquet(s: &SpectrumN, l: &PeriodicJacobiMatrix) -> Result<f64> {
    let direct = linalg::eigvalsh(&l.build_l())?;
    let sub = floquet_subset(s);
    if sub.len() != direct.len() {
        return Err(Error::SpectrumMismatch(format!("{} vs {} eigenvalues", sub.len(), direct.len())));
    }
    let dev = sub.iter().zip(&direct).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    if dev > 1e-9 {
        return Err(Error::SpectrumMismatch(format!("floquet subset deviates by {dev:e}")));
    }
    Ok(dev)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiscriminantSample {
    pub mu: Complex64,
    pub value: Complex64,
    pub d1: Complex64,
    pub d2: Complex64,
}

/// `Δ_N(μ) = y₁(N) + y₂(N+1)` for the recurrence
/// `a_{k−1}y(k−1) + b_k y(k) + a_k y(k+1) = μ y(k)`, with μ-derivatives.
pub fn discriminant(m: &PeriodicJacobiMatrix, mu: Complex64) -> DiscriminantSample {
    let n = m.n_sites();
    let x = Jet::variable(mu);
    // (y(k-1), y(k)) starting at k = 1
    let (mut p1, mut c1) = (Jet::real(1.0), Jet::real(0.0));
    let (mut p2, mut c2) = (Jet::real(0.0), Jet::real(1.0));
    let mut y1_n = c1;
    for k in 1..=n {
        let bk = m.b[k - 1];
        let ak = m.a[k - 1];
        let akm1 = m.a[(k + n - 2) % n];
        let coef = x - Jet::real(bk);
        let n1 = (coef * c1 - p1 * akm1) * (1.0 / ak);
        let n2 = (coef * c2 - p2 * akm1) * (1.0 / ak);
        (p1, c1) = (c1, n1);
        (p2, c2) = (c2, n2);
        if k == n - 1 {
            y1_n = c1;
        }
    }
    let delta = y1_n + c2;
    DiscriminantSample { mu, value: delta.v, d1: delta.d1, d2: delta.d2 }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Casimirs {
    /// `q_N = ∏ a_n`.
    pub q: f64,
    /// `q_N − 1`, accumulated in log space so that it keeps its relative accuracy.
    pub q_minus_one: f64,
    /// `p_N = ½ tr Q = Σ b_n`.
    pub p: f64,
}

/// Casimirs of the `N`-site matrix `m` (not the doubled one).
pub fn casimirs(m: &PeriodicJacobiMatrix) -> Casimirs {
    let log_q: f64 = m.a.iter().map(|&a| (a - 1.0).ln_1p()).sum();
    let q_minus_one = log_q.exp_m1();
    Casimirs { q: 1.0 + q_minus_one, q_minus_one, p: m.b.iter().sum() }
}

/// `log ∏ (λ_j − μ)` as a complex number (phase modulo 2π); `None` if a factor vanishes.
pub fn log_product(values: impl IntoIterator<Item = f64>, mu: Complex64) -> Option<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for v in values {
        let f = Complex64::new(v, 0.0) - mu;
        if f == Complex64::new(0.0, 0.0) {
            return None;
        }
        acc += f.ln();
    }
    Some(acc)
}

/// `|Δ² − 4 − q_N^{−2}∏(λ_j − μ)| / (1 + |Δ²|)` for the `N`-site matrix `m` and the
/// spectrum `s` of its double.
pub fn char_product_check(m: &PeriodicJacobiMatrix, s: &SpectrumN, mu: Complex64) -> f64 {
    let d = discriminant(m, mu).value;
    let lhs = d * d - 4.0;
    let c = casimirs(m);
    let rhs = match log_product(s.values.iter().copied(), mu) {
        Some(l) => (l - 2.0 * c.q.ln()).exp(),
        None => Complex64::new(0.0, 0.0),
    };
    (lhs - rhs).norm() / (1.0 + (d * d).norm())
}

/// Root of `f` in `[lo, hi]` by bisection down to `tol(x)`; `f` must change sign.
pub(crate) fn bisect(f: impl Fn(f64) -> Result<f64>, lo: f64, hi: f64, tol: impl Fn(f64) -> f64) -> Result<f64> {
    let (mut lo, mut hi) = (lo, hi);
    let mut flo = f(lo)?;
    let fhi = f(hi)?;
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::NoSignChange { lo, hi });
    }
    while hi - lo > tol(0.5 * (lo + hi)) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Critical points `λ̇_n ∈ [λ_{2n−1}, λ_{2n}]` of `Δ_N`, `n = 1..N−1`.
pub fn derivative_zeros(m: &PeriodicJacobiMatrix, s: &SpectrumN) -> Result<Vec<f64>> {
    let n = m.n_sites();
    (1..n)
        .map(|k| {
            let (lo, hi) = (s.values[2 * k - 1], s.values[2 * k]);
            if hi - lo <= pairing_tol(lo) {
                return Ok(0.5 * (lo + hi));
            }
            bisect(
                |x| Ok(discriminant(m, Complex64::new(x, 0.0)).d1.re),
                lo,
                hi,
                |x| 1e-12 * (1.0 + x.abs()),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::TrigPoly;
    use std::f64::consts::PI;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn build_l_shapes() {
        let l = PeriodicJacobiMatrix::free(4).build_l();
        for i in 0..4 {
            for j in 0..4 {
                let nb = (i + 1) % 4 == j || (j + 1) % 4 == i;
                assert_eq!(l.get(i, j), if nb { 1.0 } else { 0.0 });
            }
        }
        let vals = PeriodicJacobiMatrix::free(4).eigenvalues().unwrap();
        for (x, y) in vals.iter().zip([-2.0, 0.0, 0.0, 2.0]) {
            assert!((x - y).abs() < 1e-14);
        }
        let two = PeriodicJacobiMatrix::new(vec![0.0, 0.0], vec![0.5, 0.75]).unwrap().build_l();
        assert_eq!(two.get(0, 1), 1.25);
    }

    #[test]
    fn build_q_examples() {
        let pp = ProfilePair::new(TrigPoly::cos(1, 1.0), TrigPoly::zero()).unwrap();
        let q = build_q(&pp, 2).unwrap();
        let want = [15.0 / 16.0, 17.0 / 16.0, 15.0 / 16.0, 17.0 / 16.0];
        for (x, y) in q.a.iter().zip(want) {
            assert!((x - y).abs() < 1e-15);
        }
        let dense = build_q(&ProfilePair::free(), 4).unwrap().build_l();
        let nz: Vec<usize> = (0..8).filter(|&j| dense.get(0, j) != 0.0).collect();
        assert_eq!(nz, vec![1, 7]);
    }

    #[test]
    fn free_spectrum_n2() {
        let s = spectrum(&ProfilePair::free(), 2).unwrap();
        for (x, y) in s.values.iter().zip([-2.0, 0.0, 0.0, 2.0]) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn floquet_index_pattern() {
        assert_eq!(floquet_indices(4), vec![0, 3, 4, 7]);
        assert_eq!(floquet_indices(3), vec![1, 2, 5]);
        for n in [3, 4, 7, 8] {
            let s = spectrum(&ProfilePair::free(), n).unwrap();
            check_floquet(&s, &PeriodicJacobiMatrix::free(n)).unwrap();
        }
    }

    #[test]
    fn discriminant_n2() {
        let d = discriminant(&PeriodicJacobiMatrix::free(2), c(0.0));
        assert!((d.value - c(-2.0)).norm() < 1e-15);
        assert!(d.d1.norm() < 1e-15);
        assert!((d.d2 - c(2.0)).norm() < 1e-15);
    }

    #[test]
    fn discriminant_free_chebyshev() {
        for n in [3usize, 8, 17] {
            let m = PeriodicJacobiMatrix::free(n);
            for i in 0..20 {
                let th = 0.05 + 3.0 * i as f64 / 20.0;
                let d = discriminant(&m, c(2.0 * th.cos()));
                assert!((d.value.re - 2.0 * (n as f64 * th).cos()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn casimir_examples() {
        let pp = ProfilePair::new(TrigPoly::cos(1, 1.0), TrigPoly::zero()).unwrap();
        let cs = casimirs(&sample_flaschka(&pp, 2).unwrap());
        assert!((cs.q - 255.0 / 256.0).abs() < 1e-15);
        let cs = casimirs(&PeriodicJacobiMatrix::free(5));
        assert_eq!((cs.q, cs.p), (1.0, 0.0));
    }

    #[test]
    fn free_derivative_zeros() {
        let m = PeriodicJacobiMatrix::free(4);
        let s = eig_spectrum(&m.doubled()).unwrap();
        let z = derivative_zeros(&m, &s).unwrap();
        for (x, y) in z.iter().zip([-(2f64.sqrt()), 0.0, 2f64.sqrt()]) {
            assert!((x - y).abs() < 1e-12);
        }
        let m = PeriodicJacobiMatrix::free(2);
        let s = eig_spectrum(&m.doubled()).unwrap();
        assert!(derivative_zeros(&m, &s).unwrap()[0].abs() < 1e-14);
    }

    #[test]
    fn char_product_free() {
        let m = PeriodicJacobiMatrix::free(4);
        let s = eig_spectrum(&m.doubled()).unwrap();
        assert!(char_product_check(&m, &s, c(0.0)) < 1e-12);
        let th = PI / 7.0;
        assert!(char_product_check(&m, &s, Complex64::new(2.0 * th.cos(), 0.3)) < 1e-12);
    }
}
