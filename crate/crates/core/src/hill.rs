//! Hill operators `H = −∂² + q` on [0,1] with potentials of period 1/2: periodic
//! spectrum by Galerkin truncation, the Floquet discriminant by RK4, its product
//! representation, critical points and the counting boxes.

use std::collections::BTreeMap;
use std::f64::consts::{PI, SQRT_2};
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier::Fourier;
use crate::jacobi::{bisect, pairing_tol};
use crate::jet::Jet;
use crate::linalg::{self, SymMatrix};
use crate::profiles::{NormBundle, TrigPoly};

/// Lowest periodic eigenvalues on [0,1] with real orthonormal eigenfunctions.
#[derive(Clone, Debug)]
pub struct HillSpectrum {
    pub values: Vec<f64>,
    pub eigenfunctions: Vec<TrigPoly>,
    pub truncation: usize,
}

impl HillSpectrum {
    pub fn get(&self, j: usize) -> Result<f64> {
        self.values
            .get(j)
            .copied()
            .ok_or(Error::SpectrumTooShort { needed: j, available: self.values.len().saturating_sub(1) })
    }

    pub fn max_index(&self) -> usize {
        self.values.len() - 1
    }
}

/// Real orthonormal basis on [0,1]: index 0 is 1, index 2n−1 is √2 sin(2πnx),
/// index 2n is √2 cos(2πnx). Each entry lists its exponential coefficients.
fn real_basis(k: usize) -> Vec<Vec<(i64, Complex64)>> {
    let r = 1.0 / SQRT_2;
    let mut basis = vec![vec![(0, Complex64::new(1.0, 0.0))]];
    for n in 1..=k as i64 {
        basis.push(vec![(n, Complex64::new(0.0, -r)), (-n, Complex64::new(0.0, r))]);
        basis.push(vec![(n, Complex64::new(r, 0.0)), (-n, Complex64::new(r, 0.0))]);
    }
    basis
}

fn basis_frequency(idx: usize) -> f64 {
    2.0 * PI * idx.div_ceil(2) as f64
}

/// Matrix of `−∂² + q` on exponentials `|n| ≤ k`, expressed in the real basis; this
/// is a unitary change of basis of the Hermitian matrix with entries
/// `(2πn)²δ_{nm} + q̂_{n−m}`.
pub fn galerkin_matrix(q: &TrigPoly, k: usize) -> SymMatrix {
    let qh = q.to_fourier();
    let basis = real_basis(k);
    SymMatrix::from_fn(2 * k + 1, |i, j| {
        let mut v = Complex64::new(0.0, 0.0);
        for &(m, cm) in &basis[i] {
            for &(mp, cmp) in &basis[j] {
                v += cm.conj() * cmp * qh.coeff(m - mp);
            }
        }
        let kinetic = if i == j { basis_frequency(i).powi(2) } else { 0.0 };
        kinetic + v.re
    })
}

fn eigenfunction(v: &[f64]) -> TrigPoly {
    let k = (v.len() - 1) / 2;
    let cos = (1..=k).map(|n| SQRT_2 * v[2 * n]).collect();
    let sin = (1..=k).map(|n| SQRT_2 * v[2 * n - 1]).collect();
    TrigPoly::new(v[0], cos, sin)
}

/// Rotates a degenerate pair inside its span so that the second vector carries as
/// much cosine weight as possible; returns `(sine-like, cosine-like)`.
fn split_pair(u: &[f64], v: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let cos_dot = |x: &[f64], y: &[f64]| -> f64 {
        x.iter().zip(y).enumerate().filter(|(i, _)| i % 2 == 0).map(|(_, (a, b))| a * b).sum()
    };
    let (a, b, d) = (cos_dot(u, u), cos_dot(u, v), cos_dot(v, v));
    let th = 0.5 * (2.0 * b).atan2(a - d);
    let (s, c) = th.sin_cos();
    let cosine: Vec<f64> = u.iter().zip(v).map(|(x, y)| c * x + s * y).collect();
    let sine: Vec<f64> = u.iter().zip(v).map(|(x, y)| -s * x + c * y).collect();
    (sine, cosine)
}

fn fix_sign(v: &mut [f64]) {
    let big = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() + 1e-12 { x } else { m });
    if big < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Lowest `2·j_max + 1` periodic eigenvalues of `−∂² + q` with eigenfunctions, from a
/// Galerkin truncation at `|n| ≤ k`, checked against the truncation `2k`.
pub fn galerkin_eigs(q: &TrigPoly, k: usize, j_max: usize) -> Result<HillSpectrum> {
    if k < 2 * j_max + 8 || k < 4 * q.max_harmonic() {
        return Err(Error::InvalidArgument(format!(
            "truncation K = {k} too small for J_max = {j_max} and harmonic {}",
            q.max_harmonic()
        )));
    }
    let eg = linalg::eigh(&galerkin_matrix(q, k))?;
    let count = 2 * j_max + 1;
    let values: Vec<f64> = eg.values[..count].to_vec();

    let finer = linalg::eigvalsh(&galerkin_matrix(q, 2 * k))?;
    for (j, (x, y)) in values.iter().zip(&finer).enumerate() {
        let shift = (x - y).abs();
        if shift > 1e-8 * (1.0 + x.abs()) {
            return Err(Error::TruncationNotConverged { index: j, shift });
        }
    }

    let mut vecs: Vec<Vec<f64>> = eg.vectors[..count].to_vec();
    for n in 1..=j_max {
        let (i, j) = (2 * n - 1, 2 * n);
        if values[j] - values[i] <= pairing_tol(values[i]) {
            let (s, c) = split_pair(&vecs[i], &vecs[j]);
            vecs[i] = s;
            vecs[j] = c;
        }
    }
    for v in &mut vecs {
        fix_sign(v);
    }
    Ok(HillSpectrum { values, eigenfunctions: vecs.iter().map(|v| eigenfunction(v)).collect(), truncation: k })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HillDiscriminantSample {
    pub lambda: Complex64,
    pub value: Complex64,
    pub d1: Complex64,
    pub d2: Complex64,
}

/// Step count of the coarse RK4 pass at `λ`; the fine pass uses twice as many and
/// the two are combined by Richardson extrapolation.
pub fn step_count(lambda: Complex64) -> usize {
    let rule = (80.0 * (1.0 + lambda.norm().sqrt())).ceil() as usize;
    rule.max(400).next_power_of_two()
}

/// Floquet discriminant `Δ(λ) = y₁(½) + y₂′(½)` of `−y″ + qy = λy`.
///
/// Potential samples on each step grid are cached, so one solver should be reused
/// for many evaluations of the same potential.
pub struct HillSolver {
    q: TrigPoly,
    samples: Mutex<BTreeMap<usize, Arc<Vec<f64>>>>,
}

impl HillSolver {
    pub fn new(q: &TrigPoly) -> Self {
        Self { q: q.clone(), samples: Mutex::new(BTreeMap::new()) }
    }

    pub fn potential(&self) -> &TrigPoly {
        &self.q
    }

    /// `q` at the RK4 nodes of a `steps`-step pass over [0, ½] (spacing h/2).
    fn samples(&self, steps: usize) -> Arc<Vec<f64>> {
        let mut cache = self.samples.lock().expect("sample cache poisoned");
        cache
            .entry(steps)
            .or_insert_with(|| {
                let nodes = 2 * steps;
                Arc::new((0..=nodes).map(|i| self.q.eval(0.5 * i as f64 / nodes as f64)).collect())
            })
            .clone()
    }

    /// RK4 over `steps` steps using every `stride`-th sample.
    fn integrate(samples: &[f64], stride: usize, steps: usize, lambda: Complex64) -> Jet {
        let h = 0.5 / steps as f64;
        let lam = Jet::variable(lambda);
        let mut sols = [(Jet::real(1.0), Jet::real(0.0)), (Jet::real(0.0), Jet::real(1.0))];
        for s in 0..steps {
            let v0 = Jet::real(samples[2 * s * stride]) - lam;
            let vh = Jet::real(samples[(2 * s + 1) * stride]) - lam;
            let v1 = Jet::real(samples[(2 * s + 2) * stride]) - lam;
            for (y, yp) in sols.iter_mut() {
                let k1y = *yp;
                let k1p = v0 * *y;
                let k2y = *yp + k1p * (0.5 * h);
                let k2p = vh * (*y + k1y * (0.5 * h));
                let k3y = *yp + k2p * (0.5 * h);
                let k3p = vh * (*y + k2y * (0.5 * h));
                let k4y = *yp + k3p * h;
                let k4p = v1 * (*y + k3y * h);
                *y += (k1y + (k2y + k3y) * 2.0 + k4y) * (h / 6.0);
                *yp += (k1p + (k2p + k3p) * 2.0 + k4p) * (h / 6.0);
            }
        }
        sols[0].0 + sols[1].1
    }

    pub fn eval(&self, lambda: Complex64) -> Result<HillDiscriminantSample> {
        let coarse = step_count(lambda);
        let samples = self.samples(2 * coarse);
        let d_coarse = Self::integrate(&samples, 2, coarse, lambda);
        let d = Self::integrate(&samples, 1, 2 * coarse, lambda);
        let change = (d.v - d_coarse.v).norm();
        if change > 1e-8 * (1.0 + d.v.norm()) {
            return Err(Error::StepRefinement { lambda, change });
        }
        // RK4 error scales like h⁴: one Richardson step removes the leading term
        let r = |fine: Complex64, coarse: Complex64| fine + (fine - coarse) / 15.0;
        Ok(HillDiscriminantSample {
            lambda,
            value: r(d.v, d_coarse.v),
            d1: r(d.d1, d_coarse.d1),
            d2: r(d.d2, d_coarse.d2),
        })
    }

    pub fn eval_real(&self, lambda: f64) -> Result<HillDiscriminantSample> {
        self.eval(Complex64::new(lambda, 0.0))
    }
}

pub fn hill_discriminant(q: &TrigPoly, lambda: Complex64) -> Result<HillDiscriminantSample> {
    HillSolver::new(q).eval(lambda)
}

/// `sin z / z` for complex `z`.
pub(crate) fn sinc(z: Complex64) -> Complex64 {
    if z.norm() < 1e-4 {
        1.0 - z * z / 6.0 + z.powu(4) / 120.0
    } else {
        z.sin() / z
    }
}

/// `∏_{n>tail} (1 − λ/(4π²n²))²`, the zero-potential remainder of the product.
pub fn free_tail(lambda: Complex64, tail: usize) -> Complex64 {
    let z = (lambda / 4.0).sqrt();
    let mut head = Complex64::new(1.0, 0.0);
    for n in 1..=tail {
        head *= 1.0 - lambda / (4.0 * PI * PI * (n * n) as f64);
    }
    let r = sinc(z) / head;
    r * r
}

/// `(λ₀ − λ)∏_{n≤tail}(λ_{2n} − λ)(λ_{2n−1} − λ)/(16π⁴n⁴)` closed with [`free_tail`].
pub fn product_representation(s: &HillSpectrum, lambda: Complex64, tail: usize) -> Result<Complex64> {
    s.get(2 * tail)?;
    let mut p = Complex64::new(s.values[0], 0.0) - lambda;
    for n in 1..=tail {
        let w = 16.0 * PI.powi(4) * (n as f64).powi(4);
        p *= (s.values[2 * n] - lambda) * (s.values[2 * n - 1] - lambda) / w;
    }
    Ok(p * free_tail(lambda, tail))
}

/// Relative deviation `|P(λ) − (Δ² − 4)| / (1 + |Δ² − 4|)` of the truncated product.
pub fn product_representation_check(
    solver: &HillSolver,
    s: &HillSpectrum,
    lambda: Complex64,
    tail: usize,
) -> Result<f64> {
    let d = solver.eval(lambda)?.value;
    let target = d * d - 4.0;
    let p = product_representation(s, lambda, tail)?;
    Ok((p - target).norm() / (1.0 + target.norm()))
}

/// Critical point `λ̇_n ∈ [λ_{2n−1}, λ_{2n}]` of `Δ`, `n ≥ 1`.
pub fn derivative_zero_hill(solver: &HillSolver, s: &HillSpectrum, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("critical points are indexed from 1".into()));
    }
    let (lo, hi) = (s.get(2 * n - 1)?, s.get(2 * n)?);
    if hi - lo <= pairing_tol(lo) {
        return Ok(0.5 * (lo + hi));
    }
    bisect(|x| Ok(solver.eval_real(x)?.d1.re), lo, hi, |x| 1e-12 * (1.0 + x.abs()))
}

/// `λ̇_1, …, λ̇_count`.
pub fn derivative_zeros_hill(solver: &HillSolver, s: &HillSpectrum, count: usize) -> Result<Vec<f64>> {
    (1..=count).map(|n| derivative_zero_hill(solver, s, n)).collect()
}

/// Root of `Δ² − 4` within `h` of `guess`, located from the discriminant alone: a
/// sign change of `|Δ| − 2` is bisected; without one the root is double (a closed
/// gap) and sits at the critical point of `Δ`.
pub fn discriminant_root(solver: &HillSolver, guess: f64, h: f64) -> Result<f64> {
    let (lo, hi) = (guess - h, guess + h);
    let tol = |x: f64| 1e-13 * (1.0 + x.abs());
    let excess = |x: f64| Ok(solver.eval_real(x)?.value.re.abs() - 2.0);
    if excess(lo)?.signum() != excess(hi)?.signum() {
        return bisect(excess, lo, hi, tol);
    }
    bisect(|x| Ok(solver.eval_real(x)?.d1.re), lo, hi, tol)
}

/// `M = [N^η]`.
pub fn m_of(n: usize, eta: f64) -> usize {
    floor_pow(n as f64, eta)
}

fn floor_pow(x: f64, eta: f64) -> usize {
    // guard against x^η landing a hair below an integer
    let v = x.powf(eta);
    let r = v.round();
    if (v - r).abs() < 1e-12 * r.max(1.0) {
        r as usize
    } else {
        v.floor() as usize
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralBox {
    pub m: usize,
    pub f_of_m: usize,
    pub re_lo: f64,
    pub re_hi: f64,
    pub im_half: f64,
    pub variant: u8,
    /// Gap condition `λ_{2k+1} − λ_{2k} ≥ 6` for every `k ≤ [F(M)]`.
    pub gap_ok: bool,
    /// Smallest `N₀` with the gap condition holding for all available `k ≥ F(F(N₀))`.
    pub n0: f64,
}

impl SpectralBox {
    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re_lo && z.re <= self.re_hi && z.im.abs() <= self.im_half
    }

    /// Chebyshev-spaced points on the real segment plus corners and edge midpoints.
    pub fn grid(&self, density: usize) -> Vec<Complex64> {
        let mut pts = self.real_grid(density);
        let (a, b, h) = (self.re_lo, self.re_hi, self.im_half);
        let mid = 0.5 * (a + b);
        for (x, y) in [(a, h), (a, -h), (b, h), (b, -h), (mid, h), (mid, -h), (a, 0.0), (b, 0.0)] {
            pts.push(Complex64::new(x, y));
        }
        pts
    }

    pub fn real_grid(&self, density: usize) -> Vec<Complex64> {
        let (a, b) = (self.re_lo, self.re_hi);
        (0..density)
            .map(|i| {
                let t = ((2 * i + 1) as f64 * PI / (2 * density) as f64).cos();
                Complex64::new(0.5 * (a + b) - 0.5 * (b - a) * t, 0.0)
            })
            .collect()
    }
}

/// Box `[λ₀ − w, λ_{2[F(M)]} + w] + i[−w, w]` with `w = variant`, `M = [N^η]`.
pub fn counting_box(s: &HillSpectrum, n: usize, eta: f64, variant: u8) -> Result<SpectralBox> {
    if !(variant == 1 || variant == 2) {
        return Err(Error::InvalidArgument(format!("box variant {variant}")));
    }
    let m = m_of(n, eta);
    let f_of_m = floor_pow(m as f64, eta);
    let w = variant as f64;
    let re_lo = s.get(0)? - w;
    let re_hi = s.get(2 * f_of_m)? + w;
    s.get(2 * f_of_m + 1)?;
    let gap = |k: usize| s.values[2 * k + 1] - s.values[2 * k] >= 6.0;
    let gap_ok = (0..=f_of_m).all(gap);
    let last_bad = (0..=(s.max_index() - 1) / 2).rev().find(|&k| !gap(k));
    let n0 = match last_bad {
        None => 1.0,
        Some(k) => ((k + 1) as f64).powf(1.0 / (eta * eta)).ceil(),
    };
    Ok(SpectralBox { m, f_of_m, re_lo, re_hi, im_half: w, variant, gap_ok, n0 })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EigenfunctionBoundRow {
    pub j: usize,
    pub lambda: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub d4: f64,
    pub c0: f64,
    pub c0_second: f64,
    pub holds: [bool; 6],
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EigenfunctionBounds {
    pub m: usize,
    pub f: f64,
    pub precondition_met: bool,
    pub rows: Vec<EigenfunctionBoundRow>,
}

impl EigenfunctionBounds {
    pub fn all_hold(&self) -> bool {
        self.rows.iter().all(|r| r.holds.iter().all(|&h| h))
    }
}

/// Derivative bounds for the eigenfunctions `g_j`, `j ≤ 2M`, of `−∂² + q`: the four
/// L² bounds in terms of `B = 2K_{α,β} + 8π²F(N)²`, the eigenvalue bound
/// `|λ_j| ≤ 4π²(M + ½)²` and `‖g″‖_{C⁰} ≤ (‖q‖₀ + 8π²F²)‖g‖_{C⁰}`.
///
/// The bounds are evaluated even when `M > 2(1 + ‖q‖₀)e^{‖q‖₀}` fails; the report
/// records whether it holds.
pub fn eigenfunction_bound_check(
    s: &HillSpectrum,
    q: &TrigPoly,
    norms: &NormBundle,
    n: usize,
    eta: f64,
) -> Result<EigenfunctionBounds> {
    let f = (n as f64).powf(eta);
    let m = m_of(n, eta);
    s.get(2 * m)?;
    let q0 = q.sobolev_norm(0);
    let precondition_met = m as f64 > 2.0 * (1.0 + q0) * q0.exp();
    let k2 = 2.0 * norms.k_alpha_beta;
    let b = k2 + 8.0 * PI * PI * f * f;
    let rows = (0..=2 * m)
        .map(|j| {
            let g = Fourier::from_trig(&s.eigenfunctions[j]);
            let d = |o: u32| g.derivative(o).l2_norm();
            let (d1, d2, d3, d4) = (d(1), d(2), d(3), d(4));
            let c0 = g.sup_norm();
            let c0_second = g.derivative(2).sup_norm();
            let lambda = s.values[j];
            let holds = [
                d1 <= b.sqrt(),
                d2 <= b,
                d3 <= b.powf(1.5) + k2,
                d4 <= 3.0 * b * b + k2,
                lambda.abs() <= 4.0 * PI * PI * (m as f64 + 0.5).powi(2),
                c0_second <= (q0 + 8.0 * PI * PI * f * f) * c0,
            ];
            EigenfunctionBoundRow { j, lambda, d1, d2, d3, d4, c0, c0_second, holds }
        })
        .collect();
    Ok(EigenfunctionBounds { m, f, precondition_met, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn free_spectrum_and_eigenfunctions() {
        let s = galerkin_eigs(&TrigPoly::zero(), 24, 8).unwrap();
        assert!(s.values[0].abs() < 1e-12);
        for n in 1..=8 {
            let w = (2.0 * PI * n as f64).powi(2);
            assert!((s.values[2 * n - 1] - w).abs() < 1e-9);
            assert!((s.values[2 * n] - w).abs() < 1e-9);
            let sine = &s.eigenfunctions[2 * n - 1];
            let cosine = &s.eigenfunctions[2 * n];
            assert!((sine.sin_coeff(n) - SQRT_2).abs() < 1e-12);
            assert!((cosine.cos_coeff(n) - SQRT_2).abs() < 1e-12);
        }
        assert!((s.eigenfunctions[0].constant - 1.0).abs() < 1e-12);
    }

    #[test]
    fn free_discriminant_closed_forms() {
        let q = TrigPoly::zero();
        assert!((hill_discriminant(&q, c(0.0)).unwrap().value - c(2.0)).norm() < 1e-10);
        assert!((hill_discriminant(&q, c(4.0 * PI * PI)).unwrap().value - c(-2.0)).norm() < 1e-10);
        assert!(hill_discriminant(&q, c(PI * PI)).unwrap().value.norm() < 1e-10);
        let v = hill_discriminant(&q, c(-4.0)).unwrap().value;
        assert!((v - c(2.0 * 1f64.cosh())).norm() < 1e-10);
    }

    #[test]
    fn mathieu_eigenvalues_are_discriminant_roots() {
        let q = TrigPoly::cos(2, -2.0);
        let s = galerkin_eigs(&q, 40, 6).unwrap();
        let solver = HillSolver::new(&q);
        for &lam in &s.values[..5] {
            let d = solver.eval_real(lam).unwrap().value;
            assert!((d * d - 4.0).norm() < 1e-7, "λ = {lam}");
        }
    }

    #[test]
    fn gram_is_identity() {
        let q = TrigPoly::cos(2, -2.0).add(&TrigPoly::sin(2, 0.6));
        let s = galerkin_eigs(&q, 40, 6).unwrap();
        let fs: Vec<Fourier> = s.eigenfunctions.iter().map(Fourier::from_trig).collect();
        for i in 0..fs.len() {
            for j in 0..fs.len() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((fs[i].inner(&fs[j]).re - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn free_box() {
        let s = galerkin_eigs(&TrigPoly::zero(), 24, 8).unwrap();
        let b = counting_box(&s, 256, 0.25, 2).unwrap();
        assert_eq!((b.m, b.f_of_m), (4, 1));
        assert!((b.re_lo + 2.0).abs() < 1e-12);
        assert!((b.re_hi - 4.0 * PI * PI - 2.0).abs() < 1e-9);
        assert!(b.gap_ok);
        assert_eq!(b.n0, 1.0);
    }

    #[test]
    fn free_product_closed_form() {
        let s = galerkin_eigs(&TrigPoly::zero(), 80, 36).unwrap();
        let solver = HillSolver::new(&TrigPoly::zero());
        assert!(product_representation_check(&solver, &s, c(PI * PI), 32).unwrap() < 1e-6);
        let p = product_representation(&s, c(-1.0), 32).unwrap();
        let want = 4.0 * 0.5f64.sinh().powi(2);
        assert!((p - c(want)).norm() < 1e-6);
    }
}
