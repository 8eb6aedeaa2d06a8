//! States of the theta space `ℋ_{2N}` as coefficient vectors in the orthonormal
//! theta basis, the operator `T^{α,β}_N` with matrix `Q^{α,β}_N`, Lagrangian states,
//! the shift and symbol operators, and quasimode certificates.
//!
//! Coefficient `j` of a state multiplies `θ_j`; row `r` of `Q` acts on coefficient
//! `2N−1−r`. In these coordinates `T⁺ : c_j ↦ c_{j−1}` and `T⁻ : c_j ↦ c_{j+1}`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier::Fourier;
use crate::jacobi::{self, PeriodicJacobiMatrix, SpectrumN};
use crate::linalg::SymMatrix;
use crate::profiles::{epsilon, ProfilePair, TrigPoly};

type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);

/// `e^{−iπt/N}` for integer `t`, reduced mod `2N` so the phase is exact in `t`.
fn phase(t: i64, n: usize) -> C64 {
    let r = t.rem_euclid(2 * n as i64);
    C64::from_polar(1.0, -PI * r as f64 / n as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FockState {
    pub n_param: usize,
    pub coeffs: Vec<C64>,
}

impl FockState {
    pub fn zeros(n: usize) -> Self {
        Self { n_param: n, coeffs: vec![ZERO; 2 * n] }
    }

    pub fn new(n: usize, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() != 2 * n {
            return Err(Error::InvalidArgument(format!("state for N = {n} needs {} coefficients", 2 * n)));
        }
        Ok(Self { n_param: n, coeffs })
    }

    /// Basis vector `θ_j`.
    pub fn basis(n: usize, j: usize) -> Self {
        let mut s = Self::zeros(n);
        s.coeffs[j] = C64::new(1.0, 0.0);
        s
    }

    /// `ψ^{N,k} = (2N)^{−1/2} Σ_j e^{−iπkj/N} θ_j`, eigenvector of `T^{0,0}_N` for `2cos(kπ/N)`.
    pub fn plane_wave(n: usize, k: i64) -> Self {
        let s = 1.0 / ((2 * n) as f64).sqrt();
        Self { n_param: n, coeffs: (0..2 * n as i64).map(|j| phase(k * j, n) * s).collect() }
    }

    pub fn random_unit(n: usize, rng: &mut impl Rng) -> Self {
        let v = Self { n_param: n, coeffs: (0..2 * n).map(|_| random_c64(rng)).collect() };
        v.normalized()
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    /// `⟨a, b⟩ = Σ a_j conj(b_j)`.
    pub fn inner(&self, o: &Self) -> C64 {
        self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a * b.conj()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> Self {
        self.scale(C64::new(1.0 / self.norm(), 0.0))
    }

    pub fn add(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a + b)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a - b)
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { n_param: self.n_param, coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    pub fn distance(&self, o: &Self) -> f64 {
        self.sub(o).norm()
    }

    fn zip(&self, o: &Self, f: impl Fn(C64, C64) -> C64) -> Self {
        assert_eq!(self.dim(), o.dim(), "states of different size");
        Self { n_param: self.n_param, coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| f(*a, *b)).collect() }
    }
}

fn random_c64(rng: &mut impl Rng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Complex trigonometric polynomial of degree `deg` with coefficients in the unit square.
pub fn random_fourier(rng: &mut impl Rng, deg: usize) -> Fourier {
    let modes: Vec<(i64, C64)> = (-(deg as i64)..=deg as i64).map(|m| (m, random_c64(rng))).collect();
    Fourier::from_modes(&modes)
}

/// Real trigonometric polynomial of degree `deg` with zero mean.
pub fn random_trig(rng: &mut impl Rng, deg: usize, amp: f64) -> TrigPoly {
    let cos = (0..deg).map(|_| amp * rng.gen_range(-1.0..1.0)).collect();
    let sin = (0..deg).map(|_| amp * rng.gen_range(-1.0..1.0)).collect();
    TrigPoly::new(0.0, cos, sin)
}

/// Lagrangian state `ψ^{N,k}_f` with coefficients
/// `c_j = (2N)^{−1/2} e^{−iπkj/N} Σ_m f̂_m e^{−πm²/2N} e^{−iπmj/N}`.
pub fn lagrangian_state(f: &Fourier, k: i64, n: usize) -> FockState {
    let s = 1.0 / ((2 * n) as f64).sqrt();
    let modes: Vec<(i64, C64)> =
        f.modes().map(|(m, c)| (m, c * (-PI * (m * m) as f64 / (2 * n) as f64).exp() * s)).collect();
    let coeffs = (0..2 * n as i64)
        .map(|j| modes.iter().map(|&(m, c)| c * phase((k + m) * j, n)).sum())
        .collect();
    FockState { n_param: n, coeffs }
}

/// `⟨ψ^{N,k}_f, ψ^{N,ℓ}_g⟩` from the Fourier data alone: the sum of
/// `f̂_m conj(ĝ_{m'}) e^{−πm²/2N} e^{−πm'²/2N}` over `m' ≡ m + k − ℓ (mod 2N)`.
pub fn inner_product_formula(f: &Fourier, g: &Fourier, k: i64, ell: i64, n: usize) -> C64 {
    let p = 2 * n as i64;
    let w = |m: i64| (-PI * (m * m) as f64 / p as f64).exp();
    let mut sum = ZERO;
    for (m, fm) in f.modes() {
        for (mp, gm) in g.modes() {
            if (m + k - ell - mp).rem_euclid(p) == 0 {
                sum += fm * gm.conj() * w(m) * w(mp);
            }
        }
    }
    sum
}

/// Self-adjoint operator on a finite-dimensional complex space.
pub trait SelfAdjoint {
    fn dim(&self) -> usize;
    fn apply(&self, v: &[C64]) -> Vec<C64>;
}

impl SelfAdjoint for SymMatrix {
    fn dim(&self) -> usize {
        SymMatrix::dim(self)
    }

    fn apply(&self, v: &[C64]) -> Vec<C64> {
        self.mul_cvec(v)
    }
}

/// `T^{α,β}_N` acting on theta coefficients through the doubled Jacobi matrix.
#[derive(Clone, Debug)]
pub struct TodaOperator {
    pub n: usize,
    pub q: PeriodicJacobiMatrix,
}

impl TodaOperator {
    pub fn new(pp: &ProfilePair, n: usize) -> Result<Self> {
        Ok(Self { n, q: jacobi::build_q(pp, n)? })
    }

    pub fn free(n: usize) -> Self {
        Self { n, q: PeriodicJacobiMatrix::free(2 * n) }
    }

    pub fn apply_state(&self, s: &FockState) -> FockState {
        FockState { n_param: self.n, coeffs: self.apply(&s.coeffs) }
    }

    pub fn spectrum(&self) -> Result<SpectrumN> {
        jacobi::eig_spectrum(&self.q)
    }
}

impl SelfAdjoint for TodaOperator {
    fn dim(&self) -> usize {
        2 * self.n
    }

    /// `c'_j = b_r c_j + a_r c_{j−1} + a_{r−1} c_{j+1}` with `r = 2N−1−j`.
    fn apply(&self, c: &[C64]) -> Vec<C64> {
        let len = 2 * self.n;
        (0..len)
            .map(|j| {
                let r = len - 1 - j;
                let rm = (r + len - 1) % len;
                c[j] * self.q.b[r] + c[(j + len - 1) % len] * self.q.a[r] + c[(j + 1) % len] * self.q.a[rm]
            })
            .collect()
    }
}

#[allow(non_snake_case)]
pub fn apply_T(pp: &ProfilePair, n: usize, state: &FockState) -> Result<FockState> {
    Ok(TodaOperator::new(pp, n)?.apply_state(state))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// `T⁺ : c_j ↦ c_{j−1}`, `T⁻ : c_j ↦ c_{j+1}`.
pub fn apply_shift(sign: Sign, state: &FockState) -> FockState {
    let len = state.dim();
    let coeffs = (0..len)
        .map(|j| match sign {
            Sign::Plus => state.coeffs[(j + len - 1) % len],
            Sign::Minus => state.coeffs[(j + 1) % len],
        })
        .collect();
    FockState { n_param: state.n_param, coeffs }
}

/// `D^±_ℓ f`: mode `m` of `f` times `e^{±iπ(ℓ+m)/N}`, i.e. `e^{±iπℓ/N} f(x ± 1/2N)`.
pub fn symbol_shift(sign: Sign, ell: i64, n: usize, f: &Fourier) -> Fourier {
    f.map_modes(|m, c| c * phase(-(sign.value() as i64) * (ell + m), n))
}

/// Symbol `D^{α,β}_ℓ` at lattice size `N`.
#[derive(Clone, Debug)]
pub struct SymbolParams {
    pub ell: i64,
    pub pp: ProfilePair,
    pub n: usize,
}

/// `D^{0,0}_ℓ f`: mode `m` times `2cos(ℓπ/N + πm/N)`.
pub fn free_symbol(ell: i64, n: usize, f: &Fourier) -> Fourier {
    f.map_modes(|m, c| c * (2.0 * phase(ell + m, n).re))
}

/// `D^{α,β}_ℓ f = D^{0,0}_ℓ f + (1/4N²)(β₂ f + α₂ D^{0,0}_ℓ f)`.
pub fn symbol_apply(sp: &SymbolParams, f: &Fourier) -> Fourier {
    let eps = C64::new(epsilon(sp.n), 0.0);
    let free = free_symbol(sp.ell, sp.n, f);
    let a2 = Fourier::from_trig(&sp.pp.alpha.frequency_double());
    let b2 = Fourier::from_trig(&sp.pp.beta.frequency_double());
    free.add(&b2.mul(f).add(&a2.mul(&free)).scale(eps))
}

/// `‖T^{α,β}_N ψ^{N,ℓ}_f − ψ^{N,ℓ}_{D^{α,β}_ℓ f}‖`.
pub fn prop35_residual(op: &TodaOperator, pp: &ProfilePair, ell: i64, f: &Fourier) -> f64 {
    let n = op.n;
    let lhs = op.apply_state(&lagrangian_state(f, ell, n));
    let sp = SymbolParams { ell, pp: pp.clone(), n };
    lhs.distance(&lagrangian_state(&symbol_apply(&sp, f), ell, n))
}

/// Diagonal of `T^{0,f}_N − T^{0,0}_N`: coefficient `j` times `(2N)^{−2} f((2N−j)/N)`.
fn potential_diagonal(f: &TrigPoly, n: usize) -> Vec<f64> {
    let eps = epsilon(n);
    (0..2 * n).map(|j| eps * f.eval((2 * n - j) as f64 / n as f64)).collect()
}

fn apply_diagonal(d: &[f64], s: &FockState) -> FockState {
    FockState { n_param: s.n_param, coeffs: s.coeffs.iter().zip(d).map(|(c, x)| c * x).collect() }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Checked {
    pub value: f64,
    pub bound: f64,
}

impl Checked {
    pub fn holds(&self) -> bool {
        self.value <= self.bound
    }
}

/// `‖(T^{0,f}_N − T^{0,0}_N)ψ^{N,k}_g − (1/4N²)ψ^{N,k}_{g f₂}‖` against
/// `(1/32πN³)(‖(g f₂)″‖_{C⁰} + ‖f‖_{C⁰}‖g″‖_{C⁰})`.
pub fn lemma37_residual(f: &TrigPoly, g: &Fourier, k: i64, n: usize) -> Checked {
    let psi = lagrangian_state(g, k, n);
    let lhs = apply_diagonal(&potential_diagonal(f, n), &psi);
    let f2 = Fourier::from_trig(&f.frequency_double());
    let gf2 = g.mul(&f2);
    let rhs = lagrangian_state(&gf2, k, n).scale(C64::new(epsilon(n), 0.0));
    let nf = n as f64;
    let bound = (gf2.derivative(2).sup_norm() + f.c_norm(0) * g.derivative(2).sup_norm()) / (32.0 * PI * nf.powi(3));
    Checked { value: lhs.distance(&rhs), bound }
}

/// Exact norm of `[T^{0,f}_N − T^{0,0}_N, T^±_N]`: the largest jump of the diagonal.
pub fn commutator_norm(f: &TrigPoly, n: usize) -> f64 {
    let d = potential_diagonal(f, n);
    let len = d.len();
    (0..len).map(|j| (d[j] - d[(j + len - 1) % len]).abs()).fold(0.0, f64::max)
}

/// Largest `‖[T^{0,f}_N − T^{0,0}_N, T^±_N]v‖` over `samples` random unit vectors,
/// together with the bound `‖f′‖_{C⁰}/N`.
pub fn commutator_bound(f: &TrigPoly, n: usize, sign: Sign, samples: usize, rng: &mut impl Rng) -> Checked {
    let d = potential_diagonal(f, n);
    let value = (0..samples)
        .map(|_| {
            let v = FockState::random_unit(n, rng);
            let a = apply_diagonal(&d, &apply_shift(sign, &v));
            let b = apply_shift(sign, &apply_diagonal(&d, &v));
            a.distance(&b)
        })
        .fold(0.0, f64::max);
    Checked { value, bound: f.derivative().c_norm(0) / n as f64 }
}

/// Deviation between `[D^±_k, M_{f₂}]g` and `(f(2x ± 1/N) − f(2x))D^±_k g`.
pub fn commutator_identity_residual(sign: Sign, f: &TrigPoly, g: &Fourier, k: i64, n: usize) -> f64 {
    let f2 = Fourier::from_trig(&f.frequency_double());
    let dg = symbol_shift(sign, k, n, g);
    let lhs = symbol_shift(sign, k, n, &f2.mul(g)).sub(&f2.mul(&dg));
    let jump = f2.translate(sign.value() / (2 * n) as f64).sub(&f2);
    lhs.max_coeff_diff(&jump.mul(&dg))
}

/// `ψ^{N,n}` coefficients of `w` for all `n = 0..2N−1`: `⟨w, ψ^{N,n}⟩`.
fn plane_wave_coefficients(w: &FockState) -> Vec<C64> {
    let n = w.n_param;
    let s = 1.0 / ((2 * n) as f64).sqrt();
    let tw: Vec<C64> = (0..2 * n as i64).map(|t| phase(-t, n)).collect();
    (0..2 * n)
        .map(|k| w.coeffs.iter().enumerate().map(|(j, c)| c * tw[(k * j) % (2 * n)]).sum::<C64>() * s)
        .collect()
}

fn from_plane_waves(coef: &[C64], n: usize) -> FockState {
    let s = 1.0 / ((2 * n) as f64).sqrt();
    let tw: Vec<C64> = (0..2 * n as i64).map(|t| phase(t, n)).collect();
    let coeffs = (0..2 * n)
        .map(|j| coef.iter().enumerate().map(|(k, c)| c * tw[(k * j) % (2 * n)]).sum::<C64>() * s)
        .collect();
    FockState { n_param: n, coeffs }
}

#[derive(Clone, Debug)]
pub struct BulkQuasimode {
    pub plus: FockState,
    pub minus: FockState,
    pub mu: f64,
}

/// First-order quasimodes for the double eigenvalue `−2cos(ℓπ/N)` of `T^{0,0}_N`,
/// `M < ℓ < N − M` with `M = [N^η]`.
pub fn bulk_quasimode(pp: &ProfilePair, n: usize, ell: usize, eta: f64) -> Result<BulkQuasimode> {
    let m = crate::hill::m_of(n, eta);
    if ell <= m || ell + m >= n {
        return Err(Error::InvalidArgument(format!("ℓ = {ell} outside the bulk ({m}, {})", n - m)));
    }
    let op = TodaOperator::new(pp, n)?;
    let free = TodaOperator::free(n);
    let c = (ell as f64 * PI / n as f64).cos();
    let ell_i = ell as i64;
    let gamma = Fourier::from_trig(&pp.beta).coeff(ell_i) - 2.0 * c * Fourier::from_trig(&pp.alpha).coeff(ell_i);
    let rot = if gamma.norm() > 0.0 { gamma.conj() / gamma.norm() } else { C64::new(1.0, 0.0) };
    let tp = FockState::plane_wave(n, n as i64 + ell_i);
    let tm = FockState::plane_wave(n, n as i64 - ell_i);
    let p = 2 * n;
    let skip = [(n + ell) % p, (n + p - ell) % p];
    let build = |s: f64| {
        let psi0 = tp.add(&tm.scale(rot * s)).scale(C64::new(FRAC_1_SQRT_2, 0.0));
        let pert = op.apply_state(&psi0).sub(&free.apply_state(&psi0));
        let mut coef = plane_wave_coefficients(&pert);
        for (k, x) in coef.iter_mut().enumerate() {
            if skip.contains(&k) {
                *x = ZERO;
            } else {
                *x = -*x / (2.0 * c + 2.0 * (k as f64 * PI / n as f64).cos());
            }
        }
        psi0.add(&from_plane_waves(&coef, n))
    };
    Ok(BulkQuasimode { plus: build(1.0), minus: build(-1.0), mu: -2.0 * c })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Edge {
    Left,
    Right,
}

/// Edge quasimode from the Hill eigenfunction `g` with eigenvalue `lambda`: on the
/// left `ψ^{N,N}_g` targeting `−2 + λ/4N²`, on the right `ψ^{N,0}_g` targeting
/// `2 − λ/4N²`.
pub fn edge_quasimode(g: &TrigPoly, lambda: f64, n: usize, side: Edge) -> (FockState, f64) {
    let f = Fourier::from_trig(g);
    let eps = epsilon(n);
    match side {
        Edge::Left => (lagrangian_state(&f, n as i64, n), -2.0 + eps * lambda),
        Edge::Right => (lagrangian_state(&f, 0, n), 2.0 - eps * lambda),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CertificateKind {
    Single,
    Pair,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuasimodeCertificate {
    pub kind: CertificateKind,
    pub mu: f64,
    /// `C = ‖(A − μ)ψ‖/‖ψ‖` (largest of the two for a pair).
    pub residual: f64,
    /// `θ = |⟨ψ₊, ψ₋⟩|` of the normalized pair; zero for a single state.
    pub gram_offdiag: f64,
    /// `C`, or `D = 8C(1 − θ)⁻¹·1.01` for a pair.
    pub radius: f64,
    pub nearest_eig: Option<f64>,
    /// Whether one (single) or two (pair) eigenvalues lie within the radius.
    pub captured: Option<bool>,
}

fn relative_residual(a: &impl SelfAdjoint, psi: &[C64], mu: f64) -> f64 {
    let norm = psi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let av = a.apply(psi);
    av.iter().zip(psi).map(|(x, y)| (x - y * mu).norm_sqr()).sum::<f64>().sqrt() / norm
}

// eigenvalues are only known to rounding, so the radius gets a floor of that size
fn capture_slack(mu: f64) -> f64 {
    1e-12 * (1.0 + mu.abs())
}

fn nearest(spectrum: &[f64], mu: f64) -> Option<f64> {
    spectrum.iter().copied().min_by(|x, y| (x - mu).abs().total_cmp(&(y - mu).abs()))
}

/// Certificate that `A` has an eigenvalue within `‖(A − μ)ψ‖/‖ψ‖` of `μ`, confirmed
/// against `spectrum` when given.
pub fn quasimode_certificate(
    a: &impl SelfAdjoint,
    psi: &[C64],
    mu: f64,
    spectrum: Option<&[f64]>,
) -> Result<QuasimodeCertificate> {
    if psi.len() != a.dim() {
        return Err(Error::InvalidArgument("state and operator dimensions differ".into()));
    }
    let residual = relative_residual(a, psi, mu);
    let nearest_eig = spectrum.and_then(|s| nearest(s, mu));
    let captured = nearest_eig.map(|e| (e - mu).abs() <= residual + capture_slack(mu));
    Ok(QuasimodeCertificate {
        kind: CertificateKind::Single,
        mu,
        residual,
        gram_offdiag: 0.0,
        radius: residual,
        nearest_eig,
        captured,
    })
}

/// Two almost orthogonal quasimodes with the same `μ` certify two eigenvalues
/// (with multiplicity) within `D = 8C(1 − θ)⁻¹·1.01`.
pub fn pair_certificate(
    a: &impl SelfAdjoint,
    plus: &[C64],
    minus: &[C64],
    mu: f64,
    spectrum: Option<&[f64]>,
) -> Result<QuasimodeCertificate> {
    let unit = |v: &[C64]| {
        let n = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        v.iter().map(|c| c / n).collect::<Vec<_>>()
    };
    let (p, m) = (unit(plus), unit(minus));
    let theta = p.iter().zip(&m).map(|(x, y)| x * y.conj()).sum::<C64>().norm();
    if !(theta < 1.0) {
        return Err(Error::DependentQuasimodes(theta));
    }
    let residual = relative_residual(a, &p, mu).max(relative_residual(a, &m, mu));
    let radius = 8.0 * residual / (1.0 - theta) * 1.01;
    let nearest_eig = spectrum.and_then(|s| nearest(s, mu));
    let captured = spectrum.map(|s| s.iter().filter(|&&e| (e - mu).abs() <= radius + capture_slack(mu)).count() >= 2);
    Ok(QuasimodeCertificate { kind: CertificateKind::Pair, mu, residual, gram_offdiag: theta, radius, nearest_eig, captured })
}
