//! Library results against independently coded oracles: inertia counts for the
//! spectrum, a transfer-matrix product for the lattice discriminant, and an
//! exponential midpoint propagator for the Hill discriminant.

use std::f64::consts::PI;

use toda_kdv::hill::{galerkin_eigs, HillSolver};
use toda_kdv::jacobi::{self, discriminant, PeriodicJacobiMatrix};
use toda_kdv::profiles::{sample_flaschka, ProfilePair, TrigPoly};
use toda_kdv::Complex64;

type C = Complex64;

fn profiles() -> Vec<ProfilePair> {
    vec![
        ProfilePair::new(TrigPoly::cos(1, 1.0), TrigPoly::zero()).unwrap(),
        ProfilePair::new(TrigPoly::zero(), TrigPoly::sin(1, 1.0)).unwrap(),
        ProfilePair::new(TrigPoly::new(0.0, vec![0.7, 0.0, -0.4], vec![0.2]), TrigPoly::new(0.0, vec![0.3], vec![0.0, 0.9]))
            .unwrap(),
    ]
}

/// Dense matrix of the cyclic tridiagonal operator with diagonal `b` and couplings `a`.
fn dense(m: &PeriodicJacobiMatrix) -> Vec<Vec<f64>> {
    let n = m.n_sites();
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        d[i][i] = m.b[i];
        let j = (i + 1) % n;
        d[i][j] += m.a[i];
        d[j][i] += m.a[i];
    }
    d
}

/// Number of eigenvalues below `x`, from the signs of the pivots of `A − x` (Sylvester).
fn count_below(a: &[Vec<f64>], x: f64) -> usize {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] -= x;
    }
    let mut neg = 0;
    for k in 0..n {
        let p = m[k][k];
        assert!(p.abs() > 1e-300, "zero pivot");
        if p < 0.0 {
            neg += 1;
        }
        for i in k + 1..n {
            let f = m[i][k] / p;
            if f == 0.0 {
                continue;
            }
            for j in k..n {
                m[i][j] -= f * m[k][j];
            }
        }
    }
    neg
}

#[test]
fn spectrum_matches_inertia_counts() {
    for pp in profiles() {
        for n in [8usize, 12, 20] {
            let q = jacobi::build_q(&pp, n).unwrap();
            let s = jacobi::eig_spectrum(&q).unwrap();
            let a = dense(&q);
            // probe between consecutive distinct eigenvalues and just outside
            for w in s.values.windows(2) {
                if w[1] - w[0] > 1e-9 {
                    let x = 0.5 * (w[0] + w[1]);
                    let below = s.values.iter().filter(|&&v| v < x).count();
                    assert_eq!(count_below(&a, x), below, "N = {n}, x = {x}");
                }
            }
            assert_eq!(count_below(&a, s.values[0] - 0.1), 0);
            assert_eq!(count_below(&a, s.values[2 * n - 1] + 0.1), 2 * n);
            // each eigenvalue sits where the count jumps
            for &v in &s.values {
                let lo = count_below(&a, v - 1e-7);
                let hi = count_below(&a, v + 1e-7);
                assert!(hi > lo, "no eigenvalue at {v}");
            }
        }
    }
}

/// Trace of the product of transfer matrices `(y_k, y_{k−1}) ↦ (y_{k+1}, y_k)`.
fn transfer_trace(m: &PeriodicJacobiMatrix, mu: C) -> C {
    let n = m.n_sites();
    let mut t = [[C::new(1.0, 0.0), C::new(0.0, 0.0)], [C::new(0.0, 0.0), C::new(1.0, 0.0)]];
    for k in 0..n {
        let ak = m.a[k];
        let akm1 = m.a[(k + n - 1) % n];
        let step = [[(mu - m.b[k]) / ak, C::new(-akm1 / ak, 0.0)], [C::new(1.0, 0.0), C::new(0.0, 0.0)]];
        let mut r = [[C::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                r[i][j] = step[i][0] * t[0][j] + step[i][1] * t[1][j];
            }
        }
        t = r;
    }
    t[0][0] + t[1][1]
}

#[test]
fn lattice_discriminant_matches_transfer_matrices() {
    for pp in profiles() {
        for n in [8usize, 33, 128] {
            let m = sample_flaschka(&pp, n).unwrap();
            for mu in [C::new(-1.9, 0.0), C::new(0.3, 0.2), C::new(1.99, -0.05), C::new(2.2, 0.0)] {
                let d = discriminant(&m, mu);
                let want = transfer_trace(&m, mu);
                assert!((d.value - want).norm() <= 1e-10 * (1.0 + want.norm()), "N = {n}, μ = {mu}");
                let h = 1e-5;
                let fd = (transfer_trace(&m, mu + h) - transfer_trace(&m, mu - h)) / (2.0 * h);
                assert!((d.d1 - fd).norm() <= 1e-5 * (1.0 + fd.norm()), "derivative at N = {n}, μ = {mu}");
            }
        }
    }
}

#[test]
fn lattice_discriminant_vanishing_condition() {
    // Δ_N² − 4 vanishes on the spectrum of the doubled matrix
    for pp in profiles() {
        let n = 24;
        let m = sample_flaschka(&pp, n).unwrap();
        let s = jacobi::spectrum(&pp, n).unwrap();
        for &v in &s.values {
            let d = transfer_trace(&m, C::new(v, 0.0));
            assert!((d * d - 4.0).norm() < 1e-7, "λ = {v}");
        }
    }
}

/// `Δ(λ)` by exact propagation over `steps` cells with `q` frozen at cell midpoints.
fn midpoint_propagator(q: &TrigPoly, lambda: C, steps: usize) -> C {
    let h = 0.5 / steps as f64;
    let mut m = [[C::new(1.0, 0.0), C::new(0.0, 0.0)], [C::new(0.0, 0.0), C::new(1.0, 0.0)]];
    for i in 0..steps {
        let k2 = lambda - q.eval((i as f64 + 0.5) * h);
        let k = k2.sqrt();
        let (c, s_over_k) = if k.norm() < 1e-8 { (C::new(1.0, 0.0), C::new(h, 0.0)) } else { ((k * h).cos(), (k * h).sin() / k) };
        let p = [[c, s_over_k], [-k2 * s_over_k, c]];
        let mut r = [[C::new(0.0, 0.0); 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                r[a][b] = p[a][0] * m[0][b] + p[a][1] * m[1][b];
            }
        }
        m = r;
    }
    m[0][0] + m[1][1]
}

/// Richardson-combined propagator, fourth order in the cell size.
fn hill_oracle(q: &TrigPoly, lambda: C) -> C {
    let n = 8000;
    let coarse = midpoint_propagator(q, lambda, n);
    let fine = midpoint_propagator(q, lambda, 2 * n);
    fine + (fine - coarse) / 3.0
}

#[test]
fn hill_discriminant_matches_midpoint_propagator() {
    for pp in profiles() {
        let (qp, qm) = pp.hill_potentials();
        for q in [qp, qm] {
            let solver = HillSolver::new(&q);
            for lam in [C::new(-5.0, 0.0), C::new(10.0, 0.0), C::new(60.0, 1.5), C::new(150.0, 0.0)] {
                let got = solver.eval(lam).unwrap().value;
                let want = hill_oracle(&q, lam);
                assert!((got - want).norm() <= 1e-8 * (1.0 + want.norm()), "λ = {lam}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn galerkin_eigenvalues_are_oracle_roots() {
    for pp in profiles() {
        let (_, qm) = pp.hill_potentials();
        let s = galerkin_eigs(&qm, 96, 8).unwrap();
        for &lam in &s.values[..7] {
            let d = hill_oracle(&qm, C::new(lam, 0.0));
            assert!((d * d - 4.0).norm() < 1e-7, "λ = {lam}, Δ = {d}");
        }
    }
}

#[test]
fn free_lattice_closed_forms() {
    for n in [8usize, 17, 64] {
        let s = jacobi::spectrum(&ProfilePair::free(), n).unwrap();
        let mut want: Vec<f64> = (0..2 * n).map(|k| 2.0 * (k as f64 * PI / n as f64).cos()).collect();
        want.sort_by(f64::total_cmp);
        for (a, b) in s.values.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
