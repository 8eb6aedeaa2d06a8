//! Real symmetric eigensolvers.
//!
//! Dense matrices go through Householder tridiagonalization; periodic (cyclic) tridiagonal
//! matrices are first permuted to a pentadiagonal band and reduced with Givens bulge
//! chasing, which is O(n²) instead of O(n³). Both finish with implicit-shift QL.

use num_complex::Complex64;

use crate::error::{Error, Result};

const MAX_QL_SWEEPS: usize = 60;

#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    /// Fills from `f(i, j)` for `i ≤ j` and mirrors.
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.data[i * self.n..(i + 1) * self.n].iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn mul_cvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|i| self.data[i * self.n..(i + 1) * self.n].iter().zip(x).map(|(a, b)| b * a).sum())
            .collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }
}

/// Eigenpairs sorted by ascending eigenvalue; `vectors[k]` belongs to `values[k]`.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

pub fn eigh(a: &SymMatrix) -> Result<Eigen> {
    let n = a.n;
    let mut z = a.data.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut z, n, &mut d, &mut e, true);
    tqli(&mut d, &mut e, Some(&mut z), n)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let values = order.iter().map(|&k| d[k]).collect();
    let vectors = order.iter().map(|&k| (0..n).map(|r| z[r * n + k]).collect()).collect();
    Ok(Eigen { values, vectors })
}

pub fn eigvalsh(a: &SymMatrix) -> Result<Vec<f64>> {
    let n = a.n;
    let mut z = a.data.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut z, n, &mut d, &mut e, false);
    tqli(&mut d, &mut e, None, n)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `d` and
/// off-diagonal `off` (`off[i]` couples `i` and `i+1`), ascending.
pub fn tridiagonal_eigenvalues(d: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    let n = d.len();
    assert_eq!(off.len() + 1, n.max(1));
    let mut d = d.to_vec();
    // tqli expects e[i] to couple i-1 and i
    let mut e = vec![0.0; n];
    e[1..].copy_from_slice(off);
    tqli(&mut d, &mut e, None, n)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Eigenvalues of the periodic Jacobi matrix with diagonal `b` and couplings `a`
/// (`a[i]` couples `i` and `i+1 mod n`), ascending. Requires `n ≥ 3`.
pub fn cyclic_eigenvalues(b: &[f64], a: &[f64]) -> Result<Vec<f64>> {
    let n = b.len();
    assert!(n >= 3 && a.len() == n);
    // Interleave both ends of the ring: 0, n-1, 1, n-2, ...; ring neighbors end up at
    // distance at most 2.
    let mut pos = vec![0usize; n];
    let (mut lo, mut hi, mut p) = (0usize, n - 1, 0usize);
    while lo <= hi {
        pos[lo] = p;
        p += 1;
        if hi != lo {
            pos[hi] = p;
            p += 1;
        }
        lo += 1;
        if hi == 0 {
            break;
        }
        hi -= 1;
    }
    let mut band = Band::new(n);
    for i in 0..n {
        band.set(pos[i], pos[i], b[i]);
        let j = (i + 1) % n;
        band.set(pos[i], pos[j], band.get(pos[i], pos[j]) + a[i]);
    }
    band.reduce_to_tridiagonal();
    let d: Vec<f64> = (0..n).map(|i| band.get(i, i)).collect();
    let off: Vec<f64> = (0..n - 1).map(|i| band.get(i + 1, i)).collect();
    tridiagonal_eigenvalues(&d, &off)
}

/// Symmetric band storage with room for one diagonal of bulge beyond bandwidth 2.
struct Band {
    n: usize,
    // lower[k][j] = A[j+k][j]
    lower: [Vec<f64>; 4],
}

impl Band {
    fn new(n: usize) -> Self {
        Self { n, lower: std::array::from_fn(|_| vec![0.0; n]) }
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let k = i - j;
        if k > 3 {
            0.0
        } else {
            self.lower[k][j]
        }
    }

    fn set(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let k = i - j;
        assert!(k <= 3, "band overflow at ({i}, {j})");
        self.lower[k][j] = v;
    }

    /// Applies the rotation `[c s; -s c]` to rows and columns `p`, `p+1`.
    fn rotate(&mut self, p: usize, c: f64, s: f64) {
        let q = p + 1;
        let lo = p.saturating_sub(3);
        let hi = (q + 3).min(self.n - 1);
        for k in lo..=hi {
            if k == p || k == q {
                continue;
            }
            let (x, y) = (self.get(p, k), self.get(q, k));
            if x == 0.0 && y == 0.0 {
                continue;
            }
            self.set(p, k, c * x + s * y);
            self.set(q, k, -s * x + c * y);
        }
        let (app, aqq, apq) = (self.get(p, p), self.get(q, q), self.get(p, q));
        self.set(p, p, c * c * app + 2.0 * c * s * apq + s * s * aqq);
        self.set(q, q, s * s * app - 2.0 * c * s * apq + c * c * aqq);
        self.set(p, q, c * s * (aqq - app) + (c * c - s * s) * apq);
    }

    /// Zeroes `A[p+1][k]` against the pivot `A[p][k]` with a rotation in plane `(p, p+1)`.
    fn annihilate(&mut self, p: usize, k: usize) -> bool {
        let (x, y) = (self.get(p, k), self.get(p + 1, k));
        if y == 0.0 {
            return false;
        }
        let r = x.hypot(y);
        self.rotate(p, x / r, y / r);
        self.set(p + 1, k, 0.0);
        true
    }

    fn reduce_to_tridiagonal(&mut self) {
        let n = self.n;
        for j in 0..n.saturating_sub(2) {
            // Each rotation in plane (p, p+1) pushes fill to (p+3, p); chase it down.
            let (mut p, mut k) = (j + 1, j);
            while p + 1 < n && self.annihilate(p, k) {
                if p + 3 >= n {
                    break;
                }
                k = p;
                p += 2;
            }
        }
    }
}

/// Householder reduction of the row-major matrix `z` to tridiagonal form
/// (`d` diagonal, `e[i]` couples `i-1` and `i`); accumulates the transform in `z`
/// when `vecs` is set.
fn tred2(z: &mut [f64], n: usize, d: &mut [f64], e: &mut [f64], vecs: bool) {
    if n == 0 {
        return;
    }
    let ix = |i: usize, j: usize| i * n + j;
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let scale: f64 = (0..i).map(|k| z[ix(i, k)].abs()).sum();
            if scale == 0.0 {
                e[i] = z[ix(i, l)];
            } else {
                for k in 0..i {
                    z[ix(i, k)] /= scale;
                    h += z[ix(i, k)] * z[ix(i, k)];
                }
                let f = z[ix(i, l)];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                z[ix(i, l)] = f - g;
                let mut f = 0.0;
                for j in 0..i {
                    if vecs {
                        z[ix(j, i)] = z[ix(i, j)] / h;
                    }
                    let mut g = 0.0;
                    for k in 0..=j {
                        g += z[ix(j, k)] * z[ix(i, k)];
                    }
                    for k in j + 1..i {
                        g += z[ix(k, j)] * z[ix(i, k)];
                    }
                    e[j] = g / h;
                    f += e[j] * z[ix(i, j)];
                }
                let hh = f / (h + h);
                for j in 0..i {
                    let f = z[ix(i, j)];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        z[ix(j, k)] -= f * e[k] + g * z[ix(i, k)];
                    }
                }
            }
        } else {
            e[i] = z[ix(i, l)];
        }
        d[i] = h;
    }
    if vecs {
        d[0] = 0.0;
    }
    e[0] = 0.0;
    for i in 0..n {
        if vecs {
            if d[i] != 0.0 {
                for j in 0..i {
                    let mut g = 0.0;
                    for k in 0..i {
                        g += z[ix(i, k)] * z[ix(k, j)];
                    }
                    for k in 0..i {
                        z[ix(k, j)] -= g * z[ix(k, i)];
                    }
                }
            }
            d[i] = z[ix(i, i)];
            z[ix(i, i)] = 1.0;
            for j in 0..i {
                z[ix(j, i)] = 0.0;
                z[ix(i, j)] = 0.0;
            }
        } else {
            d[i] = z[ix(i, i)];
        }
    }
}

/// Implicit-shift QL on the tridiagonal `(d, e)` as left by [`tred2`]; eigenvalues
/// overwrite `d`, eigenvector columns accumulate into `z`.
fn tqli(d: &mut [f64], e: &mut [f64], mut z: Option<&mut [f64]>, n: usize) -> Result<()> {
    if n == 0 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_SWEEPS {
                return Err(Error::NoConvergence);
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    for k in 0..n {
                        let f = z[k * n + i + 1];
                        z[k * n + i + 1] = s * z[k * n + i] + c * f;
                        z[k * n + i] = c * z[k * n + i] - s * f;
                    }
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sym(n: usize, seed: u64) -> SymMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vals: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        SymMatrix::from_fn(n, |i, j| vals[i * n + j])
    }

    #[test]
    fn diagonal_matrix() {
        let a = SymMatrix::from_fn(3, |i, j| if i == j { [3.0, 1.0, 2.0][i] } else { 0.0 });
        assert_eq!(eigvalsh(&a).unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn eigenpairs_satisfy_definition() {
        for (n, seed) in [(1, 0), (2, 1), (7, 2), (40, 3)] {
            let a = random_sym(n, seed);
            let eg = eigh(&a).unwrap();
            for (lam, v) in eg.values.iter().zip(&eg.vectors) {
                let av = a.mul_vec(v);
                let res: f64 = av.iter().zip(v).map(|(x, y)| (x - lam * y).powi(2)).sum::<f64>().sqrt();
                assert!(res < 1e-12, "n={n} residual {res}");
            }
            for i in 0..n {
                for j in 0..n {
                    let dot: f64 = eg.vectors[i].iter().zip(&eg.vectors[j]).map(|(x, y)| x * y).sum();
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((dot - want).abs() < 1e-12);
                }
            }
            let vals = eigvalsh(&a).unwrap();
            for (x, y) in vals.iter().zip(&eg.values) {
                assert!((x - y).abs() < 1e-12);
            }
            assert!((vals.iter().sum::<f64>() - a.trace()).abs() < 1e-12);
        }
    }

    #[test]
    fn tridiagonal_toeplitz() {
        // eigenvalues of tridiag(1, 0, 1) of size n are 2cos(kπ/(n+1))
        let n = 50;
        let vals = tridiagonal_eigenvalues(&vec![0.0; n], &vec![1.0; n - 1]).unwrap();
        let mut want: Vec<f64> =
            (1..=n).map(|k| 2.0 * (k as f64 * std::f64::consts::PI / (n + 1) as f64).cos()).collect();
        want.sort_by(f64::total_cmp);
        for (x, y) in vals.iter().zip(&want) {
            assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn cyclic_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in [3, 4, 5, 8, 33, 64] {
            let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let a: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..1.5)).collect();
            let dense = SymMatrix::from_fn(n, |i, j| {
                let mut v = if i == j { b[i] } else { 0.0 };
                if j == (i + 1) % n {
                    v += a[i];
                }
                if i == (j + 1) % n {
                    v += a[j];
                }
                v
            });
            let x = cyclic_eigenvalues(&b, &a).unwrap();
            let y = eigvalsh(&dense).unwrap();
            for (p, q) in x.iter().zip(&y) {
                assert!((p - q).abs() < 1e-12, "n={n}: {p} vs {q}");
            }
        }
    }
}
