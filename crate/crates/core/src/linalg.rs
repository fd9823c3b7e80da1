//! Banded linear algebra for the structured-grid Jacobians.
//!
//! Storage follows the usual band layout: `A[i][j]` lives at
//! `ab[[kl + ku + i - j, j]]`, with `kl` extra super-diagonal rows reserved
//! for fill produced by partial pivoting.  A diagonally preconditioned
//! BiCGStab solve is available as a fallback when the factor storage would be
//! too large.

use crate::error::{Error, Result};
use ndarray::Array2;

#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    ab: Array2<f64>,
}

impl BandMatrix {
    pub fn new(n: usize, kl: usize, ku: usize) -> Self {
        BandMatrix {
            n,
            kl,
            ku,
            ab: Array2::zeros((2 * kl + ku + 1, n)),
        }
    }

    /// Bytes held by the factor storage; used for the direct-vs-iterative
    /// decision.
    pub fn storage_bytes(n: usize, kl: usize, ku: usize) -> usize {
        (2 * kl + ku + 1) * n * std::mem::size_of::<f64>()
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.n && j < self.n);
        debug_assert!(
            j as isize - i as isize <= self.ku as isize && i as isize - j as isize <= self.kl as isize,
            "entry ({i},{j}) outside band kl={} ku={}",
            self.kl,
            self.ku
        );
        self.ab[[self.kl + self.ku + i - j, j]] += v;
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        y.fill(0.0);
        for j in 0..self.n {
            let xj = x[j];
            if xj == 0.0 {
                continue;
            }
            let ilo = j.saturating_sub(self.ku);
            let ihi = (j + self.kl).min(self.n - 1);
            for i in ilo..=ihi {
                y[i] += self.ab[[self.kl + self.ku + i - j, j]] * xj;
            }
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.ab[[self.kl + self.ku, j]]).collect()
    }

    /// LU factorization with partial pivoting, in place.
    pub fn factor(mut self) -> Result<BandLu> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let d = kl + ku;
        let mut piv = vec![0usize; n];
        for k in 0..n {
            let km = kl.min(n - 1 - k);
            // pivot search down column k
            let mut p = 0usize;
            let mut best = self.ab[[d, k]].abs();
            for t in 1..=km {
                let v = self.ab[[d + t, k]].abs();
                if v > best {
                    best = v;
                    p = t;
                }
            }
            if best == 0.0 {
                return Err(Error::LinearSolveFailed(format!(
                    "singular pivot at column {k}"
                )));
            }
            piv[k] = k + p;
            let jmax = (k + d).min(n - 1);
            if p != 0 {
                for j in k..=jmax {
                    self.ab.swap([d + k - j, j], [d + k + p - j, j]);
                }
            }
            let pivot = self.ab[[d, k]];
            for t in 1..=km {
                let m = self.ab[[d + t, k]] / pivot;
                self.ab[[d + t, k]] = m;
                if m != 0.0 {
                    for j in (k + 1)..=jmax {
                        let upper = self.ab[[d + k - j, j]];
                        if upper != 0.0 {
                            self.ab[[d + t + k - j, j]] -= m * upper;
                        }
                    }
                }
            }
        }
        Ok(BandLu {
            n,
            kl,
            ku,
            ab: self.ab,
            piv,
        })
    }
}

#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    ab: Array2<f64>,
    piv: Vec<usize>,
}

impl BandLu {
    pub fn solve(&self, b: &mut [f64]) {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let d = kl + ku;
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                b.swap(k, p);
            }
            let km = kl.min(n - 1 - k);
            let bk = b[k];
            if bk != 0.0 {
                for t in 1..=km {
                    b[k + t] -= self.ab[[d + t, k]] * bk;
                }
            }
        }
        for k in (0..n).rev() {
            let jmax = (k + d).min(n - 1);
            let mut sum = b[k];
            for j in (k + 1)..=jmax {
                sum -= self.ab[[d + k - j, j]] * b[j];
            }
            b[k] = sum / self.ab[[d, k]];
        }
    }
}

/// Diagonally preconditioned BiCGStab.  Restarts on breakdown; returns the
/// solution once the preconditioned residual drops below `tol` relative to
/// the right-hand side.
pub fn bicgstab(a: &BandMatrix, b: &[f64], tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let n = b.len();
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let diag = a.diagonal();
    let minv: Vec<f64> = diag
        .iter()
        .map(|&d| if d.abs() > 1e-300 { 1.0 / d } else { 1.0 })
        .collect();

    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut restarts = 0;
    'outer: loop {
        let rhat = r.clone();
        let mut rho = 1.0;
        let mut alpha = 1.0;
        let mut omega = 1.0;
        let mut v = vec![0.0; n];
        let mut p = vec![0.0; n];
        let mut phat = vec![0.0; n];
        let mut shat = vec![0.0; n];
        let mut t = vec![0.0; n];
        for _ in 0..max_iter {
            let rho_new = dot(&rhat, &r);
            if rho_new.abs() < 1e-290 * bnorm * bnorm {
                // breakdown: restart from the current iterate
                if restarts >= 3 {
                    return Err(Error::LinearSolveFailed("BiCGStab breakdown".into()));
                }
                restarts += 1;
                a.matvec(&x, &mut t);
                for i in 0..n {
                    r[i] = b[i] - t[i];
                }
                continue 'outer;
            }
            let beta = (rho_new / rho) * (alpha / omega);
            rho = rho_new;
            for i in 0..n {
                p[i] = r[i] + beta * (p[i] - omega * v[i]);
            }
            for i in 0..n {
                phat[i] = minv[i] * p[i];
            }
            a.matvec(&phat, &mut v);
            alpha = rho / dot(&rhat, &v);
            let mut s = r.clone();
            for i in 0..n {
                s[i] -= alpha * v[i];
            }
            if norm2(&s) < tol * bnorm {
                for i in 0..n {
                    x[i] += alpha * phat[i];
                }
                return Ok(x);
            }
            for i in 0..n {
                shat[i] = minv[i] * s[i];
            }
            a.matvec(&shat, &mut t);
            let tt = dot(&t, &t);
            if tt.abs() < 1e-290 {
                if restarts >= 3 {
                    return Err(Error::LinearSolveFailed("BiCGStab breakdown".into()));
                }
                restarts += 1;
                a.matvec(&x, &mut t);
                for i in 0..n {
                    r[i] = b[i] - t[i];
                }
                continue 'outer;
            }
            omega = dot(&t, &s) / tt;
            for i in 0..n {
                x[i] += alpha * phat[i] + omega * shat[i];
            }
            for i in 0..n {
                r[i] = s[i] - omega * t[i];
            }
            if norm2(&r) < tol * bnorm {
                return Ok(x);
            }
        }
        return Err(Error::LinearSolveFailed(format!(
            "BiCGStab did not reach tol {tol} in {max_iter} iterations"
        )));
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    // splitmix64, deterministic fill for test matrices
    struct Mix(u64);
    impl Mix {
        fn next(&mut self) -> f64 {
            self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
            let mut z = self.0;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
            z = z ^ (z >> 31);
            (z as f64 / u64::MAX as f64) * 2.0 - 1.0
        }
    }

    fn random_system(n: usize, kl: usize, ku: usize, seed: u64) -> (BandMatrix, Vec<Vec<f64>>, Vec<f64>) {
        let mut rng = Mix(seed);
        let mut band = BandMatrix::new(n, kl, ku);
        let mut dense = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                let within = j as isize - i as isize <= ku as isize
                    && i as isize - j as isize <= kl as isize;
                if within {
                    let mut v = rng.next();
                    if i == j {
                        // keep it solvable but not diagonally dominant
                        v += if v >= 0.0 { 0.5 } else { -0.5 };
                    }
                    band.add(i, j, v);
                    dense[i][j] = v;
                }
            }
        }
        let b: Vec<f64> = (0..n).map(|_| rng.next()).collect();
        (band, dense, b)
    }

    fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for k in 0..n {
            let mut p = k;
            for i in k + 1..n {
                if a[i][k].abs() > a[p][k].abs() {
                    p = i;
                }
            }
            a.swap(k, p);
            b.swap(k, p);
            let pivot = a[k][k];
            for i in k + 1..n {
                let m = a[i][k] / pivot;
                if m != 0.0 {
                    for j in k..n {
                        let akj = a[k][j];
                        a[i][j] -= m * akj;
                    }
                    b[i] -= m * b[k];
                }
            }
        }
        for k in (0..n).rev() {
            let mut s = b[k];
            for j in k + 1..n {
                s -= a[k][j] * b[j];
            }
            b[k] = s / a[k][k];
        }
        b
    }

    #[test]
    fn band_lu_matches_dense() {
        for &(n, kl, ku, seed) in &[(12usize, 2usize, 3usize, 7u64), (40, 5, 5, 11), (60, 9, 4, 23)] {
            let (band, dense, b) = random_system(n, kl, ku, seed);
            let expect = dense_solve(dense, b.clone());
            let lu = band.factor().unwrap();
            let mut x = b.clone();
            lu.solve(&mut x);
            for i in 0..n {
                assert!(
                    (x[i] - expect[i]).abs() < 1e-9 * (1.0 + expect[i].abs()),
                    "n={n} i={i}: {} vs {}",
                    x[i],
                    expect[i]
                );
            }
        }
    }

    #[test]
    fn band_lu_pivots_on_weak_diagonal() {
        // diagonal entry tiny: solvable only with row exchange
        let mut band = BandMatrix::new(3, 1, 1);
        band.add(0, 0, 1e-16);
        band.add(0, 1, 1.0);
        band.add(1, 0, 1.0);
        band.add(1, 1, 1.0);
        band.add(1, 2, 1.0);
        band.add(2, 1, 1.0);
        band.add(2, 2, -1.0);
        let mut matvec_probe = BandMatrix::new(3, 1, 1);
        matvec_probe.add(0, 0, 1e-16);
        matvec_probe.add(0, 1, 1.0);
        matvec_probe.add(1, 0, 1.0);
        matvec_probe.add(1, 1, 1.0);
        matvec_probe.add(1, 2, 1.0);
        matvec_probe.add(2, 1, 1.0);
        matvec_probe.add(2, 2, -1.0);
        let b = vec![1.0, 2.0, 0.5];
        let lu = band.factor().unwrap();
        let mut x = b.clone();
        lu.solve(&mut x);
        let mut y = vec![0.0; 3];
        matvec_probe.matvec(&x, &mut y);
        for i in 0..3 {
            assert!((y[i] - b[i]).abs() < 1e-12, "residual at {i}");
        }
    }

    #[test]
    fn bicgstab_matches_direct() {
        let (band, dense, b) = random_system(50, 4, 4, 31);
        let expect = dense_solve(dense, b.clone());
        let x = bicgstab(&band, &b, 1e-13, 5000).unwrap();
        for i in 0..50 {
            assert!(
                (x[i] - expect[i]).abs() < 1e-8 * (1.0 + expect[i].abs()),
                "i={i}: {} vs {}",
                x[i],
                expect[i]
            );
        }
    }
}
