//! Banded LU with partial pivoting and periodic (cyclic) banded solves.
//!
//! A cyclic banded matrix is split into its in-range band `B` plus the
//! wrap-around entries, which form a low-rank update `U V^T`. Systems are
//! solved with the Sherman–Morrison–Woodbury identity followed by a couple of
//! rounds of iterative refinement against the full cyclic operator.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative pivot size below which a matrix is reported as singular.
pub const PIVOT_TOLERANCE: f64 = 1e-14;

/// LU factors of a banded matrix (`kl` sub-, `ku` super-diagonals).
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    width: usize,
    ab: Vec<f64>,
    pivots: Vec<usize>,
}

impl BandedLu {
    /// `entry(i, j)` is queried for `|j - i|` within the band only.
    pub fn factor<F: Fn(usize, usize) -> f64>(n: usize, kl: usize, ku: usize, entry: F) -> Result<Self> {
        let width = 2 * kl + ku + 1;
        let mut ab = vec![0.0; n * width];
        let mut scale = 0.0f64;
        for i in 0..n {
            let lo = i.saturating_sub(kl);
            let hi = (i + ku).min(n - 1);
            for j in lo..=hi {
                let v = entry(i, j);
                scale = scale.max(v.abs());
                ab[i * width + j + kl - i] = v;
            }
        }
        let mut lu = Self { n, kl, width, ab, pivots: vec![0; n] };
        lu.eliminate(ku, scale)?;
        Ok(lu)
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.width + j + self.kl - i
    }

    fn eliminate(&mut self, ku: usize, scale: f64) -> Result<()> {
        let (n, kl) = (self.n, self.kl);
        let reach = ku + kl;
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.ab[self.idx(k, k)].abs();
            for i in k + 1..=last_row {
                let v = self.ab[self.idx(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best > PIVOT_TOLERANCE * scale) {
                return Err(Error::SingularMatrix(format!(
                    "pivot {best:e} at column {k} (scale {scale:e})"
                )));
            }
            self.pivots[k] = p;
            let last_col = (k + reach).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    let (a, b) = (self.idx(k, j), self.idx(p, j));
                    self.ab.swap(a, b);
                }
            }
            let pivot = self.ab[self.idx(k, k)];
            for i in k + 1..=last_row {
                let li = self.idx(i, k);
                let m = self.ab[li] / pivot;
                self.ab[li] = m;
                if m != 0.0 {
                    for j in k + 1..=last_col {
                        let (dst, src) = (self.idx(i, j), self.idx(k, j));
                        self.ab[dst] -= m * self.ab[src];
                    }
                }
            }
        }
        Ok(())
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let (n, kl) = (self.n, self.kl);
        let reach = self.width - 1 - kl;
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            if bk != 0.0 {
                for i in k + 1..=(k + kl).min(n - 1) {
                    b[i] -= self.ab[self.idx(i, k)] * bk;
                }
            }
        }
        for k in (0..n).rev() {
            let mut s = b[k];
            for j in k + 1..=(k + reach).min(n - 1) {
                s -= self.ab[self.idx(k, j)] * b[j];
            }
            b[k] = s / self.ab[self.idx(k, k)];
        }
    }
}

/// Factors of `B + sum_r u_r v_r^T` for repeated Woodbury solves.
#[derive(Debug, Clone)]
pub struct WoodburyFactor {
    lu: BandedLu,
    v: Vec<Vec<f64>>,
    z: Vec<Vec<f64>>,
    cap: Option<nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl WoodburyFactor {
    pub fn new(lu: BandedLu, updates: Vec<(Vec<f64>, Vec<f64>)>) -> Result<Self> {
        let r = updates.len();
        let mut z = Vec::with_capacity(r);
        let mut v = Vec::with_capacity(r);
        for (mut u, vr) in updates {
            lu.solve_in_place(&mut u);
            z.push(u);
            v.push(vr);
        }
        let cap = if r == 0 {
            None
        } else {
            let m = DMatrix::from_fn(r, r, |i, j| dot(&v[i], &z[j]) + if i == j { 1.0 } else { 0.0 });
            let f = m.lu();
            if !f.is_invertible() {
                return Err(Error::SingularMatrix("capacitance matrix of the low-rank update".into()));
            }
            Some(f)
        };
        Ok(Self { lu, v, z, cap })
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let mut y = rhs.to_vec();
        self.lu.solve_in_place(&mut y);
        if let Some(cap) = &self.cap {
            let vy = DVector::from_fn(self.v.len(), |i, _| dot(&self.v[i], &y));
            let w = cap
                .solve(&vy)
                .ok_or_else(|| Error::SingularMatrix("capacitance matrix of the low-rank update".into()))?;
            for (j, zj) in self.z.iter().enumerate() {
                let wj = w[j];
                for (yi, zi) in y.iter_mut().zip(zj) {
                    *yi -= wj * zi;
                }
            }
        }
        Ok(y)
    }
}

/// Solves `(B + sum_r u_r v_r^T) x = rhs` given the LU factors of `B`.
pub fn woodbury_solve(lu: &BandedLu, updates: &[(Vec<f64>, Vec<f64>)], rhs: &[f64]) -> Result<Vec<f64>> {
    WoodburyFactor::new(lu.clone(), updates.to_vec())?.solve(rhs)
}

/// Square periodic banded matrix stored by diagonals:
/// `diags[o + kl][i] = A[i][(i + o) mod n]` for `o` in `-kl..=ku`.
#[derive(Debug, Clone)]
pub struct CyclicBanded {
    pub n: usize,
    pub kl: usize,
    pub ku: usize,
    pub diags: Vec<Vec<f64>>,
}

impl CyclicBanded {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        Self { n, kl, ku, diags: vec![vec![0.0; n]; kl + ku + 1] }
    }

    /// Diagonal with offset `o` (negative = below the main diagonal).
    pub fn diag_mut(&mut self, o: isize) -> &mut [f64] {
        let k = (o + self.kl as isize) as usize;
        &mut self.diags[k]
    }

    pub fn get(&self, i: usize, o: isize) -> f64 {
        self.diags[(o + self.kl as isize) as usize][i]
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n as isize;
        (0..self.n)
            .map(|i| {
                let mut s = 0.0;
                for o in -(self.kl as isize)..=(self.ku as isize) {
                    let c = self.get(i, o);
                    if c != 0.0 {
                        s += c * x[(i as isize + o).rem_euclid(n) as usize];
                    }
                }
                s
            })
            .collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.n as isize;
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for o in -(self.kl as isize)..=(self.ku as isize) {
                let j = (i as isize + o).rem_euclid(n) as usize;
                m[(i, j)] += self.get(i, o);
            }
        }
        m
    }

    /// In-range band entry `(i, j)` when `j - i` is a valid offset, else zero.
    fn band_entry(&self, i: usize, j: usize) -> f64 {
        let o = j as isize - i as isize;
        if o < -(self.kl as isize) || o > self.ku as isize {
            0.0
        } else {
            self.get(i, o)
        }
    }

    /// Wrap-around entries grouped by column as rank-one updates `u e_c^T`.
    pub fn wrap_updates(&self, total_len: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
        let n = self.n as isize;
        let mut cols: Vec<(usize, Vec<f64>)> = Vec::new();
        for i in 0..self.n {
            for o in -(self.kl as isize)..=(self.ku as isize) {
                let j = i as isize + o;
                if j >= 0 && j < n {
                    continue;
                }
                let c = j.rem_euclid(n) as usize;
                let v = self.get(i, o);
                let slot = match cols.iter().position(|(cc, _)| *cc == c) {
                    Some(s) => s,
                    None => {
                        cols.push((c, vec![0.0; total_len]));
                        cols.len() - 1
                    }
                };
                cols[slot].1[i] += v;
            }
        }
        cols.into_iter()
            .map(|(c, u)| {
                let mut e = vec![0.0; total_len];
                e[c] = 1.0;
                (u, e)
            })
            .collect()
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        solve_cyclic_banded(self, rhs)
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Direct cyclic banded solve with two steps of iterative refinement.
pub fn solve_cyclic_banded(a: &CyclicBanded, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = a.n;
    if rhs.len() != n {
        return Err(Error::InvalidParameter(format!("rhs length {} != {}", rhs.len(), n)));
    }
    if n <= a.kl + a.ku {
        let x = a
            .to_dense()
            .lu()
            .solve(&DVector::from_column_slice(rhs))
            .ok_or_else(|| Error::SingularMatrix("small cyclic system".into()))?;
        return Ok(x.as_slice().to_vec());
    }
    let lu = BandedLu::factor(n, a.kl, a.ku, |i, j| a.band_entry(i, j))?;
    let factor = WoodburyFactor::new(lu, a.wrap_updates(n))?;
    let mut x = factor.solve(rhs)?;
    for _ in 0..2 {
        let ax = a.matvec(&x);
        let res: Vec<f64> = rhs.iter().zip(&ax).map(|(b, y)| b - y).collect();
        if max_abs(&res) == 0.0 {
            break;
        }
        let dx = factor.solve(&res)?;
        for (xi, di) in x.iter_mut().zip(&dx) {
            *xi += di;
        }
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularMatrix("non-finite solution".into()));
    }
    Ok(x)
}

/// Periodic pentadiagonal solve with `bands[o + 2][i] = A[i][(i + o) mod N]`.
pub fn solve_pentadiagonal_periodic(bands: [&[f64]; 5], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = rhs.len();
    if bands.iter().any(|b| b.len() != n) {
        return Err(Error::InvalidParameter("band lengths must match the right-hand side".into()));
    }
    let a = CyclicBanded { n, kl: 2, ku: 2, diags: bands.iter().map(|b| b.to_vec()).collect() };
    solve_cyclic_banded(&a, rhs)
}

/// Solves the bordered system `[A 1; 1^T 0] [x; lambda] = [rhs; mass]`,
/// returning `(x, lambda)`. Used by the mass-constrained Newton iteration.
pub fn solve_bordered(a: &CyclicBanded, rhs: &[f64], mass: f64) -> Result<(Vec<f64>, f64)> {
    let n = a.n;
    let m = n + 1;
    let lu = BandedLu::factor(m, a.kl, a.ku, |i, j| {
        if i == n || j == n {
            if i == j {
                1.0
            } else {
                0.0
            }
        } else {
            a.band_entry(i, j)
        }
    })?;
    let mut updates = a.wrap_updates(m);
    let mut col = vec![1.0; m];
    col[n] = -1.0;
    let mut en = vec![0.0; m];
    en[n] = 1.0;
    updates.push((col, en.clone()));
    let mut row = vec![1.0; m];
    row[n] = 0.0;
    updates.push((en, row));
    let factor = WoodburyFactor::new(lu, updates)?;

    let mut b = rhs.to_vec();
    b.push(mass);
    let apply = |x: &[f64]| -> Vec<f64> {
        let mut y = a.matvec(&x[..n]);
        for yi in &mut y {
            *yi += x[n];
        }
        y.push(x[..n].iter().sum());
        y
    };
    let mut x = factor.solve(&b)?;
    for _ in 0..2 {
        let ax = apply(&x);
        let res: Vec<f64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
        let d = factor.solve(&res)?;
        for (xi, di) in x.iter_mut().zip(&d) {
            *xi += di;
        }
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularMatrix("non-finite bordered solution".into()));
    }
    let lambda = x.pop().unwrap_or(0.0);
    Ok((x, lambda))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rustfft::num_complex::Complex64;

    fn residual(a: &CyclicBanded, x: &[f64], b: &[f64]) -> f64 {
        let ax = a.matvec(x);
        ax.iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn identity_returns_rhs() {
        let mut a = CyclicBanded::zeros(16, 2, 2);
        a.diag_mut(0).fill(1.0);
        let b: Vec<f64> = (0..16).map(|i| i as f64 - 3.5).collect();
        let x = a.solve(&b).unwrap();
        assert_eq!(x, b);
    }

    #[test]
    fn random_dominant_system_matches_dense_elimination() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 16;
        let mut a = CyclicBanded::zeros(n, 2, 2);
        for o in -2isize..=2 {
            for i in 0..n {
                a.diag_mut(o)[i] = rng.gen_range(-1.0..1.0);
            }
        }
        for i in 0..n {
            a.diag_mut(0)[i] += 6.0;
        }
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = a.solve(&b).unwrap();
        let dense = a.to_dense().lu().solve(&DVector::from_column_slice(&b)).unwrap();
        for i in 0..n {
            assert!((x[i] - dense[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn circulant_matches_fourier_diagonalization() {
        // symbol c(k) = sum_o c_o exp(2 pi i o k / n)
        let n = 8;
        let c = [0.3, -1.2, 5.0, -0.7, 0.2];
        let mut a = CyclicBanded::zeros(n, 2, 2);
        for (idx, o) in (-2isize..=2).enumerate() {
            a.diag_mut(o).fill(c[idx]);
        }
        let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin() + 0.1).collect();
        let x = a.solve(&b).unwrap();
        let mut oracle = vec![0.0; n];
        for k in 0..n {
            let mut sym = Complex64::new(0.0, 0.0);
            for (idx, o) in (-2isize..=2).enumerate() {
                let th = 2.0 * std::f64::consts::PI * (o * k as isize) as f64 / n as f64;
                sym += c[idx] * Complex64::from_polar(1.0, th);
            }
            let mut bk = Complex64::new(0.0, 0.0);
            for j in 0..n {
                let th = -2.0 * std::f64::consts::PI * (j * k) as f64 / n as f64;
                bk += b[j] * Complex64::from_polar(1.0, th);
            }
            let xk = bk / sym;
            for j in 0..n {
                let th = 2.0 * std::f64::consts::PI * (j * k) as f64 / n as f64;
                oracle[j] += (xk * Complex64::from_polar(1.0, th)).re / n as f64;
            }
        }
        for j in 0..n {
            assert!((x[j] - oracle[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn stiff_fourth_difference_residual() {
        // I + s * D4 with a huge s, as in the Crank-Nicolson operator
        let n = 2048;
        let s = 1e9;
        let mut a = CyclicBanded::zeros(n, 2, 2);
        a.diag_mut(-2).fill(s);
        a.diag_mut(-1).fill(-4.0 * s);
        a.diag_mut(0).fill(1.0 + 6.0 * s);
        a.diag_mut(1).fill(-4.0 * s);
        a.diag_mut(2).fill(s);
        let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.01).sin()).collect();
        let x = a.solve(&b).unwrap();
        assert!(residual(&a, &x, &b) <= 1e-12 * 16.0 * s * max_abs(&x));
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = CyclicBanded::zeros(16, 1, 1);
        assert!(matches!(a.solve(&vec![1.0; 16]), Err(Error::SingularMatrix(_))));
    }
}
