use std::sync::Arc;

use nalgebra::{DMatrix, RealField, SymmetricEigen};
use num_traits::Float;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftNum, FftPlanner};

use crate::config::TracePath;
use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

/// Reverse circulant matrix `M` with `M[i][j] = x_{(i+j−1) mod n} / √n`
/// (1-based, residue 0 read as `n`).
///
/// Only the raw entries are stored. Even powers need the scale only through
/// `1/n`, so exact rational scalars represent `Tr M^{2p}` without
/// irrational square roots.
#[derive(Debug, Clone, PartialEq)]
pub struct RcMatrix<T> {
    raw: Vec<T>,
}

/// `RC_n` built from `x_1, …, x_n`.
pub fn build_rc<T: Scalar>(x: Vec<T>, n: usize) -> Result<RcMatrix<T>> {
    if n == 0 {
        return invalid("matrix dimension must be at least 1");
    }
    if x.len() != n {
        return invalid(format!("expected {n} entries, got {}", x.len()));
    }
    Ok(RcMatrix { raw: x })
}

impl<T: Scalar> RcMatrix<T> {
    pub fn n(&self) -> usize {
        self.raw.len()
    }

    pub fn raw_entries(&self) -> &[T] {
        &self.raw
    }

    /// Unscaled entry at 1-based `(i, j)`: `x_{(i+j−1) mod n}`.
    pub fn raw_entry(&self, i: usize, j: usize) -> &T {
        let n = self.n();
        // x_k with k = (i + j − 1) mod n, k = 0 meaning x_n; zero-based that
        // is (i + j − 2) mod n.
        &self.raw[(i + j - 2) % n]
    }

    fn raw_dense(&self) -> Vec<T> {
        let n = self.n();
        (0..n * n).map(|idx| self.raw[(idx / n + idx % n) % n].clone()).collect()
    }

    /// `Tr M^{2p}` by repeated dense multiplication of the unscaled matrix,
    /// divided by `n^p` at the end.
    pub fn trace_power_dense(&self, two_p: usize) -> Result<T> {
        check_two_p(two_p)?;
        let n = self.n();
        let r = self.raw_dense();
        let mut acc = r.clone();
        for _ in 0..two_p - 2 {
            acc = matmul(&acc, &r, n);
        }
        // Tr(acc · r) without forming the last product.
        let mut tr = T::zero();
        for i in 0..n {
            for k in 0..n {
                tr = tr + acc[i * n + k].clone() * r[k * n + i].clone();
            }
        }
        Ok(tr / T::from_i64(n as i64).powu((two_p / 2) as u32))
    }

    /// `Tr M²` from the trace identity: `Σ x_i²`.
    pub fn trace_square_identity(&self) -> T {
        self.raw.iter().fold(T::zero(), |acc, x| acc + x.clone() * x.clone())
    }
}

impl<T: Scalar + Float> RcMatrix<T> {
    /// Scaled entry at 1-based `(i, j)`.
    pub fn entry(&self, i: usize, j: usize) -> T {
        *self.raw_entry(i, j) / <T as Scalar>::from_i64(self.n() as i64).sqrt()
    }

    /// Row-major dense view of the scaled matrix.
    pub fn to_dense(&self) -> Vec<T> {
        let n = self.n();
        let s = <T as Scalar>::from_i64(n as i64).sqrt();
        self.raw_dense().into_iter().map(|v| v / s).collect()
    }
}

impl<T: Scalar + Float + RealField> RcMatrix<T> {
    /// All eigenvalues of `M` from a dense symmetric eigensolver.
    pub fn eigenvalues_spectral(&self) -> Result<Vec<T>> {
        let n = self.n();
        let dense = self.to_dense();
        let m = DMatrix::from_row_slice(n, n, &dense);
        let frob = m.norm();
        let eig = SymmetricEigen::try_new(m, T::default_epsilon(), 1000 * n.max(1)).ok_or_else(|| {
            Error::Numeric(format!(
                "symmetric eigensolver did not converge (n = {n}, Frobenius norm = {})",
                Scalar::to_f64(&frob)
            ))
        })?;
        Ok(eig.eigenvalues.iter().copied().collect())
    }

    /// `Σ λ^{2p}` over the eigensolver spectrum.
    pub fn trace_power_spectral(&self, two_p: usize) -> Result<T> {
        check_two_p(two_p)?;
        let p = (two_p / 2) as u32;
        Ok(self
            .eigenvalues_spectral()?
            .into_iter()
            .fold(T::zero(), |acc, l| acc + Scalar::powu(&(l * l), p)))
    }
}

impl<T: Scalar + Float + FftNum> RcMatrix<T> {
    /// `Tr M^{2p}` in `O(n log n)`: the eigenvalues of `M²` are
    /// `|b_k|² / n` with `b = DFT(x)`.
    pub fn trace_power_fast(&self, two_p: usize) -> Result<T> {
        check_two_p(two_p)?;
        let sq = FastTracer::new(self.n()).squared_spectrum(self)?;
        Ok(FastTracer::<T>::trace_from_squared(&sq, (two_p / 2) as u32))
    }

    /// Eigenvalues of `M` from the DFT: `Σx/√n`, `Σ(−1)^j x_j/√n` when `n`
    /// is even, and `±|b_k|/√n` for each conjugate pair `k, n−k`. Sorted
    /// ascending.
    pub fn eigenvalues_fast(&self) -> Result<Vec<T>> {
        let n = self.n();
        let b = FastTracer::new(n).transform(self)?;
        let s = <T as Scalar>::from_i64(n as i64).sqrt();
        let mut out = Vec::with_capacity(n);
        out.push(b[0].re / s);
        for (k, bk) in b.iter().enumerate().skip(1) {
            let m = bk.norm() / s;
            if 2 * k == n {
                // b_{n/2} = Σ(−1)^j x_j is real and is itself an eigenvalue.
                out.push(bk.re / s);
            } else if k < n - k {
                out.push(m);
                out.push(-m);
            }
        }
        out.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        Ok(out)
    }
}

impl<T: Scalar + Float + FftNum + RealField> RcMatrix<T> {
    /// Fast trace cross-checked against the eigensolver; disagreement beyond
    /// `rel_tol` is an integrity error.
    pub fn trace_power_fast_checked(&self, two_p: usize, rel_tol: f64) -> Result<T> {
        let fast = self.trace_power_fast(two_p)?;
        let spectral = self.trace_power_spectral(two_p)?;
        let (f, s) = (Scalar::to_f64(&fast), Scalar::to_f64(&spectral));
        let scale = s.abs().max(f64::MIN_POSITIVE);
        if (f - s).abs() / scale > rel_tol {
            return Err(Error::Integrity(format!(
                "fast trace {f} disagrees with spectral trace {s} (n = {}, 2p = {two_p})",
                self.n()
            )));
        }
        Ok(fast)
    }

    pub fn trace_power(&self, path: TracePath, two_p: usize) -> Result<T> {
        match path {
            TracePath::Dense => self.trace_power_dense(two_p),
            TracePath::Spectral => self.trace_power_spectral(two_p),
            TracePath::Fast => self.trace_power_fast(two_p),
        }
    }
}

/// FFT plan for a fixed dimension, reusable across replicates and threads.
#[derive(Clone)]
pub struct FastTracer<T: FftNum> {
    n: usize,
    fft: Arc<dyn Fft<T>>,
}

impl<T: Scalar + Float + FftNum> FastTracer<T> {
    pub fn new(n: usize) -> Self {
        let fft = FftPlanner::new().plan_fft_forward(n.max(1));
        Self { n, fft }
    }

    fn transform(&self, m: &RcMatrix<T>) -> Result<Vec<Complex<T>>> {
        if m.n() != self.n {
            return invalid(format!("tracer planned for n = {}, matrix has n = {}", self.n, m.n()));
        }
        let mut buf: Vec<Complex<T>> = m.raw.iter().map(|&x| Complex::new(x, T::zero())).collect();
        self.fft.process(&mut buf);
        Ok(buf)
    }

    /// Eigenvalues of `M²`: `|b_k|² / n`, `k = 0..n`.
    pub fn squared_spectrum(&self, m: &RcMatrix<T>) -> Result<Vec<T>> {
        let n = <T as Scalar>::from_i64(self.n as i64);
        Ok(self.transform(m)?.into_iter().map(|b| b.norm_sqr() / n).collect())
    }

    pub fn trace_from_squared(sq: &[T], p: u32) -> T {
        sq.iter().fold(T::zero(), |acc, v| acc + Scalar::powu(v, p))
    }
}

fn check_two_p(two_p: usize) -> Result<()> {
    if two_p < 2 || !two_p.is_multiple_of(2) {
        return invalid(format!("trace power must be even and at least 2, got {two_p}"));
    }
    Ok(())
}

fn matmul<T: Scalar>(a: &[T], b: &[T], n: usize) -> Vec<T> {
    let mut out = vec![T::zero(); n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k].clone();
            if aik == T::zero() {
                continue;
            }
            for j in 0..n {
                out[i * n + j] = out[i * n + j].clone() + aik.clone() * b[k * n + j].clone();
            }
        }
    }
    out
}
