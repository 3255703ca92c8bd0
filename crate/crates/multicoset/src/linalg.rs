//! Minimal complex dense-matrix support: storage, conjugate transposition,
//! and a one-sided Jacobi singular value decomposition.
//!
//! Every matrix this crate factors is tiny (rows and columns both bounded by
//! the pattern period `L`), so the decomposition favors accuracy and
//! simplicity over speed. One-sided Jacobi right-multiplies two-column
//! unitary rotations until all column pairs are numerically orthogonal; the
//! column norms are then the singular values, computed to high relative
//! accuracy even when small — which is exactly what condition-number ranking
//! needs. Nothing in this module is exported from the crate.

use num_complex::Complex64;

/// Dense complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMat {
    pub(crate) fn zeros(rows: usize, cols: usize) -> Self {
        CMat { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub(crate) fn identity(n: usize) -> Self {
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    pub(crate) fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = CMat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub(crate) fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub(crate) fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub(crate) fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.cols + j] = v;
    }

    /// Conjugate transpose.
    pub(crate) fn herm(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    fn col_norm_sq(&self, j: usize) -> f64 {
        (0..self.rows).map(|i| self.get(i, j).norm_sqr()).sum()
    }

    /// Inner product `aᵢᴴ·aⱼ` of two columns.
    fn col_dot(&self, i: usize, j: usize) -> Complex64 {
        (0..self.rows).map(|r| self.get(r, i).conj() * self.get(r, j)).sum()
    }

    /// Right-multiplies columns `(i, j)` by `diag(1, e^{−jφ})` followed by the
    /// real rotation `[[cs, sn], [−sn, cs]]`.
    fn phase_rotate_cols(&mut self, i: usize, j: usize, phase: Complex64, cs: f64, sn: f64) {
        for r in 0..self.rows {
            let xi = self.get(r, i);
            let xj = self.get(r, j) * phase.conj();
            self.set(r, i, cs * xi - sn * xj);
            self.set(r, j, sn * xi + cs * xj);
        }
    }
}

/// Thin singular value decomposition `A = U·diag(σ)·Vᴴ` with
/// `m = min(rows, cols)` retained triplets.
#[derive(Clone, Debug)]
pub(crate) struct Svd {
    /// rows×m, orthonormal columns.
    pub(crate) u: CMat,
    /// Nonincreasing, all ≥ 0.
    pub(crate) sigma: Vec<f64>,
    /// cols×m, orthonormal columns.
    pub(crate) v: CMat,
}

/// A column pair counts as orthogonal once `|aᵢᴴaⱼ| ≤ tol·‖aᵢ‖·‖aⱼ‖`.
const JACOBI_TOL: f64 = 1e-14;
/// Jacobi converges quadratically; tiny matrices settle in well under ten
/// sweeps, so a run reaching this cap indicates a bug rather than slowness.
const MAX_SWEEPS: usize = 64;

pub(crate) fn svd(a: &CMat) -> Svd {
    if a.rows >= a.cols {
        svd_tall(a)
    } else {
        // A = (Aᴴ)ᴴ: factor the tall conjugate transpose and swap the bases.
        let s = svd_tall(&a.herm());
        Svd { u: s.v, sigma: s.sigma, v: s.u }
    }
}

fn svd_tall(a: &CMat) -> Svd {
    debug_assert!(a.rows >= a.cols);
    let (rows, cols) = (a.rows, a.cols);
    let mut w = a.clone();
    let mut v = CMat::identity(cols);
    let mut norms_sq: Vec<f64> = (0..cols).map(|j| w.col_norm_sq(j)).collect();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..cols {
            for j in i + 1..cols {
                let c = w.col_dot(i, j);
                let mag = c.norm();
                if mag <= JACOBI_TOL * (norms_sq[i] * norms_sq[j]).sqrt() {
                    continue;
                }
                rotated = true;
                // Absorb the phase of the inner product into column j, then
                // the pair reduces to a real symmetric 2×2 Schur rotation on
                // the Gram matrix [[aᵢᵢ, |c|], [|c|, aⱼⱼ]].
                let phase = c / mag;
                let tau = (norms_sq[j] - norms_sq[i]) / (2.0 * mag);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * cs;
                w.phase_rotate_cols(i, j, phase, cs, sn);
                v.phase_rotate_cols(i, j, phase, cs, sn);
                norms_sq[i] = w.col_norm_sq(i);
                norms_sq[j] = w.col_norm_sq(j);
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = norms_sq.iter().map(|&n| n.sqrt()).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]).then(x.cmp(&y)));

    let mut u = CMat::zeros(rows, cols);
    let mut v_sorted = CMat::zeros(cols, cols);
    let mut sigma = Vec::with_capacity(cols);
    for (k, &src) in order.iter().enumerate() {
        let s = norms[src];
        sigma.push(s);
        if s > 0.0 {
            for r in 0..rows {
                u.set(r, k, w.get(r, src) / s);
            }
        }
        for r in 0..cols {
            v_sorted.set(r, k, v.get(r, src));
        }
    }
    Svd { u, sigma, v: v_sorted }
}

/// Applies the pseudo-inverse: `x = V·diag(1/σ)·Uᴴ·y`, the least-squares /
/// minimum-norm solution of `A·x ≈ y`.
///
/// Exactly zero singular values contribute nothing; rank screening against a
/// relative tolerance is the caller's job (see the modulation module's
/// condition report).
pub(crate) fn pinv_apply(svd: &Svd, y: &[Complex64]) -> Vec<Complex64> {
    let m = svd.sigma.len();
    debug_assert_eq!(y.len(), svd.u.rows());
    let mut w = vec![Complex64::new(0.0, 0.0); m];
    for k in 0..m {
        if svd.sigma[k] > 0.0 {
            let mut acc = Complex64::new(0.0, 0.0);
            for r in 0..svd.u.rows() {
                acc += svd.u.get(r, k).conj() * y[r];
            }
            w[k] = acc / svd.sigma[k];
        }
    }
    let n = svd.v.rows();
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for r in 0..n {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..m {
            acc += svd.v.get(r, k) * w[k];
        }
        x[r] = acc;
    }
    x
}
