//! Shared helpers for the integration suites: an independent linear-algebra
//! oracle (power iteration for extreme singular values, Gauss–Jordan normal
//! equations for least-squares solves), a definitional matrix builder, a
//! tiny deterministic generator for test-side randomness, and subset
//! enumeration. Nothing here calls into the library's own decomposition
//! code, so agreement between the two routes is evidence, not tautology.

#![allow(dead_code)]

use num_complex::Complex64;

pub type Mat = Vec<Vec<Complex64>>;

/// Modulation matrix straight from its definition:
/// `a[i][l] = exp(+j·2π·c_i·k_l/L) / (L·T)`, without the phase-folding the
/// library applies.
pub fn definition_matrix(l: usize, t: f64, offsets: &[usize], slots: &[usize]) -> Mat {
    let scale = 1.0 / (l as f64 * t);
    offsets
        .iter()
        .map(|&c| {
            slots
                .iter()
                .map(|&k| Complex64::from_polar(scale, std::f64::consts::TAU * (c * k) as f64 / l as f64))
                .collect()
        })
        .collect()
}

fn gram(a: &Mat) -> Mat {
    let cols = a[0].len();
    let mut b = vec![vec![Complex64::new(0.0, 0.0); cols]; cols];
    for (i, bi) in b.iter_mut().enumerate() {
        for (j, bij) in bi.iter_mut().enumerate() {
            *bij = a.iter().map(|row| row[i].conj() * row[j]).sum();
        }
    }
    b
}

fn mat_vec(b: &Mat, v: &[Complex64]) -> Vec<Complex64> {
    b.iter()
        .map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum())
        .collect()
}

fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest eigenvalue of a Hermitian positive-semidefinite matrix by power
/// iteration with a fixed, mildly skewed start vector.
fn power_eig(b: &Mat, iters: usize) -> f64 {
    let n = b.len();
    let mut v: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(1.0 + 0.1 * i as f64, 0.05 * (i as f64 + 1.0)))
        .collect();
    let norm = vec_norm(&v);
    for z in &mut v {
        *z /= norm;
    }
    for _ in 0..iters {
        let w = mat_vec(b, &v);
        let norm = vec_norm(&w);
        if norm == 0.0 {
            return 0.0;
        }
        v = w.into_iter().map(|z| z / norm).collect();
    }
    let bv = mat_vec(b, &v);
    v.iter().zip(&bv).map(|(x, y)| (x.conj() * y).re).sum()
}

/// `(σ_max, σ_min)` of a matrix: the largest eigenvalue of `AᴴA` directly,
/// the smallest via the spectral shift `σ_max²·I − AᴴA`.
pub fn oracle_extreme_singulars(a: &Mat) -> (f64, f64) {
    let rows = a.len();
    let cols = a[0].len();
    // Work on the smaller Gram matrix; singular values are shared.
    let b = if rows >= cols { gram(a) } else { gram(&transpose_conj(a)) };
    let lam_max = power_eig(&b, 4000);
    let mut shifted = b.clone();
    for (i, row) in shifted.iter_mut().enumerate() {
        for (j, z) in row.iter_mut().enumerate() {
            *z = if i == j { Complex64::new(lam_max, 0.0) - b[i][j] } else { -b[i][j] };
        }
    }
    let lam_min = (lam_max - power_eig(&shifted, 4000)).max(0.0);
    (lam_max.sqrt(), lam_min.sqrt())
}

/// `σ_max/σ_min` with `+∞` for an exactly zero smallest singular value.
pub fn oracle_cond(a: &Mat) -> f64 {
    let (s_max, s_min) = oracle_extreme_singulars(a);
    if s_min == 0.0 {
        f64::INFINITY
    } else {
        s_max / s_min
    }
}

fn transpose_conj(a: &Mat) -> Mat {
    let rows = a.len();
    let cols = a[0].len();
    (0..cols)
        .map(|j| (0..rows).map(|i| a[i][j].conj()).collect())
        .collect()
}

/// Least-squares solve through the normal equations,
/// `x = (AᴴA)⁻¹ Aᴴ y`, by Gauss–Jordan elimination with partial pivoting.
/// Requires full column rank.
pub fn oracle_normal_solve(a: &Mat, y: &[Complex64]) -> Vec<Complex64> {
    let cols = a[0].len();
    let b = gram(a);
    let rhs: Vec<Complex64> = (0..cols)
        .map(|j| a.iter().zip(y).map(|(row, yi)| row[j].conj() * yi).sum())
        .collect();
    let mut aug: Vec<Vec<Complex64>> = b
        .into_iter()
        .zip(&rhs)
        .map(|(mut row, r)| {
            row.push(*r);
            row
        })
        .collect();
    for col in 0..cols {
        let pivot = (col..cols)
            .max_by(|&i, &j| aug[i][col].norm().total_cmp(&aug[j][col].norm()))
            .unwrap();
        aug.swap(col, pivot);
        let diag = aug[col][col];
        assert!(diag.norm() > 0.0, "oracle_normal_solve needs full column rank");
        for z in &mut aug[col] {
            *z /= diag;
        }
        for row in 0..cols {
            if row != col {
                let factor = aug[row][col];
                for idx in 0..=cols {
                    let sub = factor * aug[col][idx];
                    aug[row][idx] -= sub;
                }
            }
        }
    }
    aug.into_iter().map(|row| row[cols]).collect()
}

/// Visits every size-`k` subset of `0..n` in lexicographic order.
pub fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Minimal deterministic generator for test-side draws (SplitMix64). Kept
/// separate from the library's generator on purpose.
pub struct TestRng(u64);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        TestRng(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform-ish draw below `n`; modulo bias is irrelevant at test scale.
    pub fn below(&mut self, n: u64) -> u64 {
        self.next_u64() % n
    }

    pub fn unit_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

pub struct CliOutput {
    pub code: i32,
    pub stdout: Vec<u8>,
    pub stderr: Vec<u8>,
}

impl CliOutput {
    pub fn stdout_text(&self) -> String {
        String::from_utf8_lossy(&self.stdout).into_owned()
    }

    pub fn stderr_text(&self) -> String {
        String::from_utf8_lossy(&self.stderr).into_owned()
    }
}

/// Runs the compiled `multicoset` binary with extra environment variables.
pub fn run_cli_env(args: &[&str], envs: &[(&str, &str)]) -> CliOutput {
    let mut cmd = std::process::Command::new(env!("CARGO_BIN_EXE_multicoset"));
    cmd.args(args);
    for (key, value) in envs {
        cmd.env(key, value);
    }
    let output = cmd.output().expect("failed to spawn the multicoset binary");
    CliOutput {
        code: output.status.code().unwrap_or(-1),
        stdout: output.stdout,
        stderr: output.stderr,
    }
}

pub fn run_cli(args: &[&str]) -> CliOutput {
    run_cli_env(args, &[])
}

pub fn norm(v: &[Complex64]) -> f64 {
    vec_norm(v)
}

pub fn relative_error(got: &[Complex64], want: &[Complex64]) -> f64 {
    let diff: f64 = got
        .iter()
        .zip(want)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let base = vec_norm(want);
    if base > 0.0 {
        diff / base
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}
