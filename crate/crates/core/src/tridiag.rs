//! Symmetric tridiagonal eigensolvers.
//!
//! Eigenvalues come from the implicit-shift QL iteration. Eigenvectors are
//! accumulated through the same rotations for small matrices; above
//! [`ROTATION_LIMIT`] that costs O(n³), so vectors are instead obtained by
//! inverse iteration on the converged eigenvalues with Gram-Schmidt inside
//! clusters of close eigenvalues.
//!
//! Vectors are returned column-major: column k occupies `[k*n, (k+1)*n)`.

use crate::error::{QstError, Result};

pub(crate) const ROTATION_LIMIT: usize = 256;

const MAX_SWEEPS: usize = 60;

/// Which eigenvector algorithm to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VectorMethod {
    /// QL rotations up to 256 sites, inverse iteration above.
    Auto,
    Rotations,
    InverseIteration,
}

pub(crate) fn eigensystem(diag: &[f64], off: &[f64], method: VectorMethod) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = diag.len();
    debug_assert_eq!(off.len() + 1, n);
    let use_rotations = match method {
        VectorMethod::Auto => n <= ROTATION_LIMIT,
        VectorMethod::Rotations => true,
        VectorMethod::InverseIteration => false,
    };
    if use_rotations {
        let mut d = diag.to_vec();
        let mut e = padded(off);
        let mut z = identity(n);
        ql_implicit(&mut d, &mut e, Some(&mut z))?;
        Ok(sort_pairs(d, z))
    } else {
        let vals = eigenvalues(diag, off)?;
        let vecs = inverse_iteration(diag, off, &vals);
        Ok((vals, vecs))
    }
}

/// Ascending eigenvalues only; O(n²).
pub(crate) fn eigenvalues(diag: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    let mut d = diag.to_vec();
    let mut e = padded(off);
    ql_implicit(&mut d, &mut e, None)?;
    d.sort_by(|a, b| a.total_cmp(b));
    Ok(d)
}

fn padded(off: &[f64]) -> Vec<f64> {
    let mut e = off.to_vec();
    e.push(0.0);
    e
}

fn identity(n: usize) -> Vec<f64> {
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }
    z
}

fn sort_pairs(d: Vec<f64>, z: Vec<f64>) -> (Vec<f64>, Vec<f64>) {
    let n = d.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]).then(a.cmp(&b)));
    let vals = order.iter().map(|&k| d[k]).collect();
    let mut vecs = Vec::with_capacity(n * n);
    for &k in &order {
        vecs.extend_from_slice(&z[k * n..(k + 1) * n]);
    }
    (vals, vecs)
}

/// Implicit QL with Wilkinson-style shifts (tql2 lineage).
///
/// `e[i]` couples rows i and i+1 and `e[n-1]` must be zero. On return `d`
/// holds the (unsorted) eigenvalues and the columns of `z` the matching
/// eigenvectors, if requested.
fn ql_implicit(d: &mut [f64], e: &mut [f64], mut z: Option<&mut [f64]>) -> Result<()> {
    let n = d.len();
    let eps = f64::EPSILON;
    let mut shift_total = 0.0;
    let mut tst1: f64 = 0.0;

    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }

        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > MAX_SWEEPS {
                    return Err(QstError::EigenNoConvergence(l));
                }

                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                shift_total += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    if let Some(z) = z.as_deref_mut() {
                        let (left, right) = z.split_at_mut((i + 1) * n);
                        let col_i = &mut left[i * n..];
                        let col_next = &mut right[..n];
                        for (zi, zn) in col_i.iter_mut().zip(col_next.iter_mut()) {
                            let hk = *zn;
                            *zn = s * *zi + c * hk;
                            *zi = c * *zi - s * hk;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;

                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += shift_total;
        e[l] = 0.0;
    }
    Ok(())
}

/// LU factors of (T − λI) with partial pivoting, LAPACK `gttrf` layout.
struct ShiftedLu {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper1: Vec<f64>,
    upper2: Vec<f64>,
    swapped: Vec<bool>,
}

impl ShiftedLu {
    fn factor(diag: &[f64], off: &[f64], lambda: f64, tiny: f64) -> Self {
        let n = diag.len();
        let mut d: Vec<f64> = diag.iter().map(|x| x - lambda).collect();
        let mut dl = off.to_vec();
        let mut du = off.to_vec();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];

        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] != 0.0 {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] -= fact * du[i];
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        for di in d.iter_mut() {
            if di.abs() < tiny {
                *di = if *di < 0.0 { -tiny } else { tiny };
            }
        }
        Self { lower: dl, diag: d, upper1: du, upper2: du2, swapped }
    }

    fn solve(&self, x: &mut [f64]) {
        let n = x.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let temp = x[i] - self.lower[i] * x[i + 1];
                x[i] = x[i + 1];
                x[i + 1] = temp;
            } else {
                x[i + 1] -= self.lower[i] * x[i];
            }
        }
        for i in (0..n).rev() {
            let mut v = x[i];
            if i + 1 < n {
                v -= self.upper1[i] * x[i + 1];
            }
            if i + 2 < n {
                v -= self.upper2[i] * x[i + 2];
            }
            x[i] = v / self.diag[i];
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(x: &mut [f64]) -> f64 {
    let nrm = dot(x, x).sqrt();
    if nrm > 0.0 {
        x.iter_mut().for_each(|v| *v /= nrm);
    }
    nrm
}

/// Eigenvectors for the given ascending eigenvalues by inverse iteration.
fn inverse_iteration(diag: &[f64], off: &[f64], eigenvalues: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let eps = f64::EPSILON;
    let norm = (0..n)
        .map(|i| {
            diag[i].abs()
                + if i > 0 { off[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { off[i].abs() } else { 0.0 }
        })
        .fold(0.0_f64, f64::max)
        .max(f64::MIN_POSITIVE);
    // Non-clustered vectors come out orthogonal to about eps·norm/gap.
    let cluster_tol = 1e-5 * norm;
    let perturb = 10.0 * eps * norm;
    let tiny = eps * norm;
    let converged_growth = 1.0 / (1e3 * (n as f64).sqrt() * eps * norm);

    let mut vecs = vec![0.0; n * n];
    let mut cluster_start = 0;
    let mut prev_shift = f64::NEG_INFINITY;

    for j in 0..n {
        if j > 0 && eigenvalues[j] - eigenvalues[j - 1] > cluster_tol {
            cluster_start = j;
        }
        let mut shift = eigenvalues[j];
        if j > cluster_start && shift - prev_shift < perturb {
            shift = prev_shift + perturb;
        }
        prev_shift = shift;

        let lu = ShiftedLu::factor(diag, off, shift, tiny);
        // Deterministic, non-degenerate start vector.
        let mut x: Vec<f64> = (0..n)
            .map(|i| {
                let h = ((i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (j as u64 + 7).wrapping_mul(0xBF58_476D_1CE4_E5B9)) >> 11;
                0.5 + (h as f64) / ((1u64 << 53) as f64)
            })
            .collect();
        normalize(&mut x);

        let mut extra = None;
        for _ in 0..8 {
            lu.solve(&mut x);
            for _ in 0..2 {
                for k in cluster_start..j {
                    let col = &vecs[k * n..(k + 1) * n];
                    let proj = dot(&x, col);
                    x.iter_mut().zip(col).for_each(|(v, c)| *v -= proj * c);
                }
            }
            let growth = normalize(&mut x);
            match extra {
                Some(0) => break,
                Some(k) => extra = Some(k - 1),
                None if growth >= converged_growth => extra = Some(0),
                None => {}
            }
        }
        vecs[j * n..(j + 1) * n].copy_from_slice(&x);
    }
    vecs
}
