use alloc::vec::Vec;

use super::matrix::{dot, SymMatrix};
use crate::error::{invalid, Error, Result};
use crate::math;

/// Eigen-decomposition of a symmetric matrix with eigenvalues in
/// non-increasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigh {
    pub values: Vec<f64>,
    order: usize,
    /// Eigenvector `k` occupies `vectors[k * order..(k + 1) * order]`.
    vectors: Vec<f64>,
}

impl Eigh {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn vector(&self, k: usize) -> &[f64] {
        &self.vectors[k * self.order..(k + 1) * self.order]
    }
}

fn check_finite(m: &SymMatrix) -> Result<()> {
    if m.is_finite() {
        Ok(())
    } else {
        Err(invalid("matrix has non-finite entries"))
    }
}

/// Eigenvalues only, in non-increasing order.
///
/// Householder reduction to tridiagonal form followed by implicit QL.
pub fn eigvalsh_desc(m: &SymMatrix) -> Result<Vec<f64>> {
    check_finite(m)?;
    let (mut d, mut e) = householder_values(m);
    tql(&mut d, &mut e, None)?;
    d.sort_unstable_by(|a, b| b.total_cmp(a));
    Ok(d)
}

/// Eigenvalues (non-increasing) and orthonormal eigenvectors.
pub fn eigh_desc(m: &SymMatrix) -> Result<Eigh> {
    check_finite(m)?;
    let n = m.order();
    if n == 0 {
        return Ok(Eigh { values: Vec::new(), order: 0, vectors: Vec::new() });
    }
    let mut v = m.as_slice().to_vec();
    let mut d = alloc::vec![0.0; n];
    let mut e = alloc::vec![0.0; n];
    tred2(n, &mut v, &mut d, &mut e);
    // tred2 leaves e[i] coupling (i-1, i); tql wants (i, i+1).
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    tql(&mut d, &mut e, Some(&mut v))?;

    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_unstable_by(|&a, &b| d[b].total_cmp(&d[a]));
    let values = idx.iter().map(|&i| d[i]).collect();
    let mut vectors = alloc::vec![0.0; n * n];
    for (k, &col) in idx.iter().enumerate() {
        for r in 0..n {
            vectors[k * n + r] = v[r * n + col];
        }
    }
    Ok(Eigh { values, order: n, vectors })
}

/// Sum of the first `min(n, len)` entries of a non-increasing list.
pub fn partial_sum(eigenvalues: &[f64], n: usize) -> Result<f64> {
    if n == 0 {
        return Err(invalid("partial sum needs n >= 1"));
    }
    Ok(eigenvalues.iter().take(n).sum())
}

/// Row-major Householder tridiagonalisation without accumulating the
/// transformation. Returns diagonal `d` and sub-diagonal `e` with `e[i]`
/// coupling `i` and `i + 1` (`e[n-1] = 0`).
fn householder_values(m: &SymMatrix) -> (Vec<f64>, Vec<f64>) {
    let n = m.order();
    let mut a = m.as_slice().to_vec();
    let mut d = alloc::vec![0.0; n];
    let mut e = alloc::vec![0.0; n];
    let mut v = alloc::vec![0.0; n];
    let mut w = alloc::vec![0.0; n];

    for k in 0..n.saturating_sub(2) {
        let size = n - k - 1;
        let start = k + 1;
        d[k] = a[k * n + k];
        let col = &a[k * n + start..k * n + n];
        let scale = col.iter().fold(0.0f64, |s, x| s.max(x.abs()));
        if scale == 0.0 {
            e[k] = 0.0;
            continue;
        }
        for (vi, &x) in v[..size].iter_mut().zip(col) {
            *vi = x / scale;
        }
        let sigma = math::sqrt(dot(&v[..size], &v[..size]));
        let alpha = if v[0] > 0.0 { -sigma } else { sigma };
        v[0] -= alpha;
        let vnorm2 = dot(&v[..size], &v[..size]);
        e[k] = alpha * scale;
        if vnorm2 == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm2;
        for i in 0..size {
            let r = (start + i) * n + start;
            w[i] = beta * dot(&a[r..r + size], &v[..size]);
        }
        let half = 0.5 * beta * dot(&w[..size], &v[..size]);
        for i in 0..size {
            w[i] -= half * v[i];
        }
        for i in 0..size {
            let (vi, wi) = (v[i], w[i]);
            let r = (start + i) * n + start;
            for ((aij, &vj), &wj) in a[r..r + size].iter_mut().zip(&v[..size]).zip(&w[..size]) {
                *aij -= vi * wj + wi * vj;
            }
        }
    }
    if n >= 2 {
        d[n - 2] = a[(n - 2) * n + n - 2];
        d[n - 1] = a[(n - 1) * n + n - 1];
        e[n - 2] = a[(n - 2) * n + n - 1];
    } else if n == 1 {
        d[0] = a[0];
    }
    (d, e)
}

/// Householder tridiagonalisation with accumulation (EISPACK `tred2`
/// ordering). `v` holds the matrix on entry and the orthogonal transform on
/// exit; `e[i]` couples `i - 1` and `i`.
fn tred2(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64]) {
    let ix = |r: usize, c: usize| r * n + c;
    for j in 0..n {
        d[j] = v[ix(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[ix(i - 1, j)];
                v[ix(i, j)] = 0.0;
                v[ix(j, i)] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = math::sqrt(h);
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[ix(j, i)] = f;
                g = e[j] + v[ix(j, j)] * f;
                for k in j + 1..i {
                    g += v[ix(k, j)] * d[k];
                    e[k] += v[ix(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[ix(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[ix(i - 1, j)];
                v[ix(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }
    for i in 0..n.saturating_sub(1) {
        v[ix(n - 1, i)] = v[ix(i, i)];
        v[ix(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[ix(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[ix(k, i + 1)] * v[ix(k, j)];
                }
                for k in 0..=i {
                    v[ix(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[ix(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[ix(n - 1, j)];
        v[ix(n - 1, j)] = 0.0;
    }
    v[ix(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

/// Implicit QL on a symmetric tridiagonal matrix. `e[i]` couples `i` and
/// `i + 1`. When `z` is given (row-major, columns are vectors) the rotations
/// are accumulated into it.
fn tql(d: &mut [f64], e: &mut [f64], mut z: Option<&mut [f64]>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m == n {
            m = n - 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 64 {
                    return Err(Error::EigenNoConvergence);
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = math::hypot(p, 1.0);
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
                f += h;

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
                    g = c * e[i];
                    h = c * p;
                    r = math::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(z) = z.as_deref_mut() {
                        for k in 0..n {
                            let zi = z[k * n + i];
                            let zi1 = z[k * n + i + 1];
                            z[k * n + i + 1] = s * zi + c * zi1;
                            z[k * n + i] = c * zi - s * zi1;
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
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}
