//! Small dense linear algebra for runtime dimensions d <= 6.
//!
//! Matrices are row-major `Vec<f64>` of length d*d.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scaled(a: &[f64], c: f64) -> Vec<f64> {
    a.iter().map(|x| x * c).collect()
}

pub fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// y = M x for a row-major d×d matrix.
pub fn matvec(m: &[f64], x: &[f64], out: &mut [f64]) {
    let d = x.len();
    for r in 0..d {
        out[r] = dot(&m[r * d..(r + 1) * d], x);
    }
}

/// y = M^T x for a row-major d×d matrix.
pub fn matvec_t(m: &[f64], x: &[f64], out: &mut [f64]) {
    let d = x.len();
    for c in 0..d {
        let mut s = 0.0;
        for r in 0..d {
            s += m[r * d + c] * x[r];
        }
        out[c] = s;
    }
}

/// Solves M x = b in place by Gaussian elimination with partial pivoting.
/// Returns None when the pivot falls below 1e-300 (singular system).
pub fn solve(m: &mut [f64], b: &mut [f64]) -> Option<Vec<f64>> {
    let d = b.len();
    for col in 0..d {
        let mut piv = col;
        for r in col + 1..d {
            if m[r * d + col].abs() > m[piv * d + col].abs() {
                piv = r;
            }
        }
        if m[piv * d + col].abs() < 1e-300 {
            return None;
        }
        if piv != col {
            for c in 0..d {
                m.swap(col * d + c, piv * d + c);
            }
            b.swap(col, piv);
        }
        let diag = m[col * d + col];
        for r in col + 1..d {
            let factor = m[r * d + col] / diag;
            if factor == 0.0 {
                continue;
            }
            for c in col..d {
                m[r * d + c] -= factor * m[col * d + c];
            }
            b[r] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; d];
    for col in (0..d).rev() {
        let mut s = b[col];
        for c in col + 1..d {
            s -= m[col * d + c] * x[c];
        }
        x[col] = s / m[col * d + col];
    }
    Some(x)
}

/// Proper rotation A (det = +1) with A e1 = u for a unit vector u.
///
/// Acts as the identity on the orthogonal complement of span{e1, u}.
pub fn rotation_e1_to(u: &[f64]) -> Vec<f64> {
    let d = u.len();
    let mut a = vec![0.0; d * d];
    let c = u[0]; // u . e1
    let s2 = 1.0 - c * c;
    if s2 < 1e-28 {
        // u is ±e1: identity, or a half-turn in the (e1, e2) plane.
        for i in 0..d {
            a[i * d + i] = 1.0;
        }
        if c < 0.0 {
            a[0] = -1.0;
            if d > 1 {
                a[d + 1] = -1.0;
            }
        }
        return a;
    }
    // Orthonormal in-plane partner of e1: w = (u - c e1) / |u - c e1|.
    let s = s2.sqrt();
    let mut w = u.to_vec();
    w[0] -= c;
    let wn = norm(&w);
    for wi in w.iter_mut() {
        *wi /= wn;
    }
    // A x = x_perp + (e1.x)(c e1 + s w)' ... written out columnwise:
    // A = I + (c-1)(e1 e1^T + w w^T) + s (w e1^T - e1 w^T)
    for i in 0..d {
        a[i * d + i] = 1.0;
    }
    let e1 = {
        let mut v = vec![0.0; d];
        v[0] = 1.0;
        v
    };
    for r in 0..d {
        for col in 0..d {
            a[r * d + col] += (c - 1.0) * (e1[r] * e1[col] + w[r] * w[col])
                + s * (w[r] * e1[col] - e1[r] * w[col]);
        }
    }
    a
}

/// Eigenvalues of a symmetric d×d matrix by cyclic Jacobi rotations.
pub fn symmetric_eigenvalues(mat: &[f64], d: usize) -> Vec<f64> {
    let mut a = mat.to_vec();
    for _sweep in 0..64 {
        let mut off = 0.0;
        for r in 0..d {
            for c in r + 1..d {
                off += a[r * d + c] * a[r * d + c];
            }
        }
        if off < 1e-28 {
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                let apq = a[p * d + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = a[p * d + p];
                let aqq = a[q * d + q];
                let theta = 0.5 * (aqq - app) / apq;
                let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                let cos_r = 1.0 / (1.0 + t * t).sqrt();
                let sin_r = t * cos_r;
                for k in 0..d {
                    let akp = a[k * d + p];
                    let akq = a[k * d + q];
                    a[k * d + p] = cos_r * akp - sin_r * akq;
                    a[k * d + q] = sin_r * akp + cos_r * akq;
                }
                for k in 0..d {
                    let apk = a[p * d + k];
                    let aqk = a[q * d + k];
                    a[p * d + k] = cos_r * apk - sin_r * aqk;
                    a[q * d + k] = sin_r * apk + cos_r * aqk;
                }
            }
        }
    }
    let mut eigs: Vec<f64> = (0..d).map(|i| a[i * d + i]).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eigs
}

pub fn det(mat: &[f64], d: usize) -> f64 {
    let mut a = mat.to_vec();
    let mut sign = 1.0;
    let mut out = 1.0;
    for col in 0..d {
        let mut piv = col;
        for r in col + 1..d {
            if a[r * d + col].abs() > a[piv * d + col].abs() {
                piv = r;
            }
        }
        if a[piv * d + col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            sign = -sign;
            for c in 0..d {
                a.swap(col * d + c, piv * d + c);
            }
        }
        let diag = a[col * d + col];
        out *= diag;
        for r in col + 1..d {
            let factor = a[r * d + col] / diag;
            for c in col..d {
                a[r * d + c] -= factor * a[col * d + c];
            }
        }
    }
    sign * out
}
