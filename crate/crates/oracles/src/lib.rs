//! Brute-force reference computations for the eigloc test suites.
//!
//! Everything in this crate deliberately avoids the algorithms used by
//! the library under test: generalized eigenvalues come from
//! characteristic-polynomial roots, resolvent norms from an explicit
//! dense inverse and a Jacobi singular-value computation, matchings from
//! exhaustive search. Dimensions are expected to stay small (<= 8 for
//! eigenvalues, <= 50 for resolvents); nothing here is meant to be fast.

/// Generalized eigenvalues of `A v = lambda B v` (dense row-major, `B`
/// invertible) as the roots of `det(lambda I - B^-1 A)`, found by
/// Faddeev-LeVerrier coefficients, Durand-Kerner iteration and a Newton
/// polish. Returns the real parts sorted ascending; intended for
/// symmetric-definite pencils of dimension <= 8 with simple spectra.
pub fn charpoly_generalized_eigs(n: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    assert_eq!(a.len(), n * n);
    assert_eq!(b.len(), n * n);
    // C = B^-1 A column by column.
    let lu = Lu::new(n, b);
    let mut c = vec![0.0; n * n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        for i in 0..n {
            col[i] = a[i * n + j];
        }
        let x = lu.solve(&col);
        for i in 0..n {
            c[i * n + j] = x[i];
        }
    }
    let coeffs = charpoly(n, &c);
    let mut roots = polynomial_roots(&coeffs);
    roots.sort_by(|x, y| x.partial_cmp(y).unwrap());
    roots
}

/// Monic characteristic polynomial coefficients of a dense matrix by the
/// Faddeev-LeVerrier recurrence: `p(x) = x^n + c[n-1] x^(n-1) + ... + c[0]`.
fn charpoly(n: usize, m: &[f64]) -> Vec<f64> {
    let mut coeffs = vec![0.0; n + 1];
    coeffs[n] = 1.0;
    let mut work = vec![0.0; n * n]; // M_k
    let mut next = vec![0.0; n * n];
    for k in 1..=n {
        if k == 1 {
            work.copy_from_slice(m);
        } else {
            // next = M (work + c_{n-k+1} I)
            let shift = coeffs[n - k + 1];
            let mut shifted = work.clone();
            for i in 0..n {
                shifted[i * n + i] += shift;
            }
            for i in 0..n {
                for j in 0..n {
                    let mut s = 0.0;
                    for l in 0..n {
                        s += m[i * n + l] * shifted[l * n + j];
                    }
                    next[i * n + j] = s;
                }
            }
            work.copy_from_slice(&next);
        }
        let trace: f64 = (0..n).map(|i| work[i * n + i]).sum();
        coeffs[n - k] = -trace / k as f64;
    }
    coeffs
}

/// All roots of a monic real polynomial via Durand-Kerner, polished with
/// Newton steps. Returns real parts (the callers only use polynomials
/// with real spectra).
fn polynomial_roots(coeffs: &[f64]) -> Vec<f64> {
    let n = coeffs.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let scale = coeffs
        .iter()
        .take(n)
        .map(|c| c.abs().powf(1.0 / (n as f64)))
        .fold(1.0f64, f64::max);
    let mut z: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let angle = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4;
            (scale * angle.cos(), scale * angle.sin())
        })
        .collect();
    for _ in 0..400 {
        let mut moved = 0.0f64;
        for k in 0..n {
            let p = horner(coeffs, z[k]);
            let mut denom = (1.0, 0.0);
            for j in 0..n {
                if j != k {
                    denom = cmul(denom, csub(z[k], z[j]));
                }
            }
            if cabs(denom) == 0.0 {
                continue;
            }
            let step = cdiv(p, denom);
            z[k] = csub(z[k], step);
            moved = moved.max(cabs(step));
        }
        if moved <= 1e-14 * scale.max(1.0) {
            break;
        }
    }
    // Newton polish sharpens simple roots to machine precision.
    let deriv: Vec<f64> = (1..=n).map(|k| coeffs[k] * k as f64).collect();
    for zk in z.iter_mut() {
        for _ in 0..8 {
            let p = horner(coeffs, *zk);
            let d = horner(&deriv, *zk);
            if cabs(d) == 0.0 {
                break;
            }
            let step = cdiv(p, d);
            *zk = csub(*zk, step);
            if cabs(step) <= 1e-16 * (1.0 + cabs(*zk)) {
                break;
            }
        }
    }
    z.into_iter().map(|(re, _)| re).collect()
}

fn horner(coeffs: &[f64], z: (f64, f64)) -> (f64, f64) {
    let mut acc = (0.0, 0.0);
    for &c in coeffs.iter().rev() {
        acc = cmul(acc, z);
        acc = (acc.0 + c, acc.1);
    }
    acc
}

fn cmul(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}

fn csub(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0 - b.0, a.1 - b.1)
}

fn cdiv(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    let d = b.0 * b.0 + b.1 * b.1;
    ((a.0 * b.0 + a.1 * b.1) / d, (a.1 * b.0 - a.0 * b.1) / d)
}

fn cabs(a: (f64, f64)) -> f64 {
    a.0.hypot(a.1)
}

/// Dense LU with partial pivoting.
struct Lu {
    n: usize,
    lu: Vec<f64>,
    piv: Vec<usize>,
}

impl Lu {
    fn new(n: usize, a: &[f64]) -> Lu {
        let mut lu = a.to_vec();
        let mut piv: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            for i in k + 1..n {
                if lu[i * n + k].abs() > lu[p * n + k].abs() {
                    p = i;
                }
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                piv.swap(k, p);
            }
            let pivot = lu[k * n + k];
            assert!(pivot != 0.0, "singular matrix in oracle LU");
            for i in k + 1..n {
                let m = lu[i * n + k] / pivot;
                lu[i * n + k] = m;
                for j in k + 1..n {
                    lu[i * n + j] -= m * lu[k * n + j];
                }
            }
        }
        Lu { n, lu, piv }
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.piv.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for k in 0..i {
                x[i] = x[i] - self.lu[i * n + k] * x[k];
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                x[i] = x[i] - self.lu[i * n + k] * x[k];
            }
            x[i] /= self.lu[i * n + i];
        }
        x
    }
}

/// True iff every eigenvalue can be assigned to a distinct interval
/// containing it (within `tol`), by exhaustive backtracking. Requires
/// `intervals.len() <= 31`.
pub fn matching_exists_bruteforce(eigs: &[f64], intervals: &[(f64, f64)], tol: f64) -> bool {
    assert!(intervals.len() <= 31);
    if eigs.len() > intervals.len() {
        return false;
    }
    fn go(eigs: &[f64], intervals: &[(f64, f64)], tol: f64, k: usize, used: u32) -> bool {
        if k == eigs.len() {
            return true;
        }
        for (j, &(lo, hi)) in intervals.iter().enumerate() {
            if used & (1 << j) == 0 && eigs[k] >= lo - tol && eigs[k] <= hi + tol {
                if go(eigs, intervals, tol, k + 1, used | (1 << j)) {
                    return true;
                }
            }
        }
        false
    }
    go(eigs, intervals, tol, 0, 0)
}

/// Operator norm of the resolvent `(mu I - L^-1 A L^-T)^-1` where
/// `B = L L^T`, computed the long way: explicit complex inverse through a
/// real 2n-by-2n embedding, then the largest singular value via Jacobi
/// iteration on the Gram matrix.
pub fn dense_resolvent_norm(n: usize, a: &[f64], b: &[f64], mu_re: f64, mu_im: f64) -> f64 {
    let l = cholesky(n, b);
    let s = congruence(n, a, &l);
    // M = mu I - S; real embedding [[Re, -Im], [Im, Re]] shares M's
    // singular values (each doubled).
    let m2 = 2 * n;
    let mut t = vec![0.0; m2 * m2];
    for i in 0..n {
        for j in 0..n {
            let re = if i == j { mu_re - s[i * n + j] } else { -s[i * n + j] };
            t[i * m2 + j] = re;
            t[(n + i) * m2 + (n + j)] = re;
        }
        t[i * m2 + (n + i)] = -mu_im;
        t[(n + i) * m2 + i] = mu_im;
    }
    let inv = invert(m2, &t);
    // Gram matrix of the inverse; its largest eigenvalue is sigma_max^2.
    let mut gram = vec![0.0; m2 * m2];
    for i in 0..m2 {
        for j in 0..m2 {
            let mut sum = 0.0;
            for k in 0..m2 {
                sum += inv[k * m2 + i] * inv[k * m2 + j];
            }
            gram[i * m2 + j] = sum;
        }
    }
    jacobi_max_eigenvalue(m2, gram).sqrt()
}

fn cholesky(n: usize, a: &[f64]) -> Vec<f64> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i * n + j];
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                assert!(sum > 0.0, "oracle Cholesky: matrix not positive definite");
                l[i * n + i] = sum.sqrt();
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    l
}

fn congruence(n: usize, a: &[f64], l: &[f64]) -> Vec<f64> {
    // forward substitution helper
    let fwd = |b: &mut [f64]| {
        for i in 0..n {
            for k in 0..i {
                b[i] = b[i] - l[i * n + k] * b[k];
            }
            b[i] /= l[i * n + i];
        }
    };
    let mut w = vec![0.0; n * n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        for i in 0..n {
            col[i] = a[i * n + j];
        }
        fwd(&mut col);
        for i in 0..n {
            w[i * n + j] = col[i];
        }
    }
    let mut s = vec![0.0; n * n];
    for j in 0..n {
        col.copy_from_slice(&w[j * n..(j + 1) * n]);
        fwd(&mut col);
        for i in 0..n {
            s[i * n + j] = col[i];
        }
    }
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (s[i * n + j] + s[j * n + i]);
            s[i * n + j] = v;
            s[j * n + i] = v;
        }
    }
    s
}

fn invert(n: usize, a: &[f64]) -> Vec<f64> {
    let lu = Lu::new(n, a);
    let mut inv = vec![0.0; n * n];
    let mut e = vec![0.0; n];
    for j in 0..n {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[j] = 1.0;
        let col = lu.solve(&e);
        for i in 0..n {
            inv[i * n + j] = col[i];
        }
    }
    inv
}

/// Largest eigenvalue of a symmetric matrix by cyclic Jacobi rotations.
fn jacobi_max_eigenvalue(n: usize, mut a: Vec<f64>) -> f64 {
    let frob: f64 = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    for _sweep in 0..60 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if off.sqrt() <= 1e-13 * frob.max(1e-300) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).fold(f64::NEG_INFINITY, f64::max)
}

/// Central finite difference `(f(t+h) - f(t-h)) / 2h` along one axis.
pub fn central_difference(f: impl Fn(f64, f64) -> f64, x: f64, y: f64, h: f64, along_x: bool) -> f64 {
    if along_x {
        (f(x + h, y) - f(x - h, y)) / (2.0 * h)
    } else {
        (f(x, y + h) - f(x, y - h)) / (2.0 * h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn charpoly_eigs_of_diagonal_pencil() {
        let a = [3.0, 0.0, 0.0, 5.0];
        let b = [1.0, 0.0, 0.0, 2.0];
        let eigs = charpoly_generalized_eigs(2, &a, &b);
        assert!((eigs[0] - 2.5).abs() < 1e-12);
        assert!((eigs[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn charpoly_eigs_of_symmetric_pair() {
        // A = [[2,1],[1,2]] vs I: eigenvalues 1, 3.
        let a = [2.0, 1.0, 1.0, 2.0];
        let b = [1.0, 0.0, 0.0, 1.0];
        let eigs = charpoly_generalized_eigs(2, &a, &b);
        assert!((eigs[0] - 1.0).abs() < 1e-10);
        assert!((eigs[1] - 3.0).abs() < 1e-10);
    }

    #[test]
    fn matching_bruteforce_basic_cases() {
        assert!(matching_exists_bruteforce(
            &[1.0, 2.0],
            &[(0.5, 1.5), (1.5, 2.5)],
            0.0
        ));
        // {1, 5} vs two copies of [0, 2]: eigenvalue 5 fits nowhere.
        assert!(!matching_exists_bruteforce(
            &[1.0, 5.0],
            &[(0.0, 2.0), (0.0, 2.0)],
            0.0
        ));
        // Pigeonhole: two eigenvalues, one usable interval.
        assert!(!matching_exists_bruteforce(
            &[1.0, 1.1],
            &[(0.9, 1.2), (7.0, 8.0)],
            0.0
        ));
    }

    #[test]
    fn resolvent_norm_of_diagonal_problem() {
        // B = I, A = diag(1, 2): spectrum {1, 2}; at mu = 1 + i eps the
        // norm is 1/eps.
        let a = [1.0, 0.0, 0.0, 2.0];
        let b = [1.0, 0.0, 0.0, 1.0];
        let eps = 0.25;
        let r = dense_resolvent_norm(2, &a, &b, 1.0, eps);
        assert!((r - 1.0 / eps).abs() < 1e-10, "{r}");
    }
}
