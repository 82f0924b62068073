//! Eigenvalues of a real symmetric tridiagonal matrix by the implicit QL
//! method with Wilkinson-type shifts.

const MAX_SWEEPS: usize = 60;

/// `d` holds the diagonal, `e[i]` couples `i` and `i + 1` (`e[n−1]` unused).
/// On success `d` holds the eigenvalues, unsorted.
pub(crate) fn eigenvalues(d: &mut [f64], e: &mut [f64]) -> Result<(), String> {
    let n = d.len();
    if e.len() != n {
        return Err(format!(
            "off-diagonal length {} does not match dimension {n}",
            e.len()
        ));
    }
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_SWEEPS {
                return Err(format!("QL iteration did not converge for eigenvalue {l}"));
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
