//! Shared oracles for the integration suites: a cyclic Jacobi
//! diagonalizer (independent of the library's Householder/Sturm path),
//! seeded random symmetric matrices, and a pass/fail reporter.

use rand::Rng;

/// Full eigenvalue set of a dense symmetric matrix by cyclic Jacobi
/// rotations. O(n³) per sweep; converges quadratically. Ascending order.
pub fn jacobi_eigenvalues(mut a: Vec<f64>, n: usize) -> Vec<f64> {
    assert_eq!(a.len(), n * n);
    let scale = a.iter().fold(0.0f64, |m, &v| m.max(v.abs())).max(1e-300);
    for _sweep in 0..200 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                off += a[i * n + j] * a[i * n + j];
            }
        }
        if off.sqrt() <= 1e-14 * scale {
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // A ← Jᵀ A J on rows/columns p and q
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
    let mut evs: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    evs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    evs
}

/// Dense random symmetric matrix with entries in [-2, 2].
pub fn random_symmetric(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = lifshitz_lab::rng::stream_rng(&[0xACCE97, seed]);
    let mut a = vec![0.0f64; n * n];
    for i in 0..n {
        for j in i..n {
            let v = 4.0 * rng.random::<f64>() - 2.0;
            a[i * n + j] = v;
            a[j * n + i] = v;
        }
    }
    a
}

/// One pass/fail line per acceptance criterion.
pub fn report(id: &str, pass: bool, detail: &str) {
    println!(
        "ACCEPTANCE {id}: {} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}
