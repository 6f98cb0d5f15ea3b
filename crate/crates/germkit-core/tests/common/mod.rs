//! Independent oracles for the integration suites. Everything here works on
//! truncated power series with plain coefficient arithmetic and never calls
//! the iteration paths it is used to check.

use num_complex::Complex64;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Truncated product of ascending-coefficient polynomials.
pub fn poly_mul_trunc(a: &[Complex64], b: &[Complex64], max_deg: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::ZERO; max_deg + 1];
    for (i, &ai) in a.iter().enumerate().take(max_deg + 1) {
        if ai == Complex64::ZERO {
            continue;
        }
        for (j, &bj) in b.iter().enumerate().take(max_deg + 1 - i) {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// Solve psi(f(z)) = lambda psi(z) for psi = z + b_2 z^2 + ... by the
/// triangular recursion b_N = sum_{m<N} b_m [f^m]_N / (lambda - lambda^N).
///
/// `f_full` holds the coefficients of f from degree 0 (so f_full[0] = 0 and
/// f_full[1] = lambda).
pub fn koenigs_series_coeffs(f_full: &[Complex64], terms: usize) -> Vec<Complex64> {
    let lambda = f_full[1];
    let mut powers: Vec<Vec<Complex64>> = vec![Vec::new(); terms + 1];
    let mut f_t = f_full.to_vec();
    f_t.resize(terms + 1, Complex64::ZERO);
    f_t.truncate(terms + 1);
    powers[1] = f_t.clone();
    for m in 2..=terms {
        powers[m] = poly_mul_trunc(&powers[m - 1], &f_t, terms);
    }

    let mut b = vec![Complex64::ZERO; terms + 1];
    b[1] = Complex64::ONE;
    let mut lambda_pow = lambda;
    for n in 2..=terms {
        lambda_pow *= lambda;
        let mut acc = Complex64::ZERO;
        for m in 1..n {
            acc += b[m] * powers[m][n];
        }
        b[n] = acc / (lambda - lambda_pow);
    }
    b
}

/// Solve psi(g(z)) = psi(z)^n for psi = z + b_2 z^2 + ..., with g monic of
/// local degree n (g_full[n] = 1). Order n + k - 1 determines b_k.
pub fn boettcher_series_coeffs(g_full: &[Complex64], n: usize, terms: usize) -> Vec<Complex64> {
    let cap = n + terms;
    let mut g_t = g_full.to_vec();
    g_t.resize(cap + 1, Complex64::ZERO);
    g_t.truncate(cap + 1);

    let mut g_powers: Vec<Vec<Complex64>> = vec![Vec::new(); terms + 2];
    g_powers[1] = g_t.clone();
    for m in 2..=terms + 1 {
        g_powers[m] = poly_mul_trunc(&g_powers[m - 1], &g_t, cap);
    }

    let mut b = vec![Complex64::ZERO; terms + 1];
    b[1] = Complex64::ONE;
    for k in 2..=terms {
        let order = n + k - 1;
        // [psi_{<k}(g)]_order with psi_{<k} = sum_{m<k} b_m z^m.
        let mut comp = Complex64::ZERO;
        for m in 1..k {
            if m < g_powers.len() && order < g_powers[m].len() {
                comp += b[m] * g_powers[m][order];
            }
        }
        // [psi_{<k}^n]_order.
        let mut psi = vec![Complex64::ZERO; order + 1];
        for (m, &bm) in b.iter().enumerate().take(k).skip(1) {
            if m <= order {
                psi[m] = bm;
            }
        }
        let mut pow = vec![Complex64::ZERO; order + 1];
        pow[0] = Complex64::ONE;
        for _ in 0..n {
            pow = poly_mul_trunc(&pow, &psi, order);
        }
        b[k] = (comp - pow[order]) / n as f64;
    }
    b
}

/// Horner evaluation of sum_{m>=1} b_m z^m from `coeffs[1..]`.
pub fn eval_series(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    let mut acc = Complex64::ZERO;
    for &b in coeffs.iter().skip(1).rev() {
        acc = acc * z + b;
    }
    acc * z
}

/// Closed-form Koenigs linearizer of f(z) = lambda z / (1 + a z):
/// psi(z) = z / (1 - c z) with c = a / (lambda - 1). The functional
/// equation psi(f(z)) = lambda psi(z) is re-verified at the given point.
pub fn moebius_koenigs_psi(lambda: Complex64, a: Complex64, z: Complex64) -> Complex64 {
    let cc = a / (lambda - Complex64::ONE);
    let psi = |w: Complex64| w / (Complex64::ONE - cc * w);
    let f = |w: Complex64| lambda * w / (Complex64::ONE + a * w);
    let residual = (psi(f(z)) - lambda * psi(z)).norm();
    assert!(
        residual < 1e-14 * psi(z).norm().max(1e-10),
        "closed form fails its own functional equation: {residual}"
    );
    psi(z)
}

#[allow(dead_code)]
pub fn sanity() {
    // b_2 for f = 0.5 z - 0.5 z^2 + ... (the Moebius germ) must be -2.
    let f = [c(0.0, 0.0), c(0.5, 0.0), c(-0.5, 0.0)];
    let b = koenigs_series_coeffs(&f, 3);
    assert!((b[2] - c(-2.0, 0.0)).norm() < 1e-12);
    // b_2, b_3 for g = z^2 + z^3: 1/2 and 1/8.
    let g = [c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)];
    let b = boettcher_series_coeffs(&g, 2, 3);
    assert!((b[2] - c(0.5, 0.0)).norm() < 1e-12);
    assert!((b[3] - c(0.125, 0.0)).norm() < 1e-12);
}
