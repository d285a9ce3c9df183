//! Brute-force reference computations for the test suites.
//!
//! Everything here is written from the defining formulas with no shortcuts
//! (explicit transform matrices, cyclic Jacobi sweeps, direct waveform
//! quadrature) and shares no code with `cdma-core`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Explicit `N x N` transform with entries
/// `exp(-2 pi j n (m/N + half/(2N))) / sqrt(N)` where `half` is 0 for the
/// integer-frequency transform and 1 for the half-shifted one.
///
/// `base` selects the index origin of both `m` and `n` (1 or 0).
pub fn transform_matrix(n: usize, half_shift: bool, base: usize) -> DMatrix<Complex64> {
    let nf = n as f64;
    let shift = if half_shift { 1.0 / (2.0 * nf) } else { 0.0 };
    DMatrix::from_fn(n, n, |r, c| {
        let m = (r + base) as f64;
        let k = (c + base) as f64;
        Complex64::from_polar(1.0 / nf.sqrt(), -2.0 * PI * k * (m / nf + shift))
    })
}

/// Diagonal weight `sqrt(1 + cos(2 pi f)/2)` at frequency `f`.
pub fn weight(f: f64) -> f64 {
    (1.0 + 0.5 * (2.0 * PI * f).cos()).sqrt()
}

/// Dense `Q_m = V* C_m V` (or the half-shifted variant), `m` in `1..=N`.
pub fn dense_q(n: usize, m: usize, half_shift: bool) -> DMatrix<Complex64> {
    let v = transform_matrix(n, half_shift, 1);
    let nf = n as f64;
    let f = m as f64 / nf + if half_shift { 1.0 / (2.0 * nf) } else { 0.0 };
    let mut c = DMatrix::<Complex64>::zeros(n, n);
    c[(m - 1, m - 1)] = Complex64::new(weight(f), 0.0);
    v.adjoint() * c * v
}

/// `x* A x`, real part (imaginary part is round-off for Hermitian `A`).
pub fn quad_form(a: &DMatrix<Complex64>, x: &[Complex64]) -> f64 {
    let n = x.len();
    let mut acc = Complex64::new(0.0, 0.0);
    for r in 0..n {
        for c in 0..n {
            acc += x[r].conj() * a[(r, c)] * x[c];
        }
    }
    acc.re
}

/// Dense quadratic forms `(s* Q_m s, s* Q^_m s)` for `m = 1..=N`.
pub fn dense_profile(s: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
    let n = s.len();
    let q = (1..=n).map(|m| quad_form(&dense_q(n, m, false), s)).collect();
    let qh = (1..=n).map(|m| quad_form(&dense_q(n, m, true), s)).collect();
    (q, qh)
}

/// `sum_m S_m^{i,k}` from dense quadratic forms.
pub fn dense_pair_interference(si: &[Complex64], sk: &[Complex64]) -> f64 {
    let (qi, qhi) = dense_profile(si);
    let (qk, qhk) = dense_profile(sk);
    (0..si.len())
        .map(|m| qi[m] * qk[m] + qhi[m] * qhk[m])
        .sum()
}

/// Dense interference matrix: `sum_{k != i} sum_m (s_k* Q_m s_k) Q_m + (s_k* Q^_m s_k) Q^_m`.
pub fn dense_sigma(set: &[Vec<Complex64>], i: usize) -> DMatrix<Complex64> {
    let n = set[0].len();
    let mut sigma = DMatrix::<Complex64>::zeros(n, n);
    for m in 1..=n {
        let q = dense_q(n, m, false);
        let qh = dense_q(n, m, true);
        for (k, sk) in set.iter().enumerate() {
            if k == i {
                continue;
            }
            sigma += &q * Complex64::new(quad_form(&q, sk), 0.0);
            sigma += &qh * Complex64::new(quad_form(&qh, sk), 0.0);
        }
    }
    sigma
}

/// All eigenvalues of a Hermitian matrix by cyclic complex Jacobi rotations,
/// sorted ascending.
pub fn jacobi_eigenvalues(h: &DMatrix<Complex64>) -> Vec<f64> {
    let n = h.nrows();
    let mut a = h.clone();
    let scale = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|r| (0..n).filter(move |&c| c != r).map(move |c| (r, c)))
            .map(|(r, c)| a[(r, c)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let b = a[(p, q)];
                let babs = b.norm();
                if babs <= 1e-300 {
                    continue;
                }
                let phase = b / babs;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                // real rotation of [[app, |b|], [|b|, aqq]] after the phase fix
                let theta = (aqq - app) / (2.0 * babs);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // U = diag(1, conj(phase)) * [[c, s], [-s, c]]
                let upp = Complex64::new(c, 0.0);
                let upq = Complex64::new(s, 0.0);
                let uqp = phase.conj() * (-s);
                let uqq = phase.conj() * c;
                for r in 0..n {
                    let xp = a[(r, p)];
                    let xq = a[(r, q)];
                    a[(r, p)] = xp * upp + xq * uqp;
                    a[(r, q)] = xp * upq + xq * uqq;
                }
                for col in 0..n {
                    let xp = a[(p, col)];
                    let xq = a[(q, col)];
                    a[(p, col)] = upp.conj() * xp + uqp.conj() * xq;
                    a[(q, col)] = upq.conj() * xp + uqq.conj() * xq;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|r| a[(r, r)].re).collect();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
    ev
}

/// Periodic cross-correlation `sum_n a[n] b[(n + shift) mod N]` of integer sequences.
pub fn periodic_xcorr(a: &[i32], b: &[i32], shift: usize) -> i32 {
    let n = a.len();
    (0..n).map(|j| a[j] * b[(j + shift) % n]).sum()
}

/// Binary m-sequence from a Fibonacci register: `a[t+deg] = xor of a[t+e]` for
/// every exponent `e` (below `deg`) present in the characteristic polynomial.
pub fn m_sequence(deg: usize, lower_exponents: &[usize], len: usize) -> Vec<u8> {
    let mut a = vec![1u8; deg];
    while a.len() < len {
        let t = a.len() - deg;
        let bit = lower_exponents.iter().fold(0u8, |acc, &e| acc ^ a[t + e]);
        a.push(bit);
    }
    a.truncate(len);
    a
}

/// Complex rectangular-chip waveform value of a periodic sequence at time `t`.
fn chip_at(s: &[Complex64], t: f64, tc: f64) -> Complex64 {
    let n = s.len() as i64;
    let idx = (t / tc).floor() as i64;
    s[idx.rem_euclid(n) as usize]
}

/// Integrand `Re[b_k(t - tau) s_k(t - tau) conj(s_i(t)) exp(j psi)]` of the
/// correlator output for one interferer, with the symbol `b_prev` active for
/// `t < tau` and `b_cur` afterwards.
pub fn correlator_integrand(
    sk: &[Complex64],
    si: &[Complex64],
    tau: f64,
    psi: f64,
    b_prev: f64,
    b_cur: f64,
    tc: f64,
    t: f64,
) -> f64 {
    let b = if t < tau { b_prev } else { b_cur };
    let v = chip_at(sk, t - tau, tc) * chip_at(si, t, tc).conj() * Complex64::from_polar(1.0, psi);
    b * v.re
}

/// Midpoint quadrature of [`correlator_integrand`] over `[0, T)` with
/// `points` samples in total.
///
/// The integrand is piecewise constant, so the grid is laid out per piece
/// (breakpoints at the desired user's chip edges and the delayed interferer's
/// chip edges) with samples distributed proportionally to piece length; a
/// uniform grid straddling the jumps would only be first-order accurate.
pub fn correlator_quadrature(
    sk: &[Complex64],
    si: &[Complex64],
    tau: f64,
    psi: f64,
    b_prev: f64,
    b_cur: f64,
    tc: f64,
    points: usize,
) -> f64 {
    let n = si.len();
    let period = n as f64 * tc;
    let mut edges: Vec<f64> = Vec::with_capacity(2 * n + 2);
    for j in 0..=n {
        edges.push(j as f64 * tc);
        let e = tau + j as f64 * tc;
        let e = if e >= period { e - period } else { e };
        edges.push(e);
    }
    edges.push(tau);
    edges.retain(|&e| (0.0..=period).contains(&e));
    edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
    edges.dedup_by(|a, b| (*a - *b).abs() < 1e-14 * period);
    let mut total = 0.0;
    for w in edges.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let len = hi - lo;
        if len <= 0.0 {
            continue;
        }
        let m = ((points as f64 * len / period).round() as usize).max(1);
        let h = len / m as f64;
        let mut acc = 0.0;
        for j in 0..m {
            let t = lo + (j as f64 + 0.5) * h;
            acc += correlator_integrand(sk, si, tau, psi, b_prev, b_cur, tc, t);
        }
        total += acc * h;
    }
    total
}

/// Gaussian tail probability `Q(x) = erfc(x / sqrt 2) / 2`.
pub fn q_function(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(x / std::f64::consts::SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_recovers_known_spectrum() {
        // unitary similarity of diag(-2, 0.5, 3, 7)
        let v = transform_matrix(4, true, 1);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(3.0, 0.0),
            Complex64::new(-2.0, 0.0),
            Complex64::new(7.0, 0.0),
            Complex64::new(0.5, 0.0),
        ]));
        let h = v.adjoint() * d * v;
        let ev = jacobi_eigenvalues(&h);
        for (got, want) in ev.iter().zip([-2.0, 0.5, 3.0, 7.0]) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn transforms_are_unitary() {
        for n in [2, 5, 31] {
            for half in [false, true] {
                let v = transform_matrix(n, half, 1);
                let err = (v.adjoint() * &v - DMatrix::<Complex64>::identity(n, n))
                    .iter()
                    .map(|z| z.norm())
                    .fold(0.0, f64::max);
                assert!(err < 1e-12);
            }
        }
    }

    #[test]
    fn quadrature_is_exact_for_aligned_case() {
        let s: Vec<Complex64> = [1.0, -1.0, 1.0].iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let v = correlator_quadrature(&s, &s, 0.0, 0.0, 1.0, 1.0, 1.0, 10_000);
        assert!((v - 3.0).abs() < 1e-12);
    }

    #[test]
    fn q_function_reference_value() {
        assert!((q_function(0.0) - 0.5).abs() < 1e-15);
        assert!((q_function(8f64.sqrt()) - 2.339e-3).abs() < 1e-6);
    }
}
