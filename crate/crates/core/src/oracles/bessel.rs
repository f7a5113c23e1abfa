//! Bessel functions of the first kind and modified Bessel functions of
//! integer order for moderate real arguments.

/// Largest argument accepted by the evaluators.
pub const MAX_ARGUMENT: f64 = 60.0;

/// `J_0(x), …, J_nmax(x)` by Miller's backward recurrence, normalized with
/// `J_0 + 2 Σ_k J_2k = 1`.
pub fn bessel_j_orders(nmax: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; nmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let ax = x.abs();
    let top = (nmax as f64).max(ax);
    let mut start = (top + 30.0 + 8.0 * top.sqrt()) as usize;
    start += start % 2;

    let mut next = 0.0; // J_{k+1}
    let mut cur = 1e-30; // J_k
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        let prev = 2.0 * k as f64 / ax * cur - next;
        next = cur;
        cur = prev;
        // cur is now J_{k-1}
        if k - 1 <= nmax {
            out[k - 1] = cur;
        }
        if (k - 1) % 2 == 0 && k > 1 {
            norm += 2.0 * cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            for v in out.iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    norm += cur;
    for v in out.iter_mut() {
        *v /= norm;
    }
    if x < 0.0 {
        for (m, v) in out.iter_mut().enumerate() {
            if m % 2 == 1 {
                *v = -*v;
            }
        }
    }
    out
}

pub fn bessel_j(m: usize, x: f64) -> f64 {
    bessel_j_orders(m, x)[m]
}

/// Ascending power series for `J_m`; accurate only while `x` is small
/// enough that the alternating terms do not cancel badly (roughly `x ≤ 8`).
pub fn bessel_j_series(m: usize, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = 1.0;
    for i in 1..=m {
        term *= half / i as f64;
    }
    let mut sum = term;
    let q = -half * half;
    for k in 1..200 {
        term *= q / (k as f64 * (k + m) as f64);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// `I_m(x)` by its ascending series (all terms positive, no cancellation).
pub fn bessel_i(m: usize, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = 1.0;
    for i in 1..=m {
        term *= half / i as f64;
    }
    let mut sum = term;
    let q = half * half;
    for k in 1..500 {
        term *= q / (k as f64 * (k + m) as f64);
        sum += term;
        if term <= 1e-17 * sum {
            break;
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn tabulated_values() {
        assert_relative_eq!(bessel_j(0, 1.0), 0.7651976865579666, max_relative = 1e-14);
        assert_relative_eq!(bessel_j(1, 1.0), 0.4400505857449335, max_relative = 1e-14);
        assert_relative_eq!(bessel_i(0, 1.0), 1.2660658777520082, max_relative = 1e-14);
        assert_relative_eq!(bessel_i(1, 1.0), 0.5651591039924851, max_relative = 1e-14);
        assert!(bessel_j(0, 2.404825557695773).abs() < 1e-15);
    }

    #[test]
    fn recurrence_agrees_with_series_for_small_arguments() {
        for &x in &[0.1, 0.7, 1.5, 3.0, 5.0] {
            let j = bessel_j_orders(12, x);
            for (m, v) in j.iter().enumerate() {
                let s = bessel_j_series(m, x);
                assert!(
                    (v - s).abs() <= 1e-14 * (1.0 + s.abs()),
                    "m={m} x={x}: {v} vs {s}"
                );
            }
        }
    }

    #[test]
    fn sum_of_squares_is_one() {
        // J_0² + 2 Σ J_k² = 1 is independent of the normalization used.
        for &x in &[0.5, 4.0, 17.3, 35.0, 55.0] {
            let j = bessel_j_orders(140, x);
            let s: f64 = j[0] * j[0] + 2.0 * j[1..].iter().map(|v| v * v).sum::<f64>();
            assert_relative_eq!(s, 1.0, max_relative = 1e-13);
        }
    }

    #[test]
    fn wronskian_type_identity_for_modified_functions() {
        // I_{m-1} − I_{m+1} = (2m/x) I_m.
        for &x in &[0.3, 2.0, 11.0, 30.0] {
            for m in 1..8 {
                let lhs = bessel_i(m - 1, x) - bessel_i(m + 1, x);
                let rhs = 2.0 * m as f64 / x * bessel_i(m, x);
                assert_relative_eq!(lhs, rhs, max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn odd_orders_flip_sign_for_negative_arguments() {
        let p = bessel_j_orders(3, 2.5);
        let n = bessel_j_orders(3, -2.5);
        assert_eq!(p[0], n[0]);
        assert_eq!(p[1], -n[1]);
        assert_eq!(bessel_j_orders(2, 0.0), vec![1.0, 0.0, 0.0]);
    }
}
