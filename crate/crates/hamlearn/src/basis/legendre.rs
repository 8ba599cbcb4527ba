//! Univariate Legendre polynomials via the three-term recurrence.

/// Evaluate `(P_k(t), P_k'(t))` on `[-1, 1]`; inputs are clamped to the
/// interval so the function is total.
///
/// Value recurrence: `(k+1) P_{k+1} = (2k+1) t P_k - k P_{k-1}`.
/// Derivative recurrence: `P'_{k+1} = P'_{k-1} + (2k+1) P_k`.
pub fn legendre_eval_with_deriv(k: u32, t: f64) -> (f64, f64) {
    let t = t.clamp(-1.0, 1.0);
    if k == 0 {
        return (1.0, 0.0);
    }
    if k == 1 {
        return (t, 1.0);
    }
    let mut p_prev = 1.0; // P_{j-1}
    let mut p_curr = t; // P_j
    let mut d_prev = 0.0; // P'_{j-1}
    let mut d_curr = 1.0; // P'_j
    for j in 1..k {
        let jf = j as f64;
        let p_next = ((2.0 * jf + 1.0) * t * p_curr - jf * p_prev) / (jf + 1.0);
        let d_next = d_prev + (2.0 * jf + 1.0) * p_curr;
        p_prev = p_curr;
        p_curr = p_next;
        d_prev = d_curr;
        d_curr = d_next;
    }
    (p_curr, d_curr)
}

/// Fill `vals[j] = P_j(t)` and `ders[j] = P_j'(t)` for `j = 0..=max_k`.
/// Hot-path variant used by the tensor-basis evaluators.
pub(crate) fn legendre_table(max_k: u32, t: f64, vals: &mut [f64], ders: &mut [f64]) {
    let t = t.clamp(-1.0, 1.0);
    vals[0] = 1.0;
    ders[0] = 0.0;
    if max_k == 0 {
        return;
    }
    vals[1] = t;
    ders[1] = 1.0;
    for j in 1..max_k as usize {
        let jf = j as f64;
        vals[j + 1] = ((2.0 * jf + 1.0) * t * vals[j] - jf * vals[j - 1]) / (jf + 1.0);
        ders[j + 1] = ders[j - 1] + (2.0 * jf + 1.0) * vals[j];
    }
}
