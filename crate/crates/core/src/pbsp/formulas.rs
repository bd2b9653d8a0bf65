//! Closed forms for the port protocols. Degenerate inputs are accepted here
//! (and only here): `N = 0` never succeeds, `d = 1` always does.

#[allow(unused_imports)]
use num_traits::Float;

/// `(1 − 1/d)^N`, the chance that no port holds the target.
pub fn abort_probability(d: usize, n_ports: usize) -> f64 {
    if d <= 1 {
        return if n_ports == 0 { 1.0 } else { 0.0 };
    }
    (n_ports as f64 * (-1.0 / d as f64).ln_1p()).exp()
}

/// `1 − (1 − 1/d)^N`, evaluated without cancellation near 1.
pub fn success_probability(d: usize, n_ports: usize) -> f64 {
    if d <= 1 {
        return if n_ports == 0 { 0.0 } else { 1.0 };
    }
    -(n_ports as f64 * (-1.0 / d as f64).ln_1p()).exp_m1()
}

/// Probability of announcing a given port `x ≥ 1` in the probabilistic
/// variant: `(1/d) Σ_{i=0}^{N−1} C(N−1,i)/(i+1) (1/d)^i (1−1/d)^{N−1−i}`.
///
/// The binomial weights are built by ratio recurrence outward from the mode
/// and normalized by their own sum, so large `N` neither underflows nor
/// accumulates log-space error.
pub fn port_success_weight(d: usize, n_ports: usize) -> f64 {
    if n_ports == 0 {
        return 0.0;
    }
    if d <= 1 {
        return 1.0 / n_ports as f64;
    }
    let q = 1.0 / d as f64;
    let odds = q / (1.0 - q);
    let m = n_ports - 1;
    let mode = (((m + 1) as f64) * q).floor().min(m as f64) as usize;
    let (mut mass, mut weighted) = (1.0, 1.0 / (mode + 1) as f64);
    let mut t = 1.0;
    for i in mode..m {
        t *= (m - i) as f64 / (i + 1) as f64 * odds;
        mass += t;
        weighted += t / (i + 2) as f64;
    }
    t = 1.0;
    for i in (1..=mode).rev() {
        t *= i as f64 / ((m - i + 1) as f64 * odds);
        mass += t;
        weighted += t / i as f64;
    }
    q * weighted / mass
}

/// `N · port_success_weight(d, N)`, which equals `1 − (1 − 1/d)^N`.
pub fn binomial_identity_lhs(d: usize, n_ports: usize) -> f64 {
    n_ports as f64 * port_success_weight(d, n_ports)
}

/// Deterministic variant: the abort mass is spread evenly over the ports.
pub fn deterministic_port_probability(d: usize, n_ports: usize) -> f64 {
    if n_ports == 0 {
        return 0.0;
    }
    port_success_weight(d, n_ports) + abort_probability(d, n_ports) / n_ports as f64
}

/// Unnormalized weight `(1/(N d)) (1 − 1/d)^{N−1}` of `I − |ψ⟩⟨ψ|` in the
/// deterministic port state.
pub fn deterministic_orthogonal_weight(d: usize, n_ports: usize) -> f64 {
    if n_ports == 0 || d <= 1 {
        return 0.0;
    }
    abort_probability(d, n_ports - 1) / (n_ports * d) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn known_values() {
        assert!((success_probability(2, 1) - 0.5).abs() < 1e-15);
        assert!((success_probability(2, 3) - 0.875).abs() < 1e-15);
        assert!((success_probability(2, 2) - 0.75).abs() < 1e-15);
        assert!((success_probability(3, 4) - 65.0 / 81.0).abs() < 1e-15);
        assert!((success_probability(4, 20) - 0.996_829).abs() < 1e-6);
        assert_eq!(success_probability(2, 50), 1.0 - 2f64.powi(-50));
    }

    #[test]
    fn degenerate_inputs() {
        assert_eq!(success_probability(2, 0), 0.0);
        assert_eq!(abort_probability(5, 0), 1.0);
        assert_eq!(success_probability(1, 3), 1.0);
        assert_eq!(port_success_weight(4, 0), 0.0);
    }

    #[test]
    fn weight_matches_direct_sum_for_small_cases() {
        // d = 2, N = 2: (1/2)[(1/2) + (1/2)(1/2)] = 3/8
        assert!((port_success_weight(2, 2) - 0.375).abs() < 1e-15);
        // d = 3, N = 1: 1/3
        assert!((port_success_weight(3, 1) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn large_n_does_not_underflow() {
        let p = binomial_identity_lhs(2, 2000);
        assert!((p - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn binomial_identity(d in 2usize..=10, n in 1usize..=20) {
            prop_assert!((binomial_identity_lhs(d, n) - success_probability(d, n)).abs() < 1e-12);
        }

        #[test]
        fn deterministic_probabilities_are_uniform(d in 2usize..=10, n in 1usize..=20) {
            prop_assert!((deterministic_port_probability(d, n) - 1.0 / n as f64).abs() < 1e-12);
        }
    }
}
