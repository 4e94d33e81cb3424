//! Numerical building blocks shared by the geometry modules.

pub mod entire;
pub mod ode;
pub mod quad;
pub mod roots;

/// Sums a slice by recursive halving so reductions are reproducible and
/// accumulate O(log n) rounding error.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 16;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let (left, right) = values.split_at(values.len() / 2);
    pairwise_sum(left) + pairwise_sum(right)
}

/// Fourth-order central difference of a scalar function at zero.
pub fn central_diff4(f: impl Fn(f64) -> f64, h: f64) -> f64 {
    (8.0 * (f(h) - f(-h)) - (f(2.0 * h) - f(-2.0 * h))) / (12.0 * h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_sum_matches_naive_on_small_input() {
        let v: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 5050.0);
    }

    #[test]
    fn central_difference_is_exact_on_quartics() {
        let d = central_diff4(|x| 3.0 + 2.0 * x - x * x + 0.5 * x.powi(3) + x.powi(4), 0.1);
        assert!((d - 2.0).abs() < 1e-12);
    }
}
