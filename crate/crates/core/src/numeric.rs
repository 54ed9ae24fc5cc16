//! Scalar helpers shared by the kernel, the energy and the solvers.

/// Neumaier-compensated accumulator.
///
/// Every double sum in the crate goes through this type: the singular kernel
/// spans many orders of magnitude and naive accumulation loses digits.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub const fn new() -> Self {
        Self { sum: 0.0, comp: 0.0 }
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl core::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of an iterator.
pub fn csum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

/// `|t|^{p-2} t`, written as `sign(t)|t|^{p-1}` so it is finite at `t = 0` for every `p > 1`.
#[inline]
pub fn signed_pow(t: f64, p: f64) -> f64 {
    if p == 2.0 {
        t
    } else if t == 0.0 {
        0.0
    } else {
        let m = powf(t.abs(), p - 1.0);
        if t < 0.0 {
            -m
        } else {
            m
        }
    }
}

/// `|t|^p`.
#[inline]
pub fn abs_pow(t: f64, p: f64) -> f64 {
    if p == 2.0 {
        t * t
    } else {
        powf(t.abs(), p)
    }
}

/// `|b|^p − |a|^p` evaluated without the cancellation of the naive difference
/// when `a` and `b` are close.
#[inline]
pub fn abs_pow_diff(a: f64, b: f64, p: f64) -> f64 {
    let x = a.abs();
    let y = b.abs();
    if p == 2.0 {
        return (y - x) * (y + x);
    }
    if x == 0.0 || y == 0.0 {
        return powf(y, p) - powf(x, p);
    }
    powf(x, p) * libm::expm1(p * libm::log1p((y - x) / x))
}

/// `n` log-spaced samples in `[lo, hi]`, both endpoints included.
pub fn logspace(lo: f64, hi: f64, n: usize) -> alloc::vec::Vec<f64> {
    debug_assert!(lo > 0.0 && hi > lo && n >= 2);
    let (a, b) = (libm::log(lo), libm::log(hi));
    (0..n)
        .map(|k| {
            if k == n - 1 {
                hi
            } else {
                libm::exp(a + (b - a) * k as f64 / (n - 1) as f64)
            }
        })
        .collect()
}

/// Relative difference `|a − b| / max(|a|, |b|, floor)`.
pub fn rel_diff(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

/// Conjugate exponent `p/(p−1)`.
#[inline]
pub fn conjugate(p: f64) -> f64 {
    p / (p - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut acc = CompensatedSum::new();
        acc.add(1.0);
        for _ in 0..10 {
            acc.add(1e-16);
        }
        acc.add(-1.0);
        assert!((acc.value() - 1e-15).abs() < 1e-30);
    }

    #[test]
    fn signed_pow_is_odd_and_finite_at_zero() {
        for &p in &[1.2, 1.5, 2.0, 3.0] {
            assert_eq!(signed_pow(0.0, p), 0.0);
            assert_eq!(signed_pow(-0.7, p), -signed_pow(0.7, p));
        }
        assert_eq!(signed_pow(2.0, 3.0), 4.0);
    }

    #[test]
    fn abs_pow_diff_matches_naive_when_far_apart() {
        let d = abs_pow_diff(1.0, 3.0, 2.5);
        let naive = powf(3.0, 2.5) - 1.0;
        assert!(rel_diff(d, naive, 1e-300) < 1e-14);
        assert_eq!(abs_pow_diff(0.0, 2.0, 3.0), 8.0);
    }

    #[test]
    fn abs_pow_diff_keeps_digits_for_close_arguments() {
        let a = 1.0;
        let b = 1.0 + 1e-12;
        // d/dx x^3 at 1 is 3
        let d = abs_pow_diff(a, b, 3.0);
        assert!(rel_diff(d, 3.0 * (b - a), 1e-300) < 1e-6);
    }

    #[test]
    fn logspace_hits_endpoints() {
        let v = logspace(1e-3, 1e3, 7);
        assert_eq!(v.len(), 7);
        assert!((v[0] - 1e-3).abs() < 1e-18);
        assert_eq!(v[6], 1e3);
        assert!((v[3] - 1.0).abs() < 1e-12);
    }
}
