//! Shared test support: an extended-precision series oracle and simple
//! independent quadrature routines.
//!
//! The oracle works in 80-decimal-digit fixed point on `BigInt`: every
//! series is summed term by term with a rounding error of at most a few
//! units in the 80th digit, far below every frozen target's precision.
//! All frozen high-precision expectations in the test suite were produced
//! by these routines.

#![allow(dead_code)]

pub mod oracle {
    use num_bigint::BigInt;
    use num_traits::{Signed, ToPrimitive, Zero};

    const DIGITS: u32 = 80;

    fn scale() -> BigInt {
        BigInt::from(10u32).pow(DIGITS)
    }

    /// Fixed-point value x = num / 10^DIGITS.
    #[derive(Clone, Debug)]
    struct Fx(BigInt);

    impl Fx {
        fn from_ratio(num: i64, den: i64) -> Fx {
            Fx(BigInt::from(num) * scale() / BigInt::from(den))
        }
        fn one() -> Fx {
            Fx(scale())
        }
        fn mul(&self, other: &Fx) -> Fx {
            Fx(&self.0 * &other.0 / scale())
        }
        fn div(&self, other: &Fx) -> Fx {
            Fx(&self.0 * scale() / &other.0)
        }
        fn div_int(&self, k: i64) -> Fx {
            Fx(&self.0 / BigInt::from(k))
        }
        fn add_assign(&mut self, other: &Fx) {
            self.0 += &other.0;
        }
        fn is_negligible_against(&self, sum: &Fx) -> bool {
            // |term| * 10^70 < |sum| means the term is below the 70th digit.
            (&self.0 * BigInt::from(10u64).pow(70)).abs() < sum.0.abs()
        }
        fn to_f64(&self) -> f64 {
            // Split to keep the conversion within f64 range for values
            // of magnitude up to ~1e100.
            let (q, r) = {
                let s = scale();
                (&self.0 / &s, &self.0 % &s)
            };
            q.to_f64().unwrap() + r.to_f64().unwrap() / 1e80
        }
    }

    /// exp(x) for rational x, summed until terms fall below digit 70.
    fn exp_fx(num: i64, den: i64) -> Fx {
        let x = Fx::from_ratio(num, den);
        let mut term = Fx::one();
        let mut sum = Fx::one();
        for k in 1..4000i64 {
            term = term.mul(&x).div_int(k);
            sum.add_assign(&term);
            if term.is_negligible_against(&sum) && k as f64 > (num as f64 / den as f64).abs() {
                break;
            }
        }
        sum
    }

    /// Modified Bessel series sum_m (x/2)^{2m+order} / (m! (m+order)!),
    /// integer order.
    fn bessel_series_fx(order: u32, num: i64, den: i64) -> Fx {
        let half = Fx::from_ratio(num, 2 * den);
        let mut term = Fx::one();
        for k in 1..=order as i64 {
            term = term.mul(&half).div_int(k);
        }
        let q = half.mul(&half);
        let mut sum = term.clone();
        for m in 0..4000i64 {
            term = term.mul(&q).div_int(m + 1).div_int(m + 1 + order as i64);
            sum.add_assign(&term);
            if term.is_negligible_against(&sum) && m as f64 > (num as f64 / den as f64) {
                break;
            }
        }
        sum
    }

    /// e^{-x} I_order(x) for rational x = num/den >= 0, integer order.
    pub fn bessel_i_scaled(order: u32, num: i64, den: i64) -> f64 {
        let series = bessel_series_fx(order, num, den);
        let expx = exp_fx(num, den);
        series.div(&expx).to_f64()
    }

    /// e^{-x}(I_0(x) - I_1(x)) for rational x.
    pub fn bessel_i0_minus_i1_scaled(num: i64, den: i64) -> f64 {
        let s0 = bessel_series_fx(0, num, den);
        let s1 = bessel_series_fx(1, num, den);
        let expx = exp_fx(num, den);
        Fx(s0.0 - s1.0).div(&expx).to_f64()
    }

    fn pfq_series_fx(upper: &[(i64, i64)], lower: &[(i64, i64)], num: i64, den: i64) -> Fx {
        let x = Fx::from_ratio(num, den);
        let mut term = Fx::one();
        let mut sum = Fx::one();
        for n in 0..4000i64 {
            let mut factor = x.clone().div_int(n + 1);
            for &(p, q) in upper {
                // factor *= (p/q + n)
                factor = factor.mul(&Fx::from_ratio(p + n * q, q));
            }
            for &(p, q) in lower {
                factor = factor.div(&Fx::from_ratio(p + n * q, q));
            }
            term = term.mul(&factor);
            if term.0.is_zero() {
                break;
            }
            sum.add_assign(&term);
            if term.is_negligible_against(&sum) && n as f64 > (num as f64 / den as f64).abs() {
                break;
            }
        }
        sum
    }

    /// e^{-x} x^k pFq(x) with rational parameters, x = num/den >= 0.
    pub fn pfq_scaled(
        upper: &[(i64, i64)],
        lower: &[(i64, i64)],
        num: i64,
        den: i64,
        k: u32,
    ) -> f64 {
        let series = pfq_series_fx(upper, lower, num, den);
        let expx = exp_fx(num, den);
        let mut scaled = series.div(&expx);
        for _ in 0..k {
            scaled = scaled.mul(&Fx::from_ratio(num, den));
        }
        scaled.to_f64()
    }

    /// Plain pFq(x), summed in fixed point.
    pub fn pfq(upper: &[(i64, i64)], lower: &[(i64, i64)], num: i64, den: i64) -> f64 {
        pfq_series_fx(upper, lower, num, den).to_f64()
    }

    /// Relative gap |a - b| / max(|a|, |b|, floor).
    pub fn rel_gap(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
    }
}

pub mod quad_oracle {
    //! Independent quadrature used to cross-check the library's closed forms
    //! and its own quadrature engine. Deliberately simple: adaptive Simpson
    //! with interval bisection, and Richardson-extrapolated trapezoids.

    pub fn simpson_adaptive<F: Fn(f64) -> f64 + Copy>(f: F, a: f64, b: f64, tol: f64) -> f64 {
        fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
            let m = 0.5 * (a + b);
            (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b))
        }
        fn recurse<F: Fn(f64) -> f64>(
            f: &F,
            a: f64,
            b: f64,
            whole: f64,
            tol: f64,
            depth: u32,
        ) -> f64 {
            let m = 0.5 * (a + b);
            let left = simpson(f, a, m);
            let right = simpson(f, m, b);
            if depth > 48 || (left + right - whole).abs() <= 15.0 * tol {
                left + right + (left + right - whole) / 15.0
            } else {
                recurse(f, a, m, left, 0.5 * tol, depth + 1)
                    + recurse(f, m, b, right, 0.5 * tol, depth + 1)
            }
        }
        let whole = simpson(&f, a, b);
        recurse(&f, a, b, whole, tol, 0)
    }

    /// Richardson-extrapolated trapezoid, refined until the correction is
    /// below tol.
    pub fn romberg<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
        let mut n = 16usize;
        let trap = |n: usize| -> f64 {
            let h = (b - a) / n as f64;
            let mut acc = 0.5 * (f(a) + f(b));
            for i in 1..n {
                acc += f(a + i as f64 * h);
            }
            acc * h
        };
        let mut coarse = trap(n);
        for _ in 0..18 {
            n *= 2;
            let fine = trap(n);
            let extrap = fine + (fine - coarse) / 3.0;
            if (fine - coarse).abs() < tol * 3.0 {
                return extrap;
            }
            coarse = fine;
        }
        coarse
    }
}
