//! Physicists' Hermite polynomials: overflow-safe evaluation, a zero finder
//! that shares nothing with the eigensolver, and the three-term eigenvector
//! recursion of `Q_N`.
//!
//! Large-degree values are carried as `mantissa · 2^exponent`; the mantissa is
//! renormalized whenever it leaves `[2^-512, 2^512]`.

use crate::eig::Spectrum;
use crate::error::{Error, Result};
use crate::operators::ladder_coefficient;
use crate::report::tolerance::{names, tol};

const RESCALE_BITS: i32 = 512;

fn pow2(e: i32) -> f64 {
    debug_assert!((-1022..=1023).contains(&e));
    f64::from_bits(((e + 1023) as u64) << 52)
}

/// `m · 2^e`, saturating to `±inf` or zero outside the double range.
pub fn ldexp(mut m: f64, mut e: i32) -> f64 {
    while e > 1000 {
        m *= pow2(1000);
        e -= 1000;
        if m.is_infinite() {
            return m;
        }
    }
    while e < -1000 {
        m *= pow2(-1000);
        e += 1000;
        if m == 0.0 {
            return m;
        }
    }
    m * pow2(e)
}

fn too_big(v: f64) -> bool {
    v.abs() > pow2(RESCALE_BITS)
}

fn too_small(v: f64) -> bool {
    v != 0.0 && v.abs() < pow2(-RESCALE_BITS)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermiteEval {
    pub degree: usize,
    pub point: f64,
    /// `H_k(x)`; may be infinite when it exceeds the double range.
    pub value: f64,
    /// `H_k(x) / sqrt(2^k k!)`; may be infinite.
    pub scaled_value: f64,
    /// Together with `log_scale`: `scaled_value = mantissa · 2^log_scale`.
    pub mantissa: f64,
    pub log_scale: i32,
}

/// `H_k(x)` from `H_{k+1} = 2x H_k − 2k H_{k−1}`.
///
/// The scaled value divides by the running product `Π sqrt(2j)`, so it does not
/// reuse the normalized recursion of [`eigvec_recursion`].
pub fn hermite_eval(k: usize, x: f64) -> HermiteEval {
    let (mut prev, mut cur, mut exp) = (0.0, 1.0, 0i32);
    for j in 0..k {
        // H_{j+1} = 2x H_j − 2j H_{j−1}
        let next = 2.0 * x * cur - 2.0 * j as f64 * prev;
        prev = cur;
        cur = next;
        if too_big(cur) || too_big(prev) {
            cur *= pow2(-RESCALE_BITS);
            prev *= pow2(-RESCALE_BITS);
            exp += RESCALE_BITS;
        } else if (too_small(cur) || cur == 0.0) && (too_small(prev) || prev == 0.0) && (cur != 0.0 || prev != 0.0) {
            cur *= pow2(RESCALE_BITS);
            prev *= pow2(RESCALE_BITS);
            exp -= RESCALE_BITS;
        }
    }

    let (mut norm, mut norm_exp) = (1.0, 0i32);
    for j in 1..=k {
        norm *= (2.0 * j as f64).sqrt();
        if too_big(norm) {
            norm *= pow2(-RESCALE_BITS);
            norm_exp += RESCALE_BITS;
        }
    }

    let mut mantissa = cur / norm;
    let mut log_scale = exp - norm_exp;
    while too_big(mantissa) {
        mantissa *= pow2(-RESCALE_BITS);
        log_scale += RESCALE_BITS;
    }
    while too_small(mantissa) {
        mantissa *= pow2(RESCALE_BITS);
        log_scale -= RESCALE_BITS;
    }

    HermiteEval {
        degree: k,
        point: x,
        value: ldexp(cur, exp),
        scaled_value: ldexp(mantissa, log_scale),
        mantissa,
        log_scale,
    }
}

/// Normalized `p_m(x)` and `p_{m−1}(x)` sharing one exponent, where
/// `p_k = H_k / sqrt(2^k k!)`. Requires `m >= 1`.
fn scaled_pair(m: usize, x: f64) -> (f64, f64) {
    let (mut prev, mut cur) = (1.0, x / ladder_coefficient(0));
    for k in 1..m {
        let next = (x * cur - ladder_coefficient(k - 1) * prev) / ladder_coefficient(k);
        prev = cur;
        cur = next;
        if too_big(cur) || too_big(prev) {
            cur *= pow2(-RESCALE_BITS);
            prev *= pow2(-RESCALE_BITS);
        }
    }
    (cur, prev)
}

/// Zeros of `H_1, …, H_m`, each built by bracketing between the zeros of the
/// previous degree (strict interlacing) and polishing with safeguarded Newton.
pub fn hermite_zero_ladder(m: usize) -> Result<Vec<Spectrum>> {
    if m == 0 {
        return Err(Error::InvalidArgument("H_0 has no zeros".into()));
    }
    let mut ladder = Vec::with_capacity(m);
    let mut zeros = vec![0.0];
    ladder.push(Spectrum::new(zeros.clone())?);
    for degree in 2..=m {
        // All zeros of H_d lie inside (−sqrt(2d+1), sqrt(2d+1)).
        let bound = ((2 * degree + 1) as f64).sqrt();
        let mut ends = Vec::with_capacity(degree + 1);
        ends.push(-bound);
        ends.extend_from_slice(&zeros);
        ends.push(bound);

        let polish = |index: usize| {
            let (a, b) = (ends[index], ends[index + 1]);
            let z = polish_zero(degree, index, a, b)?;
            if !(a < z && z < b) {
                return Err(Error::BracketFailure { degree, index });
            }
            Ok(z)
        };
        zeros = (0..degree).map(polish).collect::<Result<_>>()?;
        ladder.push(Spectrum::new(zeros.clone())?);
    }
    Ok(ladder)
}

/// Ascending zeros of `H_m`; for `Q_N` use `m = N + 1`.
pub fn hermite_zeros_oracle(m: usize) -> Result<Spectrum> {
    let mut ladder = hermite_zero_ladder(m)?;
    Ok(ladder.pop().expect("ladder has m >= 1 entries"))
}

fn polish_zero(degree: usize, index: usize, mut a: f64, mut b: f64) -> Result<f64> {
    let sign_a = scaled_pair(degree, a).0.signum();
    let sign_b = scaled_pair(degree, b).0.signum();
    if sign_a == sign_b || sign_a == 0.0 || sign_b == 0.0 {
        return Err(Error::BracketFailure { degree, index });
    }
    // p_m' = sqrt(2m) p_{m−1}
    let slope = (2.0 * degree as f64).sqrt();
    let limit = tol(names::ZERO_POLISH, degree);

    let mut x = 0.5 * (a + b);
    for _ in 0..100 {
        let (pm, pm1) = scaled_pair(degree, x);
        if pm == 0.0 {
            return Ok(x);
        }
        if pm.signum() == sign_a {
            a = x;
        } else {
            b = x;
        }
        let step = pm / (slope * pm1);
        let scale = x.abs().max(1.0);
        // The correction is at rounding level; stepping would only bounce
        // between neighbouring floats, possibly across a bracket end.
        if step.abs() <= 4.0 * f64::EPSILON * scale {
            return Ok(x);
        }
        let mut candidate = x - step;
        if !(a < candidate && candidate < b) || !candidate.is_finite() {
            candidate = 0.5 * (a + b);
        }
        let moved = (candidate - x).abs();
        x = candidate;
        // A sign change across a few ulps pins the zero to working precision.
        if b - a <= 4.0 * f64::EPSILON * scale {
            return Ok(x);
        }
        if moved <= 4.0 * f64::EPSILON * scale {
            let (pm, pm1) = scaled_pair(degree, x);
            let correction = (pm / (slope * pm1)).abs();
            if correction <= limit * x.abs().max(1.0) {
                return Ok(x);
            }
        }
    }
    Err(Error::NewtonFailure { degree, index })
}

/// Components of an unnormalized eigenvector, `mantissa · 2^exponent`.
#[derive(Debug, Clone, PartialEq)]
pub struct RecursionVector {
    mantissas: Vec<f64>,
    exponents: Vec<i32>,
}

impl RecursionVector {
    pub fn len(&self) -> usize {
        self.mantissas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mantissas.is_empty()
    }

    /// Raw components; entries beyond the double range saturate.
    pub fn unnormalized(&self) -> Vec<f64> {
        self.mantissas
            .iter()
            .zip(&self.exponents)
            .map(|(&m, &e)| ldexp(m, e))
            .collect()
    }

    /// Unit-norm vector with the first component's sign preserved.
    pub fn normalized(&self) -> Vec<f64> {
        let top = *self.exponents.iter().max().unwrap_or(&0);
        let mut v: Vec<f64> = self
            .mantissas
            .iter()
            .zip(&self.exponents)
            .map(|(&m, &e)| ldexp(m, e - top))
            .collect();
        let peak = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        if peak == 0.0 {
            return v;
        }
        v.iter_mut().for_each(|x| *x /= peak);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        v
    }
}

/// Solves `ω_0 ū_1 = λ`, `ω_k ū_{k+1} = λ ū_k − ω_{k−1} ū_{k−1}` from
/// `ū_0 = 1`, giving `ū_k = H_k(λ)/sqrt(2^k k!)`.
pub fn eigvec_recursion(n: usize, lambda: f64) -> RecursionVector {
    let mut mantissas = Vec::with_capacity(n + 1);
    let mut exponents = Vec::with_capacity(n + 1);
    mantissas.push(1.0);
    exponents.push(0);
    if n == 0 {
        return RecursionVector { mantissas, exponents };
    }

    let mut exp = 0i32;
    let mut prev = 1.0;
    let mut cur = lambda / ladder_coefficient(0);
    mantissas.push(cur);
    exponents.push(exp);
    for k in 1..n {
        let mut next = (lambda * cur - ladder_coefficient(k - 1) * prev) / ladder_coefficient(k);
        prev = cur;
        if too_big(next) || too_big(prev) {
            next *= pow2(-RESCALE_BITS);
            prev *= pow2(-RESCALE_BITS);
            exp += RESCALE_BITS;
        }
        cur = next;
        mantissas.push(cur);
        exponents.push(exp);
    }
    RecursionVector { mantissas, exponents }
}

/// Largest disagreement between recursion components and
/// `H_k(λ)/sqrt(2^k k!)`, relative to the local magnitude
/// `max(|p_{k−2}|, |p_{k−1}|, |p_k|)` that bounds the rounding of each step.
pub fn closed_form_defect(components: &[f64], lambda: f64) -> f64 {
    let closed: Vec<f64> = (0..components.len())
        .map(|k| hermite_eval(k, lambda).scaled_value)
        .collect();
    let mut worst = 0.0_f64;
    for (k, (&c, &h)) in components.iter().zip(&closed).enumerate() {
        if !(c.is_finite() && h.is_finite()) {
            continue;
        }
        let local = closed[k.saturating_sub(2)..=k]
            .iter()
            .fold(0.0_f64, |m, x| m.max(x.abs()));
        if local > 0.0 {
            worst = worst.max((c - h).abs() / local);
        }
    }
    worst
}
