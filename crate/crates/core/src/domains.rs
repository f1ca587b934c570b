//! Geometry of the regions where summed series converge: logarithmic
//! neighborhoods of −∞ and quadratic domains.
//!
//! A logarithmic neighborhood `H_{a,k} = {x+iy : x + (k/2)·log(x²+y²) < a}`
//! is the natural habitat of a series summed with rate parameter `k`: the
//! key inequality `|w^p e^{βw}| ≤ e^{aβ}` (for `w ∈ H_{a,k}`, `|w| ≥ 1`,
//! `p ≤ kβ`) converts polynomial growth in `w` into exponential decay in
//! `β`. Quadratic domains `Ω_C = Φ_C({Re < a})` with
//! `Φ_C(w) = w − C√(1+w²)` are the classical alternative; they contain a
//! straight half-plane and are handled by inverting `Φ_C` numerically.

use crate::{Error, Result};
use rug::ops::CompleteRound;
use rug::{Complex, Float};

/// The logarithmic neighborhood `H_{a,k}`, membership strict.
#[derive(Clone, Debug)]
pub struct LogDomain {
    pub a: Float,
    pub k: Float,
    pub prec: u32,
}

impl LogDomain {
    pub fn new(a: Float, k: Float, prec: u32) -> Result<Self> {
        if !(k.is_sign_positive() && !k.is_zero()) {
            return Err(Error::InvalidInput(format!(
                "logarithmic domain needs k > 0, got {k}"
            )));
        }
        Ok(LogDomain { a, k, prec })
    }

    /// `x + (k/2)·log(x²+y²)`: membership holds when this is `< a`.
    pub fn level(&self, x: &Float, y: &Float) -> Float {
        let prec = self.prec;
        let abs2 = Float::with_val(prec, x).square() + Float::with_val(prec, y).square();
        Float::with_val(prec, x) + abs2.ln() * &self.k / 2u32
    }
}

/// Strict membership `w ∈ H_{a,k}`; `w = 0` hits the log singularity.
pub fn log_contains(h: &LogDomain, w: &Complex) -> Result<bool> {
    if w.is_zero() {
        return Err(Error::InvalidInput(
            "membership of w = 0 is undefined (log singularity)".into(),
        ));
    }
    Ok(h.level(w.real(), w.imag()) < h.a)
}

/// Checks the decay inequality `|w^p e^{βw}| ≤ e^{aβ}`, which holds whenever
/// `w ∈ H_{a,k}`, `|w| ≥ 1`, `β > 0` and `p ≤ kβ`. Any violated hypothesis
/// is an error, so a `false` return would expose an arithmetic bug; the
/// comparison is done on logarithms.
pub fn cle_check(w: &Complex, a: &Float, k: &Float, beta: &Float, p: u32) -> Result<bool> {
    let prec = w.prec().0.max(w.prec().1);
    if !(beta.is_sign_positive() && !beta.is_zero()) {
        return Err(Error::InvalidInput(format!("needs β > 0, got {beta}")));
    }
    let kb = (k * beta).complete(prec);
    if Float::with_val(prec, p) > kb {
        return Err(Error::InvalidInput(format!(
            "power p = {p} exceeds k·β = {kb}"
        )));
    }
    let abs_w = w.clone().abs().into_real_imag().0;
    if abs_w < 1u32 {
        return Err(Error::InvalidInput(format!(
            "the decay inequality needs |w| ≥ 1, got |w| = {abs_w}"
        )));
    }
    let h = LogDomain::new(Float::with_val(prec, a), Float::with_val(prec, k), prec)?;
    if !log_contains(&h, w)? {
        return Err(Error::InvalidInput(format!(
            "w = {w} lies outside H_{{a={a}, k={k}}}"
        )));
    }
    let ln_abs = abs_w.ln();
    let lhs = ln_abs * p + (w.real() * beta).complete(prec);
    let rhs = (a * beta).complete(prec);
    Ok(lhs <= rhs)
}

/// The frontier abscissa of the `−∞`-component of `H_{a,k}` at height `y`:
/// the level function is increasing in `x` except for a hump between its
/// two critical points `(−k ± √(k²−4y²))/2` (present only for `|y| < k/2`),
/// so the component's boundary is the leftmost level crossing when the hump
/// pokes above `a` and the unique rightmost crossing otherwise.
fn log_boundary_x(h: &LogDomain, y: &Float) -> Float {
    let prec = h.prec;
    let a = &h.a;
    let half_k = (&h.k / 2u32).complete(prec);
    let disc = half_k.clone().square() - y.clone().square();
    let mut step = Float::with_val(prec, 1);
    let (mut lo, mut hi);
    if disc.is_sign_positive() && !disc.is_zero() {
        let root = disc.sqrt();
        let x_left = (-half_k.clone()) - &root;
        let x_right = -half_k + root;
        if h.level(&x_left, y) > *a {
            hi = x_left;
            lo = hi.clone() - 1u32;
            while h.level(&lo, y) >= *a {
                lo -= &step;
                step *= 2u32;
            }
        } else {
            lo = x_right;
            hi = lo.clone() + 1u32;
            while h.level(&hi, y) <= *a {
                hi += &step;
                step *= 2u32;
            }
        }
    } else {
        lo = a.clone();
        hi = a.clone() + 1u32;
        while h.level(&lo, y) >= *a {
            lo -= &step;
            step *= 2u32;
        }
        step = Float::with_val(prec, 1);
        while h.level(&hi, y) <= *a {
            hi += &step;
            step *= 2u32;
        }
    }
    for _ in 0..(prec + 16) {
        let mid = (&lo + &hi).complete(prec) / 2u32;
        if h.level(&mid, y) < *a {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Boundary points `x(y) + iy` of `H_{a,k}` for `count ≥ 2` evenly spaced
/// heights in `[y_lo, y_hi]`.
pub fn log_boundary_samples(
    h: &LogDomain,
    y_lo: &Float,
    y_hi: &Float,
    count: usize,
) -> Result<Vec<Complex>> {
    if count < 2 {
        return Err(Error::InvalidInput("need at least two samples".into()));
    }
    let prec = h.prec;
    let span = (y_hi - y_lo).complete(prec);
    let mut out = Vec::with_capacity(count);
    for j in 0..count {
        let y = y_lo.clone() + span.clone() * j as u32 / (count - 1) as u32;
        let x = log_boundary_x(h, &y);
        out.push(Complex::with_val(prec, (x, y)));
    }
    Ok(out)
}

/// The quadratic domain `Ω_C = Φ_C({Re < a})`, `Φ_C(w) = w − C√(1+w²)`.
#[derive(Clone, Debug)]
pub struct QuadDomain {
    pub c: Float,
    pub a: Float,
    pub prec: u32,
}

impl QuadDomain {
    pub fn new(c: Float, a: Float, prec: u32) -> Result<Self> {
        if !(c.is_sign_positive() && !c.is_zero()) {
            return Err(Error::InvalidInput(format!(
                "quadratic domain needs C > 0, got {c}"
            )));
        }
        if a.is_sign_positive() && !a.is_zero() {
            return Err(Error::InvalidInput(format!(
                "quadratic domain needs a ≤ 0, got {a}"
            )));
        }
        Ok(QuadDomain { c, a, prec })
    }
}

/// `Φ_C(w) = w − C√(1+w²)` with the principal square root
/// (`Re √ ≥ 0`; for `Re w < 0` this makes `√(1+w²) ~ −w` at infinity).
pub fn quad_map(c: &Float, w: &Complex) -> Complex {
    let prec = w.prec().0.max(w.prec().1);
    let s = (Complex::with_val(prec, (1, 0)) + w.clone().square()).sqrt();
    w.clone() - s * c
}

/// Membership `w ∈ Ω_C`: some preimage of `w` under `Φ_C` lies left of `a`.
///
/// Since `Re √(1+z²) ≥ 0`, the image satisfies `Re Φ_C(z) ≤ Re z`, so
/// `Re w ≥ a` short-circuits to `false`. Otherwise a Newton iteration from
/// `z₀ = w/(1+C)` inverts the map; because `Φ_C` need not be injective
/// (for `C > 1` two preimages can coexist), a stalled iteration or a
/// preimage right of `a` falls back to the roots of the rationalized
/// quadratic `(1−C²)z² − 2wz + (w²−C²) = 0`, each accepted only when the
/// forward map reproduces `w`. No valid root means `w` lies outside the
/// principal image: `false`. A near-miss with no valid root at all is
/// reported as indeterminate rather than guessed.
pub fn quad_contains(q: &QuadDomain, w: &Complex) -> Result<bool> {
    let prec = q.prec;
    let w = Complex::with_val(prec, w);
    if *w.real() >= q.a {
        return Ok(false);
    }
    let scale = Float::with_val(prec, 1) + w.clone().abs().into_real_imag().0;
    let mut tol = scale.clone();
    tol >>= prec.saturating_sub(16).max(8);
    let mut escape = scale.clone();
    escape <<= 64;

    let mut z = w.clone() / (Float::with_val(prec, 1) + &q.c);
    for _ in 0..200 {
        let s = (Complex::with_val(prec, (1, 0)) + z.clone().square()).sqrt();
        let fval = z.clone() - s.clone() * &q.c - &w;
        if fval.clone().abs().into_real_imag().0 < tol {
            if *z.real() < q.a {
                return Ok(true);
            }
            break;
        }
        if s.is_zero() {
            break;
        }
        let fprime = Complex::with_val(prec, (1, 0)) - z.clone() * &q.c / &s;
        if fprime.is_zero() {
            break;
        }
        z -= fval / fprime;
        if z.clone().abs().into_real_imag().0 > escape {
            break;
        }
    }

    let mut candidates: Vec<Complex> = Vec::new();
    let c2 = q.c.clone().square();
    let lead = Float::with_val(prec, 1) - &c2;
    if !lead.is_zero() {
        let disc = (Complex::with_val(prec, (1, 0)) + w.clone().square() - &c2) * &c2;
        let root = disc.sqrt();
        candidates.push((w.clone() + &root) / &lead);
        candidates.push((w.clone() - &root) / &lead);
    } else if !w.is_zero() {
        let num = w.clone().square() - Float::with_val(prec, 1);
        candidates.push(num / (w.clone() * 2u32));
    }
    let mut best_miss = escape;
    let mut any_valid = false;
    for cand in candidates {
        let residual = (quad_map(&q.c, &cand) - &w)
            .abs()
            .into_real_imag()
            .0;
        if residual < tol {
            any_valid = true;
            if *cand.real() < q.a {
                return Ok(true);
            }
        } else if residual < best_miss {
            best_miss = residual;
        }
    }
    if any_valid {
        return Ok(false);
    }
    let mut near = scale;
    near >>= prec / 4;
    if best_miss < near {
        return Err(Error::Indeterminate(format!(
            "inverting Φ_C at w = {w} left residual {best_miss}"
        )));
    }
    Ok(false)
}

/// Boundary points `Φ_C(a + iy)` for `count ≥ 2` evenly spaced heights in
/// `[y_lo, y_hi]`.
pub fn quad_boundary_samples(
    q: &QuadDomain,
    y_lo: &Float,
    y_hi: &Float,
    count: usize,
) -> Result<Vec<Complex>> {
    if count < 2 {
        return Err(Error::InvalidInput("need at least two samples".into()));
    }
    let prec = q.prec;
    let span = (y_hi - y_lo).complete(prec);
    let mut out = Vec::with_capacity(count);
    for j in 0..count {
        let y = y_lo.clone() + span.clone() * j as u32 / (count - 1) as u32;
        let w = Complex::with_val(prec, (&q.a, &y));
        out.push(quad_map(&q.c, &w));
    }
    Ok(out)
}
