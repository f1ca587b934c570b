//! Precision-configurable arithmetic, shifted polynomials, piecewise
//! polynomials, and the closed-form integrals and norms everything else
//! consumes.
//!
//! Polynomials are stored in a monomial basis centered at an explicit shift
//! point `s`, i.e. `q(t) = Σ c_j (t−s)^j`. High-degree pieces (degree `n−1`
//! primitives) have raw monomial coefficients that explode; keeping each piece
//! shifted to the left endpoint of its interval keeps coefficients tame.

use crate::{Error, Result};
use rug::ops::CompleteRound;
use rug::{Complex, Float};

/// Default working precision in bits.
pub const DEFAULT_PREC: u32 = 256;
/// Lowest precision the crate accepts (IEEE double).
pub const MIN_PREC: u32 = 53;
/// Upper bound for automatic precision raising.
pub const MAX_PREC: u32 = 8192;

#[inline]
pub fn rzero(p: u32) -> Float {
    Float::with_val(p, 0)
}

#[inline]
pub fn czero(p: u32) -> Complex {
    Complex::with_val(p, (0, 0))
}

/// Complex value from a real part.
#[inline]
pub fn creal(x: &Float) -> Complex {
    let p = x.prec();
    Complex::with_val(p, (x.clone(), rzero(p)))
}

/// |z| as a Float.
#[inline]
pub fn cabs(z: &Complex) -> Float {
    let p = z.prec().0;
    let mut s = Float::with_val(p, z.real() * z.real());
    s += Float::with_val(p, z.imag() * z.imag());
    s.sqrt()
}

/// Short decimal rendering for diagnostics.
pub fn fmt_short(x: &Float) -> String {
    let s = x.to_string_radix(10, Some(12));
    s
}

pub fn fmt_short_c(z: &Complex) -> String {
    format!("{}+{}i", fmt_short(z.real()), fmt_short(z.imag()))
}

/// Parse a decimal string into a Float at the given precision.
pub fn parse_real(p: u32, s: &str) -> Result<Float> {
    Float::parse(s)
        .map(|inc| inc.complete(p))
        .map_err(|e| Error::InvalidInput(format!("bad real literal {s:?}: {e}")))
}

/// Complex polynomial in the shifted monomial basis `Σ c_j (t−shift)^j`.
#[derive(Debug, Clone)]
pub struct Poly {
    pub shift: Float,
    pub coeffs: Vec<Complex>,
    pub prec: u32,
}

impl Poly {
    pub fn new(shift: Float, coeffs: Vec<Complex>) -> Self {
        let prec = shift.prec();
        let mut p = Poly { shift, coeffs, prec };
        p.trim();
        p
    }

    pub fn zero(p: u32) -> Self {
        Poly { shift: rzero(p), coeffs: Vec::new(), prec: p }
    }

    pub fn constant(p: u32, c: Complex) -> Self {
        Poly::new(rzero(p), vec![c])
    }

    fn trim(&mut self) {
        while let Some(c) = self.coeffs.last() {
            if c.real().is_zero() && c.imag().is_zero() {
                self.coeffs.pop();
            } else {
                break;
            }
        }
    }

    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// True when every coefficient has exactly zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.coeffs.iter().all(|c| c.imag().is_zero())
    }

    pub fn eval_complex(&self, z: &Complex) -> Complex {
        let p = self.prec;
        let u = Complex::with_val(p, z - &creal(&self.shift));
        let mut acc = czero(p);
        for c in self.coeffs.iter().rev() {
            acc *= &u;
            acc += c;
        }
        acc
    }

    pub fn eval_real(&self, t: &Float) -> Complex {
        let p = self.prec;
        let u = Float::with_val(p, t - &self.shift);
        let mut acc = czero(p);
        for c in self.coeffs.iter().rev() {
            acc *= &u;
            acc += c;
        }
        acc
    }

    pub fn derivative(&self) -> Poly {
        let p = self.prec;
        let mut coeffs = Vec::with_capacity(self.coeffs.len().saturating_sub(1));
        for (j, c) in self.coeffs.iter().enumerate().skip(1) {
            let mut d = c.clone();
            d *= Float::with_val(p, j as u32);
            coeffs.push(d);
        }
        Poly::new(self.shift.clone(), coeffs)
    }

    /// Antiderivative vanishing at the shift point.
    pub fn antiderivative(&self) -> Poly {
        let p = self.prec;
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(czero(p));
        for (j, c) in self.coeffs.iter().enumerate() {
            let mut d = c.clone();
            d /= Float::with_val(p, (j + 1) as u32);
            coeffs.push(d);
        }
        Poly::new(self.shift.clone(), coeffs)
    }

    /// Rewrite in the basis centered at `new_shift` (Taylor shift, Horner form).
    pub fn recenter(&self, new_shift: &Float) -> Poly {
        let p = self.prec;
        let d = Float::with_val(p, new_shift - &self.shift);
        let mut coeffs = self.coeffs.clone();
        let n = coeffs.len();
        if n > 1 && !d.is_zero() {
            for i in 0..n - 1 {
                for j in (i..n - 1).rev() {
                    let add = Complex::with_val(p, &coeffs[j + 1] * &d);
                    coeffs[j] += add;
                }
            }
        }
        Poly { shift: new_shift.clone(), coeffs, prec: p }
    }

    pub fn scale(&mut self, c: &Complex) {
        for a in self.coeffs.iter_mut() {
            *a *= c;
        }
        self.trim();
    }

    /// self += other (recentring `other` onto self's shift as needed).
    pub fn add_assign_poly(&mut self, other: &Poly) {
        let o = if other.shift == self.shift {
            other.clone()
        } else {
            other.recenter(&self.shift)
        };
        if o.coeffs.len() > self.coeffs.len() {
            self.coeffs.resize(o.coeffs.len(), czero(self.prec));
        }
        for (a, b) in self.coeffs.iter_mut().zip(o.coeffs.iter()) {
            *a += b;
        }
        self.trim();
    }

    /// Real part as a RealPoly (imaginary parts are simply dropped).
    pub fn real_part(&self) -> RealPoly {
        RealPoly {
            shift: self.shift.clone(),
            coeffs: self.coeffs.iter().map(|c| c.real().clone()).collect(),
            prec: self.prec,
        }
    }

    pub fn imag_part(&self) -> RealPoly {
        RealPoly {
            shift: self.shift.clone(),
            coeffs: self.coeffs.iter().map(|c| c.imag().clone()).collect(),
            prec: self.prec,
        }
    }
}

/// Real polynomial in the shifted monomial basis; used for sign analysis.
#[derive(Debug, Clone)]
pub struct RealPoly {
    pub shift: Float,
    pub coeffs: Vec<Float>,
    pub prec: u32,
}

impl RealPoly {
    pub fn eval(&self, t: &Float) -> Float {
        let p = self.prec;
        let u = Float::with_val(p, t - &self.shift);
        let mut acc = rzero(p);
        for c in self.coeffs.iter().rev() {
            acc *= &u;
            acc += c;
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Crude upper bound for |f| on [lo, hi].
    fn magnitude_on(&self, lo: &Float, hi: &Float) -> Float {
        let p = self.prec;
        let a = Float::with_val(p, lo - &self.shift).abs();
        let b = Float::with_val(p, hi - &self.shift).abs();
        let m = if a > b { a } else { b };
        let mut acc = rzero(p);
        let mut pw = Float::with_val(p, 1);
        for c in &self.coeffs {
            acc += Float::with_val(p, c.abs_ref()) * &pw;
            pw *= &m;
        }
        acc
    }
}

/// A maximal subinterval on which a real piece has constant sign.
#[derive(Debug, Clone)]
pub struct SignSegment {
    pub lo: Float,
    pub hi: Float,
    pub sign: i8,
}

/// Partition [lo, hi] into segments of constant sign of `f`.
///
/// Sign-change scanning on a dyadic subdivision (8·(deg+1) cells) followed by
/// bisection to ~half the working precision. Values with |f| below the
/// precision floor are treated as sign-neutral plateaus: they get their own
/// zero-sign segments, which contribute (numerically) zero measure.
pub fn sign_segments(f: &RealPoly, lo: &Float, hi: &Float) -> Result<Vec<SignSegment>> {
    let p = f.prec;
    if hi <= lo {
        return Ok(Vec::new());
    }
    if f.is_zero() {
        return Ok(vec![SignSegment { lo: lo.clone(), hi: hi.clone(), sign: 0 }]);
    }
    let deg = f.coeffs.len() - 1;
    let cells = 8 * (deg + 1);
    let mut floor = f.magnitude_on(lo, hi);
    floor >>= (3 * p) / 4;
    let width = Float::with_val(p, hi - lo);
    let step = Float::with_val(p, &width / Float::with_val(p, cells as u32));

    let classify = |x: &Float| -> i8 {
        let v = f.eval(x);
        let av = v.clone().abs();
        if av < floor {
            0
        } else if v > 0 {
            1
        } else {
            -1
        }
    };

    let mut xs = Vec::with_capacity(cells + 1);
    let mut ss = Vec::with_capacity(cells + 1);
    for i in 0..=cells {
        let x = if i == cells {
            hi.clone()
        } else {
            Float::with_val(p, lo + Float::with_val(p, &step * Float::with_val(p, i as u32)))
        };
        ss.push(classify(&x));
        xs.push(x);
    }

    // Refine a bracketed sign change [a,b] (s(a)·s(b) = −1) by bisection.
    let refine = |mut a: Float, mut b: Float, sa: i8| -> Float {
        let target = {
            let mut t = width.clone();
            t >>= p / 2 + 8;
            t
        };
        while Float::with_val(p, &b - &a) > target {
            let mid = Float::with_val(p, &a + &b) / 2u32;
            let sm = classify(&mid);
            if sm == 0 {
                // Plateau around a root: close enough for a boundary.
                return mid;
            }
            if sm == sa {
                a = mid;
            } else {
                b = mid;
            }
        }
        Float::with_val(p, &a + &b) / 2u32
    };

    // Walk the grid, cutting at refined crossings and at plateau edges.
    let mut bounds: Vec<Float> = vec![lo.clone()];
    let mut last_sign = ss[0];
    for i in 1..=cells {
        let s = ss[i];
        if s != last_sign {
            if last_sign != 0 && s != 0 {
                bounds.push(refine(xs[i - 1].clone(), xs[i].clone(), last_sign));
            } else {
                // Entering or leaving a plateau: cut at the grid point.
                bounds.push(xs[if s == 0 { i } else { i - 1 }].clone());
            }
            last_sign = s;
        }
    }
    bounds.push(hi.clone());
    bounds.dedup_by(|a, b| a == b);

    let mut segs = Vec::with_capacity(bounds.len());
    for win in bounds.windows(2) {
        let (a, b) = (&win[0], &win[1]);
        if b <= a {
            continue;
        }
        let mid = Float::with_val(p, a + b) / 2u32;
        segs.push(SignSegment { lo: a.clone(), hi: b.clone(), sign: classify(&mid) });
    }
    if segs.is_empty() {
        return Err(Error::RootIsolation(format!(
            "degenerate interval [{}, {}]",
            fmt_short(lo),
            fmt_short(hi)
        )));
    }
    Ok(segs)
}

/// Piecewise polynomial on ℝ: zero before `breaks[0]`, `pieces[i]` on
/// `[breaks[i], breaks[i+1])`, and `tail` on `[breaks.last(), ∞)`.
///
/// A compactly supported function has an (exactly) zero tail.
#[derive(Debug, Clone)]
pub struct PiecewisePoly {
    pub breaks: Vec<Float>,
    pub pieces: Vec<Poly>,
    pub tail: Poly,
    pub prec: u32,
}

impl PiecewisePoly {
    pub fn new(breaks: Vec<Float>, pieces: Vec<Poly>, tail: Poly) -> Result<Self> {
        if breaks.is_empty() && pieces.is_empty() {
            return Ok(PiecewisePoly {
                breaks,
                pieces,
                prec: tail.prec,
                tail,
            });
        }
        if breaks.len() != pieces.len() + 1 {
            return Err(Error::InvalidInput(format!(
                "piecewise: {} breakpoints need {} pieces, got {}",
                breaks.len(),
                breaks.len().saturating_sub(1),
                pieces.len()
            )));
        }
        if breaks.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("piecewise: breakpoints not increasing".into()));
        }
        let prec = breaks.first().map(|b| b.prec()).unwrap_or(DEFAULT_PREC);
        Ok(PiecewisePoly { breaks, pieces, tail, prec })
    }

    pub fn eval(&self, t: &Float) -> Complex {
        let p = self.prec;
        if self.breaks.is_empty() || t < &self.breaks[0] {
            return czero(p);
        }
        // Last breakpoint ≤ t.
        let idx = match self.breaks.binary_search_by(|b| b.partial_cmp(t).unwrap()) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        if idx + 1 == self.breaks.len() {
            self.tail.eval_real(t)
        } else {
            self.pieces[idx].eval_real(t)
        }
    }

    pub fn is_real(&self) -> bool {
        self.pieces.iter().all(|q| q.is_real()) && self.tail.is_real()
    }

    /// ∫ |f| over all of ℝ. Requires compact support (zero tail).
    pub fn l1_norm(&self) -> Result<Float> {
        if !self.tail.is_zero() {
            return Err(Error::NonCompactSupport(format!(
                "tail piece beyond t = {} is nonzero (degree {})",
                fmt_short(self.breaks.last().unwrap()),
                self.tail.degree().unwrap_or(0)
            )));
        }
        if self.breaks.is_empty() {
            return Ok(rzero(self.prec));
        }
        let lo = self.breaks[0].clone();
        let hi = self.breaks.last().unwrap().clone();
        self.l1_on(&lo, &hi, None)
    }

    /// ∫_{lo}^{hi} |f(t)| e^{at} dt (a = None means weight 1).
    ///
    /// Real pieces use exact sign segmentation; complex pieces fall back to
    /// Gauss–Legendre quadrature with interval doubling (diagnostic paths).
    pub fn l1_on(&self, lo: &Float, hi: &Float, a: Option<&Float>) -> Result<Float> {
        let p = self.prec;
        let mut total = rzero(p);
        if self.breaks.is_empty() || hi <= lo {
            return Ok(total);
        }
        let n = self.breaks.len();
        for i in 0..n {
            let seg_lo = if self.breaks[i] > *lo { self.breaks[i].clone() } else { lo.clone() };
            let seg_hi = if i + 1 < n {
                if self.breaks[i + 1] < *hi { self.breaks[i + 1].clone() } else { hi.clone() }
            } else {
                hi.clone()
            };
            if seg_hi <= seg_lo {
                continue;
            }
            let piece = if i + 1 < n { &self.pieces[i] } else { &self.tail };
            total += piece_l1(piece, &seg_lo, &seg_hi, a)?;
        }
        Ok(total)
    }
}

/// ∫ |q| (optionally times e^{at}) over [lo, hi] for one polynomial piece.
fn piece_l1(q: &Poly, lo: &Float, hi: &Float, a: Option<&Float>) -> Result<Float> {
    let p = q.prec;
    if q.is_zero() {
        return Ok(rzero(p));
    }
    if q.is_real() {
        let rp = q.real_part();
        let segs = sign_segments(&rp, lo, hi)?;
        let mut total = rzero(p);
        for s in segs {
            let v = match a {
                None => {
                    let anti = q.antiderivative();
                    let hi_v = anti.eval_real(&s.hi);
                    let lo_v = anti.eval_real(&s.lo);
                    Complex::with_val(p, hi_v - lo_v)
                }
                Some(ax) => poly_exp_integral(q, &creal(ax), &s.lo, &s.hi)?,
            };
            total += cabs(&v);
        }
        Ok(total)
    } else {
        // |q| is smooth away from isolated zeros; split at sign changes of the
        // real and imaginary parts to help the quadrature, then integrate
        // |q(t)| e^{at} by Gauss–Legendre with doubling.
        let mut cuts: Vec<Float> = vec![lo.clone(), hi.clone()];
        for part in [q.real_part(), q.imag_part()] {
            if part.is_zero() {
                continue;
            }
            for s in sign_segments(&part, lo, hi)? {
                cuts.push(s.lo);
                cuts.push(s.hi);
            }
        }
        cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
        cuts.dedup_by(|x, y| x == y);
        let mut total = rzero(p);
        for win in cuts.windows(2) {
            let (x0, x1) = (&win[0], &win[1]);
            if x1 <= x0 {
                continue;
            }
            let f = |t: &Float| -> Float {
                let mut v = cabs(&q.eval_real(t));
                if let Some(ax) = a {
                    v *= Float::with_val(p, ax * t).exp();
                }
                v
            };
            total += gl_integrate_adaptive(p, &f, x0, x1)?;
        }
        Ok(total)
    }
}

/// ∫ |f| for a piecewise polynomial with finite support.
pub fn pw_l1_norm(f: &PiecewisePoly) -> Result<Float> {
    f.l1_norm()
}

/// ∫_{t0}^{t1} q(t) e^{tw} dt, exactly (closed form in both branches).
///
/// Uses the recurrence ∫ v^m e^{vw} dv = v^m e^{vw}/w − (m/w)∫ v^{m−1} e^{vw} dv
/// after recentring q at t0, and a truncated power series when |w|(t1−t0) < 1/4
/// (the recurrence divides by w, the series gains a factor |w|(t1−t0) < 1/4 per
/// term — the threshold keeps both branches far from their bad regimes).
pub fn poly_exp_integral(q: &Poly, w: &Complex, t0: &Float, t1: &Float) -> Result<Complex> {
    let p = q.prec;
    if t1 < t0 {
        return Err(Error::InvalidInput(format!(
            "poly_exp_integral: t0 = {} > t1 = {}",
            fmt_short(t0),
            fmt_short(t1)
        )));
    }
    if t0 == t1 || q.is_zero() {
        return Ok(czero(p));
    }
    let qc = q.recenter(t0);
    let h = Float::with_val(p, t1 - t0);
    let scaled = Float::with_val(p, &h * &cabs(w));
    let small = scaled < 0.25f64;
    let inner = if small {
        pei_series(&qc.coeffs, w, &h, p)
    } else {
        pei_recurrence(&qc.coeffs, w, &h, p)
    }?;
    // Value = e^{t0 w} · ∫_0^h q(t0+v) e^{vw} dv.
    let front = Complex::with_val(p, w * &creal(t0)).exp();
    Ok(Complex::with_val(p, inner * front))
}

/// Series branch: ∫_0^h v^j e^{vw} dv = Σ_k w^k h^{j+k+1} / (k! (j+k+1)).
pub(crate) fn pei_series(coeffs: &[Complex], w: &Complex, h: &Float, p: u32) -> Result<Complex> {
    let kmax = (p as usize) / 2 + coeffs.len() + 16;
    // pows[k] = w^k h^k / k!
    let mut pows: Vec<Complex> = Vec::new();
    let mut cur = Complex::with_val(p, (1, 0));
    let wh = Complex::with_val(p, w * &creal(h));
    let tol = {
        let mut t = Float::with_val(p, 1);
        t >>= p + 16;
        t
    };
    for k in 0..=kmax {
        pows.push(cur.clone());
        if cabs(&cur) < tol && k > 2 {
            break;
        }
        cur *= &wh;
        cur /= Float::with_val(p, (k + 1) as u32);
    }
    let mut acc = czero(p);
    let mut hpow = h.clone(); // h^{j+1}
    for (j, c) in coeffs.iter().enumerate() {
        let mut s = czero(p);
        for (k, pw) in pows.iter().enumerate() {
            let mut term = pw.clone();
            term /= Float::with_val(p, (j + k + 1) as u32);
            s += term;
        }
        s *= &hpow;
        s *= c;
        acc += s;
        hpow *= h;
        let _ = j;
    }
    Ok(acc)
}

/// Recurrence branch with cancellation tracking.
pub(crate) fn pei_recurrence(
    coeffs: &[Complex],
    w: &Complex,
    h: &Float,
    p: u32,
) -> Result<Complex> {
    let wh = Complex::with_val(p, w * &creal(h));
    let ewh = wh.clone().exp();
    let wabs = cabs(w);
    // E_0 = (e^{hw} − 1)/w
    let mut e = Complex::with_val(p, &ewh - &Complex::with_val(p, (1, 0)));
    e /= w;
    let mut acc = czero(p);
    let mut err = {
        // ulp-level starting error for E_0
        let mut u = cabs(&e);
        u >>= p - 4;
        u
    };
    let mut err_total = rzero(p);
    let mut scale = rzero(p);
    let mut hpow = Float::with_val(p, 1); // h^m
    let emax = {
        // max(|e^{hw}|, 1) for magnitude scales
        let m = cabs(&ewh);
        if m > 1 { m } else { Float::with_val(p, 1) }
    };
    for (m, c) in coeffs.iter().enumerate() {
        if m > 0 {
            // E_m = h^m e^{hw}/w − (m/w) E_{m−1}
            hpow *= h;
            let mut lead = Complex::with_val(p, &ewh * &creal(&hpow));
            lead /= w;
            let mut prev = e.clone();
            prev *= Float::with_val(p, m as u32);
            prev /= w;
            e = Complex::with_val(p, lead - prev);
            // error amplification: err_m ≈ (m/|w|)·err_{m−1} + ulp(lead)
            err *= Float::with_val(p, m as u32) / &wabs;
            let mut ulp = Float::with_val(p, &hpow * &emax) / &wabs;
            ulp >>= p - 4;
            err += ulp;
        }
        let ca = cabs(c);
        err_total += Float::with_val(p, &ca * &err);
        scale += Float::with_val(p, &ca * &hpow) * &emax;
        acc += Complex::with_val(p, c * &e);
    }
    let res_mag = cabs(&acc);
    let floor = {
        let mut f = scale;
        f >>= p / 2;
        f
    };
    let denom = if res_mag > floor { res_mag } else { floor };
    let mut ratio = err_total;
    if !denom.is_zero() {
        ratio /= &denom;
    }
    let thresh = Float::with_val(p, 1) >> 24;
    if ratio > thresh {
        let lost = {
            let l = ratio.clone().log2().to_f64();
            (p as f64 + l).max(0.0)
        };
        return Err(Error::PrecisionExhausted(format!(
            "exp-integral recurrence lost ~{lost:.0} of {p} bits (degree {}, |w|h = {})",
            coeffs.len() - 1,
            fmt_short(&Float::with_val(p, &wabs * h)),
        )));
    }
    Ok(acc)
}

/// Gauss–Legendre nodes and weights on (−1, 1).
///
/// Newton iteration on P_n from Chebyshev-like seeds; converges to full
/// precision in O(log p) steps.
pub fn gauss_legendre(p: u32, n: usize) -> (Vec<Float>, Vec<Float>) {
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    let legendre = |x: &Float| -> (Float, Float) {
        // returns (P_n(x), P_n'(x))
        let mut p0 = Float::with_val(p, 1);
        let mut p1 = x.clone();
        if n == 0 {
            return (p0, rzero(p));
        }
        for k in 1..n {
            // (k+1) P_{k+1} = (2k+1) x P_k − k P_{k−1}
            let mut nxt = Float::with_val(p, x * &p1);
            nxt *= Float::with_val(p, (2 * k + 1) as u32);
            nxt -= Float::with_val(p, &p0 * &Float::with_val(p, k as u32));
            nxt /= Float::with_val(p, (k + 1) as u32);
            p0 = p1;
            p1 = nxt;
        }
        // P_n' = n (x P_n − P_{n−1}) / (x² − 1)
        let mut num = Float::with_val(p, x * &p1);
        num -= &p0;
        num *= Float::with_val(p, n as u32);
        let mut den = Float::with_val(p, x * x);
        den -= 1u32;
        (p1, num / den)
    };
    let tol = {
        let mut t = Float::with_val(p, 1);
        t >>= p - 8;
        t
    };
    for i in 0..n {
        // Seed: cos(π (i + 3/4) / (n + 1/2)), good to ~1e−3.
        let seed = {
            let mut th = Float::with_val(p, rug::float::Constant::Pi);
            th *= Float::with_val(p, i as f64 + 0.75);
            th /= Float::with_val(p, n as f64 + 0.5);
            th.cos()
        };
        let mut x = seed;
        for _ in 0..200 {
            let (pv, dv) = legendre(&x);
            let step = pv / dv;
            let sa = step.clone().abs();
            x -= step;
            if sa < tol {
                break;
            }
        }
        let (_, dv) = legendre(&x);
        let mut wgt = Float::with_val(p, &x * &x);
        wgt = Float::with_val(p, 1) - wgt;
        wgt *= Float::with_val(p, &dv * &dv);
        let w = Float::with_val(p, 2) / wgt;
        nodes.push(x);
        weights.push(w);
    }
    (nodes, weights)
}

/// ∫_{lo}^{hi} f via n-point Gauss–Legendre.
pub fn gl_integrate(
    p: u32,
    f: &dyn Fn(&Float) -> Float,
    lo: &Float,
    hi: &Float,
    n: usize,
) -> Float {
    let (nodes, weights) = gauss_legendre(p, n);
    let mid = Float::with_val(p, lo + hi) / 2u32;
    let half = Float::with_val(p, hi - lo) / 2u32;
    let mut acc = rzero(p);
    for (x, w) in nodes.iter().zip(weights.iter()) {
        let t = Float::with_val(p, &mid + &Float::with_val(p, x * &half));
        acc += Float::with_val(p, w * &f(&t));
    }
    acc * half
}

/// Doubling Gauss–Legendre until two successive sizes agree to ~2^{-p/3}
/// relative. Diagnostic-quality integration for smooth positive integrands.
pub fn gl_integrate_adaptive(
    p: u32,
    f: &dyn Fn(&Float) -> Float,
    lo: &Float,
    hi: &Float,
) -> Result<Float> {
    let mut n = 32;
    let mut prev = gl_integrate(p, f, lo, hi, n);
    loop {
        n *= 2;
        let next = gl_integrate(p, f, lo, hi, n);
        let diff = Float::with_val(p, &next - &prev).abs();
        let scale = {
            let a = next.clone().abs();
            let mut s = Float::with_val(p, 1);
            s >>= p / 3;
            a * s
        };
        if diff <= scale || n >= 1024 {
            return Ok(next);
        }
        prev = next;
    }
}
