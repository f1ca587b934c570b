//! Stable evaluation of Vandermonde packages `⟨Δ_R, e^{tw}⟩`.
//!
//! A package is the normalized Vandermonde distribution of a short block of
//! frequencies paired against the exponential. Written out it is an
//! alternating sum of exponentials divided by node gaps, which cancels
//! catastrophically when the nodes cluster — the whole point of summing a
//! series by packages is that this cancellation is *bounded*: for `Re w < 0`
//! the value never exceeds `√2 |w|^n e^{β_min Re w}`. This module evaluates
//! packages by two independent routes (the explicit product-coefficient
//! formula under raised precision, and a cancellation-free moment series),
//! provides the a-priori bound, and exposes the hyperfunction view
//! `h(p) = Σ r! a / (p−β)^{r+1}` whose contour integrals reproduce pairings.

use crate::distributions::{complete_homogeneous, DiscreteDistribution, VandermondeNodes};
use crate::numerics::{czero, MAX_PREC};
use crate::{Error, Result};
use rug::float::Constant;
use rug::ops::{CompleteRound, Pow};
use rug::{Complex, Float};

/// How to evaluate a package.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PackageMethod {
    /// Explicit coefficients `n!/Π(β_i−β_p)` summed against `e^{β_i w}`,
    /// at a working precision raised to absorb the predicted cancellation.
    Product,
    /// Moment series `n! Σ_{k≥n} (w^k/k!) h_{k−n}` over the nodes shifted to
    /// start at zero; the `h_m` are nonnegative, so the coefficients carry
    /// no cancellation.
    Series,
    /// The product formula at 53 bits: a benchmark foil that exhibits the
    /// digit loss the raised-precision routes avoid.
    NaiveDouble,
}

/// One term `b·⟨Δ_R, e^{tw}⟩` of a series decomposed into packages.
#[derive(Clone, Debug)]
pub struct PackageTerm {
    pub nodes: VandermondeNodes,
    pub b: Complex,
}

impl PackageTerm {
    /// `n`: one less than the number of nodes.
    pub fn n(&self) -> usize {
        self.nodes.n()
    }

    pub fn beta_min(&self) -> &Float {
        self.nodes.min()
    }

    /// `b · ⟨Δ_R, e^{tw}⟩`.
    pub fn eval(&self, w: &Complex, method: PackageMethod) -> Result<Complex> {
        Ok(self.b.clone() * eval_package(&self.nodes, w, method)?)
    }

    /// `|b| · √2 |w|^n e^{β_min Re w}`, valid for `Re w < 0`.
    pub fn bound(&self, w: &Complex) -> Result<Float> {
        let babs = self.b.clone().abs().into_real_imag().0;
        Ok(babs * package_bound(&self.nodes, w)?)
    }
}

const LOG2_E: f64 = std::f64::consts::LOG2_E;

/// Extra working bits that make the product formula safe: the headroom
/// between its largest term and the size of the final value.
fn product_guard_bits(r: &VandermondeNodes, w: &Complex) -> u32 {
    let n = r.n();
    let re_w = w.real().to_f64();
    let abs_w = w.clone().abs().into_real_imag().0.to_f64();
    let mut ln_fact = 0.0f64;
    for i in 2..=n {
        ln_fact += (i as f64).ln();
    }
    let mut max_term = f64::NEG_INFINITY;
    for (i, bi) in r.nodes.iter().enumerate() {
        let bif = bi.to_f64();
        let mut lg = (ln_fact + bif * re_w) * LOG2_E;
        for (p, bp) in r.nodes.iter().enumerate() {
            if p != i {
                lg -= (bif - bp.to_f64()).abs().max(f64::MIN_POSITIVE).log2();
            }
        }
        max_term = max_term.max(lg);
    }
    // The value itself is about |w|^n times the larger of the two extreme
    // exponentials (for Re w < 0 that is the one at β_min).
    let value = (n as f64) * abs_w.max(f64::MIN_POSITIVE).log2()
        + (r.min().to_f64() * re_w).max(r.max().to_f64() * re_w) * LOG2_E;
    let gap = (max_term - value).max(0.0).min(65536.0);
    gap as u32 + 40
}

fn product_at(r: &VandermondeNodes, w: &Complex, wp: u32) -> Complex {
    let n = r.n();
    let nfact = Float::with_val(wp, Float::factorial(n as u32));
    let w_hi = Complex::with_val(wp, w);
    let mut sum = czero(wp);
    for (i, bi) in r.nodes.iter().enumerate() {
        let bi_w = Float::with_val(wp, bi);
        let mut denom = Float::with_val(wp, 1);
        for (p, bp) in r.nodes.iter().enumerate() {
            if p != i {
                denom *= &bi_w - Float::with_val(wp, bp);
            }
        }
        let e = (&bi_w * &w_hi).complete((wp, wp)).exp();
        sum += e * &nfact / denom;
    }
    sum
}

/// `⟨Δ_R, e^{tw}⟩` for the normalized Vandermonde distribution on `R`.
///
/// At `w = 0` this is exactly `0` for `n ≥ 1` (the zeroth moment vanishes)
/// and `1` for a single node, and is returned as such. The series method
/// truncates once its superexponentially decaying term bound drops below the
/// target precision; if that takes more than 100 000 terms the call reports
/// non-convergence instead of looping.
pub fn eval_package(r: &VandermondeNodes, w: &Complex, method: PackageMethod) -> Result<Complex> {
    let prec = r.prec;
    let n = r.n();
    if w.is_zero() {
        let v = if n == 0 { 1 } else { 0 };
        return Ok(Complex::with_val(prec, (v, 0)));
    }
    match method {
        PackageMethod::Product => {
            let wp = (prec + product_guard_bits(r, w)).min(MAX_PREC);
            Ok(Complex::with_val(prec, &product_at(r, w, wp)))
        }
        PackageMethod::NaiveDouble => Ok(Complex::with_val(prec, &product_at(r, w, 53))),
        PackageMethod::Series => {
            let abs_w = w.clone().abs().into_real_imag().0.to_f64();
            let re_w = w.real().to_f64();
            let diam = r.diameter().to_f64();
            let wd = abs_w * diam;
            // Terms beyond k = n + m are bounded by
            // |w|^n (|w|·diam)^m / m!; stop once that (with an e^{|w|·diam}
            // tail factor) is 2^{-(prec+16)} relative to the value scale
            // |w|^n e^{min(0, diam·Re w)}.
            let target = -((prec + 16) as f64) * std::f64::consts::LN_2 + (diam * re_w).min(0.0);
            let mut extra = 0usize;
            let mut ln_fact = 0.0f64;
            if wd > 0.0 {
                let ln_wd = wd.ln();
                while (extra as f64) * ln_wd - ln_fact + wd > target {
                    extra += 1;
                    if extra > 100_000 {
                        return Err(Error::NoConvergence(format!(
                            "moment series for |w|·diam = {wd:.3} needs more than 100000 terms"
                        )));
                    }
                    ln_fact += (extra as f64).ln();
                }
            }
            // Phase cancellation across the k-sum is at most
            // e^{|w|·diam} / e^{min(0, diam·Re w)}.
            let guard = ((wd + (-(diam * re_w)).max(0.0)) * LOG2_E).ceil() as u32 + 32;
            let wp = (prec + guard).min(MAX_PREC);
            let shifted: Vec<Float> = r
                .nodes
                .iter()
                .map(|b| (b - r.min()).complete(wp))
                .collect();
            let h = complete_homogeneous(&shifted, extra, wp);
            let w_hi = Complex::with_val(wp, w);
            let mut term_pow = w_hi.clone().pow(n as u32);
            term_pow /= Float::with_val(wp, Float::factorial(n as u32));
            let mut sum = czero(wp);
            for (m, hm) in h.iter().enumerate() {
                debug_assert!(!hm.is_sign_negative() || hm.is_zero());
                sum += term_pow.clone() * hm;
                term_pow *= &w_hi;
                term_pow /= Float::with_val(wp, (n + m + 1) as u64);
            }
            sum *= Float::with_val(wp, Float::factorial(n as u32));
            let e0 = (r.min() * &w_hi).complete((wp, wp)).exp();
            sum *= e0;
            Ok(Complex::with_val(prec, &sum))
        }
    }
}

/// `√2 |w|^n e^{β_min Re w}`: an a-priori bound on `|⟨Δ_R, e^{tw}⟩|`,
/// valid for `Re w < 0`.
pub fn package_bound(r: &VandermondeNodes, w: &Complex) -> Result<Float> {
    let prec = r.prec;
    if !w.real().is_sign_negative() || w.real().is_zero() {
        return Err(Error::InvalidInput(format!(
            "package bound needs Re w < 0, got Re w = {}",
            w.real()
        )));
    }
    let abs_w = w.clone().abs().into_real_imag().0;
    let mut out = Float::with_val(prec, 2).sqrt();
    out *= abs_w.pow(r.n() as u32);
    out *= (r.min() * w.real()).complete(prec).exp();
    Ok(out)
}

/// The hyperfunction `h(p) = Σ r! a / (p−β)^{r+1}` of a discrete
/// distribution, the rational function whose contour integrals against
/// analytic `φ` reproduce `⟨D, φ⟩`. Errors when `p` hits a pole.
pub fn hyperfunction_eval(d: &DiscreteDistribution, p: &Complex) -> Result<Complex> {
    let prec = d.prec;
    let mut s = czero(prec);
    for at in &d.atoms {
        let dp = (p - &at.beta).complete((prec, prec));
        if dp.is_zero() {
            return Err(Error::InvalidInput(format!(
                "pole: evaluation point {p} lies on the support"
            )));
        }
        let fact = Float::with_val(prec, Float::factorial(at.r as u32));
        s += at.a.clone() * fact / dp.pow((at.r + 1) as u32);
    }
    Ok(s)
}

/// `⟨D, φ⟩ = (1/2iπ) ∮ h(p) φ(p) dp` by trapezoidal quadrature over the
/// circle of the given center and radius, which must strictly enclose the
/// support. For analytic `φ` the node-count convergence is geometric.
pub fn contour_pairing<F>(
    d: &DiscreteDistribution,
    phi: F,
    center: &Float,
    radius: &Float,
    nodes: usize,
) -> Result<Complex>
where
    F: Fn(&Complex) -> Complex,
{
    let prec = d.prec;
    if !(radius.is_sign_positive() && !radius.is_zero()) {
        return Err(Error::InvalidInput("contour radius must be positive".into()));
    }
    if nodes == 0 {
        return Err(Error::InvalidInput("contour needs at least one node".into()));
    }
    for b in d.support() {
        let dist = (&b - center).complete(prec).abs();
        if dist >= *radius {
            return Err(Error::InvalidInput(format!(
                "contour of radius {radius} around {center} does not enclose support point {b}"
            )));
        }
    }
    let two_pi = Float::with_val(prec, Constant::Pi) * 2i32;
    let mut s = czero(prec);
    for j in 0..nodes {
        let mut theta = two_pi.clone();
        theta *= j as u32;
        theta /= nodes as u32;
        let (sin, cos) = theta.sin_cos(Float::new(prec));
        let dir = Complex::with_val(prec, (cos, sin));
        let mut p = dir.clone();
        p *= radius;
        p += center;
        s += hyperfunction_eval(d, &p)? * phi(&p) * dir;
    }
    s *= radius;
    s /= nodes as u32;
    Ok(s)
}
