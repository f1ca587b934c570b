//! Summation by Vandermonde packages: the pipeline from a truncated series
//! to an explicit decomposition `g(w) ≍ Σ b·⟨Δ_R, e^{tw}⟩` carrying its
//! certificate constants `(r, c, k′)`, plus evaluation of a decomposition,
//! a cross-method comparison harness, and a `w ↦ w + 2πi` periodicity check
//! for integer-supported series.
//!
//! The pipeline cuts the series along an admissible sequence, expands each
//! window distribution `D_n` over the nested Vandermonde basis of its own
//! support chain (border atoms counted with multiplicity `order + 1`), and
//! only then replaces each repeated chain point by an ε-cluster of simple
//! nodes. Coefficients are therefore exact pairings against the confluent
//! chain; the ε only enters the emitted node sets, where it is harmless to
//! the moment-series evaluator and keeps every node set an honest finite
//! set of distinct points.

use crate::dipp::{dipp_sum, window_distributions, DippState, SeriesSpec};
use crate::distributions::{
    nested_coefficients_confluent_scaled, DiscreteDistribution, VandermondeNodes,
};
use crate::exponents::{admissible_sequence, density_params};
use crate::numerics::{czero, rzero};
use crate::packages::{PackageMethod, PackageTerm};
use crate::{Error, Result};
use rug::float::Constant;
use rug::ops::{CompleteRound, Pow};
use rug::{Complex, Float};

/// A truncated package decomposition together with its certificate.
///
/// The terms come in emission order: windows increasing, and inside window
/// `n` the nested index `p` increasing (`p ≥ n`; the term `(n, p)` holds the
/// first `p + 1` points of the window chain). The certificate records the
/// weight radius `r`, the measured growth constant `c` with its a-priori
/// counterpart, and the slope `k′ = μ + 2k` against which `c` was fitted.
#[derive(Clone, Debug)]
pub struct PackageDecomposition {
    pub terms: Vec<PackageTerm>,
    /// `(window n, nested index p)` for each term, aligned with `terms`.
    pub provenance: Vec<(usize, usize)>,
    /// Weight radius `r = e^{a−1}`, clipped to `1/2` when `a ≥ 1`.
    pub r: Float,
    /// Measured `max(N − k′·β_min)` over the emitted terms.
    pub c: Float,
    /// The a-priori bound `3.5(μ/k + 2) + ν` for the same constant.
    pub c_apriori: Float,
    /// Certificate slope `k′ = μ + 2k`.
    pub k_prime: Float,
    /// Fitted linear-density parameters of the support.
    pub mu: Float,
    pub nu: Float,
    /// Effective slope after the `k ≥ 1` clamp.
    pub k: Float,
    /// The boundedness weight the certificate is phrased against.
    pub a: Float,
    /// Cluster radius used to realize repeated chain points.
    pub eps_degen: Float,
    pub k_clamped: bool,
    pub r_clipped: bool,
    /// Running partial sums of `Σ |b| r^{β_min}` in emission order.
    pub tail_report: Vec<Float>,
    /// Truncation point `t_{n_max+1}` of the underlying window decomposition.
    pub truncated_at: Float,
    pub prec: u32,
}

impl PackageDecomposition {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// The support chain of one window: each distinct atom position, with the
/// multiplicity needed to cover its highest derivative order.
fn window_chain(d: &DiscreteDistribution) -> Vec<(Float, usize)> {
    let mut out: Vec<(Float, usize)> = Vec::new();
    for at in &d.atoms {
        match out.last_mut() {
            Some((beta, m)) if *beta == at.beta => {
                if at.r + 1 > *m {
                    *m = at.r + 1;
                }
            }
            _ => out.push((at.beta.clone(), at.r + 1)),
        }
    }
    out
}

/// Realizes a multiplicity-`m` chain point as `m` simple nodes spread over
/// `[β, β+ε]`, with the same offset layout as `undegenerate` so that equal
/// clusters from adjacent windows land on identical floats.
fn realize_cluster(beta: &Float, m: usize, eps: &Float, prec: u32) -> Vec<Float> {
    if m == 1 {
        return vec![beta.clone()];
    }
    let wide = prec + 8;
    (0..m)
        .map(|j| {
            let off = Float::with_val(wide, eps) * j as u32 / (m as u32 - 1);
            Float::with_val(prec, off + Float::with_val(wide, beta))
        })
        .collect()
}

/// Smallest positive gap among the support points within the truncation and
/// the positive cut points; `None` when fewer than two such points exist.
fn min_point_gap(state: &DippState, prec: u32) -> Option<Float> {
    let mut pts: Vec<Float> = Vec::new();
    let t_top = state.windows.last().map(|w| w.t_hi.clone());
    for v in state.series.support.values() {
        if let Some(top) = &t_top {
            if v > top {
                break;
            }
        }
        pts.push(v.clone());
    }
    for win in &state.windows {
        if !win.t_hi.is_zero() {
            pts.push(win.t_hi.clone());
        }
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    let mut gap: Option<Float> = None;
    for pair in pts.windows(2) {
        let g = (&pair[1] - &pair[0]).complete(prec);
        if gap.as_ref().map_or(true, |cur| g < *cur) {
            gap = Some(g);
        }
    }
    gap
}

/// Decomposes a truncated series into Vandermonde packages with certificate
/// constants: windows along the admissible sequence for (the clamped) `k`,
/// nested coefficients over each window chain, ε-clusters for the repeated
/// border points, `k′ = μ + 2k` from the fitted linear density, `c` the
/// measured maximum of `N − k′·β_min`, and `r = e^{a−1}`.
///
/// `eps_degen` defaults to a quarter of the minimal gap among support and
/// cut points; an explicit value must stay below half that gap and below a
/// half window. Windows whose distribution vanishes are skipped; nested
/// coefficients below a window's order must vanish at scale, otherwise the
/// upstream window construction lost precision and the decomposition is
/// refused.
pub fn summate_by_packages(
    series: &SeriesSpec,
    a: &Float,
    k: &Float,
    eps_degen: Option<&Float>,
    n_max: usize,
) -> Result<PackageDecomposition> {
    let prec = series.prec;
    if !a.is_finite() {
        return Err(Error::InvalidInput(format!("weight must be finite, got a = {a}")));
    }
    if !(k.is_finite() && k.is_sign_positive() && !k.is_zero()) {
        return Err(Error::InvalidInput(format!("slope must be positive, got k = {k}")));
    }
    let one = Float::with_val(prec, 1);
    let k_clamped = *k < 1;
    let k_eff = if k_clamped { one.clone() } else { Float::with_val(prec, k) };

    // Weight radius r = e^{a−1}, clipped into (0,1) when a ≥ 1.
    let r_clipped = *a >= 1;
    let r = if r_clipped {
        Float::with_val(prec, 0.5)
    } else {
        (a - &one).complete(prec).exp()
    };

    let mut dec = PackageDecomposition {
        terms: Vec::new(),
        provenance: Vec::new(),
        r,
        c: rzero(prec),
        c_apriori: Float::with_val(prec, 7),
        k_prime: Float::with_val(prec, 2) * &k_eff,
        mu: rzero(prec),
        nu: rzero(prec),
        k: k_eff.clone(),
        a: Float::with_val(prec, a),
        eps_degen: rzero(prec),
        k_clamped,
        r_clipped,
        tail_report: Vec::new(),
        truncated_at: rzero(prec),
        prec,
    };
    if series.is_empty() {
        if let Some(eps) = eps_degen {
            dec.eps_degen = Float::with_val(prec, eps);
        }
        return Ok(dec);
    }

    let width = one.clone() / &k_eff;
    let dens = density_params(&series.support, &width)?;
    let seq = admissible_sequence(&k_eff, &series.support)?;
    let state = window_distributions(series, &seq, n_max)?;
    dec.truncated_at = seq.t(n_max + 1);
    dec.mu = Float::with_val(prec, &dens.mu);
    dec.nu = Float::with_val(prec, &dens.nu);
    dec.k_prime = Float::with_val(prec, &dens.mu) + Float::with_val(prec, 2) * &k_eff;
    // 3.5(μ/k + 2) + ν
    dec.c_apriori = Float::with_val(prec, 3.5) * ((&dens.mu / &k_eff).complete(prec) + 2u32)
        + &dens.nu;

    // Cluster radius: validated against half the minimal point gap and half
    // a window, defaulted to a quarter of the former.
    let gap = min_point_gap(&state, prec);
    let eps = match eps_degen {
        Some(e) => {
            if !(e.is_finite() && e.is_sign_positive() && !e.is_zero()) {
                return Err(Error::InvalidInput(format!("eps must be positive, got {e}")));
            }
            if let Some(g) = &gap {
                if Float::with_val(prec, 2) * e >= *g {
                    return Err(Error::EpsTooLarge(format!(
                        "eps = {e} not below half the minimal point gap {g}"
                    )));
                }
            }
            if Float::with_val(prec, 2) * e >= width {
                return Err(Error::EpsTooLarge(format!(
                    "eps = {e} not below half the window width {width}"
                )));
            }
            Float::with_val(prec, e)
        }
        None => {
            let mut g = gap.unwrap_or_else(|| width.clone());
            if g > width {
                g = width.clone();
            }
            g >> 2
        }
    };
    dec.eps_degen = eps.clone();

    // Order-deficiency tolerance: coefficients below a window's order are
    // formal zeros, so they may only be as large as the roundoff left over
    // from cancelling the summands that produced them.
    let mut zero_tol = Float::with_val(prec, 1);
    zero_tol >>= prec / 2;

    let mut c_max: Option<Float> = None;
    let mut tail = rzero(prec + 16);
    for win in &state.windows {
        let d = &win.d;
        if d.is_zero() {
            continue;
        }
        let n = win.n;
        let chain = window_chain(d);
        let mut chain_flat: Vec<Float> = Vec::new();
        let mut realized: Vec<Float> = Vec::new();
        for (beta, m) in &chain {
            for _ in 0..*m {
                chain_flat.push(beta.clone());
            }
            realized.extend(realize_cluster(beta, *m, &eps, prec));
        }
        let (b, summand_scale) = nested_coefficients_confluent_scaled(d, &chain_flat)?;
        for (p, bp) in b.iter().enumerate().take(n.min(b.len())) {
            let scale = &summand_scale[p];
            let mag = bp.clone().abs().into_real_imag().0;
            if mag > (&zero_tol * scale).complete(prec) {
                return Err(Error::OrderCheck(format!(
                    "window {n}: nested coefficient b_{p} = {mag} below the window \
                     order is not zero at scale {scale}; upstream tolerance failure"
                )));
            }
        }
        for (p, bp) in b.iter().enumerate().skip(n) {
            if bp.is_zero() {
                continue;
            }
            let nodes = VandermondeNodes::new(realized[..=p].to_vec(), prec)?;
            let beta_min = nodes.min().clone();
            let cterm = Float::with_val(prec, p as u32) - (&dec.k_prime * &beta_min).complete(prec);
            if c_max.as_ref().map_or(true, |cur| cterm > *cur) {
                c_max = Some(cterm);
            }
            let babs = bp.clone().abs().into_real_imag().0;
            tail += babs * dec.r.clone().pow(&beta_min);
            dec.tail_report.push(Float::with_val(prec, &tail));
            dec.terms.push(PackageTerm {
                nodes,
                b: bp.clone(),
            });
            dec.provenance.push((n, p));
        }
    }
    if let Some(c) = c_max {
        dec.c = c;
    }
    Ok(dec)
}

/// Evaluates a decomposition at `w`: the sum `Σ b·⟨Δ_R, e^{tw}⟩` over the
/// emitted terms, together with a bound on what the evaluation skipped.
///
/// For `Re w < 0` the terms whose trailing bound mass `Σ |b|·√2|w|^N e^{β Re w}`
/// falls below one part in `2^{prec+8}` of the total are not evaluated; the
/// skipped mass is returned as `package_tail`. For `Re w ≥ 0` no bound is
/// available and every term is evaluated (tail `0`).
pub fn eval_decomposition(dec: &PackageDecomposition, w: &Complex) -> Result<(Complex, Float)> {
    let prec = dec.prec;
    if !w.real().is_finite() || !w.imag().is_finite() {
        return Err(Error::InvalidInput(format!("w must be finite, got {w}")));
    }
    if dec.terms.is_empty() {
        return Ok((czero(prec), rzero(prec)));
    }
    let wp = prec + 32;
    let mut cut = dec.terms.len();
    let mut tail = rzero(prec);
    if w.real().is_sign_negative() && !w.real().is_zero() {
        let mut suffix: Vec<Float> = Vec::with_capacity(dec.terms.len() + 1);
        suffix.push(rzero(wp));
        for term in dec.terms.iter().rev() {
            let b = term.bound(w)?;
            let s = (suffix.last().unwrap() + &b).complete(wp);
            suffix.push(s);
        }
        suffix.reverse(); // suffix[i] = Σ_{j ≥ i} bound_j
        let mut threshold = Float::with_val(wp, &suffix[0]);
        threshold >>= prec + 8;
        while cut > 0 && suffix[cut - 1] <= threshold {
            cut -= 1;
        }
        if cut < dec.terms.len() {
            tail = Float::with_val(prec, &suffix[cut]);
        }
    }
    let mut sum = czero(wp);
    for term in dec.terms.iter().take(cut) {
        sum += term.eval(w, PackageMethod::Series)?;
    }
    Ok((Complex::with_val(prec, &sum), tail))
}

/// Plain term-by-term summation with every input rounded to `prec` bits and
/// all arithmetic carried out there — the cancellation-exposed baseline.
pub fn naive_sum(series: &SeriesSpec, w: &Complex, prec: u32) -> Complex {
    let wp = Complex::with_val(prec, w);
    let mut sum = Complex::with_val(prec, 0);
    for i in 0..series.len() {
        let beta = Float::with_val(prec, series.support.value(i));
        let a = Complex::with_val(prec, series.coefficient(i));
        let e = (&wp * &beta).complete((prec, prec)).exp();
        sum += a * e;
    }
    sum
}

/// One line of a [`CompareReport`].
#[derive(Clone, Debug)]
pub struct CompareRow {
    pub label: String,
    pub value: Complex,
    pub abs_error: Float,
    /// Relative to the oracle; absolute when the oracle vanishes.
    pub rel_error: Float,
    pub digits_agreed: u32,
}

/// Side-by-side values of the naive, DIPP, and package summations against a
/// high-precision direct oracle.
#[derive(Clone, Debug)]
pub struct CompareReport {
    pub w: Complex,
    pub oracle: Complex,
    pub oracle_prec: u32,
    pub rows: Vec<CompareRow>,
}

const ORACLE_PREC: u32 = 4096;

fn report_row(label: String, value: Complex, oracle: &Complex) -> CompareRow {
    let diff = Complex::with_val(ORACLE_PREC, &value) - oracle;
    let abs_error = diff.abs().into_real_imag().0;
    let omag = oracle.clone().abs().into_real_imag().0;
    let rel_error = if omag.is_zero() {
        abs_error.clone()
    } else {
        (&abs_error / &omag).complete(ORACLE_PREC)
    };
    let digits_agreed = if rel_error.is_zero() {
        (ORACLE_PREC as f64 * std::f64::consts::LOG10_2) as u32
    } else {
        let lg = -rel_error.clone().log10().to_f64();
        lg.clamp(0.0, ORACLE_PREC as f64 * std::f64::consts::LOG10_2) as u32
    };
    CompareRow {
        label,
        value,
        abs_error: Float::with_val(53, &abs_error),
        rel_error: Float::with_val(53, &rel_error),
        digits_agreed,
    }
}

/// Picks a DIPP slope for the comparison harness: the largest rung of
/// `−Re(w)/d` whose predicted window decay `ln|w| + 1 − ln k + Re(w)/k` is
/// safely negative, so the diagnostic sequence contracts at the given `w`.
fn comparison_slope(w: &Complex, prec: u32) -> Float {
    let re = w.real().to_f64();
    let abs = w.clone().abs().into_real_imag().0.to_f64();
    let mut best = -re / 32.0;
    for d in [2.0f64, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0, 24.0, 32.0] {
        let k = -re / d;
        if abs.ln() + 1.0 - k.ln() + re / k <= -0.4 {
            best = k;
            break;
        }
    }
    Float::with_val(prec, best)
}

/// Sums the series four ways — naive at each requested precision, DIPP,
/// package evaluation — and reports each against a 4096-bit direct oracle.
///
/// The DIPP and package runs parameterize themselves from the series cutoff:
/// the slope from [`comparison_slope`] (packages use `k = 1`), as many
/// windows as the cutoff allows (capped at 160), and a cluster radius well
/// under the working precision. Rows for runs that fail carry the error text
/// in their label and a zero value.
pub fn compare_methods(
    series: &SeriesSpec,
    w: &Complex,
    precisions: &[u32],
) -> Result<CompareReport> {
    let prec = series.prec;
    if !(w.real().is_sign_negative() && !w.real().is_zero()) {
        return Err(Error::InvalidInput(format!(
            "comparison needs Re(w) < 0, got w = {w}"
        )));
    }
    let oracle = naive_sum(series, w, ORACLE_PREC);
    let mut rows = Vec::new();
    for &p in precisions {
        let v = naive_sum(series, w, p);
        rows.push(report_row(format!("naive@{p}"), v, &oracle));
    }

    let cutoff = series.cutoff.to_f64();
    let k_dipp = comparison_slope(w, prec);
    let n_dipp = ((k_dipp.to_f64() * cutoff + 2.0).floor() as usize).min(160);
    let tol = Float::with_val(prec, 1e-14);
    let dipp_row = if series.is_empty() || n_dipp < 4 {
        report_row("dipp".into(), naive_sum(series, w, prec), &oracle)
    } else {
        match admissible_sequence(&k_dipp, &series.support)
            .and_then(|seq| dipp_sum(series, &seq, w, &tol, n_dipp))
        {
            Ok(s) => report_row("dipp".into(), s.value, &oracle),
            Err(e) => report_row(format!("dipp [error: {e}]"), czero(prec), &oracle),
        }
    };
    rows.push(dipp_row);

    let n_pack = ((cutoff + 2.0).floor() as usize).min(120);
    let mut eps = Float::with_val(prec, 1);
    eps >>= prec / 4;
    let pack_row = if series.is_empty() || n_pack < 4 {
        report_row("packages".into(), naive_sum(series, w, prec), &oracle)
    } else {
        let run = summate_by_packages(series, &rzero(prec), &Float::with_val(prec, 1), Some(&eps), n_pack)
            .and_then(|dec| eval_decomposition(&dec, w));
        match run {
            Ok((v, _)) => report_row("packages".into(), v, &oracle),
            Err(e) => report_row(format!("packages [error: {e}]"), czero(prec), &oracle),
        }
    };
    rows.push(pack_row);

    Ok(CompareReport {
        w: Complex::with_val(prec, w),
        oracle,
        oracle_prec: ORACLE_PREC,
        rows,
    })
}

/// Whether the decomposition takes (numerically) equal values at `w` and
/// `w + 2πi` — the reality check that an integer-supported series summed by
/// packages behaves like a function of `e^w`. The original series is passed
/// alongside to certify the integer-support precondition.
pub fn periodicity_check(
    series: &SeriesSpec,
    dec: &PackageDecomposition,
    w: &Complex,
    tol: &Float,
) -> Result<bool> {
    for v in series.support.values() {
        if !v.is_integer() {
            return Err(Error::InvalidInput(format!(
                "periodicity needs integer support, found β = {v}"
            )));
        }
    }
    if !(tol.is_finite() && tol.is_sign_positive()) {
        return Err(Error::InvalidInput(format!("tol must be positive, got {tol}")));
    }
    let prec = dec.prec;
    let (v1, _) = eval_decomposition(dec, w)?;
    let two_pi = Float::with_val(prec + 16, Constant::Pi) * 2u32;
    let w2 = Complex::with_val(
        prec,
        (
            Float::with_val(prec, w.real()),
            Float::with_val(prec, w.imag() + &two_pi),
        ),
    );
    let (v2, _) = eval_decomposition(dec, &w2)?;
    let diff = (v1 - v2).abs().into_real_imag().0;
    Ok(diff <= *tol)
}
