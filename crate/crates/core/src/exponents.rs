//! Support sets of frequencies and the cut sequences used to walk them.
//!
//! The sets of interest are `R_α = ℕ + α⁻¹ℕ` truncated at a cutoff, arbitrary
//! explicit frequency lists, and the two pieces of bookkeeping the summation
//! pipeline needs about them: a linear-density estimate `(μ, ν)` and an
//! admissible sequence of cut points `t_n` that grows superlinearly while
//! avoiding the support.

use crate::numerics::rzero;
use crate::{Error, Result};
use rug::ops::CompleteRound;
use rug::Float;
use std::collections::BTreeMap;

/// One frequency. When it was generated as a lattice point `p + q/α` the pair
/// `(p, q)` is kept alongside the evaluated value, so rational `α` can merge
/// collisions without losing the arithmetic origin of the surviving point.
#[derive(Clone, Debug)]
pub struct Exponent {
    /// Evaluated value at the owning set's working precision.
    pub value: Float,
    /// Lattice coordinates `(p, q)` meaning `p + q/α`, when applicable.
    pub lattice: Option<(u32, u32)>,
}

/// A finite, strictly increasing set of nonnegative frequencies.
#[derive(Clone, Debug)]
pub struct ExponentSet {
    /// Strictly increasing after evaluation.
    pub points: Vec<Exponent>,
    /// The `α` of `R_α`, when generated that way.
    pub alpha: Option<Float>,
    /// Generation bound: every point is `≤ cutoff` and every lattice point
    /// `≤ cutoff` is present. `None` for explicit lists.
    pub cutoff: Option<Float>,
    /// Working precision in bits.
    pub prec: u32,
}

impl ExponentSet {
    /// Builds a set from explicit values: sorts, deduplicates exact equals,
    /// rejects negatives and non-finite values.
    pub fn from_values(values: Vec<Float>, prec: u32) -> Result<Self> {
        let mut vals = values;
        for v in &vals {
            if !v.is_finite() || v.is_sign_negative() && !v.is_zero() {
                return Err(Error::InvalidInput(format!(
                    "frequencies must be finite and nonnegative, got {v}"
                )));
            }
        }
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        vals.dedup_by(|a, b| a == b);
        let points = vals
            .into_iter()
            .map(|v| Exponent {
                value: Float::with_val(prec, &v),
                lattice: None,
            })
            .collect();
        Ok(ExponentSet {
            points,
            alpha: None,
            cutoff: None,
            prec,
        })
    }

    /// The empty support (admissible sequences allow it; densities do not).
    pub fn empty(prec: u32) -> Self {
        ExponentSet {
            points: Vec::new(),
            alpha: None,
            cutoff: None,
            prec,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Evaluated frequencies, in increasing order.
    pub fn values(&self) -> impl Iterator<Item = &Float> {
        self.points.iter().map(|e| &e.value)
    }

    pub fn value(&self, i: usize) -> &Float {
        &self.points[i].value
    }

    /// Largest point, if any.
    pub fn max_value(&self) -> Option<&Float> {
        self.points.last().map(|e| &e.value)
    }

    /// Upper end of the region the set describes: the generation cutoff when
    /// known, otherwise the largest point.
    pub fn upper_bound(&self) -> Option<Float> {
        if let Some(c) = &self.cutoff {
            Some(c.clone())
        } else {
            self.max_value().cloned()
        }
    }

    /// Exact membership test (binary search on the evaluated values).
    pub fn contains(&self, x: &Float) -> bool {
        self.points
            .binary_search_by(|e| e.value.partial_cmp(x).unwrap())
            .is_ok()
    }

    /// Smallest point strictly greater than `x`, if any.
    pub fn next_above(&self, x: &Float) -> Option<&Float> {
        let idx = self
            .points
            .partition_point(|e| e.value.partial_cmp(x).unwrap() != std::cmp::Ordering::Greater);
        self.points.get(idx).map(|e| &e.value)
    }

    /// Number of points in the half-open window `(hi − len, hi]`. Points that
    /// sit on an edge up to roundoff (half the working precision) are treated
    /// as exactly on it, so `β − len` landing next to another support point
    /// counts the way exact arithmetic would.
    pub fn count_ending_at(&self, hi: &Float, len: &Float) -> usize {
        let prec = self.prec;
        let mut slack = (Float::with_val(prec, 1) + hi.clone().abs()) + len.clone().abs();
        slack >>= prec / 2;
        let lo = (hi - len).complete(prec) + &slack;
        let hi_adj = (hi + &slack).complete(prec);
        let start = self.points.partition_point(|e| e.value <= lo);
        let end = self.points.partition_point(|e| e.value <= hi_adj);
        end - start
    }
}

/// Generates `R_α ∩ [0, cutoff] = {p + q/α : p, q ∈ ℕ} ∩ [0, cutoff]`,
/// sorted and with exact collisions (rational `α`) merged.
pub fn generate_r_alpha(alpha: &Float, cutoff: &Float, prec: u32) -> Result<ExponentSet> {
    if !(alpha.is_finite() && alpha.is_sign_positive() && !alpha.is_zero()) {
        return Err(Error::InvalidInput(format!("alpha must be positive, got {alpha}")));
    }
    if !cutoff.is_finite() || cutoff.is_sign_negative() && !cutoff.is_zero() {
        return Err(Error::InvalidInput(format!(
            "cutoff must be finite and nonnegative, got {cutoff}"
        )));
    }
    let mut raw: Vec<(Float, u32, u32)> = Vec::new();
    let mut p = 0u32;
    loop {
        let pf = Float::with_val(prec, p);
        if pf > *cutoff {
            break;
        }
        let mut q = 0u32;
        loop {
            let beta = Float::with_val(prec, q) / alpha + &pf;
            if beta > *cutoff {
                break;
            }
            raw.push((beta, p, q));
            q += 1;
        }
        p += 1;
    }
    raw.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut points: Vec<Exponent> = Vec::with_capacity(raw.len());
    for (beta, p, q) in raw {
        if let Some(last) = points.last() {
            if last.value == beta {
                continue;
            }
        }
        points.push(Exponent {
            value: beta,
            lattice: Some((p, q)),
        });
    }
    Ok(ExponentSet {
        points,
        alpha: Some(Float::with_val(prec, alpha)),
        cutoff: Some(Float::with_val(prec, cutoff)),
        prec,
    })
}

/// A linear-density certificate for a support set: every window `I` of
/// length `window` satisfies `#(R ∩ I) ≤ mu·window·sup(I) + nu·window`.
#[derive(Clone, Debug)]
pub struct DensityParams {
    pub mu: Float,
    pub nu: Float,
    pub window: Float,
}

/// Fits `(μ, ν)` by sweeping the windows anchored at support points — the
/// half-open `I_β = (β − L, β]` for `β ∈ R`. These dominate every other
/// position: sliding any window right until its largest contained point hits
/// the closed end only grows the count and shrinks the sup, so the inequality
/// checked on anchored windows holds for all windows. Writing `x_β = sup =
/// β` and `y_β = #(R ∩ I_β)/L`, the fit is the shallowest line through the
/// leftmost anchor's point dominating every other anchor: `μ` is the
/// steepest chord from that point, clamped to `≥ 0`, and `ν` is the offset
/// at the leftmost anchor. This keeps `μ` pinned to the growth of the counts
/// instead of letting a large `ν` flatten it away.
pub fn density_params(r: &ExponentSet, window: &Float) -> Result<DensityParams> {
    if r.is_empty() {
        return Err(Error::InvalidInput("density of an empty support".into()));
    }
    if !(window.is_finite() && window.is_sign_positive() && !window.is_zero()) {
        return Err(Error::InvalidInput(format!("window must be positive, got {window}")));
    }
    let prec = r.prec;
    let xy: Vec<(Float, Float)> = r
        .values()
        .map(|b| {
            let c = r.count_ending_at(b, window);
            let y = Float::with_val(prec, c) / window;
            (b.clone(), y)
        })
        .collect();
    let (x0, y0) = (&xy[0].0, &xy[0].1);
    let mut mu = rzero(prec);
    for (x, y) in xy.iter().skip(1) {
        let dx = (x - x0).complete(prec);
        if dx.is_zero() {
            continue;
        }
        let slope = (y - y0).complete(prec) / dx;
        if slope > mu {
            mu = slope;
        }
    }
    let mut nu = y0.clone() - (x0 * &mu).complete(prec);
    if nu < 0 {
        nu = rzero(prec);
    }
    Ok(DensityParams {
        mu,
        nu,
        window: Float::with_val(prec, window),
    })
}

impl DensityParams {
    /// Checks the defining inequality on every window anchored at a support
    /// point (with a one-ulp-scale slack for the arithmetic); as argued at
    /// [`density_params`], this is exhaustive over all windows.
    pub fn check(&self, r: &ExponentSet) -> bool {
        let prec = r.prec;
        let mut slack = Float::with_val(prec, 1);
        slack >>= prec / 2;
        for b in r.values() {
            let c = r.count_ending_at(b, &self.window);
            let bound = (&self.mu * &self.window).complete(prec) * b
                + (&self.nu * &self.window).complete(prec);
            if Float::with_val(prec, c) > bound + &slack {
                return false;
            }
        }
        true
    }
}

/// The cut sequence `t_0 = t_1 = t_2 = t_3 = 0`, `t_n = (n − 3.5)/k` for
/// `n > 3`, with rule values that land exactly on the support nudged up by
/// half the gap to the next point of `R ∪ {rule values}` (gap capped at
/// `1/(4k)` so superlinearity survives). No positive cut lies in the
/// support; the four forced zeros coincide with `β = 0` whenever the
/// support starts there, which is harmless because the windows they bound
/// are empty.
#[derive(Clone, Debug)]
pub struct AdmissibleSequence {
    pub k: Float,
    nudges: BTreeMap<usize, Float>,
    prec: u32,
}

/// Builds the admissible sequence for slope `k > 0` avoiding the support `r`.
pub fn admissible_sequence(k: &Float, r: &ExponentSet) -> Result<AdmissibleSequence> {
    if !(k.is_finite() && k.is_sign_positive() && !k.is_zero()) {
        return Err(Error::InvalidInput(format!("k must be positive, got {k}")));
    }
    let prec = r.prec.max(k.prec());
    let kf = Float::with_val(prec, k);
    let mut nudges = BTreeMap::new();
    if let Some(max) = r.max_value() {
        // Only finitely many rule values can hit the (finite) support.
        let mut n = 4usize;
        loop {
            let rule = rule_value(&kf, n, prec);
            if rule > *max {
                break;
            }
            if r.contains(&rule) {
                let next_rule = rule_value(&kf, n + 1, prec);
                let mut gap = (&next_rule - &rule).complete(prec);
                if let Some(nb) = r.next_above(&rule) {
                    let g2 = (nb - &rule).complete(prec);
                    if g2 < gap {
                        gap = g2;
                    }
                }
                let cap = Float::with_val(prec, 0.25) / &kf;
                if cap < gap {
                    gap = cap;
                }
                gap >>= 1;
                nudges.insert(n, rule + gap);
            }
            n += 1;
        }
    }
    Ok(AdmissibleSequence {
        k: kf,
        nudges,
        prec,
    })
}

fn rule_value(k: &Float, n: usize, prec: u32) -> Float {
    let num = Float::with_val(prec, n) - Float::with_val(prec, 3.5f64);
    num / k
}

impl AdmissibleSequence {
    /// The cut point `t_n`.
    pub fn t(&self, n: usize) -> Float {
        if n <= 3 {
            return rzero(self.prec);
        }
        if let Some(v) = self.nudges.get(&n) {
            return v.clone();
        }
        rule_value(&self.k, n, self.prec)
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    /// Indices whose rule value was nudged off the support.
    pub fn nudged_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.nudges.keys().copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::DEFAULT_PREC as P;

    fn f(v: f64) -> Float {
        Float::with_val(P, v)
    }

    fn sqrt2() -> Float {
        Float::with_val(P, 2).sqrt()
    }

    #[test]
    fn r_alpha_rational_merges_to_half_integers() {
        let r = generate_r_alpha(&f(2.0), &f(1.5), P).unwrap();
        let got: Vec<Float> = r.values().cloned().collect();
        assert_eq!(got.len(), 4);
        for (g, want) in got.iter().zip([0.0, 0.5, 1.0, 1.5]) {
            assert_eq!(*g, f(want));
        }
    }

    #[test]
    fn r_alpha_sqrt2_cutoff_two() {
        let s2 = sqrt2();
        let r = generate_r_alpha(&s2, &f(2.0), P).unwrap();
        let inv = Float::with_val(P, 1) / &s2;
        let want = [
            Float::with_val(P, 0),
            inv.clone(),
            Float::with_val(P, 1),
            s2.clone(),
            Float::with_val(P, 1) + &inv,
            Float::with_val(P, 2),
        ];
        assert_eq!(r.len(), 6);
        for (g, w) in r.values().zip(want.iter()) {
            let d = (g - w).complete(P).abs();
            assert!(d < f(1e-70), "point {g} vs {w}");
        }
    }

    #[test]
    fn r_alpha_zero_cutoff_is_origin() {
        let r = generate_r_alpha(&sqrt2(), &f(0.0), P).unwrap();
        assert_eq!(r.len(), 1);
        assert!(r.value(0).is_zero());
    }

    #[test]
    fn r_alpha_strictly_increasing_all_distinct() {
        let r = generate_r_alpha(&sqrt2(), &f(20.0), P).unwrap();
        for i in 1..r.len() {
            assert!(r.value(i - 1) < r.value(i));
        }
        // α irrational: no two lattice points may collide.
        let expected: usize = {
            // #{(p,q): p + q/√2 ≤ 20} counted directly.
            let mut c = 0usize;
            let s2 = sqrt2();
            for p in 0..=20u32 {
                let room = f(20.0) - Float::with_val(P, p);
                let mut q = 0u32;
                loop {
                    let beta = Float::with_val(P, q) / &s2;
                    if beta > room {
                        break;
                    }
                    c += 1;
                    q += 1;
                }
            }
            c
        };
        assert_eq!(r.len(), expected);
    }

    #[test]
    fn density_integers_unit_window() {
        let vals: Vec<Float> = (0..=20).map(|i| Float::with_val(P, i)).collect();
        let mut r = ExponentSet::from_values(vals, P).unwrap();
        r.cutoff = Some(f(20.0));
        let d = density_params(&r, &f(1.0)).unwrap();
        assert!(d.mu.is_zero(), "mu = {}", d.mu);
        assert_eq!(d.nu, f(1.0));
        assert!(d.check(&r));
    }

    #[test]
    fn density_r_sqrt2_matches_alpha() {
        // The count in (β−1, β] is exactly ⌊√2 β⌋ + 1, so the steepest chord
        // from the first anchor is exactly √2: μ reproduces α.
        let r = generate_r_alpha(&sqrt2(), &f(20.0), P).unwrap();
        let d = density_params(&r, &f(1.0)).unwrap();
        let err = (d.mu.clone() - sqrt2()).abs();
        assert!(err < f(1e-60), "mu = {}", d.mu);
        assert_eq!(d.nu, f(1.0));
        assert!(d.check(&r), "invariant fails: mu={} nu={}", d.mu, d.nu);
    }

    #[test]
    fn density_singleton() {
        let r = ExponentSet::from_values(vec![Float::with_val(P, 0)], P).unwrap();
        let d = density_params(&r, &f(1.0)).unwrap();
        assert!(d.mu.is_zero());
        assert_eq!(d.nu, f(1.0));
        assert!(d.check(&r));
    }

    #[test]
    fn density_invariant_exhaustive_on_sliding_windows() {
        // Check the fitted pair against every anchored window for a couple of
        // differently shaped supports and window lengths.
        for (alpha, cutoff) in [(2.0f64, 12.0f64), (1.0, 15.0)] {
            let r = generate_r_alpha(&f(alpha), &f(cutoff), P).unwrap();
            for len in [0.5f64, 1.0, 2.0] {
                let d = density_params(&r, &f(len)).unwrap();
                assert!(d.check(&r), "alpha={alpha} len={len}");
            }
        }
        let r = generate_r_alpha(&sqrt2(), &f(20.0), P).unwrap();
        for len in [0.5f64, 1.0, 3.0] {
            let d = density_params(&r, &f(len)).unwrap();
            assert!(d.check(&r), "sqrt2 len={len}");
        }
    }

    #[test]
    fn admissible_rule_values_k1() {
        let seq = admissible_sequence(&f(1.0), &ExponentSet::empty(P)).unwrap();
        for n in 0..=3 {
            assert!(seq.t(n).is_zero());
        }
        assert_eq!(seq.t(4), f(0.5));
        assert_eq!(seq.t(5), f(1.5));
    }

    #[test]
    fn admissible_rule_values_k2() {
        let seq = admissible_sequence(&f(2.0), &ExponentSet::empty(P)).unwrap();
        assert_eq!(seq.t(5), f(0.75));
    }

    #[test]
    fn admissible_nudges_off_support() {
        let r = ExponentSet::from_values(vec![f(0.5)], P).unwrap();
        let seq = admissible_sequence(&f(1.0), &r).unwrap();
        let t4 = seq.t(4);
        assert!(t4 > f(0.5) && t4 <= f(0.75), "t4 = {t4}");
        assert!(!r.contains(&t4));
        assert_eq!(seq.nudged_indices().collect::<Vec<_>>(), vec![4]);
    }

    #[test]
    fn admissible_superlinear_and_avoids_support() {
        let r = generate_r_alpha(&sqrt2(), &f(20.0), P).unwrap();
        for kv in [0.5f64, 1.0, 2.5] {
            let k = f(kv);
            let seq = admissible_sequence(&k, &r).unwrap();
            let mut prev = seq.t(0);
            for n in 1..=200usize {
                let t = seq.t(n);
                assert!(t >= prev, "k={kv} n={n}");
                // The forced zeros t_0..t_3 sit on β = 0 ∈ R_α by design;
                // only the positive cuts must avoid the support.
                if n >= 4 {
                    assert!(!r.contains(&t), "k={kv} n={n} t={t}");
                }
                if n >= 8 {
                    let ratio = t.clone() / Float::with_val(P, n);
                    let floor = Float::with_val(P, 0.5) / &k;
                    assert!(ratio >= floor, "k={kv} n={n}");
                }
                prev = t;
            }
        }
    }

    #[test]
    fn admissible_nudge_fires_on_every_cut_below_cutoff() {
        // k = 1 against the half-integers: every rule value below the cutoff
        // is a half-integer, so every one of them must be nudged, and the
        // sequence must stay strictly below its successor rule value.
        let r = generate_r_alpha(&f(2.0), &f(6.0), P).unwrap();
        let seq = admissible_sequence(&f(1.0), &r).unwrap();
        let nudged: Vec<usize> = seq.nudged_indices().collect();
        assert_eq!(nudged, vec![4, 5, 6, 7, 8, 9]);
        for n in 4..=30usize {
            let t = seq.t(n);
            assert!(!r.contains(&t));
            assert!(t < seq.t(n + 1));
        }
    }
}
