//! Discrete distributions of finite order and their calculus.
//!
//! A distribution here is a finite sum `Σ (−1)^r a δ_β^{(r)}` stored as atoms
//! `(β, r, a)`; pairing against a smooth `φ` gives `Σ a φ^{(r)}(β)`, so that
//! against `e^{tw}` each atom contributes `a w^r e^{βw}`. The module builds
//! Vandermonde distributions (the divided-difference functionals), computes
//! moments, detects order, integrates to piecewise-polynomial primitives,
//! measures functional and combinatorial norms, decomposes a distribution
//! over the nested Vandermonde basis, and approximates derivative atoms by
//! dirac clusters.

use crate::numerics::{czero, rzero, PiecewisePoly, Poly};
use crate::{Error, Result};
use rug::ops::{CompleteRound, Pow};
use rug::{Complex, Float};

/// One term `(−1)^r a δ_β^{(r)}`.
#[derive(Clone, Debug)]
pub struct Atom {
    pub beta: Float,
    pub r: usize,
    pub a: Complex,
}

/// A finite distribution, atoms sorted by `(β, r)` with no duplicates and no
/// exact zeros.
#[derive(Clone, Debug)]
pub struct DiscreteDistribution {
    pub atoms: Vec<Atom>,
    pub prec: u32,
}

impl DiscreteDistribution {
    /// Normalizes: sorts by `(β, r)`, merges duplicates, drops exact zeros.
    pub fn new(atoms: Vec<Atom>, prec: u32) -> Self {
        let mut atoms = atoms;
        atoms.sort_by(|x, y| {
            x.beta
                .partial_cmp(&y.beta)
                .unwrap()
                .then(x.r.cmp(&y.r))
        });
        let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
        for at in atoms {
            if let Some(last) = merged.last_mut() {
                if last.beta == at.beta && last.r == at.r {
                    last.a += &at.a;
                    continue;
                }
            }
            merged.push(at);
        }
        merged.retain(|at| !at.a.is_zero());
        DiscreteDistribution {
            atoms: merged,
            prec,
        }
    }

    /// Sum of order-0 diracs `Σ a_i δ_{β_i}`.
    pub fn from_diracs(pairs: Vec<(Float, Complex)>, prec: u32) -> Self {
        let atoms = pairs
            .into_iter()
            .map(|(beta, a)| Atom { beta, r: 0, a })
            .collect();
        DiscreteDistribution::new(atoms, prec)
    }

    pub fn zero(prec: u32) -> Self {
        DiscreteDistribution {
            atoms: Vec::new(),
            prec,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Distinct support points, increasing.
    pub fn support(&self) -> Vec<Float> {
        let mut out: Vec<Float> = Vec::new();
        for at in &self.atoms {
            if out.last() != Some(&at.beta) {
                out.push(at.beta.clone());
            }
        }
        out
    }

    pub fn max_derivative_order(&self) -> usize {
        self.atoms.iter().map(|at| at.r).max().unwrap_or(0)
    }

    /// `Σ |a|` over all atoms.
    pub fn total_variation(&self) -> Float {
        let mut s = rzero(self.prec);
        for at in &self.atoms {
            s += at.a.clone().abs().real();
        }
        s
    }

    /// Largest coefficient magnitude.
    pub fn max_coeff(&self) -> Float {
        let mut m = rzero(self.prec);
        for at in &self.atoms {
            let v = at.a.clone().abs().into_real_imag().0;
            if v > m {
                m = v;
            }
        }
        m
    }

    /// Coefficient of the `(β, r)` atom, zero when absent.
    pub fn coeff(&self, beta: &Float, r: usize) -> Complex {
        for at in &self.atoms {
            if at.beta == *beta && at.r == r {
                return at.a.clone();
            }
        }
        czero(self.prec)
    }

    /// Pairing `⟨D, e^{tw}⟩ = Σ a w^r e^{βw}`.
    pub fn pair_exp(&self, w: &Complex) -> Complex {
        let prec = self.prec;
        let mut s = czero(prec);
        for at in &self.atoms {
            let e = (&at.beta * w).complete((prec, prec)).exp();
            let wr = w.clone().pow(at.r as u32);
            s += at.a.clone() * e * wr;
        }
        s
    }

    /// Pairing `⟨D, φ⟩ = Σ a φ^{(r)}(β)` with a polynomial.
    pub fn pair_poly(&self, phi: &Poly) -> Complex {
        let prec = self.prec;
        let mut derivs: Vec<Poly> = vec![phi.clone()];
        for _ in 0..self.max_derivative_order() {
            derivs.push(derivs.last().unwrap().derivative());
        }
        let mut s = czero(prec);
        for at in &self.atoms {
            s += at.a.clone() * derivs[at.r].eval_real(&at.beta);
        }
        s
    }

    pub fn scale(&mut self, c: &Complex) {
        for at in &mut self.atoms {
            at.a *= c;
        }
        self.atoms.retain(|at| !at.a.is_zero());
    }

    pub fn add(&self, other: &DiscreteDistribution) -> DiscreteDistribution {
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().cloned());
        DiscreteDistribution::new(atoms, self.prec.max(other.prec))
    }

    pub fn sub(&self, other: &DiscreteDistribution) -> DiscreteDistribution {
        let mut atoms = self.atoms.clone();
        for at in &other.atoms {
            atoms.push(Atom {
                beta: at.beta.clone(),
                r: at.r,
                a: -at.a.clone(),
            });
        }
        DiscreteDistribution::new(atoms, self.prec.max(other.prec))
    }

    /// Atoms with `β ≤ t`.
    pub fn take_upto(&self, t: &Float) -> DiscreteDistribution {
        DiscreteDistribution {
            atoms: self.atoms.iter().filter(|at| at.beta <= *t).cloned().collect(),
            prec: self.prec,
        }
    }

    /// Atoms with `lo < β ≤ hi`.
    pub fn take_range(&self, lo: &Float, hi: &Float) -> DiscreteDistribution {
        DiscreteDistribution {
            atoms: self
                .atoms
                .iter()
                .filter(|at| at.beta > *lo && at.beta <= *hi)
                .cloned()
                .collect(),
            prec: self.prec,
        }
    }
}

/// Sorted distinct nonnegative nodes `{β_0, …, β_n}`.
#[derive(Clone, Debug)]
pub struct VandermondeNodes {
    pub nodes: Vec<Float>,
    pub prec: u32,
}

impl VandermondeNodes {
    pub fn new(nodes: Vec<Float>, prec: u32) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidInput("node set must be nonempty".into()));
        }
        let mut nodes = nodes;
        nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if nodes[0].is_sign_negative() && !nodes[0].is_zero() {
            return Err(Error::InvalidInput(format!(
                "nodes must be nonnegative, got {}",
                nodes[0]
            )));
        }
        for i in 1..nodes.len() {
            if nodes[i - 1] == nodes[i] {
                return Err(Error::InvalidInput(format!(
                    "duplicate node {} (use derivative atoms for confluent nodes)",
                    nodes[i]
                )));
            }
        }
        Ok(VandermondeNodes { nodes, prec })
    }

    /// `n`: one less than the number of nodes.
    pub fn n(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn min(&self) -> &Float {
        &self.nodes[0]
    }

    pub fn max(&self) -> &Float {
        self.nodes.last().unwrap()
    }

    pub fn diameter(&self) -> Float {
        (self.max() - self.min()).complete(self.prec)
    }
}

/// The Vandermonde distribution `D_R = Σ_i a_i δ_{β_i}` with
/// `a_i = Π_{p≠i} (β_i − β_p)^{−1}`: the unique order-0 dirac sum on `R`
/// with moments `0, …, 0, 1`.
pub fn vandermonde(r: &VandermondeNodes) -> DiscreteDistribution {
    let prec = r.prec;
    let pairs = r
        .nodes
        .iter()
        .enumerate()
        .map(|(i, bi)| {
            let mut denom = Float::with_val(prec, 1);
            for (p, bp) in r.nodes.iter().enumerate() {
                if p != i {
                    denom *= (bi - bp).complete(prec);
                }
            }
            let a = Float::with_val(prec, 1) / denom;
            (bi.clone(), Complex::with_val(prec, (&a, &rzero(prec))))
        })
        .collect();
    DiscreteDistribution::from_diracs(pairs, prec)
}

/// `Δ_R = n!·D_R`, normalized so that `Δ_R(t^n) = n!` — the divided-difference
/// functional scaled to a discrete `n`-th derivative.
pub fn normalized_vandermonde(r: &VandermondeNodes) -> DiscreteDistribution {
    let prec = r.prec;
    let mut d = vandermonde(r);
    let fact = Float::with_val(prec, Float::factorial(r.n() as u32));
    d.scale(&Complex::with_val(prec, (&fact, &rzero(prec))));
    d
}

/// `D(t^k) = Σ a · k!/(k−r)! · β^{k−r}` (atoms with `r > k` contribute 0).
pub fn moment(d: &DiscreteDistribution, k: usize) -> Complex {
    let prec = d.prec;
    let mut s = czero(prec);
    for at in &d.atoms {
        if at.r > k {
            continue;
        }
        let mut term = falling_factorial(prec, k, at.r);
        term *= (&at.beta).pow((k - at.r) as u32).complete(prec);
        s += at.a.clone() * &term;
    }
    s
}

/// `k·(k−1)⋯(k−r+1) = k!/(k−r)!` as an exact float.
fn falling_factorial(prec: u32, k: usize, r: usize) -> Float {
    let mut f = Float::with_val(prec, 1);
    for j in (k - r + 1)..=k {
        f *= Float::with_val(prec, j as u64);
    }
    f
}

/// Scale against which a moment counts as zero: `Σ |a|·k!/(k−r)!·max(1,β_max)^{k−r}`.
fn moment_scale(d: &DiscreteDistribution, k: usize) -> Float {
    let prec = d.prec;
    let mut bmax = Float::with_val(prec, 1);
    for at in &d.atoms {
        if at.beta > bmax {
            bmax = at.beta.clone();
        }
    }
    let mut s = rzero(prec);
    for at in &d.atoms {
        if at.r > k {
            continue;
        }
        let mut term = falling_factorial(prec, k, at.r);
        term *= (&bmax).pow((k - at.r) as u32).complete(prec);
        term *= at.a.clone().abs().real();
        s += term;
    }
    s
}

/// The largest `k` with `|D(t^p)| ≤ tol·scale(p)` for all `p < k`; errors on
/// the (numerically) zero distribution.
pub fn order_of(d: &DiscreteDistribution, tol: &Float) -> Result<usize> {
    if d.is_zero() {
        return Err(Error::InvalidInput("order of the zero distribution".into()));
    }
    let cap: usize = d.atoms.iter().map(|at| at.r + 1).sum();
    for p in 0..cap {
        let m = moment(d, p).abs().into_real_imag().0;
        let scale = moment_scale(d, p);
        if m > (tol * &scale).complete(d.prec) {
            return Ok(p);
        }
    }
    Err(Error::OrderCheck(format!(
        "all {cap} moments vanish to tolerance; distribution is numerically zero"
    )))
}

/// `(D_{R′∪{b1}} − D_{R′∪{b2}}) / (b1 − b2)`; equals `vandermonde(R′∪{b1,b2})`.
pub fn merge_vandermonde(
    rprime: &[Float],
    b1: &Float,
    b2: &Float,
    prec: u32,
) -> Result<DiscreteDistribution> {
    if b1 == b2 {
        return Err(Error::InvalidInput(format!("merge nodes coincide: {b1}")));
    }
    let mut n1 = rprime.to_vec();
    n1.push(b1.clone());
    let mut n2 = rprime.to_vec();
    n2.push(b2.clone());
    let d1 = vandermonde(&VandermondeNodes::new(n1, prec)?);
    let d2 = vandermonde(&VandermondeNodes::new(n2, prec)?);
    let mut diff = d1.sub(&d2);
    let inv = Float::with_val(prec, 1) / (b1 - b2).complete(prec);
    diff.scale(&Complex::with_val(prec, (&inv, &rzero(prec))));
    Ok(diff)
}

/// `I^kD(t) = Σ_{β≤t} a (t−β)^{k−r−1}/(k−r−1)!`, the `k`-th primitive
/// vanishing at `−∞`. Requires `r < k` for every atom. When the order of `D`
/// is at least `k` the result is supported inside the convex hull of the
/// support; otherwise it has a nonzero tail.
pub fn primitive(d: &DiscreteDistribution, k: usize) -> Result<PiecewisePoly> {
    let prec = d.prec;
    for at in &d.atoms {
        if at.r >= k {
            return Err(Error::InvalidInput(format!(
                "primitive of order {k} undefined for a derivative atom of order {}",
                at.r
            )));
        }
    }
    let breaks = d.support();
    if breaks.is_empty() {
        return PiecewisePoly::new(Vec::new(), Vec::new(), Poly::zero(prec));
    }
    let mut pieces: Vec<Poly> = Vec::with_capacity(breaks.len() - 1);
    let mut acc = Poly::zero(prec);
    let mut idx = 0usize;
    for (j, b) in breaks.iter().enumerate() {
        acc = acc.recenter(b);
        while idx < d.atoms.len() && d.atoms[idx].beta == *b {
            let at = &d.atoms[idx];
            let deg = k - at.r - 1;
            let mut coeffs = vec![czero(prec); deg + 1];
            let fact = Float::with_val(prec, Float::factorial(deg as u32));
            coeffs[deg] = at.a.clone() / &fact;
            acc.add_assign_poly(&Poly::new(b.clone(), coeffs));
            idx += 1;
        }
        if j + 1 < breaks.len() {
            pieces.push(acc.clone());
        }
    }
    PiecewisePoly::new(breaks, pieces, acc)
}

/// The `k`-th functional norm: `sup |D(φ)| / ‖φ^{(k)}‖_∞ = ∫ |I^kD|`.
/// For `k = 0` this is the total variation `Σ|a|` (order-0 atoms required).
/// The support must have order ≥ `k`, otherwise the failing moment is named.
pub fn functional_norm(
    d: &DiscreteDistribution,
    k: usize,
    interval: Option<(&Float, &Float)>,
) -> Result<Float> {
    let prec = d.prec;
    if d.is_zero() {
        return Ok(rzero(prec));
    }
    let mut tol = Float::with_val(prec, 1);
    tol >>= prec / 2;
    for p in 0..k {
        let m = moment(d, p).abs().into_real_imag().0;
        let scale = moment_scale(d, p);
        if m > tol.clone() * &scale {
            return Err(Error::OrderCheck(format!(
                "moment {p} = {m} is not zero at scale {scale}; order < {k}"
            )));
        }
    }
    if k == 0 {
        if d.max_derivative_order() > 0 {
            return Err(Error::InvalidInput(
                "total variation undefined for derivative atoms".into(),
            ));
        }
        return Ok(d.total_variation());
    }
    let f = primitive(d, k)?;
    match interval {
        Some((lo, hi)) => f.l1_on(lo, hi, None),
        None => {
            // Order ≥ k makes the tail vanish mathematically; its residual
            // float coefficients are only roundoff, so integrate over the
            // convex hull of the support.
            let breaks = d.support();
            let lo = breaks.first().unwrap().clone();
            let hi = breaks.last().unwrap().clone();
            if lo == hi {
                return Ok(rzero(prec));
            }
            f.l1_on(&lo, &hi, None)
        }
    }
}

/// Decomposition of an order-`k` dirac sum over the nested Vandermonde
/// basis `Δ_i = Δ_{{β_0,…,β_i}}`.
#[derive(Clone, Debug)]
pub struct NestedDecomposition {
    /// `b_i = D(P_i)/i!` with `P_i(t) = Π_{j<i}(t−β_j)`.
    pub b: Vec<Complex>,
    /// `‖Σ b_i Δ_i − D‖_{coeff,∞}`.
    pub residual: Float,
    /// `C = N_k^fun(D)`, the constant in the coefficient bound.
    pub bound_constant: Float,
    /// Whether `|b_i| ≤ C·L^{i−k}/(i−k)!` held for every `i ≥ k`.
    pub bound_ok: bool,
}

/// Writes `D = Σ_{i} b_i Δ_{{β_0,…,β_i}}` over the support chain of `D`;
/// `b_0 = … = b_{k−1} = 0` when `D` has order `k`, and the coefficients decay
/// factorially: `|b_i| ≤ N_k^fun(D)·L^{i−k}/(i−k)!` with `L` the support
/// diameter.
pub fn decompose_nested(d: &DiscreteDistribution, k: usize) -> Result<NestedDecomposition> {
    let prec = d.prec;
    if d.max_derivative_order() > 0 {
        return Err(Error::InvalidInput(
            "nested decomposition needs order-0 atoms (undegenerate first)".into(),
        ));
    }
    if d.is_zero() {
        return Err(Error::InvalidInput("decomposition of the zero distribution".into()));
    }
    let support = d.support();
    let n = support.len() - 1;
    let cfun = functional_norm(d, k, None)?;
    // b_i = D(P_i)/i!: vals[j] tracks P_i(β_j) incrementally.
    let mut vals: Vec<Float> = vec![Float::with_val(prec, 1); n + 1];
    let mut b: Vec<Complex> = Vec::with_capacity(n + 1);
    for i in 0..=n {
        if i > 0 {
            let prev = support[i - 1].clone();
            for (j, v) in vals.iter_mut().enumerate() {
                *v *= (&support[j] - &prev).complete(prec);
            }
        }
        let mut s = czero(prec);
        for (j, at) in d.atoms.iter().enumerate() {
            s += at.a.clone() * &vals[j];
        }
        s /= Float::with_val(prec, Float::factorial(i as u32));
        b.push(s);
    }
    // Reconstruct Σ b_i Δ_i coefficient-wise and measure the residual.
    let mut recon = DiscreteDistribution::zero(prec);
    for (i, bi) in b.iter().enumerate() {
        if bi.is_zero() {
            continue;
        }
        let nodes = VandermondeNodes::new(support[..=i].to_vec(), prec)?;
        let mut term = normalized_vandermonde(&nodes);
        term.scale(bi);
        recon = recon.add(&term);
    }
    let diff = recon.sub(d);
    let residual = diff.max_coeff();
    // Coefficient bound |b_i| ≤ C·L^{i−k}/(i−k)! for i ≥ k, with a relative
    // slack for the float arithmetic (the bound is attained, e.g. by Δ_R itself).
    let dia = (support.last().unwrap() - &support[0]).complete(prec);
    let mut slack = Float::with_val(prec, 1);
    slack >>= prec / 4;
    slack += 1;
    let mut bound_ok = true;
    for (i, bi) in b.iter().enumerate() {
        if i < k {
            continue;
        }
        let lim = cfun.clone() * (&dia).pow((i - k) as u32).complete(prec)
            / Float::with_val(prec, Float::factorial((i - k) as u32));
        if *bi.clone().abs().real() > lim * &slack {
            bound_ok = false;
        }
    }
    Ok(NestedDecomposition {
        b,
        residual,
        bound_constant: cfun,
        bound_ok,
    })
}

/// Nested coefficients over an explicit (possibly confluent) node chain
/// `x_0 ≤ x_1 ≤ … ≤ x_n`: `b_p = D(P_p)/p!` with `P_p(t) = Π_{j<p}(t−x_j)`.
/// A point repeated `m` times in the chain carries derivative atoms up to
/// order `m−1`; `D` must be supported on the chain with multiplicities
/// covered.
pub fn nested_coefficients_confluent(
    d: &DiscreteDistribution,
    chain: &[Float],
) -> Result<Vec<Complex>> {
    nested_coefficients_confluent_scaled(d, chain).map(|(b, _)| b)
}

/// As [`nested_coefficients_confluent`], but also reporting for each index
/// the magnitude of the largest summand that was accumulated into `b_p` —
/// the scale against which a computed coefficient counts as numerically
/// zero.
pub(crate) fn nested_coefficients_confluent_scaled(
    d: &DiscreteDistribution,
    chain: &[Float],
) -> Result<(Vec<Complex>, Vec<Float>)> {
    let prec = d.prec;
    for pair in chain.windows(2) {
        if pair[0] > pair[1] {
            return Err(Error::InvalidInput("chain must be sorted".into()));
        }
    }
    for at in &d.atoms {
        let mult = chain.iter().filter(|x| **x == at.beta).count();
        if at.r + 1 > mult {
            return Err(Error::InvalidInput(format!(
                "chain multiplicity {mult} at β = {} does not cover derivative order {}",
                at.beta, at.r
            )));
        }
    }
    let n = chain.len() - 1;
    // Per atom, carry P_p and its derivatives at β up to the atom's order;
    // multiplying by (t − x) updates them in place by the Leibniz rule
    // (P·(t−x))^{(j)} = (β−x)·P^{(j)} + j·P^{(j−1)}, so each chain step costs
    // O(Σ(r+1)) instead of a full polynomial re-expansion.
    let mut derivs: Vec<Vec<Complex>> = d
        .atoms
        .iter()
        .map(|at| {
            let mut v = vec![czero(prec); at.r + 1];
            v[0] = Complex::with_val(prec, (1, 0));
            v
        })
        .collect();
    let mut b = Vec::with_capacity(n + 1);
    let mut scales = Vec::with_capacity(n + 1);
    let mut fact = Float::with_val(prec, 1);
    for p in 0..=n {
        if p > 0 {
            let x = &chain[p - 1];
            for (at, dv) in d.atoms.iter().zip(derivs.iter_mut()) {
                let shift = (&at.beta - x).complete(prec);
                for j in (0..dv.len()).rev() {
                    let mut next = dv[j].clone() * &shift;
                    if j > 0 {
                        next += dv[j - 1].clone() * Float::with_val(prec, j as u32);
                    }
                    dv[j] = next;
                }
            }
            fact *= Float::with_val(prec, p as u32);
        }
        let mut v = czero(prec);
        let mut scale = rzero(prec);
        for (at, dv) in d.atoms.iter().zip(derivs.iter()) {
            let term = at.a.clone() * &dv[at.r];
            let mag = term.real().clone().abs() + term.imag().clone().abs();
            if mag > scale {
                scale = mag;
            }
            v += term;
        }
        v /= &fact;
        scale /= &fact;
        b.push(v);
        scales.push(scale);
    }
    Ok((b, scales))
}

/// Complete homogeneous symmetric polynomials `h_0, …, h_max` of the given
/// nodes, by the subtraction-free prefix recurrence
/// `h_m(x_0..x_j) = h_m(x_0..x_{j−1}) + x_j·h_{m−1}(x_0..x_j)`.
pub fn complete_homogeneous(nodes: &[Float], max_m: usize, prec: u32) -> Vec<Float> {
    let mut h = vec![rzero(prec); max_m + 1];
    h[0] = Float::with_val(prec, 1);
    for x in nodes {
        for m in 1..=max_m {
            let add = (x * &h[m - 1]).complete(prec);
            h[m] += add;
        }
    }
    h
}

/// Which decompositions the combinatorial norm ranges over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CombMode {
    /// Subsets of exactly `k+1` support points.
    ExactOrder,
    /// Subsets of at least `k+1` support points.
    GeqOrder,
}

/// The `k`-th combinatorial norm: the minimum of `Σ_S ρ^{k+1−#S} |b_S|` over
/// decompositions `D = Σ_S b_S Δ_S` with `S` ranging over support subsets of
/// the allowed sizes, solved as a linear program with `b_S` split into
/// positive and negative parts. Real coefficients only; desk scale
/// (≤ 12 support points).
pub fn combinatorial_norm_lp(
    d: &DiscreteDistribution,
    k: usize,
    rho: &Float,
    mode: CombMode,
) -> Result<Float> {
    use minilp::{ComparisonOp, OptimizationDirection, Problem};
    let prec = d.prec;
    if d.is_zero() {
        return Ok(rzero(prec));
    }
    if d.max_derivative_order() > 0 {
        return Err(Error::InvalidInput(
            "combinatorial norm needs order-0 atoms".into(),
        ));
    }
    let support = d.support();
    let npts = support.len();
    if npts > 12 {
        return Err(Error::Unsupported(format!(
            "combinatorial norm capped at 12 support points, got {npts}"
        )));
    }
    let mut rhs = vec![0f64; npts];
    for (j, at) in d.atoms.iter().enumerate() {
        if !at.a.imag().is_zero() {
            return Err(Error::Unsupported(
                "combinatorial norm implemented for real coefficients".into(),
            ));
        }
        rhs[j] = at.a.real().to_f64();
    }
    let nodes_f64: Vec<f64> = support.iter().map(|b| b.to_f64()).collect();
    let rho_f64 = rho.to_f64();
    let mut problem = Problem::new(OptimizationDirection::Minimize);
    // For each admissible subset S: two variables (positive/negative part),
    // objective weight ρ^{k+1−#S}, and a column of Δ_S coefficients.
    let mut columns: Vec<(minilp::Variable, minilp::Variable, Vec<(usize, f64)>)> = Vec::new();
    for mask in 1u32..(1 << npts) {
        let size = mask.count_ones() as usize;
        let admissible = match mode {
            CombMode::ExactOrder => size == k + 1,
            CombMode::GeqOrder => size >= k + 1,
        };
        if !admissible {
            continue;
        }
        let members: Vec<usize> = (0..npts).filter(|j| mask & (1 << j) != 0).collect();
        let m = size - 1;
        let mut fact = 1f64;
        for j in 1..=m {
            fact *= j as f64;
        }
        let mut col = Vec::with_capacity(size);
        for &i in &members {
            let mut denom = 1f64;
            for &p in &members {
                if p != i {
                    denom *= nodes_f64[i] - nodes_f64[p];
                }
            }
            col.push((i, fact / denom));
        }
        let weight = rho_f64.powi(k as i32 + 1 - size as i32);
        let pos = problem.add_var(weight, (0.0, f64::INFINITY));
        let neg = problem.add_var(weight, (0.0, f64::INFINITY));
        columns.push((pos, neg, col));
    }
    for j in 0..npts {
        let mut expr: Vec<(minilp::Variable, f64)> = Vec::new();
        for (pos, neg, col) in &columns {
            for &(i, c) in col {
                if i == j {
                    expr.push((*pos, c));
                    expr.push((*neg, -c));
                }
            }
        }
        problem.add_constraint(&expr[..], ComparisonOp::Eq, rhs[j]);
    }
    let solution = problem
        .solve()
        .map_err(|e| Error::Lp(format!("{e} (order {k}, {npts} points)")))?;
    let mut obj = solution.objective();
    if obj < 0.0 {
        obj = 0.0;
    }
    Ok(Float::with_val(prec, obj))
}

/// Replaces every derivative atom `(β, r≥1, a)` by the dirac cluster
/// `a·Δ_{{β, β+ε_r, …, β+rε_r}}` with `ε_r = eps/r`, so each cluster spans
/// exactly `[β, β+eps]`; order-0 atoms pass through. The pairing against a
/// test function moves by at most `2·eps·sup|φ^{(r+1)}|` per atom.
pub fn undegenerate(d: &DiscreteDistribution, eps: &Float) -> Result<DiscreteDistribution> {
    let prec = d.prec;
    if !(eps.is_finite() && eps.is_sign_positive() && !eps.is_zero()) {
        return Err(Error::InvalidInput(format!("eps must be positive, got {eps}")));
    }
    let support = d.support();
    for pair in support.windows(2) {
        let gap = (&pair[1] - &pair[0]).complete(prec);
        if Float::with_val(prec, 2) * eps >= gap {
            return Err(Error::EpsTooLarge(format!(
                "eps = {eps} not below half the minimal support gap {gap}"
            )));
        }
    }
    if d.max_derivative_order() == 0 {
        return Ok(d.clone());
    }
    // Offsets are computed as (j·eps)/r at a few guard bits so that
    // mathematically equal offsets from different clusters round to the
    // same float and merge exactly.
    let wide = prec + 8;
    let mut out: Vec<Atom> = Vec::new();
    for at in &d.atoms {
        if at.r == 0 {
            out.push(at.clone());
            continue;
        }
        let r = at.r as u32;
        let mut nodes: Vec<Float> = Vec::with_capacity(at.r + 1);
        for j in 0..=r {
            let off = Float::with_val(wide, eps) * j / r;
            let node = Float::with_val(prec, off + Float::with_val(wide, &at.beta));
            nodes.push(node);
        }
        let mut cluster = normalized_vandermonde(&VandermondeNodes::new(nodes, prec)?);
        cluster.scale(&at.a);
        out.extend(cluster.atoms);
    }
    Ok(DiscreteDistribution::new(out, prec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::DEFAULT_PREC as P;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use rug::Rational;

    fn f(v: f64) -> Float {
        Float::with_val(P, v)
    }

    fn c(v: f64) -> Complex {
        Complex::with_val(P, (v, 0.0))
    }

    fn nodes(vals: &[f64]) -> VandermondeNodes {
        VandermondeNodes::new(vals.iter().map(|v| f(*v)).collect(), P).unwrap()
    }

    fn diracs(pairs: &[(f64, f64)]) -> DiscreteDistribution {
        DiscreteDistribution::from_diracs(
            pairs.iter().map(|(b, a)| (f(*b), c(*a))).collect(),
            P,
        )
    }

    fn assert_close(x: &Float, want: f64, tol: f64) {
        let d = (x.clone() - f(want)).abs();
        assert!(d < f(tol), "got {x}, want {want}");
    }

    #[test]
    fn vandermonde_two_and_three_nodes() {
        let d = vandermonde(&nodes(&[0.0, 1.0]));
        assert_eq!(d.coeff(&f(0.0), 0), c(-1.0));
        assert_eq!(d.coeff(&f(1.0), 0), c(1.0));
        let d = vandermonde(&nodes(&[0.0, 1.0, 2.0]));
        assert_eq!(d.coeff(&f(0.0), 0), c(0.5));
        assert_eq!(d.coeff(&f(1.0), 0), c(-1.0));
        assert_eq!(d.coeff(&f(2.0), 0), c(0.5));
        let d = vandermonde(&nodes(&[0.7]));
        assert_eq!(d.coeff(&f(0.7), 0), c(1.0));
    }

    #[test]
    fn normalized_vandermonde_small_cases() {
        let d = normalized_vandermonde(&nodes(&[0.0, 1.0, 2.0]));
        for (b, want) in [(0.0, 1.0), (1.0, -2.0), (2.0, 1.0)] {
            assert_eq!(d.coeff(&f(b), 0), c(want));
        }
        let d = normalized_vandermonde(&nodes(&[0.0, 1.0, 2.0, 3.0]));
        for (b, want) in [(0.0, -1.0), (1.0, 3.0), (2.0, -3.0), (3.0, 1.0)] {
            assert_eq!(d.coeff(&f(b), 0), c(want));
        }
    }

    #[test]
    fn duplicate_nodes_rejected() {
        assert!(VandermondeNodes::new(vec![f(1.0), f(1.0)], P).is_err());
    }

    /// Product-formula coefficients must match an exact rational linear solve
    /// of the defining moment system, coefficient by coefficient.
    #[test]
    fn vandermonde_matches_rational_solve() {
        let mut rng = StdRng::seed_from_u64(20240817);
        for _ in 0..60 {
            let n = rng.gen_range(1..=8usize);
            let mut nums: Vec<i32> = Vec::new();
            while nums.len() < n + 1 {
                let cand = rng.gen_range(0..160);
                if !nums.contains(&cand) {
                    nums.push(cand);
                }
            }
            let den = 8i32;
            let betas: Vec<Rational> =
                nums.iter().map(|p| Rational::from((*p, den))).collect();
            // product formula, exactly
            let mut prod_coeffs: Vec<Rational> = Vec::new();
            for i in 0..=n {
                let mut denom = Rational::from(1);
                for p in 0..=n {
                    if p != i {
                        denom *= Rational::from(&betas[i] - &betas[p]);
                    }
                }
                prod_coeffs.push(Rational::from(1) / denom);
            }
            // exact Gaussian elimination on the moment system V a = e_n
            let mut m: Vec<Vec<Rational>> = (0..=n)
                .map(|j| {
                    (0..=n)
                        .map(|i| {
                            let mut v = Rational::from(1);
                            for _ in 0..j {
                                v *= &betas[i];
                            }
                            v
                        })
                        .collect()
                })
                .collect();
            let mut rhs: Vec<Rational> = (0..=n)
                .map(|j| Rational::from(if j == n { 1 } else { 0 }))
                .collect();
            for col in 0..=n {
                let piv = (col..=n)
                    .find(|&row| m[row][col] != 0)
                    .expect("nonsingular");
                m.swap(col, piv);
                rhs.swap(col, piv);
                let inv = Rational::from(&m[col][col]).recip();
                for x in m[col].iter_mut() {
                    *x *= &inv;
                }
                rhs[col] *= &inv;
                for row in 0..=n {
                    if row != col && m[row][col] != 0 {
                        let factor = m[row][col].clone();
                        for cidx in 0..=n {
                            let sub = Rational::from(&m[col][cidx] * &factor);
                            m[row][cidx] -= sub;
                        }
                        let sub = Rational::from(&rhs[col] * &factor);
                        rhs[row] -= sub;
                    }
                }
            }
            for i in 0..=n {
                assert_eq!(prod_coeffs[i], rhs[i], "node set {nums:?}, coeff {i}");
            }
        }
    }

    #[test]
    fn moment_small_cases() {
        let d = vandermonde(&nodes(&[0.0, 1.0]));
        assert!(moment(&d, 0).is_zero());
        assert_eq!(moment(&d, 1), c(1.0));
        assert_eq!(moment(&d, 2), c(1.0));
        let d = vandermonde(&nodes(&[0.0, 1.0, 2.0]));
        assert_eq!(moment(&d, 4), c(7.0));
    }

    /// Moments equal the brute-force sum over monomials of degree k−n.
    #[test]
    fn moment_matches_symmetric_polynomial_enumeration() {
        fn brute(betas: &[Float], k: usize) -> Float {
            let n = betas.len() - 1;
            if k < n {
                return rzero(P);
            }
            // sum over all compositions p_0+…+p_n = k−n of Π β_i^{p_i}
            fn rec(betas: &[Float], left: usize, idx: usize, acc: Float, out: &mut Float) {
                if idx == betas.len() - 1 {
                    *out += acc * (&betas[idx]).pow(left as u32).complete(P);
                    return;
                }
                for p in 0..=left {
                    let nacc = acc.clone() * (&betas[idx]).pow(p as u32).complete(P);
                    rec(betas, left - p, idx + 1, nacc, out);
                }
            }
            let mut out = rzero(P);
            rec(betas, k - n, 0, Float::with_val(P, 1), &mut out);
            out
        }
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..20 {
            let n = rng.gen_range(1..=6usize);
            let mut vals: Vec<f64> = Vec::new();
            while vals.len() < n + 1 {
                let v = (rng.gen_range(0..40) as f64) / 8.0;
                if !vals.iter().any(|x| (x - v).abs() < 1e-9) {
                    vals.push(v);
                }
            }
            vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let nd = VandermondeNodes::new(vals.iter().map(|v| f(*v)).collect(), P).unwrap();
            let d = vandermonde(&nd);
            for k in n..=(n + 4) {
                let got = moment(&d, k);
                let want = brute(&nd.nodes, k);
                let err = (got - Complex::with_val(P, (&want, &rzero(P))))
                    .abs()
                    .into_real_imag()
                    .0;
                assert!(err < f(1e-55), "n={n} k={k}");
            }
        }
    }

    #[test]
    fn order_detection() {
        assert_eq!(order_of(&diracs(&[(0.0, -1.0), (1.0, 1.0)]), &f(1e-40)).unwrap(), 1);
        let d = diracs(&[(0.0, 1.0), (1.0, -1.0), (2.0, -1.0), (3.0, 1.0)]);
        assert_eq!(order_of(&d, &f(1e-40)).unwrap(), 2);
        assert_eq!(order_of(&diracs(&[(0.7, 1.0)]), &f(1e-40)).unwrap(), 0);
        assert!(order_of(&DiscreteDistribution::zero(P), &f(1e-40)).is_err());
    }

    #[test]
    fn merge_lemma_small_and_random() {
        let got = merge_vandermonde(&[f(0.0)], &f(1.0), &f(2.0), P).unwrap();
        for (b, want) in [(0.0, 0.5), (1.0, -1.0), (2.0, 0.5)] {
            let e = (got.coeff(&f(b), 0) - c(want)).abs().into_real_imag().0;
            assert!(e < f(1e-70));
        }
        let got = merge_vandermonde(&[], &f(0.0), &f(1.0), P).unwrap();
        assert_eq!(got.coeff(&f(0.0), 0), c(-1.0));
        assert_eq!(got.coeff(&f(1.0), 0), c(1.0));

        let mut rng = StdRng::seed_from_u64(99);
        for _ in 0..25 {
            let nprime = rng.gen_range(0..=4usize);
            let mut vals: Vec<f64> = Vec::new();
            while vals.len() < nprime + 2 {
                let v = (rng.gen_range(0..64) as f64) / 8.0;
                if !vals.iter().any(|x| (x - v).abs() < 1e-9) {
                    vals.push(v);
                }
            }
            let b1 = f(vals[nprime]);
            let b2 = f(vals[nprime + 1]);
            let rp: Vec<Float> = vals[..nprime].iter().map(|v| f(*v)).collect();
            let got = merge_vandermonde(&rp, &b1, &b2, P).unwrap();
            let mut all = rp.clone();
            all.push(b1.clone());
            all.push(b2.clone());
            let want = vandermonde(&VandermondeNodes::new(all, P).unwrap());
            let diff = got.sub(&want).max_coeff();
            assert!(diff < f(1e-65), "diff = {diff}");
        }
    }

    #[test]
    fn primitive_step_tent_and_noncompact() {
        // I(δ_1 − δ_0) = −1 on [0,1), 0 after
        let d = diracs(&[(0.0, -1.0), (1.0, 1.0)]);
        let p1 = primitive(&d, 1).unwrap();
        assert_close(p1.eval(&f(0.5)).real(), -1.0, 1e-70);
        assert_close(p1.eval(&f(1.5)).real(), 0.0, 1e-70);
        // I²Δ_{0,1,2} is the unit tent
        let d = normalized_vandermonde(&nodes(&[0.0, 1.0, 2.0]));
        let p2 = primitive(&d, 2).unwrap();
        assert_close(p2.eval(&f(0.25)).real(), 0.25, 1e-70);
        assert_close(p2.eval(&f(1.5)).real(), 0.5, 1e-70);
        assert_close(p2.eval(&f(3.0)).real(), 0.0, 1e-70);
        // I δ_0 is the constant 1: not integrable
        let d = diracs(&[(0.0, 1.0)]);
        let p = primitive(&d, 1).unwrap();
        assert_close(p.eval(&f(10.0)).real(), 1.0, 1e-70);
        assert!(matches!(p.l1_norm(), Err(Error::NonCompactSupport(_))));
    }

    /// Δ_R(φ) must lie between the extremes of φ^{(n)} on Conv(R).
    #[test]
    fn mean_value_property() {
        let mut rng = StdRng::seed_from_u64(41);
        for _ in 0..15 {
            let n = rng.gen_range(1..=5usize);
            let mut vals: Vec<f64> = Vec::new();
            while vals.len() < n + 1 {
                let v = rng.gen_range(0.0..5.0);
                if !vals.iter().any(|x: &f64| (x - v).abs() < 0.05) {
                    vals.push(v);
                }
            }
            vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let nd = VandermondeNodes::new(vals.iter().map(|v| f(*v)).collect(), P).unwrap();
            let delta = normalized_vandermonde(&nd);
            let deg = n + 3;
            let coeffs: Vec<Complex> = (0..=deg)
                .map(|_| Complex::with_val(P, (rng.gen_range(-2.0..2.0f64), 0.0)))
                .collect();
            let phi = Poly::new(rzero(P), coeffs);
            let val = delta.pair_poly(&phi);
            let mut dn = phi;
            for _ in 0..n {
                dn = dn.derivative();
            }
            let (mut lo, mut hi) = (Float::with_val(P, f64::INFINITY), Float::with_val(P, f64::NEG_INFINITY));
            for s in 0..=400 {
                let t = f(vals[0]) + f((vals[n] - vals[0]) * (s as f64) / 400.0);
                let v = dn.eval_real(&t).into_real_imag().0;
                if v < lo {
                    lo = v.clone();
                }
                if v > hi {
                    hi = v;
                }
            }
            let v = val.real().clone();
            // grid sampling underestimates the range slightly
            let margin = f(1e-3) * (hi.clone().abs() + lo.clone().abs() + f(1.0));
            assert!(v >= lo - margin.clone() && v <= hi + margin, "n={n}");
        }
    }

    #[test]
    fn functional_norm_examples() {
        for set in [vec![0.0, 1.0, 2.0], vec![0.0, 0.3, 1.7]] {
            let nd = VandermondeNodes::new(set.iter().map(|v| f(*v)).collect(), P).unwrap();
            let delta = normalized_vandermonde(&nd);
            let nn = functional_norm(&delta, nd.n(), None).unwrap();
            assert_close(&nn, 1.0, 1e-14);
        }
        let d = diracs(&[(0.0, 1.0), (1.0, -1.0), (2.0, -1.0), (3.0, 1.0)]);
        let n2 = functional_norm(&d, 2, Some((&f(0.0), &f(3.0)))).unwrap();
        assert_close(&n2, 2.0, 1e-40);
        let d0 = diracs(&[(0.7, 1.0)]);
        assert_close(&functional_norm(&d0, 0, None).unwrap(), 1.0, 1e-70);
        // order deficiency names the moment
        let bad = diracs(&[(0.0, 1.0), (1.0, 1.0)]);
        match functional_norm(&bad, 1, None) {
            Err(Error::OrderCheck(msg)) => assert!(msg.contains("moment 0")),
            other => panic!("expected order error, got {other:?}"),
        }
    }

    /// I^nΔ_R is the divided-difference kernel: it has the constant sign
    /// (−1)^n on the hull (e.g. I(δ_1−δ_0) = −1 on [0,1)) and |I^nΔ_R|
    /// integrates to exactly 1.
    #[test]
    fn primitive_of_normalized_vandermonde_sign_definite() {
        let mut rng = StdRng::seed_from_u64(4242);
        for _ in 0..10 {
            let n = rng.gen_range(1..=6usize);
            let mut vals: Vec<f64> = Vec::new();
            while vals.len() < n + 1 {
                let v = rng.gen_range(0.0..6.0);
                if !vals.iter().any(|x: &f64| (x - v).abs() < 0.05) {
                    vals.push(v);
                }
            }
            vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let nd = VandermondeNodes::new(vals.iter().map(|v| f(*v)).collect(), P).unwrap();
            let delta = normalized_vandermonde(&nd);
            let prim = primitive(&delta, n).unwrap();
            let orient = if n % 2 == 0 { 1.0 } else { -1.0 };
            for s in 0..=100 {
                let t = f(vals[0]) + f((vals[n] - vals[0]) * (s as f64) / 100.0);
                let v = prim.eval(&t).into_real_imag().0 * f(orient);
                assert!(v > f(-1e-50), "t={t} v={v} nodes={vals:?}");
            }
            let nn = functional_norm(&delta, n, None).unwrap();
            let e = (nn - f(1.0)).abs();
            assert!(e < f(1e-12));
        }
    }

    #[test]
    fn nested_decomposition_worked_instances() {
        let d = diracs(&[(0.0, 1.0), (1.0, -1.0), (2.0, -1.0), (3.0, 1.0)]);
        let dec = decompose_nested(&d, 2).unwrap();
        let want = [0.0, 0.0, 2.0, 1.0];
        for (bi, w) in dec.b.iter().zip(want) {
            let e = (bi.clone() - c(w)).abs().into_real_imag().0;
            assert!(e < f(1e-70), "b = {bi}, want {w}");
        }
        assert!(dec.residual < f(1e-70));
        assert!(dec.bound_ok);

        let delta = normalized_vandermonde(&nodes(&[0.0, 1.0, 2.0]));
        let dec = decompose_nested(&delta, 2).unwrap();
        for (i, want) in [(0usize, 0.0), (1, 0.0), (2, 1.0)] {
            let e = (dec.b[i].clone() - c(want)).abs().into_real_imag().0;
            assert!(e < f(1e-70));
        }

        let mut d3 = normalized_vandermonde(&nodes(&[0.0, 1.0]));
        d3.scale(&c(3.0));
        let dec = decompose_nested(&d3, 1).unwrap();
        let e = (dec.b[1].clone() - c(3.0)).abs().into_real_imag().0;
        assert!(e < f(1e-70));
        assert!(dec.b[0].is_zero() || dec.b[0].clone().abs().into_real_imag().0 < f(1e-70));
    }

    /// Random order-k instances: tiny residual, factorial coefficient bound,
    /// and the weighted-sum comparison against e·N_k^fun.
    #[test]
    fn nested_decomposition_random_properties() {
        let mut rng = StdRng::seed_from_u64(2024);
        for _ in 0..25 {
            let n = rng.gen_range(2..=8usize);
            let k = rng.gen_range(0..=n.min(4));
            let mut vals: Vec<f64> = Vec::new();
            while vals.len() < n + 1 {
                let v = (rng.gen_range(0..48) as f64) / 8.0;
                if !vals.iter().any(|x| (x - v).abs() < 1e-9) {
                    vals.push(v);
                }
            }
            vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
            // random combination of nested Δ_i with i ≥ k has order ≥ k
            let mut d = DiscreteDistribution::zero(P);
            for i in k..=n {
                let bi = rng.gen_range(-2.0..2.0f64);
                let nd =
                    VandermondeNodes::new(vals[..=i].iter().map(|v| f(*v)).collect(), P).unwrap();
                let mut term = normalized_vandermonde(&nd);
                term.scale(&c(bi));
                d = d.add(&term);
            }
            if d.is_zero() || order_of(&d, &f(1e-30)).unwrap_or(0) < k {
                continue;
            }
            let dec = decompose_nested(&d, k).unwrap();
            let tv = d.total_variation();
            assert!(dec.residual <= f(1e-20) * &tv, "residual {}", dec.residual);
            assert!(dec.bound_ok);
            // Σ L^{k−i}|b_i| ≤ e·N_k^fun
            let dia = f(vals[n] - vals[0]);
            let mut s = rzero(P);
            for (i, bi) in dec.b.iter().enumerate() {
                if i < k {
                    continue;
                }
                let li = (&dia).pow(i as u32 - k as u32).complete(P);
                s += bi.clone().abs().into_real_imag().0 / li;
            }
            let e_bound = Float::with_val(P, 1).exp() * &dec.bound_constant;
            assert!(
                s <= e_bound.clone() * f(1.0 + 1e-25),
                "sum {s} vs e·N = {e_bound}"
            );
        }
    }

    #[test]
    fn confluent_coefficients_match_plain_on_distinct_chain() {
        let d = diracs(&[(0.0, 1.0), (1.0, -1.0), (2.0, -1.0), (3.0, 1.0)]);
        let chain: Vec<Float> = [0.0, 1.0, 2.0, 3.0].iter().map(|v| f(*v)).collect();
        let b = nested_coefficients_confluent(&d, &chain).unwrap();
        let dec = decompose_nested(&d, 2).unwrap();
        for (x, y) in b.iter().zip(dec.b.iter()) {
            let e = (x.clone() - y).abs().into_real_imag().0;
            assert!(e < f(1e-70));
        }
    }

    #[test]
    fn confluent_coefficients_on_a_multiset() {
        // D = δ'_1 packaged as atom (1, r=1, a=1): D(P_p)/p! over chain {1,1}
        // gives b_0 = φ'(1)·… pairing: b_0 = D(1)=0, b_1 = D(t−1) = 1.
        let d = DiscreteDistribution::new(
            vec![Atom {
                beta: f(1.0),
                r: 1,
                a: c(1.0),
            }],
            P,
        );
        let chain = vec![f(1.0), f(1.0)];
        let b = nested_coefficients_confluent(&d, &chain).unwrap();
        assert!(b[0].is_zero());
        let e = (b[1].clone() - c(1.0)).abs().into_real_imag().0;
        assert!(e < f(1e-70));
        // moment check: Σ_p b_p·p!·h_{m−p}(prefix) = D(t^m)
        for m in 0..4usize {
            let mut lhs = czero(P);
            for (p, bp) in b.iter().enumerate() {
                if p > m {
                    continue;
                }
                let h = complete_homogeneous(&chain[..=p], m - p, P);
                let fact = Float::with_val(P, Float::factorial(p as u32));
                lhs += bp.clone() * &fact * &h[m - p];
            }
            let rhs = moment(&d, m);
            let e = (lhs - rhs).abs().into_real_imag().0;
            assert!(e < f(1e-69), "m={m}");
        }
    }

    #[test]
    fn combinatorial_norm_examples() {
        // Δ_S decomposes as itself: norm 1
        let delta = normalized_vandermonde(&nodes(&[0.0, 1.0, 2.5]));
        let v = combinatorial_norm_lp(&delta, 2, &f(2.5), CombMode::ExactOrder).unwrap();
        assert_close(&v, 1.0, 1e-7);
        // worked instance: 2, achieved by Δ_{0,1,3} + Δ_{0,2,3}
        let d = diracs(&[(0.0, 1.0), (1.0, -1.0), (2.0, -1.0), (3.0, 1.0)]);
        let v = combinatorial_norm_lp(&d, 2, &f(3.0), CombMode::ExactOrder).unwrap();
        assert_close(&v, 2.0, 1e-7);
        let z = combinatorial_norm_lp(&DiscreteDistribution::zero(P), 1, &f(1.0), CombMode::ExactOrder)
            .unwrap();
        assert!(z.is_zero());
    }

    /// geq ≤ exact, and N^fun ≤ exact, on random small instances.
    #[test]
    fn norm_chain_property() {
        let mut rng = StdRng::seed_from_u64(808);
        let mut tested = 0;
        while tested < 12 {
            let n = rng.gen_range(2..=6usize);
            let k = rng.gen_range(1..=2usize.min(n));
            let mut vals: Vec<f64> = Vec::new();
            while vals.len() < n + 1 {
                let v = (rng.gen_range(0..32) as f64) / 4.0;
                if !vals.iter().any(|x| (x - v).abs() < 1e-9) {
                    vals.push(v);
                }
            }
            vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut d = DiscreteDistribution::zero(P);
            for i in k..=n {
                let nd =
                    VandermondeNodes::new(vals[..=i].iter().map(|v| f(*v)).collect(), P).unwrap();
                let mut term = normalized_vandermonde(&nd);
                term.scale(&c(rng.gen_range(-2.0..2.0f64)));
                d = d.add(&term);
            }
            if d.is_zero() || order_of(&d, &f(1e-30)).unwrap_or(0) != k {
                continue;
            }
            tested += 1;
            let dia = f(vals[n] - vals[0]);
            let exact = combinatorial_norm_lp(&d, k, &dia, CombMode::ExactOrder).unwrap();
            let geq = combinatorial_norm_lp(&d, k, &dia, CombMode::GeqOrder).unwrap();
            let nfun = functional_norm(&d, k, None).unwrap();
            assert!(geq <= exact.clone() * f(1.0 + 1e-6), "geq {geq} exact {exact}");
            assert!(nfun <= exact * f(1.0 + 1e-6), "nfun {nfun}");
        }
    }

    #[test]
    fn undegenerate_first_difference() {
        let d = DiscreteDistribution::new(
            vec![Atom {
                beta: f(0.0),
                r: 1,
                a: c(1.0),
            }],
            P,
        );
        let eps = f(1e-3);
        let u = undegenerate(&d, &eps).unwrap();
        assert_eq!(u.max_derivative_order(), 0);
        assert_eq!(u.atoms.len(), 2);
        let inv_eps = Float::with_val(P, 1) / &eps;
        let e0 = (u.coeff(&f(0.0), 0).real() + &inv_eps).complete(P).abs();
        let e1 = (u.coeff(&eps, 0).real() - &inv_eps).complete(P).abs();
        assert!(e0 < f(1e-55) && e1 < f(1e-55), "{e0} {e1}");
        // pairing with t²: exact is φ'(0) = 0; replacement gives eps
        let phi = Poly::new(rzero(P), vec![czero(P), czero(P), c(1.0)]);
        let v = u.pair_poly(&phi);
        let err = (v.real() - &eps).complete(P).abs();
        assert!(err < f(1e-60), "pairing off by {err}");
    }

    #[test]
    fn undegenerate_second_derivative_cluster_accuracy() {
        let d = DiscreteDistribution::new(
            vec![Atom {
                beta: f(1.0),
                r: 2,
                a: c(1.0),
            }],
            P,
        );
        let eps = f(1e-3);
        let u = undegenerate(&d, &eps).unwrap();
        assert_eq!(u.atoms.len(), 3);
        let w = Complex::with_val(P, (-1.0, 0.0));
        let got = u.pair_exp(&w);
        let want = d.pair_exp(&w); // w² e^{βw} = e^{−1}
        let e = (got - &want).abs().into_real_imag().0;
        // |φ'''| = |w|³ e^{tw} ≤ e^{−1} near t = 1
        let bound = f(2.0) * &eps * f(0.3679) * f(1.01);
        assert!(e < bound, "err {e} bound {bound}");
    }

    #[test]
    fn undegenerate_merges_identical_cluster_nodes() {
        // atoms of order 2 and 3 at the same β share the offset eps: the
        // clusters must land on identical floats there and merge.
        let d = DiscreteDistribution::new(
            vec![
                Atom {
                    beta: f(0.0),
                    r: 2,
                    a: c(1.0),
                },
                Atom {
                    beta: f(0.0),
                    r: 3,
                    a: c(0.5),
                },
            ],
            P,
        );
        let eps = f(0.000244140625) / f(3.0); // not a power of two
        let u = undegenerate(&d, &eps).unwrap();
        // orders 2 and 3 produce offsets {0, ε/2, ε} and {0, ε/3, 2ε/3, ε}:
        // 0 and ε shared → 5 distinct nodes
        assert_eq!(u.atoms.len(), 5);
    }

    #[test]
    fn undegenerate_eps_guard() {
        let d = DiscreteDistribution::new(
            vec![
                Atom {
                    beta: f(0.0),
                    r: 1,
                    a: c(1.0),
                },
                Atom {
                    beta: f(0.01),
                    r: 0,
                    a: c(1.0),
                },
            ],
            P,
        );
        assert!(matches!(
            undegenerate(&d, &f(0.006)),
            Err(Error::EpsTooLarge(_))
        ));
        assert!(undegenerate(&d, &f(0.004)).is_ok());
    }
}
