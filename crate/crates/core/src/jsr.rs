//! Joint `l^p`-spectral radii of tuples in the quantum and free algebras.
//!
//! For a tuple `a = (a_1, ..., a_n)` and one seminorm `||.||` of a defining
//! family the partial radius of degree `d` is
//!
//! ```text
//! R_d = ( sum_{|alpha| = d} ||a_alpha||^p )^{1/(p d)},   a_alpha = a_{alpha_1} ... a_{alpha_d},
//! ```
//!
//! with the sum replaced by a maximum for `p = inf`. The joint radius is the
//! supremum over the family of `lim_d R_d`; here the family is sampled on a
//! grid of radii approaching `r` and each limit is extrapolated from finite
//! `d`.
//!
//! For the canonical generators `a_alpha = q^{-inv(alpha)} x^{p(alpha)}`, so
//! the `n^d` words collapse onto the fibers of `p`, each contributing
//! `W(k)^p rho^{pd} sum_{alpha in p^{-1}(k)} |q|^{-p inv(alpha)}`, and the
//! inner sum is the q-multinomial in base `|q|^{-p}`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::freeseries::{free_ball_norm, free_polydisk_norm, normal_order_project, taylor_norm, FreeElement};
use crate::qcombinatorics::{ln_factorial, ln_q_int, MultiIndex, QModulus, Word};
use crate::qspace::{Family, QElement, QParameter, SeminormSpec};

/// Cap on the words enumerated per degree for non-canonical tuples.
pub const ENUMERATION_LIMIT: usize = 1 << 20;

/// Fits with a larger RMS log-residual are flagged.
pub const FIT_RESIDUAL_LIMIT: f64 = 1e-3;

/// Minimum number of degrees used by a fit.
pub const MIN_FIT_POINTS: usize = 8;

/// Partial radii `R_d(rho)` for `d = 1, 2, ...`.
#[derive(Clone, Debug, PartialEq)]
pub struct JsrPartials {
    pub p: f64,
    pub rho: f64,
    pub values: Vec<(usize, f64)>,
    /// The sequence stopped before the requested degree.
    pub truncated: bool,
    /// Computed by the fiber-collapsed closed form rather than by
    /// enumerating words.
    pub collapsed: bool,
}

/// A tuple whose joint radius is estimated.
#[derive(Clone, Debug)]
pub enum AlgebraTuple {
    Quantum(Vec<QElement>),
    Free(Vec<FreeElement>),
}

impl AlgebraTuple {
    /// `(x_1, ..., x_n)` in the quantum algebra.
    pub fn quantum_generators(n: usize, q: QParameter) -> AlgebraTuple {
        AlgebraTuple::Quantum(
            (1..=n)
                .map(|j| QElement::generator(n, q, 1, j).expect("j in range"))
                .collect(),
        )
    }

    /// `(zeta_1, ..., zeta_n)` in the free algebra.
    pub fn free_generators(n: usize) -> AlgebraTuple {
        AlgebraTuple::Free(
            (1..=n)
                .map(|j| FreeElement::generator(n, 1, j).expect("j in range"))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        match self {
            AlgebraTuple::Quantum(v) => v.len(),
            AlgebraTuple::Free(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn partials(&self, p: f64, spec: &SeminormSpec, d_max: usize) -> Result<JsrPartials> {
        match self {
            AlgebraTuple::Quantum(v) => jsr_partials(v, p, spec, d_max),
            AlgebraTuple::Free(v) => jsr_partials_free(v, p, spec, d_max),
        }
    }
}

fn check_p(p: f64) -> Result<()> {
    if p >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("p must lie in [1, inf], got {p}")))
    }
}

fn is_canonical_quantum(generators: &[QElement]) -> bool {
    let n = generators.len();
    generators.iter().enumerate().all(|(j, g)| {
        g.dim() == n
            && g.len() == 1
            && g.coeff(&MultiIndex::unit(n, j + 1)) == Complex64::new(1.0, 0.0)
    })
}

fn is_canonical_free(generators: &[FreeElement]) -> bool {
    let n = generators.len();
    generators.iter().enumerate().all(|(j, g)| {
        g.dim() == n && g.len() == 1 && g.coeff(&Word::new(&[j + 1])) == Complex64::new(1.0, 0.0)
    })
}

/// `ln [m]_t!` for `m = 0..=m_max`.
fn ln_factorial_table(m_max: usize, t: QModulus) -> Vec<f64> {
    let mut table = Vec::with_capacity(m_max + 1);
    table.push(0.0);
    let mut acc = 0.0;
    for m in 1..=m_max {
        acc += ln_q_int(m as u64, t);
        table.push(acc);
    }
    table
}

/// `ln sum exp(x_i)` shifted by the running maximum.
#[derive(Default)]
struct LogSum {
    max: f64,
    terms: Vec<f64>,
}

impl LogSum {
    fn push(&mut self, x: f64) {
        if self.terms.is_empty() || x > self.max {
            self.max = x;
        }
        self.terms.push(x);
    }

    fn value(&self) -> f64 {
        if self.terms.is_empty() {
            return f64::NEG_INFINITY;
        }
        self.max + self.terms.iter().map(|x| (x - self.max).exp()).sum::<f64>().ln()
    }
}

/// Partial radii of a tuple in the quantum algebra for the polydisk or ball
/// family member `spec`.
pub fn jsr_partials(generators: &[QElement], p: f64, spec: &SeminormSpec, d_max: usize) -> Result<JsrPartials> {
    check_p(p)?;
    if !matches!(spec.family, Family::Polydisk | Family::Ball) {
        return Err(Error::Incompatible(format!(
            "family {} does not act on the quantum algebra",
            spec.family.name()
        )));
    }
    if generators.is_empty() {
        return Err(Error::InvalidParameter("empty tuple".into()));
    }
    if is_canonical_quantum(generators) {
        Ok(collapsed_quantum(generators[0].parameter(), generators.len(), p, spec, d_max))
    } else {
        enumerate_words(generators, p, d_max, spec.rho, |a: &QElement| {
            spec.norm_q(a).map(|v| v.value).expect("family checked")
        })
    }
}

fn collapsed_quantum(q: QParameter, n: usize, p: f64, spec: &SeminormSpec, d_max: usize) -> JsrPartials {
    let qmod = q.modulus();
    let ln_q = qmod.ln();
    let ln_rho = spec.rho.ln();
    let ball_table = ln_factorial_table(d_max, q.qmod().ball_base());
    let ln_weight = |k: &MultiIndex| -> f64 {
        match spec.family {
            Family::Polydisk => {
                if qmod >= 1.0 {
                    0.0
                } else {
                    k.pair_exponent() as f64 * ln_q
                }
            }
            _ => {
                let num: f64 = k.entries().iter().map(|&e| ball_table[e as usize]).sum();
                0.5 * (num - ball_table[k.degree()])
            }
        }
    };
    let mut values = Vec::with_capacity(d_max);
    if p.is_infinite() {
        for d in 1..=d_max {
            let best = MultiIndex::of_degree(n, d)
                .iter()
                .map(|k| {
                    // the largest |q|^{-inv} on a fiber sits at inv = 0 or at
                    // the maximal inversion count sum_{i<j} k_i k_j
                    let spread = if qmod < 1.0 { -(k.pair_exponent() as f64) * ln_q } else { 0.0 };
                    ln_weight(k) + spread
                })
                .fold(f64::NEG_INFINITY, f64::max);
            values.push((d, ((best + d as f64 * ln_rho) / d as f64).exp()));
        }
    } else {
        let s = QModulus::new(qmod.powf(-p)).expect("positive base");
        let count_table = ln_factorial_table(d_max, s);
        for d in 1..=d_max {
            let mut sum = LogSum::default();
            for k in MultiIndex::of_degree(n, d) {
                let den: f64 = k.entries().iter().map(|&e| count_table[e as usize]).sum();
                sum.push(p * ln_weight(&k) + count_table[d] - den);
            }
            let ln_r = (sum.value() / p + d as f64 * ln_rho) / d as f64;
            values.push((d, ln_r.exp()));
        }
    }
    JsrPartials {
        p,
        rho: spec.rho,
        values,
        truncated: false,
        collapsed: true,
    }
}

/// Elements that can be multiplied along words.
trait WordProduct: Sized + Clone {
    fn unit_like(&self) -> Self;
    fn times(&self, other: &Self) -> Result<Self>;
    fn saturated(&self) -> bool;
}

impl WordProduct for QElement {
    fn unit_like(&self) -> Self {
        QElement::one(self.dim(), self.parameter(), self.cap())
    }
    fn times(&self, other: &Self) -> Result<Self> {
        self.multiply(other)
    }
    fn saturated(&self) -> bool {
        self.is_saturated()
    }
}

impl WordProduct for FreeElement {
    fn unit_like(&self) -> Self {
        FreeElement::one(self.dim(), self.cap())
    }
    fn times(&self, other: &Self) -> Result<Self> {
        self.concat_multiply(other)
    }
    fn saturated(&self) -> bool {
        self.is_saturated()
    }
}

/// Degree-by-degree enumeration; stops at the first degree where a product
/// saturates the cap or the word count exceeds [`ENUMERATION_LIMIT`].
fn enumerate_words<T: WordProduct>(
    generators: &[T],
    p: f64,
    d_max: usize,
    rho: f64,
    norm: impl Fn(&T) -> f64,
) -> Result<JsrPartials> {
    let mut values = Vec::new();
    let mut truncated = false;
    let mut layer = vec![generators[0].unit_like()];
    for d in 1..=d_max {
        if layer.len().saturating_mul(generators.len()) > ENUMERATION_LIMIT {
            truncated = true;
            break;
        }
        let mut next = Vec::with_capacity(layer.len() * generators.len());
        for prefix in &layer {
            for g in generators {
                next.push(prefix.times(g)?);
            }
        }
        if next.iter().any(|e| e.saturated()) {
            truncated = true;
            break;
        }
        let norms: Vec<f64> = next.iter().map(&norm).collect();
        let r = if p.is_infinite() {
            norms.iter().fold(0.0, |a: f64, &b| a.max(b)).powf(1.0 / d as f64)
        } else {
            let mut sum = LogSum::default();
            for v in &norms {
                sum.push(p * v.ln());
            }
            (sum.value() / (p * d as f64)).exp()
        };
        values.push((d, r));
        layer = next;
    }
    Ok(JsrPartials {
        p,
        rho,
        values,
        truncated,
        collapsed: false,
    })
}

/// Partial radii of a tuple in the free algebra for one of the free
/// families.
pub fn jsr_partials_free(generators: &[FreeElement], p: f64, spec: &SeminormSpec, d_max: usize) -> Result<JsrPartials> {
    check_p(p)?;
    if generators.is_empty() {
        return Err(Error::InvalidParameter("empty tuple".into()));
    }
    let (rho, tau) = (spec.rho, spec.tau);
    if is_canonical_free(generators)
        && matches!(
            spec.family,
            Family::FreePolydisk | Family::FreeTaylor | Family::FreeBall | Family::Popescu
        )
    {
        return Ok(collapsed_free(generators.len(), p, spec, d_max));
    }
    let norm: Box<dyn Fn(&FreeElement) -> f64> = match spec.family {
        Family::FreePolydisk => Box::new(move |a| free_polydisk_norm(a, rho, tau).value),
        Family::FreeTaylor => Box::new(move |a| taylor_norm(a, rho).value),
        Family::FreeBall => Box::new(move |a| free_ball_norm(a, rho).value),
        other => {
            return Err(Error::Incompatible(format!(
                "family {} is not available for general free tuples",
                other.name()
            )))
        }
    };
    enumerate_words(generators, p, d_max, rho, norm)
}

/// Words are orthonormal for every free family except the `(rho, tau)`
/// norm, where `zeta_alpha` weighs `rho^d tau^{s+1}` and the number of words
/// with `s` letter changes is `n C(d-1, s) (n-1)^s`.
fn collapsed_free(n: usize, p: f64, spec: &SeminormSpec, d_max: usize) -> JsrPartials {
    let ln_rho = spec.rho.ln();
    let ln_tau = spec.tau.ln();
    let polydisk = spec.family == Family::FreePolydisk;
    let mut values = Vec::with_capacity(d_max);
    for d in 1..=d_max {
        let ln_r = if p.is_infinite() {
            let s_max = if n > 1 { d - 1 } else { 0 };
            let tau_part = if polydisk { (s_max + 1) as f64 * ln_tau } else { 0.0 };
            d as f64 * ln_rho + tau_part
        } else if polydisk {
            let mut sum = LogSum::default();
            let s_max = if n > 1 { d - 1 } else { 0 };
            for s in 0..=s_max {
                let ln_binom = ln_factorial((d - 1) as u64) - ln_factorial(s as u64) - ln_factorial((d - 1 - s) as u64);
                let ln_branch = if s == 0 { 0.0 } else { s as f64 * ((n - 1) as f64).ln() };
                sum.push((n as f64).ln() + ln_binom + ln_branch + p * (s + 1) as f64 * ln_tau);
            }
            sum.value() / p + d as f64 * ln_rho
        } else {
            d as f64 * ((n as f64).ln() / p + ln_rho)
        };
        values.push((d, (ln_r / d as f64).exp()));
    }
    JsrPartials {
        p,
        rho: spec.rho,
        values,
        truncated: false,
        collapsed: true,
    }
}

/// Least-squares fit of `ln R_d = ln L + a ln(d)/d + b/d` on one sequence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitDiagnostics {
    pub rho: f64,
    pub limit: f64,
    pub a: f64,
    pub b: f64,
    /// RMS residual of the fit in log space.
    pub residual: f64,
    pub poor_fit: bool,
    /// `R_d` is monotone over the fit window.
    pub monotone: bool,
    pub points: usize,
}

/// Fits on the upper half of the available degrees (at least
/// [`MIN_FIT_POINTS`] of them).
pub fn fit_limit(partials: &JsrPartials) -> Result<FitDiagnostics> {
    let all = &partials.values;
    if all.len() < MIN_FIT_POINTS {
        return Err(Error::InvalidParameter(format!(
            "need at least {MIN_FIT_POINTS} partials, got {}",
            all.len()
        )));
    }
    let count = (all.len() / 2).max(MIN_FIT_POINTS).min(all.len());
    let window = &all[all.len() - count..];
    let design = DMatrix::from_fn(count, 3, |i, j| {
        let d = window[i].0 as f64;
        match j {
            0 => 1.0,
            1 => d.ln() / d,
            _ => 1.0 / d,
        }
    });
    let rhs = DVector::from_iterator(count, window.iter().map(|&(_, r)| r.ln()));
    let coef = design
        .clone()
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let fitted = &design * &coef;
    let residual = ((fitted - &rhs).norm_squared() / count as f64).sqrt();
    let increasing = window.windows(2).all(|w| w[1].1 >= w[0].1 - 1e-15 * w[0].1);
    let decreasing = window.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-15 * w[0].1);
    Ok(FitDiagnostics {
        rho: partials.rho,
        limit: coef[0].exp(),
        a: coef[1],
        b: coef[2],
        residual,
        poor_fit: residual > FIT_RESIDUAL_LIMIT,
        monotone: increasing || decreasing,
        points: count,
    })
}

/// `rho_j = r (1 - 2^{-j})`, `j = 1..=points`.
pub fn default_grid(r: f64, points: usize) -> Vec<f64> {
    (1..=points).map(|j| r * (1.0 - 0.5f64.powi(j as i32))).collect()
}

#[derive(Clone, Debug)]
pub struct JsrEstimate {
    pub p: f64,
    pub rho_grid: Vec<f64>,
    pub partials: Vec<JsrPartials>,
    pub diagnostics: Vec<FitDiagnostics>,
    /// Supremum over the grid of the fitted limits.
    pub extrapolated: f64,
    /// The algebra is entire and the limits grow without bound.
    pub diverges: bool,
}

impl JsrEstimate {
    pub fn any_poor_fit(&self) -> bool {
        self.diagnostics.iter().any(|d| d.poor_fit)
    }

    pub fn any_truncated(&self) -> bool {
        self.partials.iter().any(|p| p.truncated)
    }
}

/// Fits every sequence and takes the supremum; `partials` must align with
/// `rho_grid`. For `r = inf` the supremum is reported as divergent.
pub fn jsr_extrapolate(partials: Vec<JsrPartials>, rho_grid: &[f64], r: f64) -> Result<JsrEstimate> {
    if partials.len() != rho_grid.len() || partials.is_empty() {
        return Err(Error::InvalidParameter("partials and grid differ in length".into()));
    }
    for (part, &rho) in partials.iter().zip(rho_grid) {
        if part.rho != rho {
            return Err(Error::InvalidParameter(format!(
                "partials computed at rho = {} listed at rho = {rho}",
                part.rho
            )));
        }
        if !(r.is_infinite() || rho < r) {
            return Err(Error::InvalidParameter(format!("grid point {rho} outside (0, {r})")));
        }
    }
    let diagnostics = partials.iter().map(fit_limit).collect::<Result<Vec<_>>>()?;
    let p = partials[0].p;
    let sup = diagnostics.iter().map(|d| d.limit).fold(0.0, f64::max);
    let diverges = r.is_infinite() && sup > 0.0;
    Ok(JsrEstimate {
        p,
        rho_grid: rho_grid.to_vec(),
        partials,
        diagnostics,
        extrapolated: if diverges { f64::INFINITY } else { sup },
        diverges,
    })
}

/// Probe radii used when `r = inf`.
pub fn entire_probe_grid() -> Vec<f64> {
    (0..6).map(|j| 2f64.powi(j)).collect()
}

/// Partials over a grid (computed in parallel, collected in grid order)
/// followed by extrapolation.
pub fn jsr_estimate(
    tuple: &AlgebraTuple,
    family: Family,
    p: f64,
    r: f64,
    d_max: usize,
    grid: &[f64],
) -> Result<JsrEstimate> {
    let partials = grid
        .par_iter()
        .map(|&rho| {
            let spec = SeminormSpec::new(family, rho, 1.0, r)?;
            tuple.partials(p, &spec, d_max)
        })
        .collect::<Result<Vec<_>>>()?;
    jsr_extrapolate(partials, grid, r)
}

/// Outcome of comparing the radius of a tuple with that of its image.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonotoneCheck {
    pub source: f64,
    pub image: f64,
    pub pass: bool,
}

/// Relative slack allowed by [`jsr_monotone_check`].
pub const MONOTONE_SLACK: f64 = 0.01;

/// Checks `r(phi(a)) <= r(a)` for the canonical quotient map `phi` (free
/// source, quantum image) or the identity (equal tuples). Any other pair is
/// rejected.
#[allow(clippy::too_many_arguments)]
pub fn jsr_monotone_check(
    source: &AlgebraTuple,
    source_family: Family,
    image: &AlgebraTuple,
    image_family: Family,
    p: f64,
    r: f64,
    d_max: usize,
    grid: &[f64],
) -> Result<MonotoneCheck> {
    if source.len() != image.len() {
        return Err(Error::Rejected("tuples differ in length".into()));
    }
    let related = match (source, image) {
        (AlgebraTuple::Free(s), AlgebraTuple::Quantum(i)) => s.iter().zip(i).all(|(a, b)| {
            let projected = normal_order_project(a, b.parameter());
            projected.dim() == b.dim() && projected.max_abs_diff(b) <= 1e-14
        }),
        (AlgebraTuple::Quantum(s), AlgebraTuple::Quantum(i)) => s.iter().zip(i).all(|(a, b)| {
            a.dim() == b.dim() && a.parameter() == b.parameter() && a.max_abs_diff(b) <= 1e-14
        }),
        (AlgebraTuple::Free(s), AlgebraTuple::Free(i)) => s
            .iter()
            .zip(i)
            .all(|(a, b)| a.dim() == b.dim() && a.max_abs_diff(b) <= 1e-14),
        (AlgebraTuple::Quantum(_), AlgebraTuple::Free(_)) => false,
    };
    if !related {
        return Err(Error::Rejected(
            "image tuple is neither the quotient image nor a copy of the source".into(),
        ));
    }
    let s = jsr_estimate(source, source_family, p, r, d_max, grid)?;
    let i = jsr_estimate(image, image_family, p, r, d_max, grid)?;
    Ok(MonotoneCheck {
        source: s.extrapolated,
        image: i.extrapolated,
        pass: i.extrapolated <= s.extrapolated * (1.0 + MONOTONE_SLACK),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcombinatorics::{ball_weight, w_q};

    fn unimodular() -> QParameter {
        QParameter::new(1.0, std::f64::consts::FRAC_PI_4).unwrap()
    }

    fn spec(family: Family, rho: f64) -> SeminormSpec {
        SeminormSpec::new(family, rho, 1.0, 1.0).unwrap()
    }

    fn gens(n: usize, q: QParameter, cap: usize) -> Vec<QElement> {
        (1..=n).map(|j| QElement::generator(n, q, cap, j).unwrap()).collect()
    }

    #[test]
    fn polydisk_unimodular_closed_form() {
        for n in 1..=3 {
            let part = jsr_partials(&gens(n, unimodular(), 1), 2.0, &spec(Family::Polydisk, 0.7), 30).unwrap();
            for &(_, r) in &part.values {
                assert!((r - 0.7 * (n as f64).sqrt()).abs() < 1e-13);
            }
            let fit = fit_limit(&part).unwrap();
            assert!(fit.residual < 1e-12);
            assert!((fit.limit - 0.7 * (n as f64).sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn ball_unimodular_example() {
        let part = jsr_partials(&gens(2, unimodular(), 1), 2.0, &spec(Family::Ball, 0.999), 40).unwrap();
        let r40 = part.values[39].1 / 0.999;
        assert!((r40 - 41f64.powf(1.0 / 80.0)).abs() < 1e-12);
        assert!((r40 - 1.0475).abs() < 1e-4);
    }

    #[test]
    fn sup_exponent_gives_rho() {
        for family in [Family::Polydisk, Family::Ball] {
            let part = jsr_partials(&gens(2, unimodular(), 1), f64::INFINITY, &spec(family, 0.6), 20).unwrap();
            for &(_, r) in &part.values {
                assert!((r - 0.6).abs() < 1e-13);
            }
        }
        let part = jsr_partials(&gens(3, unimodular(), 1), f64::INFINITY, &spec(Family::Polydisk, 0.6), 20).unwrap();
        assert!(part.values.iter().all(|&(_, r)| (r - 0.6).abs() < 1e-13));
    }

    #[test]
    fn collapsed_agrees_with_enumeration() {
        for &(m, ph) in &[(1.0, 0.3), (0.6, 1.0), (1.8, 2.0)] {
            let q = QParameter::new(m, ph).unwrap();
            for n in [2, 3] {
                for family in [Family::Polydisk, Family::Ball] {
                    for p in [1.0, 2.0, 3.5, f64::INFINITY] {
                        let s = spec(family, 0.8);
                        let fast = collapsed_quantum(q, n, p, &s, 6);
                        // a non-unit coefficient defeats canonical detection
                        // while leaving word norms unchanged
                        let mut tuple = gens(n, q, 6);
                        tuple[0] = tuple[0].scale(Complex64::from_polar(1.0, 0.2));
                        let slow = jsr_partials(&tuple, p, &s, 6).unwrap();
                        assert!(!slow.collapsed && !slow.truncated);
                        for (a, b) in fast.values.iter().zip(&slow.values) {
                            assert!((a.1 - b.1).abs() < 1e-12 * a.1, "{m} {n} {p} {family:?}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn word_sum_oracle_small_degree() {
        // direct sum of ||x_alpha||^2 over all words for d = 2, n = 2
        let q = QParameter::new(0.5, 0.0).unwrap();
        let rho = 0.9;
        let mut total = 0.0;
        for w in [[1, 1], [1, 2], [2, 1], [2, 2]] {
            let k = MultiIndex::new(vec![w.iter().filter(|&&l| l == 1).count() as u32, w.iter().filter(|&&l| l == 2).count() as u32]);
            let phase = if w == [2, 1] { 1.0 / 0.5 } else { 1.0 };
            total += (phase * ball_weight(&k, q.qmod()) * rho * rho).powi(2);
        }
        let part = jsr_partials(&gens(2, q, 1), 2.0, &spec(Family::Ball, rho), 2).unwrap();
        assert!((part.values[1].1 - total.powf(0.25)).abs() < 1e-14);
        let k11 = MultiIndex::new(vec![1, 1]);
        assert!(w_q(&k11, q.qmod()) == 0.5);
    }

    #[test]
    fn homogeneity_in_rho() {
        let q = QParameter::new(0.7, 0.4).unwrap();
        for family in [Family::Polydisk, Family::Ball] {
            let a = jsr_partials(&gens(2, q, 1), 2.0, &spec(family, 0.3), 50).unwrap();
            let b = jsr_partials(&gens(2, q, 1), 2.0, &spec(family, 0.9), 50).unwrap();
            for (x, y) in a.values.iter().zip(&b.values) {
                assert!((y.1 - 3.0 * x.1).abs() < 1e-12 * y.1);
            }
        }
    }

    #[test]
    fn extrapolated_values() {
        let grid = default_grid(1.0, 12);
        let tuple = AlgebraTuple::quantum_generators(2, unimodular());
        let pd = jsr_estimate(&tuple, Family::Polydisk, 2.0, 1.0, 200, &grid).unwrap();
        let ball = jsr_estimate(&tuple, Family::Ball, 2.0, 1.0, 200, &grid).unwrap();
        assert!((1.40..=1.43).contains(&pd.extrapolated));
        assert!((0.99..=1.01).contains(&ball.extrapolated));
        assert!(!ball.any_poor_fit());
        let ratio = pd.extrapolated / ball.extrapolated;
        assert!((ratio - 2f64.sqrt()).abs() < 0.03);

        let sparse = default_grid(1.0, 12).into_iter().step_by(3).chain([grid[11]]).collect::<Vec<_>>();
        let pd_sparse = jsr_estimate(&tuple, Family::Polydisk, 2.0, 1.0, 200, &sparse).unwrap();
        assert!((pd_sparse.extrapolated - pd.extrapolated).abs() < 0.01 * pd.extrapolated);
    }

    #[test]
    fn one_variable_has_no_separation() {
        let grid = default_grid(1.0, 12);
        let tuple = AlgebraTuple::quantum_generators(1, unimodular());
        let pd = jsr_estimate(&tuple, Family::Polydisk, 2.0, 1.0, 40, &grid).unwrap();
        let ball = jsr_estimate(&tuple, Family::Ball, 2.0, 1.0, 40, &grid).unwrap();
        assert!((pd.extrapolated - ball.extrapolated).abs() < 1e-12);
        assert!((pd.extrapolated - grid[11]).abs() < 1e-12);
    }

    #[test]
    fn entire_algebra_diverges() {
        let tuple = AlgebraTuple::quantum_generators(2, unimodular());
        let est = jsr_estimate(&tuple, Family::Polydisk, 2.0, f64::INFINITY, 20, &entire_probe_grid()).unwrap();
        assert!(est.diverges && est.extrapolated.is_infinite());
    }

    #[test]
    fn free_partials() {
        let s = SeminormSpec::new(Family::FreeBall, 0.5, 1.0, 1.0).unwrap();
        let part = jsr_partials_free(&AlgebraTuple::free_generators(3).into_free(), 2.0, &s, 10).unwrap();
        assert!(part.values.iter().all(|&(_, r)| (r - 0.5 * 3f64.sqrt()).abs() < 1e-13));

        // collapsed (rho, tau) count against enumeration
        let s = SeminormSpec::new(Family::FreePolydisk, 0.5, 1.7, 1.0).unwrap();
        let canonical = AlgebraTuple::free_generators(3).into_free();
        let fast = jsr_partials_free(&canonical, 2.0, &s, 6).unwrap();
        let widened: Vec<FreeElement> = canonical
            .iter()
            .map(|g| FreeElement::from_terms(3, 6, g.terms().map(|(w, c)| (w.clone(), *c))).unwrap())
            .collect();
        let mut altered = widened.clone();
        altered[1] = altered[1].scale(Complex64::new(0.0, 1.0));
        let slow = jsr_partials_free(&altered, 2.0, &s, 6).unwrap();
        assert!(fast.collapsed && !slow.collapsed);
        for (a, b) in fast.values.iter().zip(&slow.values) {
            assert!((a.1 - b.1).abs() < 1e-12 * a.1);
        }
        let fast = jsr_partials_free(&canonical, f64::INFINITY, &s, 6).unwrap();
        let slow = jsr_partials_free(&altered, f64::INFINITY, &s, 6).unwrap();
        for (a, b) in fast.values.iter().zip(&slow.values) {
            assert!((a.1 - b.1).abs() < 1e-12 * a.1);
        }
    }

    #[test]
    fn enumeration_truncates_at_cap() {
        let s = spec(Family::Polydisk, 0.5);
        let mut tuple = gens(2, unimodular(), 3);
        tuple[1] = tuple[1].scale(Complex64::new(2.0, 0.0));
        let part = jsr_partials(&tuple, 2.0, &s, 10).unwrap();
        assert!(part.truncated);
        assert_eq!(part.values.len(), 3);
    }

    #[test]
    fn monotone_check() {
        let grid = default_grid(1.0, 12);
        let q = unimodular();
        let free = AlgebraTuple::free_generators(2);
        let quantum = AlgebraTuple::quantum_generators(2, q);
        let c = jsr_monotone_check(&free, Family::FreeBall, &quantum, Family::Ball, 2.0, 1.0, 100, &grid).unwrap();
        assert!(c.pass);
        assert!((c.source - 2f64.sqrt() * grid[11]).abs() < 1e-9);
        let same = jsr_monotone_check(&quantum, Family::Ball, &quantum, Family::Ball, 2.0, 1.0, 100, &grid).unwrap();
        assert!(same.pass && same.source == same.image);

        let scaled = match &quantum {
            AlgebraTuple::Quantum(v) => AlgebraTuple::Quantum(v.iter().map(|g| g.scale(Complex64::new(2.0, 0.0))).collect()),
            _ => unreachable!(),
        };
        assert!(matches!(
            jsr_monotone_check(&scaled, Family::Ball, &quantum, Family::Ball, 2.0, 1.0, 100, &grid),
            Err(Error::Rejected(_))
        ));
    }

    #[test]
    fn rejects_bad_exponent_and_family() {
        let g = gens(2, unimodular(), 1);
        assert!(jsr_partials(&g, 0.5, &spec(Family::Polydisk, 0.5), 5).is_err());
        assert!(jsr_partials(&g, 2.0, &spec(Family::FreeBall, 0.5), 5).is_err());
        let short = jsr_partials(&g, 2.0, &spec(Family::Polydisk, 0.5), 5).unwrap();
        assert!(fit_limit(&short).is_err());
    }

    impl AlgebraTuple {
        fn into_free(self) -> Vec<FreeElement> {
            match self {
                AlgebraTuple::Free(v) => v,
                AlgebraTuple::Quantum(_) => panic!("quantum tuple"),
            }
        }
    }
}
