//! Truncated elements of the quantum affine space `O_q^reg(C^n)`.
//!
//! Elements are sparse combinations of normal-ordered monomials
//! `x^k = x_1^{k_1} ... x_n^{k_n}` subject to `x_i x_j = q x_j x_i` for `i < j`.
//! Moving `x_j` to the right of `x_i` (`j > i`) costs a factor `q^{-1}`, so
//!
//! ```text
//! x^k x^m = q^{-sum_{i<j} k_j m_i} x^{k+m}.
//! ```
//!
//! Products above the degree cap are dropped and mark the result as
//! saturated; the flag is sticky through all further arithmetic.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qcombinatorics::{ball_weight, w_q, MultiIndex, QModulus};

/// The deformation parameter `q = modulus * e^{i phase}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QParameter {
    modulus: f64,
    phase: f64,
}

impl QParameter {
    pub fn new(modulus: f64, phase: f64) -> Result<Self> {
        if !(modulus.is_finite() && modulus > 0.0) || !phase.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "q needs positive modulus and finite phase, got ({modulus}, {phase})"
            )));
        }
        Ok(QParameter {
            modulus,
            phase: phase.rem_euclid(TAU),
        })
    }

    pub fn real(q: f64) -> Result<Self> {
        if q > 0.0 {
            QParameter::new(q, 0.0)
        } else {
            QParameter::new(-q, std::f64::consts::PI)
        }
    }

    pub fn one() -> Self {
        QParameter {
            modulus: 1.0,
            phase: 0.0,
        }
    }

    pub fn modulus(&self) -> f64 {
        self.modulus
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn qmod(&self) -> QModulus {
        QModulus::new(self.modulus).expect("modulus validated at construction")
    }

    pub fn value(&self) -> Complex64 {
        Complex64::from_polar(self.modulus, self.phase)
    }

    /// `q^e` with the phase multiplied exactly rather than by repeated products.
    pub fn pow(&self, e: i64) -> Complex64 {
        let modulus = if e.unsigned_abs() <= i32::MAX as u64 {
            self.modulus.powi(e as i32)
        } else {
            (e as f64 * self.modulus.ln()).exp()
        };
        Complex64::from_polar(modulus, (self.phase * e as f64).rem_euclid(TAU))
    }

    pub fn inverse(&self) -> QParameter {
        QParameter {
            modulus: 1.0 / self.modulus,
            phase: (-self.phase).rem_euclid(TAU),
        }
    }
}

/// Truncated element `sum_k c_k x^k` with `|k| <= cap`.
#[derive(Clone, Debug, PartialEq)]
pub struct QElement {
    n: usize,
    q: QParameter,
    cap: usize,
    coeffs: BTreeMap<MultiIndex, Complex64>,
    saturated: bool,
}

impl QElement {
    pub fn zero(n: usize, q: QParameter, cap: usize) -> Self {
        assert!(n >= 1, "dimension must be at least 1");
        QElement {
            n,
            q,
            cap,
            coeffs: BTreeMap::new(),
            saturated: false,
        }
    }

    pub fn one(n: usize, q: QParameter, cap: usize) -> Self {
        QElement::monomial(n, q, cap, MultiIndex::zero(n), Complex64::new(1.0, 0.0))
            .expect("degree 0 fits every cap")
    }

    /// The generator `x_j`, 1-based.
    pub fn generator(n: usize, q: QParameter, cap: usize, j: usize) -> Result<Self> {
        if j == 0 || j > n {
            return Err(Error::LetterOutOfRange { letter: j, n });
        }
        QElement::monomial(n, q, cap, MultiIndex::unit(n, j), Complex64::new(1.0, 0.0))
    }

    /// `c x^k`; errors when `|k|` exceeds the cap.
    pub fn monomial(
        n: usize,
        q: QParameter,
        cap: usize,
        k: MultiIndex,
        c: Complex64,
    ) -> Result<Self> {
        if k.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: k.dim(),
            });
        }
        if k.degree() > cap {
            return Err(Error::DegreeOverflow {
                degree: k.degree(),
                cap,
            });
        }
        let mut e = QElement::zero(n, q, cap);
        e.insert_add(k, c);
        Ok(e)
    }

    pub fn from_terms(
        n: usize,
        q: QParameter,
        cap: usize,
        terms: impl IntoIterator<Item = (MultiIndex, Complex64)>,
    ) -> Result<Self> {
        let mut e = QElement::zero(n, q, cap);
        for (k, c) in terms {
            e = e.add(&QElement::monomial(n, q, cap, k, c)?)?;
        }
        Ok(e)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn parameter(&self) -> QParameter {
        self.q
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn is_saturated(&self) -> bool {
        self.saturated
    }

    /// Marks the element as the truncation of an infinite series.
    pub fn into_saturated(mut self) -> Self {
        self.saturated = true;
        self
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.coeffs.iter()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, k: &MultiIndex) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    /// Highest degree carrying a nonzero coefficient (0 for the zero element).
    pub fn degree(&self) -> usize {
        self.coeffs.keys().map(MultiIndex::degree).max().unwrap_or(0)
    }

    fn insert_add(&mut self, k: MultiIndex, c: Complex64) {
        if c == Complex64::new(0.0, 0.0) {
            return;
        }
        match self.coeffs.entry(k) {
            Entry::Vacant(slot) => {
                slot.insert(c);
            }
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += c;
                if *slot.get() == Complex64::new(0.0, 0.0) {
                    slot.remove();
                }
            }
        }
    }

    fn check_compatible(&self, other: &QElement) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        if self.q != other.q {
            return Err(Error::Incompatible(format!(
                "parameters differ: {:?} vs {:?}",
                self.q, other.q
            )));
        }
        if self.cap != other.cap {
            return Err(Error::Incompatible(format!(
                "degree caps differ: {} vs {}",
                self.cap, other.cap
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &QElement) -> Result<QElement> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (k, c) in &other.coeffs {
            out.insert_add(k.clone(), *c);
        }
        out.saturated |= other.saturated;
        Ok(out)
    }

    pub fn sub(&self, other: &QElement) -> Result<QElement> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> QElement {
        let mut out = QElement::zero(self.n, self.q, self.cap);
        out.saturated = self.saturated;
        for (k, v) in &self.coeffs {
            out.insert_add(k.clone(), v * c);
        }
        out
    }

    /// Normal-ordered product, truncated at the cap.
    pub fn multiply(&self, other: &QElement) -> Result<QElement> {
        self.check_compatible(other)?;
        let mut out = QElement::zero(self.n, self.q, self.cap);
        out.saturated = self.saturated || other.saturated;
        for (k, a) in &self.coeffs {
            for (m, b) in &other.coeffs {
                let sum = k.add(m);
                if sum.degree() > self.cap {
                    out.saturated = true;
                    continue;
                }
                let phase = self.q.pow(-(k.cross_exponent(m) as i64));
                out.insert_add(sum, a * b * phase);
            }
        }
        Ok(out)
    }

    pub fn pow(&self, e: u32) -> Result<QElement> {
        let mut acc = QElement::one(self.n, self.q, self.cap);
        for _ in 0..e {
            acc = acc.multiply(self)?;
        }
        Ok(acc)
    }

    /// Drops coefficients with modulus at most `tol` times the largest one.
    pub fn chop(&self, tol: f64) -> QElement {
        let max = self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max);
        let mut out = self.clone();
        out.coeffs.retain(|_, c| c.norm() > tol * max);
        out
    }

    /// Largest coefficient-wise modulus of `self - other` over the union of
    /// supports; ignores parameters and caps.
    pub fn max_abs_diff(&self, other: &QElement) -> f64 {
        let mut worst: f64 = 0.0;
        for (k, c) in &self.coeffs {
            worst = worst.max((c - other.coeff(k)).norm());
        }
        for (k, c) in &other.coeffs {
            if !self.coeffs.contains_key(k) {
                worst = worst.max(c.norm());
            }
        }
        worst
    }

    /// Like [`QElement::max_abs_diff`] but scaled per coefficient by
    /// `max(1, |c|)`.
    pub fn max_rel_diff(&self, other: &QElement) -> f64 {
        let mut worst: f64 = 0.0;
        for (k, c) in &self.coeffs {
            let d = other.coeff(k);
            worst = worst.max((c - d).norm() / c.norm().max(d.norm()).max(1.0));
        }
        for (k, c) in &other.coeffs {
            if !self.coeffs.contains_key(k) {
                worst = worst.max(c.norm() / c.norm().max(1.0));
            }
        }
        worst
    }

    /// Same element reinterpreted with another degree cap.
    pub fn with_cap(&self, cap: usize) -> Result<QElement> {
        if self.degree() > cap {
            return Err(Error::DegreeOverflow {
                degree: self.degree(),
                cap,
            });
        }
        let mut out = self.clone();
        out.cap = cap;
        Ok(out)
    }
}

impl fmt::Display for QElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        for (i, (k, c)) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({}{:+}i)", c.re, c.im)?;
            for (j, &e) in k.entries().iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "*x{}", j + 1)?,
                    _ => write!(f, "*x{}^{}", j + 1, e)?,
                }
            }
        }
        Ok(())
    }
}

/// Which seminorm family a computation uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Polydisk,
    Ball,
    FreePolydisk,
    FreeTaylor,
    FreeBall,
    Vaksman,
    Popescu,
}

impl Family {
    pub fn is_free(self) -> bool {
        matches!(
            self,
            Family::FreePolydisk | Family::FreeTaylor | Family::FreeBall | Family::Popescu
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Polydisk => "polydisk",
            Family::Ball => "ball",
            Family::FreePolydisk => "free-polydisk",
            Family::FreeTaylor => "free-taylor",
            Family::FreeBall => "free-ball",
            Family::Vaksman => "vaksman",
            Family::Popescu => "popescu",
        }
    }
}

/// A member `||.||_rho` (or `||.||_{rho,tau}`) of one seminorm family on an
/// algebra of radius `r`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeminormSpec {
    pub family: Family,
    pub rho: f64,
    pub tau: f64,
    pub radius: f64,
}

impl SeminormSpec {
    pub fn new(family: Family, rho: f64, tau: f64, radius: f64) -> Result<Self> {
        if !(rho.is_finite() && rho > 0.0) {
            return Err(Error::InvalidParameter(format!("rho must be positive, got {rho}")));
        }
        if !(radius > 0.0) {
            return Err(Error::InvalidParameter(format!("radius must be positive, got {radius}")));
        }
        if radius.is_finite() && rho >= radius {
            return Err(Error::InvalidParameter(format!(
                "rho = {rho} must lie in (0, r) with r = {radius}"
            )));
        }
        if !(tau >= 1.0) {
            return Err(Error::InvalidParameter(format!("tau must be >= 1, got {tau}")));
        }
        Ok(SeminormSpec {
            family,
            rho,
            tau,
            radius,
        })
    }

    /// Spec on the whole quantum affine space (`r = +inf`), `tau = 1`.
    pub fn entire(family: Family, rho: f64) -> Result<Self> {
        SeminormSpec::new(family, rho, 1.0, f64::INFINITY)
    }

    /// Evaluates one of the two quantum-space families.
    pub fn norm_q(&self, a: &QElement) -> Result<NormValue> {
        match self.family {
            Family::Polydisk => Ok(polydisk_norm(a, self.rho)),
            Family::Ball => Ok(ball_norm(a, self.rho)),
            other => Err(Error::Incompatible(format!(
                "family {} is not a quantum-space weighted norm",
                other.name()
            ))),
        }
    }
}

/// A seminorm value; `lower_bound` is set when the source was truncated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormValue {
    pub value: f64,
    pub lower_bound: bool,
}

fn weighted_norm(a: &QElement, rho: f64, weight: impl Fn(&MultiIndex) -> f64) -> NormValue {
    // folded from +0.0: the zero element has norm +0
    let value = a
        .terms()
        .map(|(k, c)| c.norm() * weight(k) * rho.powi(k.degree() as i32))
        .fold(0.0, |s, x| s + x);
    NormValue {
        value,
        lower_bound: a.is_saturated(),
    }
}

/// `sum_k |c_k| w_q(k) rho^{|k|}`.
pub fn polydisk_norm(a: &QElement, rho: f64) -> NormValue {
    let qmod = a.parameter().qmod();
    weighted_norm(a, rho, |k| w_q(k, qmod))
}

/// `sum_k |c_k| ([k]_t! / [|k|]_t!)^{1/2} rho^{|k|}` with `t = |q|^{-2}`.
pub fn ball_norm(a: &QElement, rho: f64) -> NormValue {
    let qmod = a.parameter().qmod();
    weighted_norm(a, rho, |k| ball_weight(k, qmod))
}

/// The isomorphism onto the algebra with parameter `q^{-1}` sending
/// `x_i` to `x_{n+1-i}`. Each image monomial is re-normal-ordered by
/// multiplication in the target algebra.
pub fn reversal_iso(a: &QElement) -> QElement {
    let n = a.dim();
    let target_q = a.parameter().inverse();
    let mut out = QElement::zero(n, target_q, a.cap());
    out.saturated = a.is_saturated();
    for (k, c) in a.terms() {
        let mut image = QElement::one(n, target_q, a.cap());
        for (i, &e) in k.entries().iter().enumerate() {
            if e == 0 {
                continue;
            }
            let mut exps = vec![0u32; n];
            exps[n - 1 - i] = e;
            let factor = QElement::monomial(
                n,
                target_q,
                a.cap(),
                MultiIndex::new(exps),
                Complex64::new(1.0, 0.0),
            )
            .expect("image degree equals source degree");
            image = image.multiply(&factor).expect("same algebra");
        }
        out = out.add(&image.scale(*c)).expect("same algebra");
    }
    out
}

/// The automorphism `gamma_rho`: `x_i -> rho x_i`.
pub fn scale_auto(a: &QElement, rho: f64) -> QElement {
    let mut out = QElement::zero(a.dim(), a.parameter(), a.cap());
    out.saturated = a.is_saturated();
    for (k, c) in a.terms() {
        out.insert_add(k.clone(), c * rho.powi(k.degree() as i32));
    }
    out
}

/// Extremes of `ball_weight(k) / w_q(k)` over a finite range of multi-indices.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightRatio {
    pub min: f64,
    pub max: f64,
    pub argmin: MultiIndex,
    pub argmax: MultiIndex,
}

/// Scans every `k` in `n` variables with `|k| <= dmax`.
pub fn weight_ratio_scan(qmod: QModulus, n: usize, dmax: usize) -> Result<WeightRatio> {
    if qmod.get() == 1.0 {
        return Err(Error::InvalidParameter(
            "weight ratio scan needs |q| != 1".into(),
        ));
    }
    let mut best = WeightRatio {
        min: f64::INFINITY,
        max: f64::NEG_INFINITY,
        argmin: MultiIndex::zero(n),
        argmax: MultiIndex::zero(n),
    };
    for k in MultiIndex::up_to_degree(n, dmax) {
        let ratio = (ball_weight(&k, qmod).ln() - w_q(&k, qmod).ln()).exp();
        if ratio < best.min {
            best.min = ratio;
            best.argmin = k.clone();
        }
        if ratio > best.max {
            best.max = ratio;
            best.argmax = k;
        }
    }
    Ok(best)
}

#[cfg(test)]
pub(crate) mod oracle {
    //! Letter-by-letter rewriting with `x_j x_i -> q^{-1} x_i x_j` for `j > i`.
    //! Deliberately ignores the closed-form exponent.

    use num_complex::Complex64;

    pub fn normal_order(letters: &[usize], q: Complex64) -> (Vec<usize>, Complex64) {
        let mut w = letters.to_vec();
        let mut coeff = Complex64::new(1.0, 0.0);
        let q_inv = 1.0 / q;
        loop {
            let mut swapped = false;
            for i in 0..w.len().saturating_sub(1) {
                if w[i] > w[i + 1] {
                    w.swap(i, i + 1);
                    coeff *= q_inv;
                    swapped = true;
                }
            }
            if !swapped {
                return (w, coeff);
            }
        }
    }

    pub fn word_of(k: &[u32]) -> Vec<usize> {
        k.iter()
            .enumerate()
            .flat_map(|(j, &e)| std::iter::repeat_n(j + 1, e as usize))
            .collect()
    }

    pub fn counts(word: &[usize], n: usize) -> Vec<u32> {
        let mut c = vec![0u32; n];
        for &l in word {
            c[l - 1] += 1;
        }
        c
    }
}
