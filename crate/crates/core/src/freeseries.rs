//! Truncated free series `sum_alpha c_alpha zeta_alpha` over words in
//! `zeta_1, ..., zeta_n`, their norms, evaluation at operator tuples and the
//! quotient map onto the quantum affine space.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::qcombinatorics::{inv_count, p_proj, s_stat, MultiIndex, Word};
use crate::qspace::{NormValue, QElement, QParameter};

/// Seed used by [`popescu_norm_lower`].
pub const POPESCU_SEED: u64 = 0x5eed_f0c5;

/// Largest dimension of the truncated free shift added to the Popescu trials.
pub const FREE_SHIFT_MAX_DIM: usize = 1024;

/// Truncated free series with words of length at most `cap`.
#[derive(Clone, Debug, PartialEq)]
pub struct FreeElement {
    n: usize,
    cap: usize,
    coeffs: BTreeMap<Word, Complex64>,
    saturated: bool,
}

impl FreeElement {
    pub fn zero(n: usize, cap: usize) -> Self {
        assert!(n >= 1, "dimension must be at least 1");
        FreeElement {
            n,
            cap,
            coeffs: BTreeMap::new(),
            saturated: false,
        }
    }

    pub fn one(n: usize, cap: usize) -> Self {
        FreeElement::word(n, cap, Word::empty(), Complex64::new(1.0, 0.0))
            .expect("empty word fits every cap")
    }

    /// The generator `zeta_j`, 1-based.
    pub fn generator(n: usize, cap: usize, j: usize) -> Result<Self> {
        FreeElement::word(n, cap, Word::new(&[j]), Complex64::new(1.0, 0.0))
    }

    /// `c zeta_alpha`.
    pub fn word(n: usize, cap: usize, w: Word, c: Complex64) -> Result<Self> {
        if let Some(l) = w.letters().find(|&l| l > n) {
            return Err(Error::LetterOutOfRange { letter: l, n });
        }
        if w.len() > cap {
            return Err(Error::DegreeOverflow {
                degree: w.len(),
                cap,
            });
        }
        let mut e = FreeElement::zero(n, cap);
        e.insert_add(w, c);
        Ok(e)
    }

    pub fn from_terms(
        n: usize,
        cap: usize,
        terms: impl IntoIterator<Item = (Word, Complex64)>,
    ) -> Result<Self> {
        let mut e = FreeElement::zero(n, cap);
        for (w, c) in terms {
            e = e.add(&FreeElement::word(n, cap, w, c)?)?;
        }
        Ok(e)
    }

    /// Truncation to degree `cap` of the series with coefficients `f(alpha)`.
    /// The result is marked saturated because it stands for an infinite series.
    pub fn series_from_fn(n: usize, cap: usize, f: impl Fn(&Word) -> Complex64) -> Self {
        let mut e = FreeElement::zero(n, cap);
        for d in 0..=cap {
            for w in Word::all_of_length(n, d) {
                let c = f(&w);
                e.insert_add(w, c);
            }
        }
        e.saturated = true;
        e
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn is_saturated(&self) -> bool {
        self.saturated
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &Complex64)> {
        self.coeffs.iter()
    }

    pub fn coeff(&self, w: &Word) -> Complex64 {
        self.coeffs.get(w).copied().unwrap_or_default()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.keys().map(Word::len).max().unwrap_or(0)
    }

    /// Terms of length exactly `d`; contiguous in the degree-major order.
    pub fn degree_slice(&self, d: usize) -> impl Iterator<Item = (&Word, &Complex64)> {
        let start = Word::unrank(0, self.n, d);
        self.coeffs
            .range(start..)
            .take_while(move |(w, _)| w.len() == d)
    }

    /// The homogeneous component of degree `d` as its own element.
    pub fn homogeneous_part(&self, d: usize) -> FreeElement {
        let mut out = FreeElement::zero(self.n, self.cap);
        for (w, c) in self.degree_slice(d) {
            out.coeffs.insert(w.clone(), *c);
        }
        out.saturated = self.saturated;
        out
    }

    /// Degrees that carry at least one nonzero coefficient.
    pub fn support_degrees(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self.coeffs.keys().map(Word::len).collect();
        out.dedup();
        out
    }

    fn insert_add(&mut self, w: Word, c: Complex64) {
        if c == Complex64::new(0.0, 0.0) {
            return;
        }
        match self.coeffs.entry(w) {
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

    fn check_compatible(&self, other: &FreeElement) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        if self.cap != other.cap {
            return Err(Error::Incompatible(format!(
                "degree caps differ: {} vs {}",
                self.cap, other.cap
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &FreeElement) -> Result<FreeElement> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (w, c) in &other.coeffs {
            out.insert_add(w.clone(), *c);
        }
        out.saturated |= other.saturated;
        Ok(out)
    }

    pub fn sub(&self, other: &FreeElement) -> Result<FreeElement> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> FreeElement {
        let mut out = FreeElement::zero(self.n, self.cap);
        out.saturated = self.saturated;
        for (w, v) in &self.coeffs {
            out.insert_add(w.clone(), v * c);
        }
        out
    }

    /// Concatenation product, truncated at the cap.
    pub fn concat_multiply(&self, other: &FreeElement) -> Result<FreeElement> {
        self.check_compatible(other)?;
        let mut out = FreeElement::zero(self.n, self.cap);
        out.saturated = self.saturated || other.saturated;
        for (a, x) in &self.coeffs {
            for (b, y) in &other.coeffs {
                if a.len() + b.len() > self.cap {
                    out.saturated = true;
                    continue;
                }
                out.insert_add(a.concat(b), x * y);
            }
        }
        Ok(out)
    }

    pub fn max_abs_diff(&self, other: &FreeElement) -> f64 {
        let mut worst: f64 = 0.0;
        for (w, c) in &self.coeffs {
            worst = worst.max((c - other.coeff(w)).norm());
        }
        for (w, c) in &other.coeffs {
            if !self.coeffs.contains_key(w) {
                worst = worst.max(c.norm());
            }
        }
        worst
    }

    pub fn chop(&self, tol: f64) -> FreeElement {
        let max = self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max);
        let mut out = self.clone();
        out.coeffs.retain(|_, c| c.norm() > tol * max);
        out
    }
}

/// `sum |c_alpha| rho^{|alpha|} tau^{s(alpha)+1}`.
pub fn free_polydisk_norm(a: &FreeElement, rho: f64, tau: f64) -> NormValue {
    let value = a
        .terms()
        .map(|(w, c)| c.norm() * rho.powi(w.len() as i32) * tau.powi((s_stat(w) + 1) as i32))
        .fold(0.0, |s, x| s + x);
    NormValue {
        value,
        lower_bound: a.is_saturated(),
    }
}

/// `sum |c_alpha| rho^{|alpha|}`.
pub fn taylor_norm(a: &FreeElement, rho: f64) -> NormValue {
    let value = a
        .terms()
        .map(|(w, c)| c.norm() * rho.powi(w.len() as i32))
        .fold(0.0, |s, x| s + x);
    NormValue {
        value,
        lower_bound: a.is_saturated(),
    }
}

/// Squared coefficient mass of each fiber `p^{-1}(k)`.
pub(crate) fn fiber_masses(a: &FreeElement) -> BTreeMap<MultiIndex, f64> {
    let mut fibers: BTreeMap<MultiIndex, f64> = BTreeMap::new();
    for (w, c) in a.terms() {
        let k = p_proj(w, a.dim()).expect("letters validated on insert");
        *fibers.entry(k).or_default() += c.norm_sqr();
    }
    fibers
}

/// `sum_k (sum_{alpha in p^{-1}(k)} |c_alpha|^2)^{1/2} rho^{|k|}`.
pub fn free_ball_norm(a: &FreeElement, rho: f64) -> NormValue {
    let value = fiber_masses(a)
        .iter()
        .map(|(k, mass)| mass.sqrt() * rho.powi(k.degree() as i32))
        .fold(0.0, |s, x| s + x);
    NormValue {
        value,
        lower_bound: a.is_saturated(),
    }
}

/// Degree-wise Cauchy-Hadamard quantities of a truncated series.
#[derive(Clone, Debug, PartialEq)]
pub struct RadiusPartials {
    /// `(d, (sum_{|alpha|=d} |c_alpha|^2)^{1/(2d)})` for nonempty degrees `d >= 1`.
    pub partials: Vec<(usize, f64)>,
    /// `+inf` for polynomials, else the reciprocal of the last partial.
    pub estimate: f64,
}

pub fn radius_partials(a: &FreeElement, d_max: usize) -> Result<RadiusPartials> {
    if d_max > a.cap() {
        return Err(Error::InvalidParameter(format!(
            "d_max = {d_max} exceeds the cap {}",
            a.cap()
        )));
    }
    let partials: Vec<(usize, f64)> = (1..=d_max)
        .filter_map(|d| {
            let mass: f64 = a.degree_slice(d).map(|(_, c)| c.norm_sqr()).sum();
            (mass > 0.0).then(|| (d, mass.powf(1.0 / (2.0 * d as f64))))
        })
        .collect();
    let estimate = if !a.is_saturated() {
        f64::INFINITY
    } else {
        match partials.last() {
            Some(&(_, p)) => 1.0 / p,
            None => f64::INFINITY,
        }
    };
    Ok(RadiusPartials { partials, estimate })
}

/// An `n`-tuple of square matrices of a common size.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorTuple {
    mats: Vec<DMatrix<Complex64>>,
}

impl OperatorTuple {
    pub fn new(mats: Vec<DMatrix<Complex64>>) -> Result<Self> {
        let first = mats
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty operator tuple".into()))?;
        let m = first.nrows();
        if m == 0 {
            return Err(Error::InvalidParameter("matrices must be at least 1x1".into()));
        }
        for t in &mats {
            if t.nrows() != m || t.ncols() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: if t.nrows() != m { t.nrows() } else { t.ncols() },
                });
            }
        }
        Ok(OperatorTuple { mats })
    }

    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }

    pub fn size(&self) -> usize {
        self.mats[0].nrows()
    }

    pub fn matrices(&self) -> &[DMatrix<Complex64>] {
        &self.mats
    }

    pub fn scaled(&self, s: f64) -> OperatorTuple {
        OperatorTuple {
            mats: self.mats.iter().map(|t| t * Complex64::new(s, 0.0)).collect(),
        }
    }

    /// `T_alpha = T_{alpha_1} ... T_{alpha_d}`.
    pub fn word_product(&self, w: &Word) -> DMatrix<Complex64> {
        let mut acc = DMatrix::identity(self.size(), self.size());
        for l in w.letters() {
            acc *= &self.mats[l - 1];
        }
        acc
    }
}

/// Row norm `||sum_i T_i T_i^*||^{1/2}`.
pub fn row_norm(t: &OperatorTuple) -> f64 {
    let m = t.size();
    let mut gram = DMatrix::<Complex64>::zeros(m, m);
    for ti in t.matrices() {
        gram += ti * ti.adjoint();
    }
    let top = gram
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(0.0f64, f64::max);
    top.max(0.0).sqrt()
}

/// Largest singular value of a square complex matrix.
pub fn spectral_norm(m: &DMatrix<Complex64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

/// `a(T)` together with a divergence warning for truncated series.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub value: DMatrix<Complex64>,
    pub divergence_warning: bool,
}

/// `sum_d sum_{|alpha|=d} c_alpha T_alpha`.
///
/// For a saturated series the warning is raised when the row norm reaches the
/// estimated radius of convergence; the truncated sum is returned regardless.
pub fn evaluate(a: &FreeElement, t: &OperatorTuple) -> Result<Evaluation> {
    if t.len() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: t.len(),
        });
    }
    let m = t.size();
    let mut value = DMatrix::<Complex64>::zeros(m, m);
    let mut prefix: BTreeMap<Word, DMatrix<Complex64>> = BTreeMap::new();
    prefix.insert(Word::empty(), DMatrix::identity(m, m));
    for (w, c) in a.terms() {
        let tw = prefix_product(&mut prefix, t, w);
        value += tw * *c;
    }
    let divergence_warning = a.is_saturated() && {
        let radius = radius_partials(a, a.degree())?.estimate;
        row_norm(t) >= radius
    };
    Ok(Evaluation {
        value,
        divergence_warning,
    })
}

fn prefix_product(
    cache: &mut BTreeMap<Word, DMatrix<Complex64>>,
    t: &OperatorTuple,
    w: &Word,
) -> DMatrix<Complex64> {
    if let Some(m) = cache.get(w) {
        return m.clone();
    }
    let letters: Vec<usize> = w.letters().collect();
    let head = Word::new(&letters[..letters.len() - 1]);
    let last = letters[letters.len() - 1];
    let product = prefix_product(cache, t, &head) * &t.matrices()[last - 1];
    cache.insert(w.clone(), product.clone());
    product
}

/// The left creation operators on words of length at most `depth`.
///
/// The truncation is a compression to a co-invariant subspace, so it is a
/// tuple of row norm 1 on which evaluation stays multiplicative.
pub fn truncated_free_shift(n: usize, depth: usize) -> OperatorTuple {
    let words: Vec<Word> = (0..=depth).flat_map(|d| Word::all_of_length(n, d)).collect();
    let index: BTreeMap<&Word, usize> = words.iter().enumerate().map(|(i, w)| (w, i)).collect();
    let dim = words.len();
    let mats = (1..=n)
        .map(|j| {
            let mut m = DMatrix::<Complex64>::zeros(dim, dim);
            let letter = Word::new(&[j]);
            for (col, w) in words.iter().enumerate() {
                if w.len() < depth {
                    let row = index[&letter.concat(w)];
                    m[(row, col)] = Complex64::new(1.0, 0.0);
                }
            }
            m
        })
        .collect();
    OperatorTuple { mats }
}

fn ginibre_tuple(rng: &mut ChaCha8Rng, n: usize, m: usize) -> OperatorTuple {
    let mats = (0..n)
        .map(|_| {
            DMatrix::from_fn(m, m, |_, _| {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                Complex64::new(re, im)
            })
        })
        .collect();
    OperatorTuple { mats }
}

/// Lower bound for `sup { ||a(T)|| : ||T|| <= rho }`.
///
/// Trials are complex Ginibre `m x m` tuples rescaled to row norm `rho`, plus
/// the truncated free shift at depth `deg(a)` when its dimension is at most
/// [`FREE_SHIFT_MAX_DIM`]. Every trial is admissible, so the result never
/// exceeds the supremum.
pub fn popescu_norm_lower(a: &FreeElement, rho: f64, trials: usize, m: usize) -> Result<f64> {
    popescu_norm_lower_seeded(a, rho, trials, m, POPESCU_SEED)
}

pub fn popescu_norm_lower_seeded(
    a: &FreeElement,
    rho: f64,
    trials: usize,
    m: usize,
    seed: u64,
) -> Result<f64> {
    if a.is_saturated() {
        return Err(Error::InvalidParameter(
            "Popescu norm estimate needs a polynomial".into(),
        ));
    }
    if !(rho > 0.0) {
        return Err(Error::InvalidParameter(format!("rho must be positive, got {rho}")));
    }
    if a.is_zero() {
        return Ok(0.0);
    }
    let n = a.dim();
    let mut best: f64 = 0.0;
    let depth = a.degree();
    let shift_dim: usize = (0..=depth).map(|d| n.pow(d as u32)).sum();
    if shift_dim <= FREE_SHIFT_MAX_DIM {
        let shift = truncated_free_shift(n, depth).scaled(rho);
        best = best.max(spectral_norm(&evaluate(a, &shift)?.value));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let t = ginibre_tuple(&mut rng, n, m.max(1));
        let rn = row_norm(&t);
        if rn == 0.0 {
            continue;
        }
        let t = t.scaled(rho / rn);
        best = best.max(spectral_norm(&evaluate(a, &t)?.value));
    }
    Ok(best)
}

/// The quotient homomorphism `zeta_alpha -> q^{-inv(alpha)} x^{p(alpha)}`.
pub fn normal_order_project(a: &FreeElement, q: QParameter) -> QElement {
    let mut out = QElement::zero(a.dim(), q, a.cap());
    for (w, c) in a.terms() {
        let k = p_proj(w, a.dim()).expect("letters validated on insert");
        let image = QElement::monomial(a.dim(), q, a.cap(), k, c * q.pow(-(inv_count(w) as i64)))
            .expect("degree within cap");
        out = out.add(&image).expect("same algebra");
    }
    if a.is_saturated() {
        out = out.into_saturated();
    }
    out
}


#[cfg(test)]
mod props {
    use super::*;
    use crate::qspace::{ball_norm, polydisk_norm};
    use proptest::prelude::*;

    fn element(n: usize) -> impl Strategy<Value = FreeElement> {
        prop::collection::vec((prop::collection::vec(1..=n, 0..=3), -1.0..1.0f64, -1.0..1.0f64), 0..6).prop_map(
            move |terms| {
                FreeElement::from_terms(
                    n,
                    6,
                    terms.into_iter().map(|(l, re, im)| (Word::new(&l), Complex64::new(re, im))),
                )
                .unwrap()
            },
        )
    }

    fn size(a: &QElement) -> f64 {
        a.terms().map(|(_, c)| c.norm()).fold(1.0, f64::max)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn projection_is_a_homomorphism(
            a in element(3), b in element(3), m in 0.3..2.5f64, ph in -3.0..3.0f64,
        ) {
            let q = QParameter::new(m, ph).unwrap();
            let lhs = normal_order_project(&a.concat_multiply(&b).unwrap(), q);
            let rhs = normal_order_project(&a, q).multiply(&normal_order_project(&b, q)).unwrap();
            prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12 * size(&lhs));
        }

        #[test]
        fn projection_contracts(a in element(2), m in 0.3..2.5f64, ph in -3.0..3.0f64, rho in 0.1..1.5f64) {
            let image = normal_order_project(&a, QParameter::new(m, ph).unwrap());
            let slack = 1.0 + 1e-12;
            prop_assert!(polydisk_norm(&image, rho).value <= taylor_norm(&a, rho).value * slack);
            prop_assert!(ball_norm(&image, rho).value <= free_ball_norm(&a, rho).value * slack);
        }

        #[test]
        fn norms_are_seminorms(a in element(2), b in element(2), rho in 0.1..1.5f64, tau in 1.0..3.0f64, s in -3.0..3.0f64) {
            let sum = a.add(&b).unwrap();
            let scaled = a.scale(Complex64::new(s, 0.5));
            let factor = Complex64::new(s, 0.5).norm();
            type Norm = Box<dyn Fn(&FreeElement) -> f64>;
            let norms: [Norm; 3] = [
                Box::new(move |x| free_polydisk_norm(x, rho, tau).value),
                Box::new(move |x| taylor_norm(x, rho).value),
                Box::new(move |x| free_ball_norm(x, rho).value),
            ];
            for norm in &norms {
                prop_assert!(norm(&sum) <= (norm(&a) + norm(&b)) * (1.0 + 1e-12) + 1e-15);
                prop_assert!((norm(&scaled) - factor * norm(&a)).abs() <= 1e-12 * (1.0 + norm(&scaled)));
            }
        }
    }
}
