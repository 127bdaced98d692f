//! Word and multi-index statistics, q-integers, q-factorials and the monomial
//! weights that enter every norm in the crate.
//!
//! Weights that grow or decay geometrically in the degree are evaluated in the
//! log domain once the degree passes [`LINEAR_DEGREE_LIMIT`]; below that the
//! plain products are used and agree with the log route to rounding error.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// Largest total degree for which q-factorials are formed as plain products.
pub const LINEAR_DEGREE_LIMIT: usize = 150;

/// Exponent vector `k` of the normal-ordered monomial `x_1^{k_1} ... x_n^{k_n}`.
///
/// Ordering is graded: first by total degree, then lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        assert!(!entries.is_empty(), "multi-index needs dimension >= 1");
        MultiIndex(entries)
    }

    pub fn zero(n: usize) -> Self {
        MultiIndex::new(vec![0; n])
    }

    /// The exponent of the single generator `x_j` (1-based).
    pub fn unit(n: usize, j: usize) -> Self {
        let mut e = vec![0; n];
        e[j - 1] = 1;
        MultiIndex::new(e)
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        assert_eq!(self.dim(), other.dim());
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Index with coordinates in reverse order, `k'_{n+1-i} = k_i`.
    pub fn reversed(&self) -> MultiIndex {
        MultiIndex(self.0.iter().rev().copied().collect())
    }

    /// `sum_{i<j} k_i k_j`, the exponent in `w_q`.
    pub fn pair_exponent(&self) -> u64 {
        let mut acc = 0u64;
        let mut seen = 0u64;
        for &e in &self.0 {
            acc += seen * e as u64;
            seen += e as u64;
        }
        acc
    }

    /// `sum_{i<j} k_j m_i`: the number of adjacent transpositions needed to
    /// bring `x^k x^m` into normal order.
    pub fn cross_exponent(&self, other: &MultiIndex) -> u64 {
        assert_eq!(self.dim(), other.dim());
        let mut acc = 0u64;
        let mut m_below = 0u64;
        for (k_j, m_j) in self.0.iter().zip(&other.0) {
            acc += *k_j as u64 * m_below;
            m_below += *m_j as u64;
        }
        acc
    }

    /// All multi-indices of dimension `n` and total degree exactly `d`, in
    /// lexicographically decreasing order of the first coordinate.
    pub fn of_degree(n: usize, d: usize) -> Vec<MultiIndex> {
        fn rec(n: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            if prefix.len() + 1 == n {
                prefix.push(left);
                out.push(MultiIndex(prefix.clone()));
                prefix.pop();
                return;
            }
            for e in (0..=left).rev() {
                prefix.push(e);
                rec(n, left - e, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        rec(n, d as u32, &mut Vec::with_capacity(n), &mut out);
        out
    }

    /// All multi-indices of dimension `n` with total degree at most `d`.
    pub fn up_to_degree(n: usize, d: usize) -> Vec<MultiIndex> {
        (0..=d).flat_map(|e| MultiIndex::of_degree(n, e)).collect()
    }

    /// The nondecreasing word `1^{k_1} 2^{k_2} ... n^{k_n}`.
    pub fn canonical_word(&self) -> Word {
        let mut letters = Vec::with_capacity(self.degree());
        for (j, &e) in self.0.iter().enumerate() {
            letters.extend(std::iter::repeat_n((j + 1) as u8, e as usize));
        }
        Word(letters)
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// A word over the alphabet `{1, ..., n}`; the empty word is `*`.
///
/// Letters are stored packed, one byte each. Ordering is degree-major so that
/// words of equal length are contiguous in ordered collections.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Word(Vec<u8>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    /// Builds a word from 1-based letters.
    ///
    /// Panics on letter 0 or letters above 255.
    pub fn new(letters: &[usize]) -> Self {
        Word(
            letters
                .iter()
                .map(|&l| {
                    assert!((1..=255).contains(&l), "letter {l} not in 1..=255");
                    l as u8
                })
                .collect(),
        )
    }

    pub fn letters(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().map(|&l| l as usize)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_letter(&self) -> usize {
        self.0.iter().copied().max().unwrap_or(0) as usize
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// Index of the word among all `n^d` words of its length, letters read as
    /// base-`n` digits with the first letter most significant.
    pub fn rank(&self, n: usize) -> usize {
        self.0
            .iter()
            .fold(0usize, |acc, &l| acc * n + (l as usize - 1))
    }

    /// Inverse of [`Word::rank`].
    pub fn unrank(mut index: usize, n: usize, d: usize) -> Word {
        let mut letters = vec![0u8; d];
        for slot in letters.iter_mut().rev() {
            *slot = (index % n + 1) as u8;
            index /= n;
        }
        Word(letters)
    }

    /// All `n^d` words of length `d`, in rank order.
    pub fn all_of_length(n: usize, d: usize) -> impl Iterator<Item = Word> {
        let count = n.checked_pow(d as u32).expect("word count overflows usize");
        (0..count).map(move |i| Word::unrank(i, n, d))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "*");
        }
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// A positive real standing for `|q|` or a quantity derived from it such as
/// `|q|^{-2}`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct QModulus(f64);

impl QModulus {
    pub fn new(t: f64) -> Result<Self> {
        if t.is_finite() && t > 0.0 {
            Ok(QModulus(t))
        } else {
            Err(Error::InvalidParameter(format!(
                "modulus must be positive and finite, got {t}"
            )))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn recip(self) -> QModulus {
        QModulus(1.0 / self.0)
    }

    /// `|q|^{-2}` for a modulus `|q|`.
    pub fn ball_base(self) -> QModulus {
        QModulus(self.0.powi(-2))
    }
}

/// Number of adjacent letter changes; `|alpha| - 1` for words of length 0 or 1.
pub fn s_stat(word: &Word) -> i64 {
    if word.len() < 2 {
        return word.len() as i64 - 1;
    }
    word.0.windows(2).filter(|w| w[0] != w[1]).count() as i64
}

/// Letter counts of `word` over `{1, ..., n}`.
pub fn p_proj(word: &Word, n: usize) -> Result<MultiIndex> {
    let mut counts = vec![0u32; n];
    for l in word.letters() {
        if l == 0 || l > n {
            return Err(Error::LetterOutOfRange { letter: l, n });
        }
        counts[l - 1] += 1;
    }
    Ok(MultiIndex(counts))
}

/// Number of pairs `s < t` with `alpha_s > alpha_t`.
pub fn inv_count(word: &Word) -> u64 {
    // counting sort keeps this linear in the length for small alphabets
    let n = word.max_letter();
    let mut seen = vec![0u64; n + 1];
    let mut inversions = 0u64;
    for l in word.letters() {
        inversions += seen[l + 1..].iter().sum::<u64>();
        seen[l] += 1;
    }
    inversions
}

/// `[m]_t = 1 + t + ... + t^{m-1}`, summed with Neumaier compensation.
pub fn q_int(m: u64, t: QModulus) -> f64 {
    let t = t.0;
    if t == 1.0 {
        return m as f64;
    }
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    let mut term = 1.0f64;
    for _ in 0..m {
        let next = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - next) + term;
        } else {
            comp += (term - next) + sum;
        }
        sum = next;
        term *= t;
    }
    sum + comp
}

/// `ln [m]_t`, finite for every `m >= 1` and `t > 0`.
pub fn ln_q_int(m: u64, t: QModulus) -> f64 {
    if m == 0 {
        return f64::NEG_INFINITY;
    }
    if t.0 <= 1.0 {
        q_int(m, t).ln()
    } else {
        // [m]_t = t^{m-1} [m]_{1/t}
        (m - 1) as f64 * t.0.ln() + q_int(m, t.recip()).ln()
    }
}

/// `ln [m]_t!` for a single integer.
pub fn ln_q_factorial_scalar(m: u64, t: QModulus) -> f64 {
    (1..=m).map(|j| ln_q_int(j, t)).sum()
}

/// `ln [k]_t! = sum_i ln [k_i]_t!`.
pub fn ln_q_factorial(k: &MultiIndex, t: QModulus) -> f64 {
    k.0.iter().map(|&e| ln_q_factorial_scalar(e as u64, t)).sum()
}

fn q_factorial_linear(k: &MultiIndex, t: QModulus) -> f64 {
    k.0.iter()
        .map(|&e| (1..=e as u64).map(|j| q_int(j, t)).product::<f64>())
        .product()
}

/// `[k]_t! = [k_1]_t! ... [k_n]_t!` with `[0]_t! = 1`.
pub fn q_factorial(k: &MultiIndex, t: QModulus) -> Result<f64> {
    let value = if k.degree() <= LINEAR_DEGREE_LIMIT {
        q_factorial_linear(k, t)
    } else {
        ln_q_factorial(k, t).exp()
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Overflow {
            ln_value: ln_q_factorial(k, t),
        })
    }
}

/// `ln` of the q-multinomial `[|k|]_t! / [k]_t!`, which equals
/// `ln sum_{alpha in p^{-1}(k)} t^{inv(alpha)}`.
pub fn ln_q_multinomial(k: &MultiIndex, t: QModulus) -> f64 {
    ln_q_factorial_scalar(k.degree() as u64, t) - ln_q_factorial(k, t)
}

/// Polydisk weight: `1` if `|q| >= 1`, else `|q|^{sum_{i<j} k_i k_j}`.
pub fn w_q(k: &MultiIndex, qmod: QModulus) -> f64 {
    if qmod.0 >= 1.0 {
        1.0
    } else {
        let e = k.pair_exponent();
        if e <= i32::MAX as u64 {
            qmod.0.powi(e as i32)
        } else {
            (e as f64 * qmod.0.ln()).exp()
        }
    }
}

/// Ball weight `([k]_t! / [|k|]_t!)^{1/2}` with `t = |q|^{-2}`.
pub fn ball_weight(k: &MultiIndex, qmod: QModulus) -> f64 {
    let t = qmod.ball_base();
    let d = k.degree();
    if d <= LINEAR_DEGREE_LIMIT {
        let num = q_factorial_linear(k, t);
        let den = (1..=d as u64).map(|j| q_int(j, t)).product::<f64>();
        if num.is_normal() && den.is_normal() {
            return (num / den).sqrt();
        }
    }
    (-0.5 * ln_q_multinomial(k, t)).exp()
}

/// Domains for the classical monomial suprema.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    Polydisk,
    Ball,
}

/// `sup |z^k|` over the polydisk or ball of radius `r`.
pub fn monomial_sup(k: &MultiIndex, domain: Domain, r: f64) -> f64 {
    let d = k.degree() as f64;
    match domain {
        Domain::Polydisk => r.powf(d),
        Domain::Ball => {
            if d == 0.0 {
                return 1.0;
            }
            let ln_ratio: f64 = k
                .0
                .iter()
                .filter(|&&e| e > 0)
                .map(|&e| e as f64 * (e as f64 / d).ln())
                .sum();
            (0.5 * ln_ratio + d * r.ln()).exp()
        }
    }
}

pub(crate) fn ln_factorial(m: u64) -> f64 {
    (2..=m).map(|j| (j as f64).ln()).sum()
}

/// `[(k!/|k|!) / (k^k/|k|^{|k|})]^{1/(2|k|)}`, the per-degree ratio between
/// the two classical ball weights.
pub fn stirling_ratio(k: &MultiIndex) -> Result<f64> {
    let d = k.degree();
    if d == 0 {
        return Err(Error::InvalidParameter(
            "stirling_ratio needs |k| >= 1".into(),
        ));
    }
    let ln_fact: f64 =
        k.0.iter().map(|&e| ln_factorial(e as u64)).sum::<f64>() - ln_factorial(d as u64);
    let ln_pow: f64 = k
        .0
        .iter()
        .filter(|&&e| e > 0)
        .map(|&e| e as f64 * (e as f64 / d as f64).ln())
        .sum();
    Ok(((ln_fact - ln_pow) / (2.0 * d as f64)).exp())
}

/// Binomial coefficient as `f64`.
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
