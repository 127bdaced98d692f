//! Quotient norms of the ideal generated by `zeta_i zeta_j - q zeta_j zeta_i`.
//!
//! The ideal is graded, so its degree-`d` slice is spanned by the finitely
//! many vectors `zeta_beta (zeta_i zeta_j - q zeta_j zeta_i) zeta_gamma` with
//! `|beta| + |gamma| = d - 2`. For a target series the quotient norm is the
//! infimum of a lift norm over `target + span(slice)`; this module solves
//! that convex program on the coefficients of the lift.
//!
//! All lift norms used here are sums of weighted Euclidean norms over groups
//! of words: singletons for the Taylor and `(rho, tau)` norms, fibers of the
//! letter-count map for the free ball norm. The program
//!
//! ```text
//! minimise  sum_g w_g ||c_g||_2   subject to  c - target in span(slice)
//! ```
//!
//! is solved by Douglas-Rachford splitting between the group shrinkage
//! operator and the orthogonal projection onto the affine set. The problem
//! splits into independent blocks (connected components of the supports of
//! the spanning vectors, merged along groups), each rescaled to unit size.

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::freeseries::FreeElement;
use crate::qcombinatorics::{binomial, p_proj, s_stat, MultiIndex, Word};
use crate::qspace::QParameter;

/// Degree-`d` slice of the ideal.
#[derive(Clone, Debug)]
pub struct IdealSlice {
    n: usize,
    q: QParameter,
    degree: usize,
    vectors: Vec<FreeElement>,
    by_word: HashMap<Word, Vec<usize>>,
}

impl IdealSlice {
    /// Enumerates every `beta`, `gamma` and `i < j`; empty for `d < 2`.
    pub fn build(n: usize, q: QParameter, d: usize) -> IdealSlice {
        let mut vectors = Vec::new();
        if d >= 2 {
            for left in 0..=d - 2 {
                let right = d - 2 - left;
                for beta in Word::all_of_length(n, left) {
                    for gamma in Word::all_of_length(n, right) {
                        for i in 1..=n {
                            for j in i + 1..=n {
                                let ij = beta.concat(&Word::new(&[i, j])).concat(&gamma);
                                let ji = beta.concat(&Word::new(&[j, i])).concat(&gamma);
                                let v = FreeElement::from_terms(
                                    n,
                                    d,
                                    [(ij, Complex64::new(1.0, 0.0)), (ji, -q.value())],
                                )
                                .expect("letters in range");
                                vectors.push(v);
                            }
                        }
                    }
                }
            }
        }
        let mut by_word: HashMap<Word, Vec<usize>> = HashMap::new();
        for (idx, v) in vectors.iter().enumerate() {
            for (w, _) in v.terms() {
                by_word.entry(w.clone()).or_default().push(idx);
            }
        }
        IdealSlice {
            n,
            q,
            degree: d,
            vectors,
            by_word,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn parameter(&self) -> QParameter {
        self.q
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn vectors(&self) -> &[FreeElement] {
        &self.vectors
    }

    /// `n^d - C(d+n-1, n-1)`: the number of words minus the number of
    /// normal-ordered monomials of degree `d`.
    pub fn expected_rank(n: usize, d: usize) -> usize {
        let words = n.pow(d as u32);
        let monomials = binomial((d + n - 1) as u64, (n - 1) as u64).round() as usize;
        words - monomials
    }

    /// Numerical rank of the spanning set.
    pub fn rank(&self) -> usize {
        let all: Vec<Word> = Word::all_of_length(self.n, self.degree).collect();
        let blocks = Blocks::from_words(self, &all, |_| None);
        blocks.iter().map(|b| b.basis.len()).sum()
    }
}

/// Ideal slices for every degree up to a cap.
#[derive(Clone, Debug)]
pub struct SliceSet {
    n: usize,
    q: QParameter,
    cap: usize,
    slices: BTreeMap<usize, IdealSlice>,
}

impl SliceSet {
    pub fn new(n: usize, q: QParameter, cap: usize) -> SliceSet {
        let slices = (0..=cap).map(|d| (d, IdealSlice::build(n, q, d))).collect();
        SliceSet { n, q, cap, slices }
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

    pub fn slice(&self, d: usize) -> Option<&IdealSlice> {
        self.slices.get(&d)
    }
}

/// Which lift norm the quotient is taken of.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LiftNorm {
    /// `sum |c_alpha| rho^{|alpha|}`.
    Taylor,
    /// `sum |c_alpha| rho^{|alpha|} tau^{s(alpha)+1}`.
    Polydisk { tau: f64 },
    /// `sum_k (sum_{p(alpha)=k} |c_alpha|^2)^{1/2} rho^{|k|}`.
    FreeBall,
}

/// How a target with several degrees is handled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decomposition {
    /// One solve per homogeneous component; values are summed.
    PerDegree,
    /// All degrees in a single problem.
    Joint,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    pub max_iter: usize,
    /// Stop once the Douglas-Rachford step falls below this (relative).
    pub tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iter: 100_000,
            tol: 1e-10,
        }
    }
}

/// Outcome of a quotient-norm solve.
#[derive(Clone, Debug)]
pub struct QuotientResult {
    /// Lift norm of the returned feasible lift.
    pub value: f64,
    /// Dual certificate: the quotient norm is at least this.
    pub lower_bound: f64,
    /// The minimising lift, `target + (element of the ideal)`.
    pub lift: FreeElement,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
    /// Set when the target was a truncated series.
    pub saturated: bool,
}

impl QuotientResult {
    pub fn gap(&self) -> f64 {
        self.value - self.lower_bound
    }
}

/// Quotient of the free ball norm.
pub fn quotient_norm_l2(target: &FreeElement, rho: f64, slices: &SliceSet) -> Result<QuotientResult> {
    quotient_norm(
        target,
        rho,
        LiftNorm::FreeBall,
        slices,
        SolverConfig::default(),
        Decomposition::PerDegree,
    )
}

/// Quotient of the Taylor norm (`tau = None`) or of the `(rho, tau)` norm.
pub fn quotient_norm_l1(
    target: &FreeElement,
    rho: f64,
    tau: Option<f64>,
    slices: &SliceSet,
) -> Result<QuotientResult> {
    let norm = match tau {
        None => LiftNorm::Taylor,
        Some(tau) => LiftNorm::Polydisk { tau },
    };
    quotient_norm(
        target,
        rho,
        norm,
        slices,
        SolverConfig::default(),
        Decomposition::PerDegree,
    )
}

pub fn quotient_norm(
    target: &FreeElement,
    rho: f64,
    norm: LiftNorm,
    slices: &SliceSet,
    config: SolverConfig,
    mode: Decomposition,
) -> Result<QuotientResult> {
    if target.dim() != slices.dim() {
        return Err(Error::DimensionMismatch {
            expected: slices.dim(),
            found: target.dim(),
        });
    }
    if target.degree() > slices.cap() {
        return Err(Error::DegreeOverflow {
            degree: target.degree(),
            cap: slices.cap(),
        });
    }
    if !(rho > 0.0) {
        return Err(Error::InvalidParameter(format!("rho must be positive, got {rho}")));
    }
    if let LiftNorm::Polydisk { tau } = norm {
        if !(tau >= 1.0) {
            return Err(Error::InvalidParameter(format!("tau must be >= 1, got {tau}")));
        }
    }

    let degrees = target.support_degrees();
    let groups: Vec<Vec<usize>> = match mode {
        Decomposition::Joint => vec![degrees.clone()],
        Decomposition::PerDegree => degrees.iter().map(|&d| vec![d]).collect(),
    };

    let mut total = QuotientResult {
        value: 0.0,
        lower_bound: 0.0,
        lift: FreeElement::zero(target.dim(), target.cap()),
        iterations: 0,
        residual: 0.0,
        converged: true,
        saturated: target.is_saturated(),
    };
    for degs in groups {
        let mut blocks = Vec::new();
        for &d in &degs {
            let slice = slices.slice(d).expect("slice built up to cap");
            let part = target.homogeneous_part(d);
            let support: Vec<Word> = part.terms().map(|(w, _)| w.clone()).collect();
            let group_key = |w: &Word| match norm {
                LiftNorm::FreeBall => Some(p_proj(w, slice.dim()).expect("letters in range")),
                _ => None,
            };
            let mut b = Blocks::from_words(slice, &support, group_key);
            blocks.append(&mut b.0);
        }
        let outcome = solve_blocks(&blocks, target, rho, norm, config);
        total.value += outcome.value;
        total.lower_bound += outcome.lower_bound;
        total.iterations = total.iterations.max(outcome.iterations);
        total.residual = total.residual.max(outcome.residual);
        total.converged &= outcome.converged;
        total.lift = total.lift.add(&outcome.lift)?;
    }
    Ok(total)
}

/// One independent piece of the optimisation.
#[derive(Clone, Debug)]
struct Block {
    words: Vec<Word>,
    /// Orthonormal basis of the span of the slice vectors inside the block.
    basis: Vec<Vec<Complex64>>,
}

#[derive(Clone, Debug)]
struct Blocks(Vec<Block>);

impl Blocks {
    fn iter(&self) -> impl Iterator<Item = &Block> {
        self.0.iter()
    }

    /// Closes `seed` under "shares a spanning vector" and, when `group_key`
    /// returns `Some`, under "same group"; then splits into components.
    fn from_words(
        slice: &IdealSlice,
        seed: &[Word],
        group_key: impl Fn(&Word) -> Option<MultiIndex>,
    ) -> Blocks {
        let mut index: HashMap<Word, usize> = HashMap::new();
        let mut words: Vec<Word> = Vec::new();
        let mut queue: Vec<Word> = seed.to_vec();
        let mut used_vectors: Vec<usize> = Vec::new();
        let mut vector_seen = vec![false; slice.vectors.len()];
        while let Some(w) = queue.pop() {
            if index.contains_key(&w) {
                continue;
            }
            index.insert(w.clone(), words.len());
            words.push(w.clone());
            if let Some(vs) = slice.by_word.get(&w) {
                for &v in vs {
                    if !vector_seen[v] {
                        vector_seen[v] = true;
                        used_vectors.push(v);
                        for (u, _) in slice.vectors[v].terms() {
                            if !index.contains_key(u) {
                                queue.push(u.clone());
                            }
                        }
                    }
                }
            }
        }
        words.sort();
        let index: HashMap<&Word, usize> = words.iter().enumerate().map(|(i, w)| (w, i)).collect();

        let mut uf = UnionFind::new(words.len());
        for &v in &used_vectors {
            let mut it = slice.vectors[v].terms().map(|(w, _)| index[w]);
            if let Some(first) = it.next() {
                for other in it {
                    uf.union(first, other);
                }
            }
        }
        let mut by_group: HashMap<MultiIndex, usize> = HashMap::new();
        for (i, w) in words.iter().enumerate() {
            if let Some(key) = group_key(w) {
                match by_group.get(&key) {
                    Some(&j) => uf.union(i, j),
                    None => {
                        by_group.insert(key, i);
                    }
                }
            }
        }

        let mut components: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in 0..words.len() {
            components.entry(uf.find(i)).or_default().push(i);
        }
        let mut vectors_by_root: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &v in &used_vectors {
            let (w, _) = slice.vectors[v].terms().next().expect("nonzero vector");
            vectors_by_root.entry(uf.find(index[w])).or_default().push(v);
        }

        let blocks = components
            .into_iter()
            .map(|(root, members)| {
                let local: HashMap<&Word, usize> =
                    members.iter().enumerate().map(|(li, &gi)| (&words[gi], li)).collect();
                let dense: Vec<Vec<Complex64>> = vectors_by_root
                    .get(&root)
                    .map(|vs| {
                        vs.iter()
                            .map(|&v| {
                                let mut col = vec![Complex64::new(0.0, 0.0); members.len()];
                                for (w, c) in slice.vectors[v].terms() {
                                    col[local[w]] = *c;
                                }
                                col
                            })
                            .collect()
                    })
                    .unwrap_or_default();
                Block {
                    words: members.iter().map(|&gi| words[gi].clone()).collect(),
                    basis: orthonormal_basis(dense),
                }
            })
            .collect();
        Blocks(blocks)
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm2(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Modified Gram-Schmidt with one reorthogonalisation pass.
fn orthonormal_basis(vectors: Vec<Vec<Complex64>>) -> Vec<Vec<Complex64>> {
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    for mut v in vectors {
        let original = norm2(&v);
        if original == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &v);
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= c * y;
                }
            }
        }
        let nv = norm2(&v);
        if nv > 1e-10 * original {
            for x in v.iter_mut() {
                *x /= nv;
            }
            basis.push(v);
        }
    }
    basis
}

fn project_affine(v: &mut [Complex64], t: &[Complex64], basis: &[Vec<Complex64>]) {
    let diff: Vec<Complex64> = v.iter().zip(t).map(|(a, b)| a - b).collect();
    v.copy_from_slice(t);
    for b in basis {
        let c = dot(b, &diff);
        for (x, y) in v.iter_mut().zip(b) {
            *x += c * y;
        }
    }
}

fn project_complement(v: &mut [Complex64], basis: &[Vec<Complex64>]) {
    for b in basis {
        let c = dot(b, v);
        for (x, y) in v.iter_mut().zip(b) {
            *x -= c * y;
        }
    }
}

struct BlockOutcome {
    value: f64,
    lower_bound: f64,
    lift: FreeElement,
    iterations: usize,
    residual: f64,
    converged: bool,
}

/// Groups of local indices with their weights.
fn block_groups(block: &Block, rho: f64, norm: LiftNorm, n: usize) -> Vec<(Vec<usize>, f64)> {
    let pow = |w: &Word| rho.powi(w.len() as i32);
    match norm {
        LiftNorm::Taylor => block
            .words
            .iter()
            .enumerate()
            .map(|(i, w)| (vec![i], pow(w)))
            .collect(),
        LiftNorm::Polydisk { tau } => block
            .words
            .iter()
            .enumerate()
            .map(|(i, w)| (vec![i], pow(w) * tau.powi((s_stat(w) + 1) as i32)))
            .collect(),
        LiftNorm::FreeBall => {
            let mut fibers: BTreeMap<MultiIndex, (Vec<usize>, f64)> = BTreeMap::new();
            for (i, w) in block.words.iter().enumerate() {
                let k = p_proj(w, n).expect("letters in range");
                fibers.entry(k).or_insert_with(|| (Vec::new(), pow(w))).0.push(i);
            }
            fibers.into_values().collect()
        }
    }
}

fn objective(c: &[Complex64], groups: &[(Vec<usize>, f64)]) -> f64 {
    groups
        .iter()
        .map(|(idx, w)| w * idx.iter().map(|&i| c[i].norm_sqr()).sum::<f64>().sqrt())
        .fold(0.0, |s, x| s + x)
}

fn shrink(z: &[Complex64], groups: &[(Vec<usize>, f64)], gamma: f64) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); z.len()];
    for (idx, w) in groups {
        let nz = idx.iter().map(|&i| z[i].norm_sqr()).sum::<f64>().sqrt();
        if nz > gamma * w {
            let factor = 1.0 - gamma * w / nz;
            for &i in idx {
                out[i] = z[i] * factor;
            }
        }
    }
    out
}

/// Douglas-Rachford on every block, blocks rescaled to unit target and unit
/// maximal weight.
fn solve_blocks(
    blocks: &[Block],
    target: &FreeElement,
    rho: f64,
    norm: LiftNorm,
    config: SolverConfig,
) -> BlockOutcome {
    let n = target.dim();
    let mut outcome = BlockOutcome {
        value: 0.0,
        lower_bound: 0.0,
        lift: FreeElement::zero(n, target.cap()),
        iterations: 0,
        residual: 0.0,
        converged: true,
    };
    for block in blocks {
        let raw_groups = block_groups(block, rho, norm, n);
        let t_raw: Vec<Complex64> = block.words.iter().map(|w| target.coeff(w)).collect();
        let t_scale = norm2(&t_raw);
        if t_scale == 0.0 {
            continue;
        }
        if block.basis.is_empty() {
            let v = objective(&t_raw, &raw_groups);
            outcome.value += v;
            outcome.lower_bound += v;
            push_lift(&mut outcome.lift, block, &t_raw);
            continue;
        }
        let w_scale = raw_groups.iter().map(|g| g.1).fold(0.0, f64::max);
        let groups: Vec<(Vec<usize>, f64)> =
            raw_groups.iter().map(|(g, w)| (g.clone(), w / w_scale)).collect();
        let t: Vec<Complex64> = t_raw.iter().map(|z| z / t_scale).collect();

        let gamma = 1.0 / (block.words.len() as f64).sqrt();
        let mut z = t.clone();
        let mut iterations = 0;
        let mut residual = f64::INFINITY;
        let mut y = t.clone();
        let mut value = objective(&y, &groups);
        let mut lower = 0.0_f64;
        let mut converged = false;
        while iterations < config.max_iter {
            iterations += 1;
            let x = shrink(&z, &groups, gamma);
            let mut reflected: Vec<Complex64> = x.iter().zip(&z).map(|(a, b)| 2.0 * a - b).collect();
            project_affine(&mut reflected, &t, &block.basis);
            y = reflected;
            residual = y.iter().zip(&x).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
            if residual < config.tol {
                value = objective(&y, &groups);
                lower = lower.max(dual_bound(&z, &x, gamma, &t, &groups, &block.basis));
                if value - lower <= config.tol * value {
                    converged = true;
                    break;
                }
            }
            for ((zi, yi), xi) in z.iter_mut().zip(&y).zip(&x) {
                *zi += yi - xi;
            }
        }
        if !converged {
            value = objective(&y, &groups);
        }

        let scale = t_scale * w_scale;
        outcome.value += value * scale;
        outcome.lower_bound += lower.min(value) * scale;
        outcome.iterations = outcome.iterations.max(iterations);
        outcome.residual = outcome.residual.max(residual);
        outcome.converged &= converged;
        let lift: Vec<Complex64> = y.iter().map(|z| z * t_scale).collect();
        push_lift(&mut outcome.lift, block, &lift);
    }
    outcome
}

/// `z - x` is `gamma` times a subgradient at `x = prox(z)`. Pushed onto the
/// orthogonal complement of the slice and scaled into the dual unit ball it
/// certifies `quotient >= Re <u, t>`.
fn dual_bound(
    z: &[Complex64],
    x: &[Complex64],
    gamma: f64,
    t: &[Complex64],
    groups: &[(Vec<usize>, f64)],
    basis: &[Vec<Complex64>],
) -> f64 {
    let mut dual: Vec<Complex64> = z.iter().zip(x).map(|(a, b)| (a - b) / gamma).collect();
    project_complement(&mut dual, basis);
    let dual_norm = groups
        .iter()
        .map(|(idx, w)| idx.iter().map(|&i| dual[i].norm_sqr()).sum::<f64>().sqrt() / w)
        .fold(0.0, f64::max);
    if dual_norm > 0.0 {
        (dot(&dual, t).re / dual_norm).max(0.0)
    } else {
        0.0
    }
}

fn push_lift(lift: &mut FreeElement, block: &Block, values: &[Complex64]) {
    let part = FreeElement::from_terms(
        lift.dim(),
        lift.cap(),
        block.words.iter().cloned().zip(values.iter().copied()),
    )
    .expect("block words are valid");
    *lift = lift.add(&part).expect("same shape");
}

/// The nondecreasing word lifting `x^k`, as an element of degree cap `cap`.
pub fn canonical_lift(k: &MultiIndex, cap: usize) -> FreeElement {
    FreeElement::word(k.dim(), cap, k.canonical_word(), Complex64::new(1.0, 0.0))
        .expect("canonical word fits the cap")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freeseries::{free_ball_norm, free_polydisk_norm, normal_order_project, taylor_norm};
    use crate::qcombinatorics::{ball_weight, inv_count, w_q};
    use crate::qspace::ball_norm;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn q(m: f64, ph: f64) -> QParameter {
        QParameter::new(m, ph).unwrap()
    }

    fn mi(e: &[u32]) -> MultiIndex {
        MultiIndex::new(e.to_vec())
    }

    /// Fiber-wise closed form: within `p^{-1}(k)` the slice is the kernel of
    /// `c -> sum c_alpha q^{-inv(alpha)}`, so the infimum of a weighted l1
    /// norm is `|image| min_alpha w_alpha |q|^{inv(alpha)}` and of the l2
    /// norm `|image| / ||(|q|^{-inv(alpha)})_alpha||_2`.
    fn fiber_words(k: &MultiIndex) -> Vec<Word> {
        Word::all_of_length(k.dim(), k.degree())
            .filter(|w| p_proj(w, k.dim()).unwrap() == *k)
            .collect()
    }

    fn oracle_l1(k: &MultiIndex, qm: f64, weight: impl Fn(&Word) -> f64) -> f64 {
        fiber_words(k)
            .iter()
            .map(|w| weight(w) * qm.powi(inv_count(w) as i32))
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn slice_rank_examples() {
        let qp = q(0.7, 0.2);
        assert_eq!(IdealSlice::build(2, qp, 2).rank(), 1);
        assert_eq!(IdealSlice::build(2, qp, 3).rank(), 4);
        assert_eq!(IdealSlice::build(3, qp, 2).rank(), 3);
        assert!(IdealSlice::build(2, qp, 1).vectors().is_empty());
        assert!(IdealSlice::build(2, qp, 0).vectors().is_empty());
    }

    #[test]
    fn slice_vectors_project_to_zero() {
        let qp = q(1.7, 0.9);
        for v in IdealSlice::build(3, qp, 4).vectors() {
            let img = normal_order_project(v, qp);
            assert!(img.terms().all(|(_, c)| c.norm() < 1e-14));
        }
    }

    #[test]
    fn rank_identity_exhaustive() {
        for n in 1..=3 {
            for d in 0..=6 {
                let qp = q(0.5 + 0.3 * d as f64, 0.4 * n as f64);
                assert_eq!(IdealSlice::build(n, qp, d).rank(), IdealSlice::expected_rank(n, d), "n={n} d={d}");
            }
        }
    }

    #[test]
    fn l2_examples() {
        let rho = 0.6;
        let slices = SliceSet::new(2, q(1.0, 0.0), 3);
        let r = quotient_norm_l2(&canonical_lift(&mi(&[1, 1]), 3), rho, &slices).unwrap();
        assert!(r.converged);
        assert!((r.value - rho * rho / 2f64.sqrt()).abs() < 1e-9);
        assert!(r.gap() < 1e-8);
        let x2 = QElementLike::ball(&mi(&[1, 1]), rho);
        assert!((r.value - x2).abs() < 1e-9);

        let r = quotient_norm_l2(&canonical_lift(&mi(&[2, 0]), 3), rho, &slices).unwrap();
        assert!((r.value - rho * rho).abs() < 1e-15);
        let zero = quotient_norm_l2(&FreeElement::zero(2, 3), rho, &slices).unwrap();
        assert_eq!(zero.value, 0.0);
    }

    struct QElementLike;
    impl QElementLike {
        fn ball(k: &MultiIndex, rho: f64) -> f64 {
            let a = crate::qspace::QElement::monomial(k.dim(), QParameter::one(), k.degree(), k.clone(), Complex64::new(1.0, 0.0)).unwrap();
            ball_norm(&a, rho).value
        }
    }

    #[test]
    fn l1_examples() {
        let rho = 0.8;
        let slices = SliceSet::new(2, q(1.0, 0.7), 3);
        let lift = canonical_lift(&mi(&[1, 1]), 3);
        let r = quotient_norm_l1(&lift, rho, None, &slices).unwrap();
        assert!((r.value - rho * rho).abs() < 1e-9);

        let half = SliceSet::new(2, q(0.5, 0.0), 3);
        let r = quotient_norm_l1(&lift, rho, None, &half).unwrap();
        assert!((r.value - rho * rho / 2.0).abs() < 1e-9);
        // minimiser moves all mass onto zeta_{(2,1)}
        assert!(r.lift.coeff(&Word::new(&[1, 2])).norm() < 1e-6);

        // (rho, tau) quotient of x1 x2: every word of the fiber has s = 1
        let r = quotient_norm_l1(&lift, rho, Some(3.0), &slices).unwrap();
        assert!((r.value - 9.0 * rho * rho).abs() < 1e-8);
        assert!((quotient_norm_l1(&lift, rho, Some(1.0), &slices).unwrap().value - rho * rho).abs() < 1e-9);
    }

    #[test]
    fn certificates_match_fiber_oracle() {
        for n in [2, 3] {
            for &(m, ph) in &[(0.5, 0.3), (1.0, 1.2), (2.0, 2.0)] {
                let qp = q(m, ph);
                let slices = SliceSet::new(n, qp, 4);
                for k in MultiIndex::up_to_degree(n, 4) {
                    let lift = canonical_lift(&k, 4);
                    let rho = 0.9;
                    let taylor = quotient_norm_l1(&lift, rho, None, &slices).unwrap();
                    let expected = oracle_l1(&k, m, |w| rho.powi(w.len() as i32));
                    assert!((taylor.value - expected).abs() <= 1e-8 * expected.max(1e-12), "{k} {m}");
                    assert!((expected - w_q(&k, qp.qmod()) * rho.powi(k.degree() as i32)).abs() < 1e-12);

                    let tau = 2.0;
                    let pd = quotient_norm_l1(&lift, rho, Some(tau), &slices).unwrap();
                    let expected = oracle_l1(&k, m, |w| rho.powi(w.len() as i32) * tau.powi((s_stat(w) + 1) as i32));
                    assert!((pd.value - expected).abs() <= 1e-8 * expected, "{k} {m} tau {} {} {} {}", pd.value, expected, pd.iterations, pd.lower_bound);

                    let ball = quotient_norm_l2(&lift, rho, &slices).unwrap();
                    let mass: f64 = fiber_words(&k).iter().map(|w| m.powi(-2 * inv_count(w) as i32)).sum();
                    let expected = rho.powi(k.degree() as i32) / mass.sqrt();
                    assert!((ball.value - expected).abs() <= 1e-8 * expected, "{k} {m} ball");
                    assert!((expected - ball_weight(&k, qp.qmod()) * rho.powi(k.degree() as i32)).abs() < 1e-12 * expected.max(1.0));
                    for r in [&taylor, &pd, &ball] {
                        assert!(r.converged);
                        assert!(r.lower_bound <= r.value + 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn lift_is_feasible_and_beats_explicit_lifts() {
        let qp = q(0.7, 0.5);
        let slices = SliceSet::new(3, qp, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let mut target = FreeElement::zero(3, 4);
            for _ in 0..4 {
                let d = rng.random_range(0..=4);
                let letters: Vec<usize> = (0..d).map(|_| rng.random_range(1..=3)).collect();
                let c = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                target = target.add(&FreeElement::word(3, 4, Word::new(&letters), c).unwrap()).unwrap();
            }
            let rho = 0.7;
            for norm in [LiftNorm::Taylor, LiftNorm::Polydisk { tau: 1.5 }, LiftNorm::FreeBall] {
                let r = quotient_norm(&target, rho, norm, &slices, SolverConfig::default(), Decomposition::PerDegree).unwrap();
                let diff = normal_order_project(&r.lift, qp).sub(&normal_order_project(&target, qp)).unwrap();
                assert!(diff.terms().all(|(_, c)| c.norm() < 1e-9));
                let lift_norm = |x: &FreeElement| match norm {
                    LiftNorm::Taylor => taylor_norm(x, rho).value,
                    LiftNorm::Polydisk { tau } => free_polydisk_norm(x, rho, tau).value,
                    LiftNorm::FreeBall => free_ball_norm(x, rho).value,
                };
                assert!((lift_norm(&r.lift) - r.value).abs() < 1e-9 * r.value.max(1.0));
                assert!(r.value <= lift_norm(&target) * (1.0 + 1e-9), "{} {} {}", r.value, lift_norm(&target), r.converged);
                // another explicit lift: add a random ideal element
                let v = &slices.slice(3).unwrap().vectors()[rng.random_range(0..slices.slice(3).unwrap().vectors().len())];
                let v = FreeElement::from_terms(3, 4, v.terms().map(|(w, c)| (w.clone(), *c))).unwrap();
                let other = target.add(&v.scale(Complex64::new(0.3, -0.2))).unwrap();
                assert!(r.value <= lift_norm(&other) * (1.0 + 1e-9));
                let joint = quotient_norm(&target, rho, norm, &slices, SolverConfig::default(), Decomposition::Joint).unwrap();
                assert!((joint.value - r.value).abs() < 1e-7 * r.value.max(1.0));
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        let slices = SliceSet::new(2, q(1.0, 0.0), 3);
        assert!(quotient_norm_l1(&FreeElement::one(3, 3), 0.5, None, &slices).is_err());
        assert!(quotient_norm_l1(&FreeElement::one(2, 3), 0.5, Some(0.5), &slices).is_err());
        assert!(quotient_norm_l1(&FreeElement::one(2, 5), 0.5, None, &slices).is_ok());
        let deep = FreeElement::word(2, 5, Word::new(&[1, 1, 1, 1]), Complex64::new(1.0, 0.0)).unwrap();
        assert!(quotient_norm_l1(&deep, 0.5, None, &slices).is_err());
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use crate::freeseries::{free_ball_norm, normal_order_project, taylor_norm};
    use crate::qspace::{ball_norm, polydisk_norm};
    use proptest::prelude::*;

    fn element() -> impl Strategy<Value = FreeElement> {
        prop::collection::vec((prop::collection::vec(1..=2usize, 0..=3), -1.0..1.0f64, -1.0..1.0f64), 1..6)
            .prop_map(|terms| {
                FreeElement::from_terms(
                    2,
                    3,
                    terms.into_iter().map(|(l, re, im)| (Word::new(&l), Complex64::new(re, im))),
                )
                .unwrap()
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn quotients_equal_image_norms(a in element(), m in prop::sample::select(vec![0.5, 1.0, 2.0]), ph in -3.0..3.0f64, rho in 0.2..1.0f64) {
            let q = QParameter::new(m, ph).unwrap();
            let slices = SliceSet::new(2, q, 3);
            let image = normal_order_project(&a, q);
            let scale = 1e-6 * (1.0 + taylor_norm(&a, rho).value);

            let l1 = quotient_norm_l1(&a, rho, None, &slices).unwrap();
            prop_assert!((l1.value - polydisk_norm(&image, rho).value).abs() <= scale);
            prop_assert!(l1.lower_bound <= l1.value + 1e-12);
            prop_assert!(l1.value <= taylor_norm(&a, rho).value * (1.0 + 1e-9) + 1e-15);

            let l2 = quotient_norm_l2(&a, rho, &slices).unwrap();
            prop_assert!((l2.value - ball_norm(&image, rho).value).abs() <= scale);
            prop_assert!(l2.value <= free_ball_norm(&a, rho).value * (1.0 + 1e-9) + 1e-15);
            prop_assert!(normal_order_project(&l2.lift, q).max_abs_diff(&image) <= 1e-8 * (1.0 + scale));
        }
    }
}
