//! Truncated Fock representation of the quantum affine space for real
//! `0 < q < 1`.
//!
//! The Hilbert space has orthonormal basis `e_k` and
//!
//! ```text
//! pi(x_j) e_k = sqrt(1 - q^2) sqrt([k_j + 1]_{q^2}) q^{sum_{i>j} k_i} e_{k + e_j}.
//! ```
//!
//! The truncation keeps `|k| <= K`. An element of degree `m` is represented
//! exactly on the columns `|k| <= K - m` (its validity window); columns above
//! the window are truncation artifacts and are excluded from norms.

use std::collections::{BTreeMap, HashMap};

use nalgebra::DMatrix;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::qcombinatorics::{q_int, MultiIndex, QModulus};
use crate::qspace::{scale_auto, QElement};
use crate::sparse::SparseMatrix;

pub const OP_NORM_TOL: f64 = 1e-12;
pub const OP_NORM_MAX_KRYLOV: usize = 600;
pub const DENSE_BLOCK_LIMIT: usize = 600;
const LANCZOS_STALL: usize = 20;
const OP_NORM_SEED: u64 = 0x0f0c_5eed;

/// Basis `{e_k : |k| <= K}` in graded order.
#[derive(Clone, Debug)]
pub struct FockTruncation {
    n: usize,
    q: f64,
    cap: usize,
    basis: Vec<MultiIndex>,
    index: HashMap<MultiIndex, usize>,
}

impl FockTruncation {
    pub fn new(n: usize, q: f64, cap: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidParameter(format!("q must lie in (0, 1), got {q}")));
        }
        let basis = MultiIndex::up_to_degree(n, cap);
        let index = basis.iter().enumerate().map(|(i, k)| (k.clone(), i)).collect();
        Ok(FockTruncation {
            n,
            q,
            cap,
            basis,
            index,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn basis(&self) -> &[MultiIndex] {
        &self.basis
    }

    pub fn size(&self) -> usize {
        self.basis.len()
    }

    pub fn position(&self, k: &MultiIndex) -> Option<usize> {
        self.index.get(k).copied()
    }

    /// `pi(x_j) e_k` as `(k + e_j, weight)`; `None` on the top level.
    fn raise(&self, j: usize, k: &MultiIndex) -> Option<(MultiIndex, f64)> {
        if k.degree() >= self.cap {
            return None;
        }
        let q2 = QModulus::new(self.q * self.q).expect("q in (0,1)");
        let e = k.entries();
        let tail: u32 = e[j..].iter().sum();
        let w = (1.0 - self.q * self.q).sqrt() * q_int(e[j - 1] as u64 + 1, q2).sqrt() * self.q.powi(tail as i32);
        Some((k.add(&MultiIndex::unit(self.n, j)), w))
    }
}

/// A represented operator with its validity window `V`: columns `e_k` with
/// `|k| <= V` are exact.
#[derive(Clone, Debug)]
pub struct RepMatrix {
    pub matrix: SparseMatrix,
    pub window: usize,
}

impl RepMatrix {
    /// Whether every column inside the window is below `tol`.
    pub fn is_zero_on_window(&self, f: &FockTruncation, tol: f64) -> bool {
        self.matrix.max_abs_on(|j| f.basis[j].degree() <= self.window) <= tol
    }
}

pub fn rep_generator(j: usize, f: &FockTruncation) -> Result<RepMatrix> {
    if j == 0 || j > f.n {
        return Err(Error::LetterOutOfRange { letter: j, n: f.n });
    }
    let cols = f
        .basis
        .iter()
        .map(|k| match f.raise(j, k) {
            Some((row, w)) => vec![(f.index[&row], Complex64::new(w, 0.0))],
            None => Vec::new(),
        })
        .collect();
    Ok(RepMatrix {
        matrix: SparseMatrix::from_columns(f.size(), cols),
        window: f.cap.saturating_sub(1),
    })
}

/// `sum_k c_k pi(x_1)^{k_1} ... pi(x_n)^{k_n}`, built column by column.
pub fn rep_element(a: &QElement, f: &FockTruncation) -> Result<RepMatrix> {
    if a.dim() != f.n {
        return Err(Error::DimensionMismatch {
            expected: f.n,
            found: a.dim(),
        });
    }
    let q = a.parameter();
    if q.phase() != 0.0 || (q.modulus() - f.q).abs() > 1e-15 * f.q {
        return Err(Error::Incompatible(format!(
            "element parameter {} differs from the representation parameter {}",
            q.value(),
            f.q
        )));
    }
    if a.degree() > f.cap {
        return Err(Error::DegreeOverflow {
            degree: a.degree(),
            cap: f.cap,
        });
    }
    let mut cols: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); f.size()];
    for (k, c) in a.terms() {
        for (col, m) in f.basis.iter().enumerate() {
            if m.degree() + k.degree() > f.cap {
                break;
            }
            let mut state = m.clone();
            let mut weight = *c;
            // rightmost factor x_n^{k_n} acts first
            for j in (1..=f.n).rev() {
                for _ in 0..k.entries()[j - 1] {
                    let (next, w) = f.raise(j, &state).expect("degree checked");
                    state = next;
                    weight *= w;
                }
            }
            cols[col].push((f.index[&state], weight));
        }
    }
    Ok(RepMatrix {
        matrix: SparseMatrix::from_columns(f.size(), cols),
        window: f.cap - a.degree(),
    })
}

/// Largest singular value of `M` restricted to the window.
///
/// Columns inside the window that share no row give orthogonal blocks of
/// `M^* M`, so the norm is the maximum over the connected components of the
/// "shares a row" relation. Components up to [`DENSE_BLOCK_LIMIT`] columns are
/// diagonalised densely; larger ones use Lanczos with full
/// reorthogonalisation.
pub fn op_norm(m: &RepMatrix, f: &FockTruncation) -> Result<f64> {
    if m.matrix.dim() != f.size() {
        return Err(Error::DimensionMismatch {
            expected: f.size(),
            found: m.matrix.dim(),
        });
    }
    let inside: Vec<usize> = (0..f.size()).filter(|&j| f.basis[j].degree() <= m.window).collect();
    if inside.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let mut best = 0.0f64;
    for block in gram_blocks(m, &inside) {
        let top = if block.len() == 1 {
            m.matrix.column(block[0]).iter().map(|e| e.1.norm_sqr()).sum()
        } else if block.len() <= DENSE_BLOCK_LIMIT {
            dense_gram(m, &block).symmetric_eigenvalues().max()
        } else {
            lanczos_top(m, &block)
        };
        best = best.max(top);
    }
    Ok(best.sqrt())
}

/// Groups columns by the connected components of "shares a row".
fn gram_blocks(m: &RepMatrix, cols: &[usize]) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..cols.len()).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let mut owner: HashMap<usize, usize> = HashMap::new();
    for (local, &j) in cols.iter().enumerate() {
        for &(row, _) in m.matrix.column(j) {
            match owner.get(&row) {
                Some(&other) => {
                    let (a, b) = (find(&mut parent, local), find(&mut parent, other));
                    parent[a.max(b)] = a.min(b);
                }
                None => {
                    owner.insert(row, local);
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (local, &j) in cols.iter().enumerate() {
        groups.entry(find(&mut parent, local)).or_default().push(j);
    }
    groups.into_values().collect()
}

/// `M_B^* M_B` for the columns `B`.
fn dense_gram(m: &RepMatrix, block: &[usize]) -> DMatrix<Complex64> {
    let mut rows: HashMap<usize, Vec<(usize, Complex64)>> = HashMap::new();
    for (local, &j) in block.iter().enumerate() {
        for &(row, v) in m.matrix.column(j) {
            rows.entry(row).or_default().push((local, v));
        }
    }
    let mut g = DMatrix::zeros(block.len(), block.len());
    for entries in rows.values() {
        for &(a, va) in entries {
            for &(b, vb) in entries {
                g[(a, b)] += va.conj() * vb;
            }
        }
    }
    g
}

/// Top eigenvalue of `M_B^* M_B` by Lanczos; stops once the top Ritz value
/// is unchanged to [`OP_NORM_TOL`] over [`LANCZOS_STALL`] consecutive steps.
fn lanczos_top(m: &RepMatrix, block: &[usize]) -> f64 {
    let dim = m.matrix.dim();
    let gram = |x: &[Complex64]| -> Vec<Complex64> {
        let mut full = vec![Complex64::new(0.0, 0.0); dim];
        for (v, &j) in x.iter().zip(block) {
            full[j] = *v;
        }
        let w = m.matrix.apply_adjoint(&m.matrix.apply(&full));
        block.iter().map(|&j| w[j]).collect()
    };
    let size = block.len();
    let mut rng = ChaCha8Rng::seed_from_u64(OP_NORM_SEED);
    let mut v: Vec<Complex64> = (0..size)
        .map(|_| Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
        .collect();
    normalise(&mut v);
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut history: Vec<f64> = Vec::new();
    let mut top = 0.0;
    for step in 0..size.min(OP_NORM_MAX_KRYLOV) {
        let mut w = gram(&v);
        alpha.push(inner(&v, &w).re);
        basis.push(v);
        for _ in 0..2 {
            for b in &basis {
                let c = inner(b, &w);
                for (x, y) in w.iter_mut().zip(b) {
                    *x -= c * y;
                }
            }
        }
        top = top_ritz(&alpha, &beta);
        history.push(top);
        let b = norm(&w);
        let stalled = history.len() > LANCZOS_STALL
            && (top - history[history.len() - 1 - LANCZOS_STALL]).abs() <= OP_NORM_TOL * top;
        if stalled || b <= 1e-14 * top.max(f64::MIN_POSITIVE) || step + 1 == size {
            break;
        }
        beta.push(b);
        v = w.into_iter().map(|x| x / b).collect();
    }
    top
}

fn top_ritz(alpha: &[f64], beta: &[f64]) -> f64 {
    let k = alpha.len();
    let t = DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    t.symmetric_eigenvalues().max()
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn normalise(a: &mut [Complex64]) {
    let n = norm(a);
    a.iter_mut().for_each(|z| *z /= n);
}

/// `||gamma_rho(a)||_op`, with `gamma_rho(x_i) = rho x_i`.
pub fn vaksman_norm(a: &QElement, rho: f64, f: &FockTruncation) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::InvalidParameter(format!("rho must be positive, got {rho}")));
    }
    op_norm(&rep_element(&scale_auto(a, rho), f)?, f)
}

/// Maximal entrywise residual of the three relation families, on the
/// columns `|k| <= K - 2` and on all columns.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CcrResidual {
    pub window: f64,
    pub full: f64,
}

pub fn verify_tw_ccr(f: &FockTruncation) -> Result<CcrResidual> {
    if f.cap < 3 {
        return Err(Error::InvalidParameter(format!("cap must be at least 3, got {}", f.cap)));
    }
    let n = f.n;
    let q = Complex64::new(f.q, 0.0);
    let xs: Vec<SparseMatrix> = (1..=n)
        .map(|j| rep_generator(j, f).map(|m| m.matrix))
        .collect::<Result<_>>()?;
    let adj: Vec<SparseMatrix> = xs.iter().map(SparseMatrix::adjoint).collect();
    let id = SparseMatrix::identity(f.size());

    let mut relations = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i < j {
                relations.push(xs[i].mul(&xs[j]).axpy(-q, &xs[j].mul(&xs[i])));
            }
            if i != j {
                relations.push(adj[i].mul(&xs[j]).axpy(-q, &xs[j].mul(&adj[i])));
            }
        }
        let mut tail = id.clone();
        for k in i + 1..n {
            tail = tail.sub(&xs[k].mul(&adj[k]));
        }
        let rhs = xs[i].mul(&adj[i]).scale(q * q).axpy(1.0 - q * q, &tail);
        relations.push(adj[i].mul(&xs[i]).sub(&rhs));
    }
    let window = f.cap - 2;
    let inside = |j: usize| f.basis[j].degree() <= window;
    Ok(CcrResidual {
        window: relations.iter().map(|r| r.max_abs_on(inside)).fold(0.0, f64::max),
        full: relations.iter().map(|r| r.max_abs_on(|_| true)).fold(0.0, f64::max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qspace::{ball_norm, QParameter};
    use rand::Rng;

    fn real(q: f64) -> QParameter {
        QParameter::real(q).unwrap()
    }

    fn mono(n: usize, q: f64, k: &[u32]) -> QElement {
        QElement::monomial(n, real(q), k.iter().sum::<u32>() as usize, MultiIndex::new(k.to_vec()), Complex64::new(1.0, 0.0)).unwrap()
    }

    #[test]
    fn basis_size() {
        for (n, k) in [(1, 5), (2, 8), (3, 6)] {
            let f = FockTruncation::new(n, 0.5, k).unwrap();
            let expected = crate::qcombinatorics::binomial((k + n) as u64, n as u64).round() as usize;
            assert_eq!(f.size(), expected);
        }
        assert!(FockTruncation::new(2, 1.0, 4).is_err());
        assert!(FockTruncation::new(2, 0.0, 4).is_err());
    }

    #[test]
    fn generator_entries() {
        let f = FockTruncation::new(1, 0.5, 6).unwrap();
        let m = rep_generator(1, &f).unwrap();
        let e0 = f.position(&MultiIndex::new(vec![0])).unwrap();
        let e1 = f.position(&MultiIndex::new(vec![1])).unwrap();
        assert!((m.matrix.get(e1, e0).re - 0.75f64.sqrt()).abs() < 1e-15);

        let f = FockTruncation::new(2, 0.5, 5).unwrap();
        let m = rep_generator(1, &f).unwrap();
        let col = f.position(&MultiIndex::new(vec![0, 1])).unwrap();
        let row = f.position(&MultiIndex::new(vec![1, 1])).unwrap();
        assert!((m.matrix.get(row, col).re - 0.75f64.sqrt() * 0.5).abs() < 1e-15);
        assert!((m.matrix.get(row, col).re - 0.4330).abs() < 1e-4);
        for (j, k) in f.basis().iter().enumerate() {
            assert_eq!(m.matrix.column(j).len(), usize::from(k.degree() < 5));
        }
    }

    #[test]
    fn element_examples() {
        let q = 0.6;
        let f = FockTruncation::new(2, q, 6).unwrap();
        let one = rep_element(&QElement::one(2, real(q), 0), &f).unwrap();
        assert_eq!(one.matrix, SparseMatrix::identity(f.size()));
        let x1x2 = rep_element(&mono(2, q, &[1, 1]), &f).unwrap();
        let prod = rep_generator(1, &f).unwrap().matrix.mul(&rep_generator(2, &f).unwrap().matrix);
        assert!(x1x2.matrix.sub(&prod).max_abs_on(|_| true) < 1e-15);
        assert_eq!(x1x2.window, 4);

        // x1 x2 - q x2 x1 with x2 x1 multiplied as matrices
        let x2x1 = rep_generator(2, &f).unwrap().matrix.mul(&rep_generator(1, &f).unwrap().matrix);
        let rel = RepMatrix {
            matrix: prod.axpy(Complex64::new(-q, 0.0), &x2x1),
            window: 4,
        };
        assert!(rel.is_zero_on_window(&f, 1e-15));
        // and via the algebra, where it is zero identically
        let a = QElement::generator(2, real(q), 2, 1).unwrap().multiply(&QElement::generator(2, real(q), 2, 2).unwrap()).unwrap();
        let b = QElement::generator(2, real(q), 2, 2).unwrap().multiply(&QElement::generator(2, real(q), 2, 1).unwrap()).unwrap();
        let r = rep_element(&a.sub(&b.scale(Complex64::new(q, 0.0))).unwrap(), &f).unwrap();
        assert!(r.is_zero_on_window(&f, 1e-15));
    }

    #[test]
    fn rejects_mismatched_input() {
        let f = FockTruncation::new(2, 0.5, 4).unwrap();
        assert!(rep_element(&mono(2, 0.6, &[1, 0]), &f).is_err());
        let complex = QElement::generator(2, QParameter::new(0.5, 0.1).unwrap(), 1, 1).unwrap();
        assert!(rep_element(&complex, &f).is_err());
        assert!(rep_element(&mono(2, 0.5, &[3, 2]), &f).is_err());
        assert!(rep_generator(3, &f).is_err());
        let empty = RepMatrix {
            matrix: SparseMatrix::identity(f.size()),
            window: 0,
        };
        assert!(op_norm(&empty, &f).is_ok());
        let bad = FockTruncation::new(2, 0.5, 2).unwrap();
        assert!(verify_tw_ccr(&bad).is_err());
    }

    #[test]
    fn op_norm_examples() {
        let f = FockTruncation::new(1, 0.5, 40).unwrap();
        let g = op_norm(&rep_generator(1, &f).unwrap(), &f).unwrap();
        assert!((g - (1.0 - 0.25f64.powi(40)).sqrt()).abs() < 1e-12);
        let id = RepMatrix {
            matrix: SparseMatrix::identity(f.size()),
            window: 40,
        };
        assert!((op_norm(&id, &f).unwrap() - 1.0).abs() < 1e-14);
        // x^m: sup over the window of products of shift entries
        let m = 5;
        let r = rep_element(&mono(1, 0.5, &[m]), &f).unwrap();
        let expected = (1..=m as i32)
            .map(|i| (1.0 - 0.25f64.powi(40 - m as i32 + i)).sqrt())
            .product::<f64>();
        assert!((op_norm(&r, &f).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn op_norm_matches_dense_svd() {
        let q = 0.7;
        let f = FockTruncation::new(2, q, 7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let terms: Vec<(MultiIndex, Complex64)> = MultiIndex::up_to_degree(2, 3)
                .into_iter()
                .map(|k| (k, Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))))
                .collect();
            let a = QElement::from_terms(2, real(q), 3, terms).unwrap();
            let r = rep_element(&a, &f).unwrap();
            let keep: Vec<usize> = (0..f.size()).filter(|&j| f.basis()[j].degree() <= r.window).collect();
            let dense = DMatrix::from_fn(f.size(), keep.len(), |i, j| r.matrix.get(i, keep[j]));
            let sv = dense.singular_values().max();
            assert!((op_norm(&r, &f).unwrap() - sv).abs() < 1e-9 * sv);
        }
    }

    #[test]
    fn lanczos_agrees_with_dense_blocks() {
        let q = 0.5;
        let f = FockTruncation::new(2, q, 12).unwrap();
        let terms = [([0u32, 0u32], 0.3), ([1, 0], 1.0), ([0, 1], -0.7), ([1, 1], 0.4)]
            .map(|(k, c)| (MultiIndex::new(k.to_vec()), Complex64::new(c, 0.1)));
        let a = QElement::from_terms(2, real(q), 2, terms).unwrap();
        let r = rep_element(&a, &f).unwrap();
        let inside: Vec<usize> = (0..f.size()).filter(|&j| f.basis()[j].degree() <= r.window).collect();
        let blocks = gram_blocks(&r, &inside);
        assert_eq!(blocks.len(), 1);
        let exact = dense_gram(&r, &blocks[0]).symmetric_eigenvalues().max();
        assert!((lanczos_top(&r, &blocks[0]) - exact).abs() < 1e-10 * exact);
        // a monomial splits into singleton blocks
        let r = rep_element(&mono(2, q, &[2, 1]), &f).unwrap();
        let inside: Vec<usize> = (0..f.size()).filter(|&j| f.basis()[j].degree() <= r.window).collect();
        assert!(gram_blocks(&r, &inside).iter().all(|b| b.len() == 1));
    }

    #[test]
    fn vaksman_examples() {
        let f = FockTruncation::new(1, 0.5, 60).unwrap();
        for m in 0..6u32 {
            let v = vaksman_norm(&mono(1, 0.5, &[m]), 0.5, &f).unwrap();
            assert!((v - 0.5f64.powi(m as i32)).abs() < 1e-4);
            assert!((v - ball_norm(&mono(1, 0.5, &[m]), 0.5).value).abs() < 1e-4);
        }
        let f = FockTruncation::new(2, 0.5, 40).unwrap();
        let v = vaksman_norm(&mono(2, 0.5, &[1, 0]), 0.8, &f).unwrap();
        assert!((v - 0.8).abs() < 1e-4);
        let v = vaksman_norm(&QElement::one(2, real(0.5), 0), 0.8, &f).unwrap();
        assert!((v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn twisted_ccr() {
        for &(n, q, k) in &[(1, 0.5, 10), (2, 0.7, 8), (3, 0.3, 6)] {
            let f = FockTruncation::new(n, q, k).unwrap();
            let r = verify_tw_ccr(&f).unwrap();
            assert!(r.window <= 1e-12, "{n} {q}: {}", r.window);
            assert!(r.full > 1e-3, "boundary artifact expected");
        }
    }

    #[test]
    fn generators_are_contractions() {
        for q in [0.1, 0.5, 0.9] {
            let f = FockTruncation::new(3, q, 10).unwrap();
            for j in 1..=3 {
                let v = op_norm(&rep_generator(j, &f).unwrap(), &f).unwrap();
                assert!(v <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn domination_constants_are_finite() {
        for q in [0.3, 0.7] {
            for n in 1..=2 {
                let f = FockTruncation::new(n, q, 30).unwrap();
                for rho in [0.3, 0.5] {
                    let mut previous = (f64::INFINITY, f64::INFINITY);
                    for rho2 in [0.6, 0.75, 0.9] {
                        let mut c = 0.0f64;
                        let mut c2 = 0.0f64;
                        for k in MultiIndex::up_to_degree(n, 6) {
                            let a = mono(n, q, k.entries());
                            c = c.max(vaksman_norm(&a, rho, &f).unwrap() / ball_norm(&a, rho2).value);
                            c2 = c2.max(ball_norm(&a, rho).value / vaksman_norm(&a, rho2, &f).unwrap());
                        }
                        assert!(c.is_finite() && c2.is_finite() && c > 0.0 && c2 > 0.0);
                        assert!(c <= previous.0 && c2 <= previous.1);
                        previous = (c, c2);
                    }
                }
            }
        }
    }

    #[test]
    fn faithful_on_low_degree() {
        let q = 0.6;
        let f = FockTruncation::new(2, q, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let mut terms = Vec::new();
            for k in MultiIndex::up_to_degree(2, 4) {
                if rng.random_bool(0.4) {
                    terms.push((k, Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))));
                }
            }
            let a = QElement::from_terms(2, real(q), 4, terms).unwrap();
            let r = rep_element(&a, &f).unwrap();
            assert_eq!(r.is_zero_on_window(&f, 1e-14), a.is_zero());
        }
    }

    #[test]
    fn stable_under_larger_cap() {
        for q in [0.3, 0.7] {
            let f = FockTruncation::new(2, q, 30).unwrap();
            let g = FockTruncation::new(2, q, 40).unwrap();
            for k in MultiIndex::up_to_degree(2, 4) {
                let a = mono(2, q, k.entries());
                let d = (vaksman_norm(&a, 0.7, &f).unwrap() - vaksman_norm(&a, 0.7, &g).unwrap()).abs();
                assert!(d < 1e-3, "{k}: {d}");
            }
        }
    }
}
