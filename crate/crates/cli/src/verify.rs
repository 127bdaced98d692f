//! Verification suites. Each suite emits one item per measured quantity with
//! the assertion it is held to.

use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, SQRT_2};
use std::time::{Duration, Instant};

use anyhow::Result;
use clap::ValueEnum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qanalytic::fock::{op_norm, rep_generator, vaksman_norm, verify_tw_ccr};
use qanalytic::freeseries::{free_ball_norm, free_polydisk_norm, taylor_norm};
use qanalytic::jsr::{default_grid, jsr_estimate};
use qanalytic::qcombinatorics::{ball_weight, monomial_sup, stirling_ratio, w_q};
use qanalytic::qspace::{ball_norm, polydisk_norm, reversal_iso, weight_ratio_scan};
use qanalytic::quotient::{canonical_lift, quotient_norm_l1, quotient_norm_l2};
use qanalytic::{
    AlgebraTuple, Complex64, Domain, Family, FockTruncation, FreeElement, MultiIndex, QElement, QModulus,
    QParameter, SliceSet, Word,
};

use crate::commands::Common;
use crate::report::{Item, Op};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    NormalOrdering,
    Submultiplicativity,
    Reversal,
    QuotientPolydisk,
    QuotientBall,
    JsrSeparation,
    FockCcr,
    Vaksman,
    Stirling,
    WeightEquivalence,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::NormalOrdering => "normal-ordering",
            Suite::Submultiplicativity => "submultiplicativity",
            Suite::Reversal => "reversal",
            Suite::QuotientPolydisk => "quotient-polydisk",
            Suite::QuotientBall => "quotient-ball",
            Suite::JsrSeparation => "jsr-separation",
            Suite::FockCcr => "fock-ccr",
            Suite::Vaksman => "vaksman",
            Suite::Stirling => "stirling",
            Suite::WeightEquivalence => "weight-equivalence",
        }
    }
}

/// Collects items until the wall-clock budget runs out.
struct Runner {
    items: Vec<Item>,
    start: Instant,
    limit: Duration,
}

impl Runner {
    fn push(&mut self, item: Item) {
        self.items.push(item);
    }

    fn out_of_time(&self) -> bool {
        self.start.elapsed() > self.limit
    }
}

pub fn run_suite(suite: Suite, common: &Common, budget: f64) -> Result<Vec<Item>> {
    let mut r = Runner {
        items: Vec::new(),
        start: Instant::now(),
        limit: Duration::from_secs_f64(budget.max(0.0)),
    };
    match suite {
        Suite::NormalOrdering => normal_ordering(&mut r)?,
        Suite::Submultiplicativity => submultiplicativity(&mut r, common.seed)?,
        Suite::Reversal => reversal(&mut r, common.seed)?,
        Suite::QuotientPolydisk => quotient_polydisk(&mut r, common)?,
        Suite::QuotientBall => quotient_ball(&mut r)?,
        Suite::JsrSeparation => jsr_separation(&mut r)?,
        Suite::FockCcr => fock_ccr(&mut r)?,
        Suite::Vaksman => vaksman(&mut r)?,
        Suite::Stirling => stirling(&mut r, common.seed)?,
        Suite::WeightEquivalence => weight_equivalence(&mut r)?,
    }
    if r.out_of_time() {
        r.push(Item::new("budget", "exceeded".into()).flag("partial", true));
    }
    Ok(r.items)
}

/// Asserts `lo <= value <= hi`.
fn within(item: Item, lo: f64, hi: f64) -> Item {
    let mid = 0.5 * (lo + hi);
    item.assert(Op::Eq, mid, 0.5 * (hi - lo) / mid.abs().max(1.0))
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Bubble sort of the letters, one factor `q^{-1}` per adjacent swap of a
/// descent. Independent of the closed-form exponent used by the library.
fn rewrite(word: &[usize], q: Complex64) -> (Vec<u32>, Complex64, usize) {
    let mut w = word.to_vec();
    let mut coeff = c(1.0, 0.0);
    let mut swaps = 0;
    let q_inv = q.inv();
    for end in (1..w.len()).rev() {
        for i in 0..end {
            if w[i] > w[i + 1] {
                w.swap(i, i + 1);
                coeff *= q_inv;
                swaps += 1;
            }
        }
    }
    let n = w.iter().copied().max().unwrap_or(0);
    let mut counts = vec![0u32; n];
    for &l in &w {
        counts[l - 1] += 1;
    }
    (counts, coeff, swaps)
}

fn letters_of(k: &MultiIndex) -> Vec<usize> {
    k.entries()
        .iter()
        .enumerate()
        .flat_map(|(j, &e)| std::iter::repeat_n(j + 1, e as usize))
        .collect()
}

fn normal_ordering(r: &mut Runner) -> Result<()> {
    let qs = [
        ("0.5", QParameter::new(0.5, 0.0)?),
        ("exp(i pi/3)", QParameter::new(1.0, FRAC_PI_3)?),
        ("2 exp(i)", QParameter::new(2.0, 1.0)?),
    ];
    for (label, q) in qs {
        let mut worst = 0.0f64;
        let mut pairs = 0usize;
        let mut support_mismatch = 0usize;
        for n in 1..=3 {
            let monos = MultiIndex::up_to_degree(n, 6);
            for k in &monos {
                for m in monos.iter().filter(|m| m.degree() + k.degree() <= 6) {
                    let a = QElement::monomial(n, q, 6, k.clone(), c(1.0, 0.0))?;
                    let b = QElement::monomial(n, q, 6, m.clone(), c(1.0, 0.0))?;
                    let p = a.multiply(&b)?;
                    let mut word = letters_of(k);
                    word.extend(letters_of(m));
                    let (mut counts, coeff, _) = rewrite(&word, q.value());
                    counts.resize(n, 0);
                    let sum = MultiIndex::new(counts);
                    if p.len() != 1 || p.coeff(&sum) == c(0.0, 0.0) {
                        support_mismatch += 1;
                    }
                    worst = worst.max((p.coeff(&sum) - coeff).norm() / coeff.norm());
                    pairs += 1;
                }
            }
        }
        r.push(Item::count(format!("pairs[q={label}]"), pairs));
        r.push(
            Item::count(format!("support-mismatches[q={label}]"), support_mismatch).assert(
                Op::Eq,
                0.0,
                0.0,
            ),
        );
        r.push(Item::number(format!("max-relative-deviation[q={label}]"), worst).assert(Op::Le, 0.0, 1e-12));
        if r.out_of_time() {
            return Ok(());
        }
    }
    Ok(())
}

fn gaussian_coeff(rng: &mut ChaCha8Rng) -> Complex64 {
    c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

fn random_quantum(rng: &mut ChaCha8Rng, n: usize, q: QParameter, deg: usize, cap: usize) -> Result<QElement> {
    let mut terms = Vec::new();
    for k in MultiIndex::up_to_degree(n, deg) {
        if rng.random_bool(0.5) {
            terms.push((k, gaussian_coeff(rng)));
        }
    }
    Ok(QElement::from_terms(n, q, cap, terms)?)
}

fn random_free(rng: &mut ChaCha8Rng, n: usize, deg: usize, cap: usize) -> Result<FreeElement> {
    let mut terms = Vec::new();
    for d in 0..=deg {
        for w in Word::all_of_length(n, d) {
            if rng.random_bool(0.3) {
                terms.push((w, gaussian_coeff(rng)));
            }
        }
    }
    Ok(FreeElement::from_terms(n, cap, terms)?)
}

fn random_q(rng: &mut ChaCha8Rng) -> Result<QParameter> {
    let modulus = [0.5, 1.0, 2.0][rng.random_range(0..3)];
    Ok(QParameter::new(modulus, rng.random_range(-3.0..3.0))?)
}

const SUBMULT_TRIALS: usize = 1000;
const SUBMULT_TOL: f64 = 1e-9;

fn submultiplicativity(r: &mut Runner, seed: u64) -> Result<()> {
    type QuantumNorm = fn(&QElement, f64) -> f64;
    let quantum: [(&str, QuantumNorm); 2] = [
        ("polydisk", |a, rho| polydisk_norm(a, rho).value),
        ("ball", |a, rho| ball_norm(a, rho).value),
    ];
    for (label, norm) in quantum {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut violations = 0usize;
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..SUBMULT_TRIALS {
            let n = rng.random_range(1..=3);
            let q = random_q(&mut rng)?;
            let rho = rng.random_range(0.2..1.5);
            let a = random_quantum(&mut rng, n, q, 3, 6)?;
            let b = random_quantum(&mut rng, n, q, 3, 6)?;
            let lhs = norm(&a.multiply(&b)?, rho);
            let rhs = norm(&a, rho) * norm(&b, rho);
            if rhs > 0.0 {
                let excess = (lhs - rhs) / rhs;
                worst = worst.max(excess);
                violations += usize::from(excess > SUBMULT_TOL);
            }
        }
        r.push(Item::count(format!("violations[{label}]"), violations).assert(Op::Eq, 0.0, 0.0));
        r.push(Item::number(format!("max-relative-excess[{label}]"), worst));
        if r.out_of_time() {
            return Ok(());
        }
    }
    type FreeNorm = fn(&FreeElement, f64, f64) -> f64;
    let free: [(&str, FreeNorm); 3] = [
        ("free-polydisk", |a, rho, tau| {
            free_polydisk_norm(a, rho, tau).value
        }),
        ("free-taylor", |a, rho, _| taylor_norm(a, rho).value),
        ("free-ball", |a, rho, _| free_ball_norm(a, rho).value),
    ];
    for (label, norm) in free {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut violations = 0usize;
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..SUBMULT_TRIALS {
            let n = rng.random_range(1..=3);
            let rho = rng.random_range(0.2..1.5);
            let tau = rng.random_range(1.0..4.0);
            let a = random_free(&mut rng, n, 3, 6)?;
            let b = random_free(&mut rng, n, 3, 6)?;
            let lhs = norm(&a.concat_multiply(&b)?, rho, tau);
            let rhs = norm(&a, rho, tau) * norm(&b, rho, tau);
            if rhs > 0.0 {
                let excess = (lhs - rhs) / rhs;
                worst = worst.max(excess);
                violations += usize::from(excess > SUBMULT_TOL);
            }
        }
        r.push(Item::count(format!("violations[{label}]"), violations).assert(Op::Eq, 0.0, 0.0));
        r.push(Item::number(format!("max-relative-excess[{label}]"), worst));
        if r.out_of_time() {
            return Ok(());
        }
    }
    Ok(())
}

fn reversal(r: &mut Runner, seed: u64) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut poly, mut ball, mut hom) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..500 {
        let n = rng.random_range(1..=3);
        let q = random_q(&mut rng)?;
        let rho = rng.random_range(0.2..1.5);
        let a = random_quantum(&mut rng, n, q, 3, 6)?;
        let b = random_quantum(&mut rng, n, q, 3, 6)?;
        let ta = reversal_iso(&a);
        let rel = |x: f64, y: f64| if y == 0.0 { x.abs() } else { (x - y).abs() / y };
        poly = poly.max(rel(polydisk_norm(&ta, rho).value, polydisk_norm(&a, rho).value));
        ball = ball.max(rel(ball_norm(&ta, rho).value, ball_norm(&a, rho).value));
        let lhs = reversal_iso(&a.multiply(&b)?);
        let rhs = ta.multiply(&reversal_iso(&b))?;
        hom = hom.max(lhs.max_rel_diff(&rhs));
        if r.out_of_time() {
            break;
        }
    }
    r.push(Item::number("isometry-deviation[polydisk]", poly).assert(Op::Le, 0.0, 1e-12));
    r.push(Item::number("isometry-deviation[ball]", ball).assert(Op::Le, 0.0, 1e-12));
    r.push(Item::number("homomorphism-deviation", hom).assert(Op::Le, 0.0, 1e-12));
    Ok(())
}

const QUOTIENT_TOL: f64 = 1e-6;

const QUOTIENT_RHOS: [f64; 2] = [0.3, 0.9];

fn quotient_polydisk(r: &mut Runner, common: &Common) -> Result<()> {
    let slices = SliceSet::new(2, QParameter::one(), 2);
    for rho in QUOTIENT_RHOS {
        let spot = quotient_norm_l1(
            &canonical_lift(&MultiIndex::new(vec![1, 1]), 2),
            rho,
            None,
            &slices,
        )?;
        r.push(
            Item::number(format!("spot[x1*x2,|q|=1,rho={rho}]"), spot.value).assert(
                Op::Eq,
                rho * rho,
                QUOTIENT_TOL,
            ),
        );
    }
    for (qmod, phase) in [(0.5, 0.7), (1.0, FRAC_PI_4), (2.0, -1.1)] {
        for n in 2..=3 {
            let q = QParameter::new(qmod, phase)?;
            let deg = 5;
            let slices = SliceSet::new(n, q, deg);
            for rho in QUOTIENT_RHOS {
                let (mut worst, mut worst_tau) = (0.0f64, 0.0f64);
                for k in MultiIndex::up_to_degree(n, deg) {
                    let expected = w_q(&k, q.qmod()) * rho.powi(k.degree() as i32);
                    let lift = canonical_lift(&k, deg);
                    let v = quotient_norm_l1(&lift, rho, None, &slices)?.value;
                    worst = worst.max((v - expected).abs() / expected);
                    let vt = quotient_norm_l1(&lift, rho, Some(common.tau), &slices)?.value;
                    worst_tau = worst_tau.max((vt - expected).abs() / expected);
                    if r.out_of_time() {
                        return Ok(());
                    }
                }
                let label = format!("n={n},|q|={qmod},rho={rho}");
                r.push(Item::number(format!("taylor-deviation[{label}]"), worst).assert(
                    Op::Le,
                    0.0,
                    QUOTIENT_TOL,
                ));
                r.push(
                    Item::number(format!("tau-deviation[{label},tau={}]", common.tau), worst_tau).assert(
                        Op::Le,
                        0.0,
                        QUOTIENT_TOL,
                    ),
                );
            }
        }
    }
    Ok(())
}

fn quotient_ball(r: &mut Runner) -> Result<()> {
    let slices = SliceSet::new(2, QParameter::one(), 2);
    for rho in QUOTIENT_RHOS {
        let spot = quotient_norm_l2(&canonical_lift(&MultiIndex::new(vec![1, 1]), 2), rho, &slices)?;
        r.push(
            Item::number(format!("spot[x1*x2,|q|=1,rho={rho}]"), spot.value).assert(
                Op::Eq,
                rho * rho / SQRT_2,
                QUOTIENT_TOL,
            ),
        );
    }
    for (qmod, phase) in [(0.5, 0.7), (1.0, FRAC_PI_4), (2.0, -1.1)] {
        for n in 2..=3 {
            let q = QParameter::new(qmod, phase)?;
            let deg = 5;
            let slices = SliceSet::new(n, q, deg);
            for rho in QUOTIENT_RHOS {
                let mut worst = 0.0f64;
                for k in MultiIndex::up_to_degree(n, deg) {
                    let expected = ball_weight(&k, q.qmod()) * rho.powi(k.degree() as i32);
                    let v = quotient_norm_l2(&canonical_lift(&k, deg), rho, &slices)?.value;
                    worst = worst.max((v - expected).abs() / expected);
                    if r.out_of_time() {
                        return Ok(());
                    }
                }
                r.push(
                    Item::number(format!("ball-deviation[n={n},|q|={qmod},rho={rho}]"), worst).assert(
                        Op::Le,
                        0.0,
                        QUOTIENT_TOL,
                    ),
                );
            }
        }
    }
    Ok(())
}

fn jsr_separation(r: &mut Runner) -> Result<()> {
    let q = QParameter::new(1.0, FRAC_PI_4)?;
    let grid = default_grid(1.0, 12);
    let tuple = AlgebraTuple::quantum_generators(2, q);
    let pd = jsr_estimate(&tuple, Family::Polydisk, 2.0, 1.0, 200, &grid)?;
    let ball = jsr_estimate(&tuple, Family::Ball, 2.0, 1.0, 200, &grid)?;
    let flags = |item: Item, e: &qanalytic::JsrEstimate| {
        item.flag("poor-fit", e.any_poor_fit())
            .flag("truncated", e.any_truncated())
    };
    r.push(within(
        flags(Item::number("jsr[polydisk]", pd.extrapolated), &pd),
        1.40,
        1.43,
    ));
    r.push(within(
        flags(Item::number("jsr[ball]", ball.extrapolated), &ball),
        0.99,
        1.01,
    ));
    r.push(Item::number("ratio", pd.extrapolated / ball.extrapolated).assert(Op::Ge, 1.35, 0.0));
    Ok(())
}

fn fock_ccr(r: &mut Runner) -> Result<()> {
    for (n, q, k) in [(1, 0.5, 12), (2, 0.3, 12), (2, 0.7, 12), (2, 0.9, 8)] {
        let f = FockTruncation::new(n, q, k)?;
        let res = verify_tw_ccr(&f)?;
        let label = format!("n={n},q={q},K={k}");
        r.push(Item::number(format!("window-residual[{label}]"), res.window).assert(Op::Le, 0.0, 1e-12));
        r.push(Item::number(format!("boundary-residual[{label}]"), res.full));
        if r.out_of_time() {
            return Ok(());
        }
    }
    Ok(())
}

fn vaksman(r: &mut Runner) -> Result<()> {
    let q = 0.5;
    let f = FockTruncation::new(1, q, 60)?;
    let g = op_norm(&rep_generator(1, &f)?, &f)?;
    r.push(Item::number("generator-norm[K=60]", g).assert(Op::Eq, 1.0, 1e-4));
    let rho = 0.8;
    let mut worst = 0.0f64;
    for m in 0..=6u32 {
        let a = QElement::monomial(1, QParameter::real(q)?, 6, MultiIndex::new(vec![m]), c(1.0, 0.0))?;
        worst = worst.max((vaksman_norm(&a, rho, &f)? - rho.powi(m as i32)).abs());
    }
    r.push(Item::number("monomial-deviation[n=1,m<=6]", worst).assert(Op::Le, 0.0, 1e-4));
    let f2 = FockTruncation::new(2, q, 30)?;
    let qp = QParameter::real(q)?;
    for rho in [0.3, 0.5] {
        for rho2 in [0.6, 0.75, 0.9] {
            let (mut up, mut down) = (0.0f64, 0.0f64);
            for k in MultiIndex::up_to_degree(2, 6) {
                let a = QElement::monomial(2, qp, 6, k, c(1.0, 0.0))?;
                up = up.max(vaksman_norm(&a, rho, &f2)? / ball_norm(&a, rho2).value);
                down = down.max(ball_norm(&a, rho).value / vaksman_norm(&a, rho2, &f2)?);
            }
            let label = format!("rho={rho},rho'={rho2}");
            r.push(Item::number(format!("vaksman-over-ball[{label}]"), up).assert(Op::Le, f64::MAX, 0.0));
            r.push(Item::number(format!("ball-over-vaksman[{label}]"), down).assert(Op::Le, f64::MAX, 0.0));
            if r.out_of_time() {
                return Ok(());
            }
        }
    }
    Ok(())
}

const SPHERE_SAMPLES: usize = 200_000;

fn stirling(r: &mut Runner, seed: u64) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let radius = 0.9;
    let mut worst = 0.0f64;
    for n in 2..=3 {
        // squared moduli of a uniform sphere point are uniform on the simplex
        let points: Vec<Vec<f64>> = (0..SPHERE_SAMPLES)
            .map(|_| {
                let e: Vec<f64> = (0..n)
                    .map(|_| -rng.random::<f64>().max(f64::MIN_POSITIVE).ln())
                    .collect();
                let s: f64 = e.iter().sum();
                e.into_iter().map(|x| x / s).collect()
            })
            .collect();
        for k in MultiIndex::up_to_degree(n, 6)
            .into_iter()
            .filter(|k| k.degree() > 0)
        {
            let sampled = points
                .iter()
                .map(|u| {
                    u.iter()
                        .zip(k.entries())
                        .map(|(&x, &e)| (radius * radius * x).powf(e as f64 / 2.0))
                        .product::<f64>()
                })
                .fold(0.0, f64::max);
            let exact = monomial_sup(&k, Domain::Ball, radius);
            worst = worst.max((exact - sampled) / exact);
        }
        if r.out_of_time() {
            return Ok(());
        }
    }
    r.push(Item::number("sphere-sup-deviation", worst).assert(Op::Le, 0.0, 0.01));
    for k in [vec![100, 100], vec![200, 0], vec![67, 67, 66], vec![150, 30, 20]] {
        let label = format!("{k:?}");
        let ratio = stirling_ratio(&MultiIndex::new(k))?;
        r.push(Item::number(format!("stirling-ratio[k={label}]"), ratio).assert(Op::Eq, 1.0, 0.05));
    }
    Ok(())
}

fn weight_equivalence(r: &mut Runner) -> Result<()> {
    for qmod in [2.0f64, 3.0] {
        let lower: f64 = (1..200).map(|m| 1.0 - qmod.powi(-2 * m)).product();
        for n in 1..=3 {
            let scan = weight_ratio_scan(QModulus::new(qmod)?, n, 50)?;
            let label = format!("|q|={qmod},n={n}");
            r.push(Item::number(format!("min-ratio[{label}]"), scan.min).assert(Op::Ge, lower, 1e-6));
            r.push(Item::number(format!("max-ratio[{label}]"), scan.max).assert(Op::Le, 1.0, 1e-6));
            if r.out_of_time() {
                return Ok(());
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rewrite_counts_inversions() {
        let q = c(0.0, 1.0);
        let (counts, coeff, swaps) = rewrite(&[2, 1, 2, 1], q);
        assert_eq!(counts, vec![2, 2]);
        assert_eq!(swaps, 3);
        assert!((coeff - q.powi(-3)).norm() < 1e-15);
    }

    #[test]
    fn names_match_value_enum() {
        for s in Suite::value_variants() {
            assert_eq!(s.to_possible_value().unwrap().get_name(), s.name());
        }
    }
}
