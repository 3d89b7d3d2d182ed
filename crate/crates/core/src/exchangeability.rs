//! Invariance of joint distributions under quantum and classical
//! permutations, and the freeness criteria they are compared against.
//!
//! A sequence `(x_1, …, x_k)` is quantum exchangeable when, for every magic
//! unitary `u`,
//! `φ(x_{i(1)} ⋯ x_{i(n)}) · 1 = Σ_j u_{i(1)j(1)} ⋯ u_{i(n)j(n)} · φ(x_{j(1)} ⋯ x_{j(n)})`.
//! The checks here evaluate both sides on concrete representations of `u`.

use std::collections::HashMap;

use num_complex::Complex;
use num_rational::Rational64;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize, Serializer};

use crate::algebra::{center, BPolynomial, DecoratedWord, MomentFunctional};
use crate::cumulants::{check_mixed_cumulants, MixedCumulantReport, MAX_CUMULANT_ORDER};
use crate::error::{Error, Result};
use crate::magic::{generic_block_chain, validate_projection, MagicUnitary};
use crate::sampling;
use crate::scalar::{distance, identity, kron, CMatrix, Real};

/// Tuple count up to which every index tuple is checked.
pub const EXHAUSTIVE_LIMIT: usize = 100_000;

/// Tuples drawn per word length above [`EXHAUSTIVE_LIMIT`].
pub const SAMPLED_TUPLES: usize = 4096;

/// Permutations drawn when `S_k` is too large to enumerate.
pub const SAMPLED_PERMUTATIONS: usize = 720;

/// Largest `k` for which all of `S_k` is enumerated.
pub const MAX_ENUMERATED_K: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvarianceRecord {
    pub n: usize,
    /// 0-based index tuple.
    pub tuple: Vec<usize>,
    /// Position of the unitary (or permutation) in the checked list.
    pub unitary: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub permutation: Option<Vec<usize>>,
    pub residual: f64,
}

/// Worst record per unitary and word length, plus the overall verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvarianceReport {
    pub tolerance: f64,
    pub seed: u64,
    pub exhaustive: bool,
    pub tuples_checked: usize,
    pub records: Vec<InvarianceRecord>,
    pub max_residual: f64,
    pub passed: bool,
}

impl InvarianceReport {
    pub fn worst(&self) -> Option<&InvarianceRecord> {
        self.records
            .iter()
            .fold(None, |best: Option<&InvarianceRecord>, r| match best {
                Some(b) if b.residual >= r.residual => Some(b),
                _ => Some(r),
            })
    }
}

#[derive(Default)]
struct Worst {
    records: Vec<InvarianceRecord>,
    slots: HashMap<(usize, usize), usize>,
    checked: usize,
    exhaustive: bool,
}

impl Worst {
    fn new() -> Self {
        Worst {
            exhaustive: true,
            ..Default::default()
        }
    }

    fn offer(&mut self, group: usize, record: InvarianceRecord) {
        let key = (group, record.n);
        match self.slots.get(&key) {
            Some(&slot) => {
                if record.residual > self.records[slot].residual {
                    self.records[slot] = record;
                }
            }
            None => {
                self.slots.insert(key, self.records.len());
                self.records.push(record);
            }
        }
    }

    fn finish(self, tol: f64, seed: u64) -> InvarianceReport {
        let max_residual = self.records.iter().map(|r| r.residual).fold(0.0, f64::max);
        InvarianceReport {
            tolerance: tol,
            seed,
            exhaustive: self.exhaustive,
            tuples_checked: self.checked,
            records: self.records,
            max_residual,
            passed: max_residual <= tol,
        }
    }
}

fn digits(code: usize, k: usize, n: usize) -> Vec<usize> {
    let mut c = code;
    (0..n)
        .map(|_| {
            let d = c % k;
            c /= k;
            d
        })
        .collect()
}

fn tuple_rng(seed: u64, unitary: usize, n: usize) -> sampling::SeededRng {
    sampling::rng(seed ^ ((unitary as u64) << 32) ^ (n as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

type MomentFn<'a, T> = dyn Fn(&[usize]) -> Result<CMatrix<T>> + 'a;

/// Compares `1_d ⊗ M(i)` with `Σ_j u_{i(1)j(1)} ⋯ u_{i(n)j(n)} ⊗ M(j)` for
/// every unitary and word length.
fn invariance_core<T: Real>(
    moment: &MomentFn<'_, T>,
    m: usize,
    unitaries: &[MagicUnitary<T>],
    n_max: usize,
    tol: T,
    seed: u64,
) -> Result<InvarianceReport> {
    let mut worst = Worst::new();
    let mut tables: HashMap<(usize, usize), Vec<CMatrix<T>>> = HashMap::new();
    let one_m = identity::<T>(m);
    for (id, u) in unitaries.iter().enumerate() {
        let (k, d) = (u.k(), u.d());
        let one_d = identity::<T>(d);
        let lifted: Vec<Option<CMatrix<T>>> = (0..k * k)
            .map(|ab| {
                let (a, b) = (ab / k, ab % k);
                (!u.is_zero_entry(a, b)).then(|| kron(u.entry(a, b), &one_m))
            })
            .collect();
        for n in 1..=n_max {
            let total = k.checked_pow(n as u32).unwrap_or(usize::MAX);
            if total <= EXHAUSTIVE_LIMIT {
                if let std::collections::hash_map::Entry::Vacant(slot) = tables.entry((k, n)) {
                    slot.insert(
                        (0..total)
                            .map(|code| moment(&digits(code, k, n)))
                            .collect::<Result<Vec<_>>>()?,
                    );
                }
                let lhs: Vec<CMatrix<T>> = tables[&(k, n)].iter().map(|mj| kron(&one_d, mj)).collect();
                let mut f = lhs.clone();
                for t in (0..n).rev() {
                    let stride = k.pow(t as u32);
                    f = (0..total)
                        .map(|code| {
                            let a = code / stride % k;
                            let base = code - a * stride;
                            let mut acc = CMatrix::zeros(d * m, d * m);
                            for b in 0..k {
                                if let Some(e) = &lifted[a * k + b] {
                                    acc += e * &f[base + b * stride];
                                }
                            }
                            acc
                        })
                        .collect();
                }
                for (code, (l, r)) in lhs.iter().zip(&f).enumerate() {
                    worst.offer(
                        id,
                        InvarianceRecord {
                            n,
                            tuple: digits(code, k, n),
                            unitary: id,
                            permutation: None,
                            residual: distance(l, r),
                        },
                    );
                }
                worst.checked += total;
            } else {
                worst.exhaustive = false;
                let mut rng = tuple_rng(seed, id, n);
                let mut cache: HashMap<Vec<usize>, CMatrix<T>> = HashMap::new();
                for _ in 0..SAMPLED_TUPLES {
                    let i = sampling::tuple(&mut rng, k, n);
                    let mut acc = CMatrix::zeros(d * m, d * m);
                    let mut j = Vec::with_capacity(n);
                    let start = identity::<T>(d * m);
                    rhs_dfs(moment, &lifted, k, &i, &mut j, &start, &mut cache, &mut acc)?;
                    let mi = match cache.get(&i) {
                        Some(v) => v.clone(),
                        None => moment(&i)?,
                    };
                    worst.offer(
                        id,
                        InvarianceRecord {
                            n,
                            tuple: i,
                            unitary: id,
                            permutation: None,
                            residual: distance(&kron(&one_d, &mi), &acc),
                        },
                    );
                }
                worst.checked += SAMPLED_TUPLES;
            }
        }
    }
    Ok(worst.finish(tol.as_f64(), seed))
}

#[allow(clippy::too_many_arguments)]
fn rhs_dfs<T: Real>(
    moment: &MomentFn<'_, T>,
    lifted: &[Option<CMatrix<T>>],
    k: usize,
    i: &[usize],
    j: &mut Vec<usize>,
    prefix: &CMatrix<T>,
    cache: &mut HashMap<Vec<usize>, CMatrix<T>>,
    acc: &mut CMatrix<T>,
) -> Result<()> {
    let pos = j.len();
    if pos == i.len() {
        let mj = match cache.get(j.as_slice()) {
            Some(v) => v.clone(),
            None => {
                let v = moment(j)?;
                cache.insert(j.clone(), v.clone());
                v
            }
        };
        let d = prefix.nrows() / mj.nrows();
        *acc += prefix * kron(&identity::<T>(d), &mj);
        return Ok(());
    }
    for b in 0..k {
        if let Some(e) = &lifted[i[pos] * k + b] {
            j.push(b);
            rhs_dfs(moment, lifted, k, i, j, &(prefix * e), cache, acc)?;
            j.pop();
        }
    }
    Ok(())
}

fn check_unitaries<T: Real, M: MomentFunctional<T> + ?Sized>(mf: &M, unitaries: &[MagicUnitary<T>]) -> Result<()> {
    if unitaries.is_empty() {
        return Err(Error::EmptyInput("unitaries"));
    }
    for u in unitaries {
        mf.check_variable(u.k() - 1)?;
    }
    Ok(())
}

/// Scalar quantum invariance of `φ ∘ E` under each unitary, for all words of
/// length `1..=n_max`. Tuples are enumerated when `k^n ≤` [`EXHAUSTIVE_LIMIT`]
/// and sampled from `seed` otherwise.
pub fn check_quantum_invariance<T: Real, M: MomentFunctional<T> + ?Sized>(
    mf: &M,
    unitaries: &[MagicUnitary<T>],
    n_max: usize,
    tol: T,
    seed: u64,
) -> Result<InvarianceReport> {
    check_unitaries(mf, unitaries)?;
    let moment = |j: &[usize]| -> Result<CMatrix<T>> { Ok(CMatrix::from_element(1, 1, mf.scalar_moment(j)?)) };
    invariance_core(&moment, 1, unitaries, n_max, tol, seed)
}

/// B-valued invariance `1 ⊗ E[x_{i(1)} b_1 ⋯ b_{n−1} x_{i(n)}] =
/// Σ_j u_{i(1)j(1)} ⋯ u_{i(n)j(n)} ⊗ E[x_{j(1)} b_1 ⋯ b_{n−1} x_{j(n)}]`,
/// evaluated in `M_d ⊗ M_m`. Words of length `n` use `inner[..n−1]`.
pub fn check_e_invariance<T: Real, M: MomentFunctional<T> + ?Sized>(
    mf: &M,
    unitaries: &[MagicUnitary<T>],
    inner: &[CMatrix<T>],
    n_max: usize,
    tol: T,
    seed: u64,
) -> Result<InvarianceReport> {
    if !mf.b_is_commutative() {
        return Err(Error::NonCommutativeSubalgebra);
    }
    check_unitaries(mf, unitaries)?;
    if inner.len() + 1 < n_max {
        return Err(Error::SizeMismatch {
            left: inner.len() + 1,
            right: n_max,
        });
    }
    let m = mf.b_dim();
    for b in inner {
        let residual = mf.b_residual(b);
        if residual > tol.as_f64() {
            return Err(Error::NotInSubalgebra { residual });
        }
    }
    let moment = |j: &[usize]| -> Result<CMatrix<T>> {
        let mut decs = vec![identity::<T>(m)];
        decs.extend_from_slice(&inner[..j.len() - 1]);
        decs.push(identity(m));
        mf.evaluate(&DecoratedWord::new(j.to_vec(), decs)?)
    };
    invariance_core(&moment, m, unitaries, n_max, tol, seed)
}

/// All permutations of `0..k` in lexicographic order.
pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut p: Vec<usize> = (0..k).collect();
    let mut out = vec![p.clone()];
    loop {
        let Some(i) = (1..k).rev().find(|&i| p[i - 1] < p[i]) else {
            return out;
        };
        let j = (i..k).rev().find(|&j| p[j] > p[i - 1]).expect("successor exists");
        p.swap(i - 1, j);
        p[i..].reverse();
        out.push(p.clone());
    }
}

/// `φ(x_{i(1)} ⋯ x_{i(n)}) = φ(x_{σ(i(1))} ⋯ x_{σ(i(n))})` for `σ ∈ S_k`.
///
/// All of `S_k` is used for `k ≤` [`MAX_ENUMERATED_K`], otherwise
/// [`SAMPLED_PERMUTATIONS`] seeded shuffles. Records keep the worst
/// permutation per word length.
pub fn check_classical_exchangeability<T: Real, M: MomentFunctional<T> + ?Sized>(
    mf: &M,
    k: usize,
    n_max: usize,
    tol: T,
    seed: u64,
) -> Result<InvarianceReport> {
    if k == 0 {
        return Err(Error::EmptyInput("variables"));
    }
    mf.check_variable(k - 1)?;
    let mut rng = sampling::rng(seed);
    let perms = if k <= MAX_ENUMERATED_K {
        permutations(k)
    } else {
        (0..SAMPLED_PERMUTATIONS)
            .map(|_| {
                let mut p: Vec<usize> = (0..k).collect();
                p.shuffle(&mut rng);
                p
            })
            .collect()
    };
    let mut worst = Worst::new();
    worst.exhaustive = k <= MAX_ENUMERATED_K;
    let mut cache: HashMap<Vec<usize>, Complex<T>> = HashMap::new();
    let mut phi = |j: &[usize]| -> Result<Complex<T>> {
        if let Some(v) = cache.get(j) {
            return Ok(*v);
        }
        let v = mf.scalar_moment(j)?;
        cache.insert(j.to_vec(), v);
        Ok(v)
    };
    for n in 1..=n_max {
        let total = k.checked_pow(n as u32).unwrap_or(usize::MAX);
        let tuples: Vec<Vec<usize>> = if total <= EXHAUSTIVE_LIMIT {
            (0..total).map(|c| digits(c, k, n)).collect()
        } else {
            worst.exhaustive = false;
            let mut trng = tuple_rng(seed, 0, n);
            (0..SAMPLED_TUPLES).map(|_| sampling::tuple(&mut trng, k, n)).collect()
        };
        for i in &tuples {
            let base = phi(i)?;
            for (s, sigma) in perms.iter().enumerate() {
                let image: Vec<usize> = i.iter().map(|&v| sigma[v]).collect();
                let residual = nalgebra::ComplexField::modulus(base - phi(&image)?).as_f64();
                worst.offer(
                    0,
                    InvarianceRecord {
                        n,
                        tuple: i.clone(),
                        unitary: s,
                        permutation: Some(sigma.clone()),
                        residual,
                    },
                );
            }
        }
        worst.checked += tuples.len();
    }
    Ok(worst.finish(tol.as_f64(), seed))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorizationReport {
    pub tolerance: f64,
    pub residual: f64,
    pub passed: bool,
}

/// `‖E[p_1(x_{i(1)}) ⋯ p_n(x_{i(n)})] − E[p_1(x_{i(1)}) ⋯ E[p_l(x_{i(l)})] ⋯ p_n(x_{i(n)})]‖`
/// for a position `l` (0-based) whose variable occurs nowhere else.
pub fn check_factorization<T: Real, M: MomentFunctional<T> + ?Sized>(
    mf: &M,
    vars: &[usize],
    polys: &[BPolynomial<T>],
    l: usize,
    tol: T,
) -> Result<FactorizationReport> {
    if vars.len() != polys.len() {
        return Err(Error::SizeMismatch {
            left: vars.len(),
            right: polys.len(),
        });
    }
    if l >= vars.len() {
        return Err(Error::IndexOutOfRange {
            index: l,
            bound: vars.len(),
        });
    }
    if vars.iter().enumerate().any(|(t, &v)| t != l && v == vars[l]) {
        return Err(Error::Precondition(format!(
            "variable {} at position {l} is not unique",
            vars[l]
        )));
    }
    let lhs = mf.evaluate_product(polys, vars)?;
    let mean = mf.evaluate_product(&polys[l..=l], &vars[l..=l])?;
    let mut replaced = polys.to_vec();
    replaced[l] = BPolynomial::constant(mean);
    let rhs = mf.evaluate_product(&replaced, vars)?;
    let residual = distance(&lhs, &rhs);
    Ok(FactorizationReport {
        tolerance: tol.as_f64(),
        residual,
        passed: residual <= tol.as_f64(),
    })
}

/// Random polynomial `Σ_{e ≤ degree} b_0 X b_1 ⋯ X b_e` with coefficients in `B`.
pub fn random_polynomial<T: Real, M: MomentFunctional<T> + ?Sized, R: Rng + ?Sized>(
    mf: &M,
    rng: &mut R,
    degree: usize,
) -> Result<BPolynomial<T>> {
    let basis = mf.b_basis();
    let terms = (0..=degree)
        .map(|e| (0..=e).map(|_| sampling::combination(rng, &basis)).collect())
        .collect();
    BPolynomial::new(terms, mf, T::lit(1e-6))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorizationSweep {
    pub tolerance: f64,
    pub products_checked: usize,
    pub max_residual: f64,
    /// Variable tuple and position of the worst residual.
    pub worst: Option<(Vec<usize>, usize)>,
    pub passed: bool,
}

/// [`check_factorization`] on seeded random tuples over `0..k`: for each
/// trial and each length `1..=n_max`, random polynomials of degree at most 2
/// are placed on a random variable tuple and every unique position is tested.
pub fn factorization_sweep<T: Real, M: MomentFunctional<T> + ?Sized>(
    mf: &M,
    k: usize,
    n_max: usize,
    trials: usize,
    tol: T,
    seed: u64,
) -> Result<FactorizationSweep> {
    if k == 0 {
        return Err(Error::EmptyInput("variables"));
    }
    mf.check_variable(k - 1)?;
    let mut rng = sampling::rng(seed);
    let mut sweep = FactorizationSweep {
        tolerance: tol.as_f64(),
        products_checked: 0,
        max_residual: 0.0,
        worst: None,
        passed: true,
    };
    for _ in 0..trials {
        for n in 1..=n_max {
            let vars = sampling::tuple(&mut rng, k, n);
            let polys = (0..n)
                .map(|_| {
                    let degree = rng.random_range(1..=2usize);
                    random_polynomial(mf, &mut rng, degree)
                })
                .collect::<Result<Vec<_>>>()?;
            for l in 0..n {
                if vars.iter().enumerate().any(|(t, &v)| t != l && v == vars[l]) {
                    continue;
                }
                let rep = check_factorization(mf, &vars, &polys, l, tol)?;
                if sweep.worst.is_none() || rep.residual > sweep.max_residual {
                    sweep.max_residual = rep.residual;
                    sweep.worst = Some((vars.clone(), l));
                }
                sweep.products_checked += 1;
            }
        }
    }
    sweep.passed = sweep.max_residual <= sweep.tolerance;
    Ok(sweep)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DefinitionCheck {
    pub products_checked: usize,
    pub max_residual: f64,
    /// Variable tuple of the worst alternating product.
    pub worst: Option<Vec<usize>>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FreenessReport {
    pub tolerance: f64,
    pub variables: Vec<usize>,
    pub n_max: usize,
    /// Alternating products of centered polynomials vanish.
    pub definition: DefinitionCheck,
    /// Mixed cumulants vanish; `None` when fewer than two variables are given.
    pub cumulants: Option<MixedCumulantReport>,
    pub agree: bool,
    pub passed: bool,
}

/// Random polynomial draws per alternating tuple, after the centered monomial.
pub const POLYNOMIAL_TRIALS: usize = 2;

/// Runs both freeness criteria on the variables `vars`.
///
/// The definition is tested on every alternating tuple of length
/// `2..=n_max`, with the centered monomial `X` and [`POLYNOMIAL_TRIALS`]
/// seeded centered polynomials of degree at most 2 in each slot.
pub fn check_freeness<T: Real, M: MomentFunctional<T> + ?Sized>(
    mf: &M,
    vars: &[usize],
    n_max: usize,
    tol: T,
    seed: u64,
) -> Result<FreenessReport> {
    let mut distinct = vars.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    for &v in &distinct {
        mf.check_variable(v)?;
    }
    if n_max > MAX_CUMULANT_ORDER {
        return Err(Error::ArityOverflow {
            arity: n_max,
            max: MAX_CUMULANT_ORDER,
        });
    }
    let tol_f = tol.as_f64();
    if distinct.len() < 2 {
        let definition = DefinitionCheck {
            products_checked: 0,
            max_residual: 0.0,
            worst: None,
            passed: true,
        };
        return Ok(FreenessReport {
            tolerance: tol_f,
            variables: distinct,
            n_max,
            definition,
            cumulants: None,
            agree: true,
            passed: true,
        });
    }

    let mut rng = sampling::rng(seed);
    let b_dim = mf.b_dim();
    let s = distinct.len();
    let mut checked = 0;
    let mut worst: Option<(Vec<usize>, f64)> = None;
    for n in 2..=n_max {
        let count = s * (s - 1).pow(n as u32 - 1);
        let tuples: Vec<Vec<usize>> = if count <= SAMPLED_TUPLES {
            alternating(&distinct, n)
        } else {
            (0..SAMPLED_TUPLES)
                .map(|_| {
                    let mut t = vec![distinct[rng.random_range(0..s)]];
                    while t.len() < n {
                        let v = distinct[rng.random_range(0..s)];
                        if v != t[t.len() - 1] {
                            t.push(v);
                        }
                    }
                    t
                })
                .collect()
        };
        for tuple in tuples {
            for trial in 0..=POLYNOMIAL_TRIALS {
                let polys = tuple
                    .iter()
                    .map(|&v| {
                        let p = if trial == 0 {
                            BPolynomial::monomial(1, b_dim)
                        } else {
                            let degree = rng.random_range(1..=2usize.min(crate::cumulants::MAX_WORD_LEN / n));
                            random_polynomial(mf, &mut rng, degree)?
                        };
                        center(&p, v, mf)
                    })
                    .collect::<Result<Vec<_>>>()?;
                let r = mf.evaluate_product(&polys, &tuple)?.norm().as_f64();
                if worst.as_ref().is_none_or(|(_, w)| r > *w) {
                    worst = Some((tuple.clone(), r));
                }
                checked += 1;
            }
        }
    }
    let max_residual = worst.as_ref().map_or(0.0, |w| w.1);
    let definition = DefinitionCheck {
        products_checked: checked,
        max_residual,
        worst: worst.map(|w| w.0),
        passed: max_residual <= tol_f,
    };
    let cumulants = check_mixed_cumulants(mf, &distinct, n_max, tol, seed.wrapping_add(1))?;
    let agree = definition.passed == cumulants.passed;
    let passed = definition.passed && cumulants.passed;
    Ok(FreenessReport {
        tolerance: tol_f,
        variables: distinct,
        n_max,
        definition,
        cumulants: Some(cumulants),
        agree,
        passed,
    })
}

fn alternating(vars: &[usize], n: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = vars.iter().map(|&v| vec![v]).collect();
    for _ in 1..n {
        out = out
            .into_iter()
            .flat_map(|t| {
                let last = t[t.len() - 1];
                vars.iter().filter(move |&&v| v != last).map(move |&v| {
                    let mut next = t.clone();
                    next.push(v);
                    next
                })
            })
            .collect();
    }
    out
}

/// Searches seeded non-commuting `block_chain` unitaries of size `k` (even)
/// for a quantum invariance violation. Returns the first failing seed with
/// its report.
pub fn search_quantum_violation<T: Real, M: MomentFunctional<T> + ?Sized>(
    mf: &M,
    k: usize,
    d: usize,
    seeds: impl IntoIterator<Item = u64>,
    n_max: usize,
    tol: T,
) -> Result<Option<(u64, InvarianceReport)>> {
    if k == 0 || !k.is_multiple_of(2) {
        return Err(Error::Precondition(format!("block unitaries have even size, got {k}")));
    }
    for seed in seeds {
        let u = generic_block_chain::<T>(k / 2, d, seed)?;
        let report = check_quantum_invariance(mf, std::slice::from_ref(&u), n_max, tol, seed)?;
        if !report.passed {
            return Ok(Some((seed, report)));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CrossingVariant {
    /// `(pq)^s + (p(1−q))^s + ((1−p)q)^s + ((1−p)(1−q))^s`.
    Plain,
    /// `(pq)^s p + (p(1−q))^s p + ((1−p)q)^s (1−p) + ((1−p)(1−q))^s (1−p)`.
    Capped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossingProbe<T: Real> {
    pub matrix: CMatrix<T>,
    /// Frobenius distance from the identity.
    pub distance: f64,
}

/// The crossing sum of two projections. It equals `1` exactly when `p` and
/// `q` commute.
pub fn crossing_sum_probe<T: Real>(
    p: &CMatrix<T>,
    q: &CMatrix<T>,
    s: usize,
    variant: CrossingVariant,
) -> Result<CrossingProbe<T>> {
    if s < 2 {
        return Err(Error::Precondition(format!("power must be at least 2, got {s}")));
    }
    if p.nrows() != q.nrows() {
        return Err(Error::DimensionMismatch {
            expected: p.nrows(),
            found: q.nrows(),
        });
    }
    let p = validate_projection(p)?;
    let q = validate_projection(q)?;
    let one = identity::<T>(p.nrows());
    let pc = &one - &p;
    let qc = &one - &q;
    let mut matrix = CMatrix::zeros(p.nrows(), p.nrows());
    for (a, b) in [(&p, &q), (&p, &qc), (&pc, &q), (&pc, &qc)] {
        let mut term = (a * b).pow(s as u32);
        if variant == CrossingVariant::Capped {
            term *= a;
        }
        matrix += term;
    }
    let distance = distance(&matrix, &one);
    Ok(CrossingProbe { matrix, distance })
}

/// Commutator norm at or below which a pair counts as commuting.
pub const COMMUTING_LIMIT: f64 = 1e-10;

/// Crossing-sum distance a generic pair must exceed.
pub const CROSSING_SEPARATION: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossingSweep {
    pub pairs: usize,
    pub commuting: usize,
    pub generic: usize,
    /// Largest distance from `1` among commuting pairs.
    pub max_commuting_distance: f64,
    /// Smallest distance from `1` among generic pairs.
    pub min_generic_distance: f64,
    pub passed: bool,
}

/// Seeded projection pairs in dimension `d`, alternating generic pairs with
/// simultaneously diagonalizable ones. Passes when commuting pairs
/// (commutator `≤` [`COMMUTING_LIMIT`]) give the identity and generic pairs
/// (commutator `≥` [`crate::magic::GENERIC_COMMUTATOR`]) stay more than
/// [`CROSSING_SEPARATION`] away from it.
pub fn crossing_iff_sweep<T: Real>(
    d: usize,
    samples: usize,
    s: usize,
    variant: CrossingVariant,
    seed: u64,
) -> Result<CrossingSweep> {
    if d < 2 {
        return Err(Error::SizeOutOfRange {
            n: d,
            min: 2,
            max: usize::MAX,
        });
    }
    let mut rng = sampling::rng(seed);
    let mut sweep = CrossingSweep {
        pairs: samples,
        commuting: 0,
        generic: 0,
        max_commuting_distance: 0.0,
        min_generic_distance: f64::INFINITY,
        passed: true,
    };
    for t in 0..samples {
        let (p, q) = if t % 2 == 0 {
            let rp = rng.random_range(1..d);
            let rq = rng.random_range(1..d);
            let sp: u64 = rng.random();
            let sq: u64 = rng.random();
            (
                random_projection_in::<T>(d, rp, sp)?,
                random_projection_in::<T>(d, rq, sq)?,
            )
        } else {
            let v = sampling::random_unitary::<T, _>(&mut rng, d);
            let mut bits = || -> Vec<Complex<T>> {
                (0..d)
                    .map(|_| Complex::new(if rng.random::<bool>() { T::one() } else { T::zero() }, T::zero()))
                    .collect()
            };
            let (a, b) = (bits(), bits());
            let proj = |diag: &[Complex<T>]| {
                crate::scalar::hermitian_part(&(&v * crate::scalar::diagonal(diag) * v.adjoint()))
            };
            (proj(&a), proj(&b))
        };
        let c = crate::scalar::frobenius(&crate::scalar::commutator(&p, &q));
        let probe = crossing_sum_probe(&p, &q, s, variant)?;
        if c <= COMMUTING_LIMIT {
            sweep.commuting += 1;
            sweep.max_commuting_distance = sweep.max_commuting_distance.max(probe.distance);
        } else if c >= crate::magic::GENERIC_COMMUTATOR {
            sweep.generic += 1;
            sweep.min_generic_distance = sweep.min_generic_distance.min(probe.distance);
        }
    }
    sweep.passed = sweep.max_commuting_distance <= COMMUTING_LIMIT
        && (sweep.generic == 0 || sweep.min_generic_distance > CROSSING_SEPARATION);
    Ok(sweep)
}

fn random_projection_in<T: Real>(d: usize, rank: usize, seed: u64) -> Result<CMatrix<T>> {
    crate::magic::random_projection(d, rank, seed)
}

fn ratio_str<S: Serializer>(r: &Rational64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleReport {
    pub n: usize,
    /// `ψ(u_11)` under the uniform average over `S_n`.
    #[serde(serialize_with = "ratio_str")]
    pub psi_u11: Rational64,
    #[serde(serialize_with = "ratio_str")]
    pub psi_u11_u21: Rational64,
    /// `ψ(u_11)²`, the value freeness with identical distribution would force
    /// on `ψ(u_11 u_21)`.
    #[serde(serialize_with = "ratio_str")]
    pub free_prediction: Rational64,
    /// Every `u(σ)` is a permutation matrix (projections, unit row and column sums).
    pub relations_exact: bool,
    /// `(u_11, …, u_n1)` is invariant under permuting row indices, words up to length 3.
    pub exchangeable: bool,
    pub words_checked: usize,
    pub contradiction: bool,
}

/// Words up to this length are used for the exchangeability sub-check.
pub const COUNTEREXAMPLE_WORD_LEN: usize = 3;

/// The coordinate functions `u_ij(σ) = [σ(i) = j]` on `S_n` for `n ∈ {2, 3}`,
/// where the quantum permutation algebra is commutative, with the uniform
/// Haar state `ψ`.
///
/// The column `(u_11, …, u_n1)` is exchangeable, yet `ψ(u_11 u_21) = 0` while
/// `ψ(u_11)² = 1/n²`: it is not free and identically distributed over
/// scalars. Indices in the report names are 1-based.
pub fn finite_counterexample(n: usize) -> Result<CounterexampleReport> {
    if !(2..=3).contains(&n) {
        return Err(Error::SizeOutOfRange { n, min: 2, max: 3 });
    }
    let perms = permutations(n);
    let count = Rational64::from_integer(perms.len() as i64);
    let u = |sigma: &[usize], i: usize, j: usize| -> Rational64 {
        if sigma[i] == j {
            Rational64::one()
        } else {
            Rational64::zero()
        }
    };
    let psi = |f: &dyn Fn(&[usize]) -> Rational64| -> Rational64 {
        perms.iter().map(|s| f(s)).fold(Rational64::zero(), |a, b| a + b) / count
    };

    let relations_exact = perms.iter().all(|s| {
        (0..n).all(|i| {
            let row = (0..n).fold(Rational64::zero(), |a, j| a + u(s, i, j));
            let col = (0..n).fold(Rational64::zero(), |a, j| a + u(s, j, i));
            let idempotent = (0..n).all(|j| u(s, i, j) * u(s, i, j) == u(s, i, j));
            row.is_one() && col.is_one() && idempotent
        })
    });

    let psi_u11 = psi(&|s| u(s, 0, 0));
    let psi_u11_u21 = psi(&|s| u(s, 0, 0) * u(s, 1, 0));
    let column_word = |rows: &[usize]| psi(&|s| rows.iter().fold(Rational64::one(), |a, &i| a * u(s, i, 0)));

    let mut exchangeable = true;
    let mut words_checked = 0;
    for m in 1..=COUNTEREXAMPLE_WORD_LEN {
        for code in 0..n.pow(m as u32) {
            let rows = digits(code, n, m);
            let base = column_word(&rows);
            for tau in &perms {
                let image: Vec<usize> = rows.iter().map(|&i| tau[i]).collect();
                exchangeable &= column_word(&image) == base;
            }
            words_checked += 1;
        }
    }

    let free_prediction = psi_u11 * psi_u11;
    let contradiction = exchangeable && relations_exact && psi_u11_u21 != free_prediction;
    Ok(CounterexampleReport {
        n,
        psi_u11,
        psi_u11_u21,
        free_prediction,
        relations_exact,
        exchangeable,
        words_checked,
        contradiction,
    })
}
