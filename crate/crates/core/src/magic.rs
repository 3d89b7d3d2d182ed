//! Magic unitaries: `k × k` arrays of `d × d` orthogonal projections whose
//! rows and columns are partitions of unity. These are the finite-dimensional
//! representations of the quantum permutation group generators.
//!
//! Row and column indices are 0-based.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::partitions::{is_noncrossing, Partition};
use crate::sampling;
use crate::scalar::{commutator, distance, ensure_square, frobenius, hermitian_part, identity, CMatrix, Real};

/// Residual above which a supplied `f64` projection is rejected instead of
/// repaired. Lower precisions use `1000 ε` when that is larger.
pub const PROJECTION_REPAIR_LIMIT: f64 = 1e-8;

fn repair_limit<T: Real>() -> f64 {
    PROJECTION_REPAIR_LIMIT.max(1e3 * T::default_epsilon().as_f64())
}

/// Commutator norm below which a projection pair is regarded as degenerate.
pub const GENERIC_COMMUTATOR: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct MagicUnitary<T: Real> {
    k: usize,
    d: usize,
    entries: Vec<CMatrix<T>>,
    // entries that are exactly zero; products through them are skipped
    zero: Vec<bool>,
}

impl<T: Real> MagicUnitary<T> {
    /// Row-major `k × k` entries. Only shapes are checked; use
    /// [`verify_relations`] for the defining relations.
    pub fn from_entries(k: usize, d: usize, entries: Vec<CMatrix<T>>) -> Result<Self> {
        if k == 0 || d == 0 {
            return Err(Error::EmptyInput("magic unitary"));
        }
        if entries.len() != k * k {
            return Err(Error::SizeMismatch {
                left: entries.len(),
                right: k * k,
            });
        }
        for e in &entries {
            ensure_square(e, d)?;
        }
        let zero = entries
            .iter()
            .map(|e| e.iter().all(|z| *z == num_complex::Complex::new(T::zero(), T::zero())))
            .collect();
        Ok(MagicUnitary { k, d, entries, zero })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn entry(&self, i: usize, j: usize) -> &CMatrix<T> {
        &self.entries[i * self.k + j]
    }

    pub fn is_zero_entry(&self, i: usize, j: usize) -> bool {
        self.zero[i * self.k + j]
    }

    pub fn entries(&self) -> &[CMatrix<T>] {
        &self.entries
    }

    /// Largest commutator norm between any two entries.
    pub fn max_commutator(&self) -> f64 {
        let mut worst = 0.0f64;
        for (a, ea) in self.entries.iter().enumerate() {
            for eb in &self.entries[a + 1..] {
                worst = worst.max(frobenius(&commutator(ea, eb)));
            }
        }
        worst
    }

    /// Replaces one entry, e.g. to perturb a valid unitary.
    pub fn with_entry(&self, i: usize, j: usize, value: CMatrix<T>) -> Result<Self> {
        let mut entries = self.entries.clone();
        entries[i * self.k + j] = value;
        Self::from_entries(self.k, self.d, entries)
    }
}

/// Permutation matrix `u_ij = δ_{σ(i) j} · 1_d`. `sigma` is 0-based.
pub fn from_permutation<T: Real>(sigma: &[usize], d: usize) -> Result<MagicUnitary<T>> {
    let k = sigma.len();
    let mut seen = vec![false; k];
    for &s in sigma {
        if s >= k || seen[s] {
            return Err(Error::InvalidPermutation(sigma.to_vec()));
        }
        seen[s] = true;
    }
    let entries = (0..k * k)
        .map(|ij| {
            if sigma[ij / k] == ij % k {
                identity(d)
            } else {
                CMatrix::zeros(d, d)
            }
        })
        .collect();
    MagicUnitary::from_entries(k, d, entries)
}

/// Re-symmetrizes `q` and rejects it if it is not an orthogonal projection.
pub fn validate_projection<T: Real>(q: &CMatrix<T>) -> Result<CMatrix<T>> {
    let d = q.nrows();
    ensure_square(q, d)?;
    let h = hermitian_part(q);
    let residual = distance(q, &h).max(distance(&(&h * &h), &h));
    if residual > repair_limit::<T>() {
        return Err(Error::NotProjection { residual });
    }
    Ok(h)
}

/// The 4 × 4 magic unitary with 2 × 2 blocks `[[q_i, 1−q_i], [1−q_i, q_i]]`.
pub fn block_pair<T: Real>(q1: &CMatrix<T>, q2: &CMatrix<T>) -> Result<MagicUnitary<T>> {
    block_chain(&[q1.clone(), q2.clone()])
}

/// Block-diagonal `2r × 2r` magic unitary built from projections `q_1, …, q_r`.
pub fn block_chain<T: Real>(qs: &[CMatrix<T>]) -> Result<MagicUnitary<T>> {
    let Some(first) = qs.first() else {
        return Err(Error::EmptyInput("projection list"));
    };
    let d = first.nrows();
    let qs = qs
        .iter()
        .map(|q| {
            ensure_square(q, d)?;
            validate_projection(q)
        })
        .collect::<Result<Vec<_>>>()?;
    let k = 2 * qs.len();
    let one = identity::<T>(d);
    let mut entries = vec![CMatrix::zeros(d, d); k * k];
    for (b, q) in qs.iter().enumerate() {
        let (r, c) = (2 * b, 2 * b);
        let co = &one - q;
        entries[r * k + c] = q.clone();
        entries[r * k + c + 1] = co.clone();
        entries[(r + 1) * k + c] = co;
        entries[(r + 1) * k + c + 1] = q.clone();
    }
    MagicUnitary::from_entries(k, d, entries)
}

/// Projection onto the span of the first `rank` columns of a seeded random unitary.
pub fn random_projection<T: Real>(d: usize, rank: usize, seed: u64) -> Result<CMatrix<T>> {
    if d == 0 {
        return Err(Error::EmptyInput("dimension"));
    }
    if rank > d {
        return Err(Error::RankOutOfRange { rank, dim: d });
    }
    if rank == 0 {
        return Ok(CMatrix::zeros(d, d));
    }
    if rank == d {
        return Ok(identity(d));
    }
    let mut rng = sampling::rng(seed);
    let q = sampling::random_unitary::<T, _>(&mut rng, d);
    let v = q.columns(0, rank);
    Ok(hermitian_part(&(v * v.adjoint())))
}

/// Two rank-`rank` projections whose commutator norm is at least
/// [`GENERIC_COMMUTATOR`], resampling from consecutive seeds as needed.
/// Returns the pair and the seed offset that produced it.
pub fn generic_projection_pair<T: Real>(d: usize, rank: usize, seed: u64) -> Result<(CMatrix<T>, CMatrix<T>, u64)> {
    if rank == 0 || rank >= d {
        return Err(Error::Precondition(format!(
            "rank {rank} projections in dimension {d} always commute"
        )));
    }
    for attempt in 0..1000u64 {
        let base = seed.wrapping_mul(2).wrapping_add(attempt.wrapping_mul(0x9e37_79b9));
        let p = random_projection::<T>(d, rank, base)?;
        let q = random_projection::<T>(d, rank, base.wrapping_add(1))?;
        if frobenius(&commutator(&p, &q)) >= GENERIC_COMMUTATOR {
            return Ok((p, q, attempt));
        }
    }
    Err(Error::Precondition("no generic projection pair found".into()))
}

/// `block_chain` of `r` seeded projections of rank `⌈d/2⌉` in dimension `d`,
/// resampled until some pair has commutator norm at least
/// [`GENERIC_COMMUTATOR`] (for `r ≥ 2`).
pub fn generic_block_chain<T: Real>(r: usize, d: usize, seed: u64) -> Result<MagicUnitary<T>> {
    if r == 0 {
        return Err(Error::EmptyInput("projection list"));
    }
    let rank = d.div_ceil(2).min(d.saturating_sub(1)).max(1);
    if r >= 2 && rank >= d {
        return Err(Error::Precondition(format!(
            "projections in dimension {d} always commute"
        )));
    }
    for attempt in 0..1000u64 {
        let base = seed
            .wrapping_mul(0x1000_0000_01b3)
            .wrapping_add(attempt.wrapping_mul(0x9e37_79b9));
        let qs = (0..r as u64)
            .map(|t| random_projection::<T>(d, rank, base.wrapping_add(t)))
            .collect::<Result<Vec<_>>>()?;
        let generic = r == 1
            || qs.iter().enumerate().any(|(a, p)| {
                qs[a + 1..]
                    .iter()
                    .any(|q| frobenius(&commutator(p, q)) >= GENERIC_COMMUTATOR)
            });
        if generic {
            return block_chain(&qs);
        }
    }
    Err(Error::Precondition("no generic projection chain found".into()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelationsReport {
    pub tolerance: f64,
    pub projection: f64,
    pub row_orthogonality: f64,
    pub column_orthogonality: f64,
    pub row_sums: f64,
    pub column_sums: f64,
    /// `Σ_k u_ik u_jk = δ_ij` and `Σ_k u_ki u_kj = δ_ij`.
    pub orthogonality: f64,
    pub max_residual: f64,
    pub passed: bool,
}

/// Residuals of every defining relation of the quantum permutation group.
pub fn verify_relations<T: Real>(u: &MagicUnitary<T>, tol: T) -> RelationsReport {
    let (k, d) = (u.k(), u.d());
    let one = identity::<T>(d);
    let zero = CMatrix::<T>::zeros(d, d);

    let mut projection = 0.0f64;
    for e in u.entries() {
        projection = projection.max(distance(e, &e.adjoint())).max(distance(&(e * e), e));
    }

    let mut row_orth = 0.0f64;
    let mut col_orth = 0.0f64;
    for a in 0..k {
        for b in 0..k {
            for c in 0..k {
                if b == c {
                    continue;
                }
                row_orth = row_orth.max(frobenius(&(u.entry(a, b) * u.entry(a, c))));
                col_orth = col_orth.max(frobenius(&(u.entry(b, a) * u.entry(c, a))));
            }
        }
    }

    let mut row_sums = 0.0f64;
    let mut col_sums = 0.0f64;
    for a in 0..k {
        let r = (0..k).fold(zero.clone(), |acc, j| acc + u.entry(a, j));
        let c = (0..k).fold(zero.clone(), |acc, i| acc + u.entry(i, a));
        row_sums = row_sums.max(distance(&r, &one));
        col_sums = col_sums.max(distance(&c, &one));
    }

    let mut orthogonality = 0.0f64;
    for i in 0..k {
        for j in 0..k {
            let target = if i == j { &one } else { &zero };
            let rows = (0..k).fold(zero.clone(), |acc, m| acc + u.entry(i, m) * u.entry(j, m));
            let cols = (0..k).fold(zero.clone(), |acc, m| acc + u.entry(m, i) * u.entry(m, j));
            orthogonality = orthogonality.max(distance(&rows, target)).max(distance(&cols, target));
        }
    }

    let max_residual = [projection, row_orth, col_orth, row_sums, col_sums, orthogonality]
        .into_iter()
        .fold(0.0, f64::max);
    let tol = tol.as_f64();
    RelationsReport {
        tolerance: tol,
        projection,
        row_orthogonality: row_orth,
        column_orthogonality: col_orth,
        row_sums,
        column_sums: col_sums,
        orthogonality,
        max_residual,
        passed: max_residual <= tol,
    }
}

fn check_indices<T: Real>(u: &MagicUnitary<T>, idx: &[usize]) -> Result<()> {
    match idx.iter().find(|&&x| x >= u.k()) {
        Some(&index) => Err(Error::IndexOutOfRange { index, bound: u.k() }),
        None => Ok(()),
    }
}

/// `u_{i(1)j(1)} ⋯ u_{i(n)j(n)}`.
pub fn word_product<T: Real>(u: &MagicUnitary<T>, i: &[usize], j: &[usize]) -> Result<CMatrix<T>> {
    if i.len() != j.len() {
        return Err(Error::SizeMismatch {
            left: i.len(),
            right: j.len(),
        });
    }
    check_indices(u, i)?;
    check_indices(u, j)?;
    Ok(i.iter()
        .zip(j)
        .fold(identity(u.d()), |acc, (&a, &b)| acc * u.entry(a, b)))
}

/// `Σ_{ker j ≥ π} u_{i(1)j(1)} ⋯ u_{i(n)j(n)}` for non-crossing `π`.
///
/// The sum runs over one free `j`-value per block of `π`. For non-crossing
/// `π` it equals `1` when `ker i ≥ π` and `0` otherwise.
pub fn interval_collapse_sum<T: Real>(u: &MagicUnitary<T>, i: &[usize], pi: &Partition) -> Result<CMatrix<T>> {
    if !is_noncrossing(pi) {
        return Err(Error::Crossing(pi.to_string()));
    }
    bruteforce_collapse_sum(u, i, pi)
}

/// [`interval_collapse_sum`] without the non-crossing guard.
pub fn bruteforce_collapse_sum<T: Real>(u: &MagicUnitary<T>, i: &[usize], pi: &Partition) -> Result<CMatrix<T>> {
    if pi.n() != i.len() {
        return Err(Error::SizeMismatch {
            left: pi.n(),
            right: i.len(),
        });
    }
    check_indices(u, i)?;
    let mut acc = CMatrix::zeros(u.d(), u.d());
    let mut assigned = vec![usize::MAX; pi.block_count()];
    collapse_dfs(u, i, pi.labels(), 0, &mut assigned, &identity(u.d()), &mut acc);
    Ok(acc)
}

fn collapse_dfs<T: Real>(
    u: &MagicUnitary<T>,
    i: &[usize],
    labels: &[usize],
    pos: usize,
    assigned: &mut [usize],
    prefix: &CMatrix<T>,
    acc: &mut CMatrix<T>,
) {
    if pos == i.len() {
        *acc += prefix;
        return;
    }
    let block = labels[pos];
    let fixed = assigned[block];
    let choices: Box<dyn Iterator<Item = usize>> = if fixed == usize::MAX {
        Box::new(0..u.k())
    } else {
        Box::new(std::iter::once(fixed))
    };
    for j in choices {
        if u.is_zero_entry(i[pos], j) {
            continue;
        }
        let next = prefix * u.entry(i[pos], j);
        if fixed == usize::MAX {
            assigned[block] = j;
        }
        collapse_dfs(u, i, labels, pos + 1, assigned, &next, acc);
        if fixed == usize::MAX {
            assigned[block] = usize::MAX;
        }
    }
}

/// `[ker i ≥ π]`: the value the collapse sum takes for non-crossing `π`.
pub fn collapse_indicator(i: &[usize], pi: &Partition) -> bool {
    pi.is_constant_on_blocks(i)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollapseSweep {
    pub sums_checked: usize,
    pub max_residual: f64,
    /// Partition and 0-based index tuple of the worst sum.
    pub worst: Option<(String, Vec<usize>)>,
}

/// Distance of [`interval_collapse_sum`] from `1·[ker i ≥ π]` over every
/// non-crossing `π` and every `i ∈ {0..k}^n`, `n ≤ n_max`.
pub fn collapse_lemma_sweep<T: Real>(u: &MagicUnitary<T>, n_max: usize) -> Result<CollapseSweep> {
    let (k, d) = (u.k(), u.d());
    let one = identity::<T>(d);
    let mut sweep = CollapseSweep {
        sums_checked: 0,
        max_residual: 0.0,
        worst: None,
    };
    for n in 1..=n_max {
        let partitions = crate::partitions::enumerate_noncrossing(n)?;
        let total = k
            .checked_pow(n as u32)
            .ok_or(Error::SizeOutOfRange { n, min: 1, max: 16 })?;
        for code in 0..total {
            let i: Vec<usize> = (0..n).map(|t| code / k.pow(t as u32) % k).collect();
            for pi in &partitions {
                let sum = interval_collapse_sum(u, &i, pi)?;
                let residual = if collapse_indicator(&i, pi) {
                    distance(&sum, &one)
                } else {
                    frobenius(&sum)
                };
                if sweep.worst.is_none() || residual > sweep.max_residual {
                    sweep.max_residual = residual;
                    sweep.worst = Some((pi.to_string(), i.clone()));
                }
                sweep.sums_checked += 1;
            }
        }
    }
    Ok(sweep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partitions::{enumerate_all, enumerate_noncrossing, kernel};
    use crate::scalar::cplx;

    fn pair(seed: u64) -> MagicUnitary<f64> {
        let (p, q, _) = generic_projection_pair::<f64>(2, 1, seed).unwrap();
        block_pair(&p, &q).unwrap()
    }

    #[test]
    fn permutation_unitaries() {
        let u = from_permutation::<f64>(&[0, 1, 2], 1).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert_eq!(u.entry(i, j)[(0, 0)], cplx(expected, 0.0));
            }
        }
        let swap = from_permutation::<f64>(&[1, 0], 2).unwrap();
        assert_eq!(swap.entry(0, 1), &identity::<f64>(2));
        assert!(swap.is_zero_entry(0, 0));
        assert!(matches!(
            from_permutation::<f64>(&[0, 0], 1),
            Err(Error::InvalidPermutation(_))
        ));
        assert!(matches!(
            from_permutation::<f64>(&[0, 2], 1),
            Err(Error::InvalidPermutation(_))
        ));
    }

    #[test]
    fn permutation_relations_are_exact() {
        for sigma in [vec![2, 0, 3, 1], vec![0], vec![1, 2, 0]] {
            let r = verify_relations(&from_permutation::<f64>(&sigma, 3).unwrap(), 0.0);
            assert_eq!(r.max_residual, 0.0);
            assert!(r.passed);
        }
    }

    #[test]
    fn block_pair_cases() {
        let one = identity::<f64>(1);
        let u = block_pair(&one, &one).unwrap();
        assert_eq!(u, from_permutation(&[0, 1, 2, 3], 1).unwrap());

        let u = pair(3);
        assert!(verify_relations(&u, 1e-12).passed);
        assert!(u.max_commutator() > GENERIC_COMMUTATOR);

        let p = random_projection::<f64>(2, 1, 11).unwrap();
        let u = block_pair(&p, &p).unwrap();
        assert!(verify_relations(&u, 1e-12).passed);
        assert!(u.max_commutator() < 1e-12);
    }

    #[test]
    fn block_chain_cases() {
        let (p, q, _) = generic_projection_pair::<f64>(2, 1, 5).unwrap();
        assert_eq!(
            block_chain(&[p.clone(), q.clone()]).unwrap(),
            block_pair(&p, &q).unwrap()
        );

        let u = block_chain(&[p, q, identity(2)]).unwrap();
        assert_eq!(u.k(), 6);
        assert!(verify_relations(&u, 1e-12).passed);

        let zero = CMatrix::<f64>::zeros(1, 1);
        let u = block_chain(&[zero.clone(), zero.clone(), zero]).unwrap();
        assert_eq!(u, from_permutation(&[1, 0, 3, 2, 5, 4], 1).unwrap());
    }

    #[test]
    fn non_projections_rejected() {
        let mut m = identity::<f64>(2);
        m[(0, 0)] = cplx(0.5, 0.0);
        assert!(matches!(block_chain(&[m]), Err(Error::NotProjection { .. })));
        // oblique idempotent: repaired symmetrization is no longer idempotent
        let mut oblique = CMatrix::<f64>::zeros(2, 2);
        oblique[(0, 0)] = cplx(1.0, 0.0);
        oblique[(0, 1)] = cplx(1.0, 0.0);
        assert!(validate_projection(&oblique).is_err());
        // tiny asymmetry is repaired
        let mut nearly = random_projection::<f64>(2, 1, 1).unwrap();
        nearly[(0, 1)] += cplx(1e-12, 0.0);
        let fixed = validate_projection(&nearly).unwrap();
        assert!(distance(&fixed, &fixed.adjoint()) == 0.0);
    }

    #[test]
    fn random_projection_cases() {
        assert_eq!(random_projection::<f64>(3, 0, 1).unwrap(), CMatrix::zeros(3, 3));
        assert_eq!(random_projection::<f64>(3, 3, 1).unwrap(), identity(3));
        assert!(matches!(
            random_projection::<f64>(2, 3, 1),
            Err(Error::RankOutOfRange { .. })
        ));
        for (d, rank) in [(2, 1), (3, 1), (3, 2), (4, 2)] {
            let p = random_projection::<f64>(d, rank, 42).unwrap();
            assert!(distance(&(&p * &p), &p) < 1e-12);
            assert!(distance(&p, &p.adjoint()) < 1e-12);
            assert!((p.trace().re - rank as f64).abs() < 1e-12);
        }
        assert_eq!(
            random_projection::<f64>(3, 1, 9).unwrap(),
            random_projection::<f64>(3, 1, 9).unwrap()
        );
        let p = random_projection::<f64>(2, 1, 1).unwrap();
        let q = random_projection::<f64>(2, 1, 2).unwrap();
        assert!(frobenius(&commutator(&p, &q)) > 0.01);
    }

    #[test]
    fn perturbation_is_detected() {
        let u = pair(1);
        let mut bumped = u.entry(0, 0).clone();
        bumped[(0, 0)] += cplx(1e-3, 0.0);
        let r = verify_relations(&u.with_entry(0, 0, bumped).unwrap(), 1e-12);
        assert!(!r.passed);
        assert!(r.max_residual > 5e-4 && r.max_residual < 3e-3, "{r:?}");
        assert!((r.row_sums - 1e-3).abs() < 1e-9);
    }

    #[test]
    fn word_product_cases() {
        let u = pair(2);
        assert_eq!(word_product(&u, &[1], &[0]).unwrap(), u.entry(1, 0).clone());
        // equal adjacent columns with different rows vanish
        let z = word_product(&u, &[0, 1], &[0, 0]).unwrap();
        assert!(frobenius(&z) < 1e-12);
        let i = [0, 1, 3, 2];
        let j = [1, 0, 2, 3];
        let mut expected = identity::<f64>(2);
        for t in 0..4 {
            expected = naive_mul(&expected, u.entry(i[t], j[t]));
        }
        assert!(distance(&word_product(&u, &i, &j).unwrap(), &expected) < 1e-14);
        assert!(word_product(&u, &[0, 4], &[0, 0]).is_err());
        assert!(word_product(&u, &[0], &[0, 0]).is_err());
    }

    fn naive_mul(a: &CMatrix<f64>, b: &CMatrix<f64>) -> CMatrix<f64> {
        let n = a.nrows();
        CMatrix::from_fn(n, n, |i, j| (0..n).map(|k| a[(i, k)] * b[(k, j)]).sum())
    }

    /// Sum over the full `k^n` cube, keeping `j` with `ker j ≥ π`.
    fn cube_sum(u: &MagicUnitary<f64>, i: &[usize], pi: &Partition) -> CMatrix<f64> {
        let n = i.len();
        let k = u.k();
        let mut acc = CMatrix::zeros(u.d(), u.d());
        let mut j = vec![0usize; n];
        loop {
            if pi.is_constant_on_blocks(&j) {
                acc += word_product(u, i, &j).unwrap();
            }
            let mut t = 0;
            loop {
                if t == n {
                    return acc;
                }
                j[t] += 1;
                if j[t] < k {
                    break;
                }
                j[t] = 0;
                t += 1;
            }
        }
    }

    #[test]
    fn collapse_sum_matches_cube_enumeration() {
        let u = pair(4);
        for n in 1..=4 {
            for pi in enumerate_all(n).unwrap() {
                for i in [vec![0, 1, 2, 3], vec![1, 1, 0, 0], vec![3, 2, 3, 2]] {
                    let i = &i[..n];
                    let fast = bruteforce_collapse_sum(&u, i, &pi).unwrap();
                    assert!(distance(&fast, &cube_sum(&u, i, &pi)) < 1e-12);
                }
            }
        }
    }

    #[test]
    fn collapse_sum_examples() {
        let u = pair(6);
        let one = identity::<f64>(2);
        for n in 1..=4 {
            let i = vec![2; n];
            let s = interval_collapse_sum(&u, &i, &Partition::one(n)).unwrap();
            assert!(distance(&s, &one) < 1e-12);
            let s = interval_collapse_sum(&u, &[0, 3, 1, 2][..n], &Partition::singletons(n)).unwrap();
            assert!(distance(&s, &one) < 1e-12);
        }
        let crossing = kernel(&[1, 2, 1, 2]).unwrap();
        assert!(matches!(
            interval_collapse_sum(&u, &[0, 1, 0, 1], &crossing),
            Err(Error::Crossing(_))
        ));
        let pairs: Partition = "1,2;3,4".parse().unwrap();
        let s = interval_collapse_sum(&u, &[0, 0, 1, 1], &pairs).unwrap();
        assert!(distance(&s, &one) < 1e-10);
        let s = interval_collapse_sum(&u, &[0, 1, 0, 1], &pairs).unwrap();
        assert!(frobenius(&s) < 1e-10);
    }

    #[test]
    fn collapse_lemma_exhaustive_small() {
        let u = block_chain(&[
            random_projection::<f64>(3, 1, 1).unwrap(),
            random_projection::<f64>(3, 2, 2).unwrap(),
        ])
        .unwrap();
        let one = identity::<f64>(3);
        for n in 1..=4 {
            for pi in enumerate_noncrossing(n).unwrap() {
                for code in 0..4usize.pow(n as u32) {
                    let i: Vec<usize> = (0..n).map(|t| (code / 4usize.pow(t as u32)) % 4).collect();
                    let s = interval_collapse_sum(&u, &i, &pi).unwrap();
                    let target = if collapse_indicator(&i, &pi) {
                        one.clone()
                    } else {
                        CMatrix::zeros(3, 3)
                    };
                    assert!(distance(&s, &target) < 1e-10, "pi={pi} i={i:?}");
                }
            }
        }
    }

    #[test]
    fn commuting_entries_collapse_for_crossing_partitions() {
        let p = random_projection::<f64>(2, 1, 8).unwrap();
        let u = block_pair(&p, &p).unwrap();
        let crossing = kernel(&[1, 2, 1, 2]).unwrap();
        for i in [[0, 2, 0, 2], [0, 1, 0, 1], [0, 0, 0, 0], [3, 2, 1, 0]] {
            let s = bruteforce_collapse_sum(&u, &i, &crossing).unwrap();
            let target = if collapse_indicator(&i, &crossing) {
                identity(2)
            } else {
                CMatrix::zeros(2, 2)
            };
            assert!(distance(&s, &target) < 1e-12, "i={i:?}");
        }
    }

    #[test]
    fn collapse_sweep() {
        let sweep = collapse_lemma_sweep(&pair(9), 3).unwrap();
        assert_eq!(sweep.sums_checked, 4 + 2 * 16 + 5 * 64);
        assert!(sweep.max_residual < 1e-10);
    }

    #[test]
    fn generic_chains() {
        for (r, d) in [(2, 2), (3, 2), (3, 3), (2, 4)] {
            let u = generic_block_chain::<f64>(r, d, 17).unwrap();
            assert_eq!((u.k(), u.d()), (2 * r, d));
            assert!(verify_relations(&u, 1e-12).passed);
            assert!(u.max_commutator() >= GENERIC_COMMUTATOR);
        }
        assert_eq!(
            generic_block_chain::<f64>(2, 2, 5).unwrap(),
            generic_block_chain::<f64>(2, 2, 5).unwrap()
        );
        assert!(generic_block_chain::<f64>(2, 1, 0).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let (p, q, _) = generic_projection_pair::<f32>(2, 1, 0).unwrap();
        let u = block_pair(&p, &q).unwrap();
        assert!(verify_relations(&u, f32::default_tolerance()).passed);
    }
}
