//! Operator-valued free cumulants.
//!
//! [`rho_pi`] evaluates the nested functional `ρ_π` attached to a
//! non-crossing partition by peeling interval blocks. Cumulants are extracted
//! from any [`MomentFunctional`] by [`free_cumulant`], and a
//! [`CumulantFunctional`] goes the other way: it realizes a free family of
//! identically distributed variables from a table of cumulants over a
//! commutative (diagonal) algebra `B`.

use std::collections::HashMap;
use std::marker::PhantomData;
use std::sync::{Mutex, OnceLock};

use num_complex::Complex;
use rand::Rng;
use serde::Serialize;

use crate::algebra::{BAlgebra, DecoratedWord, MomentFunctional};
use crate::error::{Error, Result};
use crate::partitions::{
    enumerate_noncrossing, first_interval_block, for_each_noncrossing, is_noncrossing, kernel, Partition,
};
use crate::sampling;
use crate::scalar::{diagonal, ensure_square, frobenius, identity, CMatrix, Field, Real};

/// Longest word a [`CumulantFunctional`] evaluates.
pub const MAX_WORD_LEN: usize = 10;

/// Largest order [`free_cumulant`] extracts from moments.
pub const MAX_CUMULANT_ORDER: usize = 8;

/// `left · x_var · right` with `left`, `right` in `B`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoratedVar<T: Real> {
    pub left: CMatrix<T>,
    pub var: usize,
    pub right: CMatrix<T>,
}

impl<T: Real> DecoratedVar<T> {
    pub fn plain(var: usize, b_dim: usize) -> Self {
        DecoratedVar {
            left: identity(b_dim),
            var,
            right: identity(b_dim),
        }
    }
}

/// `(x_{v1} c_1, x_{v2} c_2, …, x_{vn})` from `n − 1` inner decorations.
pub fn decorated_args<T: Real>(vars: &[usize], inner: &[CMatrix<T>], b_dim: usize) -> Result<Vec<DecoratedVar<T>>> {
    if vars.is_empty() {
        return Err(Error::EmptyInput("variables"));
    }
    if inner.len() + 1 != vars.len() {
        return Err(Error::SizeMismatch {
            left: inner.len() + 1,
            right: vars.len(),
        });
    }
    let mut args: Vec<DecoratedVar<T>> = vars.iter().map(|&v| DecoratedVar::plain(v, b_dim)).collect();
    for (a, c) in args.iter_mut().zip(inner) {
        ensure_square(c, b_dim)?;
        a.right = c.clone();
    }
    Ok(args)
}

/// The decorated word `l_1 x r_1 l_2 x ⋯ x r_n`.
pub fn word_of<T: Real>(args: &[DecoratedVar<T>]) -> Result<DecoratedWord<T>> {
    let Some(first) = args.first() else {
        return Err(Error::EmptyInput("arguments"));
    };
    let mut decorations = Vec::with_capacity(args.len() + 1);
    decorations.push(first.left.clone());
    for pair in args.windows(2) {
        decorations.push(&pair[0].right * &pair[1].left);
    }
    decorations.push(args[args.len() - 1].right.clone());
    DecoratedWord::new(args.iter().map(|a| a.var).collect(), decorations)
}

/// A family of B-functionals `ρ_1, ρ_2, …` on arguments of type `Arg`.
pub trait BFunctionalFamily<T: Real> {
    type Arg: Clone;

    fn max_arity(&self) -> usize;

    /// `ρ_n(a_1, …, a_n)`.
    fn eval(&self, args: &[Self::Arg]) -> Result<CMatrix<T>>;

    /// `a · b`.
    fn attach_right(&self, a: &Self::Arg, b: &CMatrix<T>) -> Self::Arg;

    /// `b · a`.
    fn attach_left(&self, b: &CMatrix<T>, a: &Self::Arg) -> Self::Arg;
}

/// Which interval block [`rho_pi_with`] collapses first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeelOrder {
    SmallestMin,
    LargestMin,
}

/// `ρ_π[a_1, …, a_n]` for non-crossing `π`.
pub fn rho_pi<T: Real, F: BFunctionalFamily<T> + ?Sized>(
    family: &F,
    pi: &Partition,
    args: &[F::Arg],
) -> Result<CMatrix<T>> {
    rho_pi_with(family, pi, args, PeelOrder::SmallestMin)
}

/// [`rho_pi`] with an explicit choice of interval block at each step.
///
/// An interval block `V = (i+1, …, i+r)` is replaced by its value multiplied
/// onto `a_i` from the right. When `V` starts at position 1 the value
/// multiplies the next remaining argument from the left instead.
pub fn rho_pi_with<T: Real, F: BFunctionalFamily<T> + ?Sized>(
    family: &F,
    pi: &Partition,
    args: &[F::Arg],
    order: PeelOrder,
) -> Result<CMatrix<T>> {
    if pi.n() != args.len() {
        return Err(Error::SizeMismatch {
            left: pi.n(),
            right: args.len(),
        });
    }
    if !is_noncrossing(pi) {
        return Err(Error::Crossing(pi.to_string()));
    }
    if let Some(big) = pi.blocks().iter().find(|b| b.len() > family.max_arity()) {
        return Err(Error::ArityOverflow {
            arity: big.len(),
            max: family.max_arity(),
        });
    }
    let mut pi = pi.clone();
    let mut args = args.to_vec();
    while pi.block_count() > 1 {
        let block = match order {
            PeelOrder::SmallestMin => first_interval_block(&pi)?,
            PeelOrder::LargestMin => pi
                .interval_blocks()
                .max_by_key(|b| b[0])
                .cloned()
                .ok_or_else(|| Error::Crossing(pi.to_string()))?,
        };
        let start = block[0] - 1;
        let end = start + block.len();
        let value = family.eval(&args[start..end])?;
        let mut rest: Vec<F::Arg> = args[..start].to_vec();
        rest.extend_from_slice(&args[end..]);
        if start > 0 {
            rest[start - 1] = family.attach_right(&rest[start - 1], &value);
        } else {
            rest[0] = family.attach_left(&value, &rest[0]);
        }
        pi = pi.remove_block(&block).expect("other blocks remain");
        args = rest;
    }
    family.eval(&args)
}

/// A family on plain matrices, given by a closure `ρ(a_1, …, a_n)`.
pub struct MatrixFamily<T: Real, F> {
    max_arity: usize,
    rho: F,
    _scalar: PhantomData<T>,
}

impl<T: Real, F: Fn(&[CMatrix<T>]) -> CMatrix<T>> MatrixFamily<T, F> {
    pub fn new(max_arity: usize, rho: F) -> Self {
        MatrixFamily {
            max_arity,
            rho,
            _scalar: PhantomData,
        }
    }
}

impl<T: Real, F: Fn(&[CMatrix<T>]) -> CMatrix<T>> BFunctionalFamily<T> for MatrixFamily<T, F> {
    type Arg = CMatrix<T>;

    fn max_arity(&self) -> usize {
        self.max_arity
    }

    fn eval(&self, args: &[CMatrix<T>]) -> Result<CMatrix<T>> {
        Ok((self.rho)(args))
    }

    fn attach_right(&self, a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
        a * b
    }

    fn attach_left(&self, b: &CMatrix<T>, a: &CMatrix<T>) -> CMatrix<T> {
        b * a
    }
}

fn attach_right<T: Real>(a: &DecoratedVar<T>, b: &CMatrix<T>) -> DecoratedVar<T> {
    DecoratedVar {
        left: a.left.clone(),
        var: a.var,
        right: &a.right * b,
    }
}

fn attach_left<T: Real>(b: &CMatrix<T>, a: &DecoratedVar<T>) -> DecoratedVar<T> {
    DecoratedVar {
        left: b * &a.left,
        var: a.var,
        right: a.right.clone(),
    }
}

/// The moment functionals `E[a_1 ⋯ a_n]` of a [`MomentFunctional`].
pub struct MomentFamily<'a, M: ?Sized>(pub &'a M);

impl<T: Real, M: MomentFunctional<T> + ?Sized> BFunctionalFamily<T> for MomentFamily<'_, M> {
    type Arg = DecoratedVar<T>;

    fn max_arity(&self) -> usize {
        usize::MAX
    }

    fn eval(&self, args: &[DecoratedVar<T>]) -> Result<CMatrix<T>> {
        self.0.evaluate(&word_of(args)?)
    }

    fn attach_right(&self, a: &DecoratedVar<T>, b: &CMatrix<T>) -> DecoratedVar<T> {
        attach_right(a, b)
    }

    fn attach_left(&self, b: &CMatrix<T>, a: &DecoratedVar<T>) -> DecoratedVar<T> {
        attach_left(b, a)
    }
}

/// The free cumulants `κ_n` of a [`MomentFunctional`], via [`free_cumulant`].
pub struct FreeCumulantFamily<'a, M: ?Sized>(pub &'a M);

impl<T: Real, M: MomentFunctional<T> + ?Sized> BFunctionalFamily<T> for FreeCumulantFamily<'_, M> {
    type Arg = DecoratedVar<T>;

    fn max_arity(&self) -> usize {
        MAX_CUMULANT_ORDER
    }

    fn eval(&self, args: &[DecoratedVar<T>]) -> Result<CMatrix<T>> {
        free_cumulant(self.0, args)
    }

    fn attach_right(&self, a: &DecoratedVar<T>, b: &CMatrix<T>) -> DecoratedVar<T> {
        attach_right(a, b)
    }

    fn attach_left(&self, b: &CMatrix<T>, a: &DecoratedVar<T>) -> DecoratedVar<T> {
        attach_left(b, a)
    }
}

/// `κ_n(a_1, …, a_n)` solved from the moment-cumulant formula.
///
/// Grouping the non-crossing partitions by the block `V = {1 = v_1 < ⋯ < v_s}`
/// containing 1 gives
/// `E[a_1⋯a_n] = Σ_V κ_s(a_{v_1}·E[gap_1], …, a_{v_s})·E[a_{v_s+1}⋯a_n]`,
/// whose `V = [n]` term is `κ_n` itself.
pub fn free_cumulant<T: Real, M: MomentFunctional<T> + ?Sized>(mf: &M, args: &[DecoratedVar<T>]) -> Result<CMatrix<T>> {
    let n = args.len();
    if n == 0 {
        return Err(Error::EmptyInput("arguments"));
    }
    if n > MAX_CUMULANT_ORDER {
        return Err(Error::ArityOverflow {
            arity: n,
            max: MAX_CUMULANT_ORDER,
        });
    }
    let moment = |s: &[DecoratedVar<T>]| mf.evaluate(&word_of(s)?);
    let mut kappa = moment(args)?;
    let full = (1u32 << (n - 1)) - 1;
    for mask in 0..full {
        let positions: Vec<usize> = std::iter::once(0)
            .chain((1..n).filter(|p| mask >> (p - 1) & 1 == 1))
            .collect();
        let mut inner = Vec::with_capacity(positions.len());
        for (t, &p) in positions.iter().enumerate() {
            let mut a = args[p].clone();
            if let Some(&next) = positions.get(t + 1) {
                if next > p + 1 {
                    a.right = &a.right * moment(&args[p + 1..next])?;
                }
            }
            inner.push(a);
        }
        let mut term = free_cumulant(mf, &inner)?;
        let last = positions[positions.len() - 1];
        if last + 1 < n {
            term *= moment(&args[last + 1..])?;
        }
        kappa -= term;
    }
    Ok(kappa)
}

/// `κ_r(x_{v1} c_1, …, x_{vr})` for `r = 1..=n_max`, using prefixes of `vars`
/// and `inner`.
pub fn moments_to_cumulants<T: Real, M: MomentFunctional<T> + ?Sized>(
    mf: &M,
    vars: &[usize],
    inner: &[CMatrix<T>],
    n_max: usize,
) -> Result<Vec<CMatrix<T>>> {
    if n_max > MAX_CUMULANT_ORDER {
        return Err(Error::ArityOverflow {
            arity: n_max,
            max: MAX_CUMULANT_ORDER,
        });
    }
    if vars.len() < n_max || inner.len() + 1 < n_max {
        return Err(Error::SizeMismatch {
            left: vars.len().min(inner.len() + 1),
            right: n_max,
        });
    }
    (1..=n_max)
        .map(|r| {
            let args = decorated_args(&vars[..r], &inner[..r - 1], mf.b_dim())?;
            free_cumulant(mf, &args)
        })
        .collect()
}

/// Cumulants of one identically distributed free family over a diagonal
/// algebra `B = ℂ^m` (`m = 1` is scalar `B`).
///
/// The order-`n` cumulant is the tensor `T_n` with `m^n` entries:
/// `κ_n(x c_1, …, x c_{n−1}, x)` has diagonal entry
/// `Σ T_n[k_0, k_1, …, k_{n−1}] · c_1[k_1] ⋯ c_{n−1}[k_{n−1}]` at `k_0`.
/// Entries are stored with `k_0` varying fastest. Orders above
/// [`n_max`](Self::n_max) vanish, as do all mixed cumulants.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulantSpec<T: Real> {
    b_dim: usize,
    tensors: Vec<Vec<Complex<T>>>,
    weights: Vec<T>,
}

impl<T: Real> CumulantSpec<T> {
    /// `weights` define the state on `B`; `None` means uniform.
    pub fn new(b_dim: usize, tensors: Vec<Vec<Complex<T>>>, weights: Option<Vec<T>>) -> Result<Self> {
        if b_dim == 0 {
            return Err(Error::EmptyInput("b_dim"));
        }
        if tensors.len() > MAX_WORD_LEN {
            return Err(Error::ArityOverflow {
                arity: tensors.len(),
                max: MAX_WORD_LEN,
            });
        }
        for (i, t) in tensors.iter().enumerate() {
            let expected = b_dim.pow(i as u32 + 1);
            if t.len() != expected {
                return Err(Error::SizeMismatch {
                    left: t.len(),
                    right: expected,
                });
            }
            if t.iter()
                .any(|z| !z.re.as_f64().is_finite() || !z.im.as_f64().is_finite())
            {
                return Err(Error::NonFinite);
            }
        }
        let weights = match weights {
            Some(w) => {
                if w.len() != b_dim {
                    return Err(Error::SizeMismatch {
                        left: w.len(),
                        right: b_dim,
                    });
                }
                let total: f64 = w.iter().map(|x| x.as_f64()).sum();
                if w.iter().any(|x| x.as_f64() < 0.0) || (total - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidState("weights must be a probability vector".into()));
                }
                w
            }
            None => vec![T::one() / T::lit(b_dim as f64); b_dim],
        };
        Ok(CumulantSpec {
            b_dim,
            tensors,
            weights,
        })
    }

    /// Scalar `B` with `κ_n = kappas[n − 1]`.
    pub fn scalar(kappas: &[Complex<T>]) -> Result<Self> {
        Self::new(1, kappas.iter().map(|&k| vec![k]).collect(), None)
    }

    pub fn scalar_real(kappas: &[f64]) -> Result<Self> {
        Self::scalar(
            &kappas
                .iter()
                .map(|&k| Complex::new(T::lit(k), T::zero()))
                .collect::<Vec<_>>(),
        )
    }

    /// Standard semicircular element: `κ_2 = 1`, all other cumulants zero.
    pub fn semicircular() -> Self {
        Self::scalar_real(&[0.0, 1.0]).expect("valid spec")
    }

    /// Seeded random spec with real Gaussian entries scaled by `1/2`.
    pub fn random(b_dim: usize, n_max: usize, seed: u64) -> Result<Self> {
        let mut rng = sampling::rng(seed);
        let tensors = (1..=n_max)
            .map(|n| {
                (0..b_dim.pow(n as u32))
                    .map(|_| Complex::new(T::lit(0.5) * sampling::normal::<T, _>(&mut rng), T::zero()))
                    .collect()
            })
            .collect();
        Self::new(b_dim, tensors, None)
    }

    pub fn b_dim(&self) -> usize {
        self.b_dim
    }

    /// Highest non-vanishing order.
    pub fn n_max(&self) -> usize {
        self.tensors.len()
    }

    pub fn tensor(&self, order: usize) -> Option<&[Complex<T>]> {
        order
            .checked_sub(1)
            .and_then(|i| self.tensors.get(i))
            .map(Vec::as_slice)
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Diagonal of `κ_n(x c_1, …, x c_{n−1}, x)` where `inner[j]` is the
    /// diagonal of `c_{j+1}`.
    pub fn kappa_diag(&self, inner: &[Vec<Complex<T>>]) -> Vec<Complex<T>> {
        let m = self.b_dim;
        let zero = Complex::new(T::zero(), T::zero());
        let mut out = vec![zero; m];
        let Some(t) = self.tensor(inner.len() + 1) else {
            return out;
        };
        for (idx, &coef) in t.iter().enumerate() {
            if coef == zero {
                continue;
            }
            let mut rest = idx / m;
            let mut value = coef;
            for c in inner {
                value *= c[rest % m];
                rest /= m;
            }
            out[idx % m] += value;
        }
        out
    }
}

fn diag_of<T: Real>(m: &CMatrix<T>) -> Vec<Complex<T>> {
    (0..m.nrows()).map(|i| m[(i, i)]).collect()
}

/// The cumulant family of a [`CumulantSpec`]; arguments must carry diagonal
/// decorations.
pub struct CumulantFamily<'a, T: Real>(pub &'a CumulantSpec<T>);

impl<T: Real> BFunctionalFamily<T> for CumulantFamily<'_, T> {
    type Arg = DecoratedVar<T>;

    fn max_arity(&self) -> usize {
        MAX_WORD_LEN
    }

    fn eval(&self, args: &[DecoratedVar<T>]) -> Result<CMatrix<T>> {
        let m = self.0.b_dim;
        let Some(first) = args.first() else {
            return Err(Error::EmptyInput("arguments"));
        };
        if args.len() > self.0.n_max() || args.iter().any(|a| a.var != first.var) {
            return Ok(CMatrix::zeros(m, m));
        }
        let inner: Vec<Vec<Complex<T>>> = args.windows(2).map(|w| diag_of(&(&w[0].right * &w[1].left))).collect();
        let k = self.0.kappa_diag(&inner);
        let l = diag_of(&first.left);
        let r = diag_of(&args[args.len() - 1].right);
        Ok(diagonal(&(0..m).map(|i| l[i] * k[i] * r[i]).collect::<Vec<_>>()))
    }

    fn attach_right(&self, a: &DecoratedVar<T>, b: &CMatrix<T>) -> DecoratedVar<T> {
        attach_right(a, b)
    }

    fn attach_left(&self, b: &CMatrix<T>, a: &DecoratedVar<T>) -> DecoratedVar<T> {
        attach_left(b, a)
    }
}

/// A free family of identically distributed variables `x_0, x_1, …` with
/// cumulants from a [`CumulantSpec`].
pub struct CumulantFunctional<T: Real> {
    spec: CumulantSpec<T>,
    variables: Option<usize>,
    nc: Vec<OnceLock<Vec<Partition>>>,
    memo: Mutex<HashMap<Vec<u64>, CMatrix<T>>>,
}

impl<T: Real> CumulantFunctional<T> {
    /// `variables = None` models an infinite sequence.
    pub fn new(spec: CumulantSpec<T>, variables: Option<usize>) -> Result<Self> {
        if variables == Some(0) {
            return Err(Error::EmptyInput("variables"));
        }
        Ok(CumulantFunctional {
            spec,
            variables,
            nc: (0..=MAX_WORD_LEN).map(|_| OnceLock::new()).collect(),
            memo: Mutex::new(HashMap::new()),
        })
    }

    pub fn spec(&self) -> &CumulantSpec<T> {
        &self.spec
    }

    fn noncrossing(&self, n: usize) -> &[Partition] {
        self.nc[n].get_or_init(|| enumerate_noncrossing(n).expect("n within enumeration bound"))
    }

    fn memo_key(word: &DecoratedWord<T>) -> Vec<u64> {
        let mut key: Vec<u64> = match kernel(word.vars()) {
            Ok(k) => k.labels().iter().map(|&l| l as u64).collect(),
            Err(_) => Vec::new(),
        };
        key.push(u64::MAX);
        for d in word.decorations() {
            for i in 0..d.nrows() {
                key.push(d[(i, i)].re.as_f64().to_bits());
                key.push(d[(i, i)].im.as_f64().to_bits());
            }
        }
        key
    }
}

impl<T: Real> Clone for CumulantFunctional<T> {
    fn clone(&self) -> Self {
        CumulantFunctional::new(self.spec.clone(), self.variables).expect("validated on construction")
    }
}

impl<T: Real> std::fmt::Debug for CumulantFunctional<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CumulantFunctional")
            .field("spec", &self.spec)
            .field("variables", &self.variables)
            .finish()
    }
}

impl<T: Real> BAlgebra<T> for CumulantFunctional<T> {
    fn b_dim(&self) -> usize {
        self.spec.b_dim
    }

    fn b_residual(&self, m: &CMatrix<T>) -> f64 {
        let mut off = m.clone();
        off.fill_diagonal(Complex::new(T::zero(), T::zero()));
        frobenius(&off)
    }

    fn b_basis(&self) -> Vec<CMatrix<T>> {
        let m = self.spec.b_dim;
        (0..m)
            .map(|k| {
                let mut e = CMatrix::zeros(m, m);
                e[(k, k)] = Complex::new(T::one(), T::zero());
                e
            })
            .collect()
    }

    fn b_is_commutative(&self) -> bool {
        true
    }
}

impl<T: Real> MomentFunctional<T> for CumulantFunctional<T> {
    fn variable_count(&self) -> Option<usize> {
        self.variables
    }

    fn evaluate(&self, word: &DecoratedWord<T>) -> Result<CMatrix<T>> {
        let n = word.len();
        if n > MAX_WORD_LEN {
            return Err(Error::WordTooLong {
                len: n,
                max: MAX_WORD_LEN,
            });
        }
        if word.b_dim() != self.spec.b_dim {
            return Err(Error::DimensionMismatch {
                expected: self.spec.b_dim,
                found: word.b_dim(),
            });
        }
        for &v in word.vars() {
            self.check_variable(v)?;
        }
        let tol = T::default_tolerance().as_f64();
        for d in word.decorations() {
            let residual = self.b_residual(d);
            if residual > tol {
                return Err(Error::NotInSubalgebra { residual });
            }
        }
        let decs = word.decorations();
        if n == 0 {
            return Ok(decs[0].clone());
        }
        let key = Self::memo_key(word);
        if let Some(hit) = self.memo.lock().expect("memo lock").get(&key) {
            return Ok(hit.clone());
        }

        let m = self.spec.b_dim;
        let mut args: Vec<DecoratedVar<T>> = word
            .vars()
            .iter()
            .zip(&decs[1..])
            .map(|(&v, d)| DecoratedVar {
                left: identity(m),
                var: v,
                right: d.clone(),
            })
            .collect();
        args[0].left = decs[0].clone();
        let ker = kernel(word.vars())?;
        let family = CumulantFamily(&self.spec);
        let mut acc = CMatrix::zeros(m, m);
        for pi in self.noncrossing(n) {
            if pi.blocks().iter().any(|b| b.len() > self.spec.n_max()) || !pi.is_constant_on_blocks(ker.labels()) {
                continue;
            }
            acc += rho_pi(&family, pi, &args)?;
        }
        self.memo.lock().expect("memo lock").insert(key, acc.clone());
        Ok(acc)
    }

    fn phi_b(&self, b: &CMatrix<T>) -> Complex<T> {
        self.spec
            .weights
            .iter()
            .enumerate()
            .fold(Complex::new(T::zero(), T::zero()), |acc, (k, &w)| acc + b[(k, k)] * w)
    }
}

/// `E[b_0 x_{i1} b_1 ⋯ x_{in} b_n]` for the free family with cumulants `spec`.
pub fn cumulants_to_moments<T: Real>(spec: &CumulantSpec<T>, word: &DecoratedWord<T>) -> Result<CMatrix<T>> {
    CumulantFunctional::new(spec.clone(), None)?.evaluate(word)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixedCumulantReport {
    pub tolerance: f64,
    pub n_max: usize,
    pub tuples_checked: usize,
    pub max_residual: f64,
    /// Worst tuple (0-based variables) and its cumulant norm.
    pub worst: Option<(Vec<usize>, f64)>,
    pub passed: bool,
}

/// Tuples per order above which mixed tuples are sampled instead of enumerated.
pub const MIXED_EXHAUSTIVE_LIMIT: usize = 4096;

/// Largest norm of `κ_n(x_{i1} c_1, …, x_{in})` over mixed tuples drawn from
/// `vars`, for `2 ≤ n ≤ n_max`.
///
/// Every tuple is evaluated with identity decorations and with one seeded
/// random set of decorations from `B`.
pub fn check_mixed_cumulants<T: Real, M: MomentFunctional<T> + ?Sized>(
    mf: &M,
    vars: &[usize],
    n_max: usize,
    tol: T,
    seed: u64,
) -> Result<MixedCumulantReport> {
    let mut distinct = vars.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::Precondition(
            "mixed cumulants need at least two distinct variables".into(),
        ));
    }
    for &v in &distinct {
        mf.check_variable(v)?;
    }
    if n_max > MAX_CUMULANT_ORDER {
        return Err(Error::ArityOverflow {
            arity: n_max,
            max: MAX_CUMULANT_ORDER,
        });
    }
    let mut rng = sampling::rng(seed);
    let basis = mf.b_basis();
    let b_dim = mf.b_dim();
    let s = distinct.len();
    let mut checked = 0;
    let mut worst: Option<(Vec<usize>, f64)> = None;
    for n in 2..=n_max {
        let total = s.checked_pow(n as u32).unwrap_or(usize::MAX);
        let tuples: Vec<Vec<usize>> = if total <= MIXED_EXHAUSTIVE_LIMIT {
            (0..total)
                .map(|code| (0..n).map(|t| distinct[code / s.pow(t as u32) % s]).collect())
                .collect()
        } else {
            (0..MIXED_EXHAUSTIVE_LIMIT)
                .map(|_| {
                    sampling::tuple(&mut rng, s, n)
                        .into_iter()
                        .map(|t| distinct[t])
                        .collect()
                })
                .collect()
        };
        for tuple in tuples {
            if tuple.iter().all(|&v| v == tuple[0]) {
                continue;
            }
            let random: Vec<CMatrix<T>> = (1..n).map(|_| sampling::combination(&mut rng, &basis)).collect();
            let plain = vec![identity(b_dim); n - 1];
            for inner in [plain, random] {
                let k = free_cumulant(mf, &decorated_args(&tuple, &inner, b_dim)?)?;
                let r = frobenius(&k);
                if worst.as_ref().is_none_or(|(_, w)| r > *w) {
                    worst = Some((tuple.clone(), r));
                }
            }
            checked += 1;
        }
    }
    let max_residual = worst.as_ref().map_or(0.0, |w| w.1);
    Ok(MixedCumulantReport {
        tolerance: tol.as_f64(),
        n_max,
        tuples_checked: checked,
        max_residual,
        worst,
        passed: max_residual <= tol.as_f64(),
    })
}

/// Moments `m_1, …, m_n` of a single variable over scalar `B` from its free
/// cumulants; cumulants beyond `kappas.len()` are zero.
pub fn scalar_moments<F: Field>(kappas: &[F], n: usize) -> Result<Vec<F>> {
    let kappa = |r: usize| kappas.get(r - 1).cloned().unwrap_or_else(F::zero);
    (1..=n)
        .map(|order| {
            let mut m = F::zero();
            for_each_noncrossing(order, |pi| {
                m = m.clone() + pi.blocks().iter().fold(F::one(), |acc, b| acc * kappa(b.len()));
            })?;
            Ok(m)
        })
        .collect()
}

/// Inverse of [`scalar_moments`]: free cumulants `κ_1, …, κ_n` from moments.
pub fn scalar_cumulants<F: Field>(moments: &[F]) -> Result<Vec<F>> {
    let mut kappas: Vec<F> = Vec::with_capacity(moments.len());
    for (i, m) in moments.iter().enumerate() {
        let order = i + 1;
        let mut lower = F::zero();
        for_each_noncrossing(order, |pi| {
            if pi.block_count() > 1 {
                lower = lower.clone()
                    + pi.blocks()
                        .iter()
                        .fold(F::one(), |acc, b| acc * kappas[b.len() - 1].clone());
            }
        })?;
        kappas.push(m.clone() - lower);
    }
    Ok(kappas)
}

/// Draws `count` seeded decorations from `B` for a functional's algebra.
pub fn random_decorations<T: Real, M: BAlgebra<T> + ?Sized, R: Rng + ?Sized>(
    mf: &M,
    rng: &mut R,
    count: usize,
) -> Vec<CMatrix<T>> {
    let basis = mf.b_basis();
    (0..count).map(|_| sampling::combination(rng, &basis)).collect()
}
