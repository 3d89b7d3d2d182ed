//! Finite-dimensional operator-valued probability spaces.
//!
//! An [`AlgebraContext`] is the matrix algebra `M_d(ℂ)` with a density-matrix
//! [`State`] and a [`SubalgebraWithExpectation`]: a subalgebra `B` given by a
//! spanning set together with a conditional expectation `E: M_d → B` stored as
//! a linear map on column-major vectorized matrices. Conditional expectations
//! are supplied and then verified, never derived.
//!
//! Moments are always expressed as [`DecoratedWord`]s
//! `b0 · x_{i1} · b1 ⋯ x_{in} · bn`; B-valued polynomials are expanded into
//! such words before evaluation.

use nalgebra::ComplexField;
use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sampling;
use crate::scalar::{
    distance, ensure_square, frobenius, hermitian_part, identity, unvectorize, vectorize, CMatrix, Real,
};

/// A state `φ(a) = tr(ρ a)` given by a density matrix `ρ`.
#[derive(Debug, Clone)]
pub struct State<T: Real> {
    density: CMatrix<T>,
}

impl<T: Real> State<T> {
    /// Validates that `density` is Hermitian, positive semidefinite and has trace one.
    pub fn new(density: CMatrix<T>, tol: T) -> Result<Self> {
        let dim = density.nrows();
        ensure_square(&density, dim)?;
        let tol = tol.as_f64();
        let herm = distance(&density, &density.adjoint());
        if herm > tol {
            return Err(Error::InvalidState(format!("not Hermitian (residual {herm:.3e})")));
        }
        let density = hermitian_part(&density);
        let min_eig = min_eigenvalue(&density);
        if min_eig < -tol {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_eig:.3e}")));
        }
        let trace = density.trace();
        let trace_err = (trace - Complex::new(T::one(), T::zero())).modulus().as_f64();
        if trace_err > tol {
            return Err(Error::InvalidState(format!("trace differs from 1 by {trace_err:.3e}")));
        }
        Ok(State { density })
    }

    /// Normalized trace `tr(a) / d`.
    pub fn trace_state(dim: usize) -> Self {
        let w = T::one() / T::from_usize(dim).unwrap();
        State {
            density: identity::<T>(dim).map(|z| z * w),
        }
    }

    pub fn dim(&self) -> usize {
        self.density.nrows()
    }

    pub fn density(&self) -> &CMatrix<T> {
        &self.density
    }

    pub fn phi(&self, a: &CMatrix<T>) -> Complex<T> {
        // tr(ρ a) without forming the product
        let mut acc = Complex::new(T::zero(), T::zero());
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                acc += self.density[(i, j)] * a[(j, i)];
            }
        }
        acc
    }

    /// Positive definite density, the finite-dimensional stand-in for faithfulness.
    pub fn is_faithful(&self, tol: T) -> bool {
        min_eigenvalue(&self.density) > tol.as_f64()
    }
}

pub(crate) fn min_eigenvalue<T: Real>(h: &CMatrix<T>) -> f64 {
    hermitian_part(h)
        .symmetric_eigenvalues()
        .iter()
        .map(|x| x.as_f64())
        .fold(f64::INFINITY, f64::min)
}

/// Membership test and structure of an amalgamation algebra `B`.
pub trait BAlgebra<T: Real> {
    /// Size of the matrices representing elements of `B`.
    fn b_dim(&self) -> usize;

    /// Frobenius distance from `m` to `B`.
    fn b_residual(&self, m: &CMatrix<T>) -> f64;

    /// A spanning set of `B`.
    fn b_basis(&self) -> Vec<CMatrix<T>>;

    fn b_is_commutative(&self) -> bool {
        let basis = self.b_basis();
        let tol = T::default_tolerance().as_f64();
        basis.iter().enumerate().all(|(i, a)| {
            basis[i + 1..]
                .iter()
                .all(|b| frobenius(&crate::scalar::commutator(a, b)) <= tol)
        })
    }
}

/// A subalgebra `B ⊂ M_d` with a linear map `E` onto it.
#[derive(Debug, Clone)]
pub struct SubalgebraWithExpectation<T: Real> {
    dim: usize,
    basis: Vec<CMatrix<T>>,
    // orthonormal basis of span(basis) as vectorized columns
    span: Vec<nalgebra::DVector<Complex<T>>>,
    e_map: CMatrix<T>,
}

impl<T: Real> SubalgebraWithExpectation<T> {
    /// Wraps an explicit `d² × d²` map acting on column-major vectorized matrices.
    ///
    /// Only shapes and `1 ∈ span(basis)` are checked here; the expectation
    /// axioms are checked by [`verify_context`].
    pub fn from_map(dim: usize, basis: Vec<CMatrix<T>>, e_map: CMatrix<T>) -> Result<Self> {
        if basis.is_empty() {
            return Err(Error::EmptyInput("subalgebra basis"));
        }
        for b in &basis {
            ensure_square(b, dim)?;
        }
        if e_map.nrows() != dim * dim || e_map.ncols() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: e_map.nrows(),
            });
        }
        let span = orthonormalize(&basis);
        let sub = SubalgebraWithExpectation {
            dim,
            basis,
            span,
            e_map,
        };
        let unit_residual = sub.b_residual(&identity(dim));
        if unit_residual > T::default_tolerance().as_f64() {
            return Err(Error::NotInSubalgebra {
                residual: unit_residual,
            });
        }
        Ok(sub)
    }

    /// Builds the map matrix column by column from its action on matrix units.
    pub fn from_fn(
        dim: usize,
        basis: Vec<CMatrix<T>>,
        expectation: impl Fn(&CMatrix<T>) -> CMatrix<T>,
    ) -> Result<Self> {
        let mut e_map = CMatrix::zeros(dim * dim, dim * dim);
        for j in 0..dim {
            for i in 0..dim {
                let mut unit = CMatrix::zeros(dim, dim);
                unit[(i, j)] = Complex::new(T::one(), T::zero());
                let image = vectorize(&expectation(&unit));
                e_map.set_column(i + j * dim, &image);
            }
        }
        Self::from_map(dim, basis, e_map)
    }

    /// `B = ℂ·1` with `E = φ(·)·1`.
    pub fn scalar(state: &State<T>) -> Self {
        let dim = state.dim();
        Self::from_fn(dim, vec![identity(dim)], |a| identity::<T>(dim) * state.phi(a))
            .expect("scalar expectation is well-formed")
    }

    /// Trace-preserving pinching onto the span of orthogonal projections
    /// `P_1, …, P_m` summing to the identity: `E[a] = Σ tr(P_k a)/tr(P_k) · P_k`.
    pub fn pinching(projections: Vec<CMatrix<T>>) -> Result<Self> {
        let Some(first) = projections.first() else {
            return Err(Error::EmptyInput("projections"));
        };
        let dim = first.nrows();
        let tol = T::default_tolerance().as_f64();
        let mut sum = CMatrix::zeros(dim, dim);
        let mut traces = Vec::with_capacity(projections.len());
        for (k, p) in projections.iter().enumerate() {
            ensure_square(p, dim)?;
            let residual = distance(p, &p.adjoint()).max(distance(&(p * p), p));
            if residual > tol {
                return Err(Error::NotProjection { residual });
            }
            for q in &projections[k + 1..] {
                let overlap = frobenius(&(p * q));
                if overlap > tol {
                    return Err(Error::Precondition(format!(
                        "pinching projections are not orthogonal ({overlap:.3e})"
                    )));
                }
            }
            let t = p.trace();
            if t.modulus().as_f64() < 0.5 {
                return Err(Error::Precondition("pinching projection of rank zero".into()));
            }
            traces.push(t);
            sum += p;
        }
        let partition_residual = distance(&sum, &identity(dim));
        if partition_residual > tol {
            return Err(Error::Precondition(format!(
                "pinching projections do not sum to 1 ({partition_residual:.3e})"
            )));
        }
        let ps = projections.clone();
        Self::from_fn(dim, projections, move |a| {
            ps.iter()
                .zip(&traces)
                .fold(CMatrix::zeros(dim, dim), |acc, (p, t)| acc + p * ((p * a).trace() / *t))
        })
    }

    /// Pinching onto the diagonal matrices of `M_d`.
    pub fn diagonal(dim: usize) -> Self {
        let units = (0..dim)
            .map(|k| {
                let mut e = CMatrix::zeros(dim, dim);
                e[(k, k)] = Complex::new(T::one(), T::zero());
                e
            })
            .collect();
        Self::pinching(units).expect("diagonal matrix units form a partition of unity")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis(&self) -> &[CMatrix<T>] {
        &self.basis
    }

    pub fn e_map(&self) -> &CMatrix<T> {
        &self.e_map
    }

    /// `E[a]`.
    pub fn apply(&self, a: &CMatrix<T>) -> CMatrix<T> {
        unvectorize(&(&self.e_map * vectorize(a)), self.dim)
    }
}

fn orthonormalize<T: Real>(basis: &[CMatrix<T>]) -> Vec<nalgebra::DVector<Complex<T>>> {
    let mut out: Vec<nalgebra::DVector<Complex<T>>> = Vec::new();
    for b in basis {
        let mut v = vectorize(b);
        let scale = v.norm().as_f64();
        for q in &out {
            let c = q.dotc(&v);
            v -= q * c;
        }
        let norm = v.norm();
        if norm.as_f64() > 1e-10 * scale.max(1.0) {
            out.push(v.unscale(norm));
        }
    }
    out
}

impl<T: Real> BAlgebra<T> for SubalgebraWithExpectation<T> {
    fn b_dim(&self) -> usize {
        self.dim
    }

    fn b_residual(&self, m: &CMatrix<T>) -> f64 {
        if m.nrows() != self.dim || m.ncols() != self.dim {
            return f64::INFINITY;
        }
        let v = vectorize(m);
        let mut r = v.clone();
        for q in &self.span {
            let c = q.dotc(&v);
            r -= q * c;
        }
        r.norm().as_f64()
    }

    fn b_basis(&self) -> Vec<CMatrix<T>> {
        self.basis.clone()
    }
}

/// `(M_d, φ)` together with `E: M_d → B`.
#[derive(Debug, Clone)]
pub struct AlgebraContext<T: Real> {
    state: State<T>,
    subalgebra: SubalgebraWithExpectation<T>,
}

impl<T: Real> AlgebraContext<T> {
    pub fn new(state: State<T>, subalgebra: SubalgebraWithExpectation<T>) -> Result<Self> {
        if state.dim() != subalgebra.dim() {
            return Err(Error::DimensionMismatch {
                expected: state.dim(),
                found: subalgebra.dim(),
            });
        }
        Ok(AlgebraContext { state, subalgebra })
    }

    /// Like [`AlgebraContext::new`] but rejects contexts failing [`verify_context`].
    pub fn verified(state: State<T>, subalgebra: SubalgebraWithExpectation<T>, samples: usize, tol: T) -> Result<Self> {
        let ctx = Self::new(state, subalgebra)?;
        let report = verify_context(&ctx, samples, tol);
        if let Some(bad) = report.axioms.iter().find(|a| !a.passed) {
            return Err(Error::Precondition(format!(
                "context axiom `{}` fails (residual {:.3e})",
                bad.name, bad.residual
            )));
        }
        Ok(ctx)
    }

    /// Scalar amalgamation `B = ℂ·1` over `state`.
    pub fn scalar(state: State<T>) -> Self {
        let sub = SubalgebraWithExpectation::scalar(&state);
        AlgebraContext { state, subalgebra: sub }
    }

    pub fn dim(&self) -> usize {
        self.state.dim()
    }

    pub fn state(&self) -> &State<T> {
        &self.state
    }

    pub fn subalgebra(&self) -> &SubalgebraWithExpectation<T> {
        &self.subalgebra
    }

    pub fn expect(&self, a: &CMatrix<T>) -> CMatrix<T> {
        self.subalgebra.apply(a)
    }

    pub fn phi(&self, a: &CMatrix<T>) -> Complex<T> {
        self.state.phi(a)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomCheck {
    pub name: &'static str,
    pub residual: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContextReport {
    pub tolerance: f64,
    pub samples: usize,
    pub axioms: Vec<AxiomCheck>,
    pub passed: bool,
}

impl ContextReport {
    pub fn residual(&self, name: &str) -> Option<f64> {
        self.axioms.iter().find(|a| a.name == name).map(|a| a.residual)
    }

    pub fn max_residual(&self) -> f64 {
        self.axioms.iter().map(|a| a.residual).fold(0.0, f64::max)
    }
}

const CONTEXT_SEED: u64 = 0x5eed;

/// Checks the conditional-expectation axioms of `ctx` numerically.
///
/// Sampled checks (bimodule property, positivity, range) use `samples`
/// random elements drawn from a fixed seed.
pub fn verify_context<T: Real>(ctx: &AlgebraContext<T>, samples: usize, tol: T) -> ContextReport {
    let dim = ctx.dim();
    let sub = ctx.subalgebra();
    let one = identity::<T>(dim);
    let mut rng = sampling::rng(CONTEXT_SEED);

    let density = ctx.state().density();
    let normalization = (ctx.phi(&one) - Complex::new(T::one(), T::zero()))
        .modulus()
        .as_f64()
        .max(distance(density, &density.adjoint()))
        .max(-min_eigenvalue(density));

    let unital = distance(&sub.apply(&one), &one);

    let idempotent = sub
        .basis()
        .iter()
        .map(|b| distance(&sub.apply(b), b))
        .fold(0.0, f64::max);

    let mut range = 0.0f64;
    let mut compatibility = 0.0f64;
    for j in 0..dim {
        for i in 0..dim {
            let mut unit = CMatrix::zeros(dim, dim);
            unit[(i, j)] = Complex::new(T::one(), T::zero());
            let e = sub.apply(&unit);
            range = range.max(sub.b_residual(&e));
            compatibility = compatibility.max((ctx.phi(&e) - ctx.phi(&unit)).modulus().as_f64());
        }
    }

    let mut bimodule = 0.0f64;
    let mut positivity = 0.0f64;
    for _ in 0..samples {
        let a = sampling::gaussian_matrix::<T, _>(&mut rng, dim);
        let b1 = sampling::combination(&mut rng, sub.basis());
        let b2 = sampling::combination(&mut rng, sub.basis());
        let lhs = sub.apply(&(&b1 * &a * &b2));
        let rhs = &b1 * sub.apply(&a) * &b2;
        let scale = 1.0 + frobenius(&lhs).max(frobenius(&rhs));
        bimodule = bimodule.max(distance(&lhs, &rhs) / scale);

        let positive = a.adjoint() * &a;
        let image = sub.apply(&positive);
        let scale = 1.0 + frobenius(&positive);
        let herm = distance(&image, &image.adjoint());
        positivity = positivity.max(herm.max(-min_eigenvalue(&image)) / scale);
    }

    let tol = tol.as_f64();
    let axioms = [
        ("state_normalization", normalization),
        ("unital", unital),
        ("idempotent_on_b", idempotent),
        ("range_in_b", range),
        ("bimodule", bimodule),
        ("state_compatibility", compatibility),
        ("positivity", positivity),
    ]
    .into_iter()
    .map(|(name, residual)| AxiomCheck {
        name,
        residual,
        passed: residual <= tol,
    })
    .collect::<Vec<_>>();
    let passed = axioms.iter().all(|a| a.passed);
    ContextReport {
        tolerance: tol,
        samples,
        axioms,
        passed,
    }
}

/// `b0 · x_{vars[0]} · b1 ⋯ x_{vars[n-1]} · bn`. Variables are 0-based.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoratedWord<T: Real> {
    vars: Vec<usize>,
    decorations: Vec<CMatrix<T>>,
}

impl<T: Real> DecoratedWord<T> {
    pub fn new(vars: Vec<usize>, decorations: Vec<CMatrix<T>>) -> Result<Self> {
        if decorations.len() != vars.len() + 1 {
            return Err(Error::SizeMismatch {
                left: decorations.len(),
                right: vars.len() + 1,
            });
        }
        let dim = decorations[0].nrows();
        for d in &decorations {
            ensure_square(d, dim)?;
        }
        Ok(DecoratedWord { vars, decorations })
    }

    /// Word with identity decorations.
    pub fn plain(vars: Vec<usize>, b_dim: usize) -> Self {
        let decorations = vec![identity(b_dim); vars.len() + 1];
        DecoratedWord { vars, decorations }
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn vars(&self) -> &[usize] {
        &self.vars
    }

    pub fn decorations(&self) -> &[CMatrix<T>] {
        &self.decorations
    }

    pub fn b_dim(&self) -> usize {
        self.decorations[0].nrows()
    }
}

/// One word `b0 X b1 X ⋯ X bn` of a B-valued polynomial, stored as its
/// coefficients `[b0, …, bn]`.
pub type BWord<T> = Vec<CMatrix<T>>;

/// B-valued polynomial in one formal variable `X`.
#[derive(Debug, Clone, PartialEq)]
pub struct BPolynomial<T: Real> {
    terms: Vec<BWord<T>>,
}

impl<T: Real> BPolynomial<T> {
    /// Checks that every coefficient lies in `B` within `tol`.
    pub fn new(terms: Vec<BWord<T>>, b: &(impl BAlgebra<T> + ?Sized), tol: T) -> Result<Self> {
        let dim = b.b_dim();
        for word in &terms {
            if word.is_empty() {
                return Err(Error::EmptyInput("polynomial word"));
            }
            for c in word {
                ensure_square(c, dim)?;
                let residual = b.b_residual(c);
                if residual > tol.as_f64() {
                    return Err(Error::NotInSubalgebra { residual });
                }
            }
        }
        Ok(BPolynomial { terms })
    }

    /// `X^degree` with identity coefficients.
    pub fn monomial(degree: usize, b_dim: usize) -> Self {
        BPolynomial {
            terms: vec![vec![identity(b_dim); degree + 1]],
        }
    }

    pub fn constant(b: CMatrix<T>) -> Self {
        BPolynomial { terms: vec![vec![b]] }
    }

    pub fn terms(&self) -> &[BWord<T>] {
        &self.terms
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().map(|w| w.len() - 1).max().unwrap_or(0)
    }

    pub fn b_dim(&self) -> Option<usize> {
        self.terms.first().map(|w| w[0].nrows())
    }

    /// Appends the constant word `[b]`.
    pub fn plus_constant(mut self, b: CMatrix<T>) -> Self {
        self.terms.push(vec![b]);
        self
    }
}

/// Substitutes `a` for `X` and sums the resulting products.
pub fn eval_polynomial<T: Real>(p: &BPolynomial<T>, a: &CMatrix<T>) -> Result<CMatrix<T>> {
    let dim = a.nrows();
    ensure_square(a, dim)?;
    let mut acc = CMatrix::zeros(dim, dim);
    for word in p.terms() {
        let mut prod = word[0].clone();
        ensure_square(&prod, dim)?;
        for c in &word[1..] {
            ensure_square(c, dim)?;
            prod = prod * a * c;
        }
        acc += prod;
    }
    Ok(acc)
}

/// Expands `p_1(x_{vars[0]}) ⋯ p_n(x_{vars[n-1]})` into decorated words,
/// merging adjacent coefficients.
pub fn expand_product<T: Real>(
    polys: &[BPolynomial<T>],
    vars: &[usize],
    b_dim: usize,
) -> Result<Vec<DecoratedWord<T>>> {
    if polys.len() != vars.len() {
        return Err(Error::SizeMismatch {
            left: polys.len(),
            right: vars.len(),
        });
    }
    let mut partial: Vec<DecoratedWord<T>> = vec![DecoratedWord::plain(vec![], b_dim)];
    for (p, &v) in polys.iter().zip(vars) {
        let mut next = Vec::with_capacity(partial.len() * p.terms().len());
        for w in &partial {
            for term in p.terms() {
                for c in term {
                    ensure_square(c, b_dim)?;
                }
                let mut vars = w.vars.clone();
                let mut decs = w.decorations.clone();
                let last = decs.pop().expect("decorations are never empty");
                decs.push(last * &term[0]);
                for c in &term[1..] {
                    vars.push(v);
                    decs.push(c.clone());
                }
                next.push(DecoratedWord {
                    vars,
                    decorations: decs,
                });
            }
        }
        partial = next;
    }
    Ok(partial)
}

/// The joint B-valued distribution of a sequence `(x_i)`.
pub trait MomentFunctional<T: Real>: BAlgebra<T> + Sync {
    /// Number of variables, `None` for an unbounded sequence.
    fn variable_count(&self) -> Option<usize>;

    /// `E[b0 x_{i1} b1 ⋯ x_{in} bn]`.
    fn evaluate(&self, word: &DecoratedWord<T>) -> Result<CMatrix<T>>;

    /// The state restricted to `B`.
    fn phi_b(&self, b: &CMatrix<T>) -> Complex<T>;

    /// `φ(x_{i1} ⋯ x_{in})`.
    fn scalar_moment(&self, vars: &[usize]) -> Result<Complex<T>> {
        let e = self.evaluate(&DecoratedWord::plain(vars.to_vec(), self.b_dim()))?;
        Ok(self.phi_b(&e))
    }

    /// `E[p_1(x_{i1}) ⋯ p_n(x_{in})]`.
    fn evaluate_product(&self, polys: &[BPolynomial<T>], vars: &[usize]) -> Result<CMatrix<T>> {
        let dim = self.b_dim();
        expand_product(polys, vars, dim)?
            .iter()
            .try_fold(CMatrix::zeros(dim, dim), |acc, w| Ok(acc + self.evaluate(w)?))
    }

    fn check_variable(&self, var: usize) -> Result<()> {
        match self.variable_count() {
            Some(bound) if var >= bound => Err(Error::IndexOutOfRange { index: var, bound }),
            _ => Ok(()),
        }
    }
}

/// Moments of concrete matrices `x_i` inside an [`AlgebraContext`].
#[derive(Debug, Clone)]
pub struct ConcreteFunctional<T: Real> {
    ctx: AlgebraContext<T>,
    elements: Vec<CMatrix<T>>,
}

impl<T: Real> ConcreteFunctional<T> {
    pub fn new(ctx: AlgebraContext<T>, elements: Vec<CMatrix<T>>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::EmptyInput("elements"));
        }
        for x in &elements {
            ensure_square(x, ctx.dim())?;
        }
        Ok(ConcreteFunctional { ctx, elements })
    }

    pub fn context(&self) -> &AlgebraContext<T> {
        &self.ctx
    }

    pub fn elements(&self) -> &[CMatrix<T>] {
        &self.elements
    }
}

impl<T: Real> BAlgebra<T> for ConcreteFunctional<T> {
    fn b_dim(&self) -> usize {
        self.ctx.dim()
    }

    fn b_residual(&self, m: &CMatrix<T>) -> f64 {
        self.ctx.subalgebra().b_residual(m)
    }

    fn b_basis(&self) -> Vec<CMatrix<T>> {
        self.ctx.subalgebra().basis().to_vec()
    }
}

impl<T: Real> MomentFunctional<T> for ConcreteFunctional<T> {
    fn variable_count(&self) -> Option<usize> {
        Some(self.elements.len())
    }

    fn evaluate(&self, word: &DecoratedWord<T>) -> Result<CMatrix<T>> {
        if word.b_dim() != self.ctx.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.ctx.dim(),
                found: word.b_dim(),
            });
        }
        let mut prod = word.decorations[0].clone();
        for (&v, b) in word.vars.iter().zip(&word.decorations[1..]) {
            self.check_variable(v)?;
            prod = prod * &self.elements[v] * b;
        }
        Ok(self.ctx.expect(&prod))
    }

    fn phi_b(&self, b: &CMatrix<T>) -> Complex<T> {
        self.ctx.phi(b)
    }
}

/// `p − E[p(x_i)]`, the centering of `p` at variable `var`.
pub fn center<T: Real, M: MomentFunctional<T> + ?Sized>(
    p: &BPolynomial<T>,
    var: usize,
    mf: &M,
) -> Result<BPolynomial<T>> {
    mf.check_variable(var)?;
    let mean = mf.evaluate_product(std::slice::from_ref(p), &[var])?;
    Ok(p.clone().plus_constant(-mean))
}
