//! JSON scenarios: a functional, a list of magic unitaries and the checks to
//! run on them.
//!
//! Matrices are nested arrays of `[re, im]` pairs. Variable indices, index
//! tuples and permutations are 1-based in scenario files and reports.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::algebra::{AlgebraContext, ConcreteFunctional, MomentFunctional, State, SubalgebraWithExpectation};
use crate::cumulants::{random_decorations, CumulantFunctional, CumulantSpec};
use crate::error::{Error, Result};
use crate::exchangeability::{
    check_classical_exchangeability, check_e_invariance, check_freeness, check_quantum_invariance, crossing_iff_sweep,
    factorization_sweep, finite_counterexample, CrossingVariant, InvarianceReport,
};
use crate::magic::{
    block_chain, block_pair, collapse_lemma_sweep, from_permutation, generic_block_chain, generic_projection_pair,
    random_projection, verify_relations, MagicUnitary,
};
use crate::sampling;
use crate::scalar::{cplx, diagonal, from_pairs, CMatrix};

pub type MatrixSpec = Vec<Vec<[f64; 2]>>;

/// Tolerance used when neither flag, environment nor scenario sets one.
pub const DEFAULT_TOLERANCE: f64 = 1e-8;

/// Environment variable overriding the scenario tolerance.
pub const TOLERANCE_ENV: &str = "QEXCH_TOL";

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub functional: Option<FunctionalSpec>,
    #[serde(default)]
    pub unitaries: Vec<UnitarySpec>,
    pub checks: Vec<CheckSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BChoice {
    #[default]
    Scalar,
    Diagonal,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionalSpec {
    /// Free identically distributed family. Either `scalar` (one real
    /// cumulant per order) or `tensors` (order-`n` tensor with `b_dim^n`
    /// complex entries) is required.
    Cumulant {
        #[serde(default = "one")]
        b_dim: usize,
        #[serde(default)]
        scalar: Option<Vec<f64>>,
        #[serde(default)]
        tensors: Option<Vec<Vec<[f64; 2]>>>,
        #[serde(default)]
        weights: Option<Vec<f64>>,
        #[serde(default)]
        variables: Option<usize>,
    },
    /// Matrices inside `M_dim` with a density matrix (default: normalized
    /// trace) and `B` either scalars or the diagonal.
    Concrete {
        dim: usize,
        #[serde(default)]
        density: Option<MatrixSpec>,
        #[serde(default)]
        b: BChoice,
        #[serde(default)]
        elements: Option<Vec<MatrixSpec>>,
        #[serde(default)]
        diagonal_elements: Option<Vec<Vec<[f64; 2]>>>,
    },
    /// Independent commuting ±1 variables on `(ℂ²)^{⊗variables}` under the trace.
    Bernoulli { variables: usize },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum UnitarySpec {
    /// `u_ij = δ_{σ(i) j} · 1_d` with `sigma` 1-based.
    Permutation {
        sigma: Vec<usize>,
        #[serde(default)]
        k: Option<usize>,
        #[serde(default = "one")]
        d: usize,
    },
    /// Explicit `q1`, `q2` override `seeds`, which override `seed`. With only
    /// `seed` (or nothing) a non-commuting pair is drawn.
    BlockPair {
        d: usize,
        #[serde(default)]
        rank: Option<usize>,
        #[serde(default)]
        seed: Option<u64>,
        #[serde(default)]
        seeds: Option<[u64; 2]>,
        #[serde(default)]
        q1: Option<MatrixSpec>,
        #[serde(default)]
        q2: Option<MatrixSpec>,
    },
    /// Explicit `projections` override `seeds`, which override `seed`.
    BlockChain {
        r: usize,
        d: usize,
        #[serde(default)]
        rank: Option<usize>,
        #[serde(default)]
        seed: Option<u64>,
        #[serde(default)]
        seeds: Option<Vec<u64>>,
        #[serde(default)]
        projections: Option<Vec<MatrixSpec>>,
    },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum CheckSpec {
    Relations,
    QuantumInvariance {
        #[serde(default)]
        n_max: Option<usize>,
    },
    ClassicalInvariance {
        #[serde(default)]
        n_max: Option<usize>,
        #[serde(default)]
        k: Option<usize>,
    },
    EInvariance {
        #[serde(default)]
        n_max: Option<usize>,
    },
    Factorization {
        #[serde(default)]
        n_max: Option<usize>,
        #[serde(default)]
        k: Option<usize>,
        #[serde(default)]
        trials: Option<usize>,
    },
    Freeness {
        #[serde(default)]
        n_max: Option<usize>,
        #[serde(default)]
        variables: Option<Vec<usize>>,
    },
    CollapseLemma {
        #[serde(default)]
        n_max: Option<usize>,
    },
    CrossingSum {
        #[serde(default)]
        d: Option<usize>,
        #[serde(default)]
        samples: Option<usize>,
        #[serde(default)]
        s: Option<usize>,
        #[serde(default)]
        variant: Option<CrossingVariant>,
    },
    Counterexample {
        #[serde(default)]
        n: Option<usize>,
    },
}

impl CheckSpec {
    pub fn name(&self) -> &'static str {
        match self {
            CheckSpec::Relations => "relations",
            CheckSpec::QuantumInvariance { .. } => "quantum_invariance",
            CheckSpec::ClassicalInvariance { .. } => "classical_invariance",
            CheckSpec::EInvariance { .. } => "e_invariance",
            CheckSpec::Factorization { .. } => "factorization",
            CheckSpec::Freeness { .. } => "freeness",
            CheckSpec::CollapseLemma { .. } => "collapse_lemma",
            CheckSpec::CrossingSum { .. } => "crossing_sum",
            CheckSpec::Counterexample { .. } => "counterexample",
        }
    }
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    serde_json::from_str(text).map_err(|e| Error::Scenario(e.to_string()))
}

fn scenario_err(field: impl std::fmt::Display, err: impl std::fmt::Display) -> Error {
    Error::Scenario(format!("{field}: {err}"))
}

fn matrix(field: &str, m: &MatrixSpec) -> Result<CMatrix<f64>> {
    from_pairs(m).map_err(|e| scenario_err(field, e))
}

/// The functional a scenario describes.
pub enum Functional {
    Cumulant(CumulantFunctional<f64>),
    Concrete(ConcreteFunctional<f64>),
}

impl Functional {
    pub fn as_dyn(&self) -> &dyn MomentFunctional<f64> {
        match self {
            Functional::Cumulant(f) => f,
            Functional::Concrete(f) => f,
        }
    }
}

/// Bernoulli model: `vars` independent ±1 diagonal variables under the trace.
pub fn bernoulli_functional(vars: usize) -> Result<ConcreteFunctional<f64>> {
    if vars == 0 || vars > 10 {
        return Err(Error::SizeOutOfRange {
            n: vars,
            min: 1,
            max: 10,
        });
    }
    let dim = 1usize << vars;
    let elements = (0..vars)
        .map(|v| {
            let signs: Vec<_> = (0..dim)
                .map(|s| cplx(if s >> v & 1 == 0 { 1.0 } else { -1.0 }, 0.0))
                .collect();
            diagonal(&signs)
        })
        .collect();
    ConcreteFunctional::new(AlgebraContext::scalar(State::trace_state(dim)), elements)
}

pub fn build_functional(spec: &FunctionalSpec) -> Result<Functional> {
    match spec {
        FunctionalSpec::Cumulant {
            b_dim,
            scalar,
            tensors,
            weights,
            variables,
        } => {
            let spec = match (scalar, tensors) {
                (Some(k), None) => {
                    if *b_dim != 1 {
                        return Err(scenario_err("functional.scalar", "requires b_dim = 1"));
                    }
                    CumulantSpec::scalar_real(k)
                }
                (None, Some(t)) => {
                    let t = t
                        .iter()
                        .map(|order| order.iter().map(|z| cplx(z[0], z[1])).collect())
                        .collect();
                    CumulantSpec::new(*b_dim, t, weights.clone())
                }
                _ => {
                    return Err(scenario_err(
                        "functional",
                        "exactly one of `scalar` and `tensors` is required",
                    ))
                }
            }
            .map_err(|e| scenario_err("functional", e))?;
            let f = CumulantFunctional::new(spec, *variables).map_err(|e| scenario_err("functional.variables", e))?;
            Ok(Functional::Cumulant(f))
        }
        FunctionalSpec::Concrete {
            dim,
            density,
            b,
            elements,
            diagonal_elements,
        } => {
            let state = match density {
                Some(m) => State::new(matrix("functional.density", m)?, 1e-9)
                    .map_err(|e| scenario_err("functional.density", e))?,
                None => State::trace_state(*dim),
            };
            let sub = match b {
                BChoice::Scalar => SubalgebraWithExpectation::scalar(&state),
                BChoice::Diagonal => SubalgebraWithExpectation::diagonal(*dim),
            };
            let xs: Vec<CMatrix<f64>> = match (elements, diagonal_elements) {
                (Some(es), None) => es
                    .iter()
                    .enumerate()
                    .map(|(i, m)| matrix(&format!("functional.elements[{i}]"), m))
                    .collect::<Result<_>>()?,
                (None, Some(ds)) => ds
                    .iter()
                    .map(|d| diagonal(&d.iter().map(|z| cplx(z[0], z[1])).collect::<Vec<_>>()))
                    .collect(),
                _ => {
                    return Err(scenario_err(
                        "functional",
                        "exactly one of `elements` and `diagonal_elements` is required",
                    ))
                }
            };
            let ctx = AlgebraContext::verified(state, sub, 8, 1e-9).map_err(|e| scenario_err("functional.b", e))?;
            let f = ConcreteFunctional::new(ctx, xs).map_err(|e| scenario_err("functional.elements", e))?;
            Ok(Functional::Concrete(f))
        }
        FunctionalSpec::Bernoulli { variables } => Ok(Functional::Concrete(
            bernoulli_functional(*variables).map_err(|e| scenario_err("functional.variables", e))?,
        )),
    }
}

fn default_rank(d: usize) -> usize {
    d.div_ceil(2).min(d.saturating_sub(1)).max(1)
}

/// Builds unitary `index` of a scenario; `seed` is the scenario seed.
pub fn build_unitary(spec: &UnitarySpec, index: usize, seed: u64) -> Result<MagicUnitary<f64>> {
    let field = |name: &str| format!("unitaries[{index}].{name}");
    let fallback = seed.wrapping_add(index as u64);
    match spec {
        UnitarySpec::Permutation { sigma, k, d } => {
            if let Some(k) = k {
                if *k != sigma.len() {
                    return Err(scenario_err(
                        field("k"),
                        format!("{k} does not match sigma of length {}", sigma.len()),
                    ));
                }
            }
            let zero_based = sigma
                .iter()
                .map(|&s| {
                    s.checked_sub(1)
                        .ok_or_else(|| scenario_err(field("sigma"), "entries are 1-based"))
                })
                .collect::<Result<Vec<_>>>()?;
            from_permutation(&zero_based, *d).map_err(|e| scenario_err(field("sigma"), e))
        }
        UnitarySpec::BlockPair {
            d,
            rank,
            seed,
            seeds,
            q1,
            q2,
        } => {
            let rank = rank.unwrap_or_else(|| default_rank(*d));
            let (p, q) = match (q1, q2, seeds) {
                (Some(a), Some(b), _) => (matrix(&field("q1"), a)?, matrix(&field("q2"), b)?),
                (Some(_), None, _) | (None, Some(_), _) => {
                    return Err(scenario_err(field("q1"), "q1 and q2 must be given together"))
                }
                (None, None, Some([s1, s2])) => (
                    random_projection(*d, rank, *s1).map_err(|e| scenario_err(field("rank"), e))?,
                    random_projection(*d, rank, *s2).map_err(|e| scenario_err(field("rank"), e))?,
                ),
                (None, None, None) => {
                    let (p, q, _) = generic_projection_pair(*d, rank, seed.unwrap_or(fallback))
                        .map_err(|e| scenario_err(field("d"), e))?;
                    (p, q)
                }
            };
            block_pair(&p, &q).map_err(|e| scenario_err(field("q1"), e))
        }
        UnitarySpec::BlockChain {
            r,
            d,
            rank,
            seed,
            seeds,
            projections,
        } => {
            if let Some(ps) = projections {
                if ps.len() != *r {
                    return Err(scenario_err(
                        field("projections"),
                        format!("expected {r} matrices, found {}", ps.len()),
                    ));
                }
                let qs = ps
                    .iter()
                    .enumerate()
                    .map(|(t, m)| matrix(&format!("{}[{t}]", field("projections")), m))
                    .collect::<Result<Vec<_>>>()?;
                return block_chain(&qs).map_err(|e| scenario_err(field("projections"), e));
            }
            if let Some(ss) = seeds {
                if ss.len() != *r {
                    return Err(scenario_err(
                        field("seeds"),
                        format!("expected {r} seeds, found {}", ss.len()),
                    ));
                }
                let rank = rank.unwrap_or_else(|| default_rank(*d));
                let qs = ss
                    .iter()
                    .map(|&s| random_projection(*d, rank, s))
                    .collect::<Result<Vec<_>>>()
                    .map_err(|e| scenario_err(field("rank"), e))?;
                return block_chain(&qs).map_err(|e| scenario_err(field("seeds"), e));
            }
            if rank.is_some() {
                return Err(scenario_err(field("rank"), "only used together with seeds"));
            }
            generic_block_chain(*r, *d, seed.unwrap_or(fallback)).map_err(|e| scenario_err(field("r"), e))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub params: Value,
    pub residual: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub scenario: String,
    pub seed: u64,
    pub tolerance: f64,
    pub checks: Vec<CheckRecord>,
    pub pass: bool,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// One line per check plus a verdict line.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "scenario {} (seed {}, tolerance {:e})\n",
            self.scenario, self.seed, self.tolerance
        );
        for c in &self.checks {
            out += &format!(
                "  [{}] {:<22} residual {:.3e}",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.residual
            );
            if let Some(note) = c.detail.as_ref().and_then(|d| d.get("summary")).and_then(Value::as_str) {
                out += &format!("  {note}");
            }
            out.push('\n');
        }
        out += if self.pass { "result: PASS\n" } else { "result: FAIL\n" };
        out
    }
}

fn one_based(t: &[usize]) -> Vec<usize> {
    t.iter().map(|x| x + 1).collect()
}

fn fmt_tuple(t: &[usize]) -> String {
    let parts: Vec<String> = t.iter().map(|x| (x + 1).to_string()).collect();
    format!("({})", parts.join(","))
}

fn invariance_detail(rep: &InvarianceReport) -> Value {
    let worst = rep.worst().map(|w| {
        let mut v = json!({
            "n": w.n,
            "tuple": one_based(&w.tuple),
            "unitary": w.unitary + 1,
            "residual": w.residual,
        });
        if let Some(p) = &w.permutation {
            v["permutation"] = json!(one_based(p));
        }
        v
    });
    let summary = match rep.worst() {
        Some(w) if !rep.passed => format!(
            "violated at i = {} (n = {}, unitary {})",
            fmt_tuple(&w.tuple),
            w.n,
            w.unitary + 1
        ),
        _ => format!("{} tuples", rep.tuples_checked),
    };
    json!({
        "exhaustive": rep.exhaustive,
        "tuples_checked": rep.tuples_checked,
        "worst": worst,
        "summary": summary,
    })
}

/// Resolved tolerance and seed for a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub tolerance: f64,
    pub seed: u64,
}

impl Settings {
    /// Flag beats environment beats scenario beats default.
    pub fn resolve(scenario: &Scenario, flag_tol: Option<f64>, env_tol: Option<f64>, flag_seed: Option<u64>) -> Self {
        Settings {
            tolerance: flag_tol.or(env_tol).or(scenario.tolerance).unwrap_or(DEFAULT_TOLERANCE),
            seed: flag_seed.or(scenario.seed).unwrap_or(0),
        }
    }
}

/// Builds everything a scenario references; input errors surface here,
/// before any check runs.
pub struct Prepared {
    pub functional: Option<Functional>,
    pub unitaries: Vec<MagicUnitary<f64>>,
}

pub fn prepare(scenario: &Scenario, settings: &Settings) -> Result<Prepared> {
    if !(settings.tolerance.is_finite() && settings.tolerance >= 0.0) {
        return Err(scenario_err("tolerance", "must be a non-negative number"));
    }
    if scenario.checks.is_empty() {
        return Err(scenario_err("checks", "at least one check is required"));
    }
    let functional = scenario.functional.as_ref().map(build_functional).transpose()?;
    let unitaries = scenario
        .unitaries
        .iter()
        .enumerate()
        .map(|(i, u)| build_unitary(u, i, settings.seed))
        .collect::<Result<Vec<_>>>()?;
    for (i, c) in scenario.checks.iter().enumerate() {
        let needs_functional = !matches!(
            c,
            CheckSpec::Relations
                | CheckSpec::CollapseLemma { .. }
                | CheckSpec::CrossingSum { .. }
                | CheckSpec::Counterexample { .. }
        );
        if needs_functional && functional.is_none() {
            return Err(scenario_err(
                format!("checks[{i}]"),
                format!("{} needs a functional", c.name()),
            ));
        }
        let needs_unitaries = matches!(
            c,
            CheckSpec::Relations
                | CheckSpec::QuantumInvariance { .. }
                | CheckSpec::EInvariance { .. }
                | CheckSpec::CollapseLemma { .. }
        );
        if needs_unitaries && unitaries.is_empty() {
            return Err(scenario_err(
                format!("checks[{i}]"),
                format!("{} needs at least one unitary", c.name()),
            ));
        }
    }
    Ok(Prepared { functional, unitaries })
}

/// Runs every check in scenario order.
pub fn run(scenario: &Scenario, settings: &Settings) -> Result<Report> {
    let prepared = prepare(scenario, settings)?;
    let checks = scenario
        .checks
        .iter()
        .enumerate()
        .map(|(i, c)| {
            run_check(c, &prepared, settings).map_err(|e| scenario_err(format!("checks[{i}] {}", c.name()), e))
        })
        .collect::<Result<Vec<_>>>()?;
    let pass = checks.iter().all(|c| c.pass);
    Ok(Report {
        scenario: scenario.name.clone(),
        seed: settings.seed,
        tolerance: settings.tolerance,
        checks,
        pass,
    })
}

fn variable_bound(mf: &dyn MomentFunctional<f64>, fallback: usize) -> usize {
    mf.variable_count().unwrap_or(fallback)
}

fn run_check(check: &CheckSpec, prep: &Prepared, settings: &Settings) -> Result<CheckRecord> {
    let tol = settings.tolerance;
    let seed = settings.seed;
    let mf = prep.functional.as_ref().map(Functional::as_dyn);
    let record = |params: Value, residual: f64, pass: bool, detail: Value| CheckRecord {
        name: check.name().to_string(),
        params,
        residual,
        pass,
        detail: Some(detail),
    };
    let usable = |mf: &dyn MomentFunctional<f64>| -> Vec<MagicUnitary<f64>> {
        let bound = variable_bound(mf, usize::MAX);
        prep.unitaries.iter().filter(|u| u.k() <= bound).cloned().collect()
    };
    match check {
        CheckSpec::Relations => {
            let reports: Vec<_> = prep.unitaries.iter().map(|u| verify_relations(u, tol)).collect();
            let residual = reports.iter().map(|r| r.max_residual).fold(0.0, f64::max);
            let pass = reports.iter().all(|r| r.passed);
            Ok(record(json!({}), residual, pass, json!({ "unitaries": reports })))
        }
        CheckSpec::QuantumInvariance { n_max } => {
            let n_max = n_max.unwrap_or(4);
            let mf = mf.expect("checked in prepare");
            let us = usable(mf);
            if us.is_empty() {
                return Err(Error::Precondition("no unitary fits the number of variables".into()));
            }
            let rep = check_quantum_invariance(mf, &us, n_max, tol, seed)?;
            Ok(record(
                json!({ "n_max": n_max, "unitaries": us.len() }),
                rep.max_residual,
                rep.passed,
                invariance_detail(&rep),
            ))
        }
        CheckSpec::ClassicalInvariance { n_max, k } => {
            let n_max = n_max.unwrap_or(4);
            let mf = mf.expect("checked in prepare");
            let k = match k {
                Some(k) => *k,
                None => prep
                    .unitaries
                    .iter()
                    .map(MagicUnitary::k)
                    .max()
                    .or(mf.variable_count())
                    .ok_or_else(|| Error::Precondition("set `k` for an unbounded sequence".into()))?,
            };
            let rep = check_classical_exchangeability(mf, k, n_max, tol, seed)?;
            Ok(record(
                json!({ "n_max": n_max, "k": k }),
                rep.max_residual,
                rep.passed,
                invariance_detail(&rep),
            ))
        }
        CheckSpec::EInvariance { n_max } => {
            let n_max = n_max.unwrap_or(3);
            let mf = mf.expect("checked in prepare");
            let us = usable(mf);
            let mut rng = sampling::rng(seed);
            let inner = random_decorations(mf, &mut rng, n_max.saturating_sub(1));
            let rep = check_e_invariance(mf, &us, &inner, n_max, tol, seed)?;
            Ok(record(
                json!({ "n_max": n_max, "unitaries": us.len() }),
                rep.max_residual,
                rep.passed,
                invariance_detail(&rep),
            ))
        }
        CheckSpec::Factorization { n_max, k, trials } => {
            let n_max = n_max.unwrap_or(4);
            let trials = trials.unwrap_or(20);
            let mf = mf.expect("checked in prepare");
            let k = k.unwrap_or_else(|| variable_bound(mf, 3).min(3));
            let sweep = factorization_sweep(mf, k, n_max, trials, tol, seed)?;
            let worst = sweep
                .worst
                .as_ref()
                .map(|(v, l)| json!({ "vars": one_based(v), "l": l + 1 }));
            let detail = json!({
                "products_checked": sweep.products_checked,
                "worst": worst,
                "summary": format!("{} products", sweep.products_checked),
            });
            Ok(record(
                json!({ "n_max": n_max, "k": k, "trials": trials }),
                sweep.max_residual,
                sweep.passed,
                detail,
            ))
        }
        CheckSpec::Freeness { n_max, variables } => {
            let n_max = n_max.unwrap_or(4);
            let mf = mf.expect("checked in prepare");
            let vars: Vec<usize> = match variables {
                Some(vs) => vs
                    .iter()
                    .map(|&v| {
                        v.checked_sub(1)
                            .ok_or_else(|| Error::Precondition("variables are 1-based".into()))
                    })
                    .collect::<Result<_>>()?,
                None => (0..variable_bound(mf, 2).min(2)).collect(),
            };
            let rep = check_freeness(mf, &vars, n_max, tol, seed)?;
            let cumulant_residual = rep.cumulants.as_ref().map_or(0.0, |c| c.max_residual);
            let residual = rep.definition.max_residual.max(cumulant_residual);
            let verdict = |p: bool| if p { "free" } else { "not free" };
            let detail = json!({
                "definition": {
                    "passed": rep.definition.passed,
                    "max_residual": rep.definition.max_residual,
                    "worst": rep.definition.worst.as_deref().map(one_based),
                    "products_checked": rep.definition.products_checked,
                },
                "cumulants": rep.cumulants.as_ref().map(|c| json!({
                    "passed": c.passed,
                    "max_residual": c.max_residual,
                    "worst": c.worst.as_ref().map(|w| one_based(&w.0)),
                    "tuples_checked": c.tuples_checked,
                })),
                "agree": rep.agree,
                "summary": format!(
                    "definition: {}, cumulants: {}, agree: {}",
                    verdict(rep.definition.passed),
                    verdict(rep.cumulants.as_ref().is_none_or(|c| c.passed)),
                    rep.agree
                ),
            });
            Ok(record(
                json!({ "n_max": n_max, "variables": one_based(&vars) }),
                residual,
                rep.passed && rep.agree,
                detail,
            ))
        }
        CheckSpec::CollapseLemma { n_max } => {
            let n_max = n_max.unwrap_or(4);
            let mut residual = 0.0f64;
            let mut sums = 0;
            let mut worst = Value::Null;
            for (i, u) in prep.unitaries.iter().enumerate() {
                let sweep = collapse_lemma_sweep(u, n_max)?;
                sums += sweep.sums_checked;
                if worst.is_null() || sweep.max_residual > residual {
                    residual = sweep.max_residual;
                    worst = json!({
                        "unitary": i + 1,
                        "pi": sweep.worst.as_ref().map(|w| w.0.clone()),
                        "tuple": sweep.worst.as_ref().map(|w| one_based(&w.1)),
                    });
                }
            }
            let detail = json!({ "sums_checked": sums, "worst": worst, "summary": format!("{sums} sums") });
            Ok(record(json!({ "n_max": n_max }), residual, residual <= tol, detail))
        }
        CheckSpec::CrossingSum { d, samples, s, variant } => {
            let d = d.unwrap_or(2);
            let samples = samples.unwrap_or(20);
            let s = s.unwrap_or(2);
            let variant = variant.unwrap_or(CrossingVariant::Plain);
            let sweep = crossing_iff_sweep::<f64>(d, samples, s, variant, seed)?;
            let detail = json!({
                "commuting": sweep.commuting,
                "generic": sweep.generic,
                "max_commuting_distance": sweep.max_commuting_distance,
                "min_generic_distance": if sweep.generic > 0 { json!(sweep.min_generic_distance) } else { Value::Null },
                "summary": format!("{} commuting, {} generic pairs", sweep.commuting, sweep.generic),
            });
            Ok(record(
                json!({ "d": d, "samples": samples, "s": s, "variant": variant }),
                sweep.max_commuting_distance,
                sweep.passed,
                detail,
            ))
        }
        CheckSpec::Counterexample { n } => {
            let n = n.unwrap_or(3);
            let rep = finite_counterexample(n)?;
            let mut detail = serde_json::to_value(&rep).expect("report serializes");
            detail["summary"] = json!(format!(
                "psi(u11) = {}, psi(u11 u21) = {}, contradiction: {}",
                rep.psi_u11, rep.psi_u11_u21, rep.contradiction
            ));
            Ok(record(json!({ "n": n }), 0.0, rep.contradiction, detail))
        }
    }
}
