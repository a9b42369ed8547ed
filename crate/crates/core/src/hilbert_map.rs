//! The context → amplitude map for a pair of incompatible dichotomous
//! variables `a`, `b`.
//!
//! A trigonometric context `C` is sent to the amplitude on the spectrum of `b`
//!
//! ```text
//! φ_C(b_j) = √(P(a_1|C) p(b_j|a_1)) + e^{i ε_j θ_C(b_j)} √(P(a_2|C) p(b_j|a_2))
//! ```
//!
//! with `θ_C(b_j) = arccos λ(B_j|A,C)`. The cells `A_i` (which are never
//! contexts of their own partition) are sent to the a-basis vectors.
//! Everything past the square roots is double precision.

use std::f64::consts::{PI, TAU};
use std::fmt;

use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::interference::{is_trigonometric_context, lambda, phase, Lambda};
use crate::prob_core::{
    conditional, enumerate_contexts, probability, DichotomousVariable, Event, FiniteProbabilitySpace, Rational,
};

/// Componentwise tolerance for state equality and Born-rule checks.
pub const STATE_TOLERANCE: f64 = 1e-12;

pub(crate) use crate::prob_core::rational_to_f64 as to_f64;

/// Signs `ε(b_1)`, `ε(b_2)` of the phases in the amplitude. Only opposite
/// signs are accepted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignConvention {
    eps: [i8; 2],
}

impl SignConvention {
    pub fn new(eps1: i8, eps2: i8) -> Result<Self> {
        if eps1.abs() != 1 || eps2.abs() != 1 || eps1 == eps2 {
            return Err(Error::EqualSigns);
        }
        Ok(Self { eps: [eps1, eps2] })
    }

    pub fn eps(&self, j: usize) -> i8 {
        self.eps[j]
    }
}

impl Default for SignConvention {
    fn default() -> Self {
        Self { eps: [-1, 1] }
    }
}

/// A vector of the two-dimensional amplitude space, indexed by `(b_1, b_2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector {
    pub components: [Complex64; 2],
}

impl StateVector {
    pub fn new(c0: Complex64, c1: Complex64) -> Self {
        Self { components: [c0, c1] }
    }

    pub fn real(x0: f64, x1: f64) -> Self {
        Self::new(Complex64::new(x0, 0.0), Complex64::new(x1, 0.0))
    }

    pub fn canonical(j: usize) -> Self {
        if j == 0 {
            Self::real(1.0, 0.0)
        } else {
            Self::real(0.0, 1.0)
        }
    }

    /// `(φ, ψ) = Σ_x φ(x) conj(ψ(x))`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.components[0] * other.components[0].conj() + self.components[1] * other.components[1].conj()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.components.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn scale(&self, factor: Complex64) -> StateVector {
        StateVector::new(self.components[0] * factor, self.components[1] * factor)
    }

    /// Representative with the first non-negligible component real and positive.
    pub fn phase_normalized(&self) -> StateVector {
        let lead = self
            .components
            .iter()
            .copied()
            .find(|z| z.norm() > 1e-9)
            .unwrap_or(Complex64::one());
        self.scale(lead.conj() / lead.norm())
    }

    pub fn approx_eq(&self, other: &StateVector, tol: f64) -> bool {
        self.components
            .iter()
            .zip(&other.components)
            .all(|(x, y)| (x - y).norm() <= tol)
    }

    /// Equality up to a global phase.
    pub fn same_ray(&self, other: &StateVector, tol: f64) -> bool {
        self.phase_normalized().approx_eq(&other.phase_normalized(), tol)
    }
}

impl fmt::Display for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [x, y] = self.components;
        write!(f, "({}{:+}i, {}{:+}i)", x.re, x.im, y.re, y.im)
    }
}

/// Transition probabilities `p(to_j | from_i)`, rows indexed by `from`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionMatrix {
    pub entries: [[Rational; 2]; 2],
}

impl TransitionMatrix {
    pub fn between(space: &FiniteProbabilitySpace, from: &DichotomousVariable, to: &DichotomousVariable) -> Result<Self> {
        let entry = |i: usize, j: usize| conditional(space, to.cell(j), from.cell(i));
        Ok(Self {
            entries: [[entry(0, 0)?, entry(0, 1)?], [entry(1, 0)?, entry(1, 1)?]],
        })
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.entries[i][j]
    }

    pub fn is_stochastic(&self) -> bool {
        self.entries.iter().all(|row| (&row[0] + &row[1]).is_one())
    }

    pub fn is_double_stochastic(&self) -> bool {
        self.is_stochastic() && (0..2).all(|j| (&self.entries[0][j] + &self.entries[1][j]).is_one())
    }

    pub fn transpose(&self) -> TransitionMatrix {
        let e = &self.entries;
        TransitionMatrix {
            entries: [[e[0][0].clone(), e[1][0].clone()], [e[0][1].clone(), e[1][1].clone()]],
        }
    }
}

/// Exact column-sum test on a stochastic matrix.
pub fn is_double_stochastic(m: &TransitionMatrix) -> bool {
    m.is_double_stochastic()
}

/// The b-basis (canonical) together with the a-basis built from one
/// reference context.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisPair {
    pub e_a: [StateVector; 2],
    /// Global phase removed from `e_2^a`; one when nothing was stripped.
    pub stripped_phase: Complex64,
    pub reference: Event,
    pub orthonormal: bool,
}

impl BasisPair {
    pub fn e_b(&self, j: usize) -> StateVector {
        StateVector::canonical(j)
    }

    pub fn gram(&self) -> [[Complex64; 2]; 2] {
        let e = &self.e_a;
        [[e[0].inner(&e[0]), e[0].inner(&e[1])], [e[1].inner(&e[0]), e[1].inner(&e[1])]]
    }

    /// Gram matrix equals the identity within `tol`.
    pub fn is_orthonormal(&self, tol: f64) -> bool {
        let g = self.gram();
        (0..2).all(|i| (0..2).all(|j| (g[i][j] - if i == j { 1.0 } else { 0.0 }).norm() <= tol))
    }
}

/// Exact per-context ingredients of the amplitude.
struct ContextParts {
    /// `P(a_i | C)`
    a_given_c: [Rational; 2],
    lambdas: [Lambda; 2],
}

impl ContextParts {
    fn new(space: &FiniteProbabilitySpace, a: &DichotomousVariable, b: &DichotomousVariable, c: &Event) -> Result<Self> {
        let l0 = lambda(space, b.cell(0), a.partition(), c, 0, 1)?;
        let l1 = lambda(space, b.cell(1), a.partition(), c, 0, 1)?;
        Ok(Self {
            a_given_c: [conditional(space, a.cell(0), c)?, conditional(space, a.cell(1), c)?],
            lambdas: [l0, l1],
        })
    }

    fn thetas(&self) -> Result<[f64; 2]> {
        if !self.lambdas.iter().all(Lambda::is_trigonometric) {
            return Err(Error::NotTrigonometric);
        }
        Ok([phase(&self.lambdas[0]).theta(), phase(&self.lambdas[1]).theta()])
    }
}

fn amplitude_from_parts(parts: &ContextParts, transition: &TransitionMatrix, signs: SignConvention) -> Result<StateVector> {
    let thetas = parts.thetas()?;
    let component = |j: usize| {
        let first = to_f64(&(&parts.a_given_c[0] * transition.get(0, j))).sqrt();
        let second = to_f64(&(&parts.a_given_c[1] * transition.get(1, j))).sqrt();
        let rotation = Complex64::from_polar(1.0, signs.eps(j) as f64 * thetas[j]);
        Complex64::new(first, 0.0) + rotation * second
    };
    Ok(StateVector::new(component(0), component(1)))
}

/// The amplitude `φ_C` of a trigonometric context.
pub fn amplitude(
    space: &FiniteProbabilitySpace,
    a: &DichotomousVariable,
    b: &DichotomousVariable,
    c: &Event,
    signs: SignConvention,
) -> Result<StateVector> {
    let transition = TransitionMatrix::between(space, a, b)?;
    let parts = ContextParts::new(space, a, b, c)?;
    amplitude_from_parts(&parts, &transition, signs)
}

/// a-basis vectors `e_1^a = (u_11, u_12)`, `e_2^a = (e^{iε_1θ_1} u_21, e^{iε_2θ_2} u_22)`
/// from the phases of `reference`, without any phase stripping. Works for any
/// stochastic transition matrix; the result is orthonormal only in the
/// double stochastic case.
pub fn raw_a_basis(
    space: &FiniteProbabilitySpace,
    a: &DichotomousVariable,
    b: &DichotomousVariable,
    reference: &Event,
    signs: SignConvention,
) -> Result<BasisPair> {
    let transition = TransitionMatrix::between(space, a, b)?;
    let thetas = ContextParts::new(space, a, b, reference)?.thetas()?;
    let u = |i: usize, j: usize| to_f64(transition.get(i, j)).sqrt();
    let e1 = StateVector::real(u(0, 0), u(0, 1));
    let e2 = StateVector::new(
        Complex64::from_polar(u(1, 0), signs.eps(0) as f64 * thetas[0]),
        Complex64::from_polar(u(1, 1), signs.eps(1) as f64 * thetas[1]),
    );
    let mut basis = BasisPair {
        e_a: [e1, e2],
        stripped_phase: Complex64::one(),
        reference: reference.clone(),
        orthonormal: false,
    };
    basis.orthonormal = basis.is_orthonormal(STATE_TOLERANCE);
    Ok(basis)
}

/// Real orthonormal a-basis `(q_1, q_2)`, `(−q_2, q_1)` with `q_1 = √p_11`,
/// `q_2 = √p_12`, obtained from the raw basis by removing the global phase
/// `e^{iε_2θ_2(C_0)}` of the second vector.
pub fn a_basis(
    space: &FiniteProbabilitySpace,
    a: &DichotomousVariable,
    b: &DichotomousVariable,
    reference: &Event,
    signs: SignConvention,
) -> Result<BasisPair> {
    let transition = TransitionMatrix::between(space, a, b)?;
    if !transition.is_double_stochastic() {
        return Err(Error::NotDoubleStochastic);
    }
    let thetas = ContextParts::new(space, a, b, reference)?.thetas()?;
    let q1 = to_f64(transition.get(0, 0)).sqrt();
    let q2 = to_f64(transition.get(0, 1)).sqrt();
    Ok(BasisPair {
        e_a: [StateVector::real(q1, q2), StateVector::real(-q2, q1)],
        stripped_phase: Complex64::from_polar(1.0, signs.eps(1) as f64 * thetas[1]),
        reference: reference.clone(),
        orthonormal: true,
    })
}

/// The extension `J(A_i) = e_i^a`.
pub fn extend_to_partition_cells(a: &DichotomousVariable, basis: &BasisPair) -> Vec<(Event, StateVector)> {
    (0..2).map(|i| (a.cell(i).clone(), basis.e_a[i])).collect()
}

/// The map `J` on trigonometric contexts extended to the cells of `a`.
///
/// For double stochastic transitions the a-basis is the phase-stripped real
/// one; otherwise it is the raw basis of the reference context.
#[derive(Debug, Clone)]
pub struct HilbertRepresentation<'m> {
    space: &'m FiniteProbabilitySpace,
    a: &'m DichotomousVariable,
    b: &'m DichotomousVariable,
    signs: SignConvention,
    transition: TransitionMatrix,
    basis: BasisPair,
}

impl<'m> HilbertRepresentation<'m> {
    /// Uses the whole space as reference context.
    pub fn new(
        space: &'m FiniteProbabilitySpace,
        a: &'m DichotomousVariable,
        b: &'m DichotomousVariable,
        signs: SignConvention,
    ) -> Result<Self> {
        Self::with_reference(space, a, b, signs, &space.full_event())
    }

    pub fn with_reference(
        space: &'m FiniteProbabilitySpace,
        a: &'m DichotomousVariable,
        b: &'m DichotomousVariable,
        signs: SignConvention,
        reference: &Event,
    ) -> Result<Self> {
        let transition = TransitionMatrix::between(space, a, b)?;
        let basis = if transition.is_double_stochastic() {
            a_basis(space, a, b, reference, signs)?
        } else {
            raw_a_basis(space, a, b, reference, signs)?
        };
        Ok(Self {
            space,
            a,
            b,
            signs,
            transition,
            basis,
        })
    }

    pub fn space(&self) -> &FiniteProbabilitySpace {
        self.space
    }

    pub fn a(&self) -> &DichotomousVariable {
        self.a
    }

    pub fn b(&self) -> &DichotomousVariable {
        self.b
    }

    pub fn signs(&self) -> SignConvention {
        self.signs
    }

    pub fn transition(&self) -> &TransitionMatrix {
        &self.transition
    }

    pub fn basis(&self) -> &BasisPair {
        &self.basis
    }

    pub fn is_double_stochastic(&self) -> bool {
        self.transition.is_double_stochastic()
    }

    /// Index of the `a` cell equal to `event`, if any.
    pub fn cell_index(&self, event: &Event) -> Option<usize> {
        (0..2).find(|&i| self.a.cell(i) == event)
    }

    /// Membership in the extended family (trigonometric contexts plus the `a` cells).
    pub fn in_domain(&self, event: &Event) -> Result<bool> {
        if self.cell_index(event).is_some() {
            return Ok(true);
        }
        match is_trigonometric_context(self.space, self.a.partition(), self.b.partition(), event) {
            Ok(t) => Ok(t),
            Err(Error::NotAContext) => Ok(false),
            Err(e) => Err(e),
        }
    }

    /// `J(C)` for `C` in the extended family.
    pub fn state(&self, event: &Event) -> Result<StateVector> {
        if let Some(i) = self.cell_index(event) {
            return Ok(self.basis.e_a[i]);
        }
        let parts = ContextParts::new(self.space, self.a, self.b, event)?;
        amplitude_from_parts(&parts, &self.transition, self.signs)
    }

    /// The `a` cells together with the members of `candidates` that lie in
    /// the extended family, sorted and without repeats.
    pub fn domain_within(&self, candidates: &[Event]) -> Result<Vec<Event>> {
        let mut out: Vec<Event> = vec![self.a.cell(0).clone(), self.a.cell(1).clone()];
        for c in candidates {
            if self.in_domain(c)? {
                out.push(c.clone());
            }
        }
        out.sort();
        out.dedup();
        Ok(out)
    }

    /// Every member of the extended family, by exhaustive enumeration.
    pub fn domain(&self) -> Result<Vec<Event>> {
        self.domain_within(&enumerate_contexts(self.space, self.a.partition())?)
    }

    /// Members of `candidates` that are trigonometric contexts, excluding the `a` cells.
    pub fn trigonometric_contexts_within(&self, candidates: &[Event]) -> Result<Vec<Event>> {
        Ok(self
            .domain_within(candidates)?
            .into_iter()
            .filter(|c| self.cell_index(c).is_none())
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BornRow {
    pub context: String,
    pub cell: usize,
    /// `|⟨φ_C, e_j^a⟩|²`
    pub predicted: f64,
    /// `P(a = a_j | C)`
    pub expected: f64,
    pub error: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BornReport {
    pub rows: Vec<BornRow>,
    /// Supplied events outside the extended family.
    pub skipped: Vec<String>,
    pub passed: bool,
    pub max_error: f64,
}

/// Born's rule in the a-basis of the reference context, for each supplied context.
pub fn born_in_a_basis_check(rep: &HilbertRepresentation<'_>, contexts: &[Event]) -> Result<BornReport> {
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for c in contexts {
        if !rep.in_domain(c)? {
            skipped.push(rep.space.label(c));
            continue;
        }
        let state = rep.state(c)?;
        for j in 0..2 {
            let predicted = state.inner(&rep.basis.e_a[j]).norm_sqr();
            let expected = to_f64(&conditional(rep.space, rep.a.cell(j), c)?);
            let error = (predicted - expected).abs();
            rows.push(BornRow {
                context: rep.space.label(c),
                cell: j,
                predicted,
                expected,
                error,
                passed: error <= STATE_TOLERANCE,
            });
        }
    }
    let max_error = rows.iter().map(|r| r.error).fold(0.0, f64::max);
    Ok(BornReport {
        passed: rows.iter().all(|r| r.passed),
        rows,
        skipped,
        max_error,
    })
}

/// Born's rule in the b-basis: `|φ_C(x)|² = P(b = x | C)`. Returns the largest
/// deviation over both outcomes and the norm defect.
pub fn born_in_b_basis_error(rep: &HilbertRepresentation<'_>, c: &Event) -> Result<f64> {
    let state = rep.state(c)?;
    let mut worst = (state.norm_sqr() - 1.0).abs();
    for j in 0..2 {
        let expected = to_f64(&conditional(rep.space, rep.b.cell(j), c)?);
        worst = worst.max((state.components[j].norm_sqr() - expected).abs());
    }
    Ok(worst)
}

fn circular_distance(x: f64, y: f64) -> f64 {
    let d = (x - y).rem_euclid(TAU);
    d.min(TAU - d)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaRow {
    pub context: String,
    /// `ε_1 θ_C(b_1) − ε_2 θ_C(b_2)` reduced to `[0, 2π)`.
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaConstancyReport {
    pub eps: [i8; 2],
    pub rows: Vec<DeltaRow>,
    pub constant: bool,
    pub equals_pi: bool,
    /// Two contexts whose `Δ` differ, when not constant.
    pub violation: Option<(String, String)>,
}

/// `Δ(C) = ε_1 θ_C(b_1) − ε_2 θ_C(b_2)` over all trigonometric contexts. Any
/// pair of signs is accepted here so that equal signs can be exhibited.
pub fn delta_constancy_check(
    space: &FiniteProbabilitySpace,
    a: &DichotomousVariable,
    b: &DichotomousVariable,
    eps1: i8,
    eps2: i8,
) -> Result<DeltaConstancyReport> {
    if !TransitionMatrix::between(space, a, b)?.is_double_stochastic() {
        return Err(Error::NotDoubleStochastic);
    }
    let mut rows = Vec::new();
    for c in enumerate_contexts(space, a.partition())? {
        let parts = ContextParts::new(space, a, b, &c)?;
        let Ok(thetas) = parts.thetas() else { continue };
        let delta = (eps1 as f64 * thetas[0] - eps2 as f64 * thetas[1]).rem_euclid(TAU);
        rows.push(DeltaRow {
            context: space.label(&c),
            delta,
        });
    }
    let violation = rows.first().and_then(|first| {
        rows.iter()
            .find(|r| circular_distance(r.delta, first.delta) > STATE_TOLERANCE)
            .map(|r| (first.context.clone(), r.context.clone()))
    });
    Ok(DeltaConstancyReport {
        eps: [eps1, eps2],
        constant: violation.is_none(),
        equals_pi: rows.iter().all(|r| circular_distance(r.delta, PI) <= STATE_TOLERANCE),
        rows,
        violation,
    })
}

/// Contexts of `a` on which measuring `a` leaves the law of `b` undisturbed
/// (`δ(B_j|A,C) = 0` exactly for both `j`).
pub fn nonsensitive_contexts(
    space: &FiniteProbabilitySpace,
    a: &DichotomousVariable,
    b: &DichotomousVariable,
) -> Result<Vec<Event>> {
    let mut out = Vec::new();
    for c in enumerate_contexts(space, a.partition())? {
        let mut undisturbed = true;
        for j in 0..2 {
            if !crate::interference::delta(space, b.cell(j), a.partition(), &c)?.is_zero() {
                undisturbed = false;
                break;
            }
        }
        if undisturbed {
            out.push(c);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageClass {
    pub contexts: Vec<Event>,
    pub state: StateVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageSet {
    /// Distinct states (up to global phase), in order of first appearance.
    pub classes: Vec<ImageClass>,
}

impl ImageSet {
    pub fn distinct_states(&self) -> usize {
        self.classes.len()
    }

    /// Groups of two or more contexts sharing one state.
    pub fn collisions(&self) -> Vec<Vec<Event>> {
        self.classes
            .iter()
            .filter(|c| c.contexts.len() > 1)
            .map(|c| c.contexts.clone())
            .collect()
    }
}

/// Image of `members` (taken from the extended family) under `J`, with
/// colliding contexts grouped.
pub fn image_set(rep: &HilbertRepresentation<'_>, members: &[Event]) -> Result<ImageSet> {
    let mut classes: Vec<ImageClass> = Vec::new();
    for c in members.iter().cloned() {
        let state = rep.state(&c)?;
        match classes.iter_mut().find(|k| k.state.same_ray(&state, STATE_TOLERANCE)) {
            Some(class) => class.contexts.push(c),
            None => classes.push(ImageClass {
                contexts: vec![c],
                state,
            }),
        }
    }
    Ok(ImageSet { classes })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualCoordinates {
    /// Coordinates in the canonical b-basis.
    pub b_coords: [Complex64; 2],
    /// Coordinates in the a-basis.
    pub a_coords: [Complex64; 2],
    pub b_probabilities: [f64; 2],
    /// `|(φ, e_j^a)_a|²`
    pub a_probabilities: [f64; 2],
    pub mean_b: f64,
    pub mean_a: f64,
}

/// Expands `state` in both bases and evaluates the per-variable inner products.
pub fn dual_inner_products(
    a: &DichotomousVariable,
    b: &DichotomousVariable,
    basis: &BasisPair,
    state: &StateVector,
) -> Result<DualCoordinates> {
    let [e1, e2] = basis.e_a;
    let det = e1.components[0] * e2.components[1] - e2.components[0] * e1.components[1];
    if det.norm() < STATE_TOLERANCE {
        return Err(Error::SingularBasis);
    }
    let [p0, p1] = state.components;
    let v1 = (p0 * e2.components[1] - e2.components[0] * p1) / det;
    let v2 = (e1.components[0] * p1 - p0 * e1.components[1]) / det;
    let a_probabilities = [v1.norm_sqr(), v2.norm_sqr()];
    let b_probabilities = [p0.norm_sqr(), p1.norm_sqr()];
    let mean = |values: &[Rational; 2], probs: &[f64; 2]| to_f64(&values[0]) * probs[0] + to_f64(&values[1]) * probs[1];
    Ok(DualCoordinates {
        b_coords: [p0, p1],
        a_coords: [v1, v2],
        mean_b: mean(b.values(), &b_probabilities),
        mean_a: mean(a.values(), &a_probabilities),
        b_probabilities,
        a_probabilities,
    })
}

/// `λ(B_1)² p_11 p_21 = λ(B_2)² p_12 p_22` with opposite signs, exactly.
pub fn opposite_disturbance_holds(
    space: &FiniteProbabilitySpace,
    a: &DichotomousVariable,
    b: &DichotomousVariable,
    c: &Event,
) -> Result<bool> {
    let t = TransitionMatrix::between(space, a, b)?;
    let l1 = lambda(space, b.cell(0), a.partition(), c, 0, 1)?;
    let l2 = lambda(space, b.cell(1), a.partition(), c, 0, 1)?;
    let lhs = &l1.squared * t.get(0, 0) * t.get(1, 0);
    let rhs = &l2.squared * t.get(0, 1) * t.get(1, 1);
    Ok(lhs == rhs && l1.sign == -l2.sign)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginalSymmetryReport {
    /// `B_1` and `B_2` are trigonometric contexts of `a`.
    pub b_cells_trigonometric: bool,
    /// `P^{a/b}` is double stochastic.
    pub reverse_double_stochastic: bool,
    /// `p(b_i|a_j) = p(a_j|b_i)` for all `i, j`.
    pub symmetric: bool,
    /// `P(a_i) = P(b_i) = 1/2`.
    pub uniform: bool,
    /// `λ(B_2|A,B_1) = −(μ_1² + μ_2²)/(2μ_1μ_2)`, exactly.
    pub lambda_formula: bool,
    /// `λ(B_i|A,B_i) = 1` and `λ(B_i|A,B_j) = −1`; only evaluated when both
    /// matrices are double stochastic.
    pub unit_lambdas: Option<bool>,
    pub holds: bool,
}

/// For double stochastic `P^{b/a}`: the `b` cells are trigonometric contexts
/// iff `P^{a/b}` is double stochastic iff the transitions are symmetric iff
/// both marginals are uniform.
pub fn marginal_symmetry_check(
    space: &FiniteProbabilitySpace,
    a: &DichotomousVariable,
    b: &DichotomousVariable,
) -> Result<MarginalSymmetryReport> {
    let forward = TransitionMatrix::between(space, a, b)?;
    if !forward.is_double_stochastic() {
        return Err(Error::NotDoubleStochastic);
    }
    let reverse = TransitionMatrix::between(space, b, a)?;
    let b_cells_trigonometric = is_trigonometric_context(space, a.partition(), b.partition(), b.cell(0))?
        && is_trigonometric_context(space, a.partition(), b.partition(), b.cell(1))?;
    let reverse_double_stochastic = reverse.is_double_stochastic();
    // forward[j][i] = p(b_i|a_j), reverse[i][j] = p(a_j|b_i)
    let symmetric = (0..2).all(|i| (0..2).all(|j| forward.get(j, i) == reverse.get(i, j)));
    let half = Rational::new(1.into(), 2.into());
    let uniform = (0..2).all(|i| {
        probability(space, a.cell(i)).map(|p| p == half).unwrap_or(false)
            && probability(space, b.cell(i)).map(|p| p == half).unwrap_or(false)
    });

    let mu_sq: Vec<Rational> = (0..2)
        .map(|j| Ok(conditional(space, a.cell(j), b.cell(0))? * forward.get(j, 1)))
        .collect::<Result<_>>()?;
    let l21 = lambda(space, b.cell(1), a.partition(), b.cell(0), 0, 1)?;
    let sum = &mu_sq[0] + &mu_sq[1];
    let expected_sq = &sum * &sum / (Rational::from_integer(4.into()) * &mu_sq[0] * &mu_sq[1]);
    let lambda_formula = l21.squared == expected_sq && l21.sign == -1;

    let unit_lambdas = if reverse_double_stochastic {
        let mut ok = true;
        for i in 0..2 {
            for j in 0..2 {
                let l = lambda(space, b.cell(j), a.partition(), b.cell(i), 0, 1)?;
                let sign = if i == j { 1 } else { -1 };
                ok &= l.squared.is_one() && l.sign == sign;
            }
        }
        Some(ok)
    } else {
        None
    };

    let holds = b_cells_trigonometric == reverse_double_stochastic
        && reverse_double_stochastic == symmetric
        && symmetric == uniform
        && lambda_formula
        && unit_lambdas.unwrap_or(true);
    Ok(MarginalSymmetryReport {
        b_cells_trigonometric,
        reverse_double_stochastic,
        symmetric,
        uniform,
        lambda_formula,
        unit_lambdas,
        holds,
    })
}
