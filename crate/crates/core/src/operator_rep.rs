//! Operators on the two-dimensional amplitude space, written in the b-basis.
//!
//! `b̂` is the multiplication operator `diag(b_1, b_2)`; `â` is diagonal in the
//! real a-basis of a double stochastic transition matrix. Observables of the
//! form `f(a) + g(b)` are quantized as `f(â) + g(b̂)`, which keeps conditional
//! means but not distributions.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::hilbert_map::{to_f64, HilbertRepresentation, StateVector, TransitionMatrix, STATE_TOLERANCE};
use crate::interference::is_trigonometric_context;
use crate::prob_core::{
    conditional, enumerate_events, is_context, probability, DichotomousVariable, Event, FiniteProbabilitySpace,
    Rational,
};

/// Tolerance for mean preservation and spectral reconstruction.
pub const MEAN_TOLERANCE: f64 = 1e-10;

/// A complex 2×2 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix2 {
    pub m: [[Complex64; 2]; 2],
}

impl Matrix2 {
    pub fn new(m: [[Complex64; 2]; 2]) -> Self {
        Self { m }
    }

    pub fn real(m: [[f64; 2]; 2]) -> Self {
        Self::new(m.map(|row| row.map(|x| Complex64::new(x, 0.0))))
    }

    pub fn zero() -> Self {
        Self::real([[0.0; 2]; 2])
    }

    pub fn identity() -> Self {
        Self::real([[1.0, 0.0], [0.0, 1.0]])
    }

    pub fn diagonal(d0: f64, d1: f64) -> Self {
        Self::real([[d0, 0.0], [0.0, d1]])
    }

    /// `|v⟩⟨v|`
    pub fn projector(v: &StateVector) -> Self {
        let c = v.components;
        Self::new([[c[0] * c[0].conj(), c[0] * c[1].conj()], [c[1] * c[0].conj(), c[1] * c[1].conj()]])
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.m[i][j]
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.m.map(|row| row.map(|x| x * s)))
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.m;
        Self::new([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn apply(&self, v: &StateVector) -> StateVector {
        let [x, y] = v.components;
        StateVector::new(self.m[0][0] * x + self.m[0][1] * y, self.m[1][0] * x + self.m[1][1] * y)
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.m.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Matrix2, tol: f64) -> bool {
        (*self - *other).max_abs() <= tol
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.approx_eq(&self.adjoint(), tol)
    }
}

impl Add for Matrix2 {
    type Output = Matrix2;
    fn add(self, rhs: Matrix2) -> Matrix2 {
        let mut out = self;
        for i in 0..2 {
            for j in 0..2 {
                out.m[i][j] += rhs.m[i][j];
            }
        }
        out
    }
}

impl Sub for Matrix2 {
    type Output = Matrix2;
    fn sub(self, rhs: Matrix2) -> Matrix2 {
        self + rhs.scale(-1.0)
    }
}

impl Mul for Matrix2 {
    type Output = Matrix2;
    fn mul(self, rhs: Matrix2) -> Matrix2 {
        let mut out = Matrix2::zero();
        for i in 0..2 {
            for j in 0..2 {
                out.m[i][j] = self.m[i][0] * rhs.m[0][j] + self.m[i][1] * rhs.m[1][j];
            }
        }
        out
    }
}

/// `xy − yx`
pub fn commutator(x: &Matrix2, y: &Matrix2) -> Matrix2 {
    *x * *y - *y * *x
}

/// Eigenvalues in ascending order with unit eigenvectors whose first
/// non-negligible component is real and positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralDecomposition {
    pub eigenvalues: [f64; 2],
    pub eigenvectors: [StateVector; 2],
    pub degenerate: bool,
}

impl SpectralDecomposition {
    /// `Σ k_i |e_i⟩⟨e_i|`
    pub fn reconstruct(&self) -> Matrix2 {
        Matrix2::projector(&self.eigenvectors[0]).scale(self.eigenvalues[0])
            + Matrix2::projector(&self.eigenvectors[1]).scale(self.eigenvalues[1])
    }
}

/// A self-adjoint operator in the b-basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermitianOperator {
    matrix: Matrix2,
}

impl HermitianOperator {
    pub fn new(matrix: Matrix2) -> Result<Self> {
        if !matrix.is_hermitian(STATE_TOLERANCE) {
            return Err(Error::NotHermitian);
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &Matrix2 {
        &self.matrix
    }

    pub fn apply(&self, v: &StateVector) -> StateVector {
        self.matrix.apply(v)
    }

    /// Closed-form eigendecomposition of `[[x, c], [c*, y]]`.
    pub fn spectral(&self) -> SpectralDecomposition {
        let x = self.matrix.m[0][0].re;
        let y = self.matrix.m[1][1].re;
        let c = self.matrix.m[0][1];
        let mid = (x + y) / 2.0;
        let radius = ((x - y) / 2.0).hypot(c.norm());
        let degenerate = radius <= STATE_TOLERANCE * mid.abs().max(1.0);
        if degenerate {
            return SpectralDecomposition {
                eigenvalues: [mid, mid],
                eigenvectors: [StateVector::canonical(0), StateVector::canonical(1)],
                degenerate,
            };
        }
        let eigenvalues = [mid - radius, mid + radius];
        let eigenvectors = eigenvalues.map(|k| {
            let u = StateVector::new(c, Complex64::new(k - x, 0.0));
            let v = StateVector::new(Complex64::new(k - y, 0.0), c.conj());
            let w = if u.norm_sqr() >= v.norm_sqr() { u } else { v };
            w.scale(Complex64::new(1.0 / w.norm_sqr().sqrt(), 0.0)).phase_normalized()
        });
        SpectralDecomposition {
            eigenvalues,
            eigenvectors,
            degenerate,
        }
    }
}

impl Add for HermitianOperator {
    type Output = HermitianOperator;
    fn add(self, rhs: HermitianOperator) -> HermitianOperator {
        HermitianOperator {
            matrix: self.matrix + rhs.matrix,
        }
    }
}

/// `diag(b_1, b_2)`
pub fn b_operator(b: &DichotomousVariable) -> HermitianOperator {
    function_of_b(&b.values().clone())
}

/// `g(b̂)` from the two values `g(b_1)`, `g(b_2)`.
pub fn function_of_b(g: &[Rational; 2]) -> HermitianOperator {
    HermitianOperator {
        matrix: Matrix2::diagonal(to_f64(&g[0]), to_f64(&g[1])),
    }
}

/// `â = a_1|e_1^a⟩⟨e_1^a| + a_2|e_2^a⟩⟨e_2^a|` in the real a-basis.
pub fn a_operator(a: &DichotomousVariable, transition: &TransitionMatrix) -> Result<HermitianOperator> {
    function_of_a(&a.values().clone(), transition)
}

/// `f(â)` from the two values `f(a_1)`, `f(a_2)`: entries
/// `f_1 q_1² + f_2 q_2²`, `(f_1 − f_2) q_1 q_2`, `f_1 q_2² + f_2 q_1²`.
pub fn function_of_a(f: &[Rational; 2], transition: &TransitionMatrix) -> Result<HermitianOperator> {
    if !transition.is_double_stochastic() {
        return Err(Error::NotDoubleStochastic);
    }
    let q1_sq = to_f64(transition.get(0, 0));
    let q2_sq = to_f64(transition.get(0, 1));
    let cross = (q1_sq * q2_sq).sqrt();
    let (f1, f2) = (to_f64(&f[0]), to_f64(&f[1]));
    Ok(HermitianOperator {
        matrix: Matrix2::real([
            [f1 * q1_sq + f2 * q2_sq, (f1 - f2) * cross],
            [(f1 - f2) * cross, f1 * q2_sq + f2 * q1_sq],
        ]),
    })
}

/// A real function of a pair of values, restricted to the cases that are quantized.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WeylSymbol {
    /// `c + c_a·a + c_b·b`
    Affine {
        constant: Rational,
        a_coef: Rational,
        b_coef: Rational,
    },
    /// `s·a·b`, quantized as `s(âb̂ + b̂â)/2`.
    SymmetrizedProduct { scale: Rational },
}

/// Observables built from the two fundamental variables. Functions of a single
/// variable are given by their two values on the variable's spectrum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CompositeObservable {
    OfA([Rational; 2]),
    OfB([Rational; 2]),
    Sum { f: [Rational; 2], g: [Rational; 2] },
    General(WeylSymbol),
}

impl CompositeObservable {
    /// `f(a) + g(b)` for arbitrary maps on the two spectra.
    pub fn sum_with(
        a: &DichotomousVariable,
        b: &DichotomousVariable,
        f: impl Fn(&Rational) -> Rational,
        g: impl Fn(&Rational) -> Rational,
    ) -> Self {
        CompositeObservable::Sum {
            f: [f(a.value(0)), f(a.value(1))],
            g: [g(b.value(0)), g(b.value(1))],
        }
    }

    /// `a + b`
    pub fn a_plus_b(a: &DichotomousVariable, b: &DichotomousVariable) -> Self {
        Self::sum_with(a, b, Rational::clone, Rational::clone)
    }

    /// The induced random variable `ω ↦ d(ω)`.
    pub fn realize(&self, a: &DichotomousVariable, b: &DichotomousVariable) -> RandomVariable {
        let n = a.partition().cells().iter().map(Event::len).sum();
        let values = (0..n)
            .map(|p| {
                let (i, j) = (a.cell_index_at(p), b.cell_index_at(p));
                match self {
                    CompositeObservable::OfA(f) => f[i].clone(),
                    CompositeObservable::OfB(g) => g[j].clone(),
                    CompositeObservable::Sum { f, g } => &f[i] + &g[j],
                    CompositeObservable::General(WeylSymbol::Affine {
                        constant,
                        a_coef,
                        b_coef,
                    }) => constant + a_coef * a.value(i) + b_coef * b.value(j),
                    CompositeObservable::General(WeylSymbol::SymmetrizedProduct { scale }) => {
                        scale * a.value(i) * b.value(j)
                    }
                }
            })
            .collect();
        RandomVariable { values }
    }

    /// The operator assigned to the observable.
    pub fn quantize(
        &self,
        a: &DichotomousVariable,
        b: &DichotomousVariable,
        transition: &TransitionMatrix,
    ) -> Result<HermitianOperator> {
        match self {
            CompositeObservable::OfA(f) => function_of_a(f, transition),
            CompositeObservable::OfB(g) => {
                if !transition.is_double_stochastic() {
                    return Err(Error::NotDoubleStochastic);
                }
                Ok(function_of_b(g))
            }
            CompositeObservable::Sum { f, g } => Ok(function_of_a(f, transition)? + function_of_b(g)),
            CompositeObservable::General(WeylSymbol::Affine {
                constant,
                a_coef,
                b_coef,
            }) => {
                let a_op = a_operator(a, transition)?.matrix.scale(to_f64(a_coef));
                let b_op = b_operator(b).matrix.scale(to_f64(b_coef));
                HermitianOperator::new(Matrix2::identity().scale(to_f64(constant)) + a_op + b_op)
            }
            CompositeObservable::General(WeylSymbol::SymmetrizedProduct { scale }) => {
                let a_op = a_operator(a, transition)?.matrix;
                let b_op = b_operator(b).matrix;
                HermitianOperator::new((a_op * b_op + b_op * a_op).scale(to_f64(scale) / 2.0))
            }
        }
    }
}

/// A real random variable given by its exact value at every point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomVariable {
    pub values: Vec<Rational>,
}

impl RandomVariable {
    pub fn indicator(space: &FiniteProbabilitySpace, event: &Event) -> Self {
        Self {
            values: (0..space.len())
                .map(|p| Rational::from_integer(i64::from(event.contains(p)).into()))
                .collect(),
        }
    }
}

/// `E(ξ|C)`, exact.
pub fn classical_mean(space: &FiniteProbabilitySpace, xi: &RandomVariable, c: &Event) -> Result<Rational> {
    let pc = probability(space, c)?;
    if pc.is_zero() {
        return Err(Error::ZeroCondition);
    }
    let total: Rational = c.members().iter().map(|&p| space.weight(p) * &xi.values[p]).sum();
    Ok(total / pc)
}

/// Pushforward of `P(·|C)`. Every value taken anywhere on the space appears,
/// with probability zero when it is not taken on `C`.
pub fn classical_distribution(
    space: &FiniteProbabilitySpace,
    xi: &RandomVariable,
    c: &Event,
) -> Result<BTreeMap<Rational, Rational>> {
    let pc = probability(space, c)?;
    if pc.is_zero() {
        return Err(Error::ZeroCondition);
    }
    let mut out: BTreeMap<Rational, Rational> = xi.values.iter().map(|v| (v.clone(), Rational::zero())).collect();
    for &p in c.members() {
        *out.get_mut(&xi.values[p]).expect("value present") += space.weight(p) / &pc;
    }
    Ok(out)
}

/// `D(ξ|C) = E[(ξ − E(ξ|C))²|C]`, exact.
pub fn dispersion(space: &FiniteProbabilitySpace, xi: &RandomVariable, c: &Event) -> Result<Rational> {
    let mean = classical_mean(space, xi, c)?;
    let pc = probability(space, c)?;
    let total: Rational = c
        .members()
        .iter()
        .map(|&p| {
            let d = &xi.values[p] - &mean;
            space.weight(p) * &d * &d
        })
        .sum();
    Ok(total / pc)
}

/// `(Hφ, φ)`; the imaginary residue of a Hermitian operator is discarded.
pub fn quantum_mean(op: &HermitianOperator, state: &StateVector) -> f64 {
    op.apply(state).inner(state).re
}

/// Spectral distribution `k_i ↦ |(φ, e_i)|²`, eigenvalues ascending. A
/// degenerate spectrum yields a single entry.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDistribution {
    pub entries: Vec<(f64, f64)>,
    pub degenerate: bool,
}

impl SpectralDistribution {
    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.1).sum()
    }
}

pub fn observable_distribution(op: &HermitianOperator, state: &StateVector) -> SpectralDistribution {
    let spec = op.spectral();
    if spec.degenerate {
        return SpectralDistribution {
            entries: vec![(spec.eigenvalues[0], state.norm_sqr())],
            degenerate: true,
        };
    }
    SpectralDistribution {
        entries: (0..2)
            .map(|i| (spec.eigenvalues[i], state.inner(&spec.eigenvectors[i]).norm_sqr()))
            .collect(),
        degenerate: false,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeanRow {
    pub context: String,
    pub classical: Rational,
    pub quantum: f64,
    pub error: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeanCheckReport {
    pub rows: Vec<MeanRow>,
    pub max_error: f64,
    pub passed: bool,
}

/// Compares `⟨d̂⟩_{φ_C}` with `E(d|C)` for each of `members`, which must lie
/// in the extended family.
pub fn mean_preservation_check(
    rep: &HilbertRepresentation<'_>,
    observable: &CompositeObservable,
    members: &[Event],
) -> Result<MeanCheckReport> {
    let op = observable.quantize(rep.a(), rep.b(), rep.transition())?;
    let xi = observable.realize(rep.a(), rep.b());
    let mut rows = Vec::new();
    for c in members {
        let classical = classical_mean(rep.space(), &xi, c)?;
        let quantum = quantum_mean(&op, &rep.state(c)?);
        let error = (quantum - to_f64(&classical)).abs();
        rows.push(MeanRow {
            context: rep.space().label(c),
            classical,
            quantum,
            error,
            passed: error <= MEAN_TOLERANCE,
        });
    }
    let max_error = rows.iter().map(|r| r.error).fold(0.0, f64::max);
    Ok(MeanCheckReport {
        passed: rows.iter().all(|r| r.passed),
        rows,
        max_error,
    })
}

/// Mean preservation for `f(a) + g(b)`.
pub fn sum_observable_mean_check(
    rep: &HilbertRepresentation<'_>,
    f: &[Rational; 2],
    g: &[Rational; 2],
    members: &[Event],
) -> Result<MeanCheckReport> {
    mean_preservation_check(rep, &CompositeObservable::Sum { f: f.clone(), g: g.clone() }, members)
}

/// Affine relabelling `x ↦ scale·x + shift` of classical values before they
/// are compared with a spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Alignment {
    pub scale: f64,
    pub shift: f64,
}

impl Alignment {
    pub fn apply(&self, x: f64) -> f64 {
        self.scale * x + self.shift
    }

    /// The increasing affine map sending the smallest and largest values
    /// taken with positive probability onto the two eigenvalues. `None` when
    /// either side has a single point.
    pub fn support_to_spectrum(classical: &BTreeMap<Rational, Rational>, quantum: &SpectralDistribution) -> Option<Self> {
        let support: Vec<f64> = classical
            .iter()
            .filter(|(_, p)| p.is_positive())
            .map(|(v, _)| to_f64(v))
            .collect();
        if support.len() < 2 || quantum.entries.len() < 2 {
            return None;
        }
        let (lo, hi) = (support[0], support[support.len() - 1]);
        let (k_lo, k_hi) = (quantum.entries[0].0, quantum.entries[quantum.entries.len() - 1].0);
        let scale = (k_hi - k_lo) / (hi - lo);
        Some(Self {
            scale,
            shift: k_lo - scale * lo,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistributionMismatch {
    pub classical: BTreeMap<Rational, Rational>,
    pub quantum: SpectralDistribution,
    pub alignment: Option<Alignment>,
    /// Total variation between the (aligned) classical law and the spectral law.
    pub total_variation: f64,
}

/// Total variation distance between two finite laws on the real line; values
/// within `1e-9` of each other are identified.
pub fn total_variation(p: &[(f64, f64)], q: &[(f64, f64)]) -> f64 {
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for &(x, w) in p {
        match merged.iter_mut().find(|(y, _)| (x - *y).abs() <= 1e-9) {
            Some(slot) => slot.1 += w,
            None => merged.push((x, w)),
        }
    }
    for &(x, w) in q {
        match merged.iter_mut().find(|(y, _)| (x - *y).abs() <= 1e-9) {
            Some(slot) => slot.1 -= w,
            None => merged.push((x, -w)),
        }
    }
    merged.iter().map(|(_, w)| w.abs()).sum::<f64>() / 2.0
}

/// Classical conditional law of `d` on `C` against the spectral law of `d̂` in `φ_C`.
pub fn distribution_mismatch(
    rep: &HilbertRepresentation<'_>,
    observable: &CompositeObservable,
    c: &Event,
    alignment: Option<Alignment>,
) -> Result<DistributionMismatch> {
    let op = observable.quantize(rep.a(), rep.b(), rep.transition())?;
    let classical = classical_distribution(rep.space(), &observable.realize(rep.a(), rep.b()), c)?;
    let quantum = observable_distribution(&op, &rep.state(c)?);
    let identity = Alignment { scale: 1.0, shift: 0.0 };
    let map = alignment.unwrap_or(identity);
    let aligned: Vec<(f64, f64)> = classical.iter().map(|(v, p)| (map.apply(to_f64(v)), to_f64(p))).collect();
    Ok(DistributionMismatch {
        total_variation: total_variation(&aligned, &quantum.entries),
        classical,
        quantum,
        alignment,
    })
}

/// `ℋ = (h/2)(a² + V(b))` as an element of the `f(a) + g(b)` class; its
/// quantization is `(h/2)(â² + V(b̂))`. `potential` lists `V(b_1)`, `V(b_2)`.
pub fn hamiltonian_observable(a: &DichotomousVariable, h: &Rational, potential: &[Rational; 2]) -> Result<CompositeObservable> {
    if !h.is_positive() {
        return Err(Error::Unsupported(format!("h must be positive, got {h}")));
    }
    let half = h / Rational::from_integer(2.into());
    Ok(CompositeObservable::Sum {
        f: [&half * a.value(0) * a.value(0), &half * a.value(1) * a.value(1)],
        g: [&half * &potential[0], &half * &potential[1]],
    })
}

pub fn hamiltonian(
    a: &DichotomousVariable,
    b: &DichotomousVariable,
    transition: &TransitionMatrix,
    h: &Rational,
    potential: &[Rational; 2],
) -> Result<HermitianOperator> {
    hamiltonian_observable(a, h, potential)?.quantize(a, b, transition)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispersionFreeReport {
    /// Events on which every random variable has zero dispersion.
    pub dispersion_free_contexts: Vec<Event>,
    /// Events on which both `a` and `b` have zero dispersion.
    pub jointly_free_for_pair: Vec<Event>,
    /// Dispersion-free events that belong to the extended family.
    pub representable_subset: Vec<Event>,
}

fn in_extended_family(space: &FiniteProbabilitySpace, a: &DichotomousVariable, b: &DichotomousVariable, c: &Event) -> bool {
    if c == a.cell(0) || c == a.cell(1) {
        return true;
    }
    is_context(space, c, a.partition())
        && is_trigonometric_context(space, a.partition(), b.partition(), c).unwrap_or(false)
}

/// Exhaustive search for dispersion-free events. An event is dispersion-free
/// for all variables iff every point indicator is, since the indicators span
/// all random variables and `D(ξ|C) = 0` means `ξ` is constant on `C`.
pub fn dispersion_free_search(
    space: &FiniteProbabilitySpace,
    a: &DichotomousVariable,
    b: &DichotomousVariable,
) -> Result<DispersionFreeReport> {
    let indicators: Vec<RandomVariable> = (0..space.len())
        .map(|p| RandomVariable::indicator(space, &space.atom(p)))
        .collect();
    let a_var = CompositeObservable::OfA(a.values().clone()).realize(a, b);
    let b_var = CompositeObservable::OfB(b.values().clone()).realize(a, b);
    let mut report = DispersionFreeReport {
        dispersion_free_contexts: Vec::new(),
        jointly_free_for_pair: Vec::new(),
        representable_subset: Vec::new(),
    };
    for c in enumerate_events(space)? {
        if c.is_empty() {
            continue;
        }
        if dispersion(space, &a_var, &c)?.is_zero() && dispersion(space, &b_var, &c)?.is_zero() {
            report.jointly_free_for_pair.push(c.clone());
        }
        let mut free = true;
        for xi in &indicators {
            if !dispersion(space, xi, &c)?.is_zero() {
                free = false;
                break;
            }
        }
        if free {
            if in_extended_family(space, a, b, &c) {
                report.representable_subset.push(c.clone());
            }
            report.dispersion_free_contexts.push(c);
        }
    }
    Ok(report)
}

/// `P(B_j | C)` for both outcomes, as floats.
pub fn b_law(space: &FiniteProbabilitySpace, b: &DichotomousVariable, c: &Event) -> Result<[f64; 2]> {
    Ok([to_f64(&conditional(space, b.cell(0), c)?), to_f64(&conditional(space, b.cell(1), c)?)])
}
