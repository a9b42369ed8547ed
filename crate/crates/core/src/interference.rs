//! Statistical disturbance in the contextual formula of total probability.
//!
//! For a context `C` of a partition `{A_n}` and an outcome event `B`,
//!
//! ```text
//! P(B|C) = Σ_n P(A_n|C) P(B|A_n) + δ(B|A,C)
//! δ(B|A,C) = Σ_n P(A_n|C) (P(B|A_n C) − P(B|A_n))
//! ```
//!
//! The perturbation `δ` splits into pair terms `δ_nm`, each normalized to a
//! coefficient `λ_nm`. The coefficient is kept as an exact `λ²` plus a sign,
//! so the trigonometric/hyperbolic boundary `|λ| = 1` is decided exactly.

use std::collections::BTreeMap;

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::prob_core::{conditional, is_context, Event, FiniteProbabilitySpace, Partition, Rational};

/// Kind of a single interference coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Classification {
    Trigonometric,
    Boundary,
    Hyperbolic,
}

/// Kind of a whole context, across all outcomes of `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ContextClass {
    Trigonometric,
    Boundary,
    Hyperbolic,
    Mixed,
}

/// An interference coefficient in exact `(λ², sign)` form plus its float value.
#[derive(Debug, Clone, PartialEq)]
pub struct Lambda {
    pub squared: Rational,
    pub sign: i8,
    pub value: f64,
}

impl Lambda {
    fn from_delta(delta: &Rational, product: &Rational) -> Self {
        let four = Rational::from_integer(4.into());
        let squared = delta * delta / (four * product);
        let sign = if delta.is_positive() {
            1
        } else if delta.is_negative() {
            -1
        } else {
            0
        };
        let magnitude = if squared.is_one() {
            1.0
        } else {
            squared.to_f64().unwrap_or(f64::NAN).sqrt()
        };
        Self {
            squared,
            sign,
            value: sign as f64 * magnitude,
        }
    }

    pub fn classification(&self) -> Classification {
        let one = Rational::one();
        if self.squared < one {
            Classification::Trigonometric
        } else if self.squared == one {
            Classification::Boundary
        } else {
            Classification::Hyperbolic
        }
    }

    /// `|λ| ≤ 1`, decided exactly.
    pub fn is_trigonometric(&self) -> bool {
        self.squared <= Rational::one()
    }
}

/// Relative phase attached to a coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Phase {
    /// `λ = cos θ`, `θ ∈ [0, π]`.
    Trigonometric { theta: f64 },
    /// `λ = sign · cosh θ`, `θ ≥ 0`.
    Hyperbolic { theta: f64, sign: i8 },
}

impl Phase {
    pub fn theta(&self) -> f64 {
        match *self {
            Phase::Trigonometric { theta } | Phase::Hyperbolic { theta, .. } => theta,
        }
    }
}

pub fn phase(lambda: &Lambda) -> Phase {
    if lambda.is_trigonometric() {
        Phase::Trigonometric {
            theta: lambda.value.clamp(-1.0, 1.0).acos(),
        }
    } else {
        Phase::Hyperbolic {
            theta: lambda.value.abs().acosh(),
            sign: lambda.sign,
        }
    }
}

/// Exact ingredients shared by every quantity of one `(B, C)` pair.
struct Terms {
    /// `P(A_n | C)`
    cell_given_context: Vec<Rational>,
    /// `P(B | A_n)`
    outcome_given_cell: Vec<Rational>,
    /// `P(B | A_n C)`
    outcome_given_both: Vec<Rational>,
}

impl Terms {
    fn new(space: &FiniteProbabilitySpace, b: &Event, partition: &Partition, c: &Event) -> Result<Self> {
        if !is_context(space, c, partition) {
            return Err(Error::NotAContext);
        }
        let mut terms = Terms {
            cell_given_context: Vec::with_capacity(partition.len()),
            outcome_given_cell: Vec::with_capacity(partition.len()),
            outcome_given_both: Vec::with_capacity(partition.len()),
        };
        for cell in partition.cells() {
            terms.cell_given_context.push(conditional(space, cell, c)?);
            terms.outcome_given_cell.push(conditional(space, b, cell)?);
            terms
                .outcome_given_both
                .push(conditional(space, b, &cell.intersect(c))?);
        }
        Ok(terms)
    }

    fn cell_term(&self, n: usize) -> Rational {
        &self.cell_given_context[n] * (&self.outcome_given_both[n] - &self.outcome_given_cell[n])
    }

    fn delta(&self) -> Rational {
        (0..self.cell_given_context.len()).map(|n| self.cell_term(n)).sum()
    }

    fn pairwise(&self, n: usize, m: usize) -> Result<Rational> {
        let k = self.cell_given_context.len();
        if n == m || n >= k || m >= k {
            return Err(Error::CellIndex);
        }
        let divisor = Rational::from_integer((k as i64 - 1).into());
        Ok((self.cell_term(n) + self.cell_term(m)) / divisor)
    }

    fn radical_product(&self, n: usize, m: usize) -> Rational {
        &self.cell_given_context[n]
            * &self.outcome_given_cell[n]
            * &self.cell_given_context[m]
            * &self.outcome_given_cell[m]
    }

    fn lambda(&self, n: usize, m: usize) -> Result<Lambda> {
        let delta = self.pairwise(n, m)?;
        let product = self.radical_product(n, m);
        if product.is_zero() {
            return Err(Error::DegenerateRadical);
        }
        Ok(Lambda::from_delta(&delta, &product))
    }

    fn classical(&self) -> Rational {
        self.cell_given_context
            .iter()
            .zip(&self.outcome_given_cell)
            .map(|(p, q)| p * q)
            .sum()
    }

    fn pairs(&self) -> impl Iterator<Item = (usize, usize)> {
        let k = self.cell_given_context.len();
        (0..k).flat_map(move |n| (n + 1..k).map(move |m| (n, m)))
    }
}

/// Total perturbation term `δ(B|A,C)`.
pub fn delta(space: &FiniteProbabilitySpace, b_outcome: &Event, partition: &Partition, c: &Event) -> Result<Rational> {
    Ok(Terms::new(space, b_outcome, partition, c)?.delta())
}

/// Pair term `δ_nm`, shared equally between the `k − 1` pairs each cell joins.
pub fn pairwise_delta(
    space: &FiniteProbabilitySpace,
    b_outcome: &Event,
    partition: &Partition,
    c: &Event,
    n: usize,
    m: usize,
) -> Result<Rational> {
    Terms::new(space, b_outcome, partition, c)?.pairwise(n, m)
}

/// Coefficient of statistical disturbance `λ_nm`.
pub fn lambda(
    space: &FiniteProbabilitySpace,
    b_outcome: &Event,
    partition: &Partition,
    c: &Event,
    n: usize,
    m: usize,
) -> Result<Lambda> {
    Terms::new(space, b_outcome, partition, c)?.lambda(n, m)
}

/// Evaluates the interference formula (with `cos θ` or `± cosh θ` per pair)
/// as a float. On every valid context this reproduces `P(B|C)`.
pub fn reconstruct_total_probability(
    space: &FiniteProbabilitySpace,
    b_outcome: &Event,
    partition: &Partition,
    c: &Event,
) -> Result<f64> {
    let terms = Terms::new(space, b_outcome, partition, c)?;
    let mut total = terms.classical().to_f64().unwrap_or(f64::NAN);
    for (n, m) in terms.pairs() {
        let lambda = terms.lambda(n, m)?;
        let radical = terms.radical_product(n, m).to_f64().unwrap_or(f64::NAN).sqrt();
        let interference = match phase(&lambda) {
            Phase::Trigonometric { theta } => theta.cos(),
            Phase::Hyperbolic { theta, sign } => sign as f64 * theta.cosh(),
        };
        total += 2.0 * interference * radical;
    }
    Ok(total)
}

/// `Σ_k δ(B_k|A,C)`, which vanishes exactly on every context.
pub fn disturbance_sum(
    space: &FiniteProbabilitySpace,
    partition_a: &Partition,
    partition_b: &Partition,
    c: &Event,
) -> Result<Rational> {
    partition_b
        .cells()
        .iter()
        .map(|b| delta(space, b, partition_a, c))
        .sum()
}

/// `Σ_k Σ_{l<m} λ_lm(B_k) √(P(A_l|C)P(A_m|C)P(B_k|A_l)P(B_k|A_m))`, zero up to
/// rounding.
pub fn interference_radical_sum(
    space: &FiniteProbabilitySpace,
    partition_a: &Partition,
    partition_b: &Partition,
    c: &Event,
) -> Result<f64> {
    let mut total = 0.0;
    for b in partition_b.cells() {
        let terms = Terms::new(space, b, partition_a, c)?;
        for (l, m) in terms.pairs() {
            let lambda = terms.lambda(l, m)?;
            total += lambda.value * terms.radical_product(l, m).to_f64().unwrap_or(f64::NAN).sqrt();
        }
    }
    Ok(total)
}

/// Per-outcome disturbance analysis of one context against a dichotomous `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct DisturbanceReport {
    pub context: Event,
    /// Index of the `b` cell (0 or 1).
    pub outcome: usize,
    pub delta: Rational,
    pub pairwise_deltas: BTreeMap<(usize, usize), Rational>,
    pub lambda: Lambda,
    pub classification: Classification,
    pub phase: Phase,
    /// `P(B|C)` computed directly.
    pub probability: Rational,
    /// Interference-formula value of `P(B|C)`.
    pub reconstructed: f64,
}

pub fn disturbance_report(
    space: &FiniteProbabilitySpace,
    partition_a: &Partition,
    partition_b: &Partition,
    outcome: usize,
    c: &Event,
) -> Result<DisturbanceReport> {
    if partition_a.len() != 2 {
        return Err(Error::NotDichotomous(partition_a.len()));
    }
    let b = partition_b.cell(outcome)?;
    let terms = Terms::new(space, b, partition_a, c)?;
    let delta = terms.delta();
    let mut pairwise_deltas = BTreeMap::new();
    for (n, m) in terms.pairs() {
        pairwise_deltas.insert((n, m), terms.pairwise(n, m)?);
    }
    let lambda = terms.lambda(0, 1)?;
    let phase = phase(&lambda);
    Ok(DisturbanceReport {
        context: c.clone(),
        outcome,
        delta,
        pairwise_deltas,
        classification: lambda.classification(),
        lambda,
        phase,
        probability: conditional(space, b, c)?,
        reconstructed: reconstruct_total_probability(space, b, partition_a, c)?,
    })
}

/// Reports for every outcome of `b`.
pub fn analyze_context(
    space: &FiniteProbabilitySpace,
    partition_a: &Partition,
    partition_b: &Partition,
    c: &Event,
) -> Result<Vec<DisturbanceReport>> {
    (0..partition_b.len())
        .map(|k| disturbance_report(space, partition_a, partition_b, k, c))
        .collect()
}

pub fn class_of_reports(reports: &[DisturbanceReport]) -> ContextClass {
    let all = |k: Classification| reports.iter().all(|r| r.classification == k);
    if all(Classification::Trigonometric) {
        ContextClass::Trigonometric
    } else if all(Classification::Hyperbolic) {
        ContextClass::Hyperbolic
    } else if reports.iter().any(|r| r.classification == Classification::Boundary) {
        ContextClass::Boundary
    } else {
        ContextClass::Mixed
    }
}

/// Classifies a context of the dichotomous partition `partition_a` over all
/// outcomes of `partition_b`.
pub fn classify(
    space: &FiniteProbabilitySpace,
    partition_a: &Partition,
    partition_b: &Partition,
    c: &Event,
) -> Result<ContextClass> {
    if partition_a.len() != 2 {
        return Err(Error::NotDichotomous(partition_a.len()));
    }
    let mut kinds = Vec::with_capacity(partition_b.len());
    for b in partition_b.cells() {
        kinds.push(Terms::new(space, b, partition_a, c)?.lambda(0, 1)?.classification());
    }
    let all = |k: Classification| kinds.iter().all(|&x| x == k);
    Ok(if all(Classification::Trigonometric) {
        ContextClass::Trigonometric
    } else if all(Classification::Hyperbolic) {
        ContextClass::Hyperbolic
    } else if kinds.contains(&Classification::Boundary) {
        ContextClass::Boundary
    } else {
        ContextClass::Mixed
    })
}

/// Membership in the trigonometric family: `|λ(B_j|A,C)| ≤ 1` for every `j`.
pub fn is_trigonometric_context(
    space: &FiniteProbabilitySpace,
    partition_a: &Partition,
    partition_b: &Partition,
    c: &Event,
) -> Result<bool> {
    if partition_a.len() != 2 {
        return Err(Error::NotDichotomous(partition_a.len()));
    }
    for b in partition_b.cells() {
        if !Terms::new(space, b, partition_a, c)?.lambda(0, 1)?.is_trigonometric() {
            return Ok(false);
        }
    }
    Ok(true)
}
