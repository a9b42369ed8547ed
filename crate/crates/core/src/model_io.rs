//! Model documents, the `K(q)` family, parameter sweeps, random model
//! generators and deterministic report serialization.
//!
//! A model is a JSON document
//!
//! ```json
//! {
//!   "points": [{"id": "w1", "weight": "1/8"}, ...],
//!   "variables": {"a": {"values": ["1", "-1"], "assignment": {"w1": 1, ...}}, ...},
//!   "contexts": [["w1", "w2"], ...]
//! }
//! ```
//!
//! Weights and values are rational literals (`"p/q"` or decimals); `contexts`
//! is optional.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::hilbert_map::{image_set, HilbertRepresentation, SignConvention, StateVector};
use crate::interference::{analyze_context, class_of_reports, disturbance_sum, ContextClass, DisturbanceReport, Phase};
use crate::operator_rep::{distribution_mismatch, Alignment, CompositeObservable, Matrix2};
use crate::prob_core::{
    enumerate_contexts, format_rational, parse_rational, DichotomousVariable, Event, FiniteProbabilitySpace, Rational,
};

/// Largest space analysed by exhaustive context enumeration when the model
/// lists no contexts.
pub const DEFAULT_ENUMERATION_LIMIT: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableSpec {
    pub values: [Rational; 2],
    /// Point id → cell number (1 or 2).
    pub assignment: BTreeMap<String, i64>,
}

/// The document form of a model, before validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelSpec {
    pub points: Vec<(String, Rational)>,
    pub variables: BTreeMap<String, VariableSpec>,
    pub contexts: Option<Vec<Vec<String>>>,
}

fn malformed(msg: impl Into<String>) -> Error {
    Error::MalformedDocument(msg.into())
}

fn rational_field(value: &Value, what: &str) -> Result<Rational> {
    match value {
        Value::String(s) => parse_rational(s),
        Value::Number(n) => parse_rational(&n.to_string()),
        _ => Err(malformed(format!("{what} must be a rational literal"))),
    }
}

impl ModelSpec {
    pub fn from_json(doc: &Value) -> Result<Self> {
        let top = doc.as_object().ok_or_else(|| malformed("top level must be an object"))?;
        if let Some(key) = top.keys().find(|k| !matches!(k.as_str(), "points" | "variables" | "contexts")) {
            return Err(malformed(format!("unknown key `{key}`")));
        }

        let raw_points = top
            .get("points")
            .and_then(Value::as_array)
            .ok_or_else(|| malformed("`points` must be an array"))?;
        let mut points = Vec::with_capacity(raw_points.len());
        for (n, p) in raw_points.iter().enumerate() {
            let id = p
                .get("id")
                .and_then(Value::as_str)
                .ok_or_else(|| malformed(format!("point {} needs a string `id`", n + 1)))?;
            let weight = p
                .get("weight")
                .ok_or_else(|| malformed(format!("point `{id}` needs a `weight`")))?;
            points.push((id.to_string(), rational_field(weight, "weight")?));
        }

        let raw_vars = top
            .get("variables")
            .and_then(Value::as_object)
            .ok_or_else(|| malformed("`variables` must be an object"))?;
        let mut variables = BTreeMap::new();
        for (name, v) in raw_vars {
            let values = v
                .get("values")
                .and_then(Value::as_array)
                .filter(|vs| vs.len() == 2)
                .ok_or_else(|| malformed(format!("variable `{name}` needs `values` with two entries")))?;
            let assignment_obj = v
                .get("assignment")
                .and_then(Value::as_object)
                .ok_or_else(|| malformed(format!("variable `{name}` needs an `assignment` object")))?;
            let mut assignment = BTreeMap::new();
            for (id, k) in assignment_obj {
                let k = k
                    .as_i64()
                    .ok_or_else(|| malformed(format!("variable `{name}`: assignment of `{id}` must be an integer")))?;
                assignment.insert(id.clone(), k);
            }
            variables.insert(
                name.clone(),
                VariableSpec {
                    values: [rational_field(&values[0], "value")?, rational_field(&values[1], "value")?],
                    assignment,
                },
            );
        }

        let contexts = match top.get("contexts") {
            None => None,
            Some(Value::Array(list)) => {
                let mut out = Vec::with_capacity(list.len());
                for c in list {
                    let ids = c
                        .as_array()
                        .and_then(|ids| ids.iter().map(|x| x.as_str().map(str::to_string)).collect::<Option<Vec<_>>>())
                        .ok_or_else(|| malformed("each context must be an array of point ids"))?;
                    out.push(ids);
                }
                Some(out)
            }
            Some(_) => return Err(malformed("`contexts` must be an array")),
        };

        Ok(Self {
            points,
            variables,
            contexts,
        })
    }

    /// Canonical JSON value; keys are sorted by the map type.
    pub fn to_json(&self) -> Value {
        let points: Vec<Value> = self
            .points
            .iter()
            .map(|(id, w)| json!({"id": id, "weight": format_rational(w)}))
            .collect();
        let variables: Map<String, Value> = self
            .variables
            .iter()
            .map(|(name, v)| {
                let assignment: Map<String, Value> = v.assignment.iter().map(|(id, k)| (id.clone(), json!(k))).collect();
                (
                    name.clone(),
                    json!({
                        "values": [format_rational(&v.values[0]), format_rational(&v.values[1])],
                        "assignment": assignment,
                    }),
                )
            })
            .collect();
        let mut top = Map::new();
        top.insert("points".into(), Value::Array(points));
        top.insert("variables".into(), Value::Object(variables));
        if let Some(contexts) = &self.contexts {
            top.insert("contexts".into(), json!(contexts));
        }
        Value::Object(top)
    }

    pub fn to_canonical_string(&self) -> String {
        to_canonical_string(&self.to_json())
    }
}

/// A validated model: the space, its named variables and optional listed contexts.
#[derive(Debug, Clone)]
pub struct Model {
    pub spec: ModelSpec,
    pub space: FiniteProbabilitySpace,
    variables: BTreeMap<String, DichotomousVariable>,
    pub contexts: Option<Vec<Event>>,
}

impl Model {
    pub fn from_spec(spec: ModelSpec) -> Result<Self> {
        let space = FiniteProbabilitySpace::new(spec.points.iter().map(|(id, w)| (id.as_str(), w.clone())))?;
        let mut variables = BTreeMap::new();
        for (name, v) in &spec.variables {
            if let Some(id) = v.assignment.keys().find(|id| space.point_index(id).is_err()) {
                return Err(Error::ForeignPoint(id.clone()));
            }
            let mut assignment = Vec::with_capacity(space.len());
            for id in space.ids() {
                let k = *v.assignment.get(id).ok_or_else(|| Error::PartialAssignment {
                    variable: name.clone(),
                    point: id.clone(),
                })?;
                if k != 1 && k != 2 {
                    return Err(Error::BadAssignmentIndex {
                        variable: name.clone(),
                        point: id.clone(),
                        index: k,
                    });
                }
                assignment.push((k - 1) as u8);
            }
            variables.insert(
                name.clone(),
                DichotomousVariable::new(&space, name.clone(), v.values.clone(), assignment)?,
            );
        }
        let contexts = match &spec.contexts {
            None => None,
            Some(list) => Some(list.iter().map(|ids| space.event(ids)).collect::<Result<Vec<_>>>()?),
        };
        Ok(Self {
            spec,
            space,
            variables,
            contexts,
        })
    }

    pub fn variable(&self, name: &str) -> Result<&DichotomousVariable> {
        self.variables.get(name).ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn variable_names(&self) -> impl Iterator<Item = &str> {
        self.variables.keys().map(String::as_str)
    }

    /// Contexts of `a` to analyse: the listed ones, or every context when the
    /// space is small enough to enumerate.
    pub fn contexts_for(&self, a: &DichotomousVariable) -> Result<Vec<Event>> {
        match &self.contexts {
            Some(list) => Ok(list.clone()),
            None if self.space.len() <= DEFAULT_ENUMERATION_LIMIT => enumerate_contexts(&self.space, a.partition()),
            None => Err(Error::TooManyPoints {
                points: self.space.len(),
                cap: DEFAULT_ENUMERATION_LIMIT,
            }),
        }
    }

    pub fn to_canonical_string(&self) -> String {
        self.spec.to_canonical_string()
    }
}

/// Parses and validates a model document.
pub fn parse_model(text: &str) -> Result<Model> {
    let doc: Value = serde_json::from_str(text).map_err(|e| malformed(e.to_string()))?;
    Model::from_spec(ModelSpec::from_json(&doc)?)
}

/// Builds a model from weighted points and per-point cell indices (0 or 1)
/// of two variables named `a` and `b`.
pub fn two_variable_model(
    points: &[(String, Rational)],
    a: ([Rational; 2], &[u8]),
    b: ([Rational; 2], &[u8]),
) -> Result<Model> {
    let var = |(values, cells): ([Rational; 2], &[u8])| VariableSpec {
        values,
        assignment: points
            .iter()
            .zip(cells)
            .map(|((id, _), &k)| (id.clone(), i64::from(k) + 1))
            .collect(),
    };
    Model::from_spec(ModelSpec {
        points: points.to_vec(),
        variables: [("a".to_string(), var(a)), ("b".to_string(), var(b))].into_iter().collect(),
        contexts: None,
    })
}

fn unit_values() -> [Rational; 2] {
    [Rational::one(), -Rational::one()]
}

/// The four-point space with weights `q, (1−2q)/2, q, (1−2q)/2`,
/// `A_1 = {w1, w2}`, `B_1 = {w1, w4}` and both variables valued `±1`.
pub fn kq_model(q: &Rational) -> Result<Model> {
    let half = Rational::new(1.into(), 2.into());
    if !q.is_positive() || *q >= half {
        return Err(Error::QOutOfRange(format_rational(q)));
    }
    let rest = (Rational::one() - q * Rational::from_integer(2.into())) / Rational::from_integer(2.into());
    let points: Vec<(String, Rational)> = [q.clone(), rest.clone(), q.clone(), rest]
        .into_iter()
        .enumerate()
        .map(|(i, w)| (format!("w{}", i + 1), w))
        .collect();
    two_variable_model(&points, (unit_values(), &[0, 0, 1, 1]), (unit_values(), &[0, 1, 1, 0]))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub q: Rational,
    /// Phases of `{w1, w2, w3}` for both outcomes of `b`.
    pub theta_c123: [f64; 2],
    pub distinct_states: usize,
    pub collisions: Vec<Vec<String>>,
    /// Total variation between the classical law of `a + b` on `{w2, w3, w4}`
    /// and the spectral law of `â + b̂`, after mapping support onto spectrum.
    pub distribution_gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// `θ_{C123}(b_2)` strictly increases along the grid (sorted by `q`).
    pub theta_increasing: bool,
}

pub fn sweep(q_list: &[Rational]) -> Result<SweepResult> {
    let mut rows = Vec::with_capacity(q_list.len());
    for q in q_list {
        let model = kq_model(q)?;
        let (space, a, b) = (&model.space, model.variable("a")?, model.variable("b")?);
        let rep = HilbertRepresentation::new(space, a, b, SignConvention::default())?;
        let c123 = space.event(&["w1", "w2", "w3"])?;
        let reports = analyze_context(space, a.partition(), b.partition(), &c123)?;
        let image = image_set(&rep, &rep.domain()?)?;
        let c234 = space.event(&["w2", "w3", "w4"])?;
        let d = CompositeObservable::a_plus_b(a, b);
        let raw = distribution_mismatch(&rep, &d, &c234, None)?;
        let alignment = Alignment::support_to_spectrum(&raw.classical, &raw.quantum);
        let gap = distribution_mismatch(&rep, &d, &c234, alignment)?.total_variation;
        rows.push(SweepRow {
            q: q.clone(),
            theta_c123: [reports[0].phase.theta(), reports[1].phase.theta()],
            distinct_states: image.distinct_states(),
            collisions: image
                .collisions()
                .iter()
                .map(|group| group.iter().map(|e| space.label(e)).collect())
                .collect(),
            distribution_gap: gap,
        });
    }
    let mut by_q: Vec<&SweepRow> = rows.iter().collect();
    by_q.sort_by(|x, y| x.q.cmp(&y.q));
    let theta_increasing = by_q.windows(2).all(|w| w[0].theta_c123[1] < w[1].theta_c123[1]);
    Ok(SweepResult { rows, theta_increasing })
}

/// A rational drawn uniformly from `{1/den, …, (den−1)/den}`.
fn random_fraction<R: Rng + ?Sized>(rng: &mut R, den: i64) -> Rational {
    Rational::new(rng.gen_range(1..den).into(), den.into())
}

/// Splits `mass` into `parts` positive random rationals.
fn split_mass<R: Rng + ?Sized>(rng: &mut R, mass: &Rational, parts: usize) -> Vec<Rational> {
    let shares: Vec<i64> = (0..parts).map(|_| rng.gen_range(1..=6)).collect();
    let total: i64 = shares.iter().sum();
    shares
        .iter()
        .map(|&s| mass * Rational::new(s.into(), total.into()))
        .collect()
}

/// Spreads the four cell masses `(A_i ∩ B_j)` over `n ≥ 4` shuffled points.
fn model_from_cell_masses<R: Rng + ?Sized>(rng: &mut R, masses: [[Rational; 2]; 2], n: usize) -> Result<Model> {
    let mut counts = [[1usize; 2]; 2];
    for _ in 4..n {
        counts[rng.gen_range(0..2)][rng.gen_range(0..2)] += 1;
    }
    let mut cells: Vec<(u8, u8, Rational)> = Vec::with_capacity(n);
    for i in 0..2 {
        for j in 0..2 {
            for w in split_mass(rng, &masses[i][j], counts[i][j]) {
                cells.push((i as u8, j as u8, w));
            }
        }
    }
    cells.shuffle(rng);
    let points: Vec<(String, Rational)> = cells
        .iter()
        .enumerate()
        .map(|(k, (_, _, w))| (format!("w{}", k + 1), w.clone()))
        .collect();
    let a_cells: Vec<u8> = cells.iter().map(|c| c.0).collect();
    let b_cells: Vec<u8> = cells.iter().map(|c| c.1).collect();
    let values = |rng: &mut R| {
        let v1 = rng.gen_range(-4i64..=4);
        let v2 = loop {
            let v = rng.gen_range(-4i64..=4);
            if v != v1 {
                break v;
            }
        };
        [Rational::from_integer(v1.into()), Rational::from_integer(v2.into())]
    };
    let (av, bv) = (values(rng), values(rng));
    two_variable_model(&points, (av, &a_cells), (bv, &b_cells))
}

/// A random model with `n` points (at least four) and an incompatible pair
/// `a`, `b` with arbitrary transition probabilities.
pub fn random_incompatible_model<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<Model> {
    let raw: Vec<i64> = (0..4).map(|_| rng.gen_range(1..=12)).collect();
    let total: i64 = raw.iter().sum();
    let m = |k: usize| Rational::new(raw[k].into(), total.into());
    model_from_cell_masses(rng, [[m(0), m(1)], [m(2), m(3)]], n.max(4))
}

/// How the marginal `P(A_1)` of a double stochastic random model is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Marginal {
    Uniform,
    Random,
}

/// A random model whose transition matrix `P^{b/a}` is double stochastic:
/// cell masses `αp, α(1−p), (1−α)p, (1−α)(1−p)` with `A_2 ∩ B_2` carrying
/// `(1−α)p`.
pub fn random_double_stochastic_model<R: Rng + ?Sized>(rng: &mut R, n: usize, marginal: Marginal) -> Result<Model> {
    let alpha = match marginal {
        Marginal::Uniform => Rational::new(1.into(), 2.into()),
        Marginal::Random => {
            let den = rng.gen_range(2..=12);
            random_fraction(rng, den)
        }
    };
    let den = rng.gen_range(2..=12);
    let p = random_fraction(rng, den);
    let one = Rational::one();
    let masses = [
        [&alpha * &p, &alpha * (&one - &p)],
        [(&one - &alpha) * (&one - &p), (&one - &alpha) * &p],
    ];
    model_from_cell_masses(rng, masses, n.max(4))
}

/// Renders a float with 17 significant digits; negative zero prints as zero.
pub fn format_float(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

pub fn float_json(x: f64) -> Value {
    Value::String(format_float(x))
}

pub fn rational_json(r: &Rational) -> Value {
    Value::String(format_rational(r))
}

/// `[[re, im], [re, im]]`
pub fn state_json(v: &StateVector) -> Value {
    Value::Array(
        v.components
            .iter()
            .map(|z| json!([format_float(z.re), format_float(z.im)]))
            .collect(),
    )
}

/// 2×2 array of `[re, im]` pairs.
pub fn matrix_json(m: &Matrix2) -> Value {
    Value::Array(
        m.m.iter()
            .map(|row| Value::Array(row.iter().map(|z| json!([format_float(z.re), format_float(z.im)])).collect()))
            .collect(),
    )
}

/// Pretty JSON with sorted keys, LF line ends and a trailing newline.
pub fn to_canonical_string(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON values always serialize");
    s.push('\n');
    s
}

fn class_name(class: ContextClass) -> &'static str {
    match class {
        ContextClass::Trigonometric => "trigonometric",
        ContextClass::Boundary => "boundary",
        ContextClass::Hyperbolic => "hyperbolic",
        ContextClass::Mixed => "mixed",
    }
}

fn phase_json(phase: &Phase) -> Value {
    match phase {
        Phase::Trigonometric { theta } => json!({"kind": "trigonometric", "theta": format_float(*theta)}),
        Phase::Hyperbolic { theta, sign } => {
            json!({"kind": "hyperbolic", "theta": format_float(*theta), "sign": sign})
        }
    }
}

pub fn disturbance_json(space: &FiniteProbabilitySpace, b: &DichotomousVariable, r: &DisturbanceReport) -> Value {
    let pairwise: Map<String, Value> = r
        .pairwise_deltas
        .iter()
        .map(|((n, m), d)| (format!("{},{}", n + 1, m + 1), rational_json(d)))
        .collect();
    json!({
        "context": space.label(&r.context),
        "outcome": format_rational(b.value(r.outcome)),
        "delta": rational_json(&r.delta),
        "pairwise_deltas": pairwise,
        "lambda": {
            "squared": rational_json(&r.lambda.squared),
            "sign": r.lambda.sign,
            "value": format_float(r.lambda.value),
        },
        "classification": class_name(match r.classification {
            crate::interference::Classification::Trigonometric => ContextClass::Trigonometric,
            crate::interference::Classification::Boundary => ContextClass::Boundary,
            crate::interference::Classification::Hyperbolic => ContextClass::Hyperbolic,
        }),
        "phase": phase_json(&r.phase),
        "probability": rational_json(&r.probability),
        "reconstructed": format_float(r.reconstructed),
    })
}

/// Per-context disturbance analysis of `a` against `b`.
#[derive(Debug, Clone)]
pub struct AnalysisBundle {
    pub model: Value,
    pub variables: [String; 2],
    pub entries: Vec<AnalysisEntry>,
}

#[derive(Debug, Clone)]
pub struct AnalysisEntry {
    pub context: Event,
    pub label: String,
    pub reports: Vec<DisturbanceReport>,
    pub class: ContextClass,
    pub state: Option<StateVector>,
    pub disturbance_sum_zero: bool,
    pub reconstruction_error: f64,
}

/// Analyses every listed context; events that are not contexts of `a` are
/// rejected with `NotAContext`.
pub fn analyze(model: &Model, a_name: &str, b_name: &str, contexts: &[Event]) -> Result<AnalysisBundle> {
    let (space, a, b) = (&model.space, model.variable(a_name)?, model.variable(b_name)?);
    let mut entries = Vec::with_capacity(contexts.len());
    for c in contexts {
        let reports = analyze_context(space, a.partition(), b.partition(), c)?;
        let class = class_of_reports(&reports);
        let state = if reports.iter().all(|r| r.lambda.is_trigonometric()) {
            Some(crate::hilbert_map::amplitude(space, a, b, c, SignConvention::default())?)
        } else {
            None
        };
        let reconstruction_error = reports
            .iter()
            .map(|r| (r.reconstructed - crate::hilbert_map::to_f64(&r.probability)).abs())
            .fold(0.0, f64::max);
        entries.push(AnalysisEntry {
            context: c.clone(),
            label: space.label(c),
            class,
            state,
            disturbance_sum_zero: disturbance_sum(space, a.partition(), b.partition(), c)?.is_zero(),
            reconstruction_error,
            reports,
        });
    }
    Ok(AnalysisBundle {
        model: model.spec.to_json(),
        variables: [a_name.to_string(), b_name.to_string()],
        entries,
    })
}

impl AnalysisBundle {
    pub fn to_json(&self, model: &Model) -> Result<Value> {
        let b = model.variable(&self.variables[1])?;
        let analyses: Vec<Value> = self
            .entries
            .iter()
            .map(|e| {
                json!({
                    "context": e.label,
                    "class": class_name(e.class),
                    "per_outcome": e.reports.iter().map(|r| disturbance_json(&model.space, b, r)).collect::<Vec<_>>(),
                    "state": e.state.as_ref().map(state_json),
                    "checks": {
                        "disturbance_sum_zero": e.disturbance_sum_zero,
                        "reconstruction_error": format_float(e.reconstruction_error),
                    },
                })
            })
            .collect();
        Ok(json!({
            "model": self.model,
            "variables": self.variables,
            "analyses": analyses,
        }))
    }

    /// One row per `(context, outcome)`.
    pub fn to_csv_rows(&self, model: &Model) -> Result<(Vec<&'static str>, Vec<Vec<String>>)> {
        let b = model.variable(&self.variables[1])?;
        let header = vec![
            "context",
            "outcome",
            "class",
            "delta",
            "lambda_squared",
            "lambda_sign",
            "lambda",
            "classification",
            "phase_kind",
            "theta",
            "probability",
            "reconstructed",
        ];
        let mut rows = Vec::new();
        for e in &self.entries {
            for r in &e.reports {
                let (kind, theta) = match r.phase {
                    Phase::Trigonometric { theta } => ("trigonometric", theta),
                    Phase::Hyperbolic { theta, .. } => ("hyperbolic", theta),
                };
                rows.push(vec![
                    e.label.clone(),
                    format_rational(b.value(r.outcome)),
                    class_name(e.class).to_string(),
                    format_rational(&r.delta),
                    format_rational(&r.lambda.squared),
                    r.lambda.sign.to_string(),
                    format_float(r.lambda.value),
                    format!("{:?}", r.classification).to_lowercase(),
                    kind.to_string(),
                    format_float(theta),
                    format_rational(&r.probability),
                    format_float(r.reconstructed),
                ]);
            }
        }
        Ok((header, rows))
    }
}
