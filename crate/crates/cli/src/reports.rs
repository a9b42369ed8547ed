//! Report builders for the individual subcommands.

use contextual_core::hilbert_map::{
    born_in_a_basis_check, born_in_b_basis_error, delta_constancy_check, image_set, nonsensitive_contexts,
    HilbertRepresentation, SignConvention, TransitionMatrix,
};
use contextual_core::model_io::{
    analyze, float_json, format_float, matrix_json, rational_json, state_json, sweep, Model,
};
use contextual_core::operator_rep::{
    a_operator, b_operator, classical_mean, commutator, dispersion_free_search, distribution_mismatch, quantum_mean,
    Alignment, CompositeObservable, HermitianOperator,
};
use contextual_core::prob_core::{format_rational, rational_to_f64, variables_incompatible};
use contextual_core::{DichotomousVariable, Error, Event, FiniteProbabilitySpace, Rational, Result};
use serde_json::{json, Value};

/// A report in both output shapes.
#[derive(Debug, Clone)]
pub struct Report {
    pub json: Value,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Report {
    fn new(json: Value, header: &[&str], rows: Vec<Vec<String>>) -> Self {
        Self {
            json,
            header: header.iter().map(|s| s.to_string()).collect(),
            rows,
        }
    }
}

pub(crate) fn variables<'m>(model: &'m Model, vars: &[String; 2]) -> Result<(&'m DichotomousVariable, &'m DichotomousVariable)> {
    Ok((model.variable(&vars[0])?, model.variable(&vars[1])?))
}

fn labels(space: &FiniteProbabilitySpace, events: &[Event]) -> Vec<String> {
    events.iter().map(|e| space.label(e)).collect()
}

fn transition_json(t: &TransitionMatrix) -> Value {
    json!(t.entries.iter().map(|row| row.iter().map(format_rational).collect::<Vec<_>>()).collect::<Vec<_>>())
}

fn spectrum_json(op: &HermitianOperator) -> Value {
    let spec = op.spectral();
    json!({
        "eigenvalues": spec.eigenvalues.iter().map(|&k| format_float(k)).collect::<Vec<_>>(),
        "eigenvectors": spec.eigenvectors.iter().map(state_json).collect::<Vec<_>>(),
        "degenerate": spec.degenerate,
    })
}

fn header_fields(model: &Model, vars: &[String; 2]) -> Value {
    json!({"model": model.spec.to_json(), "variables": vars})
}

fn with_header(model: &Model, vars: &[String; 2], body: Value) -> Value {
    let mut value = header_fields(model, vars);
    if let (Value::Object(top), Value::Object(extra)) = (&mut value, body) {
        top.extend(extra);
    }
    value
}

pub fn analyze_report(model: &Model, vars: &[String; 2]) -> Result<Report> {
    let (a, _) = variables(model, vars)?;
    let contexts = model.contexts_for(a)?;
    let bundle = analyze(model, &vars[0], &vars[1], &contexts)?;
    let (header, rows) = bundle.to_csv_rows(model)?;
    Ok(Report::new(bundle.to_json(model)?, &header, rows))
}

pub fn represent_report(model: &Model, vars: &[String; 2], reference: &Event) -> Result<Report> {
    let (a, b) = variables(model, vars)?;
    let space = &model.space;
    let signs = SignConvention::default();
    let rep = HilbertRepresentation::with_reference(space, a, b, signs, reference)?;
    let members = rep.domain_within(&model.contexts_for(a)?)?;

    let mut states = Vec::with_capacity(members.len());
    let mut rows = Vec::with_capacity(members.len());
    for c in &members {
        let state = rep.state(c)?;
        let kind = if rep.cell_index(c).is_some() { "cell" } else { "context" };
        states.push(json!({"context": space.label(c), "kind": kind, "state": state_json(&state)}));
        let [x, y] = state.components;
        rows.push(vec![
            space.label(c),
            kind.to_string(),
            format_float(x.re),
            format_float(x.im),
            format_float(y.re),
            format_float(y.im),
        ]);
    }

    let image = image_set(&rep, &members)?;
    let classes: Vec<Value> = image
        .classes
        .iter()
        .map(|k| json!({"contexts": labels(space, &k.contexts), "state": state_json(&k.state)}))
        .collect();
    let collisions: Vec<Vec<String>> = image.collisions().iter().map(|g| labels(space, g)).collect();

    let delta = if rep.is_double_stochastic() {
        let d = delta_constancy_check(space, a, b, signs.eps(0), signs.eps(1))?;
        json!({
            "constant": d.constant,
            "equals_pi": d.equals_pi,
            "values": d.rows.iter().map(|r| json!({"context": r.context, "delta": format_float(r.delta)})).collect::<Vec<_>>(),
        })
    } else {
        Value::Null
    };

    let born_a = born_in_a_basis_check(&rep, &members)?;
    let mut born_b = 0.0f64;
    for c in &members {
        if rep.cell_index(c).is_none() {
            born_b = born_b.max(born_in_b_basis_error(&rep, c)?);
        }
    }

    let basis = rep.basis();
    let phase = basis.stripped_phase;
    let body = json!({
        "signs": [signs.eps(0), signs.eps(1)],
        "transition": {
            "b_given_a": transition_json(rep.transition()),
            "a_given_b": transition_json(&TransitionMatrix::between(space, b, a)?),
            "double_stochastic": rep.is_double_stochastic(),
        },
        "basis": {
            "reference": space.label(&basis.reference),
            "e_a": basis.e_a.iter().map(state_json).collect::<Vec<_>>(),
            "e_b": [state_json(&basis.e_b(0)), state_json(&basis.e_b(1))],
            "stripped_phase": [format_float(phase.re), format_float(phase.im)],
            "orthonormal": basis.orthonormal,
        },
        "states": states,
        "image": {
            "members": members.len(),
            "distinct_states": image.distinct_states(),
            "classes": classes,
            "collisions": collisions,
        },
        "nonsensitive_contexts": labels(space, &nonsensitive_contexts(space, a, b)?),
        "phase_difference": delta,
        "born": {
            "a_basis_max_error": format_float(born_a.max_error),
            "a_basis_passed": born_a.passed,
            "b_basis_max_error": format_float(born_b),
        },
    });
    Ok(Report::new(
        with_header(model, vars, body),
        &["context", "kind", "re_1", "im_1", "re_2", "im_2"],
        rows,
    ))
}

/// Off-diagonal entries of `[b̂, â]` and the closed form `(a_1 − a_2)(b_2 − b_1) q_1 q_2`.
pub(crate) fn commutator_entries(
    a: &DichotomousVariable,
    b: &DichotomousVariable,
    transition: &TransitionMatrix,
) -> Result<(contextual_core::operator_rep::Matrix2, f64)> {
    let m = commutator(b_operator(b).matrix(), a_operator(a, transition)?.matrix());
    let f = rational_to_f64;
    let q1q2 = (f(transition.get(0, 0)) * f(transition.get(0, 1))).sqrt();
    let expected = (f(a.value(0)) - f(a.value(1))) * (f(b.value(1)) - f(b.value(0))) * q1q2;
    Ok((m, expected))
}

pub fn operators_report(model: &Model, vars: &[String; 2]) -> Result<Report> {
    let (a, b) = variables(model, vars)?;
    let space = &model.space;
    let rep = HilbertRepresentation::new(space, a, b, SignConvention::default())?;
    let a_op = a_operator(a, rep.transition())?;
    let b_op = b_operator(b);
    let sum = CompositeObservable::a_plus_b(a, b).quantize(a, b, rep.transition())?;
    let (m, expected) = commutator_entries(a, b, rep.transition())?;

    let a_var = CompositeObservable::OfA(a.values().clone()).realize(a, b);
    let b_var = CompositeObservable::OfB(b.values().clone()).realize(a, b);
    let mut means = Vec::new();
    let mut rows = Vec::new();
    for c in rep.domain_within(&model.contexts_for(a)?)? {
        let state = rep.state(&c)?;
        let mut entry = serde_json::Map::new();
        entry.insert("context".into(), json!(space.label(&c)));
        for (name, op, xi) in [(&vars[0], &a_op, &a_var), (&vars[1], &b_op, &b_var)] {
            let classical = classical_mean(space, xi, &c)?;
            let quantum = quantum_mean(op, &state);
            entry.insert(
                name.clone(),
                json!({"classical": rational_json(&classical), "quantum": float_json(quantum)}),
            );
            rows.push(vec![space.label(&c), name.clone(), format_rational(&classical), format_float(quantum)]);
        }
        means.push(Value::Object(entry));
    }

    let body = json!({
        "a_operator": matrix_json(a_op.matrix()),
        "b_operator": matrix_json(b_op.matrix()),
        "commutator": {
            "matrix": matrix_json(&m),
            "m12": float_json(m.get(0, 1).re),
            "m21": float_json(m.get(1, 0).re),
            "closed_form_m21": float_json(expected),
        },
        "spectra": {
            "a": spectrum_json(&a_op),
            "b": spectrum_json(&b_op),
            "a_plus_b": spectrum_json(&sum),
        },
        "means": means,
    });
    Ok(Report::new(
        with_header(model, vars, body),
        &["context", "variable", "classical", "quantum"],
        rows,
    ))
}

pub fn compare_report(model: &Model, vars: &[String; 2], context: Option<Event>, align: bool) -> Result<Report> {
    let (a, b) = variables(model, vars)?;
    let space = &model.space;
    let rep = HilbertRepresentation::new(space, a, b, SignConvention::default())?;
    let targets = match context {
        Some(c) => {
            if !rep.in_domain(&c)? {
                return Err(Error::NotTrigonometric);
            }
            vec![c]
        }
        None => rep.trigonometric_contexts_within(&model.contexts_for(a)?)?,
    };
    let d = CompositeObservable::a_plus_b(a, b);
    let mut entries = Vec::new();
    let mut rows = Vec::new();
    for c in &targets {
        let raw = distribution_mismatch(&rep, &d, c, None)?;
        let alignment = if align {
            Alignment::support_to_spectrum(&raw.classical, &raw.quantum)
        } else {
            None
        };
        let report = distribution_mismatch(&rep, &d, c, alignment)?;
        let label = space.label(c);
        let classical: Vec<Value> = report
            .classical
            .iter()
            .map(|(v, p)| json!({"value": rational_json(v), "probability": rational_json(p)}))
            .collect();
        let quantum: Vec<Value> = report
            .quantum
            .entries
            .iter()
            .map(|(k, p)| json!({"value": float_json(*k), "probability": float_json(*p)}))
            .collect();
        for (v, p) in &report.classical {
            rows.push(vec![label.clone(), "classical".into(), format_rational(v), format_rational(p)]);
        }
        for (k, p) in &report.quantum.entries {
            rows.push(vec![label.clone(), "quantum".into(), format_float(*k), format_float(*p)]);
        }
        entries.push(json!({
            "context": label,
            "classical": classical,
            "quantum": quantum,
            "degenerate_spectrum": report.quantum.degenerate,
            "alignment": report.alignment.map(|al| json!({"scale": float_json(al.scale), "shift": float_json(al.shift)})),
            "total_variation": float_json(report.total_variation),
        }));
    }
    let body = json!({"observable": format!("{} + {}", vars[0], vars[1]), "comparisons": entries});
    Ok(Report::new(
        with_header(model, vars, body),
        &["context", "source", "value", "probability"],
        rows,
    ))
}

pub fn sweep_report(grid: &[Rational]) -> Result<Report> {
    let result = sweep(grid)?;
    let mut rows = Vec::new();
    let entries: Vec<Value> = result
        .rows
        .iter()
        .map(|r| {
            rows.push(vec![
                format_rational(&r.q),
                format_float(r.theta_c123[0]),
                format_float(r.theta_c123[1]),
                r.distinct_states.to_string(),
                format_float(r.distribution_gap),
            ]);
            json!({
                "q": rational_json(&r.q),
                "theta_w1w2w3": [float_json(r.theta_c123[0]), float_json(r.theta_c123[1])],
                "distinct_states": r.distinct_states,
                "collisions": r.collisions,
                "distribution_gap": float_json(r.distribution_gap),
            })
        })
        .collect();
    Ok(Report::new(
        json!({"rows": entries, "theta_increasing": result.theta_increasing}),
        &["q", "theta_b1", "theta_b2", "distinct_states", "distribution_gap"],
        rows,
    ))
}

pub fn dispersion_report(model: &Model, vars: &[String; 2]) -> Result<Report> {
    let (a, b) = variables(model, vars)?;
    let space = &model.space;
    let found = dispersion_free_search(space, a, b)?;
    let mut rows = Vec::new();
    for (set, events) in [
        ("dispersion_free", &found.dispersion_free_contexts),
        ("jointly_free_for_pair", &found.jointly_free_for_pair),
        ("representable", &found.representable_subset),
    ] {
        for e in events.iter() {
            rows.push(vec![set.to_string(), space.label(e)]);
        }
    }
    let body = json!({
        "incompatible": variables_incompatible(space, a, b),
        "dispersion_free_contexts": labels(space, &found.dispersion_free_contexts),
        "jointly_free_for_pair": labels(space, &found.jointly_free_for_pair),
        "representable_subset": labels(space, &found.representable_subset),
    });
    Ok(Report::new(with_header(model, vars, body), &["set", "context"], rows))
}
