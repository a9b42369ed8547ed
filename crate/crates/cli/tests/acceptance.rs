//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use contextual_core::hilbert_map::{
    amplitude, born_in_a_basis_check, born_in_b_basis_error, delta_constancy_check, marginal_symmetry_check,
    nonsensitive_contexts, opposite_disturbance_holds, HilbertRepresentation, SignConvention, StateVector,
};
use contextual_core::interference::{delta, disturbance_sum, lambda, phase};
use contextual_core::model_io::{kq_model, parse_model, random_double_stochastic_model, random_incompatible_model, Marginal, Model};
use contextual_core::operator_rep::{
    a_operator, b_operator, commutator, dispersion_free_search, distribution_mismatch, sum_observable_mean_check,
    Alignment, CompositeObservable,
};
use contextual_core::prob_core::{parse_rational, set_system_compatibility_report};
use contextual_core::{Event, Rational};
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

const QS: [&str; 3] = ["1/8", "1/4", "3/8"];
const RANDOM_MODELS: usize = 500;

fn r(s: &str) -> Rational {
    parse_rational(s).unwrap()
}

fn f(x: &Rational) -> f64 {
    x.to_f64().unwrap()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(x: f64, y: f64, tol: f64, what: &str) -> Result<(), String> {
    ensure((x - y).abs() <= tol, || format!("{what}: {x} vs {y}"))
}

fn kq(q: &str) -> Model {
    kq_model(&r(q)).unwrap()
}

fn ab(model: &Model) -> (&contextual_core::DichotomousVariable, &contextual_core::DichotomousVariable) {
    (model.variable("a").unwrap(), model.variable("b").unwrap())
}

fn ev(model: &Model, ids: &[&str]) -> Event {
    model.space.event(ids).unwrap()
}

/// Random models with 4 to 10 points: one third general incompatible pairs,
/// two thirds with double stochastic transitions (half of those with uniform marginals).
fn random_models(seed: u64) -> Vec<(Model, bool)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..RANDOM_MODELS)
        .map(|k| {
            let n = rng.gen_range(4..=10);
            match k % 3 {
                0 => (random_incompatible_model(&mut rng, n).unwrap(), false),
                1 => (random_double_stochastic_model(&mut rng, n, Marginal::Random).unwrap(), true),
                _ => (random_double_stochastic_model(&mut rng, n, Marginal::Uniform).unwrap(), true),
            }
        })
        .collect()
}

fn closed_forms() -> Outcome {
    for qs in QS {
        let model = kq(qs);
        let (a, b) = ab(&model);
        let space = &model.space;
        let q = f(&r(qs));
        let qr = r(qs);
        let one = r("1");
        let two = r("2");

        let c123 = ev(&model, &["w1", "w2", "w3"]);
        let expected_delta = &two * &qr * (&two * &qr - &one) / (&two * &qr + &one);
        let got = delta(space, b.cell(0), a.partition(), &c123).unwrap();
        ensure(got == expected_delta, || format!("q={qs}: delta(B1|C123) = {got}, expected {expected_delta}"))?;

        let l123 = lambda(space, b.cell(0), a.partition(), &c123, 0, 1).unwrap();
        close(l123.value, -(1.0 - 2.0 * q).sqrt() / 2.0, 1e-12, "lambda(B1|C123)")?;
        close(phase(&l123).theta(), (-(1.0 - 2.0 * q).sqrt() / 2.0).acos(), 1e-12, "theta(B1|C123)")?;
        let l123_b2 = lambda(space, b.cell(1), a.partition(), &c123, 0, 1).unwrap();
        close(phase(&l123_b2).theta(), ((1.0 - 2.0 * q).sqrt() / 2.0).acos(), 1e-12, "theta(B2|C123)")?;

        let c124 = ev(&model, &["w1", "w2", "w4"]);
        let l124 = lambda(space, b.cell(0), a.partition(), &c124, 0, 1).unwrap();
        close(l124.value, (q / 2.0).sqrt(), 1e-12, "lambda(B1|C124)")?;

        let signs = SignConvention::default();
        let c24 = ev(&model, &["w2", "w4"]);
        let phi = amplitude(space, a, b, &c24, signs).unwrap();
        let h = ((1.0 - 2.0 * q) / 2.0).sqrt();
        let expected = StateVector::new(Complex64::new(q.sqrt(), -h), Complex64::new(h, q.sqrt()));
        ensure(phi.approx_eq(&expected, 1e-12), || format!("q={qs}: phi(C24) = {phi}, expected {expected}"))?;

        let rep = HilbertRepresentation::new(space, a, b, signs).unwrap();
        for j in 0..2 {
            let state = rep.state(b.cell(j)).unwrap();
            ensure(state.approx_eq(&StateVector::canonical(j), 1e-12), || format!("q={qs}: J(B{}) = {state}", j + 1))?;
        }
        let e1 = StateVector::real((2.0 * q).sqrt(), (1.0 - 2.0 * q).sqrt());
        let e2 = StateVector::real(-(1.0 - 2.0 * q).sqrt(), (2.0 * q).sqrt());
        for (i, e) in [e1, e2].iter().enumerate() {
            let state = rep.state(a.cell(i)).unwrap();
            ensure(state.approx_eq(e, 1e-12), || format!("q={qs}: J(A{}) = {state}", i + 1))?;
        }

        let mut expected_nonsensitive = vec![space.full_event(), c24.clone(), ev(&model, &["w1", "w3"])];
        expected_nonsensitive.sort();
        let found = nonsensitive_contexts(space, a, b).unwrap();
        ensure(found == expected_nonsensitive, || format!("q={qs}: nonsensitive contexts {found:?}"))?;
    }
    Ok("delta, lambda, theta, phi(C24), J(B_i), J(A_i), nonsensitive set at q = 1/8, 1/4, 3/8".into())
}

fn disturbances_cancel(models: &[(Model, bool)]) -> Outcome {
    let mut contexts = 0usize;
    for (model, _) in models {
        let (a, b) = ab(model);
        for c in model.contexts_for(a).unwrap() {
            let sum = disturbance_sum(&model.space, a.partition(), b.partition(), &c).unwrap();
            ensure(sum.is_zero(), || format!("sum of disturbances {sum} on {}", model.space.label(&c)))?;
            contexts += 1;
        }
    }
    Ok(format!("{} models, {contexts} contexts, all sums exactly zero", models.len()))
}

fn opposite_disturbance(models: &[(Model, bool)]) -> Outcome {
    let mut contexts = 0usize;
    let mut worst = 0.0f64;
    for (model, ds) in models {
        let (a, b) = ab(model);
        for c in model.contexts_for(a).unwrap() {
            ensure(opposite_disturbance_holds(&model.space, a, b, &c).unwrap(), || {
                format!("opposite-disturbance identity fails on {}", model.space.label(&c))
            })?;
            contexts += 1;
            if *ds {
                let l1 = lambda(&model.space, b.cell(0), a.partition(), &c, 0, 1).unwrap();
                let l2 = lambda(&model.space, b.cell(1), a.partition(), &c, 0, 1).unwrap();
                if l1.is_trigonometric() && l2.is_trigonometric() {
                    let gap = (phase(&l1).theta().cos() + phase(&l2).theta().cos()).abs();
                    worst = worst.max(gap);
                }
            }
        }
    }
    ensure(worst <= 1e-12, || format!("cos theta(b1) + cos theta(b2) reaches {worst}"))?;
    Ok(format!("{contexts} contexts exact; double stochastic max |cos θ1 + cos θ2| = {worst:.1e}"))
}

fn born_rule(models: &[(Model, bool)], witness: &Path) -> Outcome {
    let mut double_stochastic: Vec<&Model> = models.iter().filter(|(_, ds)| *ds).map(|(m, _)| m).collect();
    let kqs: Vec<Model> = QS.iter().map(|q| kq(q)).collect();
    double_stochastic.extend(kqs.iter());
    let mut worst_a = 0.0f64;
    let mut worst_b = 0.0f64;
    let mut checked = 0usize;
    for model in &double_stochastic {
        let (a, b) = ab(model);
        let rep = HilbertRepresentation::new(&model.space, a, b, SignConvention::default()).unwrap();
        let members = rep.domain().unwrap();
        worst_a = worst_a.max(born_in_a_basis_check(&rep, &members).unwrap().max_error);
        for c in rep.trigonometric_contexts_within(&members).unwrap() {
            worst_b = worst_b.max(born_in_b_basis_error(&rep, &c).unwrap());
            checked += 1;
        }
    }
    ensure(worst_a <= 1e-12 && worst_b <= 1e-12, || {
        format!("Born rule error: a-basis {worst_a}, b-basis {worst_b}")
    })?;

    let text = std::fs::read_to_string(witness).map_err(|e| format!("{}: {e}", witness.display()))?;
    let model = parse_model(&text).map_err(|e| e.to_string())?;
    let (a, b) = ab(&model);
    let rep = HilbertRepresentation::new(&model.space, a, b, SignConvention::default()).map_err(|e| e.to_string())?;
    ensure(!rep.is_double_stochastic(), || "witness is double stochastic".into())?;
    let report = born_in_a_basis_check(&rep, &rep.domain().unwrap()).unwrap();
    ensure(report.max_error > 1e-3, || format!("witness a-basis error only {}", report.max_error))?;
    Ok(format!(
        "{} double stochastic models, {checked} contexts, max error a {worst_a:.1e} b {worst_b:.1e}; witness a-basis error {:.3e}",
        double_stochastic.len(),
        report.max_error
    ))
}

fn phase_difference(models: &[(Model, bool)]) -> Outcome {
    let mut contexts = 0usize;
    let kqs: Vec<Model> = QS.iter().map(|q| kq(q)).collect();
    let all = models.iter().filter(|(_, ds)| *ds).map(|(m, _)| m).chain(kqs.iter());
    for model in all {
        let (a, b) = ab(model);
        for (e1, e2) in [(-1, 1), (1, -1)] {
            let report = delta_constancy_check(&model.space, a, b, e1, e2).unwrap();
            ensure(report.constant && report.equals_pi, || {
                format!("phase difference not π with signs ({e1}, {e2}): {:?}", report.violation)
            })?;
            contexts += report.rows.len();
        }
    }
    let model = kq("1/8");
    let (a, b) = ab(&model);
    let report = delta_constancy_check(&model.space, a, b, 1, 1).unwrap();
    let (c1, c2) = report.violation.ok_or("equal signs produced no violation")?;
    Ok(format!("{contexts} context evaluations equal π; equal signs split {c1} and {c2}"))
}

fn noncommutativity() -> Outcome {
    let mut details = Vec::new();
    for qs in QS {
        let model = kq(qs);
        let (a, b) = ab(&model);
        let rep = HilbertRepresentation::new(&model.space, a, b, SignConvention::default()).unwrap();
        let t = rep.transition();
        let m = commutator(b_operator(b).matrix(), a_operator(a, t).unwrap().matrix());
        let q1q2 = (f(t.get(0, 0)) * f(t.get(0, 1))).sqrt();
        let closed = (f(a.value(0)) - f(a.value(1))) * (f(b.value(1)) - f(b.value(0))) * q1q2;
        ensure((m.get(1, 0) - closed).norm() <= 1e-12, || format!("q={qs}: m21 {} vs {closed}", m.get(1, 0)))?;
        ensure((m.get(0, 1) + closed).norm() <= 1e-12, || format!("q={qs}: m12 {}", m.get(0, 1)))?;
        ensure(m.get(0, 0).norm() <= 1e-12 && m.get(1, 1).norm() <= 1e-12, || format!("q={qs}: nonzero diagonal"))?;
        ensure(closed.abs() > 0.1, || format!("q={qs}: commutator vanishes"))?;
        details.push(format!("q={qs} m21={closed:.6}"));
    }
    Ok(details.join(", "))
}

fn mean_preservation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let random = |rng: &mut ChaCha8Rng| {
        let den: i64 = rng.gen_range(1..=8);
        Rational::new(rng.gen_range(-10 * den..=10 * den).into(), den.into())
    };
    let mut worst = 0.0f64;
    let mut evaluations = 0usize;
    for qs in QS {
        let model = kq(qs);
        let (a, b) = ab(&model);
        let rep = HilbertRepresentation::new(&model.space, a, b, SignConvention::default()).unwrap();
        let members = rep.domain().unwrap();
        for _ in 0..100 {
            let fv = [random(&mut rng), random(&mut rng)];
            let gv = [random(&mut rng), random(&mut rng)];
            let report = sum_observable_mean_check(&rep, &fv, &gv, &members).unwrap();
            worst = worst.max(report.max_error);
            evaluations += report.rows.len();
        }
    }
    ensure(worst <= 1e-10, || format!("mean error {worst}"))?;
    Ok(format!("{evaluations} (f, g, C) evaluations, max error {worst:.1e}"))
}

fn distribution_witness() -> Outcome {
    let model = kq("1/8");
    let (a, b) = ab(&model);
    let q: f64 = 0.125;
    let rep = HilbertRepresentation::new(&model.space, a, b, SignConvention::default()).unwrap();
    let c234 = ev(&model, &["w2", "w3", "w4"]);
    let d = CompositeObservable::a_plus_b(a, b);
    let raw = distribution_mismatch(&rep, &d, &c234, None).unwrap();
    let expected: Vec<(Rational, Rational)> = vec![(r("-2"), r("1/7")), (r("0"), r("6/7")), (r("2"), r("0"))];
    let got: Vec<(Rational, Rational)> = raw.classical.clone().into_iter().collect();
    ensure(got == expected, || format!("classical law {got:?}"))?;

    let s = (2.0 * q).sqrt();
    let p_plus = (1.0 - s) * (2.0 + s) / (4.0 * (1.0 - q));
    let p_minus = (1.0 + s) * (2.0 - s) / (4.0 * (1.0 - q));
    let entries = &raw.quantum.entries;
    ensure(entries.len() == 2, || "degenerate spectrum".into())?;
    close(entries[0].0, -2.0 * s, 1e-12, "lower eigenvalue")?;
    close(entries[1].0, 2.0 * s, 1e-12, "upper eigenvalue")?;
    close(entries[1].1, p_plus, 1e-12, "probability of +2√(2q)γ")?;
    close(entries[0].1, p_minus, 1e-12, "probability of −2√(2q)γ")?;

    let support = Alignment::support_to_spectrum(&raw.classical, &raw.quantum).ok_or("no alignment")?;
    let aligned = distribution_mismatch(&rep, &d, &c234, Some(support)).unwrap().total_variation;
    let literal = Alignment {
        scale: 2.0 * s,
        shift: -1.0,
    };
    let literal_gap = distribution_mismatch(&rep, &d, &c234, Some(literal)).unwrap().total_variation;
    ensure(aligned > 0.1 && literal_gap > 0.1, || format!("gaps {aligned}, {literal_gap}"))?;
    Ok(format!(
        "classical {{-2: 1/7, 0: 6/7, 2: 0}}, spectral ({p_minus:.6}, {p_plus:.6}); total variation {aligned:.4} (support onto spectrum), {literal_gap:.4} (d ↦ 2√(2q)d − γ)"
    ))
}

fn marginal_symmetry() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut uniform = 0usize;
    let mut skewed = 0usize;
    for k in 0..RANDOM_MODELS {
        let n = rng.gen_range(4..=10);
        let marginal = if k % 2 == 0 { Marginal::Uniform } else { Marginal::Random };
        let model = random_double_stochastic_model(&mut rng, n, marginal).unwrap();
        let (a, b) = ab(&model);
        let report = marginal_symmetry_check(&model.space, a, b).unwrap();
        ensure(report.holds, || format!("equivalence fails: {report:?}"))?;
        if report.reverse_double_stochastic {
            ensure(report.unit_lambdas == Some(true), || "unit coefficients fail".into())?;
            uniform += 1;
        } else {
            skewed += 1;
        }
    }
    ensure(uniform > 0 && skewed > 0, || format!("only one branch exercised ({uniform}/{skewed})"))?;
    Ok(format!("{uniform} models with all four conditions, {skewed} with none"))
}

fn dispersion_free() -> Outcome {
    for qs in QS {
        let model = kq(qs);
        let (a, b) = ab(&model);
        let report = dispersion_free_search(&model.space, a, b).unwrap();
        let atoms: Vec<Event> = (0..4).map(|p| model.space.atom(p)).collect();
        ensure(report.dispersion_free_contexts == atoms, || format!("q={qs}: {:?}", report.dispersion_free_contexts))?;
        ensure(report.representable_subset.is_empty(), || format!("q={qs}: atom in family"))?;
    }
    Ok("dispersion-free events are the four atoms, none representable".into())
}

fn two_cell_partitions(n: usize) -> Vec<[Event; 2]> {
    let full = (1u64 << n) - 1;
    let cell = |mask: u64| Event::from_indices((0..n).filter(|p| mask >> p & 1 == 1));
    // the first cell contains point 0, which fixes the cell order
    (1..full)
        .filter(|mask| mask & 1 == 1)
        .map(|mask| [cell(mask), cell(full & !mask)])
        .collect()
}

fn set_systems(witness: &Path) -> Outcome {
    let mut pairs = 0usize;
    for n in 2..=6 {
        let partitions = two_cell_partitions(n);
        for x in &partitions {
            for y in &partitions {
                let report = set_system_compatibility_report(x, y);
                ensure(report.nonempty_intersections == report.no_inclusions, || {
                    format!("n={n}: {x:?} vs {y:?} gives {report:?}")
                })?;
                pairs += 1;
            }
        }
    }
    let text = std::fs::read_to_string(witness).map_err(|e| format!("{}: {e}", witness.display()))?;
    let doc: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let family = |key: &str| -> Vec<Event> {
        doc[key]
            .as_array()
            .unwrap()
            .iter()
            .map(|cell| Event::from_indices(cell.as_array().unwrap().iter().map(|p| p.as_u64().unwrap() as usize - 1)))
            .collect()
    };
    let report = set_system_compatibility_report(&family("a"), &family("b"));
    ensure(report.no_inclusions && !report.nonempty_intersections, || format!("witness gives {report:?}"))?;
    Ok(format!("{pairs} partition pairs on up to 6 points agree; 7-point witness has no inclusions but an empty intersection"))
}

fn determinism() -> Outcome {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_contextual"))
            .args(["verify", "--kq", "1/4"])
            .env_remove("CONTEXTUAL_SEED")
            .output()
            .map_err(|e| e.to_string())
    };
    let first = run()?;
    let second = run()?;
    ensure(first.status.code() == Some(0), || format!("exit status {:?}", first.status.code()))?;
    ensure(second.status.code() == Some(0), || format!("exit status {:?}", second.status.code()))?;
    ensure(first.stdout == second.stdout, || "reports differ".into())?;
    ensure(!first.stdout.is_empty(), || "empty report".into())?;
    Ok(format!("two runs, {} identical bytes, exit 0", first.stdout.len()))
}

fn main() -> ExitCode {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("data");
    let models = random_models(1);
    let criteria: Vec<Criterion> = vec![
        ("K(q) closed forms", Box::new(closed_forms)),
        ("disturbances cancel", Box::new(|| disturbances_cancel(&models))),
        ("opposite disturbance coefficients", Box::new(|| opposite_disturbance(&models))),
        ("Born rule in both bases", Box::new(|| born_rule(&models, &data.join("non_double_stochastic.json")))),
        ("phase difference constant", Box::new(|| phase_difference(&models))),
        ("noncommutativity", Box::new(noncommutativity)),
        ("mean preservation for f(a) + g(b)", Box::new(mean_preservation)),
        ("distribution mismatch for a + b", Box::new(distribution_witness)),
        ("marginal symmetry equivalences", Box::new(marginal_symmetry)),
        ("dispersion-free events", Box::new(dispersion_free)),
        ("intersection vs inclusion conditions", Box::new(|| set_systems(&data.join("seven_point_partitions.json")))),
        ("deterministic verify", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (n, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let ms = start.elapsed().as_millis();
        match result {
            Ok(detail) => println!("PASS {:>2} {name} ({ms} ms): {detail}", n + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({ms} ms): {why}", n + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
