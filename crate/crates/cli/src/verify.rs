//! The `verify` suite: every structural check that applies to a model.
//!
//! Checks whose preconditions fail (compatible variables, a transition matrix
//! that is not double stochastic) are reported as skipped, not failed.

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use contextual_core::hilbert_map::{
    born_in_a_basis_check, born_in_b_basis_error, delta_constancy_check, marginal_symmetry_check,
    opposite_disturbance_holds, HilbertRepresentation, SignConvention,
};
use contextual_core::interference::{disturbance_sum, lambda, reconstruct_total_probability};
use contextual_core::model_io::{
    format_float, random_double_stochastic_model, random_incompatible_model, Marginal, Model,
};
use contextual_core::operator_rep::{
    dispersion_free_search, hamiltonian_observable, mean_preservation_check, observable_distribution,
    CompositeObservable,
};
use contextual_core::prob_core::{conditional, rational_to_f64, variables_incompatible};
use contextual_core::{Event, Rational, Result};

use crate::reports::{commutator_entries, variables, Report};

const TOLERANCE: f64 = 1e-12;
const RECONSTRUCTION_TOLERANCE: f64 = 1e-10;
const RANDOM_OBSERVABLES: usize = 20;
const RANDOM_MODELS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Pass,
    Fail,
    Skipped,
}

impl Status {
    fn name(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped => "skipped",
        }
    }
}

struct Check {
    name: &'static str,
    status: Status,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> (Status, String) {
    (if ok { Status::Pass } else { Status::Fail }, detail.into())
}

fn skipped(reason: &str) -> (Status, String) {
    (Status::Skipped, reason.to_string())
}

fn random_rational(rng: &mut ChaCha8Rng) -> Rational {
    let den: i64 = rng.gen_range(1..=6);
    let num: i64 = rng.gen_range(-5 * den..=5 * den);
    Rational::new(num.into(), den.into())
}

fn random_pair(rng: &mut ChaCha8Rng) -> [Rational; 2] {
    [random_rational(rng), random_rational(rng)]
}

struct Suite<'m> {
    model: &'m Model,
    a: &'m contextual_core::DichotomousVariable,
    b: &'m contextual_core::DichotomousVariable,
    contexts: Vec<Event>,
    rep: Option<HilbertRepresentation<'m>>,
    incompatible: bool,
    seed: u64,
}

impl<'m> Suite<'m> {
    fn double_stochastic(&self) -> Option<&HilbertRepresentation<'m>> {
        self.rep.as_ref().filter(|r| r.is_double_stochastic())
    }

    fn members(&self) -> Result<Vec<Event>> {
        match &self.rep {
            Some(rep) => rep.domain_within(&self.contexts),
            None => Ok(Vec::new()),
        }
    }

    fn disturbance_sum(&self) -> Result<(Status, String)> {
        if !self.incompatible {
            return Ok(skipped("variables are compatible"));
        }
        let space = &self.model.space;
        let mut bad = Vec::new();
        for c in &self.contexts {
            if !disturbance_sum(space, self.a.partition(), self.b.partition(), c)?.is_zero() {
                bad.push(space.label(c));
            }
        }
        Ok(outcome(bad.is_empty(), format!("{} contexts, failing: {:?}", self.contexts.len(), bad)))
    }

    fn reconstruction(&self) -> Result<(Status, String)> {
        if !self.incompatible {
            return Ok(skipped("variables are compatible"));
        }
        let space = &self.model.space;
        let mut worst = 0.0f64;
        for c in &self.contexts {
            for cell in self.b.partition().cells() {
                let direct = rational_to_f64(&conditional(space, cell, c)?);
                let formula = reconstruct_total_probability(space, cell, self.a.partition(), c)?;
                worst = worst.max((direct - formula).abs());
            }
        }
        Ok(outcome(worst <= RECONSTRUCTION_TOLERANCE, format!("max error {}", format_float(worst))))
    }

    fn opposite_disturbance(&self) -> Result<(Status, String)> {
        if !self.incompatible {
            return Ok(skipped("variables are compatible"));
        }
        let mut ok = true;
        for c in &self.contexts {
            ok &= opposite_disturbance_holds(&self.model.space, self.a, self.b, c)?;
        }
        Ok(outcome(ok, format!("{} contexts", self.contexts.len())))
    }

    fn born_b(&self) -> Result<(Status, String)> {
        let Some(rep) = &self.rep else {
            return Ok(skipped("no representation"));
        };
        let mut worst = 0.0f64;
        for c in rep.trigonometric_contexts_within(&self.contexts)? {
            worst = worst.max(born_in_b_basis_error(rep, &c)?);
        }
        Ok(outcome(worst <= TOLERANCE, format!("max error {}", format_float(worst))))
    }

    fn born_a(&self) -> Result<(Status, String)> {
        let Some(rep) = self.double_stochastic() else {
            return Ok(skipped("transition matrix is not double stochastic"));
        };
        let report = born_in_a_basis_check(rep, &self.members()?)?;
        Ok(outcome(report.passed, format!("max error {}", format_float(report.max_error))))
    }

    fn phase_difference(&self) -> Result<(Status, String)> {
        if self.double_stochastic().is_none() {
            return Ok(skipped("transition matrix is not double stochastic"));
        }
        let signs = SignConvention::default();
        let report = delta_constancy_check(&self.model.space, self.a, self.b, signs.eps(0), signs.eps(1))?;
        Ok(outcome(
            report.constant && report.equals_pi,
            format!("{} trigonometric contexts", report.rows.len()),
        ))
    }

    fn opposite_cosines(&self) -> Result<(Status, String)> {
        let Some(rep) = self.double_stochastic() else {
            return Ok(skipped("transition matrix is not double stochastic"));
        };
        let space = &self.model.space;
        let mut worst = 0.0f64;
        for c in rep.trigonometric_contexts_within(&self.contexts)? {
            let l1 = lambda(space, self.b.cell(0), self.a.partition(), &c, 0, 1)?;
            let l2 = lambda(space, self.b.cell(1), self.a.partition(), &c, 0, 1)?;
            worst = worst.max((l1.value + l2.value).abs());
        }
        Ok(outcome(worst <= TOLERANCE, format!("max |cos θ1 + cos θ2| {}", format_float(worst))))
    }

    fn marginal_symmetry(&self) -> Result<(Status, String)> {
        if self.double_stochastic().is_none() {
            return Ok(skipped("transition matrix is not double stochastic"));
        }
        let r = marginal_symmetry_check(&self.model.space, self.a, self.b)?;
        Ok(outcome(
            r.holds,
            format!(
                "b cells trigonometric {}, reverse double stochastic {}, symmetric {}, uniform {}",
                r.b_cells_trigonometric, r.reverse_double_stochastic, r.symmetric, r.uniform
            ),
        ))
    }

    fn commutator(&self) -> Result<(Status, String)> {
        let Some(rep) = self.double_stochastic() else {
            return Ok(skipped("transition matrix is not double stochastic"));
        };
        let (m, expected) = commutator_entries(self.a, self.b, rep.transition())?;
        let diagonal = m.get(0, 0).norm().max(m.get(1, 1).norm());
        let error = (m.get(1, 0) - expected).norm().max((m.get(0, 1) + expected).norm());
        Ok(outcome(
            diagonal <= TOLERANCE && error <= TOLERANCE && expected != 0.0,
            format!("m21 {}", format_float(m.get(1, 0).re)),
        ))
    }

    fn mean_preservation(&self) -> Result<(Status, String)> {
        let Some(rep) = self.double_stochastic() else {
            return Ok(skipped("transition matrix is not double stochastic"));
        };
        let members = self.members()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let square = |r: &Rational| r * r;
        let mut observables = vec![
            CompositeObservable::a_plus_b(self.a, self.b),
            CompositeObservable::sum_with(self.a, self.b, square, square),
        ];
        for _ in 0..RANDOM_OBSERVABLES {
            observables.push(CompositeObservable::Sum {
                f: random_pair(&mut rng),
                g: random_pair(&mut rng),
            });
        }
        let mut worst = 0.0f64;
        for obs in &observables {
            worst = worst.max(mean_preservation_check(rep, obs, &members)?.max_error);
        }
        Ok(outcome(
            worst <= RECONSTRUCTION_TOLERANCE,
            format!("{} observables, max error {}", observables.len(), format_float(worst)),
        ))
    }

    fn energy_mean(&self) -> Result<(Status, String)> {
        let Some(rep) = self.double_stochastic() else {
            return Ok(skipped("transition matrix is not double stochastic"));
        };
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed.wrapping_add(1));
        let h = Rational::new(rng.gen_range(1i64..=9).into(), rng.gen_range(1i64..=4).into());
        let potential = random_pair(&mut rng);
        let observable = hamiltonian_observable(self.a, &h, &potential)?;
        let report = mean_preservation_check(rep, &observable, &self.members()?)?;
        Ok(outcome(report.passed, format!("max error {}", format_float(report.max_error))))
    }

    fn spectral(&self) -> Result<(Status, String)> {
        let Some(rep) = self.double_stochastic() else {
            return Ok(skipped("transition matrix is not double stochastic"));
        };
        let op = CompositeObservable::a_plus_b(self.a, self.b).quantize(self.a, self.b, rep.transition())?;
        let spec = op.spectral();
        let reconstruction = (spec.reconstruct() - *op.matrix()).max_abs();
        let mut mass = 0.0f64;
        for c in self.members()? {
            mass = mass.max((observable_distribution(&op, &rep.state(&c)?).total() - 1.0).abs());
        }
        Ok(outcome(
            reconstruction <= RECONSTRUCTION_TOLERANCE && mass <= TOLERANCE,
            format!(
                "reconstruction error {}, probability mass error {}",
                format_float(reconstruction),
                format_float(mass)
            ),
        ))
    }

    fn dispersion_free(&self) -> Result<(Status, String)> {
        if !self.incompatible {
            return Ok(skipped("variables are compatible"));
        }
        let space = &self.model.space;
        if space.len() > contextual_core::model_io::DEFAULT_ENUMERATION_LIMIT {
            return Ok(skipped("space too large for exhaustive search"));
        }
        let report = dispersion_free_search(space, self.a, self.b)?;
        let atoms: Vec<Event> = (0..space.len()).map(|p| space.atom(p)).collect();
        Ok(outcome(
            report.dispersion_free_contexts == atoms && report.representable_subset.is_empty(),
            format!("{} dispersion-free events", report.dispersion_free_contexts.len()),
        ))
    }

    fn random_models(&self) -> Result<(Status, String)> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed.wrapping_add(2));
        let mut failures = 0usize;
        for k in 0..RANDOM_MODELS {
            let n = rng.gen_range(4..=7);
            let model = random_incompatible_model(&mut rng, n)?;
            let (a, b) = (model.variable("a")?, model.variable("b")?);
            for c in model.contexts_for(a)? {
                let cancel = disturbance_sum(&model.space, a.partition(), b.partition(), &c)?.is_zero();
                if !cancel || !opposite_disturbance_holds(&model.space, a, b, &c)? {
                    failures += 1;
                }
            }
            let marginal = if k % 2 == 0 { Marginal::Uniform } else { Marginal::Random };
            let ds = random_double_stochastic_model(&mut rng, n, marginal)?;
            let (a, b) = (ds.variable("a")?, ds.variable("b")?);
            let phases = delta_constancy_check(&ds.space, a, b, -1, 1)?;
            if !(phases.constant && phases.equals_pi) || !marginal_symmetry_check(&ds.space, a, b)?.holds {
                failures += 1;
            }
        }
        Ok(outcome(
            failures == 0,
            format!("{} random models, {} failures", 2 * RANDOM_MODELS, failures),
        ))
    }
}

/// Runs the suite; the flag is true when no check failed.
pub fn verify_report(model: &Model, vars: &[String; 2], seed: u64) -> Result<(Report, bool)> {
    let (a, b) = variables(model, vars)?;
    let incompatible = variables_incompatible(&model.space, a, b);
    let contexts = model.contexts_for(a)?;
    let rep = if incompatible {
        HilbertRepresentation::new(&model.space, a, b, SignConvention::default()).ok()
    } else {
        None
    };
    let suite = Suite {
        model,
        a,
        b,
        contexts,
        rep,
        incompatible,
        seed,
    };

    type Runner<'s, 'm> = fn(&'s Suite<'m>) -> Result<(Status, String)>;
    let registered: Vec<(&'static str, Runner)> = vec![
        ("disturbance_sum_zero", Suite::disturbance_sum),
        ("total_probability_reconstruction", Suite::reconstruction),
        ("opposite_disturbance", Suite::opposite_disturbance),
        ("born_rule_b_basis", Suite::born_b),
        ("born_rule_a_basis", Suite::born_a),
        ("phase_difference_pi", Suite::phase_difference),
        ("opposite_cosines", Suite::opposite_cosines),
        ("marginal_symmetry", Suite::marginal_symmetry),
        ("commutator", Suite::commutator),
        ("mean_preservation", Suite::mean_preservation),
        ("energy_mean", Suite::energy_mean),
        ("spectral_decomposition", Suite::spectral),
        ("dispersion_free_atoms", Suite::dispersion_free),
        ("random_models", Suite::random_models),
    ];
    let mut checks = Vec::with_capacity(registered.len());
    for (name, runner) in registered {
        let (status, detail) = runner(&suite).unwrap_or_else(|e| (Status::Fail, e.to_string()));
        checks.push(Check { name, status, detail });
    }

    let passed = checks.iter().all(|c| c.status != Status::Fail);
    let rows = checks
        .iter()
        .map(|c| vec![c.name.to_string(), c.status.name().to_string(), c.detail.clone()])
        .collect();
    let json = json!({
        "model": model.spec.to_json(),
        "variables": vars,
        "seed": seed,
        "double_stochastic": suite.double_stochastic().is_some(),
        "checks": checks
            .iter()
            .map(|c| json!({"name": c.name, "status": c.status.name(), "detail": c.detail}))
            .collect::<Vec<Value>>(),
        "passed": passed,
    });
    Ok((
        Report {
            json,
            header: vec!["check".into(), "status".into(), "detail".into()],
            rows,
        },
        passed,
    ))
}
