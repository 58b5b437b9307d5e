//! The subcommands as functions from a job configuration to a report.

use serde_json::{json, Value};

use ruinbound::bounds::{certify, max_feasible_delta, optimize_delta, BoundCertificate, DeltaObjective, TheoremConstants};
use ruinbound::dists::DistributionSpec;
use ruinbound::mc::{check_domination, horizon_advisory, simulate_ruin_grid, simulate_sup_grid, McError};
use ruinbound::reference::golden_checks;
use ruinbound::riskmodel::{
    adjustment_coefficient, c2_constant, derive_corollary2_inputs, exact_ruin_degenerate, hat_delta, lundberg_bound,
    map_to_theorem, to_increment_sequence, CorollaryTwoConstants, RiskModelSpec,
};
use ruinbound::seqmodel::{derive_constants, suggest_b, AverageCertificate, SequenceSpec, SequenceStructure};

use crate::config::{JobConfig, Model, StatedConstants};
use crate::error::CliError;
use crate::report::{num, Report, Table};

/// A report plus a failure to signal through the exit code after the report is shown.
#[derive(Debug)]
pub struct Outcome {
    pub report: Report,
    pub failure: Option<CliError>,
}

impl From<Report> for Outcome {
    fn from(report: Report) -> Self {
        Outcome { report, failure: None }
    }
}

/// Constants used for bounds, with where they came from.
struct Resolved {
    theorem: TheoremConstants,
    corollary: Option<CorollaryTwoConstants>,
    source: &'static str,
}

fn required(v: Option<f64>, name: &str) -> Result<f64, CliError> {
    v.ok_or_else(|| CliError::Config(format!("constants.{name} is required")))
}

fn walk_b(seq: &SequenceSpec, cfg: &JobConfig) -> Result<usize, CliError> {
    match cfg.constants.b {
        Some(b) => Ok(b),
        None => Ok(suggest_b(seq)?),
    }
}

fn risk_beta(m: &RiskModelSpec, cfg: &JobConfig) -> Result<usize, CliError> {
    match cfg.constants.beta {
        Some(b) => Ok(b),
        None => Ok(suggest_b(&to_increment_sequence(m)?)?),
    }
}

fn resolve(cfg: &JobConfig) -> Result<Resolved, CliError> {
    let k = &cfg.constants;
    match (cfg.model(), k.stated) {
        (Model::Walk(_), Some(StatedConstants::Theorem(t))) => {
            t.validate()?;
            Ok(Resolved {
                theorem: t,
                corollary: None,
                source: "stated",
            })
        }
        (Model::Walk(seq), _) => {
            let d = derive_constants(seq, required(k.h, "h")?, required(k.c, "c")?, walk_b(seq, cfg)?)?;
            Ok(Resolved {
                theorem: d.constants,
                corollary: None,
                source: "derived",
            })
        }
        (Model::Risk(m), Some(StatedConstants::Corollary(c))) => {
            c.validate()?;
            Ok(Resolved {
                theorem: map_to_theorem(&c, m.p()),
                corollary: Some(c),
                source: "stated",
            })
        }
        (Model::Risk(m), _) => {
            let d = derive_corollary2_inputs(m, required(k.gamma, "gamma")?, required(k.kappa, "kappa")?, risk_beta(m, cfg)?)?;
            Ok(Resolved {
                theorem: map_to_theorem(&d.constants, m.p()),
                corollary: Some(d.constants),
                source: "derived",
            })
        }
    }
}

fn require_delta(cfg: &JobConfig) -> Result<f64, CliError> {
    cfg.constants
        .delta
        .ok_or_else(|| CliError::Config("δ is required: set constants.delta or pass --delta".into()))
}

fn certificate_row(t: &mut Table, name: &str, c: &AverageCertificate, value: f64) {
    t.push(vec![
        json!(name),
        num(value),
        num(c.value),
        json!(c.attained_at.to_string()),
        json!(c.horizon_used),
        num(c.error_budget),
    ]);
}

fn theorem_table(rows: &[(&str, TheoremConstants)]) -> Table {
    let mut t = Table::new(
        "theorem_constants",
        &["source", "a", "b", "c", "epsilon", "h", "d1", "d2", "M", "delta_max", "verdict"],
    );
    for (source, k) in rows {
        let (dmax, verdict) = match max_feasible_delta(k) {
            Ok(d) => (num(d), json!(format!("feasible for 0 < δ < {d:.8}"))),
            Err(e) => (Value::Null, json!(e.to_string())),
        };
        t.push(vec![
            json!(source),
            num(k.a),
            json!(k.b),
            num(k.c),
            num(k.epsilon),
            num(k.h),
            num(k.d1),
            num(k.d2),
            num(k.big_m()),
            dmax,
            verdict,
        ]);
    }
    t
}

fn corollary_table(rows: &[(&str, CorollaryTwoConstants)], p: f64) -> Table {
    let mut t = Table::new(
        "corollary_constants",
        &["source", "alpha", "beta", "kappa", "epsilon", "gamma", "nu1", "nu2", "p"],
    );
    for (source, c) in rows {
        t.push(vec![
            json!(source),
            num(c.alpha),
            json!(c.beta),
            num(c.kappa),
            num(c.epsilon),
            num(c.gamma),
            num(c.nu1),
            num(c.nu2),
            num(p),
        ]);
    }
    t
}

/// Derived constants with their certificates, and a feasibility verdict.
pub fn conditions(cfg: &JobConfig) -> Result<Outcome, CliError> {
    let k = &cfg.constants;
    let mut report = Report::default();
    let mut cert = Table::new(
        "conditions",
        &["constant", "value", "certified_average", "attained_at", "horizon_used", "error_budget"],
    );
    let mut theorem_rows = Vec::new();
    match cfg.model() {
        Model::Walk(seq) => {
            let d = derive_constants(seq, required(k.h, "h")?, required(k.c, "c")?, walk_b(seq, cfg)?)?;
            let t = d.constants;
            certificate_row(&mut cert, "a", &d.drift, t.a);
            certificate_row(&mut cert, "epsilon", &d.truncation, t.epsilon);
            certificate_row(&mut cert, "d1", &d.tail_exp, t.d1);
            certificate_row(&mut cert, "d2", &d.head_exp, t.d2);
            report.tables.push(cert);
            theorem_rows.push(("derived", t));
            if let Some(StatedConstants::Theorem(s)) = k.stated {
                theorem_rows.push(("stated", s));
            }
        }
        Model::Risk(m) => {
            let d = derive_corollary2_inputs(m, required(k.gamma, "gamma")?, required(k.kappa, "kappa")?, risk_beta(m, cfg)?)?;
            let c = d.constants;
            certificate_row(&mut cert, "alpha", &d.drift, c.alpha);
            certificate_row(&mut cert, "epsilon", &d.interarrival_trunc, c.epsilon);
            certificate_row(&mut cert, "nu1", &d.claim_exp, c.nu1);
            certificate_row(&mut cert, "nu2", &d.claim_exp_head, c.nu2);
            report.tables.push(cert);
            let mut rows = vec![("derived", c)];
            if let Some(StatedConstants::Corollary(s)) = k.stated {
                rows.push(("stated", s));
            }
            report.tables.push(corollary_table(&rows, m.p()));
            theorem_rows.extend(rows.iter().map(|(s, c)| (*s, map_to_theorem(c, m.p()))));
        }
    }
    let table = theorem_table(&theorem_rows);
    let failure = theorem_rows
        .iter()
        .find_map(|(s, k)| max_feasible_delta(k).err().map(|e| CliError::Infeasible(format!("{s} constants: {e}"))));
    report.tables.push(table);
    Ok(Outcome { report, failure })
}

fn certificate_table(r: &Resolved, c: &BoundCertificate, p: Option<f64>) -> Table {
    let mut t = Table::new("certificate", &["quantity", "value"]);
    t.push(vec![json!("source"), json!(r.source)]);
    for (name, v) in [
        ("delta", c.delta),
        ("capital_delta", c.capital_delta),
        ("M", c.big_m),
        ("S", c.s),
        ("c1", c.c1),
        ("rate", c.rate),
        ("crossover_x", c.crossover_x),
    ] {
        t.push(vec![json!(name), num(v)]);
    }
    if let (Some(k), Some(p)) = (r.corollary, p) {
        t.push(vec![json!("hat_delta"), num(hat_delta(&k, p, c.delta))]);
        if let Ok(c2) = c2_constant(&k, p, c.delta) {
            t.push(vec![json!("c2"), num(c2)]);
        }
    }
    t
}

fn model_p(cfg: &JobConfig) -> Option<f64> {
    match cfg.model() {
        Model::Walk(_) => None,
        Model::Risk(m) => Some(m.p()),
    }
}

/// `min{1, c₁e^{−δhx}}` at a given δ.
pub fn bound(cfg: &JobConfig) -> Result<Outcome, CliError> {
    let delta = require_delta(cfg)?;
    let r = resolve(cfg)?;
    let c = certify(&r.theorem, delta)?;
    let mut report = Report::default();
    report.tables.push(certificate_table(&r, &c, model_p(cfg)));
    let xs = cfg.simulation.threshold_list()?;
    if !xs.is_empty() {
        let mut t = Table::new("bound", &["x", "bound", "uncapped"]);
        for x in xs {
            t.push(vec![num(x), num(c.bound(x)), num(c.uncapped(x))]);
        }
        report.tables.push(t);
    }
    Ok(report.into())
}

/// Best δ for the asymptotic rate and for each requested point.
pub fn optimize(cfg: &JobConfig) -> Result<Outcome, CliError> {
    let r = resolve(cfg)?;
    let mut t = Table::new(
        "optimum",
        &["objective", "x", "delta", "capital_delta", "c1", "rate", "crossover_x", "bound_at_x"],
    );
    let mut push = |objective: &str, x: Option<f64>, c: BoundCertificate| {
        t.push(vec![
            json!(objective),
            x.map(num).unwrap_or(Value::Null),
            num(c.delta),
            num(c.capital_delta),
            num(c.c1),
            num(c.rate),
            num(c.crossover_x),
            x.map(|x| num(c.bound(x))).unwrap_or(Value::Null),
        ]);
    };
    push("asymptotic_rate", None, optimize_delta(&r.theorem, DeltaObjective::AsymptoticRate)?);
    for x in cfg.simulation.threshold_list()? {
        push("at_point", Some(x), optimize_delta(&r.theorem, DeltaObjective::AtPoint { x })?);
    }
    let mut report = Report::default();
    report.tables.push(t);
    Ok(report.into())
}

fn iid_law(seq: &SequenceSpec) -> Option<&DistributionSpec> {
    match seq.structure() {
        SequenceStructure::EventuallyPeriodic { preperiod, cycle } if preperiod.is_empty() && cycle.len() == 1 => {
            Some(&cycle[0])
        }
        _ => None,
    }
}

/// `ψ(u) ≤ min{1, c₂e^{−δγu}}` for a risk model, with the classical coefficient when the model is
/// homogeneous and exact values when it is degenerate.
pub fn ruin_bound(cfg: &JobConfig) -> Result<Outcome, CliError> {
    let Model::Risk(m) = cfg.model() else {
        return Err(CliError::Config("ruin-bound needs a [risk] model".into()));
    };
    let delta = require_delta(cfg)?;
    let r = resolve(cfg)?;
    let k = r.corollary.expect("risk models resolve corollary constants");
    let c2 = c2_constant(&k, m.p(), delta)?;
    let rate = delta * k.gamma;
    let mut t = Table::new("ruin_certificate", &["quantity", "value"]);
    t.push(vec![json!("source"), json!(r.source)]);
    t.push(vec![json!("delta"), num(delta)]);
    t.push(vec![json!("hat_delta"), num(hat_delta(&k, m.p(), delta))]);
    t.push(vec![json!("c2"), num(c2)]);
    t.push(vec![json!("rate"), num(rate)]);
    t.push(vec![json!("delta_max"), num(max_feasible_delta(&r.theorem)?)]);
    if let (Some(z), Some(th)) = (iid_law(m.claims()), iid_law(m.interarrivals())) {
        if let Some(big_r) = adjustment_coefficient(z, th, m.p())? {
            t.push(vec![json!("adjustment_coefficient"), num(big_r)]);
            t.push(vec![json!("rate_within_adjustment_coefficient"), json!(rate <= big_r)]);
        }
    }
    let mut report = Report::default();
    report.tables.push(t);
    let us = cfg.simulation.threshold_list()?;
    if !us.is_empty() {
        let degenerate = exact_ruin_degenerate(m, 0.0).is_ok();
        let mut cols = vec!["u", "bound"];
        if degenerate {
            cols.push("exact");
        }
        let mut t = Table::new("ruin_bound", &cols);
        for u in us {
            let mut row = vec![num(u), num(lundberg_bound(m, &k, delta, u)?)];
            if degenerate {
                row.push(json!(exact_ruin_degenerate(m, u)?));
            }
            t.push(row);
        }
        report.tables.push(t);
    }
    Ok(report.into())
}

/// Monte Carlo estimates over the threshold grid, checked against the certified bound when δ is set.
pub fn simulate(cfg: &JobConfig) -> Result<Outcome, CliError> {
    let xs = cfg.simulation.threshold_list()?;
    if xs.is_empty() {
        return Err(CliError::Config("simulate needs thresholds: set simulation.grid or pass --x/--u/--grid".into()));
    }
    let plan = cfg.simulation.plan();
    plan.validate()?;
    let mut report = Report::default();
    let certificate = match cfg.constants.delta {
        Some(delta) => {
            let r = resolve(cfg)?;
            let x_max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if let Some(w) = horizon_advisory(r.theorem.a, x_max, plan.horizon) {
                report.warnings.push(w);
            }
            Some(certify(&r.theorem, delta)?)
        }
        None => None,
    };
    let estimates = match cfg.model() {
        Model::Walk(seq) => simulate_sup_grid(seq, &xs, &plan)?,
        Model::Risk(m) => simulate_ruin_grid(m, &xs, &plan)?,
    };
    let mut failure = None;
    let table = match certificate {
        None => {
            let mut t = Table::new("simulation", &["x", "hits", "trials", "estimate", "ci_low", "ci_high"]);
            for e in &estimates {
                t.push(vec![num(e.threshold), json!(e.hits), json!(e.trials), num(e.point), num(e.ci_low), num(e.ci_high)]);
            }
            t
        }
        Some(c) => {
            let rows = match check_domination(&estimates, &c, &plan) {
                Ok(r) => r.rows,
                Err(McError::Domination(r)) => {
                    let bad: Vec<String> = r.violations().iter().map(|v| format!("x = {}", v.threshold)).collect();
                    failure = Some(CliError::Domination(format!(
                        "ci_low exceeds the certified bound at {}",
                        bad.join(", ")
                    )));
                    r.rows
                }
                Err(e) => return Err(e.into()),
            };
            let mut t = Table::new(
                "simulation",
                &["x", "hits", "trials", "estimate", "ci_low", "ci_high", "bound", "margin", "pass"],
            );
            for r in rows {
                t.push(vec![
                    num(r.threshold),
                    json!(r.hits),
                    json!(r.trials),
                    num(r.estimate),
                    num(r.ci_low),
                    num(r.ci_high),
                    num(r.bound),
                    num(r.margin),
                    json!(r.pass),
                ]);
            }
            t
        }
    };
    report.tables.push(table);
    Ok(Outcome { report, failure })
}

/// CSV columns `x, bound, estimate, ci_low, ci_high` from a `simulation` table.
pub fn plot_data(report: &Report) -> Option<String> {
    let t = report.table("simulation")?;
    let cols: Vec<Option<usize>> = ["x", "bound", "estimate", "ci_low", "ci_high"].iter().map(|c| t.column(c)).collect();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["x", "bound", "estimate", "ci_low", "ci_high"]).ok()?;
    for r in &t.rows {
        let fields: Vec<String> = cols
            .iter()
            .map(|c| c.map(|j| r[j].to_string()).unwrap_or_default())
            .collect();
        w.write_record(&fields).ok()?;
    }
    String::from_utf8(w.into_inner().ok()?).ok()
}

/// Golden comparisons for the reference models.
pub fn examples(which: &[u8]) -> Result<Outcome, CliError> {
    let mut t = Table::new("golden", &["example", "quantity", "expected", "computed", "pass"]);
    let mut failed = Vec::new();
    for &e in which {
        if !(1..=4).contains(&e) {
            return Err(CliError::Config(format!("no example {e}; choose 1, 2, 3, 4 or all")));
        }
        for g in golden_checks(e) {
            if !g.pass {
                failed.push(format!("example {} {}: expected {}, computed {}", g.example, g.quantity, g.expected, g.computed));
            }
            t.push(vec![json!(g.example), json!(g.quantity), json!(g.expected), num(g.computed), json!(g.pass)]);
        }
    }
    let mut report = Report::default();
    report.tables.push(t);
    let failure = (!failed.is_empty()).then(|| CliError::Golden(failed.join("; ")));
    Ok(Outcome { report, failure })
}
