//! One function per subcommand. Each builds its report in memory; parallel
//! work is collected in input order before anything is written.

use breather_core::evolve::{self, RadialGrid};
use breather_core::fields::Evaluator;
use breather_core::verify::{self, ResidualReport, StencilConfig};
use breather_core::{fields, Boost, BreatherField, FieldKind, SpacetimePoint};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{Format, RunConfig};
use crate::error::CliError;
use crate::output::{Cell, Report, Table, SCHEMA_VERSION};
use crate::points::stratified_events;

/// A finished command: the main report, extra files to write and, when a
/// check did not pass, the reason.
#[derive(Debug)]
pub struct Outcome {
    pub report: Report,
    pub side_files: Vec<SideFile>,
    pub failure: Option<String>,
}

#[derive(Debug)]
pub struct SideFile {
    /// `None` sends the text to the diagnostic stream.
    pub path: Option<String>,
    pub text: String,
}

impl Outcome {
    fn ok(report: Report) -> Self {
        Self { report, side_files: Vec::new(), failure: None }
    }
}

fn complex_pair(z: breather_core::Complex64) -> [Cell; 2] {
    [Cell::Float(z.re), Cell::Float(z.im)]
}

pub fn sample(config: &RunConfig) -> Result<Outcome, CliError> {
    let params = config.params()?;
    let cfg = &config.sample;
    let field = BreatherField::new(config.spec(&params)?, params, cfg.field)?;
    let (ts, xs, ys, zs) = (cfg.t.values(), cfg.x.values(), cfg.y.values(), cfg.z.values());
    let mut events = Vec::with_capacity(ts.len() * xs.len() * ys.len() * zs.len());
    for &t in &ts {
        for &x in &xs {
            for &y in &ys {
                for &z in &zs {
                    events.push(SpacetimePoint::new(t, x, y, z));
                }
            }
        }
    }
    let values = events
        .par_iter()
        .map(|p| field.eval(p))
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(&["t", "x", "y", "z", "Re", "Im"]);
    for (p, v) in events.iter().zip(values) {
        let [re, im] = complex_pair(v);
        table.push(vec![p.t.into(), p.x.into(), p.y.into(), p.z.into(), re, im]);
    }
    Ok(Outcome::ok(Report::new("sample", table).with("field", json!(cfg.field))))
}

fn residual_study(
    field: &BreatherField,
    p: &SpacetimePoint,
    stencil: &StencilConfig,
) -> breather_core::Result<ResidualReport> {
    if field.kind.is_action() {
        verify::qhj_residual(field, p, stencil, &field.params)
    } else {
        verify::kg_residual(field, p, stencil, &field.params)
    }
}

pub fn verify(config: &RunConfig) -> Result<Outcome, CliError> {
    let params = config.params()?;
    let cfg = &config.verify;
    let field = BreatherField::new(config.spec(&params)?, params, cfg.field)?;
    let stencil = StencilConfig::new(cfg.h, cfg.levels)?;
    let events = match &cfg.events {
        Some(list) => list.iter().map(|e| SpacetimePoint::new(e[0], e[1], e[2], e[3])).collect(),
        None => stratified_events(cfg.points, cfg.seed, (cfg.r_min, cfg.r_max), (cfg.t_min, cfg.t_max)),
    };
    if events.is_empty() {
        return Err(CliError::Usage("verify needs a non-empty set of events".into()));
    }
    let results = verify::residual_batch(&events, |p| residual_study(&field, p, &stencil));

    let spacings = stencil.spacings();
    let mut columns = vec!["t", "x", "y", "z"];
    let residual_names: Vec<String> = (0..spacings.len()).map(|i| format!("max_abs_{i}")).collect();
    let order_names: Vec<String> = (1..spacings.len()).map(|i| format!("order_{i}")).collect();
    columns.extend(residual_names.iter().map(String::as_str));
    columns.extend(order_names.iter().map(String::as_str));
    columns.extend(["passed", "error"]);
    let mut table = Table::new(&columns);

    let passes = |r: &ResidualReport| {
        let band = r.orders_within(cfg.order_min, cfg.order_max);
        let small = match (cfg.residual_limit, r.at_spacing(cfg.residual_spacing)) {
            (Some(limit), Some(value)) => value <= limit,
            _ => true,
        };
        band && small
    };
    let mut good = Vec::new();
    let mut failed = 0usize;
    for (p, result) in events.iter().zip(&results) {
        let mut row: Vec<Cell> = vec![p.t.into(), p.x.into(), p.y.into(), p.z.into()];
        match result {
            Ok(report) => {
                let ok = passes(report);
                failed += usize::from(!ok);
                row.extend(report.per_level.iter().map(|l| Cell::Float(l.max_abs)));
                row.extend(report.orders.iter().map(|&q| Cell::Float(q)));
                row.push(Cell::Bool(ok));
                row.push(Cell::Empty);
                good.push(report.clone());
            }
            Err(e) => {
                failed += 1;
                row.extend(std::iter::repeat_with(|| Cell::Empty).take(2 * spacings.len() - 1));
                row.push(Cell::Bool(false));
                row.push(Cell::Text(e.to_string()));
            }
        }
        table.push(row);
    }
    let aggregate = if good.is_empty() { None } else { Some(ResidualReport::aggregate(&good)?) };
    let passed = failed == 0;
    let report = Report::new("verify", table)
        .with("field", json!(cfg.field))
        .with("equation", json!(if cfg.field.is_action() { "hamilton-jacobi" } else { "klein-gordon" }))
        .with("spacings", json!(spacings))
        .with("order_band", json!([cfg.order_min, cfg.order_max]))
        .with("aggregate", serde_json::to_value(&aggregate).expect("report serializes"))
        .with("passed", json!(passed));
    let failure = (!passed).then(|| format!("{failed} of {} events failed the convergence check", events.len()));
    Ok(Outcome { report, side_files: Vec::new(), failure })
}

pub fn quantize(config: &RunConfig) -> Result<Outcome, CliError> {
    let params = config.params()?;
    let cfg = &config.quantize;
    if !(cfg.d > 0.0 && cfg.p.min > 0.0) {
        return Err(CliError::Usage("quantize needs d > 0 and a positive momentum range".into()));
    }
    let base = config.single_spec(&params)?;
    let stencil = StencilConfig::new(cfg.h, 2)?;
    let momenta = cfg.p.values();
    let rows = momenta
        .par_iter()
        .map(|&p| -> Result<Vec<Cell>, CliError> {
            let check = fields::quantization_check(cfg.d, p, &params, cfg.tolerance)?;
            let spec = base
                .with_boost(Boost::from_momentum(p, &params)?)
                .with_train(cfg.d, config.breather.truncation);
            let action = BreatherField::new(spec, params, FieldKind::ActionTrain)?;
            let (dt_mis, dx_mis) = verify::boundary_condition_check(&action, cfg.d, cfg.y, cfg.z, cfg.t, &stencil, &params)?;
            let n = check.n_exact.map_or(Cell::Empty, |n| Cell::Int(n as i64));
            Ok(vec![p.into(), check.mismatch.into(), dt_mis.into(), dx_mis.into(), n])
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(&["p", "mismatch", "dt_mismatch", "dx_mismatch", "n"]);
    let mut hits = Vec::new();
    for row in rows {
        if let (Cell::Float(p), Cell::Int(n)) = (&row[0], &row[4]) {
            hits.push(json!({ "p": p, "n": n }));
        }
        table.push(row);
    }
    let report = Report::new("quantize", table)
        .with("d", json!(cfg.d))
        .with("truncation", json!(config.breather.truncation))
        .with("hits", Value::Array(hits));
    Ok(Outcome::ok(report))
}

pub fn evolve(config: &RunConfig, output_path: Option<&str>) -> Result<Outcome, CliError> {
    let params = config.params()?;
    let cfg = &config.evolve;
    if !(params.kappa() > 0.0) {
        return Err(CliError::Usage("evolution needs m > 0".into()));
    }
    let grid = RadialGrid::synchronized(cfg.radius / params.kappa(), cfg.cells, cfg.cfl, &params)?;
    let spec = config.spec(&params)?;
    let mut state = evolve::init_from_breather(&spec, &grid, &params)?;
    state.boundary = cfg.boundary;
    let steps = (cfg.periods * grid.steps_per_period(&params)).round();
    if !(steps >= 1.0) {
        return Err(CliError::Usage("evolve.periods must cover at least one step".into()));
    }
    evolve::run(&mut state, &grid, &params, steps as u64);

    let mut table = Table::new(&["step", "time", "core_norm", "discrete_energy", "probe_Re", "probe_Im"]);
    for s in state.diagnostics.iter().step_by(cfg.every) {
        let [re, im] = complex_pair(s.probe);
        table.push(vec![Cell::Int(s.step as i64), s.time.into(), s.core_norm.into(), s.energy.into(), re, im]);
    }

    let mut summary = serde_json::Map::new();
    summary.insert("schema_version".into(), json!(SCHEMA_VERSION));
    summary.insert("command".into(), json!("evolve"));
    summary.insert(
        "grid".into(),
        json!({ "radius": grid.radius, "cells": grid.cells, "dr": grid.dr, "dt": grid.dt, "cfl": grid.cfl(&params) }),
    );
    summary.insert("steps".into(), json!(steps as u64));
    summary.insert("boundary".into(), json!(cfg.boundary));
    summary.insert("probe_radius".into(), json!(state.probe_radius(&grid)));
    summary.insert("expected_frequency".into(), json!(2.0 * params.omega0()));
    match evolve::run_diagnostics(&state, &grid, &params) {
        Ok(d) => {
            let value = serde_json::to_value(d).expect("diagnostics serialize");
            if let Value::Object(fields) = value {
                summary.extend(fields);
            }
        }
        Err(e) => {
            summary.insert("diagnostics_error".into(), json!(e.to_string()));
        }
    }

    let mut report = Report::new("evolve", table);
    let mut side_files = Vec::new();
    match config.output.format {
        Format::Json => {
            report = report.with("summary", Value::Object(summary));
        }
        Format::Csv => {
            let path = cfg.summary.clone().or_else(|| output_path.map(|p| format!("{p}.summary.json")));
            let mut text = serde_json::to_string_pretty(&Value::Object(summary)).expect("summary serializes");
            text.push('\n');
            side_files.push(SideFile { path, text });
        }
    }
    Ok(Outcome { report, side_files, failure: None })
}

pub fn spectrum(config: &RunConfig) -> Result<Outcome, CliError> {
    let params = config.params()?;
    let cfg = &config.spectrum;
    if cfg.points.is_empty() {
        return Err(CliError::Usage("spectrum needs at least one point".into()));
    }
    let action = BreatherField::new(config.single_spec(&params)?, params, FieldKind::Action)?;
    let reports = cfg
        .points
        .par_iter()
        .map(|&at| verify::far_field_spectrum(&action, at, &params, cfg.periods, cfg.samples_per_period))
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(&["x", "y", "z", "peak_frequency", "harmonic_ratio", "bin_width", "zero_signal"]);
    for (at, r) in cfg.points.iter().zip(reports) {
        table.push(vec![
            at[0].into(),
            at[1].into(),
            at[2].into(),
            r.peak_frequency.into(),
            r.harmonic_ratio.into(),
            r.bin_width.into(),
            Cell::Bool(r.zero_signal),
        ]);
    }
    Ok(Outcome::ok(Report::new("spectrum", table).with("omega0", json!(params.omega0()))))
}

pub fn average_energy(config: &RunConfig) -> Result<Outcome, CliError> {
    let params = config.params()?;
    let cfg = &config.average_energy;
    if cfg.points.is_empty() {
        return Err(CliError::Usage("average-energy needs at least one point".into()));
    }
    let action = BreatherField::new(config.single_spec(&params)?, params, FieldKind::Action)?;
    let values = cfg
        .points
        .par_iter()
        .map(|at| verify::average_energy_from(&action, at[0], at[1], at[2], cfg.t0, &params, cfg.nodes))
        .collect::<Result<Vec<_>, _>>()?;
    let rest = params.rest_energy();
    let mut table = Table::new(&["x", "y", "z", "energy_Re", "energy_Im", "deviation"]);
    for (at, e) in cfg.points.iter().zip(values) {
        let [re, im] = complex_pair(e);
        table.push(vec![at[0].into(), at[1].into(), at[2].into(), re, im, (e - rest).norm().into()]);
    }
    Ok(Outcome::ok(Report::new("average-energy", table).with("rest_energy", json!(rest))))
}
