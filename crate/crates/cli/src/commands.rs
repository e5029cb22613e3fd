//! One function per subcommand; each returns a result document.

use std::sync::Arc;

use cocycle_core::cocycle::{decompose as decompose_cocycle, verify_cocycle, CocycleGrid, LevelConstant};
use cocycle_core::symbol::symbol_phi_provider;
use cocycle_core::trace::{integrate_density, kv_density, wodzicki_density, TraceReport};
use cocycle_core::zeta::{pole_simplicity, residue_at, zeta_scan as scan_family, SymbolFamily};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::report::{ResultDocument, Table};

fn coordinate_columns(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

fn complex_columns(prefix: &str, count: usize) -> Vec<String> {
    (0..count)
        .flat_map(|i| [format!("re_{prefix}_{i}"), format!("im_{prefix}_{i}")])
        .collect()
}

pub fn verify(cfg: &RunConfig) -> Result<ResultDocument, CliError> {
    let mut doc = ResultDocument::new("verify", cfg.hash());
    let provider = symbol_phi_provider(Arc::new(cfg.model()?), cfg.torus()?.points())?;
    let grid = CocycleGrid::standard();
    let r = verify_cocycle(provider.as_ref(), &grid)?;
    let mut table = Table::new(["lambda1", "lambda2", "t", "residual"]);
    for s in &r.samples {
        table.push(vec![s.lambda1, s.lambda2, s.t, s.residual]);
    }
    doc.tables.insert("residuals".into(), table);
    doc.diagnostic("max_residual", r.max);
    doc.diagnostic("mean_residual", r.mean);
    doc.diagnostic("scale", r.scale);
    doc.diagnostic("samples", r.samples.len() as f64);
    doc.check("cocycle_residual", r.max / r.scale.max(1.0), cfg.tolerances.cocycle);
    Ok(doc)
}

pub fn decompose(cfg: &RunConfig) -> Result<ResultDocument, CliError> {
    let mut doc = ResultDocument::new("decompose", cfg.hash());
    let torus = cfg.torus()?;
    let points = torus.points();
    let provider = symbol_phi_provider(Arc::new(cfg.model()?), points.clone())?;
    let d = decompose_cocycle(provider, &cfg.decompose_settings())?;

    let mut psi = Table::new(std::iter::once("t".to_string()).chain(complex_columns("psi", points.len())));
    for (t, v) in d.samples() {
        psi.push(std::iter::once(*t).chain(v.iter().flat_map(|z| [z.re, z.im])).collect());
    }
    doc.tables.insert("psi".into(), psi);

    let psi1 = d.psi(1.0)?;
    let mut constants = Table::new(
        coordinate_columns(cfg.dimension)
            .into_iter()
            .chain(["re_c", "im_c", "re_psi1", "im_psi1"].map(String::from)),
    );
    for (i, x) in points.iter().enumerate() {
        let (c, p) = (d.c()[i], psi1[i]);
        constants.push(x.iter().copied().chain([c.re, c.im, p.re, p.im]).collect());
    }
    doc.tables.insert("constants".into(), constants);

    let mut levels = Table::new(["level", "re_order", "im_order", "is_log", "point", "re", "im"]);
    for (m, level) in d.levels().iter().enumerate() {
        let is_log = matches!(level.constant, LevelConstant::Log(_));
        let order = level.order.value();
        for (i, z) in level.constant.extraction().value.iter().enumerate() {
            levels.push(vec![m as f64, order.re, order.im, is_log as u8 as f64, i as f64, z.re, z.im]);
        }
    }
    doc.tables.insert("levels".into(), levels);

    doc.scalar("order", d.order().value());
    doc.scalar("integral_c", integrate_density(d.c().entries(), &torus)?);
    doc.scalar("integral_psi1", integrate_density(psi1.entries(), &torus)?);
    let diag = d.diagnostics();
    doc.diagnostic("reconstruction_residual", diag.reconstruction_residual);
    doc.diagnostic("reconstruction_scale", diag.reconstruction_scale);
    doc.diagnostic("lambda_spread", diag.lambda_independence_spread);
    doc.diagnostic("series_terms", diag.series_terms_used as f64);
    if let Some(r) = diag.cocycle_residual {
        doc.diagnostic("cocycle_residual", r);
    }
    doc.check(
        "reconstruction_residual",
        diag.reconstruction_residual / diag.reconstruction_scale.max(1.0),
        cfg.tolerances.reconstruction,
    );
    Ok(doc)
}

fn density_table(report: &TraceReport, n: usize) -> Table {
    let mut columns = coordinate_columns(n);
    columns.extend(["re", "im"].map(String::from));
    if report.oracle_per_point.is_some() {
        columns.extend(["re_oracle", "im_oracle"].map(String::from));
    }
    let mut table = Table::new(columns);
    for (i, x) in report.points.iter().enumerate() {
        let mut row: Vec<f64> = x.clone();
        row.extend([report.per_point[i].re, report.per_point[i].im]);
        if let Some(o) = &report.oracle_per_point {
            row.extend([o[i].re, o[i].im]);
        }
        table.push(row);
    }
    table
}

fn trace_diagnostics(doc: &mut ResultDocument, report: &TraceReport) {
    let d = &report.diagnostics;
    doc.diagnostic("lambda_spread", d.lambda_spread);
    if let Some(v) = d.reconstruction_residual {
        doc.diagnostic("reconstruction_residual", v);
    }
    if let Some(v) = d.cocycle_residual {
        doc.diagnostic("cocycle_residual", v);
    }
}

pub fn residue(cfg: &RunConfig) -> Result<ResultDocument, CliError> {
    let mut doc = ResultDocument::new("residue", cfg.hash());
    let torus = cfg.torus()?;
    let report = wodzicki_density(&cfg.model()?, &torus, &cfg.decompose_settings())?;
    doc.tables.insert("density".into(), density_table(&report, cfg.dimension));
    doc.scalar("Res", report.integrated);
    if let Some(o) = &report.oracle_per_point {
        doc.scalar("Res_oracle", integrate_density(o, &torus)?);
    }
    trace_diagnostics(&mut doc, &report);
    if let Some(l) = report.derivative_order {
        doc.diagnostic("derivative_order", l as f64);
    }
    let tol = cfg.tolerances.oracle;
    if let Some(g) = report.oracle_gap {
        doc.diagnostic("oracle_gap", g);
        doc.check("oracle_gap", g, tol);
    }
    if let Some(g) = report.diagnostics.two_route_gap {
        doc.diagnostic("two_route_gap", g);
        doc.check("two_route_gap", g, tol);
    }
    Ok(doc)
}

pub fn kv_trace(cfg: &RunConfig) -> Result<ResultDocument, CliError> {
    let mut doc = ResultDocument::new("kv-trace", cfg.hash());
    let torus = cfg.torus()?;
    let report = kv_density(&cfg.model()?, &torus, &cfg.decompose_settings())?;
    doc.tables.insert("density".into(), density_table(&report, cfg.dimension));
    doc.scalar("TR", report.integrated);
    trace_diagnostics(&mut doc, &report);
    match (report.oracle_gap, &report.oracle_per_point) {
        (Some(g), Some(o)) => {
            doc.scalar("TR_direct", integrate_density(o, &torus)?);
            doc.diagnostic("oracle_gap", g);
            doc.check("oracle_gap", g, cfg.tolerances.oracle);
        }
        _ => doc
            .notes
            .push("no direct oracle: the symbol is not trace class (Re k >= -n)".into()),
    }
    Ok(doc)
}

pub fn zeta_scan(cfg: &RunConfig) -> Result<ResultDocument, CliError> {
    let mut doc = ResultDocument::new("zeta-scan", cfg.hash());
    let points = cfg.torus()?.points();
    let family = SymbolFamily::new(
        cfg.dimension,
        cfg.homogeneous_layers(),
        cfg.cutoff_profile()?,
        points.clone(),
        cfg.family_domain()?,
    )?;
    doc.notes.push("the family has order z; the configured order is not used".into());
    let settings = cfg.decompose_settings();
    let t = cfg.zeta.t;

    let mut scan = Table::new(["re_z", "im_z"].map(String::from).into_iter().chain(complex_columns("psi", points.len())));
    let mut skipped = 0usize;
    for p in scan_family(&family, &cfg.window(), t, &settings) {
        match &p.psi {
            Some(v) => scan.push([p.z.re, p.z.im].into_iter().chain(v.iter().flat_map(|z| [z.re, z.im])).collect()),
            None => {
                skipped += 1;
                doc.notes.push(format!("z = {}: {}", p.z, p.status));
            }
        }
    }
    doc.tables.insert("scan".into(), scan);
    doc.diagnostic("skipped_points", skipped as f64);

    let z = &cfg.zeta;
    let poles: Vec<u32> = if z.im_min <= 0.0 && z.im_max >= 0.0 && z.re_max >= 0.0 {
        (z.re_min.max(0.0).ceil() as u32..=z.re_max.floor() as u32).collect()
    } else {
        Vec::new()
    };
    let contour = cfg.contour();
    let tol = cfg.tolerances.residue;
    let mut table = Table::new(["m", "point", "re_residue", "im_residue", "re_c", "im_c"]);
    for m in poles {
        let r = residue_at(&family, m, &contour, t, &settings)?;
        let s = pole_simplicity(&family, m, &contour, t, &settings)?;
        for i in 0..points.len() {
            let (res, c) = (r.residue_estimate[i], r.c_value[i]);
            table.push(vec![m as f64, i as f64, res.re, res.im, c.re, c.im]);
        }
        if points.len() == 1 {
            doc.scalar(&format!("residue_m{m}"), r.residue_estimate[0]);
            doc.scalar(&format!("c_m{m}"), r.c_value[0]);
        }
        doc.diagnostic(&format!("gap_m{m}"), r.gap);
        doc.diagnostic(&format!("second_moment_m{m}"), r.second_moment);
        doc.diagnostic(&format!("radius_drift_m{m}"), s.drift);
        doc.check(&format!("residue_plus_c_m{m}"), r.gap, tol);
        doc.check(&format!("second_moment_m{m}"), r.second_moment, tol);
        doc.check(&format!("radius_drift_m{m}"), s.drift, 0.01);
    }
    doc.tables.insert("poles".into(), table);
    Ok(doc)
}
