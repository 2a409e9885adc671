//! One function per subcommand. Each returns the machine payload together with its CSV and
//! text renderings; the text only repeats numbers that appear in the payload.

use std::fmt::Write as _;

use qcontract::contraction::{
    carlen_maas_check, contraction_experiment, sdpi_chi2, sdpi_variational, ExperimentOptions, ExperimentReport,
    Objective, SdpiEstimate, VariationalOptions, BALANCED_TOL, FIXED_POINT_TOL, IMPLIED_TOL,
};
use qcontract::divergences::{
    chi2_g, evaluate, f_catalog, g_catalog, DivergenceDiagnostics, FDivergenceSpec, Family, StandardMonotoneFn,
};
use qcontract::json::matrix_to_rows;
use qcontract::linalg::DEFAULT_TOL;
use qcontract::{DensityMatrix, Error, QuantumChannel};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::CliError;

pub struct Rendered {
    pub payload: Value,
    pub diagnostics: Value,
    pub csv: String,
    pub text: String,
}

/// Shortest round-trip decimal, identical to the JSON encoding of the same value.
fn num(x: f64) -> String {
    serde_json::to_string(&x).unwrap_or_else(|_| "null".into())
}

fn opt_num(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), num)
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

pub fn resolve_f(names: &[String]) -> Result<Vec<FDivergenceSpec>, CliError> {
    if names.is_empty() {
        return Ok(vec![FDivergenceSpec::kl()]);
    }
    names
        .iter()
        .map(|n| FDivergenceSpec::by_name(n).ok_or_else(|| CliError::Input(format!("unknown f: {n}"))))
        .collect()
}

pub fn resolve_g(names: &[String]) -> Result<Vec<StandardMonotoneFn>, CliError> {
    if names.is_empty() {
        return Ok(g_catalog());
    }
    names
        .iter()
        .map(|n| StandardMonotoneFn::by_name(n).ok_or_else(|| CliError::Input(format!("unknown g: {n}"))))
        .collect()
}

pub fn resolve_families(names: &[String]) -> Result<Vec<Family>, CliError> {
    if names.is_empty() {
        return Ok(Family::ALL.to_vec());
    }
    names
        .iter()
        .map(|n| Family::from_name(n).ok_or_else(|| CliError::Input(format!("unknown family: {n}"))))
        .collect()
}

fn family_specs(fs: &[FDivergenceSpec], families: &[Family]) -> Vec<FDivergenceSpec> {
    families.iter().flat_map(|&fam| fs.iter().map(move |f| f.clone().with_family(fam))).collect()
}

/// The given reference state, or the unique fixed point of the channel.
pub fn reference_state(channel: &QuantumChannel, sigma: Option<DensityMatrix>) -> Result<(DensityMatrix, &'static str), CliError> {
    if let Some(s) = sigma {
        if s.dim() != channel.dim() {
            return Err(Error::DimensionMismatch { expected: channel.dim(), got: s.dim() }.into());
        }
        return Ok((s, "input"));
    }
    match channel.fixed_point() {
        Ok(pi) => Ok((pi, "fixed_point")),
        Err(Error::DegenerateFixedSpace(k)) => {
            Err(Error::NotPrimitive(format!("{k} independent fixed points; pass --sigma explicitly")).into())
        }
        Err(e) => Err(e.into()),
    }
}

#[derive(Serialize)]
struct DivergenceRecord {
    family: String,
    f_name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    g_name: Option<String>,
    value: f64,
    diagnostics: DivergenceDiagnostics,
}

pub fn divergence(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    fs: &[FDivergenceSpec],
    families: &[Family],
    gs: &[StandardMonotoneFn],
) -> Result<Rendered, CliError> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: sigma.dim(), got: rho.dim() }.into());
    }
    let mut records = Vec::new();
    for spec in family_specs(fs, families) {
        let v = evaluate(&spec, rho, sigma)?;
        records.push(DivergenceRecord {
            family: spec.family.to_string(),
            f_name: spec.name.clone(),
            g_name: None,
            value: v.value,
            diagnostics: v.diagnostics,
        });
    }
    for g in gs {
        let v = chi2_g(rho, sigma, g)?;
        records.push(DivergenceRecord {
            family: "chi2".into(),
            f_name: "chi2".into(),
            g_name: Some(g.name.clone()),
            value: v.value,
            diagnostics: v.diagnostics,
        });
    }
    let max_quad = records.iter().filter_map(|r| r.diagnostics.quadrature_error).fold(None, |m: Option<f64>, e| {
        Some(m.map_or(e, |m| m.max(e)))
    });
    let mut csv = String::from("family,f_name,g_name,value\n");
    let mut text = format!("{:<10} {:<10} {:<8} value\n", "family", "f", "g");
    for r in &records {
        let g = r.g_name.as_deref().unwrap_or("");
        let _ = writeln!(csv, "{},{},{},{}", r.family, r.f_name, g, num(r.value));
        let _ = writeln!(text, "{:<10} {:<10} {:<8} {}", r.family, r.f_name, if g.is_empty() { "-" } else { g }, num(r.value));
    }
    Ok(Rendered {
        payload: json!({ "records": to_value(&records) }),
        diagnostics: json!({
            "validation_tol": DEFAULT_TOL,
            "rho_clipped": rho.clipped(),
            "sigma_clipped": sigma.clipped(),
            "max_quadrature_error": max_quad,
        }),
        csv,
        text,
    })
}

#[derive(Serialize)]
struct ExactRow {
    g_name: String,
    #[serde(flatten)]
    estimate: SdpiEstimate,
}

#[derive(Serialize)]
struct VariationalRow {
    family: Family,
    f_name: String,
    #[serde(flatten)]
    estimate: SdpiEstimate,
}

pub struct SdpiRequest<'a> {
    pub gs: &'a [StandardMonotoneFn],
    /// Empty unless variational estimates were requested.
    pub specs: Vec<FDivergenceSpec>,
    pub variational: VariationalOptions,
}

pub fn sdpi(channel: &QuantumChannel, sigma: &DensityMatrix, source: &str, req: &SdpiRequest) -> Result<Rendered, CliError> {
    let mut exact = Vec::new();
    for g in req.gs {
        exact.push(ExactRow { g_name: g.name.clone(), estimate: sdpi_chi2(channel, sigma, g)? });
    }
    let mut variational = Vec::new();
    for spec in &req.specs {
        let estimate = sdpi_variational(&Objective::Family(spec.clone()), channel, sigma, &req.variational)?;
        variational.push(VariationalRow { family: spec.family, f_name: spec.name.clone(), estimate });
    }
    let mut csv = String::from("method,name,value\n");
    let mut text = format!("channel {}\n{:<28} value\n", channel.label(), "coefficient");
    for r in &exact {
        let _ = writeln!(csv, "exact,chi2_{},{}", r.g_name, num(r.estimate.value));
        let _ = writeln!(text, "{:<28} {}", format!("chi2_{}", r.g_name), num(r.estimate.value));
    }
    for r in &variational {
        let _ = writeln!(csv, "variational,{}_{},{}", r.family, r.f_name, num(r.estimate.value));
        let _ = writeln!(text, "{:<28} {}", format!("{}_{} (variational)", r.family, r.f_name), num(r.estimate.value));
    }
    let restarts: Vec<Value> = variational
        .iter()
        .map(|r| json!({ "objective": format!("{}_{}", r.family, r.f_name), "used": r.estimate.restarts_used, "valid": r.estimate.valid_restarts }))
        .collect();
    Ok(Rendered {
        payload: json!({
            "channel": channel.label(),
            "sigma": matrix_to_rows(sigma.matrix()),
            "sigma_source": source,
            "exact": to_value(&exact),
            "variational": to_value(&variational),
        }),
        diagnostics: json!({
            "fixed_point_tol": FIXED_POINT_TOL,
            "restarts": restarts,
            "step_tol": req.variational.step_tol,
            "exclusion_radius": req.variational.exclusion_radius,
        }),
        csv,
        text,
    })
}

pub fn db_check(channel: &QuantumChannel, sigma: &DensityMatrix, source: &str, extra: &[StandardMonotoneFn]) -> Result<Rendered, CliError> {
    let mut report = carlen_maas_check(channel, sigma)?;
    for g in extra {
        if !report.residuals.contains_key(&g.name) && g.name != "gns" {
            let r = qcontract::contraction::detailed_balance_residual(channel, sigma, g)?;
            report.residuals.insert(g.name.clone(), r);
        }
    }
    let balanced_all = report.gns_balanced && report.residuals.values().all(|&r| r <= BALANCED_TOL);
    let verdict = if balanced_all && report.implication_holds { "PASS" } else { "FAIL" };
    let mut csv = String::from("g,residual\n");
    let mut text = format!("channel {}\n{:<10} residual\n", channel.label(), "g");
    let _ = writeln!(csv, "gns,{}", num(report.gns_residual));
    let _ = writeln!(text, "{:<10} {}", "gns", num(report.gns_residual));
    for (g, r) in &report.residuals {
        let _ = writeln!(csv, "{g},{}", num(*r));
        let _ = writeln!(text, "{g:<10} {}", num(*r));
    }
    let _ = writeln!(text, "implication holds: {}\nverdict: {verdict}", report.implication_holds);
    Ok(Rendered {
        payload: json!({
            "channel": channel.label(),
            "sigma": matrix_to_rows(sigma.matrix()),
            "sigma_source": source,
            "gns_residual": report.gns_residual,
            "residuals": report.residuals,
            "gns_balanced": report.gns_balanced,
            "implication_holds": report.implication_holds,
            "verdict": verdict,
        }),
        diagnostics: json!({ "balanced_tol": BALANCED_TOL, "implied_tol": IMPLIED_TOL }),
        csv,
        text,
    })
}

fn status(v: impl Serialize) -> String {
    to_value(&v).as_str().unwrap_or("?").to_string()
}

pub fn experiment(channel: &QuantumChannel, specs: &[FDivergenceSpec], gs: &[StandardMonotoneFn], opts: &ExperimentOptions) -> Result<Rendered, CliError> {
    let report: ExperimentReport = contraction_experiment(channel, specs, gs, opts)?;
    let mut text = format!("channel {} (dim {}), spectral gap {}\n", report.channel_label, report.dim, num(report.spectral_gap));
    let _ = writeln!(text, "n0 {}", report.n0.map_or_else(|| "-".into(), |n| n.to_string()));
    let mut header = vec!["n".to_string()];
    header.extend(report.families.iter().map(|f| format!("root_{f}")));
    header.extend(report.gs.iter().map(|g| format!("chi2_{g}_power")));
    let _ = writeln!(text, "{}", header.join("  "));
    for row in &report.rows {
        let mut cells = vec![row.n.to_string()];
        cells.extend(row.eta_f.iter().map(|e| num(e.eta_root)));
        cells.extend(row.chi2.iter().map(|c| num(c.eta_power)));
        let _ = writeln!(text, "{}", cells.join("  "));
    }
    let _ = writeln!(text, "rate bound per g:");
    if let Some(first) = report.rows.first() {
        for c in &first.chi2 {
            let _ = writeln!(text, "  {} {}", c.g_name, num(c.eta_single));
        }
    }
    let ub = &report.upper_bound;
    let _ = writeln!(text, "upper bound: {} (worst margin {})", status(ub.status), opt_num(ub.worst_margin));
    for p in &report.power_tightness {
        let _ = writeln!(text, "power tightness {}: {} (db residual {})", p.g_name, status(p.status), num(p.db_residual));
    }
    for t in &report.tightness {
        let _ = writeln!(
            text,
            "tightness {}_{}: {} (kappa {}, lower margin {})",
            t.family,
            t.f_name,
            status(t.status),
            t.kappa,
            opt_num(t.min_lower_margin)
        );
    }
    let csv = report.to_csv();
    let valid: Vec<usize> = report.rows.iter().flat_map(|r| r.eta_f.iter().map(|e| e.valid_restarts)).collect();
    Ok(Rendered {
        diagnostics: json!({
            "restarts": report.restarts,
            "min_valid_restarts": valid.iter().min(),
            "slack": report.slack,
            "csv_schema_version": report.csv_schema_version,
        }),
        payload: to_value(&report),
        csv,
        text,
    })
}

pub fn catalog(name: Option<&str>) -> Rendered {
    let keep = |n: &str| name.is_none_or(|want| want == n);
    let fs: Vec<Value> = f_catalog()
        .into_iter()
        .filter(|f| keep(&f.name))
        .map(|f| {
            json!({
                "name": f.name,
                "operator_convex": f.operator_convex,
                "pinsker_constant": f.pinsker_constant,
                "f2_at_one": f.f2(1.0),
            })
        })
        .collect();
    let mut all_g = g_catalog();
    all_g.push(StandardMonotoneFn::gns());
    let gs: Vec<Value> = all_g
        .into_iter()
        .filter(|g| keep(&g.name))
        .map(|g| json!({ "name": g.name, "standard": g.standard, "g_at_2": g.eval(2.0) }))
        .collect();
    let mut csv = String::from("kind,name,operator_convex,pinsker_constant,standard\n");
    let mut text = String::from("f generators\n");
    for f in &fs {
        let pc = f["pinsker_constant"].as_f64();
        let _ = writeln!(csv, "f,{},{},{},", f["name"].as_str().unwrap_or(""), f["operator_convex"], pc.map_or(String::new(), num));
        let _ = writeln!(
            text,
            "  {:<12} operator convex: {:<5} pinsker constant: {}",
            f["name"].as_str().unwrap_or(""),
            f["operator_convex"],
            opt_num(pc)
        );
    }
    text.push_str("g weights (convention g(1/x) = x g(x))\n");
    for g in &gs {
        let _ = writeln!(csv, "g,{},,,{}", g["name"].as_str().unwrap_or(""), g["standard"]);
        let _ = writeln!(text, "  {:<12} standard: {}", g["name"].as_str().unwrap_or(""), g["standard"]);
    }
    Rendered {
        payload: json!({
            "f": fs,
            "g": gs,
            "symmetry_convention": "g(1/x) = x g(x), g(1) = 1",
        }),
        diagnostics: json!({}),
        csv,
        text,
    }
}
