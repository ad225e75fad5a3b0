//! Dispatch of a validated configuration to the numerical modules.

use super::config::*;
use super::output::{envelope, Table};
use crate::anharmonic::{
    anharmonic_ground, convergence_study, correction_series, dirichlet_ball_eigenvalue, large_coupling_ground, two_sided_check,
};
use crate::controllability::{
    ball_complement_bracket, fractional_subspace, gaussian_necessity_probe, grushin_mode_spectrum, hum_control, leading_subspace,
    minimal_time_lower, minimal_time_upper, nonobservability_witness, observability_constant, regime_classify, scaling_defect,
    shubin_regime, GrushinParams, ObservabilityInput,
};
use crate::error::{Error, Result};
use crate::geometry::{besicovitch_cover, check_density, construct_example_set, thickness_check};
use crate::inequalities::{
    calibrate_bernstein, calibrate_constants, class_key, verify_spectral_inequality, Battery, BoundConstants, BoundReport,
    CalibrationTable, Verdict,
};
use crate::logval::LogValue;
use crate::spectral_core::{eigendecompose, eigendecompose_up_to, SpectralModel};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use serde_json::{json, Value};

/// Everything a command produces before it is written out.
#[derive(Debug, Clone)]
pub struct Outcome {
    /// JSON report, already wrapped with config, provenance and version.
    pub report: Value,
    /// Plot-ready columns, for commands that have them.
    pub table: Option<Table>,
    /// Some verdict came back `violated`.
    pub violated: bool,
}

fn invalid(e: impl std::fmt::Display) -> Error {
    Error::InvalidParameter(e.to_string())
}

fn read_json<T: for<'de> serde::Deserialize<'de>>(path: &str) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("{path}: {e}")))?;
    serde_json::from_str(&text).map_err(|e| invalid(format!("{path}: {e}")))
}

struct Produced {
    result: Value,
    table: Option<Table>,
    provenance: Option<Value>,
    violated: bool,
}

fn produced<T: Serialize>(result: &T) -> Result<Produced> {
    Ok(Produced { result: serde_json::to_value(result).map_err(invalid)?, table: None, provenance: None, violated: false })
}

pub fn execute(config: &ExperimentConfig) -> Result<Outcome> {
    let p = match config.command {
        Command::Eig => eig(config.parse_params()?)?,
        Command::Projector => projector(config.parse_params()?)?,
        Command::Geometry => geometry(config.parse_params()?)?,
        Command::VerifyIneq => verify(config.parse_params()?)?,
        Command::Calibrate => calibrate(config.parse_params()?)?,
        Command::ObsConst => obs_const(config.parse_params()?)?,
        Command::Hum => hum(config.parse_params()?, config.seed)?,
        Command::Grushin => grushin(config.parse_params()?)?,
        Command::Asymptotics => asymptotics(config.parse_params()?)?,
    };
    let cfg = serde_json::to_value(config).map_err(invalid)?;
    Ok(Outcome { report: envelope(&p.result, &cfg, p.provenance)?, table: p.table, violated: p.violated })
}

fn eig(p: EigParams) -> Result<Produced> {
    if p.n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    let dec = eigendecompose(&p.model(), p.n)?;
    let values: Vec<f64> = dec.eigenvalues[..p.n].to_vec();
    let drift: Vec<f64> = (0..p.n).map(|j| dec.drift(j)).collect();
    let mut out = produced(&json!({
        "eigenvalues": values,
        "drift": drift,
        "basis_size": dec.basis_size,
        "convergence_tol": dec.convergence_tol,
    }))?;
    out.table = Some(Table { header: None, rows: vec![values] });
    Ok(out)
}

fn projector(p: ProjectorParams) -> Result<Produced> {
    let s = p.s.unwrap_or(1.0);
    if !(s > 0.0) || !(p.lambda >= 0.0) {
        return Err(invalid("need s > 0 and lambda ≥ 0"));
    }
    let threshold = p.lambda.powf(1.0 / s);
    let mut model = SpectralModel::new(p.k, p.m, p.d);
    if let Some(a) = p.basis_scale {
        model.basis_scale = a;
    }
    let dec = eigendecompose_up_to(&model, threshold)?;
    let sub = fractional_subspace(&dec, s, p.lambda)?;
    let mut table = Table::with_header(&["index", "eigenvalue"]);
    for (j, e) in sub.members.iter().zip(&sub.eigenvalues) {
        table.push(vec![*j as f64, *e]);
    }
    let mut out = produced(&json!({
        "lambda": p.lambda,
        "s": s,
        "threshold": threshold,
        "dim": sub.dim(),
        "members": sub.members,
        "eigenvalues": sub.eigenvalues,
    }))?;
    out.table = Some(table);
    Ok(out)
}

fn geometry(p: GeometryParams) -> Result<Produced> {
    match p {
        GeometryParams::Density { set, profile, sample } => {
            produced(&check_density(&set, &profile, &sample.unwrap_or_default())?)
        }
        GeometryParams::Thickness { set, theta, l, sample } => {
            produced(&thickness_check(&set, theta, l, &sample.unwrap_or_default())?)
        }
        GeometryParams::Cover { centre, radius, rho, k_bes } => produced(&besicovitch_cover(&centre, radius, &rho, k_bes)?),
        GeometryParams::Example { example } => produced(&construct_example_set(&example)?),
    }
}

fn bound_rows(reports: &[BoundReport]) -> Table {
    let mut t = Table::with_header(&["lambda", "log_bound", "log_ratio"]);
    for r in reports {
        t.push(vec![r.lambda, r.theoretical_bound.ln, r.log_ratio]);
    }
    t
}

fn constants_for(table: Option<&CalibrationTable>, k: usize, m: usize, d: usize) -> BoundConstants {
    table.and_then(|t| t.get(k, m, d)).cloned().unwrap_or_else(|| BoundConstants::default_for(k, m, d))
}

fn verify(p: VerifyParams) -> Result<Produced> {
    let table: Option<CalibrationTable> = p.calibration.as_deref().map(read_json).transpose()?;
    let mut reports = Vec::new();
    let mut cases = Vec::new();
    let mut warnings = Vec::new();
    match (&p.battery, &p.model, &p.profile, &p.set, &p.lambdas) {
        (Some(path), None, None, None, None) => {
            let battery: Battery = read_json(path)?;
            for c in &battery.cases {
                let consts = constants_for(table.as_ref(), c.model.k, c.model.m, c.model.d);
                let v = verify_spectral_inequality(&c.model, &c.profile, &c.set, &[c.lambda], &consts)?;
                warnings.extend(v.warnings.iter().map(|w| format!("{}: {w}", c.id)));
                cases.push(c.id.clone());
                reports.extend(v.reports);
            }
        }
        (None, Some(model), Some(profile), Some(set), Some(lambdas)) => {
            let consts = constants_for(table.as_ref(), model.k, model.m, model.d);
            let v = verify_spectral_inequality(model, profile, set, lambdas, &consts)?;
            warnings = v.warnings;
            reports = v.reports;
        }
        _ => return Err(invalid("verify-ineq takes either a battery or all of model, profile, set and lambdas")),
    }
    let violations = reports.iter().filter(|r| r.verdict == Verdict::Violated).count();
    let uncalibrated = reports.iter().filter(|r| r.verdict == Verdict::CalibrationNeeded).count();
    let provenance = match &table {
        Some(t) => json!({"kind": "fitted", "battery_id": t.battery_id}),
        None => json!({"kind": "default"}),
    };
    Ok(Produced {
        table: Some(bound_rows(&reports)),
        result: json!({
            "cases": cases,
            "reports": reports,
            "violations": violations,
            "calibration_needed": uncalibrated,
            "warnings": warnings,
        }),
        provenance: Some(provenance),
        violated: violations > 0,
    })
}

fn calibrate(p: CalibrateParams) -> Result<Produced> {
    let battery: Battery = read_json(&p.battery)?;
    let mut table = calibrate_constants(&battery)?;
    let mut bernstein = Value::Null;
    if let Some(b) = p.bernstein {
        let lmax = b.lambdas.iter().copied().fold(0.0, f64::max);
        let dec = eigendecompose_up_to(&SpectralModel::new(b.k, b.m, 1), lmax)?;
        let fit = calibrate_bernstein(&dec, &b.lambdas, b.n_max, &b.deltas, b.c)?;
        if let Some(entry) = table.classes.get_mut(&class_key(b.k, b.m, 1)) {
            entry.bern_c_big = fit.bern_c_big;
            entry.bern_c = fit.bern_c;
            entry.c_prime = fit.c_prime;
        }
        bernstein = serde_json::to_value(&fit).map_err(invalid)?;
    }
    let provenance = json!({"kind": "fitted", "battery_id": table.battery_id});
    let mut result = serde_json::to_value(&table).map_err(invalid)?;
    result["bernstein"] = bernstein;
    Ok(Produced { result, table: None, provenance: Some(provenance), violated: false })
}

fn log_json(v: LogValue) -> Value {
    json!({"ln": v.ln, "decades": v.decades(), "value": v.value(), "astronomical": v.is_astronomical()})
}

fn obs_const(p: ObsParams) -> Result<Produced> {
    match p {
        ObsParams::Constant { d0, d1, eta, t, c1, c2, c3 } => {
            let c = observability_constant(&ObservabilityInput { d0, d1, eta, t, c1, c2, c3 })?;
            let mut out = produced(&json!({"constant": log_json(c)}))?;
            out.provenance = Some(json!({"kind": "user"}));
            Ok(out)
        }
        ObsParams::ShubinRegime { k, m, s, profile } => produced(&shubin_regime(k, m, s.exact()?, &profile)?),
    }
}

fn hum(p: HumParams, seed: u64) -> Result<Produced> {
    let model = SpectralModel::new(p.k, p.m, p.set.dim());
    let dec = eigendecompose(&model, p.dim)?;
    let sub = leading_subspace(&dec, p.dim)?;
    let data: Vec<Vec<f64>> = match &p.f0 {
        Some(f) => vec![f.clone()],
        None => {
            if p.samples == 0 {
                return Err(invalid("samples must be at least 1"));
            }
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            (0..p.samples)
                .map(|_| {
                    let v: Vec<f64> = (0..p.dim).map(|_| StandardNormal.sample(&mut rng)).collect();
                    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    v.into_iter().map(|x| x / n).collect()
                })
                .collect()
        }
    };
    let mut runs = Vec::new();
    let mut table = Table::with_header(&["sample", "initial_norm", "final_norm", "cost", "gramian_cost"]);
    for (i, f0) in data.iter().enumerate() {
        let run = hum_control(&sub, p.s, &p.set, p.t, f0, p.time_cells)?;
        let n0 = f0.iter().map(|x| x * x).sum::<f64>().sqrt();
        table.push(vec![i as f64, n0, run.final_norm, run.cost, run.gramian_cost]);
        runs.push(json!({"f0": f0, "run": run}));
    }
    let mut out = produced(&json!({"eigenvalues": sub.eigenvalues, "runs": runs}))?;
    out.table = Some(table);
    Ok(out)
}

fn grushin(op: GrushinOp) -> Result<Produced> {
    match op {
        GrushinOp::Regimes { gamma, s } => {
            let exact = s.exact()?;
            let regime = regime_classify(gamma, exact)?;
            produced(&json!({
                "gamma": gamma,
                "s": exact.to_string(),
                "critical_exponent": (1.0 + gamma as f64) / 2.0,
                "regime": regime,
            }))
        }
        GrushinOp::Spectrum { gamma, s, d, n, levels } => {
            let params = GrushinParams::new(gamma, s, d, levels)?;
            let spec = grushin_mode_spectrum(&params, &n)?;
            produced(&json!({"params": params, "mode": n, "spectrum": spec}))
        }
        GrushinOp::Scaling { gamma, r, basis_size, block } => produced(&scaling_defect(gamma, r, basis_size, block)?),
        GrushinOp::Witness { gamma, s, d, l_dist, t, eps, n_max } => {
            let lg = anharmonic_ground(gamma as usize, d)?;
            let w = nonobservability_witness(gamma, s, lg, l_dist, t, eps, n_max)?;
            let mut table = Table::with_header(&["n", "exponent"]);
            for &(n, e) in &w.exponents {
                table.push(vec![n as f64, e]);
            }
            let mut out = produced(&json!({"lambda_gamma": lg, "witness": w}))?;
            out.table = Some(table);
            Ok(out)
        }
        GrushinOp::Times { gamma, d, dist, theta, l, c_gamma, eps } => {
            let lg = anharmonic_ground(gamma as usize, d)?;
            let lower = minimal_time_lower(gamma, lg, dist)?;
            let upper = match (theta, l) {
                (Some(th), Some(l)) => Some(minimal_time_upper(gamma, lg, th, l, c_gamma)?),
                (None, None) => None,
                _ => return Err(invalid("theta and L go together")),
            };
            let bracket = eps.map(|e| ball_complement_bracket(gamma, d, lg, dist, e, c_gamma)).transpose()?;
            produced(&json!({"lambda_gamma": lg, "lower": lower, "upper": upper, "ball_complement": bracket}))
        }
        GrushinOp::Probe { set, s, t, l, x0, box_half_width } => {
            let pts = gaussian_necessity_probe(&set, s, t, l, &x0, box_half_width)?;
            let mut table = Table::with_header(&["x0", "total_mass", "captured"]);
            for q in &pts {
                table.push(vec![q.x0, q.total_mass, q.captured]);
            }
            let mut out = produced(&json!({"points": pts}))?;
            out.table = Some(table);
            Ok(out)
        }
    }
}

fn asymptotics(op: AsymptoticsOp) -> Result<Produced> {
    match op {
        AsymptoticsOp::Dirichlet { d } => {
            let data = dirichlet_ball_eigenvalue(d)?;
            produced(&json!({
                "d": d,
                "lambda_d": data.lambda_d,
                "phi_boundary": data.phi_boundary,
                "residual": data.residual,
            }))
        }
        AsymptoticsOp::Ground { k, d } => produced(&json!({"k": k, "d": d, "lambda_k": anharmonic_ground(k, d)?})),
        AsymptoticsOp::Bracket { k, d, eps } => {
            let data = dirichlet_ball_eigenvalue(d)?;
            produced(&two_sided_check(k, eps, &data)?)
        }
        AsymptoticsOp::Study { k_grid, d, eps } => {
            let study = convergence_study(&k_grid, d, eps)?;
            let mut table = Table::with_header(&["k", "lambda_k", "upper", "lower_expr"]);
            for r in &study.rows {
                table.push(vec![r.k as f64, r.lambda_k, r.upper, r.lower_expr]);
            }
            let mut out = produced(&study)?;
            out.table = Some(table);
            Ok(out)
        }
        AsymptoticsOp::Coupling { couplings, d } => {
            let data = dirichlet_ball_eigenvalue(d)?;
            let mut table = Table::with_header(&["coupling", "ground"]);
            let mut rows = Vec::new();
            for &c in &couplings {
                let g = large_coupling_ground(c, d)?;
                table.push(vec![c, g]);
                rows.push(json!({"coupling": c, "ground": g, "relative_to_dirichlet": g / data.lambda_d}));
            }
            let mut out = produced(&json!({"lambda_d": data.lambda_d, "rows": rows}))?;
            out.table = Some(table);
            Ok(out)
        }
        AsymptoticsOp::Series { k_grid, d, terms } => {
            let data = dirichlet_ball_eigenvalue(d)?;
            let mut table = Table::with_header(&["k", "quadrature", "printed", "by_parts"]);
            let mut rows = Vec::new();
            for &k in &k_grid {
                let c = correction_series(k, &data, terms)?;
                table.push(vec![k as f64, c.quadrature, c.printed, c.by_parts]);
                rows.push(c);
            }
            let mut out = produced(&json!({"d": d, "rows": rows}))?;
            out.table = Some(table);
            Ok(out)
        }
    }
}
