use std::f64::consts::PI;
use std::fs;

use nalgebra::DMatrix;
use ptchain::ep::{ep_contour, ep_indicator, ep_surface_ssh};
use ptchain::inclusion::{bracket_real_eigenvalues, broken_phase_certificate, cassini_ovals};
use ptchain::lattice::{
    check_pt_symmetry, pt_constraints_hold, spec_from_json, ssh_bonds, DefectConfig,
    HamiltonianSpec, SshChain,
};
use ptchain::metric::{
    c_operator, equivalent_hermitian, intertwiner_nn, nn_defect_params, omega_sqrt,
};
use ptchain::oracle::{dense_eigenvalues, spec_eigenvalues};
use ptchain::roots::multiset_distance;
use ptchain::spectra::{
    closed_form_defect, closed_form_spectrum, eigensystem, spectrum, ClosedFormCase, Phase,
    SpectrumOptions,
};
use ptchain::C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::output::{emit, json, matrix, num, opt, Csv};
use crate::{ChainArgs, Cli, CliError, Command, Format, Global};

type Res<T> = Result<T, CliError>;

pub fn run(cli: &Cli) -> Res<()> {
    let g = &cli.global;
    let text = match &cli.command {
        Command::Spectrum { chain, vectors } => spectrum_cmd(g, chain, *vectors)?,
        Command::Metric { chain, re_z } => metric_cmd(g, chain, *re_z)?,
        Command::Verify { chain } => return verify_cmd(g, chain),
        Command::EpContour { n, theta_steps, t1 } => ep_contour_cmd(g, *n, *theta_steps, *t1)?,
        Command::EpSurface {
            n,
            t1,
            t2,
            delta_range,
        } => ep_surface_cmd(g, *n, &t1.values(), *t2, &delta_range.values())?,
        Command::ClosedForm { m, t1, row } => closed_form_cmd(g, *m, *t1, *row)?,
        Command::PhaseDiagram {
            chain,
            delta_range,
            gamma_range,
        } => return phase_diagram_cmd(g, chain, &delta_range.values(), &gamma_range.values()),
    };
    emit(&text, g.out.as_deref())
}

fn format(g: &Global, default: Format) -> Format {
    g.format.unwrap_or(default)
}

fn options(g: &Global) -> SpectrumOptions {
    SpectrumOptions {
        tol_real: g.tol_real,
        tol_root: g.tol_root,
        ..SpectrumOptions::default()
    }
}

fn label<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default()
}

/// t for a uniform chain, t2 for an SSH chain; 1 with --raw.
fn energy_unit(g: &Global, spec: &HamiltonianSpec) -> f64 {
    if g.raw {
        return 1.0;
    }
    let t = if spec.n >= 3 {
        spec.t[1]
    } else {
        spec.t.first().copied().unwrap_or(1.0)
    };
    if t == 0.0 {
        1.0
    } else {
        t.abs()
    }
}

pub fn load_spec(g: &Global, chain: &ChainArgs) -> Res<HamiltonianSpec> {
    let invalid = |e: ptchain::Error| CliError::Input(e.to_string());
    if let Some(path) = &g.spec {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        return spec_from_json(&text).map_err(invalid);
    }
    let n = chain
        .n
        .ok_or_else(|| CliError::Input("need --spec or --n".into()))?;
    if n < 2 {
        return Err(CliError::Input(format!("need n >= 2, got {n}")));
    }
    let t2 = chain.t2.unwrap_or(chain.t1);
    let spec = HamiltonianSpec::open(ssh_bonds(n, chain.t1, t2), vec![C64::new(0.0, 0.0); n])
        .map_err(invalid)?;
    if chain.delta == 0.0 && chain.gamma == 0.0 {
        return Ok(spec);
    }
    spec.with_defect(DefectConfig::new(chain.m, chain.delta, chain.gamma))
        .map_err(invalid)
}

#[derive(Serialize)]
struct ClusterOut {
    center: C64,
    algebraic: usize,
    geometric: usize,
}

#[derive(Serialize)]
struct VectorOut {
    eigenvalue: C64,
    components: Vec<C64>,
    residual: f64,
    defective: bool,
}

#[derive(Serialize)]
struct SpectrumOut {
    n: usize,
    unit: f64,
    phase: Phase,
    real_count: usize,
    eigenvalues: Vec<C64>,
    clusters: Vec<ClusterOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eigenvectors: Option<Vec<VectorOut>>,
}

fn spectrum_cmd(g: &Global, chain: &ChainArgs, vectors: bool) -> Res<String> {
    let spec = load_spec(g, chain)?;
    let unit = energy_unit(g, &spec);
    let (rep, vecs) = if vectors {
        let (r, v) = eigensystem(&spec, &options(g))?;
        (r, Some(v))
    } else {
        (spectrum(&spec, &options(g))?, None)
    };
    let clusters: Vec<ClusterOut> = rep
        .clusters
        .iter()
        .map(|c| ClusterOut {
            center: c.center / unit,
            algebraic: c.algebraic,
            geometric: c.geometric,
        })
        .collect();
    Ok(match format(g, Format::Json) {
        Format::Json => json(&SpectrumOut {
            n: spec.n,
            unit,
            phase: rep.phase,
            real_count: rep.real_count,
            eigenvalues: rep.eigenvalues.iter().map(|z| z / unit).collect(),
            clusters,
            eigenvectors: vecs.map(|v| {
                v.into_iter()
                    .map(|e| VectorOut {
                        eigenvalue: e.eigenvalue / unit,
                        components: e.components,
                        residual: e.residual,
                        defective: e.defective,
                    })
                    .collect()
            }),
        }),
        Format::Csv => {
            let mut csv = Csv::new(&["re", "im", "algebraic", "geometric"]);
            for c in &clusters {
                csv.row(&[
                    num(c.center.re),
                    num(c.center.im),
                    c.algebraic.to_string(),
                    c.geometric.to_string(),
                ]);
            }
            csv.finish()
        }
    })
}

#[derive(Serialize)]
struct MetricOut {
    m: usize,
    t_m: f64,
    z: C64,
    unit: f64,
    positive_definite: bool,
    intertwining_residual: f64,
    #[serde(rename = "M")]
    metric: Vec<Vec<[f64; 2]>>,
    #[serde(rename = "Omega")]
    omega: Vec<Vec<[f64; 2]>>,
    #[serde(rename = "Omega_inv")]
    omega_inv: Vec<Vec<[f64; 2]>>,
    h: Vec<Vec<[f64; 2]>>,
    #[serde(rename = "C")]
    c: Vec<Vec<[f64; 2]>>,
}

fn metric_cmd(g: &Global, chain: &ChainArgs, re_z: f64) -> Res<String> {
    let spec = load_spec(g, chain)?;
    let unit = energy_unit(g, &spec);
    let fam = intertwiner_nn(&spec, re_z)?;
    let om = omega_sqrt(&fam)?;
    let h = equivalent_hermitian(&spec, &fam)?.dense() / C64::new(unit, 0.0);
    let c = c_operator(&spec)?;
    let mats = [
        ("M", &fam.matrix),
        ("Omega", &om.omega),
        ("Omega_inv", &om.inverse),
        ("h", &h),
        ("C", &c),
    ];
    Ok(match format(g, Format::Json) {
        Format::Json => json(&MetricOut {
            m: fam.m,
            t_m: fam.t_m,
            z: fam.z,
            unit,
            positive_definite: fam.is_positive_definite(),
            intertwining_residual: fam.intertwining_residual(&spec.dense()),
            metric: matrix(&fam.matrix),
            omega: matrix(&om.omega),
            omega_inv: matrix(&om.inverse),
            h: matrix(&h),
            c: matrix(&c),
        }),
        Format::Csv => {
            let mut csv = Csv::new(&["matrix", "row", "col", "re", "im"]);
            for (name, m) in mats {
                for i in 0..m.nrows() {
                    for j in 0..m.ncols() {
                        csv.row(&[
                            name.into(),
                            i.to_string(),
                            j.to_string(),
                            num(m[(i, j)].re),
                            num(m[(i, j)].im),
                        ]);
                    }
                }
            }
            csv.finish()
        }
    })
}

#[derive(Serialize)]
struct Check {
    name: String,
    passed: bool,
    detail: String,
}

fn push(checks: &mut Vec<Check>, name: &str, passed: bool, detail: String) {
    checks.push(Check {
        name: name.into(),
        passed,
        detail,
    });
}

fn below(name: &str, value: f64, limit: f64) -> Check {
    Check {
        name: name.into(),
        passed: value < limit,
        detail: format!("{value:e} < {limit:e}"),
    }
}

fn verify_checks(g: &Global, spec: &HamiltonianSpec) -> Vec<Check> {
    let mut checks = Vec::new();
    let h = spec.dense();
    let scale = 1.0 + h.norm();
    let oracle = spec_eigenvalues(spec);
    push(
        &mut checks,
        "pt-symmetry",
        check_pt_symmetry(spec),
        String::new(),
    );
    match eigensystem(spec, &options(g)) {
        Ok((rep, vecs)) => {
            let worst = vecs.iter().map(|v| v.residual).fold(0.0, f64::max);
            checks.push(below(
                "eigenvector-residual",
                worst,
                options(g).tol_residual.max(f64::MIN_POSITIVE),
            ));
            checks.push(below(
                "spectrum-vs-dense",
                multiset_distance(&rep.eigenvalues, &oracle),
                1e-6 * scale,
            ));
            if pt_constraints_hold(spec) {
                let conj: Vec<C64> = rep.eigenvalues.iter().map(|z| z.conj()).collect();
                checks.push(below(
                    "conjugate-pairs",
                    multiset_distance(&rep.eigenvalues, &conj),
                    1e-6 * scale,
                ));
            }
        }
        Err(e) => push(&mut checks, "eigensystem", false, e.to_string()),
    }
    if let Ok((_, t_m, gamma)) = nn_defect_params(spec) {
        if gamma.abs() < t_m.abs() {
            metric_checks(spec, &h, &oracle, &mut checks);
        }
    }
    if let Some(chain) = SshChain::from_spec(spec) {
        inclusion_checks(&chain, &oracle, &mut checks);
    }
    checks
}

fn metric_checks(
    spec: &HamiltonianSpec,
    h: &DMatrix<C64>,
    oracle: &[C64],
    checks: &mut Vec<Check>,
) {
    let run = || -> ptchain::Result<Vec<Check>> {
        let fam = intertwiner_nn(spec, 0.0)?;
        let om = omega_sqrt(&fam)?;
        let herm = equivalent_hermitian(spec, &fam)?;
        let c = c_operator(spec)?;
        let id = DMatrix::<C64>::identity(spec.n, spec.n);
        let scale = 1.0 + h.norm();
        Ok(vec![
            below("metric-intertwining", fam.intertwining_residual(h), 1e-12),
            below(
                "metric-square-root",
                (&om.omega * &om.omega - &fam.matrix).norm(),
                1e-12,
            ),
            below(
                "hermitian-partner-spectrum",
                multiset_distance(&dense_eigenvalues(&herm.dense()), oracle),
                1e-9 * scale,
            ),
            below("c-involution", (&c * &c - &id).norm(), 1e-10),
            below("c-commutes", (&c * h - h * &c).norm(), 1e-10 * scale),
        ])
    };
    match run() {
        Ok(v) => checks.extend(v),
        Err(e) => push(checks, "metric", false, e.to_string()),
    }
}

fn inclusion_checks(chain: &SshChain, oracle: &[C64], checks: &mut Vec<Check>) {
    if let Ok(certs) = bracket_real_eigenvalues(chain) {
        let bad: Vec<String> = certs
            .iter()
            .filter_map(|c| {
                let count = oracle
                    .iter()
                    .filter(|e| e.im.abs() < 1e-7 && e.re > c.lo && e.re < c.hi)
                    .count();
                (count != c.guaranteed_count).then(|| format!("({}, {}) holds {count}", c.lo, c.hi))
            })
            .collect();
        push(
            checks,
            "interval-certificates",
            bad.is_empty(),
            format!("{} certificates {}", certs.len(), bad.join("; ")),
        );
    }
    match cassini_ovals(chain) {
        Ok(ovals) => {
            let outside = oracle
                .iter()
                .filter(|e| !ovals.iter().any(|o| o.contains(**e)))
                .count();
            push(
                checks,
                "cassini-inclusion",
                outside == 0,
                format!("{outside} eigenvalues outside"),
            );
        }
        Err(e) => push(checks, "cassini-inclusion", false, e.to_string()),
    }
    if broken_phase_certificate(chain) {
        let nonreal = oracle.iter().filter(|e| e.im.abs() > 1e-7).count();
        push(
            checks,
            "broken-phase-certificate",
            nonreal >= 2,
            format!("{nonreal} nonreal eigenvalues"),
        );
    }
}

#[derive(Serialize)]
struct VerifyOut {
    passed: bool,
    checks: Vec<Check>,
}

fn verify_cmd(g: &Global, chain: &ChainArgs) -> Res<()> {
    let spec = load_spec(g, chain)?;
    let checks = verify_checks(g, &spec);
    let passed = checks.iter().all(|c| c.passed);
    let text = match format(g, Format::Json) {
        Format::Json => json(&VerifyOut { passed, checks }),
        Format::Csv => {
            let mut csv = Csv::new(&["check", "passed", "detail"]);
            for c in &checks {
                csv.row(&[
                    c.name.clone(),
                    c.passed.to_string(),
                    c.detail.replace(',', ";"),
                ]);
            }
            csv.finish()
        }
    };
    emit(&text, g.out.as_deref())?;
    if passed {
        Ok(())
    } else {
        Err(CliError::Math("some checks failed".into()))
    }
}

#[derive(Serialize)]
struct ContourRow {
    theta: f64,
    delta: f64,
    gamma: f64,
    indicator: f64,
    order: usize,
    kind: String,
    eigenvalue: C64,
    crossings: usize,
}

#[derive(Serialize)]
struct ContourOut {
    n: usize,
    points: Vec<ContourRow>,
    skipped: Vec<f64>,
    diagnostics: Vec<String>,
}

fn ep_contour_cmd(g: &Global, n: usize, steps: usize, t: f64) -> Res<String> {
    if steps < 2 {
        return Err(CliError::Input(format!(
            "need --theta-steps >= 2, got {steps}"
        )));
    }
    if !(t > 0.0) {
        return Err(CliError::Input(format!("need t > 0, got {t}")));
    }
    let grid: Vec<f64> = (1..steps).map(|j| j as f64 * PI / steps as f64).collect();
    let cont = ep_contour(n, &grid, 1e-14)?;
    for d in &cont.diagnostics {
        eprintln!("ptchain: {d}");
    }
    let unit = if g.raw { t } else { 1.0 };
    let points: Vec<ContourRow> = cont
        .points
        .iter()
        .map(|p| ContourRow {
            theta: p.theta,
            delta: p.delta * unit,
            gamma: p.gamma * unit,
            indicator: ep_indicator(n, C64::new(p.delta, p.gamma)).unwrap_or(f64::NAN),
            order: p.order,
            kind: label(&p.kind),
            eigenvalue: p.eigenvalue * unit,
            crossings: p.crossings,
        })
        .collect();
    Ok(match format(g, Format::Csv) {
        Format::Json => json(&ContourOut {
            n,
            points,
            skipped: cont.skipped,
            diagnostics: cont.diagnostics,
        }),
        Format::Csv => {
            let mut csv = Csv::new(&["theta", "delta", "gamma", "indicator", "order", "kind"]);
            for p in &points {
                csv.row(&[
                    num(p.theta),
                    num(p.delta),
                    num(p.gamma),
                    num(p.indicator),
                    p.order.to_string(),
                    p.kind.clone(),
                ]);
            }
            csv.finish()
        }
    })
}

fn ep_surface_cmd(g: &Global, n: usize, t1: &[f64], t2: f64, deltas: &[f64]) -> Res<String> {
    if !(t2 > 0.0) {
        return Err(CliError::Input(format!("need t2 > 0, got {t2}")));
    }
    // command-line values are in units of t2 unless --raw
    let (to_ratio, unit) = if g.raw { (1.0 / t2, t2) } else { (1.0, 1.0) };
    let ratios: Vec<f64> = t1.iter().map(|x| x * to_ratio).collect();
    let ds: Vec<f64> = deltas.iter().map(|x| x * to_ratio).collect();
    let mut s = ep_surface_ssh(n, &ratios, &ds)?;
    for x in &mut s.samples {
        x.delta *= unit;
        x.gamma = x.gamma.map(|v| v * unit);
        x.eigenvalue = x.eigenvalue.map(|v| v * unit);
    }
    Ok(match format(g, Format::Csv) {
        Format::Json => json(&s),
        Format::Csv => {
            let mut csv = Csv::new(&["t1_over_t2", "delta", "gamma", "order"]);
            for x in &s.samples {
                csv.row(&[
                    num(x.t1_over_t2),
                    num(x.delta),
                    opt(x.gamma),
                    x.order.to_string(),
                ]);
            }
            csv.finish()
        }
    })
}

#[derive(Serialize)]
struct ClosedFormOut {
    row: Option<u8>,
    z: Option<C64>,
    closed_form: Vec<C64>,
    computed: Vec<C64>,
    distance: f64,
}

fn closed_form_cmd(g: &Global, m: usize, t: f64, row: Option<u8>) -> Res<String> {
    let mut records = Vec::new();
    if let Some(path) = &g.spec {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let spec = spec_from_json(&text).map_err(|e| CliError::Input(e.to_string()))?;
        let chain = SshChain::from_spec(&spec)
            .ok_or_else(|| CliError::Input("spec is not an SSH chain".into()))?;
        let unit = energy_unit(g, &spec);
        let exact = closed_form_spectrum(ClosedFormCase::SshExact(chain))?;
        let computed = spectrum(&spec, &options(g))?.eigenvalues;
        records.push(ClosedFormOut {
            row: None,
            z: None,
            distance: multiset_distance(&exact, &computed) / unit,
            closed_form: exact.iter().map(|z| z / unit).collect(),
            computed: computed.iter().map(|z| z / unit).collect(),
        });
    } else {
        if m == 0 || !(t > 0.0) {
            return Err(CliError::Input(format!(
                "need m >= 1 and t > 0, got m = {m}, t = {t}"
            )));
        }
        let rows: Vec<u8> = match row {
            Some(r) if (1..=5).contains(&r) => vec![r],
            Some(r) => return Err(CliError::Input(format!("row must be 1..=5, got {r}"))),
            None => (1..=5).collect(),
        };
        let unit = if g.raw { 1.0 } else { t };
        for r in rows {
            let z = closed_form_defect(r, t)?;
            let spec = HamiltonianSpec::uniform(2 * m, t)?
                .with_defect(DefectConfig::new(m, z.re, z.im))?;
            let exact = closed_form_spectrum(ClosedFormCase::Uniform { row: r, m, t })?;
            let computed = spectrum(&spec, &options(g))?.eigenvalues;
            records.push(ClosedFormOut {
                row: Some(r),
                z: Some(z / unit),
                distance: multiset_distance(&exact, &computed) / unit,
                closed_form: exact.iter().map(|z| z / unit).collect(),
                computed: computed.iter().map(|z| z / unit).collect(),
            });
        }
    }
    Ok(match format(g, Format::Json) {
        Format::Json => json(&records),
        Format::Csv => {
            let mut csv = Csv::new(&["row", "re", "im", "distance"]);
            for r in &records {
                for z in &r.closed_form {
                    csv.row(&[
                        r.row.map(|x| x.to_string()).unwrap_or_default(),
                        num(z.re),
                        num(z.im),
                        num(r.distance),
                    ]);
                }
            }
            csv.finish()
        }
    })
}

#[derive(Serialize)]
struct Node {
    delta: f64,
    gamma: f64,
    phase: String,
    real_count: Option<usize>,
}

fn phase_diagram_cmd(g: &Global, chain: &ChainArgs, deltas: &[f64], gammas: &[f64]) -> Res<()> {
    let base = load_spec(g, chain)?;
    let unit = energy_unit(g, &base);
    let nodes: Vec<(f64, f64)> = deltas
        .iter()
        .flat_map(|&d| gammas.iter().map(move |&gm| (d, gm)))
        .collect();
    let opts = options(g);
    let results: Vec<(Node, Option<String>)> = nodes
        .par_iter()
        .map(|&(d, gm)| {
            let rep = base
                .clone()
                .with_defect(DefectConfig::new(chain.m, d * unit, gm * unit))
                .and_then(|s| spectrum(&s, &opts));
            match rep {
                Ok(r) => (
                    Node {
                        delta: d,
                        gamma: gm,
                        phase: label(&r.phase),
                        real_count: Some(r.real_count),
                    },
                    None,
                ),
                Err(e) => (
                    Node {
                        delta: d,
                        gamma: gm,
                        phase: "failed".into(),
                        real_count: None,
                    },
                    Some(format!("delta = {d}, gamma = {gm}: {e}")),
                ),
            }
        })
        .collect();
    let failures: Vec<&String> = results.iter().filter_map(|(_, e)| e.as_ref()).collect();
    for f in &failures {
        eprintln!("ptchain: {f}");
    }
    let text = match format(g, Format::Csv) {
        Format::Json => json(&results.iter().map(|(n, _)| n).collect::<Vec<_>>()),
        Format::Csv => {
            let mut csv = Csv::new(&["delta", "gamma", "phase", "real_count"]);
            for (n, _) in &results {
                csv.row(&[
                    num(n.delta),
                    num(n.gamma),
                    n.phase.clone(),
                    n.real_count.map(|c| c.to_string()).unwrap_or_default(),
                ]);
            }
            csv.finish()
        }
    };
    emit(&text, g.out.as_deref())?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Math(format!(
            "{} grid nodes failed",
            failures.len()
        )))
    }
}
