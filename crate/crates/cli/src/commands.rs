use std::path::{Path, PathBuf};

use finsler_core::liealg::{KVector, ValidatedModel, ValidationReport};
use finsler_core::meanberwald::{self, EijMatrix};
use finsler_core::metric::{self, PhiFamily, PhiSpec, ValidityReport};
use finsler_core::model_io::{self, LoadedModel};
use finsler_core::phicalc::{self, CurvContext, PhiQuantities, QuantityField, VolumeFactor, VolumeForm};
use finsler_core::ratcheck;
use finsler_core::sampling;
use finsler_core::scurvature::{self, IsotropyOptions, IsotropyVerdict, SCurvature, SCurvatureSample};
use finsler_core::Error;
use serde::Serialize;

use crate::{FormArg, Format, ModelArgs};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{path}: {source}")]
    Input { path: PathBuf, source: Error },

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Domain(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } | CliError::Input { .. } | CliError::Usage(_) => 2,
            CliError::Domain(Error::Parse(_)) => 2,
            CliError::Domain(_) => 1,
        }
    }
}

/// Rendered report: `main` goes to stdout or `--out`, `side` to stderr.
#[derive(Debug)]
pub struct Output {
    pub main: String,
    pub side: Option<String>,
    pub code: u8,
}

impl Output {
    fn ok(main: String) -> Self {
        Output { main, side: None, code: 0 }
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn csv_string(header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

fn load(path: &Path) -> Result<LoadedModel, CliError> {
    model_io::load_model(path)
        .map_err(|source| CliError::Io { path: path.to_path_buf(), source })?
        .map_err(|source| CliError::Input { path: path.to_path_buf(), source })
}

pub fn parse_phi_arg(arg: &str) -> Result<PhiSpec, CliError> {
    match arg.strip_prefix('@') {
        Some(path) => {
            let path = PathBuf::from(path);
            let text =
                std::fs::read_to_string(&path).map_err(|source| CliError::Io { path: path.clone(), source })?;
            model_io::parse_phi(&text).map_err(|source| CliError::Input { path, source })
        }
        None => PhiSpec::named(arg).map_err(|e| CliError::Usage(e.to_string())),
    }
}

fn resolve_phi(args: &ModelArgs, loaded: &LoadedModel) -> Result<PhiSpec, CliError> {
    match (&args.phi, &loaded.phi) {
        (Some(arg), _) => parse_phi_arg(arg),
        (None, Some(phi)) => Ok(phi.clone()),
        (None, None) => Err(CliError::Usage("no --phi given and the model file names none".into())),
    }
}

fn parse_direction(text: &str, len: usize) -> Result<KVector, CliError> {
    let coords = text
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| CliError::Usage(format!("bad direction {text:?}: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    if coords.len() != len {
        return Err(CliError::Usage(format!("direction {text:?} has {} coordinates, expected {len}", coords.len())));
    }
    Ok(KVector::new(coords))
}

#[derive(Serialize)]
struct ValidateReport {
    name: Option<String>,
    dim: usize,
    k_dim: usize,
    b: f64,
    passed: bool,
    algebra: ValidationReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    metric: Option<ValidityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    metric_error: Option<String>,
}

pub fn validate(args: &ModelArgs, grid: usize, format: Format) -> Result<Output, CliError> {
    let loaded = load(&args.model)?;
    let m = &loaded.model;
    let algebra = m.validate();
    let phi = match (&args.phi, &loaded.phi) {
        (None, None) => None,
        _ => Some(resolve_phi(args, &loaded)?),
    };
    let (metric, metric_error) = match &phi {
        Some(phi) if m.b() < 1.0 => match metric::shen_validity(phi, m.b(), grid) {
            Ok(r) => (Some(r), None),
            Err(e) => (None, Some(e.to_string())),
        },
        _ => (None, None),
    };
    let passed = algebra.passed() && metric_error.is_none() && metric.as_ref().is_none_or(|r| r.valid);
    let report = ValidateReport {
        name: loaded.name.clone(),
        dim: m.dim(),
        k_dim: m.k_dim(),
        b: m.b(),
        passed,
        algebra,
        metric,
        metric_error,
    };
    let main = match format {
        Format::Json => json(&report),
        Format::Csv => csv_string(
            &["check".into(), "passed".into(), "witness".into(), "detail".into()],
            report.algebra.checks.iter().map(|c| {
                vec![
                    c.name.to_string(),
                    c.passed.to_string(),
                    c.witness.as_ref().map_or(String::new(), |w| format!("{w:?}")),
                    c.detail.clone().unwrap_or_default(),
                ]
            }),
        ),
    };
    let side = (!passed).then(|| {
        let mut reasons = report.algebra.failures();
        if let Some(e) = &report.metric_error {
            reasons.push(e.clone());
        }
        if let Some(r) = report.metric.as_ref().filter(|r| !r.valid) {
            reasons.push(format!("metric is not valid at b = {} (margin {})", r.b, r.margin));
        }
        format!("validation failed: {}", reasons.join("; "))
    });
    Ok(Output { main, side, code: if passed { 0 } else { 1 } })
}

fn validated(loaded: LoadedModel) -> Result<ValidatedModel, CliError> {
    Ok(loaded.model.into_validated()?)
}

#[derive(Serialize)]
struct ScurvReport {
    phi: PhiSpec,
    n: usize,
    b: f64,
    rows: Vec<SCurvatureSample>,
    verdict: IsotropyVerdict,
}

pub fn scurv(
    args: &ModelArgs,
    samples: usize,
    seed: u64,
    tol: f64,
    ys: &[String],
    format: Format,
) -> Result<Output, CliError> {
    if samples == 0 {
        return Err(CliError::Usage("--samples must be at least 1".into()));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(CliError::Usage("--tol must be positive".into()));
    }
    let loaded = load(&args.model)?;
    let phi = resolve_phi(args, &loaded)?;
    let m = validated(loaded)?;
    let eval = SCurvature::new(&m, &phi, args.n)?;
    let directions = if ys.is_empty() {
        sampling::alpha_unit_directions(&m, samples, seed)?
    } else {
        ys.iter().map(|y| parse_direction(y, m.k_dim())).collect::<Result<_, _>>()?
    };
    let rows = eval.sweep(&directions, Default::default())?;
    let verdict = scurvature::isotropy_classify(&eval, IsotropyOptions { samples, seed, tol, ..Default::default() })?;
    let report = ScurvReport { phi, n: eval.n(), b: eval.b(), rows, verdict };
    Ok(match format {
        Format::Json => Output::ok(json(&report)),
        Format::Csv => {
            let nk = m.k_dim();
            let mut header: Vec<String> = (0..nk).map(|i| format!("y{i}")).collect();
            header.extend(["s_general", "s_closed", "residual"].map(String::from));
            let opt = |x: Option<f64>| x.map_or(String::new(), |v| v.to_string());
            let rows = report.rows.iter().map(|r| {
                let mut row: Vec<String> = r.y.coords().iter().map(f64::to_string).collect();
                row.extend([r.s_general.to_string(), opt(r.s_closed), opt(r.residual)]);
                row
            });
            let side = serde_json::to_string(&report.verdict).expect("verdict serializes");
            Output { main: csv_string(&header, rows), side: Some(side), code: 0 }
        }
    })
}

#[derive(Serialize)]
struct EijReport {
    /// Direction as given, in model coordinates.
    y: Vec<f64>,
    /// The same direction in the orthonormal frame the matrices use.
    y_orthonormal: Vec<f64>,
    #[serde(rename = "E_closed")]
    e_closed: Option<EijMatrix>,
    #[serde(rename = "E_numeric")]
    e_numeric: EijMatrix,
    max_residual: Option<f64>,
    h: f64,
    richardson_gap: f64,
    flagged: bool,
}

#[derive(Serialize)]
struct EijRun {
    phi: PhiSpec,
    n: usize,
    /// Columns are the orthonormal basis in model coordinates.
    frame: Vec<Vec<f64>>,
    results: Vec<EijReport>,
}

pub fn eij(args: &ModelArgs, ys: &[String], h: Option<f64>, format: Format) -> Result<Output, CliError> {
    let loaded = load(&args.model)?;
    let phi = resolve_phi(args, &loaded)?;
    let original = validated(loaded)?;
    let (m, p) = original.orthonormalize()?;
    let n = args.n.unwrap_or(m.k_dim());
    let p_inv = p.clone().try_inverse().ok_or(Error::NotPositiveDefinite)?;
    let closed_family = matches!(phi.family(), PhiFamily::Square | PhiFamily::RandersSquare);
    let mut results = Vec::new();
    for text in ys {
        let y = parse_direction(text, m.k_dim())?;
        let y_new = KVector::from(&p_inv * y.to_dvector());
        let numeric = meanberwald::eij_numeric(&m, &phi, n, &y_new, h)?;
        let closed = if closed_family { Some(meanberwald::eij_closed(&m, phi.family(), n, &y_new)?) } else { None };
        let max_residual = closed.as_ref().map(|c| c.max_abs_diff(&numeric.matrix));
        results.push(EijReport {
            y: y.coords().to_vec(),
            y_orthonormal: y_new.coords().to_vec(),
            e_closed: closed,
            e_numeric: numeric.matrix,
            max_residual,
            h: numeric.h,
            richardson_gap: numeric.richardson_gap,
            flagged: numeric.flagged,
        });
    }
    let frame = (0..p.ncols()).map(|j| p.column(j).iter().copied().collect()).collect();
    let run = EijRun { phi, n, frame, results };
    let main = match format {
        Format::Json => json(&run),
        Format::Csv => {
            let header = ["direction", "i", "j", "closed", "numeric", "residual"].map(String::from);
            let mut rows = Vec::new();
            for (d, r) in run.results.iter().enumerate() {
                let num = &r.e_numeric.entries;
                for (i, row) in num.iter().enumerate() {
                    for (j, x) in row.iter().enumerate() {
                        let c = r.e_closed.as_ref().map(|c| c.entries[i][j]);
                        rows.push(vec![
                            d.to_string(),
                            i.to_string(),
                            j.to_string(),
                            c.map_or(String::new(), |c| c.to_string()),
                            x.to_string(),
                            c.map_or(String::new(), |c| (c - x).abs().to_string()),
                        ]);
                    }
                }
            }
            csv_string(&header, rows)
        }
    };
    Ok(Output::ok(main))
}

#[derive(Serialize)]
struct PhiquantReport {
    phi: PhiSpec,
    context: CurvContext,
    generic: PhiQuantities,
    closed: Option<PhiQuantities>,
    max_relative_diff: Option<f64>,
    t: f64,
    shen_condition: f64,
}

pub fn phiquant(phi: &str, n: usize, b: f64, s: f64, format: Format) -> Result<Output, CliError> {
    let phi = parse_phi_arg(phi)?;
    let ctx = CurvContext::new(n, b, s)?;
    let generic = phicalc::quantities_generic(&phi, &ctx)?;
    let closed = match phicalc::quantities_closed(&phi, &ctx) {
        Ok(q) => Some(q),
        Err(Error::NoClosedForm(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let report = PhiquantReport {
        max_relative_diff: closed.map(|c| c.max_relative_diff(&generic)),
        t: phicalc::t_function(&phi, &ctx)?,
        shen_condition: phi.shen_condition(b, s),
        phi,
        context: ctx,
        generic,
        closed,
    };
    let main = match format {
        Format::Json => json(&report),
        Format::Csv => csv_string(
            &["field".into(), "generic".into(), "closed".into()],
            QuantityField::ALL.iter().map(|&f| {
                vec![
                    f.name().to_string(),
                    report.generic.field(f).to_string(),
                    report.closed.map_or(String::new(), |c| c.field(f).to_string()),
                ]
            }),
        ),
    };
    Ok(Output::ok(main))
}

#[derive(Serialize)]
struct IdentityReport {
    claims: Vec<ratcheck::ClaimResult>,
    certificates: Vec<ratcheck::Certificate>,
}

pub fn identity_check(format: Option<Format>, color: bool) -> Result<Output, CliError> {
    let claims = ratcheck::certify_all()?;
    let certificates = [PhiFamily::Square, PhiFamily::RandersSquare, PhiFamily::Riemannian]
        .into_iter()
        .map(ratcheck::certify_general_vs_closed)
        .collect::<Result<Vec<_>, _>>()?;
    let report = IdentityReport { claims, certificates };
    let main = match format {
        Some(Format::Json) => json(&report),
        Some(Format::Csv) => csv_string(
            &["id", "location", "holds", "difference"].map(String::from),
            report.claims.iter().map(|c| {
                vec![c.id.into(), c.location.into(), c.holds.to_string(), c.difference.clone().unwrap_or_default()]
            }),
        ),
        None => text_table(&report, color),
    };
    Ok(Output::ok(main))
}

fn text_table(report: &IdentityReport, color: bool) -> String {
    let mut rows: Vec<(String, &str, bool, Option<&str>)> =
        report.claims.iter().map(|c| (c.id.to_string(), c.location, c.holds, c.difference.as_deref())).collect();
    for cert in &report.certificates {
        rows.push((format!("{}.equivalence", cert.family), "general vs closed S-curvature", cert.verdict, None));
    }
    let id_w = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
    let loc_w = rows.iter().map(|r| r.1.len()).max().unwrap_or(0);
    let mut out = String::new();
    for (id, location, holds, difference) in rows {
        let word = if holds { "true" } else { "false" };
        let word = match (color, holds) {
            (false, _) => word.to_string(),
            (true, true) => format!("\x1b[32m{word}\x1b[0m"),
            (true, false) => format!("\x1b[31m{word}\x1b[0m"),
        };
        out.push_str(&format!("{id:<id_w$}  {location:<loc_w$}  {word}"));
        if let Some(d) = difference {
            out.push_str(&format!("  difference: {d}"));
        }
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct VolumeReport {
    phi: PhiSpec,
    b: f64,
    n: usize,
    results: Vec<VolumeFactor>,
}

pub fn volume(phi: &str, b: f64, n: usize, form: FormArg, quad: usize, format: Format) -> Result<Output, CliError> {
    let phi = parse_phi_arg(phi)?;
    let forms: &[VolumeForm] = match form {
        FormArg::Bh => &[VolumeForm::BusemannHausdorff],
        FormArg::Ht => &[VolumeForm::HolmesThompson],
        FormArg::Both => &[VolumeForm::BusemannHausdorff, VolumeForm::HolmesThompson],
    };
    let results = forms.iter().map(|&f| phicalc::volume_factor(&phi, b, n, f, quad)).collect::<Result<Vec<_>, _>>()?;
    let converged = results.iter().all(|r| r.converged);
    let report = VolumeReport { phi, b, n, results };
    let main = match format {
        Format::Json => json(&report),
        Format::Csv => csv_string(
            &["form", "value", "nodes", "refinement_gap", "converged"].map(String::from),
            report.results.iter().map(|r| {
                vec![
                    r.form.tag().into(),
                    r.value.to_string(),
                    r.nodes.to_string(),
                    r.refinement_gap.to_string(),
                    r.converged.to_string(),
                ]
            }),
        ),
    };
    Ok(Output { main, side: None, code: if converged { 0 } else { 1 } })
}
