use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use orthospec::covers::{build_special_X, cover_family, special_alpha_length};
use orthospec::identities::{basmajian_check, bridgeman_check, IdentityReport, Verdict};
use orthospec::io::{
    self, load_surface, manifest_json, read_document, sha256_hex, sidecar_path, Document,
    RunManifest, SurfaceFile, REPORT_SCHEMA, SPECTRUM_SCHEMA, SURFACE_SCHEMA,
};
use orthospec::ortho::{ortho_spectrum, systole, OrthoSpectrum};
use orthospec::spectra::{
    compare_spectra, interval_radii_from_spectrum, mckean_systole_bound, multiplicity_audit,
    ortho_exponent, ortho_exponent_divergence, packing_exponent, pinching_experiment,
    radius_constant, reconstruct_torus, ExponentFit, McKeanBound, PinchingReport,
    SpectrumComparison, Topology, TorusParams,
};
use orthospec::surfaces::{build_surface, validate_surface, SurfaceSpec};
use orthospec::{Error, Result};

use crate::{Cli, Command, Format, Global, IdentityChoice, Outcome, Precision};

const BASMAJIAN_TOL: f64 = 1e-3;
const BRIDGEMAN_TOL: f64 = 1e-2;
const COVERS_TOL: f64 = 1e-8;
const COVERS_CUTOFF: f64 = 6.0;
const COMPARE_TOL: f64 = 1e-8;
const EXPONENT_AGREEMENT: f64 = 0.05;
/// Relative drift allowed in the radius constant between 80% and 100% of
/// the largest cutoff.
const RADIUS_CONSTANT_DRIFT: f64 = 0.1;
const RADIUS_SLACK: f64 = 1e-12;

pub fn run(cli: &Cli) -> Result<Outcome> {
    let g = &cli.global;
    match &cli.command {
        Command::Build { spec } => build(g, spec),
        Command::Spectrum { surface, format } => spectrum(g, surface, *format),
        Command::Verify {
            surface,
            spectrum,
            identity,
        } => verify(g, surface, spectrum, *identity),
        Command::Covers { k, gamma, max_k } => covers(g, *k, *gamma, *max_k),
        Command::Exponents {
            surface,
            cutoffs,
            radii_csv,
        } => exponents(g, surface, cutoffs, radii_csv.as_deref()),
        Command::Reconstruct { spectrum } => reconstruct(g, spectrum),
        Command::Compare { a, b } => compare(g, a, b),
        Command::Mckean {
            surface,
            spectrum,
            cap,
        } => mckean(g, surface, spectrum, *cap),
        Command::Pinching { eps, n, gamma } => pinching(g, eps, *n, *gamma),
    }
}

struct Manifest {
    inner: RunManifest,
}

impl Manifest {
    fn new(g: &Global, command: &str, inputs: &[&Path]) -> Result<Self> {
        let input_hashes = inputs
            .iter()
            .map(|p| {
                std::fs::read(p)
                    .map(|b| sha256_hex(&b))
                    .map_err(|e| Error::Spec(format!("cannot read {}: {e}", p.display())))
            })
            .collect::<Result<_>>()?;
        Ok(Manifest {
            inner: RunManifest {
                command: command.to_string(),
                input_hashes,
                cutoff: None,
                tolerances: BTreeMap::new(),
                tool_version: io::TOOL_VERSION.to_string(),
                precision: match g.precision {
                    Precision::Double => "double",
                    Precision::Extended => "extended",
                }
                .to_string(),
                seed: g.seed,
                certificates: Vec::new(),
            },
        })
    }

    fn cutoff(mut self, c: f64) -> Self {
        self.inner.cutoff = Some(c);
        self
    }

    fn tol(mut self, name: &str, v: f64) -> Self {
        self.inner.tolerances.insert(name.to_string(), v);
        self
    }

    fn cert(&mut self, what: &str, certified: bool) {
        let status = if certified { "certified" } else { "heuristic" };
        self.inner.certificates.push(format!("{what}: {status}"));
    }
}

fn emit(g: &Global, text: &str) -> Result<()> {
    match &g.output {
        Some(p) => io::write_text(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_document<T: Serialize>(g: &Global, schema: &str, m: &Manifest, data: T) -> Result<()> {
    emit(g, &Document::new(schema, m.inner.clone(), data)?.to_json()?)
}

/// Raised after the output is written, so a heuristic result is still
/// available for inspection.
fn certification(g: &Global, m: &Manifest) -> Result<()> {
    if g.require_certified {
        if let Some(c) = m
            .inner
            .certificates
            .iter()
            .find(|c| c.ends_with("heuristic"))
        {
            return Err(Error::Uncertified(c.clone()));
        }
    }
    Ok(())
}

fn required_cutoff(g: &Global) -> Result<f64> {
    match g.cutoff {
        Some(c) if c.is_finite() && c > 0.0 => Ok(c),
        Some(c) => Err(Error::Spec(format!("cutoff must be positive, got {c}"))),
        None => Err(Error::Spec("--cutoff is required".into())),
    }
}

fn load_spectrum(path: &Path) -> Result<Document<OrthoSpectrum>> {
    read_document(path, SPECTRUM_SCHEMA)
}

fn build(g: &Global, spec_path: &Path) -> Result<Outcome> {
    let spec = SurfaceSpec::from_json(&io::read_text(spec_path)?)?;
    let surface = build_surface(&spec)?;
    let validation = validate_surface(&surface);
    if let Some(c) = validation.worst_violation() {
        return Err(Error::InvalidSurface(format!("{}: {}", c.name, c.detail)));
    }
    let mut m = Manifest::new(g, "build", &[spec_path])?;
    m.cert("surface", surface.certificate.certified);
    emit_document(
        g,
        SURFACE_SCHEMA,
        &m,
        SurfaceFile {
            surface,
            validation,
        },
    )?;
    certification(g, &m)?;
    Ok(Outcome::Ok)
}

fn spectrum(g: &Global, surface_path: &Path, format: Format) -> Result<Outcome> {
    let cutoff = required_cutoff(g)?;
    let doc = load_surface(surface_path)?;
    let spectrum = ortho_spectrum(&doc.data.surface, cutoff)?;
    let mut m = Manifest::new(g, "spectrum", &[surface_path])?.cutoff(cutoff);
    m.cert("spectrum", spectrum.is_certified());
    match format {
        Format::Json => emit_document(g, SPECTRUM_SCHEMA, &m, spectrum)?,
        Format::Csv => {
            emit(g, &io::spectrum_csv(&spectrum))?;
            if let Some(p) = &g.output {
                io::write_text(&sidecar_path(p), &manifest_json(&m.inner)?)?;
            }
        }
    }
    certification(g, &m)?;
    Ok(Outcome::Ok)
}

#[derive(Serialize)]
struct VerifyReport {
    /// The spectrum data still matches the digest it was written with.
    spectrum_intact: bool,
    reports: Vec<IdentityReport>,
    verdict: Verdict,
}

fn verify(
    g: &Global,
    surface_path: &Path,
    spectrum_path: &Path,
    which: IdentityChoice,
) -> Result<Outcome> {
    let surface = load_surface(surface_path)?.data.surface;
    let spec_doc = load_spectrum(spectrum_path)?;
    let spectrum = &spec_doc.data;
    let mut m = Manifest::new(g, "verify", &[surface_path, spectrum_path])?.cutoff(spectrum.cutoff);
    let mut reports = Vec::new();
    if matches!(which, IdentityChoice::Basmajian | IdentityChoice::Both) {
        let tol = g.tol.unwrap_or(BASMAJIAN_TOL);
        m = m.tol("basmajian", tol);
        reports.push(basmajian_check(spectrum, &surface, tol)?);
    }
    if matches!(which, IdentityChoice::Bridgeman | IdentityChoice::Both) {
        let tol = g.tol.unwrap_or(BRIDGEMAN_TOL);
        m = m.tol("bridgeman", tol);
        reports.push(bridgeman_check(spectrum, &surface, tol)?);
    }
    m.cert("surface", surface.certificate.certified);
    m.cert("spectrum", spectrum.is_certified());
    let intact = spec_doc.digest_matches();
    let pass = intact && reports.iter().all(|r| r.verdict == Verdict::Pass);
    let verdict = if pass { Verdict::Pass } else { Verdict::Fail };
    emit_document(
        g,
        REPORT_SCHEMA,
        &m,
        VerifyReport {
            spectrum_intact: intact,
            reports,
            verdict,
        },
    )?;
    certification(g, &m)?;
    Ok(if pass { Outcome::Ok } else { Outcome::Negative })
}

#[derive(Serialize)]
struct CoverRow {
    m: u32,
    degree: u64,
    boundary_components: usize,
    entries: usize,
    systole: f64,
    expected_systole: f64,
    systole_ok: bool,
    multiplicity_audit: SpectrumComparison,
}

#[derive(Serialize)]
struct PairRow {
    m_a: u32,
    m_b: u32,
    comparison: SpectrumComparison,
}

#[derive(Serialize)]
struct CoversReport {
    k: u32,
    l_gamma: f64,
    l_alpha: f64,
    cutoff: f64,
    tol: f64,
    base_entries: usize,
    covers: Vec<CoverRow>,
    pairs: Vec<PairRow>,
    all_isospectral: bool,
    systoles_distinct: bool,
    all_ok: bool,
}

fn covers(g: &Global, k: u32, gamma: f64, max_k: u32) -> Result<Outcome> {
    if k > max_k {
        return Err(Error::ResourceCap(format!(
            "k = {k} exceeds --max-k {max_k}"
        )));
    }
    let cutoff = g.cutoff.unwrap_or(COVERS_CUTOFF);
    let tol = g.tol.unwrap_or(COVERS_TOL);
    let n = 1u32 << k;
    let l_alpha = special_alpha_length(n);
    let base = build_special_X(n, gamma)?;
    let base_spec = ortho_spectrum(&base, cutoff)?;
    let mut m = Manifest::new(g, "covers", &[])?
        .cutoff(cutoff)
        .tol("covers", tol);
    m.cert("base", base_spec.is_certified());

    let mut rows = Vec::new();
    let mut spectra = Vec::new();
    for mm in 0..=k {
        let cover = cover_family(k, mm, &base)?;
        let spec = ortho_spectrum(&cover, cutoff)?;
        let expected = l_alpha * (1u64 << (k - mm)) as f64;
        let sys = systole(&cover, expected + 1.0)?;
        m.cert(&format!("cover m={mm}"), spec.is_certified());
        rows.push(CoverRow {
            m: mm,
            degree: 1u64 << k,
            boundary_components: cover.boundary.len(),
            entries: spec.entries.len(),
            systole: sys,
            expected_systole: expected,
            systole_ok: (sys - expected).abs() <= tol,
            multiplicity_audit: multiplicity_audit(&base_spec, &spec, 1usize << k, tol),
        });
        spectra.push(spec);
    }
    let mut pairs = Vec::new();
    for a in 0..spectra.len() {
        for b in a + 1..spectra.len() {
            pairs.push(PairRow {
                m_a: a as u32,
                m_b: b as u32,
                comparison: compare_spectra(&spectra[a], &spectra[b], tol),
            });
        }
    }
    let all_isospectral = pairs.iter().all(|p| p.comparison.is_isospectral())
        && rows.iter().all(|r| r.multiplicity_audit.is_isospectral());
    let systoles_distinct = rows.iter().enumerate().all(|(i, a)| {
        rows[i + 1..]
            .iter()
            .all(|b| (a.systole - b.systole).abs() > tol)
    });
    let all_ok = all_isospectral && systoles_distinct && rows.iter().all(|r| r.systole_ok);
    let report = CoversReport {
        k,
        l_gamma: gamma,
        l_alpha,
        cutoff,
        tol,
        base_entries: base_spec.entries.len(),
        covers: rows,
        pairs,
        all_isospectral,
        systoles_distinct,
        all_ok,
    };
    emit_document(g, REPORT_SCHEMA, &m, report)?;
    certification(g, &m)?;
    Ok(if all_ok {
        Outcome::Ok
    } else {
        Outcome::Negative
    })
}

#[derive(Serialize)]
struct ExponentsReport {
    cutoffs: Vec<f64>,
    counting: ExponentFit,
    divergence: ExponentFit,
    packing: ExponentFit,
    /// `|counting - packing|`.
    agreement: f64,
    agreement_ok: bool,
    radius_count: usize,
    /// Largest `r e^l`; at most 1 when `r <= e^-l` holds.
    max_radius_ratio: f64,
    radius_bound_ok: bool,
    /// `max e^-l / r` with radii from 80% and 100% of the largest cutoff.
    radius_constant: (f64, f64),
    radius_constant_stable: bool,
}

fn exponents(
    g: &Global,
    surface_path: &Path,
    cutoffs: &[f64],
    radii_csv: Option<&Path>,
) -> Result<Outcome> {
    let doc = load_surface(surface_path)?;
    let surface = &doc.data.surface;
    let top = cutoffs.iter().copied().fold(f64::NAN, f64::max);
    if !(top > 0.0) {
        return Err(Error::InsufficientData("no usable cutoff".into()));
    }
    let spectrum = ortho_spectrum(surface, top)?;
    let counting = ortho_exponent(&spectrum, cutoffs)?;
    let divergence = ortho_exponent_divergence(&spectrum, cutoffs)?;
    let radii = interval_radii_from_spectrum(surface, &spectrum)?;
    let inner = interval_radii_from_spectrum(surface, &spectrum.truncated(0.8 * top))?;
    let rs: Vec<f64> = radii.iter().map(|r| r.radius).collect();
    let packing = packing_exponent(&rs, Some(top))?;
    let max_ratio = radii
        .iter()
        .map(|r| r.radius * r.length.exp())
        .fold(0.0, f64::max);
    let (c_inner, c_full) = (radius_constant(&inner), radius_constant(&radii));
    let stable = c_full.is_finite() && (c_full - c_inner).abs() <= RADIUS_CONSTANT_DRIFT * c_inner;
    let agreement = (counting.estimate - packing.estimate).abs();

    let mut m = Manifest::new(g, "exponents", &[surface_path])?
        .cutoff(top)
        .tol("agreement", EXPONENT_AGREEMENT)
        .tol("radius_constant_drift", RADIUS_CONSTANT_DRIFT)
        .tol("radius_slack", RADIUS_SLACK);
    m.cert("spectrum", spectrum.is_certified());
    if let Some(p) = radii_csv {
        io::write_text(p, &io::radii_csv(&radii))?;
        io::write_text(&sidecar_path(p), &manifest_json(&m.inner)?)?;
    }
    let radius_ok = max_ratio <= 1.0 + RADIUS_SLACK;
    let ok = agreement <= EXPONENT_AGREEMENT && radius_ok && stable;
    let report = ExponentsReport {
        cutoffs: cutoffs.to_vec(),
        counting,
        divergence,
        packing,
        agreement,
        agreement_ok: agreement <= EXPONENT_AGREEMENT,
        radius_count: radii.len(),
        max_radius_ratio: max_ratio,
        radius_bound_ok: radius_ok,
        radius_constant: (c_inner, c_full),
        radius_constant_stable: stable,
    };
    emit_document(g, REPORT_SCHEMA, &m, report)?;
    certification(g, &m)?;
    Ok(if ok { Outcome::Ok } else { Outcome::Negative })
}

fn reconstruct(g: &Global, spectrum_path: &Path) -> Result<Outcome> {
    let spectrum = load_spectrum(spectrum_path)?.data;
    let params: TorusParams = reconstruct_torus(&spectrum)?;
    let mut m = Manifest::new(g, "reconstruct", &[spectrum_path])?.cutoff(spectrum.cutoff);
    m.cert("spectrum", spectrum.is_certified());
    emit_document(g, REPORT_SCHEMA, &m, params)?;
    certification(g, &m)?;
    Ok(Outcome::Ok)
}

fn compare(g: &Global, a: &Path, b: &Path) -> Result<Outcome> {
    let (sa, sb) = (load_spectrum(a)?.data, load_spectrum(b)?.data);
    let tol = g.tol.unwrap_or(COMPARE_TOL);
    let verdict = compare_spectra(&sa, &sb, tol);
    let mut m = Manifest::new(g, "compare", &[a, b])?
        .cutoff(sa.cutoff.min(sb.cutoff))
        .tol("compare", tol);
    m.cert("spectrum a", sa.is_certified());
    m.cert("spectrum b", sb.is_certified());
    emit_document(g, REPORT_SCHEMA, &m, verdict)?;
    certification(g, &m)?;
    Ok(Outcome::Ok)
}

#[derive(Serialize)]
struct McKeanReport {
    #[serde(flatten)]
    bound: McKeanBound,
    /// Systole measured on the surface itself, for comparison.
    measured_systole: f64,
    sound: bool,
}

fn mckean(
    g: &Global,
    surface_path: &Path,
    spectrum_path: &Path,
    cap: Option<f64>,
) -> Result<Outcome> {
    let surface = load_surface(surface_path)?.data.surface;
    let spectrum = load_spectrum(spectrum_path)?.data;
    let bound = mckean_systole_bound(&spectrum, Topology::of(&surface)?, cap)?;
    let shortest = surface
        .boundary_lengths()
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let measured = systole(&surface, shortest + 1.0)?;
    let mut m = Manifest::new(g, "mckean", &[surface_path, spectrum_path])?.cutoff(spectrum.cutoff);
    m.cert("surface", surface.certificate.certified);
    m.cert("spectrum", spectrum.is_certified());
    let sound = bound.bound <= measured;
    emit_document(
        g,
        REPORT_SCHEMA,
        &m,
        McKeanReport {
            bound,
            measured_systole: measured,
            sound,
        },
    )?;
    certification(g, &m)?;
    Ok(if sound {
        Outcome::Ok
    } else {
        Outcome::Negative
    })
}

fn pinching(g: &Global, eps: &[f64], n: u32, gamma: f64) -> Result<Outcome> {
    let report: PinchingReport = pinching_experiment(eps, n, gamma)?;
    let m = Manifest::new(g, "pinching", &[])?;
    let ok = report.all_matched;
    emit_document(g, REPORT_SCHEMA, &m, report)?;
    Ok(if ok { Outcome::Ok } else { Outcome::Negative })
}
