//! Versioned JSON documents, CSV tables and run manifests.
//!
//! Every JSON document carries a `schema` tag, the manifest of the run that
//! produced it and a SHA-256 digest of its data. Floats are written as the
//! shortest decimal that parses back to the same value, so files round-trip
//! exactly and reruns are byte-identical. Non-finite floats, which JSON
//! cannot express, are written as the strings `"inf"`, `"-inf"`, `"nan"`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ball::GroupElement;
use crate::error::{Error, Result};
use crate::ortho::OrthoSpectrum;
use crate::spectra::IntervalRadius;
use crate::surfaces::{FuchsianSurface, ValidationReport};

pub const SURFACE_SCHEMA: &str = "orthospec/surface/v1";
pub const SPECTRUM_SCHEMA: &str = "orthospec/ortho-spectrum/v1";
pub const LENGTH_SPECTRUM_SCHEMA: &str = "orthospec/length-spectrum/v1";
pub const REPORT_SCHEMA: &str = "orthospec/report/v1";
pub const MANIFEST_SCHEMA: &str = "orthospec/manifest/v1";

pub const TOOL_VERSION: &str = concat!("orthospec ", env!("CARGO_PKG_VERSION"));

/// Serde adapter for floats that may be infinite or NaN.
pub mod float_or_string {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else if x.is_nan() {
            s.serialize_str("nan")
        } else if *x > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Str(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("not a float: {other}"))),
            },
        }
    }
}

/// Everything that determines a run's output.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// SHA-256 of each input file, in argument order.
    pub input_hashes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<f64>,
    pub tolerances: BTreeMap<String, f64>,
    pub tool_version: String,
    pub precision: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Certificate status of each surface or spectrum involved.
    pub certificates: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Document<T> {
    pub schema: String,
    pub manifest: RunManifest,
    pub digest: String,
    pub data: T,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

fn data_digest<T: Serialize>(data: &T) -> Result<String> {
    let bytes = serde_json::to_vec(data)
        .map_err(|e| Error::Domain(format!("serialization failed: {e}")))?;
    Ok(sha256_hex(&bytes))
}

impl<T: Serialize> Document<T> {
    pub fn new(schema: &str, manifest: RunManifest, data: T) -> Result<Self> {
        Ok(Document {
            schema: schema.to_string(),
            digest: data_digest(&data)?,
            manifest,
            data,
        })
    }

    /// False when the data no longer matches the stored digest.
    pub fn digest_matches(&self) -> bool {
        data_digest(&self.data).is_ok_and(|d| d == self.digest)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Domain(format!("serialization failed: {e}")))?;
        s.push('\n');
        Ok(s)
    }
}

pub fn parse_document<T: DeserializeOwned>(text: &str, schema: &str) -> Result<Document<T>> {
    let v: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Spec(format!("not valid JSON: {e}")))?;
    match v.get("schema").and_then(|s| s.as_str()) {
        Some(s) if s == schema => {}
        Some(s) => return Err(Error::Spec(format!("expected schema {schema}, found {s}"))),
        None => {
            return Err(Error::Spec(format!(
                "missing schema field, expected {schema}"
            )))
        }
    }
    serde_json::from_value(v).map_err(|e| Error::Spec(format!("malformed {schema} document: {e}")))
}

pub fn read_document<T: DeserializeOwned>(path: &Path, schema: &str) -> Result<Document<T>> {
    let text = read_text(path)?;
    parse_document(&text, schema)
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Spec(format!("cannot read {}: {e}", path.display())))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)
        .map_err(|e| Error::Spec(format!("cannot write {}: {e}", path.display())))
}

/// Restore the extended-precision products that are not serialized, by
/// re-evaluating every face pairing from its word.
pub fn rehydrate(surface: &mut FuchsianSurface) {
    let gens = surface.generators.clone();
    for f in surface.face_pairings.iter_mut() {
        *f = GroupElement::from_word(f.word.clone(), &gens);
    }
    if let Some(a) = surface.ambient.as_mut() {
        rehydrate(&mut a.base);
    }
}

/// A built surface together with the audit run on it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceFile {
    pub surface: FuchsianSurface,
    pub validation: ValidationReport,
}

pub fn load_surface(path: &Path) -> Result<Document<SurfaceFile>> {
    let mut doc: Document<SurfaceFile> = read_document(path, SURFACE_SCHEMA)?;
    rehydrate(&mut doc.data.surface);
    Ok(doc)
}

/// `length,boundary_i,boundary_j,foot_i,foot_j`, ascending by length.
pub fn spectrum_csv(spectrum: &OrthoSpectrum) -> String {
    let mut rows: Vec<_> = spectrum.entries.iter().collect();
    rows.sort_by(|a, b| {
        a.length
            .total_cmp(&b.length)
            .then(a.boundary_pair.cmp(&b.boundary_pair))
            .then(a.feet.0.total_cmp(&b.feet.0))
            .then(a.feet.1.total_cmp(&b.feet.1))
    });
    let mut s = String::from("length,boundary_i,boundary_j,foot_i,foot_j\n");
    for e in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            e.length, e.boundary_pair.0, e.boundary_pair.1, e.feet.0, e.feet.1
        );
    }
    s
}

/// Rows of a spectrum CSV as `(length, i, j, foot_i, foot_j)`.
pub fn parse_spectrum_csv(text: &str) -> Result<Vec<(f64, usize, usize, f64, f64)>> {
    let mut lines = text.lines();
    if lines.next() != Some("length,boundary_i,boundary_j,foot_i,foot_j") {
        return Err(Error::Spec("unexpected spectrum CSV header".into()));
    }
    lines
        .filter(|l| !l.is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            let bad = || Error::Spec(format!("bad spectrum CSV row: {l}"));
            if f.len() != 5 {
                return Err(bad());
            }
            Ok((
                f[0].parse().map_err(|_| bad())?,
                f[1].parse().map_err(|_| bad())?,
                f[2].parse().map_err(|_| bad())?,
                f[3].parse().map_err(|_| bad())?,
                f[4].parse().map_err(|_| bad())?,
            ))
        })
        .collect()
}

/// `radius,length,component,exp_neg_length`, ascending by length.
pub fn radii_csv(radii: &[IntervalRadius]) -> String {
    let mut rows: Vec<&IntervalRadius> = radii.iter().collect();
    rows.sort_by(|a, b| {
        a.length
            .total_cmp(&b.length)
            .then(a.component.cmp(&b.component))
            .then(a.radius.total_cmp(&b.radius))
    });
    let mut s = String::from("radius,length,component,exp_neg_length\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            r.radius,
            r.length,
            r.component,
            (-r.length).exp()
        );
    }
    s
}

/// Manifest written next to a CSV file, which has no room for one.
pub fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut name = path
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_default();
    name.push(".manifest.json");
    path.with_file_name(name)
}

pub fn manifest_json(manifest: &RunManifest) -> Result<String> {
    #[derive(Serialize)]
    struct Sidecar<'a> {
        schema: &'a str,
        manifest: &'a RunManifest,
    }
    let mut s = serde_json::to_string_pretty(&Sidecar {
        schema: MANIFEST_SCHEMA,
        manifest,
    })
    .map_err(|e| Error::Domain(format!("serialization failed: {e}")))?;
    s.push('\n');
    Ok(s)
}
