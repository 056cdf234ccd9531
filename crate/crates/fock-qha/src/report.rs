//! Run configuration, report schemas and deterministic file output.
//!
//! Every output file embeds the effective [`RunConfig`], is written
//! atomically (temp file + rename) and is byte-identical across reruns
//! with the same configuration.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{FockError, Result};
use crate::fock::BasisTruncation;
use crate::operators::{OperatorMatrix, Provenance};
use crate::symbols::Symbol;

/// Schema tag carried by every report file.
pub const REPORT_SCHEMA: &str = "fock-qha-report/1";
/// Schema tag for serialized operators.
pub const OPERATOR_SCHEMA: &str = "fock-qha-operator/1";

/// Output format for tables and operator payloads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

/// Symbol selection, as given on the command line or in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum SymbolSpec {
    One,
    Heat { t: f64 },
    Gaussian { re: f64, im: f64 },
    Oscillatory { freq: f64 },
    RadialPower { degree: u32 },
    Bump,
}

impl SymbolSpec {
    pub fn to_symbol(&self, n: usize) -> Result<Symbol> {
        match self {
            SymbolSpec::One => Ok(Symbol::constant(C64::new(1.0, 0.0), n)),
            SymbolSpec::Heat { t } => crate::symbols::heat_kernel_real(*t, n),
            SymbolSpec::Gaussian { re, im } => {
                crate::symbols::heat_kernel(C64::new(*re, *im), n)
            }
            SymbolSpec::Oscillatory { freq } => Ok(Symbol::oscillatory(*freq, n)),
            SymbolSpec::RadialPower { degree } => Ok(Symbol::radial_power(*degree, n)),
            SymbolSpec::Bump => Ok(bump_symbol(n)),
        }
    }
}

/// Smooth indicator-like radial bump `exp(-(pi |z|^2 / 2)^2)`; bounded,
/// vanishing at infinity, with square-integrable translates.
pub fn bump_symbol(n: usize) -> Symbol {
    Symbol::radial(
        |r| {
            let s = std::f64::consts::PI * r * r / 2.0;
            C64::new((-s * s).exp(), 0.0)
        },
        n,
        true,
        "bump",
    )
    .with_bounded_hint(1.0)
}

/// Effective run configuration; echoed into every output file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub n: usize,
    pub k_max: usize,
    pub quad_points: usize,
    pub tol: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub symbol: Option<SymbolSpec>,
    pub t_grid: Vec<f64>,
    pub p_grid: Vec<f64>,
    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n: 1,
            k_max: 32,
            quad_points: 64,
            tol: 1e-7,
            symbol: None,
            t_grid: vec![0.6, 0.75, 1.0, 1.5, 2.0],
            p_grid: vec![1.0, 2.0],
            format: OutputFormat::Json,
        }
    }
}

/// Write `bytes` to `path` atomically: temp file in the same directory,
/// then rename.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct OperatorEnvelope {
    schema: String,
    n: usize,
    k_max: usize,
    rows: usize,
    cols: usize,
    provenance_construction: String,
    provenance_params: Vec<(String, String)>,
    /// "bin-le-f64" (row-major, interleaved re/im, little-endian) or "csv".
    payload_format: String,
    payload_file: String,
}

/// Serialize an operator matrix: a JSON envelope `<stem>.json` plus a
/// payload `<stem>.bin` (row-major little-endian f64 re/im pairs) or
/// `<stem>.csv` (rows `k,m,re,im`).
pub fn write_operator(
    dir: &Path,
    stem: &str,
    op: &OperatorMatrix,
    format: OutputFormat,
) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let (payload_format, payload_name) = match format {
        OutputFormat::Json => ("bin-le-f64", format!("{stem}.bin")),
        OutputFormat::Csv => ("csv", format!("{stem}.csv")),
    };
    let d = op.dim();
    match format {
        OutputFormat::Json => {
            let mut bytes = Vec::with_capacity(d * d * 16);
            for k in 0..d {
                for m in 0..d {
                    let e = op.entries[(k, m)];
                    bytes.extend_from_slice(&e.re.to_le_bytes());
                    bytes.extend_from_slice(&e.im.to_le_bytes());
                }
            }
            atomic_write(&dir.join(&payload_name), &bytes)?;
        }
        OutputFormat::Csv => {
            let mut out = String::from("k,m,re,im\n");
            for k in 0..d {
                for m in 0..d {
                    let e = op.entries[(k, m)];
                    out.push_str(&format!("{k},{m},{},{}\n", e.re, e.im));
                }
            }
            atomic_write(&dir.join(&payload_name), out.as_bytes())?;
        }
    }
    let envelope = OperatorEnvelope {
        schema: OPERATOR_SCHEMA.to_string(),
        n: op.truncation.n(),
        k_max: op.truncation.k_max(),
        rows: d,
        cols: d,
        provenance_construction: op.provenance.construction.clone(),
        provenance_params: op.provenance.params.clone(),
        payload_format: payload_format.to_string(),
        payload_file: payload_name,
    };
    let envelope_path = dir.join(format!("{stem}.json"));
    atomic_write(
        &envelope_path,
        serde_json::to_string_pretty(&envelope)?.as_bytes(),
    )?;
    Ok(envelope_path)
}

/// Read an operator matrix back from its envelope file.
pub fn read_operator(envelope_path: &Path) -> Result<OperatorMatrix> {
    let envelope: OperatorEnvelope =
        serde_json::from_str(&fs::read_to_string(envelope_path)?)?;
    if envelope.schema != OPERATOR_SCHEMA {
        return Err(FockError::InvalidArgument(format!(
            "unexpected operator schema {}",
            envelope.schema
        )));
    }
    let trunc = BasisTruncation::new(envelope.n, envelope.k_max)?;
    if trunc.dim() != envelope.rows || envelope.rows != envelope.cols {
        return Err(FockError::InvalidArgument(
            "operator envelope shape does not match its truncation".into(),
        ));
    }
    let dir = envelope_path.parent().unwrap_or_else(|| Path::new("."));
    let payload_path = dir.join(&envelope.payload_file);
    let d = envelope.rows;
    let mut entries = DMatrix::<C64>::zeros(d, d);
    match envelope.payload_format.as_str() {
        "bin-le-f64" => {
            let bytes = fs::read(&payload_path)?;
            if bytes.len() != d * d * 16 {
                return Err(FockError::InvalidArgument(format!(
                    "payload size {} does not match {d}x{d} complex matrix",
                    bytes.len()
                )));
            }
            let mut offset = 0;
            for k in 0..d {
                for m in 0..d {
                    let re = f64::from_le_bytes(bytes[offset..offset + 8].try_into().unwrap());
                    let im =
                        f64::from_le_bytes(bytes[offset + 8..offset + 16].try_into().unwrap());
                    entries[(k, m)] = C64::new(re, im);
                    offset += 16;
                }
            }
        }
        "csv" => {
            let text = fs::read_to_string(&payload_path)?;
            for line in text.lines().skip(1) {
                let fields: Vec<&str> = line.split(',').collect();
                if fields.len() != 4 {
                    return Err(FockError::InvalidArgument(format!(
                        "malformed payload row: {line}"
                    )));
                }
                let k: usize = fields[0]
                    .parse()
                    .map_err(|e| FockError::InvalidArgument(format!("bad row index: {e}")))?;
                let m: usize = fields[1]
                    .parse()
                    .map_err(|e| FockError::InvalidArgument(format!("bad col index: {e}")))?;
                let re: f64 = fields[2]
                    .parse()
                    .map_err(|e| FockError::InvalidArgument(format!("bad re: {e}")))?;
                let im: f64 = fields[3]
                    .parse()
                    .map_err(|e| FockError::InvalidArgument(format!("bad im: {e}")))?;
                entries[(k, m)] = C64::new(re, im);
            }
        }
        other => {
            return Err(FockError::InvalidArgument(format!(
                "unknown payload format {other}"
            )));
        }
    }
    let mut provenance = Provenance::new(&envelope.provenance_construction);
    for (k, v) in envelope.provenance_params {
        provenance.push(&k, v);
    }
    Ok(OperatorMatrix::new(entries, trunc, provenance))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::heat_semigroup;

    #[test]
    fn operator_roundtrip_binary_and_csv() {
        let dir = std::env::temp_dir().join("fock-qha-report-test");
        let trunc = BasisTruncation::new(1, 6).unwrap();
        let op = heat_semigroup(0.5, &trunc).unwrap().to_matrix();

        for (format, stem) in [(OutputFormat::Json, "op_bin"), (OutputFormat::Csv, "op_csv")] {
            let envelope = write_operator(&dir, stem, &op, format).unwrap();
            let back = read_operator(&envelope).unwrap();
            assert_eq!(back.dim(), op.dim());
            let diff = back.max_abs_entry_diff(&op);
            // binary payload is bit-exact; csv goes through shortest
            // round-trip decimal, also exact for f64
            assert_eq!(diff, 0.0, "format {format:?}");
        }
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn atomic_write_replaces_content() {
        let dir = std::env::temp_dir().join("fock-qha-atomic-test");
        let path = dir.join("file.txt");
        atomic_write(&path, b"first").unwrap();
        atomic_write(&path, b"second").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"second");
        assert!(!dir.join("file.txt.tmp").exists());
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn symbol_specs_build() {
        for spec in [
            SymbolSpec::One,
            SymbolSpec::Heat { t: 1.0 },
            SymbolSpec::Gaussian { re: 0.0, im: 1.0 },
            SymbolSpec::Oscillatory {
                freq: 2.0 * std::f64::consts::PI,
            },
            SymbolSpec::RadialPower { degree: 1 },
            SymbolSpec::Bump,
        ] {
            assert!(spec.to_symbol(1).is_ok(), "{spec:?}");
        }
        assert!(SymbolSpec::Heat { t: -0.2 }.to_symbol(1).is_err());
    }

    #[test]
    fn run_config_roundtrip() {
        let config = RunConfig {
            symbol: Some(SymbolSpec::Gaussian { re: 1.0, im: 0.0 }),
            ..RunConfig::default()
        };
        let json = serde_json::to_string(&config).unwrap();
        let back: RunConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back.k_max, 32);
        assert_eq!(back.symbol, config.symbol);
    }
}
