//! Analysis reports, LUT files and DDT dumps.
//!
//! JSON report fields, in order:
//!
//! | field          | meaning                                                        |
//! |----------------|----------------------------------------------------------------|
//! | `tool_version` | crate version                                                  |
//! | `field_n`      | degree n                                                       |
//! | `poly`         | reduction polynomial, lowercase hex, no prefix                 |
//! | `map`          | `{"exponent": d}`, `{"family": name, "exponent": d}` or `{"lut_sha256": hex}` |
//! | `is_permutation` |                                                              |
//! | `delta`        | differential uniformity                                        |
//! | `nl`           | nonlinearity                                                   |
//! | `walsh_max`    | max abs Walsh coefficient over all a and b != 0                |
//! | `lambda`       | value -> multiplicity, keys signed decimal strings, increasing |
//! | `flags`        | `is_apn`, `is_ab` (null for even n), `ddt_rows_well_formed`, `parseval_holds` |
//! | `nl_candidates`| for even n: `half_root` = 2^(n-1) - 2^(n/2-1), `root` = 2^(n-1) - 2^(n/2); null otherwise |
//! | `sampled`      | rows were sampled                                              |
//! | `timings_ms`   | `build`, `ddt`, `walsh`                                        |

use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, Write};
use std::time::Instant;

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::field::{Elem, FieldError, FieldSpec};
use crate::spectra::{
    differential_uniformity, for_each_ddt_row, summarize, walsh_spectrum, FunctionTable, SpectraError, SpectrumSummary,
    SweepConfig,
};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Values per line when writing a LUT file.
const LUT_LINE_WIDTH: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum MapDescriptor {
    Family { family: String, exponent: u64 },
    Exponent { exponent: u64 },
    Lut { lut_sha256: String },
}

impl fmt::Display for MapDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapDescriptor::Family { family, exponent } => write!(f, "{family}, x^{exponent}"),
            MapDescriptor::Exponent { exponent } => write!(f, "x^{exponent}"),
            MapDescriptor::Lut { lut_sha256 } => write!(f, "lut sha256 {lut_sha256}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Flags {
    pub is_apn: bool,
    pub is_ab: Option<bool>,
    pub ddt_rows_well_formed: bool,
    pub parseval_holds: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct NlCandidates {
    pub half_root: u64,
    pub root: u64,
}

impl NlCandidates {
    pub fn for_degree(n: u32) -> Option<Self> {
        n.is_multiple_of(2).then(|| {
            let top = 1u64 << (n - 1);
            NlCandidates { half_root: top - (1 << (n / 2 - 1)), root: top - (1 << (n / 2)) }
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Timings {
    pub build: u64,
    pub ddt: u64,
    pub walsh: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AnalysisReport {
    pub tool_version: &'static str,
    pub field_n: u32,
    #[serde(serialize_with = "hex")]
    pub poly: u32,
    pub map: MapDescriptor,
    pub is_permutation: bool,
    pub delta: u32,
    pub nl: u64,
    pub walsh_max: u32,
    #[serde(serialize_with = "decimal_keys")]
    pub lambda: BTreeMap<i64, u64>,
    pub flags: Flags,
    pub nl_candidates: Option<NlCandidates>,
    pub sampled: bool,
    pub timings_ms: Timings,
}

fn hex<S: Serializer>(v: &u32, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{v:x}"))
}

fn decimal_keys<S: Serializer>(m: &BTreeMap<i64, u64>, s: S) -> Result<S::Ok, S::Error> {
    let mut map = s.serialize_map(Some(m.len()))?;
    for (k, v) in m {
        map.serialize_entry(&k.to_string(), v)?;
    }
    map.end()
}

impl AnalysisReport {
    pub fn new(summary: &SpectrumSummary, spec: &FieldSpec, map: MapDescriptor, timings_ms: Timings) -> Self {
        AnalysisReport {
            tool_version: TOOL_VERSION,
            field_n: spec.degree(),
            poly: spec.poly(),
            map,
            is_permutation: summary.is_permutation,
            delta: summary.delta,
            nl: summary.nl,
            walsh_max: summary.walsh_max,
            lambda: summary.lambda.clone(),
            flags: Flags {
                is_apn: summary.is_apn,
                is_ab: summary.is_ab.as_option(),
                ddt_rows_well_formed: summary.ddt_rows_well_formed,
                parseval_holds: summary.parseval_holds,
            },
            nl_candidates: NlCandidates::for_degree(spec.degree()),
            sampled: summary.sampled,
            timings_ms,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

impl fmt::Display for AnalysisReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "field       GF(2^{}) mod {:x}", self.field_n, self.poly)?;
        writeln!(f, "map         {}", self.map)?;
        writeln!(f, "permutation {}", self.is_permutation)?;
        writeln!(f, "delta       {}{}", self.delta, if self.flags.is_apn { " (APN)" } else { "" })?;
        writeln!(f, "walsh max   {}", self.walsh_max)?;
        writeln!(f, "nl          {}", self.nl)?;
        if let Some(c) = self.nl_candidates {
            writeln!(f, "            2^(n-1) - 2^(n/2-1) = {}, 2^(n-1) - 2^(n/2) = {}", c.half_root, c.root)?;
        }
        if let Some(ab) = self.flags.is_ab {
            writeln!(f, "AB          {ab}")?;
        }
        let spectrum: Vec<String> = self.lambda.iter().map(|(v, m)| format!("{v}:{m}")).collect();
        writeln!(f, "spectrum    {}", spectrum.join(" "))?;
        if self.sampled {
            writeln!(f, "(sampled rows: delta and walsh max are lower bounds)")?;
        }
        Ok(())
    }
}

/// Runs both sweeps with per-phase timings. `build_ms` is the time the
/// caller spent producing the table.
pub fn analyze(
    f: &FunctionTable,
    map: MapDescriptor,
    cfg: &SweepConfig,
    build_ms: u64,
) -> Result<AnalysisReport, SpectraError> {
    let t = Instant::now();
    let ddt = differential_uniformity(f, cfg)?;
    let ddt_ms = t.elapsed().as_millis() as u64;
    let t = Instant::now();
    let walsh = walsh_spectrum(f, cfg)?;
    let walsh_ms = t.elapsed().as_millis() as u64;
    let summary = summarize(f, &ddt, &walsh);
    Ok(AnalysisReport::new(&summary, f.spec(), map, Timings { build: build_ms, ddt: ddt_ms, walsh: walsh_ms }))
}

#[derive(Debug, Error)]
pub enum LutError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn parse_err(line: usize, reason: impl Into<String>) -> LutError {
    LutError::Parse { line, reason: reason.into() }
}

/// Parses `n=<d> poly=<hex>` followed by `2^n` hex values.
pub fn parse_lut(text: &str) -> Result<FunctionTable, LutError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (hline, header) = lines
        .by_ref()
        .find(|(_, l)| !l.trim().is_empty())
        .ok_or_else(|| parse_err(1, "empty file, expected `n=<degree> poly=<hex>`"))?;
    let mut n = None;
    let mut poly = None;
    for field in header.split_whitespace() {
        match field.split_once('=') {
            Some(("n", v)) => n = Some(v.parse::<u32>().map_err(|_| parse_err(hline, format!("bad degree `{v}`")))?),
            Some(("poly", v)) => {
                poly = Some(u32::from_str_radix(v, 16).map_err(|_| parse_err(hline, format!("bad polynomial `{v}`")))?)
            }
            _ => return Err(parse_err(hline, format!("unexpected header field `{field}`"))),
        }
    }
    let (n, poly) = match (n, poly) {
        (Some(n), Some(p)) => (n, p),
        _ => return Err(parse_err(hline, "header must be `n=<degree> poly=<hex>`")),
    };
    let spec = FieldSpec::new(n, Some(poly))?;

    let expected = spec.order();
    let mut lut = Vec::with_capacity(expected);
    let mut last_line = hline;
    for (line, content) in lines {
        last_line = line;
        for tok in content.split_whitespace() {
            let v = u32::from_str_radix(tok, 16).map_err(|_| parse_err(line, format!("bad hex value `{tok}`")))?;
            if !spec.contains(v) {
                return Err(parse_err(line, format!("value {tok} is not below 2^{n}")));
            }
            if lut.len() == expected {
                return Err(parse_err(line, format!("more than {expected} values")));
            }
            lut.push(v);
        }
    }
    if lut.len() != expected {
        return Err(parse_err(last_line, format!("expected {expected} values, found {}", lut.len())));
    }
    Ok(FunctionTable::new(spec, lut).expect("values checked above"))
}

pub fn write_lut(f: &FunctionTable, mut out: impl Write) -> io::Result<()> {
    let s = f.spec();
    writeln!(out, "n={} poly={:x}", s.degree(), s.poly())?;
    for chunk in f.lut().chunks(LUT_LINE_WIDTH) {
        let line: Vec<String> = chunk.iter().map(|v| format!("{v:x}")).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    Ok(())
}

/// SHA-256 of the canonical LUT file text.
pub fn lut_digest(f: &FunctionTable) -> String {
    let mut buf = Vec::new();
    write_lut(f, &mut buf).expect("writing to memory");
    Sha256::digest(&buf).iter().map(|b| format!("{b:02x}")).collect()
}

/// Every DDT row `a = 1 .. 2^n - 1`, one comma-separated line per row,
/// columns `b = 0 .. 2^n - 1`.
pub fn write_ddt_csv(f: &FunctionTable, threads: usize, mut out: impl Write) -> Result<(), LutError> {
    let cfg = SweepConfig { threads, deep: true, sampling: None };
    let mut line = String::new();
    for_each_ddt_row(f, &cfg, |_a: Elem, row| {
        line.clear();
        for (i, c) in row.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            line.push_str(&c.to_string());
        }
        line.push('\n');
        out.write_all(line.as_bytes())
    })
    .map_err(|e| LutError::Io(io::Error::other(e)))??;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::build_lut;

    fn f16() -> FieldSpec {
        FieldSpec::new(4, Some(0x13)).unwrap()
    }

    #[test]
    fn lut_round_trip() {
        let f = build_lut(&f16(), 7);
        let mut buf = Vec::new();
        write_lut(&f, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("n=4 poly=13\n0 1 "));
        assert_eq!(parse_lut(&text).unwrap(), f);
    }

    #[test]
    fn lut_parse_errors_name_the_line() {
        let err = |t: &str| match parse_lut(t) {
            Err(LutError::Parse { line, .. }) => line,
            other => panic!("{other:?}"),
        };
        assert_eq!(err(""), 1);
        assert_eq!(err("n=2\n0 1 2 3"), 1);
        assert_eq!(err("n=2 poly=7\n0 1\n2 zz"), 3);
        assert_eq!(err("n=2 poly=7\n0 1 2 4"), 2);
        assert_eq!(err("n=2 poly=7\n0 1 2"), 2);
        assert_eq!(err("n=2 poly=7\n0 1 2 3\n0"), 3);
        assert!(matches!(parse_lut("n=2 poly=5\n0 1 2 3"), Err(LutError::Field(_))));
    }

    #[test]
    fn report_json_shape() {
        let f = build_lut(&f16(), 7);
        let r = analyze(&f, MapDescriptor::Exponent { exponent: 7 }, &SweepConfig::default(), 0).unwrap();
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["poly"], "13");
        assert_eq!(v["delta"], 4);
        assert_eq!(v["map"]["exponent"], 7);
        assert_eq!(v["flags"]["is_ab"], serde_json::Value::Null);
        assert_eq!(v["nl_candidates"]["root"], 4);
        let total: u64 = v["lambda"].as_object().unwrap().values().map(|m| m.as_u64().unwrap()).sum();
        assert_eq!(total, 16 * 15);
        assert_eq!(r.nl, 8 - u64::from(r.walsh_max) / 2);
        let json = r.to_json();
        let keys: Vec<i64> = r.lambda.keys().copied().collect();
        let positions: Vec<usize> = keys.iter().map(|k| json.find(&format!("\"{k}\":")).unwrap()).collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn ddt_csv_shape() {
        let f = build_lut(&f16(), 7);
        let mut buf = Vec::new();
        write_ddt_csv(&f, 1, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let rows: Vec<&str> = text.lines().collect();
        assert_eq!(rows.len(), 15);
        for row in rows {
            let counts: Vec<u32> = row.split(',').map(|c| c.parse().unwrap()).collect();
            assert_eq!(counts.len(), 16);
            assert_eq!(counts.iter().sum::<u32>(), 16);
        }
    }

    #[test]
    fn digest_tracks_content() {
        let a = build_lut(&f16(), 7);
        let b = build_lut(&f16(), 11);
        assert_eq!(lut_digest(&a).len(), 64);
        assert_ne!(lut_digest(&a), lut_digest(&b));
    }
}
