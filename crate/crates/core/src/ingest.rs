//! Reading and writing series and analysis outputs.
//!
//! Supported series formats:
//!
//! * `.wav`: RIFF/WAVE, PCM 16-bit, one channel. Samples map to `q / 32768`,
//!   so the range is `[-1, 1)`. Writing rounds `x · 32768` to the nearest
//!   integer and saturates to `[-32768, 32767]`; a sample of `1.0` comes back
//!   as `32767/32768`. A series without a sample rate is written at
//!   [`DEFAULT_WAV_RATE`] Hz.
//! * `.csv`: one number per line, `.` as decimal separator, optional first
//!   line `sample`. Written with a `sample` header and shortest round-trip
//!   decimal formatting, so values read back bit-identical.
//! * `.json`: `{"samples": [...], "sample_rate": <optional number>}`.
//!
//! Every writer goes through a temporary file in the destination directory
//! that is renamed into place only after it has been written completely.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::alpha::TimeSeries;
use crate::error::{Error, Offset, Result};
use crate::matcher::{AlphaProfile, MatchCurve};

/// Sample rate used when writing a WAV file for a series that has none.
pub const DEFAULT_WAV_RATE: u32 = 11_250;

const PCM_SCALE: f64 = 32768.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesFormat {
    WavPcm16Mono,
    CsvScalar,
    JsonSeries,
}

impl SeriesFormat {
    /// Infers the format from a `.wav`, `.csv` or `.json` extension.
    pub fn from_path(path: &Path) -> Result<Self> {
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        match ext.as_deref() {
            Some("wav") => Ok(Self::WavPcm16Mono),
            Some("csv") => Ok(Self::CsvScalar),
            Some("json") => Ok(Self::JsonSeries),
            _ => Err(Error::UnsupportedFormat {
                path: path.to_path_buf(),
                message: "expected a .wav, .csv or .json extension".into(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeriesFile {
    pub path: PathBuf,
    pub format: SeriesFormat,
}

impl SeriesFile {
    pub fn new(path: impl Into<PathBuf>) -> Result<Self> {
        let path = path.into();
        let format = SeriesFormat::from_path(&path)?;
        Ok(Self { path, format })
    }

    pub fn with_format(path: impl Into<PathBuf>, format: SeriesFormat) -> Self {
        Self {
            path: path.into(),
            format,
        }
    }
}

pub fn read_series(file: &SeriesFile) -> Result<TimeSeries> {
    let bytes = fs::read(&file.path).map_err(|e| Error::io(&file.path, e))?;
    match file.format {
        SeriesFormat::WavPcm16Mono => parse_wav(&bytes, &file.path),
        SeriesFormat::CsvScalar => parse_csv(&bytes, &file.path),
        SeriesFormat::JsonSeries => parse_json(&bytes, &file.path),
    }
}

pub fn write_series(series: &TimeSeries, file: &SeriesFile) -> Result<()> {
    if series.is_empty() {
        return Err(Error::contract("cannot write an empty series"));
    }
    let bytes = match file.format {
        SeriesFormat::WavPcm16Mono => encode_wav(series),
        SeriesFormat::CsvScalar => encode_csv(series),
        SeriesFormat::JsonSeries => encode_json(series),
    };
    write_atomic(&file.path, &bytes)
}

/// Writes `bytes` to a temporary sibling of `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes)
        .and_then(|_| tmp.as_file().sync_all())
        .map_err(|e| Error::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn parse_error(path: &Path, offset: Offset, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        offset,
        message: message.into(),
    }
}

fn read_u16(bytes: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([bytes[at], bytes[at + 1]])
}

fn read_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([bytes[at], bytes[at + 1], bytes[at + 2], bytes[at + 3]])
}

struct WavFormat {
    channels: u16,
    sample_rate: u32,
    bits_per_sample: u16,
}

fn parse_wav(bytes: &[u8], path: &Path) -> Result<TimeSeries> {
    let err = |at: usize, msg: &str| parse_error(path, Offset::Byte(at as u64), msg);
    if bytes.len() < 12 {
        return Err(err(bytes.len(), "file too short for a RIFF header"));
    }
    if &bytes[0..4] != b"RIFF" {
        return Err(err(0, "missing RIFF signature"));
    }
    if &bytes[8..12] != b"WAVE" {
        return Err(err(8, "missing WAVE form type"));
    }

    let mut format: Option<WavFormat> = None;
    let mut pos = 12;
    while pos < bytes.len() {
        if bytes.len() - pos < 8 {
            return Err(err(pos, "truncated chunk header"));
        }
        let id = &bytes[pos..pos + 4];
        let size = read_u32(bytes, pos + 4) as usize;
        let body = pos + 8;
        let available = bytes.len() - body;

        match id {
            b"fmt " => {
                if size < 16 || available < 16 {
                    return Err(err(body, "fmt chunk shorter than 16 bytes"));
                }
                let tag = read_u16(bytes, body);
                let is_pcm = match tag {
                    1 => true,
                    // WAVE_FORMAT_EXTENSIBLE: the subformat GUID starts with the format tag
                    0xFFFE => size >= 40 && available >= 40 && read_u16(bytes, body + 24) == 1,
                    _ => false,
                };
                if !is_pcm {
                    return Err(Error::UnsupportedFormat {
                        path: path.to_path_buf(),
                        message: format!("WAV format tag {tag:#06x} is not integer PCM"),
                    });
                }
                format = Some(WavFormat {
                    channels: read_u16(bytes, body + 2),
                    sample_rate: read_u32(bytes, body + 4),
                    bits_per_sample: read_u16(bytes, body + 14),
                });
            }
            b"data" => {
                let fmt = format
                    .as_ref()
                    .ok_or_else(|| err(pos, "data chunk precedes fmt chunk"))?;
                if fmt.channels != 1 {
                    return Err(Error::UnsupportedFormat {
                        path: path.to_path_buf(),
                        message: format!("{} channels; only mono is supported", fmt.channels),
                    });
                }
                if fmt.bits_per_sample != 16 {
                    return Err(Error::UnsupportedFormat {
                        path: path.to_path_buf(),
                        message: format!(
                            "{} bits per sample; only 16-bit PCM is supported",
                            fmt.bits_per_sample
                        ),
                    });
                }
                if size > available {
                    return Err(err(
                        bytes.len(),
                        &format!("truncated data chunk: header declares {size} bytes, {available} present"),
                    ));
                }
                if !size.is_multiple_of(2) {
                    return Err(err(
                        body + size - 1,
                        "data chunk has an odd number of bytes",
                    ));
                }
                if size == 0 {
                    return Err(Error::contract(format!(
                        "{} contains no samples",
                        path.display()
                    )));
                }
                let samples = bytes[body..body + size]
                    .chunks_exact(2)
                    .map(|b| f64::from(i16::from_le_bytes([b[0], b[1]])) / PCM_SCALE)
                    .collect();
                let series = TimeSeries::new(samples)?;
                return if fmt.sample_rate > 0 {
                    series.with_sample_rate(f64::from(fmt.sample_rate))
                } else {
                    Ok(series)
                };
            }
            _ => {}
        }
        // chunks are word aligned
        let padded = size + (size & 1);
        if padded > available {
            return Err(err(body, "chunk extends past end of file"));
        }
        pos = body + padded;
    }
    Err(err(bytes.len(), "no data chunk found"))
}

fn to_pcm16(x: f64) -> i16 {
    (x * PCM_SCALE).round().clamp(-32768.0, 32767.0) as i16
}

fn encode_wav(series: &TimeSeries) -> Vec<u8> {
    let rate = series
        .sample_rate()
        .map(|r| r.round().clamp(1.0, f64::from(u32::MAX)) as u32)
        .unwrap_or(DEFAULT_WAV_RATE);
    let data_len = (series.len() * 2) as u32;
    let mut out = Vec::with_capacity(44 + series.len() * 2);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes()); // PCM
    out.extend_from_slice(&1u16.to_le_bytes()); // mono
    out.extend_from_slice(&rate.to_le_bytes());
    out.extend_from_slice(&(rate * 2).to_le_bytes()); // byte rate
    out.extend_from_slice(&2u16.to_le_bytes()); // block align
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for &x in series.samples() {
        out.extend_from_slice(&to_pcm16(x).to_le_bytes());
    }
    out
}

fn parse_csv(bytes: &[u8], path: &Path) -> Result<TimeSeries> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| parse_error(path, Offset::Byte(e.valid_up_to() as u64), "invalid UTF-8"))?;
    let mut samples = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let field = line.trim();
        if field.is_empty() || (i == 0 && field == "sample") {
            continue;
        }
        let value: f64 = field.parse().map_err(|_| {
            parse_error(
                path,
                Offset::Line(line_no),
                format!("not a number: {field:?}"),
            )
        })?;
        if !value.is_finite() {
            return Err(parse_error(path, Offset::Line(line_no), "non-finite value"));
        }
        samples.push(value);
    }
    if samples.is_empty() {
        return Err(Error::contract(format!(
            "{} contains no samples",
            path.display()
        )));
    }
    TimeSeries::new(samples)
}

fn encode_csv(series: &TimeSeries) -> Vec<u8> {
    let mut out = String::with_capacity(series.len() * 20 + 7);
    out.push_str("sample\n");
    for x in series.samples() {
        out.push_str(&format!("{x:?}\n"));
    }
    out.into_bytes()
}

#[derive(Serialize, Deserialize)]
struct JsonSeries {
    samples: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sample_rate: Option<f64>,
}

fn parse_json(bytes: &[u8], path: &Path) -> Result<TimeSeries> {
    let parsed: JsonSeries = serde_json::from_slice(bytes)
        .map_err(|e| parse_error(path, Offset::Line(e.line()), format!("{e}")))?;
    if parsed.samples.is_empty() {
        return Err(Error::contract(format!(
            "{} contains no samples",
            path.display()
        )));
    }
    let series = TimeSeries::new(parsed.samples)?;
    match parsed.sample_rate {
        Some(rate) => series.with_sample_rate(rate),
        None => Ok(series),
    }
}

fn encode_json(series: &TimeSeries) -> Vec<u8> {
    let doc = JsonSeries {
        samples: series.samples().to_vec(),
        sample_rate: series.sample_rate(),
    };
    let mut out = serde_json::to_vec(&doc).expect("finite samples always serialize");
    out.push(b'\n');
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveFormat {
    Csv,
    Json,
}

impl CurveFormat {
    pub fn from_path(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => Ok(Self::Csv),
            Some(e) if e.eq_ignore_ascii_case("json") => Ok(Self::Json),
            _ => Err(Error::UnsupportedFormat {
                path: path.to_path_buf(),
                message: "curve output must end in .csv or .json".into(),
            }),
        }
    }
}

#[derive(Serialize)]
struct JsonCurve<'a> {
    source: &'a str,
    data: &'a str,
    threshold: f64,
    points: Vec<[usize; 2]>,
}

/// Serializes match curves for plotting.
///
/// CSV has a `length` column followed by one count column per curve, headed
/// `source→data`; all curves must share one length grid. JSON is an array of
/// `{source, data, threshold, points: [[length, count], …]}`.
pub fn encode_curves(curves: &[MatchCurve], format: CurveFormat) -> Result<Vec<u8>> {
    match format {
        CurveFormat::Csv => {
            if let Some(first) = curves.first() {
                if let Some(bad) = curves.iter().find(|c| !first.same_grid(c)) {
                    return Err(Error::contract(format!(
                        "curve {}→{} does not share the length grid of {}→{}",
                        bad.source_label, bad.data_label, first.source_label, first.data_label
                    )));
                }
            }
            let mut w = csv::Writer::from_writer(Vec::new());
            let mut header = vec!["length".to_string()];
            header.extend(
                curves
                    .iter()
                    .map(|c| format!("{}→{}", c.source_label, c.data_label)),
            );
            let csv_err = |e: csv::Error| Error::contract(format!("csv encoding failed: {e}"));
            w.write_record(&header).map_err(csv_err)?;
            if let Some(first) = curves.first() {
                for (i, k) in first.lengths().enumerate() {
                    let mut row = vec![k.to_string()];
                    row.extend(curves.iter().map(|c| c.points[i].match_count.to_string()));
                    w.write_record(&row).map_err(csv_err)?;
                }
            }
            w.into_inner()
                .map_err(|e| Error::contract(format!("csv encoding failed: {e}")))
        }
        CurveFormat::Json => {
            let doc: Vec<JsonCurve<'_>> = curves
                .iter()
                .map(|c| JsonCurve {
                    source: &c.source_label,
                    data: &c.data_label,
                    threshold: c.threshold,
                    points: c
                        .points
                        .iter()
                        .map(|p| [p.template_length, p.match_count])
                        .collect(),
                })
                .collect();
            let mut out = serde_json::to_vec_pretty(&doc)
                .map_err(|e| Error::contract(format!("json encoding failed: {e}")))?;
            out.push(b'\n');
            Ok(out)
        }
    }
}

pub fn write_curves(curves: &[MatchCurve], path: &Path, format: CurveFormat) -> Result<()> {
    let bytes = encode_curves(curves, format)?;
    write_atomic(path, &bytes)
}

/// `lag,alpha_n` rows; a skipped lag has an empty second cell.
pub fn encode_profile_csv(profile: &AlphaProfile) -> Vec<u8> {
    let mut out = BufWriter::new(Vec::with_capacity(profile.len() * 24 + 12));
    writeln!(out, "lag,alpha_n").unwrap();
    for (lag, v) in profile.values().iter().enumerate() {
        match v {
            Some(v) => writeln!(out, "{lag},{v:?}").unwrap(),
            None => writeln!(out, "{lag},").unwrap(),
        }
    }
    out.into_inner().expect("writing to a Vec cannot fail")
}

pub fn write_profile_csv(profile: &AlphaProfile, path: &Path) -> Result<()> {
    write_atomic(path, &encode_profile_csv(profile))
}

/// Pretty-printed JSON followed by a newline.
pub fn write_json<T: Serialize + ?Sized>(value: &T, path: &Path) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)
        .map_err(|e| Error::contract(format!("json encoding failed: {e}")))?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcher::CurvePoint;

    fn wav_bytes(samples: &[i16], channels: u16, extra_chunk: bool) -> Vec<u8> {
        let mut body = Vec::new();
        body.extend_from_slice(b"WAVE");
        if extra_chunk {
            body.extend_from_slice(b"LIST");
            body.extend_from_slice(&3u32.to_le_bytes());
            body.extend_from_slice(b"abc\0"); // 3 bytes + pad
        }
        body.extend_from_slice(b"fmt ");
        body.extend_from_slice(&16u32.to_le_bytes());
        body.extend_from_slice(&1u16.to_le_bytes());
        body.extend_from_slice(&channels.to_le_bytes());
        body.extend_from_slice(&8000u32.to_le_bytes());
        body.extend_from_slice(&(8000u32 * 2 * u32::from(channels)).to_le_bytes());
        body.extend_from_slice(&(2 * channels).to_le_bytes());
        body.extend_from_slice(&16u16.to_le_bytes());
        body.extend_from_slice(b"data");
        body.extend_from_slice(&((samples.len() * 2) as u32).to_le_bytes());
        for s in samples {
            body.extend_from_slice(&s.to_le_bytes());
        }
        let mut out = b"RIFF".to_vec();
        out.extend_from_slice(&(body.len() as u32).to_le_bytes());
        out.extend_from_slice(&body);
        out
    }

    fn p() -> &'static Path {
        Path::new("mem.wav")
    }

    #[test]
    fn wav_maps_pcm_to_unit_range() {
        let s = parse_wav(&wav_bytes(&[0, 16384, -32768], 1, false), p()).unwrap();
        assert_eq!(s.samples(), &[0.0, 0.5, -1.0]);
        assert_eq!(s.sample_rate(), Some(8000.0));
    }

    #[test]
    fn wav_skips_unknown_chunks() {
        let s = parse_wav(&wav_bytes(&[1, 2], 1, true), p()).unwrap();
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn wav_rejects_stereo() {
        let err = parse_wav(&wav_bytes(&[1, 2], 2, false), p()).unwrap_err();
        assert!(matches!(err, Error::UnsupportedFormat { .. }), "{err}");
    }

    #[test]
    fn wav_truncated_data_reports_offset() {
        let mut bytes = wav_bytes(&[1, 2, 3, 4], 1, false);
        bytes.truncate(bytes.len() - 3);
        let err = parse_wav(&bytes, p()).unwrap_err();
        match err {
            Error::Parse {
                offset: Offset::Byte(at),
                ..
            } => assert_eq!(at as usize, bytes.len()),
            other => panic!("unexpected {other}"),
        }
        assert!(parse_wav(b"RIFF", p()).is_err());
        assert!(parse_wav(b"RIFX\0\0\0\0WAVE", p()).is_err());
    }

    #[test]
    fn wav_empty_data_is_contract_error() {
        assert!(matches!(
            parse_wav(&wav_bytes(&[], 1, false), p()),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn wav_saturates_on_write() {
        let s = TimeSeries::new(vec![1.0, -1.0, 2.0, 0.25]).unwrap();
        let back = parse_wav(&encode_wav(&s), p()).unwrap();
        assert_eq!(
            back.samples(),
            &[32767.0 / 32768.0, -1.0, 32767.0 / 32768.0, 0.25]
        );
        assert_eq!(back.sample_rate(), Some(f64::from(DEFAULT_WAV_RATE)));
    }

    #[test]
    fn csv_parses_with_and_without_header() {
        let s = parse_csv(b"1.0\n-2.5\n", Path::new("x.csv")).unwrap();
        assert_eq!(s.samples(), &[1.0, -2.5]);
        let s = parse_csv(b"sample\r\n3\r\n", Path::new("x.csv")).unwrap();
        assert_eq!(s.samples(), &[3.0]);
        assert_eq!(s.sample_rate(), None);
    }

    #[test]
    fn csv_errors_name_the_line() {
        match parse_csv(b"1\n2\nabc\n", Path::new("x.csv")).unwrap_err() {
            Error::Parse { offset, .. } => assert_eq!(offset, Offset::Line(3)),
            other => panic!("unexpected {other}"),
        }
        assert!(matches!(
            parse_csv(b"1\nNaN\n", Path::new("x.csv")),
            Err(Error::Parse {
                offset: Offset::Line(2),
                ..
            })
        ));
        assert!(matches!(
            parse_csv(b"sample\n", Path::new("x.csv")),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn json_series() {
        let s = parse_json(
            br#"{"samples":[1,2.5],"sample_rate":11250}"#,
            Path::new("x.json"),
        )
        .unwrap();
        assert_eq!(s.samples(), &[1.0, 2.5]);
        assert_eq!(s.sample_rate(), Some(11250.0));
        let s = parse_json(br#"{"samples":[0.1]}"#, Path::new("x.json")).unwrap();
        assert_eq!(s.sample_rate(), None);
        assert!(matches!(
            parse_json(b"{\n\"samples\": [1,", Path::new("x.json")),
            Err(Error::Parse {
                offset: Offset::Line(2),
                ..
            })
        ));
        assert!(parse_json(br#"{"samples":[]}"#, Path::new("x.json")).is_err());
    }

    #[test]
    fn format_inference() {
        assert_eq!(
            SeriesFormat::from_path(Path::new("a.WAV")).unwrap(),
            SeriesFormat::WavPcm16Mono
        );
        assert_eq!(
            SeriesFormat::from_path(Path::new("a.csv")).unwrap(),
            SeriesFormat::CsvScalar
        );
        assert_eq!(
            SeriesFormat::from_path(Path::new("a.json")).unwrap(),
            SeriesFormat::JsonSeries
        );
        assert!(SeriesFormat::from_path(Path::new("a.mp3")).is_err());
        assert!(SeriesFormat::from_path(Path::new("noext")).is_err());
    }

    fn curve(src: &str, lengths: &[usize], counts: &[usize]) -> MatchCurve {
        MatchCurve {
            points: lengths
                .iter()
                .zip(counts)
                .map(|(&k, &c)| CurvePoint {
                    template_length: k,
                    match_count: c,
                    skipped: false,
                })
                .collect(),
            threshold: 0.98,
            source_label: src.into(),
            data_label: "d".into(),
        }
    }

    #[test]
    fn curves_csv() {
        let bytes = encode_curves(&[curve("a", &[1, 2], &[3, 1])], CurveFormat::Csv).unwrap();
        assert_eq!(String::from_utf8(bytes).unwrap(), "length,a→d\n1,3\n2,1\n");
        let bytes = encode_curves(&[], CurveFormat::Csv).unwrap();
        assert_eq!(String::from_utf8(bytes).unwrap(), "length\n");
    }

    #[test]
    fn curves_grid_mismatch() {
        let curves = [curve("a", &[1, 2], &[3, 1]), curve("b", &[1, 3], &[3, 1])];
        assert!(matches!(
            encode_curves(&curves, CurveFormat::Csv),
            Err(Error::Contract(_))
        ));
        let bytes = encode_curves(&curves, CurveFormat::Json).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
        assert_eq!(v[1]["points"], serde_json::json!([[1, 3], [3, 1]]));
        assert_eq!(v[0]["source"], "a");
        assert_eq!(v[0]["data"], "d");
        assert_eq!(v[0]["threshold"], 0.98);
    }

    #[test]
    fn curves_json_empty() {
        let bytes = encode_curves(&[], CurveFormat::Json).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
        assert_eq!(v, serde_json::json!([]));
    }

    #[test]
    fn profile_csv_leaves_skipped_cells_empty() {
        let data = TimeSeries::new(vec![0.0, 0.0, 1.0, 2.0]).unwrap();
        let profile = crate::matcher::alpha_profile(&[1.0], &data).unwrap();
        let text = String::from_utf8(encode_profile_csv(&profile)).unwrap();
        assert_eq!(text, "lag,alpha_n\n0,\n1,\n2,1.0\n");
    }
}
