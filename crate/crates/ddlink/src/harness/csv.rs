//! CSV serialization of sweep rows.
//!
//! The format is fixed: a header line naming the eleven columns, then one
//! record per cell, `\n` line endings. Floating-point fields print with
//! 17 significant digits (`{:.16e}`), which round-trips every `f64`
//! exactly, so `parse_csv(emit_csv(rows)) == rows` bit for bit; that
//! exactness is what the determinism checks diff against. Fields are
//! quoted per RFC 4180 only when they contain a delimiter, and the parser
//! accepts quoted fields and CRLF input from other tools.

use crate::controller::WaveformChoice;
use crate::error::{Error, Result};
use crate::harness::sweep::BerRow;
use std::path::Path;

const HEADER: &str =
    "waveform,speed_kmh,mod_order,snr_db,bits,bit_errors,ber,frames,seed,complex_mults,fft_calls";
const FIELDS: usize = 11;

/// Quotes a field per RFC 4180 when it contains a comma, quote, or line
/// break; returns it untouched otherwise.
fn quote_field(field: &str) -> String {
    if field.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// `f64` formatting used for every floating-point column: 17 significant
/// digits, enough to reconstruct the exact value.
fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Serializes rows into the fixed-format CSV document.
pub fn emit_csv(rows: &[BerRow]) -> String {
    let mut out = String::with_capacity(64 + rows.len() * 128);
    out.push_str(HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            quote_field(&r.waveform.to_string()),
            format_f64(r.speed_kmh),
            r.mod_order,
            format_f64(r.snr_db),
            r.bits,
            r.bit_errors,
            format_f64(r.ber),
            r.frames,
            r.seed,
            r.complex_mults,
            r.fft_calls,
        ));
    }
    out
}

/// Writes [`emit_csv`] output to a file.
pub fn write_csv(path: &Path, rows: &[BerRow]) -> Result<()> {
    std::fs::write(path, emit_csv(rows)).map_err(|e| Error::io(path, e))
}

/// Splits CSV text into records of fields, honoring RFC 4180 quoting and
/// tolerating CRLF endings. The final record may lack a trailing newline.
fn split_records(text: &str) -> Result<Vec<Vec<String>>> {
    let mut records = Vec::new();
    let mut fields = Vec::new();
    let mut cur = String::new();
    let mut in_quotes = false;
    let mut saw_any = false;
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        if in_quotes {
            match c {
                '"' => {
                    if chars.peek() == Some(&'"') {
                        cur.push('"');
                        chars.next();
                    } else {
                        in_quotes = false;
                    }
                }
                _ => cur.push(c),
            }
        } else {
            match c {
                '"' if cur.is_empty() => in_quotes = true,
                ',' => {
                    fields.push(std::mem::take(&mut cur));
                    saw_any = true;
                }
                '\n' => {
                    if saw_any || !cur.is_empty() {
                        fields.push(std::mem::take(&mut cur));
                        records.push(std::mem::take(&mut fields));
                    }
                    saw_any = false;
                }
                '\r' => {}
                _ => {
                    cur.push(c);
                    saw_any = true;
                }
            }
        }
    }
    if in_quotes {
        return Err(Error::invalid("CSV has an unterminated quoted field".to_string()));
    }
    if saw_any || !cur.is_empty() {
        fields.push(cur);
        records.push(fields);
    }
    Ok(records)
}

fn parse_field<T: std::str::FromStr>(field: &str, name: &str, line: usize) -> Result<T> {
    field.parse::<T>().map_err(|_| {
        Error::invalid(format!("line {line}: cannot parse {name} from {field:?}"))
    })
}

/// Parses a document produced by [`emit_csv`]. The header must match the
/// fixed format exactly.
pub fn parse_csv(text: &str) -> Result<Vec<BerRow>> {
    let records = split_records(text)?;
    let mut iter = records.into_iter().enumerate();
    match iter.next() {
        Some((_, header)) if header.join(",") == HEADER => {}
        Some((_, header)) => {
            return Err(Error::invalid(format!(
                "unexpected CSV header {:?}; expected {HEADER:?}",
                header.join(",")
            )))
        }
        None => return Err(Error::invalid("empty CSV document".to_string())),
    }
    let mut rows = Vec::new();
    for (idx, record) in iter {
        let line = idx + 1;
        if record.len() != FIELDS {
            return Err(Error::invalid(format!(
                "line {line}: expected {FIELDS} fields, got {}",
                record.len()
            )));
        }
        let waveform = match record[0].as_str() {
            "ofdm" => WaveformChoice::Ofdm,
            "otfs" => WaveformChoice::Otfs,
            other => {
                return Err(Error::invalid(format!("line {line}: unknown waveform {other:?}")))
            }
        };
        rows.push(BerRow {
            waveform,
            speed_kmh: parse_field(&record[1], "speed_kmh", line)?,
            mod_order: parse_field(&record[2], "mod_order", line)?,
            snr_db: parse_field(&record[3], "snr_db", line)?,
            bits: parse_field(&record[4], "bits", line)?,
            bit_errors: parse_field(&record[5], "bit_errors", line)?,
            ber: parse_field(&record[6], "ber", line)?,
            frames: parse_field(&record[7], "frames", line)?,
            seed: parse_field(&record[8], "seed", line)?,
            complex_mults: parse_field(&record[9], "complex_mults", line)?,
            fft_calls: parse_field(&record[10], "fft_calls", line)?,
        });
    }
    Ok(rows)
}

// ─────────────────────────────────────────────────────────────────────────

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_rows() -> Vec<BerRow> {
        vec![
            BerRow {
                waveform: WaveformChoice::Ofdm,
                speed_kmh: 3.0,
                mod_order: 4,
                snr_db: 10.0,
                bits: 10_240,
                bit_errors: 157,
                ber: 157.0 / 10_240.0,
                frames: 40,
                seed: 0xDEAD_BEEF_u64,
                complex_mults: 123_456,
                fft_calls: 640,
            },
            BerRow {
                waveform: WaveformChoice::Otfs,
                speed_kmh: 500.0,
                mod_order: 16,
                snr_db: f64::INFINITY,
                bits: 20_480,
                bit_errors: 0,
                ber: 0.0,
                frames: 40,
                seed: u64::MAX,
                complex_mults: u64::MAX / 2,
                fft_calls: 1,
            },
        ]
    }

    #[test]
    fn round_trip_is_exact() {
        let rows = sample_rows();
        let text = emit_csv(&rows);
        assert!(text.starts_with(HEADER));
        assert!(text.ends_with('\n'));
        let back = parse_csv(&text).unwrap();
        assert_eq!(rows, back);
    }

    #[test]
    fn awkward_floats_survive_the_round_trip() {
        let mut rows = sample_rows();
        rows[0].ber = 1.0 / 3.0;
        rows[0].speed_kmh = f64::MIN_POSITIVE;
        rows[0].snr_db = -0.1 + 0.3;
        let back = parse_csv(&emit_csv(&rows)).unwrap();
        assert_eq!(rows[0].ber.to_bits(), back[0].ber.to_bits());
        assert_eq!(rows[0].speed_kmh.to_bits(), back[0].speed_kmh.to_bits());
        assert_eq!(rows[0].snr_db.to_bits(), back[0].snr_db.to_bits());
    }

    #[test]
    fn parser_accepts_quoted_fields_and_crlf() {
        let text = format!(
            "{HEADER}\r\n\"ofdm\",3.0000000000000000e0,4,1.0000000000000000e1,100,1,1.0000000000000000e-2,1,7,10,2\r\n"
        );
        let rows = parse_csv(&text).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].waveform, WaveformChoice::Ofdm);
        assert_eq!(rows[0].bits, 100);
    }

    #[test]
    fn quoting_escapes_delimiters() {
        assert_eq!(quote_field("plain"), "plain");
        assert_eq!(quote_field("a,b"), "\"a,b\"");
        assert_eq!(quote_field("say \"hi\""), "\"say \"\"hi\"\"\"");
        assert_eq!(quote_field("two\nlines"), "\"two\nlines\"");
    }

    #[test]
    fn malformed_documents_are_rejected() {
        assert!(parse_csv("").is_err());
        assert!(parse_csv("not,the,header\n").is_err());
        let missing_field = format!("{HEADER}\nofdm,3.0,4\n");
        assert!(parse_csv(&missing_field).is_err());
        let bad_number = format!(
            "{HEADER}\nofdm,x,4,1.0e1,100,1,1.0e-2,1,7,10,2\n"
        );
        assert!(parse_csv(&bad_number).is_err());
        let bad_waveform = format!(
            "{HEADER}\ncdma,3.0e0,4,1.0e1,100,1,1.0e-2,1,7,10,2\n"
        );
        assert!(parse_csv(&bad_waveform).is_err());
        let unterminated = format!("{HEADER}\n\"ofdm,3.0e0,4\n");
        assert!(parse_csv(&unterminated).is_err());
    }
}
