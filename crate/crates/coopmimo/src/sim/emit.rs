//! Result emission: CSV records and a static SVG plot of BER curves.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Result, SimError};
use crate::sim::run::{BerRecord, SweepVariable};

pub const CSV_HEADER: &str = "scheme,strategy,n_relays,ps_db,frames,info_bits,bit_errors,ber,seed";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Svg,
}

impl OutputFormat {
    pub fn parse(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "svg" => Ok(OutputFormat::Svg),
            other => Err(SimError::Config(format!("unknown output format '{other}'"))),
        }
    }
}

pub fn emit_results(
    records: &[BerRecord],
    format: OutputFormat,
    variable: SweepVariable,
    path: &Path,
) -> Result<()> {
    if records.is_empty() {
        return Err(SimError::Config("no records to emit".into()));
    }
    let payload = match format {
        OutputFormat::Csv => render_csv(records),
        OutputFormat::Svg => render_svg(records, variable),
    };
    std::fs::write(path, payload)?;
    Ok(())
}

pub fn render_csv(records: &[BerRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.scheme,
            r.strategy,
            r.n_relays,
            r.ps_db,
            r.frames,
            r.info_bits,
            r.bit_errors,
            r.ber,
            r.seed
        )
        .expect("string write");
    }
    out
}

pub fn parse_csv(text: &str) -> Result<Vec<BerRecord>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == CSV_HEADER => {}
        other => {
            return Err(SimError::Config(format!(
                "unexpected CSV header: {other:?}"
            )))
        }
    }
    let mut records = Vec::new();
    for (n, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 9 {
            return Err(SimError::Config(format!(
                "row {}: expected 9 fields, got {}",
                n + 2,
                fields.len()
            )));
        }
        let parse_err =
            |what: &str| SimError::Config(format!("row {}: bad {what}", n + 2));
        records.push(BerRecord {
            scheme: fields[0].to_string(),
            strategy: fields[1].to_string(),
            n_relays: fields[2].parse().map_err(|_| parse_err("n_relays"))?,
            ps_db: fields[3].parse().map_err(|_| parse_err("ps_db"))?,
            frames: fields[4].parse().map_err(|_| parse_err("frames"))?,
            info_bits: fields[5].parse().map_err(|_| parse_err("info_bits"))?,
            bit_errors: fields[6].parse().map_err(|_| parse_err("bit_errors"))?,
            ber: fields[7].parse().map_err(|_| parse_err("ber"))?,
            seed: fields[8].parse().map_err(|_| parse_err("seed"))?,
        });
    }
    Ok(records)
}

const PLOT_W: f64 = 720.0;
const PLOT_H: f64 = 480.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 170.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 50.0;
const CURVE_COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

/// Renders BER (log scale) against the sweep variable, one polyline per
/// (scheme, strategy) pair present in the records.
pub fn render_svg(records: &[BerRecord], variable: SweepVariable) -> String {
    let x_of = |r: &BerRecord| -> f64 {
        match variable {
            SweepVariable::NRelays => r.n_relays as f64,
            SweepVariable::PsDb => r.ps_db,
        }
    };
    // Zero BER cannot sit on a log axis; clamp to one decade under the
    // smallest nonzero value (or 1e-8 if everything is zero).
    let min_nonzero = records
        .iter()
        .map(|r| r.ber)
        .filter(|&b| b > 0.0)
        .fold(f64::INFINITY, f64::min);
    let floor = if min_nonzero.is_finite() {
        (min_nonzero / 10.0).max(1e-12)
    } else {
        1e-8
    };

    let xs: Vec<f64> = records.iter().map(x_of).collect();
    let x_min = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let x_max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let x_span = if (x_max - x_min).abs() < 1e-12 { 1.0 } else { x_max - x_min };
    let y_top: f64 = 0.0; // log10(1)
    let y_bot = floor.log10().floor();
    let y_span = (y_top - y_bot).max(1.0);

    let to_px = |x: f64, ber: f64| -> (f64, f64) {
        let lx = MARGIN_L + (x - x_min) / x_span * (PLOT_W - MARGIN_L - MARGIN_R);
        let ly = ber.max(floor).log10();
        let py = MARGIN_T + (y_top - ly) / y_span * (PLOT_H - MARGIN_T - MARGIN_B);
        (lx, py)
    };

    // Stable grouping by (scheme, strategy), in order of first appearance.
    let mut groups: Vec<(String, Vec<&BerRecord>)> = Vec::new();
    for r in records {
        let key = format!("{} / {}", r.scheme, r.strategy);
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(r),
            None => groups.push((key, vec![r])),
        }
    }

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{PLOT_W}" height="{PLOT_H}" viewBox="0 0 {PLOT_W} {PLOT_H}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    // Axes.
    let x0 = MARGIN_L;
    let x1 = PLOT_W - MARGIN_R;
    let y0 = PLOT_H - MARGIN_B;
    let y1 = MARGIN_T;
    let _ = writeln!(
        svg,
        r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>"#
    );
    // Log-decade gridlines and labels.
    let mut decade = y_top;
    while decade >= y_bot - 0.5 {
        let (_, py) = to_px(x_min, 10f64.powf(decade));
        let _ = writeln!(
            svg,
            r##"<line x1="{x0}" y1="{py}" x2="{x1}" y2="{py}" stroke="#dddddd"/>"##
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-size="11" text-anchor="end">1e{}</text>"#,
            x0 - 6.0,
            py + 4.0,
            decade as i64
        );
        decade -= 1.0;
    }
    // X labels at each distinct value.
    let mut x_vals: Vec<f64> = xs.clone();
    x_vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    x_vals.dedup();
    for x in &x_vals {
        let (px, _) = to_px(*x, 1.0);
        let _ = writeln!(
            svg,
            r#"<text x="{px}" y="{}" font-size="11" text-anchor="middle">{x}</text>"#,
            y0 + 18.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        PLOT_H - 12.0,
        variable.name()
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{}" font-size="12" transform="rotate(-90 16 {})" text-anchor="middle">BER</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );

    for (gi, (key, group)) in groups.iter().enumerate() {
        let color = CURVE_COLORS[gi % CURVE_COLORS.len()];
        let mut pts: Vec<(f64, f64)> = group.iter().map(|r| (x_of(r), r.ber)).collect();
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let path: Vec<String> = pts
            .iter()
            .map(|&(x, b)| {
                let (px, py) = to_px(x, b);
                format!("{px:.1},{py:.1}")
            })
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            path.join(" ")
        );
        for &(x, b) in &pts {
            let (px, py) = to_px(x, b);
            let _ = writeln!(svg, r#"<circle cx="{px:.1}" cy="{py:.1}" r="2.5" fill="{color}"/>"#);
        }
        // Legend.
        let ly = MARGIN_T + 16.0 * gi as f64 + 10.0;
        let lx = PLOT_W - MARGIN_R + 12.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            lx + 18.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-size="11">{key}</text>"#,
            lx + 24.0,
            ly + 4.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(scheme: &str, strategy: &str, n: usize, ber: f64) -> BerRecord {
        BerRecord {
            scheme: scheme.into(),
            strategy: strategy.into(),
            n_relays: n,
            ps_db: 0.0,
            frames: 1000,
            info_bits: 10_000,
            bit_errors: (ber * 10_000.0) as u64,
            ber,
            seed: 42,
        }
    }

    #[test]
    fn single_record_csv_has_header_and_row() {
        let csv = render_csv(&[record("dlst", "pi", 100, 1e-3)]);
        let lines: Vec<&str> = csv.trim_end().lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], CSV_HEADER);
        assert!(lines[1].starts_with("dlst,pi,100,0,1000,10000,"));
    }

    #[test]
    fn csv_round_trip() {
        let records = vec![
            record("alamouti", "pi", 10, 0.0123),
            record("golden", "random", 200, 3.25e-5),
            record("dlst", "pi", 100, 0.0),
        ];
        let parsed = parse_csv(&render_csv(&records)).unwrap();
        assert_eq!(parsed, records);
    }

    #[test]
    fn csv_rejects_bad_header_and_rows() {
        assert!(parse_csv("nope\n1,2,3").is_err());
        let bad = format!("{CSV_HEADER}\na,b,c\n");
        assert!(parse_csv(&bad).is_err());
    }

    #[test]
    fn svg_has_one_polyline_per_group() {
        let records = vec![
            record("dlst", "pi", 10, 1e-2),
            record("dlst", "pi", 100, 1e-3),
            record("dlst", "random", 10, 5e-2),
            record("dlst", "random", 100, 2e-2),
            record("golden", "pi", 10, 3e-2),
            record("golden", "pi", 100, 8e-3),
        ];
        let svg = render_svg(&records, SweepVariable::NRelays);
        let polylines = svg.matches("<polyline").count();
        assert_eq!(polylines, 3);
        assert!(svg.contains("dlst / pi"));
        assert!(svg.contains("golden / pi"));
    }

    #[test]
    fn svg_handles_zero_ber_points() {
        let records = vec![record("dlst", "pi", 10, 0.0), record("dlst", "pi", 100, 0.0)];
        let svg = render_svg(&records, SweepVariable::NRelays);
        assert!(svg.contains("<polyline"));
        assert!(!svg.contains("NaN"));
        assert!(!svg.contains("inf"));
    }

    #[test]
    fn emit_reports_io_failure() {
        let err = emit_results(
            &[record("dlst", "pi", 10, 0.1)],
            OutputFormat::Csv,
            SweepVariable::NRelays,
            Path::new("/nonexistent-dir/out.csv"),
        );
        assert!(matches!(err, Err(SimError::Io(_))));
    }
}
