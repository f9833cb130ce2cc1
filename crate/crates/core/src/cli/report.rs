//! Fitness-history CSV and SVG chart.

use std::fmt::Write as _;

use thiserror::Error;

use crate::engine::HistoryRow;

pub const CSV_HEADER: &str = "generation,best_fitness,mean_fitness";

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 60.0;
const TICKS: usize = 5;
const BEST_COLOR: &str = "#1f77b4";
const MEAN_COLOR: &str = "#ff7f0e";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReportError {
    #[error("fitness history is empty")]
    EmptyHistory,
    #[error("fitness csv line {line}: {reason}")]
    Malformed { line: usize, reason: String },
}

/// `%g`-style formatting with `sig` significant digits.
pub fn format_sig(v: f64, sig: usize) -> String {
    assert!(sig >= 1);
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{:.*e}", sig - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= sig as i32 {
        let mantissa = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        strip_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// The history as CSV: header, one row per generation, 9 significant digits.
pub fn fitness_csv(history: &[HistoryRow]) -> String {
    let mut out = String::with_capacity(32 * (history.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in history {
        let _ = writeln!(
            out,
            "{},{},{}",
            row.generation,
            format_sig(row.best_fitness, 9),
            format_sig(row.mean_fitness, 9)
        );
    }
    out
}

/// Parses [`fitness_csv`] output; generations must run 0, 1, 2, ….
pub fn parse_fitness_csv(text: &str) -> Result<Vec<HistoryRow>, ReportError> {
    let malformed = |line: usize, reason: String| ReportError::Malformed { line, reason };
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(malformed(1, format!("expected header `{CSV_HEADER}`")));
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let fields: Vec<&str> = line.split(',').collect();
        let [g, best, mean] = fields[..] else {
            return Err(malformed(
                line_no,
                format!("expected 3 fields, got {}", fields.len()),
            ));
        };
        let generation: usize = g
            .parse()
            .map_err(|_| malformed(line_no, format!("bad generation `{g}`")))?;
        if generation != rows.len() {
            return Err(malformed(
                line_no,
                format!("generation {generation} out of order"),
            ));
        }
        let num = |s: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| malformed(line_no, format!("bad number `{s}`")))
        };
        rows.push(HistoryRow {
            generation,
            best_fitness: num(best)?,
            mean_fitness: num(mean)?,
        });
    }
    Ok(rows)
}

/// Rows as they read back from the CSV file.
pub fn csv_rounded(history: &[HistoryRow]) -> Vec<HistoryRow> {
    parse_fitness_csv(&fitness_csv(history)).expect("own output parses")
}

struct Axis {
    lo: f64,
    hi: f64,
    from: f64,
    to: f64,
}

impl Axis {
    fn map(&self, v: f64) -> f64 {
        self.from + (v - self.lo) / (self.hi - self.lo) * (self.to - self.from)
    }
}

fn polyline(out: &mut String, points: impl Iterator<Item = (f64, f64)>, color: &str, class: &str) {
    let coords: Vec<String> = points.map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
    let _ = writeln!(
        out,
        r#"<polyline class="{class}" fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
        coords.join(" ")
    );
}

/// Line chart of best and mean fitness per generation.
///
/// The output depends only on `history`, byte for byte.
pub fn render_fitness_svg(history: &[HistoryRow]) -> Result<String, ReportError> {
    let first = history.first().ok_or(ReportError::EmptyHistory)?;
    let last = history.last().expect("non-empty");

    let (mut x_lo, mut x_hi) = (first.generation as f64, last.generation as f64);
    if x_hi <= x_lo {
        x_lo -= 0.5;
        x_hi += 0.5;
    }
    let values = history
        .iter()
        .flat_map(|r| [r.best_fitness, r.mean_fitness]);
    let (y_min, y_max) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    let span = y_max - y_min;
    let pad = if span > 0.0 {
        span * 0.05
    } else if y_max != 0.0 {
        y_max.abs() * 0.05
    } else {
        1.0
    };
    let x = Axis {
        lo: x_lo,
        hi: x_hi,
        from: LEFT,
        to: WIDTH - RIGHT,
    };
    let y = Axis {
        lo: y_min - pad,
        hi: y_max + pad,
        from: HEIGHT - BOTTOM,
        to: TOP,
    };

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="800" height="500" viewBox="0 0 800 500" font-family="sans-serif" font-size="12">"#
    );
    out.push_str("<rect width=\"800\" height=\"500\" fill=\"white\"/>\n");
    let _ = writeln!(
        out,
        r#"<text x="400" y="28" text-anchor="middle" font-size="16">Fitness per generation</text>"#
    );
    let (px0, px1, py0, py1) = (LEFT, WIDTH - RIGHT, HEIGHT - BOTTOM, TOP);
    let _ = writeln!(
        out,
        r#"<path d="M{px0:.2},{py1:.2} L{px0:.2},{py0:.2} L{px1:.2},{py0:.2}" fill="none" stroke="black"/>"#
    );
    for i in 0..=TICKS {
        let t = i as f64 / TICKS as f64;
        let gx = x.lo + t * (x.hi - x.lo);
        let sx = x.map(gx);
        let _ = writeln!(
            out,
            r#"<line x1="{sx:.2}" y1="{py0:.2}" x2="{sx:.2}" y2="{:.2}" stroke="black"/><text x="{sx:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            py0 + 5.0,
            py0 + 20.0,
            format_sig(gx, 4)
        );
        let fy = y.lo + t * (y.hi - y.lo);
        let sy = y.map(fy);
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{sy:.2}" x2="{px0:.2}" y2="{sy:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            px0 - 5.0,
            px0 - 8.0,
            sy + 4.0,
            format_sig(fy, 4)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">Generation</text>"#,
        (px0 + px1) / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        out,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">Fitness</text>"#,
        (py0 + py1) / 2.0,
        (py0 + py1) / 2.0
    );
    let (xa, ya) = (&x, &y);
    let pts = |f: fn(&HistoryRow) -> f64| {
        history
            .iter()
            .map(move |r| (xa.map(r.generation as f64), ya.map(f(r))))
    };
    polyline(&mut out, pts(|r| r.best_fitness), BEST_COLOR, "best");
    polyline(&mut out, pts(|r| r.mean_fitness), MEAN_COLOR, "mean");

    let lx = WIDTH - RIGHT - 150.0;
    for (i, (label, color)) in [("best fitness", BEST_COLOR), ("mean fitness", MEAN_COLOR)]
        .iter()
        .enumerate()
    {
        let ly = TOP + 15.0 + 18.0 * i as f64;
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{label}</text>"#,
            lx + 25.0,
            lx + 32.0,
            ly + 4.0
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}
