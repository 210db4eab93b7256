//! Figure emission: histograms of optimal values, box plots of the values
//! achieved by rules, and pairwise per-election comparisons. Every SVG is
//! rendered from numbers that are first written to a CSV next to it.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

/// A parsed `values.csv` from a run directory.
pub struct ValueTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl ValueTable {
    pub fn load(run_dir: &Path) -> Result<Self, String> {
        let path = run_dir.join("tables/values.csv");
        let text = fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        let mut lines = text.lines();
        let header: Vec<String> = lines
            .next()
            .ok_or("empty values.csv")?
            .split(',')
            .map(str::to_string)
            .collect();
        let rows = lines
            .map(|l| l.split(',').map(str::to_string).collect())
            .collect();
        Ok(ValueTable { header, rows })
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>, String> {
        let idx = self
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| format!("no column {name:?} in values.csv"))?;
        self.rows
            .iter()
            .map(|r| {
                r[idx]
                    .parse::<f64>()
                    .map_err(|e| format!("bad number in column {name}: {e}"))
            })
            .collect()
    }

    pub fn column_str(&self, name: &str) -> Result<Vec<&str>, String> {
        let idx = self
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| format!("no column {name:?} in values.csv"))?;
        Ok(self.rows.iter().map(|r| r[idx].as_str()).collect())
    }
}

/// Histogram of values rounded to one decimal place. Writes `<stem>.csv`
/// (bin, count) and `<stem>.svg`.
pub fn histogram(values: &[f64], out_dir: &Path, stem: &str, title: &str) -> Result<(), String> {
    let mut bins: std::collections::BTreeMap<i64, u64> = std::collections::BTreeMap::new();
    for &v in values {
        let bin = (v * 10.0).round() as i64;
        *bins.entry(bin).or_insert(0) += 1;
    }
    let mut csv = String::from("bin,count\n");
    for (bin, count) in &bins {
        writeln!(csv, "{:.1},{}", *bin as f64 / 10.0, count).unwrap();
    }
    fs::write(out_dir.join(format!("{stem}.csv")), &csv).map_err(|e| e.to_string())?;

    let max_count = bins.values().copied().max().unwrap_or(1) as f64;
    let bar_width = 40.0;
    let width = 80.0 + bins.len() as f64 * (bar_width + 10.0);
    let mut svg = svg_open(width, 320.0, title);
    for (i, (bin, count)) in bins.iter().enumerate() {
        let h = 220.0 * *count as f64 / max_count;
        let x = 60.0 + i as f64 * (bar_width + 10.0);
        writeln!(
            svg,
            r##"<rect x="{x:.1}" y="{:.1}" width="{bar_width}" height="{h:.1}" fill="#4878a8"/>"##,
            260.0 - h
        )
        .unwrap();
        writeln!(
            svg,
            r#"<text x="{:.1}" y="278" font-size="11" text-anchor="middle">{:.1}</text>"#,
            x + bar_width / 2.0,
            *bin as f64 / 10.0
        )
        .unwrap();
        writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="middle">{}</text>"#,
            x + bar_width / 2.0,
            254.0 - h,
            count
        )
        .unwrap();
    }
    svg.push_str("</svg>\n");
    fs::write(out_dir.join(format!("{stem}.svg")), svg).map_err(|e| e.to_string())
}

/// Five-number summary used by the box plots.
#[derive(Debug, Clone, PartialEq)]
pub struct FiveNumber {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

/// Tukey hinges: the median, and medians of the lower and upper halves
/// (halves include the middle observation when the count is odd).
pub fn five_number(values: &[f64]) -> Option<FiveNumber> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median_of = |slice: &[f64]| -> f64 {
        let n = slice.len();
        if n % 2 == 1 {
            slice[n / 2]
        } else {
            (slice[n / 2 - 1] + slice[n / 2]) / 2.0
        }
    };
    let n = sorted.len();
    let half = n / 2 + n % 2;
    Some(FiveNumber {
        min: sorted[0],
        q1: median_of(&sorted[..half]),
        median: median_of(&sorted),
        q3: median_of(&sorted[n - half..]),
        max: sorted[n - 1],
    })
}

/// Box plot of one measure's values per series (optimal first). Writes
/// `<stem>.csv` with the five-number summaries and `<stem>.svg`.
pub fn boxplot(
    series: &[(String, Vec<f64>)],
    out_dir: &Path,
    stem: &str,
    title: &str,
) -> Result<(), String> {
    let mut csv = String::from("series,min,q1,median,q3,max\n");
    let mut summaries = Vec::new();
    for (name, values) in series {
        let s = five_number(values).ok_or_else(|| format!("series {name} is empty"))?;
        writeln!(
            csv,
            "{name},{:.6},{:.6},{:.6},{:.6},{:.6}",
            s.min, s.q1, s.median, s.q3, s.max
        )
        .unwrap();
        summaries.push((name.clone(), s));
    }
    fs::write(out_dir.join(format!("{stem}.csv")), &csv).map_err(|e| e.to_string())?;

    let top = summaries
        .iter()
        .map(|(_, s)| s.max)
        .fold(1.0f64, f64::max);
    let scale = 240.0 / top;
    let y = |v: f64| 270.0 - v * scale;
    let width = 80.0 + summaries.len() as f64 * 90.0;
    let mut svg = svg_open(width, 330.0, title);
    for (i, (name, s)) in summaries.iter().enumerate() {
        let cx = 90.0 + i as f64 * 90.0;
        writeln!(
            svg,
            r##"<line x1="{cx}" y1="{:.1}" x2="{cx}" y2="{:.1}" stroke="#333"/>"##,
            y(s.min),
            y(s.max)
        )
        .unwrap();
        writeln!(
            svg,
            r##"<rect x="{:.1}" y="{:.1}" width="44" height="{:.1}" fill="#a8c8e8" stroke="#333"/>"##,
            cx - 22.0,
            y(s.q3),
            (y(s.q1) - y(s.q3)).max(0.5)
        )
        .unwrap();
        writeln!(
            svg,
            r##"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="#333" stroke-width="2"/>"##,
            cx - 22.0,
            y(s.median),
            cx + 22.0,
            y(s.median)
        )
        .unwrap();
        writeln!(
            svg,
            r#"<text x="{cx}" y="295" font-size="11" text-anchor="middle">{name}</text>"#
        )
        .unwrap();
    }
    // reference line at alpha = 1
    writeln!(
        svg,
        r##"<line x1="50" y1="{0:.1}" x2="{1:.1}" y2="{0:.1}" stroke="#c04040" stroke-dasharray="4 3"/>"##,
        y(1.0),
        width - 20.0
    )
    .unwrap();
    svg.push_str("</svg>\n");
    fs::write(out_dir.join(format!("{stem}.svg")), svg).map_err(|e| e.to_string())
}

/// Pairwise comparison restricted to elections where the two rules chose
/// different committees, ordered by increasing optimal value. Writes
/// `<stem>.csv` (index, optimal, value_a, value_b) and `<stem>.svg`.
pub fn pairwise(
    rows: &[(f64, f64, f64)],
    labels: (&str, &str),
    out_dir: &Path,
    stem: &str,
    title: &str,
) -> Result<(), String> {
    let mut ordered = rows.to_vec();
    ordered.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut csv = format!("index,optimal,{},{}\n", labels.0, labels.1);
    for (i, (opt, a, b)) in ordered.iter().enumerate() {
        writeln!(csv, "{i},{opt:.6},{a:.6},{b:.6}").unwrap();
    }
    fs::write(out_dir.join(format!("{stem}.csv")), &csv).map_err(|e| e.to_string())?;

    let top = ordered
        .iter()
        .flat_map(|(o, a, b)| [*o, *a, *b])
        .fold(1.0f64, f64::max);
    let n = ordered.len().max(2);
    let width = 640.0;
    let plot_w = width - 100.0;
    let x = |i: usize| 60.0 + plot_w * i as f64 / (n - 1) as f64;
    let y = |v: f64| 270.0 - 240.0 * v / top;
    let mut svg = svg_open(width, 330.0, title);
    for (color, pick, label) in [
        ("#888888", 0usize, "optimal"),
        ("#4878a8", 1, labels.0),
        ("#c05850", 2, labels.1),
    ] {
        let points: Vec<String> = ordered
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let v = [row.0, row.1, row.2][pick];
                format!("{:.1},{:.1}", x(i), y(v))
            })
            .collect();
        writeln!(
            svg,
            r##"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"##,
            points.join(" ")
        )
        .unwrap();
        writeln!(
            svg,
            r##"<text x="{:.1}" y="{}" font-size="11" fill="{color}">{label}</text>"##,
            width - 90.0,
            20 + 14 * pick
        )
        .unwrap();
    }
    svg.push_str("</svg>\n");
    fs::write(out_dir.join(format!("{stem}.svg")), svg).map_err(|e| e.to_string())
}

fn svg_open(width: f64, height: f64, title: &str) -> String {
    format!(
        concat!(
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" "#,
            r#"viewBox="0 0 {w} {h}" font-family="sans-serif">"#,
            "\n",
            r#"<text x="10" y="16" font-size="13">{title}</text>"#,
            "\n"
        ),
        w = width,
        h = height,
        title = title
    )
}
