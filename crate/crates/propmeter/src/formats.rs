//! File formats: the BLT ballot format, a canonical JSON schema, and a CSV
//! adapter for converting tabular ballot data to BLT.
//!
//! BLT grammar (UTF-8, `\n` newlines, `#`-prefixed comment lines skipped):
//!
//! ```text
//! m k                  header: candidate count, committee size
//! w c1 c2 ... cr 0     one line per ballot type, sentinel 0
//! 0                    end of ballot section
//! "name 1" ... "name m"
//! "title"
//! ```

use crate::model::{BallotType, Election, ModelError};
use serde::{Deserialize, Serialize};

/// Parses BLT text into an [`Election`]. Identical prefixes are merged by
/// summing weights; every error carries the offending line number.
pub fn parse_blt(text: &str) -> Result<Election, ModelError> {
    let mut lines = text
        .split('\n')
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));

    let (header_no, header) = lines
        .next()
        .ok_or_else(|| ModelError::parse_at(1, "empty input"))?;
    let mut it = header.split_whitespace();
    let m: usize = parse_int(header_no, it.next(), "candidate count")?;
    let k: usize = parse_int(header_no, it.next(), "committee size")?;
    if it.next().is_some() {
        return Err(ModelError::parse_at(
            header_no,
            "malformed header: expected exactly two integers",
        ));
    }
    if m < 2 {
        return Err(ModelError::parse_at(header_no, "need at least 2 candidates"));
    }
    if k < 1 || k >= m {
        return Err(ModelError::parse_at(
            header_no,
            format!("committee size {k} out of range [1, {m})"),
        ));
    }

    let mut ballots = Vec::new();
    let mut terminator_line = None;
    for (no, line) in &mut lines {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens == ["0"] {
            terminator_line = Some(no);
            break;
        }
        let weight: u64 = parse_int(no, tokens.first().copied(), "ballot weight")?;
        if weight == 0 {
            return Err(ModelError::parse_at(no, "ballot weight must be positive"));
        }
        match tokens.last() {
            Some(&"0") => {}
            _ => {
                return Err(ModelError::parse_at(
                    no,
                    "missing ballot terminator 0 at end of line",
                ))
            }
        }
        let body = &tokens[1..tokens.len() - 1];
        if body.is_empty() {
            return Err(ModelError::parse_at(no, "ballot ranks no candidate"));
        }
        let mut prefix = Vec::with_capacity(body.len());
        let mut seen = vec![false; m + 1];
        for tok in body {
            let c: usize = parse_int(no, Some(tok), "candidate index")?;
            if c == 0 || c > m {
                return Err(ModelError::parse_at(
                    no,
                    format!("candidate index {c} out of range [1, {m}]"),
                ));
            }
            if seen[c] {
                return Err(ModelError::parse_at(
                    no,
                    format!("candidate {c} repeated within one ballot"),
                ));
            }
            seen[c] = true;
            prefix.push(c);
        }
        ballots.push(BallotType { weight, prefix });
    }
    let terminator_line = terminator_line
        .ok_or_else(|| ModelError::parse_at(count_lines(text), "missing ballot section terminator"))?;
    if ballots.is_empty() {
        return Err(ModelError::parse_at(terminator_line, "no ballots"));
    }

    let mut names = Vec::with_capacity(m);
    for _ in 0..m {
        let (no, line) = lines.next().ok_or_else(|| {
            ModelError::parse_at(count_lines(text), format!("expected {m} candidate names"))
        })?;
        names.push(parse_quoted(no, line)?);
    }
    let (title_no, title_line) = lines
        .next()
        .ok_or_else(|| ModelError::parse_at(count_lines(text), "missing title line"))?;
    let title = parse_quoted(title_no, title_line)?;
    if let Some((no, _)) = lines.next() {
        return Err(ModelError::parse_at(no, "trailing content after title"));
    }

    Election::new(title, names, k, ballots)
}

/// Writes the canonical BLT representation: merged ballot types in
/// lexicographic prefix order. Parsing the output reproduces the election.
pub fn write_blt(e: &Election) -> String {
    let mut out = String::new();
    out.push_str(&format!("{} {}\n", e.num_candidates(), e.seats()));
    for b in e.ballots() {
        out.push_str(&b.weight.to_string());
        for c in &b.prefix {
            out.push_str(&format!(" {c}"));
        }
        out.push_str(" 0\n");
    }
    out.push_str("0\n");
    for c in e.candidates() {
        out.push_str(&format!("\"{}\"\n", c.name));
    }
    out.push_str(&format!("\"{}\"\n", e.title));
    out
}

#[derive(Serialize, Deserialize)]
struct ElectionJson {
    title: String,
    candidates: Vec<String>,
    seats: usize,
    ballots: Vec<BallotType>,
}

/// Canonical JSON form: fixed field order, ballots in canonical order, so
/// serialisation is deterministic and round-trips losslessly.
pub fn to_json(e: &Election) -> String {
    let raw = ElectionJson {
        title: e.title.clone(),
        candidates: e.candidates().iter().map(|c| c.name.clone()).collect(),
        seats: e.seats(),
        ballots: e.ballots().to_vec(),
    };
    serde_json::to_string_pretty(&raw).expect("serialising an election cannot fail")
}

pub fn from_json(text: &str) -> Result<Election, ModelError> {
    let raw: ElectionJson =
        serde_json::from_str(text).map_err(|e| ModelError::Invalid(format!("bad JSON: {e}")))?;
    Election::new(raw.title, raw.candidates, raw.seats, raw.ballots)
}

/// Converts the public Scottish corpus CSV layout to an election.
///
/// Layout (every row carries a trailing comma):
///
/// ```text
/// m,k,
/// w,c1,c2,...,        one row per ballot type, candidate indices
/// "Candidate i","Name","Party (X)",   one row per candidate
/// "Ward name",
/// ```
pub fn csv_to_election(text: &str) -> Result<Election, ModelError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut records: Vec<Vec<String>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| ModelError::Invalid(format!("row {}: {e}", i + 1)))?;
        let mut fields: Vec<String> = record.iter().map(str::to_string).collect();
        while fields.last().is_some_and(|f| f.trim().is_empty()) {
            fields.pop();
        }
        if !fields.is_empty() {
            records.push(fields);
        }
    }
    let mut rows = records.into_iter();

    let header = rows
        .next()
        .ok_or_else(|| ModelError::Invalid("empty csv".into()))?;
    if header.len() < 2 {
        return Err(ModelError::Invalid("header needs candidate and seat counts".into()));
    }
    let m: usize = csv_int(&header[0], "candidate count")?;
    let k: usize = csv_int(&header[1], "committee size")?;

    let mut ballots = Vec::new();
    let mut names: Vec<String> = Vec::new();
    let mut title = None;
    for row in rows {
        if names.is_empty() && title.is_none() {
            if let Ok(weight) = row[0].trim().parse::<u64>() {
                let prefix = row[1..]
                    .iter()
                    .map(|f| csv_int(f, "candidate index"))
                    .collect::<Result<Vec<usize>, _>>()?;
                ballots.push(BallotType { weight, prefix });
                continue;
            }
        }
        // candidate rows: "Candidate i","Name","Party (X)" — fall through to
        // the title row once m names are collected
        if names.len() < m {
            let name = match (row.get(1), row.get(2)) {
                (Some(name), Some(party)) => format!("{} ({})", name.trim(), party.trim()),
                (Some(name), None) => name.trim().to_string(),
                _ => row[0].trim().to_string(),
            };
            names.push(name);
        } else if title.is_none() {
            title = Some(row[0].trim().to_string());
        } else {
            return Err(ModelError::Invalid(format!(
                "unexpected trailing row {row:?}"
            )));
        }
    }
    let title = title.ok_or_else(|| ModelError::Invalid("missing ward row".into()))?;
    if names.len() != m {
        return Err(ModelError::Invalid(format!(
            "expected {m} candidate rows, found {}",
            names.len()
        )));
    }
    Election::new(title, names, k, ballots)
}

/// Parses the ballot-file dialect the published corpus uses: the numeric
/// section as in BLT (tolerating trailing commas), followed by one *plain*
/// line per candidate name (outer quotes optional, doubled quotes as
/// escapes) and a final plain title line. A handful of files carry their
/// names only as `# ALTERNATIVE NAME i: ...` comment lines, which are
/// folded back into name lines here.
pub fn parse_blt_dialect(text: &str) -> Result<Election, ModelError> {
    let lines: Vec<&str> = text
        .split('\n')
        .map(|l| l.trim_end_matches('\r'))
        .map(|l| {
            l.trim()
                .split_once(':')
                .filter(|(head, _)| {
                    head.trim_start().starts_with('#') && head.contains("ALTERNATIVE NAME")
                })
                .map(|(_, name)| name.trim())
                .unwrap_or(l)
        })
        .filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .collect();
    let numeric = |line: &str| -> Option<Vec<u64>> {
        line.trim()
            .trim_end_matches(',')
            .split_whitespace()
            .map(|t| t.parse::<u64>().ok())
            .collect()
    };

    let header = numeric(lines.first().copied().unwrap_or(""))
        .filter(|h| h.len() == 2)
        .ok_or_else(|| ModelError::parse_at(1, "malformed header"))?;
    let (m, k) = (header[0] as usize, header[1] as usize);

    let mut ballots = Vec::new();
    let mut cursor = 1;
    loop {
        let line = lines
            .get(cursor)
            .ok_or_else(|| ModelError::parse_at(cursor, "missing ballot section terminator"))?;
        cursor += 1;
        let numbers = numeric(line)
            .ok_or_else(|| ModelError::parse_at(cursor, "expected a numeric ballot line"))?;
        if numbers == [0] {
            break;
        }
        if numbers.len() < 3 || *numbers.last().unwrap() != 0 {
            return Err(ModelError::parse_at(cursor, "malformed ballot line"));
        }
        ballots.push(BallotType {
            weight: numbers[0],
            prefix: numbers[1..numbers.len() - 1]
                .iter()
                .map(|&c| c as usize)
                .collect(),
        });
    }

    let tail = &lines[cursor..];
    if tail.len() != m + 1 {
        return Err(ModelError::parse_at(
            cursor,
            format!("expected {m} names and a title, found {} lines", tail.len()),
        ));
    }
    let unquote = |s: &str| -> String {
        let t = s.trim();
        if t.len() >= 2 && t.starts_with('"') && t.ends_with('"') {
            t[1..t.len() - 1].replace("\"\"", "\"")
        } else {
            t.to_string()
        }
    };
    let names: Vec<String> = tail[..m].iter().map(|l| unquote(l)).collect();
    let title = unquote(tail[m]);
    Election::new(title, names, k, ballots)
}

fn csv_int<T: std::str::FromStr>(field: &str, what: &str) -> Result<T, ModelError> {
    field
        .trim()
        .parse()
        .map_err(|_| ModelError::Invalid(format!("invalid {what}: {field:?}")))
}

fn parse_int<T: std::str::FromStr>(
    line: usize,
    token: Option<&str>,
    what: &str,
) -> Result<T, ModelError> {
    let token = token.ok_or_else(|| ModelError::parse_at(line, format!("missing {what}")))?;
    token
        .parse()
        .map_err(|_| ModelError::parse_at(line, format!("invalid {what}: {token:?}")))
}

fn parse_quoted(line_no: usize, line: &str) -> Result<String, ModelError> {
    let t = line.trim();
    if t.len() >= 2 && t.starts_with('"') && t.ends_with('"') {
        Ok(t[1..t.len() - 1].to_string())
    } else {
        Err(ModelError::parse_at(
            line_no,
            format!("expected a double-quoted string, got {t:?}"),
        ))
    }
}

fn count_lines(text: &str) -> usize {
    text.split('\n').count()
}
