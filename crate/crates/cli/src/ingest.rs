//! Reading graphs from disk.

use std::path::Path;

use clx_core::graph::{build_digraph, ComplexDigraph, ComplexWeight, Edge, GraphFile};

use crate::args::InputFormat;
use crate::CliError;

pub fn read_graph(path: &Path, format: Option<InputFormat>) -> Result<ComplexDigraph, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
    let format = format.unwrap_or_else(|| {
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
            InputFormat::Eies
        } else {
            InputFormat::Json
        }
    });
    match format {
        InputFormat::Json => parse_graph_json(&text),
        InputFormat::Eies => parse_eies(&text),
    }
}

pub fn parse_graph_json(text: &str) -> Result<ComplexDigraph, CliError> {
    let file: GraphFile = serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
    Ok(file.into_digraph()?)
}

/// Message-count CSV with rows `i,j,m_ij,m_ji` (1-based nodes). Row `i,j`
/// becomes the edge `i -> j` with weight `m_ij + ι·m_ji`; rows with both
/// counts zero are skipped. A non-numeric first row is taken as a header.
pub fn parse_eies(text: &str) -> Result<ComplexDigraph, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Parse(e.to_string()))?;
        let line = record.position().map_or(k + 1, |p| p.line() as usize);
        if record.len() != 4 {
            return Err(CliError::Parse(format!("line {line}: expected 4 fields, found {}", record.len())));
        }
        let parsed: Result<Vec<i64>, _> = record.iter().map(str::parse::<i64>).collect();
        let fields = match parsed {
            Ok(f) => f,
            Err(_) if k == 0 => continue,
            Err(e) => return Err(CliError::Parse(format!("line {line}: {e}"))),
        };
        if fields[2] < 0 || fields[3] < 0 {
            return Err(CliError::NegativeCount { line });
        }
        if fields[0] < 1 || fields[1] < 1 {
            return Err(CliError::Parse(format!("line {line}: node indices are 1-based")));
        }
        rows.push((fields[0] as usize, fields[1] as usize, fields[2] as f64, fields[3] as f64));
    }
    let n = rows.iter().map(|r| r.0.max(r.1)).max().unwrap_or(0);
    let edges: Vec<Edge> = rows
        .iter()
        .filter(|r| r.2 != 0.0 || r.3 != 0.0)
        .map(|&(i, j, mij, mji)| Edge::new(i - 1, j - 1, ComplexWeight::new(mij, mji)))
        .collect();
    Ok(build_digraph(&edges, n)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn row_encodes_counts_as_real_and_imaginary_parts() {
        let g = parse_eies("1,2,5,3\n2,1,3,5\n").unwrap();
        assert_eq!(g.adjacency()[(0, 1)], Complex64::new(5.0, 3.0));
        assert_eq!(g.adjacency()[(1, 0)], Complex64::new(3.0, 5.0));
    }

    #[test]
    fn zero_rows_emit_no_edge() {
        let g = parse_eies("i,j,m_ij,m_ji\n1,2,0,0\n2,3,1,0\n").unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.edges().len(), 1);
    }

    #[test]
    fn negative_counts_are_rejected() {
        assert!(matches!(parse_eies("1,2,4,1\n1,3,-1,2\n"), Err(CliError::NegativeCount { line: 2 })));
    }

    #[test]
    fn malformed_rows_are_parse_errors() {
        assert!(matches!(parse_eies("1,2,4\n"), Err(CliError::Parse(_))));
        assert!(matches!(parse_eies("1,2,4,1\n1,x,4,1\n"), Err(CliError::Parse(_))));
        assert!(matches!(parse_eies("0,2,4,1\n"), Err(CliError::Parse(_))));
    }

    #[test]
    fn replies_without_messages_have_no_admissible_phase() {
        let err = parse_eies("1,2,0,3\n").unwrap_err();
        assert_eq!(err.kind(), "PhaseOutOfRange");
        assert_eq!(err.exit_code(), 2);
    }
}
