//! Writes the named fixture graphs as canonical JSON, plus the message-count
//! sample as CSV, into the directory given as the first argument.

use std::path::PathBuf;

use clx_core::fixtures::{named_graphs, EIES_SAMPLE};
use clx_core::graph::GraphFile;

fn main() -> std::io::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures".to_string()));
    std::fs::create_dir_all(&dir)?;
    for (name, g) in named_graphs() {
        let mut text = serde_json::to_string_pretty(&GraphFile::from(&g)).expect("graph serializes");
        text.push('\n');
        std::fs::write(dir.join(format!("{name}.json")), text)?;
    }
    let mut csv = String::from("i,j,m_ij,m_ji\n");
    for (i, j, mij, mji) in EIES_SAMPLE {
        csv.push_str(&format!("{i},{j},{mij},{mji}\n"));
    }
    std::fs::write(dir.join("eies_sample.csv"), csv)
}
