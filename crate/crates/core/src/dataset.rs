//! Index matrices on disk and the two reference games.
//!
//! A dataset file holds three blocks introduced by `[rho]`, `[eps]` and
//! `[kappa]`. Each block is a CSV table with header `task_0,...,task_{M-1}` and
//! one row per node. A directory holding `rho.csv`, `eps.csv` and `kappa.csv`
//! in the same table layout is accepted as well.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::GameSpec;
use crate::matrix::Matrix;

const BUNDLED: &str = include_str!("../data/fog_indices_10x10.csv");
const BLOCKS: [&str; 3] = ["rho", "eps", "kappa"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexDataset {
    pub rho: Matrix,
    pub eps: Matrix,
    pub kappa: Matrix,
    pub provenance: String,
}

impl IndexDataset {
    pub fn nodes(&self) -> usize {
        self.rho.rows()
    }

    pub fn tasks(&self) -> usize {
        self.rho.cols()
    }

    pub fn to_spec(&self) -> Result<GameSpec> {
        GameSpec::new(self.rho.clone(), self.eps.clone(), self.kappa.clone())
    }
}

fn ingest(row: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Ingestion {
        row,
        col,
        msg: msg.into(),
    }
}

/// Parses one table. `first_line` is the 1-based file line of its header, used
/// in error locations.
fn parse_table(text: &str, first_line: usize) -> Result<Matrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut records = reader.records();
    let header = match records.next() {
        Some(r) => r?,
        None => return Err(ingest(first_line, 0, "missing header row")),
    };
    for (j, name) in header.iter().enumerate() {
        if name != format!("task_{j}") {
            return Err(ingest(first_line, j + 1, format!("expected header task_{j}, found '{name}'")));
        }
    }
    let cols = header.len();
    let mut rows = Vec::new();
    for (i, rec) in records.enumerate() {
        let line = first_line + 1 + i;
        let rec = rec?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        if rec.len() != cols {
            return Err(ingest(line, rec.len().min(cols) + 1, format!("expected {cols} columns, found {}", rec.len())));
        }
        let mut row = Vec::with_capacity(cols);
        for (j, field) in rec.iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| ingest(line, j + 1, format!("'{field}' is not a number")))?;
            if !(v > 0.0 && v <= 1.0) {
                return Err(ingest(line, j + 1, format!("{v} outside (0, 1]")));
            }
            row.push(v);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(ingest(first_line, 0, "table has no rows"));
    }
    Matrix::from_rows(rows)
}

/// Parses the three-block layout.
pub fn parse_dataset(text: &str, provenance: &str) -> Result<IndexDataset> {
    let mut blocks: Vec<(String, usize, String)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if let Some(name) = trimmed.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            blocks.push((name.trim().to_ascii_lowercase(), i + 2, String::new()));
        } else if let Some(b) = blocks.last_mut() {
            b.2.push_str(line);
            b.2.push('\n');
        } else if !trimmed.is_empty() {
            return Err(ingest(i + 1, 0, "content before the first [block] marker"));
        }
    }
    let mut tables = Vec::new();
    for name in BLOCKS {
        let (_, line, body) = blocks
            .iter()
            .find(|b| b.0 == name)
            .ok_or_else(|| ingest(0, 0, format!("missing [{name}] block")))?;
        tables.push((*line, parse_table(body, *line)?));
    }
    assemble(tables, provenance)
}

fn assemble(mut tables: Vec<(usize, Matrix)>, provenance: &str) -> Result<IndexDataset> {
    let shape = tables[0].1.shape();
    for (line, m) in &tables[1..] {
        if m.shape() != shape {
            return Err(ingest(
                *line,
                0,
                format!("table is {}x{}, expected {}x{}", m.rows(), m.cols(), shape.0, shape.1),
            ));
        }
    }
    let kappa = tables.pop().unwrap().1;
    let eps = tables.pop().unwrap().1;
    let rho = tables.pop().unwrap().1;
    Ok(IndexDataset {
        rho,
        eps,
        kappa,
        provenance: provenance.to_string(),
    })
}

/// Loads a block file or a directory of three table files.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<IndexDataset> {
    let path = path.as_ref();
    let provenance = path.display().to_string();
    if path.is_dir() {
        let mut tables = Vec::new();
        for name in BLOCKS {
            let file = path.join(format!("{name}.csv"));
            let text = fs::read_to_string(&file)?;
            tables.push((1, parse_table(&text, 1).map_err(|e| annotate(e, &file))?));
        }
        assemble(tables, &provenance)
    } else {
        parse_dataset(&fs::read_to_string(path)?, &provenance)
    }
}

fn annotate(e: Error, file: &Path) -> Error {
    match e {
        Error::Ingestion { row, col, msg } => Error::Ingestion {
            row,
            col,
            msg: format!("{}: {msg}", file.display()),
        },
        other => other,
    }
}

/// The bundled 10 x 10 index matrices.
pub fn bundled_dataset() -> IndexDataset {
    parse_dataset(BUNDLED, "bundled fog_indices_10x10.csv").expect("bundled dataset is well formed")
}

pub fn bundled_dataset_text() -> &'static str {
    BUNDLED
}

/// The two-node, two-task reference game.
pub fn builtin_game1() -> GameSpec {
    let m = |rows: [[f64; 2]; 2]| Matrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap();
    GameSpec::new(
        m([[0.9, 0.5], [0.6, 0.85]]),
        m([[0.1, 0.03], [0.05, 0.2]]),
        m([[0.1, 0.8], [0.75, 0.05]]),
    )
    .expect("reference game is valid")
}

/// The full ten-node, ten-task game of the bundled dataset.
pub fn builtin_game2() -> Result<GameSpec> {
    bundled_dataset().to_spec()
}

/// Restricts a dataset to the given node rows and task columns.
pub fn select_subgame(dataset: &IndexDataset, nodes: &[usize], tasks: &[usize]) -> Result<GameSpec> {
    check_selection("node", nodes, dataset.nodes())?;
    check_selection("task", tasks, dataset.tasks())?;
    GameSpec::new(
        dataset.rho.select(nodes, tasks),
        dataset.eps.select(nodes, tasks),
        dataset.kappa.select(nodes, tasks),
    )
}

/// The first `nodes` rows and first `tasks` columns.
pub fn leading_subgame(dataset: &IndexDataset, nodes: usize, tasks: usize) -> Result<GameSpec> {
    let n: Vec<usize> = (0..nodes).collect();
    let m: Vec<usize> = (0..tasks).collect();
    select_subgame(dataset, &n, &m)
}

fn check_selection(what: &str, idx: &[usize], len: usize) -> Result<()> {
    if idx.is_empty() {
        return Err(Error::Config(format!("empty {what} selection")));
    }
    let mut seen = HashSet::new();
    for &i in idx {
        if i >= len {
            return Err(Error::Config(format!("{what} index {i} out of range (have {len})")));
        }
        if !seen.insert(i) {
            return Err(Error::Config(format!("duplicate {what} index {i}")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_spot_values() {
        let d = bundled_dataset();
        assert_eq!((d.nodes(), d.tasks()), (10, 10));
        assert_eq!(d.rho.get(0, 0), 0.47);
        assert_eq!(d.eps.get(2, 1), 0.042);
        assert_eq!(d.kappa.get(9, 9), 0.09);
    }

    #[test]
    fn game1_values_and_warning() {
        let g = builtin_game1();
        assert_eq!(g.rho.get(1, 1), 0.85);
        assert_eq!(g.kappa.get(0, 1), 0.8);
        assert_eq!(g.validate().unwrap().len(), 1);
    }

    #[test]
    fn subgame_selection() {
        let d = bundled_dataset();
        let all: Vec<usize> = (0..10).collect();
        let full = select_subgame(&d, &all, &all).unwrap();
        assert_eq!(full.rho, d.rho);
        let five = leading_subgame(&d, 5, 10).unwrap();
        assert_eq!((five.nodes, five.tasks), (5, 10));
        assert_eq!(five.rho.get(4, 9), 0.83);
        assert_eq!(five.eps.row(3), d.eps.row(3));
        assert!(matches!(select_subgame(&d, &[0, 0], &all), Err(Error::Config(_))));
        assert!(matches!(select_subgame(&d, &[10], &all), Err(Error::Config(_))));
    }

    fn block_text(rho_row2: &str) -> String {
        format!(
            "[rho]\ntask_0,task_1\n0.5,0.6\n{rho_row2}\n[eps]\ntask_0,task_1\n0.1,0.1\n0.2,0.2\n[kappa]\ntask_0,task_1\n0.3,0.3\n0.4,0.4\n"
        )
    }

    #[test]
    fn parses_small_blocks() {
        let d = parse_dataset(&block_text("0.7,0.8"), "inline").unwrap();
        assert_eq!(d.rho.get(1, 1), 0.8);
        assert_eq!(d.kappa.get(1, 0), 0.4);
    }

    #[test]
    fn errors_carry_locations() {
        match parse_dataset(&block_text("0.7,1.8"), "inline") {
            Err(Error::Ingestion { row, col, .. }) => assert_eq!((row, col), (4, 2)),
            other => panic!("unexpected {other:?}"),
        }
        match parse_dataset(&block_text("0.7,abc"), "inline") {
            Err(Error::Ingestion { row, col, .. }) => assert_eq!((row, col), (4, 2)),
            other => panic!("unexpected {other:?}"),
        }
        match parse_dataset(&block_text("0.7"), "inline") {
            Err(Error::Ingestion { row, .. }) => assert_eq!(row, 4),
            other => panic!("unexpected {other:?}"),
        }
        let missing = "[rho]\ntask_0\n0.5\n";
        assert!(matches!(parse_dataset(missing, "inline"), Err(Error::Ingestion { .. })));
    }

    #[test]
    fn mismatched_tables_are_rejected() {
        let text = "[rho]\ntask_0,task_1\n0.5,0.6\n[eps]\ntask_0\n0.1\n[kappa]\ntask_0,task_1\n0.3,0.3\n";
        match parse_dataset(text, "inline") {
            Err(Error::Ingestion { row, .. }) => assert_eq!(row, 5),
            other => panic!("unexpected {other:?}"),
        }
    }
}
