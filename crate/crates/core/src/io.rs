//! Challenge file formats: item batches, defects and solution cut trees.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::model::{Defect, Instance, Item, Length, ModelError, Params, Rect};
use crate::tree::{NodeType, SolutionTree, TreeNode};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("item ids must be 0..N in order: row {position} has id {found}")]
    NonContiguousIds { position: usize, found: usize },
    #[error("stack {stack} repeats sequence {sequence}")]
    DuplicateSequence { stack: usize, sequence: usize },
    #[error("defects {a} and {b} overlap on plate {plate}")]
    DefectOverlap { plate: usize, a: usize, b: usize },
    #[error("node {node} refers to a parent {parent} that never appears")]
    OrphanNode { node: usize, parent: usize },
    #[error("node id {0} appears twice")]
    DuplicateId(usize),
    #[error("no batch file found for instance `{0}`")]
    InstanceNotFound(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn parse_err(line: usize, message: impl Into<String>) -> IoError {
    IoError::Parse { line, message: message.into() }
}

fn read_text(path: &Path) -> Result<String, IoError> {
    let mut s = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut s))
        .map_err(|source| IoError::Io { path: path.to_path_buf(), source })?;
    Ok(s)
}

/// Header-checked `;`-separated records with their 1-based line numbers.
fn records(text: &str, accepted_headers: &[&[&str]]) -> Result<Vec<(usize, Vec<String>)>, IoError> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(b';')
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if !accepted_headers.iter().any(|h| h.iter().copied().eq(header.iter().map(String::as_str))) {
        return Err(parse_err(1, format!("unexpected header {}", header.join(";"))));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| parse_err(e.position().map_or(0, |p| p.line() as usize), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        if rec.len() != header.len() {
            return Err(parse_err(line, format!("expected {} fields, found {}", header.len(), rec.len())));
        }
        out.push((line, rec.iter().map(str::to_string).collect()));
    }
    Ok(out)
}

fn int_field<T: std::str::FromStr>(line: usize, name: &str, s: &str) -> Result<T, IoError> {
    s.parse().map_err(|_| parse_err(line, format!("{name}: `{s}` is not an integer")))
}

const BATCH_HEADERS: &[&[&str]] = &[
    &["ITEM_ID", "LENGTH", "WIDTH", "STACK", "SEQUENCE"],
    &["ITEM_ID", "LENGTH_ITEM", "WIDTH_ITEM", "STACK", "SEQUENCE"],
];
const DEFECT_HEADER: &[&str] = &["DEFECT_ID", "PLATE_ID", "X", "Y", "WIDTH", "HEIGHT"];
const SOLUTION_HEADER: &[&str] = &["PLATE_ID", "NODE_ID", "X", "Y", "WIDTH", "HEIGHT", "TYPE", "CUT", "PARENT"];

/// Items of a batch file. `SEQUENCE` is kept as given; [`Instance::new`] normalizes it.
pub fn parse_batch_str(text: &str) -> Result<Vec<Item>, IoError> {
    let mut items: Vec<Item> = Vec::new();
    for (line, f) in records(text, BATCH_HEADERS)? {
        let id: usize = int_field(line, "ITEM_ID", &f[0])?;
        if id != items.len() {
            return Err(IoError::NonContiguousIds { position: items.len(), found: id });
        }
        let item = Item {
            id,
            height: int_field(line, "LENGTH", &f[1])?,
            width: int_field(line, "WIDTH", &f[2])?,
            chain_id: int_field(line, "STACK", &f[3])?,
            chain_rank: int_field(line, "SEQUENCE", &f[4])?,
        };
        if item.width <= 0 || item.height <= 0 {
            return Err(parse_err(line, "item dimensions must be positive"));
        }
        items.push(item);
    }
    let mut seen = std::collections::HashSet::new();
    for it in &items {
        if !seen.insert((it.chain_id, it.chain_rank)) {
            return Err(IoError::DuplicateSequence { stack: it.chain_id, sequence: it.chain_rank });
        }
    }
    Ok(items)
}

pub fn parse_batch(path: &Path) -> Result<Vec<Item>, IoError> {
    parse_batch_str(&read_text(path)?)
}

/// Defects rounded to their enclosing integer rectangle. Overlaps are checked before rounding.
pub fn parse_defects_str(text: &str) -> Result<Vec<Defect>, IoError> {
    let mut raw: Vec<(usize, usize, [f64; 4])> = Vec::new();
    for (line, f) in records(text, &[DEFECT_HEADER])? {
        let id: usize = int_field(line, "DEFECT_ID", &f[0])?;
        let plate: usize = int_field(line, "PLATE_ID", &f[1])?;
        let mut v = [0f64; 4];
        for (k, name) in ["X", "Y", "WIDTH", "HEIGHT"].iter().enumerate() {
            v[k] = f[2 + k]
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| parse_err(line, format!("{name}: `{}` is not a number", f[2 + k])))?;
        }
        if v[0] < 0.0 || v[1] < 0.0 || v[2] <= 0.0 || v[3] <= 0.0 {
            return Err(parse_err(line, "defect coordinates must be non-negative and sizes positive"));
        }
        raw.push((id, plate, v));
    }
    for (i, a) in raw.iter().enumerate() {
        for b in &raw[i + 1..] {
            let (p, q) = (a.2, b.2);
            if a.1 == b.1 && p[0] < q[0] + q[2] && q[0] < p[0] + p[2] && p[1] < q[1] + q[3] && q[1] < p[1] + p[3] {
                return Err(IoError::DefectOverlap { plate: a.1, a: a.0, b: b.0 });
            }
        }
    }
    Ok(raw
        .into_iter()
        .map(|(id, plate_index, v)| {
            let x = v[0].floor() as Length;
            let y = v[1].floor() as Length;
            let right = (v[0] + v[2]).ceil() as Length;
            let top = (v[1] + v[3]).ceil() as Length;
            Defect { id, plate_index, x, y, width: right - x, height: top - y }
        })
        .collect())
}

/// Missing file means no defects.
pub fn parse_defects(path: &Path) -> Result<Vec<Defect>, IoError> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    parse_defects_str(&read_text(path)?)
}

/// Directory searched for instances given by bare name: `ROADEF_DATA_DIR`, else `./data`.
pub fn data_dir() -> PathBuf {
    std::env::var_os("ROADEF_DATA_DIR").map(PathBuf::from).unwrap_or_else(|| PathBuf::from("data"))
}

/// `<prefix>_batch.csv` as given, or found by name anywhere under [`data_dir`].
pub fn resolve_prefix(prefix: &str) -> Result<PathBuf, IoError> {
    let direct = PathBuf::from(format!("{prefix}_batch.csv"));
    if direct.is_file() {
        return Ok(PathBuf::from(prefix));
    }
    let name = Path::new(prefix).file_name().and_then(|s| s.to_str()).unwrap_or(prefix);
    let wanted = format!("{name}_batch.csv");
    walkdir::WalkDir::new(data_dir())
        .sort_by_file_name()
        .into_iter()
        .filter_map(Result::ok)
        .find(|e| e.file_type().is_file() && e.file_name().to_str() == Some(wanted.as_str()))
        .map(|e| e.path().with_file_name(name))
        .ok_or_else(|| IoError::InstanceNotFound(prefix.to_string()))
}

/// Loads `<prefix>_batch.csv` and `<prefix>_defects.csv`.
pub fn load_instance(prefix: &str, params: Params) -> Result<Instance, IoError> {
    let base = resolve_prefix(prefix)?;
    let base_str = base.to_string_lossy().into_owned();
    let items = parse_batch(Path::new(&format!("{base_str}_batch.csv")))?;
    let defects = parse_defects(Path::new(&format!("{base_str}_defects.csv")))?;
    let name = base.file_name().map_or_else(|| prefix.to_string(), |s| s.to_string_lossy().into_owned());
    Ok(Instance::new(name, params, items, defects)?)
}

pub fn solution_to_string(tree: &SolutionTree) -> String {
    let mut out = SOLUTION_HEADER.join(";");
    out.push('\n');
    for n in &tree.nodes {
        let parent = n.parent.map(|p| p.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{};{};{};{};{};{};{};{};{}\n",
            n.plate,
            n.id,
            n.rect.x,
            n.rect.y,
            n.rect.w,
            n.rect.h,
            n.kind.code(),
            n.cut,
            parent
        ));
    }
    out
}

pub fn write_solution(tree: &SolutionTree, path: &Path) -> Result<(), IoError> {
    let io = |source| IoError::Io { path: path.to_path_buf(), source };
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    w.write_all(solution_to_string(tree).as_bytes()).map_err(io)?;
    w.flush().map_err(io)
}

pub fn parse_solution_str(text: &str) -> Result<SolutionTree, IoError> {
    let recs = records(text, &[SOLUTION_HEADER])?;
    let all_ids: std::collections::HashSet<usize> =
        recs.iter().filter_map(|(_, f)| f[1].parse::<usize>().ok()).collect();
    let mut seen = std::collections::HashSet::new();
    let mut nodes = Vec::with_capacity(recs.len());
    for (line, f) in recs {
        let id: usize = int_field(line, "NODE_ID", &f[1])?;
        if !seen.insert(id) {
            return Err(IoError::DuplicateId(id));
        }
        let code: i64 = int_field(line, "TYPE", &f[6])?;
        let kind = NodeType::from_code(code).ok_or_else(|| parse_err(line, format!("unknown TYPE {code}")))?;
        let parent = if f[8].is_empty() {
            None
        } else {
            let p: usize = int_field(line, "PARENT", &f[8])?;
            if !seen.contains(&p) {
                if all_ids.contains(&p) {
                    return Err(parse_err(line, format!("node {id} appears before its parent {p}")));
                }
                return Err(IoError::OrphanNode { node: id, parent: p });
            }
            Some(p)
        };
        nodes.push(TreeNode {
            id,
            plate: int_field(line, "PLATE_ID", &f[0])?,
            rect: Rect::new(
                int_field(line, "X", &f[2])?,
                int_field(line, "Y", &f[3])?,
                int_field(line, "WIDTH", &f[4])?,
                int_field(line, "HEIGHT", &f[5])?,
            ),
            kind,
            cut: int_field(line, "CUT", &f[7])?,
            parent,
        });
    }
    Ok(SolutionTree { nodes })
}

pub fn read_solution(path: &Path) -> Result<SolutionTree, IoError> {
    parse_solution_str(&read_text(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn batch_row_mapping() {
        let items = parse_batch_str("ITEM_ID;LENGTH;WIDTH;STACK;SEQUENCE\n0;1500;500;0;1\n").unwrap();
        assert_eq!(items, vec![Item { id: 0, width: 500, height: 1500, chain_id: 0, chain_rank: 1 }]);
    }

    #[test]
    fn batch_public_header_and_crlf() {
        let text = "ITEM_ID;LENGTH_ITEM;WIDTH_ITEM;STACK;SEQUENCE\r\n0;1500;500;0;1\r\n1;200;300;0;2\r\n";
        let items = parse_batch_str(text).unwrap();
        assert_eq!(items.len(), 2);
        assert_eq!((items[1].width, items[1].height), (300, 200));
    }

    #[test]
    fn batch_empty_body() {
        assert!(parse_batch_str("ITEM_ID;LENGTH;WIDTH;STACK;SEQUENCE\n").unwrap().is_empty());
    }

    #[test]
    fn batch_errors() {
        let h = "ITEM_ID;LENGTH;WIDTH;STACK;SEQUENCE\n";
        assert!(matches!(parse_batch_str(&format!("{h}0;15x;500;0;1\n")), Err(IoError::Parse { .. })));
        assert!(matches!(parse_batch_str(&format!("{h}0;1;2;0\n")), Err(IoError::Parse { .. })));
        assert!(matches!(parse_batch_str("ID;L;W\n0;1;2\n"), Err(IoError::Parse { .. })));
        assert!(matches!(
            parse_batch_str(&format!("{h}1;100;100;0;1\n")),
            Err(IoError::NonContiguousIds { position: 0, found: 1 })
        ));
        assert!(matches!(
            parse_batch_str(&format!("{h}0;100;100;0;1\n1;100;100;0;1\n")),
            Err(IoError::DuplicateSequence { stack: 0, sequence: 1 })
        ));
    }

    #[test]
    fn defect_rounding() {
        let d = parse_defects_str("DEFECT_ID;PLATE_ID;X;Y;WIDTH;HEIGHT\n0;3;100.5;200.0;2.0;3.0\n").unwrap();
        assert_eq!(d, vec![Defect { id: 0, plate_index: 3, x: 100, y: 200, width: 3, height: 3 }]);
    }

    #[test]
    fn defect_overlap_rejected() {
        let text = "DEFECT_ID;PLATE_ID;X;Y;WIDTH;HEIGHT\n0;0;10;10;5;5\n1;0;12;12;5;5\n2;1;12;12;5;5\n";
        assert!(matches!(parse_defects_str(text), Err(IoError::DefectOverlap { plate: 0, a: 0, b: 1 })));
        // touching after rounding but disjoint before is accepted
        let text = "DEFECT_ID;PLATE_ID;X;Y;WIDTH;HEIGHT\n0;0;10;10;5.5;5\n1;0;15.5;10;5;5\n";
        assert_eq!(parse_defects_str(text).unwrap().len(), 2);
    }

    #[test]
    fn missing_defects_file() {
        assert!(parse_defects(Path::new("/nonexistent/x_defects.csv")).unwrap().is_empty());
    }

    fn sample_tree() -> SolutionTree {
        let n = |id, plate, rect, kind, cut, parent| TreeNode { id, plate, rect, kind, cut, parent };
        SolutionTree {
            nodes: vec![
                n(0, 0, Rect::new(0, 0, 6000, 3210), NodeType::Branch, 0, None),
                n(1, 0, Rect::new(0, 0, 3500, 3210), NodeType::Item(0), 1, Some(0)),
                n(2, 0, Rect::new(3500, 0, 2500, 3210), NodeType::Residual, 1, Some(0)),
            ],
        }
    }

    #[test]
    fn solution_round_trip() {
        let t = sample_tree();
        let s = solution_to_string(&t);
        assert!(s.starts_with("PLATE_ID;NODE_ID;X;Y;WIDTH;HEIGHT;TYPE;CUT;PARENT\n0;0;0;0;6000;3210;-2;0;\n"));
        assert_eq!(parse_solution_str(&s).unwrap(), t);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sol.csv");
        write_solution(&t, &p).unwrap();
        assert_eq!(read_solution(&p).unwrap(), t);
        assert_eq!(parse_solution_str(&s.replace('\n', "\r\n")).unwrap(), t);
    }

    #[test]
    fn solution_errors() {
        let h = "PLATE_ID;NODE_ID;X;Y;WIDTH;HEIGHT;TYPE;CUT;PARENT\n";
        let orphan = format!("{h}0;0;0;0;6000;3210;-2;0;\n0;1;0;0;10;10;-1;1;7\n");
        assert!(matches!(parse_solution_str(&orphan), Err(IoError::OrphanNode { node: 1, parent: 7 })));
        let reordered = format!("{h}0;1;0;0;10;10;-1;1;0\n0;0;0;0;6000;3210;-2;0;\n");
        assert!(matches!(parse_solution_str(&reordered), Err(IoError::Parse { .. })));
        let dup = format!("{h}0;0;0;0;6000;3210;-2;0;\n0;0;0;0;10;10;-1;1;0\n");
        assert!(matches!(parse_solution_str(&dup), Err(IoError::DuplicateId(0))));
    }

    #[test]
    fn fully_residual_plate_is_two_rows() {
        let t = SolutionTree {
            nodes: vec![
                TreeNode { id: 0, plate: 0, rect: Rect::new(0, 0, 6000, 3210), kind: NodeType::Branch, cut: 0, parent: None },
                TreeNode { id: 1, plate: 0, rect: Rect::new(0, 0, 6000, 3210), kind: NodeType::Residual, cut: 1, parent: Some(0) },
            ],
        };
        assert_eq!(solution_to_string(&t).lines().count(), 3);
    }

    #[test]
    fn prefix_resolution() {
        let dir = tempfile::tempdir().unwrap();
        let sub = dir.path().join("A");
        std::fs::create_dir(&sub).unwrap();
        std::fs::write(sub.join("Z9_batch.csv"), "ITEM_ID;LENGTH;WIDTH;STACK;SEQUENCE\n0;100;100;0;1\n").unwrap();
        let direct = sub.join("Z9");
        let inst = load_instance(direct.to_str().unwrap(), Params::default()).unwrap();
        assert_eq!(inst.name, "Z9");
        assert_eq!(inst.item_count(), 1);
    }
}
