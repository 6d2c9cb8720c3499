//! Instance files: Matrix Market coordinate matrices plus a `key = value`
//! sidecar naming the family and its vectors and scalars.
//!
//! ```text
//! family = lad
//! matrix = inst.mtx
//! b = 0.5,-1.25
//! optimum = 0
//! ```
//!
//! Matrix paths are relative to the sidecar. Floats are written in Rust's
//! shortest round-trip form, so writing is deterministic and lossless.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::matrix::SparseMatrix;
use crate::problems::{
    make_box_simplex, make_lad, make_matrix_game, make_policy_eval, BoxSimplexSpec, Family, GameDecomposition,
    LadSpec, MatrixGameSpec, PolicyEvalSpec, ProblemInstance,
};

/// Any instance that can be stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub enum InstanceSpec {
    MatrixGame(MatrixGameSpec),
    BoxSimplex(BoxSimplexSpec),
    Lad(LadSpec),
    PolicyEval(PolicyEvalSpec),
}

impl InstanceSpec {
    pub fn family(&self) -> Family {
        match self {
            InstanceSpec::MatrixGame(_) => Family::MatrixGame,
            InstanceSpec::BoxSimplex(_) => Family::BoxSimplex,
            InstanceSpec::Lad(_) => Family::Lad,
            InstanceSpec::PolicyEval(_) => Family::PolicyEval,
        }
    }

    pub fn build(&self) -> Result<ProblemInstance> {
        match self {
            InstanceSpec::MatrixGame(s) => make_matrix_game(s),
            InstanceSpec::BoxSimplex(s) => make_box_simplex(s),
            InstanceSpec::Lad(s) => make_lad(s),
            InstanceSpec::PolicyEval(s) => make_policy_eval(s),
        }
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

/// Parses a Matrix Market `coordinate` matrix (`real`, `integer` or
/// `pattern`; `general`, `symmetric` or `skew-symmetric`).
pub fn parse_matrix_market(text: &str) -> Result<SparseMatrix> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let tokens: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(parse_err(1, "missing %%MatrixMarket matrix header"));
    }
    if tokens[2] != "coordinate" {
        return Err(parse_err(1, format!("unsupported format {}", tokens[2])));
    }
    let pattern = match tokens[3].as_str() {
        "real" | "integer" => false,
        "pattern" => true,
        other => return Err(parse_err(1, format!("unsupported field {other}"))),
    };
    let mirror = match tokens[4].as_str() {
        "general" => None,
        "symmetric" => Some(1.0),
        "skew-symmetric" => Some(-1.0),
        other => return Err(parse_err(1, format!("unsupported symmetry {other}"))),
    };
    let mut body = lines.filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('%'));
    let (size_line, size) = body.next().ok_or_else(|| parse_err(1, "missing size line"))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| parse_err(size_line, format!("bad integer {t:?}"))))
        .collect::<Result<_>>()?;
    if dims.len() != 3 {
        return Err(parse_err(size_line, "size line needs rows, cols and nnz"));
    }
    let (rows, cols, nnz) = (dims[0], dims[1], dims[2]);
    let mut triplets = Vec::with_capacity(nnz);
    for (line, text) in body {
        let t: Vec<&str> = text.split_whitespace().collect();
        let want = if pattern { 2 } else { 3 };
        if t.len() != want {
            return Err(parse_err(line, format!("expected {want} fields")));
        }
        let index = |s: &str| -> Result<usize> {
            let v: usize = s.parse().map_err(|_| parse_err(line, format!("bad index {s:?}")))?;
            if v == 0 {
                return Err(parse_err(line, "indices are 1-based"));
            }
            Ok(v - 1)
        };
        let (i, j) = (index(t[0])?, index(t[1])?);
        if i >= rows || j >= cols {
            return Err(parse_err(line, format!("entry ({}, {}) outside {rows}x{cols}", i + 1, j + 1)));
        }
        let v: f64 = if pattern {
            1.0
        } else {
            t[2].parse().map_err(|_| parse_err(line, format!("bad value {:?}", t[2])))?
        };
        triplets.push((i, j, v));
        if let Some(sign) = mirror {
            if i != j {
                triplets.push((j, i, sign * v));
            }
        }
    }
    let expected = if mirror.is_some() {
        triplets.len() - triplets.iter().filter(|e| e.0 != e.1).count() / 2
    } else {
        triplets.len()
    };
    if expected != nnz {
        return Err(parse_err(size_line, format!("header declares {nnz} entries, found {expected}")));
    }
    SparseMatrix::from_triplets(rows, cols, &triplets)
}

pub fn format_matrix_market(a: &SparseMatrix) -> String {
    let mut out = String::from("%%MatrixMarket matrix coordinate real general\n");
    let _ = writeln!(out, "{} {} {}", a.rows(), a.cols(), a.nnz());
    for (i, j, v) in a.iter() {
        let _ = writeln!(out, "{} {} {:?}", i + 1, j + 1, v);
    }
    out
}

pub fn read_matrix_market(path: &Path) -> Result<SparseMatrix> {
    parse_matrix_market(&fs::read_to_string(path)?)
}

pub fn write_matrix_market(a: &SparseMatrix, path: &Path) -> Result<()> {
    fs::write(path, format_matrix_market(a))?;
    Ok(())
}

/// `key = value` lines; `#` starts a comment.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, (usize, String)>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| parse_err(i + 1, "expected key = value"))?;
        let key = k.trim().to_string();
        if map.insert(key.clone(), (i + 1, v.trim().to_string())).is_some() {
            return Err(parse_err(i + 1, format!("duplicate key {key}")));
        }
    }
    Ok(map)
}

struct Sidecar {
    map: BTreeMap<String, (usize, String)>,
    dir: PathBuf,
}

impl Sidecar {
    fn raw(&self, key: &str) -> Result<&(usize, String)> {
        self.map.get(key).ok_or_else(|| parse_err(0, format!("missing key {key}")))
    }

    fn has(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    fn float(&self, key: &str) -> Result<f64> {
        let (line, v) = self.raw(key)?;
        v.parse().map_err(|_| parse_err(*line, format!("{key}: bad number {v:?}")))
    }

    fn float_or(&self, key: &str, default: f64) -> Result<f64> {
        if self.has(key) {
            self.float(key)
        } else {
            Ok(default)
        }
    }

    fn vector(&self, key: &str) -> Result<Vec<f64>> {
        let (line, v) = self.raw(key)?;
        if v.is_empty() {
            return Ok(Vec::new());
        }
        v.split(',')
            .map(|t| t.trim().parse().map_err(|_| parse_err(*line, format!("{key}: bad number {t:?}"))))
            .collect()
    }

    fn matrix(&self, key: &str) -> Result<SparseMatrix> {
        let (_, v) = self.raw(key)?;
        read_matrix_market(&self.dir.join(v))
    }
}

fn dense(a: &SparseMatrix) -> DMatrix<f64> {
    a.to_dense()
}

fn sparse(a: &DMatrix<f64>) -> Result<SparseMatrix> {
    let triplets: Vec<_> = (0..a.nrows())
        .flat_map(|i| (0..a.ncols()).map(move |j| (i, j)))
        .map(|(i, j)| (i, j, a[(i, j)]))
        .collect();
    SparseMatrix::from_triplets(a.nrows(), a.ncols(), &triplets)
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",")
}

/// Reads an instance from its sidecar file.
pub fn read_instance(path: &Path) -> Result<InstanceSpec> {
    let text = fs::read_to_string(path)?;
    let sc = Sidecar { map: parse_key_values(&text)?, dir: path.parent().unwrap_or(Path::new(".")).to_path_buf() };
    let (line, family) = sc.raw("family")?;
    match Family::parse(family) {
        Some(Family::MatrixGame) => {
            let decomposition = match sc.map.get("decomposition").map(|e| e.1.as_str()) {
                None | Some("two-sided") => GameDecomposition::TwoSided,
                Some("row-sided") => GameDecomposition::RowSided,
                Some(other) => return Err(parse_err(0, format!("unknown decomposition {other}"))),
            };
            Ok(InstanceSpec::MatrixGame(MatrixGameSpec { a: sc.matrix("matrix")?, decomposition }))
        }
        Some(Family::BoxSimplex) => Ok(InstanceSpec::BoxSimplex(BoxSimplexSpec { a: sc.matrix("matrix")?, b: sc.vector("b")? })),
        Some(Family::Lad) => Ok(InstanceSpec::Lad(LadSpec {
            a: sc.matrix("matrix")?,
            b: sc.vector("b")?,
            optimum: if sc.has("optimum") { Some(sc.float("optimum")?) } else { None },
            solution: if sc.has("solution") { Some(sc.vector("solution")?) } else { None },
            gamma: sc.float_or("gamma", 0.0)?,
        })),
        Some(Family::PolicyEval) => Ok(InstanceSpec::PolicyEval(PolicyEvalSpec {
            transition: dense(&sc.matrix("transition")?),
            features: dense(&sc.matrix("features")?),
            rewards: sc.vector("rewards")?,
            beta: sc.float("beta")?,
            mu: sc.float("mu")?,
        })),
        _ => Err(parse_err(*line, format!("unknown family {family:?}"))),
    }
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

fn file_name(path: &Path) -> String {
    path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Writes the sidecar to `path` and matrices next to it as
/// `<stem>.mtx` (or `<stem>.P.mtx` and `<stem>.phi.mtx` for policy evaluation).
/// Returns every file written.
pub fn write_instance(spec: &InstanceSpec, path: &Path) -> Result<Vec<PathBuf>> {
    let mut side = format!("family = {}\n", spec.family().name());
    let mut written = Vec::new();
    let mut matrix = |key: &str, suffix: &str, a: &SparseMatrix, side: &mut String| -> Result<()> {
        let file = sibling(path, suffix);
        write_matrix_market(a, &file)?;
        let _ = writeln!(side, "{key} = {}", file_name(&file));
        written.push(file);
        Ok(())
    };
    match spec {
        InstanceSpec::MatrixGame(s) => {
            let mode = match s.decomposition {
                GameDecomposition::TwoSided => "two-sided",
                GameDecomposition::RowSided => "row-sided",
            };
            let _ = writeln!(side, "decomposition = {mode}");
            matrix("matrix", ".mtx", &s.a, &mut side)?;
        }
        InstanceSpec::BoxSimplex(s) => {
            matrix("matrix", ".mtx", &s.a, &mut side)?;
            let _ = writeln!(side, "b = {}", join(&s.b));
        }
        InstanceSpec::Lad(s) => {
            matrix("matrix", ".mtx", &s.a, &mut side)?;
            let _ = writeln!(side, "b = {}", join(&s.b));
            if let Some(o) = s.optimum {
                let _ = writeln!(side, "optimum = {o:?}");
            }
            if let Some(z) = &s.solution {
                let _ = writeln!(side, "solution = {}", join(z));
            }
            if s.gamma != 0.0 {
                let _ = writeln!(side, "gamma = {:?}", s.gamma);
            }
        }
        InstanceSpec::PolicyEval(s) => {
            matrix("transition", ".P.mtx", &sparse(&s.transition)?, &mut side)?;
            matrix("features", ".phi.mtx", &sparse(&s.features)?, &mut side)?;
            let _ = writeln!(side, "rewards = {}", join(&s.rewards));
            let _ = writeln!(side, "beta = {:?}", s.beta);
            let _ = writeln!(side, "mu = {:?}", s.mu);
        }
    }
    fs::write(path, side)?;
    written.insert(0, path.to_path_buf());
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_market_round_trip() {
        let a = SparseMatrix::from_rows(&[vec![1.0, 0.0, -2.5e-300], vec![0.0, 1.0 / 3.0, 0.0]]).unwrap();
        let back = parse_matrix_market(&format_matrix_market(&a)).unwrap();
        assert_eq!(a, back);
    }

    #[test]
    fn matrix_market_symmetric_and_errors() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n% c\n2 2 2\n1 1 4\n2 1 -1\n";
        let a = parse_matrix_market(text).unwrap();
        assert_eq!(a.get(0, 1), -1.0);
        assert_eq!(a.get(1, 0), -1.0);
        assert!(parse_matrix_market("%%MatrixMarket matrix array real general\n1 1\n1\n").is_err());
        let bad = "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n";
        assert!(matches!(parse_matrix_market(bad), Err(Error::Parse { line: 3, .. })));
        let short = "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n";
        assert!(parse_matrix_market(short).is_err());
    }

    #[test]
    fn key_values() {
        let map = parse_key_values("a = 1 # note\n\n b=x,y\n").unwrap();
        assert_eq!(map["a"].1, "1");
        assert_eq!(map["b"], (3, "x,y".to_string()));
        assert!(parse_key_values("a = 1\na = 2\n").is_err());
        assert!(parse_key_values("novalue\n").is_err());
    }
}
