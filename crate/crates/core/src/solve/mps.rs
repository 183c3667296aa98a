//! Fixed-format MPS export and import.
//!
//! Names that do not fit the 8-character fields (or contain blanks, or
//! collide with the objective row) trigger a deterministic renaming of the
//! whole name class: columns become `C0000001..`, rows `R0000001..`. The
//! mapping is returned next to the document so results can be translated
//! back. Numbers are written in their shortest exact decimal form so a
//! round trip reproduces every coefficient bit for bit; values needing more
//! than 12 characters overflow their field, which whitespace-tokenizing
//! readers accept.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::problem::{Constraint, MilpProblem, Relation, VarId, Variable};

const OBJ_ROW: &str = "OBJ";
const FIELD: usize = 8;

/// Translation between names in the file and names in the model.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct NameMap {
    /// `(mps name, model name)` for renamed columns, in column order.
    pub columns: Vec<(String, String)>,
    /// `(mps name, model name)` for renamed rows, in row order.
    pub rows: Vec<(String, String)>,
}

impl NameMap {
    pub fn is_empty(&self) -> bool {
        self.columns.is_empty() && self.rows.is_empty()
    }

    /// Put model names back on a problem read from the file.
    pub fn restore(&self, problem: &mut MilpProblem) {
        let cols: HashMap<&str, &str> =
            self.columns.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        let rows: HashMap<&str, &str> =
            self.rows.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        for v in &mut problem.variables {
            if let Some(orig) = cols.get(v.name.as_str()) {
                v.name = orig.to_string();
            }
        }
        for c in &mut problem.constraints {
            if let Some(orig) = rows.get(c.name.as_str()) {
                c.name = orig.to_string();
            }
        }
    }

    /// CSV with columns `kind,mps_name,model_name`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let _ = w.write_record(["kind", "mps_name", "model_name"]);
        for (kind, list) in [("column", &self.columns), ("row", &self.rows)] {
            for (a, b) in list {
                let _ = w.write_record([kind, a, b]);
            }
        }
        String::from_utf8(w.into_inner().unwrap_or_default()).unwrap_or_default()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MpsDocument {
    pub text: String,
    pub names: NameMap,
}

impl MpsDocument {
    /// Write `<stem>.mps`, plus `<stem>.names.csv` when names were changed.
    pub fn write_files(&self, dir: &Path, stem: &str) -> Result<()> {
        let mps = dir.join(format!("{stem}.mps"));
        std::fs::write(&mps, &self.text).map_err(|e| Error::io(&mps, e))?;
        if !self.names.is_empty() {
            let map = dir.join(format!("{stem}.names.csv"));
            std::fs::write(&map, self.names.to_csv()).map_err(|e| Error::io(&map, e))?;
        }
        Ok(())
    }
}

fn fits(name: &str) -> bool {
    !name.is_empty()
        && name.len() <= FIELD
        && !name.starts_with('*')
        && !name.contains('\'')
        && name.chars().all(|c| c.is_ascii_graphic())
}

fn assign_names<'a>(
    names: impl Iterator<Item = &'a str> + Clone,
    prefix: char,
    reserved: &[&str],
) -> (Vec<String>, Vec<(String, String)>) {
    let mut seen = HashSet::new();
    let keep = names
        .clone()
        .all(|n| fits(n) && !reserved.contains(&n) && seen.insert(n));
    if keep {
        return (names.map(str::to_string).collect(), Vec::new());
    }
    let renamed: Vec<String> = names
        .clone()
        .enumerate()
        .map(|(i, _)| format!("{prefix}{:07}", i + 1))
        .collect();
    let map = renamed
        .iter()
        .cloned()
        .zip(names.map(str::to_string))
        .collect();
    (renamed, map)
}

/// Shortest decimal that parses back to exactly `x`.
fn num(x: f64) -> String {
    let plain = format!("{x}");
    if plain.len() <= 12 {
        return plain;
    }
    let sci = format!("{x:e}");
    if sci.len() < plain.len() {
        sci
    } else {
        plain
    }
}

fn line(out: &mut String, f1: &str, f2: &str, f3: &str, f4: &str) {
    let s = format!(" {f1:<2} {f2:<8}  {f3:<8}  {f4}");
    let _ = writeln!(out, "{}", s.trim_end());
}

pub fn export_mps(problem: &MilpProblem) -> Result<MpsDocument> {
    problem.validate()?;
    let (cols, col_map) = assign_names(problem.variables.iter().map(|v| v.name.as_str()), 'C', &["MARKER"]);
    let (rows, row_map) = assign_names(problem.constraints.iter().map(|c| c.name.as_str()), 'R', &[OBJ_ROW]);

    // column-major view of the rows
    let mut by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); problem.num_vars()];
    for (r, c) in problem.constraints.iter().enumerate() {
        for (v, k) in &c.terms {
            by_col[v.0].push((r, *k));
        }
    }

    let mut out = String::new();
    let title: String = problem.name.split_whitespace().collect::<Vec<_>>().join("_");
    let _ = writeln!(out, "NAME          {}", if title.is_empty() { "PROBLEM" } else { &title });
    let _ = writeln!(out, "ROWS");
    line(&mut out, "N", OBJ_ROW, "", "");
    for (c, name) in problem.constraints.iter().zip(&rows) {
        let kind = match c.relation {
            Relation::Le => "L",
            Relation::Ge => "G",
            Relation::Eq => "E",
        };
        line(&mut out, kind, name, "", "");
    }

    let _ = writeln!(out, "COLUMNS");
    let mut in_int = false;
    let mut marker = 0;
    for (i, v) in problem.variables.iter().enumerate() {
        if v.integer != in_int {
            let kind = if v.integer { "'INTORG'" } else { "'INTEND'" };
            let _ = writeln!(out, "    M{marker:07}  'MARKER'                 {kind}");
            marker += 1;
            in_int = v.integer;
        }
        let cost = problem.objective[i];
        if cost != 0.0 || by_col[i].is_empty() {
            line(&mut out, "", &cols[i], OBJ_ROW, &num(cost));
        }
        for &(r, k) in &by_col[i] {
            line(&mut out, "", &cols[i], &rows[r], &num(k));
        }
    }
    if in_int {
        let _ = writeln!(out, "    M{marker:07}  'MARKER'                 'INTEND'");
    }

    let _ = writeln!(out, "RHS");
    if problem.objective_offset != 0.0 {
        line(&mut out, "", "RHS", OBJ_ROW, &num(-problem.objective_offset));
    }
    for (c, name) in problem.constraints.iter().zip(&rows) {
        if c.rhs != 0.0 {
            line(&mut out, "", "RHS", name, &num(c.rhs));
        }
    }

    let _ = writeln!(out, "BOUNDS");
    for (v, name) in problem.variables.iter().zip(&cols) {
        let (lo, up) = (v.lower, v.upper);
        if lo == up {
            line(&mut out, "FX", "BND", name, &num(lo));
            continue;
        }
        match (lo.is_finite(), up.is_finite()) {
            (false, false) => line(&mut out, "FR", "BND", name, ""),
            (false, true) => {
                line(&mut out, "MI", "BND", name, "");
                line(&mut out, "UP", "BND", name, &num(up));
            }
            (true, fin_up) => {
                if lo != 0.0 || (fin_up && up < 0.0) {
                    line(&mut out, "LO", "BND", name, &num(lo));
                }
                if fin_up {
                    line(&mut out, "UP", "BND", name, &num(up));
                } else if v.integer {
                    line(&mut out, "PL", "BND", name, "");
                }
            }
        }
    }
    let _ = writeln!(out, "ENDATA");
    Ok(MpsDocument {
        text: out,
        names: NameMap {
            columns: col_map,
            rows: row_map,
        },
    })
}

#[derive(PartialEq, Clone, Copy)]
enum Section {
    None,
    Rows,
    Columns,
    Rhs,
    Bounds,
    End,
}

/// Read a fixed or free MPS document. Fields are split on whitespace, so names must not contain blanks.
pub fn parse_mps(text: &str, path: &Path) -> Result<MilpProblem> {
    let err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut problem = MilpProblem::new("");
    let mut section = Section::None;
    let mut obj_row: Option<String> = None;
    let mut row_index: HashMap<String, usize> = HashMap::new();
    let mut row_terms: Vec<Vec<(VarId, f64)>> = Vec::new();
    let mut col_index: HashMap<String, usize> = HashMap::new();
    let mut in_int = false;
    let mut bounded: BTreeMap<usize, (Option<f64>, Option<f64>)> = BTreeMap::new();

    let parse_num = |s: &str, ln: usize| -> Result<f64> {
        s.parse::<f64>()
            .map_err(|_| err(ln, format!("invalid number {s:?}")))
    };

    for (idx, raw) in text.lines().enumerate() {
        let ln = idx + 1;
        if raw.trim().is_empty() || raw.starts_with('*') {
            continue;
        }
        if !raw.starts_with(' ') && !raw.starts_with('\t') {
            let mut it = raw.split_whitespace();
            let head = it.next().unwrap_or_default();
            section = match head {
                "NAME" => {
                    problem.name = it.collect::<Vec<_>>().join(" ");
                    Section::None
                }
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "BOUNDS" => Section::Bounds,
                "ENDATA" => Section::End,
                "RANGES" | "OBJSENSE" | "SOS" | "QUADOBJ" => {
                    return Err(err(ln, format!("section {head} is not supported")))
                }
                other => return Err(err(ln, format!("unknown section {other:?}"))),
            };
            continue;
        }
        let f: Vec<&str> = raw.split_whitespace().collect();
        match section {
            Section::Rows => {
                if f.len() != 2 {
                    return Err(err(ln, "row entry needs a type and a name".into()));
                }
                let relation = match f[0] {
                    "N" => {
                        if obj_row.is_none() {
                            obj_row = Some(f[1].to_string());
                        }
                        continue;
                    }
                    "L" => Relation::Le,
                    "G" => Relation::Ge,
                    "E" => Relation::Eq,
                    t => return Err(err(ln, format!("unknown row type {t:?}"))),
                };
                if row_index.insert(f[1].to_string(), problem.constraints.len()).is_some() {
                    return Err(err(ln, format!("duplicate row {:?}", f[1])));
                }
                problem.constraints.push(Constraint {
                    name: f[1].to_string(),
                    terms: Vec::new(),
                    relation,
                    rhs: 0.0,
                });
                row_terms.push(Vec::new());
            }
            Section::Columns => {
                if f.len() == 3 && f[1] == "'MARKER'" {
                    in_int = match f[2] {
                        "'INTORG'" => true,
                        "'INTEND'" => false,
                        m => return Err(err(ln, format!("unknown marker {m}"))),
                    };
                    continue;
                }
                if f.len() != 3 && f.len() != 5 {
                    return Err(err(ln, "column entry needs 3 or 5 fields".into()));
                }
                let col = match col_index.get(f[0]) {
                    Some(&c) => c,
                    None => {
                        let id = problem.variables.len();
                        col_index.insert(f[0].to_string(), id);
                        problem.variables.push(Variable {
                            name: f[0].to_string(),
                            lower: 0.0,
                            upper: f64::INFINITY,
                            integer: in_int,
                        });
                        problem.objective.push(0.0);
                        id
                    }
                };
                for pair in f[1..].chunks(2) {
                    let k = parse_num(pair[1], ln)?;
                    if Some(pair[0]) == obj_row.as_deref() {
                        problem.objective[col] = k;
                    } else {
                        let r = *row_index
                            .get(pair[0])
                            .ok_or_else(|| err(ln, format!("unknown row {:?}", pair[0])))?;
                        row_terms[r].push((VarId(col), k));
                    }
                }
            }
            Section::Rhs => {
                if f.len() != 3 && f.len() != 5 {
                    return Err(err(ln, "RHS entry needs 3 or 5 fields".into()));
                }
                for pair in f[1..].chunks(2) {
                    let v = parse_num(pair[1], ln)?;
                    if Some(pair[0]) == obj_row.as_deref() {
                        problem.objective_offset = -v;
                    } else {
                        let r = *row_index
                            .get(pair[0])
                            .ok_or_else(|| err(ln, format!("unknown row {:?}", pair[0])))?;
                        problem.constraints[r].rhs = v;
                    }
                }
            }
            Section::Bounds => {
                if f.len() < 3 {
                    return Err(err(ln, "bound entry needs a type, set name and column".into()));
                }
                let col = *col_index
                    .get(f[2])
                    .ok_or_else(|| err(ln, format!("unknown column {:?}", f[2])))?;
                let value = || -> Result<f64> {
                    f.get(3)
                        .ok_or_else(|| err(ln, format!("bound {} needs a value", f[0])))
                        .and_then(|s| parse_num(s, ln))
                };
                let var = &mut problem.variables[col];
                let entry = bounded.entry(col).or_insert((None, None));
                match f[0] {
                    "UP" => {
                        let v = value()?;
                        var.upper = v;
                        entry.1 = Some(v);
                        if v < 0.0 && entry.0.is_none() {
                            var.lower = f64::NEG_INFINITY;
                        }
                    }
                    "LO" => {
                        let v = value()?;
                        var.lower = v;
                        entry.0 = Some(v);
                    }
                    "FX" => {
                        let v = value()?;
                        var.lower = v;
                        var.upper = v;
                        *entry = (Some(v), Some(v));
                    }
                    "FR" => {
                        var.lower = f64::NEG_INFINITY;
                        var.upper = f64::INFINITY;
                    }
                    "MI" => var.lower = f64::NEG_INFINITY,
                    "PL" => var.upper = f64::INFINITY,
                    "BV" => {
                        var.lower = 0.0;
                        var.upper = 1.0;
                        var.integer = true;
                    }
                    t => return Err(err(ln, format!("unsupported bound type {t:?}"))),
                }
            }
            Section::None | Section::End => {
                return Err(err(ln, "data line outside a section".into()));
            }
        }
    }
    if section != Section::End {
        return Err(err(text.lines().count().max(1), "missing ENDATA".into()));
    }
    for (c, terms) in problem.constraints.iter_mut().zip(row_terms) {
        c.terms = crate::model::problem::normalize_terms(terms);
    }
    problem.validate()?;
    Ok(problem)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn knapsack() -> MilpProblem {
        let mut p = MilpProblem::new("knap");
        let x = p.add_binary("x", -1.0);
        let y = p.add_binary("y", -1.0);
        p.add_constraint("cap", [(x, 1.0), (y, 1.0)], Relation::Le, 1.5);
        p
    }

    #[test]
    fn single_row_lp() {
        let mut p = MilpProblem::new("one");
        let x = p.add_var("x", 0.0, f64::INFINITY, 1.0);
        p.add_constraint("c1", [(x, 1.0)], Relation::Ge, 1.0);
        let doc = export_mps(&p).unwrap();
        let rhs: Vec<&str> = doc
            .text
            .lines()
            .skip_while(|l| *l != "RHS")
            .skip(1)
            .take_while(|l| l.starts_with(' '))
            .collect();
        assert_eq!(rhs.len(), 1);
        assert_eq!(rhs[0].split_whitespace().collect::<Vec<_>>(), ["RHS", "c1", "1"]);
        assert!(doc.names.is_empty());
    }

    #[test]
    fn integer_columns_are_marked() {
        let doc = export_mps(&knapsack()).unwrap();
        let lines: Vec<&str> = doc.text.lines().collect();
        let org = lines.iter().position(|l| l.contains("'INTORG'")).unwrap();
        let end = lines.iter().position(|l| l.contains("'INTEND'")).unwrap();
        let inside: HashSet<&str> = lines[org + 1..end]
            .iter()
            .map(|l| l.split_whitespace().next().unwrap())
            .collect();
        assert_eq!(inside, HashSet::from(["x", "y"]));
        // fixed columns: name at 5, row at 15, value at 25
        let entry = lines[org + 1];
        assert_eq!(&entry[4..5], "x");
        assert_eq!(&entry[14..17], "OBJ");
        assert_eq!(&entry[24..26], "-1");
    }

    #[test]
    fn round_trip_identity() {
        let mut p = knapsack();
        let z = p.add_var("z", -2.5, 7.125, 0.1);
        let w = p.add_var("w", f64::NEG_INFINITY, f64::INFINITY, 0.0);
        let k = p.add_integer("k", -3.0, f64::INFINITY, 1.0 / 3.0);
        p.add_constraint("mix", [(z, 1e-9), (w, -12345.678901234), (k, 2.0)], Relation::Eq, -4.0);
        p.add_constraint("free", [(w, 1.0)], Relation::Ge, 0.0);
        p.objective_offset = 12.75;
        let doc = export_mps(&p).unwrap();
        let back = parse_mps(&doc.text, Path::new("t.mps")).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn long_names_are_mapped() {
        let mut p = MilpProblem::new("long names");
        let a = p.add_var("P[10,167]", 0.0, 45.0, 2.0);
        let b = p.add_binary("rho[1,2]", 0.5);
        p.add_constraint("balance[167]", [(a, 1.0), (b, -3.0)], Relation::Ge, 1.0);
        p.add_constraint("OBJ", [(a, 1.0)], Relation::Le, 40.0);
        let doc = export_mps(&p).unwrap();
        assert_eq!(doc.names.columns[0], ("C0000001".to_string(), "P[10,167]".to_string()));
        assert_eq!(doc.names.rows[1], ("R0000002".to_string(), "OBJ".to_string()));
        assert!(doc.text.lines().all(|l| !l.contains("balance")));
        let mut back = parse_mps(&doc.text, Path::new("t.mps")).unwrap();
        doc.names.restore(&mut back);
        back.name = p.name.clone();
        assert_eq!(back, p);
        assert_eq!(export_mps(&p).unwrap(), doc);
        assert!(doc.names.to_csv().starts_with("kind,mps_name,model_name\ncolumn,C0000001,"));
    }

    #[test]
    fn parse_errors_carry_lines() {
        let text = "NAME t\nROWS\n N  OBJ\n L  c\nCOLUMNS\n    x  c  abc\nENDATA\n";
        match parse_mps(text, Path::new("bad.mps")) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 6),
            other => panic!("{other:?}"),
        }
        let text = "NAME t\nROWS\n N  OBJ\nCOLUMNS\n    x  OBJ  1\n";
        assert!(parse_mps(text, Path::new("bad.mps")).is_err());
    }
}
