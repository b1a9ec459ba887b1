//! Fixed-format MPS and CPLEX-style LP text for [`LinearModel`].
//!
//! MPS has a single objective row, so only the first objective level is
//! written as the `N` row. Lower levels, row group tags and group notes are
//! kept in `*` comment lines which other readers skip and [`parse_mps`]
//! reads back:
//!
//! ```text
//! * OBJLEVELS 2
//! * OBJLEVEL 2 changeover-hours
//! * OBJTERM 2 Tf(CH,2) 1
//! * NOTE legacy.dur_c guard reads i != i'
//! ...
//! ROWS
//!  N  OBJ
//! * GROUP core.alloc
//!  L  core.alloc(U1,1)
//! ```
//!
//! Numbers are rounded to 12 significant digits and printed in their
//! shortest form, so output is byte-deterministic for a given model.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::model::{round_sig12, LinearModel, ModelError, Sense, VarId, VarKind};

/// Longest identifier accepted in MPS and LP output.
pub const MAX_NAME_WIDTH: usize = 32;

const OBJ_ROW: &str = "OBJ";
const DEFAULT_GROUP: &str = "default";
const LP_LINE_WIDTH: usize = 200;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MpsError {
    #[error("names not representable in fixed format (longer than {MAX_NAME_WIDTH} characters, empty, or containing whitespace): {}", .0.join(", "))]
    BadNames(Vec<String>),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("missing ENDATA")]
    MissingEndata,
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn parse_err(line: usize, message: impl Into<String>) -> MpsError {
    MpsError::Parse {
        line,
        message: message.into(),
    }
}

/// Shortest text for `x` after rounding to 12 significant digits.
pub fn fmt_num(x: f64) -> String {
    let r = round_sig12(x);
    if r == 0.0 {
        "0".to_string()
    } else if r.abs() >= 1e15 || r.abs() < 1e-6 {
        format!("{r:e}")
    } else {
        format!("{r}")
    }
}

fn name_ok(name: &str) -> bool {
    !name.is_empty() && name.len() <= MAX_NAME_WIDTH && !name.chars().any(char::is_whitespace) && !name.starts_with('*')
}

fn check_names(model: &LinearModel) -> Result<usize, MpsError> {
    let mut bad = Vec::new();
    let mut width = 8;
    let names = model
        .variables()
        .iter()
        .map(|v| v.name.as_str())
        .chain(model.constraints().iter().map(|c| c.name.as_str()));
    for n in names {
        if !name_ok(n) || n == OBJ_ROW {
            bad.push(n.to_string());
        }
        width = width.max(n.len());
    }
    for c in model.constraints() {
        if c.group.chars().any(char::is_whitespace) {
            bad.push(format!("group {}", c.group));
        }
    }
    if bad.is_empty() {
        Ok(width)
    } else {
        Err(MpsError::BadNames(bad))
    }
}

pub fn export_mps(model: &LinearModel) -> Result<String, MpsError> {
    let w = check_names(model)?;
    let mut out = String::new();
    let levels = model.objective();
    writeln!(out, "* OBJLEVELS {}", levels.len()).unwrap();
    for (k, level) in levels.iter().enumerate() {
        writeln!(out, "* OBJLEVEL {} {}", k + 1, level.label).unwrap();
        if k == 0 {
            continue;
        }
        for &(a, v) in &level.terms {
            writeln!(out, "* OBJTERM {} {} {}", k + 1, model.variable(v).name, fmt_num(a)).unwrap();
        }
    }
    for (group, note) in model.group_notes() {
        writeln!(out, "* NOTE {group} {note}").unwrap();
    }
    let name = if model.name.is_empty() {
        "MODEL"
    } else {
        model.name.as_str()
    };
    writeln!(out, "NAME          {name}").unwrap();

    out.push_str("ROWS\n");
    writeln!(out, " N  {OBJ_ROW}").unwrap();
    let mut current_group: Option<&str> = None;
    for c in model.constraints() {
        if current_group != Some(c.group.as_str()) {
            writeln!(out, "* GROUP {}", c.group).unwrap();
            current_group = Some(c.group.as_str());
        }
        let tag = match c.sense {
            Sense::Le => "L",
            Sense::Ge => "G",
            Sense::Eq => "E",
        };
        writeln!(out, " {tag}  {}", c.name).unwrap();
    }

    // Column-major view of the rows.
    let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); model.variables().len()];
    for (r, c) in model.constraints().iter().enumerate() {
        for &(a, v) in &c.terms {
            columns[v.0].push((r, a));
        }
    }
    let mut obj1 = vec![0.0; model.variables().len()];
    if let Some(level) = levels.first() {
        for &(a, v) in &level.terms {
            obj1[v.0] += a;
        }
    }

    out.push_str("COLUMNS\n");
    let mut in_int = false;
    let mut marker = 0;
    for (j, var) in model.variables().iter().enumerate() {
        let is_int = var.kind == VarKind::Binary;
        if is_int != in_int {
            let tag = if is_int { "'INTORG'" } else { "'INTEND'" };
            writeln!(out, "    {:<w$}  {:<w$}  {tag}", format!("M{marker}"), "'MARKER'").unwrap();
            marker += 1;
            in_int = is_int;
        }
        if obj1[j] != 0.0 || columns[j].is_empty() {
            writeln!(out, "    {:<w$}  {:<w$}  {}", var.name, OBJ_ROW, fmt_num(obj1[j])).unwrap();
        }
        for &(r, a) in &columns[j] {
            let row = &model.constraints()[r].name;
            writeln!(out, "    {:<w$}  {:<w$}  {}", var.name, row, fmt_num(a)).unwrap();
        }
    }
    if in_int {
        writeln!(out, "    {:<w$}  {:<w$}  'INTEND'", format!("M{marker}"), "'MARKER'").unwrap();
    }

    out.push_str("RHS\n");
    for c in model.constraints() {
        if c.rhs != 0.0 {
            writeln!(out, "    {:<w$}  {:<w$}  {}", "RHS", c.name, fmt_num(c.rhs)).unwrap();
        }
    }

    out.push_str("BOUNDS\n");
    for var in model.variables() {
        let n = &var.name;
        if var.kind == VarKind::Binary {
            if var.lo == 0.0 && var.hi == 1.0 {
                writeln!(out, " BV {:<w$}  {n}", "BND").unwrap();
            } else {
                // Binary with a fixed value.
                writeln!(out, " BV {:<w$}  {n}", "BND").unwrap();
                writeln!(out, " LO {:<w$}  {:<w$}  {}", "BND", n, fmt_num(var.lo)).unwrap();
                writeln!(out, " UP {:<w$}  {:<w$}  {}", "BND", n, fmt_num(var.hi)).unwrap();
            }
            continue;
        }
        let (lo, hi) = (var.lo, var.hi);
        if lo == hi {
            writeln!(out, " FX {:<w$}  {:<w$}  {}", "BND", n, fmt_num(lo)).unwrap();
        } else if lo == f64::NEG_INFINITY && hi == f64::INFINITY {
            writeln!(out, " FR {:<w$}  {n}", "BND").unwrap();
        } else {
            if lo == f64::NEG_INFINITY {
                writeln!(out, " MI {:<w$}  {n}", "BND").unwrap();
            } else if lo != 0.0 {
                writeln!(out, " LO {:<w$}  {:<w$}  {}", "BND", n, fmt_num(lo)).unwrap();
            }
            if hi.is_finite() {
                writeln!(out, " UP {:<w$}  {:<w$}  {}", "BND", n, fmt_num(hi)).unwrap();
            }
        }
    }
    out.push_str("ENDATA\n");
    Ok(out)
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Preamble,
    Rows,
    Columns,
    Rhs,
    Bounds,
}

struct PendingRow {
    name: String,
    sense: Sense,
    group: String,
    terms: Vec<(f64, String)>,
    rhs: f64,
}

struct PendingCol {
    name: String,
    binary: bool,
    lo: f64,
    hi: f64,
    obj: f64,
}

fn number(tok: &str, line: usize) -> Result<f64, MpsError> {
    tok.parse::<f64>()
        .map_err(|_| parse_err(line, format!("expected a number, found {tok:?}")))
}

/// Reads fixed-format MPS (as written by [`export_mps`]) back into a model.
pub fn parse_mps(text: &str) -> Result<LinearModel, MpsError> {
    let mut section = Section::Preamble;
    let mut model_name = String::new();
    let mut n_levels = 0usize;
    let mut labels: HashMap<usize, String> = HashMap::new();
    let mut lower_terms: Vec<(usize, String, f64, usize)> = Vec::new();
    let mut notes: Vec<(String, String)> = Vec::new();
    let mut group = DEFAULT_GROUP.to_string();
    let mut rows: Vec<PendingRow> = Vec::new();
    let mut row_index: HashMap<String, usize> = HashMap::new();
    let mut obj_row: Option<String> = None;
    let mut cols: Vec<PendingCol> = Vec::new();
    let mut col_index: HashMap<String, usize> = HashMap::new();
    let mut in_int = false;
    let mut ended = false;

    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        if raw.trim().is_empty() {
            continue;
        }
        if let Some(comment) = raw.strip_prefix('*') {
            let mut toks = comment.split_whitespace();
            match toks.next() {
                Some("OBJLEVELS") => {
                    n_levels = toks
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| parse_err(line, "bad OBJLEVELS"))?;
                }
                Some("OBJLEVEL") => {
                    let lvl: usize = toks
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| parse_err(line, "bad OBJLEVEL"))?;
                    labels.insert(lvl, toks.collect::<Vec<_>>().join(" "));
                }
                Some("OBJTERM") => {
                    let t: Vec<&str> = toks.collect();
                    if t.len() != 3 {
                        return Err(parse_err(line, "OBJTERM needs level, column and value"));
                    }
                    let lvl = t[0].parse().map_err(|_| parse_err(line, "bad OBJTERM level"))?;
                    lower_terms.push((lvl, t[1].to_string(), number(t[2], line)?, line));
                }
                Some("NOTE") => {
                    let g = toks.next().ok_or_else(|| parse_err(line, "NOTE needs a group"))?;
                    notes.push((g.to_string(), toks.collect::<Vec<_>>().join(" ")));
                }
                Some("GROUP") => {
                    group = toks
                        .next()
                        .ok_or_else(|| parse_err(line, "GROUP needs a tag"))?
                        .to_string();
                }
                _ => {}
            }
            continue;
        }
        if ended {
            return Err(parse_err(line, "content after ENDATA"));
        }
        if !raw.starts_with(' ') && !raw.starts_with('\t') {
            let mut toks = raw.split_whitespace();
            let head = toks.next().unwrap_or_default();
            section = match head {
                "NAME" => {
                    model_name = toks.collect::<Vec<_>>().join(" ");
                    Section::Preamble
                }
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "BOUNDS" => Section::Bounds,
                "ENDATA" => {
                    ended = true;
                    continue;
                }
                "RANGES" => return Err(parse_err(line, "ranged rows are not supported")),
                other => return Err(parse_err(line, format!("unknown section {other}"))),
            };
            continue;
        }
        let toks: Vec<&str> = raw.split_whitespace().collect();
        match section {
            Section::Preamble => return Err(parse_err(line, "data line outside any section")),
            Section::Rows => {
                if toks.len() != 2 {
                    return Err(parse_err(line, "ROWS entry needs type and name"));
                }
                let sense = match toks[0] {
                    "N" => {
                        if obj_row.is_some() {
                            return Err(parse_err(line, "more than one objective row"));
                        }
                        obj_row = Some(toks[1].to_string());
                        continue;
                    }
                    "L" => Sense::Le,
                    "G" => Sense::Ge,
                    "E" => Sense::Eq,
                    other => return Err(parse_err(line, format!("unknown row type {other}"))),
                };
                if row_index.insert(toks[1].to_string(), rows.len()).is_some() {
                    return Err(parse_err(line, format!("duplicate row {}", toks[1])));
                }
                rows.push(PendingRow {
                    name: toks[1].to_string(),
                    sense,
                    group: group.clone(),
                    terms: Vec::new(),
                    rhs: 0.0,
                });
            }
            Section::Columns => {
                if toks.len() == 3 && toks[1] == "'MARKER'" {
                    in_int = match toks[2] {
                        "'INTORG'" => true,
                        "'INTEND'" => false,
                        other => return Err(parse_err(line, format!("unknown marker {other}"))),
                    };
                    continue;
                }
                if toks.len() != 3 && toks.len() != 5 {
                    return Err(parse_err(line, "COLUMNS entry needs column and row/value pairs"));
                }
                let col = toks[0];
                let j = *col_index.entry(col.to_string()).or_insert_with(|| {
                    cols.push(PendingCol {
                        name: col.to_string(),
                        binary: in_int,
                        lo: 0.0,
                        hi: if in_int { 1.0 } else { f64::INFINITY },
                        obj: 0.0,
                    });
                    cols.len() - 1
                });
                for pair in toks[1..].chunks(2) {
                    let value = number(pair[1], line)?;
                    if Some(pair[0]) == obj_row.as_deref() {
                        cols[j].obj += value;
                    } else {
                        let r = *row_index
                            .get(pair[0])
                            .ok_or_else(|| parse_err(line, format!("unknown row {}", pair[0])))?;
                        rows[r].terms.push((value, col.to_string()));
                    }
                }
            }
            Section::Rhs => {
                if toks.len() != 3 && toks.len() != 5 {
                    return Err(parse_err(line, "RHS entry needs set name and row/value pairs"));
                }
                for pair in toks[1..].chunks(2) {
                    let value = number(pair[1], line)?;
                    if Some(pair[0]) == obj_row.as_deref() {
                        return Err(parse_err(line, "objective constants are not supported"));
                    }
                    let r = *row_index
                        .get(pair[0])
                        .ok_or_else(|| parse_err(line, format!("RHS for unknown row {}", pair[0])))?;
                    rows[r].rhs = value;
                }
            }
            Section::Bounds => {
                if toks.len() < 3 {
                    return Err(parse_err(line, "BOUNDS entry needs type, set and column"));
                }
                let j = *col_index
                    .get(toks[2])
                    .ok_or_else(|| parse_err(line, format!("bound for unknown column {}", toks[2])))?;
                let value = || -> Result<f64, MpsError> {
                    toks.get(3)
                        .ok_or_else(|| parse_err(line, "bound value missing"))
                        .and_then(|t| number(t, line))
                };
                let c = &mut cols[j];
                match toks[0] {
                    "BV" => {
                        c.binary = true;
                        c.lo = 0.0;
                        c.hi = 1.0;
                    }
                    "LO" => c.lo = value()?,
                    "UP" => c.hi = value()?,
                    "FX" => {
                        let v = value()?;
                        c.lo = v;
                        c.hi = v;
                    }
                    "FR" => {
                        c.lo = f64::NEG_INFINITY;
                        c.hi = f64::INFINITY;
                    }
                    "MI" => c.lo = f64::NEG_INFINITY,
                    "PL" => c.hi = f64::INFINITY,
                    other => return Err(parse_err(line, format!("unsupported bound type {other}"))),
                }
            }
        }
    }
    if !ended {
        return Err(MpsError::MissingEndata);
    }

    let mut model = LinearModel::new(model_name);
    let mut ids: HashMap<String, VarId> = HashMap::new();
    for c in &cols {
        let kind = if c.binary { VarKind::Binary } else { VarKind::Continuous };
        ids.insert(c.name.clone(), model.add_variable(c.name.clone(), kind, c.lo, c.hi)?);
    }
    for r in rows {
        let terms: Vec<(f64, VarId)> = r.terms.iter().map(|(a, n)| (*a, ids[n])).collect();
        model.add_constraint(r.name, &r.group, terms, r.sense, r.rhs)?;
    }
    let n_levels = n_levels.max(usize::from(cols.iter().any(|c| c.obj != 0.0)));
    for lvl in 1..=n_levels {
        let label = labels.get(&lvl).cloned().unwrap_or_default();
        let terms: Vec<(f64, VarId)> = if lvl == 1 {
            cols.iter()
                .filter(|c| c.obj != 0.0)
                .map(|c| (c.obj, ids[&c.name]))
                .collect()
        } else {
            let mut t = Vec::new();
            for (l, name, a, line) in &lower_terms {
                if *l == lvl {
                    let id = ids
                        .get(name)
                        .ok_or_else(|| parse_err(*line, format!("objective term for unknown column {name}")))?;
                    t.push((*a, *id));
                }
            }
            t
        };
        model.add_objective_terms(lvl, &label, terms)?;
    }
    for (g, n) in notes {
        model.note_group(&g, &n);
    }
    Ok(model)
}

fn lp_expr(model: &LinearModel, terms: &[(f64, VarId)], head: &str) -> String {
    let mut line = String::from(head);
    let mut out = String::new();
    if terms.is_empty() {
        line.push_str(" 0");
        if let Some(v) = model.variables().first() {
            line.push(' ');
            line.push_str(&v.name);
        }
    }
    for (k, &(a, v)) in terms.iter().enumerate() {
        let sign = if a < 0.0 {
            "-"
        } else if k == 0 {
            ""
        } else {
            "+"
        };
        let piece = format!(
            " {sign}{}{} {}",
            if sign.is_empty() { "" } else { " " },
            fmt_num(a.abs()),
            model.variable(v).name
        );
        if line.len() + piece.len() > LP_LINE_WIDTH {
            out.push_str(&line);
            out.push('\n');
            line = String::from(" ");
        }
        line.push_str(&piece);
    }
    out.push_str(&line);
    out
}

/// CPLEX LP text. Only the first objective level is a real objective;
/// the others are written as `\` comments.
pub fn export_lp(model: &LinearModel) -> Result<String, MpsError> {
    check_names(model)?;
    let mut out = String::new();
    writeln!(out, "\\ Problem: {}", model.name).unwrap();
    for (k, level) in model.objective().iter().enumerate().skip(1) {
        let expr = lp_expr(model, &level.terms, "");
        writeln!(
            out,
            "\\ Objective level {} ({}):{}",
            k + 1,
            level.label,
            expr.replace('\n', " ")
        )
        .unwrap();
    }
    for (g, n) in model.group_notes() {
        writeln!(out, "\\ Note {g}: {n}").unwrap();
    }
    out.push_str("Minimize\n");
    let obj: &[(f64, VarId)] = model.objective().first().map_or(&[], |l| &l.terms);
    out.push_str(&lp_expr(model, obj, " obj:"));
    out.push('\n');
    out.push_str("Subject To\n");
    for c in model.constraints() {
        let head = format!(" {}:", c.name);
        out.push_str(&lp_expr(model, &c.terms, &head));
        writeln!(out, " {} {}", c.sense, fmt_num(c.rhs)).unwrap();
    }
    out.push_str("Bounds\n");
    for v in model.variables() {
        if v.kind == VarKind::Binary {
            if v.lo == v.hi {
                writeln!(out, " {} = {}", v.name, fmt_num(v.lo)).unwrap();
            }
            continue;
        }
        match (v.lo, v.hi) {
            (lo, hi) if lo == hi => writeln!(out, " {} = {}", v.name, fmt_num(lo)).unwrap(),
            (lo, hi) if lo == f64::NEG_INFINITY && hi == f64::INFINITY => writeln!(out, " {} free", v.name).unwrap(),
            (lo, hi) if hi == f64::INFINITY => {
                if lo != 0.0 {
                    writeln!(out, " {} >= {}", v.name, fmt_lp_bound(lo)).unwrap();
                }
            }
            (lo, hi) => writeln!(out, " {} <= {} <= {}", fmt_lp_bound(lo), v.name, fmt_num(hi)).unwrap(),
        }
    }
    let binaries: Vec<&str> = model
        .variables()
        .iter()
        .filter(|v| v.kind == VarKind::Binary)
        .map(|v| v.name.as_str())
        .collect();
    if !binaries.is_empty() {
        out.push_str("Binary\n");
        for b in binaries {
            writeln!(out, " {b}").unwrap();
        }
    }
    out.push_str("End\n");
    Ok(out)
}

fn fmt_lp_bound(x: f64) -> String {
    if x == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        fmt_num(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> LinearModel {
        let mut m = LinearModel::new("tiny");
        let b = m.add_binary("b").unwrap();
        let y = m.add_continuous("y", -2.5, 7.0).unwrap();
        m.add_constraint("c(1)", "g", [(1.0, b), (-0.5, y)], Sense::Le, 3.0)
            .unwrap();
        m.add_objective_terms(1, "first", [(2.0, b)]).unwrap();
        m.add_objective_terms(2, "second", [(1.0, y)]).unwrap();
        m
    }

    #[test]
    fn one_row_besides_objective() {
        let text = export_mps(&tiny()).unwrap();
        let rows: Vec<&str> = text
            .lines()
            .skip_while(|l| *l != "ROWS")
            .skip(1)
            .take_while(|l| *l != "COLUMNS")
            .filter(|l| !l.starts_with('*'))
            .collect();
        assert_eq!(rows, vec![" N  OBJ", " L  c(1)"]);
        assert!(text.contains("'INTORG'") && text.contains("'INTEND'"));
        assert!(text.contains(" BV BND"));
    }

    #[test]
    fn round_trip_tiny() {
        let m = tiny();
        let back = parse_mps(&export_mps(&m).unwrap()).unwrap();
        assert_eq!(back.canonical(), m.canonical());
    }

    #[test]
    fn export_is_deterministic() {
        assert_eq!(export_mps(&tiny()).unwrap(), export_mps(&tiny()).unwrap());
    }

    #[test]
    fn missing_endata() {
        let text = export_mps(&tiny()).unwrap().replace("ENDATA\n", "");
        assert_eq!(parse_mps(&text).unwrap_err(), MpsError::MissingEndata);
    }

    #[test]
    fn rhs_for_unknown_row() {
        let text = export_mps(&tiny())
            .unwrap()
            .replace("RHS\n", "RHS\n    RHS  nosuch  1\n");
        let err = parse_mps(&text).unwrap_err();
        assert!(matches!(err, MpsError::Parse { .. }));
        assert!(err.to_string().contains("nosuch"));
    }

    #[test]
    fn long_names_rejected() {
        let mut m = LinearModel::new("t");
        m.add_binary("x".repeat(40)).unwrap();
        m.add_binary("fine").unwrap();
        match export_mps(&m) {
            Err(MpsError::BadNames(names)) => assert_eq!(names, vec!["x".repeat(40)]),
            other => panic!("{other:?}"),
        }
        assert!(export_lp(&m).is_err());
    }

    #[test]
    fn numbers_are_short() {
        assert_eq!(fmt_num(3.0), "3");
        assert_eq!(fmt_num(-0.1), "-0.1");
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_num(1e-9), "1e-9");
        assert_eq!(fmt_num(2.5e20), "2.5e20");
    }

    #[test]
    fn lp_sections() {
        let text = export_lp(&tiny()).unwrap();
        for s in ["Minimize\n", "Subject To\n", "Bounds\n", "Binary\n", "End\n"] {
            assert!(text.contains(s), "{s}");
        }
        assert!(text.contains(" obj: 2 b"));
        assert!(text.contains(" c(1): 1 b - 0.5 y <= 3"));
        assert!(text.contains(" -2.5 <= y <= 7"));
        assert!(text.contains("\\ Objective level 2 (second): 1 y"));
    }
}
