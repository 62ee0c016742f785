//! Integer-programming view of the problem: directed edge binaries x_i_j,
//! one position integer u_i per city, and the single-depot degree, size and
//! ordering constraints that make k bounded depot-anchored tours the only
//! feasible structures.
//!
//! The model can be exported in LP format for an external MILP solver, read
//! back, and used to score a heuristic solution constraint by constraint.
//!
//! One structural caveat: the no-immediate-return rows forbid a tour that
//! visits a single city, so the model only matches the heuristic's notion
//! of feasibility when `m_min >= 2`.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::model::{CityId, Instance, Solution, Tour};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub coeff: f64,
    /// Index into [`IlpModel::vars`].
    pub var: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    pub terms: Vec<Term>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VarKind {
    Binary,
    General { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IlpModel {
    pub name: String,
    pub vars: Vec<Variable>,
    pub objective: Vec<Term>,
    pub rows: Vec<Row>,
}

#[derive(Debug, thiserror::Error)]
pub enum IlpError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("solution does not visit exactly the instance's cities")]
    CityMismatch,
}

fn x_name(i: CityId, j: CityId) -> String {
    format!("x_{i}_{j}")
}

fn u_name(i: CityId) -> String {
    format!("u_{i}")
}

/// Builds the full model for an instance. Variable order is fixed: all
/// edge binaries in ascending (i, j) city order, then the position
/// integers in ascending city order. Row order is fixed too, so the same
/// instance always produces the same model.
pub fn build_model(inst: &Instance) -> IlpModel {
    let depot = inst.depot();
    let cities = inst.non_depot_ids();
    let k = inst.k() as f64;
    let m_min = inst.m_min() as f64;
    let m_max = inst.m_max() as f64;

    let mut nodes = vec![depot];
    nodes.extend(cities.iter().copied());

    let mut vars = Vec::new();
    let mut index = HashMap::new();
    for &i in &nodes {
        for &j in &nodes {
            if i != j {
                index.insert(x_name(i, j), vars.len());
                vars.push(Variable {
                    name: x_name(i, j),
                    kind: VarKind::Binary,
                });
            }
        }
    }
    for &i in &cities {
        index.insert(u_name(i), vars.len());
        vars.push(Variable {
            name: u_name(i),
            kind: VarKind::General { lo: 1.0, hi: m_max },
        });
    }
    let xv = |i: CityId, j: CityId| index[&x_name(i, j)];
    let uv = |i: CityId| index[&u_name(i)];

    let mut objective = Vec::new();
    for &i in &nodes {
        for &j in &nodes {
            if i != j {
                let w = inst.distance(i, j);
                if w != 0.0 {
                    objective.push(Term {
                        coeff: w,
                        var: xv(i, j),
                    });
                }
            }
        }
    }

    let mut rows = Vec::new();
    let mut push = |name: String, terms: Vec<(f64, usize)>, sense: Sense, rhs: f64| {
        let terms = terms
            .into_iter()
            .filter(|&(c, _)| c != 0.0)
            .map(|(coeff, var)| Term { coeff, var })
            .collect();
        rows.push(Row {
            name,
            terms,
            sense,
            rhs,
        });
    };

    // Exactly k tours leave and enter the depot.
    push(
        "depot_out".into(),
        cities.iter().map(|&j| (1.0, xv(depot, j))).collect(),
        Sense::Eq,
        k,
    );
    push(
        "depot_in".into(),
        cities.iter().map(|&j| (1.0, xv(j, depot))).collect(),
        Sense::Eq,
        k,
    );
    // Every city is left and entered exactly once.
    for &i in &cities {
        let terms = nodes
            .iter()
            .filter(|&&j| j != i)
            .map(|&j| (1.0, xv(i, j)))
            .collect();
        push(format!("out_{i}"), terms, Sense::Eq, 1.0);
    }
    for &j in &cities {
        let terms = nodes
            .iter()
            .filter(|&&i| i != j)
            .map(|&i| (1.0, xv(i, j)))
            .collect();
        push(format!("in_{j}"), terms, Sense::Eq, 1.0);
    }
    // A tour's first city sits at position 1, and a tour may not grow past
    // m_max: position capped relative to the edges touching the depot.
    for &i in &cities {
        push(
            format!("pos_cap_{i}"),
            vec![
                (1.0, uv(i)),
                (m_max - 2.0, xv(depot, i)),
                (-1.0, xv(i, depot)),
            ],
            Sense::Le,
            m_max - 1.0,
        );
    }
    // A tour's last city sits at position >= m_min: position floored
    // relative to the edges touching the depot.
    for &i in &cities {
        push(
            format!("pos_floor_{i}"),
            vec![
                (1.0, uv(i)),
                (1.0, xv(depot, i)),
                (2.0 - m_min, xv(i, depot)),
            ],
            Sense::Ge,
            2.0,
        );
    }
    // No depot round trip through a single city.
    for &i in &cities {
        push(
            format!("no_return_{i}"),
            vec![(1.0, xv(depot, i)), (1.0, xv(i, depot))],
            Sense::Le,
            1.0,
        );
    }
    // Positions increase along every edge between cities, which rules out
    // closed loops that never touch the depot.
    for &i in &cities {
        for &j in &cities {
            if i != j {
                push(
                    format!("order_{i}_{j}"),
                    vec![
                        (1.0, uv(i)),
                        (-1.0, uv(j)),
                        (m_max, xv(i, j)),
                        (m_max - 2.0, xv(j, i)),
                    ],
                    Sense::Le,
                    m_max - 1.0,
                );
            }
        }
    }

    IlpModel {
        name: inst.name().to_string(),
        vars,
        objective,
        rows,
    }
}

fn push_term(out: &mut String, first: bool, coeff: f64, var: &str) {
    if coeff < 0.0 {
        out.push_str("- ");
    } else if !first {
        out.push_str("+ ");
    }
    let mag = coeff.abs();
    if mag != 1.0 {
        let _ = write!(out, "{mag} ");
    }
    out.push_str(var);
}

/// Renders the model in LP format. The output is canonical: the same model
/// always yields byte-identical text, and numbers use the shortest
/// representation that parses back to the same value.
pub fn export_lp(model: &IlpModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "\\ Problem: {}", model.name);
    out.push_str("Minimize\n obj:");
    for (t, term) in model.objective.iter().enumerate() {
        if t > 0 && t % 8 == 0 {
            out.push_str("\n     ");
        } else {
            out.push(' ');
        }
        push_term(&mut out, t == 0, term.coeff, &model.vars[term.var].name);
    }
    out.push_str("\nSubject To\n");
    for row in &model.rows {
        let _ = write!(out, " {}:", row.name);
        for (t, term) in row.terms.iter().enumerate() {
            out.push(' ');
            push_term(&mut out, t == 0, term.coeff, &model.vars[term.var].name);
        }
        let _ = writeln!(out, " {} {}", row.sense.symbol(), row.rhs);
    }
    out.push_str("Bounds\n");
    for v in &model.vars {
        if let VarKind::General { lo, hi } = v.kind {
            let _ = writeln!(out, " {} <= {} <= {}", lo, v.name, hi);
        }
    }
    let binaries: Vec<&str> = model
        .vars
        .iter()
        .filter(|v| v.kind == VarKind::Binary)
        .map(|v| v.name.as_str())
        .collect();
    let generals: Vec<&str> = model
        .vars
        .iter()
        .filter(|v| matches!(v.kind, VarKind::General { .. }))
        .map(|v| v.name.as_str())
        .collect();
    for (header, names) in [("Generals", generals), ("Binaries", binaries)] {
        if names.is_empty() {
            continue;
        }
        out.push_str(header);
        out.push('\n');
        for chunk in names.chunks(10) {
            let _ = writeln!(out, " {}", chunk.join(" "));
        }
    }
    out.push_str("End\n");
    out
}

struct NamedTerm {
    coeff: f64,
    var: String,
}

fn tokenize_terms(tokens: &[&str], line: usize) -> Result<Vec<NamedTerm>, IlpError> {
    let mut terms = Vec::new();
    let mut sign = 1.0;
    let mut coeff: Option<f64> = None;
    for &tok in tokens {
        match tok {
            "+" => {}
            "-" => sign = -sign,
            _ => {
                if let Ok(v) = tok.parse::<f64>() {
                    if coeff.is_some() {
                        return Err(IlpError::Parse {
                            line,
                            msg: format!("two consecutive numbers near {tok:?}"),
                        });
                    }
                    coeff = Some(v);
                } else {
                    terms.push(NamedTerm {
                        coeff: sign * coeff.take().unwrap_or(1.0),
                        var: tok.to_string(),
                    });
                    sign = 1.0;
                }
            }
        }
    }
    if coeff.is_some() {
        return Err(IlpError::Parse {
            line,
            msg: "dangling coefficient".into(),
        });
    }
    Ok(terms)
}

/// Minimal LP reader for files produced by [`export_lp`]: one constraint
/// per line, sections in the canonical order, `\` comment lines. Not a
/// general LP parser.
pub fn parse_lp(text: &str) -> Result<IlpModel, IlpError> {
    #[derive(PartialEq, Clone, Copy)]
    enum Section {
        Preamble,
        Objective,
        Rows,
        Bounds,
        Generals,
        Binaries,
        Done,
    }
    let mut name = String::new();
    let mut objective_tokens: Vec<String> = Vec::new();
    let mut raw_rows: Vec<(usize, String)> = Vec::new();
    let mut bounds: Vec<(usize, String)> = Vec::new();
    let mut generals: Vec<String> = Vec::new();
    let mut binaries: Vec<String> = Vec::new();
    let mut section = Section::Preamble;

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('\\') {
            if let Some(n) = rest.trim().strip_prefix("Problem:") {
                name = n.trim().to_string();
            }
            continue;
        }
        section = match trimmed {
            "Minimize" => Section::Objective,
            "Subject To" => Section::Rows,
            "Bounds" => Section::Bounds,
            "Generals" => Section::Generals,
            "Binaries" => Section::Binaries,
            "End" => Section::Done,
            _ => {
                match section {
                    Section::Preamble | Section::Done => {
                        return Err(IlpError::Parse {
                            line,
                            msg: format!("unexpected content {trimmed:?}"),
                        })
                    }
                    Section::Objective => {
                        let body = trimmed.strip_prefix("obj:").unwrap_or(trimmed);
                        objective_tokens.extend(body.split_whitespace().map(str::to_string));
                    }
                    Section::Rows => raw_rows.push((line, trimmed.to_string())),
                    Section::Bounds => bounds.push((line, trimmed.to_string())),
                    Section::Generals => {
                        generals.extend(trimmed.split_whitespace().map(str::to_string))
                    }
                    Section::Binaries => {
                        binaries.extend(trimmed.split_whitespace().map(str::to_string))
                    }
                }
                continue;
            }
        };
    }

    // Variable order mirrors the exporter: binaries first, then generals.
    let mut vars = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for b in &binaries {
        index.insert(b.clone(), vars.len());
        vars.push(Variable {
            name: b.clone(),
            kind: VarKind::Binary,
        });
    }
    for g in &generals {
        index.insert(g.clone(), vars.len());
        vars.push(Variable {
            name: g.clone(),
            kind: VarKind::General {
                lo: f64::NEG_INFINITY,
                hi: f64::INFINITY,
            },
        });
    }
    for (line, b) in &bounds {
        let tokens: Vec<&str> = b.split_whitespace().collect();
        if tokens.len() != 5 || tokens[1] != "<=" || tokens[3] != "<=" {
            return Err(IlpError::Parse {
                line: *line,
                msg: format!("unsupported bound {b:?}"),
            });
        }
        let parse = |s: &str| -> Result<f64, IlpError> {
            s.parse().map_err(|_| IlpError::Parse {
                line: *line,
                msg: format!("bad number {s:?}"),
            })
        };
        let (lo, var, hi) = (parse(tokens[0])?, tokens[2], parse(tokens[4])?);
        let &vi = index.get(var).ok_or_else(|| IlpError::Parse {
            line: *line,
            msg: format!("bound for unknown variable {var:?}"),
        })?;
        vars[vi].kind = VarKind::General { lo, hi };
    }

    let resolve = |named: Vec<NamedTerm>, line: usize| -> Result<Vec<Term>, IlpError> {
        named
            .into_iter()
            .map(|t| {
                index
                    .get(&t.var)
                    .map(|&var| Term {
                        coeff: t.coeff,
                        var,
                    })
                    .ok_or_else(|| IlpError::Parse {
                        line,
                        msg: format!("unknown variable {:?}", t.var),
                    })
            })
            .collect()
    };

    let obj_tokens: Vec<&str> = objective_tokens.iter().map(String::as_str).collect();
    let objective = resolve(tokenize_terms(&obj_tokens, 0)?, 0)?;

    let mut rows = Vec::new();
    for (line, body) in &raw_rows {
        let (rname, rest) = body.split_once(':').ok_or_else(|| IlpError::Parse {
            line: *line,
            msg: "constraint has no name".into(),
        })?;
        let tokens: Vec<&str> = rest.split_whitespace().collect();
        let sense_pos = tokens
            .iter()
            .position(|t| matches!(*t, "<=" | ">=" | "="))
            .ok_or_else(|| IlpError::Parse {
                line: *line,
                msg: "constraint has no comparison".into(),
            })?;
        let sense = match tokens[sense_pos] {
            "<=" => Sense::Le,
            ">=" => Sense::Ge,
            _ => Sense::Eq,
        };
        if sense_pos + 2 != tokens.len() {
            return Err(IlpError::Parse {
                line: *line,
                msg: "expected a single right-hand side".into(),
            });
        }
        let rhs = tokens[sense_pos + 1].parse().map_err(|_| IlpError::Parse {
            line: *line,
            msg: format!("bad right-hand side {:?}", tokens[sense_pos + 1]),
        })?;
        rows.push(Row {
            name: rname.trim().to_string(),
            terms: resolve(tokenize_terms(&tokens[..sense_pos], *line)?, *line)?,
            sense,
            rhs,
        });
    }

    Ok(IlpModel {
        name,
        vars,
        objective,
        rows,
    })
}

#[derive(Debug, Clone)]
pub struct RowViolation {
    /// Name of the breached row, or of a variable outside its bounds.
    pub name: String,
    /// How far past the limit the left-hand side lands.
    pub amount: f64,
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub objective: f64,
    pub violations: Vec<RowViolation>,
}

impl Evaluation {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

const ROW_TOLERANCE: f64 = 1e-6;

/// Scores a solution against the model: derives the edge and position
/// variables from the tours, then reports the objective and every breached
/// row. Requires the solution to visit exactly the instance's cities.
pub fn evaluate(
    model: &IlpModel,
    s: &Solution,
    inst: &Instance,
) -> Result<Evaluation, IlpError> {
    let mut seen: Vec<bool> = vec![false; inst.n() + 2];
    let mut count = 0usize;
    for tour in &s.tours {
        for &c in &tour.cities {
            let idx = c.0 as usize;
            if c == inst.depot() || idx > inst.n() + 1 || idx == 0 || seen[idx] {
                return Err(IlpError::CityMismatch);
            }
            seen[idx] = true;
            count += 1;
        }
    }
    if count != inst.n() {
        return Err(IlpError::CityMismatch);
    }

    let index: HashMap<&str, usize> = model
        .vars
        .iter()
        .enumerate()
        .map(|(i, v)| (v.name.as_str(), i))
        .collect();
    let mut values = vec![0.0; model.vars.len()];
    let mut set = |name: String, v: f64| {
        values[index[name.as_str()]] = v;
    };
    let depot = inst.depot();
    for tour in &s.tours {
        let mut prev = depot;
        for (pos, &c) in tour.cities.iter().enumerate() {
            set(x_name(prev, c), 1.0);
            set(u_name(c), pos as f64 + 1.0);
            prev = c;
        }
        set(x_name(prev, depot), 1.0);
    }

    let mut violations = Vec::new();
    for (v, &val) in model.vars.iter().zip(&values) {
        let (lo, hi) = match v.kind {
            VarKind::Binary => (0.0, 1.0),
            VarKind::General { lo, hi } => (lo, hi),
        };
        let breach = (lo - val).max(val - hi);
        if breach > ROW_TOLERANCE {
            violations.push(RowViolation {
                name: v.name.clone(),
                amount: breach,
            });
        }
    }
    for row in &model.rows {
        let lhs: f64 = row.terms.iter().map(|t| t.coeff * values[t.var]).sum();
        let breach = match row.sense {
            Sense::Le => lhs - row.rhs,
            Sense::Ge => row.rhs - lhs,
            Sense::Eq => (lhs - row.rhs).abs(),
        };
        if breach > ROW_TOLERANCE {
            violations.push(RowViolation {
                name: row.name.clone(),
                amount: breach,
            });
        }
    }
    let objective = model
        .objective
        .iter()
        .map(|t| t.coeff * values[t.var])
        .sum();
    Ok(Evaluation {
        objective,
        violations,
    })
}

/// Every tour set the model accepts, one entry per feasible edge
/// assignment (so each undirected route shows up once per orientation).
/// Exhaustive over edge structures and position vectors; only for tiny
/// cross-check tests, and only sensible when `m_min >= 2`.
pub fn enumerate_ilp_feasible(inst: &Instance) -> Vec<Vec<Tour>> {
    assert!(inst.n() <= 5, "model enumeration is limited to n <= 5");
    let model = build_model(inst);
    let n = inst.n();
    let depot = inst.depot();
    let cities = inst.non_depot_ids();
    let index: HashMap<&str, usize> = model
        .vars
        .iter()
        .enumerate()
        .map(|(i, v)| (v.name.as_str(), i))
        .collect();
    let num_x = (n + 1) * n;
    let (u_rows, x_rows): (Vec<&Row>, Vec<&Row>) = model
        .rows
        .iter()
        .partition(|r| r.terms.iter().any(|t| t.var >= num_x));

    let row_ok = |row: &Row, values: &[f64]| {
        let lhs: f64 = row.terms.iter().map(|t| t.coeff * values[t.var]).sum();
        match row.sense {
            Sense::Le => lhs <= row.rhs + ROW_TOLERANCE,
            Sense::Ge => lhs >= row.rhs - ROW_TOLERANCE,
            Sense::Eq => (lhs - row.rhs).abs() <= ROW_TOLERANCE,
        }
    };

    let mut out = Vec::new();
    // Depot successor sets of size k, by bitmask.
    for mask in 0u32..1 << n {
        if mask.count_ones() as usize != inst.k() {
            continue;
        }
        // Each city's successor: the depot or any other city.
        let mut succ = vec![0usize; n]; // 0 = depot, 1..=n = city index + 1
        loop {
            let mut values = vec![0.0; model.vars.len()];
            for (b, &c) in cities.iter().enumerate() {
                if mask & (1 << b) != 0 {
                    values[index[x_name(depot, c).as_str()]] = 1.0;
                }
            }
            let mut valid = true;
            for (i, &sc) in succ.iter().enumerate() {
                let to = if sc == 0 { depot } else { cities[sc - 1] };
                if to == cities[i] {
                    valid = false;
                    break;
                }
                values[index[x_name(cities[i], to).as_str()]] = 1.0;
            }
            if valid && x_rows.iter().all(|r| row_ok(r, &values)) {
                // Some position vector must satisfy the ordering rows.
                let mut u = vec![1usize; n];
                'ugrid: loop {
                    for (i, &c) in cities.iter().enumerate() {
                        values[index[u_name(c).as_str()]] = u[i] as f64;
                    }
                    if u_rows.iter().all(|r| row_ok(r, &values)) {
                        out.push(decode_tours(&succ, mask, &cities));
                        break 'ugrid;
                    }
                    let mut i = 0;
                    loop {
                        if i == n {
                            break 'ugrid;
                        }
                        u[i] += 1;
                        if u[i] <= inst.m_max() {
                            break;
                        }
                        u[i] = 1;
                        i += 1;
                    }
                }
            }
            // Advance the successor odometer.
            let mut i = 0;
            loop {
                if i == n {
                    break;
                }
                succ[i] += 1;
                if succ[i] <= n {
                    break;
                }
                succ[i] = 0;
                i += 1;
            }
            if i == n {
                break;
            }
        }
    }
    out
}

fn decode_tours(succ: &[usize], mask: u32, cities: &[CityId]) -> Vec<Tour> {
    let pos: HashMap<CityId, usize> = cities.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let mut tours = Vec::new();
    for (b, &start) in cities.iter().enumerate() {
        if mask & (1 << b) == 0 {
            continue;
        }
        let mut seq = vec![start];
        let mut cur = start;
        loop {
            let nxt = succ[pos[&cur]];
            if nxt == 0 {
                break;
            }
            cur = cities[nxt - 1];
            seq.push(cur);
            assert!(seq.len() <= cities.len(), "edge assignment contains a loop");
        }
        tours.push(Tour::new(seq));
    }
    tours
}
