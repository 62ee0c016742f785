//! File formats: TSPLIB-style instance files with tour-count and size-bound
//! extension keys, solution files, and the benchmark-derivation recipe that
//! turns a plain TSP into a bounded multi-tour instance.

use std::fmt::Write as _;

use crate::model::{validate, City, CityId, Instance, ModelError, Solution, Tour};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{msg}")]
    Header { msg: String },
    #[error("{field} not present in file and no override supplied")]
    MissingBound { field: &'static str },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("refusing to write invalid solution: {report}")]
    InvalidSolution {
        report: crate::model::ValidationReport,
    },
}

fn perr(line: usize, msg: impl Into<String>) -> IoError {
    IoError::Parse {
        line,
        msg: msg.into(),
    }
}

/// Raw contents of an instance file. Bound keys are optional here; they are
/// enforced when converting into an [`Instance`].
#[derive(Debug, Clone, Default)]
pub struct BmtspFile {
    pub name: String,
    pub comments: Vec<String>,
    pub dimension: usize,
    pub cities: Vec<City>,
    pub salesmen: Option<usize>,
    pub min_cities: Option<usize>,
    pub max_cities: Option<usize>,
}

/// Command-line style replacements for bound keys missing from a file.
#[derive(Debug, Clone, Copy, Default)]
pub struct BoundOverrides {
    pub salesmen: Option<usize>,
    pub min_cities: Option<usize>,
    pub max_cities: Option<usize>,
}

/// Parses a TSPLIB EUC_2D file, including the SALESMEN / MIN_CITIES /
/// MAX_CITIES extension keys. Unknown header keys are skipped so vanilla
/// TSPLIB files load unchanged.
pub fn parse_bmtsp(text: &str) -> Result<BmtspFile, IoError> {
    let mut file = BmtspFile::default();
    let mut name = None;
    let mut dimension = None;
    let mut weight_type: Option<(String, usize)> = None;
    let mut in_coords = false;
    let mut after_eof = false;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if after_eof {
            return Err(perr(lineno, "content after EOF"));
        }
        if line == "EOF" {
            after_eof = true;
            continue;
        }
        if !in_coords {
            if line == "NODE_COORD_SECTION" {
                in_coords = true;
                continue;
            }
            let Some((key, value)) = line.split_once(':') else {
                return Err(perr(
                    lineno,
                    format!("expected 'KEY: value' or a section marker, got '{line}'"),
                ));
            };
            let key = key.trim();
            let value = value.trim();
            match key {
                "NAME" => name = Some(value.to_string()),
                "COMMENT" => file.comments.push(value.to_string()),
                "DIMENSION" => {
                    dimension = Some(value.parse::<usize>().map_err(|_| {
                        perr(lineno, format!("invalid DIMENSION '{value}'"))
                    })?);
                }
                "EDGE_WEIGHT_TYPE" => weight_type = Some((value.to_string(), lineno)),
                "SALESMEN" => file.salesmen = Some(parse_count(value, lineno, "SALESMEN")?),
                "MIN_CITIES" => file.min_cities = Some(parse_count(value, lineno, "MIN_CITIES")?),
                "MAX_CITIES" => file.max_cities = Some(parse_count(value, lineno, "MAX_CITIES")?),
                _ => {}
            }
        } else {
            let mut parts = line.split_whitespace();
            let (Some(id), Some(x), Some(y), None) =
                (parts.next(), parts.next(), parts.next(), parts.next())
            else {
                return Err(perr(
                    lineno,
                    format!("expected 'id x y' coordinate triple, got '{line}'"),
                ));
            };
            let id: u32 = id
                .parse()
                .map_err(|_| perr(lineno, format!("invalid city id '{id}'")))?;
            let x: f64 = x
                .parse()
                .map_err(|_| perr(lineno, format!("invalid x coordinate '{x}'")))?;
            let y: f64 = y
                .parse()
                .map_err(|_| perr(lineno, format!("invalid y coordinate '{y}'")))?;
            file.cities.push(City {
                id: CityId(id),
                x,
                y,
            });
        }
    }

    file.name = name.ok_or_else(|| IoError::Header {
        msg: "missing NAME key".into(),
    })?;
    file.dimension = dimension.ok_or_else(|| IoError::Header {
        msg: "missing DIMENSION key".into(),
    })?;
    match weight_type {
        Some((ref t, _)) if t == "EUC_2D" => {}
        Some((t, line)) => {
            return Err(perr(
                line,
                format!("unsupported EDGE_WEIGHT_TYPE '{t}', only EUC_2D is handled"),
            ))
        }
        None => {
            return Err(IoError::Header {
                msg: "missing EDGE_WEIGHT_TYPE key".into(),
            })
        }
    }
    if !in_coords {
        return Err(IoError::Header {
            msg: "missing NODE_COORD_SECTION".into(),
        });
    }
    if file.cities.len() != file.dimension {
        return Err(IoError::Header {
            msg: format!(
                "DIMENSION is {} but NODE_COORD_SECTION holds {} entries",
                file.dimension,
                file.cities.len()
            ),
        });
    }
    Ok(file)
}

fn parse_count(value: &str, line: usize, key: &str) -> Result<usize, IoError> {
    value
        .parse::<usize>()
        .map_err(|_| perr(line, format!("invalid {key} '{value}'")))
}

impl BmtspFile {
    /// Converts to a validated instance. Bounds must come from the file or
    /// from `overrides`; overrides win when both are present.
    pub fn into_instance(&self, overrides: &BoundOverrides) -> Result<Instance, IoError> {
        let k = overrides
            .salesmen
            .or(self.salesmen)
            .ok_or(IoError::MissingBound { field: "SALESMEN" })?;
        let m_min = overrides.min_cities.or(self.min_cities).ok_or(IoError::MissingBound {
            field: "MIN_CITIES",
        })?;
        let m_max = overrides.max_cities.or(self.max_cities).ok_or(IoError::MissingBound {
            field: "MAX_CITIES",
        })?;
        Ok(Instance::new(
            self.name.clone(),
            self.cities.clone(),
            k,
            m_min,
            m_max,
        )?)
    }
}

/// Parses a complete instance; all three bound keys must be in the file.
pub fn parse_instance(text: &str) -> Result<Instance, IoError> {
    parse_instance_with(text, &BoundOverrides::default())
}

/// Parses an instance, filling missing bound keys from `overrides`.
pub fn parse_instance_with(text: &str, overrides: &BoundOverrides) -> Result<Instance, IoError> {
    parse_bmtsp(text)?.into_instance(overrides)
}

/// Renders an instance in the canonical key order. Writing, re-parsing and
/// writing again is byte-identical.
pub fn write_instance(inst: &Instance, comments: &[String]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "NAME: {}", inst.name());
    for c in comments {
        let _ = writeln!(out, "COMMENT: {c}");
    }
    out.push_str("TYPE: TSP\n");
    let _ = writeln!(out, "DIMENSION: {}", inst.cities().len());
    out.push_str("EDGE_WEIGHT_TYPE: EUC_2D\n");
    let _ = writeln!(out, "SALESMEN: {}", inst.k());
    let _ = writeln!(out, "MIN_CITIES: {}", inst.m_min());
    let _ = writeln!(out, "MAX_CITIES: {}", inst.m_max());
    out.push_str("NODE_COORD_SECTION\n");
    for c in inst.cities() {
        let _ = writeln!(out, "{} {} {}", c.id, c.x, c.y);
    }
    out.push_str("EOF\n");
    out
}

/// Derives a bounded multi-tour instance from a plain TSP following the
/// benchmark recipe: `m_min = ceil(0.6 * m_max)`, `k = ceil(1.3 * n / m_max)`
/// and the result named `<tsp>_<k>`.
///
/// `n` is the non-depot city count by default. Some instance families have
/// historically been derived counting the depot as well;
/// `count_includes_depot` reproduces that convention. Infeasible
/// combinations are reported, never clamped.
pub fn generate_instance(
    src: &BmtspFile,
    m_max: usize,
    count_includes_depot: bool,
) -> Result<Instance, IoError> {
    let n = if count_includes_depot {
        src.dimension
    } else {
        src.dimension.saturating_sub(1)
    };
    // ceil(3*m_max/5) and ceil(13*n/(10*m_max)) in integer arithmetic.
    let m_min = (3 * m_max).div_ceil(5);
    let k = (13 * n).div_ceil(10 * m_max);
    let name = format!("{}_{}", src.name, k);
    Ok(Instance::new(name, src.cities.clone(), k, m_min, m_max)?)
}

/// Solution file contents: everything needed to reproduce the exact bytes.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionFile {
    pub name: String,
    pub salesmen: usize,
    pub seed: Option<u64>,
    pub total_cost: f64,
    pub tours: Vec<(Vec<CityId>, f64)>,
}

/// Renders a solution for an instance. The solution is validated first and
/// refused with the full report if anything is wrong. Costs carry a
/// 2-decimal display value plus the exact value in a trailing comment.
pub fn write_solution(s: &Solution, inst: &Instance, seed: Option<u64>) -> Result<String, IoError> {
    let report = validate(s, inst);
    if !report.is_clean() {
        return Err(IoError::InvalidSolution { report });
    }
    let file = SolutionFile {
        name: inst.name().to_string(),
        salesmen: inst.k(),
        seed,
        total_cost: s.total_cost,
        tours: s
            .tours
            .iter()
            .zip(s.cached_tour_costs())
            .map(|(t, &c)| (t.cities.clone(), c))
            .collect(),
    };
    Ok(file.render(inst.depot()))
}

impl SolutionFile {
    pub fn render(&self, depot: CityId) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "NAME: {}", self.name);
        let _ = writeln!(out, "SALESMEN: {}", self.salesmen);
        if let Some(seed) = self.seed {
            let _ = writeln!(out, "SEED: {seed}");
        }
        let _ = writeln!(
            out,
            "TOTAL_COST: {:.2} # {}",
            self.total_cost, self.total_cost
        );
        for (i, (cities, cost)) in self.tours.iter().enumerate() {
            let _ = write!(out, "TOUR {}: {}", i + 1, depot);
            for c in cities {
                let _ = write!(out, " {c}");
            }
            let _ = writeln!(out, " {} COST: {:.2} # {}", depot, cost, cost);
        }
        out.push_str("EOF\n");
        out
    }

    /// Rebuilds a [`Solution`] carrying the file's cost claims as caches, so
    /// a later [`validate`] can cross-check them against the instance.
    pub fn into_solution(&self) -> Solution {
        let tours: Vec<Tour> = self
            .tours
            .iter()
            .map(|(cities, _)| Tour::new(cities.clone()))
            .collect();
        let costs: Vec<f64> = self.tours.iter().map(|&(_, c)| c).collect();
        Solution::with_cached_costs(tours, costs, self.total_cost)
    }
}

/// Parses a solution file produced by [`write_solution`].
pub fn parse_solution(text: &str) -> Result<SolutionFile, IoError> {
    let mut name = None;
    let mut salesmen = None;
    let mut seed = None;
    let mut total = None;
    let mut tours: Vec<(Vec<CityId>, f64)> = Vec::new();
    let mut after_eof = false;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if after_eof {
            return Err(perr(lineno, "content after EOF"));
        }
        if line == "EOF" {
            after_eof = true;
            continue;
        }
        let Some((key, value)) = line.split_once(':') else {
            return Err(perr(lineno, format!("expected 'KEY: value', got '{line}'")));
        };
        let key = key.trim();
        let value = value.trim();
        match key {
            "NAME" => name = Some(value.to_string()),
            "SALESMEN" => salesmen = Some(parse_count(value, lineno, "SALESMEN")?),
            "SEED" => {
                seed = Some(value.parse::<u64>().map_err(|_| {
                    perr(lineno, format!("invalid SEED '{value}'"))
                })?);
            }
            "TOTAL_COST" => total = Some(parse_cost_field(value, lineno)?),
            _ if key.starts_with("TOUR ") => {
                let index: usize = key[5..]
                    .trim()
                    .parse()
                    .map_err(|_| perr(lineno, format!("invalid tour index in '{key}'")))?;
                if index != tours.len() + 1 {
                    return Err(perr(
                        lineno,
                        format!("tour index {index} out of order, expected {}", tours.len() + 1),
                    ));
                }
                tours.push(parse_tour_line(value, lineno)?);
            }
            _ => return Err(perr(lineno, format!("unknown key '{key}'"))),
        }
    }

    Ok(SolutionFile {
        name: name.ok_or_else(|| IoError::Header {
            msg: "missing NAME key".into(),
        })?,
        salesmen: salesmen.ok_or_else(|| IoError::Header {
            msg: "missing SALESMEN key".into(),
        })?,
        seed,
        total_cost: total.ok_or_else(|| IoError::Header {
            msg: "missing TOTAL_COST key".into(),
        })?,
        tours,
    })
}

/// Parses `<2dp> # <full>`; the full-precision comment value is the one kept.
fn parse_cost_field(value: &str, lineno: usize) -> Result<f64, IoError> {
    let Some((_, full)) = value.split_once('#') else {
        return Err(perr(
            lineno,
            format!("expected '<cost> # <exact cost>', got '{value}'"),
        ));
    };
    full.trim()
        .parse::<f64>()
        .map_err(|_| perr(lineno, format!("invalid cost value '{}'", full.trim())))
}

fn parse_tour_line(value: &str, lineno: usize) -> Result<(Vec<CityId>, f64), IoError> {
    let Some((ids_part, cost_part)) = value.split_once("COST:") else {
        return Err(perr(lineno, "tour line is missing its COST field"));
    };
    let cost = parse_cost_field(cost_part.trim(), lineno)?;
    let ids: Vec<u32> = ids_part
        .split_whitespace()
        .map(|t| {
            t.parse::<u32>()
                .map_err(|_| perr(lineno, format!("invalid city id '{t}'")))
        })
        .collect::<Result<_, _>>()?;
    if ids.len() < 2 || ids[0] != ids[ids.len() - 1] {
        return Err(perr(
            lineno,
            "tour must start and end with the same depot id",
        ));
    }
    let inner = ids[1..ids.len() - 1].iter().map(|&i| CityId(i)).collect();
    Ok((inner, cost))
}
