//! Text formats: problem files, design and vertex CSV, cycle notation and
//! JSON reports. Rationals are always written exactly as `n/d`.
//!
//! Problem file layout (`#` starts a comment, values split on whitespace or
//! commas):
//!
//! ```text
//! [points]
//! -1 -1
//! -1  1
//!  1 -1
//!  1  1
//! [regressors]
//! formula cbw
//! [maximal_weights]
//! 1/4 1/4 1/4 1/4
//! [criterion]
//! 0
//! [symmetry]
//! (1 2)(3 4)
//! ```
//!
//! `[regressors]` holds either explicit rows or `formula <family>`;
//! `[symmetry]` holds one generator per line in 1-based cycle notation.
//! Optional `[extra_points]`/`[extra_regressors]` list candidates outside the
//! support that are only used for verification.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::analysis::{weight_ranges, AchievableSizes, Projection, VodCatalog};
use crate::catalog::{CatalogModel, Family, Permutation};
use crate::design::{Design, DesignProblem};
use crate::error::{Error, Result};
use crate::linalg::{format_rational, parse_rational, Rational};
use crate::polytope::Dimensions;

fn tokens(line: &str) -> impl Iterator<Item = &str> {
    line.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
}

fn rational_at(token: &str, line: usize) -> Result<Rational> {
    parse_rational(token).map_err(|e| match e {
        Error::Parse { msg, .. } => Error::parse(line, msg),
        other => other,
    })
}

fn rational_row(line: &str, number: usize) -> Result<Vec<Rational>> {
    tokens(line).map(|t| rational_at(t, number)).collect()
}

/// Parses one generator such as `(1 2 3)(4 5)` over `n` points, 1-based.
pub fn parse_cycles(text: &str, n: usize, line: usize) -> Result<Permutation> {
    let mut cycles = Vec::new();
    let mut rest = text.trim();
    while !rest.is_empty() {
        let body = rest
            .strip_prefix('(')
            .ok_or_else(|| Error::parse(line, format!("expected '(' in {text:?}")))?;
        let close = body
            .find(')')
            .ok_or_else(|| Error::parse(line, "unclosed cycle"))?;
        let cycle = tokens(&body[..close])
            .map(|t| match t.parse::<usize>() {
                Ok(i) if (1..=n).contains(&i) => Ok(i - 1),
                _ => Err(Error::parse(
                    line,
                    format!("cycle entry {t:?} is not in 1..={n}"),
                )),
            })
            .collect::<Result<Vec<usize>>>()?;
        if !cycle.is_empty() {
            cycles.push(cycle);
        }
        rest = body[close + 1..].trim_start();
    }
    Permutation::from_cycles(n, &cycles).map_err(|e| Error::parse(line, e.to_string()))
}

/// 1-based cycle notation; the identity is `()`.
pub fn format_cycles(p: &Permutation) -> String {
    let cycles = p.cycles();
    if cycles.is_empty() {
        return "()".into();
    }
    cycles
        .iter()
        .map(|c| {
            format!(
                "({})",
                c.iter()
                    .map(|i| (i + 1).to_string())
                    .collect::<Vec<_>>()
                    .join(" ")
            )
        })
        .collect()
}

/// Contents of a problem file.
#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub points: Vec<Vec<Rational>>,
    pub regressors: Regressors,
    pub maximal_weights: Vec<Rational>,
    pub p: i64,
    pub symmetry: Vec<Permutation>,
    pub extra_points: Vec<Vec<Rational>>,
    pub extra_regressors: Option<Vec<Vec<Rational>>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Regressors {
    Formula(Family),
    Rows(Vec<Vec<Rational>>),
}

impl ProblemSpec {
    /// Builds the problem and verifies the maximal design.
    pub fn into_model(self) -> Result<CatalogModel> {
        let regs = |family: Option<Family>,
                    pts: &[Vec<Rational>],
                    rows: Option<Vec<Vec<Rational>>>| match (family, rows) {
            (_, Some(rows)) => Ok(rows),
            (Some(f), None) => pts
                .iter()
                .map(|x| f.regressor(x))
                .collect::<Result<Vec<_>>>(),
            (None, None) => Err(Error::parse(0, "extra points need regressors or a formula")),
        };
        let (family, rows) = match self.regressors {
            Regressors::Formula(f) => (Some(f), None),
            Regressors::Rows(r) => (None, Some(r)),
        };
        let regressors = regs(family, &self.points, rows)?;
        let extra_regressors = if self.extra_points.is_empty() {
            Vec::new()
        } else {
            regs(family, &self.extra_points, self.extra_regressors)?
        };
        let problem = DesignProblem::new(self.points, regressors, self.p)?
            .with_extra_candidates(self.extra_points, extra_regressors)?;
        CatalogModel::custom(problem, Design::new(self.maximal_weights)?, self.symmetry)
    }
}

pub fn parse_problem_file(text: &str) -> Result<ProblemSpec> {
    let mut section: Option<&str> = None;
    let mut points = Vec::new();
    let mut regressor_rows = Vec::new();
    let mut formula = None;
    let mut weights = Vec::new();
    let mut criterion = None;
    let mut cycle_lines: Vec<(usize, &str)> = Vec::new();
    let mut extra_points = Vec::new();
    let mut extra_regressors = Vec::new();
    let mut seen = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let number = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let name = match name.trim() {
                n @ ("points" | "regressors" | "maximal_weights" | "criterion" | "symmetry"
                | "extra_points" | "extra_regressors") => n,
                other => return Err(Error::parse(number, format!("unknown section [{other}]"))),
            };
            if seen.contains(&name) {
                return Err(Error::parse(number, format!("duplicate section [{name}]")));
            }
            seen.push(name);
            section = Some(name);
            continue;
        }
        match section {
            None => return Err(Error::parse(number, "content before the first section")),
            Some("points") => points.push(rational_row(line, number)?),
            Some("regressors") => {
                if let Some(name) = line.strip_prefix("formula") {
                    if formula.is_some() || !regressor_rows.is_empty() {
                        return Err(Error::parse(
                            number,
                            "formula must be the only regressor entry",
                        ));
                    }
                    let family: Family = name
                        .trim()
                        .parse()
                        .map_err(|e: Error| Error::parse(number, e.to_string()))?;
                    if family == Family::Custom {
                        return Err(Error::parse(number, "custom is not a formula"));
                    }
                    formula = Some(family);
                } else {
                    if formula.is_some() {
                        return Err(Error::parse(
                            number,
                            "formula must be the only regressor entry",
                        ));
                    }
                    regressor_rows.push(rational_row(line, number)?);
                }
            }
            Some("maximal_weights") => weights.extend(rational_row(line, number)?),
            Some("criterion") => {
                let t = line
                    .strip_prefix("p")
                    .map(|r| r.trim_start().trim_start_matches('=').trim())
                    .unwrap_or(line);
                if criterion.is_some() {
                    return Err(Error::parse(number, "criterion given twice"));
                }
                criterion = Some(
                    t.parse::<i64>()
                        .map_err(|_| Error::parse(number, format!("invalid exponent {t:?}")))?,
                );
            }
            Some("symmetry") => cycle_lines.push((number, line)),
            Some("extra_points") => extra_points.push(rational_row(line, number)?),
            Some("extra_regressors") => extra_regressors.push(rational_row(line, number)?),
            Some(_) => unreachable!("sections are validated above"),
        }
    }
    if points.is_empty() {
        return Err(Error::parse(0, "missing [points]"));
    }
    let regressors = match formula {
        Some(f) => Regressors::Formula(f),
        None if !regressor_rows.is_empty() => Regressors::Rows(regressor_rows),
        None => return Err(Error::parse(0, "missing [regressors]")),
    };
    if weights.is_empty() {
        return Err(Error::parse(0, "missing [maximal_weights]"));
    }
    let p = criterion.ok_or_else(|| Error::parse(0, "missing [criterion]"))?;
    let symmetry = cycle_lines
        .into_iter()
        .map(|(number, line)| parse_cycles(line, points.len(), number))
        .collect::<Result<Vec<_>>>()?;
    Ok(ProblemSpec {
        points,
        regressors,
        maximal_weights: weights,
        p,
        symmetry,
        extra_points,
        extra_regressors: (!extra_regressors.is_empty()).then_some(extra_regressors),
    })
}

fn join(row: &[Rational]) -> String {
    row.iter()
        .map(format_rational)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Writes a model as a problem file with explicit regressor rows.
pub fn write_problem_file(model: &CatalogModel) -> String {
    let prob = &model.problem;
    let mut out = String::from("[points]\n");
    for x in prob.points() {
        out += &join(x);
        out.push('\n');
    }
    out += "[regressors]\n";
    for f in prob.regressors() {
        out += &join(f);
        out.push('\n');
    }
    out += "[maximal_weights]\n";
    out += &join(model.maximal_design.weights());
    out += &format!("\n[criterion]\n{}\n", prob.p());
    if !model.generators.is_empty() {
        out += "[symmetry]\n";
        for g in &model.generators {
            out += &format_cycles(g);
            out.push('\n');
        }
    }
    if !prob.extra_points().is_empty() {
        out += "[extra_points]\n";
        for x in prob.extra_points() {
            out += &join(x);
            out.push('\n');
        }
        out += "[extra_regressors]\n";
        for f in prob.extra_regressors() {
            out += &join(f);
            out.push('\n');
        }
    }
    out
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::parse(line, e.to_string())
}

fn write_csv_rows<I: IntoIterator<Item = Vec<String>>>(rows: I) -> String {
    let mut w = csv::WriterBuilder::new()
        .flexible(true)
        .from_writer(Vec::new());
    for row in rows {
        w.write_record(&row).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8")
}

fn read_csv_rows(text: &str) -> Result<Vec<Vec<Rational>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        rows.push(
            record
                .iter()
                .map(|t| rational_at(t, line))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    Ok(rows)
}

/// A design as `k` coordinate rows and a final weight row, one column per
/// point.
pub fn write_design_csv(points: &[Vec<Rational>], weights: &[Rational]) -> String {
    let k = points.first().map_or(0, Vec::len);
    let rows = (0..k)
        .map(|c| points.iter().map(|x| format_rational(&x[c])).collect())
        .chain(std::iter::once(
            weights.iter().map(format_rational).collect(),
        ));
    write_csv_rows(rows)
}

/// Inverse of [`write_design_csv`]: returns the points and the weights.
pub fn parse_design_csv(text: &str) -> Result<(Vec<Vec<Rational>>, Vec<Rational>)> {
    let mut rows = read_csv_rows(text)?;
    let weights = rows.pop().ok_or_else(|| Error::parse(0, "empty design"))?;
    if rows.iter().any(|r| r.len() != weights.len()) {
        return Err(Error::parse(
            0,
            "coordinate and weight rows differ in length",
        ));
    }
    let points = (0..weights.len())
        .map(|j| rows.iter().map(|r| r[j].clone()).collect())
        .collect();
    Ok((points, weights))
}

/// One vertex per row.
pub fn write_vertex_csv(vertices: &[Vec<Rational>]) -> String {
    write_csv_rows(
        vertices
            .iter()
            .map(|v| v.iter().map(format_rational).collect()),
    )
}

pub fn parse_vertex_csv(text: &str) -> Result<Vec<Vec<Rational>>> {
    let rows = read_csv_rows(text)?;
    if let Some(first) = rows.first() {
        if rows.iter().any(|r| r.len() != first.len()) {
            return Err(Error::parse(0, "vertex rows differ in length"));
        }
    }
    Ok(rows)
}

fn strings(v: &[Rational]) -> Vec<String> {
    v.iter().map(format_rational).collect()
}

/// Vertex list with dimension metadata.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexListJson {
    pub d: usize,
    pub m: usize,
    pub q: usize,
    pub s: usize,
    pub t: usize,
    pub ell: usize,
    pub vertices: Vec<Vec<String>>,
}

pub fn vertex_list_json(dims: &Dimensions, vertices: &[Vec<Rational>]) -> VertexListJson {
    VertexListJson {
        d: dims.d,
        m: dims.m,
        q: dims.q,
        s: dims.s,
        t: dims.t,
        ell: vertices.len(),
        vertices: vertices.iter().map(|v| strings(v)).collect(),
    }
}

/// Parses a vertex-list JSON document back into exact vertices.
pub fn parse_vertex_json(text: &str) -> Result<(VertexListJson, Vec<Vec<Rational>>)> {
    let doc: VertexListJson =
        serde_json::from_str(text).map_err(|e| Error::parse(e.line(), e.to_string()))?;
    let vertices = doc
        .vertices
        .iter()
        .map(|v| {
            v.iter()
                .map(|t| rational_at(t, 0))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    if vertices.len() != doc.ell || vertices.iter().any(|v| v.len() != doc.d) {
        return Err(Error::parse(
            0,
            "vertex count or length disagrees with the metadata",
        ));
    }
    Ok((doc, vertices))
}

/// Full analysis report.
pub fn report_json(label: &str, catalog: &VodCatalog, sizes: Option<&AchievableSizes>) -> Value {
    let dims = catalog.polytope().dimensions();
    let b = catalog.bounds();
    let orbit_of = catalog.orbits().map(|o| &o.orbit_of);
    let vertices: Vec<Value> = catalog
        .vertices()
        .iter()
        .zip(catalog.info())
        .enumerate()
        .map(|(j, (v, info))| {
            json!({
                "weights": strings(v),
                "support": info.support,
                "N": info.size,
                "orbit": orbit_of.map(|o| o[j]),
            })
        })
        .collect();
    let orbits: Vec<Value> = catalog
        .orbits()
        .map(|p| {
            p.orbits
                .iter()
                .map(|o| json!({"representative": o.representative, "size": o.size()}))
                .collect()
        })
        .unwrap_or_default();
    let ranges: Vec<Value> = weight_ranges(catalog)
        .iter()
        .map(|(lo, hi)| json!([format_rational(lo), format_rational(hi)]))
        .collect();
    let achievable = sizes.map(|s| {
        json!({
            "gcd": s.gcd,
            "n_max": s.n_max,
            "generators": s.generators.keys().collect::<Vec<_>>(),
            "sizes": s.sizes,
        })
    });
    json!({
        "problem": label,
        "d": dims.d,
        "m": dims.m,
        "q": dims.q,
        "s": dims.s,
        "t": dims.t,
        "ell": catalog.len(),
        "bounds": {
            "sperner_upper": b.sperner_upper.to_string(),
            "subset_upper": b.subset_upper.to_string(),
            "mcmullen_upper": b.mcmullen_upper.to_string(),
            "lower_cover": b.lower_cover,
            "lower_dim": b.lower_dim,
        },
        "vertices": vertices,
        "orbits": orbits,
        "weight_ranges": ranges,
        "achievable_sizes": achievable,
    })
}

/// Projected coordinates with a multiplicity column and an extreme-point
/// flag.
pub fn projection_csv(proj: &Projection) -> String {
    let extreme = proj.hull.extreme_points();
    let header: Vec<String> = proj
        .axes
        .iter()
        .map(|a| format!("w{}", a + 1))
        .chain(["multiplicity".to_string(), "extreme".to_string()])
        .collect();
    let rows = proj.points.iter().enumerate().map(|(i, p)| {
        let mut row = strings(&p.coords);
        row.push(p.multiplicity().to_string());
        row.push(u8::from(extreme.binary_search(&i).is_ok()).to_string());
        row
    });
    write_csv_rows(std::iter::once(header).chain(rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{self, Family};
    use crate::linalg::{int, rat};

    const CBW2: &str = "\
# two-factor first-degree model
[points]
-1 -1
-1  1
 1 -1
 1  1
[regressors]
formula cbw
[maximal_weights]
1/4, 1/4, 1/4, 1/4
[criterion]
p = 0
[symmetry]
(2 3)
(1 3)(2 4)
";

    #[test]
    fn problem_file_round_trip() {
        let spec = parse_problem_file(CBW2).unwrap();
        assert_eq!(spec.regressors, Regressors::Formula(Family::Cbw));
        assert_eq!(spec.symmetry.len(), 2);
        let model = spec.into_model().unwrap();
        assert_eq!(model.problem.d(), 4);
        let text = write_problem_file(&model);
        let again = parse_problem_file(&text).unwrap().into_model().unwrap();
        assert_eq!(again.problem.regressors(), model.problem.regressors());
        assert_eq!(again.generators, model.generators);
        assert_eq!(again.maximal_design, model.maximal_design);
    }

    #[test]
    fn catalog_models_round_trip() {
        for (f, k, p) in [
            (Family::Sbw, 4, 0),
            (Family::Mem, 3, -2),
            (Family::Qwoi, 2, 0),
        ] {
            let model = catalog::build(f, k, p).unwrap();
            let again = parse_problem_file(&write_problem_file(&model))
                .unwrap()
                .into_model()
                .unwrap();
            assert_eq!(again.problem.points(), model.problem.points());
            assert_eq!(again.problem.extra_points(), model.problem.extra_points());
            assert_eq!(again.problem.p(), p);
        }
    }

    #[test]
    fn perturbed_weights_fail_verification() {
        let text = CBW2.replace("1/4, 1/4, 1/4, 1/4", "1/2, 1/6, 1/6, 1/6");
        assert!(matches!(
            parse_problem_file(&text).unwrap().into_model(),
            Err(Error::VerificationFailed(_))
        ));
    }

    #[test]
    fn parse_errors_carry_lines() {
        let bad = CBW2.replace(" 1  1\n[regressors]", " 1  x\n[regressors]");
        assert!(matches!(
            parse_problem_file(&bad),
            Err(Error::Parse { line: 6, .. })
        ));
        assert!(matches!(
            parse_problem_file("[nope]\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_problem_file("1 2\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        let dup = format!("{CBW2}[criterion]\n0\n");
        assert!(matches!(parse_problem_file(&dup), Err(Error::Parse { .. })));
        let missing = CBW2.replace("[criterion]\np = 0\n", "");
        assert!(matches!(
            parse_problem_file(&missing),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn cycles() {
        let p = parse_cycles("(1 2 3)(5,4)", 5, 1).unwrap();
        assert_eq!(p.image(), &[1, 2, 0, 4, 3]);
        assert_eq!(format_cycles(&p), "(1 2 3)(4 5)");
        assert_eq!(format_cycles(&Permutation::identity(3)), "()");
        assert_eq!(parse_cycles("()", 3, 1).unwrap(), Permutation::identity(3));
        assert!(parse_cycles("(1 4)", 3, 7).is_err());
        assert!(parse_cycles("(1 2", 3, 1).is_err());
        assert!(parse_cycles("1 2", 3, 1).is_err());
        assert!(parse_cycles("(1 1)", 3, 1).is_err());
    }

    #[test]
    fn design_csv_round_trip() {
        let points = vec![
            vec![int(-1), int(1)],
            vec![int(1), int(1)],
            vec![int(0), rat(1, 2)],
        ];
        let weights = vec![rat(1, 2), rat(1, 3), rat(1, 6)];
        let text = write_design_csv(&points, &weights);
        assert_eq!(text, "-1,1,0\n1,1,1/2\n1/2,1/3,1/6\n");
        assert_eq!(parse_design_csv(&text).unwrap(), (points, weights));
        assert!(parse_design_csv("1,2\n1/2\n").is_err());
        assert!(parse_design_csv("").is_err());
    }

    #[test]
    fn vertex_formats_round_trip() {
        let vs = vec![vec![rat(1, 4), int(0)], vec![int(0), rat(1, 4)]];
        assert_eq!(parse_vertex_csv(&write_vertex_csv(&vs)).unwrap(), vs);
        let dims = Dimensions {
            d: 2,
            m: 1,
            q: 1,
            s: 1,
            t: 1,
        };
        let text = serde_json::to_string(&vertex_list_json(&dims, &vs)).unwrap();
        let (doc, back) = parse_vertex_json(&text).unwrap();
        assert_eq!((doc.ell, back), (2, vs));
        assert!(parse_vertex_json("{").is_err());
    }
}
