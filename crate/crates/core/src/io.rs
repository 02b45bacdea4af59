//! Line-oriented text formats. Rationals are written `p/q`; `#` starts a
//! comment line and blank lines are ignored.
//!
//! Group file:
//! ```text
//! name Z/3
//! order 3
//! mul
//! 0 1 2
//! 1 2 0
//! 2 0 1
//! ```
//! Map file (`group cyclic m`, `group symmetric k` and `group file PATH`
//! may replace the inline block):
//! ```text
//! degree 3
//! group inline
//! order 2
//! mul
//! 0 1
//! 1 0
//! end group
//! perm 0 0,1,2
//! perm 1 1,0,2
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::correction::{BoundCheck, CorrectionReport, CorrectionResult, Relation};
use crate::counterexamples::{parse_word, FreeWord};
use crate::error::{Error, Result};
use crate::gamma_graph::{GammaGraph, WeightTable};
use crate::group::FiniteGroup;
use crate::map::{DefectReport, GroupMap, SymmetrizationReport};
use crate::perm::Permutation;
use crate::Rational;

pub fn format_rational(r: Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_rational(s: &str) -> std::result::Result<Rational, String> {
    let (p, q) = s.split_once('/').unwrap_or((s, "1"));
    let p: i128 = p
        .trim()
        .parse()
        .map_err(|e| format!("bad numerator in {s:?}: {e}"))?;
    let q: i128 = q
        .trim()
        .parse()
        .map_err(|e| format!("bad denominator in {s:?}: {e}"))?;
    if q == 0 {
        return Err(format!("zero denominator in {s:?}"));
    }
    Ok(Rational::new(p, q))
}

/// Non-blank, non-comment lines with 1-based line numbers.
struct Lines<'a> {
    inner: std::iter::Peekable<Box<dyn Iterator<Item = (usize, &'a str)> + 'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let it: Box<dyn Iterator<Item = (usize, &'a str)> + 'a> = Box::new(
            text.lines()
                .enumerate()
                .map(|(i, l)| (i + 1, l.trim()))
                .filter(|(_, l)| !l.is_empty() && !l.starts_with('#')),
        );
        Lines {
            inner: it.peekable(),
            last: 0,
        }
    }

    fn next(&mut self) -> Option<(usize, &'a str)> {
        let item = self.inner.next();
        if let Some((n, _)) = item {
            self.last = n;
        }
        item
    }

    fn peek(&mut self) -> Option<&(usize, &'a str)> {
        self.inner.peek()
    }

    fn expect(&mut self, what: &str) -> Result<(usize, &'a str)> {
        let last = self.last;
        self.next().ok_or_else(|| {
            Error::parse(
                last + 1,
                format!("unexpected end of input, expected {what}"),
            )
        })
    }

    /// A line `key value`, returning `value`.
    fn keyed(&mut self, key: &str) -> Result<(usize, &'a str)> {
        let (n, line) = self.expect(key)?;
        match line.split_once(char::is_whitespace) {
            Some((k, v)) if k == key => Ok((n, v.trim())),
            _ if line == key => Ok((n, "")),
            _ => Err(Error::parse(n, format!("expected `{key}`, found {line:?}"))),
        }
    }
}

fn parse_num<T: std::str::FromStr>(line: usize, s: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.parse()
        .map_err(|e| Error::parse(line, format!("bad number {s:?}: {e}")))
}

fn parse_rat(line: usize, s: &str) -> Result<Rational> {
    parse_rational(s).map_err(|m| Error::parse(line, m))
}

pub fn write_group(g: &FiniteGroup) -> String {
    let mut out = String::new();
    if let Some(name) = g.name() {
        writeln!(out, "name {name}").unwrap();
    }
    writeln!(out, "order {}", g.order()).unwrap();
    out.push_str("mul\n");
    for a in g.elements() {
        let row: Vec<String> = g.row(a).iter().map(usize::to_string).collect();
        writeln!(out, "{}", row.join(" ")).unwrap();
    }
    out
}

fn parse_group_lines(lines: &mut Lines<'_>) -> Result<FiniteGroup> {
    let mut name = None;
    if let Some((_, l)) = lines.peek() {
        if let Some(rest) = l.strip_prefix("name ") {
            name = Some(rest.trim().to_string());
            lines.next();
        }
    }
    let (n, order) = lines.keyed("order")?;
    let order: usize = parse_num(n, order)?;
    lines.keyed("mul")?;
    let mut table = Vec::with_capacity(order);
    for _ in 0..order {
        let (n, row) = lines.expect("multiplication table row")?;
        let row: Vec<usize> = row
            .split_whitespace()
            .map(|v| parse_num(n, v))
            .collect::<Result<_>>()?;
        if row.len() != order {
            return Err(Error::parse(
                n,
                format!("row has {} entries, expected {order}", row.len()),
            ));
        }
        table.push(row);
    }
    let g = FiniteGroup::from_mul_table(table)?;
    Ok(match name {
        Some(name) => g.with_name(name),
        None => g,
    })
}

pub fn parse_group(text: &str) -> Result<FiniteGroup> {
    let mut lines = Lines::new(text);
    let g = parse_group_lines(&mut lines)?;
    if let Some((n, l)) = lines.next() {
        return Err(Error::parse(n, format!("trailing content {l:?}")));
    }
    Ok(g)
}

/// Writes the map with its group inline.
pub fn write_map(f: &GroupMap) -> String {
    let mut out = String::new();
    writeln!(out, "degree {}", f.degree()).unwrap();
    out.push_str("group inline\n");
    out.push_str(&write_group(f.group()));
    out.push_str("end group\n");
    for (g, p) in f.table().iter().enumerate() {
        writeln!(out, "perm {g} {p}").unwrap();
    }
    out
}

/// Parses a map file; `group file PATH` is resolved against `base`.
pub fn parse_map(text: &str, base: Option<&Path>) -> Result<GroupMap> {
    let mut lines = Lines::new(text);
    let (n, degree) = lines.keyed("degree")?;
    let degree: usize = parse_num(n, degree)?;
    let (n, spec) = lines.keyed("group")?;
    let words: Vec<&str> = spec.split_whitespace().collect();
    let group = match words.as_slice() {
        ["inline"] => {
            let g = parse_group_lines(&mut lines)?;
            let (n, end) = lines.expect("end group")?;
            if end != "end group" {
                return Err(Error::parse(
                    n,
                    format!("expected `end group`, found {end:?}"),
                ));
            }
            g
        }
        ["cyclic", m] => FiniteGroup::cyclic(parse_num(n, m)?),
        ["symmetric", k] => FiniteGroup::symmetric(parse_num(n, k)?),
        ["file", path] => {
            let mut p = PathBuf::from(path);
            if p.is_relative() {
                if let Some(b) = base {
                    p = b.join(p);
                }
            }
            parse_group(&std::fs::read_to_string(&p)?)?
        }
        _ => return Err(Error::parse(n, format!("unknown group source {spec:?}"))),
    };
    let group = Arc::new(group);
    let mut table: Vec<Option<Permutation>> = vec![None; group.order()];
    while let Some((n, line)) = lines.next() {
        let mut parts = line.split_whitespace();
        let (Some("perm"), Some(idx), Some(img), None) =
            (parts.next(), parts.next(), parts.next(), parts.next())
        else {
            return Err(Error::parse(
                n,
                format!("expected `perm INDEX IMAGES`, found {line:?}"),
            ));
        };
        let idx: usize = parse_num(n, idx)?;
        if idx >= group.order() {
            return Err(Error::parse(
                n,
                format!("element {idx} outside a group of order {}", group.order()),
            ));
        }
        let p: Permutation = img
            .parse()
            .map_err(|e: Error| Error::parse(n, e.to_string()))?;
        if p.degree() != degree {
            return Err(Error::parse(
                n,
                format!("permutation of degree {}, expected {degree}", p.degree()),
            ));
        }
        if table[idx].replace(p).is_some() {
            return Err(Error::parse(n, format!("element {idx} given twice")));
        }
    }
    let table = table
        .into_iter()
        .enumerate()
        .map(|(g, p)| {
            p.ok_or_else(|| Error::parse(lines.last, format!("missing image of element {g}")))
        })
        .collect::<Result<Vec<_>>>()?;
    GroupMap::new(group, table)
}

pub fn read_map(path: &Path) -> Result<GroupMap> {
    parse_map(&std::fs::read_to_string(path)?, path.parent())
}

pub fn read_group(path: &Path) -> Result<FiniteGroup> {
    parse_group(&std::fs::read_to_string(path)?)
}

pub fn write_defects(d: &DefectReport) -> String {
    format!(
        "defect_inf {}\ndefect_mean {}\nargmax {} {}\n",
        format_rational(d.defect_inf),
        format_rational(d.defect_mean),
        d.argmax.0,
        d.argmax.1
    )
}

pub fn parse_defects(text: &str) -> Result<DefectReport> {
    let mut lines = Lines::new(text);
    let (n, v) = lines.keyed("defect_inf")?;
    let defect_inf = parse_rat(n, v)?;
    let (n, v) = lines.keyed("defect_mean")?;
    let defect_mean = parse_rat(n, v)?;
    let (n, v) = lines.keyed("argmax")?;
    let mut it = v.split_whitespace();
    let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
        return Err(Error::parse(n, "argmax needs two indices"));
    };
    Ok(DefectReport {
        defect_inf,
        defect_mean,
        argmax: (parse_num(n, a)?, parse_num(n, b)?),
    })
}

fn relation_word(r: Relation) -> &'static str {
    match r {
        Relation::AtMost => "at_most",
        Relation::AtLeast => "at_least",
        Relation::Equal => "equal",
    }
}

pub fn write_report(r: &CorrectionReport) -> String {
    let mut out = String::new();
    let mut kv = |k: &str, v: String| writeln!(out, "{k} {v}").unwrap();
    kv("n", r.n.to_string());
    kv("big_n", r.big_n.to_string());
    kv("delta_inf", format_rational(r.delta_inf));
    kv("delta_mean", format_rational(r.delta_mean));
    kv(
        "symmetric_delta_inf",
        format_rational(r.symmetric_delta_inf),
    );
    kv(
        "symmetric_delta_mean",
        format_rational(r.symmetric_delta_mean),
    );
    if let Some(q) = r.delta_quotient {
        kv("delta_quotient", format_rational(q));
    }
    if let Some(s) = &r.symmetrization {
        kv("sym.defect_inf", format_rational(s.defect_inf));
        kv("sym.defect_mean", format_rational(s.defect_mean));
        kv("sym.dist_inf", format_rational(s.dist_inf));
        kv("sym.dist_mean", format_rational(s.dist_mean));
        kv("sym.new_defect_inf", format_rational(s.new_defect_inf));
        kv("sym.new_defect_mean", format_rational(s.new_defect_mean));
    }
    kv("z_vertices", r.z_vertices.to_string());
    kv("v1", r.v1.to_string());
    kv("components", r.components.to_string());
    kv("dist_inf", format_rational(r.dist_inf));
    kv("dist_mean", format_rational(r.dist_mean));
    kv("used_trivial_fallback", r.used_trivial_fallback.to_string());
    for c in &r.checks {
        writeln!(
            out,
            "check {} {} {} slack={} {}",
            relation_word(c.relation),
            format_rational(c.measured),
            format_rational(c.bound),
            format_rational(c.slack()),
            c.label
        )
        .unwrap();
    }
    out
}

pub fn parse_report(text: &str) -> Result<CorrectionReport> {
    let mut r = CorrectionReport::default();
    let mut sym = [None; 6];
    for (n, line) in Lines::new(text).inner {
        let (key, value) = line
            .split_once(' ')
            .ok_or_else(|| Error::parse(n, format!("expected `key value`, found {line:?}")))?;
        let value = value.trim();
        let sym_slot = |k: &str| {
            [
                "defect_inf",
                "defect_mean",
                "dist_inf",
                "dist_mean",
                "new_defect_inf",
                "new_defect_mean",
            ]
            .iter()
            .position(|s| *s == k)
        };
        match key {
            "n" => r.n = parse_num(n, value)?,
            "big_n" => r.big_n = parse_num(n, value)?,
            "delta_inf" => r.delta_inf = parse_rat(n, value)?,
            "delta_mean" => r.delta_mean = parse_rat(n, value)?,
            "symmetric_delta_inf" => r.symmetric_delta_inf = parse_rat(n, value)?,
            "symmetric_delta_mean" => r.symmetric_delta_mean = parse_rat(n, value)?,
            "delta_quotient" => r.delta_quotient = Some(parse_rat(n, value)?),
            "z_vertices" => r.z_vertices = parse_num(n, value)?,
            "v1" => r.v1 = parse_num(n, value)?,
            "components" => r.components = parse_num(n, value)?,
            "dist_inf" => r.dist_inf = parse_rat(n, value)?,
            "dist_mean" => r.dist_mean = parse_rat(n, value)?,
            "used_trivial_fallback" => r.used_trivial_fallback = parse_num(n, value)?,
            "check" => {
                let mut parts = value.splitn(5, ' ');
                let (Some(rel), Some(m), Some(b), Some(_slack), Some(label)) = (
                    parts.next(),
                    parts.next(),
                    parts.next(),
                    parts.next(),
                    parts.next(),
                ) else {
                    return Err(Error::parse(n, "malformed check line"));
                };
                let relation = match rel {
                    "at_most" => Relation::AtMost,
                    "at_least" => Relation::AtLeast,
                    "equal" => Relation::Equal,
                    other => return Err(Error::parse(n, format!("unknown relation {other:?}"))),
                };
                r.checks.push(BoundCheck {
                    label: label.to_string(),
                    measured: parse_rat(n, m)?,
                    relation,
                    bound: parse_rat(n, b)?,
                });
            }
            k => match k.strip_prefix("sym.").and_then(sym_slot) {
                Some(i) => sym[i] = Some(parse_rat(n, value)?),
                None => return Err(Error::parse(n, format!("unknown key {key:?}"))),
            },
        }
    }
    if sym.iter().any(Option::is_some) {
        let [Some(a), Some(b), Some(c), Some(d), Some(e), Some(f)] = sym else {
            return Err(Error::parse(0, "incomplete symmetrization block"));
        };
        r.symmetrization = Some(SymmetrizationReport {
            defect_inf: a,
            defect_mean: b,
            dist_inf: c,
            dist_mean: d,
            new_defect_inf: e,
            new_defect_mean: f,
        });
    }
    Ok(r)
}

/// One line: `embedding` followed by an image or `-` for each point of `[n]`.
pub fn write_embedding(e: &[Option<usize>]) -> String {
    let mut out = String::from("embedding");
    for x in e {
        match x {
            Some(y) => write!(out, " {y}").unwrap(),
            None => out.push_str(" -"),
        }
    }
    out.push('\n');
    out
}

pub fn parse_embedding(text: &str) -> Result<Vec<Option<usize>>> {
    let mut lines = Lines::new(text);
    let (n, v) = lines.keyed("embedding")?;
    v.split_whitespace()
        .map(|t| {
            if t == "-" {
                Ok(None)
            } else {
                parse_num(n, t).map(Some)
            }
        })
        .collect()
}

pub const REPORT_FILE: &str = "report.txt";
pub const MAP_FILE: &str = "h.map";
pub const EMBEDDING_FILE: &str = "embedding.txt";

/// Writes `report.txt`, `h.map` and `embedding.txt` into `dir`.
pub fn save_correction(dir: &Path, result: &CorrectionResult) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(REPORT_FILE), write_report(&result.report))?;
    std::fs::write(dir.join(MAP_FILE), write_map(&result.h))?;
    std::fs::write(dir.join(EMBEDDING_FILE), write_embedding(&result.embedding))?;
    Ok(())
}

pub fn load_correction(dir: &Path) -> Result<CorrectionResult> {
    Ok(CorrectionResult {
        h: read_map(&dir.join(MAP_FILE))?,
        embedding: parse_embedding(&std::fs::read_to_string(dir.join(EMBEDDING_FILE))?)?,
        report: parse_report(&std::fs::read_to_string(dir.join(REPORT_FILE))?)?,
    })
}

/// `ambient n`, `vertices ...`, then `edge x g y` lines and, when given,
/// `weight x g p/q` for every function-graph edge.
pub fn write_graph(graph: &GammaGraph, weights: Option<&WeightTable>) -> String {
    let mut out = String::new();
    writeln!(out, "ambient {}", graph.ambient()).unwrap();
    let vs: Vec<String> = graph.vertices().map(|v| v.to_string()).collect();
    writeln!(out, "vertices {}", vs.join(" ")).unwrap();
    for (x, g, y) in graph.edges() {
        writeln!(out, "edge {x} {g} {y}").unwrap();
    }
    if let Some(w) = weights {
        for x in 0..w.degree() {
            for g in 0..w.group_order() {
                writeln!(out, "weight {x} {g} {}", format_rational(w.weight(x, g))).unwrap();
            }
        }
    }
    out
}

/// A `weight x g p/q` line from a graph dump.
pub type WeightLine = (usize, usize, Rational);

/// Parses a graph dump over `group`, returning the graph and any weight lines.
pub fn parse_graph(text: &str, group: Arc<FiniteGroup>) -> Result<(GammaGraph, Vec<WeightLine>)> {
    let mut lines = Lines::new(text);
    let (n, v) = lines.keyed("ambient")?;
    let ambient: usize = parse_num(n, v)?;
    let (n, v) = lines.keyed("vertices")?;
    let mut vertex = vec![false; ambient];
    for t in v.split_whitespace() {
        let x: usize = parse_num(n, t)?;
        *vertex
            .get_mut(x)
            .ok_or_else(|| Error::parse(n, format!("vertex {x} outside [{ambient}]")))? = true;
    }
    let order = group.order();
    let mut graph = GammaGraph::empty(group, ambient, vertex);
    let mut weights = Vec::new();
    while let Some((n, line)) = lines.next() {
        let parts: Vec<&str> = line.split_whitespace().collect();
        match parts.as_slice() {
            ["edge", x, g, y] => {
                let (x, g, y): (usize, usize, usize) =
                    (parse_num(n, x)?, parse_num(n, g)?, parse_num(n, y)?);
                if g >= order {
                    return Err(Error::parse(n, format!("label {g} outside the group")));
                }
                graph
                    .add_edge(x, g, y)
                    .map_err(|e| Error::parse(n, e.to_string()))?;
            }
            ["weight", x, g, w] => {
                weights.push((parse_num(n, x)?, parse_num(n, g)?, parse_rat(n, w)?))
            }
            _ => return Err(Error::parse(n, format!("unrecognized line {line:?}"))),
        }
    }
    Ok((graph, weights))
}

/// One reduced word per line.
pub fn parse_word_list(text: &str) -> Result<Vec<FreeWord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim_start().starts_with('#'))
        .map(|(i, l)| parse_word(l).map_err(|e| Error::parse(i + 1, e.to_string())))
        .collect()
}

pub fn write_word_list(words: &[FreeWord]) -> String {
    words.iter().map(|w| format!("{w}\n")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correction::correct;
    use crate::gamma_graph::{build_cascade, default_eps, function_graph, weight_table};
    use crate::map::{defects, symmetrize};
    use crate::ratio;

    fn sample_map() -> GroupMap {
        let f = GroupMap::regular(Arc::new(FiniteGroup::cyclic(5)));
        f.with_image(2, "1,0,3,4,2".parse().unwrap()).unwrap()
    }

    #[test]
    fn rationals() {
        assert_eq!(format_rational(ratio(2, 4)), "1/2");
        assert_eq!(format_rational(ratio(3, 1)), "3/1");
        assert_eq!(parse_rational("3").unwrap(), ratio(3, 1));
        assert_eq!(parse_rational("-6/4").unwrap(), ratio(-3, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn group_round_trip() {
        let g = FiniteGroup::symmetric(3);
        let text = write_group(&g);
        let back = parse_group(&text).unwrap();
        assert_eq!(back, g);
        assert_eq!(back.name(), Some("S3"));
        assert_eq!(write_group(&back), text);
    }

    #[test]
    fn group_errors() {
        assert!(matches!(
            parse_group("order 2\nmul\n0 1\n"),
            Err(Error::Parse { line: 4, .. })
        ));
        assert!(matches!(
            parse_group("order 2\nmul\n0 1\n1\n"),
            Err(Error::Parse { line: 4, .. })
        ));
        assert!(parse_group("order 2\nmul\n0 1\n1 1\n").is_err());
    }

    #[test]
    fn map_round_trip() {
        let f = sample_map();
        let text = write_map(&f);
        let back = parse_map(&text, None).unwrap();
        assert_eq!(back, f);
        assert_eq!(write_map(&back), text);
        let short = "# shift\ndegree 2\ngroup cyclic 2\nperm 0 0,1\nperm 1 1,0\n";
        assert_eq!(
            parse_map(short, None).unwrap(),
            GroupMap::regular(Arc::new(FiniteGroup::cyclic(2)))
        );
    }

    #[test]
    fn map_errors() {
        assert!(matches!(
            parse_map("degree 2\ngroup cyclic 2\nperm 0 0,1\n", None),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse_map("degree 2\ngroup cyclic 2\nperm 0 0,1\nperm 1 0,1,2\n", None),
            Err(Error::Parse { line: 4, .. })
        ));
        assert!(matches!(
            parse_map("degree 2\ngroup cyclic 2\nperm 0 0,1\nperm 0 0,1\n", None),
            Err(Error::Parse { line: 4, .. })
        ));
        assert!(parse_map("degree 2\ngroup weird\n", None).is_err());
    }

    #[test]
    fn group_file_reference() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(
            dir.path().join("z2.group"),
            write_group(&FiniteGroup::cyclic(2)),
        )
        .unwrap();
        let path = dir.path().join("f.map");
        std::fs::write(&path, "degree 1\ngroup file z2.group\nperm 0 0\nperm 1 0\n").unwrap();
        assert_eq!(read_map(&path).unwrap().degree(), 1);
    }

    #[test]
    fn defects_round_trip() {
        let d = defects(&sample_map());
        assert_eq!(parse_defects(&write_defects(&d)).unwrap(), d);
    }

    #[test]
    fn correction_round_trip() {
        let r = correct(&sample_map()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        save_correction(dir.path(), &r).unwrap();
        let back = load_correction(dir.path()).unwrap();
        assert_eq!(back.h, r.h);
        assert_eq!(back.embedding, r.embedding);
        assert_eq!(back.report, r.report);
        assert_eq!(write_report(&back.report), write_report(&r.report));
    }

    #[test]
    fn graph_round_trip() {
        let f = symmetrize(&sample_map()).unwrap();
        let w = weight_table(&f);
        let c = build_cascade(&f, default_eps()).unwrap();
        for g in [function_graph(&f), c.y.clone(), c.z.clone()] {
            let text = write_graph(&g, Some(&w));
            let (back, weights) = parse_graph(&text, Arc::clone(f.group())).unwrap();
            assert_eq!(back, g);
            assert_eq!(weights.len(), 25);
            assert!(weights.iter().all(|&(x, gg, q)| q == w.weight(x, gg)));
        }
    }

    #[test]
    fn word_list_round_trip() {
        let words = parse_word_list("x1^3 x2\n\nx2^-1 x1^N!-4\n").unwrap();
        assert_eq!(words.len(), 3);
        assert!(words[1].is_identity());
        assert_eq!(parse_word_list(&write_word_list(&words)).unwrap(), words);
    }
}
