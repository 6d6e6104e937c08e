//! Fan specification files and the command-line surface.
//!
//! A specification is line oriented:
//!
//! ```text
//! # C^3 with an outer brane at framing 1
//! lattice_rank = 3
//! rays = [[1,0,1],[0,1,1],[0,0,1]]
//! extra = []
//! cones = [[1,2,3]]
//!
//! [brane]
//! tau0 = [2,3]
//! framing = 1
//!
//! [overrides]
//! bound = 4
//! ```
//!
//! Indices are 1-based. `[overrides]` may also carry `H_basis` (rows over
//! the vectors of the 3-orbifold) and `grading` (a divisor used to bound
//! curve classes).

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::path::Path;

use clap::{Parser, Subcommand, ValueEnum};
use itertools::Itertools;

use crate::arith::{fmt_q, qi, Q};
use crate::bmodel::{i_function_z2_pairing, mirror_maps, verify_ipairing, verify_mirror_map_corr, w_disk};
use crate::correspondence::{
    closed_key, closed_table, compare_tables, disk_grading, disk_keys_graded, disk_table, verify_gencorr,
    verify_jpairing,
};
use crate::eqalg::tangent_weight;
use crate::error::{Error, Result};
use crate::occonstruct::{
    analyze_brane, calabi_yau_defect, construct_dual, second_cohomology_bases, BraneData, CohomologyBases,
    DualGeometry,
};
use crate::seriesengine::Report;
use crate::stackyfan::{Cone, ExtendedStackyFan, ValidateOptions};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Value {
    Int(i64),
    List(Vec<Value>),
}

struct ValueParser<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
}

impl ValueParser<'_> {
    fn skip_ws(&mut self) {
        while self.chars.next_if(|(_, c)| c.is_whitespace()).is_some() {}
    }

    fn value(&mut self) -> std::result::Result<Value, String> {
        self.skip_ws();
        match self.chars.peek().map(|(_, c)| *c) {
            Some('[') => {
                self.chars.next();
                let mut items = vec![];
                self.skip_ws();
                if self.chars.next_if(|(_, c)| *c == ']').is_some() {
                    return Ok(Value::List(items));
                }
                loop {
                    items.push(self.value()?);
                    self.skip_ws();
                    match self.chars.next() {
                        Some((_, ',')) => continue,
                        Some((_, ']')) => return Ok(Value::List(items)),
                        Some((i, c)) => return Err(format!("unexpected '{c}' at column {}", i + 1)),
                        None => return Err("unterminated list".into()),
                    }
                }
            }
            Some(_) => {
                let mut s = String::new();
                while let Some((_, c)) = self.chars.next_if(|(_, c)| *c == '-' || *c == '+' || c.is_ascii_digit()) {
                    s.push(c);
                }
                s.parse::<i64>().map(Value::Int).map_err(|_| format!("expected an integer, found '{s}'"))
            }
            None => Err("missing value".into()),
        }
    }
}

fn parse_value(text: &str) -> std::result::Result<Value, String> {
    let mut p = ValueParser { chars: text.char_indices().peekable() };
    let v = p.value()?;
    p.skip_ws();
    match p.chars.next() {
        None => Ok(v),
        Some((i, c)) => Err(format!("trailing '{c}' at column {}", i + 1)),
    }
}

fn as_int(v: &Value) -> std::result::Result<i64, String> {
    match v {
        Value::Int(x) => Ok(*x),
        Value::List(_) => Err("expected an integer".into()),
    }
}

fn as_vec(v: &Value) -> std::result::Result<Vec<i64>, String> {
    match v {
        Value::List(xs) => xs.iter().map(as_int).collect(),
        Value::Int(_) => Err("expected a list of integers".into()),
    }
}

fn as_rows(v: &Value) -> std::result::Result<Vec<Vec<i64>>, String> {
    match v {
        Value::List(xs) => xs.iter().map(as_vec).collect(),
        Value::Int(_) => Err("expected a list of integer lists".into()),
    }
}

/// Parsed contents of a fan specification file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FanSpec {
    pub lattice_rank: usize,
    pub rays: Vec<Vec<i64>>,
    pub extra: Vec<Vec<i64>>,
    /// 0-based.
    pub cones: Vec<Vec<usize>>,
    /// 0-based.
    pub tau0: (usize, usize),
    pub framing: i64,
    pub h_basis: Option<Vec<Vec<i64>>>,
    pub grading: Option<Vec<i64>>,
    pub bound: Option<i64>,
}

const SECTIONS: [&str; 3] = ["", "brane", "overrides"];

fn known_key(section: &str, key: &str) -> bool {
    match section {
        "" => ["lattice_rank", "rays", "extra", "cones"].contains(&key),
        "brane" => ["tau0", "framing"].contains(&key),
        _ => ["H_basis", "grading", "bound"].contains(&key),
    }
}

pub fn parse_spec_str(text: &str) -> Result<FanSpec> {
    let perr = |line: usize, msg: String| Error::Parse { line, msg };
    let mut entries: BTreeMap<(String, String), (usize, Value)> = BTreeMap::new();
    let mut section = String::new();
    let mut saw_brane = false;
    for (no, raw) in text.lines().enumerate() {
        let line = no + 1;
        let body = raw.split('#').next().unwrap().trim();
        if body.is_empty() {
            continue;
        }
        if let Some(name) = body.strip_prefix('[').and_then(|b| b.strip_suffix(']')) {
            let name = name.trim();
            if !SECTIONS[1..].contains(&name) {
                return Err(perr(line, format!("unknown section [{name}]")));
            }
            saw_brane |= name == "brane";
            section = name.to_string();
            continue;
        }
        let (key, val) = body.split_once('=').ok_or_else(|| perr(line, "expected key = value".into()))?;
        let key = key.trim();
        if !known_key(&section, key) {
            return Err(perr(line, format!("unknown key '{key}'")));
        }
        let v = parse_value(val).map_err(|m| perr(line, m))?;
        if entries.insert((section.clone(), key.to_string()), (line, v)).is_some() {
            return Err(perr(line, format!("duplicate key '{key}'")));
        }
    }
    if !saw_brane {
        return Err(Error::BraneRequired);
    }
    let get = |sec: &str, key: &str| entries.get(&(sec.to_string(), key.to_string()));
    let need = |sec: &str, key: &str| get(sec, key).ok_or_else(|| perr(0, format!("missing key '{key}'")));

    let (l, v) = need("", "lattice_rank")?;
    let rank = as_int(v).map_err(|m| perr(*l, m))?;
    if rank != 3 {
        return Err(perr(*l, "lattice_rank must be 3".into()));
    }
    let rank = rank as usize;
    let vectors = |key: &str, required: bool| -> Result<Vec<Vec<i64>>> {
        let Some((l, v)) = get("", key) else {
            return if required { Err(perr(0, format!("missing key '{key}'"))) } else { Ok(vec![]) };
        };
        let rows = as_rows(v).map_err(|m| perr(*l, m))?;
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != rank) {
            return Err(perr(*l, format!("{key} entry {} has dimension {}, expected {rank}", i + 1, r.len())));
        }
        Ok(rows)
    };
    let rays = vectors("rays", true)?;
    let extra = vectors("extra", false)?;
    let n = rays.len();
    let index = |l: usize, i: i64, what: &str| -> Result<usize> {
        if i < 1 || i as usize > n {
            return Err(perr(l, format!("{what} index {i} out of range 1..{n}")));
        }
        Ok(i as usize - 1)
    };
    let (l, v) = need("", "cones")?;
    let mut cones = vec![];
    for c in as_rows(v).map_err(|m| perr(*l, m))? {
        if c.len() != rank {
            return Err(perr(*l, format!("cone {:?} is not maximal", c)));
        }
        cones.push(c.iter().map(|&i| index(*l, i, "cone")).collect::<Result<Vec<_>>>()?);
    }
    let (l, v) = need("brane", "tau0")?;
    let t = as_vec(v).map_err(|m| perr(*l, m))?;
    if t.len() != 2 {
        return Err(perr(*l, "tau0 needs two ray indices".into()));
    }
    let tau0 = (index(*l, t[0], "tau0")?, index(*l, t[1], "tau0")?);
    let (l, v) = need("brane", "framing")?;
    let framing = as_int(v).map_err(|m| perr(*l, m))?;

    let h_basis = match get("overrides", "H_basis") {
        Some((l, v)) => Some(as_rows(v).map_err(|m| perr(*l, m))?),
        None => None,
    };
    let grading = match get("overrides", "grading") {
        Some((l, v)) => Some(as_vec(v).map_err(|m| perr(*l, m))?),
        None => None,
    };
    let bound = match get("overrides", "bound") {
        Some((l, v)) => Some(as_int(v).map_err(|m| perr(*l, m))?),
        None => None,
    };
    Ok(FanSpec { lattice_rank: rank, rays, extra, cones, tau0, framing, h_basis, grading, bound })
}

pub fn parse_spec(path: &Path) -> Result<FanSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse { line: 0, msg: format!("{}: {e}", path.display()) })?;
    parse_spec_str(&text)
}

/// Everything the commands need, built once from a spec.
#[derive(Clone, Debug)]
pub struct Geometry {
    pub spec: FanSpec,
    pub fan: ExtendedStackyFan,
    pub brane: BraneData,
    pub dual: DualGeometry,
    pub bases: CohomologyBases,
}

impl FanSpec {
    pub fn fan(&self) -> ExtendedStackyFan {
        ExtendedStackyFan::new(self.lattice_rank, self.rays.clone(), self.extra.clone(), self.cones.clone())
    }

    pub fn geometry(&self) -> Result<Geometry> {
        let fan = self.fan();
        fan.validate(ValidateOptions::default())?;
        let brane = analyze_brane(&fan, self.tau0, self.framing)?;
        let dual = construct_dual(&brane)?;
        let bases = second_cohomology_bases(&dual, self.h_basis.as_deref())?;
        Ok(Geometry { spec: self.clone(), fan, brane, dual, bases })
    }
}

#[derive(Parser, Debug)]
#[command(name = "toric-oc", about = "Open/closed Gromov-Witten invariants of toric Calabi-Yau 3-orbifolds")]
pub struct Cli {
    /// Fan specification file.
    pub spec: std::path::PathBuf,
    /// Evaluate graph sums and tables sequentially.
    #[arg(long, global = true)]
    pub sequential: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Rays and cones of the dual 4-orbifold.
    Construct,
    /// Box elements and ages of every maximal cone.
    Box,
    /// Tangent weights of every flag.
    Weights,
    /// Disk invariants.
    Disk {
        #[arg(long)]
        dmax: i64,
        #[arg(long, default_value_t = 0)]
        beta_bound: i64,
        #[arg(long, default_value_t = 0)]
        insertions: usize,
    },
    /// Closed invariants of the dual at the classes matching the disk keys.
    Closed {
        #[arg(long)]
        dmax: i64,
        #[arg(long, default_value_t = 0)]
        beta_bound: i64,
        #[arg(long, default_value_t = 0)]
        insertions: usize,
    },
    /// Coefficients of the B-model disk function.
    Wdisk {
        #[arg(long)]
        bound: Option<i64>,
        #[arg(long, default_value_t = 0)]
        lambda: i64,
    },
    /// Coefficients of [z^-2] of the I-function pairing.
    Ifpair {
        #[arg(long)]
        bound: Option<i64>,
        #[arg(long, default_value_t = 0)]
        lambda: i64,
    },
    /// Closed and open mirror maps.
    Mirrormap {
        #[arg(long)]
        bound: Option<i64>,
    },
    /// Check one of the correspondences.
    Verify {
        which: Check,
        #[arg(long)]
        bound: Option<i64>,
        #[arg(long, default_value_t = 0)]
        beta_bound: i64,
        #[arg(long, default_value_t = 0)]
        insertions: usize,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Check {
    Numerical,
    Ipairing,
    Gencorr,
    Mirrormap,
    Jpairing,
}

/// Records to print and whether every check passed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub lines: Vec<String>,
    pub passed: bool,
}

fn natural_cmp(a: &str, b: &str) -> Ordering {
    let chunks = |s: &str| -> Vec<(bool, String)> {
        s.chars()
            .chunk_by(|c| c.is_ascii_digit())
            .into_iter()
            .map(|(d, g)| (d, g.collect::<String>()))
            .collect()
    };
    let (ca, cb) = (chunks(a), chunks(b));
    for (x, y) in ca.iter().zip(&cb) {
        let o = match (x, y) {
            ((true, p), (true, q)) => p.len().cmp(&q.len()).then_with(|| p.cmp(q)),
            _ => x.1.cmp(&y.1),
        };
        if o != Ordering::Equal {
            return o;
        }
    }
    ca.len().cmp(&cb.len())
}

/// Sort records by key, numbers compared by value.
pub fn sorted(mut lines: Vec<String>) -> Vec<String> {
    lines.sort_by(|a, b| natural_cmp(a, b));
    lines
}

fn vec_str(v: &[i64]) -> String {
    format!("({})", v.iter().join(","))
}

fn lambda_range(g: &Geometry, lambda: Option<i64>) -> Result<Vec<i64>> {
    match lambda {
        Some(l) if !(0..g.brane.m).contains(&l) => {
            Err(Error::InvalidFan(format!("lambda {l} out of range 0..{}", g.brane.m - 1)))
        }
        Some(l) => Ok(vec![l]),
        None => Ok((0..g.brane.m).collect()),
    }
}

fn grading(g: &Geometry) -> Vec<Q> {
    match &g.spec.grading {
        Some(v) => v.iter().map(|&x| qi(x)).collect(),
        None => disk_grading(&g.brane, &g.bases),
    }
}

fn report_outcome(reports: Vec<Report>) -> Outcome {
    let passed = reports.iter().all(|r| r.passed());
    let mut lines = vec![];
    for r in reports {
        lines.extend(sorted(r.lines()));
    }
    Outcome { lines, passed }
}

fn construct(g: &Geometry) -> Vec<String> {
    let d = &g.dual;
    let mut out = vec![];
    for (i, &orig) in g.brane.perm.iter().enumerate() {
        out.push(format!("brane order {} : input vector {}", i + 1, orig + 1));
    }
    for (i, v) in d.fan.vectors.iter().enumerate() {
        let kind = if d.fan.is_extra[i] { "extra" } else { "ray" };
        out.push(format!("dual {kind} {} : {}", i + 1, vec_str(v)));
    }
    for (i, c) in d.fan.maximal_cones.iter().enumerate() {
        out.push(format!("dual cone {} : {c}", i + 1));
    }
    out.push(format!("dual sigma0 : {}", d.sigma0_tilde));
    out.push(format!("dual l0 : ({})", d.l0.iter().map(fmt_q).join(",")));
    let defect = calabi_yau_defect(&d.fan);
    out.push(format!("dual calabi-yau defect : ({})", defect.iter().map(fmt_q).join(",")));
    let semi = d.fan.validate(ValidateOptions::default()).map(|_| "yes".to_string()).unwrap_or_else(|e| e.to_string());
    out.push(format!("dual semi-projective : {semi}"));
    out.push(format!("brane (m,r,s,f) : ({},{},{},{})", g.brane.m, g.brane.r, g.brane.s, g.brane.f));
    out
}

fn box_records(name: &str, fan: &ExtendedStackyFan) -> Vec<String> {
    let mut out = vec![];
    for c in &fan.maximal_cones {
        for b in fan.box_elements(c) {
            out.push(format!("box {name} {c} {} : age {}", b, fmt_q(&b.age)));
        }
    }
    out
}

fn facets(c: &Cone) -> Vec<Cone> {
    c.0.iter().map(|&i| c.without(i)).collect()
}

fn weight_records(g: &Geometry) -> Vec<String> {
    let mut out = vec![];
    let x = &g.brane.fan;
    for s in &x.maximal_cones {
        for t in facets(s) {
            out.push(format!("weight X {t} {s} : {}", tangent_weight(x, &t, s)));
        }
    }
    let d = &g.dual;
    for s in &d.fan.maximal_cones {
        for t in facets(s) {
            out.push(format!("weight X~ {t} {s} : {}", d.weight(&t, s)));
        }
    }
    out
}

fn table_keys(g: &Geometry, dmax: i64, beta_bound: i64, insertions: usize) -> Result<Vec<crate::correspondence::InvariantKey>> {
    disk_keys_graded(&g.brane, &g.bases, &grading(g), dmax, beta_bound, insertions)
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let g = parse_spec(&cli.spec)?.geometry()?;
    run_command(&g, &cli.command, !cli.sequential)
}

pub fn run_command(g: &Geometry, cmd: &Command, parallel: bool) -> Result<Outcome> {
    let default_bound = g.spec.bound.unwrap_or(3);
    let ok = |lines: Vec<String>| Ok(Outcome { lines: sorted(lines), passed: true });
    match cmd {
        Command::Construct => ok(construct(g)),
        Command::Box => {
            let mut lines = box_records("X", &g.brane.fan);
            lines.extend(box_records("X~", &g.dual.fan));
            ok(lines)
        }
        Command::Weights => ok(weight_records(g)),
        Command::Disk { dmax, beta_bound, insertions } => {
            let keys = table_keys(g, *dmax, *beta_bound, *insertions)?;
            ok(disk_table(&g.brane, &g.bases, &keys, parallel)?.records())
        }
        Command::Closed { dmax, beta_bound, insertions } => {
            let keys: Vec<_> =
                table_keys(g, *dmax, *beta_bound, *insertions)?.iter().map(|k| closed_key(&g.dual, k)).collect();
            ok(closed_table(&g.dual, &g.bases, &keys, parallel)?.records())
        }
        Command::Wdisk { bound, lambda } => {
            let l = lambda_range(g, Some(*lambda))?[0];
            let w = w_disk(&g.dual, &g.bases, &g.brane.lambda_from_bar(l), bound.unwrap_or(default_bound))?;
            ok(w.records().into_iter().map(|r| format!("W lambda={l} {r}")).collect())
        }
        Command::Ifpair { bound, lambda } => {
            let l = lambda_range(g, Some(*lambda))?[0];
            let s = i_function_z2_pairing(&g.dual, &g.bases, &g.brane.lambda_from_bar(l), bound.unwrap_or(default_bound))?;
            ok(s.records().into_iter().map(|r| format!("I lambda={l} {r}")).collect())
        }
        Command::Mirrormap { bound } => ok(mirror_maps(&g.dual, &g.bases, bound.unwrap_or(default_bound))?.records()),
        Command::Verify { which, bound, beta_bound, insertions } => {
            let bound = bound.unwrap_or(default_bound);
            let lambdas = lambda_range(g, None)?;
            let reports = match which {
                Check::Numerical => {
                    let keys = table_keys(g, bound, *beta_bound, 0)?;
                    let disk = disk_table(&g.brane, &g.bases, &keys, parallel)?;
                    let ckeys: Vec<_> = keys.iter().map(|k| closed_key(&g.dual, k)).collect();
                    let closed = closed_table(&g.dual, &g.bases, &ckeys, parallel)?;
                    vec![compare_tables("numerical", &g.dual, &disk, &closed)]
                }
                Check::Ipairing => lambdas
                    .iter()
                    .map(|&l| verify_ipairing(&g.dual, &g.bases, &g.brane.lambda_from_bar(l), bound))
                    .collect::<Result<Vec<_>>>()?,
                Check::Gencorr => lambdas
                    .iter()
                    .map(|&l| verify_gencorr(&g.dual, &g.bases, l, bound, *insertions, parallel))
                    .collect::<Result<Vec<_>>>()?,
                Check::Jpairing => lambdas
                    .iter()
                    .map(|&l| verify_jpairing(&g.dual, &g.bases, l, bound, *beta_bound, parallel))
                    .collect::<Result<Vec<_>>>()?,
                Check::Mirrormap => vec![verify_mirror_map_corr(&mirror_maps(&g.dual, &g.bases, bound)?)],
            };
            Ok(report_outcome(reports))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const C3_F1: &str = "# C^3, framing 1\nlattice_rank = 3\nrays = [[1,0,1],[0,1,1],[0,0,1]]\nextra = []\ncones = [[1,2,3]]\n\n[brane]\ntau0 = [2,3]\nframing = 1\n";

    #[test]
    fn parses_c3() {
        let s = parse_spec_str(C3_F1).unwrap();
        assert_eq!(s.rays.len(), 3);
        assert_eq!(s.tau0, (1, 2));
        assert_eq!(s.framing, 1);
        assert!(s.geometry().is_ok());
    }

    #[test]
    fn brane_required() {
        let text = C3_F1.split("[brane]").next().unwrap();
        assert_eq!(parse_spec_str(text), Err(Error::BraneRequired));
        assert_eq!(Error::BraneRequired.to_string(), "brane required");
    }

    #[test]
    fn wrong_dimension_reports_line() {
        let text = C3_F1.replace("[0,1,1]", "[0,1]");
        match parse_spec_str(&text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_token_reports_line() {
        let text = C3_F1.replace("framing = 1", "framing = one");
        assert!(matches!(parse_spec_str(&text), Err(Error::Parse { line: 9, .. })));
    }

    #[test]
    fn natural_order() {
        let v = sorted(vec!["ray 10".into(), "ray 2".into(), "ray 1".into()]);
        assert_eq!(v, vec!["ray 1", "ray 2", "ray 10"]);
    }

    #[test]
    fn disk_command() {
        let g = parse_spec_str(C3_F1).unwrap().geometry().unwrap();
        let out = run_command(&g, &Command::Disk { dmax: 3, beta_bound: 0, insertions: 0 }, false).unwrap();
        let vals: Vec<&str> = out.lines.iter().map(|l| l.rsplit(" : ").next().unwrap()).collect();
        assert_eq!(vals, vec!["-1", "3/4", "-10/9"]);
    }
}
