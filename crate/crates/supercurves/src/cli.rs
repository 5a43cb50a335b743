//! Batch front end: scenario files, verification commands, JSON reports.
//!
//! A scenario is a small sectioned text file:
//!
//! ```text
//! [base]
//! algebra = grassmann(1)
//! q = 1
//! n = 2                      # optional truncation parameter (default 1)
//!
//! [curve]
//! at 0: theta1 -> z^2 * theta1
//!
//! [bundle "L"]
//! at 0: z^2
//!
//! [divisor "D"]
//! at 0: 1 + beta1 * theta1 / z
//!
//! [run]
//! h1 L
//! abel-check D
//! ```
//!
//! Expressions are rational in `z`, `theta1..thetaq`, `i`, and the declared
//! base generators, with explicit `*` (no implicit multiplication). Reports
//! are deterministic JSON; the exit contract is 0 iff nothing is FALSIFIED.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde_json::{json, Value};

use crate::berezin::{LocalAutomorphism, LogElement};
use crate::curve::{
    h0, h0_ber, h1, serre_pairing, verify_duality, BundleData, SuperCurve, TruncationBounds,
};
use crate::divisor::{abel, abel_theorem_check, degree, has_effective_representative, CartierDivisor};
use crate::scalars::GaussianRational;
use crate::superalgebra::{BaseAlgebra, Graded, Lambda, SuperElement, ThetaSet};
use crate::superfunction::{PointP1, Poly, RatFunc, SuperRationalFunction};
use crate::{Error, Result};

pub const REPORT_SCHEMA: &str = "supercurves-report/1";

// ---------------------------------------------------------------------------
// scenario model
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    H0(String),
    H1(String),
    H0Ber(String),
    Serre(String),
    DualityVerify(String),
    Degree(String),
    Abel(String),
    AbelCheck(String),
    Effective(String),
    ResidueSuite(usize),
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub lambda: Lambda,
    /// Whether the base algebra is Grassmann (perfectness of the duality
    /// pairing is only promised there).
    pub grassmann_base: bool,
    pub curve: SuperCurve,
    pub bundles: BTreeMap<String, BundleData>,
    pub divisors: BTreeMap<String, CartierDivisor>,
    pub commands: Vec<Command>,
    pub n: i64,
}

// ---------------------------------------------------------------------------
// expression parsing
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Sym(char),
}

struct Lexer;

impl Lexer {
    /// Tokenize one expression; columns are 1-based within the full line.
    fn lex(line_no: usize, line: &str, start_col: usize) -> Result<Vec<(Tok, usize)>> {
        let mut out = Vec::new();
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0usize;
        while i < chars.len() {
            let c = chars[i];
            let col = start_col + i;
            if c.is_whitespace() {
                i += 1;
            } else if c.is_ascii_digit() {
                let mut s = String::new();
                while i < chars.len() && chars[i].is_ascii_digit() {
                    s.push(chars[i]);
                    i += 1;
                }
                out.push((Tok::Num(s), col));
            } else if c.is_ascii_alphabetic() || c == '_' {
                let mut s = String::new();
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    s.push(chars[i]);
                    i += 1;
                }
                out.push((Tok::Ident(s), col));
            } else if "+-*/^()".contains(c) {
                out.push((Tok::Sym(c), col));
                i += 1;
            } else {
                return Err(Error::Parse {
                    line: line_no,
                    col,
                    msg: format!("unexpected character '{c}'"),
                });
            }
        }
        Ok(out)
    }
}

struct ExprParser<'a> {
    l: &'a Lambda,
    toks: Vec<(Tok, usize)>,
    pos: usize,
    line: usize,
    end_col: usize,
}

impl<'a> ExprParser<'a> {
    fn new(l: &'a Lambda, line: usize, text: &str, start_col: usize) -> Result<Self> {
        let toks = Lexer::lex(line, text, start_col)?;
        let end_col = start_col + text.chars().count();
        Ok(ExprParser {
            l,
            toks,
            pos: 0,
            line,
            end_col,
        })
    }

    fn err(&self, col: usize, msg: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line,
            col,
            msg: msg.into(),
        }
    }

    fn here(&self) -> usize {
        self.toks
            .get(self.pos)
            .map_or(self.end_col, |(_, col)| *col)
    }

    fn peek_sym(&self) -> Option<char> {
        match self.toks.get(self.pos) {
            Some((Tok::Sym(c), _)) => Some(*c),
            _ => None,
        }
    }

    fn parse(mut self) -> Result<SuperRationalFunction> {
        let v = self.expr()?;
        if self.pos < self.toks.len() {
            return Err(self.err(self.here(), "trailing input after expression"));
        }
        Ok(v)
    }

    fn expr(&mut self) -> Result<SuperRationalFunction> {
        let mut acc = self.term()?;
        while let Some(op) = self.peek_sym() {
            if op != '+' && op != '-' {
                break;
            }
            self.pos += 1;
            let rhs = self.term()?;
            acc = if op == '+' {
                self.l.add(&acc, &rhs)
            } else {
                self.l.sub(&acc, &rhs)
            };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<SuperRationalFunction> {
        let mut acc = self.factor()?;
        while let Some(op) = self.peek_sym() {
            if op != '*' && op != '/' {
                break;
            }
            let col = self.here();
            self.pos += 1;
            let rhs = self.factor()?;
            acc = if op == '*' {
                self.l.mul(&acc, &rhs)
            } else {
                self.l.mul(&acc, &self.invert(col, &rhs)?)
            };
        }
        Ok(acc)
    }

    fn invert(&self, col: usize, v: &SuperRationalFunction) -> Result<SuperRationalFunction> {
        // a plain rational denominator inverts directly; anything else must
        // be an invertible even function
        if v.terms.len() == 1 {
            if let Some(r) = v.terms.get(&(0, 0)) {
                if r.is_zero() {
                    return Err(self.err(col, "division by zero"));
                }
                return Ok(Graded::term(0, 0, r.inv().unwrap()));
            }
        }
        self.l
            .invert_ktimes(v)
            .map_err(|_| self.err(col, "division by a non-invertible expression"))
    }

    fn factor(&mut self) -> Result<SuperRationalFunction> {
        if self.peek_sym() == Some('-') {
            self.pos += 1;
            let v = self.factor()?;
            return Ok(self.l.neg(&v));
        }
        let mut base = self.atom()?;
        if self.peek_sym() == Some('^') {
            let col = self.here();
            self.pos += 1;
            let mut negative = false;
            if self.peek_sym() == Some('-') {
                self.pos += 1;
                negative = true;
            }
            let e = match self.toks.get(self.pos) {
                Some((Tok::Num(s), _)) => {
                    let e: u32 = s
                        .parse()
                        .map_err(|_| self.err(col, "exponent out of range"))?;
                    self.pos += 1;
                    e
                }
                _ => return Err(self.err(self.here(), "expected an integer exponent")),
            };
            if negative {
                base = self.invert(col, &base)?;
            }
            let mut acc = self.l.one();
            for _ in 0..e {
                acc = self.l.mul(&acc, &base);
            }
            base = acc;
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<SuperRationalFunction> {
        let (tok, col) = match self.toks.get(self.pos) {
            Some(t) => t.clone(),
            None => return Err(self.err(self.here(), "expected an expression")),
        };
        self.pos += 1;
        match tok {
            Tok::Num(s) => {
                let n: i64 = s
                    .parse()
                    .map_err(|_| self.err(col, "integer literal out of range"))?;
                Ok(self
                    .l
                    .scalar(&GaussianRational::from_int(n)))
            }
            Tok::Sym('(') => {
                let v = self.expr()?;
                if self.peek_sym() != Some(')') {
                    return Err(self.err(self.here(), "expected ')'"));
                }
                self.pos += 1;
                Ok(v)
            }
            Tok::Ident(name) => self.symbol(&name, col),
            Tok::Sym(c) => Err(self.err(col, format!("unexpected '{c}'"))),
        }
    }

    fn symbol(&self, name: &str, col: usize) -> Result<SuperRationalFunction> {
        if name == "z" {
            return Ok(self.l.z_fn());
        }
        if name == "i" {
            let unit = GaussianRational::new(
                num::BigRational::from_integer(0.into()),
                num::BigRational::from_integer(1.into()),
            );
            return Ok(self.l.scalar(&unit));
        }
        if let Some(rest) = name.strip_prefix("theta") {
            let k: usize = rest
                .parse()
                .map_err(|_| self.err(col, format!("bad theta index in '{name}'")))?;
            if k < 1 || k > self.l.q {
                return Err(self.err(
                    col,
                    format!("theta index out of range in '{name}' (q = {})", self.l.q),
                ));
            }
            return Ok(self.l.theta(k));
        }
        self.l
            .generator(name)
            .ok_or_else(|| self.err(col, format!("unknown symbol '{name}'")))
    }
}

/// Parse one expression over the given function ring.
pub fn parse_expression(
    l: &Lambda,
    line: usize,
    text: &str,
    start_col: usize,
) -> Result<SuperRationalFunction> {
    ExprParser::new(l, line, text, start_col)?.parse()
}

// ---------------------------------------------------------------------------
// scenario parsing
// ---------------------------------------------------------------------------

fn parse_point(line: usize, col: usize, s: &str) -> Result<PointP1> {
    let s = s.trim();
    if s == "inf" {
        return Ok(PointP1::Infinity);
    }
    s.parse::<i64>()
        .map(PointP1::finite_i64)
        .map_err(|_| Error::Parse {
            line,
            col,
            msg: format!("bad point '{s}' (expected an integer or 'inf')"),
        })
}

struct Section {
    header: String,
    header_line: usize,
    /// (line number, text)
    lines: Vec<(usize, String)>,
}

fn split_sections(text: &str) -> Result<Vec<Section>> {
    let mut out: Vec<Section> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed.starts_with('[') {
            if !trimmed.ends_with(']') {
                return Err(Error::Parse {
                    line: line_no,
                    col: 1,
                    msg: "unterminated section header".into(),
                });
            }
            out.push(Section {
                header: trimmed[1..trimmed.len() - 1].trim().to_string(),
                header_line: line_no,
                lines: Vec::new(),
            });
        } else {
            match out.last_mut() {
                Some(s) => s.lines.push((line_no, line.to_string())),
                None => {
                    return Err(Error::Parse {
                        line: line_no,
                        col: 1,
                        msg: "content before the first section header".into(),
                    })
                }
            }
        }
    }
    Ok(out)
}

fn named_section<'h>(header: &'h str, kind: &str) -> Option<&'h str> {
    let rest = header.strip_prefix(kind)?.trim();
    rest.strip_prefix('"')?.strip_suffix('"')
}

/// `key = value` split.
fn key_value(line_no: usize, text: &str) -> Result<(String, String)> {
    match text.split_once('=') {
        Some((k, v)) => Ok((k.trim().to_string(), v.trim().to_string())),
        None => Err(Error::Parse {
            line: line_no,
            col: 1,
            msg: "expected 'key = value'".into(),
        }),
    }
}

/// `at P: payload` split, returning the point and the payload with its
/// starting column.
fn at_line(line_no: usize, text: &str) -> Result<(PointP1, String, usize)> {
    let trimmed = text.trim_start();
    let indent = text.len() - trimmed.len();
    let rest = trimmed.strip_prefix("at ").ok_or(Error::Parse {
        line: line_no,
        col: indent + 1,
        msg: "expected 'at <point>: ...'".into(),
    })?;
    let (pt, payload) = rest.split_once(':').ok_or(Error::Parse {
        line: line_no,
        col: indent + 1,
        msg: "expected ':' after the point".into(),
    })?;
    let p = parse_point(line_no, indent + 4, pt)?;
    let payload_col = indent + 3 + pt.len() + 2;
    Ok((p, payload.to_string(), payload_col))
}

fn parse_base(section: &Section) -> Result<(Lambda, bool, i64)> {
    let mut algebra: Option<(std::sync::Arc<BaseAlgebra>, bool)> = None;
    let mut q: Option<usize> = None;
    let mut n = 1i64;
    for (line_no, text) in &section.lines {
        let (k, v) = key_value(*line_no, text)?;
        match k.as_str() {
            "algebra" => {
                let spec = v.replace(' ', "");
                let parsed = if spec == "scalars" {
                    Some((BaseAlgebra::scalars(), true))
                } else if let Some(arg) = spec
                    .strip_prefix("grassmann(")
                    .and_then(|s| s.strip_suffix(')'))
                {
                    arg.parse::<usize>().ok().map(|m| (BaseAlgebra::grassmann(m), true))
                } else if let Some(arg) = spec
                    .strip_prefix("even_truncated(")
                    .and_then(|s| s.strip_suffix(')'))
                {
                    arg.parse::<usize>()
                        .ok()
                        .map(|k| (BaseAlgebra::even_truncated(k), false))
                } else {
                    None
                };
                algebra = Some(parsed.ok_or(Error::Parse {
                    line: *line_no,
                    col: 1,
                    msg: format!("unknown algebra '{v}'"),
                })?);
            }
            "q" => {
                q = Some(v.parse().map_err(|_| Error::Parse {
                    line: *line_no,
                    col: 1,
                    msg: format!("bad q '{v}'"),
                })?);
            }
            "n" => {
                n = v.parse().map_err(|_| Error::Parse {
                    line: *line_no,
                    col: 1,
                    msg: format!("bad n '{v}'"),
                })?;
            }
            _ => {
                return Err(Error::Parse {
                    line: *line_no,
                    col: 1,
                    msg: format!("unknown base key '{k}'"),
                })
            }
        }
    }
    let (base, grassmann) = algebra.ok_or(Error::Parse {
        line: section.header_line,
        col: 1,
        msg: "[base] must declare an algebra".into(),
    })?;
    let q = q.ok_or(Error::Parse {
        line: section.header_line,
        col: 1,
        msg: "[base] must declare q".into(),
    })?;
    Ok((Lambda::new(base, q), grassmann, n))
}

fn parse_curve(l: &Lambda, section: &Section) -> Result<SuperCurve> {
    let mut gluing: BTreeMap<PointP1, LocalAutomorphism> = BTreeMap::new();
    for (line_no, text) in &section.lines {
        let (p, payload, col0) = at_line(*line_no, text)?;
        let mut image_z = l.z_fn();
        let mut image_theta: Vec<SuperRationalFunction> =
            (1..=l.q).map(|i| l.theta(i)).collect();
        let mut col = col0;
        for part in payload.split(';') {
            let (lhs, rhs) = part.split_once("->").ok_or(Error::Parse {
                line: *line_no,
                col,
                msg: "expected '<symbol> -> <expression>'".into(),
            })?;
            let rhs_col = col + lhs.len() + 2;
            let value = parse_expression(l, *line_no, rhs, rhs_col)?;
            let lhs_t = lhs.trim();
            if lhs_t == "z" {
                image_z = value;
            } else if let Some(k) = lhs_t
                .strip_prefix("theta")
                .and_then(|s| s.parse::<usize>().ok())
            {
                if k < 1 || k > l.q {
                    return Err(Error::Parse {
                        line: *line_no,
                        col,
                        msg: format!("theta index out of range in '{lhs_t}'"),
                    });
                }
                image_theta[k - 1] = value;
            } else {
                return Err(Error::Parse {
                    line: *line_no,
                    col,
                    msg: format!("cannot assign to '{lhs_t}'"),
                });
            }
            col += part.len() + 1;
        }
        let gamma = LocalAutomorphism::new(l, image_z, image_theta)
            .map_err(|e| Error::Parse {
                line: *line_no,
                col: col0,
                msg: format!("invalid gluing: {e}"),
            })?;
        gluing.insert(p, gamma);
    }
    SuperCurve::new(l.clone(), gluing)
}

fn parse_local_data(
    l: &Lambda,
    section: &Section,
) -> Result<BTreeMap<PointP1, SuperRationalFunction>> {
    let mut out = BTreeMap::new();
    for (line_no, text) in &section.lines {
        let (p, payload, col) = at_line(*line_no, text)?;
        out.insert(p, parse_expression(l, *line_no, &payload, col)?);
    }
    Ok(out)
}

fn parse_command(line_no: usize, text: &str) -> Result<Command> {
    let mut it = text.split_whitespace();
    let head = it.next().unwrap_or("");
    let arg = it.next();
    let extra = it.next();
    let need = |arg: Option<&str>| -> Result<String> {
        arg.map(str::to_string).ok_or(Error::Parse {
            line: line_no,
            col: 1,
            msg: format!("'{head}' needs a target name"),
        })
    };
    if extra.is_some() {
        return Err(Error::Parse {
            line: line_no,
            col: 1,
            msg: "too many arguments".into(),
        });
    }
    match head {
        "h0" => Ok(Command::H0(need(arg)?)),
        "h1" => Ok(Command::H1(need(arg)?)),
        "h0-ber" => Ok(Command::H0Ber(need(arg)?)),
        "serre" => Ok(Command::Serre(need(arg)?)),
        "duality-verify" => Ok(Command::DualityVerify(need(arg)?)),
        "degree" => Ok(Command::Degree(need(arg)?)),
        "abel" => Ok(Command::Abel(need(arg)?)),
        "abel-check" => Ok(Command::AbelCheck(need(arg)?)),
        "effective" => Ok(Command::Effective(need(arg)?)),
        "residue-suite" => {
            let count = need(arg)?.parse::<usize>().map_err(|_| Error::Parse {
                line: line_no,
                col: 1,
                msg: "residue-suite needs an instance count".into(),
            })?;
            Ok(Command::ResidueSuite(count))
        }
        _ => Err(Error::Parse {
            line: line_no,
            col: 1,
            msg: format!("unknown command '{head}'"),
        }),
    }
}

/// Parse a scenario file.
pub fn parse_scenario(name: &str, text: &str) -> Result<Scenario> {
    let sections = split_sections(text)?;
    let base = sections
        .iter()
        .find(|s| s.header == "base")
        .ok_or(Error::Parse {
            line: 1,
            col: 1,
            msg: "missing [base] section".into(),
        })?;
    let (lambda, grassmann_base, n) = parse_base(base)?;
    let curve = match sections.iter().find(|s| s.header == "curve") {
        Some(s) => parse_curve(&lambda, s)?,
        None => SuperCurve::trivial(lambda.clone()),
    };
    let mut bundles = BTreeMap::new();
    let mut divisors = BTreeMap::new();
    let mut commands = Vec::new();
    for s in &sections {
        if let Some(bname) = named_section(&s.header, "bundle") {
            let data = parse_local_data(&lambda, s)?;
            let bundle =
                BundleData::new(curve.clone(), data).map_err(|e| Error::Parse {
                    line: s.header_line,
                    col: 1,
                    msg: format!("invalid bundle '{bname}': {e}"),
                })?;
            bundles.insert(bname.to_string(), bundle);
        } else if let Some(dname) = named_section(&s.header, "divisor") {
            let data = parse_local_data(&lambda, s)?;
            let d = CartierDivisor::new(curve.clone(), data).map_err(|e| Error::Parse {
                line: s.header_line,
                col: 1,
                msg: format!("invalid divisor '{dname}': {e}"),
            })?;
            divisors.insert(dname.to_string(), d);
        } else if s.header == "run" {
            for (line_no, text) in &s.lines {
                commands.push(parse_command(*line_no, text.trim())?);
            }
        } else if s.header != "base" && s.header != "curve" {
            return Err(Error::Parse {
                line: s.header_line,
                col: 1,
                msg: format!("unknown section '[{}]'", s.header),
            });
        }
    }
    Ok(Scenario {
        name: name.to_string(),
        lambda,
        grassmann_base,
        curve,
        bundles,
        divisors,
        commands,
        n,
    })
}

// ---------------------------------------------------------------------------
// formatting
// ---------------------------------------------------------------------------

fn term_name(l: &Lambda, b: usize, s: ThetaSet) -> String {
    let mut parts = Vec::new();
    if b != 0 {
        parts.push(l.base.basis_names[b].clone());
    }
    for i in 1..=l.q {
        if s & (1 << (i - 1)) != 0 {
            parts.push(format!("theta{i}"));
        }
    }
    parts.join("*")
}

fn fmt_terms<C, F: Fn(&C) -> String>(
    l: &Lambda,
    terms: &BTreeMap<(usize, ThetaSet), C>,
    fmt: F,
) -> String {
    let parts: Vec<String> = terms
        .iter()
        .map(|((b, s), c)| {
            let name = term_name(l, *b, *s);
            if name.is_empty() {
                format!("({})", fmt(c))
            } else {
                format!("({})*{}", fmt(c), name)
            }
        })
        .collect();
    if parts.is_empty() {
        "0".to_string()
    } else {
        parts.join(" + ")
    }
}

pub fn fmt_super_fn(l: &Lambda, f: &SuperRationalFunction) -> String {
    fmt_terms(l, &f.terms, |r: &RatFunc| r.to_string())
}

pub fn fmt_super_elem(l: &Lambda, a: &SuperElement) -> String {
    fmt_terms(l, &a.terms, |c: &GaussianRational| c.to_string())
}

pub fn fmt_log_element(l: &Lambda, v: &LogElement) -> String {
    fmt_terms(l, &v.terms, |c| c.clone().normalize().to_string())
}

fn dims_json(d: (usize, usize)) -> Value {
    json!({ "even": d.0, "odd": d.1 })
}

// ---------------------------------------------------------------------------
// execution
// ---------------------------------------------------------------------------

fn lookup<'m, T>(map: &'m BTreeMap<String, T>, name: &str, kind: &str) -> Result<&'m T> {
    map.get(name).ok_or_else(|| Error::Precondition(format!(
        "unknown {kind} '{name}'"
    )))
}

/// Random rational function with poles among 0, 1, -1 and infinity.
fn random_ratfunc(rng: &mut ChaCha20Rng) -> RatFunc {
    let num = Poly::from_coeffs(
        (0..=rng.gen_range(0..=2))
            .map(|_| GaussianRational::from_int(rng.gen_range(-5..=5)))
            .collect(),
    );
    let mut den = Poly::one();
    for a in [0i64, 1, -1] {
        let e = rng.gen_range(0..=2);
        if e > 0 {
            let lin = Poly::from_coeffs(vec![
                GaussianRational::from_int(-a),
                GaussianRational::one(),
            ]);
            den = den.mul(&lin.pow(e));
        }
    }
    RatFunc::new(num, den)
}

fn random_super_fn(l: &Lambda, rng: &mut ChaCha20Rng) -> SuperRationalFunction {
    let mut out: SuperRationalFunction = Graded::zero();
    for b in 0..l.base.dim() {
        for s in 0..(1u32 << l.q) {
            if rng.gen_bool(0.5) {
                out.insert(b, s, random_ratfunc(rng));
            }
        }
    }
    out
}

/// Total residue of f dz over all points of the projective line.
fn total_residue(l: &Lambda, f: &SuperRationalFunction) -> Result<SuperElement> {
    let mut total = l.residue_form(f, &PointP1::Infinity);
    for a in l.finite_poles(f)? {
        total = l.add(&total, &l.residue_form(f, &PointP1::Finite(a)));
    }
    Ok(total)
}

fn run_command(
    sc: &Scenario,
    cmd: &Command,
    seed: u64,
    n: i64,
) -> Result<(Value, bool)> {
    let l = &sc.lambda;
    let bounds_for = |b: &BundleData| TruncationBounds::for_bundle(b, n);
    match cmd {
        Command::H0(name) => {
            let b = lookup(&sc.bundles, name, "bundle")?;
            let dims = h0(b, &bounds_for(b))?.graded_dim();
            Ok((json!({ "command": "h0", "target": name, "dims": dims_json(dims) }), false))
        }
        Command::H1(name) => {
            let b = lookup(&sc.bundles, name, "bundle")?;
            let dims = h1(b, &bounds_for(b))?.graded_dim();
            Ok((json!({ "command": "h1", "target": name, "dims": dims_json(dims) }), false))
        }
        Command::H0Ber(name) => {
            let b = lookup(&sc.bundles, name, "bundle")?;
            let dims = h0_ber(b, &bounds_for(b))?.graded_dim();
            Ok((json!({ "command": "h0-ber", "target": name, "dims": dims_json(dims) }), false))
        }
        Command::Serre(name) => {
            let b = lookup(&sc.bundles, name, "bundle")?;
            let bounds = bounds_for(b);
            let ber = h0_ber(b, &bounds)?;
            let h1s = h1(b, &bounds)?;
            let matrix = serre_pairing(b, &bounds, &ber, &h1s)?;
            let rows: Vec<Value> = matrix
                .iter()
                .map(|row| Value::Array(row.iter().map(|e| json!(fmt_super_elem(l, e))).collect()))
                .collect();
            Ok((
                json!({
                    "command": "serre",
                    "target": name,
                    "h0_ber": dims_json(ber.graded_dim()),
                    "h1": dims_json(h1s.graded_dim()),
                    "pairing": rows,
                }),
                false,
            ))
        }
        Command::DualityVerify(name) => {
            let b = lookup(&sc.bundles, name, "bundle")?;
            let report = verify_duality(b, &bounds_for(b))?;
            // perfectness is only promised over Grassmann bases
            let ok = report.annihilates_relations
                && report.injective
                && (!sc.grassmann_base || report.perfect);
            let rows: Vec<Value> = report
                .pairing
                .iter()
                .map(|row| Value::Array(row.iter().map(|e| json!(fmt_super_elem(l, e))).collect()))
                .collect();
            Ok((
                json!({
                    "command": "duality-verify",
                    "target": name,
                    "h0_ber": dims_json(report.h0_ber_dim),
                    "h1": dims_json(report.h1_dim),
                    "pairing": rows,
                    "annihilates_relations": report.annihilates_relations,
                    "injective": report.injective,
                    "perfect": report.perfect,
                    "finding": if ok { "VERIFIED" } else { "FALSIFIED" },
                }),
                !ok,
            ))
        }
        Command::Degree(name) => {
            let d = lookup(&sc.divisors, name, "divisor")?;
            let k = degree(d)?;
            Ok((json!({ "command": "degree", "target": name, "degree": k }), false))
        }
        Command::Abel(name) => {
            let d = lookup(&sc.divisors, name, "divisor")?;
            let mut u = d.support();
            if !u.contains(&PointP1::Infinity) {
                u.push(PointP1::Infinity);
            }
            let image = abel(d, &u, n)?;
            let values: Vec<Value> = image
                .values
                .iter()
                .map(|v| json!(fmt_log_element(l, v)))
                .collect();
            Ok((
                json!({
                    "command": "abel",
                    "target": name,
                    "values": values,
                    "zero": image.is_zero(),
                }),
                false,
            ))
        }
        Command::AbelCheck(name) => {
            let d = lookup(&sc.divisors, name, "divisor")?;
            let check = abel_theorem_check(d, n)?;
            let witness = check
                .witness
                .as_ref()
                .map(|w| json!(fmt_super_fn(l, w)))
                .unwrap_or(Value::Null);
            let ok = check.consistent();
            Ok((
                json!({
                    "command": "abel-check",
                    "target": name,
                    "abel_zero": check.abel_zero(),
                    "trivial": check.trivial(),
                    "witness": witness,
                    "finding": if ok { "VERIFIED" } else { "FALSIFIED" },
                }),
                !ok,
            ))
        }
        Command::Effective(name) => {
            let b = lookup(&sc.bundles, name, "bundle")?;
            let eff = has_effective_representative(b, n)?;
            Ok((json!({ "command": "effective", "target": name, "effective": eff }), false))
        }
        Command::ResidueSuite(count) => {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let mut sums = Vec::with_capacity(*count);
            let mut bad = false;
            for _ in 0..*count {
                let f = random_super_fn(l, &mut rng);
                let total = total_residue(l, &f)?;
                bad |= !total.is_zero();
                sums.push(json!(fmt_super_elem(l, &total)));
            }
            Ok((
                json!({
                    "command": "residue-suite",
                    "count": count,
                    "total_residues": sums,
                    "finding": if bad { "FALSIFIED" } else { "VERIFIED" },
                }),
                bad,
            ))
        }
    }
}

/// Execute a scenario and return (report, falsified).
pub fn run(sc: &Scenario, seed: u64, bounds_scale: i64) -> Result<(Value, bool)> {
    let n = sc.n * bounds_scale.max(1);
    let mut results = Vec::new();
    let mut falsified = false;
    for cmd in &sc.commands {
        let (v, bad) = run_command(sc, cmd, seed, n)?;
        falsified |= bad;
        results.push(v);
    }
    Ok((
        json!({
            "schema": REPORT_SCHEMA,
            "scenario": sc.name,
            "seed": seed,
            "bounds_scale": bounds_scale,
            "results": results,
            "falsified": falsified,
        }),
        falsified,
    ))
}

// ---------------------------------------------------------------------------
// built-in catalog
// ---------------------------------------------------------------------------

/// The built-in scenario set: (name, scenario text).
pub fn catalog() -> Vec<(&'static str, &'static str)> {
    vec![
        (
            "trivial-1-1",
            r#"
[base]
algebra = scalars
q = 1

[bundle "O"]

[run]
h0 O
h1 O
h0-ber O
duality-verify O
"#,
        ),
        (
            "split-O-minus-3",
            r#"
# odd part O(-3): gluing theta -> z^3 theta at the origin
[base]
algebra = scalars
q = 1

[curve]
at 0: theta1 -> z^3 * theta1

[bundle "O"]

[run]
h0 O
h1 O
h0-ber O
serre O
duality-verify O
"#,
        ),
        (
            "split-O-minus-3-grassmann",
            r#"
[base]
algebra = grassmann(1)
q = 1

[curve]
at 0: theta1 -> z^3 * theta1

[bundle "O"]

[run]
duality-verify O
"#,
        ),
        (
            "xi-z2",
            r#"
# multiplier z^2: sections vanish to second order at the origin
[base]
algebra = scalars
q = 1

[bundle "L"]
at 0: z^2

[run]
h0 L
h1 L
serre L
duality-verify L
"#,
        ),
        (
            "xi-z2-twist-grassmann",
            r#"
# multiplier z^2 on top of a gluing twist, over C[beta]: H^1 carries
# classes of both parities with a nontrivial odd action of the base
[base]
algebra = grassmann(1)
q = 1
n = 2

[curve]
at 0: theta1 -> z^2 * theta1

[bundle "L"]
at 0: z^2

[run]
serre L
duality-verify L
"#,
        ),
        (
            "xi-z2-eps",
            r#"
# the same twist over the even dual-number base C[eps]/eps^2
[base]
algebra = even_truncated(2)
q = 1

[bundle "L"]
at 0: z^2

[run]
duality-verify L
"#,
        ),
        (
            "trivial-2-2",
            r#"
[base]
algebra = scalars
q = 2

[bundle "O"]

[run]
h0 O
h1 O
duality-verify O
"#,
        ),
        (
            "q2-mixed-twist",
            r#"
# odd part O(-2) + O(0) inside a 1|2 curve
[base]
algebra = scalars
q = 2

[curve]
at 0: theta1 -> z^2 * theta1

[bundle "O"]

[run]
h1 O
duality-verify O
"#,
        ),
        (
            "abel-twist2",
            r#"
# theta -> z^2 theta over C[beta]: nilpotent divisors at and away from the
# twist point (both with nonzero class), a principal divisor, and a sum
[base]
algebra = grassmann(1)
q = 1

[curve]
at 0: theta1 -> z^2 * theta1

[divisor "Dnil"]
at 0: 1 + beta1 * theta1 / z

[divisor "Dprin"]
at 1: (z - 1) / (z - 2)
at 2: (z - 1) / (z - 2)

[divisor "Dfar"]
at 1: 1 + beta1 * theta1 / (z - 1)

[divisor "Dsum"]
at 0: 1 + beta1 * theta1 / z
at 1: (z - 1) / (z - 2)
at 2: (z - 1) / (z - 2)

[run]
degree Dnil
abel Dnil
abel-check Dnil
abel-check Dprin
abel-check Dfar
abel-check Dsum
"#,
        ),
        (
            "abel-twist3",
            r#"
[base]
algebra = grassmann(1)
q = 1

[curve]
at 0: theta1 -> z^3 * theta1

[divisor "Da"]
at 0: 1 + beta1 * theta1 / z

[divisor "Db"]
at 0: 1 + beta1 * theta1 / z^2

[divisor "Dc"]
at 1: (z - 1) / (z + 1)
at -1: (z - 1) / (z + 1)

[run]
abel-check Da
abel-check Db
abel-check Dc
"#,
        ),
        (
            "abel-eps",
            r#"
# even nilpotent directions: C[eps]/eps^2 over the twist z^2
[base]
algebra = even_truncated(2)
q = 1

[curve]
at 0: theta1 -> z^2 * theta1

[divisor "De"]
at 0: 1 + eps / z

[divisor "Dr"]
at 1: (z - 1)^2 / ((z - 2) * (z - 3))
at 2: (z - 1)^2 / ((z - 2) * (z - 3))
at 3: (z - 1)^2 / ((z - 2) * (z - 3))

[run]
degree De
abel-check De
abel-check Dr
"#,
        ),
        (
            "effectivity-pair",
            r#"
# the Jacobi-inversion gap: the bundle twisted by the generating odd class
# has only nilpotent sections; the untwisted bundle of the same reduced
# degree has the section 1
[base]
algebra = grassmann(1)
q = 1

[curve]
at 0: theta1 -> z^2 * theta1

[bundle "special"]
at 0: 1 - beta1 * theta1 / z

[bundle "generic"]

[divisor "D"]
at 0: 1 + beta1 * theta1 / z

[run]
effective special
effective generic
h0 special
abel-check D
"#,
        ),
        (
            "residues-grassmann2",
            r#"
[base]
algebra = grassmann(2)
q = 2

[run]
residue-suite 20
"#,
        ),
    ]
}

/// Run every catalog scenario; returns (combined report, any falsified).
pub fn run_catalog(seed: u64, bounds_scale: i64) -> Result<(Value, bool)> {
    let mut reports = Vec::new();
    let mut falsified = false;
    for (name, text) in catalog() {
        let sc = parse_scenario(name, text)?;
        let (report, bad) = run(&sc, seed, bounds_scale)?;
        falsified |= bad;
        reports.push(report);
    }
    Ok((
        json!({
            "schema": REPORT_SCHEMA,
            "catalog": reports,
            "seed": seed,
            "bounds_scale": bounds_scale,
            "falsified": falsified,
        }),
        falsified,
    ))
}
