//! A small expression language over DRs:
//!
//! ```text
//! expr  := call | atom
//! call  := op "(" expr "," expr [ "," "alpha=" real ] ")"     op ∈ mix, dmix
//!        | "pow(" expr "," integer ")"
//!        | op "(" expr "," expr ")"                          op ∈ join, meet, conv
//! atom  := family spec ("exp:n=2", "mvn:n=2,var=3", ...) | bound name
//! ```

use std::collections::HashMap;
use std::fmt;

use crate::algebra::{self, MixWeight};
use crate::error::{Error, Result};
use crate::families::FamilySpec;
use crate::rearrange::{DrCdf, DrPdf};
use crate::tabulated::{Monotonicity, TabulatedFn};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Mix,
    DMix,
    Pow,
    Join,
    Meet,
    Conv,
}

impl Op {
    fn from_name(s: &str) -> Option<Op> {
        Some(match s {
            "mix" => Op::Mix,
            "dmix" => Op::DMix,
            "pow" => Op::Pow,
            "join" => Op::Join,
            "meet" => Op::Meet,
            "conv" => Op::Conv,
            _ => return None,
        })
    }

    fn name(&self) -> &'static str {
        match self {
            Op::Mix => "mix",
            Op::DMix => "dmix",
            Op::Pow => "pow",
            Op::Join => "join",
            Op::Meet => "meet",
            Op::Conv => "conv",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Atom {
        text: String,
        pos: usize,
    },
    Call {
        op: Op,
        args: Vec<Expr>,
        alpha: Option<f64>,
        power: Option<u32>,
        pos: usize,
    },
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Atom { text, .. } => f.write_str(text),
            Expr::Call {
                op, args, alpha, power, ..
            } => {
                write!(f, "{}({}", op.name(), args[0])?;
                if let Some(k) = power {
                    write!(f, ",{k}")?;
                } else {
                    write!(f, ",{}", args[1])?;
                }
                if let Some(a) = alpha {
                    write!(f, ",alpha={a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok<'a> {
    Open,
    Close,
    Comma,
    Word(&'a str),
}

fn lex(s: &str) -> Vec<(usize, Tok<'_>)> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, c) in s.char_indices() {
        let single = match c {
            '(' => Some(Tok::Open),
            ')' => Some(Tok::Close),
            ',' => Some(Tok::Comma),
            _ => None,
        };
        if single.is_some() || c.is_whitespace() {
            if let Some(b) = start.take() {
                out.push((b, Tok::Word(&s[b..i])));
            }
            if let Some(t) = single {
                out.push((i, t));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(b) = start {
        out.push((b, Tok::Word(&s[b..])));
    }
    out
}

struct Parser<'a> {
    toks: Vec<(usize, Tok<'a>)>,
    at: usize,
    end: usize,
}

const FAMILY_KEYS: [&str; 3] = ["n=", "var=", "theta="];

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok<'a>> {
        self.toks.get(self.at).map(|t| &t.1)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |t| t.0)
    }

    fn expect(&mut self, want: Tok<'static>, what: &str) -> Result<()> {
        match self.peek() {
            Some(t) if *t == want => {
                self.at += 1;
                Ok(())
            }
            _ => Err(Error::parse(self.pos(), format!("expected {what}"))),
        }
    }

    fn word(&mut self, what: &str) -> Result<(usize, &'a str)> {
        match self.toks.get(self.at) {
            Some(&(p, Tok::Word(w))) => {
                self.at += 1;
                Ok((p, w))
            }
            _ => Err(Error::parse(self.pos(), format!("expected {what}"))),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let (pos, w) = self.word("an expression")?;
        if self.peek() == Some(&Tok::Open) {
            let op = Op::from_name(w).ok_or_else(|| Error::parse(pos, format!("unknown operation {w:?}")))?;
            self.at += 1;
            return self.call(op, pos);
        }
        let mut text = w.to_string();
        // family parameters are separated by the same commas as arguments
        if text.contains(':') {
            while self.peek() == Some(&Tok::Comma) {
                match self.toks.get(self.at + 1) {
                    Some(&(_, Tok::Word(next))) if FAMILY_KEYS.iter().any(|k| next.starts_with(k)) => {
                        text.push(',');
                        text.push_str(next);
                        self.at += 2;
                    }
                    _ => break,
                }
            }
        }
        Ok(Expr::Atom { text, pos })
    }

    fn call(&mut self, op: Op, pos: usize) -> Result<Expr> {
        let first = self.expr()?;
        self.expect(Tok::Comma, "','")?;
        let mut args = vec![first];
        let mut power = None;
        let mut alpha = None;
        if op == Op::Pow {
            let (p, w) = self.word("an integer power")?;
            let k: u32 = w
                .parse()
                .map_err(|_| Error::parse(p, format!("expected a positive integer, got {w:?}")))?;
            if k == 0 {
                return Err(Error::parse(p, "power must be at least 1"));
            }
            power = Some(k);
        } else {
            args.push(self.expr()?);
            if matches!(op, Op::Mix | Op::DMix) && self.peek() == Some(&Tok::Comma) {
                self.at += 1;
                let (p, w) = self.word("alpha=<weight>")?;
                let v = w
                    .strip_prefix("alpha=")
                    .and_then(|v| v.parse::<f64>().ok())
                    .ok_or_else(|| Error::parse(p, format!("expected alpha=<weight>, got {w:?}")))?;
                if !(v > 0.0 && v < 1.0) {
                    return Err(Error::parse(p, format!("alpha must lie in (0, 1), got {v}")));
                }
                alpha = Some(v);
            }
        }
        self.expect(Tok::Close, "')'")?;
        Ok(Expr::Call {
            op,
            args,
            alpha,
            power,
            pos,
        })
    }
}

pub fn parse(input: &str) -> Result<Expr> {
    let mut p = Parser {
        toks: lex(input),
        at: 0,
        end: input.len(),
    };
    let e = p.expr()?;
    if p.at != p.toks.len() {
        return Err(Error::parse(p.pos(), "trailing input"));
    }
    Ok(e)
}

/// A DR with its cdf; the pdf is missing for lattice results.
#[derive(Debug, Clone)]
pub struct DrValue {
    pub pdf: Option<DrPdf>,
    pub cdf: DrCdf,
}

impl DrValue {
    pub fn from_pdf(pdf: DrPdf) -> Result<Self> {
        let cdf = pdf.cdf()?;
        Ok(DrValue { pdf: Some(pdf), cdf })
    }

    pub fn from_cdf(cdf: DrCdf) -> Self {
        let pdf = cdf.attached_density().cloned();
        DrValue { pdf, cdf }
    }

    /// A nonincreasing table is read as a DR pdf, a nondecreasing one as
    /// a DR cdf.
    pub fn from_table(t: TabulatedFn) -> Result<Self> {
        match t.monotone() {
            Monotonicity::Nonincreasing => DrValue::from_pdf(DrPdf::from_table(t)?),
            Monotonicity::Nondecreasing => Ok(DrValue::from_cdf(DrCdf::from_table(t)?)),
            Monotonicity::None => Err(Error::NotMonotone("table is neither a DR pdf nor a DR cdf".into())),
        }
    }

    pub fn family(spec: &FamilySpec) -> Result<Self> {
        let (pdf, cdf) = spec.dr()?;
        Ok(DrValue { pdf: Some(pdf), cdf })
    }

    /// The pdf, recovered from the cdf's slopes if necessary.
    pub fn density(&self) -> Result<DrPdf> {
        match &self.pdf {
            Some(p) => Ok(p.clone()),
            None => self.cdf.density(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Env {
    bindings: HashMap<String, DrValue>,
}

impl Env {
    pub fn new() -> Self {
        Env::default()
    }

    pub fn bind(&mut self, name: impl Into<String>, value: DrValue) -> Result<()> {
        let name = name.into();
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(Error::InvalidArgument(format!("invalid name {name:?}")));
        }
        if Op::from_name(&name).is_some() {
            return Err(Error::InvalidArgument(format!("{name:?} is an operation name")));
        }
        self.bindings.insert(name, value);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&DrValue> {
        self.bindings.get(name)
    }
}

pub fn eval(e: &Expr, env: &Env) -> Result<DrValue> {
    match e {
        Expr::Atom { text, pos } => {
            if let Some(v) = env.get(text) {
                return Ok(v.clone());
            }
            if !text.contains(':') && text != "beta32" {
                return Err(Error::parse(*pos, format!("unknown identifier {text:?}")));
            }
            let spec: FamilySpec = text.parse().map_err(|err| match err {
                Error::Parse { pos: p, msg } => Error::parse(pos + p, msg),
                other => other,
            })?;
            DrValue::family(&spec)
        }
        Expr::Call {
            op, args, alpha, power, ..
        } => {
            let a = eval(&args[0], env)?;
            match op {
                Op::Pow => Ok(DrValue::from_cdf(algebra::otimes_power(&a.cdf, power.unwrap_or(1))?)),
                _ => {
                    let b = eval(&args[1], env)?;
                    match op {
                        Op::Mix | Op::DMix => {
                            let w = MixWeight::new(alpha.unwrap_or(0.5))?;
                            let (p, q) = (a.density()?, b.density()?);
                            let m = if *op == Op::Mix {
                                algebra::inverse_mix(&p, &q, w)?
                            } else {
                                algebra::direct_mix(&p, &q, w)?
                            };
                            DrValue::from_pdf(m)
                        }
                        Op::Join => Ok(DrValue::from_cdf(algebra::join(&a.cdf, &b.cdf))),
                        Op::Meet => Ok(DrValue::from_cdf(algebra::meet(&a.cdf, &b.cdf))),
                        Op::Conv => {
                            let c = algebra::convolve_dr(&a.density()?, &b.density()?)?;
                            Ok(DrValue::from_cdf(c))
                        }
                        Op::Pow => unreachable!(),
                    }
                }
            }
        }
    }
}

/// Parses and evaluates.
pub fn evaluate(input: &str, env: &Env) -> Result<DrValue> {
    eval(&parse(input)?, env)
}
