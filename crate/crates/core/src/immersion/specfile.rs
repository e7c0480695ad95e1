//! Line-oriented spec-file loader.
//!
//! Every directive occupies one line; `#` starts a comment. See `docs/dsl.md`
//! for the full format.

use std::fmt;

use nalgebra::DMatrix;
use thiserror::Error;

use super::{Claims, Distribution, ImmersionSpec, Interval, SlantClaim, TangentField, WarpedClaim};
use crate::ambient::{ProductStructure, StructureError};
use crate::expr::{line_col, parse_expression, BinaryOp, Expr, ExprKind, ParseErrorKind, UnaryOp};

#[derive(Clone, Debug, PartialEq)]
pub enum SpecErrorKind {
    Syntax(ParseErrorKind),
    UnknownDirective(String),
    Missing(&'static str),
    Duplicate(String),
    Malformed(String),
    Structure(StructureError),
    NotLinear(String),
    UnknownDistribution(String),
    RankMismatch { total: usize, dim: usize },
    TooManyDistributions(usize),
}

impl fmt::Display for SpecErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpecErrorKind::Syntax(k) => write!(f, "{k}"),
            SpecErrorKind::UnknownDirective(d) => write!(f, "unknown directive {d:?}"),
            SpecErrorKind::Missing(d) => write!(f, "missing `{d}` directive"),
            SpecErrorKind::Duplicate(what) => write!(f, "duplicate {what}"),
            SpecErrorKind::Malformed(msg) => f.write_str(msg),
            SpecErrorKind::Structure(e) => write!(f, "invalid ambient structure: {e}"),
            SpecErrorKind::NotLinear(msg) => write!(f, "tangent field is not linear in the differentials: {msg}"),
            SpecErrorKind::UnknownDistribution(d) => write!(f, "unknown distribution {d:?}"),
            SpecErrorKind::RankMismatch { total, dim } => write!(
                f,
                "distribution ranks add up to {total} but the chart has dimension {dim}"
            ),
            SpecErrorKind::TooManyDistributions(n) => {
                write!(f, "at most two distributions are supported, found {n}")
            }
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
#[error("line {line}, column {column}: {kind}")]
pub struct SpecError {
    pub line: usize,
    pub column: usize,
    pub kind: SpecErrorKind,
}

/// A whitespace-free token and its byte offset in the whole file.
#[derive(Clone, Copy, Debug)]
struct Word<'a> {
    text: &'a str,
    offset: usize,
}

fn words(s: &str, base: usize) -> Vec<Word<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in s.char_indices() {
        if c.is_whitespace() {
            if let Some(st) = start.take() {
                out.push(Word { text: &s[st..i], offset: base + st });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(st) = start {
        out.push(Word { text: &s[st..], offset: base + st });
    }
    out
}

/// Splits at `sep` outside parentheses. Pieces keep their file offsets.
fn split_top_level(s: &str, base: usize, sep: char) -> Vec<(&str, usize)> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            c if c == sep && depth == 0 => {
                out.push((&s[start..i], base + start));
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    out.push((&s[start..], base + start));
    out
}

/// Trims a piece while keeping its offset correct.
fn trim_piece(s: &str, base: usize) -> (&str, usize) {
    let lead = s.len() - s.trim_start().len();
    (s.trim(), base + lead)
}

struct Loader<'a> {
    text: &'a str,
}

impl<'a> Loader<'a> {
    fn err(&self, offset: usize, kind: SpecErrorKind) -> SpecError {
        let (line, column) = line_col(self.text, offset);
        SpecError { line, column, kind }
    }

    fn malformed(&self, offset: usize, msg: impl Into<String>) -> SpecError {
        self.err(offset, SpecErrorKind::Malformed(msg.into()))
    }

    fn expr(&self, s: &str, base: usize, names: &[String]) -> Result<Expr, SpecError> {
        let (s, base) = trim_piece(s, base);
        if s.is_empty() {
            return Err(self.malformed(base, "expected an expression"));
        }
        let mut e = parse_expression(s, names)
            .map_err(|p| self.err(base + p.offset, SpecErrorKind::Syntax(p.kind)))?;
        e.offset_spans(base);
        Ok(e)
    }

    fn constant(&self, s: &str, base: usize) -> Result<f64, SpecError> {
        let e = self.expr(s, base, &[])?;
        let v = e
            .eval(&[])
            .map_err(|err| self.malformed(base, format!("cannot evaluate constant: {err}")))?;
        if !v.is_finite() {
            return Err(self.malformed(base, "constant is not finite"));
        }
        Ok(v)
    }

    fn ambient(&self, rest: &str, base: usize) -> Result<ProductStructure, SpecError> {
        let ws = words(rest, base);
        if ws.len() < 2 {
            return Err(self.malformed(base, "expected `ambient <n> signature ...` or `ambient <n> matrix ...`"));
        }
        let n: usize = ws[0]
            .text
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| self.malformed(ws[0].offset, format!("invalid ambient dimension {:?}", ws[0].text)))?;
        let entries = &ws[2..];
        match ws[1].text {
            "signature" => {
                if entries.len() != n {
                    return Err(self.malformed(
                        ws[1].offset,
                        format!("signature needs {n} entries, found {}", entries.len()),
                    ));
                }
                let mut signs = Vec::with_capacity(n);
                for w in entries {
                    let s = match w.text {
                        "+" | "+1" | "1" => 1,
                        "-" | "-1" => -1,
                        other => {
                            return Err(self.malformed(w.offset, format!("signature entry must be + or -, found {other:?}")))
                        }
                    };
                    signs.push(s);
                }
                ProductStructure::from_signature(&signs)
                    .map_err(|e| self.err(ws[1].offset, SpecErrorKind::Structure(e)))
            }
            "matrix" => {
                if entries.len() != n * n {
                    return Err(self.malformed(
                        ws[1].offset,
                        format!("matrix needs {} entries, found {}", n * n, entries.len()),
                    ));
                }
                let vals = entries
                    .iter()
                    .map(|w| self.constant(w.text, w.offset))
                    .collect::<Result<Vec<_>, _>>()?;
                ProductStructure::from_matrix(DMatrix::from_row_slice(n, n, &vals))
                    .map_err(|e| self.err(ws[1].offset, SpecErrorKind::Structure(e)))
            }
            other => Err(self.malformed(ws[1].offset, format!("expected `signature` or `matrix`, found {other:?}"))),
        }
    }

    fn chart(&self, rest: &str, base: usize) -> Result<Vec<String>, SpecError> {
        let ws = words(rest, base);
        if ws.is_empty() {
            return Err(self.malformed(base, "chart needs at least one coordinate"));
        }
        let mut names: Vec<String> = Vec::new();
        for w in ws {
            let valid = w.text.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
                && w.text.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
            if !valid {
                return Err(self.malformed(w.offset, format!("invalid coordinate name {:?}", w.text)));
            }
            if UnaryOp::from_name(w.text).is_some() {
                return Err(self.malformed(w.offset, format!("coordinate name {:?} is a function name", w.text)));
            }
            if names.iter().any(|n| n == w.text) {
                return Err(self.err(w.offset, SpecErrorKind::Duplicate(format!("coordinate {:?}", w.text))));
            }
            names.push(w.text.to_string());
        }
        for n in &names {
            let d = format!("d{n}");
            if names.contains(&d) {
                return Err(self.malformed(base, format!("coordinate {d:?} clashes with the differential of {n:?}")));
            }
        }
        Ok(names)
    }

    fn domain(
        &self,
        rest: &str,
        base: usize,
        chart: &[String],
        domain: &mut [Option<Interval>],
    ) -> Result<(), SpecError> {
        for (piece, off) in split_top_level(rest, base, ';') {
            let ws = words(piece, off);
            if ws.is_empty() {
                continue;
            }
            if ws.len() != 3 {
                return Err(self.malformed(ws[0].offset, "expected `<coordinate> <lo> <hi>`"));
            }
            let idx = chart
                .iter()
                .position(|c| c == ws[0].text)
                .ok_or_else(|| self.err(ws[0].offset, SpecErrorKind::Syntax(ParseErrorKind::UnknownIdentifier(ws[0].text.to_string()))))?;
            if domain[idx].is_some() {
                return Err(self.err(ws[0].offset, SpecErrorKind::Duplicate(format!("domain for {:?}", ws[0].text))));
            }
            let lo = self.constant(ws[1].text, ws[1].offset)?;
            let hi = self.constant(ws[2].text, ws[2].offset)?;
            if !(lo < hi) {
                return Err(self.malformed(ws[1].offset, format!("empty interval [{lo}, {hi}]")));
            }
            domain[idx] = Some(Interval { lo, hi });
        }
        Ok(())
    }

    fn field(&self, s: &str, base: usize, chart: &[String]) -> Result<TangentField, SpecError> {
        let (s, base) = trim_piece(s, base);
        let k = chart.len();
        let mut names = chart.to_vec();
        names.extend(chart.iter().map(|c| format!("d{c}")));
        let e = self.expr(s, base, &names)?;
        let form = linear_form(&e, k).map_err(|msg| self.err(base, SpecErrorKind::NotLinear(msg)))?;
        if form.scalar.is_some() {
            return Err(self.err(base, SpecErrorKind::NotLinear("term without a differential".into())));
        }
        if form.coeffs.iter().all(Option::is_none) {
            return Err(self.err(base, SpecErrorKind::NotLinear("no differential terms".into())));
        }
        let coeffs = form
            .coeffs
            .into_iter()
            .map(|c| c.unwrap_or_else(|| Expr::constant(0.0)))
            .collect();
        Ok(TangentField {
            coeffs,
            text: s.to_string(),
        })
    }
}

/// `Σ coeffs[i]·dxᵢ + scalar`, where neither part contains differentials.
struct LinearForm {
    coeffs: Vec<Option<Expr>>,
    scalar: Option<Expr>,
}

fn add_opt(a: Option<Expr>, b: Option<Expr>, op: BinaryOp) -> Option<Expr> {
    match (a, b) {
        (None, None) => None,
        (Some(a), None) => Some(a),
        (None, Some(b)) => Some(match op {
            BinaryOp::Sub => Expr::unary(UnaryOp::Neg, b),
            _ => b,
        }),
        (Some(a), Some(b)) => Some(Expr::binary(op, a, b)),
    }
}

impl LinearForm {
    fn scalar(e: Expr, k: usize) -> Self {
        Self {
            coeffs: vec![None; k],
            scalar: Some(e),
        }
    }

    fn has_differentials(&self) -> bool {
        self.coeffs.iter().any(Option::is_some)
    }

    fn combine(self, other: Self, op: BinaryOp) -> Self {
        Self {
            coeffs: self
                .coeffs
                .into_iter()
                .zip(other.coeffs)
                .map(|(a, b)| add_opt(a, b, op))
                .collect(),
            scalar: add_opt(self.scalar, other.scalar, op),
        }
    }

    fn map(self, f: impl Fn(Expr) -> Expr) -> Self {
        Self {
            coeffs: self.coeffs.into_iter().map(|c| c.map(&f)).collect(),
            scalar: self.scalar.map(&f),
        }
    }
}

/// Decomposes an expression over chart variables `0..k` and differentials
/// `k..2k` into its coefficients. Fails on anything that is not affine in the
/// differentials.
fn linear_form(e: &Expr, k: usize) -> Result<LinearForm, String> {
    let is_diff = |i: usize| i >= k;
    match e.kind() {
        ExprKind::Const(_) => Ok(LinearForm::scalar(e.clone(), k)),
        ExprKind::Var(i) if is_diff(*i) => {
            let mut coeffs = vec![None; k];
            coeffs[*i - k] = Some(Expr::new(ExprKind::Const(1.0), e.span()));
            Ok(LinearForm { coeffs, scalar: None })
        }
        ExprKind::Var(_) => Ok(LinearForm::scalar(e.clone(), k)),
        ExprKind::Unary(UnaryOp::Neg, a) => Ok(linear_form(a, k)?.map(|c| Expr::unary(UnaryOp::Neg, c))),
        ExprKind::Unary(op, a) => {
            if a.any_var(&mut |i| is_diff(i)) {
                Err(format!("differential inside {}()", op.name()))
            } else {
                Ok(LinearForm::scalar(e.clone(), k))
            }
        }
        ExprKind::Binary(op, a, b) => match op {
            BinaryOp::Add | BinaryOp::Sub => Ok(linear_form(a, k)?.combine(linear_form(b, k)?, *op)),
            BinaryOp::Mul => {
                let la = linear_form(a, k)?;
                let lb = linear_form(b, k)?;
                match (la.has_differentials(), lb.has_differentials()) {
                    (true, true) => Err("product of two differentials".into()),
                    (false, false) => Ok(LinearForm::scalar(e.clone(), k)),
                    (true, false) => {
                        let s = lb.scalar.expect("non-differential factor");
                        if la.scalar.is_some() {
                            return Err("differential term mixed with a scalar term in a product".into());
                        }
                        Ok(la.map(|c| Expr::binary(BinaryOp::Mul, c, s.clone())))
                    }
                    (false, true) => {
                        let s = la.scalar.expect("non-differential factor");
                        if lb.scalar.is_some() {
                            return Err("differential term mixed with a scalar term in a product".into());
                        }
                        Ok(lb.map(|c| Expr::binary(BinaryOp::Mul, s.clone(), c)))
                    }
                }
            }
            BinaryOp::Div => {
                if b.any_var(&mut |i| is_diff(i)) {
                    return Err("division by a differential".into());
                }
                let la = linear_form(a, k)?;
                if !la.has_differentials() {
                    return Ok(LinearForm::scalar(e.clone(), k));
                }
                if la.scalar.is_some() {
                    return Err("differential term mixed with a scalar term in a quotient".into());
                }
                Ok(la.map(|c| Expr::binary(BinaryOp::Div, c, (**b).clone())))
            }
            BinaryOp::Pow => {
                if e.any_var(&mut |i| is_diff(i)) {
                    Err("power of a differential".into())
                } else {
                    Ok(LinearForm::scalar(e.clone(), k))
                }
            }
        },
    }
}

struct Line<'a> {
    keyword: &'a str,
    keyword_offset: usize,
    rest: &'a str,
    rest_offset: usize,
}

fn lines(text: &str) -> Vec<Line<'_>> {
    let mut out = Vec::new();
    let mut start = 0;
    for raw in text.split_inclusive('\n') {
        let content = raw.split('#').next().unwrap_or("").trim_end_matches(['\n', '\r']);
        let ws = words(content, start);
        if let Some(first) = ws.first() {
            let kw_end = first.offset - start + first.text.len();
            out.push(Line {
                keyword: first.text,
                keyword_offset: first.offset,
                rest: &content[kw_end..],
                rest_offset: start + kw_end,
            });
        }
        start += raw.len();
    }
    out
}

/// Parses a spec file. All expressions are bound to the chart, and every
/// reported error carries a 1-based line and column.
pub fn load_spec(text: &str) -> Result<ImmersionSpec, SpecError> {
    let ld = Loader { text };
    let lines = lines(text);
    let end = text.len();

    for l in &lines {
        if !matches!(l.keyword, "ambient" | "chart" | "domain" | "map" | "dist" | "claim" | "mu") {
            return Err(ld.err(l.keyword_offset, SpecErrorKind::UnknownDirective(l.keyword.to_string())));
        }
    }
    let single = |kw: &'static str| -> Result<Option<&Line>, SpecError> {
        let mut found = lines.iter().filter(|l| l.keyword == kw);
        let first = found.next();
        if let Some(dup) = found.next() {
            return Err(ld.err(dup.keyword_offset, SpecErrorKind::Duplicate(format!("`{kw}` directive"))));
        }
        Ok(first)
    };

    let ambient_line = single("ambient")?.ok_or_else(|| ld.err(end, SpecErrorKind::Missing("ambient")))?;
    let ambient = ld.ambient(ambient_line.rest, ambient_line.rest_offset)?;
    let chart_line = single("chart")?.ok_or_else(|| ld.err(end, SpecErrorKind::Missing("chart")))?;
    let chart = ld.chart(chart_line.rest, chart_line.rest_offset)?;
    let k = chart.len();

    let mut domain = vec![None; k];
    let mut domain_seen = false;
    for l in lines.iter().filter(|l| l.keyword == "domain") {
        domain_seen = true;
        ld.domain(l.rest, l.rest_offset, &chart, &mut domain)?;
    }
    if !domain_seen {
        return Err(ld.err(end, SpecErrorKind::Missing("domain")));
    }
    let domain = domain
        .into_iter()
        .zip(&chart)
        .map(|(iv, name)| {
            iv.ok_or_else(|| ld.malformed(end, format!("no domain interval for coordinate {name:?}")))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let map_line = single("map")?.ok_or_else(|| ld.err(end, SpecErrorKind::Missing("map")))?;
    let components = split_top_level(map_line.rest, map_line.rest_offset, ',')
        .into_iter()
        .map(|(s, off)| ld.expr(s, off, &chart))
        .collect::<Result<Vec<_>, _>>()?;
    if components.len() != ambient.dim() {
        return Err(ld.malformed(
            map_line.keyword_offset,
            format!("map has {} components but the ambient space is R^{}", components.len(), ambient.dim()),
        ));
    }
    if k > ambient.dim() {
        return Err(ld.malformed(chart_line.keyword_offset, "chart dimension exceeds ambient dimension"));
    }

    let mut distributions: Vec<Distribution> = Vec::new();
    for l in lines.iter().filter(|l| l.keyword == "dist") {
        let (name_part, fields_part, fields_off) = match l.rest.find('=') {
            Some(eq) => (&l.rest[..eq], &l.rest[eq + 1..], l.rest_offset + eq + 1),
            None => return Err(ld.malformed(l.rest_offset, "expected `dist <name> = <field> , ...`")),
        };
        let nw = words(name_part, l.rest_offset);
        if nw.len() != 1 {
            return Err(ld.malformed(l.rest_offset, "expected a single distribution name before `=`"));
        }
        let name = nw[0].text.to_string();
        if distributions.iter().any(|d| d.name == name) {
            return Err(ld.err(nw[0].offset, SpecErrorKind::Duplicate(format!("distribution {name:?}"))));
        }
        let fields = split_top_level(fields_part, fields_off, ',')
            .into_iter()
            .map(|(s, off)| ld.field(s, off, &chart))
            .collect::<Result<Vec<_>, _>>()?;
        if fields.len() > k {
            return Err(ld.malformed(nw[0].offset, format!("distribution {name} has more than {k} fields")));
        }
        distributions.push(Distribution { name, fields });
    }
    if distributions.len() > 2 {
        let third = lines.iter().filter(|l| l.keyword == "dist").nth(2).expect("three dist lines");
        return Err(ld.err(third.keyword_offset, SpecErrorKind::TooManyDistributions(distributions.len())));
    }

    let mut claims = Claims::default();
    let known = |name: &str, offset: usize| -> Result<String, SpecError> {
        if distributions.iter().any(|d| d.name == name) {
            Ok(name.to_string())
        } else {
            Err(ld.err(offset, SpecErrorKind::UnknownDistribution(name.to_string())))
        }
    };
    let mut first_claim_offset = None;
    for l in lines.iter().filter(|l| l.keyword == "claim") {
        first_claim_offset.get_or_insert(l.keyword_offset);
        let ws = words(l.rest, l.rest_offset);
        let text = l.rest.trim().to_string();
        match ws.first().map(|w| w.text) {
            Some("slant") => {
                if ws.len() < 3 {
                    return Err(ld.malformed(l.rest_offset, "expected `claim slant <dist> <angle expr>`"));
                }
                let distribution = known(ws[1].text, ws[1].offset)?;
                if claims.slant.iter().any(|c| c.distribution == distribution) {
                    return Err(ld.err(ws[1].offset, SpecErrorKind::Duplicate(format!("slant claim for {distribution}"))));
                }
                let start = ws[2].offset - l.rest_offset;
                let angle = ld.expr(&l.rest[start..], ws[2].offset, &chart)?;
                claims.slant.push(SlantClaim { distribution, angle, text });
            }
            Some("warped") => {
                let shape_ok = ws.len() >= 7
                    && ws[1].text == "base"
                    && ws[3].text == "fiber"
                    && ws[5].text == "f";
                if !shape_ok {
                    return Err(ld.malformed(l.rest_offset, "expected `claim warped base <dist> fiber <dist> f <expr>`"));
                }
                if claims.warped.is_some() {
                    return Err(ld.err(l.keyword_offset, SpecErrorKind::Duplicate("warped claim".into())));
                }
                let base = known(ws[2].text, ws[2].offset)?;
                let fiber = known(ws[4].text, ws[4].offset)?;
                if base == fiber {
                    return Err(ld.malformed(ws[4].offset, "base and fiber must be different distributions"));
                }
                let start = ws[6].offset - l.rest_offset;
                let warping = ld.expr(&l.rest[start..], ws[6].offset, &chart)?;
                claims.warped = Some(WarpedClaim { base, fiber, warping, text });
            }
            _ => return Err(ld.malformed(l.rest_offset, "expected `claim slant ...` or `claim warped ...`")),
        }
    }

    let mu = match single("mu")? {
        Some(l) => Some(ld.expr(l.rest, l.rest_offset, &chart)?),
        None => None,
    };

    let total: usize = distributions.iter().map(Distribution::rank).sum();
    if total > k || (first_claim_offset.is_some() && total != k) {
        let at = first_claim_offset.unwrap_or(end);
        return Err(ld.err(at, SpecErrorKind::RankMismatch { total, dim: k }));
    }

    Ok(ImmersionSpec {
        chart,
        domain,
        ambient,
        components,
        distributions,
        claims,
        mu,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const EX61: &str = "\
ambient 4 signature + + - -
chart u v w
domain u 0.5 2.0 ; v 0.0 6.283185 ; w 0.5 2.0
map w*u*cos(v) , w*u*sin(v) , w*cos(v) , w*sin(v)
dist D1 = du , dw
dist D2 = dv
claim slant D2 acos((u^2-1)/(u^2+1))
claim slant D1 acos(u/sqrt(1+u^2))
claim warped base D1 fiber D2 f sqrt(w^2*(1+u^2))
";

    fn coeff_values(f: &TangentField, p: &[f64]) -> Vec<f64> {
        f.coeffs.iter().map(|c| c.eval(p).unwrap()).collect()
    }

    #[test]
    fn loads_the_four_dimensional_example() {
        let spec = load_spec(EX61).unwrap();
        assert_eq!(spec.chart, vec!["u", "v", "w"]);
        assert_eq!(spec.ambient_dim(), 4);
        #[allow(clippy::approx_constant)]
        let two_pi = 6.283185;
        assert_eq!(spec.domain[1], Interval { lo: 0.0, hi: two_pi });
        assert_eq!(spec.distributions.len(), 2);
        let d1 = &spec.distributions[0];
        assert_eq!(d1.rank(), 2);
        assert_eq!(coeff_values(&d1.fields[0], &[1.0, 1.0, 1.0]), vec![1.0, 0.0, 0.0]);
        assert_eq!(coeff_values(&d1.fields[1], &[1.0, 1.0, 1.0]), vec![0.0, 0.0, 1.0]);
        assert_eq!(spec.claims.slant.len(), 2);
        let w = spec.claims.warped.as_ref().unwrap();
        assert_eq!((w.base.as_str(), w.fiber.as_str()), ("D1", "D2"));
        assert!((w.warping.eval(&[1.0, 0.0, 1.0]).unwrap() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn field_with_expression_coefficients() {
        let text = "\
ambient 4 signature + + - -
chart u v w
domain u 0 1 ; v 0 1 ; w 0 1
map u , v , w , 0
dist D = 2*u*du - dw , du*(1+v) + dv/2 , -(u*dv)
";
        let spec = load_spec(text).unwrap();
        let d = &spec.distributions[0];
        let p = [0.5, 2.0, 0.0];
        assert_eq!(coeff_values(&d.fields[0], &p), vec![1.0, 0.0, -1.0]);
        assert_eq!(coeff_values(&d.fields[1], &p), vec![3.0, 0.5, 0.0]);
        assert_eq!(coeff_values(&d.fields[2], &p), vec![0.0, -0.5, 0.0]);
    }

    #[test]
    fn nonlinear_fields_rejected() {
        let base = "ambient 2 signature + -\nchart u\ndomain u 0 1\nmap u , u^2\n";
        for bad in ["du*du", "sin(du)", "du + 1", "u", "1/du", "du^2"] {
            let err = load_spec(&format!("{base}dist D = {bad}\n")).unwrap_err();
            assert!(matches!(err.kind, SpecErrorKind::NotLinear(_)), "{bad}: {err}");
            assert_eq!(err.line, 5);
        }
    }

    #[test]
    fn rank_deficit_with_claim_rejected() {
        let text = EX61.replace("dist D1 = du , dw", "dist D1 = du");
        let err = load_spec(&text).unwrap_err();
        assert_eq!(err.kind, SpecErrorKind::RankMismatch { total: 2, dim: 3 });
    }

    #[test]
    fn rank_deficit_without_claims_allowed() {
        let text = "ambient 3 signature + - +\nchart u v\ndomain u 0 1 ; v 0 1\nmap u , v , 0\ndist D = du\n";
        assert!(load_spec(text).is_ok());
    }

    #[test]
    fn unknown_distribution_in_claim() {
        let text = EX61.replace("claim slant D2", "claim slant D3");
        let err = load_spec(&text).unwrap_err();
        assert_eq!(err.kind, SpecErrorKind::UnknownDistribution("D3".into()));
        assert_eq!((err.line, err.column), (7, 13));
    }

    #[test]
    fn syntax_error_carries_line_and_column() {
        let text = EX61.replace("w*cos(v) ,", "w*cos(v)) ,");
        let err = load_spec(&text).unwrap_err();
        assert_eq!(err.line, 4);
        // "map w*u*cos(v) , w*u*sin(v) , w*cos(v)" is 38 bytes, the stray ')' is next
        assert_eq!(err.column, 39);
    }

    #[test]
    fn unknown_identifier_in_map() {
        let text = EX61.replace("w*sin(v)\n", "q*sin(v)\n");
        let err = load_spec(&text).unwrap_err();
        assert!(matches!(err.kind, SpecErrorKind::Syntax(ParseErrorKind::UnknownIdentifier(_))));
        assert_eq!(err.line, 4);
    }

    #[test]
    fn component_count_must_match_ambient() {
        let text = EX61.replace(" , w*sin(v)", "");
        assert!(load_spec(&text).is_err());
    }

    #[test]
    fn constant_domain_bounds() {
        let text = EX61.replace("v 0.0 6.283185", "v 0 2*pi");
        let spec = load_spec(&text).unwrap();
        assert_eq!(spec.domain[1].hi, 2.0 * std::f64::consts::PI);
    }

    #[test]
    fn missing_domain_rejected() {
        let text = EX61.replace("; w 0.5 2.0", "");
        assert!(load_spec(&text).is_err());
        let text = "ambient 2 signature + -\nchart u\nmap u , u\n";
        assert_eq!(load_spec(text).unwrap_err().kind, SpecErrorKind::Missing("domain"));
    }

    #[test]
    fn matrix_ambient() {
        let text = "ambient 2 matrix 0 1 1 0\nchart t\ndomain t 0 1\nmap t , 2*t\n";
        let spec = load_spec(text).unwrap();
        assert_eq!(spec.ambient.signature(), None);
        let bad = "ambient 2 matrix 1 0 0 1\nchart t\ndomain t 0 1\nmap t , 2*t\n";
        assert!(matches!(load_spec(bad).unwrap_err().kind, SpecErrorKind::Structure(_)));
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = format!("# header\n\n{}mu log(w) # potential\n", EX61);
        let spec = load_spec(&text).unwrap();
        assert!(spec.mu.is_some());
    }

    #[test]
    fn three_distributions_rejected() {
        let text = "ambient 4 signature + + - -\nchart u v w\ndomain u 0 1 ; v 0 1 ; w 0 1\nmap u , v , w , 0\ndist A = du\ndist B = dv\ndist C = dw\n";
        assert_eq!(load_spec(text).unwrap_err().kind, SpecErrorKind::TooManyDistributions(3));
    }

    #[test]
    fn unknown_directive() {
        let err = load_spec("ambiant 2 signature + -\n").unwrap_err();
        assert_eq!((err.line, err.column), (1, 1));
    }
}
