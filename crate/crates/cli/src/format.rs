//! The chart and pages file formats.
//!
//! Both formats are line-oriented: one record per line, `#` comments, LF
//! endings, no trailing space. Writing is canonical (records sorted), so
//! `parse ∘ write` is the identity on canonical documents and
//! `write ∘ parse` canonicalizes any valid document idempotently.
//!
//! Chart grammar, one record per line:
//!
//! ```text
//! synchart 1 synthetic|classical
//! truncate inf|K
//! window S0..S1 F0..F1
//! class NAME STEM SYNDEG [detector=ELT] [rel=TEXT]...
//! gen NAME STEM FILT
//! prod LEFT RIGHT = SUM
//! diff R SOURCE [@S,F,D] = l^K TARGET      (synthetic; K = R-1 enforced)
//! diff R SOURCE [@S,F,D] = 0
//! ext KIND [l^E] SOURCE [@S,F,D] = l^J TARGET | 0
//! bracket (E,E,E) home=(S,D) detector=ELT|0|0|ELT indet=TEXT
//! cell COMPLEX IDX STEM SYNDEG
//! attach COMPLEX UPPER LOWER [l^K]CLASS
//! ```
//!
//! `SUM` is `0` or `+`-joined generator names; `ELT` is `[l^K]SUM` in one
//! token; bracket entries are `*`-joined class references with an optional
//! `l^K` prefix, where `{x}` means a class detected by the chart element `x`.

use std::fmt;

use synss_core::chart::{
    BracketDetector, BracketEntry, BracketFactor, BracketRecord, CellComplex, Chart, ChartKind,
    ClassDecl, DifferentialRecord, ExtensionRecord, LambdaElement, ProductRecord, Support,
    Truncation,
};
use synss_core::degree::{TriDegree, Window};
use synss_core::pages::{CensusEntry, Order, PageState, RunOutcome};

/// Syntax or semantic error with a 1-based line and column.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.col, self.message)
    }
}

impl std::error::Error for ParseError {}

fn err<T>(line: usize, col: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { line, col, message: message.into() })
}

/// One logical line: tokens with their 1-based starting columns.
struct Tokens<'a> {
    line: usize,
    toks: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn split(line_no: usize, text: &'a str) -> Self {
        let mut toks = Vec::new();
        let mut col = 1;
        let mut start = None;
        for (i, ch) in text.char_indices() {
            if ch.is_whitespace() {
                if let Some((s, c)) = start.take() {
                    toks.push((c, &text[s..i]));
                }
            } else if start.is_none() {
                start = Some((i, col));
            }
            col += 1;
        }
        if let Some((s, c)) = start {
            toks.push((c, &text[s..]));
        }
        Tokens { line: line_no, toks, pos: 0 }
    }

    fn peek(&self) -> Option<(usize, &'a str)> {
        self.toks.get(self.pos).copied()
    }

    fn next(&mut self, what: &str) -> Result<(usize, &'a str), ParseError> {
        match self.toks.get(self.pos) {
            Some(&t) => {
                self.pos += 1;
                Ok(t)
            }
            None => {
                let col = self.toks.last().map(|(c, t)| c + t.len()).unwrap_or(1);
                err(self.line, col, format!("expected {what}"))
            }
        }
    }

    fn expect(&mut self, literal: &str) -> Result<(), ParseError> {
        let (col, t) = self.next(&format!("`{literal}`"))?;
        if t != literal {
            return err(self.line, col, format!("expected `{literal}`, found `{t}`"));
        }
        Ok(())
    }

    fn int(&mut self, what: &str) -> Result<i32, ParseError> {
        let (col, t) = self.next(what)?;
        t.parse::<i32>()
            .map_err(|_| ParseError { line: self.line, col, message: format!("expected {what}, found `{t}`") })
    }

    fn uint(&mut self, what: &str) -> Result<u32, ParseError> {
        let (col, t) = self.next(what)?;
        t.parse::<u32>()
            .map_err(|_| ParseError { line: self.line, col, message: format!("expected {what}, found `{t}`") })
    }

    fn rest_is_empty(&mut self) -> Result<(), ParseError> {
        if let Some((col, t)) = self.peek() {
            return err(self.line, col, format!("unexpected trailing `{t}`"));
        }
        Ok(())
    }
}

fn valid_name(s: &str) -> bool {
    let mut chars = s.chars();
    let Some(first) = chars.next() else { return false };
    if !first.is_ascii_alphabetic() {
        return false;
    }
    if s.starts_with("l^") {
        return false;
    }
    s.chars()
        .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '\'' | '^' | '.' | '-'))
}

fn parse_name(line: usize, col: usize, tok: &str) -> Result<String, ParseError> {
    if valid_name(tok) {
        Ok(tok.to_string())
    } else {
        err(line, col, format!("`{tok}` is not a valid name"))
    }
}

/// `A+B+C` or `0`.
fn parse_sum(line: usize, col: usize, tok: &str) -> Result<Support, ParseError> {
    if tok == "0" {
        return Ok(Support::zero());
    }
    let mut names = Vec::new();
    let mut offset = 0;
    for part in tok.split('+') {
        names.push(parse_name(line, col + offset, part)?);
        offset += part.len() + 1;
    }
    Ok(Support::from_names(names))
}

/// `l^K` split into the exponent, or `None` when the token is not a
/// coefficient.
fn coefficient(tok: &str) -> Option<Result<u32, ()>> {
    let rest = tok.strip_prefix("l^")?;
    Some(rest.parse::<u32>().map_err(|_| ()))
}

/// `[l^K]SUM` in one token.
fn parse_element(line: usize, col: usize, tok: &str) -> Result<LambdaElement, ParseError> {
    if tok == "0" {
        return Ok(LambdaElement::zero());
    }
    if let Some(stripped) = tok.strip_prefix("l^") {
        let digits: String = stripped.chars().take_while(|c| c.is_ascii_digit()).collect();
        if digits.is_empty() {
            return err(line, col, format!("`{tok}` has no exponent after l^"));
        }
        let exp: u32 = digits
            .parse()
            .map_err(|_| ParseError { line, col, message: format!("bad exponent in `{tok}`") })?;
        let rest = &stripped[digits.len()..];
        if rest.is_empty() {
            return err(line, col, format!("`{tok}` has no element after the coefficient"));
        }
        let support = parse_sum(line, col + 2 + digits.len(), rest)?;
        Ok(LambdaElement::new(exp, support))
    } else {
        Ok(LambdaElement::new(0, parse_sum(line, col, tok)?))
    }
}

fn write_element(e: &LambdaElement) -> String {
    if e.is_zero() {
        "0".into()
    } else if e.exp == 0 {
        format!("{}", e.support)
    } else {
        format!("l^{}{}", e.exp, e.support)
    }
}

/// `@S,F,D`
fn parse_declared(line: usize, col: usize, tok: &str) -> Result<TriDegree, ParseError> {
    let body = tok.strip_prefix('@').expect("caller checked");
    let parts: Vec<&str> = body.split(',').collect();
    if parts.len() != 3 {
        return err(line, col, format!("`{tok}` must be @S,F,D"));
    }
    let mut nums = [0i32; 3];
    for (i, p) in parts.iter().enumerate() {
        nums[i] = p
            .parse()
            .map_err(|_| ParseError { line, col, message: format!("bad number `{p}` in `{tok}`") })?;
    }
    Ok(TriDegree::new(nums[0], nums[1], nums[2]))
}

/// `S0..S1`
fn parse_range(line: usize, col: usize, tok: &str) -> Result<(i32, i32), ParseError> {
    let Some((a, b)) = tok.split_once("..") else {
        return err(line, col, format!("`{tok}` must be LO..HI"));
    };
    let lo = a
        .parse()
        .map_err(|_| ParseError { line, col, message: format!("bad number `{a}`") })?;
    let hi = b
        .parse()
        .map_err(|_| ParseError { line, col, message: format!("bad number `{b}`") })?;
    Ok((lo, hi))
}

/// One bracket entry: `[l^K]FACTOR(*FACTOR)*` with `{x}` detected-class
/// factors.
fn parse_bracket_entry(line: usize, col: usize, tok: &str) -> Result<BracketEntry, ParseError> {
    let (exp, rest) = if let Some(stripped) = tok.strip_prefix("l^") {
        let digits: String = stripped.chars().take_while(|c| c.is_ascii_digit()).collect();
        if digits.is_empty() {
            return err(line, col, format!("`{tok}` has no exponent after l^"));
        }
        let exp: u32 = digits
            .parse()
            .map_err(|_| ParseError { line, col, message: format!("bad exponent in `{tok}`") })?;
        (exp, &stripped[digits.len()..])
    } else {
        (0, tok)
    };
    if rest.is_empty() {
        return err(line, col, "empty bracket entry");
    }
    let mut factors = Vec::new();
    for part in rest.split('*') {
        if let Some(inner) = part.strip_prefix('{') {
            let Some(name) = inner.strip_suffix('}') else {
                return err(line, col, format!("unclosed brace in `{part}`"));
            };
            factors.push(BracketFactor::Detected(parse_name(line, col, name)?));
        } else {
            factors.push(BracketFactor::Class(parse_name(line, col, part)?));
        }
    }
    Ok(BracketEntry { exp, factors })
}

fn write_bracket_entry(e: &BracketEntry) -> String {
    let factors: Vec<String> = e.factors.iter().map(|f| f.to_string()).collect();
    let body = factors.join("*");
    if e.exp > 0 {
        format!("l^{}{body}", e.exp)
    } else {
        body
    }
}

/// Parse a chart document.
pub fn parse_chart(text: &str) -> Result<Chart, ParseError> {
    let mut chart: Option<Chart> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let stripped = raw.trim_end();
        if stripped.trim().is_empty() || stripped.trim_start().starts_with('#') {
            continue;
        }
        let mut t = Tokens::split(line_no, stripped);
        let (kcol, keyword) = t.next("a record keyword")?;
        if chart.is_none() {
            if keyword != "synchart" {
                return err(line_no, kcol, "document must start with a `synchart` header");
            }
            let (vcol, version) = t.next("format version")?;
            if version != "1" {
                return err(line_no, vcol, format!("unsupported format version `{version}`"));
            }
            let (mcol, mode) = t.next("`classical` or `synthetic`")?;
            let kind = match mode {
                "classical" => ChartKind::Classical,
                "synthetic" => ChartKind::Synthetic,
                other => return err(line_no, mcol, format!("unknown chart mode `{other}`")),
            };
            t.rest_is_empty()?;
            chart = Some(Chart::new(kind));
            continue;
        }
        let chart = chart.as_mut().unwrap();
        match keyword {
            "truncate" => {
                let (vcol, v) = t.next("`inf` or a positive integer")?;
                chart.truncation = if v == "inf" {
                    Truncation::Infinite
                } else {
                    let k: u32 = v.parse().map_err(|_| ParseError {
                        line: line_no,
                        col: vcol,
                        message: format!("bad truncation `{v}`"),
                    })?;
                    if k == 0 {
                        return err(line_no, vcol, "truncation must be at least 1");
                    }
                    Truncation::Finite(k)
                };
                t.rest_is_empty()?;
            }
            "window" => {
                let (c1, r1) = t.next("stem range")?;
                let (s0, s1) = parse_range(line_no, c1, r1)?;
                let (c2, r2) = t.next("filtration range")?;
                let (f0, f1) = parse_range(line_no, c2, r2)?;
                chart.window = Some(Window::new(s0, s1, f0, f1));
                t.rest_is_empty()?;
            }
            "gen" => {
                let (ncol, ntok) = t.next("generator name")?;
                let name = parse_name(line_no, ncol, ntok)?;
                let stem = t.int("stem")?;
                let filt = t.int("filtration")?;
                t.rest_is_empty()?;
                chart.add_generator(&name, stem, filt);
            }
            "prod" => {
                let (c1, t1) = t.next("left factor")?;
                let left = parse_name(line_no, c1, t1)?;
                let (c2, t2) = t.next("right factor")?;
                let right = parse_name(line_no, c2, t2)?;
                t.expect("=")?;
                let (c3, t3) = t.next("result sum")?;
                let result = parse_sum(line_no, c3, t3)?;
                t.rest_is_empty()?;
                chart.products.push(ProductRecord { left, right, result });
            }
            "diff" => {
                let page = t.uint("page")?;
                if page < 2 {
                    return err(line_no, kcol, "differential page must be at least 2");
                }
                let (scol, stok) = t.next("source sum")?;
                let source = parse_sum(line_no, scol, stok)?;
                let mut declared = None;
                let (mut c, mut tok) = t.next("`=`")?;
                if tok.starts_with('@') {
                    declared = Some(parse_declared(line_no, c, tok)?);
                    (c, tok) = t.next("`=`")?;
                }
                if tok != "=" {
                    return err(line_no, c, format!("expected `=`, found `{tok}`"));
                }
                let (vcol, vtok) = t.next("target")?;
                let (coefficient_exp, target) = match coefficient(vtok) {
                    Some(Ok(k)) => {
                        if chart.kind == ChartKind::Classical {
                            return err(
                                line_no,
                                vcol,
                                "classical differentials carry no lambda coefficient",
                            );
                        }
                        if k != page - 1 {
                            return err(
                                line_no,
                                vcol,
                                format!("lambda exponent must equal r-1: found {k}, expected {}", page - 1),
                            );
                        }
                        let (tcol, ttok) = t.next("target sum")?;
                        (k, parse_sum(line_no, tcol, ttok)?)
                    }
                    Some(Err(())) => return err(line_no, vcol, format!("bad coefficient `{vtok}`")),
                    None => {
                        let target = parse_sum(line_no, vcol, vtok)?;
                        if chart.kind == ChartKind::Synthetic && !target.is_zero() {
                            return err(
                                line_no,
                                vcol,
                                "synthetic differentials need an explicit l^K coefficient",
                            );
                        }
                        let exp = match chart.kind {
                            ChartKind::Classical => 0,
                            ChartKind::Synthetic => page - 1,
                        };
                        (exp, target)
                    }
                };
                t.rest_is_empty()?;
                chart.differentials.push(DifferentialRecord {
                    page,
                    source,
                    coefficient_exp,
                    target,
                    declared,
                });
            }
            "ext" => {
                let (ccol, ctok) = t.next("class kind")?;
                let kind = parse_name(line_no, ccol, ctok)?;
                let (mut c, mut tok) = t.next("source")?;
                let mut source_exp = 0;
                if let Some(k) = coefficient(tok) {
                    source_exp = k.map_err(|_| ParseError {
                        line: line_no,
                        col: c,
                        message: format!("bad coefficient `{tok}`"),
                    })?;
                    (c, tok) = t.next("source sum")?;
                }
                let source = LambdaElement::new(source_exp, parse_sum(line_no, c, tok)?);
                let mut declared = None;
                let (mut c2, mut tok2) = t.next("`=`")?;
                if tok2.starts_with('@') {
                    declared = Some(parse_declared(line_no, c2, tok2)?);
                    (c2, tok2) = t.next("`=`")?;
                }
                if tok2 != "=" {
                    return err(line_no, c2, format!("expected `=`, found `{tok2}`"));
                }
                let (vcol, vtok) = t.next("target")?;
                let target = match coefficient(vtok) {
                    Some(Ok(j)) => {
                        let (tcol, ttok) = t.next("target sum")?;
                        LambdaElement::new(j, parse_sum(line_no, tcol, ttok)?)
                    }
                    Some(Err(())) => return err(line_no, vcol, format!("bad coefficient `{vtok}`")),
                    None => LambdaElement::new(0, parse_sum(line_no, vcol, vtok)?),
                };
                t.rest_is_empty()?;
                chart.extensions.push(ExtensionRecord { kind, source, target, declared });
            }
            "class" => {
                let (ncol, ntok) = t.next("class name")?;
                let name = parse_name(line_no, ncol, ntok)?;
                let stem = t.int("stem")?;
                let syndeg = t.int("synthetic degree")?;
                let mut detector = None;
                let mut relations = Vec::new();
                while let Some((acol, attr)) = t.peek() {
                    t.pos += 1;
                    if let Some(v) = attr.strip_prefix("detector=") {
                        detector = Some(parse_element(line_no, acol + 9, v)?);
                    } else if let Some(v) = attr.strip_prefix("rel=") {
                        relations.push(v.to_string());
                    } else {
                        return err(line_no, acol, format!("unknown class attribute `{attr}`"));
                    }
                }
                chart
                    .classes
                    .insert(name.clone(), ClassDecl { name, stem, syndeg, detector, relations });
            }
            "bracket" => {
                let (ecol, etok) = t.next("(A,B,C)")?;
                let Some(inner) = etok.strip_prefix('(').and_then(|s| s.strip_suffix(')')) else {
                    return err(line_no, ecol, "bracket entries must be parenthesized");
                };
                let mut entries = Vec::new();
                for part in inner.split(',') {
                    entries.push(parse_bracket_entry(line_no, ecol, part)?);
                }
                let (hcol, htok) = t.next("home=(S,D)")?;
                let Some(hbody) =
                    htok.strip_prefix("home=(").and_then(|s| s.strip_suffix(')'))
                else {
                    return err(line_no, hcol, "expected home=(S,D)");
                };
                let hparts: Vec<&str> = hbody.split(',').collect();
                if hparts.len() != 2 {
                    return err(line_no, hcol, "expected home=(S,D)");
                }
                let hs: i32 = hparts[0].parse().map_err(|_| ParseError {
                    line: line_no,
                    col: hcol,
                    message: format!("bad home stem `{}`", hparts[0]),
                })?;
                let hd: i32 = hparts[1].parse().map_err(|_| ParseError {
                    line: line_no,
                    col: hcol,
                    message: format!("bad home degree `{}`", hparts[1]),
                })?;
                let (dcol, dtok) = t.next("detector=...")?;
                let Some(dval) = dtok.strip_prefix("detector=") else {
                    return err(line_no, dcol, "expected detector=...");
                };
                let detector = if dval == "0" {
                    BracketDetector::Zero
                } else if let Some(alt) = dval.strip_prefix("0|") {
                    BracketDetector::ZeroOr(parse_element(line_no, dcol + 11, alt)?)
                } else {
                    BracketDetector::Element(parse_element(line_no, dcol + 9, dval)?)
                };
                let (icol, itok) = t.next("indet=...")?;
                let Some(ival) = itok.strip_prefix("indet=") else {
                    return err(line_no, icol, "expected indet=...");
                };
                let mut itext = ival.to_string();
                while let Some((_, more)) = t.peek() {
                    t.pos += 1;
                    itext.push(' ');
                    itext.push_str(more);
                }
                let indet = if itext == "0" {
                    synss_core::chart::Indeterminacy::Zero
                } else if itext == "?" {
                    synss_core::chart::Indeterminacy::Unknown
                } else if let Ok(e) = parse_element(line_no, icol + 6, &itext) {
                    synss_core::chart::Indeterminacy::Element(e)
                } else {
                    synss_core::chart::Indeterminacy::Text(itext)
                };
                chart.brackets.push(BracketRecord { entries, home: (hs, hd), detector, indet });
            }
            "cell" => {
                let (ncol, ntok) = t.next("complex name")?;
                let name = parse_name(line_no, ncol, ntok)?;
                let idx = t.uint("cell index")? as usize;
                let stem = t.int("stem")?;
                let syndeg = t.int("synthetic degree")?;
                t.rest_is_empty()?;
                let cx = find_or_insert_complex(chart, &name);
                if cx.cells.len() != idx {
                    return err(
                        line_no,
                        ncol,
                        format!("cell index {idx} out of order (expected {})", cx.cells.len()),
                    );
                }
                cx.cells.push((stem, syndeg));
            }
            "attach" => {
                let (ncol, ntok) = t.next("complex name")?;
                let name = parse_name(line_no, ncol, ntok)?;
                let upper = t.uint("upper cell index")? as usize;
                let lower = t.uint("lower cell index")? as usize;
                let (ccol, ctok) = t.next("class reference")?;
                let elt = parse_element(line_no, ccol, ctok)?;
                if elt.support.len() != 1 {
                    return err(line_no, ccol, "attachment must be a single class reference");
                }
                t.rest_is_empty()?;
                let class = elt.support.names()[0].clone();
                let cx = find_or_insert_complex(chart, &name);
                cx.attachments.push((upper, lower, elt.exp, class));
            }
            other => return err(line_no, kcol, format!("unknown record keyword `{other}`")),
        }
    }
    let mut chart = chart.ok_or(ParseError {
        line: text.lines().count().max(1),
        col: 1,
        message: "empty document: missing `synchart` header".into(),
    })?;
    chart.canonicalize();
    Ok(chart)
}

fn find_or_insert_complex<'a>(chart: &'a mut Chart, name: &str) -> &'a mut CellComplex {
    if let Some(i) = chart.complexes.iter().position(|c| c.name == name) {
        &mut chart.complexes[i]
    } else {
        chart.complexes.push(CellComplex {
            name: name.to_string(),
            cells: Vec::new(),
            attachments: Vec::new(),
        });
        chart.complexes.last_mut().unwrap()
    }
}

/// Canonical text form of a chart. Parsing the output reproduces the chart
/// byte-for-byte on re-writing.
pub fn write_chart(chart: &Chart) -> String {
    let mut chart = chart.clone();
    chart.canonicalize();
    let mut out = String::new();
    out.push_str(&format!("synchart 1 {}\n", chart.kind));
    out.push_str(&format!("truncate {}\n", chart.truncation));
    if let Some(w) = chart.window {
        out.push_str(&format!("window {w}\n"));
    }
    let mut classes: Vec<&ClassDecl> = chart.classes.values().collect();
    classes.sort_by(|a, b| a.name.cmp(&b.name));
    for c in classes {
        out.push_str(&format!("class {} {} {}", c.name, c.stem, c.syndeg));
        if let Some(d) = &c.detector {
            out.push_str(&format!(" detector={}", write_element(d)));
        }
        for r in &c.relations {
            out.push_str(&format!(" rel={r}"));
        }
        out.push('\n');
    }
    let mut gens: Vec<_> = chart.generators.values().collect();
    gens.sort_by_key(|g| (g.stem, g.filt, g.name.clone()));
    for g in gens {
        out.push_str(&format!("gen {} {} {}\n", g.name, g.stem, g.filt));
    }
    for p in &chart.products {
        out.push_str(&format!("prod {} {} = {}\n", p.left, p.right, p.result));
    }
    for d in &chart.differentials {
        out.push_str(&format!("diff {} {}", d.page, d.source));
        if let Some(t) = d.declared {
            out.push_str(&format!(" @{},{},{}", t.stem, t.filt, t.syndeg));
        }
        if d.target.is_zero() {
            out.push_str(" = 0\n");
        } else if chart.kind == ChartKind::Classical {
            out.push_str(&format!(" = {}\n", d.target));
        } else {
            out.push_str(&format!(" = l^{} {}\n", d.coefficient_exp, d.target));
        }
    }
    for x in &chart.extensions {
        out.push_str(&format!("ext {} ", x.kind));
        if x.source.exp > 0 {
            out.push_str(&format!("l^{} ", x.source.exp));
        }
        out.push_str(&format!("{}", x.source.support));
        if let Some(t) = x.declared {
            out.push_str(&format!(" @{},{},{}", t.stem, t.filt, t.syndeg));
        }
        if x.target.is_zero() {
            out.push_str(" = 0\n");
        } else if x.target.exp == 0 {
            out.push_str(&format!(" = {}\n", x.target.support));
        } else {
            out.push_str(&format!(" = l^{} {}\n", x.target.exp, x.target.support));
        }
    }
    for b in &chart.brackets {
        let entries: Vec<String> = b.entries.iter().map(write_bracket_entry).collect();
        out.push_str(&format!("bracket ({})", entries.join(",")));
        out.push_str(&format!(" home=({},{})", b.home.0, b.home.1));
        match &b.detector {
            BracketDetector::Zero => out.push_str(" detector=0"),
            BracketDetector::Element(e) => out.push_str(&format!(" detector={}", write_element(e))),
            BracketDetector::ZeroOr(e) => out.push_str(&format!(" detector=0|{}", write_element(e))),
        }
        match &b.indet {
            synss_core::chart::Indeterminacy::Zero => out.push_str(" indet=0\n"),
            synss_core::chart::Indeterminacy::Unknown => out.push_str(" indet=?\n"),
            synss_core::chart::Indeterminacy::Element(e) => {
                out.push_str(&format!(" indet={}\n", write_element(e)))
            }
            synss_core::chart::Indeterminacy::Text(t) => out.push_str(&format!(" indet={t}\n")),
        }
    }
    for cx in &chart.complexes {
        for (i, (s, d)) in cx.cells.iter().enumerate() {
            out.push_str(&format!("cell {} {} {} {}\n", cx.name, i, s, d));
        }
        for (u, l, exp, class) in &cx.attachments {
            let elt = if *exp > 0 { format!("l^{exp}{class}") } else { class.clone() };
            out.push_str(&format!("attach {} {} {} {}\n", cx.name, u, l, elt));
        }
    }
    out
}

/// One `E∞` summand line of a pages document.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PageSummand {
    pub stem: i32,
    pub filt: i32,
    pub exp: u32,
    pub support: Support,
    pub order: Order,
    pub tag: Option<String>,
}

/// A census line pairing a classical differential with its torsion summand.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CensusLine {
    pub page: u32,
    pub source_bidegree: (i32, i32),
    pub source: Support,
    pub target: Support,
}

/// A non-hidden 2-divisibility link: `h0 ·` carries the summand at
/// `(stem, filt)` to the summand one filtration up.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LinkLine {
    pub stem: i32,
    pub filt: i32,
    pub from: Support,
    pub to: Support,
}

/// A pages document: the `E∞` data the `groups` and `render` commands
/// consume.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PagesDoc {
    pub truncation: Truncation,
    pub window: Option<Window>,
    pub r_max: u32,
    pub summands: Vec<PageSummand>,
    pub census: Vec<CensusLine>,
    pub links: Vec<LinkLine>,
}

impl PagesDoc {
    /// Extract from a finished run; `h0` links are derived from the chart's
    /// products restricted to surviving free summands.
    pub fn from_run(outcome: &RunOutcome, chart: &Chart) -> PagesDoc {
        let state = &outcome.state;
        let mut summands = Vec::new();
        for (s, f) in state.bidegrees() {
            for sm in state.module_at(s, f) {
                summands.push(PageSummand {
                    stem: s,
                    filt: f,
                    exp: sm.exp,
                    support: sm.support.clone(),
                    order: sm.order,
                    tag: None,
                });
            }
        }
        let census = outcome
            .census
            .iter()
            .map(|e: &CensusEntry| CensusLine {
                page: e.page,
                source_bidegree: e.source_bidegree,
                source: e.source.clone(),
                target: e.target.clone(),
            })
            .collect();
        let links = derive_h0_links(state, chart);
        PagesDoc {
            truncation: state.truncation,
            window: state.window,
            r_max: state.r_max,
            summands,
            census,
            links,
        }
    }

    pub fn free_summands_in_stem(&self, stem: i32, tag: Option<&str>) -> Vec<(i32, Support)> {
        self.summands
            .iter()
            .filter(|s| {
                s.stem == stem
                    && s.order == Order::Free
                    && tag.map_or(true, |t| s.tag.as_deref() == Some(t))
            })
            .map(|s| (s.filt, s.support.clone()))
            .collect()
    }
}

/// `h0`-product links between surviving free summands.
fn derive_h0_links(state: &PageState, chart: &Chart) -> Vec<LinkLine> {
    if !chart.generators.contains_key("h0") {
        return Vec::new();
    }
    let h0 = Support::singleton("h0");
    let mut links = Vec::new();
    for (s, f) in state.bidegrees() {
        for sm in state.module_at(s, f) {
            if sm.order != Order::Free || sm.exp != 0 {
                continue;
            }
            let Some(product) = chart.multiply(&h0, &sm.support) else { continue };
            if product.is_zero() {
                continue;
            }
            let above = state.module_at(s, f + 1);
            let hit = above
                .iter()
                .any(|t| t.order == Order::Free && t.exp == 0 && t.support == product);
            if hit {
                links.push(LinkLine {
                    stem: s,
                    filt: f,
                    from: sm.support.clone(),
                    to: product,
                });
            }
        }
    }
    links
}

/// Canonical text form of a pages document.
pub fn write_pages(doc: &PagesDoc) -> String {
    let mut doc = doc.clone();
    doc.summands.sort_by(|a, b| {
        (a.stem, a.filt, &a.support, a.exp).cmp(&(b.stem, b.filt, &b.support, b.exp))
    });
    doc.census.sort_by(|a, b| {
        (a.page, a.source_bidegree, &a.source).cmp(&(b.page, b.source_bidegree, &b.source))
    });
    doc.links
        .sort_by(|a, b| (a.stem, a.filt, &a.from).cmp(&(b.stem, b.filt, &b.from)));
    let mut out = String::new();
    out.push_str("synpages 1\n");
    out.push_str(&format!("truncate {}\n", doc.truncation));
    if let Some(w) = doc.window {
        out.push_str(&format!("window {w}\n"));
    }
    out.push_str(&format!("rmax {}\n", doc.r_max));
    for s in &doc.summands {
        out.push_str(&format!("summand {} {} ", s.stem, s.filt));
        match s.order {
            Order::Free => out.push_str("free"),
            Order::Torsion(k) => out.push_str(&format!("tors {k}")),
        }
        if s.exp > 0 {
            out.push_str(&format!(" l^{}", s.exp));
        }
        out.push_str(&format!(" {}", s.support));
        if let Some(tag) = &s.tag {
            out.push_str(&format!(" tag={tag}"));
        }
        out.push('\n');
    }
    for c in &doc.census {
        out.push_str(&format!(
            "census {} {} {} {} -> {}\n",
            c.page, c.source_bidegree.0, c.source_bidegree.1, c.source, c.target
        ));
    }
    for l in &doc.links {
        out.push_str(&format!("link {} {} {} -> {}\n", l.stem, l.filt, l.from, l.to));
    }
    out
}

/// Parse a pages document.
pub fn parse_pages(text: &str) -> Result<PagesDoc, ParseError> {
    let mut doc: Option<PagesDoc> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let stripped = raw.trim_end();
        if stripped.trim().is_empty() || stripped.trim_start().starts_with('#') {
            continue;
        }
        let mut t = Tokens::split(line_no, stripped);
        let (kcol, keyword) = t.next("a record keyword")?;
        if doc.is_none() {
            if keyword != "synpages" {
                return err(line_no, kcol, "document must start with a `synpages` header");
            }
            let (vcol, version) = t.next("format version")?;
            if version != "1" {
                return err(line_no, vcol, format!("unsupported format version `{version}`"));
            }
            t.rest_is_empty()?;
            doc = Some(PagesDoc {
                truncation: Truncation::Infinite,
                window: None,
                r_max: 2,
                summands: Vec::new(),
                census: Vec::new(),
                links: Vec::new(),
            });
            continue;
        }
        let doc = doc.as_mut().unwrap();
        match keyword {
            "truncate" => {
                let (vcol, v) = t.next("`inf` or a positive integer")?;
                doc.truncation = if v == "inf" {
                    Truncation::Infinite
                } else {
                    Truncation::Finite(v.parse().map_err(|_| ParseError {
                        line: line_no,
                        col: vcol,
                        message: format!("bad truncation `{v}`"),
                    })?)
                };
            }
            "window" => {
                let (c1, r1) = t.next("stem range")?;
                let (s0, s1) = parse_range(line_no, c1, r1)?;
                let (c2, r2) = t.next("filtration range")?;
                let (f0, f1) = parse_range(line_no, c2, r2)?;
                doc.window = Some(Window::new(s0, s1, f0, f1));
            }
            "rmax" => {
                doc.r_max = t.uint("page bound")?;
            }
            "summand" => {
                let stem = t.int("stem")?;
                let filt = t.int("filtration")?;
                let (ocol, otok) = t.next("`free` or `tors`")?;
                let order = match otok {
                    "free" => Order::Free,
                    "tors" => Order::Torsion(t.uint("torsion order")?),
                    other => return err(line_no, ocol, format!("expected `free` or `tors`, found `{other}`")),
                };
                let (mut scol, mut stok) = t.next("support sum")?;
                let mut exp = 0;
                if let Some(k) = coefficient(stok) {
                    exp = k.map_err(|_| ParseError {
                        line: line_no,
                        col: scol,
                        message: format!("bad coefficient `{stok}`"),
                    })?;
                    (scol, stok) = t.next("support sum")?;
                }
                let support = parse_sum(line_no, scol, stok)?;
                let mut tag = None;
                if let Some((acol, attr)) = t.peek() {
                    t.pos += 1;
                    match attr.strip_prefix("tag=") {
                        Some(v) => tag = Some(v.to_string()),
                        None => return err(line_no, acol, format!("unknown attribute `{attr}`")),
                    }
                }
                t.rest_is_empty()?;
                doc.summands.push(PageSummand { stem, filt, exp, support, order, tag });
            }
            "census" => {
                let page = t.uint("page")?;
                let stem = t.int("source stem")?;
                let filt = t.int("source filtration")?;
                let (scol, stok) = t.next("source sum")?;
                let source = parse_sum(line_no, scol, stok)?;
                t.expect("->")?;
                let (tcol, ttok) = t.next("target sum")?;
                let target = parse_sum(line_no, tcol, ttok)?;
                t.rest_is_empty()?;
                doc.census.push(CensusLine { page, source_bidegree: (stem, filt), source, target });
            }
            "link" => {
                let stem = t.int("stem")?;
                let filt = t.int("filtration")?;
                let (scol, stok) = t.next("source sum")?;
                let from = parse_sum(line_no, scol, stok)?;
                t.expect("->")?;
                let (tcol, ttok) = t.next("target sum")?;
                let to = parse_sum(line_no, tcol, ttok)?;
                t.rest_is_empty()?;
                doc.links.push(LinkLine { stem, filt, from, to });
            }
            other => return err(line_no, kcol, format!("unknown record keyword `{other}`")),
        }
    }
    doc.ok_or(ParseError {
        line: text.lines().count().max(1),
        col: 1,
        message: "empty document: missing `synpages` header".into(),
    })
}

/// JSON mirror of a chart; the text form stays the source of truth.
pub fn chart_to_json(chart: &Chart) -> serde_json::Value {
    use serde_json::json;
    let mut chart = chart.clone();
    chart.canonicalize();
    json!({
        "format": "synchart",
        "version": 1,
        "mode": chart.kind.to_string(),
        "truncate": chart.truncation.to_string(),
        "window": chart.window.map(|w| json!([w.s_min, w.s_max, w.f_min, w.f_max])),
        "generators": chart.generators.values().map(|g| json!({
            "name": g.name, "stem": g.stem, "filt": g.filt,
        })).collect::<Vec<_>>(),
        "classes": chart.classes.values().map(|c| json!({
            "name": c.name, "stem": c.stem, "syndeg": c.syndeg,
            "detector": c.detector.as_ref().map(write_element),
            "relations": c.relations,
        })).collect::<Vec<_>>(),
        "products": chart.products.iter().map(|p| json!({
            "left": p.left, "right": p.right, "result": p.result.to_string(),
        })).collect::<Vec<_>>(),
        "differentials": chart.differentials.iter().map(|d| json!({
            "page": d.page,
            "source": d.source.to_string(),
            "coefficient": format!("l^{}", d.coefficient_exp),
            "target": d.target.to_string(),
            "declared": d.declared.map(|t| json!([t.stem, t.filt, t.syndeg])),
        })).collect::<Vec<_>>(),
        "extensions": chart.extensions.iter().map(|x| json!({
            "kind": x.kind,
            "source": write_element(&x.source),
            "target": write_element(&x.target),
            "declared": x.declared.map(|t| json!([t.stem, t.filt, t.syndeg])),
        })).collect::<Vec<_>>(),
        "brackets": chart.brackets.iter().map(|b| json!({
            "entries": b.entries.iter().map(write_bracket_entry).collect::<Vec<_>>(),
            "home": [b.home.0, b.home.1],
        })).collect::<Vec<_>>(),
        "complexes": chart.complexes.iter().map(|cx| json!({
            "name": cx.name,
            "cells": cx.cells.iter().map(|c| json!([c.0, c.1])).collect::<Vec<_>>(),
            "attachments": cx.attachments.iter().map(|(u, l, e, c)| json!({
                "upper": u, "lower": l, "exp": e, "class": c,
            })).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    })
}

/// JSON mirror of a pages document.
pub fn pages_to_json(doc: &PagesDoc) -> serde_json::Value {
    use serde_json::json;
    json!({
        "format": "synpages",
        "version": 1,
        "truncate": doc.truncation.to_string(),
        "window": doc.window.map(|w| json!([w.s_min, w.s_max, w.f_min, w.f_max])),
        "rmax": doc.r_max,
        "summands": doc.summands.iter().map(|s| json!({
            "stem": s.stem, "filt": s.filt, "exp": s.exp,
            "support": s.support.to_string(),
            "order": s.order.to_string(),
            "tag": s.tag,
        })).collect::<Vec<_>>(),
        "census": doc.census.iter().map(|c| json!({
            "page": c.page,
            "source_stem": c.source_bidegree.0,
            "source_filt": c.source_bidegree.1,
            "source": c.source.to_string(),
            "target": c.target.to_string(),
        })).collect::<Vec<_>>(),
        "links": doc.links.iter().map(|l| json!({
            "stem": l.stem, "filt": l.filt,
            "from": l.from.to_string(), "to": l.to.to_string(),
        })).collect::<Vec<_>>(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "\
# toy chart
synchart 1 synthetic
truncate inf
window 0..5 0..6

gen a 1 1
gen b 0 3
diff 2 a = l^1 b
";

    #[test]
    fn parse_small_chart() {
        let c = parse_chart(SMALL).unwrap();
        assert_eq!(c.kind, ChartKind::Synthetic);
        assert_eq!(c.generators.len(), 2);
        assert_eq!(c.differentials.len(), 1);
        assert_eq!(c.differentials[0].coefficient_exp, 1);
    }

    #[test]
    fn table_rows_parse() {
        let text = "\
synchart 1 synthetic
truncate inf
gen Ph5e0 56 9
gen il 55 14
gen h6g 83 5
gen h2e2 83 5
diff 5 Ph5e0 @56,9,9 = l^4 il
diff 9 h6g+h2e2 = l^8 0
";
        let c = parse_chart(text).unwrap();
        assert_eq!(c.differentials.len(), 2);
        assert_eq!(c.differentials[0].declared.unwrap(), TriDegree::new(56, 9, 9));
        assert!(c.differentials[1].target.is_zero());
    }

    #[test]
    fn lambda_rule_is_enforced() {
        let text = "\
synchart 1 synthetic
gen X 5 2
gen Y 4 7
diff 5 X = l^3 Y
";
        let e = parse_chart(text).unwrap_err();
        assert!(e.message.contains("lambda exponent must equal r-1"), "{e}");
        assert_eq!(e.line, 4);
        assert!(e.col > 1);
    }

    #[test]
    fn errors_carry_line_and_column() {
        let text = "synchart 1 synthetic\ngen ok 1 1\ngen 9bad 1 1\n";
        let e = parse_chart(text).unwrap_err();
        assert_eq!(e.line, 3);
        assert_eq!(e.col, 5);
        assert!(e.to_string().starts_with("line 3, column 5:"));
    }

    #[test]
    fn classical_differentials_have_no_coefficient() {
        let text = "\
synchart 1 classical
gen h4 15 1
gen h0h3^2 14 3
diff 2 h4 = h0h3^2
";
        let c = parse_chart(text).unwrap();
        assert_eq!(c.differentials[0].coefficient_exp, 0);
        let bad = "synchart 1 classical\ngen a 1 1\ngen b 0 3\ndiff 2 a = l^1 b\n";
        assert!(parse_chart(bad).unwrap_err().message.contains("no lambda coefficient"));
    }

    #[test]
    fn round_trip_is_canonical() {
        let c = parse_chart(SMALL).unwrap();
        let text = write_chart(&c);
        let c2 = parse_chart(&text).unwrap();
        assert_eq!(c, c2);
        assert_eq!(write_chart(&c2), text);
    }

    #[test]
    fn bracket_and_class_lines() {
        let text = "\
synchart 1 synthetic
class eta 1 1 detector=h1
class mu 77 7 detector=m1 rel=nu*mu=0
class nu 3 1 detector=h2
class t2 0 1 detector=h0
gen h0 0 1
gen h1 1 1
gen h2 3 1
gen m1 77 7
gen h5^2g 82 6
bracket (nu,l^1mu,l^2eta) home=(82,5) detector=l^1h5^2g indet=?
";
        let c = parse_chart(text).unwrap();
        assert_eq!(c.brackets.len(), 1);
        let b = &c.brackets[0];
        assert_eq!(b.home, (82, 5));
        assert_eq!(b.entries[1].exp, 1);
        assert!(matches!(&b.detector, BracketDetector::Element(e) if e.exp == 1));
        // canonical round trip
        let again = parse_chart(&write_chart(&c)).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn cells_round_trip() {
        let text = "\
synchart 1 synthetic
class t2 0 1
class theta5 62 2
gen g 20 4
cell D 0 20 4
cell D 1 83 4
cell D 2 84 4
attach D 1 0 l^1theta5
attach D 2 1 t2
";
        let c = parse_chart(text).unwrap();
        assert_eq!(c.complexes.len(), 1);
        assert_eq!(c.complexes[0].cells.len(), 3);
        assert_eq!(c.complexes[0].attachments.len(), 2);
        let again = parse_chart(&write_chart(&c)).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn pages_round_trip() {
        let doc = PagesDoc {
            truncation: Truncation::Infinite,
            window: Some(Window::new(0, 5, 0, 8)),
            r_max: 3,
            summands: vec![
                PageSummand {
                    stem: 3,
                    filt: 1,
                    exp: 0,
                    support: Support::singleton("h2"),
                    order: Order::Free,
                    tag: None,
                },
                PageSummand {
                    stem: 0,
                    filt: 3,
                    exp: 1,
                    support: Support::singleton("b"),
                    order: Order::Torsion(2),
                    tag: Some("v1t".into()),
                },
            ],
            census: vec![CensusLine {
                page: 2,
                source_bidegree: (1, 1),
                source: Support::singleton("a"),
                target: Support::singleton("b"),
            }],
            links: vec![LinkLine {
                stem: 3,
                filt: 1,
                from: Support::singleton("h2"),
                to: Support::singleton("h0h2"),
            }],
        };
        let text = write_pages(&doc);
        let parsed = parse_pages(&text).unwrap();
        assert_eq!(write_pages(&parsed), text);
        assert_eq!(parsed.summands.len(), 2);
        assert_eq!(parsed.census.len(), 1);
        assert_eq!(parsed.links.len(), 1);
    }
}
