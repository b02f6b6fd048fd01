//! Chart data model: generators, `λ`-homogeneous elements, and the record
//! types that transcribe differential / extension / bracket / cell tables.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use alloc::{format, vec};
use core::fmt;

use crate::degree::{TriDegree, Window};
use crate::report::{Finding, Severity};

/// Sorted GF(2) combination of generator names. Equality is syntactic, so two
/// supports are equal exactly when they name the same sum.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Support(Vec<String>);

impl Support {
    pub fn zero() -> Self {
        Support(Vec::new())
    }

    pub fn singleton(name: impl Into<String>) -> Self {
        Support(vec![name.into()])
    }

    /// Build from names with GF(2) cancellation: a name appearing twice drops.
    pub fn from_names<I: IntoIterator<Item = S>, S: Into<String>>(names: I) -> Self {
        let mut s = Support::zero();
        for n in names {
            s.toggle(n.into());
        }
        s
    }

    pub fn toggle(&mut self, name: String) {
        match self.0.binary_search(&name) {
            Ok(i) => {
                self.0.remove(i);
            }
            Err(i) => self.0.insert(i, name),
        }
    }

    pub fn add(&self, other: &Support) -> Support {
        let mut out = self.clone();
        for n in &other.0 {
            out.toggle(n.clone());
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.binary_search_by(|n| n.as_str().cmp(name)).is_ok()
    }
}

impl fmt::Display for Support {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "+")?;
            }
            write!(f, "{n}")?;
        }
        Ok(())
    }
}

/// Homogeneous element `λ^exp · (sum of same-bidegree generators)`.
/// The zero element is an empty support with exponent 0.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct LambdaElement {
    pub exp: u32,
    pub support: Support,
}

impl LambdaElement {
    pub fn new(exp: u32, support: Support) -> Self {
        if support.is_zero() {
            LambdaElement { exp: 0, support }
        } else {
            LambdaElement { exp, support }
        }
    }

    pub fn zero() -> Self {
        LambdaElement { exp: 0, support: Support::zero() }
    }

    pub fn is_zero(&self) -> bool {
        self.support.is_zero()
    }
}

impl fmt::Display for LambdaElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            write!(f, "0")
        } else if self.exp == 0 {
            write!(f, "{}", self.support)
        } else {
            write!(f, "l^{} {}", self.exp, self.support)
        }
    }
}

/// A named `E2` basis element. Synthetic degree of a generator equals its
/// filtration; decorations in the name carry no semantics.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Generator {
    pub name: String,
    pub stem: i32,
    pub filt: i32,
}

impl Generator {
    pub fn degree(&self) -> TriDegree {
        TriDegree::generator(self.stem, self.filt)
    }
}

/// `left · right = result`, with `result` a GF(2) combination at the
/// componentwise sum of the factor bidegrees (or zero).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct ProductRecord {
    pub left: String,
    pub right: String,
    pub result: Support,
}

/// A `d_r` record. `source` is a combination at one bidegree `(s,f)`,
/// `target` a combination at `(s-1, f+r)`, possibly zero. `coefficient_exp`
/// is the λ-exponent on the target: 0 in classical charts, `r-1` in
/// synthetic ones; it is stored redundantly so transcription drift is
/// machine-checkable. `declared` carries the table's own `(s,f,d)` column
/// when one was transcribed.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DifferentialRecord {
    pub page: u32,
    pub source: Support,
    pub coefficient_exp: u32,
    pub target: Support,
    pub declared: Option<TriDegree>,
}

impl DifferentialRecord {
    pub fn id(&self) -> String {
        format!("diff:{}:{}", self.page, self.source)
    }
}

/// Declared homotopy class: name, stem, synthetic degree, optional detecting
/// element, and free-text relation facts carried along verbatim.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ClassDecl {
    pub name: String,
    pub stem: i32,
    pub syndeg: i32,
    pub detector: Option<LambdaElement>,
    pub relations: Vec<String>,
}

/// λ-power truncation of a chart: pages of the cofiber `S/λ^k` are the
/// `k`-truncated pages. `Infinite` is an explicit sentinel, never a large
/// integer.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Truncation {
    Infinite,
    Finite(u32),
}

impl Truncation {
    /// True when `λ^exp = 0` under this truncation.
    pub fn kills(&self, exp: u32) -> bool {
        match self {
            Truncation::Infinite => false,
            Truncation::Finite(k) => exp >= *k,
        }
    }
}

impl fmt::Display for Truncation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Truncation::Infinite => write!(f, "inf"),
            Truncation::Finite(k) => write!(f, "{k}"),
        }
    }
}

/// Whether differential targets are read with λ-exponent 0 (classical) or
/// `r-1` (synthetic).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ChartKind {
    Classical,
    Synthetic,
}

impl fmt::Display for ChartKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChartKind::Classical => write!(f, "classical"),
            ChartKind::Synthetic => write!(f, "synthetic"),
        }
    }
}

/// An extension record: multiplication by a declared class (`2~`, `η`, `ν`)
/// from `source` into `target`, hidden when the target filtration jumps past
/// the non-hidden product.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ExtensionRecord {
    pub kind: String,
    pub source: LambdaElement,
    pub target: LambdaElement,
    pub declared: Option<TriDegree>,
}

impl ExtensionRecord {
    pub fn id(&self) -> String {
        format!("ext:{}:{}", self.kind, self.source)
    }
}

/// One factor of a bracket entry: a declared class, or `{x}` for a homotopy
/// class detected by the chart element `x`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum BracketFactor {
    Class(String),
    Detected(String),
}

impl fmt::Display for BracketFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BracketFactor::Class(n) => write!(f, "{n}"),
            BracketFactor::Detected(n) => write!(f, "{{{n}}}"),
        }
    }
}

/// `λ^exp · (product of factors)` as one slot of a bracket.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct BracketEntry {
    pub exp: u32,
    pub factors: Vec<BracketFactor>,
}

impl fmt::Display for BracketEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp > 0 {
            write!(f, "l^{}", self.exp)?;
        }
        for (i, fac) in self.factors.iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            write!(f, "{fac}")?;
        }
        Ok(())
    }
}

/// Claimed detector of a bracket.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum BracketDetector {
    Zero,
    Element(LambdaElement),
    /// "zero or detected by the element" disjunction.
    ZeroOr(LambdaElement),
}

/// Indeterminacy annotation, carried verbatim when it is not an element.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Indeterminacy {
    Zero,
    Unknown,
    Element(LambdaElement),
    Text(String),
}

/// A triple-bracket record with its claimed home degree and detector.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BracketRecord {
    pub entries: Vec<BracketEntry>,
    pub home: (i32, i32),
    pub detector: BracketDetector,
    pub indet: Indeterminacy,
}

impl BracketRecord {
    pub fn id(&self) -> String {
        format!("bracket:({},{})", self.home.0, self.home.1)
    }
}

/// Finite cell complex: cells with `(stem, syndeg)` degrees and attachments
/// from an upper cell to a strictly lower-stem cell along a class reference.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CellComplex {
    pub name: String,
    pub cells: Vec<(i32, i32)>,
    /// (upper cell index, lower cell index, λ-exponent, class name)
    pub attachments: Vec<(usize, usize, u32, String)>,
}

/// A chart: the generator basis with its multiplicative and differential
/// records, plus any transcribed extension/class/bracket/cell data.
///
/// Immutable once validated; every operation on it is a pure function.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Chart {
    pub kind: ChartKind,
    pub truncation: Truncation,
    /// Region over which the generator list is complete; `None` means the
    /// chart is a record collection with no emptiness claims.
    pub window: Option<Window>,
    pub generators: BTreeMap<String, Generator>,
    pub products: Vec<ProductRecord>,
    pub differentials: Vec<DifferentialRecord>,
    pub extensions: Vec<ExtensionRecord>,
    pub classes: BTreeMap<String, ClassDecl>,
    pub brackets: Vec<BracketRecord>,
    pub complexes: Vec<CellComplex>,
}

impl Chart {
    pub fn new(kind: ChartKind) -> Self {
        Chart {
            kind,
            truncation: Truncation::Infinite,
            window: None,
            generators: BTreeMap::new(),
            products: Vec::new(),
            differentials: Vec::new(),
            extensions: Vec::new(),
            classes: BTreeMap::new(),
            brackets: Vec::new(),
            complexes: Vec::new(),
        }
    }

    pub fn add_generator(&mut self, name: &str, stem: i32, filt: i32) {
        self.generators
            .insert(name.to_string(), Generator { name: name.to_string(), stem, filt });
    }

    pub fn generator(&self, name: &str) -> Option<&Generator> {
        self.generators.get(name)
    }

    /// Generators at a bidegree, sorted by name.
    pub fn generators_at(&self, stem: i32, filt: i32) -> Vec<&Generator> {
        self.generators
            .values()
            .filter(|g| g.stem == stem && g.filt == filt)
            .collect()
    }

    /// True when the window covers `(stem, filt)` and no generator lives
    /// there; `None` when the bidegree is outside the declared window.
    /// Negative stems and filtrations are structurally empty.
    pub fn is_empty_bidegree(&self, stem: i32, filt: i32) -> Option<bool> {
        if stem < 0 || filt < 0 {
            return Some(true);
        }
        let w = self.window?;
        if !w.contains(stem, filt) {
            return None;
        }
        Some(self.generators_at(stem, filt).is_empty())
    }

    /// Common bidegree of a nonzero support.
    pub fn support_bidegree(&self, support: &Support) -> Result<(i32, i32), ElementError> {
        if support.is_zero() {
            return Err(ElementError::Zero);
        }
        let mut deg: Option<(i32, i32)> = None;
        for name in support.names() {
            let g = self
                .generators
                .get(name)
                .ok_or_else(|| ElementError::Dangling(name.clone()))?;
            match deg {
                None => deg = Some((g.stem, g.filt)),
                Some(d) if d != (g.stem, g.filt) => {
                    return Err(ElementError::Inhomogeneous {
                        first: d,
                        name: name.clone(),
                        other: (g.stem, g.filt),
                    })
                }
                _ => {}
            }
        }
        Ok(deg.unwrap())
    }

    /// Product of two supports via the recorded products, bilinear over GF(2).
    /// Pairs with no record are treated as zero (charts record nonzero
    /// products only). Returns `None` when a referenced name is undeclared.
    pub fn multiply(&self, a: &Support, b: &Support) -> Option<Support> {
        let mut out = Support::zero();
        for x in a.names() {
            for y in b.names() {
                if !self.generators.contains_key(x) || !self.generators.contains_key(y) {
                    return None;
                }
                if let Some(p) = self.product_of(x, y) {
                    out = out.add(p);
                }
            }
        }
        Some(out)
    }

    /// Recorded product of two generator names, looked up symmetrically.
    pub fn product_of(&self, x: &str, y: &str) -> Option<&Support> {
        self.products
            .iter()
            .find(|p| (p.left == x && p.right == y) || (p.left == y && p.right == x))
            .map(|p| &p.result)
    }

    /// Canonical record order, so two charts with permuted records compare
    /// and serialize identically.
    pub fn canonicalize(&mut self) {
        self.products.sort();
        self.products.dedup();
        self.differentials
            .sort_by(|a, b| (a.page, &a.source).cmp(&(b.page, &b.source)));
        self.extensions
            .sort_by(|a, b| (&a.kind, &a.source).cmp(&(&b.kind, &b.source)));
        self.brackets
            .sort_by(|a, b| (a.home, &a.entries).cmp(&(b.home, &b.entries)));
        self.complexes.sort_by(|a, b| a.name.cmp(&b.name));
        for cx in &mut self.complexes {
            cx.attachments.sort();
        }
    }
}

/// Failure resolving a support against a chart.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ElementError {
    Zero,
    Dangling(String),
    Inhomogeneous { first: (i32, i32), name: String, other: (i32, i32) },
}

impl fmt::Display for ElementError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ElementError::Zero => write!(f, "zero element has no tri-degree"),
            ElementError::Dangling(n) => write!(f, "name `{n}` does not resolve to a generator"),
            ElementError::Inhomogeneous { first, name, other } => write!(
                f,
                "mixed-bidegree support: ({},{}) but `{name}` is at ({},{})",
                first.0, first.1, other.0, other.1
            ),
        }
    }
}

/// Tri-degree of a nonzero homogeneous element: `(s, f, f - exp)`.
pub fn tri_degree_of(e: &LambdaElement, chart: &Chart) -> Result<TriDegree, ElementError> {
    let (stem, filt) = chart.support_bidegree(&e.support)?;
    Ok(TriDegree::generator(stem, filt).lambda_shift(e.exp))
}

/// Failure of the classical → synthetic lift preconditions.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum LiftError {
    NotClassical,
    Truncated,
    NonzeroExponent { page: u32, source: Support },
}

impl fmt::Display for LiftError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LiftError::NotClassical => write!(f, "chart is already synthetic"),
            LiftError::Truncated => write!(f, "classical charts must have truncation inf"),
            LiftError::NonzeroExponent { page, source } => write!(
                f,
                "classical d_{page} on {source} carries a nonzero lambda exponent"
            ),
        }
    }
}

/// Lift a classical chart: generators keep `d = f`, every `d_r(x) = y`
/// becomes `d_r(x) = λ^(r-1) y`, products unchanged.
pub fn lift_to_synthetic(classical: &Chart) -> Result<Chart, LiftError> {
    if classical.kind != ChartKind::Classical {
        return Err(LiftError::NotClassical);
    }
    if classical.truncation != Truncation::Infinite {
        return Err(LiftError::Truncated);
    }
    for d in &classical.differentials {
        if d.coefficient_exp != 0 {
            return Err(LiftError::NonzeroExponent { page: d.page, source: d.source.clone() });
        }
    }
    let mut out = classical.clone();
    out.kind = ChartKind::Synthetic;
    for d in &mut out.differentials {
        d.coefficient_exp = d.page - 1;
    }
    Ok(out)
}

/// Drop λ-exponents again: the round-trip inverse of [`lift_to_synthetic`].
pub fn specialize_to_classical(synthetic: &Chart) -> Chart {
    let mut out = synthetic.clone();
    out.kind = ChartKind::Classical;
    for d in &mut out.differentials {
        d.coefficient_exp = 0;
    }
    out
}

fn expect_exp(kind: ChartKind, page: u32) -> u32 {
    match kind {
        ChartKind::Classical => 0,
        ChartKind::Synthetic => page - 1,
    }
}

/// Structural validation: dangling names, homogeneity, product and
/// differential bidegree rules, truncation bounds. The report is sorted and
/// order-independent; an empty report means the chart is valid.
pub fn validate_chart(chart: &Chart) -> Vec<Finding> {
    let mut findings = Vec::new();
    let mut find = |record: String, message: String| {
        findings.push(Finding { severity: Severity::Error, record, message });
    };

    for g in chart.generators.values() {
        if g.filt < 0 {
            find(format!("gen:{}", g.name), format!("negative filtration {}", g.filt));
        }
        if let Some(w) = chart.window {
            if !w.contains(g.stem, g.filt) {
                find(
                    format!("gen:{}", g.name),
                    format!("generator at ({},{}) outside declared window", g.stem, g.filt),
                );
            }
        }
    }

    if let Truncation::Finite(k) = chart.truncation {
        if k == 0 {
            find("chart".to_string(), "truncation must be at least 1".to_string());
        }
    }

    let check_exp = |exp: u32| chart.truncation.kills(exp);

    for p in &chart.products {
        let id = format!("prod:{}:{}", p.left, p.right);
        let mut factor_deg = None;
        match (chart.generators.get(&p.left), chart.generators.get(&p.right)) {
            (Some(l), Some(r)) => factor_deg = Some((l.stem + r.stem, l.filt + r.filt)),
            _ => {
                for n in [&p.left, &p.right] {
                    if !chart.generators.contains_key(n) {
                        find(id.clone(), format!("name `{n}` does not resolve to a generator"));
                    }
                }
            }
        }
        if p.result.is_zero() {
            continue;
        }
        match chart.support_bidegree(&p.result) {
            Ok(deg) => {
                if let Some(expect) = factor_deg {
                    if deg != expect {
                        find(
                            id.clone(),
                            format!(
                                "result at ({},{}) but factors multiply to ({},{})",
                                deg.0, deg.1, expect.0, expect.1
                            ),
                        );
                    }
                }
            }
            Err(e) => find(id.clone(), format!("{e}")),
        }
    }

    for d in &chart.differentials {
        let id = d.id();
        if d.page < 2 {
            find(id.clone(), format!("page {} below 2", d.page));
        }
        let src = match chart.support_bidegree(&d.source) {
            Ok(deg) => Some(deg),
            Err(e) => {
                find(id.clone(), format!("source: {e}"));
                None
            }
        };
        let expect = expect_exp(chart.kind, d.page);
        if d.coefficient_exp != expect {
            find(
                id.clone(),
                format!("lambda exponent {} must equal {expect}", d.coefficient_exp),
            );
        }
        if check_exp(d.coefficient_exp) && !d.target.is_zero() {
            find(
                id.clone(),
                format!(
                    "coefficient l^{} vanishes at truncation {}",
                    d.coefficient_exp, chart.truncation
                ),
            );
        }
        if !d.target.is_zero() {
            match chart.support_bidegree(&d.target) {
                Ok(tgt) => {
                    if let Some((s, f)) = src {
                        if tgt != (s - 1, f + d.page as i32) {
                            find(
                                id.clone(),
                                format!(
                                    "target at ({},{}) but d_{} from ({s},{f}) must land at ({},{})",
                                    tgt.0,
                                    tgt.1,
                                    d.page,
                                    s - 1,
                                    f + d.page as i32
                                ),
                            );
                        }
                    }
                }
                Err(e) => find(id.clone(), format!("target: {e}")),
            }
        }
    }

    for x in &chart.extensions {
        let id = x.id();
        if !chart.classes.contains_key(&x.kind) {
            find(id.clone(), format!("unknown class `{}`", x.kind));
        }
        if let Err(e) = chart.support_bidegree(&x.source.support) {
            find(id.clone(), format!("source: {e}"));
        }
        if !x.target.is_zero() {
            if let Err(e) = chart.support_bidegree(&x.target.support) {
                find(id.clone(), format!("target: {e}"));
            }
            if check_exp(x.target.exp) {
                find(
                    id.clone(),
                    format!("target l^{} vanishes at truncation {}", x.target.exp, chart.truncation),
                );
            }
        }
    }

    for c in chart.classes.values() {
        let id = format!("class:{}", c.name);
        if let Some(det) = &c.detector {
            match tri_degree_of(det, chart) {
                Ok(deg) => {
                    if deg.stem != c.stem || deg.syndeg != c.syndeg {
                        find(
                            id.clone(),
                            format!(
                                "detector tri-degree {deg} does not match class ({},{})",
                                c.stem, c.syndeg
                            ),
                        );
                    }
                }
                Err(e) => find(id.clone(), format!("detector: {e}")),
            }
        }
    }

    for b in &chart.brackets {
        let id = b.id();
        for entry in &b.entries {
            for factor in &entry.factors {
                match factor {
                    BracketFactor::Class(n) => {
                        if !chart.classes.contains_key(n) {
                            find(id.clone(), format!("unknown class `{n}`"));
                        }
                    }
                    BracketFactor::Detected(n) => {
                        if !chart.generators.contains_key(n) {
                            find(id.clone(), format!("name `{n}` does not resolve to a generator"));
                        }
                    }
                }
            }
        }
        let mut check_elt = |what: &str, e: &LambdaElement| {
            if let Err(err) = chart.support_bidegree(&e.support) {
                find(id.clone(), format!("{what}: {err}"));
            }
        };
        match &b.detector {
            BracketDetector::Element(e) | BracketDetector::ZeroOr(e) => check_elt("detector", e),
            BracketDetector::Zero => {}
        }
        if let Indeterminacy::Element(e) = &b.indet {
            check_elt("indeterminacy", e);
        }
    }

    for cx in &chart.complexes {
        for (u, l, _, class) in &cx.attachments {
            let id = format!("cell:{}:{}->{}", cx.name, u, l);
            if *u >= cx.cells.len() || *l >= cx.cells.len() {
                find(id.clone(), "attachment references a missing cell".to_string());
                continue;
            }
            if !chart.classes.contains_key(class) {
                find(id.clone(), format!("unknown class `{class}`"));
            }
        }
    }

    crate::report::sort_findings(&mut findings);
    findings
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_chart() -> Chart {
        let mut c = Chart::new(ChartKind::Synthetic);
        c.add_generator("h0", 0, 1);
        c.add_generator("h2", 3, 1);
        c.add_generator("h0h2", 3, 2);
        c
    }

    #[test]
    fn tri_degree_of_generator() {
        let mut c = Chart::new(ChartKind::Synthetic);
        c.add_generator("h0", 0, 1);
        let e = LambdaElement::new(0, Support::singleton("h0"));
        assert_eq!(tri_degree_of(&e, &c).unwrap(), TriDegree::new(0, 1, 1));
    }

    #[test]
    fn tri_degree_with_exponent() {
        // il sits at (55,14): λ⁴ il has tri-degree (55,14,10), matching the
        // d₅ target out of (56,9,9).
        let mut c = Chart::new(ChartKind::Synthetic);
        c.add_generator("il", 55, 14);
        let e = LambdaElement::new(4, Support::singleton("il"));
        assert_eq!(tri_degree_of(&e, &c).unwrap(), TriDegree::new(55, 14, 10));
        // The map itself only reads (s, f, f-k).
        let mut c2 = Chart::new(ChartKind::Synthetic);
        c2.add_generator("x", 55, 13);
        let e2 = LambdaElement::new(4, Support::singleton("x"));
        assert_eq!(tri_degree_of(&e2, &c2).unwrap(), TriDegree::new(55, 13, 9));
    }

    #[test]
    fn tri_degree_of_sum() {
        let mut c = Chart::new(ChartKind::Synthetic);
        c.add_generator("a", 5, 3);
        c.add_generator("b", 5, 3);
        let e = LambdaElement::new(2, Support::from_names(["a", "b"]));
        assert_eq!(tri_degree_of(&e, &c).unwrap(), TriDegree::new(5, 3, 1));
    }

    #[test]
    fn tri_degree_errors() {
        let mut c = Chart::new(ChartKind::Synthetic);
        c.add_generator("a", 1, 1);
        c.add_generator("b", 2, 1);
        let mixed = LambdaElement::new(0, Support::from_names(["a", "b"]));
        assert!(matches!(tri_degree_of(&mixed, &c), Err(ElementError::Inhomogeneous { .. })));
        assert!(matches!(tri_degree_of(&LambdaElement::zero(), &c), Err(ElementError::Zero)));
    }

    #[test]
    fn support_cancellation() {
        let s = Support::from_names(["a", "b", "a"]);
        assert_eq!(s, Support::singleton("b"));
        assert!(Support::from_names(["a", "a"]).is_zero());
    }

    #[test]
    fn lift_examples() {
        let mut c = Chart::new(ChartKind::Classical);
        c.add_generator("Ph5e0", 56, 9);
        c.add_generator("il", 55, 14);
        c.add_generator("tQ2", 93, 13);
        c.add_generator("MPD-h1d0", 92, 19);
        c.add_generator("x", 10, 2);
        c.differentials.push(DifferentialRecord {
            page: 5,
            source: Support::singleton("Ph5e0"),
            coefficient_exp: 0,
            target: Support::singleton("il"),
            declared: None,
        });
        c.differentials.push(DifferentialRecord {
            page: 6,
            source: Support::singleton("tQ2"),
            coefficient_exp: 0,
            target: Support::singleton("MPD-h1d0"),
            declared: None,
        });
        c.differentials.push(DifferentialRecord {
            page: 2,
            source: Support::singleton("x"),
            coefficient_exp: 0,
            target: Support::zero(),
            declared: None,
        });
        let s = lift_to_synthetic(&c).unwrap();
        assert_eq!(s.differentials[0].coefficient_exp, 4);
        assert_eq!(s.differentials[1].coefficient_exp, 5);
        assert_eq!(s.differentials[2].coefficient_exp, 1);
        assert!(s.differentials[2].target.is_zero());
        // round trip
        assert_eq!(specialize_to_classical(&s), c);
        assert!(lift_to_synthetic(&s).is_err());
    }

    #[test]
    fn validate_product_mismatch() {
        let mut c = toy_chart();
        c.add_generator("bad", 3, 3);
        c.products.push(ProductRecord {
            left: "h0".into(),
            right: "h2".into(),
            result: Support::singleton("bad"),
        });
        let findings = validate_chart(&c);
        assert_eq!(findings.len(), 1);
        assert!(findings[0].message.contains("(3,3)"));
    }

    #[test]
    fn validate_differential_displacement() {
        let mut c = toy_chart();
        c.add_generator("t", 2, 4);
        c.differentials.push(DifferentialRecord {
            page: 2,
            source: Support::singleton("h2"),
            coefficient_exp: 1,
            target: Support::singleton("t"),
            declared: None,
        });
        // f+2 = 3 but target filtration is 4
        let findings = validate_chart(&c);
        assert_eq!(findings.len(), 1);
        assert!(findings[0].message.contains("must land at (2,3)"));
    }

    #[test]
    fn validate_is_order_independent() {
        let mut c = toy_chart();
        c.add_generator("t", 2, 3);
        c.products.push(ProductRecord {
            left: "h0".into(),
            right: "h2".into(),
            result: Support::singleton("t"),
        });
        c.products.push(ProductRecord {
            left: "h2".into(),
            right: "missing".into(),
            result: Support::zero(),
        });
        let a = validate_chart(&c);
        c.products.reverse();
        let b = validate_chart(&c);
        assert_eq!(a, b);
        assert_eq!(validate_chart(&c), b);
    }

    #[test]
    fn truncation_bounds() {
        let mut c = toy_chart();
        c.truncation = Truncation::Finite(4);
        c.add_generator("y", 2, 7);
        c.differentials.push(DifferentialRecord {
            page: 6,
            source: Support::singleton("h2"),
            coefficient_exp: 5,
            target: Support::singleton("y"),
            declared: None,
        });
        let findings = validate_chart(&c);
        assert!(findings.iter().any(|f| f.message.contains("vanishes at truncation 4")));
    }
}
