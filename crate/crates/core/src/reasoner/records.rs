//! Degree checks for differential, extension, and bracket records.

use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;
use core::fmt;

use crate::chart::{
    tri_degree_of, BracketDetector, BracketFactor, BracketRecord, Chart, DifferentialRecord,
    ExtensionRecord, Indeterminacy, LambdaElement,
};
use crate::pages::PageState;
use crate::report::{sort_findings, Finding};

/// Verify one differential record against the chart: source homogeneity, the
/// declared `(s,f,d)` when present, the `λ^(r-1)` coefficient, and the
/// tri-degree displacement `(-1, +r, +1)`.
pub fn check_differential_record(rec: &DifferentialRecord, chart: &Chart) -> Vec<Finding> {
    let mut findings = Vec::new();
    let id = rec.id();
    let mut find = |m: alloc::string::String| findings.push(Finding::error(id.clone(), m));

    if rec.page < 2 {
        find(format!("page {} below 2", rec.page));
    }
    let src = match chart.support_bidegree(&rec.source) {
        Ok(d) => Some(d),
        Err(e) => {
            find(format!("source: {e}"));
            None
        }
    };
    if let (Some((s, f)), Some(decl)) = (src, rec.declared) {
        if (decl.stem, decl.filt) != (s, f) {
            find(format!("declared ({},{}) but source sits at ({s},{f})", decl.stem, decl.filt));
        }
        if decl.syndeg != decl.filt {
            find(format!(
                "declared synthetic degree {} differs from filtration {}",
                decl.syndeg, decl.filt
            ));
        }
    }
    if rec.coefficient_exp != rec.page - 1 {
        find(format!(
            "lambda exponent must equal r-1: found {}, expected {}",
            rec.coefficient_exp,
            rec.page - 1
        ));
    }
    if !rec.target.is_zero() {
        match chart.support_bidegree(&rec.target) {
            Ok((ts, tf)) => {
                if let Some((s, f)) = src {
                    let expect = (s - 1, f + rec.page as i32);
                    if (ts, tf) != expect {
                        find(format!(
                            "target at ({ts},{tf}) but the displacement rule forces ({},{})",
                            expect.0, expect.1
                        ));
                    }
                }
            }
            Err(e) => find(format!("target: {e}")),
        }
    }
    sort_findings(&mut findings);
    findings
}

/// Verify one extension record: known kind, declared tri-degree, the stem and
/// synthetic-degree displacement of the kind, the target λ-exponent, and
/// hiddenness past the kind's detector filtration.
pub fn check_extension_record(rec: &ExtensionRecord, chart: &Chart) -> Vec<Finding> {
    let mut findings = Vec::new();
    let id = rec.id();
    let mut find = |m: alloc::string::String| findings.push(Finding::error(id.clone(), m));

    let Some(class) = chart.classes.get(&rec.kind) else {
        findings.push(Finding::error(id.clone(), format!("unknown class `{}`", rec.kind)));
        sort_findings(&mut findings);
        return findings;
    };

    let src = match chart.support_bidegree(&rec.source.support) {
        Ok(d) => Some(d),
        Err(e) => {
            find(format!("source: {e}"));
            None
        }
    };
    if let (Some((s, f)), Some(decl)) = (src, rec.declared) {
        let d = f - rec.source.exp as i32;
        if (decl.stem, decl.filt, decl.syndeg) != (s, f, d) {
            find(format!(
                "declared ({},{},{}) but source is at ({s},{f},{d})",
                decl.stem, decl.filt, decl.syndeg
            ));
        }
    }
    if rec.target.is_zero() {
        sort_findings(&mut findings);
        return findings;
    }
    let tgt = match chart.support_bidegree(&rec.target.support) {
        Ok(d) => Some(d),
        Err(e) => {
            find(format!("target: {e}"));
            None
        }
    };
    if let (Some((s, f)), Some((ts, tf))) = (src, tgt) {
        if ts != s + class.stem {
            find(format!("target stem {ts} but {} shifts stem by {}", rec.kind, class.stem));
        }
        // d_target = d_source + d_kind forces the λ-exponent
        let d_src = f - rec.source.exp as i32;
        let want = tf - (d_src + class.syndeg);
        if want < 0 || rec.target.exp as i32 != want {
            find(format!(
                "target lambda exponent {} but degrees force {want}",
                rec.target.exp
            ));
        }
        // hidden: target filtration jumps past the non-hidden product
        if let Some(det) = &class.detector {
            if let Ok((_, det_f)) = chart.support_bidegree(&det.support) {
                if tf <= f + det_f {
                    find(format!(
                        "not hidden: target filtration {tf} must exceed {} + {det_f}",
                        f
                    ));
                }
            }
        }
    }
    sort_findings(&mut findings);
    findings
}

/// λ-translates implied by linearity: each record yields the records with
/// both exponents raised, up to the absolute source-exponent cap. Closing a
/// closed set again adds nothing.
pub fn extension_closure(rec: &ExtensionRecord, max_source_exp: u32) -> Vec<ExtensionRecord> {
    let mut out = Vec::new();
    let mut shift = 1;
    while rec.source.exp + shift <= max_source_exp {
        let mut t = rec.clone();
        t.source.exp += shift;
        if !t.target.is_zero() {
            t.target.exp += shift;
        }
        t.declared = rec.declared.map(|d| d.lambda_shift(shift));
        out.push(t);
        shift += 1;
    }
    out
}

/// Home degree of a triple bracket: `(Σs + 1, Σd - 1)`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct BracketDegreeError {
    pub len: usize,
}

impl fmt::Display for BracketDegreeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "only triple brackets are supported, got {} entries", self.len)
    }
}

pub fn bracket_degree(entries: &[(i32, i32)]) -> Result<(i32, i32), BracketDegreeError> {
    if entries.len() != 3 {
        return Err(BracketDegreeError { len: entries.len() });
    }
    let s: i32 = entries.iter().map(|e| e.0).sum();
    let d: i32 = entries.iter().map(|e| e.1).sum();
    Ok((s + 1, d - 1))
}

/// Home bidegree of a Massey product of page elements: `(Σs + 1, Σf - 1)`.
pub fn massey_degree(entries: [(i32, i32); 3]) -> (i32, i32) {
    let s: i32 = entries.iter().map(|e| e.0).sum();
    let f: i32 = entries.iter().map(|e| e.1).sum();
    (s + 1, f - 1)
}

/// Degree of one bracket entry: λ-shifted sum of its factor degrees. Class
/// factors resolve through the class table, `{x}` factors through the
/// generator table with `d = f`.
fn entry_degree(
    entry: &crate::chart::BracketEntry,
    chart: &Chart,
) -> Result<(i32, i32), alloc::string::String> {
    let mut s = 0;
    let mut d = 0;
    for factor in &entry.factors {
        match factor {
            BracketFactor::Class(n) => {
                let c = chart
                    .classes
                    .get(n)
                    .ok_or_else(|| format!("unknown class `{n}`"))?;
                s += c.stem;
                d += c.syndeg;
            }
            BracketFactor::Detected(n) => {
                let g = chart
                    .generators
                    .get(n)
                    .ok_or_else(|| format!("name `{n}` does not resolve to a generator"))?;
                s += g.stem;
                d += g.filt;
            }
        }
    }
    Ok((s, d - entry.exp as i32))
}

/// Verify a bracket record: entry resolution, the triple home-degree rule,
/// and that the claimed detector and any indeterminacy element live at the
/// home degree. With an `E∞` state supplied, additionally require the
/// detector to appear among the column's detector candidates.
pub fn check_bracket_record(
    rec: &BracketRecord,
    chart: &Chart,
    einf: Option<&PageState>,
) -> Vec<Finding> {
    let mut findings = Vec::new();
    let id = rec.id();
    let mut find = |m: alloc::string::String| findings.push(Finding::error(id.clone(), m));

    let mut degrees = Vec::new();
    for entry in &rec.entries {
        match entry_degree(entry, chart) {
            Ok(d) => degrees.push(d),
            Err(e) => find(format!("entry {entry}: {e}")),
        }
    }
    if degrees.len() == rec.entries.len() {
        match bracket_degree(&degrees) {
            Ok(home) => {
                if home != rec.home {
                    find(format!(
                        "home ({},{}) but entries force ({},{})",
                        rec.home.0, rec.home.1, home.0, home.1
                    ));
                }
            }
            Err(e) => find(e.to_string()),
        }
    }

    let mut check_home_element = |what: &str, e: &LambdaElement| match tri_degree_of(e, chart) {
        Ok(deg) => {
            if (deg.stem, deg.syndeg) != rec.home {
                find(format!(
                    "{what} {e} has tri-degree {deg}, not at home ({},{})",
                    rec.home.0, rec.home.1
                ));
            }
        }
        Err(err) => find(format!("{what}: {err}")),
    };
    match &rec.detector {
        BracketDetector::Zero => {}
        BracketDetector::Element(e) | BracketDetector::ZeroOr(e) => {
            check_home_element("detector", e)
        }
    }
    if let Indeterminacy::Element(e) = &rec.indet {
        check_home_element("indeterminacy element", e);
    }

    if let Some(state) = einf {
        if let BracketDetector::Element(e) | BracketDetector::ZeroOr(e) = &rec.detector {
            if let Ok(deg) = tri_degree_of(e, chart) {
                match crate::reasoner::enumerate_detectors(state, rec.home.0, rec.home.1, 0) {
                    Ok(cands) => {
                        if !cands.iter().any(|c| c.filt == deg.filt) {
                            findings.push(Finding::error(
                                id.clone(),
                                format!(
                                    "detector {e} has no E-infinity candidate in filtration {}",
                                    deg.filt
                                ),
                            ));
                        }
                    }
                    Err(err) => {
                        findings.push(Finding::error(id.clone(), format!("detector scan: {err}")))
                    }
                }
            }
        }
    }

    sort_findings(&mut findings);
    findings
}
