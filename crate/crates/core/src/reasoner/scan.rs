//! Window scans: detector enumeration, forced-differential candidates, and
//! the crossing-differential scan.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::chart::{Chart, LambdaElement, Support, Truncation};
use crate::pages::{Order, PageState, Summand};

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ScanError {
    WindowUnsafe { stem: i32, syndeg: i32 },
}

impl fmt::Display for ScanError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScanError::WindowUnsafe { stem, syndeg } => {
                write!(f, "column ({stem},{syndeg}) is outside the safe window")
            }
        }
    }
}

/// A cyclic summand that can detect a class in a given column.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DetectorCandidate {
    pub filt: i32,
    pub element: LambdaElement,
    pub order: Order,
}

/// All `E∞` cyclic summands meeting column `(stem, ·, syndeg)` in filtration
/// at least `min_filt`, ascending.
pub fn enumerate_detectors(
    state: &PageState,
    stem: i32,
    syndeg: i32,
    min_filt: i32,
) -> Result<Vec<DetectorCandidate>, ScanError> {
    let safe = state
        .window
        .map(|w| w.s_min <= stem - 1 && stem + 1 <= w.s_max)
        .unwrap_or(false);
    if !safe {
        return Err(ScanError::WindowUnsafe { stem, syndeg });
    }
    let mut out = Vec::new();
    for (s, f) in state.bidegrees() {
        if s != stem || f < min_filt {
            continue;
        }
        for sm in state.module_at(s, f) {
            let top = f - sm.exp as i32;
            let live = match (sm.order, state.truncation) {
                (Order::Free, Truncation::Infinite) => syndeg <= top,
                (Order::Free, Truncation::Finite(k)) => syndeg <= top && syndeg > top - k as i32,
                (Order::Torsion(t), _) => syndeg <= top && syndeg > top - t as i32,
            };
            if !live {
                continue;
            }
            let drop = (top - syndeg) as u32;
            out.push(DetectorCandidate {
                filt: f,
                element: LambdaElement::new(sm.exp + drop, sm.support.clone()),
                order: sm.order,
            });
        }
    }
    out.sort_by(|a, b| (a.filt, &a.element).cmp(&(b.filt, &b.element)));
    Ok(out)
}

/// Surviving sources at one page that could hit the target.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SourceCandidates {
    pub page: u32,
    pub bidegree: (i32, i32),
    /// Free-part representatives alive at that page.
    pub sources: Vec<Support>,
}

/// Report of a forced-differential enumeration. The caller asserts that the
/// target must die; the justification is recorded, not checked.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ForcedDifferentialReport {
    pub target: LambdaElement,
    pub target_bidegree: (i32, i32),
    pub justification: String,
    pub candidates: Vec<SourceCandidates>,
    /// Pages whose source bidegree fell outside the window and could not be
    /// examined.
    pub skipped: Vec<(u32, (i32, i32))>,
}

/// Enumerate, page by page, the surviving sources whose `d_r` could kill
/// `λ^j·target`: pages `r` with `r-1 <= j`, sources at `(s+1, f-r)` alive at
/// page `r`. Pages beyond the replayed history reuse the last state.
pub fn forced_differential_candidates(
    target: &LambdaElement,
    chart: &Chart,
    history: &[PageState],
    justification: &str,
) -> Result<ForcedDifferentialReport, crate::chart::ElementError> {
    let (s, f) = chart.support_bidegree(&target.support)?;
    let mut report = ForcedDifferentialReport {
        target: target.clone(),
        target_bidegree: (s, f),
        justification: justification.into(),
        candidates: Vec::new(),
        skipped: Vec::new(),
    };
    for r in 2..=(target.exp + 1) {
        let bidegree = (s + 1, f - r as i32);
        if bidegree.1 < 0 {
            continue;
        }
        let in_window = chart
            .window
            .map(|w| w.contains(bidegree.0, bidegree.1))
            .unwrap_or(false);
        if !in_window {
            report.skipped.push((r, bidegree));
            continue;
        }
        // state at page r: history[r-2] when present, else the final state
        let state = history
            .get((r - 2) as usize)
            .or(history.last())
            .expect("nonempty history");
        let sources: Vec<Support> = state
            .module_at(bidegree.0, bidegree.1)
            .into_iter()
            .filter(|sm: &Summand| sm.order == Order::Free)
            .map(|sm| sm.support)
            .collect();
        if !sources.is_empty() {
            report.candidates.push(SourceCandidates { page: r, bidegree, sources });
        }
    }
    Ok(report)
}

/// A differential interleaving a bracket's filtration range.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CrossingEntry {
    pub page: u32,
    pub source_bidegree: (i32, i32),
    pub source: Support,
    pub target: Support,
}

/// Scan result together with a certificate of exactly what was checked.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CrossingReport {
    pub stem: i32,
    pub interval: (i32, i32),
    pub after_page: u32,
    pub truncation: Truncation,
    pub entries: Vec<CrossingEntry>,
}

impl CrossingReport {
    pub fn is_clear(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn certificate(&self) -> String {
        use alloc::format;
        format!(
            "scanned stem {} for d_r with r > {} meeting filtrations strictly inside ({},{}) at truncation {}: {} found",
            self.stem,
            self.after_page,
            self.interval.0,
            self.interval.1,
            self.truncation,
            self.entries.len()
        )
    }
}

/// List nonzero differentials of page `r' > after_page` whose source or
/// target sits in the given stem with filtration strictly inside the
/// interval. Records inert under the truncation are excluded. An empty list
/// is the no-crossing certificate for exactly this definition.
pub fn crossing_differential_scan(
    chart: &Chart,
    stem: i32,
    interval: (i32, i32),
    after_page: u32,
    truncation: Truncation,
) -> CrossingReport {
    let mut entries = Vec::new();
    for rec in &chart.differentials {
        if rec.page <= after_page || rec.target.is_zero() {
            continue;
        }
        if truncation.kills(rec.page - 1) {
            continue;
        }
        let Ok((s, f)) = chart.support_bidegree(&rec.source) else {
            continue;
        };
        let tgt = (s - 1, f + rec.page as i32);
        let inside = |bs: i32, bf: i32| bs == stem && bf > interval.0 && bf < interval.1;
        if inside(s, f) || inside(tgt.0, tgt.1) {
            entries.push(CrossingEntry {
                page: rec.page,
                source_bidegree: (s, f),
                source: rec.source.clone(),
                target: rec.target.clone(),
            });
        }
    }
    entries.sort_by(|a, b| (a.page, &a.source).cmp(&(b.page, &b.source)));
    CrossingReport { stem, interval, after_page, truncation, entries }
}
