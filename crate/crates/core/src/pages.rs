//! Spectral sequence replay engine.
//!
//! Differentials are curated input, not discovered: the engine builds the
//! free `E2` page from a lifted chart, replays each page's records with their
//! `λ^(r-1)` coefficients, and reports the `E∞` page together with the
//! torsion census pairing λ-power torsion with classical differentials.
//!
//! Each bidegree is processed through the three-term complex of its free
//! part. Unrecorded differentials are zero; a record whose source no longer
//! lies in the free part is a stale-differential error unless skipping is
//! requested. At truncation `k` a record with `r-1 >= k` is inert, and an
//! active record leaves a `λ^(r-1)`-torsion tail `λ^(k-r+1)·source` behind at
//! the source bidegree (the kernel of `λ^(r-1)·d` over `F2[λ]/λ^k`).

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use alloc::{format, vec};
use core::fmt;

use crate::chart::{Chart, ChartKind, DifferentialRecord, Support, Truncation};
use crate::degree::Window;
use crate::gf2::{BitMatrix, BitVec};
use crate::lambda::{module_homology, MonomialMatrix};

/// Sentinel page for a fully replayed state.
pub const INFINITY_PAGE: u32 = u32::MAX;

/// λ-order of a cyclic summand.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum Order {
    Free,
    Torsion(u32),
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Free => write!(f, "free"),
            Order::Torsion(k) => write!(f, "l^{k}"),
        }
    }
}

/// One cyclic summand of a page module: `λ^exp · support` with the given
/// order. Representatives of free summands always have exponent 0; truncation
/// tails carry positive exponents.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct Summand {
    pub exp: u32,
    pub support: Support,
    pub order: Order,
}

impl Summand {
    pub fn free(support: Support) -> Self {
        Summand { exp: 0, support, order: Order::Free }
    }
}

/// Census entry: a nonzero classical `d_r` record paired with the
/// `λ^(r-1)`-torsion summand it creates at the target bidegree.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CensusEntry {
    pub page: u32,
    pub source_bidegree: (i32, i32),
    pub source: Support,
    pub target_bidegree: (i32, i32),
    pub target: Support,
}

/// State of the spectral sequence at a fixed page.
///
/// Modules are materialized only at bidegrees a record has touched; untouched
/// bidegrees are free on the chart generators there. Immutable once produced.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PageState {
    pub page: u32,
    pub truncation: Truncation,
    pub window: Option<Window>,
    pub r_max: u32,
    gens: BTreeMap<(i32, i32), Vec<String>>,
    modules: BTreeMap<(i32, i32), Vec<Summand>>,
}

impl PageState {
    /// Module at a bidegree: materialized summands, or lazily free on the
    /// chart generators there.
    pub fn module_at(&self, stem: i32, filt: i32) -> Vec<Summand> {
        if let Some(m) = self.modules.get(&(stem, filt)) {
            return m.clone();
        }
        self.gens
            .get(&(stem, filt))
            .map(|names| {
                names
                    .iter()
                    .map(|n| Summand::free(Support::singleton(n)))
                    .collect()
            })
            .unwrap_or_default()
    }

    /// Every bidegree with a nonzero module.
    pub fn bidegrees(&self) -> BTreeSet<(i32, i32)> {
        let mut out: BTreeSet<(i32, i32)> = self.gens.keys().copied().collect();
        out.extend(self.modules.keys().copied());
        out.retain(|&(s, f)| !self.module_at(s, f).is_empty());
        out
    }

    pub fn free_rank_at(&self, stem: i32, filt: i32) -> usize {
        self.module_at(stem, filt)
            .iter()
            .filter(|s| s.order == Order::Free)
            .count()
    }

    /// GF(2) dimension of the `(stem, filt)` module in synthetic degree `d`.
    pub fn dim_at(&self, stem: i32, filt: i32, d: i32) -> usize {
        self.module_at(stem, filt)
            .iter()
            .filter(|s| {
                let top = filt - s.exp as i32;
                match (s.order, self.truncation) {
                    (Order::Free, Truncation::Infinite) => d <= top,
                    (Order::Free, Truncation::Finite(k)) => d <= top && d > top - k as i32,
                    (Order::Torsion(t), _) => d <= top && d > top - t as i32,
                }
            })
            .count()
    }

    /// Column dimension of `π_{stem,d}` read off the whole stem.
    pub fn column_dim(&self, stem: i32, d: i32) -> usize {
        self.bidegrees()
            .iter()
            .filter(|&&(s, _)| s == stem)
            .map(|&(s, f)| self.dim_at(s, f, d))
            .sum()
    }

    pub fn is_safe(&self, stem: i32, filt: i32) -> bool {
        match self.window {
            Some(w) => w.is_safe(stem, filt, self.r_max),
            None => false,
        }
    }

    /// λ-inverted specialization: the free rank per bidegree, which equals
    /// the classical page rank.
    pub fn classical_specialization(&self) -> BTreeMap<(i32, i32), usize> {
        self.bidegrees()
            .iter()
            .map(|&(s, f)| ((s, f), self.free_rank_at(s, f)))
            .filter(|&(_, r)| r > 0)
            .collect()
    }

    /// Canonical printable form, used by determinism checks.
    pub fn describe(&self) -> String {
        let mut out = String::new();
        for (s, f) in self.bidegrees() {
            for sm in self.module_at(s, f) {
                out.push_str(&format!(
                    "({s},{f}) {} l^{} {}\n",
                    sm.order, sm.exp, sm.support
                ));
            }
        }
        out
    }
}

/// Engine failures. Stale and dead records name the offending record.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum EngineError {
    NotSynthetic,
    ChartInvalid(String),
    WrongPage { record: String, expected: u32 },
    StaleSource { record: String },
    DeadTarget { record: String },
    InconsistentRecords { record: String },
    CompositeNonzero { record: String },
    CensusMismatch { bidegree: (i32, i32), detail: String },
}

impl fmt::Display for EngineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EngineError::NotSynthetic => write!(f, "engine requires a synthetic chart"),
            EngineError::ChartInvalid(m) => write!(f, "chart invalid: {m}"),
            EngineError::WrongPage { record, expected } => {
                write!(f, "{record} applied while processing page {expected}")
            }
            EngineError::StaleSource { record } => {
                write!(f, "stale differential: source of {record} is no longer alive")
            }
            EngineError::DeadTarget { record } => {
                write!(f, "target of {record} is not alive in the current page")
            }
            EngineError::InconsistentRecords { record } => {
                write!(f, "records through {record} assign two values to one source")
            }
            EngineError::CompositeNonzero { record } => {
                write!(f, "d∘d is nonzero through {record}")
            }
            EngineError::CensusMismatch { bidegree, detail } => {
                write!(f, "census mismatch at ({},{}): {detail}", bidegree.0, bidegree.1)
            }
        }
    }
}

/// Options for a replay run.
#[derive(Clone, Copy, Debug)]
pub struct RunOptions {
    pub truncation: Truncation,
    /// Skip stale records instead of failing.
    pub skip_stale: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { truncation: Truncation::Infinite, skip_stale: false }
    }
}

/// Free `E2` page of a valid synthetic chart: one free generator per chart
/// generator, base-changed to `F2[λ]/λ^k` under truncation.
pub fn build_e2(chart: &Chart, truncation: Truncation) -> Result<PageState, EngineError> {
    if chart.kind != ChartKind::Synthetic {
        return Err(EngineError::NotSynthetic);
    }
    let findings = crate::chart::validate_chart(chart);
    if let Some(first) = findings.first() {
        return Err(EngineError::ChartInvalid(format!("{first}")));
    }
    let mut gens: BTreeMap<(i32, i32), Vec<String>> = BTreeMap::new();
    for g in chart.generators.values() {
        gens.entry((g.stem, g.filt)).or_default().push(g.name.clone());
    }
    for names in gens.values_mut() {
        names.sort();
    }
    let r_max = chart.differentials.iter().map(|d| d.page).max().unwrap_or(2);
    Ok(PageState {
        page: 2,
        truncation,
        window: chart.window,
        r_max,
        gens,
        modules: BTreeMap::new(),
    })
}

/// Coordinates of `v` in the free-part basis of `summands`.
fn free_coords(summands: &[Summand], v: &Support) -> Option<BitVec> {
    let free: Vec<&Summand> = summands.iter().filter(|s| s.order == Order::Free).collect();
    let mut names: BTreeSet<&String> = BTreeSet::new();
    for s in &free {
        names.extend(s.support.names());
    }
    names.extend(v.names());
    let index: BTreeMap<&String, usize> =
        names.iter().enumerate().map(|(i, n)| (*n, i)).collect();
    let mut basis = BitMatrix::zero(index.len(), free.len());
    for (j, s) in free.iter().enumerate() {
        for n in s.support.names() {
            basis.set(index[n], j, true);
        }
    }
    let mut rhs = BitVec::zero(index.len());
    for n in v.names() {
        rhs.set(index[n], true);
    }
    basis.solve(&rhs)
}

fn combine_free(summands: &[Summand], coords: &BitVec) -> Support {
    let free: Vec<&Summand> = summands.iter().filter(|s| s.order == Order::Free).collect();
    let mut out = Support::zero();
    for j in coords.ones() {
        out = out.add(&free[j].support);
    }
    out
}

struct PageDelta {
    new_modules: BTreeMap<(i32, i32), Vec<Summand>>,
    census: Vec<CensusEntry>,
}

/// Replay all page-`r` records on `state`, producing the page `r+1` state.
pub fn apply_page(
    state: &PageState,
    r: u32,
    records: &[DifferentialRecord],
    chart: &Chart,
    options: &RunOptions,
) -> Result<(PageState, Vec<CensusEntry>), EngineError> {
    let delta = compute_page_delta(state, r, records, chart, options)?;
    let mut next = state.clone();
    next.page = r + 1;
    for (bidegree, module) in delta.new_modules {
        next.modules.insert(bidegree, module);
    }
    Ok((next, delta.census))
}

fn compute_page_delta(
    state: &PageState,
    r: u32,
    records: &[DifferentialRecord],
    chart: &Chart,
    options: &RunOptions,
) -> Result<PageDelta, EngineError> {
    let mut delta = PageDelta { new_modules: BTreeMap::new(), census: Vec::new() };

    // Inert under truncation: λ^(r-1) = 0.
    if options.truncation.kills(r - 1) {
        return Ok(delta);
    }

    let mut active: Vec<&DifferentialRecord> = Vec::new();
    for rec in records {
        if rec.page != r {
            return Err(EngineError::WrongPage { record: rec.id(), expected: r });
        }
        if rec.target.is_zero() {
            continue; // permanent-cycle assertion, no action
        }
        active.push(rec);
    }
    if active.is_empty() {
        return Ok(delta);
    }
    active.sort_by(|a, b| (&a.source).cmp(&b.source));

    // Group records by the bidegrees they touch.
    let mut outgoing: BTreeMap<(i32, i32), Vec<&DifferentialRecord>> = BTreeMap::new();
    let mut incoming: BTreeMap<(i32, i32), Vec<&DifferentialRecord>> = BTreeMap::new();
    for rec in &active {
        let src = chart
            .support_bidegree(&rec.source)
            .map_err(|e| EngineError::ChartInvalid(format!("{e}")))?;
        if free_coords(&state.module_at(src.0, src.1), &rec.source).is_none() {
            if options.skip_stale {
                continue;
            }
            return Err(EngineError::StaleSource { record: rec.id() });
        }
        outgoing.entry(src).or_default().push(rec);
        incoming
            .entry((src.0 - 1, src.1 + r as i32))
            .or_default()
            .push(rec);
    }

    let touched: BTreeSet<(i32, i32)> =
        outgoing.keys().chain(incoming.keys()).copied().collect();

    for &bidegree in &touched {
        let (s, f) = bidegree;
        let current = state.module_at(s, f);
        let free: Vec<&Summand> =
            current.iter().filter(|sm| sm.order == Order::Free).collect();
        let passthrough: Vec<Summand> = current
            .iter()
            .filter(|sm| sm.order != Order::Free)
            .cloned()
            .collect();
        let n = free.len();

        let outs = outgoing.get(&bidegree).cloned().unwrap_or_default();
        let ins = incoming.get(&bidegree).cloned().unwrap_or_default();

        // Outgoing map in free coordinates: one row per record, with the
        // convention that unrecorded sources have zero differential. Sources
        // must be linearly independent, otherwise two records assign values
        // to one combination.
        let mut src_coords: Vec<BitVec> = Vec::new();
        for rec in &outs {
            let c = free_coords(&current, &rec.source)
                .ok_or(EngineError::StaleSource { record: rec.id() })?;
            src_coords.push(c);
        }
        let src_matrix = BitMatrix::from_fn(outs.len(), n, |i, j| src_coords[i].get(j));
        if src_matrix.rank() != outs.len() {
            return Err(EngineError::InconsistentRecords {
                record: outs.last().map(|r| r.id()).unwrap_or_default(),
            });
        }
        // d(x) pairs with record i when x uses source i: express the
        // differential as the row space map B0 = src_matrix (rows = records).
        let b0 = src_matrix;

        // Incoming map: one column per record, target in free coordinates.
        let mut tgt_coords: Vec<BitVec> = Vec::new();
        for rec in &ins {
            let c = free_coords(&current, &rec.target)
                .ok_or(EngineError::DeadTarget { record: rec.id() })?;
            tgt_coords.push(c);
        }
        let a0 = BitMatrix::from_fn(n, ins.len(), |i, j| tgt_coords[j].get(i));

        // d∘d = 0: every incoming target must be annihilated by the outgoing
        // map.
        for (j, rec) in ins.iter().enumerate() {
            let col = a0.col(j);
            if !b0.mul_vec(&col).is_zero() {
                return Err(EngineError::CompositeNonzero { record: rec.id() });
            }
        }

        // Census requires each record to create its own torsion summand.
        if a0.rank() != ins.len() {
            return Err(EngineError::CensusMismatch {
                bidegree,
                detail: format!(
                    "{} records into this bidegree span rank {}",
                    ins.len(),
                    a0.rank()
                ),
            });
        }

        // Homology of the three-term complex of free parts over F2[λ]:
        // sources at degree f-r, middle at f, targets at f+r, differentials
        // of degree +1 with uniform coefficient λ^(r-1).
        let mut d_in = MonomialMatrix::new(vec![f; n], vec![f - r as i32; ins.len()], 1);
        for j in 0..ins.len() {
            for i in 0..n {
                if a0.get(i, j) {
                    d_in.set(i, j, r - 1).expect("differential grading");
                }
            }
        }
        let mut d_out = MonomialMatrix::new(vec![f + r as i32; outs.len()], vec![f; n], 1);
        for i in 0..outs.len() {
            for j in 0..n {
                if b0.get(i, j) {
                    d_out.set(i, j, r - 1).expect("differential grading");
                }
            }
        }
        let homology = module_homology(&d_in, &d_out)
            .map_err(|e| EngineError::ChartInvalid(format!("{e}")))?;

        let mut module: Vec<Summand> = passthrough;

        match state.truncation {
            Truncation::Infinite => {
                for sm in &homology.free {
                    debug_assert!(sm.rep.terms().iter().all(|&(e, _)| e == 0));
                    let mut sup = Support::zero();
                    for &(_, i) in sm.rep.terms() {
                        sup = sup.add(&free[i].support);
                    }
                    module.push(Summand { exp: 0, support: sup, order: Order::Free });
                }
                // Torsion summands pair with incoming records; keep the
                // record's own target as the canonical representative.
                for (idx, rec) in ins.iter().enumerate() {
                    let order = homology
                        .torsion
                        .get(idx)
                        .map(|(k, _)| *k)
                        .ok_or(EngineError::CensusMismatch {
                            bidegree,
                            detail: "fewer torsion summands than records".to_string(),
                        })?;
                    if order != r - 1 {
                        return Err(EngineError::CensusMismatch {
                            bidegree,
                            detail: format!("torsion order l^{order} differs from l^{}", r - 1),
                        });
                    }
                    module.push(Summand {
                        exp: 0,
                        support: rec.target.clone(),
                        order: Order::Torsion(r - 1),
                    });
                    let src = chart.support_bidegree(&rec.source).expect("validated");
                    delta.census.push(CensusEntry {
                        page: r,
                        source_bidegree: src,
                        source: rec.source.clone(),
                        target_bidegree: bidegree,
                        target: rec.target.clone(),
                    });
                }
                if homology.torsion.len() != ins.len() {
                    return Err(EngineError::CensusMismatch {
                        bidegree,
                        detail: "more torsion summands than records".to_string(),
                    });
                }
            }
            Truncation::Finite(k) => {
                // Over F2[λ]/λ^k the quotient by the incoming images looks
                // the same, plus a λ^(r-1) tail λ^(k-r+1)·x for each
                // independent source line x (the kernel of λ^(r-1)·d).
                let span_rank = |vs: &[&BitVec]| -> usize {
                    BitMatrix::from_fn(n, vs.len(), |i, j| vs[j].get(i)).rank()
                };
                let mut accepted: Vec<BitVec> = Vec::new();
                for v in b0.kernel_basis() {
                    let mut vs: Vec<&BitVec> = tgt_coords.iter().collect();
                    vs.extend(accepted.iter());
                    let before = span_rank(&vs);
                    vs.push(&v);
                    if span_rank(&vs) > before {
                        accepted.push(v);
                    }
                }
                for v in accepted {
                    module.push(Summand {
                        exp: 0,
                        support: combine_free(&current, &v),
                        order: Order::Free,
                    });
                }
                for rec in &ins {
                    module.push(Summand {
                        exp: 0,
                        support: rec.target.clone(),
                        order: Order::Torsion(r - 1),
                    });
                    let src = chart.support_bidegree(&rec.source).expect("validated");
                    delta.census.push(CensusEntry {
                        page: r,
                        source_bidegree: src,
                        source: rec.source.clone(),
                        target_bidegree: bidegree,
                        target: rec.target.clone(),
                    });
                }
                // Tails from outgoing records.
                for rec in &outs {
                    module.push(Summand {
                        exp: k - (r - 1),
                        support: rec.source.clone(),
                        order: Order::Torsion(r - 1),
                    });
                }
            }
        }

        module.sort();
        delta.new_modules.insert(bidegree, module);
    }

    Ok(delta)
}

/// Full replay to `E∞` with the torsion census.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub state: PageState,
    pub census: Vec<CensusEntry>,
    /// States indexed from page 2 upward, one per page processed, ending
    /// with the `E∞` state.
    pub history: Vec<PageState>,
}

/// Replay every recorded page in order and verify the census bijection:
/// each λ^(r-1)-torsion summand of `E∞` corresponds to exactly one nonzero
/// classical `d_r` record.
pub fn run_to_infinity(chart: &Chart, options: &RunOptions) -> Result<RunOutcome, EngineError> {
    let mut state = build_e2(chart, options.truncation)?;
    let mut census = Vec::new();
    let mut history = vec![state.clone()];
    let r_max = chart.differentials.iter().map(|d| d.page).max().unwrap_or(2);
    for r in 2..=r_max {
        let records: Vec<DifferentialRecord> = chart
            .differentials
            .iter()
            .filter(|d| d.page == r)
            .cloned()
            .collect();
        let (next, mut entries) = apply_page(&state, r, &records, chart, options)?;
        census.append(&mut entries);
        state = next;
        history.push(state.clone());
    }
    state.page = INFINITY_PAGE;

    if options.truncation == Truncation::Infinite {
        // Census bijection per page: torsion summands of order λ^(r-1)
        // across the chart match nonzero d_r records exactly.
        let mut by_order: BTreeMap<u32, usize> = BTreeMap::new();
        for (s, f) in state.bidegrees() {
            for sm in state.module_at(s, f) {
                if let Order::Torsion(k) = sm.order {
                    *by_order.entry(k).or_default() += 1;
                }
            }
        }
        let mut by_entry: BTreeMap<u32, usize> = BTreeMap::new();
        for e in &census {
            *by_entry.entry(e.page - 1).or_default() += 1;
        }
        if !options.skip_stale {
            let mut by_record: BTreeMap<u32, usize> = BTreeMap::new();
            for d in &chart.differentials {
                if !d.target.is_zero() {
                    *by_record.entry(d.page - 1).or_default() += 1;
                }
            }
            if by_entry != by_record {
                return Err(EngineError::CensusMismatch {
                    bidegree: (0, 0),
                    detail: format!("census {by_entry:?} vs records {by_record:?}"),
                });
            }
        }
        if by_order != by_entry {
            return Err(EngineError::CensusMismatch {
                bidegree: (0, 0),
                detail: format!("torsion orders {by_order:?} vs census {by_entry:?}"),
            });
        }
    }

    Ok(RunOutcome { state, census, history })
}

/// Independent classical replay with λ set to 1: plain GF(2) dimensions per
/// bidegree, used to cross-check the λ-inverted synthetic answer. Shares only
/// the bit-matrix primitives with the graded engine.
pub fn classical_run(chart: &Chart) -> Result<BTreeMap<(i32, i32), usize>, EngineError> {
    let mut basis: BTreeMap<(i32, i32), Vec<Support>> = BTreeMap::new();
    for g in chart.generators.values() {
        basis
            .entry((g.stem, g.filt))
            .or_default()
            .push(Support::singleton(&g.name));
    }
    for v in basis.values_mut() {
        v.sort();
    }

    let express = |basis: &[Support], v: &Support| -> Option<BitVec> {
        let mut names: BTreeSet<&String> = BTreeSet::new();
        for s in basis {
            names.extend(s.names());
        }
        names.extend(v.names());
        let index: BTreeMap<&String, usize> =
            names.iter().enumerate().map(|(i, n)| (*n, i)).collect();
        let m = BitMatrix::from_fn(index.len(), basis.len(), |i, j| {
            basis[j].names().iter().any(|n| index[n] == i)
        });
        let mut rhs = BitVec::zero(index.len());
        for n in v.names() {
            rhs.set(index[n], true);
        }
        m.solve(&rhs)
    };

    let r_max = chart.differentials.iter().map(|d| d.page).max().unwrap_or(2);
    for r in 2..=r_max {
        let records: Vec<&DifferentialRecord> = chart
            .differentials
            .iter()
            .filter(|d| d.page == r && !d.target.is_zero())
            .collect();
        if records.is_empty() {
            continue;
        }
        let mut next = basis.clone();
        let mut touched: BTreeSet<(i32, i32)> = BTreeSet::new();
        let mut outgoing: BTreeMap<(i32, i32), Vec<&DifferentialRecord>> = BTreeMap::new();
        let mut incoming: BTreeMap<(i32, i32), Vec<&DifferentialRecord>> = BTreeMap::new();
        for rec in &records {
            let src = chart
                .support_bidegree(&rec.source)
                .map_err(|e| EngineError::ChartInvalid(format!("{e}")))?;
            outgoing.entry(src).or_default().push(rec);
            incoming
                .entry((src.0 - 1, src.1 + r as i32))
                .or_default()
                .push(rec);
            touched.insert(src);
            touched.insert((src.0 - 1, src.1 + r as i32));
        }
        for &bd in &touched {
            let current = basis.get(&bd).cloned().unwrap_or_default();
            let n = current.len();
            let outs = outgoing.get(&bd).cloned().unwrap_or_default();
            let ins = incoming.get(&bd).cloned().unwrap_or_default();
            let mut b0 = BitMatrix::zero(outs.len(), n);
            for (i, rec) in outs.iter().enumerate() {
                let c = express(&current, &rec.source)
                    .ok_or(EngineError::StaleSource { record: rec.id() })?;
                for j in c.ones() {
                    b0.set(i, j, true);
                }
            }
            let mut img: Vec<BitVec> = Vec::new();
            for rec in &ins {
                img.push(
                    express(&current, &rec.target)
                        .ok_or(EngineError::DeadTarget { record: rec.id() })?,
                );
            }
            // survivors: kernel of b0 modulo span of incoming targets
            let ker = b0.kernel_basis();
            let mut reps: Vec<Support> = Vec::new();
            let mut accepted: Vec<BitVec> = Vec::new();
            let span_rank = |vs: &[BitVec], extra: &[BitVec]| -> usize {
                let m = BitMatrix::from_fn(n, vs.len() + extra.len(), |i, j| {
                    if j < vs.len() {
                        vs[j].get(i)
                    } else {
                        extra[j - vs.len()].get(i)
                    }
                });
                m.rank()
            };
            for v in &ker {
                let mut extra = accepted.clone();
                extra.push(v.clone());
                if span_rank(&img, &extra) > span_rank(&img, &accepted) {
                    let mut sup = Support::zero();
                    for j in v.ones() {
                        sup = sup.add(&current[j]);
                    }
                    reps.push(sup);
                    accepted.push(v.clone());
                }
            }
            next.insert(bd, reps);
        }
        basis = next;
    }

    Ok(basis
        .into_iter()
        .map(|(bd, v)| (bd, v.len()))
        .filter(|&(_, n)| n > 0)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::ChartKind;

    fn toy() -> Chart {
        // a at (1,1), b at (0,3), d2(a) = λ b
        let mut c = Chart::new(ChartKind::Synthetic);
        c.add_generator("a", 1, 1);
        c.add_generator("b", 0, 3);
        c.differentials.push(DifferentialRecord {
            page: 2,
            source: Support::singleton("a"),
            coefficient_exp: 1,
            target: Support::singleton("b"),
            declared: None,
        });
        c
    }

    #[test]
    fn e2_is_free_on_generators() {
        let mut c = Chart::new(ChartKind::Synthetic);
        c.add_generator("a", 1, 1);
        let st = build_e2(&c, Truncation::Infinite).unwrap();
        let m = st.module_at(1, 1);
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].order, Order::Free);
    }

    #[test]
    fn toy_differential() {
        let out = run_to_infinity(&toy(), &RunOptions::default()).unwrap();
        assert!(out.state.module_at(1, 1).is_empty());
        let m = out.state.module_at(0, 3);
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].order, Order::Torsion(1));
        assert_eq!(out.census.len(), 1);
        assert_eq!(out.census[0].page, 2);
        // classical specialization: rank 0 at both bidegrees
        assert!(out.state.classical_specialization().is_empty());
    }

    #[test]
    fn no_differentials_is_identity() {
        let mut c = Chart::new(ChartKind::Synthetic);
        c.add_generator("a", 1, 1);
        c.add_generator("b", 0, 3);
        let out = run_to_infinity(&c, &RunOptions::default()).unwrap();
        assert_eq!(out.state.free_rank_at(1, 1), 1);
        assert_eq!(out.state.free_rank_at(0, 3), 1);
        assert!(out.census.is_empty());
    }

    #[test]
    fn truncation_one_collapses() {
        let out = run_to_infinity(
            &toy(),
            &RunOptions { truncation: Truncation::Finite(1), skip_stale: false },
        )
        .unwrap();
        // every module is a GF(2) vector space and E∞ = E2
        assert_eq!(out.state.module_at(1, 1).len(), 1);
        assert_eq!(out.state.module_at(0, 3).len(), 1);
        assert_eq!(out.state.dim_at(1, 1, 1), 1);
        assert_eq!(out.state.dim_at(1, 1, 0), 0);
        assert!(out.census.is_empty());
    }

    #[test]
    fn truncation_tail() {
        // at k=3 the d2 leaves a λ¹-tail λ²·a at the source
        let out = run_to_infinity(
            &toy(),
            &RunOptions { truncation: Truncation::Finite(3), skip_stale: false },
        )
        .unwrap();
        let src = out.state.module_at(1, 1);
        assert_eq!(src.len(), 1);
        assert_eq!(src[0].order, Order::Torsion(1));
        assert_eq!(src[0].exp, 2);
        let tgt = out.state.module_at(0, 3);
        assert_eq!(tgt.len(), 1);
        assert_eq!(tgt[0].order, Order::Torsion(1));
    }

    #[test]
    fn stale_source_rejected() {
        let mut c = toy();
        // second differential out of the same (already killed) source line
        c.add_generator("z", 0, 4);
        c.differentials.push(DifferentialRecord {
            page: 3,
            source: Support::singleton("a"),
            coefficient_exp: 2,
            target: Support::singleton("z"),
            declared: None,
        });
        let err = run_to_infinity(&c, &RunOptions::default()).unwrap_err();
        assert!(matches!(err, EngineError::StaleSource { .. }));
        // with skipping enabled the run completes and z survives
        let out = run_to_infinity(
            &c,
            &RunOptions { truncation: Truncation::Infinite, skip_stale: true },
        )
        .unwrap();
        assert_eq!(out.state.free_rank_at(0, 4), 1);
    }

    #[test]
    fn classical_and_synthetic_agree() {
        let c = toy();
        let classical = classical_run(&c).unwrap();
        let out = run_to_infinity(&c, &RunOptions::default()).unwrap();
        assert_eq!(classical, out.state.classical_specialization());
    }

    #[test]
    fn determinism_under_permutation() {
        let mut c = Chart::new(ChartKind::Synthetic);
        c.add_generator("a", 5, 2);
        c.add_generator("b", 5, 2);
        c.add_generator("x", 4, 4);
        c.add_generator("y", 4, 4);
        c.differentials.push(DifferentialRecord {
            page: 2,
            source: Support::singleton("a"),
            coefficient_exp: 1,
            target: Support::from_names(["x", "y"]),
            declared: None,
        });
        c.differentials.push(DifferentialRecord {
            page: 2,
            source: Support::singleton("b"),
            coefficient_exp: 1,
            target: Support::singleton("y"),
            declared: None,
        });
        let a = run_to_infinity(&c, &RunOptions::default()).unwrap();
        c.differentials.reverse();
        c.canonicalize();
        let b = run_to_infinity(&c, &RunOptions::default()).unwrap();
        assert_eq!(a.state.describe(), b.state.describe());
    }

    #[test]
    fn dependent_targets_is_census_error() {
        let mut c = Chart::new(ChartKind::Synthetic);
        c.add_generator("a", 5, 2);
        c.add_generator("b", 5, 2);
        c.add_generator("x", 4, 4);
        for src in ["a", "b"] {
            c.differentials.push(DifferentialRecord {
                page: 2,
                source: Support::singleton(src),
                coefficient_exp: 1,
                target: Support::singleton("x"),
                declared: None,
            });
        }
        let err = run_to_infinity(&c, &RunOptions::default()).unwrap_err();
        assert!(matches!(err, EngineError::CensusMismatch { .. }));
    }
}
