//! Homotopy assembly from `E∞` data.
//!
//! A column `π_{s,d}` collects, in increasing filtration, every cyclic `E∞`
//! summand whose λ-power translates reach synthetic degree `d`. The classical
//! 2-local group of a stem is resolved from its λ-free summands plus
//! 2-extension chains: non-hidden links come from `h0` products surviving to
//! `E∞`, hidden links from extension records. A maximal chain of `m+1`
//! summands contributes `Z/2^(m+1)`; a chain that reaches the top of the
//! loaded filtration window is an unresolved tower and contributes a free
//! factor instead (stem-0 behaviour).

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use alloc::{format, vec};
use core::fmt;

use crate::chart::{Support, Truncation};
use crate::pages::{Order, PageState};
use crate::report::Finding;

/// One filtration layer of a homotopy column.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ColumnSummand {
    pub filt: i32,
    /// λ-exponent of the representative at this column degree.
    pub exp: u32,
    pub support: Support,
    /// Remaining order of the cyclic module generated by the representative.
    pub order: Order,
}

/// Assembled `π_{s,d}` with filtration provenance, listed in increasing
/// filtration.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct HomotopyColumn {
    pub stem: i32,
    pub syndeg: i32,
    pub summands: Vec<ColumnSummand>,
    /// Set when a λ-torsion summand sits below another summand in strictly
    /// higher filtration with no λ-extension record supplied: a hidden
    /// λ-extension could merge them and the direct-sum answer is only the
    /// `E∞`-level one.
    pub merge_ambiguity: bool,
}

impl HomotopyColumn {
    pub fn dim(&self) -> usize {
        self.summands.len()
    }
}

/// A hidden λ-extension: `λ · (top of source cyclic) = target`, merging two
/// `E∞` summands of one stem into a single cyclic module.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LambdaExtension {
    pub stem: i32,
    pub source: (i32, Support),
    pub target: (i32, Support),
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ColumnError {
    WindowUnsafe { stem: i32, syndeg: i32 },
    ExtensionMismatch(String),
}

impl fmt::Display for ColumnError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColumnError::WindowUnsafe { stem, syndeg } => {
                write!(f, "column ({stem},{syndeg}) is outside the safe window")
            }
            ColumnError::ExtensionMismatch(m) => write!(f, "lambda extension mismatch: {m}"),
        }
    }
}

/// Assemble `π_{s,d}` from an `E∞` state. Hidden λ-extension records merge
/// the summands they connect; the default module structure is the direct sum.
pub fn assemble_column(
    state: &PageState,
    stem: i32,
    syndeg: i32,
    extensions: &[LambdaExtension],
) -> Result<HomotopyColumn, ColumnError> {
    let safe = state
        .window
        .map(|w| w.s_min <= stem - 1 && stem + 1 <= w.s_max)
        .unwrap_or(false);
    if !safe {
        return Err(ColumnError::WindowUnsafe { stem, syndeg });
    }

    // Stem summands: (filt, exp, support, order), merged along extensions.
    let mut stem_summands: Vec<(i32, u32, Support, Order)> = Vec::new();
    for (s, f) in state.bidegrees() {
        if s != stem {
            continue;
        }
        for sm in state.module_at(s, f) {
            stem_summands.push((f, sm.exp, sm.support, sm.order));
        }
    }

    let mut covered = vec![false; stem_summands.len()];
    for ext in extensions.iter().filter(|e| e.stem == stem) {
        let src = stem_summands
            .iter()
            .position(|(f, _, sup, _)| (*f, sup) == (ext.source.0, &ext.source.1))
            .ok_or_else(|| {
                ColumnError::ExtensionMismatch(format!(
                    "source ({},{}) not an E-infinity summand",
                    ext.source.0, ext.source.1
                ))
            })?;
        let tgt = stem_summands
            .iter()
            .position(|(f, _, sup, _)| (*f, sup) == (ext.target.0, &ext.target.1))
            .ok_or_else(|| {
                ColumnError::ExtensionMismatch(format!(
                    "target ({},{}) not an E-infinity summand",
                    ext.target.0, ext.target.1
                ))
            })?;
        let (sf, se, _, sord) = stem_summands[src].clone();
        let (tf, te, _, tord) = stem_summands[tgt].clone();
        let Order::Torsion(t) = sord else {
            return Err(ColumnError::ExtensionMismatch(
                "source summand is not λ-torsion".into(),
            ));
        };
        // the extension continues the λ-tower: target generated t steps below
        if (tf - te as i32) != (sf - se as i32) - t as i32 {
            return Err(ColumnError::ExtensionMismatch(format!(
                "target degree {} does not continue the source tower at {}",
                tf - te as i32,
                sf - se as i32 - t as i32
            )));
        }
        let merged_order = match tord {
            Order::Free => Order::Free,
            Order::Torsion(u) => Order::Torsion(t + u),
        };
        stem_summands[src].3 = merged_order;
        covered[src] = true;
        covered[tgt] = true;
        stem_summands.remove(tgt);
        covered.remove(tgt);
    }

    let truncation = state.truncation;
    let mut summands = Vec::new();
    for (f, e, sup, ord) in &stem_summands {
        let top = f - *e as i32;
        let live = match (ord, truncation) {
            (Order::Free, Truncation::Infinite) => syndeg <= top,
            (Order::Free, Truncation::Finite(k)) => {
                syndeg <= top && syndeg > top - k as i32
            }
            (Order::Torsion(t), _) => syndeg <= top && syndeg > top - *t as i32,
        };
        if !live {
            continue;
        }
        let drop = (top - syndeg) as u32;
        let order = match (ord, truncation) {
            (Order::Free, Truncation::Infinite) => Order::Free,
            (Order::Free, Truncation::Finite(k)) => Order::Torsion(k - drop),
            (Order::Torsion(t), _) => Order::Torsion(t - drop),
        };
        summands.push(ColumnSummand {
            filt: *f,
            exp: e + drop,
            support: sup.clone(),
            order,
        });
    }
    summands.sort_by(|a, b| (a.filt, &a.support).cmp(&(b.filt, &b.support)));

    // A λ-torsion summand with anything above it could merge under a hidden
    // λ-extension nobody recorded.
    let merge_ambiguity = stem_summands.iter().enumerate().any(|(i, (f, _, _, ord))| {
        matches!(ord, Order::Torsion(_))
            && !covered[i]
            && stem_summands.iter().any(|(f2, ..)| f2 > f)
    });

    Ok(HomotopyColumn { stem, syndeg, summands, merge_ambiguity })
}

/// One link of a 2-extension chain: multiplication by 2 carries the class
/// detected by `from` to the class detected by `to`, one filtration up when
/// non-hidden, with a jump when hidden.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TwoExtensionLink {
    pub stem: i32,
    pub from: (i32, Support),
    pub to: (i32, Support),
    pub hidden: bool,
}

/// A maximal 2-divisibility chain through λ-free summands, increasing
/// filtration along the links.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TwoExtensionChain {
    pub stem: i32,
    pub members: Vec<(i32, Support)>,
    pub hidden: Vec<bool>,
}

/// 2-local abelian group as invariant factors `Z/2^e` plus a free rank.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct GroupResolution {
    /// Exponents of the cyclic factors, ascending.
    pub cyclic_exponents: Vec<u32>,
    pub free_rank: u32,
}

impl GroupResolution {
    pub fn order_log2(&self) -> u32 {
        self.cyclic_exponents.iter().sum()
    }
}

impl fmt::Display for GroupResolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.cyclic_exponents.is_empty() && self.free_rank == 0 {
            return write!(f, "0");
        }
        let mut parts: Vec<String> = Vec::new();
        let mut i = 0;
        while i < self.cyclic_exponents.len() {
            let e = self.cyclic_exponents[i];
            let mut count = 0;
            while i < self.cyclic_exponents.len() && self.cyclic_exponents[i] == e {
                count += 1;
                i += 1;
            }
            let base = format!("Z/{}", 1u64 << e);
            if count == 1 {
                parts.push(base);
            } else {
                parts.push(format!("({base})^{count}"));
            }
        }
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".into()),
            r => parts.push(format!("Z^{r}")),
        }
        write!(f, "{}", parts.join(" + "))
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ResolveError {
    UnknownSummand { filt: i32, support: Support },
    Overlap { filt: i32, support: Support },
    StemMismatch { expected: i32, got: i32 },
    FiltrationOrder { from: i32, to: i32 },
}

impl fmt::Display for ResolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResolveError::UnknownSummand { filt, support } => {
                write!(f, "link endpoint ({filt},{support}) is not a λ-free summand")
            }
            ResolveError::Overlap { filt, support } => {
                write!(f, "chains overlap at ({filt},{support})")
            }
            ResolveError::StemMismatch { expected, got } => {
                write!(f, "chain link crosses stems: {expected} vs {got}")
            }
            ResolveError::FiltrationOrder { from, to } => {
                write!(f, "link filtration must increase: {from} -> {to}")
            }
        }
    }
}

/// Resolution output with the chains that produced it.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Resolution {
    pub group: GroupResolution,
    pub chains: Vec<TwoExtensionChain>,
}

/// Resolve the 2-local group of one stem from its λ-free summands and
/// 2-extension links. Links must partition the summands into chains
/// (singletons allowed). When `open_top` is set, a chain ending at that
/// filtration is an unresolved tower and contributes a free factor.
pub fn resolve_classical_group(
    stem: i32,
    summands: &[(i32, Support)],
    links: &[TwoExtensionLink],
    open_top: Option<i32>,
) -> Result<Resolution, ResolveError> {
    let index: BTreeMap<&(i32, Support), usize> =
        summands.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let mut next: Vec<Option<usize>> = vec![None; summands.len()];
    let mut prev: Vec<Option<usize>> = vec![None; summands.len()];
    let mut hidden_out: Vec<bool> = vec![false; summands.len()];
    for link in links {
        if link.stem != stem {
            return Err(ResolveError::StemMismatch { expected: stem, got: link.stem });
        }
        if link.to.0 <= link.from.0 {
            return Err(ResolveError::FiltrationOrder { from: link.from.0, to: link.to.0 });
        }
        let a = *index.get(&link.from).ok_or(ResolveError::UnknownSummand {
            filt: link.from.0,
            support: link.from.1.clone(),
        })?;
        let b = *index.get(&link.to).ok_or(ResolveError::UnknownSummand {
            filt: link.to.0,
            support: link.to.1.clone(),
        })?;
        if next[a].is_some() {
            return Err(ResolveError::Overlap {
                filt: link.from.0,
                support: link.from.1.clone(),
            });
        }
        if prev[b].is_some() {
            return Err(ResolveError::Overlap { filt: link.to.0, support: link.to.1.clone() });
        }
        next[a] = Some(b);
        prev[b] = Some(a);
        hidden_out[a] = link.hidden;
    }

    let mut chains = Vec::new();
    let mut group = GroupResolution::default();
    let mut heads: Vec<usize> = (0..summands.len()).filter(|&i| prev[i].is_none()).collect();
    heads.sort_by_key(|&i| (summands[i].0, summands[i].1.clone()));
    for head in heads {
        let mut members = Vec::new();
        let mut hidden = Vec::new();
        let mut cur = head;
        loop {
            members.push(summands[cur].clone());
            match next[cur] {
                Some(n) => {
                    hidden.push(hidden_out[cur]);
                    cur = n;
                }
                None => break,
            }
        }
        let top_filt = members.last().unwrap().0;
        if open_top == Some(top_filt) {
            group.free_rank += 1;
        } else {
            group.cyclic_exponents.push(members.len() as u32);
        }
        chains.push(TwoExtensionChain { stem, members, hidden });
    }
    group.cyclic_exponents.sort_unstable();
    Ok(Resolution { group, chains })
}

/// Exactness check for the cofiber sequence `S --λ^k--> S -> S/λ^k` over a
/// rectangle of columns: at each `(s,d)`,
/// `dim coker(λ^k on π_{s,·}) + dim ker(λ^k on π_{s-1,·} at d+1+k)` must
/// equal `dim π_{s,d}(S/λ^k)`. The first state must be an untruncated run,
/// the second the truncation-`k` run of the same chart.
pub fn bockstein_les_check(
    full: &PageState,
    truncated: &PageState,
    k: u32,
    stems: (i32, i32),
    degrees: (i32, i32),
) -> Vec<Finding> {
    debug_assert_eq!(full.truncation, Truncation::Infinite);
    let mut findings = Vec::new();
    for s in stems.0..=stems.1 {
        for d in degrees.0..=degrees.1 {
            let lhs = coker_dim(full, s, d, k) + ker_dim(full, s - 1, d + 1 + k as i32, k);
            let rhs = truncated.column_dim(s, d);
            if lhs != rhs {
                findings.push(Finding::error(
                    format!("bockstein:({s},{d})"),
                    format!("exactness failure: coker+ker = {lhs} but dim = {rhs}"),
                ));
            }
        }
    }
    crate::report::sort_findings(&mut findings);
    findings
}

/// `dim coker(λ^k : π_{s,d+k} -> π_{s,d})` from the untruncated `E∞`.
fn coker_dim(state: &PageState, stem: i32, d: i32, k: u32) -> usize {
    let mut dim = 0;
    for (s, f) in state.bidegrees() {
        if s != stem {
            continue;
        }
        for sm in state.module_at(s, f) {
            let g = f - sm.exp as i32;
            match sm.order {
                Order::Free => {
                    if d <= g && g < d + k as i32 {
                        dim += 1;
                    }
                }
                Order::Torsion(t) => {
                    let lo = (g - t as i32).max(g - k as i32);
                    if lo < d && d <= g {
                        dim += 1;
                    }
                }
            }
        }
    }
    dim
}

/// `dim ker(λ^k : π_{s,deg} -> π_{s,deg-k})` from the untruncated `E∞`.
fn ker_dim(state: &PageState, stem: i32, deg: i32, k: u32) -> usize {
    let mut dim = 0;
    for (s, f) in state.bidegrees() {
        if s != stem {
            continue;
        }
        for sm in state.module_at(s, f) {
            if let Order::Torsion(t) = sm.order {
                let g = f - sm.exp as i32;
                if g - (t as i32) < deg && deg <= g && deg <= g - t as i32 + k as i32 {
                    dim += 1;
                }
            }
        }
    }
    dim
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{Chart, ChartKind, DifferentialRecord};
    use crate::degree::Window;
    use crate::pages::{run_to_infinity, RunOptions};
    use alloc::string::ToString;

    fn toy_chart() -> Chart {
        let mut c = Chart::new(ChartKind::Synthetic);
        c.add_generator("a", 1, 1);
        c.add_generator("b", 0, 3);
        c.window = Some(Window::new(-2, 3, 0, 8));
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
    fn column_of_toy_chart() {
        let out = run_to_infinity(&toy_chart(), &RunOptions::default()).unwrap();
        // the λ¹-torsion class b occupies column (0,3) only
        let col = assemble_column(&out.state, 0, 3, &[]).unwrap();
        assert_eq!(col.dim(), 1);
        assert_eq!(col.summands[0].filt, 3);
        assert_eq!(col.summands[0].order, Order::Torsion(1));
        let below = assemble_column(&out.state, 0, 2, &[]).unwrap();
        assert_eq!(below.dim(), 0);
        let empty = assemble_column(&out.state, 1, 1, &[]).unwrap();
        assert_eq!(empty.dim(), 0);
    }

    #[test]
    fn column_outside_window_errors() {
        let out = run_to_infinity(&toy_chart(), &RunOptions::default()).unwrap();
        assert!(matches!(
            assemble_column(&out.state, 3, 0, &[]),
            Err(ColumnError::WindowUnsafe { .. })
        ));
    }

    #[test]
    fn lambda_periodicity_of_free_part() {
        let mut c = Chart::new(ChartKind::Synthetic);
        c.add_generator("h2", 3, 1);
        c.add_generator("h0h2", 3, 2);
        c.window = Some(Window::new(0, 5, 0, 8));
        let out = run_to_infinity(&c, &RunOptions::default()).unwrap();
        let lo = assemble_column(&out.state, 3, -4, &[]).unwrap();
        let hi = assemble_column(&out.state, 3, -5, &[]).unwrap();
        assert_eq!(lo.dim(), 2);
        assert_eq!(hi.dim(), 2);
        for (a, b) in lo.summands.iter().zip(&hi.summands) {
            assert_eq!(a.filt, b.filt);
            assert_eq!(a.support, b.support);
            assert_eq!(a.exp + 1, b.exp);
        }
    }

    fn sup(n: &str) -> Support {
        Support::singleton(n)
    }

    #[test]
    fn singleton_resolution() {
        let summands = vec![(1, sup("x")), (2, sup("y")), (5, sup("z"))];
        let r = resolve_classical_group(8, &summands, &[], None).unwrap();
        assert_eq!(r.group.cyclic_exponents, vec![1, 1, 1]);
        assert_eq!(r.group.to_string(), "(Z/2)^3");
        assert_eq!(format!("{}", r.group), "(Z/2)^3");
    }

    #[test]
    fn tower_resolution() {
        let summands = vec![(1, sup("h2")), (2, sup("h0h2")), (3, sup("h0^2h2"))];
        let links = vec![
            TwoExtensionLink { stem: 3, from: (1, sup("h2")), to: (2, sup("h0h2")), hidden: false },
            TwoExtensionLink {
                stem: 3,
                from: (2, sup("h0h2")),
                to: (3, sup("h0^2h2")),
                hidden: false,
            },
        ];
        let r = resolve_classical_group(3, &summands, &links, None).unwrap();
        assert_eq!(r.group.to_string(), "Z/8");
        assert_eq!(r.chains.len(), 1);
        assert_eq!(r.chains[0].members.len(), 3);
    }

    #[test]
    fn open_tower_is_free() {
        let summands: Vec<(i32, Support)> = (0..=10)
            .map(|f| (f, if f == 0 { sup("one") } else { Support::singleton(format!("h0^{f}")) }))
            .collect();
        let links: Vec<TwoExtensionLink> = (0..10)
            .map(|f| TwoExtensionLink {
                stem: 0,
                from: summands[f as usize].clone(),
                to: summands[f as usize + 1].clone(),
                hidden: false,
            })
            .collect();
        let r = resolve_classical_group(0, &summands, &links, Some(10)).unwrap();
        assert_eq!(r.group.to_string(), "Z");
        assert_eq!(r.group.free_rank, 1);
        assert!(r.group.cyclic_exponents.is_empty());
    }

    #[test]
    fn chain_order_invariance() {
        let summands = vec![(1, sup("a")), (2, sup("b")), (4, sup("c")), (5, sup("d"))];
        let mut links = vec![
            TwoExtensionLink { stem: 9, from: (1, sup("a")), to: (2, sup("b")), hidden: false },
            TwoExtensionLink { stem: 9, from: (4, sup("c")), to: (5, sup("d")), hidden: true },
        ];
        let a = resolve_classical_group(9, &summands, &links, None).unwrap();
        links.reverse();
        let b = resolve_classical_group(9, &summands, &links, None).unwrap();
        assert_eq!(a.group, b.group);
        assert_eq!(a.group.to_string(), "(Z/4)^2");
    }

    #[test]
    fn overlap_and_stem_errors() {
        let summands = vec![(1, sup("a")), (2, sup("b")), (3, sup("c"))];
        let links = vec![
            TwoExtensionLink { stem: 9, from: (1, sup("a")), to: (3, sup("c")), hidden: false },
            TwoExtensionLink { stem: 9, from: (2, sup("b")), to: (3, sup("c")), hidden: false },
        ];
        assert!(matches!(
            resolve_classical_group(9, &summands, &links, None),
            Err(ResolveError::Overlap { .. })
        ));
        let cross = vec![TwoExtensionLink {
            stem: 8,
            from: (1, sup("a")),
            to: (2, sup("b")),
            hidden: false,
        }];
        assert!(matches!(
            resolve_classical_group(9, &summands, &cross, None),
            Err(ResolveError::StemMismatch { .. })
        ));
    }

    #[test]
    fn order_count_invariant() {
        let summands = vec![(1, sup("a")), (2, sup("b")), (3, sup("c")), (7, sup("d"))];
        let links = vec![
            TwoExtensionLink { stem: 20, from: (1, sup("a")), to: (2, sup("b")), hidden: false },
            TwoExtensionLink { stem: 20, from: (2, sup("b")), to: (3, sup("c")), hidden: true },
        ];
        let r = resolve_classical_group(20, &summands, &links, None).unwrap();
        assert_eq!(r.group.order_log2() as usize, summands.len());
    }

    #[test]
    fn bockstein_k1_differential_free() {
        let mut c = Chart::new(ChartKind::Synthetic);
        c.add_generator("a", 1, 1);
        c.add_generator("b", 0, 3);
        let full = run_to_infinity(&c, &RunOptions::default()).unwrap();
        let trunc = run_to_infinity(
            &c,
            &RunOptions { truncation: Truncation::Finite(1), skip_stale: false },
        )
        .unwrap();
        let findings = bockstein_les_check(&full.state, &trunc.state, 1, (-1, 2), (-4, 6));
        assert!(findings.is_empty(), "{findings:?}");
    }

    #[test]
    fn bockstein_k1_toy_differential() {
        let c = toy_chart();
        let full = run_to_infinity(&c, &RunOptions::default()).unwrap();
        let trunc = run_to_infinity(
            &c,
            &RunOptions { truncation: Truncation::Finite(1), skip_stale: false },
        )
        .unwrap();
        // the λ¹-torsion class contributes to the coker slot at (0,3) and the
        // ker slot feeding (1,1)
        let findings = bockstein_les_check(&full.state, &trunc.state, 1, (-1, 2), (-4, 6));
        assert!(findings.is_empty(), "{findings:?}");
        assert_eq!(trunc.state.column_dim(1, 1), 1);
        assert_eq!(trunc.state.column_dim(0, 3), 1);
    }

    #[test]
    fn bockstein_zero_chart() {
        let c = Chart::new(ChartKind::Synthetic);
        let full = run_to_infinity(&c, &RunOptions::default()).unwrap();
        let trunc = run_to_infinity(
            &c,
            &RunOptions { truncation: Truncation::Finite(2), skip_stale: false },
        )
        .unwrap();
        assert!(bockstein_les_check(&full.state, &trunc.state, 2, (-2, 2), (-5, 5)).is_empty());
    }

    #[test]
    fn bockstein_catches_wrong_truncation() {
        // comparing against the wrong truncation must fail somewhere
        let c = toy_chart();
        let full = run_to_infinity(&c, &RunOptions::default()).unwrap();
        let trunc3 = run_to_infinity(
            &c,
            &RunOptions { truncation: Truncation::Finite(3), skip_stale: false },
        )
        .unwrap();
        let findings = bockstein_les_check(&full.state, &trunc3.state, 1, (-1, 2), (-6, 6));
        assert!(!findings.is_empty());
    }

    #[test]
    fn bockstein_k2_toy_differential() {
        let c = toy_chart();
        let full = run_to_infinity(&c, &RunOptions::default()).unwrap();
        let trunc = run_to_infinity(
            &c,
            &RunOptions { truncation: Truncation::Finite(2), skip_stale: false },
        )
        .unwrap();
        let findings = bockstein_les_check(&full.state, &trunc.state, 2, (-1, 2), (-6, 6));
        assert!(findings.is_empty(), "{findings:?}");
    }
}
