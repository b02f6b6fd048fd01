//! Cell-complex degree validation and the mod-λ splitting criterion.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::chart::{CellComplex, Chart};
use crate::report::{sort_findings, Finding};

/// Outcome of [`check_cell_complex`]: findings plus one line per checked
/// attachment edge.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CellReport {
    pub findings: Vec<Finding>,
    pub edges: Vec<String>,
}

impl CellReport {
    pub fn is_ok(&self) -> bool {
        self.findings.is_empty()
    }
}

/// Verify every attachment of a cell complex: the class must be declared,
/// the upper stem strictly larger, and the class degree must equal
/// `(s_u - 1 - s_l, d_u + 1 - d_l)`.
pub fn check_cell_complex(cx: &CellComplex, chart: &Chart) -> CellReport {
    let mut findings = Vec::new();
    let mut edges = Vec::new();
    for (u, l, exp, class) in &cx.attachments {
        let id = format!("cell:{}:{}->{}", cx.name, u, l);
        if *u >= cx.cells.len() || *l >= cx.cells.len() {
            findings.push(Finding::error(id, "attachment references a missing cell"));
            continue;
        }
        let (su, du) = cx.cells[*u];
        let (sl, dl) = cx.cells[*l];
        if su <= sl {
            findings.push(Finding::error(
                id.clone(),
                format!("upper stem {su} must exceed lower stem {sl}"),
            ));
        }
        let Some(c) = chart.classes.get(class) else {
            findings.push(Finding::error(id, format!("unknown class `{class}`")));
            continue;
        };
        let class_deg = (c.stem, c.syndeg - *exp as i32);
        let required = (su - 1 - sl, du + 1 - dl);
        if class_deg != required {
            findings.push(Finding::error(
                id.clone(),
                format!(
                    "attachment l^{exp}{class} has degree ({},{}) but cells force ({},{})",
                    class_deg.0, class_deg.1, required.0, required.1
                ),
            ));
        } else {
            edges.push(format!(
                "{}: ({su},{du}) -> ({sl},{dl}) along l^{exp}{class} at ({},{})",
                cx.name, class_deg.0, class_deg.1
            ));
        }
    }
    sort_findings(&mut findings);
    edges.sort();
    CellReport { findings, edges }
}

/// Why a complex fails to split after smashing with `S/λ`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Obstruction {
    /// An attachment class with λ-exponent 0 survives mod λ; carries the
    /// mod-λ attachment (the class detector) when one is declared.
    NonDivisible { upper: usize, lower: usize, class: String, mod_lambda: Option<String> },
    /// A skipped-cell attachment could live in a nonempty bidegree; carries
    /// the generators found there.
    SkippedCell { upper: usize, lower: usize, bidegree: (i32, i32), generators: Vec<String> },
}

/// Result of [`mod_lambda_split_check`].
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum SplitResult {
    Splits,
    Obstructed(Vec<Obstruction>),
    /// The chart window cannot answer every emptiness query; carries the
    /// unqueryable bidegrees.
    Inconclusive(Vec<(i32, i32)>),
}

/// Decide whether `X/λ` splits as a wedge of `S/λ` suspensions: every
/// attachment must be λ-divisible and every potential attachment between
/// unattached cells must land in an empty bidegree of the chart window.
pub fn mod_lambda_split_check(cx: &CellComplex, chart: &Chart) -> SplitResult {
    let mut obstructions = Vec::new();
    let mut unqueryable = Vec::new();

    for (u, l, exp, class) in &cx.attachments {
        if *exp == 0 {
            let mod_lambda = chart
                .classes
                .get(class)
                .and_then(|c| c.detector.as_ref())
                .map(|d| format!("{}", d.support));
            obstructions.push(Obstruction::NonDivisible {
                upper: *u,
                lower: *l,
                class: class.clone(),
                mod_lambda,
            });
        }
    }

    for u in 0..cx.cells.len() {
        for l in 0..cx.cells.len() {
            if u == l || cx.cells[u].0 <= cx.cells[l].0 {
                continue;
            }
            if cx
                .attachments
                .iter()
                .any(|(au, al, _, _)| (*au, *al) == (u, l) || (*au, *al) == (l, u))
            {
                continue;
            }
            let (su, du) = cx.cells[u];
            let (sl, dl) = cx.cells[l];
            let bidegree = (su - 1 - sl, du + 1 - dl);
            match chart.is_empty_bidegree(bidegree.0, bidegree.1) {
                Some(true) => {}
                Some(false) => {
                    let gens = chart
                        .generators_at(bidegree.0, bidegree.1)
                        .iter()
                        .map(|g| g.name.clone())
                        .collect();
                    obstructions.push(Obstruction::SkippedCell {
                        upper: u,
                        lower: l,
                        bidegree,
                        generators: gens,
                    });
                }
                None => unqueryable.push(bidegree),
            }
        }
    }

    if !obstructions.is_empty() {
        SplitResult::Obstructed(obstructions)
    } else if !unqueryable.is_empty() {
        unqueryable.sort();
        unqueryable.dedup();
        SplitResult::Inconclusive(unqueryable)
    } else {
        SplitResult::Splits
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{ChartKind, ClassDecl, LambdaElement, Support};
    use crate::degree::Window;
    use alloc::string::ToString;
    use alloc::vec;

    fn class(c: &mut Chart, name: &str, stem: i32, syndeg: i32, det: Option<&str>) {
        c.classes.insert(
            name.to_string(),
            ClassDecl {
                name: name.to_string(),
                stem,
                syndeg,
                detector: det.map(|d| LambdaElement::new(0, Support::singleton(d))),
                relations: vec![],
            },
        );
    }

    fn paper_chart() -> Chart {
        let mut c = Chart::new(ChartKind::Synthetic);
        c.window = Some(Window::new(-1, 85, 0, 16));
        c.add_generator("h0", 0, 1);
        c.add_generator("h1", 1, 1);
        c.add_generator("h2", 3, 1);
        c.add_generator("h5^2", 62, 2);
        c.add_generator("g", 20, 4);
        c.add_generator("m1", 77, 7);
        c.add_generator("h6", 63, 1);
        class(&mut c, "t2", 0, 1, Some("h0"));
        class(&mut c, "eta", 1, 1, Some("h1"));
        class(&mut c, "nu", 3, 1, Some("h2"));
        class(&mut c, "mu", 77, 7, Some("m1"));
        class(&mut c, "theta5", 62, 2, Some("h5^2"));
        class(&mut c, "beta", 79, 8, None);
        class(&mut c, "alpha", 82, 8, None);
        c
    }

    fn six_cell_complex() -> CellComplex {
        CellComplex {
            name: "X".into(),
            cells: vec![(0, -2), (20, 4), (3, 1), (81, 6), (83, 4), (83, 7)],
            attachments: vec![
                (3, 2, 1, "mu".into()),
                (4, 3, 2, "eta".into()),
                (4, 1, 1, "theta5".into()),
                (4, 0, 1, "alpha".into()),
                (5, 2, 1, "beta".into()),
            ],
        }
    }

    #[test]
    fn six_cell_attachments_check() {
        let c = paper_chart();
        let report = check_cell_complex(&six_cell_complex(), &c);
        assert!(report.is_ok(), "{:?}", report.findings);
        assert_eq!(report.edges.len(), 5);
    }

    #[test]
    fn cofiber_rule() {
        // cofiber of a class γ in π_{s,d}: cells (0,0) and (s+1, d-1)
        let mut c = paper_chart();
        class(&mut c, "gamma", 9, 4, None);
        let cx = CellComplex {
            name: "cof".into(),
            cells: vec![(0, 0), (10, 3)],
            attachments: vec![(1, 0, 0, "gamma".into())],
        };
        assert!(check_cell_complex(&cx, &c).is_ok());
    }

    #[test]
    fn moved_cell_is_caught() {
        let c = paper_chart();
        let mut cx = six_cell_complex();
        cx.cells[3] = (81, 5);
        let report = check_cell_complex(&cx, &c);
        assert!(!report.is_ok());
        // both the λμ edge and the λ²η edge through that cell break
        assert_eq!(report.findings.len(), 2);
    }

    #[test]
    fn three_cell_complex_splits() {
        // cells (3,1),(81,6),(83,4) along λμ and λ²η; the skipped pair needs
        // stem 79 filtration 4 to be empty.
        let c = paper_chart();
        let cx = CellComplex {
            name: "Y".into(),
            cells: vec![(3, 1), (81, 6), (83, 4)],
            attachments: vec![(1, 0, 1, "mu".into()), (2, 1, 2, "eta".into())],
        };
        assert_eq!(mod_lambda_split_check(&cx, &c), SplitResult::Splits);
    }

    #[test]
    fn two_cell_obstruction_pair() {
        // (20,4) <- (83,4) <- (84,4) along λθ5 and 2~: the 2~ attachment
        // survives mod λ as h0, and the skipped pair lands on h6 at (63,1).
        let c = paper_chart();
        let cx = CellComplex {
            name: "D".into(),
            cells: vec![(20, 4), (83, 4), (84, 4)],
            attachments: vec![(1, 0, 1, "theta5".into()), (2, 1, 0, "t2".into())],
        };
        assert!(check_cell_complex(&cx, &c).is_ok());
        let SplitResult::Obstructed(obs) = mod_lambda_split_check(&cx, &c) else {
            panic!("expected obstructions");
        };
        assert_eq!(obs.len(), 2);
        assert!(obs.iter().any(|o| matches!(
            o,
            Obstruction::NonDivisible { mod_lambda: Some(m), .. } if m == "h0"
        )));
        assert!(obs.iter().any(|o| matches!(
            o,
            Obstruction::SkippedCell { bidegree: (63, 1), generators, .. }
                if generators == &vec!["h6".to_string()]
        )));
    }

    #[test]
    fn no_attachments_splits() {
        let c = paper_chart();
        let cx = CellComplex {
            name: "wedge".into(),
            cells: vec![(3, 1), (20, 4)],
            attachments: vec![],
        };
        // potential attachment at (16,4) is empty in the window
        assert_eq!(mod_lambda_split_check(&cx, &c), SplitResult::Splits);
    }

    #[test]
    fn missing_window_is_inconclusive() {
        let mut c = paper_chart();
        c.window = Some(Window::new(0, 50, 0, 16));
        let cx = CellComplex {
            name: "Y".into(),
            cells: vec![(3, 1), (81, 6), (83, 4)],
            attachments: vec![(1, 0, 1, "mu".into()), (2, 1, 2, "eta".into())],
        };
        let SplitResult::Inconclusive(missing) = mod_lambda_split_check(&cx, &c) else {
            panic!("expected inconclusive");
        };
        assert_eq!(missing, vec![(79, 4)]);
    }
}
