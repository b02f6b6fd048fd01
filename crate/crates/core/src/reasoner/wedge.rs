//! Maps between finite wedges of sphere summands, with symbolic entries, and
//! their composition in `S/λ`-modules.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use alloc::vec;
use core::fmt;

use crate::chart::Chart;

/// One factor of a term: a chart generator or a named unknown.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum Factor {
    Known(String),
    Symbol(String),
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Factor::Known(n) => write!(f, "{n}"),
            Factor::Symbol(n) => write!(f, "?{n}"),
        }
    }
}

/// Product of factors; the empty product is the identity.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Default)]
pub struct Term(pub Vec<Factor>);

impl Term {
    fn mul(&self, other: &Term) -> Term {
        let mut t = self.0.clone();
        t.extend(other.0.iter().cloned());
        t.sort();
        Term(t)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (i, fac) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            write!(f, "{fac}")?;
        }
        Ok(())
    }
}

/// GF(2) sum of terms in canonical sorted form; duplicate terms cancel.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Default)]
pub struct Expression(Vec<Term>);

impl Expression {
    pub fn zero() -> Self {
        Expression(Vec::new())
    }

    pub fn one() -> Self {
        Expression(vec![Term::default()])
    }

    pub fn known(name: impl Into<String>) -> Self {
        Expression(vec![Term(vec![Factor::Known(name.into())])])
    }

    pub fn symbol(name: impl Into<String>) -> Self {
        Expression(vec![Term(vec![Factor::Symbol(name.into())])])
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn terms(&self) -> &[Term] {
        &self.0
    }

    fn toggle(&mut self, t: Term) {
        match self.0.binary_search(&t) {
            Ok(i) => {
                self.0.remove(i);
            }
            Err(i) => self.0.insert(i, t),
        }
    }

    pub fn add(&self, other: &Expression) -> Expression {
        let mut out = self.clone();
        for t in &other.0 {
            out.toggle(t.clone());
        }
        out
    }

    pub fn mul(&self, other: &Expression) -> Expression {
        let mut out = Expression::zero();
        for a in &self.0 {
            for b in &other.0 {
                out.toggle(a.mul(b));
            }
        }
        out
    }

    /// Replace a symbol by an expression, distributing over GF(2).
    pub fn substitute(&self, symbol: &str, value: &Expression) -> Expression {
        let mut out = Expression::zero();
        for term in &self.0 {
            let mut expanded = Expression::one();
            for factor in &term.0 {
                let factor_expr = match factor {
                    Factor::Symbol(n) if n == symbol => value.clone(),
                    f => Expression(vec![Term(vec![f.clone()])]),
                };
                expanded = expanded.mul(&factor_expr);
            }
            out = out.add(&expanded);
        }
        out
    }

    /// Collapse adjacent known factors through the chart's product records;
    /// pairs with no record stay symbolic. A known zero product kills the
    /// term.
    pub fn evaluate(&self, chart: &Chart) -> Expression {
        let mut out = Expression::zero();
        'terms: for term in &self.0 {
            let mut knowns: Vec<String> = Vec::new();
            let mut symbols: Vec<Factor> = Vec::new();
            for f in &term.0 {
                match f {
                    Factor::Known(n) => knowns.push(n.clone()),
                    s => symbols.push(s.clone()),
                }
            }
            // fold the known factors left to right
            let mut acc: Vec<Vec<String>> = vec![Vec::new()]; // sum of products
            for name in knowns {
                let mut next: Vec<Vec<String>> = Vec::new();
                for prod in &acc {
                    match prod.last() {
                        None => next.push(vec![name.clone()]),
                        Some(last) => match chart.product_of(last, &name) {
                            Some(result) => {
                                if result.is_zero() {
                                    continue;
                                }
                                for r in result.names() {
                                    let mut p = prod.clone();
                                    p.pop();
                                    p.push(r.clone());
                                    next.push(p);
                                }
                            }
                            None => {
                                let mut p = prod.clone();
                                p.push(name.clone());
                                next.push(p);
                            }
                        },
                    }
                }
                if next.is_empty() {
                    continue 'terms;
                }
                acc = next;
            }
            for prod in acc {
                let mut t: Vec<Factor> =
                    prod.into_iter().map(Factor::Known).collect();
                t.extend(symbols.iter().cloned());
                t.sort();
                out.toggle(Term(t));
            }
        }
        out
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

/// A map between finite wedges of sphere summands: entries indexed by
/// `(source summand, target summand)`, defaulting to zero.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct WedgeMap {
    pub source: Vec<(i32, i32)>,
    pub target: Vec<(i32, i32)>,
    pub entries: BTreeMap<(usize, usize), Expression>,
}

impl WedgeMap {
    pub fn new(source: Vec<(i32, i32)>, target: Vec<(i32, i32)>) -> Self {
        WedgeMap { source, target, entries: BTreeMap::new() }
    }

    pub fn identity(cells: Vec<(i32, i32)>) -> Self {
        let mut m = WedgeMap::new(cells.clone(), cells);
        for i in 0..m.source.len() {
            m.entries.insert((i, i), Expression::one());
        }
        m
    }

    pub fn set(&mut self, src: usize, tgt: usize, e: Expression) {
        self.entries.insert((src, tgt), e);
    }

    pub fn entry(&self, src: usize, tgt: usize) -> Expression {
        self.entries.get(&(src, tgt)).cloned().unwrap_or_default()
    }

    /// Chart bidegree an entry lives in: the difference of summand degrees,
    /// read with `f = d` in `S/λ`-modules.
    pub fn entry_bidegree(&self, src: usize, tgt: usize) -> (i32, i32) {
        (
            self.source[src].0 - self.target[tgt].0,
            self.source[src].1 - self.target[tgt].1,
        )
    }

    /// Zero every entry whose bidegree is empty in the chart window;
    /// entries outside the window are left alone.
    pub fn force_zeros(&self, chart: &Chart) -> WedgeMap {
        let mut out = self.clone();
        for i in 0..self.source.len() {
            for j in 0..self.target.len() {
                let (s, f) = self.entry_bidegree(i, j);
                if chart.is_empty_bidegree(s, f) == Some(true) {
                    out.entries.remove(&(i, j));
                }
            }
        }
        out
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum WedgeError {
    Mismatch { expected: Vec<(i32, i32)>, got: Vec<(i32, i32)> },
}

impl fmt::Display for WedgeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WedgeError::Mismatch { expected, got } => {
                write!(f, "wedge mismatch: composing through {expected:?} vs {got:?}")
            }
        }
    }
}

/// Composite `g ∘ f` of wedge maps, after forcing empty-bidegree entries of
/// both to zero and collapsing known products through the chart records.
pub fn compose_wedge_maps(f: &WedgeMap, g: &WedgeMap, chart: &Chart) -> Result<WedgeMap, WedgeError> {
    if f.target != g.source {
        return Err(WedgeError::Mismatch { expected: f.target.clone(), got: g.source.clone() });
    }
    let f = f.force_zeros(chart);
    let g = g.force_zeros(chart);
    let mut out = WedgeMap::new(f.source.clone(), g.target.clone());
    for i in 0..out.source.len() {
        for k in 0..out.target.len() {
            let mut acc = Expression::zero();
            for j in 0..f.target.len() {
                acc = acc.add(&g.entry(j, k).mul(&f.entry(i, j)));
            }
            let acc = acc.evaluate(chart);
            if !acc.is_zero() {
                out.entries.insert((i, k), acc);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{ChartKind, ProductRecord, Support};
    use crate::degree::Window;

    fn wedge_chart() -> Chart {
        let mut c = Chart::new(ChartKind::Synthetic);
        c.window = Some(Window::new(-1, 85, 0, 16));
        c.add_generator("one", 0, 0);
        c.add_generator("h0", 0, 1);
        c.add_generator("h2", 3, 1);
        c.add_generator("g", 20, 4);
        c.add_generator("h6", 63, 1);
        c.add_generator("e2", 80, 4);
        c.add_generator("h1^2h4h6", 80, 4);
        c.add_generator("h2e2", 83, 5);
        c.add_generator("h6g", 83, 5);
        // keep (81,6) and (83,7) inhabited so those components stay symbolic
        c.add_generator("x81_6", 81, 6);
        c.add_generator("x83_7", 83, 7);
        c.products.push(ProductRecord {
            left: "h2".into(),
            right: "e2".into(),
            result: Support::singleton("h2e2"),
        });
        c.products.push(ProductRecord {
            left: "h2".into(),
            right: "h1^2h4h6".into(),
            result: Support::zero(),
        });
        c.products.push(ProductRecord {
            left: "g".into(),
            right: "h6".into(),
            result: Support::singleton("h6g"),
        });
        c
    }

    fn x_cells() -> Vec<(i32, i32)> {
        vec![(0, -2), (20, 4), (3, 1), (81, 6), (83, 4), (83, 7)]
    }

    /// f: S^{83,5} -> X and g: X -> S^{0,0} with the four degree-forced
    /// zeros, the three known entries, and symbolic remainders.
    fn paper_maps() -> (WedgeMap, WedgeMap) {
        let mut f = WedgeMap::new(vec![(83, 5)], x_cells());
        f.set(0, 0, Expression::symbol("a83_7")); // Ext(83,7)
        f.set(0, 1, Expression::symbol("a63_1")); // Ext(63,1)
        f.set(0, 2, Expression::symbol("a80_4")); // Ext(80,4)
        f.set(0, 3, Expression::symbol("a2_-1")); // Ext(2,-1): forced zero
        f.set(0, 4, Expression::known("h0")); // Ext(0,1): detects 2~
        f.set(0, 5, Expression::symbol("a0_-2")); // Ext(0,-2): forced zero
        let mut g = WedgeMap::new(x_cells(), vec![(0, 0)]);
        g.set(0, 0, Expression::symbol("b0_-2")); // Ext(0,-2): forced zero
        g.set(1, 0, Expression::known("g")); // Ext(20,4): detects kappa-bar
        g.set(2, 0, Expression::known("h2")); // Ext(3,1): detects nu
        g.set(3, 0, Expression::symbol("b81_6"));
        g.set(4, 0, Expression::symbol("b83_4")); // Ext(83,4): forced zero
        g.set(5, 0, Expression::symbol("b83_7"));
        (f, g)
    }

    #[test]
    fn composition_reduces_to_two_terms() {
        let chart = wedge_chart();
        let (f, g) = paper_maps();
        let gf = compose_wedge_maps(&f, &g, &chart).unwrap();
        let e = gf.entry(0, 0);
        // h2·a80_4 + g·a63_1, everything else forced to zero
        let expected = Expression::known("h2")
            .mul(&Expression::symbol("a80_4"))
            .add(&Expression::known("g").mul(&Expression::symbol("a63_1")));
        assert_eq!(e, expected);
    }

    #[test]
    fn substitution_lands_on_the_detector() {
        let chart = wedge_chart();
        let (f, g) = paper_maps();
        let gf = compose_wedge_maps(&f, &g, &chart).unwrap().entry(0, 0);
        let with_h6 = gf.substitute("a63_1", &Expression::known("h6")).evaluate(&chart);
        // either value of a80_4 gives h6g + h2e2
        for a in [
            Expression::known("e2"),
            Expression::known("e2").add(&Expression::known("h1^2h4h6")),
        ] {
            let total = with_h6.substitute("a80_4", &a).evaluate(&chart);
            let expected = Expression::known("h6g").add(&Expression::known("h2e2"));
            assert_eq!(total, expected);
        }
    }

    #[test]
    fn identity_composition() {
        let chart = wedge_chart();
        let (f, _) = paper_maps();
        let id = WedgeMap::identity(x_cells());
        let gf = compose_wedge_maps(&f, &id, &chart).unwrap();
        assert_eq!(gf.entry(0, 4), Expression::known("h0"));
        // forced zeros already dropped
        assert_eq!(gf.entry(0, 3), Expression::zero());
    }

    #[test]
    fn mismatch_is_detected() {
        let chart = wedge_chart();
        let (f, _) = paper_maps();
        let wrong = WedgeMap::new(vec![(1, 1)], vec![(0, 0)]);
        assert!(matches!(
            compose_wedge_maps(&f, &wrong, &chart),
            Err(WedgeError::Mismatch { .. })
        ));
    }

    #[test]
    fn bilinearity() {
        let a = Expression::symbol("x").add(&Expression::symbol("y"));
        let b = Expression::symbol("z");
        let left = a.mul(&b);
        let right = Expression::symbol("x")
            .mul(&b)
            .add(&Expression::symbol("y").mul(&b));
        assert_eq!(left, right);
        // GF(2): doubling cancels
        assert!(a.add(&a).is_zero());
    }
}
