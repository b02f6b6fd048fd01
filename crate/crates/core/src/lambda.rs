//! Graded linear algebra over `F2[λ]`.
//!
//! A graded map between free graded `F2[λ]`-modules has monomial entries
//! whose λ-exponents are forced by the row and column degrees, so a matrix is
//! a GF(2) bit pattern plus degree data, and row/column operations respect
//! the grading exactly when the borrowed generator has degree at least the
//! receiving one. Smith reduction pivots on the globally minimal exponent;
//! over the graded local PID `F2[λ]` this produces the invariant-factor
//! decomposition directly.

use alloc::string::String;
use alloc::vec::Vec;
use alloc::{format, vec};
use core::fmt;

use crate::gf2::{BitMatrix, BitVec};

/// Homogeneous element of a free graded module: XOR-combination of
/// `λ^exp · basis_i`, sorted by basis index.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Default)]
pub struct GradedElement(Vec<(u32, usize)>);

impl GradedElement {
    pub fn zero() -> Self {
        GradedElement(Vec::new())
    }

    pub fn basis(i: usize) -> Self {
        GradedElement(vec![(0, i)])
    }

    pub fn terms(&self) -> &[(u32, usize)] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn toggle(&mut self, exp: u32, idx: usize) {
        match self.0.binary_search_by_key(&idx, |t| t.1) {
            Ok(p) => {
                debug_assert_eq!(self.0[p].0, exp, "homogeneity violated");
                self.0.remove(p);
            }
            Err(p) => self.0.insert(p, (exp, idx)),
        }
    }

    /// `self += λ^shift · other`
    pub fn add_shifted(&mut self, shift: u32, other: &GradedElement) {
        for &(e, i) in &other.0 {
            self.toggle(e + shift, i);
        }
    }
}

impl fmt::Display for GradedElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        for (n, (e, i)) in self.0.iter().enumerate() {
            if n > 0 {
                write!(f, "+")?;
            }
            if *e > 0 {
                write!(f, "l^{e}*")?;
            }
            write!(f, "e{i}")?;
        }
        Ok(())
    }
}

/// Graded matrix over `F2[λ]` with monomial entries.
///
/// Rows index target generators, columns source generators. A nonzero entry
/// at `(i, j)` is `λ^k` with `k = row_deg[i] - col_deg[j] - shift`; entries
/// where that exponent would be negative must stay zero.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MonomialMatrix {
    row_deg: Vec<i32>,
    col_deg: Vec<i32>,
    shift: i32,
    bits: BitMatrix,
}

/// Entry rejected at construction for violating the grading.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GradingError {
    pub row: usize,
    pub col: usize,
    pub expected: i32,
    pub given: Option<u32>,
}

impl fmt::Display for GradingError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.given {
            Some(k) => write!(
                f,
                "entry ({},{}) has exponent {k} but the grading forces {}",
                self.row, self.col, self.expected
            ),
            None => write!(
                f,
                "entry ({},{}) would need negative exponent {}",
                self.row, self.col, self.expected
            ),
        }
    }
}

impl MonomialMatrix {
    pub fn new(row_deg: Vec<i32>, col_deg: Vec<i32>, shift: i32) -> Self {
        let bits = BitMatrix::zero(row_deg.len(), col_deg.len());
        MonomialMatrix { row_deg, col_deg, shift, bits }
    }

    pub fn rows(&self) -> usize {
        self.row_deg.len()
    }

    pub fn cols(&self) -> usize {
        self.col_deg.len()
    }

    pub fn shift(&self) -> i32 {
        self.shift
    }

    pub fn row_degrees(&self) -> &[i32] {
        &self.row_deg
    }

    pub fn col_degrees(&self) -> &[i32] {
        &self.col_deg
    }

    pub fn bits(&self) -> &BitMatrix {
        &self.bits
    }

    fn forced_exp(&self, i: usize, j: usize) -> i32 {
        self.row_deg[i] - self.col_deg[j] - self.shift
    }

    /// Exponent of the entry at `(i, j)`, or `None` when it is zero.
    pub fn exp_at(&self, i: usize, j: usize) -> Option<u32> {
        self.bits.get(i, j).then(|| self.forced_exp(i, j) as u32)
    }

    /// Set entry `(i, j)` to `λ^exp`; the exponent must match the grading.
    pub fn set(&mut self, i: usize, j: usize, exp: u32) -> Result<(), GradingError> {
        let forced = self.forced_exp(i, j);
        if forced < 0 || forced != exp as i32 {
            return Err(GradingError { row: i, col: j, expected: forced, given: Some(exp) });
        }
        self.bits.set(i, j, true);
        Ok(())
    }

    /// Set entry `(i, j)` nonzero with the exponent the grading forces.
    pub fn set_forced(&mut self, i: usize, j: usize) -> Result<(), GradingError> {
        let forced = self.forced_exp(i, j);
        if forced < 0 {
            return Err(GradingError { row: i, col: j, expected: forced, given: None });
        }
        self.bits.set(i, j, true);
        Ok(())
    }

    /// Composite `self ∘ inner` (apply `inner` first). Monomial again, with
    /// shifts adding.
    pub fn compose(&self, inner: &MonomialMatrix) -> MonomialMatrix {
        assert_eq!(self.col_deg, inner.row_deg, "middle degrees must agree");
        MonomialMatrix {
            row_deg: self.row_deg.clone(),
            col_deg: inner.col_deg.clone(),
            shift: self.shift + inner.shift,
            bits: self.bits.mul(&inner.bits),
        }
    }

    /// Column `j` as an element of the target module.
    pub fn column_element(&self, j: usize) -> GradedElement {
        let mut e = GradedElement::zero();
        for i in 0..self.rows() {
            if self.bits.get(i, j) {
                e.toggle(self.forced_exp(i, j) as u32, i);
            }
        }
        e
    }
}

/// One cyclic summand of a decomposition, generated in `degree` by `rep`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SummandElt {
    pub rep: GradedElement,
    pub degree: i32,
}

/// Finitely generated graded `F2[λ]`-module, as free rank plus λ-power
/// torsion. The multiset of torsion orders is the invariant-factor
/// decomposition and is unique.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct ModuleDecomposition {
    pub free: Vec<SummandElt>,
    /// `(order k, summand)` meaning `F2[λ]/λ^k`, sorted by `(k, rep)`.
    pub torsion: Vec<(u32, SummandElt)>,
}

impl ModuleDecomposition {
    pub fn free_rank(&self) -> usize {
        self.free.len()
    }

    pub fn torsion_orders(&self) -> Vec<u32> {
        self.torsion.iter().map(|(k, _)| *k).collect()
    }

    /// GF(2) dimension of the degree-`t` slice, under an optional λ-power
    /// truncation of the free summands.
    pub fn dim_at(&self, t: i32, truncation: Option<u32>) -> usize {
        let mut dim = 0;
        for s in &self.free {
            let live = match truncation {
                None => t <= s.degree,
                Some(k) => t <= s.degree && t > s.degree - k as i32,
            };
            if live {
                dim += 1;
            }
        }
        for (k, s) in &self.torsion {
            if t <= s.degree && t > s.degree - *k as i32 {
                dim += 1;
            }
        }
        dim
    }

    fn canonicalize(&mut self) {
        self.free.sort_by(|a, b| (a.degree, &a.rep).cmp(&(b.degree, &b.rep)));
        self.torsion
            .sort_by(|a, b| (a.0, a.1.degree, &a.1.rep).cmp(&(b.0, b.1.degree, &b.1.rep)));
    }
}

/// Smith reduction output: cokernel decomposition plus a free basis of the
/// kernel.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SmithForm {
    pub cokernel: ModuleDecomposition,
    pub kernel: Vec<SummandElt>,
}

/// Graded Smith form of a monomial matrix. Deterministic given the input
/// ordering: pivots prefer minimal exponent, then least column, then least
/// row.
pub fn monomial_smith_form(m: &MonomialMatrix) -> SmithForm {
    let rows = m.rows();
    let cols = m.cols();
    let mut bits = m.bits.clone();
    let mut row_active = vec![true; rows];
    let mut col_active = vec![true; cols];
    let mut row_rep: Vec<GradedElement> = (0..rows).map(GradedElement::basis).collect();
    let mut col_rep: Vec<GradedElement> = (0..cols).map(GradedElement::basis).collect();
    let mut divisors: Vec<(u32, usize)> = Vec::new(); // (order, pivot row)

    loop {
        let mut pivot: Option<(u32, usize, usize)> = None; // (exp, col, row)
        for j in 0..cols {
            if !col_active[j] {
                continue;
            }
            for i in 0..rows {
                if !row_active[i] || !bits.get(i, j) {
                    continue;
                }
                let k = (m.row_deg[i] - m.col_deg[j] - m.shift) as u32;
                if pivot.map_or(true, |(pk, pj, pi)| (k, j, i) < (pk, pj, pi)) {
                    pivot = Some((k, j, i));
                }
            }
        }
        let Some((k_star, j_star, i_star)) = pivot else { break };

        // Clear the pivot column: for every other active row with a bit in
        // column j*, xor the pivot row in; the pivot row's representative
        // absorbs λ-shifted copies of theirs.
        let carriers: Vec<usize> = (0..rows)
            .filter(|&i| i != i_star && row_active[i] && bits.get(i, j_star))
            .collect();
        for &i in &carriers {
            let k_i = (m.row_deg[i] - m.col_deg[j_star] - m.shift) as u32;
            debug_assert!(k_i >= k_star);
            let shifted = row_rep[i].clone();
            row_rep[i_star].add_shifted(k_i - k_star, &shifted);
            bits.xor_row_into(i_star, i);
        }

        // Clear the pivot row: only row i* still meets column j*, so each
        // remaining entry moves into the pivot column by a column operation.
        for j in 0..cols {
            if j == j_star || !col_active[j] || !bits.get(i_star, j) {
                continue;
            }
            let k_j = (m.row_deg[i_star] - m.col_deg[j] - m.shift) as u32;
            debug_assert!(k_j >= k_star);
            let shifted = col_rep[j_star].clone();
            col_rep[j].add_shifted(k_j - k_star, &shifted);
            bits.set(i_star, j, false);
        }

        divisors.push((k_star, i_star));
        row_active[i_star] = false;
        col_active[j_star] = false;
    }

    let mut cokernel = ModuleDecomposition::default();
    for (k, i) in divisors {
        if k > 0 {
            cokernel
                .torsion
                .push((k, SummandElt { rep: row_rep[i].clone(), degree: m.row_deg[i] }));
        }
    }
    for i in 0..rows {
        if row_active[i] {
            cokernel
                .free
                .push(SummandElt { rep: row_rep[i].clone(), degree: m.row_deg[i] });
        }
    }
    cokernel.canonicalize();

    let mut kernel: Vec<SummandElt> = (0..cols)
        .filter(|&j| col_active[j])
        .map(|j| SummandElt { rep: col_rep[j].clone(), degree: m.col_deg[j] })
        .collect();
    kernel.sort_by(|a, b| (a.degree, &a.rep).cmp(&(b.degree, &b.rep)));

    SmithForm { cokernel, kernel }
}

/// Failure of [`module_homology`].
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum HomologyError {
    /// `d_out ∘ d_in != 0`; carries the offending source column.
    NonzeroComposite { source_col: usize, detail: String },
    /// Middle degrees of the two maps disagree.
    MiddleMismatch,
}

impl fmt::Display for HomologyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HomologyError::NonzeroComposite { source_col, detail } => {
                write!(f, "d∘d is nonzero on source generator {source_col}: {detail}")
            }
            HomologyError::MiddleMismatch => write!(f, "middle module degrees disagree"),
        }
    }
}

/// Homology `ker(d_out) / im(d_in)` of a three-term complex of free graded
/// modules, as a graded `F2[λ]`-module in middle coordinates.
pub fn module_homology(
    d_in: &MonomialMatrix,
    d_out: &MonomialMatrix,
) -> Result<ModuleDecomposition, HomologyError> {
    if d_in.row_deg != d_out.col_deg {
        return Err(HomologyError::MiddleMismatch);
    }
    let composite = d_out.compose(d_in);
    for j in 0..composite.cols() {
        let col = composite.column_element(j);
        if !col.is_zero() {
            return Err(HomologyError::NonzeroComposite {
                source_col: j,
                detail: format!("{col}"),
            });
        }
    }

    let kernel = monomial_smith_form(d_out).kernel;
    let n_mid = d_in.rows();

    // Express each d_in column in the kernel basis. Exponents are forced by
    // homogeneity, so this is a GF(2) solve over the kernel elements of
    // sufficient degree.
    let mut coeff = MonomialMatrix::new(
        kernel.iter().map(|k| k.degree).collect(),
        d_in.col_deg.clone(),
        d_in.shift,
    );
    for j in 0..d_in.cols() {
        let v = d_in.column_element(j);
        if v.is_zero() {
            continue;
        }
        let target_degree = d_in.col_deg[j] + d_in.shift;
        let eligible: Vec<usize> = (0..kernel.len())
            .filter(|&l| kernel[l].degree >= target_degree)
            .collect();
        let mut solve = BitMatrix::zero(n_mid, eligible.len());
        for (c, &l) in eligible.iter().enumerate() {
            for &(_, i) in kernel[l].rep.terms() {
                solve.set(i, c, true);
            }
        }
        let mut rhs = BitVec::zero(n_mid);
        for &(_, i) in v.terms() {
            rhs.set(i, true);
        }
        let x = solve.solve(&rhs).ok_or(HomologyError::NonzeroComposite {
            source_col: j,
            detail: format!("image {v} is not in the kernel"),
        })?;
        for c in x.ones() {
            let l = eligible[c];
            coeff
                .set_forced(l, j)
                .expect("kernel coordinates respect the grading");
        }
    }

    let mut hom = monomial_smith_form(&coeff).cokernel;
    // Map representatives from kernel coordinates back to the middle module.
    let expand = |elt: &GradedElement| {
        let mut out = GradedElement::zero();
        for &(a, l) in elt.terms() {
            out.add_shifted(a, &kernel[l].rep);
        }
        out
    };
    for s in &mut hom.free {
        s.rep = expand(&s.rep);
    }
    for (_, s) in &mut hom.torsion {
        s.rep = expand(&s.rep);
    }
    hom.canonicalize();
    Ok(hom)
}
