//! Truncated Fock ⊗ Fock ⊗ ancilla operator algebra.
//!
//! Basis index ordering is Alice ⊗ Bob ⊗ ancilla everywhere:
//! `index = (n_a * dim_b + n_b) * dim_q + q`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Ancilla levels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    G = 0,
    E = 1,
    F = 2,
}

impl Level {
    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModeLayout {
    pub dim_a: usize,
    pub dim_b: usize,
    pub dim_q: usize,
}

impl Default for ModeLayout {
    fn default() -> Self {
        Self { dim_a: 4, dim_b: 4, dim_q: 2 }
    }
}

impl ModeLayout {
    pub fn new(dim_a: usize, dim_b: usize, dim_q: usize) -> Result<Self> {
        let layout = Self { dim_a, dim_b, dim_q };
        layout.validate()?;
        Ok(layout)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim_a < 2 || self.dim_b < 2 {
            return Err(Error::Layout(format!(
                "cavity truncations must be >= 2, got ({}, {})",
                self.dim_a, self.dim_b
            )));
        }
        if !(2..=3).contains(&self.dim_q) {
            return Err(Error::Layout(format!("dim_q must be 2 or 3, got {}", self.dim_q)));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim_a * self.dim_b * self.dim_q
    }

    #[inline]
    pub fn index(&self, n_a: usize, n_b: usize, q: usize) -> usize {
        debug_assert!(n_a < self.dim_a && n_b < self.dim_b && q < self.dim_q);
        (n_a * self.dim_b + n_b) * self.dim_q + q
    }

    #[inline]
    pub fn decompose(&self, index: usize) -> (usize, usize, usize) {
        let q = index % self.dim_q;
        let rest = index / self.dim_q;
        (rest / self.dim_b, rest % self.dim_b, q)
    }

    /// Largest N whose whole manifold fits in the truncation.
    pub fn max_complete_manifold(&self) -> usize {
        self.dim_a.min(self.dim_b) - 1
    }

    pub fn require_same(&self, other: &ModeLayout) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::LayoutMismatch(*self, *other))
        }
    }
}

/// A dense operator on the full space of a layout.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    layout: ModeLayout,
    entries: CMatrix,
}

impl OperatorMatrix {
    pub fn new(layout: ModeLayout, entries: CMatrix) -> Result<Self> {
        layout.validate()?;
        let d = layout.dim();
        if entries.nrows() != d || entries.ncols() != d {
            return Err(Error::Layout(format!(
                "operator is {}x{}, layout needs {d}x{d}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        Ok(Self { layout, entries })
    }

    /// Constructor that also verifies the Hermiticity claim.
    pub fn hermitian(layout: ModeLayout, entries: CMatrix) -> Result<Self> {
        let op = Self::new(layout, entries)?;
        let dev = op.hermiticity_error();
        if dev >= 1e-12 {
            return Err(Error::Numerical(format!("operator not Hermitian: max |M - M†| = {dev:e}")));
        }
        Ok(op)
    }

    pub fn zeros(layout: ModeLayout) -> Self {
        let d = layout.dim();
        Self { layout, entries: CMatrix::zeros(d, d) }
    }

    pub fn identity(layout: ModeLayout) -> Self {
        let d = layout.dim();
        Self { layout, entries: CMatrix::identity(d, d) }
    }

    pub fn layout(&self) -> ModeLayout {
        self.layout
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_matrix(self) -> CMatrix {
        self.entries
    }

    pub fn dagger(&self) -> Self {
        Self { layout: self.layout, entries: self.entries.adjoint() }
    }

    pub fn hermiticity_error(&self) -> f64 {
        max_abs(&(&self.entries - self.entries.adjoint()))
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.layout.require_same(&other.layout)?;
        let c = &self.entries * &other.entries - &other.entries * &self.entries;
        Ok(Self { layout: self.layout, entries: c })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.layout.require_same(&other.layout)?;
        Ok(Self { layout: self.layout, entries: &self.entries * &other.entries })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.layout.require_same(&other.layout)?;
        Ok(Self { layout: self.layout, entries: &self.entries + &other.entries })
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { layout: self.layout, entries: &self.entries * c }
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.entries)
    }
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Standard single-mode and ancilla operators embedded in the full space.
#[derive(Clone, Debug)]
pub struct ModeOperators {
    pub layout: ModeLayout,
    pub a: OperatorMatrix,
    pub b: OperatorMatrix,
    pub n_a: OperatorMatrix,
    pub n_b: OperatorMatrix,
    /// |g⟩⟨e| + |e⟩⟨g|
    pub sigma_x: OperatorMatrix,
    /// |g⟩⟨g| − |e⟩⟨e|
    pub sigma_z: OperatorMatrix,
    pub proj_e: OperatorMatrix,
    pub proj_f: Option<OperatorMatrix>,
}

fn lowering(dim: usize) -> CMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    for n in 1..dim {
        m[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    m
}

fn ancilla_outer(dim_q: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(dim_q, dim_q);
    m[(i, j)] = ONE;
    m
}

/// Embeds single-subsystem operators into the full space.
pub fn embed(op_a: &CMatrix, op_b: &CMatrix, op_q: &CMatrix) -> CMatrix {
    op_a.kronecker(op_b).kronecker(op_q)
}

pub fn build_mode_operators(layout: ModeLayout) -> Result<ModeOperators> {
    layout.validate()?;
    let ia = CMatrix::identity(layout.dim_a, layout.dim_a);
    let ib = CMatrix::identity(layout.dim_b, layout.dim_b);
    let iq = CMatrix::identity(layout.dim_q, layout.dim_q);
    let la = lowering(layout.dim_a);
    let lb = lowering(layout.dim_b);
    let na = la.adjoint() * &la;
    let nb = lb.adjoint() * &lb;
    let ge = ancilla_outer(layout.dim_q, 0, 1);
    let sx = &ge + ge.adjoint();
    let sz = ancilla_outer(layout.dim_q, 0, 0) - ancilla_outer(layout.dim_q, 1, 1);
    let pe = ancilla_outer(layout.dim_q, 1, 1);
    let wrap = |m: CMatrix| OperatorMatrix { layout, entries: m };
    Ok(ModeOperators {
        layout,
        a: wrap(embed(&la, &ib, &iq)),
        b: wrap(embed(&ia, &lb, &iq)),
        n_a: wrap(embed(&na, &ib, &iq)),
        n_b: wrap(embed(&ia, &nb, &iq)),
        sigma_x: wrap(embed(&ia, &ib, &sx)),
        sigma_z: wrap(embed(&ia, &ib, &sz)),
        proj_e: wrap(embed(&ia, &ib, &pe)),
        proj_f: (layout.dim_q == 3)
            .then(|| wrap(embed(&ia, &ib, &ancilla_outer(3, 2, 2)))),
    })
}

/// |i⟩⟨j| on the ancilla, identity on both cavities.
pub fn ancilla_transition(layout: &ModeLayout, i: Level, j: Level) -> Result<OperatorMatrix> {
    if i.index() >= layout.dim_q || j.index() >= layout.dim_q {
        return Err(Error::InvalidArgument(format!("level {i:?}/{j:?} not in a {}-level ancilla", layout.dim_q)));
    }
    let ia = CMatrix::identity(layout.dim_a, layout.dim_a);
    let ib = CMatrix::identity(layout.dim_b, layout.dim_b);
    let m = embed(&ia, &ib, &ancilla_outer(layout.dim_q, i.index(), j.index()));
    OperatorMatrix::new(*layout, m)
}

/// Projector onto total photon number N (ancilla untouched).
pub fn total_photon_projector(layout: ModeLayout, n: usize) -> Result<OperatorMatrix> {
    layout.validate()?;
    if n + 1 >= layout.dim_a + layout.dim_b {
        return Err(Error::InvalidArgument(format!(
            "N = {n} exceeds truncation ({}, {})",
            layout.dim_a, layout.dim_b
        )));
    }
    let mut p = OperatorMatrix::zeros(layout);
    for i in 0..layout.dim() {
        let (na, nb, _) = layout.decompose(i);
        if na + nb == n {
            p.entries[(i, i)] = ONE;
        }
    }
    Ok(p)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    layout: ModeLayout,
    amplitudes: CVector,
}

impl PureState {
    pub fn new(layout: ModeLayout, amplitudes: CVector) -> Result<Self> {
        layout.validate()?;
        if amplitudes.len() != layout.dim() {
            return Err(Error::Layout(format!("state has {} amplitudes, layout needs {}", amplitudes.len(), layout.dim())));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("state norm {norm} differs from 1")));
        }
        Ok(Self { layout, amplitudes })
    }

    /// Builds a state from (n_a, n_b, level, amplitude) components and normalizes it.
    pub fn from_components(layout: ModeLayout, comps: &[(usize, usize, Level, C64)]) -> Result<Self> {
        layout.validate()?;
        let mut v = CVector::zeros(layout.dim());
        for &(na, nb, q, c) in comps {
            if na >= layout.dim_a || nb >= layout.dim_b || q.index() >= layout.dim_q {
                return Err(Error::InvalidArgument(format!("component |{na},{nb},{q:?}⟩ outside layout")));
            }
            v[layout.index(na, nb, q.index())] += c;
        }
        let norm = v.norm();
        if norm == 0.0 {
            return Err(Error::InvalidArgument("zero state".into()));
        }
        Ok(Self { layout, amplitudes: v / C64::new(norm, 0.0) })
    }

    pub fn basis(layout: ModeLayout, n_a: usize, n_b: usize, q: Level) -> Result<Self> {
        Self::from_components(layout, &[(n_a, n_b, q, ONE)])
    }

    pub(crate) fn from_raw(layout: ModeLayout, amplitudes: CVector) -> Self {
        Self { layout, amplitudes }
    }

    pub fn layout(&self) -> ModeLayout {
        self.layout
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn to_density(&self) -> MixedState {
        MixedState { layout: self.layout, matrix: &self.amplitudes * self.amplitudes.adjoint() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MixedState {
    layout: ModeLayout,
    matrix: CMatrix,
}

impl MixedState {
    pub fn new(layout: ModeLayout, matrix: CMatrix) -> Result<Self> {
        layout.validate()?;
        let d = layout.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::Layout(format!("density matrix must be {d}x{d}")));
        }
        let s = Self { layout, matrix };
        let h = s.hermiticity_error();
        if h > 1e-10 {
            return Err(Error::InvalidArgument(format!("density matrix not Hermitian ({h:e})")));
        }
        let tr = s.trace();
        if (tr - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidArgument(format!("density matrix trace {tr}")));
        }
        let lmin = s.min_eigenvalue();
        if lmin < -1e-7 {
            return Err(Error::InvalidArgument(format!("density matrix eigenvalue {lmin:e} < 0")));
        }
        Ok(s)
    }

    /// Normalizes an unnormalized positive operator; `None` when its trace vanishes.
    pub fn from_unnormalized(layout: ModeLayout, matrix: CMatrix) -> Option<(f64, Self)> {
        let tr = matrix.trace().re;
        if tr <= 1e-300 {
            return None;
        }
        let mut m = matrix / C64::new(tr, 0.0);
        hermitize(&mut m);
        Some((tr, Self { layout, matrix: m }))
    }

    pub(crate) fn from_raw(layout: ModeLayout, matrix: CMatrix) -> Self {
        Self { layout, matrix }
    }

    pub fn layout(&self) -> ModeLayout {
        self.layout
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn hermiticity_error(&self) -> f64 {
        max_abs(&(&self.matrix - self.matrix.adjoint()))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let mut h = self.matrix.clone();
        hermitize(&mut h);
        h.symmetric_eigen().eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Population of a basis state.
    pub fn population(&self, n_a: usize, n_b: usize, q: Level) -> f64 {
        let i = self.layout.index(n_a, n_b, q.index());
        self.matrix[(i, i)].re
    }
}

/// Replaces `m` by (m + m†)/2.
pub fn hermitize(m: &mut CMatrix) {
    let adj = m.adjoint();
    *m += adj;
    *m *= C64::new(0.5, 0.0);
}

#[derive(Clone, Debug, PartialEq)]
pub enum State {
    Pure(PureState),
    Mixed(MixedState),
}

impl From<PureState> for State {
    fn from(s: PureState) -> Self {
        State::Pure(s)
    }
}

impl From<MixedState> for State {
    fn from(s: MixedState) -> Self {
        State::Mixed(s)
    }
}

impl State {
    pub fn layout(&self) -> ModeLayout {
        match self {
            State::Pure(p) => p.layout(),
            State::Mixed(m) => m.layout(),
        }
    }

    pub fn to_density(&self) -> MixedState {
        match self {
            State::Pure(p) => p.to_density(),
            State::Mixed(m) => m.clone(),
        }
    }
}

/// Uhlmann fidelity (squared-overlap convention).
pub fn fidelity(s1: &State, s2: &State) -> Result<f64> {
    s1.layout().require_same(&s2.layout())?;
    let f = match (s1, s2) {
        (State::Pure(a), State::Pure(b)) => a.amplitudes().dotc(b.amplitudes()).norm_sqr(),
        (State::Pure(p), State::Mixed(m)) | (State::Mixed(m), State::Pure(p)) => {
            let v = p.amplitudes();
            (v.adjoint() * m.matrix() * v)[(0, 0)].re
        }
        (State::Mixed(a), State::Mixed(b)) => {
            let sa = psd_sqrt(a.matrix());
            let mut inner = &sa * b.matrix() * &sa;
            hermitize(&mut inner);
            let s: f64 = inner.symmetric_eigen().eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).sum();
            s * s
        }
    };
    Ok(f.clamp(0.0, 1.0))
}

fn psd_sqrt(m: &CMatrix) -> CMatrix {
    let mut h = m.clone();
    hermitize(&mut h);
    let eig = h.symmetric_eigen();
    let v = &eig.eigenvectors;
    let d = CMatrix::from_diagonal(&eig.eigenvalues.map(|l| C64::new(l.max(0.0).sqrt(), 0.0)));
    v * d * v.adjoint()
}

pub fn expectation(op: &OperatorMatrix, s: &State) -> Result<C64> {
    op.layout().require_same(&s.layout())?;
    Ok(match s {
        State::Pure(p) => p.amplitudes().dotc(&(op.matrix() * p.amplitudes())),
        State::Mixed(m) => (op.matrix() * m.matrix()).trace(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Subsystem {
    Alice,
    Bob,
    Ancilla,
}

/// Reduced density matrix over a subset of subsystems, kept in layout order.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedState {
    pub subsystems: Vec<Subsystem>,
    pub dims: Vec<usize>,
    pub matrix: CMatrix,
}

impl ReducedState {
    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }
}

pub fn partial_trace(s: &MixedState, keep: &[Subsystem]) -> ReducedState {
    let l = s.layout();
    let all = [(Subsystem::Alice, l.dim_a), (Subsystem::Bob, l.dim_b), (Subsystem::Ancilla, l.dim_q)];
    let kept: Vec<(Subsystem, usize)> = all.iter().copied().filter(|(k, _)| keep.contains(k)).collect();
    let dk: usize = kept.iter().map(|(_, d)| d).product();
    let mut out = CMatrix::zeros(dk, dk);
    let digits = |i: usize| {
        let (a, b, q) = l.decompose(i);
        [a, b, q]
    };
    let kept_mask = [keep.contains(&Subsystem::Alice), keep.contains(&Subsystem::Bob), keep.contains(&Subsystem::Ancilla)];
    let dims = [l.dim_a, l.dim_b, l.dim_q];
    let reduced_index = |d: [usize; 3]| {
        let mut idx = 0;
        for k in 0..3 {
            if kept_mask[k] {
                idx = idx * dims[k] + d[k];
            }
        }
        idx
    };
    let m = s.matrix();
    for i in 0..l.dim() {
        let di = digits(i);
        for j in 0..l.dim() {
            let dj = digits(j);
            let traced_equal = (0..3).all(|k| kept_mask[k] || di[k] == dj[k]);
            if traced_equal {
                out[(reduced_index(di), reduced_index(dj))] += m[(i, j)];
            }
        }
    }
    ReducedState {
        subsystems: kept.iter().map(|(k, _)| *k).collect(),
        dims: kept.iter().map(|(_, d)| *d).collect(),
        matrix: out,
    }
}
