//! Truncated Fock-space representation of the signal and LO modes.
//!
//! This is a brute-force oracle: operator identities and expectation values are
//! evaluated with explicit ladder matrices instead of the closed-form moment
//! algebra used by the rest of the crate. Creation operators leak across the
//! truncation boundary, so identities are only asserted on the lower half of
//! each truncated dimension.

use nalgebra::{Complex, DMatrix, DVector, Matrix6};

use crate::error::{Error, Result};
use crate::stokes::{s1_lower_bound, StokesMoments};

pub type C64 = Complex<f64>;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Elementary single-mode operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ladder {
    Annihilate,
    Create,
    Number,
}

/// Which of the two modes a ladder acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Signal,
    Lo,
}

/// One product term `coef * (signal word) (x) (lo word)`; words apply
/// right-to-left like operator products.
#[derive(Debug, Clone)]
struct Term {
    coef: C64,
    signal: Vec<Ladder>,
    lo: Vec<Ladder>,
}

/// Two-mode operator kept as a sum of factorized terms.
#[derive(Debug, Clone, Default)]
pub struct TwoModeOp {
    terms: Vec<Term>,
}

impl TwoModeOp {
    pub fn identity() -> Self {
        Self::scalar(ONE)
    }

    pub fn scalar(c: C64) -> Self {
        Self {
            terms: vec![Term {
                coef: c,
                signal: vec![],
                lo: vec![],
            }],
        }
    }

    fn single(coef: C64, mode: Mode, ops: &[Ladder]) -> Self {
        let (signal, lo) = match mode {
            Mode::Signal => (ops.to_vec(), vec![]),
            Mode::Lo => (vec![], ops.to_vec()),
        };
        Self {
            terms: vec![Term { coef, signal, lo }],
        }
    }

    fn pair(coef: C64, signal: Ladder, lo: Ladder) -> Self {
        Self {
            terms: vec![Term {
                coef,
                signal: vec![signal],
                lo: vec![lo],
            }],
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self { terms }
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    coef: t.coef * c,
                    ..t.clone()
                })
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-ONE))
    }

    /// Operator product `self * other`.
    pub fn mul(&self, other: &Self) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                let mut signal = a.signal.clone();
                signal.extend_from_slice(&b.signal);
                let mut lo = a.lo.clone();
                lo.extend_from_slice(&b.lo);
                terms.push(Term {
                    coef: a.coef * b.coef,
                    signal,
                    lo,
                });
            }
        }
        Self { terms }
    }

    /// Hermitian adjoint.
    pub fn adjoint(&self) -> Self {
        let flip = |w: &[Ladder]| -> Vec<Ladder> {
            w.iter()
                .rev()
                .map(|l| match l {
                    Ladder::Annihilate => Ladder::Create,
                    Ladder::Create => Ladder::Annihilate,
                    Ladder::Number => Ladder::Number,
                })
                .collect()
        };
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    coef: t.coef.conj(),
                    signal: flip(&t.signal),
                    lo: flip(&t.lo),
                })
                .collect(),
        }
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }
}

/// Truncated ladder matrices for the signal and LO modes.
#[derive(Debug, Clone)]
pub struct FockOracle {
    pub dim_signal: usize,
    pub dim_lo: usize,
    pub a_signal: DMatrix<C64>,
    pub adag_signal: DMatrix<C64>,
    pub n_signal: DMatrix<C64>,
    pub a_lo: DMatrix<C64>,
    pub adag_lo: DMatrix<C64>,
    pub n_lo: DMatrix<C64>,
}

fn annihilation(dim: usize) -> DMatrix<C64> {
    let mut a = DMatrix::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

impl FockOracle {
    pub fn new(dim_signal: usize, dim_lo: usize) -> Result<Self> {
        if dim_signal < 2 || dim_lo < 2 {
            return Err(Error::Precondition(
                "truncation dimensions must be >= 2".into(),
            ));
        }
        let a_s = annihilation(dim_signal);
        let a_l = annihilation(dim_lo);
        Ok(Self {
            dim_signal,
            dim_lo,
            adag_signal: a_s.adjoint(),
            n_signal: a_s.adjoint() * &a_s,
            a_signal: a_s,
            adag_lo: a_l.adjoint(),
            n_lo: a_l.adjoint() * &a_l,
            a_lo: a_l,
        })
    }

    fn ladder(&self, mode: Mode, l: Ladder) -> &DMatrix<C64> {
        match (mode, l) {
            (Mode::Signal, Ladder::Annihilate) => &self.a_signal,
            (Mode::Signal, Ladder::Create) => &self.adag_signal,
            (Mode::Signal, Ladder::Number) => &self.n_signal,
            (Mode::Lo, Ladder::Annihilate) => &self.a_lo,
            (Mode::Lo, Ladder::Create) => &self.adag_lo,
            (Mode::Lo, Ladder::Number) => &self.n_lo,
        }
    }

    fn dim(&self, mode: Mode) -> usize {
        match mode {
            Mode::Signal => self.dim_signal,
            Mode::Lo => self.dim_lo,
        }
    }

    fn word_matrix(&self, mode: Mode, word: &[Ladder]) -> DMatrix<C64> {
        let mut m = DMatrix::identity(self.dim(mode), self.dim(mode));
        for &l in word {
            m *= self.ladder(mode, l);
        }
        m
    }

    fn apply_word(&self, mode: Mode, word: &[Ladder], v: &DVector<C64>) -> DVector<C64> {
        let mut out = v.clone();
        for &l in word.iter().rev() {
            out = self.ladder(mode, l) * out;
        }
        out
    }

    /// Dense matrix on the product space, signal index major.
    pub fn to_dense(&self, op: &TwoModeOp) -> DMatrix<C64> {
        let d = self.dim_signal * self.dim_lo;
        let mut out = DMatrix::zeros(d, d);
        for t in &op.terms {
            let ms = self.word_matrix(Mode::Signal, &t.signal);
            let ml = self.word_matrix(Mode::Lo, &t.lo);
            out += ms.kronecker(&ml) * t.coef;
        }
        out
    }

    /// `(<bra_s| (x) <bra_lo|) op (|ket_s> (x) |ket_lo>)` for product vectors.
    pub fn matrix_element(
        &self,
        op: &TwoModeOp,
        bra: (&DVector<C64>, &DVector<C64>),
        ket: (&DVector<C64>, &DVector<C64>),
    ) -> C64 {
        op.terms
            .iter()
            .map(|t| {
                let s = bra.0.dotc(&self.apply_word(Mode::Signal, &t.signal, ket.0));
                let l = bra.1.dotc(&self.apply_word(Mode::Lo, &t.lo, ket.1));
                t.coef * s * l
            })
            .sum()
    }

    pub fn number(&self, mode: Mode) -> TwoModeOp {
        TwoModeOp::single(ONE, mode, &[Ladder::Number])
    }

    /// `S0 = n_s + n_LO`
    pub fn stokes_s0(&self) -> TwoModeOp {
        self.number(Mode::Signal).add(&self.number(Mode::Lo))
    }

    /// `S1 = n_LO - n_s`
    pub fn stokes_s1(&self) -> TwoModeOp {
        self.number(Mode::Lo).sub(&self.number(Mode::Signal))
    }

    /// `S2 = a_LO^+ a_S + a_S^+ a_LO`
    pub fn stokes_s2(&self) -> TwoModeOp {
        TwoModeOp::pair(ONE, Ladder::Annihilate, Ladder::Create).add(&TwoModeOp::pair(
            ONE,
            Ladder::Create,
            Ladder::Annihilate,
        ))
    }

    /// `S3 = i (a_S^+ a_LO - a_LO^+ a_S)`
    pub fn stokes_s3(&self) -> TwoModeOp {
        TwoModeOp::pair(I, Ladder::Create, Ladder::Annihilate).add(&TwoModeOp::pair(
            -I,
            Ladder::Annihilate,
            Ladder::Create,
        ))
    }

    /// Truncated coherent state `|beta>`, renormalized after truncation.
    pub fn coherent(&self, mode: Mode, beta: C64) -> DVector<C64> {
        coherent_vector(self.dim(mode), beta)
    }
}

pub fn coherent_vector(dim: usize, beta: C64) -> DVector<C64> {
    let mut v = DVector::from_element(dim, ZERO);
    let mut c = C64::new((-0.5 * beta.norm_sqr()).exp(), 0.0);
    v[0] = c;
    for n in 1..dim {
        c = c * beta / (n as f64).sqrt();
        v[n] = c;
    }
    let norm = v.norm();
    v / C64::new(norm, 0.0)
}

/// Maximum residual of `S2^2 + S3^2 - 2 (S0 + 2 n_LO n_s)` on the lower half of
/// the truncated space, together with the expectation value on the coherent
/// product state restricted to that subspace.
pub fn verify_stokes_identity(oracle: &FockOracle, lo_amp: f64, sig_amp: f64) -> Result<f64> {
    if lo_amp * lo_amp + 4.0 > oracle.dim_lo as f64
        || sig_amp * sig_amp + 4.0 > oracle.dim_signal as f64
    {
        return Err(Error::Precondition(format!(
            "truncation unsafe for amplitudes (lo {lo_amp}, signal {sig_amp}) at dims {}x{}",
            oracle.dim_signal, oracle.dim_lo
        )));
    }
    let s2 = oracle.stokes_s2();
    let s3 = oracle.stokes_s3();
    let lhs = s2.mul(&s2).add(&s3.mul(&s3));
    let cross = oracle
        .number(Mode::Lo)
        .mul(&oracle.number(Mode::Signal))
        .scale(C64::new(2.0, 0.0));
    let rhs = oracle.stokes_s0().add(&cross).scale(C64::new(2.0, 0.0));
    let diff = oracle.to_dense(&lhs.sub(&rhs));

    let half_s = oracle.dim_signal / 2;
    let half_l = oracle.dim_lo / 2;
    let safe = |idx: usize| idx / oracle.dim_lo < half_s && idx % oracle.dim_lo < half_l;
    let mut residual = 0.0f64;
    for r in (0..diff.nrows()).filter(|&r| safe(r)) {
        for c in (0..diff.ncols()).filter(|&c| safe(c)) {
            residual = residual.max(diff[(r, c)].norm());
        }
    }

    let mut psi_s = oracle.coherent(Mode::Signal, C64::new(sig_amp, 0.0));
    let mut psi_l = oracle.coherent(Mode::Lo, C64::new(lo_amp, 0.0));
    psi_s
        .rows_mut(half_s, oracle.dim_signal - half_s)
        .fill(ZERO);
    psi_l.rows_mut(half_l, oracle.dim_lo - half_l).fill(ZERO);
    let psi = psi_s.kronecker(&psi_l);
    let expectation = psi.dotc(&(&diff * &psi));
    Ok(residual.max(expectation.norm()))
}

/// Expectation value matrix of the entanglement-based source after a pure-loss
/// channel on mode B, evaluated by brute force in the truncated Fock space.
#[derive(Debug, Clone)]
pub struct OracleEvm {
    /// Full 6x6 matrix including the physical off-diagonal block.
    pub chi: Matrix6<C64>,
    /// Conditional moments with the `<S1>` lower bound in place of the true value.
    pub moments: [StokesMoments; 2],
    /// True `<S1>/n_lo` for each conditional state.
    pub s1_exact: [f64; 2],
    pub n_lo: f64,
}

/// Builds the EVM of `(|0>|alpha> + |1>|-alpha>)/sqrt(2)` with mode B passed
/// through a beam splitter of transmission `eta`, jointly with a coherent LO of
/// amplitude `lo_amp`.
pub fn pure_loss_evm(oracle: &FockOracle, alpha: f64, eta: f64, lo_amp: f64) -> Result<OracleEvm> {
    if !(eta > 0.0 && eta <= 1.0) || alpha < 0.0 || lo_amp <= 0.0 {
        return Err(Error::Precondition("invalid oracle parameters".into()));
    }
    let beta = eta.sqrt() * alpha;
    let n_lo = lo_amp * lo_amp;
    let states = [
        oracle.coherent(Mode::Signal, C64::new(beta, 0.0)),
        oracle.coherent(Mode::Signal, C64::new(-beta, 0.0)),
    ];
    let lo = oracle.coherent(Mode::Lo, C64::new(lo_amp, 0.0));
    // coherence surviving the loss: overlap of the two environment states
    let env = (-2.0 * (1.0 - eta) * alpha * alpha).exp();

    let scale = C64::new(1.0 / n_lo.sqrt(), 0.0);
    let basis = [
        TwoModeOp::identity(),
        oracle.stokes_s2().scale(scale),
        oracle.stokes_s3().scale(scale),
    ];

    let mut chi = Matrix6::<C64>::zeros();
    for (i, bra) in states.iter().enumerate() {
        for (j, ket) in states.iter().enumerate() {
            let weight = if i == j { 0.5 } else { 0.5 * env };
            for k in 0..3 {
                for l in 0..3 {
                    let op = basis[k].mul(&basis[l]);
                    // block (i, j) holds Tr(rho_ji B_k B_l) with rho_ji ~ |state_j><state_i|
                    let v = oracle.matrix_element(&op, (bra, &lo), (ket, &lo));
                    chi[(3 * i + k, 3 * j + l)] = v * weight;
                }
            }
        }
    }

    let s1 = oracle.stokes_s1();
    let mut moments = Vec::with_capacity(2);
    let mut s1_exact = [0.0; 2];
    for (k, st) in states.iter().enumerate() {
        let ev = |op: &TwoModeOp| oracle.matrix_element(op, (st, &lo), (st, &lo)).re;
        let mean_s2 = ev(&basis[1]);
        let mean_s3 = ev(&basis[2]);
        let second_s2 = ev(&basis[1].mul(&basis[1]));
        let second_s3 = ev(&basis[2].mul(&basis[2]));
        let anti = basis[1].mul(&basis[2]).add(&basis[2].mul(&basis[1]));
        let cross_sym = 0.5 * ev(&anti);
        s1_exact[k] = ev(&s1) / n_lo;
        let s1_lower_norm = s1_lower_bound(n_lo, n_lo * (second_s2 + second_s3))? / n_lo;
        moments.push(StokesMoments {
            mean_s2,
            mean_s3,
            second_s2,
            second_s3,
            cross_sym,
            s1_lower_norm,
        });
    }
    Ok(OracleEvm {
        chi,
        moments: [moments[0], moments[1]],
        s1_exact,
        n_lo,
    })
}
