use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    Cx,
    Cz,
}

/// One draw from the two-qubit gate error model. Qubit 0 is the control of
/// a CX.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GateErrorSample {
    pub erased: [bool; 2],
    /// An erasure that raised no flag.
    pub missed: bool,
    pub pauli: [Pauli; 2],
    pub gate: GateKind,
}

impl GateErrorSample {
    pub fn identity(gate: GateKind) -> Self {
        Self { erased: [false; 2], missed: false, pauli: [Pauli::I; 2], gate }
    }

    pub fn is_identity(&self) -> bool {
        !self.erased[0] && !self.erased[1] && self.pauli == [Pauli::I; 2]
    }
}

/// With probability p(1 − R_e) a uniform two-qubit Pauli (identity
/// included); with probability p·R_e one qubit, chosen uniformly, is erased
/// and its partner receives the gate-dependent error: a CZ gives I or Z, a
/// CX with leaked control gives I or X on the target, a CX with leaked
/// target gives I or Z on the control. An erasure goes unflagged with
/// probability p_fn.
pub fn sample_gate_error_channel<R: Rng + ?Sized>(p: f64, r_e: f64, p_fn: f64, gate: GateKind, rng: &mut R) -> Result<GateErrorSample> {
    for (name, v) in [("p", p), ("R_e", r_e), ("p_fn", p_fn)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidArgument(format!("{name} = {v} outside [0, 1]")));
        }
    }
    let mut s = GateErrorSample::identity(gate);
    let u: f64 = rng.random();
    if u < p * r_e {
        let leaked = rng.random_range(0..2usize);
        let partner = 1 - leaked;
        s.erased[leaked] = true;
        let flip = rng.random_bool(0.5);
        s.pauli[partner] = match (gate, leaked, flip) {
            (_, _, false) => Pauli::I,
            (GateKind::Cz, _, true) => Pauli::Z,
            (GateKind::Cx, 0, true) => Pauli::X,
            (GateKind::Cx, _, true) => Pauli::Z,
        };
        s.missed = rng.random_bool(p_fn);
    } else if u < p {
        s.pauli = [Pauli::ALL[rng.random_range(0..4)], Pauli::ALL[rng.random_range(0..4)]];
    }
    Ok(s)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SamplerStats {
    pub draws: u64,
    pub erasures: u64,
    pub missed: u64,
    pub pauli_only: u64,
}

/// Tallies `draws` samples split across `chunks` independent ChaCha streams
/// derived from `seed`, so results do not depend on the thread count.
pub fn sample_many(p: f64, r_e: f64, p_fn: f64, gate: GateKind, draws: u64, seed: u64, chunks: u64) -> Result<SamplerStats> {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    let chunks = chunks.max(1);
    let ids: Vec<u64> = (0..chunks).collect();
    let parts = crate::par::try_map(&ids, |&c| -> Result<SamplerStats> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(c);
        let n = draws / chunks + u64::from(c < draws % chunks);
        let mut st = SamplerStats::default();
        for _ in 0..n {
            let s = sample_gate_error_channel(p, r_e, p_fn, gate, &mut rng)?;
            st.draws += 1;
            if s.erased.iter().any(|&e| e) {
                st.erasures += 1;
                st.missed += u64::from(s.missed);
            } else if !s.is_identity() {
                st.pauli_only += 1;
            }
        }
        Ok(st)
    })?;
    Ok(parts.into_iter().fold(SamplerStats::default(), |a, b| SamplerStats {
        draws: a.draws + b.draws,
        erasures: a.erasures + b.erasures,
        missed: a.missed + b.missed,
        pauli_only: a.pauli_only + b.pauli_only,
    }))
}
