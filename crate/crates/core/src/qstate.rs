//! Factored statevector engine for few-qubit systems.
//!
//! The global state is kept as a registry of independent *clusters* (tensor
//! factors), each a dense complex amplitude vector over its qubits. Clusters
//! are merged lazily when a two-qubit operation spans two factors; no split
//! is attempted afterwards — destructively measured qubits are simply traced
//! out of their cluster. An attack holding 2^n entangled pairs therefore
//! costs O(2^n) four-amplitude clusters instead of one exponentially large
//! vector.
//!
//! Conventions:
//! - In a cluster's amplitude vector the *first* listed qubit is the most
//!   significant bit of the basis index.
//! - Bell outcomes `(k0, k1)` label the Bell state `(X^k0 Z^k1 ⊗ I)|Φ+>`,
//!   so teleporting `|ψ>` through an EPR pair leaves the remote half in
//!   `X^k0 Z^k1 |ψ>`.
//! - Global phases are ignored throughout.
//!
//! # Example
//!
//! Teleport a qubit and undo the correction:
//!
//! ```
//! use qpv_core::qstate::{Engine, Gate1Q};
//! use qpv_core::rng::RngStream;
//!
//! let mut engine = Engine::new();
//! let mut rng = RngStream::from_seed(1);
//! let psi = engine.alloc_basis(true);
//! engine.apply_gate(psi, Gate1Q::H).unwrap();
//!
//! let (near, far) = engine.alloc_epr();
//! let k = engine.bell_measure(psi, near, &mut rng).unwrap();
//! if k.k0 {
//!     engine.apply_gate(far, Gate1Q::X).unwrap();
//! }
//! if k.k1 {
//!     engine.apply_gate(far, Gate1Q::Z).unwrap();
//! }
//! // `far` now holds H|1> = (|0> - |1>)/sqrt(2).
//! let snap = engine.state_of(far).unwrap();
//! assert!((snap.amps[0].re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
//! assert!((snap.amps[1].re + std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
//! ```

use num_complex::Complex64;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use thiserror::Error;

use crate::rng::RandomSource;

/// Complex amplitude of a basis state.
pub type Amplitude = Complex64;

/// Normalization tolerance for state vectors.
pub const NORM_TOL: f64 = 1e-9;

/// Opaque handle to a live qubit. Never reused after the qubit is consumed
/// by a destructive measurement.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize)]
pub struct QubitId(u64);

impl QubitId {
    pub fn raw(self) -> u64 {
        self.0
    }
}

/// Single-qubit gates used by the protocols.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub enum Gate1Q {
    I,
    X,
    Y,
    Z,
    H,
}

impl Gate1Q {
    /// The gate's 2x2 unitary, row-major.
    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        let zero = Complex64::ZERO;
        let one = Complex64::ONE;
        let i = Complex64::I;
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        match self {
            Gate1Q::I => [[one, zero], [zero, one]],
            Gate1Q::X => [[zero, one], [one, zero]],
            Gate1Q::Y => [[zero, -i], [i, zero]],
            Gate1Q::Z => [[one, zero], [zero, -one]],
            Gate1Q::H => [[h, h], [h, -h]],
        }
    }
}

/// Result of a Bell measurement: the state `(X^k0 Z^k1 ⊗ I)|Φ+>` was
/// observed.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub struct BellOutcome {
    pub k0: bool,
    pub k1: bool,
}

impl BellOutcome {
    /// Outcomes in engine order: Φ+, Ψ+, Φ-, Ψ-.
    pub fn from_index(i: usize) -> Self {
        let (k0, k1) = [(false, false), (true, false), (false, true), (true, true)][i];
        BellOutcome { k0, k1 }
    }

    pub fn index(self) -> usize {
        usize::from(self.k0) + 2 * usize::from(self.k1)
    }

    /// `k_w` from the teleportation identities: `k0` if the measured
    /// observable is Z (`w = 0`), `k1` if it is X (`w = 1`).
    pub fn k_for_basis(self, w: bool) -> bool {
        if w {
            self.k1
        } else {
            self.k0
        }
    }
}

/// Bell basis vectors over two qubits (first qubit most significant),
/// indexed consistently with [`BellOutcome::from_index`].
pub fn bell_vectors() -> [[Complex64; 4]; 4] {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let z = Complex64::ZERO;
    [
        [h, z, z, h],  // Φ+
        [z, h, h, z],  // Ψ+
        [h, z, z, -h], // Φ-
        [z, h, -h, z], // Ψ-
    ]
}

/// A tensor factor of the global state: an ordered set of qubits plus a
/// dense amplitude vector of length `2^k` (first qubit most significant).
#[derive(Clone, Debug, PartialEq)]
pub struct Cluster {
    pub qubits: Vec<QubitId>,
    pub amps: Vec<Complex64>,
}

impl Cluster {
    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn slot_of(&self, q: QubitId) -> Option<usize> {
        self.qubits.iter().position(|&x| x == q)
    }

    fn shift(&self, slot: usize) -> usize {
        self.qubits.len() - 1 - slot
    }
}

impl Serialize for Cluster {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("Cluster", 2)?;
        let ids: Vec<u64> = self.qubits.iter().map(|q| q.raw()).collect();
        let amps: Vec<[f64; 2]> = self.amps.iter().map(|a| [a.re, a.im]).collect();
        s.serialize_field("qubits", &ids)?;
        s.serialize_field("amps", &amps)?;
        s.end()
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum EngineError {
    #[error("input state is not normalized: |a0|^2 + |a1|^2 = {norm_sqr}")]
    NotNormalized { norm_sqr: f64 },
    #[error("qubit {0:?} is not live in this engine")]
    DeadQubit(QubitId),
    #[error("two-qubit operation requires distinct qubits, got {0:?} twice")]
    SameQubit(QubitId),
}

/// Registry of clusters holding the full simulated quantum state.
///
/// Single-threaded; one engine per protocol round (or per Monte Carlo
/// trial).
#[derive(Clone, Debug, Default)]
pub struct Engine {
    clusters: Vec<Option<Cluster>>,
    index: BTreeMap<QubitId, usize>,
    next_id: u64,
}

impl Engine {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_live(&self, q: QubitId) -> bool {
        self.index.contains_key(&q)
    }

    pub fn live_qubits(&self) -> impl Iterator<Item = QubitId> + '_ {
        self.index.keys().copied()
    }

    fn fresh_id(&mut self) -> QubitId {
        let id = QubitId(self.next_id);
        self.next_id += 1;
        id
    }

    fn cluster_idx(&self, q: QubitId) -> Result<usize, EngineError> {
        self.index.get(&q).copied().ok_or(EngineError::DeadQubit(q))
    }

    fn insert_cluster(&mut self, cluster: Cluster) -> usize {
        check_cluster(&cluster);
        let idx = self.clusters.len();
        for &q in &cluster.qubits {
            self.index.insert(q, idx);
        }
        self.clusters.push(Some(cluster));
        idx
    }

    /// Allocate a fresh qubit in the state `amp0|0> + amp1|1>`.
    pub fn alloc_qubit(
        &mut self,
        amp0: Amplitude,
        amp1: Amplitude,
    ) -> Result<QubitId, EngineError> {
        let norm_sqr = amp0.norm_sqr() + amp1.norm_sqr();
        if !norm_sqr.is_finite() || (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(EngineError::NotNormalized { norm_sqr });
        }
        let q = self.fresh_id();
        self.insert_cluster(Cluster {
            qubits: vec![q],
            amps: vec![amp0, amp1],
        });
        Ok(q)
    }

    /// Allocate a computational-basis qubit `|x>`.
    pub fn alloc_basis(&mut self, x: bool) -> QubitId {
        let (a0, a1) = if x {
            (Complex64::ZERO, Complex64::ONE)
        } else {
            (Complex64::ONE, Complex64::ZERO)
        };
        self.alloc_qubit(a0, a1).expect("basis state is normalized")
    }

    /// Allocate a fresh EPR pair `|Φ+> = (|00> + |11>)/√2`.
    pub fn alloc_epr(&mut self) -> (QubitId, QubitId) {
        let a = self.fresh_id();
        let b = self.fresh_id();
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let z = Complex64::ZERO;
        self.insert_cluster(Cluster {
            qubits: vec![a, b],
            amps: vec![h, z, z, h],
        });
        (a, b)
    }

    /// Apply a single-qubit gate to `q`'s tensor slot.
    pub fn apply_gate(&mut self, q: QubitId, g: Gate1Q) -> Result<(), EngineError> {
        let idx = self.cluster_idx(q)?;
        let cluster = self.clusters[idx].as_mut().expect("live cluster");
        let slot = cluster.slot_of(q).expect("indexed qubit in cluster");
        apply_matrix1(cluster, slot, &g.matrix());
        check_cluster(cluster);
        Ok(())
    }

    /// Measure `q` in the basis `{H^θ|0>, H^θ|1>}`; returns the basis index.
    /// The qubit stays live, collapsed onto the observed basis state.
    pub fn measure_basis(
        &mut self,
        q: QubitId,
        theta: bool,
        rng: &mut dyn RandomSource,
    ) -> Result<bool, EngineError> {
        let basis = if theta {
            let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
            [[h, h], [h, -h]]
        } else {
            [
                [Complex64::ONE, Complex64::ZERO],
                [Complex64::ZERO, Complex64::ONE],
            ]
        };
        self.measure_in_basis(q, &basis, rng)
    }

    /// Minimum-error discrimination measurement for the four challenge
    /// states: projects onto `{cos(π/8)|0> + sin(π/8)|1>,
    /// -sin(π/8)|0> + cos(π/8)|1>}` and returns the basis index.
    pub fn min_error_measure(
        &mut self,
        q: QubitId,
        rng: &mut dyn RandomSource,
    ) -> Result<bool, EngineError> {
        let c = Complex64::new((std::f64::consts::PI / 8.0).cos(), 0.0);
        let s = Complex64::new((std::f64::consts::PI / 8.0).sin(), 0.0);
        self.measure_in_basis(q, &[[c, s], [-s, c]], rng)
    }

    /// Projective measurement in an arbitrary orthonormal single-qubit
    /// basis; `basis[o]` is the amplitude pair of outcome `o`.
    pub fn measure_in_basis(
        &mut self,
        q: QubitId,
        basis: &[[Complex64; 2]; 2],
        rng: &mut dyn RandomSource,
    ) -> Result<bool, EngineError> {
        let idx = self.cluster_idx(q)?;
        let cluster = self.clusters[idx].as_mut().expect("live cluster");
        let slot = cluster.slot_of(q).expect("indexed qubit in cluster");
        let mask = 1usize << cluster.shift(slot);

        // Project onto each basis vector: for every other-qubit pattern the
        // component along outcome o is conj(b[o])·(a0, a1).
        let mut probs = [0.0f64; 2];
        for i0 in 0..cluster.amps.len() {
            if i0 & mask != 0 {
                continue;
            }
            let (a0, a1) = (cluster.amps[i0], cluster.amps[i0 | mask]);
            for (o, b) in basis.iter().enumerate() {
                probs[o] += (b[0].conj() * a0 + b[1].conj() * a1).norm_sqr();
            }
        }
        let outcome = rng.choose(&probs);
        let b = basis[outcome];
        let scale = 1.0 / probs[outcome].sqrt();
        for i0 in 0..cluster.amps.len() {
            if i0 & mask != 0 {
                continue;
            }
            let (a0, a1) = (cluster.amps[i0], cluster.amps[i0 | mask]);
            let c = (b[0].conj() * a0 + b[1].conj() * a1) * scale;
            cluster.amps[i0] = b[0] * c;
            cluster.amps[i0 | mask] = b[1] * c;
        }
        check_cluster(cluster);
        Ok(outcome == 1)
    }

    /// Bell measurement on `(q1, q2)`. Both qubits are consumed; the rest of
    /// their cluster collapses consistently.
    pub fn bell_measure(
        &mut self,
        q1: QubitId,
        q2: QubitId,
        rng: &mut dyn RandomSource,
    ) -> Result<BellOutcome, EngineError> {
        let outcome = self.measure_two_consuming(q1, q2, &bell_vectors(), rng)?;
        Ok(BellOutcome::from_index(outcome))
    }

    /// Binary projection onto `|Ψ+>`: returns `true` with probability
    /// `|<Ψ+|state>|^2`. Both qubits are consumed.
    ///
    /// Realized as a full Bell-basis measurement coarse-grained to
    /// Ψ+/not-Ψ+; once the measured qubits are discarded this yields
    /// statistics identical to the binary projector for every subsequent
    /// operation on the remaining qubits.
    pub fn project_psi_plus(
        &mut self,
        q1: QubitId,
        q2: QubitId,
        rng: &mut dyn RandomSource,
    ) -> Result<bool, EngineError> {
        Ok(self.bell_measure(q1, q2, rng)? == BellOutcome::from_index(1))
    }

    /// Measure `(q1, q2)` in an orthonormal two-qubit basis (4 vectors over
    /// basis order |q1 q2>), consuming both qubits.
    fn measure_two_consuming(
        &mut self,
        q1: QubitId,
        q2: QubitId,
        vectors: &[[Complex64; 4]; 4],
        rng: &mut dyn RandomSource,
    ) -> Result<usize, EngineError> {
        if q1 == q2 {
            return Err(EngineError::SameQubit(q1));
        }
        let idx1 = self.cluster_idx(q1)?;
        let idx2 = self.cluster_idx(q2)?;
        let idx = if idx1 == idx2 {
            idx1
        } else {
            self.merge(idx1, idx2)
        };
        let cluster = self.clusters[idx].take().expect("live cluster");
        let k = cluster.qubits.len();
        let s1 = cluster.slot_of(q1).expect("q1 in cluster");
        let s2 = cluster.slot_of(q2).expect("q2 in cluster");
        let (sh1, sh2) = (cluster.shift(s1), cluster.shift(s2));

        let rest_slots: Vec<usize> = (0..k).filter(|&s| s != s1 && s != s2).collect();
        let rest_len = 1usize << rest_slots.len();
        // Basis index of rest-pattern r with the two measured bits zero.
        let rest_base = |r: usize| -> usize {
            let mut base = 0usize;
            for (bit_pos, &slot) in rest_slots.iter().enumerate() {
                if r & (1 << (rest_slots.len() - 1 - bit_pos)) != 0 {
                    base |= 1 << (k - 1 - slot);
                }
            }
            base
        };

        // c[o][r] = <vector_o| state restricted to rest pattern r.
        let mut coeffs = vec![[Complex64::ZERO; 4]; rest_len];
        let mut probs = [0.0f64; 4];
        for (r, row) in coeffs.iter_mut().enumerate() {
            let base = rest_base(r);
            let local = [
                cluster.amps[base],
                cluster.amps[base | (1 << sh2)],
                cluster.amps[base | (1 << sh1)],
                cluster.amps[base | (1 << sh1) | (1 << sh2)],
            ];
            for (o, v) in vectors.iter().enumerate() {
                let c = v[0].conj() * local[0]
                    + v[1].conj() * local[1]
                    + v[2].conj() * local[2]
                    + v[3].conj() * local[3];
                row[o] = c;
                probs[o] += c.norm_sqr();
            }
        }

        let outcome = rng.choose(&probs);
        self.index.remove(&q1);
        self.index.remove(&q2);
        if !rest_slots.is_empty() {
            let scale = 1.0 / probs[outcome].sqrt();
            let remaining: Vec<QubitId> = rest_slots.iter().map(|&s| cluster.qubits[s]).collect();
            let amps: Vec<Complex64> = (0..rest_len).map(|r| coeffs[r][outcome] * scale).collect();
            let new_idx = self.clusters.len();
            for &q in &remaining {
                self.index.insert(q, new_idx);
            }
            let new_cluster = Cluster {
                qubits: remaining,
                amps,
            };
            check_cluster(&new_cluster);
            self.clusters.push(Some(new_cluster));
        }
        Ok(outcome)
    }

    /// Tensor two clusters into one (first cluster's qubits stay most
    /// significant). Returns the merged cluster's index.
    fn merge(&mut self, idx_a: usize, idx_b: usize) -> usize {
        let a = self.clusters[idx_a].take().expect("live cluster");
        let b = self.clusters[idx_b].take().expect("live cluster");
        let mut qubits = a.qubits;
        qubits.extend_from_slice(&b.qubits);
        let mut amps = Vec::with_capacity(a.amps.len() * b.amps.len());
        for &x in &a.amps {
            for &y in &b.amps {
                amps.push(x * y);
            }
        }
        let merged = Cluster { qubits, amps };
        let new_idx = self.clusters.len();
        for &q in &merged.qubits {
            self.index.insert(q, new_idx);
        }
        self.clusters.push(Some(merged));
        new_idx
    }

    /// Read-only snapshot of the cluster containing `q`.
    pub fn state_of(&self, q: QubitId) -> Result<Cluster, EngineError> {
        let idx = self.cluster_idx(q)?;
        Ok(self.clusters[idx].clone().expect("live cluster"))
    }

    /// Verify registry invariants: every live qubit in exactly one cluster,
    /// every cluster normalized and finite. Panics on violation.
    pub fn audit(&self) {
        let mut seen = BTreeMap::new();
        for (idx, slot) in self.clusters.iter().enumerate() {
            if let Some(cluster) = slot {
                check_cluster(cluster);
                for &q in &cluster.qubits {
                    assert!(
                        seen.insert(q, idx).is_none(),
                        "qubit {q:?} appears in two clusters"
                    );
                    assert_eq!(self.index.get(&q), Some(&idx), "stale index for {q:?}");
                }
            }
        }
        assert_eq!(seen.len(), self.index.len(), "index/cluster mismatch");
    }
}

fn apply_matrix1(cluster: &mut Cluster, slot: usize, m: &[[Complex64; 2]; 2]) {
    let mask = 1usize << cluster.shift(slot);
    for i0 in 0..cluster.amps.len() {
        if i0 & mask != 0 {
            continue;
        }
        let (a0, a1) = (cluster.amps[i0], cluster.amps[i0 | mask]);
        cluster.amps[i0] = m[0][0] * a0 + m[0][1] * a1;
        cluster.amps[i0 | mask] = m[1][0] * a0 + m[1][1] * a1;
    }
}

fn check_cluster(cluster: &Cluster) {
    let norm_sqr = cluster.norm_sqr();
    assert!(
        norm_sqr.is_finite() && (norm_sqr - 1.0).abs() < NORM_TOL,
        "cluster norm^2 drifted to {norm_sqr}"
    );
    debug_assert_eq!(cluster.amps.len(), 1 << cluster.qubits.len());
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn alloc_basis_states() {
        let mut eng = Engine::new();
        let q = eng.alloc_qubit(c(1.0), c(0.0)).unwrap();
        assert_eq!(eng.state_of(q).unwrap().amps, vec![c(1.0), c(0.0)]);

        let h = eng.alloc_qubit(c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)).unwrap();
        let snap = eng.state_of(h).unwrap();
        assert!((snap.amps[0].re - FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((snap.amps[1].re - FRAC_1_SQRT_2).abs() < 1e-12);

        // cos(π/8)|0> + sin(π/8)|1> is accepted as normalized.
        let a = (std::f64::consts::PI / 8.0).cos();
        let b = (std::f64::consts::PI / 8.0).sin();
        assert!(eng.alloc_qubit(c(a), c(b)).is_ok());
    }

    #[test]
    fn alloc_rejects_unnormalized() {
        let mut eng = Engine::new();
        let err = eng.alloc_qubit(c(1.0), c(1.0)).unwrap_err();
        assert!(matches!(err, EngineError::NotNormalized { .. }));
    }

    #[test]
    fn epr_amplitudes_and_z_correlation() {
        let mut eng = Engine::new();
        let (a, b) = eng.alloc_epr();
        let snap = eng.state_of(a).unwrap();
        assert_eq!(snap.qubits, vec![a, b]);
        assert!((snap.amps[0].re - FRAC_1_SQRT_2).abs() < 1e-12);
        assert_eq!(snap.amps[1], Complex64::ZERO);
        assert_eq!(snap.amps[2], Complex64::ZERO);
        assert!((snap.amps[3].re - FRAC_1_SQRT_2).abs() < 1e-12);

        // Z x Z: always equal bits.
        let mut rng = RngStream::from_seed(11);
        for _ in 0..50 {
            let (a, b) = eng.alloc_epr();
            let ma = eng.measure_basis(a, false, &mut rng).unwrap();
            let mb = eng.measure_basis(b, false, &mut rng).unwrap();
            assert_eq!(ma, mb);
        }
    }

    #[test]
    fn epr_x_basis_correlation() {
        // H⊗H|Φ+> = |Φ+>, so X-basis outcomes agree as well.
        let mut eng = Engine::new();
        let mut rng = RngStream::from_seed(12);
        for _ in 0..50 {
            let (a, b) = eng.alloc_epr();
            let ma = eng.measure_basis(a, true, &mut rng).unwrap();
            let mb = eng.measure_basis(b, true, &mut rng).unwrap();
            assert_eq!(ma, mb);
        }
    }

    #[test]
    fn hadamard_definition_and_involution() {
        let mut eng = Engine::new();
        let q = eng.alloc_basis(false);
        eng.apply_gate(q, Gate1Q::H).unwrap();
        let snap = eng.state_of(q).unwrap();
        assert!((snap.amps[0].re - FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((snap.amps[1].re - FRAC_1_SQRT_2).abs() < 1e-12);

        eng.apply_gate(q, Gate1Q::H).unwrap();
        let snap = eng.state_of(q).unwrap();
        assert!((snap.amps[0].re - 1.0).abs() < 1e-12);
        assert!(snap.amps[1].norm() < 1e-12);
    }

    #[test]
    fn hzh_equals_x() {
        // On the engine: HZH|0> = |1>.
        let mut eng = Engine::new();
        let q = eng.alloc_basis(false);
        for g in [Gate1Q::H, Gate1Q::Z, Gate1Q::H] {
            eng.apply_gate(q, g).unwrap();
        }
        let snap = eng.state_of(q).unwrap();
        assert!(snap.amps[0].norm() < 1e-12);
        assert!((snap.amps[1].re - 1.0).abs() < 1e-12);

        // And as matrices, elementwise.
        let h = Gate1Q::H.matrix();
        let z = Gate1Q::Z.matrix();
        let x = Gate1Q::X.matrix();
        let mut hzh = [[Complex64::ZERO; 2]; 2];
        for r in 0..2 {
            for cc in 0..2 {
                for m in 0..2 {
                    for n in 0..2 {
                        hzh[r][cc] += h[r][m] * z[m][n] * h[n][cc];
                    }
                }
            }
        }
        for r in 0..2 {
            for cc in 0..2 {
                assert!((hzh[r][cc] - x[r][cc]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn measure_basis_eigenstates() {
        let mut eng = Engine::new();
        let mut rng = RngStream::from_seed(5);
        let q = eng.alloc_basis(false);
        for _ in 0..20 {
            assert!(!eng.measure_basis(q, false, &mut rng).unwrap());
        }
        let q = eng.alloc_basis(true);
        eng.apply_gate(q, Gate1Q::H).unwrap();
        for _ in 0..20 {
            assert!(eng.measure_basis(q, true, &mut rng).unwrap());
        }
    }

    #[test]
    fn measure_basis_unbiased_superposition() {
        let mut eng = Engine::new();
        let mut rng = RngStream::from_seed(6);
        let mut ones = 0u32;
        let n = 4000;
        for _ in 0..n {
            let q = eng.alloc_basis(false);
            if eng.measure_basis(q, true, &mut rng).unwrap() {
                ones += 1;
            }
        }
        let p = f64::from(ones) / f64::from(n);
        assert!((p - 0.5).abs() < 4.0 * (0.25 / f64::from(n)).sqrt());
    }

    #[test]
    fn bell_measure_on_phi_plus_is_00() {
        let mut eng = Engine::new();
        let mut rng = RngStream::from_seed(9);
        for _ in 0..20 {
            let (a, b) = eng.alloc_epr();
            let k = eng.bell_measure(a, b, &mut rng).unwrap();
            assert_eq!(k, BellOutcome::from_index(0));
            assert!(!eng.is_live(a));
            assert!(!eng.is_live(b));
        }
    }

    #[test]
    fn teleportation_correction_identity() {
        // Teleport a fixed non-trivial state and verify the remote state is
        // X^k0 Z^k1 |ψ> for the observed outcome.
        let a0 = 0.6;
        let a1 = 0.8;
        let mut rng = RngStream::from_seed(21);
        for _ in 0..40 {
            let mut eng = Engine::new();
            let psi = eng.alloc_qubit(c(a0), c(a1)).unwrap();
            let (e0, e1) = eng.alloc_epr();
            let k = eng.bell_measure(psi, e0, &mut rng).unwrap();
            // Undo the correction: apply X^k0 then Z^k1.
            if k.k0 {
                eng.apply_gate(e1, Gate1Q::X).unwrap();
            }
            if k.k1 {
                eng.apply_gate(e1, Gate1Q::Z).unwrap();
            }
            let snap = eng.state_of(e1).unwrap();
            let fid = (snap.amps[0].conj() * c(a0) + snap.amps[1].conj() * c(a1)).norm_sqr();
            assert!(fid > 1.0 - 1e-9, "fidelity {fid}");
        }
    }

    #[test]
    fn bell_error_paths() {
        let mut eng = Engine::new();
        let mut rng = RngStream::from_seed(2);
        let (a, b) = eng.alloc_epr();
        assert_eq!(
            eng.bell_measure(a, a, &mut rng).unwrap_err(),
            EngineError::SameQubit(a)
        );
        eng.bell_measure(a, b, &mut rng).unwrap();
        assert_eq!(
            eng.bell_measure(a, b, &mut rng).unwrap_err(),
            EngineError::DeadQubit(a)
        );
        assert!(matches!(
            eng.apply_gate(a, Gate1Q::H),
            Err(EngineError::DeadQubit(_))
        ));
    }

    #[test]
    fn psi_plus_projection_eigenstates() {
        let mut eng = Engine::new();
        let mut rng = RngStream::from_seed(8);
        // |Ψ+> = (X ⊗ I)|Φ+>: z = 1 always.
        for _ in 0..10 {
            let (a, b) = eng.alloc_epr();
            eng.apply_gate(a, Gate1Q::X).unwrap();
            assert!(eng.project_psi_plus(a, b, &mut rng).unwrap());
        }
        // |00>: z = 0 always.
        for _ in 0..10 {
            let a = eng.alloc_basis(false);
            let b = eng.alloc_basis(false);
            assert!(!eng.project_psi_plus(a, b, &mut rng).unwrap());
        }
    }

    #[test]
    fn psi_plus_projection_on_plus_plus() {
        // H⊗H|00>: success probability 1/2.
        let mut eng = Engine::new();
        let mut rng = RngStream::from_seed(13);
        let mut hits = 0u32;
        let n = 4000;
        for _ in 0..n {
            let a = eng.alloc_basis(false);
            let b = eng.alloc_basis(false);
            eng.apply_gate(a, Gate1Q::H).unwrap();
            eng.apply_gate(b, Gate1Q::H).unwrap();
            if eng.project_psi_plus(a, b, &mut rng).unwrap() {
                hits += 1;
            }
        }
        let p = f64::from(hits) / f64::from(n);
        assert!((p - 0.5).abs() < 4.0 * (0.25 / f64::from(n)).sqrt());
    }

    #[test]
    fn min_error_measure_statistics() {
        let cos2 = 0.5 + 0.5 * FRAC_1_SQRT_2; // cos^2(π/8)
        let mut eng = Engine::new();
        let mut rng = RngStream::from_seed(14);

        // Eigenstate: outcome 0 always.
        let a = (std::f64::consts::PI / 8.0).cos();
        let b = (std::f64::consts::PI / 8.0).sin();
        for _ in 0..20 {
            let q = eng.alloc_qubit(c(a), c(b)).unwrap();
            assert!(!eng.min_error_measure(q, &mut rng).unwrap());
        }

        // |1>: outcome 1 with probability cos^2(π/8).
        let n = 20000;
        let mut ones = 0u32;
        for _ in 0..n {
            let q = eng.alloc_basis(true);
            if eng.min_error_measure(q, &mut rng).unwrap() {
                ones += 1;
            }
        }
        let p = f64::from(ones) / f64::from(n);
        assert!((p - cos2).abs() < 4.0 * (cos2 * (1.0 - cos2) / f64::from(n)).sqrt());
    }

    #[test]
    fn cluster_snapshot_serializes_as_re_im_pairs() {
        let mut eng = Engine::new();
        let (a, _b) = eng.alloc_epr();
        let json = serde_json::to_value(eng.state_of(a).unwrap()).unwrap();
        assert_eq!(json["qubits"].as_array().unwrap().len(), 2);
        let amps = json["amps"].as_array().unwrap();
        assert_eq!(amps.len(), 4);
        assert!((amps[0][0].as_f64().unwrap() - FRAC_1_SQRT_2).abs() < 1e-12);
        assert_eq!(amps[1][1].as_f64().unwrap(), 0.0);
    }
}
