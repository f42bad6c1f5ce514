//! Brute-force linear algebra used as an independent check on the engine:
//! plain dense vectors and contractions, no cluster registry.
#![allow(dead_code)] // shared by several test binaries

use num_complex::Complex64;
use qpv_core::rng::RngStream;

pub fn kron(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &x in a {
        for &y in b {
            out.push(x * y);
        }
    }
    out
}

/// `<bra|ket>` with conjugation on the bra side.
pub fn dot(bra: &[Complex64], ket: &[Complex64]) -> Complex64 {
    bra.iter().zip(ket).map(|(b, k)| b.conj() * k).sum()
}

pub fn fidelity(a: &[Complex64], b: &[Complex64]) -> f64 {
    dot(a, b).norm_sqr()
}

/// Apply a 2x2 matrix to the qubit at `slot` (0 = most significant) of a
/// dense vector over `k` qubits.
pub fn apply_single(state: &mut [Complex64], k: usize, slot: usize, m: &[[Complex64; 2]; 2]) {
    let mask = 1usize << (k - 1 - slot);
    for i in 0..state.len() {
        if i & mask == 0 {
            let (a0, a1) = (state[i], state[i | mask]);
            state[i] = m[0][0] * a0 + m[0][1] * a1;
            state[i | mask] = m[1][0] * a0 + m[1][1] * a1;
        }
    }
}

/// A uniformly random pure qubit state.
pub fn random_qubit(rng: &mut RngStream) -> [Complex64; 2] {
    let t = rng.uniform() * std::f64::consts::PI;
    let phi = rng.uniform() * 2.0 * std::f64::consts::PI;
    [
        Complex64::new((t / 2.0).cos(), 0.0),
        Complex64::from_polar((t / 2.0).sin(), phi),
    ]
}
