use num_complex::Complex64;
use thiserror::Error;

pub type C = Complex64;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum OracleError {
    #[error("state vector of {qubits} qubits exceeds the 12-qubit cap")]
    TooManyQubits { qubits: usize },
    #[error("input state is not normalized (norm {norm})")]
    Unnormalized { norm: f64 },
    #[error("trace references unallocated qubit slot {slot}")]
    UnallocatedSlot { slot: String },
    #[error("measurement branch with zero probability requested")]
    ImpossibleBranch,
}

/// Dense state vector over up to 12 qubits. Qubit 0 is the least significant
/// bit of the basis index.
#[derive(Debug, Clone)]
pub struct StateVector {
    pub n: usize,
    pub amps: Vec<C>,
}

pub const MAX_QUBITS: usize = 12;
const NORM_TOL: f64 = 1e-12;

impl StateVector {
    pub fn zero(n: usize) -> Result<Self, OracleError> {
        if n > MAX_QUBITS {
            return Err(OracleError::TooManyQubits { qubits: n });
        }
        let mut amps = vec![C::new(0.0, 0.0); 1 << n];
        amps[0] = C::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    pub fn from_amplitudes(n: usize, amps: Vec<C>) -> Result<Self, OracleError> {
        if n > MAX_QUBITS {
            return Err(OracleError::TooManyQubits { qubits: n });
        }
        assert_eq!(amps.len(), 1 << n);
        let s = Self { n, amps };
        let norm = s.norm_sq();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(OracleError::Unnormalized { norm });
        }
        Ok(s)
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn assert_normalized(&self) {
        debug_assert!(
            (self.norm_sq() - 1.0).abs() < NORM_TOL * 1e3,
            "norm drifted: {}",
            self.norm_sq()
        );
    }

    pub fn apply_single(&mut self, q: usize, m: [[C; 2]; 2]) {
        let bit = 1usize << q;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let a = self.amps[i];
                let b = self.amps[i | bit];
                self.amps[i] = m[0][0] * a + m[0][1] * b;
                self.amps[i | bit] = m[1][0] * a + m[1][1] * b;
            }
        }
    }

    pub fn h(&mut self, q: usize) {
        let s = C::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        self.apply_single(q, [[s, s], [s, -s]]);
    }

    pub fn x(&mut self, q: usize) {
        let (o, z) = (C::new(1.0, 0.0), C::new(0.0, 0.0));
        self.apply_single(q, [[z, o], [o, z]]);
    }

    pub fn y(&mut self, q: usize) {
        let z = C::new(0.0, 0.0);
        self.apply_single(q, [[z, C::new(0.0, -1.0)], [C::new(0.0, 1.0), z]]);
    }

    pub fn z(&mut self, q: usize) {
        let (o, z) = (C::new(1.0, 0.0), C::new(0.0, 0.0));
        self.apply_single(q, [[o, z], [z, -o]]);
    }

    pub fn rx(&mut self, q: usize, theta: f64) {
        let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        self.apply_single(
            q,
            [[C::new(c, 0.0), C::new(0.0, -s)], [C::new(0.0, -s), C::new(c, 0.0)]],
        );
    }

    pub fn ry(&mut self, q: usize, theta: f64) {
        let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        self.apply_single(
            q,
            [[C::new(c, 0.0), C::new(-s, 0.0)], [C::new(s, 0.0), C::new(c, 0.0)]],
        );
    }

    pub fn rz(&mut self, q: usize, theta: f64) {
        let e0 = C::from_polar(1.0, -theta / 2.0);
        let e1 = C::from_polar(1.0, theta / 2.0);
        let z = C::new(0.0, 0.0);
        self.apply_single(q, [[e0, z], [z, e1]]);
    }

    pub fn cnot(&mut self, control: usize, target: usize) {
        let (cb, tb) = (1usize << control, 1usize << target);
        for i in 0..self.amps.len() {
            if i & cb != 0 && i & tb == 0 {
                self.amps.swap(i, i | tb);
            }
        }
    }

    pub fn cp(&mut self, control: usize, target: usize, theta: f64) {
        let phase = C::from_polar(1.0, theta);
        let (cb, tb) = (1usize << control, 1usize << target);
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & cb != 0 && i & tb != 0 {
                *a *= phase;
            }
        }
    }

    pub fn swap_gate(&mut self, a: usize, b: usize) {
        let (ab, bb) = (1usize << a, 1usize << b);
        for i in 0..self.amps.len() {
            if i & ab != 0 && i & bb == 0 {
                self.amps.swap(i, (i & !ab) | bb);
            }
        }
    }

    /// Probability that measuring `q` yields 1.
    pub fn prob_one(&self, q: usize) -> f64 {
        let bit = 1usize << q;
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & bit != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Both measurement branches of qubit `q`, renormalized, with their
    /// probabilities. Zero-probability branches are omitted.
    pub fn measure_branches(&self, q: usize) -> Vec<(u8, f64, StateVector)> {
        let p1 = self.prob_one(q);
        let p0 = 1.0 - p1;
        let bit = 1usize << q;
        let mut out = Vec::new();
        for (outcome, p) in [(0u8, p0), (1u8, p1)] {
            if p < 1e-14 {
                continue;
            }
            let scale = 1.0 / p.sqrt();
            let amps: Vec<C> = self
                .amps
                .iter()
                .enumerate()
                .map(|(i, a)| {
                    let hit = ((i & bit != 0) as u8) == outcome;
                    if hit {
                        *a * scale
                    } else {
                        C::new(0.0, 0.0)
                    }
                })
                .collect();
            out.push((outcome, p, StateVector { n: self.n, amps }));
        }
        out
    }

    /// Overlap fidelity |<a|b>|^2, insensitive to global phase.
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        assert_eq!(self.n, other.n);
        let inner: C = self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum();
        inner.norm_sqr()
    }

    /// If qubit `q` is in a definite computational state across all support,
    /// return that value.
    pub fn collapsed_value(&self, q: usize) -> Option<u8> {
        let bit = 1usize << q;
        let mut seen: Option<u8> = None;
        for (i, a) in self.amps.iter().enumerate() {
            if a.norm_sqr() > 1e-20 {
                let v = (i & bit != 0) as u8;
                match seen {
                    None => seen = Some(v),
                    Some(prev) if prev != v => return None,
                    _ => {}
                }
            }
        }
        seen
    }

    /// Extract the joint state of `qubits` assuming every other qubit is
    /// collapsed to a definite value; None when residual entanglement (or
    /// superposition) remains outside `qubits`.
    pub fn extract_subsystem(&self, qubits: &[usize]) -> Option<Vec<C>> {
        let mask: usize = qubits.iter().map(|q| 1usize << q).sum();
        // All support must agree on the complement bits.
        let mut rest: Option<usize> = None;
        for (i, a) in self.amps.iter().enumerate() {
            if a.norm_sqr() > 1e-20 {
                let r = i & !mask;
                match rest {
                    None => rest = Some(r),
                    Some(prev) if prev != r => return None,
                    _ => {}
                }
            }
        }
        let rest = rest?;
        let mut out = vec![C::new(0.0, 0.0); 1 << qubits.len()];
        for (k, slot) in out.iter_mut().enumerate() {
            let mut idx = rest;
            for (pos, &q) in qubits.iter().enumerate() {
                if k & (1 << pos) != 0 {
                    idx |= 1 << q;
                }
            }
            *slot = self.amps[idx];
        }
        Some(out)
    }
}

/// Fidelity between two bare amplitude vectors.
pub fn vec_fidelity(a: &[C], b: &[C]) -> f64 {
    let inner: C = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    let na: f64 = a.iter().map(|x| x.norm_sqr()).sum();
    let nb: f64 = b.iter().map(|x| x.norm_sqr()).sum();
    if na < 1e-30 || nb < 1e-30 {
        return 0.0;
    }
    inner.norm_sqr() / (na * nb)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_pair_from_h_cnot() {
        let mut s = StateVector::zero(2).unwrap();
        s.h(0);
        s.cnot(0, 1);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.amps[0].re - r).abs() < 1e-12);
        assert!((s.amps[3].re - r).abs() < 1e-12);
        assert!(s.amps[1].norm_sqr() < 1e-24 && s.amps[2].norm_sqr() < 1e-24);
    }

    #[test]
    fn measurement_branches_sum_to_one() {
        let mut s = StateVector::zero(2).unwrap();
        s.h(0);
        s.ry(1, 0.7);
        s.cnot(0, 1);
        let total: f64 = s.measure_branches(0).iter().map(|(_, p, _)| p).sum();
        assert!((total - 1.0).abs() < 1e-12);
        for (_, _, branch) in s.measure_branches(0) {
            assert!((branch.norm_sq() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn extract_subsystem_detects_residual_entanglement() {
        let mut s = StateVector::zero(3).unwrap();
        s.h(0);
        s.cnot(0, 1);
        // Qubits 0 and 1 are entangled: extracting {0} alone must fail,
        // extracting {0,1} succeeds with qubit 2 collapsed.
        assert!(s.extract_subsystem(&[0]).is_none());
        let sub = s.extract_subsystem(&[0, 1]).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((sub[0].re - r).abs() < 1e-12 && (sub[3].re - r).abs() < 1e-12);
    }
}
