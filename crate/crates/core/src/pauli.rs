//! Dense Pauli strings in symplectic form (sign not tracked).

use crate::circuit::Basis;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bits {
    words: Vec<u64>,
    len: usize,
}

impl Bits {
    pub fn new(len: usize) -> Self {
        Bits {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        (self.words[i >> 6] >> (i & 63)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: bool) {
        let m = 1u64 << (i & 63);
        if v {
            self.words[i >> 6] |= m;
        } else {
            self.words[i >> 6] &= !m;
        }
    }

    #[inline]
    pub fn toggle(&mut self, i: usize) {
        self.words[i >> 6] ^= 1u64 << (i & 63);
    }

    pub fn xor_with(&mut self, other: &Bits) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= *b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Parity of the popcount of `self & other`.
    pub fn dot(&self, other: &Bits) -> bool {
        let mut acc = 0u64;
        for (a, b) in self.words.iter().zip(&other.words) {
            acc ^= a & b;
        }
        acc.count_ones() & 1 == 1
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + b)
            })
        })
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn words_mut(&mut self) -> &mut [u64] {
        &mut self.words
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pauli {
    pub x: Bits,
    pub z: Bits,
}

impl Pauli {
    pub fn identity(n: usize) -> Self {
        Pauli {
            x: Bits::new(n),
            z: Bits::new(n),
        }
    }

    pub fn single(n: usize, q: usize, basis: Basis) -> Self {
        Pauli::uniform(n, &[q], basis)
    }

    /// Tensor product of the same single-qubit Pauli on every listed qubit.
    pub fn uniform(n: usize, qubits: &[usize], basis: Basis) -> Self {
        let mut p = Pauli::identity(n);
        for &q in qubits {
            match basis {
                Basis::X => p.x.set(q, true),
                Basis::Z => p.z.set(q, true),
            }
        }
        p
    }

    pub fn num_qubits(&self) -> usize {
        self.x.len()
    }

    pub fn anticommutes(&self, other: &Pauli) -> bool {
        self.x.dot(&other.z) ^ self.z.dot(&other.x)
    }

    pub fn mul_assign(&mut self, other: &Pauli) {
        self.x.xor_with(&other.x);
        self.z.xor_with(&other.z);
    }

    pub fn is_identity(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }

    pub fn weight(&self) -> usize {
        (0..self.num_qubits())
            .filter(|&q| self.x.get(q) || self.z.get(q))
            .count()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.num_qubits())
            .filter(|&q| self.x.get(q) || self.z.get(q))
            .collect()
    }

    /// Conjugation by CX(c, t); signs are ignored.
    pub fn conj_cx(&mut self, c: usize, t: usize) {
        if self.x.get(c) {
            self.x.toggle(t);
        }
        if self.z.get(t) {
            self.z.toggle(c);
        }
    }

    /// Single-qubit Pauli at `q` as (x, z) bits.
    pub fn at(&self, q: usize) -> (bool, bool) {
        (self.x.get(q), self.z.get(q))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cx_conjugation_rules() {
        let mut p = Pauli::single(2, 0, Basis::X);
        p.conj_cx(0, 1);
        assert_eq!(p, Pauli::uniform(2, &[0, 1], Basis::X));
        let mut p = Pauli::single(2, 1, Basis::Z);
        p.conj_cx(0, 1);
        assert_eq!(p, Pauli::uniform(2, &[0, 1], Basis::Z));
    }

    #[test]
    fn commutation() {
        let x = Pauli::uniform(3, &[0, 1], Basis::X);
        let z = Pauli::uniform(3, &[1, 2], Basis::Z);
        assert!(x.anticommutes(&z));
        let z2 = Pauli::uniform(3, &[0, 1], Basis::Z);
        assert!(!x.anticommutes(&z2));
    }

    #[test]
    fn ones_iterates_set_bits() {
        let mut b = Bits::new(130);
        for i in [0, 63, 64, 129] {
            b.set(i, true);
        }
        assert_eq!(b.ones().collect::<Vec<_>>(), vec![0, 63, 64, 129]);
        assert_eq!(b.count_ones(), 4);
    }
}
