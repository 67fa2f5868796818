//! Dense reference implementations used as oracles by the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use qsync::prelude::*;

/// Dense joint vector, index `register_bits * n + state`, position 1 in the top bit.
pub struct Dense {
    pub k: usize,
    pub n: usize,
    pub amps: Vec<Complex64>,
}

pub fn letter_bit(c: char) -> usize {
    match c {
        'a' | 'A' => 0,
        'b' | 'B' => 1,
        _ => panic!("bad letter {c}"),
    }
}

pub fn bits_of(word: &str) -> usize {
    word.chars().fold(0, |acc, c| acc << 1 | letter_bit(c))
}

pub fn string_of(bits: usize, k: usize) -> String {
    (0..k)
        .map(|i| {
            if bits >> (k - 1 - i) & 1 == 1 {
                'b'
            } else {
                'a'
            }
        })
        .collect()
}

impl Dense {
    pub fn product(word: &str, automaton: &[(usize, Complex64)], n: usize) -> Self {
        let k = word.len();
        let mut amps = vec![Complex64::default(); (1 << k) * n];
        let r = bits_of(word);
        for &(q, c) in automaton {
            amps[r * n + q] += c;
        }
        Dense { k, n, amps }
    }

    /// Applies the permutation matrix of `perm` on qubit `t` and the automaton.
    pub fn step(&self, perm: &JointPerm, t: usize) -> Self {
        let shift = self.k - t;
        let mut out = vec![Complex64::default(); self.amps.len()];
        for (idx, &c) in self.amps.iter().enumerate() {
            let (r, q) = (idx / self.n, idx % self.n);
            let letter = if r >> shift & 1 == 1 {
                Letter::B
            } else {
                Letter::A
            };
            let img = perm.apply(Pair { letter, state: q });
            let r2 = (r & !(1 << shift)) | (img.letter.index() << shift);
            out[r2 * self.n + img.state] += c;
        }
        Dense {
            k: self.k,
            n: self.n,
            amps: out,
        }
    }

    pub fn run(&self, perm: &JointPerm) -> Self {
        (1..=self.k).fold(
            Dense {
                k: self.k,
                n: self.n,
                amps: self.amps.clone(),
            },
            |s, t| s.step(perm, t),
        )
    }

    pub fn get(&self, word: &str, q: usize) -> Complex64 {
        self.amps[bits_of(word) * self.n + q]
    }

    /// Reduced density matrix on the listed register positions, optionally with the automaton.
    pub fn reduce(&self, positions: &[usize], with_automaton: bool) -> DMatrix<Complex64> {
        reduce_dense(&self.amps, self.k, self.n, positions, with_automaton)
    }
}

/// Reduced density matrix of a dense vector over `k` qubits and an `n`-level system
/// (use `n = 1` for register-only states).
pub fn reduce_dense(
    amps: &[Complex64],
    k: usize,
    n: usize,
    positions: &[usize],
    with_automaton: bool,
) -> DMatrix<Complex64> {
    let qdim = if with_automaton { n } else { 1 };
    let dim = (1 << positions.len()) * qdim;
    let key = |idx: usize| -> (usize, usize) {
        let (r, q) = (idx / n, idx % n);
        let mut inside = 0;
        let mut outside = 0;
        for t in 1..=k {
            let bit = r >> (k - t) & 1;
            if positions.contains(&t) {
                inside = inside << 1 | bit;
            } else {
                outside = outside << 1 | bit;
            }
        }
        if with_automaton {
            (inside * n + q, outside)
        } else {
            (inside, outside * n + q)
        }
    };
    let mut rho = DMatrix::<Complex64>::zeros(dim, dim);
    for (i, &x) in amps.iter().enumerate() {
        if x == Complex64::default() {
            continue;
        }
        let (a, env_a) = key(i);
        for (j, &y) in amps.iter().enumerate() {
            if y == Complex64::default() {
                continue;
            }
            let (b, env_b) = key(j);
            if env_a == env_b {
                rho[(a, b)] += x * y.conj();
            }
        }
    }
    rho
}

pub fn entropy_of(rho: &DMatrix<Complex64>) -> f64 {
    rho.clone()
        .symmetric_eigenvalues()
        .iter()
        .filter(|&&l| l > 1e-15)
        .map(|&l| -l * l.log2())
        .sum()
}

/// Register-only dense vector.
pub fn dense_register(s: &RegisterState) -> Vec<Complex64> {
    let mut v = vec![Complex64::default(); 1 << s.k()];
    for (r, c) in s.terms() {
        v[bits_of(&r.to_string())] = c;
    }
    v
}
