//! Augmented reduced density tensor over the most recent path points.
//!
//! Path point `x_k` (k >= 1) stands for the bath window `[(k-1) dt, k dt]`.
//! A path `x_0 .. x_n` carries the weight
//!
//! ```text
//! rho0(x_0) * K_half(x_1; x_0) * prod_{k >= 2} K(x_k; x_{k-1})
//!     * prod_{k >= k' >= 1, k - k' <= L} F_{k-k'}(x_k, x_k')
//! ```
//!
//! Summing over all points but `x_n` gives the marginal that the caller
//! closes with a final half step to obtain the state at `t_n`. The tensor keeps the last `L = dk_max` points; a new point couples
//! to every retained one, after which the oldest is summed out.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;

use super::propagator::{InfluenceTable, PropagatorTable, PAIRS};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Operations shared by the dense and sparse tensor layouts.
pub(crate) trait PathTensor {
    fn step(&mut self, prop: &PropagatorTable, infl: &InfluenceTable) -> Result<()>;
    /// Reduced matrix at the newest point, row-major pair order.
    fn readout(&self) -> [Complex64; PAIRS];
    fn order(&self) -> usize;
}

/// First path point: `sum_{x0} K_half(x1; x0) rho0(x0)` with the self-window factor.
fn first_point(rho0: &[Complex64; PAIRS], half: &PropagatorTable, infl: &InfluenceTable) -> [Complex64; PAIRS] {
    let mut out = [ZERO; PAIRS];
    for (x1, slot) in out.iter_mut().enumerate() {
        let bare: Complex64 = (0..PAIRS).map(|x0| half.get(x1, x0) * rho0[x0]).sum();
        *slot = bare * infl.get(0, x1, x1);
    }
    out
}

fn pow4(n: usize) -> usize {
    1usize << (2 * n)
}

/// Dense layout: the entry for points `(x_{n-m+1}, .., x_n)` lives at
/// `sum_p x_{n-p} 4^p`, so the newest point varies fastest and the oldest
/// occupies the four contiguous top-level blocks.
pub(crate) struct DenseTensor {
    dk_max: usize,
    order: usize,
    data: Vec<Complex64>,
    scratch: Vec<Complex64>,
    max_entries: usize,
}

/// Rest entries handled per parallel task.
const BLOCK: usize = 1024;

impl DenseTensor {
    pub fn new(
        rho0: &[Complex64; PAIRS],
        half: &PropagatorTable,
        infl: &InfluenceTable,
        max_entries: usize,
    ) -> Result<Self> {
        let dk_max = infl.dk_max();
        let full = 4usize.checked_pow(dk_max as u32).unwrap_or(usize::MAX);
        if full > max_entries {
            return Err(Error::Resource(format!(
                "dense tensor with memory {dk_max} needs 4^{dk_max} = {full} entries, cap is {max_entries}"
            )));
        }
        Ok(Self {
            dk_max,
            order: 1,
            data: first_point(rho0, half, infl).to_vec(),
            scratch: Vec::new(),
            max_entries,
        })
    }

    /// `table[xn][r]`: product of the propagator into `xn` from the newest
    /// retained point and the influence factors coupling `xn` to every
    /// point encoded in `r` (position `p` has separation `p + 1`).
    fn couplings(
        rest: usize,
        prop: &PropagatorTable,
        infl: &InfluenceTable,
    ) -> [Vec<Complex64>; PAIRS] {
        std::array::from_fn(|xn| {
            let mut table = vec![ONE];
            for p in 0..rest {
                let stride = table.len();
                let mut next = vec![ZERO; stride * PAIRS];
                for d in 0..PAIRS {
                    let mut w = infl.get(p + 1, xn, d);
                    if p == 0 {
                        w *= prop.get(xn, d);
                    }
                    for (slot, prev) in next[d * stride..(d + 1) * stride].iter_mut().zip(&table) {
                        *slot = w * prev;
                    }
                }
                table = next;
            }
            table
        })
    }
}

impl PathTensor for DenseTensor {
    fn step(&mut self, prop: &PropagatorTable, infl: &InfluenceTable) -> Result<()> {
        let contract = self.order == self.dk_max;
        let rest = if contract { self.dk_max - 1 } else { self.order };
        let rest_len = pow4(rest);
        let new_len = rest_len * PAIRS;
        if new_len > self.max_entries {
            return Err(Error::Resource(format!(
                "tensor would grow to {new_len} entries, cap is {}",
                self.max_entries
            )));
        }

        let g = Self::couplings(rest, prop, infl);
        let self_factor: [Complex64; PAIRS] = std::array::from_fn(|x| infl.get(0, x, x));
        // Weight of the point being summed out; it also carries the
        // propagator when no other point is retained.
        let closing: [[Complex64; PAIRS]; PAIRS] = std::array::from_fn(|xn| {
            std::array::from_fn(|old| {
                let mut w = infl.get(self.dk_max, xn, old);
                if rest == 0 {
                    w *= prop.get(xn, old);
                }
                w
            })
        });

        let src = &self.data;
        self.scratch.clear();
        self.scratch.resize(new_len, ZERO);
        self.scratch
            .par_chunks_mut(BLOCK * PAIRS)
            .enumerate()
            .for_each(|(chunk, out)| {
                let r0 = chunk * BLOCK;
                for (local, cell) in out.chunks_exact_mut(PAIRS).enumerate() {
                    let r = r0 + local;
                    if contract {
                        let olds: [Complex64; PAIRS] = std::array::from_fn(|old| src[old * rest_len + r]);
                        for xn in 0..PAIRS {
                            let w = &closing[xn];
                            let summed = olds[0] * w[0] + olds[1] * w[1] + olds[2] * w[2] + olds[3] * w[3];
                            cell[xn] = self_factor[xn] * g[xn][r] * summed;
                        }
                    } else {
                        let a = src[r];
                        for xn in 0..PAIRS {
                            cell[xn] = self_factor[xn] * g[xn][r] * a;
                        }
                    }
                }
            });
        std::mem::swap(&mut self.data, &mut self.scratch);
        if !contract {
            self.order += 1;
        }
        Ok(())
    }

    fn readout(&self) -> [Complex64; PAIRS] {
        let mut out = [ZERO; PAIRS];
        for cell in self.data.chunks_exact(PAIRS) {
            for (o, v) in out.iter_mut().zip(cell) {
                *o += v;
            }
        }
        out
    }

    fn order(&self) -> usize {
        self.order
    }
}

/// Sparse layout: explicit paths (oldest first) with nonzero weight. Paths
/// that pass through a vanishing propagator entry are never created, which
/// makes long memories affordable when the bare dynamics cannot flip spins.
pub(crate) struct SparseTensor {
    dk_max: usize,
    paths: BTreeMap<Vec<u8>, Complex64>,
    max_entries: usize,
}

impl SparseTensor {
    pub fn new(
        rho0: &[Complex64; PAIRS],
        half: &PropagatorTable,
        infl: &InfluenceTable,
        max_entries: usize,
    ) -> Self {
        let paths = first_point(rho0, half, infl)
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != ZERO)
            .map(|(x, v)| (vec![x as u8], *v))
            .collect();
        Self { dk_max: infl.dk_max(), paths, max_entries }
    }
}

impl PathTensor for SparseTensor {
    fn step(&mut self, prop: &PropagatorTable, infl: &InfluenceTable) -> Result<()> {
        let mut next: BTreeMap<Vec<u8>, Complex64> = BTreeMap::new();
        for (path, amp) in &self.paths {
            let last = *path.last().expect("paths are never empty") as usize;
            for xn in 0..PAIRS {
                let k = prop.get(xn, last);
                if k == ZERO {
                    continue;
                }
                let mut w = amp * k * infl.get(0, xn, xn);
                for (p, &x) in path.iter().rev().enumerate() {
                    w *= infl.get(p + 1, xn, x as usize);
                }
                let keep = if path.len() == self.dk_max { &path[1..] } else { &path[..] };
                let mut key = Vec::with_capacity(keep.len() + 1);
                key.extend_from_slice(keep);
                key.push(xn as u8);
                *next.entry(key).or_insert(ZERO) += w;
            }
            if next.len() > self.max_entries {
                return Err(Error::Resource(format!(
                    "sparse tensor exceeded {} paths",
                    self.max_entries
                )));
            }
        }
        self.paths = next;
        Ok(())
    }

    fn readout(&self) -> [Complex64; PAIRS] {
        let mut out = [ZERO; PAIRS];
        for (path, v) in &self.paths {
            out[*path.last().expect("paths are never empty") as usize] += v;
        }
        out
    }

    fn order(&self) -> usize {
        self.paths.keys().map(Vec::len).max().unwrap_or(0)
    }
}
