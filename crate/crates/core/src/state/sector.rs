//! Reduced exact backend for the dephased Floquet channel.
//!
//! The global flip `P = X^⊗n` commutes with the kick layer, with every `ZZ`
//! bond and (under conjugation) with every `Z_q` dephasing map. In the basis
//!
//! ```text
//! |r, ±⟩ = (|0 r⟩ ± |1 r̄⟩) / √2      r = lower n−1 bits, r̄ = their complement
//! ```
//!
//! the Floquet unitary is block diagonal, `U = U₊ ⊕ U₋`, and every `Z_q`
//! swaps the two blocks. `⟨Z_q⟩` only reads the off-diagonal block
//! `T = ρ₊₋` (`d × d`, `d = 2^(n−1)`), and `T` evolves in closed form:
//!
//! * unitary part: `T → U₊ T U₋†`. Inside a block `X_q` (q < n−1) is the bit
//!   flip `r → r ⊕ e_q`, `X_{n−1}` is `±` the complement `r → r̄`, and the
//!   `ZZ` layer is the diagonal phase `e^{iΦ(r)}` of `|0 r⟩`.
//! * dephasing: the pair `(T_rs, conj(T_sr))` mixes. The symmetric
//!   combination is damped by `(1−2p)^k`, the antisymmetric one by
//!   `(1−2p)^(n−k)`, `k = popcount(r ⊕ s)`.
//! * `⟨Z⟩_mean = (1/n) Σ_r 2·Re T_rr · (n − 2·popcount(r))`.
//!
//! Storage is split real/imaginary so the kernels vectorize. One period is
//! three passes: column-index kicks row by row, row-index kicks over column
//! strips that stay in cache, and the dephasing map over mirrored tile pairs.

use super::kick::{self, LANES};
use super::{check_capacity, check_probability, GateAngle, DENSITY_CAP};
use crate::error::{Error, Result};

/// Largest dephasing tile edge.
const TILE: usize = 32;
/// Column-strip working set for the row-index pass, in complex entries.
const STRIP_ENTRIES: usize = 1 << 14;

/// Odd-parity block of the density matrix, see the module docs.
#[derive(Debug, Clone)]
pub struct SectorDensity {
    n: usize,
    dim: usize,
    /// row pitch; padded so that rows do not alias in cache
    ld: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

/// Per-period constants for one `(ε, {J_q}, p)` point.
#[derive(Debug, Clone)]
pub struct SectorStep {
    n: usize,
    /// kernel form and parameter, see [`kick`]; `σ = −1` bits use `−x`
    s_form: bool,
    x: f64,
    cos_phase: Vec<f64>,
    sin_phase: Vec<f64>,
    /// row phase times the scale dropped by the normalized kernels
    cos_row: Vec<f64>,
    sin_row: Vec<f64>,
    /// `damp^e` for `e = 0..=n`, `damp = 1 − 2p`
    damp_pow: Vec<f64>,
    /// `½ damp^popcount(i ⊕ j)` and `½ damp^(log2 tile − popcount(i ⊕ j))` inside a tile
    tile_sym: Vec<f64>,
    tile_anti: Vec<f64>,
    tile: usize,
}

impl SectorStep {
    pub fn new(n: usize, eps: f64, couplings: &[GateAngle], p: f64) -> Result<Self> {
        check_capacity("density", DENSITY_CAP, n)?;
        check_probability(p)?;
        if couplings.len() != n - 1 {
            return Err(Error::DimensionMismatch {
                what: "couplings (n - 1 bonds)",
                expected: n - 1,
                actual: couplings.len(),
            });
        }
        let dim = 1usize << (n - 1);
        let (s, c) = GateAngle::kick(eps).value().sin_cos();

        // Per side: n − 1 bit flips and one complement. Column side has σ = −1
        // on the bit flips, row side σ = +1 throughout.
        let s_form = s.abs() >= c.abs();
        let (x, scale) = if s_form {
            (c / s, (-s).powi(n as i32 - 1) * s * s.powi(n as i32))
        } else {
            (s / c, c.powi(2 * n as i32))
        };

        let mut cos_phase = Vec::with_capacity(dim);
        let mut sin_phase = Vec::with_capacity(dim);
        for r in 0..dim {
            // top qubit sits at bit n−1 and is 0 for |0 r⟩
            let phase: f64 = couplings
                .iter()
                .enumerate()
                .map(|(q, j)| {
                    if (r >> q ^ r >> (q + 1)) & 1 == 0 {
                        j.value()
                    } else {
                        -j.value()
                    }
                })
                .sum();
            let (ps, pc) = phase.sin_cos();
            cos_phase.push(pc);
            sin_phase.push(ps);
        }
        let cos_row = cos_phase.iter().map(|v| v * scale).collect();
        let sin_row = sin_phase.iter().map(|v| v * scale).collect();

        let damp = 1.0 - 2.0 * p;
        let damp_pow: Vec<f64> = (0..=n).map(|e| damp.powi(e as i32)).collect();
        let tile = TILE.min(dim);
        let tile_bits = tile.trailing_zeros();
        let mut tile_sym = Vec::with_capacity(tile * tile);
        let mut tile_anti = Vec::with_capacity(tile * tile);
        for i in 0..tile {
            for j in 0..tile {
                let k = (i ^ j).count_ones();
                tile_sym.push(0.5 * damp_pow[k as usize]);
                tile_anti.push(0.5 * damp_pow[(tile_bits - k) as usize]);
            }
        }

        Ok(SectorStep {
            n,
            s_form,
            x,
            cos_phase,
            sin_phase,
            cos_row,
            sin_row,
            damp_pow,
            tile_sym,
            tile_anti,
            tile,
        })
    }
}

impl SectorDensity {
    /// Sector block of `|0…0⟩⟨0…0|`: `T = ½ |r=0⟩⟨s=0|`.
    pub fn zero(n: usize) -> Result<Self> {
        check_capacity("density", DENSITY_CAP, n)?;
        let dim = 1usize << (n - 1);
        let ld = if dim >= 64 { dim + LANES } else { dim };
        let mut re = vec![0.0; dim * ld];
        re[0] = 0.5;
        Ok(SectorDensity {
            n,
            dim,
            ld,
            re,
            im: vec![0.0; dim * ld],
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    /// One Floquet period followed by the dephasing channel on every qubit.
    pub fn apply_step(&mut self, step: &SectorStep) -> Result<()> {
        if step.n != self.n {
            return Err(Error::DimensionMismatch {
                what: "sector step qubit count",
                expected: self.n,
                actual: step.n,
            });
        }
        if step.s_form {
            self.right_multiply::<true>(step);
            self.left_multiply::<true>(step);
        } else {
            self.right_multiply::<false>(step);
            self.left_multiply::<false>(step);
        }
        self.dephase(step);
        Ok(())
    }

    /// `T ← T K₋† D†`, one row at a time.
    fn right_multiply<const S: bool>(&mut self, step: &SectorStep) {
        let dim = self.dim;
        let bits = self.n - 1;
        let x = step.x;
        for (row_re, row_im) in self
            .re
            .chunks_exact_mut(self.ld)
            .zip(self.im.chunks_exact_mut(self.ld))
        {
            let (row_re, row_im) = (&mut row_re[..dim], &mut row_im[..dim]);
            let mut bit = 0;
            if dim >= LANES {
                kick::kick_low3::<S>(row_re, row_im, -x);
                bit = 3;
            }
            while bit + 3 <= bits {
                let stride = 1 << bit;
                for base in (0..dim).step_by(8 * stride) {
                    kick::butterfly8::<S>(row_re, row_im, base, stride, stride, -x);
                }
                bit += 3;
            }
            while bit < bits {
                let stride = 1 << bit;
                for (blk_re, blk_im) in row_re
                    .chunks_exact_mut(2 * stride)
                    .zip(row_im.chunks_exact_mut(2 * stride))
                {
                    let (lo_re, hi_re) = blk_re.split_at_mut(stride);
                    let (lo_im, hi_im) = blk_im.split_at_mut(stride);
                    kick::pair_update::<S>(lo_re, lo_im, hi_re, hi_im, -x);
                }
                bit += 1;
            }
            kick::complement::<S>(row_re, row_im, x);
            kick::phase(row_re, row_im, &step.cos_phase, &step.sin_phase, -1.0);
        }
    }

    /// `T ← D K₊ T` over column strips, three row bits per sweep.
    fn left_multiply<const S: bool>(&mut self, step: &SectorStep) {
        let dim = self.dim;
        let bits = self.n - 1;
        let x = step.x;
        let width = (STRIP_ENTRIES / dim).clamp(LANES, dim.max(LANES)).min(dim);
        for c0 in (0..dim).step_by(width) {
            let mut bit = 0;
            if bits >= 6 {
                // the two lowest groups touch 64 consecutive rows, done while they sit in L1
                for blk in (0..dim).step_by(64) {
                    self.kick_rows::<S>(0, blk..blk + 64, c0, width, x);
                    self.kick_rows::<S>(3, blk..blk + 64, c0, width, x);
                }
                bit = 6;
            }
            while bit + 3 <= bits {
                self.kick_rows::<S>(bit, 0..dim, c0, width, x);
                bit += 3;
            }
            while bit < bits {
                let stride = 1 << bit;
                for blk in (0..dim).step_by(2 * stride) {
                    for r in blk..blk + stride {
                        self.row_pair::<S>(r, r + stride, c0, width, x);
                    }
                }
                bit += 1;
            }
            if dim == 1 {
                kick::complement::<S>(&mut self.re[..1], &mut self.im[..1], x);
                self.row_phase(step, 0, c0, width);
                continue;
            }
            for r in 0..dim / 2 {
                self.row_pair::<S>(r, dim - 1 - r, c0, width, x);
                self.row_phase(step, r, c0, width);
                self.row_phase(step, dim - 1 - r, c0, width);
            }
        }
    }

    /// One group of three row bits from `bit` on the rows in `rows`, which
    /// must be aligned to `8 << bit`.
    #[inline]
    fn kick_rows<const S: bool>(&mut self, bit: usize, rows: std::ops::Range<usize>, c0: usize, width: usize, x: f64) {
        let ld = self.ld;
        let stride = 1 << bit;
        for blk in rows.step_by(8 * stride) {
            for r in blk..blk + stride {
                kick::butterfly8::<S>(&mut self.re, &mut self.im, r * ld + c0, stride * ld, width, x);
            }
        }
    }

    #[inline]
    fn row_phase(&mut self, step: &SectorStep, r: usize, c0: usize, width: usize) {
        let at = r * self.ld + c0;
        let (pc, ps) = (step.cos_row[r], step.sin_row[r]);
        for (u, v) in self.re[at..at + width]
            .iter_mut()
            .zip(self.im[at..at + width].iter_mut())
        {
            let (a, b) = (*u, *v);
            *u = a.mul_add(pc, -b * ps);
            *v = a.mul_add(ps, b * pc);
        }
    }

    /// Pair update between rows `row_a < row_b` on `width` columns from `c0`.
    #[inline]
    fn row_pair<const S: bool>(&mut self, row_a: usize, row_b: usize, c0: usize, width: usize, x: f64) {
        let ld = self.ld;
        let (head_re, tail_re) = self.re.split_at_mut(row_b * ld);
        let (head_im, tail_im) = self.im.split_at_mut(row_b * ld);
        let a0 = row_a * ld + c0;
        kick::pair_update::<S>(
            &mut head_re[a0..a0 + width],
            &mut head_im[a0..a0 + width],
            &mut tail_re[c0..c0 + width],
            &mut tail_im[c0..c0 + width],
            x,
        );
    }

    /// `T_rs ← a T_rs + b conj(T_sr)` over mirrored tile pairs, in place.
    fn dephase(&mut self, step: &SectorStep) {
        if step.damp_pow[1] == 1.0 {
            return;
        }
        let (dim, ld) = (self.dim, self.ld);
        let tile = step.tile;
        let tile_bits = tile.trailing_zeros() as usize;
        let n = self.n;
        let mut mirror_re = vec![0.0; tile * tile];
        let mut mirror_im = vec![0.0; tile * tile];

        for r0 in (0..dim).step_by(tile) {
            for s0 in (r0..dim).step_by(tile) {
                let k_hi = (r0 ^ s0).count_ones() as usize;
                let sym_hi = step.damp_pow[k_hi];
                let anti_hi = step.damp_pow[n - k_hi - tile_bits];

                if r0 == s0 {
                    for i in 0..tile {
                        for j in i..tile {
                            let w = i * tile + j;
                            let (hs, ha) = (sym_hi * step.tile_sym[w], anti_hi * step.tile_anti[w]);
                            let (a, b) = (hs + ha, hs - ha);
                            let d = (r0 + i) * ld + s0 + j;
                            let m = (s0 + j) * ld + r0 + i;
                            let (xr, xi) = (self.re[d], self.im[d]);
                            let (yr, yi) = (self.re[m], self.im[m]);
                            self.re[d] = a * xr + b * yr;
                            self.im[d] = a * xi - b * yi;
                            self.re[m] = a * yr + b * xr;
                            self.im[m] = a * yi - b * xi;
                        }
                    }
                    continue;
                }

                // mirror[i][j] = T[s0 + j][r0 + i]
                for j in 0..tile {
                    let row = (s0 + j) * ld + r0;
                    for i in 0..tile {
                        mirror_re[i * tile + j] = self.re[row + i];
                        mirror_im[i * tile + j] = self.im[row + i];
                    }
                }
                for i in 0..tile {
                    let at = (r0 + i) * ld + s0;
                    let span = i * tile..(i + 1) * tile;
                    let xr = &mut self.re[at..at + tile];
                    let xi = &mut self.im[at..at + tile];
                    let yr = &mut mirror_re[span.clone()];
                    let yi = &mut mirror_im[span.clone()];
                    let ts = &step.tile_sym[span.clone()];
                    let ta = &step.tile_anti[span];
                    for j in 0..tile {
                        let (hs, ha) = (sym_hi * ts[j], anti_hi * ta[j]);
                        let (a, b) = (hs + ha, hs - ha);
                        let (x_r, x_i, y_r, y_i) = (xr[j], xi[j], yr[j], yi[j]);
                        xr[j] = a.mul_add(x_r, b * y_r);
                        xi[j] = a.mul_add(x_i, -b * y_i);
                        yr[j] = a.mul_add(y_r, b * x_r);
                        yi[j] = a.mul_add(y_i, -b * x_i);
                    }
                }
                for j in 0..tile {
                    let row = (s0 + j) * ld + r0;
                    for i in 0..tile {
                        self.re[row + i] = mirror_re[i * tile + j];
                        self.im[row + i] = mirror_im[i * tile + j];
                    }
                }
            }
        }
    }

    /// Site-averaged `⟨Z⟩` of the full state.
    pub fn expectation_z_mean(&self) -> f64 {
        let n = self.n as f64;
        let total: f64 = (0..self.dim)
            .map(|r| 2.0 * self.re[r * self.ld + r] * (n - 2.0 * r.count_ones() as f64))
            .sum();
        total / n
    }
}
