//! Butterfly kernels for the sector backend.
//!
//! A kick `c + iσs·F` on a pair `(a, b)` is applied in one of two normalized
//! forms, each a single fused multiply-add per component:
//!
//! ```text
//! S = true:   (a, b) ← (x·a + i·b,  x·b + i·a)      x = c / (σs), scale σs
//! S = false:  (a, b) ← (a + i·x·b,  b + i·x·a)      x = σs / c,   scale c
//! ```
//!
//! The dropped scale is a real constant per application; callers multiply it
//! back in once per period.

pub(super) const LANES: usize = 8;

#[inline(always)]
fn rot<const S: bool>(a_r: f64, a_i: f64, b_r: f64, b_i: f64, x: f64) -> (f64, f64) {
    if S {
        (x.mul_add(a_r, -b_i), x.mul_add(a_i, b_r))
    } else {
        ((-x).mul_add(b_i, a_r), x.mul_add(b_r, a_i))
    }
}

/// Pair update on two equal-length spans.
#[inline]
pub(super) fn pair_update<const S: bool>(
    ar: &mut [f64],
    ai: &mut [f64],
    br: &mut [f64],
    bi: &mut [f64],
    x: f64,
) {
    #[cfg(all(target_arch = "x86_64", target_feature = "avx512f"))]
    if ar.len().is_multiple_of(LANES) {
        // SAFETY: avx512f is enabled at compile time.
        unsafe { avx512::pair_update::<S>(ar, ai, br, bi, x) };
        return;
    }
    for (((xr, xi), yr), yi) in ar
        .iter_mut()
        .zip(ai.iter_mut())
        .zip(br.iter_mut())
        .zip(bi.iter_mut())
    {
        let (a_r, a_i, b_r, b_i) = (*xr, *xi, *yr, *yi);
        (*xr, *xi) = rot::<S>(a_r, a_i, b_r, b_i, x);
        (*yr, *yi) = rot::<S>(b_r, b_i, a_r, a_i, x);
    }
}

/// Three butterfly stages on the eight lanes `base + m·step`, `m = 0..8`, each
/// `len` contiguous entries long (`len` a multiple of [`LANES`]). Stage `h`
/// pairs lane `m` with `m | h`.
#[inline]
pub(super) fn butterfly8<const S: bool>(
    re: &mut [f64],
    im: &mut [f64],
    base: usize,
    step: usize,
    len: usize,
    x: f64,
) {
    assert!(len.is_multiple_of(LANES) && base + 7 * step + len <= re.len() && re.len() == im.len());
    #[cfg(all(target_arch = "x86_64", target_feature = "avx512f"))]
    {
        // SAFETY: avx512f is enabled at compile time; bounds checked above.
        unsafe { avx512::butterfly8::<S>(re, im, base, step, len, x) }
    }
    #[cfg(not(all(target_arch = "x86_64", target_feature = "avx512f")))]
    for j in (0..len).step_by(LANES) {
        let mut xr = [[0.0; LANES]; 8];
        let mut xi = [[0.0; LANES]; 8];
        for m in 0..8 {
            let at = base + m * step + j;
            xr[m].copy_from_slice(&re[at..at + LANES]);
            xi[m].copy_from_slice(&im[at..at + LANES]);
        }
        for h in [1, 2, 4] {
            for a in (0..8).filter(|a| a & h == 0) {
                let (lo_r, hi_r) = xr.split_at_mut(a | h);
                let (lo_i, hi_i) = xi.split_at_mut(a | h);
                pair_update::<S>(&mut lo_r[a], &mut lo_i[a], &mut hi_r[0], &mut hi_i[0], x);
            }
        }
        for m in 0..8 {
            let at = base + m * step + j;
            re[at..at + LANES].copy_from_slice(&xr[m]);
            im[at..at + LANES].copy_from_slice(&xi[m]);
        }
    }
}

/// Bits 0..3 of every aligned block of eight entries.
pub(super) fn kick_low3<const S: bool>(re: &mut [f64], im: &mut [f64], x: f64) {
    assert!(re.len().is_multiple_of(LANES) && re.len() == im.len());
    #[cfg(all(target_arch = "x86_64", target_feature = "avx2", target_feature = "fma"))]
    {
        // SAFETY: avx2 and fma are enabled at compile time.
        unsafe { avx2::kick_low3::<S>(re, im, x) }
    }
    #[cfg(not(all(target_arch = "x86_64", target_feature = "avx2", target_feature = "fma")))]
    for (cr, ci) in re.chunks_exact_mut(LANES).zip(im.chunks_exact_mut(LANES)) {
        for h in [1, 2, 4] {
            let pr: [f64; LANES] = std::array::from_fn(|l| cr[l ^ h]);
            let pi: [f64; LANES] = std::array::from_fn(|l| ci[l ^ h]);
            for l in 0..LANES {
                (cr[l], ci[l]) = rot::<S>(cr[l], ci[l], pr[l], pi[l], x);
            }
        }
    }
}

/// Pairs entry `i` with its complement `len − 1 − i`. A single entry is its
/// own partner.
pub(super) fn complement<const S: bool>(re: &mut [f64], im: &mut [f64], x: f64) {
    let dim = re.len();
    if dim == 1 {
        (re[0], im[0]) = rot::<S>(re[0], im[0], re[0], im[0], x);
        return;
    }
    #[cfg(all(target_arch = "x86_64", target_feature = "avx2", target_feature = "fma"))]
    if dim.is_multiple_of(LANES) {
        // SAFETY: avx2 and fma are enabled at compile time.
        unsafe { avx2::complement::<S>(re, im, x) };
        return;
    }
    let half = dim / 2;
    let (lo_re, hi_re) = re.split_at_mut(half);
    let (lo_im, hi_im) = im.split_at_mut(half);
    for (((ar, ai), br), bi) in lo_re
        .iter_mut()
        .zip(lo_im.iter_mut())
        .zip(hi_re.iter_mut().rev())
        .zip(hi_im.iter_mut().rev())
    {
        let (a_r, a_i, b_r, b_i) = (*ar, *ai, *br, *bi);
        (*ar, *ai) = rot::<S>(a_r, a_i, b_r, b_i, x);
        (*br, *bi) = rot::<S>(b_r, b_i, a_r, a_i, x);
    }
}

/// `v ← v · (cos + i·sign·sin)` elementwise.
pub(super) fn phase(re: &mut [f64], im: &mut [f64], cos: &[f64], sin: &[f64], sign: f64) {
    for (((x, y), &c), &s) in re.iter_mut().zip(im.iter_mut()).zip(cos).zip(sin) {
        let s = sign * s;
        let (a, b) = (*x, *y);
        *x = a.mul_add(c, -b * s);
        *y = a.mul_add(s, b * c);
    }
}

#[cfg(all(target_arch = "x86_64", target_feature = "avx2", target_feature = "fma"))]
mod avx2 {
    use std::arch::x86_64::*;

    #[inline(always)]
    unsafe fn rot<const S: bool>(
        ar: __m256d,
        ai: __m256d,
        br: __m256d,
        bi: __m256d,
        x: __m256d,
    ) -> (__m256d, __m256d) {
        if S {
            (_mm256_fmsub_pd(x, ar, bi), _mm256_fmadd_pd(x, ai, br))
        } else {
            (_mm256_fnmadd_pd(x, bi, ar), _mm256_fmadd_pd(x, br, ai))
        }
    }

    pub(super) unsafe fn kick_low3<const S: bool>(re: &mut [f64], im: &mut [f64], x: f64) {
        let xv = _mm256_set1_pd(x);
        for k in (0..re.len()).step_by(8) {
            let (pr, pi) = (re.as_mut_ptr().add(k), im.as_mut_ptr().add(k));
            let (mut r0, mut r1) = (_mm256_loadu_pd(pr), _mm256_loadu_pd(pr.add(4)));
            let (mut i0, mut i1) = (_mm256_loadu_pd(pi), _mm256_loadu_pd(pi.add(4)));
            // bit 0: neighbours
            let (a, b) = (_mm256_permute_pd(r0, 0b0101), _mm256_permute_pd(i0, 0b0101));
            (r0, i0) = rot::<S>(r0, i0, a, b, xv);
            let (a, b) = (_mm256_permute_pd(r1, 0b0101), _mm256_permute_pd(i1, 0b0101));
            (r1, i1) = rot::<S>(r1, i1, a, b, xv);
            // bit 1: 128-bit halves
            let (a, b) = (_mm256_permute4x64_pd(r0, 0x4E), _mm256_permute4x64_pd(i0, 0x4E));
            (r0, i0) = rot::<S>(r0, i0, a, b, xv);
            let (a, b) = (_mm256_permute4x64_pd(r1, 0x4E), _mm256_permute4x64_pd(i1, 0x4E));
            (r1, i1) = rot::<S>(r1, i1, a, b, xv);
            // bit 2: the two registers
            let (n0r, n0i) = rot::<S>(r0, i0, r1, i1, xv);
            (r1, i1) = rot::<S>(r1, i1, r0, i0, xv);
            (r0, i0) = (n0r, n0i);
            _mm256_storeu_pd(pr, r0);
            _mm256_storeu_pd(pr.add(4), r1);
            _mm256_storeu_pd(pi, i0);
            _mm256_storeu_pd(pi.add(4), i1);
        }
    }

    pub(super) unsafe fn complement<const S: bool>(re: &mut [f64], im: &mut [f64], x: f64) {
        let dim = re.len();
        let xv = _mm256_set1_pd(x);
        for k in (0..dim / 2).step_by(4) {
            let (lr, li) = (re.as_mut_ptr().add(k), im.as_mut_ptr().add(k));
            let (hr, hi) = (re.as_mut_ptr().add(dim - 4 - k), im.as_mut_ptr().add(dim - 4 - k));
            let (ar, ai) = (_mm256_loadu_pd(lr), _mm256_loadu_pd(li));
            let br = _mm256_permute4x64_pd(_mm256_loadu_pd(hr), 0x1B);
            let bi = _mm256_permute4x64_pd(_mm256_loadu_pd(hi), 0x1B);
            let (nar, nai) = rot::<S>(ar, ai, br, bi, xv);
            let (nbr, nbi) = rot::<S>(br, bi, ar, ai, xv);
            _mm256_storeu_pd(lr, nar);
            _mm256_storeu_pd(li, nai);
            _mm256_storeu_pd(hr, _mm256_permute4x64_pd(nbr, 0x1B));
            _mm256_storeu_pd(hi, _mm256_permute4x64_pd(nbi, 0x1B));
        }
    }
}

#[cfg(all(target_arch = "x86_64", target_feature = "avx512f"))]
mod avx512 {
    use std::arch::x86_64::*;

    #[inline(always)]
    unsafe fn rot<const S: bool>(
        ar: __m512d,
        ai: __m512d,
        br: __m512d,
        bi: __m512d,
        x: __m512d,
    ) -> (__m512d, __m512d) {
        if S {
            (_mm512_fmsub_pd(x, ar, bi), _mm512_fmadd_pd(x, ai, br))
        } else {
            (_mm512_fnmadd_pd(x, bi, ar), _mm512_fmadd_pd(x, br, ai))
        }
    }

    pub(super) unsafe fn pair_update<const S: bool>(
        ar: &mut [f64],
        ai: &mut [f64],
        br: &mut [f64],
        bi: &mut [f64],
        x: f64,
    ) {
        let len = ar.len();
        assert!(ai.len() == len && br.len() == len && bi.len() == len);
        let xv = _mm512_set1_pd(x);
        for k in (0..len).step_by(8) {
            let (par, pai) = (ar.as_mut_ptr().add(k), ai.as_mut_ptr().add(k));
            let (pbr, pbi) = (br.as_mut_ptr().add(k), bi.as_mut_ptr().add(k));
            let (a_r, a_i) = (_mm512_loadu_pd(par), _mm512_loadu_pd(pai));
            let (b_r, b_i) = (_mm512_loadu_pd(pbr), _mm512_loadu_pd(pbi));
            let (nar, nai) = rot::<S>(a_r, a_i, b_r, b_i, xv);
            let (nbr, nbi) = rot::<S>(b_r, b_i, a_r, a_i, xv);
            _mm512_storeu_pd(par, nar);
            _mm512_storeu_pd(pai, nai);
            _mm512_storeu_pd(pbr, nbr);
            _mm512_storeu_pd(pbi, nbi);
        }
    }

    #[inline(always)]
    unsafe fn stage<const S: bool>(r: &mut [__m512d; 8], i: &mut [__m512d; 8], a: usize, b: usize, x: __m512d) {
        let (nar, nai) = rot::<S>(r[a], i[a], r[b], i[b], x);
        let (nbr, nbi) = rot::<S>(r[b], i[b], r[a], i[a], x);
        (r[a], i[a], r[b], i[b]) = (nar, nai, nbr, nbi);
    }

    pub(super) unsafe fn butterfly8<const S: bool>(
        re: &mut [f64],
        im: &mut [f64],
        base: usize,
        step: usize,
        len: usize,
        x: f64,
    ) {
        let xv = _mm512_set1_pd(x);
        let (pr, pi) = (re.as_mut_ptr(), im.as_mut_ptr());
        for j in (0..len).step_by(8) {
            let mut r = [_mm512_setzero_pd(); 8];
            let mut i = [_mm512_setzero_pd(); 8];
            for m in 0..8 {
                let at = base + m * step + j;
                r[m] = _mm512_loadu_pd(pr.add(at));
                i[m] = _mm512_loadu_pd(pi.add(at));
            }
            for (a, b) in [(0, 1), (2, 3), (4, 5), (6, 7)] {
                stage::<S>(&mut r, &mut i, a, b, xv);
            }
            for (a, b) in [(0, 2), (1, 3), (4, 6), (5, 7)] {
                stage::<S>(&mut r, &mut i, a, b, xv);
            }
            for (a, b) in [(0, 4), (1, 5), (2, 6), (3, 7)] {
                stage::<S>(&mut r, &mut i, a, b, xv);
            }
            for m in 0..8 {
                let at = base + m * step + j;
                _mm512_storeu_pd(pr.add(at), r[m]);
                _mm512_storeu_pd(pi.add(at), i[m]);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Plain `(c + iσs)` pair update, no normalization.
    fn reference(a: (f64, f64), b: (f64, f64), c: f64, g: f64) -> (f64, f64) {
        (c * a.0 - g * b.1, c * a.1 + g * b.0)
    }

    fn data(len: usize, seed: f64) -> (Vec<f64>, Vec<f64>) {
        (
            (0..len).map(|i| (i as f64 * seed).sin()).collect(),
            (0..len).map(|i| (i as f64 * seed + 0.4).cos()).collect(),
        )
    }

    fn close(a: &[f64], b: &[f64], scale: f64) {
        for (x, y) in a.iter().zip(b) {
            assert!((x * scale - y).abs() < 1e-13, "{x} * {scale} vs {y}");
        }
    }

    #[test]
    fn both_forms_match_the_plain_update() {
        let (c, g) = (0.3f64, -0.95f64);
        for len in [1, 3, 8, 24] {
            let (ar0, ai0) = data(len, 0.7);
            let (br0, bi0) = data(len, 1.3);
            let mut want = (ar0.clone(), ai0.clone(), br0.clone(), bi0.clone());
            for k in 0..len {
                (want.0[k], want.1[k]) = reference((ar0[k], ai0[k]), (br0[k], bi0[k]), c, g);
                (want.2[k], want.3[k]) = reference((br0[k], bi0[k]), (ar0[k], ai0[k]), c, g);
            }
            let (mut ar, mut ai, mut br, mut bi) = (ar0.clone(), ai0.clone(), br0.clone(), bi0.clone());
            pair_update::<true>(&mut ar, &mut ai, &mut br, &mut bi, c / g);
            close(&ar, &want.0, g);
            close(&bi, &want.3, g);
            let (mut ar, mut ai, mut br, mut bi) = (ar0.clone(), ai0.clone(), br0.clone(), bi0.clone());
            pair_update::<false>(&mut ar, &mut ai, &mut br, &mut bi, g / c);
            close(&ai, &want.1, c);
            close(&br, &want.2, c);
        }
    }

    fn single_bit_passes(re: &mut [f64], im: &mut [f64], strides: &[usize], x: f64) {
        for &stride in strides {
            for (blk_re, blk_im) in re.chunks_exact_mut(2 * stride).zip(im.chunks_exact_mut(2 * stride)) {
                let (lr, hr) = blk_re.split_at_mut(stride);
                let (li, hi) = blk_im.split_at_mut(stride);
                for k in 0..stride {
                    (lr[k], li[k], hr[k], hi[k]) = {
                        let a = rot::<true>(lr[k], li[k], hr[k], hi[k], x);
                        let b = rot::<true>(hr[k], hi[k], lr[k], li[k], x);
                        (a.0, a.1, b.0, b.1)
                    };
                }
            }
        }
    }

    #[test]
    fn fused_stages_match_single_bit_passes() {
        let x = 0.37;
        let (mut a_re, mut a_im) = data(32, 0.9);
        let (mut b_re, mut b_im) = (a_re.clone(), a_im.clone());
        kick_low3::<true>(&mut a_re, &mut a_im, x);
        single_bit_passes(&mut b_re, &mut b_im, &[1, 2, 4], x);
        close(&a_re, &b_re, 1.0);
        close(&a_im, &b_im, 1.0);

        let (mut a_re, mut a_im) = data(128, 0.4);
        let (mut b_re, mut b_im) = (a_re.clone(), a_im.clone());
        for base in (0..128).step_by(128) {
            butterfly8::<true>(&mut a_re, &mut a_im, base, 16, 16, x);
        }
        single_bit_passes(&mut b_re, &mut b_im, &[16, 32, 64], x);
        close(&a_re, &b_re, 1.0);
        close(&a_im, &b_im, 1.0);
    }

    #[test]
    fn complement_pairs_mirror_entries() {
        for len in [1, 2, 4, 8, 16] {
            let (mut re, mut im) = data(len, 0.6);
            let (r0, i0) = (re.clone(), im.clone());
            complement::<false>(&mut re, &mut im, 0.25);
            for k in 0..len {
                let m = len - 1 - k;
                let (wr, wi) = rot::<false>(r0[k], i0[k], r0[m], i0[m], 0.25);
                assert!((re[k] - wr).abs() < 1e-15 && (im[k] - wi).abs() < 1e-15);
            }
        }
    }
}
