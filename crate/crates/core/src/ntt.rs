//! Exact cyclic convolution on grid groups via number-theoretic transforms.
//!
//! Each axis of length `n` is zero-padded to a power of two `>= 2n - 1`, so the padded
//! transform computes the linear (acyclic) product, which is then folded back modulo `n`.
//! Two NTT-friendly primes and a CRT step give exact results for any output below `p1 * p2`.

const P1: u64 = 998_244_353;
const P2: u64 = 469_762_049;
const ROOT: u64 = 3; // primitive root of both primes

fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    acc
}

fn ntt_in_place<const P: u64>(a: &mut [u64], invert: bool) {
    let p = P;
    let n = a.len();
    debug_assert!(n.is_power_of_two());
    let mut j = 0;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            a.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let mut w_len = pow_mod(ROOT, (p - 1) / len as u64, p);
        if invert {
            w_len = pow_mod(w_len, p - 2, p);
        }
        let half = len / 2;
        let mut twiddles = Vec::with_capacity(half);
        let mut w = 1u64;
        for _ in 0..half {
            twiddles.push(w);
            w = w * w_len % p;
        }
        for chunk in a.chunks_mut(len) {
            let (lo, hi) = chunk.split_at_mut(half);
            for ((u, v), &tw) in lo.iter_mut().zip(hi.iter_mut()).zip(&twiddles) {
                let x = *u;
                let y = *v * tw % P;
                *u = if x + y >= p { x + y - p } else { x + y };
                *v = if x >= y { x - y } else { x + p - y };
            }
        }
        len <<= 1;
    }
    if invert {
        let inv_n = pow_mod(n as u64, p - 2, p);
        for x in a.iter_mut() {
            *x = *x * inv_n % P;
        }
    }
}

/// Applies the 1-d transform along every axis of a row-major array with shape `shape`.
fn transform_nd<const P: u64>(data: &mut [u64], shape: &[usize], invert: bool) {
    let total = data.len();
    let mut stride = total;
    let mut line = Vec::new();
    for &len in shape {
        stride /= len;
        line.resize(len, 0);
        let block = len * stride;
        for outer in (0..total).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                for (k, slot) in line.iter_mut().enumerate() {
                    *slot = data[base + k * stride];
                }
                ntt_in_place::<P>(&mut line, invert);
                for (k, &v) in line.iter().enumerate() {
                    data[base + k * stride] = v;
                }
            }
        }
    }
}

fn embed(values: &[u64], dims: &[usize], padded: &[usize], p: u64) -> Vec<u64> {
    let total: usize = padded.iter().product();
    let mut out = vec![0u64; total];
    for (idx, &v) in values.iter().enumerate() {
        if v == 0 {
            continue;
        }
        let mut rem = idx;
        let mut target = 0;
        let mut scale = total;
        let mut src_scale: usize = dims.iter().product();
        for (&n, &m) in dims.iter().zip(padded) {
            src_scale /= n;
            scale /= m;
            let c = rem / src_scale;
            rem %= src_scale;
            target += c * scale;
        }
        out[target] = v % p;
    }
    out
}

fn convolve_mod<const P: u64>(a: &[u64], b: &[u64], dims: &[usize], padded: &[usize]) -> Vec<u64> {
    let p = P;
    let mut fa = embed(a, dims, padded, p);
    let mut fb = embed(b, dims, padded, p);
    transform_nd::<P>(&mut fa, padded, false);
    transform_nd::<P>(&mut fb, padded, false);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x = *x * y % P;
    }
    transform_nd::<P>(&mut fa, padded, true);
    fa
}

/// Exact cyclic convolution of two nonnegative integer arrays over `Z/dims[0] x ...`.
///
/// Every output value must be below `P1 * P2`; callers convolving 0/1 indicators are
/// bounded by the group size. When `min(Σa·max b, Σb·max a) < P1` one prime suffices.
pub fn cyclic_convolve(a: &[u64], b: &[u64], dims: &[usize]) -> Vec<u64> {
    let size: usize = dims.iter().product();
    assert_eq!(a.len(), size);
    assert_eq!(b.len(), size);
    let padded: Vec<usize> = dims.iter().map(|&n| (2 * n - 1).next_power_of_two()).collect();
    let sum = |v: &[u64]| v.iter().map(|&x| x as u128).sum::<u128>();
    let max = |v: &[u64]| v.iter().copied().max().unwrap_or(0) as u128;
    let bound = (sum(a) * max(b)).min(sum(b) * max(a));
    let r1 = convolve_mod::<P1>(a, b, dims, &padded);
    let r2 = (bound >= P1 as u128).then(|| convolve_mod::<P2>(a, b, dims, &padded));
    let inv_p1 = pow_mod(P1 % P2, P2 - 2, P2);

    let mut out = vec![0u64; size];
    let total = r1.len();
    for idx in 0..total {
        let x1 = r1[idx];
        let value = match &r2 {
            None => x1,
            Some(r2) => {
                let x2 = r2[idx];
                let k = (x2 + P2 - x1 % P2) % P2 * inv_p1 % P2;
                x1 + P1 * k
            }
        };
        if value == 0 {
            continue;
        }
        // fold the padded coordinate back onto the cyclic group
        let mut rem = idx;
        let mut scale = total;
        let mut target = 0;
        let mut dst_scale = size;
        for (&n, &m) in dims.iter().zip(&padded) {
            scale /= m;
            dst_scale /= n;
            let c = rem / scale;
            rem %= scale;
            target += (c % n) * dst_scale;
        }
        out[target] += value;
    }
    out
}
