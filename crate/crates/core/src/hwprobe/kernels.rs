//! Streaming and FMA kernels with static traffic/work accounting.
//!
//! Kernels are generic over their memory and arithmetic so tests can run the
//! exact loop bodies against counting implementations.

use std::ops::{Add, Mul};

use serde::{Deserialize, Serialize};

/// STREAM-style bandwidth kernels over three arrays `a`, `b`, `c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StreamKernel {
    /// c = a
    Copy,
    /// b = s * c
    Scale,
    /// c = a + b
    Add,
    /// a = b + s * c
    Triad,
}

impl StreamKernel {
    pub const ALL: [StreamKernel; 4] = [StreamKernel::Copy, StreamKernel::Scale, StreamKernel::Add, StreamKernel::Triad];

    pub fn reads_per_element(&self) -> u64 {
        match self {
            StreamKernel::Copy | StreamKernel::Scale => 1,
            StreamKernel::Add | StreamKernel::Triad => 2,
        }
    }

    /// Bytes moved by one pass over `n` elements of `elem_bytes` each.
    pub fn bytes_per_pass(&self, n: u64, elem_bytes: u64) -> u64 {
        (self.reads_per_element() + 1) * n * elem_bytes
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            StreamKernel::Copy => "copy",
            StreamKernel::Scale => "scale",
            StreamKernel::Add => "add",
            StreamKernel::Triad => "triad",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Array {
    A,
    B,
    C,
}

/// Element access used by the stream kernels.
pub trait StreamArrays {
    type Elem: Copy + Add<Output = Self::Elem> + Mul<Output = Self::Elem>;
    fn len(&self) -> usize;
    fn load(&self, array: Array, i: usize) -> Self::Elem;
    fn store(&mut self, array: Array, i: usize, v: Self::Elem);
}

/// Three equally sized slices.
pub struct Slices<'a, T> {
    pub a: &'a mut [T],
    pub b: &'a mut [T],
    pub c: &'a mut [T],
}

impl<T: Copy + Add<Output = T> + Mul<Output = T>> StreamArrays for Slices<'_, T> {
    type Elem = T;

    #[inline(always)]
    fn len(&self) -> usize {
        self.a.len()
    }

    #[inline(always)]
    fn load(&self, array: Array, i: usize) -> T {
        match array {
            Array::A => self.a[i],
            Array::B => self.b[i],
            Array::C => self.c[i],
        }
    }

    #[inline(always)]
    fn store(&mut self, array: Array, i: usize, v: T) {
        match array {
            Array::A => self.a[i] = v,
            Array::B => self.b[i] = v,
            Array::C => self.c[i] = v,
        }
    }
}

/// One pass of `kernel` over every element.
#[inline(always)]
pub fn stream_pass<S: StreamArrays>(kernel: StreamKernel, arrays: &mut S, scalar: S::Elem) {
    let n = arrays.len();
    match kernel {
        StreamKernel::Copy => {
            for i in 0..n {
                let v = arrays.load(Array::A, i);
                arrays.store(Array::C, i, v);
            }
        }
        StreamKernel::Scale => {
            for i in 0..n {
                let v = scalar * arrays.load(Array::C, i);
                arrays.store(Array::B, i, v);
            }
        }
        StreamKernel::Add => {
            for i in 0..n {
                let v = arrays.load(Array::A, i) + arrays.load(Array::B, i);
                arrays.store(Array::C, i, v);
            }
        }
        StreamKernel::Triad => {
            for i in 0..n {
                let v = arrays.load(Array::B, i) + scalar * arrays.load(Array::C, i);
                arrays.store(Array::A, i, v);
            }
        }
    }
}

/// Independent accumulator chains per FMA kernel instance.
pub const FMA_CHAINS: usize = 64;
/// Unrolled FMA rounds per loop iteration.
pub const FMA_UNROLL: u64 = 4;

/// FLOPs of one kernel invocation: two per fused multiply-add.
pub fn fma_flops(chains: u64, unroll: u64, iterations: u64, threads: u64) -> u64 {
    2 * chains * unroll * iterations * threads
}

/// `iterations × unroll` rounds of `acc = op(acc, x, y)` across `N` chains.
#[inline(always)]
pub fn fma_chains<T: Copy, const N: usize>(
    seed: [T; N],
    iterations: u64,
    x: T,
    y: T,
    op: impl Fn(T, T, T) -> T,
) -> [T; N] {
    let mut acc = seed;
    for _ in 0..iterations {
        for _ in 0..FMA_UNROLL {
            for a in acc.iter_mut() {
                *a = op(*a, x, y);
            }
        }
    }
    acc
}

macro_rules! fma_entry {
    ($name:ident, $avx:ident, $t:ty) => {
        #[cfg(target_arch = "x86_64")]
        #[target_feature(enable = "avx2,fma")]
        unsafe fn $avx(iterations: u64, x: $t, y: $t) -> $t {
            let seed = std::array::from_fn::<$t, FMA_CHAINS, _>(|i| 1.0 + i as $t * 1e-3);
            fma_chains(seed, iterations, x, y, |a: $t, x, y| a.mul_add(x, y)).iter().sum()
        }

        /// Runs the FMA kernel on this thread and returns a checksum.
        pub fn $name(iterations: u64, x: $t, y: $t) -> $t {
            #[cfg(target_arch = "x86_64")]
            if std::arch::is_x86_feature_detected!("avx2") && std::arch::is_x86_feature_detected!("fma") {
                // SAFETY: the required CPU features were detected at runtime.
                return unsafe { $avx(iterations, x, y) };
            }
            let seed = std::array::from_fn::<$t, FMA_CHAINS, _>(|i| 1.0 + i as $t * 1e-3);
            #[cfg(target_arch = "aarch64")]
            let out = fma_chains(seed, iterations, x, y, |a: $t, x, y| a.mul_add(x, y));
            // without hardware FMA, mul_add lowers to a libm call
            #[cfg(not(target_arch = "aarch64"))]
            let out = fma_chains(seed, iterations, x, y, |a: $t, x, y| a * x + y);
            out.iter().sum()
        }
    };
}

fma_entry!(fma_kernel_f32, fma_kernel_f32_avx2, f32);
fma_entry!(fma_kernel_f64, fma_kernel_f64_avx2, f64);
