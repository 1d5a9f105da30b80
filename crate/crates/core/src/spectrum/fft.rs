//! One-dimensional FFT for arbitrary lengths.
//!
//! Power-of-two lengths use an iterative radix-2 Cooley-Tukey transform.
//! Every other length goes through Bluestein's chirp-z reformulation, which
//! turns the DFT into a circular convolution evaluated with a power-of-two
//! radix-2 transform, so no zero padding ever reaches the caller's spectrum.

use std::f64::consts::PI;

use num_complex::Complex64;

/// A planned forward/inverse transform of a fixed length.
#[derive(Debug, Clone)]
pub struct Fft {
    len: usize,
    kind: Kind,
}

#[derive(Debug, Clone)]
enum Kind {
    Radix2(Radix2),
    Bluestein(Bluestein),
}

impl Fft {
    /// Plans a transform of length `len` (`len >= 1`).
    pub fn new(len: usize) -> Self {
        assert!(len >= 1, "FFT length must be positive");
        let kind = if len.is_power_of_two() {
            Kind::Radix2(Radix2::new(len))
        } else {
            Kind::Bluestein(Bluestein::new(len))
        };
        Fft { len, kind }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// In-place forward transform, `X_k = sum_n x_n exp(-2 pi i k n / len)`.
    pub fn forward(&self, buf: &mut [Complex64]) {
        assert_eq!(buf.len(), self.len, "buffer length does not match plan");
        match &self.kind {
            Kind::Radix2(r) => r.forward(buf),
            Kind::Bluestein(b) => b.forward(buf),
        }
    }

    /// In-place inverse transform including the `1/len` factor.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        for v in buf.iter_mut() {
            *v = v.conj();
        }
        self.forward(buf);
        let scale = 1.0 / self.len as f64;
        for v in buf.iter_mut() {
            *v = v.conj() * scale;
        }
    }
}

#[derive(Debug, Clone)]
struct Radix2 {
    /// `exp(-2 pi i k / n)` for `k < n / 2`.
    twiddles: Vec<Complex64>,
    bit_reversed: Vec<usize>,
}

impl Radix2 {
    fn new(n: usize) -> Self {
        let bits = n.trailing_zeros();
        let bit_reversed = (0..n)
            .map(|i| {
                if bits == 0 {
                    0
                } else {
                    i.reverse_bits() >> (usize::BITS - bits)
                }
            })
            .collect();
        let twiddles = (0..n / 2)
            .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / n as f64))
            .collect();
        Radix2 {
            twiddles,
            bit_reversed,
        }
    }

    fn forward(&self, buf: &mut [Complex64]) {
        let n = buf.len();
        for (i, &j) in self.bit_reversed.iter().enumerate() {
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut size = 2;
        while size <= n {
            let half = size / 2;
            let stride = n / size;
            for start in (0..n).step_by(size) {
                for j in 0..half {
                    let w = self.twiddles[j * stride];
                    let a = buf[start + j];
                    let b = buf[start + j + half] * w;
                    buf[start + j] = a + b;
                    buf[start + j + half] = a - b;
                }
            }
            size *= 2;
        }
    }
}

#[derive(Debug, Clone)]
struct Bluestein {
    /// `exp(-i pi k^2 / n)` for `k < n`.
    chirp: Vec<Complex64>,
    /// Forward transform of the conjugate chirp laid out for circular convolution.
    filter: Vec<Complex64>,
    inner: Radix2,
}

impl Bluestein {
    fn new(n: usize) -> Self {
        let m = (2 * n - 1).next_power_of_two();
        // k^2 is reduced modulo 2n so the angle stays small and exact.
        let modulus = 2 * n as u128;
        let chirp: Vec<Complex64> = (0..n)
            .map(|k| {
                let k2 = (k as u128 * k as u128) % modulus;
                Complex64::from_polar(1.0, -PI * k2 as f64 / n as f64)
            })
            .collect();
        let mut filter = vec![Complex64::new(0.0, 0.0); m];
        filter[0] = chirp[0].conj();
        for k in 1..n {
            filter[k] = chirp[k].conj();
            filter[m - k] = chirp[k].conj();
        }
        let inner = Radix2::new(m);
        inner.forward(&mut filter);
        Bluestein {
            chirp,
            filter,
            inner,
        }
    }

    fn forward(&self, buf: &mut [Complex64]) {
        let n = buf.len();
        let m = self.filter.len();
        let mut work = vec![Complex64::new(0.0, 0.0); m];
        for k in 0..n {
            work[k] = buf[k] * self.chirp[k];
        }
        self.inner.forward(&mut work);
        for (w, f) in work.iter_mut().zip(&self.filter) {
            // conj so the following forward pass acts as an inverse
            *w = (*w * f).conj();
        }
        self.inner.forward(&mut work);
        let scale = 1.0 / m as f64;
        for k in 0..n {
            buf[k] = work[k].conj() * scale * self.chirp[k];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn naive(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(j, v)| {
                        let phase = -2.0 * PI * ((k * j) % n) as f64 / n as f64;
                        v * Complex64::from_polar(1.0, phase)
                    })
                    .sum()
            })
            .collect()
    }

    fn random_signal(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect()
    }

    #[test]
    fn matches_naive_dft_for_lengths_1_to_40() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=40 {
            let x = random_signal(&mut rng, n);
            let expected = naive(&x);
            let mut got = x.clone();
            Fft::new(n).forward(&mut got);
            let scale = expected.iter().map(|v| v.norm()).fold(1e-300, f64::max);
            for (g, e) in got.iter().zip(&expected) {
                assert!((g - e).norm() / scale < 1e-12, "n={n}: {g} vs {e}");
            }
        }
    }

    #[test]
    fn inverse_undoes_forward() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [1, 2, 5, 12, 64, 97, 178, 218] {
            let x = random_signal(&mut rng, n);
            let fft = Fft::new(n);
            let mut y = x.clone();
            fft.forward(&mut y);
            fft.inverse(&mut y);
            for (a, b) in x.iter().zip(&y) {
                assert!((a - b).norm() < 1e-12, "n={n}");
            }
        }
    }
}
