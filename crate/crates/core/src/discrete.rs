//! Drawing an index `J ~ p` from a probability oracle, one bit at a time.
//!
//! The index is written in binary with `⌈log₂ χ⌉` bits and drawn
//! most-significant bit first. Each bit is a biased coin whose bias is the
//! conditional probability of that bit given the bits already drawn, which is
//! a ratio of two prefix masses. Because the bits are drawn MSB-first, every
//! prefix names a contiguous block of indices, so a prefix mass is a plain
//! sum over a range clipped to `0..χ`.
//!
//! A draw makes at most `2χ` oracle calls (one full sweep for the root mass,
//! then a geometrically shrinking sweep per level), well inside the
//! `2χ⌈log₂ χ⌉` budget. [`CdfSampler`] is the cached fast path with the same
//! output distribution.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::OnceLock;

use rand::Rng;

use crate::error::{Error, Result};

/// Tolerance on `Σ p(j) = 1`.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// A probability mass function over `{0, …, χ−1}` accessed by evaluation only.
pub trait Pmf {
    fn chi(&self) -> usize;
    fn prob(&self, j: usize) -> f64;
}

impl Pmf for [f64] {
    fn chi(&self) -> usize {
        self.len()
    }

    fn prob(&self, j: usize) -> f64 {
        self[j]
    }
}

impl Pmf for Vec<f64> {
    fn chi(&self) -> usize {
        self.len()
    }

    fn prob(&self, j: usize) -> f64 {
        self[j]
    }
}

impl<P: Pmf + ?Sized> Pmf for &P {
    fn chi(&self) -> usize {
        (**self).chi()
    }

    fn prob(&self, j: usize) -> f64 {
        (**self).prob(j)
    }
}

/// Adapts a closure `j -> p(j)`.
pub struct FnPmf<F> {
    chi: usize,
    f: F,
}

impl<F: Fn(usize) -> f64> FnPmf<F> {
    pub fn new(chi: usize, f: F) -> Self {
        FnPmf { chi, f }
    }
}

impl<F: Fn(usize) -> f64> Pmf for FnPmf<F> {
    fn chi(&self) -> usize {
        self.chi
    }

    fn prob(&self, j: usize) -> f64 {
        (self.f)(j)
    }
}

/// Counts evaluations of the wrapped pmf.
pub struct CountingPmf<P> {
    inner: P,
    calls: AtomicUsize,
}

impl<P: Pmf> CountingPmf<P> {
    pub fn new(inner: P) -> Self {
        CountingPmf {
            inner,
            calls: AtomicUsize::new(0),
        }
    }

    pub fn get(&self) -> &P {
        &self.inner
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.calls.store(0, Ordering::Relaxed);
    }
}

impl<P: Pmf> Pmf for CountingPmf<P> {
    fn chi(&self) -> usize {
        self.inner.chi()
    }

    fn prob(&self, j: usize) -> f64 {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.prob(j)
    }
}

/// Number of bits used to write an index below `chi`, i.e. `⌈log₂ χ⌉`.
pub fn index_bits(chi: usize) -> u32 {
    match chi {
        0 | 1 => 0,
        _ => usize::BITS - (chi - 1).leading_zeros(),
    }
}

/// A pmf oracle with a once-only normalization latch.
///
/// The first full sweep over the support (which every bit-wise draw performs
/// anyway for the root mass) records whether the masses sum to one; later
/// draws reuse the verdict.
pub struct PmfOracle<P> {
    pmf: P,
    normalized: OnceLock<std::result::Result<(), f64>>,
}

impl<P: Pmf> PmfOracle<P> {
    pub fn new(pmf: P) -> Result<Self> {
        if pmf.chi() == 0 {
            return Err(Error::InvalidArgument("pmf over an empty index set".into()));
        }
        Ok(PmfOracle {
            pmf,
            normalized: OnceLock::new(),
        })
    }

    pub fn chi(&self) -> usize {
        self.pmf.chi()
    }

    pub fn inner(&self) -> &P {
        &self.pmf
    }

    fn eval(&self, j: usize) -> Result<f64> {
        let p = self.pmf.prob(j);
        if !(p >= 0.0) || !p.is_finite() {
            return Err(Error::OracleContract(format!(
                "p({j}) = {p} is not a probability"
            )));
        }
        Ok(p)
    }

    fn range_mass(&self, start: usize, end: usize) -> Result<f64> {
        let end = end.min(self.chi());
        let mut total = 0.0;
        for j in start..end {
            total += self.eval(j)?;
        }
        Ok(total)
    }

    /// Index range `[start, end)` covered by an MSB-first prefix of `len` bits.
    fn prefix_range(&self, value: usize, len: u32) -> (usize, usize) {
        let rest = index_bits(self.chi()) - len;
        let start = value << rest;
        (start, (start + (1usize << rest)).min(self.chi()))
    }

    fn root_mass(&self) -> Result<f64> {
        let total = self.range_mass(0, self.chi())?;
        let verdict = self.normalized.get_or_init(|| {
            if (total - 1.0).abs() <= NORMALIZATION_TOL {
                Ok(())
            } else {
                Err(total)
            }
        });
        match verdict {
            Ok(()) => Ok(total),
            Err(total) => Err(Error::InvalidPmf { total: *total }),
        }
    }

    /// Total probability of indices whose leading bits equal `prefix`.
    pub fn prefix_mass(&self, prefix: &[bool]) -> Result<f64> {
        let len = prefix.len() as u32;
        let bits = index_bits(self.chi());
        if len > bits {
            return Err(Error::InvalidArgument(format!(
                "prefix of {len} bits for an index of {bits} bits"
            )));
        }
        if len == 0 {
            return self.range_mass(0, self.chi());
        }
        let value = prefix
            .iter()
            .fold(0usize, |acc, &b| (acc << 1) | b as usize);
        let (start, end) = self.prefix_range(value, len);
        if start >= self.chi() {
            return Ok(0.0);
        }
        self.range_mass(start, end)
    }

    /// `Pr[next bit = 1 | leading bits = prefix]`.
    pub fn conditional_one(&self, prefix: &[bool]) -> Result<f64> {
        let parent = self.prefix_mass(prefix)?;
        if parent <= 0.0 {
            return Err(Error::ZeroMassPrefix {
                len: prefix.len() as u32,
            });
        }
        let mut child = prefix.to_vec();
        child.push(true);
        Ok((self.prefix_mass(&child)? / parent).min(1.0))
    }

    /// Draws `J ~ p` bit by bit, most significant bit first.
    ///
    /// Consumes exactly `⌈log₂ χ⌉` uniform variates from `rng`.
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<usize> {
        let chi = self.chi();
        let bits = index_bits(chi);
        if bits == 0 {
            return Ok(0);
        }
        let mut mass = self.root_mass()?;
        let mut value = 0usize;
        for len in 0..bits {
            if mass <= 0.0 {
                return Err(Error::ZeroMassPrefix { len });
            }
            let (start, end) = self.prefix_range(2 * value + 1, len + 1);
            let one = if start >= chi {
                0.0
            } else {
                self.range_mass(start, end)?
            };
            let u: f64 = rng.random();
            if u < one / mass {
                value = 2 * value + 1;
                mass = one;
            } else {
                value *= 2;
                mass = (mass - one).max(0.0);
            }
        }
        if value >= chi {
            return Err(Error::ZeroMassPrefix { len: bits });
        }
        Ok(value)
    }
}

/// Inverse-CDF sampler over a cached cumulative table.
///
/// One sweep at construction, then a binary search and one uniform variate per
/// draw.
#[derive(Debug, Clone)]
pub struct CdfSampler {
    cdf: Vec<f64>,
}

impl CdfSampler {
    pub fn new<P: Pmf + ?Sized>(pmf: &P) -> Result<Self> {
        let mut cdf = Vec::with_capacity(pmf.chi());
        let mut acc = 0.0;
        for j in 0..pmf.chi() {
            let p = pmf.prob(j);
            if !(p >= 0.0) || !p.is_finite() {
                return Err(Error::OracleContract(format!(
                    "p({j}) = {p} is not a probability"
                )));
            }
            acc += p;
            cdf.push(acc);
        }
        if cdf.is_empty() || (acc - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidPmf { total: acc });
        }
        Ok(CdfSampler { cdf })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = *self.cdf.last().unwrap();
        let u = rng.random::<f64>() * total;
        let j = self.cdf.partition_point(|&c| c <= u);
        j.min(self.cdf.len() - 1)
    }
}
