//! Goodness-of-fit helpers for checking samplers against exact densities.

use std::collections::BTreeMap;

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

/// Pearson chi-square test result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Bins whose expected count is below this are pooled with their neighbours.
pub const MIN_EXPECTED: f64 = 5.0;

/// Pearson test of `observed` counts against cell probabilities `probs`.
///
/// Probabilities need not sum to one; the remainder is treated as one more
/// cell with zero observations unless `observed` has an entry for it.
/// Consecutive cells are pooled until each pooled cell expects at least
/// [`MIN_EXPECTED`] counts.
pub fn chi_square_gof(observed: &[u64], probs: &[f64]) -> Result<ChiSquare> {
    if observed.len() != probs.len() {
        return Err(Error::DimensionMismatch {
            expected: probs.len(),
            got: observed.len(),
        });
    }
    let n: u64 = observed.iter().sum();
    if n == 0 {
        return Err(Error::InvalidArgument("no observations".into()));
    }
    let n = n as f64;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut obs, mut exp) = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(probs) {
        obs += o as f64;
        exp += n * p;
        if exp >= MIN_EXPECTED {
            cells.push((obs, exp));
            obs = 0.0;
            exp = 0.0;
        }
    }
    let rest = (n - cells.iter().map(|c| c.1).sum::<f64>() - exp).max(0.0);
    exp += rest;
    if exp > 0.0 || obs > 0.0 {
        match cells.last_mut() {
            Some(last) if exp < MIN_EXPECTED => {
                last.0 += obs;
                last.1 += exp;
            }
            _ => cells.push((obs, exp)),
        }
    }
    if cells.len() < 2 {
        return Err(Error::InvalidArgument(
            "fewer than two cells after pooling".into(),
        ));
    }
    let statistic: f64 = cells.iter().map(|&(o, e)| (o - e) * (o - e) / e).sum();
    let dof = cells.len() - 1;
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::Numerical(e.to_string()))?;
    Ok(ChiSquare {
        statistic,
        dof,
        p_value: dist.sf(statistic),
    })
}

/// `½ Σ |p_k − q_k|`.
pub fn tv_distance(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Relative frequencies of outcome indices `0..len`.
pub fn frequencies(samples: &[usize], len: usize) -> Vec<f64> {
    let mut counts = vec![0u64; len];
    for &s in samples {
        counts[s] += 1;
    }
    counts
        .iter()
        .map(|&c| c as f64 / samples.len() as f64)
        .collect()
}

/// Sparse histogram with cubic bins `[k w, (k+1) w)` per coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    width: f64,
    dim: usize,
    total: u64,
    counts: BTreeMap<Vec<i64>, u64>,
}

impl Histogram {
    pub fn new(dim: usize, width: f64) -> Result<Self> {
        if !(width > 0.0) || !width.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "bin width {width} must be positive"
            )));
        }
        if dim == 0 {
            return Err(Error::InvalidArgument(
                "histogram of zero-dimensional points".into(),
            ));
        }
        Ok(Histogram {
            width,
            dim,
            total: 0,
            counts: BTreeMap::new(),
        })
    }

    pub fn from_points<'a>(
        dim: usize,
        width: f64,
        points: impl IntoIterator<Item = &'a [f64]>,
    ) -> Result<Self> {
        let mut h = Histogram::new(dim, width)?;
        for p in points {
            h.add(p)?;
        }
        Ok(h)
    }

    pub fn bin_of(&self, x: &[f64]) -> Vec<i64> {
        x.iter().map(|v| (v / self.width).floor() as i64).collect()
    }

    pub fn add(&mut self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        *self.counts.entry(self.bin_of(x)).or_default() += 1;
        self.total += 1;
        Ok(())
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn bin_volume(&self) -> f64 {
        self.width.powi(self.dim as i32)
    }

    /// Lower corner of a bin.
    pub fn bin_origin(&self, bin: &[i64]) -> Vec<f64> {
        bin.iter().map(|&k| k as f64 * self.width).collect()
    }

    /// Occupied bins in lexicographic order with their counts.
    pub fn bins(&self) -> impl Iterator<Item = (&[i64], u64)> {
        self.counts.iter().map(|(k, &c)| (k.as_slice(), c))
    }

    pub fn count(&self, bin: &[i64]) -> u64 {
        self.counts.get(bin).copied().unwrap_or(0)
    }

    /// Normalized sample count `count / (total · bin volume)`, comparable
    /// with the density.
    pub fn density(&self, bin: &[i64]) -> f64 {
        self.count(bin) as f64 / (self.total as f64 * self.bin_volume())
    }
}

/// Probability of every bin in the box `[lo, hi)^d` (edges snapped outward to
/// multiples of the bin width), by Gauss-Legendre integration of `density`
/// over each bin.
pub fn bin_probabilities(
    dim: usize,
    width: f64,
    lo: f64,
    hi: f64,
    order: usize,
    density: impl Fn(&[f64]) -> f64,
) -> Result<BTreeMap<Vec<i64>, f64>> {
    if !(dim == 1 || dim == 2) {
        return Err(Error::InvalidArgument(format!(
            "bin integration in {dim} dimensions"
        )));
    }
    let k0 = (lo / width).floor() as i64;
    let k1 = (hi / width).ceil() as i64;
    let gl = GaussLegendre::new(order);
    let mut out = BTreeMap::new();
    for i in k0..k1 {
        let (a, b) = (i as f64 * width, (i + 1) as f64 * width);
        if dim == 1 {
            out.insert(vec![i], gl.integrate(a, b, 1, |x| density(&[x])));
            continue;
        }
        for j in k0..k1 {
            let (c, d) = (j as f64 * width, (j + 1) as f64 * width);
            out.insert(
                vec![i, j],
                gl.integrate_2d((a, b), (c, d), 1, |x, y| density(&[x, y])),
            );
        }
    }
    Ok(out)
}

/// `Σ_b |n_b/n − P_b|` over the given bins, plus the same difference for the
/// mass outside them.
pub fn binned_l1(hist: &Histogram, probs: &BTreeMap<Vec<i64>, f64>) -> f64 {
    let n = hist.total() as f64;
    let mut l1 = 0.0;
    let mut inside_emp = 0.0;
    let mut inside_p = 0.0;
    for (bin, &p) in probs {
        let e = hist.count(bin) as f64 / n;
        l1 += (e - p).abs();
        inside_emp += e;
        inside_p += p;
    }
    l1 + ((1.0 - inside_emp) - (1.0 - inside_p)).abs()
}

/// Pearson test of a histogram against bin probabilities, with everything
/// outside the listed bins pooled into one extra cell.
pub fn chi_square_binned(hist: &Histogram, probs: &BTreeMap<Vec<i64>, f64>) -> Result<ChiSquare> {
    let mut observed = Vec::with_capacity(probs.len() + 1);
    let mut expected = Vec::with_capacity(probs.len() + 1);
    for (bin, &p) in probs {
        observed.push(hist.count(bin));
        expected.push(p);
    }
    let inside: u64 = observed.iter().sum();
    observed.push(hist.total() - inside);
    expected.push((1.0 - expected.iter().sum::<f64>()).max(0.0));
    chi_square_gof(&observed, &expected)
}

/// `Σ_b |a_b/n_a − b_b/n_b|` over the union of occupied bins.
pub fn two_sample_l1(a: &Histogram, b: &Histogram) -> Result<f64> {
    if a.dim() != b.dim() || a.width() != b.width() {
        return Err(Error::InvalidArgument(
            "histograms use different binning".into(),
        ));
    }
    let (na, nb) = (a.total() as f64, b.total() as f64);
    let mut l1 = 0.0;
    for (bin, c) in a.bins() {
        l1 += (c as f64 / na - b.count(bin) as f64 / nb).abs();
    }
    for (bin, c) in b.bins() {
        if a.count(bin) == 0 {
            l1 += c as f64 / nb;
        }
    }
    Ok(l1)
}
