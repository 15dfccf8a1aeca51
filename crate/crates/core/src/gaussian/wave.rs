//! Single-mode Gaussian wavefunctions `ψ(x) = exp(−a x²/2 + b x + c)`.
//!
//! With `Re a > 0` every pure single-mode Gaussian state has this form. Its
//! covariance matrix and displacement fix `a` and `b`, and normalization fixes
//! `Re c`. The phase `Im c` is chosen so the overlap with the vacuum is real
//! and positive.

use std::f64::consts::PI;

use num_complex::Complex64;

/// Parameters of `exp(−a x²/2 + b x + c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeWave {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
}

impl ModeWave {
    /// Builds the vac-positive wavefunction of the state with single-mode
    /// covariance `[[gxx, gxp], [gxp, ·]]` and displacement `(q, p)`.
    ///
    /// The pp-entry is implied by purity (`det Γ = 1`).
    pub fn from_moments(gxx: f64, gxp: f64, q: f64, p: f64) -> Self {
        let a = Complex64::new(1.0, -gxp) / gxx;
        let b = a * q + Complex64::new(0.0, p);
        let c = -a * q * q / 2.0 + Complex64::from((a.re / PI).ln() / 4.0);
        let unphased = ModeWave { a, b, c };
        let phase = ModeWave::vacuum().overlap(&unphased).arg();
        ModeWave {
            c: c - Complex64::new(0.0, phase),
            ..unphased
        }
    }

    pub fn vacuum() -> Self {
        ModeWave {
            a: Complex64::new(1.0, 0.0),
            b: Complex64::new(0.0, 0.0),
            c: Complex64::from(-PI.ln() / 4.0),
        }
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        (-self.a * x * x / 2.0 + self.b * x + self.c).exp()
    }

    /// `⟨self, other⟩ = ∫ conj(self(x)) other(x) dx`.
    pub fn overlap(&self, other: &ModeWave) -> Complex64 {
        let a = self.a.conj() + other.a;
        let b = self.b.conj() + other.b;
        let c = self.c.conj() + other.c;
        // Re a > 0, so the principal branch of the square root is the right one.
        ((Complex64::from(2.0 * PI) / a).ln() / 2.0 + b * b / (a * 2.0) + c).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vacuum_at_origin() {
        let v = ModeWave::vacuum().eval(0.0);
        assert!((v.re - PI.powf(-0.25)).abs() < 1e-15);
        assert_eq!(v.im, 0.0);
        assert_eq!(
            ModeWave::from_moments(1.0, 0.0, 0.0, 0.0).eval(0.7),
            ModeWave::vacuum().eval(0.7)
        );
    }

    #[test]
    fn self_overlap_is_one() {
        for &(gxx, gxp, q, p) in &[
            (1.0, 0.0, 0.0, 0.0),
            (0.09, 0.0, 2.0, 0.0),
            (2.0, 1.3, -0.4, 1.1),
        ] {
            let w = ModeWave::from_moments(gxx, gxp, q, p);
            let n = w.overlap(&w);
            assert!((n - 1.0).norm() < 1e-13, "{n}");
            let v = ModeWave::vacuum().overlap(&w);
            assert!(v.re > 0.0 && v.im.abs() < 1e-15);
        }
    }

    #[test]
    fn squeezed_position_wavefunction() {
        let delta: f64 = 0.3;
        let z = 1.0;
        let w = ModeWave::from_moments(delta * delta, 0.0, z, 0.0);
        let expect = |x: f64| {
            (-(x - z).powi(2) / (2.0 * delta * delta)).exp() / (PI * delta * delta).powf(0.25)
        };
        for x in [-1.0, 0.3, 1.0, 1.4] {
            assert!((w.eval(x) - expect(x)).norm() < 1e-13);
        }
        assert!((w.eval(z).re - 1.37136).abs() < 1e-5);
    }
}
