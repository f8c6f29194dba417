//! Random parameter draws for identity trials.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::complex::Complex;
use crate::error::{Error, Result};
use crate::precision::PrecisionContext;
use crate::theta::Nome;

/// Generator recorded in reports. Each trial owns the stream
/// `(identity_ordinal << 32) | trial_index` of a ChaCha20 generator seeded
/// with `seed_from_u64(seed)`.
pub const RNG_ALGORITHM: &str =
    "ChaCha20 (rand_chacha 0.3 seed_from_u64; stream = identity << 32 | trial)";

/// Attempts allowed when redrawing parameters to satisfy a resolved
/// constraint's magnitude range.
const MAX_INNER_REDRAWS: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Domain {
    /// magnitude range of free parameters and bases
    pub param: (f64, f64),
    /// magnitude range of the nome
    pub nome: (f64, f64),
    /// magnitude range of expansion coefficients
    pub coeff: (f64, f64),
    /// magnitude range of the twelve bases of the bilateral p = 0 sum
    pub bilateral_base: (f64, f64),
}

impl Default for Domain {
    fn default() -> Self {
        Domain {
            param: (0.3, 1.7),
            nome: (0.05, 0.5),
            coeff: (0.1, 1.0),
            bilateral_base: (0.2, 0.85),
        }
    }
}

impl Domain {
    /// Every range must be positive and ordered; the nome and the bilateral
    /// bases must stay inside the unit disc.
    pub fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in [
            ("param", self.param),
            ("nome", self.nome),
            ("coeff", self.coeff),
            ("bilateral base", self.bilateral_base),
        ] {
            if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "{name} magnitude range [{lo}, {hi}] must satisfy 0 < lo <= hi"
                )));
            }
        }
        for (name, hi) in [
            ("nome", self.nome.1),
            ("bilateral base", self.bilateral_base.1),
        ] {
            if hi >= 1.0 {
                return Err(Error::InvalidConfig(format!(
                    "{name} magnitudes must stay below 1, got {hi}"
                )));
            }
        }
        Ok(())
    }

    pub fn with_nome_max(mut self, p_max: f64) -> Result<Self> {
        if !(p_max > self.nome.0 && p_max < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "nome magnitude bound must lie in ({}, 1), got {p_max}",
                self.nome.0
            )));
        }
        self.nome.1 = p_max;
        Ok(self)
    }
}

pub struct Sampler {
    rng: ChaCha20Rng,
    prec: usize,
    domain: Domain,
}

impl Sampler {
    pub fn new(seed: u64, stream: u64, prec: usize, domain: Domain) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Sampler { rng, prec, domain }
    }

    pub fn for_trial(
        seed: u64,
        identity_ordinal: u32,
        trial: u32,
        prec: usize,
        domain: Domain,
    ) -> Self {
        Self::new(
            seed,
            ((identity_ordinal as u64) << 32) | trial as u64,
            prec,
            domain,
        )
    }

    pub fn precision(&self) -> usize {
        self.prec
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..=hi)
    }

    pub fn index(&mut self, len: usize) -> usize {
        self.rng.gen_range(0..len)
    }

    /// Magnitude uniform in `[lo, hi]`, phase uniform.
    pub fn polar(&mut self, lo: f64, hi: f64) -> Complex {
        let mag = self.uniform(lo, hi);
        let phase = self.uniform(0.0, std::f64::consts::TAU);
        Complex::from_polar_f64(mag, phase, self.prec)
    }

    pub fn param(&mut self) -> Complex {
        let (lo, hi) = self.domain.param;
        self.polar(lo, hi)
    }

    pub fn params<const N: usize>(&mut self) -> [Complex; N] {
        std::array::from_fn(|_| self.param())
    }

    pub fn coeff(&mut self) -> Complex {
        let (lo, hi) = self.domain.coeff;
        self.polar(lo, hi)
    }

    pub fn coeffs(&mut self, len: usize) -> Vec<Complex> {
        (0..len).map(|_| self.coeff()).collect()
    }

    pub fn nome(&mut self, ctx: &PrecisionContext) -> Result<Nome> {
        let (lo, hi) = self.domain.nome;
        Nome::new(self.polar(lo, hi), ctx)
    }

    pub fn in_param_range(&self, x: &Complex) -> bool {
        let (lo, hi) = self.domain.param;
        let m = x.abs_f64();
        m >= lo * (1.0 - 1e-9) && m <= hi * (1.0 + 1e-9)
    }

    /// Repeats `draw` until it yields a value; used to keep resolved
    /// parameters inside the sampling range.
    pub fn redraw<T>(
        &mut self,
        what: &str,
        mut draw: impl FnMut(&mut Self) -> Option<T>,
    ) -> Result<T> {
        for _ in 0..MAX_INNER_REDRAWS {
            if let Some(v) = draw(self) {
                return Ok(v);
            }
        }
        Err(Error::Constraint(format!(
            "could not place {what} inside the sampling range"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let d = Domain::default();
        let mut a = Sampler::for_trial(7, 1, 3, 128, d);
        let mut b = Sampler::for_trial(7, 1, 3, 128, d);
        let mut c = Sampler::for_trial(7, 1, 4, 128, d);
        let (x, y, z) = (
            a.uniform(0.0, 1.0),
            b.uniform(0.0, 1.0),
            c.uniform(0.0, 1.0),
        );
        assert_eq!(x, y);
        assert_ne!(x, z);
    }

    #[test]
    fn draws_respect_domain() {
        let mut s = Sampler::new(1, 0, 128, Domain::default());
        let ctx = PrecisionContext::with_bits(128).unwrap();
        for _ in 0..200 {
            let x = s.param();
            assert!(s.in_param_range(&x));
            let m = s.coeff().abs_f64();
            assert!((0.1 - 1e-12..=1.0 + 1e-12).contains(&m));
            let p = s.nome(&ctx).unwrap().p().abs_f64();
            assert!((0.05 - 1e-12..=0.5 + 1e-12).contains(&p));
        }
    }

    #[test]
    fn domain_validation() {
        assert!(Domain::default().validate().is_ok());
        let bad = [
            Domain {
                param: (0.0, 1.0),
                ..Domain::default()
            },
            Domain {
                coeff: (0.5, 0.2),
                ..Domain::default()
            },
            Domain {
                nome: (0.1, 1.0),
                ..Domain::default()
            },
            Domain {
                bilateral_base: (1.0, 1.0),
                ..Domain::default()
            },
        ];
        for d in bad {
            assert!(matches!(d.validate(), Err(Error::InvalidConfig(_))));
        }
    }

    #[test]
    fn nome_bound_validation() {
        assert!(Domain::default().with_nome_max(0.9).is_ok());
        assert!(Domain::default().with_nome_max(1.0).is_err());
        assert!(Domain::default().with_nome_max(0.01).is_err());
    }
}
