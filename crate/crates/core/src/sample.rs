//! Seeded sampling on a stratified complex.
//!
//! Sample streams are fully determined by `(seed, draw count)`, so every
//! verification certificate is reproducible byte for byte.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::complex::StratifiedComplex;
use crate::rng::SplitMix64;

/// How many samples to draw and from which seed.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SamplerSpec {
    pub samples: usize,
    pub seed: u64,
}

impl Default for SamplerSpec {
    fn default() -> Self {
        Self {
            samples: 2000,
            seed: 0x5eed,
        }
    }
}

impl SamplerSpec {
    pub fn new(samples: usize, seed: u64) -> Self {
        Self { samples, seed }
    }
}

#[derive(Debug, Clone)]
pub struct OnComplexSample {
    pub point: DVector<f64>,
    pub simplex: usize,
    pub stratum: usize,
}

#[derive(Debug, Clone)]
pub struct TubeProbe {
    pub point: DVector<f64>,
    pub foot: DVector<f64>,
    pub dist: f64,
    pub member: usize,
}

pub struct Sampler<'a> {
    complex: &'a StratifiedComplex,
    rng: SplitMix64,
}

impl<'a> Sampler<'a> {
    pub fn new(complex: &'a StratifiedComplex, seed: u64) -> Self {
        Self {
            complex,
            rng: SplitMix64::new(seed),
        }
    }

    pub fn rng(&mut self) -> &mut SplitMix64 {
        &mut self.rng
    }

    /// Uniform barycentric weights (Dirichlet via exponential spacings).
    fn dirichlet(&mut self, len: usize) -> Vec<f64> {
        let mut w: Vec<f64> = (0..len).map(|_| -self.rng.uniform_open().ln()).collect();
        let sum: f64 = w.iter().sum();
        for v in &mut w {
            *v /= sum;
        }
        w
    }

    /// A point of the complex: a uniformly chosen simplex with uniform
    /// barycentric weights. Zero-dimensional simplices contribute their
    /// vertex, so vertices do appear in the stream.
    pub fn on_complex(&mut self) -> OnComplexSample {
        let simplex = self.rng.index(self.complex.simplices().len());
        self.in_simplex(simplex)
    }

    pub fn in_simplex(&mut self, simplex: usize) -> OnComplexSample {
        let frame = self.complex.frame(simplex);
        let lambda = self.dirichlet(frame.vertices.len());
        OnComplexSample {
            point: frame.point_at(&lambda),
            simplex,
            stratum: self.complex.simplex_stratum(simplex),
        }
    }

    /// A point of the given stratum (uniform member simplex).
    pub fn in_stratum(&mut self, stratum: usize) -> OnComplexSample {
        let members = &self.complex.stratum(stratum).simplices;
        let simplex = members[self.rng.index(members.len())];
        self.in_simplex(simplex)
    }

    /// A point strictly inside a simplex: every barycentric weight at least
    /// `margin`.
    pub fn in_simplex_interior(&mut self, simplex: usize, margin: f64) -> OnComplexSample {
        let frame = self.complex.frame(simplex);
        let len = frame.vertices.len();
        let mut lambda = self.dirichlet(len);
        let scale = 1.0 - margin * len as f64;
        for l in &mut lambda {
            *l = margin + scale * *l;
        }
        OnComplexSample {
            point: frame.point_at(&lambda),
            simplex,
            stratum: self.complex.simplex_stratum(simplex),
        }
    }

    /// A point of the open tube around a stratum: an interior foot offset in
    /// a random normal direction by a radius below `delta`. Returns `None`
    /// for top-dimensional strata, whose tube is the stratum itself.
    pub fn tube_probe(&mut self, stratum: usize, delta: f64) -> Option<TubeProbe> {
        self.tube_probe_in(stratum, delta, 0.05, 0.95)
    }

    /// Tube probe with the radius drawn from `(lo, hi) * delta`.
    pub fn tube_probe_in(
        &mut self,
        stratum: usize,
        delta: f64,
        lo: f64,
        hi: f64,
    ) -> Option<TubeProbe> {
        let members = &self.complex.stratum(stratum).simplices;
        let member = members[self.rng.index(members.len())];
        let frame = self.complex.frame(member);
        let codim = frame.normal.ncols();
        if codim == 0 {
            return None;
        }
        let foot = self.in_simplex_interior(member, 0.05).point;
        let coeffs = DVector::from_fn(codim, |_, _| self.rng.gaussian());
        let dir = &frame.normal * coeffs;
        let norm = dir.norm();
        if norm < 1e-12 {
            return None;
        }
        let dist = (lo + (hi - lo) * self.rng.uniform()) * delta;
        let point = &foot + dir * (dist / norm);
        Some(TubeProbe {
            point,
            foot,
            dist,
            member,
        })
    }
}
