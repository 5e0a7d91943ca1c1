//! Seeded, resolution-independent test corpora.
//!
//! Every item is a finite list of Fourier modes drawn from a ChaCha stream
//! seeded by `(seed, index)`, so the same item can be rendered exactly on any
//! grid that resolves its band.

use std::f64::consts::PI;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TllError};
use crate::helmholtz::helmholtz_project_spectral;
use crate::spectral::{inverse_transform, GridField, Shape, SpectralField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorClass {
    /// Real scalar fields with every mode `|ξᵢ| ≤ band` populated.
    RandomBandLimited,
    /// Real divergence-free vector fields from projected random data.
    Solenoidal,
    /// One complex mode `A e^{i⟨ξ,x⟩}` with `ξ = ±2^j eₐ`, `2^j ≤ band`.
    PureModes,
    /// Sums of periodised Gaussians with analytic spectra.
    GaussianBumps,
}

impl FromStr for GeneratorClass {
    type Err = TllError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" | "random-band-limited" => Ok(GeneratorClass::RandomBandLimited),
            "solenoidal" => Ok(GeneratorClass::Solenoidal),
            "pure-modes" => Ok(GeneratorClass::PureModes),
            "gaussian-bumps" => Ok(GeneratorClass::GaussianBumps),
            other => Err(TllError::param(format!("unknown generator `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub seed: u64,
    pub count: usize,
    pub generator: GeneratorClass,
    pub dim: usize,
    /// Largest `|ξᵢ|` any item may use.
    pub band: i64,
    pub resolutions: Vec<usize>,
}

impl CorpusSpec {
    pub fn new(seed: u64, count: usize, generator: GeneratorClass, dim: usize) -> Self {
        CorpusSpec {
            seed,
            count,
            generator,
            dim,
            band: 4,
            resolutions: vec![32, 64, 128],
        }
    }
}

/// Stream seed of item `index`.
pub fn item_seed(seed: u64, index: usize) -> u64 {
    // splitmix64 of the pair
    let mut z = seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn item_rng(seed: u64, index: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(item_seed(seed, index))
}

/// A field given by its nonzero Fourier coefficients (one per component).
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusItem {
    pub index: usize,
    pub seed: u64,
    pub dim: usize,
    pub components: usize,
    pub modes: Vec<(Vec<i64>, Vec<Complex64>)>,
}

impl CorpusItem {
    pub fn band(&self) -> i64 {
        self.modes
            .iter()
            .flat_map(|(xi, _)| xi.iter().map(|x| x.abs()))
            .max()
            .unwrap_or(0)
    }

    pub fn spectrum(&self, resolution: usize) -> Result<SpectralField> {
        let shape = Shape::new(self.dim, resolution, self.components)?;
        if 2 * self.band() >= resolution as i64 {
            return Err(TllError::param(format!(
                "band {} is not resolved on {resolution} points",
                self.band()
            )));
        }
        let mut spec = SpectralField::zeros(shape);
        let n = shape.points();
        for (xi, coeffs) in &self.modes {
            let flat = spec.index_of(xi).expect("resolved mode");
            for (c, v) in coeffs.iter().enumerate() {
                spec.data_mut()[c * n + flat] += v;
            }
        }
        Ok(spec)
    }

    pub fn field(&self, resolution: usize) -> Result<GridField> {
        Ok(inverse_transform(&self.spectrum(resolution)?))
    }

    pub fn is_zero(&self) -> bool {
        self.modes.iter().all(|(_, c)| c.iter().all(|v| v.norm() == 0.0))
    }
}

fn box_modes(dim: usize, band: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|p: Vec<i64>| {
                (-band..=band).map(move |x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    out
}

/// Random coefficients on the box `|ξᵢ| ≤ band`, decaying like
/// `(1+|ξ|²)^{−1/2}`, made Hermitian so the field is real.
fn random_real_modes(rng: &mut ChaCha8Rng, dim: usize, band: i64, components: usize) -> Vec<(Vec<i64>, Vec<Complex64>)> {
    let modes = box_modes(dim, band);
    let mut coeffs: Vec<Vec<Complex64>> = modes
        .iter()
        .map(|xi| {
            let r2: i64 = xi.iter().map(|x| x * x).sum();
            let decay = 1.0 / (1.0 + r2 as f64).sqrt();
            (0..components)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * decay)
                .collect()
        })
        .collect();
    // modes are listed symmetrically: index i pairs with len−1−i (ξ ↦ −ξ)
    let len = modes.len();
    for i in 0..len {
        let j = len - 1 - i;
        if i > j {
            break;
        }
        for c in 0..components {
            let sym = 0.5 * (coeffs[i][c] + coeffs[j][c].conj());
            coeffs[i][c] = sym;
            coeffs[j][c] = sym.conj();
        }
    }
    modes.into_iter().zip(coeffs).collect()
}

pub fn generate_item(spec: &CorpusSpec, index: usize) -> Result<CorpusItem> {
    let mut rng = item_rng(spec.seed, index);
    let dim = spec.dim;
    let band = spec.band.max(1);
    let (components, modes) = match spec.generator {
        GeneratorClass::RandomBandLimited => (1, random_real_modes(&mut rng, dim, band, 1)),
        GeneratorClass::Solenoidal => {
            if dim < 2 {
                return Err(TllError::param("solenoidal corpus needs dim >= 2"));
            }
            let raw = random_real_modes(&mut rng, dim, band, dim);
            // project each mode: the projection is diagonal in ξ
            let modes = raw
                .into_iter()
                .map(|(xi, c)| {
                    let r2: f64 = xi.iter().map(|&x| (x * x) as f64).sum();
                    if r2 == 0.0 {
                        return (xi, c);
                    }
                    let dot: Complex64 = xi.iter().zip(&c).map(|(&x, v)| v * x as f64).sum();
                    let projected = xi.iter().zip(&c).map(|(&x, v)| v - dot * (x as f64 / r2)).collect();
                    (xi, projected)
                })
                .collect();
            (dim, modes)
        }
        GeneratorClass::PureModes => {
            let max_j = (band as f64).log2().floor() as u32;
            let j = rng.gen_range(0..=max_j);
            let axis = rng.gen_range(0..dim);
            let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
            let mut xi = vec![0i64; dim];
            xi[axis] = sign * (1i64 << j);
            let amp = Complex64::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(0.0..2.0 * PI));
            (1, vec![(xi, vec![amp])])
        }
        GeneratorClass::GaussianBumps => {
            // û(ξ) = Σ A e^{−σ²|ξ|²/2 − i⟨ξ,x₀⟩}, σ ≥ 0.8 keeps the tail below 1e−16 at |ξᵢ| ≤ 11
            let bumps = rng.gen_range(1..=3);
            let params: Vec<(f64, f64, Vec<f64>)> = (0..bumps)
                .map(|_| {
                    let amp = rng.gen_range(-1.0..1.0);
                    let sigma = rng.gen_range(0.8..1.2);
                    let center = (0..dim).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
                    (amp, sigma, center)
                })
                .collect();
            let modes = box_modes(dim, 11)
                .into_iter()
                .map(|xi| {
                    let r2: f64 = xi.iter().map(|&x| (x * x) as f64).sum();
                    let v: Complex64 = params
                        .iter()
                        .map(|(a, s, x0)| {
                            let phase: f64 = xi.iter().zip(x0).map(|(&k, x)| k as f64 * x).sum();
                            Complex64::from_polar(a * (-0.5 * s * s * r2).exp(), -phase)
                        })
                        .sum();
                    (xi, vec![v])
                })
                .collect();
            (1, modes)
        }
    };
    Ok(CorpusItem {
        index,
        seed: item_seed(spec.seed, index),
        dim,
        components,
        modes,
    })
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub spec: CorpusSpec,
    pub items: Vec<CorpusItem>,
}

impl Corpus {
    pub fn generate(spec: CorpusSpec) -> Result<Corpus> {
        let items = (0..spec.count).map(|i| generate_item(&spec, i)).collect::<Result<_>>()?;
        Ok(Corpus { spec, items })
    }
}

/// Real projected field at the given resolution, for convenience in tests.
pub fn solenoidal_field(seed: u64, index: usize, dim: usize, band: i64, resolution: usize) -> Result<GridField> {
    let spec = CorpusSpec {
        band,
        ..CorpusSpec::new(seed, index + 1, GeneratorClass::Solenoidal, dim)
    };
    let item = generate_item(&spec, index)?;
    Ok(inverse_transform(&helmholtz_project_spectral(&item.spectrum(resolution)?)?))
}

/// Zero-trace time profile `g(τ) = Σ_m c_m sin(mπτ/2) e^{−βτ}` on `τ ∈ [0, 1]`,
/// three seeded terms.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeProfile {
    pub terms: Vec<(f64, u32)>,
    pub beta: f64,
}

impl TimeProfile {
    pub fn random(rng: &mut ChaCha8Rng) -> Self {
        Self::random_with_modes(rng, 4)
    }

    /// As [`TimeProfile::random`] with mode numbers drawn from `1..=max_mode`.
    pub fn random_with_modes(rng: &mut ChaCha8Rng, max_mode: u32) -> Self {
        let terms = (0..3).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(1..=max_mode.max(1)))).collect();
        TimeProfile {
            terms,
            beta: rng.gen_range(0.0..2.0),
        }
    }

    pub fn eval(&self, tau: f64) -> f64 {
        let s: f64 = self
            .terms
            .iter()
            .map(|(c, m)| c * (*m as f64 * PI * tau / 2.0).sin())
            .sum();
        s * (-self.beta * tau).exp()
    }

    /// `g(i/n)`, `i = 0..=n`: the profile of `g(t/T)` at `t_i = i·T/n`.
    pub fn samples(&self, n: usize) -> Vec<f64> {
        (0..=n).map(|i| self.eval(i as f64 / n as f64)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::helmholtz::relative_divergence;
    use crate::spectral::forward_transform;

    #[test]
    fn deterministic_and_resolution_independent() {
        let spec = CorpusSpec::new(7, 3, GeneratorClass::RandomBandLimited, 2);
        let a = Corpus::generate(spec.clone()).unwrap();
        let b = Corpus::generate(spec).unwrap();
        assert_eq!(a.items, b.items);
        let coarse = a.items[1].field(16).unwrap();
        let fine = a.items[1].field(32).unwrap();
        // every other fine sample is a coarse sample
        let m = 16;
        for i in 0..m {
            for j in 0..m {
                let c = coarse.data()[i * m + j];
                let f = fine.data()[(2 * i) * 32 + 2 * j];
                assert!((c - f).norm() < 1e-12);
            }
        }
        assert!(coarse.imag_ratio() < 1e-14);
    }

    #[test]
    fn generators_have_their_properties() {
        let sol = Corpus::generate(CorpusSpec::new(1, 2, GeneratorClass::Solenoidal, 3)).unwrap();
        let u = sol.items[0].field(16).unwrap();
        assert!(relative_divergence(&u).unwrap() < 1e-14);
        assert!(u.imag_ratio() < 1e-14);
        let pm = Corpus::generate(CorpusSpec::new(1, 5, GeneratorClass::PureModes, 2)).unwrap();
        for item in &pm.items {
            assert_eq!(item.modes.len(), 1);
            let nz = item.modes[0].0.iter().filter(|x| **x != 0).count();
            assert_eq!(nz, 1);
        }
        let gb = Corpus::generate(CorpusSpec::new(1, 1, GeneratorClass::GaussianBumps, 2)).unwrap();
        let g = gb.items[0].field(32).unwrap();
        assert!(g.imag_ratio() < 1e-14);
        let back = forward_transform(&g);
        assert!(back.max_abs_diff(&gb.items[0].spectrum(32).unwrap()).unwrap() < 1e-14);
    }

    #[test]
    fn unresolved_band_is_rejected() {
        let item = generate_item(&CorpusSpec::new(1, 1, GeneratorClass::GaussianBumps, 1), 0).unwrap();
        assert!(item.field(16).is_err());
    }

    #[test]
    fn time_profile_has_zero_trace() {
        let mut rng = item_rng(3, 0);
        let g = TimeProfile::random(&mut rng);
        assert_eq!(g.eval(0.0), 0.0);
        assert_eq!(g.samples(8).len(), 9);
    }
}
