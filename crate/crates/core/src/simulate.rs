//! Seeded narrowband array snapshots.
//!
//! `x[n] = sum_i s_i[n] u_i + sigma w[n]` with independent zero-mean Gaussian
//! sources `s_i ~ N(0, Lambda_i)` and noise `w ~ N(0, W)`. Complex draws are
//! circular with `E[z z^H] = I`, i.e. variance 1/2 per real component.
//!
//! Random numbers come from SplitMix64 with Box-Muller normals so that a seed
//! reproduces the same snapshots bit for bit on any platform. Per snapshot the
//! draw order is: each source amplitude in index order, then the `N` noise
//! components; a complex value draws its real part first.

use crate::beamform::SteeringVector;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::linalg::{norm, HermitianMatrix, LinalgError, Matrix, C64};

/// SplitMix64 generator with a Box-Muller normal stream.
///
/// Normals come in pairs from two consecutive 53-bit uniforms `u1, u2`:
/// `r = sqrt(-2 ln(1 - u1))`, returning `r cos(2 pi u2)` and then
/// `r sin(2 pi u2)` on the following call.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
    spare: Option<f64>,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self {
            state: seed,
            spare: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform on `[0, 1)` with 53 bits of resolution.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.next_f64();
        let u2 = self.next_f64();
        let r = (-2.0 * (1.0 - u1).ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }

    /// Circular complex normal with unit variance.
    pub fn next_complex_normal(&mut self) -> C64 {
        let re = self.next_normal();
        let im = self.next_normal();
        C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }
}

/// Sources, noise shape and seed describing one simulated array scene.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    directions: Vec<Vec<C64>>,
    powers: Vec<f64>,
    sigma: f64,
    noise: HermitianMatrix,
    is_real: bool,
    seed: u64,
}

impl Scene {
    /// Directions are normalized to unit length.
    pub fn new(
        directions: Vec<Vec<C64>>,
        powers: Vec<f64>,
        sigma: f64,
        noise: HermitianMatrix,
        is_real: bool,
        seed: u64,
    ) -> Result<Self> {
        let n = noise.dim();
        if directions.len() != powers.len() {
            return Err(Error::InvalidInput(format!(
                "{} directions but {} powers",
                directions.len(),
                powers.len()
            )));
        }
        if directions.len() >= n {
            return Err(Error::InvalidInput(format!(
                "{} sources need more than {n} sensors",
                directions.len()
            )));
        }
        if powers.iter().any(|p| !(*p > 0.0) || !p.is_finite()) {
            return Err(Error::InvalidInput("source powers must be positive".into()));
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidInput("noise gain must be positive".into()));
        }
        if is_real && !noise.is_real() {
            return Err(Error::InvalidInput(
                "real scene needs a real noise covariance".into(),
            ));
        }
        noise.cholesky()?;
        let mut normalized = Vec::with_capacity(directions.len());
        for d in directions {
            if d.len() != n {
                return Err(LinalgError::DimensionMismatch {
                    expected: n,
                    found: d.len(),
                }
                .into());
            }
            if is_real && d.iter().any(|z| z.im != 0.0) {
                return Err(Error::InvalidInput(
                    "real scene needs real directions".into(),
                ));
            }
            let len = norm(&d);
            if !(len > 0.0) || !len.is_finite() {
                return Err(Error::InvalidInput(
                    "direction vectors must be nonzero".into(),
                ));
            }
            normalized.push(d.into_iter().map(|z| z / len).collect());
        }
        Ok(Self {
            directions: normalized,
            powers,
            sigma,
            noise,
            is_real,
            seed,
        })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn sensors(&self) -> usize {
        self.noise.dim()
    }

    pub fn sources(&self) -> usize {
        self.powers.len()
    }

    pub fn directions(&self) -> &[Vec<C64>] {
        &self.directions
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn noise(&self) -> &HermitianMatrix {
        &self.noise
    }

    pub fn is_real(&self) -> bool {
        self.is_real
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// `sum_i Lambda_i u_i u_i^H + sigma^2 W`.
pub fn population_covariance(scene: &Scene) -> HermitianMatrix {
    let n = scene.sensors();
    let mut m = scene.noise.as_matrix().scale(scene.sigma * scene.sigma);
    for (u, &power) in scene.directions.iter().zip(&scene.powers) {
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] += u[i] * u[j].conj() * power;
            }
        }
    }
    HermitianMatrix::symmetrized(m, scene.is_real)
}

/// Snapshots drawn from a [`Scene`] plus their sample covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotSet {
    snapshots: Vec<Vec<C64>>,
    sample_cov: HermitianMatrix,
    scene: Scene,
}

impl SnapshotSet {
    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn snapshots(&self) -> &[Vec<C64>] {
        &self.snapshots
    }

    pub fn sample_cov(&self) -> &HermitianMatrix {
        &self.sample_cov
    }

    pub fn scene(&self) -> &Scene {
        &self.scene
    }

    pub fn seed(&self) -> u64 {
        self.scene.seed
    }
}

/// `(1/K) sum_k x_k x_k^H`, accumulated in snapshot order over the upper
/// triangle and mirrored so the result is exactly Hermitian.
pub fn sample_covariance(snapshots: &[Vec<C64>], is_real: bool) -> Result<HermitianMatrix> {
    let first = snapshots
        .first()
        .ok_or_else(|| Error::InvalidInput("snapshots must be ≥ 1".into()))?;
    let n = first.len();
    let mut m = Matrix::zeros(n, n);
    for x in snapshots {
        if x.len() != n {
            return Err(LinalgError::DimensionMismatch {
                expected: n,
                found: x.len(),
            }
            .into());
        }
        for i in 0..n {
            for j in i..n {
                m[(i, j)] += x[i] * x[j].conj();
            }
        }
    }
    let k = snapshots.len() as f64;
    for i in 0..n {
        m[(i, i)] = C64::new(m[(i, i)].re / k, 0.0);
        for j in (i + 1)..n {
            let v = m[(i, j)] / k;
            let v = if is_real { C64::new(v.re, 0.0) } else { v };
            m[(i, j)] = v;
            m[(j, i)] = v.conj();
        }
    }
    Ok(HermitianMatrix::symmetrized(m, is_real))
}

pub fn generate(scene: &Scene, count: usize) -> Result<SnapshotSet> {
    if count == 0 {
        return Err(Error::InvalidInput("snapshots must be ≥ 1".into()));
    }
    let n = scene.sensors();
    let chol = scene.noise.cholesky()?;
    let mut rng = SplitMix64::new(scene.seed);
    let amplitudes: Vec<f64> = scene.powers.iter().map(|p| p.sqrt()).collect();
    let draw = |rng: &mut SplitMix64| {
        if scene.is_real {
            C64::new(rng.next_normal(), 0.0)
        } else {
            rng.next_complex_normal()
        }
    };

    let mut snapshots = Vec::with_capacity(count);
    for _ in 0..count {
        let mut x = vec![C64::new(0.0, 0.0); n];
        for (u, &a) in scene.directions.iter().zip(&amplitudes) {
            let s = draw(&mut rng) * a;
            for (xi, ui) in x.iter_mut().zip(u) {
                *xi += s * ui;
            }
        }
        let z: Vec<C64> = (0..n).map(|_| draw(&mut rng)).collect();
        let w = chol.mul_vec(&z);
        for (xi, wi) in x.iter_mut().zip(&w) {
            *xi += wi * scene.sigma;
        }
        snapshots.push(x);
    }
    let sample_cov = sample_covariance(&snapshots, scene.is_real)?;
    Ok(SnapshotSet {
        snapshots,
        sample_cov,
        scene: scene.clone(),
    })
}

/// Generates one snapshot set per scene; each scene uses its own seed.
pub fn generate_batch(exec: Execution, scenes: &[Scene], count: usize) -> Result<Vec<SnapshotSet>> {
    exec.try_map(scenes, |s| generate(s, count))
}

/// Uniform line array response `exp(j 2 pi d k sin(angle))`, `k = 0..N-1`.
/// The label is the angle in degrees.
pub fn ula_steering(sensors: usize, spacing_wavelengths: f64, angle_rad: f64) -> SteeringVector {
    let phase = 2.0 * std::f64::consts::PI * spacing_wavelengths * angle_rad.sin();
    let w0 = (0..sensors)
        .map(|k| C64::from_polar(1.0, phase * k as f64))
        .collect();
    SteeringVector::new(w0, format!("{}", angle_rad.to_degrees()))
}
