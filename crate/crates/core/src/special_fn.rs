//! Standard normal special functions, Gauss–Legendre rules and seeded
//! counter-based random streams.
//!
//! Everything here is pure. [`RngStream`] is a value type: clone it per
//! worker and give each worker its own `stream_id`.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::{Error, Result};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Below this magnitude the Taylor series around zero is used, above it the
/// continued fraction for the Mills ratio.
const SERIES_CUTOFF: f64 = 3.0;

pub fn norm_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal CDF, accurate to a few ulps in the body and with full
/// relative accuracy in the lower tail.
pub fn norm_cdf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x.abs() < SERIES_CUTOFF {
        // Φ(x) = 1/2 + φ(x) Σ x^(2k+1) / (2k+1)!!
        let x2 = x * x;
        let mut term = x;
        let mut sum = x;
        let mut k = 1.0;
        loop {
            term *= x2 / (2.0 * k + 1.0);
            let next = sum + term;
            if next == sum {
                break;
            }
            sum = next;
            k += 1.0;
        }
        0.5 + norm_pdf(x) * sum
    } else {
        let tail = upper_tail(x.abs());
        if x < 0.0 {
            tail
        } else {
            1.0 - tail
        }
    }
}

/// Q(z) = 1 − Φ(z) for z ≥ 3 via the Laplace continued fraction
/// z + 1/(z + 2/(z + 3/(z + ...))), evaluated with modified Lentz.
fn upper_tail(z: f64) -> f64 {
    if z.is_infinite() {
        return 0.0;
    }
    const TINY: f64 = 1e-300;
    let mut f = z;
    let mut c = z;
    let mut d = 0.0;
    for n in 1..500 {
        let a = n as f64;
        d = z + a * d;
        if d == 0.0 {
            d = TINY;
        }
        d = 1.0 / d;
        c = z + a / c;
        if c == 0.0 {
            c = TINY;
        }
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    norm_pdf(z) / f
}

/// Inverse of [`norm_cdf`].
///
/// Acklam's rational approximation (relative error about 1e-9) followed by
/// one Newton step. Upper-half probabilities are reflected so the Newton
/// residual is always taken in the lower tail, where `norm_cdf` keeps full
/// relative precision.
pub fn norm_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(
            "special_fn::norm_quantile",
            format!("probability must lie in (0, 1), got {p}"),
        ));
    }
    Ok(quantile_unchecked(p))
}

pub(crate) fn quantile_unchecked(p: f64) -> f64 {
    if p > 0.5 {
        return -lower_quantile(1.0 - p);
    }
    lower_quantile(p)
}

fn lower_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.02425;

    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };

    // one Halley step
    let density = norm_pdf(x);
    if density > 0.0 {
        let u = (norm_cdf(x) - p) / density;
        x - u / (1.0 + 0.5 * x * u)
    } else {
        x
    }
}

/// Nodes and weights of an n-point Gauss–Legendre rule on [−1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights affinely mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

pub const MAX_QUADRATURE_ORDER: usize = 256;

/// Builds the `order`-point Gauss–Legendre rule by Newton iteration on the
/// Legendre three-term recurrence. Valid for `2 ≤ order ≤ 256`.
pub fn gauss_legendre(order: usize) -> Result<QuadratureRule> {
    if !(2..=MAX_QUADRATURE_ORDER).contains(&order) {
        return Err(Error::domain(
            "special_fn::gauss_legendre",
            format!("order must lie in 2..={MAX_QUADRATURE_ORDER}, got {order}"),
        ));
    }
    let n = order;
    let half = n.div_ceil(2);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..half {
        // i-th largest root
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, deriv) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * deriv * deriv);
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok(QuadratureRule { nodes, weights })
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Deterministic random stream keyed by `(seed, stream_id)`.
///
/// Backed by ChaCha8 with the stream id in the nonce, so the block counter
/// is the only state and every `(seed, stream_id)` pair reproduces the same
/// sequence on every platform.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RngStream {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// A fresh stream under the same seed whose id is a hash of this
    /// stream's id and `index`.
    pub fn substream(&self, index: u64) -> RngStream {
        RngStream::new(self.seed, derive_stream_id(&[self.stream_id, index]))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform variate on the open interval (0, 1) with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal variate by inverse-CDF transform.
    pub fn normal(&mut self) -> f64 {
        quantile_unchecked(self.uniform())
    }

    pub fn fill_normal(&mut self, out: &mut [f64]) {
        for v in out {
            *v = self.normal();
        }
    }
}

/// Mixes a sequence of words into a single stream id (SplitMix64 finalizer
/// folded over the inputs).
pub fn derive_stream_id(parts: &[u64]) -> u64 {
    parts.iter().fold(0x9E37_79B9_7F4A_7C15u64, |acc, &p| {
        let mut z = acc ^ p.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    })
}

/// `count` standard normal draws from a copy of `stream`; the caller's
/// stream is left untouched, so equal streams always give equal samples.
pub fn standard_normal_sample(stream: &RngStream, count: usize) -> Vec<f64> {
    let mut s = stream.clone();
    let mut out = vec![0.0; count];
    s.fill_normal(&mut out);
    out
}
