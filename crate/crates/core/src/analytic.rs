//! Reference values that need no data.
//!
//! * The closed-form conditional covariance of `(X, W·X)`, with `X`
//!   standard normal and `W` an independent random sign.
//! * Tensor Gauss–Legendre evaluation of the conditional covariance from a
//!   copula density and marginal quantile functions.
//! * The copula determinant `V_c(u1,v1,u2,v2) = c(u1,v1)c(u2,v2) − c(u1,v2)c(u2,v1)`,
//!   which vanishes identically exactly for the product copula.
//!
//! The `(X, W·X)` law lives on the two lines `y = ±x` and has no planar
//! density, so it is only ever evaluated through its closed form.

use crate::quantile::QuantileSplit;
use crate::special_fn::{gauss_legendre, norm_cdf, norm_pdf, quantile_unchecked};
use crate::{Error, Result};

/// Default Gauss–Legendre order per axis.
pub const DEFAULT_QUADRATURE_ORDER: usize = 64;

/// Marginal law of one coordinate, through its quantile function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Margin {
    StandardNormal,
    Uniform,
}

impl Margin {
    pub fn quantile(&self, u: f64) -> f64 {
        match self {
            Margin::StandardNormal => quantile_unchecked(u),
            Margin::Uniform => u,
        }
    }
}

/// A copula density on `(0,1)²` together with the marginal quantile maps.
pub trait CopulaDensity: Sync {
    fn density(&self, u: f64, v: f64) -> f64;
    fn margin_x(&self) -> Margin;
    fn margin_y(&self) -> Margin;
}

/// `c ≡ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductCopula {
    pub margin_x: Margin,
    pub margin_y: Margin,
}

impl ProductCopula {
    pub fn normal_margins() -> Self {
        ProductCopula {
            margin_x: Margin::StandardNormal,
            margin_y: Margin::StandardNormal,
        }
    }
}

impl CopulaDensity for ProductCopula {
    fn density(&self, _u: f64, _v: f64) -> f64 {
        1.0
    }
    fn margin_x(&self) -> Margin {
        self.margin_x
    }
    fn margin_y(&self) -> Margin {
        self.margin_y
    }
}

/// Gaussian copula with correlation `rho`:
/// `c(u,v) = (1−ρ²)^{−1/2} exp(−(ρ²(a²+b²) − 2ρab) / (2(1−ρ²)))`,
/// `a = Φ⁻¹(u)`, `b = Φ⁻¹(v)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianCopula {
    rho: f64,
    pub margin_x: Margin,
    pub margin_y: Margin,
}

impl GaussianCopula {
    /// Standard normal margins.
    pub fn new(rho: f64) -> Result<Self> {
        if !(rho.abs() < 1.0) {
            return Err(Error::domain(
                "analytic::GaussianCopula",
                format!("need |rho| < 1, got {rho}"),
            ));
        }
        Ok(GaussianCopula {
            rho,
            margin_x: Margin::StandardNormal,
            margin_y: Margin::StandardNormal,
        })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Density in normal scores `a = Φ⁻¹(u)`, `b = Φ⁻¹(v)`.
    pub fn density_scores(&self, a: f64, b: f64) -> f64 {
        let r = self.rho;
        let s = 1.0 - r * r;
        (-(r * r * (a * a + b * b) - 2.0 * r * a * b) / (2.0 * s)).exp() / s.sqrt()
    }
}

impl CopulaDensity for GaussianCopula {
    fn density(&self, u: f64, v: f64) -> f64 {
        self.density_scores(quantile_unchecked(u), quantile_unchecked(v))
    }
    fn margin_x(&self) -> Margin {
        self.margin_x
    }
    fn margin_y(&self) -> Margin {
        self.margin_y
    }
}

/// Endpoints of the two overlap intervals in the `(X, W·X)` closed form.
///
/// `[l, r]` is the overlap of the `X` and `Y` quantile ranges on the branch
/// `W = 1`, `[l̂, r̂]` the analogous overlap on `W = −1`. An empty overlap
/// collapses both of its endpoints to 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoints {
    pub l: f64,
    pub r: f64,
    pub l_hat: f64,
    pub r_hat: f64,
}

fn require_interior(op: &'static str, split: QuantileSplit) -> Result<()> {
    if !split.is_interior() {
        return Err(Error::domain(
            op,
            format!(
                "split ({}, {}) must lie strictly inside (0, 1)",
                split.lower(),
                split.upper()
            ),
        ));
    }
    Ok(())
}

fn indicator(c: bool) -> f64 {
    if c {
        1.0
    } else {
        0.0
    }
}

pub fn normal_product_boundaries(
    split_x: QuantileSplit,
    split_y: QuantileSplit,
) -> Result<BoundaryPoints> {
    const OP: &str = "analytic::normal_product_boundaries";
    require_interior(OP, split_x)?;
    require_interior(OP, split_y)?;
    let (p1, q1) = (split_x.lower(), split_x.upper());
    let (p2, q2) = (split_y.lower(), split_y.upper());
    let inv = quantile_unchecked;

    let same = indicator(q1 > p2) * indicator(q2 > p1);
    let flip = indicator(q1 > 1.0 - q2) * indicator(1.0 - p2 > p1);
    Ok(BoundaryPoints {
        l: inv(p1).max(inv(p2)) * same,
        r: inv(q1).min(inv(q2)) * same,
        l_hat: inv(p1).max(inv(1.0 - q2)) * flip,
        r_hat: inv(q1).min(inv(1.0 - p2)) * flip,
    })
}

/// Closed-form conditional covariance of `(X, W·X)` on the quantile set of
/// `split_x × split_y`.
pub fn normal_product_cov(split_x: QuantileSplit, split_y: QuantileSplit) -> Result<f64> {
    let BoundaryPoints { l, r, l_hat, r_hat } = normal_product_boundaries(split_x, split_y)?;
    let (cdf, pdf) = (norm_cdf, norm_pdf);
    let denom = cdf(r) - cdf(l) + cdf(r_hat) - cdf(l_hat);
    if !(denom > 0.0) {
        return Err(Error::EmptyCondition {
            op: "analytic::normal_product_cov",
        });
    }
    // E[X²|A] on each branch, then the squared conditional means
    let same = l * pdf(l) - r * pdf(r) + cdf(r) - cdf(l);
    let flip = l_hat * pdf(l_hat) - r_hat * pdf(r_hat) + cdf(r_hat) - cdf(l_hat);
    let means = (pdf(l) - pdf(r)).powi(2) - (pdf(l_hat) - pdf(r_hat)).powi(2);
    Ok(same / denom - flip / denom - means / (denom * denom))
}

/// Conditional covariance and set probability from a copula density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureCov {
    pub cov: f64,
    pub p_a: f64,
}

/// Tensor Gauss–Legendre evaluation over `[p1,q1] × [p2,q2]` of
/// `P[A] = ∫∫ c`, `E[XY|A] = ∫∫ Q_X Q_Y c / P[A]` and the two conditional
/// means. Rows are summed in node order, so the result is deterministic.
pub fn quadrature_cov<C: CopulaDensity + ?Sized>(
    copula: &C,
    split_x: QuantileSplit,
    split_y: QuantileSplit,
    order: usize,
) -> Result<QuadratureCov> {
    const OP: &str = "analytic::quadrature_cov";
    require_interior(OP, split_x)?;
    require_interior(OP, split_y)?;
    if order < 8 {
        return Err(Error::domain(
            OP,
            format!("order must be at least 8, got {order}"),
        ));
    }
    let rule = gauss_legendre(order)?;
    let us: Vec<(f64, f64)> = rule.mapped(split_x.lower(), split_x.upper()).collect();
    let vs: Vec<(f64, f64)> = rule.mapped(split_y.lower(), split_y.upper()).collect();
    let qx: Vec<f64> = us
        .iter()
        .map(|&(u, _)| copula.margin_x().quantile(u))
        .collect();
    let qy: Vec<f64> = vs
        .iter()
        .map(|&(v, _)| copula.margin_y().quantile(v))
        .collect();

    let (mut mass, mut sx, mut sy, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for (i, &(u, wu)) in us.iter().enumerate() {
        let (mut rm, mut ry, mut rxy) = (0.0, 0.0, 0.0);
        for (j, &(v, wv)) in vs.iter().enumerate() {
            let w = wv * copula.density(u, v);
            rm += w;
            ry += w * qy[j];
            rxy += w * qx[i] * qy[j];
        }
        mass += wu * rm;
        sx += wu * qx[i] * rm;
        sy += wu * ry;
        sxy += wu * rxy;
    }
    if !(mass > 1e-12) {
        return Err(Error::EmptyCondition { op: OP });
    }
    let (ex, ey, exy) = (sx / mass, sy / mass, sxy / mass);
    Ok(QuadratureCov {
        cov: exy - ex * ey,
        p_a: mass,
    })
}

/// `c(u1,v1)·c(u2,v2) − c(u1,v2)·c(u2,v1)`.
pub fn v_c<C: CopulaDensity + ?Sized>(copula: &C, u1: f64, v1: f64, u2: f64, v2: f64) -> f64 {
    copula.density(u1, v1) * copula.density(u2, v2)
        - copula.density(u1, v2) * copula.density(u2, v1)
}
