//! Seeded synthetic samples.
//!
//! Each output column draws from its own stream `(seed, column)`, so a
//! family's columns are reproducible independently of each other.

use std::fmt;
use std::str::FromStr;

use crate::special_fn::RngStream;
use crate::{Error, Result, SampleMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// `d` independent standard normal columns.
    IidNormal { d: usize },
    /// Columns `(X, W·X)`, `X` standard normal, `W = ±1` equiprobable.
    RademacherProduct,
    /// Columns `(Z1, ρ·Z1 + √(1−ρ²)·Z2)`.
    GaussianPair { rho: f64 },
    /// One column of i.i.d. Student-t variates with `nu` degrees of freedom.
    StudentT { nu: f64 },
    /// One column `x_t = φ·x_{t−1} + ε_t`, started from the stationary law.
    Ar1 { phi: f64 },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::IidNormal { .. } => "iid-normal",
            Family::RademacherProduct => "rademacher-product",
            Family::GaussianPair { .. } => "gaussian-pair",
            Family::StudentT { .. } => "student-t",
            Family::Ar1 { .. } => "ar1",
        }
    }

    /// Parses a family name with an optional parameter (`rho`, `nu`, `phi`
    /// or the dimension for `iid-normal`). Defaults: d = 2, ρ = 0.5,
    /// ν = 2, φ = 0.5.
    pub fn parse(name: &str, param: Option<f64>) -> Result<Family> {
        let fam = match name {
            "iid-normal" => {
                let d = param.unwrap_or(2.0);
                if d.fract() != 0.0 || d < 1.0 {
                    return Err(Error::domain(
                        "synth::generate",
                        format!("iid-normal dimension must be a positive integer, got {d}"),
                    ));
                }
                Family::IidNormal { d: d as usize }
            }
            "rademacher-product" => Family::RademacherProduct,
            "gaussian-pair" => Family::GaussianPair {
                rho: param.unwrap_or(0.5),
            },
            "student-t" => Family::StudentT {
                nu: param.unwrap_or(2.0),
            },
            "ar1" => Family::Ar1 {
                phi: param.unwrap_or(0.5),
            },
            other => {
                return Err(Error::domain(
                    "synth::generate",
                    format!(
                        "unknown family {other:?} (iid-normal, rademacher-product, gaussian-pair, student-t, ar1)"
                    ),
                ))
            }
        };
        Ok(fam)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Family::parse(s, None)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorSpec {
    pub family: Family,
    pub n: usize,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(family: Family, n: usize, seed: u64) -> Self {
        GeneratorSpec { family, n, seed }
    }

    fn validate(&self) -> Result<()> {
        const OP: &str = "synth::generate";
        if self.n == 0 {
            return Err(Error::domain(OP, "n must be at least 1"));
        }
        match self.family {
            Family::IidNormal { d: 0 } => Err(Error::domain(OP, "d must be at least 1")),
            Family::GaussianPair { rho } if !(rho.abs() < 1.0) => {
                Err(Error::domain(OP, format!("need |rho| < 1, got {rho}")))
            }
            Family::StudentT { nu } if !(nu > 0.0 && nu.is_finite()) => {
                Err(Error::domain(OP, format!("need nu > 0, got {nu}")))
            }
            Family::Ar1 { phi } if !(phi.abs() < 1.0) => {
                Err(Error::domain(OP, format!("need |phi| < 1, got {phi}")))
            }
            _ => Ok(()),
        }
    }
}

fn normals(seed: u64, stream: u64, n: usize) -> Vec<f64> {
    let mut s = RngStream::new(seed, stream);
    (0..n).map(|_| s.normal()).collect()
}

/// Gamma(shape, 1) by Marsaglia–Tsang, with the `U^{1/a}` boost for
/// shapes below one.
fn gamma(s: &mut RngStream, shape: f64) -> f64 {
    if shape < 1.0 {
        let u = s.uniform();
        return gamma(s, shape + 1.0) * u.powf(1.0 / shape);
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let z = s.normal();
        let v = 1.0 + c * z;
        if v <= 0.0 {
            continue;
        }
        let v = v * v * v;
        let u = s.uniform();
        if u.ln() < 0.5 * z * z + d - d * v + d * v.ln() {
            return d * v;
        }
    }
}

pub fn generate(spec: &GeneratorSpec) -> Result<SampleMatrix> {
    spec.validate()?;
    let GeneratorSpec { family, n, seed } = *spec;
    let named = |names: &[&str], cols: Vec<Vec<f64>>| {
        SampleMatrix::new(names.iter().map(|s| s.to_string()).collect(), cols)
    };
    match family {
        Family::IidNormal { d } => {
            SampleMatrix::from_columns((0..d as u64).map(|j| normals(seed, j, n)).collect())
        }
        Family::RademacherProduct => {
            let x = normals(seed, 0, n);
            let mut signs = RngStream::new(seed, 1);
            let y = x
                .iter()
                .map(|&v| if signs.next_u64() >> 63 == 0 { v } else { -v })
                .collect();
            named(&["x", "y"], vec![x, y])
        }
        Family::GaussianPair { rho } => {
            let z1 = normals(seed, 0, n);
            let z2 = normals(seed, 1, n);
            let t = (1.0 - rho * rho).sqrt();
            let y = z1.iter().zip(&z2).map(|(a, b)| rho * a + t * b).collect();
            named(&["x", "y"], vec![z1, y])
        }
        Family::StudentT { nu } => {
            let z = normals(seed, 0, n);
            let mut chi = RngStream::new(seed, 1);
            let x = z
                .iter()
                .map(|&v| v / (2.0 * gamma(&mut chi, 0.5 * nu) / nu).sqrt())
                .collect();
            named(&["x"], vec![x])
        }
        Family::Ar1 { phi } => {
            let eps = normals(seed, 0, n);
            let mut x = Vec::with_capacity(n);
            let mut prev = eps[0] / (1.0 - phi * phi).sqrt();
            x.push(prev);
            for e in &eps[1..] {
                prev = phi * prev + e;
                x.push(prev);
            }
            named(&["x"], vec![x])
        }
    }
}
