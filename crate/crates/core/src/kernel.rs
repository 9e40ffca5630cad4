//! Riesz kernel constants and pointwise kernel evaluation in one and three dimensions.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::special::gamma;
use crate::Point3;

/// Spatial dimension of a Riesz kernel.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dimension {
    One,
    Three,
}

impl Dimension {
    pub fn value(self) -> usize {
        match self {
            Dimension::One => 1,
            Dimension::Three => 3,
        }
    }

    pub fn from_value(d: usize) -> Result<Self> {
        match d {
            1 => Ok(Dimension::One),
            3 => Ok(Dimension::Three),
            _ => Err(Error::InvalidArgument(format!(
                "dimension must be 1 or 3, got {d}"
            ))),
        }
    }

    fn interval(self) -> &'static str {
        match self {
            Dimension::One => "(0, 1)",
            Dimension::Three => "(1, 2]",
        }
    }

    fn admits(self, alpha: f64) -> bool {
        match self {
            Dimension::One => alpha > 0.0 && alpha < 1.0,
            Dimension::Three => alpha > 1.0 && alpha <= 2.0,
        }
    }
}

/// Order alpha of the fractional Laplacian, validated against its dimension.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FractionalOrder {
    alpha: f64,
    dimension: Dimension,
}

impl FractionalOrder {
    pub fn new(dimension: Dimension, alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || !dimension.admits(alpha) {
            return Err(Error::Domain {
                alpha,
                dimension: dimension.value(),
                interval: dimension.interval(),
            });
        }
        Ok(Self { alpha, dimension })
    }

    /// Shorthand for the three-dimensional order, 1 < alpha <= 2.
    pub fn three_d(alpha: f64) -> Result<Self> {
        Self::new(Dimension::Three, alpha)
    }

    /// Shorthand for the one-dimensional order, 0 < alpha < 1.
    pub fn one_d(alpha: f64) -> Result<Self> {
        Self::new(Dimension::One, alpha)
    }

    pub fn value(self) -> f64 {
        self.alpha
    }

    pub fn dimension(self) -> Dimension {
        self.dimension
    }

    /// Exponent of the kernel profile, alpha - d (negative).
    pub fn kernel_exponent(self) -> f64 {
        self.alpha - self.dimension.value() as f64
    }
}

/// Normalising constant of the Riesz kernel `c |x|^(alpha - d)` whose Fourier
/// transform is `|xi|^(-alpha)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RieszConstant {
    pub dimension: Dimension,
    pub alpha: FractionalOrder,
    pub value: f64,
}

pub fn riesz_constant(dimension: Dimension, alpha: FractionalOrder) -> Result<RieszConstant> {
    let a = alpha.value();
    // Re-validate: an order built for one dimension must not leak into the other.
    let alpha = FractionalOrder::new(dimension, a)?;
    let value = match dimension {
        Dimension::Three if a == 2.0 => 1.0 / (4.0 * PI),
        Dimension::Three => {
            gamma(0.5 * (3.0 - a)) / (2f64.powf(a) * PI.powf(1.5) * gamma(0.5 * a))
        }
        Dimension::One => gamma(0.5 * (1.0 - a)) / (2f64.powf(a) * PI.sqrt() * gamma(0.5 * a)),
    };
    Ok(RieszConstant {
        dimension,
        alpha,
        value,
    })
}

/// Evaluates `c_{d,alpha} |x - y|^(alpha - d)`. Points are given as slices of
/// length `d`.
pub fn kernel_eval(dimension: Dimension, alpha: FractionalOrder, x: &[f64], y: &[f64]) -> Result<f64> {
    let d = dimension.value();
    if x.len() != d || y.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: x.len().min(y.len()),
        });
    }
    let c = riesz_constant(dimension, alpha)?;
    let r = x
        .iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    if r == 0.0 {
        return Err(Error::Singular);
    }
    Ok(c.value * r.powf(alpha.kernel_exponent()))
}

/// Three-dimensional Riesz kernel with its constant resolved once, for the
/// inner loops of assembly and potential evaluation.
#[derive(Clone, Copy, Debug)]
pub struct RieszKernel3 {
    alpha: FractionalOrder,
    constant: f64,
    profile: Profile,
}

#[derive(Clone, Copy, Debug)]
enum Profile {
    Newton,
    ThreeHalves,
    General(f64),
}

impl RieszKernel3 {
    pub fn new(alpha: FractionalOrder) -> Result<Self> {
        let c = riesz_constant(Dimension::Three, alpha)?;
        let a = alpha.value();
        let profile = if a == 2.0 {
            Profile::Newton
        } else if a == 1.5 {
            Profile::ThreeHalves
        } else {
            Profile::General(0.5 * (a - 3.0))
        };
        Ok(Self {
            alpha: c.alpha,
            constant: c.value,
            profile,
        })
    }

    pub fn alpha(&self) -> FractionalOrder {
        self.alpha
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    /// `|r|^(alpha - 3)` from the squared distance, without the constant.
    #[inline]
    pub fn profile_sq(&self, r2: f64) -> f64 {
        match self.profile {
            Profile::Newton => 1.0 / r2.sqrt(),
            Profile::ThreeHalves => {
                let r = r2.sqrt();
                1.0 / (r * r.sqrt())
            }
            Profile::General(half_exp) => r2.powf(half_exp),
        }
    }

    #[inline]
    pub fn profile(&self, x: &Point3, y: &Point3) -> f64 {
        self.profile_sq((x - y).norm_squared())
    }

    /// Full kernel value `c |x - y|^(alpha - 3)`.
    pub fn eval(&self, x: &Point3, y: &Point3) -> Result<f64> {
        let r2 = (x - y).norm_squared();
        if r2 == 0.0 {
            return Err(Error::Singular);
        }
        Ok(self.constant * self.profile_sq(r2))
    }
}
