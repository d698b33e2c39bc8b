use std::fmt::{Debug, Display, LowerExp};

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point scalar the numerical core is generic over (`f32` or `f64`).
pub trait Real:
    RealField
    + Copy
    + FromPrimitive
    + ToPrimitive
    + Serialize
    + DeserializeOwned
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` constant. Lossy for `f32`.
    #[inline]
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("finite constant representable in scalar type")
    }

    #[inline]
    fn of_usize(v: usize) -> Self {
        Self::from_usize(v).expect("count representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Relative singular-value cutoff below which a design counts as rank deficient.
    ///
    /// `1e-10` in double precision, raised to a small multiple of machine epsilon
    /// for types where `1e-10` is below resolution.
    fn rank_tolerance() -> Self {
        let floor = Self::of(1e-10);
        let eps = Self::default_epsilon() * Self::of(16.0);
        if eps > floor {
            eps
        } else {
            floor
        }
    }

    fn is_finite_value(self) -> bool {
        self.as_f64().is_finite()
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub(crate) fn mean<T: Real>(values: &[T]) -> T {
    let sum = values.iter().fold(T::zero(), |acc, &v| acc + v);
    sum / T::of_usize(values.len())
}

/// Mean and sample standard deviation (n - 1 denominator).
pub(crate) fn mean_std<T: Real>(values: &[T]) -> (T, T) {
    let mu = mean(values);
    if values.len() < 2 {
        return (mu, T::zero());
    }
    let ss = values
        .iter()
        .fold(T::zero(), |acc, &v| acc + (v - mu) * (v - mu));
    (mu, (ss / T::of_usize(values.len() - 1)).sqrt())
}

/// Pearson correlation coefficient. Returns zero when either input is constant.
pub(crate) fn pearson<T: Real>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let ma = mean(a);
    let mb = mean(b);
    let mut sab = T::zero();
    let mut saa = T::zero();
    let mut sbb = T::zero();
    for (&x, &y) in a.iter().zip(b) {
        let dx = x - ma;
        let dy = y - mb;
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa <= T::zero() || sbb <= T::zero() {
        return T::zero();
    }
    let r = sab / (saa.sqrt() * sbb.sqrt());
    r.clamp(-T::one(), T::one())
}
