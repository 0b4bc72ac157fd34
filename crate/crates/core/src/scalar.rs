//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive};

/// Real floating point type the library is generic over: `f32` or `f64`.
///
/// Accuracy targets quoted in the documentation refer to `f64`; `f32`
/// instantiations run the same algorithms at single precision.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Converts a count into `Self`.
    #[inline]
    fn count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex number over the crate scalar.
pub type Cplx<T> = Complex<T>;

#[inline]
pub(crate) fn c<T: Real>(re: T, im: T) -> Cplx<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn re<T: Real>(x: T) -> Cplx<T> {
    Complex::new(x, T::zero())
}

#[inline]
pub(crate) fn is_finite<T: Real>(z: Cplx<T>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// `|a - b| / |b|`, falling back to the absolute difference when `b` is zero.
pub fn relative_error<T: Real>(approx: Cplx<T>, exact: Cplx<T>) -> T {
    let scale = exact.norm();
    let diff = (approx - exact).norm();
    if scale > T::zero() {
        diff / scale
    } else {
        diff
    }
}
