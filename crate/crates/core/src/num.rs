//! Scalar abstraction shared by every numerical module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point scalar the geometry, assembly and eigensolver code is generic over.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + NumAssign + Sum + Default + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Planar point / vector.
pub type Point<T> = [T; 2];

#[inline]
pub(crate) fn add<T: Real>(a: Point<T>, b: Point<T>) -> Point<T> {
    [a[0] + b[0], a[1] + b[1]]
}

#[inline]
pub(crate) fn sub<T: Real>(a: Point<T>, b: Point<T>) -> Point<T> {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub(crate) fn scale<T: Real>(s: T, a: Point<T>) -> Point<T> {
    [s * a[0], s * a[1]]
}

#[inline]
pub(crate) fn dot<T: Real>(a: Point<T>, b: Point<T>) -> T {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub(crate) fn cross<T: Real>(a: Point<T>, b: Point<T>) -> T {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub(crate) fn norm<T: Real>(a: Point<T>) -> T {
    dot(a, a).sqrt()
}

/// Counter-clockwise rotation by a right angle.
#[inline]
pub(crate) fn perp<T: Real>(a: Point<T>) -> Point<T> {
    [-a[1], a[0]]
}

#[inline]
pub(crate) fn midpoint<T: Real>(a: Point<T>, b: Point<T>) -> Point<T> {
    let half = T::lit(0.5);
    [half * (a[0] + b[0]), half * (a[1] + b[1])]
}

/// Signed area of a polygon (positive for counter-clockwise order).
pub fn shoelace_area<T: Real>(poly: &[Point<T>]) -> T {
    let n = poly.len();
    let mut acc = T::zero();
    for i in 0..n {
        acc += cross(poly[i], poly[(i + 1) % n]);
    }
    acc * T::lit(0.5)
}
