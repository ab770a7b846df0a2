//! Generic floating-point scalar used by the numerical kernels.
//!
//! All core math (linear algebra, networks, simulators) is written against
//! [`Real`] so the same kernels run in `f32` or `f64`. The pipeline and every
//! on-disk format are pinned to `f64` through the aliases at the crate root.

use std::fmt::{Debug, Display};
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive, ToPrimitive};

pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Conversion from a literal; every constant in this crate is expressible
    /// exactly or near-exactly in f32 and f64.
    #[inline]
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("constant not representable in scalar type")
    }

    #[inline]
    fn f64(self) -> f64 {
        self.to_f64().expect("scalar not representable as f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}
