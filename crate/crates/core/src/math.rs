//! Transcendental functions for `no_std` builds.

#[inline]
pub(crate) fn cis(theta: f64) -> crate::vector::C64 {
    let (s, c) = libm::sincos(theta);
    crate::vector::C64::new(c, s)
}

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub(crate) fn hypot(x: f64, y: f64) -> f64 {
    libm::hypot(x, y)
}

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}
