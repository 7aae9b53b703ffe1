//! Float math routed through `libm` so results are bit-identical with and
//! without `std`.

pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}
