// f64 intrinsics are not available without std; route through libm.
pub(crate) use libm::{asin, atan2, cos, exp, fabs as abs, floor, log as ln, log2, sin, sqrt};
