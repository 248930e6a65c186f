//! Covering machinery: dyadic and Calderón–Zygmund selections, Vitali,
//! growing ink-spots, stacking of cylinders and the sun-rising lemma.

mod dyadic;
mod ink;
mod stacking;
mod sun;
mod vitali;

pub use dyadic::{
    classify, cz_selection, dyadic_decomposition, outside_witness, CzSelection, Decomposition,
    DyadicCube, Relation,
};
pub use ink::{ink_spots_check, InkSpots, MidpointBall, RHO0, RHO1};
pub use stacking::{stacking, Cylinder, Rational, StackingReport};
pub use sun::{sun_rising, SunRising};
pub use vitali::{vitali_select, Ball, VitaliSelection};
