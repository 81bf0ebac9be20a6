//! Factorization of rational `g` by splitting zeros and poles between the
//! half-planes, rational approximation of non-rational `g`, and the
//! closed-form product factors of the sech-exponential family.

mod function;
mod kuznetsov;
mod model;
mod pade;
mod roots;

pub use function::{carlemann_split, HalfPlaneSplit, RationalFunction, Root, REAL_AXIS_CLEARANCE};
pub use kuznetsov::{factorize_kuznetsov, kuznetsov_eta, kuznetsov_product, DEFAULT_TERMS};
pub use model::{factorize_carlemann, rational_g};
pub use pade::{
    pade_factorize, pade_factorize_auto, rational_approximant, PadeOrder, AUTO_DEGREES, DOUBLET_TOLERANCE,
};
pub use roots::{argument_count, find_halfplane_roots, strip_roots, HalfPlane, SearchBox};
