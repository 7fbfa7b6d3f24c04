//! Demo applications.
//!
//! [`euler`] couples tightly: it builds backend matrices and solvers itself.
//! [`heat`] couples loosely: it only sees the facade interfaces.
//! [`batched_ode`] exercises the batched solvers.

pub mod batched_ode;
pub mod euler;
pub mod heat;
