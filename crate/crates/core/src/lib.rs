pub mod asymptotics;
pub mod chebyshev;
pub mod equilibrium;
pub mod error;
pub mod gmc;
pub mod hankel;
pub mod quadrature;
pub mod rhp;
pub mod rmt;
pub mod specialfn;
