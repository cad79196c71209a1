pub mod angles;
pub mod asymptotics;
pub mod exactprob;
pub mod linprog;
pub mod montecarlo;
mod minimize;
pub mod quadrature;
pub mod specialfn;
