//! Active cyber defense dynamics: a mean-field model of defenseware and
//! malware spreading over a pair of graphs, with the analysis toolkit used to
//! study it (homogeneous equilibria and their stability, attractor
//! transitions, first-order eigenvalue perturbation, Hopf search,
//! bifurcation sweeps and Lyapunov exponents).

pub mod chaos;
pub mod dynamics;
pub mod equilibrium;
pub mod graph;
pub mod linalg;
pub mod power;
pub mod spectral;
pub mod threshold;
