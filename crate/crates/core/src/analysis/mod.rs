pub mod convergence;
pub mod diagnostics;
pub mod exact;
pub mod norms;
