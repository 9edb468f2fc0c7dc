pub mod check;
pub mod evolve;
pub mod landscape;
pub mod quantumness;
