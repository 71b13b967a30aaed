pub mod brute;
pub mod driver;
pub mod estimate;
pub mod experiments;
pub mod fit;
pub mod mobius;
