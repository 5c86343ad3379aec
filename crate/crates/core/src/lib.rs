pub mod linalg;
pub mod planar;
pub mod tube;
pub mod monodromy;
pub mod hull;
