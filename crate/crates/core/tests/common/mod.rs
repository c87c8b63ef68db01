pub mod polyline;
pub mod special;
