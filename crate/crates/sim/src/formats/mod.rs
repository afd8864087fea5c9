pub mod episodes;
pub mod figures;
pub mod image;
pub mod pgm;
pub mod snapshot;
