//! Effectively presented spaces and maps between them.

pub mod basic;
pub mod file;
pub mod map;
pub mod space;

pub use basic::{Basic, Interval, Open, Point};
pub use file::PresentationFile;
pub use map::{FiniteMap, Identity, OpenMap, Projection};
pub use space::{bits, full_mask, BasisClass, Catalog, Kind, Space, Universe};
