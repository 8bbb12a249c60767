//! Polyline kernel.

pub mod bing;
pub mod diameter;
pub mod frame;
pub mod interlaced;
pub mod linking;
pub mod meridian;
pub mod polyline;
pub mod tube;

pub use bing::{bing_children, BingDouble, ChildSchedule, DiskSystem, DiskWindow};
pub use diameter::diameter;
pub use frame::{Frame, FrameField};
pub use interlaced::{interlaced_tube, InterlacedTube};
pub use linking::{linking_number, Linking};
pub use meridian::{meridian_intersections, Disk, DiskCount};
pub use polyline::{make_round_core, Point, Polyline};
pub use tube::{tube_of, Tube};
