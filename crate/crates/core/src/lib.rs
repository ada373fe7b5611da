pub mod error;
pub mod lattice;
pub mod program;
pub mod routing;
pub mod kinkmod;
pub mod stabilizer;
pub mod semantics;
pub mod manybody;
pub mod schedulers;
pub mod frontend;
pub mod bench;

pub use error::{Error, Result};
pub use lattice::{build_plane, BoundaryType, CellCoord, CellKind, Dir, HeightMap, QubitPlane, VoxelCoord};
pub use program::{Basis, DependencyGraph, Instruction, InstructionList, QubitId};
pub use routing::{Path2D, Path3D, RouteSpec};
pub use schedulers::{Algorithm, ProjectionOptions, Schedule};
