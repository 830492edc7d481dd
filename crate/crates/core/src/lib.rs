pub mod fem;
pub mod io;
pub mod materials;
pub mod mesh;
pub mod physics;
pub mod simulation;
pub mod sparse;
pub mod verify;
