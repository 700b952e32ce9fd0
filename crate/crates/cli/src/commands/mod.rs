pub mod analyze;
pub mod field;
pub mod portrait;
pub mod verify;
