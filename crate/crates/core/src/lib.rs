//! Symplectic pairings on character varieties of cone 2-orbifold groups in SL(3,R).

pub mod cocycle;
pub mod corpus;
pub mod flows;
pub mod formats;
pub mod linalg;
pub mod orbifold;
pub mod precise;
pub mod rep;
pub mod symplectic;
pub mod verify;
pub mod words;
