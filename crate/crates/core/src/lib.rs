pub mod algebra;
pub mod gamma;
pub mod iso;
pub mod lattice;
pub mod matrix;
pub mod numberfield;
pub mod random;
pub mod sigfile;
pub mod structure;
pub mod syntax;
