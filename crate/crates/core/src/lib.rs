//! Electrostatic global placement with an accelerated field solver.
//!
//! Cells are charges, the density penalty gradient is the electric field, and
//! the field is computed either exactly on the fine bin grid or with a
//! two-level scheme: a coarse-grid FFT for long-range interactions plus
//! precorrected windowed FFTs for short-range ones.

pub mod accfft;
pub mod bench;
pub mod bookshelf;
pub mod config;
pub mod density;
pub mod error;
pub mod fft;
pub mod field;
pub mod netlist;
pub mod optimizer;
pub mod placer;
pub mod plot;
pub mod solver;
pub mod synth;
pub mod wirelength;

pub use error::{Error, Result};
pub use netlist::{Cell, CellKind, Net, Netlist, Pin, Point, Region};
