//! Columnar event-log dataframes for process mining.
//!
//! The crate provides an indexed, typed columnar [`Dataframe`], a small
//! transformation algebra over it ([`transforms`]), a bridge from classical
//! event logs ([`eventlog`]), directly-follows graph discovery by three
//! interchangeable strategies ([`dfg`]), the EDF1 columnar file format with
//! selective column loading ([`edf`]), and a synthetic log generator plus
//! benchmark harness ([`generate`], [`bench`]).

pub mod bench;
pub mod cli;
pub mod column;
pub mod dataframe;
pub mod dfg;
pub mod edf;
mod error;
pub mod eventlog;
pub mod generate;
pub mod transforms;
pub mod value;

pub use column::Column;
pub use dataframe::Dataframe;
pub use dfg::DfgGraph;
pub use error::{Error, Result};
pub use eventlog::{Event, EventLog, LogStats};
pub use value::{AttrValue, ColumnType};
