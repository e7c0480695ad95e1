//! Command-line front end: spec loading, suite dispatch, JSON reports and
//! CSV export.

pub mod commands;
pub mod fixtures;
pub mod report;
