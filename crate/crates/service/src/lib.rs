//! HTTP session service, SVG rendering and script runner for the sculpting engine.

pub mod api;
pub mod script;
pub mod store;
pub mod svg;
