pub mod detector;
pub mod error;
pub mod fuzzer;
pub mod geometry;
pub mod oracle;
pub mod report;
pub mod scenario;
pub mod simulator;
