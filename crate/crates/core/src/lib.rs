pub mod cli;
pub mod dispatch;
pub mod efficiency;
pub mod lp;
pub mod metrics;
pub mod planner;
pub mod simulator;
pub mod synthetic;
pub mod timeseries;
