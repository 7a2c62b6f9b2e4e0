//! Scenario generators, measurements and figure tables.

pub mod churn;
pub mod figures;
pub mod meeting;
pub mod scenario;
pub mod visits;

pub use churn::{
    churn_driver, random_churn_script, ChurnConfig, ChurnEvent, ChurnRecord, ChurnSchedule,
    ChurnTrace,
};
pub use figures::{run_figure, FigureId, FigureParams, FigureTable};
pub use meeting::{measure_meeting, meeting_run, MeetingConfig, MeetingSummary, RunStats};
pub use scenario::{random_connected_graph, random_tree, wire_bridges, Instance, Scenario};
pub use visits::{occupancy, visit_trace, visit_trace_on, VisitTrace};
